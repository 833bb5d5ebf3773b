use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("alphabet size {0} out of range 1..=64")]
    AlphabetSize(usize),
    #[error("letter {letter} outside alphabet of size {size}")]
    LetterOutOfRange { letter: u8, size: usize },
    #[error("invalid word literal {0:?}")]
    WordSyntax(String),
    #[error("invalid threshold {0:?}")]
    ThresholdSyntax(String),
    #[error("threshold must exceed 1, got {0}")]
    ThresholdRange(String),
    #[error("empty word has no exponent")]
    EmptyWord,
    #[error("trigger must have length 2 with distinct letters, marker distinct from both")]
    BadTrigger,
    #[error("{anchor:?} occurs {found} time(s) in the prefix, need at least {needed}")]
    TooFewOccurrences { anchor: String, found: usize, needed: usize },
    #[error("morphism: {0}")]
    Morphism(String),
    #[error("letter {0} is not prolongable")]
    NotProlongable(u8),
    #[error("morphism is not an endomorphism")]
    NotEndomorphism,
    #[error("transfer lemma inapplicable: {0}")]
    TransferInapplicable(String),
    #[error("need 1 < a < b and q >= 1")]
    BoundOrdering,
    #[error("locality bound {given} below required {required}")]
    BoundTooSmall { given: usize, required: usize },
    #[error("constraints: {0}")]
    Constraints(String),
    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
    #[error("factor sets did not stabilize below prefix length {0}")]
    Unstable(usize),
    #[error("image set is not a code: {0}")]
    NotACode(String),
    #[error("degenerate f-image: {0}")]
    DegenerateImage(String),
    #[error("extension period violated: {0}")]
    ExtensionPeriod(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("bound violated at n = {n}: {detail}")]
    RatioBound { n: usize, detail: String },
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
