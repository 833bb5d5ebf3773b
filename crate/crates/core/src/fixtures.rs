//! Built-in morphisms, constraint sets and generated words.

use crate::avoidance::ConstraintSet;
use crate::error::{Error, Result};
use crate::morphisms::Morphism;
use crate::repetitions::Threshold;
use crate::words::{Alphabet, Word};

const MORPHISM_DATA: &str = include_str!("../data/morphisms.txt");

/// Sections of the morphism data file as `(name, comment, body)`.
fn sections() -> Vec<(&'static str, &'static str, String)> {
    let mut out: Vec<(&str, &str, String)> = Vec::new();
    for line in MORPHISM_DATA.lines() {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push((name, "", String::new()));
        } else if let Some(last) = out.last_mut() {
            if let Some(c) = line.strip_prefix("# ") {
                if last.1.is_empty() {
                    last.1 = c;
                    continue;
                }
            }
            last.2.push_str(line);
            last.2.push('\n');
        }
    }
    out
}

pub fn morphism_names() -> Vec<&'static str> {
    sections().into_iter().map(|s| s.0).collect()
}

pub fn morphism_description(name: &str) -> Option<&'static str> {
    sections().into_iter().find(|s| s.0 == name).map(|s| s.1)
}

pub fn morphism(name: &str) -> Result<Morphism> {
    let (_, _, body) = sections()
        .into_iter()
        .find(|s| s.0 == name)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    body.parse()
}

/// Text of a built-in morphism in the file format.
pub fn morphism_text(name: &str) -> Result<String> {
    Ok(morphism(name)?.to_string())
}

pub const F_ETA: [&str; 13] = [
    "12", "21", "23", "31", "103", "302", "303", "132013", "320132", "2010201", "2013201", "3013203", "030102030",
];

pub const F_GAMMA: [&str; 9] = [
    "0210",
    "1021",
    "2102",
    "012010201210120212012",
    "020121012021201020121",
    "101202120102012101202",
    "120121012021201020120",
    "201202120102012101201",
    "212010201210120212010",
];

pub const SEVENTEEN_BETTER_WHITELIST: [&str; 6] = ["0120210", "01210", "02120", "10201", "20102", "21012"];

fn words(list: &[&str]) -> Vec<Word> {
    list.iter().map(|s| s.parse().expect("fixture word")).collect()
}

pub fn eta_good() -> ConstraintSet {
    ConstraintSet::new(Alphabet::QUATERNARY).square_free().forbid(words(&F_ETA))
}

pub fn gamma_good() -> ConstraintSet {
    ConstraintSet::new(Alphabet::TERNARY).square_free().forbid(words(&F_GAMMA))
}

pub fn sixteen_good() -> ConstraintSet {
    ConstraintSet::new(Alphabet::TERNARY).with_threshold(Threshold::non_strict(52, 27)).with_max_palindromes(16)
}

pub fn seventeen_good() -> ConstraintSet {
    ConstraintSet::new(Alphabet::TERNARY).with_threshold(Threshold::non_strict(25, 13)).with_max_palindromes(17)
}

pub fn seventeen_better() -> ConstraintSet {
    seventeen_good().with_allowed_palindromes(words(&SEVENTEEN_BETTER_WHITELIST))
}

/// Square-free ternary words avoiding `010` with at most 16 palindromes.
pub fn square_free_avoiding_010() -> ConstraintSet {
    ConstraintSet::new(Alphabet::TERNARY).square_free().forbid(words(&["010"])).with_max_palindromes(16)
}

/// 9/4-free ternary words with at most six palindromes, at most one of them
/// from `{00, 11, 22}`.
pub fn six_palindromes_one_square() -> ConstraintSet {
    ConstraintSet::new(Alphabet::TERNARY)
        .with_threshold(Threshold::non_strict(9, 4))
        .with_max_palindromes(6)
        .with_factor_limit(1, words(&["00", "11", "22"]))
}

/// 41/22-free ternary words with at most 17 palindromes.
pub fn optimality_41_22_17() -> ConstraintSet {
    ConstraintSet::new(Alphabet::TERNARY).with_threshold(Threshold::non_strict(41, 22)).with_max_palindromes(17)
}

pub fn constraint_names() -> Vec<&'static str> {
    vec!["eta-good", "gamma-good", "16-good", "17-good", "17-better", "sqfree-010-16", "94-six-palindromes", "4122-17-palindromes"]
}

pub fn constraints(name: &str) -> Result<ConstraintSet> {
    Ok(match name {
        "eta-good" => eta_good(),
        "gamma-good" => gamma_good(),
        "16-good" => sixteen_good(),
        "17-good" => seventeen_good(),
        "17-better" => seventeen_better(),
        "sqfree-010-16" => square_free_avoiding_010(),
        "94-six-palindromes" => six_palindromes_one_square(),
        "4122-17-palindromes" => optimality_41_22_17(),
        _ => return Err(Error::UnknownFixture(name.to_string())),
    })
}

/// A uniform morphism with the freeness transfer it is claimed to satisfy.
#[derive(Debug, Clone)]
pub struct TransferClaim {
    pub label: &'static str,
    pub morphism: &'static str,
    pub alpha: Threshold,
    pub beta: Threshold,
    /// Claimed bound on the number of palindromes in images.
    pub palindromes: Option<usize>,
    /// Letter pattern the images avoid.
    pub pattern: Option<&'static str>,
}

pub fn transfer_claims() -> Vec<TransferClaim> {
    let a3 = Threshold::strict(7, 4);
    let a4 = Threshold::strict(7, 5);
    let claim = |label, morphism, alpha, beta, palindromes, pattern| TransferClaim { label, morphism, alpha, beta, palindromes, pattern };
    vec![
        claim("3.b", "u25", a3, Threshold::strict(9, 4), Some(6), None),
        claim("3.c", "u4", a3, Threshold::strict(2, 1), Some(7), None),
        claim("3.d", "u609", a3, Threshold::strict(52, 27), Some(16), None),
        claim("3.e", "u121", a3, Threshold::strict(25, 13), Some(17), None),
        claim("3.f", "u87", a4, Threshold::strict(7, 4), Some(18), None),
        claim("lp.a", "lp-abaca", a3, Threshold::strict(15, 8), None, Some("abaca")),
        claim("lp.b", "lp-abcab", a3, Threshold::strict(11, 6), None, Some("abcab")),
        claim("lp.c", "lp-abacbc", a4, Threshold::strict(7, 4), None, Some("abacbc")),
    ]
}

pub fn transfer_claim(label: &str) -> Result<TransferClaim> {
    transfer_claims()
        .into_iter()
        .find(|c| c.label == label || c.morphism == label)
        .ok_or_else(|| Error::UnknownFixture(label.to_string()))
}

fn builtin(name: &str) -> Morphism {
    morphism(name).expect("built-in morphism")
}

/// Prefix of `(012)^ω`.
pub fn periodic_012(n: usize) -> Word {
    Word::new((0..n).map(|i| (i % 3) as u8).collect())
}

pub fn thue_morse(n: usize) -> Word {
    builtin("thue-morse").fixed_point_prefix(0, n).unwrap()
}

pub fn t_word(n: usize) -> Word {
    builtin("t").fixed_point_prefix(0, n).unwrap()
}

pub fn eta_word(n: usize) -> Word {
    builtin("eta").fixed_point_prefix(0, n).unwrap()
}

pub fn h_word(n: usize) -> Word {
    builtin("h").fixed_point_prefix(0, n).unwrap()
}

/// Prefix of `γ(η^ω(0))`.
pub fn gamma_eta_word(n: usize) -> Word {
    image_prefix(&builtin("gamma"), &builtin("eta"), n)
}

/// Prefix of `g(h^ω(0))`.
pub fn g_h_word(n: usize) -> Word {
    image_prefix(&builtin("g"), &builtin("h"), n)
}

fn image_prefix(outer: &Morphism, inner: &Morphism, n: usize) -> Word {
    let src = inner.fixed_point_prefix(0, n / outer.min_image_len() + 1).unwrap();
    Word::from_slice(&outer.apply(&src).unwrap().letters()[..n])
}

/// Named infinite words for the command line.
pub fn word_names() -> Vec<&'static str> {
    vec!["periodic-012", "thue-morse", "t", "eta", "h", "gamma-eta", "g-h"]
}

pub fn word(name: &str, n: usize) -> Result<Word> {
    Ok(match name {
        "periodic-012" => periodic_012(n),
        "thue-morse" => thue_morse(n),
        "t" => t_word(n),
        "eta" => eta_word(n),
        "h" => h_word(n),
        "gamma-eta" => gamma_eta_word(n),
        "g-h" => g_h_word(n),
        _ => return Err(Error::UnknownFixture(name.to_string())),
    })
}

const BISPECIAL_DATA: &str = include_str!("../data/bispecial.txt");

/// Left pair, core expression, right pair.
pub type ListedTriplet = ((u8, u8), &'static str, (u8, u8));

/// One f-image family of `h`: triplets as `(left, core expression, right)`
/// for steps 0 to 4, and one shortest return word of a member.
#[derive(Debug, Clone)]
pub struct BispecialItem {
    pub id: usize,
    pub steps: Vec<ListedTriplet>,
    pub return_anchor: &'static str,
    pub returns: Vec<&'static str>,
}

/// A bispecial factor of `g(h^ω(0))` with a shortest return word.
#[derive(Debug, Clone, Copy)]
pub struct ReturnRow {
    pub table: &'static str,
    pub bispecial: &'static str,
    pub return_word: &'static str,
}

fn pair(s: &str) -> (u8, u8) {
    let b = s.as_bytes();
    (b[0] - b'0', b[1] - b'0')
}

pub fn bispecial_items() -> Vec<BispecialItem> {
    let mut out: Vec<BispecialItem> = Vec::new();
    for line in BISPECIAL_DATA.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            [id] if id.starts_with('[') => out.push(BispecialItem {
                id: id.trim_matches(|c| c == '[' || c == ']').parse().expect("item id"),
                steps: Vec::new(),
                return_anchor: "",
                returns: Vec::new(),
            }),
            [tag, l, core, r] if tag.starts_with('f') => out.last_mut().expect("item").steps.push((pair(l), core, pair(r))),
            ["return", anchor, ":", rs @ ..] => {
                let item = out.last_mut().expect("item");
                item.return_anchor = anchor;
                item.returns = rs.to_vec();
            }
            _ => {}
        }
    }
    out
}

pub fn return_rows() -> Vec<ReturnRow> {
    BISPECIAL_DATA
        .lines()
        .filter_map(|l| match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            [t @ ("table-a" | "table-b"), b, r] => Some(ReturnRow { table: t, bispecial: b, return_word: r }),
            _ => None,
        })
        .collect()
}
