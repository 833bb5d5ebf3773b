//! Morphisms, fixed points, incidence matrices and freeness transfer.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::avoidance::{walk, ConstraintSet, LetterPattern, SearchState, Step, Visitor, WalkOptions};
use crate::error::{Error, Result};
use crate::repetitions::{crossing_violation, is_free_slice, Rational, Repetition, Threshold};
use crate::words::{Alphabet, Eertree, ParikhVector, Word};

pub const CERTIFICATE_FORMAT: &str = "palinword-transfer/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Word>,
}

impl Morphism {
    /// Images indexed by source letter. The target alphabet defaults to the
    /// smallest one containing every image letter (at least the source size
    /// when images stay inside it).
    pub fn new(images: Vec<Word>, target: Option<Alphabet>) -> Result<Self> {
        let source = Alphabet::new(images.len())?;
        if let Some(i) = images.iter().position(Word::is_empty) {
            return Err(Error::Morphism(format!("image of {i} is empty")));
        }
        let needed = images.iter().flat_map(|w| w.letters()).max().map_or(1, |&m| m as usize + 1);
        let target = match target {
            Some(t) => {
                for w in &images {
                    w.check_alphabet(t)?;
                }
                t
            }
            None => Alphabet::new(needed)?,
        };
        Ok(Morphism { source, target, images })
    }

    pub fn source(&self) -> Alphabet {
        self.source
    }

    pub fn target(&self) -> Alphabet {
        self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, letter: u8) -> &Word {
        &self.images[letter as usize]
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(Word::len).max().unwrap()
    }

    pub fn min_image_len(&self) -> usize {
        self.images.iter().map(Word::len).min().unwrap()
    }

    /// Images stay inside the source alphabet.
    pub fn is_endomorphism(&self) -> bool {
        self.target.size() <= self.source.size()
    }

    /// View with the target alphabet widened to the source when possible.
    fn as_endomorphism(&self) -> Result<Morphism> {
        if !self.is_endomorphism() {
            return Err(Error::NotEndomorphism);
        }
        Ok(Morphism { target: self.source, ..self.clone() })
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        w.check_alphabet(self.source)?;
        Ok(Word::new(self.apply_slice(w.letters())))
    }

    pub(crate) fn apply_slice(&self, w: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(w.len() * self.max_image_len());
        for &l in w {
            out.extend_from_slice(self.images[l as usize].letters());
        }
        out
    }

    pub fn is_prolongable(&self, seed: u8) -> bool {
        self.is_endomorphism()
            && self.source.contains(seed)
            && self.image(seed).len() >= 2
            && self.image(seed)[0] == seed
    }

    /// Length-`n` prefix of the fixed point starting with `seed`.
    pub fn fixed_point_prefix(&self, seed: u8, n: usize) -> Result<Word> {
        if !self.is_prolongable(seed) {
            return Err(Error::NotProlongable(seed));
        }
        let mut out = self.image(seed).letters().to_vec();
        let mut i = 1;
        while out.len() < n {
            let l = out[i];
            out.extend_from_slice(self.images[l as usize].letters());
            i += 1;
        }
        out.truncate(n);
        Ok(Word::new(out))
    }

    /// Column `j` is the Parikh vector of the image of `j`; one row per
    /// target letter, so the matrix is square exactly for endomorphisms.
    pub fn incidence_matrix(&self) -> Result<IncidenceMatrix> {
        let mut entries = vec![vec![0u64; self.source.size()]; self.target.size()];
        for (j, img) in self.images.iter().enumerate() {
            for &k in img.letters() {
                entries[k as usize][j] += 1;
            }
        }
        Ok(IncidenceMatrix { entries })
    }

    pub fn uniform_length(&self) -> Option<usize> {
        let q = self.images[0].len();
        self.images.iter().all(|w| w.len() == q).then_some(q)
    }

    /// `f(ab) = u f(c) v` forces `u = ε, a = c` or `v = ε, b = c`.
    pub fn is_synchronizing(&self) -> bool {
        let k = self.source.size() as u8;
        for a in 0..k {
            for b in 0..k {
                let s = [self.image(a).letters(), self.image(b).letters()].concat();
                for c in 0..k {
                    let fc = self.image(c).letters();
                    for u in 0..(s.len() + 1).saturating_sub(fc.len()) {
                        if &s[u..u + fc.len()] == fc {
                            let ok = (u == 0 && a == c) || (u + fc.len() == s.len() && b == c);
                            if !ok {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    pub fn classify(&self) -> MorphismClass {
        let endo = self.as_endomorphism().ok();
        MorphismClass {
            uniform_length: self.uniform_length(),
            synchronizing: self.is_synchronizing(),
            primitive: endo.as_ref().is_some_and(|m| m.incidence_matrix().is_ok_and(|x| x.is_primitive())),
            prolongable_letters: self.source.letters().filter(|&l| self.is_prolongable(l)).collect(),
        }
    }

    /// The morphism `σ ∘ self ∘ σ⁻¹` for an endomorphism and a permutation σ.
    pub fn conjugate(&self, perm: &[u8]) -> Result<Morphism> {
        let m = self.as_endomorphism()?;
        let mut images = vec![Word::empty(); m.source.size()];
        for (l, img) in m.images.iter().enumerate() {
            images[perm[l] as usize] = img.permute(perm);
        }
        Morphism::new(images, Some(m.source))
    }
}

impl FromStr for Morphism {
    type Err = Error;

    /// One `<letter> -> <image>` line per source letter; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut pairs: Vec<(u8, Word)> = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (l, img) = line
                .split_once("->")
                .ok_or_else(|| Error::Morphism(format!("expected `<letter> -> <image>`, got {line:?}")))?;
            let l: Word = l.trim().parse()?;
            if l.len() != 1 {
                return Err(Error::Morphism(format!("left side {l} is not a single letter")));
            }
            pairs.push((l[0], img.trim().parse()?));
        }
        pairs.sort_by_key(|p| p.0);
        for (i, (l, _)) in pairs.iter().enumerate() {
            if *l as usize != i {
                return Err(Error::Morphism(format!("letters must be 0..{} each exactly once", pairs.len())));
            }
        }
        if pairs.is_empty() {
            return Err(Error::Morphism("no images".into()));
        }
        Morphism::new(pairs.into_iter().map(|p| p.1).collect(), None)
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, img) in self.images.iter().enumerate() {
            writeln!(f, "{} -> {}", Word::new(vec![l as u8]), img)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    entries: Vec<Vec<u64>>,
}

impl IncidenceMatrix {
    pub fn from_rows(entries: Vec<Vec<u64>>) -> Self {
        IncidenceMatrix { entries }
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, v: &ParikhVector) -> ParikhVector {
        ParikhVector(self.entries.iter().map(|row| row.iter().zip(&v.0).map(|(a, b)| a * b).sum()).collect())
    }

    /// Some power `M^k` with `k ≤ d²` has only positive entries.
    pub fn is_primitive(&self) -> bool {
        let d = self.dim();
        if self.entries.iter().any(|r| r.len() != d) {
            return false;
        }
        let base: Vec<Vec<bool>> = self.entries.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
        let mut p = base.clone();
        for _ in 0..d * d {
            if p.iter().all(|r| r.iter().all(|&x| x)) {
                return true;
            }
            p = (0..d).map(|i| (0..d).map(|j| (0..d).any(|k| p[i][k] && base[k][j])).collect()).collect();
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismClass {
    pub uniform_length: Option<usize>,
    pub synchronizing: bool,
    pub primitive: bool,
    pub prolongable_letters: BTreeSet<u8>,
}

/// `t = max(2b/(b−a), 2(q−1)(2b−1)/(q(b−1)))`.
pub fn mrs_bound(a: Rational, b: Rational, q: u64) -> Result<Rational> {
    let one = Rational::one();
    if !(one < a && a < b) || q == 0 {
        return Err(Error::BoundOrdering);
    }
    let two = Rational::from_integer(2);
    let q = Rational::from_integer(q as i64);
    let first = two * b / (b - a);
    let second = two * (q - one) * (two * b - one) / (q * (b - one));
    Ok(first.max(second))
}

pub fn ceil(r: Rational) -> usize {
    r.ceil().to_integer().max(0) as usize
}

/// Outcome of checking images of every source word up to some length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransferResult {
    Pass,
    /// First failing source word in lexicographic order, with the offending
    /// repetition located in its image.
    Fail { source_word: Word, repetition: Repetition, factor: Word },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferCertificate {
    pub uniform_length: Option<usize>,
    pub alpha: Threshold,
    pub beta: Threshold,
    pub t: Option<Rational>,
    pub max_source_length: usize,
    /// Source words (all lengths 1..=max) whose image was checked.
    pub words_checked: u64,
    pub words_at_max_length: u64,
    pub result: TransferResult,
}

impl TransferCertificate {
    pub fn passed(&self) -> bool {
        self.result == TransferResult::Pass
    }
}

impl fmt::Display for TransferCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "format={CERTIFICATE_FORMAT}")?;
        match self.uniform_length {
            Some(q) => writeln!(f, "uniform_length={q}")?,
            None => writeln!(f, "uniform_length=none")?,
        }
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "beta={}", self.beta)?;
        match self.t {
            Some(t) => writeln!(f, "t={t}")?,
            None => writeln!(f, "t=none")?,
        }
        writeln!(f, "max_source_length={}", self.max_source_length)?;
        writeln!(f, "words_checked={}", self.words_checked)?;
        writeln!(f, "words_at_max_length={}", self.words_at_max_length)?;
        match &self.result {
            TransferResult::Pass => writeln!(f, "result=PASS"),
            TransferResult::Fail { source_word, repetition, factor } => {
                writeln!(f, "result=FAIL")?;
                writeln!(f, "counterexample={source_word}")?;
                writeln!(f, "image_factor={factor}")?;
                writeln!(f, "exponent={}", repetition.exponent())
            }
        }
    }
}

/// Incremental image buffer for the source-word walk. Each node appends one
/// image block; new repetitions either cross the junction with the previous
/// blocks or lie inside the last few blocks, whose image is checked once per
/// distinct source window.
struct ImageChecker<'m> {
    m: &'m Morphism,
    beta: Threshold,
    window: usize,
    max_len: usize,
    image: Vec<u8>,
    starts: Vec<usize>,
    cache: HashMap<Vec<u8>, Option<Repetition>>,
    checked: u64,
    at_max: u64,
    failure: Option<TransferResult>,
}

impl<'m> ImageChecker<'m> {
    fn new(m: &'m Morphism, beta: Threshold, max_len: usize) -> Self {
        // longest period a repetition inside one block can violate with
        let block = m.max_image_len();
        let mut p_max = 1;
        while beta.min_excess(p_max + 1) < block {
            p_max += 1;
        }
        let window = p_max.div_ceil(m.min_image_len()) + 1;
        ImageChecker {
            m,
            beta,
            window,
            max_len,
            image: Vec::new(),
            starts: Vec::new(),
            cache: HashMap::new(),
            checked: 0,
            at_max: 0,
            failure: None,
        }
    }

    fn check(&mut self, word: &[u8]) -> Option<Repetition> {
        let boundary = self.image.len();
        let k = word.len().min(self.window);
        let win = &word[word.len() - k..];
        let m = self.m;
        let beta = self.beta;
        let local = *self
            .cache
            .entry(win.to_vec())
            .or_insert_with(|| is_free_slice(&m.apply_slice(win), beta).err());
        if let Some(mut rep) = local {
            rep.start += self.starts[word.len() - k];
            return Some(rep);
        }
        crossing_violation(&self.image, boundary - self.m.image(*word.last().unwrap()).len(), self.beta)
    }
}

impl Visitor for ImageChecker<'_> {
    fn enter(&mut self, s: &SearchState<'_>) -> Step {
        let word = s.word();
        self.starts.push(self.image.len());
        self.image.extend_from_slice(self.m.image(*word.last().unwrap()).letters());
        self.checked += 1;
        if word.len() == self.max_len {
            self.at_max += 1;
        }
        if let Some(rep) = self.check(word) {
            self.failure = Some(TransferResult::Fail {
                source_word: Word::from_slice(word),
                repetition: rep,
                factor: Word::from_slice(rep.factor(&self.image)),
            });
            return Step::Stop;
        }
        Step::Descend
    }

    fn leave(&mut self, _s: &SearchState<'_>) {
        let start = self.starts.pop().unwrap();
        self.image.truncate(start);
    }
}

/// Checks that the image of every word satisfying `source` of length at
/// most `max_len` is `beta`-free.
pub fn check_images(m: &Morphism, source: &ConstraintSet, max_len: usize, beta: Threshold) -> Result<(u64, u64, TransferResult)> {
    if source.alphabet != m.source() {
        return Err(Error::Morphism("source constraints use a different alphabet".into()));
    }
    let mut checker = ImageChecker::new(m, beta, max_len);
    walk(source, &WalkOptions { max_depth: max_len, ..Default::default() }, &mut checker)?;
    let result = checker.failure.unwrap_or(TransferResult::Pass);
    Ok((checker.checked, checker.at_max, result))
}

/// Search depth used when `α ≥ β`: no transfer bound exists, but a bounded
/// search can still exhibit a counterexample.
pub const INAPPLICABLE_SEARCH_DEPTH: usize = 16;

/// Checks the hypothesis of the uniform transfer lemma: images of all
/// `alpha`-free words of length at most `ceil(t)` are `beta`-free.
pub fn verify_transfer(m: &Morphism, alpha: Threshold, beta: Threshold) -> Result<TransferCertificate> {
    let q = m
        .uniform_length()
        .ok_or_else(|| Error::TransferInapplicable("morphism is not uniform".into()))?;
    if !m.is_synchronizing() {
        return Err(Error::TransferInapplicable("morphism is not synchronizing".into()));
    }
    let source = ConstraintSet::new(m.source()).with_threshold(alpha);
    let t = mrs_bound(alpha.value(), beta.value(), q as u64).ok();
    let max_len = t.map_or(INAPPLICABLE_SEARCH_DEPTH, ceil);
    let (words_checked, words_at_max_length, result) = check_images(m, &source, max_len, beta)?;
    if t.is_none() && result == TransferResult::Pass {
        return Err(Error::TransferInapplicable(format!(
            "alpha {alpha} is not below beta {beta}, and no counterexample up to length {max_len}"
        )));
    }
    Ok(TransferCertificate { uniform_length: Some(q), alpha, beta, t, max_source_length: max_len, words_checked, words_at_max_length, result })
}

/// The non-uniform cube-free case: images of all binary cube-free words of
/// length 24 under `0 → 012, 1 → 0012` are 10/3⁺-free.
pub fn verify_cubefree_transfer_nonuniform() -> Result<TransferCertificate> {
    verify_cubefree_transfer_with(Threshold::strict(10, 3))
}

pub fn verify_cubefree_transfer_with(beta: Threshold) -> Result<TransferCertificate> {
    let m: Morphism = "0 -> 012\n1 -> 0012".parse()?;
    let alpha = Threshold::non_strict(3, 1);
    let source = ConstraintSet::new(Alphabet::BINARY).with_threshold(alpha);
    let (words_checked, words_at_max_length, result) = check_images(&m, &source, 24, beta)?;
    Ok(TransferCertificate { uniform_length: None, alpha, beta, t: None, max_source_length: 24, words_checked, words_at_max_length, result })
}

/// Distinct palindromes occurring in images of `alpha`-free source words.
/// Source words are taken long enough to cover every factor up to a length
/// `Λ`; `Λ` doubles until the longest palindrome found is at most `Λ − 2`, so
/// no longer palindrome can occur (its centre factor would have been found).
/// Fails with [`Error::Unstable`] once `Λ` passes `16 · max_image_len`, which
/// happens when images contain arbitrarily long palindromes.
pub fn image_palindromes(m: &Morphism, alpha: Threshold) -> Result<Vec<Word>> {
    let source = ConstraintSet::new(m.source()).with_threshold(alpha);
    let mut lambda = 2 * m.max_image_len() + 2;
    loop {
        if lambda > 16 * m.max_image_len() + 16 {
            return Err(Error::Unstable(lambda));
        }
        let len = (lambda - 1).div_ceil(m.min_image_len()) + 1;
        let mut found: BTreeSet<Word> = BTreeSet::new();
        crate::avoidance::for_each_word(&source, len, |w| {
            let img = m.apply_slice(w);
            for p in Eertree::from_word(&img, m.target()).palindromes() {
                if p.len() <= lambda {
                    found.insert(p);
                }
            }
        })?;
        let longest = found.iter().map(Word::len).max().unwrap_or(0);
        if longest + 2 <= lambda {
            let mut v: Vec<Word> = found.into_iter().collect();
            v.sort_by(|a, b| a.shortlex_cmp(b));
            return Ok(v);
        }
        lambda *= 2;
    }
}

/// Whether images of `alpha`-free source words avoid `pattern`; factors of
/// length `|pattern|` are covered by images of source words of length
/// `ceil((|pattern| − 1) / min_image_len) + 1`.
pub fn images_avoid_pattern(m: &Morphism, alpha: Threshold, pattern: &LetterPattern) -> Result<std::result::Result<(), Word>> {
    let source = ConstraintSet::new(m.source()).with_threshold(alpha);
    let len = (pattern.len() - 1).div_ceil(m.min_image_len()) + 1;
    let mut bad: Option<Word> = None;
    crate::avoidance::for_each_word(&source, len, |w| {
        if bad.is_none() && crate::avoidance::letter_pattern_occurs(&Word::new(m.apply_slice(w)), pattern) {
            bad = Some(Word::from_slice(w));
        }
    })?;
    Ok(bad.map_or(Ok(()), Err))
}

/// Minimal locality radius for [`synchronization_point_check`].
pub fn synchronization_bound(m: &Morphism, w: &Word) -> usize {
    w.len() + 2 * m.max_image_len()
}

/// Checks that `(w[..split], w[split..])` is a synchronization point of `w`
/// for all occurrences of `w` in the image of `context`: every occurrence
/// must have its split position on an image-block boundary. Each occurrence
/// is decided by the source factor whose image covers it, of image length at
/// most `bound`.
pub fn synchronization_point_check(m: &Morphism, context: &Word, w: &Word, split: usize, bound: Option<usize>) -> Result<bool> {
    let required = synchronization_bound(m, w);
    let bound = bound.unwrap_or(required);
    if bound < required {
        return Err(Error::BoundTooSmall { given: bound, required });
    }
    if split > w.len() {
        return Err(Error::Precondition(format!("split {split} beyond |w| = {}", w.len())));
    }
    if w.is_empty() {
        return Ok(true);
    }
    context.check_alphabet(m.source())?;
    let image = m.apply_slice(context.letters());
    let mut boundary = vec![false; image.len() + 1];
    let mut pos = 0;
    boundary[0] = true;
    for &l in context.letters() {
        pos += m.image(l).len();
        boundary[pos] = true;
    }
    let occ = crate::repetitions::occurrences(&image, w.letters());
    if occ.is_empty() {
        return Err(Error::Precondition(format!("{w} does not occur in the image of the context")));
    }
    Ok(occ.into_iter().all(|i| boundary[i + split]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repetitions::max_exponent_naive;
    use crate::words::w;
    use proptest::prelude::*;

    fn m(s: &str) -> Morphism {
        s.parse().unwrap()
    }

    fn h() -> Morphism {
        m("0 -> 01213012\n1 -> 31\n2 -> 01201312\n3 -> 0121301312")
    }

    fn t() -> Morphism {
        m("0 -> 01120\n1 -> 12001\n2 -> 2")
    }

    fn thue_morse() -> Morphism {
        m("0 -> 01\n1 -> 10")
    }

    fn c4() -> Morphism {
        m("0 -> 0012\n1 -> 0112\n2 -> 0122")
    }

    #[test]
    fn apply_examples() {
        assert_eq!(t().apply(&w("0")).unwrap(), w("01120"));
        assert_eq!(t().apply(&Word::empty()).unwrap(), Word::empty());
        assert_eq!(h().apply(&w("31")).unwrap(), w("012130131231"));
        assert!(t().apply(&w("3")).is_err());
    }

    #[test]
    fn fixed_points() {
        assert_eq!(thue_morse().fixed_point_prefix(0, 8).unwrap(), w("01101001"));
        let t2 = t().apply(&t().apply(&w("0")).unwrap()).unwrap();
        assert_eq!(t().fixed_point_prefix(0, 21).unwrap(), t2);
        assert_eq!(t2, w("011201200112001201120"));
        assert_eq!(m("0 -> 01\n1 -> 0").fixed_point_prefix(1, 5), Err(Error::NotProlongable(1)));
        assert_eq!(t().fixed_point_prefix(2, 5), Err(Error::NotProlongable(2)));
    }

    #[test]
    fn matrices() {
        let rows = |m: &Morphism| m.incidence_matrix().unwrap().rows().to_vec();
        assert_eq!(rows(&h()), vec![vec![2, 0, 2, 2], vec![3, 1, 3, 4], vec![2, 0, 2, 2], vec![1, 1, 1, 2]]);
        let g = Morphism::new(vec![w("0102012"), w("0212"), w("0121012"), w("01020121012")], None).unwrap();
        assert_eq!(rows(&g), vec![vec![3, 1, 2, 4], vec![2, 1, 3, 4], vec![2, 2, 2, 3]]);
        let wide = Morphism::new(vec![w("0"), w("2")], None).unwrap();
        assert!(!wide.is_endomorphism());
        assert!(!wide.is_prolongable(0));
        let id = m("0 -> 0\n1 -> 1\n2 -> 2");
        assert_eq!(rows(&id), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn classification() {
        assert!(h().classify().primitive);
        let ct = t().classify();
        assert!(!ct.primitive);
        assert_eq!(ct.prolongable_letters, [0u8, 1].into_iter().collect());
        let c = c4().classify();
        assert_eq!(c.uniform_length, Some(4));
        assert!(c.synchronizing);
        assert!(!thue_morse().is_synchronizing());
        assert!(m("0 -> 0\n1 -> 1\n2 -> 2").is_synchronizing());
    }

    #[test]
    fn bounds() {
        let r = |n, d| Rational::new(n, d);
        assert_eq!(mrs_bound(r(7, 4), r(9, 4), 25).unwrap(), r(9, 1));
        assert_eq!(mrs_bound(r(7, 4), r(2, 1), 4).unwrap(), r(16, 1));
        assert_eq!(mrs_bound(r(7, 5), r(7, 4), 87).unwrap(), r(10, 1));
        assert_eq!(mrs_bound(r(9, 4), r(7, 4), 4), Err(Error::BoundOrdering));
        assert_eq!(mrs_bound(r(1, 1), r(7, 4), 4), Err(Error::BoundOrdering));
    }

    #[test]
    fn transfer_small_cases() {
        let cert = verify_transfer(&c4(), Threshold::strict(7, 4), Threshold::strict(2, 1)).unwrap();
        assert!(cert.passed(), "{cert}");
        assert_eq!(cert.max_source_length, 16);
        let id = m("0 -> 0\n1 -> 1\n2 -> 2");
        let cert = verify_transfer(&id, Threshold::strict(7, 4), Threshold::strict(3, 2)).unwrap();
        match cert.result {
            TransferResult::Fail { source_word, repetition, .. } => {
                assert!(repetition.exponent() > Rational::new(3, 2));
                assert!(repetition.exponent() <= Rational::new(7, 4));
                assert!(source_word.len() <= INAPPLICABLE_SEARCH_DEPTH);
            }
            r => panic!("{r:?}"),
        }
        assert!(matches!(verify_transfer(&thue_morse(), Threshold::strict(7, 4), Threshold::strict(2, 1)), Err(Error::TransferInapplicable(_))));
        assert!(matches!(verify_transfer(&t(), Threshold::strict(7, 4), Threshold::strict(2, 1)), Err(Error::TransferInapplicable(_))));
    }

    #[test]
    fn transfer_matches_direct_check() {
        // same verdict as checking every image with the full exponent routine
        for (alpha, beta) in [(Threshold::strict(7, 4), Threshold::strict(2, 1)), (Threshold::strict(7, 4), Threshold::non_strict(2, 1)), (Threshold::strict(7, 4), Threshold::strict(15, 8))] {
            let cert = verify_transfer(&c4(), alpha, beta).unwrap();
            let source = ConstraintSet::new(Alphabet::TERNARY).with_threshold(alpha);
            let mut first_bad = None;
            let mut v = |s: &SearchState<'_>| {
                if first_bad.is_none() && is_free_slice(&c4().apply_slice(s.word()), beta).is_err() {
                    first_bad = Some(Word::from_slice(s.word()));
                    return Step::Stop;
                }
                Step::Descend
            };
            walk(&source, &WalkOptions { max_depth: cert.max_source_length, ..Default::default() }, &mut v).unwrap();
            match (&cert.result, first_bad) {
                (TransferResult::Pass, None) => {}
                (TransferResult::Fail { source_word, .. }, Some(b)) => assert_eq!(source_word, &b),
                (r, b) => panic!("{beta}: {r:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn cubefree_sanity() {
        let f = m("0 -> 012\n1 -> 0012");
        let img = f.apply(&w("01")).unwrap();
        assert_eq!(img, w("0120012"));
        assert!(!Threshold::strict(10, 3).violated_by(max_exponent_naive(img.letters()).unwrap().0));
        let cert = verify_cubefree_transfer_with(Threshold::strict(2, 1)).unwrap();
        assert!(!cert.passed());
    }

    #[test]
    fn synchronization() {
        let ctx = h().fixed_point_prefix(0, 3000).unwrap();
        let h0 = h().image(0).clone();
        assert!(synchronization_point_check(&h(), &ctx, &h0, 0, None).unwrap());
        assert!(synchronization_point_check(&h(), &ctx, &h0, h0.len(), None).unwrap());
        assert!(!synchronization_point_check(&h(), &ctx, &w("31"), 0, None).unwrap());
        let tm = thue_morse().fixed_point_prefix(0, 500).unwrap();
        assert!(!synchronization_point_check(&thue_morse(), &tm, &w("01"), 0, None).unwrap());
        assert!(matches!(synchronization_point_check(&h(), &ctx, &h0, 0, Some(3)), Err(Error::BoundTooSmall { .. })));
    }

    #[test]
    fn parse_errors() {
        assert!("0 -> \n1 -> 1".parse::<Morphism>().is_err());
        assert!("0 -> 1\n2 -> 1".parse::<Morphism>().is_err());
        assert!("0 => 1".parse::<Morphism>().is_err());
        let text = "# comment\n\n1 -> 10\n0 -> 01 # trailing\n";
        assert_eq!(text.parse::<Morphism>().unwrap(), thue_morse());
        assert_eq!(thue_morse().to_string().parse::<Morphism>().unwrap(), thue_morse());
    }

    proptest! {
        #[test]
        fn parikh_identity(u in proptest::collection::vec(0u8..4, 0..60)) {
            let mm = h();
            let pu = ParikhVector::of(&u, Alphabet::QUATERNARY);
            let img = mm.apply_slice(&u);
            prop_assert_eq!(mm.incidence_matrix().unwrap().apply(&pu), ParikhVector::of(&img, Alphabet::QUATERNARY));
        }

        #[test]
        fn fixed_point_prefixes(n in 1usize..400, k in 0usize..400) {
            let mm = t();
            let a = mm.fixed_point_prefix(0, n).unwrap();
            let b = mm.fixed_point_prefix(0, n + k).unwrap();
            prop_assert!(b.starts_with(a.letters()));
            prop_assert!(mm.apply(&a).unwrap().starts_with(a.letters()));
        }

        #[test]
        fn synchronizing_stable_under_renaming(pi in 0usize..6, which in 0usize..3) {
            let perms = [[0u8, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let mm = [c4(), t(), m("0 -> 01\n1 -> 12\n2 -> 20")][which].clone();
            prop_assert_eq!(mm.conjugate(&perms[pi]).unwrap().is_synchronizing(), mm.is_synchronizing());
        }
    }
}
