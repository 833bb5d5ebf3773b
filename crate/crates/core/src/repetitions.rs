//! Exact fractional powers: exponents, freeness thresholds, return words.
//!
//! A factor `v` with period `p` has exponent `|v|/p`. Everything here uses
//! exact rationals.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::suffix::SuffixIndex;
use crate::words::Word;

pub type Rational = Ratio<i64>;

/// Exponent bound. `plus = true` means "β⁺-free": exponents strictly above β
/// are forbidden. `plus = false` means "β-free": exponents ≥ β are forbidden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Threshold {
    value: Rational,
    plus: bool,
}

impl Threshold {
    pub fn new(value: Rational, plus: bool) -> Result<Self> {
        if value <= Rational::one() {
            return Err(Error::ThresholdRange(value.to_string()));
        }
        Ok(Threshold { value, plus })
    }

    pub fn strict(num: i64, den: i64) -> Self {
        Threshold::new(Rational::new(num, den), true).expect("threshold > 1")
    }

    pub fn non_strict(num: i64, den: i64) -> Self {
        Threshold::new(Rational::new(num, den), false).expect("threshold > 1")
    }

    pub fn value(&self) -> Rational {
        self.value
    }

    pub fn is_plus(&self) -> bool {
        self.plus
    }

    pub fn violated_by(&self, exponent: Rational) -> bool {
        if self.plus {
            exponent > self.value
        } else {
            exponent >= self.value
        }
    }

    /// Smallest number of periodic continuation letters after one full
    /// period that makes a repetition of period `p` violate the bound.
    pub(crate) fn min_excess(&self, p: usize) -> usize {
        let num = *self.value.numer() as i128;
        let den = *self.value.denom() as i128;
        let x = (num - den) * p as i128;
        let q = x / den;
        let r = x % den;
        let s = if self.plus { q + 1 } else if r == 0 { q } else { q + 1 };
        s.max(1) as usize
    }

    /// Whether `self`-freeness implies `other`-freeness.
    pub fn at_least_as_strong_as(&self, other: &Threshold) -> bool {
        match self.value.cmp(&other.value) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => !self.plus || other.plus,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_integer() {
            write!(f, "{}", self.value.numer())?;
        } else {
            write!(f, "{}/{}", self.value.numer(), self.value.denom())?;
        }
        if self.plus {
            write!(f, "+")?;
        }
        Ok(())
    }
}

impl FromStr for Threshold {
    type Err = Error;

    /// `"41/22+"` is strict, `"41/22"` non-strict, `"2+"` shorthand allowed.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ThresholdSyntax(s.to_string());
        let (body, plus) = match s.strip_suffix('+') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (n, d) = match body.split_once('/') {
            Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
            None => (body.parse::<i64>().map_err(|_| bad())?, 1),
        };
        if d <= 0 {
            return Err(bad());
        }
        Threshold::new(Rational::new(n, d), plus)
    }
}

/// A periodic factor `w[start..start+length]` with the given period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Repetition {
    pub start: usize,
    pub period: usize,
    pub length: usize,
}

impl Repetition {
    pub fn exponent(&self) -> Rational {
        Rational::new(self.length as i64, self.period as i64)
    }

    /// Positional check of the period.
    pub fn verify(&self, w: &[u8]) -> bool {
        self.period > 0
            && self.start + self.length <= w.len()
            && (self.start..self.start + self.length - self.period.min(self.length)).all(|i| w[i] == w[i + self.period])
    }

    pub fn factor<'a>(&self, w: &'a [u8]) -> &'a [u8] {
        &w[self.start..self.start + self.length]
    }
}

impl fmt::Display for Repetition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.start, self.period, self.length, self.exponent())
    }
}

fn lce(w: &[u8], i: usize, j: usize) -> usize {
    w[i..].iter().zip(&w[j..]).take_while(|(a, b)| a == b).count()
}

/// Maximal exponent by trying every start and period. Quadratic; test oracle
/// and short-word path.
pub fn max_exponent_naive(w: &[u8]) -> Result<(Rational, Repetition)> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut best = Repetition { start: 0, period: 1, length: 1 };
    for p in 1..w.len() {
        let mut i = 0;
        while i + p < w.len() {
            if w[i] != w[i + p] {
                i += 1;
                continue;
            }
            let run = lce(w, i, i + p);
            let cand = Repetition { start: i, period: p, length: p + run };
            if cand.exponent() > best.exponent() {
                best = cand;
            }
            i += run + 1;
        }
    }
    Ok((best.exponent(), best))
}

/// Maximal exponent over all non-empty factors, with a witness.
///
/// For long words this uses the suffix array: positions sharing a prefix of
/// length `d` form one group per LCP merge, and the closest two positions `g`
/// apart in a group give ratio `d/g`. The maximum of `1 + d/g` over groups is
/// the maximal exponent. Groups are merged small-into-large, O(n log² n).
pub fn max_exponent(w: &Word) -> Result<(Rational, Repetition)> {
    max_exponent_slice(w.letters())
}

pub fn max_exponent_slice(w: &[u8]) -> Result<(Rational, Repetition)> {
    if w.len() <= 256 {
        return max_exponent_naive(w);
    }
    let idx = SuffixIndex::new(w);
    let n = w.len();
    let sa = idx.sa();
    let lcp = idx.lcp();
    let mut order: Vec<usize> = (1..n).filter(|&i| lcp[i] > 0).collect();
    order.sort_unstable_by(|&a, &b| lcp[b].cmp(&lcp[a]));

    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut sets: Vec<BTreeSet<u32>> = sa.iter().map(|&s| BTreeSet::from([s])).collect();
    // (gap, left position) per group
    let mut gap: Vec<(u32, u32)> = vec![(u32::MAX, 0); n];

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }

    // best ratio depth/gap as (depth, gap, left)
    let mut best: Option<(u64, u64, u32)> = None;
    for i in order {
        let depth = lcp[i] as u64;
        let a = find(&mut parent, (i - 1) as u32);
        let b = find(&mut parent, i as u32);
        let (big, small) = if sets[a as usize].len() >= sets[b as usize].len() { (a, b) } else { (b, a) };
        let moved = std::mem::take(&mut sets[small as usize]);
        let mut g = gap[big as usize].min(gap[small as usize]);
        let target = &mut sets[big as usize];
        for x in moved {
            if let Some(&pred) = target.range(..x).next_back() {
                g = g.min((x - pred, pred));
            }
            if let Some(&succ) = target.range(x + 1..).next() {
                g = g.min((succ - x, x));
            }
            target.insert(x);
        }
        parent[small as usize] = big;
        gap[big as usize] = g;
        if g.0 != u32::MAX {
            let better = match best {
                None => true,
                Some((bd, bg, _)) => depth * bg > bd * g.0 as u64,
            };
            if better {
                best = Some((depth, g.0 as u64, g.1));
            }
        }
    }
    let rep = match best {
        None => Repetition { start: 0, period: 1, length: 1 },
        Some((_, g, left)) => {
            let (left, g) = (left as usize, g as usize);
            Repetition { start: left, period: g, length: g + lce(w, left, left + g) }
        }
    };
    Ok((rep.exponent(), rep))
}

/// `Ok(())` when `w` respects the threshold, otherwise a violating repetition.
pub fn is_free(w: &Word, t: Threshold) -> std::result::Result<(), Repetition> {
    is_free_slice(w.letters(), t)
}

pub fn is_free_slice(w: &[u8], t: Threshold) -> std::result::Result<(), Repetition> {
    if w.is_empty() {
        return Ok(());
    }
    let (e, rep) = max_exponent_slice(w).expect("non-empty");
    if t.violated_by(e) {
        Err(rep)
    } else {
        Ok(())
    }
}

/// Checks only the repetitions ending at the last letter. When `w` minus its
/// last letter is free, this decides freeness of `w`.
pub fn extend_free_check(w: &[u8], t: Threshold) -> std::result::Result<(), Repetition> {
    let n = w.len();
    if n < 2 {
        return Ok(());
    }
    let last = n - 1;
    let mut p = 1;
    loop {
        let need = t.min_excess(p);
        if p + need > n {
            // min_excess is non-decreasing in p
            return Ok(());
        }
        if (0..need).all(|k| w[last - k] == w[last - k - p]) {
            let mut s = need;
            while s + p < n && w[last - s] == w[last - s - p] {
                s += 1;
            }
            return Err(Repetition { start: n - s - p, period: p, length: s + p });
        }
        p += 1;
    }
}

/// Checks the repetitions whose periodic continuation contains position
/// `boundary`, i.e. those with `w[boundary] == w[boundary - period]` that run
/// across the junction between `w[..boundary]` and the appended block.
pub fn crossing_violation(w: &[u8], boundary: usize, t: Threshold) -> Option<Repetition> {
    let n = w.len();
    if boundary == 0 || boundary >= n {
        return None;
    }
    // Beyond `small`, a violation needs a backward streak longer than `ANCHOR`,
    // so the anchor w[boundary-ANCHOR..boundary] reoccurs exactly p earlier.
    const ANCHOR: usize = 12;
    let block = n - boundary;
    let mut small = boundary;
    if boundary > 8 * ANCHOR {
        small = 1;
        while small < boundary && t.min_excess(small + 1) <= block + ANCHOR {
            small += 1;
        }
    }
    for p in 1..=small {
        if let Some(r) = crossing_at(w, boundary, p, t) {
            return Some(r);
        }
    }
    if small < boundary {
        let anchor = &w[boundary - ANCHOR..boundary];
        let hay = &w[..boundary - 1];
        let mut periods: Vec<usize> = memchr::memmem::find_iter(hay, anchor).map(|i| boundary - ANCHOR - i).filter(|&p| p > small).collect();
        periods.reverse();
        for p in periods {
            if let Some(r) = crossing_at(w, boundary, p, t) {
                return Some(r);
            }
        }
    }
    None
}

fn crossing_at(w: &[u8], boundary: usize, p: usize, t: Threshold) -> Option<Repetition> {
    let n = w.len();
    if w[boundary] != w[boundary - p] {
        return None;
    }
    let need = t.min_excess(p);
    let mut fwd = 1;
    while boundary + fwd < n && w[boundary + fwd] == w[boundary + fwd - p] {
        fwd += 1;
    }
    let mut back = 0;
    while fwd + back < need && back + p < boundary && w[boundary - back - 1] == w[boundary - back - 1 - p] {
        back += 1;
    }
    if fwd + back < need {
        return None;
    }
    while back + p < boundary && w[boundary - back - 1] == w[boundary - back - 1 - p] {
        back += 1;
    }
    Some(Repetition { start: boundary - back - p, period: p, length: p + back + fwd })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnWordSet {
    pub anchor: Word,
    pub returns: BTreeSet<Word>,
}

pub fn occurrences(text: &[u8], pattern: &[u8]) -> Vec<usize> {
    if pattern.is_empty() {
        return (0..=text.len()).collect();
    }
    text.windows(pattern.len()).enumerate().filter(|(_, x)| *x == pattern).map(|(i, _)| i).collect()
}

/// Return words to `anchor` read between consecutive occurrences in `prefix`.
pub fn return_words(prefix: &Word, anchor: &Word) -> Result<ReturnWordSet> {
    let occ = if prefix.len() > 4096 {
        SuffixIndex::new(prefix.letters()).occurrences(anchor.letters())
    } else {
        occurrences(prefix.letters(), anchor.letters())
    };
    return_words_from(prefix.letters(), anchor, &occ)
}

pub(crate) fn return_words_from(text: &[u8], anchor: &Word, occ: &[usize]) -> Result<ReturnWordSet> {
    if occ.len() < 2 {
        return Err(Error::TooFewOccurrences { anchor: anchor.to_string(), found: occ.len(), needed: 2 });
    }
    let distinct: BTreeSet<&[u8]> = occ.windows(2).map(|p| &text[p[0]..p[1]]).collect();
    Ok(ReturnWordSet { anchor: anchor.clone(), returns: distinct.into_iter().map(Word::from_slice).collect() })
}

/// Floating value of a rational, for display only.
pub fn approx(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
