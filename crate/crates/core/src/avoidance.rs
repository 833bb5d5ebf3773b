//! Constrained exhaustive search over words.
//!
//! A [`ConstraintSet`] is a conjunction of factorial constraints: every
//! violation is visible at the position where the offending factor ends. The
//! depth-first engine in [`walk`] therefore checks each appended letter only
//! against factors ending at the new position.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::repetitions::{extend_free_check, is_free_slice, Repetition, Threshold};
use crate::words::{contains_factor, is_palindrome, Alphabet, Eertree, Word};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// A pattern of single-letter variables; distinct variables take distinct
/// letters. `abaca` is stored as `[0, 1, 0, 2, 0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterPattern {
    symbols: Vec<u8>,
}

impl LetterPattern {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Constraints("empty letter pattern".into()));
        }
        let max = *symbols.iter().max().unwrap();
        if (0..=max).any(|v| !symbols.contains(&v)) {
            return Err(Error::Constraints("pattern variables must form a contiguous range from a".into()));
        }
        Ok(LetterPattern { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Whether `window` (of the pattern's length) is an occurrence.
    pub fn matches(&self, window: &[u8]) -> bool {
        if window.len() != self.symbols.len() {
            return false;
        }
        let mut image = [u8::MAX; 64];
        let mut used = 0u64;
        for (&v, &l) in self.symbols.iter().zip(window) {
            let slot = &mut image[v as usize];
            if *slot == u8::MAX {
                if used & (1 << l) != 0 {
                    return false;
                }
                used |= 1 << l;
                *slot = l;
            } else if *slot != l {
                return false;
            }
        }
        true
    }
}

impl FromStr for LetterPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|c| c.is_ascii_lowercase().then(|| c as u8 - b'a'))
            .collect::<Option<Vec<u8>>>()
            .ok_or_else(|| Error::Constraints(format!("bad letter pattern {s:?}")))?;
        LetterPattern::new(symbols)
    }
}

impl fmt::Display for LetterPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.symbols {
            write!(f, "{}", (b'a' + v) as char)?;
        }
        Ok(())
    }
}

pub fn letter_pattern_occurs(w: &Word, p: &LetterPattern) -> bool {
    w.len() >= p.len() && w.letters().windows(p.len()).any(|x| p.matches(x))
}

/// Overpal: `a x a x^R a` for a letter `a`. Equivalently an odd palindrome of
/// length at least 3 whose first letter equals its centre letter.
pub fn is_overpal(w: &[u8]) -> bool {
    w.len() >= 3 && w.len() % 2 == 1 && w[0] == w[w.len() / 2] && is_palindrome(w)
}

pub fn contains_overpal(w: &Word) -> bool {
    let t = Eertree::from_word(w.letters(), w.min_alphabet());
    t.palindromes().iter().any(|p| is_overpal(p.letters()))
}

/// "At most `max` distinct members of `factors` occur".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLimit {
    pub max: usize,
    pub factors: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    pub alphabet: Alphabet,
    pub threshold: Option<Threshold>,
    pub max_palindromes: Option<usize>,
    pub forbidden_factors: BTreeSet<Word>,
    /// Avoid the pattern AA.
    pub square_free: bool,
    pub letter_patterns: Vec<LetterPattern>,
    pub forbid_overpals: bool,
    /// Palindromes must be factors of one of these words.
    pub allowed_palindromes: Option<Vec<Word>>,
    pub factor_limits: Vec<FactorLimit>,
}

impl ConstraintSet {
    pub fn new(alphabet: Alphabet) -> Self {
        ConstraintSet {
            alphabet,
            threshold: None,
            max_palindromes: None,
            forbidden_factors: BTreeSet::new(),
            square_free: false,
            letter_patterns: Vec::new(),
            forbid_overpals: false,
            allowed_palindromes: None,
            factor_limits: Vec::new(),
        }
    }

    pub fn with_threshold(mut self, t: Threshold) -> Self {
        self.threshold = Some(t);
        self
    }

    pub fn with_max_palindromes(mut self, k: usize) -> Self {
        self.max_palindromes = Some(k);
        self
    }

    pub fn square_free(mut self) -> Self {
        self.square_free = true;
        self
    }

    pub fn forbid<I: IntoIterator<Item = Word>>(mut self, factors: I) -> Self {
        self.forbidden_factors.extend(factors);
        self
    }

    pub fn with_letter_pattern(mut self, p: LetterPattern) -> Self {
        self.letter_patterns.push(p);
        self
    }

    pub fn without_overpals(mut self) -> Self {
        self.forbid_overpals = true;
        self
    }

    pub fn with_allowed_palindromes(mut self, words: Vec<Word>) -> Self {
        self.allowed_palindromes = Some(words);
        self
    }

    pub fn with_factor_limit(mut self, max: usize, factors: Vec<Word>) -> Self {
        self.factor_limits.push(FactorLimit { max, factors });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let active = self.threshold.is_some()
            || self.max_palindromes.is_some()
            || !self.forbidden_factors.is_empty()
            || self.square_free
            || !self.letter_patterns.is_empty()
            || self.forbid_overpals
            || self.allowed_palindromes.is_some()
            || !self.factor_limits.is_empty();
        if !active {
            return Err(Error::Constraints("no constraint is active".into()));
        }
        let words = self
            .forbidden_factors
            .iter()
            .chain(self.allowed_palindromes.iter().flatten())
            .chain(self.factor_limits.iter().flat_map(|l| &l.factors));
        for w in words {
            w.check_alphabet(self.alphabet)?;
        }
        if self.forbidden_factors.contains(&Word::empty()) {
            return Err(Error::Constraints("the empty word cannot be forbidden".into()));
        }
        Ok(())
    }

    /// The repetition bound actually enforced (square-freeness is the bound 2).
    pub fn effective_threshold(&self) -> Option<Threshold> {
        let square = self.square_free.then(|| Threshold::non_strict(2, 1));
        match (self.threshold, square) {
            (Some(a), Some(b)) => Some(if a.at_least_as_strong_as(&b) { a } else { b }),
            (a, b) => a.or(b),
        }
    }

    fn tracks_palindromes(&self) -> bool {
        self.max_palindromes.is_some() || self.forbid_overpals || self.allowed_palindromes.is_some()
    }

    fn palindrome_allowed(&self, p: &[u8]) -> bool {
        match &self.allowed_palindromes {
            None => true,
            Some(list) => list.iter().any(|u| contains_factor(u.letters(), p)),
        }
    }

    /// True when every letter permutation maps satisfying words to satisfying
    /// words, so searches may fix the order of first occurrences.
    pub fn is_permutation_invariant(&self) -> bool {
        let perms = permutations(self.alphabet.size());
        let closed = |set: &BTreeSet<Word>| perms.iter().all(|p| set.iter().all(|w| set.contains(&w.permute(p))));
        if !closed(&self.forbidden_factors) {
            return false;
        }
        if let Some(list) = &self.allowed_palindromes {
            let ok = perms.iter().all(|p| {
                list.iter().all(|u| {
                    let v = u.permute(p);
                    list.iter().any(|x| contains_factor(x.letters(), v.letters()))
                })
            });
            if !ok {
                return false;
            }
        }
        self.factor_limits.iter().all(|l| closed(&l.factors.iter().cloned().collect()))
    }
}

fn permutations(k: usize) -> Vec<Vec<u8>> {
    fn rec(cur: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for l in 0..used.len() {
            if !used[l] {
                used[l] = true;
                cur.push(l as u8);
                rec(cur, used, out);
                cur.pop();
                used[l] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn join_words<'a, I: IntoIterator<Item = &'a Word>>(it: I) -> String {
    it.into_iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ConstraintSet {
    /// Canonical key/value form, one constraint per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet={}", self.alphabet.size())?;
        if let Some(t) = self.threshold {
            writeln!(f, "threshold={t}")?;
        }
        if let Some(k) = self.max_palindromes {
            writeln!(f, "max_palindromes={k}")?;
        }
        if !self.forbidden_factors.is_empty() {
            let mut v: Vec<&Word> = self.forbidden_factors.iter().collect();
            v.sort_by(|a, b| a.shortlex_cmp(b));
            writeln!(f, "forbid={}", join_words(v))?;
        }
        if self.square_free {
            writeln!(f, "square_free=yes")?;
        }
        if !self.letter_patterns.is_empty() {
            let v: Vec<String> = self.letter_patterns.iter().map(|p| p.to_string()).collect();
            writeln!(f, "letter_patterns={}", v.join(","))?;
        }
        if self.forbid_overpals {
            writeln!(f, "overpals=no")?;
        }
        if let Some(list) = &self.allowed_palindromes {
            writeln!(f, "allowed_palindromes={}", join_words(list))?;
        }
        for l in &self.factor_limits {
            writeln!(f, "at_most={}:{}", l.max, join_words(&l.factors))?;
        }
        Ok(())
    }
}

fn parse_word_list(v: &str) -> Result<Vec<Word>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "yes" | "true" | "1" => Ok(true),
        "no" | "false" | "0" => Ok(false),
        _ => Err(Error::Constraints(format!("{key}: expected yes/no, got {v:?}"))),
    }
}

impl FromStr for ConstraintSet {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut c = ConstraintSet::new(Alphabet::TERNARY);
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Constraints(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Constraints(format!("{key}: {what}"));
            match key {
                "alphabet" => c.alphabet = Alphabet::new(value.parse().map_err(|_| bad("not an integer"))?)?,
                "threshold" => c.threshold = Some(value.parse()?),
                "max_palindromes" => c.max_palindromes = Some(value.parse().map_err(|_| bad("not an integer"))?),
                "forbid" => c.forbidden_factors.extend(parse_word_list(value)?),
                "square_free" => c.square_free = parse_bool(key, value)?,
                "letter_patterns" => {
                    for p in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        c.letter_patterns.push(p.parse()?);
                    }
                }
                "overpals" => c.forbid_overpals = !parse_bool(key, value)?,
                "allowed_palindromes" => c.allowed_palindromes = Some(parse_word_list(value)?),
                "at_most" => {
                    let (k, list) = value.split_once(':').ok_or_else(|| bad("expected <k>:<w1>,<w2>,..."))?;
                    let max = k.trim().parse().map_err(|_| bad("not an integer"))?;
                    c.factor_limits.push(FactorLimit { max, factors: parse_word_list(list)? });
                }
                _ => return Err(Error::Constraints(format!("unknown key {key:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// The constraint that failed, with a witness factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Letter(u8),
    Repetition { threshold: Threshold, repetition: Repetition, factor: Word },
    TooManyPalindromes { limit: usize, newest: Word },
    ForbiddenFactor(Word),
    LetterPattern { pattern: LetterPattern, factor: Word },
    Overpal(Word),
    PalindromeNotAllowed(Word),
    FactorLimit { max: usize, present: Vec<Word> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Letter(l) => write!(f, "letter {l} outside alphabet"),
            Violation::Repetition { threshold, repetition, factor } => {
                write!(f, "repetition {factor} of exponent {} violates {threshold}", repetition.exponent())
            }
            Violation::TooManyPalindromes { limit, newest } => write!(f, "more than {limit} palindromes (new: {newest:?})"),
            Violation::ForbiddenFactor(x) => write!(f, "forbidden factor {x}"),
            Violation::LetterPattern { pattern, factor } => write!(f, "letter pattern {pattern} occurs as {factor}"),
            Violation::Overpal(x) => write!(f, "overpal {x}"),
            Violation::PalindromeNotAllowed(x) => write!(f, "palindrome {x} not allowed"),
            Violation::FactorLimit { max, present } => write!(f, "more than {max} of {}", join_words(present)),
        }
    }
}

/// Full (non-incremental) check of every active constraint.
pub fn satisfies(w: &Word, c: &ConstraintSet) -> std::result::Result<(), Violation> {
    if let Some(&l) = w.letters().iter().find(|&&l| !c.alphabet.contains(l)) {
        return Err(Violation::Letter(l));
    }
    let letters = w.letters();
    for f in &c.forbidden_factors {
        if w.contains_factor(f.letters()) {
            return Err(Violation::ForbiddenFactor(f.clone()));
        }
    }
    for p in &c.letter_patterns {
        if p.len() <= letters.len() {
            if let Some(x) = letters.windows(p.len()).find(|x| p.matches(x)) {
                return Err(Violation::LetterPattern { pattern: p.clone(), factor: Word::from_slice(x) });
            }
        }
    }
    if let Some(t) = c.effective_threshold() {
        if let Err(rep) = is_free_slice(letters, t) {
            return Err(Violation::Repetition { threshold: t, repetition: rep, factor: Word::from_slice(rep.factor(letters)) });
        }
    }
    if c.tracks_palindromes() {
        let pals = Eertree::from_word(letters, c.alphabet).palindromes();
        if let Some(k) = c.max_palindromes {
            if pals.len() > k {
                return Err(Violation::TooManyPalindromes { limit: k, newest: pals.last().cloned().unwrap_or_default() });
            }
        }
        if c.forbid_overpals {
            if let Some(p) = pals.iter().find(|p| is_overpal(p.letters())) {
                return Err(Violation::Overpal(p.clone()));
            }
        }
        if let Some(p) = pals.iter().find(|p| !c.palindrome_allowed(p.letters())) {
            return Err(Violation::PalindromeNotAllowed(p.clone()));
        }
    }
    for l in &c.factor_limits {
        let present: Vec<Word> = l.factors.iter().filter(|f| w.contains_factor(f.letters())).cloned().collect();
        if present.len() > l.max {
            return Err(Violation::FactorLimit { max: l.max, present });
        }
    }
    Ok(())
}

/// Incrementally maintained word under a constraint set.
pub struct SearchState<'c> {
    c: &'c ConstraintSet,
    word: Vec<u8>,
    threshold: Option<Threshold>,
    palindromes: Option<Eertree>,
    /// per limit, per factor: occurrence counts
    limit_counts: Vec<Vec<u32>>,
    limit_distinct: Vec<usize>,
    /// per position: (limit, factor) indices incremented at that position
    limit_log: Vec<Vec<(usize, usize)>>,
    max_letter: Vec<u8>,
}

impl<'c> SearchState<'c> {
    pub fn new(c: &'c ConstraintSet) -> Self {
        SearchState {
            c,
            word: Vec::new(),
            threshold: c.effective_threshold(),
            palindromes: c.tracks_palindromes().then(|| Eertree::new(c.alphabet)),
            limit_counts: c.factor_limits.iter().map(|l| vec![0; l.factors.len()]).collect(),
            limit_distinct: vec![0; c.factor_limits.len()],
            limit_log: Vec::new(),
            max_letter: Vec::new(),
        }
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn palindrome_count(&self) -> Option<usize> {
        self.palindromes.as_ref().map(Eertree::count)
    }

    /// Highest letter used so far, plus one.
    pub fn letters_used(&self) -> usize {
        self.max_letter.last().map_or(0, |&m| m as usize + 1)
    }

    /// Appends `l` if the result still satisfies every constraint; otherwise
    /// leaves the state unchanged and reports why.
    pub fn try_push(&mut self, l: u8) -> std::result::Result<(), Violation> {
        if !self.c.alphabet.contains(l) {
            return Err(Violation::Letter(l));
        }
        self.word.push(l);
        if let Err(v) = self.check_last() {
            self.word.pop();
            return Err(v);
        }
        if let Some(t) = self.palindromes.as_mut() {
            t.push(l);
            if let Err(v) = self.check_palindromes() {
                self.palindromes.as_mut().unwrap().pop();
                self.word.pop();
                return Err(v);
            }
        }
        let mut log = Vec::new();
        for (li, limit) in self.c.factor_limits.iter().enumerate() {
            for (fi, f) in limit.factors.iter().enumerate() {
                if self.word.ends_with(f.letters()) {
                    if self.limit_counts[li][fi] == 0 {
                        self.limit_distinct[li] += 1;
                    }
                    self.limit_counts[li][fi] += 1;
                    log.push((li, fi));
                }
            }
        }
        self.limit_log.push(log);
        let prev = self.max_letter.last().copied().unwrap_or(0);
        self.max_letter.push(prev.max(l));
        if let Some(li) = (0..self.limit_distinct.len()).find(|&li| self.limit_distinct[li] > self.c.factor_limits[li].max) {
            let limit = &self.c.factor_limits[li];
            let present = limit.factors.iter().zip(&self.limit_counts[li]).filter(|(_, &n)| n > 0).map(|(f, _)| f.clone()).collect();
            self.pop();
            return Err(Violation::FactorLimit { max: limit.max, present });
        }
        Ok(())
    }

    fn check_last(&self) -> std::result::Result<(), Violation> {
        let w = &self.word;
        for f in &self.c.forbidden_factors {
            if w.ends_with(f.letters()) {
                return Err(Violation::ForbiddenFactor(f.clone()));
            }
        }
        for p in &self.c.letter_patterns {
            if w.len() >= p.len() && p.matches(&w[w.len() - p.len()..]) {
                return Err(Violation::LetterPattern { pattern: p.clone(), factor: Word::from_slice(&w[w.len() - p.len()..]) });
            }
        }
        if let Some(t) = self.threshold {
            if let Err(rep) = extend_free_check(w, t) {
                return Err(Violation::Repetition { threshold: t, repetition: rep, factor: Word::from_slice(rep.factor(w)) });
            }
        }
        Ok(())
    }

    fn check_palindromes(&self) -> std::result::Result<(), Violation> {
        let t = self.palindromes.as_ref().unwrap();
        let Some(new) = t.last_created() else { return Ok(()) };
        if let Some(k) = self.c.max_palindromes {
            if t.count() > k {
                return Err(Violation::TooManyPalindromes { limit: k, newest: Word::from_slice(new) });
            }
        }
        if self.c.forbid_overpals && is_overpal(new) {
            return Err(Violation::Overpal(Word::from_slice(new)));
        }
        if !self.c.palindrome_allowed(new) {
            return Err(Violation::PalindromeNotAllowed(Word::from_slice(new)));
        }
        Ok(())
    }

    pub fn pop(&mut self) {
        if self.word.pop().is_none() {
            return;
        }
        if let Some(t) = self.palindromes.as_mut() {
            t.pop();
        }
        for (li, fi) in self.limit_log.pop().unwrap_or_default() {
            self.limit_counts[li][fi] -= 1;
            if self.limit_counts[li][fi] == 0 {
                self.limit_distinct[li] -= 1;
            }
        }
        self.max_letter.pop();
    }
}

/// Visitor decision at a node of the search tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Descend,
    Prune,
    Stop,
}

pub trait Visitor {
    /// Called once per node (non-empty word satisfying the constraints).
    fn enter(&mut self, state: &SearchState<'_>) -> Step;
    /// Called after a node's subtree is finished, before its last letter is removed.
    fn leave(&mut self, _state: &SearchState<'_>) {}
}

impl<F: FnMut(&SearchState<'_>) -> Step> Visitor for F {
    fn enter(&mut self, state: &SearchState<'_>) -> Step {
        self(state)
    }
}

#[derive(Debug, Clone, Default)]
pub struct WalkOptions {
    pub max_depth: usize,
    pub budget: Option<u64>,
    /// Only canonical words: the first occurrences of letters appear in
    /// increasing order. Valid for permutation-invariant constraint sets.
    pub symmetry: bool,
    /// Start at this node: it is entered first, then the traversal continues
    /// in depth-first order after it.
    pub start: Option<Vec<u8>>,
    /// With `start`, stay inside the subtree rooted there.
    pub subtree_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkEnd {
    Complete,
    Stopped,
    /// The node that would have been entered next.
    Budget { frontier: Vec<u8> },
}

#[derive(Debug, Clone)]
pub struct WalkSummary {
    pub end: WalkEnd,
    pub nodes: u64,
}

fn letter_limit(state: &SearchState<'_>, symmetry: bool, alphabet: usize) -> u8 {
    if symmetry {
        (state.letters_used() + 1).min(alphabet) as u8
    } else {
        alphabet as u8
    }
}

/// Depth-first traversal of all words satisfying `c`, letters in ascending order.
pub fn walk<V: Visitor>(c: &ConstraintSet, opts: &WalkOptions, visitor: &mut V) -> Result<WalkSummary> {
    let counter = AtomicU64::new(0);
    walk_shared(c, opts, visitor, &counter)
}

fn walk_shared<V: Visitor>(c: &ConstraintSet, opts: &WalkOptions, visitor: &mut V, counter: &AtomicU64) -> Result<WalkSummary> {
    let k = c.alphabet.size();
    let budget = opts.budget.unwrap_or(u64::MAX);
    let mut state = SearchState::new(c);
    let mut local = 0u64;
    let floor;
    let mut entering = false;
    if let Some(path) = &opts.start {
        for (i, &l) in path.iter().enumerate() {
            if opts.symmetry && l >= letter_limit(&state, true, k) {
                return Err(Error::Checkpoint(format!("start word is not canonical at position {i}")));
            }
            state.try_push(l).map_err(|v| Error::Checkpoint(format!("start word violates constraints at position {i}: {v}")))?;
        }
        entering = !path.is_empty();
        floor = if opts.subtree_only { path.len() } else { 0 };
    } else {
        floor = 0;
    }
    'outer: loop {
        let mut descend = !entering;
        if entering {
            if counter.fetch_add(1, Ordering::Relaxed) >= budget {
                return Ok(WalkSummary { end: WalkEnd::Budget { frontier: state.word.clone() }, nodes: local });
            }
            local += 1;
            match visitor.enter(&state) {
                Step::Stop => return Ok(WalkSummary { end: WalkEnd::Stopped, nodes: local }),
                Step::Prune => {}
                Step::Descend => descend = state.len() < opts.max_depth,
            }
        }
        if descend {
            for l in 0..letter_limit(&state, opts.symmetry, k) {
                if state.try_push(l).is_ok() {
                    entering = true;
                    continue 'outer;
                }
            }
        }
        loop {
            if state.len() <= floor {
                return Ok(WalkSummary { end: WalkEnd::Complete, nodes: local });
            }
            let last = *state.word.last().unwrap();
            visitor.leave(&state);
            state.pop();
            for l in last + 1..letter_limit(&state, opts.symmetry, k) {
                if state.try_push(l).is_ok() {
                    entering = true;
                    continue 'outer;
                }
            }
        }
    }
}

/// Calls `f` on every satisfying word of exactly `len` letters, in
/// lexicographic order. Returns the number of such words.
pub fn for_each_word<F: FnMut(&[u8])>(c: &ConstraintSet, len: usize, mut f: F) -> Result<u64> {
    let mut n = 0;
    let mut v = |s: &SearchState<'_>| {
        if s.len() == len {
            f(s.word());
            n += 1;
        }
        Step::Descend
    };
    walk(c, &WalkOptions { max_depth: len, ..Default::default() }, &mut v)?;
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// The whole tree was explored; no satisfying word is longer than `longest`.
    Exhausted { longest: usize, witness: Word },
    Reached { target: usize, witness: Word },
    /// Inconclusive. `frontier` is where a resumed search continues.
    Budget { nodes: u64, frontier: Word, longest: usize, witness: Word },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Exhausted { .. } => "EXHAUSTED",
            Outcome::Reached { .. } => "REACHED",
            Outcome::Budget { .. } => "BUDGET",
        }
    }

    pub fn witness(&self) -> &Word {
        match self {
            Outcome::Exhausted { witness, .. } | Outcome::Reached { witness, .. } | Outcome::Budget { witness, .. } => witness,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchCertificate {
    pub constraints: ConstraintSet,
    pub target: usize,
    pub symmetry: bool,
    pub outcome: Outcome,
    /// Advisory when the search ran in parallel.
    pub nodes_expanded: u64,
}

#[derive(Debug, Clone, Default)]
pub struct BacktrackOptions {
    pub budget: Option<u64>,
    /// `None` picks symmetry reduction whenever the constraints allow it.
    pub symmetry: Option<bool>,
    pub resume: Option<Checkpoint>,
    pub jobs: usize,
}

/// Saved state of an interrupted search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub frontier: Word,
    pub nodes: u64,
    pub longest: Word,
}

struct Longest {
    target: usize,
    best: Vec<u8>,
}

impl Visitor for Longest {
    fn enter(&mut self, s: &SearchState<'_>) -> Step {
        if s.len() > self.best.len() {
            self.best = s.word().to_vec();
        }
        if s.len() >= self.target {
            Step::Stop
        } else {
            Step::Descend
        }
    }
}

/// Depth-first search for a satisfying word of length `target`.
pub fn backtrack(c: &ConstraintSet, target: usize, budget: u64) -> Result<SearchCertificate> {
    backtrack_with(c, target, &BacktrackOptions { budget: Some(budget), ..Default::default() })
}

pub fn backtrack_with(c: &ConstraintSet, target: usize, opts: &BacktrackOptions) -> Result<SearchCertificate> {
    c.validate()?;
    if target == 0 {
        return Err(Error::Constraints("target must be at least 1".into()));
    }
    let invariant = c.is_permutation_invariant();
    let symmetry = match opts.symmetry {
        Some(true) if !invariant => return Err(Error::Constraints("symmetry reduction requires permutation-invariant constraints".into())),
        Some(s) => s,
        None => invariant,
    };
    if opts.jobs > 1 && opts.resume.is_none() {
        return backtrack_parallel(c, target, opts, symmetry);
    }
    let mut v = Longest { target, best: opts.resume.as_ref().map(|r| r.longest.clone().into_letters()).unwrap_or_default() };
    let base_nodes = opts.resume.as_ref().map_or(0, |r| r.nodes);
    let walk_opts = WalkOptions {
        max_depth: target,
        budget: opts.budget.map(|b| b.saturating_sub(base_nodes)),
        symmetry,
        start: opts.resume.as_ref().map(|r| r.frontier.letters().to_vec()),
        subtree_only: false,
    };
    let summary = walk(c, &walk_opts, &mut v)?;
    let nodes = base_nodes + summary.nodes;
    let witness = Word::new(v.best);
    let outcome = match summary.end {
        WalkEnd::Stopped => Outcome::Reached { target, witness },
        WalkEnd::Complete => Outcome::Exhausted { longest: witness.len(), witness },
        WalkEnd::Budget { frontier } => Outcome::Budget { nodes, frontier: Word::new(frontier), longest: witness.len(), witness },
    };
    Ok(SearchCertificate { constraints: c.clone(), target, symmetry, outcome, nodes_expanded: nodes })
}

/// Splits the tree at a fixed depth and explores subtrees on the rayon pool.
/// Outcome and witness are those of the sequential traversal.
fn backtrack_parallel(c: &ConstraintSet, target: usize, opts: &BacktrackOptions, symmetry: bool) -> Result<SearchCertificate> {
    let split = target.min(12);
    let mut roots: Vec<Vec<u8>> = Vec::new();
    let mut shallow = Longest { target: usize::MAX, best: Vec::new() };
    let mut collect = |s: &SearchState<'_>| {
        shallow.enter(s);
        if s.len() == split {
            roots.push(s.word().to_vec());
        }
        Step::Descend
    };
    let head = walk(c, &WalkOptions { max_depth: split, symmetry, ..Default::default() }, &mut collect)?;
    let counter = AtomicU64::new(head.nodes);
    let budget = opts.budget;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().map_err(|e| Error::Precondition(e.to_string()))?;
    let results: Vec<Result<(WalkSummary, Vec<u8>)>> = pool.install(|| {
        roots
            .par_iter()
            .map(|root| {
                let mut v = Longest { target, best: Vec::new() };
                let o = WalkOptions { max_depth: target, budget, symmetry, start: Some(root.clone()), subtree_only: true };
                walk_shared(c, &o, &mut v, &counter).map(|s| (s, v.best))
            })
            .collect()
    });
    let mut best = shallow.best;
    let mut nodes = head.nodes;
    let mut outcome = None;
    for r in results {
        let (summary, sub_best) = r?;
        nodes += summary.nodes;
        if sub_best.len() > best.len() {
            best = sub_best.clone();
        }
        if outcome.is_some() {
            continue;
        }
        match summary.end {
            WalkEnd::Stopped => outcome = Some(Outcome::Reached { target, witness: Word::new(sub_best) }),
            WalkEnd::Budget { frontier } => {
                outcome = Some(Outcome::Budget { nodes: 0, frontier: Word::new(frontier), longest: 0, witness: Word::empty() })
            }
            WalkEnd::Complete => {}
        }
    }
    let witness = Word::new(best);
    let outcome = match outcome {
        None => Outcome::Exhausted { longest: witness.len(), witness },
        Some(Outcome::Budget { frontier, .. }) => Outcome::Budget { nodes, frontier, longest: witness.len(), witness },
        Some(o) => o,
    };
    Ok(SearchCertificate { constraints: c.clone(), target, symmetry, outcome, nodes_expanded: nodes })
}

/// Exact number of satisfying words of each length `1..=n_max`.
pub fn count_words(c: &ConstraintSet, n_max: usize) -> Result<Vec<u64>> {
    count_words_with(c, n_max, false, 1)
}

/// As [`count_words`]; with `symmetry` only canonical words are counted.
pub fn count_words_with(c: &ConstraintSet, n_max: usize, symmetry: bool, jobs: usize) -> Result<Vec<u64>> {
    c.validate()?;
    if n_max == 0 {
        return Err(Error::Constraints("n_max must be at least 1".into()));
    }
    let count_from = |start: Option<Vec<u8>>| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; n_max];
        let mut v = |s: &SearchState<'_>| {
            counts[s.len() - 1] += 1;
            Step::Descend
        };
        let subtree_only = start.is_some();
        walk(c, &WalkOptions { max_depth: n_max, symmetry, start, subtree_only, ..Default::default() }, &mut v)?;
        Ok(counts)
    };
    if jobs <= 1 || n_max <= 10 {
        return count_from(None);
    }
    let split = 10;
    let mut counts = vec![0u64; n_max];
    let mut roots = Vec::new();
    let mut collect = |s: &SearchState<'_>| {
        if s.len() < split {
            counts[s.len() - 1] += 1;
        } else {
            roots.push(s.word().to_vec());
        }
        Step::Descend
    };
    walk(c, &WalkOptions { max_depth: split, symmetry, ..Default::default() }, &mut collect)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Precondition(e.to_string()))?;
    let parts: Vec<Result<Vec<u64>>> = pool.install(|| roots.into_par_iter().map(|r| count_from(Some(r))).collect());
    for part in parts {
        for (a, b) in counts.iter_mut().zip(part?) {
            *a += b;
        }
    }
    Ok(counts)
}

/// Ratio of the last two counts.
pub fn growth_estimate(counts: &[u64]) -> Option<f64> {
    match counts {
        [.., a, b] if *a > 0 => Some(*b as f64 / *a as f64),
        _ => None,
    }
}

/// The sixteen palindromes of a square-free ternary word containing every
/// `aba` and every `abcba`.
pub fn sixteen_palindromes() -> BTreeSet<Word> {
    let mut s = BTreeSet::new();
    s.insert(Word::empty());
    for a in 0..3u8 {
        s.insert(Word::new(vec![a]));
        for b in 0..3u8 {
            if a == b {
                continue;
            }
            s.insert(Word::new(vec![a, b, a]));
            let c = 3 - a - b;
            s.insert(Word::new(vec![c, a, b, a, c]));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceRow {
    pub word: Word,
    /// Palindromes all among the sixteen.
    pub few_palindromes: bool,
    pub overpal_free: bool,
    pub abcacba_free: bool,
}

impl EquivalenceRow {
    pub fn all_agree(&self) -> bool {
        self.few_palindromes == self.overpal_free && self.overpal_free == self.abcacba_free
    }
}

#[derive(Debug, Clone, Default)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    /// Words breaking (few palindromes ⇒ overpal-free) or (overpal-free ⇒ abcacba-free).
    pub violations: Vec<Word>,
}

/// Checks the finite-word implications between "all palindromes among the
/// sixteen", "no overpal" and "no abcacba" on square-free ternary samples.
pub fn verify_equivalence_lemma(samples: &[Word]) -> Result<EquivalenceReport> {
    let sixteen = sixteen_palindromes();
    let pattern: LetterPattern = "abcacba".parse()?;
    let mut report = EquivalenceReport::default();
    for s in samples {
        s.check_alphabet(Alphabet::TERNARY)?;
        if is_free_slice(s.letters(), Threshold::non_strict(2, 1)).is_err() {
            return Err(Error::Precondition(format!("sample {s} is not square-free")));
        }
        let pals = Eertree::from_word(s.letters(), Alphabet::TERNARY).palindromes();
        let row = EquivalenceRow {
            word: s.clone(),
            few_palindromes: pals.iter().all(|p| sixteen.contains(p)),
            overpal_free: !pals.iter().any(|p| is_overpal(p.letters())),
            abcacba_free: !letter_pattern_occurs(s, &pattern),
        };
        if (row.few_palindromes && !row.overpal_free) || (row.overpal_free && !row.abcacba_free) {
            report.violations.push(s.clone());
        }
        report.rows.push(row);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::w;
    use proptest::prelude::*;

    fn ternary() -> ConstraintSet {
        ConstraintSet::new(Alphabet::TERNARY)
    }

    fn all_words(k: u8, n: usize) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out.into_iter().flat_map(|v| (0..k).map(move |l| { let mut x = v.clone(); x.push(l); x })).collect();
        }
        out
    }

    #[test]
    fn letter_patterns() {
        let abaca: LetterPattern = "abaca".parse().unwrap();
        assert!(letter_pattern_occurs(&w("01020"), &abaca));
        assert!(!letter_pattern_occurs(&w("012"), &abaca));
        assert!(!letter_pattern_occurs(&w("01010"), &abaca));
        let abcacba: LetterPattern = "abcacba".parse().unwrap();
        assert!(letter_pattern_occurs(&w("0120210"), &abcacba));
        assert!("abd".parse::<LetterPattern>().is_err());
        // the six ternary occurrences of abaca
        let occ: Vec<Vec<u8>> = all_words(3, 5).into_iter().filter(|x| abaca.matches(x)).collect();
        assert_eq!(occ.len(), 6);
    }

    #[test]
    fn overpals() {
        assert!(contains_overpal(&w("000")));
        assert!(contains_overpal(&w("0120210")));
        assert!(!contains_overpal(&w("01210")));
        assert!(!contains_overpal(&w("010")));
    }

    #[test]
    fn satisfies_reports() {
        let c = ternary().square_free();
        assert_eq!(satisfies(&w("0101"), &c).unwrap_err(), Violation::Repetition {
            threshold: Threshold::non_strict(2, 1),
            repetition: Repetition { start: 0, period: 2, length: 4 },
            factor: w("0101"),
        });
        let c = ternary().forbid([w("12")]);
        assert_eq!(satisfies(&w("012"), &c).unwrap_err(), Violation::ForbiddenFactor(w("12")));
    }

    #[test]
    fn constraint_text_round_trip() {
        let text = "alphabet=3\nthreshold=9/4\nmax_palindromes=6\nat_most=1:00,11,22\n";
        let c: ConstraintSet = text.parse().unwrap();
        assert_eq!(c.to_string(), text);
        let again: ConstraintSet = c.to_string().parse().unwrap();
        assert_eq!(again, c);
        assert!("alphabet=3\n".parse::<ConstraintSet>().is_err());
        assert!("alphabet=3\nbogus=1\n".parse::<ConstraintSet>().is_err());
        assert!("alphabet=2\nforbid=012\n".parse::<ConstraintSet>().is_err());
    }

    #[test]
    fn square_free_ternary_reaches_100() {
        let cert = backtrack(&ternary().square_free(), 100, DEFAULT_BUDGET).unwrap();
        match &cert.outcome {
            Outcome::Reached { target, witness } => {
                assert_eq!(*target, 100);
                assert!(satisfies(witness, &cert.constraints).is_ok());
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn binary_square_free_is_finite() {
        let c = ConstraintSet::new(Alphabet::BINARY).square_free();
        let cert = backtrack(&c, 10, DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.outcome, Outcome::Exhausted { longest: 3, witness: w("010") });
    }

    #[test]
    fn unary_square_free_counts() {
        let c = ConstraintSet::new(Alphabet::new(1).unwrap()).square_free();
        assert_eq!(count_words(&c, 2).unwrap(), vec![1, 0]);
    }

    #[test]
    fn four_palindromes_only_periodic() {
        // brute force over all 3^10 words
        let c = ternary().with_max_palindromes(4);
        let brute = all_words(3, 10).into_iter().filter(|x| crate::words::palindrome_count(x, Alphabet::TERNARY) <= 4).count();
        assert_eq!(brute, 6);
        assert_eq!(count_words(&c, 10).unwrap()[9], 6);
    }

    #[test]
    fn counts_match_generate_and_filter() {
        let sets = [
            ternary().with_max_palindromes(6),
            ternary().square_free(),
            ternary().with_threshold(Threshold::strict(7, 4)),
            ternary().square_free().forbid([w("010")]).with_max_palindromes(9),
            ternary().with_letter_pattern("abcab".parse().unwrap()),
            ternary().without_overpals().with_max_palindromes(11),
            ternary().with_threshold(Threshold::non_strict(9, 4)).with_max_palindromes(6).with_factor_limit(1, vec![w("00"), w("11"), w("22")]),
        ];
        for c in &sets {
            let counts = count_words(c, 12).unwrap();
            for n in 1..=12 {
                let brute = all_words(3, n).into_iter().filter(|x| satisfies(&Word::from_slice(x), c).is_ok()).count() as u64;
                assert_eq!(counts[n - 1], brute, "n={n} constraints:\n{c}");
            }
        }
    }

    #[test]
    fn symmetry_counts_times_orbits() {
        let c = ternary().with_max_palindromes(7).with_threshold(Threshold::strict(2, 1));
        assert!(c.is_permutation_invariant());
        let full = count_words(&c, 14).unwrap();
        // orbit of a word using j distinct letters has 3!/(3-j)! members
        let mut weighted = vec![0u64; 14];
        let mut v = |s: &SearchState<'_>| {
            let j = s.letters_used();
            weighted[s.len() - 1] += [0, 3, 6, 6][j];
            Step::Descend
        };
        walk(&c, &WalkOptions { max_depth: 14, symmetry: true, ..Default::default() }, &mut v).unwrap();
        assert_eq!(weighted, full);
    }

    #[test]
    fn symmetry_does_not_change_outcomes() {
        let c = ternary().with_threshold(Threshold::non_strict(9, 4)).with_max_palindromes(6).with_factor_limit(1, vec![w("00"), w("11"), w("22")]);
        let with = backtrack_with(&c, 500, &BacktrackOptions { symmetry: Some(true), ..Default::default() }).unwrap();
        let without = backtrack_with(&c, 500, &BacktrackOptions { symmetry: Some(false), ..Default::default() }).unwrap();
        assert_eq!(with.outcome.label(), without.outcome.label());
        assert_eq!(with.outcome.witness().len(), without.outcome.witness().len());
        assert!(!ternary().forbid([w("010")]).is_permutation_invariant());
        assert!(backtrack_with(&ternary().forbid([w("010")]), 5, &BacktrackOptions { symmetry: Some(true), ..Default::default() }).is_err());
    }

    #[test]
    fn budget_and_resume_reach_same_result() {
        let c = ternary().square_free().forbid([w("010")]).with_max_palindromes(12);
        let full = backtrack_with(&c, 400, &BacktrackOptions::default()).unwrap();
        let mut resume = None;
        let mut rounds = 0;
        let last = loop {
            let cert = backtrack_with(&c, 400, &BacktrackOptions { budget: Some(50 * (rounds + 1)), resume: resume.clone(), ..Default::default() }).unwrap();
            rounds += 1;
            match &cert.outcome {
                Outcome::Budget { frontier, nodes, witness, .. } => {
                    resume = Some(Checkpoint { frontier: frontier.clone(), nodes: *nodes, longest: witness.clone() });
                }
                _ => break cert,
            }
        };
        assert!(rounds > 1);
        assert_eq!(last.outcome, full.outcome);
        assert_eq!(last.nodes_expanded, full.nodes_expanded);
    }

    #[test]
    fn parallel_matches_sequential() {
        let c = ternary().square_free().forbid([w("010")]).with_max_palindromes(13);
        let seq = backtrack_with(&c, 300, &BacktrackOptions::default()).unwrap();
        let par = backtrack_with(&c, 300, &BacktrackOptions { jobs: 4, ..Default::default() }).unwrap();
        assert_eq!(seq.outcome, par.outcome);
        let c = ternary().with_max_palindromes(5);
        assert_eq!(count_words_with(&c, 22, false, 1).unwrap(), count_words_with(&c, 22, false, 4).unwrap());
        let c = ternary().square_free();
        let seq = backtrack_with(&c, 60, &BacktrackOptions::default()).unwrap();
        let par = backtrack_with(&c, 60, &BacktrackOptions { jobs: 3, ..Default::default() }).unwrap();
        assert_eq!(seq.outcome, par.outcome);
    }

    #[test]
    fn equivalence_rows() {
        let r = verify_equivalence_lemma(&[w("012")]).unwrap();
        assert!(r.violations.is_empty() && r.rows[0].all_agree());
        assert!(verify_equivalence_lemma(&[w("0101")]).is_err());
        let r = verify_equivalence_lemma(&[w("01202101")]).unwrap();
        let row = &r.rows[0];
        assert!(!row.overpal_free && !row.abcacba_free && !row.few_palindromes);
        assert_eq!(sixteen_palindromes().len(), 16);
    }

    proptest! {
        #[test]
        fn incremental_matches_full(word in proptest::collection::vec(0u8..3, 1..40), which in 0usize..5) {
            let c = match which {
                0 => ternary().square_free().with_max_palindromes(12),
                1 => ternary().with_threshold(Threshold::strict(7, 4)),
                2 => ternary().without_overpals().forbid([w("11")]),
                3 => ternary().with_allowed_palindromes(vec![w("0120210"), w("01210"), w("02120")]),
                _ => ternary().with_letter_pattern("abacbc".parse().unwrap()).with_factor_limit(1, vec![w("00"), w("11")]),
            };
            let mut s = SearchState::new(&c);
            let mut ok = true;
            for &l in &word {
                if s.try_push(l).is_err() { ok = false; break; }
            }
            prop_assert_eq!(ok, satisfies(&Word::new(word.clone()), &c).is_ok());
        }

        #[test]
        fn patterns_invariant_under_permutation(word in proptest::collection::vec(0u8..3, 0..30), pi in 0usize..6) {
            let perm = &permutations(3)[pi];
            for p in ["abaca", "abcab", "abacbc", "abcacba"] {
                let p: LetterPattern = p.parse().unwrap();
                let x = Word::new(word.clone());
                prop_assert_eq!(letter_pattern_occurs(&x, &p), letter_pattern_occurs(&x.permute(perm), &p));
            }
        }

        #[test]
        fn overpal_implies_long_palindrome(word in proptest::collection::vec(0u8..3, 0..30)) {
            let x = Word::new(word);
            if contains_overpal(&x) {
                let pals = crate::words::distinct_palindromes(&x);
                prop_assert!(pals.iter().any(|p| p.len() >= 3 && p.letters().iter().filter(|&&l| l == p[0]).count() >= 3));
            }
        }
    }
}
