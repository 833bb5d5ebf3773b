//! Finite words over small integer alphabets.
//!
//! Letters are dense indices `0..size`. The text form of a word is a string of
//! digits (`"0120"`); letters 10 and above print as `a`..`z` then `A`..`Z`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Index};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_ALPHABET: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(u8);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::AlphabetSize(size));
        }
        Ok(Alphabet(size as u8))
    }

    pub const BINARY: Alphabet = Alphabet(2);
    pub const TERNARY: Alphabet = Alphabet(3);
    pub const QUATERNARY: Alphabet = Alphabet(4);

    pub fn size(self) -> usize {
        self.0 as usize
    }

    pub fn letters(self) -> impl Iterator<Item = u8> {
        0..self.0
    }

    pub fn contains(self, letter: u8) -> bool {
        letter < self.0
    }
}

/// A finite word. The alphabet is not stored; callers validate against an
/// [`Alphabet`] where it matters.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl std::borrow::Borrow<[u8]> for Word {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

pub(crate) fn letter_char(letter: u8) -> char {
    match letter {
        0..=9 => (b'0' + letter) as char,
        10..=35 => (b'a' + letter - 10) as char,
        36..=61 => (b'A' + letter - 36) as char,
        _ => '?',
    }
}

fn char_letter(c: char) -> Option<u8> {
    match c {
        '0'..='9' => Some(c as u8 - b'0'),
        'a'..='z' => Some(c as u8 - b'a' + 10),
        'A'..='Z' => Some(c as u8 - b'A' + 36),
        _ => None,
    }
}

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_slice(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Smallest alphabet containing every letter (at least unary).
    pub fn min_alphabet(&self) -> Alphabet {
        let size = self.0.iter().copied().max().map_or(1, |m| m as usize + 1);
        Alphabet(size.min(MAX_ALPHABET) as u8)
    }

    pub fn check_alphabet(&self, alphabet: Alphabet) -> Result<()> {
        match self.0.iter().find(|&&l| !alphabet.contains(l)) {
            Some(&letter) => Err(Error::LetterOutOfRange { letter, size: alphabet.size() }),
            None => Ok(()),
        }
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn is_palindrome(&self) -> bool {
        is_palindrome(&self.0)
    }

    pub fn parikh(&self, alphabet: Alphabet) -> ParikhVector {
        ParikhVector::of(&self.0, alphabet)
    }

    pub fn factor(&self, start: usize, len: usize) -> Word {
        Word(self.0[start..start + len].to_vec())
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn contains_factor(&self, f: &[u8]) -> bool {
        contains_factor(&self.0, f)
    }

    pub fn starts_with(&self, p: &[u8]) -> bool {
        self.0.starts_with(p)
    }

    /// Applies a letter permutation given as `perm[old] = new`.
    pub fn permute(&self, perm: &[u8]) -> Word {
        Word(self.0.iter().map(|&l| perm[l as usize]).collect())
    }

    /// Length-first, then lexicographic order.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// All distinct factors of length `len`.
    pub fn factors_of_length(&self, len: usize) -> BTreeSet<Word> {
        if len == 0 {
            return BTreeSet::from([Word::empty()]);
        }
        if len > self.len() {
            return BTreeSet::new();
        }
        self.0.windows(len).map(Word::from_slice).collect()
    }
}

pub(crate) fn is_palindrome(w: &[u8]) -> bool {
    w.iter().eq(w.iter().rev())
}

pub(crate) fn contains_factor(w: &[u8], f: &[u8]) -> bool {
    f.is_empty() || w.windows(f.len()).any(|x| x == f)
}

impl Index<usize> for Word {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ε" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(char_letter)
            .collect::<Option<Vec<u8>>>()
            .map(Word)
            .ok_or_else(|| Error::WordSyntax(s.to_string()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

/// Convenience for tests and fixtures: panics on malformed literals.
pub fn w(s: &str) -> Word {
    s.parse().expect("word literal")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParikhVector(pub Vec<u64>);

impl ParikhVector {
    pub fn zero(alphabet: Alphabet) -> Self {
        ParikhVector(vec![0; alphabet.size()])
    }

    pub fn of(letters: &[u8], alphabet: Alphabet) -> Self {
        let mut counts = vec![0u64; alphabet.size()];
        for &l in letters {
            counts[l as usize] += 1;
        }
        ParikhVector(counts)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &ParikhVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Add for &ParikhVector {
    type Output = ParikhVector;
    fn add(self, rhs: &ParikhVector) -> ParikhVector {
        ParikhVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// Inserts `marker` between the two letters of every occurrence of `trigger`.
pub fn insert_marker(w: &Word, trigger: &Word, marker: u8) -> Result<Word> {
    let t = trigger.letters();
    if t.len() != 2 || t[0] == t[1] || marker == t[0] || marker == t[1] {
        return Err(Error::BadTrigger);
    }
    let mut out = Vec::with_capacity(w.len() + w.len() / 2);
    for (i, &l) in w.letters().iter().enumerate() {
        if i > 0 && w[i - 1] == t[0] && l == t[1] {
            out.push(marker);
        }
        out.push(l);
    }
    Ok(Word(out))
}

pub fn erase_letter(w: &Word, a: u8) -> Word {
    Word(w.letters().iter().copied().filter(|&l| l != a).collect())
}

/// Incremental index of distinct palindromic factors (palindromic tree).
///
/// Supports `push` and `pop` so a depth-first search can maintain the number
/// of distinct palindromes of the current word. Appending one letter creates
/// at most one new palindrome.
#[derive(Debug, Clone)]
pub struct Eertree {
    stride: usize,
    text: Vec<u8>,
    // Node 0 is the imaginary root (length -1), node 1 the empty palindrome.
    len: Vec<i32>,
    link: Vec<u32>,
    parent: Vec<u32>,
    end: Vec<u32>,
    next: Vec<u32>,
    suffix: Vec<u32>,
    created: Vec<bool>,
}

const NONE: u32 = 0;

impl Eertree {
    pub fn new(alphabet: Alphabet) -> Self {
        let stride = alphabet.size();
        Eertree {
            stride,
            text: Vec::new(),
            len: vec![-1, 0],
            link: vec![0, 0],
            parent: vec![0, 0],
            end: vec![0, 0],
            next: vec![NONE; 2 * stride],
            suffix: Vec::new(),
            created: Vec::new(),
        }
    }

    pub fn from_word(w: &[u8], alphabet: Alphabet) -> Self {
        let mut t = Eertree::new(alphabet);
        for &l in w {
            t.push(l);
        }
        t
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    /// Distinct palindromes of the current text, including the empty word.
    pub fn count(&self) -> usize {
        self.len.len() - 1
    }

    fn longest_suffix_node(&self) -> u32 {
        self.suffix.last().copied().unwrap_or(1)
    }

    fn fits(&self, node: u32, i: usize, c: u8) -> bool {
        let l = self.len[node as usize];
        let j = i as i64 - l as i64 - 1;
        j >= 0 && self.text[j as usize] == c
    }

    /// Appends a letter; returns true when a new palindrome appeared.
    pub fn push(&mut self, c: u8) -> bool {
        let i = self.text.len();
        self.text.push(c);
        let mut cur = self.longest_suffix_node();
        while !self.fits(cur, i, c) {
            cur = self.link[cur as usize];
        }
        let slot = cur as usize * self.stride + c as usize;
        let existing = self.next[slot];
        if existing != NONE {
            self.suffix.push(existing);
            self.created.push(false);
            return false;
        }
        let node = self.len.len() as u32;
        let new_len = self.len[cur as usize] + 2;
        let link = if new_len == 1 {
            1
        } else {
            let mut q = self.link[cur as usize];
            while !self.fits(q, i, c) {
                q = self.link[q as usize];
            }
            self.next[q as usize * self.stride + c as usize]
        };
        self.len.push(new_len);
        self.link.push(link);
        self.parent.push(cur);
        self.end.push(i as u32);
        self.next.extend(std::iter::repeat_n(NONE, self.stride));
        self.next[slot] = node;
        self.suffix.push(node);
        self.created.push(true);
        true
    }

    pub fn pop(&mut self) {
        let Some(c) = self.text.pop() else { return };
        self.suffix.pop();
        if self.created.pop() == Some(true) {
            let node = self.len.len() - 1;
            let parent = self.parent[node] as usize;
            self.next[parent * self.stride + c as usize] = NONE;
            self.len.pop();
            self.link.pop();
            self.parent.pop();
            self.end.pop();
            self.next.truncate(self.len.len() * self.stride);
        }
    }

    /// The palindrome created by the last push, if any.
    pub fn last_created(&self) -> Option<&[u8]> {
        match self.created.last() {
            Some(true) => Some(self.node_word(self.len.len() - 1)),
            _ => None,
        }
    }

    fn node_word(&self, node: usize) -> &[u8] {
        let l = self.len[node].max(0) as usize;
        if l == 0 {
            return &[];
        }
        let e = self.end[node] as usize;
        &self.text[e + 1 - l..=e]
    }

    /// Lengths of all palindromic suffixes of the current text, longest first
    /// (the empty suffix excluded).
    pub fn palindromic_suffix_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        let mut node = self.longest_suffix_node();
        std::iter::from_fn(move || {
            let l = self.len[node as usize];
            if l <= 0 {
                return None;
            }
            node = self.link[node as usize];
            Some(l as usize)
        })
    }

    pub fn palindromes(&self) -> Vec<Word> {
        let mut out: Vec<Word> = (1..self.len.len()).map(|n| Word::from_slice(self.node_word(n))).collect();
        out.sort_by(|a, b| a.shortlex_cmp(b));
        out
    }
}

/// Distinct palindromic factors of `w` including ε, sorted by length then
/// lexicographically.
pub fn distinct_palindromes(w: &Word) -> Vec<Word> {
    Eertree::from_word(w.letters(), w.min_alphabet()).palindromes()
}

pub fn palindrome_count(w: &[u8], alphabet: Alphabet) -> usize {
    Eertree::from_word(w, alphabet).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_palindromes(w: &[u8]) -> BTreeSet<Vec<u8>> {
        let mut s = BTreeSet::new();
        s.insert(Vec::new());
        for i in 0..w.len() {
            for j in i + 1..=w.len() {
                if is_palindrome(&w[i..j]) {
                    s.insert(w[i..j].to_vec());
                }
            }
        }
        s
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(w("012").reverse(), w("210"));
        assert_eq!(Word::empty().reverse(), Word::empty());
        assert_eq!(w("0120210").reverse(), w("0120210"));
    }

    #[test]
    fn palindrome_predicate() {
        assert!(Word::empty().is_palindrome());
        assert!(!w("01").is_palindrome());
        assert!(w("0120210").is_palindrome());
    }

    #[test]
    fn palindromes_of_010() {
        assert_eq!(distinct_palindromes(&w("010")), vec![w(""), w("0"), w("1"), w("010")]);
    }

    #[test]
    fn parikh_examples() {
        assert_eq!(w("01120").parikh(Alphabet::TERNARY), ParikhVector(vec![2, 2, 1]));
        assert_eq!(Word::empty().parikh(Alphabet::TERNARY), ParikhVector(vec![0, 0, 0]));
        assert_eq!(w("0102012").parikh(Alphabet::TERNARY), ParikhVector(vec![3, 2, 2]));
    }

    #[test]
    fn marker_insertion() {
        assert_eq!(insert_marker(&w("10"), &w("10"), 2).unwrap(), w("120"));
        assert_eq!(insert_marker(&w("01101001"), &w("10"), 2).unwrap(), w("0112012001"));
        assert_eq!(insert_marker(&w("00"), &w("10"), 2).unwrap(), w("00"));
        assert!(insert_marker(&w("00"), &w("100"), 2).is_err());
        assert!(insert_marker(&w("00"), &w("10"), 1).is_err());
    }

    #[test]
    fn letter_erasure() {
        assert_eq!(erase_letter(&w("120"), 2), w("10"));
        assert_eq!(erase_letter(&w("011201200112001201120"), 2), w("0110100110010110"));
        assert_eq!(erase_letter(&Word::empty(), 2), Word::empty());
    }

    #[test]
    fn eertree_matches_naive_on_all_short_ternary_words() {
        // every ternary word of length <= 12, walked as a trie with push/pop
        fn rec(t: &mut Eertree, depth: usize, checked: &mut usize) {
            let naive = naive_palindromes(t.text());
            assert_eq!(t.count(), naive.len(), "{:?}", t.text());
            *checked += 1;
            if depth == 12 {
                return;
            }
            for c in 0..3 {
                let before = t.count();
                t.push(c);
                assert!(t.count() - before <= 1);
                rec(t, depth + 1, checked);
                t.pop();
                assert_eq!(t.count(), before);
            }
        }
        let mut t = Eertree::new(Alphabet::TERNARY);
        let mut checked = 0;
        rec(&mut t, 0, &mut checked);
        assert_eq!(checked, (0..=12).map(|k| 3usize.pow(k)).sum::<usize>());
    }

    #[test]
    fn palindromic_suffixes_and_created() {
        let mut t = Eertree::new(Alphabet::TERNARY);
        for &c in &[0, 1, 0, 1, 0] {
            t.push(c);
        }
        assert_eq!(t.palindromic_suffix_lengths().collect::<Vec<_>>(), vec![5, 3, 1]);
        assert_eq!(t.last_created(), Some(&[0, 1, 0, 1, 0][..]));
        t.push(0);
        assert_eq!(t.last_created(), Some(&[0, 0][..]));
    }

    #[test]
    fn literal_round_trip() {
        let x = w("0123456789abZ");
        assert_eq!(x.to_string(), "0123456789abZ");
        assert!("01x?".parse::<Word>().is_err());
        assert_eq!(w("ε"), Word::empty());
    }
}
