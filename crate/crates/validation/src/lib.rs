//! Slow, direct reimplementations used to cross-check the library.
//!
//! Nothing here calls the library's algorithms; words are plain letter
//! slices and exponents are `(numerator, denominator)` pairs.

use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Compares `a/b` with `c/d` for positive denominators.
pub fn cmp_frac(a: (u64, u64), b: (u64, u64)) -> Ordering {
    (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn reduce(f: (u64, u64)) -> (u64, u64) {
    let g = gcd(f.0, f.1);
    (f.0 / g, f.1 / g)
}

/// Smallest periods of every prefix of `w`, via the prefix function.
fn prefix_periods(w: &[u8]) -> Vec<usize> {
    let mut pi = vec![0usize; w.len()];
    for i in 1..w.len() {
        let mut k = pi[i - 1];
        while k > 0 && w[i] != w[k] {
            k = pi[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        pi[i] = k;
    }
    (0..w.len()).map(|i| i + 1 - pi[i]).collect()
}

/// Largest `|u| / period(u)` over nonempty factors `u`, reduced.
pub fn max_exponent(w: &[u8]) -> (u64, u64) {
    assert!(!w.is_empty());
    let mut best = (1u64, 1u64);
    for i in 0..w.len() {
        for (j, p) in prefix_periods(&w[i..]).into_iter().enumerate() {
            let e = ((j + 1) as u64, p as u64);
            if cmp_frac(e, best) == Ordering::Greater {
                best = e;
            }
        }
    }
    reduce(best)
}

/// Whether no factor has exponent above `t` (`strict`) or at least `t`.
pub fn is_free(w: &[u8], t: (u64, u64), strict: bool) -> bool {
    if w.is_empty() {
        return true;
    }
    let e = max_exponent(w);
    match cmp_frac(e, t) {
        Ordering::Greater => false,
        Ordering::Equal => strict,
        Ordering::Less => true,
    }
}

pub fn is_palindrome(w: &[u8]) -> bool {
    w.iter().eq(w.iter().rev())
}

/// Distinct palindromic factors, the empty word included.
pub fn palindromes(w: &[u8]) -> BTreeSet<Vec<u8>> {
    let mut out = BTreeSet::new();
    out.insert(Vec::new());
    for i in 0..w.len() {
        for j in i + 1..=w.len() {
            if is_palindrome(&w[i..j]) {
                out.insert(w[i..j].to_vec());
            }
        }
    }
    out
}

pub fn contains(w: &[u8], f: &[u8]) -> bool {
    f.is_empty() || w.windows(f.len()).any(|x| x == f)
}

/// The constraint fields exercised by the cross-checks.
#[derive(Debug, Clone)]
pub struct Spec {
    pub alphabet: u8,
    /// `(num, den, strict)`
    pub threshold: Option<(u64, u64, bool)>,
    pub square_free: bool,
    pub max_palindromes: Option<usize>,
    pub forbid: Vec<Vec<u8>>,
    /// At most `k` distinct members of the list occur.
    pub at_most: Option<(usize, Vec<Vec<u8>>)>,
}

impl Spec {
    pub fn new(alphabet: u8) -> Self {
        Spec { alphabet, threshold: None, square_free: false, max_palindromes: None, forbid: Vec::new(), at_most: None }
    }

    pub fn accepts(&self, w: &[u8]) -> bool {
        if w.iter().any(|&l| l >= self.alphabet) {
            return false;
        }
        if let Some((n, d, strict)) = self.threshold {
            if !is_free(w, (n, d), strict) {
                return false;
            }
        }
        if self.square_free && !is_free(w, (2, 1), false) {
            return false;
        }
        if let Some(k) = self.max_palindromes {
            if palindromes(w).len() > k {
                return false;
            }
        }
        if self.forbid.iter().any(|f| contains(w, f)) {
            return false;
        }
        if let Some((k, list)) = &self.at_most {
            if list.iter().filter(|f| contains(w, f)).count() > *k {
                return false;
            }
        }
        true
    }

    /// The same constraints in the library's text format.
    pub fn to_text(&self) -> String {
        let word = |w: &Vec<u8>| w.iter().map(|l| char::from(b'0' + l)).collect::<String>();
        let mut s = format!("alphabet={}\n", self.alphabet);
        if let Some((n, d, strict)) = self.threshold {
            s += &format!("threshold={n}/{d}{}\n", if strict { "+" } else { "" });
        }
        if self.square_free {
            s += "square_free=yes\n";
        }
        if let Some(k) = self.max_palindromes {
            s += &format!("max_palindromes={k}\n");
        }
        if !self.forbid.is_empty() {
            s += &format!("forbid={}\n", self.forbid.iter().map(word).collect::<Vec<_>>().join(","));
        }
        if let Some((k, list)) = &self.at_most {
            s += &format!("at_most={k}:{}\n", list.iter().map(word).collect::<Vec<_>>().join(","));
        }
        s
    }
}

/// Every word of length `n` over `{0..k}` in lexicographic order.
pub fn all_words(k: u8, n: usize) -> impl Iterator<Item = Vec<u8>> {
    let total = (k as u64).pow(n as u32);
    (0..total).map(move |mut x| {
        let mut w = vec![0u8; n];
        for i in (0..n).rev() {
            w[i] = (x % k as u64) as u8;
            x /= k as u64;
        }
        w
    })
}

/// Binary cube-free words of length `n`, grown letter by letter and
/// checked only on suffixes of the form `uuu`.
pub fn cube_free_binary(n: usize) -> Vec<Vec<u8>> {
    fn ends_in_cube(w: &[u8]) -> bool {
        let m = w.len();
        (1..=m / 3).any(|p| (0..2 * p).all(|i| w[m - 1 - i] == w[m - 1 - i - p]))
    }
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        if w.len() == n {
            out.push(w);
            continue;
        }
        for l in [1u8, 0] {
            let mut x = w.clone();
            x.push(l);
            if !ends_in_cube(&x) {
                stack.push(x);
            }
        }
    }
    out.sort();
    out
}

/// Applies images given as letter lists.
pub fn apply(images: &[Vec<u8>], w: &[u8]) -> Vec<u8> {
    w.iter().flat_map(|&l| images[l as usize].iter().copied()).collect()
}

/// Letter counts of `inner^j(a)` for every letter `a`, by iterating counts.
pub fn iterate_counts(images: &[Vec<u8>], target: usize, j: u32) -> Vec<Vec<u128>> {
    let k = images.len();
    let mut counts: Vec<Vec<u128>> = (0..k).map(|a| (0..k).map(|b| (a == b) as u128).collect()).collect();
    for _ in 0..j {
        counts = counts
            .iter()
            .map(|c| {
                let mut next = vec![0u128; k];
                for (a, &n) in c.iter().enumerate() {
                    for &l in &images[a] {
                        next[l as usize] += n;
                    }
                }
                next
            })
            .collect();
    }
    counts.iter().map(|c| c[..target.min(k)].to_vec()).collect()
}

/// Shortest distance between consecutive occurrences of `u` in `text`.
pub fn shortest_return(text: &[u8], u: &[u8]) -> Option<usize> {
    let occ: Vec<usize> = (0..=text.len().saturating_sub(u.len())).filter(|&i| text[i..].starts_with(u)).collect();
    occ.windows(2).map(|p| p[1] - p[0]).min()
}

/// Whether `u` has at least two left and two right extensions in `text`.
pub fn is_bispecial(text: &[u8], u: &[u8]) -> bool {
    let (mut left, mut right) = (BTreeSet::new(), BTreeSet::new());
    for i in 0..=text.len().saturating_sub(u.len()) {
        if text[i..].starts_with(u) {
            if i > 0 {
                left.insert(text[i - 1]);
            }
            if i + u.len() < text.len() {
                right.insert(text[i + u.len()]);
            }
        }
    }
    left.len() >= 2 && right.len() >= 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(max_exponent(&[0]), (1, 1));
        assert_eq!(max_exponent(&[0, 1, 0]), (3, 2));
        assert_eq!(max_exponent(&[0, 0, 0]), (3, 1));
        assert_eq!(max_exponent(&[0, 1, 2, 0, 1]), (5, 3));
        assert!(is_free(&[0, 1, 0], (3, 2), true));
        assert!(!is_free(&[0, 1, 0], (3, 2), false));
    }

    #[test]
    fn palindrome_sets() {
        assert_eq!(palindromes(&[0, 1, 0]).len(), 4);
        assert_eq!(palindromes(&[]).len(), 1);
    }

    #[test]
    fn cube_free_counts() {
        // 2, 4, 6, 10, 16, 24, 36, 56 for lengths 1..8
        let counts: Vec<usize> = (1..=8).map(|n| cube_free_binary(n).len()).collect();
        assert_eq!(counts, [2, 4, 6, 10, 16, 24, 36, 56]);
    }

    #[test]
    fn counts_iterate() {
        let images = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(iterate_counts(&images, 2, 3), vec![vec![4, 4], vec![4, 4]]);
    }
}
