//! Suffix array with LCP, used for maximal exponents, occurrence lookup and
//! branching-factor enumeration on long prefixes.

use std::cmp::Ordering;

pub struct SuffixIndex<'a> {
    text: &'a [u8],
    sa: Vec<u32>,
    rank: Vec<u32>,
    /// `lcp[i]` = longest common prefix of suffixes `sa[i-1]` and `sa[i]`; `lcp[0] = 0`.
    lcp: Vec<u32>,
}

impl<'a> SuffixIndex<'a> {
    pub fn new(text: &'a [u8]) -> Self {
        let sa = suffix_array(text);
        let mut rank = vec![0u32; text.len()];
        for (i, &s) in sa.iter().enumerate() {
            rank[s as usize] = i as u32;
        }
        let lcp = kasai(text, &sa, &rank);
        SuffixIndex { text, sa, rank, lcp }
    }

    pub fn text(&self) -> &'a [u8] {
        self.text
    }

    pub fn sa(&self) -> &[u32] {
        &self.sa
    }

    pub fn lcp(&self) -> &[u32] {
        &self.lcp
    }

    pub fn rank(&self, pos: usize) -> usize {
        self.rank[pos] as usize
    }

    /// Range of suffix-array ranks whose suffixes start with `pattern`.
    pub fn range(&self, pattern: &[u8]) -> std::ops::Range<usize> {
        let cmp = |s: u32| {
            let suf = &self.text[s as usize..];
            let k = suf.len().min(pattern.len());
            suf[..k].cmp(&pattern[..k]).then(if suf.len() < pattern.len() { Ordering::Less } else { Ordering::Equal })
        };
        let lo = self.sa.partition_point(|&s| cmp(s) == Ordering::Less);
        let hi = self.sa.partition_point(|&s| cmp(s) != Ordering::Greater);
        lo..hi
    }

    /// Sorted start positions of `pattern`.
    pub fn occurrences(&self, pattern: &[u8]) -> Vec<usize> {
        let mut v: Vec<usize> = self.sa[self.range(pattern)].iter().map(|&s| s as usize).collect();
        v.sort_unstable();
        v
    }
}

/// Prefix-doubling suffix array with radix passes, O(n log n).
pub fn suffix_array(text: &[u8]) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<u32> = (0..n as u32).collect();
    sa.sort_unstable_by_key(|&i| text[i as usize]);
    let mut rank = vec![0u32; n];
    for i in 1..n {
        let (a, b) = (sa[i - 1] as usize, sa[i] as usize);
        rank[b] = rank[a] + u32::from(text[a] != text[b]);
    }
    let mut tmp = vec![0u32; n];
    let mut count = vec![0u32; n + 1];
    let mut k = 1usize;
    while (rank[sa[n - 1] as usize] as usize) < n - 1 {
        // Order by second key: suffixes without a second half come first.
        let mut second = Vec::with_capacity(n);
        second.extend((n - k.min(n)..n).map(|i| i as u32));
        second.extend(sa.iter().filter(|&&s| s as usize >= k).map(|&s| s - k as u32));
        // Stable counting sort by first key.
        count.iter_mut().for_each(|c| *c = 0);
        for &r in &rank {
            count[r as usize + 1] += 1;
        }
        for i in 1..=n {
            count[i] += count[i - 1];
        }
        for &s in &second {
            let r = rank[s as usize] as usize;
            sa[count[r] as usize] = s;
            count[r] += 1;
        }
        tmp[sa[0] as usize] = 0;
        for i in 1..n {
            let (a, b) = (sa[i - 1] as usize, sa[i] as usize);
            let ra = (rank[a], if a + k < n { rank[a + k] as i64 } else { -1 });
            let rb = (rank[b], if b + k < n { rank[b + k] as i64 } else { -1 });
            tmp[b] = tmp[a] + u32::from(ra != rb);
        }
        std::mem::swap(&mut rank, &mut tmp);
        k *= 2;
    }
    sa
}

fn kasai(text: &[u8], sa: &[u32], rank: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Z-array: `z[i]` = longest common prefix of `s` and `s[i..]`; `z[0] = |s|`.
pub fn z_array<T: PartialEq>(s: &[T]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0, 0);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_sa(t: &[u8]) -> Vec<u32> {
        let mut v: Vec<u32> = (0..t.len() as u32).collect();
        v.sort_by(|&a, &b| t[a as usize..].cmp(&t[b as usize..]));
        v
    }

    proptest! {
        #[test]
        fn suffix_array_matches_sorting(t in proptest::collection::vec(0u8..3, 0..200)) {
            prop_assert_eq!(suffix_array(&t), naive_sa(&t));
            let idx = SuffixIndex::new(&t);
            for i in 1..t.len() {
                let (a, b) = (idx.sa()[i - 1] as usize, idx.sa()[i] as usize);
                let h = t[a..].iter().zip(&t[b..]).take_while(|(x, y)| x == y).count();
                prop_assert_eq!(idx.lcp()[i] as usize, h);
            }
        }

        #[test]
        fn occurrences_match_scan(t in proptest::collection::vec(0u8..2, 1..120), p in proptest::collection::vec(0u8..2, 1..4)) {
            let idx = SuffixIndex::new(&t);
            let expected: Vec<usize> = (0..t.len()).filter(|&i| t[i..].starts_with(&p)).collect();
            prop_assert_eq!(idx.occurrences(&p), expected);
        }
    }

    #[test]
    fn z_array_example() {
        assert_eq!(z_array(b"aabxaab"), vec![7, 1, 0, 0, 3, 1, 0]);
    }
}
