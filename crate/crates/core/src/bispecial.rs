//! Extension profiles, bispecial triplets and their f-images, shortest
//! return words, and critical exponents from bispecial factors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::languages::STABILIZATION_START;
use crate::morphisms::Morphism;
use crate::suffix::SuffixIndex;
use crate::words::{Alphabet, ParikhVector, Word};

/// Left and right extension pairs of a triplet.
pub type ExtensionPairs = ((u8, u8), (u8, u8));

/// Left, right and two-sided extensions of a factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionProfile {
    pub word: Word,
    pub left: BTreeSet<u8>,
    pub right: BTreeSet<u8>,
    pub bi: BTreeSet<(u8, u8)>,
    /// `|bi| − |left| − |right| + 1`
    pub b: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Weak,
    Ordinary,
    Strong,
}

impl ExtensionProfile {
    fn from_occurrences(text: &[u8], word: &[u8], occ: impl IntoIterator<Item = usize>) -> Self {
        let (mut left, mut right, mut bi) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for i in occ {
            let j = i + word.len();
            let l = (i > 0).then(|| text[i - 1]);
            let r = (j < text.len()).then(|| text[j]);
            left.extend(l);
            right.extend(r);
            if let (Some(l), Some(r)) = (l, r) {
                bi.insert((l, r));
            }
        }
        let b = bi.len() as i64 - left.len() as i64 - right.len() as i64 + 1;
        ExtensionProfile { word: Word::from_slice(word), left, right, bi, b }
    }

    pub fn is_left_special(&self) -> bool {
        self.left.len() > 1
    }

    pub fn is_right_special(&self) -> bool {
        self.right.len() > 1
    }

    pub fn is_bispecial(&self) -> bool {
        self.is_left_special() && self.is_right_special()
    }

    pub fn multiplicity(&self) -> Multiplicity {
        match self.b {
            b if b < 0 => Multiplicity::Weak,
            0 => Multiplicity::Ordinary,
            _ => Multiplicity::Strong,
        }
    }
}

fn find_occurrences(text: &[u8], w: &[u8]) -> Vec<usize> {
    if text.len() > 4096 && !w.is_empty() {
        SuffixIndex::new(text).occurrences(w)
    } else {
        crate::repetitions::occurrences(text, w)
    }
}

pub fn extension_profile(prefix: &Word, w: &Word) -> Result<ExtensionProfile> {
    let occ = find_occurrences(prefix.letters(), w.letters());
    if occ.is_empty() {
        return Err(Error::TooFewOccurrences { anchor: w.to_string(), found: 0, needed: 1 });
    }
    Ok(ExtensionProfile::from_occurrences(prefix.letters(), w.letters(), occ))
}

/// Profiles of all bispecial factors of `text` of length at most `max_len`,
/// ordered by length, then lexicographically.
pub fn bispecial_profiles(text: &[u8], max_len: usize) -> Vec<ExtensionProfile> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let idx = SuffixIndex::new(text);
    let (sa, lcp) = (idx.sa(), idx.lcp());
    let mut out = Vec::new();
    let mut report = |depth: usize, lb: usize, rb: usize| {
        if depth > max_len {
            return;
        }
        let start = sa[lb] as usize;
        let p = ExtensionProfile::from_occurrences(text, &text[start..start + depth], sa[lb..=rb].iter().map(|&s| s as usize));
        if p.is_bispecial() {
            out.push(p);
        }
    };
    // bottom-up traversal of LCP intervals; every right-special factor
    // labels one of them
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    for i in 1..=n {
        let l = lcp.get(i).map_or(0, |&x| x as usize);
        let mut lb = i - 1;
        while l < stack.last().unwrap().0 {
            let (h, start) = stack.pop().unwrap();
            report(h, start, i - 1);
            lb = start;
        }
        if l > stack.last().unwrap().0 {
            stack.push((l, lb));
        }
    }
    report(0, 0, n - 1);
    out.sort_by(|a, b| a.word.shortlex_cmp(&b.word));
    out
}

pub fn enumerate_bispecial(prefix: &Word, max_len: usize) -> Vec<Word> {
    bispecial_profiles(prefix.letters(), max_len).into_iter().map(|p| p.word).collect()
}

/// Bispecial profiles of a generated word, from prefixes doubled until two
/// consecutive doublings leave them unchanged. Returns the final prefix.
pub fn stable_bispecials<G: Fn(usize) -> Word>(generate: G, max_len: usize, max_prefix: usize) -> Result<(Vec<ExtensionProfile>, Word)> {
    let mut n = STABILIZATION_START * max_len.max(1);
    let mut prev = bispecial_profiles(generate(n).letters(), max_len);
    let mut unchanged = 0;
    loop {
        n *= 2;
        if n > max_prefix {
            return Err(Error::Unstable(max_prefix));
        }
        let text = generate(n);
        let next = bispecial_profiles(text.letters(), max_len);
        if next == prev {
            unchanged += 1;
            if unchanged == 2 {
                return Ok((next, text));
            }
        } else {
            unchanged = 0;
            prev = next;
        }
    }
}

/// Which pairing of the extensions is witnessed: `awc` and `bwd`
/// (straight), or `awd` and `bwc` (crossed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Straight,
    Crossed,
}

impl Crossing {
    fn flip(self) -> Self {
        match self {
            Crossing::Straight => Crossing::Crossed,
            Crossing::Crossed => Crossing::Straight,
        }
    }
}

/// `((a,b), w, (c,d))` with unordered pairs, stored sorted. Equality ignores
/// the crossing.
#[derive(Debug, Clone)]
pub struct BispecialTriplet {
    pub left: (u8, u8),
    pub core: Word,
    pub right: (u8, u8),
    pub crossing: Option<Crossing>,
}

impl PartialEq for BispecialTriplet {
    fn eq(&self, other: &Self) -> bool {
        self.left == other.left && self.core == other.core && self.right == other.right
    }
}

impl Eq for BispecialTriplet {}

impl BispecialTriplet {
    pub fn new(left: (u8, u8), core: Word, right: (u8, u8), crossing: Option<Crossing>) -> Result<Self> {
        if left.0 == left.1 || right.0 == right.1 {
            return Err(Error::Precondition("extension pairs need two distinct letters".into()));
        }
        let mut crossing = crossing;
        let sort = |p: (u8, u8)| if p.0 > p.1 { ((p.1, p.0), true) } else { (p, false) };
        let (left, sl) = sort(left);
        let (right, sr) = sort(right);
        if sl != sr {
            crossing = crossing.map(Crossing::flip);
        }
        Ok(BispecialTriplet { left, core, right, crossing })
    }

    pub fn extensions(&self) -> ExtensionPairs {
        (self.left, self.right)
    }

    /// Whether the crossing factors occur in `text`.
    pub fn occurs_in(&self, text: &[u8]) -> bool {
        let f = |a: u8, c: u8| {
            let mut v = vec![a];
            v.extend_from_slice(self.core.letters());
            v.push(c);
            crate::words::contains_factor(text, &v)
        };
        let (a, b) = self.left;
        let (c, d) = self.right;
        match self.crossing {
            Some(Crossing::Straight) => f(a, c) && f(b, d),
            Some(Crossing::Crossed) => f(a, d) && f(b, c),
            None => (f(a, c) && f(b, d)) || (f(a, d) && f(b, c)),
        }
    }
}

impl fmt::Display for BispecialTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let core = if self.core.is_empty() { "ε".to_string() } else { self.core.to_string() };
        write!(f, "(({},{}), {}, ({},{}))", self.left.0, self.left.1, core, self.right.0, self.right.1)
    }
}

/// Context words of an f-image: `(u₁, (a′,b′), u₂, (c′,d′))`, extension
/// letters in the order of the given pairs.
#[allow(clippy::type_complexity)]
fn image_context(left: (u8, u8), right: (u8, u8), m: &Morphism) -> Result<(Word, (u8, u8), Word, (u8, u8))> {
    let (ha, hb) = (m.image(left.0).letters(), m.image(left.1).letters());
    let s = ha.iter().rev().zip(hb.iter().rev()).take_while(|(x, y)| x == y).count();
    if s == ha.len() || s == hb.len() {
        return Err(Error::DegenerateImage(format!("image of {} is a suffix of the image of {}", left.0, left.1)));
    }
    let (hc, hd) = (m.image(right.0).letters(), m.image(right.1).letters());
    let p = hc.iter().zip(hd).take_while(|(x, y)| x == y).count();
    if p == hc.len() || p == hd.len() {
        return Err(Error::DegenerateImage(format!("image of {} is a prefix of the image of {}", right.0, right.1)));
    }
    Ok((
        Word::from_slice(&ha[ha.len() - s..]),
        (ha[ha.len() - s - 1], hb[hb.len() - s - 1]),
        Word::from_slice(&hc[..p]),
        (hc[p], hd[p]),
    ))
}

pub fn f_image(t: &BispecialTriplet, m: &Morphism) -> Result<BispecialTriplet> {
    if !m.is_endomorphism() {
        return Err(Error::NotEndomorphism);
    }
    let (u1, left, u2, right) = image_context(t.left, t.right, m)?;
    let core = u1.concat(&m.apply(&t.core)?).concat(&u2);
    BispecialTriplet::new(left, core, right, t.crossing)
}

/// Chains `t, f(t), …, fⁿ(t)` for each initial triplet. Extension pairs of
/// `fᵏ` and `fᵏ⁺³` must agree for `k ≥ 1`.
pub fn iterate_f_images(initials: &[BispecialTriplet], m: &Morphism, n: usize) -> Result<Vec<Vec<BispecialTriplet>>> {
    let mut out = Vec::new();
    for t in initials {
        let mut chain = vec![t.clone()];
        for _ in 0..n {
            let next = f_image(chain.last().unwrap(), m)?;
            chain.push(next);
        }
        check_extension_period(&chain.iter().map(BispecialTriplet::extensions).collect::<Vec<_>>(), t)?;
        out.push(chain);
    }
    Ok(out)
}

fn check_extension_period(ext: &[ExtensionPairs], t: &BispecialTriplet) -> Result<()> {
    for k in 1..ext.len().saturating_sub(3) {
        if ext[k] != ext[k + 3] {
            return Err(Error::ExtensionPeriod(format!("chain of {t}: steps {k} and {} differ", k + 3)));
        }
    }
    Ok(())
}

/// Whether some split of `w` is a synchronization point for every
/// occurrence of `w` in the image of `context`. The empty word has none.
pub fn has_synchronization_point(m: &Morphism, context: &Word, w: &Word) -> Result<bool> {
    if w.is_empty() {
        return Ok(false);
    }
    for split in 0..=w.len() {
        if crate::morphisms::synchronization_point_check(m, context, w, split, None)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All triplets `((a,b), w, (c,d))` supported by a profile.
pub fn triplets_of(p: &ExtensionProfile) -> Vec<BispecialTriplet> {
    let mut out = Vec::new();
    let left: Vec<u8> = p.left.iter().copied().collect();
    let right: Vec<u8> = p.right.iter().copied().collect();
    for (i, &a) in left.iter().enumerate() {
        for &b in &left[i + 1..] {
            for (j, &c) in right.iter().enumerate() {
                for &d in &right[j + 1..] {
                    let straight = p.bi.contains(&(a, c)) && p.bi.contains(&(b, d));
                    let crossed = p.bi.contains(&(a, d)) && p.bi.contains(&(b, c));
                    let crossing = if straight {
                        Crossing::Straight
                    } else if crossed {
                        Crossing::Crossed
                    } else {
                        continue;
                    };
                    out.push(BispecialTriplet { left: (a, b), core: p.word.clone(), right: (c, d), crossing: Some(crossing) });
                }
            }
        }
    }
    out
}

/// Bispecial factors of the fixed point without a synchronization point.
pub fn unsynchronized_bispecials(m: &Morphism, seed: u8, max_len: usize) -> Result<Vec<Word>> {
    let (profiles, prefix) = stable_bispecials(|n| m.fixed_point_prefix(seed, n).unwrap(), max_len, 1 << 22)?;
    let context = prefix.prefix(prefix.len().min(4096));
    let mut out = Vec::new();
    for p in profiles {
        if !has_synchronization_point(m, &context, &p.word)? {
            out.push(p.word);
        }
    }
    Ok(out)
}

const CHAIN_OVERLAP_DEPTH: usize = 4;

/// Initial triplets giving rise to all bispecial factors, from the triplets
/// of unsynchronized bispecials. A candidate is dropped when it is the
/// f-image of a candidate with a different core, or when its own f-image is a
/// candidate with the same core. Of candidates sharing an f-image only the
/// first is kept; they differ at most in their extension pairs. Finally a
/// triplet goes if its f-image lies deeper in another kept chain and its core
/// is kept by some other triplet.
pub fn initial_triplets(m: &Morphism, seed: u8, max_len: usize) -> Result<Vec<BispecialTriplet>> {
    let (profiles, prefix) = stable_bispecials(|n| m.fixed_point_prefix(seed, n).unwrap(), max_len, 1 << 22)?;
    let context = prefix.prefix(prefix.len().min(4096));
    let mut all = Vec::new();
    for p in &profiles {
        if !has_synchronization_point(m, &context, &p.word)? {
            all.extend(triplets_of(p));
        }
    }
    let images = all.iter().map(|t| f_image(t, m)).collect::<Result<Vec<_>>>()?;
    let mut kept = Vec::new();
    let mut seen: Vec<&BispecialTriplet> = Vec::new();
    for (t, img) in all.iter().zip(&images) {
        let generated = all.iter().zip(&images).any(|(s, i)| i == t && s.core != t.core);
        let redundant = all.iter().any(|s| s == img && s.core == t.core);
        if generated || redundant || seen.contains(&img) {
            continue;
        }
        seen.push(img);
        kept.push((t.clone(), img.clone()));
    }
    let mut deeper: Vec<Vec<BispecialTriplet>> = Vec::new();
    for (_, img) in &kept {
        let mut chain = vec![f_image(img, m)?];
        for _ in 1..CHAIN_OVERLAP_DEPTH {
            chain.push(f_image(chain.last().unwrap(), m)?);
        }
        deeper.push(chain);
    }
    let mut out = Vec::new();
    for (i, (t, img)) in kept.iter().enumerate() {
        let in_chain = deeper.iter().enumerate().any(|(j, c)| j != i && c.contains(img));
        let core_kept = kept.iter().enumerate().any(|(j, (s, _))| j != i && s.core == t.core);
        if !(in_chain && core_kept) {
            out.push(t.clone());
        }
    }
    Ok(out)
}

/// Whether two triplets start the same family: equal cores and equal
/// f-images.
pub fn same_family(a: &BispecialTriplet, b: &BispecialTriplet, m: &Morphism) -> Result<bool> {
    Ok(a.core == b.core && f_image(a, m)? == f_image(b, m)?)
}

/// Return words to `anchor` that are minimal under componentwise Parikh
/// dominance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestReturns {
    pub anchor: Word,
    pub minimal: Vec<Word>,
    /// Length of the shortest return word.
    pub shortest_len: usize,
}

impl ShortestReturns {
    /// Whether dominance has a least element.
    pub fn has_minimum(&self) -> bool {
        let alphabet = alphabet_of(&self.minimal);
        let vs: Vec<ParikhVector> = self.minimal.iter().map(|r| r.parikh(alphabet)).collect();
        vs.iter().all(|v| v == &vs[0])
    }
}

fn alphabet_of(words: &[Word]) -> Alphabet {
    let size = words.iter().flat_map(|w| w.letters()).max().map_or(1, |&m| m as usize + 1);
    Alphabet::new(size).expect("letters below 64")
}

fn minimal_returns(text: &[u8], anchor: &Word, occ: &[usize]) -> Result<ShortestReturns> {
    if occ.len() < 3 {
        return Err(Error::TooFewOccurrences { anchor: anchor.to_string(), found: occ.len(), needed: 3 });
    }
    let returns: BTreeSet<&[u8]> = occ.windows(2).map(|p| &text[p[0]..p[1]]).collect();
    let returns: Vec<Word> = returns.into_iter().map(Word::from_slice).collect();
    let alphabet = alphabet_of(&returns);
    let vs: Vec<ParikhVector> = returns.iter().map(|r| r.parikh(alphabet)).collect();
    let minimal: Vec<Word> = (0..returns.len())
        .filter(|&i| !vs.iter().any(|v| v != &vs[i] && v.dominated_by(&vs[i])))
        .map(|i| returns[i].clone())
        .collect();
    let shortest_len = returns.iter().map(Word::len).min().unwrap();
    Ok(ShortestReturns { anchor: anchor.clone(), minimal, shortest_len })
}

pub fn shortest_return_word(prefix: &Word, w: &Word) -> Result<ShortestReturns> {
    minimal_returns(prefix.letters(), w, &find_occurrences(prefix.letters(), w.letters()))
}

/// Parikh vector of `m(r)`.
pub fn return_word_pushforward(r: &Word, m: &Morphism) -> Result<ParikhVector> {
    Ok(m.apply(r)?.parikh(m.target()))
}

/// Integer matrix with arbitrary-precision entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl ExactMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Precondition("ragged matrix rows".into()));
        }
        Ok(ExactMatrix { rows: rows.len(), cols, data: rows.iter().flatten().map(|&x| BigInt::from(x)).collect() })
    }

    /// Incidence matrix: column `j` is the Parikh vector of the image of `j`.
    pub fn of_morphism(m: &Morphism) -> Self {
        let (rows, cols) = (m.target().size(), m.source().size());
        let mut data = vec![BigInt::zero(); rows * cols];
        for j in 0..cols {
            for &l in m.image(j as u8).letters() {
                data[l as usize * cols + j] += 1;
            }
        }
        ExactMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigInt::one();
        }
        ExactMatrix { rows: n, cols: n, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return Err(Error::Precondition(format!("cannot multiply {:?} by {:?}", self.shape(), other.shape())));
        }
        let mut data = vec![BigInt::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(ExactMatrix { rows: self.rows, cols: other.cols, data })
    }

    pub fn pow(&self, mut e: u32) -> Result<ExactMatrix> {
        if self.rows != self.cols {
            return Err(Error::Precondition("power of a non-square matrix".into()));
        }
        let mut base = self.clone();
        let mut acc = ExactMatrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, k: &BigInt) -> ExactMatrix {
        ExactMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn apply(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::Precondition(format!("vector of length {} for {:?} matrix", v.len(), self.shape())));
        }
        Ok((0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum()).collect())
    }

    /// `(1,…,1)·self`
    pub fn column_sums(&self) -> Vec<BigInt> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j).clone()).sum()).collect()
    }
}

pub fn big_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn add_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}


fn parikh_big(w: &Word, size: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); size];
    for &l in w.letters() {
        v[l as usize] += 1;
    }
    v
}

/// The two families treated in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    One,
    Fifteen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRatio {
    pub step: usize,
    pub bispecial_len: BigInt,
    pub return_len: BigInt,
    pub ratio: BigRational,
}

/// The ratio bound every bispecial factor of `g(h^ω(0))` must respect.
pub fn ratio_bound() -> BigRational {
    BigRational::new(19.into(), 22.into())
}

fn h_matrix() -> ExactMatrix {
    ExactMatrix::from_rows(&[vec![2, 0, 2, 2], vec![3, 1, 3, 4], vec![2, 0, 2, 2], vec![1, 1, 1, 2]]).unwrap()
}

fn g_matrix() -> ExactMatrix {
    ExactMatrix::from_rows(&[vec![3, 1, 2, 4], vec![2, 1, 3, 4], vec![2, 2, 2, 3]]).unwrap()
}

/// `|W_k| / |R_k|` along family 1 (steps `2..`) or 15 (steps `0..`) up to
/// step `3·n_max + 3`, from the Parikh recurrences and exact powers of the
/// incidence matrices. Fails if a ratio exceeds 19/22, or equals it anywhere
/// but at the head of family 15.
pub fn family_ratio_bound(family: Family, n_max: usize) -> Result<Vec<FamilyRatio>> {
    let m = h_matrix();
    let n = g_matrix();
    let sums = n.column_sums();
    let g_len = |v: &[BigInt]| -> BigInt { sums.iter().zip(v).map(|(a, b)| a * b).sum() };
    let e = big_vec(&[0, 1, 1, 0]);
    let a = big_vec(&[2, 3, 1, 1]);
    let b = big_vec(&[1, 1, 1, 0]);
    let zero = big_vec(&[0, 0, 0, 0]);
    let last = 3 * n_max + 3;
    let mut out = Vec::new();
    match family {
        Family::One => {
            // w_{k+1} = e + M w_k + (a, b, 0 for k ≡ 1, 2, 0 mod 3)
            let mut w = e.clone();
            let mut r = m.apply(&big_vec(&[1, 2, 1, 1]))?;
            for k in 1..last {
                let extra = [&zero, &a, &b][k % 3];
                w = add_vec(&add_vec(&e, &m.apply(&w)?), extra);
                if k + 1 > 2 {
                    r = m.apply(&r)?;
                }
                let step = k + 1;
                let context = 3 + [1, 7, 2][step % 3];
                out.push(FamilyRatio::new(step, BigInt::from(context) + g_len(&w), g_len(&r)));
            }
        }
        Family::Fifteen => {
            // w_{k+1} = M w_k + (b, 0, a for k ≡ 0, 1, 2 mod 3)
            let mut w = big_vec(&[0, 1, 0, 1]);
            let mut r = big_vec(&[0, 1, 1, 1]);
            out.push(FamilyRatio::new(0, BigInt::from(4) + g_len(&w), g_len(&r)));
            for k in 0..last {
                let extra = [&b, &zero, &a][k % 3];
                w = add_vec(&m.apply(&w)?, extra);
                r = m.apply(&r)?;
                let step = k + 1;
                let context = 2 + [2, 1, 7][step % 3];
                out.push(FamilyRatio::new(step, BigInt::from(context) + g_len(&w), g_len(&r)));
            }
        }
    }
    let bound = ratio_bound();
    for fr in &out {
        let head = family == Family::Fifteen && fr.step == 0;
        if fr.ratio > bound || (fr.ratio == bound && !head) {
            return Err(Error::RatioBound { n: fr.step, detail: format!("ratio {} against 19/22", fr.ratio) });
        }
    }
    Ok(out)
}

impl FamilyRatio {
    fn new(step: usize, bispecial_len: BigInt, return_len: BigInt) -> Self {
        let ratio = BigRational::new(bispecial_len.clone(), return_len.clone());
        FamilyRatio { step, bispecial_len, return_len, ratio }
    }
}

/// An infinite word `outer(inner^ω(seed))`, or the fixed point itself.
#[derive(Debug, Clone)]
pub struct WordSpec {
    pub inner: Morphism,
    pub seed: u8,
    pub outer: Option<Morphism>,
}

impl WordSpec {
    pub fn fixed_point(inner: Morphism, seed: u8) -> Self {
        WordSpec { inner, seed, outer: None }
    }

    pub fn image(outer: Morphism, inner: Morphism, seed: u8) -> Self {
        WordSpec { inner, seed, outer: Some(outer) }
    }

    pub fn prefix(&self, n: usize) -> Word {
        match &self.outer {
            None => self.inner.fixed_point_prefix(self.seed, n).unwrap(),
            Some(g) => {
                let src = self.inner.fixed_point_prefix(self.seed, n / g.min_image_len() + 1).unwrap();
                g.apply(&src).unwrap().prefix(n)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    BruteForce,
    Family { id: usize, step: usize },
}

/// One bispecial factor with the length of its shortest return word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRecord {
    pub word: Option<Word>,
    pub word_len: BigInt,
    pub return_len: BigInt,
    pub ratio: BigRational,
    pub provenance: Provenance,
}

impl fmt::Display for AuditRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "len={} return={} ratio={} ", self.word_len, self.return_len, self.ratio)?;
        match &self.provenance {
            Provenance::BruteForce => write!(f, "source=brute-force"),
            Provenance::Family { id, step } => write!(f, "source=family:{id}:{step}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DdpOptions {
    /// Bispecial factors examined by brute force, in length order.
    pub n_bispecial: usize,
    /// Longest bispecial factor examined by brute force.
    pub max_len: usize,
    /// f-image steps per family for `outer(inner^ω)` words; `None` skips
    /// the family towers.
    pub family_steps: Option<usize>,
}

impl Default for DdpOptions {
    fn default() -> Self {
        DdpOptions { n_bispecial: usize::MAX, max_len: 200, family_steps: Some(63) }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalExponentReport {
    pub exponent: BigRational,
    pub max_ratio: BigRational,
    /// Index into `records` of the first record attaining the maximum.
    pub argmax: usize,
    pub records: Vec<AuditRecord>,
    pub prefix_len: usize,
}

/// `1 + max |w|/|r|` over bispecial factors `w` with shortest return word
/// `r`: brute force on a stabilized prefix, plus the f-image family towers
/// of the inner fixed point when an outer morphism is given.
pub fn critical_exponent_ddp(spec: &WordSpec, opts: &DdpOptions) -> Result<CriticalExponentReport> {
    if !spec.inner.is_endomorphism() || !uniformly_recurrent(&spec.inner) {
        return Err(Error::Precondition("generating morphism is neither primitive nor primitive up to bounded letters".into()));
    }
    let (profiles, prefix) = stable_bispecials(|n| spec.prefix(n), opts.max_len, 1 << 24)?;
    let longest = profiles.last().map_or(0, |p| p.word.len());
    if longest * 8 < opts.max_len {
        return Err(Error::Precondition(format!("longest bispecial factor up to {} has length {longest}", opts.max_len)));
    }
    let idx = SuffixIndex::new(prefix.letters());
    let mut records = Vec::new();
    for p in profiles.iter().take(opts.n_bispecial) {
        let occ = if p.word.is_empty() { (0..=prefix.len()).collect() } else { idx.occurrences(p.word.letters()) };
        let sr = minimal_returns(prefix.letters(), &p.word, &occ)?;
        let (wl, rl) = (BigInt::from(p.word.len()), BigInt::from(sr.shortest_len));
        records.push(AuditRecord {
            word: Some(p.word.clone()),
            ratio: BigRational::new(wl.clone(), rl.clone()),
            word_len: wl,
            return_len: rl,
            provenance: Provenance::BruteForce,
        });
    }
    if let (Some(g), Some(steps)) = (&spec.outer, opts.family_steps) {
        let towers = FamilyTowers::new(g, &spec.inner, spec.seed)?;
        let tail = validated_tail(towers.sweep(steps)?, &records, opts.max_len)?;
        records.extend(tail);
    }
    let (argmax, max_ratio) = records
        .iter()
        .enumerate()
        .fold((0, BigRational::zero()), |(bi, best), (i, r)| if r.ratio > best { (i, r.ratio.clone()) } else { (bi, best) });
    Ok(CriticalExponentReport { exponent: BigRational::one() + &max_ratio, max_ratio, argmax, records, prefix_len: prefix.len() })
}

/// Primitive, or primitive on the growing letters with every bounded letter
/// sent to a single bounded letter and every growing letter to a word that
/// starts and ends with a growing letter. Fixed points of such morphisms are
/// uniformly recurrent.
pub fn uniformly_recurrent(m: &Morphism) -> bool {
    if m.incidence_matrix().is_ok_and(|im| im.is_primitive()) {
        return true;
    }
    let n = m.source().size();
    let mut bounded = vec![true; n];
    loop {
        let mut changed = false;
        for l in 0..n {
            let img = m.image(l as u8);
            if bounded[l] && !(img.len() == 1 && bounded[img.letters()[0] as usize]) {
                bounded[l] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let growing_ends = (0..n).filter(|&l| !bounded[l]).all(|l| {
        let img = m.image(l as u8).letters();
        !img.is_empty() && !bounded[img[0] as usize] && !bounded[img[img.len() - 1] as usize]
    });
    if !growing_ends {
        return false;
    }
    // reach[a] = letters of m^k(a)
    let mut reach: Vec<u64> = (0..n).map(|l| 1u64 << l).collect();
    for _ in 0..2 * n * n {
        reach = (0..n)
            .map(|a| (0..n).filter(|&b| reach[a] >> b & 1 == 1).fold(0, |acc, b| m.image(b as u8).letters().iter().fold(acc, |x, &c| x | 1 << c)))
            .collect();
        let full = (1u64 << n) - 1;
        if (0..n).filter(|&l| !bounded[l]).all(|l| reach[l] == full) {
            return true;
        }
    }
    false
}

/// Tower records beyond the brute-force range. Within the range each tower
/// word must be a brute-forced bispecial factor; the return lengths of short
/// cores may differ, but once a family agrees with brute force it must keep
/// agreeing, and only agreeing families contribute their tail.
fn validated_tail(tower: Vec<AuditRecord>, brute: &[AuditRecord], max_len: usize) -> Result<Vec<AuditRecord>> {
    let mut out = Vec::new();
    let mut validated: BTreeMap<usize, bool> = BTreeMap::new();
    for rec in tower {
        let Provenance::Family { id, step } = rec.provenance else { continue };
        let ok = validated.entry(id).or_insert(false);
        match &rec.word {
            Some(w) if w.len() <= max_len => {
                let b = brute
                    .iter()
                    .find(|b| b.word.as_ref() == Some(w))
                    .ok_or_else(|| Error::Precondition(format!("family {id} step {step}: {w} is not bispecial")))?;
                if b.return_len == rec.return_len {
                    *ok = true;
                } else if *ok {
                    return Err(Error::Precondition(format!("family {id} step {step}: return length {} against brute force {}", rec.return_len, b.return_len)));
                }
            }
            _ => {
                if !*ok {
                    return Err(Error::Precondition(format!("family {id} leaves the brute-force range unvalidated")));
                }
                out.push(rec);
            }
        }
    }
    Ok(out)
}

/// Cores shorter than this are checked against brute force.
const BRUTE_CORE_LIMIT: usize = 400;
const INNER_PREFIX: usize = 1 << 18;

/// f-image towers of all initial triplets of `inner`, pushed through `outer`.
pub struct FamilyTowers<'a> {
    outer: &'a Morphism,
    inner: &'a Morphism,
    initials: Vec<BispecialTriplet>,
    prefix: Word,
    left_words: Vec<Word>,
    right_words: Vec<Word>,
}

impl<'a> FamilyTowers<'a> {
    pub fn new(outer: &'a Morphism, inner: &'a Morphism, seed: u8) -> Result<Self> {
        let initials = initial_triplets(inner, seed, 16)?;
        let prefix = inner.fixed_point_prefix(seed, INNER_PREFIX)?;
        let (left_words, right_words) = extension_words(outer, &prefix)?;
        Ok(FamilyTowers { outer, inner, initials, prefix, left_words, right_words })
    }

    pub fn initials(&self) -> &[BispecialTriplet] {
        &self.initials
    }

    /// Common suffix of the outer images of the left extension words and
    /// common prefix of those of the right ones.
    fn contexts(&self, left: (u8, u8), right: (u8, u8)) -> Result<(Word, Word)> {
        let g = self.outer;
        let ga = g.apply(&self.left_words[left.0 as usize])?;
        let gb = g.apply(&self.left_words[left.1 as usize])?;
        let x = ga.letters().iter().rev().zip(gb.letters().iter().rev()).take_while(|(p, q)| p == q).count();
        let gc = g.apply(&self.right_words[right.0 as usize])?;
        let gd = g.apply(&self.right_words[right.1 as usize])?;
        let y = gc.letters().iter().zip(gd.letters()).take_while(|(p, q)| p == q).count();
        Ok((Word::from_slice(&ga.letters()[ga.len() - x..]), gc.prefix(y)))
    }

    fn outer_len(&self, v: &[BigInt]) -> BigInt {
        v.iter().enumerate().map(|(l, c)| c * BigInt::from(self.outer.image(l as u8).len())).sum()
    }

    /// Records for steps `0..=steps` of every family. Return vectors come
    /// from brute force while cores are short, then are pushed forward by
    /// the incidence matrix; both routes must agree where they overlap.
    pub fn sweep(&self, steps: usize) -> Result<Vec<AuditRecord>> {
        let h = self.inner;
        let size = h.source().size();
        let mat = ExactMatrix::of_morphism(h);
        let idx = SuffixIndex::new(self.prefix.letters());
        let mut out = Vec::new();
        for (id, t0) in self.initials.iter().enumerate() {
            let (mut left, mut right) = t0.extensions();
            let mut core = Some(t0.core.clone());
            let mut w = parikh_big(&t0.core, size);
            let mut rs: Option<Vec<Vec<BigInt>>> = None;
            let mut pushable = false;
            let mut ext = vec![(left, right)];
            for step in 0..=steps {
                if step > 0 {
                    let (u1, l, u2, r) = image_context(left, right, h)?;
                    w = add_vec(&add_vec(&parikh_big(&u1, size), &mat.apply(&w)?), &parikh_big(&u2, size));
                    core = match core {
                        Some(c) if c.len() < BRUTE_CORE_LIMIT => Some(u1.concat(&h.apply(&c)?).concat(&u2)),
                        _ => None,
                    };
                    let t = BispecialTriplet::new(l, Word::empty(), r, None)?;
                    (left, right) = t.extensions();
                    ext.push((left, right));
                }
                let pushed = match (&rs, pushable) {
                    (Some(prev), true) => Some(minimal_vectors(prev.iter().map(|r| mat.apply(r)).collect::<Result<_>>()?)),
                    _ => None,
                };
                let brute = match &core {
                    Some(c) if c.len() < BRUTE_CORE_LIMIT => {
                        let occ = if c.is_empty() { (0..=self.prefix.len()).collect() } else { idx.occurrences(c.letters()) };
                        let p = ExtensionProfile::from_occurrences(self.prefix.letters(), c.letters(), occ.iter().copied());
                        let sr = minimal_returns(self.prefix.letters(), c, &occ)?;
                        // returns push forward along f-images of factors with
                        // two extensions each side and a synchronization point
                        pushable = p.left.len() == 2 && p.right.len() == 2 && c.len() >= 2;
                        Some(minimal_vectors(sr.minimal.iter().map(|r| parikh_big(r, size)).collect()))
                    }
                    _ => None,
                };
                rs = match (brute, pushed) {
                    (Some(b), Some(p)) if b != p => {
                        return Err(Error::Precondition(format!("family {} step {step}: pushed return vectors disagree with brute force", id + 1)));
                    }
                    (Some(b), _) => Some(b),
                    (None, Some(p)) => Some(p),
                    (None, None) => {
                        return Err(Error::Precondition(format!("family {} step {step}: no return vector", id + 1)));
                    }
                };
                let (x, y) = self.contexts(left, right)?;
                let word = match &core {
                    Some(c) => Some(x.concat(&self.outer.apply(c)?).concat(&y)),
                    None => None,
                };
                let wl = BigInt::from(x.len() + y.len()) + self.outer_len(&w);
                let rl = rs.as_ref().unwrap().iter().map(|r| self.outer_len(r)).min().unwrap();
                out.push(AuditRecord {
                    word,
                    ratio: BigRational::new(wl.clone(), rl.clone()),
                    word_len: wl,
                    return_len: rl,
                    provenance: Provenance::Family { id: id + 1, step },
                });
            }
            check_extension_period(&ext, t0)?;
        }
        Ok(out)
    }
}

fn minimal_vectors(vs: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let le = |a: &Vec<BigInt>, b: &Vec<BigInt>| a.iter().zip(b).all(|(x, y)| x <= y);
    let mut out: Vec<Vec<BigInt>> = vs.iter().filter(|v| !vs.iter().any(|u| u != *v && le(u, v))).cloned().collect();
    out.sort();
    out.dedup();
    out
}

/// Per letter, the shortest word ending (resp. starting) with it that is
/// forced in `prefix` and whose outer image is not a suffix (prefix) of
/// another letter's. Used to read off common contexts of images.
fn extension_words(outer: &Morphism, prefix: &Word) -> Result<(Vec<Word>, Vec<Word>)> {
    let size = outer.source().size();
    let text = prefix.letters();
    let forced = |w: &[u8], left: bool| -> Option<u8> {
        let occ = crate::repetitions::occurrences(&text[..text.len().min(1 << 14)], w);
        let ext: BTreeSet<u8> = occ
            .iter()
            .filter_map(|&i| if left { (i > 0).then(|| text[i - 1]) } else { text.get(i + w.len()).copied() })
            .collect();
        (ext.len() == 1).then(|| *ext.iter().next().unwrap())
    };
    let mut left: Vec<Word> = (0..size as u8).map(|l| Word::new(vec![l])).collect();
    let mut right = left.clone();
    for _ in 0..8 {
        let mut changed = false;
        for a in 0..size {
            for b in 0..size {
                if a == b {
                    continue;
                }
                let (ga, gb) = (outer.apply(&left[a])?, outer.apply(&left[b])?);
                if ga.len() <= gb.len() && gb.letters().ends_with(ga.letters()) {
                    let l = forced(left[a].letters(), true).ok_or_else(|| Error::DegenerateImage(format!("left context of {a} is not forced")))?;
                    left[a] = Word::new(vec![l]).concat(&left[a]);
                    changed = true;
                }
                let (ga, gb) = (outer.apply(&right[a])?, outer.apply(&right[b])?);
                if ga.len() <= gb.len() && gb.starts_with(ga.letters()) {
                    let r = forced(right[a].letters(), false).ok_or_else(|| Error::DegenerateImage(format!("right context of {a} is not forced")))?;
                    right[a].push(r);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok((left, right));
        }
    }
    Err(Error::DegenerateImage("extension contexts do not settle".into()))
}

/// Expands fixture notation such as `12h(12)h^2(0121301)` with the named
/// morphisms.
pub fn expand(expr: &str, morphisms: &[(char, &Morphism)]) -> Result<Word> {
    let chars: Vec<char> = expr.chars().collect();
    let mut pos = 0;
    let w = expand_seq(&chars, &mut pos, morphisms)?;
    if pos != chars.len() {
        return Err(Error::WordSyntax(expr.to_string()));
    }
    Ok(w)
}

fn expand_seq(c: &[char], pos: &mut usize, ms: &[(char, &Morphism)]) -> Result<Word> {
    let bad = || Error::WordSyntax(c.iter().collect());
    let mut out = Word::empty();
    while *pos < c.len() && c[*pos] != ')' {
        let ch = c[*pos];
        if ch == 'ε' {
            *pos += 1;
        } else if let Some((_, m)) = ms.iter().find(|(n, _)| *n == ch).filter(|_| matches!(c.get(*pos + 1), Some('(') | Some('^'))) {
            *pos += 1;
            let mut power = 1u32;
            if c[*pos] == '^' {
                *pos += 1;
                let start = *pos;
                while *pos < c.len() && c[*pos].is_ascii_digit() {
                    *pos += 1;
                }
                power = c[start..*pos].iter().collect::<String>().parse().map_err(|_| bad())?;
            }
            if c.get(*pos) != Some(&'(') {
                return Err(bad());
            }
            *pos += 1;
            let mut inner = expand_seq(c, pos, ms)?;
            if c.get(*pos) != Some(&')') {
                return Err(bad());
            }
            *pos += 1;
            for _ in 0..power {
                inner = m.apply(&inner)?;
            }
            out = out.concat(&inner);
        } else {
            let w: Word = ch.to_string().parse()?;
            out = out.concat(&w);
            *pos += 1;
        }
    }
    Ok(out)
}

/// Bispecial factors grouped by length, for display.
pub fn by_length(words: &[Word]) -> BTreeMap<usize, Vec<Word>> {
    let mut m: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
    for w in words {
        m.entry(w.len()).or_default().push(w.clone());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, h_word, periodic_012};
    use crate::words::w;

    fn h() -> Morphism {
        fixtures::morphism("h").unwrap()
    }

    fn g() -> Morphism {
        fixtures::morphism("g").unwrap()
    }

    fn set(ws: &[&str]) -> BTreeSet<Word> {
        ws.iter().map(|s| w(s)).collect()
    }

    fn trip(l: (u8, u8), core: &str, r: (u8, u8)) -> BispecialTriplet {
        BispecialTriplet::new(l, w(core), r, None).unwrap()
    }

    #[test]
    fn profiles() {
        let p = extension_profile(&periodic_012(30), &w("0")).unwrap();
        assert_eq!(p.left, [2].into());
        assert_eq!(p.right, [1].into());
        assert!(!p.is_left_special() && !p.is_right_special());
        assert!(extension_profile(&h_word(10_000), &w("31")).unwrap().is_bispecial());
        assert!(extension_profile(&periodic_012(30), &w("00")).is_err());
    }

    #[test]
    fn empty_word_profile_counts_short_factors() {
        let text = h_word(10_000);
        let t = text.letters();
        let letters: BTreeSet<u8> = t.iter().copied().collect();
        let pairs: BTreeSet<(u8, u8)> = t.windows(2).map(|p| (p[0], p[1])).collect();
        let p = extension_profile(&text, &Word::empty()).unwrap();
        assert_eq!(p.bi, pairs);
        assert_eq!(p.left, t[..t.len() - 1].iter().copied().collect());
        assert_eq!(p.right, t[1..].iter().copied().collect());
        assert_eq!(p.left, letters);
        assert_eq!(p.b, pairs.len() as i64 - 2 * letters.len() as i64 + 1);
        assert!(p.is_bispecial());
    }

    #[test]
    fn initial_bispecials() {
        let found = enumerate_bispecial(&h_word(1 << 16), 4);
        let expected: Vec<Word> = ["ε", "1", "3", "01", "12", "13", "31", "012", "1201"].iter().map(|s| w(s)).collect();
        assert_eq!(found, expected);
        assert_eq!(unsynchronized_bispecials(&h(), 0, 16).unwrap(), expected);
        assert_eq!(enumerate_bispecial(&periodic_012(300), 10), vec![Word::empty()]);
        let gh = enumerate_bispecial(&fixtures::g_h_word(1 << 15), 9);
        assert!(gh.contains(&w("201210120")) && gh.contains(&w("120102012")));
    }

    #[test]
    fn bispecials_match_naive_enumeration() {
        let text = fixtures::g_h_word(3000);
        let t = text.letters();
        let mut naive = Vec::new();
        for len in 0..=12 {
            let factors: BTreeSet<&[u8]> = if len == 0 { [&t[..0]].into() } else { t.windows(len).collect() };
            for f in factors {
                let p = ExtensionProfile::from_occurrences(t, f, crate::repetitions::occurrences(t, f));
                if p.is_bispecial() {
                    naive.push(Word::from_slice(f));
                }
            }
        }
        assert_eq!(enumerate_bispecial(&text, 12), naive);
    }

    #[test]
    fn f_image_examples() {
        let m = h();
        assert_eq!(f_image(&trip((0, 1), "ε", (1, 2)), &m).unwrap(), trip((2, 1), "ε", (3, 0)));
        assert_eq!(f_image(&trip((0, 2), "ε", (1, 3)), &m).unwrap(), trip((0, 3), "12", (0, 3)));
        let h3 = m.apply(&w("3")).unwrap();
        assert_eq!(f_image(&trip((1, 2), "3", (0, 1)), &m).unwrap(), BispecialTriplet::new((1, 2), h3, (0, 3), None).unwrap());
        let img = f_image(&trip((1, 2), "31", (0, 2)), &m).unwrap();
        assert_eq!(img.core, m.apply(&w("31")).unwrap().concat(&w("012")));
        assert_eq!(img.extensions(), ((1, 2), (0, 1)));
    }

    #[test]
    fn degenerate_images_are_reported() {
        let m: Morphism = "0 -> 01\n1 -> 1".parse().unwrap();
        assert!(matches!(f_image(&trip((0, 1), "ε", (0, 1)), &m), Err(Error::DegenerateImage(_))));
    }

    #[test]
    fn crossing_follows_sorting() {
        let t = BispecialTriplet::new((2, 1), w("3"), (0, 1), Some(Crossing::Crossed)).unwrap();
        assert_eq!(t.crossing, Some(Crossing::Straight));
        assert!(t.occurs_in(h_word(1 << 14).letters()));
    }

    #[test]
    fn returns() {
        let text = h_word(1 << 16);
        let r = |s: &str| shortest_return_word(&text, &w(s)).unwrap();
        assert_eq!(r("31").minimal, vec![w("312")]);
        assert_eq!(r("13").minimal, vec![w("130")]);
        let three = r("3");
        assert_eq!(three.minimal.iter().cloned().collect::<BTreeSet<_>>(), set(&["301", "312"]));
        assert!(!three.has_minimum());
        assert!(matches!(shortest_return_word(&w("0120"), &w("0")), Err(Error::TooFewOccurrences { found: 2, .. })));
    }

    #[test]
    fn pushforward() {
        assert_eq!(return_word_pushforward(&w("312"), &h()).unwrap(), ParikhVector(vec![4, 8, 4, 4]));
        let m = ExactMatrix::of_morphism(&h());
        assert_eq!(m, h_matrix());
        assert_eq!(m.apply(&big_vec(&[0, 1, 1, 1])).unwrap(), big_vec(&[4, 8, 4, 4]));
        assert_eq!(ExactMatrix::of_morphism(&g()), g_matrix());
    }

    #[test]
    fn closed_form_row_sums() {
        let nm = g_matrix();
        let m = h_matrix();
        for j in 0..=12u32 {
            let six = BigInt::from(6).pow(j);
            let expected: Vec<BigInt> = [44 * &six - 9, 11 * &six + 9, 44 * &six - 9, 55 * &six].into_iter().map(|x| x / 5).collect();
            assert_eq!(nm.mul(&m.pow(j).unwrap()).unwrap().column_sums(), expected, "j = {j}");
        }
    }

    #[test]
    fn eigendecomposition() {
        let x = ExactMatrix::from_rows(&[vec![1, 2, 1, 1], vec![2, -1, 1, 0], vec![1, 2, 0, -1], vec![1, -3, -1, 0]]).unwrap();
        let d = ExactMatrix::from_rows(&[vec![6, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 0, 0], vec![0, 0, 0, 0]]).unwrap();
        let xinv15 = ExactMatrix::from_rows(&[vec![4, 1, 4, 5], vec![3, -3, 3, 0], vec![-5, 10, -5, -10], vec![10, -5, -5, 5]]).unwrap();
        let fifteen = BigInt::from(15);
        assert_eq!(x.mul(&xinv15).unwrap(), ExactMatrix::identity(4).scale(&fifteen));
        assert_eq!(x.mul(&d).unwrap().mul(&xinv15).unwrap(), h_matrix().scale(&fifteen));
    }

    #[test]
    fn matrix_shapes() {
        let a = ExactMatrix::from_rows(&[vec![1, 2, 3]]).unwrap();
        assert!(a.mul(&a).is_err());
        assert!(a.pow(2).is_err());
        assert!(ExactMatrix::from_rows(&[vec![1], vec![1, 2]]).is_err());
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn six(e: u32) -> BigRational {
        BigRational::from_integer(BigInt::from(6).pow(e))
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn ratio_at(rows: &[FamilyRatio], step: usize) -> BigRational {
        rows.iter().find(|x| x.step == step).unwrap().ratio.clone()
    }

    #[test]
    fn case_one_closed_forms() {
        let rows = family_ratio_bound(Family::One, 5).unwrap();
        let bound = ratio_bound();
        for n in 0..=5u32 {
            let ni = int(n as i64);
            if n >= 1 {
                let num = int(10) + r(11, 5) * (six(3 * n + 1) - int(1)) + r(44 * 36, 215) * (six(3 * n) - int(1)) + r(594, 1075) * (six(3 * n) - int(1)) - r(9, 5) * &ni;
                let v = num / (int(33) * six(3 * n));
                assert_eq!(ratio_at(&rows, 1 + 3 * n as usize), v);
                assert!(v < r(688, 1075) + r(10, 33) / six(3 * n) && v < bound);
            }
            let num = int(5) + r(11, 5) * (six(3 * n + 2) - int(1)) + r(44, 215) * (six(3 * n + 3) - int(1)) + r(3564, 1075) * (six(3 * n) - int(1)) - r(9, 5) * &ni;
            let v = num / (int(33) * six(3 * n + 1));
            assert_eq!(ratio_at(&rows, 2 + 3 * n as usize), v);
            assert!(v < r(688, 1075) + r(5, 33) / six(3 * n + 1) && v < bound);
            let num = int(4) + (r(11, 5) + r(264, 215) + r(99, 1075)) * (six(3 * n + 3) - int(1)) - r(9, 5) * (&ni + int(1));
            let v = num / (int(33) * six(3 * n + 2));
            assert_eq!(ratio_at(&rows, 3 + 3 * n as usize), v);
            assert!(v < r(688, 1075) + r(4, 33) / six(3 * n + 2) && v < bound);
        }
    }

    #[test]
    fn case_fifteen_closed_forms() {
        let rows = family_ratio_bound(Family::Fifteen, 5).unwrap();
        assert_eq!(ratio_at(&rows, 0), ratio_bound());
        let sum = |lo: u32, hi: i64, f: &dyn Fn(u32) -> BigRational| (lo as i64..=hi).map(|j| f(j as u32)).fold(int(0), |a, b| a + b);
        for n in 0..=5u32 {
            let nn = n as i64;
            let num = int(3) + (int(66) * six(3 * n + 1) + int(9)) / int(5) + sum(0, nn, &|j| (int(99) * six(3 * j) - int(9)) / int(5)) + sum(0, nn - 1, &|j| int(44) * six(3 * j + 1));
            let v = num / (int(22) * six(3 * n + 1));
            assert_eq!(ratio_at(&rows, 1 + 3 * n as usize), v);
            assert!(v < r(817, 1075) + r(2, 55) / six(3 * n));
            let num = int(9) + (int(66) * six(3 * n + 2) + int(9)) / int(5) + sum(0, nn, &|j| (int(99) * six(3 * j + 1) - int(9)) / int(5)) + sum(0, nn - 1, &|j| int(44) * six(3 * j + 2));
            let v = num / (int(22) * six(3 * n + 2));
            assert_eq!(ratio_at(&rows, 2 + 3 * n as usize), v);
            assert!(v < r(817, 1075) + r(9, 110) / six(3 * n + 1));
            let num = int(4) + (int(66) * six(3 * n + 3) + int(9)) / int(5) + sum(0, nn, &|j| (int(99) * six(3 * j + 2) - int(9)) / int(5)) + sum(0, nn, &|j| int(44) * six(3 * j));
            let v = num / (int(22) * six(3 * n + 3));
            assert_eq!(ratio_at(&rows, 3 + 3 * n as usize), v);
            assert!(v < r(817, 1075) + r(29, 110) / six(3 * n + 3));
        }
    }

    #[test]
    fn expressions() {
        let (h, g) = (h(), g());
        let ms = [('h', &h), ('g', &g)];
        assert_eq!(expand("ε", &ms).unwrap(), Word::empty());
        assert_eq!(expand("12h(3)0", &ms).unwrap(), w("12").concat(&h.apply(&w("3")).unwrap()).concat(&w("0")));
        assert_eq!(expand("h^2(1)", &ms).unwrap(), h.apply(&h.apply(&w("1")).unwrap()).unwrap());
        assert_eq!(expand("h(h(1))", &ms).unwrap(), expand("h^2(1)", &ms).unwrap());
        assert_eq!(expand("012g(1)01", &ms).unwrap(), w("0120212").concat(&w("01")));
        assert!(expand("h(1", &ms).is_err());
        assert!(expand("1)", &ms).is_err());
    }

    #[test]
    fn uniform_recurrence_precondition() {
        assert!(uniformly_recurrent(&h()));
        assert!(uniformly_recurrent(&fixtures::morphism("t").unwrap()));
        let m: Morphism = "0 -> 01\n1 -> 1".parse().unwrap();
        assert!(!uniformly_recurrent(&m));
    }
}
