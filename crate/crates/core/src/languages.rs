//! Extendable cores, Rauzy graphs and factor-set comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::{is_isomorphic, tarjan_scc};
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::unionfind::UnionFind;

use crate::avoidance::{walk, ConstraintSet, SearchState, Step, WalkEnd, WalkOptions};
use crate::error::{Error, Result};
use crate::morphisms::Morphism;
use crate::words::Word;

/// Words of one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLanguage {
    pub length: usize,
    pub members: BTreeSet<Word>,
}

impl FactorLanguage {
    pub fn new(length: usize, members: BTreeSet<Word>) -> Result<Self> {
        if let Some(w) = members.iter().find(|w| w.len() != length) {
            return Err(Error::Precondition(format!("{w} does not have length {length}")));
        }
        Ok(FactorLanguage { length, members })
    }

    /// Length-`len` factors of `w`.
    pub fn factors(w: &Word, len: usize) -> Self {
        FactorLanguage { length: len, members: w.factors_of_length(len) }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.members.contains(w)
    }

    pub fn reversed(&self) -> FactorLanguage {
        FactorLanguage { length: self.length, members: self.members.iter().map(Word::reverse).collect() }
    }

    /// Sorted word list, one per line.
    pub fn export(&self) -> String {
        self.members.iter().map(|w| format!("{w}\n")).collect()
    }
}

/// Length-`ℓ` words `v` for which some word `pvs` with `|p| = |s| = ℓ`
/// satisfies `c`. Enumerates all satisfying words of length `3ℓ`.
pub fn extendable_core(c: &ConstraintSet, len: usize, budget: Option<u64>) -> Result<FactorLanguage> {
    extendable_core_with_margin(c, len, len, budget)
}

/// Like [`extendable_core`] with `|p| = |s| = margin`.
pub fn extendable_core_with_margin(c: &ConstraintSet, len: usize, margin: usize, budget: Option<u64>) -> Result<FactorLanguage> {
    if len == 0 {
        return Err(Error::Precondition("core length must be at least 1".into()));
    }
    c.validate()?;
    let depth = len + 2 * margin;
    let mut members = BTreeSet::new();
    // once v has a witness, no other pv needs a suffix
    let mut v = |s: &SearchState<'_>| {
        if s.len() == margin + len && members.contains(&s.word()[margin..]) {
            return Step::Prune;
        }
        if s.len() == depth {
            members.insert(Word::from_slice(&s.word()[margin..margin + len]));
        }
        Step::Descend
    };
    let summary = walk(c, &WalkOptions { max_depth: depth, budget, ..Default::default() }, &mut v)?;
    if let WalkEnd::Budget { .. } = summary.end {
        return Err(Error::Budget(summary.nodes));
    }
    Ok(FactorLanguage { length: len, members })
}

/// Rauzy graph of order `ℓ`: vertices are words of length `ℓ − 1`, the arc
/// `w` runs from its prefix to its suffix. Vertex and arc lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RauzyGraph {
    pub order: usize,
    pub vertices: Vec<Word>,
    pub arcs: Vec<Word>,
}

impl RauzyGraph {
    fn from_arcs<I: IntoIterator<Item = Word>>(order: usize, arcs: I) -> Self {
        let arcs: BTreeSet<Word> = arcs.into_iter().collect();
        let mut vertices = BTreeSet::new();
        for a in &arcs {
            vertices.insert(a.prefix(order - 1));
            vertices.insert(a.factor(1, order - 1));
        }
        RauzyGraph { order, vertices: vertices.into_iter().collect(), arcs: arcs.into_iter().collect() }
    }

    fn vertex_index(&self, v: &Word) -> usize {
        self.vertices.binary_search(v).expect("vertex present")
    }

    fn endpoints(&self, arc: &Word) -> (usize, usize) {
        (self.vertex_index(&arc.prefix(self.order - 1)), self.vertex_index(&arc.factor(1, self.order - 1)))
    }

    pub fn to_petgraph(&self) -> DiGraph<Word, Word> {
        let mut g = DiGraph::new();
        let nodes: Vec<NodeIndex> = self.vertices.iter().map(|v| g.add_node(v.clone())).collect();
        for a in &self.arcs {
            let (s, t) = self.endpoints(a);
            g.add_edge(nodes[s], nodes[t], a.clone());
        }
        g
    }

    pub fn in_out_degrees(&self) -> Vec<(usize, usize)> {
        let mut d = vec![(0, 0); self.vertices.len()];
        for a in &self.arcs {
            let (s, t) = self.endpoints(a);
            d[s].1 += 1;
            d[t].0 += 1;
        }
        d
    }

    /// Graph whose arcs are the reversals of these arcs.
    pub fn reversed(&self) -> RauzyGraph {
        RauzyGraph::from_arcs(self.order, self.arcs.iter().map(Word::reverse))
    }

    /// Weakly connected components, ordered by their smallest arc.
    pub fn weak_components(&self) -> Vec<RauzyGraph> {
        let mut uf = UnionFind::new(self.vertices.len());
        for a in &self.arcs {
            let (s, t) = self.endpoints(a);
            uf.union(s, t);
        }
        let mut groups: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
        for a in &self.arcs {
            groups.entry(uf.find(self.endpoints(a).0)).or_default().push(a.clone());
        }
        let mut comps: Vec<RauzyGraph> = groups.into_values().map(|arcs| RauzyGraph::from_arcs(self.order, arcs)).collect();
        comps.sort_by(|a, b| a.arcs.cmp(&b.arcs));
        comps
    }

    /// The weak component with an arc containing `factor`.
    pub fn component_containing(&self, factor: &Word) -> Option<RauzyGraph> {
        self.weak_components().into_iter().find(|c| c.arcs.iter().any(|a| a.contains_factor(factor.letters())))
    }

    /// Strongly connected components as sorted vertex lists, ordered by
    /// smallest vertex.
    pub fn strong_components(&self) -> Vec<Vec<Word>> {
        let g = self.to_petgraph();
        let mut comps: Vec<Vec<Word>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<Word> = c.into_iter().map(|n| g[n].clone()).collect();
                v.sort();
                v
            })
            .collect();
        comps.sort();
        comps
    }

    pub fn condensation(&self) -> SccCondensation {
        let comps = self.strong_components();
        let mut comp_of = vec![0usize; self.vertices.len()];
        for (i, c) in comps.iter().enumerate() {
            for v in c {
                comp_of[self.vertex_index(v)] = i;
            }
        }
        let mut dag = BTreeSet::new();
        let mut inside = Vec::new();
        for a in &self.arcs {
            let (s, t) = self.endpoints(a);
            if comp_of[s] == comp_of[t] {
                inside.push(a.clone());
            } else {
                dag.insert((comp_of[s], comp_of[t]));
            }
        }
        SccCondensation {
            components: comps,
            dag_arcs: dag.into_iter().collect(),
            induced: RauzyGraph::from_arcs(self.order, inside),
        }
    }

    /// Unlabelled digraph isomorphism.
    pub fn isomorphic(&self, other: &RauzyGraph) -> bool {
        self.vertices.len() == other.vertices.len()
            && self.arcs.len() == other.arcs.len()
            && is_isomorphic(&self.to_petgraph(), &other.to_petgraph())
    }

    /// One arc word per line.
    pub fn export(&self) -> String {
        self.arcs.iter().map(|a| format!("{a}\n")).collect()
    }
}

impl fmt::Display for RauzyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "order={} vertices={} arcs={}", self.order, self.vertices.len(), self.arcs.len())
    }
}

pub fn rauzy_graph(lang: &FactorLanguage) -> Result<RauzyGraph> {
    if lang.length < 2 {
        return Err(Error::Precondition("Rauzy graph order must be at least 2".into()));
    }
    Ok(RauzyGraph::from_arcs(lang.length, lang.members.iter().cloned()))
}

/// Strongly connected components of a Rauzy graph, the DAG between them,
/// and the subgraph made of the arcs inside components.
#[derive(Debug, Clone)]
pub struct SccCondensation {
    pub components: Vec<Vec<Word>>,
    pub dag_arcs: Vec<(usize, usize)>,
    pub induced: RauzyGraph,
}

impl SccCondensation {
    /// Components that carry at least one arc (a cycle).
    pub fn nontrivial(&self) -> usize {
        self.induced.weak_components().len()
    }
}

/// Initial prefix length for factor-set stabilization, per unit of `ℓ`.
pub const STABILIZATION_START: usize = 64;

/// Length-`ℓ` factors of a generated infinite word, taken from a prefix
/// doubled until two consecutive doublings leave the set unchanged.
pub fn stable_factors<G: Fn(usize) -> Word>(generate: G, len: usize, max_prefix: usize) -> Result<(FactorLanguage, usize)> {
    let mut n = STABILIZATION_START * len.max(1);
    let mut prev = FactorLanguage::factors(&generate(n), len);
    let mut unchanged = 0;
    while unchanged < 2 {
        n *= 2;
        if n > max_prefix {
            return Err(Error::Unstable(max_prefix));
        }
        let next = FactorLanguage::factors(&generate(n), len);
        if next == prev {
            unchanged += 1;
        } else {
            unchanged = 0;
            prev = next;
        }
    }
    Ok((prev, n))
}

pub const DEFAULT_MAX_PREFIX: usize = 1 << 26;

pub fn factor_sets_equal<A: Fn(usize) -> Word, B: Fn(usize) -> Word>(a: A, b: B, len: usize) -> Result<bool> {
    let (fa, _) = stable_factors(a, len, DEFAULT_MAX_PREFIX)?;
    let (fb, _) = stable_factors(b, len, DEFAULT_MAX_PREFIX)?;
    Ok(fa == fb)
}

/// Sardinas–Patterson test: whether the images form a code.
pub fn is_code(m: &Morphism) -> std::result::Result<(), Word> {
    let code: Vec<&[u8]> = m.images().iter().map(Word::letters).collect();
    if let Some((i, _)) = code.iter().enumerate().find(|(i, x)| code[..*i].contains(x)) {
        return Err(Word::from_slice(code[i]));
    }
    // dangling suffixes u with x = y u for code words x != y
    let quotient = |xs: &[&[u8]], ys: &[&[u8]]| -> BTreeSet<Vec<u8>> {
        let mut out = BTreeSet::new();
        for x in xs {
            for y in ys {
                if y.len() > x.len() && y.starts_with(x) {
                    out.insert(y[x.len()..].to_vec());
                }
            }
        }
        out
    };
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut current: BTreeSet<Vec<u8>> = quotient(&code, &code);
    while !current.is_empty() {
        if let Some(x) = current.iter().find(|s| code.contains(&s.as_slice())) {
            return Err(Word::from_slice(x));
        }
        let cur: Vec<&[u8]> = current.iter().map(Vec::as_slice).collect();
        let mut next = quotient(&cur, &code);
        next.extend(quotient(&code, &cur));
        next.retain(|s| !seen.contains(s));
        seen.extend(current);
        current = next;
    }
    Ok(())
}

/// The unique letter sequence `u` with `m(u) = w`, if any.
pub fn decompose_over_code(w: &Word, m: &Morphism) -> Result<Option<Word>> {
    if let Err(x) = is_code(m) {
        return Err(Error::NotACode(format!("ambiguity witnessed by {x}")));
    }
    let n = w.len();
    // from[i]: letter whose image ends at i on a parse of w[..i]
    let mut from: Vec<Option<u8>> = vec![None; n + 1];
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for i in 0..n {
        if !reach[i] {
            continue;
        }
        for (l, img) in m.images().iter().enumerate() {
            let j = i + img.len();
            if j <= n && &w.letters()[i..j] == img.letters() && !reach[j] {
                reach[j] = true;
                from[j] = Some(l as u8);
            }
        }
    }
    if !reach[n] {
        return Ok(None);
    }
    let mut out = Vec::new();
    let mut i = n;
    while i > 0 {
        let l = from[i].unwrap();
        out.push(l);
        i -= m.image(l).len();
    }
    out.reverse();
    Ok(Some(Word::new(out)))
}
