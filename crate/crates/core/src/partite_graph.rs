//! Balanced r-partite host graphs.
//!
//! Vertices are addressed either by [`VertexId`] `(class, offset)` or by a
//! dense global index `class * n + offset`; the global order coincides with
//! the lexicographic order on `VertexId`. Adjacency is stored as one bitset
//! per (vertex, foreign class) pair, so restricting a neighbourhood to a class
//! is free and candidate sets can be intersected word-wise.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

const NO_EDGE: u32 = u32::MAX;

/// Upper bound on exact neighbour-rich subset enumeration inside the pipeline.
const EXACT_RICH_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub class: usize,
    pub offset: usize,
}

impl VertexId {
    pub fn new(class: usize, offset: usize) -> Self {
        VertexId { class, offset }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.class, self.offset)
    }
}

impl FromStr for VertexId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (c, o) = s
            .split_once(':')
            .ok_or_else(|| format!("vertex `{s}` is not of the form class:offset"))?;
        let class = c.parse().map_err(|_| format!("bad class index in `{s}`"))?;
        let offset = o.parse().map_err(|_| format!("bad offset in `{s}`"))?;
        Ok(VertexId { class, offset })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighbourRichMode {
    /// Enumerates every foreign set W with |W| <= r.
    Exact,
    /// Sound shortcut: the r largest miss-counts must fit into half the set.
    Certified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub r: usize,
    pub n: usize,
    pub edge_count: usize,
    pub hat_delta: usize,
    /// `1 - hat_delta / n`
    pub delta: Rational,
    pub divisible: bool,
    /// Edge counts between class pairs; the diagonal is zero.
    pub edges_between: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartiteGraph {
    r: usize,
    n: usize,
    rows: Vec<FixedBitSet>,
    edges: Vec<(u32, u32)>,
    edge_ids: Vec<u32>,
    hat_delta: usize,
}

impl PartiteGraph {
    /// Builds a graph from an edge list, rejecting intra-class edges,
    /// duplicates and out-of-range vertices.
    pub fn from_edges<I>(r: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut rows = empty_rows(r, n)?;
        for (a, b) in edges {
            for x in [a, b] {
                if x.class >= r || x.offset >= n {
                    return Err(Error::domain(format!("vertex {x} out of range for r={r}, n={n}")));
                }
            }
            if a.class == b.class {
                return Err(Error::domain(format!("intra-class edge {a} {b}")));
            }
            let (ga, gb) = (a.class * n + a.offset, b.class * n + b.offset);
            if rows[ga * r + b.class].contains(b.offset) {
                return Err(Error::domain(format!("duplicate edge {a} {b}")));
            }
            rows[ga * r + b.class].insert(b.offset);
            rows[gb * r + a.class].insert(a.offset);
        }
        Ok(Self::from_rows(r, n, rows))
    }

    /// The complete balanced r-partite graph.
    pub fn complete(r: usize, n: usize) -> Result<Self> {
        let mut rows = empty_rows(r, n)?;
        for v in 0..r * n {
            for c in 0..r {
                if c != v / n {
                    rows[v * r + c].insert_range(..);
                }
            }
        }
        Ok(Self::from_rows(r, n, rows))
    }

    fn from_rows(r: usize, n: usize, rows: Vec<FixedBitSet>) -> Self {
        let total = r * n;
        let mut edges = Vec::new();
        let mut edge_ids = vec![NO_EDGE; total * total];
        for a in 0..total {
            for cb in (a / n + 1)..r {
                for ob in rows[a * r + cb].ones() {
                    let b = cb * n + ob;
                    let id = edges.len() as u32;
                    edges.push((a as u32, b as u32));
                    edge_ids[a * total + b] = id;
                    edge_ids[b * total + a] = id;
                }
            }
        }
        let mut hat_delta = if r * n == 0 { 0 } else { n };
        for v in 0..total {
            for c in 0..r {
                if c != v / n {
                    hat_delta = hat_delta.min(rows[v * r + c].count_ones(..));
                }
            }
        }
        PartiteGraph {
            r,
            n,
            rows,
            edges,
            edge_ids,
            hat_delta,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.r * self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn hat_delta(&self) -> usize {
        self.hat_delta
    }

    /// `1 - hat_delta / n`
    pub fn delta(&self) -> Rational {
        Rational::ratio((self.n - self.hat_delta) as i64, self.n as i64)
    }

    #[inline]
    pub fn global(&self, v: VertexId) -> usize {
        v.class * self.n + v.offset
    }

    #[inline]
    pub fn vertex(&self, g: usize) -> VertexId {
        VertexId::new(g / self.n, g % self.n)
    }

    #[inline]
    pub fn class_of(&self, g: usize) -> usize {
        g / self.n
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.class < self.r && v.offset < self.n
    }

    /// Neighbours of global vertex `g` inside class `class`, as offsets.
    #[inline]
    pub fn row(&self, g: usize, class: usize) -> &FixedBitSet {
        &self.rows[g * self.r + class]
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.rows[a * self.r + b / self.n].contains(b % self.n)
    }

    pub fn adjacent_ids(&self, a: VertexId, b: VertexId) -> bool {
        self.contains_vertex(a) && self.contains_vertex(b) && self.adjacent(self.global(a), self.global(b))
    }

    /// Global indices of all neighbours of `g`, ascending.
    pub fn neighbours(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.r).flat_map(move |c| self.row(g, c).ones().map(move |o| c * self.n + o))
    }

    /// Edges as (lower, higher) global indices, sorted lexicographically.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    #[inline]
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let id = self.edge_ids[a * self.vertex_count() + b];
        (id != NO_EDGE).then_some(id as usize)
    }

    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let (a, b) = self.edges[e];
        (a as usize, b as usize)
    }

    pub fn degree_into(&self, v: VertexId, j: usize) -> Result<usize> {
        if !self.contains_vertex(v) || j >= self.r {
            return Err(Error::domain(format!("vertex {v} or class {j} out of range")));
        }
        if j == v.class {
            return Err(Error::domain(format!("class {j} is the own class of {v}")));
        }
        Ok(self.row(self.global(v), j).count_ones(..))
    }

    pub fn summarize(&self) -> GraphSummary {
        let (r, n) = (self.r, self.n);
        let mut edges_between = vec![vec![0usize; r]; r];
        let mut divisible = true;
        for v in 0..self.vertex_count() {
            let own = v / n;
            let mut first: Option<usize> = None;
            for c in (0..r).filter(|&c| c != own) {
                let d = self.row(v, c).count_ones(..);
                if c > own {
                    edges_between[own][c] += d;
                    edges_between[c][own] += d;
                }
                match first {
                    None => first = Some(d),
                    Some(f) if f != d => divisible = false,
                    _ => {}
                }
            }
        }
        GraphSummary {
            r,
            n,
            edge_count: self.edge_count(),
            hat_delta: self.hat_delta,
            delta: self.delta(),
            divisible,
            edges_between,
        }
    }

    /// Whether `set` (a subset of class `j`) is j-neighbour-rich: every
    /// W ⊆ V(G) \ V_j with |W| <= r has at least |set|/2 common neighbours
    /// in `set`.
    pub fn is_neighbour_rich(&self, j: usize, set: &[VertexId], mode: NeighbourRichMode) -> Result<bool> {
        let mask = self.class_mask(j, set)?;
        Ok(match mode {
            NeighbourRichMode::Certified => self.certified_rich(j, &mask),
            NeighbourRichMode::Exact => self.exact_rich(j, &mask, None).unwrap_or(false),
        })
    }

    /// Certified check with an exact fallback when the exact search is small
    /// enough. `None` means neither route could decide.
    pub fn check_neighbour_rich(&self, j: usize, mask: &FixedBitSet) -> Option<bool> {
        if self.certified_rich(j, mask) {
            return Some(true);
        }
        self.exact_rich(j, mask, Some(EXACT_RICH_BUDGET))
    }

    /// Validates that `set` is a nonempty subset of class `j` and returns its offset mask.
    pub fn class_mask(&self, j: usize, set: &[VertexId]) -> Result<FixedBitSet> {
        if j >= self.r {
            return Err(Error::domain(format!("class {j} out of range")));
        }
        if set.is_empty() {
            return Err(Error::domain("neighbour-rich check needs a nonempty set"));
        }
        let mut mask = FixedBitSet::with_capacity(self.n);
        for v in set {
            if v.class != j || v.offset >= self.n {
                return Err(Error::domain(format!("vertex {v} is not in class {j}")));
            }
            mask.insert(v.offset);
        }
        Ok(mask)
    }

    fn miss_counts(&self, j: usize, mask: &FixedBitSet) -> Vec<usize> {
        let size = mask.count_ones(..);
        (0..self.vertex_count())
            .filter(|&u| u / self.n != j)
            .map(|u| size - mask.intersection_count(self.row(u, j)))
            .collect()
    }

    fn certified_rich(&self, j: usize, mask: &FixedBitSet) -> bool {
        let size = mask.count_ones(..);
        let mut misses = self.miss_counts(j, mask);
        misses.sort_unstable_by(|a, b| b.cmp(a));
        let worst: usize = misses.iter().take(self.r).sum();
        2 * worst <= size
    }

    fn exact_rich(&self, j: usize, mask: &FixedBitSet, budget: Option<u64>) -> Option<bool> {
        let size = mask.count_ones(..);
        let mut sets: Vec<FixedBitSet> = Vec::new();
        for u in (0..self.vertex_count()).filter(|&u| u / self.n != j) {
            let mut miss = mask.clone();
            miss.difference_with(self.row(u, j));
            if !miss.is_clear() && !sets.contains(&miss) {
                sets.push(miss);
            }
        }
        if let Some(limit) = budget {
            let combos: u64 = (1..=self.r.min(sets.len()))
                .map(|k| binomial(sets.len() as u64, k as u64))
                .fold(0u64, |acc, c| acc.saturating_add(c));
            if combos > limit {
                return None;
            }
        }
        // 2 * |set ∩ common neighbourhood| >= |set|  <=>  2 * (size - |union of misses|) >= size
        fn violates(sets: &[FixedBitSet], start: usize, depth: usize, r: usize, union: &FixedBitSet, size: usize) -> bool {
            if depth == r {
                return false;
            }
            for i in start..sets.len() {
                let mut next = union.clone();
                next.union_with(&sets[i]);
                let covered = next.count_ones(..);
                if 2 * (size - covered) < size {
                    return true;
                }
                if violates(sets, i + 1, depth + 1, r, &next, size) {
                    return true;
                }
            }
            false
        }
        let empty = FixedBitSet::with_capacity(self.n);
        Some(!violates(&sets, 0, 0, self.r, &empty, size))
    }

    /// The subgraph induced on `keep[c]` (offsets in class c). All classes
    /// must keep the same number of vertices. Returns the new graph and the
    /// map from new global indices to old ones.
    pub fn induced(&self, keep: &[Vec<usize>]) -> Result<(PartiteGraph, Vec<usize>)> {
        if keep.len() != self.r {
            return Err(Error::domain("induced subgraph needs one vertex list per class"));
        }
        let m = keep[0].len();
        if keep.iter().any(|k| k.len() != m) {
            return Err(Error::domain("induced subgraph must stay balanced"));
        }
        let mut to_old = Vec::with_capacity(self.r * m);
        for (c, offs) in keep.iter().enumerate() {
            let mut sorted = offs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != m || sorted.iter().any(|&o| o >= self.n) {
                return Err(Error::domain(format!("bad vertex list for class {c}")));
            }
            to_old.extend(sorted.iter().map(|&o| c * self.n + o));
        }
        let mut rows = empty_rows(self.r, m)?;
        for new_a in 0..self.r * m {
            let old_a = to_old[new_a];
            for c in (0..self.r).filter(|&c| c != new_a / m) {
                for new_o in 0..m {
                    if self.adjacent(old_a, to_old[c * m + new_o]) {
                        rows[new_a * self.r + c].insert(new_o);
                    }
                }
            }
        }
        Ok((PartiteGraph::from_rows(self.r, m, rows), to_old))
    }

    /// Line-oriented text form: `pg <r> <n>` then one `ci:oi cj:oj` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("pg {} {}\n", self.r, self.n);
        for &(a, b) in &self.edges {
            let (a, b) = (self.vertex(a as usize), self.vertex(b as usize));
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match header {
                None => {
                    if fields.len() != 3 || fields[0] != "pg" {
                        return Err(parse_err("expected header `pg <r> <n>`".into()));
                    }
                    let r: usize = fields[1].parse().map_err(|_| parse_err("bad r".into()))?;
                    let n: usize = fields[2].parse().map_err(|_| parse_err("bad n".into()))?;
                    if r < 3 || n < 1 {
                        return Err(parse_err(format!("need r >= 3 and n >= 1, got r={r}, n={n}")));
                    }
                    header = Some((r, n));
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(parse_err("expected `<ci>:<oi> <cj>:<oj>`".into()));
                    }
                    let a: VertexId = fields[0].parse().map_err(parse_err)?;
                    let b: VertexId = fields[1].parse().map_err(parse_err)?;
                    edges.push((line_no, a, b));
                }
            }
        }
        let (r, n) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing `pg <r> <n>` header".into(),
        })?;
        let mut rows = empty_rows(r, n)?;
        for (line, a, b) in edges {
            let err = |message: String| Error::Parse { line, message };
            for x in [a, b] {
                if x.class >= r || x.offset >= n {
                    return Err(err(format!("vertex {x} out of range")));
                }
            }
            if a.class == b.class {
                return Err(err(format!("intra-class edge {a} {b}")));
            }
            let (ga, gb) = (a.class * n + a.offset, b.class * n + b.offset);
            if rows[ga * r + b.class].contains(b.offset) {
                return Err(err(format!("duplicate edge {a} {b}")));
            }
            rows[ga * r + b.class].insert(b.offset);
            rows[gb * r + a.class].insert(a.offset);
        }
        Ok(Self::from_rows(r, n, rows))
    }
}

fn empty_rows(r: usize, n: usize) -> Result<Vec<FixedBitSet>> {
    if r < 3 {
        return Err(Error::domain(format!("need at least 3 classes, got {r}")));
    }
    if n == 0 {
        return Err(Error::domain("classes must be nonempty"));
    }
    Ok(vec![FixedBitSet::with_capacity(n); r * r * n])
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Complete r-partite graph minus, for every class pair, `k` pairwise
/// disjoint perfect matchings. Every vertex loses exactly `k` neighbours in
/// each foreign class, so the result is K_r-divisible with hat_delta = n - k.
pub fn generate_divisible(r: usize, n: usize, k: usize, seed: u64) -> Result<PartiteGraph> {
    if k > n {
        return Err(Error::domain(format!("cannot remove {k} perfect matchings from K_{{{n},{n}}}")));
    }
    let mut rows = empty_rows(r, n)?;
    for v in 0..r * n {
        for c in (0..r).filter(|&c| c != v / n) {
            rows[v * r + c].insert_range(..);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for a in 0..r {
        for b in (a + 1)..r {
            let mut left: Vec<usize> = (0..n).collect();
            let mut right: Vec<usize> = (0..n).collect();
            left.shuffle(&mut rng);
            right.shuffle(&mut rng);
            for shift in sample(&mut rng, n, k).into_iter() {
                for x in 0..n {
                    let (oa, ob) = (left[x], right[(x + shift) % n]);
                    rows[(a * n + oa) * r + b].set(ob, false);
                    rows[(b * n + ob) * r + a].set(oa, false);
                }
            }
        }
    }
    Ok(PartiteGraph::from_rows(r, n, rows))
}

/// Number of edges a K_r-divisible graph has between any two classes, if the
/// summary is divisible.
pub fn common_pair_count(summary: &GraphSummary) -> Option<usize> {
    if !summary.divisible || summary.r < 2 {
        return None;
    }
    Some(summary.edges_between[0][1])
}

/// `floor(n * (1 - 1/(8r)))`, the per-class size of the intermediate set.
pub fn intermediate_class_size(n: usize, r: usize) -> usize {
    n * (8 * r - 1) / (8 * r)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn v(c: usize, o: usize) -> VertexId {
        VertexId::new(c, o)
    }

    /// The 6-cycle 0:0-1:0-2:0-0:1-1:1-2:1-0:0 as a tripartite graph.
    pub(crate) fn six_cycle() -> PartiteGraph {
        let cyc = [v(0, 0), v(1, 0), v(2, 0), v(0, 1), v(1, 1), v(2, 1)];
        let edges = (0..6).map(|i| (cyc[i], cyc[(i + 1) % 6]));
        PartiteGraph::from_edges(3, 2, edges).unwrap()
    }

    fn complete_minus_matching_01(n: usize) -> PartiteGraph {
        let g = PartiteGraph::complete(3, n).unwrap();
        let edges = g
            .edges()
            .iter()
            .map(|&(a, b)| (g.vertex(a as usize), g.vertex(b as usize)))
            .filter(|(a, b)| !(a.class == 0 && b.class == 1 && a.offset == b.offset));
        PartiteGraph::from_edges(3, n, edges).unwrap()
    }

    #[test]
    fn degree_examples() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        assert_eq!(g.degree_into(v(1, 2), 0).unwrap(), 3);
        let h = complete_minus_matching_01(3);
        assert_eq!(h.degree_into(v(0, 0), 1).unwrap(), 2);
        assert_eq!(h.degree_into(v(2, 0), 0).unwrap(), 3);
        assert!(matches!(h.degree_into(v(0, 0), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn summarize_examples() {
        let s = PartiteGraph::complete(3, 4).unwrap().summarize();
        assert!(s.divisible);
        assert_eq!(s.hat_delta, 4);
        assert_eq!(s.edge_count, 48);

        let k222 = PartiteGraph::complete(3, 2).unwrap();
        let edges = k222
            .edges()
            .iter()
            .map(|&(a, b)| (k222.vertex(a as usize), k222.vertex(b as usize)))
            .filter(|&(a, b)| !(a == v(0, 0) && b == v(1, 0)));
        let minus = PartiteGraph::from_edges(3, 2, edges).unwrap();
        assert!(!minus.summarize().divisible);

        let cyc = six_cycle().summarize();
        assert!(cyc.divisible);
        assert_eq!(cyc.hat_delta, 1);
        assert_eq!(cyc.edges_between[0][1], 2);
    }

    #[test]
    fn neighbour_rich_examples() {
        let g = PartiteGraph::complete(3, 4).unwrap();
        for mode in [NeighbourRichMode::Exact, NeighbourRichMode::Certified] {
            assert!(g.is_neighbour_rich(1, &[v(1, 2)], mode).unwrap());
            assert!(g.is_neighbour_rich(1, &[v(1, 0), v(1, 3)], mode).unwrap());
        }

        // 0:0 has no neighbour in {2:0}: the intersection is empty.
        let edges = PartiteGraph::complete(3, 2)
            .unwrap()
            .edges()
            .iter()
            .map(|&(a, b)| (VertexId::new(a as usize / 2, a as usize % 2), VertexId::new(b as usize / 2, b as usize % 2)))
            .filter(|&(a, b)| !(a == v(0, 0) && b == v(2, 0)))
            .collect::<Vec<_>>();
        let h = PartiteGraph::from_edges(3, 2, edges).unwrap();
        for mode in [NeighbourRichMode::Exact, NeighbourRichMode::Certified] {
            assert!(!h.is_neighbour_rich(2, &[v(2, 0)], mode).unwrap());
        }

        let big = generate_divisible(3, 12, 1, 3).unwrap();
        let class: Vec<_> = (0..12).map(|o| v(0, o)).collect();
        assert!(big.is_neighbour_rich(0, &class, NeighbourRichMode::Certified).unwrap());

        assert!(g.is_neighbour_rich(0, &[v(1, 0)], NeighbourRichMode::Exact).is_err());
        assert!(g.is_neighbour_rich(0, &[], NeighbourRichMode::Exact).is_err());
    }

    #[test]
    fn generator_examples() {
        let g = generate_divisible(3, 5, 0, 99).unwrap();
        assert_eq!(g, PartiteGraph::complete(3, 5).unwrap());
        assert_eq!(g.hat_delta(), 5);

        let h = generate_divisible(3, 5, 1, 7).unwrap();
        let s = h.summarize();
        assert!(s.divisible);
        for x in 0..15 {
            for c in (0..3).filter(|&c| c != x / 5) {
                assert_eq!(h.row(x, c).count_ones(..), 4);
            }
        }

        let s = generate_divisible(4, 6, 2, 1).unwrap().summarize();
        assert!(s.divisible);
        assert_eq!(s.hat_delta, 4);

        assert!(generate_divisible(3, 4, 5, 0).is_err());
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(generate_divisible(4, 7, 2, 11).unwrap(), generate_divisible(4, 7, 2, 11).unwrap());
        assert_ne!(generate_divisible(4, 7, 2, 11).unwrap(), generate_divisible(4, 7, 2, 12).unwrap());
    }

    #[test]
    fn parser_rejects_bad_lines() {
        assert!(PartiteGraph::parse("pg 3 2\n0:0 0:1\n").is_err());
        assert!(PartiteGraph::parse("pg 3 2\n0:0 1:0\n1:0 0:0\n").is_err());
        assert!(PartiteGraph::parse("pg 3 2\n0:0 1:2\n").is_err());
        assert!(PartiteGraph::parse("pg 3 2\n0:0 3:0\n").is_err());
        assert!(PartiteGraph::parse("0:0 1:0\n").is_err());
        let g = PartiteGraph::parse("# comment\npg 3 2\n\n1:0 0:0\n").unwrap();
        assert!(g.adjacent_ids(v(0, 0), v(1, 0)));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = generate_divisible(3, 6, 1, 5).unwrap();
        let keep = vec![vec![0, 2, 4], vec![1, 3, 5], vec![0, 1, 2]];
        let (h, map) = g.induced(&keep).unwrap();
        assert_eq!(h.n(), 3);
        for a in 0..9 {
            for b in 0..9 {
                if a / 3 != b / 3 {
                    assert_eq!(h.adjacent(a, b), g.adjacent(map[a], map[b]));
                }
            }
        }
        assert!(g.induced(&[vec![0], vec![0, 1], vec![0]]).is_err());
    }

    #[test]
    fn intermediate_size_floors() {
        assert_eq!(intermediate_class_size(12, 3), 11);
        assert_eq!(intermediate_class_size(24, 3), 23);
        assert_eq!(intermediate_class_size(144, 3), 138);
        assert_eq!(intermediate_class_size(4, 3), 3);
    }
}
