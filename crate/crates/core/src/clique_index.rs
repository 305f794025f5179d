//! Transversal r-clique enumeration with per-edge and per-vertex incidence.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use rayon::prelude::*;

use crate::diagnostics::Check;
use crate::error::{Error, Result};
use crate::partite_graph::{PartiteGraph, VertexId};
use crate::scalar::{Rational, Scalar};

/// Dense tuple → id tables are built when n^r stays below this many slots.
const DENSE_LOOKUP_LIMIT: u64 = 1 << 24;
const NO_CLIQUE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CliqueId(pub usize);

impl CliqueId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// All transversal r-cliques of a host graph, frozen after construction.
#[derive(Debug, Clone)]
pub struct CliqueIndex {
    r: usize,
    n: usize,
    /// r global vertex indices per clique, cliques in lexicographic order.
    cliques: Vec<u32>,
    edge_offsets: Vec<usize>,
    edge_cliques: Vec<u32>,
    vertex_offsets: Vec<usize>,
    vertex_cliques: Vec<u32>,
    dense: Option<Vec<u32>>,
}

/// Calls `visit` on every transversal clique over `classes` whose vertex in
/// `classes[d]` lies in `candidates[d]`, in lexicographic order. Vertices are
/// passed as global indices.
pub(crate) fn for_each_transversal<F>(g: &PartiteGraph, classes: &[usize], candidates: &[FixedBitSet], visit: &mut F)
where
    F: FnMut(&[usize]),
{
    let depth = classes.len();
    if depth == 0 {
        visit(&[]);
        return;
    }
    let mut levels: Vec<Vec<FixedBitSet>> = vec![candidates.to_vec(); depth];
    let mut current = Vec::with_capacity(depth);
    walk(g, classes, 0, &mut levels, &mut current, visit);

    // levels[0] holds the candidate sets at depth d; deeper levels are scratch.
    fn walk<F: FnMut(&[usize])>(
        g: &PartiteGraph,
        classes: &[usize],
        d: usize,
        levels: &mut [Vec<FixedBitSet>],
        current: &mut Vec<usize>,
        visit: &mut F,
    ) {
        let n = g.n();
        let last = d + 1 == classes.len();
        let (cur, rest) = levels.split_first_mut().expect("one level per depth");
        for o in cur[d].ones() {
            let x = classes[d] * n + o;
            current.push(x);
            if last {
                visit(current);
            } else {
                let next = &mut rest[0];
                let mut empty = false;
                for dd in (d + 1)..classes.len() {
                    next[dd].clone_from(&cur[dd]);
                    next[dd].intersect_with(g.row(x, classes[dd]));
                    empty |= next[dd].is_clear();
                }
                if !empty {
                    walk(g, classes, d + 1, rest, current, visit);
                }
            }
            current.pop();
        }
    }
}

/// Number of transversal cliques over `classes` inside the candidate sets.
pub(crate) fn count_transversal(g: &PartiteGraph, classes: &[usize], candidates: &[FixedBitSet]) -> u64 {
    match classes.len() {
        0 => 1,
        1 => candidates[0].count_ones(..) as u64,
        2 => candidates[0]
            .ones()
            .map(|o| candidates[1].intersection_count(g.row(classes[0] * g.n() + o, classes[1])) as u64)
            .sum(),
        depth => {
            let mut levels: Vec<Vec<FixedBitSet>> = vec![candidates.to_vec(); depth];
            count_walk(g, classes, 0, &mut levels)
        }
    }
}

fn count_walk(g: &PartiteGraph, classes: &[usize], d: usize, levels: &mut [Vec<FixedBitSet>]) -> u64 {
    let n = g.n();
    let mut total = 0u64;
    let (cur, rest) = levels.split_first_mut().expect("one level per depth");
    for o in cur[d].ones() {
        let x = classes[d] * n + o;
        if d + 2 == classes.len() {
            total += cur[d + 1].intersection_count(g.row(x, classes[d + 1])) as u64;
        } else {
            let next = &mut rest[0];
            let mut empty = false;
            for dd in (d + 1)..classes.len() {
                next[dd].clone_from(&cur[dd]);
                next[dd].intersect_with(g.row(x, classes[dd]));
                empty |= next[dd].is_clear();
            }
            if !empty {
                total += count_walk(g, classes, d + 1, rest);
            }
        }
    }
    total
}

fn full_class(n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

impl CliqueIndex {
    pub fn enumerate(g: &PartiteGraph) -> Self {
        let (r, n) = (g.r(), g.n());
        let classes: Vec<usize> = (0..r).collect();
        // Parallel over the first-class vertex; chunks are concatenated in order.
        let chunks: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|o| {
                let x = o;
                let mut cands: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); r];
                cands[0].insert(o);
                for c in 1..r {
                    cands[c] = g.row(x, c).clone();
                }
                let mut out = Vec::new();
                for_each_transversal(g, &classes, &cands, &mut |k: &[usize]| {
                    out.extend(k.iter().map(|&v| v as u32));
                });
                out
            })
            .collect();
        let cliques: Vec<u32> = chunks.concat();
        let k = cliques.len() / r;

        let vertex_count = r * n;
        let mut vertex_offsets = vec![0usize; vertex_count + 1];
        for &v in &cliques {
            vertex_offsets[v as usize + 1] += 1;
        }
        prefix_sum(&mut vertex_offsets);
        let mut vertex_cliques = vec![0u32; cliques.len()];
        let mut fill = vertex_offsets.clone();
        for id in 0..k {
            for &v in &cliques[id * r..(id + 1) * r] {
                vertex_cliques[fill[v as usize]] = id as u32;
                fill[v as usize] += 1;
            }
        }

        let m = g.edge_count();
        let mut edge_offsets = vec![0usize; m + 1];
        let mut clique_edges = Vec::with_capacity(k * r * (r - 1) / 2);
        for id in 0..k {
            let t = &cliques[id * r..(id + 1) * r];
            for a in 0..r {
                for b in (a + 1)..r {
                    let e = g.edge_id(t[a] as usize, t[b] as usize).expect("clique pair is an edge");
                    edge_offsets[e + 1] += 1;
                    clique_edges.push(e);
                }
            }
        }
        prefix_sum(&mut edge_offsets);
        let mut edge_cliques = vec![0u32; clique_edges.len()];
        let mut fill = edge_offsets.clone();
        let per = r * (r - 1) / 2;
        for (pos, &e) in clique_edges.iter().enumerate() {
            edge_cliques[fill[e]] = (pos / per) as u32;
            fill[e] += 1;
        }

        let dense = (n as u64)
            .checked_pow(r as u32)
            .filter(|&slots| slots <= DENSE_LOOKUP_LIMIT)
            .map(|slots| {
                let mut table = vec![NO_CLIQUE; slots as usize];
                for id in 0..k {
                    let key = dense_key(n, &cliques[id * r..(id + 1) * r]);
                    table[key] = id as u32;
                }
                table
            });

        CliqueIndex {
            r,
            n,
            cliques,
            edge_offsets,
            edge_cliques,
            vertex_offsets,
            vertex_cliques,
            dense,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k_total(&self) -> usize {
        self.cliques.len() / self.r
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Global vertex indices of clique `id`, one per class in class order.
    #[inline]
    pub fn clique(&self, id: usize) -> &[u32] {
        &self.cliques[id * self.r..(id + 1) * self.r]
    }

    pub fn vertices(&self, id: CliqueId) -> Vec<VertexId> {
        self.clique(id.index())
            .iter()
            .map(|&g| VertexId::new(g as usize / self.n, g as usize % self.n))
            .collect()
    }

    /// Cliques containing edge `e` (an edge id of the host graph).
    #[inline]
    pub fn cliques_on_edge(&self, e: usize) -> &[u32] {
        &self.edge_cliques[self.edge_offsets[e]..self.edge_offsets[e + 1]]
    }

    /// Cliques containing global vertex `v`.
    #[inline]
    pub fn cliques_on_vertex(&self, v: usize) -> &[u32] {
        &self.vertex_cliques[self.vertex_offsets[v]..self.vertex_offsets[v + 1]]
    }

    /// Number of cliques through edge `e` (z_e).
    pub fn edge_count_of(&self, e: usize) -> usize {
        self.edge_offsets[e + 1] - self.edge_offsets[e]
    }

    pub fn edge_slots(&self) -> usize {
        self.edge_offsets.len() - 1
    }

    /// Id of the clique with these global vertices (class order), if present.
    #[inline]
    pub fn lookup(&self, tuple: &[usize]) -> Option<usize> {
        debug_assert_eq!(tuple.len(), self.r);
        if let Some(table) = &self.dense {
            let mut key = 0usize;
            for (c, &v) in tuple.iter().enumerate() {
                if v / self.n != c {
                    return None;
                }
                key = key * self.n + v % self.n;
            }
            let id = table[key];
            return (id != NO_CLIQUE).then_some(id as usize);
        }
        let (mut lo, mut hi) = (0usize, self.k_total());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let probe = self.clique(mid);
            match probe.iter().map(|&x| x as usize).cmp(tuple.iter().copied()) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Number of accumulator slots: n^r when the dense table exists, else k.
    pub(crate) fn slot_count(&self) -> usize {
        self.dense.as_ref().map_or(self.k_total(), Vec::len)
    }

    /// Accumulator slot of a clique given by its global vertices. Slots of
    /// neighbouring tuples are adjacent in memory when the dense table exists.
    #[inline]
    pub(crate) fn slot(&self, tuple: &[usize]) -> Option<usize> {
        match &self.dense {
            Some(table) => {
                let key = tuple.iter().fold(0usize, |key, &v| key * self.n + v % self.n);
                (table[key] != NO_CLIQUE).then_some(key)
            }
            None => self.lookup(tuple),
        }
    }

    #[inline]
    pub(crate) fn slot_clique(&self, slot: usize) -> usize {
        match &self.dense {
            Some(table) => table[slot] as usize,
            None => slot,
        }
    }

    /// Slot of every clique, in clique order.
    pub(crate) fn clique_slots(&self) -> Vec<usize> {
        match &self.dense {
            Some(_) => (0..self.k_total()).map(|id| dense_key(self.n, self.clique(id))).collect(),
            None => (0..self.k_total()).collect(),
        }
    }

    pub fn lookup_ids(&self, tuple: &[VertexId]) -> Option<CliqueId> {
        if tuple.len() != self.r {
            return None;
        }
        let mut sorted = tuple.to_vec();
        sorted.sort_unstable();
        let globals: Vec<usize> = sorted
            .iter()
            .map(|v| if v.offset < self.n { v.class * self.n + v.offset } else { usize::MAX })
            .collect();
        if globals.contains(&usize::MAX) {
            return None;
        }
        self.lookup(&globals).map(CliqueId)
    }
}

fn prefix_sum(v: &mut [usize]) {
    for i in 1..v.len() {
        v[i] += v[i - 1];
    }
}

fn dense_key(n: usize, tuple: &[u32]) -> usize {
    tuple.iter().fold(0usize, |key, &v| key * n + v as usize % n)
}

/// k_I: the number of |I|-cliques with one vertex in each class of `classes`.
pub fn count_partial(g: &PartiteGraph, classes: &[usize]) -> Result<u64> {
    if classes.is_empty() {
        return Err(Error::domain("class set must be nonempty"));
    }
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != classes.len() || sorted.iter().any(|&c| c >= g.r()) {
        return Err(Error::domain(format!("invalid class set {classes:?}")));
    }
    let cands: Vec<FixedBitSet> = sorted.iter().map(|_| full_class(g.n())).collect();
    Ok(count_transversal(g, &sorted, &cands))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialCount {
    pub classes: Vec<usize>,
    pub count: u64,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub delta: Rational,
    /// k_I for every class set with |I| >= r - 3 (the empty set counts 1).
    pub k_table: Vec<PartialCount>,
    /// `k_I/n <= k_{I\{i}} <= (1 + 2δr) k_I/n` for |I| >= r - 2, i ∈ I.
    pub total_bound: Check,
    /// `|z_e - k/n²| <= 9δr k/n²` for every edge.
    pub edge_bound: Check,
}

/// Evaluates the total clique count bound and the per-edge count bound,
/// each only when its δ hypothesis holds.
pub fn bounds_report(g: &PartiteGraph, idx: &CliqueIndex) -> BoundsReport {
    let (r, n) = (g.r(), g.n());
    let delta = g.delta();
    let n_q = Rational::from_i64(n as i64);

    let mut k_table = Vec::new();
    let mut lookup = std::collections::HashMap::new();
    for mask in 0u32..(1 << r) {
        let size = mask.count_ones() as usize;
        if size + 3 < r {
            continue;
        }
        let classes: Vec<usize> = (0..r).filter(|c| mask & (1 << c) != 0).collect();
        let count = if classes.is_empty() {
            1
        } else {
            count_partial(g, &classes).expect("valid class set")
        };
        lookup.insert(mask, count);
        k_table.push(PartialCount { classes, count });
    }
    k_table.sort_by(|a, b| a.classes.len().cmp(&b.classes.len()).then(a.classes.cmp(&b.classes)));

    let two_r = Rational::from_i64(2 * r as i64);
    let total_bound = if delta > Rational::ratio(1, 2 * r as i64) {
        Check::not_applicable("total clique count bound", format!("delta={} > 1/(2r)", delta.to_text()))
    } else {
        let mut check = Check::start("total clique count bound");
        let factor = Rational::one() + &two_r * &delta;
        for mask in 0u32..(1 << r) {
            if (mask.count_ones() as usize) + 2 < r {
                continue;
            }
            for i in (0..r).filter(|i| mask & (1 << i) != 0) {
                let k_i = BigInt::from(lookup[&mask]);
                let k_less = Rational::from_integer(BigInt::from(lookup[&(mask & !(1 << i))]));
                let base = Rational::new(k_i, BigInt::from(n));
                let upper = &factor * &base;
                let ok = base <= k_less && k_less <= upper;
                let ratio_val = if upper.is_zero() { 0.0 } else { Scalar::to_f64(&(&k_less / &upper)) };
                check.record(ratio_val.min(if ok { 1.0 } else { f64::INFINITY }), 1.0, || {
                    format!("I={mask:#b} i={i} k_I={} k_I-i={}", lookup[&mask], lookup[&(mask & !(1 << i))])
                });
            }
        }
        check
    };

    let edge_bound = if delta > Rational::ratio(1, 8 * r as i64) {
        Check::not_applicable("per-edge clique count bound", format!("delta={} > 1/(8r)", delta.to_text()))
    } else {
        let mut check = Check::start("per-edge clique count bound");
        let k = Rational::from_integer(BigInt::from(idx.k_total()));
        let nn = &n_q * &n_q;
        let centre = &k / &nn;
        let radius = Rational::from_i64(9 * r as i64) * &delta * &k / &nn;
        for e in 0..g.edge_count() {
            let z = Rational::from_i64(idx.edge_count_of(e) as i64);
            let dev = Scalar::abs(&(&z - &centre));
            let (value, ceiling) = (Scalar::to_f64(&dev), Scalar::to_f64(&radius));
            let ok = dev <= radius;
            let shown = if ok { value.min(ceiling) } else { f64::INFINITY };
            check.record(shown, ceiling, || {
                let (a, b) = g.edge_endpoints(e);
                format!("edge {} {} z_e={}", g.vertex(a), g.vertex(b), idx.edge_count_of(e))
            });
        }
        check
    };

    BoundsReport {
        delta,
        k_table,
        total_bound,
        edge_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partite_graph::generate_divisible;

    fn six_cycle() -> PartiteGraph {
        let v = VertexId::new;
        let cyc = [v(0, 0), v(1, 0), v(2, 0), v(0, 1), v(1, 1), v(2, 1)];
        PartiteGraph::from_edges(3, 2, (0..6).map(|i| (cyc[i], cyc[(i + 1) % 6]))).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        for (r, n) in [(3, 3), (4, 2), (5, 2)] {
            let g = PartiteGraph::complete(r, n).unwrap();
            assert_eq!(CliqueIndex::enumerate(&g).k_total(), n.pow(r as u32));
        }
        assert_eq!(CliqueIndex::enumerate(&six_cycle()).k_total(), 0);

        let k222 = PartiteGraph::complete(3, 2).unwrap();
        let edges = k222
            .edges()
            .iter()
            .map(|&(a, b)| (k222.vertex(a as usize), k222.vertex(b as usize)))
            .filter(|&(a, b)| !(a == VertexId::new(0, 0) && b == VertexId::new(1, 0)));
        let minus = PartiteGraph::from_edges(3, 2, edges).unwrap();
        assert_eq!(CliqueIndex::enumerate(&minus).k_total(), 6);
    }

    #[test]
    fn cliques_are_lexicographic_and_lookup_agrees() {
        let g = generate_divisible(3, 6, 2, 4).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        for id in 1..idx.k_total() {
            assert!(idx.clique(id - 1) < idx.clique(id));
        }
        for id in 0..idx.k_total() {
            let t: Vec<usize> = idx.clique(id).iter().map(|&x| x as usize).collect();
            assert_eq!(idx.lookup(&t), Some(id));
        }
        assert_eq!(idx.lookup_ids(&[VertexId::new(0, 9), VertexId::new(1, 0), VertexId::new(2, 0)]), None);
    }

    #[test]
    fn binary_search_lookup_matches_dense() {
        let g = generate_divisible(3, 5, 1, 2).unwrap();
        let mut idx = CliqueIndex::enumerate(&g);
        let with_dense: Vec<_> = (0..idx.k_total())
            .map(|id| idx.lookup(&idx.clique(id).iter().map(|&x| x as usize).collect::<Vec<_>>()))
            .collect();
        idx.dense = None;
        for (id, expect) in with_dense.into_iter().enumerate() {
            let t: Vec<usize> = idx.clique(id).iter().map(|&x| x as usize).collect();
            assert_eq!(idx.lookup(&t), expect);
        }
        assert_eq!(idx.lookup(&[0, 5, 14]).is_some(), g.adjacent(0, 5) && g.adjacent(0, 14) && g.adjacent(5, 14));
    }

    #[test]
    fn count_partial_examples() {
        let g = PartiteGraph::complete(3, 4).unwrap();
        assert_eq!(count_partial(&g, &[0, 2]).unwrap(), 16);
        let k1 = generate_divisible(3, 4, 1, 0).unwrap();
        assert_eq!(count_partial(&k1, &[0, 1]).unwrap(), 12);
        assert_eq!(count_partial(&k1, &[0, 1, 2]).unwrap(), CliqueIndex::enumerate(&k1).k_total() as u64);
        assert!(count_partial(&k1, &[]).is_err());
        assert!(count_partial(&k1, &[0, 0]).is_err());
    }

    #[test]
    fn bounds_report_examples() {
        let g = PartiteGraph::complete(3, 6).unwrap();
        let rep = bounds_report(&g, &CliqueIndex::enumerate(&g));
        assert!(rep.total_bound.passed() && rep.edge_bound.passed());

        let g = generate_divisible(3, 24, 1, 5).unwrap();
        let rep = bounds_report(&g, &CliqueIndex::enumerate(&g));
        assert!(rep.total_bound.passed(), "{}", rep.total_bound);
        assert!(rep.edge_bound.passed(), "{}", rep.edge_bound);

        let g = generate_divisible(3, 4, 3, 5).unwrap();
        let rep = bounds_report(&g, &CliqueIndex::enumerate(&g));
        assert!(!rep.total_bound.applicable());
        assert!(!rep.edge_bound.applicable());
    }
}
