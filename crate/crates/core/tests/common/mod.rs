//! Brute-force reference computations shared by the integration tests. They
//! only read the graph's adjacency and recompute everything else from
//! scratch, so they can be used to check the library's indexed versions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fracdecomp::{CliqueIndex, CliqueWeighting, PartiteGraph, Rational, Scalar, VertexId};
use num_bigint::BigInt;
use rand::Rng;

pub type Edge = (VertexId, VertexId);

pub fn edge(a: VertexId, b: VertexId) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn adjacent(g: &PartiteGraph, a: VertexId, b: VertexId) -> bool {
    a.class != b.class && g.adjacent_ids(a, b)
}

/// Every edge of the graph by a direct scan over vertex pairs.
pub fn all_edges(g: &PartiteGraph) -> Vec<Edge> {
    let mut out = Vec::new();
    for a in 0..g.r() {
        for b in (a + 1)..g.r() {
            for x in 0..g.n() {
                for y in 0..g.n() {
                    let (u, v) = (VertexId::new(a, x), VertexId::new(b, y));
                    if adjacent(g, u, v) {
                        out.push((u, v));
                    }
                }
            }
        }
    }
    out
}

/// Transversal cliques by odometer enumeration of all n^r tuples.
pub fn brute_cliques(g: &PartiteGraph) -> Vec<Vec<VertexId>> {
    let (r, n) = (g.r(), g.n());
    let mut out = Vec::new();
    let mut digits = vec![0usize; r];
    'outer: loop {
        let tuple: Vec<VertexId> = digits.iter().enumerate().map(|(c, &o)| VertexId::new(c, o)).collect();
        let clique = (0..r).all(|a| ((a + 1)..r).all(|b| adjacent(g, tuple[a], tuple[b])));
        if clique {
            out.push(tuple);
        }
        for c in (0..r).rev() {
            digits[c] += 1;
            if digits[c] < n {
                continue 'outer;
            }
            digits[c] = 0;
        }
        break;
    }
    out
}

/// Edge effects of `w`, summing clique weights over each clique's pairs.
pub fn brute_effects<S: Scalar>(idx: &CliqueIndex, w: &CliqueWeighting<S>) -> BTreeMap<Edge, S> {
    let mut out: BTreeMap<Edge, S> = BTreeMap::new();
    for id in 0..idx.k_total() {
        let value = w.get(fracdecomp::CliqueId(id));
        if value.is_zero() {
            continue;
        }
        let verts = idx.vertices(fracdecomp::CliqueId(id));
        for a in 0..verts.len() {
            for b in (a + 1)..verts.len() {
                out.entry(edge(verts[a], verts[b]))
                    .or_insert_with(S::zero)
                    .add_assign(value);
            }
        }
    }
    out
}

pub fn effect_at<S: Scalar>(effects: &BTreeMap<Edge, S>, a: VertexId, b: VertexId) -> S {
    effects.get(&edge(a, b)).cloned().unwrap_or_else(S::zero)
}

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A random rational in `[-1, 1]` with denominator at most `den`.
pub fn random_unit<R: Rng>(rng: &mut R, den: i64) -> Rational {
    let d = rng.gen_range(1..=den);
    q(rng.gen_range(-d..=d), d)
}

/// Random values on `v`'s neighbours with every foreign class summing to the
/// same value; all entries lie in `[-1, 1]`.
pub fn random_equal_sums<R: Rng>(g: &PartiteGraph, v: VertexId, rng: &mut R, density: f64) -> Vec<(VertexId, Rational)> {
    let common = if rng.gen_bool(0.5) { Rational::from_i64(0) } else { random_unit(rng, 4) };
    let mut out = Vec::new();
    for c in (0..g.r()).filter(|&c| c != v.class) {
        let nbrs: Vec<VertexId> = (0..g.n()).map(|o| VertexId::new(c, o)).filter(|&u| adjacent(g, v, u)).collect();
        // Pick a balancing vertex first, then random entries that keep it within [-1, 1].
        loop {
            let mut picked = Vec::new();
            let mut partial = Rational::from_i64(0);
            for &u in &nbrs[1..] {
                if rng.gen_bool(density) {
                    let x = random_unit(rng, 6);
                    partial = partial.add(&x);
                    picked.push((u, x));
                }
            }
            let last = common.sub(&partial);
            if last.abs() <= Rational::from_i64(1) {
                if !last.is_zero() {
                    picked.push((nbrs[0], last));
                }
                out.extend(picked);
                break;
            }
        }
    }
    out
}

pub fn vertex_set(items: impl IntoIterator<Item = VertexId>) -> BTreeSet<VertexId> {
    items.into_iter().collect()
}
