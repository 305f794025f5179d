//! Clique weightings, their edge/vertex effects, and correction fields.

use std::fmt::Write as _;

use crate::clique_index::{CliqueId, CliqueIndex};
use crate::error::{Error, Result};
use crate::partite_graph::{PartiteGraph, VertexId};
use crate::scalar::{parse_rational, Rational, Scalar};

/// One value per clique of a frozen [`CliqueIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueWeighting<S> {
    values: Vec<S>,
}

/// Integer-coefficient sparse delta `terms / denominator`, as produced by the
/// gadgets. Kept integral so the exact backend divides once per gadget.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseDelta {
    pub denominator: i64,
    pub terms: Vec<(CliqueId, i64)>,
}

impl SparseDelta {
    pub fn is_zero_sum(&self) -> bool {
        self.terms.iter().map(|&(_, c)| c).sum::<i64>() == 0
    }

    /// The coefficient of `id` as a value (terms may repeat an id).
    pub fn value_of<S: Scalar>(&self, id: CliqueId) -> S {
        let coeff: i64 = self.terms.iter().filter(|(k, _)| *k == id).map(|&(_, c)| c).sum();
        S::ratio(coeff, self.denominator)
    }

    pub fn to_weighting<S: Scalar>(&self, idx: &CliqueIndex) -> CliqueWeighting<S> {
        let mut w = CliqueWeighting::zeros(idx);
        w.add_delta(self, &S::one());
        w
    }
}

impl<S: Scalar> CliqueWeighting<S> {
    pub fn zeros(idx: &CliqueIndex) -> Self {
        CliqueWeighting {
            values: vec![S::zero(); idx.k_total()],
        }
    }

    pub fn from_values(idx: &CliqueIndex, values: Vec<S>) -> Result<Self> {
        if values.len() != idx.k_total() {
            return Err(Error::IndexMismatch(format!(
                "{} values for {} cliques",
                values.len(),
                idx.k_total()
            )));
        }
        Ok(CliqueWeighting { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, id: CliqueId) -> &S {
        &self.values[id.index()]
    }

    pub fn set(&mut self, id: CliqueId, value: S) {
        self.values[id.index()] = value;
    }

    pub fn check_host(&self, idx: &CliqueIndex) -> Result<()> {
        if self.values.len() == idx.k_total() {
            Ok(())
        } else {
            Err(Error::IndexMismatch(format!(
                "weighting has {} entries, index has {} cliques",
                self.values.len(),
                idx.k_total()
            )))
        }
    }

    pub fn sum(&self) -> S {
        let mut total = S::zero();
        for v in &self.values {
            total.add_assign(v);
        }
        total
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sum().is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(S::is_zero)
    }

    /// `self += factor * delta`
    pub fn add_delta(&mut self, delta: &SparseDelta, factor: &S) {
        let unit = factor.div_int(delta.denominator);
        for &(id, c) in &delta.terms {
            self.values[id.index()].add_scaled_int(&unit, c);
        }
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &Self, factor: &S) {
        assert_eq!(self.values.len(), other.values.len(), "weightings over different indices");
        let one = factor == &S::one();
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            if b.is_zero() {
                continue;
            }
            if one {
                a.add_assign(b);
            } else {
                a.add_assign(&b.mul(factor));
            }
        }
    }

    /// Entrywise sum; associative and commutative, used to reduce per-anchor deltas.
    pub fn merge(mut self, other: &Self) -> Self {
        self.add_scaled(other, &S::one());
        self
    }

    pub fn scale(&mut self, factor: &S) {
        for v in &mut self.values {
            if !v.is_zero() {
                *v = v.mul(factor);
            }
        }
    }

    pub fn min(&self) -> Option<&S> {
        self.values.iter().fold(None, |best, v| match best {
            Some(b) if !v.lt(b) => Some(b),
            _ => Some(v),
        })
    }

    pub fn max_abs(&self) -> S {
        let mut best = S::zero();
        for v in &self.values {
            let a = v.abs();
            if best.lt(&a) {
                best = a;
            }
        }
        best
    }

    pub fn support_len(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}

/// Every clique weighted `e(G) / (C(r,2) k)`.
pub fn uniform_init<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex) -> Result<CliqueWeighting<S>> {
    let k = idx.k_total();
    if k == 0 {
        return Err(Error::NoCliques);
    }
    let value = uniform_value::<S>(g, idx);
    Ok(CliqueWeighting {
        values: vec![value; k],
    })
}

fn uniform_value<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex) -> S {
    let r = g.r() as i64;
    let pairs = r * (r - 1) / 2;
    S::from_i64(g.edge_count() as i64).div(&S::from_i64(pairs).mul(&S::from_i64(idx.k_total() as i64)))
}

/// `Σ_{K ∋ e} w[K]` for the edge with endpoints `a`, `b` (global indices).
pub fn edge_effect<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex, w: &CliqueWeighting<S>, a: usize, b: usize) -> Result<S> {
    w.check_host(idx)?;
    let e = g
        .edge_id(a, b)
        .ok_or_else(|| Error::domain(format!("{} {} is not an edge", g.vertex(a), g.vertex(b))))?;
    Ok(edge_effect_by_id(idx, w, e))
}

pub(crate) fn edge_effect_by_id<S: Scalar>(idx: &CliqueIndex, w: &CliqueWeighting<S>, e: usize) -> S {
    let mut total = S::zero();
    for &k in idx.cliques_on_edge(e) {
        total.add_assign(&w.values[k as usize]);
    }
    total
}

/// Edge effects for every edge, indexed by edge id.
pub fn all_edge_effects<S: Scalar>(idx: &CliqueIndex, w: &CliqueWeighting<S>) -> Vec<S> {
    (0..idx.edge_slots()).map(|e| edge_effect_by_id(idx, w, e)).collect()
}

/// `Σ_{K ∋ v} w[K]`
pub fn vertex_effect<S: Scalar>(idx: &CliqueIndex, w: &CliqueWeighting<S>, v: usize) -> S {
    let mut total = S::zero();
    for &k in idx.cliques_on_vertex(v) {
        total.add_assign(&w.values[k as usize]);
    }
    total
}

/// Target adjustments: per edge (by edge id) and per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionField<S> {
    pub per_edge: Vec<S>,
    pub per_vertex: Vec<S>,
}

impl<S: Scalar> CorrectionField<S> {
    pub fn zero(g: &PartiteGraph) -> Self {
        CorrectionField {
            per_edge: vec![S::zero(); g.edge_count()],
            per_vertex: vec![S::zero(); g.vertex_count()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.per_edge.iter().all(S::is_zero)
    }

    pub fn max_abs_edge(&self) -> S {
        let mut best = S::zero();
        for z in &self.per_edge {
            let a = z.abs();
            if best.lt(&a) {
                best = a;
            }
        }
        best
    }

    pub fn scaled(&self, factor: &S) -> Self {
        CorrectionField {
            per_edge: self.per_edge.iter().map(|z| z.mul(factor)).collect(),
            per_vertex: self.per_vertex.iter().map(|z| z.mul(factor)).collect(),
        }
    }

    /// `z_e - effect(e)` for every edge, with vertex totals recomputed.
    pub fn minus_effects(&self, g: &PartiteGraph, effects: &[S]) -> Self {
        let per_edge: Vec<S> = self.per_edge.iter().zip(effects).map(|(z, x)| z.sub(x)).collect();
        let per_vertex = vertex_totals(g, &per_edge);
        CorrectionField { per_edge, per_vertex }
    }

    /// Entries `(neighbour, z_vu)` of the nonzero corrections at `v`, neighbours ascending.
    pub fn at_vertex(&self, g: &PartiteGraph, v: usize) -> Vec<(usize, S)> {
        g.neighbours(v)
            .filter_map(|u| {
                let z = &self.per_edge[g.edge_id(v, u).expect("neighbour edge")];
                (!z.is_zero()).then(|| (u, z.clone()))
            })
            .collect()
    }

    /// Checks both field invariants: every foreign-class sum at v equals
    /// `per_vertex[v]`, and (when `class_sums` is set) every class sums to zero.
    /// Returns a description of the first violation.
    pub fn check_invariants(&self, g: &PartiteGraph, class_sums: bool) -> Option<String> {
        let (r, n) = (g.r(), g.n());
        for v in 0..g.vertex_count() {
            for c in (0..r).filter(|&c| c != v / n) {
                let mut s = S::zero();
                for o in g.row(v, c).ones() {
                    s.add_assign(&self.per_edge[g.edge_id(v, c * n + o).expect("edge")]);
                }
                if !s.approx_eq(&self.per_vertex[v]) {
                    return Some(format!(
                        "vertex {} class {c}: edge sum {} != vertex value {}",
                        g.vertex(v),
                        s.to_text(),
                        self.per_vertex[v].to_text()
                    ));
                }
            }
        }
        if class_sums {
            for c in 0..r {
                let mut s = S::zero();
                for v in c * n..(c + 1) * n {
                    s.add_assign(&self.per_vertex[v]);
                }
                if !s.approx_eq(&S::zero()) {
                    return Some(format!("class {c} sums to {}", s.to_text()));
                }
            }
        }
        None
    }
}

/// Per-vertex value taken through the lowest foreign class.
pub(crate) fn vertex_totals<S: Scalar>(g: &PartiteGraph, per_edge: &[S]) -> Vec<S> {
    let n = g.n();
    (0..g.vertex_count())
        .map(|v| {
            let c = if v / n == 0 { 1 } else { 0 };
            let mut s = S::zero();
            for o in g.row(v, c).ones() {
                s.add_assign(&per_edge[g.edge_id(v, c * n + o).expect("edge")]);
            }
            s
        })
        .collect()
}

/// The field `z_e = effect_x(e) - c` with `c = Σx / e(V_i, V_j)`, so that class
/// sums vanish. For zero-sum `x` any host works; otherwise it must be divisible.
pub fn field_from_weighting<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex, x: &CliqueWeighting<S>) -> Result<CorrectionField<S>> {
    x.check_host(idx)?;
    let total = x.sum();
    let summary = g.summarize();
    let offset = if total.is_zero() {
        S::zero()
    } else {
        if !summary.divisible {
            return Err(Error::Divisibility("non-zero-sum weighting needs a divisible host".into()));
        }
        let between = summary.edges_between[0][1] as i64;
        if between == 0 {
            return Err(Error::NoCliques);
        }
        total.div_int(between)
    };
    let per_edge: Vec<S> = all_edge_effects(idx, x).into_iter().map(|v| v.sub(&offset)).collect();
    let per_vertex = vertex_totals(g, &per_edge);
    Ok(CorrectionField { per_edge, per_vertex })
}

/// Required adjustments of the uniform weighting: `z_e = c_e e(G)/(C(r,2) k) - 1`.
pub fn corrections<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex) -> Result<CorrectionField<S>> {
    let summary = g.summarize();
    if !summary.divisible {
        return Err(Error::Divisibility(divisibility_witness(g)));
    }
    if idx.is_empty() {
        return Err(Error::NoCliques);
    }
    let unit = uniform_value::<S>(g, idx);
    let per_edge: Vec<S> = (0..g.edge_count())
        .map(|e| unit.mul_int(idx.edge_count_of(e) as i64).sub(&S::one()))
        .collect();
    let per_vertex: Vec<S> = (0..g.vertex_count())
        .map(|v| {
            let own = v / g.n();
            let foreign = if own == 0 { 1 } else { 0 };
            let degree = g.row(v, foreign).count_ones(..) as i64;
            unit.mul_int(idx.cliques_on_vertex(v).len() as i64).sub(&S::from_i64(degree))
        })
        .collect();
    Ok(CorrectionField { per_edge, per_vertex })
}

pub(crate) fn divisibility_witness(g: &PartiteGraph) -> String {
    let (r, n) = (g.r(), g.n());
    for v in 0..g.vertex_count() {
        let degrees: Vec<(usize, usize)> = (0..r)
            .filter(|&c| c != v / n)
            .map(|c| (c, g.row(v, c).count_ones(..)))
            .collect();
        if degrees.windows(2).any(|w| w[0].1 != w[1].1) {
            let listed: Vec<String> = degrees.iter().map(|(c, d)| format!("class {c}: {d}")).collect();
            return format!("vertex {} has degrees {}", g.vertex(v), listed.join(", "));
        }
    }
    "degrees are balanced".into()
}

/// One line per nonzero entry: the clique's vertices then its value.
pub fn write_weighting<S: Scalar>(idx: &CliqueIndex, w: &CliqueWeighting<S>) -> String {
    let mut out = String::new();
    for (id, value) in w.values.iter().enumerate() {
        if value.is_zero() {
            continue;
        }
        for v in idx.vertices(CliqueId(id)) {
            let _ = write!(out, "{v} ");
        }
        out.push_str(&value.to_text());
        out.push('\n');
    }
    out
}

/// Parses the weighting file format. Omitted cliques are zero; blank lines
/// and `#` comments are skipped.
pub fn parse_weighting(idx: &CliqueIndex, text: &str) -> Result<CliqueWeighting<Rational>> {
    let mut w = CliqueWeighting::<Rational>::zeros(idx);
    let r = idx.r();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != r + 1 {
            return Err(parse_err(format!("expected {r} vertices and a value, found {} fields", fields.len())));
        }
        let mut tuple = Vec::with_capacity(r);
        for f in &fields[..r] {
            tuple.push(f.parse::<VertexId>().map_err(parse_err)?);
        }
        let value = parse_rational(fields[r]).ok_or_else(|| parse_err(format!("bad value `{}`", fields[r])))?;
        let id = idx
            .lookup_ids(&tuple)
            .ok_or_else(|| Error::IndexMismatch(format!("line {}: not a clique of the host graph", i + 1)))?;
        w.values[id.index()] += value;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partite_graph::generate_divisible;

    type Q = Rational;

    fn q(a: i64, b: i64) -> Q {
        Q::ratio(a, b)
    }

    #[test]
    fn uniform_examples() {
        for n in 1..=4 {
            let g = PartiteGraph::complete(3, n).unwrap();
            let idx = CliqueIndex::enumerate(&g);
            let w = uniform_init::<Q>(&g, &idx).unwrap();
            assert!(w.values().iter().all(|x| *x == q(1, n as i64)));
            assert!(all_edge_effects(&idx, &w).iter().all(|x| *x == q(1, 1)));
        }
        let g = PartiteGraph::complete(3, 2).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let w = uniform_init::<Q>(&g, &idx).unwrap();
        assert_eq!(w.get(CliqueId(0)), &q(1, 2));
        assert!(!w.is_zero_sum());
        assert_eq!(w.sum(), q(4, 1));
    }

    #[test]
    fn uniform_needs_cliques() {
        let g = crate::partite_graph::tests::six_cycle();
        let idx = CliqueIndex::enumerate(&g);
        assert!(matches!(uniform_init::<Q>(&g, &idx), Err(Error::NoCliques)));
    }

    #[test]
    fn edge_effect_matches_brute_force() {
        let k222 = PartiteGraph::complete(3, 2).unwrap();
        let edges: Vec<_> = k222
            .edges()
            .iter()
            .map(|&(a, b)| (k222.vertex(a as usize), k222.vertex(b as usize)))
            .skip(1)
            .collect();
        let g = PartiteGraph::from_edges(3, 2, edges).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let w = uniform_init::<Q>(&g, &idx).unwrap();
        // e(G) = 11, k = 6: unit 11/18.
        assert_eq!(w.get(CliqueId(0)), &q(11, 18));
        for &(a, b) in g.edges() {
            let (a, b) = (a as usize, b as usize);
            let brute = (0..idx.k_total())
                .filter(|&k| idx.clique(k).contains(&(a as u32)) && idx.clique(k).contains(&(b as u32)))
                .count() as i64;
            assert_eq!(edge_effect(&g, &idx, &w, a, b).unwrap(), q(11 * brute, 18));
        }
        assert!(edge_effect(&g, &idx, &w, 0, 1).is_err());
        let zero = CliqueWeighting::<Q>::zeros(&idx);
        assert!(all_edge_effects(&idx, &zero).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn corrections_examples() {
        let g = PartiteGraph::complete(3, 5).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        assert!(corrections::<Q>(&g, &idx).unwrap().is_zero());

        let g = generate_divisible(3, 12, 1, 3).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let field = corrections::<Q>(&g, &idx).unwrap();
        assert_eq!(field.check_invariants(&g, true), None);
        let rebuilt = field_from_weighting(&g, &idx, &uniform_init::<Q>(&g, &idx).unwrap()).unwrap();
        assert_eq!(rebuilt, field);

        let k = Q::from_i64(idx.k_total() as i64);
        let n2 = Q::from_i64(144);
        let report = crate::clique_index::bounds_report(&g, &idx);
        if report.edge_bound.passed() {
            // Triangle inequality through unit·k/n² = e(V_i,V_j)/n².
            let unit = Q::from_i64(g.edge_count() as i64) / (Q::from_i64(3) * &k);
            let between = Q::from_i64(g.edge_count() as i64 / 3);
            let bound = Q::from_i64(9 * 3) * g.delta() * &k / &n2 * &unit + (Q::from_i64(1) - between / &n2);
            assert!(field.max_abs_edge() <= bound);
        }
    }

    #[test]
    fn corrections_reject_unbalanced_hosts() {
        let v = VertexId::new;
        let g = PartiteGraph::from_edges(3, 1, [(v(0, 0), v(1, 0))]).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        assert!(matches!(corrections::<Q>(&g, &idx), Err(Error::Divisibility(_))));
    }

    #[test]
    fn weighting_file_round_trip() {
        let g = generate_divisible(3, 4, 1, 1).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let mut w = CliqueWeighting::<Q>::zeros(&idx);
        w.set(CliqueId(0), q(-3, 7));
        w.set(CliqueId(idx.k_total() - 1), q(5, 2));
        let text = write_weighting(&idx, &w);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_weighting(&idx, &text).unwrap(), w);
        assert!(matches!(parse_weighting(&idx, "0:0 1:0 1/2"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sparse_delta_helpers() {
        let g = PartiteGraph::complete(3, 2).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let delta = SparseDelta {
            denominator: 4,
            terms: vec![(CliqueId(1), 2), (CliqueId(3), -1), (CliqueId(1), -1)],
        };
        assert!(delta.is_zero_sum());
        assert_eq!(delta.value_of::<Q>(CliqueId(1)), q(1, 4));
        let w = delta.to_weighting::<Q>(&idx);
        assert_eq!(w.get(CliqueId(3)), &q(-1, 4));
        assert!(w.is_zero_sum());
    }
}
