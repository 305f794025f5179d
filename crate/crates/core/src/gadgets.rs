//! The two zero-sum weight-moving gadgets and the splitter that expresses a
//! vertex's corrections as a list of gadget moves.
//!
//! Gadget outputs are never built by materialising the averaged helper
//! family: each clique's coefficient is the number of helper cliques that
//! produce it, counted with bitset intersections.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::clique_index::{count_transversal, for_each_transversal, CliqueId, CliqueIndex};
use crate::diagnostics::Check;
use crate::error::{Error, Result};
use crate::partite_graph::{PartiteGraph, VertexId};
use crate::scalar::Scalar;
use crate::weighting::SparseDelta;

/// Moves one unit from `v'u_i` to `vu_i` for every foreign class i at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarGadgetSpec {
    pub v: VertexId,
    pub v_prime: VertexId,
    /// One common neighbour of `v` and `v_prime` per foreign class, in class order.
    pub targets: Vec<VertexId>,
}

/// Adds one unit to `vu1`, `v'u2` and removes one from `vu2`, `v'u1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapGadgetSpec {
    pub v: VertexId,
    pub v_prime: VertexId,
    pub u1: VertexId,
    pub u2: VertexId,
}

impl fmt::Display for StarGadgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "star v={} v'={} targets=", self.v, self.v_prime)?;
        for (i, u) in self.targets.iter().enumerate() {
            write!(f, "{}{u}", if i == 0 { "" } else { "," })?;
        }
        Ok(())
    }
}

impl fmt::Display for SwapGadgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "swap v={} v'={} u1={} u2={}", self.v, self.v_prime, self.u1, self.u2)
    }
}

/// Reusable bitsets for the gadget inner loops.
#[derive(Debug, Clone)]
pub(crate) struct GadgetScratch {
    cands: Vec<FixedBitSet>,
    sub: Vec<FixedBitSet>,
    common: FixedBitSet,
    tuple: Vec<usize>,
    classes: Vec<usize>,
}

impl GadgetScratch {
    pub(crate) fn new(g: &PartiteGraph) -> Self {
        GadgetScratch {
            cands: vec![FixedBitSet::with_capacity(g.n()); g.r()],
            sub: Vec::with_capacity(g.r()),
            common: FixedBitSet::with_capacity(g.n()),
            tuple: vec![0; g.r()],
            classes: Vec::with_capacity(g.r()),
        }
    }
}

fn lookup(idx: &CliqueIndex, tuple: &[usize]) -> Result<usize> {
    idx.slot(tuple)
        .ok_or_else(|| Error::Internal(format!("gadget clique {tuple:?} missing from the index")))
}

/// Receives a gadget as `Σ coefficient·[slot] / helpers`.
pub(crate) trait TermSink {
    /// Called once with |H| before any term.
    fn begin(&mut self, helpers: u64);
    fn add(&mut self, slot: usize, coefficient: i64);
}

struct DeltaSink<'a> {
    idx: &'a CliqueIndex,
    delta: SparseDelta,
}

impl TermSink for DeltaSink<'_> {
    fn begin(&mut self, helpers: u64) {
        self.delta.denominator = helpers as i64;
    }

    fn add(&mut self, slot: usize, coefficient: i64) {
        self.delta.terms.push((CliqueId(self.idx.slot_clique(slot)), coefficient));
    }
}

/// Star gadget on global indices. `targets[c]` is ignored for the class of `v`.
/// Returns |H|.
pub(crate) fn star_terms<T: TermSink>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    v: usize,
    vp: usize,
    targets: &[usize],
    scratch: &mut GadgetScratch,
    sink: &mut T,
) -> Result<u64> {
    let (r, n) = (g.r(), g.n());
    let j = v / n;
    let GadgetScratch {
        cands,
        sub,
        common,
        tuple,
        classes,
    } = scratch;

    for i in (0..r).filter(|&i| i != j) {
        let c = &mut cands[i];
        c.clone_from(g.row(v, i));
        c.intersect_with(g.row(vp, i));
        for other in (0..r).filter(|&o| o != i && o != j) {
            c.intersect_with(g.row(targets[other], i));
        }
        c.set(targets[i] % n, false);
    }
    classes.clear();
    classes.extend((0..r).filter(|&c| c != j));
    sub.clear();
    sub.extend(classes.iter().map(|&c| cands[c].clone()));
    let helpers = count_transversal(g, classes, sub);
    if helpers == 0 {
        return Err(Error::GadgetInfeasible(format!(
            "star gadget at {} / {}",
            g.vertex(v),
            g.vertex(vp)
        )));
    }
    sink.begin(helpers);

    // Single-target cliques {x, u_i} ∪ P: coefficient ±α with
    // α = |C_i ∩ common neighbourhood of P|.
    let weight = (r - 2) as i64;
    for i in (0..r).filter(|&i| i != j) {
        classes.clear();
        classes.extend((0..r).filter(|&c| c != j && c != i));
        sub.clear();
        sub.extend(classes.iter().map(|&c| cands[c].clone()));
        let mut failure = None;
        for_each_transversal(g, classes, sub, &mut |part: &[usize]| {
            if failure.is_some() {
                return;
            }
            let alpha = match part.len() {
                0 => cands[i].count_ones(..),
                1 => cands[i].intersection_count(g.row(part[0], i)),
                _ => {
                    common.clone_from(&cands[i]);
                    for &p in part {
                        common.intersect_with(g.row(p, i));
                    }
                    common.count_ones(..)
                }
            } as i64;
            if alpha == 0 {
                return;
            }
            for &p in part {
                tuple[p / n] = p;
            }
            tuple[i] = targets[i];
            for (x, sign) in [(v, 1), (vp, -1)] {
                tuple[j] = x;
                match lookup(idx, tuple) {
                    Ok(id) => sink.add(id, sign * alpha),
                    Err(e) => failure = Some(e),
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }

    // Target-free cliques {x} ∪ A for A in H.
    classes.clear();
    classes.extend((0..r).filter(|&c| c != j));
    sub.clear();
    sub.extend(classes.iter().map(|&c| cands[c].clone()));
    let mut failure = None;
    for_each_transversal(g, classes, sub, &mut |helper: &[usize]| {
        if failure.is_some() {
            return;
        }
        for &a in helper {
            tuple[a / n] = a;
        }
        for (x, sign) in [(v, -1), (vp, 1)] {
            tuple[j] = x;
            match lookup(idx, tuple) {
                Ok(id) => sink.add(id, sign * weight),
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(helpers)
}

/// Swap gadget on global indices; same calling convention as [`star_terms`].
pub(crate) fn swap_terms<T: TermSink>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    [v, vp, u1, u2]: [usize; 4],
    scratch: &mut GadgetScratch,
    sink: &mut T,
) -> Result<u64> {
    let (r, n) = (g.r(), g.n());
    let (i, j) = (v / n, u1 / n);
    let GadgetScratch {
        cands,
        sub,
        tuple,
        classes,
        ..
    } = scratch;
    classes.clear();
    classes.extend((0..r).filter(|&c| c != i && c != j));
    for &c in classes.iter() {
        let s = &mut cands[c];
        s.clone_from(g.row(v, c));
        s.intersect_with(g.row(vp, c));
        s.intersect_with(g.row(u1, c));
        s.intersect_with(g.row(u2, c));
    }
    sub.clear();
    sub.extend(classes.iter().map(|&c| cands[c].clone()));
    let helpers = count_transversal(g, classes, sub);
    if helpers == 0 {
        return Err(Error::GadgetInfeasible(format!(
            "swap gadget at {} / {} with {} / {}",
            g.vertex(v),
            g.vertex(vp),
            g.vertex(u1),
            g.vertex(u2)
        )));
    }
    sink.begin(helpers);
    let mut failure = None;
    for_each_transversal(g, classes, sub, &mut |helper: &[usize]| {
        if failure.is_some() {
            return;
        }
        for &a in helper {
            tuple[a / n] = a;
        }
        for (x, u, sign) in [(v, u1, 1), (vp, u2, 1), (v, u2, -1), (vp, u1, -1)] {
            tuple[i] = x;
            tuple[j] = u;
            match lookup(idx, tuple) {
                Ok(id) => sink.add(id, sign),
                Err(e) => failure = Some(e),
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(helpers),
    }
}

fn require_vertex(g: &PartiteGraph, v: VertexId) -> Result<usize> {
    if g.contains_vertex(v) {
        Ok(g.global(v))
    } else {
        Err(Error::domain(format!("vertex {v} out of range")))
    }
}

fn require_edge(g: &PartiteGraph, a: usize, b: usize) -> Result<()> {
    if g.adjacent(a, b) {
        Ok(())
    } else {
        Err(Error::domain(format!("{} and {} are not adjacent", g.vertex(a), g.vertex(b))))
    }
}

/// Validates a star spec and returns `(v, v', targets)` with targets indexed by class.
pub(crate) fn resolve_star(g: &PartiteGraph, spec: &StarGadgetSpec) -> Result<(usize, usize, Vec<usize>)> {
    let v = require_vertex(g, spec.v)?;
    let vp = require_vertex(g, spec.v_prime)?;
    let j = spec.v.class;
    if spec.v_prime.class != j || v == vp {
        return Err(Error::domain("star gadget needs two distinct vertices of one class"));
    }
    let mut targets = vec![usize::MAX; g.r()];
    for &u in &spec.targets {
        let gu = require_vertex(g, u)?;
        if u.class == j || targets[u.class] != usize::MAX {
            return Err(Error::domain(format!("target {u} repeats a class or sits in class {j}")));
        }
        require_edge(g, v, gu)?;
        require_edge(g, vp, gu)?;
        targets[u.class] = gu;
    }
    if spec.targets.len() != g.r() - 1 {
        return Err(Error::domain("star gadget needs one target per foreign class"));
    }
    Ok((v, vp, targets))
}

pub(crate) fn resolve_swap(g: &PartiteGraph, spec: &SwapGadgetSpec) -> Result<[usize; 4]> {
    let v = require_vertex(g, spec.v)?;
    let vp = require_vertex(g, spec.v_prime)?;
    let u1 = require_vertex(g, spec.u1)?;
    let u2 = require_vertex(g, spec.u2)?;
    if spec.v.class != spec.v_prime.class || spec.u1.class != spec.u2.class || spec.v.class == spec.u1.class {
        return Err(Error::domain("swap gadget needs v, v' in one class and u1, u2 in another"));
    }
    if v == vp || u1 == u2 {
        return Err(Error::domain("swap gadget vertices must be distinct"));
    }
    for (a, b) in [(v, u1), (v, u2), (vp, u1), (vp, u2)] {
        require_edge(g, a, b)?;
    }
    Ok([v, vp, u1, u2])
}

/// The star gadget as an integer delta over `|H|`.
pub fn star_gadget(g: &PartiteGraph, idx: &CliqueIndex, spec: &StarGadgetSpec) -> Result<SparseDelta> {
    let (v, vp, targets) = resolve_star(g, spec)?;
    let mut sink = DeltaSink {
        idx,
        delta: SparseDelta::default(),
    };
    star_terms(g, idx, v, vp, &targets, &mut GadgetScratch::new(g), &mut sink)?;
    Ok(sink.delta)
}

/// The swap gadget as an integer delta over `|H|`.
pub fn swap_gadget(g: &PartiteGraph, idx: &CliqueIndex, spec: &SwapGadgetSpec) -> Result<SparseDelta> {
    let ids = resolve_swap(g, spec)?;
    let mut sink = DeltaSink {
        idx,
        delta: SparseDelta::default(),
    };
    swap_terms(g, idx, ids, &mut GadgetScratch::new(g), &mut sink)?;
    Ok(sink.delta)
}

fn star_hypothesis(g: &PartiteGraph) -> std::result::Result<(), String> {
    let (r, n) = (g.r(), g.n());
    let rr = 8 * r * r;
    // δ̂ >= (1 - 1/8r²) n  <=>  8r² δ̂ >= (8r² - 1) n
    if n < rr || rr * g.hat_delta() < (rr - 1) * n {
        return Err(format!("needs n >= {rr} and hat_delta >= (1-1/{rr})n"));
    }
    Ok(())
}

fn swap_hypothesis(g: &PartiteGraph) -> std::result::Result<(), String> {
    let (r, n) = (g.r(), g.n());
    let rr = 16 * r;
    if n < rr || rr * g.hat_delta() < (rr - 1) * n {
        return Err(format!("needs n >= {rr} and hat_delta >= (1-1/{rr})n"));
    }
    Ok(())
}

/// Star magnitude ceilings: `2n²/k` on single-target cliques and `2rn/k` on
/// target-free ones.
pub fn star_magnitude(g: &PartiteGraph, idx: &CliqueIndex, spec: &StarGadgetSpec, delta: &SparseDelta) -> Check {
    const NAME: &str = "star gadget magnitude";
    if let Err(reason) = star_hypothesis(g) {
        return Check::not_applicable(NAME, reason);
    }
    let (n, r, k) = (g.n() as f64, g.r() as f64, idx.k_total() as f64);
    let targets: Vec<usize> = spec.targets.iter().map(|&u| g.global(u)).collect();
    let mut check = Check::start(NAME);
    for &(id, c) in &delta.terms {
        let hits = idx.clique(id.index()).iter().filter(|&&x| targets.contains(&(x as usize))).count();
        let ceiling = if hits == 0 { 2.0 * r * n / k } else { 2.0 * n * n / k };
        check.record(c as f64 / delta.denominator as f64, ceiling, || {
            format!("clique {} value {c}/{}", id.index(), delta.denominator)
        });
    }
    check
}

/// Swap magnitude ceiling `2n²/k`; cliques meeting the four gadget vertices
/// in other than two places must carry nothing.
pub fn swap_magnitude(g: &PartiteGraph, idx: &CliqueIndex, spec: &SwapGadgetSpec, delta: &SparseDelta) -> Check {
    const NAME: &str = "swap gadget magnitude";
    if let Err(reason) = swap_hypothesis(g) {
        return Check::not_applicable(NAME, reason);
    }
    let (n, k) = (g.n() as f64, idx.k_total() as f64);
    let four: Vec<usize> = [spec.v, spec.v_prime, spec.u1, spec.u2].iter().map(|&u| g.global(u)).collect();
    let mut check = Check::start(NAME);
    for &(id, c) in &delta.terms {
        let hits = idx.clique(id.index()).iter().filter(|&&x| four.contains(&(x as usize))).count();
        let ceiling = if hits == 2 { 2.0 * n * n / k } else { 0.0 };
        check.record(c as f64 / delta.denominator as f64, ceiling, || {
            format!("clique {} meets {hits} gadget vertices", id.index())
        });
    }
    check
}

/// A set of one neighbour per foreign class moved together by `amount`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarMove<S> {
    pub members: Vec<VertexId>,
    pub amount: S,
}

/// `amount > 0` moved onto `positive` away from `negative` (same class).
#[derive(Debug, Clone, PartialEq)]
pub struct SwapMove<S> {
    pub positive: VertexId,
    pub negative: VertexId,
    pub amount: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionPlan<S> {
    pub star_moves: Vec<StarMove<S>>,
    pub swap_moves: Vec<SwapMove<S>>,
    pub iterations: usize,
}

impl<S> CorrectionPlan<S> {
    pub fn is_empty(&self) -> bool {
        self.star_moves.is_empty() && self.swap_moves.is_empty()
    }

    pub fn len(&self) -> usize {
        self.star_moves.len() + self.swap_moves.len()
    }
}

impl<S: Scalar> CorrectionPlan<S> {
    /// `Σ a·1[u∈A] + Σ b·(1[u=u1] - 1[u=u2])` at `u`.
    pub fn reconstruct(&self, u: VertexId) -> S {
        let mut total = S::zero();
        for m in &self.star_moves {
            if m.members.contains(&u) {
                total.add_assign(&m.amount);
            }
        }
        for m in &self.swap_moves {
            if m.positive == u {
                total.add_assign(&m.amount);
            }
            if m.negative == u {
                total = total.sub(&m.amount);
            }
        }
        total
    }
}

impl<S: Scalar> fmt::Display for CorrectionPlan<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.star_moves {
            let names: Vec<String> = m.members.iter().map(VertexId::to_string).collect();
            writeln!(f, "star-move {} amount={}", names.join(","), m.amount.to_text())?;
        }
        for m in &self.swap_moves {
            writeln!(f, "swap-move +{} -{} amount={}", m.positive, m.negative, m.amount.to_text())?;
        }
        Ok(())
    }
}

/// Greedy splitter: repeatedly zeroes the smallest nonzero entry, against an
/// opposite-sign entry of its class when one exists, otherwise through one
/// same-sign entry of every foreign class.
pub fn split_corrections<S: Scalar>(g: &PartiteGraph, v: VertexId, z: &[(VertexId, S)]) -> Result<CorrectionPlan<S>> {
    let gv = require_vertex(g, v)?;
    let r = g.r();
    let own = v.class;
    // per_class[c] holds (offset, value) sorted by offset.
    let mut per_class: Vec<Vec<(usize, S)>> = vec![Vec::new(); r];
    for (u, value) in z {
        let gu = require_vertex(g, *u)?;
        if !g.adjacent(gv, gu) {
            return Err(Error::domain(format!("{u} is not a neighbour of {v}")));
        }
        per_class[u.class].push((u.offset, value.clone()));
    }
    for entries in &mut per_class {
        entries.sort_by_key(|&(o, _)| o);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("correction vector lists a neighbour twice"));
        }
        for e in entries.iter_mut() {
            if e.1.is_negligible() {
                e.1 = S::zero();
            }
        }
    }
    let sums: Vec<S> = (0..r)
        .filter(|&c| c != own)
        .map(|c| per_class[c].iter().fold(S::zero(), |acc, (_, x)| acc.add(x)))
        .collect();
    if sums.windows(2).any(|w| !w[0].approx_eq(&w[1])) {
        let listed: Vec<String> = sums.iter().map(S::to_text).collect();
        return Err(Error::domain(format!("class sums differ at {v}: {}", listed.join(" "))));
    }

    let nonzero = per_class.iter().flatten().filter(|(_, x)| !x.is_zero()).count();
    let mut plan = CorrectionPlan {
        star_moves: Vec::new(),
        swap_moves: Vec::new(),
        iterations: 0,
    };
    loop {
        let mut best: Option<(usize, usize, S)> = None;
        for c in (0..r).filter(|&c| c != own) {
            for (pos, (_, x)) in per_class[c].iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let a = x.abs();
                // Class-major scan visits vertices lexicographically, so strict
                // comparison keeps the smallest vertex on ties.
                if best.as_ref().map_or(true, |(_, _, b)| a.lt(b)) {
                    best = Some((c, pos, a));
                }
            }
        }
        let Some((class, pos, _)) = best else { break };
        plan.iterations += 1;
        if plan.iterations > nonzero {
            return Err(Error::Internal(format!("splitter at {v} did not terminate")));
        }
        let (offset, x) = per_class[class][pos].clone();
        let sign = x.signum();
        let chosen = VertexId::new(class, offset);
        let partner = per_class[class].iter().position(|(_, y)| y.signum() == -sign);
        if let Some(q) = partner {
            let other = VertexId::new(class, per_class[class][q].0);
            per_class[class][q].1 = settle(per_class[class][q].1.add(&x));
            per_class[class][pos].1 = S::zero();
            let (positive, negative) = if sign > 0 { (chosen, other) } else { (other, chosen) };
            plan.swap_moves.push(SwapMove {
                positive,
                negative,
                amount: x.abs(),
            });
            continue;
        }
        let mut members = Vec::with_capacity(r - 1);
        for c in (0..r).filter(|&c| c != own) {
            if c == class {
                members.push(chosen);
                continue;
            }
            let q = per_class[c]
                .iter()
                .position(|(_, y)| y.signum() == sign)
                .ok_or_else(|| Error::Internal(format!("no same-sign partner in class {c} at {v}")))?;
            members.push(VertexId::new(c, per_class[c][q].0));
            per_class[c][q].1 = settle(per_class[c][q].1.sub(&x));
        }
        per_class[class][pos].1 = S::zero();
        plan.star_moves.push(StarMove { members, amount: x });
    }
    Ok(plan)
}

fn settle<S: Scalar>(x: S) -> S {
    if x.is_negligible() {
        S::zero()
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partite_graph::generate_divisible;
    use crate::scalar::Rational;
    use crate::weighting::{all_edge_effects, CliqueWeighting};

    type Q = Rational;

    fn q(a: i64, b: i64) -> Q {
        Q::ratio(a, b)
    }

    fn vx(c: usize, o: usize) -> VertexId {
        VertexId::new(c, o)
    }

    fn effect_of(g: &PartiteGraph, idx: &CliqueIndex, a: VertexId, b: VertexId, w: &CliqueWeighting<Q>) -> Q {
        all_edge_effects(idx, w)[g.edge_id(g.global(a), g.global(b)).unwrap()].clone()
    }

    #[test]
    fn star_on_complete_graph() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let spec = StarGadgetSpec {
            v: vx(2, 0),
            v_prime: vx(2, 1),
            targets: vec![vx(0, 0), vx(1, 0)],
        };
        let delta = star_gadget(&g, &idx, &spec).unwrap();
        assert_eq!(delta.denominator, 4);
        assert!(delta.is_zero_sum());
        let w = delta.to_weighting::<Q>(&idx);
        assert_eq!(effect_of(&g, &idx, vx(2, 0), vx(0, 0), &w), q(1, 1));
        assert_eq!(effect_of(&g, &idx, vx(2, 1), vx(1, 0), &w), q(-1, 1));
        assert_eq!(effect_of(&g, &idx, vx(0, 0), vx(1, 0), &w), q(0, 1));
        for helper in [1, 2] {
            let id = idx.lookup_ids(&[vx(2, 0), vx(0, 0), vx(1, helper)]).unwrap();
            assert_eq!(w.get(id), &q(1, 2));
        }
    }

    #[test]
    fn star_without_helpers_is_infeasible() {
        // n = 1: no helper can avoid the targets.
        let g = PartiteGraph::complete(3, 2).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let spec = StarGadgetSpec {
            v: vx(0, 0),
            v_prime: vx(0, 1),
            targets: vec![vx(1, 0), vx(2, 0)],
        };
        assert!(star_gadget(&g, &idx, &spec).is_ok());
        let g = PartiteGraph::complete(3, 1).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let bad = StarGadgetSpec {
            v: vx(0, 0),
            v_prime: vx(0, 0),
            targets: vec![vx(1, 0), vx(2, 0)],
        };
        assert!(matches!(star_gadget(&g, &idx, &bad), Err(Error::Domain(_))));
        let v = VertexId::new;
        let edges = [
            (v(0, 0), v(1, 0)),
            (v(0, 0), v(2, 0)),
            (v(0, 1), v(1, 0)),
            (v(0, 1), v(2, 0)),
            (v(1, 0), v(2, 0)),
            (v(1, 1), v(2, 1)),
        ];
        let g = PartiteGraph::from_edges(3, 2, edges).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let spec = StarGadgetSpec {
            v: vx(0, 0),
            v_prime: vx(0, 1),
            targets: vec![vx(1, 0), vx(2, 0)],
        };
        assert!(matches!(star_gadget(&g, &idx, &spec), Err(Error::GadgetInfeasible(_))));
    }

    #[test]
    fn swap_on_complete_graph() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let spec = SwapGadgetSpec {
            v: vx(0, 0),
            v_prime: vx(0, 1),
            u1: vx(1, 0),
            u2: vx(1, 1),
        };
        let delta = swap_gadget(&g, &idx, &spec).unwrap();
        assert_eq!(delta.denominator, 3);
        assert!(delta.is_zero_sum());
        let w = delta.to_weighting::<Q>(&idx);
        for a in 0..3 {
            let id = idx.lookup_ids(&[vx(0, 0), vx(1, 0), vx(2, a)]).unwrap();
            assert_eq!(w.get(id), &q(1, 3));
            assert_eq!(effect_of(&g, &idx, vx(2, a), vx(1, 0), &w), q(0, 1));
        }
        assert_eq!(effect_of(&g, &idx, vx(0, 0), vx(1, 0), &w), q(1, 1));
        assert_eq!(effect_of(&g, &idx, vx(0, 1), vx(1, 0), &w), q(-1, 1));
    }

    #[test]
    fn swap_without_common_neighbour_is_infeasible() {
        let v = VertexId::new;
        let mut edges = vec![(v(0, 0), v(1, 0)), (v(0, 0), v(1, 1)), (v(0, 1), v(1, 0)), (v(0, 1), v(1, 1))];
        edges.push((v(2, 0), v(0, 0)));
        edges.push((v(2, 1), v(1, 1)));
        let g = PartiteGraph::from_edges(3, 2, edges).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let spec = SwapGadgetSpec {
            v: vx(0, 0),
            v_prime: vx(0, 1),
            u1: vx(1, 0),
            u2: vx(1, 1),
        };
        assert!(matches!(swap_gadget(&g, &idx, &spec), Err(Error::GadgetInfeasible(_))));
    }

    #[test]
    fn split_examples() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let v = vx(0, 0);
        let plan = split_corrections::<Q>(&g, v, &[]).unwrap();
        assert!(plan.is_empty());

        let z = [
            (vx(1, 0), q(1, 2)),
            (vx(1, 1), q(-1, 2)),
            (vx(2, 0), q(1, 2)),
            (vx(2, 2), q(-1, 2)),
        ];
        let plan = split_corrections(&g, v, &z).unwrap();
        assert!(plan.star_moves.is_empty());
        assert_eq!(plan.swap_moves.len(), 2);
        assert!(plan.swap_moves.iter().all(|m| m.amount == q(1, 2)));
        assert_eq!(plan.swap_moves[0].positive, vx(1, 0));
        assert_eq!(plan.swap_moves[0].negative, vx(1, 1));
        for (u, x) in &z {
            assert_eq!(&plan.reconstruct(*u), x);
        }

        let plan = split_corrections(&g, v, &[(vx(1, 2), q(1, 1)), (vx(2, 1), q(1, 1))]).unwrap();
        assert!(plan.swap_moves.is_empty());
        assert_eq!(
            plan.star_moves,
            vec![StarMove {
                members: vec![vx(1, 2), vx(2, 1)],
                amount: q(1, 1)
            }]
        );
        assert_eq!(plan.iterations, 1);
    }

    #[test]
    fn split_rejects_unequal_sums() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let err = split_corrections(&g, vx(0, 0), &[(vx(1, 0), q(1, 1))]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn split_float_ignores_noise() {
        let g = PartiteGraph::complete(3, 3).unwrap();
        let z = [(vx(1, 0), 0.3), (vx(1, 1), 1e-14), (vx(2, 0), 0.1), (vx(2, 1), 0.2)];
        let plan = split_corrections(&g, vx(0, 0), &z).unwrap();
        assert_eq!(plan.len(), 2);
        assert!((plan.reconstruct(vx(1, 0)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn magnitude_gates() {
        let g = generate_divisible(3, 12, 1, 1).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let spec = SwapGadgetSpec {
            v: vx(0, 0),
            v_prime: vx(0, 1),
            u1: g.vertex(g.neighbours(0).find(|&u| g.adjacent(1, u)).unwrap()),
            u2: g.vertex(g.neighbours(0).filter(|&u| g.adjacent(1, u)).nth(1).unwrap()),
        };
        let delta = swap_gadget(&g, &idx, &spec).unwrap();
        assert!(!swap_magnitude(&g, &idx, &spec, &delta).applicable());
    }
}
