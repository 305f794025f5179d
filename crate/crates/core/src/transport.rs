//! Weight transport: moving one vertex's corrections into a set, sweeping a
//! whole correction field into a set, concentrating it on a single clique,
//! and the anchor-averaged decomposition built from those pieces.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clique_index::{CliqueId, CliqueIndex};
use crate::diagnostics::Check;
use crate::error::{Error, Result};
use crate::gadgets::{split_corrections, star_terms, swap_terms, GadgetScratch, TermSink};
use crate::oracle::{verify, VerificationRecord};
use crate::partite_graph::{intermediate_class_size, PartiteGraph, VertexId};
use crate::scalar::{Backend, Scalar};
use crate::weighting::{all_edge_effects, corrections, uniform_init, vertex_totals, CliqueWeighting, CorrectionField};

/// Normaliser applied to the corrections left inside the intermediate set.
const INNER_NORMALISER: i64 = 25;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransportOptions {
    /// Collect a per-stage text log.
    pub trace: bool,
    /// Evaluate the magnitude ceilings (only where their hypotheses hold).
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport<S> {
    /// Corrections not realised by the stage, by edge id; zero entries omitted.
    pub residual_edges: Vec<(usize, S)>,
    pub diagnostics: Vec<Check>,
    pub trace: Vec<String>,
    pub gadgets: usize,
}

impl<S> Default for TransportReport<S> {
    fn default() -> Self {
        TransportReport {
            residual_edges: Vec::new(),
            diagnostics: Vec::new(),
            trace: Vec::new(),
            gadgets: 0,
        }
    }
}

impl<S> TransportReport<S> {
    fn log(&mut self, opts: TransportOptions, line: impl FnOnce() -> String) {
        if opts.trace {
            self.trace.push(line());
        }
    }

    fn absorb<T>(&mut self, other: TransportReport<T>) {
        self.diagnostics.extend(other.diagnostics);
        self.trace.extend(other.trace);
        self.gadgets += other.gadgets;
    }
}

/// Dense accumulator over the index's slots.
struct Accumulator<S> {
    slots: Vec<S>,
}

impl<S: Scalar> Accumulator<S> {
    fn new(idx: &CliqueIndex) -> Self {
        Accumulator {
            slots: vec![S::zero(); idx.slot_count()],
        }
    }

    fn snapshot(&self, idx: &CliqueIndex) -> CliqueWeighting<S> {
        let values = idx.clique_slots().into_iter().map(|s| self.slots[s].clone()).collect();
        CliqueWeighting::from_values(idx, values).expect("one value per clique")
    }
}

struct ScaledSink<'a, S> {
    slots: &'a mut [S],
    share: S,
    unit: S,
}

impl<S: Scalar> TermSink for ScaledSink<'_, S> {
    fn begin(&mut self, helpers: u64) {
        self.unit = self.share.div_int(helpers as i64);
    }

    #[inline]
    fn add(&mut self, slot: usize, coefficient: i64) {
        self.slots[slot].add_scaled_int(&self.unit, coefficient);
    }
}

struct Mover<'a> {
    g: &'a PartiteGraph,
    idx: &'a CliqueIndex,
    scratch: GadgetScratch,
    eligible: FixedBitSet,
    targets: Vec<usize>,
}

impl<'a> Mover<'a> {
    fn new(g: &'a PartiteGraph, idx: &'a CliqueIndex) -> Self {
        Mover {
            g,
            idx,
            scratch: GadgetScratch::new(g),
            eligible: FixedBitSet::with_capacity(g.n()),
            targets: vec![usize::MAX; g.r()],
        }
    }

    /// Adds `scale` times the move of `w`'s corrections into `target` (a mask
    /// of w's class) to `acc`.
    fn run<S: Scalar>(
        &mut self,
        w: usize,
        entries: &[(VertexId, S)],
        target: &FixedBitSet,
        scale: &S,
        acc: &mut Accumulator<S>,
        report: &mut TransportReport<S>,
        opts: TransportOptions,
    ) -> Result<()> {
        let g = self.g;
        let (n, j) = (g.n(), w / g.n());
        let wv = g.vertex(w);
        let plan = split_corrections(g, wv, entries)?;
        report.log(opts, || format!("plan at {wv}: {} moves", plan.len()));

        for m in &plan.star_moves {
            self.eligible.clone_from(target);
            self.targets.fill(usize::MAX);
            for u in &m.members {
                let gu = g.global(*u);
                self.eligible.intersect_with(g.row(gu, j));
                self.targets[u.class] = gu;
            }
            let count = self.eligible.count_ones(..);
            if count == 0 {
                let names: Vec<String> = m.members.iter().map(VertexId::to_string).collect();
                return Err(Error::EmptyIntersection(format!("star move of {wv} through {}", names.join(","))));
            }
            let mut sink = ScaledSink {
                slots: &mut acc.slots,
                share: scale.mul(&m.amount).div_int(count as i64),
                unit: S::zero(),
            };
            for o in self.eligible.ones() {
                let vp = j * n + o;
                let helpers = star_terms(g, self.idx, w, vp, &self.targets, &mut self.scratch, &mut sink)?;
                report.gadgets += 1;
                if opts.trace {
                    let names: Vec<String> = m.members.iter().map(VertexId::to_string).collect();
                    report.trace.push(format!(
                        "  star v={wv} v'={} targets={} helpers={helpers} weight={}/{count}",
                        g.vertex(vp),
                        names.join(","),
                        m.amount.to_text()
                    ));
                }
            }
        }

        for m in &plan.swap_moves {
            let (u1, u2) = (g.global(m.positive), g.global(m.negative));
            self.eligible.clone_from(target);
            self.eligible.intersect_with(g.row(u1, j));
            self.eligible.intersect_with(g.row(u2, j));
            let count = self.eligible.count_ones(..);
            if count == 0 {
                return Err(Error::EmptyIntersection(format!(
                    "swap move of {wv} between {} and {}",
                    m.positive, m.negative
                )));
            }
            let mut sink = ScaledSink {
                slots: &mut acc.slots,
                share: scale.mul(&m.amount).div_int(count as i64),
                unit: S::zero(),
            };
            for o in self.eligible.ones() {
                let vp = j * n + o;
                let helpers = swap_terms(g, self.idx, [w, vp, u1, u2], &mut self.scratch, &mut sink)?;
                report.gadgets += 1;
                if opts.trace {
                    report.trace.push(format!(
                        "  swap v={wv} v'={} u1={} u2={} helpers={helpers} weight={}/{count}",
                        g.vertex(vp),
                        m.positive,
                        m.negative,
                        m.amount.to_text()
                    ));
                }
            }
        }
        Ok(())
    }
}

fn require_rich(g: &PartiteGraph, class: usize, mask: &FixedBitSet) -> Result<()> {
    match g.check_neighbour_rich(class, mask) {
        Some(true) => Ok(()),
        _ => Err(Error::NotNeighbourRich(class)),
    }
}

fn bounded_by_one<S: Scalar>(values: &[S]) -> bool {
    values.iter().all(|z| z.abs().approx_le(&S::one()))
}

fn entries_at<S: Scalar>(g: &PartiteGraph, per_edge: &[S], w: usize, factor: Option<&S>) -> Vec<(VertexId, S)> {
    g.neighbours(w)
        .filter_map(|u| {
            let z = &per_edge[g.edge_id(w, u).expect("neighbour edge")];
            if z.is_negligible() {
                return None;
            }
            Some((g.vertex(u), factor.map_or_else(|| z.clone(), |f| z.mul(f))))
        })
        .collect()
}

/// Realises the corrections `z` on the edges at `v` using partners from `set`
/// (a neighbour-rich subset of v's class not containing v). The returned
/// delta is zero-sum; its edge effects are exactly `z` on the edges at `v`,
/// zero on edges that avoid `set ∪ {v}` or avoid `N(v)`, and at most
/// `2|z_vw|/|set|` in absolute value on edges from `set` to `w ∈ N(v)`.
pub fn move_vertex_into_set<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    v: VertexId,
    z: &[(VertexId, S)],
    set: &[VertexId],
    opts: TransportOptions,
) -> Result<(CliqueWeighting<S>, TransportReport<S>)> {
    if !g.contains_vertex(v) {
        return Err(Error::domain(format!("vertex {v} out of range")));
    }
    let j = v.class;
    let mask = g.class_mask(j, set)?;
    if mask.contains(v.offset) {
        return Err(Error::domain(format!("{v} belongs to the target set")));
    }
    if !z.iter().all(|(_, x)| x.abs().approx_le(&S::one())) {
        return Err(Error::domain("corrections must lie in [-1, 1]"));
    }
    require_rich(g, j, &mask)?;

    let gv = g.global(v);
    let mut report = TransportReport::default();
    let mut acc = Accumulator::new(idx);
    Mover::new(g, idx).run(gv, z, &mask, &S::one(), &mut acc, &mut report, opts)?;
    let psi = acc.snapshot(idx);

    let mut target = vec![S::zero(); g.vertex_count()];
    for (u, x) in z {
        target[g.global(*u)] = x.clone();
    }
    let effects = all_edge_effects(idx, &psi);
    let size = S::from_i64(mask.count_ones(..) as i64);
    let in_set = |x: usize| x / g.n() == j && mask.contains(x % g.n());
    for (e, effect) in effects.iter().enumerate() {
        let (a, b) = g.edge_endpoints(e);
        let describe = || format!("edge {} {}", g.vertex(a), g.vertex(b));
        let (near_v, other) = if a == gv {
            (true, b)
        } else if b == gv {
            (true, a)
        } else {
            (false, usize::MAX)
        };
        if near_v {
            if !effect.approx_eq(&target[other]) {
                return Err(Error::Internal(format!("{}: effect {} misses its target", describe(), effect.to_text())));
            }
            continue;
        }
        let (a_in, b_in) = (in_set(a), in_set(b));
        let (a_nb, b_nb) = (g.adjacent(gv, a), g.adjacent(gv, b));
        if (!a_in && !b_in) || (!a_nb && !b_nb) {
            if !effect.approx_eq(&S::zero()) {
                return Err(Error::Internal(format!("{}: effect {} should vanish", describe(), effect.to_text())));
            }
            continue;
        }
        let w = if a_in && b_nb { b } else { a };
        let bound = target[w].abs().mul_int(2).div(&size);
        if !effect.abs().approx_le(&bound) {
            return Err(Error::Internal(format!(
                "{}: effect {} exceeds {}",
                describe(),
                effect.to_text(),
                bound.to_text()
            )));
        }
    }
    if opts.diagnostics {
        report.diagnostics.push(move_magnitude(g, idx, gv, &target, &mask, &psi));
    }
    Ok((psi, report))
}

fn hypothesis(g: &PartiteGraph, factor: usize) -> std::result::Result<(), String> {
    let (r, n) = (g.r(), g.n());
    let rr = factor * r * r;
    if n < rr || rr * g.hat_delta() < (rr - 1) * n {
        return Err(format!("needs n >= {rr} and hat_delta >= (1-1/{rr})n"));
    }
    Ok(())
}

fn move_magnitude<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    v: usize,
    target: &[S],
    mask: &FixedBitSet,
    psi: &CliqueWeighting<S>,
) -> Check {
    const NAME: &str = "move magnitude";
    if let Err(reason) = hypothesis(g, 8) {
        return Check::not_applicable(NAME, reason);
    }
    let (n, k) = (g.n() as f64, idx.k_total() as f64);
    let j = v / g.n();
    let size = mask.count_ones(..) as f64;
    let abs: Vec<f64> = target.iter().map(|x| x.to_f64().abs()).collect();
    let total: f64 = abs.iter().sum();
    let mut check = Check::start(NAME);
    for (id, value) in psi.values().iter().enumerate() {
        if value.is_zero() {
            continue;
        }
        let clique = idx.clique(id);
        let near: f64 = clique.iter().map(|&x| abs[x as usize]).sum();
        let c = n * near + 2.0 * total;
        let has_v = clique.contains(&(v as u32));
        let meets_set = clique.iter().any(|&x| x as usize / g.n() == j && mask.contains(x as usize % g.n()));
        let ceiling = if has_v {
            2.0 * n * c / k
        } else if meets_set {
            4.0 * n * c / (size * k)
        } else {
            0.0
        };
        check.record(value.to_f64(), ceiling, || format!("clique {id} value {}", value.to_text()));
    }
    check
}

fn class_masks(g: &PartiteGraph, set: &[VertexId]) -> Result<Vec<FixedBitSet>> {
    let mut masks = vec![FixedBitSet::with_capacity(g.n()); g.r()];
    for v in set {
        if !g.contains_vertex(*v) {
            return Err(Error::domain(format!("vertex {v} out of range")));
        }
        masks[v.class].insert(v.offset);
    }
    Ok(masks)
}

/// Realises the field on every edge with an endpoint outside `set`, leaving
/// the remainder on edges inside `set`. Each class must meet `set` in the
/// same number of vertices, each forming a neighbour-rich set.
pub fn sweep_into_set<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    field: &CorrectionField<S>,
    set: &[VertexId],
    opts: TransportOptions,
) -> Result<(CliqueWeighting<S>, TransportReport<S>)> {
    let masks = class_masks(g, set)?;
    let mut report = TransportReport::default();
    let psi = sweep_core(g, idx, field, &masks, opts, &mut report, "sweep")?;
    Ok((psi, report))
}

fn sweep_core<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    field: &CorrectionField<S>,
    masks: &[FixedBitSet],
    opts: TransportOptions,
    report: &mut TransportReport<S>,
    stage: &str,
) -> Result<CliqueWeighting<S>> {
    let (r, n) = (g.r(), g.n());
    if field.per_edge.len() != g.edge_count() {
        return Err(Error::domain("correction field does not match the graph"));
    }
    let per_class = masks[0].count_ones(..);
    if per_class == 0 || masks.iter().any(|m| m.count_ones(..) != per_class) {
        return Err(Error::domain("target set must meet every class in the same positive number of vertices"));
    }
    if !bounded_by_one(&field.per_edge) {
        return Err(Error::domain("corrections must lie in [-1, 1]"));
    }
    for (j, mask) in masks.iter().enumerate() {
        require_rich(g, j, mask)?;
    }
    let size = per_class * r;
    let inside = |x: usize| masks[x / n].contains(x % n);
    let outside: Vec<usize> = (0..g.vertex_count()).filter(|&x| !inside(x)).collect();

    if field.is_zero() {
        report.log(opts, || format!("{stage}: zero field"));
        return Ok(CliqueWeighting::zeros(idx));
    }

    let mut mover = Mover::new(g, idx);
    let mut acc = Accumulator::new(idx);
    let half = S::ratio(1, 2);
    let before = report.gadgets;
    for &w in &outside {
        let entries = entries_at(g, &field.per_edge, w, None);
        if entries.is_empty() {
            continue;
        }
        mover
            .run(w, &entries, &masks[w / n], &half, &mut acc, report, opts)
            .map_err(|e| e.in_stage(format!("{stage} first round")))?;
    }
    let made = report.gadgets - before;
    report.log(opts, || format!("{stage} first round: {} outside vertices, {made} gadgets", outside.len()));

    let first = acc.snapshot(idx);
    let effects = all_edge_effects(idx, &first);
    let mut remainder: Vec<S> = field.per_edge.iter().zip(&effects).map(|(z, x)| z.sub(x)).collect();
    for (e, z) in remainder.iter_mut().enumerate() {
        let (a, b) = g.edge_endpoints(e);
        if !inside(a) && !inside(b) {
            if !z.approx_eq(&S::zero()) {
                return Err(Error::Internal(format!(
                    "{stage}: first round left {} on edge {} {} outside the set",
                    z.to_text(),
                    g.vertex(a),
                    g.vertex(b)
                )));
            }
            *z = S::zero();
        }
    }

    let rho = S::ratio(size as i64, (3 * n * r) as i64);
    let rescaled_max = remainder.iter().fold(S::zero(), |m, z| {
        let a = z.abs();
        if m.lt(&a) {
            a
        } else {
            m
        }
    });
    if !rescaled_max.mul(&rho).approx_le(&S::one()) {
        return Err(Error::Internal(format!(
            "{stage}: rescaled second-round corrections reach {}",
            rescaled_max.mul(&rho).to_text()
        )));
    }
    report.log(opts, || {
        format!(
            "{stage} rescale rho={} max|z'|={}",
            rho.to_text(),
            rescaled_max.to_text()
        )
    });
    let unscale = S::one().div(&rho);
    let before = report.gadgets;
    for &w in &outside {
        let entries = entries_at(g, &remainder, w, Some(&rho));
        if entries.is_empty() {
            continue;
        }
        mover
            .run(w, &entries, &masks[w / n], &unscale, &mut acc, report, opts)
            .map_err(|e| e.in_stage(format!("{stage} second round")))?;
    }
    let made = report.gadgets - before;
    report.log(opts, || format!("{stage} second round: {made} gadgets"));

    let psi = acc.snapshot(idx);
    let effects = all_edge_effects(idx, &psi);
    report.residual_edges.clear();
    let mut worst_inside = S::zero();
    for (e, (z, x)) in field.per_edge.iter().zip(&effects).enumerate() {
        let residue = z.sub(x);
        let (a, b) = g.edge_endpoints(e);
        if inside(a) && inside(b) {
            if !residue.is_zero() {
                if worst_inside.lt(&residue.abs()) {
                    worst_inside = residue.abs();
                }
                report.residual_edges.push((e, residue));
            }
        } else if !residue.approx_eq(&S::zero()) {
            return Err(Error::Internal(format!(
                "{stage}: edge {} {} keeps residue {}",
                g.vertex(a),
                g.vertex(b),
                residue.to_text()
            )));
        }
    }
    let left = report.residual_edges.len();
    report.log(opts, || format!("{stage} residual: {left} edges inside the set, max |z''|={}", worst_inside.to_text()));

    if opts.diagnostics {
        report.diagnostics.push(inside_effect_check(g, &effects, &inside, size, stage));
        report.diagnostics.push(sweep_magnitude(g, idx, &psi, masks, size, stage));
    }
    Ok(psi)
}

fn inside_effect_check<S: Scalar>(
    g: &PartiteGraph,
    effects: &[S],
    inside: &dyn Fn(usize) -> bool,
    size: usize,
    stage: &str,
) -> Check {
    let name = format!("{stage} inside-set effect");
    if let Err(reason) = hypothesis(g, 8) {
        return Check::not_applicable(name, reason);
    }
    let (n, r, v) = (g.n() as f64, g.r() as f64, size as f64);
    let ceiling = 12.0 * n * n * r * r / (v * v);
    let mut check = Check::start(name);
    for (e, x) in effects.iter().enumerate() {
        let (a, b) = g.edge_endpoints(e);
        if inside(a) && inside(b) {
            check.record(x.to_f64(), ceiling, || format!("edge {} {}", g.vertex(a), g.vertex(b)));
        }
    }
    check
}

fn sweep_magnitude<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    psi: &CliqueWeighting<S>,
    masks: &[FixedBitSet],
    size: usize,
    stage: &str,
) -> Check {
    let name = format!("{stage} magnitude");
    if let Err(reason) = hypothesis(g, 8) {
        return Check::not_applicable(name, reason);
    }
    let (n, r, k, v) = (g.n() as f64, g.r() as f64, idx.k_total() as f64, size as f64);
    let wide = 2 * size >= g.n() * g.r();
    if !wide && size > g.n() {
        return Check::not_applicable(name, "set size strictly between n and nr/2");
    }
    let mut check = Check::start(name);
    for (id, value) in psi.values().iter().enumerate() {
        let ceiling = if wide {
            135.0 * n * n * r * r / k
        } else {
            let meet = idx
                .clique(id)
                .iter()
                .filter(|&&x| masks[x as usize / g.n()].contains(x as usize % g.n()))
                .count() as f64;
            match meet as usize {
                0 => 15.0 * n * n * r * r / k,
                1 => 51.0 * n * n * n * r * r / (k * v),
                _ => 45.0 * n.powi(4) * r * r * meet * meet / (k * v * v),
            }
        };
        check.record(value.to_f64(), ceiling, || format!("clique {id} value {}", value.to_text()));
    }
    check
}

/// The intermediate set around an anchor: per class, the anchor vertex plus
/// the smallest other vertices adjacent to every anchor vertex of the other
/// classes. The per-class size is `floor(n(1 - 1/8r))`, raised to `r + 1`
/// when that falls short and capped by the smallest pool. Returns one sorted
/// offset list per class.
pub fn intermediate_set(g: &PartiteGraph, idx: &CliqueIndex, anchor: CliqueId) -> Result<Vec<Vec<usize>>> {
    let (r, n) = (g.r(), g.n());
    let corners: Vec<usize> = idx.clique(anchor.index()).iter().map(|&x| x as usize).collect();
    let mut pools = Vec::with_capacity(r);
    for i in 0..r {
        let mut pool = FixedBitSet::with_capacity(n);
        pool.insert_range(..);
        for (c, &corner) in corners.iter().enumerate() {
            if c != i {
                pool.intersect_with(g.row(corner, i));
            }
        }
        pools.push(pool);
    }
    let smallest = pools.iter().map(|p| p.count_ones(..)).min().unwrap_or(0);
    let size = intermediate_class_size(n, r).max(r + 1).min(smallest);
    if size < r + 1 {
        let class = (0..r).min_by_key(|&i| pools[i].count_ones(..)).unwrap_or(0);
        return Err(Error::IntermediateSetTooSmall {
            class,
            available: smallest,
            required: r + 1,
        });
    }
    Ok(pools
        .iter()
        .enumerate()
        .map(|(i, pool)| {
            let own = corners[i] % n;
            let mut chosen = vec![own];
            chosen.extend(pool.ones().filter(|&o| o != own).take(size - 1));
            chosen.sort_unstable();
            chosen
        })
        .collect())
}

/// A delta whose edge effects equal the field on every edge, built by
/// sweeping the field into an intermediate set around `anchor` and then into
/// the anchor itself. The field needs zero class sums.
pub fn concentrate_on_clique<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    field: &CorrectionField<S>,
    anchor: CliqueId,
    opts: TransportOptions,
) -> Result<(CliqueWeighting<S>, TransportReport<S>)> {
    let mut report = TransportReport::default();
    let phi = concentrate_core(g, idx, field, anchor, opts, &mut report)?;
    Ok((phi, report))
}

fn concentrate_core<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    field: &CorrectionField<S>,
    anchor: CliqueId,
    opts: TransportOptions,
    report: &mut TransportReport<S>,
) -> Result<CliqueWeighting<S>> {
    if anchor.index() >= idx.k_total() {
        return Err(Error::domain(format!("anchor clique {} does not exist", anchor.index())));
    }
    if field.per_edge.len() != g.edge_count() {
        return Err(Error::domain("correction field does not match the graph"));
    }
    if field.is_zero() {
        return Ok(CliqueWeighting::zeros(idx));
    }
    let (r, n) = (g.r(), g.n());

    let peak = field.max_abs_edge();
    let scale = if peak.lt(&S::one()) || peak.approx_eq(&S::one()) {
        S::one()
    } else {
        peak.clone()
    };
    let normalised = if scale == S::one() {
        field.clone()
    } else {
        report.log(opts, || format!("field normalised by {}", scale.to_text()));
        field.scaled(&S::one().div(&scale))
    };

    let keep = intermediate_set(g, idx, anchor)?;
    let masks: Vec<FixedBitSet> = keep
        .iter()
        .map(|offs| {
            let mut m = FixedBitSet::with_capacity(n);
            offs.iter().for_each(|&o| m.insert(o));
            m
        })
        .collect();
    report.log(opts, || format!("anchor {}: intermediate set of {} per class", anchor.index(), keep[0].len()));
    let outer = sweep_core(g, idx, &normalised, &masks, opts, report, "outer sweep")?;

    let effects = all_edge_effects(idx, &outer);
    let remainder: Vec<S> = normalised.per_edge.iter().zip(&effects).map(|(z, x)| z.sub(x)).collect();

    let (sub, to_old) = g.induced(&keep)?;
    let sub_idx = CliqueIndex::enumerate(&sub);
    let lift: Vec<usize> = (0..sub_idx.k_total())
        .map(|id| {
            let tuple: Vec<usize> = sub_idx.clique(id).iter().map(|&x| to_old[x as usize]).collect();
            idx.lookup(&tuple)
                .ok_or_else(|| Error::Internal("subgraph clique missing from the host index".into()))
        })
        .collect::<Result<_>>()?;

    let sub_edges: Vec<S> = (0..sub.edge_count())
        .map(|e| {
            let (a, b) = sub.edge_endpoints(e);
            remainder[g.edge_id(to_old[a], to_old[b]).expect("subgraph edge")].clone()
        })
        .collect();
    let inner_peak = sub_edges.iter().fold(S::zero(), |m, z| {
        let a = z.abs();
        if m.lt(&a) {
            a
        } else {
            m
        }
    });
    let mut divisor = S::from_i64(INNER_NORMALISER);
    if divisor.lt(&inner_peak) {
        report.log(opts, || {
            format!(
                "inner corrections reach {}, above {INNER_NORMALISER}; normalising by the peak",
                inner_peak.to_text()
            )
        });
        divisor = inner_peak;
    }
    let inv = S::one().div(&divisor);
    let sub_per_edge: Vec<S> = sub_edges.iter().map(|z| z.mul(&inv)).collect();
    let sub_field = CorrectionField {
        per_vertex: vertex_totals(&sub, &sub_per_edge),
        per_edge: sub_per_edge,
    };

    let sub_n = sub.n();
    let corners: Vec<usize> = idx.clique(anchor.index()).iter().map(|&x| x as usize).collect();
    let corner_masks: Vec<FixedBitSet> = corners
        .iter()
        .enumerate()
        .map(|(c, &x)| {
            let pos = keep[c].binary_search(&(x % n)).expect("anchor lies in the intermediate set");
            let mut m = FixedBitSet::with_capacity(sub_n);
            m.insert(pos);
            m
        })
        .collect();
    let inner = sweep_core(&sub, &sub_idx, &sub_field, &corner_masks, opts, report, "inner sweep")?;

    let mut phi = outer;
    for (id, value) in inner.values().iter().enumerate() {
        if !value.is_zero() {
            let slot = lift[id];
            let mut entry = phi.get(CliqueId(slot)).clone();
            entry.add_assign(&value.mul(&divisor));
            phi.set(CliqueId(slot), entry);
        }
    }

    if opts.diagnostics {
        report.diagnostics.push(anchor_magnitude(g, idx, &phi, &corners));
    }

    let effects = all_edge_effects(idx, &phi);
    let mut worst = S::zero();
    for (z, x) in normalised.per_edge.iter().zip(&effects) {
        let gap = z.sub(x).abs();
        if worst.lt(&gap) {
            worst = gap;
        }
    }
    report.log(opts, || format!("anchor {}: max |effect - target| = {}", anchor.index(), worst.to_text()));
    if !worst.approx_eq(&S::zero()) {
        return Err(Error::Internal(format!(
            "anchor {} leaves residue {} after both sweeps",
            anchor.index(),
            worst.to_text()
        )));
    }
    if scale != S::one() {
        phi.scale(&scale);
    }
    let _ = r;
    Ok(phi)
}

fn anchor_magnitude<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex, phi: &CliqueWeighting<S>, corners: &[usize]) -> Check {
    const NAME: &str = "anchor magnitude";
    if let Err(reason) = hypothesis(g, 16) {
        return Check::not_applicable(NAME, reason);
    }
    let (n, r, k) = (g.n() as f64, g.r() as f64, idx.k_total() as f64);
    let mut check = Check::start(NAME);
    for (id, value) in phi.values().iter().enumerate() {
        let meet = idx.clique(id).iter().filter(|&&x| corners.contains(&(x as usize))).count() as f64;
        let ceiling = match meet as usize {
            0 => 1e3 * n * n * r * r / k,
            1 => 1e4 * n.powi(3) * r / k,
            _ => 1e4 * n.powi(4) * meet * meet / (4.0 * k),
        };
        check.record(value.to_f64(), ceiling, || format!("clique {id} value {}", value.to_text()));
    }
    check
}

/// Which anchor cliques the decomposition averages over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorMode {
    Single(CliqueId),
    Sample { count: usize, seed: u64 },
    All,
}

impl Default for AnchorMode {
    fn default() -> Self {
        AnchorMode::Single(CliqueId(0))
    }
}

impl std::fmt::Display for AnchorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnchorMode::Single(id) => write!(f, "single {}", id.index()),
            AnchorMode::Sample { count, seed } => write!(f, "sample {count} seed {seed}"),
            AnchorMode::All => write!(f, "all"),
        }
    }
}

impl AnchorMode {
    pub fn resolve(&self, idx: &CliqueIndex) -> Result<Vec<CliqueId>> {
        let k = idx.k_total();
        match *self {
            AnchorMode::Single(id) if id.index() < k => Ok(vec![id]),
            AnchorMode::Single(id) => Err(Error::domain(format!("anchor clique {} does not exist (k = {k})", id.index()))),
            AnchorMode::Sample { count, seed } => {
                if count == 0 || count > k {
                    return Err(Error::domain(format!("cannot sample {count} anchors from {k} cliques")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut ids: Vec<usize> = rand::seq::index::sample(&mut rng, k, count).into_vec();
                ids.sort_unstable();
                Ok(ids.into_iter().map(CliqueId).collect())
            }
            AnchorMode::All => Ok((0..k).map(CliqueId).collect()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub anchors: AnchorMode,
    pub transport: TransportOptions,
}

/// Stable, line-oriented summary of a decomposition run.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub r: usize,
    pub n: usize,
    pub edges: usize,
    pub cliques: usize,
    pub backend: Backend,
    pub anchor_mode: String,
    pub anchors: usize,
    pub max_edge_deviation: String,
    pub edges_off_target: usize,
    pub min_weight: String,
    pub negative_weights: usize,
    pub decomposition: bool,
}

impl Certificate {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fracdecomp-certificate 1");
        let _ = writeln!(out, "r {}", self.r);
        let _ = writeln!(out, "n {}", self.n);
        let _ = writeln!(out, "edges {}", self.edges);
        let _ = writeln!(out, "cliques {}", self.cliques);
        let _ = writeln!(out, "backend {}", self.backend.name());
        let _ = writeln!(out, "anchor-mode {}", self.anchor_mode);
        let _ = writeln!(out, "anchors {}", self.anchors);
        let _ = writeln!(out, "max-edge-deviation {}", self.max_edge_deviation);
        let _ = writeln!(out, "edges-off-target {}", self.edges_off_target);
        let _ = writeln!(out, "min-weight {}", self.min_weight);
        let _ = writeln!(out, "negative-weights {}", self.negative_weights);
        let verdict = if self.decomposition {
            "fractional-decomposition"
        } else if self.edges_off_target == 0 {
            "edge-sums-exact-negative-weights"
        } else {
            "not-a-decomposition"
        };
        let _ = writeln!(out, "verdict {verdict}");
        out
    }

    /// All edge effects equal one (within the backend's tolerance).
    pub fn edge_sums_exact(&self) -> bool {
        self.edges_off_target == 0
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition<S> {
    pub weighting: CliqueWeighting<S>,
    pub certificate: Certificate,
    pub record: VerificationRecord<S>,
    pub anchors: Vec<CliqueId>,
    pub diagnostics: Vec<Check>,
    pub trace: Vec<String>,
    pub gadgets: usize,
    pub timings: Vec<(&'static str, Duration)>,
}

/// Uniform weighting minus the anchor-averaged transport of the corrections.
pub fn decompose<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex, opts: &DecomposeOptions) -> Result<Decomposition<S>> {
    let summary = g.summarize();
    if !summary.divisible {
        return Err(Error::Divisibility(crate::weighting::divisibility_witness(g)));
    }
    let mut timings = Vec::new();
    let mut report = TransportReport::<S>::default();
    let (weighting, anchors) = if g.edge_count() == 0 {
        (CliqueWeighting::zeros(idx), Vec::new())
    } else {
        let clock = Instant::now();
        let uniform = uniform_init::<S>(g, idx)?;
        let field = corrections::<S>(g, idx)?;
        timings.push(("corrections", clock.elapsed()));
        let anchors = opts.anchors.resolve(idx)?;

        let clock = Instant::now();
        let topts = opts.transport;
        let (total, merged) = anchors
            .par_iter()
            .map(|&anchor| {
                let mut rep = TransportReport::<S>::default();
                let phi = concentrate_core(g, idx, &field, anchor, topts, &mut rep)
                    .map_err(|e| e.in_stage(format!("anchor {}", anchor.index())))?;
                Ok::<_, Error>((phi, rep))
            })
            .try_reduce_with(|(a, mut ra), (b, rb)| {
                ra.absorb(rb);
                Ok((a.merge(&b), ra))
            })
            .expect("at least one anchor")?;
        report.absorb(merged);
        timings.push(("transport", clock.elapsed()));

        let mut weighting = uniform;
        let factor = S::one().div_int(anchors.len() as i64).neg();
        weighting.add_scaled(&total, &factor);
        (weighting, anchors)
    };

    let clock = Instant::now();
    let record = verify(g, idx, &weighting)?;
    timings.push(("verify", clock.elapsed()));
    let certificate = Certificate {
        r: g.r(),
        n: g.n(),
        edges: g.edge_count(),
        cliques: idx.k_total(),
        backend: S::BACKEND,
        anchor_mode: opts.anchors.to_string(),
        anchors: anchors.len(),
        max_edge_deviation: record.max_deviation.to_text(),
        edges_off_target: record.off_target,
        min_weight: record.min_weight.as_ref().map_or_else(|| "none".to_string(), S::to_text),
        negative_weights: record.negative,
        decomposition: record.verdict,
    };
    Ok(Decomposition {
        weighting,
        certificate,
        record,
        anchors,
        diagnostics: report.diagnostics,
        trace: report.trace,
        gadgets: report.gadgets,
        timings,
    })
}
