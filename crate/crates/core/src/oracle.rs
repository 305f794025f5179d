//! Exact LP feasibility of the fractional decomposition polytope
//! `{x >= 0 : sum over cliques through e of x = 1 for every edge e}` and a
//! verifier for arbitrary clique weightings.

use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

use crate::clique_index::CliqueIndex;
use crate::error::{Error, Result};
use crate::partite_graph::PartiteGraph;
use crate::scalar::{Backend, Rational, Scalar};
use crate::weighting::{all_edge_effects, CliqueWeighting};

/// Default instance ceilings for the dense tableau.
pub const MAX_ORACLE_CLIQUES: usize = 2000;
pub const MAX_ORACLE_EDGES: usize = 500;

/// Edge sums within this distance of one count as on target in the float backend.
pub const FLOAT_VERIFY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub witness: Option<CliqueWeighting<Rational>>,
    /// Why the system is infeasible (or vacuous), when there is something to say.
    pub note: Option<String>,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn feasible(&self) -> bool {
        self.status == LpStatus::Feasible
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = match self.status {
            LpStatus::Feasible => "feasible",
            LpStatus::Infeasible => "infeasible",
        };
        let _ = writeln!(out, "status {status}");
        let _ = writeln!(out, "pivots {}", self.pivots);
        if let Some(note) = &self.note {
            let _ = writeln!(out, "note {note}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness-support {}", w.support_len());
        }
        out
    }
}

/// Phase-I simplex with the default size ceilings.
pub fn lp_feasible(g: &PartiteGraph, idx: &CliqueIndex) -> Result<LpOutcome> {
    lp_feasible_with(g, idx, false)
}

/// Phase-I simplex; `force` lifts the size ceilings.
pub fn lp_feasible_with(g: &PartiteGraph, idx: &CliqueIndex, force: bool) -> Result<LpOutcome> {
    let (m, k) = (g.edge_count(), idx.k_total());
    if m == 0 {
        return Ok(LpOutcome {
            status: LpStatus::Feasible,
            witness: Some(CliqueWeighting::zeros(idx)),
            note: Some("no edges; the constraint system is empty".into()),
            pivots: 0,
        });
    }
    if k == 0 {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            witness: None,
            note: Some(format!("{m} edges but no cliques")),
            pivots: 0,
        });
    }
    if !force && (k > MAX_ORACLE_CLIQUES || m > MAX_ORACLE_EDGES) {
        return Err(Error::SizeLimit(format!(
            "{k} cliques and {m} edges exceed the oracle limits ({MAX_ORACLE_CLIQUES} cliques, {MAX_ORACLE_EDGES} edges)"
        )));
    }

    let PhaseOne { objective, solution, pivots } = phase_one(idx, m, k);
    if !Zero::is_zero(&objective) {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            witness: None,
            note: Some(format!("phase-one optimum {objective}")),
            pivots,
        });
    }
    let witness = CliqueWeighting::from_values(idx, solution)?;
    let record = verify(g, idx, &witness)?;
    if !record.verdict {
        return Err(Error::Internal(format!(
            "simplex witness fails verification: {}",
            record.to_text().replace('\n', "; ")
        )));
    }
    Ok(LpOutcome {
        status: LpStatus::Feasible,
        witness: Some(witness),
        note: None,
        pivots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basic {
    Column(usize),
    /// Artificial variable of the given row; ordered before every column so
    /// ratio ties expel artificials first.
    Artificial(usize),
}

impl Basic {
    fn order(self, m: usize) -> usize {
        match self {
            Basic::Artificial(i) => i,
            Basic::Column(j) => m + j,
        }
    }
}

/// Raised when a machine-word entry overflows; the run restarts in big integers.
#[derive(Debug)]
struct Overflow;

/// Field operations the tableau needs, with overflow reported instead of wrapping.
trait Entry: Clone + PartialOrd + Zero + One + Signed + std::fmt::Display {
    fn add_(&self, o: &Self) -> std::result::Result<Self, Overflow>;
    fn sub_(&self, o: &Self) -> std::result::Result<Self, Overflow>;
    fn mul_(&self, o: &Self) -> std::result::Result<Self, Overflow>;
    fn div_(&self, o: &Self) -> std::result::Result<Self, Overflow>;
    fn from_count(m: usize) -> Self;
    fn to_rational(&self) -> Rational;
}

impl Entry for Rational {
    fn add_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        Ok(self - o)
    }
    fn mul_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        Ok(self * o)
    }
    fn div_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        Ok(self / o)
    }
    fn from_count(m: usize) -> Self {
        Rational::from_integer(m.into())
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

type Small = Ratio<i64>;

impl Entry for Small {
    fn add_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        self.checked_add(o).ok_or(Overflow)
    }
    fn sub_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        self.checked_sub(o).ok_or(Overflow)
    }
    fn mul_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        self.checked_mul(o).ok_or(Overflow)
    }
    fn div_(&self, o: &Self) -> std::result::Result<Self, Overflow> {
        self.checked_div(o).ok_or(Overflow)
    }
    fn from_count(m: usize) -> Self {
        Small::from_integer(m as i64)
    }
    fn to_rational(&self) -> Rational {
        Rational::new((*self.numer()).into(), (*self.denom()).into())
    }
}

/// Result of a completed phase-one run, already in big rationals.
struct PhaseOne {
    objective: Rational,
    solution: Vec<Rational>,
    pivots: usize,
}

fn phase_one(idx: &CliqueIndex, m: usize, k: usize) -> PhaseOne {
    match Tableau::<Small>::new(idx, m, k).and_then(Tableau::run) {
        Ok(done) => done,
        Err(Overflow) => Tableau::<Rational>::new(idx, m, k)
            .and_then(Tableau::run)
            .unwrap_or_else(|_| unreachable!("big rationals do not overflow")),
    }
}

/// Dense tableau over the original columns; artificial columns are dropped
/// once they leave the basis since phase one never needs them again.
struct Tableau<T> {
    k: usize,
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<Basic>,
    /// Reduced costs of the phase-one objective (sum of artificials).
    costs: Vec<T>,
    objective: T,
}

impl<T: Entry> Tableau<T> {
    fn new(idx: &CliqueIndex, m: usize, k: usize) -> std::result::Result<Self, Overflow> {
        let mut rows = vec![vec![T::zero(); k]; m];
        let mut costs = vec![T::zero(); k];
        for (e, row) in rows.iter_mut().enumerate() {
            for &c in idx.cliques_on_edge(e) {
                row[c as usize] = T::one();
                costs[c as usize] = costs[c as usize].add_(&T::one())?;
            }
        }
        Ok(Tableau {
            k,
            rows,
            rhs: vec![T::one(); m],
            basis: (0..m).map(Basic::Artificial).collect(),
            costs,
            objective: T::from_count(m),
        })
    }

    fn run(mut self) -> std::result::Result<PhaseOne, Overflow> {
        let m = self.rows.len();
        let mut pivots = 0;
        // Bland: lowest-index improving column, lowest-index leaving variable on ties.
        while let Some(q) = self.costs.iter().position(|c| c.is_positive()) {
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[q].is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div_(&row[q])?;
                let better = match &best {
                    None => true,
                    Some((b, r)) => ratio < *r || (ratio == *r && self.basis[i].order(m) < self.basis[*b].order(m)),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let (p, _) = best.expect("phase one is bounded below by zero");
            self.pivot(p, q)?;
            pivots += 1;
        }
        let mut solution = vec![<Rational as Zero>::zero(); self.k];
        for (i, b) in self.basis.iter().enumerate() {
            if let Basic::Column(j) = *b {
                solution[j] = self.rhs[i].to_rational();
            }
        }
        Ok(PhaseOne {
            objective: self.objective.to_rational(),
            solution,
            pivots,
        })
    }

    fn pivot(&mut self, p: usize, q: usize) -> std::result::Result<(), Overflow> {
        let inv = T::one().div_(&self.rows[p][q])?;
        for a in self.rows[p].iter_mut() {
            if !a.is_zero() {
                *a = a.mul_(&inv)?;
            }
        }
        self.rhs[p] = self.rhs[p].mul_(&inv)?;
        let pivot_row = std::mem::take(&mut self.rows[p]);
        let support: Vec<usize> = (0..self.k).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p || row[q].is_zero() {
                continue;
            }
            let factor = row[q].clone();
            for &j in &support {
                row[j] = row[j].sub_(&factor.mul_(&pivot_row[j])?)?;
            }
            self.rhs[i] = self.rhs[i].sub_(&factor.mul_(&self.rhs[p])?)?;
        }
        if !self.costs[q].is_zero() {
            let factor = self.costs[q].clone();
            for &j in &support {
                self.costs[j] = self.costs[j].sub_(&factor.mul_(&pivot_row[j])?)?;
            }
            self.objective = self.objective.sub_(&factor.mul_(&self.rhs[p])?)?;
        }
        self.rows[p] = pivot_row;
        self.basis[p] = Basic::Column(q);
        Ok(())
    }
}

/// Outcome of checking a weighting against the edge constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord<S> {
    pub backend: Backend,
    pub max_effect: Option<S>,
    pub min_effect: Option<S>,
    /// Largest `|effect - 1|` over edges (zero without edges).
    pub max_deviation: S,
    pub off_target: usize,
    pub min_weight: Option<S>,
    pub negative: usize,
    /// All effects one and all weights nonnegative.
    pub verdict: bool,
}

impl<S: Scalar> VerificationRecord<S> {
    pub fn to_text(&self) -> String {
        let opt = |x: &Option<S>| x.as_ref().map_or_else(|| "none".to_string(), S::to_text);
        let mut out = String::new();
        let _ = writeln!(out, "backend {}", self.backend.name());
        let _ = writeln!(out, "max-edge-effect {}", opt(&self.max_effect));
        let _ = writeln!(out, "min-edge-effect {}", opt(&self.min_effect));
        let _ = writeln!(out, "max-edge-deviation {}", self.max_deviation.to_text());
        let _ = writeln!(out, "edges-off-target {}", self.off_target);
        let _ = writeln!(out, "min-weight {}", opt(&self.min_weight));
        let _ = writeln!(out, "negative-weights {}", self.negative);
        let verdict = if self.verdict {
            "fractional-decomposition"
        } else {
            "not-a-decomposition"
        };
        let _ = writeln!(out, "verdict {verdict}");
        out
    }
}

fn is_negative<S: Scalar>(x: &S) -> bool {
    match S::BACKEND {
        Backend::Exact => x.signum() < 0,
        Backend::Float => x.to_f64() < -crate::scalar::FLOAT_NEGLIGIBLE,
    }
}

fn on_target<S: Scalar>(deviation: &S) -> bool {
    match S::BACKEND {
        Backend::Exact => deviation.is_zero(),
        Backend::Float => deviation.to_f64() <= FLOAT_VERIFY_TOLERANCE,
    }
}

/// Edge sums and weight signs of `w`; exact in the rational backend, within
/// [`FLOAT_VERIFY_TOLERANCE`] in the float backend.
pub fn verify<S: Scalar>(g: &PartiteGraph, idx: &CliqueIndex, w: &CliqueWeighting<S>) -> Result<VerificationRecord<S>> {
    w.check_host(idx)?;
    if idx.edge_slots() != g.edge_count() {
        return Err(Error::IndexMismatch("clique index was built for another graph".into()));
    }
    let effects = all_edge_effects(idx, w);
    let one = S::one();
    let mut max_effect: Option<S> = None;
    let mut min_effect: Option<S> = None;
    let mut max_deviation = S::zero();
    let mut off_target = 0;
    for x in &effects {
        if max_effect.as_ref().is_none_or(|m| m.lt(x)) {
            max_effect = Some(x.clone());
        }
        if min_effect.as_ref().is_none_or(|m| x.lt(m)) {
            min_effect = Some(x.clone());
        }
        let deviation = x.sub(&one).abs();
        if !on_target(&deviation) {
            off_target += 1;
        }
        if max_deviation.lt(&deviation) {
            max_deviation = deviation;
        }
    }
    let negative = w.values().iter().filter(|x| is_negative(*x)).count();
    Ok(VerificationRecord {
        backend: S::BACKEND,
        max_effect,
        min_effect,
        max_deviation,
        off_target,
        min_weight: w.min().cloned(),
        negative,
        verdict: off_target == 0 && negative == 0,
    })
}
