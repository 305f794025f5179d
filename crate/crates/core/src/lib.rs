//! Fractional K_r-decompositions of dense balanced r-partite graphs.
//!
//! The pipeline starts from the uniform clique weighting, measures how far
//! each edge is from weight one, and moves weight around with two local
//! gadgets until every edge is covered exactly.

pub mod clique_index;
pub mod diagnostics;
pub mod error;
pub mod gadgets;
pub mod oracle;
pub mod partite_graph;
pub mod scalar;
pub mod transport;
pub mod weighting;

pub use clique_index::{bounds_report, count_partial, BoundsReport, CliqueId, CliqueIndex};
pub use diagnostics::{Check, CheckStatus};
pub use error::{Error, Result};
pub use partite_graph::{generate_divisible, GraphSummary, NeighbourRichMode, PartiteGraph, VertexId};
pub use scalar::{Backend, Rational, Scalar};
pub use weighting::{
    all_edge_effects, corrections, edge_effect, field_from_weighting, uniform_init, vertex_effect, CliqueWeighting,
    parse_weighting, write_weighting, CorrectionField, SparseDelta,
};
pub use gadgets::{
    split_corrections, star_gadget, swap_gadget, CorrectionPlan, StarGadgetSpec, StarMove, SwapGadgetSpec, SwapMove,
};
pub use oracle::{lp_feasible, lp_feasible_with, verify, LpOutcome, LpStatus, VerificationRecord};
pub use transport::{
    concentrate_on_clique, decompose, intermediate_set, move_vertex_into_set, sweep_into_set, AnchorMode, Certificate,
    DecomposeOptions, Decomposition, TransportOptions, TransportReport,
};
