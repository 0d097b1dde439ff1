//! Causal fairness analysis under the standard fairness model.
//!
//! The crate estimates a Laplace-smoothed Bayesian network over the role
//! order `Z¹..Zᵏ → X → W¹..Wᵐ → Y` and evaluates the observational
//! identification formulae for total variation, total, spurious, direct and
//! indirect effects, together with per-mediator, per-confounder, per-pair,
//! per-step and per-threshold refinements. A small exact structural causal
//! model engine ([`scm`]) provides ground truth for all of them.
//!
//! Everything here is `no_std` + `alloc`; file formats, reporting and the
//! command line live in the `causalfair` crate.

#![no_std]
// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod binning;
pub mod dataset;
pub mod decomposition;
pub mod effects;
pub mod error;
pub mod estimator;
pub mod extensions;
pub mod roles;
pub mod scm;

mod util;

pub use binning::{discretize, BinRule, BinningSpec};
pub use dataset::{Column, ColumnKind, ColumnSpec, Dataset, DatasetBuilder};
pub use decomposition::{
    ie_by_mediator, ordering_sensitivity, se_by_confounder, x_pairwise_effects, z_specific_effects,
    ConfounderDecomposition, MediatorDecomposition, PairwiseEffect, SensitivityKind, SensitivityReport,
    ZSpecificEffect,
};
pub use effects::{
    direct_effect, effect, effect_ledger, indirect_effect, spurious_effect, total_effect, total_variation, Contrast,
    EffectKind, EffectLedger,
};
pub use error::{Error, Result};
pub use estimator::{ConditionalTable, JointStates, SfmEstimator, DEFAULT_ALPHA, DEFAULT_CAP};
pub use extensions::{
    expected_effect, group_average_effect, per_state_effects, stepwise_decompose, threshold_sweep, Binarization,
    GroupAverage, StepwiseDecomposition, ThresholdCurve, UtilitySpec, Weighting,
};
pub use roles::{validate_roles, SfmRoles, ValidationReport};
