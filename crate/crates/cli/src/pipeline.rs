//! Data loading and the full analysis behind `analyze`.

use std::path::Path;

use causalfair_core::{
    discretize, effect_ledger, ie_by_mediator, ordering_sensitivity, se_by_confounder, stepwise_decompose,
    threshold_sweep, x_pairwise_effects, z_specific_effects, BinningSpec, ConfounderDecomposition, Contrast, Dataset,
    EffectLedger, MediatorDecomposition, PairwiseEffect, SensitivityKind, SensitivityReport, SfmEstimator, SfmRoles,
    StepwiseDecomposition, ThresholdCurve, ZSpecificEffect,
};

use crate::adult;
use crate::bundle::{
    Metadata, Num, OrderedMap, OutcomeType, ReportBundle, StepEntry, Stepwise, ThresholdCurveEntry, XSpecific,
    ZSpecific, IE_DIRECTION,
};
use crate::config::Config;
use crate::csv_io;
use crate::error::{Error, Result};

/// Loads the columns `roles` needs and applies the configured binning.
/// Columns in `raw_numeric` are kept numeric and never binned.
pub fn load_dataset(data: &Path, cfg: &Config, roles: &SfmRoles, raw_numeric: &[&str]) -> Result<Dataset> {
    let specs = cfg.column_specs(roles, raw_numeric);
    let d = if adult::is_adult_source(data) {
        adult::load_adult(data, specs)?
    } else {
        csv_io::load_csv(data, specs, cfg.missing_token.as_deref())?
    };
    let bins: BinningSpec = cfg
        .bins
        .iter()
        .filter(|(name, _)| d.column(name).is_some() && !raw_numeric.contains(&name.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(discretize(&d, &bins)?)
}

/// Everything `analyze` computes, at full precision.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub roles: SfmRoles,
    pub dataset: Dataset,
    pub estimator: SfmEstimator,
    pub ledger: EffectLedger,
    /// Components of IE_{x1,x0}.
    pub mediators: Option<MediatorDecomposition>,
    pub confounders: Option<ConfounderDecomposition>,
    pub pairs: Option<Vec<PairwiseEffect>>,
    pub z_specific: Option<Vec<ZSpecificEffect>>,
    pub stepwise: Option<StepwiseDecomposition>,
    pub curve: Option<(String, ThresholdCurve)>,
    pub sensitivity: Vec<SensitivityReport>,
}

fn weighted_mediators(parts: &[(f64, MediatorDecomposition)]) -> MediatorDecomposition {
    let mut out = parts[0].1.clone();
    for (i, c) in out.components.iter_mut().enumerate() {
        *c = parts.iter().map(|(w, m)| w * m.components[i]).sum();
    }
    out.total_ie = parts.iter().map(|(w, m)| w * m.total_ie).sum();
    out.residual = out.components.iter().sum::<f64>() - out.total_ie;
    out
}

fn weighted_confounders(parts: &[(f64, ConfounderDecomposition)]) -> ConfounderDecomposition {
    let mut out = parts[0].1.clone();
    for (i, c) in out.components.iter_mut().enumerate() {
        *c = parts.iter().map(|(w, m)| w * m.components[i]).sum();
    }
    out.total_se = parts.iter().map(|(w, m)| w * m.total_se).sum();
    out.residual = out.components.iter().sum::<f64>() - out.total_se;
    out
}

pub fn run_analysis(data: &Path, cfg: &Config) -> Result<Analysis> {
    let roles = cfg.roles();
    let y = roles
        .y_target
        .clone()
        .ok_or_else(|| Error::config("y_target", "required for analyze"))?;
    let d = load_dataset(data, cfg, &roles, &[])?;
    let e = SfmEstimator::fit_with_cap(&d, &roles, cfg.alpha(), cfg.cap())?;
    let a = &cfg.analysis;

    // Contrasts and their weights: one pair, or every pair of the two groups.
    let grouped = roles.x0_states.len() > 1 || roles.x1_states.len() > 1;
    let (ledger, contrasts): (EffectLedger, Vec<(f64, Contrast)>) = if grouped {
        let g = causalfair_core::group_average_effect(&e, &y, &roles.x0_states, &roles.x1_states, a.weighting)?;
        let cs = g
            .pairs
            .iter()
            .zip(&g.weights)
            .map(|(p, w)| (*w, p.ledger.contrast.clone()))
            .collect();
        (g.ledger, cs)
    } else {
        let c = Contrast::from_roles(&roles)?;
        (effect_ledger(&e, &c)?, vec![(1.0, c)])
    };

    let names = |o: &Option<Vec<String>>, d: &[String]| -> Vec<String> { o.clone().unwrap_or_else(|| d.to_vec()) };
    let w_order = names(&a.mediator_order, &roles.w);
    let z_order = names(&a.confounder_order, &roles.z);
    let (mut mediators, mut confounders) = (None, None);
    if a.decompositions {
        let w: Vec<&str> = w_order.iter().map(String::as_str).collect();
        let z: Vec<&str> = z_order.iter().map(String::as_str).collect();
        if !w.is_empty() {
            let parts = contrasts
                .iter()
                .map(|(wt, c)| Ok((*wt, ie_by_mediator(&e, &c.swapped(), &w)?)))
                .collect::<Result<Vec<_>>>()?;
            mediators = Some(weighted_mediators(&parts));
        }
        if !z.is_empty() {
            let parts = contrasts
                .iter()
                .map(|(wt, c)| Ok((*wt, se_by_confounder(&e, c, &z)?)))
                .collect::<Result<Vec<_>>>()?;
            confounders = Some(weighted_confounders(&parts));
        }
    }

    let pairs = match (&a.pairs, grouped) {
        (Some(p), _) => Some(x_pairwise_effects(&e, &y, &p.x0_states, &p.x1_states)?),
        (None, true) => Some(x_pairwise_effects(&e, &y, &roles.x0_states, &roles.x1_states)?),
        (None, false) => None,
    };
    // Z-specific effects are reported for a single contrast only.
    let z_specific = if a.z_specific && !grouped && !roles.z.is_empty() {
        Some(z_specific_effects(&e, &contrasts[0].1)?)
    } else {
        None
    };
    let stepwise = match &a.stepwise {
        Some(states) => Some(stepwise_decompose(&e, states, &y)?),
        None => None,
    };
    let curve = match &a.sweep {
        Some(_) => Some(run_sweep(data, cfg, None)?),
        None => None,
    };
    let mut sensitivity = Vec::new();
    if a.sensitivity && !grouped {
        let c = &contrasts[0].1;
        if !roles.w.is_empty() {
            sensitivity.push(ordering_sensitivity(&e, &c.swapped(), SensitivityKind::Mediator)?);
        }
        if !roles.z.is_empty() {
            sensitivity.push(ordering_sensitivity(&e, c, SensitivityKind::Confounder)?);
        }
    }
    Ok(Analysis {
        roles,
        dataset: d,
        estimator: e,
        ledger,
        mediators,
        confounders,
        pairs,
        z_specific,
        stepwise,
        curve,
        sensitivity,
    })
}

/// Threshold sweep with the sweep roles; `grid` overrides the configured one.
pub fn run_sweep(data: &Path, cfg: &Config, grid: Option<&[f64]>) -> Result<(String, ThresholdCurve)> {
    let roles = cfg.sweep_roles();
    let s = cfg.analysis.sweep.clone().unwrap_or_default();
    let d = load_dataset(data, cfg, &roles, &[roles.y.as_str()])?;
    let grid = grid.map(<[f64]>::to_vec).or(s.grid);
    let mut curve = threshold_sweep(&d, &roles, grid.as_deref(), cfg.alpha(), s.binarization)?;
    curve.selected_threshold = s.selected_threshold;
    Ok((roles.y, curve))
}

impl Analysis {
    pub fn outcome_type(&self) -> OutcomeType {
        if self.estimator.y_states().len() == 2 {
            OutcomeType::Binary
        } else {
            OutcomeType::Categorical
        }
    }

    pub fn bundle(&self) -> ReportBundle {
        let e = &self.estimator;
        let meta = Metadata {
            n_rows: self.dataset.n_rows(),
            dropped_rows: self.dataset.dropped_rows(),
            alpha: Num(e.alpha()),
            roles: self.roles.clone(),
            dataset_digest: self.dataset.digest(),
            ie_direction: IE_DIRECTION.to_string(),
        };
        let mut b = ReportBundle::minimal(&self.ledger, &self.roles, self.outcome_type(), meta);
        let ordered = |names: &[String], vals: &[f64]| {
            OrderedMap(names.iter().cloned().zip(vals.iter().map(|v| Num(*v))).collect())
        };
        b.ie_by_mediator = self.mediators.as_ref().map(|m| ordered(&m.order, &m.components));
        b.se_by_confounder = self.confounders.as_ref().map(|c| ordered(&c.order, &c.components));
        b.x_specific = self.pairs.as_ref().map(|ps| {
            ps.iter()
                .map(|p| XSpecific {
                    X_value_pair: [p.ledger.contrast.x0.clone(), p.ledger.contrast.x1.clone()],
                    te: p.ledger.te.into(),
                    de: p.ledger.de.into(),
                    ie: p.ledger.ie_reversed.into(),
                })
                .collect()
        });
        b.z_specific = self.z_specific.as_ref().map(|zs| {
            zs.iter()
                .map(|z| ZSpecific {
                    z_state: OrderedMap(z.z_state.clone()),
                    te: z.te.into(),
                    de: z.de.into(),
                    ie: z.ie_reversed.into(),
                    n_rows: z.n_rows,
                })
                .collect()
        });
        if let Some(s) = &self.stepwise {
            b.stepwise = Stepwise {
                enabled: true,
                effects_by_step: Some(
                    s.steps
                        .iter()
                        .map(|st| StepEntry {
                            from: st.from.clone(),
                            to: st.to.clone(),
                            te: st.te.into(),
                            tv: st.tv.into(),
                            se: st.se.into(),
                            n_rows: st.n_rows,
                        })
                        .collect(),
                ),
            };
        }
        b.threshold_curve = self.curve.as_ref().map(|(y, c)| curve_entry(y, c));
        b
    }
}

pub fn curve_entry(y: &str, c: &ThresholdCurve) -> ThresholdCurveEntry {
    let nums = |v: &[f64]| v.iter().map(|x| Num(*x)).collect();
    ThresholdCurveEntry {
        y: y.to_string(),
        grid: nums(&c.grid),
        tv: nums(&c.tv),
        te: nums(&c.te),
        de: nums(&c.de),
        ie: nums(&c.ie_reversed),
        se: nums(&c.se),
        selected_threshold: c.selected_threshold.map(Num),
    }
}
