//! Non-binary targets and non-binary protected features.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Column, ColumnKind, Dataset};
use crate::decomposition::{x_pairwise_effects, PairwiseEffect};
use crate::effects::{
    ledger_from, resolve, Contrast, EffectKind, EffectLedger, EffectVectors, LedgerMetadata, Tables, IDENTITY_TOL,
};
use crate::error::{Error, Result};
use crate::estimator::SfmEstimator;
use crate::roles::SfmRoles;

/// Real-valued utility of each Y state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilitySpec {
    /// Parse every Y label as a number.
    #[default]
    Identity,
    Map(BTreeMap<String, f64>),
}

impl UtilitySpec {
    fn resolve(&self, e: &SfmEstimator) -> Result<Vec<f64>> {
        let states = e.y_states();
        let y = &e.roles().y;
        let values = match self {
            UtilitySpec::Identity => states
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| Error::NonNumericColumn(y.clone())))
                .collect::<Result<Vec<_>>>()?,
            UtilitySpec::Map(m) => states
                .iter()
                .map(|s| {
                    m.get(s)
                        .copied()
                        .ok_or_else(|| Error::InvalidArgument(format!("utility has no value for state `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("utility values must be finite".into()));
        }
        Ok(values)
    }
}

fn vectors(e: &SfmEstimator, x0: &str, x1: &str) -> Result<EffectVectors> {
    let (a, b) = (e.x_index(x0)?, e.x_index(x1)?);
    let mut t = Tables::new(e);
    Ok(EffectVectors::compute(e, &mut t, a, b))
}

/// The descriptor evaluated at every Y state, in state order.
pub fn per_state_effects(e: &SfmEstimator, x0: &str, x1: &str, kind: EffectKind) -> Result<Vec<(String, f64)>> {
    let v = vectors(e, x0, x1)?.kind(kind);
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::UnidentifiableCell(kind.label().to_string()));
    }
    Ok(e.y_states().iter().cloned().zip(v).collect())
}

/// `Σ_y u(y) · effect(y)`: the effect on the expected utility.
pub fn expected_effect(e: &SfmEstimator, x0: &str, x1: &str, kind: EffectKind, u: &UtilitySpec) -> Result<f64> {
    let u = u.resolve(e)?;
    let per = per_state_effects(e, x0, x1, kind)?;
    Ok(per.iter().zip(&u).map(|((_, v), u)| v * u).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Arithmetic,
    MarginalWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAverage {
    pub weighting: Weighting,
    pub pairs: Vec<PairwiseEffect>,
    /// Weight of each entry of `pairs`; sums to 1.
    pub weights: Vec<f64>,
    /// Weighted average of every descriptor, identity-checked.
    pub ledger: EffectLedger,
}

impl GroupAverage {
    pub fn value(&self, kind: EffectKind) -> f64 {
        self.ledger.get(kind)
    }
}

/// Averages pairwise effects over `x0s × x1s`.
pub fn group_average_effect(
    e: &SfmEstimator,
    y: &str,
    x0s: &[String],
    x1s: &[String],
    weighting: Weighting,
) -> Result<GroupAverage> {
    let pairs = x_pairwise_effects(e, y, x0s, x1s)?;
    let weights: Vec<f64> = match weighting {
        Weighting::Arithmetic => vec![1.0 / pairs.len() as f64; pairs.len()],
        Weighting::MarginalWeighted => {
            let n0: usize = pairs.iter().step_by(x1s.len()).map(|p| p.n_x0).sum();
            let n1: usize = pairs[..x1s.len()].iter().map(|p| p.n_x1).sum();
            if n0 == 0 || n1 == 0 {
                return Err(Error::InvalidArgument(
                    "a group has no observations to weight by".into(),
                ));
            }
            pairs
                .iter()
                .map(|p| (p.n_x0 as f64 / n0 as f64) * (p.n_x1 as f64 / n1 as f64))
                .collect()
        }
    };
    let avg = |k: EffectKind| -> f64 { pairs.iter().zip(&weights).map(|(p, w)| w * p.ledger.get(k)).sum() };
    let ledger = EffectLedger::from_parts(
        avg(EffectKind::Tv),
        avg(EffectKind::Te),
        avg(EffectKind::De),
        avg(EffectKind::Ie),
        avg(EffectKind::IeReversed),
        Contrast::new(x0s.join("|"), x1s.join("|"), y),
        LedgerMetadata::of(e),
    )?;
    Ok(GroupAverage {
        weighting,
        pairs,
        weights,
        ledger,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub from: String,
    pub to: String,
    pub tv: f64,
    pub te: f64,
    pub se: f64,
    /// Not additive across steps in general.
    pub de: f64,
    /// `IE_{to,from}`; not additive across steps in general.
    pub ie_reversed: f64,
    /// n(from) + n(to).
    pub n_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResiduals {
    pub tv: f64,
    pub te: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseDecomposition {
    pub ordered_states: Vec<String>,
    pub y: String,
    pub steps: Vec<Step>,
    pub end_to_end: EffectLedger,
    /// |Σ step − end-to-end| for the additive descriptors.
    pub residuals: StepResiduals,
    /// Descriptors whose steps need not sum to the end-to-end value.
    pub non_additive: Vec<EffectKind>,
}

impl StepwiseDecomposition {
    /// Running sum of the step TEs, starting after the first step.
    pub fn cumulative_te(&self) -> Vec<f64> {
        self.steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.te;
                Some(*acc)
            })
            .collect()
    }
}

/// Adjacent-pair effects along a user-ordered list of X states.
pub fn stepwise_decompose(e: &SfmEstimator, ordered_states: &[String], y: &str) -> Result<StepwiseDecomposition> {
    if ordered_states.len() < 2 {
        return Err(Error::InvalidArgument(
            "stepwise decomposition needs at least 2 states".into(),
        ));
    }
    let counts = e.x_counts();
    let mut t = Tables::new(e);
    let mut steps = Vec::with_capacity(ordered_states.len() - 1);
    for w in ordered_states.windows(2) {
        let c = Contrast::new(w[0].clone(), w[1].clone(), y);
        let r = resolve(e, &c)?;
        let l = ledger_from(e, &mut t, &c, &r)?;
        steps.push(Step {
            from: w[0].clone(),
            to: w[1].clone(),
            tv: l.tv,
            te: l.te,
            se: l.se,
            de: l.de,
            ie_reversed: l.ie_reversed,
            n_rows: crate::util::count(counts[r.x0] + counts[r.x1]),
        });
    }
    let c = Contrast::new(
        ordered_states[0].clone(),
        ordered_states[ordered_states.len() - 1].clone(),
        y,
    );
    let r = resolve(e, &c)?;
    let end_to_end = ledger_from(e, &mut t, &c, &r)?;
    let residual = |f: fn(&Step) -> f64, total: f64| (steps.iter().map(f).sum::<f64>() - total).abs();
    let residuals = StepResiduals {
        tv: residual(|s| s.tv, end_to_end.tv),
        te: residual(|s| s.te, end_to_end.te),
        se: residual(|s| s.se, end_to_end.se),
    };
    let worst = residuals.tv.max(residuals.te).max(residuals.se);
    if !(worst <= IDENTITY_TOL) {
        return Err(Error::IdentityBreach {
            identity: "stepwise telescoping",
            residual: worst,
        });
    }
    Ok(StepwiseDecomposition {
        ordered_states: ordered_states.to_vec(),
        y: y.to_string(),
        steps,
        end_to_end,
        residuals,
        non_additive: vec![EffectKind::De, EffectKind::Ie, EffectKind::IeReversed],
    })
}

/// How a numeric target is cut into the binary "high" indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binarization {
    /// `Y > t`.
    #[default]
    Above,
    /// `Y ≥ t`.
    AtLeast,
}

impl Binarization {
    fn high(self, v: f64, t: f64) -> bool {
        match self {
            Binarization::Above => v > t,
            Binarization::AtLeast => v >= t,
        }
    }
}

pub const LOW_STATE: &str = "low";
pub const HIGH_STATE: &str = "high";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub grid: Vec<f64>,
    pub binarization: Binarization,
    pub tv: Vec<f64>,
    pub te: Vec<f64>,
    pub de: Vec<f64>,
    pub ie: Vec<f64>,
    pub ie_reversed: Vec<f64>,
    pub se: Vec<f64>,
    /// Points where the binarized target is constant (effects set to 0).
    pub degenerate: Vec<bool>,
    /// Threshold maximizing each descriptor over non-degenerate points.
    pub argmax: BTreeMap<EffectKind, f64>,
    pub selected_threshold: Option<f64>,
}

impl ThresholdCurve {
    pub fn series(&self, kind: EffectKind) -> &[f64] {
        match kind {
            EffectKind::Tv => &self.tv,
            EffectKind::Te => &self.te,
            EffectKind::Se => &self.se,
            EffectKind::De => &self.de,
            EffectKind::Ie => &self.ie,
            EffectKind::IeReversed => &self.ie_reversed,
        }
    }

    pub fn at(&self, threshold: f64) -> Option<usize> {
        self.grid.iter().position(|&t| t == threshold)
    }
}

/// Effects of X on the indicator `[Y > t]` (or `[Y ≥ t]`) over a grid of
/// thresholds; the default grid is the sorted distinct values of Y.
pub fn threshold_sweep(
    d: &Dataset,
    roles: &SfmRoles,
    grid: Option<&[f64]>,
    alpha: f64,
    binarization: Binarization,
) -> Result<ThresholdCurve> {
    let ycol = d.require_column(&roles.y)?;
    let values = ycol
        .numeric_values()
        .ok_or_else(|| Error::NonNumericColumn(roles.y.clone()))?;
    let grid: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => {
            let mut g = values.to_vec();
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        }
    };
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "sweep grid must be nonempty, finite and strictly ascending".into(),
        ));
    }
    let (x0, x1) = match (&roles.x0_states[..], &roles.x1_states[..]) {
        ([a], [b]) => (a.clone(), b.clone()),
        _ => {
            return Err(Error::InvalidRoles(
                "threshold sweep needs exactly one state in x0_states and x1_states".into(),
            ))
        }
    };
    let contrast = Contrast::new(x0, x1, HIGH_STATE);
    let mut swept_roles = roles.clone();
    swept_roles.y_target = Some(HIGH_STATE.to_string());

    let n = grid.len();
    let mut curve = ThresholdCurve {
        grid: grid.clone(),
        binarization,
        tv: Vec::with_capacity(n),
        te: Vec::with_capacity(n),
        de: Vec::with_capacity(n),
        ie: Vec::with_capacity(n),
        ie_reversed: Vec::with_capacity(n),
        se: Vec::with_capacity(n),
        degenerate: Vec::with_capacity(n),
        argmax: BTreeMap::new(),
        selected_threshold: None,
    };
    for &t in &grid {
        let codes: Vec<u32> = ycol
            .codes()
            .iter()
            .map(|&c| binarization.high(values[c as usize], t) as u32)
            .collect();
        let degenerate = codes.iter().all(|&c| c == codes[0]);
        let l = if degenerate {
            None
        } else {
            let y = Column::new(
                roles.y.clone(),
                ColumnKind::Categorical,
                vec![LOW_STATE.to_string(), HIGH_STATE.to_string()],
                codes,
            )?;
            let view = d.with_column(y)?;
            let e = SfmEstimator::fit(&view, &swept_roles, alpha)?;
            let r = resolve(&e, &contrast)?;
            let mut tables = Tables::new(&e);
            Some(ledger_from(&e, &mut tables, &contrast, &r)?)
        };
        let get = |k: EffectKind| l.as_ref().map_or(0.0, |l| l.get(k));
        curve.tv.push(get(EffectKind::Tv));
        curve.te.push(get(EffectKind::Te));
        curve.de.push(get(EffectKind::De));
        curve.ie.push(get(EffectKind::Ie));
        curve.ie_reversed.push(get(EffectKind::IeReversed));
        curve.se.push(get(EffectKind::Se));
        curve.degenerate.push(degenerate);
    }
    for kind in EffectKind::ALL {
        let series = curve.series(kind);
        let best = (0..n)
            .filter(|&i| !curve.degenerate[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if series[b] >= series[i] => Some(b),
                _ => Some(i),
            });
        if let Some(i) = best {
            curve.argmax.insert(kind, grid[i]);
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSpec, DatasetBuilder};

    fn data() -> Dataset {
        let mut b = DatasetBuilder::new(vec![
            ColumnSpec::categorical("x"),
            ColumnSpec::categorical("w"),
            ColumnSpec::integer("y"),
        ])
        .unwrap();
        let rows = [
            ["a", "p", "0"],
            ["a", "q", "1"],
            ["a", "p", "2"],
            ["b", "q", "3"],
            ["b", "q", "2"],
            ["b", "p", "1"],
            ["c", "p", "3"],
            ["c", "q", "3"],
        ];
        for r in rows {
            b.push_record(&r).unwrap();
        }
        b.finish().unwrap()
    }

    fn est() -> SfmEstimator {
        let r = SfmRoles::new("x", "y").mediators(["w"]).groups(["a"], ["b"]);
        SfmEstimator::fit(&data(), &r, 1.0).unwrap()
    }

    #[test]
    fn per_state_sums_to_zero_and_utility_is_linear() {
        let e = est();
        for k in EffectKind::ALL {
            let s: f64 = per_state_effects(&e, "a", "b", k).unwrap().iter().map(|p| p.1).sum();
            assert!(s.abs() < 1e-12);
        }
        let id = expected_effect(&e, "a", "b", EffectKind::Te, &UtilitySpec::Identity).unwrap();
        let affine = UtilitySpec::Map((0..4).map(|v| (v.to_string(), 3.0 * v as f64 - 5.0)).collect());
        let af = expected_effect(&e, "a", "b", EffectKind::Te, &affine).unwrap();
        assert!((af - 3.0 * id).abs() < 1e-12);
        let constant = UtilitySpec::Map((0..4).map(|v| (v.to_string(), 2.0)).collect());
        assert!(expected_effect(&e, "a", "b", EffectKind::De, &constant).unwrap().abs() < 1e-12);
        let partial = UtilitySpec::Map([("0".to_string(), 1.0)].into());
        assert!(expected_effect(&e, "a", "b", EffectKind::De, &partial).is_err());
    }

    #[test]
    fn group_averages() {
        let e = est();
        let one = group_average_effect(&e, "3", &["a".into()], &["b".into()], Weighting::MarginalWeighted).unwrap();
        let ar = group_average_effect(&e, "3", &["a".into()], &["b".into()], Weighting::Arithmetic).unwrap();
        assert_eq!(one.value(EffectKind::Te), ar.value(EffectKind::Te));
        // Marginal counts are 3, 3, 2.
        let w = group_average_effect(
            &e,
            "3",
            &["a".into()],
            &["b".into(), "c".into()],
            Weighting::MarginalWeighted,
        )
        .unwrap();
        assert!((w.weights[0] - 0.6).abs() < 1e-15);
        let l = &w.ledger;
        assert!((l.tv - l.te - l.se).abs() < 1e-12);
        assert!((l.te - (l.de - l.ie_reversed)).abs() < 1e-12);
        assert!(group_average_effect(&e, "3", &[], &["b".into()], Weighting::Arithmetic).is_err());
    }

    #[test]
    fn stepwise_telescopes() {
        let e = est();
        let s = stepwise_decompose(&e, &["a".into(), "b".into(), "c".into()], "3").unwrap();
        assert_eq!(s.steps.len(), 2);
        assert!(s.residuals.te < 1e-12);
        assert_eq!(s.steps[0].n_rows, 6);
        assert!((s.cumulative_te()[1] - s.end_to_end.te).abs() < 1e-12);
        assert!(stepwise_decompose(&e, &["a".into()], "3").is_err());
    }

    #[test]
    fn sweep_degenerate_and_strict() {
        let r = SfmRoles::new("x", "y").mediators(["w"]).groups(["a"], ["b"]);
        let c = threshold_sweep(&data(), &r, Some(&[-1.0, 1.0, 5.0]), 1.0, Binarization::Above).unwrap();
        assert_eq!(c.degenerate, [true, false, true]);
        let c2 = threshold_sweep(&data(), &r, Some(&[-1.0]), 1.0, Binarization::AtLeast).unwrap();
        assert_eq!(c2.degenerate, [true]);
        assert_eq!(c2.te, [0.0]);
        assert!(threshold_sweep(&data(), &r, Some(&[2.0, 1.0]), 1.0, Binarization::Above).is_err());
        let full = threshold_sweep(&data(), &r, None, 1.0, Binarization::AtLeast).unwrap();
        assert_eq!(full.grid, [0.0, 1.0, 2.0, 3.0]);
        assert!(full.degenerate[0]);
        assert!(full.argmax.contains_key(&EffectKind::Te));
    }
}
