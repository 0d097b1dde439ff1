//! JSON run configuration: data layout, roles, analysis toggles, LLM.

use std::collections::BTreeMap;
use std::path::Path;

use causalfair_core::{
    BinRule, Binarization, BinningSpec, ColumnKind, ColumnSpec, SfmRoles, Weighting, DEFAULT_ALPHA, DEFAULT_CAP,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::LlmConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Explicit column declarations; role columns not listed are categorical
    /// (numeric when they are binned or swept).
    #[serde(default)]
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub bins: BinningSpec,
    #[serde(default = "default_missing")]
    pub missing_token: Option<String>,
    pub x: String,
    pub y: String,
    #[serde(default)]
    pub z: Vec<String>,
    #[serde(default)]
    pub w: Vec<String>,
    pub x0_states: Vec<String>,
    pub x1_states: Vec<String>,
    #[serde(default)]
    pub y_target: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub cap: Option<u128>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub llm: LlmConfig,
}

fn default_missing() -> Option<String> {
    Some("?".to_string())
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Per-mediator and per-confounder decompositions.
    #[serde(default = "yes")]
    pub decompositions: bool,
    #[serde(default)]
    pub mediator_order: Option<Vec<String>>,
    #[serde(default)]
    pub confounder_order: Option<Vec<String>>,
    #[serde(default = "yes")]
    pub z_specific: bool,
    /// Groups for the pairwise table; defaults to the role groups when
    /// either of them has more than one state.
    #[serde(default)]
    pub pairs: Option<PairsConfig>,
    #[serde(default)]
    pub weighting: Weighting,
    /// Ordered X states for the stepwise decomposition.
    #[serde(default)]
    pub stepwise: Option<Vec<String>>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Also write per-ordering spreads of the decompositions.
    #[serde(default)]
    pub sensitivity: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            decompositions: true,
            mediator_order: None,
            confounder_order: None,
            z_specific: true,
            pairs: None,
            weighting: Weighting::default(),
            stepwise: None,
            sweep: None,
            sensitivity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsConfig {
    pub x0_states: Vec<String>,
    pub x1_states: Vec<String>,
}

/// Threshold sweep over a numeric outcome. Role fields left out are taken
/// from the top level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub y: Option<String>,
    #[serde(default)]
    pub z: Option<Vec<String>>,
    #[serde(default)]
    pub w: Option<Vec<String>>,
    #[serde(default)]
    pub x0_states: Option<Vec<String>>,
    #[serde(default)]
    pub x1_states: Option<Vec<String>>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub binarization: Binarization,
    #[serde(default)]
    pub selected_threshold: Option<f64>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn roles(&self) -> SfmRoles {
        let mut r = SfmRoles::new(&self.x, &self.y)
            .confounders(self.z.clone())
            .mediators(self.w.clone())
            .groups(self.x0_states.clone(), self.x1_states.clone());
        r.y_target = self.y_target.clone();
        r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    pub fn cap(&self) -> u128 {
        self.cap.unwrap_or(DEFAULT_CAP)
    }

    /// Roles of the threshold sweep.
    pub fn sweep_roles(&self) -> SfmRoles {
        let s = self.analysis.sweep.clone().unwrap_or_default();
        let mut r = self.roles();
        if let Some(y) = s.y {
            r.y = y;
        }
        if let Some(z) = s.z {
            r.z = z;
        }
        if let Some(w) = s.w {
            r.w = w;
        }
        if let Some(x0) = s.x0_states {
            r.x0_states = x0;
        }
        if let Some(x1) = s.x1_states {
            r.x1_states = x1;
        }
        r.y_target = None;
        r
    }

    /// Column declarations for every column `roles` touches.
    pub fn column_specs(&self, roles: &SfmRoles, numeric: &[&str]) -> Vec<ColumnSpec> {
        let explicit: BTreeMap<&str, &ColumnSpec> = self.columns.iter().map(|c| (c.name.as_str(), c)).collect();
        roles
            .ordered_columns()
            .into_iter()
            .map(|name| match explicit.get(name) {
                Some(c) => (*c).clone(),
                None if numeric.contains(&name) || self.bins.get(name).is_some_and(|r| *r != BinRule::Passthrough) => {
                    ColumnSpec::new(name, ColumnKind::Continuous)
                }
                None => ColumnSpec::categorical(name),
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let roles = self.roles();
        if let Some(msg) = roles.structural_errors().into_iter().next() {
            return Err(Error::config("x0_states", msg));
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::config("alpha", "must be finite and non-negative"));
            }
        }
        for c in &self.columns {
            c.validate()
                .map_err(|e| Error::config(format!("columns.{}", c.name), e.to_string()))?;
        }
        let check_order = |field: &str, order: &Option<Vec<String>>, names: &[String]| -> Result<()> {
            if let Some(o) = order {
                let mut a = o.clone();
                let mut b = names.to_vec();
                a.sort();
                b.sort();
                if a != b {
                    return Err(Error::config(field, "must be a permutation of the role variables"));
                }
            }
            Ok(())
        };
        check_order("analysis.mediator_order", &self.analysis.mediator_order, &self.w)?;
        check_order("analysis.confounder_order", &self.analysis.confounder_order, &self.z)?;
        if let Some(s) = &self.analysis.stepwise {
            if s.len() < 2 {
                return Err(Error::config("analysis.stepwise", "needs at least two states"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"x": "sex", "y": "income", "z": ["relationship"], "w": ["hours"],
        "x0_states": ["Male"], "x1_states": ["Female"], "y_target": "<=50K",
        "bins": {"hours": {"explicit_edges": [20, 40, 60, 80]}}}"#;

    #[test]
    fn parses_and_derives_specs() {
        let c = Config::from_json(BASE).unwrap();
        let specs = c.column_specs(&c.roles(), &[]);
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[2].kind, ColumnKind::Continuous);
        assert_eq!(c.alpha(), 1.0);
        assert!(c.analysis.decompositions);
        assert_eq!(c.llm.timeout_secs, 120);
    }

    #[test]
    fn missing_field_names_the_field() {
        let e = Config::from_json(r#"{"x": "a", "x0_states": ["0"], "x1_states": ["1"]}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("`y`"), "{e}");
    }

    #[test]
    fn nested_type_error_carries_path() {
        let text = BASE.replace(r#""bins""#, r#""analysis": {"stepwise": 3}, "bins""#);
        let e = Config::from_json(&text).unwrap_err();
        assert!(e.to_string().contains("analysis.stepwise"), "{e}");
    }

    #[test]
    fn bad_mediator_order_is_rejected() {
        let text = BASE.replace(r#""bins""#, r#""analysis": {"mediator_order": ["x"]}, "bins""#);
        assert!(Config::from_json(&text).is_err());
    }
}
