use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::util::{fnv1a, hex64};

/// Role assignment of the standard fairness model.
///
/// `z` and `w` are taken in the given order as topological orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfmRoles {
    pub x: String,
    pub y: String,
    #[serde(default)]
    pub z: Vec<String>,
    #[serde(default)]
    pub w: Vec<String>,
    pub x0_states: Vec<String>,
    pub x1_states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_target: Option<String>,
}

impl SfmRoles {
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            z: Vec::new(),
            w: Vec::new(),
            x0_states: Vec::new(),
            x1_states: Vec::new(),
            y_target: None,
        }
    }

    pub fn confounders<S: Into<String>>(mut self, z: impl IntoIterator<Item = S>) -> Self {
        self.z = z.into_iter().map(Into::into).collect();
        self
    }

    pub fn mediators<S: Into<String>>(mut self, w: impl IntoIterator<Item = S>) -> Self {
        self.w = w.into_iter().map(Into::into).collect();
        self
    }

    pub fn groups<A: Into<String>, B: Into<String>>(
        mut self,
        x0: impl IntoIterator<Item = A>,
        x1: impl IntoIterator<Item = B>,
    ) -> Self {
        self.x0_states = x0.into_iter().map(Into::into).collect();
        self.x1_states = x1.into_iter().map(Into::into).collect();
        self
    }

    pub fn target(mut self, y: impl Into<String>) -> Self {
        self.y_target = Some(y.into());
        self
    }

    /// Column names in estimation order: Z..., X, W..., Y.
    pub fn ordered_columns(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.z.iter().map(String::as_str).collect();
        v.push(&self.x);
        v.extend(self.w.iter().map(String::as_str));
        v.push(&self.y);
        v
    }

    /// Structural problems that do not depend on the data.
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut seen = BTreeSet::new();
        for name in self.ordered_columns() {
            if !seen.insert(name) {
                errs.push(format!("column `{name}` assigned to more than one role"));
            }
        }
        if self.x0_states.is_empty() {
            errs.push("x0_states is empty".to_string());
        }
        if self.x1_states.is_empty() {
            errs.push("x1_states is empty".to_string());
        }
        for s in &self.x0_states {
            if self.x1_states.contains(s) {
                errs.push(format!("state `{s}` is in both x0_states and x1_states"));
            }
        }
        errs
    }

    pub fn digest(&self) -> String {
        let mut buf = String::new();
        for part in [
            &[self.x.clone()][..],
            &[self.y.clone()][..],
            &self.z,
            &self.w,
            &self.x0_states,
            &self.x1_states,
        ] {
            for p in part {
                buf.push_str(p);
                buf.push('\u{1f}');
            }
            buf.push('\u{1e}');
        }
        if let Some(t) = &self.y_target {
            buf.push_str(t);
        }
        hex64(fnv1a(buf.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub missing_columns: Vec<String>,
    pub role_errors: Vec<String>,
    /// X states named in x0/x1 that are not in the domain of X.
    pub unknown_x_states: Vec<String>,
    /// X states named in x0/x1 with zero observations.
    pub unseen_x_states: Vec<String>,
    pub unknown_y_target: Option<String>,
    /// |Z|·|W|·|Y| over the declared joint domains.
    pub joint_cardinality: u128,
    pub cardinality_cap: u128,
    pub cardinality_warning: bool,
    /// n(x) for every state of X.
    pub marginal_counts: Vec<(String, usize)>,
    pub n_rows: usize,
    pub dropped_rows: usize,
}

impl ValidationReport {
    /// True when the roles can be fitted (warnings aside).
    pub fn is_valid(&self) -> bool {
        self.missing_columns.is_empty()
            && self.role_errors.is_empty()
            && self.unknown_x_states.is_empty()
            && self.unknown_y_target.is_none()
    }

    pub fn count(&self, x_state: &str) -> Option<usize> {
        self.marginal_counts.iter().find(|(s, _)| s == x_state).map(|(_, n)| *n)
    }
}

/// Report-only validation of `roles` against `d`.
pub fn validate_roles(d: &Dataset, roles: &SfmRoles, cap: u128) -> ValidationReport {
    let missing_columns: Vec<String> = roles
        .ordered_columns()
        .into_iter()
        .filter(|c| d.column(c).is_none())
        .map(ToString::to_string)
        .collect();

    let mut unknown_x_states = Vec::new();
    let mut unseen_x_states = Vec::new();
    let mut marginal_counts = Vec::new();
    if let Some(xcol) = d.column(&roles.x) {
        let counts = xcol.state_counts();
        for (s, n) in xcol.states().iter().zip(&counts) {
            marginal_counts.push((s.clone(), *n));
        }
        for s in roles.x0_states.iter().chain(&roles.x1_states) {
            match xcol.state_index(s) {
                None => unknown_x_states.push(s.clone()),
                Some(i) if counts[i] == 0 => unseen_x_states.push(s.clone()),
                Some(_) => {}
            }
        }
    }

    let unknown_y_target = match (&roles.y_target, d.column(&roles.y)) {
        (Some(t), Some(ycol)) if ycol.state_index(t).is_none() => Some(t.clone()),
        _ => None,
    };

    let joint_cardinality = roles
        .z
        .iter()
        .chain(&roles.w)
        .chain(core::iter::once(&roles.y))
        .filter_map(|c| d.column(c))
        .fold(1u128, |acc, c| acc.saturating_mul(c.cardinality() as u128));

    ValidationReport {
        missing_columns,
        role_errors: roles.structural_errors(),
        unknown_x_states,
        unseen_x_states,
        unknown_y_target,
        joint_cardinality,
        cardinality_cap: cap,
        cardinality_warning: joint_cardinality > cap,
        marginal_counts,
        n_rows: d.n_rows(),
        dropped_rows: d.dropped_rows(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, ColumnKind};
    use alloc::vec;

    fn column(name: &str, card: usize, n: usize) -> Column {
        let states = (0..card).map(|i| format!("s{i}")).collect();
        let codes = (0..n).map(|i| (i % card) as u32).collect();
        Column::new(name, ColumnKind::Categorical, states, codes).unwrap()
    }

    #[test]
    fn missing_column_reported() {
        let d = Dataset::new(vec![column("x", 2, 4), column("y", 2, 4)]).unwrap();
        let r = SfmRoles::new("x", "y").mediators(["wage"]).groups(["s0"], ["s1"]);
        let rep = validate_roles(&d, &r, 1_000_000);
        assert_eq!(rep.missing_columns, ["wage"]);
        assert!(!rep.is_valid());
    }

    #[test]
    fn cardinality_without_warning() {
        let d = Dataset::new(vec![
            column("x", 2, 60),
            column("z", 6, 60),
            column("w", 5, 60),
            column("y", 2, 60),
        ])
        .unwrap();
        let r = SfmRoles::new("x", "y")
            .confounders(["z"])
            .mediators(["w"])
            .groups(["s0"], ["s1"]);
        let rep = validate_roles(&d, &r, 1_000_000);
        assert_eq!(rep.joint_cardinality, 60);
        assert!(!rep.cardinality_warning);
        assert!(rep.is_valid());
        assert_eq!(rep.count("s0"), Some(30));
        assert!(validate_roles(&d, &r, 59).cardinality_warning);
    }

    #[test]
    fn overlapping_and_duplicate_roles() {
        let d = Dataset::new(vec![column("x", 3, 6), column("y", 2, 6)]).unwrap();
        let r = SfmRoles::new("x", "y").confounders(["x"]).groups(["s0", "s1"], ["s1"]);
        let rep = validate_roles(&d, &r, 100);
        assert_eq!(rep.role_errors.len(), 2);
        let r = SfmRoles::new("x", "y").groups(["s0"], ["nope"]).target("maybe");
        let rep = validate_roles(&d, &r, 100);
        assert_eq!(rep.unknown_x_states, ["nope"]);
        assert_eq!(rep.unknown_y_target.as_deref(), Some("maybe"));
    }
}
