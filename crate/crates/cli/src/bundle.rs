//! The report bundle: the JSON contract handed to reporting.

use std::fmt;

use causalfair_core::{EffectLedger, SfmRoles};
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

/// Identity tolerance for bundles read back from JSON, whose values carry
/// up to three rounding errors of 5e-5 each.
pub const ROUNDED_TOL: f64 = 2e-4;

/// A number kept at full precision and written with at most four decimals.
#[derive(Debug, Clone, Copy, Default)]
pub struct Num(pub f64);

impl Num {
    pub fn rounded(self) -> f64 {
        let r = (self.0 * 1e4).round() / 1e4;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.rounded() == other.rounded()
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite number in report bundle"));
        }
        s.serialize_f64(self.rounded())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() {
            return Err(serde::de::Error::custom("number must be finite"));
        }
        let scaled = v * 1e4;
        if (scaled - scaled.round()).abs() > 1e-6 * scaled.abs().max(1.0) {
            return Err(serde::de::Error::custom(format!("{v} has more than 4 decimal digits")));
        }
        Ok(Num(v))
    }
}

/// A JSON object whose key order is preserved (role order, not alphabetical).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedMap<V>(pub Vec<(String, V)>);

impl<V> OrderedMap<V> {
    pub fn get(&self, key: &str) -> Option<&V> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl<V: Serialize> Serialize for OrderedMap<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for OrderedMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V_<V>(std::marker::PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V_<V> {
            type Value = OrderedMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = a.next_entry::<String, V>()? {
                    if out.iter().any(|(o, _): &(String, V)| *o == k) {
                        return Err(serde::de::Error::custom(format!("duplicate key `{k}`")));
                    }
                    out.push((k, v));
                }
                Ok(OrderedMap(out))
            }
        }
        d.deserialize_map(V_(std::marker::PhantomData))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeType {
    Binary,
    Categorical,
    Continuous,
}

/// Headline descriptors. `ie` is the indirect effect with baseline `x1`
/// (IE_{x1,x0}), so that `te = de − ie`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Effects {
    pub tv: Num,
    pub te: Num,
    pub de: Num,
    pub ie: Num,
    pub se: Num,
}

impl From<&EffectLedger> for Effects {
    fn from(l: &EffectLedger) -> Self {
        Self {
            tv: l.tv.into(),
            te: l.te.into(),
            de: l.de.into(),
            ie: l.ie_reversed.into(),
            se: l.se.into(),
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XSpecific {
    pub X_value_pair: [String; 2],
    pub te: Num,
    pub de: Num,
    pub ie: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZSpecific {
    pub z_state: OrderedMap<String>,
    pub te: Num,
    pub de: Num,
    pub ie: Num,
    pub n_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub from: String,
    pub to: String,
    pub te: Num,
    pub tv: Num,
    pub se: Num,
    pub n_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stepwise {
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects_by_step: Option<Vec<StepEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdCurveEntry {
    /// Numeric outcome that was binarized.
    pub y: String,
    pub grid: Vec<Num>,
    pub tv: Vec<Num>,
    pub te: Vec<Num>,
    pub de: Vec<Num>,
    pub ie: Vec<Num>,
    pub se: Vec<Num>,
    pub selected_threshold: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub n_rows: usize,
    pub dropped_rows: usize,
    pub alpha: Num,
    pub roles: SfmRoles,
    pub dataset_digest: String,
    pub ie_direction: String,
}

pub const IE_DIRECTION: &str = "ie values are IE_{x1,x0}(y): baseline x1, mediators switched to their x0 values";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportBundle {
    pub schema_version: String,
    pub x0: String,
    pub x1: String,
    pub y_target: String,
    pub outcome_type: OutcomeType,
    pub effects: Effects,
    pub ie_by_mediator: Option<OrderedMap<Num>>,
    pub se_by_confounder: Option<OrderedMap<Num>>,
    pub x_specific: Option<Vec<XSpecific>>,
    pub z_specific: Option<Vec<ZSpecific>>,
    pub stepwise: Stepwise,
    pub threshold_curve: Option<ThresholdCurveEntry>,
    pub metadata: Metadata,
}

impl ReportBundle {
    /// A bundle holding only the headline ledger; every optional analysis is null.
    pub fn minimal(ledger: &EffectLedger, roles: &SfmRoles, outcome_type: OutcomeType, meta: Metadata) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            x0: ledger.contrast.x0.clone(),
            x1: ledger.contrast.x1.clone(),
            y_target: roles.y_target.clone().unwrap_or_else(|| ledger.contrast.y.clone()),
            outcome_type,
            effects: ledger.into(),
            ie_by_mediator: None,
            se_by_confounder: None,
            x_specific: None,
            z_specific: None,
            stepwise: Stepwise {
                enabled: false,
                effects_by_step: None,
            },
            threshold_curve: None,
            metadata: meta,
        }
    }

    /// Checks the additive identities with tolerance `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let e = &self.effects;
        let breach = |pointer: &str, what: &str, r: f64| Error::Schema {
            pointer: pointer.to_string(),
            message: format!("{what} violated (residual {r:e})"),
        };
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                pointer: "/schema_version".into(),
                message: format!("unsupported schema version `{}`", self.schema_version),
            });
        }
        let r = e.tv.0 - e.te.0 - e.se.0;
        if r.abs() > tol {
            return Err(breach("/effects/se", "tv = te + se", r));
        }
        let r = e.te.0 - (e.de.0 - e.ie.0);
        if r.abs() > tol {
            return Err(breach("/effects/ie", "te = de - ie", r));
        }
        if let Some(m) = &self.ie_by_mediator {
            let r = m.0.iter().map(|(_, v)| v.0).sum::<f64>() - e.ie.0;
            if r.abs() > tol * (m.0.len() as f64 + 1.0) {
                return Err(breach("/ie_by_mediator", "mediator components sum to ie", r));
            }
        }
        if let Some(m) = &self.se_by_confounder {
            let r = m.0.iter().map(|(_, v)| v.0).sum::<f64>() - e.se.0;
            if r.abs() > tol * (m.0.len() as f64 + 1.0) {
                return Err(breach("/se_by_confounder", "confounder components sum to se", r));
            }
        }
        if self.stepwise.enabled != self.stepwise.effects_by_step.is_some() {
            return Err(Error::Schema {
                pointer: "/stepwise/effects_by_step".into(),
                message: "present exactly when stepwise.enabled is true".into(),
            });
        }
        if let Some(c) = &self.threshold_curve {
            let n = c.grid.len();
            for (name, s) in [
                ("tv", &c.tv),
                ("te", &c.te),
                ("de", &c.de),
                ("ie", &c.ie),
                ("se", &c.se),
            ] {
                if s.len() != n {
                    return Err(Error::Schema {
                        pointer: format!("/threshold_curve/{name}"),
                        message: format!("length {} differs from grid length {n}", s.len()),
                    });
                }
            }
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline; identities are re-checked at
    /// full precision first.
    pub fn to_json(&self) -> Result<String> {
        self.check(1e-9)?;
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Schema {
            pointer: String::new(),
            message: e.to_string(),
        })?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates a bundle; errors name the failing field as a JSON pointer.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let b: ReportBundle = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            pointer: json_pointer(e.path()),
            message: e.into_inner().to_string(),
        })?;
        b.check(ROUNDED_TOL)?;
        Ok(b)
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_serialization_only() {
        assert_eq!(serde_json::to_string(&Num(0.00533)).unwrap(), "0.0053");
        assert_eq!(serde_json::to_string(&Num(-0.00001)).unwrap(), "0.0");
        assert_eq!(serde_json::to_string(&Num(0.17355)).unwrap(), "0.1736");
        assert!(serde_json::from_str::<Num>("0.12345").is_err());
        assert_eq!(Num(0.00533).0, 0.00533);
    }

    #[test]
    fn ordered_map_keeps_order() {
        let m = OrderedMap(vec![("b".to_string(), 1), ("a".to_string(), 2)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"b":1,"a":2}"#);
        assert_eq!(serde_json::from_str::<OrderedMap<i32>>(&s).unwrap(), m);
    }
}
