use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Column, ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::util::fmt_num;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinRule {
    EqualWidth(usize),
    /// Strictly ascending cut points; bins are half-open `[lo, hi)`.
    ExplicitEdges(Vec<f64>),
    Passthrough,
}

impl BinRule {
    fn validate(&self, column: &str) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidBinning {
            column: column.to_string(),
            reason: reason.to_string(),
        };
        match self {
            BinRule::EqualWidth(n) if *n < 2 => Err(invalid("equal_width needs at least 2 bins")),
            BinRule::ExplicitEdges(edges) => {
                if edges.is_empty() {
                    return Err(invalid("explicit_edges is empty"));
                }
                if edges.iter().any(|e| !e.is_finite()) {
                    return Err(invalid("non-finite edge"));
                }
                if edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("edges must be strictly ascending"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Per-column binning rules; columns not listed pass through.
pub type BinningSpec = BTreeMap<String, BinRule>;

/// Replaces every binned numeric column by ordinal bin labels.
pub fn discretize(d: &Dataset, spec: &BinningSpec) -> Result<Dataset> {
    let mut out = d.clone();
    for (name, rule) in spec {
        rule.validate(name)?;
        if *rule == BinRule::Passthrough {
            continue;
        }
        let column = d.require_column(name)?;
        let binned = bin_column(column, rule)?;
        out = out.with_column(binned)?;
    }
    Ok(out)
}

fn bin_column(column: &Column, rule: &BinRule) -> Result<Column> {
    let values = column
        .numeric_values()
        .filter(|_| column.kind().is_numeric() || column.kind() == ColumnKind::Categorical)
        .ok_or_else(|| Error::NonNumericColumn(column.name().to_string()))?;
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });

    let (edges, labels): (Vec<f64>, Vec<String>) = match rule {
        BinRule::EqualWidth(n) => {
            let width = (max - min) / *n as f64;
            let edges: Vec<f64> = (1..*n).map(|k| min + width * k as f64).collect();
            let mut bounds = Vec::with_capacity(n + 1);
            bounds.push(min);
            bounds.extend_from_slice(&edges);
            bounds.push(max);
            let labels = if width > 0.0 {
                bounds
                    .windows(2)
                    .map(|w| format!("{}–{}", fmt_num(w[0]), fmt_num(w[1])))
                    .collect()
            } else {
                // Zero spread: one populated bin, the rest kept as empty placeholders.
                (0..*n)
                    .map(|k| if k == 0 { fmt_num(min) } else { format!("empty {k}") })
                    .collect()
            };
            (edges, labels)
        }
        BinRule::ExplicitEdges(edges) => {
            let lower = if min >= 0.0 { 0.0 } else { min };
            let mut labels = Vec::with_capacity(edges.len() + 1);
            let mut lo = lower;
            for &e in edges {
                labels.push(format!("{}–{}", fmt_num(lo), fmt_num(e)));
                lo = e;
            }
            labels.push(format!("{}+", fmt_num(lo)));
            (edges.clone(), labels)
        }
        BinRule::Passthrough => unreachable!("passthrough handled by caller"),
    };

    let state_bin: Vec<u32> = values
        .iter()
        .map(|&v| match rule {
            BinRule::EqualWidth(n) => {
                let width = (max - min) / *n as f64;
                if width <= 0.0 {
                    0
                } else {
                    // Boundary values land in the upper bin, the maximum in the last.
                    let idx = edges.iter().take_while(|&&e| v >= e).count();
                    idx.min(n - 1) as u32
                }
            }
            _ => edges.iter().take_while(|&&e| v >= e).count() as u32,
        })
        .collect();
    let codes = column.codes().iter().map(|&c| state_bin[c as usize]).collect();
    Ok(Column::new(column.name(), ColumnKind::Ordinal, labels, codes)?.with_bin_edges(edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSpec, DatasetBuilder};
    use alloc::vec;

    fn numeric(values: &[f64]) -> Dataset {
        let mut b = DatasetBuilder::new(vec![ColumnSpec::continuous("h")]).unwrap();
        for v in values {
            b.push_record(&[format!("{v}")]).unwrap();
        }
        b.finish().unwrap()
    }

    fn counts(d: &Dataset) -> Vec<usize> {
        d.column("h").unwrap().state_counts()
    }

    #[test]
    fn twenty_hour_bins() {
        let d = numeric(&[1.0, 19.0, 20.0, 40.0, 45.0, 79.0, 80.0, 99.0]);
        let spec = BinningSpec::from([("h".into(), BinRule::ExplicitEdges(vec![20.0, 40.0, 60.0, 80.0]))]);
        let b = discretize(&d, &spec).unwrap();
        let col = b.column("h").unwrap();
        assert_eq!(col.states(), ["0–20", "20–40", "40–60", "60–80", "80+"]);
        assert_eq!(col.kind(), ColumnKind::Ordinal);
        assert_eq!(col.bin_edges(), Some(&[20.0, 40.0, 60.0, 80.0][..]));
        assert_eq!(counts(&b), [2, 1, 2, 1, 2]);
    }

    #[test]
    fn equal_width_hand_count() {
        let vals: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let b = discretize(
            &numeric(&vals),
            &BinningSpec::from([("h".into(), BinRule::EqualWidth(4))]),
        )
        .unwrap();
        assert_eq!(counts(&b), [25, 25, 25, 25]);
        assert_eq!(b.column("h").unwrap().bin_edges(), Some(&[25.75, 50.5, 75.25][..]));
    }

    #[test]
    fn constant_column_one_empty_bin() {
        let b = discretize(
            &numeric(&[3.0, 3.0, 3.0]),
            &BinningSpec::from([("h".into(), BinRule::EqualWidth(2))]),
        )
        .unwrap();
        assert_eq!(counts(&b), [3, 0]);
    }

    #[test]
    fn rejects_bad_specs() {
        let d = numeric(&[1.0, 2.0]);
        let bad = BinningSpec::from([("h".into(), BinRule::ExplicitEdges(vec![2.0, 2.0]))]);
        assert!(matches!(discretize(&d, &bad), Err(Error::InvalidBinning { .. })));
        let bad = BinningSpec::from([("h".into(), BinRule::EqualWidth(1))]);
        assert!(matches!(discretize(&d, &bad), Err(Error::InvalidBinning { .. })));

        let mut b = DatasetBuilder::new(vec![ColumnSpec::categorical("c")]).unwrap();
        b.push_record(&["red"]).unwrap();
        let d = b.finish().unwrap();
        let spec = BinningSpec::from([("c".into(), BinRule::EqualWidth(2))]);
        assert_eq!(discretize(&d, &spec), Err(Error::NonNumericColumn("c".into())));
    }
}
