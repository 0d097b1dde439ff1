//! Plain-text ledger in the usual decomposition-table layout:
//! components indented under the effect they decompose.

use std::fmt::Write;

use causalfair_core::{ConfounderDecomposition, EffectLedger, MediatorDecomposition};

use crate::bundle::Num;

fn fmt4(v: f64) -> String {
    format!("{:.4}", Num(v).rounded())
}

fn pct(v: f64, tv: f64) -> String {
    if tv == 0.0 {
        String::new()
    } else {
        format!("{:.0}", (100.0 * v / tv.abs()).round() + 0.0)
    }
}

pub fn ledger_table(
    l: &EffectLedger,
    mediators: Option<&MediatorDecomposition>,
    confounders: Option<&ConfounderDecomposition>,
) -> String {
    let (x0, x1, y) = (&l.contrast.x0, &l.contrast.x1, &l.contrast.y);
    let fwd = format!("{x0},{x1}");
    let rev = format!("{x1},{x0}");
    let mut rows: Vec<(usize, String, f64, Option<String>)> = vec![
        (0, format!("TV_{{{fwd}}}({y})"), l.tv, Some(pct(l.tv, l.tv))),
        (0, format!("TE_{{{fwd}}}({y})"), l.te, Some(pct(l.te, l.tv))),
        (1, format!("DE_{{{fwd}}}({y})"), l.de, None),
        (1, format!("IE_{{{rev}}}({y})"), l.ie_reversed, None),
    ];
    if let Some(m) = mediators {
        for (w, v) in m.order.iter().zip(&m.components) {
            rows.push((2, format!("-> IE^{{{w}}}_{{{rev}}}({y})"), *v, None));
        }
    }
    rows.push((0, format!("SE_{{{fwd}}}({y})"), l.se, Some(pct(l.se, l.tv))));
    if let Some(c) = confounders {
        for (z, v) in c.order.iter().zip(&c.components) {
            rows.push((1, format!("-> SE^{{{z}}}_{{{fwd}}}({y})"), *v, None));
        }
    }
    let width = rows
        .iter()
        .map(|r| 2 * r.0 + r.1.chars().count())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>9}  {:>9}", "Effect", "Value", "% of |TV|");
    for (depth, label, v, p) in rows {
        let name = format!("{}{}", "  ".repeat(depth), label);
        let _ = writeln!(out, "{name:<width$}  {:>9}  {:>9}", fmt4(v), p.unwrap_or_default());
    }
    let r = &l.identity_residuals;
    let _ = writeln!(
        out,
        "\nidentity residuals: tv-te-se = {:e}, te-(de-ie) = {:e}",
        r.tv_minus_te_minus_se, r.te_minus_de_plus_ie_rev
    );
    out
}
