//! The five fairness descriptors of a binary contrast and their ledger.
//!
//! Every descriptor is obtained as a difference of two quantities of the
//! form `Σ_z P̂(z) Σ_w P̂(w|x_w,z) P̂(y|x_y,z,w)`, written `Q(x_y, x_w)`:
//!
//! * `TE = Q(x₁,x₁) − Q(x₀,x₀)`
//! * `DE = Q(x₁,x₀) − Q(x₀,x₀)`
//! * `IE_{x₀,x₁} = Q(x₀,x₁) − Q(x₀,x₀)`
//!
//! while `TV` is the plain observational difference and `SE = TV − TE`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::SfmEstimator;
use crate::roles::SfmRoles;

pub(crate) const IDENTITY_TOL: f64 = 1e-9;
const RANGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contrast {
    pub x0: String,
    pub x1: String,
    pub y: String,
}

impl Contrast {
    pub fn new(x0: impl Into<String>, x1: impl Into<String>, y: impl Into<String>) -> Self {
        Self {
            x0: x0.into(),
            x1: x1.into(),
            y: y.into(),
        }
    }

    /// The contrast named by singleton groups and `y_target`.
    pub fn from_roles(roles: &SfmRoles) -> Result<Self> {
        match (&roles.x0_states[..], &roles.x1_states[..], &roles.y_target) {
            ([x0], [x1], Some(y)) => Ok(Self::new(x0.clone(), x1.clone(), y.clone())),
            (_, _, None) => Err(Error::InvalidRoles("y_target is required".into())),
            _ => Err(Error::InvalidRoles(
                "a single contrast needs exactly one state in x0_states and x1_states".into(),
            )),
        }
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.x1.clone(), self.x0.clone(), self.y.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Tv,
    Te,
    Se,
    De,
    /// `IE_{x₀,x₁}` as given by the contrast.
    Ie,
    /// `IE_{x₁,x₀}`, the form entering `TE = DE − IE_{x₁,x₀}`.
    IeReversed,
}

impl EffectKind {
    pub const ALL: [EffectKind; 6] = [
        EffectKind::Tv,
        EffectKind::Te,
        EffectKind::Se,
        EffectKind::De,
        EffectKind::Ie,
        EffectKind::IeReversed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EffectKind::Tv => "tv",
            EffectKind::Te => "te",
            EffectKind::Se => "se",
            EffectKind::De => "de",
            EffectKind::Ie => "ie",
            EffectKind::IeReversed => "ie_reversed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub tv_minus_te_minus_se: f64,
    pub te_minus_de_plus_ie_rev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerMetadata {
    pub n_rows: usize,
    pub alpha: f64,
    pub roles_digest: String,
}

impl LedgerMetadata {
    pub fn of(e: &SfmEstimator) -> Self {
        Self {
            n_rows: crate::util::count(e.n_rows()),
            alpha: e.alpha(),
            roles_digest: e.roles().digest(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectLedger {
    pub tv: f64,
    pub te: f64,
    pub se: f64,
    pub de: f64,
    pub ie: f64,
    pub ie_reversed: f64,
    pub identity_residuals: IdentityResiduals,
    pub contrast: Contrast,
    pub metadata: LedgerMetadata,
}

impl EffectLedger {
    /// Assembles a ledger, deriving `se` and failing closed on identity or
    /// range violations.
    pub fn from_parts(
        tv: f64,
        te: f64,
        de: f64,
        ie: f64,
        ie_reversed: f64,
        contrast: Contrast,
        metadata: LedgerMetadata,
    ) -> Result<Self> {
        let se = tv - te;
        let ledger = Self {
            tv,
            te,
            se,
            de,
            ie,
            ie_reversed,
            identity_residuals: IdentityResiduals {
                tv_minus_te_minus_se: tv - te - se,
                te_minus_de_plus_ie_rev: te - (de - ie_reversed),
            },
            contrast,
            metadata,
        };
        ledger.check()?;
        Ok(ledger)
    }

    /// Re-checks the decomposition identities and value ranges.
    pub fn check(&self) -> Result<()> {
        for v in self.values() {
            if v.is_nan() {
                return Err(Error::UnidentifiableCell("effect evaluated to NaN".into()));
            }
            if v.abs() > 1.0 + RANGE_TOL {
                return Err(Error::IdentityBreach {
                    identity: "range [-1, 1]",
                    residual: v.abs() - 1.0,
                });
            }
        }
        let r = self.tv - self.te - self.se;
        if r.abs() > IDENTITY_TOL {
            return Err(Error::IdentityBreach {
                identity: "tv = te + se",
                residual: r,
            });
        }
        let r = self.te - (self.de - self.ie_reversed);
        if !(r.abs() <= IDENTITY_TOL) {
            return Err(Error::IdentityBreach {
                identity: "te = de - ie_reversed",
                residual: r,
            });
        }
        Ok(())
    }

    pub fn get(&self, kind: EffectKind) -> f64 {
        match kind {
            EffectKind::Tv => self.tv,
            EffectKind::Te => self.te,
            EffectKind::Se => self.se,
            EffectKind::De => self.de,
            EffectKind::Ie => self.ie,
            EffectKind::IeReversed => self.ie_reversed,
        }
    }

    fn values(&self) -> [f64; 6] {
        [self.tv, self.te, self.se, self.de, self.ie, self.ie_reversed]
    }
}

/// Per-x factor tables for one X state.
pub(crate) struct Arm {
    pub(crate) px_z: Vec<f64>,
    /// P̂(w|x,z), `z * |W| + w`.
    pub(crate) pw: Vec<f64>,
    /// P̂(y|x,z,w), `(z * |W| + w) * |Y| + y`.
    pub(crate) py: Vec<f64>,
}

impl Arm {
    pub(crate) fn new(e: &SfmEstimator, x: usize) -> Self {
        Self {
            px_z: e.p_x_given_z(x),
            pw: e.p_w_given_xz(x),
            py: e.p_y_given_xzw(x),
        }
    }
}

/// Shared tables for evaluating many quantities on one estimator.
pub(crate) struct Tables {
    pub(crate) nz: usize,
    pub(crate) nw: usize,
    pub(crate) ny: usize,
    pub(crate) pz: Vec<f64>,
    arms: Vec<Option<Arm>>,
}

impl Tables {
    pub(crate) fn new(e: &SfmEstimator) -> Self {
        Self {
            nz: e.z_card(),
            nw: e.w_card(),
            ny: e.y_card(),
            pz: e.p_z(),
            arms: (0..e.x_card()).map(|_| None).collect(),
        }
    }

    pub(crate) fn arm(&mut self, e: &SfmEstimator, x: usize) -> &Arm {
        self.arms[x].get_or_insert_with(|| Arm::new(e, x))
    }

    fn ensure(&mut self, e: &SfmEstimator, xs: &[usize]) {
        for &x in xs {
            self.arm(e, x);
        }
    }

    pub(crate) fn get(&self, x: usize) -> &Arm {
        self.arms[x].as_ref().expect("arm prepared")
    }

    /// `Q(x_y, x_w)` per y for the single stratum z (unweighted by P̂(z)).
    pub(crate) fn q_z(&self, z: usize, x_y: usize, x_w: usize, out: &mut [f64]) {
        let (ay, aw) = (self.get(x_y), self.get(x_w));
        out.iter_mut().for_each(|o| *o = 0.0);
        for w in 0..self.nw {
            let pw = aw.pw[z * self.nw + w];
            if pw == 0.0 {
                continue;
            }
            let base = (z * self.nw + w) * self.ny;
            for (y, o) in out.iter_mut().enumerate() {
                *o += pw * ay.py[base + y];
            }
        }
    }

    /// `Q(x_y, x_w)` per y.
    pub(crate) fn q(&self, x_y: usize, x_w: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ny];
        let mut tmp = vec![0.0; self.ny];
        for z in 0..self.nz {
            let pz = self.pz[z];
            if pz == 0.0 {
                continue;
            }
            self.q_z(z, x_y, x_w, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += pz * t;
            }
        }
        out
    }

    /// Observational P̂(y | x) per y.
    pub(crate) fn p_y_given_x(&self, x: usize) -> Vec<f64> {
        let mut num = vec![0.0; self.ny];
        let mut tmp = vec![0.0; self.ny];
        let mut den = 0.0;
        let arm = self.get(x);
        for z in 0..self.nz {
            let wz = self.pz[z] * arm.px_z[z];
            if wz == 0.0 {
                continue;
            }
            den += wz;
            self.q_z(z, x, x, &mut tmp);
            for (n, t) in num.iter_mut().zip(&tmp) {
                *n += wz * t;
            }
        }
        num.iter().map(|n| if den > 0.0 { n / den } else { f64::NAN }).collect()
    }
}

/// Per-y values of every descriptor for one contrast of X indices.
#[derive(Debug, Clone)]
pub(crate) struct EffectVectors {
    pub(crate) tv: Vec<f64>,
    pub(crate) te: Vec<f64>,
    pub(crate) de: Vec<f64>,
    pub(crate) ie: Vec<f64>,
    pub(crate) ie_reversed: Vec<f64>,
}

impl EffectVectors {
    pub(crate) fn compute(e: &SfmEstimator, t: &mut Tables, x0: usize, x1: usize) -> Self {
        t.ensure(e, &[x0, x1]);
        let diff = |a: Vec<f64>, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a - b).collect() };
        let q00 = t.q(x0, x0);
        let q11 = t.q(x1, x1);
        let q10 = t.q(x1, x0);
        let q01 = t.q(x0, x1);
        Self {
            tv: diff(t.p_y_given_x(x1), &t.p_y_given_x(x0)),
            te: diff(q11.clone(), &q00),
            de: diff(q10.clone(), &q00),
            ie: diff(q01, &q00),
            ie_reversed: diff(q10, &q11),
        }
    }

    pub(crate) fn kind(&self, kind: EffectKind) -> Vec<f64> {
        match kind {
            EffectKind::Tv => self.tv.clone(),
            EffectKind::Te => self.te.clone(),
            EffectKind::Se => self.tv.iter().zip(&self.te).map(|(a, b)| a - b).collect(),
            EffectKind::De => self.de.clone(),
            EffectKind::Ie => self.ie.clone(),
            EffectKind::IeReversed => self.ie_reversed.clone(),
        }
    }
}

pub(crate) struct Resolved {
    pub(crate) x0: usize,
    pub(crate) x1: usize,
    pub(crate) y: usize,
}

pub(crate) fn resolve(e: &SfmEstimator, c: &Contrast) -> Result<Resolved> {
    Ok(Resolved {
        x0: e.x_index(&c.x0)?,
        x1: e.x_index(&c.x1)?,
        y: e.y_index(&c.y)?,
    })
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_nan() {
        Err(Error::UnidentifiableCell(what.to_string()))
    } else {
        Ok(v)
    }
}

/// Any single descriptor at the contrast's target state.
pub fn effect(e: &SfmEstimator, c: &Contrast, kind: EffectKind) -> Result<f64> {
    let r = resolve(e, c)?;
    let mut t = Tables::new(e);
    let v = EffectVectors::compute(e, &mut t, r.x0, r.x1);
    finite(v.kind(kind)[r.y], kind.label())
}

pub fn total_variation(e: &SfmEstimator, c: &Contrast) -> Result<f64> {
    effect(e, c, EffectKind::Tv)
}

pub fn total_effect(e: &SfmEstimator, c: &Contrast) -> Result<f64> {
    effect(e, c, EffectKind::Te)
}

pub fn spurious_effect(e: &SfmEstimator, c: &Contrast) -> Result<f64> {
    effect(e, c, EffectKind::Se)
}

pub fn direct_effect(e: &SfmEstimator, c: &Contrast) -> Result<f64> {
    effect(e, c, EffectKind::De)
}

/// `IE_{x₀,x₁}`, or `IE_{x₁,x₀}` when `reversed`.
pub fn indirect_effect(e: &SfmEstimator, c: &Contrast, reversed: bool) -> Result<f64> {
    effect(
        e,
        c,
        if reversed {
            EffectKind::IeReversed
        } else {
            EffectKind::Ie
        },
    )
}

pub fn effect_ledger(e: &SfmEstimator, c: &Contrast) -> Result<EffectLedger> {
    let r = resolve(e, c)?;
    let mut t = Tables::new(e);
    ledger_from(e, &mut t, c, &r)
}

pub(crate) fn ledger_from(e: &SfmEstimator, t: &mut Tables, c: &Contrast, r: &Resolved) -> Result<EffectLedger> {
    let v = EffectVectors::compute(e, t, r.x0, r.x1);
    EffectLedger::from_parts(
        v.tv[r.y],
        v.te[r.y],
        v.de[r.y],
        v.ie[r.y],
        v.ie_reversed[r.y],
        c.clone(),
        LedgerMetadata::of(e),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSpec, Dataset, DatasetBuilder};

    fn data(rows: &[[&str; 4]]) -> Dataset {
        let mut b = DatasetBuilder::new(vec![
            ColumnSpec::categorical("z"),
            ColumnSpec::categorical("x"),
            ColumnSpec::categorical("w"),
            ColumnSpec::categorical("y"),
        ])
        .unwrap();
        for r in rows {
            b.push_record(r).unwrap();
        }
        b.finish().unwrap()
    }

    fn toy() -> Dataset {
        data(&[
            ["z", "a", "w", "0"],
            ["z", "a", "w", "1"],
            ["z", "b", "w", "1"],
            ["z", "b", "w", "1"],
        ])
    }

    #[test]
    fn toy_total_variation() {
        let r = SfmRoles::new("x", "y").groups(["a"], ["b"]);
        let e = SfmEstimator::fit(&toy(), &r, 1.0).unwrap();
        let c = Contrast::new("a", "b", "1");
        assert!((total_variation(&e, &c).unwrap() - 0.25).abs() < 1e-15);
        let l = effect_ledger(&e, &c).unwrap();
        assert_eq!(l.tv, l.te);
        assert_eq!(l.se, 0.0);
        assert_eq!(l.ie, 0.0);
        assert_eq!(l.de, l.te);
        assert_eq!(l.metadata.n_rows, 4);
    }

    #[test]
    fn identical_groups_are_zero() {
        let r = SfmRoles::new("x", "y").groups(["a"], ["b"]);
        let e = SfmEstimator::fit(&toy(), &r, 1.0).unwrap();
        let l = effect_ledger(&e, &Contrast::new("a", "a", "1")).unwrap();
        assert_eq!([l.tv, l.te, l.se, l.de, l.ie, l.ie_reversed], [0.0; 6]);
    }

    #[test]
    fn collapses_without_confounders_or_mediators() {
        let d = data(&[
            ["p", "a", "u", "0"],
            ["q", "a", "v", "1"],
            ["q", "b", "u", "1"],
            ["p", "b", "v", "0"],
            ["q", "b", "v", "1"],
            ["p", "a", "u", "1"],
        ]);
        let c = Contrast::new("a", "b", "1");
        let full = SfmRoles::new("x", "y")
            .confounders(["z"])
            .mediators(["w"])
            .groups(["a"], ["b"]);
        let e = SfmEstimator::fit(&d, &full, 1.0).unwrap();
        let l = effect_ledger(&e, &c).unwrap();
        assert!(l.identity_residuals.te_minus_de_plus_ie_rev.abs() < 1e-12);
        assert_eq!(l.identity_residuals.tv_minus_te_minus_se, 0.0);

        let no_w = SfmRoles::new("x", "y").confounders(["z"]).groups(["a"], ["b"]);
        let e = SfmEstimator::fit(&d, &no_w, 1.0).unwrap();
        let l = effect_ledger(&e, &c).unwrap();
        assert!((l.de - l.te).abs() < 1e-15);
        assert_eq!(l.ie, 0.0);

        let no_z = SfmRoles::new("x", "y").mediators(["w"]).groups(["a"], ["b"]);
        let e = SfmEstimator::fit(&d, &no_z, 1.0).unwrap();
        let l = effect_ledger(&e, &c).unwrap();
        assert!((l.tv - l.te).abs() < 1e-15);
    }

    #[test]
    fn unknown_states_rejected() {
        let r = SfmRoles::new("x", "y").groups(["a"], ["b"]);
        let e = SfmEstimator::fit(&toy(), &r, 1.0).unwrap();
        assert!(matches!(
            total_effect(&e, &Contrast::new("a", "c", "1")),
            Err(Error::UnknownState { .. })
        ));
        assert!(matches!(
            total_effect(&e, &Contrast::new("a", "b", "7")),
            Err(Error::UnknownState { .. })
        ));
    }

    #[test]
    fn ledger_rejects_breach() {
        let c = Contrast::new("a", "b", "1");
        let m = LedgerMetadata {
            n_rows: 1,
            alpha: 1.0,
            roles_digest: String::new(),
        };
        assert!(matches!(
            EffectLedger::from_parts(0.1, 0.1, 0.2, 0.0, 0.0, c.clone(), m.clone()),
            Err(Error::IdentityBreach { .. })
        ));
        assert!(EffectLedger::from_parts(0.1, 0.1, 0.2, 0.0, 0.1, c, m).is_ok());
    }
}
