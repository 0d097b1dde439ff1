//! Per-mediator, per-confounder, per-stratum and per-pair refinements.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::effects::{ledger_from, resolve, Contrast, EffectLedger, Tables, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::estimator::SfmEstimator;
use crate::util::{checked_cardinality, unravel};

/// Orderings are enumerated exhaustively up to this many (7!).
pub const MAX_EXHAUSTIVE_ORDERINGS: usize = 5040;
/// Random orderings drawn beyond the exhaustive limit.
pub const SAMPLED_ORDERINGS: usize = 100;
/// Spread above which a component is reported as order-dependent.
pub const ORDER_SPREAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatorDecomposition {
    pub order: Vec<String>,
    pub components: Vec<f64>,
    pub total_ie: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfounderDecomposition {
    pub order: Vec<String>,
    pub components: Vec<f64>,
    pub total_se: f64,
    pub residual: f64,
}

fn permutation_of<'a>(order: &[&str], declared: impl Iterator<Item = &'a str>, what: &str) -> Result<Vec<usize>> {
    let declared: Vec<&str> = declared.collect();
    let mut perm = Vec::with_capacity(order.len());
    for name in order {
        match declared.iter().position(|d| d == name) {
            Some(p) if !perm.contains(&p) => perm.push(p),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "order is not a permutation of the {what}"
                )))
            }
        }
    }
    if perm.len() != declared.len() {
        return Err(Error::InvalidArgument(format!(
            "order is not a permutation of the {what}"
        )));
    }
    Ok(perm)
}

/// For every joint index over `cards` and every prefix length `j` of
/// `perm`, the index of the projection onto `perm[..j]`.
fn prefix_indices(cards: &[usize], perm: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let total: usize = cards.iter().product();
    let k = perm.len();
    let mut sizes = vec![1usize; k + 1];
    for j in 0..k {
        sizes[j + 1] = sizes[j] * cards[perm[j]];
    }
    let mut idx = vec![0usize; total * (k + 1)];
    let mut digits = vec![0usize; cards.len()];
    for v in 0..total {
        unravel(v, cards, &mut digits);
        let mut acc = 0usize;
        for j in 0..k {
            acc = acc * cards[perm[j]] + digits[perm[j]];
            idx[v * (k + 1) + j + 1] = acc;
        }
    }
    (idx, sizes)
}

/// Splits `IE_{x₀,x₁}(y)` into per-mediator components along `order`.
///
/// The i-th component contrasts the nested counterfactuals in which the
/// first `i` (resp. `i−1`) mediators of `order` respond to `x₁`; each
/// factor is conditioned on the confounders, which are then averaged out.
pub fn ie_by_mediator(e: &SfmEstimator, c: &Contrast, order: &[&str]) -> Result<MediatorDecomposition> {
    let perm = permutation_of(order, e.w_names(), "mediators")?;
    let r = resolve(e, c)?;
    let mut t = Tables::new(e);
    t.arm(e, r.x0);
    t.arm(e, r.x1);
    let nested = nested_terms(e, &t, r.x0, r.x1, r.y, &perm)?;
    let components: Vec<f64> = nested.windows(2).map(|w| w[1] - w[0]).collect();
    let total_ie = t.q(r.x0, r.x1)[r.y] - t.q(r.x0, r.x0)[r.y];
    let residual = (components.iter().sum::<f64>() - total_ie).abs();
    if !(residual <= IDENTITY_TOL) {
        return Err(Error::IdentityBreach {
            identity: "sum of per-mediator components = ie",
            residual,
        });
    }
    Ok(MediatorDecomposition {
        order: order.iter().map(|s| s.to_string()).collect(),
        components,
        total_ie,
        residual,
    })
}

/// `nested[i] = P(y_{x_base, (W^{≤i})_{x_alt}, (W^{>i})_{x_base}})` for i = 0..=k.
fn nested_terms(
    e: &SfmEstimator,
    t: &Tables,
    x_base: usize,
    x_alt: usize,
    y: usize,
    perm: &[usize],
) -> Result<Vec<f64>> {
    let k = perm.len();
    let nw = t.nw;
    let (pidx, sizes) = prefix_indices(e.w_cards(), perm);
    let (base, alt) = (t.get(x_base), t.get(x_alt));
    let mut marg_base: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
    let mut marg_alt = marg_base.clone();
    let mut out = vec![0.0; k + 1];
    for z in 0..t.nz {
        let pz = t.pz[z];
        if pz == 0.0 {
            continue;
        }
        for (m, arm) in [(&mut marg_base, base), (&mut marg_alt, alt)] {
            for level in m.iter_mut() {
                level.iter_mut().for_each(|v| *v = 0.0);
            }
            for w in 0..nw {
                let p = arm.pw[z * nw + w];
                for (j, level) in m.iter_mut().enumerate() {
                    level[pidx[w * (k + 1) + j]] += p;
                }
            }
        }
        for w in 0..nw {
            let py = base.py[(z * nw + w) * t.ny + y];
            for (i, o) in out.iter_mut().enumerate() {
                let mut prod = 1.0;
                for j in 1..=k {
                    let m = if j <= i { &marg_alt } else { &marg_base };
                    let num = m[j][pidx[w * (k + 1) + j]];
                    if num == 0.0 {
                        prod = 0.0;
                        break;
                    }
                    prod *= num / m[j - 1][pidx[w * (k + 1) + j - 1]];
                }
                if prod != 0.0 {
                    *o += pz * prod * py;
                }
            }
        }
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::UnidentifiableCell("mediator prefix with zero mass".into()));
    }
    Ok(out)
}

/// Evaluates one nested counterfactual term: Y set to `x_base`, the first
/// `i` mediators of `order` responding to `x_alt`, the rest to `x_base`.
pub fn nested_mediator_term(
    e: &SfmEstimator,
    x_base: &str,
    x_alt: &str,
    y: &str,
    order: &[&str],
    i: usize,
) -> Result<f64> {
    let perm = permutation_of(order, e.w_names(), "mediators")?;
    if i > perm.len() {
        return Err(Error::InvalidArgument(format!(
            "prefix length {i} exceeds {}",
            perm.len()
        )));
    }
    let (xb, xa, yi) = (e.x_index(x_base)?, e.x_index(x_alt)?, e.y_index(y)?);
    let mut t = Tables::new(e);
    t.arm(e, xb);
    t.arm(e, xa);
    Ok(nested_terms(e, &t, xb, xa, yi, &perm)?[i])
}

/// Splits `SE_{x₀,x₁}(y)` into per-confounder components along `order`.
pub fn se_by_confounder(e: &SfmEstimator, c: &Contrast, order: &[&str]) -> Result<ConfounderDecomposition> {
    let perm = permutation_of(order, e.z_names(), "confounders")?;
    let r = resolve(e, c)?;
    let mut t = Tables::new(e);
    t.arm(e, r.x0);
    t.arm(e, r.x1);
    let t1 = adjusted_terms(e, &t, r.x1, r.y, &perm)?;
    let t0 = adjusted_terms(e, &t, r.x0, r.y, &perm)?;
    let components: Vec<f64> = (1..=perm.len())
        .map(|i| t1[i - 1] - t1[i] - t0[i - 1] + t0[i])
        .collect();
    let tv = t.p_y_given_x(r.x1)[r.y] - t.p_y_given_x(r.x0)[r.y];
    let te = t.q(r.x1, r.x1)[r.y] - t.q(r.x0, r.x0)[r.y];
    let total_se = tv - te;
    let residual = (components.iter().sum::<f64>() - total_se).abs();
    if !(residual <= IDENTITY_TOL) {
        return Err(Error::IdentityBreach {
            identity: "sum of per-confounder components = se",
            residual,
        });
    }
    Ok(ConfounderDecomposition {
        order: order.iter().map(|s| s.to_string()).collect(),
        components,
        total_se,
        residual,
    })
}

/// `T[i] = Σ_{s ∈ Z^{≤i}} P̂(y | x, s) P̂(s)` for i = 0..=k.
fn adjusted_terms(e: &SfmEstimator, t: &Tables, x: usize, y: usize, perm: &[usize]) -> Result<Vec<f64>> {
    let k = perm.len();
    let (pidx, sizes) = prefix_indices(e.z_cards(), perm);
    let arm = t.get(x);
    let mut num: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
    let mut den = num.clone();
    let mut mass = num.clone();
    let mut qz = vec![0.0; t.ny];
    for z in 0..t.nz {
        let pz = t.pz[z];
        if pz == 0.0 {
            continue;
        }
        let wz = pz * arm.px_z[z];
        let py = if wz == 0.0 {
            0.0
        } else {
            t.q_z(z, x, x, &mut qz);
            qz[y]
        };
        for j in 0..=k {
            let s = pidx[z * (k + 1) + j];
            mass[j][s] += pz;
            if wz != 0.0 {
                den[j][s] += wz;
                num[j][s] += wz * py;
            }
        }
    }
    let mut out = vec![0.0; k + 1];
    for j in 0..=k {
        for s in 0..sizes[j] {
            if mass[j][s] == 0.0 {
                continue;
            }
            if den[j][s] == 0.0 {
                return Err(Error::UnidentifiableCell("confounder stratum without the group".into()));
            }
            out[j] += num[j][s] / den[j][s] * mass[j][s];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityKind {
    Mediator,
    Confounder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpread {
    pub variable: String,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub order_dependent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub kind: SensitivityKind,
    pub orderings_evaluated: usize,
    pub exhaustive: bool,
    pub components: Vec<ComponentSpread>,
}

impl SensitivityReport {
    pub fn max_spread(&self) -> f64 {
        self.components.iter().map(|c| c.spread).fold(0.0, f64::max)
    }

    pub fn order_dependent(&self) -> bool {
        self.components.iter().any(|c| c.order_dependent)
    }
}

/// Re-evaluates the decomposition under every ordering (or a seeded sample
/// when there are more than 7! of them) and reports per-variable spreads.
pub fn ordering_sensitivity(e: &SfmEstimator, c: &Contrast, kind: SensitivityKind) -> Result<SensitivityReport> {
    ordering_sensitivity_seeded(e, c, kind, 0)
}

pub fn ordering_sensitivity_seeded(
    e: &SfmEstimator,
    c: &Contrast,
    kind: SensitivityKind,
    seed: u64,
) -> Result<SensitivityReport> {
    let names: Vec<String> = match kind {
        SensitivityKind::Mediator => e.w_names().map(String::from).collect(),
        SensitivityKind::Confounder => e.z_names().map(String::from).collect(),
    };
    let k = names.len();
    let exhaustive = (1..=k)
        .try_fold(1usize, |a, b| a.checked_mul(b))
        .is_some_and(|n| n <= MAX_EXHAUSTIVE_ORDERINGS);
    let orders: Vec<Vec<usize>> = if exhaustive {
        permutations(k)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SAMPLED_ORDERINGS)
            .map(|_| {
                let mut p: Vec<usize> = (0..k).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect()
    };
    let mut min = vec![f64::INFINITY; k];
    let mut max = vec![f64::NEG_INFINITY; k];
    for p in &orders {
        let order: Vec<&str> = p.iter().map(|&i| names[i].as_str()).collect();
        let comps = match kind {
            SensitivityKind::Mediator => ie_by_mediator(e, c, &order)?.components,
            SensitivityKind::Confounder => se_by_confounder(e, c, &order)?.components,
        };
        for (&var, v) in p.iter().zip(comps) {
            min[var] = min[var].min(v);
            max[var] = max[var].max(v);
        }
    }
    let components = names
        .into_iter()
        .enumerate()
        .map(|(i, variable)| {
            let spread = if k == 0 { 0.0 } else { max[i] - min[i] };
            ComponentSpread {
                variable,
                min: min[i],
                max: max[i],
                spread,
                order_dependent: spread > ORDER_SPREAD_TOL,
            }
        })
        .collect();
    Ok(SensitivityReport {
        kind,
        orderings_evaluated: orders.len(),
        exhaustive,
        components,
    })
}

/// All permutations of `0..k` in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZSpecificEffect {
    /// (confounder, state) pairs identifying the stratum.
    pub z_state: Vec<(String, String)>,
    pub te: f64,
    pub de: f64,
    pub ie: f64,
    pub ie_reversed: f64,
    /// P̂(z).
    pub weight: f64,
    pub n_rows: usize,
}

/// Effects within every joint confounder stratum.
pub fn z_specific_effects(e: &SfmEstimator, c: &Contrast) -> Result<Vec<ZSpecificEffect>> {
    checked_cardinality(e.z_cards().iter().copied(), e.cap())?;
    let r = resolve(e, c)?;
    let mut t = Tables::new(e);
    t.arm(e, r.x0);
    t.arm(e, r.x1);
    let counts = e.z_counts();
    let mut q = vec![vec![0.0; t.ny]; 4];
    let mut out = Vec::with_capacity(t.nz);
    for (z, &n) in counts.iter().enumerate() {
        for (slot, (xy, xw)) in q
            .iter_mut()
            .zip([(r.x0, r.x0), (r.x1, r.x1), (r.x1, r.x0), (r.x0, r.x1)])
        {
            t.q_z(z, xy, xw, slot);
        }
        let (q00, q11, q10, q01) = (q[0][r.y], q[1][r.y], q[2][r.y], q[3][r.y]);
        let te = q11 - q00;
        if te.is_nan() {
            return Err(Error::UnidentifiableCell(format!("confounder stratum {z}")));
        }
        out.push(ZSpecificEffect {
            z_state: e.z_labels(z),
            te,
            de: q10 - q00,
            ie: q01 - q00,
            ie_reversed: q10 - q11,
            weight: t.pz[z],
            n_rows: crate::util::count(n),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEffect {
    pub ledger: EffectLedger,
    pub n_x0: usize,
    pub n_x1: usize,
}

/// One ledger per pair in `x0s × x1s`, with the groups' marginal counts.
pub fn x_pairwise_effects(e: &SfmEstimator, y: &str, x0s: &[String], x1s: &[String]) -> Result<Vec<PairwiseEffect>> {
    if x0s.is_empty() || x1s.is_empty() {
        return Err(Error::InvalidArgument("both groups must be nonempty".into()));
    }
    if let Some(s) = x0s.iter().find(|s| x1s.contains(s)) {
        return Err(Error::InvalidArgument(format!("state `{s}` is in both groups")));
    }
    let counts = e.x_counts();
    let mut t = Tables::new(e);
    let mut out = Vec::with_capacity(x0s.len() * x1s.len());
    for a in x0s {
        for b in x1s {
            let c = Contrast::new(a.clone(), b.clone(), y);
            let r = resolve(e, &c)?;
            let ledger = ledger_from(e, &mut t, &c, &r)?;
            out.push(PairwiseEffect {
                ledger,
                n_x0: crate::util::count(counts[r.x0]),
                n_x1: crate::util::count(counts[r.x1]),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{effect_ledger, EffectKind};
    use crate::{ColumnSpec, DatasetBuilder, SfmRoles};

    fn estimator() -> SfmEstimator {
        let mut b = DatasetBuilder::new(vec![
            ColumnSpec::categorical("z1"),
            ColumnSpec::categorical("z2"),
            ColumnSpec::categorical("x"),
            ColumnSpec::categorical("w1"),
            ColumnSpec::categorical("w2"),
            ColumnSpec::categorical("y"),
        ])
        .unwrap();
        let mut s = 7u32;
        for _ in 0..300 {
            let mut bit = |m: u32| {
                s = s.wrapping_mul(1_103_515_245).wrapping_add(12345);
                ((s >> 16) % m).to_string()
            };
            let row = [bit(2), bit(3), bit(2), bit(3), bit(2), bit(2)];
            b.push_record(&row).unwrap();
        }
        let d = b.finish().unwrap();
        let r = SfmRoles::new("x", "y")
            .confounders(["z1", "z2"])
            .mediators(["w1", "w2"])
            .groups(["0"], ["1"]);
        SfmEstimator::fit(&d, &r, 1.0).unwrap()
    }

    #[test]
    fn components_telescope() {
        let e = estimator();
        let c = Contrast::new("0", "1", "1");
        let l = effect_ledger(&e, &c).unwrap();
        for order in [["w1", "w2"], ["w2", "w1"]] {
            let m = ie_by_mediator(&e, &c, &order).unwrap();
            assert!((m.components.iter().sum::<f64>() - l.ie).abs() < 1e-12);
            let m = ie_by_mediator(&e, &c.swapped(), &order).unwrap();
            assert!((m.components.iter().sum::<f64>() - l.ie_reversed).abs() < 1e-12);
        }
        for order in [["z1", "z2"], ["z2", "z1"]] {
            let s = se_by_confounder(&e, &c, &order).unwrap();
            assert!((s.components.iter().sum::<f64>() - l.se).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_orders_rejected() {
        let e = estimator();
        let c = Contrast::new("0", "1", "1");
        assert!(ie_by_mediator(&e, &c, &["w1"]).is_err());
        assert!(ie_by_mediator(&e, &c, &["w1", "w1"]).is_err());
        assert!(se_by_confounder(&e, &c, &["z1", "w1"]).is_err());
    }

    #[test]
    fn z_specific_recombines() {
        let e = estimator();
        let c = Contrast::new("0", "1", "1");
        let l = effect_ledger(&e, &c).unwrap();
        let zs = z_specific_effects(&e, &c).unwrap();
        assert_eq!(zs.len(), 6);
        assert_eq!(zs.iter().map(|z| z.n_rows).sum::<usize>(), 300);
        let te: f64 = zs.iter().map(|z| z.te * z.weight).sum();
        let de: f64 = zs.iter().map(|z| z.de * z.weight).sum();
        let ie: f64 = zs.iter().map(|z| z.ie * z.weight).sum();
        assert!((te - l.te).abs() < 1e-12);
        assert!((de - l.de).abs() < 1e-12);
        assert!((ie - l.ie).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_and_pairs() {
        let e = estimator();
        let c = Contrast::new("0", "1", "1");
        let rep = ordering_sensitivity(&e, &c, SensitivityKind::Mediator).unwrap();
        assert_eq!(rep.orderings_evaluated, 2);
        assert!(rep.exhaustive);
        let pairs = x_pairwise_effects(&e, "1", &["0".into()], &["1".into()]).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].ledger, effect_ledger(&e, &c).unwrap());
        assert_eq!(pairs[0].n_x0 + pairs[0].n_x1, 300);
        assert_eq!(pairs[0].ledger.get(EffectKind::Tv), pairs[0].ledger.tv);
    }

    #[test]
    fn permutation_enumeration() {
        assert_eq!(permutations(0), [Vec::<usize>::new()]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[5], [2, 1, 0]);
    }
}
