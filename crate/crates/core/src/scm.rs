//! Small discrete structural causal models evaluated exactly.
//!
//! Every quantity is computed by enumerating the joint exogenous domain and
//! propagating the structural tables in topological order, so results are
//! exact up to floating-point summation. This is the ground truth the
//! estimator-side identification formulae are tested against.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, ColumnKind, Dataset};
use crate::effects::{Contrast, EffectLedger, LedgerMetadata};
use crate::error::{Error, Result};
use crate::estimator::{JointStates, SfmEstimator, DEFAULT_CAP};
use crate::roles::SfmRoles;
use crate::util::{checked_cardinality, ravel};

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousSpec {
    pub name: String,
    pub states: Vec<String>,
    pub probs: Vec<f64>,
}

/// `V := table[parent states]`, the table flattened row-major over
/// `parents` (first parent most significant) and holding state indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndogenousSpec {
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub exogenous: Vec<ExogenousSpec>,
    pub endogenous: Vec<EndogenousSpec>,
    pub roles: SfmRoles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ref {
    Exo(usize),
    Endo(usize),
}

/// A validated, ready-to-evaluate model.
#[derive(Debug, Clone)]
pub struct Scm {
    spec: ScmSpec,
    exo_cards: Vec<usize>,
    parents: Vec<Vec<Ref>>,
    parent_cards: Vec<Vec<usize>>,
    topo: Vec<usize>,
    cap: u128,
}

/// Exact joint distribution over the endogenous variables, in spec order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub variables: Vec<(String, Vec<String>)>,
    /// Indexed by the joint state (first variable most significant).
    pub probs: Vec<f64>,
}

/// Value assigned to a variable inside a [`NestedQuery`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assigned {
    Constant(String),
    /// The value the variable takes in the world built so far, further
    /// intervened on by these assignments (e.g. `X = x′`).
    NaturalUnder(Vec<(String, String)>),
}

/// `P(outcome_{assignments})`. Assignments are resolved in list order:
/// each natural value is read in the world formed by the assignments
/// already resolved, overridden by its own intervention. Listing mediators
/// in topological order therefore yields path-specific quantities such as
/// `Y_{x₀, W¹_{x₁}, W²_{x₀}}` with `W²` responding to `x₀` and to the
/// value `W¹` actually took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedQuery {
    pub outcome: (String, String),
    pub interventions: Vec<(String, Assigned)>,
}

impl NestedQuery {
    pub fn new(var: impl Into<String>, state: impl Into<String>) -> Self {
        Self {
            outcome: (var.into(), state.into()),
            interventions: Vec::new(),
        }
    }

    pub fn set(mut self, var: impl Into<String>, state: impl Into<String>) -> Self {
        self.interventions.push((var.into(), Assigned::Constant(state.into())));
        self
    }

    /// `var` takes its natural value under `under_var = under_state`.
    pub fn natural(
        mut self,
        var: impl Into<String>,
        under_var: impl Into<String>,
        under_state: impl Into<String>,
    ) -> Self {
        self.interventions.push((
            var.into(),
            Assigned::NaturalUnder(vec![(under_var.into(), under_state.into())]),
        ));
        self
    }
}

enum ResolvedAssign {
    Constant(usize),
    Natural(Vec<(usize, usize)>),
}

impl Scm {
    pub fn new(spec: ScmSpec) -> Result<Self> {
        Self::with_cap(spec, DEFAULT_CAP)
    }

    /// `cap` bounds the joint exogenous domain and every structural table.
    pub fn with_cap(spec: ScmSpec, cap: u128) -> Result<Self> {
        let invalid = |m: String| Error::InvalidScm(m);
        let mut names: Vec<&str> = Vec::new();
        for n in spec
            .exogenous
            .iter()
            .map(|u| &u.name)
            .chain(spec.endogenous.iter().map(|v| &v.name))
        {
            if names.contains(&n.as_str()) {
                return Err(invalid(format!("duplicate variable `{n}`")));
            }
            names.push(n);
        }
        for u in &spec.exogenous {
            if u.states.is_empty() || u.states.len() != u.probs.len() {
                return Err(invalid(format!(
                    "exogenous `{}` needs one probability per state",
                    u.name
                )));
            }
            if u.probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(invalid(format!("exogenous `{}` has an invalid probability", u.name)));
            }
            let s: f64 = u.probs.iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(invalid(format!("exogenous `{}` probabilities sum to {s}", u.name)));
            }
        }
        let exo_cards: Vec<usize> = spec.exogenous.iter().map(|u| u.states.len()).collect();
        checked_cardinality(exo_cards.iter().copied(), cap)?;

        let lookup = |n: &str| -> Option<Ref> {
            if let Some(i) = spec.exogenous.iter().position(|u| u.name == n) {
                return Some(Ref::Exo(i));
            }
            spec.endogenous.iter().position(|v| v.name == n).map(Ref::Endo)
        };
        let mut parents = Vec::with_capacity(spec.endogenous.len());
        let mut parent_cards = Vec::with_capacity(spec.endogenous.len());
        for v in &spec.endogenous {
            if v.states.is_empty() {
                return Err(invalid(format!("`{}` has no states", v.name)));
            }
            let refs = v
                .parents
                .iter()
                .map(|p| lookup(p).ok_or_else(|| invalid(format!("`{}` has unknown parent `{p}`", v.name))))
                .collect::<Result<Vec<_>>>()?;
            let cards: Vec<usize> = refs
                .iter()
                .map(|r| match *r {
                    Ref::Exo(i) => exo_cards[i],
                    Ref::Endo(i) => spec.endogenous[i].states.len(),
                })
                .collect();
            let rows = checked_cardinality(cards.iter().copied(), cap)?;
            if v.table.len() != rows {
                return Err(invalid(format!(
                    "table of `{}` has {} entries, its parents need {rows}",
                    v.name,
                    v.table.len()
                )));
            }
            if let Some(bad) = v.table.iter().find(|&&s| s >= v.states.len()) {
                return Err(invalid(format!("table of `{}` maps to missing state #{bad}", v.name)));
            }
            parents.push(refs);
            parent_cards.push(cards);
        }

        // Kahn's algorithm over endogenous edges, preferring declaration order.
        let n = spec.endogenous.len();
        let mut indegree: Vec<usize> = parents
            .iter()
            .map(|ps| ps.iter().filter(|r| matches!(r, Ref::Endo(_))).count())
            .collect();
        let mut topo = Vec::with_capacity(n);
        let mut done = vec![false; n];
        while topo.len() < n {
            let next = (0..n).find(|&i| !done[i] && indegree[i] == 0);
            let Some(i) = next else {
                return Err(invalid("endogenous graph has a cycle".into()));
            };
            done[i] = true;
            topo.push(i);
            for (j, ps) in parents.iter().enumerate() {
                indegree[j] -= ps.iter().filter(|r| **r == Ref::Endo(i)).count();
            }
        }

        let scm = Self {
            spec,
            exo_cards,
            parents,
            parent_cards,
            topo,
            cap,
        };
        scm.check_sfm()?;
        Ok(scm)
    }

    /// Roles must cover every endogenous variable, edges must respect
    /// `Z → X → W → Y`, and exogenous variables may be shared only within
    /// `{X} ∪ Z`.
    fn check_sfm(&self) -> Result<()> {
        let r = &self.spec.roles;
        let errs = r.structural_errors();
        if !errs.is_empty() {
            return Err(Error::InvalidScm(errs.join("; ")));
        }
        let rank_of = |name: &str| -> Option<u8> {
            if r.z.iter().any(|z| z == name) {
                Some(0)
            } else if r.x == name {
                Some(1)
            } else if r.w.iter().any(|w| w == name) {
                Some(2)
            } else if r.y == name {
                Some(3)
            } else {
                None
            }
        };
        for name in r.ordered_columns() {
            if self.endo_index(name).is_none() {
                return Err(Error::InvalidScm(format!("role variable `{name}` is not endogenous")));
            }
        }
        let mut ranks = Vec::with_capacity(self.spec.endogenous.len());
        for v in &self.spec.endogenous {
            ranks.push(rank_of(&v.name).ok_or_else(|| Error::InvalidScm(format!("`{}` has no role", v.name)))?);
        }
        for (i, ps) in self.parents.iter().enumerate() {
            for p in ps {
                if let Ref::Endo(j) = *p {
                    if ranks[j] > ranks[i] || (ranks[j] == ranks[i] && (ranks[i] == 1 || ranks[i] == 3)) {
                        return Err(Error::InvalidScm(format!(
                            "edge {} → {} violates the Z → X → W → Y order",
                            self.spec.endogenous[j].name, self.spec.endogenous[i].name
                        )));
                    }
                }
            }
        }
        for (u, spec) in self.spec.exogenous.iter().enumerate() {
            let children: Vec<usize> = (0..self.parents.len())
                .filter(|&i| self.parents[i].contains(&Ref::Exo(u)))
                .collect();
            if children.len() > 1 && children.iter().any(|&i| ranks[i] > 1) {
                return Err(Error::InvalidScm(format!(
                    "exogenous `{}` is shared outside the protected attribute and confounders",
                    spec.name
                )));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &ScmSpec {
        &self.spec
    }

    pub fn roles(&self) -> &SfmRoles {
        &self.spec.roles
    }

    fn endo_index(&self, name: &str) -> Option<usize> {
        self.spec.endogenous.iter().position(|v| v.name == name)
    }

    fn var_state(&self, name: &str, state: &str) -> Result<(usize, usize)> {
        let i = self
            .endo_index(name)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown variable `{name}`")))?;
        let s = self.spec.endogenous[i]
            .states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown state `{state}` of `{name}`")))?;
        Ok((i, s))
    }

    fn propagate(&self, u: &[usize], fixed: &[Option<usize>], out: &mut [usize]) {
        let mut digits = Vec::new();
        for &i in &self.topo {
            if let Some(s) = fixed[i] {
                out[i] = s;
                continue;
            }
            digits.clear();
            digits.extend(self.parents[i].iter().map(|r| match *r {
                Ref::Exo(j) => u[j],
                Ref::Endo(j) => out[j],
            }));
            out[i] = self.spec.endogenous[i].table[ravel(&digits, &self.parent_cards[i])];
        }
    }

    fn for_each_exogenous<F: FnMut(&[usize], f64)>(&self, mut f: F) -> Result<()> {
        for u in JointStates::new(self.exo_cards.clone(), self.cap)? {
            let p: f64 = u.iter().zip(&self.spec.exogenous).map(|(&s, e)| e.probs[s]).product();
            if p > 0.0 {
                f(&u, p);
            }
        }
        Ok(())
    }

    pub fn exact_observational(&self) -> Result<JointDistribution> {
        let cards: Vec<usize> = self.spec.endogenous.iter().map(|v| v.states.len()).collect();
        let size = checked_cardinality(cards.iter().copied(), self.cap)?;
        let mut probs = vec![0.0; size];
        let none = vec![None; cards.len()];
        let mut v = vec![0usize; cards.len()];
        self.for_each_exogenous(|u, p| {
            self.propagate(u, &none, &mut v);
            probs[ravel(&v, &cards)] += p;
        })?;
        Ok(JointDistribution {
            variables: self
                .spec
                .endogenous
                .iter()
                .map(|v| (v.name.clone(), v.states.clone()))
                .collect(),
            probs,
        })
    }

    pub fn counterfactual_prob(&self, q: &NestedQuery) -> Result<f64> {
        let (oi, os) = self.var_state(&q.outcome.0, &q.outcome.1)?;
        let mut plan = Vec::with_capacity(q.interventions.len());
        for (var, a) in &q.interventions {
            let i = self
                .endo_index(var)
                .ok_or_else(|| Error::InvalidQuery(format!("unknown variable `{var}`")))?;
            let r = match a {
                Assigned::Constant(s) => ResolvedAssign::Constant(self.var_state(var, s)?.1),
                Assigned::NaturalUnder(under) => ResolvedAssign::Natural(
                    under
                        .iter()
                        .map(|(n, s)| self.var_state(n, s))
                        .collect::<Result<Vec<_>>>()?,
                ),
            };
            plan.push((i, r));
        }
        let n = self.spec.endogenous.len();
        let mut total = 0.0;
        let mut fixed = vec![None; n];
        let mut inner = vec![None; n];
        let mut v = vec![0usize; n];
        self.for_each_exogenous(|u, p| {
            fixed.iter_mut().for_each(|f| *f = None);
            for (i, r) in &plan {
                let value = match r {
                    ResolvedAssign::Constant(s) => *s,
                    ResolvedAssign::Natural(under) => {
                        inner.copy_from_slice(&fixed);
                        for &(j, s) in under {
                            inner[j] = Some(s);
                        }
                        self.propagate(u, &inner, &mut v);
                        v[*i]
                    }
                };
                fixed[*i] = Some(value);
            }
            self.propagate(u, &fixed, &mut v);
            if v[oi] == os {
                total += p;
            }
        })?;
        Ok(total)
    }

    /// Endogenous mediators in the model's topological order.
    fn mediators_topological(&self) -> Vec<&str> {
        self.topo
            .iter()
            .map(|&i| self.spec.endogenous[i].name.as_str())
            .filter(|n| self.spec.roles.w.iter().any(|w| w == n))
            .collect()
    }

    /// `P(Y_{x_y, W_{x_w}} = y)`.
    pub fn mediated_prob(&self, x_y: &str, x_w: &str, y: &str) -> Result<f64> {
        let r = &self.spec.roles;
        let mut q = NestedQuery::new(&r.y, y).set(&r.x, x_y);
        for w in self.mediators_topological() {
            q = q.natural(w, &r.x, x_w);
        }
        self.counterfactual_prob(&q)
    }

    /// Ground-truth descriptors from their counterfactual definitions.
    pub fn ground_truth_ledger(&self, c: &Contrast) -> Result<EffectLedger> {
        let r = &self.spec.roles;
        let joint = self.exact_observational()?;
        let p_y_given_x = |x: &str| -> Result<f64> {
            let both = joint.probability(&[(&r.x, x), (&r.y, &c.y)])?;
            let px = joint.probability(&[(&r.x, x)])?;
            if px == 0.0 {
                return Err(Error::UnidentifiableCell(format!("{} = {x} has zero probability", r.x)));
            }
            Ok(both / px)
        };
        let tv = p_y_given_x(&c.x1)? - p_y_given_x(&c.x0)?;
        let q00 = self.mediated_prob(&c.x0, &c.x0, &c.y)?;
        let q11 = self.mediated_prob(&c.x1, &c.x1, &c.y)?;
        let q10 = self.mediated_prob(&c.x1, &c.x0, &c.y)?;
        let q01 = self.mediated_prob(&c.x0, &c.x1, &c.y)?;
        EffectLedger::from_parts(
            tv,
            q11 - q00,
            q10 - q00,
            q01 - q00,
            q10 - q11,
            c.clone(),
            LedgerMetadata {
                n_rows: 0,
                alpha: 0.0,
                roles_digest: r.digest(),
            },
        )
    }

    /// `n` i.i.d. endogenous rows. Row `i` draws from its own ChaCha stream,
    /// so output does not depend on how rows are scheduled.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        let cdfs: Vec<Vec<f64>> = self
            .spec
            .exogenous
            .iter()
            .map(|e| {
                e.probs
                    .iter()
                    .scan(0.0, |a, p| {
                        *a += p;
                        Some(*a)
                    })
                    .collect()
            })
            .collect();
        let m = self.spec.endogenous.len();
        let mut codes: Vec<Vec<u32>> = vec![Vec::with_capacity(n); m];
        let none = vec![None; m];
        let mut u = vec![0usize; cdfs.len()];
        let mut v = vec![0usize; m];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for row in 0..n {
            rng.set_stream(row as u64);
            rng.set_word_pos(0);
            for (slot, cdf) in u.iter_mut().zip(&cdfs) {
                let r: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
                *slot = cdf.iter().position(|&c| r < c).unwrap_or(cdf.len() - 1);
            }
            self.propagate(&u, &none, &mut v);
            for (col, &s) in codes.iter_mut().zip(&v) {
                col.push(s as u32);
            }
        }
        let columns = self
            .spec
            .endogenous
            .iter()
            .zip(codes)
            .map(|(spec, c)| Column::new(spec.name.clone(), ColumnKind::Categorical, spec.states.clone(), c))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(columns)
    }
}

impl JointDistribution {
    fn cards(&self) -> Vec<usize> {
        self.variables.iter().map(|(_, s)| s.len()).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of a partial assignment.
    pub fn probability(&self, assignment: &[(&str, &str)]) -> Result<f64> {
        let mut want: Vec<Option<usize>> = vec![None; self.variables.len()];
        for (name, state) in assignment {
            let i = self
                .variables
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
            let s = self.variables[i]
                .1
                .iter()
                .position(|s| s == state)
                .ok_or_else(|| Error::UnknownState {
                    column: name.to_string(),
                    state: state.to_string(),
                })?;
            want[i] = Some(s);
        }
        let cards = self.cards();
        let mut digits = vec![0usize; cards.len()];
        let mut total = 0.0;
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            crate::util::unravel(idx, &cards, &mut digits);
            if digits.iter().zip(&want).all(|(d, w)| w.is_none_or(|w| w == *d)) {
                total += p;
            }
        }
        Ok(total)
    }

    /// Fits the estimator with `alpha = 0` directly on the exact masses.
    pub fn estimator(&self, roles: &SfmRoles, cap: u128) -> Result<SfmEstimator> {
        let cards = self.cards();
        let mut digits = vec![0usize; cards.len()];
        let records: Vec<(Vec<usize>, f64)> = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(idx, &p)| {
                crate::util::unravel(idx, &cards, &mut digits);
                (digits.clone(), p)
            })
            .collect();
        SfmEstimator::from_weighted(roles, &self.variables, records, 0.0, cap)
    }
}

/// Shape of a generated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomScmConfig {
    pub confounders: usize,
    pub mediators: usize,
    /// Cardinalities of confounders and mediators are drawn from `2..=max_card`.
    pub max_card: usize,
    pub y_card: usize,
    /// Adds an exogenous variable shared by X and the confounders.
    pub shared_xz: bool,
}

impl Default for RandomScmConfig {
    fn default() -> Self {
        Self {
            confounders: 2,
            mediators: 2,
            max_card: 3,
            y_card: 2,
            shared_xz: false,
        }
    }
}

impl RandomScmConfig {
    /// A random shape within the supported limits (≤ 3 confounders and
    /// mediators, ≤ 4 states each, |Y| ≤ 3).
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0f1);
        Self {
            confounders: rng.random_range(0..=3),
            mediators: rng.random_range(0..=3),
            max_card: rng.random_range(2..=4),
            y_card: rng.random_range(2..=3),
            shared_xz: rng.random_bool(0.5),
        }
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|r| r / s).collect()
}

struct Builder {
    rng: ChaCha8Rng,
    exogenous: Vec<ExogenousSpec>,
    endogenous: Vec<EndogenousSpec>,
}

impl Builder {
    fn card_of(&self, name: &str) -> usize {
        self.exogenous
            .iter()
            .find(|u| u.name == name)
            .map(|u| u.states.len())
            .or_else(|| self.endogenous.iter().find(|v| v.name == name).map(|v| v.states.len()))
            .expect("parent declared")
    }

    /// Adds `name` with its own exogenous noise of the same cardinality;
    /// for every configuration of the other parents the noise is mapped to
    /// the states through a random permutation, giving full support.
    fn add(&mut self, name: &str, card: usize, mut parents: Vec<String>) {
        let u = format!("u_{name}");
        let probs = random_probs(&mut self.rng, card);
        self.exogenous.push(ExogenousSpec {
            name: u.clone(),
            states: labels(card),
            probs,
        });
        let configs: usize = parents.iter().map(|p| self.card_of(p)).product();
        let mut table = Vec::with_capacity(configs * card);
        for _ in 0..configs {
            let mut perm: Vec<usize> = (0..card).collect();
            perm.shuffle(&mut self.rng);
            table.extend(perm);
        }
        parents.push(u);
        self.endogenous.push(EndogenousSpec {
            name: name.to_string(),
            states: labels(card),
            parents,
            table,
        });
    }

    fn subset(&mut self, pool: &[String], p: f64) -> Vec<String> {
        pool.iter().filter(|_| self.rng.random_bool(p)).cloned().collect()
    }
}

/// A seeded random model compatible with the standard fairness model:
/// binary X, per-variable exogenous noise and dense-support tables.
pub fn random_sfm_scm(seed: u64, config: &RandomScmConfig) -> Result<ScmSpec> {
    if config.confounders > 3
        || config.mediators > 3
        || !(2..=4).contains(&config.max_card)
        || !(2..=4).contains(&config.y_card)
    {
        return Err(Error::InvalidArgument(
            "random model shape out of supported range".into(),
        ));
    }
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        exogenous: Vec::new(),
        endogenous: Vec::new(),
    };
    let shared = config.shared_xz.then(|| {
        let card = b.rng.random_range(2..=3);
        let probs = random_probs(&mut b.rng, card);
        b.exogenous.push(ExogenousSpec {
            name: "u_xz".into(),
            states: labels(card),
            probs,
        });
        String::from("u_xz")
    });
    let mut zs: Vec<String> = Vec::new();
    for i in 0..config.confounders {
        let name = format!("z{}", i + 1);
        let card = b.rng.random_range(2..=config.max_card);
        let mut parents = b.subset(&zs, 0.6);
        if let Some(s) = &shared {
            parents.push(s.clone());
        }
        b.add(&name, card, parents);
        zs.push(name);
    }
    let mut xp = b.subset(&zs, 0.8);
    if let Some(s) = &shared {
        xp.push(s.clone());
    }
    b.add("x", 2, xp);
    let mut ws: Vec<String> = Vec::new();
    for i in 0..config.mediators {
        let name = format!("w{}", i + 1);
        let card = b.rng.random_range(2..=config.max_card);
        let mut parents = vec![String::from("x")];
        parents.extend(b.subset(&zs, 0.6));
        parents.extend(b.subset(&ws, 0.6));
        b.add(&name, card, parents);
        ws.push(name);
    }
    let mut yp = vec![String::from("x")];
    yp.extend(b.subset(&zs, 0.7));
    yp.extend(b.subset(&ws, 0.8));
    b.add("y", config.y_card, yp);

    let roles = SfmRoles::new("x", "y")
        .confounders(zs)
        .mediators(ws)
        .groups(["0"], ["1"])
        .target("1");
    Ok(ScmSpec {
        exogenous: b.exogenous,
        endogenous: b.endogenous,
        roles,
    })
}

/// Two mediators that are independent given X and Z, and an outcome with
/// `P(Y=1 | x, z, w¹, w²) = (a(x,z) + b₁(w¹,z) + b₂(w²,z)) / N` (additive),
/// or `(a(x,z) + c·w¹·w²) / N` when `interaction` is set.
pub fn mediator_order_construction(seed: u64, interaction: bool) -> ScmSpec {
    const N: usize = 64;
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        exogenous: Vec::new(),
        endogenous: Vec::new(),
    };
    b.add("z", 2, Vec::new());
    b.add("x", 2, vec!["z".into()]);
    b.add("w1", 3, vec!["x".into(), "z".into()]);
    b.add("w2", 3, vec!["x".into(), "z".into()]);

    let mut weights = |n: usize, hi: usize| -> Vec<usize> { (0..n).map(|_| b.rng.random_range(0..=hi)).collect() };
    let a = weights(4, 20); // (x, z)
    let b1 = weights(6, 20); // (w1, z)
    let b2 = weights(6, 20); // (w2, z)
    let c = 1 + (seed as usize % 5);
    let mut table = Vec::with_capacity(2 * 2 * 3 * 3 * N);
    for x in 0..2 {
        for z in 0..2 {
            for w1 in 0..3 {
                for w2 in 0..3 {
                    let level = if interaction {
                        a[x * 2 + z] + c * w1 * w2 * (x + 1)
                    } else {
                        a[x * 2 + z] + b1[w1 * 2 + z] + b2[w2 * 2 + z]
                    };
                    table.extend((0..N).map(|u| (u < level) as usize));
                }
            }
        }
    }
    b.exogenous.push(ExogenousSpec {
        name: "u_y".into(),
        states: labels(N),
        probs: vec![1.0 / N as f64; N],
    });
    b.endogenous.push(EndogenousSpec {
        name: "y".into(),
        states: labels(2),
        parents: vec!["x".into(), "z".into(), "w1".into(), "w2".into(), "u_y".into()],
        table,
    });
    ScmSpec {
        exogenous: b.exogenous,
        endogenous: b.endogenous,
        roles: SfmRoles::new("x", "y")
            .confounders(["z"])
            .mediators(["w1", "w2"])
            .groups(["0"], ["1"])
            .target("1"),
    }
}
