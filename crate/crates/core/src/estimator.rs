//! Laplace-smoothed Bayesian network over the fairness-model order.
//!
//! Variables are arranged as `Z¹..Zᵏ, X, W¹..Wᵐ, Y` and every variable is
//! conditioned on all of its predecessors, so the network makes no claim
//! about structure inside the confounder or mediator clusters. Each CPT row
//! receives `alpha` pseudo-counts per child state. Every probability the
//! identification formulae need is obtained by exact inference on this one
//! joint, which keeps all decomposition identities exact.
//!
//! CPT `i` is stored flat, indexed by the mixed-radix index of the prefix
//! `(v₀, …, vᵢ)` with `v₀` most significant. With `alpha = 0`, rows whose
//! conditioning cell is empty hold `NaN`; any query that puts positive
//! weight on such a row reports [`Error::UnidentifiableCell`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::roles::{validate_roles, SfmRoles};
use crate::util::{checked_cardinality, unravel};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Var {
    pub(crate) name: String,
    pub(crate) states: Vec<String>,
}

#[derive(Debug, Clone)]
struct Cpt {
    card: usize,
    counts: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SfmEstimator {
    roles: SfmRoles,
    vars: Vec<Var>,
    cards: Vec<usize>,
    nz: usize,
    nw: usize,
    cpts: Vec<Cpt>,
    alpha: f64,
    total_weight: f64,
    cap: u128,
    zero_cells: usize,
}

/// Dump of one conditional distribution, `P(targets | given)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub targets: Vec<String>,
    pub given: Vec<String>,
    pub target_states: Vec<Vec<String>>,
    pub alpha: f64,
    pub rows: Vec<ConditionalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub given_state: Vec<String>,
    pub probs: Vec<f64>,
}

impl SfmEstimator {
    pub fn fit(d: &Dataset, roles: &SfmRoles, alpha: f64) -> Result<Self> {
        Self::fit_with_cap(d, roles, alpha, DEFAULT_CAP)
    }

    pub fn fit_with_cap(d: &Dataset, roles: &SfmRoles, alpha: f64, cap: u128) -> Result<Self> {
        let report = validate_roles(d, roles, cap);
        if !report.is_valid() {
            let mut problems: Vec<String> = report
                .missing_columns
                .iter()
                .map(|c| format!("missing column `{c}`"))
                .collect();
            problems.extend(report.role_errors.iter().cloned());
            problems.extend(report.unknown_x_states.iter().map(|s| format!("unknown X state `{s}`")));
            if let Some(t) = &report.unknown_y_target {
                problems.push(format!("unknown y_target `{t}`"));
            }
            return Err(Error::InvalidRoles(problems.join("; ")));
        }
        let columns: Vec<_> = roles
            .ordered_columns()
            .into_iter()
            .map(|c| d.require_column(c))
            .collect::<Result<_>>()?;
        let vars = columns
            .iter()
            .map(|c| Var {
                name: c.name().to_string(),
                states: c.states().to_vec(),
            })
            .collect();
        let mut codes = vec![0usize; columns.len()];
        let rows = (0..d.n_rows()).map(|r| {
            for (slot, c) in codes.iter_mut().zip(&columns) {
                *slot = c.codes()[r] as usize;
            }
            (codes.clone(), 1.0)
        });
        Self::build(roles.clone(), vars, rows, alpha, cap)
    }

    /// Fits from weighted records. `domains` lists every role column with
    /// its states; each record holds one state index per domain entry, in
    /// the same order. Used to feed exact distributions (weights = masses).
    pub fn from_weighted<I>(
        roles: &SfmRoles,
        domains: &[(String, Vec<String>)],
        records: I,
        alpha: f64,
        cap: u128,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let errs = roles.structural_errors();
        if !errs.is_empty() {
            return Err(Error::InvalidRoles(errs.join("; ")));
        }
        let mut positions = Vec::new();
        let mut vars = Vec::new();
        for name in roles.ordered_columns() {
            let p = domains
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
            positions.push(p);
            vars.push(Var {
                name: name.to_string(),
                states: domains[p].1.clone(),
            });
        }
        let xv = &vars[roles.z.len()];
        for s in roles.x0_states.iter().chain(&roles.x1_states) {
            if !xv.states.contains(s) {
                return Err(Error::UnknownState {
                    column: xv.name.clone(),
                    state: s.clone(),
                });
            }
        }
        let rows = records
            .into_iter()
            .map(|(rec, w)| (positions.iter().map(|&p| rec[p]).collect::<Vec<_>>(), w));
        Self::build(roles.clone(), vars, rows, alpha, cap)
    }

    fn build<I>(roles: SfmRoles, vars: Vec<Var>, rows: I, alpha: f64, cap: u128) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        let cards: Vec<usize> = vars.iter().map(|v| v.states.len()).collect();
        checked_cardinality(cards.iter().copied(), cap)?;
        let mut counts: Vec<Vec<f64>> = Vec::with_capacity(cards.len());
        let mut size = 1usize;
        for &c in &cards {
            size *= c;
            counts.push(vec![0.0; size]);
        }
        let mut total_weight = 0.0;
        for (rec, w) in rows {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "record weight {w} is not a finite non-negative number"
                )));
            }
            total_weight += w;
            let mut idx = 0usize;
            for (i, (&code, &card)) in rec.iter().zip(&cards).enumerate() {
                if code >= card {
                    return Err(Error::UnknownState {
                        column: vars[i].name.clone(),
                        state: format!("#{code}"),
                    });
                }
                idx = idx * card + code;
                counts[i][idx] += w;
            }
        }

        let mut zero_cells = 0usize;
        let cpts = counts
            .into_iter()
            .zip(&cards)
            .map(|(counts, &card)| {
                let mut probs = vec![0.0; counts.len()];
                for (row_counts, row_probs) in counts.chunks(card).zip(probs.chunks_mut(card)) {
                    let n: f64 = row_counts.iter().sum();
                    if n == 0.0 {
                        zero_cells += 1;
                    }
                    let denom = n + alpha * card as f64;
                    for (p, &c) in row_probs.iter_mut().zip(row_counts) {
                        *p = if denom > 0.0 { (c + alpha) / denom } else { f64::NAN };
                    }
                }
                Cpt { card, counts, probs }
            })
            .collect();

        let nz = roles.z.len();
        let nw = roles.w.len();
        Ok(Self {
            roles,
            vars,
            cards,
            nz,
            nw,
            cpts,
            alpha,
            total_weight,
            cap,
            zero_cells,
        })
    }

    pub fn roles(&self) -> &SfmRoles {
        &self.roles
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cap(&self) -> u128 {
        self.cap
    }

    /// Total record weight (row count for datasets).
    pub fn n_rows(&self) -> f64 {
        self.total_weight
    }

    /// Number of CPT rows whose conditioning cell had no data.
    pub fn zero_count_cells(&self) -> usize {
        self.zero_cells
    }

    pub fn states(&self, column: &str) -> Result<&[String]> {
        self.position(column).map(|p| self.vars[p].states.as_slice())
    }

    pub fn x_states(&self) -> &[String] {
        &self.vars[self.nz].states
    }

    pub fn y_states(&self) -> &[String] {
        &self.vars[self.vars.len() - 1].states
    }

    pub(crate) fn x_pos(&self) -> usize {
        self.nz
    }

    pub(crate) fn y_pos(&self) -> usize {
        self.vars.len() - 1
    }

    fn position(&self, column: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == column)
            .ok_or_else(|| Error::UnknownColumn(column.to_string()))
    }

    pub(crate) fn state_of(&self, pos: usize, label: &str) -> Result<usize> {
        let v = &self.vars[pos];
        v.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState {
                column: v.name.clone(),
                state: label.to_string(),
            })
    }

    pub fn x_index(&self, label: &str) -> Result<usize> {
        self.state_of(self.x_pos(), label)
    }

    pub fn y_index(&self, label: &str) -> Result<usize> {
        self.state_of(self.y_pos(), label)
    }

    /// Observed weight n(x) of every X state.
    pub fn x_counts(&self) -> Vec<f64> {
        let cx = self.cards[self.nz];
        let mut out = vec![0.0; cx];
        for (i, c) in self.cpts[self.nz].counts.iter().enumerate() {
            out[i % cx] += c;
        }
        out
    }

    pub(crate) fn z_names(&self) -> impl Iterator<Item = &str> {
        self.vars[..self.nz].iter().map(|v| v.name.as_str())
    }

    pub(crate) fn w_names(&self) -> impl Iterator<Item = &str> {
        self.vars[self.nz + 1..self.nz + 1 + self.nw]
            .iter()
            .map(|v| v.name.as_str())
    }

    pub(crate) fn z_cards(&self) -> &[usize] {
        &self.cards[..self.nz]
    }

    pub(crate) fn w_cards(&self) -> &[usize] {
        &self.cards[self.nz + 1..self.nz + 1 + self.nw]
    }

    pub(crate) fn z_card(&self) -> usize {
        self.z_cards().iter().product()
    }

    pub(crate) fn w_card(&self) -> usize {
        self.w_cards().iter().product()
    }

    pub(crate) fn y_card(&self) -> usize {
        self.cards[self.y_pos()]
    }

    pub(crate) fn x_card(&self) -> usize {
        self.cards[self.nz]
    }

    pub(crate) fn z_labels(&self, z: usize) -> Vec<(String, String)> {
        let mut digits = vec![0usize; self.nz];
        unravel(z, self.z_cards(), &mut digits);
        self.vars[..self.nz]
            .iter()
            .zip(digits)
            .map(|(v, d)| (v.name.clone(), v.states[d].clone()))
            .collect()
    }

    /// Observed weight of every joint Z state.
    pub(crate) fn z_counts(&self) -> Vec<f64> {
        if self.nz == 0 {
            return vec![self.total_weight];
        }
        self.cpts[self.nz - 1].counts.clone()
    }

    /// P̂(z) over the joint Z domain.
    pub(crate) fn p_z(&self) -> Vec<f64> {
        let mut level = vec![1.0];
        for i in 0..self.nz {
            level = self.extend(&level, i, 0, 1);
        }
        level
    }

    /// P̂(x | z) for fixed x, indexed by joint z.
    pub(crate) fn p_x_given_z(&self, x: usize) -> Vec<f64> {
        let cx = self.x_card();
        let probs = &self.cpts[self.nz].probs;
        (0..self.z_card()).map(|z| probs[z * cx + x]).collect()
    }

    /// P̂(w | x, z) for fixed x, indexed by `z * |W| + w`.
    pub(crate) fn p_w_given_xz(&self, x: usize) -> Vec<f64> {
        let cx = self.x_card();
        let wc = self.w_card();
        let mut out = Vec::with_capacity(self.z_card() * wc);
        for z in 0..self.z_card() {
            let row = z * cx + x;
            let mut level = vec![1.0];
            for j in 0..self.nw {
                level = self.extend(&level, self.nz + 1 + j, row, level.len());
            }
            out.extend_from_slice(&level);
        }
        out
    }

    /// P̂(y | x, z, w) for fixed x, indexed by `(z * |W| + w) * |Y| + y`.
    pub(crate) fn p_y_given_xzw(&self, x: usize) -> Vec<f64> {
        let cx = self.x_card();
        let wc = self.w_card();
        let cy = self.y_card();
        let probs = &self.cpts[self.y_pos()].probs;
        let mut out = Vec::with_capacity(self.z_card() * wc * cy);
        for z in 0..self.z_card() {
            let base = (z * cx + x) * wc;
            out.extend_from_slice(&probs[base * cy..(base + wc) * cy]);
        }
        out
    }

    /// Multiplies `level` (a distribution over the current prefix block)
    /// by the CPT at `pos`. `row_offset * block` is the index of the block's
    /// first row in that CPT.
    fn extend(&self, level: &[f64], pos: usize, row_offset: usize, block: usize) -> Vec<f64> {
        let cpt = &self.cpts[pos];
        let card = cpt.card;
        let mut next = vec![0.0; level.len() * card];
        for (i, &p) in level.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = row_offset * block + i;
            for s in 0..card {
                next[i * card + s] = p * cpt.probs[row * card + s];
            }
        }
        next
    }

    /// One CPT, `P(column | predecessors)`, as a dumpable table.
    pub fn table(&self, column: &str) -> Result<ConditionalTable> {
        let pos = self.position(column)?;
        let cpt = &self.cpts[pos];
        let parent_cards = &self.cards[..pos];
        let mut digits = vec![0usize; pos];
        let rows = cpt
            .probs
            .chunks(cpt.card)
            .enumerate()
            .map(|(r, probs)| {
                unravel(r, parent_cards, &mut digits);
                ConditionalRow {
                    given_state: digits
                        .iter()
                        .zip(&self.vars)
                        .map(|(&d, v)| v.states[d].clone())
                        .collect(),
                    probs: probs.to_vec(),
                }
            })
            .collect();
        Ok(ConditionalTable {
            targets: vec![self.vars[pos].name.clone()],
            given: self.vars[..pos].iter().map(|v| v.name.clone()).collect(),
            target_states: vec![self.vars[pos].states.clone()],
            alpha: self.alpha,
            rows,
        })
    }

    /// P̂(targets | given) by exact inference on the fitted network.
    ///
    /// The result is indexed by the joint target state in lexicographic
    /// order (first target most significant).
    pub fn conditional(&self, targets: &[&str], given: &[(&str, &str)]) -> Result<Vec<f64>> {
        let mut fixed: Vec<Option<usize>> = vec![None; self.vars.len()];
        let mut last = 0usize;
        for (name, state) in given {
            let p = self.position(name)?;
            fixed[p] = Some(self.state_of(p, state)?);
            last = last.max(p);
        }
        let mut target_pos = Vec::with_capacity(targets.len());
        for t in targets {
            let p = self.position(t)?;
            if fixed[p].is_some() || target_pos.contains(&p) {
                return Err(Error::InvalidArgument(format!("target `{t}` repeated or also given")));
            }
            target_pos.push(p);
            last = last.max(p);
        }
        let target_cards: Vec<usize> = target_pos.iter().map(|&p| self.cards[p]).collect();
        let out_len = checked_cardinality(target_cards.iter().copied(), self.cap)?;
        if !targets.is_empty() || !given.is_empty() {
            checked_cardinality(
                (0..=last).filter(|&p| fixed[p].is_none()).map(|p| self.cards[p]),
                self.cap,
            )?;
        }
        let mut acc = vec![0.0; out_len];
        let mut assign = vec![0usize; self.vars.len()];
        if targets.is_empty() && given.is_empty() {
            return Ok(vec![1.0]);
        }
        self.enumerate(0, last, 0, 1.0, &fixed, &mut assign, &mut |assign, w| {
            let idx = target_pos
                .iter()
                .zip(&target_cards)
                .fold(0usize, |a, (&p, &c)| a * c + assign[p]);
            acc[idx] += w;
        });
        let total: f64 = acc.iter().sum();
        if !(total > 0.0) {
            let cell = given
                .iter()
                .map(|(n, s)| format!("{n}={s}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::UnidentifiableCell(cell));
        }
        for a in &mut acc {
            *a /= total;
        }
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate<F: FnMut(&[usize], f64)>(
        &self,
        pos: usize,
        last: usize,
        prefix: usize,
        weight: f64,
        fixed: &[Option<usize>],
        assign: &mut Vec<usize>,
        visit: &mut F,
    ) {
        let cpt = &self.cpts[pos];
        let states = match fixed[pos] {
            Some(s) => s..s + 1,
            None => 0..cpt.card,
        };
        for s in states {
            let idx = prefix * cpt.card + s;
            let p = cpt.probs[idx];
            if p == 0.0 {
                continue;
            }
            assign[pos] = s;
            let w = weight * p;
            if pos == last {
                visit(assign, w);
            } else {
                self.enumerate(pos + 1, last, idx, w, fixed, assign, visit);
            }
        }
    }

    /// Lexicographic enumeration of the declared joint domain of `vars`.
    pub fn joint_states(&self, vars: &[&str]) -> Result<JointStates> {
        let cards = vars
            .iter()
            .map(|v| self.position(v).map(|p| self.cards[p]))
            .collect::<Result<Vec<_>>>()?;
        JointStates::new(cards, self.cap)
    }
}

/// Iterator over a Cartesian product of state indices, last index fastest.
#[derive(Debug, Clone)]
pub struct JointStates {
    cards: Vec<usize>,
    next: Option<Vec<usize>>,
    len: usize,
}

impl JointStates {
    pub fn new(cards: Vec<usize>, cap: u128) -> Result<Self> {
        let len = checked_cardinality(cards.iter().copied(), cap)?;
        let next = if len == 0 { None } else { Some(vec![0; cards.len()]) };
        Ok(Self { cards, next, len })
    }

    pub fn cardinality(&self) -> usize {
        self.len
    }
}

impl Iterator for JointStates {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        let mut carried = true;
        while i > 0 && carried {
            i -= 1;
            succ[i] += 1;
            if succ[i] == self.cards[i] {
                succ[i] = 0;
            } else {
                carried = false;
            }
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}
