//! Elastic version of the compact model at fixed `w`: every row gets
//! penalized slack, so the program is always feasible and its optimum
//! measures how far `w` is from being dispatchable.

use drr_lp::{LinearProgram, LpStatus, Sense, SimplexSolver};

use crate::config::SlackPrices;
use crate::error::{DrrError, Result};
use crate::model::{CompactPsd, ConstraintDescriptor, RowKind};

/// Per-row slack prices. An infinite price makes the row hard.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackWeights {
    pub eq: Vec<f64>,
    pub ineq: Vec<f64>,
}

impl SlackWeights {
    pub fn uniform(m: &CompactPsd) -> Self {
        Self {
            eq: vec![1.0; m.eq_rows.len()],
            ineq: vec![1.0; m.in_rows.len()],
        }
    }

    pub fn from_prices(m: &CompactPsd, prices: &SlackPrices) -> Self {
        let price = |d: &ConstraintDescriptor| match d.kind {
            RowKind::NodalBalance(_) => prices.balance,
            RowKind::FlowDefinition(_) => prices.flow_definition,
            RowKind::AngleRef => prices.angle_reference,
            RowKind::FlowUpper(_) | RowKind::FlowLower(_) => prices.flow_limit,
            RowKind::GenUpper(_) | RowKind::GenLower(_) => prices.generation,
            RowKind::AngleDiffUpper(_) | RowKind::AngleDiffLower(_) => prices.angle_difference,
        };
        Self {
            eq: m.eq_desc.iter().map(price).collect(),
            ineq: m.in_desc.iter().map(price).collect(),
        }
    }

    /// Physics rows (balance, flow definition, reference) become hard; only
    /// operating limits may be violated.
    pub fn limits_only(m: &CompactPsd, prices: &SlackPrices) -> Self {
        let mut w = Self::from_prices(m, prices);
        w.eq.iter_mut().for_each(|v| *v = f64::INFINITY);
        w
    }

    fn check(&self, m: &CompactPsd) -> Result<()> {
        if self.eq.len() != m.eq_rows.len() || self.ineq.len() != m.in_rows.len() {
            return Err(DrrError::DimensionMismatch(
                "slack weights do not match the model rows".into(),
            ));
        }
        if self.eq.iter().chain(&self.ineq).any(|w| !(*w > 0.0)) {
            return Err(DrrError::InvalidConfig(
                "slack weights must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub objective: f64,
    /// `t⁺ + t⁻` per equality row.
    pub slack_eq: Vec<f64>,
    /// `s` per inequality row.
    pub slack_in: Vec<f64>,
    /// Optimal `[p | l | v]`.
    pub dispatch: Vec<f64>,
    /// Equality and inequality multipliers: the maximizing `(α, δ)` of the
    /// dual program at this `w`.
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
}

impl FeasibilityResult {
    /// Rows with slack above `tol`, equalities first.
    pub fn slack_by_row<'m>(
        &self,
        m: &'m CompactPsd,
        tol: f64,
    ) -> Vec<(&'m ConstraintDescriptor, f64)> {
        let eq = m.eq_desc.iter().zip(&self.slack_eq);
        let ineq = m.in_desc.iter().zip(&self.slack_in);
        eq.chain(ineq)
            .filter(|(_, &s)| s > tol)
            .map(|(d, &s)| (d, s))
            .collect()
    }
}

/// Reusable elastic model; `w` enters as fixed variables so changing it only
/// moves bounds and the next solve warm-starts.
#[derive(Debug, Clone)]
pub struct FeasibilityModel {
    solver: SimplexSolver,
    nw: usize,
    n_core: usize,
    eq_slack: Vec<Option<(usize, usize)>>,
    in_slack: Vec<Option<usize>>,
}

impl FeasibilityModel {
    pub fn new(m: &CompactPsd, weights: &SlackWeights) -> Result<Self> {
        weights.check(m)?;
        let n_core = m.n_cols();
        let mut lp = LinearProgram::new(Sense::Minimize, n_core);
        for k in 0..m.nw {
            lp.set_bounds(k, m.w_bar[k], m.w_bar[k]);
        }
        let mut eq_slack = Vec::with_capacity(m.eq_rows.len());
        for (row, (&rhs, &wt)) in m.eq_rows.iter().zip(m.b.iter().zip(&weights.eq)) {
            let mut r = row.clone();
            if wt.is_finite() {
                let tp = lp.add_var(wt, 0.0, f64::INFINITY);
                let tm = lp.add_var(wt, 0.0, f64::INFINITY);
                r.push((tp, 1.0));
                r.push((tm, -1.0));
                eq_slack.push(Some((tp, tm)));
            } else {
                eq_slack.push(None);
            }
            lp.add_eq(r, rhs);
        }
        let mut in_slack = Vec::with_capacity(m.in_rows.len());
        for (row, (&rhs, &wt)) in m.in_rows.iter().zip(m.d.iter().zip(&weights.ineq)) {
            let mut r = row.clone();
            if wt.is_finite() {
                let s = lp.add_var(wt, 0.0, f64::INFINITY);
                r.push((s, -1.0));
                in_slack.push(Some(s));
            } else {
                in_slack.push(None);
            }
            lp.add_le(r, rhs);
        }
        Ok(Self {
            solver: SimplexSolver::new(&lp)?,
            nw: m.nw,
            n_core,
            eq_slack,
            in_slack,
        })
    }

    /// Pins the slack of inequality row `row` to zero (or releases it).
    pub fn force_zero(&mut self, row: usize, forced: bool) {
        if let Some(s) = self.in_slack[row] {
            let hi = if forced { 0.0 } else { f64::INFINITY };
            self.solver.set_bounds(s, 0.0, hi);
        }
    }

    pub fn evaluate(&mut self, w: &[f64]) -> Result<FeasibilityResult> {
        if w.len() != self.nw {
            return Err(DrrError::DimensionMismatch(format!(
                "w has {} entries, model {}",
                w.len(),
                self.nw
            )));
        }
        for (k, &v) in w.iter().enumerate() {
            self.solver.set_bounds(k, v, v);
        }
        let sol = self.solver.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(DrrError::SolverStatus(format!(
                "feasibility model is {:?}",
                sol.status
            )));
        }
        let slack_eq = self
            .eq_slack
            .iter()
            .map(|s| s.map_or(0.0, |(p, m)| sol.x[p] + sol.x[m]))
            .collect();
        let slack_in = self
            .in_slack
            .iter()
            .map(|s| s.map_or(0.0, |j| sol.x[j]))
            .collect();
        Ok(FeasibilityResult {
            objective: sol.objective,
            slack_eq,
            slack_in,
            dispatch: sol.x[self.nw..self.n_core].to_vec(),
            alpha: sol.mu_eq,
            delta: sol.mu_in,
        })
    }
}

/// Optimal total weighted slack at fixed `w` (per-unit). Default weights
/// are all one.
pub fn feasibility_model(
    m: &CompactPsd,
    w: &[f64],
    weights: Option<&SlackWeights>,
) -> Result<FeasibilityResult> {
    let uniform;
    let weights = match weights {
        Some(w) => w,
        None => {
            uniform = SlackWeights::uniform(m);
            &uniform
        }
    };
    FeasibilityModel::new(m, weights)?.evaluate(w)
}
