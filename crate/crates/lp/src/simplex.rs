//! Dense bounded-variable simplex.
//!
//! Every row `i` carries a logical column `e_i` with bounds `[0, 0]` for
//! equalities and `[0, ∞)` for `≤` rows, so the starting basis is the
//! identity and `B⁻¹` can always be read off the logical part of the
//! tableau. Primal feasibility is reached with a composite phase 1 (sum of
//! basic infeasibilities); warm starts after bound changes go through the
//! dual simplex, warm starts after objective changes through primal phase 2.

use nalgebra::DMatrix;

use crate::problem::{LinearProgram, LpSolution, LpStatus, Sense};
use crate::scaling::Scaling;
use crate::LpError;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REINVERT_EVERY: usize = 100;
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable sitting at zero.
    Free,
}

/// Basis snapshot used to restore a solver state (e.g. for B&B nodes).
#[derive(Debug, Clone)]
pub struct Basis {
    basic: Vec<usize>,
    at_upper: Vec<bool>,
}

/// A reusable simplex instance bound to one program structure. Bounds and
/// objective may be changed between solves; the matrix may not.
#[derive(Debug, Clone)]
pub struct SimplexSolver {
    sense: Sense,
    m: usize,
    n: usize,
    n_eq: usize,
    /// Scaled constraint matrix, row-major `m × n` (structural part only).
    mat: Vec<f64>,
    rhs: Vec<f64>,
    /// Minimization-frame costs for all `n + m` columns (scaled).
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    scaling: Scaling,

    tableau: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<VarStatus>,
    pivots_since_reinvert: usize,
    total_iterations: usize,
    max_iterations: usize,
    solved_once: bool,
}

enum PhaseOutcome {
    Optimal,
    Infeasible(Vec<f64>),
    Unbounded,
}

impl SimplexSolver {
    pub fn new(lp: &LinearProgram) -> Result<Self, LpError> {
        lp.validate()?;
        let n = lp.num_vars();
        let n_eq = lp.eq_rows.len();
        let m = lp.num_rows();
        let mut mat = vec![0.0; m * n];
        for (i, row) in lp.eq_rows.iter().chain(&lp.in_rows).enumerate() {
            for &(j, a) in row {
                mat[i * n + j] += a;
            }
        }
        let mut rhs: Vec<f64> = lp.eq_rhs.iter().chain(&lp.in_rhs).copied().collect();
        let scaling = Scaling::equilibrate(&mat, m, n);
        scaling.apply_matrix(&mut mat, m, n);
        for i in 0..m {
            rhs[i] *= scaling.row[i];
        }
        let ncols = n + m;
        let mut lb = vec![0.0; ncols];
        let mut ub = vec![0.0; ncols];
        for j in 0..n {
            lb[j] = lp.lower[j] / scaling.col[j];
            ub[j] = lp.upper[j] / scaling.col[j];
        }
        for i in 0..m {
            lb[n + i] = 0.0;
            ub[n + i] = if i < n_eq { 0.0 } else { f64::INFINITY };
        }
        let mut solver = Self {
            sense: lp.sense,
            m,
            n,
            n_eq,
            mat,
            rhs,
            cost: vec![0.0; ncols],
            lb,
            ub,
            scaling,
            tableau: Vec::new(),
            d: vec![0.0; ncols],
            x: vec![0.0; ncols],
            basis: (n..n + m).collect(),
            status: vec![VarStatus::AtLower; ncols],
            pivots_since_reinvert: 0,
            total_iterations: 0,
            max_iterations: 50_000 + 50 * (n + m),
            solved_once: false,
        };
        solver.set_objective(&lp.objective);
        solver.reset_to_logical_basis();
        Ok(solver)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Replaces the objective (original sense and units).
    pub fn set_objective(&mut self, c: &[f64]) {
        assert_eq!(c.len(), self.n, "objective length mismatch");
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        for j in 0..self.n {
            self.cost[j] = sign * c[j] * self.scaling.col[j];
        }
        if !self.tableau.is_empty() {
            self.recompute_reduced_costs();
        }
    }

    /// Changes the bounds of structural variable `j` (original units).
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        let s = self.scaling.col[j];
        self.lb[j] = lower / s;
        self.ub[j] = upper / s;
        if let VarStatus::Basic(_) = self.status[j] {
            return;
        }
        self.normalize_one(j);
        let target = self.nonbasic_value(j);
        let delta = target - self.x[j];
        if delta != 0.0 {
            self.move_nonbasic(j, delta);
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        let s = self.scaling.col[j];
        (self.lb[j] * s, self.ub[j] * s)
    }

    pub fn basis(&self) -> Basis {
        Basis {
            basic: self.basis.clone(),
            at_upper: self
                .status
                .iter()
                .map(|s| *s == VarStatus::AtUpper)
                .collect(),
        }
    }

    /// Restores a basis captured with [`SimplexSolver::basis`] and rebuilds
    /// the tableau. Falls back to the logical basis if it is singular.
    pub fn restore_basis(&mut self, basis: &Basis) {
        let ncols = self.n + self.m;
        for j in 0..ncols {
            self.status[j] = if basis.at_upper[j] {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            };
        }
        for (r, &j) in basis.basic.iter().enumerate() {
            self.status[j] = VarStatus::Basic(r);
        }
        self.basis = basis.basic.clone();
        self.normalize_nonbasic_status();
        if self.reinvert().is_err() {
            self.reset_to_logical_basis();
        }
    }

    fn reset_to_logical_basis(&mut self) {
        let ncols = self.n + self.m;
        self.basis = (self.n..ncols).collect();
        for j in 0..ncols {
            self.status[j] = VarStatus::AtLower;
        }
        for (r, &j) in self.basis.iter().enumerate() {
            self.status[j] = VarStatus::Basic(r);
        }
        self.normalize_nonbasic_status();
        self.reinvert().expect("identity basis is never singular");
    }

    fn normalize_nonbasic_status(&mut self) {
        for j in 0..self.n + self.m {
            if let VarStatus::Basic(_) = self.status[j] {
                continue;
            }
            self.normalize_one(j);
            self.x[j] = self.nonbasic_value(j);
        }
    }

    fn normalize_one(&mut self, j: usize) {
        let (lo, hi) = (self.lb[j], self.ub[j]);
        self.status[j] = match self.status[j] {
            VarStatus::Basic(r) => VarStatus::Basic(r),
            VarStatus::AtUpper if hi.is_finite() => VarStatus::AtUpper,
            _ if lo.is_finite() => VarStatus::AtLower,
            _ if hi.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Free,
        };
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower if self.lb[j].is_finite() => self.lb[j],
            VarStatus::AtUpper if self.ub[j].is_finite() => self.ub[j],
            _ if self.lb[j].is_finite() => self.lb[j],
            _ if self.ub[j].is_finite() => self.ub[j],
            _ => 0.0,
        }
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            for i in 0..self.m {
                out[i] = self.mat[i * self.n + j];
            }
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.n] = 1.0;
        }
    }

    /// Rebuilds `T = B⁻¹[M | I]`, basic values and reduced costs from the
    /// current basis using a fresh LU factorization.
    fn reinvert(&mut self) -> Result<(), LpError> {
        let (m, n) = (self.m, self.n);
        let ncols = n + m;
        self.pivots_since_reinvert = 0;
        if m == 0 {
            self.tableau.clear();
            for j in 0..ncols {
                self.x[j] = self.nonbasic_value(j);
            }
            self.recompute_reduced_costs();
            return Ok(());
        }
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        let mut col = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                bmat[(i, r)] = col[i];
            }
        }
        let binv = bmat
            .lu()
            .try_inverse()
            .ok_or_else(|| LpError::NumericalFailure("singular basis during reinversion".into()))?;
        if binv.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NumericalFailure("non-finite basis inverse".into()));
        }
        let mut tab = vec![0.0; m * ncols];
        for r in 0..m {
            let trow = &mut tab[r * ncols..(r + 1) * ncols];
            for k in 0..m {
                let bik = binv[(r, k)];
                if bik == 0.0 {
                    continue;
                }
                let arow = &self.mat[k * n..(k + 1) * n];
                for (t, a) in trow[..n].iter_mut().zip(arow) {
                    *t += bik * a;
                }
                trow[n + k] = bik;
            }
        }
        self.tableau = tab;

        // basic values: B x_B = r − Σ_{nonbasic} a_j x_j
        let mut eff = self.rhs.clone();
        for j in 0..ncols {
            if let VarStatus::Basic(_) = self.status[j] {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v == 0.0 {
                continue;
            }
            if j < n {
                for i in 0..m {
                    eff[i] -= self.mat[i * n + j] * v;
                }
            } else {
                eff[j - n] -= v;
            }
        }
        for r in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += binv[(r, k)] * eff[k];
            }
            self.x[self.basis[r]] = acc;
        }
        self.recompute_reduced_costs();
        Ok(())
    }

    fn recompute_reduced_costs(&mut self) {
        let ncols = self.n + self.m;
        self.d.copy_from_slice(&self.cost);
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let trow = &self.tableau[r * ncols..(r + 1) * ncols];
            for (dj, t) in self.d.iter_mut().zip(trow) {
                *dj -= cb * t;
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn move_nonbasic(&mut self, j: usize, delta: f64) {
        let ncols = self.n + self.m;
        self.x[j] += delta;
        for r in 0..self.m {
            let t = self.tableau[r * ncols + j];
            if t != 0.0 {
                self.x[self.basis[r]] -= t * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncols = self.n + self.m;
        let piv = self.tableau[r * ncols + q];
        {
            let row = &mut self.tableau[r * ncols..(r + 1) * ncols];
            let inv = 1.0 / piv;
            row.iter_mut().for_each(|v| *v *= inv);
            row[q] = 1.0;
        }
        let (before, rest) = self.tableau.split_at_mut(r * ncols);
        let (prow, after) = rest.split_at_mut(ncols);
        for chunk in before
            .chunks_exact_mut(ncols)
            .chain(after.chunks_exact_mut(ncols))
        {
            let f = chunk[q];
            if f != 0.0 {
                for (t, p) in chunk.iter_mut().zip(prow.iter()) {
                    *t -= f * p;
                }
                chunk[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dj, p) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= f * p;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.status[q] = VarStatus::Basic(r);
        // caller sets the leaving status; default to the nearer bound
        self.status[leaving] = VarStatus::AtLower;
        self.pivots_since_reinvert += 1;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lb[j] - PRIMAL_TOL {
            self.lb[j] - v
        } else if v > self.ub[j] + PRIMAL_TOL {
            v - self.ub[j]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&j| self.infeasibility(j) == 0.0)
    }

    fn dual_feasible(&self) -> bool {
        (0..self.n + self.m).all(|j| self.dual_violation(j, &self.d) <= DUAL_TOL)
    }

    fn dual_violation(&self, j: usize, d: &[f64]) -> f64 {
        if self.lb[j] == self.ub[j] {
            return 0.0;
        }
        match self.status[j] {
            VarStatus::Basic(_) => 0.0,
            VarStatus::AtLower => (-d[j]).max(0.0),
            VarStatus::AtUpper => d[j].max(0.0),
            VarStatus::Free => d[j].abs(),
        }
    }

    fn maybe_reinvert(&mut self) -> Result<(), LpError> {
        if self.pivots_since_reinvert >= REINVERT_EVERY {
            self.reinvert()?;
        }
        Ok(())
    }

    fn bump_iterations(&mut self) -> Result<(), LpError> {
        self.total_iterations += 1;
        if self.total_iterations > self.max_iterations {
            return Err(LpError::NumericalFailure(format!(
                "iteration limit {} exceeded",
                self.max_iterations
            )));
        }
        Ok(())
    }

    /// Primal simplex. With `phase1 == true` minimizes the sum of basic
    /// infeasibilities; otherwise assumes a primal feasible basis.
    fn primal(&mut self, phase1: bool) -> Result<PhaseOutcome, LpError> {
        let ncols = self.n + self.m;
        let mut degenerate_run = 0usize;
        let mut d1 = vec![0.0; ncols];
        let mut c1 = vec![0.0; self.m];
        loop {
            self.bump_iterations()?;
            self.maybe_reinvert()?;
            let bland = degenerate_run >= DEGENERATE_SWITCH;

            if phase1 {
                let mut any = false;
                for r in 0..self.m {
                    let j = self.basis[r];
                    c1[r] = if self.x[j] < self.lb[j] - PRIMAL_TOL {
                        any = true;
                        -1.0
                    } else if self.x[j] > self.ub[j] + PRIMAL_TOL {
                        any = true;
                        1.0
                    } else {
                        0.0
                    };
                }
                if !any {
                    return Ok(PhaseOutcome::Optimal);
                }
                d1.iter_mut().for_each(|v| *v = 0.0);
                for r in 0..self.m {
                    if c1[r] == 0.0 {
                        continue;
                    }
                    let trow = &self.tableau[r * ncols..(r + 1) * ncols];
                    for (dj, t) in d1.iter_mut().zip(trow) {
                        *dj -= c1[r] * t;
                    }
                }
                for r in 0..self.m {
                    d1[self.basis[r]] = 0.0;
                }
            }

            // pricing
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..ncols {
                if self.lb[j] == self.ub[j] {
                    continue;
                }
                let dj = if phase1 { d1[j] } else { self.d[j] };
                let dir = match self.status[j] {
                    VarStatus::Basic(_) => continue,
                    VarStatus::AtLower if dj < -DUAL_TOL => 1.0,
                    VarStatus::AtUpper if dj > DUAL_TOL => -1.0,
                    VarStatus::Free if dj.abs() > DUAL_TOL => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                if phase1 {
                    // composite phase 1 stalled with residual infeasibility
                    let mut y = vec![0.0; self.m];
                    for r in 0..self.m {
                        if c1[r] == 0.0 {
                            continue;
                        }
                        for (i, yi) in y.iter_mut().enumerate() {
                            *yi += c1[r] * self.tableau[r * ncols + self.n + i];
                        }
                    }
                    return Ok(PhaseOutcome::Infeasible(y));
                }
                return Ok(PhaseOutcome::Optimal);
            };

            // ratio test (Harris two-pass, or textbook under Bland)
            let mut limit = f64::INFINITY;
            let own = self.ub[q] - self.lb[q];
            let rates: Vec<(usize, f64)> = (0..self.m)
                .filter_map(|r| {
                    let t = self.tableau[r * ncols + q];
                    if t.abs() <= PIVOT_TOL {
                        None
                    } else {
                        Some((r, -t * dir))
                    }
                })
                .collect();
            let tol = if bland { 0.0 } else { PRIMAL_TOL };
            let bound_gap = |s: &Self, r: usize, rate: f64, slack: f64| -> Option<f64> {
                let j = s.basis[r];
                let v = s.x[j];
                let (lo, hi) = (s.lb[j], s.ub[j]);
                let below = v < lo - PRIMAL_TOL;
                let above = v > hi + PRIMAL_TOL;
                if phase1 && below {
                    return if rate > 0.0 {
                        Some((lo - v + slack) / rate)
                    } else {
                        None
                    };
                }
                if phase1 && above {
                    return if rate < 0.0 {
                        Some((v - hi + slack) / -rate)
                    } else {
                        None
                    };
                }
                if rate < 0.0 && lo.is_finite() {
                    Some(((v - lo).max(0.0) + slack) / -rate)
                } else if rate > 0.0 && hi.is_finite() {
                    Some(((hi - v).max(0.0) + slack) / rate)
                } else {
                    None
                }
            };
            for &(r, rate) in &rates {
                if let Some(g) = bound_gap(self, r, rate, tol) {
                    limit = limit.min(g);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            if limit.is_finite() {
                let mut best_piv = -1.0;
                let mut best_idx = usize::MAX;
                for &(r, rate) in &rates {
                    if let Some(g) = bound_gap(self, r, rate, 0.0) {
                        if g <= limit {
                            let key_better = if bland {
                                self.basis[r] < best_idx
                            } else {
                                rate.abs() > best_piv
                            };
                            if key_better {
                                best_piv = rate.abs();
                                best_idx = self.basis[r];
                                leave = Some((r, g.max(0.0)));
                            }
                        }
                    }
                }
            }

            if own.is_finite() && leave.map_or(true, |(_, step)| own <= step) {
                // bound flip
                self.move_nonbasic(q, dir * own);
                self.status[q] = if dir > 0.0 {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                degenerate_run = 0;
                continue;
            }
            let Some((r, step)) = leave else {
                if phase1 {
                    return Err(LpError::NumericalFailure("unbounded ray in phase 1".into()));
                }
                return Ok(PhaseOutcome::Unbounded);
            };
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let leaving = self.basis[r];
            let rate = -self.tableau[r * ncols + q] * dir;
            // leaving variable lands on the bound it was moving towards
            let to_upper = if phase1 && self.x[leaving] < self.lb[leaving] - PRIMAL_TOL {
                false
            } else if phase1 && self.x[leaving] > self.ub[leaving] + PRIMAL_TOL {
                true
            } else {
                rate > 0.0
            };
            self.move_nonbasic(q, dir * step);
            let snapped = if to_upper {
                self.ub[leaving]
            } else {
                self.lb[leaving]
            };
            self.pivot(r, q);
            self.status[leaving] = if to_upper {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            };
            if snapped.is_finite() {
                self.x[leaving] = snapped;
            } else {
                self.status[leaving] = VarStatus::Free;
                self.x[leaving] = 0.0;
            }
        }
    }

    /// Dual simplex from a dual feasible basis.
    fn dual(&mut self) -> Result<PhaseOutcome, LpError> {
        let ncols = self.n + self.m;
        let mut degenerate_run = 0usize;
        loop {
            self.bump_iterations()?;
            self.maybe_reinvert()?;
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let mut leave: Option<usize> = None;
            let mut worst = 0.0;
            for r in 0..self.m {
                let inf = self.infeasibility(self.basis[r]);
                if inf > 0.0 {
                    if bland {
                        if leave.map_or(true, |l| self.basis[r] < self.basis[l]) {
                            leave = Some(r);
                        }
                    } else if inf > worst {
                        worst = inf;
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(PhaseOutcome::Optimal);
            };
            let bj = self.basis[r];
            let increase = self.x[bj] < self.lb[bj];
            let target = if increase { self.lb[bj] } else { self.ub[bj] };
            let trow: Vec<f64> = self.tableau[r * ncols..(r + 1) * ncols].to_vec();

            // candidate columns: moving x_j in its feasible direction must push x_r towards target
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..ncols {
                if self.lb[j] == self.ub[j] {
                    continue;
                }
                let t = trow[j];
                if t.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_r changes by −t·Δx_j
                let dirs: &[f64] = match self.status[j] {
                    VarStatus::Basic(_) => continue,
                    VarStatus::AtLower => &[1.0],
                    VarStatus::AtUpper => &[-1.0],
                    VarStatus::Free => &[1.0, -1.0],
                };
                for &dir in dirs {
                    let effect = -t * dir;
                    if (increase && effect > 0.0) || (!increase && effect < 0.0) {
                        let ratio = (self.d[j] * dir).max(0.0).abs() / t.abs();
                        let ratio = if self.status[j] == VarStatus::Free {
                            self.d[j].abs() / t.abs()
                        } else {
                            ratio
                        };
                        cands.push((j, ratio, t.abs()));
                    }
                }
            }
            if cands.is_empty() {
                let sgn = if increase { -1.0 } else { 1.0 };
                let y: Vec<f64> = trow[self.n..].iter().map(|v| sgn * v).collect();
                return Ok(PhaseOutcome::Infeasible(y));
            }
            let q = if bland {
                let min_ratio = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                cands
                    .iter()
                    .filter(|c| c.1 <= min_ratio)
                    .map(|c| c.0)
                    .min()
                    .unwrap()
            } else {
                let bound = cands
                    .iter()
                    .map(|c| c.1 + DUAL_TOL / c.2)
                    .fold(f64::INFINITY, f64::min);
                let mut best = None;
                let mut best_piv = -1.0;
                for &(j, ratio, piv) in &cands {
                    if ratio <= bound && piv > best_piv {
                        best_piv = piv;
                        best = Some(j);
                    }
                }
                best.unwrap()
            };
            let t = trow[q];
            let delta = (self.x[bj] - target) / t;
            if delta.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.move_nonbasic(q, delta);
            self.pivot(r, q);
            self.status[bj] = if increase {
                VarStatus::AtLower
            } else {
                VarStatus::AtUpper
            };
            self.x[bj] = target;
        }
    }

    /// Solves from the current state, choosing the cheapest applicable
    /// algorithm (primal phase 2, dual simplex, or phase 1 + 2).
    pub fn solve(&mut self) -> Result<LpSolution, LpError> {
        let mut attempts = 0;
        loop {
            attempts += 1;
            let outcome = if self.primal_feasible() {
                self.primal(false)?
            } else if self.solved_once && self.dual_feasible() {
                match self.dual()? {
                    PhaseOutcome::Optimal => self.primal(false)?,
                    PhaseOutcome::Infeasible(_) => {
                        // a drifted tableau can fake a dual ray; confirm
                        // from a fresh factorization
                        self.reinvert()?;
                        match self.primal(true)? {
                            PhaseOutcome::Optimal => self.primal(false)?,
                            other => other,
                        }
                    }
                    other => other,
                }
            } else {
                match self.primal(true)? {
                    PhaseOutcome::Optimal => self.primal(false)?,
                    other => other,
                }
            };
            self.solved_once = true;
            match outcome {
                PhaseOutcome::Optimal => {
                    self.reinvert()?;
                    if (self.primal_feasible() && self.dual_feasible()) || attempts >= 4 {
                        return Ok(self.extract(LpStatus::Optimal, None));
                    }
                    log::debug!(
                        "simplex: refactorization exposed residual infeasibility, resuming"
                    );
                }
                PhaseOutcome::Infeasible(y) => {
                    let y = self.unscale_ray(&y);
                    return Ok(self.extract(LpStatus::Infeasible, Some(y)));
                }
                PhaseOutcome::Unbounded => return Ok(self.extract(LpStatus::Unbounded, None)),
            }
        }
    }

    fn unscale_ray(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.scaling.row)
            .map(|(v, r)| v * r)
            .collect()
    }

    fn extract(&self, status: LpStatus, farkas: Option<Vec<f64>>) -> LpSolution {
        let (m, n) = (self.m, self.n);
        let ncols = n + m;
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let x: Vec<f64> = (0..n).map(|j| self.x[j] * self.scaling.col[j]).collect();
        // y = c_Bᵀ B⁻¹ in the scaled minimization frame
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = self.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += cb * self.tableau[r * ncols + n + i];
            }
        }
        let mut mu_eq = Vec::with_capacity(self.n_eq);
        let mut mu_in = Vec::with_capacity(m - self.n_eq);
        for i in 0..m {
            let yi = y[i] * self.scaling.row[i];
            if i < self.n_eq {
                mu_eq.push(sign * yi);
            } else {
                mu_in.push(-yi);
            }
        }
        let reduced_costs: Vec<f64> = (0..n)
            .map(|j| sign * self.d[j] / self.scaling.col[j])
            .collect();
        let objective = match status {
            LpStatus::Optimal => {
                let c: f64 = (0..n).map(|j| self.cost[j] * self.x[j]).sum();
                sign * c
            }
            LpStatus::Infeasible => f64::NAN,
            LpStatus::Unbounded => sign * f64::NEG_INFINITY,
        };
        LpSolution {
            status,
            x,
            mu_eq,
            mu_in,
            reduced_costs,
            objective,
            farkas,
            iterations: self.total_iterations,
        }
    }
}

/// Solves `lp` from scratch.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let mut solver = SimplexSolver::new(lp)?;
    let mut sol = solver.solve()?;
    if sol.status == LpStatus::Infeasible {
        // certificate is checked against the original data; keep it only if it proves the claim
        if let Some(y) = &sol.farkas {
            if lp.farkas_gap(y) <= 0.0 {
                let neg: Vec<f64> = y.iter().map(|v| -v).collect();
                sol.farkas = (lp.farkas_gap(&neg) > 0.0).then_some(neg);
            }
        }
    }
    Ok(sol)
}
