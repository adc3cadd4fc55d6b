use crate::LpError;

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A sparse row: `(column, coefficient)` pairs.
pub type SparseRow = Vec<(usize, f64)>;

/// `opt cᵀx  s.t.  M_eq x = r_eq,  M_in x ≤ r_in,  lb ≤ x ≤ ub`.
///
/// Bounds may be infinite. Rows are stored sparse; the solver densifies
/// internally.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub eq_rows: Vec<SparseRow>,
    pub eq_rhs: Vec<f64>,
    pub in_rows: Vec<SparseRow>,
    pub in_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// Creates a program over `n` variables, all free, with zero objective.
    pub fn new(sense: Sense, n: usize) -> Self {
        Self {
            sense,
            objective: vec![0.0; n],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            in_rows: Vec::new(),
            in_rhs: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.in_rows.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    /// Adds `row · x = rhs`, returning the equality-row index.
    pub fn add_eq(&mut self, row: SparseRow, rhs: f64) -> usize {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self.eq_rows.len() - 1
    }

    /// Adds `row · x ≤ rhs`, returning the inequality-row index.
    pub fn add_le(&mut self, row: SparseRow, rhs: f64) -> usize {
        self.in_rows.push(row);
        self.in_rhs.push(rhs);
        self.in_rows.len() - 1
    }

    /// Adds `row · x ≥ rhs` as `-row · x ≤ -rhs`.
    pub fn add_ge(&mut self, row: SparseRow, rhs: f64) -> usize {
        let neg = row.into_iter().map(|(j, a)| (j, -a)).collect();
        self.add_le(neg, -rhs)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::InvalidInput(
                "bound vectors do not match objective length".into(),
            ));
        }
        if self.eq_rows.len() != self.eq_rhs.len() || self.in_rows.len() != self.in_rhs.len() {
            return Err(LpError::InvalidInput(
                "row count does not match rhs length".into(),
            ));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::InvalidInput(
                "objective has a non-finite coefficient".into(),
            ));
        }
        for (row, rhs) in self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .chain(self.in_rows.iter().zip(&self.in_rhs))
        {
            if !rhs.is_finite() {
                return Err(LpError::InvalidInput("non-finite right-hand side".into()));
            }
            for &(j, a) in row {
                if j >= n {
                    return Err(LpError::InvalidInput(format!(
                        "column {j} out of range ({n} vars)"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidInput(format!(
                        "non-finite coefficient in column {j}"
                    )));
                }
            }
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(LpError::InvalidInput(format!("NaN bound on variable {j}")));
            }
        }
        Ok(())
    }

    /// Objective value of `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

const FARKAS_ZERO: f64 = 1e-10;

pub(crate) fn row_dot(row: &[(usize, f64)], x: &[f64]) -> f64 {
    row.iter().map(|&(j, a)| a * x[j]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP solve.
///
/// Dual sign convention (fixed for the whole workspace): for a
/// minimization the Lagrangian is
/// `cᵀx + mu_eqᵀ(r_eq − M_eq x) + mu_inᵀ(M_in x − r_in) − zᵀx`, for a
/// maximization it is `cᵀx + mu_eqᵀ(r_eq − M_eq x) + mu_inᵀ(r_in − M_in x) − zᵀx`.
/// In both cases `mu_eq` is free and equals `∂objective/∂r_eq`, `mu_in ≥ 0`,
/// and `z` holds the bound multipliers (reduced costs) in the original sense.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub mu_eq: Vec<f64>,
    pub mu_in: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Infeasibility certificate over the stacked rows `[eq; in]`, present
    /// when `status == Infeasible`. See [`LinearProgram::farkas_gap`].
    pub farkas: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Residual measures of a primal/dual pair, all in unscaled units.
#[derive(Debug, Clone, Copy, Default)]
pub struct Certificate {
    pub primal_residual: f64,
    pub bound_violation: f64,
    pub dual_sign_violation: f64,
    pub stationarity: f64,
    pub complementarity: f64,
    pub duality_gap: f64,
}

impl LinearProgram {
    /// Checks primal feasibility, dual feasibility, stationarity and
    /// complementary slackness of an optimal solution. Residuals are scaled
    /// by `1 + |rhs|` or `1 + |c|` per row/column.
    pub fn certify(&self, sol: &LpSolution) -> Certificate {
        let n = self.num_vars();
        let x = &sol.x;
        let mut cert = Certificate::default();
        for (row, &rhs) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let r = (row_dot(row, x) - rhs).abs() / (1.0 + rhs.abs());
            cert.primal_residual = cert.primal_residual.max(r);
        }
        for (i, (row, &rhs)) in self.in_rows.iter().zip(&self.in_rhs).enumerate() {
            let act = row_dot(row, x);
            let r = (act - rhs).max(0.0) / (1.0 + rhs.abs());
            cert.primal_residual = cert.primal_residual.max(r);
            let mu = sol.mu_in[i];
            cert.dual_sign_violation = cert.dual_sign_violation.max(-mu);
            let cs = (mu * (rhs - act)).abs() / (1.0 + rhs.abs());
            cert.complementarity = cert.complementarity.max(cs);
        }
        for j in 0..n {
            let v = x[j];
            let viol = (self.lower[j] - v).max(v - self.upper[j]).max(0.0);
            cert.bound_violation = cert.bound_violation.max(viol / (1.0 + v.abs()));
        }

        // Stationarity in the minimization frame.
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut grad: Vec<f64> = self.objective.iter().map(|c| sign * c).collect();
        for (row, &mu) in self.eq_rows.iter().zip(&sol.mu_eq) {
            for &(j, a) in row {
                grad[j] -= a * sign * mu;
            }
        }
        for (row, &mu) in self.in_rows.iter().zip(&sol.mu_in) {
            for &(j, a) in row {
                grad[j] += a * mu;
            }
        }
        let mut dual_obj = 0.0;
        for (&r, &mu) in self.eq_rhs.iter().zip(&sol.mu_eq) {
            dual_obj += sign * mu * r;
        }
        for (&r, &mu) in self.in_rhs.iter().zip(&sol.mu_in) {
            dual_obj -= mu * r;
        }
        for j in 0..n {
            let z = sign * sol.reduced_costs[j];
            let res = (grad[j] - z).abs() / (1.0 + self.objective[j].abs());
            cert.stationarity = cert.stationarity.max(res);
            // z ≥ 0 pushes against the lower bound, z ≤ 0 against the upper.
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if z > 0.0 {
                if lo.is_finite() {
                    cert.complementarity = cert
                        .complementarity
                        .max((z * (x[j] - lo)).abs() / (1.0 + lo.abs()));
                    dual_obj += z * lo;
                } else {
                    cert.dual_sign_violation = cert.dual_sign_violation.max(z);
                }
            } else if z < 0.0 {
                if hi.is_finite() {
                    cert.complementarity = cert
                        .complementarity
                        .max((z * (hi - x[j])).abs() / (1.0 + hi.abs()));
                    dual_obj += z * hi;
                } else {
                    cert.dual_sign_violation = cert.dual_sign_violation.max(-z);
                }
            }
        }
        let primal_obj = sign * sol.objective;
        cert.duality_gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs());
        cert
    }

    /// For a candidate ray `y` over the stacked rows `[eq; in]`, returns
    /// `yᵀr − sup { yᵀM x : lb ≤ x ≤ ub, slack ≥ 0 }`. A positive value
    /// proves the program infeasible. Returns `-inf` if the supremum is
    /// unbounded.
    pub fn farkas_gap(&self, y: &[f64]) -> f64 {
        let n = self.num_vars();
        let n_eq = self.eq_rows.len();
        let mut coef = vec![0.0; n];
        let mut rhs = 0.0;
        for (i, (row, &r)) in self.eq_rows.iter().zip(&self.eq_rhs).enumerate() {
            for &(j, a) in row {
                coef[j] += y[i] * a;
            }
            rhs += y[i] * r;
        }
        for (k, (row, &r)) in self.in_rows.iter().zip(&self.in_rhs).enumerate() {
            let yi = y[n_eq + k];
            // inequality row has an implicit slack ≥ 0 with coefficient +1
            if yi > FARKAS_ZERO {
                return f64::NEG_INFINITY;
            }
            for &(j, a) in row {
                coef[j] += yi * a;
            }
            rhs += yi * r;
        }
        let mut sup = 0.0;
        for j in 0..n {
            let a = coef[j];
            if a.abs() <= FARKAS_ZERO {
                continue;
            }
            if a > 0.0 {
                if !self.upper[j].is_finite() {
                    return f64::NEG_INFINITY;
                }
                sup += a * self.upper[j];
            } else if a < 0.0 {
                if !self.lower[j].is_finite() {
                    return f64::NEG_INFINITY;
                }
                sup += a * self.lower[j];
            }
        }
        rhs - sup
    }
}
