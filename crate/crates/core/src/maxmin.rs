//! The max-min violation problem and its exact mixed-binary oracle.
//!
//! The inner minimum at fixed `w` is replaced by its dual
//! `max αᵀ(b − Aw) − δᵀ(d − Ew)` over `Bᵀα = Fᵀδ`, `Cᵀα = Gᵀδ`,
//! `Dᵀα = Jᵀδ`, `|α| ≤ ω`, `0 ≤ δ ≤ ω`. For fixed `(α, δ)` the outer
//! maximum over `Hw ≤ f` is an LP whose optimality conditions
//! `−Aᵀα + Eᵀδ = Hᵀθ`, `θ ≥ 0`, `θ ⊥ f − Hw` turn the bilinear term into
//! `θᵀf`; complementarity is then linearized with binaries and big-M.

use drr_lp::{solve_mip_with, LinearProgram, LpStatus, MipOptions, MixedProgram, Sense, SparseRow};
use serde::Serialize;

use crate::config::{Method, StudyConfig};
use crate::error::{DrrError, Result};
use crate::feasibility::SlackWeights;
use crate::model::CompactPsd;
use crate::polytope::{dot, Polytope};

/// Result of one oracle call. `f` is in per-unit.
#[derive(Debug, Clone, Serialize)]
pub struct MaxMinSolution {
    pub f: f64,
    pub w_star: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub theta: Vec<f64>,
    pub method: Method,
    /// Scenario index for IBLP results.
    pub scenario: Option<usize>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// `‖Aᵀα − Eᵀδ + Hᵀθ‖∞`
    pub kkt_residual: f64,
    /// `max_i |θ_i (f_i − H_i w)|`
    pub complementarity_residual: f64,
    pub big_m: f64,
    /// `1 − max θ / M`
    pub big_m_margin: f64,
    pub big_m_retried: bool,
    pub nodes: usize,
    pub alternations: usize,
    /// Objective after each half-step of the alternation.
    pub alternation_values: Vec<f64>,
}

/// The dual program with `w` left symbolic. Dual variables are stacked as
/// `y = [α | δ]`.
#[derive(Debug, Clone)]
pub struct DualizedMaxMin {
    pub n_alpha: usize,
    pub n_delta: usize,
    pub nw: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Rows over `y` that must vanish: one per `p`, `l` and `v` column.
    pub coupling: Vec<SparseRow>,
    /// `[b | −d]`, so that `constantᵀy = αᵀb − δᵀd`.
    pub constant: Vec<f64>,
    /// Row `j` over `y` gives `g_j = (−Aᵀα + Eᵀδ)_j`.
    pub gradient: Vec<SparseRow>,
    pub region: Polytope,
}

impl DualizedMaxMin {
    pub fn n_dual(&self) -> usize {
        self.n_alpha + self.n_delta
    }

    /// Objective coefficients over `y` at fixed `w`.
    pub fn objective_at(&self, w: &[f64]) -> Vec<f64> {
        let mut c = self.constant.clone();
        for (row, &wj) in self.gradient.iter().zip(w) {
            for &(i, a) in row {
                c[i] += a * wj;
            }
        }
        c
    }

    /// The dual program at fixed `w` as an LP over `y`.
    pub fn fixed_w_lp(&self, w: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Maximize, self.n_dual());
        lp.objective = self.objective_at(w);
        lp.lower = self.lower.clone();
        lp.upper = self.upper.clone();
        for row in &self.coupling {
            lp.add_eq(row.clone(), 0.0);
        }
        lp
    }

    pub fn gradient_at(&self, y: &[f64]) -> Vec<f64> {
        self.gradient
            .iter()
            .map(|row| row.iter().map(|&(i, a)| a * y[i]).sum())
            .collect()
    }

    pub fn constant_at(&self, y: &[f64]) -> f64 {
        dot(&self.constant, y)
    }

    pub fn split(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            y[..self.n_alpha].to_vec(),
            y[self.n_alpha..self.n_dual()].to_vec(),
        )
    }
}

pub fn dualize(
    m: &CompactPsd,
    weights: &SlackWeights,
    region: &Polytope,
) -> Result<DualizedMaxMin> {
    if region.dim != m.nw {
        return Err(DrrError::DimensionMismatch(format!(
            "region has dimension {}, model has {} renewables",
            region.dim, m.nw
        )));
    }
    if weights.eq.len() != m.eq_rows.len() || weights.ineq.len() != m.in_rows.len() {
        return Err(DrrError::DimensionMismatch(
            "slack weights do not match the model rows".into(),
        ));
    }
    if weights
        .eq
        .iter()
        .chain(&weights.ineq)
        .any(|w| !(w.is_finite() && *w > 0.0))
    {
        return Err(DrrError::InvalidConfig(
            "dual program needs finite positive slack weights".into(),
        ));
    }
    let (na, nd) = (m.eq_rows.len(), m.in_rows.len());
    let mut lower: Vec<f64> = weights.eq.iter().map(|w| -w).collect();
    lower.extend(std::iter::repeat(0.0).take(nd));
    let mut upper = weights.eq.clone();
    upper.extend(weights.ineq.iter().copied());

    let ncols = m.n_cols();
    let mut coupling: Vec<SparseRow> = vec![Vec::new(); ncols - m.nw];
    let mut gradient: Vec<SparseRow> = vec![Vec::new(); m.nw];
    for (i, row) in m.eq_rows.iter().enumerate() {
        for &(j, a) in row {
            if j < m.nw {
                gradient[j].push((i, -a));
            } else {
                coupling[j - m.nw].push((i, a));
            }
        }
    }
    for (k, row) in m.in_rows.iter().enumerate() {
        for &(j, a) in row {
            if j < m.nw {
                gradient[j].push((na + k, a));
            } else {
                coupling[j - m.nw].push((na + k, -a));
            }
        }
    }
    let mut constant = m.b.clone();
    constant.extend(m.d.iter().map(|v| -v));
    Ok(DualizedMaxMin {
        n_alpha: na,
        n_delta: nd,
        nw: m.nw,
        lower,
        upper,
        coupling,
        constant,
        gradient,
        region: region.clone(),
    })
}

/// Column layout of the mixed program: `[y | θ | w | λ]`.
#[derive(Debug, Clone, Copy)]
pub struct KktLayout {
    pub n_dual: usize,
    pub k: usize,
    pub nw: usize,
}

impl KktLayout {
    pub fn theta(&self, i: usize) -> usize {
        self.n_dual + i
    }
    pub fn w(&self, j: usize) -> usize {
        self.n_dual + self.k + j
    }
    pub fn lambda(&self, i: usize) -> usize {
        self.n_dual + self.k + self.nw + i
    }
}

/// `max αᵀb − δᵀd + θᵀf` subject to the dual coupling rows,
/// `Aᵀα − Eᵀδ + Hᵀθ = 0`, `θ_i ≤ (1 − λ_i)M`, `Hw ≤ f` and
/// `f_i − H_i w ≤ λ_i M_i`. `M_i` is the largest slack facet `i` can have
/// over the initial box, capped at `M`.
pub fn build_kkt_mip(dmm: &DualizedMaxMin, big_m: f64) -> (MixedProgram, KktLayout) {
    let region = &dmm.region;
    let lay = KktLayout {
        n_dual: dmm.n_dual(),
        k: region.len(),
        nw: dmm.nw,
    };
    let n = lay.n_dual + 2 * lay.k + lay.nw;
    let mut lp = LinearProgram::new(Sense::Maximize, n);
    for i in 0..lay.n_dual {
        lp.objective[i] = dmm.constant[i];
        lp.set_bounds(i, dmm.lower[i], dmm.upper[i]);
    }
    for i in 0..lay.k {
        lp.objective[lay.theta(i)] = region.f[i];
        lp.set_bounds(lay.theta(i), 0.0, big_m);
        lp.set_bounds(lay.lambda(i), 0.0, 1.0);
    }
    for j in 0..lay.nw {
        lp.set_bounds(lay.w(j), region.box_lo[j], region.box_hi[j]);
    }
    for row in &dmm.coupling {
        lp.add_eq(row.clone(), 0.0);
    }
    for j in 0..lay.nw {
        let mut row: SparseRow = dmm.gradient[j].iter().map(|&(i, a)| (i, -a)).collect();
        for i in 0..lay.k {
            let hij = region.h[i][j];
            if hij != 0.0 {
                row.push((lay.theta(i), hij));
            }
        }
        lp.add_eq(row, 0.0);
    }
    for i in 0..lay.k {
        lp.add_le(vec![(lay.theta(i), 1.0), (lay.lambda(i), big_m)], big_m);
    }
    for i in 0..lay.k {
        let h = &region.h[i];
        let wrow: SparseRow = (0..lay.nw)
            .filter(|&j| h[j] != 0.0)
            .map(|j| (lay.w(j), h[j]))
            .collect();
        lp.add_le(wrow.clone(), region.f[i]);
        let box_min: f64 = (0..lay.nw)
            .map(|j| {
                h[j] * if h[j] > 0.0 {
                    region.box_lo[j]
                } else {
                    region.box_hi[j]
                }
            })
            .sum();
        let mi = (region.f[i] - box_min).clamp(0.0, big_m);
        let mut row: SparseRow = wrow.iter().map(|&(c, a)| (c, -a)).collect();
        row.push((lay.lambda(i), -mi));
        lp.add_le(row, -region.f[i]);
    }
    let binaries = (0..lay.k).map(|i| lay.lambda(i)).collect();
    (MixedProgram { lp, binaries }, lay)
}

/// Default big-M: ten times the largest data magnitude.
pub fn default_big_m(m: &CompactPsd, region: &Polytope) -> f64 {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (10.0 * inf(&region.f).max(inf(&m.b)).max(inf(&m.d))).max(10.0)
}

/// Exact oracle: globally maximizes the violation over `region`.
pub fn solve_maxmin_milp(
    m: &CompactPsd,
    region: &Polytope,
    cfg: &StudyConfig,
) -> Result<MaxMinSolution> {
    let weights = SlackWeights::from_prices(m, &cfg.weights);
    let dmm = dualize(m, &weights, region)?;
    let base_m = cfg.big_m.unwrap_or_else(|| default_big_m(m, region));
    let mut big_m = base_m;
    for attempt in 0..2 {
        let (mp, lay) = build_kkt_mip(&dmm, big_m);
        if let Ok(dir) = std::env::var("DRR_MPS_DIR") {
            let path = std::path::Path::new(&dir).join(format!("kkt_k{}_m{attempt}.mps", lay.k));
            std::fs::write(path, drr_lp::mps::to_free_mps(&mp.lp, "kkt", &mp.binaries))?;
        }
        let opts = MipOptions {
            gap_tol: cfg.gap_tol,
            node_limit: cfg.node_limit,
            ..MipOptions::default()
        };
        let sol = solve_mip_with(&mp, &opts)?;
        if sol.solution.status != LpStatus::Optimal {
            return Err(DrrError::SolverStatus(format!(
                "KKT program is {:?}",
                sol.solution.status
            )));
        }
        let x = &sol.solution.x;
        let y = &x[..lay.n_dual];
        let theta: Vec<f64> = (0..lay.k).map(|i| x[lay.theta(i)]).collect();
        let w: Vec<f64> = (0..lay.nw).map(|j| x[lay.w(j)]).collect();
        let theta_max = theta.iter().fold(0.0f64, |a, &t| a.max(t));
        if theta_max > 0.99 * big_m {
            if attempt == 0 {
                log::warn!("theta reached {theta_max:.3e} of M = {big_m:.3e}; retrying with 10M");
                big_m *= 10.0;
                continue;
            }
            return Err(DrrError::BigMTooSmall(big_m));
        }
        let g = dmm.gradient_at(y);
        let mut kkt = 0.0f64;
        for j in 0..lay.nw {
            let ht: f64 = (0..lay.k).map(|i| region.h[i][j] * theta[i]).sum();
            kkt = kkt.max((ht - g[j]).abs());
        }
        let comp = (0..lay.k)
            .map(|i| (theta[i] * (region.f[i] - dot(&region.h[i], &w))).abs())
            .fold(0.0f64, f64::max);
        let (alpha, delta) = dmm.split(y);
        return Ok(MaxMinSolution {
            f: sol.solution.objective,
            w_star: w,
            alpha,
            delta,
            theta,
            method: Method::Milp,
            scenario: None,
            diagnostics: Diagnostics {
                kkt_residual: kkt,
                complementarity_residual: comp,
                big_m,
                big_m_margin: 1.0 - theta_max / big_m,
                big_m_retried: attempt > 0,
                nodes: sol.nodes,
                ..Diagnostics::default()
            },
        });
    }
    Err(DrrError::BigMTooSmall(big_m))
}
