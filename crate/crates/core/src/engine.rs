//! Outer cutting-plane loop: start from the capacity box, ask an oracle for
//! the worst violation, cut it off, prune, repeat.

use std::time::Instant;

use serde::Serialize;

use crate::case::CaseData;
use crate::config::{Method, StudyConfig};
use crate::error::{DrrError, Result};
use crate::iblp::{gen_s1, gen_s2, run_iblp_in, IblpContext, ScenarioSet};
use crate::maxmin::{solve_maxmin_milp, MaxMinSolution};
use crate::model::{build_compact, initial_dispatch, CompactPsd, DispatchPoint};
use crate::polytope::{dot, norm, remove_redundant, Polytope, Provenance};

/// `normal·w ≤ offset` with unit-norm `normal`, cutting off `w_star`.
#[derive(Debug, Clone, Serialize)]
pub struct Cut {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub f: f64,
    pub w_star: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub scenario: Option<usize>,
}

impl Cut {
    pub fn same_as(&self, other: &Cut, tol: f64) -> bool {
        (self.offset - other.offset).abs() < tol
            && self
                .normal
                .iter()
                .zip(&other.normal)
                .all(|(a, b)| (a - b).abs() < tol)
    }
}

/// Turns the dual pair of an oracle solution into the cut
/// `(−Aᵀα + Eᵀδ)ᵀw ≤ −(αᵀb − δᵀd)`, scaled to a unit normal.
pub fn make_cut(sol: &MaxMinSolution, m: &CompactPsd, eps_dual: f64) -> Result<Cut> {
    let g = m.w_gradient(&sol.alpha, &sol.delta);
    let c0 = m.dual_constant(&sol.alpha, &sol.delta);
    let n = norm(&g);
    if !(n >= eps_dual) {
        return Err(DrrError::DegenerateCut(n));
    }
    let normal: Vec<f64> = g.iter().map(|v| v / n).collect();
    let offset = -c0 / n;
    let sep = dot(&normal, &sol.w_star) - offset;
    if !(sep > 0.0) {
        return Err(DrrError::SolverStatus(format!(
            "cut does not separate w* (margin {sep:e}, F = {:e})",
            sol.f
        )));
    }
    Ok(Cut {
        normal,
        offset,
        f: sol.f,
        w_star: sol.w_star.clone(),
        alpha: sol.alpha.clone(),
        delta: sol.delta.clone(),
        scenario: sol.scenario,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    EmptyRegion,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Largest violation found, per-unit.
    pub f: f64,
    pub cuts_added: usize,
    pub oracle_ms: f64,
    pub facets: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub method: Method,
    pub seed: u64,
    pub config: serde_json::Value,
    pub base_mva: f64,
    pub renewables: Vec<String>,
    pub w_bar_mw: Vec<f64>,
    pub p_star_mw: Vec<f64>,
    pub angle_limits_included: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DrrResult {
    /// Final region, per-unit.
    pub polytope: Polytope,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    pub metadata: RunMetadata,
    /// Every cut added, in order.
    pub cuts: Vec<(usize, Cut)>,
    /// The region handed to the oracle at each iteration.
    pub snapshots: Vec<Polytope>,
}

impl DrrResult {
    pub fn region_mw(&self) -> Polytope {
        self.polytope.scaled(self.metadata.base_mva)
    }
}

/// Capacity box `0 ≤ w_i ≤ p_max_i`, per-unit.
pub fn init_w0(case: &CaseData) -> Result<Polytope> {
    if case.renewables.is_empty() {
        return Err(DrrError::NoRenewables);
    }
    let hi: Vec<f64> = case
        .renewables
        .iter()
        .map(|r| r.capacity_mw / case.base_mva)
        .collect();
    Ok(Polytope::from_box(&vec![0.0; hi.len()], &hi))
}

/// Dispatches the case, builds the model and runs the loop.
pub fn run(case: &CaseData, cfg: &StudyConfig, method: Method) -> Result<DrrResult> {
    cfg.validate()?;
    let w0 = init_w0(case)?;
    let dp = initial_dispatch(case, cfg)?;
    let m = build_compact(case, &dp)?;
    let names = case.renewables.iter().map(|r| r.name.clone()).collect();
    let angle = case
        .lines
        .iter()
        .any(|l| l.angle_min_rad.is_some() || l.angle_max_rad.is_some());
    run_model(&m, &dp, w0, cfg, method, names, angle)
}

pub fn run_model(
    m: &CompactPsd,
    dp: &DispatchPoint,
    w0: Polytope,
    cfg: &StudyConfig,
    method: Method,
    renewables: Vec<String>,
    angle_limits_included: bool,
) -> Result<DrrResult> {
    cfg.validate()?;
    if m.nw == 0 {
        return Err(DrrError::NoRenewables);
    }
    let metadata = RunMetadata {
        method,
        seed: cfg.seed,
        config: cfg.echo(),
        base_mva: m.base_mva,
        renewables,
        w_bar_mw: m.to_mw(&m.w_bar),
        p_star_mw: dp.p_star.clone(),
        angle_limits_included,
    };
    let pool = match method {
        Method::Iblp => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads())
                .build()
                .map_err(|e| DrrError::InvalidConfig(e.to_string()))?,
        ),
        Method::Milp => None,
    };
    let s1 = gen_s1(&w0, cfg.s1_count, cfg.seed);

    let mut region = remove_redundant(&w0)?;
    let mut result = DrrResult {
        polytope: region.clone(),
        trace: Vec::new(),
        termination: Termination::MaxIterations,
        metadata,
        cuts: Vec::new(),
        snapshots: Vec::new(),
    };
    for k in 1..=cfg.max_outer_iters {
        result.snapshots.push(region.clone());
        let started = Instant::now();
        let (f, mut cuts, empty) = match method {
            Method::Milp => {
                let sol = solve_maxmin_milp(m, &region, cfg)?;
                let f = sol.f;
                if f <= cfg.eps_term {
                    (f, Vec::new(), false)
                } else {
                    match make_cut(&sol, m, cfg.eps_dual) {
                        Ok(c) => (f, vec![c], false),
                        Err(DrrError::DegenerateCut(_)) => (f, Vec::new(), true),
                        Err(e) => return Err(e),
                    }
                }
            }
            Method::Iblp => {
                let scen = ScenarioSet {
                    s1: s1.clone(),
                    s2: gen_s2(&region, &m.w_bar)?,
                };
                let ctx = IblpContext::new(m, &region, cfg)?;
                let pool = pool.as_ref().expect("pool exists for iblp");
                let out = run_iblp_in(pool, m, &ctx, &scen, cfg)?;
                let cuts: Vec<Cut> = out.solutions.into_iter().map(|(_, c)| c).collect();
                let empty = cuts.is_empty() && out.empty_certificate;
                (out.best_f, cuts, empty)
            }
        };
        let oracle_ms = started.elapsed().as_secs_f64() * 1e3;
        // largest violations first; the sort is stable so ties keep scenario order
        cuts.sort_by(|a, b| b.f.total_cmp(&a.f));
        cuts.truncate(cfg.cut_batch_cap);
        log::info!(
            "iteration {k}: F = {:.6e} pu, {} cut(s), {oracle_ms:.1} ms",
            f,
            cuts.len()
        );
        result.trace.push(IterationRecord {
            k,
            f,
            cuts_added: cuts.len(),
            oracle_ms,
            facets: region.len(),
        });
        if empty {
            result.termination = Termination::EmptyRegion;
            return Ok(result);
        }
        if f <= cfg.eps_term || cuts.is_empty() {
            result.termination = Termination::Converged;
            result.polytope = region;
            return Ok(result);
        }
        for c in cuts {
            region.push(
                &c.normal,
                c.offset,
                Provenance::Cut {
                    iteration: k,
                    scenario: c.scenario,
                },
            )?;
            result.cuts.push((k, c));
        }
        match remove_redundant(&region) {
            Ok(r) => region = r,
            Err(DrrError::EmptyRegion) => {
                result.termination = Termination::EmptyRegion;
                return Ok(result);
            }
            Err(e) => return Err(e),
        }
        result.polytope = region.clone();
    }
    Ok(result)
}
