//! Consistency checks run by `drr validate`.

use drr_lp::{solve_lp, LpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::case::CaseData;
use crate::config::StudyConfig;
use crate::error::{DrrError, Result};
use crate::feasibility::{FeasibilityModel, SlackWeights};
use crate::maxmin::dualize;
use crate::model::{build_ptdf, CompactPsd, VarKind};
use crate::polytope::Polytope;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail,
    }
}

/// Bus injections (pu) implied by a dispatch `[p | l | v]` at `w`.
pub fn injections(case: &CaseData, m: &CompactPsd, w: &[f64], dispatch: &[f64]) -> Vec<f64> {
    let mut inj: Vec<f64> = case.buses.iter().map(|b| -b.load_mw / m.base_mva).collect();
    for (k, r) in case.renewables.iter().enumerate() {
        inj[r.bus] += w[k];
    }
    for (g, fg) in case.flexible.iter().enumerate() {
        inj[fg.bus] += dispatch[g];
    }
    inj
}

/// Largest gap between the angle-based flows of the dispatch at `w_bar`
/// and the flows the PTDF matrix gives for the same injections, per-unit.
pub fn ptdf_gap(case: &CaseData, m: &CompactPsd) -> Result<f64> {
    let weights = SlackWeights::limits_only(m, &Default::default());
    let res = FeasibilityModel::new(m, &weights)?.evaluate(&m.w_bar)?;
    let ptdf = build_ptdf(case)?;
    let lo = m.offset(VarKind::L) - m.nw;
    let flows = &res.dispatch[lo..lo + m.nl];
    let inj = injections(case, m, &m.w_bar, &res.dispatch);
    let pf = ptdf.flows(&inj);
    Ok(flows
        .iter()
        .zip(&pf)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Largest gap between the dual program's value and the feasibility model
/// at `n` random points of `w0`, per-unit.
pub fn duality_gap(
    m: &CompactPsd,
    w0: &Polytope,
    cfg: &StudyConfig,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let weights = SlackWeights::from_prices(m, &cfg.weights);
    let dmm = dualize(m, &weights, w0)?;
    let mut fm = FeasibilityModel::new(m, &weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gap = 0.0f64;
    for _ in 0..n {
        let w: Vec<f64> = (0..w0.dim)
            .map(|j| rng.gen_range(w0.box_lo[j]..=w0.box_hi[j]))
            .collect();
        let dual = solve_lp(&dmm.fixed_w_lp(&w))?;
        if dual.status != LpStatus::Optimal {
            return Err(DrrError::SolverStatus(format!(
                "dual program is {:?}",
                dual.status
            )));
        }
        let primal = fm.evaluate(&w)?;
        gap = gap.max((dual.objective - primal.objective).abs());
    }
    Ok(gap)
}

/// PTDF agreement, strong duality and feasibility of the forecast.
pub fn run_checks(
    case: &CaseData,
    m: &CompactPsd,
    w0: &Polytope,
    cfg: &StudyConfig,
) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let g = ptdf_gap(case, m)?;
    out.push(check(
        "ptdf agrees with angle flows",
        g <= 1e-8,
        format!("max gap {:.3e} MW", g * m.base_mva),
    ));
    let d = duality_gap(m, w0, cfg, 20, cfg.seed)?;
    out.push(check(
        "strong duality at 20 random points",
        d <= 1e-6,
        format!("max gap {d:.3e} pu"),
    ));
    let weights = SlackWeights::from_prices(m, &cfg.weights);
    let f = FeasibilityModel::new(m, &weights)?
        .evaluate(&m.w_bar)?
        .objective;
    out.push(check(
        "forecast is dispatchable",
        f <= cfg.eps_slack,
        format!("violation {:.3e} MW", f * m.base_mva),
    ));
    Ok(out)
}
