//! Alternating heuristic for the max-min problem, run from many starting
//! points in parallel.
//!
//! From a start `w`, solve the dual program at fixed `w`, then maximize the
//! resulting linear function of `w` over the region, and repeat until the
//! gain drops below `eps_alt`. Each half-step maximizes over one block with
//! the other fixed, so the objective never decreases.

use drr_lp::{solve_lp, LinearProgram, LpStatus, Sense, SimplexSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Method, StudyConfig};
use crate::engine::{make_cut, Cut};
use crate::error::{DrrError, Result};
use crate::feasibility::SlackWeights;
use crate::maxmin::{dualize, Diagnostics, DualizedMaxMin, MaxMinSolution};
use crate::model::CompactPsd;
use crate::polytope::{dot, sparse, Polytope};

/// Starting points: `s1` drawn once per run, `s2` rebuilt per iteration.
#[derive(Debug, Clone, Default)]
pub struct ScenarioSet {
    pub s1: Vec<Vec<f64>>,
    pub s2: Vec<Vec<f64>>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.s1.len() + self.s2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `s1` by index, then `s2` by facet index.
    pub fn combined(&self) -> Vec<&[f64]> {
        self.s1
            .iter()
            .chain(&self.s2)
            .map(|v| v.as_slice())
            .collect()
    }
}

/// `n` points uniform in the box of `w0`, determined by `seed` alone.
pub fn gen_s1(w0: &Polytope, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..w0.dim)
                .map(|j| {
                    let (lo, hi) = (w0.box_lo[j], w0.box_hi[j]);
                    if hi > lo {
                        rng.gen_range(lo..=hi)
                    } else {
                        lo
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthogonal projection of `w_bar` onto every facet hyperplane.
pub fn gen_s2(w: &Polytope, w_bar: &[f64]) -> Result<Vec<Vec<f64>>> {
    w.h.iter()
        .zip(&w.f)
        .enumerate()
        .map(|(i, (h, &f))| {
            let hh = dot(h, h);
            if !(hh > 0.0) {
                return Err(DrrError::ZeroNormal(i));
            }
            let step = (dot(h, w_bar) - f) / hh;
            Ok(w_bar.iter().zip(h).map(|(x, a)| x - step * a).collect())
        })
        .collect()
}

/// Nearest point of `region` to `w0` in the 1-norm; `w0` itself if inside.
pub fn project_into(region: &Polytope, w0: &[f64]) -> Result<Vec<f64>> {
    if region.contains(w0, 1e-9)
        && (0..region.dim).all(|j| w0[j] >= region.box_lo[j] && w0[j] <= region.box_hi[j])
    {
        return Ok(w0.to_vec());
    }
    let n = region.dim;
    let mut lp = LinearProgram::new(Sense::Minimize, 2 * n);
    for j in 0..n {
        lp.set_bounds(j, region.box_lo[j], region.box_hi[j]);
        lp.set_bounds(n + j, 0.0, f64::INFINITY);
        lp.objective[n + j] = 1.0;
        lp.add_le(vec![(j, 1.0), (n + j, -1.0)], w0[j]);
        lp.add_le(vec![(j, -1.0), (n + j, -1.0)], -w0[j]);
    }
    for (h, &f) in region.h.iter().zip(&region.f) {
        lp.add_le(sparse(h), f);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(DrrError::EmptyRegion);
    }
    Ok(sol.x[..n].to_vec())
}

/// Shared read-only state for one outer iteration: the dual program and
/// two pre-solved simplex instances that every scenario clones, so each
/// scenario starts from the same basis whatever thread runs it.
#[derive(Debug, Clone)]
pub struct IblpContext {
    pub dmm: DualizedMaxMin,
    dual_template: SimplexSolver,
    w_template: SimplexSolver,
}

impl IblpContext {
    pub fn new(m: &CompactPsd, region: &Polytope, cfg: &StudyConfig) -> Result<Self> {
        let weights = SlackWeights::from_prices(m, &cfg.weights);
        let dmm = dualize(m, &weights, region)?;
        let mut dual_template = SimplexSolver::new(&dmm.fixed_w_lp(&m.w_bar))?;
        dual_template.solve()?;
        let all: Vec<usize> = (0..region.len()).collect();
        let mut w_template =
            SimplexSolver::new(&region.lp(&vec![0.0; region.dim], Sense::Maximize, &all, true))?;
        w_template.solve()?;
        Ok(Self {
            dmm,
            dual_template,
            w_template,
        })
    }
}

pub fn alternate_solve(
    m: &CompactPsd,
    region: &Polytope,
    w0: &[f64],
    cfg: &StudyConfig,
) -> Result<MaxMinSolution> {
    let ctx = IblpContext::new(m, region, cfg)?;
    alternate_from(&ctx, w0, cfg)
}

/// Runs the alternation from `w0` (projected into the region first). The
/// returned `w_star` is the point at which the dual step last ran, so `f`
/// is the exact violation there.
pub fn alternate_from(ctx: &IblpContext, w0: &[f64], cfg: &StudyConfig) -> Result<MaxMinSolution> {
    let dmm = &ctx.dmm;
    let mut w = project_into(&dmm.region, w0)?;
    let mut dual = ctx.dual_template.clone();
    let mut wlp = ctx.w_template.clone();

    let solve_dual = |dual: &mut SimplexSolver, w: &[f64]| -> Result<(f64, Vec<f64>)> {
        dual.set_objective(&dmm.objective_at(w));
        let s = dual.solve()?;
        if s.status != LpStatus::Optimal {
            return Err(DrrError::SolverStatus(format!(
                "dual step is {:?}",
                s.status
            )));
        }
        Ok((s.objective, s.x))
    };

    let (mut v, mut y) = solve_dual(&mut dual, &w)?;
    let mut values = vec![v];
    let mut theta = vec![0.0; dmm.region.len()];
    let mut rounds = 0;
    while rounds < cfg.alternation_cap {
        rounds += 1;
        let g = dmm.gradient_at(&y);
        wlp.set_objective(&g);
        let ws = wlp.solve()?;
        if ws.status != LpStatus::Optimal {
            return Err(DrrError::SolverStatus(format!("w step is {:?}", ws.status)));
        }
        let u = dmm.constant_at(&y) + dot(&g, &ws.x);
        values.push(u);
        theta = ws.mu_in.clone();
        if u - v <= cfg.eps_alt {
            break;
        }
        w = ws.x;
        (v, y) = solve_dual(&mut dual, &w)?;
        values.push(v);
    }
    let (alpha, delta) = dmm.split(&y);
    Ok(MaxMinSolution {
        f: v,
        w_star: w,
        alpha,
        delta,
        theta,
        method: Method::Iblp,
        scenario: None,
        diagnostics: Diagnostics {
            alternations: rounds,
            alternation_values: values,
            ..Diagnostics::default()
        },
    })
}

#[derive(Debug, Clone)]
pub struct IblpOutcome {
    /// Positive-violation results in scenario order, one per distinct cut.
    pub solutions: Vec<(MaxMinSolution, Cut)>,
    /// Largest violation over all successful scenarios.
    pub best_f: f64,
    pub failures: Vec<(usize, String)>,
    pub evaluated: usize,
    /// Some scenario found a positive violation with a vanishing cut
    /// normal, i.e. no `w` at all is dispatchable.
    pub empty_certificate: bool,
}

pub fn run_iblp(
    m: &CompactPsd,
    region: &Polytope,
    scenarios: &ScenarioSet,
    cfg: &StudyConfig,
) -> Result<IblpOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads())
        .build()
        .map_err(|e| DrrError::InvalidConfig(e.to_string()))?;
    let ctx = IblpContext::new(m, region, cfg)?;
    run_iblp_in(&pool, m, &ctx, scenarios, cfg)
}

/// Evaluates every scenario on `pool`; results are merged in scenario
/// order, so the outcome does not depend on the thread count.
pub fn run_iblp_in(
    pool: &rayon::ThreadPool,
    m: &CompactPsd,
    ctx: &IblpContext,
    scenarios: &ScenarioSet,
    cfg: &StudyConfig,
) -> Result<IblpOutcome> {
    if scenarios.is_empty() {
        return Err(DrrError::InvalidConfig("empty scenario set".into()));
    }
    let starts = scenarios.combined();
    let results: Vec<Result<MaxMinSolution>> = pool.install(|| {
        starts
            .par_iter()
            .map(|w0| alternate_from(ctx, w0, cfg))
            .collect()
    });

    let mut out = IblpOutcome {
        solutions: Vec::new(),
        best_f: f64::NEG_INFINITY,
        failures: Vec::new(),
        evaluated: starts.len(),
        empty_certificate: false,
    };
    for (j, r) in results.into_iter().enumerate() {
        let mut sol = match r {
            Ok(s) => s,
            Err(e) => {
                log::warn!("scenario {j} failed: {e}");
                out.failures.push((j, e.to_string()));
                continue;
            }
        };
        sol.scenario = Some(j);
        out.best_f = out.best_f.max(sol.f);
        if sol.f <= cfg.eps_term {
            continue;
        }
        let cut = match make_cut(&sol, m, cfg.eps_dual) {
            Ok(c) => c,
            Err(DrrError::DegenerateCut(_)) => {
                out.empty_certificate = true;
                continue;
            }
            Err(e) => {
                log::warn!("scenario {j}: {e}");
                out.failures.push((j, e.to_string()));
                continue;
            }
        };
        if out.solutions.iter().any(|(_, c)| c.same_as(&cut, 1e-6)) {
            continue;
        }
        out.solutions.push((sol, cut));
    }
    if out.failures.len() == starts.len() {
        return Err(DrrError::AllScenariosFailed(
            starts.len(),
            out.failures[0].1.clone(),
        ));
    }
    Ok(out)
}
