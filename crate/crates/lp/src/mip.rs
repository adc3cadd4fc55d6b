//! Branch-and-bound over binary variables.
//!
//! Node LPs are warm-started: a plunge continues from the parent's tableau
//! through the dual simplex; a jump to a queued node restores that node's
//! parent basis first. Node selection is best-bound with depth-first
//! plunging, branching on the lowest-index fractional binary.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::problem::{LinearProgram, LpSolution, LpStatus, Sense};
use crate::simplex::{solve_lp, Basis, SimplexSolver};
use crate::LpError;

#[derive(Debug, Clone)]
pub struct MixedProgram {
    pub lp: LinearProgram,
    /// Indices of variables restricted to {0, 1}.
    pub binaries: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct MipOptions {
    /// Absolute optimality gap in objective units.
    pub gap_tol: f64,
    pub node_limit: usize,
    pub int_tol: f64,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            node_limit: 200_000,
            int_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    /// LP solution with every binary fixed at its incumbent value.
    pub solution: LpSolution,
    pub binary_values: Vec<bool>,
    pub nodes: usize,
    /// Best bound still open when the search stopped (original sense).
    pub bound: f64,
}

struct Node {
    /// minimization-frame bound inherited from the parent
    bound: f64,
    seq: usize,
    fix: Vec<(f64, f64)>,
    basis: Basis,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub fn solve_mip(mp: &MixedProgram, gap_tol: f64) -> Result<MipSolution, LpError> {
    solve_mip_with(
        mp,
        &MipOptions {
            gap_tol,
            ..MipOptions::default()
        },
    )
}

pub fn solve_mip_with(mp: &MixedProgram, opts: &MipOptions) -> Result<MipSolution, LpError> {
    let lp = &mp.lp;
    lp.validate()?;
    for &b in &mp.binaries {
        if b >= lp.num_vars() || lp.lower[b] < 0.0 || lp.upper[b] > 1.0 {
            return Err(LpError::InvalidInput(format!(
                "binary {b} must have bounds within [0, 1]"
            )));
        }
    }
    if mp.binaries.is_empty() {
        let solution = solve_lp(lp)?;
        let bound = solution.objective;
        return Ok(MipSolution {
            solution,
            binary_values: Vec::new(),
            nodes: 1,
            bound,
        });
    }
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let root_fix: Vec<(f64, f64)> = mp
        .binaries
        .iter()
        .map(|&b| (lp.lower[b].ceil(), lp.upper[b].floor()))
        .collect();
    if root_fix.iter().any(|(lo, hi)| lo > hi) {
        return Ok(infeasible(lp, 1));
    }

    let mut solver = SimplexSolver::new(lp)?;
    let mut applied: Vec<(f64, f64)> = mp
        .binaries
        .iter()
        .map(|&b| (lp.lower[b], lp.upper[b]))
        .collect();
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut incumbent: Option<(f64, Vec<bool>)> = None;
    let mut current: Option<Vec<(f64, f64)>> = Some(root_fix);

    loop {
        let fix = match current.take() {
            Some(f) => f,
            None => {
                let Some(node) = heap.pop() else { break };
                if let Some((inc, _)) = &incumbent {
                    if node.bound >= inc - opts.gap_tol {
                        heap.clear();
                        break;
                    }
                }
                solver.restore_basis(&node.basis);
                node.fix
            }
        };
        nodes += 1;
        if nodes > opts.node_limit {
            return Err(LpError::NodeLimitExceeded {
                nodes: opts.node_limit,
                incumbent: incumbent.map(|(v, _)| sign * v),
            });
        }
        for (k, &b) in mp.binaries.iter().enumerate() {
            if applied[k] != fix[k] {
                solver.set_bounds(b, fix[k].0, fix[k].1);
                applied[k] = fix[k];
            }
        }
        let sol = solver.solve()?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(LpError::InvalidInput("MIP relaxation is unbounded".into()));
            }
            LpStatus::Optimal => {}
        }
        let value = sign * sol.objective;
        if let Some((inc, _)) = &incumbent {
            if value >= inc - opts.gap_tol {
                continue;
            }
        }
        let frac = mp.binaries.iter().enumerate().find(|(_, &b)| {
            let v = sol.x[b];
            (v - v.round()).abs() > opts.int_tol
        });
        match frac {
            None => {
                let vals = mp.binaries.iter().map(|&b| sol.x[b] > 0.5).collect();
                log::trace!("b&b: incumbent {} at node {}", sign * value, nodes);
                incumbent = Some((value, vals));
            }
            Some((k, &b)) => {
                let v = sol.x[b];
                let mut down = fix.clone();
                down[k] = (0.0, 0.0);
                let mut up = fix;
                up[k] = (1.0, 1.0);
                let (first, second) = if v >= 0.5 { (up, down) } else { (down, up) };
                seq += 1;
                heap.push(Node {
                    bound: value,
                    seq,
                    fix: second,
                    basis: solver.basis(),
                });
                current = Some(first);
            }
        }
    }

    let Some((_, vals)) = incumbent else {
        return Ok(infeasible(lp, nodes));
    };
    // polish: re-solve with all binaries fixed so complementarity holds exactly
    let mut fixed = lp.clone();
    for (&b, &on) in mp.binaries.iter().zip(&vals) {
        let v = if on { 1.0 } else { 0.0 };
        fixed.set_bounds(b, v, v);
    }
    let solution = solve_lp(&fixed)?;
    Ok(MipSolution {
        bound: solution.objective,
        solution,
        binary_values: vals,
        nodes,
    })
}

fn infeasible(lp: &LinearProgram, nodes: usize) -> MipSolution {
    let n = lp.num_vars();
    MipSolution {
        solution: LpSolution {
            status: LpStatus::Infeasible,
            x: vec![f64::NAN; n],
            mu_eq: vec![0.0; lp.eq_rows.len()],
            mu_in: vec![0.0; lp.in_rows.len()],
            reduced_costs: vec![0.0; n],
            objective: f64::NAN,
            farkas: None,
            iterations: 0,
        },
        binary_values: Vec::new(),
        nodes,
        bound: f64::NAN,
    }
}
