//! Halfspace polytopes `{w | Hw ≤ f}` with per-facet provenance.

use drr_lp::{solve_lp, LinearProgram, LpStatus, Sense};
use serde::{Deserialize, Serialize};

use crate::error::{DrrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    InitialBox {
        bound: BoundKind,
        farm: usize,
    },
    Cut {
        iteration: usize,
        scenario: Option<usize>,
    },
}

/// Rows are kept at unit Euclidean norm. The initial box is remembered
/// separately so that LPs over the region stay bounded after its facets
/// are pruned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub dim: usize,
    pub h: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub provenance: Vec<Provenance>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

/// Facets that are weakly implied by the others within this margin are
/// dropped as well as strictly redundant ones.
const REDUNDANCY_TOL: f64 = 1e-9;

impl Polytope {
    /// Axis-aligned box, facets ordered lower then upper per coordinate.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        let mut p = Polytope {
            dim,
            h: Vec::new(),
            f: Vec::new(),
            provenance: Vec::new(),
            box_lo: lo.to_vec(),
            box_hi: hi.to_vec(),
        };
        for j in 0..dim {
            let mut e = vec![0.0; dim];
            e[j] = -1.0;
            p.h.push(e.clone());
            p.f.push(-lo[j]);
            p.provenance.push(Provenance::InitialBox {
                bound: BoundKind::Lower,
                farm: j,
            });
            e[j] = 1.0;
            p.h.push(e);
            p.f.push(hi[j]);
            p.provenance.push(Provenance::InitialBox {
                bound: BoundKind::Upper,
                farm: j,
            });
        }
        p
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Appends `normal·w ≤ offset` after scaling to unit norm.
    pub fn push(&mut self, normal: &[f64], offset: f64, provenance: Provenance) -> Result<()> {
        let n = norm(normal);
        if !(n > 0.0 && n.is_finite()) {
            return Err(DrrError::ZeroNormal(self.len()));
        }
        // round-off left in a cut normal would otherwise couple farms that
        // the cut does not involve
        self.h.push(
            normal
                .iter()
                .map(|v| v / n)
                .map(|v| if v.abs() < 1e-12 { 0.0 } else { v })
                .collect(),
        );
        self.f.push(offset / n);
        self.provenance.push(provenance);
        Ok(())
    }

    /// Largest violation `max_i (H_i w − f_i)`; nonpositive inside.
    pub fn violation(&self, w: &[f64]) -> f64 {
        self.h
            .iter()
            .zip(&self.f)
            .map(|(h, f)| dot(h, w) - f)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        self.violation(w) <= tol
    }

    pub fn scaled(&self, factor: f64) -> Polytope {
        Polytope {
            dim: self.dim,
            h: self.h.clone(),
            f: self.f.iter().map(|v| v * factor).collect(),
            provenance: self.provenance.clone(),
            box_lo: self.box_lo.iter().map(|v| v * factor).collect(),
            box_hi: self.box_hi.iter().map(|v| v * factor).collect(),
        }
    }

    /// LP over `w` with the given facets (box bounds as variable bounds
    /// when `use_box`).
    pub(crate) fn lp(
        &self,
        objective: &[f64],
        sense: Sense,
        facets: &[usize],
        use_box: bool,
    ) -> LinearProgram {
        let mut lp = LinearProgram::new(sense, self.dim);
        lp.objective = objective.to_vec();
        if use_box {
            for j in 0..self.dim {
                lp.set_bounds(j, self.box_lo[j], self.box_hi[j]);
            }
        }
        for &i in facets {
            lp.add_le(sparse(&self.h[i]), self.f[i]);
        }
        lp
    }

    pub fn is_feasible(&self) -> Result<bool> {
        let all: Vec<usize> = (0..self.len()).collect();
        let lp = self.lp(&vec![0.0; self.dim], Sense::Minimize, &all, false);
        Ok(solve_lp(&lp)?.status == LpStatus::Optimal)
    }

    /// `max / min βᵀw` over the region restricted to facet `i`.
    pub fn facet_extremes(&self, i: usize, beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let all: Vec<usize> = (0..self.len()).collect();
        let mut out = Vec::with_capacity(2);
        for sense in [Sense::Maximize, Sense::Minimize] {
            let mut lp = self.lp(beta, sense, &all, true);
            lp.add_eq(sparse(&self.h[i]), self.f[i]);
            let sol = solve_lp(&lp)?;
            if sol.status != LpStatus::Optimal {
                return Err(DrrError::FacetInfeasible(i));
            }
            out.push(sol.x);
        }
        let lo = out.pop().unwrap_or_default();
        let hi = out.pop().unwrap_or_default();
        Ok((hi, lo))
    }
}

/// Drops facets implied by the remaining ones, newest first so that a cut
/// duplicating an initial-box facet is the copy that goes. A
/// facet goes when `max H_i w` over the others stays within
/// `f_i + 1e-9`; a relaxed copy `H_i w ≤ f_i + 1` keeps that LP bounded.
pub fn remove_redundant(w: &Polytope) -> Result<Polytope> {
    if !w.is_feasible()? {
        return Err(DrrError::EmptyRegion);
    }
    let mut keep: Vec<bool> = vec![true; w.len()];
    for i in (0..w.len()).rev() {
        let others: Vec<usize> = (0..w.len()).filter(|&k| k != i && keep[k]).collect();
        let mut lp = w.lp(&w.h[i], Sense::Maximize, &others, false);
        lp.add_le(sparse(&w.h[i]), w.f[i] + 1.0);
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal if sol.objective <= w.f[i] + REDUNDANCY_TOL => keep[i] = false,
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(DrrError::EmptyRegion),
            LpStatus::Unbounded => {}
        }
    }
    let mut out = Polytope {
        h: Vec::new(),
        f: Vec::new(),
        provenance: Vec::new(),
        ..w.clone()
    };
    for i in (0..w.len()).filter(|&i| keep[i]) {
        out.h.push(w.h[i].clone());
        out.f.push(w.f[i]);
        out.provenance.push(w.provenance[i]);
    }
    Ok(out)
}

pub(crate) fn sparse(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(j, a)| (j, *a))
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
