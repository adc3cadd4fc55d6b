//! Labels each facet of a region with the operating limits that become
//! active just outside it.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::StudyConfig;
use crate::error::{DrrError, Result};
use crate::feasibility::{FeasibilityModel, SlackWeights};
use crate::model::{CompactPsd, ConstraintDescriptor};
use crate::polytope::{BoundKind, Polytope, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetOrigin {
    PhysicalConstraint,
    InitialBoxFacet,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Necessity {
    /// Pinning this row's slack to zero raises the total violation.
    Necessary,
    /// Another row can absorb the violation instead.
    Alternate,
}

#[derive(Debug, Clone, Serialize)]
pub struct BindingEntry {
    /// Index into the inequality rows of the model.
    pub row: usize,
    pub constraint: ConstraintDescriptor,
    pub slack_mw: f64,
    pub necessity: Necessity,
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetReport {
    pub facet: usize,
    pub provenance: Provenance,
    pub normal: Vec<f64>,
    pub offset_mw: f64,
    pub terminal_upper_mw: Vec<f64>,
    pub terminal_lower_mw: Vec<f64>,
    pub probe_mw: Vec<f64>,
    /// Total weighted slack at the probe, MW.
    pub violation_mw: f64,
    pub origin: FacetOrigin,
    /// Set for box facets: "initial lower bound of R2" and the like.
    pub box_label: Option<String>,
    pub binding: Vec<BindingEntry>,
    /// The midpoint coincides with the forecast so the probe is not
    /// pushed outward.
    pub degenerate_probe: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BindingReport {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub renewables: Vec<String>,
    pub facets: Vec<FacetReport>,
}

/// Extremes of `βᵀw` on facet `i`: `(w_u, w_l)`.
pub fn terminal_points(w: &Polytope, i: usize, beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if beta.len() != w.dim {
        return Err(DrrError::DimensionMismatch(format!(
            "beta has {} entries, region {}",
            beta.len(),
            w.dim
        )));
    }
    w.facet_extremes(i, beta)
}

/// `mid + λ(mid − w̄)` with `mid` the midpoint of the terminal points.
pub fn probe_point(w_u: &[f64], w_l: &[f64], w_bar: &[f64], lambda: f64) -> Vec<f64> {
    w_u.iter()
        .zip(w_l)
        .zip(w_bar)
        .map(|((u, l), b)| {
            let mid = 0.5 * (u + l);
            mid + lambda * (mid - b)
        })
        .collect()
}

fn box_facet(w: &Polytope, i: usize, mid: &[f64], tol: f64) -> Option<(BoundKind, usize)> {
    if let Provenance::InitialBox { bound, farm } = w.provenance[i] {
        return Some((bound, farm));
    }
    // a cut may coincide with a box face; recognise it by its normal and
    // by the midpoint sitting on the box
    let h = &w.h[i];
    let axis = (0..w.dim).find(|&j| (h[j].abs() - 1.0).abs() < 1e-9)?;
    if h.iter()
        .enumerate()
        .any(|(j, v)| j != axis && v.abs() > 1e-9)
    {
        return None;
    }
    if h[axis] > 0.0 && (mid[axis] - w.box_hi[axis]).abs() <= tol {
        Some((BoundKind::Upper, axis))
    } else if h[axis] < 0.0 && (mid[axis] - w.box_lo[axis]).abs() <= tol {
        Some((BoundKind::Lower, axis))
    } else {
        None
    }
}

/// Builds the report for every facet of `w`, in facet order. Zero
/// violation on a facet that is not part of the initial box is an error
/// unless `allow_ambiguous`.
pub fn identify(
    m: &CompactPsd,
    w: &Polytope,
    renewables: &[String],
    cfg: &StudyConfig,
    allow_ambiguous: bool,
) -> Result<BindingReport> {
    identify_with(
        m,
        w,
        renewables,
        cfg,
        cfg.perturb_lambda,
        &vec![1.0; w.dim],
        allow_ambiguous,
    )
}

pub fn identify_with(
    m: &CompactPsd,
    w: &Polytope,
    renewables: &[String],
    cfg: &StudyConfig,
    lambda: f64,
    beta: &[f64],
    allow_ambiguous: bool,
) -> Result<BindingReport> {
    if w.dim != m.nw {
        return Err(DrrError::DimensionMismatch(format!(
            "region has dimension {}, model {}",
            w.dim, m.nw
        )));
    }
    if !(lambda > 0.0) {
        return Err(DrrError::InvalidConfig(
            "perturbation lambda must be positive".into(),
        ));
    }
    let weights = SlackWeights::limits_only(m, &cfg.weights);
    let mut model = FeasibilityModel::new(m, &weights)?;
    let base = m.base_mva;
    let mw = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * base).collect() };

    let mut facets = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let (wu, wl) = terminal_points(w, i, beta)?;
        let mid: Vec<f64> = wu.iter().zip(&wl).map(|(a, b)| 0.5 * (a + b)).collect();
        let probe = probe_point(&wu, &wl, &m.w_bar, lambda);
        let degenerate_probe = mid.iter().zip(&m.w_bar).all(|(a, b)| (a - b).abs() < 1e-12);
        let res = model.evaluate(&probe)?;
        let mut report = FacetReport {
            facet: i,
            provenance: w.provenance[i],
            normal: w.h[i].clone(),
            offset_mw: w.f[i] * base,
            terminal_upper_mw: mw(&wu),
            terminal_lower_mw: mw(&wl),
            probe_mw: mw(&probe),
            violation_mw: res.objective * base,
            origin: FacetOrigin::PhysicalConstraint,
            box_label: None,
            binding: Vec::new(),
            degenerate_probe,
        };
        if res.objective > cfg.eps_slack {
            report.binding = refine(
                &mut model,
                m,
                &probe,
                &res.slack_in,
                res.objective,
                cfg.eps_slack,
            )?;
        } else if let Some((bound, farm)) = box_facet(w, i, &mid, 1e-7) {
            report.origin = FacetOrigin::InitialBoxFacet;
            let name = renewables
                .get(farm)
                .cloned()
                .unwrap_or_else(|| format!("R{}", farm + 1));
            let side = match bound {
                BoundKind::Lower => "lower",
                BoundKind::Upper => "upper",
            };
            report.box_label = Some(format!("initial {side} bound of {name}"));
        } else if allow_ambiguous {
            report.origin = FacetOrigin::Ambiguous;
        } else {
            return Err(DrrError::AmbiguousFacet(i));
        }
        facets.push(report);
    }
    Ok(BindingReport {
        lambda,
        beta: beta.to_vec(),
        renewables: renewables.to_vec(),
        facets,
    })
}

/// Objective with the slacks of `rows` pinned to zero; `None` when that
/// leaves no feasible dispatch.
fn forced_objective(
    model: &mut FeasibilityModel,
    probe: &[f64],
    rows: &[usize],
) -> Result<Option<(f64, Vec<f64>)>> {
    for &r in rows {
        model.force_zero(r, true);
    }
    let res = model.evaluate(probe);
    for &r in rows {
        model.force_zero(r, false);
    }
    match res {
        Ok(r) => Ok(Some((r.objective, r.slack_in))),
        Err(DrrError::SolverStatus(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Pins each slacked row to zero in turn: if the optimum rises (or no
/// dispatch remains) the row is necessary. Then pins the whole set found so
/// far and collects the rows that take over, until the optimum rises.
fn refine(
    model: &mut FeasibilityModel,
    m: &CompactPsd,
    probe: &[f64],
    slack_in: &[f64],
    objective: f64,
    eps: f64,
) -> Result<Vec<BindingEntry>> {
    let tol = eps.max(1e-9 * objective.abs());
    let active: Vec<usize> = (0..slack_in.len()).filter(|&r| slack_in[r] > eps).collect();
    let mut out: Vec<BindingEntry> = Vec::new();
    let entry = |r: usize, s: f64, necessity| BindingEntry {
        row: r,
        constraint: m.in_desc[r].clone(),
        slack_mw: s * m.base_mva,
        necessity,
    };
    for &r in &active {
        let necessity = match forced_objective(model, probe, &[r])? {
            Some((obj, _)) if obj <= objective + tol => Necessity::Alternate,
            _ => Necessity::Necessary,
        };
        out.push(entry(r, slack_in[r], necessity));
    }
    let mut pinned = active;
    while let Some((obj, slack)) = forced_objective(model, probe, &pinned)? {
        if obj > objective + tol {
            break;
        }
        let fresh: Vec<usize> = (0..slack.len())
            .filter(|&k| slack[k] > eps && !pinned.contains(&k))
            .collect();
        if fresh.is_empty() {
            break;
        }
        for &k in &fresh {
            out.push(entry(k, slack[k], Necessity::Alternate));
        }
        pinned.extend(fresh);
    }
    Ok(out)
}

impl BindingReport {
    /// Constraint labels per facet, sorted; box facets give their box label.
    pub fn label_sets(&self) -> Vec<Vec<String>> {
        self.facets
            .iter()
            .map(|f| {
                let mut v: Vec<String> = match &f.box_label {
                    Some(l) => vec![l.clone()],
                    None => f
                        .binding
                        .iter()
                        .map(|b| b.constraint.label.clone())
                        .collect(),
                };
                v.sort();
                v
            })
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<6} {:<40} {:<52} {:>12}",
            "facet", "hyperplane (MW)", "constraint", "slack (MW)"
        );
        for f in &self.facets {
            let plane = hyperplane_text(&f.normal, f.offset_mw, &self.renewables);
            match (&f.box_label, f.binding.is_empty()) {
                (Some(label), _) => {
                    let _ = writeln!(s, "{:<6} {:<40} {:<52} {:>12}", f.facet, plane, label, "-");
                }
                (None, true) => {
                    let _ = writeln!(
                        s,
                        "{:<6} {:<40} {:<52} {:>12}",
                        f.facet, plane, "(none found)", "-"
                    );
                }
                (None, false) => {
                    for (k, b) in f.binding.iter().enumerate() {
                        let label = match b.necessity {
                            Necessity::Necessary => b.constraint.label.clone(),
                            Necessity::Alternate => format!("{} (alt)", b.constraint.label),
                        };
                        let (id, p) = if k == 0 {
                            (f.facet.to_string(), plane.as_str())
                        } else {
                            (String::new(), "")
                        };
                        let _ =
                            writeln!(s, "{:<6} {:<40} {:<52} {:>12.4}", id, p, label, b.slack_mw);
                    }
                }
            }
        }
        s
    }
}

fn hyperplane_text(h: &[f64], f: f64, names: &[String]) -> String {
    let mut s = String::new();
    for (j, &a) in h.iter().enumerate() {
        if a.abs() < 1e-9 {
            continue;
        }
        let name = names
            .get(j)
            .cloned()
            .unwrap_or_else(|| format!("w{}", j + 1));
        if s.is_empty() {
            let _ = write!(s, "{a:.3}·{name}");
        } else {
            let _ = write!(
                s,
                " {} {:.3}·{name}",
                if a < 0.0 { '-' } else { '+' },
                a.abs()
            );
        }
    }
    let _ = write!(s, " ≤ {f:.3}");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_examples() {
        assert!((probe_point(&[65.0], &[65.0], &[50.0], 0.01)[0] - 65.15).abs() < 1e-12);
        assert!((probe_point(&[45.0], &[45.0], &[50.0], 0.01)[0] - 44.95).abs() < 1e-12);
        assert_eq!(
            probe_point(&[1.0, 2.0], &[3.0, 2.0], &[2.0, 2.0], 0.5),
            vec![2.0, 2.0]
        );
    }

    #[test]
    fn unit_square_terminal_points() {
        let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let (u, l) = terminal_points(&p, 1, &[1.0, 1.0]).unwrap();
        assert_eq!(u, vec![1.0, 1.0]);
        assert_eq!(l, vec![1.0, 0.0]);
    }
}
