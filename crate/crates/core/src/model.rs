//! Compact DC dispatch model `Aw + Bp + Cl + Dv = b`, `Ew + Fp + Gl + Jv ≤ d`.
//!
//! Columns are ordered `[w | p | l | v]`. Equality rows are nodal balance
//! per bus, flow definition per line and the reference-angle pin, in that
//! order. Inequality rows are, per limited line, the forward and reverse
//! flow limit; per flexible unit the upper and lower dispatch bound; per
//! line with finite angle limits the upper and lower angle difference.
//! Everything is per-unit on the case base.

use drr_lp::{solve_lp, LinearProgram, LpStatus, Sense, SparseRow};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::case::CaseData;
use crate::config::StudyConfig;
use crate::error::{DrrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VarKind {
    W,
    P,
    L,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RowKind {
    NodalBalance(usize),
    FlowDefinition(usize),
    AngleRef,
    FlowUpper(usize),
    FlowLower(usize),
    GenUpper(usize),
    GenLower(usize),
    AngleDiffUpper(usize),
    AngleDiffLower(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintDescriptor {
    pub kind: RowKind,
    pub label: String,
}

/// Pre-dispatch `p*` with the ramp window around it, all in MW.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchPoint {
    pub p_star: Vec<f64>,
    pub ramp: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
}

impl DispatchPoint {
    /// Attaches ramp windows of `ramp_fraction × p_max` to given set points.
    pub fn from_setpoints(case: &CaseData, p_star: &[f64], ramp_fraction: f64) -> Result<Self> {
        if p_star.len() != case.flexible.len() {
            return Err(DrrError::DimensionMismatch(format!(
                "{} set points for {} flexible units",
                p_star.len(),
                case.flexible.len()
            )));
        }
        let mut dp = DispatchPoint {
            p_star: p_star.to_vec(),
            ramp: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            p_min: Vec::new(),
            p_max: Vec::new(),
        };
        for (g, &p) in case.flexible.iter().zip(p_star) {
            if p < g.p_min_mw - 1e-9 || p > g.p_max_mw + 1e-9 {
                return Err(DrrError::InvalidConfig(format!(
                    "set point {p} MW of {} outside [{}, {}]",
                    g.name, g.p_min_mw, g.p_max_mw
                )));
            }
            let r = ramp_fraction * g.p_max_mw;
            dp.ramp.push(r);
            dp.lo.push((p - r).max(g.p_min_mw));
            dp.hi.push((p + r).min(g.p_max_mw));
            dp.p_min.push(g.p_min_mw);
            dp.p_max.push(g.p_max_mw);
        }
        Ok(dp)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactPsd {
    pub base_mva: f64,
    pub nw: usize,
    pub np: usize,
    pub nl: usize,
    pub nv: usize,
    pub eq_rows: Vec<SparseRow>,
    pub b: Vec<f64>,
    pub in_rows: Vec<SparseRow>,
    pub d: Vec<f64>,
    pub eq_desc: Vec<ConstraintDescriptor>,
    pub in_desc: Vec<ConstraintDescriptor>,
    pub var_index: Vec<(VarKind, usize)>,
    /// Forecast and installed capacity of each farm, per-unit.
    pub w_bar: Vec<f64>,
    pub w_cap: Vec<f64>,
}

impl CompactPsd {
    pub fn n_cols(&self) -> usize {
        self.nw + self.np + self.nl + self.nv
    }

    pub fn offset(&self, kind: VarKind) -> usize {
        match kind {
            VarKind::W => 0,
            VarKind::P => self.nw,
            VarKind::L => self.nw + self.np,
            VarKind::V => self.nw + self.np + self.nl,
        }
    }

    fn width(&self, kind: VarKind) -> usize {
        match kind {
            VarKind::W => self.nw,
            VarKind::P => self.np,
            VarKind::L => self.nl,
            VarKind::V => self.nv,
        }
    }

    /// Dense block: `A, B, C, D` for `equality = true`, else `E, F, G, J`.
    pub fn block(&self, equality: bool, kind: VarKind) -> DMatrix<f64> {
        let rows = if equality {
            &self.eq_rows
        } else {
            &self.in_rows
        };
        let (off, w) = (self.offset(kind), self.width(kind));
        let mut m = DMatrix::zeros(rows.len(), w);
        for (i, row) in rows.iter().enumerate() {
            for &(j, a) in row {
                if j >= off && j < off + w {
                    m[(i, j - off)] += a;
                }
            }
        }
        m
    }

    /// `g = −Aᵀα + Eᵀδ`, the coefficient of `w` in the dual objective.
    pub fn w_gradient(&self, alpha: &[f64], delta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.nw];
        for (row, &a) in self.eq_rows.iter().zip(alpha) {
            for &(j, c) in row {
                if j < self.nw {
                    g[j] -= c * a;
                }
            }
        }
        for (row, &dl) in self.in_rows.iter().zip(delta) {
            for &(j, c) in row {
                if j < self.nw {
                    g[j] += c * dl;
                }
            }
        }
        g
    }

    /// `αᵀb − δᵀd`.
    pub fn dual_constant(&self, alpha: &[f64], delta: &[f64]) -> f64 {
        let a: f64 = self.b.iter().zip(alpha).map(|(b, a)| b * a).sum();
        let d: f64 = self.d.iter().zip(delta).map(|(d, x)| d * x).sum();
        a - d
    }

    pub fn to_pu(&self, mw: &[f64]) -> Vec<f64> {
        mw.iter().map(|v| v / self.base_mva).collect()
    }

    pub fn to_mw(&self, pu: &[f64]) -> Vec<f64> {
        pu.iter().map(|v| v * self.base_mva).collect()
    }
}

/// Builds the compact model around `dp`.
pub fn build_compact(case: &CaseData, dp: &DispatchPoint) -> Result<CompactPsd> {
    if dp.p_star.len() != case.flexible.len() {
        return Err(DrrError::DimensionMismatch(
            "dispatch point does not match flexible units".into(),
        ));
    }
    let labels = |i: usize, upper: bool| {
        let g = &case.flexible[i];
        if upper {
            if dp.p_star[i] + dp.ramp[i] < dp.p_max[i] {
                format!("ramp-up capability of {}", g.name)
            } else {
                format!("upper generation limit of {}", g.name)
            }
        } else if dp.p_star[i] - dp.ramp[i] > dp.p_min[i] {
            format!("ramp-down capability of {}", g.name)
        } else {
            format!("lower generation limit of {}", g.name)
        }
    };
    assemble(case, &dp.lo, &dp.hi, labels)
}

fn assemble(
    case: &CaseData,
    lo_mw: &[f64],
    hi_mw: &[f64],
    gen_label: impl Fn(usize, bool) -> String,
) -> Result<CompactPsd> {
    let base = case.base_mva;
    let (nw, np, nl, nv) = (
        case.renewables.len(),
        case.flexible.len(),
        case.lines.len(),
        case.buses.len(),
    );
    let (op, ol, ov) = (nw, nw + np, nw + np + nl);
    for l in &case.lines {
        if !(l.reactance_pu.is_finite() && l.reactance_pu != 0.0) {
            return Err(DrrError::SingularNetwork(format!(
                "{} has zero reactance",
                l.label
            )));
        }
    }

    let mut eq_rows: Vec<SparseRow> = vec![Vec::new(); nv];
    let mut b: Vec<f64> = case.buses.iter().map(|bus| bus.load_mw / base).collect();
    let mut eq_desc: Vec<ConstraintDescriptor> = case
        .buses
        .iter()
        .enumerate()
        .map(|(i, bus)| ConstraintDescriptor {
            kind: RowKind::NodalBalance(i),
            label: format!("power balance at bus {}", bus.id),
        })
        .collect();
    for (k, r) in case.renewables.iter().enumerate() {
        eq_rows[r.bus].push((k, 1.0));
    }
    for (k, g) in case.flexible.iter().enumerate() {
        eq_rows[g.bus].push((op + k, 1.0));
    }
    for (k, l) in case.lines.iter().enumerate() {
        eq_rows[l.from].push((ol + k, -1.0));
        eq_rows[l.to].push((ol + k, 1.0));
    }
    for (k, l) in case.lines.iter().enumerate() {
        let y = 1.0 / l.reactance_pu;
        eq_rows.push(vec![(ol + k, 1.0), (ov + l.from, -y), (ov + l.to, y)]);
        b.push(0.0);
        eq_desc.push(ConstraintDescriptor {
            kind: RowKind::FlowDefinition(k),
            label: format!("flow definition of {}", l.label),
        });
    }
    eq_rows.push(vec![(ov + case.reference, 1.0)]);
    b.push(0.0);
    eq_desc.push(ConstraintDescriptor {
        kind: RowKind::AngleRef,
        label: format!("reference angle at bus {}", case.buses[case.reference].id),
    });

    let mut in_rows: Vec<SparseRow> = Vec::new();
    let mut d = Vec::new();
    let mut in_desc = Vec::new();
    let mut push = |row: SparseRow, rhs: f64, kind: RowKind, label: String| {
        in_rows.push(row);
        d.push(rhs);
        in_desc.push(ConstraintDescriptor { kind, label });
    };
    for (k, l) in case.lines.iter().enumerate() {
        if let Some(rate) = l.rate_mw {
            push(
                vec![(ol + k, 1.0)],
                rate / base,
                RowKind::FlowUpper(k),
                format!("thermal limit of {} (forward)", l.label),
            );
            push(
                vec![(ol + k, -1.0)],
                rate / base,
                RowKind::FlowLower(k),
                format!("thermal limit of {} (reverse)", l.label),
            );
        }
    }
    for k in 0..np {
        push(
            vec![(op + k, 1.0)],
            hi_mw[k] / base,
            RowKind::GenUpper(k),
            gen_label(k, true),
        );
        push(
            vec![(op + k, -1.0)],
            -lo_mw[k] / base,
            RowKind::GenLower(k),
            gen_label(k, false),
        );
    }
    for (k, l) in case.lines.iter().enumerate() {
        if let Some(hi) = l.angle_max_rad {
            push(
                vec![(ov + l.from, 1.0), (ov + l.to, -1.0)],
                hi,
                RowKind::AngleDiffUpper(k),
                format!("angle difference upper limit of {}", l.label),
            );
        }
        if let Some(lo) = l.angle_min_rad {
            push(
                vec![(ov + l.from, -1.0), (ov + l.to, 1.0)],
                -lo,
                RowKind::AngleDiffLower(k),
                format!("angle difference lower limit of {}", l.label),
            );
        }
    }

    let mut var_index = Vec::with_capacity(nw + np + nl + nv);
    var_index.extend((0..nw).map(|k| (VarKind::W, k)));
    var_index.extend((0..np).map(|k| (VarKind::P, k)));
    var_index.extend((0..nl).map(|k| (VarKind::L, k)));
    var_index.extend((0..nv).map(|k| (VarKind::V, k)));
    Ok(CompactPsd {
        base_mva: base,
        nw,
        np,
        nl,
        nv,
        eq_rows,
        b,
        in_rows,
        d,
        eq_desc,
        in_desc,
        var_index,
        w_bar: case
            .renewables
            .iter()
            .map(|r| r.forecast_mw / base)
            .collect(),
        w_cap: case
            .renewables
            .iter()
            .map(|r| r.capacity_mw / base)
            .collect(),
    })
}

/// Least-cost dispatch of the flexible units with renewables at their
/// forecast and capacities derated by the reserve factor.
pub fn initial_dispatch(case: &CaseData, cfg: &StudyConfig) -> Result<DispatchPoint> {
    let mut cost = Vec::with_capacity(case.flexible.len());
    for g in &case.flexible {
        cost.push(
            g.linear_cost
                .ok_or_else(|| DrrError::UnboundedCost(g.name.clone()))?,
        );
    }
    let lo: Vec<f64> = case.flexible.iter().map(|g| g.p_min_mw).collect();
    let hi: Vec<f64> = case
        .flexible
        .iter()
        .map(|g| (cfg.reserve_factor * g.p_max_mw).max(g.p_min_mw))
        .collect();
    let m = assemble(case, &lo, &hi, |k, up| {
        format!(
            "{} {}",
            case.flexible[k].name,
            if up { "max" } else { "min" }
        )
    })?;
    let mut lp = LinearProgram::new(Sense::Minimize, m.n_cols());
    for (k, w) in m.w_bar.iter().enumerate() {
        lp.set_bounds(k, *w, *w);
    }
    for (k, c) in cost.iter().enumerate() {
        lp.objective[m.nw + k] = *c;
    }
    for (row, &rhs) in m.eq_rows.iter().zip(&m.b) {
        lp.add_eq(row.clone(), rhs);
    }
    for (row, &rhs) in m.in_rows.iter().zip(&m.d) {
        lp.add_le(row.clone(), rhs);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            let supply: f64 = hi.iter().sum::<f64>() + case.w_bar().iter().sum::<f64>();
            return Err(DrrError::InfeasibleDispatch {
                shortfall_mw: case.total_load_mw() - supply,
            });
        }
        LpStatus::Unbounded => return Err(DrrError::UnboundedCost("dispatch objective".into())),
    }
    let p: Vec<f64> = (0..m.np)
        .map(|k| (sol.x[m.nw + k] * case.base_mva).clamp(lo[k], hi[k]))
        .collect();
    DispatchPoint::from_setpoints(case, &p, cfg.ramp_fraction)
}

/// Line-flow sensitivities to bus injections, reference column zero.
#[derive(Debug, Clone)]
pub struct PtdfMatrix {
    pub pi: DMatrix<f64>,
    pub reference: usize,
}

impl PtdfMatrix {
    pub fn flows(&self, injections: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(injections);
        (&self.pi * x).iter().copied().collect()
    }
}

pub fn build_ptdf(case: &CaseData) -> Result<PtdfMatrix> {
    let nb = case.buses.len();
    let r = case.reference;
    let mut bbus = DMatrix::<f64>::zeros(nb, nb);
    for l in &case.lines {
        if !(l.reactance_pu.is_finite() && l.reactance_pu != 0.0) {
            return Err(DrrError::SingularNetwork(format!(
                "{} has zero reactance",
                l.label
            )));
        }
        let y = 1.0 / l.reactance_pu;
        bbus[(l.from, l.from)] += y;
        bbus[(l.to, l.to)] += y;
        bbus[(l.from, l.to)] -= y;
        bbus[(l.to, l.from)] -= y;
    }
    let keep: Vec<usize> = (0..nb).filter(|&i| i != r).collect();
    let reduced = bbus.select_rows(&keep).select_columns(&keep);
    let inv = reduced.try_inverse().ok_or_else(|| {
        DrrError::SingularNetwork("reduced susceptance matrix is singular".into())
    })?;
    // angle response to unit injections, reference row/column zero
    let mut x = DMatrix::<f64>::zeros(nb, nb);
    for (a, &i) in keep.iter().enumerate() {
        for (c, &j) in keep.iter().enumerate() {
            x[(i, j)] = inv[(a, c)];
        }
    }
    let mut pi = DMatrix::<f64>::zeros(case.lines.len(), nb);
    for (k, l) in case.lines.iter().enumerate() {
        for i in 0..nb {
            pi[(k, i)] = (x[(l.from, i)] - x[(l.to, i)]) / l.reactance_pu;
        }
    }
    Ok(PtdfMatrix { pi, reference: r })
}
