#![allow(dead_code)]

use std::path::PathBuf;

use drr_core::case::{GenCost, RawBranch, RawBus, RawGen};
use drr_core::{
    apply_renewables, build_compact, feasibility_model, initial_dispatch, parse_matpower,
    parse_renewables_json, CaseData, CompactPsd, DispatchPoint, Polytope, RawCase, RenewableSpec,
    StudyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cases_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

pub fn raw(name: &str) -> (RawCase, Vec<RenewableSpec>) {
    let dir = cases_dir();
    let text = std::fs::read_to_string(dir.join(format!("{name}.m"))).unwrap();
    let rens = std::fs::read_to_string(dir.join(format!("{name}_rens.json"))).unwrap();
    (
        parse_matpower(&text).unwrap(),
        parse_renewables_json(&rens).unwrap(),
    )
}

pub fn load(name: &str) -> CaseData {
    let (r, s) = raw(name);
    apply_renewables(&r, &s).unwrap()
}

pub fn cfg() -> StudyConfig {
    StudyConfig {
        thread_count: 1,
        ..StudyConfig::default()
    }
}

pub fn compact(case: &CaseData, cfg: &StudyConfig) -> (CompactPsd, DispatchPoint) {
    let dp = initial_dispatch(case, cfg).unwrap();
    (build_compact(case, &dp).unwrap(), dp)
}

/// Ring of three buses with a flexible unit at buses 1 and 2 and farms at
/// buses 2 and 3. Draws until the forecast is dispatchable.
pub fn random_3bus(seed: u64) -> CaseData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let raw = RawCase {
            base_mva: 100.0,
            buses: vec![
                bus(1, 3, 0.0),
                bus(2, 1, rng.gen_range(60.0..140.0)),
                bus(3, 1, rng.gen_range(60.0..140.0)),
            ],
            branches: vec![
                branch(1, 2, rng.gen_range(0.05..0.2), rng.gen_range(60.0..150.0)),
                branch(2, 3, rng.gen_range(0.05..0.2), rng.gen_range(30.0..80.0)),
                branch(1, 3, rng.gen_range(0.05..0.2), rng.gen_range(60.0..150.0)),
            ],
            generators: vec![
                gen(1, rng.gen_range(200.0..300.0)),
                gen(2, rng.gen_range(80.0..150.0)),
                gen(2, 100.0),
                gen(3, 100.0),
            ],
            gencost: vec![
                cost(rng.gen_range(10.0..20.0)),
                cost(rng.gen_range(20.0..40.0)),
                cost(0.0),
                cost(0.0),
            ],
        };
        let specs = vec![
            RenewableSpec {
                generator_index: 2,
                forecast_mw: rng.gen_range(20.0..60.0),
            },
            RenewableSpec {
                generator_index: 3,
                forecast_mw: rng.gen_range(20.0..60.0),
            },
        ];
        let case = apply_renewables(&raw, &specs).unwrap();
        let Ok(dp) = initial_dispatch(&case, &cfg()) else {
            continue;
        };
        let m = build_compact(&case, &dp).unwrap();
        if feasibility_model(&m, &m.w_bar, None).unwrap().objective <= 1e-9 {
            return case;
        }
    }
}

fn bus(id: usize, bus_type: u8, load_mw: f64) -> RawBus {
    RawBus {
        id,
        bus_type,
        load_mw,
        load_mvar: 0.0,
    }
}

fn branch(from_bus: usize, to_bus: usize, reactance_pu: f64, rate_a_mw: f64) -> RawBranch {
    RawBranch {
        from_bus,
        to_bus,
        reactance_pu,
        rate_a_mw,
        angle_min_deg: -360.0,
        angle_max_deg: 360.0,
        status: true,
    }
}

fn gen(bus: usize, p_max_mw: f64) -> RawGen {
    RawGen {
        bus,
        p_max_mw,
        p_min_mw: 0.0,
        status: true,
    }
}

fn cost(c1: f64) -> GenCost {
    GenCost {
        model: 2,
        startup: 0.0,
        shutdown: 0.0,
        coeffs: vec![c1, 0.0],
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cell centres of an `n × n` grid over the bounding box of a 2-D region.
pub fn grid(p: &Polytope, n: usize) -> Vec<[f64; 2]> {
    let (lo, hi) = (&p.box_lo, &p.box_hi);
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push([
                lo[0] + (a as f64 + 0.5) / n as f64 * (hi[0] - lo[0]),
                lo[1] + (b as f64 + 0.5) / n as f64 * (hi[1] - lo[1]),
            ]);
        }
    }
    out
}

/// Uniform points of the box of `p` that lie inside `p`.
pub fn sample_inside(p: &Polytope, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 1_000_000 {
        tries += 1;
        let w: Vec<f64> = (0..p.dim)
            .map(|j| rng.gen_range(p.box_lo[j]..=p.box_hi[j]))
            .collect();
        if p.contains(&w, 0.0) {
            out.push(w);
        }
    }
    out
}

/// Points of `w0` where the dispatch is feasible with nothing to spare.
pub fn certified_interior(m: &CompactPsd, w0: &Polytope, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fm =
        drr_core::feasibility::FeasibilityModel::new(m, &drr_core::SlackWeights::uniform(m))
            .unwrap();
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 200_000 {
        tries += 1;
        let w: Vec<f64> = (0..w0.dim)
            .map(|j| rng.gen_range(w0.box_lo[j]..=w0.box_hi[j]))
            .collect();
        if fm.evaluate(&w).unwrap().objective <= 0.0 {
            out.push(w);
        }
    }
    out
}

/// Nearest point of the closed polygon `verts` to `x`, by projecting onto
/// every edge.
pub fn nearest_on_edges(verts: &[Vec<f64>], x: &[f64]) -> (Vec<f64>, f64) {
    let mut best = (verts[0].clone(), f64::INFINITY);
    for k in 0..verts.len() {
        let (a, b) = (&verts[k], &verts[(k + 1) % verts.len()]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let ee = e[0] * e[0] + e[1] * e[1];
        let t = if ee > 0.0 {
            (((x[0] - a[0]) * e[0] + (x[1] - a[1]) * e[1]) / ee).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let p = vec![a[0] + t * e[0], a[1] + t * e[1]];
        let d = ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt();
        if d < best.1 {
            best = (p, d);
        }
    }
    best
}
