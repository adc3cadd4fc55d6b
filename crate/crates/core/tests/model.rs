mod common;

use common::*;
use drr_core::case::{to_matpower, GenCost, RawBranch, RawBus, RawGen};
use drr_core::checks::ptdf_gap;
use drr_core::model::build_ptdf;
use drr_core::{
    apply_renewables, build_compact, feasibility_model, init_w0, initial_dispatch, parse_matpower,
    DispatchPoint, DrrError, RawCase, RenewableSpec, SlackWeights, StudyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(from_bus: usize, to_bus: usize, x: f64) -> RawBranch {
    RawBranch {
        from_bus,
        to_bus,
        reactance_pu: x,
        rate_a_mw: 0.0,
        angle_min_deg: -360.0,
        angle_max_deg: 360.0,
        status: true,
    }
}

fn node(id: usize, bus_type: u8, load_mw: f64) -> RawBus {
    RawBus {
        id,
        bus_type,
        load_mw,
        load_mvar: 0.0,
    }
}

fn unit(bus: usize, p_max_mw: f64) -> RawGen {
    RawGen {
        bus,
        p_max_mw,
        p_min_mw: 0.0,
        status: true,
    }
}

fn linear(c: f64) -> GenCost {
    GenCost {
        model: 2,
        startup: 0.0,
        shutdown: 0.0,
        coeffs: vec![c, 0.0],
    }
}

/// Angles from `Bθ = P` with the reference pinned, by Gaussian elimination
/// with partial pivoting, then `(θ_from − θ_to)/x` per line.
fn angle_flows(case: &drr_core::CaseData, inj: &[f64]) -> Vec<f64> {
    let n = case.buses.len();
    let r = case.reference;
    let mut a = vec![vec![0.0; n]; n];
    for l in &case.lines {
        let y = 1.0 / l.reactance_pu;
        a[l.from][l.from] += y;
        a[l.to][l.to] += y;
        a[l.from][l.to] -= y;
        a[l.to][l.from] -= y;
    }
    let mut b = inj.to_vec();
    a[r] = vec![0.0; n];
    a[r][r] = 1.0;
    b[r] = 0.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let k = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= k * a[c][j];
            }
            b[i] -= k * b[c];
        }
    }
    let mut th = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * th[j]).sum();
        th[i] = (b[i] - s) / a[i][i];
    }
    case.lines
        .iter()
        .map(|l| (th[l.from] - th[l.to]) / l.reactance_pu)
        .collect()
}

#[test]
fn two_bus_ptdf() {
    let raw = RawCase {
        base_mva: 100.0,
        buses: vec![node(1, 2, 0.0), node(2, 3, 10.0)],
        branches: vec![line(1, 2, 1.0)],
        generators: vec![unit(1, 50.0)],
        gencost: vec![linear(1.0)],
    };
    let case = apply_renewables(&raw, &[]).unwrap();
    let p = build_ptdf(&case).unwrap();
    assert_eq!(p.reference, 1);
    assert!((p.pi[(0, 0)] - 1.0).abs() < 1e-12);
    assert_eq!(p.pi[(0, 1)], 0.0);
}

#[test]
fn symmetric_ring_ptdf() {
    let raw = RawCase {
        base_mva: 100.0,
        buses: vec![node(1, 3, 0.0), node(2, 1, 10.0), node(3, 1, 10.0)],
        branches: vec![line(1, 2, 0.1), line(2, 3, 0.1), line(1, 3, 0.1)],
        generators: vec![unit(1, 50.0)],
        gencost: vec![linear(1.0)],
    };
    let case = apply_renewables(&raw, &[]).unwrap();
    let p = build_ptdf(&case).unwrap();
    for v in p.pi.iter() {
        let a = v.abs();
        assert!(
            a < 1e-12 || (a - 1.0 / 3.0).abs() < 1e-12 || (a - 2.0 / 3.0).abs() < 1e-12,
            "{a}"
        );
    }
}

#[test]
fn ptdf_matches_angle_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["pjm5", "ieee39"] {
        let case = load(name);
        let p = build_ptdf(&case).unwrap();
        for _ in 0..10 {
            let mut inj: Vec<f64> = (0..case.buses.len())
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect();
            let total: f64 = inj.iter().sum();
            inj[case.reference] -= total;
            let want = angle_flows(&case, &inj);
            let got = p.flows(&inj);
            for (a, b) in want.iter().zip(&got) {
                assert!((a - b).abs() <= 1e-9, "{name}: {a} vs {b}");
            }
        }
        let (m, _) = compact(&case, &cfg());
        assert!(ptdf_gap(&case, &m).unwrap() <= 1e-8, "{name}");
    }
}

#[test]
fn zero_reactance_is_singular() {
    let (mut raw, specs) = raw("twobus");
    raw.branches[0].reactance_pu = 0.0;
    let case = apply_renewables(&raw, &specs).unwrap();
    assert!(matches!(
        build_ptdf(&case),
        Err(DrrError::SingularNetwork(_))
    ));
}

#[test]
fn two_bus_dimensions() {
    let case = load("twobus");
    let (m, _) = compact(&case, &cfg());
    assert_eq!((m.nw, m.np, m.nl, m.nv), (1, 2, 1, 2));
    assert_eq!(m.eq_rows.len(), 4);
    assert_eq!(m.in_rows.len(), 6);
}

#[test]
fn single_bus_has_no_network_rows() {
    let raw = RawCase {
        base_mva: 100.0,
        buses: vec![node(1, 3, 100.0)],
        branches: vec![],
        generators: vec![unit(1, 100.0)],
        gencost: vec![linear(5.0)],
    };
    let case = apply_renewables(&raw, &[]).unwrap();
    let cfg = StudyConfig {
        reserve_factor: 1.0,
        ..cfg()
    };
    let dp = initial_dispatch(&case, &cfg).unwrap();
    assert!((dp.p_star[0] - 100.0).abs() < 1e-9);
    let m = build_compact(&case, &dp).unwrap();
    assert_eq!((m.nl, m.nv), (0, 1));
    assert_eq!(m.eq_rows.len(), 2);
    assert!(matches!(init_w0(&case), Err(DrrError::NoRenewables)));
}

#[test]
fn forced_two_bus_dispatch_windows() {
    let case = load("twobus");
    let dp = DispatchPoint::from_setpoints(&case, &[70.0, 30.0], 0.1).unwrap();
    assert_eq!(dp.lo, vec![60.0, 25.0]);
    assert_eq!(dp.hi, vec![80.0, 35.0]);
}

#[test]
fn two_bus_violation_values() {
    let case = load("twobus");
    let dp = DispatchPoint::from_setpoints(&case, &[70.0, 30.0], 0.1).unwrap();
    let m = build_compact(&case, &dp).unwrap();
    let f = |mw: f64| feasibility_model(&m, &[mw / 100.0], None).unwrap();
    assert!(f(50.0).objective.abs() < 1e-9);
    assert!(f(45.0).objective.abs() < 1e-9);
    assert!(f(65.0).objective.abs() < 1e-9);
    assert!((f(70.0).objective * 100.0 - 5.0).abs() < 1e-7);
    assert!((f(0.0).objective * 100.0 - 45.0).abs() < 1e-7);
    assert!((f(100.0).objective * 100.0 - 35.0).abs() < 1e-7);
    assert!((f(44.0).objective * 100.0 - 1.0).abs() < 1e-7);
    // uniform prices tie balance slack with limit slack; keep physics hard
    let hard = SlackWeights::limits_only(&m, &Default::default());
    let low = feasibility_model(&m, &[0.44], Some(&hard)).unwrap();
    assert!(low.objective > 0.0);
    let rows: Vec<String> = low
        .slack_by_row(&m, 1e-9)
        .into_iter()
        .map(|(d, _)| d.label.clone())
        .collect();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(
            r == "ramp-up capability of G2" || r == "thermal limit of line 1-2 (forward)",
            "{r}"
        );
    }
}

#[test]
fn forecast_is_dispatchable_on_fixtures() {
    for name in ["twobus", "pjm5", "ieee39", "ieee118"] {
        let case = load(name);
        let (m, _) = compact(&case, &cfg());
        let r = feasibility_model(
            &m,
            &m.w_bar,
            Some(&SlackWeights::from_prices(&m, &cfg().weights)),
        )
        .unwrap();
        assert!(r.objective <= 1e-9, "{name}: {}", r.objective);
    }
}

#[test]
fn violation_is_homogeneous() {
    let (raw, specs) = raw("pjm5");
    let k = 2.0;
    let mut big = raw.clone();
    for b in &mut big.buses {
        b.load_mw *= k;
    }
    for br in &mut big.branches {
        br.rate_a_mw *= k;
    }
    for g in &mut big.generators {
        g.p_max_mw *= k;
        g.p_min_mw *= k;
    }
    let big_specs: Vec<RenewableSpec> = specs
        .iter()
        .map(|s| RenewableSpec {
            forecast_mw: s.forecast_mw * k,
            ..*s
        })
        .collect();
    let small = apply_renewables(&raw, &specs).unwrap();
    let large = apply_renewables(&big, &big_specs).unwrap();
    let (m1, _) = compact(&small, &cfg());
    let (m2, _) = compact(&large, &cfg());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let w: Vec<f64> = m1.w_cap.iter().map(|c| rng.gen_range(0.0..=*c)).collect();
        let w2: Vec<f64> = w.iter().map(|v| v * k).collect();
        let a = feasibility_model(&m1, &w, None).unwrap().objective;
        let b = feasibility_model(&m2, &w2, None).unwrap().objective;
        assert!((b - k * a).abs() <= 1e-7, "{a} {b}");
    }
}

#[test]
fn case_files_round_trip() {
    for name in ["twobus", "pjm5", "ieee39", "ieee118"] {
        let (r, _) = raw(name);
        let again = parse_matpower(&to_matpower(&r, name)).unwrap();
        assert_eq!(r, again, "{name}");
    }
}

#[test]
fn generator_partition() {
    for name in ["pjm5", "ieee39", "ieee118"] {
        let (r, _) = raw(name);
        let case = load(name);
        let mut rows: Vec<usize> = case
            .flexible
            .iter()
            .map(|g| g.source_row)
            .chain(case.renewables.iter().map(|g| g.source_row))
            .collect();
        rows.sort();
        let n = rows.len();
        rows.dedup();
        assert_eq!(rows.len(), n, "{name}: overlap");
        let in_service: Vec<usize> = (0..r.generators.len())
            .filter(|&i| r.generators[i].status)
            .collect();
        assert_eq!(rows, in_service, "{name}");
    }
}

#[test]
fn fixture_shapes() {
    let (r, _) = raw("pjm5");
    assert_eq!((r.buses.len(), r.generators.len()), (5, 7));
    assert_eq!(load("pjm5").w_bar(), vec![100.0, 90.0]);
    let c = load("ieee39");
    assert_eq!(c.buses.len(), 39);
    assert_eq!(c.w_bar(), vec![343.0, 290.0, 282.0, 432.0, 550.0]);
    let buses: Vec<usize> = c.renewables.iter().map(|f| c.buses[f.bus].id).collect();
    assert_eq!(buses, vec![1, 5, 10, 15, 20]);
    assert_eq!(load("ieee118").renewables.len(), 20);
}

#[test]
fn empty_branch_table_is_malformed() {
    let text = std::fs::read_to_string(cases_dir().join("twobus.m")).unwrap();
    let start = text.find("mpc.branch = [").unwrap();
    let end = start + text[start..].find("];").unwrap();
    let cut = format!("{}mpc.branch = [\n{}", &text[..start], &text[end..]);
    assert!(matches!(
        parse_matpower(&cut),
        Err(DrrError::MalformedCase { .. })
    ));
}
