mod common;

use common::*;
use drr_core::binding::{identify_with, FacetOrigin};
use drr_core::export::{region_json, region_svg, trace_csv};
use drr_core::{
    feasibility_model, high_risk_event, identify, run, vertices_2d, Method, Polytope, Provenance,
    SlackWeights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_polygon(rng: &mut ChaCha8Rng) -> Polytope {
    let mut p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
    for _ in 0..rng.gen_range(1..7) {
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = [t.cos(), t.sin()];
        let off = dot(&n, &[0.5, 0.5]) + rng.gen_range(0.1..0.6);
        p.push(
            &n,
            off,
            Provenance::Cut {
                iteration: 1,
                scenario: None,
            },
        )
        .unwrap();
    }
    drr_core::remove_redundant(&p).unwrap()
}

#[test]
fn vertex_hull_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let v = vertices_2d(&random_polygon(&mut rng)).unwrap();
        let mut hull = Polytope::from_box(&[-1.0, -1.0], &[2.0, 2.0]);
        for k in 0..v.len() {
            let (a, b) = (&v[k], &v[(k + 1) % v.len()]);
            // counterclockwise order puts the region on the left of each edge
            let n = [b[1] - a[1], a[0] - b[0]];
            hull.push(
                &n,
                dot(&n, a),
                Provenance::Cut {
                    iteration: 1,
                    scenario: None,
                },
            )
            .unwrap();
        }
        let again = vertices_2d(&drr_core::remove_redundant(&hull).unwrap()).unwrap();
        assert_eq!(v.len(), again.len());
        for (p, q) in v.iter().zip(&again) {
            assert!(
                (p[0] - q[0]).abs() < 1e-8 && (p[1] - q[1]).abs() < 1e-8,
                "{v:?} vs {again:?}"
            );
        }
    }
}

#[test]
fn event_matches_edge_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut tested = 0;
    while tested < 100 {
        let p = random_polygon(&mut rng);
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        if p.violation(&x) >= -1e-6 {
            continue;
        }
        tested += 1;
        let e = high_risk_event(&p, &x).unwrap();
        let v = vertices_2d(&p).unwrap();
        let (to, d) = nearest_on_edges(&v, &x);
        assert!(!e.degenerate);
        assert!((e.distance - d).abs() < 1e-9, "{} vs {d}", e.distance);
        assert!((e.to[0] - to[0]).abs() < 1e-9 && (e.to[1] - to[1]).abs() < 1e-9);
        assert!(p.contains(&e.to, 1e-8));
        assert!((dot(&p.h[e.facet], &e.to) - p.f[e.facet]).abs() < 1e-6);
        for q in &v {
            assert!(e.distance <= ((q[0] - x[0]).powi(2) + (q[1] - x[1]).powi(2)).sqrt() + 1e-12);
        }
    }
}

#[test]
fn forecast_on_the_boundary_is_degenerate() {
    let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
    let e = high_risk_event(&p, &[1.0, 0.5]).unwrap();
    assert!(e.degenerate);
    assert_eq!(e.distance, 0.0);
}

#[test]
fn two_bus_binding_labels() {
    let case = load("twobus");
    let cfg = cfg();
    let (m, _) = compact(&case, &cfg);
    let r = run(&case, &cfg, Method::Milp).unwrap();
    let report = identify(&m, &r.polytope, &r.metadata.renewables, &cfg, false).unwrap();
    assert_eq!(report.facets.len(), 2);
    for f in &report.facets {
        assert_eq!(f.origin, FacetOrigin::PhysicalConstraint);
        let allowed: &[&str] = if f.normal[0] > 0.0 {
            assert!((f.probe_mw[0] - 65.15).abs() < 1e-9);
            &["ramp-down capability of G1", "ramp-down capability of G2"]
        } else {
            assert!((f.probe_mw[0] - 44.95).abs() < 1e-9);
            &[
                "ramp-up capability of G2",
                "thermal limit of line 1-2 (forward)",
            ]
        };
        assert!(!f.binding.is_empty());
        for b in &f.binding {
            assert!(
                allowed.contains(&b.constraint.label.as_str()),
                "{}",
                b.constraint.label
            );
        }
    }
}

#[test]
fn pjm5_binding_labels() {
    let case = load("pjm5");
    let cfg = cfg();
    let (m, _) = compact(&case, &cfg);
    let r = run(&case, &cfg, Method::Iblp).unwrap();
    let report = identify(&m, &r.polytope, &r.metadata.renewables, &cfg, false).unwrap();
    assert_eq!(report.facets.len(), 7);
    assert_eq!(vertices_2d(&r.region_mw()).unwrap().len(), 7);
    let sets = report.label_sets();
    assert!(sets.iter().any(|s| s == &["initial upper bound of R1"]));
    assert!(sets
        .iter()
        .any(|s| s.len() == 1 && s[0].starts_with("initial") && s[0].ends_with("R2")));
    assert!(sets
        .iter()
        .any(|s| s.iter().any(|l| l == "ramp-down capability of G5")));
    let line45 = sets
        .iter()
        .filter(|s| s.iter().any(|l| l.starts_with("thermal limit of line 4-5")))
        .count();
    assert!(line45 >= 3, "{sets:?}");
}

#[test]
fn probes_sit_just_outside() {
    let cfg = cfg();
    for name in ["twobus", "pjm5"] {
        let case = load(name);
        let (m, _) = compact(&case, &cfg);
        let r = run(&case, &cfg, Method::Milp).unwrap();
        let report = identify(&m, &r.polytope, &r.metadata.renewables, &cfg, false).unwrap();
        let wt = SlackWeights::from_prices(&m, &cfg.weights);
        for f in report
            .facets
            .iter()
            .filter(|f| f.origin == FacetOrigin::PhysicalConstraint)
        {
            let probe = m.to_pu(&f.probe_mw);
            assert!(feasibility_model(&m, &probe, Some(&wt)).unwrap().objective > 0.0);
            let inward: Vec<f64> = f
                .terminal_upper_mw
                .iter()
                .zip(&f.terminal_lower_mw)
                .zip(&m.w_bar)
                .map(|((u, l), b)| {
                    let mid = 0.5 * (u + l) / m.base_mva;
                    mid - cfg.perturb_lambda * (mid - b)
                })
                .collect();
            assert!(
                feasibility_model(&m, &inward, Some(&wt)).unwrap().objective <= 1e-9,
                "{name} facet {}",
                f.facet
            );
        }
    }
}

#[test]
fn halving_lambda_keeps_the_labels() {
    let cfg = cfg();
    for name in ["twobus", "pjm5"] {
        let case = load(name);
        let (m, _) = compact(&case, &cfg);
        let r = run(&case, &cfg, Method::Milp).unwrap();
        let names = &r.metadata.renewables;
        let beta = vec![1.0; m.nw];
        let a = identify_with(
            &m,
            &r.polytope,
            names,
            &cfg,
            cfg.perturb_lambda,
            &beta,
            false,
        )
        .unwrap();
        let b = identify_with(
            &m,
            &r.polytope,
            names,
            &cfg,
            cfg.perturb_lambda / 2.0,
            &beta,
            false,
        )
        .unwrap();
        if a.label_sets() != b.label_sets() {
            eprintln!(
                "{name}: labels move with lambda: {:?} vs {:?}",
                a.label_sets(),
                b.label_sets()
            );
        }
    }
}

#[test]
fn artifacts() {
    let cfg = cfg();
    let r = run(&load("pjm5"), &cfg, Method::Milp).unwrap();
    let csv = trace_csv(&r);
    assert_eq!(csv.lines().count(), r.trace.len() + 1);
    let svg = region_svg(&r, None).unwrap();
    assert_eq!(svg.matches("<path class=\"region\"").count(), 1);
    assert_eq!(
        region_json(&r).unwrap(),
        region_json(&run(&load("pjm5"), &cfg, Method::Milp).unwrap()).unwrap()
    );

    let r3 = run(&three_farm_pjm5(), &cfg, Method::Iblp).unwrap();
    assert!(region_svg(&r3, None).is_none());
}

fn three_farm_pjm5() -> drr_core::CaseData {
    let (mut raw, mut specs) = raw("pjm5");
    raw.generators.push(drr_core::case::RawGen {
        bus: 3,
        p_max_mw: 100.0,
        p_min_mw: 0.0,
        status: true,
    });
    raw.gencost.push(raw.gencost[0].clone());
    specs.push(drr_core::RenewableSpec {
        generator_index: raw.generators.len() - 1,
        forecast_mw: 40.0,
    });
    drr_core::apply_renewables(&raw, &specs).unwrap()
}
