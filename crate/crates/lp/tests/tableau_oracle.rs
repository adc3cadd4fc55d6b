//! Random 20×40 programs against a plain two-phase tableau simplex with
//! Bland's rule, and a conditioning regression for warm starts.

use drr_lp::{solve_lp, LinearProgram, LpStatus, Sense, SimplexSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

/// Minimizes `c·x` over `x ≥ 0`, rows `a_i·x = b_i` (if `eq[i]`) or
/// `a_i·x ≤ b_i`. `None` if infeasible.
fn tableau_min(c: &[f64], a: &[Vec<f64>], b: &[f64], eq: &[bool]) -> Option<f64> {
    let (m, n) = (a.len(), c.len());
    let n_slack = eq.iter().filter(|e| !**e).count();
    let width = n + n_slack + m + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; m];
    let mut basis = vec![0; m];
    let mut s = n;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        if !eq[i] {
            t[i][s] = sign;
            s += 1;
        }
        t[i][rhs] = sign * b[i];
        t[i][n + n_slack + i] = 1.0;
        basis[i] = n + n_slack + i;
    }
    let art = n + n_slack;

    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, q: usize| {
        let p = t[r][q];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        for i in 0..t.len() {
            if i != r && t[i][q] != 0.0 {
                let k = t[i][q];
                for j in 0..width {
                    t[i][j] -= k * t[r][j];
                }
            }
        }
        basis[r] = q;
    };
    // Bland: lowest eligible column enters, lowest basic index breaks ratio ties
    let optimize = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| loop {
        let reduced = |j: usize, t: &Vec<Vec<f64>>, basis: &Vec<usize>| {
            cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>()
        };
        let Some(q) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j, t, basis) < -1e-9)
        else {
            return;
        };
        let mut best: Option<(f64, usize)> = None;
        for i in 0..m {
            if t[i][q] > TOL {
                let ratio = t[i][rhs] / t[i][q];
                let better = match best {
                    None => true,
                    Some((r0, i0)) => {
                        ratio < r0 - 1e-12 || (ratio <= r0 + 1e-12 && basis[i] < basis[i0])
                    }
                };
                if better {
                    best = Some((ratio, i));
                }
            }
        }
        let (_, r) = best.expect("bounded by construction");
        pivot(t, basis, r, q);
    };

    let mut phase1 = vec![0.0; width - 1];
    for v in phase1.iter_mut().skip(art) {
        *v = 1.0;
    }
    optimize(&mut t, &mut basis, &phase1, width - 1);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= art).map(|i| t[i][rhs]).sum();
    if infeas > 1e-7 {
        return None;
    }
    for i in 0..m {
        if basis[i] >= art {
            if let Some(q) = (0..art).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, q);
            }
        }
    }
    let mut cost = vec![0.0; width - 1];
    cost[..n].copy_from_slice(c);
    optimize(&mut t, &mut basis, &cost, art);
    Some((0..m).map(|i| cost[basis[i]] * t[i][rhs]).sum())
}

/// 20 rows (some equalities) over 40 boxed variables, feasible by
/// construction around a random interior point.
fn instance(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = 40;
    let mut lp = LinearProgram::new(Sense::Minimize, n);
    let mut x0 = vec![0.0; n];
    for j in 0..n {
        lp.objective[j] = rng.gen_range(-10.0..10.0);
        let lo = rng.gen_range(-5.0..5.0);
        let hi = lo + rng.gen_range(0.5..10.0);
        lp.set_bounds(j, lo, hi);
        x0[j] = rng.gen_range(lo..hi);
    }
    for i in 0..20 {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.4) {
                row.push((j, rng.gen_range(-5.0..5.0)));
            }
        }
        let at: f64 = row.iter().map(|&(j, a)| a * x0[j]).sum();
        if i % 5 == 0 {
            lp.add_eq(row, at);
        } else {
            lp.add_le(row, at + rng.gen_range(0.0..5.0));
        }
    }
    lp
}

/// Shifts `x = lower + y` and turns the upper bounds into rows.
fn reference_value(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut eq = Vec::new();
    let mut push = |row: &[(usize, f64)], rhs: f64, is_eq: bool| {
        let mut dense = vec![0.0; n];
        let mut r = rhs;
        for &(j, v) in row {
            dense[j] += v;
            r -= v * lp.lower[j];
        }
        a.push(dense);
        b.push(r);
        eq.push(is_eq);
    };
    for (row, &r) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
        push(row, r, true);
    }
    for (row, &r) in lp.in_rows.iter().zip(&lp.in_rhs) {
        push(row, r, false);
    }
    for j in 0..n {
        push(&[(j, 1.0)], lp.upper[j], false);
    }
    let shift: f64 = (0..n).map(|j| lp.objective[j] * lp.lower[j]).sum();
    tableau_min(&lp.objective, &a, &b, &eq).map(|v| v + shift)
}

#[test]
fn random_programs_match_tableau_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..100 {
        let lp = instance(&mut rng);
        let want = reference_value(&lp).expect("feasible by construction");
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "instance {k}");
        assert!(
            (sol.objective - want).abs() <= 1e-7 * want.abs().max(1.0),
            "instance {k}: {} vs {want}",
            sol.objective
        );
    }
}

/// Round-off sized coefficients next to unit ones must not steer scaling
/// or make a warm start report a false infeasibility.
#[test]
fn negligible_coefficients_keep_warm_starts_honest() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..30 {
        let mut lp = instance(&mut rng);
        for row in lp.in_rows.iter_mut().chain(lp.eq_rows.iter_mut()) {
            for (_, v) in row.iter_mut() {
                if rng.gen_bool(0.3) {
                    *v *= 1e-16;
                }
            }
        }
        let mut warm = SimplexSolver::new(&lp).unwrap();
        warm.solve().unwrap();
        for _ in 0..5 {
            let j = rng.gen_range(0..lp.num_vars());
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            let v = rng.gen_range(lo..=hi);
            lp.set_bounds(j, v, v);
            warm.set_bounds(j, v, v);
            let a = warm.solve().unwrap();
            let b = solve_lp(&lp).unwrap();
            assert_eq!(a.status, b.status);
            if b.status == LpStatus::Optimal {
                assert!((a.objective - b.objective).abs() <= 1e-7 * b.objective.abs().max(1.0));
            }
        }
    }
}
