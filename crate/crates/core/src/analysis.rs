//! Geometry on a finished region: polygon vertices and the shortest move
//! from the forecast to the boundary.

use serde::Serialize;

use crate::error::{DrrError, Result};
use crate::polytope::{dot, Polytope};

/// Vertices of a region of dimension one or two. In 1-D the two end points
/// in ascending order; in 2-D counterclockwise about the centroid, starting
/// from the vertex with the smallest angle.
pub fn vertices_2d(w: &Polytope) -> Result<Vec<Vec<f64>>> {
    let scale = w.f.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let tol = 1e-8 * scale;
    match w.dim {
        1 => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (h, &f) in w.h.iter().zip(&w.f) {
                if h[0] > 0.0 {
                    hi = hi.min(f / h[0]);
                } else if h[0] < 0.0 {
                    lo = lo.max(f / h[0]);
                } else if f < -tol {
                    return Err(DrrError::EmptyRegion);
                }
            }
            if !(lo.is_finite() && hi.is_finite()) || lo > hi + tol {
                return Err(DrrError::EmptyRegion);
            }
            if (hi - lo).abs() <= tol {
                return Ok(vec![vec![lo]]);
            }
            Ok(vec![vec![lo], vec![hi]])
        }
        2 => {
            let mut pts: Vec<Vec<f64>> = Vec::new();
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    let (a, b) = (&w.h[i], &w.h[j]);
                    let det = a[0] * b[1] - a[1] * b[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (w.f[i] * b[1] - a[1] * w.f[j]) / det;
                    let y = (a[0] * w.f[j] - w.f[i] * b[0]) / det;
                    let p = vec![x, y];
                    if w.contains(&p, tol)
                        && !pts
                            .iter()
                            .any(|q| (q[0] - x).abs() <= tol && (q[1] - y).abs() <= tol)
                    {
                        pts.push(p);
                    }
                }
            }
            if pts.is_empty() {
                return Err(DrrError::EmptyRegion);
            }
            let n = pts.len() as f64;
            let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
            let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
            pts.sort_by(|p, q| {
                let ap = (p[1] - cy).atan2(p[0] - cx);
                let aq = (q[1] - cy).atan2(q[0] - cx);
                ap.total_cmp(&aq)
            });
            Ok(pts)
        }
        d => Err(DrrError::DimensionTooHigh(d)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampEvent {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub distance: f64,
    pub facet: usize,
    /// The forecast is not strictly inside the region.
    pub degenerate: bool,
}

/// Nearest boundary point to `w_bar`. Units follow the region. Ties go to
/// the lowest facet index.
pub fn high_risk_event(w: &Polytope, w_bar: &[f64]) -> Result<RampEvent> {
    if w.is_empty() || !w.is_feasible()? {
        return Err(DrrError::EmptyRegion);
    }
    if w_bar.len() != w.dim {
        return Err(DrrError::DimensionMismatch(format!(
            "w_bar has {} entries, region {}",
            w_bar.len(),
            w.dim
        )));
    }
    let scale = w.f.iter().chain(w_bar).fold(1.0_f64, |a, v| a.max(v.abs()));
    let inside = w.violation(w_bar) < -1e-12 * scale;
    if !inside {
        // on or outside the boundary: report the nearest region point
        let to = if w.contains(w_bar, 1e-12 * scale) {
            w_bar.to_vec()
        } else {
            dykstra(w, None, w_bar)
        };
        let facet = closest_facet(w, &to);
        return Ok(RampEvent {
            from: w_bar.to_vec(),
            to,
            distance: 0.0,
            facet,
            degenerate: true,
        });
    }
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for i in 0..w.len() {
        let p = project_on_facet(w, i, w_bar, scale)?;
        let d = dist(&p, w_bar);
        if best
            .as_ref()
            .map_or(true, |(bd, _, _)| d < *bd - 1e-12 * scale)
        {
            best = Some((d, i, p));
        }
    }
    let (distance, facet, to) = best.ok_or(DrrError::EmptyRegion)?;
    Ok(RampEvent {
        from: w_bar.to_vec(),
        to,
        distance,
        facet,
        degenerate: false,
    })
}

/// Nearest point of facet `i` to `x`: the hyperplane projection when it is
/// inside the region, the clamped edge point in 2-D, alternating
/// projections otherwise.
fn project_on_facet(w: &Polytope, i: usize, x: &[f64], scale: f64) -> Result<Vec<f64>> {
    let h = &w.h[i];
    let hh = dot(h, h);
    let step = (dot(h, x) - w.f[i]) / hh;
    let p: Vec<f64> = x.iter().zip(h).map(|(a, b)| a - step * b).collect();
    if w.contains(&p, 1e-10 * scale) {
        return Ok(p);
    }
    if w.dim <= 2 {
        // the facet is a segment (or point); clamp along it
        let along = if w.dim == 2 {
            vec![h[1], -h[0]]
        } else {
            vec![1.0]
        };
        let (a, b) = w.facet_extremes(i, &along)?;
        let ab: Vec<f64> = b.iter().zip(&a).map(|(u, v)| u - v).collect();
        let len2 = dot(&ab, &ab);
        let t = if len2 > 0.0 {
            let ax: Vec<f64> = x.iter().zip(&a).map(|(u, v)| u - v).collect();
            (dot(&ax, &ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        return Ok(a.iter().zip(&ab).map(|(u, v)| u + t * v).collect());
    }
    Ok(dykstra(w, Some(i), x))
}

/// Dykstra's alternating projections onto the halfspaces of `w`, with facet
/// `pin` (if any) treated as an equality.
fn dykstra(w: &Polytope, pin: Option<usize>, x: &[f64]) -> Vec<f64> {
    let m = w.len();
    let mut y = x.to_vec();
    let mut inc = vec![vec![0.0; w.dim]; m];
    for _ in 0..20_000 {
        let prev = y.clone();
        for j in 0..m {
            let z: Vec<f64> = y.iter().zip(&inc[j]).map(|(a, b)| a + b).collect();
            let h = &w.h[j];
            let r = dot(h, &z) - w.f[j];
            let step = if Some(j) == pin || r > 0.0 {
                r / dot(h, h)
            } else {
                0.0
            };
            let p: Vec<f64> = z.iter().zip(h).map(|(a, b)| a - step * b).collect();
            inc[j] = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            y = p;
        }
        if dist(&y, &prev) < 1e-13 {
            break;
        }
    }
    y
}

fn closest_facet(w: &Polytope, p: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for i in 0..w.len() {
        let gap = (w.f[i] - dot(&w.h[i], p)).abs();
        if gap < best.0 {
            best = (gap, i);
        }
    }
    best.1
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_vertices_ccw() {
        let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let v = vertices_2d(&p).unwrap();
        assert_eq!(
            v,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0]
            ]
        );
    }

    #[test]
    fn interval_vertices() {
        let p = Polytope::from_box(&[45.0], &[65.0]);
        assert_eq!(vertices_2d(&p).unwrap(), vec![vec![45.0], vec![65.0]]);
    }

    #[test]
    fn three_dims_rejected() {
        let p = Polytope::from_box(&[0.0; 3], &[1.0; 3]);
        assert!(matches!(
            vertices_2d(&p),
            Err(DrrError::DimensionTooHigh(3))
        ));
    }

    #[test]
    fn interval_event() {
        let p = Polytope::from_box(&[45.0], &[65.0]);
        let e = high_risk_event(&p, &[50.0]).unwrap();
        assert_eq!(e.to, vec![45.0]);
        assert!((e.distance - 5.0).abs() < 1e-12);
        assert!(!e.degenerate);
    }

    #[test]
    fn square_centre_tie_takes_first_facet() {
        let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let e = high_risk_event(&p, &[0.5, 0.5]).unwrap();
        assert_eq!(e.facet, 0);
        assert!((e.distance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outside_forecast_is_flagged() {
        let p = Polytope::from_box(&[0.0], &[1.0]);
        let e = high_risk_event(&p, &[2.0]).unwrap();
        assert!(e.degenerate);
        assert!((e.to[0] - 1.0).abs() < 1e-9);
    }
}
