/// Diagonal row/column scale factors: the solver works on `R·M·S`.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

const PASSES: usize = 6;
/// Entries this far below the largest in their row or column do not
/// steer the scale factors.
const NEGLIGIBLE: f64 = 1e-9;

impl Scaling {
    /// Geometric-mean equilibration: alternately divide each row and column
    /// by `sqrt(min|a| · max|a|)` over its non-negligible entries. Factors are rounded to
    /// powers of two so scaling itself introduces no rounding error.
    pub fn equilibrate(mat: &[f64], m: usize, n: usize) -> Self {
        let mut row = vec![1.0; m];
        let mut col = vec![1.0; n];
        for _ in 0..PASSES {
            for i in 0..m {
                let hi = (0..n)
                    .map(|j| (mat[i * n + j] * row[i] * col[j]).abs())
                    .fold(0.0f64, f64::max);
                let lo = (0..n)
                    .map(|j| (mat[i * n + j] * row[i] * col[j]).abs())
                    .filter(|&a| a > hi * NEGLIGIBLE)
                    .fold(f64::INFINITY, f64::min);
                if hi > 0.0 {
                    row[i] *= pow2(1.0 / (lo * hi).sqrt());
                }
            }
            for j in 0..n {
                let hi = (0..m)
                    .map(|i| (mat[i * n + j] * row[i] * col[j]).abs())
                    .fold(0.0f64, f64::max);
                let lo = (0..m)
                    .map(|i| (mat[i * n + j] * row[i] * col[j]).abs())
                    .filter(|&a| a > hi * NEGLIGIBLE)
                    .fold(f64::INFINITY, f64::min);
                if hi > 0.0 {
                    col[j] *= pow2(1.0 / (lo * hi).sqrt());
                }
            }
        }
        Self { row, col }
    }

    pub fn apply_matrix(&self, mat: &mut [f64], m: usize, n: usize) {
        for i in 0..m {
            for j in 0..n {
                mat[i * n + j] *= self.row[i] * self.col[j];
            }
        }
    }
}

fn pow2(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    2f64.powi(v.log2().round() as i32)
}
