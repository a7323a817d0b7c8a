use serde::Serialize;

/// Least-squares solution with the columns that were kept and dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeastSquares {
    /// Indices into the input columns, in input order.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// One coefficient per kept column.
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// `(X'X)⁻¹` over the kept columns, row-major `k × k`.
    pub xtx_inv: Vec<f64>,
}

/// Columns whose component orthogonal to the earlier kept columns is below
/// this fraction of their own norm are treated as collinear.
pub const RANK_TOLERANCE: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Stores `u` (unit) for `H = I − 2uuᵀ`, acting on rows `offset..`.
struct Reflector {
    offset: usize,
    u: Vec<f64>,
}

impl Reflector {
    fn apply(&self, v: &mut [f64]) {
        let tail = &mut v[self.offset..];
        let s = 2.0 * dot(&self.u, tail);
        for (t, u) in tail.iter_mut().zip(&self.u) {
            *t -= s * u;
        }
    }
}

/// Householder QR least squares that walks the columns in order and drops any
/// column that is (numerically) spanned by the columns already kept.
///
/// `columns` are the regressors, each of length `y.len()`.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> LeastSquares {
    let n = y.len();
    let mut reflectors: Vec<Reflector> = Vec::new();
    // Column j of R, top `j + 1` entries.
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();

    for (j, col) in columns.iter().enumerate() {
        debug_assert_eq!(col.len(), n);
        let original = norm(col);
        let rank = reflectors.len();
        if original == 0.0 || !original.is_finite() || rank >= n {
            dropped.push(j);
            continue;
        }
        let mut v = col.clone();
        for h in &reflectors {
            h.apply(&mut v);
        }
        let below = norm(&v[rank..]);
        if below <= RANK_TOLERANCE * original {
            dropped.push(j);
            continue;
        }
        let alpha = if v[rank] > 0.0 { -below } else { below };
        let mut u = v[rank..].to_vec();
        u[0] -= alpha;
        let u_norm = norm(&u);
        u.iter_mut().for_each(|x| *x /= u_norm);
        reflectors.push(Reflector { offset: rank, u });

        let mut r = v[..rank].to_vec();
        r.push(alpha);
        r_cols.push(r);
        kept.push(j);
    }

    let k = kept.len();
    let mut qty = y.to_vec();
    for h in &reflectors {
        h.apply(&mut qty);
    }

    // Back substitution R β = (Qᵀy)[..k].
    let r_at = |i: usize, j: usize| if i <= j { r_cols[j][i] } else { 0.0 };
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r_at(i, j) * beta[j]).sum();
        beta[i] = (qty[i] - s) / r_at(i, i);
    }

    let mut residuals = y.to_vec();
    for (b, &j) in beta.iter().zip(&kept) {
        for (res, x) in residuals.iter_mut().zip(&columns[j]) {
            *res -= b * x;
        }
    }
    let rss = dot(&residuals, &residuals);

    // R⁻¹ (upper triangular), then (XᵀX)⁻¹ = R⁻¹R⁻ᵀ.
    let mut r_inv = vec![0.0; k * k];
    for j in 0..k {
        r_inv[j * k + j] = 1.0 / r_at(j, j);
        for i in (0..j).rev() {
            let mut s = 0.0;
            for m in i + 1..=j {
                s += r_at(i, m) * r_inv[m * k + j];
            }
            r_inv[i * k + j] = -s / r_at(i, i);
        }
    }
    let mut xtx_inv = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let s: f64 = (b..k).map(|m| r_inv[a * k + m] * r_inv[b * k + m]).sum();
            xtx_inv[a * k + b] = s;
            xtx_inv[b * k + a] = s;
        }
    }

    LeastSquares {
        kept,
        dropped,
        beta,
        residuals,
        rss,
        xtx_inv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..5).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
        let ls = least_squares(&[vec![1.0; 5], x], &y);
        assert_eq!(ls.kept, [0, 1]);
        assert_abs_diff_eq!(ls.beta[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ls.beta[1], 2.0, epsilon = 1e-12);
        assert!(ls.rss < 1e-20);
    }

    #[test]
    fn duplicate_and_zero_columns_are_dropped_in_order() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b = vec![1.0, 0.0, 1.0, 5.0];
        let y = vec![1.0, 2.0, 2.0, 7.0];
        let ls = least_squares(&[a.clone(), vec![0.0; 4], b.clone(), a.clone()], &y);
        assert_eq!(ls.kept, [0, 2]);
        assert_eq!(ls.dropped, [1, 3]);
        let direct = least_squares(&[a, b], &y);
        assert_eq!(ls.beta, direct.beta);
    }

    #[test]
    fn inverse_matches_two_by_two() {
        // XᵀX = [[4, 10], [10, 30]] → inverse = [[1.5, -0.5], [-0.5, 0.2]]
        let ls = least_squares(
            &[vec![1.0; 4], vec![1.0, 2.0, 3.0, 4.0]],
            &[0.0, 1.0, 0.0, 1.0],
        );
        let expected = [1.5, -0.5, -0.5, 0.2];
        for (a, b) in ls.xtx_inv.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
}
