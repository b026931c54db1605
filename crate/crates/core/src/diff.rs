//! Finite-difference weights on arbitrary node sets (Fornberg's recursion).

/// Weights `w[m][j]` such that `f^(m)(z) ~ sum_j w[m][j] f(x_j)` for
/// `m = 0..=max_order`.
pub fn fornberg_weights(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Five-node stencil around `i`, shifted inward at the ends.
pub fn stencil(i: usize, len: usize) -> std::ops::Range<usize> {
    let start = i.saturating_sub(2).min(len.saturating_sub(5));
    start..(start + 5).min(len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_polynomial_derivatives_on_uneven_nodes() {
        let xs = [0.0, 0.13, 0.3, 0.52, 0.7];
        let f = |x: f64| 1.0 + 2.0 * x - x * x * x + 0.5 * x.powi(4);
        let z = 0.3;
        let w = fornberg_weights(z, &xs, 2);
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        assert!((d1 - (2.0 - 3.0 * z * z + 2.0 * z.powi(3))).abs() < 1e-11);
        assert!((d2 - (-6.0 * z + 6.0 * z * z)).abs() < 1e-10);
    }
}
