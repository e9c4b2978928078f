//! Central finite differences, the reference implementation gradients are
//! checked against. Knows nothing about networks: differentiates any
//! scalar function of a flat vector.

/// d f / d x_i by symmetric differences with the given step.
pub fn gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let plus = f(&probe);
        probe[i] = orig - step;
        let minus = f(&probe);
        probe[i] = orig;
        out.push((plus - minus) / (2.0 * step));
    }
    out
}

/// Largest elementwise relative error between two gradient vectors, with
/// a floor so near-zero entries compare absolutely.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient lengths differ");
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_a_quadratic_exactly_enough() {
        let g = gradient(|v| v[0] * v[0] + 3.0 * v[1], &[2.0, 5.0], 1e-5);
        assert!((g[0] - 4.0).abs() < 1e-9);
        assert!((g[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn relative_error_uses_the_floor_near_zero() {
        assert!(max_rel_error(&[0.0], &[1e-9], 1e-6) < 1e-2);
        assert!(max_rel_error(&[1.0], &[1.1], 1e-6) > 0.05);
    }
}
