//! Numerically stable scalar helpers shared by the training code.

/// Logistic sigmoid, overflow-free over the whole f64 range.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(sigmoid(x)) computed branch-wise via log1p, so large negative inputs
/// degrade to x instead of -inf.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_at_zero_is_half() {
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn sigmoid_stable_at_extremes() {
        assert!(sigmoid(700.0).is_finite());
        assert!(sigmoid(-700.0).is_finite());
        assert!(sigmoid(700.0) <= 1.0);
        assert!(sigmoid(-700.0) >= 0.0);
        assert!((sigmoid(700.0) - 1.0).abs() < 1e-300);
    }

    #[test]
    fn log_sigmoid_matches_naive_in_safe_range() {
        for i in -100..=100 {
            let x = i as f64 * 0.2;
            let naive = (1.0 / (1.0 + (-x).exp())).ln();
            assert!(
                (log_sigmoid(x) - naive).abs() <= 1e-12 * naive.abs().max(1.0),
                "x={x}"
            );
        }
    }

    #[test]
    fn log_sigmoid_stable_at_extremes() {
        assert!((log_sigmoid(-700.0) + 700.0).abs() < 1e-9);
        assert!(log_sigmoid(700.0).abs() < 1e-300);
        assert!(log_sigmoid(-700.0).is_finite());
    }

    #[test]
    fn sigmoid_symmetry() {
        for i in 0..50 {
            let x = i as f64 * 0.37;
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }
}
