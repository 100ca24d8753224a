use std::f64::consts::PI;

/// Wallis factor `ω_k`: the mean of `|z₁|` for `z` uniform on the unit
/// sphere in `R^k`.
///
/// With `approx` set, or for `k > 64`, the asymptotic form
/// `sqrt(2 / (π (k - 1/2)))` is returned instead of the exact product.
pub fn wallis(k: usize, approx: bool) -> f64 {
    assert!(k >= 1, "wallis factor needs k >= 1");
    if approx || k > 64 {
        return (2.0 / (PI * (k as f64 - 0.5))).sqrt();
    }
    match k {
        1 => 1.0,
        2 => 2.0 / PI,
        _ if k % 2 == 1 => (1..=(k - 2) / 2).fold(1.0, |w, j| w * (2 * j - 1) as f64 / (2 * j) as f64) * (k - 2) as f64
            / (k - 1) as f64,
        _ => (1..(k - 2) / 2).fold(2.0 / PI, |w, j| w * (2 * j) as f64 / (2 * j + 1) as f64) * (k - 2) as f64
            / (k - 1) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd_product(k: usize) -> f64 {
        let num: f64 = (1..=k - 2).step_by(2).map(|v| v as f64).product();
        let den: f64 = (2..=k - 1).step_by(2).map(|v| v as f64).product();
        num / den
    }

    fn even_product(k: usize) -> f64 {
        let num: f64 = (2..=k - 2).step_by(2).map(|v| v as f64).product();
        let den: f64 = (3..=k - 1).step_by(2).map(|v| v as f64).product();
        2.0 / PI * num / den
    }

    #[test]
    fn small_values() {
        assert_eq!(wallis(1, false), 1.0);
        assert!((wallis(2, false) - 2.0 / PI).abs() < 1e-15);
        assert!((wallis(3, false) - 0.5).abs() < 1e-15);
        assert!((wallis(4, false) - 4.0 / (3.0 * PI)).abs() < 1e-15);
        let a3 = wallis(3, true);
        assert!((a3 - (2.0 / (PI * 2.5)).sqrt()).abs() < 1e-15);
        assert!((a3 - 0.5).abs() / 0.5 < 1e-2);
    }

    #[test]
    fn exact_matches_products_and_approximation() {
        for k in 3..=64 {
            let p = if k % 2 == 1 { odd_product(k) } else { even_product(k) };
            let w = wallis(k, false);
            assert!((w - p).abs() <= 1e-14 * p, "k = {k}");
            assert!((w - wallis(k, true)).abs() / w < 0.01, "k = {k}");
        }
    }

    #[test]
    fn mean_of_first_coordinate() {
        use crate::linalg::unit_sphere;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let k = 7;
        let mean = (0..40_000).map(|_| unit_sphere(&mut rng, k)[0].abs()).sum::<f64>() / 40_000.0;
        assert!((mean - wallis(k, false)).abs() < 5e-3);
    }
}
