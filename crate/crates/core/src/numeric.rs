//! Shared numerical kernels: log-sum-exp, composite Simpson, golden section.

/// `log(sum(exp(x_i)))` with a single max subtraction; `-inf` entries drop out.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Composite Simpson weights for `n` (odd, >= 3) uniform nodes of spacing `h`:
/// `h/3 * [1, 4, 2, 4, ..., 2, 4, 1]`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3");
    let mut w = vec![2.0; n];
    w[0] = 1.0;
    w[n - 1] = 1.0;
    for x in w.iter_mut().skip(1).step_by(2) {
        *x = 4.0;
    }
    for x in w.iter_mut() {
        *x *= h / 3.0;
    }
    w
}

pub fn simpson_integral(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Golden-section minimization of `f` on `[a, b]` down to interval width `tol`.
/// Returns the midpoint of the final bracket.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let v = [-1000.0, -1000.0 + (2.0f64).ln()];
        assert!((log_sum_exp(&v) - (-1000.0 + (3.0f64).ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let n = 101;
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        let exact = 0.25 - 1.0 + 1.0;
        assert!((simpson_integral(&vals, h) - exact).abs() < 1e-14);
    }

    #[test]
    fn golden_finds_quadratic_minimum() {
        let x = golden_min(|t| (t - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }
}
