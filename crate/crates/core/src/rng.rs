//! Deterministic, splittable random streams.
//!
//! The generator is SplitMix64: state advances by the 64-bit golden-gamma
//! constant `0x9E3779B97F4A7C15` and each output is the finalizer
//!
//! ```text
//! z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27;  z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! Output `i` of a stream seeded with `s` is therefore
//! `mix(s + (i+1)*0x9E3779B97F4A7C15)` — a pure function of `(s, i)`, so the
//! same seed reproduces the same stream on any platform or language.
//! Independent substreams are derived by [`SplitMix64::split`], never by
//! sharing generator state.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed, spare_normal: None }
    }

    /// Derive the seed of an independent child stream.
    ///
    /// `split(s, i) = mix(s ^ mix(i ^ GAMMA))`, so children of distinct
    /// indices (and of distinct parents) are decorrelated by the finalizer.
    pub fn split(&self, stream: u64) -> Self {
        SplitMix64::new(mix(self.state ^ mix(stream ^ GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`.
    fn next_open_f64(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Poisson draw by Knuth's product-of-uniforms, chunked so the
    /// `exp(-mean)` threshold never underflows.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(mean >= 0.0 && mean.is_finite(), "poisson mean must be finite and nonnegative");
        let mut total = 0u64;
        let mut rest = mean;
        while rest > 500.0 {
            total += self.poisson_small(500.0);
            rest -= 500.0;
        }
        total + self.poisson_small(rest)
    }

    fn poisson_small(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let threshold = (-mean).exp();
        let mut k = 0u64;
        let mut prod = 1.0;
        loop {
            prod *= self.next_open_f64();
            if prod <= threshold {
                return k;
            }
            k += 1;
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        assert!((0.0..=1.0).contains(&p), "binomial p must lie in [0,1]");
        (0..n).filter(|_| self.bernoulli(p)).count() as u64
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_open_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shapes below one are
    /// boosted through Gamma(shape+1) * U^(1/shape).
    pub fn gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            let boost = self.gamma(shape + 1.0);
            let u = self.next_open_f64();
            return boost * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let v = (1.0 + c * x).powi(3);
            if v <= 0.0 {
                continue;
            }
            let u = self.next_open_f64();
            if u < 1.0 - 0.0331 * x.powi(4) {
                return d * v;
            }
            if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Dirichlet on the 3-simplex from independent gammas.
    pub fn dirichlet3(&mut self, alpha: [f64; 3]) -> [f64; 3] {
        let g = [self.gamma(alpha[0]), self.gamma(alpha[1]), self.gamma(alpha[2])];
        let s = g[0] + g[1] + g[2];
        [g[0] / s, g[1] / s, g[2] / s]
    }

    /// Inversion draw from a pmf given as `pmf(k)`; walks the CDF from k = 0.
    /// `cap` bounds the walk; the residual tail mass (below the caller's
    /// truncation tolerance) is assigned to `cap`.
    pub fn from_pmf(&mut self, pmf: impl Fn(u64) -> f64, cap: u64) -> u64 {
        let u = self.next_f64();
        let mut acc = 0.0;
        for k in 0..cap {
            acc += pmf(k);
            if u < acc {
                return k;
            }
        }
        cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn split_streams_differ_from_parent_and_each_other() {
        let root = SplitMix64::new(7);
        let mut c0 = root.split(0);
        let mut c1 = root.split(1);
        let mut p = root.clone();
        let (x0, x1, xp) = (c0.next_u64(), c1.next_u64(), p.next_u64());
        assert_ne!(x0, x1);
        assert_ne!(x0, xp);
    }

    #[test]
    fn poisson_mean_is_close() {
        let mut rng = SplitMix64::new(1);
        let n = 20_000;
        let mean = 3.7;
        let total: u64 = (0..n).map(|_| rng.poisson(mean)).sum();
        let avg = total as f64 / n as f64;
        assert!((avg - mean).abs() < 0.05, "poisson sample mean {avg}");
    }

    #[test]
    fn poisson_large_mean_does_not_hang() {
        let mut rng = SplitMix64::new(2);
        let x = rng.poisson(2000.0);
        assert!((1500..2500).contains(&(x as i64)), "poisson(2000) gave {x}");
    }

    #[test]
    fn gamma_half_matches_moments() {
        let mut rng = SplitMix64::new(3);
        let n = 40_000;
        let total: f64 = (0..n).map(|_| rng.gamma(0.5)).sum();
        assert!((total / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn dirichlet_draws_stay_on_simplex() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..1000 {
            let d = rng.dirichlet3([0.5, 0.5, 0.5]);
            assert!(d.iter().all(|&x| x > 0.0));
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
