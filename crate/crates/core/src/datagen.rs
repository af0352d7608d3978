//! Deterministic quantile-grid fixtures.
//!
//! A grid of size `N` holds `F⁻¹(i / (N + 1))` for `i = 1..=N`, shuffled by a
//! seeded Fisher–Yates pass. For the normal target the grid is mapped onto
//! `[0, 1]` by `x ↦ (x + δ) / (2δ)` with `δ = Φ⁻¹(N / (N + 1))`.
//!
//! Randomness comes from SplitMix64:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! with wrapping 64-bit arithmetic. Uniform draws on `(0, 1)` are
//! `((next >> 11) + 0.5) · 2⁻⁵³`; index draws below `m` take the high word of
//! `next · m`. The shuffle walks `i = N-1` down to `1` and swaps `i` with a draw
//! below `i + 1`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{check_probability, Result};

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Index in `0..m`; `m` must be positive.
    pub fn below(&mut self, m: u64) -> u64 {
        debug_assert!(m > 0);
        ((self.next_u64() as u128 * m as u128) >> 64) as u64
    }

    /// Standard normal pair by Box–Muller.
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let r = libm::sqrt(-2.0 * libm::log(self.next_open01()));
        let (s, c) = libm::sincos(2.0 * PI * self.next_open01());
        (r * c, r * s)
    }
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distribution {
    #[default]
    Uniform,
    /// standard normal rescaled onto `[0, 1]`
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
    pub distribution: Distribution,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(n: usize, distribution: Distribution, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(crate::Error::config("grid size must be at least 1"));
        }
        Ok(Self { n, distribution, seed })
    }
}

/// Sorted, unshuffled grid values.
pub fn grid_values(n: usize, distribution: Distribution) -> Vec<f64> {
    let denom = (n + 1) as f64;
    match distribution {
        Distribution::Uniform => (1..=n).map(|i| i as f64 / denom).collect(),
        Distribution::Normal => {
            // lower half computed directly, upper half by exact negation
            let z = |i: usize| {
                if 2 * i <= n + 1 {
                    lower_inverse_normal(i as f64 / denom)
                } else {
                    -lower_inverse_normal((n + 1 - i) as f64 / denom)
                }
            };
            let delta = z(n);
            if delta == 0.0 {
                return alloc::vec![0.5; n];
            }
            (1..=n)
                .map(|i| ((z(i) + delta) / (2.0 * delta)).clamp(0.0, 1.0))
                .collect()
        }
    }
}

/// Shuffled grid.
pub fn generate(spec: &GridSpec) -> Vec<f64> {
    generate_with(spec, &mut SplitMix64::new(spec.seed))
}

fn generate_with(spec: &GridSpec, rng: &mut SplitMix64) -> Vec<f64> {
    let mut values = grid_values(spec.n, spec.distribution);
    shuffle(&mut values, rng);
    values
}

/// Regression mean function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanFunction {
    /// `2x`
    Linear,
    /// `sin(2πx)`
    Sine,
}

impl MeanFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Linear => 2.0 * x,
            Self::Sine => libm::sin(2.0 * PI * x),
        }
    }
}

/// Pairs `(x_i, μ(x_i) + noise_sd · z_i)` over a shuffled grid.
///
/// The normal draws continue the generator stream used by the shuffle.
pub fn generate_regression(spec: &GridSpec, mu: MeanFunction, noise_sd: f64) -> Result<Vec<(f64, f64)>> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(crate::Error::config(alloc::format!("noise sd must be finite and nonnegative, got {noise_sd}")));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let xs = generate_with(spec, &mut rng);
    let mut out = Vec::with_capacity(xs.len());
    let mut spare = None;
    for x in xs {
        let y = mu.eval(x);
        let y = if noise_sd == 0.0 {
            y
        } else {
            let z = match spare.take() {
                Some(z) => z,
                None => {
                    let (a, b) = rng.next_normal_pair();
                    spare = Some(b);
                    a
                }
            };
            y + noise_sd * z
        };
        out.push((x, y));
    }
    Ok(out)
}

/// Complementary error function.
///
/// Power series of `e^{t²} erf(t)` below 1, continued fraction above, odd
/// reflection for negative arguments.
pub fn erfc(t: f64) -> f64 {
    if t.is_nan() {
        return t;
    }
    if t < 0.0 {
        return 2.0 - erfc(-t);
    }
    if t < 1.0 {
        1.0 - erf_series(t)
    } else {
        erfc_continued_fraction(t)
    }
}

fn erf_series(t: f64) -> f64 {
    // erf(t) = 2/√π e^{-t²} Σ (2t²)^n t / (1·3·…·(2n+1))
    let two_t2 = 2.0 * t * t;
    let mut term = t;
    let mut sum = t;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= two_t2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    2.0 / libm::sqrt(PI) * libm::exp(-t * t) * sum
}

fn erfc_continued_fraction(t: f64) -> f64 {
    // erfc(t) = e^{-t²}/√π · 1/(t + (1/2)/(t + 1/(t + (3/2)/(t + …)))), modified Lentz
    const TINY: f64 = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = t + a * d;
        d = if d == 0.0 { TINY } else { d };
        c = t + a / c;
        c = if c == 0.0 { TINY } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    libm::exp(-t * t) / libm::sqrt(PI) / f
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile function on `(0, 1)`.
///
/// Acklam's rational approximation followed by one Newton step against
/// [`normal_cdf`]. Upper-tail values are exact negations of the lower tail.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(if p > 0.5 { -lower_inverse_normal(1.0 - p) } else { lower_inverse_normal(p) })
}

fn lower_inverse_normal(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let x = acklam(p);
    let density = libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI);
    x - (normal_cdf(x) - p) / density
}

#[allow(clippy::excessive_precision)]
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn splitmix_reference_stream() {
        // first outputs for seed 1234567
        let mut rng = SplitMix64::new(1_234_567);
        assert_eq!(rng.next_u64(), 6_457_827_717_110_365_317);
        assert_eq!(rng.next_u64(), 3_203_168_211_198_807_973);
    }

    #[test]
    fn open_unit_draws() {
        let mut rng = SplitMix64::new(0);
        for _ in 0..10_000 {
            let u = rng.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn small_uniform_grid() {
        assert_eq!(grid_values(3, Distribution::Uniform), vec![0.25, 0.5, 0.75]);
        let mut g = generate(&GridSpec::new(3, Distribution::Uniform, 9).unwrap());
        g.sort_by(f64::total_cmp);
        assert_eq!(g, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn normal_grid_endpoints() {
        for n in [2, 3, 10, 1001] {
            let g = grid_values(n, Distribution::Normal);
            assert_eq!(g[0], 0.0);
            assert_eq!(g[n - 1], 1.0);
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(grid_values(1, Distribution::Normal), vec![0.5]);
        assert_eq!(grid_values(3, Distribution::Normal)[1], 0.5);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(GridSpec::new(0, Distribution::Uniform, 1).is_err());
    }

    #[test]
    fn same_seed_same_sequence() {
        let spec = GridSpec::new(500, Distribution::Normal, 42).unwrap();
        assert_eq!(generate(&spec), generate(&spec));
        let other = GridSpec { seed: 43, ..spec };
        assert_ne!(generate(&spec), generate(&other));
    }

    #[test]
    fn inverse_normal_reference_values() {
        assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(inverse_normal_cdf(0.975).unwrap(), 1.959_963_984_540_054_2, epsilon = 1e-9);
        assert_abs_diff_eq!(inverse_normal_cdf(0.1).unwrap(), -1.281_551_565_544_600_4, epsilon = 1e-9);
        assert_abs_diff_eq!(inverse_normal_cdf(1e-6).unwrap(), -4.753_424_308_822_899, epsilon = 1e-9);
        assert!(inverse_normal_cdf(0.0).is_err());
        assert!(inverse_normal_cdf(1.0).is_err());
    }

    #[test]
    fn erfc_reference_values() {
        // mpmath, 30 digits
        assert_abs_diff_eq!(erfc(0.5), 0.479_500_122_186_953_5, epsilon = 1e-15);
        assert_abs_diff_eq!(erfc(2.0), 0.004_677_734_981_047_266, epsilon = 1e-16);
        assert!((erfc(4.0) / 1.541_725_790_028_002e-8 - 1.0).abs() < 1e-13);
        assert_abs_diff_eq!(erfc(-1.0), 1.842_700_792_949_715, epsilon = 1e-15);
        assert_eq!(erfc(0.0), 1.0);
    }

    #[test]
    fn linear_noise_free() {
        let spec = GridSpec::new(1000, Distribution::Uniform, 3).unwrap();
        for (x, y) in generate_regression(&spec, MeanFunction::Linear, 0.0).unwrap() {
            assert_eq!(y, 2.0 * x);
        }
    }

    #[test]
    fn noise_scale() {
        let spec = GridSpec::new(10_000, Distribution::Uniform, 11).unwrap();
        let pairs = generate_regression(&spec, MeanFunction::Sine, 0.1).unwrap();
        assert_eq!(pairs, generate_regression(&spec, MeanFunction::Sine, 0.1).unwrap());
        let res: Vec<f64> = pairs.iter().map(|&(x, y)| y - MeanFunction::Sine.eval(x)).collect();
        let m = res.iter().sum::<f64>() / res.len() as f64;
        let var = res.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / (res.len() - 1) as f64;
        assert!((libm::sqrt(var) - 0.1).abs() <= 0.005);
    }

    proptest! {
        #[test]
        fn inverse_normal_is_odd(p in 1e-12f64..0.5) {
            let q = 1.0 - p;
            prop_assert_eq!(inverse_normal_cdf(q).unwrap(), -inverse_normal_cdf(1.0 - q).unwrap());
        }

        #[test]
        fn inverse_normal_round_trip(p in 1e-10f64..0.9999) {
            let x = inverse_normal_cdf(p).unwrap();
            prop_assert!((normal_cdf(x) - p).abs() <= 1e-14 + 1e-12 * p);
        }

        #[test]
        fn shuffle_is_permutation(n in 1usize..300, seed in any::<u64>(), normal in any::<bool>()) {
            let d = if normal { Distribution::Normal } else { Distribution::Uniform };
            let mut g = generate(&GridSpec::new(n, d, seed).unwrap());
            prop_assert!(g.iter().all(|v| (0.0..=1.0).contains(v)));
            g.sort_by(f64::total_cmp);
            prop_assert_eq!(g, grid_values(n, d));
        }
    }
}
