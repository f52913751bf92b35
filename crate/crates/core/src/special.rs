//! Beta-distribution helpers: closed-form moments, CDF-based segment
//! expectations and densities.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

/// Query points for densities are pulled this far inside `(0, 1)`.
pub const DENSITY_EDGE: f64 = 1e-9;

/// `E[X^m]` for `X ~ Beta(a, b)` as the ratio
/// `Γ(a+b)Γ(a+m) / (Γ(a+b+m)Γ(a))`, evaluated in log space.
pub fn beta_moment(a: f64, b: f64, m: u32) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let m = f64::from(m);
    (ln_gamma(a + b) + ln_gamma(a + m) - ln_gamma(a + b + m) - ln_gamma(a)).exp()
}

/// Moment of a uniform variable, `1 / (m + 1)`.
pub fn uniform_moment(m: u32) -> f64 {
    1.0 / (f64::from(m) + 1.0)
}

/// Regularised incomplete beta `I_x(a, b)`, i.e. the Beta(a, b) CDF.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta_reg(a, b, x)
    }
}

pub fn beta_ln_pdf(a: f64, b: f64, x: f64) -> f64 {
    let x = x.clamp(DENSITY_EDGE, 1.0 - DENSITY_EDGE);
    (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
}

pub fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    beta_ln_pdf(a, b, x).exp()
}

/// `E[1{lo < X <= hi}]` and `E[X·1{lo < X <= hi}]` under Beta(a, b).
pub fn beta_segment_moments(a: f64, b: f64, lo: f64, hi: f64) -> (f64, f64) {
    let p = beta_cdf(a, b, hi) - beta_cdf(a, b, lo);
    let mean = a / (a + b);
    let first = mean * (beta_cdf(a + 1.0, b, hi) - beta_cdf(a + 1.0, b, lo));
    (p, first)
}

pub fn gaussian_pdf(mean: f64, variance: f64, x: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_moments() {
        assert!((beta_moment(1.0, 1.0, 1) - 0.5).abs() < 1e-14);
        assert!((beta_moment(1.0, 1.0, 2) - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(beta_moment(3.0, 4.0, 0), 1.0);
    }

    #[test]
    fn moment_matches_rising_factorial_ratio() {
        for &(a, b) in &[(0.2, 0.9), (2.0, 5.0), (350.0, 12.5)] {
            for m in 1..6u32 {
                let direct: f64 = (0..m).map(|k| (a + k as f64) / (a + b + k as f64)).product();
                let got = beta_moment(a, b, m);
                assert!((got - direct).abs() < 1e-11 * direct.max(1e-300), "{a} {b} {m}");
            }
        }
    }

    #[test]
    fn segment_moments_cover_unit_interval() {
        let (p, first) = beta_segment_moments(2.0, 3.0, 0.0, 1.0);
        assert!((p - 1.0).abs() < 1e-14);
        assert!((first - 0.4).abs() < 1e-14);
    }

    #[test]
    fn gaussian_peak() {
        let peak = gaussian_pdf(0.5, 0.01, 0.5);
        assert!((peak - 1.0 / (2.0 * std::f64::consts::PI * 0.01).sqrt()).abs() < 1e-12);
    }
}
