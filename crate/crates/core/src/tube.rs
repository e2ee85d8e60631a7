//! Warped-product metric `dr² + f(r)² dμ² + g(r)² dλ²` on a solid torus
//! whose boundary collar is a horoball cusp with meridian length `l`.
//!
//! With `r0 = -log(l/π)` and a cutoff `φ` equal to 1 on `r <= -2` and 0 on
//! `r >= -1`:
//!
//! ```text
//! f(r) = π (e^{r-r0} - φ(r) e^{r0-r})
//! g(r) = e^r + φ(r) e^{2 r0 - r}
//! ```
//!
//! Sectional curvatures at a point are convex combinations of
//! `-f''/f`, `-g''/g` and `-f'g'/(fg)`.
//!
//! All of `f, g` and their derivatives are evaluated through
//! `a = e^{r-r0}`, `b = e^{r0-r}` in the same algebraic shape, so that the
//! curvature quotients are exactly `-1` (to rounding) wherever `φ` is
//! constant, including next to the core where `f` is tiny.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible meridian length `e³π`.
pub fn min_meridian_length() -> f64 {
    3f64.exp() * PI
}

/// A cutoff function with its first two derivatives.
pub trait BumpFunction: Send + Sync {
    fn phi(&self, r: f64) -> f64;
    fn dphi(&self, r: f64) -> f64;
    fn ddphi(&self, r: f64) -> f64;
    fn name(&self) -> &'static str;
}

/// The two built-in cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardBump {
    /// `σ(-1-r) / (σ(-1-r) + σ(r+2))` with `σ(x) = e^{-1/x}` for `x > 0`; C^∞.
    Exponential,
    /// `1 - s(r+2)` with the quintic smoothstep `s(t) = 6t⁵ - 15t⁴ + 10t³`; C².
    Smoothstep,
}

impl StandardBump {
    pub const ALL: [StandardBump; 2] = [StandardBump::Exponential, StandardBump::Smoothstep];

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "exponential" | "exp" => Some(Self::Exponential),
            "smoothstep" | "quintic" => Some(Self::Smoothstep),
            _ => None,
        }
    }
}

// σ, σ', σ'' at x
fn sigma(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = (-1.0 / x).exp();
    let x2 = x * x;
    (s, s / x2, s * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

impl StandardBump {
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        if r <= -2.0 {
            return (1.0, 0.0, 0.0);
        }
        if r >= -1.0 {
            return (0.0, 0.0, 0.0);
        }
        match self {
            StandardBump::Exponential => {
                let (a, da, dda) = {
                    let (s, ds, dds) = sigma(-1.0 - r);
                    (s, -ds, dds)
                };
                let (b, db, ddb) = sigma(r + 2.0);
                let sum = a + b;
                let num = da * b - a * db;
                let dnum = dda * b - a * ddb;
                let dsum = da + db;
                let phi = a / sum;
                let dphi = num / (sum * sum);
                let ddphi = (dnum * sum - 2.0 * num * dsum) / (sum * sum * sum);
                (phi, dphi, ddphi)
            }
            StandardBump::Smoothstep => {
                let t = r + 2.0;
                let t2 = t * t;
                let s = t2 * t * (10.0 - 15.0 * t + 6.0 * t2);
                let ds = 30.0 * t2 * (1.0 - 2.0 * t + t2);
                let dds = 60.0 * t * (1.0 - 3.0 * t + 2.0 * t2);
                (1.0 - s, -ds, -dds)
            }
        }
    }
}

impl BumpFunction for StandardBump {
    fn phi(&self, r: f64) -> f64 {
        self.eval(r).0
    }
    fn dphi(&self, r: f64) -> f64 {
        self.eval(r).1
    }
    fn ddphi(&self, r: f64) -> f64 {
        self.eval(r).2
    }
    fn name(&self) -> &'static str {
        match self {
            StandardBump::Exponential => "exponential",
            StandardBump::Smoothstep => "smoothstep",
        }
    }
}

/// Values of `f, f', f'', g, g', g''` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValues {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
    pub g: f64,
    pub dg: f64,
    pub ddg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureTriple {
    pub k_ff: f64,
    pub k_gg: f64,
    pub k_fg: f64,
}

impl CurvatureTriple {
    /// `max |k + 1|` over the three quotients.
    pub fn max_deviation(&self) -> f64 {
        [self.k_ff, self.k_gg, self.k_fg]
            .iter()
            .fold(0.0, |m: f64, k| m.max((k + 1.0).abs()))
    }
}

#[derive(Debug, Clone)]
pub struct TubeMetric<B = StandardBump> {
    l: f64,
    r0: f64,
    bump: B,
}

/// Checks `l >= e³π` and sets `r0 = -log(l/π)`.
pub fn build_tube_metric<B: BumpFunction>(l: f64, bump: B) -> Result<TubeMetric<B>> {
    if !(l >= min_meridian_length()) {
        return Err(Error::MeridianTooShort(l));
    }
    let r0 = -(l / PI).ln();
    Ok(TubeMetric { l, r0, bump })
}

impl<B: BumpFunction> TubeMetric<B> {
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn bump(&self) -> &B {
        &self.bump
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if !(r >= self.r0 && r <= 0.0) {
            return Err(Error::OutsideTube {
                r,
                lo: self.r0,
                hi: 0.0,
            });
        }
        Ok(())
    }

    /// `f, g` and derivatives on `[r0, 0]`.
    pub fn warp(&self, r: f64) -> Result<WarpValues> {
        self.check_domain(r)?;
        Ok(self.warp_unchecked(r))
    }

    fn warp_unchecked(&self, r: f64) -> WarpValues {
        let a = (r - self.r0).exp();
        let b = (self.r0 - r).exp();
        let (p, dp, ddp) = (self.bump.phi(r), self.bump.dphi(r), self.bump.ddphi(r));
        let c = self.r0.exp();
        // f'' carries (φ'' - 2φ' + φ), g'' the same combination with a + sign
        let mix = ddp - 2.0 * dp + p;
        WarpValues {
            f: PI * (a - p * b),
            df: PI * (a + (p - dp) * b),
            ddf: PI * (a - mix * b),
            g: c * (a + p * b),
            dg: c * (a + (dp - p) * b),
            ddg: c * (a + mix * b),
        }
    }

    /// Length of the meridian circle at radius `r`, i.e. `f(r)`.
    pub fn meridian_length(&self, r: f64) -> Result<f64> {
        Ok(self.warp(r)?.f)
    }
}

/// The three curvature quotients at `r ∈ (r0, 0]`.
pub fn curvature_triple<B: BumpFunction>(m: &TubeMetric<B>, r: f64) -> Result<CurvatureTriple> {
    m.check_domain(r)?;
    if r == m.r0 {
        return Err(Error::OutsideTube { r, lo: m.r0, hi: 0.0 });
    }
    let w = m.warp_unchecked(r);
    Ok(CurvatureTriple {
        k_ff: -w.ddf / w.f,
        k_gg: -w.ddg / w.g,
        k_fg: -(w.df * w.dg) / (w.f * w.g),
    })
}

/// Deviations of `f, g` from their closed forms on the two collars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFormReport {
    /// `max |f - l e^r|` on `[-1, 0]`.
    pub cusp_f: f64,
    /// `max |g - e^r|` on `[-1, 0]`.
    pub cusp_g: f64,
    /// `max |f - 2π sinh(r - r0)|` on `[r0, -2]`.
    pub core_f: f64,
    /// `max |g - 2 e^{r0} cosh(r - r0)|` on `[r0, -2]`.
    pub core_g: f64,
    pub f_at_0: f64,
    pub g_at_0: f64,
    pub f_at_r0: f64,
    pub df_at_r0: f64,
}

impl BoundaryFormReport {
    pub fn max_deviation(&self) -> f64 {
        self.cusp_f.max(self.cusp_g).max(self.core_f).max(self.core_g)
    }
}

/// Compares `f, g` with the cusp and core closed forms at `samples` points on
/// each collar. Deviations are relative to the magnitude of the closed form
/// where it exceeds one.
pub fn boundary_form_check<B: BumpFunction>(m: &TubeMetric<B>, samples: usize) -> BoundaryFormReport {
    let samples = samples.max(2);
    let grid = |lo: f64, hi: f64| (0..samples).map(move |k| lo + (hi - lo) * k as f64 / (samples - 1) as f64);
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
    let (mut cusp_f, mut cusp_g, mut core_f, mut core_g) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for r in grid(-1.0, 0.0) {
        let w = m.warp_unchecked(r);
        cusp_f = cusp_f.max(rel(w.f, m.l * r.exp()));
        cusp_g = cusp_g.max(rel(w.g, r.exp()));
    }
    for r in grid(m.r0, -2.0) {
        let w = m.warp_unchecked(r);
        core_f = core_f.max(rel(w.f, 2.0 * PI * (r - m.r0).sinh()));
        core_g = core_g.max(rel(w.g, 2.0 * m.r0.exp() * (r - m.r0).cosh()));
    }
    let at0 = m.warp_unchecked(0.0);
    let at_core = m.warp_unchecked(m.r0);
    BoundaryFormReport {
        cusp_f,
        cusp_g,
        core_f,
        core_g,
        f_at_0: at0.f,
        g_at_0: at0.g,
        f_at_r0: at_core.f,
        df_at_r0: at_core.df,
    }
}

/// Default sample count and offset of the first sample from the core.
pub const DEFAULT_PINCHING_SAMPLES: usize = 100_000;
pub const CORE_OFFSET: f64 = 1e-6;
pub const MIN_PINCHING_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingReport {
    pub l: f64,
    pub r0: f64,
    pub bump: String,
    pub samples: usize,
    /// `l² · max |k + 1|` over the sampled radii and the three quotients.
    pub l_emp: f64,
    /// Closed-form constant evaluated over the samples in `[-2, -1]`.
    pub l_formula: f64,
    /// Radius where the empirical maximum occurs.
    pub argmax_r: f64,
    /// `max |k + 1|` on `(r0, -2] ∪ [-1, 0]`, where the metric is exactly hyperbolic.
    pub exact_region_deviation: f64,
}

impl PinchingReport {
    pub fn holds(&self) -> bool {
        self.l_emp <= self.l_formula + 1e-9 * self.l * self.l
    }
}

/// `max { π²e⁴ |φ'' - 2φ'| / (1 - e^{-2}), π⁴e⁸ |2φφ' - φ'²| / (1 - e^{-4}) }`
/// at a single `r`.
pub fn pinching_formula_term<B: BumpFunction>(bump: &B, r: f64) -> f64 {
    let (p, dp, ddp) = (bump.phi(r), bump.dphi(r), bump.ddphi(r));
    let e4 = 4f64.exp();
    let first = PI.powi(2) * e4 * (ddp - 2.0 * dp).abs() / (1.0 - (-2f64).exp());
    let second = PI.powi(4) * e4 * e4 * (2.0 * p * dp - dp * dp).abs() / (1.0 - (-4f64).exp());
    first.max(second)
}

// k-th of n uniform samples on [lo, hi], exact at both ends
fn lerp(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    let t = k as f64 / (n - 1) as f64;
    ((1.0 - t) * lo + t * hi).clamp(lo, hi)
}

/// Samples `samples` radii uniformly on `[lo, hi]`.
pub fn pinching_verify_on<B: BumpFunction>(
    m: &TubeMetric<B>,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<PinchingReport> {
    if samples < MIN_PINCHING_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_PINCHING_SAMPLES} samples, got {samples}"
        )));
    }
    if !(lo > m.r0 && hi <= 0.0 && lo < hi) {
        return Err(Error::OutsideTube {
            r: lo,
            lo: m.r0,
            hi: 0.0,
        });
    }
    let mut l_emp_dev = 0.0f64;
    let mut argmax_r = lo;
    let mut l_formula = 0.0f64;
    let mut exact_dev = 0.0f64;
    for k in 0..samples {
        let r = lerp(lo, hi, k, samples);
        let dev = curvature_triple(m, r)?.max_deviation();
        if dev > l_emp_dev {
            l_emp_dev = dev;
            argmax_r = r;
        }
        if (-2.0..=-1.0).contains(&r) {
            l_formula = l_formula.max(pinching_formula_term(&m.bump, r));
        }
        if r <= -2.0 || r >= -1.0 {
            exact_dev = exact_dev.max(dev);
        }
    }
    Ok(PinchingReport {
        l: m.l,
        r0: m.r0,
        bump: m.bump.name().to_string(),
        samples,
        l_emp: m.l * m.l * l_emp_dev,
        l_formula,
        argmax_r,
        exact_region_deviation: exact_dev,
    })
}

/// Pinching check over `(r0, 0]`, first sample offset by [`CORE_OFFSET`].
pub fn pinching_verify<B: BumpFunction>(m: &TubeMetric<B>, samples: usize) -> Result<PinchingReport> {
    pinching_verify_on(m, m.r0 + CORE_OFFSET, 0.0, samples)
}

/// `(r, k_ff, k_gg, k_fg)` rows on `(r0, 0]` for plotting.
pub fn curvature_table<B: BumpFunction>(m: &TubeMetric<B>, samples: usize) -> Result<Vec<(f64, CurvatureTriple)>> {
    let lo = m.r0 + CORE_OFFSET;
    let samples = samples.max(2);
    (0..samples)
        .map(|k| {
            let r = lerp(lo, 0.0, k, samples);
            curvature_triple(m, r).map(|t| (r, t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn central(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
        (f(r + h) - f(r - h)) / (2.0 * h)
    }

    #[test]
    fn bump_plateaus_and_range() {
        for bump in StandardBump::ALL {
            for r in [-5.0, -2.0, -2.5] {
                assert_eq!(bump.phi(r), 1.0);
                assert_eq!(bump.dphi(r), 0.0);
            }
            for r in [-1.0, -0.5, 0.0] {
                assert_eq!(bump.phi(r), 0.0);
                assert_eq!(bump.ddphi(r), 0.0);
            }
            for k in 0..=1000 {
                let r = -2.0 + k as f64 / 1000.0;
                let p = bump.phi(r);
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let h = 1e-6;
        for bump in StandardBump::ALL {
            for k in 1..1000 {
                let r = -2.0 + k as f64 / 1000.0 + 3.7e-4;
                if r >= -1.0 {
                    continue;
                }
                assert_abs_diff_eq!(bump.dphi(r), central(|x| bump.phi(x), r, h), epsilon = 1e-6);
                assert_abs_diff_eq!(bump.ddphi(r), central(|x| bump.dphi(x), r, h), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn build_checks_meridian_length() {
        let m = build_tube_metric(min_meridian_length(), StandardBump::Smoothstep).unwrap();
        assert_abs_diff_eq!(m.r0(), -3.0, epsilon = 1e-12);
        let m = build_tube_metric(100.0, StandardBump::Smoothstep).unwrap();
        assert_abs_diff_eq!(m.r0(), -(100.0 / PI).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.meridian_length(m.r0()).unwrap(), 0.0, epsilon = 1e-12);
        assert!(matches!(
            build_tube_metric(50.0, StandardBump::Smoothstep),
            Err(Error::MeridianTooShort(_))
        ));
    }

    #[test]
    fn boundary_values() {
        let m = build_tube_metric(100.0, StandardBump::Exponential).unwrap();
        let rep = boundary_form_check(&m, 1001);
        assert_abs_diff_eq!(rep.f_at_0, 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.g_at_0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.f_at_r0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.df_at_r0, 2.0 * PI, epsilon = 1e-12);
        assert!(rep.max_deviation() < 1e-12, "{rep:?}");
        let m = build_tube_metric(min_meridian_length(), StandardBump::Exponential).unwrap();
        let w = m.warp(m.r0()).unwrap();
        assert_abs_diff_eq!(w.g, 2.0 * (-3f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn meridian_lengths() {
        let m = build_tube_metric(100.0, StandardBump::Smoothstep).unwrap();
        assert_abs_diff_eq!(m.meridian_length(0.0).unwrap(), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.meridian_length(-1.0).unwrap(), 36.787_944_117_144_23, epsilon = 1e-10);
        assert!(m.meridian_length(0.5).is_err());
        assert!(m.meridian_length(m.r0() - 0.1).is_err());
    }

    #[test]
    fn triple_is_exact_outside_band() {
        let m = build_tube_metric(100.0, StandardBump::Exponential).unwrap();
        for r in [-0.0, -0.3, -1.0, -2.0, -3.0, m.r0() + 1e-6] {
            let t = curvature_triple(&m, r).unwrap();
            assert!(t.max_deviation() < 1e-12, "r = {r}: {t:?}");
        }
        assert!(curvature_triple(&m, m.r0()).is_err());
        assert!(curvature_triple(&m, 0.1).is_err());
    }

    #[test]
    fn triple_in_band_is_bounded_by_formula() {
        for bump in StandardBump::ALL {
            let m = build_tube_metric(100.0, bump).unwrap();
            let t = curvature_triple(&m, -1.5).unwrap();
            let bound = pinching_formula_term(&bump, -1.5) / (100.0 * 100.0);
            assert!(t.max_deviation() <= bound);
            assert!(t.max_deviation() > 0.0);
        }
    }

    #[test]
    fn unperturbed_collar_has_zero_pinching() {
        let m = build_tube_metric(100.0, StandardBump::Smoothstep).unwrap();
        let rep = pinching_verify_on(&m, -1.0, 0.0, 2000).unwrap();
        assert_eq!(rep.l_emp, 0.0);
        assert!(pinching_verify(&m, 10).is_err());
    }
}
