//! Analytic unit-speed test curves.
//!
//! Each generator samples `t` on `[-length/2, length/2]` (the perturbed
//! geodesic starts at `t = 0`) with step `dt`, evaluating a closed-form
//! parameterization so that no resampling error enters the curvature
//! estimates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SampledPath, DEFAULT_UNIT_SPEED_TOL};
use crate::error::{Error, Result};
use crate::hyperbolic::{uhs_to_hyperboloid, HPoint, UHSPoint};

fn sample_count(length: f64, dt: f64) -> Result<usize> {
    if !(length > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "length and step must be positive (length {length}, step {dt})"
        )));
    }
    Ok((length / dt).round() as usize + 1)
}

fn centered<F>(length: f64, dt: f64, eval: F) -> Result<SampledPath>
where
    F: Fn(f64) -> Result<HPoint>,
{
    let n = sample_count(length, dt)?;
    let t0 = -0.5 * (n - 1) as f64 * dt;
    let points = (0..n).map(|i| eval(t0 + i as f64 * dt)).collect::<Result<Vec<_>>>()?;
    SampledPath::new(t0, dt, points, DEFAULT_UNIT_SPEED_TOL)
}

/// Geodesic through the origin of ℍⁿ along the first axis.
pub fn geodesic(n: usize, length: f64, dt: f64) -> Result<SampledPath> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n + 1));
    }
    centered(length, dt, |t| {
        let mut c = vec![0.0; n + 1];
        c[0] = t.sinh();
        c[n] = t.cosh();
        HPoint::from_coords(c)
    })
}

/// Hypercycle in ℍ² at distance `d` from the geodesic `(sinh s, 0, cosh s)`.
/// Curvature `tanh d`.
pub fn equidistant(d: f64, length: f64, dt: f64) -> Result<SampledPath> {
    if !(d >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be non-negative, got {d}"
        )));
    }
    let (ch, sh) = (d.cosh(), d.sinh());
    centered(length, dt, |t| {
        let s = t / ch;
        HPoint::from_coords(vec![ch * s.sinh(), sh, ch * s.cosh()])
    })
}

/// Circle of radius `rho` about the origin of ℍ². Curvature `coth rho`.
pub fn circle(rho: f64, length: f64, dt: f64) -> Result<SampledPath> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {rho}")));
    }
    let (sh, ch) = (rho.sinh(), rho.cosh());
    centered(length, dt, |t| {
        let (s, c) = (t / sh).sin_cos();
        HPoint::from_coords(vec![sh * c, sh * s, ch])
    })
}

/// Horocycle `{y = 1}` of the upper half-plane, unit speed in `x`. Curvature 1.
pub fn horocycle(length: f64, dt: f64) -> Result<SampledPath> {
    centered(length, dt, |t| Ok(uhs_to_hyperboloid(&UHSPoint::new(vec![t, 1.0])?)))
}

/// Normal offset `h(s) = Σ a_k sin(ω_k s + φ_k)` of the geodesic
/// `(sinh s, 0, cosh s)` in Fermi coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
}

impl Perturbation {
    /// Three random modes with amplitudes in `[-amplitude, amplitude]` and
    /// frequencies in `[0.5, 2]`.
    pub fn random<R: Rng>(rng: &mut R, amplitude: f64) -> Self {
        let modes = 3;
        Self {
            amplitudes: (0..modes).map(|_| rng.gen_range(-amplitude..=amplitude)).collect(),
            frequencies: (0..modes).map(|_| rng.gen_range(0.5..=2.0)).collect(),
            phases: (0..modes).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.amplitudes
            .iter()
            .zip(&self.frequencies)
            .zip(&self.phases)
            .map(|((a, w), p)| (*a, *w, *p))
    }

    fn offset(&self, s: f64) -> f64 {
        self.modes().map(|(a, w, p)| a * (w * s + p).sin()).sum()
    }

    fn offset_rate(&self, s: f64) -> f64 {
        self.modes().map(|(a, w, p)| a * w * (w * s + p).cos()).sum()
    }

    /// `|c'(s)| = sqrt(h'² + cosh² h)` for the Fermi-coordinate curve.
    fn speed(&self, s: f64) -> f64 {
        let h = self.offset(s);
        let dh = self.offset_rate(s);
        (dh * dh + h.cosh().powi(2)).sqrt()
    }

    fn point(&self, s: f64) -> Result<HPoint> {
        let h = self.offset(s);
        HPoint::from_coords(vec![h.cosh() * s.sinh(), h.sinh(), h.cosh() * s.cosh()])
    }
}

// 5-point Gauss–Legendre nodes and weights on [-1, 1]
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL_NODES
        .iter()
        .zip(&GL_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Perturbed geodesic of the given arc length, sampled at exact arc-length
/// steps: the arc-length function is integrated by Gauss–Legendre quadrature
/// and inverted with Newton iterations.
pub fn perturbed_geodesic(pert: &Perturbation, length: f64, dt: f64) -> Result<SampledPath> {
    let n = sample_count(length, dt)?;
    // speed >= 1, so parameter range [0, length] covers the arc length
    let delta = dt / 4.0;
    let nodes = (length / delta).ceil() as usize + 1;
    let mut cumulative = Vec::with_capacity(nodes);
    cumulative.push(0.0);
    for k in 1..nodes {
        let (a, b) = ((k - 1) as f64 * delta, k as f64 * delta);
        let last = cumulative[k - 1];
        cumulative.push(last + gauss_legendre(|s| pert.speed(s), a, b));
    }
    let mut points = Vec::with_capacity(n);
    let mut node = 0;
    for i in 0..n {
        let target = i as f64 * dt;
        while node + 1 < nodes && cumulative[node + 1] <= target {
            node += 1;
        }
        let a = node as f64 * delta;
        let mut s = a + (target - cumulative[node]) / pert.speed(a);
        for _ in 0..8 {
            let residual = cumulative[node] + gauss_legendre(|x| pert.speed(x), a, s) - target;
            s -= residual / pert.speed(s);
            if residual.abs() < 1e-15 {
                break;
            }
        }
        points.push(pert.point(s)?);
    }
    SampledPath::new(0.0, dt, points, DEFAULT_UNIT_SPEED_TOL)
}
