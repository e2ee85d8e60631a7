//! Discrete geometry of unit-speed curves in ℍⁿ.
//!
//! Accelerations are taken by finite differences on the ambient Minkowski
//! coordinates and then projected to the tangent space of the hyperboloid,
//! `Dγ̇/dt = γ̈ + <γ̈, γ> γ`. The geodesic curvature is the norm of that
//! projection.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::{h_distance, project_to_tangent, GeodesicLine, HPoint, HTangent, MinkowskiVector};

pub mod fixtures;

/// Relative per-step tolerance on unit speed used by the fixture generators.
pub const DEFAULT_UNIT_SPEED_TOL: f64 = 1e-4;

/// Minimum number of samples (width of the order-4 stencil).
pub const MIN_SAMPLES: usize = 5;

/// Finite-difference order for second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum StencilOrder {
    /// Three-point stencil, error O(Δt²).
    #[default]
    Second,
    /// Five-point stencil, error O(Δt⁴).
    Fourth,
}

impl StencilOrder {
    fn half_width(self) -> usize {
        match self {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 2,
        }
    }
}

/// A curve sampled at uniform parameter steps, approximately unit speed.
#[derive(Debug, Clone)]
pub struct SampledPath {
    t0: f64,
    dt: f64,
    points: Vec<HPoint>,
    unit_speed_tol: f64,
}

impl SampledPath {
    /// Validates sample count, common dimension and per-step unit speed
    /// `|d(p_i, p_{i+1}) - Δt| <= unit_speed_tol * Δt`.
    pub fn new(t0: f64, dt: f64, points: Vec<HPoint>, unit_speed_tol: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("step must be positive, got {dt}")));
        }
        if !(unit_speed_tol > 0.0) {
            return Err(Error::InvalidArgument("unit speed tolerance must be positive".into()));
        }
        if points.len() < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                points.len()
            )));
        }
        let len = points[0].vector().len();
        if let Some(bad) = points.iter().find(|p| p.vector().len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: bad.vector().len(),
            });
        }
        for (i, w) in points.windows(2).enumerate() {
            let step = h_distance(&w[0], &w[1])?;
            if (step - dt).abs() > unit_speed_tol * dt {
                return Err(Error::NotUnitSpeed {
                    index: i,
                    step,
                    expected: dt,
                });
            }
        }
        Ok(Self {
            t0,
            dt,
            points,
            unit_speed_tol,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn unit_speed_tol(&self) -> f64 {
        self.unit_speed_tol
    }

    pub fn length(&self) -> f64 {
        (self.points.len() - 1) as f64 * self.dt
    }
}

/// Re-samples a polyline at uniform cumulative chord length `dt`, moving
/// along the geodesic between neighbouring input points.
pub fn resample_by_arc_length(points: &[HPoint], dt: f64, unit_speed_tol: f64) -> Result<SampledPath> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let mut cumulative = Vec::with_capacity(points.len());
    cumulative.push(0.0);
    for w in points.windows(2) {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + h_distance(&w[0], &w[1])?);
    }
    let total = *cumulative.last().unwrap();
    let count = (total / dt).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let target = k as f64 * dt;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let (a, b) = (&points[seg], &points[seg + 1]);
        let along = target - cumulative[seg];
        if cumulative[seg + 1] - cumulative[seg] == 0.0 {
            out.push(a.clone());
        } else {
            out.push(GeodesicLine::through(a, b)?.point(along));
        }
    }
    SampledPath::new(0.0, dt, out, unit_speed_tol)
}

fn check_stencil(path: &SampledPath, i: usize, order: StencilOrder) -> Result<()> {
    let w = order.half_width();
    if i < w || i + w >= path.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            lo: w,
            hi: path.len() - w,
        });
    }
    Ok(())
}

/// Ambient second derivative γ̈ at sample `i`.
pub fn ambient_accel(path: &SampledPath, i: usize, order: StencilOrder) -> Result<MinkowskiVector> {
    check_stencil(path, i, order)?;
    let p = |k: usize| path.points[k].vector();
    let h2 = path.dt * path.dt;
    let v = match order {
        StencilOrder::Second => {
            let s = p(i + 1) + p(i - 1);
            s.axpy(-2.0, p(i)).scale(1.0 / h2)
        }
        StencilOrder::Fourth => {
            let outer = p(i + 2) + p(i - 2);
            let inner = p(i + 1) + p(i - 1);
            inner
                .scale(16.0)
                .axpy(-1.0, &outer)
                .axpy(-30.0, p(i))
                .scale(1.0 / (12.0 * h2))
        }
    };
    Ok(v)
}

/// Covariant acceleration `Dγ̇/dt` at interior sample `i`, second-order stencil.
pub fn covariant_accel(path: &SampledPath, i: usize) -> Result<HTangent> {
    covariant_accel_with(path, i, StencilOrder::Second)
}

pub fn covariant_accel_with(path: &SampledPath, i: usize, order: StencilOrder) -> Result<HTangent> {
    let acc = ambient_accel(path, i, order)?;
    project_to_tangent(&path.points[i], &acc)
}

/// Geodesic curvature on the interior samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureProfile {
    /// Sample index of `values[0]`.
    pub first_index: usize,
    pub values: Vec<f64>,
    pub max_kappa: f64,
}

impl CurvatureProfile {
    pub fn from_values(first_index: usize, values: Vec<f64>) -> Self {
        let max_kappa = values.iter().fold(0.0, |m: f64, &k| m.max(k));
        Self {
            first_index,
            values,
            max_kappa,
        }
    }
}

pub fn geodesic_curvature(path: &SampledPath) -> Result<CurvatureProfile> {
    geodesic_curvature_with(path, StencilOrder::Second)
}

pub fn geodesic_curvature_with(path: &SampledPath, order: StencilOrder) -> Result<CurvatureProfile> {
    let w = order.half_width();
    let values = (w..path.len() - w)
        .map(|i| covariant_accel_with(path, i, order).map(|a| a.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurvatureProfile::from_values(w, values))
}

/// `max_i |<γ̈_i, γ̈_i> - (κ_i² - 1)|` with κ_i from the same stencil.
pub fn accel_identity_residual(path: &SampledPath) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..path.len() - 1 {
        let acc = ambient_accel(path, i, StencilOrder::Second)?;
        let kappa = project_to_tangent(&path.points[i], &acc)?.norm();
        worst = worst.max((acc.norm_sq() - (kappa * kappa - 1.0)).abs());
    }
    Ok(worst)
}

/// Quasi-geodesic constant `1/sqrt(1 - K²)` for a curvature bound `K < 1`.
pub fn quasi_constant(curvature_bound: f64) -> Result<f64> {
    if !(curvature_bound >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "curvature bound must be non-negative, got {curvature_bound}"
        )));
    }
    if curvature_bound >= 1.0 {
        return Err(Error::CurvatureTooLarge(curvature_bound));
    }
    Ok(1.0 / (1.0 - curvature_bound * curvature_bound).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiGeodesicReport {
    pub k: f64,
    /// `max ((1/k)|t - t'| - d(γ(t), γ(t')))⁺` over all sample pairs.
    pub lower_violation: f64,
    /// `max (d(γ(t), γ(t')) - |t - t'|)⁺`; bounded by the unit-speed tolerance.
    pub upper_excess: f64,
    pub chord_hausdorff: f64,
}

/// Brute-force pairwise check of the multiplicative quasi-geodesic bounds,
/// additive constant zero. Returns `(lower_violation, upper_excess)`.
pub fn pairwise_quasi_violation(path: &SampledPath, k: f64) -> Result<(f64, f64)> {
    if !(k >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quasi-geodesic constant must be >= 1, got {k}"
        )));
    }
    let n = path.len();
    let pts = &path.points;
    let dt = path.dt;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut lower: f64 = 0.0;
            let mut upper: f64 = 0.0;
            for j in i + 1..n {
                let span = (j - i) as f64 * dt;
                let d = h_distance(&pts[i], &pts[j])?;
                lower = lower.max(span / k - d);
                upper = upper.max(d - span);
            }
            Ok((lower, upper))
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))
}

pub fn verify_quasi_geodesic(path: &SampledPath, k: f64) -> Result<QuasiGeodesicReport> {
    let (lower_violation, upper_excess) = pairwise_quasi_violation(path, k)?;
    Ok(QuasiGeodesicReport {
        k,
        lower_violation,
        upper_excess,
        chord_hausdorff: chord_hausdorff(path)?,
    })
}

/// Distance from `q` to the geodesic segment `[a, b]`: the nearest point of
/// the full line is `s* = atanh(-B/A)`, clamped to the segment, measured from
/// whichever endpoint is closer to `q`.
pub fn distance_to_segment(q: &HPoint, a: &HPoint, b: &HPoint) -> Result<f64> {
    let len = h_distance(a, b)?;
    if len == 0.0 {
        return h_distance(q, a);
    }
    let (a, b) = if h_distance(q, b)? < h_distance(q, a)? {
        (b, a)
    } else {
        (a, b)
    };
    let line = GeodesicLine::through(a, b)?;
    let big_a = -q.vector().dot(a.vector());
    let big_b = -q.vector().dot(line.dir());
    let s = (-big_b / big_a).clamp(-1.0, 1.0).atanh().clamp(0.0, len);
    h_distance(q, &line.point(s))
}

fn distance_to_polyline(q: &HPoint, poly: &[HPoint]) -> Result<f64> {
    poly.windows(2)
        .map(|w| distance_to_segment(q, &w[0], &w[1]))
        .try_fold(f64::INFINITY, |m, d| d.map(|d| m.min(d)))
}

/// Symmetric Hausdorff distance between the path and the geodesic segment
/// joining its endpoints.
///
/// The chord is sampled at step `Δt/2`; the path is taken as the polyline of
/// geodesic segments through its samples, and the path-to-chord direction
/// uses exact point-to-segment distances.
pub fn chord_hausdorff(path: &SampledPath) -> Result<f64> {
    let first = &path.points[0];
    let last = &path.points[path.len() - 1];
    let total = h_distance(first, last)?;
    if total <= 1e-6 * path.dt {
        return Err(Error::CoincidentEndpoints);
    }
    let chord = GeodesicLine::through(first, last)?;
    let step = path.dt / 2.0;
    let m = (total / step).ceil() as usize;
    let chord_pts: Vec<HPoint> = (0..=m).map(|k| chord.point((k as f64 * step).min(total))).collect();
    let to_chord = path
        .points
        .par_iter()
        .map(|p| distance_to_segment(p, first, last))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let to_path = chord_pts
        .par_iter()
        .map(|q| distance_to_polyline(q, &path.points))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(to_chord.max(to_path))
}

/// Cumulative trapezoid integral of `sqrt(1 - κ²)`, starting at zero on the
/// first profile sample.
pub fn displacement_integral(profile: &CurvatureProfile, dt: f64) -> Result<Vec<f64>> {
    if let Some(&bad) = profile.values.iter().find(|&&k| !(k < 1.0)) {
        return Err(Error::CurvatureTooLarge(bad));
    }
    let integrand: Vec<f64> = profile.values.iter().map(|k| (1.0 - k * k).sqrt()).collect();
    let mut out = Vec::with_capacity(integrand.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in integrand.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    Ok(out)
}

/// `max_i (Δ(t_i) - d(γ(t_a), γ(t_i)))` where `t_a` is the first profiled
/// sample. Non-positive up to discretization error on admissible paths.
pub fn displacement_excess(path: &SampledPath, profile: &CurvatureProfile) -> Result<f64> {
    let delta = displacement_integral(profile, path.dt)?;
    let anchor = &path.points[profile.first_index];
    delta
        .iter()
        .enumerate()
        .map(|(k, dlt)| h_distance(anchor, &path.points[profile.first_index + k]).map(|d| dlt - d))
        .try_fold(f64::NEG_INFINITY, |m, x| x.map(|x| m.max(x)))
}
