//! Extrinsic geometry of gridded surfaces in ℍ³.
//!
//! Derivatives are second-order central differences on the node grid. The
//! first and second fundamental forms live on interior nodes (margin 1);
//! intrinsic curvature and Christoffel symbols need one more ring (margin 2).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{geodesic_curvature, SampledPath, DEFAULT_UNIT_SPEED_TOL, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::hyperbolic::{minkowski_inner, HPoint, MinkowskiVector};

/// Minimum nodes per grid direction.
pub const MIN_GRID: usize = 5;

/// `𝒦` within this of 1 is treated as `𝒦 ≥ 1`.
pub const CERTIFICATE_MARGIN: f64 = 1e-9;

pub const DEFAULT_PROBES: usize = 20;

pub type SurfaceMap = Arc<dyn Fn(f64, f64) -> Result<HPoint> + Send + Sync>;

/// Rectangular lattice `u_i = u0 + i·du`, `v_j = v0 + j·dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub u0: f64,
    pub v0: f64,
    pub du: f64,
    pub dv: f64,
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn new(u0: f64, v0: f64, du: f64, dv: f64, nu: usize, nv: usize) -> Result<Self> {
        if !(du > 0.0 && dv > 0.0) || !du.is_finite() || !dv.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid steps must be positive, got ({du}, {dv})"
            )));
        }
        if nu < MIN_GRID || nv < MIN_GRID {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least {MIN_GRID}x{MIN_GRID}, got {nu}x{nv}"
            )));
        }
        Ok(Self { u0, v0, du, dv, nu, nv })
    }

    /// Square patch `[-half_width, half_width]²` with step `h`.
    pub fn centered(half_width: f64, h: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half width and step must be positive (half width {half_width}, step {h})"
            )));
        }
        let n = (2.0 * half_width / h).round() as usize + 1;
        let start = -0.5 * (n - 1) as f64 * h;
        Self::new(start, start, h, h, n, n)
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.du
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.dv
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    fn refined(&self) -> Self {
        Self {
            du: self.du / 2.0,
            dv: self.dv / 2.0,
            nu: 2 * self.nu - 1,
            nv: 2 * self.nv - 1,
            ..*self
        }
    }
}

/// Surface in ℍ³ sampled on a [`Grid`], optionally backed by its analytic map.
#[derive(Clone)]
pub struct ParamSurface {
    grid: Grid,
    points: Vec<HPoint>,
    map: Option<SurfaceMap>,
}

impl fmt::Debug for ParamSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSurface")
            .field("grid", &self.grid)
            .field("analytic", &self.map.is_some())
            .finish_non_exhaustive()
    }
}

impl ParamSurface {
    /// Points in row-major order (`u` index outer). Rejects grids whose
    /// first fundamental form is not positive definite at an interior node.
    pub fn new(grid: Grid, points: Vec<HPoint>) -> Result<Self> {
        if points.len() != grid.nu * grid.nv {
            return Err(Error::InvalidArgument(format!(
                "expected {} points for a {}x{} grid, got {}",
                grid.nu * grid.nv,
                grid.nu,
                grid.nv,
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|p| p.vector().len() != 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: bad.vector().len(),
            });
        }
        let s = Self {
            grid,
            points,
            map: None,
        };
        for i in 1..grid.nu - 1 {
            for j in 1..grid.nv - 1 {
                s.frame(i, j)?;
            }
        }
        Ok(s)
    }

    pub fn from_map<F>(grid: Grid, map: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<HPoint> + Send + Sync + 'static,
    {
        let map: SurfaceMap = Arc::new(map);
        let points = (0..grid.nu * grid.nv)
            .into_par_iter()
            .map(|k| map(grid.u(k / grid.nv), grid.v(k % grid.nv)))
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::new(grid, points)?;
        s.map = Some(map);
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn point(&self, i: usize, j: usize) -> &HPoint {
        &self.points[self.grid.index(i, j)]
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn is_analytic(&self) -> bool {
        self.map.is_some()
    }

    /// The same patch at half the grid step; needs the analytic map.
    pub fn refined(&self) -> Result<Self> {
        let map = self
            .map
            .clone()
            .ok_or_else(|| Error::InvalidArgument("refinement needs an analytic surface".into()))?;
        Self::from_map(self.grid.refined(), move |u, v| map(u, v))
    }

    fn x(&self, i: usize, j: usize) -> &MinkowskiVector {
        self.points[self.grid.index(i, j)].vector()
    }

    fn du_at(&self, i: usize, j: usize) -> MinkowskiVector {
        (self.x(i + 1, j) - self.x(i - 1, j)).scale(0.5 / self.grid.du)
    }

    fn dv_at(&self, i: usize, j: usize) -> MinkowskiVector {
        (self.x(i, j + 1) - self.x(i, j - 1)).scale(0.5 / self.grid.dv)
    }

    /// Tangent-projected `∂_u X`, `∂_v X` and the first form at an interior node.
    fn frame(&self, i: usize, j: usize) -> Result<(MinkowskiVector, MinkowskiVector, [f64; 3])> {
        let p = self.x(i, j);
        let tangent = |w: MinkowskiVector| {
            let c = p.dot(&w);
            w.axpy(c, p)
        };
        let xu = tangent(self.du_at(i, j));
        let xv = tangent(self.dv_at(i, j));
        let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
        let det = e * g - f * f;
        if !(e > 0.0 && g > 0.0 && det > 1e-12 * (e + g) * (e + g)) {
            return Err(Error::DegenerateSurface { i, j });
        }
        Ok((xu, xv, [e, f, g]))
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(rows: [&[f64]; 4]) -> f64 {
    (0..4)
        .map(|c| {
            let minor = |r: usize| {
                let mut out = [0.0; 3];
                for (k, col) in (0..4).filter(|&k| k != c).enumerate() {
                    out[k] = rows[r][col];
                }
                out
            };
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * rows[0][c] * det3([minor(1), minor(2), minor(3)])
        })
        .sum()
}

/// Unit normal orthogonal to `xu`, `xv` and `p`, with `(xu, xv, η)`
/// positively oriented: `det[xu, xv, η, p] > 0`.
fn unit_normal(xu: &MinkowskiVector, xv: &MinkowskiVector, p: &MinkowskiVector) -> MinkowskiVector {
    let mut w = [0.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        let e = MinkowskiVector::basis(4, k);
        *wk = det4([xu.coords(), xv.coords(), p.coords(), e.coords()]);
    }
    w[3] = -w[3];
    let eta = MinkowskiVector::new(w.to_vec()).expect("four coordinates");
    let eta = eta.scale(1.0 / eta.norm_sq().sqrt());
    if det4([xu.coords(), xv.coords(), eta.coords(), p.coords()]) < 0.0 {
        -&eta
    } else {
        eta
    }
}

/// Scalar field on the nodes `margin..n-margin` of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeField {
    nu: usize,
    nv: usize,
    margin: usize,
    values: Vec<f64>,
}

impl NodeField {
    fn build<F>(grid: &Grid, margin: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let (ru, rv) = (grid.nu - 2 * margin, grid.nv - 2 * margin);
        let values = (0..ru * rv)
            .into_par_iter()
            .map(|k| f(k / rv + margin, k % rv + margin))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nu: grid.nu,
            nv: grid.nv,
            margin,
            values,
        })
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Value at grid node `(i, j)`, `None` outside the field's range.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let m = self.margin;
        if i < m || j < m || i + m >= self.nu || j + m >= self.nv {
            return None;
        }
        Some(self.values[(i - m) * (self.nv - 2 * m) + (j - m)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `I = [E F; F G]` and symmetrized `II = [L M; M N]` on interior nodes.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    grid: Grid,
    first: Vec<[f64; 3]>,
    second: Vec<[f64; 3]>,
    normals: Vec<MinkowskiVector>,
    asymmetry: f64,
}

impl FundamentalForms {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let g = &self.grid;
        if i == 0 || j == 0 || i + 1 >= g.nu || j + 1 >= g.nv {
            return None;
        }
        Some((i - 1) * (g.nv - 2) + (j - 1))
    }

    /// `[E, F, G]` at an interior node.
    pub fn first(&self, i: usize, j: usize) -> Option<[f64; 3]> {
        self.slot(i, j).map(|k| self.first[k])
    }

    /// `[L, M, N]` at an interior node.
    pub fn second(&self, i: usize, j: usize) -> Option<[f64; 3]> {
        self.slot(i, j).map(|k| self.second[k])
    }

    pub fn normal(&self, i: usize, j: usize) -> Option<&MinkowskiVector> {
        self.slot(i, j).map(|k| &self.normals[k])
    }

    /// Largest `|II(∂u,∂v) − II(∂v,∂u)|` before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Opposite orientation: `η ↦ −η`, `II ↦ −II`.
    pub fn flipped(&self) -> Self {
        Self {
            second: self.second.iter().map(|[l, m, n]| [-l, -m, -n]).collect(),
            normals: self.normals.iter().map(|n| -n).collect(),
            ..self.clone()
        }
    }
}

pub fn fundamental_forms(s: &ParamSurface) -> Result<FundamentalForms> {
    let g = s.grid;
    let (du, dv) = (g.du, g.dv);
    let nodes: Vec<_> = (1..g.nu - 1)
        .into_par_iter()
        .flat_map_iter(|i| (1..g.nv - 1).map(move |j| (i, j)))
        .map(|(i, j)| -> Result<_> {
            let p = s.x(i, j);
            let (xu, xv, first) = s.frame(i, j)?;
            let eta = unit_normal(&xu, &xv, p);
            let xuu = (&(s.x(i + 1, j) + s.x(i - 1, j)) - &p.scale(2.0)).scale(1.0 / (du * du));
            let xvv = (&(s.x(i, j + 1) + s.x(i, j - 1)) - &p.scale(2.0)).scale(1.0 / (dv * dv));
            let xuv = (&s.dv_at(i + 1, j) - &s.dv_at(i - 1, j)).scale(0.5 / du);
            let xvu = (&s.du_at(i, j + 1) - &s.du_at(i, j - 1)).scale(0.5 / dv);
            let (muv, mvu) = (xuv.dot(&eta), xvu.dot(&eta));
            let second = [xuu.dot(&eta), 0.5 * (muv + mvu), xvv.dot(&eta)];
            Ok((first, second, eta, (muv - mvu).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut forms = FundamentalForms {
        grid: g,
        first: Vec::with_capacity(nodes.len()),
        second: Vec::with_capacity(nodes.len()),
        normals: Vec::with_capacity(nodes.len()),
        asymmetry: 0.0,
    };
    for (first, second, eta, asym) in nodes {
        forms.first.push(first);
        forms.second.push(second);
        forms.normals.push(eta);
        forms.asymmetry = forms.asymmetry.max(asym);
    }
    Ok(forms)
}

/// Eigenvalues `λ1 ≥ λ2` of `I⁻¹ II`.
pub fn principal_pair(first: [f64; 3], second: [f64; 3]) -> Result<(f64, f64)> {
    let [e, f, g] = first;
    let [l, m, n] = second;
    if !(e > 0.0) || !(e * g - f * f > 0.0) {
        return Err(Error::InvalidArgument("first fundamental form is singular".into()));
    }
    // I = C Cᵀ; the symmetric matrix C⁻¹ II C⁻ᵀ has the same eigenvalues
    let a = e.sqrt();
    let b = f / a;
    let c = (g - b * b).sqrt();
    let (p, q, r) = (1.0 / a, -b / (a * c), 1.0 / c);
    let s11 = p * p * l;
    let s12 = p * (q * l + r * m);
    let s22 = q * q * l + 2.0 * q * r * m + r * r * n;
    let mean = 0.5 * (s11 + s22);
    let rad = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
    Ok((mean + rad, mean - rad))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalCurvatures {
    pub lambda1: NodeField,
    pub lambda2: NodeField,
}

pub fn principal_curvatures(f: &FundamentalForms) -> Result<PrincipalCurvatures> {
    let pair = |i, j| principal_pair(f.first(i, j).unwrap(), f.second(i, j).unwrap());
    Ok(PrincipalCurvatures {
        lambda1: NodeField::build(&f.grid, 1, |i, j| pair(i, j).map(|p| p.0))?,
        lambda2: NodeField::build(&f.grid, 1, |i, j| pair(i, j).map(|p| p.1))?,
    })
}

/// Central first and second differences of the first form at a node of margin 2.
struct MetricJet {
    e: f64,
    f: f64,
    g: f64,
    e_u: f64,
    e_v: f64,
    f_u: f64,
    f_v: f64,
    g_u: f64,
    g_v: f64,
    e_vv: f64,
    f_uv: f64,
    g_uu: f64,
}

fn metric_jet(f: &FundamentalForms, i: usize, j: usize) -> MetricJet {
    let (du, dv) = (f.grid.du, f.grid.dv);
    let at = |i, j| f.first(i, j).unwrap();
    let c = at(i, j);
    let (up, um, vp, vm) = (at(i + 1, j), at(i - 1, j), at(i, j + 1), at(i, j - 1));
    let d_u = |k: usize| (up[k] - um[k]) / (2.0 * du);
    let d_v = |k: usize| (vp[k] - vm[k]) / (2.0 * dv);
    let f_uv =
        (at(i + 1, j + 1)[1] - at(i + 1, j - 1)[1] - at(i - 1, j + 1)[1] + at(i - 1, j - 1)[1]) / (4.0 * du * dv);
    MetricJet {
        e: c[0],
        f: c[1],
        g: c[2],
        e_u: d_u(0),
        e_v: d_v(0),
        f_u: d_u(1),
        f_v: d_v(1),
        g_u: d_u(2),
        g_v: d_v(2),
        e_vv: (vp[0] - 2.0 * c[0] + vm[0]) / (dv * dv),
        f_uv,
        g_uu: (up[2] - 2.0 * c[2] + um[2]) / (du * du),
    }
}

fn brioschi(m: &MetricJet) -> f64 {
    let a = det3([
        [-0.5 * m.e_vv + m.f_uv - 0.5 * m.g_uu, 0.5 * m.e_u, m.f_u - 0.5 * m.e_v],
        [m.f_v - 0.5 * m.g_u, m.e, m.f],
        [0.5 * m.g_v, m.f, m.g],
    ]);
    let b = det3([
        [0.0, 0.5 * m.e_v, 0.5 * m.g_u],
        [0.5 * m.e_v, m.e, m.f],
        [0.5 * m.g_u, m.f, m.g],
    ]);
    let d = m.e * m.g - m.f * m.f;
    (a - b) / (d * d)
}

/// Gaussian curvature of the induced metric (Brioschi formula) on nodes of margin 2.
pub fn intrinsic_curvature(f: &FundamentalForms) -> Result<NodeField> {
    NodeField::build(&f.grid, 2, |i, j| Ok(brioschi(&metric_jet(f, i, j))))
}

/// `max |K_F + 1 − λ1 λ2|` over nodes of margin 2.
pub fn gauss_residual(s: &ParamSurface) -> Result<f64> {
    let forms = fundamental_forms(s)?;
    let k = intrinsic_curvature(&forms)?;
    let pc = principal_curvatures(&forms)?;
    Ok(gauss_residual_from(&k, &pc))
}

pub fn gauss_residual_from(k: &NodeField, pc: &PrincipalCurvatures) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..k.nu {
        for j in 0..k.nv {
            if let (Some(kf), Some(l1), Some(l2)) = (k.get(i, j), pc.lambda1.get(i, j), pc.lambda2.get(i, j)) {
                worst = worst.max((kf + 1.0 - l1 * l2).abs());
            }
        }
    }
    worst
}

/// Christoffel symbols `[Γᵘuu, Γᵘuv, Γᵘvv, Γᵛuu, Γᵛuv, Γᵛvv]` on nodes of margin 2.
fn christoffel(m: &MetricJet) -> [f64; 6] {
    let d2 = 2.0 * (m.e * m.g - m.f * m.f);
    [
        (m.g * m.e_u - 2.0 * m.f * m.f_u + m.f * m.e_v) / d2,
        (m.g * m.e_v - m.f * m.g_u) / d2,
        (2.0 * m.g * m.f_v - m.g * m.g_u - m.f * m.g_v) / d2,
        (2.0 * m.e * m.f_u - m.e * m.e_v - m.f * m.e_u) / d2,
        (m.e * m.g_u - m.f * m.e_v) / d2,
        (m.e * m.g_v - 2.0 * m.f * m.f_v + m.f * m.g_u) / d2,
    ]
}

/// Bilinear interpolation of node data on the margin-2 sub-grid.
struct Interpolant<const K: usize> {
    grid: Grid,
    values: Vec<[f64; K]>,
}

impl<const K: usize> Interpolant<K> {
    fn build<F: Fn(usize, usize) -> [f64; K] + Sync>(grid: Grid, f: F) -> Self {
        let rv = grid.nv - 4;
        let values = (0..(grid.nu - 4) * rv)
            .into_par_iter()
            .map(|k| f(k / rv + 2, k % rv + 2))
            .collect();
        Self { grid, values }
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let g = &self.grid;
        ([g.u(2), g.u(g.nu - 3)], [g.v(2), g.v(g.nv - 3)])
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        let (bu, bv) = self.bounds();
        u >= bu[0] && u <= bu[1] && v >= bv[0] && v <= bv[1]
    }

    fn at(&self, u: f64, v: f64) -> [f64; K] {
        let g = &self.grid;
        let (ru, rv) = (g.nu - 4, g.nv - 4);
        let x = ((u - g.u(2)) / g.du).clamp(0.0, (ru - 1) as f64);
        let y = ((v - g.v(2)) / g.dv).clamp(0.0, (rv - 1) as f64);
        let (i, j) = ((x.floor() as usize).min(ru - 2), (y.floor() as usize).min(rv - 2));
        let (a, b) = (x - i as f64, y - j as f64);
        let node = |i: usize, j: usize| &self.values[i * rv + j];
        let mut out = [0.0; K];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (1.0 - a) * (1.0 - b) * node(i, j)[k]
                + a * (1.0 - b) * node(i + 1, j)[k]
                + (1.0 - a) * b * node(i, j + 1)[k]
                + a * b * node(i + 1, j + 1)[k];
        }
        out
    }
}

/// Ambient geodesic curvature of one traced intrinsic geodesic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicProbe {
    pub start: [f64; 2],
    pub angle: f64,
    pub samples: usize,
    pub max_kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureCertificate {
    pub max_abs_principal: f64,
    /// `1/√(1−𝒦²)` when `𝒦 < 1`.
    pub quasi_constant: Option<f64>,
    pub probes: Vec<GeodesicProbe>,
    pub probe_tolerance: f64,
}

impl CurvatureCertificate {
    /// Every probe satisfies `κ ≤ 𝒦 + tolerance`.
    pub fn probes_hold(&self) -> bool {
        self.probes
            .iter()
            .all(|p| p.max_kappa <= self.max_abs_principal + self.probe_tolerance)
    }

    pub fn max_probe_kappa(&self) -> Option<f64> {
        self.probes.iter().map(|p| p.max_kappa).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub probes: usize,
    pub seed: u64,
    /// Defaults to `10·h` with `h` the larger grid step.
    pub tolerance: Option<f64>,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            probes: DEFAULT_PROBES,
            seed: 0,
            tolerance: None,
        }
    }
}

pub fn small_curvature_certificate(s: &ParamSurface) -> Result<CurvatureCertificate> {
    small_curvature_certificate_with(s, &CertificateOptions::default())
}

/// Probes run only on analytic surfaces; grid-only surfaces report none.
pub fn small_curvature_certificate_with(s: &ParamSurface, opts: &CertificateOptions) -> Result<CurvatureCertificate> {
    let forms = fundamental_forms(s)?;
    let pc = principal_curvatures(&forms)?;
    let k = pc.lambda1.max_abs().max(pc.lambda2.max_abs());
    let quasi_constant = (k < 1.0 - CERTIFICATE_MARGIN).then(|| 1.0 / (1.0 - k * k).sqrt());
    let probe_tolerance = opts.tolerance.unwrap_or(10.0 * s.grid.du.max(s.grid.dv));
    let probes = match &s.map {
        Some(map) => trace_probes(s, &forms, map, opts)?,
        None => Vec::new(),
    };
    Ok(CurvatureCertificate {
        max_abs_principal: k,
        quasi_constant,
        probes,
        probe_tolerance,
    })
}

/// One intrinsic geodesic from `(u, v)` at angle `angle` in an `I`-orthonormal
/// frame, traced until it leaves the Christoffel sub-grid or reaches `max_length`,
/// re-sampled at unit speed with step equal to the grid step.
pub fn trace_intrinsic_geodesic(s: &ParamSurface, start: [f64; 2], angle: f64, max_length: f64) -> Result<SampledPath> {
    let map = s
        .map
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("geodesic tracing needs an analytic surface".into()))?;
    let forms = fundamental_forms(s)?;
    let (gamma, metric) = probe_fields(&forms);
    trace(s, map, &gamma, &metric, start, angle, max_length)
}

fn probe_fields(forms: &FundamentalForms) -> (Interpolant<6>, Interpolant<3>) {
    let gamma = Interpolant::build(forms.grid, |i, j| christoffel(&metric_jet(forms, i, j)));
    let metric = Interpolant::build(forms.grid, |i, j| forms.first(i, j).unwrap());
    (gamma, metric)
}

fn trace_probes(
    s: &ParamSurface,
    forms: &FundamentalForms,
    map: &SurfaceMap,
    opts: &CertificateOptions,
) -> Result<Vec<GeodesicProbe>> {
    let (gamma, metric) = probe_fields(forms);
    let (bu, bv) = gamma.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<_> = (0..opts.probes)
        .map(|_| {
            let pick = |b: [f64; 2], t: f64| b[0] + (b[1] - b[0]) * (0.3 + 0.4 * t);
            let (a, b, theta) = (
                rng.gen::<f64>(),
                rng.gen::<f64>(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            ([pick(bu, a), pick(bv, b)], theta)
        })
        .collect();
    let max_length = 4.0 * ((bu[1] - bu[0]) + (bv[1] - bv[0]));
    starts
        .into_par_iter()
        .map(|(start, angle)| {
            let path = trace(s, map, &gamma, &metric, start, angle, max_length)?;
            let profile = geodesic_curvature(&path)?;
            Ok(GeodesicProbe {
                start,
                angle,
                samples: path.len(),
                max_kappa: profile.max_kappa,
            })
        })
        .collect()
}

const SUBSTEPS: usize = 8;

fn trace(
    s: &ParamSurface,
    map: &SurfaceMap,
    gamma: &Interpolant<6>,
    metric: &Interpolant<3>,
    start: [f64; 2],
    angle: f64,
    max_length: f64,
) -> Result<SampledPath> {
    if !gamma.contains(start[0], start[1]) {
        return Err(Error::InvalidArgument(format!(
            "start ({}, {}) outside the traceable region",
            start[0], start[1]
        )));
    }
    let h = s.grid.du.min(s.grid.dv);
    let ds = h / SUBSTEPS as f64;
    let [e, f, g] = metric.at(start[0], start[1]);
    let (a, b) = (e.sqrt(), f / e.sqrt());
    let c = (g - b * b).sqrt();
    let (cos, sin) = (angle.cos(), angle.sin());
    let pv = sin / c;
    let pu = (cos - b * pv) / a;

    let rhs = |y: [f64; 4]| {
        let [guu, guv, gvv, huu, huv, hvv] = gamma.at(y[0], y[1]);
        let (pu, pv) = (y[2], y[3]);
        [
            pu,
            pv,
            -(guu * pu * pu + 2.0 * guv * pu * pv + gvv * pv * pv),
            -(huu * pu * pu + 2.0 * huv * pu * pv + hvv * pv * pv),
        ]
    };
    let add = |y: [f64; 4], k: [f64; 4], t: f64| [y[0] + t * k[0], y[1] + t * k[1], y[2] + t * k[2], y[3] + t * k[3]];

    let mut states = vec![[start[0], start[1], pu, pv]];
    let steps = (max_length / ds).ceil() as usize;
    for _ in 0..steps {
        let y = *states.last().unwrap();
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, ds / 2.0));
        let k3 = rhs(add(y, k2, ds / 2.0));
        let k4 = rhs(add(y, k3, ds));
        let mut next = y;
        for (n, ((a, b), (c, d))) in next.iter_mut().zip(k1.iter().zip(&k2).zip(k3.iter().zip(&k4))) {
            *n += ds / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        }
        if !gamma.contains(next[0], next[1]) {
            break;
        }
        states.push(next);
    }

    let ambient = states.iter().map(|y| map(y[0], y[1])).collect::<Result<Vec<_>>>()?;
    let mut cumulative = vec![0.0];
    for w in ambient.windows(2) {
        let d = crate::hyperbolic::h_distance(&w[0], &w[1])?;
        cumulative.push(cumulative.last().unwrap() + d);
    }
    let total = *cumulative.last().unwrap();
    let count = (total / h).floor() as usize + 1;
    if count < MIN_SAMPLES {
        return Err(Error::LeftPatch { steps: states.len() });
    }
    let mut points = Vec::with_capacity(count);
    let mut seg = 0;
    for n in 0..count {
        let target = n as f64 * h;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let t = (target - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]);
        let (y0, y1) = (states[seg], states[seg + 1]);
        // cubic Hermite in the parameter plane
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        let u = h00 * y0[0] + h10 * ds * y0[2] + h01 * y1[0] + h11 * ds * y1[2];
        let v = h00 * y0[1] + h10 * ds * y0[3] + h01 * y1[1] + h11 * ds * y1[3];
        points.push(map(u, v)?);
    }
    SampledPath::new(0.0, h, points, DEFAULT_UNIT_SPEED_TOL)
}

/// Analytic test surfaces over `[-half_width, half_width]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceFixture {
    /// `(sinh u, cosh u sinh v, 0, cosh u cosh v)`, the plane `x2 = 0`.
    GeodesicPlane,
    /// Upper half-space horosphere at height 1.
    Horosphere,
    /// Points at distance `d` from the geodesic plane.
    Equidistant { d: f64 },
}

pub const FIXTURE_NAMES: [&str; 3] = ["geodesic-plane", "horosphere", "equidistant"];

impl SurfaceFixture {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GeodesicPlane => "geodesic-plane",
            Self::Horosphere => "horosphere",
            Self::Equidistant { .. } => "equidistant",
        }
    }

    /// Principal curvatures, both equal on every fixture.
    pub fn principal_curvature(&self) -> f64 {
        match self {
            Self::GeodesicPlane => 0.0,
            Self::Horosphere => 1.0,
            Self::Equidistant { d } => d.tanh(),
        }
    }

    pub fn intrinsic_curvature(&self) -> f64 {
        let k = self.principal_curvature();
        k * k - 1.0
    }

    pub fn surface(&self, h: f64) -> Result<ParamSurface> {
        self.surface_with(0.5, h)
    }

    pub fn surface_with(&self, half_width: f64, h: f64) -> Result<ParamSurface> {
        let grid = Grid::centered(half_width, h)?;
        match *self {
            Self::GeodesicPlane => ParamSurface::from_map(grid, |u, v| plane_point(u, v, 0.0)),
            Self::Horosphere => ParamSurface::from_map(grid, |u, v| {
                let s = u * u + v * v;
                HPoint::from_coords(vec![u, v, 0.5 * s, 0.5 * s + 1.0])
            }),
            Self::Equidistant { d } => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "distance must be finite and non-negative, got {d}"
                    )));
                }
                ParamSurface::from_map(grid, move |u, v| plane_point(u, v, d))
            }
        }
    }
}

fn plane_point(u: f64, v: f64, d: f64) -> Result<HPoint> {
    let (ch, sh) = (d.cosh(), d.sinh());
    HPoint::from_coords(vec![
        ch * v.sinh(),
        ch * v.cosh() * u.sinh(),
        sh,
        ch * v.cosh() * u.cosh(),
    ])
}

impl FromStr for SurfaceFixture {
    type Err = Error;

    /// `geodesic-plane`, `horosphere`, `equidistant` (d = 0.3) or `equidistant:<d>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let fixture = match (name, arg) {
            ("geodesic-plane", None) => Self::GeodesicPlane,
            ("horosphere", None) => Self::Horosphere,
            ("equidistant", None) => Self::Equidistant { d: 0.3 },
            ("equidistant", Some(a)) => Self::Equidistant {
                d: a.parse().map_err(|_| Error::Parse(format!("bad distance {a:?}")))?,
            },
            _ => {
                return Err(Error::Parse(format!(
                    "unknown surface fixture {s:?}; expected one of {}",
                    FIXTURE_NAMES.join(", ")
                )))
            }
        };
        Ok(fixture)
    }
}

/// `⟨η, η⟩` and the normal's inner products with the frame; test helper.
#[doc(hidden)]
pub fn normal_residuals(s: &ParamSurface, f: &FundamentalForms, i: usize, j: usize) -> Result<[f64; 4]> {
    let eta = f.normal(i, j).ok_or(Error::IndexOutOfRange {
        index: i,
        lo: 1,
        hi: s.grid.nu - 1,
    })?;
    let (xu, xv, _) = s.frame(i, j)?;
    let p = s.point(i, j).vector();
    Ok([
        minkowski_inner(eta, eta)? - 1.0,
        minkowski_inner(eta, &xu)?,
        minkowski_inner(eta, &xv)?,
        minkowski_inner(eta, p)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1e-2;

    fn lambdas(fx: SurfaceFixture, h: f64) -> PrincipalCurvatures {
        let s = fx.surface(h).unwrap();
        principal_curvatures(&fundamental_forms(&s).unwrap()).unwrap()
    }

    #[test]
    fn plane_metric_oracle() {
        let s = SurfaceFixture::GeodesicPlane.surface(H).unwrap();
        let f = fundamental_forms(&s).unwrap();
        let g = s.grid();
        for (i, j) in [(1, 1), (50, 50), (20, 80)] {
            let [e, ff, gg] = f.first(i, j).unwrap();
            let v = g.v(j);
            assert!((e - v.cosh().powi(2)).abs() < 1e-4, "{e}");
            assert!(ff.abs() < 1e-4);
            assert!((gg - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        for fx in [SurfaceFixture::Horosphere, SurfaceFixture::Equidistant { d: 0.6 }] {
            let s = fx.surface(H).unwrap();
            let f = fundamental_forms(&s).unwrap();
            for (i, j) in [(1, 1), (30, 70), (99, 99)] {
                for r in normal_residuals(&s, &f, i, j).unwrap() {
                    assert!(r.abs() < 1e-10, "{fx:?} {r}");
                }
            }
        }
    }

    #[test]
    fn fixture_principal_curvatures() {
        let plane = lambdas(SurfaceFixture::GeodesicPlane, H);
        assert!(plane.lambda1.max_abs() < 1e-8);
        assert!(plane.lambda2.max_abs() < 1e-8);
        let horo = lambdas(SurfaceFixture::Horosphere, H);
        for v in horo.lambda1.values().iter().chain(horo.lambda2.values()) {
            assert!((v - 1.0).abs() < 1e-4, "{v}");
        }
        let eq = lambdas(SurfaceFixture::Equidistant { d: 0.3 }, H);
        for v in eq.lambda1.values().iter().chain(eq.lambda2.values()) {
            assert!((v - 0.291_312_612_451_591).abs() < 1e-4, "{v}");
        }
    }

    #[test]
    fn equidistant_second_form_is_scaled_first_form() {
        let d: f64 = 0.4;
        let s = SurfaceFixture::Equidistant { d }.surface(H).unwrap();
        let f = fundamental_forms(&s).unwrap();
        for (i, j) in [(3, 5), (50, 50), (97, 12)] {
            let one = f.first(i, j).unwrap();
            let two = f.second(i, j).unwrap();
            for k in 0..3 {
                assert!((two[k] - d.tanh() * one[k]).abs() < 1e-4);
            }
        }
        assert!(f.asymmetry() < 1e-8, "{}", f.asymmetry());
    }

    #[test]
    fn intrinsic_curvature_oracles() {
        for fx in [
            SurfaceFixture::GeodesicPlane,
            SurfaceFixture::Horosphere,
            SurfaceFixture::Equidistant { d: 0.6 },
        ] {
            let f = fundamental_forms(&fx.surface(H).unwrap()).unwrap();
            let k = intrinsic_curvature(&f).unwrap();
            let want = fx.intrinsic_curvature();
            for v in k.values() {
                assert!((v - want).abs() < 1e-3, "{fx:?} {v} vs {want}");
            }
        }
    }

    #[test]
    fn orientation_flip() {
        let s = SurfaceFixture::Equidistant { d: 0.3 }.surface(H).unwrap();
        let f = fundamental_forms(&s).unwrap();
        let a = principal_curvatures(&f).unwrap();
        let b = principal_curvatures(&f.flipped()).unwrap();
        let k = intrinsic_curvature(&f).unwrap();
        for (x, y) in a.lambda1.values().iter().zip(b.lambda2.values()) {
            assert!((x + y).abs() < 1e-12);
        }
        assert!((gauss_residual_from(&k, &a) - gauss_residual_from(&k, &b)).abs() < 1e-12);
    }

    #[test]
    fn refinement_agrees() {
        let fx = SurfaceFixture::Equidistant { d: 0.6 };
        let coarse = fx.surface(2e-2).unwrap();
        let fine = coarse.refined().unwrap();
        let a = principal_curvatures(&fundamental_forms(&coarse).unwrap()).unwrap();
        let b = principal_curvatures(&fundamental_forms(&fine).unwrap()).unwrap();
        for i in 1..coarse.grid().nu - 1 {
            for j in 1..coarse.grid().nv - 1 {
                let x = a.lambda1.get(i, j).unwrap();
                let y = b.lambda1.get(2 * i, 2 * j).unwrap();
                assert!((x - y).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn certificate_cases() {
        let plane = small_curvature_certificate(&SurfaceFixture::GeodesicPlane.surface(H).unwrap()).unwrap();
        assert!(plane.max_abs_principal < 1e-8);
        assert!((plane.quasi_constant.unwrap() - 1.0).abs() < 1e-12);
        assert!(plane.probes_hold());
        assert_eq!(plane.probes.len(), DEFAULT_PROBES);

        let eq = small_curvature_certificate(&SurfaceFixture::Equidistant { d: 0.5 }.surface(H).unwrap()).unwrap();
        assert!((eq.max_abs_principal - 0.5f64.tanh()).abs() < 1e-4);
        assert!((eq.quasi_constant.unwrap() - 0.5f64.cosh()).abs() < 1e-3);
        assert!(eq.probes_hold());

        let horo = small_curvature_certificate(&SurfaceFixture::Horosphere.surface(H).unwrap()).unwrap();
        assert!((horo.max_abs_principal - 1.0).abs() < 1e-8);
        assert_eq!(horo.quasi_constant, None);
    }

    #[test]
    fn plane_geodesics_are_ambient_geodesics() {
        let s = SurfaceFixture::GeodesicPlane.surface(H).unwrap();
        let path = trace_intrinsic_geodesic(&s, [0.0, 0.1], 0.7, 2.0).unwrap();
        assert!(path.len() > 20);
        assert!(geodesic_curvature(&path).unwrap().max_kappa < 1e-3);
    }

    #[test]
    fn rejects_degenerate_grids() {
        let grid = Grid::centered(0.5, 0.1).unwrap();
        let pts = vec![HPoint::origin(3); grid.nu * grid.nv];
        assert!(matches!(
            ParamSurface::new(grid, pts),
            Err(Error::DegenerateSurface { i: 1, j: 1 })
        ));
        assert!(Grid::new(0.0, 0.0, 0.1, 0.1, 4, 9).is_err());
        assert!("saddle".parse::<SurfaceFixture>().is_err());
        assert_eq!(
            "equidistant:0.6".parse::<SurfaceFixture>().unwrap(),
            SurfaceFixture::Equidistant { d: 0.6 }
        );
    }
}
