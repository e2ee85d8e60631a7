//! Hyperboloid model of hyperbolic n-space.
//!
//! Points of ℍⁿ are future-pointing unit timelike vectors of Minkowski space
//! ℝ^{n,1}. The form is `<u,v> = u_0 v_0 + ... + u_{n-1} v_{n-1} - u_n v_n`,
//! so the time coordinate is the *last* one. That keeps the first n-1
//! coordinates aligned with the horizontal coordinates of the upper
//! half-space model.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on the hyperboloid and tangency constraints.
pub const DEFAULT_TAU_POINT: f64 = 1e-9;

/// A vector of ℝ^{n,1}; `coords[n]` is the timelike coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinkowskiVector(Vec<f64>);

impl MinkowskiVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        Ok(Self(coords))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// Unit coordinate vector `e_i` in a space with `len` coordinates.
    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        Self(v)
    }

    /// Number of ambient coordinates (n + 1).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hyperbolic dimension n.
    pub fn hyperbolic_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn time(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Minkowski form; callers guarantee equal lengths.
    pub(crate) fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let n = self.len() - 1;
        let space: f64 = self.0[..n].iter().zip(&other.0[..n]).map(|(a, b)| a * b).sum();
        space - self.0[n] * other.0[n]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    /// Euclidean max-norm of the coordinates, used for scale-aware tolerances.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl Add for &MinkowskiVector {
    type Output = MinkowskiVector;
    fn add(self, rhs: Self) -> MinkowskiVector {
        MinkowskiVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MinkowskiVector {
    type Output = MinkowskiVector;
    fn sub(self, rhs: Self) -> MinkowskiVector {
        MinkowskiVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &MinkowskiVector {
    type Output = MinkowskiVector;
    fn mul(self, rhs: f64) -> MinkowskiVector {
        self.scale(rhs)
    }
}

impl Neg for &MinkowskiVector {
    type Output = MinkowskiVector;
    fn neg(self) -> MinkowskiVector {
        self.scale(-1.0)
    }
}

/// Minkowski inner product `Σ_{i<n} u_i v_i − u_n v_n`.
pub fn minkowski_inner(u: &MinkowskiVector, v: &MinkowskiVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(u.dot(v))
}

fn check_same_dim(a: &MinkowskiVector, b: &MinkowskiVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// A point of ℍⁿ: `<v,v> = -1`, time coordinate positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MinkowskiVector", into = "MinkowskiVector")]
pub struct HPoint(MinkowskiVector);

impl HPoint {
    /// Projects any future-pointing timelike vector onto the hyperboloid.
    pub fn new(v: MinkowskiVector) -> Result<Self> {
        if v.len() < 3 {
            return Err(Error::DimensionTooSmall(v.len()));
        }
        let norm = v.norm_sq();
        if !(norm < 0.0) || !(v.time() > 0.0) {
            return Err(Error::NotOnHyperboloid { norm });
        }
        Ok(Self(v.scale(1.0 / (-norm).sqrt())))
    }

    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        Self::new(MinkowskiVector::new(coords)?)
    }

    /// `(0, ..., 0, 1)` in ℍⁿ.
    pub fn origin(n: usize) -> Self {
        Self(MinkowskiVector::basis(n + 1, n))
    }

    pub fn vector(&self) -> &MinkowskiVector {
        &self.0
    }

    pub fn coords(&self) -> &[f64] {
        self.0.coords()
    }

    pub fn hyperbolic_dim(&self) -> usize {
        self.0.hyperbolic_dim()
    }

    pub fn hyperboloid_residual(&self) -> f64 {
        (self.0.norm_sq() + 1.0).abs()
    }
}

impl TryFrom<MinkowskiVector> for HPoint {
    type Error = Error;
    fn try_from(v: MinkowskiVector) -> Result<Self> {
        HPoint::new(v)
    }
}

impl From<HPoint> for MinkowskiVector {
    fn from(p: HPoint) -> Self {
        p.0
    }
}

/// Tangent vector `dir` at `base`, with `<dir, base> = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTangent {
    base: HPoint,
    dir: MinkowskiVector,
}

impl HTangent {
    pub fn new(base: HPoint, dir: MinkowskiVector) -> Result<Self> {
        Self::with_tol(base, dir, DEFAULT_TAU_POINT)
    }

    pub fn with_tol(base: HPoint, dir: MinkowskiVector, tau: f64) -> Result<Self> {
        check_same_dim(base.vector(), &dir)?;
        let residual = dir.dot(base.vector());
        let scale = 1.0 + dir.max_abs() * base.vector().max_abs();
        if residual.abs() > tau * scale {
            return Err(Error::NotTangent { residual });
        }
        Ok(Self { base, dir })
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn dir(&self) -> &MinkowskiVector {
        &self.dir
    }

    /// Riemannian norm; the form is positive definite on tangent spaces.
    pub fn norm(&self) -> f64 {
        self.dir.norm_sq().max(0.0).sqrt()
    }
}

/// Tangential part `w + <w,p> p` of an ambient vector at `p`.
pub fn project_to_tangent(p: &HPoint, w: &MinkowskiVector) -> Result<HTangent> {
    check_same_dim(p.vector(), w)?;
    let dir = w.axpy(w.dot(p.vector()), p.vector());
    Ok(HTangent { base: p.clone(), dir })
}

/// Hyperbolic distance `acosh(-<p,q>)`, evaluated through the chord
/// `2 asinh(|p-q|/2)` when the points are close.
pub fn h_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    check_same_dim(p.vector(), q.vector())?;
    let c = -p.vector().dot(q.vector());
    let scale = p.vector().max_abs() * q.vector().max_abs();
    if c < 1.0 - DEFAULT_TAU_POINT * scale.max(1.0) {
        return Err(Error::InvalidSeparation(c));
    }
    if c > 2.0 {
        return Ok(c.acosh());
    }
    let chord_sq = (p.vector() - q.vector()).norm_sq().max(0.0);
    Ok(2.0 * (chord_sq.sqrt() / 2.0).asinh())
}

/// Unit-speed geodesic `t ↦ p cosh t + v sinh t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicLine {
    base: HPoint,
    dir: MinkowskiVector,
    /// Second anchor `(q, d(p, q))` for lines built by [`GeodesicLine::through`].
    end: Option<(MinkowskiVector, f64)>,
}

impl GeodesicLine {
    /// Projects `dir` to the tangent space at `base` and normalizes it.
    pub fn new(base: HPoint, dir: &MinkowskiVector) -> Result<Self> {
        let t = project_to_tangent(&base, dir)?;
        let norm = t.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument(
                "geodesic direction has zero tangential part".into(),
            ));
        }
        let dir = t.dir.scale(1.0 / norm);
        Ok(Self { base, dir, end: None })
    }

    /// The geodesic through `p` (at t = 0) and `q` (at t = d(p,q)).
    pub fn through(p: &HPoint, q: &HPoint) -> Result<Self> {
        let d = h_distance(p, q)?;
        if d == 0.0 {
            return Err(Error::CoincidentEndpoints);
        }
        let w = q.vector() - &p.vector().scale(d.cosh());
        let mut line = Self::new(p.clone(), &w)?;
        line.end = Some((q.vector().clone(), d));
        Ok(line)
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn dir(&self) -> &MinkowskiVector {
        &self.dir
    }

    /// Between the anchors of a two-point line this uses
    /// `(sinh(d−t) p + sinh(t) q) / sinh d`, whose coefficients stay in `[0, 1]`.
    pub fn point(&self, t: f64) -> HPoint {
        let v = match &self.end {
            Some((q, d)) if (0.0..=*d).contains(&t) => {
                let s = d.sinh();
                self.base.vector().scale((d - t).sinh() / s).axpy(t.sinh() / s, q)
            }
            _ => self.base.vector().scale(t.cosh()).axpy(t.sinh(), &self.dir),
        };
        // renormalize to suppress drift at large |t|
        HPoint::new(v).expect("geodesic point stays on the upper sheet")
    }

    pub fn velocity(&self, t: f64) -> MinkowskiVector {
        match &self.end {
            Some((q, d)) if (0.0..=*d).contains(&t) => {
                let s = d.sinh();
                self.base.vector().scale(-(d - t).cosh() / s).axpy(t.cosh() / s, q)
            }
            _ => self.base.vector().scale(t.sinh()).axpy(t.cosh(), &self.dir),
        }
    }
}

/// Convenience wrapper matching [`GeodesicLine::point`].
pub fn geodesic_point(g: &GeodesicLine, t: f64) -> HPoint {
    g.point(t)
}

/// Totally geodesic hyperplane `normal^⊥ ∩ ℍⁿ` with `<normal, normal> = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualHyperplane {
    normal: MinkowskiVector,
}

impl DualHyperplane {
    pub fn new(normal: MinkowskiVector) -> Result<Self> {
        let norm = normal.norm_sq();
        if !(norm > 0.0) {
            return Err(Error::NotSpacelike { norm });
        }
        Ok(Self {
            normal: normal.scale(1.0 / norm.sqrt()),
        })
    }

    /// The hyperplane through `g(t)` orthogonal to `g`, co-oriented by `g'(t)`.
    pub fn orthogonal_to(g: &GeodesicLine, t: f64) -> Self {
        Self::new(g.velocity(t)).expect("geodesic velocity is a unit spacelike vector")
    }

    pub fn normal(&self) -> &MinkowskiVector {
        &self.normal
    }

    /// Signed distance from `p` to the plane.
    pub fn signed_distance(&self, p: &HPoint) -> f64 {
        self.normal.dot(p.vector()).asinh()
    }
}

/// Relative position of two hyperplanes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneRelation {
    /// Disjoint or tangent (distance 0) planes.
    Disjoint {
        distance: f64,
    },
    Intersecting,
}

/// Distance `acosh |<n_P, n_Q>|` between disjoint planes; planes whose unit
/// normals have `|<n_P,n_Q>| < 1` intersect.
pub fn dual_plane_distance(p: &DualHyperplane, q: &DualHyperplane) -> Result<PlaneRelation> {
    check_same_dim(&p.normal, &q.normal)?;
    let c = p.normal.dot(&q.normal).abs();
    if c >= 1.0 - DEFAULT_TAU_POINT {
        Ok(PlaneRelation::Disjoint {
            distance: c.max(1.0).acosh(),
        })
    } else {
        Ok(PlaneRelation::Intersecting)
    }
}

/// Inertia of the restriction of the form to a 2-dimensional span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub positive: u8,
    pub negative: u8,
    pub null: u8,
}

/// Signature of the Gram matrix of `{u, v}`, computed from its eigenvalues.
pub fn span_signature(u: &MinkowskiVector, v: &MinkowskiVector, tol: f64) -> Result<Signature> {
    check_same_dim(u, v)?;
    let (a, b, c) = (u.dot(u), u.dot(v), v.dot(v));
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        null: 0,
    };
    for ev in [mean + radius, mean - radius] {
        if ev > tol {
            sig.positive += 1;
        } else if ev < -tol {
            sig.negative += 1;
        } else {
            sig.null += 1;
        }
    }
    Ok(sig)
}

/// Point of the upper half-space model `{x ∈ ℝⁿ : x_n > 0}` with metric
/// `(dx_1² + ... + dx_n²) / x_n²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UHSPoint(Vec<f64>);

impl UHSPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len() + 1));
        }
        let h = coords[coords.len() - 1];
        if !(h > 0.0) {
            return Err(Error::NotInUpperHalfSpace(h));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn height(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

/// Isometry from the upper half-space to the hyperboloid sending
/// `(x, y)` to `(x/y, (|x|²+y²-1)/(2y), (|x|²+y²+1)/(2y))`.
///
/// `(0, ..., 0, 1)` maps to the hyperboloid origin and the point at infinity
/// to the null direction `(0, ..., 0, 1, 1)`.
pub fn uhs_to_hyperboloid(p: &UHSPoint) -> HPoint {
    let n = p.0.len();
    let y = p.height();
    let horiz = &p.0[..n - 1];
    let s: f64 = horiz.iter().map(|x| x * x).sum::<f64>() + y * y;
    let mut v: Vec<f64> = horiz.iter().map(|x| x / y).collect();
    v.push((s - 1.0) / (2.0 * y));
    v.push((s + 1.0) / (2.0 * y));
    HPoint::new(MinkowskiVector(v)).expect("image of the upper half-space lies on the hyperboloid")
}

/// Inverse of [`uhs_to_hyperboloid`].
pub fn hyperboloid_to_uhs(p: &HPoint) -> UHSPoint {
    let c = p.coords();
    let n = c.len() - 1;
    // T - X_{n-1} = 1/y > 0 on the upper sheet
    let y = 1.0 / (c[n] - c[n - 1]);
    let mut out: Vec<f64> = c[..n - 1].iter().map(|x| x * y).collect();
    out.push(y);
    UHSPoint(out)
}

/// Closed-form upper half-space distance `2 asinh(|x - x'| / (2 sqrt(y y')))`.
pub fn uhs_distance(p: &UHSPoint, q: &UHSPoint) -> Result<f64> {
    if p.0.len() != q.0.len() {
        return Err(Error::DimensionMismatch {
            expected: p.0.len(),
            got: q.0.len(),
        });
    }
    let e: f64 = p.0.iter().zip(&q.0).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(2.0 * (e.sqrt() / (2.0 * (p.height() * q.height()).sqrt())).asinh())
}

/// A linear isometry of ℝ^{n,1} preserving the upper sheet (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzMap {
    dim: usize,
    m: Vec<f64>,
}

impl LorentzMap {
    pub fn identity(len: usize) -> Self {
        let mut m = vec![0.0; len * len];
        for i in 0..len {
            m[i * len + i] = 1.0;
        }
        Self { dim: len, m }
    }

    /// Hyperbolic translation by `t` along the spatial axis `axis`.
    pub fn boost(len: usize, axis: usize, t: f64) -> Result<Self> {
        if axis + 1 >= len {
            return Err(Error::IndexOutOfRange {
                index: axis,
                lo: 0,
                hi: len - 1,
            });
        }
        let mut out = Self::identity(len);
        let n = len - 1;
        out.m[axis * len + axis] = t.cosh();
        out.m[axis * len + n] = t.sinh();
        out.m[n * len + axis] = t.sinh();
        out.m[n * len + n] = t.cosh();
        Ok(out)
    }

    /// Rotation by `theta` in the spatial plane `(i, j)`.
    pub fn rotation(len: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        let n = len - 1;
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidArgument(format!(
                "rotation plane ({i}, {j}) must be two distinct spatial axes"
            )));
        }
        let mut out = Self::identity(len);
        let (s, c) = theta.sin_cos();
        out.m[i * len + i] = c;
        out.m[i * len + j] = -s;
        out.m[j * len + i] = s;
        out.m[j * len + j] = c;
        Ok(out)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.m[i * n + k];
                for j in 0..n {
                    m[i * n + j] += a * other.m[k * n + j];
                }
            }
        }
        Self { dim: n, m }
    }

    /// `J Mᵀ J` with `J = diag(1, ..., 1, -1)`.
    pub fn inverse(&self) -> Self {
        let n = self.dim;
        let sign = |i: usize| if i == n - 1 { -1.0 } else { 1.0 };
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = sign(i) * self.m[j * n + i] * sign(j);
            }
        }
        Self { dim: n, m }
    }

    pub fn apply(&self, v: &MinkowskiVector) -> MinkowskiVector {
        let n = self.dim;
        MinkowskiVector(
            (0..n)
                .map(|i| (0..n).map(|j| self.m[i * n + j] * v.0[j]).sum())
                .collect(),
        )
    }

    pub fn apply_point(&self, p: &HPoint) -> HPoint {
        HPoint::new(self.apply(p.vector())).expect("Lorentz maps preserve the upper sheet")
    }
}

/// Closed horoball: the image under `placement` of `{x_n >= level}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Horoball {
    level: f64,
    placement: Option<LorentzMap>,
}

impl Horoball {
    /// `{x_n >= level}` in the upper half-space model.
    pub fn standard(level: f64) -> Result<Self> {
        if !(level > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horoball level must be positive, got {level}"
            )));
        }
        Ok(Self { level, placement: None })
    }

    pub fn placed(level: f64, placement: LorentzMap) -> Result<Self> {
        let mut h = Self::standard(level)?;
        h.placement = Some(placement);
        Ok(h)
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Null vector `ℓ` with the horoball equal to `{p : -<p, ℓ> <= 1}`.
    pub fn null_vector(&self, len: usize) -> MinkowskiVector {
        let mut l = MinkowskiVector::zeros(len);
        l.0[len - 2] = self.level;
        l.0[len - 1] = self.level;
        match &self.placement {
            Some(m) => m.apply(&l),
            None => l,
        }
    }
}

/// Whether `p` lies in the closed horoball `h`.
pub fn horoball_contains(h: &Horoball, p: &UHSPoint) -> bool {
    match &h.placement {
        None => p.height() >= h.level,
        Some(m) => {
            let q = m.inverse().apply_point(&uhs_to_hyperboloid(p));
            hyperboloid_to_uhs(&q).height() >= h.level
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mv(c: &[f64]) -> MinkowskiVector {
        MinkowskiVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn inner_product_basis_values() {
        let x = mv(&[1.0, 0.0, 0.0, 0.0]);
        let t = mv(&[0.0, 0.0, 0.0, 1.0]);
        let null = mv(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(minkowski_inner(&x, &x).unwrap(), 1.0);
        assert_eq!(minkowski_inner(&t, &t).unwrap(), -1.0);
        assert_eq!(minkowski_inner(&null, &null).unwrap(), 0.0);
        assert!(matches!(
            minkowski_inner(&x, &mv(&[1.0, 0.0, 1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_along_unit_geodesic() {
        let p = HPoint::origin(3);
        let q = HPoint::from_coords(vec![1f64.sinh(), 0.0, 0.0, 1f64.cosh()]).unwrap();
        assert_eq!(h_distance(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(h_distance(&p, &q).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn geodesic_point_at_one() {
        let g = GeodesicLine::new(HPoint::origin(3), &mv(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(g.point(0.0), HPoint::origin(3));
        let p = g.point(1.0);
        assert_abs_diff_eq!(p.coords()[0], 1f64.sinh(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.coords()[3], 1f64.cosh(), epsilon = 1e-15);
        for t in [-3.0, -0.25, 1e-6, 2.5, 7.0] {
            let d = h_distance(&g.base, &g.point(t)).unwrap();
            assert_abs_diff_eq!(d, f64::abs(t), epsilon = 1e-10);
        }
    }

    #[test]
    fn projection_cases() {
        let p = HPoint::origin(2);
        let w = mv(&[0.3, -0.2, 0.0]);
        assert_eq!(project_to_tangent(&p, &w).unwrap().dir(), &w);
        let z = project_to_tangent(&p, p.vector()).unwrap();
        assert!(z.dir().max_abs() < 1e-15);
    }

    #[test]
    fn hpoint_rejects_lower_sheet_and_spacelike() {
        assert!(HPoint::from_coords(vec![0.0, 0.0, -1.0]).is_err());
        assert!(HPoint::from_coords(vec![2.0, 0.0, 1.0]).is_err());
        let p = HPoint::from_coords(vec![0.0, 0.0, 2.0]).unwrap();
        assert_eq!(p, HPoint::origin(2));
    }

    #[test]
    fn uhs_basepoint_and_vertical_segment() {
        let base = UHSPoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(uhs_to_hyperboloid(&base), HPoint::origin(3));
        let top = UHSPoint::new(vec![0.0, 0.0, std::f64::consts::E]).unwrap();
        let d = h_distance(&uhs_to_hyperboloid(&base), &uhs_to_hyperboloid(&top)).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        assert!(UHSPoint::new(vec![1.0, 0.0]).is_err());
        assert!(UHSPoint::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn plane_distance_cases() {
        let p = DualHyperplane::new(mv(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let q = DualHyperplane::new(mv(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(
            dual_plane_distance(&p, &p).unwrap(),
            PlaneRelation::Disjoint { distance: 0.0 }
        );
        assert_eq!(dual_plane_distance(&p, &q).unwrap(), PlaneRelation::Intersecting);
        let g = GeodesicLine::new(HPoint::origin(3), &mv(&[0.6, 0.8, 0.0, 0.0])).unwrap();
        for t in [0.5, 1.0, 4.0] {
            let a = DualHyperplane::orthogonal_to(&g, 0.0);
            let b = DualHyperplane::orthogonal_to(&g, t);
            match dual_plane_distance(&a, &b).unwrap() {
                PlaneRelation::Disjoint { distance } => {
                    assert_abs_diff_eq!(distance, t, epsilon = 1e-9)
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(DualHyperplane::new(mv(&[0.0, 0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn horoball_closed_at_level() {
        let h = Horoball::standard(1.0).unwrap();
        assert!(horoball_contains(&h, &UHSPoint::new(vec![0.0, 0.0, 2.0]).unwrap()));
        assert!(!horoball_contains(&h, &UHSPoint::new(vec![0.0, 0.0, 0.5]).unwrap()));
        assert!(horoball_contains(&h, &UHSPoint::new(vec![3.0, -1.0, 1.0]).unwrap()));
        assert!(Horoball::standard(0.0).is_err());
    }

    #[test]
    fn placed_horoball_agrees_with_null_vector() {
        let m = LorentzMap::boost(4, 0, 0.7)
            .unwrap()
            .compose(&LorentzMap::rotation(4, 0, 1, 0.4).unwrap());
        let h = Horoball::placed(1.5, m).unwrap();
        let ell = h.null_vector(4);
        assert!(ell.norm_sq().abs() < 1e-12);
        for (x, y, z) in [(0.1, 0.2, 0.3), (2.0, -1.0, 0.05), (0.0, 0.0, 4.0), (-0.5, 0.5, 1.2)] {
            let p = UHSPoint::new(vec![x, y, z]).unwrap();
            let inside = -uhs_to_hyperboloid(&p).vector().dot(&ell) <= 1.0;
            assert_eq!(horoball_contains(&h, &p), inside);
        }
    }

    #[test]
    fn lorentz_inverse_roundtrip() {
        let m = LorentzMap::boost(3, 1, -1.3)
            .unwrap()
            .compose(&LorentzMap::rotation(3, 0, 1, 2.0).unwrap());
        let id = m.compose(&m.inverse());
        let e = LorentzMap::identity(3);
        for (a, b) in id.m.iter().zip(&e.m) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
