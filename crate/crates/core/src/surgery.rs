//! Exact slope arithmetic for Dehn filling.
//!
//! Homology classes on a boundary torus are integer pairs `(p, q)` in the
//! basis `(m, l)` (meridian, longitude). Cusps are labelled `1..=N`.
//! Everything is arbitrary precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub mod script;

pub use script::{run_script, MoveScript, SLOPESEQN_SCRIPT};

/// An integer homology class `p·m + q·l`, not necessarily primitive or
/// sign-normalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPair {
    pub p: BigInt,
    pub q: BigInt,
}

impl IntPair {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        Self {
            p: p.into(),
            q: q.into(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn gcd(&self) -> BigInt {
        self.p.gcd(&self.q)
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd().is_one()
    }

    pub fn scaled(&self, s: &BigInt) -> Self {
        Self {
            p: &self.p * s,
            q: &self.q * s,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self {
            p: &self.p + &other.p,
            q: &self.q + &other.q,
        }
    }
}

impl fmt::Display for IntPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Algebraic intersection number `a_p b_q - a_q b_p`; `m · l = 1`.
pub fn intersection(a: &IntPair, b: &IntPair) -> BigInt {
    &a.p * &b.q - &a.q * &b.p
}

/// A slope: a primitive class up to sign, normalized to `p > 0` or `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Slope(IntPair);

impl Slope {
    pub fn p(&self) -> &BigInt {
        &self.0.p
    }

    pub fn q(&self) -> &BigInt {
        &self.0.q
    }

    pub fn class(&self) -> &IntPair {
        &self.0
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Picks the representative of `±(p, q)`; fails on non-primitive classes.
pub fn normalize(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Slope> {
    normalize_pair(&IntPair::new(p, q))
}

pub fn normalize_pair(c: &IntPair) -> Result<Slope> {
    if c.is_zero() {
        return Err(Error::InvalidArgument("(0, 0) is not a slope".into()));
    }
    if !c.is_primitive() {
        return Err(Error::NotPrimitive {
            p: c.p.to_string(),
            q: c.q.to_string(),
        });
    }
    if c.p.is_negative() || (c.p.is_zero() && c.q.is_negative()) {
        Ok(Slope(IntPair::new(-&c.p, -&c.q)))
    } else {
        Ok(Slope(c.clone()))
    }
}

/// Slope with an orbifold order `d >= 1`; `d = 1` is ordinary filling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedSlope {
    pub d: u64,
    pub slope: Slope,
}

/// One boundary component's filling. The class is kept exactly as the move
/// calculus produced it; see [`FillingEntry::normalized`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FillingEntry {
    Filled { d: u64, class: IntPair },
    Unfilled,
}

impl FillingEntry {
    pub fn filled(class: IntPair) -> Self {
        FillingEntry::Filled { d: 1, class }
    }

    pub fn normalized(&self) -> Result<Option<GeneralizedSlope>> {
        match self {
            FillingEntry::Unfilled => Ok(None),
            FillingEntry::Filled { d, class } => Ok(Some(GeneralizedSlope {
                d: *d,
                slope: normalize_pair(class)?,
            })),
        }
    }
}

/// Filling instructions for every boundary torus, in cusp order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillingSpec {
    pub entries: Vec<FillingEntry>,
}

impl FillingSpec {
    /// Same spec with every class sign-normalized.
    pub fn normalized(&self) -> Result<FillingSpec> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                e.normalized().map(|g| match g {
                    None => FillingEntry::Unfilled,
                    Some(g) => FillingEntry::Filled {
                        d: g.d,
                        class: g.slope.0,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FillingSpec { entries })
    }
}

fn format_entry(e: &FillingEntry) -> String {
    match e {
        FillingEntry::Unfilled => "∞".to_string(),
        FillingEntry::Filled { d, class } => class.scaled(&BigInt::from(*d)).to_string(),
    }
}

/// `M(dp,dq)` for one cusp, `M((dp₁,dq₁),…,∞,…)` otherwise.
pub fn format_filling(spec: &FillingSpec) -> String {
    match spec.entries.as_slice() {
        [FillingEntry::Filled { d, class }] => {
            let s = class.scaled(&BigInt::from(*d));
            format!("M({},{})", s.p, s.q)
        }
        entries => {
            let parts: Vec<String> = entries.iter().map(format_entry).collect();
            format!("M({})", parts.join(","))
        }
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .replace('−', "-")
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

fn entry_from_multiple(a: BigInt, b: BigInt) -> Result<FillingEntry> {
    let class = IntPair::new(a, b);
    if class.is_zero() {
        return Err(Error::Parse("(0,0) is not a filling".into()));
    }
    let d = class.gcd();
    let d_small = d
        .to_u64()
        .ok_or_else(|| Error::Parse(format!("orbifold order {d} too large")))?;
    Ok(FillingEntry::Filled {
        d: d_small,
        class: IntPair::new(&class.p / &d, &class.q / &d),
    })
}

fn parse_pair(s: &str) -> Result<FillingEntry> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected 'p,q', got {s:?}")))?;
    entry_from_multiple(parse_int(a)?, parse_int(b)?)
}

/// Inverse of [`format_filling`]; the orbifold order is recovered as the gcd.
pub fn parse_filling(text: &str) -> Result<FillingSpec> {
    let inner = text
        .trim()
        .strip_prefix("M(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected M(...), got {text:?}")))?
        .trim();
    let is_inf = |s: &str| matches!(s.trim(), "∞" | "inf");
    if is_inf(inner) {
        return Ok(FillingSpec {
            entries: vec![FillingEntry::Unfilled],
        });
    }
    if !inner.contains(['(', '∞']) && !inner.contains("inf") {
        return Ok(FillingSpec {
            entries: vec![parse_pair(inner)?],
        });
    }
    let mut entries = Vec::new();
    let mut rest = inner;
    loop {
        rest = rest.trim_start();
        if let Some(after) = rest.strip_prefix('(') {
            let close = after
                .find(')')
                .ok_or_else(|| Error::Parse("unbalanced parenthesis".into()))?;
            entries.push(parse_pair(&after[..close])?);
            rest = &after[close + 1..];
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            if !is_inf(&rest[..end]) {
                return Err(Error::Parse(format!("unexpected entry {:?}", &rest[..end])));
            }
            entries.push(FillingEntry::Unfilled);
            rest = &rest[end..];
        }
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest
            .strip_prefix(',')
            .ok_or_else(|| Error::Parse(format!("expected ',' before {rest:?}")))?;
    }
    Ok(FillingSpec { entries })
}

/// Reference basis `(m_i, l_i)` of each cusp together with the current
/// curves bounding meridian disks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspState {
    meridians: Vec<IntPair>,
    longitudes: Vec<IntPair>,
}

impl CuspState {
    /// Every cusp starts at its standard basis `m = (1,0)`, `l = (0,1)`.
    pub fn standard(cusps: usize) -> Self {
        Self {
            meridians: vec![IntPair::new(1, 0); cusps],
            longitudes: vec![IntPair::new(0, 1); cusps],
        }
    }

    /// Requires `|m_i · l_i| = 1` on every cusp.
    pub fn new(meridians: Vec<IntPair>, longitudes: Vec<IntPair>) -> Result<Self> {
        if meridians.len() != longitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: meridians.len(),
                got: longitudes.len(),
            });
        }
        for (k, (m, l)) in meridians.iter().zip(&longitudes).enumerate() {
            if !intersection(m, l).abs().is_one() {
                return Err(Error::InvalidArgument(format!(
                    "cusp {}: {m} and {l} do not form a basis",
                    k + 1
                )));
            }
        }
        Ok(Self { meridians, longitudes })
    }

    pub fn cusps(&self) -> usize {
        self.meridians.len()
    }

    /// Current meridian-disk boundary on cusp `i` (1-based).
    pub fn meridian(&self, i: usize) -> &IntPair {
        &self.meridians[i - 1]
    }

    pub fn meridians(&self) -> &[IntPair] {
        &self.meridians
    }

    pub fn longitudes(&self) -> &[IntPair] {
        &self.longitudes
    }

    fn check_index(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.cusps() {
            return Err(Error::IndexOutOfRange {
                index: i,
                lo: 1,
                hi: self.cusps() + 1,
            });
        }
        Ok(i - 1)
    }

    /// Ordinary filling along the current meridians, with the listed cusps
    /// (1-based) left unfilled.
    pub fn filling(&self, unfilled: &[usize]) -> Result<FillingSpec> {
        for &u in unfilled {
            self.check_index(u)?;
        }
        let entries = self
            .meridians
            .iter()
            .enumerate()
            .map(|(k, m)| {
                if unfilled.contains(&(k + 1)) {
                    FillingEntry::Unfilled
                } else {
                    FillingEntry::filled(m.clone())
                }
            })
            .collect();
        Ok(FillingSpec { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwistKind {
    /// Twist along an annulus meeting cusp `i` in `x_i` and cusp `j` in `x_j`.
    Annulus {
        i: usize,
        j: usize,
        xi: IntPair,
        xj: IntPair,
    },
    /// Twist along a disk bounded by cusp `i`'s core.
    Disk { i: usize },
}

/// `r` iterates of a twist; the sign of `r` is the direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistMove {
    pub kind: TwistKind,
    pub r: BigInt,
}

impl TwistMove {
    pub fn annulus(i: usize, j: usize, xi: IntPair, xj: IntPair, r: impl Into<BigInt>) -> Self {
        Self {
            kind: TwistKind::Annulus { i, j, xi, xj },
            r: r.into(),
        }
    }

    pub fn disk(i: usize, r: impl Into<BigInt>) -> Self {
        Self {
            kind: TwistKind::Disk { i },
            r: r.into(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            r: -&self.r,
        }
    }

    /// Cusps (1-based) whose meridian the move can change.
    pub fn support(&self) -> Vec<usize> {
        match &self.kind {
            TwistKind::Annulus { i, j, .. } => vec![*i, *j],
            TwistKind::Disk { i } => vec![*i],
        }
    }
}

/// Annulus: `m_i ↦ m_i + r (x_i·m_i) x_i`, `m_j ↦ m_j - r (x_j·m_j) x_j`.
/// Disk: `m_i ↦ m_i + r l_i`.
pub fn apply_twist(state: &CuspState, mv: &TwistMove) -> Result<CuspState> {
    let mut out = state.clone();
    match &mv.kind {
        TwistKind::Annulus { i, j, xi, xj } => {
            let (a, b) = (state.check_index(*i)?, state.check_index(*j)?);
            if a == b {
                return Err(Error::InvalidArgument(format!("annulus joins cusp {i} to itself")));
            }
            for x in [xi, xj] {
                if !x.is_primitive() {
                    return Err(Error::NotPrimitive {
                        p: x.p.to_string(),
                        q: x.q.to_string(),
                    });
                }
            }
            let mi = &state.meridians[a];
            let mj = &state.meridians[b];
            out.meridians[a] = mi.plus(&xi.scaled(&(&mv.r * intersection(xi, mi))));
            out.meridians[b] = mj.plus(&xj.scaled(&(-&mv.r * intersection(xj, mj))));
        }
        TwistKind::Disk { i } => {
            let a = state.check_index(*i)?;
            out.meridians[a] = state.meridians[a].plus(&state.longitudes[a].scaled(&mv.r));
        }
    }
    Ok(out)
}

/// Twist sequence on ten cusps producing
/// `((1+r1,-r1),(1,-r2),(1-r1,r1),(1,r2),(1,r3),(1,r4),(1,-r3-1),(1,-r4),(1,r5),∞)`
/// from the all-meridian filling. `r` is the disk-7 iterate and must equal
/// `-r3 - 1`.
pub fn reproduce_slopeseqn(rs: &[BigInt; 5], r: &BigInt) -> Result<FillingSpec> {
    let script = MoveScript::from_json(SLOPESEQN_SCRIPT)?;
    let names = ["r1", "r2", "r3", "r4", "r5"];
    let mut overrides: Vec<(String, BigInt)> = names.iter().zip(rs).map(|(n, v)| (n.to_string(), v.clone())).collect();
    overrides.push(("r".to_string(), r.clone()));
    run_script(&script, &overrides)
}

/// Number of components of the preimage of a curve with linking number `lk`
/// with the branch locus, in the `p`-fold cyclic cover branched over an
/// unknot: `gcd(p, |lk|)`, with `gcd(p, 0) = p`.
pub fn branched_cover_components(p: u64, lk: i64) -> Result<u64> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("cover degree must be >= 2, got {p}")));
    }
    Ok(p.gcd(&lk.unsigned_abs()))
}

/// Genus of the `p`-fold cyclic cover of a closed genus-`base_genus` surface
/// fully branched over `branch_points` points:
/// `χ = p(2 - 2g) - b(p - 1)`, genus `(2 - χ)/2`.
pub fn riemann_hurwitz_genus(p: u64, base_genus: u64, branch_points: u64) -> Result<BigInt> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("cover degree must be >= 2, got {p}")));
    }
    let p = BigInt::from(p);
    let chi = &p * (BigInt::from(2) - BigInt::from(2) * BigInt::from(base_genus))
        - BigInt::from(branch_points) * (&p - BigInt::one());
    let twice_genus: BigInt = BigInt::from(2) - chi;
    if twice_genus.is_odd() {
        return Err(Error::InvalidArgument(
            "Euler characteristic of the cover is odd".into(),
        ));
    }
    let genus = twice_genus / BigInt::from(2);
    if genus.is_negative() {
        return Err(Error::InvalidArgument(format!("inconsistent data: genus {genus}")));
    }
    Ok(genus)
}

/// Order of a cone point, or a puncture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeOrder {
    Finite(u64),
    Infinite,
}

impl std::str::FromStr for ConeOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "∞" | "inf" | "infinity" => Ok(ConeOrder::Infinite),
            t => t
                .parse::<u64>()
                .map(ConeOrder::Finite)
                .map_err(|_| Error::Parse(format!("not a cone order: {s:?}"))),
        }
    }
}

impl fmt::Display for ConeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeOrder::Finite(n) => write!(f, "{n}"),
            ConeOrder::Infinite => write!(f, "∞"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbifoldGeometry {
    Hyperbolic,
    Euclidean,
    Spherical,
}

/// Compares `1/p1 + 1/p2 + 1/p3` with 1 exactly (`1/∞ = 0`).
pub fn triangle_orbifold_geometry(orders: [ConeOrder; 3]) -> Result<OrbifoldGeometry> {
    let finite: Vec<BigInt> = orders
        .iter()
        .filter_map(|o| match o {
            ConeOrder::Finite(n) => Some(*n),
            ConeOrder::Infinite => None,
        })
        .map(|n| {
            if n < 2 {
                Err(Error::InvalidArgument(format!("cone order must be >= 2, got {n}")))
            } else {
                Ok(BigInt::from(n))
            }
        })
        .collect::<Result<_>>()?;
    let denom: BigInt = finite.iter().product();
    let numer: BigInt = (0..finite.len())
        .map(|k| {
            finite
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, v)| v)
                .product::<BigInt>()
        })
        .sum();
    Ok(match numer.cmp(&denom) {
        std::cmp::Ordering::Less => OrbifoldGeometry::Hyperbolic,
        std::cmp::Ordering::Equal => OrbifoldGeometry::Euclidean,
        std::cmp::Ordering::Greater => OrbifoldGeometry::Spherical,
    })
}
