//! Distance-to-boundary calculus for the supported bounded domains.
//!
//! Every domain variant has closed forms for `d`, `∇d` and `−Δd` away from its ridge
//! (the set where the nearest boundary point is not unique). A central
//! finite-difference path is kept alongside for cross-checking.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance on the minimum of `−Δd` for a PASS verdict.
pub const TOL_GEOM: f64 = 1e-6;
/// Two boundary features closer than this in distance make a point a ridge point.
pub const RIDGE_TOL: f64 = 1e-9;
/// Relative default finite-difference step, multiplied by the interior diameter.
pub const FD_STEP_FACTOR: f64 = 1e-4;

const MEMBERSHIP_TOL: f64 = 1e-12;

/// A bounded domain `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    /// Counterclockwise vertex list of a convex polygon.
    ConvexPolygon { vertices: Vec<[f64; 2]> },
    Disc { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], r_in: f64, r_out: f64 },
    /// Solid torus around the z-axis: core circle of radius `major` (c), tube radius `minor` (R).
    Torus { major: f64, minor: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    FiniteDifference,
}

/// `d`, `∇d` and `−Δd` at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEval {
    pub d: f64,
    /// Unit gradient (padded to three components). Meaningless when `near_ridge`.
    pub grad: [f64; 3],
    pub neg_laplacian: f64,
    pub provenance: Provenance,
    /// The nearest boundary point is not unique within [`RIDGE_TOL`].
    pub near_ridge: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanRegion {
    /// The closed domain.
    Full,
    /// `{0 ≤ d < δ}`.
    Tubular { delta: f64 },
    /// `{0 ≤ d < δ}` but scanning the distance to the boundary of the tube itself.
    TubeSelf { delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperharmonicityReport {
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub verdict: Verdict,
    pub resolution: usize,
    pub tolerance: f64,
    pub region: ScanRegion,
    pub points_evaluated: usize,
    pub ridge_points_skipped: usize,
}

fn norm2(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = Domain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(center: [f64; 2], radius: f64) -> Result<Self> {
        let d = Domain::Disc { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn annulus(center: [f64; 2], r_in: f64, r_out: f64) -> Result<Self> {
        let d = Domain::Annulus { center, r_in, r_out };
        d.validate()?;
        Ok(d)
    }

    pub fn convex_polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let d = Domain::ConvexPolygon { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::convex_polygon(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        let d = Domain::Torus { major, minor };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDomain(m.to_string()));
        match self {
            Domain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad("interval needs a < b");
                }
            }
            Domain::ConvexPolygon { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least 3 vertices");
                }
                let n = vertices.len();
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let r = vertices[(i + 2) % n];
                    if norm2([q[0] - p[0], q[1] - p[1]]) == 0.0 {
                        return bad("polygon has a repeated vertex");
                    }
                    let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
                    if cross < 0.0 {
                        return bad("polygon vertices must be counterclockwise and convex");
                    }
                }
                if shoelace(vertices) <= 0.0 {
                    return bad("polygon has non-positive area");
                }
            }
            Domain::Disc { radius, .. } => {
                if !(*radius > 0.0) {
                    return bad("disc radius must be positive");
                }
            }
            Domain::Annulus { r_in, r_out, .. } => {
                if !(*r_in > 0.0 && r_in < r_out) {
                    return bad("annulus needs 0 < r_in < r_out");
                }
            }
            Domain::Torus { major, minor } => {
                if !(*minor > 0.0 && minor < major) {
                    return bad("torus needs 0 < R < c");
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::ConvexPolygon { .. } | Domain::Disc { .. } | Domain::Annulus { .. } => 2,
            Domain::Torus { .. } => 3,
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            Domain::Interval { .. } | Domain::ConvexPolygon { .. } | Domain::Disc { .. }
        )
    }

    /// Whether ∂Ω is C² (polygons are not; an interval's boundary is two points).
    pub fn has_c2_boundary(&self) -> bool {
        !matches!(self, Domain::ConvexPolygon { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Interval { .. } => "interval",
            Domain::ConvexPolygon { .. } => "convex_polygon",
            Domain::Disc { .. } => "disc",
            Domain::Annulus { .. } => "annulus",
            Domain::Torus { .. } => "torus",
        }
    }

    /// Usual (Euclidean) diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::ConvexPolygon { vertices } => {
                let mut best: f64 = 0.0;
                for p in vertices {
                    for q in vertices {
                        best = best.max(norm2([p[0] - q[0], p[1] - q[1]]));
                    }
                }
                best
            }
            Domain::Disc { radius, .. } => 2.0 * radius,
            Domain::Annulus { r_out, .. } => 2.0 * r_out,
            Domain::Torus { major, minor } => 2.0 * (major + minor),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` in the domain's own dimension.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { a, b } => (vec![*a], vec![*b]),
            Domain::ConvexPolygon { vertices } => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Domain::Disc { center, radius } => (
                vec![center[0] - radius, center[1] - radius],
                vec![center[0] + radius, center[1] + radius],
            ),
            Domain::Annulus { center, r_out, .. } => (
                vec![center[0] - r_out, center[1] - r_out],
                vec![center[0] + r_out, center[1] + r_out],
            ),
            Domain::Torus { major, minor } => {
                let e = major + minor;
                (vec![-e, -e, -minor], vec![e, e, *minor])
            }
        }
    }
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

/// Inward unit normal and offset of each polygon edge: `n·x − c ≥ 0` inside.
pub(crate) fn polygon_halfplanes(vertices: &[[f64; 2]]) -> Vec<([f64; 2], f64)> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let e = [q[0] - p[0], q[1] - p[1]];
            let len = norm2(e);
            let nrm = [-e[1] / len, e[0] / len];
            (nrm, nrm[0] * p[0] + nrm[1] * p[1])
        })
        .collect()
}

fn to3(p: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, v) in out.iter_mut().zip(p) {
        *o = *v;
    }
    out
}

fn check_dim(domain: &Domain, p: &[f64]) -> Result<()> {
    if p.len() != domain.dimension() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, domain is {}-dimensional",
            p.len(),
            domain.dimension()
        )));
    }
    Ok(())
}

/// Signed distance, positive inside, together with analytic derivative data.
fn analytic(domain: &Domain, p: [f64; 3]) -> (f64, [f64; 3], f64, bool) {
    match domain {
        Domain::Interval { a, b } => {
            let (l, r) = (p[0] - a, b - p[0]);
            let ridge = (l - r).abs() <= RIDGE_TOL;
            if l <= r {
                (l, [1.0, 0.0, 0.0], 0.0, ridge)
            } else {
                (r, [-1.0, 0.0, 0.0], 0.0, ridge)
            }
        }
        Domain::Disc { center, radius } => {
            let v = [p[0] - center[0], p[1] - center[1]];
            let rho = norm2(v);
            if rho <= RIDGE_TOL {
                return (radius - rho, [0.0; 3], f64::INFINITY, true);
            }
            (radius - rho, [-v[0] / rho, -v[1] / rho, 0.0], 1.0 / rho, false)
        }
        Domain::Annulus { center, r_in, r_out } => {
            let v = [p[0] - center[0], p[1] - center[1]];
            let rho = norm2(v);
            let (din, dout) = (rho - r_in, r_out - rho);
            let ridge = (din - dout).abs() <= RIDGE_TOL;
            if rho == 0.0 {
                return (din, [0.0; 3], f64::NAN, true);
            }
            let e = [v[0] / rho, v[1] / rho, 0.0];
            if dout <= din {
                (dout, [-e[0], -e[1], 0.0], 1.0 / rho, ridge)
            } else {
                (din, e, -1.0 / rho, ridge)
            }
        }
        Domain::ConvexPolygon { vertices } => {
            let hp = polygon_halfplanes(vertices);
            let mut best = f64::INFINITY;
            let mut second = f64::INFINITY;
            let mut grad = [0.0; 3];
            for (nrm, c) in &hp {
                let s = nrm[0] * p[0] + nrm[1] * p[1] - c;
                if s < best {
                    second = best;
                    best = s;
                    grad = [nrm[0], nrm[1], 0.0];
                } else if s < second {
                    second = s;
                }
            }
            (best, grad, 0.0, (second - best).abs() <= RIDGE_TOL)
        }
        Domain::Torus { major, minor } => {
            let (c, big_r) = (*major, *minor);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let rho = ((r - c).powi(2) + p[2] * p[2]).sqrt();
            let d = big_r - rho;
            if rho <= RIDGE_TOL || r == 0.0 {
                return (d, [0.0; 3], f64::INFINITY, true);
            }
            let dr = (r - c) / rho;
            let grad = [-dr * p[0] / r, -dr * p[1] / r, -p[2] / rho];
            (d, grad, (2.0 * r - c) / (r * rho), false)
        }
    }
}

/// Signed distance to ∂Ω, positive inside. Defined everywhere.
pub fn signed_distance(domain: &Domain, p: &[f64]) -> f64 {
    analytic(domain, to3(p)).0
}

/// Exact Euclidean distance from `p` to ∂Ω.
pub fn distance(domain: &Domain, p: &[f64]) -> Result<f64> {
    check_dim(domain, p)?;
    let s = signed_distance(domain, p);
    let scale = domain.diameter().max(1.0);
    if s < -MEMBERSHIP_TOL * scale {
        return Err(Error::PointOutsideDomain {
            point: p.to_vec(),
            signed_distance: s,
        });
    }
    Ok(s.max(0.0))
}

/// `d`, `∇d`, `−Δd` from the closed forms available for every variant.
///
/// `h` is only consulted by the finite-difference path ([`distance_calculus_fd`]).
pub fn distance_calculus(domain: &Domain, p: &[f64], _h: f64) -> Result<DistanceEval> {
    let d = distance(domain, p)?;
    let (_, grad, lap, ridge) = analytic(domain, to3(p));
    Ok(DistanceEval {
        d,
        grad,
        neg_laplacian: lap,
        provenance: Provenance::Analytic,
        near_ridge: ridge,
    })
}

/// Default finite-difference step `1e-4 · D_int`.
pub fn default_fd_step(domain: &Domain) -> f64 {
    FD_STEP_FACTOR * interior_diameter(domain)
}

/// Second-order central differences of the exact distance with step `h`.
pub fn distance_calculus_fd(domain: &Domain, p: &[f64], h: f64) -> Result<DistanceEval> {
    let d = distance(domain, p)?;
    if d <= 2.0 * h {
        return Err(Error::TooCloseToBoundary { d, h });
    }
    let n = domain.dimension();
    let mut grad = [0.0; 3];
    let mut lap = 0.0;
    let mut q = p.to_vec();
    for k in 0..n {
        q[k] = p[k] + h;
        let fp = signed_distance(domain, &q);
        q[k] = p[k] - h;
        let fm = signed_distance(domain, &q);
        q[k] = p[k];
        grad[k] = (fp - fm) / (2.0 * h);
        lap += (fp - 2.0 * d + fm) / (h * h);
    }
    let ridge = analytic(domain, to3(p)).3;
    Ok(DistanceEval {
        d,
        grad,
        neg_laplacian: -lap,
        provenance: Provenance::FiniteDifference,
        near_ridge: ridge,
    })
}

/// Distance to the boundary of the tube `Ω_δ = {d < δ}` itself:
/// `d` on the outer half and `δ − d` on the inner half.
pub fn tube_self_distance(domain: &Domain, delta: f64, p: &[f64]) -> Result<DistanceEval> {
    let mut e = distance_calculus(domain, p, 0.0)?;
    if e.d >= delta {
        return Err(Error::PointOutsideDomain {
            point: p.to_vec(),
            signed_distance: delta - e.d,
        });
    }
    if e.d >= 0.5 * delta {
        e.d = delta - e.d;
        e.grad = [-e.grad[0], -e.grad[1], -e.grad[2]];
        e.neg_laplacian = -e.neg_laplacian;
        e.near_ridge |= (e.d - 0.5 * delta).abs() <= RIDGE_TOL;
    }
    Ok(e)
}

/// Largest inscribed disc of a convex polygon, `(center, radius)`, by linear
/// programming over the edge half-planes (`max t` s.t. `n_i·x − c_i ≥ t`).
pub fn chebyshev_disc(vertices: &[[f64; 2]]) -> ([f64; 2], f64) {
    let hp = polygon_halfplanes(vertices);
    let m = hp.len();
    let mut best = ([0.0, 0.0], f64::NEG_INFINITY);
    // The LP optimum sits at a vertex of the feasible polytope in (x, y, t):
    // three active constraints n_i·x − t = c_i.
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let rows = [hp[i], hp[j], hp[k]];
                let a = nalgebra::Matrix3::new(
                    rows[0].0[0], rows[0].0[1], -1.0,
                    rows[1].0[0], rows[1].0[1], -1.0,
                    rows[2].0[0], rows[2].0[1], -1.0,
                );
                let rhs = nalgebra::Vector3::new(rows[0].1, rows[1].1, rows[2].1);
                let Some(sol) = a.lu().solve(&rhs) else { continue };
                if !sol.iter().all(|v| v.is_finite()) {
                    continue;
                }
                let (x, y, t) = (sol[0], sol[1], sol[2]);
                let feasible = hp
                    .iter()
                    .all(|(n, c)| n[0] * x + n[1] * y - c >= t - 1e-12 * (1.0 + t.abs()));
                if feasible && t > best.1 {
                    best = ([x, y], t);
                }
            }
        }
    }
    best
}

/// `D_int = 2 sup d`.
pub fn interior_diameter(domain: &Domain) -> f64 {
    match domain {
        Domain::Interval { a, b } => b - a,
        Domain::Disc { radius, .. } => 2.0 * radius,
        Domain::Annulus { r_in, r_out, .. } => r_out - r_in,
        Domain::Torus { minor, .. } => 2.0 * minor,
        Domain::ConvexPolygon { vertices } => 2.0 * chebyshev_disc(vertices).1,
    }
}

/// `sup d` over Ω.
pub fn max_distance(domain: &Domain) -> f64 {
    0.5 * interior_diameter(domain)
}

/// Lebesgue measure of Ω in its own dimension.
pub fn volume(domain: &Domain) -> f64 {
    match domain {
        Domain::Interval { a, b } => b - a,
        Domain::ConvexPolygon { vertices } => shoelace(vertices),
        Domain::Disc { radius, .. } => PI * radius * radius,
        Domain::Annulus { r_in, r_out, .. } => PI * (r_out * r_out - r_in * r_in),
        Domain::Torus { major, minor } => 2.0 * PI * PI * major * minor * minor,
    }
}

/// Grid scan of `−Δd` over a region; PASS iff the minimum is `≥ −TOL_GEOM`.
///
/// The grid has `resolution` intervals per axis of the bounding box and includes the
/// boundary, where the closed form of `−Δd` extends continuously. Ridge points are
/// skipped. The torus is scanned on its `(r, z)` cross-section, which loses nothing
/// because `−Δd` is invariant under rotation about the axis.
pub fn superharmonicity_scan(
    domain: &Domain,
    region: ScanRegion,
    resolution: usize,
) -> Result<SuperharmonicityReport> {
    if resolution < 8 {
        return Err(Error::InvalidArgument(format!(
            "scan resolution {resolution} is below the minimum of 8"
        )));
    }
    let (lo, hi, to_point): (Vec<f64>, Vec<f64>, Box<dyn Fn(&[f64]) -> Vec<f64>>) = match domain {
        Domain::Torus { major, minor } => (
            vec![major - minor, -minor],
            vec![major + minor, *minor],
            Box::new(|g: &[f64]| vec![g[0], 0.0, g[1]]),
        ),
        _ => {
            let (lo, hi) = domain.bounding_box();
            (lo, hi, Box::new(|g: &[f64]| g.to_vec()))
        }
    };
    let dim = lo.len();
    let scale = domain.diameter().max(1.0);
    let total = (resolution + 1).pow(dim as u32);
    let mut min_value = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut evaluated = 0;
    let mut skipped = 0;
    let mut g = vec![0.0; dim];
    for idx in 0..total {
        let mut rem = idx;
        for k in 0..dim {
            let i = rem % (resolution + 1);
            rem /= resolution + 1;
            g[k] = lo[k] + (hi[k] - lo[k]) * i as f64 / resolution as f64;
        }
        let p = to_point(&g);
        let (s, _, lap, ridge) = analytic(domain, to3(&p));
        if s < -MEMBERSHIP_TOL * scale {
            continue;
        }
        let value = match region {
            ScanRegion::Full => lap,
            ScanRegion::Tubular { delta } => {
                if s >= delta {
                    continue;
                }
                lap
            }
            ScanRegion::TubeSelf { delta } => {
                if s >= delta {
                    continue;
                }
                if (s - 0.5 * delta).abs() <= RIDGE_TOL {
                    skipped += 1;
                    continue;
                }
                if s < 0.5 * delta {
                    lap
                } else {
                    -lap
                }
            }
        };
        if ridge || !value.is_finite() {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        if value < min_value {
            min_value = value;
            argmin = p;
        }
    }
    if evaluated == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(SuperharmonicityReport {
        min_value,
        argmin,
        verdict: if min_value >= -TOL_GEOM { Verdict::Pass } else { Verdict::Fail },
        resolution,
        tolerance: TOL_GEOM,
        region,
        points_evaluated: evaluated,
        ridge_points_skipped: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use proptest::test_runner::TestCaseError;

    #[test]
    fn closed_form_distances() {
        let i = Domain::interval(0.0, 1.0).unwrap();
        assert_relative_eq!(distance(&i, &[0.3]).unwrap(), 0.3, epsilon = 1e-15);
        let d = Domain::disc([0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(distance(&d, &[0.5, 0.0]).unwrap(), 0.5, epsilon = 1e-15);
        let a = Domain::annulus([1.0, 1.0], 1.0, 2.0).unwrap();
        assert_relative_eq!(distance(&a, &[2.2, 1.0]).unwrap(), 0.2, epsilon = 1e-12);
        assert_relative_eq!(distance(&a, &[2.9, 1.0]).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn torus_distance_matches_brute_force_boundary_sampling() {
        // Oracle: minimum over 10^6 points of the torus surface.
        let t = Domain::torus(3.0, 1.0).unwrap();
        let p = [3.5, 0.0, 0.0];
        let n = 1000;
        let mut best = f64::INFINITY;
        for i in 0..n {
            let phi = 2.0 * PI * i as f64 / n as f64;
            for j in 0..n {
                let th = 2.0 * PI * j as f64 / n as f64;
                let r = 3.0 + th.cos();
                let q = [r * phi.cos(), r * phi.sin(), th.sin()];
                let dist = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                best = best.min(dist);
            }
        }
        let d = distance(&t, &p).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-15);
        assert!((best - d).abs() < 1e-4);
    }

    #[test]
    fn outside_points_are_rejected() {
        let i = Domain::interval(0.0, 1.0).unwrap();
        assert!(matches!(distance(&i, &[1.5]), Err(Error::PointOutsideDomain { .. })));
        let t = Domain::torus(3.0, 1.0).unwrap();
        assert!(matches!(distance(&t, &[0.0, 0.0, 0.0]), Err(Error::PointOutsideDomain { .. })));
        assert!(matches!(distance(&t, &[1.0, 0.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::interval(1.0, 0.0).is_err());
        assert!(Domain::disc([0.0, 0.0], 0.0).is_err());
        assert!(Domain::annulus([0.0, 0.0], 2.0, 1.0).is_err());
        assert!(Domain::torus(1.0, 1.0).is_err());
        // clockwise square
        assert!(Domain::convex_polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        // non-convex
        assert!(Domain::convex_polygon(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]]).is_err());
        assert!(Domain::convex_polygon(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn calculus_examples() {
        let i = Domain::interval(0.0, 1.0).unwrap();
        let e = distance_calculus(&i, &[0.3], 1e-4).unwrap();
        assert_eq!(e.grad[0], 1.0);
        assert_eq!(e.neg_laplacian, 0.0);
        assert!(!e.near_ridge);
        assert!(distance_calculus(&i, &[0.5], 1e-4).unwrap().near_ridge);

        let d = Domain::disc([0.0, 0.0], 1.0).unwrap();
        let e = distance_calculus(&d, &[0.3, 0.4], 1e-4).unwrap();
        assert_relative_eq!(e.neg_laplacian, 2.0, epsilon = 1e-14);
        assert!(distance_calculus(&d, &[0.0, 0.0], 1e-4).unwrap().near_ridge);

        let t = Domain::torus(3.0, 1.0).unwrap();
        let e = distance_calculus(&t, &[3.5, 0.0, 0.0], 1e-4).unwrap();
        assert_relative_eq!(e.neg_laplacian, (2.0 * 3.5 - 3.0) / (3.5 * 0.5), epsilon = 1e-14);
        assert_relative_eq!(e.neg_laplacian, 2.2857142857142856, epsilon = 1e-12);
    }

    #[test]
    fn torus_closed_form_agrees_with_finite_differences() {
        // d = R − ρ, so −Δd = Δρ = ρ_rr + ρ_r / r + ρ_zz = 1/ρ + (r − c)/(rρ) = (2r − c)/(rρ).
        let t = Domain::torus(3.0, 1.0).unwrap();
        let p = [3.5, 0.0, 0.0];
        let fd = distance_calculus_fd(&t, &p, 1e-4).unwrap();
        let an = distance_calculus(&t, &p, 1e-4).unwrap();
        assert!((fd.neg_laplacian - an.neg_laplacian).abs() < 1e-6);
        assert_eq!(fd.provenance, Provenance::FiniteDifference);
    }

    #[test]
    fn fd_rejects_points_near_the_boundary() {
        let d = Domain::disc([0.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            distance_calculus_fd(&d, &[0.99995, 0.0], 1e-4),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn polygon_distance_and_ridge() {
        let sq = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let e = distance_calculus(&sq, &[0.2, 0.5], 1e-4).unwrap();
        assert_relative_eq!(e.d, 0.2, epsilon = 1e-15);
        assert_relative_eq!(e.grad[0], 1.0, epsilon = 1e-15);
        assert!(distance_calculus(&sq, &[0.3, 0.3], 1e-4).unwrap().near_ridge);
    }

    #[test]
    fn diameters_and_volumes() {
        assert_eq!(interior_diameter(&Domain::interval(0.0, 1.0).unwrap()), 1.0);
        assert_eq!(interior_diameter(&Domain::disc([0.0, 0.0], 1.0).unwrap()), 2.0);
        assert_eq!(interior_diameter(&Domain::torus(3.0, 1.0).unwrap()), 2.0);
        assert_eq!(interior_diameter(&Domain::annulus([0.0, 0.0], 1.0, 3.0).unwrap()), 2.0);
        let sq = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(interior_diameter(&sq), 1.0, epsilon = 1e-12);
        let tri = Domain::convex_polygon(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        // inradius of the 3-4-5 triangle is (3 + 4 − 5)/2 = 1
        let (c, r) = chebyshev_disc(match &tri {
            Domain::ConvexPolygon { vertices } => vertices,
            _ => unreachable!(),
        });
        assert_relative_eq!(r, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(c[1], 1.0, epsilon = 1e-12);

        assert_relative_eq!(volume(&Domain::disc([0.0, 0.0], 1.0).unwrap()), PI, epsilon = 1e-15);
        assert_relative_eq!(volume(&Domain::torus(3.0, 1.0).unwrap()), 59.21762640653615, epsilon = 1e-10);
        assert_relative_eq!(volume(&sq), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn torus_scan_examples() {
        // Analytic minimum of (2r − c)/(rρ) on the solid torus: for fixed ρ the value
        // increases with r, so the minimum is at r = c − ρ, giving (c − 2ρ)/((c − ρ)ρ),
        // decreasing in ρ; at ρ = R = 1, c = 3 this is 1/2.
        let t = Domain::torus(3.0, 1.0).unwrap();
        let rep = superharmonicity_scan(&t, ScanRegion::Full, 200).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_relative_eq!(rep.min_value, 0.5, epsilon = 1e-12);
        assert_relative_eq!(rep.argmin[0], 2.0, epsilon = 1e-12);

        let t = Domain::torus(1.8, 1.0).unwrap();
        let rep = superharmonicity_scan(&t, ScanRegion::Full, 200).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.argmin[0] < 0.9);

        let d = Domain::disc([0.0, 0.0], 1.0).unwrap();
        assert_eq!(superharmonicity_scan(&d, ScanRegion::Full, 100).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn tube_self_distance_is_not_superharmonic() {
        let t = Domain::torus(3.0, 1.0).unwrap();
        let rep = superharmonicity_scan(&t, ScanRegion::TubeSelf { delta: 0.2 }, 200).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let rep = superharmonicity_scan(&t, ScanRegion::Tubular { delta: 0.2 }, 200).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let e = tube_self_distance(&t, 0.2, &[3.85, 0.0, 0.0]).unwrap();
        assert_relative_eq!(e.d, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn annulus_is_not_superharmonic_and_scan_needs_points() {
        let a = Domain::annulus([0.0, 0.0], 1.0, 2.0).unwrap();
        assert_eq!(superharmonicity_scan(&a, ScanRegion::Full, 64).unwrap().verdict, Verdict::Fail);
        assert!(matches!(
            superharmonicity_scan(&a, ScanRegion::Full, 4),
            Err(Error::InvalidArgument(_))
        ));
        let i = Domain::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            superharmonicity_scan(&i, ScanRegion::Tubular { delta: 1e-9 }, 8),
            Err(Error::EmptyRegion) | Ok(_)
        ));
    }

    fn sample_domain(kind: usize) -> Domain {
        match kind {
            0 => Domain::interval(-0.5, 1.5).unwrap(),
            1 => Domain::convex_polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.3, 1.2]]).unwrap(),
            2 => Domain::disc([0.5, -0.5], 1.2).unwrap(),
            3 => Domain::annulus([0.0, 0.0], 0.7, 1.6).unwrap(),
            _ => Domain::torus(2.5, 1.0).unwrap(),
        }
    }

    /// Maps unit-cube coordinates into the bounding box and keeps interior points.
    fn inside(domain: &Domain, u: &[f64; 3]) -> Option<Vec<f64>> {
        let (lo, hi) = domain.bounding_box();
        let p: Vec<f64> = (0..lo.len()).map(|i| lo[i] + u[i] * (hi[i] - lo[i])).collect();
        (signed_distance(domain, &p) > 0.0).then_some(p)
    }

    /// Minimum over boundary samples of a segment, refined three times around the best sample.
    fn brute_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let at = |t: f64| ((a[0] + t * (b[0] - a[0]) - p[0]).powi(2) + (a[1] + t * (b[1] - a[1]) - p[1]).powi(2)).sqrt();
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = f64::INFINITY;
        for _ in 0..4 {
            let n = 2000;
            let step = (hi - lo) / n as f64;
            let mut arg = lo;
            for i in 0..=n {
                let t = lo + i as f64 * step;
                let v = at(t);
                if v < best {
                    best = v;
                    arg = t;
                }
            }
            lo = (arg - step).max(0.0);
            hi = (arg + step).min(1.0);
        }
        best
    }

    proptest! {
        #[test]
        fn distance_is_one_lipschitz(kind in 0usize..5, u in prop::array::uniform3(0.0f64..1.0), v in prop::array::uniform3(0.0f64..1.0)) {
            let dom = sample_domain(kind);
            let (Some(p), Some(q)) = (inside(&dom, &u), inside(&dom, &v)) else { return Ok(()) };
            let gap: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let dp = distance(&dom, &p).unwrap();
            let dq = distance(&dom, &q).unwrap();
            prop_assert!((dp - dq).abs() <= gap + 1e-12, "{} vs {}", (dp - dq).abs(), gap);
        }

        #[test]
        fn gradient_is_unit_and_matches_differences(kind in 0usize..5, u in prop::array::uniform3(0.0f64..1.0)) {
            let dom = sample_domain(kind);
            let Some(p) = inside(&dom, &u) else { return Ok(()) };
            let e = distance_calculus(&dom, &p, 0.0).unwrap();
            prop_assume!(!e.near_ridge);
            let norm = e.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-8, "|∇d| = {norm}");
            // central differences are second order away from the ridge of d
            let h = default_fd_step(&dom);
            if kind != 1 && e.d > 20.0 * h && e.d < 0.5 * max_distance(&dom) {
                let fd = distance_calculus_fd(&dom, &p, h).unwrap();
                for i in 0..3 {
                    prop_assert!((fd.grad[i] - e.grad[i]).abs() <= 1e-6, "{:?} vs {:?}", fd.grad, e.grad);
                }
            }
        }

        #[test]
        fn polygon_distance_matches_boundary_sampling(
            angles in prop::collection::vec(0.0f64..1.0, 3..8),
            stretch in 0.3f64..2.0,
            u in prop::array::uniform2(0.0f64..1.0),
        ) {
            let mut t: Vec<f64> = angles.iter().map(|a| 2.0 * PI * a).collect();
            t.sort_by(f64::total_cmp);
            t.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            prop_assume!(t.len() >= 3 && 2.0 * PI - (t[t.len() - 1] - t[0]) > 0.05);
            let vertices: Vec<[f64; 2]> = t.iter().map(|a| [stretch * a.cos(), a.sin()]).collect();
            let Ok(dom) = Domain::convex_polygon(vertices.clone()) else { return Err(TestCaseError::reject("degenerate")) };
            let Some(p) = inside(&dom, &[u[0], u[1], 0.0]) else { return Ok(()) };
            let n = vertices.len();
            let brute = (0..n).map(|i| brute_segment([p[0], p[1]], vertices[i], vertices[(i + 1) % n])).fold(f64::INFINITY, f64::min);
            let d = distance(&dom, &p).unwrap();
            prop_assert!((d - brute).abs() <= 1e-9, "{d} vs {brute}");
        }

        #[test]
        fn torus_threshold_is_c_over_r_two(ratio in 1.05f64..4.0, minor in 0.2f64..3.0) {
            prop_assume!((ratio - 2.0).abs() > 0.05);
            let rep = superharmonicity_scan(&Domain::torus(ratio * minor, minor).unwrap(), ScanRegion::Full, 100).unwrap();
            let expected = if ratio > 2.0 { Verdict::Pass } else { Verdict::Fail };
            prop_assert_eq!(rep.verdict, expected, "c/R = {}, min {}", ratio, rep.min_value);
        }
    }
}
