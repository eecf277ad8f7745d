//! Piecewise-linear assembly of quadratic forms into sparse symmetric pencils, and
//! IMS partitions of unity built from the boundary distance.

use serde::{Deserialize, Serialize};
use sprs::CsMat;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::{coef, CoefficientExpr, EvalPoint};
use crate::geometry::{self, Domain};
use crate::mesh::{EdgeTag, Mesh};
use crate::quadrature::{gauss_legendre_unit, triangle_rule};

/// Numerator form `∫ a|∇u|² + q|u|² + ∫_{Γ_R} σ|u|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormSpec {
    pub a: CoefficientExpr,
    pub q: CoefficientExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<CoefficientExpr>,
    /// Exponent when `a = d^β`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl FormSpec {
    pub fn new(a: CoefficientExpr, q: CoefficientExpr) -> Self {
        FormSpec { a, q, sigma: None, beta: None }
    }

    /// `a = 1`, `q = 0`.
    pub fn laplacian() -> Self {
        Self::power(0.0)
    }

    /// `a = d^β`, `q = 0`.
    pub fn power(beta: f64) -> Self {
        let a = if beta == 0.0 { coef("1") } else { coef(&format!("d^{beta}")) };
        FormSpec { a, q: coef("0"), sigma: None, beta: Some(beta) }
    }

    pub fn with_q(mut self, q: CoefficientExpr) -> Self {
        self.q = q;
        self
    }

    pub fn with_sigma(mut self, sigma: CoefficientExpr) -> Self {
        self.sigma = Some(sigma);
        self
    }

    /// The declared exponent, or 0 when none is declared.
    pub fn beta_or_zero(&self) -> f64 {
        self.beta.unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.beta {
            if !(b < 1.0) {
                return Err(Error::ExponentOutOfRange(format!("beta = {b} must be below 1")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    Cartesian,
    /// Mesh coordinates are `(r, z)`; every integral carries the measure `r`.
    Cylindrical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Gauss–Legendre points per interval element.
    pub gauss_points: usize,
    /// Collapsed-Gauss order on triangles (`n²` points).
    pub triangle_order: usize,
    pub coordinates: Coordinates,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            gauss_points: 4,
            triangle_order: 3,
            coordinates: Coordinates::Cartesian,
        }
    }
}

impl AssemblyOptions {
    pub fn cylindrical() -> Self {
        AssemblyOptions { coordinates: Coordinates::Cylindrical, ..Default::default() }
    }

    /// Doubles the number of points per direction.
    pub fn doubled(self) -> Self {
        AssemblyOptions {
            gauss_points: 2 * self.gauss_points,
            triangle_order: 2 * self.triangle_order,
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub points_per_element: usize,
    pub min_distance: f64,
}

/// `K x = λ M x` on the free nodes of a mesh.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub k: CsMat<f64>,
    pub m: CsMat<f64>,
    /// Mesh node of each degree of freedom.
    pub dof_nodes: Vec<usize>,
    pub num_nodes: usize,
    pub quadrature: QuadratureInfo,
}

impl Pencil {
    pub fn dof(&self) -> usize {
        self.dof_nodes.len()
    }

    /// Pencil from explicit matrices (every index is a free node).
    pub fn from_matrices(k: CsMat<f64>, m: CsMat<f64>) -> Self {
        let n = k.rows();
        Pencil {
            k,
            m,
            dof_nodes: (0..n).collect(),
            num_nodes: n,
            quadrature: QuadratureInfo { points_per_element: 0, min_distance: f64::NAN },
        }
    }

    /// Node vector with zeros on eliminated nodes.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_nodes];
        for (v, &n) in x.iter().zip(&self.dof_nodes) {
            out[n] = *v;
        }
        out
    }

    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.dof_nodes.iter().map(|&n| u[n]).collect()
    }
}

/// One quadrature point of an element.
pub(crate) struct QPoint {
    pub x: [f64; 2],
    /// Weight times the element Jacobian (no measure weight).
    pub w: f64,
    pub shape: [f64; 3],
    pub grad: [[f64; 2]; 3],
}

pub(crate) fn eval_point(x: [f64; 2], dim: usize, d: f64, coords: Coordinates) -> EvalPoint {
    match coords {
        Coordinates::Cartesian => EvalPoint::cartesian(&x[..dim], d),
        Coordinates::Cylindrical => EvalPoint::cylindrical(x[0], x[1], d),
    }
}

pub(crate) fn measure(x: [f64; 2], coords: Coordinates) -> f64 {
    match coords {
        Coordinates::Cartesian => 1.0,
        Coordinates::Cylindrical => x[0],
    }
}

/// Calls `f(nodes, qp)` for every quadrature point of every element, in element order.
pub(crate) fn visit_quadrature(
    mesh: &Mesh,
    opts: &AssemblyOptions,
    mut f: impl FnMut(&[usize], &QPoint) -> Result<()>,
) -> Result<usize> {
    match mesh {
        Mesh::OneD(m) => {
            let rule = gauss_legendre_unit(opts.gauss_points);
            for e in &m.elements {
                let (x0, x1) = (m.nodes[e[0]], m.nodes[e[1]]);
                let len = x1 - x0;
                for &(xi, w) in &rule {
                    let qp = QPoint {
                        x: [x0 + xi * len, 0.0],
                        w: w * len,
                        shape: [1.0 - xi, xi, 0.0],
                        grad: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]],
                    };
                    f(e, &qp)?;
                }
            }
            Ok(rule.len())
        }
        Mesh::TwoD(m) => {
            let rule = triangle_rule(opts.triangle_order);
            for t in &m.triangles {
                let [p0, p1, p2] = [m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]];
                let (ax, ay) = (p1[0] - p0[0], p1[1] - p0[1]);
                let (bx, by) = (p2[0] - p0[0], p2[1] - p0[1]);
                let det = ax * by - ay * bx;
                // ∇N1 = (by, −bx)/det, ∇N2 = (−ay, ax)/det, ∇N0 = −∇N1 − ∇N2
                let g1 = [by / det, -bx / det];
                let g2 = [-ay / det, ax / det];
                let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
                for &(st, w) in &rule {
                    let (s, tt) = (st[0], st[1]);
                    let qp = QPoint {
                        x: [p0[0] + s * ax + tt * bx, p0[1] + s * ay + tt * by],
                        w: w * det.abs(),
                        shape: [1.0 - s - tt, s, tt],
                        grad: [g0, g1, g2],
                    };
                    f(t, &qp)?;
                }
            }
            Ok(rule.len())
        }
    }
}

fn domain_dim(mesh: &Mesh) -> usize {
    match mesh {
        Mesh::OneD(_) => 1,
        Mesh::TwoD(_) => 2,
    }
}

fn point3(x: [f64; 2], dim: usize) -> [f64; 3] {
    if dim == 1 {
        [x[0], 0.0, 0.0]
    } else {
        [x[0], x[1], 0.0]
    }
}

/// Row-wise accumulator that keeps contributions in insertion order so that mirrored
/// entries are summed identically.
struct Accumulator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator { rows: vec![Vec::new(); n] }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.rows[i].push((j, v));
    }

    fn finish(self) -> CsMat<f64> {
        let n = self.rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in self.rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == col {
                    sum += row[k].1;
                    k += 1;
                }
                indices.push(col);
                data.push(sum);
            }
            indptr.push(indices.len());
        }
        CsMat::new((n, n), indptr, indices, data)
    }
}

fn dof_map(mesh: &Mesh) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut nodes = Vec::new();
    let mut map = vec![None; mesh.num_nodes()];
    for (i, d) in mesh.dirichlet().iter().enumerate() {
        if !d {
            map[i] = Some(nodes.len());
            nodes.push(i);
        }
    }
    (nodes, map)
}

/// Assembles `K` from the numerator form and `M` from `∫ w|u|²`, eliminating Dirichlet nodes.
pub fn assemble_pencil(
    mesh: &Mesh,
    numerator: &FormSpec,
    denominator_weight: &CoefficientExpr,
    opts: &AssemblyOptions,
) -> Result<Pencil> {
    numerator.validate()?;
    let dim = domain_dim(mesh);
    let domain = mesh.domain().clone();
    let (dof_nodes, map) = dof_map(mesh);
    let n = dof_nodes.len();
    let mut k = Accumulator::new(n);
    let mut m = Accumulator::new(n);
    let mut min_d = f64::INFINITY;
    let points = visit_quadrature(mesh, opts, |nodes, qp| {
        let d = geometry::signed_distance(&domain, &qp.x[..dim]);
        let p3 = point3(qp.x, dim);
        if !(d > 0.0) {
            return Err(Error::SingularQuadrature { point: p3 });
        }
        min_d = min_d.min(d);
        let ep = eval_point(qp.x, dim, d, opts.coordinates);
        let a = numerator.a.eval(&ep);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::NonpositiveDiffusion { value: a, point: p3 });
        }
        let q = numerator.q.eval(&ep);
        if !q.is_finite() {
            return Err(Error::InvalidArgument(format!("potential is not finite at {p3:?}")));
        }
        let w = denominator_weight.eval(&ep);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::NonpositiveWeight { value: w, point: p3 });
        }
        let dx = qp.w * measure(qp.x, opts.coordinates);
        let nn = nodes.len();
        for i in 0..nn {
            let Some(di) = map[nodes[i]] else { continue };
            for j in i..nn {
                let Some(dj) = map[nodes[j]] else { continue };
                let gg = qp.grad[i][0] * qp.grad[j][0] + qp.grad[i][1] * qp.grad[j][1];
                let ss = qp.shape[i] * qp.shape[j];
                let kv = dx * (a * gg + q * ss);
                let mv = dx * w * ss;
                k.add(di, dj, kv);
                m.add(di, dj, mv);
                if di != dj {
                    k.add(dj, di, kv);
                    m.add(dj, di, mv);
                }
            }
        }
        Ok(())
    })?;
    if let Some(sigma) = &numerator.sigma {
        add_robin(mesh, sigma, &map, opts, &mut k)?;
    }
    Ok(Pencil {
        k: k.finish(),
        m: m.finish(),
        dof_nodes,
        num_nodes: mesh.num_nodes(),
        quadrature: QuadratureInfo { points_per_element: points, min_distance: min_d },
    })
}

fn add_robin(
    mesh: &Mesh,
    sigma: &CoefficientExpr,
    map: &[Option<usize>],
    opts: &AssemblyOptions,
    k: &mut Accumulator,
) -> Result<()> {
    match mesh {
        Mesh::OneD(m) => {
            for i in m.robin_nodes() {
                if let Some(di) = map[i] {
                    let s = sigma.eval(&EvalPoint::cartesian(&[m.nodes[i]], 0.0));
                    k.add(di, di, s);
                }
            }
        }
        Mesh::TwoD(m) => {
            let rule = gauss_legendre_unit(2);
            for e in m.boundary_edges.iter().filter(|e| e.tag == EdgeTag::GammaR) {
                let (p, q) = (m.vertices[e.nodes[0]], m.vertices[e.nodes[1]]);
                let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                // piecewise constant: σ is sampled once, at the edge midpoint
                let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                let s = sigma.eval(&eval_point(mid, 2, 0.0, opts.coordinates));
                for &(xi, w) in &rule {
                    let x = [p[0] + xi * (q[0] - p[0]), p[1] + xi * (q[1] - p[1])];
                    let shape = [1.0 - xi, xi];
                    let ds = w * len * measure(x, opts.coordinates);
                    for i in 0..2 {
                        let Some(di) = map[e.nodes[i]] else { continue };
                        for j in 0..2 {
                            let Some(dj) = map[e.nodes[j]] else { continue };
                            k.add(di, dj, ds * s * shape[i] * shape[j]);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Sorted `row col value` lines (0-based) with a header comment.
pub fn export_coordinates(name: &str, a: &CsMat<f64>) -> String {
    let mut s = format!("# {name} rows {} cols {} nnz {}\n", a.rows(), a.cols(), a.nnz());
    let csr = a.to_csr();
    for (i, row) in csr.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            let _ = writeln!(s, "{i} {j} {v:.17e}");
        }
    }
    s
}

// ---------------------------------------------------------------------------
// IMS localization

/// `φ₁ = cos θ`, `φ₂ = sin θ` with `θ = (π/2)·s(t)`, `t = (d − δ_in)/(δ_out − δ_in)`
/// clamped to `[0, 1]` and `s(t) = 3t² − 2t³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImsProfile {
    pub delta_in: f64,
    pub delta_out: f64,
}

impl ImsProfile {
    /// `(φ₁, φ₂, dφ₁/dd, dφ₂/dd)`.
    pub fn eval(&self, d: f64) -> (f64, f64, f64, f64) {
        let width = self.delta_out - self.delta_in;
        let t = ((d - self.delta_in) / width).clamp(0.0, 1.0);
        let s = t * t * (3.0 - 2.0 * t);
        let ds = if t > 0.0 && t < 1.0 { 6.0 * t * (1.0 - t) / width } else { 0.0 };
        let th = FRAC_PI_2 * s;
        let dth = FRAC_PI_2 * ds;
        let (sin, cos) = th.sin_cos();
        (cos, sin, -sin * dth, cos * dth)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImsPartition {
    pub profile: ImsProfile,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub grad_phi1: Vec<[f64; 3]>,
    pub grad_phi2: Vec<[f64; 3]>,
}

/// Samples the partition at the mesh nodes.
pub fn ims_partition(mesh: &Mesh, delta_in: f64, delta_out: f64) -> Result<ImsPartition> {
    let domain = mesh.domain();
    let sup = geometry::max_distance(domain);
    if !(0.0 < delta_in && delta_in < delta_out && delta_out < sup) {
        return Err(Error::InvalidArgument(format!(
            "IMS band needs 0 < delta_in < delta_out < sup d = {sup}"
        )));
    }
    let local = band_mesh_size(mesh, delta_in, delta_out);
    if delta_out - delta_in < 4.0 * local {
        return Err(Error::DegenerateBand { delta_in, delta_out, mesh_size: local });
    }
    let profile = ImsProfile { delta_in, delta_out };
    let n = mesh.num_nodes();
    let mut part = ImsPartition {
        profile,
        phi1: Vec::with_capacity(n),
        phi2: Vec::with_capacity(n),
        grad_phi1: Vec::with_capacity(n),
        grad_phi2: Vec::with_capacity(n),
    };
    for i in 0..n {
        let p = mesh.node(i);
        let e = geometry::distance_calculus(domain, &p, 0.0)?;
        let (f1, f2, d1, d2) = profile.eval(e.d);
        part.phi1.push(f1);
        part.phi2.push(f2);
        part.grad_phi1.push(e.grad.map(|g| d1 * g));
        part.grad_phi2.push(e.grad.map(|g| d2 * g));
    }
    Ok(part)
}

fn band_mesh_size(mesh: &Mesh, lo: f64, hi: f64) -> f64 {
    let d = mesh.distance();
    let touches = |nodes: &[usize]| {
        let min = nodes.iter().map(|&i| d[i]).fold(f64::INFINITY, f64::min);
        let max = nodes.iter().map(|&i| d[i]).fold(f64::NEG_INFINITY, f64::max);
        max >= lo && min <= hi
    };
    match mesh {
        Mesh::OneD(m) => m
            .elements
            .iter()
            .filter(|e| touches(&e[..]))
            .map(|e| m.nodes[e[1]] - m.nodes[e[0]])
            .fold(0.0, f64::max),
        Mesh::TwoD(m) => m
            .triangles
            .iter()
            .filter(|t| touches(&t[..]))
            .map(|t| m.triangle_diameter(t))
            .fold(0.0, f64::max),
    }
}

/// Largest pointwise defect, over quadrature points, of
/// `a|∇(φⱼu)|² = φⱼ² a|∇u|² + a|∇φⱼ|² u² + a ∇(φⱼ²)·(u∇u)`, summed over `j = 1, 2`.
/// `u` is a node vector; gradients are exact on each element.
pub fn ims_identity_residual(mesh: &Mesh, partition: &ImsPartition, u: &[f64], a: &CoefficientExpr) -> Result<f64> {
    let dim = domain_dim(mesh);
    let domain = mesh.domain().clone();
    let opts = AssemblyOptions::default();
    let mut worst: f64 = 0.0;
    visit_quadrature(mesh, &opts, |nodes, qp| {
        let nn = nodes.len();
        let mut uh = 0.0;
        let mut gu = [0.0; 2];
        for i in 0..nn {
            uh += qp.shape[i] * u[nodes[i]];
            gu[0] += qp.grad[i][0] * u[nodes[i]];
            gu[1] += qp.grad[i][1] * u[nodes[i]];
        }
        let e = geometry::distance_calculus(&domain, &qp.x[..dim], 0.0)?;
        let av = a.eval(&eval_point(qp.x, dim, e.d, Coordinates::Cartesian));
        let (f1, f2, d1, d2) = partition.profile.eval(e.d);
        let mut total = 0.0;
        for (phi, dphi) in [(f1, d1), (f2, d2)] {
            let gphi = [dphi * e.grad[0], dphi * e.grad[1]];
            let prod = [phi * gu[0] + uh * gphi[0], phi * gu[1] + uh * gphi[1]];
            let lhs = av * (prod[0] * prod[0] + prod[1] * prod[1]);
            let rhs = phi * phi * av * (gu[0] * gu[0] + gu[1] * gu[1])
                + av * (gphi[0] * gphi[0] + gphi[1] * gphi[1]) * uh * uh
                + av * 2.0 * phi * (gphi[0] * uh * gu[0] + gphi[1] * uh * gu[1]);
            total += (lhs - rhs).abs();
        }
        worst = worst.max(total);
        Ok(())
    })?;
    Ok(worst)
}

/// Weight `d^{β−2}` of the Hardy denominator.
pub fn hardy_weight(beta: f64) -> CoefficientExpr {
    coef(&format!("d^{}", beta - 2.0))
}

/// Convenience: Cartesian or cylindrical options for a domain.
pub fn options_for(domain: &Domain) -> AssemblyOptions {
    match domain {
        Domain::Torus { .. } => AssemblyOptions::cylindrical(),
        _ => AssemblyOptions::default(),
    }
}
