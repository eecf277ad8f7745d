//! Graded interval meshes, boundary-graded triangulations, strip restriction and the
//! axisymmetric reduction of the torus.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::{coef, CoefficientExpr};
use crate::geometry::{self, Domain};

/// Growth factor of consecutive layer widths in the 2D boundary layers.
const LAYER_GROWTH: f64 = 1.25;
const TAG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Dirichlet,
    Robin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeTag {
    /// Dirichlet part of ∂Ω.
    GammaS,
    /// Robin (or Neumann when σ = 0) part of ∂Ω.
    GammaR,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    pub domain: Domain,
    pub nodes: Vec<f64>,
    pub elements: Vec<[usize; 2]>,
    /// Conditions at `a` and `b`.
    pub ends: [BoundaryKind; 2],
    pub dirichlet: Vec<bool>,
    pub distance: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: EdgeTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub domain: Domain,
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Edges on ∂Ω (strip interfaces are not listed).
    pub boundary_edges: Vec<BoundaryEdge>,
    pub dirichlet: Vec<bool>,
    pub distance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mesh {
    OneD(Mesh1D),
    TwoD(TriMesh),
}

/// `{δ_out < d < δ_in}`; `delta_out = 0` means the strip touches ∂Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    pub delta_out: f64,
    pub delta_in: f64,
}

impl StripSpec {
    pub fn touching(delta_in: f64) -> Self {
        StripSpec { delta_out: 0.0, delta_in }
    }

    fn validate(&self, domain: &Domain) -> Result<()> {
        let sup = geometry::max_distance(domain);
        if !(self.delta_out >= 0.0 && self.delta_out < self.delta_in && self.delta_in <= sup * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "strip levels need 0 <= delta_out < delta_in <= sup d = {sup}, got ({}, {})",
                self.delta_out, self.delta_in
            )));
        }
        Ok(())
    }
}

fn interval_ends(domain: &Domain) -> Result<(f64, f64)> {
    match *domain {
        Domain::Interval { a, b } => Ok((a, b)),
        _ => Err(Error::InvalidDomain(format!("expected an interval, got {}", domain.name()))),
    }
}

fn check_grading(g: f64) -> Result<()> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::InvalidGrading(g));
    }
    Ok(())
}

/// Per-layer factor that makes the smallest/largest element ratio equal `ratio`
/// for an `n`-element symmetric mesh.
pub fn grading_for_ratio(n: usize, ratio: f64) -> f64 {
    let m = n / 2;
    if m < 2 {
        1.0
    } else {
        ratio.powf(1.0 / (m as f64 - 1.0))
    }
}

/// Offsets from a boundary point of `layers` elements of total length `len`,
/// sized `s, s·g, s·g², …` from the far end towards the boundary.
fn graded_offsets(len: f64, layers: usize, g: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(layers + 1);
    t.push(0.0);
    if g == 1.0 {
        for i in 1..=layers {
            t.push(len * i as f64 / layers as f64);
        }
        return t;
    }
    let total: f64 = (0..layers).map(|j| g.powi(j as i32)).sum();
    let s0 = len / total;
    let mut acc = 0.0;
    for i in 0..layers {
        acc += s0 * g.powi((layers - 1 - i) as i32);
        t.push(acc);
    }
    t[layers] = len;
    t
}

impl Mesh1D {
    fn from_nodes(domain: Domain, nodes: Vec<f64>) -> Self {
        let elements = (0..nodes.len() - 1).map(|i| [i, i + 1]).collect();
        let distance = nodes.iter().map(|x| geometry::signed_distance(&domain, &[*x]).max(0.0)).collect();
        let mut m = Mesh1D {
            domain,
            dirichlet: vec![false; nodes.len()],
            nodes,
            elements,
            ends: [BoundaryKind::Dirichlet; 2],
            distance,
        };
        m.apply_ends();
        m
    }

    fn apply_ends(&mut self) {
        let (a, b) = interval_ends(&self.domain).expect("1D mesh on an interval");
        for (i, x) in self.nodes.iter().enumerate() {
            if *x == a {
                self.dirichlet[i] = self.ends[0] == BoundaryKind::Dirichlet;
            } else if *x == b {
                self.dirichlet[i] = self.ends[1] == BoundaryKind::Dirichlet;
            }
        }
    }

    /// Sets the endpoint conditions.
    pub fn with_ends(mut self, left: BoundaryKind, right: BoundaryKind) -> Self {
        self.ends = [left, right];
        self.apply_ends();
        self
    }

    /// Nodes on ∂Ω carrying a Robin term, with the endpoint they sit on.
    pub fn robin_nodes(&self) -> Vec<usize> {
        let (a, b) = interval_ends(&self.domain).unwrap();
        (0..self.nodes.len())
            .filter(|&i| {
                (self.nodes[i] == a && self.ends[0] == BoundaryKind::Robin)
                    || (self.nodes[i] == b && self.ends[1] == BoundaryKind::Robin)
            })
            .collect()
    }

    pub fn element_lengths(&self) -> Vec<f64> {
        self.elements.iter().map(|e| self.nodes[e[1]] - self.nodes[e[0]]).collect()
    }

    /// Splits every element into `factor` equal pieces.
    pub fn refine(&self, factor: usize) -> Mesh1D {
        assert!(factor >= 1);
        let mut nodes = Vec::new();
        let mut dirichlet = Vec::new();
        let mut elements = Vec::new();
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut push_old = |i: usize, nodes: &mut Vec<f64>, dirichlet: &mut Vec<bool>| -> usize {
            *map.entry(i).or_insert_with(|| {
                nodes.push(self.nodes[i]);
                dirichlet.push(self.dirichlet[i]);
                nodes.len() - 1
            })
        };
        for e in &self.elements {
            let (x0, x1) = (self.nodes[e[0]], self.nodes[e[1]]);
            let mut prev = push_old(e[0], &mut nodes, &mut dirichlet);
            for k in 1..factor {
                nodes.push(x0 + (x1 - x0) * k as f64 / factor as f64);
                dirichlet.push(false);
                let cur = nodes.len() - 1;
                elements.push([prev, cur]);
                prev = cur;
            }
            let last = push_old(e[1], &mut nodes, &mut dirichlet);
            elements.push([prev, last]);
        }
        let distance = nodes.iter().map(|x| geometry::signed_distance(&self.domain, &[*x]).max(0.0)).collect();
        Mesh1D {
            domain: self.domain.clone(),
            nodes,
            elements,
            ends: self.ends,
            dirichlet,
            distance,
        }
    }
}

/// Symmetric mesh with `n` elements whose sizes shrink by `grading` per layer towards
/// both endpoints (`grading = 1` is uniform).
pub fn build_mesh_1d(domain: &Domain, n: usize, grading: f64) -> Result<Mesh1D> {
    let (a, b) = interval_ends(domain)?;
    check_grading(grading)?;
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("element count must be even and >= 2, got {n}")));
    }
    let m = n / 2;
    let half = 0.5 * (b - a);
    let t = graded_offsets(half, m, grading);
    let mid = 0.5 * (a + b);
    let mut nodes: Vec<f64> = t.iter().map(|o| a + o).collect();
    nodes[m] = mid;
    for i in (0..m).rev() {
        nodes.push(b - t[i]);
    }
    nodes[0] = a;
    nodes[n] = b;
    resolvable(&nodes)?;
    Ok(Mesh1D::from_nodes(domain.clone(), nodes))
}

/// Grading so strong that an element vanishes in floating point.
fn resolvable(nodes: &[f64]) -> Result<()> {
    match nodes.windows(2).position(|w| !(w[1] > w[0])) {
        Some(i) => Err(Error::MeshGenerationFailure(format!(
            "element {i} has non-positive length; grading too strong for double precision"
        ))),
        None => Ok(()),
    }
}

/// Mesh with nodes exactly at `a + δ` and `b − δ`: `n_strip` elements in each boundary
/// strip (graded by `grading` per layer towards ∂Ω) and a uniform middle part.
pub fn build_mesh_1d_aligned(domain: &Domain, delta: f64, n_strip: usize, grading: f64) -> Result<Mesh1D> {
    let (a, b) = interval_ends(domain)?;
    check_grading(grading)?;
    let half = 0.5 * (b - a);
    if !(delta > 0.0 && delta <= half * (1.0 + 1e-12)) || n_strip < 1 {
        return Err(Error::InvalidArgument(format!(
            "aligned mesh needs 0 < delta <= {half} and at least one strip element"
        )));
    }
    let delta = delta.min(half);
    let t = graded_offsets(delta, n_strip, grading);
    let widest = t[n_strip] - t[n_strip - 1];
    let mut nodes: Vec<f64> = t.iter().map(|o| a + o).collect();
    let (lo, hi) = (a + delta, b - delta);
    let middle = hi - lo;
    if middle > 1e-12 * (b - a) {
        let n_mid = ((middle / widest).ceil() as usize).max(1);
        for i in 1..n_mid {
            nodes.push(lo + middle * i as f64 / n_mid as f64);
        }
        nodes.push(b - t[n_strip]);
    } else {
        nodes[n_strip] = 0.5 * (a + b);
    }
    for i in (0..n_strip).rev() {
        nodes.push(b - t[i]);
    }
    nodes[0] = a;
    let last = nodes.len() - 1;
    nodes[last] = b;
    resolvable(&nodes)?;
    Ok(Mesh1D::from_nodes(domain.clone(), nodes))
}

// ---------------------------------------------------------------------------
// Triangulations

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn dist2(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl TriMesh {
    fn assemble(domain: Domain, vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        for t in triangles.iter_mut() {
            let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if a < 0.0 {
                t.swap(1, 2);
            }
            let a = a.abs();
            let scale = dist2(vertices[t[0]], vertices[t[1]]).max(dist2(vertices[t[1]], vertices[t[2]]));
            if !(a > 1e-14 * scale * scale) {
                return Err(Error::MeshGenerationFailure(format!(
                    "degenerate triangle {:?} with area {a:e}",
                    t
                )));
            }
        }
        let scale = domain.diameter().max(1.0);
        let distance: Vec<f64> = vertices
            .iter()
            .map(|v| {
                let s = geometry::signed_distance(&domain, v);
                if s.abs() <= TAG_TOL * scale {
                    0.0
                } else {
                    s.max(0.0)
                }
            })
            .collect();
        let mut m = TriMesh {
            domain,
            dirichlet: vec![false; vertices.len()],
            vertices,
            triangles,
            boundary_edges: Vec::new(),
            distance,
        };
        m.boundary_edges = m
            .outer_edges()
            .into_iter()
            .filter(|e| m.distance[e[0]] == 0.0 && m.distance[e[1]] == 0.0)
            .map(|nodes| BoundaryEdge { nodes, tag: EdgeTag::GammaS })
            .collect();
        m.apply_tags();
        Ok(m)
    }

    /// Edges belonging to exactly one triangle, oriented counterclockwise.
    pub fn outer_edges(&self) -> Vec<[usize; 2]> {
        let mut count: BTreeMap<(usize, usize), (usize, [usize; 2])> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (u, v) = (t[k], t[(k + 1) % 3]);
                let key = (u.min(v), u.max(v));
                count.entry(key).or_insert((0, [u, v])).0 += 1;
            }
        }
        count.into_values().filter(|(c, _)| *c == 1).map(|(_, e)| e).collect()
    }

    fn apply_tags(&mut self) {
        for e in &self.boundary_edges {
            if e.tag == EdgeTag::GammaS {
                self.dirichlet[e.nodes[0]] = true;
                self.dirichlet[e.nodes[1]] = true;
            }
        }
    }

    /// Retags every ∂Ω edge; vertices on ∂Ω become Dirichlet exactly when they touch a Γ_S edge.
    pub fn with_boundary_tag(mut self, tag: EdgeTag) -> Self {
        for e in self.boundary_edges.iter_mut() {
            e.tag = tag;
            self.dirichlet[e.nodes[0]] = false;
            self.dirichlet[e.nodes[1]] = false;
        }
        self.apply_tags();
        self
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| signed_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]))
            .sum()
    }

    /// Relative defect `(|Ω| − Σ|T|)/|Ω|` of the polygonal approximation.
    pub fn area_defect(&self) -> f64 {
        let exact = geometry::volume(&self.domain);
        (exact - self.area()) / exact
    }

    pub fn triangle_diameter(&self, t: &[usize; 3]) -> f64 {
        let v = |k: usize| self.vertices[t[k]];
        dist2(v(0), v(1)).max(dist2(v(1), v(2))).max(dist2(v(2), v(0)))
    }

    pub fn max_edge(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_diameter(t)).fold(0.0, f64::max)
    }

    /// Red refinement; new vertices on curved boundary edges are projected onto ∂Ω.
    pub fn refine_uniform(&self) -> Result<TriMesh> {
        let mut vertices = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let boundary: HashMap<(usize, usize), EdgeTag> = self
            .boundary_edges
            .iter()
            .map(|e| ((e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])), e.tag))
            .collect();
        let mut midpoint = |u: usize, v: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
            let key = (u.min(v), u.max(v));
            *mids.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[u], vertices[v]);
                let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if boundary.contains_key(&key) {
                    m = project_to_boundary(&self.domain, m);
                }
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let m01 = midpoint(t[0], t[1], &mut vertices);
            let m12 = midpoint(t[1], t[2], &mut vertices);
            let m20 = midpoint(t[2], t[0], &mut vertices);
            triangles.push([t[0], m01, m20]);
            triangles.push([m01, t[1], m12]);
            triangles.push([m20, m12, t[2]]);
            triangles.push([m01, m12, m20]);
        }
        let old_n = self.vertices.len();
        let mut out = TriMesh::assemble(self.domain.clone(), vertices, triangles)?;
        let mut child_tag: HashMap<(usize, usize), EdgeTag> = HashMap::new();
        for (&(u, v), &tag) in &boundary {
            let m = mids[&(u, v)];
            child_tag.insert((u.min(m), u.max(m)), tag);
            child_tag.insert((v.min(m), v.max(m)), tag);
        }
        for e in out.boundary_edges.iter_mut() {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            e.tag = child_tag.get(&key).copied().unwrap_or(EdgeTag::GammaS);
        }
        // strip interfaces: old Dirichlet vertices off ∂Ω keep their flag, and so do
        // midpoints of outer edges joining two of them
        out.dirichlet = vec![false; out.vertices.len()];
        let interior_dirichlet = |i: usize| self.dirichlet[i] && self.distance[i] > 0.0;
        for i in 0..old_n {
            out.dirichlet[i] = interior_dirichlet(i);
        }
        for e in self.outer_edges() {
            let key = (e[0].min(e[1]), e[0].max(e[1]));
            if !boundary.contains_key(&key) && interior_dirichlet(e[0]) && interior_dirichlet(e[1]) {
                out.dirichlet[mids[&key]] = true;
            }
        }
        out.apply_tags();
        Ok(out)
    }
}

fn project_to_boundary(domain: &Domain, p: [f64; 2]) -> [f64; 2] {
    let radial = |c: [f64; 2], r: f64| {
        let v = [p[0] - c[0], p[1] - c[1]];
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [c[0] + r * v[0] / n, c[1] + r * v[1] / n]
    };
    match domain {
        Domain::Disc { center, radius } => radial(*center, *radius),
        Domain::Annulus { center, r_in, r_out } => {
            let n = dist2(p, *center);
            if (n - r_in).abs() < (r_out - n).abs() {
                radial(*center, *r_in)
            } else {
                radial(*center, *r_out)
            }
        }
        _ => p,
    }
}

/// Offsets `0 = t_0 < … < t_m = len` with steps `s0, s0·growth, …` capped at `cap`.
fn layer_offsets(len: f64, s0: f64, growth: f64, cap: f64) -> Vec<f64> {
    let mut t = vec![0.0];
    let mut s = s0.min(cap);
    loop {
        let last = *t.last().unwrap();
        if last + s >= len - 0.5 * s {
            break;
        }
        t.push(last + s);
        s = (s * growth).min(cap);
    }
    t.push(len);
    t
}

/// A closed loop of vertex indices with a periodic parameter in `[0, 1)`.
struct Loop {
    ids: Vec<usize>,
    s: Vec<f64>,
}

fn zipper(outer: &Loop, inner: &Loop, tris: &mut Vec<[usize; 3]>) {
    let (na, nb) = (outer.ids.len(), inner.ids.len());
    let sa = |i: usize| outer.s[i % na] + (i / na) as f64;
    let sb = |j: usize| inner.s[j % nb] + (j / nb) as f64;
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_a = if i == na {
            false
        } else if j == nb {
            true
        } else {
            sa(i + 1) <= sb(j + 1)
        };
        if advance_a {
            tris.push([outer.ids[i % na], outer.ids[(i + 1) % na], inner.ids[j % nb]]);
            i += 1;
        } else {
            tris.push([outer.ids[i % na], inner.ids[(j + 1) % nb], inner.ids[j % nb]]);
            j += 1;
        }
    }
}

fn circle_loop(center: [f64; 2], r: f64, n: usize, shift: f64, verts: &mut Vec<[f64; 2]>) -> Loop {
    let mut ids = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        let si = (i as f64 + shift) / n as f64;
        let th = 2.0 * PI * si;
        verts.push([center[0] + r * th.cos(), center[1] + r * th.sin()]);
        ids.push(verts.len() - 1);
        s.push(si);
    }
    Loop { ids, s }
}

fn ring_count(r: f64, step: f64) -> usize {
    ((2.0 * PI * r / step).ceil() as usize).max(6)
}

fn build_disc(domain: &Domain, center: [f64; 2], radius: f64, h: f64, g: f64) -> Result<TriMesh> {
    let t = layer_offsets(radius, g * h, LAYER_GROWTH, h);
    let m = t.len() - 1;
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    let mut prev: Option<Loop> = None;
    for k in 0..m {
        let step = (t[k + 1] - t[k]).min(h);
        let r = radius - t[k];
        let lp = circle_loop(center, r, ring_count(r, step), 0.5 * (k % 2) as f64, &mut verts);
        if let Some(outer) = &prev {
            zipper(outer, &lp, &mut tris);
        }
        prev = Some(lp);
    }
    verts.push(center);
    let c = verts.len() - 1;
    let last = prev.unwrap();
    let n = last.ids.len();
    for i in 0..n {
        tris.push([c, last.ids[i], last.ids[(i + 1) % n]]);
    }
    TriMesh::assemble(domain.clone(), verts, tris)
}

fn build_annulus(domain: &Domain, center: [f64; 2], r_in: f64, r_out: f64, h: f64, g: f64) -> Result<TriMesh> {
    let half = 0.5 * (r_out - r_in);
    let t = layer_offsets(half, g * h, LAYER_GROWTH, h);
    // radii from the outer circle to the inner one, mirrored about the mid-circle
    let mut radii: Vec<(f64, f64)> = t.iter().enumerate().map(|(k, o)| {
        let step = if k + 1 < t.len() { t[k + 1] - t[k] } else { t[k] - t[k - 1] };
        (r_out - o, step.min(h))
    }).collect();
    for k in (0..t.len() - 1).rev() {
        let step = t[k + 1] - t[k];
        radii.push((r_in + t[k], step.min(h)));
    }
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    let mut prev: Option<Loop> = None;
    for (k, (r, step)) in radii.iter().enumerate() {
        let lp = circle_loop(center, *r, ring_count(*r, *step), 0.5 * (k % 2) as f64, &mut verts);
        if let Some(outer) = &prev {
            zipper(outer, &lp, &mut tris);
        }
        prev = Some(lp);
    }
    TriMesh::assemble(domain.clone(), verts, tris)
}

fn build_polygon_layers(domain: &Domain, vertices: &[[f64; 2]], h: f64, g: f64) -> Result<TriMesh> {
    let (c, rho) = geometry::chebyshev_disc(vertices);
    let t = layer_offsets(rho, g * h, LAYER_GROWTH, h);
    let m = t.len() - 1;
    let nv = vertices.len();
    let lens: Vec<f64> = (0..nv).map(|i| dist2(vertices[i], vertices[(i + 1) % nv])).collect();
    let perimeter: f64 = lens.iter().sum();
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    let mut prev: Option<Loop> = None;
    for k in 0..m {
        let lam = 1.0 - t[k] / rho;
        let step = (t[k + 1] - t[k]).min(h);
        let mut lp = Loop { ids: Vec::new(), s: Vec::new() };
        let mut acc = 0.0;
        for e in 0..nv {
            let p = vertices[e];
            let q = vertices[(e + 1) % nv];
            let segs = ((lam * lens[e] / step).ceil() as usize).max(1);
            for j in 0..segs {
                let f = j as f64 / segs as f64;
                let x = [p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1])];
                verts.push([c[0] + lam * (x[0] - c[0]), c[1] + lam * (x[1] - c[1])]);
                lp.ids.push(verts.len() - 1);
                lp.s.push((acc + f * lens[e]) / perimeter);
            }
            acc += lens[e];
        }
        if let Some(outer) = &prev {
            zipper(outer, &lp, &mut tris);
        }
        prev = Some(lp);
    }
    verts.push(c);
    let ci = verts.len() - 1;
    let last = prev.unwrap();
    let n = last.ids.len();
    for i in 0..n {
        tris.push([ci, last.ids[i], last.ids[(i + 1) % n]]);
    }
    TriMesh::assemble(domain.clone(), verts, tris)
}

fn axis_aligned_rectangle(vertices: &[[f64; 2]]) -> Option<([f64; 2], [f64; 2])> {
    if vertices.len() != 4 {
        return None;
    }
    for i in 0..4 {
        let p = vertices[i];
        let q = vertices[(i + 1) % 4];
        if p[0] != q[0] && p[1] != q[1] {
            return None;
        }
    }
    let lo = [vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min), vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min)];
    let hi = [vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max), vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max)];
    Some((lo, hi))
}

/// Quadtree template: boundary cells are split until their size is at most `g·h`,
/// then 2:1 balanced; leaves without hanging nodes get two triangles, the rest a fan.
fn build_rectangle(domain: &Domain, lo: [f64; 2], hi: [f64; 2], h: f64, g: f64) -> Result<TriMesh> {
    let (lx, ly) = (hi[0] - lo[0], hi[1] - lo[1]);
    let nx = ((lx / h) * (1.0 - 1e-12)).ceil().max(1.0) as i64;
    let ny = ((ly / h) * (1.0 - 1e-12)).ceil().max(1.0) as i64;
    let cell = (lx / nx as f64).max(ly / ny as f64);
    let mut levels = 0u32;
    while cell / 2f64.powi(levels as i32) > g * h * (1.0 + 1e-12) {
        levels += 1;
        if levels > 20 {
            return Err(Error::MeshGenerationFailure("grading requires more than 20 quadtree levels".into()));
        }
    }
    let unit = 1i64 << levels;
    let (nxu, nyu) = (nx * unit, ny * unit);
    let mut leaves: BTreeMap<(i64, i64), i64> = BTreeMap::new();
    for i in 0..nx {
        for j in 0..ny {
            leaves.insert((i * unit, j * unit), unit);
        }
    }
    let split = |leaves: &mut BTreeMap<(i64, i64), i64>, key: (i64, i64)| {
        let s = leaves.remove(&key).unwrap() / 2;
        for (di, dj) in [(0, 0), (s, 0), (0, s), (s, s)] {
            leaves.insert((key.0 + di, key.1 + dj), s);
        }
    };
    loop {
        let todo: Vec<(i64, i64)> = leaves
            .iter()
            .filter(|(&(i, j), &s)| s > 1 && (i == 0 || j == 0 || i + s == nxu || j + s == nyu))
            .map(|(k, _)| *k)
            .collect();
        if todo.is_empty() {
            break;
        }
        for k in todo {
            split(&mut leaves, k);
        }
    }
    let locate = |leaves: &BTreeMap<(i64, i64), i64>, x2: i64, y2: i64| -> Option<((i64, i64), i64)> {
        // doubled lattice coordinates
        if x2 < 0 || y2 < 0 || x2 >= 2 * nxu || y2 >= 2 * nyu {
            return None;
        }
        let mut s = unit;
        while s >= 1 {
            let key = ((x2 / (2 * s)) * s, (y2 / (2 * s)) * s);
            if leaves.get(&key) == Some(&s) {
                return Some((key, s));
            }
            s /= 2;
        }
        None
    };
    loop {
        let mut todo = std::collections::BTreeSet::new();
        for (&(i, j), &s) in &leaves {
            let (cx, cy) = (2 * i + s, 2 * j + s);
            for (dx, dy) in [(2 * s, 0), (-2 * s, 0), (0, 2 * s), (0, -2 * s)] {
                if let Some((key, ns)) = locate(&leaves, cx + dx, cy + dy) {
                    if ns > 2 * s {
                        todo.insert(key);
                    }
                }
            }
        }
        if todo.is_empty() {
            break;
        }
        for k in todo {
            split(&mut leaves, k);
        }
    }
    let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for (&(i, j), &s) in &leaves {
        for key in [(i, j), (i + s, j), (i + s, j + s), (i, j + s)] {
            let n = index.len();
            index.entry(key).or_insert(n);
        }
    }
    let mut tris = Vec::new();
    let mut extra: Vec<(i64, i64)> = Vec::new();
    for (&(i, j), &s) in &leaves {
        let id = |k: (i64, i64)| index.get(&k).copied();
        let bl = id((i, j)).unwrap();
        let br = id((i + s, j)).unwrap();
        let tr = id((i + s, j + s)).unwrap();
        let tl = id((i, j + s)).unwrap();
        let half = s / 2;
        let mids = if s % 2 == 0 {
            [id((i + half, j)), id((i + s, j + half)), id((i + half, j + s)), id((i, j + half))]
        } else {
            [None; 4]
        };
        if mids.iter().all(|m| m.is_none()) {
            tris.push([bl, br, tr]);
            tris.push([bl, tr, tl]);
        } else {
            let mut ring = vec![bl];
            ring.extend(mids[0]);
            ring.push(br);
            ring.extend(mids[1]);
            ring.push(tr);
            ring.extend(mids[2]);
            ring.push(tl);
            ring.extend(mids[3]);
            let c = index.len() + extra.len();
            extra.push((i + half, j + half));
            for k in 0..ring.len() {
                tris.push([c, ring[k], ring[(k + 1) % ring.len()]]);
            }
        }
    }
    let coord = |(i, j): (i64, i64)| -> [f64; 2] {
        let x = if i == nxu { hi[0] } else { lo[0] + lx * i as f64 / nxu as f64 };
        let y = if j == nyu { hi[1] } else { lo[1] + ly * j as f64 / nyu as f64 };
        [x, y]
    };
    let mut verts = vec![[0.0; 2]; index.len()];
    for (k, v) in &index {
        verts[*v] = coord(*k);
    }
    for k in extra {
        verts.push(coord(k));
    }
    TriMesh::assemble(domain.clone(), verts, tris)
}

/// Conforming triangulation with interior size about `h` and boundary elements of size
/// at most `grading·h`. All ∂Ω edges are tagged Γ_S.
pub fn build_trimesh(domain: &Domain, h: f64, grading: f64) -> Result<TriMesh> {
    check_grading(grading)?;
    let d_int = geometry::interior_diameter(domain);
    if !(h > 0.0 && h <= d_int / 4.0 * (1.0 + 1e-12)) {
        return Err(Error::MeshGenerationFailure(format!(
            "target size h = {h} must be positive and at most D_int/4 = {}",
            d_int / 4.0
        )));
    }
    match domain {
        Domain::ConvexPolygon { vertices } => match axis_aligned_rectangle(vertices) {
            Some((lo, hi)) => build_rectangle(domain, lo, hi, h, grading),
            None => build_polygon_layers(domain, vertices, h, grading),
        },
        Domain::Disc { center, radius } => build_disc(domain, *center, *radius, h, grading),
        Domain::Annulus { center, r_in, r_out } => build_annulus(domain, *center, *r_in, *r_out, h, grading),
        _ => Err(Error::MeshGenerationFailure(format!(
            "no triangulation template for a {}",
            domain.name()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Strips

fn strip_layers_1d(mesh: &Mesh1D, keep: &[bool]) -> usize {
    let (a, b) = interval_ends(&mesh.domain).unwrap();
    let mid = 0.5 * (a + b);
    let mut left = 0;
    let mut right = 0;
    for (e, k) in mesh.elements.iter().zip(keep) {
        if *k {
            let c = 0.5 * (mesh.nodes[e[0]] + mesh.nodes[e[1]]);
            if c < mid {
                left += 1;
            } else {
                right += 1;
            }
        }
    }
    left.min(right)
}

impl Mesh1D {
    pub fn restrict_to_strip(&self, strip: &StripSpec) -> Result<Mesh1D> {
        strip.validate(&self.domain)?;
        let keep: Vec<bool> = self
            .elements
            .iter()
            .map(|e| {
                let c = 0.5 * (self.nodes[e[0]] + self.nodes[e[1]]);
                let d = geometry::signed_distance(&self.domain, &[c]);
                strip.delta_out < d && d < strip.delta_in
            })
            .collect();
        let layers = strip_layers_1d(self, &keep);
        if layers < 4 {
            return Err(Error::StripTooThin {
                delta_out: strip.delta_out,
                delta_in: strip.delta_in,
                layers,
            });
        }
        let mut used = vec![false; self.nodes.len()];
        let mut removed_touch = vec![false; self.nodes.len()];
        for (e, k) in self.elements.iter().zip(&keep) {
            for &n in e {
                if *k {
                    used[n] = true;
                } else {
                    removed_touch[n] = true;
                }
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        let mut dirichlet = Vec::new();
        let mut distance = Vec::new();
        let scale = (self.domain.diameter()).max(1.0);
        for i in 0..self.nodes.len() {
            if used[i] {
                map[i] = nodes.len();
                nodes.push(self.nodes[i]);
                let d = self.distance[i];
                let interface = removed_touch[i]
                    || d >= strip.delta_in - TAG_TOL * scale
                    || (strip.delta_out > 0.0 && d <= strip.delta_out + TAG_TOL * scale);
                dirichlet.push(self.dirichlet[i] || interface);
                distance.push(d);
            }
        }
        let elements = self
            .elements
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(e, _)| [map[e[0]], map[e[1]]])
            .collect();
        Ok(Mesh1D {
            domain: self.domain.clone(),
            nodes,
            elements,
            ends: self.ends,
            dirichlet,
            distance,
        })
    }
}

impl TriMesh {
    pub fn restrict_to_strip(&self, strip: &StripSpec) -> Result<TriMesh> {
        strip.validate(&self.domain)?;
        let keep: Vec<bool> = self
            .triangles
            .iter()
            .map(|t| {
                let c = [
                    (self.vertices[t[0]][0] + self.vertices[t[1]][0] + self.vertices[t[2]][0]) / 3.0,
                    (self.vertices[t[0]][1] + self.vertices[t[1]][1] + self.vertices[t[2]][1]) / 3.0,
                ];
                let d = geometry::signed_distance(&self.domain, &c);
                strip.delta_out < d && d < strip.delta_in
            })
            .collect();
        let widest = self
            .triangles
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(t, _)| self.triangle_diameter(t))
            .fold(0.0, f64::max);
        let layers = if widest > 0.0 {
            ((strip.delta_in - strip.delta_out) / widest).floor() as usize
        } else {
            0
        };
        if layers < 4 {
            return Err(Error::StripTooThin {
                delta_out: strip.delta_out,
                delta_in: strip.delta_in,
                layers,
            });
        }
        let mut used = vec![false; self.vertices.len()];
        let mut removed_touch = vec![false; self.vertices.len()];
        for (t, k) in self.triangles.iter().zip(&keep) {
            for &n in t {
                if *k {
                    used[n] = true;
                } else {
                    removed_touch[n] = true;
                }
            }
        }
        let scale = self.domain.diameter().max(1.0);
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut out = TriMesh {
            domain: self.domain.clone(),
            vertices: Vec::new(),
            triangles: Vec::new(),
            boundary_edges: Vec::new(),
            dirichlet: Vec::new(),
            distance: Vec::new(),
        };
        for i in 0..self.vertices.len() {
            if used[i] {
                map[i] = out.vertices.len();
                out.vertices.push(self.vertices[i]);
                let d = self.distance[i];
                let interface = (removed_touch[i] && d > 0.0)
                    || d >= strip.delta_in - TAG_TOL * scale
                    || (strip.delta_out > 0.0 && d <= strip.delta_out + TAG_TOL * scale);
                out.dirichlet.push(self.dirichlet[i] || interface);
                out.distance.push(d);
            }
        }
        out.triangles = self
            .triangles
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(t, _)| [map[t[0]], map[t[1]], map[t[2]]])
            .collect();
        out.boundary_edges = self
            .boundary_edges
            .iter()
            .filter(|e| used[e.nodes[0]] && used[e.nodes[1]])
            .map(|e| BoundaryEdge { nodes: [map[e.nodes[0]], map[e.nodes[1]]], tag: e.tag })
            .collect();
        // a ∂Ω edge survives only if some kept triangle still owns it
        let owned: std::collections::HashSet<(usize, usize)> = out
            .outer_edges()
            .into_iter()
            .map(|e| (e[0].min(e[1]), e[0].max(e[1])))
            .collect();
        out.boundary_edges.retain(|e| owned.contains(&(e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]))));
        Ok(out)
    }
}

impl Mesh {
    pub fn domain(&self) -> &Domain {
        match self {
            Mesh::OneD(m) => &m.domain,
            Mesh::TwoD(m) => &m.domain,
        }
    }

    pub fn num_nodes(&self) -> usize {
        match self {
            Mesh::OneD(m) => m.nodes.len(),
            Mesh::TwoD(m) => m.vertices.len(),
        }
    }

    pub fn num_elements(&self) -> usize {
        match self {
            Mesh::OneD(m) => m.elements.len(),
            Mesh::TwoD(m) => m.triangles.len(),
        }
    }

    pub fn dirichlet(&self) -> &[bool] {
        match self {
            Mesh::OneD(m) => &m.dirichlet,
            Mesh::TwoD(m) => &m.dirichlet,
        }
    }

    pub fn distance(&self) -> &[f64] {
        match self {
            Mesh::OneD(m) => &m.distance,
            Mesh::TwoD(m) => &m.distance,
        }
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        match self {
            Mesh::OneD(m) => vec![m.nodes[i]],
            Mesh::TwoD(m) => m.vertices[i].to_vec(),
        }
    }

    /// Largest element diameter.
    pub fn max_element_size(&self) -> f64 {
        match self {
            Mesh::OneD(m) => m.element_lengths().into_iter().fold(0.0, f64::max),
            Mesh::TwoD(m) => m.max_edge(),
        }
    }

    pub fn min_element_size(&self) -> f64 {
        match self {
            Mesh::OneD(m) => m.element_lengths().into_iter().fold(f64::INFINITY, f64::min),
            Mesh::TwoD(m) => m.triangles.iter().map(|t| m.triangle_diameter(t)).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn restrict_to_strip(&self, strip: &StripSpec) -> Result<Mesh> {
        Ok(match self {
            Mesh::OneD(m) => Mesh::OneD(m.restrict_to_strip(strip)?),
            Mesh::TwoD(m) => Mesh::TwoD(m.restrict_to_strip(strip)?),
        })
    }

    /// Nested refinement: 1D elements are split in two, triangles in four.
    pub fn refine(&self) -> Result<Mesh> {
        Ok(match self {
            Mesh::OneD(m) => Mesh::OneD(m.refine(2)),
            Mesh::TwoD(m) => Mesh::TwoD(m.refine_uniform()?),
        })
    }

    /// Applies [`Mesh::refine`] `times` times (1D: one split into `2^times` pieces).
    pub fn refine_times(&self, times: usize) -> Result<Mesh> {
        match self {
            Mesh::OneD(m) => Ok(Mesh::OneD(m.refine(1 << times))),
            Mesh::TwoD(_) => {
                let mut out = self.clone();
                for _ in 0..times {
                    out = out.refine()?;
                }
                Ok(out)
            }
        }
    }

    /// Drops the Dirichlet condition on nodes off ∂Ω (strip interfaces become natural).
    pub fn release_interface(mut self) -> Mesh {
        let (dirichlet, distance) = match &mut self {
            Mesh::OneD(m) => (&mut m.dirichlet, &m.distance),
            Mesh::TwoD(m) => (&mut m.dirichlet, &m.distance),
        };
        for (flag, d) in dirichlet.iter_mut().zip(distance) {
            if *d > 0.0 {
                *flag = false;
            }
        }
        self
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            dimension: match self {
                Mesh::OneD(_) => 1,
                Mesh::TwoD(_) => 2,
            },
            nodes: self.num_nodes(),
            elements: self.num_elements(),
            free_nodes: self.dirichlet().iter().filter(|d| !**d).count(),
            min_element_size: self.min_element_size(),
            max_element_size: self.max_element_size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub dimension: usize,
    pub nodes: usize,
    pub elements: usize,
    pub free_nodes: usize,
    pub min_element_size: f64,
    pub max_element_size: f64,
}

// ---------------------------------------------------------------------------
// Torus

/// Meridian cross-section of a torus with the data of a single azimuthal mode.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisymmetricReduction {
    /// Disc centred at `(c, 0)` of radius `R` in `(r, z)` coordinates.
    pub cross_section: Domain,
    /// Measure weight `r`. [`AssemblyOptions::cylindrical`](crate::forms::AssemblyOptions::cylindrical)
    /// already applies it to every integral; do not pass it again as a denominator weight.
    pub weight: CoefficientExpr,
    /// Azimuthal potential `m²/r²`, to be multiplied by the diffusion coefficient.
    pub potential: CoefficientExpr,
    pub mode: u32,
}

pub fn axisymmetric_reduce(torus: &Domain, mode: u32) -> Result<AxisymmetricReduction> {
    let Domain::Torus { major, minor } = *torus else {
        return Err(Error::NotATorus);
    };
    let potential = if mode == 0 {
        coef("0")
    } else {
        coef(&format!("{}*r^-2", mode * mode))
    };
    Ok(AxisymmetricReduction {
        cross_section: Domain::Disc { center: [major, 0.0], radius: minor },
        weight: coef("r"),
        potential,
        mode,
    })
}

// ---------------------------------------------------------------------------
// Text format
//
//   hardylab-mesh 1
//   dim <1|2> vertices <nv> elements <ne> boundary <nb>
//   v <x> [<y>] <d> <free|dirichlet>      (nv lines)
//   e <i> <j> [<k>]                        (ne lines, 0-based)
//   b <i> <j> <gamma_s|gamma_r>            (nb lines; 1D: b <i> <dirichlet|robin>)

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::from("hardylab-mesh 1\n");
    let flag = |d: bool| if d { "dirichlet" } else { "free" };
    match mesh {
        Mesh::OneD(m) => {
            let robin = m.robin_nodes();
            let ends: Vec<usize> = (0..m.nodes.len()).filter(|&i| m.distance[i] == 0.0).collect();
            let _ = writeln!(s, "dim 1 vertices {} elements {} boundary {}", m.nodes.len(), m.elements.len(), ends.len());
            for i in 0..m.nodes.len() {
                let _ = writeln!(s, "v {:.17e} {:.17e} {}", m.nodes[i], m.distance[i], flag(m.dirichlet[i]));
            }
            for e in &m.elements {
                let _ = writeln!(s, "e {} {}", e[0], e[1]);
            }
            for i in ends {
                let _ = writeln!(s, "b {} {}", i, if robin.contains(&i) { "robin" } else { "dirichlet" });
            }
        }
        Mesh::TwoD(m) => {
            let _ = writeln!(
                s,
                "dim 2 vertices {} elements {} boundary {}",
                m.vertices.len(),
                m.triangles.len(),
                m.boundary_edges.len()
            );
            for i in 0..m.vertices.len() {
                let v = m.vertices[i];
                let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e} {}", v[0], v[1], m.distance[i], flag(m.dirichlet[i]));
            }
            for t in &m.triangles {
                let _ = writeln!(s, "e {} {} {}", t[0], t[1], t[2]);
            }
            for e in &m.boundary_edges {
                let tag = match e.tag {
                    EdgeTag::GammaS => "gamma_s",
                    EdgeTag::GammaR => "gamma_r",
                };
                let _ = writeln!(s, "b {} {} {}", e.nodes[0], e.nodes[1], tag);
            }
        }
    }
    s
}

/// Reads the text format back; `domain` supplies the exact geometry.
pub fn read_mesh(text: &str, domain: &Domain) -> Result<Mesh> {
    let bad = |line: usize, msg: &str| Error::Io(format!("mesh line {}: {msg}", line + 1));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (n0, magic) = lines.next().ok_or_else(|| bad(0, "empty input"))?;
    if magic.trim() != "hardylab-mesh 1" {
        return Err(bad(n0, "missing 'hardylab-mesh 1' header"));
    }
    let (n1, header) = lines.next().ok_or_else(|| bad(1, "missing counts"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 8 || h[0] != "dim" || h[2] != "vertices" || h[4] != "elements" || h[6] != "boundary" {
        return Err(bad(n1, "expected 'dim D vertices NV elements NE boundary NB'"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(n1, "bad count"));
    let (dim, nv, ne, nb) = (num(h[1])?, num(h[3])?, num(h[5])?, num(h[7])?);
    let float = |s: &str, n: usize| s.parse::<f64>().map_err(|_| bad(n, "bad number"));
    let index = |s: &str, n: usize, max: usize| -> Result<usize> {
        let v = s.parse::<usize>().map_err(|_| bad(n, "bad index"))?;
        if v >= max {
            return Err(bad(n, "index out of range"));
        }
        Ok(v)
    };
    let mut coords = Vec::with_capacity(nv);
    let mut dist = Vec::with_capacity(nv);
    let mut dir = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines.next().ok_or_else(|| bad(0, "truncated vertex list"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != dim + 3 || f[0] != "v" {
            return Err(bad(n, "malformed vertex line"));
        }
        let mut c = [0.0; 2];
        for k in 0..dim {
            c[k] = float(f[1 + k], n)?;
        }
        coords.push(c);
        dist.push(float(f[1 + dim], n)?);
        dir.push(match f[2 + dim] {
            "dirichlet" => true,
            "free" => false,
            _ => return Err(bad(n, "vertex flag must be free or dirichlet")),
        });
    }
    let mut elems = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, l) = lines.next().ok_or_else(|| bad(0, "truncated element list"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != dim + 2 || f[0] != "e" {
            return Err(bad(n, "malformed element line"));
        }
        let mut e = [0usize; 3];
        for k in 0..=dim {
            e[k] = index(f[1 + k], n, nv)?;
        }
        elems.push(e);
    }
    let mut bnd = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (n, l) = lines.next().ok_or_else(|| bad(0, "truncated boundary list"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != dim + 2 || f[0] != "b" {
            return Err(bad(n, "malformed boundary line"));
        }
        bnd.push((f[1..=dim].iter().map(|s| index(s, n, nv)).collect::<Result<Vec<_>>>()?, f[dim + 1].to_string(), n));
    }
    if dim == 1 {
        let (a, b) = interval_ends(domain)?;
        let nodes: Vec<f64> = coords.iter().map(|c| c[0]).collect();
        let mut ends = [BoundaryKind::Dirichlet; 2];
        for (ids, tag, n) in &bnd {
            let kind = match tag.as_str() {
                "dirichlet" => BoundaryKind::Dirichlet,
                "robin" => BoundaryKind::Robin,
                _ => return Err(bad(*n, "1D boundary tag must be dirichlet or robin")),
            };
            let x = nodes[ids[0]];
            if x == a {
                ends[0] = kind;
            } else if x == b {
                ends[1] = kind;
            }
        }
        Ok(Mesh::OneD(Mesh1D {
            domain: domain.clone(),
            nodes,
            elements: elems.iter().map(|e| [e[0], e[1]]).collect(),
            ends,
            dirichlet: dir,
            distance: dist,
        }))
    } else if dim == 2 {
        let mut boundary_edges = Vec::new();
        for (ids, tag, n) in &bnd {
            let tag = match tag.as_str() {
                "gamma_s" => EdgeTag::GammaS,
                "gamma_r" => EdgeTag::GammaR,
                _ => return Err(bad(*n, "2D boundary tag must be gamma_s or gamma_r")),
            };
            boundary_edges.push(BoundaryEdge { nodes: [ids[0], ids[1]], tag });
        }
        Ok(Mesh::TwoD(TriMesh {
            domain: domain.clone(),
            vertices: coords,
            triangles: elems,
            boundary_edges,
            dirichlet: dir,
            distance: dist,
        }))
    } else {
        Err(bad(n1, "dimension must be 1 or 2"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn mesh_1d_examples() {
        assert_eq!(build_mesh_1d(&unit(), 4, 1.0).unwrap().nodes, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = build_mesh_1d(&unit(), 4, 0.5).unwrap();
        for (x, e) in g.nodes.iter().zip([0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0]) {
            assert_relative_eq!(*x, e, epsilon = 1e-15);
        }
        assert_eq!(build_mesh_1d(&unit(), 2, 0.3).unwrap().nodes, vec![0.0, 0.5, 1.0]);
        assert!(matches!(build_mesh_1d(&unit(), 4, 0.0), Err(Error::InvalidGrading(_))));
        assert!(matches!(build_mesh_1d(&unit(), 4, 1.5), Err(Error::InvalidGrading(_))));
        let m = build_mesh_1d(&unit(), 4, 1.0).unwrap();
        assert_eq!(m.dirichlet, vec![true, false, false, false, true]);
    }

    proptest! {
        #[test]
        fn graded_size_ratio_is_exact(half in 1usize..40, g in 0.3f64..1.0) {
            let n = 2 * half;
            prop_assume!(g.powi(half as i32 - 1) > 1e-10);
            let m = build_mesh_1d(&unit(), n, g).unwrap();
            let lens = m.element_lengths();
            prop_assert!(lens.iter().all(|l| *l > 0.0));
            let max = lens.iter().cloned().fold(0.0, f64::max);
            let min = lens.iter().cloned().fold(f64::INFINITY, f64::min);
            let expect = g.powf(1.0 - half as f64);
            // lengths next to b are differences of numbers near b
            let slack = 1e-9 + 8.0 * f64::EPSILON / min;
            prop_assert!((max / min - expect).abs() <= slack * expect);
            prop_assert!((lens.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn strips_nest(d1 in 0.1f64..0.5, d2 in 0.1f64..0.5) {
            let m = build_mesh_1d(&unit(), 128, 0.97).unwrap();
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let small = m.restrict_to_strip(&StripSpec::touching(lo));
            let big = m.restrict_to_strip(&StripSpec::touching(hi)).unwrap();
            if let Ok(small) = small {
                for e in &small.elements {
                    let (x0, x1) = (small.nodes[e[0]], small.nodes[e[1]]);
                    prop_assert!(big.elements.iter().any(|f| big.nodes[f[0]] == x0 && big.nodes[f[1]] == x1));
                }
            }
        }
    }

    #[test]
    fn strip_examples() {
        let m = build_mesh_1d(&unit(), 64, 0.9).unwrap();
        let s = m.restrict_to_strip(&StripSpec::touching(0.25)).unwrap();
        let (a, b): (Vec<f64>, Vec<f64>) = s.nodes.iter().partition(|x| **x < 0.5);
        assert!(a.iter().cloned().fold(0.0, f64::max) >= 0.2 && b.iter().cloned().fold(1.0, f64::min) <= 0.8);
        for (x, d) in s.nodes.iter().zip(&s.dirichlet) {
            if *x == 0.0 || *x == 1.0 || (*x - 0.5).abs() > 0.24 && (*x - 0.5).abs() < 0.26 {
                let is_end = *x == 0.0 || *x == 1.0 || s.nodes.iter().all(|y| (y - 0.5).abs() >= (x - 0.5).abs() - 1e-15);
                if is_end {
                    assert!(*d);
                }
            }
        }
        let whole = m.restrict_to_strip(&StripSpec::touching(0.5)).unwrap();
        assert_eq!(whole.elements.len(), m.elements.len());
        let mid = whole.nodes.iter().position(|x| *x == 0.5).unwrap();
        assert!(whole.dirichlet[mid]);
        let u = build_mesh_1d(&unit(), 16, 1.0).unwrap();
        assert!(matches!(u.restrict_to_strip(&StripSpec::touching(0.01)), Err(Error::StripTooThin { .. })));
    }

    #[test]
    fn aligned_strip_interfaces() {
        let m = build_mesh_1d_aligned(&unit(), 0.25, 20, 0.8).unwrap();
        assert!(m.nodes.contains(&0.25) && m.nodes.contains(&0.75));
        let s = m.restrict_to_strip(&StripSpec::touching(0.25)).unwrap();
        assert_eq!(s.elements.len(), 40);
        assert_eq!(s.dirichlet.iter().filter(|d| **d).count(), 4);
        let half = build_mesh_1d_aligned(&unit(), 0.5, 10, 1.0).unwrap();
        assert_eq!(half.nodes.len(), 21);
        assert!(half.nodes.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(half.nodes[10], 0.5);
    }

    #[test]
    fn refinement_is_nested() {
        let m = build_mesh_1d(&unit(), 8, 0.7).unwrap();
        let r = m.refine(4);
        assert_eq!(r.elements.len(), 32);
        for x in &m.nodes {
            assert!(r.nodes.contains(x));
        }
        let mut xs = r.nodes.clone();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, r.nodes);
    }

    #[test]
    fn unit_square_templates() {
        let sq = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let m = build_trimesh(&sq, 0.25, 1.0).unwrap();
        assert_eq!(m.triangles.len(), 32);
        for t in &m.triangles {
            let a = signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
            assert_relative_eq!(a, 1.0 / 32.0, epsilon = 1e-15);
        }
        let g = build_trimesh(&sq, 0.25, 0.25).unwrap();
        let worst = g
            .triangles
            .iter()
            .filter(|t| t.iter().any(|&v| g.distance[v] == 0.0))
            .map(|t| g.triangle_diameter(t))
            .fold(0.0, f64::max);
        assert!(worst <= 0.0625 * 2f64.sqrt() + 1e-12);
        assert_relative_eq!(g.area(), 1.0, epsilon = 1e-12);
        assert!(g.triangles.iter().all(|t| signed_area(g.vertices[t[0]], g.vertices[t[1]], g.vertices[t[2]]) > 0.0));
    }

    /// Every edge is shared by two triangles or lies on ∂Ω; ∂Ω edges form closed loops.
    fn assert_conforming(m: &TriMesh) {
        let outer = m.outer_edges();
        for e in &outer {
            assert_eq!(m.distance[e[0]], 0.0, "interior hole at {:?}", m.vertices[e[0]]);
            assert_eq!(m.distance[e[1]], 0.0);
        }
        let mut deg = vec![0; m.vertices.len()];
        for e in &outer {
            deg[e[0]] += 1;
            deg[e[1]] += 1;
        }
        assert!(deg.iter().all(|d| *d == 0 || *d == 2));
        assert_eq!(outer.len(), m.boundary_edges.len());
    }

    #[test]
    fn curved_and_polygon_templates() {
        let disc = Domain::disc([0.0, 0.0], 1.0).unwrap();
        let m = build_trimesh(&disc, 0.2, 1.0).unwrap();
        let n = m.triangles.len() as f64;
        let est = PI / (0.5 * 0.04);
        assert!(n >= 0.5 * est && n <= 2.0 * est, "{n} vs {est}");
        assert_conforming(&m);
        assert!(m.area_defect().abs() < 0.01);
        let fine = build_trimesh(&disc, 0.05, 0.5).unwrap();
        assert!(fine.area_defect().abs() < 1e-3);
        assert_conforming(&fine);

        let ann = Domain::annulus([1.0, -1.0], 0.5, 1.5).unwrap();
        let a = build_trimesh(&ann, 0.05, 0.3).unwrap();
        assert_conforming(&a);
        assert!(a.area_defect().abs() < 1e-3);

        let tri = Domain::convex_polygon(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        let t = build_trimesh(&tri, 0.2, 0.5).unwrap();
        assert_conforming(&t);
        assert!(t.area_defect().abs() < 1e-10);
        for tr in &t.triangles {
            assert!(signed_area(t.vertices[tr[0]], t.vertices[tr[1]], t.vertices[tr[2]]) > 0.0);
        }

        assert!(matches!(build_trimesh(&disc, 0.6, 1.0), Err(Error::MeshGenerationFailure(_))));
        assert!(matches!(build_trimesh(&unit(), 0.1, 1.0), Err(Error::MeshGenerationFailure(_))));
    }

    #[test]
    fn red_refinement() {
        let disc = Domain::disc([0.0, 0.0], 1.0).unwrap();
        let m = build_trimesh(&disc, 0.2, 1.0).unwrap();
        let r = m.refine_uniform().unwrap();
        assert_eq!(r.triangles.len(), 4 * m.triangles.len());
        assert_conforming(&r);
        assert!(r.area_defect().abs() < m.area_defect().abs());
        assert!(r.boundary_edges.iter().all(|e| r.dirichlet[e.nodes[0]] && r.dirichlet[e.nodes[1]]));
    }

    #[test]
    fn strip_on_triangulation() {
        let disc = Domain::disc([0.0, 0.0], 1.0).unwrap();
        let m = build_trimesh(&disc, 0.05, 1.0).unwrap();
        let s = m.restrict_to_strip(&StripSpec::touching(0.5)).unwrap();
        assert!(s.triangles.len() < m.triangles.len());
        for (i, v) in s.vertices.iter().enumerate() {
            let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if rho < 0.5 + 1e-9 {
                assert!(s.dirichlet[i]);
            }
        }
        assert!(matches!(m.restrict_to_strip(&StripSpec::touching(0.1)), Err(Error::StripTooThin { .. })));
    }

    #[test]
    fn torus_reduction() {
        let t = Domain::torus(3.0, 1.0).unwrap();
        let r = axisymmetric_reduce(&t, 0).unwrap();
        assert_eq!(r.cross_section, Domain::Disc { center: [3.0, 0.0], radius: 1.0 });
        assert_eq!(r.weight.source(), "r");
        assert!(r.potential.is_zero());
        let r2 = axisymmetric_reduce(&t, 2).unwrap();
        let p = crate::expr::EvalPoint::cylindrical(2.0, 0.0, 0.0);
        assert_eq!(r2.potential.eval(&p), 1.0);
        let d2 = geometry::distance(&r.cross_section, &[3.5, 0.0]).unwrap();
        let d3 = geometry::distance(&t, &[3.5, 0.0, 0.0]).unwrap();
        assert_eq!(d2, d3);
        assert_eq!(d2, 0.5);
        assert!(matches!(axisymmetric_reduce(&unit(), 0), Err(Error::NotATorus)));
    }

    #[test]
    fn text_round_trip() {
        let m = Mesh::OneD(build_mesh_1d(&unit(), 6, 0.8).unwrap().with_ends(BoundaryKind::Robin, BoundaryKind::Dirichlet));
        let back = read_mesh(&write_mesh(&m), &unit()).unwrap();
        assert_eq!(back, m);
        let sq = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let t = Mesh::TwoD(build_trimesh(&sq, 0.25, 0.5).unwrap());
        let back = read_mesh(&write_mesh(&t), &sq).unwrap();
        assert_eq!(back, t);
        assert!(read_mesh("nonsense", &sq).is_err());
    }
}
