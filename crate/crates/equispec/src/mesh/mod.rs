//! Triangulated surface domains embedded in R^3.
//!
//! A [`SurfaceMesh`] is a consistently oriented triangle mesh with tagged
//! boundary edges, an optional analytic chart used to reproject refinement
//! midpoints, and an optional per-triangle metric override.  When no override
//! is present the Riemannian structure is the one induced by the embedding,
//! with the metric constant on each triangle (P1 geometry).

mod builders;
mod excise;
pub mod io;
mod metric;
mod refine;

pub use builders::{build_builtin, builtin_registry, DomainBuilder, Params};
pub use excise::{excise_disks, ExciseOutcome};
pub use refine::{refine, refine_with_map, RefineMap};

use std::collections::HashMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Robin,
}

impl BoundaryTag {
    pub fn letter(self) -> char {
        match self {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
            BoundaryTag::Robin => 'R',
        }
    }

    pub fn from_letter(c: char) -> Result<Self> {
        match c {
            'D' => Ok(BoundaryTag::Dirichlet),
            'N' => Ok(BoundaryTag::Neumann),
            'R' => Ok(BoundaryTag::Robin),
            _ => Err(Error::Format(format!("unknown boundary tag `{}`", c))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// Analytic chart a mesh approximates; refinement midpoints are reprojected
/// onto it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Chart {
    /// Unit sphere centered at the origin.
    Sphere,
    /// Surface of revolution r(z) = cosh(a|z| - s)/a about the z-axis.
    Catenoid { a: f64, h: f64, s: f64 },
    /// Flat unit disk in the plane z = 0; only boundary midpoints move.
    Disk,
    /// Flat plane; reprojection is the identity.
    Plane,
}

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub chart: Option<Chart>,
    /// Per-triangle first fundamental form [g11, g12, g22]; `None` means the
    /// embedding metric.
    pub metric_override: Option<Vec<[f64; 3]>>,
    /// Refinement generation, starting at the builder's base resolution.
    pub level: u32,
}

/// One tag per boundary edge of the mesh it was derived from.  This is the
/// decomposition actually consulted during assembly, so problems can retag
/// without rebuilding the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDecomposition(pub Vec<BoundaryTag>);

impl BoundaryDecomposition {
    pub fn all(n: usize, tag: BoundaryTag) -> Self {
        BoundaryDecomposition(vec![tag; n])
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut d = 0;
        let mut n = 0;
        let mut r = 0;
        for t in &self.0 {
            match t {
                BoundaryTag::Dirichlet => d += 1,
                BoundaryTag::Neumann => n += 1,
                BoundaryTag::Robin => r += 1,
            }
        }
        (d, n, r)
    }
}

/// Scalar coefficient field over a mesh.  Analytic variants survive
/// refinement exactly; samples are prolonged by edge-midpoint averaging.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Constant(f64),
    Expr(Expr),
    /// Squared norm of the second fundamental form of the catenoid profile
    /// r(z) = cosh(a|z| - s)/a.
    CatenoidJacobi { a: f64, s: f64 },
    Samples(Vec<f64>),
}

impl Coefficient {
    pub fn eval(&self, mesh: &SurfaceMesh) -> Result<Vec<f64>> {
        match self {
            Coefficient::Constant(c) => Ok(vec![*c; mesh.vertices.len()]),
            Coefficient::Expr(e) => Ok(mesh
                .vertices
                .iter()
                .map(|p| e.eval(p.x, p.y, p.z))
                .collect()),
            Coefficient::CatenoidJacobi { a, s } => Ok(mesh
                .vertices
                .iter()
                .map(|p| {
                    let t = a * p.z.abs() - s;
                    (a * a + 1.0 / (a * a)) / t.cosh().powi(4)
                })
                .collect()),
            Coefficient::Samples(v) => {
                if v.len() != mesh.vertices.len() {
                    return Err(Error::InvalidInput(format!(
                        "coefficient has {} samples for a mesh with {} vertices",
                        v.len(),
                        mesh.vertices.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }

    fn prolong(&self, map: &RefineMap) -> Coefficient {
        match self {
            Coefficient::Samples(v) => {
                let mut out = v.clone();
                out.reserve(map.midpoints.len());
                for &(a, b) in &map.midpoints {
                    out.push(0.5 * (v[a] + v[b]));
                }
                Coefficient::Samples(out)
            }
            other => other.clone(),
        }
    }
}

/// A full instance of the bilinear form: domain, potential, Robin
/// coefficient, boundary decomposition, optional conformal factor history.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub mesh: SurfaceMesh,
    pub potential: Coefficient,
    pub robin_coefficient: Coefficient,
    pub boundary: BoundaryDecomposition,
    /// Accumulated per-vertex conformal factor, if any conformal change has
    /// been applied.  Strictly positive.
    pub conformal_factor: Option<Vec<f64>>,
}

impl ProblemSpec {
    /// Problem with the mesh's own boundary tags, potential q and Robin
    /// coefficient r.
    pub fn new(mesh: SurfaceMesh, potential: Coefficient, robin: Coefficient) -> Self {
        let boundary = BoundaryDecomposition(mesh.boundary_edges.iter().map(|e| e.tag).collect());
        ProblemSpec {
            mesh,
            potential,
            robin_coefficient: robin,
            boundary,
            conformal_factor: None,
        }
    }

    pub fn laplacian(mesh: SurfaceMesh) -> Self {
        Self::new(mesh, Coefficient::Constant(0.0), Coefficient::Constant(0.0))
    }

    pub fn potential_samples(&self) -> Result<Vec<f64>> {
        self.potential.eval(&self.mesh)
    }

    pub fn robin_samples(&self) -> Result<Vec<f64>> {
        self.robin_coefficient.eval(&self.mesh)
    }

    /// Retag every boundary edge whose midpoint satisfies the predicate.
    pub fn retag_where<F: Fn(Vector3<f64>, Vector3<f64>) -> bool>(
        &mut self,
        pred: F,
        tag: BoundaryTag,
    ) -> usize {
        let mut changed = 0;
        for (k, e) in self.mesh.boundary_edges.iter().enumerate() {
            let pa = self.mesh.vertices[e.a];
            let pb = self.mesh.vertices[e.b];
            if pred(pa, pb) {
                self.boundary.0[k] = tag;
                changed += 1;
            }
        }
        changed
    }

    /// Refine the mesh once and carry the coefficients along.
    pub fn refine(&self) -> Result<ProblemSpec> {
        if self.mesh.metric_override.is_some() {
            return Err(Error::InvalidInput(
                "cannot refine a mesh with a metric override; apply the conformal change \
                 after refinement instead"
                    .into(),
            ));
        }
        let (fine, map) = refine::refine_with_map(&self.mesh)?;
        // boundary edge k of the coarse mesh becomes edges 2k, 2k+1
        let mut tags = Vec::with_capacity(fine.boundary_edges.len());
        for t in &self.boundary.0 {
            tags.push(*t);
            tags.push(*t);
        }
        debug_assert_eq!(tags.len(), fine.boundary_edges.len());
        let mut fine = fine;
        for (e, t) in fine.boundary_edges.iter_mut().zip(&tags) {
            e.tag = *t;
        }
        Ok(ProblemSpec {
            mesh: fine,
            potential: self.potential.prolong(&map),
            robin_coefficient: self.robin_coefficient.prolong(&map),
            boundary: BoundaryDecomposition(tags),
            conformal_factor: None,
        })
    }

    /// Rescale the metric by rho^2, the potential by rho^-2 and the Robin
    /// coefficient by rho^-1; index and nullity of the form are unchanged.
    pub fn apply_conformal_change(&self, rho: &[f64]) -> Result<ProblemSpec> {
        metric::apply_conformal_change(self, rho)
    }

    /// Vertices eliminated by the Dirichlet condition: every endpoint of a
    /// Dirichlet-tagged edge, including corners shared with other tags.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut constrained = vec![false; self.mesh.vertices.len()];
        for (k, e) in self.mesh.boundary_edges.iter().enumerate() {
            if self.boundary.0[k] == BoundaryTag::Dirichlet {
                constrained[e.a] = true;
                constrained[e.b] = true;
            }
        }
        constrained
    }
}

/// Bookkeeping from a submesh extraction back to the parent mesh.
#[derive(Clone, Debug)]
pub struct SubmeshMap {
    pub vertex_to_parent: Vec<usize>,
    pub triangle_to_parent: Vec<usize>,
    pub parent_vertex_to_sub: HashMap<usize, usize>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SurfaceMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Map (min, max) vertex pair -> incident triangle indices.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                map.entry(key).or_default().push(t);
            }
        }
        map
    }

    /// Structural validation: manifold edges, globally consistent
    /// orientation, boundary list matching the true boundary, valid metrics.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for tri in &self.triangles {
            for &v in tri {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!(
                        "triangle references vertex {} of {}",
                        v, nv
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh("degenerate triangle (repeated vertex)".into()));
            }
        }
        // every edge in 1 or 2 triangles; orientation: an interior edge must
        // appear once in each direction
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        for (&(a, b), &cnt) in &directed {
            if cnt > 1 {
                return Err(Error::InvalidMesh(format!(
                    "edge ({}, {}) traversed {} times in the same direction; orientation \
                     is inconsistent or the mesh is non-manifold",
                    a, b, cnt
                )));
            }
            let rev = directed.get(&(b, a)).copied().unwrap_or(0);
            if rev > 1 {
                return Err(Error::InvalidMesh("non-manifold edge".into()));
            }
        }
        // boundary list must be exactly the singly-traversed edges
        let mut boundary_expected: Vec<(usize, usize)> = directed
            .iter()
            .filter(|(&(a, b), _)| !directed.contains_key(&(b, a)))
            .map(|(&e, _)| edge_key(e.0, e.1))
            .collect();
        boundary_expected.sort_unstable();
        let mut boundary_declared: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| edge_key(e.a, e.b))
            .collect();
        boundary_declared.sort_unstable();
        if boundary_expected != boundary_declared {
            return Err(Error::InvalidMesh(format!(
                "declared boundary ({} edges) does not match mesh boundary ({} edges)",
                boundary_declared.len(),
                boundary_expected.len()
            )));
        }
        // positive-definite per-triangle metric
        for t in 0..self.triangles.len() {
            let g = self.induced_metric(t)?;
            let det = g[0] * g[2] - g[1] * g[1];
            if g[0] <= 0.0 || det <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "triangle {} has a non positive definite metric",
                    t
                )));
            }
        }
        if let Some(ov) = &self.metric_override {
            if ov.len() != self.triangles.len() {
                return Err(Error::InvalidMesh(
                    "metric override length does not match triangle count".into(),
                ));
            }
        }
        Ok(())
    }

    /// Per-triangle first fundamental form [g11, g12, g22] in the reference
    /// frame (e1, e2) = (v1 - v0, v2 - v0); the override wins when present.
    pub fn induced_metric(&self, t: usize) -> Result<[f64; 3]> {
        metric::induced_metric(self, t)
    }

    /// Riemannian triangle area, sqrt(det g)/2.
    pub fn triangle_area(&self, t: usize) -> Result<f64> {
        let g = self.induced_metric(t)?;
        let det = g[0] * g[2] - g[1] * g[1];
        if det <= 0.0 {
            return Err(Error::InvalidMesh(format!("triangle {} is degenerate", t)));
        }
        Ok(0.5 * det.sqrt())
    }

    pub fn total_area(&self) -> Result<f64> {
        let mut a = 0.0;
        for t in 0..self.triangles.len() {
            a += self.triangle_area(t)?;
        }
        Ok(a)
    }

    /// Length of a boundary edge under the effective metric.
    pub fn boundary_edge_length(&self, k: usize) -> Result<f64> {
        let e = &self.boundary_edges[k];
        if self.metric_override.is_none() {
            return Ok((self.vertices[e.a] - self.vertices[e.b]).norm());
        }
        // locate the incident triangle and the edge direction in reference
        // coordinates
        for (t, tri) in self.triangles.iter().enumerate() {
            for k2 in 0..3 {
                let (p, q) = (tri[k2], tri[(k2 + 1) % 3]);
                if edge_key(p, q) == edge_key(e.a, e.b) {
                    let g = self.induced_metric(t)?;
                    // reference directions: edge 0 = (1,0), edge 1 = (-1,1), edge 2 = (0,-1)
                    let d: [f64; 2] = match k2 {
                        0 => [1.0, 0.0],
                        1 => [-1.0, 1.0],
                        _ => [0.0, -1.0],
                    };
                    let len2 =
                        g[0] * d[0] * d[0] + 2.0 * g[1] * d[0] * d[1] + g[2] * d[1] * d[1];
                    return Ok(len2.sqrt());
                }
            }
        }
        Err(Error::InvalidMesh(format!(
            "boundary edge {} has no incident triangle",
            k
        )))
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let d = (self.vertices[tri[k]] - self.vertices[tri[(k + 1) % 3]]).norm();
                h = h.max(d);
            }
        }
        h
    }

    /// Unit normal of a triangle from its embedding (orientation-dependent).
    pub fn triangle_normal(&self, t: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangles[t];
        let n = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
        let len = n.norm();
        if len == 0.0 {
            Vector3::zeros()
        } else {
            n / len
        }
    }

    /// Exact per-vertex normals from the analytic chart, oriented to match
    /// the triangle orientation field.  None when the mesh has no chart with
    /// a well-defined normal.
    pub fn analytic_vertex_normals(&self) -> Option<Vec<Vector3<f64>>> {
        match self.chart? {
            Chart::Sphere => Some(self.vertices.iter().map(|p| p / p.norm()).collect()),
            Chart::Disk => Some(vec![Vector3::new(0.0, 0.0, 1.0); self.vertices.len()]),
            Chart::Catenoid { a, s, .. } => {
                // two branches (original and mirrored annulus) coincide on
                // the equator; disambiguate by the averaged face normal
                let averaged = self.vertex_normals_angle_weighted();
                Some(
                    self.vertices
                        .iter()
                        .zip(&averaged)
                        .map(|(p, avg)| {
                            let rho = (p.x * p.x + p.y * p.y).sqrt();
                            let t = a * p.z.abs() - s;
                            let c = t.cosh();
                            let rp = t.sinh();
                            let upper =
                                Vector3::new(-p.x / rho, -p.y / rho, rp).unscale(c);
                            let lower = Vector3::new(p.x / rho, p.y / rho, rp).unscale(c);
                            if upper.dot(avg) >= lower.dot(avg) {
                                upper.normalize()
                            } else {
                                lower.normalize()
                            }
                        })
                        .collect(),
                )
            }
            Chart::Plane => None,
        }
    }

    /// Per-vertex unit normals: exact chart normals when available (the
    /// angle-weighted average has an O(h) tangential error on the irregular
    /// stars produced by chart reprojection), angle-weighted otherwise.
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        self.analytic_vertex_normals()
            .unwrap_or_else(|| self.vertex_normals_angle_weighted())
    }

    /// Per-vertex unit normals, angle-weighted over incident triangles.
    pub fn vertex_normals_angle_weighted(&self) -> Vec<Vector3<f64>> {
        let mut normals = vec![Vector3::zeros(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let n = self.triangle_normal(t);
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let u = (self.vertices[tri[(k + 1) % 3]] - p).normalize();
                let v = (self.vertices[tri[(k + 2) % 3]] - p).normalize();
                let angle = u.dot(&v).clamp(-1.0, 1.0).acos();
                normals[tri[k]] += angle * n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }

    /// Connected components over triangles (edge adjacency); returns the
    /// component id of every triangle and the number of components.
    pub fn triangle_components(&self) -> (Vec<usize>, usize) {
        let incidence = self.edge_incidence();
        let mut comp = vec![usize::MAX; self.triangles.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for seed in 0..self.triangles.len() {
            if comp[seed] != usize::MAX {
                continue;
            }
            comp[seed] = next;
            stack.push(seed);
            while let Some(t) = stack.pop() {
                let tri = self.triangles[t];
                for k in 0..3 {
                    let key = edge_key(tri[k], tri[(k + 1) % 3]);
                    for &other in &incidence[&key] {
                        if comp[other] == usize::MAX {
                            comp[other] = next;
                            stack.push(other);
                        }
                    }
                }
            }
            next += 1;
        }
        (comp, next)
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
        let mut used: std::collections::HashSet<usize> = std::collections::HashSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                edges.insert(edge_key(tri[k], tri[(k + 1) % 3]));
                used.insert(tri[k]);
            }
        }
        used.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Extract the submesh induced by a set of triangles.  Parent boundary
    /// edges keep their tags; edges that become boundary through the cut are
    /// tagged `interface_tag`.  Unreferenced vertices are dropped.
    pub fn submesh(&self, tris: &[usize], interface_tag: BoundaryTag) -> Result<(SurfaceMesh, SubmeshMap)> {
        let mut selected = vec![false; self.triangles.len()];
        for &t in tris {
            if t >= self.triangles.len() {
                return Err(Error::InvalidInput(format!(
                    "triangle index {} out of range {}",
                    t,
                    self.triangles.len()
                )));
            }
            if selected[t] {
                return Err(Error::InvalidInput(format!("triangle {} listed twice", t)));
            }
            selected[t] = true;
        }
        let mut vertex_to_parent = Vec::new();
        let mut parent_vertex_to_sub = HashMap::new();
        let mut triangles = Vec::with_capacity(tris.len());
        let mut triangle_to_parent = Vec::with_capacity(tris.len());
        let sub_index = |pv: usize,
                             vertex_to_parent: &mut Vec<usize>,
                             map: &mut HashMap<usize, usize>|
         -> usize {
            *map.entry(pv).or_insert_with(|| {
                vertex_to_parent.push(pv);
                vertex_to_parent.len() - 1
            })
        };
        for &t in tris {
            let tri = self.triangles[t];
            let mapped = [
                sub_index(tri[0], &mut vertex_to_parent, &mut parent_vertex_to_sub),
                sub_index(tri[1], &mut vertex_to_parent, &mut parent_vertex_to_sub),
                sub_index(tri[2], &mut vertex_to_parent, &mut parent_vertex_to_sub),
            ];
            triangles.push(mapped);
            triangle_to_parent.push(t);
        }
        let vertices: Vec<Vector3<f64>> =
            vertex_to_parent.iter().map(|&pv| self.vertices[pv]).collect();

        // boundary edges of the submesh
        let parent_tags: HashMap<(usize, usize), BoundaryTag> = self
            .boundary_edges
            .iter()
            .map(|e| (edge_key(e.a, e.b), e.tag))
            .collect();
        let mut directed_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                *directed_count
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_insert(0) += 1;
            }
        }
        let mut boundary_edges = Vec::new();
        let mut seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = edge_key(a, b);
                if directed_count[&key] == 1 && seen.insert(key) {
                    let parent_key = edge_key(vertex_to_parent[a], vertex_to_parent[b]);
                    let tag = parent_tags
                        .get(&parent_key)
                        .copied()
                        .unwrap_or(interface_tag);
                    boundary_edges.push(BoundaryEdge { a, b, tag });
                }
            }
        }

        let metric_override = self
            .metric_override
            .as_ref()
            .map(|ov| triangle_to_parent.iter().map(|&t| ov[t]).collect());

        let sub = SurfaceMesh {
            vertices,
            triangles,
            boundary_edges,
            chart: self.chart,
            metric_override,
            level: self.level,
        };
        sub.validate()?;
        Ok((
            sub,
            SubmeshMap {
                vertex_to_parent,
                triangle_to_parent,
                parent_vertex_to_sub,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octant_level0_is_one_triangle() {
        let m = build_builtin("sphere_octant", 0, &Params::default()).unwrap();
        assert_eq!(m.n_triangles(), 1);
        assert_eq!(m.boundary_edges.len(), 3);
        m.validate().unwrap();
    }

    #[test]
    fn full_sphere_has_no_boundary() {
        let m = build_builtin("full_sphere", 0, &Params::default()).unwrap();
        assert_eq!(m.n_triangles(), 8);
        assert!(m.boundary_edges.is_empty());
        assert_eq!(m.euler_characteristic(), 2);
        m.validate().unwrap();
    }

    #[test]
    fn refine_quadruples_triangles_and_keeps_tags() {
        let m = build_builtin("sphere_octant", 0, &Params::default()).unwrap();
        let f = refine(&m).unwrap();
        assert_eq!(f.n_triangles(), 4);
        assert_eq!(f.boundary_edges.len(), 6);
        assert!(f.boundary_edges.iter().all(|e| e.tag == BoundaryTag::Neumann));
        f.validate().unwrap();
        // all vertices on the unit sphere
        for v in &f.vertices {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn octant_area_converges_to_pi_over_2() {
        // quadrature oracle: the octant of the unit sphere has area 4*pi/8
        let exact = std::f64::consts::PI / 2.0;
        let mut errs = Vec::new();
        for level in 0..6 {
            let m = build_builtin("sphere_octant", level, &Params::default()).unwrap();
            errs.push((exact - m.total_area().unwrap()).abs());
        }
        // observed order over the last three levels; edge length halves per
        // level, so order p shows up as an error ratio of 2^p
        let p = (errs[4] / errs[5]).log2();
        assert!(p > 1.9, "observed order {}, errors {:?}", p, errs);
        assert!(errs[5] < 2e-3);
    }

    #[test]
    fn catenoid_vertices_on_profile() {
        let m = build_builtin("catenoid_K0", 1, &Params::default()).unwrap();
        let (a, s) = match m.chart {
            Some(Chart::Catenoid { a, s, .. }) => (a, s),
            _ => panic!("expected catenoid chart"),
        };
        for v in &m.vertices {
            let r = (v.x * v.x + v.y * v.y).sqrt();
            let expect = (a * v.z - s).cosh() / a;
            assert!((r - expect).abs() < 1e-12, "off profile by {}", (r - expect).abs());
        }
        m.validate().unwrap();
    }

    #[test]
    fn submesh_inherits_boundary_tags() {
        let m = build_builtin("sphere_hemisphere", 1, &Params::default()).unwrap();
        // keep half the triangles (quadrant x >= 0, by centroid)
        let keep: Vec<usize> = (0..m.n_triangles())
            .filter(|&t| {
                let tri = m.triangles[t];
                let c = (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0;
                c.x > 0.0
            })
            .collect();
        let (sub, map) = m.submesh(&keep, BoundaryTag::Dirichlet).unwrap();
        sub.validate().unwrap();
        assert_eq!(sub.n_triangles(), keep.len());
        // interface edges picked up the requested tag, equator edges kept Neumann
        assert!(sub.boundary_edges.iter().any(|e| e.tag == BoundaryTag::Dirichlet));
        assert!(sub.boundary_edges.iter().any(|e| e.tag == BoundaryTag::Neumann));
        for (svi, &pvi) in map.vertex_to_parent.iter().enumerate() {
            assert_eq!(sub.vertices[svi], m.vertices[pvi]);
        }
    }

    #[test]
    fn union_mesh_has_two_components() {
        let m = build_builtin("union_pm_K0", 0, &Params::default()).unwrap();
        let (_, n) = m.triangle_components();
        assert_eq!(n, 2);
        m.validate().unwrap();
    }
}
