//! Built-in model domains behind a name-keyed registry.
//!
//! Every builder produces analytically exact vertex positions (spherical
//! vertices on the unit sphere, catenoid vertices on the profile surface of
//! revolution) with boundary edges tagged Neumann, and halves the maximum
//! edge length per refinement level.  Structured quad regions are split
//! crisscross (four triangles around a face center) so that the meshes stay
//! invariant under the dihedral symmetries the builders advertise.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::Vector3;

use super::{refine, BoundaryEdge, BoundaryTag, Chart, SurfaceMesh};
use crate::error::{Error, Result};

/// Named real parameters for a domain builder.  Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, f64>);

impl Params {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    pub fn set(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    fn check_keys(&self, allowed: &[&str], builder: &str) -> Result<()> {
        for k in self.0.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidParam(format!(
                    "`{}` does not accept parameter `{}` (allowed: {})",
                    builder,
                    k,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// One interchangeable mesh generator, selected by name at runtime.
pub trait DomainBuilder: Send + Sync {
    fn id(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh>;
}

/// All registered builders, in a stable order.
pub fn builtin_registry() -> &'static [Box<dyn DomainBuilder>] {
    static REGISTRY: OnceLock<Vec<Box<dyn DomainBuilder>>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        vec![
            Box::new(SphereOctant),
            Box::new(SphereLune),
            Box::new(SphereHemisphere),
            Box::new(FullSphere),
            Box::new(CatenoidK0),
            Box::new(UnionPmK0),
            Box::new(UnitDisk),
            Box::new(LuneCut),
        ]
    })
}

/// Build a registered domain.  The id may carry a parenthesized argument,
/// e.g. `lune_cut(0.3)`, which is passed as the builder's primary parameter.
pub fn build_builtin(id: &str, level: u32, params: &Params) -> Result<SurfaceMesh> {
    let (name, arg) = match (id.find('('), id.ends_with(')')) {
        (Some(open), true) => {
            let arg: f64 = id[open + 1..id.len() - 1]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad argument in `{}`", id)))?;
            (&id[..open], Some(arg))
        }
        _ => (id, None),
    };
    for b in builtin_registry() {
        if b.id() == name {
            let mut p = params.clone();
            if let Some(a) = arg {
                let key = match name {
                    "lune_cut" => "zeta",
                    _ => {
                        return Err(Error::InvalidParam(format!(
                            "`{}` takes no parenthesized argument",
                            name
                        )))
                    }
                };
                p.0.insert(key.to_string(), a);
            }
            return b.build(level, &p);
        }
    }
    Err(Error::UnknownDomain(id.to_string()))
}

// ---------------------------------------------------------------------------
// shared construction helpers
// ---------------------------------------------------------------------------

/// Derive boundary edges (single-incidence edges) tagged Neumann, oriented as
/// traversed by their unique triangle.
fn derive_neumann_boundary(vertices: &[Vector3<f64>], triangles: &[[usize; 3]]) -> Vec<BoundaryEdge> {
    let _ = vertices;
    let mut count: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = if a < b { (a, b) } else { (b, a) };
            *count.entry(key).or_insert(0) += 1;
        }
    }
    let mut out = Vec::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = if a < b { (a, b) } else { (b, a) };
            if count[&key] == 1 {
                out.push(BoundaryEdge {
                    a,
                    b,
                    tag: BoundaryTag::Neumann,
                });
            }
        }
    }
    out
}

fn finish(
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    chart: Option<Chart>,
    level: u32,
) -> Result<SurfaceMesh> {
    let boundary_edges = derive_neumann_boundary(&vertices, &triangles);
    let mut mesh = SurfaceMesh {
        vertices,
        triangles,
        boundary_edges,
        chart,
        metric_override: None,
        level: 0,
    };
    for _ in 0..level {
        mesh = refine::refine(&mesh)?;
    }
    mesh.validate()?;
    Ok(mesh)
}

/// Octahedron faces selected by a sign filter, refined on the unit sphere.
/// Domains built this way nest exactly: the octant mesh is a sub-mesh of the
/// lune, hemisphere and full sphere at every level.
fn octa_domain(level: u32, keep: impl Fn([f64; 3]) -> bool) -> Result<SurfaceMesh> {
    let verts = [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, -1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(0.0, 0.0, -1.0),
    ];
    // faces of the octahedron listed per octant sign (sx, sy, sz),
    // oriented with outward normals
    let faces: [([usize; 3], [f64; 3]); 8] = [
        ([0, 2, 4], [1.0, 1.0, 1.0]),
        ([2, 1, 4], [-1.0, 1.0, 1.0]),
        ([1, 3, 4], [-1.0, -1.0, 1.0]),
        ([3, 0, 4], [1.0, -1.0, 1.0]),
        ([2, 0, 5], [1.0, 1.0, -1.0]),
        ([1, 2, 5], [-1.0, 1.0, -1.0]),
        ([3, 1, 5], [-1.0, -1.0, -1.0]),
        ([0, 3, 5], [1.0, -1.0, -1.0]),
    ];
    let mut used = vec![false; 6];
    let mut triangles = Vec::new();
    for (tri, octant) in faces {
        if keep(octant) {
            triangles.push(tri);
            for v in tri {
                used[v] = true;
            }
        }
    }
    // compact unused corner vertices
    let mut remap = vec![usize::MAX; 6];
    let mut vertices = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = vertices.len();
            vertices.push(verts[i]);
        }
    }
    for tri in &mut triangles {
        for v in tri.iter_mut() {
            *v = remap[*v];
        }
    }
    finish(vertices, triangles, Some(Chart::Sphere), level)
}

/// Structured band mesh between consecutive vertex rings, split crisscross
/// around exact on-surface face centers.  `rings[i]` must all have the same
/// length; consecutive rings are joined by `n_theta` quads.
struct BandMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
}

impl BandMesh {
    fn new() -> Self {
        BandMesh {
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    fn push_ring(&mut self, ring: &[Vector3<f64>]) -> Vec<usize> {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(ring);
        (base..base + ring.len()).collect()
    }

    /// Crisscross band between two rings of equal length; `centers[j]` is the
    /// on-surface center of quad j.  Quad j has corners
    /// (inner[j], outer[j], outer[j+1], inner[j+1]).
    fn push_band(&mut self, inner: &[usize], outer: &[usize], centers: &[Vector3<f64>], wrap: bool) {
        let n = inner.len();
        debug_assert_eq!(outer.len(), n);
        let m = if wrap { n } else { n - 1 };
        debug_assert_eq!(centers.len(), m);
        for j in 0..m {
            let jn = if wrap { (j + 1) % n } else { j + 1 };
            let c = self.vertices.len();
            self.vertices.push(centers[j]);
            let (a, b, d, e) = (inner[j], outer[j], outer[jn], inner[jn]);
            self.triangles.push([a, b, c]);
            self.triangles.push([b, d, c]);
            self.triangles.push([d, e, c]);
            self.triangles.push([e, a, c]);
        }
    }

    /// Triangle fan from an apex to a ring: (apex, ring[j], ring[j+1]).
    fn push_fan(&mut self, apex: usize, ring: &[usize], wrap: bool, apex_first: bool) {
        let n = ring.len();
        let m = if wrap { n } else { n - 1 };
        for j in 0..m {
            let jn = if wrap { (j + 1) % n } else { j + 1 };
            if apex_first {
                self.triangles.push([apex, ring[j], ring[jn]]);
            } else {
                self.triangles.push([apex, ring[jn], ring[j]]);
            }
        }
    }
}

fn catenoid_point(a: f64, s: f64, zeta: f64, theta: f64) -> Vector3<f64> {
    let r = (a * zeta - s).cosh() / a;
    Vector3::new(r * theta.cos(), r * theta.sin(), zeta)
}

fn build_catenoid(level: u32, params: &Params) -> Result<SurfaceMesh> {
    params.check_keys(&["a", "h", "s", "n_z", "n_theta"], "catenoid_K0")?;
    let a = params.get_or("a", 2.3328);
    let h = params.get_or("h", 0.87028);
    let s = params.get_or("s", 1.4907);
    if a <= 0.0 || h <= 0.0 || s <= 0.0 {
        return Err(Error::InvalidParam(
            "catenoid parameters a, h, s must be positive".into(),
        ));
    }
    let n_z = params.get_or("n_z", 3.0) as usize;
    let n_theta = params.get_or("n_theta", 12.0) as usize;
    if n_z < 1 || n_theta < 3 {
        return Err(Error::InvalidParam("need n_z >= 1 and n_theta >= 3".into()));
    }
    let mut bm = BandMesh::new();
    let ring = |zeta: f64, offset: f64, n: usize| -> Vec<Vector3<f64>> {
        (0..n)
            .map(|j| {
                let theta = std::f64::consts::TAU * (j as f64 + offset) / n as f64;
                catenoid_point(a, s, zeta, theta)
            })
            .collect()
    };
    let mut prev = bm.push_ring(&ring(0.0, 0.0, n_theta));
    for i in 0..n_z {
        let z_hi = h * (i + 1) as f64 / n_z as f64;
        let z_mid = h * (i as f64 + 0.5) / n_z as f64;
        let next = bm.push_ring(&ring(z_hi, 0.0, n_theta));
        let centers = ring(z_mid, 0.5, n_theta);
        bm.push_band(&prev, &next, &centers, true);
        prev = next;
    }
    finish(bm.vertices, bm.triangles, Some(Chart::Catenoid { a, h, s }), level)
}

// ---------------------------------------------------------------------------
// the builders
// ---------------------------------------------------------------------------

struct SphereOctant;

impl DomainBuilder for SphereOctant {
    fn id(&self) -> &'static str {
        "sphere_octant"
    }
    fn describe(&self) -> &'static str {
        "spherical triangle S^2 ∩ {x,y,z > 0}"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        params.check_keys(&[], self.id())?;
        octa_domain(level, |s| s == [1.0, 1.0, 1.0])
    }
}

struct SphereLune;

impl DomainBuilder for SphereLune {
    fn id(&self) -> &'static str {
        "sphere_lune"
    }
    fn describe(&self) -> &'static str {
        "quarter sphere S^2 ∩ {x > 0, y > 0}"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        params.check_keys(&[], self.id())?;
        octa_domain(level, |s| s[0] == 1.0 && s[1] == 1.0)
    }
}

struct SphereHemisphere;

impl DomainBuilder for SphereHemisphere {
    fn id(&self) -> &'static str {
        "sphere_hemisphere"
    }
    fn describe(&self) -> &'static str {
        "upper hemisphere S^2 ∩ {z > 0}; sym_k switches to an azimuthally structured mesh"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        params.check_keys(&["sym_k", "n_phi", "n_theta"], self.id())?;
        match params.get("sym_k") {
            None => octa_domain(level, |s| s[2] == 1.0),
            Some(k) => {
                let sphere = build_uv_sphere(level, params, k as usize)?;
                // upper half by triangle centroid
                let keep: Vec<usize> = (0..sphere.n_triangles())
                    .filter(|&t| {
                        let tri = sphere.triangles[t];
                        (sphere.vertices[tri[0]].z
                            + sphere.vertices[tri[1]].z
                            + sphere.vertices[tri[2]].z)
                            > 0.0
                    })
                    .collect();
                let (sub, _) = sphere.submesh(&keep, BoundaryTag::Neumann)?;
                Ok(sub)
            }
        }
    }
}

struct FullSphere;

impl DomainBuilder for FullSphere {
    fn id(&self) -> &'static str {
        "full_sphere"
    }
    fn describe(&self) -> &'static str {
        "closed unit sphere; sym_k builds a mesh adapted to k-fold azimuthal symmetry"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        params.check_keys(&["sym_k", "n_phi", "n_theta"], self.id())?;
        match params.get("sym_k") {
            None => octa_domain(level, |_| true),
            Some(k) => build_uv_sphere(level, params, k as usize),
        }
    }
}

/// Latitude/longitude sphere whose vertex set is invariant under the
/// pyramidal and prismatic groups of order 2k and 4k: n_theta is forced to a
/// multiple of 4k and the ring count to an even number.
fn build_uv_sphere(level: u32, params: &Params, k: usize) -> Result<SurfaceMesh> {
    if k == 0 {
        return Err(Error::InvalidParam("sym_k must be positive".into()));
    }
    let mut n_theta = params.get_or("n_theta", 24.0) as usize;
    let step = 4 * k;
    n_theta = n_theta.div_ceil(step) * step;
    let mut n_phi = params.get_or("n_phi", 8.0) as usize;
    if n_phi % 2 == 1 {
        n_phi += 1;
    }
    let sphere_point = |phi: f64, theta: f64| -> Vector3<f64> {
        Vector3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos())
    };
    let ring = |i: f64, offset: f64| -> Vec<Vector3<f64>> {
        let phi = std::f64::consts::PI * i / n_phi as f64;
        (0..n_theta)
            .map(|j| {
                let theta = std::f64::consts::TAU * (j as f64 + offset) / n_theta as f64;
                sphere_point(phi, theta)
            })
            .collect()
    };
    let mut bm = BandMesh::new();
    let north = bm.push_ring(&[Vector3::new(0.0, 0.0, 1.0)])[0];
    let south = bm.push_ring(&[Vector3::new(0.0, 0.0, -1.0)])[0];
    let mut prev = bm.push_ring(&ring(1.0, 0.0));
    bm.push_fan(north, &prev, true, true);
    for i in 1..(n_phi - 1) {
        let next = bm.push_ring(&ring((i + 1) as f64, 0.0));
        let centers = ring(i as f64 + 0.5, 0.5);
        bm.push_band(&prev, &next, &centers, true);
        prev = next;
    }
    bm.push_fan(south, &prev, true, false);
    finish(bm.vertices, bm.triangles, Some(Chart::Sphere), level)
}

struct CatenoidK0;

impl DomainBuilder for CatenoidK0 {
    fn id(&self) -> &'static str {
        "catenoid_K0"
    }
    fn describe(&self) -> &'static str {
        "catenoidal annulus r(z) = cosh(a z - s)/a for z in [0, h]"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        build_catenoid(level, params)
    }
}

struct UnionPmK0;

impl DomainBuilder for UnionPmK0 {
    fn id(&self) -> &'static str {
        "union_pm_K0"
    }
    fn describe(&self) -> &'static str {
        "disjoint union of the catenoidal annulus and its mirror image through z = 0"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        let upper = build_catenoid(level, params)?;
        let nv = upper.vertices.len();
        let mut vertices = upper.vertices.clone();
        vertices.extend(
            upper
                .vertices
                .iter()
                .map(|p| Vector3::new(p.x, p.y, -p.z)),
        );
        let mut triangles = upper.triangles.clone();
        // vertex order is kept under mirroring, so the reflected copy's
        // orientation field is the mirror of the original's with a sign flip;
        // this makes the z-reflection act with normal sign -1 on the union
        triangles.extend(
            upper
                .triangles
                .iter()
                .map(|t| [t[0] + nv, t[1] + nv, t[2] + nv]),
        );
        let mut boundary_edges = upper.boundary_edges.clone();
        boundary_edges.extend(upper.boundary_edges.iter().map(|e| BoundaryEdge {
            a: e.a + nv,
            b: e.b + nv,
            tag: e.tag,
        }));
        let mesh = SurfaceMesh {
            vertices,
            triangles,
            boundary_edges,
            chart: upper.chart,
            metric_override: None,
            level: upper.level,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

struct UnitDisk;

impl DomainBuilder for UnitDisk {
    fn id(&self) -> &'static str {
        "unit_disk"
    }
    fn describe(&self) -> &'static str {
        "flat unit disk in the plane z = 0; `graded` switches to geometrically graded rings"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        params.check_keys(&["n_theta", "rings", "graded", "sym_k"], self.id())?;
        let mut n_theta = params.get_or("n_theta", 24.0) as usize;
        if let Some(k) = params.get("sym_k") {
            let step = 4 * k as usize;
            if step == 0 {
                return Err(Error::InvalidParam("sym_k must be positive".into()));
            }
            n_theta = n_theta.div_ceil(step) * step;
        }
        if n_theta < 3 {
            return Err(Error::InvalidParam("need n_theta >= 3".into()));
        }
        let graded = params.get_or("graded", 0.0) as usize;
        let radii: Vec<f64> = if graded > 0 {
            (1..=graded).map(|m| 2f64.powi(m as i32 - graded as i32)).collect()
        } else {
            let rings = params.get_or("rings", 2.0) as usize;
            if rings < 1 {
                return Err(Error::InvalidParam("need rings >= 1".into()));
            }
            (1..=rings).map(|m| m as f64 / rings as f64).collect()
        };
        let ring = |r: f64, offset: f64| -> Vec<Vector3<f64>> {
            (0..n_theta)
                .map(|j| {
                    let theta = std::f64::consts::TAU * (j as f64 + offset) / n_theta as f64;
                    Vector3::new(r * theta.cos(), r * theta.sin(), 0.0)
                })
                .collect()
        };
        let mut bm = BandMesh::new();
        let center = bm.push_ring(&[Vector3::zeros()])[0];
        let mut prev = bm.push_ring(&ring(radii[0], 0.0));
        bm.push_fan(center, &prev, true, true);
        for w in radii.windows(2) {
            let next = bm.push_ring(&ring(w[1], 0.0));
            let centers = ring(0.5 * (w[0] + w[1]), 0.5);
            bm.push_band(&prev, &next, &centers, true);
            prev = next;
        }
        finish(bm.vertices, bm.triangles, Some(Chart::Disk), level)
    }
}

struct LuneCut;

impl DomainBuilder for LuneCut {
    fn id(&self) -> &'static str {
        "lune_cut"
    }
    fn describe(&self) -> &'static str {
        "quarter sphere with a Dirichlet segment on {x = 0} above height zeta"
    }
    fn build(&self, level: u32, params: &Params) -> Result<SurfaceMesh> {
        params.check_keys(&["zeta"], self.id())?;
        let zeta = params.get_or("zeta", 0.0);
        if !(-1.0..1.0).contains(&zeta) || zeta <= -1.0 {
            return Err(Error::InvalidParam(format!(
                "lune_cut requires zeta in (-1, 1), got {}",
                zeta
            )));
        }
        let mut mesh = octa_domain(level, |s| s[0] == 1.0 && s[1] == 1.0)?;
        for e in &mut mesh.boundary_edges {
            let pa = mesh.vertices[e.a];
            let pb = mesh.vertices[e.b];
            let on_meridian = pa.x.abs() < 1e-12 && pb.x.abs() < 1e-12;
            if on_meridian && 0.5 * (pa.z + pb.z) > zeta {
                e.tag = BoundaryTag::Dirichlet;
            }
        }
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_resolvable() {
        let mut seen = std::collections::HashSet::new();
        for b in builtin_registry() {
            assert!(seen.insert(b.id()), "duplicate id {}", b.id());
            // every builder must produce a valid level-0 mesh with defaults
            let m = build_builtin(b.id(), 0, &Params::default()).unwrap();
            m.validate().unwrap();
        }
    }

    #[test]
    fn unknown_domain_is_an_error() {
        assert!(matches!(
            build_builtin("klein_bottle", 0, &Params::default()),
            Err(Error::UnknownDomain(_))
        ));
    }

    #[test]
    fn lune_cut_rejects_out_of_range_zeta() {
        assert!(build_builtin("lune_cut(1.5)", 0, &Params::default()).is_err());
        assert!(build_builtin("lune_cut(-1.0)", 0, &Params::default()).is_err());
        let m = build_builtin("lune_cut(0.0)", 2, &Params::default()).unwrap();
        let n_dirichlet = m
            .boundary_edges
            .iter()
            .filter(|e| e.tag == BoundaryTag::Dirichlet)
            .count();
        assert!(n_dirichlet > 0);
        // Dirichlet edges sit on the x = 0 meridian above the equator
        for e in &m.boundary_edges {
            if e.tag == BoundaryTag::Dirichlet {
                assert!(m.vertices[e.a].x.abs() < 1e-12);
                assert!(0.5 * (m.vertices[e.a].z + m.vertices[e.b].z) > 0.0);
            }
        }
    }

    #[test]
    fn catenoid_rejects_bad_params() {
        let p = Params::default().set("a", -1.0);
        assert!(build_builtin("catenoid_K0", 0, &p).is_err());
    }

    #[test]
    fn uv_sphere_rounds_n_theta_to_symmetry() {
        let p = Params::default().set("sym_k", 3.0);
        let m = build_builtin("full_sphere", 0, &p).unwrap();
        assert!(m.boundary_edges.is_empty());
        assert_eq!(m.euler_characteristic(), 2);
        // mesh is z-reflection symmetric: every vertex has a mirror partner
        for v in &m.vertices {
            let mirrored = Vector3::new(v.x, v.y, -v.z);
            assert!(
                m.vertices.iter().any(|w| (w - mirrored).norm() < 1e-12),
                "no mirror for {:?}",
                v
            );
        }
    }

    #[test]
    fn disk_boundary_on_unit_circle() {
        let m = build_builtin("unit_disk", 2, &Params::default()).unwrap();
        for e in &m.boundary_edges {
            for &v in &[e.a, e.b] {
                let p = m.vertices[v];
                assert!((p.xy().norm() - 1.0).abs() < 1e-14);
                assert_eq!(p.z, 0.0);
            }
        }
    }

    #[test]
    fn graded_disk_has_fine_center_rings() {
        let p = Params::default().set("graded", 6.0);
        let m = build_builtin("unit_disk", 0, &p).unwrap();
        let min_r = m
            .vertices
            .iter()
            .filter(|v| v.norm() > 0.0)
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        assert!((min_r - 2f64.powi(-5)).abs() < 1e-14);
    }
}
