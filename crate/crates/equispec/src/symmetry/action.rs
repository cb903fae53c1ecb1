//! Realizing a matrix group as a mesh automorphism group, and the twisted
//! averaging projection.

use std::collections::HashMap;

use nalgebra::Vector3;

use super::{GroupAction, Sign, VertexOrbit};
use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

struct VertexLocator<'a> {
    vertices: &'a [Vector3<f64>],
    cell: f64,
    grid: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl<'a> VertexLocator<'a> {
    fn new(vertices: &'a [Vector3<f64>], tol: f64) -> Self {
        let cell = (8.0 * tol).max(1e-6);
        let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in vertices.iter().enumerate() {
            grid.entry(Self::key(p, cell)).or_default().push(i);
        }
        VertexLocator {
            vertices,
            cell,
            grid,
        }
    }

    fn key(p: &Vector3<f64>, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    /// All vertices within `tol` of p.  Coincident vertices are legal (two
    /// components can share a boundary circle), so this returns every
    /// candidate and leaves the disambiguation to connectivity.
    fn find_all(&self, p: &Vector3<f64>, tol: f64) -> Vec<usize> {
        let (kx, ky, kz) = Self::key(p, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cands) = self.grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &c in cands {
                            if (self.vertices[c] - p).norm() <= tol {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Match every vertex to its image under the matrix, using positions first
/// and edge adjacency to break ties between coincident vertices.
fn match_vertices(
    mesh: &SurfaceMesh,
    locator: &VertexLocator,
    m: &nalgebra::Matrix3<f64>,
    adj: &[Vec<usize>],
    tol: f64,
    ei: usize,
) -> Result<Vec<usize>> {
    let nv = mesh.vertices.len();
    let mut cand: Vec<Vec<usize>> = Vec::with_capacity(nv);
    for (v, p) in mesh.vertices.iter().enumerate() {
        let q = m * p;
        let c = locator.find_all(&q, tol);
        if c.is_empty() {
            return Err(Error::Group(format!(
                "element {} maps vertex {} to {:?}, which matches no mesh vertex \
                 within {:.1e}; the mesh is not invariant under the group",
                ei, v, q, tol
            )));
        }
        cand.push(c);
    }
    let mut map = vec![usize::MAX; nv];
    let mut unresolved: Vec<usize> = Vec::new();
    for v in 0..nv {
        if cand[v].len() == 1 {
            map[v] = cand[v][0];
        } else {
            unresolved.push(v);
        }
    }
    // propagate: the image of v must be adjacent to the image of each
    // already-resolved neighbor of v
    while !unresolved.is_empty() {
        let mut progress = false;
        unresolved.retain(|&v| {
            cand[v].retain(|&c| {
                adj[v]
                    .iter()
                    .all(|&u| map[u] == usize::MAX || adj[map[u]].contains(&c))
            });
            match cand[v].len() {
                1 => {
                    map[v] = cand[v][0];
                    progress = true;
                    false
                }
                _ => true,
            }
        });
        if !progress {
            break;
        }
    }
    if let Some(&v) = unresolved.first() {
        return Err(Error::Group(format!(
            "element {}: vertex {} has {} coincident image candidates that adjacency \
             cannot separate",
            ei,
            v,
            cand[v].len()
        )));
    }
    Ok(map)
}

pub fn act_on_mesh(group: &GroupAction, mesh: &SurfaceMesh, tol: f64) -> Result<GroupAction> {
    let locator = VertexLocator::new(&mesh.vertices, tol);
    let nv = mesh.vertices.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let mut vertex_maps = Vec::with_capacity(group.order());
    for (ei, m) in group.elements.iter().enumerate() {
        let map = match_vertices(mesh, &locator, m, &adj, tol, ei)?;
        let mut hit = vec![false; nv];
        for &img in &map {
            if hit[img] {
                return Err(Error::Group(format!(
                    "element {} is not injective on vertices (vertex {} double-hit)",
                    ei, img
                )));
            }
            hit[img] = true;
        }
        vertex_maps.push(map);
    }

    // triangles must map to triangles
    let tri_lookup: HashMap<[usize; 3], usize> = mesh
        .triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let mut k = *tri;
            k.sort_unstable();
            (k, t)
        })
        .collect();
    let mut triangle_maps = Vec::with_capacity(group.order());
    for (ei, map) in vertex_maps.iter().enumerate() {
        let mut tmap = vec![usize::MAX; mesh.triangles.len()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut img = [map[tri[0]], map[tri[1]], map[tri[2]]];
            img.sort_unstable();
            tmap[t] = *tri_lookup.get(&img).ok_or_else(|| {
                Error::Group(format!(
                    "element {} maps triangle {} outside the mesh",
                    ei, t
                ))
            })?;
        }
        triangle_maps.push(tmap);
    }

    // boundary edges must map to boundary edges with the same tag
    let edge_tags: HashMap<(usize, usize), crate::mesh::BoundaryTag> = mesh
        .boundary_edges
        .iter()
        .map(|e| {
            let k = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            (k, e.tag)
        })
        .collect();
    for (ei, map) in vertex_maps.iter().enumerate() {
        for e in &mesh.boundary_edges {
            let (ia, ib) = (map[e.a], map[e.b]);
            let k = if ia < ib { (ia, ib) } else { (ib, ia) };
            match edge_tags.get(&k) {
                Some(tag) if *tag == e.tag => {}
                Some(tag) => {
                    return Err(Error::Group(format!(
                        "element {} maps a {:?} boundary edge onto a {:?} edge",
                        ei, e.tag, tag
                    )))
                }
                None => {
                    return Err(Error::Group(format!(
                        "element {} maps boundary edge ({}, {}) into the interior",
                        ei, e.a, e.b
                    )))
                }
            }
        }
    }

    let mut out = group.clone();
    out.vertex_maps = Some(vertex_maps);
    out.triangle_maps = Some(triangle_maps);
    Ok(out)
}

/// Per-element sign of <phi_* nu, nu>, which must be constant over the mesh.
pub fn normal_sign_twist(group: &GroupAction, mesh: &SurfaceMesh) -> Result<Vec<Sign>> {
    let tmaps = group
        .triangle_maps
        .as_ref()
        .ok_or_else(|| Error::Group("normal-sign twist requires a mesh action".into()))?;
    let normals: Vec<Vector3<f64>> = (0..mesh.n_triangles())
        .map(|t| mesh.triangle_normal(t))
        .collect();
    let mut out = Vec::with_capacity(group.order());
    for (ei, m) in group.elements.iter().enumerate() {
        let mut sign: Option<Sign> = None;
        for t in 0..mesh.n_triangles() {
            let pushed = m * normals[t];
            let dot = pushed.dot(&normals[tmaps[ei][t]]);
            if dot.abs() < 0.9 {
                return Err(Error::Group(format!(
                    "element {} does not map the normal field onto itself at triangle {} \
                     (|<phi_* nu, nu>| = {:.3})",
                    ei,
                    t,
                    dot.abs()
                )));
            }
            let s = if dot > 0.0 { Sign::Plus } else { Sign::Minus };
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => {
                    return Err(Error::Group(format!(
                        "normal sign of element {} is not constant over the mesh",
                        ei
                    )))
                }
                _ => {}
            }
        }
        out.push(sign.unwrap_or(Sign::Plus));
    }
    Ok(out)
}

pub fn twisted_project(group: &GroupAction, values: &[f64]) -> Result<Vec<f64>> {
    let maps = group
        .vertex_maps
        .as_ref()
        .ok_or_else(|| Error::Group("projection requires a mesh action".into()))?;
    let n = maps[0].len();
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {} samples, got {}",
            n,
            values.len()
        )));
    }
    // sigma(phi) u(phi^{-1} p) summed over phi equals sigma(psi) u(psi(p))
    // summed over psi = phi^{-1}, because sigma takes values in {-1, +1}
    let mut out = vec![0.0; n];
    for (ei, map) in maps.iter().enumerate() {
        let s = group.twist[ei].value();
        for p in 0..n {
            out[p] += s * values[map[p]];
        }
    }
    let scale = 1.0 / group.order() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

pub fn vertex_orbits(group: &GroupAction) -> Result<Vec<VertexOrbit>> {
    let maps = group
        .vertex_maps
        .as_ref()
        .ok_or_else(|| Error::Group("orbits require a mesh action".into()))?;
    let n = maps[0].len();
    let mut seen = vec![false; n];
    let mut orbits = Vec::new();
    for v in 0..n {
        if seen[v] {
            continue;
        }
        // accumulate sum of twist signs per image vertex
        let mut coeff: HashMap<usize, f64> = HashMap::new();
        for (ei, map) in maps.iter().enumerate() {
            *coeff.entry(map[v]).or_insert(0.0) += group.twist[ei].value();
        }
        let mut support: Vec<(usize, f64)> = coeff
            .into_iter()
            .filter(|(_, c)| c.abs() > 1e-9)
            .collect();
        support.sort_unstable_by_key(|(w, _)| *w);
        for (ei, map) in maps.iter().enumerate() {
            let _ = ei;
            seen[map[v]] = true;
        }
        let alive = !support.is_empty();
        orbits.push(VertexOrbit {
            representative: v,
            support,
            alive,
        });
    }
    Ok(orbits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};
    use crate::symmetry::{standard_group, GroupKind, TwistVariant};

    #[test]
    fn identity_element_gives_identity_permutation() {
        let mesh = build_builtin("full_sphere", 2, &Params::default()).unwrap();
        let g = GroupAction::trivial().act_on_mesh(&mesh, 1e-9).unwrap();
        let maps = g.vertex_maps.as_ref().unwrap();
        for (v, &img) in maps[0].iter().enumerate() {
            assert_eq!(v, img);
        }
    }

    #[test]
    fn z_reflection_swaps_the_two_annuli() {
        let mesh = build_builtin("union_pm_K0", 1, &Params::default()).unwrap();
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&mesh, 1e-9)
            .unwrap();
        let (comp, n_comp) = mesh.triangle_components();
        assert_eq!(n_comp, 2);
        let tmap = &g.triangle_maps.as_ref().unwrap()[1];
        for t in 0..mesh.n_triangles() {
            assert_ne!(comp[t], comp[tmap[t]]);
        }
    }

    #[test]
    fn pyramidal_rotations_act_on_adapted_catenoid() {
        // n_theta = 12 accommodates the pyramidal group of order 6
        let mesh = build_builtin("catenoid_K0", 1, &Params::default()).unwrap();
        let g = standard_group(GroupKind::Pyramidal, 3)
            .unwrap()
            .act_on_mesh(&mesh, 1e-9)
            .unwrap();
        assert_eq!(g.vertex_maps.as_ref().unwrap().len(), 6);
    }

    #[test]
    fn rotations_preserve_catenoid_normal_sign() {
        let mesh = build_builtin("catenoid_K0", 1, &Params::default()).unwrap();
        let g = standard_group(GroupKind::Pyramidal, 3)
            .unwrap()
            .with_twist(TwistVariant::NormalSign(&mesh))
            .unwrap();
        assert!(g.twist.iter().all(|s| *s == Sign::Plus));
    }

    #[test]
    fn z_reflection_on_union_flips_normal_sign() {
        let mesh = build_builtin("union_pm_K0", 1, &Params::default()).unwrap();
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .with_twist(TwistVariant::NormalSign(&mesh))
            .unwrap();
        assert_eq!(g.twist, vec![Sign::Plus, Sign::Minus]);
    }

    #[test]
    fn projection_is_idempotent_and_kills_odd_input() {
        let mesh = build_builtin("full_sphere", 2, &Params::default()).unwrap();
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&mesh, 1e-9)
            .unwrap();
        let odd = g
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, Sign::Minus]))
            .unwrap();
        // constants are even, so the odd projection kills them
        let zero = odd.twisted_project(&vec![1.0; mesh.n_vertices()]).unwrap();
        assert!(zero.iter().all(|v| v.abs() < 1e-14));
        // z itself is odd, hence fixed by the odd projection
        let zvals: Vec<f64> = mesh.vertices.iter().map(|p| p.z).collect();
        let proj = odd.twisted_project(&zvals).unwrap();
        for (a, b) in proj.iter().zip(&zvals) {
            assert!((a - b).abs() < 1e-13);
        }
        // idempotency on an arbitrary input
        let mut rng = crate::util::SplitMix64::new(3);
        let u: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.next_symmetric()).collect();
        let pu = odd.twisted_project(&u).unwrap();
        let ppu = odd.twisted_project(&pu).unwrap();
        for (a, b) in pu.iter().zip(&ppu) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn orbits_partition_vertices() {
        let mesh = build_builtin("full_sphere", 1, &Params::default()).unwrap();
        let g = standard_group(GroupKind::ReflectionPlane, 1)
            .unwrap()
            .act_on_mesh(&mesh, 1e-9)
            .unwrap();
        let orbits = g.vertex_orbits().unwrap();
        let total: usize = orbits
            .iter()
            .map(|o| {
                let maps = g.vertex_maps.as_ref().unwrap();
                let mut set = std::collections::HashSet::new();
                for m in maps {
                    set.insert(m[o.representative]);
                }
                set.len()
            })
            .sum();
        assert_eq!(total, mesh.n_vertices());
    }
}
