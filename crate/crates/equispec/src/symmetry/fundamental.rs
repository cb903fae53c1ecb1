//! Reduction of an equivariant problem to a fundamental domain.
//!
//! Interior interface edges of the selected domain are classified by their
//! pointwise stabilizer, which for a faithful action on a connected domain
//! has order at most 2: an edge fixed by an element of twist +1 becomes
//! Neumann, one fixed by an element of twist -1 becomes Dirichlet, and an
//! interface edge fixed by nothing is an error.  The exterior boundary
//! inherits the parent tags.  The twisted-invariant eigenproblem on the
//! parent coincides with the plain eigenproblem on the reduced domain.

use std::collections::{HashMap, HashSet};

use super::GroupAction;
use crate::error::{Error, Result};
use crate::mesh::{
    BoundaryDecomposition, BoundaryTag, Coefficient, ProblemSpec, SubmeshMap, SurfaceMesh,
};
use crate::symmetry::Sign;

#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    /// Parent triangle indices of the selected domain, one per orbit.
    pub triangles: Vec<usize>,
    pub submesh: SurfaceMesh,
    pub map: SubmeshMap,
    /// Interface edges (parent vertex pairs) that received the Neumann
    /// condition (stabilizer twist +1).
    pub interface_plus: Vec<(usize, usize)>,
    /// Interface edges that received the Dirichlet condition (twist -1).
    pub interface_minus: Vec<(usize, usize)>,
    /// Order of the subgroup fixing the domain setwise.  With one triangle
    /// per orbit and a free action this is always 1, so the reduced problem
    /// carries no residual symmetry constraint.
    pub stabilizer_order: usize,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn fundamental_domain_reduce(
    problem: &ProblemSpec,
    group: &GroupAction,
) -> Result<(ProblemSpec, FundamentalDomain)> {
    let mesh = &problem.mesh;
    let vmaps = group
        .vertex_maps
        .as_ref()
        .ok_or_else(|| Error::Reduction("group has no mesh action; call act_on_mesh".into()))?;
    let tmaps = group
        .triangle_maps
        .as_ref()
        .ok_or_else(|| Error::Reduction("group has no triangle maps".into()))?;
    if vmaps[0].len() != mesh.n_vertices() || tmaps[0].len() != mesh.n_triangles() {
        return Err(Error::Reduction(
            "group action was built for a different mesh".into(),
        ));
    }
    let order = group.order();

    // coefficients must be invariant
    let q = problem.potential_samples()?;
    let r = problem.robin_samples()?;
    let scale_q = q.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let scale_r = r.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for map in vmaps {
        for v in 0..q.len() {
            if (q[map[v]] - q[v]).abs() > 1e-9 * scale_q {
                return Err(Error::Reduction(
                    "potential is not invariant under the group".into(),
                ));
            }
            if (r[map[v]] - r[v]).abs() > 1e-9 * scale_r {
                return Err(Error::Reduction(
                    "Robin coefficient is not invariant under the group".into(),
                ));
            }
        }
    }

    // the problem's boundary decomposition must be preserved
    let boundary_index: HashMap<(usize, usize), usize> = mesh
        .boundary_edges
        .iter()
        .enumerate()
        .map(|(k, e)| (edge_key(e.a, e.b), k))
        .collect();
    for map in vmaps {
        for (k, e) in mesh.boundary_edges.iter().enumerate() {
            let img = edge_key(map[e.a], map[e.b]);
            let k_img = boundary_index.get(&img).ok_or_else(|| {
                Error::Reduction("boundary edge maps into the interior".into())
            })?;
            if problem.boundary.0[k] != problem.boundary.0[*k_img] {
                return Err(Error::Reduction(
                    "boundary decomposition is not invariant under the group".into(),
                ));
            }
        }
    }

    // on a disconnected domain the group must act transitively on components
    let (comp, n_comp) = mesh.triangle_components();
    if n_comp > 1 {
        let orbit_of_comp0: HashSet<usize> = tmaps.iter().map(|tm| comp[tm[0]]).collect();
        if orbit_of_comp0.len() != n_comp {
            return Err(Error::Reduction(format!(
                "domain has {} components but the group reaches only {} from the first; \
                 non-transitive actions on disconnected domains are not supported",
                n_comp,
                orbit_of_comp0.len()
            )));
        }
    }

    // the action must be free on triangles so that one triangle per orbit
    // carves an exact fundamental domain
    for (ei, tm) in tmaps.iter().enumerate().skip(1) {
        if tm.iter().enumerate().any(|(t, &img)| t == img) {
            return Err(Error::Reduction(format!(
                "element {} fixes a triangle; the mesh is not adapted to the group",
                ei
            )));
        }
    }
    if mesh.n_triangles() % order != 0 {
        return Err(Error::Reduction(format!(
            "{} triangles cannot split into orbits of size {}",
            mesh.n_triangles(),
            order
        )));
    }

    // greedy connected growth, one triangle per orbit
    let incidence = mesh.edge_incidence();
    let mut orbit_covered = vec![false; mesh.n_triangles()];
    let mut chosen: Vec<usize> = Vec::with_capacity(mesh.n_triangles() / order);
    let mut in_domain = vec![false; mesh.n_triangles()];
    let mut frontier: Vec<usize> = Vec::new();
    let cover = |t: usize, orbit_covered: &mut Vec<bool>| {
        for tm in tmaps {
            orbit_covered[tm[t]] = true;
        }
    };
    for seed in 0..mesh.n_triangles() {
        if orbit_covered[seed] {
            continue;
        }
        cover(seed, &mut orbit_covered);
        chosen.push(seed);
        in_domain[seed] = true;
        frontier.push(seed);
        while let Some(t) = frontier.pop() {
            let tri = mesh.triangles[t];
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                for &nb in &incidence[&key] {
                    if !orbit_covered[nb] {
                        cover(nb, &mut orbit_covered);
                        chosen.push(nb);
                        in_domain[nb] = true;
                        frontier.push(nb);
                    }
                }
            }
        }
    }
    chosen.sort_unstable();

    // stabilizer of the domain as a set (trivial for exact one-per-orbit
    // domains under a free action; kept as a recorded invariant)
    let stabilizer_order = tmaps
        .iter()
        .filter(|tm| chosen.iter().all(|&t| in_domain[tm[t]]))
        .count();

    let (mut submesh, map) = mesh.submesh(&chosen, BoundaryTag::Neumann)?;

    // classify each submesh boundary edge
    let mut interface_plus = Vec::new();
    let mut interface_minus = Vec::new();
    let mut tags = Vec::with_capacity(submesh.boundary_edges.len());
    for e in &submesh.boundary_edges {
        let (pa, pb) = (map.vertex_to_parent[e.a], map.vertex_to_parent[e.b]);
        let pkey = edge_key(pa, pb);
        if let Some(&k) = boundary_index.get(&pkey) {
            tags.push(problem.boundary.0[k]);
            continue;
        }
        // interface edge: pointwise stabilizer, identity excluded
        let mut fixers: Vec<usize> = Vec::new();
        for (ei, vm) in vmaps.iter().enumerate().skip(1) {
            if vm[pa] == pa && vm[pb] == pb {
                fixers.push(ei);
            }
        }
        match fixers.len() {
            0 => {
                return Err(Error::Reduction(format!(
                    "interface edge ({}, {}) is fixed by no group element and cannot \
                     carry a reduced boundary condition",
                    pa, pb
                )))
            }
            1 => {
                let tag = match group.twist[fixers[0]] {
                    Sign::Plus => {
                        interface_plus.push(pkey);
                        BoundaryTag::Neumann
                    }
                    Sign::Minus => {
                        interface_minus.push(pkey);
                        BoundaryTag::Dirichlet
                    }
                };
                tags.push(tag);
            }
            _ => {
                return Err(Error::Reduction(format!(
                    "interface edge ({}, {}) has a pointwise stabilizer of order {} > 2",
                    pa,
                    pb,
                    fixers.len() + 1
                )))
            }
        }
    }
    for (e, t) in submesh.boundary_edges.iter_mut().zip(&tags) {
        e.tag = *t;
    }

    // restrict coefficient fields
    let restrict = |c: &Coefficient, samples: &[f64]| -> Coefficient {
        match c {
            Coefficient::Samples(_) => Coefficient::Samples(
                map.vertex_to_parent.iter().map(|&pv| samples[pv]).collect(),
            ),
            analytic => analytic.clone(),
        }
    };
    let potential = restrict(&problem.potential, &q);
    let robin = restrict(&problem.robin_coefficient, &r);
    let conformal = problem
        .conformal_factor
        .as_ref()
        .map(|c| map.vertex_to_parent.iter().map(|&pv| c[pv]).collect());

    let boundary = BoundaryDecomposition(tags);
    let reduced = ProblemSpec {
        mesh: submesh.clone(),
        potential,
        robin_coefficient: robin,
        boundary,
        conformal_factor: conformal,
    };
    Ok((
        reduced,
        FundamentalDomain {
            triangles: chosen,
            submesh,
            map,
            interface_plus,
            interface_minus,
            stabilizer_order,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};
    use crate::symmetry::{standard_group, GroupKind, TwistVariant};
    use nalgebra::Vector3;

    fn sphere_problem(level: u32) -> ProblemSpec {
        let mesh = build_builtin("full_sphere", level, &Params::default()).unwrap();
        ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        )
    }

    #[test]
    fn even_reflection_gives_neumann_equator() {
        let p = sphere_problem(2);
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap();
        let (reduced, fd) = fundamental_domain_reduce(&p, &g).unwrap();
        assert_eq!(reduced.mesh.n_triangles(), p.mesh.n_triangles() / 2);
        assert!(fd.interface_minus.is_empty());
        assert!(!fd.interface_plus.is_empty());
        assert!(reduced
            .boundary
            .0
            .iter()
            .all(|t| *t == BoundaryTag::Neumann));
        assert_eq!(fd.stabilizer_order, 1);
        // the hemisphere's equator vertices all sit at z = 0
        for &(a, b) in &fd.interface_plus {
            assert!(p.mesh.vertices[a].z.abs() < 1e-12);
            assert!(p.mesh.vertices[b].z.abs() < 1e-12);
        }
    }

    #[test]
    fn odd_reflection_gives_dirichlet_equator() {
        let p = sphere_problem(2);
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, Sign::Minus]))
            .unwrap();
        let (reduced, fd) = fundamental_domain_reduce(&p, &g).unwrap();
        assert!(fd.interface_plus.is_empty());
        assert!(!fd.interface_minus.is_empty());
        assert!(reduced
            .boundary
            .0
            .iter()
            .any(|t| *t == BoundaryTag::Dirichlet));
    }

    #[test]
    fn prismatic_wedge_is_all_neumann() {
        let params = Params::default().set("sym_k", 3.0);
        let mesh = build_builtin("full_sphere", 1, &params).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let g = standard_group(GroupKind::Prismatic, 3)
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap();
        let (reduced, fd) = fundamental_domain_reduce(&p, &g).unwrap();
        assert_eq!(reduced.mesh.n_triangles(), p.mesh.n_triangles() / 12);
        assert!(fd.interface_minus.is_empty());
        assert!(reduced
            .boundary
            .0
            .iter()
            .all(|t| *t == BoundaryTag::Neumann));
    }

    #[test]
    fn pure_rotation_interface_is_unclassifiable() {
        let mesh = build_builtin("catenoid_K0", 1, &Params::default()).unwrap();
        let p = ProblemSpec::laplacian(mesh);
        let g = GroupAction::rotation_z(3)
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap();
        assert!(fundamental_domain_reduce(&p, &g).is_err());
    }

    #[test]
    fn prismatic_normal_sign_reduction_of_the_union_is_all_neumann() {
        // the full prismatic symmetry of the two-annulus stability problem:
        // vertical mirrors preserve the normal field, the z-reflection flips
        // it, and every interface edge lies on a vertical mirror, so the
        // fundamental wedge carries Neumann conditions on all interior sides
        let mesh = build_builtin("union_pm_K0", 1, &Params::default()).unwrap();
        let mut p = ProblemSpec::new(
            mesh,
            Coefficient::CatenoidJacobi { a: 2.3328, s: 1.4907 },
            Coefficient::Constant(1.0),
        );
        p.retag_where(
            |a, b| a.z.abs() > 0.87028 - 1e-9 && b.z.abs() > 0.87028 - 1e-9,
            BoundaryTag::Robin,
        );
        let g = standard_group(GroupKind::Prismatic, 3)
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::NormalSign(&p.mesh))
            .unwrap();
        assert!(g.twist.contains(&crate::symmetry::Sign::Minus));
        let (reduced, fd) = fundamental_domain_reduce(&p, &g).unwrap();
        assert_eq!(reduced.mesh.n_triangles(), p.mesh.n_triangles() / 12);
        assert!(fd.interface_minus.is_empty());
        // interior sides are Neumann; the top circle keeps its Robin tag
        let (_, n_neumann, n_robin) = reduced.boundary.counts();
        assert!(n_neumann > 0 && n_robin > 0);
        assert_eq!(reduced.boundary.counts().0, 0);
        // the reduced wedge reproduces the equivariant spectrum
        let projected = crate::spectral::solve_equivariant(
            &p,
            &g,
            4,
            crate::spectral::EquivariantStrategy::ProjectedSubspace,
        )
        .unwrap();
        let direct = crate::spectral::solve_problem(&reduced, 4, 0.05).unwrap();
        for (a, b) in projected.eigenvalues.iter().zip(&direct.eigenvalues) {
            assert!(
                (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                "{} vs {}",
                a,
                b
            );
        }
    }

    #[test]
    fn union_under_z_reflection_reduces_to_one_annulus() {
        let mesh = build_builtin("union_pm_K0", 1, &Params::default()).unwrap();
        let n_half = mesh.n_triangles() / 2;
        let p = ProblemSpec::laplacian(mesh);
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap();
        let (reduced, fd) = fundamental_domain_reduce(&p, &g).unwrap();
        assert_eq!(reduced.mesh.n_triangles(), n_half);
        // the two annuli are disjoint, so there is no interface at all
        assert!(fd.interface_plus.is_empty() && fd.interface_minus.is_empty());
    }
}
