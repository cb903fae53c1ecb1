//! Dirichlet and Neumann internalizations of a problem on a subdomain.

use crate::error::Result;
use crate::mesh::{
    BoundaryDecomposition, BoundaryTag, Coefficient, ProblemSpec, SubmeshMap,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Internalization {
    Dirichlet,
    Neumann,
}

impl Internalization {
    fn tag(self) -> BoundaryTag {
        match self {
            Internalization::Dirichlet => BoundaryTag::Dirichlet,
            Internalization::Neumann => BoundaryTag::Neumann,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InternalizedPiece {
    pub problem: ProblemSpec,
    pub map: SubmeshMap,
}

/// Restrict the problem to the triangles of `piece`.  Exterior boundary
/// edges keep the parent decomposition's tags; interface edges produced by
/// the cut receive the Dirichlet or Neumann condition according to `mode`.
pub fn internalize(
    problem: &ProblemSpec,
    piece: &[usize],
    mode: Internalization,
) -> Result<InternalizedPiece> {
    let mesh = &problem.mesh;
    let (mut sub, map) = mesh.submesh(piece, mode.tag())?;

    // the submesh inherited the *mesh* tags for parent boundary edges;
    // override them with the problem's decomposition, which may differ
    let parent_tag: std::collections::HashMap<(usize, usize), BoundaryTag> = mesh
        .boundary_edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let key = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            (key, problem.boundary.0[k])
        })
        .collect();
    let mut tags = Vec::with_capacity(sub.boundary_edges.len());
    for e in &sub.boundary_edges {
        let (pa, pb) = (map.vertex_to_parent[e.a], map.vertex_to_parent[e.b]);
        let key = if pa < pb { (pa, pb) } else { (pb, pa) };
        tags.push(parent_tag.get(&key).copied().unwrap_or(mode.tag()));
    }
    for (e, t) in sub.boundary_edges.iter_mut().zip(&tags) {
        e.tag = *t;
    }

    let q = problem.potential_samples()?;
    let r = problem.robin_samples()?;
    let restrict = |c: &Coefficient, samples: &[f64]| -> Coefficient {
        match c {
            Coefficient::Samples(_) => Coefficient::Samples(
                map.vertex_to_parent.iter().map(|&pv| samples[pv]).collect(),
            ),
            analytic => analytic.clone(),
        }
    };
    let potential = restrict(&problem.potential, &q);
    let robin_coefficient = restrict(&problem.robin_coefficient, &r);
    let conformal_factor = problem
        .conformal_factor
        .as_ref()
        .map(|c| map.vertex_to_parent.iter().map(|&pv| c[pv]).collect());

    let sub_problem = ProblemSpec {
        mesh: sub,
        potential,
        robin_coefficient,
        boundary: BoundaryDecomposition(tags),
        conformal_factor,
    };
    Ok(InternalizedPiece {
        problem: sub_problem,
        map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Coefficient, Params};
    use crate::spectral::{assemble, rayleigh, solve_problem};

    #[test]
    fn whole_mesh_piece_is_identity() {
        let mesh = build_builtin("sphere_octant", 2, &Params::default()).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let all: Vec<usize> = (0..p.mesh.n_triangles()).collect();
        let piece = internalize(&p, &all, Internalization::Dirichlet).unwrap();
        assert_eq!(piece.problem.mesh.n_triangles(), p.mesh.n_triangles());
        assert_eq!(piece.problem.boundary, p.boundary);
        let a = solve_problem(&p, 3, 0.05).unwrap();
        let b = solve_problem(&piece.problem, 3, 0.05).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn hemisphere_piece_of_sphere_gets_interface_condition() {
        let mesh = build_builtin("full_sphere", 2, &Params::default()).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let upper: Vec<usize> = (0..p.mesh.n_triangles())
            .filter(|&t| {
                let tri = p.mesh.triangles[t];
                (0..3).map(|k| p.mesh.vertices[tri[k]].z).sum::<f64>() > 0.0
            })
            .collect();
        let d = internalize(&p, &upper, Internalization::Dirichlet).unwrap();
        assert!(d
            .problem
            .boundary
            .0
            .iter()
            .all(|t| *t == BoundaryTag::Dirichlet));
        let n = internalize(&p, &upper, Internalization::Neumann).unwrap();
        assert!(n
            .problem
            .boundary
            .0
            .iter()
            .all(|t| *t == BoundaryTag::Neumann));
        // min-max over nested spaces: Dirichlet eigenvalues dominate Neumann
        let sd = solve_problem(&d.problem, 5, 0.05).unwrap();
        let sn = solve_problem(&n.problem, 5, 0.05).unwrap();
        for i in 0..5 {
            assert!(sd.eigenvalues[i] >= sn.eigenvalues[i] - 1e-10);
        }
    }

    #[test]
    fn extension_by_zero_preserves_the_rayleigh_value() {
        let mesh = build_builtin("full_sphere", 2, &Params::default()).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let upper: Vec<usize> = (0..p.mesh.n_triangles())
            .filter(|&t| {
                let tri = p.mesh.triangles[t];
                (0..3).map(|k| p.mesh.vertices[tri[k]].z).sum::<f64>() > 0.0
            })
            .collect();
        let piece = internalize(&p, &upper, Internalization::Dirichlet).unwrap();
        let s = solve_problem(&piece.problem, 3, 0.05).unwrap();
        let parent_assembly = assemble(&p).unwrap();
        for (i, u) in s.eigenfunctions.iter().enumerate() {
            let mut extended = vec![0.0; p.mesh.n_vertices()];
            for (sv, &pv) in piece.map.vertex_to_parent.iter().enumerate() {
                extended[pv] = u[sv];
            }
            let val = rayleigh(&parent_assembly, &extended).unwrap();
            assert!(
                (val - s.eigenvalues[i]).abs() <= 1e-9 * (1.0 + s.eigenvalues[i].abs()),
                "extension changes the quotient: {} vs {}",
                val,
                s.eigenvalues[i]
            );
        }
    }
}
