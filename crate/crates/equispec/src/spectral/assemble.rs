//! P1 assembly of the form matrix and the consistent mass matrix.
//!
//! Stiffness is exact for the per-triangle-constant metric; the potential
//! and Robin terms sample their coefficients at the vertices and integrate
//! them with the triangle/edge average against the consistent P1 mass, which
//! keeps the overall eigenvalue error second order in the edge length.

use super::sparse::CsrMatrix;
use super::Assembly;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, ProblemSpec};
use crate::util::{fnv1a, hash_f64s, hash_usizes};

pub fn assemble(problem: &ProblemSpec) -> Result<Assembly> {
    let mesh = &problem.mesh;
    mesh.validate()?;
    if problem.boundary.0.len() != mesh.boundary_edges.len() {
        return Err(Error::InvalidInput(format!(
            "boundary decomposition has {} tags for {} boundary edges",
            problem.boundary.0.len(),
            mesh.boundary_edges.len()
        )));
    }
    let q = problem.potential_samples()?;
    let r = problem.robin_samples()?;

    let constrained = problem.dirichlet_vertices();
    let mut free_index = vec![None; mesh.n_vertices()];
    let mut free_to_vertex = Vec::new();
    for v in 0..mesh.n_vertices() {
        if !constrained[v] {
            free_index[v] = Some(free_to_vertex.len());
            free_to_vertex.push(v);
        }
    }
    let n_free = free_to_vertex.len();

    let mut k_triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut m_triplets: Vec<(usize, usize, f64)> = Vec::new();
    // reference P1 gradients on the unit triangle
    const GRADS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    const MASS_PATTERN: [[f64; 3]; 3] = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];

    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles[t];
        let g = mesh.induced_metric(t)?;
        let det = g[0] * g[2] - g[1] * g[1];
        if det <= 0.0 {
            return Err(Error::InvalidMesh(format!("triangle {} is degenerate", t)));
        }
        let area = 0.5 * det.sqrt();
        let inv = [g[2] / det, -g[1] / det, g[0] / det]; // [i11, i12, i22]
        let qbar = (q[tri[0]] + q[tri[1]] + q[tri[2]]) / 3.0;
        for i in 0..3 {
            let vi = tri[i];
            let Some(fi) = free_index[vi] else { continue };
            for j in 0..3 {
                let vj = tri[j];
                let Some(fj) = free_index[vj] else { continue };
                let gi = GRADS[i];
                let gj = GRADS[j];
                let stiff = area
                    * (inv[0] * gi[0] * gj[0]
                        + inv[1] * (gi[0] * gj[1] + gi[1] * gj[0])
                        + inv[2] * gi[1] * gj[1]);
                let mass = area / 12.0 * MASS_PATTERN[i][j];
                k_triplets.push((fi, fj, stiff - qbar * mass));
                m_triplets.push((fi, fj, mass));
            }
        }
    }

    // Robin boundary term: -rbar * edge mass
    for (k, edge) in mesh.boundary_edges.iter().enumerate() {
        if problem.boundary.0[k] != BoundaryTag::Robin {
            continue;
        }
        let len = mesh.boundary_edge_length(k)?;
        let rbar = 0.5 * (r[edge.a] + r[edge.b]);
        let pair = [edge.a, edge.b];
        for i in 0..2 {
            let Some(fi) = free_index[pair[i]] else { continue };
            for j in 0..2 {
                let Some(fj) = free_index[pair[j]] else { continue };
                let w = if i == j { 2.0 } else { 1.0 };
                k_triplets.push((fi, fj, -rbar * len / 6.0 * w));
            }
        }
    }

    let stiffness = CsrMatrix::from_triplets(n_free, &mut k_triplets);
    let mass = CsrMatrix::from_triplets(n_free, &mut m_triplets);
    debug_assert!(stiffness.symmetry_defect() < 1e-12);
    debug_assert!(mass.symmetry_defect() < 1e-14);

    // coercivity shift heuristic: 1 + max|q| + c_tr max|r|, with the trace
    // constant approximated by perimeter/area + 1; the solver verifies
    // positive definiteness and doubles the shift if the heuristic is short
    let max_q = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_r = mesh
        .boundary_edges
        .iter()
        .enumerate()
        .filter(|(k, _)| problem.boundary.0[*k] == BoundaryTag::Robin)
        .map(|(_, e)| r[e.a].abs().max(r[e.b].abs()))
        .fold(0.0f64, f64::max);
    let boundary_len: f64 = (0..mesh.boundary_edges.len())
        .map(|k| mesh.boundary_edge_length(k).unwrap_or(0.0))
        .sum();
    let area = mesh.total_area()?;
    let c_tr = boundary_len / area + 1.0;
    let shift = 1.0 + max_q + c_tr * max_r;

    let mut h = fnv1a(b"equispec-assembly");
    for v in &mesh.vertices {
        hash_f64s(&mut h, &[v.x, v.y, v.z]);
    }
    for t in &mesh.triangles {
        hash_usizes(&mut h, t);
    }
    hash_f64s(&mut h, &q);
    hash_f64s(&mut h, &r);
    for tag in &problem.boundary.0 {
        hash_usizes(&mut h, &[*tag as usize]);
    }

    Ok(Assembly {
        stiffness,
        mass,
        constrained,
        free_index,
        free_to_vertex,
        shift,
        problem_hash: h,
        mesh_level: mesh.level,
    })
}
