//! Nodal domain counting by sign-respecting flood fill over triangles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

#[derive(Clone, Debug, Serialize)]
pub struct NodalDomains {
    pub count: usize,
    /// Per triangle: (sign, component id) for triangles inside a nodal
    /// domain; None for triangles carrying the nodal set (mixed signs or all
    /// vertices below the tolerance).
    pub labels: Vec<Option<(i8, usize)>>,
}

/// Count connected components of {|values| > tol}.  A triangle belongs to
/// the positive (negative) set when all of its above-tolerance vertices are
/// positive (negative) and at least one vertex is above tolerance; mixed
/// triangles separate domains and belong to none.
pub fn nodal_domains(mesh: &SurfaceMesh, values: &[f64], tol: f64) -> Result<NodalDomains> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::InvalidInput(format!(
            "expected {} samples, got {}",
            mesh.n_vertices(),
            values.len()
        )));
    }
    if values.iter().all(|v| v.abs() <= tol) {
        return Err(Error::InvalidInput(
            "all samples are below the nodal tolerance".into(),
        ));
    }
    let sign_of = |t: usize| -> Option<i8> {
        let mut sign = 0i8;
        for &v in &mesh.triangles[t] {
            let x = values[v];
            if x.abs() <= tol {
                continue;
            }
            let s = if x > 0.0 { 1 } else { -1 };
            if sign == 0 {
                sign = s;
            } else if sign != s {
                return None;
            }
        }
        if sign == 0 {
            None
        } else {
            Some(sign)
        }
    };
    let signs: Vec<Option<i8>> = (0..mesh.n_triangles()).map(sign_of).collect();
    let incidence = mesh.edge_incidence();
    let mut labels: Vec<Option<(i8, usize)>> = vec![None; mesh.n_triangles()];
    let mut count = 0;
    let mut stack = Vec::new();
    for seed in 0..mesh.n_triangles() {
        let Some(s) = signs[seed] else { continue };
        if labels[seed].is_some() {
            continue;
        }
        labels[seed] = Some((s, count));
        stack.push(seed);
        while let Some(t) = stack.pop() {
            let tri = mesh.triangles[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = if a < b { (a, b) } else { (b, a) };
                for &nb in &incidence[&key] {
                    if labels[nb].is_none() && signs[nb] == Some(s) {
                        labels[nb] = Some((s, count));
                        stack.push(nb);
                    }
                }
            }
        }
        count += 1;
    }
    Ok(NodalDomains { count, labels })
}

/// Default tolerance: 1e-6 of the largest sample magnitude.
pub fn nodal_tolerance(values: &[f64]) -> f64 {
    1e-6 * values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
