//! Machine-readable reports.  Serialization is deterministic: struct field
//! order is fixed and all numeric content comes from deterministic solves,
//! so identical configurations produce byte-identical documents.

use serde::Serialize;

use crate::error::Result;
use crate::mesh::SurfaceMesh;
use crate::models::NodalDomains;
use crate::spectral::{index_nullity, SubspaceDesc, Spectrum};

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub config_hash: String,
    pub mesh_level: u32,
    pub zero_tol: f64,
    pub method: String,
    pub shift: f64,
    pub subspace: SubspaceDesc,
    pub exhausted: bool,
    pub iterations: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// None when the computed spectrum does not reach past zero_tol, so the
    /// counts would be lower bounds only.
    pub index: Option<usize>,
    pub nullity: Option<usize>,
    pub classification_margin: Option<f64>,
    pub classification_note: Option<String>,
}

pub fn spectrum_report(
    spectrum: &Spectrum,
    zero_tol: f64,
    config_hash: u64,
) -> Result<SpectrumReport> {
    let (counts, margin, note) = match index_nullity(spectrum, zero_tol) {
        Ok((counts, margin)) => (Some(counts), Some(margin), None),
        Err(crate::error::Error::InsufficientCoverage(msg)) => (
            None,
            None,
            Some(format!(
                "index/nullity unavailable: {}; request more eigenvalues",
                msg
            )),
        ),
        Err(other) => return Err(other),
    };
    Ok(SpectrumReport {
        config_hash: format!("{:016x}", config_hash),
        mesh_level: spectrum.meta.mesh_level,
        zero_tol,
        method: spectrum.meta.method.clone(),
        shift: spectrum.meta.shift,
        subspace: spectrum.meta.subspace.clone(),
        exhausted: spectrum.meta.exhausted,
        iterations: spectrum.meta.iterations,
        eigenvalues: spectrum.eigenvalues.clone(),
        residuals: spectrum.meta.residuals.clone(),
        index: counts.map(|c| c.index),
        nullity: counts.map(|c| c.nullity),
        classification_margin: margin,
        classification_note: note,
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

/// Eigenvalue table: one line per pair.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("index,eigenvalue,residual\n");
    for (i, l) in spectrum.eigenvalues.iter().enumerate() {
        let r = spectrum
            .meta
            .residuals
            .get(i)
            .copied()
            .unwrap_or(f64::NAN);
        out.push_str(&format!("{},{:.17e},{:.3e}\n", i, l, r));
    }
    out
}

/// Plot data: vertex coordinates and eigenfunction samples, one vertex per
/// line.
pub fn eigenfunction_csv(mesh: &SurfaceMesh, spectrum: &Spectrum) -> String {
    let mut out = String::from("x,y,z");
    for i in 0..spectrum.len() {
        out.push_str(&format!(",u{}", i));
    }
    out.push('\n');
    for (v, p) in mesh.vertices.iter().enumerate() {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}", p.x, p.y, p.z));
        for u in &spectrum.eigenfunctions {
            out.push_str(&format!(",{:.17e}", u.get(v).copied().unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

/// Plot data for nodal domains: per-triangle sign and component label.
pub fn nodal_csv(mesh: &SurfaceMesh, nodal: &NodalDomains) -> String {
    let mut out = String::from("triangle,cx,cy,cz,sign,component\n");
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let c = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
        match nodal.labels[t] {
            Some((sign, comp)) => out.push_str(&format!(
                "{},{:.6e},{:.6e},{:.6e},{},{}\n",
                t, c.x, c.y, c.z, sign, comp
            )),
            None => out.push_str(&format!("{},{:.6e},{:.6e},{:.6e},0,-1\n", t, c.x, c.y, c.z)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Coefficient, Params, ProblemSpec};
    use crate::spectral::solve_problem;

    #[test]
    fn identical_configs_serialize_identically() {
        let run = || {
            let mesh = build_builtin("sphere_octant", 2, &Params::default()).unwrap();
            let p = ProblemSpec::new(
                mesh,
                Coefficient::Constant(2.0),
                Coefficient::Constant(0.0),
            );
            let s = solve_problem(&p, 4, 0.05).unwrap();
            to_json_pretty(&spectrum_report(&s, 0.05, 0xabcd).unwrap())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn csv_has_one_line_per_pair() {
        let mesh = build_builtin("unit_disk", 1, &Params::default()).unwrap();
        let p = ProblemSpec::laplacian(mesh);
        let s = solve_problem(&p, 3, 0.05).unwrap();
        let csv = spectrum_csv(&s);
        assert_eq!(csv.lines().count(), 4);
        let ef = eigenfunction_csv(&p.mesh, &s);
        assert_eq!(ef.lines().count(), p.mesh.n_vertices() + 1);
    }
}
