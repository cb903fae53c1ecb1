//! Problem files: a TOML document naming the domain (a mesh file or a
//! builtin), the coefficient fields, and an optional symmetry group with a
//! twist.
//!
//! ```toml
//! builtin = "catenoid_K0"        # or: mesh = "annulus.equimesh"
//! level = 3
//! params = { n_theta = 24 }      # builder parameters
//! q = "2"                        # expression or number; `jacobi = true`
//! r = 1.0                        #   uses the surface's stability potential
//! jacobi = false
//! robin_top = false              # Robin condition on the top circles
//! conformal = "1 + 0.3*sin(pi*x)"
//! group = "pyramidal:5"
//! twist = "normal"               # trivial | determinant | normal | [1, -1, ...]
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::mesh::{self, build_builtin, BoundaryTag, Chart, Coefficient, Params, ProblemSpec};
use crate::symmetry::{standard_group, GroupAction, GroupKind, Sign, TwistVariant};
use crate::util::{fnv1a, hash_f64s};

#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub problem: ProblemSpec,
    /// Group with its twist attached and the mesh action realized.
    pub group: Option<GroupAction>,
    pub config_hash: u64,
}

/// Parse a group selector: `pyramidal:5`, `prismatic:3`, `antiprismatic:4`,
/// `reflection_plane`, `reflection_line`, or `trivial`.
pub fn parse_group_spec(spec: &str) -> Result<GroupAction> {
    let spec = spec.trim();
    if spec == "trivial" {
        return Ok(GroupAction::trivial());
    }
    let (kind, k) = match spec.split_once(':') {
        Some((name, k)) => {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Group(format!("bad group parameter in `{}`", spec)))?;
            (GroupKind::parse(name)?, k)
        }
        None => (GroupKind::parse(spec)?, 1),
    };
    standard_group(kind, k)
}

#[derive(Clone, Debug, PartialEq)]
pub enum TwistSpec {
    Trivial,
    Determinant,
    NormalSign,
    Explicit(Vec<i8>),
}

impl TwistSpec {
    pub fn parse_str(s: &str) -> Result<TwistSpec> {
        match s {
            "trivial" => Ok(TwistSpec::Trivial),
            "determinant" | "det" => Ok(TwistSpec::Determinant),
            "normal" | "normal_sign" => Ok(TwistSpec::NormalSign),
            other => Err(Error::Group(format!("unknown twist `{}`", other))),
        }
    }

    pub fn apply(&self, group: &GroupAction, mesh: &mesh::SurfaceMesh) -> Result<GroupAction> {
        match self {
            TwistSpec::Trivial => group.with_twist(TwistVariant::Trivial),
            TwistSpec::Determinant => group.with_twist(TwistVariant::Determinant),
            TwistSpec::NormalSign => group.with_twist(TwistVariant::NormalSign(mesh)),
            TwistSpec::Explicit(signs) => {
                let table = signs
                    .iter()
                    .map(|&v| match v {
                        1 => Ok(Sign::Plus),
                        -1 => Ok(Sign::Minus),
                        other => Err(Error::Group(format!("twist entry {} is not +-1", other))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                group.with_twist(TwistVariant::Explicit(table))
            }
        }
    }
}

fn coefficient_from_value(v: &toml::Value, what: &str) -> Result<Coefficient> {
    match v {
        toml::Value::Float(f) => Ok(Coefficient::Constant(*f)),
        toml::Value::Integer(i) => Ok(Coefficient::Constant(*i as f64)),
        toml::Value::String(s) => {
            if let Ok(c) = s.trim().parse::<f64>() {
                Ok(Coefficient::Constant(c))
            } else {
                Ok(Coefficient::Expr(Expr::parse(s)?))
            }
        }
        other => Err(Error::Format(format!(
            "{} must be a number or expression string, found {}",
            what, other
        ))),
    }
}

/// Assemble a problem from its parsed TOML description.
pub fn problem_from_toml(text: &str, base_dir: &Path) -> Result<LoadedProblem> {
    let doc: toml::Value = text
        .parse()
        .map_err(|e| Error::Format(format!("problem file is not valid TOML: {}", e)))?;
    let table = doc
        .as_table()
        .ok_or_else(|| Error::Format("problem file must be a TOML table".into()))?;
    for key in table.keys() {
        const KNOWN: [&str; 11] = [
            "mesh", "builtin", "level", "params", "q", "r", "jacobi", "robin_top", "conformal",
            "group", "twist",
        ];
        if !KNOWN.contains(&key.as_str()) {
            return Err(Error::Format(format!("unknown problem key `{}`", key)));
        }
    }

    let level = match table.get("level") {
        None => 0,
        Some(toml::Value::Integer(l)) if *l >= 0 => *l as u32,
        Some(other) => {
            return Err(Error::Format(format!(
                "level must be a non-negative integer, found {}",
                other
            )))
        }
    };
    let mut params = Params::default();
    if let Some(p) = table.get("params") {
        let pt = p
            .as_table()
            .ok_or_else(|| Error::Format("params must be a table".into()))?;
        for (k, v) in pt {
            let f = v
                .as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| Error::Format(format!("param `{}` must be numeric", k)))?;
            params = params.set(k, f);
        }
    }

    let mesh = match (table.get("mesh"), table.get("builtin")) {
        (Some(toml::Value::String(path)), None) => {
            let mut mesh = mesh::io::read_mesh(&base_dir.join(path))?;
            for _ in 0..level {
                mesh = mesh::refine(&mesh)?;
            }
            mesh
        }
        (None, Some(toml::Value::String(id))) => build_builtin(id, level, &params)?,
        (None, None) => {
            return Err(Error::Format(
                "problem file needs either `mesh` or `builtin`".into(),
            ))
        }
        _ => {
            return Err(Error::Format(
                "specify exactly one of `mesh` and `builtin` as a string".into(),
            ))
        }
    };

    let jacobi = table
        .get("jacobi")
        .and_then(|v| v.as_bool())
        .unwrap_or(false);
    let robin_top = table
        .get("robin_top")
        .and_then(|v| v.as_bool())
        .unwrap_or(false);

    let potential = match (jacobi, table.get("q")) {
        (true, None) => match mesh.chart {
            Some(Chart::Catenoid { a, s, .. }) => Coefficient::CatenoidJacobi { a, s },
            Some(Chart::Disk) | Some(Chart::Plane) => Coefficient::Constant(0.0),
            _ => {
                return Err(Error::InvalidInput(
                    "jacobi potential needs a catenoid, disk or plane chart".into(),
                ))
            }
        },
        (true, Some(_)) => {
            return Err(Error::InvalidInput(
                "give either `jacobi = true` or an explicit `q`, not both".into(),
            ))
        }
        (false, Some(v)) => coefficient_from_value(v, "q")?,
        (false, None) => Coefficient::Constant(0.0),
    };
    let default_r = if jacobi { 1.0 } else { 0.0 };
    let robin = match table.get("r") {
        Some(v) => coefficient_from_value(v, "r")?,
        None => Coefficient::Constant(default_r),
    };

    let mut problem = ProblemSpec::new(mesh, potential, robin);
    if robin_top || jacobi {
        let top = problem
            .mesh
            .vertices
            .iter()
            .map(|p| p.z.abs())
            .fold(0.0f64, f64::max);
        if top > 0.0 {
            let changed = problem.retag_where(
                |a, b| a.z.abs() > top - 1e-9 && b.z.abs() > top - 1e-9,
                BoundaryTag::Robin,
            );
            if robin_top && changed == 0 {
                return Err(Error::InvalidInput(
                    "robin_top matched no boundary edges".into(),
                ));
            }
        }
    }

    // validate that a nonzero Robin coefficient has somewhere to act
    let (_, _, n_robin) = problem.boundary.counts();
    if n_robin == 0 {
        if let Ok(r) = problem.robin_samples() {
            if r.iter().any(|v| v.abs() > 0.0) && table.get("r").is_some() {
                return Err(Error::InvalidInput(
                    "a Robin coefficient was given but no boundary edge carries the \
                     Robin tag"
                        .into(),
                ));
            }
        }
    }

    if let Some(c) = table.get("conformal") {
        let expr = match coefficient_from_value(c, "conformal")? {
            Coefficient::Constant(v) => Coefficient::Constant(v),
            Coefficient::Expr(e) => Coefficient::Expr(e),
            _ => unreachable!(),
        };
        let rho = expr.eval(&problem.mesh)?;
        problem = problem.apply_conformal_change(&rho)?;
    }

    let group = match table.get("group") {
        None => None,
        Some(toml::Value::String(spec)) => {
            let g = parse_group_spec(spec)?.act_on_mesh(&problem.mesh, 1e-9)?;
            let twist = match table.get("twist") {
                None => TwistSpec::Trivial,
                Some(toml::Value::String(s)) => TwistSpec::parse_str(s)?,
                Some(toml::Value::Array(a)) => {
                    let signs = a
                        .iter()
                        .map(|v| {
                            v.as_integer().map(|i| i as i8).ok_or_else(|| {
                                Error::Format("twist array entries must be integers".into())
                            })
                        })
                        .collect::<Result<Vec<i8>>>()?;
                    TwistSpec::Explicit(signs)
                }
                Some(other) => {
                    return Err(Error::Format(format!(
                        "twist must be a string or array, found {}",
                        other
                    )))
                }
            };
            Some(twist.apply(&g, &problem.mesh)?)
        }
        Some(other) => {
            return Err(Error::Format(format!(
                "group must be a string, found {}",
                other
            )))
        }
    };

    let mut config_hash = fnv1a(text.as_bytes());
    hash_f64s(&mut config_hash, &[level as f64]);
    Ok(LoadedProblem {
        problem,
        group,
        config_hash,
    })
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    problem_from_toml(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_problem_with_expressions() {
        let text = r#"
            builtin = "sphere_octant"
            level = 1
            q = "2"
            r = 0
        "#;
        let loaded = problem_from_toml(text, Path::new(".")).unwrap();
        let q = loaded.problem.potential_samples().unwrap();
        assert!(q.iter().all(|v| (v - 2.0).abs() < 1e-15));
        assert!(loaded.group.is_none());
    }

    #[test]
    fn jacobi_problem_tags_the_top_circle() {
        let text = r#"
            builtin = "catenoid_K0"
            level = 1
            jacobi = true
            group = "pyramidal:3"
            twist = "normal"
        "#;
        let loaded = problem_from_toml(text, Path::new(".")).unwrap();
        let (_, _, n_robin) = loaded.problem.boundary.counts();
        assert!(n_robin > 0);
        let g = loaded.group.unwrap();
        assert_eq!(g.order(), 6);
        // rotations and vertical mirrors preserve the annulus normal
        assert!(g.twist.iter().all(|s| *s == Sign::Plus));
    }

    #[test]
    fn rejects_unknown_keys_and_conflicts() {
        assert!(problem_from_toml("builtin = \"unit_disk\"\nbananas = 1\n", Path::new(".")).is_err());
        assert!(problem_from_toml("q = 1\n", Path::new(".")).is_err());
        let both = "builtin = \"unit_disk\"\njacobi = true\nq = 2\n";
        assert!(problem_from_toml(both, Path::new(".")).is_err());
        let robin_nowhere = "builtin = \"unit_disk\"\nr = 1\n";
        assert!(problem_from_toml(robin_nowhere, Path::new(".")).is_err());
    }

    #[test]
    fn explicit_twist_round_trips() {
        let text = r#"
            builtin = "full_sphere"
            level = 1
            q = 2
            group = "reflection_plane"
            twist = [1, -1]
        "#;
        let loaded = problem_from_toml(text, Path::new(".")).unwrap();
        let g = loaded.group.unwrap();
        assert_eq!(g.twist, vec![Sign::Plus, Sign::Minus]);
    }

    #[test]
    fn conformal_factor_is_applied() {
        let text = r#"
            builtin = "unit_disk"
            level = 1
            conformal = "1 + 0.3*sin(pi*x)"
        "#;
        let loaded = problem_from_toml(text, Path::new(".")).unwrap();
        assert!(loaded.problem.conformal_factor.is_some());
        assert!(loaded.problem.mesh.metric_override.is_some());
    }
}
