//! Equivariant eigensolves: restriction of the pencil to the subspace of
//! twisted-invariant functions, either by an explicit orbit basis of the
//! averaged projection or by reduction to a fundamental domain.

use super::eigen::SolveOptions;
use super::{assemble, solve_with, Assembly, SolveMeta, Spectrum, SubspaceDesc};
use crate::error::{Error, Result};
use crate::mesh::ProblemSpec;
use crate::symmetry::{fundamental_domain_reduce, GroupAction, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivariantStrategy {
    /// Solve the pencil restricted to the image of the twisted averaging
    /// projection, in the basis of projected nodal hats (one per surviving
    /// vertex orbit).
    ProjectedSubspace,
    /// Reduce to a fundamental domain with the induced interface conditions
    /// and solve the plain problem there.  Eigenfunctions are reported on
    /// the reduced mesh.
    FundamentalDomain,
}

impl EquivariantStrategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "projected" | "projected_subspace" => Ok(Self::ProjectedSubspace),
            "fundamental" | "fundamental_domain" => Ok(Self::FundamentalDomain),
            other => Err(Error::InvalidInput(format!(
                "unknown equivariant strategy `{}`",
                other
            ))),
        }
    }
}

fn twist_description(group: &GroupAction) -> String {
    if group.twist.iter().all(|s| *s == Sign::Plus) {
        "trivial".to_string()
    } else {
        group
            .twist
            .iter()
            .map(|s| if *s == Sign::Plus { '+' } else { '-' })
            .collect()
    }
}

/// Lowest eigenpairs of the problem restricted to (G, sigma)-invariant
/// functions.  An empty invariant subspace yields an empty, exhausted
/// spectrum rather than an error.
pub fn solve_equivariant(
    problem: &ProblemSpec,
    group: &GroupAction,
    count: usize,
    strategy: EquivariantStrategy,
) -> Result<Spectrum> {
    solve_equivariant_with(problem, group, count, strategy, &SolveOptions::default())
}

pub fn solve_equivariant_with(
    problem: &ProblemSpec,
    group: &GroupAction,
    count: usize,
    strategy: EquivariantStrategy,
    opts: &SolveOptions,
) -> Result<Spectrum> {
    let group = match &group.vertex_maps {
        Some(maps) if maps[0].len() == problem.mesh.n_vertices() => group.clone(),
        _ => group.act_on_mesh(&problem.mesh, 1e-9)?,
    };
    match strategy {
        EquivariantStrategy::ProjectedSubspace => projected_subspace(problem, &group, count, opts),
        EquivariantStrategy::FundamentalDomain => {
            let (reduced, fd) = fundamental_domain_reduce(problem, &group)?;
            let assembly = assemble(&reduced)?;
            let mut spectrum = solve_with(&assembly, count, 0.0, opts)?;
            spectrum.meta.subspace = SubspaceDesc::ReducedDomain {
                group_order: group.order(),
                interface_neumann: fd.interface_plus.len(),
                interface_dirichlet: fd.interface_minus.len(),
            };
            Ok(spectrum)
        }
    }
}

fn projected_subspace(
    problem: &ProblemSpec,
    group: &GroupAction,
    count: usize,
    opts: &SolveOptions,
) -> Result<Spectrum> {
    let assembly = assemble(problem)?;
    let basis = orbit_basis(&assembly, group)?;
    let dim = basis.len();
    let subspace = SubspaceDesc::Projected {
        group_order: group.order(),
        twist: twist_description(group),
        subspace_dim: dim,
    };
    if dim == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            eigenfunctions: vec![],
            meta: SolveMeta {
                shift: assembly.shift,
                residuals: vec![],
                mesh_level: assembly.mesh_level,
                subspace,
                exhausted: true,
                iterations: 0,
                method: "projected".into(),
            },
        });
    }
    let kt = assembly.stiffness.triple_product_sparse(&basis);
    let mt = assembly.mass.triple_product_sparse(&basis);
    let take = count.min(dim);
    let mut last_err = None;
    for alg in [
        super::eigen::DenseAlgorithm::Householder,
        super::eigen::DenseAlgorithm::Jacobi,
    ] {
        let (vals, vecs) = super::eigen::dense_generalized_with(&kt, &mt, alg)?;
        let mut eigenvalues = Vec::with_capacity(take);
        let mut eigenfunctions = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        let mut certified = true;
        for i in 0..take {
            // lift to the free space
            let mut u = vec![0.0; assembly.n_free()];
            for (j, col) in basis.iter().enumerate() {
                let w = vecs[(j, i)];
                if w != 0.0 {
                    for &(row, v) in col {
                        u[row] += w * v;
                    }
                }
            }
            // residual certificate on the full pencil
            let ku = assembly.stiffness.mul_vec_alloc(&u);
            let mu = assembly.mass.mul_vec_alloc(&u);
            let res = ku
                .iter()
                .zip(&mu)
                .map(|(a, b)| (a - vals[i] * b) * (a - vals[i] * b))
                .sum::<f64>()
                .sqrt();
            let mu_norm = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
            if res > opts.certificate * mu_norm.max(f64::MIN_POSITIVE) {
                last_err = Some(Error::SolverNonConvergence {
                    iterations: 1,
                    worst_residual: res,
                    target: opts.certificate * mu_norm,
                });
                certified = false;
                break;
            }
            super::eigen::fix_sign(&mut u);
            eigenvalues.push(vals[i]);
            eigenfunctions.push(assembly.embed(&u));
            residuals.push(res);
        }
        if certified {
            return Ok(Spectrum {
                eigenvalues,
                eigenfunctions,
                meta: SolveMeta {
                    shift: assembly.shift,
                    residuals,
                    mesh_level: assembly.mesh_level,
                    subspace,
                    exhausted: count >= dim,
                    iterations: 1,
                    method: "projected".into(),
                },
            });
        }
    }
    Err(last_err.expect("loop sets the error before falling through"))
}

/// Sparse basis columns (free-row index, coefficient) spanning the image of
/// the twisted projection inside the free space: one column per vertex orbit
/// that survives the averaging.
fn orbit_basis(assembly: &Assembly, group: &GroupAction) -> Result<Vec<Vec<(usize, f64)>>> {
    // the Dirichlet set must be group-invariant for the restriction to make
    // sense; fundamental_domain_reduce checks tags, here we check directly
    let maps = group
        .vertex_maps
        .as_ref()
        .ok_or_else(|| Error::Group("group has no mesh action".into()))?;
    for map in maps {
        for v in 0..assembly.constrained.len() {
            if assembly.constrained[v] != assembly.constrained[map[v]] {
                return Err(Error::Group(
                    "Dirichlet vertex set is not invariant under the group".into(),
                ));
            }
        }
    }
    let orbits = group.vertex_orbits()?;
    let mut basis = Vec::new();
    for orbit in &orbits {
        if !orbit.alive || assembly.constrained[orbit.representative] {
            continue;
        }
        let col: Vec<(usize, f64)> = orbit
            .support
            .iter()
            .map(|&(v, c)| (assembly.free_index[v].expect("free orbit"), c))
            .collect();
        basis.push(col);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, BoundaryTag, Coefficient, Params};
    use crate::spectral::{index_nullity, solve_problem};
    use crate::symmetry::{GroupAction, TwistVariant};
    use nalgebra::Vector3;

    fn sphere_q2(level: u32) -> ProblemSpec {
        let mesh = build_builtin("full_sphere", level, &Params::default()).unwrap();
        ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        )
    }

    #[test]
    fn trivial_group_reproduces_plain_solve() {
        let p = sphere_q2(2);
        let plain = solve_problem(&p, 5, 0.05).unwrap();
        let g = GroupAction::trivial().act_on_mesh(&p.mesh, 1e-9).unwrap();
        let equi =
            solve_equivariant(&p, &g, 5, EquivariantStrategy::ProjectedSubspace).unwrap();
        for (a, b) in plain.eigenvalues.iter().zip(&equi.eigenvalues) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn odd_reflection_on_sphere_picks_out_z_mode() {
        // under the odd z-reflection the -2 ground mode is projected out and
        // the lowest invariant mode is the linear height function
        let p = sphere_q2(3);
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, Sign::Minus]))
            .unwrap();
        let s = solve_equivariant(&p, &g, 3, EquivariantStrategy::ProjectedSubspace).unwrap();
        assert!(s.eigenvalues[0].abs() < 0.05, "{:?}", s.eigenvalues);
        // eigenfunction is proportional to z: correlation in the mass inner
        // product close to 1
        let zvals: Vec<f64> = p.mesh.vertices.iter().map(|v| v.z).collect();
        let a = assemble(&p).unwrap();
        let u = a.restrict(&s.eigenfunctions[0]).unwrap();
        let zf = a.restrict(&zvals).unwrap();
        let mu = a.mass.mul_vec_alloc(&zf);
        let num: f64 = u.iter().zip(&mu).map(|(x, y)| x * y).sum();
        let den = (u.iter().zip(&a.mass.mul_vec_alloc(&u)).map(|(x, y)| x * y).sum::<f64>()
            * zf.iter().zip(&mu).map(|(x, y)| x * y).sum::<f64>())
        .sqrt();
        assert!(num.abs() / den > 0.999, "overlap {}", num.abs() / den);
    }

    #[test]
    fn both_strategies_agree_on_the_wedge_problem() {
        let params = Params::default().set("sym_k", 3.0);
        let mesh = build_builtin("full_sphere", 1, &params).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let g = crate::symmetry::standard_group(crate::symmetry::GroupKind::Prismatic, 3)
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap();
        let a = solve_equivariant(&p, &g, 5, EquivariantStrategy::ProjectedSubspace).unwrap();
        let b = solve_equivariant(&p, &g, 5, EquivariantStrategy::FundamentalDomain).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!(
                (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0),
                "{} vs {}",
                x,
                y
            );
        }
    }

    #[test]
    fn empty_invariant_subspace_is_reported_not_error() {
        // odd functions under the full dihedral symmetry of a single
        // triangle orbit: kill everything by combining the z-odd twist on a
        // z-symmetric problem with Dirichlet everywhere except the equator
        let mesh = build_builtin("full_sphere", 0, &Params::default()).unwrap();
        let p = ProblemSpec::laplacian(mesh);
        // twist -1 on the reflection through {x=0}: vertices on that plane
        // must vanish; at level 0 the only free vertices in the projected
        // basis are those off the plane, paired with sign -1 partners
        let g = GroupAction::reflection(Vector3::new(1.0, 0.0, 0.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, Sign::Minus]))
            .unwrap();
        let s = solve_equivariant(&p, &g, 4, EquivariantStrategy::ProjectedSubspace).unwrap();
        // at level 0 the octahedron has exactly one +-x vertex pair, so the
        // odd subspace has dimension 1; it is exhausted either way
        assert!(s.meta.exhausted);
        assert!(s.len() <= 1);
        let (counts, _) = index_nullity(&s, 0.05).unwrap();
        let _ = counts;
    }

    #[test]
    fn hemisphere_dirichlet_matches_odd_sphere_spectrum() {
        let p = sphere_q2(2);
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, Sign::Minus]))
            .unwrap();
        let via_projection =
            solve_equivariant(&p, &g, 5, EquivariantStrategy::ProjectedSubspace).unwrap();
        // independently build the hemisphere with a Dirichlet equator
        let hemi = build_builtin("sphere_hemisphere", 2, &Params::default()).unwrap();
        let mut hp = ProblemSpec::new(
            hemi,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        hp.retag_where(
            |a, b| a.z.abs() < 1e-12 && b.z.abs() < 1e-12,
            BoundaryTag::Dirichlet,
        );
        let direct = solve_problem(&hp, 5, 0.05).unwrap();
        for (a, b) in via_projection.eigenvalues.iter().zip(&direct.eigenvalues) {
            assert!(
                (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                "projected {} vs reduced-domain {}",
                a,
                b
            );
        }
    }
}
