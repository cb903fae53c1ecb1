//! Structural invariants checked on randomized inputs.

use std::sync::OnceLock;

use equispec::mesh::{build_builtin, Coefficient, Params, ProblemSpec};
use equispec::montielros::{internalize, Internalization};
use equispec::spectral::{assemble, index_nullity, solve_equivariant, solve_problem, Assembly, EquivariantStrategy};
use equispec::symmetry::{GroupAction, Sign, TwistVariant};
use nalgebra::Vector3;
use proptest::prelude::*;

fn sphere_setup() -> &'static (ProblemSpec, Assembly, GroupAction) {
    static CELL: OnceLock<(ProblemSpec, Assembly, GroupAction)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = build_builtin("full_sphere", 2, &Params::default()).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let a = assemble(&p).unwrap();
        let g = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, Sign::Minus]))
            .unwrap();
        (p, a, g)
    })
}

fn n_sphere_vertices() -> usize {
    sphere_setup().0.mesh.n_vertices()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 16,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// The averaging projection is idempotent and self-adjoint in the mass
    /// inner product, and commutes with the form.
    #[test]
    fn projection_is_selfadjoint_and_commutes(
        raw_u in prop::collection::vec(-1.0..1.0f64, 1024),
        raw_v in prop::collection::vec(-1.0..1.0f64, 1024),
    ) {
        let n = n_sphere_vertices();
        prop_assume!(raw_u.len() >= n);
        let u = raw_u[..n].to_vec();
        let v = raw_v[..n].to_vec();
        let (_, a, g) = sphere_setup();
        let pu = g.twisted_project(&u).unwrap();
        let pv = g.twisted_project(&v).unwrap();
        let ppu = g.twisted_project(&pu).unwrap();
        for (x, y) in pu.iter().zip(&ppu) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let uf = a.restrict(&u).unwrap();
        let vf = a.restrict(&v).unwrap();
        let puf = a.restrict(&pu).unwrap();
        let pvf = a.restrict(&pv).unwrap();
        // <Pu, v>_M = <u, Pv>_M
        let m_pu_v: f64 = a.mass.mul_vec_alloc(&vf).iter().zip(&puf).map(|(x, y)| x * y).sum();
        let m_u_pv: f64 = a.mass.mul_vec_alloc(&pvf).iter().zip(&uf).map(|(x, y)| x * y).sum();
        prop_assert!((m_pu_v - m_u_pv).abs() < 1e-10);
        // T(Pu, v) = T(u, Pv)
        let k_pu_v: f64 = a.stiffness.mul_vec_alloc(&vf).iter().zip(&puf).map(|(x, y)| x * y).sum();
        let k_u_pv: f64 = a.stiffness.mul_vec_alloc(&pvf).iter().zip(&uf).map(|(x, y)| x * y).sum();
        prop_assert!((k_pu_v - k_u_pv).abs() < 1e-10);
    }

    /// Conformal rescaling by rho and then 1/rho restores every field.
    #[test]
    fn conformal_change_round_trips(raw in prop::collection::vec(0.5..2.0f64, 1024)) {
        static DISK: OnceLock<ProblemSpec> = OnceLock::new();
        let p = DISK.get_or_init(|| {
            let mesh = build_builtin("unit_disk", 1, &Params::default()).unwrap();
            ProblemSpec::new(mesh, Coefficient::Constant(1.5), Coefficient::Constant(0.0))
        });
        let n = p.mesh.n_vertices();
        prop_assume!(raw.len() >= n);
        let rho = raw[..n].to_vec();
        let inv: Vec<f64> = rho.iter().map(|v| 1.0 / v).collect();
        let back = p
            .apply_conformal_change(&rho)
            .unwrap()
            .apply_conformal_change(&inv)
            .unwrap();
        for t in 0..p.mesh.n_triangles() {
            let g0 = p.mesh.induced_metric(t).unwrap();
            let g1 = back.mesh.induced_metric(t).unwrap();
            for k in 0..3 {
                prop_assert!((g0[k] - g1[k]).abs() <= 1e-12 * (1.0 + g0[0].max(g0[2])));
            }
        }
        let q0 = p.potential_samples().unwrap();
        let q1 = back.potential_samples().unwrap();
        for (x, y) in q0.iter().zip(&q1) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    /// Perturbing the potential by at most eps moves every eigenvalue by at
    /// most eps (min-max with the shared mass quadrature).
    #[test]
    fn potential_perturbation_is_lipschitz(
        seed_vals in prop::collection::vec(-1.0..1.0f64, 1024),
        eps in prop::sample::select(vec![0.1f64, 0.01]),
    ) {
        static DISK: OnceLock<(ProblemSpec, Vec<f64>)> = OnceLock::new();
        let (p, base) = DISK.get_or_init(|| {
            let mesh = build_builtin("unit_disk", 1, &Params::default()).unwrap();
            let p = ProblemSpec::laplacian(mesh);
            let base = solve_problem(&p, 5, 0.05).unwrap().eigenvalues;
            (p, base)
        });
        let n = p.mesh.n_vertices();
        prop_assume!(seed_vals.len() >= n);
        let q: Vec<f64> = seed_vals[..n].iter().map(|v| eps * v).collect();
        let perturbed = ProblemSpec {
            potential: Coefficient::Samples(q),
            ..p.clone()
        };
        let moved = solve_problem(&perturbed, 5, 0.05).unwrap().eigenvalues;
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((a - b).abs() <= eps + 1e-10, "{} vs {} (eps {})", a, b, eps);
        }
    }
}

/// The assembled matrices are exactly invariant under the vertex
/// permutations induced by the group.
#[test]
fn matrices_invariant_under_group_permutation() {
    let (_, a, g) = sphere_setup();
    let maps = g.vertex_maps.as_ref().unwrap();
    for map in maps {
        // permute free indices
        let perm: Vec<usize> = a
            .free_to_vertex
            .iter()
            .map(|&v| a.free_index[map[v]].expect("free set is invariant"))
            .collect();
        for (mat, tol) in [(&a.stiffness, 1e-12), (&a.mass, 1e-14)] {
            for i in 0..mat.n {
                let (cols, vals) = mat.row(i);
                for (j, v) in cols.iter().zip(vals) {
                    let w = mat.get(perm[i], perm[*j]);
                    assert!(
                        (v - w).abs() < tol,
                        "entry ({}, {}) changes under the permutation: {} vs {}",
                        i,
                        j,
                        v,
                        w
                    );
                }
            }
        }
    }
}

/// For an order-2 group the even and odd counts add up to the full counts,
/// exactly, on the discrete problem.
#[test]
fn even_odd_decomposition_is_exact() {
    let (p, _, _) = sphere_setup();
    let full = solve_problem(p, 12, 0.05).unwrap();
    let (counts, _) = index_nullity(&full, 0.05).unwrap();
    let refl = GroupAction::reflection(Vector3::new(0.0, 0.0, 1.0))
        .unwrap()
        .act_on_mesh(&p.mesh, 1e-9)
        .unwrap();
    let mut sum = equispec::spectral::IndexNullity { index: 0, nullity: 0 };
    for twist in [Sign::Plus, Sign::Minus] {
        let g = refl
            .with_twist(TwistVariant::Explicit(vec![Sign::Plus, twist]))
            .unwrap();
        let s = solve_equivariant(p, &g, 8, EquivariantStrategy::ProjectedSubspace).unwrap();
        let (c, _) = index_nullity(&s, 0.05).unwrap();
        sum.index += c.index;
        sum.nullity += c.nullity;
    }
    assert_eq!(counts, sum);
}

/// Dirichlet-excised subproblems dominate the parent eigenvalues
/// (monotonicity over nested discrete spaces), for the first five pairs.
#[test]
fn domain_monotonicity_under_dirichlet_excision() {
    let mesh = build_builtin("unit_disk", 2, &Params::default()).unwrap();
    let parent = ProblemSpec::laplacian(mesh);
    let base = solve_problem(&parent, 5, 0.05).unwrap();
    let keep: Vec<usize> = (0..parent.mesh.n_triangles())
        .filter(|&t| {
            let tri = parent.mesh.triangles[t];
            let c = (parent.mesh.vertices[tri[0]]
                + parent.mesh.vertices[tri[1]]
                + parent.mesh.vertices[tri[2]])
                / 3.0;
            c.norm() > 0.3
        })
        .collect();
    let sub = internalize(&parent, &keep, Internalization::Dirichlet).unwrap();
    let excised = solve_problem(&sub.problem, 5, 0.05).unwrap();
    for i in 0..5 {
        assert!(
            excised.eigenvalues[i] >= base.eigenvalues[i] - 1e-9,
            "monotonicity violated at {}: {} < {}",
            i,
            excised.eigenvalues[i],
            base.eigenvalues[i]
        );
    }
}
