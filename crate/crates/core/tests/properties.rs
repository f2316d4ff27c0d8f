use num_complex::Complex64;
use proptest::prelude::*;

use zeno_register::analytics::free_evolution_fidelity;
use zeno_register::dynamics::{
    free_evolution, jump_ensemble, nonselective_decay_rate, null_trajectory, EnsembleOptions, Model,
};
use zeno_register::oracle::{
    build_bose_hubbard, exact_evolve_fidelity, exact_ground_state, fock_basis,
    perturbative_fock_state, Boundary,
};
use zeno_register::register::{
    build_basis, build_effective_hamiltonian, build_free_hamiltonian,
    build_interaction_hamiltonian, perturbative_ground_state, Layout, StateVector,
};
use zeno_register::units::{
    derive_params, hole_leak_probability, hole_leak_product, DerivedParams, PhysicalConfig,
};

fn paper() -> DerivedParams {
    derive_params(&PhysicalConfig::default()).unwrap()
}

fn odd_pair() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=98).prop_flat_map(|a| ((a + 1)..=99).prop_map(move |b| (2 * a + 1, 2 * b + 1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hole_leak_forms_agree((n, atoms) in odd_pair(), j in 1e-3f64..0.05, delta in 1e-5f64..1e-2) {
        let closed = hole_leak_probability(j, delta, n, atoms).unwrap();
        let product = hole_leak_product(j, delta, n, atoms).unwrap();
        prop_assume!(!closed.underflow && product > 1e-290 && product.is_finite());
        prop_assert!((closed.probability / product - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rabi_scaling(c in 0.1f64..5.0) {
        let base = PhysicalConfig::default();
        let scaled = PhysicalConfig { atomic_rabi: base.atomic_rabi * c, ..base.clone() };
        let (a, b) = (derive_params(&base).unwrap(), derive_params(&scaled).unwrap());
        let close = |x: f64, y: f64| (x / y - 1.0).abs() < 1e-12;
        prop_assert!(close(b.omega_m, c * a.omega_m));
        prop_assert!(close(b.s_a, c * c * a.s_a));
        prop_assert!(close(b.vc_abs, c * c * a.vc_abs));
        prop_assert!(close(b.kappa, c * c * a.kappa));
    }

    #[test]
    fn kappa_falls_with_interaction(a1 in 1e-9f64..2e-8, factor in 1.01f64..3.0) {
        let base = PhysicalConfig::default();
        let small = derive_params(&PhysicalConfig { scattering_length: a1, ..base.clone() }).unwrap();
        let large = derive_params(&PhysicalConfig { scattering_length: a1 * factor, ..base }).unwrap();
        prop_assert!(large.u_hz > small.u_hz);
        prop_assert!(large.kappa < small.kappa);
        for p in [&small, &large] {
            prop_assert!(p.kappa >= 0.0 && p.j >= 0.0 && p.delta >= 0.0 && p.vc_abs >= 0.0 && p.s_a >= 0.0);
        }
    }

    #[test]
    fn zeno_rate_falls_with_kappa(k1 in 17.0f64..1e3, factor in 1.01f64..10.0) {
        let p = paper().with_u_over_j(500.0);
        let slow = nonselective_decay_rate(&p.clone().with_kappa(k1), 500);
        let fast = nonselective_decay_rate(&p.with_kappa(k1 * factor), 500);
        prop_assert!(fast < slow);
    }

    #[test]
    fn interaction_hamiltonian_structure(half in 1usize..8, j in 0.0f64..0.05, delta in 0.0f64..1e-3) {
        let n = 2 * half + 1;
        let b = build_basis(n).unwrap();
        let p = DerivedParams { j, delta, ..paper() };
        let hi = build_interaction_hamiltonian(&b, &p);
        prop_assert!(hi.hermiticity_defect() < 1e-12);
        let he = build_effective_hamiltonian(&b, &p);
        for r in 0..b.dim() {
            for c in 0..b.dim() {
                let d = he.get(r, c) - hi.get(r, c);
                let expected = if r == c && b.is_molecule(r) {
                    Complex64::new(0.0, -0.5 * p.gamma_m)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                prop_assert!(d == expected);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn conditioned_norm_never_rises(u_over_j in 20.0f64..500.0, half in 1usize..5) {
        let n = 2 * half + 1;
        let p = paper().with_u_over_j(u_over_j);
        for model in [Model::Full, Model::Eliminated] {
            let s = null_trajectory(&p, n, model, 2.0, None).unwrap().series;
            prop_assert!(s.norm_nonincreasing(1e-12));
            prop_assert!(s.fidelity.iter().all(|f| (0.0..=1.0 + 1e-12).contains(f)));
        }
    }

    #[test]
    fn ensembles_ignore_worker_count(seed in any::<u64>(), workers in 2usize..5) {
        let p = paper().with_u_over_j(30.0);
        let one = EnsembleOptions { workers: Some(1), ..Default::default() };
        let many = EnsembleOptions { workers: Some(workers), ..Default::default() };
        let a = jump_ensemble(&p, 5, 300, seed, 5.0, &one).unwrap();
        let b = jump_ensemble(&p, 5, 300, seed, 5.0, &many).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn ground_residual_bound() {
    for (n, u_over_j, delta) in [(5, 100.0, 0.0), (11, 200.0, 1e-3), (51, 500.0, 1e-4)] {
        let b = build_basis(n).unwrap();
        let p = DerivedParams {
            delta,
            ..paper().with_u_over_j(u_over_j)
        };
        let g = perturbative_ground_state(&b, &p).unwrap();
        let h = build_free_hamiltonian(&b, &p);
        let e = -4.0 * (n as f64 - 1.0) * p.j * p.j;
        let hv = h.mul_vec(g.amplitudes());
        let res: f64 = hv
            .iter()
            .zip(g.amplitudes())
            .map(|(a, c)| (a - c * e).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res <= 10.0 * p.j * p.j, "n={n}: {res}");
    }
}

#[test]
fn free_evolution_short_time_curvature() {
    let t = 0.05;
    for n in [3usize, 5, 7] {
        for u_over_j in [100.0, 500.0] {
            for delta in [0.0, 1e-3] {
                let p = DerivedParams {
                    delta,
                    ..paper().with_u_over_j(u_over_j)
                };
                let expected = 4.0 * (n - 1) as f64 * p.j * p.j * t * t;
                let b = build_basis(n).unwrap();
                let s =
                    free_evolution(&p, &StateVector::target(&b, Layout::Full), t, None).unwrap();
                let restricted = 1.0 - s.fidelity.last().unwrap();
                let closed = 1.0 - free_evolution_fidelity(n - 1, p.j, 1.0, delta, t);
                let fock = fock_basis(n, n, Boundary::Open).unwrap();
                let exact = 1.0
                    - exact_evolve_fidelity(&fock, p.j, 1.0, delta, t, None)
                        .unwrap()
                        .fidelity
                        .last()
                        .unwrap();
                for (name, got) in [
                    ("restricted", restricted),
                    ("closed", closed),
                    ("exact", exact),
                ] {
                    assert!(
                        (got / expected - 1.0).abs() < 0.01,
                        "n={n} U/J={u_over_j} d={delta} {name}: {got} vs {expected}"
                    );
                }
            }
        }
    }
}

#[test]
fn exact_ground_below_variational() {
    for m in 2..=6 {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let basis = fock_basis(m, m, boundary).unwrap();
            let j = 0.02;
            let h = build_bose_hubbard(&basis, j, 1.0, 0.0);
            let trial = perturbative_fock_state(&basis, j, 1.0, 0.0).unwrap();
            let variational = h.expectation(&trial).re;
            let exact = exact_ground_state(&h).unwrap().energy;
            assert!(exact <= variational + 1e-14, "M={m} {boundary:?}");
        }
    }
}
