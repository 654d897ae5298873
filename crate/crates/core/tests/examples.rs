//! Worked examples with independently computed reference values.

use std::f64::consts::{E, PI};

use approx::assert_relative_eq;
use gsqpe_core::cost::{analytic_total, norm_h1 as closed_norm_h1};
use gsqpe_core::hamiltonian::{laplacian_eigenvalue_1d, sine_state};
use gsqpe_core::qpe::{exact_mode_threshold, run_diagonal, SPLITTING_MODE_THRESHOLD};
use gsqpe_core::spectral::ground_overlap;
use gsqpe_core::splitting::{power_exponential_bound, suzuki_weight, Factor, Target};
use gsqpe_core::*;
use num_complex::Complex64;

fn ham(d: usize, q: u32, p: PotentialSpec) -> DiscretizedHamiltonian {
    let g = GridSpec::new(d, q).unwrap();
    discretize(&p.build(d).unwrap(), &g).unwrap()
}

fn exact_ham(d: usize, q: u32, p: PotentialSpec) -> DiscretizedHamiltonian {
    let g = GridSpec::new(d, q).unwrap();
    discretize_with(&p.build(d).unwrap(), &g, QueryConfig::exact()).unwrap()
}

#[test]
fn grid_shapes() {
    let g = GridSpec::new(1, 3).unwrap();
    assert_eq!((g.m(), g.h()), (7, 0.125));
    let g = GridSpec::new(2, 2).unwrap();
    assert_eq!((g.m(), g.h(), g.len()), (3, 0.25, 9));
    assert!(matches!(GridSpec::new(1, 30), Err(Error::TooLarge { .. })));
}

#[test]
fn discretized_norms() {
    let h = ham(1, 3, PotentialSpec::Zero);
    assert!(h.values().iter().all(|&v| v == 0.0));
    assert_eq!(h.norm_h2(), 0.0);
    assert_relative_eq!(h.norm_h1(), 123.12829008072235, max_relative = 1e-13);
    assert_relative_eq!(h.norm_h1(), 128.0 * (7.0 * PI / 16.0).sin().powi(2), max_relative = 1e-14);

    let h = ham(2, 2, PotentialSpec::Constant { value: 1.0 });
    assert!(h.values().iter().all(|&v| v == 1.0));
    assert_eq!(h.norm_h2(), 0.25);

    let h = exact_ham(1, 3, PotentialSpec::LinearMean);
    let expected: Vec<f64> = (1..=7).map(|j| j as f64 / 8.0).collect();
    assert_eq!(h.values(), expected.as_slice());
}

#[test]
fn laplacian_eigenvalues() {
    let g = GridSpec::new(1, 3).unwrap();
    assert_relative_eq!(laplacian_eigenvalue_1d(&g, 1), 9.743419838555335, max_relative = 1e-13);
    assert_relative_eq!(laplacian_eigenvalue_1d(&g, 7), 246.2565801614447, max_relative = 1e-13);
    let g2 = GridSpec::new(2, 3).unwrap();
    let pair = laplacian_eigenpair(&g2, &[1, 1]).unwrap();
    assert_relative_eq!(pair.eigenvalue, 2.0 * 9.743419838555335, max_relative = 1e-13);
}

#[test]
fn oracle_energies() {
    let e0 = ground_state(&ham(1, 3, PotentialSpec::Zero)).unwrap().energy;
    assert_relative_eq!(e0, 256.0 * (PI / 16.0).sin().powi(2), max_relative = 1e-12);
    let e1 = ground_state(&ham(1, 3, PotentialSpec::Constant { value: 1.0 })).unwrap().energy;
    assert_relative_eq!(e1 - e0, 1.0, epsilon = 1e-11);
    let h = exact_ham(1, 4, PotentialSpec::LinearMean);
    let g = ground_state(&h).unwrap();
    assert_relative_eq!(g.energy, 10.336821448037025, max_relative = 1e-12);
    let d1 = ground_overlap(&h, &g);
    assert_relative_eq!(d1, 0.9999617752975742, max_relative = 1e-12);
    assert!(d1 >= 0.9986880885477767);
}

#[test]
fn overlap_is_one_for_zero_and_constant() {
    for (d, q) in [(1, 3), (2, 3), (3, 2)] {
        for p in [PotentialSpec::Zero, PotentialSpec::Constant { value: 0.7 }] {
            let h = ham(d, q, p);
            let g = ground_state(&h).unwrap();
            assert_relative_eq!(ground_overlap(&h, &g), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn exact_propagator_examples() {
    let h = ham(1, 4, PotentialSpec::LinearMean);
    let s: Vec<Complex64> = (0..h.len()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
    let out = exact_propagator_apply(&h, 0.0, &s).unwrap();
    for (a, b) in out.iter().zip(&s) {
        assert!((a - b).norm() < 1e-12);
    }
    let g = ground_state(&h).unwrap();
    let z: Vec<Complex64> = g.vector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let t = 0.37;
    let out = exact_propagator_apply(&h, t, &z).unwrap();
    let phase = Complex64::from_polar(1.0, t * g.energy / 2.0);
    for (a, b) in out.iter().zip(&z) {
        assert!((a - phase * b).norm() < 1e-10);
    }
    let n0: f64 = s.iter().map(|c| c.norm_sqr()).sum();
    let n1: f64 = exact_propagator_apply(&h, 5.0, &s).unwrap().iter().map(|c| c.norm_sqr()).sum();
    assert_relative_eq!(n0.sqrt(), n1.sqrt(), max_relative = 1e-12);
}

#[test]
fn perturbation_examples() {
    let g = GridSpec::new(1, 5).unwrap();
    let q = QueryConfig::exact();
    let same = perturbation_check(&PotentialSpec::LinearMean, &PotentialSpec::LinearMean, &g, q).unwrap();
    assert_eq!(same.residual, 0.0);
    let shift = perturbation_check(&PotentialSpec::Constant { value: 0.4 }, &PotentialSpec::Zero, &g, q).unwrap();
    assert!(shift.residual.abs() < 1e-12);
    let full = perturbation_check(&PotentialSpec::SineBump { amplitude: 0.1 }, &PotentialSpec::Zero, &g, q).unwrap();
    let half = perturbation_check(&PotentialSpec::SineBump { amplitude: 0.05 }, &PotentialSpec::Zero, &g, q).unwrap();
    assert_relative_eq!(full.residual, -3.7074868686204354e-06, max_relative = 1e-6);
    assert_relative_eq!(half.residual, -9.267455585160178e-07, max_relative = 1e-6);
    let ratio = full.residual / half.residual;
    assert!((2.0..=6.0).contains(&ratio), "{ratio}");
}

#[test]
fn schedule_examples() {
    let f = |target, z| Factor { target, z };
    let s = suzuki_schedule(1, 1.0, 1).unwrap();
    assert_eq!(s.factors, vec![f(Target::H1, 0.5), f(Target::H2, 1.0), f(Target::H1, 0.5)]);
    let s = suzuki_schedule(1, 1.0, 2).unwrap();
    assert_eq!(
        s.factors,
        vec![f(Target::H1, 0.25), f(Target::H2, 0.5), f(Target::H1, 0.5), f(Target::H2, 0.5), f(Target::H1, 0.25)]
    );
    assert_relative_eq!(suzuki_weight(2), 0.4144907717943757, max_relative = 1e-14);
}

#[test]
fn step_bound_examples() {
    let n0 = power_exponential_bound(1, 0, 0.00625, 118.44, 0.5);
    assert_relative_eq!(n0, 214857.28879104758, max_relative = 1e-12);
    assert_relative_eq!(n0, 16.0 * E * 118.44 * (8.0 * E * 0.5 / 0.00625).sqrt(), max_relative = 1e-14);
    for k in 1..=4 {
        let a = power_exponential_bound(k, 2, 1e-3, 50.0, 0.25);
        let b = power_exponential_bound(k, 2, 1e-3 * 4f64.powi(k as i32), 50.0, 0.25);
        assert_relative_eq!(b, a / 2.0, max_relative = 1e-13);
    }
    let (n, bound) = min_steps_for_error(2, 3, 1e-3, 80.0, 0.5).unwrap();
    assert_eq!(n, (bound.n_t / 11.0).ceil() as usize);
}

#[test]
fn empirical_steps_for_zero_potential() {
    let h = ham(1, 4, PotentialSpec::Zero);
    for k in 1..=2 {
        let found = gsqpe_core::splitting::min_steps_for_error_empirical(&h, k, 8.0, 1e-6).unwrap();
        assert_eq!(found.steps, 1);
        assert!(found.measured_error < 1e-10);
    }
    let s = suzuki_schedule(2, 3.0, 2).unwrap();
    let init: Vec<Complex64> = (0..h.len()).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.2)).collect();
    let a = apply_schedule(&h, &s, &init).unwrap();
    let b = exact_propagator_apply(&h, 3.0, &init).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-10);
    }
}

#[test]
fn budget_examples() {
    let b = error_budget(3).unwrap();
    assert_eq!(b.epsilons, vec![1.0 / 160.0, 1.0 / 80.0, 1.0 / 40.0]);
    assert!(b.total() <= 1.0 / 20.0);
    assert_eq!(error_budget(1).unwrap().epsilons, vec![1.0 / 40.0]);
}

#[test]
fn optimal_order_examples() {
    let c = optimal_k(8, 1).unwrap();
    assert_relative_eq!(c.k_star, 1.6052571277903265, max_relative = 1e-12);
    assert_eq!(c.k, 2);
    let t1 = analytic_total(8, 1, 1.0, 0.5);
    let t2 = analytic_total(8, 2, 1.0, 0.5);
    assert!(t2 < t1);
    assert!(optimal_k(8, 2).unwrap().k_star < c.k_star);
    assert!(optimal_k(9, 1).unwrap().k_star > c.k_star);
}

#[test]
fn analytic_total_examples() {
    assert_relative_eq!(analytic_total(8, 2, 118.44, 0.5), 168802040.09790948, max_relative = 1e-12);
    let g = GridSpec::new(1, 3).unwrap();
    assert_relative_eq!(analytic_total(8, 2, closed_norm_h1(&g), 0.5), 175483844.64195478, max_relative = 1e-12);
    for k in 1..=3 {
        let ratio = analytic_total(9, k, 10.0, 0.3) / analytic_total(8, k, 10.0, 0.3);
        assert_relative_eq!(ratio, 2f64.powf(1.0 + 1.0 / (2.0 * k as f64)), max_relative = 1e-12);
    }
}

#[test]
fn initial_state_examples() {
    let cfg = QpeConfig::new(GridSpec::new(1, 3).unwrap(), PotentialSpec::Zero);
    let st = prepare_initial_state(&cfg).unwrap();
    let expected = [0.19134, 0.35355, 0.46194, 0.5, 0.46194, 0.35355, 0.19134, 0.0];
    for (r, e) in expected.iter().enumerate() {
        let a = st.amplitude(0, r);
        assert!((a.re - e).abs() < 5e-6 && a.im == 0.0, "register {r}: {a}");
    }
    assert_relative_eq!(st.norm(), 1.0, epsilon = 1e-12);

    let cfg = QpeConfig::new(GridSpec::new(2, 2).unwrap(), PotentialSpec::Zero);
    let st = prepare_initial_state(&cfg).unwrap();
    let axis = sine_state(&GridSpec::new(1, 2).unwrap());
    for r in 0..16 {
        let (r0, r1) = (r / 4, r % 4);
        let want = if r0 < 3 && r1 < 3 { axis[r0] * axis[r1] } else { 0.0 };
        assert!((st.amplitude(0, r).re - want).abs() < 1e-14);
    }
}

#[test]
fn zero_potential_phase_estimation() {
    let cfg = QpeConfig::new(GridSpec::new(1, 3).unwrap(), PotentialSpec::Zero).with_clock_bits(8);
    let out = run_qpe(&cfg).unwrap();
    let e = 256.0 * (PI / 16.0).sin().powi(2);
    let phase = e / (4.0 * PI);
    assert_relative_eq!(phase, 0.775357, epsilon = 1e-6);
    let j = out.distribution.map_outcome();
    assert!((phase - j as f64 / 256.0).abs() <= 1.0 / 256.0);
    assert!(out.distribution.success_mass(phase) >= 8.0 / (PI * PI));
    let est = estimate_energy(&out.distribution, 1, Some(e));
    assert!((est.energy - e).abs() <= 4.0 * PI / 256.0);
}

#[test]
fn representable_phase_is_certain() {
    let (dist, _) = run_diagonal(5, &[5.0 / 32.0, 0.4], &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    assert_relative_eq!(dist.probabilities[5], 1.0, epsilon = 1e-12);
    let zero = OutcomeDistribution { b: 3, probabilities: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0] };
    assert_eq!(estimate_energy(&zero, 1, None).energy, 0.0);
}

#[test]
fn linear_potential_estimate_within_radius() {
    let g = GridSpec::new(1, 4).unwrap();
    let cfg = QpeConfig::new(g, PotentialSpec::LinearMean).with_clock_bits(8);
    let out = run_qpe(&cfg).unwrap();
    let e = ground_state(&cfg.hamiltonian().unwrap()).unwrap().energy;
    let est = estimate_energy(&out.distribution, 1, Some(e));
    assert!((est.energy - e).abs() <= 4.0 * PI / 256.0);
}

#[test]
fn splitting_mode_examples() {
    let g = GridSpec::new(1, 3).unwrap();
    let exact_cfg = QpeConfig::new(g, PotentialSpec::LinearMean).with_clock_bits(6);
    let split_cfg = exact_cfg.clone().splitting(KPolicy::Fixed(1), StepPolicy::Empirical);
    let e = ground_state(&exact_cfg.hamiltonian().unwrap()).unwrap().energy;
    let phase = e / (4.0 * PI);
    let exact = run_qpe(&exact_cfg).unwrap().distribution.success_mass(phase);
    let split_out = run_qpe(&split_cfg).unwrap();
    let split = split_out.distribution.success_mass(phase);
    assert!((exact - split).abs() <= 0.1);
    assert!(split_out.cost.query_identity_holds());
    let slack = empirical_vs_analytic(&split_out.cost);
    assert_eq!(slack.empirical_n, 896);
    assert_relative_eq!(slack.ratio, 2.3690240783102704e-05, max_relative = 1e-9);

    let g = GridSpec::new(2, 2).unwrap();
    let cfg = QpeConfig::new(g, PotentialSpec::LinearMean).with_clock_bits(6).splitting(KPolicy::Auto, StepPolicy::Empirical);
    let e = ground_state(&cfg.hamiltonian().unwrap()).unwrap().energy;
    let out = run_qpe(&cfg).unwrap();
    assert!(out.distribution.success_mass(e / (8.0 * PI)) >= SPLITTING_MODE_THRESHOLD);
}

#[test]
fn success_thresholds() {
    assert!(exact_mode_threshold() >= 0.8);
    const { assert!(0.8 - 0.1 >= SPLITTING_MODE_THRESHOLD) };
    assert_relative_eq!(exact_mode_threshold(), 0.8095060737693166, max_relative = 1e-14);
}

#[test]
fn scaling_examples() {
    let table = nstar_scaling(&(6..=12).map(|b| (1, b)).collect::<Vec<_>>()).unwrap();
    let e = table.fits[0].exponent;
    assert!(e > 3.0 && e < 3.5, "{e}");
    let models: Vec<f64> = table.rows.iter().map(|r| r.nstar_model).collect();
    assert!(models.windows(2).all(|w| w[1] > w[0]));
    let g = |d| GridSpec::new(d, 4).unwrap();
    let qubits: Vec<usize> = (1..=4).map(|d| gsqpe_core::cost::qubit_count(6, &g(d))).collect();
    assert_eq!(qubits, vec![10, 14, 18, 22]);
}
