use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pqec_core::channel::{choi_trace_distance, compose, Channel, PauliChannel};
use pqec_core::lindblad::{
    amplitude_damping_model, build_exciton_model, dephasing_model, ExcitonParams, JumpOperator, LindbladModel,
};
use pqec_core::linalg::{c, cr, hermitian_eigenvalues, identity, max_abs, zeros, ComplexMatrix};
use pqec_core::random::random_density_matrix;
use pqec_core::DensityMatrix;

fn quiet(eps: f64, j: f64) -> ExcitonParams {
    ExcitonParams { eps1: eps, eps2: eps, j, gamma1: 0.0, gamma2: 0.0, gamma12: 0.0, kappa1: 0.0, kappa2: 0.0 }
}

fn random_model(seed: u64, dim: usize) -> LindbladModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = || ComplexMatrix::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let a = g();
    let h = (&a + a.adjoint()) * cr(0.5);
    let jumps = (0..3)
        .map(|k| JumpOperator { operator: g(), rate: 0.1 * (k + 1) as f64, label: format!("j{k}") })
        .collect();
    LindbladModel::new(h, jumps).unwrap()
}

#[test]
fn coherent_local_model_keeps_populations() {
    let model = build_exciton_model(&ExcitonParams { eps2: 0.7, ..quiet(1.0, 0.0) }).unwrap();
    let rho0 = DensityMatrix::basis_state(4, 2).unwrap();
    let traj = model.evolve(&rho0, 0.3, 20).unwrap();
    for rho in &traj {
        assert!((rho.populations()[2] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn resonant_hopping_oscillates_at_twice_j() {
    let j = 0.3;
    let model = build_exciton_model(&quiet(1.0, j)).unwrap();
    let rho0 = DensityMatrix::basis_state(4, 2).unwrap();
    let tau = 0.25;
    let traj = model.evolve(&rho0, tau, 40).unwrap();
    for (k, rho) in traj.iter().enumerate() {
        let t = k as f64 * tau;
        // two-level Rabi problem on {|10⟩, |01⟩} with coupling J
        let p10 = 0.5 * (1.0 + (2.0 * j * t).cos());
        assert!((rho.populations()[2] - p10).abs() < 1e-10, "t={t}");
        assert!((rho.populations()[1] - (1.0 - p10)).abs() < 1e-10);
    }
}

#[test]
fn loss_on_site_one_decays_its_population() {
    let kappa = 0.4;
    let model = build_exciton_model(&ExcitonParams { kappa1: kappa, ..quiet(1.0, 0.0) }).unwrap();
    let rho0 = DensityMatrix::basis_state(4, 2).unwrap();
    let tau = 0.5;
    for (k, rho) in model.evolve(&rho0, tau, 10).unwrap().iter().enumerate() {
        let t = k as f64 * tau;
        assert!((rho.populations()[2] - (-kappa * t).exp()).abs() < 1e-10);
        assert!((rho.trace() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn dephasing_spectrum() {
    let gamma = 0.37;
    let mut vals: Vec<f64> = dephasing_model(gamma).unwrap().liouvillian().iter().map(|v| v.re).collect();
    // the Liouvillian is diagonal here
    vals.retain(|v| *v != 0.0);
    vals.sort_by(f64::total_cmp);
    assert_eq!(vals.len(), 2);
    for v in vals {
        assert!((v + gamma).abs() < 1e-15);
    }
    let l = dephasing_model(gamma).unwrap().liouvillian();
    let herm = (&l + l.adjoint()) * cr(0.5);
    let spec = hermitian_eigenvalues(&herm);
    assert!((spec[0] + gamma).abs() < 1e-14 && (spec[1] + gamma).abs() < 1e-14);
    assert!(spec[2].abs() < 1e-14 && spec[3].abs() < 1e-14);

    assert!(max_abs(&LindbladModel::new(zeros(2, 2), vec![]).unwrap().liouvillian()) == 0.0);
}

#[test]
fn dephasing_step_matches_closed_form() {
    let gamma_tau: f64 = 0.08;
    let step = dephasing_model(gamma_tau).unwrap().exact_step(1.0).unwrap();
    let mut rho = zeros(2, 2);
    rho[(0, 0)] = cr(0.5);
    rho[(1, 1)] = cr(0.5);
    rho[(0, 1)] = cr(0.5);
    rho[(1, 0)] = cr(0.5);
    let out = step.apply(&rho).unwrap();
    assert!((out[(0, 1)].re - 0.5 * (-gamma_tau).exp()).abs() < 1e-14);
    let p = (1.0 - (-gamma_tau).exp()) / 2.0;
    let closed = PauliChannel::dephasing(p).unwrap().to_channel().unwrap();
    assert!(max_abs(&(closed.choi() - step.choi())) < 1e-14);
    let unital = step.apply(&identity(2)).unwrap();
    assert!(max_abs(&(unital - identity(2))) < 1e-12);
}

#[test]
fn amplitude_damping_step_matches_closed_form() {
    let kappa = 0.3;
    let tau = 0.7;
    let step = amplitude_damping_model(kappa).unwrap().exact_step(tau).unwrap();
    let lambda = 1.0 - (-kappa * tau).exp();
    let closed = pqec_core::channel::amplitude_damping(lambda).unwrap();
    assert!(max_abs(&(closed.choi() - step.choi())) < 1e-13);
}

#[test]
fn exciton_default_step_is_cptp() {
    let model = build_exciton_model(&ExcitonParams::default()).unwrap();
    let step = model.exact_step(0.2).unwrap();
    let report = step.validate();
    assert!(report.min_choi_eigenvalue > -1e-10);
    assert!(report.tp_defect < 1e-10);
}

#[test]
fn first_order_kraus_converges_quadratically() {
    let model = build_exciton_model(&ExcitonParams::default()).unwrap();
    let dts = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut defects = Vec::new();
    let mut dists = Vec::new();
    for dt in dts {
        let k = model.first_order_kraus_step(dt).unwrap();
        defects.push(k.tp_defect());
        dists.push(choi_trace_distance(&k.to_channel().unwrap(), &model.exact_step(dt).unwrap()).unwrap());
    }
    for w in 0..3 {
        let slope_tp = (defects[w].ln() - defects[w + 1].ln()) / (dts[w].ln() - dts[w + 1].ln());
        let slope_d = (dists[w].ln() - dists[w + 1].ln()) / (dts[w].ln() - dts[w + 1].ln());
        assert!((slope_tp - 2.0).abs() < 0.05, "tp slope {slope_tp}");
        assert!((slope_d - 2.0).abs() < 0.1, "distance slope {slope_d}");
    }
}

#[test]
fn excitation_number_never_grows_under_loss() {
    let model = build_exciton_model(&ExcitonParams::default()).unwrap();
    let rho0 = DensityMatrix::basis_state(4, 2).unwrap();
    let traj = model.evolve(&rho0, 0.2, 100).unwrap();
    assert_eq!(model.evolve(&rho0, 0.2, 0).unwrap().len(), 1);
    let number = |r: &DensityMatrix| {
        let p = r.populations();
        p[1] + p[2] + 2.0 * p[3]
    };
    for w in traj.windows(2) {
        assert!(number(&w[1]) <= number(&w[0]) + 1e-12);
        assert!((w[1].trace() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn dephasing_only_trajectories_keep_populations() {
    let model = build_exciton_model(&ExcitonParams { gamma1: 0.2, gamma2: 0.1, gamma12: 0.05, ..quiet(1.0, 0.0) }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho0 = random_density_matrix(4, &mut rng);
    let traj = model.evolve(&rho0, 0.3, 30).unwrap();
    for rho in &traj {
        for (a, b) in rho.populations().iter().zip(rho0.populations()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let step = model.exact_step(0.3).unwrap();
    assert!(max_abs(&(step.apply(&identity(4)).unwrap() - identity(4))) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn liouvillian_preserves_trace(seed in any::<u64>(), dim in 2usize..5) {
        let l = random_model(seed, dim).liouvillian();
        // vec(I)† L = 0
        let mut row = zeros(1, dim * dim);
        for k in 0..dim {
            row[(0, k * dim + k)] = cr(1.0);
        }
        prop_assert!(max_abs(&(row * l)) < 1e-12);
    }

    #[test]
    fn exact_steps_form_a_semigroup(seed in any::<u64>(), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let model = random_model(seed, 2);
        let a = model.exact_step(t1).unwrap();
        let b = model.exact_step(t2).unwrap();
        let ab = compose(&b, &a).unwrap();
        let direct = model.exact_step(t1 + t2).unwrap();
        prop_assert!(max_abs(&(ab.choi() - direct.choi())) < 1e-10);
        prop_assert!(direct.is_cptp());
    }
}

#[test]
fn unit_step_of_identity_model() {
    let ch = LindbladModel::new(zeros(3, 3), vec![]).unwrap().exact_step(2.0).unwrap();
    assert!(max_abs(&(ch.choi() - Channel::identity(3).choi())) < 1e-15);
}
