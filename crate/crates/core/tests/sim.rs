use std::time::Instant;

use pqec_core::compiler::StrategyKind;
use pqec_core::lindblad::{build_exciton_model, ExcitonParams};
use pqec_core::resource::{DistanceRule, ScalingAnsatz};
use pqec_core::sim::{
    run_channel_fit_study, run_dynamics_study, run_resource_study, run_trajectory, CodeRoundSpec, DynamicsSpec,
    FitStudySpec, FrameSet, ResourceStudySpec,
};
use pqec_core::surface_code::{NoiseKind, NoiseModel};
use pqec_core::DensityMatrix;

fn z_weight(gamma_tau: f64) -> f64 {
    (1.0 - (-gamma_tau).exp()) / 2.0
}

#[test]
fn fit_study_defaults() {
    let t = Instant::now();
    let report = run_channel_fit_study(&FitStudySpec::default()).unwrap();
    println!("fit study: {:?}", t.elapsed());
    assert_eq!(report.sweep.len(), 32);
    assert_eq!(report.mismatch.len(), 14);
    for p in &report.sweep {
        assert_eq!(p.status, "ok", "{p:?}");
        assert!(p.residual < 1e-8, "{p:?}");
        if p.strategy == StrategyKind::B {
            assert!((p.p_z - z_weight(p.gamma_tau)).abs() < 1e-8, "{p:?}");
        }
    }
    let at = |kind: StrategyKind, f: f64| {
        report.mismatch.iter().find(|p| p.strategy == kind && (p.mismatch_factor - f).abs() < 1e-12).unwrap().clone()
    };
    let (a1, a15) = (at(StrategyKind::A, 1.0), at(StrategyKind::A, 1.15));
    let (b1, b15) = (at(StrategyKind::B, 1.0), at(StrategyKind::B, 1.15));
    println!("A residual {:e} -> {:e}, B residual {:e} -> {:e}", a1.residual, a15.residual, b1.residual, b15.residual);
    assert!(a15.residual > 0.0 && a15.residual >= 10.0 * a1.residual);
    assert!((b15.residual - b1.residual).abs() < 1e-10);
    assert!(a15.baseline_error_rate > a1.baseline_error_rate);
    // residual grows on both sides of the matched point
    let a85 = at(StrategyKind::A, 0.85);
    assert!(a85.residual > 10.0 * a1.residual);
}

#[test]
fn fit_study_with_iz_frames_matches_full_frames_for_dephasing() {
    let spec = FitStudySpec {
        gamma_tau: vec![0.08],
        mismatch: vec![1.0],
        frames: FrameSet::Iz,
        strategy_b: CodeRoundSpec { samples: Some(10_000), ..FitStudySpec::default().strategy_b },
        ..Default::default()
    };
    let report = run_channel_fit_study(&spec).unwrap();
    for p in &report.sweep {
        assert!(p.residual < 1e-8);
        assert_eq!(p.p_x + p.p_y, 0.0);
    }
}

#[test]
fn unreachable_points_are_recorded_not_fatal() {
    // the baseline round already dephases more than the weakest target asks for
    let spec = FitStudySpec {
        gamma_tau: vec![1e-4, 0.08],
        mismatch: vec![1.0],
        strategy_a: CodeRoundSpec::exact(3, NoiseModel::new(NoiseKind::DephasingOnly, 0.05).unwrap()),
        strategy_b: CodeRoundSpec { samples: Some(10_000), ..FitStudySpec::default().strategy_b },
        ..Default::default()
    };
    let report = run_channel_fit_study(&spec).unwrap();
    let a: Vec<_> = report.sweep.iter().filter(|p| p.strategy == StrategyKind::A).collect();
    assert_eq!(a[0].status, "compile_failure");
    assert!(a[0].residual > 1e-8);
    assert_eq!(a[1].status, "ok");
}

#[test]
fn dynamics_defaults() {
    let t = Instant::now();
    let report = run_dynamics_study(&DynamicsSpec::default()).unwrap();
    println!("dynamics: {:?}", t.elapsed());
    let a = report.trajectory("A").unwrap();
    let am = report.trajectory("A-mismatch").unwrap();
    let b = report.trajectory("B").unwrap();
    for tr in [a, am, b] {
        assert!(tr.failure.is_none());
        assert_eq!(tr.rows.len(), 101);
        let bounds = tr.step_distance.unwrap();
        // chaining applied to states
        for row in &tr.rows {
            assert!((0.0..=1.0).contains(&row.trace_distance));
            assert!(row.trace_distance <= row.step as f64 * bounds.upper + 1e-12);
        }
        assert!(tr.rows.windows(2).all(|w| w[1].time > w[0].time));
        println!("{} final {:.5} max {:.5} step {:?} residual {:?}", tr.label, tr.final_trace_distance, tr.max_trace_distance, bounds, tr.compile_residual);
    }
    assert!(a.final_trace_distance < 0.01);
    assert!(b.final_trace_distance < 0.01);
    assert!(am.final_trace_distance > a.final_trace_distance);
    assert_eq!(report.oracle.final_trace_distance, 0.0);
    let csv = report.csv().unwrap();
    assert!(csv.starts_with("trajectory,step,time,p00,p01,p10,p11,coherence,trace_distance\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 101);
}

#[test]
fn zero_rates_and_noiseless_code_reproduce_the_oracle() {
    let quiet = ExcitonParams { gamma1: 0.0, gamma2: 0.0, gamma12: 0.0, kappa1: 0.0, kappa2: 0.0, ..Default::default() };
    let noiseless = NoiseModel::new(NoiseKind::DephasingOnly, 0.0).unwrap();
    let spec = DynamicsSpec {
        exciton: quiet,
        m: 40,
        strategy_a: CodeRoundSpec::exact(3, noiseless),
        strategy_b: CodeRoundSpec { distance: 7, noise: noiseless, samples: Some(1000) },
        fit: pqec_core::compiler::FitOptions { eta: 1e-8, ..Default::default() },
        ..Default::default()
    };
    let report = run_dynamics_study(&spec).unwrap();
    for tr in &report.strategies {
        assert!(tr.failure.is_none(), "{tr:?}");
        assert!(tr.max_trace_distance < 1e-10, "{} {}", tr.label, tr.max_trace_distance);
    }
}

#[test]
fn oracle_against_itself_has_zero_distance() {
    let model = build_exciton_model(&ExcitonParams::default()).unwrap();
    let step = model.exact_step(0.2).unwrap();
    let rho0 = DensityMatrix::basis_state(4, 2).unwrap();
    let tr = run_trajectory("self", &step, &step, &rho0, 0.2, 50).unwrap();
    assert!(tr.max_trace_distance < 1e-10);
    // populations sum to one all along
    for r in &tr.rows {
        assert!((r.p00 + r.p01 + r.p10 + r.p11 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn compile_failure_aborts_only_that_trajectory() {
    let spec = DynamicsSpec {
        m: 5,
        fit: pqec_core::compiler::FitOptions { eta: 1e-9, max_iter: 2000, ..Default::default() },
        ..Default::default()
    };
    let report = run_dynamics_study(&spec).unwrap();
    let a = report.trajectory("A").unwrap();
    assert!(a.failure.as_deref().unwrap().contains("not reachable"));
    assert_eq!(report.oracle.rows.len(), 6);
}

#[test]
fn equal_tolerances_give_equal_footprints() {
    // with ζΔ_tar = ε/m both strategies face the same threshold
    let spec = ResourceStudySpec { zeta: 0.5, delta_tar: vec![1e-5], per_step: vec![5e-6], ..Default::default() };
    let p = &run_resource_study(&spec).unwrap().points[0];
    assert_eq!(p.x_a, p.x_b);
    assert_eq!(p.footprint_a, p.footprint_b);
    assert_eq!(p.ratio, Some(1.0));
}

#[test]
fn hundredfold_tolerance_saves_two_distance_steps() {
    // ratio 0.1 and A = C = 1: each factor 10 in x is one step of (d+1)/2, two steps of d
    let spec = ResourceStudySpec {
        ansatz: ScalingAnsatz::new(1.0, 1e-3, 1e-2, 1.0).unwrap(),
        zeta: 0.1,
        delta_tar: vec![0.1],
        per_step: vec![1e-4],
        rule: DistanceRule::TargetAware,
        ..Default::default()
    };
    let p = &run_resource_study(&spec).unwrap().points[0];
    assert!((p.x_a / p.x_b - 100.0).abs() < 1e-9);
    let (da, db) = (p.d_a.unwrap(), p.d_b.unwrap());
    assert_eq!(db - da, 4, "{p:?}");
    let expected = (2 * db * db - 1) as f64 / (2 * da * da - 1) as f64;
    assert!((p.ratio.unwrap() - expected).abs() < 1e-15);
    assert!((p.ratio_square.unwrap() - (db as f64 / da as f64).powi(2)).abs() < 1e-15);
}

#[test]
fn infeasible_points_are_flagged() {
    let spec = ResourceStudySpec { eps_prog_b: 1.0, ..Default::default() };
    let report = run_resource_study(&spec).unwrap();
    assert!(report.points.iter().all(|p| p.status == "infeasible_B" && p.d_b.is_none() && p.d_a.is_some()));
    let csv = report.csv().unwrap();
    let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields.len(), 6);
    assert!(fields[2].is_empty() && fields[4].is_empty() && fields[5].is_empty(), "{fields:?}");
    assert!(!fields[1].is_empty() && !fields[3].is_empty());
}

#[test]
fn studies_are_deterministic() {
    let r1 = run_resource_study(&ResourceStudySpec::default()).unwrap().csv().unwrap();
    let r2 = run_resource_study(&ResourceStudySpec::default()).unwrap().csv().unwrap();
    assert_eq!(r1, r2);
    let spec = FitStudySpec {
        gamma_tau: vec![0.02, 0.08],
        strategy_b: CodeRoundSpec { samples: Some(20_000), ..FitStudySpec::default().strategy_b },
        seed: 11,
        ..Default::default()
    };
    let f1 = run_channel_fit_study(&spec).unwrap();
    let f2 = run_channel_fit_study(&spec).unwrap();
    assert_eq!(f1.sweep_csv().unwrap(), f2.sweep_csv().unwrap());
    assert_eq!(f1.mismatch_csv().unwrap(), f2.mismatch_csv().unwrap());
}
