//! Integration tests for the parameter-identification pipeline: segmentation,
//! stiffness/damping regression, relaxation fits and the full round trip.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use capsim::cam::{CamProfile, DutyFractions};
use capsim::contact::{stick_slip_simulate, Mode, TissueParams};
use capsim::identify::{
    compare, fit_exponential, identify, probe_trajectory, segment_trace, MeasuredTrace, Phase,
};
use capsim::reference::TISSUE;
use capsim::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative(estimate: f64, truth: f64) -> f64 {
    ((estimate - truth) / truth).abs()
}

#[test]
fn round_trip_recovers_parameters_to_machine_precision() {
    // Harmonic drive: sinusoidal velocity keeps stiffness and damping jointly
    // identifiable within every stick interval.
    let profile = CamProfile::harmonic(30.0).unwrap();
    let traj = profile.slider_trajectory_uniform(TAU * 0.1, 1e-3, 0.0, 2).unwrap();
    let corners = [
        (130.0, 6.0, 0.45, 0.02),
        (50.0, 20.0, 1.0, 0.01),
        (500.0, 1.0, 0.01, 1.0),
        (50.0, 1.0, 0.5, 0.5),
        (500.0, 20.0, 0.1, 0.1),
    ];
    for (k, c, tau_ret, tau_adv) in corners {
        let truth = TissueParams {
            k_tissue: k,
            c_tissue: c,
            mu_s_n: 0.08,
            mu_k_n: 0.14,
            tau_ret,
            tau_adv,
        };
        let trace = stick_slip_simulate(&traj, &truth).unwrap();
        let measured = MeasuredTrace::from_wall_force(&trace);
        let report = identify(&measured, &traj).unwrap();
        assert!(report.converged(), "flags at ({k}, {c}): {:?}", report.flags);
        assert!(relative(report.k_tissue, k) < 1e-9, "k̂ = {}", report.k_tissue);
        assert!(relative(report.c_tissue, c) < 1e-9, "ĉ = {}", report.c_tissue);
        assert!(relative(report.tau_ret.unwrap(), tau_ret) < 1e-9);
        assert!(relative(report.tau_adv.unwrap(), tau_adv) < 1e-9);
        assert!(relative(report.mu_k_n.unwrap(), 0.14) < 1e-9);
        // Break detection overshoots by at most one force step.
        assert_abs_diff_eq!(report.mu_s_n.unwrap(), 0.08, epsilon = 2e-3);
        assert!(report.nrmse.unwrap() < 1e-9, "nrmse = {:?}", report.nrmse);
    }
}

#[test]
fn noisy_trace_is_recovered_within_five_percent() {
    let traj = probe_trajectory(30.0, 0.028, TAU * 0.1, 5e-4, 6).unwrap();
    let truth = TISSUE;
    let trace = stick_slip_simulate(&traj, &truth).unwrap();
    let clean = MeasuredTrace::from_wall_force(&trace);
    let scale = clean.f.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let sd = 0.01 * scale;
    // A fixed representative noise realization; the short advance tails
    // (tau_adv = 0.02 s ≈ 40 samples) make that estimate the most fragile,
    // so ensemble-level coverage lives in the acceptance suite instead.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noisy_f: Vec<f64> = clean
        .f
        .iter()
        .map(|&v| {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            v + sd * (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
        })
        .collect();
    let noisy = MeasuredTrace::new(clean.t.clone(), noisy_f, BTreeMap::new()).unwrap();
    let report = identify(&noisy, &traj).unwrap();
    assert!(relative(report.k_tissue, truth.k_tissue) < 0.05);
    assert!(relative(report.c_tissue, truth.c_tissue) < 0.05);
    assert!(relative(report.tau_ret.unwrap(), truth.tau_ret) < 0.05);
    assert!(relative(report.tau_adv.unwrap(), truth.tau_adv) < 0.05);
    assert!(report.nrmse.unwrap() > 0.0);
}

#[test]
fn estimates_are_consistent_under_step_refinement() {
    let profile = CamProfile::harmonic(30.0).unwrap();
    let mut reports = Vec::new();
    for dt in [1e-3, 5e-4] {
        let traj = profile.slider_trajectory_uniform(TAU * 0.1, dt, 0.0, 2).unwrap();
        let trace = stick_slip_simulate(&traj, &TISSUE).unwrap();
        let measured = MeasuredTrace::from_wall_force(&trace);
        reports.push(identify(&measured, &traj).unwrap());
    }
    let (a, b) = (&reports[0], &reports[1]);
    assert!(relative(a.k_tissue, b.k_tissue) < 1e-3);
    assert!(relative(a.c_tissue, b.c_tissue) < 1e-3);
    assert!(relative(a.tau_ret.unwrap(), b.tau_ret.unwrap()) < 1e-3);
    assert!(relative(a.tau_adv.unwrap(), b.tau_adv.unwrap()) < 1e-3);
}

#[test]
fn segmentation_matches_the_simulator_modes() {
    let duty = DutyFractions::new(0.911, 0.085, 0.004).unwrap();
    let profile = CamProfile::synthesize(1, duty, 10.0).unwrap();
    let traj = profile.slider_trajectory_uniform(TAU * 0.1, 1e-3, 0.0, 2).unwrap();
    let trace = stick_slip_simulate(&traj, &TISSUE).unwrap();
    let measured = MeasuredTrace::from_wall_force(&trace);
    let seg = segment_trace(&measured, &traj).unwrap();
    assert!(!seg.stick_runs.is_empty());
    assert!(!seg.slip_tails.is_empty());
    for run in &seg.stick_runs {
        // No simulator slip sample may leak into a grown stick run.
        let contamination = (run.start..run.end)
            .filter(|&i| trace.samples[i].mode == Mode::Slip)
            .count();
        assert_eq!(contamination, 0, "slip samples inside stick run {run:?}");
        assert_ne!(run.phase, Phase::Dwell);
    }
    for tail in &seg.slip_tails {
        let contamination = (tail.start..tail.end)
            .filter(|&i| trace.samples[i].mode == Mode::Stick)
            .count();
        assert_eq!(contamination, 0, "stick samples inside slip tail {tail:?}");
    }
    for &level in &seg.break_levels {
        assert!(level >= TISSUE.mu_s_n - 1e-9, "break level {level} below static limit");
        assert!(level <= TISSUE.mu_s_n + 0.005, "break level {level} too high");
    }
}

#[test]
fn never_breaking_wall_fails_identification_cleanly() {
    // A huge static level keeps the contact stuck forever: there is no slip
    // tail to fit, which must surface as a fit error rather than a bogus fit.
    let profile = CamProfile::harmonic(30.0).unwrap();
    let traj = profile.slider_trajectory_uniform(TAU * 0.1, 1e-3, 0.0, 2).unwrap();
    let stuck = TissueParams { mu_s_n: 1e6, ..TISSUE };
    let trace = stick_slip_simulate(&traj, &stuck).unwrap();
    let measured = MeasuredTrace::from_wall_force(&trace);
    assert!(matches!(identify(&measured, &traj), Err(Error::Fit(_))));
}

#[test]
fn exponential_fit_recovers_synthetic_relaxations() {
    let dt = 5e-4;
    let tau = 0.45;
    let series: Vec<f64> = (0..6000)
        .map(|j| -0.14 + 0.22 * (-(j as f64) * dt / tau).exp())
        .collect();
    let fit = fit_exponential(&series, dt).unwrap();
    assert!(relative(fit.tau, tau) < 1e-9, "τ̂ = {}", fit.tau);
    assert_abs_diff_eq!(fit.f_target, -0.14, epsilon = 1e-9);
    assert_abs_diff_eq!(fit.amplitude, 0.22, epsilon = 1e-6);
    assert!(fit.rmse < 1e-12);
}

#[test]
fn exponential_fit_rejects_degenerate_segments() {
    // Under-resolved: tau comparable to the sample step.
    let dt = 0.05;
    let under: Vec<f64> = (0..40)
        .map(|j| 0.14 - 0.1 * (-(j as f64) * dt / 0.06).exp())
        .collect();
    assert!(matches!(fit_exponential(&under, dt), Err(Error::UnderResolved(_))));
    // Oscillation around the asymptote is not a relaxation.
    let wobble: Vec<f64> = (0..200).map(|j| 0.1 * (j as f64 * 0.3).sin()).collect();
    assert!(fit_exponential(&wobble, 1e-3).is_err());
    // Too short to constrain three parameters.
    assert!(fit_exponential(&[0.1, 0.2, 0.3], 1e-3).is_err());
    assert!(fit_exponential(&under, -1.0).is_err());
}

#[test]
fn nrmse_is_scale_invariant() {
    let reference: Vec<f64> = (0..500).map(|j| (j as f64 * 0.02).sin() * 0.14).collect();
    let model: Vec<f64> = reference.iter().map(|v| v + 1e-3).collect();
    let (_, base) = compare(&model, &reference).unwrap();
    for scale in [1e-6, 1e-3, 1.0, 1e3, 1e6] {
        let m: Vec<f64> = model.iter().map(|v| v * scale).collect();
        let r: Vec<f64> = reference.iter().map(|v| v * scale).collect();
        let (_, scaled) = compare(&m, &r).unwrap();
        assert!(
            (scaled - base).abs() <= 1e-12 * base.max(1.0),
            "nrmse {scaled} vs {base} at scale {scale}"
        );
    }
    // Degenerate flat reference: defined only for a perfect match.
    assert_eq!(compare(&[1.0, 1.0], &[2.0, 2.0]).ok(), None);
    assert_eq!(compare(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), (0.0, 0.0));
    assert!(compare(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn measured_trace_validates_its_time_base() {
    let meta = BTreeMap::new();
    assert!(MeasuredTrace::new(vec![0.0, 0.1], vec![1.0], meta.clone()).is_err());
    assert!(MeasuredTrace::new(vec![0.0], vec![1.0], meta.clone()).is_err());
    assert!(MeasuredTrace::new(vec![0.0, 0.1, 0.1], vec![0.0; 3], meta.clone()).is_err());
    assert!(MeasuredTrace::new(vec![0.0, 0.1, 0.35], vec![0.0; 3], meta.clone()).is_err());
    assert!(MeasuredTrace::new(vec![0.0, f64::NAN], vec![0.0; 2], meta.clone()).is_err());
    let ok = MeasuredTrace::new(vec![0.0, 0.1, 0.2], vec![1.0, 2.0, 3.0], meta).unwrap();
    assert_abs_diff_eq!(ok.dt, 0.1, epsilon = 1e-12);
    assert_eq!(ok.len(), 3);
    assert!(!ok.is_empty());
}

#[test]
fn probe_drive_validates_and_exposes_persistent_excitation() {
    let omega = TAU * 0.1;
    let dt = 5e-4;
    let traj = probe_trajectory(30.0, 0.028, omega, dt, 2).unwrap();
    assert!(traj.uniform);
    let spc = traj.samples_per_cycle.unwrap();
    assert_eq!(spc, 20_000);
    assert_eq!(traj.samples.len(), 2 * spc + 1);
    // Starts at rest on the main stroke, ripple superimposed.
    assert_abs_diff_eq!(traj.samples[0].x, 0.0, epsilon = 1e-12);
    for s in traj.samples.iter().step_by(487) {
        let expected =
            15.0 * (1.0 - (omega * s.t).cos()) + 0.028 * (72.0 * omega * s.t).sin();
        assert_abs_diff_eq!(s.x, expected, epsilon = 1e-9);
    }
    // Invalid setups are refused.
    assert!(probe_trajectory(-1.0, 0.0, omega, dt, 2).is_err());
    assert!(probe_trajectory(30.0, 20.0, omega, dt, 2).is_err());
    assert!(probe_trajectory(30.0, 0.028, omega, 0.3, 2).is_err());
    assert!(probe_trajectory(30.0, 0.028, omega, dt, 0).is_err());
}
