//! Property-based invariants: duty closure, lift periodicity, thrust
//! linearity, lobe invariance, superposition consistency, round-trip closure
//! and determinism.

use std::f64::consts::TAU;

use capsim::cam::{CamProfile, DutyFractions};
use capsim::capsule::{ideal_cycle_stats, superpose, CapsuleConfig, ContactModel};
use capsim::contact::{stick_slip_simulate, SmoothingSpec, TissueParams};
use capsim::identify::{compare, identify, MeasuredTrace};
use capsim::sweep::{run_sweep, RangeSpec, SweepSpec};
use proptest::prelude::*;

/// Feasible duty pair with every stroke and the dwell at least 5% of the
/// cycle, so synthesized segments stay wide enough for every sampling step
/// used below.
fn duty_strategy() -> impl Strategy<Value = DutyFractions> {
    (0.05..0.85f64)
        .prop_flat_map(|d_ret| (Just(d_ret), 0.05..(0.95 - d_ret)))
        .prop_map(|(d_ret, d_adv)| DutyFractions::from_ret_adv(d_ret, d_adv).unwrap())
}

fn ideal_config(n: u32, mu_n: f64) -> CapsuleConfig {
    CapsuleConfig {
        n_sliders: n,
        mu_n,
        f_loss: 0.0,
        smoothing: SmoothingSpec::NONE,
        model: ContactModel::Ideal,
        tissue: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duty_fractions_always_close(duty in duty_strategy()) {
        let sum = duty.d_ret + duty.d_adv + duty.d_dwell;
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!((duty.delta_d() - (duty.d_ret - duty.d_adv)).abs() <= 1e-15);
    }

    #[test]
    fn synthesized_cam_measures_its_own_duty(
        duty in duty_strategy(),
        k in 1u32..=4,
        stroke in 0.5f64..50.0,
        theta in 0.0..TAU,
    ) {
        let profile = CamProfile::synthesize(k, duty, stroke).unwrap();
        let measured = profile.duty_fractions();
        prop_assert!((measured.d_ret - duty.d_ret).abs() <= 1e-9);
        prop_assert!((measured.d_adv - duty.d_adv).abs() <= 1e-9);
        prop_assert!((profile.stroke() - stroke).abs() <= 1e-9 * stroke);
        let h = profile.lift(theta);
        prop_assert!((-1e-9..=stroke + 1e-9).contains(&h));
        prop_assert!((profile.lift(theta + TAU) - h).abs() <= 1e-9 * stroke.max(1.0));
    }

    #[test]
    fn ideal_mean_is_linear_in_duty_asymmetry(
        duty in duty_strategy(),
        k in 1u32..=3,
        n in 3u32..=16,
        mu_n in 0.01f64..2.0,
    ) {
        let profile = CamProfile::synthesize(k, duty, 10.0).unwrap();
        let stats = ideal_cycle_stats(&profile, &ideal_config(n, mu_n)).unwrap();
        prop_assert!(
            (stats.mean_normalized - duty.delta_d()).abs() <= 1e-9,
            "normalized mean {} vs Δd {}", stats.mean_normalized, duty.delta_d()
        );
        prop_assert!(
            (stats.mean - f64::from(n) * mu_n * duty.delta_d()).abs() <= 1e-9 * mu_n * f64::from(n)
        );
    }

    #[test]
    fn swapping_strokes_negates_the_mean(duty in duty_strategy(), k in 1u32..=3) {
        let forward = CamProfile::synthesize(k, duty, 10.0).unwrap();
        let swapped = DutyFractions::new(duty.d_adv, duty.d_ret, duty.d_dwell).unwrap();
        let backward = CamProfile::synthesize(k, swapped, 10.0).unwrap();
        let config = ideal_config(12, 0.14);
        let f = ideal_cycle_stats(&forward, &config).unwrap().mean;
        let b = ideal_cycle_stats(&backward, &config).unwrap().mean;
        prop_assert!((f + b).abs() <= 1e-12, "means {f} and {b} are not opposite");
    }

    #[test]
    fn smoothing_never_moves_the_mean(duty in duty_strategy(), lambda in 0.0f64..=1.0) {
        let profile = CamProfile::synthesize(2, duty, 10.0).unwrap();
        let sharp = ideal_cycle_stats(&profile, &ideal_config(12, 0.14)).unwrap();
        let smoothed = ideal_cycle_stats(
            &profile,
            &CapsuleConfig { smoothing: SmoothingSpec { lambda }, ..ideal_config(12, 0.14) },
        )
        .unwrap();
        prop_assert!((sharp.mean - smoothed.mean).abs() <= 1e-12);
    }

    #[test]
    fn ripple_is_lobe_invariant_with_five_sliders(duty in duty_strategy()) {
        let config = ideal_config(5, 0.14);
        let cov: Vec<f64> = (1u32..=3)
            .map(|k| {
                let profile = CamProfile::synthesize(k, duty, 10.0).unwrap();
                ideal_cycle_stats(&profile, &config).unwrap().ripple_cov.unwrap_or(0.0)
            })
            .collect();
        prop_assert!((cov[0] - cov[1]).abs() <= 1e-6, "k=1 {} vs k=2 {}", cov[0], cov[1]);
        prop_assert!((cov[0] - cov[2]).abs() <= 1e-6, "k=1 {} vs k=3 {}", cov[0], cov[2]);
    }

    #[test]
    fn nrmse_is_invariant_under_rescaling(
        seed in 1u64..1000,
        exponent in -6i32..=6,
    ) {
        let reference: Vec<f64> = (0..200)
            .map(|j| ((j as f64 + seed as f64) * 0.37).sin())
            .collect();
        let model: Vec<f64> = reference.iter().map(|v| v + 0.01).collect();
        let scale = 10f64.powi(exponent);
        let (_, base) = compare(&model, &reference).unwrap();
        let m: Vec<f64> = model.iter().map(|v| v * scale).collect();
        let r: Vec<f64> = reference.iter().map(|v| v * scale).collect();
        let (_, scaled) = compare(&m, &r).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trajectory_samples_lie_on_the_lift_curve(
        duty in duty_strategy(),
        k in 1u32..=4,
        phase in 0.0..TAU,
    ) {
        let profile = CamProfile::synthesize(k, duty, 10.0).unwrap();
        let omega = TAU * 0.1;
        let dt = 1e-3;
        let traj = profile.slider_trajectory_uniform(omega, dt, phase, 2).unwrap();
        prop_assert_eq!(traj.samples_per_cycle, Some(10_000));
        for s in traj.samples.iter().step_by(311) {
            prop_assert!((s.x - profile.lift(s.theta)).abs() <= 1e-12);
            prop_assert!(
                (s.v - omega * profile.slope(s.theta).d_lift_d_theta).abs() <= 1e-12
            );
        }
    }

    #[test]
    fn superposed_waveform_is_the_phase_count_ladder(
        duty in duty_strategy(),
        k in 1u32..=3,
        n in 3u32..=16,
    ) {
        let profile = CamProfile::synthesize(k, duty, 10.0).unwrap();
        let config = ideal_config(n, 0.14);
        let trace = superpose(&profile, &config, TAU * 0.5, 2e-4, 2).unwrap();
        for s in trace.samples.iter().step_by(173) {
            prop_assert!(s.n_ret + s.n_adv <= n);
            let expected = 0.14 * (f64::from(s.n_ret) - f64::from(s.n_adv));
            prop_assert!((s.f_capsule_n - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn sweeps_are_run_to_run_deterministic(
        start in 0.3f64..0.5,
        k in 1u32..=3,
    ) {
        let spec = SweepSpec {
            d_ret: RangeSpec::new(start, start + 0.4, 0.1).unwrap(),
            d_adv: RangeSpec::new(0.05, 0.15, 0.05).unwrap(),
            k_values: vec![k],
            n_values: vec![5, 12],
            ..SweepSpec::default()
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        prop_assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert_eq!(x.mean_thrust_n.to_bits(), y.mean_thrust_n.to_bits());
            prop_assert_eq!(x.mean_normalized.to_bits(), y.mean_normalized.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn noise_free_round_trip_closes_within_one_percent(
        k_tissue in 50.0f64..500.0,
        c_tissue in 1.0f64..20.0,
        tau_ret in 0.01f64..1.0,
        tau_adv in 0.01f64..1.0,
    ) {
        let truth = TissueParams {
            k_tissue,
            c_tissue,
            mu_s_n: 0.08,
            mu_k_n: 0.14,
            tau_ret,
            tau_adv,
        };
        let profile = CamProfile::harmonic(30.0).unwrap();
        let traj = profile.slider_trajectory_uniform(TAU * 0.1, 1e-3, 0.0, 2).unwrap();
        let trace = stick_slip_simulate(&traj, &truth).unwrap();
        let measured = MeasuredTrace::from_wall_force(&trace);
        let report = identify(&measured, &traj).unwrap();
        let rel = |e: f64, t: f64| ((e - t) / t).abs();
        prop_assert!(rel(report.k_tissue, k_tissue) <= 0.01);
        prop_assert!(rel(report.c_tissue, c_tissue) <= 0.01);
        prop_assert!(rel(report.tau_ret.unwrap(), tau_ret) <= 0.01);
        prop_assert!(rel(report.tau_adv.unwrap(), tau_adv) <= 0.01);
        prop_assert!(report.nrmse.unwrap() < 1e-6);
    }
}
