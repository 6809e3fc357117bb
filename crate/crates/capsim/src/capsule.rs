//! Multi-slider thrust superposition and cycle statistics.
//!
//! A capsule with `n` sliders drives them from one cam with phase offsets
//! `2π(i−1)/n`, so the capsule thrust at cam angle θ is the sum of one
//! single-slider waveform evaluated at `θ − 2π(i−1)/n`, minus a constant
//! per-slider mechanism loss. For the ideal Coulomb model the cycle mean and
//! ripple are computed by exact piecewise integration of that superposition
//! (the waveform is piecewise constant or piecewise linear, so means and
//! second moments have closed forms per interval); for the viscoelastic model
//! every slider is simulated independently and summed sample-wise, with
//! statistics taken over the last simulated cycle.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::cam::{wrap_angle, CamProfile, DutyFractions};
use crate::contact::{stick_slip_simulate, ForceWave, SmoothingSpec, TissueParams};
use crate::{Error, Result};

/// Cycle means below this magnitude (N) make the ripple coefficient undefined.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Which contact model drives each slider.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactModel {
    /// Rate-independent Coulomb traction `μN·sign(−dh/dθ)`.
    #[default]
    Ideal,
    /// Stick–slip Kelvin–Voigt wall contact.
    Viscoelastic,
}

/// Capsule-level configuration shared by superposition and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapsuleConfig {
    /// Number of sliders (≥ 3).
    pub n_sliders: u32,
    /// Coulomb traction limit per slider, μN (N).
    pub mu_n: f64,
    /// Constant per-slider mechanism loss (N, ≥ 0).
    pub f_loss: f64,
    /// Reversal smoothing for the ideal model.
    pub smoothing: SmoothingSpec,
    /// Contact model.
    pub model: ContactModel,
    /// Wall parameters; required by the viscoelastic model.
    pub tissue: Option<TissueParams>,
}

impl CapsuleConfig {
    /// Validates slider count, force limits, smoothing, and that the
    /// viscoelastic model has wall parameters.
    pub fn validate(&self) -> Result<()> {
        if self.n_sliders < 3 {
            return Err(Error::validation(format!(
                "capsules need at least 3 sliders, got {}",
                self.n_sliders
            )));
        }
        if !(self.mu_n.is_finite() && self.mu_n > 0.0) {
            return Err(Error::validation(format!("mu_n must be positive, got {}", self.mu_n)));
        }
        if !(self.f_loss.is_finite() && self.f_loss >= 0.0) {
            return Err(Error::validation(format!(
                "f_loss must be non-negative, got {}",
                self.f_loss
            )));
        }
        self.smoothing.validate()?;
        match self.model {
            ContactModel::Viscoelastic => match &self.tissue {
                Some(t) => t.validate(),
                None => Err(Error::validation(
                    "viscoelastic model requires tissue parameters",
                )),
            },
            ContactModel::Ideal => Ok(()),
        }
    }
}

/// One sample of the capsule thrust waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustSample {
    /// Cam angle (rad) in `[0, 2π)`.
    pub theta: f64,
    /// Capsule thrust (N), mechanism loss already subtracted.
    pub f_capsule_n: f64,
    /// Thrust normalized by `n·μN`.
    pub f_norm: f64,
    /// Number of sliders currently in their retract stroke.
    pub n_ret: u32,
    /// Number of sliders currently in their advance stroke.
    pub n_adv: u32,
}

/// Capsule thrust over one steady-state cycle with its cycle statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustTrace {
    /// Samples over one cycle, ascending in θ (ideal) or time order (viscoelastic).
    pub samples: Vec<ThrustSample>,
    /// Cycle-averaged thrust (N). Exact for the ideal model.
    pub mean: f64,
    /// `mean / (n·μN)`.
    pub mean_normalized: f64,
    /// Ripple = cycle standard deviation / cycle mean; `None` when the mean is
    /// zero within [`ZERO_MEAN_TOL`].
    pub ripple_cov: Option<f64>,
    /// Duty fractions of the driving profile.
    pub duty: DutyFractions,
    /// Configuration echo.
    pub config: CapsuleConfig,
    /// Shaft speed (rad/s).
    pub omega: f64,
    /// Sampling step (s).
    pub dt: f64,
}

/// A thrust trace rescaled to dimensionless axes.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedThrust {
    /// Samples `(θ/2π, F/(n·μN))`.
    pub samples: Vec<(f64, f64)>,
    /// Normalized cycle mean; equals `Δd` minus normalized loss for the ideal model.
    pub mean_normalized: f64,
    /// Ripple coefficient (scale invariant, unchanged by normalization).
    pub ripple_cov: Option<f64>,
}

/// Cycle statistics of a capsule thrust waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleStats {
    /// Cycle-averaged thrust (N).
    pub mean: f64,
    /// `mean / (n·μN)`.
    pub mean_normalized: f64,
    /// Ripple = cycle standard deviation / cycle mean; `None` when the mean is
    /// zero within [`ZERO_MEAN_TOL`].
    pub ripple_cov: Option<f64>,
}

/// Exact cycle statistics of the ideal capsule waveform, computed purely in
/// the angle domain.
///
/// The ideal Coulomb model is rate-independent — its waveform is a function of
/// θ alone — so no shaft speed or time step enters. The mean and ripple are
/// exact piecewise integrals over the union of all sliders' breakpoints, which
/// makes this the cheap path for design sweeps.
pub fn ideal_cycle_stats(profile: &CamProfile, config: &CapsuleConfig) -> Result<CycleStats> {
    config.validate()?;
    if config.model != ContactModel::Ideal {
        return Err(Error::validation(
            "angle-domain cycle statistics exist only for the ideal model",
        ));
    }
    let wave = ForceWave::new(
        &profile.sign_jumps(),
        profile.jump_count(),
        config.mu_n,
        config.smoothing.lambda,
    )?;
    let (grid, eval_capsule) = capsule_waveform(&wave, config);
    let (mean, std) = integrate_cycle(&grid, wave.is_smoothed(), &eval_capsule);
    let mean_normalized = mean / (f64::from(config.n_sliders) * config.mu_n);
    let ripple_cov = if mean.abs() < ZERO_MEAN_TOL { None } else { Some(std / mean) };
    Ok(CycleStats { mean, mean_normalized, ripple_cov })
}

/// The superposed capsule waveform evaluator and the sorted union of every
/// slider's waveform breakpoints (between consecutive grid angles the capsule
/// waveform is a single constant or linear piece).
fn capsule_waveform<'a>(
    wave: &'a ForceWave,
    config: &CapsuleConfig,
) -> (Vec<f64>, impl Fn(f64) -> f64 + 'a) {
    let offsets = slider_offsets(config.n_sliders);
    let shift = f64::from(config.n_sliders) * config.f_loss;
    let mut grid: Vec<f64> = Vec::new();
    for &phi in &offsets {
        for &bp in &wave.breakpoints() {
            grid.push(wrap_angle(bp + phi));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let eval =
        move |theta: f64| offsets.iter().map(|&phi| wave.eval(theta - phi)).sum::<f64>() - shift;
    (grid, eval)
}

/// Superposes `n` phase-shifted sliders into a capsule thrust trace.
///
/// Requires `n_cycles ≥ 2` so the statistics window (the last full cycle) is
/// preceded by at least one discarded transient cycle.
pub fn superpose(
    profile: &CamProfile,
    config: &CapsuleConfig,
    omega: f64,
    dt: f64,
    n_cycles: u32,
) -> Result<ThrustTrace> {
    config.validate()?;
    if n_cycles < 2 {
        return Err(Error::validation(
            "superposition needs n_cycles >= 2: the first cycle is a transient",
        ));
    }
    profile.check_sampling(omega, dt, 0.0, n_cycles)?;
    match config.model {
        ContactModel::Ideal => superpose_ideal(profile, config, omega, dt),
        ContactModel::Viscoelastic => superpose_viscoelastic(profile, config, omega, dt, n_cycles),
    }
}

fn slider_offsets(n: u32) -> Vec<f64> {
    (0..n).map(|i| TAU * f64::from(i) / f64::from(n)).collect()
}

fn superpose_ideal(
    profile: &CamProfile,
    config: &CapsuleConfig,
    omega: f64,
    dt: f64,
) -> Result<ThrustTrace> {
    let n = config.n_sliders;
    let wave = ForceWave::new(
        &profile.sign_jumps(),
        profile.jump_count(),
        config.mu_n,
        config.smoothing.lambda,
    )?;
    let (grid, eval_capsule) = capsule_waveform(&wave, config);
    let (mean, std) = integrate_cycle(&grid, wave.is_smoothed(), &eval_capsule);
    let mean_normalized = mean / (f64::from(n) * config.mu_n);
    let ripple_cov = if mean.abs() < ZERO_MEAN_TOL { None } else { Some(std / mean) };

    // Export samples: a uniform θ grid from dt merged with the breakpoints.
    let per_cycle = (TAU / (omega * dt)).round().max(1.0) as usize;
    let mut thetas: Vec<f64> = (0..per_cycle).map(|j| TAU * j as f64 / per_cycle as f64).collect();
    thetas.extend_from_slice(&grid);
    thetas.sort_by(f64::total_cmp);
    thetas.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let samples = thetas
        .into_iter()
        .map(|theta| {
            let f = eval_capsule(theta);
            let (n_ret, n_adv) = phase_counts(profile, n, theta);
            ThrustSample {
                theta,
                f_capsule_n: f,
                f_norm: f / (f64::from(n) * config.mu_n),
                n_ret,
                n_adv,
            }
        })
        .collect();

    Ok(ThrustTrace {
        samples,
        mean,
        mean_normalized,
        ripple_cov,
        duty: profile.duty_fractions(),
        config: *config,
        omega,
        dt,
    })
}

/// Exact cycle mean and standard deviation of a piecewise waveform given the
/// sorted grid of its breakpoints. Piecewise-constant waveforms (λ = 0) are
/// integrated by midpoint values; continuous piecewise-linear ones by the
/// trapezoid mean and the exact second moment `w·(l² + l·r + r²)/3`.
fn integrate_cycle(grid: &[f64], smoothed: bool, eval: &dyn Fn(f64) -> f64) -> (f64, f64) {
    debug_assert!(!grid.is_empty());
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let n = grid.len();
    for i in 0..n {
        let a = grid[i];
        let b = if i + 1 < n { grid[i + 1] } else { grid[0] + TAU };
        let w = b - a;
        if w <= 0.0 {
            continue;
        }
        if smoothed {
            let l = eval(a);
            let r = eval(b);
            mean += w * 0.5 * (l + r);
            m2 += w * (l * l + l * r + r * r) / 3.0;
        } else {
            let v = eval(a + 0.5 * w);
            mean += w * v;
            m2 += w * v * v;
        }
    }
    mean /= TAU;
    m2 /= TAU;
    let var = (m2 - mean * mean).max(0.0);
    (mean, var.sqrt())
}

fn superpose_viscoelastic(
    profile: &CamProfile,
    config: &CapsuleConfig,
    omega: f64,
    dt: f64,
    n_cycles: u32,
) -> Result<ThrustTrace> {
    let n = config.n_sliders;
    let tissue = config.tissue.as_ref().expect("validated");
    let offsets = slider_offsets(n);
    let mut traces = Vec::with_capacity(n as usize);
    for &phi in &offsets {
        let traj = profile.slider_trajectory_uniform(omega, dt, -phi, n_cycles)?;
        traces.push(stick_slip_simulate(&traj, tissue)?);
    }
    let spc = traces[0].samples_per_cycle;
    let total = traces[0].samples.len();
    let range = total - 1 - spc..total - 1; // last full cycle, [t_end − T, t_end)
    let shift = f64::from(n) * config.f_loss;

    let mut samples = Vec::with_capacity(spc);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for j in range {
        let t = traces[0].samples[j].t;
        let theta = wrap_angle(omega * t);
        let f: f64 =
            traces.iter().map(|tr| tr.samples[j].f_slider_n).sum::<f64>() - shift;
        sum += f;
        sum_sq += f * f;
        let (n_ret, n_adv) = phase_counts(profile, n, theta);
        samples.push(ThrustSample {
            theta,
            f_capsule_n: f,
            f_norm: f / (f64::from(n) * config.mu_n),
            n_ret,
            n_adv,
        });
    }
    let count = samples.len() as f64;
    let mean = sum / count;
    let var = (sum_sq / count - mean * mean).max(0.0);
    let std = var.sqrt();
    let mean_normalized = mean / (f64::from(n) * config.mu_n);
    let ripple_cov = if mean.abs() < ZERO_MEAN_TOL { None } else { Some(std / mean) };

    Ok(ThrustTrace {
        samples,
        mean,
        mean_normalized,
        ripple_cov,
        duty: profile.duty_fractions(),
        config: *config,
        omega,
        dt,
    })
}

/// Counts the sliders in retract and advance strokes at cam angle θ.
///
/// Slider `i` (zero-based) sees the profile at `θ − 2πi/n`; dwelling sliders
/// are counted by neither total, so `n_ret + n_adv ≤ n`.
#[must_use]
pub fn phase_counts(profile: &CamProfile, n_sliders: u32, theta: f64) -> (u32, u32) {
    let mut n_ret = 0;
    let mut n_adv = 0;
    for phi in slider_offsets(n_sliders) {
        match profile.thrust_sign(theta - phi) {
            1 => n_ret += 1,
            -1 => n_adv += 1,
            _ => {}
        }
    }
    (n_ret, n_adv)
}

/// Closed-form cycle-averaged capsule thrust with independent phase forces:
/// `n·(F_ret·d_ret − F_adv·d_adv − F_loss)`. With `F_ret = F_adv = μN` this
/// reduces to `n·(μN·(d_ret − d_adv) − F_loss)`.
#[must_use]
pub fn cycle_average_closed_form(
    n_sliders: u32,
    f_ret: f64,
    f_adv: f64,
    duty: &DutyFractions,
    f_loss: f64,
) -> f64 {
    f64::from(n_sliders) * (f_ret * duty.d_ret - f_adv * duty.d_adv - f_loss)
}

/// Ripple (coefficient of variation) of a thrust trace over its cycle.
///
/// Errors when the cycle mean is zero within [`ZERO_MEAN_TOL`], where the
/// coefficient is undefined.
pub fn ripple_cov(trace: &ThrustTrace) -> Result<f64> {
    trace.ripple_cov.ok_or(Error::ZeroMeanRipple(ZERO_MEAN_TOL))
}

/// Ripple of a plain uniformly sampled periodic series covering whole cycles:
/// population standard deviation divided by mean.
pub fn ripple_cov_uniform(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::validation("ripple of an empty series is undefined"));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    if mean.abs() < ZERO_MEAN_TOL {
        return Err(Error::ZeroMeanRipple(ZERO_MEAN_TOL));
    }
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// Rescales a trace to dimensionless axes `(θ/2π, F/(n·μN))`.
pub fn nondimensionalize(trace: &ThrustTrace, config: &CapsuleConfig) -> Result<NormalizedThrust> {
    config.validate()?;
    let scale = f64::from(config.n_sliders) * config.mu_n;
    Ok(NormalizedThrust {
        samples: trace.samples.iter().map(|s| (s.theta / TAU, s.f_capsule_n / scale)).collect(),
        mean_normalized: trace.mean / scale,
        ripple_cov: trace.ripple_cov,
    })
}
