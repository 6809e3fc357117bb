//! Slider–wall contact models.
//!
//! Two traction models share the same sign convention (thrust on the capsule
//! is forward-positive, so a retracting slider produces positive force):
//!
//! - **Ideal Coulomb traction**: `F = μN·sign(−dh/dθ)`, a rate-independent
//!   square wave in θ taking values `+μN` (retract), `−μN` (advance) and `0`
//!   (dwell), optionally smoothed by linear ramps around each reversal.
//! - **Stick–slip viscoelastic wall**: the wall contact point `x_wall` carries
//!   a Kelvin–Voigt element `F_wall = k·x_wall + c·v_wall`. While sticking the
//!   wall follows the slider until `|F_wall|` reaches the static break level
//!   `μ_sN`; while slipping, force and wall position relax exponentially
//!   toward the kinetic limit `μ_kN·sgn(v_slider)` with a phase-dependent time
//!   constant (τ_ret when retracting, τ_adv when advancing), and the contact
//!   re-sticks when `|F_wall| < |k·x_wall|`.
//!
//! The slip target is driven by the slider velocity (its last nonzero sign,
//! held through dwells), not by the wall's own velocity: the slider is the
//! external drive, and a target slaved to the wall's own motion would make the
//! slip dynamics autonomous — the force would converge to one kinetic limit
//! and stay there, never re-sticking, which contradicts both the stick–slip
//! cycling this model exists to reproduce and the re-stick rule below.
//!
//! Wall state is tracked in mm (with explicit mm→m conversion inside the
//! force laws, which keeps the exported trace free of unit round-trips);
//! forces are N throughout.
//!
//! Under `μ_s < μ_k` the literal re-stick rule produces a bounded one-sample
//! stick/slip alternation ("chatter") while a stretched contact unloads after
//! a stroke reversal with `|F_wall|` still above the break level. It is
//! deterministic and decays at the relaxation rate; identification treats it
//! as part of the slip complement.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::cam::{wrap_angle, SignJump, SliderTrajectory};
use crate::{Error, Result};

/// mm → m.
const MM: f64 = 1e-3;

/// Identified wall (substrate) parameters. All strictly positive; no ordering
/// is imposed between the static and kinetic friction levels — they are
/// independent identified quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TissueParams {
    /// Wall stiffness k (N/m).
    pub k_tissue: f64,
    /// Wall damping c (N·s/m).
    pub c_tissue: f64,
    /// Static break level μ_sN (N).
    pub mu_s_n: f64,
    /// Kinetic friction limit μ_kN (N).
    pub mu_k_n: f64,
    /// Relaxation time during retraction (s).
    pub tau_ret: f64,
    /// Relaxation time during advance (s).
    pub tau_adv: f64,
}

impl TissueParams {
    /// Validates that every parameter is finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_tissue", self.k_tissue),
            ("c_tissue", self.c_tissue),
            ("mu_s_n", self.mu_s_n),
            ("mu_k_n", self.mu_k_n),
            ("tau_ret", self.tau_ret),
            ("tau_adv", self.tau_adv),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!(
                    "tissue parameter {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Reversal smoothing for the ideal traction model.
///
/// `lambda = 0` keeps instantaneous force reversals; `lambda > 0` replaces
/// each reversal with a linear ramp of angular width `λ·2π/k` (k = jump
/// count), clamped symmetrically so neighboring ramps never overlap. Ramps
/// stay centered on the reversal, which preserves the cycle mean exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSpec {
    /// Ramp width as a fraction of the cell width, in `[0, 1]`.
    pub lambda: f64,
}

impl SmoothingSpec {
    /// No smoothing.
    pub const NONE: SmoothingSpec = SmoothingSpec { lambda: 0.0 };

    /// Validates `lambda ∈ [0, 1]`.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && (0.0..=1.0).contains(&self.lambda)) {
            return Err(Error::validation(format!(
                "smoothing lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        Self::NONE
    }
}

/// Contact mode of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Wall follows the slider; force from the Kelvin–Voigt element.
    Stick,
    /// Wall relaxes toward the kinetic friction limit.
    Slip,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Stick => "stick",
            Mode::Slip => "slip",
        })
    }
}

/// One sample of a stick–slip simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSample {
    /// Time (s).
    pub t: f64,
    /// Contact mode used to compute this sample.
    pub mode: Mode,
    /// Wall contact-point displacement (mm).
    pub x_wall_mm: f64,
    /// Wall contact-point velocity (mm/s).
    pub v_wall_mm_s: f64,
    /// Kelvin–Voigt wall force (N); negative while the wall is dragged backward.
    pub f_wall_n: f64,
    /// Thrust transmitted to the capsule (N): `−F_wall` in stick, saturated at
    /// `±μ_kN` in slip.
    pub f_slider_n: f64,
    /// Elastic part of the wall force, `k·x_wall` (N).
    pub f_elastic_n: f64,
}

/// Output of [`stick_slip_simulate`]: uniformly sampled contact history.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactTrace {
    /// Time step (s).
    pub dt: f64,
    /// Samples per cam cycle.
    pub samples_per_cycle: usize,
    /// Parameters the trace was generated with.
    pub params: TissueParams,
    /// The samples, ascending in time.
    pub samples: Vec<ContactSample>,
}

impl ContactTrace {
    /// Index range of the last full cycle, `[t_end − T, t_end)`.
    ///
    /// The first cycle is a transient from the unstretched initial state, so
    /// cycle statistics should be taken here.
    pub fn steady_cycle_range(&self) -> Result<std::ops::Range<usize>> {
        let n = self.samples.len();
        if n < 2 * self.samples_per_cycle + 1 {
            return Err(Error::validation(
                "trace too short for steady-state statistics: need at least two cycles",
            ));
        }
        Ok(n - 1 - self.samples_per_cycle..n - 1)
    }
}

/// Options for [`stick_slip_simulate_opts`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Select τ by the raw sign test `v_slider ≥ 0 → τ_ret` instead of the
    /// default phase mapping (retract stroke → τ_ret, advance stroke → τ_adv).
    /// Under forward-positive lift the raw test inverts the phase attribution;
    /// it is kept for compatibility experiments.
    pub literal_tau_sign: bool,
}

/// Kelvin–Voigt wall force for a given wall state (mm, mm/s → N).
#[must_use]
pub fn stick_force(x_wall_mm: f64, v_wall_mm_s: f64, params: &TissueParams) -> f64 {
    params.k_tissue * (x_wall_mm * MM) + params.c_tissue * (v_wall_mm_s * MM)
}

/// Ideal Coulomb traction along a trajectory: `F = μN·sign(−dh/dθ)` with
/// optional reversal smoothing. Returns one force value (N) per sample.
pub fn ideal_slider_force(
    traj: &SliderTrajectory,
    mu_n: f64,
    smoothing: SmoothingSpec,
) -> Result<Vec<f64>> {
    if !(mu_n.is_finite() && mu_n > 0.0) {
        return Err(Error::validation(format!("mu_n must be positive, got {mu_n}")));
    }
    smoothing.validate()?;
    let wave = ForceWave::new(&traj.sign_jumps, traj.jump_count, mu_n, smoothing.lambda)?;
    Ok(traj.samples.iter().map(|s| wave.eval(s.theta)).collect())
}

/// Simulates stick–slip wall contact along a uniformly sampled trajectory
/// with default options. Initial state: stick, unstretched wall.
pub fn stick_slip_simulate(traj: &SliderTrajectory, params: &TissueParams) -> Result<ContactTrace> {
    stick_slip_simulate_opts(traj, params, SimOptions::default())
}

/// [`stick_slip_simulate`] with explicit [`SimOptions`].
pub fn stick_slip_simulate_opts(
    traj: &SliderTrajectory,
    params: &TissueParams,
    opts: SimOptions,
) -> Result<ContactTrace> {
    params.validate()?;
    if !traj.uniform {
        return Err(Error::validation(
            "stick-slip simulation requires a uniformly sampled trajectory \
             (use slider_trajectory_uniform)",
        ));
    }
    let spc = traj.samples_per_cycle.ok_or_else(|| {
        Error::validation("uniform trajectory is missing its samples-per-cycle count")
    })?;
    if traj.samples.len() < 2 {
        return Err(Error::validation("trajectory needs at least two samples"));
    }
    for s in &traj.samples {
        if !(s.t.is_finite() && s.x.is_finite() && s.v.is_finite()) {
            return Err(Error::validation("trajectory contains non-finite samples"));
        }
    }
    let dt = traj.dt;
    let k = params.k_tissue;

    let mut samples = Vec::with_capacity(traj.samples.len());
    samples.push(ContactSample {
        t: traj.samples[0].t,
        mode: Mode::Stick,
        x_wall_mm: 0.0,
        v_wall_mm_s: 0.0,
        f_wall_n: 0.0,
        f_slider_n: 0.0,
        f_elastic_n: 0.0,
    });

    let mut mode = Mode::Stick;
    let mut x_w = 0.0f64; // mm
    let mut f_w = 0.0f64; // N
    let mut sgn_hold = 0.0f64; // last nonzero slider-velocity sign

    for i in 1..traj.samples.len() {
        let dx_s = traj.samples[i].x - traj.samples[i - 1].x; // mm
        let v_s = dx_s / dt; // mm/s
        if v_s != 0.0 {
            sgn_hold = if v_s > 0.0 { 1.0 } else { -1.0 };
        }
        let tau = if opts.literal_tau_sign {
            if v_s >= 0.0 { params.tau_ret } else { params.tau_adv }
        } else if v_s > 0.0 {
            params.tau_adv
        } else {
            params.tau_ret
        };
        let alpha = 1.0 - (-dt / tau).exp();

        let sample_mode = mode;
        let (x_w_new, v_w_new, f_w_new, f_slider);
        match mode {
            Mode::Stick => {
                x_w_new = x_w + dx_s;
                v_w_new = dx_s / dt;
                f_w_new = stick_force(x_w_new, v_w_new, params);
                f_slider = -f_w_new;
                if f_w_new.abs() >= params.mu_s_n {
                    mode = Mode::Slip;
                }
            }
            Mode::Slip => {
                let f_target = params.mu_k_n * sgn_hold;
                f_w_new = f_w + alpha * (f_target - f_w);
                let x_target = f_w_new / k / MM; // mm
                x_w_new = x_w + alpha * (x_target - x_w);
                v_w_new = (x_w_new - x_w) / dt;
                f_slider = -f_target;
                if f_w_new.abs() < (k * (x_w_new * MM)).abs() {
                    mode = Mode::Stick;
                }
            }
        }
        samples.push(ContactSample {
            t: traj.samples[i].t,
            mode: sample_mode,
            x_wall_mm: x_w_new,
            v_wall_mm_s: v_w_new,
            f_wall_n: f_w_new,
            f_slider_n: f_slider,
            f_elastic_n: k * (x_w_new * MM),
        });
        x_w = x_w_new;
        f_w = f_w_new;
    }

    Ok(ContactTrace { dt, samples_per_cycle: spc, params: *params, samples })
}

/// Cycle average of a uniformly sampled force series minus a constant
/// mechanism loss. The series must cover an integer number of cycles
/// (`len % samples_per_cycle == 0`), e.g. a trace slice with the duplicated
/// cycle-end sample dropped.
pub fn single_slider_cycle_average(
    series: &[f64],
    samples_per_cycle: usize,
    f_loss: f64,
) -> Result<f64> {
    if samples_per_cycle == 0 {
        return Err(Error::validation("samples_per_cycle must be positive"));
    }
    if series.is_empty() || series.len() % samples_per_cycle != 0 {
        return Err(Error::validation(format!(
            "series length {} does not cover an integer number of cycles of {} samples",
            series.len(),
            samples_per_cycle
        )));
    }
    if !(f_loss.is_finite() && f_loss >= 0.0) {
        return Err(Error::validation(format!("f_loss must be non-negative, got {f_loss}")));
    }
    let sum: f64 = series.iter().sum();
    Ok(sum / series.len() as f64 - f_loss)
}

/// Geometry of one smoothed thrust-sign discontinuity.
#[derive(Debug, Clone, Copy)]
struct JumpGeom {
    center: f64,
    half_width: f64,
    before: f64,
    after: f64,
}

/// The ideal single-slider traction waveform `F(θ)` as an exactly evaluable
/// piecewise function: plateaus at `±μN`/`0` with optional linear ramps
/// centered on each sign discontinuity.
#[derive(Debug, Clone)]
pub(crate) struct ForceWave {
    jumps: Vec<JumpGeom>,
    smoothed: bool,
}

impl ForceWave {
    pub(crate) fn new(
        sign_jumps: &[SignJump],
        jump_count: u32,
        mu_n: f64,
        lambda: f64,
    ) -> Result<Self> {
        if sign_jumps.is_empty() {
            return Err(Error::validation("profile has no thrust-sign discontinuities"));
        }
        let n = sign_jumps.len();
        let full = lambda * TAU / f64::from(jump_count.max(1));
        let jumps: Vec<JumpGeom> = (0..n)
            .map(|i| {
                let j = &sign_jumps[i];
                let prev = &sign_jumps[(i + n - 1) % n];
                let next = &sign_jumps[(i + 1) % n];
                let gap_prev = if n == 1 { TAU } else { circ_gap(prev.theta, j.theta) };
                let gap_next = if n == 1 { TAU } else { circ_gap(j.theta, next.theta) };
                let width = full.min(gap_prev).min(gap_next);
                JumpGeom {
                    center: j.theta,
                    half_width: 0.5 * width,
                    before: f64::from(j.before) * mu_n,
                    after: f64::from(j.after) * mu_n,
                }
            })
            .collect();
        Ok(ForceWave { jumps, smoothed: lambda > 0.0 })
    }

    /// True when the waveform is continuous piecewise-linear (λ > 0); false
    /// when it is piecewise-constant with jumps (λ = 0).
    pub(crate) fn is_smoothed(&self) -> bool {
        self.smoothed
    }

    /// All angles where the waveform changes analytic form, wrapped
    /// into `[0, 2π)`: ramp edges for λ > 0, jump centers for λ = 0.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.jumps.len());
        for j in &self.jumps {
            if self.smoothed && j.half_width > 0.0 {
                out.push(wrap_angle(j.center - j.half_width));
                out.push(wrap_angle(j.center + j.half_width));
            } else {
                out.push(j.center);
            }
        }
        out
    }

    /// Waveform value at θ. Right-continuous across unsmoothed jumps.
    pub(crate) fn eval(&self, theta: f64) -> f64 {
        let th = wrap_angle(theta);
        let n = self.jumps.len();
        let i = match self.jumps.partition_point(|j| j.center <= th) {
            0 => n - 1,
            i => i - 1,
        };
        let p = &self.jumps[i];
        let d_p = wrap_angle(th - p.center);
        if d_p < p.half_width {
            // Right half of the ramp centered on p.
            let mid = 0.5 * (p.before + p.after);
            return mid + 0.5 * (p.after - p.before) * (d_p / p.half_width);
        }
        let q = &self.jumps[(i + 1) % n];
        let d_q = wrap_angle(q.center - th);
        if d_q <= q.half_width && q.half_width > 0.0 {
            // Left half of the ramp centered on q.
            let mid = 0.5 * (q.before + q.after);
            return mid - 0.5 * (q.after - q.before) * (d_q / q.half_width);
        }
        p.after
    }
}

/// Forward circular distance from `a` to `b`, in `(0, 2π]`.
fn circ_gap(a: f64, b: f64) -> f64 {
    let d = wrap_angle(b - a);
    if d == 0.0 {
        TAU
    } else {
        d
    }
}
