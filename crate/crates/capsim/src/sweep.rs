//! Design-space exploration over cam duty fractions, lobe counts and slider
//! counts.
//!
//! A sweep evaluates the capsule thrust statistics (cycle mean, normalized
//! mean, ripple) on a rectangular grid of retract/advance duty fractions
//! crossed with lists of lobe counts `k` and slider counts `n`. Rows are
//! emitted in lexicographic order `(d_ret, d_adv, k, n)`; infeasible
//! combinations (duty fractions exceeding the cycle, segments too narrow for
//! the time step) are skipped and logged at debug level. Evaluation is
//! parallelized with rayon; the order-preserving collect keeps the output
//! byte-identical regardless of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cam::{CamProfile, DutyFractions};
use crate::capsule::{ideal_cycle_stats, superpose, CapsuleConfig, ContactModel, CycleStats};
use crate::contact::{SmoothingSpec, TissueParams};
use crate::{Error, Result};

/// Inclusive arithmetic range `start, start+step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    /// First value.
    pub start: f64,
    /// Last value (included when `start + i·step` lands on it within 1e-9·step).
    pub stop: f64,
    /// Step between values, > 0.
    pub step: f64,
}

impl RangeSpec {
    /// Builds a validated range.
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let r = RangeSpec { start, stop, step };
        r.validate()?;
        Ok(r)
    }

    /// Checks finiteness and ordering.
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::validation("range bounds must be finite"));
        }
        if self.step <= 0.0 {
            return Err(Error::validation(format!("range step must be > 0, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(Error::validation(format!(
                "range stop {} is below start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    /// Materializes the values.
    #[must_use]
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn default_duty_range() -> RangeSpec {
    RangeSpec { start: 0.02, stop: 0.96, step: 0.02 }
}

fn default_k_values() -> Vec<u32> {
    vec![1, 2, 3]
}

fn default_n_values() -> Vec<u32> {
    vec![12]
}

fn default_stroke_mm() -> f64 {
    10.0
}

fn default_mu_n() -> f64 {
    0.14
}

fn default_omega() -> f64 {
    std::f64::consts::TAU * 0.5
}

fn default_dt() -> f64 {
    1e-3
}

fn default_n_cycles() -> u32 {
    2
}

/// Full description of a design-space sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Retract duty fraction grid.
    #[serde(default = "default_duty_range")]
    pub d_ret: RangeSpec,
    /// Advance duty fraction grid.
    #[serde(default = "default_duty_range")]
    pub d_adv: RangeSpec,
    /// Lobe counts to evaluate.
    #[serde(default = "default_k_values")]
    pub k_values: Vec<u32>,
    /// Slider counts to evaluate.
    #[serde(default = "default_n_values")]
    pub n_values: Vec<u32>,
    /// Cam stroke (mm).
    #[serde(default = "default_stroke_mm")]
    pub stroke_mm: f64,
    /// Normal traction magnitude μN per slider (N).
    #[serde(default = "default_mu_n")]
    pub mu_n: f64,
    /// Per-slider parasitic loss (N).
    #[serde(default)]
    pub f_loss: f64,
    /// Transition smoothing fraction λ of the cell width.
    #[serde(default)]
    pub lambda: f64,
    /// Contact model to evaluate.
    #[serde(default)]
    pub model: ContactModel,
    /// Wall parameters, required for the viscoelastic model.
    #[serde(default)]
    pub tissue: Option<TissueParams>,
    /// Cam angular velocity (rad/s).
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Time step (s).
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Simulated cycles (statistics use the last one).
    #[serde(default = "default_n_cycles")]
    pub n_cycles: u32,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            d_ret: default_duty_range(),
            d_adv: default_duty_range(),
            k_values: default_k_values(),
            n_values: default_n_values(),
            stroke_mm: default_stroke_mm(),
            mu_n: default_mu_n(),
            f_loss: 0.0,
            lambda: 0.0,
            model: ContactModel::Ideal,
            tissue: None,
            omega: default_omega(),
            dt: default_dt(),
            n_cycles: default_n_cycles(),
        }
    }
}

impl SweepSpec {
    /// Validates ranges and model parameters.
    pub fn validate(&self) -> Result<()> {
        self.d_ret.validate()?;
        self.d_adv.validate()?;
        if self.k_values.is_empty() || self.n_values.is_empty() {
            return Err(Error::validation("k_values and n_values must be non-empty"));
        }
        if self.k_values.iter().any(|&k| k == 0) {
            return Err(Error::validation("lobe counts must be at least 1"));
        }
        if !(self.stroke_mm.is_finite() && self.stroke_mm > 0.0) {
            return Err(Error::validation(format!(
                "stroke must be positive, got {} mm",
                self.stroke_mm
            )));
        }
        self.capsule_config(self.n_values[0])?.validate()?;
        if !(self.omega.is_finite() && self.omega > 0.0 && self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation("omega and dt must be positive"));
        }
        if self.n_cycles < 2 {
            return Err(Error::validation("sweeps need at least 2 cycles for steady statistics"));
        }
        Ok(())
    }

    fn capsule_config(&self, n: u32) -> Result<CapsuleConfig> {
        Ok(CapsuleConfig {
            n_sliders: n,
            mu_n: self.mu_n,
            f_loss: self.f_loss,
            smoothing: SmoothingSpec { lambda: self.lambda },
            model: self.model,
            tissue: self.tissue,
        })
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    /// Retract duty fraction.
    pub d_ret: f64,
    /// Advance duty fraction.
    pub d_adv: f64,
    /// Duty asymmetry `d_ret − d_adv`.
    pub delta_d: f64,
    /// Lobe count.
    pub k: u32,
    /// Slider count.
    pub n: u32,
    /// Cycle-mean capsule thrust (N).
    pub mean_thrust_n: f64,
    /// Cycle mean normalized by `n·μN`.
    pub mean_normalized: f64,
    /// Ripple coefficient of variation; `None` when the mean is zero.
    pub ripple_cov: Option<f64>,
}

/// Result of [`run_sweep`]: the spec plus one row per feasible grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    /// The evaluated spec.
    pub spec: SweepSpec,
    /// Rows in lexicographic `(d_ret, d_adv, k, n)` order.
    pub rows: Vec<SweepRow>,
}

/// Evaluates the full grid. Infeasible combinations are skipped and logged;
/// an entirely empty grid is an error.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut grid: Vec<(f64, f64, u32, u32)> = Vec::new();
    for &d_ret in &spec.d_ret.values() {
        for &d_adv in &spec.d_adv.values() {
            for &k in &spec.k_values {
                for &n in &spec.n_values {
                    grid.push((d_ret, d_adv, k, n));
                }
            }
        }
    }
    if grid.is_empty() {
        return Err(Error::validation("sweep grid is empty"));
    }
    let evaluated: Vec<Option<SweepRow>> = grid
        .par_iter()
        .map(|&(d_ret, d_adv, k, n)| match evaluate_point(spec, d_ret, d_adv, k, n) {
            Ok(row) => Some(row),
            Err(err) => {
                log::debug!(
                    "skipping d_ret={d_ret} d_adv={d_adv} k={k} n={n}: {err}"
                );
                None
            }
        })
        .collect();
    let rows: Vec<SweepRow> = evaluated.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::validation("no feasible grid point in the sweep"));
    }
    Ok(SweepResult { spec: spec.clone(), rows })
}

fn evaluate_point(spec: &SweepSpec, d_ret: f64, d_adv: f64, k: u32, n: u32) -> Result<SweepRow> {
    let duty = DutyFractions::from_ret_adv(d_ret, d_adv)?;
    let profile = CamProfile::synthesize(k, duty, spec.stroke_mm)?;
    let config = spec.capsule_config(n)?;
    // The ideal model is rate-independent: its statistics come from exact
    // angle-domain integration, with no time sampling to resolve.
    let stats = match spec.model {
        ContactModel::Ideal => ideal_cycle_stats(&profile, &config)?,
        ContactModel::Viscoelastic => {
            let trace = superpose(&profile, &config, spec.omega, spec.dt, spec.n_cycles)?;
            CycleStats {
                mean: trace.mean,
                mean_normalized: trace.mean_normalized,
                ripple_cov: trace.ripple_cov,
            }
        }
    };
    Ok(SweepRow {
        d_ret,
        d_adv,
        delta_d: duty.delta_d(),
        k,
        n,
        mean_thrust_n: stats.mean,
        mean_normalized: stats.mean_normalized,
        ripple_cov: stats.ripple_cov,
    })
}

/// One row of the cam-family comparison.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyEntry {
    /// Duty asymmetry `d_ret − d_adv`.
    pub delta_d: f64,
    /// Duty fractions of the cam.
    pub duty: DutyFractions,
    /// Lobe count.
    pub jump_count: u32,
    /// Cycle-mean capsule thrust (N).
    pub mean_thrust_n: f64,
    /// Cycle mean normalized by `n·μN`.
    pub mean_normalized: f64,
    /// Ripple coefficient of variation; `None` when the mean is zero.
    pub ripple_cov: Option<f64>,
}

/// Evaluates a list of cams `(duty fractions, lobe count)` under one capsule
/// configuration and returns the entries ordered by descending duty
/// asymmetry (the expected thrust ordering).
pub fn cam_family_report(
    cams: &[(DutyFractions, u32)],
    config: &CapsuleConfig,
    stroke_mm: f64,
    omega: f64,
    dt: f64,
) -> Result<Vec<FamilyEntry>> {
    if cams.is_empty() {
        return Err(Error::validation("cam family is empty"));
    }
    let mut entries = Vec::with_capacity(cams.len());
    for &(duty, k) in cams {
        let profile = CamProfile::synthesize(k, duty, stroke_mm)?;
        let trace = superpose(&profile, config, omega, dt, 2)?;
        entries.push(FamilyEntry {
            delta_d: duty.delta_d(),
            duty,
            jump_count: k,
            mean_thrust_n: trace.mean,
            mean_normalized: trace.mean_normalized,
            ripple_cov: trace.ripple_cov,
        });
    }
    entries.sort_by(|a, b| b.delta_d.total_cmp(&a.delta_d));
    Ok(entries)
}
