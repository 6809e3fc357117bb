//! Reference constants of the hardware prototype the default configuration
//! describes.
//!
//! The defaults used throughout the crate (12 sliders, 10 mm stroke, the
//! single-jump duty split, and the wall parameters below) were identified on a
//! physical capsule prototype crawling in a compliant tube. The benchmark
//! measurements at the bottom of this module are recorded for documentation
//! and comparison only: they depend on hardware effects outside this model
//! (load cell mounting, rocking of the capsule body, tether drag) and are not
//! reproduced by simulation.

use crate::cam::DutyFractions;
use crate::contact::TissueParams;

/// Default slider count of the prototype capsule.
pub const N_SLIDERS: u32 = 12;

/// Default slider stroke (mm).
pub const STROKE_MM: f64 = 10.0;

/// Default lobe (jump) count of the prototype cam.
pub const JUMP_COUNT: u32 = 1;

/// Measured duty fractions of the prototype single-jump cam.
pub const DUTY_SINGLE_JUMP: DutyFractions =
    DutyFractions { d_ret: 0.911, d_adv: 0.085, d_dwell: 0.004 };

/// Duty fractions of the prototype two-jump cam. The prototype family keeps
/// the advance angle per lobe fixed (0.085 of a revolution each), and the
/// published duty asymmetry is 0.64, which pins the retract share.
pub const DUTY_DOUBLE_JUMP: DutyFractions =
    DutyFractions { d_ret: 0.810, d_adv: 0.170, d_dwell: 0.020 };

/// Duty fractions of the prototype three-jump cam: three 0.085-wide advance
/// lobes and a published duty asymmetry of 0.48.
pub const DUTY_TRIPLE_JUMP: DutyFractions =
    DutyFractions { d_ret: 0.735, d_adv: 0.255, d_dwell: 0.010 };

/// Normal-force-scaled Coulomb traction limit per slider (N).
pub const MU_N_NEWTON: f64 = 0.14;

/// Identified wall (substrate) parameters of the prototype's test tube.
///
/// The static break level sits below the kinetic limit here; the two limits
/// are treated as independent identified parameters, not as a μ_s/μ_k ratio.
pub const TISSUE: TissueParams = TissueParams {
    k_tissue: 130.0,
    c_tissue: 6.0,
    mu_s_n: 0.08,
    mu_k_n: 0.14,
    tau_ret: 0.45,
    tau_adv: 0.02,
};

/// Capsule shell diameter (mm); geometry metadata only.
pub const CAPSULE_DIAMETER_MM: f64 = 28.0;

/// Capsule shell length (mm); geometry metadata only.
pub const CAPSULE_LENGTH_MM: f64 = 60.0;

/// Capsule mass (g); metadata only — the quasi-static model has no inertia.
pub const CAPSULE_MASS_G: f64 = 50.0;

/// Benchmark: mean traction measured on the bench prototype (N).
/// Below the viscoelastic prediction; not reproduced by simulation.
pub const MEASURED_MEAN_TRACTION_N: f64 = 0.85;

/// Benchmark: measured thrust ripple amplitude (N), one dominant peak per
/// revolution caused by capsule rocking, which is outside this model.
pub const MEASURED_RIPPLE_N: f64 = 0.3;

/// Benchmark: RMS error of the identified single-slider force model against
/// the measured trace it was fitted to (N).
pub const IDENTIFIED_FIT_RMSE_N: f64 = 0.0101;

/// Benchmark: the same fit error normalized by the measured force range.
pub const IDENTIFIED_FIT_NRMSE: f64 = 0.0362;

/// Benchmark: crawling speed of the free prototype (mm/s).
pub const MEASURED_SPEED_MM_S: f64 = 3.08;
