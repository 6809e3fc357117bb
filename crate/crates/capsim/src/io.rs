//! Plain-text serialization: CSV tables for traces and sweeps, TOML for cam
//! descriptors and fit reports, JSON for thrust summaries.
//!
//! CSV dialect: comma separator, `.` decimal point, LF line endings, no
//! quoting. Floats are written with Rust's shortest round-trip formatting, so
//! written files are byte-identical across runs and platforms and parse back
//! to the exact same values.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use crate::cam::{CamProfile, CamSegment, DutyFractions};
use crate::capsule::{CapsuleConfig, ThrustTrace};
use crate::contact::ContactTrace;
use crate::identify::{FitReport, MeasuredTrace};
use crate::sweep::SweepResult;
use crate::{Error, Result};

/// Header of the sampled cam profile table.
pub const PROFILE_CSV_HEADER: &str = "theta_rad,lift_mm";
/// Header of the single-slider contact trace table.
pub const CONTACT_CSV_HEADER: &str = "t_s,mode,x_wall_mm,v_wall_mm_s,F_wall_N,F_slider_N,F_elastic_N";
/// Header of the capsule thrust trace table.
pub const THRUST_CSV_HEADER: &str = "theta_rad,F_capsule_N,F_norm,n_ret,n_adv";
/// Header of the measured force trace table.
pub const MEASURED_CSV_HEADER: &str = "t_s,F_N";
/// Header of the sweep result table.
pub const SWEEP_CSV_HEADER: &str = "d_ret,d_adv,delta_d,k,n,mean_thrust_N,mean_normalized,ripple_cov";

/// Writes the cam lift sampled on a uniform angle grid as CSV.
pub fn write_profile_csv<W: Write>(w: &mut W, profile: &CamProfile, n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::validation("profile table needs at least 2 samples"));
    }
    writeln!(w, "{PROFILE_CSV_HEADER}")?;
    for i in 0..n_samples {
        let theta = i as f64 * TAU / n_samples as f64;
        writeln!(w, "{theta},{}", profile.lift(theta))?;
    }
    Ok(())
}

/// Serializable cam description: the exact segment list plus the stroke for
/// human readers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CamDescriptor {
    /// Stroke (mm), informational; recomputed on load.
    pub stroke_mm: f64,
    /// Piecewise segments covering `[0, 2π)`.
    pub segments: Vec<CamSegment>,
}

impl CamDescriptor {
    /// Captures a profile.
    #[must_use]
    pub fn from_profile(profile: &CamProfile) -> Self {
        CamDescriptor { stroke_mm: profile.stroke(), segments: profile.segments().to_vec() }
    }

    /// Rebuilds the validated profile.
    pub fn to_profile(&self) -> Result<CamProfile> {
        CamProfile::from_segments(self.segments.clone())
    }
}

/// Writes a cam descriptor as TOML. Segment boundaries and lifts round-trip
/// exactly: floats are emitted in shortest round-trip form.
pub fn cam_to_toml(profile: &CamProfile) -> Result<String> {
    toml::to_string_pretty(&CamDescriptor::from_profile(profile))
        .map_err(|e| Error::Parse(format!("cam TOML serialization failed: {e}")))
}

/// Parses a cam descriptor from TOML and validates it into a profile.
pub fn cam_from_toml(text: &str) -> Result<CamProfile> {
    let descriptor: CamDescriptor =
        toml::from_str(text).map_err(|e| Error::Parse(format!("cam TOML parse error: {e}")))?;
    descriptor.to_profile()
}

/// Writes a single-slider contact trace as CSV.
pub fn write_contact_csv<W: Write>(w: &mut W, trace: &ContactTrace) -> Result<()> {
    writeln!(w, "{CONTACT_CSV_HEADER}")?;
    for s in &trace.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.t, s.mode, s.x_wall_mm, s.v_wall_mm_s, s.f_wall_n, s.f_slider_n, s.f_elastic_n
        )?;
    }
    Ok(())
}

/// Writes a capsule thrust trace as CSV.
pub fn write_thrust_csv<W: Write>(w: &mut W, trace: &ThrustTrace) -> Result<()> {
    writeln!(w, "{THRUST_CSV_HEADER}")?;
    for s in &trace.samples {
        writeln!(w, "{},{},{},{},{}", s.theta, s.f_capsule_n, s.f_norm, s.n_ret, s.n_adv)?;
    }
    Ok(())
}

/// JSON-facing summary of a thrust trace.
#[derive(Debug, Clone, Serialize)]
pub struct ThrustSummary {
    /// Cycle-mean thrust (N).
    pub mean_thrust_n: f64,
    /// Cycle mean normalized by `n·μN`.
    pub mean_normalized: f64,
    /// Ripple coefficient of variation; `null` when the mean is zero.
    pub ripple_cov: Option<f64>,
    /// Measured duty fractions of the cam.
    pub duty: DutyFractions,
    /// Capsule configuration used.
    pub config: CapsuleConfig,
    /// Cam angular velocity (rad/s).
    pub omega_rad_s: f64,
    /// Time step (s).
    pub dt_s: f64,
}

/// Serializes the scalar summary of a thrust trace as pretty JSON.
pub fn thrust_summary_json(trace: &ThrustTrace) -> Result<String> {
    let summary = ThrustSummary {
        mean_thrust_n: trace.mean,
        mean_normalized: trace.mean_normalized,
        ripple_cov: trace.ripple_cov,
        duty: trace.duty,
        config: trace.config,
        omega_rad_s: trace.omega,
        dt_s: trace.dt,
    };
    serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Parse(format!("thrust summary JSON failed: {e}")))
}

/// Writes a measured force trace as CSV with `# key = value` metadata lines
/// before the header.
pub fn write_measured_csv<W: Write>(w: &mut W, trace: &MeasuredTrace) -> Result<()> {
    for (key, value) in &trace.metadata {
        writeln!(w, "# {key} = {value}")?;
    }
    writeln!(w, "{MEASURED_CSV_HEADER}")?;
    for (&t, &f) in trace.t.iter().zip(&trace.f) {
        writeln!(w, "{t},{f}")?;
    }
    Ok(())
}

/// Reads a measured force trace: optional `# key = value` comment lines, a
/// `t_s,F_N` header, then one `time,force` row per line.
pub fn read_measured_csv<R: BufRead>(r: R) -> Result<MeasuredTrace> {
    let mut metadata = BTreeMap::new();
    let mut t = Vec::new();
    let mut f = Vec::new();
    let mut header_seen = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                metadata.insert(key.trim().to_string(), value.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            if line != MEASURED_CSV_HEADER {
                return Err(Error::Parse(format!(
                    "line {}: expected header '{MEASURED_CSV_HEADER}', got '{line}'",
                    idx + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let (ts, fs) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!("line {}: expected 'time,force', got '{line}'", idx + 1))
        })?;
        let parse = |s: &str, what: &str| {
            s.trim().parse::<f64>().map_err(|e| {
                Error::Parse(format!("line {}: bad {what} value '{s}': {e}", idx + 1))
            })
        };
        t.push(parse(ts, "time")?);
        f.push(parse(fs, "force")?);
    }
    if !header_seen {
        return Err(Error::Parse(format!("missing '{MEASURED_CSV_HEADER}' header")));
    }
    MeasuredTrace::new(t, f, metadata)
}

/// Writes sweep rows as CSV. A missing ripple (zero-mean design) is written
/// as `NaN`.
pub fn write_sweep_csv<W: Write>(w: &mut W, result: &SweepResult) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in &result.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.d_ret,
            row.d_adv,
            row.delta_d,
            row.k,
            row.n,
            row.mean_thrust_n,
            row.mean_normalized,
            row.ripple_cov.unwrap_or(f64::NAN)
        )?;
    }
    Ok(())
}

/// Serializes a fit report as TOML (unidentified parameters are omitted).
pub fn fit_report_to_toml(report: &FitReport) -> Result<String> {
    toml::to_string_pretty(report)
        .map_err(|e| Error::Parse(format!("fit report TOML failed: {e}")))
}
