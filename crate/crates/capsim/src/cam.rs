//! Cam lift profiles and slider kinematics.
//!
//! A cam profile is a piecewise lift function `h(θ)` on `[0, 2π)` split into
//! rise / fall / dwell segments. Lift is the forward-positive slider
//! displacement in mm, so a *fall* (`dh/dθ < 0`) is the retraction stroke that
//! produces forward thrust and a *rise* is the advance stroke. A profile with
//! jump count `k` repeats one advance → dwell → retract cell `k` times per
//! revolution. With the shaft at constant speed `ω` the slider kinematics are
//! `x(t) = h(ωt + φ)` and `v(t) = ω·dh/dθ`, so all cycle statistics are
//! functions of θ only.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::{Error, Result};

/// Absolute tolerance used when checking that duty fractions close to 1.
pub const DUTY_SUM_TOL: f64 = 1e-12;

/// Continuity / geometry tolerance for imported profiles (mm and rad).
const IMPORT_TOL: f64 = 1e-9;

/// Angular tolerance for flagging a sample as sitting on a segment boundary.
const BOUNDARY_TOL: f64 = 1e-12;

/// Wraps an angle into `[0, 2π)`.
#[must_use]
pub fn wrap_angle(theta: f64) -> f64 {
    if (0.0..TAU).contains(&theta) {
        return theta;
    }
    let w = theta - TAU * (theta / TAU).floor();
    // Guard against w == TAU when theta is a hair below a multiple of 2π.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Direction of a cam segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Lift increases: the slider advances (negative thrust direction).
    Rise,
    /// Lift decreases: the slider retracts (positive thrust direction).
    Fall,
    /// Lift constant.
    Dwell,
}

/// Interpolation law of a segment between its two endpoint lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentShape {
    /// Straight line in (θ, lift).
    Linear,
    /// Simple-harmonic blend, the lift law of an eccentric circular cam:
    /// `lift = l0 + (l1 − l0)·(1 − cos(π·u))/2` with `u` the normalized angle.
    /// Monotone between the endpoints with zero end slopes.
    CircularArc,
}

/// One maximal segment of a cam profile on `[theta_start, theta_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CamSegment {
    /// Segment start angle (rad), inclusive.
    pub theta_start: f64,
    /// Segment end angle (rad), exclusive.
    pub theta_end: f64,
    /// Rise / fall / dwell.
    pub kind: SegmentKind,
    /// Interpolation law.
    pub shape: SegmentShape,
    /// Lift at `theta_start` (mm).
    pub lift_start: f64,
    /// Lift approached at `theta_end` (mm).
    pub lift_end: f64,
}

impl CamSegment {
    /// Angular width of the segment (rad).
    #[must_use]
    pub fn width(&self) -> f64 {
        self.theta_end - self.theta_start
    }

    /// Lift at `theta`, which must lie within the segment.
    #[must_use]
    pub fn lift_at(&self, theta: f64) -> f64 {
        let u = ((theta - self.theta_start) / self.width()).clamp(0.0, 1.0);
        match self.shape {
            SegmentShape::Linear => self.lift_start + (self.lift_end - self.lift_start) * u,
            SegmentShape::CircularArc => {
                self.lift_start
                    + (self.lift_end - self.lift_start) * 0.5 * (1.0 - (std::f64::consts::PI * u).cos())
            }
        }
    }

    /// Slope `dh/dθ` at `theta` (mm/rad), right-hand limit at the start.
    #[must_use]
    pub fn slope_at(&self, theta: f64) -> f64 {
        let w = self.width();
        let u = ((theta - self.theta_start) / w).clamp(0.0, 1.0);
        match self.shape {
            SegmentShape::Linear => (self.lift_end - self.lift_start) / w,
            SegmentShape::CircularArc => {
                (self.lift_end - self.lift_start) * 0.5 * std::f64::consts::PI
                    * (std::f64::consts::PI * u).sin()
                    / w
            }
        }
    }

    /// Thrust-direction sign of this segment: `+1` fall (retract), `-1` rise
    /// (advance), `0` dwell.
    #[must_use]
    pub fn thrust_sign(&self) -> i8 {
        match self.kind {
            SegmentKind::Fall => 1,
            SegmentKind::Rise => -1,
            SegmentKind::Dwell => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_start", self.theta_start),
            ("theta_end", self.theta_end),
            ("lift_start", self.lift_start),
            ("lift_end", self.lift_end),
        ] {
            if !v.is_finite() {
                return Err(Error::validation(format!("segment {name} is not finite")));
            }
        }
        if self.theta_end - self.theta_start <= 0.0 {
            return Err(Error::validation(format!(
                "segment has non-positive width: [{}, {})",
                self.theta_start, self.theta_end
            )));
        }
        let dl = self.lift_end - self.lift_start;
        let ok = match self.kind {
            SegmentKind::Rise => dl > 0.0,
            SegmentKind::Fall => dl < 0.0,
            SegmentKind::Dwell => dl == 0.0 && self.shape == SegmentShape::Linear,
        };
        if !ok {
            return Err(Error::validation(format!(
                "segment kind {:?} inconsistent with lifts {} -> {}",
                self.kind, self.lift_start, self.lift_end
            )));
        }
        Ok(())
    }
}

/// Fractions of one revolution spent retracting, advancing and dwelling.
///
/// The three fractions must close to 1 within [`DUTY_SUM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyFractions {
    /// Fraction of the cycle with `dh/dθ < 0` (thrust-positive stroke).
    pub d_ret: f64,
    /// Fraction of the cycle with `dh/dθ > 0`.
    pub d_adv: f64,
    /// Fraction of the cycle with `dh/dθ = 0`.
    pub d_dwell: f64,
}

impl DutyFractions {
    /// Builds a validated duty triple. All fractions must be finite, lie in
    /// `[0, 1]` and sum to 1 within [`DUTY_SUM_TOL`].
    pub fn new(d_ret: f64, d_adv: f64, d_dwell: f64) -> Result<Self> {
        let d = DutyFractions { d_ret, d_adv, d_dwell };
        for (name, v) in [("d_ret", d_ret), ("d_adv", d_adv), ("d_dwell", d_dwell)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!(
                    "duty fraction {name} = {v} outside [0, 1]"
                )));
            }
        }
        let sum = d_ret + d_adv + d_dwell;
        if (sum - 1.0).abs() > DUTY_SUM_TOL {
            return Err(Error::validation(format!(
                "duty fractions sum to {sum}, expected 1 within {DUTY_SUM_TOL:e}"
            )));
        }
        Ok(d)
    }

    /// Builds a duty triple from retract and advance fractions, assigning the
    /// remainder of the cycle to the dwell.
    pub fn from_ret_adv(d_ret: f64, d_adv: f64) -> Result<Self> {
        if !d_ret.is_finite() || !d_adv.is_finite() {
            return Err(Error::validation("duty fractions must be finite"));
        }
        let d_dwell = 1.0 - d_ret - d_adv;
        if d_dwell < -DUTY_SUM_TOL {
            return Err(Error::validation(format!(
                "d_ret + d_adv = {} exceeds 1",
                d_ret + d_adv
            )));
        }
        Self::new(d_ret, d_adv, d_dwell.max(0.0))
    }

    /// Duty asymmetry `Δd = d_ret − d_adv`, the normalized ideal thrust.
    #[must_use]
    pub fn delta_d(&self) -> f64 {
        self.d_ret - self.d_adv
    }
}

/// Slope sample returned by [`CamProfile::slope`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeSample {
    /// `dh/dθ` in mm/rad; the right-hand derivative on segment boundaries.
    pub d_lift_d_theta: f64,
    /// True when the query angle sits on a segment boundary, where the
    /// derivative is discontinuous (reversal or dwell corner).
    pub at_boundary: bool,
}

/// A discontinuity of the thrust-direction sign `sign(−dh/dθ)` along θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignJump {
    /// Angle of the discontinuity (rad) in `[0, 2π)`.
    pub theta: f64,
    /// Thrust sign approaching from the left.
    pub before: i8,
    /// Thrust sign on and after the jump.
    pub after: i8,
}

/// A validated piecewise cam profile over one revolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CamProfile {
    segments: Vec<CamSegment>,
    stroke: f64,
    jump_count: u32,
}

impl CamProfile {
    /// Synthesizes a `jump_count`-lobed profile of linear segments.
    ///
    /// Each of the `jump_count` identical cells is advance (rise 0 → stroke),
    /// dwell (at stroke) and retract (fall stroke → 0), with per-cell angular
    /// widths `2π·d/k`. Requires `jump_count ≥ 1`, a positive stroke and
    /// strictly positive retract and advance fractions.
    pub fn synthesize(jump_count: u32, duty: DutyFractions, stroke_mm: f64) -> Result<Self> {
        if jump_count == 0 {
            return Err(Error::validation("jump count must be at least 1"));
        }
        if !(stroke_mm.is_finite() && stroke_mm > 0.0) {
            return Err(Error::validation(format!("stroke must be positive, got {stroke_mm}")));
        }
        if duty.d_ret <= 0.0 || duty.d_adv <= 0.0 {
            return Err(Error::validation(
                "synthesis requires strictly positive retract and advance fractions",
            ));
        }
        let k = f64::from(jump_count);
        let w_adv = TAU * duty.d_adv / k;
        let w_dwell = TAU * duty.d_dwell / k;
        let mut segments = Vec::with_capacity(3 * jump_count as usize);
        for c in 0..jump_count {
            // Shared boundary expressions keep the partition bit-exact.
            let base = TAU * f64::from(c) / k;
            let cell_end = TAU * f64::from(c + 1) / k;
            let adv_end = base + w_adv;
            let dwell_end = adv_end + w_dwell;
            segments.push(CamSegment {
                theta_start: base,
                theta_end: adv_end,
                kind: SegmentKind::Rise,
                shape: SegmentShape::Linear,
                lift_start: 0.0,
                lift_end: stroke_mm,
            });
            if duty.d_dwell > 0.0 {
                segments.push(CamSegment {
                    theta_start: adv_end,
                    theta_end: dwell_end,
                    kind: SegmentKind::Dwell,
                    shape: SegmentShape::Linear,
                    lift_start: stroke_mm,
                    lift_end: stroke_mm,
                });
            }
            segments.push(CamSegment {
                theta_start: dwell_end,
                theta_end: cell_end,
                kind: SegmentKind::Fall,
                shape: SegmentShape::Linear,
                lift_start: stroke_mm,
                lift_end: 0.0,
            });
        }
        Self::from_segments(segments)
    }

    /// A single-lobe simple-harmonic profile: `h(θ) = stroke·(1 − cos θ)/2`.
    ///
    /// Duty fractions are (0.5, 0.5, 0) and the slider velocity is sinusoidal,
    /// which makes wall stiffness and damping jointly identifiable from stick
    /// intervals — the role of this profile in identification workflows.
    pub fn harmonic(stroke_mm: f64) -> Result<Self> {
        if !(stroke_mm.is_finite() && stroke_mm > 0.0) {
            return Err(Error::validation(format!("stroke must be positive, got {stroke_mm}")));
        }
        let half = TAU / 2.0;
        Self::from_segments(vec![
            CamSegment {
                theta_start: 0.0,
                theta_end: half,
                kind: SegmentKind::Rise,
                shape: SegmentShape::CircularArc,
                lift_start: 0.0,
                lift_end: stroke_mm,
            },
            CamSegment {
                theta_start: half,
                theta_end: TAU,
                kind: SegmentKind::Fall,
                shape: SegmentShape::CircularArc,
                lift_start: stroke_mm,
                lift_end: 0.0,
            },
        ])
    }

    /// Builds a profile from explicit segments, validating that they partition
    /// `[0, 2π)` without gaps or overlaps, are continuous in lift (including
    /// across the wrap), start at zero lift, reach exactly one stroke height,
    /// and are individually monotone.
    pub fn from_segments(segments: Vec<CamSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::validation("profile needs at least one segment"));
        }
        for s in &segments {
            s.validate()?;
        }
        if segments[0].theta_start.abs() > IMPORT_TOL {
            return Err(Error::validation("first segment must start at θ = 0"));
        }
        let last = segments.len() - 1;
        if (segments[last].theta_end - TAU).abs() > IMPORT_TOL {
            return Err(Error::validation("last segment must end at θ = 2π"));
        }
        for i in 0..last {
            let (a, b) = (&segments[i], &segments[i + 1]);
            if (b.theta_start - a.theta_end).abs() > IMPORT_TOL {
                return Err(Error::validation(format!(
                    "gap or overlap between segments at θ = {}",
                    a.theta_end
                )));
            }
            if (b.lift_start - a.lift_end).abs() > IMPORT_TOL {
                return Err(Error::validation(format!(
                    "lift discontinuity at θ = {}: {} vs {}",
                    a.theta_end, a.lift_end, b.lift_start
                )));
            }
        }
        if (segments[0].lift_start - segments[last].lift_end).abs() > IMPORT_TOL {
            return Err(Error::validation("lift discontinuous across the 2π wrap"));
        }
        // Segments are monotone, so endpoint lifts bound the profile.
        let mut min_lift = f64::INFINITY;
        let mut max_lift = f64::NEG_INFINITY;
        for s in &segments {
            min_lift = min_lift.min(s.lift_start.min(s.lift_end));
            max_lift = max_lift.max(s.lift_start.max(s.lift_end));
        }
        if min_lift.abs() > IMPORT_TOL {
            return Err(Error::validation(format!(
                "minimum lift is {min_lift} mm, profiles must touch zero lift"
            )));
        }
        let stroke = max_lift;
        if stroke <= 0.0 {
            return Err(Error::validation("profile must have positive stroke"));
        }

        // Jump count = number of maximal contiguous fall regions, circular.
        let falls: Vec<bool> = segments.iter().map(|s| s.kind == SegmentKind::Fall).collect();
        let n = falls.len();
        let mut jump_count = 0u32;
        for i in 0..n {
            let prev = falls[(i + n - 1) % n];
            if falls[i] && !prev {
                jump_count += 1;
            }
        }
        if falls.iter().all(|&f| f) {
            jump_count = 1; // one fall region covering the whole circle
        }
        if jump_count == 0 {
            return Err(Error::validation("profile has no retract (fall) region"));
        }

        Ok(CamProfile { segments, stroke, jump_count })
    }

    /// The validated segments, ordered by start angle.
    #[must_use]
    pub fn segments(&self) -> &[CamSegment] {
        &self.segments
    }

    /// Peak lift of the profile (mm).
    #[must_use]
    pub fn stroke(&self) -> f64 {
        self.stroke
    }

    /// Number of retract strokes per revolution.
    #[must_use]
    pub fn jump_count(&self) -> u32 {
        self.jump_count
    }

    fn segment_index(&self, theta: f64) -> usize {
        // Right-continuous lookup: a boundary angle belongs to the segment it starts.
        let i = self.segments.partition_point(|s| s.theta_start <= theta);
        i.saturating_sub(1)
    }

    /// Lift `h(θ)` in mm. The angle is wrapped into `[0, 2π)` first.
    #[must_use]
    pub fn lift(&self, theta: f64) -> f64 {
        let th = wrap_angle(theta);
        self.segments[self.segment_index(th)].lift_at(th)
    }

    /// Slope `dh/dθ` in mm/rad, right-hand limit on segment boundaries, with
    /// the sample flagged when it sits on a boundary.
    #[must_use]
    pub fn slope(&self, theta: f64) -> SlopeSample {
        let th = wrap_angle(theta);
        let idx = self.segment_index(th);
        let seg = &self.segments[idx];
        let at_boundary = (th - seg.theta_start).abs() <= BOUNDARY_TOL
            || (th - seg.theta_end).abs() <= BOUNDARY_TOL;
        SlopeSample { d_lift_d_theta: seg.slope_at(th), at_boundary }
    }

    /// Thrust-direction sign `sign(−dh/dθ)` of the segment containing `theta`
    /// (right-continuous on boundaries).
    #[must_use]
    pub fn thrust_sign(&self, theta: f64) -> i8 {
        let th = wrap_angle(theta);
        self.segments[self.segment_index(th)].thrust_sign()
    }

    /// Measured duty fractions: angular share of fall, rise and dwell segments.
    #[must_use]
    pub fn duty_fractions(&self) -> DutyFractions {
        let mut d_ret = 0.0;
        let mut d_adv = 0.0;
        let mut d_dwell = 0.0;
        for s in &self.segments {
            let frac = s.width() / TAU;
            match s.kind {
                SegmentKind::Fall => d_ret += frac,
                SegmentKind::Rise => d_adv += frac,
                SegmentKind::Dwell => d_dwell += frac,
            }
        }
        DutyFractions { d_ret, d_adv, d_dwell }
    }

    /// Segment start angles in `[0, 2π)`, ascending.
    #[must_use]
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.theta_start).collect()
    }

    /// Angular width of the narrowest segment (rad).
    #[must_use]
    pub fn min_segment_width(&self) -> f64 {
        self.segments.iter().map(CamSegment::width).fold(f64::INFINITY, f64::min)
    }

    /// Discontinuities of the thrust-direction sign, ascending in θ.
    #[must_use]
    pub fn sign_jumps(&self) -> Vec<SignJump> {
        let n = self.segments.len();
        let mut jumps = Vec::new();
        for i in 0..n {
            let before = self.segments[(i + n - 1) % n].thrust_sign();
            let after = self.segments[i].thrust_sign();
            if before != after {
                jumps.push(SignJump { theta: self.segments[i].theta_start, before, after });
            }
        }
        jumps
    }

    /// Samples slider kinematics at a fixed time step **plus** an extra sample
    /// at every segment-boundary crossing, so reversals are never skipped.
    ///
    /// The trajectory is *not* uniformly sampled; use
    /// [`slider_trajectory_uniform`](Self::slider_trajectory_uniform) for the
    /// stick–slip simulator. Requires the time step to resolve the shortest
    /// segment with at least [`MIN_SAMPLES_PER_SEGMENT`] samples.
    pub fn slider_trajectory(
        &self,
        omega: f64,
        dt: f64,
        phase_offset: f64,
        n_cycles: u32,
    ) -> Result<SliderTrajectory> {
        self.check_sampling(omega, dt, phase_offset, n_cycles)?;
        let t_total = f64::from(n_cycles) * TAU / omega;
        let n_uniform = (t_total / dt + 1e-9).floor() as usize;

        // (time, boundary angle if this is an inserted boundary sample)
        let mut stamps: Vec<(f64, Option<f64>)> =
            (0..=n_uniform).map(|j| (j as f64 * dt, None)).collect();
        let period = TAU / omega;
        for &beta in &self.breakpoints() {
            let base = (beta - phase_offset) / omega;
            let m0 = ((-base) / period).floor() as i64 - 1;
            let mut m = m0;
            loop {
                let t = base + m as f64 * period;
                if t > t_total + 1e-9 * dt {
                    break;
                }
                if t >= -1e-9 * dt {
                    stamps.push((t.clamp(0.0, t_total), Some(beta)));
                }
                m += 1;
            }
        }
        stamps.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.is_none().cmp(&b.1.is_none())));
        let mut samples: Vec<TrajectorySample> = Vec::with_capacity(stamps.len());
        let tol = 1e-9 * dt;
        for (t, boundary) in stamps {
            if let Some(last) = samples.last_mut() {
                if t - last.t <= tol {
                    if let Some(beta) = boundary {
                        // Merge a coinciding uniform sample into the boundary sample.
                        last.theta = beta;
                        last.x = self.lift(beta);
                        last.v = omega * self.slope(beta).d_lift_d_theta;
                        last.at_boundary = true;
                    }
                    continue;
                }
            }
            let (theta, at_boundary) = match boundary {
                Some(beta) => (beta, true),
                None => (wrap_angle(omega * t + phase_offset), false),
            };
            samples.push(TrajectorySample {
                t,
                theta,
                x: self.lift(theta),
                v: omega * self.slope(theta).d_lift_d_theta,
                at_boundary,
            });
        }
        Ok(SliderTrajectory {
            omega,
            dt,
            phase_offset,
            uniform: false,
            samples_per_cycle: None,
            samples,
            sign_jumps: self.sign_jumps(),
            jump_count: self.jump_count,
        })
    }

    /// Samples slider kinematics on a strictly uniform time grid covering
    /// `n_cycles` full cycles (inclusive of the final instant).
    ///
    /// Requires `dt` to divide the cycle period to within one part in 10⁶ so
    /// that cycle statistics see an integer number of samples per cycle, and
    /// to resolve the shortest segment with at least
    /// [`MIN_SAMPLES_PER_SEGMENT`] samples.
    pub fn slider_trajectory_uniform(
        &self,
        omega: f64,
        dt: f64,
        phase_offset: f64,
        n_cycles: u32,
    ) -> Result<SliderTrajectory> {
        self.check_sampling(omega, dt, phase_offset, n_cycles)?;
        let period = TAU / omega;
        let spc_f = period / dt;
        let spc = spc_f.round();
        if spc < 1.0 || (spc_f - spc).abs() > 1e-6 * spc {
            return Err(Error::validation(format!(
                "dt = {dt} does not divide the cycle period {period} (samples per cycle {spc_f})"
            )));
        }
        let spc = spc as usize;
        let total = spc * n_cycles as usize;
        let samples = (0..=total)
            .map(|j| {
                let t = j as f64 * dt;
                let theta = wrap_angle(omega * t + phase_offset);
                let slope = self.slope(theta);
                TrajectorySample {
                    t,
                    theta,
                    x: self.lift(theta),
                    v: omega * slope.d_lift_d_theta,
                    at_boundary: slope.at_boundary,
                }
            })
            .collect();
        Ok(SliderTrajectory {
            omega,
            dt,
            phase_offset,
            uniform: true,
            samples_per_cycle: Some(spc),
            samples,
            sign_jumps: self.sign_jumps(),
            jump_count: self.jump_count,
        })
    }

    pub(crate) fn check_sampling(
        &self,
        omega: f64,
        dt: f64,
        phase_offset: f64,
        n_cycles: u32,
    ) -> Result<()> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::validation(format!("omega must be positive, got {omega}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation(format!("dt must be positive, got {dt}")));
        }
        if !phase_offset.is_finite() {
            return Err(Error::validation("phase offset must be finite"));
        }
        if n_cycles == 0 {
            return Err(Error::validation("need at least one cycle"));
        }
        let samples_in_shortest = self.min_segment_width() / (omega * dt);
        // The relative slack keeps an exactly-20-sample segment from tripping
        // on floating-point rounding of the width ratio.
        if samples_in_shortest < MIN_SAMPLES_PER_SEGMENT * (1.0 - 1e-9) {
            return Err(Error::UnderResolved(format!(
                "dt = {dt} puts {samples_in_shortest:.1} samples in the shortest segment \
                 ({} rad); at least {MIN_SAMPLES_PER_SEGMENT} are required",
                self.min_segment_width()
            )));
        }
        Ok(())
    }
}

/// Minimum number of samples the time step must place in the shortest segment.
pub const MIN_SAMPLES_PER_SEGMENT: f64 = 20.0;

/// One kinematic sample of a slider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    /// Time (s).
    pub t: f64,
    /// Cam angle seen by this slider (rad), in `[0, 2π)`.
    pub theta: f64,
    /// Slider displacement `h(θ)` (mm).
    pub x: f64,
    /// Slider velocity `ω·dh/dθ` (mm/s).
    pub v: f64,
    /// True when the sample sits exactly on a segment boundary.
    pub at_boundary: bool,
}

/// Sampled kinematics of one slider, plus the cam geometry needed by the
/// contact models (thrust-sign discontinuities and lobe count).
#[derive(Debug, Clone, PartialEq)]
pub struct SliderTrajectory {
    /// Shaft speed (rad/s).
    pub omega: f64,
    /// Nominal time step (s).
    pub dt: f64,
    /// Phase offset φ added to `ωt` (rad).
    pub phase_offset: f64,
    /// True when sampled on a strictly uniform grid.
    pub uniform: bool,
    /// Samples per cycle for uniform trajectories.
    pub samples_per_cycle: Option<usize>,
    /// The samples, ascending in time.
    pub samples: Vec<TrajectorySample>,
    /// Thrust-sign discontinuities of the driving profile.
    pub sign_jumps: Vec<SignJump>,
    /// Lobe count of the driving profile.
    pub jump_count: u32,
}
