//! Demonstration traces: phase segmentation, per-user summaries, cohort
//! statistics and the transfer-function gains derived from them.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::geometry::{MisalignmentAngles, Pose, Vec3};
use crate::impedance::Wiring;
use crate::{stats, ContactPhase, Error, Result, SAMPLE_PERIOD};

/// Sensor range of the force channels, N.
pub const FORCE_RANGE: f64 = 150.0;
/// Sensor range of the torque channels, N·m.
pub const TORQUE_RANGE: f64 = 15.0;
/// Smoothed |F_z| above which the charger counts as in contact, N.
pub const CONTACT_FORCE_MIN: f64 = 10.0;
/// Width of the centered moving average applied before thresholding.
pub const SMOOTHING_WINDOW: usize = 5;
/// Longest accepted delay between a force reversal and the matching
/// velocity reversal, s.
pub const RESPONSE_WINDOW: f64 = 1.0;
const FORCE_DEADBAND: f64 = 1.0;
const RATE_DEADBAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSample {
    /// s
    pub t: f64,
    /// N, charger end-effector frame
    pub force: Vec3,
    /// N·m
    pub torque: Vec3,
    /// Charger in the socket frame.
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoTrace {
    user_id: String,
    samples: Vec<DemoSample>,
}

impl DemoTrace {
    /// Validates timing and sensor ranges.
    pub fn new(user_id: impl Into<String>, samples: Vec<DemoSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("trace has no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.t.is_finite() {
                return Err(Error::Validation(alloc::format!(
                    "sample {i}: time is not finite"
                )));
            }
            if s.force.iter().any(|f| !(f.abs() <= FORCE_RANGE)) {
                return Err(Error::Validation(alloc::format!(
                    "sample {i}: force outside ±{FORCE_RANGE} N"
                )));
            }
            if s.torque.iter().any(|m| !(m.abs() <= TORQUE_RANGE)) {
                return Err(Error::Validation(alloc::format!(
                    "sample {i}: torque outside ±{TORQUE_RANGE} N·m"
                )));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::Validation(alloc::format!(
                "time not strictly increasing at sample {}",
                i + 1
            )));
        }
        if samples.len() > 1 {
            let gaps: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
            let median = stats::median(&gaps);
            if (median - SAMPLE_PERIOD).abs() > 0.2 * SAMPLE_PERIOD {
                return Err(Error::Validation(alloc::format!(
                    "median sample interval {median} s is not within 20% of {SAMPLE_PERIOD} s"
                )));
            }
        }
        Ok(Self {
            user_id: user_id.into(),
            samples,
        })
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn samples(&self) -> &[DemoSample] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn force_axis(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.force[axis]).collect()
    }

    pub fn misalignment(&self) -> Result<Vec<MisalignmentAngles>> {
        self.samples.iter().map(|s| s.pose.misalignment()).collect()
    }

    /// Indices of samples with `t` inside `[start, end]`.
    fn index_range(&self, interval: [f64; 2]) -> core::ops::Range<usize> {
        let lo = self.samples.partition_point(|s| s.t < interval[0]);
        let hi = self.samples.partition_point(|s| s.t <= interval[1]);
        lo..hi.max(lo)
    }
}

/// Plug-in and plug-out intervals, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSegmentation {
    pub plug_in: [f64; 2],
    pub plug_out: [f64; 2],
}

impl PhaseSegmentation {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.plug_in;
        let [c, d] = self.plug_out;
        if !(a <= b && b < c && c <= d) {
            return Err(Error::invalid(
                "phase intervals must be ordered plug-in then plug-out",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSummary {
    /// rad
    pub delta_theta_x: f64,
    /// rad
    pub delta_theta_y: f64,
    /// N
    pub delta_f_x: f64,
    /// N
    pub delta_f_y: f64,
    /// N, negative
    pub f_z_plug_in: f64,
    /// N, positive
    pub f_z_plug_out: f64,
    /// s; `None` when the trace holds no force/velocity reversal pair.
    pub t_response: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub mean: f64,
    /// Maximum, or minimum for the plug-in force.
    pub extremum: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortStats {
    pub delta_theta_x: FieldStats,
    pub delta_theta_y: FieldStats,
    pub delta_f_x: FieldStats,
    pub delta_f_y: FieldStats,
    pub f_z_plug_in: FieldStats,
    pub f_z_plug_out: FieldStats,
    /// Over the users with a measured response time.
    pub t_response: Option<FieldStats>,
    pub n_users: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedGains {
    /// rad/N
    pub k_w_rot_x: f64,
    /// rad/N
    pub k_w_rot_y: f64,
    /// mm/N
    pub k_w_lin_z: f64,
    /// N, magnitude
    pub f_z_ref: f64,
}

/// Centered moving average; the window shrinks at the ends.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            stats::mean(&values[lo..hi])
        })
        .collect()
}

/// Index ranges where `pred` holds on consecutive samples.
fn runs(values: &[f64], pred: impl Fn(f64) -> bool) -> Vec<core::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, v) in values.iter().enumerate() {
        match (pred(*v), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..values.len());
    }
    out
}

/// Longest run of `smoothed` satisfying `pred`, narrowed to the first and
/// last raw samples that satisfy it too.
fn contact_run(
    raw: &[f64],
    smoothed: &[f64],
    from: usize,
    pred: impl Fn(f64) -> bool + Copy,
) -> Option<core::ops::Range<usize>> {
    let best = runs(&smoothed[from..], pred)
        .into_iter()
        .map(|r| r.start + from..r.end + from)
        .fold(None::<core::ops::Range<usize>>, |best, r| match best {
            Some(b) if b.len() >= r.len() => Some(b),
            _ => Some(r),
        })?;
    let first = raw[best.clone()].iter().position(|v| pred(*v));
    let last = raw[best.clone()].iter().rposition(|v| pred(*v));
    match (first, last) {
        (Some(a), Some(b)) => Some(best.start + a..best.start + b + 1),
        _ => Some(best),
    }
}

pub fn detect_phases(trace: &DemoTrace) -> Result<PhaseSegmentation> {
    let t = trace.times();
    let f_z = trace.force_axis(2);
    let smoothed = moving_average(&f_z, SMOOTHING_WINDOW);
    let plug_in = contact_run(&f_z, &smoothed, 0, |f| f < -CONTACT_FORCE_MIN)
        .ok_or(Error::MissingPhase(ContactPhase::PlugIn))?;
    let plug_out = contact_run(&f_z, &smoothed, plug_in.end, |f| f > CONTACT_FORCE_MIN)
        .ok_or(Error::MissingPhase(ContactPhase::PlugOut))?;
    Ok(PhaseSegmentation {
        plug_in: [t[plug_in.start], t[plug_in.end - 1]],
        plug_out: [t[plug_out.start], t[plug_out.end - 1]],
    })
}

fn range_of(values: impl IntoIterator<Item = f64>) -> f64 {
    stats::min_max(values).map_or(0.0, |(lo, hi)| hi - lo)
}

/// Ranges over both contact phases, median axial force per phase, and the
/// cross-axis response time.
pub fn summarize_user(trace: &DemoTrace, phases: &PhaseSegmentation) -> Result<UserSummary> {
    summarize_user_with(trace, phases, Wiring::CrossAxis)
}

pub fn summarize_user_with(
    trace: &DemoTrace,
    phases: &PhaseSegmentation,
    wiring: Wiring,
) -> Result<UserSummary> {
    phases.validate()?;
    let inside = trace.index_range(phases.plug_in);
    let outside = trace.index_range(phases.plug_out);
    if inside.is_empty() {
        return Err(Error::MissingPhase(ContactPhase::PlugIn));
    }
    if outside.is_empty() {
        return Err(Error::MissingPhase(ContactPhase::PlugOut));
    }
    let samples = trace.samples();
    let contact: Vec<&DemoSample> = samples[inside.clone()]
        .iter()
        .chain(&samples[outside.clone()])
        .collect();
    let angles: Vec<MisalignmentAngles> = contact
        .iter()
        .map(|s| s.pose.misalignment())
        .collect::<Result<_>>()?;
    let f_z_median = |r: core::ops::Range<usize>| {
        let v: Vec<f64> = samples[r].iter().map(|s| s.force[2]).collect();
        stats::median(&v)
    };
    let t_response = match response_time_with(trace, wiring) {
        Ok(t) => Some(t),
        Err(Error::NoResponseEvent) => None,
        Err(e) => return Err(e),
    };
    Ok(UserSummary {
        delta_theta_x: range_of(angles.iter().map(|a| a.theta_x)),
        delta_theta_y: range_of(angles.iter().map(|a| a.theta_y)),
        delta_f_x: range_of(contact.iter().map(|s| s.force[0])),
        delta_f_y: range_of(contact.iter().map(|s| s.force[1])),
        f_z_plug_in: f_z_median(inside),
        f_z_plug_out: f_z_median(outside),
        t_response,
    })
}

/// Times at which `values` changes sign, ignoring excursions inside the
/// deadband. Each time is the interpolated zero crossing nearest the sample
/// that confirmed the new sign.
fn sign_flips(t: &[f64], values: &[f64], deadband: f64) -> Vec<f64> {
    let mut flips = Vec::new();
    let mut last: Option<(bool, usize)> = None;
    for (i, v) in values.iter().enumerate() {
        if !(v.abs() > deadband) {
            continue;
        }
        let positive = *v > 0.0;
        if let Some((was_positive, j)) = last {
            if was_positive != positive {
                let s = if positive { 1.0 } else { -1.0 };
                let k = (j + 1..=i)
                    .rev()
                    .find(|&k| values[k - 1] * s <= 0.0)
                    .unwrap_or(j + 1);
                let (v0, v1) = (values[k - 1], values[k]);
                flips.push(t[k - 1] + (t[k] - t[k - 1]) * v0 / (v0 - v1));
            }
        }
        last = Some((positive, i));
    }
    flips
}

/// Central-difference derivative, one-sided at the ends.
pub fn differentiate(t: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return alloc::vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (values[b] - values[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Median delay between a reversal of the (smoothed) lateral force and the
/// next reversal of the paired angular velocity, using cross-axis pairing.
pub fn response_time(trace: &DemoTrace) -> Result<f64> {
    response_time_with(trace, Wiring::CrossAxis)
}

pub fn response_time_with(trace: &DemoTrace, wiring: Wiring) -> Result<f64> {
    let samples = trace.samples();
    let span = match detect_phases(trace) {
        Ok(p) => trace.index_range([p.plug_in[0], p.plug_out[1]]),
        Err(_) => 0..samples.len(),
    };
    let samples = &samples[span];
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let angles: Vec<MisalignmentAngles> = samples
        .iter()
        .map(|s| s.pose.misalignment())
        .collect::<Result<_>>()?;
    let theta_x: Vec<f64> = angles.iter().map(|a| a.theta_x).collect();
    let theta_y: Vec<f64> = angles.iter().map(|a| a.theta_y).collect();
    let force = |axis: usize| {
        let raw: Vec<f64> = samples.iter().map(|s| s.force[axis]).collect();
        moving_average(&raw, SMOOTHING_WINDOW)
    };
    let pairs = match wiring {
        Wiring::CrossAxis => [(force(1), theta_x), (force(0), theta_y)],
        Wiring::SameAxis => [(force(0), theta_x), (force(1), theta_y)],
    };

    let mut delays = Vec::new();
    for (f, theta) in &pairs {
        let force_flips = sign_flips(&t, f, FORCE_DEADBAND);
        let rate_flips = sign_flips(&t, &differentiate(&t, theta), RATE_DEADBAND);
        for tf in force_flips {
            let next = rate_flips.iter().find(|&&tv| tv >= tf - 1e-9);
            if let Some(&tv) = next {
                if tv - tf <= RESPONSE_WINDOW + 1e-9 {
                    delays.push((tv - tf).max(0.0));
                }
            }
        }
    }
    if delays.is_empty() {
        return Err(Error::NoResponseEvent);
    }
    Ok(stats::median(&delays))
}

fn field(values: &[f64], minimum: bool) -> FieldStats {
    let (lo, hi) = stats::min_max(values.iter().copied()).unwrap_or((f64::NAN, f64::NAN));
    FieldStats {
        mean: stats::mean(values),
        extremum: if minimum { lo } else { hi },
        std: stats::std_dev(values),
    }
}

pub fn aggregate(summaries: &[UserSummary]) -> Result<CohortStats> {
    if summaries.is_empty() {
        return Err(Error::invalid("no user summaries to aggregate"));
    }
    let col = |f: fn(&UserSummary) -> f64| summaries.iter().map(f).collect::<Vec<f64>>();
    let responses: Vec<f64> = summaries.iter().filter_map(|s| s.t_response).collect();
    Ok(CohortStats {
        delta_theta_x: field(&col(|s| s.delta_theta_x), false),
        delta_theta_y: field(&col(|s| s.delta_theta_y), false),
        delta_f_x: field(&col(|s| s.delta_f_x), false),
        delta_f_y: field(&col(|s| s.delta_f_y), false),
        f_z_plug_in: field(&col(|s| s.f_z_plug_in), true),
        f_z_plug_out: field(&col(|s| s.f_z_plug_out), false),
        t_response: (!responses.is_empty()).then(|| field(&responses, false)),
        n_users: summaries.len(),
    })
}

/// Gains from cohort means with cross-axis pairing.
pub fn derive_gains(stats: &CohortStats, d_depth: f64) -> Result<DerivedGains> {
    derive_gains_with(stats, d_depth, Wiring::CrossAxis)
}

pub fn derive_gains_with(
    stats: &CohortStats,
    d_depth: f64,
    wiring: Wiring,
) -> Result<DerivedGains> {
    if !(d_depth.is_finite() && d_depth > 0.0) {
        return Err(Error::invalid(alloc::format!(
            "socket depth must be positive, got {d_depth}"
        )));
    }
    let (f_for_x, f_for_y) = match wiring {
        Wiring::CrossAxis => (stats.delta_f_y.mean, stats.delta_f_x.mean),
        Wiring::SameAxis => (stats.delta_f_x.mean, stats.delta_f_y.mean),
    };
    let ratio = |num: f64, den: f64, what| {
        if den == 0.0 {
            Err(Error::DegenerateStats(what))
        } else {
            Ok(num / den)
        }
    };
    let f_z_ref = stats
        .f_z_plug_in
        .mean
        .abs()
        .min(stats.f_z_plug_out.mean.abs());
    Ok(DerivedGains {
        k_w_rot_x: ratio(
            stats.delta_theta_x.mean,
            f_for_x,
            "lateral force range for the x rotation",
        )?,
        k_w_rot_y: ratio(
            stats.delta_theta_y.mean,
            f_for_y,
            "lateral force range for the y rotation",
        )?,
        k_w_lin_z: ratio(d_depth, f_z_ref, "axial reference force")?,
        f_z_ref,
    })
}

/// Rotation whose charger axis projects to exactly `theta`.
fn rotation_projecting_to(theta: MisalignmentAngles) -> crate::geometry::Rotation {
    let a = libm::atan(libm::tan(theta.theta_x) * libm::cos(theta.theta_y));
    MisalignmentAngles::new(a, theta.theta_y).to_rotation()
}

/// Oscillation period of the synthetic lateral motion, s.
const SYNTH_PERIOD: f64 = 2.0;
const SYNTH_RAMP: usize = 10;
const SYNTH_DEPTH: f64 = 34.8;

/// Builds a noise-free 100 Hz trace whose summary reproduces `targets`.
///
/// Both angles oscillate sinusoidally with the target ranges. Each lateral
/// force leads the angular velocity it drives by `t_response`, so the force
/// reversals precede the velocity reversals by exactly that delay. The seed
/// picks phase durations and oscillation phases.
pub fn generate_synthetic_demo(targets: &UserSummary, seed: u64) -> Result<DemoTrace> {
    let t_r = targets
        .t_response
        .ok_or_else(|| Error::invalid("a synthetic demo needs a response time"))?;
    if !(t_r > 0.0 && t_r < SYNTH_PERIOD / 2.0) {
        return Err(Error::invalid(alloc::format!(
            "response time must be in (0, {} s), got {t_r}",
            SYNTH_PERIOD / 2.0
        )));
    }
    let deltas = [
        targets.delta_theta_x,
        targets.delta_theta_y,
        targets.delta_f_x,
        targets.delta_f_y,
    ];
    if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::invalid("ranges must be non-negative"));
    }
    if targets.delta_theta_x.max(targets.delta_theta_y) >= core::f64::consts::FRAC_PI_4 {
        return Err(Error::invalid("angle ranges must stay below 45 degrees"));
    }
    if targets.delta_f_x.max(targets.delta_f_y) > FORCE_RANGE {
        return Err(Error::invalid(
            "lateral force ranges exceed the sensor range",
        ));
    }
    for (f, sign) in [(targets.f_z_plug_in, -1.0), (targets.f_z_plug_out, 1.0)] {
        if !(f * sign > 2.0 * CONTACT_FORCE_MIN && f.abs() <= FORCE_RANGE) {
            return Err(Error::invalid(alloc::format!(
                "axial force {f} N is not a usable contact level"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |lo: usize, hi: usize| {
        Uniform::new_inclusive(lo, hi)
            .map(|u| u.sample(&mut rng))
            .unwrap_or(lo)
    };
    let lead = 50;
    let plug_in = pick(300, 350);
    let gap = pick(50, 100);
    let plug_out = pick(300, 350);
    let tail = 50;
    let period = libm::round(SYNTH_PERIOD / SAMPLE_PERIOD) as usize;
    let phase_x = pick(0, period - 1) as f64 * SAMPLE_PERIOD;
    let phase_y = pick(0, period - 1) as f64 * SAMPLE_PERIOD;

    let w = 2.0 * core::f64::consts::PI / SYNTH_PERIOD;
    let a = [targets.delta_theta_x / 2.0, targets.delta_theta_y / 2.0];
    let b = [targets.delta_f_x / 2.0, targets.delta_f_y / 2.0];
    let in_start = lead;
    let out_start = lead + plug_in + gap;
    let n = out_start + plug_out + tail;

    let level = |i: usize, start: usize, len: usize, f: f64| {
        if i < start || i >= start + len {
            return 0.0;
        }
        let k = (i - start).min(start + len - 1 - i);
        f * (k as f64 / SYNTH_RAMP as f64).min(1.0)
    };
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * SAMPLE_PERIOD;
        // θ = A·sin(w(t − φ)); the paired force is −B·cos(w(t + t_r − φ)).
        let theta_x = a[0] * libm::sin(w * (t - phase_x));
        let theta_y = a[1] * libm::sin(w * (t - phase_y));
        let f_y = -b[1] * libm::cos(w * (t + t_r - phase_x));
        let f_x = b[0] * libm::cos(w * (t + t_r - phase_y));
        let f_z = level(i, in_start, plug_in, targets.f_z_plug_in)
            + level(i, out_start, plug_out, targets.f_z_plug_out);
        let depth = if i < in_start {
            0.0
        } else if i < in_start + plug_in {
            SYNTH_DEPTH * (i - in_start) as f64 / plug_in as f64
        } else if i < out_start {
            SYNTH_DEPTH
        } else if i < out_start + plug_out {
            SYNTH_DEPTH * (1.0 - (i - out_start) as f64 / plug_out as f64)
        } else {
            0.0
        };
        let pose = Pose::new(
            rotation_projecting_to(MisalignmentAngles::new(theta_x, theta_y)),
            [0.0, 0.0, depth],
        )?;
        samples.push(DemoSample {
            t,
            force: [f_x, f_y, f_z],
            torque: [0.0; 3],
            pose,
        });
    }
    DemoTrace::new(alloc::format!("synthetic-{seed}"), samples)
}
