//! Dynamic wave/particle switching: `phi_x` is swept by a triangle wave
//! while `phi_s` jumps between a closed and an open setting every toggle
//! period. Counts are binned in fixed time buckets.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::rng::{stream_rng, StreamDomain};
use super::{simulate_point, CountModel, DetectorConfig, SourceConfig};
use crate::angle;
use crate::error::{Error, Result};
use crate::optics::{raw_detection_probs, Block, CircuitConfig};

/// Each bucket is integrated in this many slices at the slice-centre phase.
const SLICES_PER_BUCKET: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchPlan {
    pub duration_s: f64,
    pub toggle_period_s: f64,
    pub triangle_period_s: f64,
    pub bucket_s: f64,
    /// `phi_s` during even segments.
    #[serde(deserialize_with = "angle::deserialize")]
    pub phi_s_low: f64,
    /// `phi_s` during odd segments.
    #[serde(deserialize_with = "angle::deserialize")]
    pub phi_s_high: f64,
    /// Peak of the `phi_x` triangle; it runs `0 -> amplitude -> 0`.
    #[serde(deserialize_with = "angle::deserialize")]
    pub phi_x_amplitude: f64,
    /// As for sweeps, absent means 1 for the ideal model and the default otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<f64>,
}

impl Default for SwitchPlan {
    fn default() -> Self {
        Self {
            duration_s: 72.0,
            toggle_period_s: 18.0,
            triangle_period_s: 6.0,
            bucket_s: 0.25,
            phi_s_low: 0.0,
            phi_s_high: FRAC_PI_2,
            phi_x_amplitude: TAU,
            coherence: None,
        }
    }
}

fn is_multiple(whole: f64, part: f64) -> bool {
    let r = whole / part;
    (r - r.round()).abs() <= 1e-9 * r.max(1.0)
}

impl SwitchPlan {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        for (name, v) in [
            ("duration_s", self.duration_s),
            ("toggle_period_s", self.toggle_period_s),
            ("triangle_period_s", self.triangle_period_s),
            ("bucket_s", self.bucket_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err((name, format!("must be > 0, got {v}")));
            }
        }
        if !is_multiple(self.toggle_period_s, self.bucket_s) {
            return Err((
                "bucket_s",
                format!("must divide toggle_period_s ({})", self.toggle_period_s),
            ));
        }
        if !is_multiple(self.duration_s, self.bucket_s) {
            return Err((
                "bucket_s",
                format!("must divide duration_s ({})", self.duration_s),
            ));
        }
        for (name, v) in [
            ("phi_s_low", self.phi_s_low),
            ("phi_s_high", self.phi_s_high),
            ("phi_x_amplitude", self.phi_x_amplitude),
        ] {
            if !v.is_finite() {
                return Err((name, format!("must be finite, got {v}")));
            }
        }
        if let Some(g) = self.coherence.filter(|g| !(0.0..=1.0).contains(g)) {
            return Err(("coherence", format!("must be in [0, 1], got {g}")));
        }
        Ok(())
    }

    pub fn bucket_count(&self) -> usize {
        (self.duration_s / self.bucket_s).round() as usize
    }

    /// `phi_s` in force at time `t`.
    pub fn phi_s_at(&self, t: f64) -> f64 {
        if ((t / self.toggle_period_s).floor() as u64).is_multiple_of(2) {
            self.phi_s_low
        } else {
            self.phi_s_high
        }
    }

    pub fn phi_x_at(&self, t: f64) -> f64 {
        self.phi_x_amplitude * triangle_wave(t / self.triangle_period_s)
    }
}

/// Unit triangle wave: 0 at integers, 1 at half-integers.
pub fn triangle_wave(cycles: f64) -> f64 {
    let frac = cycles - cycles.floor();
    1.0 - (2.0 * frac - 1.0).abs()
}

/// Counts in one time bucket. `t` is the bucket start, `phi_x` its centre phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSeriesPoint {
    pub t: f64,
    pub phi_s: f64,
    pub phi_x: f64,
    pub n1: f64,
    pub n2: f64,
}

impl TimeSeriesPoint {
    pub fn total(&self) -> f64 {
        self.n1 + self.n2
    }

    /// Fraction of clicks on D1, `None` without clicks.
    pub fn p1(&self) -> Option<f64> {
        (self.total() > 0.0).then(|| self.n1 / self.total())
    }
}

/// Both paths open throughout; only `phi_s` and `phi_x` change. Bucket `k`
/// draws from its own substream of `seed`.
pub fn run_dynamic_switch(
    plan: &SwitchPlan,
    src: &SourceConfig,
    det: &DetectorConfig,
    model: CountModel,
    seed: u64,
) -> Result<Vec<TimeSeriesPoint>> {
    plan.validate()
        .map_err(|(field, msg)| Error::Precondition(format!("{field}: {msg}")))?;
    let pulses_per_bucket = (src.rep_rate * plan.bucket_s).round() as u64;
    let base = pulses_per_bucket / SLICES_PER_BUCKET;
    let extra = pulses_per_bucket % SLICES_PER_BUCKET;
    let slice_dt = plan.bucket_s / SLICES_PER_BUCKET as f64;
    let coherence = plan.coherence.unwrap_or(match model {
        CountModel::Ideal => 1.0,
        _ => super::DEFAULT_COHERENCE,
    });

    (0..plan.bucket_count())
        .map(|k| {
            let t = k as f64 * plan.bucket_s;
            let phi_s = plan.phi_s_at(t + 0.5 * plan.bucket_s);
            let mut rng = stream_rng(seed, StreamDomain::Switch, k as u64);
            let (mut n1, mut n2) = (0.0, 0.0);
            for j in 0..SLICES_PER_BUCKET {
                let pulses = base + u64::from(j < extra);
                let phi_x = plan.phi_x_at(t + (j as f64 + 0.5) * slice_dt);
                let cfg = CircuitConfig::new(phi_x, phi_s, Block::None, coherence)?;
                let (a, b) = match model {
                    CountModel::Ideal => {
                        let p = raw_detection_probs(&cfg);
                        (pulses as f64 * p.p1, pulses as f64 * p.p2)
                    }
                    CountModel::Binomial => {
                        let (a, b) = simulate_point(&cfg, src, det, pulses, &mut rng);
                        (a as f64, b as f64)
                    }
                    CountModel::PhotonLevel => {
                        let c = super::simulate_point_photons(&cfg, src, det, pulses, &mut rng);
                        (c.n1 as f64, c.n2 as f64)
                    }
                };
                n1 += a;
                n2 += b;
            }
            Ok(TimeSeriesPoint {
                t,
                phi_s,
                phi_x: plan.phi_x_at(t + 0.5 * plan.bucket_s),
                n1,
                n2,
            })
        })
        .collect()
}

/// A maximal run of buckets sharing one `phi_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub phi_s: f64,
    pub start: f64,
    pub end: f64,
    pub first_bucket: usize,
    pub buckets: usize,
    pub n1: f64,
    pub n2: f64,
}

pub fn segments(series: &[TimeSeriesPoint], bucket_s: f64) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (k, p) in series.iter().enumerate() {
        match out.last_mut() {
            Some(s) if s.phi_s == p.phi_s => {
                s.end = p.t + bucket_s;
                s.buckets += 1;
                s.n1 += p.n1;
                s.n2 += p.n2;
            }
            _ => out.push(Segment {
                phi_s: p.phi_s,
                start: p.t,
                end: p.t + bucket_s,
                first_bucket: k,
                buckets: 1,
                n1: p.n1,
                n2: p.n2,
            }),
        }
    }
    out
}
