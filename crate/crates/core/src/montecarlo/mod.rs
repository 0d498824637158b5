//! Photon-counting Monte Carlo of the interferometer driven by weak coherent
//! pulses.
//!
//! Click model: the source emits Poisson(`mu`) photons per pulse, each
//! photon survives with probability `efficiency * 10^(-loss/10)` and then
//! lands on D1 or D2 by the Born probabilities. Poisson thinning makes the
//! two detectors independent, so per pulse detector `j` clicks with
//! probability `1 - exp(-mu_eff * p_j) + dark` and counts over a cell are
//! binomial. [`simulate_point_photons`] samples the same process photon by
//! photon and serves as a cross-check.
//!
//! Both outputs are read by one gated detector (D1 delayed into the early
//! gate, D2 into the late one); with afterpulsing neglected that is a pure
//! relabeling, see [`TimeMultiplexedReadout`].

mod rng;
mod switching;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};
use crate::estimators::{FringePoint, FringeScan};
use crate::optics::{raw_detection_probs, Block, CircuitConfig};

pub use rng::{cell_rng, stream_rng, CellId, StreamDomain};
pub use switching::{
    run_dynamic_switch, segments, triangle_wave, Segment, SwitchPlan, TimeSeriesPoint,
};

/// Weak coherent source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Pulse repetition rate in Hz.
    pub rep_rate: f64,
    /// Pulse width in seconds.
    pub pulse_width: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mu: 0.2,
            rep_rate: 150e3,
            pulse_width: 40e-9,
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(("mu", format!("must be > 0, got {}", self.mu)));
        }
        if !(self.rep_rate.is_finite() && self.rep_rate > 0.0) {
            return Err(("rep_rate", format!("must be > 0, got {}", self.rep_rate)));
        }
        if !(self.pulse_width.is_finite() && self.pulse_width > 0.0) {
            return Err((
                "pulse_width",
                format!("must be > 0, got {}", self.pulse_width),
            ));
        }
        Ok(())
    }

    /// Probability that a pulse carries two or more photons.
    pub fn multi_photon_probability(&self) -> f64 {
        1.0 - (-self.mu).exp() * (1.0 + self.mu)
    }
}

/// Gated single-photon detector and the optical loss in front of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub efficiency: f64,
    pub system_loss_db: f64,
    /// Gate width in seconds.
    pub gate_width: f64,
    /// Dark-count probability per gate.
    pub dark_prob: f64,
    /// Delay between the early and late gates, in seconds.
    pub multiplex_delay: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 0.10,
            system_loss_db: 12.0,
            gate_width: 3e-9,
            dark_prob: 0.0,
            multiplex_delay: 1.25e-6,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err((
                "efficiency",
                format!("must be in (0, 1], got {}", self.efficiency),
            ));
        }
        if !(self.system_loss_db.is_finite() && self.system_loss_db >= 0.0) {
            return Err((
                "system_loss_db",
                format!("must be >= 0, got {}", self.system_loss_db),
            ));
        }
        if !(self.gate_width.is_finite() && self.gate_width > 0.0) {
            return Err((
                "gate_width",
                format!("must be > 0, got {}", self.gate_width),
            ));
        }
        if !(0.0..=1.0).contains(&self.dark_prob) {
            return Err((
                "dark_prob",
                format!("must be in [0, 1], got {}", self.dark_prob),
            ));
        }
        if !(self.multiplex_delay.is_finite() && self.multiplex_delay >= 0.0) {
            return Err((
                "multiplex_delay",
                format!("must be >= 0, got {}", self.multiplex_delay),
            ));
        }
        Ok(())
    }

    /// Fraction of emitted photons that reach the detector and register.
    pub fn transmission(&self) -> f64 {
        self.efficiency * 10f64.powf(-self.system_loss_db / 10.0)
    }
}

/// Mean number of detected photons per pulse if all light reached one port.
pub fn effective_mean(src: &SourceConfig, det: &DetectorConfig) -> f64 {
    src.mu * det.transmission()
}

/// Per-pulse click probability for a port receiving fraction `p_raw` of the light.
pub fn click_probability(mu_eff: f64, p_raw: f64, dark_prob: f64) -> f64 {
    // 1 - exp(-x) without cancellation for small x
    (-(-mu_eff * p_raw).exp_m1() + dark_prob).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSlot {
    Early,
    Late,
}

/// Single-detector readout of both outputs: D1 goes through the fiber
/// delay into the early gate, D2 into the late gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMultiplexedReadout {
    pub delay: f64,
    pub gate_width: f64,
}

impl TimeMultiplexedReadout {
    pub fn new(det: &DetectorConfig) -> Self {
        Self {
            delay: det.multiplex_delay,
            gate_width: det.gate_width,
        }
    }

    pub fn slot_for(detector_index: usize) -> GateSlot {
        if detector_index == 0 {
            GateSlot::Early
        } else {
            GateSlot::Late
        }
    }

    /// Maps per-gate counts back to `(n1, n2)`.
    pub fn assign(early: u64, late: u64) -> (u64, u64) {
        (early, late)
    }

    /// Both gates must fit inside one repetition period.
    pub fn max_rep_rate(&self) -> f64 {
        1.0 / (self.delay + self.gate_width)
    }

    /// Gate opening times `(early, late)` for pulse `index`.
    pub fn gate_times(&self, index: u64, rep_rate: f64) -> (f64, f64) {
        let t0 = index as f64 / rep_rate;
        (t0, t0 + self.delay)
    }
}

/// Checks that the two multiplexed gates fit in one repetition period.
pub fn check_timing(src: &SourceConfig, det: &DetectorConfig) -> Result<()> {
    let readout = TimeMultiplexedReadout::new(det);
    if src.rep_rate > readout.max_rep_rate() {
        return Err(Error::Precondition(format!(
            "repetition rate {} Hz leaves no room for both gates (max {} Hz)",
            src.rep_rate,
            readout.max_rep_rate()
        )));
    }
    Ok(())
}

/// Per-pulse click probabilities `(D1, D2)` for one circuit setting.
pub fn click_probabilities(
    cfg: &CircuitConfig,
    src: &SourceConfig,
    det: &DetectorConfig,
) -> (f64, f64) {
    let p = raw_detection_probs(cfg);
    let mu_eff = effective_mean(src, det);
    (
        click_probability(mu_eff, p.p1, det.dark_prob),
        click_probability(mu_eff, p.p2, det.dark_prob),
    )
}

/// Expected counts `(D1, D2)` over `pulses` pulses.
pub fn expected_counts(
    cfg: &CircuitConfig,
    src: &SourceConfig,
    det: &DetectorConfig,
    pulses: u64,
) -> (f64, f64) {
    let (c1, c2) = click_probabilities(cfg, src, det);
    (pulses as f64 * c1, pulses as f64 * c2)
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    Binomial::new(n, p)
        .expect("click probability lies in [0, 1]")
        .sample(rng)
}

/// Counts `(n1, n2)` at one setting over `pulses` pulses.
pub fn simulate_point<R: Rng + ?Sized>(
    cfg: &CircuitConfig,
    src: &SourceConfig,
    det: &DetectorConfig,
    pulses: u64,
    rng: &mut R,
) -> (u64, u64) {
    let (c1, c2) = click_probabilities(cfg, src, det);
    let early = binomial(rng, pulses, c1);
    let late = binomial(rng, pulses, c2);
    TimeMultiplexedReadout::assign(early, late)
}

/// Photon-by-photon counts for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhotonCounts {
    pub n1: u64,
    pub n2: u64,
    /// Pulses that left the source with two or more photons.
    pub multi_photon_pulses: u64,
}

/// Samples every pulse explicitly: Poisson photon number, loss, Born routing.
///
/// Dark counts are independent per gate here, which agrees with the additive
/// rule used by [`simulate_point`] to first order in `dark_prob`.
pub fn simulate_point_photons<R: Rng + ?Sized>(
    cfg: &CircuitConfig,
    src: &SourceConfig,
    det: &DetectorConfig,
    pulses: u64,
    rng: &mut R,
) -> PhotonCounts {
    let p = raw_detection_probs(cfg);
    let eta = det.transmission();
    let (to_d1, to_d2) = (eta * p.p1, eta * (p.p1 + p.p2));
    let poisson = Poisson::new(src.mu).expect("mu > 0");
    let mut out = PhotonCounts::default();
    for _ in 0..pulses {
        let photons = poisson.sample(rng) as u64;
        if photons >= 2 {
            out.multi_photon_pulses += 1;
        }
        let (mut hit1, mut hit2) = (false, false);
        for _ in 0..photons {
            let u: f64 = rng.random();
            if u < to_d1 {
                hit1 = true;
            } else if u < to_d2 {
                hit2 = true;
            }
        }
        if det.dark_prob > 0.0 {
            hit1 |= rng.random::<f64>() < det.dark_prob;
            hit2 |= rng.random::<f64>() < det.dark_prob;
        }
        out.n1 += hit1 as u64;
        out.n2 += hit2 as u64;
    }
    out
}

/// Sampled multi-photon statistics of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiPhotonSample {
    pub pulses: u64,
    pub multi_photon_pulses: u64,
}

impl MultiPhotonSample {
    pub fn fraction(&self) -> f64 {
        self.multi_photon_pulses as f64 / self.pulses as f64
    }

    /// Binomial standard error of [`Self::fraction`] around `expected`.
    pub fn sigma(&self, expected: f64) -> f64 {
        (expected * (1.0 - expected) / self.pulses as f64).sqrt()
    }
}

/// Draws the photon number of `pulses` pulses and counts the multi-photon ones.
pub fn sample_multi_photon<R: Rng + ?Sized>(
    src: &SourceConfig,
    pulses: u64,
    rng: &mut R,
) -> MultiPhotonSample {
    let poisson = Poisson::new(src.mu).expect("mu > 0");
    let multi = (0..pulses).filter(|_| poisson.sample(rng) >= 2.0).count() as u64;
    MultiPhotonSample {
        pulses,
        multi_photon_pulses: multi,
    }
}

/// `steps` evenly spaced phases from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    #[serde(deserialize_with = "angle::deserialize")]
    pub start: f64,
    #[serde(deserialize_with = "angle::deserialize")]
    pub stop: f64,
    pub steps: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: std::f64::consts::TAU,
            steps: 33,
        }
    }
}

impl PhaseGrid {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let t = k as f64 / last;
                self.start + (self.stop - self.start) * t
            })
            .collect()
    }
}

/// `count` evenly spaced values on `[0, pi/2]`.
pub fn quarter_turn_settings(count: usize) -> Vec<f64> {
    let last = (count.max(2) - 1) as f64;
    (0..count)
        .map(|k| k as f64 * std::f64::consts::FRAC_PI_2 / last)
        .collect()
}

fn default_phi_s_values() -> Vec<f64> {
    quarter_turn_settings(9)
}

fn default_blocks() -> Vec<Block> {
    Block::ALL.to_vec()
}

/// What to measure: the `(phi_s, block, phi_x)` grid and how long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunPlan {
    #[serde(deserialize_with = "angle::deserialize_vec")]
    pub phi_s_values: Vec<f64>,
    pub phi_x_grid: PhaseGrid,
    pub blocks: Vec<Block>,
    pub pulses_per_point: u64,
    /// Interference contrast of the mode-to-path mapping. When absent the
    /// ideal model uses 1 and the sampled models [`DEFAULT_COHERENCE`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<f64>,
    pub seed: u64,
}

/// 0.8 s of integration at 150 kHz.
pub const DEFAULT_PULSES_PER_POINT: u64 = 120_000;

/// Highest visibility reached by the physical setup, used as default coherence.
pub const DEFAULT_COHERENCE: f64 = 0.967;

pub const DEFAULT_SEED: u64 = 20_240_517;

impl Default for RunPlan {
    fn default() -> Self {
        Self {
            phi_s_values: default_phi_s_values(),
            phi_x_grid: PhaseGrid::default(),
            blocks: default_blocks(),
            pulses_per_point: DEFAULT_PULSES_PER_POINT,
            coherence: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl RunPlan {
    /// Checks every field, reporting the offending field name on failure.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.phi_s_values.is_empty() {
            return Err(("phi_s_values", "must not be empty".into()));
        }
        if let Some(x) = self.phi_s_values.iter().find(|x| !x.is_finite()) {
            return Err(("phi_s_values", format!("non-finite phase {x}")));
        }
        let g = &self.phi_x_grid;
        if g.steps < 2 {
            return Err(("phi_x_grid.steps", format!("must be >= 2, got {}", g.steps)));
        }
        if !(g.start.is_finite() && g.stop.is_finite() && g.stop > g.start) {
            return Err((
                "phi_x_grid",
                format!("need finite start < stop, got [{}, {}]", g.start, g.stop),
            ));
        }
        if self.blocks.is_empty() {
            return Err(("blocks", "must not be empty".into()));
        }
        let mut seen = self.blocks.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.blocks.len() {
            return Err(("blocks", "duplicate block setting".into()));
        }
        if self.pulses_per_point < 1 {
            return Err(("pulses_per_point", "must be >= 1".into()));
        }
        if let Some(g) = self.coherence.filter(|g| !(0.0..=1.0).contains(g)) {
            return Err(("coherence", format!("must be in [0, 1], got {g}")));
        }
        Ok(())
    }

    /// Coherence actually simulated under `model`.
    pub fn coherence_for(&self, model: CountModel) -> f64 {
        self.coherence.unwrap_or(match model {
            CountModel::Ideal => 1.0,
            _ => DEFAULT_COHERENCE,
        })
    }

    fn check(&self) -> Result<()> {
        // pulse count zero is allowed for simulation; only config loading rejects it
        let mut probe = self.clone();
        probe.pulses_per_point = probe.pulses_per_point.max(1);
        probe
            .validate()
            .map_err(|(field, msg)| Error::Precondition(format!("{field}: {msg}")))
    }
}

/// Counts of one `(phi_s, block, phi_x)` cell and where its randomness came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountRecord {
    pub phi_s: f64,
    pub phi_x: f64,
    pub block: Block,
    pub n1: f64,
    pub n2: f64,
    pub pulses: u64,
    pub seed: u64,
    /// ChaCha stream of the cell; `None` for noiseless records.
    pub stream: Option<u64>,
}

/// How cell counts are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountModel {
    /// Binomial clicks per detector.
    #[default]
    Binomial,
    /// Photon-by-photon sampling; slow, for cross-checks.
    PhotonLevel,
    /// Noiseless `pulses * p_raw`, the unit-efficiency ideal device.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    pub model: CountModel,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

struct Cell {
    id: CellId,
    cfg: CircuitConfig,
}

fn cells(plan: &RunPlan, model: CountModel) -> Result<Vec<Cell>> {
    let coherence = plan.coherence_for(model);
    let grid = plan.phi_x_grid.values();
    let mut out = Vec::with_capacity(plan.phi_s_values.len() * plan.blocks.len() * grid.len());
    for (i_s, &phi_s) in plan.phi_s_values.iter().enumerate() {
        for &block in &plan.blocks {
            for (i_x, &phi_x) in grid.iter().enumerate() {
                out.push(Cell {
                    id: CellId::new(i_s, i_x, block)?,
                    cfg: CircuitConfig::new(phi_x, phi_s, block, coherence)?,
                });
            }
        }
    }
    Ok(out)
}

fn record_for(
    cell: &Cell,
    plan: &RunPlan,
    src: &SourceConfig,
    det: &DetectorConfig,
    model: CountModel,
) -> CountRecord {
    let pulses = plan.pulses_per_point;
    let (n1, n2, stream) = match model {
        CountModel::Ideal => {
            let p = raw_detection_probs(&cell.cfg);
            (pulses as f64 * p.p1, pulses as f64 * p.p2, None)
        }
        CountModel::Binomial => {
            let mut rng = cell_rng(plan.seed, StreamDomain::Sweep, cell.id);
            let (a, b) = simulate_point(&cell.cfg, src, det, pulses, &mut rng);
            (
                a as f64,
                b as f64,
                Some(cell.id.stream(StreamDomain::Sweep)),
            )
        }
        CountModel::PhotonLevel => {
            let mut rng = cell_rng(plan.seed, StreamDomain::Sweep, cell.id);
            let c = simulate_point_photons(&cell.cfg, src, det, pulses, &mut rng);
            (
                c.n1 as f64,
                c.n2 as f64,
                Some(cell.id.stream(StreamDomain::Sweep)),
            )
        }
    };
    CountRecord {
        phi_s: cell.cfg.phi_s,
        phi_x: cell.cfg.phi_x,
        block: cell.cfg.block,
        n1,
        n2,
        pulses,
        seed: plan.seed,
        stream,
    }
}

/// Counts for every cell of the plan, ordered by `phi_s`, then block (plan
/// order), then `phi_x`. Each cell draws from its own substream, so the
/// result does not depend on the number of workers.
pub fn sweep_records(
    plan: &RunPlan,
    src: &SourceConfig,
    det: &DetectorConfig,
    opts: SweepOptions,
) -> Result<Vec<CountRecord>> {
    plan.check()?;
    let cells = cells(plan, opts.model)?;
    let work = || -> Vec<CountRecord> {
        cells
            .par_iter()
            .map(|c| record_for(c, plan, src, det, opts.model))
            .collect()
    };
    match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Groups consecutive records of one `(phi_s, block)` pair into scans.
pub fn scans_from_records(records: &[CountRecord], steps: usize) -> Result<Vec<FringeScan>> {
    if steps == 0 {
        return Err(Error::Precondition("phi_x grid has no steps".into()));
    }
    records
        .chunks(steps)
        .map(|chunk| {
            let first = chunk[0];
            let points = chunk
                .iter()
                .map(|r| FringePoint {
                    phi_x: r.phi_x,
                    n1: r.n1,
                    n2: r.n2,
                })
                .collect();
            FringeScan::new(first.phi_s, first.block, points, first.pulses)
        })
        .collect()
}

/// One [`FringeScan`] per `(phi_s, block)` pair of the plan.
pub fn run_sweep(
    plan: &RunPlan,
    src: &SourceConfig,
    det: &DetectorConfig,
    opts: SweepOptions,
) -> Result<Vec<FringeScan>> {
    let records = sweep_records(plan, src, det, opts)?;
    scans_from_records(&records, plan.phi_x_grid.steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn multi_photon_probability_below_two_percent() {
        let p = SourceConfig::default().multi_photon_probability();
        assert_abs_diff_eq!(p, 1.0 - (-0.2f64).exp() * 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(p, 0.01752, epsilon = 1e-5);
        assert!(p < 0.02);
    }

    #[test]
    fn effective_mean_from_defaults() {
        let mu = effective_mean(&SourceConfig::default(), &DetectorConfig::default());
        assert_abs_diff_eq!(mu, 0.2 * 0.1 * 10f64.powf(-1.2), epsilon = 1e-18);
        assert_abs_diff_eq!(mu, 1.262e-3, epsilon = 1e-6);
    }

    #[test]
    fn click_probability_caps_at_one() {
        assert_eq!(click_probability(1e-3, 0.0, 0.0), 0.0);
        assert_eq!(click_probability(50.0, 1.0, 0.5), 1.0);
        assert_abs_diff_eq!(
            click_probability(1e-3, 1.0, 0.0),
            1.0 - (-1e-3f64).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn bright_port_rate() {
        let (src, det) = (SourceConfig::default(), DetectorConfig::default());
        let cfg = CircuitConfig::ideal(FRAC_PI_2, FRAC_PI_2, Block::None);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pulses = 1_000_000;
        let (n1, n2) = simulate_point(&cfg, &src, &det, pulses, &mut rng);
        let mu_eff = effective_mean(&src, &det);
        let expected = -(-mu_eff).exp_m1();
        assert_abs_diff_eq!(expected, 1.261e-3, epsilon = 1e-6);
        let sigma = (expected * (1.0 - expected) / pulses as f64).sqrt();
        assert!((n1 as f64 / pulses as f64 - expected).abs() < 4.0 * sigma);
        assert_eq!(n2, 0);
    }

    #[test]
    fn dark_counts_reach_dark_port() {
        let src = SourceConfig::default();
        let det = DetectorConfig {
            dark_prob: 1e-4,
            ..Default::default()
        };
        let cfg = CircuitConfig::ideal(FRAC_PI_2, FRAC_PI_2, Block::None);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (_, n2) = simulate_point(&cfg, &src, &det, 1_000_000, &mut rng);
        // mean 100, sd 10
        assert!((60..=140).contains(&n2), "{n2}");
    }

    #[test]
    fn loss_lowers_expected_counts() {
        let src = SourceConfig::default();
        let cfg = CircuitConfig::ideal(0.3, 0.8, Block::None);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let det = DetectorConfig {
                system_loss_db: k as f64 * 0.5,
                ..Default::default()
            };
            let (a, b) = expected_counts(&cfg, &src, &det, 120_000);
            assert!(a + b < last);
            last = a + b;
        }
    }

    #[test]
    fn config_validation() {
        assert!(SourceConfig::default().validate().is_ok());
        assert_eq!(
            SourceConfig {
                mu: -1.0,
                ..Default::default()
            }
            .validate()
            .unwrap_err()
            .0,
            "mu"
        );
        assert_eq!(
            DetectorConfig {
                efficiency: 0.0,
                ..Default::default()
            }
            .validate()
            .unwrap_err()
            .0,
            "efficiency"
        );
        assert_eq!(
            DetectorConfig {
                system_loss_db: -3.0,
                ..Default::default()
            }
            .validate()
            .unwrap_err()
            .0,
            "system_loss_db"
        );
        let plan = RunPlan {
            pulses_per_point: 0,
            ..Default::default()
        };
        assert_eq!(plan.validate().unwrap_err().0, "pulses_per_point");
        let plan = RunPlan {
            blocks: vec![Block::None, Block::None],
            ..Default::default()
        };
        assert_eq!(plan.validate().unwrap_err().0, "blocks");
        assert!(RunPlan::default().validate().is_ok());
    }

    #[test]
    fn timing_of_multiplexed_gates() {
        let (src, det) = (SourceConfig::default(), DetectorConfig::default());
        assert!(check_timing(&src, &det).is_ok());
        let fast = SourceConfig {
            rep_rate: 1e6,
            ..Default::default()
        };
        assert!(check_timing(&fast, &det).is_err());
        let r = TimeMultiplexedReadout::new(&det);
        let (early, late) = r.gate_times(3, 150e3);
        assert_abs_diff_eq!(late - early, 1.25e-6, epsilon = 1e-18);
        assert_eq!(TimeMultiplexedReadout::slot_for(0), GateSlot::Early);
        assert_eq!(TimeMultiplexedReadout::slot_for(1), GateSlot::Late);
    }

    #[test]
    fn default_plan_settings() {
        let plan = RunPlan::default();
        assert_eq!(plan.phi_s_values.len(), 9);
        assert_eq!(plan.phi_s_values[0], 0.0);
        assert_abs_diff_eq!(plan.phi_s_values[8], FRAC_PI_2, epsilon = 1e-15);
        let grid = plan.phi_x_grid.values();
        assert_eq!(grid.len(), 33);
        assert_abs_diff_eq!(grid[8], FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(grid[24], 1.5 * std::f64::consts::PI, epsilon = 1e-15);
    }

    #[test]
    fn zero_pulse_plan_gives_empty_counts() {
        let plan = RunPlan {
            pulses_per_point: 0,
            phi_s_values: vec![0.0, FRAC_PI_2],
            ..Default::default()
        };
        let scans = run_sweep(
            &plan,
            &SourceConfig::default(),
            &DetectorConfig::default(),
            SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(scans.len(), 6);
        assert!(scans.iter().all(|s| s.pooled() == (0.0, 0.0)));
    }

    #[test]
    fn ideal_model_counts_are_born_probabilities() {
        let plan = RunPlan {
            pulses_per_point: 1000,
            phi_s_values: vec![FRAC_PI_2],
            blocks: vec![Block::None],
            ..Default::default()
        };
        let opts = SweepOptions {
            model: CountModel::Ideal,
            workers: None,
        };
        let rec = sweep_records(
            &plan,
            &SourceConfig::default(),
            &DetectorConfig::default(),
            opts,
        )
        .unwrap();
        assert_abs_diff_eq!(rec[8].n1, 1000.0, epsilon = 1e-9);
        assert!(rec.iter().all(|r| r.stream.is_none()));
    }
}
