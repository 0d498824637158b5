//! The two-path interferometer: input 50:50 splitter, phase modulator on one
//! arm, optional path block, and a Sagnac loop acting as a tunable
//! beamsplitter.
//!
//! Two independent routes give the detector probabilities:
//! * [`circuit_output_state`] multiplies the element matrices,
//! * [`detection_probs_closed_form`] / [`detection_probs_blocked`] evaluate
//!   the analytic expressions.
//!
//! Imperfect mode-to-path mapping is modeled by a single coherence factor
//! `gamma` scaling the interference cross term, so the fringe visibility
//! becomes `gamma * sin(phi_s)` while blocked-path statistics are untouched.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    apply_element, born_probabilities, compose, ComplexAmp, OpticalElement, PathState,
};
use crate::tolerance;

/// Which arm (if any) is blocked before the Sagnac loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    None,
    Path0,
    Path1,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::None, Block::Path0, Block::Path1];

    pub fn as_str(self) -> &'static str {
        match self {
            Block::None => "none",
            Block::Path0 => "path0",
            Block::Path1 => "path1",
        }
    }

    fn blocked_path(self) -> Option<usize> {
        match self {
            Block::None => None,
            Block::Path0 => Some(0),
            Block::Path1 => Some(1),
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Block::None),
            "path0" => Ok(Block::Path0),
            "path1" => Ok(Block::Path1),
            other => Err(Error::Precondition(format!(
                "unknown block setting '{other}'"
            ))),
        }
    }
}

/// One setting of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitConfig {
    pub phi_x: f64,
    pub phi_s: f64,
    pub block: Block,
    /// Interference contrast in `[0, 1]`.
    pub coherence: f64,
}

impl CircuitConfig {
    pub fn new(phi_x: f64, phi_s: f64, block: Block, coherence: f64) -> Result<Self> {
        if !phi_x.is_finite() || !phi_s.is_finite() {
            return Err(Error::NonFinite("phase"));
        }
        if !(0.0..=1.0).contains(&coherence) {
            return Err(Error::out_of_range("coherence", coherence, 0.0, 1.0));
        }
        Ok(Self {
            phi_x,
            phi_s,
            block,
            coherence,
        })
    }

    /// Fully coherent configuration.
    pub fn ideal(phi_x: f64, phi_s: f64, block: Block) -> Self {
        Self {
            phi_x,
            phi_s,
            block,
            coherence: 1.0,
        }
    }
}

/// Phase reduced to `[0, 2 pi)`; used for reporting only.
pub fn reduced_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Detection probabilities at D1 and D2.
///
/// `conditional` marks values renormalized on a detection having happened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbs {
    pub p1: f64,
    pub p2: f64,
    pub conditional: bool,
}

impl DetectionProbs {
    pub fn total(&self) -> f64 {
        self.p1 + self.p2
    }

    pub fn conditioned(&self) -> Result<Self> {
        let t = self.total();
        if t <= 0.0 {
            return Err(Error::Unnormalized(t));
        }
        Ok(Self {
            p1: self.p1 / t,
            p2: self.p2 / t,
            conditional: true,
        })
    }
}

/// Blocked-path probabilities: unconditional (half the amplitude is gone)
/// and conditioned on a detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockedDetection {
    pub raw: DetectionProbs,
    pub conditional: DetectionProbs,
}

/// The four elements of the circuit for a given pair of phases.
#[derive(Debug, Clone)]
pub struct StandardElements {
    pub bs1: OpticalElement,
    pub bs2: OpticalElement,
    pub pm1: OpticalElement,
    pub pm2: OpticalElement,
}

fn c(re: f64, im: f64) -> ComplexAmp {
    ComplexAmp::new(re, im)
}

/// Input splitter, Sagnac splitter and the two phase modulators.
pub fn standard_elements(phi_x: f64, phi_s: f64) -> StandardElements {
    let s = FRAC_1_SQRT_2;
    let bs1 = OpticalElement::unitary_from_rows(2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)])
        .expect("BS1 is unitary");
    let bs2 = OpticalElement::unitary_from_rows(2, &[c(0.0, s), c(-s, 0.0), c(-s, 0.0), c(0.0, s)])
        .expect("BS2 is unitary");
    let pm1 = OpticalElement::phase_shifter(2, 1, phi_x).expect("2-path phase shifter");
    let pm2 = OpticalElement::phase_shifter(2, 1, phi_s).expect("2-path phase shifter");
    StandardElements { bs1, bs2, pm1, pm2 }
}

/// Effective transfer matrix of the Sagnac loop, `BS2 * PM2(phi_s) * BS2`.
///
/// `phi_s = 0` is a mirror (each input leaves by a single port),
/// `phi_s = pi/2` a balanced splitter.
pub fn sagnac_effective(phi_s: f64) -> OpticalElement {
    let e = standard_elements(0.0, phi_s);
    let inner = compose(&e.pm2, &e.bs2).expect("equal dims");
    compose(&e.bs2, &inner).expect("equal dims")
}

/// Which output port of the matrix product is D1 and which is D2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortLabeling {
    pub d1: usize,
    pub d2: usize,
}

/// Port labeling pinned so that `p1 = 1` at `phi_x = phi_s = pi/2`.
pub fn port_labeling() -> PortLabeling {
    static LABELS: OnceLock<PortLabeling> = OnceLock::new();
    *LABELS.get_or_init(|| {
        let out = raw_output_state(&CircuitConfig::ideal(FRAC_PI_2, FRAC_PI_2, Block::None))
            .expect("pure-state evaluation");
        let p = born_probabilities(&out);
        let d1 = if p.probs()[0] > p.probs()[1] { 0 } else { 1 };
        assert!(
            (p.probs()[d1] - 1.0).abs() < tolerance::ALGEBRAIC,
            "interferometer must route all light to one port at phi_x = phi_s = pi/2"
        );
        PortLabeling { d1, d2: 1 - d1 }
    })
}

fn raw_output_state(cfg: &CircuitConfig) -> Result<PathState> {
    let e = standard_elements(cfg.phi_x, cfg.phi_s);
    let mut s = PathState::basis(2, 0)?;
    s = apply_element(&e.bs1, &s)?;
    s = apply_element(&e.pm1, &s)?;
    if let Some(path) = cfg.block.blocked_path() {
        s = apply_element(&OpticalElement::path_attenuator(2, path, 0.0)?, &s)?;
    }
    apply_element(&sagnac_effective(cfg.phi_s), &s)
}

/// Output amplitudes ordered `(D1, D2)`, from the matrix product.
///
/// Only the fully coherent case has a pure output state.
pub fn circuit_output_state(cfg: &CircuitConfig) -> Result<PathState> {
    if cfg.coherence != 1.0 {
        return Err(Error::Precondition(format!(
            "output state needs coherence 1, got {}",
            cfg.coherence
        )));
    }
    let out = raw_output_state(cfg)?;
    let labels = port_labeling();
    PathState::new(vec![out.amp(labels.d1), out.amp(labels.d2)])
}

/// Unconditional `(p1, p2)` from the matrix route.
pub fn matrix_route_probs(cfg: &CircuitConfig) -> Result<DetectionProbs> {
    let p = born_probabilities(&circuit_output_state(cfg)?);
    Ok(DetectionProbs {
        p1: p.probs()[0],
        p2: p.probs()[1],
        conditional: p.is_normalized(),
    })
}

/// Both arms open: `p1 = (1 + gamma sin(phi_x) sin(phi_s)) / 2`.
pub fn detection_probs_closed_form(cfg: &CircuitConfig) -> Result<DetectionProbs> {
    if cfg.block != Block::None {
        return Err(Error::Precondition(
            "closed form for open arms called with a blocked path".into(),
        ));
    }
    let p1 = 0.5 * (1.0 + cfg.coherence * cfg.phi_x.sin() * cfg.phi_s.sin());
    Ok(DetectionProbs {
        p1,
        p2: 1.0 - p1,
        conditional: true,
    })
}

/// One arm blocked: no dependence on `phi_x` or on the coherence.
///
/// Blocking path 0 leaves `(cos^2(phi_s/2), sin^2(phi_s/2))` after
/// conditioning; blocking path 1 gives the swapped pair.
pub fn detection_probs_blocked(cfg: &CircuitConfig) -> Result<BlockedDetection> {
    let half = cfg.phi_s / 2.0;
    let (c2, s2) = (half.cos().powi(2), half.sin().powi(2));
    let (p1, p2) = match cfg.block {
        Block::None => {
            return Err(Error::Precondition(
                "blocked-path probabilities need a blocked path".into(),
            ))
        }
        Block::Path0 => (c2, s2),
        Block::Path1 => (s2, c2),
    };
    Ok(BlockedDetection {
        raw: DetectionProbs {
            p1: 0.5 * p1,
            p2: 0.5 * p2,
            conditional: false,
        },
        conditional: DetectionProbs {
            p1,
            p2,
            conditional: true,
        },
    })
}

/// Unconditional per-pulse detection probabilities for any setting.
pub fn raw_detection_probs(cfg: &CircuitConfig) -> DetectionProbs {
    match cfg.block {
        Block::None => detection_probs_closed_form(cfg).expect("open arms"),
        _ => detection_probs_blocked(cfg).expect("blocked arm").raw,
    }
}
