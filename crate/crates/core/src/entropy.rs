//! Min/max entropies, the visibility and distinguishability closed forms,
//! and the uncertainty / duality inequality checks. All logarithms are base 2.

use crate::error::{Error, Result};
use crate::state::ProbDist;
use crate::tolerance;

/// Min-entropy `-log2 max_j p_j` of a normalized distribution.
pub fn h_min(p: &ProbDist) -> Result<f64> {
    require_normalized(p)?;
    let max = p.probs().iter().cloned().fold(0.0, f64::max);
    Ok(clamp_bits(-max.log2(), p.len()))
}

/// Max-entropy `2 log2 sum_j sqrt(p_j)` of a normalized distribution.
pub fn h_max(p: &ProbDist) -> Result<f64> {
    require_normalized(p)?;
    let s: f64 = p.probs().iter().map(|x| x.sqrt()).sum();
    Ok(clamp_bits(2.0 * s.log2(), p.len()))
}

fn require_normalized(p: &ProbDist) -> Result<()> {
    if !p.is_normalized() {
        return Err(Error::Unnormalized(p.sum()));
    }
    Ok(())
}

// Rounding can push a result a few ulps outside [0, log2 n]; `+ 0.0` turns -0 into 0.
fn clamp_bits(h: f64, n: usize) -> f64 {
    h.clamp(0.0, (n as f64).log2()) + 0.0
}

fn unit_interval(name: &'static str, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::out_of_range(name, x, 0.0, 1.0));
    }
    Ok(x)
}

/// Particle-side entropy from the path distinguishability: `-log2((1 + D) / 2)`.
pub fn h_min_from_d(d: f64) -> Result<f64> {
    let d = unit_interval("distinguishability", d)?;
    Ok(-((1.0 + d) / 2.0).log2() + 0.0)
}

/// Wave-side entropy, minimized over the conjugate basis: `log2(1 + sqrt(1 - V^2))`.
pub fn h_max_from_v(v: f64) -> Result<f64> {
    let v = unit_interval("visibility", v)?;
    // (1 - v)(1 + v) keeps precision as v approaches 1
    Ok((1.0 + ((1.0 - v) * (1.0 + v)).sqrt()).log2())
}

/// Outcome of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub value: f64,
    pub satisfied: bool,
}

/// `H_min(Z) + H_max(W) >= log2 n`, with the default slack.
pub fn eur_check(h_min_z: f64, h_max_w: f64, n: usize) -> Check {
    eur_check_with_slack(h_min_z, h_max_w, n, tolerance::INEQUALITY)
}

pub fn eur_check_with_slack(h_min_z: f64, h_max_w: f64, n: usize, slack: f64) -> Check {
    let value = h_min_z + h_max_w;
    Check {
        value,
        satisfied: value >= (n as f64).log2() - slack,
    }
}

/// `D^2 + V^2 <= 1`, with the default slack.
pub fn wpdr_check(d: f64, v: f64) -> Check {
    wpdr_check_with_slack(d, v, tolerance::INEQUALITY)
}

pub fn wpdr_check_with_slack(d: f64, v: f64, slack: f64) -> Check {
    let value = d * d + v * v;
    Check {
        value,
        satisfied: value <= 1.0 + slack,
    }
}

/// Success probability of an `n`-outcome guessing game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessingInput {
    p_guess: f64,
    n: usize,
}

impl GuessingInput {
    pub fn new(p_guess: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let lo = 1.0 / n as f64;
        // 1/n itself is not exactly representable for most n
        if !(lo - tolerance::ALGEBRAIC..=1.0 + tolerance::ALGEBRAIC).contains(&p_guess) {
            return Err(Error::out_of_range("p_guess", p_guess, lo, 1.0));
        }
        Ok(Self {
            p_guess: p_guess.clamp(lo, 1.0),
            n,
        })
    }

    pub fn p_guess(&self) -> f64 {
        self.p_guess
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn affine(&self) -> f64 {
        let n = self.n as f64;
        ((n * self.p_guess - 1.0) / (n - 1.0)).clamp(0.0, 1.0)
    }
}

/// Multipath visibility from the wave guessing game, `(n p - 1) / (n - 1)`.
pub fn generalized_v(g: &GuessingInput) -> f64 {
    g.affine()
}

/// Multipath distinguishability from the path guessing game, `(n p - 1) / (n - 1)`.
pub fn generalized_d(g: &GuessingInput) -> f64 {
    g.affine()
}

/// Upper bound on the max-entropy from a guessing probability:
/// `log2(1 + sqrt((n-1)^2 - (n p - 1)^2))`.
pub fn h_max_bound(g: &GuessingInput) -> Result<f64> {
    let n = g.n as f64;
    let radicand = (n - 1.0).powi(2) - (n * g.p_guess - 1.0).powi(2);
    if radicand < -tolerance::ALGEBRAIC {
        return Err(Error::Precondition(format!(
            "negative radicand {radicand} in max-entropy bound"
        )));
    }
    Ok(clamp_bits((1.0 + radicand.max(0.0).sqrt()).log2(), g.n))
}

/// Visibility, distinguishability and the entropies derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityQuantities {
    pub v: f64,
    pub d: f64,
    pub h_min_z: f64,
    pub h_max_w: f64,
    pub eur_sum: f64,
    pub wpdr_value: f64,
    pub n: usize,
}

impl DualityQuantities {
    /// Binary-interferometer quantities from `(D, V)` through the closed forms.
    pub fn from_d_v(d: f64, v: f64) -> Result<Self> {
        let h_min_z = h_min_from_d(d)?;
        let h_max_w = h_max_from_v(v)?;
        Ok(Self {
            v,
            d,
            h_min_z,
            h_max_w,
            eur_sum: h_min_z + h_max_w,
            wpdr_value: d * d + v * v,
            n: 2,
        })
    }

    pub fn eur(&self) -> Check {
        eur_check(self.h_min_z, self.h_max_w, self.n)
    }

    pub fn wpdr(&self) -> Check {
        wpdr_check(self.d, self.v)
    }
}
