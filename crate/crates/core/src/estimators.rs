//! From detector counts to visibility, distinguishability and entropies.
//!
//! Two routes are computed side by side:
//! * the formula route feeds the estimated `V` and `D` into the closed forms
//!   `h_min_from_d` / `h_max_from_v`;
//! * the definition route applies `h_min` / `h_max` directly to measured
//!   detector distributions.
//!
//! Uncertainties are first-order (delta method) with Poisson variance equal
//! to the count. Fringe extrema come straight from the measured grid.

use std::f64::consts::{LN_2, TAU};

use log::warn;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::entropy::{h_max, h_max_from_v, h_min, h_min_from_d};
use crate::error::{Error, Result};
use crate::optics::Block;
use crate::state::ProbDist;
use crate::tolerance;

/// Counts recorded at one value of `phi_x`.
///
/// Counts are reals so noiseless expected counts can flow through the same
/// estimators as sampled ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringePoint {
    pub phi_x: f64,
    pub n1: f64,
    pub n2: f64,
}

impl FringePoint {
    pub fn total(&self) -> f64 {
        self.n1 + self.n2
    }

    fn count(&self, detector: Detector) -> f64 {
        match detector {
            Detector::D1 => self.n1,
            Detector::D2 => self.n2,
        }
    }
}

/// A `phi_x` sweep at fixed `phi_s` and block setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeScan {
    pub phi_s: f64,
    pub block: Block,
    points: Vec<FringePoint>,
    pub pulses_per_point: u64,
}

impl FringeScan {
    pub fn new(
        phi_s: f64,
        block: Block,
        points: Vec<FringePoint>,
        pulses_per_point: u64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("fringe scan has no points".into()));
        }
        for p in &points {
            if !(p.phi_x.is_finite() && p.n1.is_finite() && p.n2.is_finite()) {
                return Err(Error::NonFinite("fringe point"));
            }
            if p.n1 < 0.0 || p.n2 < 0.0 {
                return Err(Error::Precondition(format!(
                    "negative count at phi_x = {}",
                    p.phi_x
                )));
            }
        }
        if points.windows(2).any(|w| w[1].phi_x <= w[0].phi_x) {
            return Err(Error::Precondition(
                "phi_x must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            phi_s,
            block,
            points,
            pulses_per_point,
        })
    }

    pub fn points(&self) -> &[FringePoint] {
        &self.points
    }

    /// Counts summed over `phi_x`.
    pub fn pooled(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p.n1, b + p.n2))
    }

    pub fn empty_points(&self) -> usize {
        self.points.iter().filter(|p| p.total() == 0.0).count()
    }

    fn span(&self) -> f64 {
        self.points.last().map_or(0.0, |l| l.phi_x) - self.points[0].phi_x
    }

    /// Scales every count; used to study how uncertainties shrink with data.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| FringePoint {
                    n1: p.n1 * factor,
                    n2: p.n2 * factor,
                    ..*p
                })
                .collect(),
            ..self.clone()
        }
    }
}

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
}

impl EstimateWithError {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Detector {
    D1,
    D2,
}

/// Poisson variance of an observed count. An empty bin gets one count of
/// variance; zero would claim the rate is known to be exactly zero.
fn count_variance(n: f64) -> f64 {
    n.max(1.0)
}

/// Contrast `(max - min) / (max + min)` of two counts with Poisson errors.
pub fn contrast_from_counts(n_max: f64, n_min: f64) -> Result<EstimateWithError> {
    let s = n_max + n_min;
    if s <= 0.0 {
        return Err(Error::Estimation("no counts at the fringe extrema".into()));
    }
    let value = (n_max - n_min) / s;
    let s2 = s * s;
    let var = (2.0 * n_min / s2).powi(2) * count_variance(n_max)
        + (2.0 * n_max / s2).powi(2) * count_variance(n_min);
    Ok(EstimateWithError::new(value, var.sqrt()))
}

/// Grid extrema of the conditional probability seen by one detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeContrast {
    pub detector: Detector,
    pub contrast: EstimateWithError,
    pub p_max: f64,
    pub p_min: f64,
    pub phi_x_max: f64,
    pub phi_x_min: f64,
    /// Index of the maximum within the scan's points.
    pub index_max: usize,
    pub dropped_points: usize,
}

/// Fringe contrast for `detector`; ties resolve to the lowest `phi_x`.
pub fn fringe_contrast(scan: &FringeScan, detector: Detector) -> Result<FringeContrast> {
    let dropped = scan.empty_points();
    if dropped > 0 {
        warn!(
            "phi_s = {}: dropping {dropped} point(s) with no counts",
            scan.phi_s
        );
    }
    let mut hi: Option<(usize, f64)> = None;
    let mut lo: Option<(usize, f64)> = None;
    for (i, pt) in scan.points.iter().enumerate() {
        let t = pt.total();
        if t == 0.0 {
            continue;
        }
        let p = pt.count(detector) / t;
        if hi.is_none_or(|(_, best)| p > best) {
            hi = Some((i, p));
        }
        if lo.is_none_or(|(_, best)| p < best) {
            lo = Some((i, p));
        }
    }
    let ((i_max, p_max), (i_min, p_min)) = match (hi, lo) {
        (Some(h), Some(l)) => (h, l),
        _ => return Err(Error::Estimation("all points have zero counts".into())),
    };
    if p_max + p_min <= 0.0 {
        return Err(Error::Estimation(format!(
            "detector {detector:?} recorded no counts"
        )));
    }
    let sigma = contrast_from_counts(
        scan.points[i_max].count(detector),
        scan.points[i_min].count(detector),
    )?
    .sigma;
    Ok(FringeContrast {
        detector,
        contrast: EstimateWithError::new((p_max - p_min) / (p_max + p_min), sigma),
        p_max,
        p_min,
        phi_x_max: scan.points[i_max].phi_x,
        phi_x_min: scan.points[i_min].phi_x,
        index_max: i_max,
        dropped_points: dropped,
    })
}

/// Minimum number of grid points for a visibility estimate.
pub const MIN_FRINGE_POINTS: usize = 8;

/// Interferometric visibility from an open-arm scan, using detector D1.
pub fn estimate_visibility(scan: &FringeScan) -> Result<FringeContrast> {
    if scan.block != Block::None {
        return Err(Error::Precondition(
            "visibility needs both arms open".into(),
        ));
    }
    if scan.points.len() < MIN_FRINGE_POINTS {
        return Err(Error::Precondition(format!(
            "visibility needs at least {MIN_FRINGE_POINTS} points, got {}",
            scan.points.len()
        )));
    }
    if scan.span() < TAU - 1e-9 {
        return Err(Error::Precondition(format!(
            "phi_x grid spans {} rad, less than one fringe period",
            scan.span()
        )));
    }
    fringe_contrast(scan, Detector::D1)
}

/// Which-path bias `|N1 - N2| / (N1 + N2)` with its Poisson uncertainty.
pub fn bias_from_counts(n1: f64, n2: f64) -> Result<EstimateWithError> {
    let s = n1 + n2;
    if s <= 0.0 {
        return Err(Error::Estimation(
            "blocked scan has zero total counts".into(),
        ));
    }
    Ok(EstimateWithError::new(
        (n1 - n2).abs() / s,
        // d/dN1 = 2 N2 / S^2 and d/dN2 = -2 N1 / S^2
        (4.0 * (n2 * n2 * count_variance(n1) + n1 * n1 * count_variance(n2)) / s.powi(4)).sqrt(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistinguishabilityEstimate {
    pub estimate: EstimateWithError,
    /// `[path0 blocked, path1 blocked]`.
    pub per_scan: [EstimateWithError; 2],
}

fn check_same_phi_s(a: &FringeScan, b: &FringeScan) -> Result<()> {
    if (a.phi_s - b.phi_s).abs() > tolerance::ALGEBRAIC {
        return Err(Error::Precondition(format!(
            "scans taken at different phi_s ({} vs {})",
            a.phi_s, b.phi_s
        )));
    }
    Ok(())
}

/// Path distinguishability: average of the two blocked-path biases, each from
/// counts pooled over `phi_x`.
pub fn estimate_distinguishability(
    scan_blocked_0: &FringeScan,
    scan_blocked_1: &FringeScan,
) -> Result<DistinguishabilityEstimate> {
    if scan_blocked_0.block != Block::Path0 || scan_blocked_1.block != Block::Path1 {
        return Err(Error::Precondition(format!(
            "expected (path0, path1) blocked scans, got ({}, {})",
            scan_blocked_0.block, scan_blocked_1.block
        )));
    }
    check_same_phi_s(scan_blocked_0, scan_blocked_1)?;
    let (a1, a2) = scan_blocked_0.pooled();
    let (b1, b2) = scan_blocked_1.pooled();
    let d0 = bias_from_counts(a1, a2)?;
    let d1 = bias_from_counts(b1, b2)?;
    Ok(DistinguishabilityEstimate {
        estimate: EstimateWithError::new(
            0.5 * (d0.value + d1.value),
            0.5 * d0.sigma.hypot(d1.sigma),
        ),
        per_scan: [d0, d1],
    })
}

/// Where a clamp to `[0, 1]` was applied before entering an entropy formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClampFlags {
    pub v: bool,
    pub d: bool,
}

/// Duality quantities with uncertainties, as produced by either route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteEstimate {
    pub v: EstimateWithError,
    pub d: EstimateWithError,
    pub h_min_z: EstimateWithError,
    pub h_max_w: EstimateWithError,
    pub eur_sum: EstimateWithError,
    pub wpdr: EstimateWithError,
    pub n: usize,
    pub clamped: ClampFlags,
}

fn clamp_unit(x: f64) -> (f64, bool) {
    let c = x.clamp(0.0, 1.0);
    (c, c != x)
}

/// Uncertainty of `h_min_from_d`.
fn sigma_h_min_from_d(d: f64, sigma_d: f64) -> f64 {
    sigma_d / ((1.0 + d) * LN_2)
}

/// Uncertainty of `h_max_from_v`. The slope diverges at `V = 1`; when the
/// one-sigma window reaches that point the one-sided secant is used instead.
fn sigma_h_max_from_v(v: f64, sigma_v: f64) -> f64 {
    if sigma_v == 0.0 {
        return 0.0;
    }
    let h = |x: f64| h_max_from_v(x.clamp(0.0, 1.0)).expect("clamped");
    if v + sigma_v < 1.0 {
        let r = ((1.0 - v) * (1.0 + v)).sqrt();
        v / (r * (1.0 + r) * LN_2) * sigma_v
    } else {
        (h(v) - h(v - sigma_v)).abs()
    }
}

fn combine(parts: &[f64]) -> f64 {
    parts.iter().map(|s| s * s).sum::<f64>().sqrt()
}

fn wpdr_estimate(d: EstimateWithError, v: EstimateWithError) -> EstimateWithError {
    EstimateWithError::new(
        d.value * d.value + v.value * v.value,
        combine(&[2.0 * d.value * d.sigma, 2.0 * v.value * v.sigma]),
    )
}

/// Entropies from measured `V` and `D` through the closed forms.
pub fn eur_formula_route(v: EstimateWithError, d: EstimateWithError) -> RouteEstimate {
    let (vv, v_clamped) = clamp_unit(v.value);
    let (dv, d_clamped) = clamp_unit(d.value);
    if v_clamped || d_clamped {
        warn!(
            "clamped estimate into [0, 1]: V = {}, D = {}",
            v.value, d.value
        );
    }
    let v = EstimateWithError::new(vv, v.sigma);
    let d = EstimateWithError::new(dv, d.sigma);
    let h_min_z = EstimateWithError::new(
        h_min_from_d(dv).expect("clamped"),
        sigma_h_min_from_d(dv, d.sigma),
    );
    let h_max_w = EstimateWithError::new(
        h_max_from_v(vv).expect("clamped"),
        sigma_h_max_from_v(vv, v.sigma),
    );
    RouteEstimate {
        v,
        d,
        h_min_z,
        h_max_w,
        eur_sum: EstimateWithError::new(
            h_min_z.value + h_max_w.value,
            h_min_z.sigma.hypot(h_max_w.sigma),
        ),
        wpdr: wpdr_estimate(d, v),
        n: 2,
        clamped: ClampFlags {
            v: v_clamped,
            d: d_clamped,
        },
    }
}

/// How the definition route turns the two blocked scans into `H_min(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HminConvention {
    /// Average the two biases first, then take `h_min((1 + D)/2, (1 - D)/2)`.
    #[default]
    AveragedD,
    /// Take `h_min` of each blocked scan's distribution, then average.
    PerScan,
}

/// `h_max` of a detector pair and its propagated uncertainty.
fn h_max_of_pair(n1: f64, n2: f64) -> Result<EstimateWithError> {
    let t = n1 + n2;
    if t <= 0.0 {
        return Err(Error::Estimation("extremal point has no counts".into()));
    }
    let (p, q) = (n1 / t, n2 / t);
    let value = h_max(&ProbDist::binary(p)?)?;
    // d h_max/dp * sigma_p with sigma_p^2 = p q / t, simplified so the
    // p -> 0 and p -> 1 limits stay finite.
    let (sp, sq) = (p.sqrt(), q.sqrt());
    let sigma = (sq - sp).abs() / ((sp + sq) * t.sqrt() * LN_2);
    Ok(EstimateWithError::new(value, sigma))
}

fn h_min_of_bias(d: EstimateWithError) -> Result<EstimateWithError> {
    let value = h_min(&ProbDist::binary(0.5 * (1.0 + d.value))?)?;
    Ok(EstimateWithError::new(
        value,
        sigma_h_min_from_d(d.value, d.sigma),
    ))
}

/// Entropies from the entropic definitions applied to measured distributions.
///
/// `H_max(W)` uses the normalized detector pair at the fringe maximum.
pub fn eur_definition_route(
    scan_open: &FringeScan,
    scan_b0: &FringeScan,
    scan_b1: &FringeScan,
    convention: HminConvention,
) -> Result<RouteEstimate> {
    check_same_phi_s(scan_open, scan_b0)?;
    let fringe = estimate_visibility(scan_open)?;
    let dist = estimate_distinguishability(scan_b0, scan_b1)?;

    let ext = scan_open.points[fringe.index_max];
    let h_max_w = h_max_of_pair(ext.n1, ext.n2)?;
    let p = ext.n1 / ext.total();
    let v = EstimateWithError::new(
        (2.0 * p - 1.0).abs(),
        2.0 * (p * (1.0 - p) / ext.total()).sqrt(),
    );

    let d = dist.estimate;
    let h_min_z = match convention {
        HminConvention::AveragedD => h_min_of_bias(d)?,
        HminConvention::PerScan => {
            let a = h_min_of_bias(dist.per_scan[0])?;
            let b = h_min_of_bias(dist.per_scan[1])?;
            EstimateWithError::new(0.5 * (a.value + b.value), 0.5 * a.sigma.hypot(b.sigma))
        }
    };

    Ok(RouteEstimate {
        v,
        d,
        h_min_z,
        h_max_w,
        eur_sum: EstimateWithError::new(
            h_min_z.value + h_max_w.value,
            h_min_z.sigma.hypot(h_max_w.sigma),
        ),
        wpdr: wpdr_estimate(d, v),
        n: 2,
        clamped: ClampFlags::default(),
    })
}

/// Difference of one quantity between the two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteDiff {
    pub diff: f64,
    /// `k * (sigma_a + sigma_b)`.
    pub allowed: f64,
    pub within: bool,
}

impl RouteDiff {
    fn new(a: EstimateWithError, b: EstimateWithError, k: f64) -> Self {
        let diff = (a.value - b.value).abs();
        let allowed = k * (a.sigma + b.sigma);
        Self {
            diff,
            allowed,
            // noiseless inputs have zero sigma; allow for rounding
            within: diff <= allowed + tolerance::ALGEBRAIC,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteComparison {
    pub h_min_z: RouteDiff,
    pub h_max_w: RouteDiff,
    pub eur_sum: RouteDiff,
    pub k: f64,
}

impl RouteComparison {
    pub fn all_within(&self) -> bool {
        self.h_min_z.within && self.h_max_w.within && self.eur_sum.within
    }
}

/// Per-quantity agreement of two routes, flagged at `k` combined sigmas.
pub fn equivalence_report(a: &RouteEstimate, b: &RouteEstimate, k: f64) -> RouteComparison {
    RouteComparison {
        h_min_z: RouteDiff::new(a.h_min_z, b.h_min_z, k),
        h_max_w: RouteDiff::new(a.h_max_w, b.h_max_w, k),
        eur_sum: RouteDiff::new(a.eur_sum, b.eur_sum, k),
        k,
    }
}

/// Everything measured at one `phi_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub phi_s: f64,
    pub visibility: FringeContrast,
    pub distinguishability: DistinguishabilityEstimate,
    pub formula: RouteEstimate,
    pub definition: RouteEstimate,
    pub comparison: RouteComparison,
    pub dropped_points: usize,
}

/// Runs both routes on the three scans taken at one `phi_s`.
pub fn duality_report(
    scan_open: &FringeScan,
    scan_b0: &FringeScan,
    scan_b1: &FringeScan,
    convention: HminConvention,
    k: f64,
) -> Result<DualityReport> {
    let visibility = estimate_visibility(scan_open)?;
    let distinguishability = estimate_distinguishability(scan_b0, scan_b1)?;
    let formula = eur_formula_route(visibility.contrast, distinguishability.estimate);
    let definition = eur_definition_route(scan_open, scan_b0, scan_b1, convention)?;
    Ok(DualityReport {
        phi_s: scan_open.phi_s,
        visibility,
        distinguishability,
        comparison: equivalence_report(&formula, &definition, k),
        formula,
        definition,
        dropped_points: scan_open.empty_points() + scan_b0.empty_points() + scan_b1.empty_points(),
    })
}

/// Result of testing a scan for the absence of interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessCheck {
    pub contrast: FringeContrast,
    pub k: f64,
    pub flat: bool,
}

/// A scan is flat when its fringe contrast on the busier detector is within
/// `k` sigma of zero.
pub fn flatness_check(scan: &FringeScan, k: f64) -> Result<FlatnessCheck> {
    let (n1, n2) = scan.pooled();
    let detector = if n1 >= n2 { Detector::D1 } else { Detector::D2 };
    let contrast = fringe_contrast(scan, detector)?;
    let c = contrast.contrast;
    Ok(FlatnessCheck {
        contrast,
        k,
        flat: c.value <= k * c.sigma + tolerance::ALGEBRAIC,
    })
}

/// Least-squares fringe `p1(phi_x) = offset + amplitude cos(phi_x - phase)`.
///
/// Presentation only; never feeds the entropy estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub rms_residual: f64,
}

pub fn fit_sinusoid(scan: &FringeScan) -> Result<SinusoidFit> {
    let pts: Vec<(f64, f64)> = scan
        .points
        .iter()
        .filter(|p| p.total() > 0.0)
        .map(|p| (p.phi_x, p.n1 / p.total()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Estimation(
            "sinusoid fit needs at least three non-empty points".into(),
        ));
    }
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for &(x, y) in &pts {
        let row = Vector3::new(1.0, x.cos(), x.sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| Error::Estimation("degenerate phi_x grid for sinusoid fit".into()))?;
    let rms = (pts
        .iter()
        .map(|&(x, y)| (y - coef[0] - coef[1] * x.cos() - coef[2] * x.sin()).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(SinusoidFit {
        offset: coef[0],
        amplitude: coef[1].hypot(coef[2]),
        phase: coef[2].atan2(coef[1]),
        rms_residual: rms,
    })
}
