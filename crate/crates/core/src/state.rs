//! Complex path-amplitude states and the linear optical elements acting on them.
//!
//! Global phase is never canonicalized. Every observable leaves this module
//! through [`born_probabilities`], so only magnitudes carry meaning.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance;

/// A single complex probability amplitude.
pub type ComplexAmp = Complex64;

/// Amplitude vector over the interferometer paths (or detector ports).
///
/// May be subnormalized after an attenuator removed part of the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    amps: DVector<ComplexAmp>,
}

impl PathState {
    pub fn new(amps: Vec<ComplexAmp>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amps))
    }

    /// The state with all amplitude in `path`.
    pub fn basis(dim: usize, path: usize) -> Result<Self> {
        if path >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: path + 1,
            });
        }
        let mut amps = vec![ComplexAmp::new(0.0, 0.0); dim];
        amps[path] = ComplexAmp::new(1.0, 0.0);
        Self::new(amps)
    }

    fn from_vector(amps: DVector<ComplexAmp>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension(amps.len()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("path state"));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if norm > 1.0 + tolerance::ALGEBRAIC {
            return Err(Error::NormExceeded(norm));
        }
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        self.amps.as_slice()
    }

    pub fn amp(&self, path: usize) -> ComplexAmp {
        self.amps[path]
    }

    /// Squared norm, i.e. the total surviving probability.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Unitary,
    /// Contractive: every singular value is at most one.
    Attenuator,
}

/// An `n x n` complex transfer matrix acting on a [`PathState`].
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    matrix: DMatrix<ComplexAmp>,
    kind: ElementKind,
}

impl OpticalElement {
    /// Builds a unitary element, checking `M^dagger M = I` entrywise.
    pub fn unitary(matrix: DMatrix<ComplexAmp>) -> Result<Self> {
        check_square(&matrix)?;
        let dev = unitarity_deviation(&matrix);
        if dev > tolerance::ALGEBRAIC {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            matrix,
            kind: ElementKind::Unitary,
        })
    }

    /// Builds a contractive element (largest singular value at most one).
    pub fn attenuator(matrix: DMatrix<ComplexAmp>) -> Result<Self> {
        check_square(&matrix)?;
        let largest = matrix.singular_values().max();
        if largest > 1.0 + tolerance::ALGEBRAIC {
            return Err(Error::NotContractive(largest));
        }
        Ok(Self {
            matrix,
            kind: ElementKind::Attenuator,
        })
    }

    /// Row-major constructor for a unitary element.
    pub fn unitary_from_rows(dim: usize, entries: &[ComplexAmp]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::unitary(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::unitary(DMatrix::identity(dim, dim))
    }

    /// Phase shifter applying `e^{i phase}` to a single path.
    pub fn phase_shifter(dim: usize, path: usize, phase: f64) -> Result<Self> {
        if path >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: path + 1,
            });
        }
        let mut m = DMatrix::identity(dim, dim);
        m[(path, path)] = ComplexAmp::from_polar(1.0, phase);
        Self::unitary(m)
    }

    /// Attenuator on one path with intensity transmissivity `transmissivity`.
    /// A transmissivity of zero blocks the path.
    pub fn path_attenuator(dim: usize, path: usize, transmissivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::out_of_range(
                "transmissivity",
                transmissivity,
                0.0,
                1.0,
            ));
        }
        if path >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: path + 1,
            });
        }
        let mut m = DMatrix::identity(dim, dim);
        m[(path, path)] = ComplexAmp::new(transmissivity.sqrt(), 0.0);
        Self::attenuator(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<ComplexAmp> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> ComplexAmp {
        self.matrix[(row, col)]
    }
}

fn check_square(m: &DMatrix<ComplexAmp>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() < 2 {
        return Err(Error::InvalidDimension(m.nrows()));
    }
    if m.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite("optical element"));
    }
    Ok(())
}

/// Largest entrywise deviation of `M^dagger M` from the identity.
pub fn unitarity_deviation(m: &DMatrix<ComplexAmp>) -> f64 {
    let gram = m.adjoint() * m;
    let id = DMatrix::<ComplexAmp>::identity(m.nrows(), m.ncols());
    (gram - id).iter().map(|d| d.norm()).fold(0.0, f64::max)
}

/// Applies `e` to `s` (matrix-vector product).
pub fn apply_element(e: &OpticalElement, s: &PathState) -> Result<PathState> {
    if e.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: s.dim(),
        });
    }
    PathState::from_vector(&e.matrix * &s.amps)
}

/// Matrix product `e1 * e2`; `e2` acts first.
pub fn compose(e1: &OpticalElement, e2: &OpticalElement) -> Result<OpticalElement> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    // Products of contractions are contractions, so no re-check is needed.
    let kind = match (e1.kind, e2.kind) {
        (ElementKind::Unitary, ElementKind::Unitary) => ElementKind::Unitary,
        _ => ElementKind::Attenuator,
    };
    Ok(OpticalElement {
        matrix: &e1.matrix * &e2.matrix,
        kind,
    })
}

/// Labeled discrete probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    labels: Vec<String>,
    probs: Vec<f64>,
    normalized: bool,
}

impl ProbDist {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                probs: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("probability"));
        }
        if let Some(&p) = probs.iter().find(|&&p| p < 0.0) {
            return Err(Error::NegativeProbability(p));
        }
        let sum: f64 = probs.iter().sum();
        Ok(Self {
            labels,
            probs,
            normalized: (sum - 1.0).abs() <= tolerance::NORMALIZATION,
        })
    }

    /// Distribution with labels `x0, x1, ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|j| format!("x{j}")).collect();
        Self::new(labels, probs)
    }

    /// The binary distribution `(p, 1 - p)`.
    pub fn binary(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::out_of_range("p", p, 0.0, 1.0));
        }
        Self::from_probs(vec![p, 1.0 - p])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Conditions on "some outcome occurred" by dividing through by the sum.
    pub fn renormalized(&self) -> Result<Self> {
        let sum = self.sum();
        if sum <= 0.0 {
            return Err(Error::Unnormalized(sum));
        }
        Self::new(
            self.labels.clone(),
            self.probs.iter().map(|p| p / sum).collect(),
        )
    }
}

/// Born rule: `probs[j] = |amps[j]|^2`, labeled by port index.
pub fn born_probabilities(s: &PathState) -> ProbDist {
    let probs: Vec<f64> = s.amps.iter().map(|a| a.norm_sqr()).collect();
    let labels = (0..probs.len()).map(|j| format!("port{j}")).collect();
    ProbDist::new(labels, probs).expect("squared magnitudes of finite amplitudes are valid")
}
