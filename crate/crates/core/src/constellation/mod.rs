//! Constellations, bit mappings and channel parameters.
//!
//! A [`Constellation`] is the object every analysis consumes: `M` distinct
//! points in `n` dimensions, a prior over them and optional bit labels. Codes
//! under maximum-likelihood decoding are handled the same way, with codewords
//! as points of an extended constellation.

mod builders;
mod io;

pub use builders::{build_standard, StandardKind};
pub use io::{load, load_with, save, to_csv, LoadOptions};

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::scalar::{dist_sq, norm_sq, Scalar};

/// Points closer than this (L2) are treated as the same point.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Tolerance on the unit average-energy normalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

fn prior_tolerance<T: Scalar>() -> f64 {
    1e-12_f64.max(16.0 * T::epsilon().to_f64_lossy())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Constellation<T> {
    name: String,
    dim: usize,
    points: Vec<Vec<T>>,
    priors: Vec<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> Constellation<T> {
    /// Validates and assembles a constellation. `priors = None` means uniform.
    ///
    /// The points are taken as given; see [`Constellation::normalize`].
    pub fn new(
        name: impl Into<String>,
        points: Vec<Vec<T>>,
        priors: Option<Vec<T>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let m = points.len();
        if m < 2 {
            return Err(Error::Validation(format!("need at least 2 points, got {m}")));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Validation("points must have dimension >= 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Validation(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("point {i} has a non-finite coordinate")));
            }
        }
        let dup_sq = T::lit(DUPLICATE_TOLERANCE * DUPLICATE_TOLERANCE);
        for i in 0..m {
            for j in i + 1..m {
                if dist_sq(&points[i], &points[j]) < dup_sq {
                    return Err(Error::DuplicatePoint { first: i, second: j });
                }
            }
        }

        let priors = match priors {
            None => vec![T::one() / T::from_count(m as u64); m],
            Some(p) => {
                if p.len() != m {
                    return Err(Error::Validation(format!(
                        "{} priors given for {m} points",
                        p.len()
                    )));
                }
                if p.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
                    return Err(Error::Validation("priors must be finite and non-negative".into()));
                }
                let total: T = p.iter().copied().sum();
                if (total.to_f64_lossy() - 1.0).abs() > prior_tolerance::<T>() {
                    return Err(Error::Validation(format!("priors sum to {total}, expected 1")));
                }
                p
            }
        };

        if let Some(labels) = &labels {
            validate_labels(labels, m)?;
        }

        Ok(Self {
            name: name.into(),
            dim,
            points,
            priors,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points `M`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidIndex { index: i, len: self.len() })
        }
    }

    /// `(1/M) Σ |s_i|²`.
    pub fn average_energy(&self) -> T {
        let total: T = self.points.iter().map(|p| norm_sq(p)).sum();
        total / T::from_count(self.len() as u64)
    }

    pub fn is_normalized(&self) -> bool {
        (self.average_energy().to_f64_lossy() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// Scales every point by one positive factor so the average energy is 1.
    ///
    /// Already-normalized inputs are returned unchanged (factor exactly 1).
    pub fn normalize(self) -> Result<Self> {
        let energy = self.average_energy();
        if !(energy > T::zero()) {
            return Err(Error::Degenerate("all points are at the origin".into()));
        }
        let tol = 1e-12_f64.max(8.0 * T::epsilon().to_f64_lossy());
        if (energy.to_f64_lossy() - 1.0).abs() <= tol {
            return Ok(self);
        }
        let factor = energy.sqrt().recip();
        Ok(self.scaled(factor))
    }

    /// Multiplies every point by `factor` without renormalizing.
    pub fn scaled(mut self, factor: T) -> Self {
        for p in &mut self.points {
            for x in p.iter_mut() {
                *x = *x * factor;
            }
        }
        self
    }

    /// Applies `f` to every point, e.g. an orthogonal rotation.
    pub fn map_points(&self, f: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        let points = self.points.iter().map(|p| f(p)).collect();
        Self::new(
            self.name.clone(),
            points,
            Some(self.priors.clone()),
            self.labels.clone(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn validate_labels(labels: &[String], m: usize) -> Result<()> {
    if labels.len() != m {
        return Err(Error::Validation(format!("{} labels given for {m} points", labels.len())));
    }
    let bits = labels[0].len();
    if bits == 0 {
        return Err(Error::Validation("labels must be non-empty bit strings".into()));
    }
    for (i, l) in labels.iter().enumerate() {
        if l.len() != bits {
            return Err(Error::Validation(format!(
                "label {i} has {} bits, expected {bits}",
                l.len()
            )));
        }
        if !l.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Validation(format!("label {i} ({l:?}) is not a bit string")));
        }
    }
    if bits < 64 && (1u64 << bits) < m as u64 {
        return Err(Error::Validation(format!("{bits}-bit labels cannot distinguish {m} points")));
    }
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Validation("labels must be distinct".into()));
    }
    Ok(())
}

/// Scales `points` to unit average energy and attaches uniform priors.
pub fn normalize<T: Scalar>(points: Vec<Vec<T>>) -> Result<Constellation<T>> {
    Constellation::new("normalized", points, None, None)?.normalize()
}

/// Pairwise Hamming distances between bit labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BitMapping {
    pub hamming: Vec<Vec<u32>>,
    /// Label length `L`; the denominator of the bit error rate.
    pub bits_per_symbol: u32,
}

impl BitMapping {
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> u32 {
        self.hamming[i][j]
    }

    pub fn max_distance(&self) -> u32 {
        self.hamming.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn hamming_matrix<T: Scalar>(c: &Constellation<T>) -> Result<BitMapping> {
    let labels = c.labels().ok_or(Error::MissingLabels)?;
    let hamming = labels
        .iter()
        .map(|a| {
            labels
                .iter()
                .map(|b| a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() as u32)
                .collect()
        })
        .collect();
    Ok(BitMapping {
        hamming,
        bits_per_symbol: labels[0].len() as u32,
    })
}

/// Noise power `σ₀²` per dimension; the SNR is its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ChannelParams<T> {
    noise_power: T,
    snr: T,
}

impl<T: Scalar> ChannelParams<T> {
    pub fn from_snr(snr: T) -> Result<Self> {
        positive("snr", snr.to_f64_lossy())?;
        Ok(Self {
            noise_power: snr.recip(),
            snr,
        })
    }

    pub fn from_noise_power(noise_power: T) -> Result<Self> {
        positive("noise power", noise_power.to_f64_lossy())?;
        Ok(Self {
            noise_power,
            snr: noise_power.recip(),
        })
    }

    pub fn snr(&self) -> T {
        self.snr
    }

    pub fn noise_power(&self) -> T {
        self.noise_power
    }

    /// Noise standard deviation per dimension.
    pub fn sigma(&self) -> T {
        self.noise_power.sqrt()
    }
}
