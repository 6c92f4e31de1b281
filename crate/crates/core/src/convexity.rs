//! Convexity thresholds, interval classification and inflection scans.
//!
//! All thresholds come from one sign argument: the density curvature
//! polynomial `f(|x|²)` (resp. `f*`) has a fixed sign on any region whose
//! points all lie outside the outer root or all inside the inner root. The
//! per-point distances `d_min,i`, `d_max,i` and the pair distance `d_ij`
//! bound `|x|` over each decision region, which turns the roots into SNR
//! (or noise-power) thresholds.
//!
//! For the pairwise error probability in `n > 2` dimensions the low-SNR
//! convexity bound is certified with `α₂` (both polynomial factors negative).
//! The weaker bound with `α₁` in its place is kept as `low_printed` and only
//! ever reported as a claim.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::constellation::Constellation;
use crate::curvature::{Axis, CurvatureConstants, CurvatureEstimate, Sign};
use crate::error::{Error, Result};
use crate::error_engine::ErrorMetric;
use crate::geometry::{all_extents, RegionExtents};
use crate::scalar::{dist_sq, extended, Scalar};

/// A threshold that may not exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound<T> {
    Finite(T),
    /// The governing `d_max` is infinite (unbounded decision region).
    Vacuous,
    /// The governing constant is non-positive (e.g. `α₂ ≤ 0` for `n ≤ 2`).
    NotApplicable,
}

impl<T: Scalar> Bound<T> {
    pub fn value(&self) -> Option<T> {
        match *self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn from_ratio(numerator: T, denominator_sq: T) -> Self {
        if denominator_sq.is_infinite() {
            Bound::Vacuous
        } else if numerator <= T::zero() {
            Bound::NotApplicable
        } else {
            Bound::Finite(numerator / denominator_sq)
        }
    }

    fn from_product(numerator_sq: T, divisor: T) -> Self {
        if numerator_sq.is_infinite() {
            Bound::Vacuous
        } else {
            Bound::Finite(numerator_sq / divisor)
        }
    }
}

impl<T: Scalar> Serialize for Bound<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => v.serialize(s),
            Bound::Vacuous => s.serialize_str("vacuous"),
            Bound::NotApplicable => s.serialize_str("n/a"),
        }
    }
}

impl<T: Scalar> std::fmt::Display for Bound<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Vacuous => write!(f, "vacuous (unbounded region)"),
            Bound::NotApplicable => write!(f, "n/a"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PointSnrThresholds<T> {
    /// `α₁/d_min,i²`: SER of point i convex at or above.
    pub high: T,
    /// `α₂/d_max,i²`: SER of point i concave at or below (`n > 2`).
    pub low: Bound<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PairSnrThresholds<T> {
    pub i: usize,
    pub j: usize,
    pub d_ij: T,
    /// `α₁/d_min,i²`: PEP convex at or above.
    pub high: T,
    /// `α₁/(d_ij + d_max,j)²`: concave at or below for `n ≤ 2`; for `n > 2`
    /// only claimed (not certified) as a convexity bound.
    pub low_printed: Bound<T>,
    /// `α₂/(d_ij + d_max,j)²`: PEP convex at or below for `n > 2`.
    pub low_derived: Bound<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PairNoiseThresholds<T> {
    pub i: usize,
    pub j: usize,
    /// `d_min,i²/β₁`: PEP convex at or below this noise power.
    pub small: T,
    /// `(d_ij + d_max,j)²/β₂`: PEP convex at or above this noise power.
    pub large: Bound<T>,
}

/// Every convexity threshold of a constellation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ThresholdSet<T> {
    pub dim: usize,
    pub points: usize,
    pub constants: CurvatureConstants<T>,
    pub extents: Vec<RegionExtents<T>>,
    /// `min_i d_min,i`.
    pub d_min: T,
    pub per_point_snr: Vec<PointSnrThresholds<T>>,
    /// `α₁/d_min²`: average SER convex at or above.
    pub ser_snr_high: T,
    /// `d_min,i²/β₁`: SER of point i convex at or below this noise power.
    pub noise_high: Vec<T>,
    /// `d_max,i²/β₂`: SER of point i concave at or above this noise power.
    pub noise_low: Vec<Bound<T>>,
    /// `d_min²/β₁`: average SER convex at or below this noise power.
    pub ser_noise_small: T,
    pub pep_snr: Vec<PairSnrThresholds<T>>,
    /// `α₁/d_min²`: BER convex at or above.
    pub ber_snr_high: T,
    pub pep_noise: Vec<PairNoiseThresholds<T>>,
    /// `d_min²/β₁`: BER convex at or below this noise power.
    pub ber_noise_small: T,
}

/// Computes every threshold from the decision-region geometry of `c`.
pub fn thresholds<T: Scalar>(c: &Constellation<T>) -> Result<ThresholdSet<T>> {
    thresholds_from_extents(c, all_extents(c)?)
}

pub fn thresholds_from_extents<T: Scalar>(
    c: &Constellation<T>,
    extents: Vec<RegionExtents<T>>,
) -> Result<ThresholdSet<T>> {
    if extents.len() != c.len() {
        return Err(Error::Validation("one extent per point required".into()));
    }
    let n = c.dim();
    let k = CurvatureConstants::<T>::new(n);
    let d_min = extents.iter().map(|e| e.d_min).fold(T::infinity(), T::min);

    let per_point_snr = extents
        .iter()
        .map(|e| PointSnrThresholds {
            high: k.alpha1 / (e.d_min * e.d_min),
            low: Bound::from_ratio(k.alpha2, e.d_max * e.d_max),
        })
        .collect();
    let noise_high = extents.iter().map(|e| e.d_min * e.d_min / k.beta1).collect();
    let noise_low = extents
        .iter()
        .map(|e| Bound::from_product(e.d_max * e.d_max, k.beta2))
        .collect();

    let m = c.len();
    let mut pep_snr = Vec::with_capacity(m * (m - 1));
    let mut pep_noise = Vec::with_capacity(m * (m - 1));
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let d_ij = dist_sq(c.point(i), c.point(j)).sqrt();
            let reach = d_ij + extents[j].d_max;
            let reach_sq = reach * reach;
            let dmin_i_sq = extents[i].d_min * extents[i].d_min;
            pep_snr.push(PairSnrThresholds {
                i,
                j,
                d_ij,
                high: k.alpha1 / dmin_i_sq,
                low_printed: Bound::from_ratio(k.alpha1, reach_sq),
                low_derived: Bound::from_ratio(k.alpha2, reach_sq),
            });
            pep_noise.push(PairNoiseThresholds {
                i,
                j,
                small: dmin_i_sq / k.beta1,
                large: Bound::from_product(reach_sq, k.beta2),
            });
        }
    }

    let dmin_sq = d_min * d_min;
    Ok(ThresholdSet {
        dim: n,
        points: m,
        constants: k,
        extents,
        d_min,
        per_point_snr,
        ser_snr_high: k.alpha1 / dmin_sq,
        noise_high,
        noise_low,
        ser_noise_small: dmin_sq / k.beta1,
        pep_snr,
        ber_snr_high: k.alpha1 / dmin_sq,
        pep_noise,
        ber_noise_small: dmin_sq / k.beta1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convex,
    Concave,
    Indeterminate,
}

impl Verdict {
    /// Whether a confident curvature sign contradicts this verdict.
    pub fn contradicted_by(&self, sign: Sign) -> bool {
        matches!(
            (self, sign),
            (Verdict::Convex, Sign::Negative) | (Verdict::Concave, Sign::Positive)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Which threshold decided the verdict, with its value.
    pub basis: String,
    /// Verdict claimed by the weaker `α₁` low-SNR PEP bound when `n > 2`.
    pub printed_claim: Option<Verdict>,
}

impl Classification {
    fn new(verdict: Verdict, basis: impl Into<String>) -> Self {
        Self {
            verdict,
            basis: basis.into(),
            printed_claim: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Theorem,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Interval<T> {
    pub lo: T,
    #[serde(with = "extended")]
    pub hi: T,
    pub verdict: Verdict,
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<T: Scalar> ThresholdSet<T> {
    fn pair_index(&self, i: usize, j: usize) -> Result<usize> {
        let m = self.points;
        if i >= m {
            return Err(Error::InvalidIndex { index: i, len: m });
        }
        if j >= m {
            return Err(Error::InvalidIndex { index: j, len: m });
        }
        if i == j {
            return Err(Error::SamePair(i));
        }
        Ok(i * (m - 1) + if j < i { j } else { j - 1 })
    }

    pub fn pair_snr(&self, i: usize, j: usize) -> Result<&PairSnrThresholds<T>> {
        Ok(&self.pep_snr[self.pair_index(i, j)?])
    }

    pub fn pair_noise(&self, i: usize, j: usize) -> Result<&PairNoiseThresholds<T>> {
        Ok(&self.pep_noise[self.pair_index(i, j)?])
    }

    fn point(&self, i: usize) -> Result<usize> {
        if i < self.points {
            Ok(i)
        } else {
            Err(Error::InvalidIndex { index: i, len: self.points })
        }
    }

    /// Theorem-backed verdict for `metric` at `value` on `axis`.
    pub fn classify(&self, metric: ErrorMetric, axis: Axis, value: T) -> Result<Classification> {
        if !(value > T::zero()) {
            return Err(Error::NonPositive {
                what: "evaluation point",
                value: value.to_f64_lossy(),
            });
        }
        let low_dim = self.dim <= 2;
        let c = match (axis, metric) {
            (Axis::Snr, ErrorMetric::Ser) => {
                if low_dim {
                    Classification::new(Verdict::Convex, "SER is convex in SNR for n <= 2")
                } else if value >= self.ser_snr_high {
                    Classification::new(Verdict::Convex, format!("ser_snr_high = {}", self.ser_snr_high))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("below ser_snr_high = {}", self.ser_snr_high))
                }
            }
            (Axis::Snr, ErrorMetric::SerPoint(i)) => {
                let t = &self.per_point_snr[self.point(i)?];
                if low_dim {
                    Classification::new(Verdict::Convex, "SER is convex in SNR for n <= 2")
                } else if value >= t.high {
                    Classification::new(Verdict::Convex, format!("per_point_snr[{i}].high = {}", t.high))
                } else if t.low.value().is_some_and(|lo| value <= lo) {
                    Classification::new(Verdict::Concave, format!("per_point_snr[{i}].low = {}", t.low))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("between per_point_snr[{i}].low = {} and high = {}", t.low, t.high))
                }
            }
            (Axis::Snr, ErrorMetric::Pep(i, j)) => {
                let t = self.pair_snr(i, j)?;
                if value >= t.high {
                    Classification::new(Verdict::Convex, format!("pep_snr[{i},{j}].high = {}", t.high))
                } else if low_dim {
                    if t.low_printed.value().is_some_and(|lo| value <= lo) {
                        Classification::new(Verdict::Concave, format!("pep_snr[{i},{j}].low_printed = {}", t.low_printed))
                    } else {
                        Classification::new(Verdict::Indeterminate, format!("between pep_snr[{i},{j}].low_printed = {} and high = {}", t.low_printed, t.high))
                    }
                } else {
                    let mut c = if t.low_derived.value().is_some_and(|lo| value <= lo) {
                        Classification::new(Verdict::Convex, format!("pep_snr[{i},{j}].low_derived = {}", t.low_derived))
                    } else {
                        Classification::new(Verdict::Indeterminate, format!("between pep_snr[{i},{j}].low_derived = {} and high = {}", t.low_derived, t.high))
                    };
                    if t.low_printed.value().is_some_and(|lo| value <= lo) {
                        c.printed_claim = Some(Verdict::Convex);
                    }
                    c
                }
            }
            (Axis::Snr, ErrorMetric::Ber) => {
                if value >= self.ber_snr_high {
                    Classification::new(Verdict::Convex, format!("ber_snr_high = {}", self.ber_snr_high))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("below ber_snr_high = {}", self.ber_snr_high))
                }
            }
            (Axis::NoisePower, ErrorMetric::Ser) => {
                if value <= self.ser_noise_small {
                    Classification::new(Verdict::Convex, format!("ser_noise_small = {}", self.ser_noise_small))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("above ser_noise_small = {}", self.ser_noise_small))
                }
            }
            (Axis::NoisePower, ErrorMetric::SerPoint(i)) => {
                let i = self.point(i)?;
                let (small, large) = (self.noise_high[i], self.noise_low[i]);
                if value <= small {
                    Classification::new(Verdict::Convex, format!("noise_high[{i}] = {small}"))
                } else if large.value().is_some_and(|lo| value >= lo) {
                    Classification::new(Verdict::Concave, format!("noise_low[{i}] = {large}"))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("between noise_high[{i}] = {small} and noise_low[{i}] = {large}"))
                }
            }
            (Axis::NoisePower, ErrorMetric::Pep(i, j)) => {
                let t = self.pair_noise(i, j)?;
                if value <= t.small {
                    Classification::new(Verdict::Convex, format!("pep_noise[{i},{j}].small = {}", t.small))
                } else if t.large.value().is_some_and(|lo| value >= lo) {
                    Classification::new(Verdict::Convex, format!("pep_noise[{i},{j}].large = {}", t.large))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("between pep_noise[{i},{j}].small = {} and large = {}", t.small, t.large))
                }
            }
            (Axis::NoisePower, ErrorMetric::Ber) => {
                if value <= self.ber_noise_small {
                    Classification::new(Verdict::Convex, format!("ber_noise_small = {}", self.ber_noise_small))
                } else {
                    Classification::new(Verdict::Indeterminate, format!("above ber_noise_small = {}", self.ber_noise_small))
                }
            }
        };
        Ok(c)
    }

    /// Theorem-sourced partition of `(0, ∞)` for `metric` along `axis`.
    pub fn theorem_intervals(&self, metric: ErrorMetric, axis: Axis) -> Result<Vec<Interval<T>>> {
        // Breakpoints in increasing order; the verdict of each piece is read
        // back from `classify` at an interior point so both stay consistent.
        let mut cuts: Vec<T> = Vec::new();
        let mut vacuous_note = None;
        let mut push = |b: Bound<T>, what: &str| match b {
            Bound::Finite(v) => cuts.push(v),
            Bound::Vacuous => {
                vacuous_note = Some(format!("{what} is vacuous: decision region unbounded"))
            }
            Bound::NotApplicable => {}
        };
        match (axis, metric) {
            (Axis::Snr, ErrorMetric::Ser) if self.dim > 2 => push(Bound::Finite(self.ser_snr_high), "ser_snr_high"),
            (Axis::Snr, ErrorMetric::Ser) => {}
            (Axis::Snr, ErrorMetric::SerPoint(i)) => {
                let t = self.per_point_snr[self.point(i)?];
                if self.dim > 2 {
                    push(t.low, "per-point low SNR threshold");
                    push(Bound::Finite(t.high), "");
                }
            }
            (Axis::Snr, ErrorMetric::Pep(i, j)) => {
                let t = *self.pair_snr(i, j)?;
                if self.dim <= 2 {
                    push(t.low_printed, "PEP low SNR threshold");
                } else {
                    push(t.low_derived, "PEP low SNR threshold");
                }
                push(Bound::Finite(t.high), "");
            }
            (Axis::Snr, ErrorMetric::Ber) => push(Bound::Finite(self.ber_snr_high), ""),
            (Axis::NoisePower, ErrorMetric::Ser) => push(Bound::Finite(self.ser_noise_small), ""),
            (Axis::NoisePower, ErrorMetric::SerPoint(i)) => {
                let i = self.point(i)?;
                push(Bound::Finite(self.noise_high[i]), "");
                push(self.noise_low[i], "per-point large-noise threshold");
            }
            (Axis::NoisePower, ErrorMetric::Pep(i, j)) => {
                let t = *self.pair_noise(i, j)?;
                push(Bound::Finite(t.small), "");
                push(t.large, "PEP large-noise threshold");
            }
            (Axis::NoisePower, ErrorMetric::Ber) => push(Bound::Finite(self.ber_noise_small), ""),
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
        cuts.dedup();

        let mut edges = vec![T::zero()];
        edges.extend(cuts);
        edges.push(T::infinity());
        let mut out: Vec<Interval<T>> = Vec::new();
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let probe = if hi.is_infinite() {
                lo * T::lit(2.0) + T::one()
            } else {
                (lo + hi) / T::lit(2.0)
            };
            let verdict = self.classify(metric, axis, probe)?.verdict;
            match out.last_mut() {
                Some(prev) if prev.verdict == verdict => prev.hi = hi,
                _ => out.push(Interval {
                    lo,
                    hi,
                    verdict,
                    source: Source::Theorem,
                    note: None,
                }),
            }
        }
        if let Some(note) = vacuous_note {
            if let Some(gap) = out.iter_mut().find(|iv| iv.verdict == Verdict::Indeterminate) {
                gap.note = Some(note);
            } else if let Some(first) = out.first_mut() {
                first.note = Some(note);
            }
        }
        Ok(out)
    }

    /// Confident estimates whose sign contradicts the theorem verdict.
    pub fn contradictions(
        &self,
        metric: ErrorMetric,
        estimates: &[CurvatureEstimate<T>],
    ) -> Result<Vec<CurvatureEstimate<T>>> {
        let mut bad = Vec::new();
        for e in estimates {
            if self.classify(metric, e.axis, e.at)?.verdict.contradicted_by(e.sign()) {
                bad.push(*e);
            }
        }
        Ok(bad)
    }

    /// Open band between the theorem thresholds where inflections are expected,
    /// and the parity of their count.
    pub fn pep_band(&self, i: usize, j: usize, axis: Axis) -> Result<(T, T, Parity)> {
        let (lo, hi, parity) = match axis {
            Axis::Snr => {
                let t = self.pair_snr(i, j)?;
                if self.dim <= 2 {
                    (t.low_printed, t.high, Parity::Odd)
                } else {
                    (t.low_derived, t.high, Parity::Even)
                }
            }
            Axis::NoisePower => {
                let t = self.pair_noise(i, j)?;
                match t.large {
                    Bound::Finite(v) => (Bound::Finite(t.small), v, Parity::Even),
                    other => {
                        return Err(Error::Precondition(format!(
                            "pair ({i}, {j}) has no finite band: large-noise threshold {other}"
                        )))
                    }
                }
            }
        };
        let lo = match lo {
            Bound::Finite(v) => v,
            other => {
                return Err(Error::Precondition(format!(
                    "pair ({i}, {j}) has no finite band: low threshold {other}"
                )))
            }
        };
        Ok((lo, hi, parity))
    }
}

/// Human-readable name of the result governing `metric` along `axis`.
pub fn theorem_name(metric: ErrorMetric, axis: Axis, dim: usize) -> &'static str {
    match (axis, metric) {
        (Axis::Snr, ErrorMetric::Ser) if dim <= 2 => "SER convexity in SNR (low dimension)",
        (Axis::Snr, ErrorMetric::Ser) => "SER convexity in SNR (high-SNR)",
        (Axis::Snr, ErrorMetric::SerPoint(_)) if dim <= 2 => "per-point SER convexity in SNR (low dimension)",
        (Axis::Snr, ErrorMetric::SerPoint(_)) => "per-point SER convexity/concavity in SNR",
        (Axis::Snr, ErrorMetric::Pep(..)) => "PEP convexity in SNR",
        (Axis::Snr, ErrorMetric::Ber) => "BER convexity in SNR (high-SNR)",
        (Axis::NoisePower, ErrorMetric::Ser) => "SER convexity in noise power (small-noise)",
        (Axis::NoisePower, ErrorMetric::SerPoint(_)) => "per-point SER convexity/concavity in noise power",
        (Axis::NoisePower, ErrorMetric::Pep(..)) => "PEP convexity in noise power",
        (Axis::NoisePower, ErrorMetric::Ber) => "BER convexity in noise power (small-noise)",
    }
}

/// Convenience wrapper computing the thresholds first.
pub fn classify<T: Scalar>(
    c: &Constellation<T>,
    axis: Axis,
    metric: ErrorMetric,
    value: T,
) -> Result<Classification> {
    thresholds(c)?.classify(metric, axis, value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    None,
}

impl Parity {
    pub fn of(count: usize) -> Self {
        if count.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Ok,
    /// Fewer confident grid signs than needed for a parity claim.
    InsufficientForParity,
    /// Fewer than two confident signs: nothing can be said.
    InsufficientConfidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Inflection<T> {
    /// Midpoint of the bracketing grid cell.
    pub location: T,
    pub bracket: (T, T),
    /// Smaller `|z|` of the two bracketing estimates.
    pub confidence: T,
}

/// Minimum number of confident grid signs before a parity claim is made.
pub const MIN_CONFIDENT_FOR_PARITY: usize = 20;

/// Minimum grid size accepted by [`inflection_scan`].
pub const MIN_SCAN_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport<T> {
    pub axis: Axis,
    pub intervals: Vec<Interval<T>>,
    pub inflections: Vec<Inflection<T>>,
    pub parity_expected: Parity,
    pub parity_observed: Option<Parity>,
    pub sign_changes: usize,
    pub confident_points: usize,
    pub indeterminate_points: Vec<T>,
    pub status: ScanStatus,
    pub estimates: Vec<CurvatureEstimate<T>>,
}

impl<T: Scalar> Serialize for ConvexityReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(10))?;
        m.serialize_entry("axis", &self.axis)?;
        m.serialize_entry("status", &self.status)?;
        m.serialize_entry("intervals", &self.intervals)?;
        m.serialize_entry("inflections", &self.inflections)?;
        m.serialize_entry("parity_expected", &self.parity_expected)?;
        m.serialize_entry("parity_observed", &self.parity_observed)?;
        m.serialize_entry("sign_changes", &self.sign_changes)?;
        m.serialize_entry("confident_points", &self.confident_points)?;
        m.serialize_entry("indeterminate_points", &self.indeterminate_points)?;
        m.serialize_entry("estimates", &self.estimates)?;
        m.end()
    }
}

impl<T: Scalar> ConvexityReport<T> {
    /// Status is `Ok` and the observed parity matches the expectation.
    pub fn parity_holds(&self) -> bool {
        self.status == ScanStatus::Ok
            && match self.parity_expected {
                Parity::None => true,
                p => self.parity_observed == Some(p),
            }
    }

    /// Confident negative estimates, e.g. counterexample candidates to convexity.
    pub fn negatives(&self) -> Vec<CurvatureEstimate<T>> {
        self.estimates
            .iter()
            .filter(|e| e.sign() == Sign::Negative)
            .copied()
            .collect()
    }

    /// Builds the report from estimates already computed on an increasing grid.
    pub fn from_estimates(axis: Axis, estimates: Vec<CurvatureEstimate<T>>, expected: Parity) -> Self {
        let two = T::lit(2.0);
        let mut intervals: Vec<Interval<T>> = Vec::new();
        let mut inflections = Vec::new();
        let mut indeterminate_points = Vec::new();
        let mut last_confident: Option<&CurvatureEstimate<T>> = None;
        let mut confident_points = 0;

        for e in &estimates {
            let sign = e.sign();
            let verdict = match sign {
                Sign::Positive => Verdict::Convex,
                Sign::Negative => Verdict::Concave,
                Sign::Indeterminate => Verdict::Indeterminate,
            };
            match intervals.last_mut() {
                Some(iv) if iv.verdict == verdict => iv.hi = e.at,
                _ => intervals.push(Interval {
                    lo: e.at,
                    hi: e.at,
                    verdict,
                    source: Source::Empirical,
                    note: None,
                }),
            }
            if !sign.is_confident() {
                indeterminate_points.push(e.at);
                continue;
            }
            confident_points += 1;
            if let Some(prev) = last_confident {
                if prev.sign() != sign {
                    inflections.push(Inflection {
                        location: (prev.at + e.at) / two,
                        bracket: (prev.at, e.at),
                        confidence: prev.z_score().abs().min(e.z_score().abs()),
                    });
                }
            }
            last_confident = Some(e);
        }

        let sign_changes = inflections.len();
        let status = if confident_points < 2 {
            ScanStatus::InsufficientConfidence
        } else if confident_points < MIN_CONFIDENT_FOR_PARITY {
            ScanStatus::InsufficientForParity
        } else {
            ScanStatus::Ok
        };
        let parity_observed = (status == ScanStatus::Ok).then(|| Parity::of(sign_changes));
        Self {
            axis,
            intervals,
            inflections,
            parity_expected: expected,
            parity_observed,
            sign_changes,
            confident_points,
            indeterminate_points,
            status,
            estimates,
        }
    }
}

/// Evaluates `estimate` on `grid` and counts confident sign changes.
///
/// The grid must be positive, strictly increasing and have at least
/// [`MIN_SCAN_POINTS`] points.
pub fn inflection_scan<T, F>(
    estimate: F,
    grid: &[T],
    axis: Axis,
    expected: Parity,
) -> Result<ConvexityReport<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<CurvatureEstimate<T>>,
{
    if grid.len() < MIN_SCAN_POINTS {
        return Err(Error::Precondition(format!(
            "inflection scan needs at least {MIN_SCAN_POINTS} grid points, got {}",
            grid.len()
        )));
    }
    if !(grid[0] > T::zero()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("grid must be positive and strictly increasing".into()));
    }
    let estimates = grid.iter().map(|&g| estimate(g)).collect::<Result<Vec<_>>>()?;
    Ok(ConvexityReport::from_estimates(axis, estimates, expected))
}

/// `points` log-spaced values strictly inside `(lo, hi)`.
pub fn interior_log_grid<T: Scalar>(lo: T, hi: T, points: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let steps = T::from_count(points as u64 + 1);
    (1..=points)
        .map(|k| (a + (b - a) * T::from_count(k as u64) / steps).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_standard, StandardKind};

    fn std(kind: StandardKind) -> Constellation<f64> {
        build_standard(&kind).unwrap()
    }

    #[test]
    fn bpsk_thresholds() {
        let th = thresholds(&std(StandardKind::Bpsk)).unwrap();
        assert!((th.ser_snr_high - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(th.noise_low[0], Bound::Vacuous);
        assert_eq!(th.per_point_snr[0].low, Bound::Vacuous);
        let k = CurvatureConstants::<f64>::new(1);
        assert!((th.ber_noise_small - 1.0 / k.beta1).abs() < 1e-12);
        assert!((th.ber_noise_small - 0.183_503_419_072_273_8).abs() < 1e-12);
    }

    #[test]
    fn qam16_thresholds() {
        let th = thresholds(&std(StandardKind::Qam(16))).unwrap();
        assert!((th.ber_snr_high - 40.0).abs() < 1e-9);
        // Inner neighbor pair (6 → 5): α₁/(d_ij + d_max,j)² = 4/((2+√2)²/10).
        let t = th.pair_snr(6, 5).unwrap();
        let expected = 40.0 / (2.0 + 2f64.sqrt()).powi(2);
        assert!((t.low_printed.value().unwrap() - expected).abs() < 1e-9);
        assert!((expected - 3.431_457_505_076_2).abs() < 1e-9);
        assert_eq!(t.low_derived, Bound::NotApplicable);
        assert!((t.high - 40.0).abs() < 1e-9);
        // Pairs into an outer cell have no low threshold.
        assert_eq!(th.pair_snr(5, 0).unwrap().low_printed, Bound::Vacuous);
    }

    #[test]
    fn qpsk_noise_low_is_vacuous() {
        let th = thresholds(&std(StandardKind::Psk(4))).unwrap();
        assert!(th.noise_low.iter().all(|b| *b == Bound::Vacuous));
        let json = serde_json::to_value(&th).unwrap();
        assert_eq!(json["noise_low"][0], "vacuous");
        assert_eq!(json["extents"][0]["d_max"], "inf");
    }

    #[test]
    fn ser_high_is_max_of_point_thresholds() {
        for kind in [StandardKind::Qam(16), StandardKind::Grid { side: 3, dim: 3 }, StandardKind::Psk(8)] {
            let th = thresholds(&std(kind)).unwrap();
            let max = th.per_point_snr.iter().map(|p| p.high).fold(0.0, f64::max);
            assert_eq!(th.ser_snr_high, max);
        }
    }

    #[test]
    fn classification_examples() {
        let bpsk = thresholds(&std(StandardKind::Bpsk)).unwrap();
        for g in [0.01, 1.0, 100.0] {
            assert_eq!(bpsk.classify(ErrorMetric::Ser, Axis::Snr, g).unwrap().verdict, Verdict::Convex);
        }
        let qam = thresholds(&std(StandardKind::Qam(16))).unwrap();
        assert_eq!(qam.classify(ErrorMetric::Ber, Axis::Snr, 50.0).unwrap().verdict, Verdict::Convex);
        assert_eq!(qam.classify(ErrorMetric::Ber, Axis::Snr, 30.0).unwrap().verdict, Verdict::Indeterminate);
        assert_eq!(qam.classify(ErrorMetric::Pep(6, 5), Axis::Snr, 2.0).unwrap().verdict, Verdict::Concave);
        assert_eq!(qam.classify(ErrorMetric::Pep(6, 5), Axis::Snr, 10.0).unwrap().verdict, Verdict::Indeterminate);
        assert!(qam.classify(ErrorMetric::Pep(6, 6), Axis::Snr, 10.0).is_err());
        assert!(qam.classify(ErrorMetric::Ber, Axis::Snr, 0.0).is_err());
    }

    #[test]
    fn printed_claim_reported_for_high_dimensions() {
        let g = std(StandardKind::Grid { side: 3, dim: 3 });
        let th = thresholds(&g).unwrap();
        let t = th.pair_snr(12, 13).unwrap();
        let derived = t.low_derived.value().unwrap();
        let printed = t.low_printed.value().unwrap();
        assert!(derived < printed);
        let between = (derived + printed) / 2.0;
        let c = th.classify(ErrorMetric::Pep(12, 13), Axis::Snr, between).unwrap();
        assert_eq!(c.verdict, Verdict::Indeterminate);
        assert_eq!(c.printed_claim, Some(Verdict::Convex));
        let below = th.classify(ErrorMetric::Pep(12, 13), Axis::Snr, derived / 2.0).unwrap();
        assert_eq!(below.verdict, Verdict::Convex);
    }

    #[test]
    fn theorem_intervals_partition_the_axis() {
        let g = std(StandardKind::Grid { side: 3, dim: 3 });
        let th = thresholds(&g).unwrap();
        let metrics = [ErrorMetric::Ser, ErrorMetric::SerPoint(13), ErrorMetric::SerPoint(0), ErrorMetric::Pep(12, 13), ErrorMetric::Pep(13, 0), ErrorMetric::Ber];
        for axis in [Axis::Snr, Axis::NoisePower] {
            for m in metrics {
                let ivs = th.theorem_intervals(m, axis).unwrap();
                assert_eq!(ivs[0].lo, 0.0);
                assert!(ivs.last().unwrap().hi.is_infinite());
                for w in ivs.windows(2) {
                    assert_eq!(w[0].hi, w[1].lo);
                    assert_ne!(w[0].verdict, w[1].verdict);
                }
            }
        }
        let center = th.theorem_intervals(ErrorMetric::SerPoint(13), Axis::Snr).unwrap();
        let verdicts: Vec<Verdict> = center.iter().map(|i| i.verdict).collect();
        assert_eq!(verdicts, vec![Verdict::Concave, Verdict::Indeterminate, Verdict::Convex]);
        let outer = th.theorem_intervals(ErrorMetric::Pep(13, 0), Axis::NoisePower).unwrap();
        assert!(outer.iter().any(|i| i.note.is_some()));
    }

    #[test]
    fn scale_covariance_on_unnormalized_points() {
        let base = std(StandardKind::Qam(16));
        let th = thresholds(&base).unwrap();
        let c = 2.5;
        let scaled = thresholds(&base.clone().scaled(c)).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs() < 1e-12;
        assert!(rel(scaled.d_min, th.d_min * c));
        assert!(rel(scaled.ber_snr_high, th.ber_snr_high / (c * c)));
        for (a, b) in scaled.pep_snr.iter().zip(&th.pep_snr) {
            assert!(rel(a.high, b.high / (c * c)));
            if let (Some(x), Some(y)) = (a.low_printed.value(), b.low_printed.value()) {
                assert!(rel(x, y / (c * c)));
            }
        }
        for (a, b) in scaled.pep_noise.iter().zip(&th.pep_noise) {
            assert!(rel(a.small, b.small * c * c));
        }
    }

    fn est(at: f64, value: f64) -> CurvatureEstimate<f64> {
        CurvatureEstimate {
            value,
            std_err: 0.1,
            samples: 100,
            seed: 0,
            axis: Axis::Snr,
            at,
        }
    }

    #[test]
    fn scan_counts_confident_sign_changes() {
        let grid: Vec<f64> = (1..=24).map(|k| k as f64).collect();
        let f = |g: f64| Ok(est(g, if g < 10.0 { -1.0 } else if g < 11.0 { 0.0 } else { 1.0 }));
        let r = inflection_scan(f, &grid, Axis::Snr, Parity::Odd).unwrap();
        assert_eq!(r.sign_changes, 1);
        assert_eq!(r.confident_points, 23);
        assert_eq!(r.indeterminate_points, vec![10.0]);
        assert_eq!(r.inflections[0].bracket, (9.0, 11.0));
        assert_eq!(r.inflections[0].location, 10.0);
        assert!(r.parity_holds());
        assert_eq!(r.intervals.len(), 3);
    }

    #[test]
    fn scan_with_too_few_confident_signs() {
        let grid: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let r = inflection_scan(|g| Ok(est(g, 0.0)), &grid, Axis::Snr, Parity::Even).unwrap();
        assert_eq!(r.status, ScanStatus::InsufficientConfidence);
        assert!(!r.parity_holds());
        let r = inflection_scan(|g| Ok(est(g, if g < 5.0 { 1.0 } else { 0.0 })), &grid, Axis::Snr, Parity::Even)
            .unwrap();
        assert_eq!(r.status, ScanStatus::InsufficientForParity);
        assert_eq!(r.parity_observed, None);
        assert!(inflection_scan(|g| Ok(est(g, 1.0)), &grid[..5], Axis::Snr, Parity::Even).is_err());
    }

    #[test]
    fn pep_band_for_inner_cells() {
        let th = thresholds(&std(StandardKind::Qam(16))).unwrap();
        let (lo, hi, parity) = th.pep_band(6, 5, Axis::Snr).unwrap();
        assert!((lo - 3.431_457_505_076_2).abs() < 1e-9 && (hi - 40.0).abs() < 1e-9);
        assert_eq!(parity, Parity::Odd);
        assert!(th.pep_band(5, 0, Axis::Snr).is_err());
        let grid = interior_log_grid(lo, hi, 30);
        assert_eq!(grid.len(), 30);
        assert!(grid[0] > lo && grid[29] < hi);
    }
}
