//! Minimum-distance detection and Monte Carlo error rates.
//!
//! All estimators draw `ξ = σ₀·z` with `z` from the shared sample stream of
//! [`crate::mc`]. The stream depends only on `(seed, samples, n)`, so runs at
//! different SNRs or for different point pairs see the same `z` (common
//! random numbers), and SER, PEP and BER computed with one seed are coherent
//! sample by sample.

use serde::{Deserialize, Serialize};

use crate::constellation::{hamming_matrix, BitMapping, ChannelParams, Constellation, StandardKind};
use crate::error::{Error, Result};
use crate::mc::{run_batches, Budget, Moments};
use crate::scalar::{dist_sq, Scalar};

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Estimate<T> {
    pub mean: T,
    pub std_err: T,
    pub samples: u64,
    pub seed: u64,
}

impl<T: Scalar> Estimate<T> {
    pub(crate) fn from_moments(m: Moments<T>, budget: Budget) -> Self {
        let (mean, std_err) = m.mean_and_error(budget.samples);
        Self {
            mean,
            std_err,
            samples: budget.samples,
            seed: budget.seed,
        }
    }

    /// A deterministic value with zero error, e.g. a closed form.
    pub fn exact(mean: T) -> Self {
        Self {
            mean,
            std_err: T::zero(),
            samples: 0,
            seed: 0,
        }
    }

    /// `|self − other| ≤ k · √(se₁² + se₂²)`.
    pub fn agrees_with(&self, other: &Self, k: T) -> bool {
        let se = (self.std_err * self.std_err + other.std_err * other.std_err).sqrt();
        (self.mean - other.mean).abs() <= k * se
    }

    /// No event observed: the true probability is below roughly `3/samples`
    /// (rule of three) and is reported as 0.
    pub fn is_unresolved_tail(&self) -> bool {
        self.mean == T::zero() && self.samples > 0
    }
}

/// Which error rate to evaluate. Point indices refer to the constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ErrorMetric {
    /// Average SER weighted by the priors.
    Ser,
    /// SER conditioned on transmitting point `i`.
    SerPoint(usize),
    /// Pairwise error probability `Pr{s_i → s_j}`.
    Pep(usize, usize),
    /// Bit error rate; needs labels.
    Ber,
}

impl std::fmt::Display for ErrorMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorMetric::Ser => write!(f, "ser"),
            ErrorMetric::SerPoint(i) => write!(f, "ser:{i}"),
            ErrorMetric::Pep(i, j) => write!(f, "pep:{i}:{j}"),
            ErrorMetric::Ber => write!(f, "ber"),
        }
    }
}

impl std::str::FromStr for ErrorMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Unsupported(format!("unknown metric {s:?}"));
        let idx = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        Ok(match parts.as_slice() {
            ["ser"] => ErrorMetric::Ser,
            ["ser", i] => ErrorMetric::SerPoint(idx(i)?),
            ["pep", i, j] => ErrorMetric::Pep(idx(i)?, idx(j)?),
            ["ber"] => ErrorMetric::Ber,
            _ => return Err(bad()),
        })
    }
}

impl TryFrom<String> for ErrorMetric {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ErrorMetric> for String {
    fn from(m: ErrorMetric) -> Self {
        m.to_string()
    }
}

impl ErrorMetric {
    pub fn validate<T: Scalar>(&self, c: &Constellation<T>) -> Result<()> {
        match *self {
            ErrorMetric::Ser => Ok(()),
            ErrorMetric::SerPoint(i) => c.check_index(i),
            ErrorMetric::Pep(i, j) => {
                c.check_index(i)?;
                c.check_index(j)?;
                if i == j {
                    Err(Error::SamePair(i))
                } else {
                    Ok(())
                }
            }
            ErrorMetric::Ber => hamming_matrix(c).map(|_| ()),
        }
    }
}

/// Index of the nearest point; ties go to the lowest index.
pub fn ml_detect<T: Scalar>(c: &Constellation<T>, r: &[T]) -> usize {
    let mut best = 0;
    let mut best_d = T::infinity();
    for (k, p) in c.points().iter().enumerate() {
        let d = dist_sq(r, p);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// Detects `s_i + σz`, using `buf` as scratch space for the received vector.
#[inline]
fn detect_from<T: Scalar>(c: &Constellation<T>, i: usize, sigma: T, z: &[T], buf: &mut [T]) -> usize {
    for ((r, &s), &zk) in buf.iter_mut().zip(c.point(i)).zip(z) {
        *r = s + sigma * zk;
    }
    ml_detect(c, buf)
}

/// Per-sample value of an error-rate indicator for a fixed noise draw.
pub(crate) struct MetricSampler<'a, T> {
    c: &'a Constellation<T>,
    metric: ErrorMetric,
    bits: Option<BitMapping>,
}

impl<'a, T: Scalar> MetricSampler<'a, T> {
    pub fn new(c: &'a Constellation<T>, metric: ErrorMetric) -> Result<Self> {
        metric.validate(c)?;
        let bits = match metric {
            ErrorMetric::Ber => Some(hamming_matrix(c)?),
            _ => None,
        };
        Ok(Self { c, metric, bits })
    }

    /// Indicator (or prior-weighted average of indicators) for noise `σz`.
    pub fn value(&self, sigma: T, z: &[T], buf: &mut [T]) -> T {
        let c = self.c;
        let ind = |b: bool| if b { T::one() } else { T::zero() };
        match self.metric {
            ErrorMetric::Pep(i, j) => ind(detect_from(c, i, sigma, z, buf) == j),
            ErrorMetric::SerPoint(i) => ind(detect_from(c, i, sigma, z, buf) != i),
            ErrorMetric::Ser => (0..c.len())
                .filter(|&i| detect_from(c, i, sigma, z, buf) != i)
                .map(|i| c.priors()[i])
                .sum(),
            ErrorMetric::Ber => {
                let bits = self.bits.as_ref().expect("bit mapping present for BER");
                let per_bit = T::from_count(bits.bits_per_symbol as u64).recip();
                (0..c.len())
                    .map(|i| {
                        let k = detect_from(c, i, sigma, z, buf);
                        c.priors()[i] * T::from_count(bits.h(i, k) as u64)
                    })
                    .sum::<T>()
                    * per_bit
            }
        }
    }

    /// Moments of `value(σz) · weight(|σz|²)` over the sample stream.
    pub fn weighted_moments<W>(&self, sigma: T, budget: Budget, weight: W) -> Moments<T>
    where
        W: Fn(T) -> T + Sync,
    {
        let n = self.c.dim();
        let parts = run_batches(
            n,
            budget,
            || (Moments::<T>::default(), vec![T::zero(); n]),
            |(m, buf), z: &[T]| {
                let v = self.value(sigma, z, buf);
                // Skip the weight when the indicator is zero; it may be costly.
                let x = if v == T::zero() {
                    T::zero()
                } else {
                    let t: T = z.iter().map(|&zk| zk * zk).sum::<T>() * sigma * sigma;
                    v * weight(t)
                };
                m.push(x);
            },
        );
        Moments::merge(parts.into_iter().map(|(m, _)| m))
    }
}

/// Monte Carlo estimate of any [`ErrorMetric`] at the given channel.
pub fn rate_mc<T: Scalar>(
    c: &Constellation<T>,
    metric: ErrorMetric,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<Estimate<T>> {
    budget.check()?;
    let sampler = MetricSampler::new(c, metric)?;
    let m = sampler.weighted_moments(ch.sigma(), budget, |_| T::one());
    Ok(Estimate::from_moments(m, budget))
}

/// How many of the samples sent from `s_i` were decoded as each point.
pub fn detection_counts<T: Scalar>(
    c: &Constellation<T>,
    i: usize,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<Vec<u64>> {
    budget.check()?;
    c.check_index(i)?;
    let m = c.len();
    let sigma = ch.sigma();
    let parts = run_batches(
        c.dim(),
        budget,
        || (vec![0u64; m], vec![T::zero(); c.dim()]),
        |(counts, buf), z: &[T]| counts[detect_from(c, i, sigma, z, buf)] += 1,
    );
    let mut total = vec![0u64; m];
    for (counts, _) in parts {
        for (t, k) in total.iter_mut().zip(counts) {
            *t += k;
        }
    }
    Ok(total)
}

pub fn pep_mc<T: Scalar>(
    c: &Constellation<T>,
    i: usize,
    j: usize,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<Estimate<T>> {
    rate_mc(c, ErrorMetric::Pep(i, j), ch, budget)
}

pub fn ser_mc<T: Scalar>(
    c: &Constellation<T>,
    i: usize,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<Estimate<T>> {
    rate_mc(c, ErrorMetric::SerPoint(i), ch, budget)
}

pub fn ser_avg_mc<T: Scalar>(
    c: &Constellation<T>,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<Estimate<T>> {
    rate_mc(c, ErrorMetric::Ser, ch, budget)
}

/// BER by counting Hamming errors per sample.
pub fn ber_mc<T: Scalar>(
    c: &Constellation<T>,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<Estimate<T>> {
    rate_mc(c, ErrorMetric::Ber, ch, budget)
}

/// BER assembled from pairwise error counts:
/// `Σ_i Σ_{j≠i} (h_ij / L) Pr{s_i} Pr{s_i → s_j}`.
///
/// Uses the same sample stream as [`ber_mc`], so the two agree up to rounding.
pub fn ber_from_pep_mc<T: Scalar>(
    c: &Constellation<T>,
    ch: &ChannelParams<T>,
    budget: Budget,
) -> Result<T> {
    let bits = hamming_matrix(c)?;
    let n = T::from_count(budget.samples);
    let per_bit = T::from_count(bits.bits_per_symbol as u64).recip();
    let mut total = T::zero();
    for i in 0..c.len() {
        let counts = detection_counts(c, i, ch, budget)?;
        for (j, &k) in counts.iter().enumerate() {
            if j != i {
                total = total
                    + T::from_count(bits.h(i, j) as u64) * per_bit * c.priors()[i] * T::from_count(k) / n;
            }
        }
    }
    Ok(total)
}

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`.
pub fn q_function<T: Scalar>(x: T) -> T {
    T::lit(0.5 * libm::erfc(x.to_f64_lossy() * std::f64::consts::FRAC_1_SQRT_2))
}

/// Closed-form SER for unit-energy BPSK (`Q(√γ)`) and QPSK (`1 − (1 − Q(√(γ/2)))²`).
pub fn oracle_ser<T: Scalar>(kind: &StandardKind, snr: T) -> Result<T> {
    match kind {
        StandardKind::Bpsk | StandardKind::Psk(2) => Ok(q_function(snr.sqrt())),
        StandardKind::Psk(4) | StandardKind::Qam(4) => {
            let q = q_function((snr / T::lit(2.0)).sqrt());
            Ok(T::one() - (T::one() - q) * (T::one() - q))
        }
        other => Err(Error::Unsupported(format!("no closed-form SER for {other}"))),
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::build_standard;

    fn std(kind: StandardKind) -> Constellation<f64> {
        build_standard(&kind).unwrap()
    }

    fn snr(g: f64) -> ChannelParams<f64> {
        ChannelParams::from_snr(g).unwrap()
    }

    /// Simpson's rule on the normal density over [x, x + 40], independent of erfc.
    fn q_by_quadrature(x: f64) -> f64 {
        let n = 200_000;
        let h = 40.0 / n as f64;
        let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(x) + f(x + 40.0);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(x + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn q_function_matches_quadrature_and_frozen_values() {
        for x in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0] {
            assert!((q_function::<f64>(x) - q_by_quadrature(x)).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(q_function(0.0_f64), 0.5);
        assert!((q_function(1.0_f64) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((q_function(2.0_f64) - 0.022_750_131_948_179_21).abs() < 1e-15);
        assert!((q_function(8.0_f64) - 6.220_960_574_271_784e-16).abs() < 1e-27);
        assert!((oracle_ser(&StandardKind::Bpsk, 4.0_f64).unwrap() - 0.022_750_131_948_179_21).abs() < 1e-15);
        assert!((oracle_ser(&StandardKind::Psk(4), 8.0_f64).unwrap() - 0.044_982_695_392_698_85).abs() < 1e-15);
        assert!(oracle_ser(&StandardKind::Qam(16), 8.0_f64).is_err());
    }

    #[test]
    fn detection_rules() {
        let bpsk = std(StandardKind::Bpsk);
        assert_eq!(ml_detect(&bpsk, &[0.3]), 0);
        assert_eq!(ml_detect(&bpsk, &[-0.3]), 1);
        let qpsk = std(StandardKind::Psk(4));
        for i in 0..4 {
            assert_eq!(ml_detect(&qpsk, qpsk.point(i)), i);
        }
        assert_eq!(ml_detect(&qpsk, &[0.0, 0.0]), 0);
    }

    #[test]
    fn bpsk_pep_matches_q() {
        let c = std(StandardKind::Bpsk);
        let e = pep_mc(&c, 0, 1, &snr(4.0), Budget::new(1_000_000, 1)).unwrap();
        assert!((e.mean - 0.022_750_131_948_179_21).abs() <= 3.0 * e.std_err, "{e:?}");
        let bern = (e.mean * (1.0 - e.mean) / 1e6).sqrt();
        assert!((e.std_err - bern).abs() < 1e-12);
    }

    #[test]
    fn vanishing_noise_gives_zero() {
        let c = std(StandardKind::Bpsk);
        let e = pep_mc(&c, 0, 1, &snr(400.0), Budget::new(100_000, 1)).unwrap();
        assert_eq!(e.mean, 0.0);
        assert!(e.is_unresolved_tail());
        let q = std(StandardKind::Psk(4));
        assert_eq!(ber_mc(&q, &snr(1e4), Budget::new(100_000, 1)).unwrap().mean, 0.0);
    }

    #[test]
    fn qpsk_adjacent_pep_is_bracketed() {
        let c = std(StandardKind::Psk(4));
        let e = pep_mc(&c, 0, 1, &snr(8.0), Budget::new(1_000_000, 2)).unwrap();
        let q2 = 0.022_750_131_948_179_21;
        let (lo, hi) = (q2 * (1.0 - q2), q2);
        assert!(e.mean >= lo - 3.0 * e.std_err && e.mean <= hi + 3.0 * e.std_err, "{e:?}");
    }

    #[test]
    fn ser_oracles() {
        let bpsk = std(StandardKind::Bpsk);
        let e = ser_mc(&bpsk, 0, &snr(4.0), Budget::new(1_000_000, 3)).unwrap();
        assert!((e.mean - 0.022_750_131_948_179_21).abs() <= 3.0 * e.std_err);
        let qpsk = std(StandardKind::Psk(4));
        let e = ser_avg_mc(&qpsk, &snr(8.0), Budget::new(1_000_000, 3)).unwrap();
        assert!((e.mean - 0.044_982_695_392_698_85).abs() <= 3.0 * e.std_err, "{e:?}");
        let e = ser_avg_mc(&bpsk, &snr(1e-6), Budget::new(200_000, 3)).unwrap();
        assert!((e.mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn ser_equals_sum_of_peps_on_shared_stream() {
        let c = std(StandardKind::Qam(16));
        let budget = Budget::new(200_000, 9);
        for i in [0, 5] {
            let counts = detection_counts(&c, i, &snr(5.0), budget).unwrap();
            let ser = ser_mc(&c, i, &snr(5.0), budget).unwrap();
            let errors: u64 = counts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, k)| k).sum();
            assert_eq!(counts.iter().sum::<u64>(), budget.samples);
            assert_eq!((ser.mean * budget.samples as f64).round() as u64, errors);
            for j in [1, 4, 6] {
                if j == i {
                    continue;
                }
                let pep = pep_mc(&c, i, j, &snr(5.0), budget).unwrap();
                assert_eq!((pep.mean * budget.samples as f64).round() as u64, counts[j]);
            }
        }
    }

    #[test]
    fn ber_oracles_and_paths_agree() {
        let bpsk = std(StandardKind::Bpsk);
        let e = ber_mc(&bpsk, &snr(4.0), Budget::new(1_000_000, 4)).unwrap();
        assert!((e.mean - 0.022_750_131_948_179_21).abs() <= 3.0 * e.std_err);

        let qpsk = std(StandardKind::Psk(4));
        let budget = Budget::new(1_000_000, 4);
        let e = ber_mc(&qpsk, &snr(8.0), budget).unwrap();
        assert!((e.mean - 0.022_750_131_948_179_21).abs() <= 3.0 * e.std_err, "{e:?}");
        let via_pep = ber_from_pep_mc(&qpsk, &snr(8.0), budget).unwrap();
        assert!((via_pep - e.mean).abs() < 1e-12);
    }

    #[test]
    fn ber_bounded_by_ser() {
        let c = std(StandardKind::Qam(16));
        let h = hamming_matrix(&c).unwrap();
        let budget = Budget::new(200_000, 5);
        for g in [1.0, 5.0, 20.0] {
            let ser = ser_avg_mc(&c, &snr(g), budget).unwrap().mean;
            let ber = ber_mc(&c, &snr(g), budget).unwrap().mean;
            let l = h.bits_per_symbol as f64;
            assert!(ber <= ser * h.max_distance() as f64 / l + 1e-12);
            assert!(ber >= ser / l - 1e-12);
        }
    }

    #[test]
    fn ber_needs_labels() {
        let c = crate::constellation::normalize(vec![vec![1.0_f64], vec![-1.0]]).unwrap();
        assert!(matches!(ber_mc(&c, &snr(1.0), Budget::new(10, 1)), Err(Error::MissingLabels)));
        assert!(ser_avg_mc(&c, &snr(1.0), Budget::new(10, 1)).is_ok());
    }

    #[test]
    fn ser_monotone_in_snr() {
        let c = std(StandardKind::Psk(8));
        let budget = Budget::new(100_000, 6);
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let g = 0.25 * 2f64.powi(k);
            let e = ser_avg_mc(&c, &snr(g), budget).unwrap();
            assert!(e.mean <= prev);
            prev = e.mean;
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let c = std(StandardKind::Qam(16));
        let a = ber_mc(&c, &snr(3.0), Budget::new(50_000, 8)).unwrap();
        let b = ber_mc(&c, &snr(3.0), Budget::new(50_000, 8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_pairs_and_channels() {
        let c = std(StandardKind::Bpsk);
        assert!(pep_mc(&c, 0, 0, &snr(1.0), Budget::new(10, 1)).is_err());
        assert!(pep_mc(&c, 0, 1, &snr(1.0), Budget::new(0, 1)).is_err());
        assert!(ChannelParams::<f64>::from_noise_power(0.0).is_err());
    }

    #[test]
    fn metric_names_parse() {
        for s in ["ser", "ser:3", "pep:0:1", "ber"] {
            assert_eq!(s.parse::<ErrorMetric>().unwrap().to_string(), s);
        }
        assert!("pep:1".parse::<ErrorMetric>().is_err());
    }
}
