//! Second derivatives of error rates in SNR and noise power.
//!
//! For the Gaussian noise density `p(x) = (2πP)^{-n/2} exp(−|x|²/2P)` with
//! `P = 1/γ`, differentiating twice gives
//!
//! ```text
//! d²p/dγ²  = p(x) · f(|x|²) / 4,           f(t)  = (t − α₁/γ)(t − α₂/γ)
//! d²p/dP²  = p(x) · f*(|x|²) / (4P⁴),      f*(t) = (t − β₁P)(t − β₂P)
//! ```
//!
//! with `α₁,₂ = n ± √(2n)` and `β₁,₂ = n + 2 ± √(2(n+2))`. The second
//! derivative of an error rate is the integral of these over its error region,
//! which we estimate as an expectation under `p` itself: the per-sample
//! weight is `f/4` (resp. `f*/(4P⁴)`) times the error indicator.

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{positive, Error, Result};
use crate::error_engine::{normal_pdf, ErrorMetric, Estimate, MetricSampler};
use crate::mc::Budget;
use crate::scalar::{norm_sq, Scalar};

/// A sign is claimed only when `|mean| > CONFIDENCE_SIGMAS · std_err`.
pub const CONFIDENCE_SIGMAS: f64 = 3.0;

/// Roots of the curvature polynomials for dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CurvatureConstants<T> {
    pub alpha1: T,
    pub alpha2: T,
    pub beta1: T,
    pub beta2: T,
}

impl<T: Scalar> CurvatureConstants<T> {
    pub fn new(n: usize) -> Self {
        let n = T::from_count(n as u64);
        let two = T::lit(2.0);
        let r = (two * n).sqrt();
        let m = n + two;
        let s = (two * m).sqrt();
        Self {
            alpha1: n + r,
            alpha2: n - r,
            beta1: m + s,
            beta2: m - s,
        }
    }
}

/// Parameter the error rate is differentiated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `γ = 1/σ₀²`
    Snr,
    /// `P_N = σ₀²`
    #[serde(alias = "noise")]
    NoisePower,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Snr => "snr",
            Axis::NoisePower => "noise",
        }
    }

    /// Noise power corresponding to a value on this axis.
    pub fn noise_power<T: Scalar>(&self, value: T) -> T {
        match self {
            Axis::Snr => value.recip(),
            Axis::NoisePower => value,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "snr" | "gamma" => Ok(Axis::Snr),
            "noise" | "noise_power" | "noise-power" | "pn" => Ok(Axis::NoisePower),
            other => Err(Error::Unsupported(format!("unknown axis {other:?}"))),
        }
    }
}

/// Sign of a second derivative at the confidence level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Indeterminate,
}

impl Sign {
    pub fn symbol(&self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Indeterminate => "0",
        }
    }

    pub fn is_confident(&self) -> bool {
        !matches!(self, Sign::Indeterminate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CurvatureEstimate<T> {
    pub value: T,
    pub std_err: T,
    pub samples: u64,
    pub seed: u64,
    pub axis: Axis,
    /// The SNR or noise power the derivative is taken at.
    pub at: T,
}

impl<T: Scalar> CurvatureEstimate<T> {
    pub fn sign(&self) -> Sign {
        let k = T::lit(CONFIDENCE_SIGMAS);
        if self.value.abs() > k * self.std_err {
            if self.value > T::zero() {
                Sign::Positive
            } else {
                Sign::Negative
            }
        } else {
            Sign::Indeterminate
        }
    }

    /// `value / std_err`, infinite for exact nonzero values.
    pub fn z_score(&self) -> T {
        if self.std_err > T::zero() {
            self.value / self.std_err
        } else if self.value == T::zero() {
            T::zero()
        } else {
            self.value.signum() * T::infinity()
        }
    }
}

/// `f(t) = (t − α₁/γ)(t − α₂/γ)`.
pub fn f_snr<T: Scalar>(t: T, snr: T, n: usize) -> T {
    let k = CurvatureConstants::<T>::new(n);
    (t - k.alpha1 / snr) * (t - k.alpha2 / snr)
}

/// `f*(t) = (t − β₁P_N)(t − β₂P_N)`.
pub fn f_noise<T: Scalar>(t: T, noise_power: T, n: usize) -> T {
    let k = CurvatureConstants::<T>::new(n);
    (t - k.beta1 * noise_power) * (t - k.beta2 * noise_power)
}

/// Density of `N(0, P_N·I)` at `x`.
pub fn noise_pdf<T: Scalar>(x: &[T], noise_power: T) -> T {
    let n = T::from_count(x.len() as u64);
    (T::TAU() * noise_power).powf(-n / T::lit(2.0)) * (-norm_sq(x) / (T::lit(2.0) * noise_power)).exp()
}

/// `d²p/dγ² = ¼ (γ/2π)^{n/2} e^{−γ|x|²/2} f(|x|²)`.
pub fn d2_pdf_dsnr<T: Scalar>(x: &[T], snr: T) -> T {
    let t = norm_sq(x);
    noise_pdf(x, snr.recip()) * f_snr(t, snr, x.len()) / T::lit(4.0)
}

/// `d²p/dP_N² = (1/(4P_N⁴)) (2πP_N)^{−n/2} e^{−|x|²/2P_N} f*(|x|²)`.
pub fn d2_pdf_dnoise<T: Scalar>(x: &[T], noise_power: T) -> T {
    let t = norm_sq(x);
    let p4 = noise_power.powi(4);
    noise_pdf(x, noise_power) * f_noise(t, noise_power, x.len()) / (T::lit(4.0) * p4)
}

/// Closed-form `d²/dγ² Q(√γ) = φ(√γ)(1/(4√γ) + 1/(4γ^{3/2}))`, the BPSK SER curvature.
pub fn bpsk_ser_d2_snr<T: Scalar>(snr: T) -> T {
    let r = snr.sqrt();
    let four = T::lit(4.0);
    normal_pdf(r) * ((four * r).recip() + (four * snr * r).recip())
}

/// Monte Carlo second derivative of `metric` along `axis` at `at`.
pub fn curvature_mc<T: Scalar>(
    c: &Constellation<T>,
    metric: ErrorMetric,
    axis: Axis,
    at: T,
    budget: Budget,
) -> Result<CurvatureEstimate<T>> {
    budget.check()?;
    positive(
        match axis {
            Axis::Snr => "snr",
            Axis::NoisePower => "noise power",
        },
        at.to_f64_lossy(),
    )?;
    let sampler = MetricSampler::new(c, metric)?;
    let n = c.dim();
    let pn = axis.noise_power(at);
    let four = T::lit(4.0);
    let m = match axis {
        Axis::Snr => sampler.weighted_moments(pn.sqrt(), budget, |t| f_snr(t, at, n) / four),
        Axis::NoisePower => {
            let scale = (four * pn.powi(4)).recip();
            sampler.weighted_moments(pn.sqrt(), budget, |t| f_noise(t, pn, n) * scale)
        }
    };
    let (value, std_err) = m.mean_and_error(budget.samples);
    Ok(CurvatureEstimate {
        value,
        std_err,
        samples: budget.samples,
        seed: budget.seed,
        axis,
        at,
    })
}

/// `d²/dγ² Pr{s_i → s_j}`.
pub fn pep_d2_snr_mc<T: Scalar>(
    c: &Constellation<T>,
    i: usize,
    j: usize,
    snr: T,
    budget: Budget,
) -> Result<CurvatureEstimate<T>> {
    curvature_mc(c, ErrorMetric::Pep(i, j), Axis::Snr, snr, budget)
}

/// `d²/dP_N² Pr{s_i → s_j}`.
pub fn pep_d2_noise_mc<T: Scalar>(
    c: &Constellation<T>,
    i: usize,
    j: usize,
    noise_power: T,
    budget: Budget,
) -> Result<CurvatureEstimate<T>> {
    curvature_mc(c, ErrorMetric::Pep(i, j), Axis::NoisePower, noise_power, budget)
}

/// Default finite-difference step `max(1e-3·at, 1e-4)`.
pub fn default_step<T: Scalar>(at: T) -> T {
    (T::lit(1e-3) * at).max(T::lit(1e-4))
}

/// Central second difference `(m(at+h) − 2m(at) + m(at−h))/h²`.
///
/// All three evaluations get the same budget, hence the same sample stream.
/// The standard error is propagated as if the three estimates were
/// independent, which overstates it under positively correlated streams.
pub fn finite_diff_d2<T, F>(
    metric: F,
    axis: Axis,
    at: T,
    h: T,
    budget: Budget,
) -> Result<CurvatureEstimate<T>>
where
    T: Scalar,
    F: Fn(T, Budget) -> Result<Estimate<T>>,
{
    positive("step", h.to_f64_lossy())?;
    positive("lower evaluation point", (at - h).to_f64_lossy())?;
    let hi = metric(at + h, budget)?;
    let mid = metric(at, budget)?;
    let lo = metric(at - h, budget)?;
    let two = T::lit(2.0);
    let h2 = h * h;
    let value = (hi.mean - two * mid.mean + lo.mean) / h2;
    let var = hi.std_err.powi(2) + T::lit(4.0) * mid.std_err.powi(2) + lo.std_err.powi(2);
    Ok(CurvatureEstimate {
        value,
        std_err: var.sqrt() / h2,
        samples: mid.samples,
        seed: budget.seed,
        axis,
        at,
    })
}
