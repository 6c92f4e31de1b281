//! Sphere hardening, the chi-square error floor, the capacity conjecture and
//! time/power sharing (Jensen) probes.

use serde::Serialize;

use crate::constellation::{ChannelParams, Constellation};
use crate::convexity::{thresholds, ConvexityReport, Parity, ThresholdSet, Verdict};
use crate::curvature::{curvature_mc, Axis, CurvatureEstimate, Sign};
use crate::error::{positive, Error, Result};
use crate::error_engine::{rate_mc, ser_avg_mc, ErrorMetric, Estimate};
use crate::geometry::{contains_ball, voronoi_region};
use crate::mc::{mean_of, Budget};
use crate::scalar::{norm_sq, Scalar};

/// `n(σ₀² + ε) > (n + √(2n))σ₀²`.
pub fn snr_chain_holds(n: u64, noise_power: f64, epsilon: f64) -> bool {
    let n = n as f64;
    n * (noise_power + epsilon) > (n + (2.0 * n).sqrt()) * noise_power
}

/// `n(σ₀² + ε) > (n + 2 + √(2(n+2)))σ₀²`.
pub fn noise_chain_holds(n: u64, noise_power: f64, epsilon: f64) -> bool {
    let n = n as f64;
    n * (noise_power + epsilon) > (n + 2.0 + (2.0 * (n + 2.0)).sqrt()) * noise_power
}

/// Smallest `n ≥ 1` satisfying `holds`, assuming it keeps holding afterwards.
fn min_dimension(holds: impl Fn(u64) -> bool) -> Option<u64> {
    const LIMIT: u64 = 1 << 62;
    let mut hi = 1u64;
    while !holds(hi) {
        if hi >= LIMIT {
            return None;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Some(1);
    }
    // holds(hi), !holds(lo)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PointContainment<T> {
    pub index: usize,
    pub d_min: T,
    pub encloses: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SphereHardeningReport<T> {
    pub dim: usize,
    pub noise_power: T,
    pub epsilon: T,
    /// `√(n(σ₀² + ε))`.
    pub radius: T,
    pub points: Vec<PointContainment<T>>,
    pub all_enclose: bool,
    pub snr_chain_holds: bool,
    pub min_dimension_snr: Option<u64>,
    pub noise_chain_holds: bool,
    pub min_dimension_noise: Option<u64>,
    /// Every region encloses the hardened sphere and the SNR chain holds,
    /// so the BER (and SER, PEP) is convex in SNR here.
    pub high_snr_condition: bool,
    /// Same with the noise-power chain.
    pub small_noise_condition: bool,
    pub verdict: String,
}

/// Checks whether every decision region encloses the hardened noise sphere.
///
/// `epsilon` defaults to `noise_power / 10`.
pub fn sphere_hardening_report<T: Scalar>(
    c: &Constellation<T>,
    noise_power: T,
    epsilon: Option<T>,
) -> Result<SphereHardeningReport<T>> {
    positive("noise power", noise_power.to_f64_lossy())?;
    let epsilon = epsilon.unwrap_or(noise_power / T::lit(10.0));
    positive("epsilon", epsilon.to_f64_lossy())?;
    let n = c.dim();
    let radius = (T::from_count(n as u64) * (noise_power + epsilon)).sqrt();
    let mut points = Vec::with_capacity(c.len());
    for i in 0..c.len() {
        let region = voronoi_region(c, i)?;
        points.push(PointContainment {
            index: i,
            d_min: region.min_offset(),
            encloses: contains_ball(&region, radius),
        });
    }
    let all_enclose = points.iter().all(|p| p.encloses);
    let (p, e) = (noise_power.to_f64_lossy(), epsilon.to_f64_lossy());
    let snr_chain = snr_chain_holds(n as u64, p, e);
    let noise_chain = noise_chain_holds(n as u64, p, e);
    let verdict = if all_enclose { "enclosing" } else { "not enclosing" };
    Ok(SphereHardeningReport {
        dim: n,
        noise_power,
        epsilon,
        radius,
        points,
        all_enclose,
        snr_chain_holds: snr_chain,
        min_dimension_snr: min_dimension(|k| snr_chain_holds(k, p, e)),
        noise_chain_holds: noise_chain,
        min_dimension_noise: min_dimension(|k| noise_chain_holds(k, p, e)),
        high_snr_condition: all_enclose && snr_chain,
        small_noise_condition: all_enclose && noise_chain,
        verdict: verdict.into(),
    })
}

/// Monte Carlo `Pr{|ξ|² > (n + √(2n))σ₀²}` for `ξ ~ N(0, σ₀²I)`, with `σ₀² = 1`.
pub fn chi_square_floor<T: Scalar>(n: usize, budget: Budget) -> Result<Estimate<T>> {
    if n == 0 {
        return Err(Error::Validation("dimension must be at least 1".into()));
    }
    budget.check()?;
    let nf = T::from_count(n as u64);
    let cut = nf + (T::lit(2.0) * nf).sqrt();
    let (mean, std_err) = mean_of(n, budget, |z: &[T]| {
        if norm_sq(z) > cut {
            T::one()
        } else {
            T::zero()
        }
    });
    Ok(Estimate {
        mean,
        std_err,
        samples: budget.samples,
        seed: budget.seed,
    })
}

/// Default average SER the conjecture probe calibrates the design SNR to.
pub const DEFAULT_CONJECTURE_TARGET: f64 = 1e-2;

/// Events needed at the target rate before it counts as resolvable.
const MIN_TARGET_EVENTS: f64 = 30.0;

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Calibration<T> {
    pub target: T,
    pub reachable: bool,
    pub gamma0: Option<T>,
    pub achieved: Option<Estimate<T>>,
    pub message: String,
}

/// Bisection in `ln γ` for the smallest SNR whose average SER is at most `target`.
///
/// Uses one sample stream for every evaluation, so the estimated SER is
/// monotone in `γ` and the bisection is well defined.
pub fn calibrate_gamma0<T: Scalar>(
    c: &Constellation<T>,
    target: T,
    budget: Budget,
) -> Result<Calibration<T>> {
    budget.check()?;
    let t = target.to_f64_lossy();
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Validation(format!("target error rate must lie in (0, 1), got {t}")));
    }
    let unreachable = |message: String| Calibration {
        target,
        reachable: false,
        gamma0: None,
        achieved: None,
        message,
    };
    if t * (budget.samples as f64) < MIN_TARGET_EVENTS {
        return Ok(unreachable(format!(
            "target {t} is not resolvable with {} samples (fewer than {MIN_TARGET_EVENTS} expected errors)",
            budget.samples
        )));
    }
    let ser = |g: T| -> Result<Estimate<T>> { ser_avg_mc(c, &ChannelParams::from_snr(g)?, budget) };

    const GAMMA_MIN: f64 = 1e-4;
    const GAMMA_MAX: f64 = 1e8;
    let mut lo = T::lit(GAMMA_MIN);
    let lo_est = ser(lo)?;
    if lo_est.mean <= target {
        return Ok(Calibration {
            target,
            reachable: true,
            gamma0: Some(lo),
            achieved: Some(lo_est),
            message: format!("target already met at the smallest searched SNR {GAMMA_MIN}"),
        });
    }
    let mut hi = T::one();
    let mut hi_est = ser(hi)?;
    while hi_est.mean > target {
        lo = hi;
        hi = hi * T::lit(4.0);
        if hi.to_f64_lossy() > GAMMA_MAX {
            return Ok(unreachable(format!("average SER stays above {t} up to SNR {GAMMA_MAX}")));
        }
        hi_est = ser(hi)?;
    }
    for _ in 0..60 {
        if hi / lo < T::lit(1.0 + 1e-4) {
            break;
        }
        let mid = (lo * hi).sqrt();
        let est = ser(mid)?;
        if est.mean > target {
            lo = mid;
        } else {
            hi = mid;
            hi_est = est;
        }
    }
    Ok(Calibration {
        target,
        reachable: true,
        gamma0: Some(hi),
        achieved: Some(hi_est),
        message: "calibrated by bisection in log SNR".into(),
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricScan<T> {
    pub metric: String,
    pub report: ConvexityReport<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ConjectureReport<T> {
    /// Always "empirical": the conjecture is probed, not proven.
    pub kind: &'static str,
    pub code: String,
    pub dim: usize,
    pub points: usize,
    pub calibration: Option<Calibration<T>>,
    pub gamma0: Option<T>,
    pub scans: Vec<MetricScan<T>>,
    /// Confidently negative curvature at or above the design SNR.
    pub counterexample_candidates: Vec<Candidate<T>>,
    pub confident_positive: usize,
    pub confident_negative: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Candidate<T> {
    pub metric: String,
    pub estimate: CurvatureEstimate<T>,
}

/// Confident curvature signs of SER (and BER when labels exist) on a grid at
/// or above the design SNR `gamma0`.
pub fn conjecture_probe<T: Scalar>(
    code: &Constellation<T>,
    gamma0: T,
    grid: &[T],
    budget: Budget,
) -> Result<ConjectureReport<T>> {
    positive("design snr", gamma0.to_f64_lossy())?;
    budget.check()?;
    if grid.is_empty() {
        return Err(Error::Precondition("conjecture probe needs a non-empty grid".into()));
    }
    if let Some(&g) = grid.iter().find(|&&g| !(g >= gamma0)) {
        return Err(Error::Precondition(format!(
            "grid point {g} lies below the design snr {gamma0}"
        )));
    }
    let mut metrics = vec![ErrorMetric::Ser];
    if code.labels().is_some() {
        metrics.push(ErrorMetric::Ber);
    }
    let mut scans = Vec::new();
    let mut candidates = Vec::new();
    let (mut pos, mut neg, mut ind) = (0, 0, 0);
    for metric in metrics {
        let estimates = grid
            .iter()
            .map(|&g| curvature_mc(code, metric, Axis::Snr, g, budget))
            .collect::<Result<Vec<_>>>()?;
        for e in &estimates {
            match e.sign() {
                Sign::Positive => pos += 1,
                Sign::Negative => {
                    neg += 1;
                    candidates.push(Candidate {
                        metric: metric.to_string(),
                        estimate: *e,
                    });
                }
                Sign::Indeterminate => ind += 1,
            }
        }
        scans.push(MetricScan {
            metric: metric.to_string(),
            report: ConvexityReport::from_estimates(Axis::Snr, estimates, Parity::None),
        });
    }
    Ok(ConjectureReport {
        kind: "empirical",
        code: code.name().to_string(),
        dim: code.dim(),
        points: code.len(),
        calibration: None,
        gamma0: Some(gamma0),
        scans,
        counterexample_candidates: candidates,
        confident_positive: pos,
        confident_negative: neg,
        indeterminate: ind,
    })
}

/// Calibrates the design SNR to `target` and probes `grid_points` log-spaced
/// values in `[γ₀, span·γ₀]`. An unreachable target yields a report without scans.
pub fn calibrated_conjecture_probe<T: Scalar>(
    code: &Constellation<T>,
    target: T,
    span: T,
    grid_points: usize,
    budget: Budget,
) -> Result<ConjectureReport<T>> {
    if !(span > T::one()) || grid_points == 0 {
        return Err(Error::Validation("grid span must exceed 1 and hold at least one point".into()));
    }
    let calibration = calibrate_gamma0(code, target, budget)?;
    let Some(gamma0) = calibration.gamma0 else {
        return Ok(ConjectureReport {
            kind: "empirical",
            code: code.name().to_string(),
            dim: code.dim(),
            points: code.len(),
            calibration: Some(calibration),
            gamma0: None,
            scans: Vec::new(),
            counterexample_candidates: Vec::new(),
            confident_positive: 0,
            confident_negative: 0,
            indeterminate: 0,
        });
    };
    let grid = log_grid(gamma0, gamma0 * span, grid_points);
    let mut report = conjecture_probe(code, gamma0, &grid, budget)?;
    report.calibration = Some(calibration);
    Ok(report)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid<T: Scalar>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_count(points as u64 - 1);
    let mut g: Vec<T> = (0..points)
        .map(|k| (a + (b - a) * T::from_count(k as u64) / last).exp())
        .collect();
    g[0] = lo;
    g[points - 1] = hi;
    g
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PrintedClaimReport<T> {
    pub i: usize,
    pub j: usize,
    /// `α₂/(d_ij + d_max,j)²`, the certified convexity bound.
    pub low_derived: T,
    /// `α₁/(d_ij + d_max,j)²`, the claimed one.
    pub low_printed: T,
    /// Estimates on `(low_derived, low_printed]`.
    pub estimates: Vec<CurvatureEstimate<T>>,
    /// Confidently negative estimates: points where the claim fails.
    pub discrepancies: Vec<CurvatureEstimate<T>>,
}

/// Tests the `α₁` low-SNR PEP convexity claim on the part of the axis the
/// `α₂` bound does not certify (`n > 2` only).
pub fn printed_claim_probe<T: Scalar>(
    c: &Constellation<T>,
    i: usize,
    j: usize,
    points: usize,
    budget: Budget,
) -> Result<PrintedClaimReport<T>> {
    if c.dim() <= 2 {
        return Err(Error::Precondition("the printed low-SNR PEP claim differs only for n > 2".into()));
    }
    let th = thresholds(c)?;
    let t = th.pair_snr(i, j)?;
    let (Some(lo), Some(hi)) = (t.low_derived.value(), t.low_printed.value()) else {
        return Err(Error::Precondition(format!(
            "pair ({i}, {j}) has no finite low-SNR thresholds: {}",
            t.low_printed
        )));
    };
    let grid = log_grid(lo, hi, points.max(2));
    let estimates = grid[1..]
        .iter()
        .map(|&g| curvature_mc(c, ErrorMetric::Pep(i, j), Axis::Snr, g, budget))
        .collect::<Result<Vec<_>>>()?;
    let discrepancies = estimates.iter().filter(|e| e.sign() == Sign::Negative).copied().collect();
    Ok(PrintedClaimReport {
        i,
        j,
        low_derived: lo,
        low_printed: hi,
        estimates,
        discrepancies,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct JensenReport<T> {
    pub metric: String,
    pub axis: Axis,
    pub a: T,
    pub b: T,
    pub lambda: T,
    pub mixed: T,
    pub at_a: Estimate<T>,
    pub at_b: Estimate<T>,
    pub at_mixed: Estimate<T>,
    /// `λ·m(a) + (1−λ)·m(b)`.
    pub chord: T,
    /// `chord − m(mixed)`: what sharing between `a` and `b` costs (SNR axis)
    /// or gains a jammer (noise axis) over operating at the mixture.
    pub sharing_gain: T,
    /// Three combined standard errors.
    pub slack: T,
    pub holds: bool,
    pub certified_by: String,
}

fn governing_threshold<T: Scalar>(th: &ThresholdSet<T>, metric: ErrorMetric, axis: Axis) -> Result<(String, T)> {
    Ok(match (axis, metric) {
        (Axis::Snr, ErrorMetric::Ser) => ("ser_snr_high".into(), th.ser_snr_high),
        (Axis::Snr, ErrorMetric::SerPoint(i)) => {
            let t = th.per_point_snr.get(i).ok_or(Error::InvalidIndex { index: i, len: th.points })?;
            (format!("per_point_snr[{i}].high"), t.high)
        }
        (Axis::Snr, ErrorMetric::Pep(i, j)) => (format!("pep_snr[{i},{j}].high"), th.pair_snr(i, j)?.high),
        (Axis::Snr, ErrorMetric::Ber) => ("ber_snr_high".into(), th.ber_snr_high),
        (Axis::NoisePower, ErrorMetric::Ser) => ("ser_noise_small".into(), th.ser_noise_small),
        (Axis::NoisePower, ErrorMetric::SerPoint(i)) => {
            let t = th.noise_high.get(i).ok_or(Error::InvalidIndex { index: i, len: th.points })?;
            (format!("noise_high[{i}]"), *t)
        }
        (Axis::NoisePower, ErrorMetric::Pep(i, j)) => (format!("pep_noise[{i},{j}].small"), th.pair_noise(i, j)?.small),
        (Axis::NoisePower, ErrorMetric::Ber) => ("ber_noise_small".into(), th.ber_noise_small),
    })
}

/// Checks `m(λa + (1−λ)b) ≤ λ·m(a) + (1−λ)·m(b)` within three standard errors.
///
/// Both points and the segment between them must lie in one
/// theorem-certified convex interval; otherwise the probe is refused with the
/// governing threshold named. All three evaluations share one sample stream.
pub fn jensen_probe<T: Scalar>(
    c: &Constellation<T>,
    metric: ErrorMetric,
    axis: Axis,
    a: T,
    b: T,
    lambda: T,
    budget: Budget,
) -> Result<JensenReport<T>> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::Validation(format!("weight must lie in [0, 1], got {lambda}")));
    }
    metric.validate(c)?;
    budget.check()?;
    let th = thresholds(c)?;
    let intervals = th.theorem_intervals(metric, axis)?;
    let (name, bound) = governing_threshold(&th, metric, axis)?;
    for x in [a, b] {
        if th.classify(metric, axis, x)?.verdict != Verdict::Convex {
            return Err(Error::Refused {
                threshold: name,
                bound: bound.to_f64_lossy(),
                value: x.to_f64_lossy(),
            });
        }
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if let Some(gap) = intervals
        .iter()
        .find(|iv| iv.verdict != Verdict::Convex && iv.lo < hi && iv.hi > lo)
    {
        return Err(Error::Refused {
            threshold: format!("{name} (segment crosses a non-convex interval)"),
            bound: gap.lo.to_f64_lossy(),
            value: gap.hi.to_f64_lossy(),
        });
    }
    let certified_by = th.classify(metric, axis, a)?.basis;

    let mixed = lambda * a + (T::one() - lambda) * b;
    let eval = |x: T| -> Result<Estimate<T>> {
        let ch = match axis {
            Axis::Snr => ChannelParams::from_snr(x)?,
            Axis::NoisePower => ChannelParams::from_noise_power(x)?,
        };
        rate_mc(c, metric, &ch, budget)
    };
    let (at_a, at_b, at_mixed) = (eval(a)?, eval(b)?, eval(mixed)?);
    let mu = T::one() - lambda;
    let chord = lambda * at_a.mean + mu * at_b.mean;
    let var = at_mixed.std_err.powi(2)
        + (lambda * at_a.std_err).powi(2)
        + (mu * at_b.std_err).powi(2);
    let slack = T::lit(3.0) * var.sqrt();
    let sharing_gain = chord - at_mixed.mean;
    Ok(JensenReport {
        metric: metric.to_string(),
        axis,
        a,
        b,
        lambda,
        mixed,
        at_a,
        at_b,
        at_mixed,
        chord,
        sharing_gain,
        slack,
        holds: sharing_gain >= -slack,
        certified_by,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_standard, StandardKind};
    use crate::error_engine::q_function;

    #[test]
    fn chain_with_epsilon_equal_noise_power() {
        assert!(!snr_chain_holds(1, 1.0, 1.0));
        assert!(!snr_chain_holds(2, 1.0, 1.0));
        for n in 3..2000 {
            assert!(snr_chain_holds(n, 1.0, 1.0), "n = {n}");
        }
        assert_eq!(min_dimension(|k| snr_chain_holds(k, 1.0, 1.0)), Some(3));
    }

    #[test]
    fn min_dimension_matches_closed_form() {
        for ratio in [0.5_f64, 1.0, 3.0, 10.0, 37.0] {
            let expected = (2.0 * ratio * ratio).floor() as u64 + 1;
            let got = min_dimension(|k| snr_chain_holds(k, ratio, 1.0)).unwrap();
            assert_eq!(got, expected, "{ratio}");
        }
    }

    #[test]
    fn bpsk_does_not_enclose_at_unit_noise() {
        let c = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        let r = sphere_hardening_report(&c, 1.0, Some(0.1)).unwrap();
        assert!(!r.all_enclose);
        assert_eq!(r.verdict, "not enclosing");
        assert!((r.radius - 1.1f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spherical_code_encloses_at_low_noise() {
        let c = build_standard::<f64>(&StandardKind::RandomSpherical { points: 16, dim: 8, seed: 7 }).unwrap();
        let dmin = (0..16).map(|i| voronoi_region(&c, i).unwrap().min_offset()).fold(f64::INFINITY, f64::min);
        // n(σ² + σ²/10) ≤ d_min² with margin.
        let sigma2 = 0.9 * dmin * dmin / (8.0 * 1.1);
        let r = sphere_hardening_report(&c, sigma2, None).unwrap();
        assert!(r.all_enclose);
        assert_eq!(r.verdict, "enclosing");
        // ε = σ²/10 needs n > 2·10² for the chain.
        assert_eq!(r.min_dimension_snr, Some(201));
        assert!(!r.high_snr_condition);
    }

    #[test]
    fn chi_square_one_dimension() {
        // Pr{χ²₁ > 1 + √2} = 2Q(√(1+√2)).
        let oracle = 2.0 * q_function((1.0 + 2f64.sqrt()).sqrt());
        assert!((oracle - 0.120_238_34).abs() < 1e-7);
        let e: Estimate<f64> = chi_square_floor(1, Budget::new(400_000, 3)).unwrap();
        assert!((e.mean - oracle).abs() < 4.0 * e.std_err, "{e:?}");
    }

    #[test]
    fn calibration_hits_target() {
        let c = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        let cal = calibrate_gamma0(&c, 1e-2, Budget::new(200_000, 5)).unwrap();
        let g = cal.gamma0.unwrap();
        // Q(√γ) = 0.01 at γ ≈ 5.4119.
        assert!((g - 5.411_894).abs() < 0.3, "{g}");
        let cal = calibrate_gamma0(&c, 1e-6, Budget::new(10_000, 5)).unwrap();
        assert!(!cal.reachable);
    }

    #[test]
    fn conjecture_grid_below_design_snr_is_rejected() {
        let c = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        let err = conjecture_probe(&c, 5.0, &[4.0, 6.0], Budget::new(1000, 1)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn bpsk_conjecture_all_positive() {
        let c = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        let grid = log_grid(2.0, 20.0, 6);
        let r = conjecture_probe(&c, 2.0, &grid, Budget::new(200_000, 9)).unwrap();
        assert!(r.counterexample_candidates.is_empty());
        assert!(r.confident_positive > 0);
    }

    #[test]
    fn jensen_bpsk_closed_form_example() {
        let m = |g: f64| q_function(g.sqrt());
        assert!((m(5.0) - 0.012_673_66).abs() < 1e-8);
        assert!(((m(2.0) + m(8.0)) / 2.0 - 0.040_494_24).abs() < 1e-8);
        let c = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        let r = jensen_probe(&c, ErrorMetric::Ser, Axis::Snr, 2.0, 8.0, 0.5, Budget::new(200_000, 1)).unwrap();
        assert!(r.holds);
        assert!(r.sharing_gain > 0.0);
        assert!((r.at_mixed.mean - m(5.0)).abs() < 4.0 * r.at_mixed.std_err);
    }

    #[test]
    fn jensen_degenerate_weights_are_exact() {
        let c = build_standard::<f64>(&StandardKind::Qam(16)).unwrap();
        for lambda in [0.0, 1.0] {
            let r = jensen_probe(&c, ErrorMetric::Ber, Axis::Snr, 45.0, 80.0, lambda, Budget::new(20_000, 2)).unwrap();
            assert_eq!(r.sharing_gain, 0.0);
            assert!(r.holds);
        }
    }

    #[test]
    fn jensen_refuses_outside_certified_region() {
        let c = build_standard::<f64>(&StandardKind::Qam(16)).unwrap();
        let err = jensen_probe(&c, ErrorMetric::Ber, Axis::Snr, 20.0, 80.0, 0.5, Budget::new(1000, 2)).unwrap_err();
        match err {
            Error::Refused { threshold, bound, value } => {
                assert_eq!(threshold, "ber_snr_high");
                assert!((bound - 40.0).abs() < 1e-9);
                assert_eq!(value, 20.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn printed_claim_probe_runs_on_grid_center() {
        let g = build_standard::<f64>(&StandardKind::Grid { side: 3, dim: 3 }).unwrap();
        let r = printed_claim_probe(&g, 12, 13, 12, Budget::new(200_000, 4)).unwrap();
        assert_eq!(r.estimates.len(), 11);
        assert!(r.estimates.iter().all(|e| e.at > r.low_derived && e.at <= r.low_printed));
        // Concave well inside the claimed region: the claim does not hold here.
        assert!(r.discrepancies.len() >= 4, "{:?}", r.discrepancies);
        assert!(r.discrepancies.iter().all(|e| e.at > 1.0));
        assert_eq!(r.estimates[0].sign(), Sign::Positive);
        let bpsk = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        assert!(printed_claim_probe(&bpsk, 0, 1, 5, Budget::new(1000, 1)).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.5, 16.0, 10);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[9], 16.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
