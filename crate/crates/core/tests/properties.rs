use convexity_atlas::geometry::{all_extents, pep_region, sample_region, voronoi_region};
use convexity_atlas::{
    build_standard, curvature_mc, rate_mc, thresholds, Axis, Budget, ChannelParams32, Constellation, Constellation32,
    Constellation64, ErrorMetric, Sign, StandardKind, Verdict,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn std64(kind: StandardKind) -> Constellation64 {
    build_standard(&kind).unwrap()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

fn planar() -> impl Strategy<Value = Constellation64> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 3..9).prop_filter_map("degenerate", |pts| {
        let ok = pts.iter().enumerate().all(|(i, p)| {
            pts[..i].iter().all(|q| norm(&[p[0] - q[0], p[1] - q[1]]) > 0.05)
        });
        if !ok {
            return None;
        }
        Constellation::new("random", pts, None, None).ok()?.normalize().ok()
    })
}

/// Rotation by `theta` in the plane of the first two coordinates.
fn givens(theta: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |p| {
        let (s, c) = theta.sin_cos();
        let mut q = p.to_vec();
        q[0] = c * p[0] - s * p[1];
        q[1] = s * p[0] + c * p[1];
        q
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inscribed_ball_lies_in_region(c in planar()) {
        let ext = all_extents(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (i, e) in ext.iter().enumerate() {
            let region = voronoi_region(&c, i).unwrap();
            for _ in 0..64 {
                let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let r = e.d_min * rng.random::<f64>().sqrt();
                prop_assert!(region.contains_with(&[r * t.cos(), r * t.sin()], 1e-12));
            }
        }
    }

    #[test]
    fn pep_region_stays_outside_d_min(c in planar(), seed in 0u64..1000) {
        let ext = all_extents(&c).unwrap();
        let (i, j) = (0, 1 + (seed as usize) % (c.len() - 1));
        let region = pep_region(&c, i, j).unwrap();
        let center: Vec<f64> = c.point(j).iter().zip(c.point(i)).map(|(a, b)| a - b).collect();
        let reach = if ext[j].bounded { ext[j].d_max } else { 3.0 };
        let pts = sample_region(&region, &center, reach, 200, seed).unwrap();
        for x in &pts {
            prop_assert!(norm(x) >= ext[i].d_min - 1e-12);
        }
    }

    #[test]
    fn extents_and_thresholds_are_rotation_invariant(c in planar(), theta in 0.0f64..6.3) {
        let r = c.map_points(givens(theta)).unwrap();
        let (a, b) = (thresholds(&c).unwrap(), thresholds(&r).unwrap());
        for (x, y) in a.extents.iter().zip(&b.extents) {
            prop_assert!(close(x.d_min, y.d_min, 1e-9));
            prop_assert!(close(x.d_max, y.d_max, 1e-7), "{} vs {}", x.d_max, y.d_max);
            prop_assert_eq!(x.bounded, y.bounded);
        }
        prop_assert!(close(a.ser_snr_high, b.ser_snr_high, 1e-9));
        for (x, y) in a.noise_high.iter().zip(&b.noise_high) {
            prop_assert!(close(*x, *y, 1e-9));
        }
    }

    #[test]
    fn thresholds_scale_covariantly(c in planar(), s in 0.2f64..5.0) {
        let scaled = c.clone().scaled(s);
        let (a, b) = (thresholds(&c).unwrap(), thresholds(&scaled).unwrap());
        prop_assert!(close(b.d_min, s * a.d_min, 1e-9));
        for (x, y) in a.extents.iter().zip(&b.extents) {
            prop_assert!(close(y.d_max, s * x.d_max, 1e-7));
        }
        prop_assert!(close(b.ser_snr_high, a.ser_snr_high / (s * s), 1e-9));
        for (x, y) in a.noise_high.iter().zip(&b.noise_high) {
            prop_assert!(close(*y, s * s * x, 1e-9));
        }
    }
}

#[test]
fn d_max_matches_rejection_supremum() {
    let cases = [
        (std64(StandardKind::Qam(16)), 5),
        (std64(StandardKind::Qam(16)), 10),
        (std64(StandardKind::Grid { side: 3, dim: 2 }), 4),
    ];
    for (c, i) in cases {
        let e = all_extents(&c).unwrap()[i];
        assert!(e.bounded);
        let region = voronoi_region(&c, i).unwrap();
        let origin = vec![0.0; c.dim()];
        let pts = sample_region(&region, &origin, 1.01 * e.d_max, 50_000, 11).unwrap();
        let sup = pts.iter().map(|x| norm(x)).fold(0.0, f64::max);
        assert!(sup <= e.d_max * (1.0 + 1e-9), "{}: {sup} > {}", c.name(), e.d_max);
        assert!(sup >= 0.98 * e.d_max, "{}: {sup} vs {}", c.name(), e.d_max);
    }
}

#[test]
fn certified_convex_points_are_never_confidently_concave() {
    let pool = [
        std64(StandardKind::Psk(4)),
        std64(StandardKind::Psk(8)),
        std64(StandardKind::Qam(16)),
        std64(StandardKind::Grid { side: 3, dim: 3 }),
        std64(StandardKind::Hypercube(3)),
        std64(StandardKind::RandomSpherical { points: 8, dim: 4, seed: 5 }),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for draw in 0..50u64 {
        let c = &pool[rng.random_range(0..pool.len())];
        let th = thresholds(c).unwrap();
        let i = rng.random_range(0..c.len());
        let (metric, gamma) = if rng.random_bool(0.5) {
            (ErrorMetric::SerPoint(i), th.per_point_snr[i].high * rng.random_range(1.0..4.0))
        } else {
            (ErrorMetric::Ser, th.ser_snr_high * rng.random_range(1.0..4.0))
        };
        let cls = th.classify(metric, Axis::Snr, gamma).unwrap();
        assert_eq!(cls.verdict, Verdict::Convex, "{metric} at {gamma}: {}", cls.basis);
        let est = curvature_mc(c, metric, Axis::Snr, gamma, Budget::new(20_000, draw)).unwrap();
        assert_ne!(est.sign(), Sign::Negative, "{} {metric} at γ = {gamma}: {est:?}", c.name());
        checked += 1;
    }
    assert_eq!(checked, 50);
}

#[test]
fn f32_alias_smoke() {
    let c: Constellation32 = build_standard(&StandardKind::Qam(16)).unwrap();
    let th = thresholds(&c).unwrap();
    assert!((th.ber_snr_high - 40.0).abs() < 1e-3);
    let est = rate_mc(&c, ErrorMetric::Ser, &ChannelParams32::from_snr(20.0).unwrap(), Budget::new(100_000, 1)).unwrap();
    let c64 = std64(StandardKind::Qam(16));
    let ch = convexity_atlas::ChannelParams64::from_snr(20.0).unwrap();
    let ref64 = rate_mc(&c64, ErrorMetric::Ser, &ch, Budget::new(100_000, 1)).unwrap();
    assert!((est.mean as f64 - ref64.mean).abs() <= 4.0 * ref64.std_err + 1e-4);
}
