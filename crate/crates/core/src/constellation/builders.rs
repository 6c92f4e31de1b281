use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Constellation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Built-in constellation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StandardKind {
    Bpsk,
    /// `M`-PSK on the unit circle with Gray labels.
    Psk(usize),
    /// Square `M`-QAM with per-axis Gray labels.
    Qam(usize),
    /// `side^dim` points on a centered integer grid.
    Grid { side: usize, dim: usize },
    /// The `2^dim` vertices of a centered cube.
    Hypercube(usize),
    /// `points` i.i.d. uniform points on the unit sphere in `dim` dimensions.
    RandomSpherical { points: usize, dim: usize, seed: u64 },
}

impl fmt::Display for StandardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StandardKind::Bpsk => write!(f, "bpsk"),
            StandardKind::Psk(4) => write!(f, "qpsk"),
            StandardKind::Psk(m) => write!(f, "psk{m}"),
            StandardKind::Qam(m) => write!(f, "qam{m}"),
            StandardKind::Grid { side, dim } => write!(f, "grid:{side}:{dim}"),
            StandardKind::Hypercube(n) => write!(f, "hypercube:{n}"),
            StandardKind::RandomSpherical { points, dim, seed } => {
                write!(f, "spherical:{points}:{dim}:{seed}")
            }
        }
    }
}

impl FromStr for StandardKind {
    type Err = Error;

    /// Accepts `bpsk`, `qpsk`, `psk8`, `qam16`, `grid:3:3`, `hypercube:4`,
    /// `spherical:16:8:7` (seed optional, default 0).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Unsupported(format!("unknown constellation {s:?}"));
        let s = s.trim().to_ascii_lowercase();
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        let kind = match parts.as_slice() {
            ["bpsk"] => StandardKind::Bpsk,
            ["qpsk"] => StandardKind::Psk(4),
            ["psk", m] | ["mpsk", m] => StandardKind::Psk(num(m)?),
            ["qam", m] => StandardKind::Qam(num(m)?),
            ["grid", side, dim] => StandardKind::Grid {
                side: num(side)?,
                dim: num(dim)?,
            },
            ["hypercube", n] => StandardKind::Hypercube(num(n)?),
            ["spherical", m, n] => StandardKind::RandomSpherical {
                points: num(m)?,
                dim: num(n)?,
                seed: 0,
            },
            ["spherical", m, n, seed] => StandardKind::RandomSpherical {
                points: num(m)?,
                dim: num(n)?,
                seed: seed.parse().map_err(|_| bad())?,
            },
            [one] if one.starts_with("qam") => StandardKind::Qam(num(&one[3..])?),
            [one] if one.starts_with("mpsk") => StandardKind::Psk(num(&one[4..])?),
            [one] if one.starts_with("psk") => StandardKind::Psk(num(&one[3..])?),
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

impl TryFrom<String> for StandardKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StandardKind> for String {
    fn from(k: StandardKind) -> String {
        k.to_string()
    }
}

fn log2_exact(m: usize) -> Option<u32> {
    (m.is_power_of_two()).then(|| m.trailing_zeros())
}

fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

fn bits(value: usize, width: u32) -> String {
    (0..width)
        .rev()
        .map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Index-order binary labels of width `⌈log₂ M⌉` (at least 1).
fn index_labels(m: usize) -> Vec<String> {
    let width = (usize::BITS - (m - 1).leading_zeros()).max(1);
    (0..m).map(|k| bits(k, width)).collect()
}

/// Builds a normalized standard constellation.
pub fn build_standard<T: Scalar>(kind: &StandardKind) -> Result<Constellation<T>> {
    let unsupported = |why: &str| Err(Error::Unsupported(format!("{kind}: {why}")));
    let (points, labels): (Vec<Vec<f64>>, Vec<String>) = match *kind {
        StandardKind::Bpsk => (vec![vec![1.0], vec![-1.0]], vec!["0".into(), "1".into()]),
        StandardKind::Psk(m) => {
            let Some(width) = log2_exact(m).filter(|_| m >= 2) else {
                return unsupported("M must be a power of two >= 2");
            };
            let pts = (0..m)
                .map(|k| {
                    let theta = std::f64::consts::PI * (2 * k + 1) as f64 / m as f64;
                    vec![theta.cos(), theta.sin()]
                })
                .collect();
            (pts, (0..m).map(|k| bits(gray(k), width)).collect())
        }
        StandardKind::Qam(m) => {
            let Some(width) = log2_exact(m).filter(|w| *w >= 2 && w % 2 == 0) else {
                return unsupported("square QAM needs M = 4^k with k >= 1");
            };
            let side = 1usize << (width / 2);
            let level = |k: usize| (2 * k) as f64 - (side - 1) as f64;
            let mut pts = Vec::with_capacity(m);
            let mut labels = Vec::with_capacity(m);
            for row in 0..side {
                for col in 0..side {
                    pts.push(vec![level(row), level(col)]);
                    labels.push(format!(
                        "{}{}",
                        bits(gray(row), width / 2),
                        bits(gray(col), width / 2)
                    ));
                }
            }
            (pts, labels)
        }
        StandardKind::Grid { side, dim } => {
            if side < 2 || dim == 0 {
                return unsupported("grid needs side >= 2 and dim >= 1");
            }
            let m = match side.checked_pow(dim as u32) {
                Some(m) if m <= 1 << 20 => m,
                _ => return unsupported("grid has too many points"),
            };
            let center = (side - 1) as f64 / 2.0;
            let pts = (0..m)
                .map(|idx| {
                    // Most significant digit first, matching the label order.
                    let mut rest = idx;
                    let mut p = vec![0.0; dim];
                    for k in (0..dim).rev() {
                        p[k] = (rest % side) as f64 - center;
                        rest /= side;
                    }
                    p
                })
                .collect();
            (pts, index_labels(m))
        }
        StandardKind::Hypercube(n) => {
            if n == 0 || n > 20 {
                return unsupported("hypercube dimension must be in 1..=20");
            }
            let m = 1usize << n;
            let pts = (0..m)
                .map(|idx| {
                    (0..n)
                        .map(|k| if (idx >> (n - 1 - k)) & 1 == 0 { 0.5 } else { -0.5 })
                        .collect()
                })
                .collect();
            (pts, index_labels(m))
        }
        StandardKind::RandomSpherical { points, dim, seed } => {
            if points < 2 || dim == 0 {
                return unsupported("need at least 2 points and dim >= 1");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = (0..points)
                .map(|_| loop {
                    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-6 {
                        break v.into_iter().map(|x| x / norm).collect();
                    }
                })
                .collect();
            (pts, index_labels(points))
        }
    };
    let points = points
        .into_iter()
        .map(|p| p.into_iter().map(T::lit).collect())
        .collect();
    Constellation::new(kind.to_string(), points, None, Some(labels))?.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::hamming_matrix;
    use crate::scalar::dist_sq;

    /// Every pair at the minimum pairwise distance differs in exactly one bit.
    fn assert_gray(c: &Constellation<f64>) {
        let h = hamming_matrix(c).unwrap();
        let m = c.len();
        let mut dmin = f64::INFINITY;
        for i in 0..m {
            for j in 0..i {
                dmin = dmin.min(dist_sq(c.point(i), c.point(j)));
            }
        }
        let mut pairs = 0;
        for i in 0..m {
            for j in 0..i {
                if dist_sq(c.point(i), c.point(j)) < dmin * (1.0 + 1e-9) {
                    assert_eq!(h.h(i, j), 1, "{}: neighbors {i},{j}", c.name());
                    pairs += 1;
                }
            }
        }
        assert!(pairs > 0);
    }

    #[test]
    fn bpsk_points_and_labels() {
        let c = build_standard::<f64>(&StandardKind::Bpsk).unwrap();
        assert_eq!(c.points(), &[vec![1.0], vec![-1.0]]);
        assert_eq!(c.labels().unwrap(), &["0", "1"]);
    }

    #[test]
    fn qam16_is_scaled_grid_with_gray_labels() {
        let c = build_standard::<f64>(&StandardKind::Qam(16)).unwrap();
        let s = 10.0_f64.sqrt();
        for p in c.points() {
            for x in p {
                let v = x * s;
                assert!([-3.0, -1.0, 1.0, 3.0].iter().any(|l| (v - l).abs() < 1e-12));
            }
        }
        assert!(c.is_normalized());
        assert_gray(&c);
    }

    #[test]
    fn gray_builders_exhaustive() {
        for kind in [
            StandardKind::Psk(2),
            StandardKind::Psk(4),
            StandardKind::Psk(8),
            StandardKind::Psk(16),
            StandardKind::Psk(32),
            StandardKind::Psk(64),
            StandardKind::Qam(4),
            StandardKind::Qam(16),
            StandardKind::Qam(64),
        ] {
            assert_gray(&build_standard(&kind).unwrap());
        }
    }

    #[test]
    fn qpsk_has_diagonal_points() {
        let c = build_standard::<f64>(&StandardKind::Psk(4)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for p in c.points() {
            assert!((p[0].abs() - r).abs() < 1e-15 && (p[1].abs() - r).abs() < 1e-15);
        }
        assert_eq!(c.labels().unwrap(), &["00", "01", "11", "10"]);
    }

    #[test]
    fn hypercube4_has_half_coordinates() {
        let c = build_standard::<f64>(&StandardKind::Hypercube(4)).unwrap();
        assert_eq!(c.len(), 16);
        for p in c.points() {
            assert!(p.iter().all(|x| x.abs() == 0.5));
        }
        // Labels follow coordinate signs, so Hamming distance counts differing coordinates.
        assert_gray(&c);
    }

    #[test]
    fn grid_and_spherical_are_normalized_with_binary_labels() {
        let g = build_standard::<f64>(&StandardKind::Grid { side: 3, dim: 3 }).unwrap();
        assert_eq!(g.len(), 27);
        assert!(g.is_normalized());
        assert_eq!(g.labels().unwrap()[26], "11010");
        // Center point sits at the origin.
        assert!(g.point(13).iter().all(|&x| x == 0.0));

        let s = build_standard::<f64>(&StandardKind::RandomSpherical { points: 16, dim: 8, seed: 3 })
            .unwrap();
        assert!(s.is_normalized());
        assert_eq!(s.labels().unwrap()[15], "1111");
        let again = build_standard::<f64>(&StandardKind::RandomSpherical { points: 16, dim: 8, seed: 3 })
            .unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn unsupported_sizes_are_rejected() {
        assert!(build_standard::<f64>(&StandardKind::Qam(8)).is_err());
        assert!(build_standard::<f64>(&StandardKind::Qam(32)).is_err());
        assert!(build_standard::<f64>(&StandardKind::Psk(6)).is_err());
        assert!(build_standard::<f64>(&StandardKind::Grid { side: 1, dim: 3 }).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for s in ["bpsk", "qpsk", "psk8", "qam16", "grid:3:3", "hypercube:4", "spherical:16:8:7"] {
            let k: StandardKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert_eq!("mpsk:4".parse::<StandardKind>().unwrap(), StandardKind::Psk(4));
        assert!("triangle".parse::<StandardKind>().is_err());
    }
}
