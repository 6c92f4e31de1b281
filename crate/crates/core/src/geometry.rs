//! Decision regions as half-space systems and their distance extents.
//!
//! The region of `s_i` in a frame centered at `s_i` is
//! `{x : a_jᵀx ≤ b_j, j ≠ i}` with `a_j = (s_j − s_i)/|s_j − s_i|` and
//! `b_j = |s_j − s_i|/2`. Rows are unit-norm, so the distance from the
//! origin to the boundary is simply `min_j b_j`; redundant rows are kept.

use itertools::Itertools;
use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::scalar::{dist_sq, dot, extended, Scalar};

/// Vertex candidates within this distance of the feasible set are kept.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Largest number of n-subsets of rows the vertex enumeration will visit.
pub const MAX_VERTEX_CANDIDATES: u128 = 10_000_000;

const PIVOT_TOLERANCE: f64 = 1e-10;
const RECESSION_TOLERANCE: f64 = 1e-9;

/// `{x : Ax ≤ b}` with unit-norm rows, expressed in the frame of point `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HalfspaceRegion<T> {
    pub owner: usize,
    pub frame: usize,
    pub rows: Vec<Vec<T>>,
    pub offsets: Vec<T>,
}

impl<T: Scalar> HalfspaceRegion<T> {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `Ax ≤ b + tol` componentwise.
    pub fn contains_with(&self, x: &[T], tol: T) -> bool {
        self.rows
            .iter()
            .zip(&self.offsets)
            .all(|(a, &b)| dot(a, x) <= b + tol)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.contains_with(x, T::zero())
    }

    /// Distance from the frame origin to the nearest bounding hyperplane.
    pub fn min_offset(&self) -> T {
        self.offsets.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Distance extents of a decision region seen from its own point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegionExtents<T> {
    pub d_min: T,
    /// `+∞` for unbounded regions; serialized as `"inf"`.
    #[serde(with = "extended")]
    pub d_max: T,
    pub bounded: bool,
}

/// The Voronoi region of point `i`, in the frame centered at `s_i`.
pub fn voronoi_region<T: Scalar>(c: &Constellation<T>, i: usize) -> Result<HalfspaceRegion<T>> {
    c.check_index(i)?;
    let si = c.point(i);
    let two = T::lit(2.0);
    let (rows, offsets) = (0..c.len())
        .filter(|&j| j != i)
        .map(|j| {
            let diff: Vec<T> = c.point(j).iter().zip(si).map(|(&a, &b)| a - b).collect();
            let norm = dist_sq(c.point(j), si).sqrt();
            (diff.into_iter().map(|x| x / norm).collect::<Vec<T>>(), norm / two)
        })
        .unzip();
    Ok(HalfspaceRegion {
        owner: i,
        frame: i,
        rows,
        offsets,
    })
}

/// The region decoded as `s_j`, translated so that `s_i` sits at the origin.
pub fn pep_region<T: Scalar>(c: &Constellation<T>, i: usize, j: usize) -> Result<HalfspaceRegion<T>> {
    c.check_index(i)?;
    if i == j {
        return Err(Error::SamePair(i));
    }
    let mut region = voronoi_region(c, j)?;
    let shift: Vec<T> = c.point(j).iter().zip(c.point(i)).map(|(&a, &b)| a - b).collect();
    for (a, b) in region.rows.iter().zip(region.offsets.iter_mut()) {
        *b = *b + dot(a, &shift);
    }
    region.frame = i;
    Ok(region)
}

pub fn pair_distance<T: Scalar>(c: &Constellation<T>, i: usize, j: usize) -> Result<T> {
    c.check_index(i)?;
    c.check_index(j)?;
    if i == j {
        return Err(Error::SamePair(i));
    }
    Ok(dist_sq(c.point(i), c.point(j)).sqrt())
}

/// Whether the ball of `radius` around the frame origin lies inside the region.
/// A ball touching the boundary counts as contained.
pub fn contains_ball<T: Scalar>(region: &HalfspaceRegion<T>, radius: T) -> bool {
    radius <= region.min_offset()
}

/// `d_min`, `d_max` and boundedness of a region built by [`voronoi_region`].
pub fn extents<T: Scalar>(region: &HalfspaceRegion<T>) -> Result<RegionExtents<T>> {
    let d_min = region.min_offset();
    if !is_bounded(region)? {
        return Ok(RegionExtents {
            d_min,
            d_max: T::infinity(),
            bounded: false,
        });
    }
    let d_max = vertices(region)?
        .iter()
        .map(|v| dot(v, v).sqrt())
        .fold(T::zero(), T::max);
    Ok(RegionExtents {
        d_min,
        d_max,
        bounded: true,
    })
}

/// Extents of every decision region of `c`, in point order.
pub fn all_extents<T: Scalar>(c: &Constellation<T>) -> Result<Vec<RegionExtents<T>>> {
    (0..c.len())
        .map(|i| extents(&voronoi_region(c, i)?))
        .collect()
}

/// A polyhedron containing the origin is unbounded iff its recession cone
/// `{d : Ad ≤ 0}` contains a nonzero direction.
///
/// First solves `max t` s.t. `Ad ≤ −t·1`, `|d_k| ≤ 1`; `t* > 0` means an
/// interior recession direction. When `t* = 0` a ray may still lie on the
/// boundary of the cone (e.g. a strip), so each coordinate of the cone
/// section `{Ad ≤ 0, |d_k| ≤ 1}` is maximized and minimized as well.
pub fn is_bounded<T: Scalar>(region: &HalfspaceRegion<T>) -> Result<bool> {
    let n = region.dim();
    let rows: Vec<Vec<f64>> = region
        .rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_f64_lossy()).collect())
        .collect();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let d: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let t = lp.add_var(1.0, (0.0, 1.0));
    for a in &rows {
        let mut e = LinearExpr::empty();
        for (k, &v) in d.iter().enumerate() {
            e.add(v, a[k]);
        }
        e.add(t, 1.0);
        lp.add_constraint(e, ComparisonOp::Le, 0.0);
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
    if sol.objective() > RECESSION_TOLERANCE {
        return Ok(false);
    }

    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let d: Vec<_> = (0..n)
                .map(|q| lp.add_var(if q == k { sign } else { 0.0 }, (-1.0, 1.0)))
                .collect();
            for a in &rows {
                let mut e = LinearExpr::empty();
                for (q, &v) in d.iter().enumerate() {
                    e.add(v, a[q]);
                }
                lp.add_constraint(e, ComparisonOp::Le, 0.0);
            }
            let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
            if sol.objective() > RECESSION_TOLERANCE {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Vertices of the polyhedron by exhaustive enumeration of n-subsets of rows.
/// Rank-deficient subsets are skipped; duplicates are not removed.
pub fn vertices<T: Scalar>(region: &HalfspaceRegion<T>) -> Result<Vec<Vec<T>>> {
    let n = region.dim();
    let m = region.rows.len();
    let count = binomial(m, n);
    if count > MAX_VERTEX_CANDIDATES {
        return Err(Error::TooLarge { count });
    }
    let tol = T::lit(FEASIBILITY_TOLERANCE);
    let mut out = Vec::new();
    for subset in (0..m).combinations(n) {
        let a: Vec<Vec<T>> = subset.iter().map(|&r| region.rows[r].clone()).collect();
        let b: Vec<T> = subset.iter().map(|&r| region.offsets[r]).collect();
        if let Some(v) = solve_square(a, b) {
            if region.contains_with(&v, tol) {
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting; `None` when (near-)singular.
fn solve_square<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let tiny = T::lit(PIVOT_TOLERANCE);
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| {
            a[p][col]
                .abs()
                .partial_cmp(&a[q][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].abs() < tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != T::zero() {
                for k in col..n {
                    let v = a[col][k];
                    a[r][k] = a[r][k] - f * v;
                }
                b[r] = b[r] - f * b[col];
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s: T = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Up to `count` points drawn uniformly from `region ∩ ball(center, radius)`
/// by rejection sampling.
///
/// Fails when fewer than `count` points are accepted within `count · 10⁴`
/// proposals.
pub fn sample_region<T: Scalar>(
    region: &HalfspaceRegion<T>,
    center: &[T],
    radius: T,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    let n = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_tries = count.saturating_mul(10_000).max(10_000);
    let r = radius.to_f64_lossy();
    for _ in 0..max_tries {
        if out.len() == count {
            break;
        }
        let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let len = r * u.powf(1.0 / n as f64);
        let x: Vec<T> = dir
            .iter()
            .zip(center)
            .map(|(&d, &c)| c + T::lit(d / norm * len))
            .collect();
        if region.contains(&x) {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(Error::Precondition(format!(
            "rejection sampling accepted only {} of {count} points",
            out.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_standard, StandardKind};
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn std(kind: StandardKind) -> Constellation<f64> {
        build_standard(&kind).unwrap()
    }

    fn grid(side: usize, dim: usize) -> Constellation<f64> {
        std(StandardKind::Grid { side, dim })
    }

    #[test]
    fn bpsk_region() {
        let c = std(StandardKind::Bpsk);
        let r = voronoi_region(&c, 0).unwrap();
        assert_eq!(r.rows, vec![vec![-1.0]]);
        assert_eq!(r.offsets, vec![1.0]);
        assert!(r.contains(&[0.0]));
        let e = extents(&r).unwrap();
        assert_eq!(e.d_min, 1.0);
        assert!(e.d_max.is_infinite() && !e.bounded);
    }

    #[test]
    fn qpsk_region_offsets_and_extents() {
        let c = std(StandardKind::Psk(4));
        for i in 0..4 {
            let r = voronoi_region(&c, i).unwrap();
            assert_eq!(r.rows.len(), 3);
            let mut offs = r.offsets.clone();
            offs.sort_by(f64::total_cmp);
            assert!((offs[0] - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((offs[1] - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((offs[2] - 1.0).abs() < 1e-12);
            for row in &r.rows {
                assert!((dot(row, row) - 1.0).abs() < 1e-12);
            }
            let e = extents(&r).unwrap();
            assert!((e.d_min - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!(!e.bounded);
        }
    }

    #[test]
    fn qam16_inner_offsets() {
        let c = std(StandardKind::Qam(16));
        // Row 1, column 1 is an inner point.
        let r = voronoi_region(&c, 5).unwrap();
        assert!((r.min_offset() - 1.0 / 10f64.sqrt()).abs() < 1e-12);
        let e = extents(&r).unwrap();
        assert!(e.bounded);
        assert!((e.d_max - SQRT_2 / 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_center_cell_is_a_square() {
        let c = grid(3, 2);
        let e = extents(&voronoi_region(&c, 4).unwrap()).unwrap();
        assert!(e.bounded);
        assert!((e.d_max - SQRT_2 * e.d_min).abs() < 1e-12);
        // Edge and corner cells are open.
        assert!(!extents(&voronoi_region(&c, 1).unwrap()).unwrap().bounded);
        assert!(!extents(&voronoi_region(&c, 0).unwrap()).unwrap().bounded);
    }

    #[test]
    fn strip_region_is_unbounded() {
        // Middle point of three collinear points in the plane: its cell is a strip,
        // whose recession directions all lie on the boundary of the cone.
        let c = Constellation::new(
            "line",
            vec![vec![-1.0_f64, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]],
            None,
            None,
        )
        .unwrap();
        let r = voronoi_region(&c, 1).unwrap();
        assert!(!is_bounded(&r).unwrap());
        assert!(extents(&r).unwrap().d_max.is_infinite());
    }

    #[test]
    fn pep_region_bpsk_and_membership() {
        let c = std(StandardKind::Bpsk);
        let r = pep_region(&c, 0, 1).unwrap();
        // Frame of +1: decide -1 iff x ≤ -1.
        assert_eq!(r.rows, vec![vec![1.0]]);
        assert_eq!(r.offsets, vec![-1.0]);
        assert_eq!((r.owner, r.frame), (1, 0));
        assert!(r.contains(&[-1.5]) && !r.contains(&[-0.5]));
        assert!(matches!(pep_region(&c, 1, 1), Err(Error::SamePair(1))));
    }

    #[test]
    fn pep_region_qpsk_adjacent_distance() {
        let c = std(StandardKind::Psk(4));
        let r = pep_region(&c, 0, 1).unwrap();
        let d = pair_distance(&c, 0, 1).unwrap();
        // The closest point of the region to the origin is the pair midpoint.
        let mid: Vec<f64> = c.point(1).iter().zip(c.point(0)).map(|(a, b)| (a - b) / 2.0).collect();
        assert!(r.contains_with(&mid, 1e-12));
        assert!((dot(&mid, &mid).sqrt() - d / 2.0).abs() < 1e-12);
        assert!((d / 2.0 - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn pair_distances() {
        assert_eq!(pair_distance(&std(StandardKind::Bpsk), 0, 1).unwrap(), 2.0);
        assert!((pair_distance(&std(StandardKind::Psk(4)), 0, 1).unwrap() - SQRT_2).abs() < 1e-15);
        let q = std(StandardKind::Qam(16));
        assert!((pair_distance(&q, 5, 6).unwrap() - 2.0 / 10f64.sqrt()).abs() < 1e-15);
        assert!(pair_distance(&q, 3, 3).is_err());
    }

    #[test]
    fn ball_containment() {
        let bpsk = voronoi_region(&std(StandardKind::Bpsk), 0).unwrap();
        assert!(contains_ball(&bpsk, 0.99));
        assert!(!contains_ball(&bpsk, 1.01));
        assert!(contains_ball(&bpsk, 0.0));
        let qpsk = voronoi_region(&std(StandardKind::Psk(4)), 2).unwrap();
        assert!(contains_ball(&qpsk, qpsk.min_offset()));
    }

    #[test]
    fn too_large_enumeration_is_refused() {
        assert_eq!(binomial(26, 3), 2600);
        assert_eq!(binomial(60, 8), 2_558_620_845);
        let region = HalfspaceRegion::<f64> {
            owner: 0,
            frame: 0,
            rows: vec![vec![1.0; 8]; 60],
            offsets: vec![1.0; 60],
        };
        assert!(matches!(vertices(&region), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn single_precision_extents() {
        let c = build_standard::<f32>(&StandardKind::Qam(16)).unwrap();
        let e = extents(&voronoi_region(&c, 5).unwrap()).unwrap();
        assert!((e.d_max - (0.2f32).sqrt()).abs() < 1e-6);
    }
}
