//! Simplicial cones of the positive octant of `R^3` and the recursion that
//! describes the complement of `T^{-k}(A)` for the three-dimensional map.
//!
//! A cone is stored by its three spanning integer vectors. Areas are exact
//! fractions of the area of the unit simplex:
//! `|det(f1 f2 f3)| / (|f1|_1 |f2|_1 |f3|_1)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{unordered_step3, FreePoint};
use crate::sample::stream_rng;
use crate::scalar::Q;

/// Deepest complement recursion accepted: `3^12` cones at the last level.
pub const MAX_DEPTH: u32 = 12;

pub type Vector3 = [i64; 3];

fn add(u: &Vector3, v: &Vector3) -> Vector3 {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

fn norm1(v: &Vector3) -> i64 {
    v.iter().sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeBasis {
    vectors: [Vector3; 3],
    depth: u32,
}

impl ConeBasis {
    pub fn new(vectors: [Vector3; 3], depth: u32) -> Result<Self> {
        if vectors.iter().flatten().any(|&v| v < 0) {
            return Err(Error::Domain("cone vectors must be nonnegative".into()));
        }
        if vectors.iter().any(|v| norm1(v) == 0) {
            return Err(Error::Degenerate("cone vector is zero".into()));
        }
        let c = ConeBasis { vectors, depth };
        if c.det() == 0 {
            return Err(Error::Degenerate("cone vectors are linearly dependent".into()));
        }
        Ok(c)
    }

    /// `(e1, e2, e3)` at depth 0.
    pub fn standard() -> Self {
        ConeBasis { vectors: [[1, 0, 0], [0, 1, 0], [0, 0, 1]], depth: 0 }
    }

    pub fn vectors(&self) -> &[Vector3; 3] {
        &self.vectors
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Determinant of the matrix with columns `f1, f2, f3`.
    pub fn det(&self) -> i128 {
        let [f1, f2, f3] = self.vectors.map(|v| v.map(i128::from));
        f1[0] * (f2[1] * f3[2] - f3[1] * f2[2]) - f2[0] * (f1[1] * f3[2] - f3[1] * f1[2])
            + f3[0] * (f1[1] * f2[2] - f2[1] * f1[2])
    }

    pub fn norms(&self) -> [i64; 3] {
        self.vectors.map(|v| norm1(&v))
    }

    /// The three cones `(s, f1, f2)`, `(s, f2, f3)`, `(s, f1, f3)` with
    /// `s = f1 + f2 + f3`: the branches of the map in this basis.
    pub fn subdivide(&self) -> [ConeBasis; 3] {
        let [f1, f2, f3] = self.vectors;
        let s = add(&add(&f1, &f2), &f3);
        let d = self.depth + 1;
        [
            ConeBasis { vectors: [s, f1, f2], depth: d },
            ConeBasis { vectors: [s, f2, f3], depth: d },
            ConeBasis { vectors: [s, f1, f3], depth: d },
        ]
    }

    /// `(f1 + f2, f2 + f3, f1 + f3)`, the part of a complement cone absorbed
    /// at the next step. Same depth as `self`.
    pub fn middle(&self) -> ConeBasis {
        let [f1, f2, f3] = self.vectors;
        ConeBasis { vectors: [add(&f1, &f2), add(&f2, &f3), add(&f1, &f3)], depth: self.depth }
    }

    /// The three corner cones making up the image of `A` in this basis,
    /// which are also what is left of the cone once its middle is removed.
    pub fn corners(&self) -> [ConeBasis; 3] {
        let [f1, f2, f3] = self.vectors;
        let d = self.depth + 1;
        [
            ConeBasis { vectors: [f1, add(&f1, &f2), add(&f1, &f3)], depth: d },
            ConeBasis { vectors: [f2, add(&f1, &f2), add(&f2, &f3)], depth: d },
            ConeBasis { vectors: [f3, add(&f1, &f3), add(&f2, &f3)], depth: d },
        ]
    }

    pub fn normalized_area(&self) -> Q {
        let n = self.norms();
        let den = BigInt::from(n[0]) * n[1] * n[2];
        Q::new(BigInt::from(self.det().abs()), den)
    }

    /// Radial projections `f_i / |f_i|_1` onto the simplex.
    pub fn triangle_vertices(&self) -> [[Q; 3]; 3] {
        self.vectors.map(|v| {
            let n = norm1(&v);
            v.map(|c| Q::new(c.into(), n.into()))
        })
    }

    /// `max_{i,j} |f_i|_1 / |f_j|_1`.
    pub fn max_mutual_ratio(&self) -> Q {
        let n = self.norms();
        let max = *n.iter().max().expect("three norms");
        let min = *n.iter().min().expect("three norms");
        Q::new(max.into(), min.into())
    }

    /// Coefficients of `x` in this basis, by Cramer's rule.
    pub fn coefficients(&self, x: &[Q; 3]) -> [Q; 3] {
        let det = Q::from_integer(self.det().into());
        let f = self.vectors.map(|v| v.map(|c| Q::from_integer(c.into())));
        let det3 = |c0: &[Q; 3], c1: &[Q; 3], c2: &[Q; 3]| -> Q {
            &c0[0] * (&c1[1] * &c2[2] - &c2[1] * &c1[2]) - &c1[0] * (&c0[1] * &c2[2] - &c2[1] * &c0[2])
                + &c2[0] * (&c0[1] * &c1[2] - &c1[1] * &c0[2])
        };
        [
            det3(x, &f[1], &f[2]) / &det,
            det3(&f[0], x, &f[2]) / &det,
            det3(&f[0], &f[1], x) / &det,
        ]
    }

    /// Closed cone membership.
    pub fn contains(&self, x: &[Q; 3]) -> bool {
        self.coefficients(x).iter().all(|c| !c.is_negative())
    }

    /// Interior membership: every coefficient strictly positive.
    pub fn contains_interior(&self, x: &[Q; 3]) -> bool {
        self.coefficients(x).iter().all(|c| c.is_positive())
    }
}

/// The three corner cones of `(e1, e2, e3)`, whose union is `A`.
pub fn a_corner_cones() -> [ConeBasis; 3] {
    ConeBasis::standard().corners().map(|mut c| {
        c.depth = 0;
        c
    })
}

/// `x` lies in `A = {x_1 + x_2 + x_3 <= 2 max x_i}`.
pub fn in_a3<T: crate::Scalar>(x: &FreePoint<T>) -> bool {
    let c = x.coords();
    let max = c.iter().max().expect("three coordinates").clone();
    x.sum() <= max.mul_small(2)
}

/// The `3^k` branch cones of `T^k` obtained by subdividing `k` times.
pub fn cylinder_decomposition(k: u32) -> Result<Vec<ConeBasis>> {
    check_depth(k)?;
    let mut level = vec![ConeBasis::standard()];
    for _ in 0..k {
        level = level.iter().flat_map(|c| c.subdivide()).collect();
    }
    Ok(level)
}

fn check_depth(k: u32) -> Result<()> {
    if k > MAX_DEPTH {
        return Err(Error::Resource(format!(
            "depth {k} exceeds the limit {MAX_DEPTH} (3^{MAX_DEPTH} cones at the last level)"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct SubdivisionTree {
    /// Complement cones per depth; level `k` has `3^k` cones.
    pub levels: Vec<Vec<ConeBasis>>,
    /// Index of each cone's parent in the previous level (empty at depth 0).
    pub parents: Vec<Vec<usize>>,
    /// Area of the complement of `T^{-k}(A)`.
    pub complement_areas: Vec<Q>,
    /// Area absorbed at step `k + 1`: the middles of the depth-`k` cones.
    pub absorbed_areas: Vec<Q>,
    /// Area of `A` itself.
    pub a_area: Q,
}

impl SubdivisionTree {
    pub fn depth(&self) -> u32 {
        self.levels.len() as u32 - 1
    }
}

/// Builds the complement of `T^{-k}(A)` for `k = 0..=depth`, with exact
/// areas. Depth 0 is the middle cone of `(e1, e2, e3)`; each further level
/// replaces every cone by its three corners.
pub fn complement_recursion(depth: u32) -> Result<SubdivisionTree> {
    check_depth(depth)?;
    let mut levels = vec![vec![ConeBasis::standard().middle()]];
    let mut parents = vec![Vec::new()];
    for _ in 0..depth {
        let prev = levels.last().expect("nonempty");
        let next: Vec<ConeBasis> = prev.iter().flat_map(|c| c.corners()).collect();
        parents.push((0..next.len()).map(|i| i / 3).collect());
        levels.push(next);
    }
    let complement_areas = levels.iter().map(|l| area_sum(l.par_iter().cloned())).collect();
    let absorbed_areas = levels.iter().map(|l| area_sum(l.par_iter().map(|c| c.middle()))).collect();
    let a_area = a_corner_cones().iter().map(|c| c.normalized_area()).sum();
    Ok(SubdivisionTree { levels, parents, complement_areas, absorbed_areas, a_area })
}

/// Exact sum of cone areas. Terms are grouped by denominator and brought
/// to their lcm, so only one reduction of a large fraction is needed.
fn area_sum(cones: impl ParallelIterator<Item = ConeBasis>) -> Q {
    let grouped: BTreeMap<i128, i128> = cones
        .fold(BTreeMap::new, |mut m, c| {
            let n = c.norms();
            let den = i128::from(n[0]) * i128::from(n[1]) * i128::from(n[2]);
            *m.entry(den).or_insert(0) += c.det().abs();
            m
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let lcm = grouped.keys().fold(BigInt::one(), |acc, d| acc.lcm(&BigInt::from(*d)));
    let num: BigInt = grouped
        .iter()
        .map(|(d, v)| (&lcm / BigInt::from(*d)) * BigInt::from(*v))
        .sum();
    Q::new(num, lcm)
}

/// `(1/4) prod_{j<k} (1 - 1/(2(j+2)))`.
pub fn decay_bound(k: u32) -> Q {
    (0..k).fold(Q::new(1.into(), 4.into()), |acc, j| {
        acc * (Q::one() - Q::new(1.into(), (2 * (i64::from(j) + 2)).into()))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCheck {
    pub depth: u32,
    pub cones: usize,
    pub count_ok: bool,
    /// Every mutual norm ratio is at most `k + 1`.
    pub mutual_ratio_ok: bool,
    /// Every middle keeps at least `1/(2(k+2))` of its cone's area.
    pub absorbed_ratio_ok: bool,
    /// Complement area at most the decay bound.
    pub decay_ok: bool,
    /// Complement, absorbed middles so far and `A` add up to 1.
    pub partition_ok: bool,
    /// Complement area strictly below the previous level (true at depth 0).
    pub decreasing: bool,
    /// Every cone has `|det| >= 1` and nonnegative nonzero vectors.
    pub basis_ok: bool,
}

impl LevelCheck {
    pub fn all_ok(&self) -> bool {
        self.count_ok
            && self.mutual_ratio_ok
            && self.absorbed_ratio_ok
            && self.decay_ok
            && self.partition_ok
            && self.decreasing
            && self.basis_ok
    }
}

/// Exact checks of every level of the tree.
pub fn verify_tree(tree: &SubdivisionTree) -> Vec<LevelCheck> {
    let mut absorbed_so_far = Q::zero();
    let mut out = Vec::with_capacity(tree.levels.len());
    for (k, level) in tree.levels.iter().enumerate() {
        let kk = k as i64;
        let bound_ratio = Q::new(1.into(), (2 * (kk + 2)).into());
        let mutual_ratio_ok = level.par_iter().all(|c| {
            let n = c.norms();
            let max = *n.iter().max().expect("norms");
            let min = *n.iter().min().expect("norms");
            max <= (kk + 1) * min
        });
        let absorbed_ratio_ok = level
            .par_iter()
            .all(|c| c.middle().normalized_area() / c.normalized_area() >= bound_ratio);
        let basis_ok = level.par_iter().all(|c| {
            c.det().abs() >= 1 && c.vectors.iter().all(|v| v.iter().all(|&x| x >= 0) && norm1(v) > 0)
        });
        let area = &tree.complement_areas[k];
        let partition_ok = area + &absorbed_so_far + &tree.a_area == Q::one();
        let decreasing = k == 0 || *area < tree.complement_areas[k - 1];
        out.push(LevelCheck {
            depth: k as u32,
            cones: level.len(),
            count_ok: level.len() == 3usize.pow(k as u32),
            mutual_ratio_ok,
            absorbed_ratio_ok,
            decay_ok: *area <= decay_bound(k as u32),
            partition_ok,
            decreasing,
            basis_ok,
        });
        absorbed_so_far += &tree.absorbed_areas[k];
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DynamicsCheck {
    pub depth: u32,
    pub complement_points: u64,
    /// Complement points whose `k`-th image was in `A`.
    pub complement_failures: u64,
    pub middle_points: u64,
    /// Middle points that had not reached `A` after `k + 1` steps.
    pub middle_failures: u64,
}

/// Samples interior points of every cone at `depth` (and of its middle) as
/// random positive integer combinations of the basis, then runs the
/// three-dimensional map on them.
pub fn dynamics_cross_check(
    tree: &SubdivisionTree,
    depth: u32,
    points_per_cone: u64,
    seed: u64,
) -> Result<DynamicsCheck> {
    let level = tree
        .levels
        .get(depth as usize)
        .ok_or_else(|| Error::Parameter(format!("tree has no level {depth}")))?;
    let rows: Vec<Result<(u64, u64)>> = level
        .par_iter()
        .enumerate()
        .map(|(idx, cone)| {
            let mut rng = stream_rng(seed, idx as u64);
            let middle = cone.middle();
            let (mut cf, mut mf) = (0u64, 0u64);
            for _ in 0..points_per_cone {
                let x = interior_point(&mut rng, cone)?;
                let mut y = x;
                for _ in 0..depth {
                    y = unordered_step3(&y)?;
                }
                cf += u64::from(in_a3(&y));

                let mut y = interior_point(&mut rng, &middle)?;
                let mut reached = in_a3(&y);
                for _ in 0..=depth {
                    y = unordered_step3(&y)?;
                    reached |= in_a3(&y);
                }
                mf += u64::from(!reached);
            }
            Ok((cf, mf))
        })
        .collect();
    let mut check = DynamicsCheck {
        depth,
        complement_points: points_per_cone * level.len() as u64,
        complement_failures: 0,
        middle_points: points_per_cone * level.len() as u64,
        middle_failures: 0,
    };
    for r in rows {
        let (cf, mf) = r?;
        check.complement_failures += cf;
        check.middle_failures += mf;
    }
    Ok(check)
}

fn interior_point<R: Rng + ?Sized>(rng: &mut R, cone: &ConeBasis) -> Result<FreePoint<i128>> {
    let w: [i128; 3] = std::array::from_fn(|_| rng.random_range(1..=1i128 << 30));
    let v = cone.vectors.map(|f| f.map(i128::from));
    let x = (0..3).map(|i| w[0] * v[0][i] + w[1] * v[1][i] + w[2] * v[2][i]).collect();
    FreePoint::new(x)
}
