//! Branch matrices of the subtractive maps.
//!
//! On the cylinder of a shuffle `pi` the map acts as `x -> L_pi x^T`, and the
//! inverse branch is `M_pi = L_pi^{-1}`, a nonnegative unimodular matrix.
//! Products of inverse branches describe cylinders of iterates; their column
//! sums control the Jacobian of the projected inverse branches.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{MapParams, Shuffle};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// `L_pi` or a product of them.
    Forward,
    /// `M_pi` or a product of them.
    Inverse,
}

/// Dense square integer matrix tagged with the kind of its factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<BigInt>,
    kind: MatrixKind,
    factors: usize,
}

impl TransitionMatrix {
    /// Empty product.
    pub fn identity(n: usize, kind: MatrixKind) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::one();
        }
        TransitionMatrix { n, entries, kind, factors: 0 }
    }

    pub fn from_rows(rows: &[Vec<i64>], kind: MatrixKind) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("matrix must be square".into()));
        }
        let entries = rows.iter().flatten().map(|&v| BigInt::from(v)).collect();
        let m = TransitionMatrix { n, entries, kind, factors: 1 };
        if kind == MatrixKind::Inverse && m.entries.iter().any(Signed::is_negative) {
            return Err(Error::MatrixKind("inverse-branch matrices are nonnegative".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Number of elementary factors in the product.
    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.n + col]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.n).map(<[BigInt]>::to_vec).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.entries.iter().any(Signed::is_negative)
    }

    /// Product `self * rhs`. Only like kinds can be multiplied.
    pub fn mul(&self, rhs: &TransitionMatrix) -> Result<TransitionMatrix> {
        if self.kind != rhs.kind {
            return Err(Error::MatrixKind(format!(
                "cannot multiply {:?} by {:?}",
                self.kind, rhs.kind
            )));
        }
        if self.n != rhs.n {
            return Err(Error::Parameter("dimension mismatch".into()));
        }
        let n = self.n;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        entries[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(TransitionMatrix { n, entries, kind: self.kind, factors: self.factors + rhs.factors })
    }

    /// Exact determinant by fraction-free elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                    m[i][j] = v;
                }
            }
            prev = m[k][k].clone();
        }
        sign * &m[n - 1][n - 1]
    }

    /// `self * x^T` over big integers.
    pub fn apply_big(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() != self.n {
            return Err(Error::Parameter("vector length does not match matrix".into()));
        }
        Ok(self
            .entries
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, v)| a * v).sum())
            .collect())
    }

    /// `self * x^T` in any exact scalar type. Fails if an intermediate value
    /// does not fit the type.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::Parameter("vector length does not match matrix".into()));
        }
        let coef = self
            .entries
            .iter()
            .map(|e| {
                T::from_bigint(e).ok_or_else(|| Error::Resource("matrix entry overflows scalar".into()))
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(coef
            .chunks(self.n)
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter(|(c, _)| !c.is_zero())
                    .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
            })
            .collect())
    }

    /// Column sums `c_1, ..., c_n`; only meaningful for nonnegative products.
    pub fn column_sums(&self) -> Result<Vec<BigInt>> {
        if !self.is_nonnegative() {
            return Err(Error::MatrixKind("column sums need a nonnegative matrix".into()));
        }
        Ok((0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j)).sum()).collect())
    }
}

impl Serialize for TransitionMatrix {
    /// Row-major integer arrays. Entries beyond the `i64` range are written
    /// as decimal strings.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        #[serde(untagged)]
        enum Entry {
            Small(i64),
            Big(String),
        }
        let rows: Vec<Vec<Entry>> = self
            .entries
            .chunks(self.n)
            .map(|r| {
                r.iter()
                    .map(|e| match i64::try_from(e) {
                        Ok(v) => Entry::Small(v),
                        Err(_) => Entry::Big(e.to_string()),
                    })
                    .collect()
            })
            .collect();
        let mut st = s.serialize_struct("TransitionMatrix", 3)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("factors", &self.factors)?;
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}

fn check_shuffle(pi: &Shuffle, p: MapParams) -> Result<()> {
    if pi.len() != p.dim() || pi.deck_one() != p.a() {
        return Err(Error::Parameter(format!("shuffle {pi} does not match {p}")));
    }
    Shuffle::new(pi.positions().to_vec(), p).map(|_| ())
}

/// `L_pi`: row `pi(k)` is `e_k` for `k <= a` and `e_k - e_i` for `k > a`,
/// where `i` is the subtracted index.
pub fn forward_matrix(pi: &Shuffle, p: MapParams) -> Result<TransitionMatrix> {
    check_shuffle(pi, p)?;
    let n = p.dim();
    let s = p.variant_index() - 1;
    let mut m = TransitionMatrix::identity(n, MatrixKind::Forward);
    m.entries.iter_mut().for_each(|e| *e = BigInt::zero());
    m.factors = 1;
    for (k, &row) in pi.positions().iter().enumerate() {
        m.entries[row * n + k] += 1;
        if k >= p.a() {
            m.entries[row * n + s] -= 1;
        }
    }
    Ok(m)
}

/// `M_pi = L_pi^{-1}`: column `pi(k)` is `e_k` for `k != i` and
/// `e_i + e_{a+1} + ... + e_{a+b}` for `k = i`.
pub fn inverse_matrix(pi: &Shuffle, p: MapParams) -> Result<TransitionMatrix> {
    check_shuffle(pi, p)?;
    let n = p.dim();
    let s = p.variant_index() - 1;
    let mut m = TransitionMatrix::identity(n, MatrixKind::Inverse);
    m.entries.iter_mut().for_each(|e| *e = BigInt::zero());
    m.factors = 1;
    for (k, &col) in pi.positions().iter().enumerate() {
        m.entries[k * n + col] += 1;
    }
    let col = pi.positions()[s];
    for k in p.a()..n {
        m.entries[k * n + col] += 1;
    }
    Ok(m)
}

/// `L_{pi_k} ... L_{pi_1}` for the word `(pi_1, ..., pi_k)`.
pub fn forward_product(word: &[Shuffle], p: MapParams) -> Result<TransitionMatrix> {
    word.iter().try_fold(TransitionMatrix::identity(p.dim(), MatrixKind::Forward), |acc, pi| {
        forward_matrix(pi, p)?.mul(&acc)
    })
}

/// `M_{pi_1} ... M_{pi_k}` for the word `(pi_1, ..., pi_k)`: the inverse of
/// [`forward_product`].
pub fn inverse_product(word: &[Shuffle], p: MapParams) -> Result<TransitionMatrix> {
    word.iter().try_fold(TransitionMatrix::identity(p.dim(), MatrixKind::Inverse), |acc, pi| {
        acc.mul(&inverse_matrix(pi, p)?)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnClaims {
    /// The largest column sum is attained at an index `>= a`.
    pub max_property: bool,
    /// `c_1 + ... + c_{a-1} <= (a-1)(c_a + ... + c_{a+b})`.
    pub prefix_bound: bool,
}

pub fn check_column_claims(m: &TransitionMatrix, p: MapParams) -> Result<ColumnClaims> {
    p.check_dim(m.dim())?;
    let c = m.column_sums()?;
    let a = p.a();
    let overall = c.iter().max().expect("nonempty");
    let tail_max = c[a - 1..].iter().max().expect("nonempty");
    let head: BigInt = c[..a - 1].iter().sum();
    let tail: BigInt = c[a - 1..].iter().sum();
    Ok(ColumnClaims {
        max_property: overall == tail_max,
        prefix_bound: head <= BigInt::from(a - 1) * tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{subtractive_step, OrderedPoint};
    use crate::scalar::Q;

    fn rows(m: &TransitionMatrix) -> Vec<Vec<i64>> {
        m.rows().iter().map(|r| r.iter().map(|v| i64::try_from(v).unwrap()).collect()).collect()
    }

    #[test]
    fn forward_examples() {
        let p = MapParams::new(1, 2).unwrap();
        let l = forward_matrix(&Shuffle::identity(p), p).unwrap();
        assert_eq!(rows(&l), vec![vec![1, 0, 0], vec![-1, 1, 0], vec![-1, 0, 1]]);
        let p = MapParams::new(1, 1).unwrap();
        let l = forward_matrix(&Shuffle::identity(p), p).unwrap();
        assert_eq!(rows(&l), vec![vec![1, 0], vec![-1, 1]]);
    }

    #[test]
    fn inverse_examples() {
        let p = MapParams::new(1, 2).unwrap();
        let m = inverse_matrix(&Shuffle::identity(p), p).unwrap();
        assert_eq!(rows(&m), vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 0, 1]]);
        assert_eq!(m.column_sums().unwrap(), vec![3.into(), 1.into(), 1.into()]);
        let m2 = m.mul(&m).unwrap();
        assert_eq!(rows(&m2), vec![vec![1, 0, 0], vec![2, 1, 0], vec![2, 0, 1]]);
        assert_eq!(m2.column_sums().unwrap(), vec![5.into(), 1.into(), 1.into()]);
        assert_eq!(m2.factors(), 2);
    }

    #[test]
    fn forward_times_inverse_is_identity_and_unimodular() {
        for (a, b, i) in [(1, 2, 1), (2, 2, 2), (2, 3, 2), (3, 2, 3), (2, 1, 1), (3, 2, 2)] {
            let p = MapParams::variant(a, b, i).unwrap();
            for pi in Shuffle::all(p) {
                let l = forward_matrix(&pi, p).unwrap();
                let m = inverse_matrix(&pi, p).unwrap();
                let mut prod = l.clone();
                prod.kind = MatrixKind::Inverse;
                let id = prod.mul(&m).unwrap();
                assert_eq!(rows(&id), rows(&TransitionMatrix::identity(p.dim(), MatrixKind::Inverse)));
                assert_eq!(l.det().abs(), BigInt::one());
                assert_eq!(m.det().abs(), BigInt::one());
                assert!(m.is_nonnegative());
                assert!(m.entries.iter().all(|e| *e <= BigInt::one()));
            }
        }
    }

    #[test]
    fn forward_matrix_reproduces_step_on_its_cylinder() {
        let p = MapParams::new(2, 2).unwrap();
        let x = OrderedPoint::from_ints(&[3, 5, 6, 11]).unwrap();
        let (y, pi) = subtractive_step(&x, p).unwrap();
        let l = forward_matrix(&pi, p).unwrap();
        assert_eq!(l.apply::<Q>(x.coords()).unwrap(), y.coords());
    }

    #[test]
    fn kinds_do_not_mix() {
        let p = MapParams::new(1, 2).unwrap();
        let pi = Shuffle::identity(p);
        let l = forward_matrix(&pi, p).unwrap();
        let m = inverse_matrix(&pi, p).unwrap();
        assert!(matches!(l.mul(&m), Err(Error::MatrixKind(_))));
        assert!(matches!(l.column_sums(), Err(Error::MatrixKind(_))));
    }

    #[test]
    fn determinant_of_known_matrices() {
        let m = TransitionMatrix::from_rows(
            &[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]],
            MatrixKind::Forward,
        )
        .unwrap();
        // 2*(3-2) - 0 + 1*(1-3) = 0
        assert_eq!(m.det(), BigInt::zero());
        let m = TransitionMatrix::from_rows(
            &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]],
            MatrixKind::Forward,
        )
        .unwrap();
        assert_eq!(m.det(), BigInt::from(-5));
    }

    #[test]
    fn column_claims_on_single_branches_and_identity() {
        for (a, b) in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 2), (4, 1)] {
            let p = MapParams::new(a, b).unwrap();
            let id = TransitionMatrix::identity(p.dim(), MatrixKind::Inverse);
            let ok = ColumnClaims { max_property: true, prefix_bound: true };
            assert_eq!(check_column_claims(&id, p).unwrap(), ok);
            for pi in Shuffle::all(p) {
                let m = inverse_matrix(&pi, p).unwrap();
                assert_eq!(check_column_claims(&m, p).unwrap(), ok);
            }
        }
    }

    #[test]
    fn product_word_inverses() {
        let p = MapParams::new(2, 2).unwrap();
        let all = Shuffle::all(p);
        let word = vec![all[1].clone(), all[4].clone(), all[0].clone()];
        let mut l = forward_product(&word, p).unwrap();
        let m = inverse_product(&word, p).unwrap();
        l.kind = MatrixKind::Inverse;
        let id = l.mul(&m).unwrap();
        assert_eq!(rows(&id), rows(&TransitionMatrix::identity(4, MatrixKind::Inverse)));
    }

    #[test]
    fn negative_inverse_rejected() {
        assert!(TransitionMatrix::from_rows(&[vec![1, -1], vec![0, 1]], MatrixKind::Inverse).is_err());
    }
}
