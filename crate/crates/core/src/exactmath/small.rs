//! Fixed-capacity square integer matrices for ranks up to 4.
//!
//! Gram matrices of forms and elements of `SL_N(Z)` are tiny, so they live in
//! a `Copy` array that hashes and orders cheaply. Arithmetic is checked; an
//! overflow is a bug in the caller and panics.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use super::IntMatrix;
use crate::error::{Error, Result};

pub const MAX_RANK: usize = 4;

/// Square `n × n` integer matrix, `n ≤ 4`, stored row-major in the first
/// `n²` slots. Unused slots are always zero, so the derived ordering is the
/// lexicographic order on the flattened entries.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SqMat {
    n: u8,
    a: [i64; MAX_RANK * MAX_RANK],
}

impl SqMat {
    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_RANK).contains(&n), "matrix size {n} unsupported");
        SqMat { n: n as u8, a: [0; MAX_RANK * MAX_RANK] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_flat(n: usize, entries: &[i64]) -> Result<Self> {
        if n == 0 || n > MAX_RANK || entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} entries for a small matrix, got {}",
                entries.len()
            )));
        }
        let mut m = Self::zero(n);
        m.a[..n * n].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows of unequal length".into()));
        }
        let flat: Vec<i64> = rows.iter().flatten().copied().collect();
        Self::from_flat(n, &flat)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.a[i * self.n() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        let n = self.n();
        self.a[i * n + j] = v;
    }

    pub fn flat(&self) -> &[i64] {
        &self.a[..self.n() * self.n()]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        (0..n).map(|i| self.a[i * n..(i + 1) * n].to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n();
        let mut t = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n();
        assert_eq!(n, other.n(), "small matrix size mismatch");
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: i64 = 0;
                for k in 0..n {
                    let t = self.get(i, k)
                        .checked_mul(other.get(k, j))
                        .expect("overflow in small matrix product");
                    acc = acc.checked_add(t).expect("overflow in small matrix product");
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, b) in out.a.iter_mut().zip(other.a.iter()) {
            *o = o.checked_add(*b).expect("overflow in small matrix sum");
        }
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = *self;
        for o in out.a.iter_mut() {
            *o = o.checked_mul(k).expect("overflow in small matrix scaling");
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        let n = self.n();
        assert_eq!(v.len(), n, "vector length mismatch");
        (0..n)
            .map(|i| (0..n).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    /// `vᵗ · self · w`.
    pub fn bilinear(&self, v: &[i64], w: &[i64]) -> i64 {
        let mw = self.mul_vec(w);
        v.iter().zip(mw.iter()).map(|(a, b)| a * b).sum()
    }

    /// Right action on Gram matrices, `gᵗ · self · g`.
    pub fn congruent(&self, g: &Self) -> Self {
        g.transpose().mul(self).mul(g)
    }

    /// Exact determinant via fraction-free elimination in `i128`.
    pub fn det(&self) -> i64 {
        let n = self.n();
        let mut m = [[0i128; MAX_RANK]; MAX_RANK];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = self.get(i, j) as i128;
            }
        }
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if m[k][k] == 0 {
                match (k + 1..n).find(|&r| m[r][k] != 0) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
                }
                m[i][k] = 0;
            }
            prev = m[k][k];
        }
        (sign * m[n - 1][n - 1]) as i64
    }

    /// Inverse of a unimodular matrix (adjugate divided by `±1`).
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let n = self.n();
        let d = self.det();
        if d != 1 && d != -1 {
            return Err(Error::Contract(format!("matrix has determinant {d}, not ±1")));
        }
        if n == 1 {
            return SqMat::from_flat(1, &[d]);
        }
        let mut inv = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i);
                let c = if (i + j) % 2 == 0 { minor.det() } else { -minor.det() };
                inv.set(i, j, c * d);
            }
        }
        Ok(inv)
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.n();
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                out.push(self.get(i, j));
            }
        }
        Self::from_flat(n - 1, &out).expect("minor size")
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64(self.n(), self.n(), self.flat())
    }
}

impl fmt::Debug for SqMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl Serialize for SqMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SqMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        SqMat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
