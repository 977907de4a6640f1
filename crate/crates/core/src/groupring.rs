//! The rational group ring of SL_N(Z) and matrices over it.
//!
//! Elements are finitely supported maps from integer matrices to rationals,
//! kept in a `BTreeMap` so that iteration order (lexicographic on matrix
//! entries) is canonical. The star involution is `g ↦ g⁻¹` extended
//! linearly; on matrices it is the entrywise star of the transpose.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::exactmath::{rational_str, Rational, SqMat};

/// An element of SL_N(Z).
pub type GroupElem = SqMat;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupRingElem {
    terms: BTreeMap<GroupElem, Rational>,
}

#[derive(Serialize, Deserialize)]
struct Term {
    g: GroupElem,
    #[serde(with = "rational_str")]
    coeff: Rational,
}

impl Serialize for GroupRingElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<Term> = self.terms.iter().map(|(g, c)| Term { g: *g, coeff: c.clone() }).collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupRingElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(d)?;
        if let Some(t) = terms.iter().find(|t| t.g.det() != 1) {
            return Err(serde::de::Error::custom(format!("group element {:?} has determinant {}", t.g.rows(), t.g.det())));
        }
        Ok(GroupRingElem::from_terms(terms.into_iter().map(|t| (t.g, t.coeff))))
    }
}

impl GroupRingElem {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The identity element of SL_n(Z) with coefficient one.
    pub fn one(n: usize) -> Self {
        Self::monomial(SqMat::identity(n), Rational::one())
    }

    pub fn monomial(g: GroupElem, coeff: Rational) -> Self {
        Self::from_terms([(g, coeff)])
    }

    /// Sums repeated elements and drops zero coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = (GroupElem, Rational)>) -> Self {
        let mut out = BTreeMap::new();
        for (g, c) in terms {
            *out.entry(g).or_insert_with(Rational::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        GroupRingElem { terms: out }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElem, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, g: &GroupElem) -> Rational {
        self.terms.get(g).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElem> {
        self.terms.keys()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            *terms.entry(*g).or_insert_with(Rational::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        GroupRingElem { terms }
    }

    pub fn neg(&self) -> Self {
        GroupRingElem { terms: self.terms.iter().map(|(g, c)| (*g, -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        GroupRingElem { terms: self.terms.iter().map(|(g, c)| (*g, c * k)).collect() }
    }

    /// Convolution product.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut acc = FxHashMap::default();
        self.multiply_into(other, &mut acc);
        Self::from_accumulator(acc)
    }

    fn from_accumulator(acc: FxHashMap<GroupElem, Rational>) -> Self {
        GroupRingElem { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Adds `self · other` into `acc`.
    fn multiply_into(&self, other: &Self, acc: &mut FxHashMap<GroupElem, Rational>) {
        for (g, a) in &self.terms {
            for (h, b) in &other.terms {
                let gh = g.mul(h);
                let c = a * b;
                match acc.get_mut(&gh) {
                    Some(x) => *x += c,
                    None => {
                        acc.insert(gh, c);
                    }
                }
            }
        }
    }

    /// `Σ λ_g g ↦ Σ λ_g g⁻¹`.
    pub fn star(&self) -> Self {
        GroupRingElem {
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.inverse_unimodular().expect("group elements are unimodular"), c.clone()))
                .collect(),
        }
    }
}

/// `v = (1/|G|)·Σ sign(g)·g` for a finite group `G` with a sign character.
pub fn characteristic_chain(group: &[(GroupElem, i8)]) -> GroupRingElem {
    let scale = Rational::new(1.into(), group.len().into());
    GroupRingElem::from_terms(group.iter().map(|(g, s)| (*g, &scale * Rational::from_integer((*s).into()))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<GroupRingElem>,
}

#[derive(Serialize, Deserialize)]
struct SparseEntry {
    row: usize,
    col: usize,
    terms: GroupRingElem,
}

#[derive(Serialize, Deserialize)]
struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<SparseEntry>,
}

impl Serialize for GroupRingMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if !e.is_zero() {
                    entries.push(SparseEntry { row: i, col: j, terms: e.clone() });
                }
            }
        }
        SparseMatrix { rows: self.rows, cols: self.cols, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupRingMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sparse = SparseMatrix::deserialize(d)?;
        let mut m = GroupRingMatrix::zeros(sparse.rows, sparse.cols);
        for e in sparse.entries {
            if e.row >= m.rows || e.col >= m.cols {
                return Err(serde::de::Error::custom(format!("entry ({}, {}) out of range", e.row, e.col)));
            }
            m.set(e.row, e.col, e.terms);
        }
        Ok(m)
    }
}

impl GroupRingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GroupRingMatrix { rows, cols, entries: vec![GroupRingElem::zero(); rows * cols] }
    }

    pub fn diagonal(diag: Vec<GroupRingElem>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.into_iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn identity(size: usize, rank: usize) -> Self {
        Self::diagonal(vec![GroupRingElem::one(rank); size])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GroupRingElem {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut GroupRingElem {
        &mut self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: GroupRingElem) {
        self.entries[i * self.cols + j] = e;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Total number of stored terms.
    pub fn support_size(&self) -> usize {
        self.entries.iter().map(|e| e.term_count()).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Ok(GroupRingMatrix { rows: self.rows, cols: self.cols, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        Ok(GroupRingMatrix { rows: self.rows, cols: self.cols, entries })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "group-ring product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = (0..self.rows * other.cols)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / other.cols, idx % other.cols);
                let mut acc = FxHashMap::default();
                for k in 0..self.cols {
                    self.get(i, k).multiply_into(other.get(k, j), &mut acc);
                }
                GroupRingElem::from_accumulator(acc)
            })
            .collect();
        Ok(GroupRingMatrix { rows: self.rows, cols: other.cols, entries })
    }

    /// Transpose with entrywise star.
    pub fn star(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).star());
            }
        }
        out
    }

    pub fn is_star_symmetric(&self) -> bool {
        self.rows == self.cols && self.star() == *self
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "{}x{} against {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

pub fn matrix_star(m: &GroupRingMatrix) -> GroupRingMatrix {
    m.star()
}

/// `diag(v_σ)` over the orbit representatives of degree `n`.
pub fn idempotent_diagonal(c: &CellComplex, n: usize) -> GroupRingMatrix {
    GroupRingMatrix::diagonal(c.orbits(n).iter().map(|cell| cell.characteristic_chain()).collect())
}

/// `Δ_n = ∂_n*·∂_n + ∂_{n+1}·∂_{n+1}*`.
pub fn laplacian(c: &CellComplex, n: usize) -> Result<GroupRingMatrix> {
    let down = c.differential(n);
    let up = c.differential(n + 1);
    down.star().mul(&down)?.add(&up.mul(&up.star())?)
}

/// `Δ′_n = Δ_n + diag(1 − v_σ)`.
pub fn laplacian_prime(c: &CellComplex, n: usize) -> Result<GroupRingMatrix> {
    let one = GroupRingElem::one(c.rank());
    let complement =
        GroupRingMatrix::diagonal(c.orbits(n).iter().map(|cell| one.sub(&cell.characteristic_chain())).collect());
    laplacian(c, n)?.add(&complement)
}
