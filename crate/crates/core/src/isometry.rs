//! Integral isometries between positive definite forms.
//!
//! An isometry from `q1` to `q2` is an integer matrix `g` with
//! `gᵗ·q1·g = q2`. Its columns `cᵢ` satisfy `cᵢᵗ·q1·cⱼ = q2ᵢⱼ`, so each
//! column is a vector of `q1`-length `q2ᵢᵢ`. The search enumerates those
//! vectors once and backtracks column by column, pruning on the inner
//! products with the columns already fixed. `q2` is reduced first so that
//! its diagonal, and with it the candidate lists, stay small.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::SqMat;
use crate::forms::{short_vectors, IntVec, QuadForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetConstraint {
    /// Only matrices of determinant +1.
    Special,
    Any,
}

/// A sorted list of isometries between two fixed forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometrySet {
    elements: Vec<SqMat>,
}

impl IsometrySet {
    pub fn new(mut elements: Vec<SqMat>) -> Self {
        elements.sort();
        elements.dedup();
        IsometrySet { elements }
    }

    pub fn elements(&self) -> &[SqMat] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &SqMat) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// Closure under products and inverses; meaningful for stabilizers.
    pub fn is_group(&self) -> bool {
        let Some(first) = self.elements.first() else { return false };
        if !self.contains(&SqMat::identity(first.n())) {
            return false;
        }
        self.elements.iter().all(|g| {
            g.inverse_unimodular().is_ok_and(|inv| self.contains(&inv))
                && self.elements.iter().all(|h| self.contains(&g.mul(h)))
        })
    }
}

/// Unimodular `u` and the reduced form `uᵗ·q·u`, obtained by pairwise
/// size reduction of the basis until no diagonal entry can shrink.
pub fn reduce(q: &QuadForm) -> (QuadForm, SqMat) {
    let n = q.rank();
    let mut u = SqMat::identity(n);
    let mut g = *q.gram();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (gij, gjj) = (g.get(i, j), g.get(j, j));
                // nearest integer to gij/gjj
                let r = (2 * gij + gjj).div_euclid(2 * gjj);
                if r == 0 {
                    continue;
                }
                // b_i ← b_i − r·b_j lowers gᵢᵢ by r(2gᵢⱼ − r·gⱼⱼ)
                if r * (2 * gij - r * gjj) <= 0 {
                    continue;
                }
                let mut e = SqMat::identity(n);
                e.set(j, i, -r);
                g = g.congruent(&e);
                u = u.mul(&e);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let reduced = QuadForm::new(g).expect("congruence preserves symmetry");
    (reduced, u)
}

struct Search<'a> {
    q1: &'a QuadForm,
    target: &'a SqMat,
    candidates: Vec<Vec<IntVec>>,
    det: DetConstraint,
}

impl Search<'_> {
    fn run(&self, cols: &mut Vec<IntVec>, first_only: bool, out: &mut Vec<SqMat>) {
        let n = self.target.n();
        let i = cols.len();
        if i == n {
            let mut g = SqMat::zero(n);
            for (c, col) in cols.iter().enumerate() {
                for (r, &x) in col.iter().enumerate() {
                    g.set(r, c, x);
                }
            }
            let d = g.det();
            if d.abs() == 1 && (self.det == DetConstraint::Any || d == 1) {
                out.push(g);
            }
            return;
        }
        for v in &self.candidates[i] {
            if cols.iter().enumerate().all(|(j, c)| self.q1.inner(c, v) == self.target.get(j, i)) {
                cols.push(v.clone());
                self.run(cols, first_only, out);
                cols.pop();
                if first_only && !out.is_empty() {
                    return;
                }
            }
        }
    }
}

fn search(q1: &QuadForm, q2: &QuadForm, det: DetConstraint, first_only: bool) -> Result<Vec<SqMat>> {
    if !q1.is_positive_definite() || !q2.is_positive_definite() {
        return Err(Error::Contract("isometries are only computed between positive definite forms".into()));
    }
    if q1.rank() != q2.rank() {
        return Err(Error::Dimension(format!("forms of rank {} and {}", q1.rank(), q2.rank())));
    }
    if q1.det() != q2.det() {
        return Ok(Vec::new());
    }
    let (r2, u) = reduce(q2);
    let n = q1.rank();
    let max_len = (0..n).map(|i| r2.gram().get(i, i)).max().unwrap_or(0);
    let short = short_vectors(q1, max_len)?;
    let candidates: Vec<Vec<IntVec>> = (0..n)
        .map(|i| {
            let len = r2.gram().get(i, i);
            short.iter().filter(|(_, l)| *l == len).map(|(v, _)| v.clone()).collect()
        })
        .collect();
    let s = Search { q1, target: r2.gram(), candidates, det };
    let mut found = Vec::new();
    s.run(&mut Vec::with_capacity(n), first_only, &mut found);
    let u_inv = u.inverse_unimodular()?;
    Ok(found.into_iter().map(|g| g.mul(&u_inv)).collect())
}

/// Every integer `g` with `gᵗ·q1·g = q2`, optionally restricted to det 1.
pub fn all_isometries(q1: &QuadForm, q2: &QuadForm, det: DetConstraint) -> Result<IsometrySet> {
    Ok(IsometrySet::new(search(q1, q2, det, false)?))
}

/// One isometry of determinant 1 from `q1` to `q2`, if any exists.
pub fn find_isometry(q1: &QuadForm, q2: &QuadForm) -> Result<Option<SqMat>> {
    Ok(search(q1, q2, DetConstraint::Special, true)?.into_iter().next())
}

/// The finite group `{g ∈ SL_N(Z) : gᵗ·q·g = q}`.
pub fn stabilizer(q: &QuadForm) -> Result<IsometrySet> {
    all_isometries(q, q, DetConstraint::Special)
}

/// The index `i` of the unique catalog entry with `catalog[i].g = q`, and
/// such a `g`. Two equivalent catalog entries are a contract error.
pub fn match_orbit(q: &QuadForm, catalog: &[QuadForm]) -> Result<Option<(usize, SqMat)>> {
    let mut hit: Option<(usize, SqMat)> = None;
    for (i, c) in catalog.iter().enumerate() {
        if let Some(g) = find_isometry(c, q)? {
            if let Some((j, _)) = hit {
                return Err(Error::Contract(format!("catalog entries {j} and {i} lie in the same orbit")));
            }
            hit = Some((i, g));
        }
    }
    Ok(hit)
}
