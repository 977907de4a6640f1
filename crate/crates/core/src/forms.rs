//! Integral quadratic forms: evaluation, short and minimal vectors,
//! perfectness, rank-one forms and barycentres of vector sets.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{is_positive_definite, rank_of_rows, Rational, SqMat};

pub type IntVec = Vec<i64>;

/// A quadratic form given by its symmetric Gram matrix; `q(v) = vᵗ·gram·v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SqMat", into = "SqMat")]
pub struct QuadForm {
    gram: SqMat,
}

impl TryFrom<SqMat> for QuadForm {
    type Error = Error;

    fn try_from(gram: SqMat) -> Result<Self> {
        QuadForm::new(gram)
    }
}

impl From<QuadForm> for SqMat {
    fn from(q: QuadForm) -> SqMat {
        q.gram
    }
}

impl QuadForm {
    pub fn new(gram: SqMat) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::Contract(format!("Gram matrix {gram:?} is not symmetric")));
        }
        Ok(QuadForm { gram })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(SqMat::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        QuadForm { gram: SqMat::identity(n) }
    }

    pub fn gram(&self) -> &SqMat {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.n()
    }

    pub fn det(&self) -> i64 {
        self.gram.det()
    }

    /// The right action `q.g = gᵗ q g`.
    pub fn act(&self, g: &SqMat) -> QuadForm {
        QuadForm { gram: self.gram.congruent(g) }
    }

    pub fn scale(&self, k: i64) -> QuadForm {
        QuadForm { gram: self.gram.scale(k) }
    }

    pub fn add(&self, other: &QuadForm) -> QuadForm {
        QuadForm { gram: self.gram.add(&other.gram) }
    }

    pub fn is_positive_definite(&self) -> bool {
        is_positive_definite(&self.gram.to_int_matrix()).expect("Gram matrix is symmetric")
    }

    pub fn eval(&self, v: &[i64]) -> i64 {
        self.gram.bilinear(v, v)
    }

    pub fn inner(&self, v: &[i64], w: &[i64]) -> i64 {
        self.gram.bilinear(v, w)
    }

    /// Upper-triangular coordinates, the ambient space of the Voronoi
    /// polytopes.
    pub fn flatten(&self) -> IntVec {
        sym_flatten(&self.gram)
    }

    fn require_pd(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::Contract(format!("form {:?} is not positive definite", self.gram)))
        }
    }
}

pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Entries `S[i][j]` with `i ≤ j`, row by row.
pub fn sym_flatten(s: &SqMat) -> IntVec {
    let n = s.n();
    let mut out = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            out.push(s.get(i, j));
        }
    }
    out
}

pub fn sym_unflatten(n: usize, flat: &[i64]) -> Result<SqMat> {
    if flat.len() != sym_dim(n) {
        return Err(Error::Dimension(format!(
            "a symmetric {n}x{n} matrix has {} coordinates, got {}",
            sym_dim(n),
            flat.len()
        )));
    }
    let mut s = SqMat::zero(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            s.set(i, j, flat[k]);
            s.set(j, i, flat[k]);
            k += 1;
        }
    }
    Ok(s)
}

pub fn eval_form(q: &QuadForm, v: &[i64]) -> Result<i64> {
    if v.len() != q.rank() {
        return Err(Error::Dimension(format!(
            "vector of length {} for a rank-{} form",
            v.len(),
            q.rank()
        )));
    }
    Ok(q.eval(v))
}

/// Minimal vectors of a positive definite form, both signs, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinVecSet {
    vectors: Vec<IntVec>,
    min_value: i64,
}

impl MinVecSet {
    pub fn new(mut vectors: Vec<IntVec>, min_value: i64) -> Result<Self> {
        vectors.sort();
        vectors.dedup();
        for v in &vectors {
            let neg: IntVec = v.iter().map(|x| -x).collect();
            if vectors.binary_search(&neg).is_err() {
                return Err(Error::Contract(format!("vector set not closed under negation: {v:?}")));
            }
            if v.iter().all(|&x| x == 0) {
                return Err(Error::Contract("zero vector in a minimal-vector set".into()));
            }
        }
        Ok(MinVecSet { vectors, min_value })
    }

    pub fn vectors(&self) -> &[IntVec] {
        &self.vectors
    }

    pub fn min_value(&self) -> i64 {
        self.min_value
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.vectors.binary_search_by(|x| x.as_slice().cmp(v)).is_ok()
    }

    /// One vector per `±` pair: the one whose first nonzero entry is positive.
    pub fn representatives(&self) -> Vec<IntVec> {
        self.vectors.iter().filter(|v| is_canonical_sign(v)).cloned().collect()
    }
}

pub fn is_canonical_sign(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

pub fn canonical_sign(v: &[i64]) -> IntVec {
    if is_canonical_sign(v) {
        v.to_vec()
    } else {
        v.iter().map(|x| -x).collect()
    }
}

/// All nonzero `v` with `q(v) ≤ bound`, paired with `q(v)`, sorted by vector.
///
/// Fincke–Pohst enumeration over the exact rational decomposition
/// `q(x) = Σ dᵢ (xᵢ + Σ_{j>i} μᵢⱼ xⱼ)²`. At each level the admissible
/// integers form an interval around the centre, found by walking outward
/// from it with exact comparisons.
pub fn short_vectors(q: &QuadForm, bound: i64) -> Result<Vec<(IntVec, i64)>> {
    q.require_pd()?;
    let n = q.rank();
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| Rational::from_integer(BigInt::from(q.gram.get(i, j)))).collect())
        .collect();
    let mut d = vec![Rational::zero(); n];
    let mut mu = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        d[i] = a[i][i].clone();
        for j in i + 1..n {
            mu[i][j] = &a[i][j] / &d[i];
        }
        for k in i + 1..n {
            for l in k..n {
                let delta = &mu[i][k] * &mu[i][l] * &d[i];
                a[k][l] -= &delta;
                if l != k {
                    a[l][k] -= delta;
                }
            }
        }
    }

    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let budget = Rational::from_integer(BigInt::from(bound));
    enumerate_level(n - 1, &d, &mu, &budget, &mut x, &mut out, q);
    out.sort();
    Ok(out)
}

fn enumerate_level(
    level: usize,
    d: &[Rational],
    mu: &[Vec<Rational>],
    budget: &Rational,
    x: &mut Vec<i64>,
    out: &mut Vec<(IntVec, i64)>,
    q: &QuadForm,
) {
    let n = x.len();
    let mut centre = Rational::zero();
    for j in level + 1..n {
        centre -= &mu[level][j] * Rational::from_integer(BigInt::from(x[j]));
    }
    let fits = |t: i64| -> Option<Rational> {
        let diff = Rational::from_integer(BigInt::from(t)) - &centre;
        let used = &d[level] * &diff * &diff;
        (used <= *budget).then(|| budget - used)
    };
    let start = centre.floor().to_integer();
    let start: i64 = i64::try_from(&start).expect("enumeration centre fits in i64");

    let visit = |t: i64, rest: Rational, x: &mut Vec<i64>, out: &mut Vec<(IntVec, i64)>| {
        x[level] = t;
        if level == 0 {
            if x.iter().any(|&c| c != 0) {
                out.push((x.clone(), q.eval(x)));
            }
        } else {
            enumerate_level(level - 1, d, mu, &rest, x, out, q);
        }
    };

    let mut t = start;
    while let Some(rest) = fits(t) {
        visit(t, rest, x, out);
        t -= 1;
    }
    let mut t = start + 1;
    while let Some(rest) = fits(t) {
        visit(t, rest, x, out);
        t += 1;
    }
    x[level] = 0;
}

/// `m(q)` together with `μ(q)`.
pub fn minimal_vectors(q: &QuadForm) -> Result<MinVecSet> {
    q.require_pd()?;
    let n = q.rank();
    // some unit vector realises the smallest diagonal entry, so μ(q) ≤ it
    let bound = (0..n).map(|i| q.gram.get(i, i)).min().expect("rank ≥ 1");
    let short = short_vectors(q, bound)?;
    let min_value = short.iter().map(|(_, v)| *v).min().expect("unit vectors are short");
    let vectors = short.into_iter().filter(|(_, v)| *v == min_value).map(|(x, _)| x).collect();
    MinVecSet::new(vectors, min_value)
}

/// `v̂ = v vᵗ`.
pub fn rank_one_form(v: &[i64]) -> Result<QuadForm> {
    if v.iter().all(|&x| x == 0) {
        return Err(Error::Contract("rank-one form of the zero vector".into()));
    }
    let n = v.len();
    let mut s = SqMat::zero(n);
    for i in 0..n {
        for j in 0..n {
            s.set(i, j, v[i] * v[j]);
        }
    }
    QuadForm::new(s)
}

/// Flattened `v̂`, the polytope vertex attached to `v`.
pub fn rank_one_flat(v: &[i64]) -> IntVec {
    let n = v.len();
    let mut out = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            out.push(v[i] * v[j]);
        }
    }
    out
}

/// `Σ v vᵗ` over the given vectors.
pub fn barycentre_form(vectors: &[IntVec]) -> Result<QuadForm> {
    let first = vectors.first().ok_or_else(|| Error::Contract("barycentre of an empty set".into()))?;
    let n = first.len();
    let mut s = SqMat::zero(n);
    for v in vectors {
        if v.len() != n {
            return Err(Error::Dimension("vectors of unequal length".into()));
        }
        s = s.add(rank_one_form(v)?.gram());
    }
    QuadForm::new(s)
}

/// Perfect iff the `v̂`, `v ∈ m(q)`, span all symmetric matrices.
pub fn is_perfect(q: &QuadForm) -> Result<bool> {
    let m = minimal_vectors(q)?;
    let rows: Vec<IntVec> = m.representatives().iter().map(|v| rank_one_flat(v)).collect();
    Ok(rank_of_rows(&rows) == sym_dim(q.rank()))
}

/// Provable coordinate bound for `q(v) ≤ bound`: `|vᵢ|² ≤ bound·(q⁻¹)ᵢᵢ`.
pub fn coordinate_bounds(q: &QuadForm, bound: i64) -> Result<Vec<i64>> {
    q.require_pd()?;
    let n = q.rank();
    let det = BigInt::from(q.det());
    let adj = adjugate_diagonal(&q.gram);
    Ok(adj
        .iter()
        .map(|a| {
            let r = (BigInt::from(bound) * a).div_floor(&det);
            let s = if r.is_negative() { BigInt::zero() } else { r.sqrt() };
            i64::try_from(&s).expect("bound fits in i64")
        })
        .take(n)
        .collect())
}

fn adjugate_diagonal(g: &SqMat) -> Vec<BigInt> {
    let n = g.n();
    (0..n)
        .map(|i| {
            if n == 1 {
                return BigInt::from(1);
            }
            let idx: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            let flat: Vec<i64> = idx.iter().flat_map(|&r| idx.iter().map(move |&c| g.get(r, c))).collect();
            BigInt::from(SqMat::from_flat(n - 1, &flat).expect("minor").det())
        })
        .collect()
}

/// An embedded perfect form with a label.
#[derive(Clone, Debug)]
pub struct PerfectSeed {
    pub name: &'static str,
    pub form: QuadForm,
}

/// Representatives of the `SL_N(Z)`-classes of perfect forms for `N ≤ 4`:
/// `A₂`; `A₃`; `A₄` and `D₄`. Each entry is checked for perfectness.
pub fn perfect_form_table(n: usize) -> Result<Vec<PerfectSeed>> {
    let rows: Vec<(&'static str, Vec<Vec<i64>>)> = match n {
        2 => vec![("A2", vec![vec![2, -1], vec![-1, 2]])],
        3 => vec![("A3", vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]])],
        4 => vec![
            (
                "A4",
                vec![vec![2, -1, 0, 0], vec![-1, 2, -1, 0], vec![0, -1, 2, -1], vec![0, 0, -1, 2]],
            ),
            (
                "D4",
                vec![vec![2, -1, 0, 0], vec![-1, 2, -1, -1], vec![0, -1, 2, 0], vec![0, -1, 0, 2]],
            ),
        ],
        _ => return Err(Error::Contract(format!("no perfect-form data for rank {n}"))),
    };
    let mut seeds = Vec::new();
    for (name, r) in rows {
        let form = QuadForm::from_rows(&r)?;
        if !is_perfect(&form)? {
            return Err(Error::invariant("perfectness", format!("seed {name} is not perfect")));
        }
        seeds.push(PerfectSeed { name, form });
    }
    Ok(seeds)
}
