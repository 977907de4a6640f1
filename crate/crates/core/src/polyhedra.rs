//! Exact facet enumeration for polytopes given by integer points.
//!
//! The points are first mapped into their affine hull by dropping
//! coordinates (an injective projection), homogenised to `(1, y)`, and the
//! facets are then the extreme rays of the cone `{a : a·(1, yᵢ) ≥ 0}`,
//! computed with the double description method over `BigInt`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{det_exact, rank_of_rows, IntMatrix, Rational};
use crate::forms::IntVec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VPolytope {
    ambient_dim: usize,
    vertices: Vec<IntVec>,
}

/// A facet, identified by the points it contains. The functional satisfies
/// `normal·x + offset = 0` on those points and `> 0` on all others.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub vertex_indices: Vec<usize>,
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Facet {
    pub fn evaluate(&self, x: &[i64]) -> Rational {
        self.normal.iter().zip(x).fold(self.offset.clone(), |acc, (a, &b)| acc + a * BigInt::from(b))
    }
}

impl VPolytope {
    pub fn new(vertices: Vec<IntVec>) -> Result<Self> {
        let ambient_dim = vertices
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::Contract("polytope needs at least one vertex".into()))?;
        if vertices.iter().any(|v| v.len() != ambient_dim) {
            return Err(Error::Dimension("vertices of unequal length".into()));
        }
        let mut sorted = vertices.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Contract("repeated vertex".into()));
        }
        Ok(VPolytope { ambient_dim, vertices })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[IntVec] {
        &self.vertices
    }

    fn differences(&self) -> Vec<IntVec> {
        let base = &self.vertices[0];
        self.vertices[1..].iter().map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect()).collect()
    }
}

pub fn affine_dim(p: &VPolytope) -> usize {
    rank_of_rows(&p.differences())
}

/// Coordinates on which the affine hull projects isomorphically.
fn hull_coordinates(p: &VPolytope) -> Vec<usize> {
    let diffs = p.differences();
    let mut chosen: Vec<usize> = Vec::new();
    let mut rank = 0;
    for c in 0..p.ambient_dim {
        let mut trial = chosen.clone();
        trial.push(c);
        let cols: Vec<IntVec> = diffs.iter().map(|d| trial.iter().map(|&k| d[k]).collect()).collect();
        let r = rank_of_rows(&cols);
        if r > rank {
            chosen = trial;
            rank = r;
        }
    }
    chosen
}

#[derive(Clone)]
struct Ray {
    coords: Vec<BigInt>,
    zeros: u128,
}

fn dot(a: &[BigInt], h: &[BigInt]) -> BigInt {
    a.iter().zip(h).map(|(x, y)| x * y).sum()
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

/// All facets of `conv(vertices)` relative to its affine hull.
pub fn facets(p: &VPolytope) -> Result<Vec<Facet>> {
    let m = p.vertices.len();
    if m > 128 {
        return Err(Error::Contract(format!("facet enumeration supports at most 128 points, got {m}")));
    }
    let coords = hull_coordinates(p);
    let d = coords.len();
    if d == 0 {
        return Err(Error::Contract("facets of a zero-dimensional polytope".into()));
    }
    let homog: Vec<Vec<BigInt>> = p
        .vertices
        .iter()
        .map(|v| std::iter::once(BigInt::one()).chain(coords.iter().map(|&c| BigInt::from(v[c]))).collect())
        .collect();

    // d+1 affinely independent points start the iteration
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..m {
        let mut trial: Vec<IntVec> = basis.iter().map(|&b| to_i64(&homog[b])).collect();
        trial.push(to_i64(&homog[i]));
        if rank_of_rows(&trial) == trial.len() {
            basis.push(i);
        }
        if basis.len() == d + 1 {
            break;
        }
    }
    let h0 = IntMatrix::new(
        d + 1,
        d + 1,
        basis.iter().flat_map(|&b| homog[b].iter().cloned()).collect(),
    )?;
    let det = det_exact(&h0)?;
    let sign = if det.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut rays: Vec<Ray> = (0..=d)
        .map(|k| {
            // column k of adj(H0), scaled so that row k pairs positively
            let col: Vec<BigInt> = (0..=d).map(|r| cofactor(&h0, k, r) * &sign).collect();
            let coords = primitive(col);
            let zeros = basis
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(0u128, |acc, (_, &b)| acc | (1u128 << b));
            Ray { coords, zeros }
        })
        .collect();

    let cone_dim = d + 1;
    let mut processed: u128 = basis.iter().fold(0u128, |acc, &b| acc | (1u128 << b));
    for i in 0..m {
        if processed & (1u128 << i) != 0 {
            continue;
        }
        let h = &homog[i];
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(&r.coords, h)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (k, r) in rays.iter().enumerate() {
            if vals[k].is_positive() {
                next.push(r.clone());
            } else if vals[k].is_zero() {
                let mut r = r.clone();
                r.zeros |= 1u128 << i;
                next.push(r);
            }
        }
        for &a in &pos {
            for &b in &neg {
                let common = rays[a].zeros & rays[b].zeros;
                if (common.count_ones() as usize) + 2 < cone_dim {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != a && k != b && r.zeros & common == common);
                if blocked {
                    continue;
                }
                let coords: Vec<BigInt> = rays[b]
                    .coords
                    .iter()
                    .zip(&rays[a].coords)
                    .map(|(rb, ra)| &vals[a] * rb - &vals[b] * ra)
                    .collect();
                next.push(Ray { coords: primitive(coords), zeros: common | (1u128 << i) });
            }
        }
        rays = next;
        processed |= 1u128 << i;
    }

    let mut out: Vec<Facet> = rays
        .into_iter()
        .map(|r| {
            let vertex_indices: Vec<usize> = (0..m).filter(|&i| dot(&r.coords, &homog[i]).is_zero()).collect();
            let mut normal = vec![Rational::zero(); p.ambient_dim];
            for (k, &c) in coords.iter().enumerate() {
                normal[c] = Rational::from_integer(r.coords[k + 1].clone());
            }
            Facet { vertex_indices, normal, offset: Rational::from_integer(r.coords[0].clone()) }
        })
        .collect();
    out.sort_by(|a, b| a.vertex_indices.cmp(&b.vertex_indices));
    Ok(out)
}

fn to_i64(v: &[BigInt]) -> IntVec {
    v.iter().map(|x| i64::try_from(x).expect("small coordinate")).collect()
}

/// Cofactor `(-1)^{r+c} det(M without row r and column c)`.
fn cofactor(m: &IntMatrix, r: usize, c: usize) -> BigInt {
    let n = m.rows();
    let mut entries = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != r) {
        for j in (0..n).filter(|&j| j != c) {
            entries.push(m.get(i, j).clone());
        }
    }
    let minor = IntMatrix::new(n - 1, n - 1, entries).expect("minor shape");
    let d = det_exact(&minor).expect("square minor");
    if (r + c).is_multiple_of(2) {
        d
    } else {
        -d
    }
}
