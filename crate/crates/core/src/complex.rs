//! The equivariant cell complex of the Voronoi decomposition.
//!
//! A cell is stored through its vector set `m(σ)`; its vertices are the
//! flattened rank-one forms `v vᵗ`, one per `±` pair. `SL_N(Z)` acts on
//! forms on the right by `q.g = gᵗ q g`, hence on vector sets by `v ↦ gᵗ v`.
//! Starting from the perfect forms, lower-degree orbit representatives are
//! found by enumerating facets and matching barycentres up to isometry;
//! facets with a degenerate barycentre lie on the boundary and are dropped.
//!
//! Differentials are stored in operator form: the matrix of `∂_n` has one
//! row per orbit of degree `n − 1` and one column per orbit of degree `n`,
//! so that `∂_n ∘ ∂_{n+1}` is the matrix product.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactmath::{det_exact, rank_of_rows, IntMatrix, Rational};
use crate::forms::{
    barycentre_form, rank_one_flat, sym_dim, sym_flatten, sym_unflatten, IntVec, MinVecSet, PerfectSeed,
    QuadForm,
};
use crate::groupring::{characteristic_chain, idempotent_diagonal, GroupElem, GroupRingElem, GroupRingMatrix};
use crate::isometry::{all_isometries, match_orbit, stabilizer, DetConstraint};
use crate::polyhedra::{affine_dim, facets, VPolytope};

/// A Voronoi cell with its orientation and signed stabilizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    degree: usize,
    min_vectors: MinVecSet,
    orientation_basis: Vec<IntVec>,
    barycentre: QuadForm,
    stabilizer: Vec<(GroupElem, i8)>,
}

/// Coordinates on which a cell's span projects isomorphically, and the
/// sign of its orientation basis there. Comparing orientations of two
/// bases of the same span then needs one small determinant.
#[derive(Clone, Debug)]
struct Frame {
    coords: Vec<usize>,
    sign: i8,
}

fn det_sign(rows: &[IntVec], coords: &[usize]) -> i8 {
    let k = coords.len();
    let entries: Vec<BigInt> = rows.iter().flat_map(|r| coords.iter().map(|&c| BigInt::from(r[c]))).collect();
    let d = det_exact(&IntMatrix::new(k, k, entries).expect("square minor")).expect("square minor");
    if d.is_zero() {
        0
    } else if d.is_positive() {
        1
    } else {
        -1
    }
}

impl Frame {
    fn new(basis: &[IntVec]) -> Frame {
        let dim = basis[0].len();
        let mut coords: Vec<usize> = Vec::new();
        for c in 0..dim {
            let mut trial = coords.clone();
            trial.push(c);
            let cols: Vec<IntVec> = trial.iter().map(|&k| basis.iter().map(|b| b[k]).collect()).collect();
            if rank_of_rows(&cols) == trial.len() {
                coords = trial;
            }
            if coords.len() == basis.len() {
                break;
            }
        }
        let sign = det_sign(basis, &coords);
        Frame { coords, sign }
    }

    /// `+1` if `other` is a basis of the same span with the same orientation.
    fn compare(&self, other: &[IntVec]) -> Result<i8> {
        match det_sign(other, &self.coords) {
            0 => Err(Error::invariant("orientation", "transported vectors do not form a basis of the span")),
            s => Ok(s * self.sign),
        }
    }
}

fn transport(flat: &IntVec, g: &GroupElem) -> IntVec {
    let s = sym_unflatten(g.n(), flat).expect("flattened symmetric matrix");
    sym_flatten(&s.congruent(g))
}

/// `{gᵗ v : v ∈ vectors}`, sorted.
fn act_on_vectors(vectors: &[IntVec], g: &GroupElem) -> Vec<IntVec> {
    let gt = g.transpose();
    let mut out: Vec<IntVec> = vectors.iter().map(|v| gt.mul_vec(v)).collect();
    out.sort();
    out
}

impl Cell {
    /// The cell spanned by `vectors`; computes degree, orientation and the
    /// signed stabilizer.
    pub fn new(vectors: MinVecSet) -> Result<Cell> {
        let reps = vectors.representatives();
        if reps.is_empty() {
            return Err(Error::Contract("a cell needs at least one vector".into()));
        }
        let mut flats: Vec<IntVec> = reps.iter().map(|v| rank_one_flat(v)).collect();
        flats.sort();
        let degree = affine_dim(&VPolytope::new(flats.clone())?);
        let mut basis: Vec<IntVec> = Vec::new();
        for f in &flats {
            let mut trial = basis.clone();
            trial.push(f.clone());
            if rank_of_rows(&trial) == trial.len() {
                basis = trial;
            }
        }
        if basis.len() != degree + 1 {
            return Err(Error::invariant(
                "orientation",
                format!("span of dimension {} for a cell of degree {degree}", basis.len()),
            ));
        }
        let barycentre = barycentre_form(vectors.vectors())?;
        if !barycentre.is_positive_definite() {
            return Err(Error::Contract("cell barycentre is not positive definite".into()));
        }
        let mut cell = Cell { degree, min_vectors: vectors, orientation_basis: basis, barycentre, stabilizer: Vec::new() };
        let frame = cell.frame();
        let group = stabilizer(&cell.barycentre)?;
        let mut signed = Vec::with_capacity(group.len());
        for g in group.elements() {
            if act_on_vectors(cell.min_vectors.vectors(), g) != cell.min_vectors.vectors() {
                return Err(Error::invariant("stabilizer", format!("{g:?} fixes the barycentre but moves the cell")));
            }
            signed.push((*g, cell.self_sign(&frame, g)?));
        }
        cell.stabilizer = signed;
        Ok(cell)
    }

    fn frame(&self) -> Frame {
        Frame::new(&self.orientation_basis)
    }

    fn self_sign(&self, frame: &Frame, g: &GroupElem) -> Result<i8> {
        let moved: Vec<IntVec> = self.orientation_basis.iter().map(|b| transport(b, g)).collect();
        frame.compare(&moved)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn min_vectors(&self) -> &MinVecSet {
        &self.min_vectors
    }

    pub fn orientation_basis(&self) -> &[IntVec] {
        &self.orientation_basis
    }

    pub fn barycentre(&self) -> &QuadForm {
        &self.barycentre
    }

    pub fn stabilizer(&self) -> &[(GroupElem, i8)] {
        &self.stabilizer
    }

    pub fn stabilizer_order(&self) -> usize {
        self.stabilizer.len()
    }

    /// `v_σ = (1/|G(σ)|)·Σ η(σ,σ,g)·g`.
    pub fn characteristic_chain(&self) -> GroupRingElem {
        characteristic_chain(&self.stabilizer)
    }

    /// `m(σ.g) = {gᵗ v}`.
    pub fn translated_vectors(&self, g: &GroupElem) -> Vec<IntVec> {
        act_on_vectors(self.min_vectors.vectors(), g)
    }
}

/// `η(τ,σ,g)`: compares the orientation of `τ` carried over by `g` with the
/// one `σ` induces on `τ.g`. For a facet, the induced orientation is the one
/// that becomes `σ`'s after appending a vertex of `σ` outside `τ.g`.
pub fn eta_sign(tau: &Cell, sigma: &Cell, g: &GroupElem) -> Result<i8> {
    eta_with_frame(tau, sigma, &sigma.frame(), g, None)
}

/// `η(τ,σ,g)` for a facet, appending the given vector of `m(σ)` instead of
/// the first one outside `τ.g`. The result does not depend on the choice.
pub fn eta_sign_appending(tau: &Cell, sigma: &Cell, g: &GroupElem, extra: &[i64]) -> Result<i8> {
    if tau.degree + 1 != sigma.degree {
        return Err(Error::Contract("an appended vector needs τ of codimension one in σ".into()));
    }
    eta_with_frame(tau, sigma, &sigma.frame(), g, Some(extra))
}

fn eta_with_frame(tau: &Cell, sigma: &Cell, frame: &Frame, g: &GroupElem, extra: Option<&[i64]>) -> Result<i8> {
    let image = tau.translated_vectors(g);
    let mut moved: Vec<IntVec> = tau.orientation_basis.iter().map(|b| transport(b, g)).collect();
    if tau.degree == sigma.degree {
        if image != sigma.min_vectors.vectors() {
            return Err(Error::Contract("g does not carry τ onto σ".into()));
        }
    } else if tau.degree + 1 == sigma.degree && image.iter().all(|v| sigma.min_vectors.contains(v)) {
        let outside = |v: &[i64]| image.binary_search(&v.to_vec()).is_err();
        let extra = match extra {
            Some(v) if sigma.min_vectors.contains(v) && outside(v) => v.to_vec(),
            Some(_) => return Err(Error::Contract("appended vector must lie in m(σ) but not in m(τ.g)".into())),
            None => sigma
                .min_vectors
                .representatives()
                .into_iter()
                .find(|v| outside(v))
                .expect("a facet misses some vertex"),
        };
        moved.push(rank_one_flat(&extra));
    } else {
        return Err(Error::Contract("g does not carry τ onto a facet of σ".into()));
    }
    frame.compare(&moved)
}

/// Orbit representatives per degree and the differentials between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellComplex {
    rank: usize,
    orbits: BTreeMap<usize, Vec<Cell>>,
    differentials: BTreeMap<usize, GroupRingMatrix>,
}

/// One facet of one representative, with its orbit and transport data.
struct Incidence {
    col: usize,
    row: usize,
    terms: GroupRingElem,
}

impl CellComplex {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn top_degree(&self) -> usize {
        sym_dim(self.rank) - 1
    }

    /// Degrees that carry at least one orbit, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        self.orbits.iter().filter(|(_, v)| !v.is_empty()).map(|(d, _)| *d).collect()
    }

    pub fn orbits(&self, n: usize) -> &[Cell] {
        self.orbits.get(&n).map_or(&[], |v| v.as_slice())
    }

    pub fn orbit_counts(&self) -> BTreeMap<usize, usize> {
        self.orbits.iter().map(|(d, v)| (*d, v.len())).collect()
    }

    /// The matrix of `∂_n`, `|O_{n−1}| × |O_n|`; zero outside the stored range.
    pub fn differential(&self, n: usize) -> GroupRingMatrix {
        match self.differentials.get(&n) {
            Some(m) => m.clone(),
            None => GroupRingMatrix::zeros(if n == 0 { 0 } else { self.orbits(n - 1).len() }, self.orbits(n).len()),
        }
    }

    /// The same complex with the sign of one facet incidence reversed: in
    /// entry `(row, col)` of `∂_n`, the coefficients on the coset
    /// `G(τ)·g₀` of the smallest term `g₀` are negated. Used as a negative
    /// control for the chain condition.
    pub fn with_flipped_facet(&self, n: usize, row: usize, col: usize) -> Result<CellComplex> {
        let mut out = self.clone();
        let tau = self
            .orbits(n.wrapping_sub(1))
            .get(row)
            .ok_or_else(|| Error::Contract(format!("no orbit {row} in degree {}", n.wrapping_sub(1))))?
            .clone();
        let m = out
            .differentials
            .get_mut(&n)
            .ok_or_else(|| Error::Contract(format!("no differential in degree {n}")))?;
        if col >= m.cols() {
            return Err(Error::Contract(format!("no orbit {col} in degree {n}")));
        }
        let entry = m.get(row, col).clone();
        let g0 = *entry.support().next().ok_or_else(|| Error::Contract("entry is zero".into()))?;
        let coset: Vec<GroupElem> = tau.stabilizer.iter().map(|(h, _)| h.mul(&g0)).collect();
        let flipped = GroupRingElem::from_terms(entry.terms().map(|(g, c)| {
            if coset.contains(g) {
                (*g, -c.clone())
            } else {
                (*g, c.clone())
            }
        }));
        m.set(row, col, flipped);
        Ok(out)
    }

    /// `diag(v)·∂_n·∂_{n+1}·diag(v)`, which vanishes on a valid complex.
    pub fn chain_defect(&self, n: usize) -> Result<GroupRingMatrix> {
        let left = idempotent_diagonal(self, n.wrapping_sub(1));
        let right = idempotent_diagonal(self, n + 1);
        let comp = self.differential(n).mul(&self.differential(n + 1))?;
        left.mul(&comp)?.mul(&right)
    }
}

fn vectors_of(reps: &[IntVec]) -> Vec<IntVec> {
    let mut all: Vec<IntVec> = reps.iter().flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()]).collect();
    all.sort();
    all
}

/// The interior facets of a cell, as sorted `±`-closed vector sets, in the
/// order returned by facet enumeration.
fn interior_facets(cell: &Cell) -> Result<Vec<(Vec<IntVec>, QuadForm)>> {
    let reps = cell.min_vectors.representatives();
    let poly = VPolytope::new(reps.iter().map(|v| rank_one_flat(v)).collect())?;
    let mut out = Vec::new();
    for f in facets(&poly)? {
        let sub: Vec<IntVec> = f.vertex_indices.iter().map(|&i| reps[i].clone()).collect();
        let vectors = vectors_of(&sub);
        let bary = barycentre_form(&vectors)?;
        if bary.is_positive_definite() {
            out.push((vectors, bary));
        }
    }
    Ok(out)
}

/// Builds orbit representatives top-down from the perfect forms, then the
/// differentials.
pub fn build_complex(rank: usize, seeds: &[PerfectSeed]) -> Result<CellComplex> {
    if !(2..=4).contains(&rank) {
        return Err(Error::Contract(format!("rank {rank} is outside 2..=4")));
    }
    let top = sym_dim(rank) - 1;
    let mut orbits: BTreeMap<usize, Vec<Cell>> = BTreeMap::new();
    let mut top_cells: Vec<Cell> = Vec::new();
    for seed in seeds {
        if seed.form.rank() != rank {
            return Err(Error::Dimension(format!("seed {} has rank {}", seed.name, seed.form.rank())));
        }
        let mv = crate::forms::minimal_vectors(&seed.form)?;
        let cell = Cell::new(mv)?;
        if cell.degree != top {
            return Err(Error::invariant("perfectness", format!("seed {} spans a cell of degree {}", seed.name, cell.degree)));
        }
        let catalog: Vec<QuadForm> = top_cells.iter().map(|c| c.barycentre).collect();
        if match_orbit(&cell.barycentre, &catalog)?.is_none() {
            top_cells.push(cell);
        }
    }
    orbits.insert(top, top_cells);

    let mut degree = top;
    while degree > 0 {
        let current = &orbits[&degree];
        let found: Vec<Vec<(Vec<IntVec>, QuadForm)>> =
            current.par_iter().map(interior_facets).collect::<Result<_>>()?;
        let mut lower: Vec<Cell> = Vec::new();
        for (vectors, bary) in found.into_iter().flatten() {
            let catalog: Vec<QuadForm> = lower.iter().map(|c| c.barycentre).collect();
            if match_orbit(&bary, &catalog)?.is_none() {
                let min_value = current[0].min_vectors.min_value();
                lower.push(Cell::new(MinVecSet::new(vectors, min_value)?)?);
            }
        }
        if lower.is_empty() {
            break;
        }
        degree -= 1;
        orbits.insert(degree, lower);
    }

    let mut complex = CellComplex { rank, orbits, differentials: BTreeMap::new() };
    let degrees = complex.degrees();
    for &n in &degrees {
        if n > 0 && !complex.orbits(n - 1).is_empty() {
            let d = assemble_differential(&complex, n)?;
            complex.differentials.insert(n, d);
        }
    }
    Ok(complex)
}

fn assemble_differential(c: &CellComplex, n: usize) -> Result<GroupRingMatrix> {
    let sources = c.orbits(n);
    let targets = c.orbits(n - 1);
    let catalog: Vec<QuadForm> = targets.iter().map(|t| t.barycentre).collect();
    let per_source: Vec<Vec<Incidence>> = sources
        .par_iter()
        .enumerate()
        .map(|(col, sigma)| {
            let frame = sigma.frame();
            let mut out = Vec::new();
            for (vectors, bary) in interior_facets(sigma)? {
                let (row, _) = match_orbit(&bary, &catalog)?
                    .ok_or_else(|| Error::invariant("orbit closure", "interior facet outside the orbit catalog"))?;
                let tau = &targets[row];
                let carriers = all_isometries(&tau.barycentre, &bary, DetConstraint::Special)?;
                if carriers.len() != tau.stabilizer_order() {
                    return Err(Error::invariant("double coset", "carrier set is not a coset of the stabilizer"));
                }
                let weight = Rational::new(1.into(), tau.stabilizer_order().into());
                let mut terms = Vec::with_capacity(carriers.len());
                for g in carriers.elements() {
                    if tau.translated_vectors(g) != vectors {
                        return Err(Error::invariant("equivariance", "barycentre match does not carry the cell"));
                    }
                    let eta = eta_with_frame(tau, sigma, &frame, g, None)?;
                    terms.push((*g, &weight * Rational::from_integer(eta.into())));
                }
                out.push(Incidence { col, row, terms: GroupRingElem::from_terms(terms) });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut m = GroupRingMatrix::zeros(targets.len(), sources.len());
    for inc in per_source.into_iter().flatten() {
        let sum = m.get(inc.row, inc.col).add(&inc.terms);
        m.set(inc.row, inc.col, sum);
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct SignedElem {
    g: GroupElem,
    sign: i8,
}

#[derive(Serialize, Deserialize)]
struct CellRecord {
    degree: usize,
    min_value: i64,
    min_vectors: Vec<IntVec>,
    orientation_basis: Vec<IntVec>,
    stabilizer: Vec<SignedElem>,
    barycentre: QuadForm,
}

#[derive(Serialize, Deserialize)]
struct DifferentialRecord {
    degree: usize,
    #[serde(flatten)]
    matrix: GroupRingMatrix,
}

#[derive(Serialize, Deserialize)]
struct ComplexRecord {
    #[serde(rename = "N")]
    rank: usize,
    orbits: Vec<CellRecord>,
    differentials: Vec<DifferentialRecord>,
}

impl Serialize for CellComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let orbits = self
            .orbits
            .iter()
            .rev()
            .flat_map(|(_, cells)| cells.iter())
            .map(|c| CellRecord {
                degree: c.degree,
                min_value: c.min_vectors.min_value(),
                min_vectors: c.min_vectors.vectors().to_vec(),
                orientation_basis: c.orientation_basis.clone(),
                stabilizer: c.stabilizer.iter().map(|(g, sign)| SignedElem { g: *g, sign: *sign }).collect(),
                barycentre: c.barycentre,
            })
            .collect();
        let differentials = self
            .differentials
            .iter()
            .map(|(d, m)| DifferentialRecord { degree: *d, matrix: m.clone() })
            .collect();
        ComplexRecord { rank: self.rank, orbits, differentials }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = ComplexRecord::deserialize(d)?;
        let mut orbits: BTreeMap<usize, Vec<Cell>> = BTreeMap::new();
        for c in rec.orbits {
            let min_vectors = MinVecSet::new(c.min_vectors, c.min_value).map_err(D::Error::custom)?;
            if barycentre_form(min_vectors.vectors()).map_err(D::Error::custom)? != c.barycentre {
                return Err(D::Error::custom("stored barycentre does not match the vectors"));
            }
            if c.stabilizer.iter().any(|e| e.g.det() != 1 || e.sign.abs() != 1) {
                return Err(D::Error::custom("malformed stabilizer entry"));
            }
            let cell = Cell {
                degree: c.degree,
                min_vectors,
                orientation_basis: c.orientation_basis,
                barycentre: c.barycentre,
                stabilizer: c.stabilizer.into_iter().map(|e| (e.g, e.sign)).collect(),
            };
            orbits.entry(c.degree).or_default().push(cell);
        }
        let mut differentials = BTreeMap::new();
        for r in rec.differentials {
            let rows = if r.degree == 0 { 0 } else { orbits.get(&(r.degree - 1)).map_or(0, |v| v.len()) };
            let cols = orbits.get(&r.degree).map_or(0, |v| v.len());
            if (r.matrix.rows(), r.matrix.cols()) != (rows, cols) {
                return Err(D::Error::custom(format!("differential of degree {} has the wrong shape", r.degree)));
            }
            differentials.insert(r.degree, r.matrix);
        }
        Ok(CellComplex { rank: rec.rank, orbits, differentials })
    }
}
