//! Pipeline orchestration: build or load the complex, assemble the modified
//! Laplacian in degree `N(N−1)/2`, evaluate it under the coefficient
//! representation and certify its corank. Also runs the invariant suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::complex::{build_complex, eta_sign, CellComplex};
use crate::error::{Error, Result};
use crate::exactmath::{certified_rank, rat_int, RankMethod, RatMatrix};
use crate::forms::{is_perfect, perfect_form_table};
use crate::groupring::{idempotent_diagonal, laplacian, laplacian_prime, GroupRingElem, GroupRingMatrix};
use crate::reps::{coefficient_rep, invariant_vector_dim, representing_matrix, FiniteGroupTable, OrthogonalRep};

/// Bumped whenever a change would alter cached artifacts.
const FORMAT_VERSION: &str = "voronoi-cache-1";

/// Sampled pairs for the representation homomorphism check.
pub const HOMOMORPHISM_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyCertificate {
    #[serde(rename = "N")]
    pub rank: usize,
    /// Cohomological degree `N − 1` the corank is reported for.
    pub cohomological_degree: usize,
    /// Degree of the Laplacian, `N(N−1)/2` for the headline certificate.
    pub homological_degree: usize,
    pub representation: String,
    pub matrix_size: usize,
    pub matrix_rank: usize,
    pub corank: usize,
    pub method: RankMethod,
    pub prime: u64,
    /// Corank of the stacked first-order operator, computed independently.
    pub cross_check_corank: usize,
    #[serde(skip)]
    pub wall_clock_ms: u128,
}

impl CohomologyCertificate {
    pub fn statement(&self) -> String {
        if self.homological_degree == self.rank * (self.rank - 1) / 2 && self.rank > 2 {
            format!(
                "dim H^{}(SL_{}(Z), {}) = {}",
                self.cohomological_degree, self.rank, self.representation, self.corank
            )
        } else {
            format!(
                "corank of the degree-{} Laplacian under {} = {}",
                self.homological_degree, self.representation, self.corank
            )
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_result(name: &'static str, r: Result<String>) -> Self {
        match r {
            Ok(detail) => CheckResult { name, passed: true, detail },
            Err(e) => CheckResult { name, passed: false, detail: e.to_string() },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    #[serde(rename = "N")]
    pub rank: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn check_rank(n: usize) -> Result<()> {
    if !(2..=4).contains(&n) {
        return Err(Error::Contract(format!("N must be 2, 3 or 4, got {n}")));
    }
    Ok(())
}

pub fn target_degree(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Builds artifacts on demand and, when a cache directory is set, stores
/// them keyed by a hash of everything they depend on.
#[derive(Clone, Debug, Default)]
pub struct Engine {
    cache_dir: Option<PathBuf>,
}

impl Engine {
    pub fn new(cache_dir: Option<PathBuf>) -> Self {
        Engine { cache_dir }
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    fn complex_key(n: usize) -> Result<String> {
        let seeds: Vec<_> = perfect_form_table(n)?.into_iter().map(|s| (s.name, s.form)).collect();
        let mut h = Sha256::new();
        h.update(FORMAT_VERSION.as_bytes());
        h.update(serde_json::to_vec(&(n, seeds))?);
        Ok(hex::encode(h.finalize())[..16].to_string())
    }

    fn cached<T: Serialize + DeserializeOwned>(&self, name: &str, make: impl FnOnce() -> Result<T>) -> Result<T> {
        let Some(dir) = &self.cache_dir else { return make() };
        let path = dir.join(name);
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(v) = serde_json::from_slice(&bytes) {
                return Ok(v);
            }
        }
        let v = make()?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(&v)?)?;
        fs::rename(&tmp, &path)?;
        Ok(v)
    }

    pub fn complex(&self, n: usize) -> Result<CellComplex> {
        check_rank(n)?;
        let key = Self::complex_key(n)?;
        self.cached(&format!("complex-N{n}-{key}.json"), || build_complex(n, &perfect_form_table(n)?))
    }

    /// `Δ′_degree`, cached next to the complex it was computed from.
    pub fn laplacian_prime(&self, n: usize, degree: usize) -> Result<GroupRingMatrix> {
        let c = self.complex(n)?;
        check_degree(&c, degree)?;
        let key = Self::complex_key(n)?;
        self.cached(&format!("laplacian-N{n}-d{degree}-{key}.json"), || laplacian_prime(&c, degree))
    }

    /// The headline certificate: degree `N(N−1)/2`.
    pub fn certify(&self, n: usize) -> Result<CohomologyCertificate> {
        self.certify_degree(n, target_degree(n))
    }

    pub fn certify_degree(&self, n: usize, degree: usize) -> Result<CohomologyCertificate> {
        let start = Instant::now();
        let c = self.complex(n)?;
        check_degree(&c, degree)?;
        let xi = self.laplacian_prime(n, degree)?;
        let (table, rep) = coefficient_rep(n)?;
        let m = representing_matrix(&xi, &rep, &table)?;
        if m.transpose() != m {
            return Err(Error::invariant("evaluated symmetry", "π(Δ′) is not symmetric"));
        }
        let cert = certified_rank(&m);
        let cross = stacked_operator(&c, degree, &rep, &table)?;
        let cross_corank = certified_rank(&cross).corank();
        if cross_corank != cert.corank() {
            return Err(Error::invariant(
                "cross-method corank",
                format!("Laplacian corank {} but stacked operator corank {cross_corank}", cert.corank()),
            ));
        }
        Ok(CohomologyCertificate {
            rank: n,
            cohomological_degree: n - 1,
            homological_degree: degree,
            representation: representation_name(n),
            matrix_size: m.rows(),
            matrix_rank: cert.rank,
            corank: cert.corank(),
            method: cert.method,
            prime: cert.prime,
            cross_check_corank: cross_corank,
            wall_clock_ms: start.elapsed().as_millis(),
        })
    }

    pub fn verify_all(&self, n: usize) -> Result<VerifyReport> {
        check_rank(n)?;
        let mut checks = vec![CheckResult::from_result("perfectness", check_perfectness(n))];
        let c = self.complex(n)?;
        checks.extend(verify_complex(&c));
        let (table, rep) = coefficient_rep(n)?;
        checks.extend(verify_rep(n, &table, &rep));
        Ok(VerifyReport { rank: n, checks })
    }
}

fn check_degree(c: &CellComplex, degree: usize) -> Result<()> {
    if c.orbits(degree).is_empty() {
        return Err(Error::Contract(format!("no interior cells in degree {degree} for N = {}", c.rank())));
    }
    Ok(())
}

pub fn representation_name(n: usize) -> String {
    match n {
        2 => "trivial".into(),
        _ => format!("pi_{n}"),
    }
}

/// `[π(∂_n); π(∂_{n+1}*); π(diag(1 − v))]`, whose kernel is that of `π(Δ′_n)`.
fn stacked_operator(c: &CellComplex, n: usize, rep: &OrthogonalRep, table: &FiniteGroupTable) -> Result<RatMatrix> {
    let one = GroupRingElem::one(c.rank());
    let complement =
        GroupRingMatrix::diagonal(c.orbits(n).iter().map(|cell| one.sub(&cell.characteristic_chain())).collect());
    let parts = [c.differential(n), c.differential(n + 1).star(), complement]
        .iter()
        .map(|m| representing_matrix(m, rep, table))
        .collect::<Result<Vec<_>>>()?;
    RatMatrix::vstack(&parts)
}

fn check_perfectness(n: usize) -> Result<String> {
    let seeds = perfect_form_table(n)?;
    for s in &seeds {
        if !is_perfect(&s.form)? {
            return Err(Error::invariant("perfectness", format!("{} is not perfect", s.name)));
        }
    }
    Ok(format!("{} seed(s) perfect", seeds.len()))
}

fn check_chain(c: &CellComplex) -> Result<String> {
    for n in c.degrees() {
        if !c.chain_defect(n)?.is_zero() {
            return Err(Error::invariant("chain condition", format!("v·∂_{n}∂_{}·v ≠ 0", n + 1)));
        }
    }
    Ok(format!("degrees {:?}", c.degrees()))
}

fn check_idempotents(c: &CellComplex) -> Result<String> {
    let mut count = 0;
    for n in c.degrees() {
        for (i, cell) in c.orbits(n).iter().enumerate() {
            let v = cell.characteristic_chain();
            if v.multiply(&v) != v || v.star() != v {
                return Err(Error::invariant("idempotents", format!("v_σ for orbit {i} of degree {n}")));
            }
            for (h, s) in cell.stabilizer() {
                let hv = GroupRingElem::monomial(*h, rat_int(1)).multiply(&v);
                let vh = v.multiply(&GroupRingElem::monomial(*h, rat_int(1)));
                let expected = v.scale(&rat_int(*s as i64));
                if hv != expected || vh != expected {
                    return Err(Error::invariant("idempotents", format!("h·v_σ ≠ η·v_σ in degree {n}")));
                }
            }
            count += 1;
        }
    }
    Ok(format!("{count} orbit(s)"))
}

fn check_absorption(c: &CellComplex) -> Result<String> {
    for n in c.degrees() {
        let d = c.differential(n);
        let left = idempotent_diagonal(c, n.wrapping_sub(1));
        let right = idempotent_diagonal(c, n);
        if left.mul(&d)?.mul(&right)? != d {
            return Err(Error::invariant("diagonal absorption", format!("diag(v)·∂_{n}·diag(v) ≠ ∂_{n}")));
        }
    }
    Ok("all differentials".into())
}

fn check_eta_characters(c: &CellComplex) -> Result<String> {
    for n in c.degrees() {
        for cell in c.orbits(n) {
            let signs: std::collections::BTreeMap<_, _> = cell.stabilizer().iter().cloned().collect();
            for (g, sg) in cell.stabilizer() {
                if eta_sign(cell, cell, g)? != *sg {
                    return Err(Error::invariant("orientation character", "stored sign disagrees with η"));
                }
                for (h, sh) in cell.stabilizer() {
                    if signs.get(&g.mul(h)) != Some(&(sg * sh)) {
                        return Err(Error::invariant("orientation character", format!("degree {n}")));
                    }
                }
            }
        }
    }
    Ok("η(σ,σ,·) multiplicative".into())
}

fn check_symmetry(c: &CellComplex) -> Result<String> {
    for n in c.degrees() {
        let delta = laplacian(c, n)?;
        let complement = idempotent_diagonal(c, n);
        if !delta.is_star_symmetric() || !complement.is_star_symmetric() {
            return Err(Error::invariant("Laplacian symmetry", format!("degree {n}")));
        }
    }
    Ok(format!("degrees {:?}", c.degrees()))
}

/// The complex-level invariant suite.
pub fn verify_complex(c: &CellComplex) -> Vec<CheckResult> {
    vec![
        CheckResult::from_result("chain condition", check_chain(c)),
        CheckResult::from_result("idempotents", check_idempotents(c)),
        CheckResult::from_result("diagonal absorption", check_absorption(c)),
        CheckResult::from_result("orientation character", check_eta_characters(c)),
        CheckResult::from_result("Laplacian symmetry", check_symmetry(c)),
    ]
}

/// The representation-level invariant suite. The invariant-vector check
/// applies to the nontrivial coefficient representations only.
pub fn verify_rep(n: usize, table: &FiniteGroupTable, rep: &OrthogonalRep) -> Vec<CheckResult> {
    let mut out = vec![
        CheckResult::from_result(
            "rep orthogonality",
            rep.check_orthogonal(table).map(|_| format!("{} elements, dim {}", table.order(), rep.dim())),
        ),
        CheckResult::from_result(
            "rep homomorphism",
            rep.check_homomorphism(table, HOMOMORPHISM_SAMPLES, 0x5eed).map(|k| format!("{k} pairs")),
        ),
    ];
    if n > 2 {
        let dim = invariant_vector_dim(rep, &table.elementary_generators());
        out.push(CheckResult::from_result(
            "invariant vectors",
            if dim == 0 {
                Ok("none".into())
            } else {
                Err(Error::invariant("invariant vectors", format!("{dim}-dimensional")))
            },
        ));
    }
    out
}
