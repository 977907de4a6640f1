//! Multi-modular rank with an exact certificate.
//!
//! For a rational matrix `A` with `c` columns:
//!
//! * the rank of `A mod p` is a lower bound for the rank over `Q`;
//! * `k` linearly independent rational vectors with `A·x = 0` (checked in exact
//!   integer arithmetic) bound the rank from above by `c − k`.
//!
//! When the two bounds meet, the rank is exact. The kernel vectors are
//! obtained by p-adic lifting (Dixon) of the pivot block found mod `p` and
//! rational reconstruction. If no prime produces a certificate the routine
//! falls back to Bareiss elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{bareiss_rank, RatMatrix, Rational};

/// Certified rank of a rational matrix.
#[derive(Clone, Debug, Serialize)]
pub struct RankCertificate {
    pub rank: usize,
    pub cols: usize,
    pub method: RankMethod,
    /// Prime whose elimination supplied the lower bound (zero for Bareiss).
    pub prime: u64,
    /// Exact kernel basis; `cols − rank` vectors when `method` is modular.
    #[serde(skip)]
    pub kernel: Vec<Vec<Rational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RankMethod {
    ModularWithKernel,
    Bareiss,
}

impl RankCertificate {
    pub fn corank(&self) -> usize {
        self.cols - self.rank
    }
}

const PRIMES_TO_TRY: usize = 4;

pub fn certified_rank(m: &RatMatrix) -> RankCertificate {
    let cols = m.cols();
    let mut a = m.clear_row_denominators();
    a.retain(|r| r.iter().any(|x| !x.is_zero()));
    if a.is_empty() || cols == 0 {
        return RankCertificate {
            rank: 0,
            cols,
            method: RankMethod::ModularWithKernel,
            prime: 0,
            kernel: (0..cols).map(|i| unit(cols, i)).collect(),
        };
    }
    for p in primes_below(1 << 31).take(PRIMES_TO_TRY) {
        if let Some(cert) = try_prime(&a, cols, p) {
            return cert;
        }
    }
    RankCertificate {
        rank: bareiss_rank(a, cols),
        cols,
        method: RankMethod::Bareiss,
        prime: 0,
        kernel: Vec::new(),
    }
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn try_prime(a: &[Vec<BigInt>], cols: usize, p: u64) -> Option<RankCertificate> {
    let reduced: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| mod_p(x, p)).collect()).collect();
    let echelon = echelon_mod_p(reduced, cols, p);
    let rank = echelon.pivot_cols.len();
    let free: Vec<usize> = (0..cols).filter(|c| !echelon.pivot_cols.contains(c)).collect();

    let block: Vec<Vec<BigInt>> = echelon
        .pivot_rows
        .iter()
        .map(|&r| echelon.pivot_cols.iter().map(|&c| a[r][c].clone()).collect())
        .collect();

    let mut kernel = Vec::with_capacity(free.len());
    if !free.is_empty() {
        let solver = DixonSolver::new(&block, p)?;
        for &f in &free {
            let rhs: Vec<BigInt> = echelon.pivot_rows.iter().map(|&r| -&a[r][f]).collect();
            let y = solver.solve(&rhs)?;
            let mut x = vec![Rational::zero(); cols];
            x[f] = Rational::one();
            for (&c, v) in echelon.pivot_cols.iter().zip(y) {
                x[c] = v;
            }
            kernel.push(x);
        }
        if !kernel.iter().all(|x| annihilates(a, x)) {
            return None;
        }
    }
    Some(RankCertificate { rank, cols, method: RankMethod::ModularWithKernel, prime: p, kernel })
}

/// Exact check that `A·x = 0` for every row of `A`.
fn annihilates(a: &[Vec<BigInt>], x: &[Rational]) -> bool {
    let den = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let xi: Vec<BigInt> = x.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    a.iter().all(|row| {
        let mut acc = BigInt::zero();
        for (r, v) in row.iter().zip(&xi) {
            if !r.is_zero() && !v.is_zero() {
                acc += r * v;
            }
        }
        acc.is_zero()
    })
}

pub(crate) fn mod_p(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits in u64")
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &b in &BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primes strictly below `bound`, descending.
pub fn primes_below(bound: u64) -> impl Iterator<Item = u64> {
    (2..bound).rev().filter(|&n| is_prime_u64(n))
}

pub(crate) struct Echelon {
    pub pivot_cols: Vec<usize>,
    /// Original indices of the rows used as pivots, in pivot order.
    pub pivot_rows: Vec<usize>,
}

/// Row echelon form mod `p` (`p < 2³¹`), tracking which original rows carry
/// the pivots. Those rows are linearly independent mod `p`.
pub(crate) fn echelon_mod_p(mut a: Vec<Vec<u64>>, cols: usize, p: u64) -> Echelon {
    let mut order: Vec<usize> = (0..a.len()).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(pr) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        order.swap(r, pr);
        let inv = inv_mod(a[r][c], p);
        for x in a[r][c..].iter_mut() {
            *x = *x * inv % p;
        }
        let (top, rest) = a.split_at_mut(r + 1);
        let prow = &top[r];
        for row in rest.iter_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            let nf = p - f;
            for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                if y != 0 {
                    *x = (*x + nf * y) % p;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let pivot_rows = order[..r].to_vec();
    Echelon { pivot_cols, pivot_rows }
}

/// Rank of an integer matrix reduced mod `p`; a lower bound on its rank
/// over `Q`.
pub fn rank_mod_p(a: &[Vec<BigInt>], cols: usize, p: u64) -> usize {
    let reduced: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| mod_p(x, p)).collect()).collect();
    echelon_mod_p(reduced, cols, p).pivot_cols.len()
}

/// p-adic solver for `B·y = b` with `B` square and invertible mod `p`.
struct DixonSolver<'a> {
    block: &'a [Vec<BigInt>],
    inverse: Vec<Vec<u64>>,
    p: u64,
}

impl<'a> DixonSolver<'a> {
    fn new(block: &'a [Vec<BigInt>], p: u64) -> Option<Self> {
        let reduced: Vec<Vec<u64>> = block.iter().map(|r| r.iter().map(|x| mod_p(x, p)).collect()).collect();
        let inverse = invert_mod_p(reduced, p)?;
        Some(DixonSolver { block, inverse, p })
    }

    /// Lifting steps after which a solution must have been reconstructed:
    /// numerators and denominator are minors of `[B | b]`, bounded by the
    /// product of its row norms (Hadamard).
    fn max_steps(&self, rhs: &[BigInt]) -> usize {
        let log2_h: f64 = self
            .block
            .iter()
            .zip(rhs)
            .map(|(row, b)| {
                let max_bits = row.iter().chain(std::iter::once(b)).map(|x| x.bits()).max().unwrap_or(0);
                max_bits as f64 + 0.5 * ((row.len() + 1) as f64).log2()
            })
            .sum();
        let bits_needed = 2.0 * log2_h + 2.0;
        (bits_needed / (self.p as f64).log2()).ceil() as usize + 2
    }

    fn solve(&self, rhs: &[BigInt]) -> Option<Vec<Rational>> {
        let n = self.block.len();
        let p_big = BigInt::from(self.p);
        let mut residual: Vec<BigInt> = rhs.to_vec();
        let mut acc: Vec<BigInt> = vec![BigInt::zero(); n];
        let mut modulus = BigInt::one();
        let mut step = 0;
        let mut next_try = 4;
        let max_steps = self.max_steps(rhs);
        loop {
            let r_mod: Vec<u64> = residual.iter().map(|x| mod_p(x, self.p)).collect();
            let digit: Vec<u64> = self
                .inverse
                .iter()
                .map(|row| {
                    row.iter().zip(&r_mod).fold(0u64, |s, (&a, &b)| {
                        ((s as u128 + a as u128 * b as u128) % self.p as u128) as u64
                    })
                })
                .collect();
            for i in 0..n {
                let mut bx = BigInt::zero();
                for (bij, &dj) in self.block[i].iter().zip(&digit) {
                    if dj != 0 && !bij.is_zero() {
                        bx += bij * dj;
                    }
                }
                let diff = &residual[i] - bx;
                debug_assert!((&diff % &p_big).is_zero());
                residual[i] = diff / &p_big;
            }
            for (a, &d) in acc.iter_mut().zip(&digit) {
                *a += &modulus * d;
            }
            modulus *= &p_big;
            step += 1;

            if residual.iter().all(Zero::is_zero) {
                return Some(acc.into_iter().map(Rational::from_integer).collect());
            }
            if step >= next_try || step >= max_steps {
                next_try = step + step / 2 + 1;
                if let Some(sol) = reconstruct_all(&acc, &modulus) {
                    if self.satisfies(&sol, rhs) {
                        return Some(sol);
                    }
                }
                if step >= max_steps {
                    return None;
                }
            }
        }
    }

    fn satisfies(&self, y: &[Rational], rhs: &[BigInt]) -> bool {
        let den = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let yi: Vec<BigInt> = y.iter().map(|v| v.numer() * (&den / v.denom())).collect();
        self.block.iter().zip(rhs).all(|(row, b)| {
            let lhs: BigInt = row.iter().zip(&yi).map(|(x, y)| x * y).sum();
            lhs == b * &den
        })
    }
}

fn invert_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> Option<Vec<Vec<u64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut r = vec![0u64; n];
            r[i] = 1;
            r
        })
        .collect();
    for c in 0..n {
        let pr = (c..n).find(|&i| a[i][c] != 0)?;
        a.swap(c, pr);
        inv.swap(c, pr);
        let iv = inv_mod(a[c][c], p);
        for x in a[c].iter_mut() {
            *x = *x * iv % p;
        }
        for x in inv[c].iter_mut() {
            *x = *x * iv % p;
        }
        let prow = a[c].clone();
        let pinv = inv[c].clone();
        for i in 0..n {
            if i == c || a[i][c] == 0 {
                continue;
            }
            let nf = p - a[i][c];
            for (x, &y) in a[i].iter_mut().zip(&prow) {
                *x = (*x + nf * y) % p;
            }
            for (x, &y) in inv[i].iter_mut().zip(&pinv) {
                *x = (*x + nf * y) % p;
            }
        }
    }
    Some(inv)
}

fn reconstruct_all(values: &[BigInt], modulus: &BigInt) -> Option<Vec<Rational>> {
    values.iter().map(|v| rational_reconstruct(v, modulus)).collect()
}

/// Finds `n/d ≡ u (mod m)` with `|n|, d < sqrt(m/2)`, if one exists.
pub fn rational_reconstruct(u: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let r = Rational::new(r1, t1);
    if r.denom().gcd(m) != BigInt::one() {
        return None;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rank_exact, rat};
    use proptest::prelude::*;

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), trial(n), "n = {n}");
        }
        assert!(is_prime_u64(2_147_483_647));
    }

    #[test]
    fn reconstruction_recovers_small_fractions() {
        let m = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        for (n, d) in [(3, 7), (-5, 12), (0, 1), (123456, 789)] {
            let r = rat(n, d);
            let dinv = BigInt::from(d).modinv(&m).unwrap();
            let u = (BigInt::from(n) * dinv).mod_floor(&m);
            assert_eq!(rational_reconstruct(&u, &m), Some(r));
        }
    }

    #[test]
    fn certificate_on_known_corank() {
        let m = RatMatrix::from_i64(3, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let cert = certified_rank(&m);
        assert_eq!(cert.rank, 2);
        assert_eq!(cert.method, RankMethod::ModularWithKernel);
        assert_eq!(cert.kernel.len(), 1);
    }

    proptest! {
        #[test]
        fn certified_rank_matches_bareiss(r in 1usize..=7, c in 1usize..=7, e in proptest::collection::vec(-3i64..=3, 49), d in proptest::collection::vec(1i64..=5, 49), dup in any::<bool>()) {
            let mut entries: Vec<Rational> = e[..r * c].iter().zip(&d).map(|(&x, &y)| rat(x, y)).collect();
            if dup && r >= 2 {
                // force a dependent row
                for j in 0..c {
                    entries[(r - 1) * c + j] = &entries[j] * rat(3, 2);
                }
            }
            let m = RatMatrix::new(r, c, entries).unwrap();
            let cert = certified_rank(&m);
            prop_assert_eq!(cert.rank, rank_exact(&m));
        }
    }
}
