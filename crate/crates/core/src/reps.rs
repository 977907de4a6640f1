//! Finite quotients `SL_N(Z/p)`, the explicit subgroups and quotient
//! representations used as coefficients, induction, and evaluation of
//! group-ring matrices.
//!
//! Group elements are numbered by their position in the sorted list of
//! matrix codes (entries read row-major as base-`p` digits). Induced
//! representations are monomial: for each element and each column block
//! we keep the row block it lands in and which small orthogonal block sits
//! there, rather than a dense matrix.

use std::collections::VecDeque;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmath::{certified_rank, RatMatrix, Rational};
use crate::groupring::{GroupElem, GroupRingMatrix};

/// A square matrix over `Z/p`, entries row-major.
pub type ModMat = Vec<u8>;

/// `q^{N(N−1)/2}·∏_{i=2}^{N}(q^i − 1)`.
pub fn sl_order(n: usize, q: u64) -> u64 {
    let mut order = q.pow((n * (n - 1) / 2) as u32);
    for i in 2..=n {
        order *= q.pow(i as u32) - 1;
    }
    order
}

#[derive(Clone, Debug)]
pub struct FiniteGroupTable {
    n: usize,
    p: u8,
    codes: Vec<u32>,
    index: Vec<u32>,
    inverses: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl FiniteGroupTable {
    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u8 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.codes.len()
    }

    fn encode(&self, m: &[u8]) -> u32 {
        m.iter().fold(0u32, |acc, &x| acc * self.p as u32 + x as u32)
    }

    fn decode(&self, code: u32) -> ModMat {
        let mut out = vec![0u8; self.n * self.n];
        let mut c = code;
        for slot in out.iter_mut().rev() {
            *slot = (c % self.p as u32) as u8;
            c /= self.p as u32;
        }
        out
    }

    pub fn matrix(&self, idx: u32) -> ModMat {
        self.decode(self.codes[idx as usize])
    }

    pub fn index_of(&self, m: &[u8]) -> Option<u32> {
        if m.len() != self.n * self.n || m.iter().any(|&x| x >= self.p) {
            return None;
        }
        match self.index[self.encode(m) as usize] {
            ABSENT => None,
            i => Some(i),
        }
    }

    fn mul_matrices(&self, a: &[u8], b: &[u8]) -> ModMat {
        let n = self.n;
        let p = self.p as u32;
        let mut out = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: u32 = (0..n).map(|k| a[i * n + k] as u32 * b[k * n + j] as u32).sum();
                out[i * n + j] = (s % p) as u8;
            }
        }
        out
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let prod = self.mul_matrices(&self.matrix(a), &self.matrix(b));
        self.index_of(&prod).expect("table is closed under products")
    }

    pub fn inverse(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    pub fn identity(&self) -> u32 {
        let mut id = vec![0u8; self.n * self.n];
        for i in 0..self.n {
            id[i * self.n + i] = 1;
        }
        self.index_of(&id).expect("identity is in the group")
    }

    /// Images of the elementary matrices `I + E_ij`, `i ≠ j`.
    pub fn elementary_generators(&self) -> Vec<u32> {
        elementary_matrices(self.n).iter().map(|m| self.index_of(m).expect("elementary matrices have det 1")).collect()
    }

    /// Entrywise reduction of an integer matrix.
    pub fn mod_reduce(&self, g: &GroupElem) -> Result<u32> {
        if g.n() != self.n {
            return Err(Error::Dimension(format!("rank-{} element for a rank-{} group", g.n(), self.n)));
        }
        let m: ModMat = g.flat().iter().map(|&x| x.rem_euclid(self.p as i64) as u8).collect();
        self.index_of(&m)
            .ok_or_else(|| Error::invariant("modular reduction", format!("{g:?} does not reduce into SL_{}", self.n)))
    }
}

fn elementary_matrices(n: usize) -> Vec<ModMat> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut m = vec![0u8; n * n];
                for k in 0..n {
                    m[k * n + k] = 1;
                }
                m[i * n + j] = 1;
                out.push(m);
            }
        }
    }
    out
}

/// All of `SL_n(Z/p)`, by closure from the elementary matrices.
pub fn enumerate_finite_group(n: usize, p: u8) -> Result<FiniteGroupTable> {
    if !(2..=4).contains(&n) || !matches!(p, 2 | 3 | 5 | 7) {
        return Err(Error::Contract(format!("SL_{n}(Z/{p}) is not supported")));
    }
    let expected = sl_order(n, p as u64) as usize;
    let space = (p as usize).pow((n * n) as u32);
    let mut table = FiniteGroupTable { n, p, codes: Vec::new(), index: vec![ABSENT; space], inverses: Vec::new() };
    let gens = elementary_matrices(n);
    let mut id = vec![0u8; n * n];
    for i in 0..n {
        id[i * n + i] = 1;
    }
    let mut seen = vec![false; space];
    let mut queue = VecDeque::from([id.clone()]);
    seen[table.encode(&id) as usize] = true;
    let mut found = Vec::new();
    while let Some(m) = queue.pop_front() {
        found.push(table.encode(&m));
        if found.len() > expected {
            return Err(Error::invariant("group order", format!("closure exceeds |SL_{n}(Z/{p})| = {expected}")));
        }
        for g in &gens {
            let next = table.mul_matrices(&m, g);
            let c = table.encode(&next) as usize;
            if !seen[c] {
                seen[c] = true;
                queue.push_back(next);
            }
        }
    }
    found.sort_unstable();
    for (i, &c) in found.iter().enumerate() {
        table.index[c as usize] = i as u32;
    }
    table.codes = found;
    let identity = table.identity();
    table.inverses = (0..table.order() as u32)
        .map(|g| {
            let mut prev = identity;
            let mut pow = g;
            while pow != identity {
                prev = pow;
                pow = table.mul(pow, g);
            }
            prev
        })
        .collect();
    Ok(table)
}

/// A subgroup given by generators, with its sorted element list.
#[derive(Clone, Debug)]
pub struct Subgroup {
    generators: Vec<u32>,
    elements: Vec<u32>,
}

impl Subgroup {
    pub fn generated(table: &FiniteGroupTable, generators: &[u32]) -> Subgroup {
        let id = table.identity();
        let mut elements = vec![id];
        let mut member = FxHashMap::default();
        member.insert(id, ());
        let mut frontier = vec![id];
        while let Some(h) = frontier.pop() {
            for &g in generators {
                let x = table.mul(h, g);
                if member.insert(x, ()).is_none() {
                    elements.push(x);
                    frontier.push(x);
                }
            }
        }
        elements.sort_unstable();
        Subgroup { generators: generators.to_vec(), elements }
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: u32) -> bool {
        self.elements.binary_search(&g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&g| other.contains(g))
    }

    /// `g·H·g⁻¹ = H` for every generator `g` of `ambient`.
    pub fn is_normal_in(&self, table: &FiniteGroupTable, ambient: &Subgroup) -> bool {
        self.is_subgroup_of(ambient)
            && ambient.generators.iter().all(|&g| {
                let gi = table.inverse(g);
                self.generators.iter().all(|&h| self.contains(table.mul(table.mul(g, h), gi)))
            })
    }
}

/// A small dense integer matrix, used for the blocks of monomial reps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    d: usize,
    entries: Vec<i64>,
}

impl Block {
    pub fn identity(d: usize) -> Block {
        let mut entries = vec![0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        Block { d, entries }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Block {
        Block { d: rows.len(), entries: rows.concat() }
    }

    /// `M(σ)e_j = e_{σ(j)}` for a permutation given as images of `0..d`.
    pub fn permutation(images: &[usize]) -> Block {
        let d = images.len();
        let mut entries = vec![0; d * d];
        for (j, &i) in images.iter().enumerate() {
            entries[i * d + j] = 1;
        }
        Block { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.d + j]
    }

    pub fn neg(&self) -> Block {
        Block { d: self.d, entries: self.entries.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, other: &Block) -> Block {
        let d = self.d;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = (0..d).map(|k| self.get(i, k) * other.get(k, j)).sum();
            }
        }
        Block { d, entries }
    }

    pub fn transpose(&self) -> Block {
        let d = self.d;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j);
            }
        }
        Block { d, entries }
    }

    pub fn is_orthogonal(&self) -> bool {
        self.transpose().mul(self) == Block::identity(self.d)
    }
}

/// A representation of a subgroup that factors through a quotient by a
/// normal subgroup: each coset of `kernel` carries one block.
#[derive(Clone, Debug)]
pub struct QuotientRep {
    pub subgroup: Subgroup,
    pub kernel: Subgroup,
    coset_of: FxHashMap<u32, usize>,
    blocks: Vec<Block>,
}

impl QuotientRep {
    /// `representatives[i]·kernel ↦ blocks[i]`; the cosets must partition
    /// the subgroup.
    pub fn new(
        table: &FiniteGroupTable,
        subgroup: Subgroup,
        kernel: Subgroup,
        representatives: &[u32],
        blocks: Vec<Block>,
    ) -> Result<QuotientRep> {
        let mut coset_of = FxHashMap::default();
        for (i, &r) in representatives.iter().enumerate() {
            for &k in kernel.elements() {
                if coset_of.insert(table.mul(r, k), i).is_some() {
                    return Err(Error::Data(format!("coset representative {i} repeats a coset")));
                }
            }
        }
        if coset_of.len() != subgroup.order() || subgroup.elements().iter().any(|g| !coset_of.contains_key(g)) {
            return Err(Error::Data("cosets do not partition the subgroup".into()));
        }
        Ok(QuotientRep { subgroup, kernel, coset_of, blocks })
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].dim()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block index of `h` in the subgroup.
    pub fn block_of(&self, h: u32) -> Option<usize> {
        self.coset_of.get(&h).copied()
    }

    /// The whole group with the trivial one-dimensional representation.
    pub fn trivial(table: &FiniteGroupTable) -> QuotientRep {
        let all = Subgroup { generators: table.elementary_generators(), elements: (0..table.order() as u32).collect() };
        let coset_of = all.elements.iter().map(|&g| (g, 0)).collect();
        QuotientRep { subgroup: all.clone(), kernel: all, coset_of, blocks: vec![Block::identity(1)] }
    }
}

fn parse_rows(rows: &[&[u8]]) -> ModMat {
    rows.concat()
}

fn lookup(table: &FiniteGroupTable, name: &str, rows: &[&[u8]]) -> Result<u32> {
    table
        .index_of(&parse_rows(rows))
        .ok_or_else(|| Error::Data(format!("generator {name} is not in SL_{}(Z/{})", table.rank(), table.modulus())))
}

/// The coefficient data for rank 3 (mod 3) and rank 4 (mod 2): the subgroup
/// `H_N`, its normal subgroup `H`, and `ρ` on the quotient, lifted to `H_N`.
/// Orders and quotient relations are checked on construction.
pub fn build_rho(table: &FiniteGroupTable) -> Result<QuotientRep> {
    match (table.rank(), table.modulus()) {
        (3, 3) => build_rho_3(table),
        (4, 2) => build_rho_4(table),
        (n, p) => Err(Error::Contract(format!("no coefficient data for SL_{n}(Z/{p})"))),
    }
}

fn check_order(name: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Data(format!("|{name}| = {got}, expected {expected}")));
    }
    Ok(())
}

fn build_rho_3(table: &FiniteGroupTable) -> Result<QuotientRep> {
    let s = lookup(table, "s", &[&[0, 0, 1], &[0, 2, 0], &[1, 1, 0]])?;
    let t = lookup(table, "t", &[&[1, 2, 0], &[0, 2, 0], &[1, 1, 2]])?;
    // printed identical to s
    let a = lookup(table, "a", &[&[0, 0, 1], &[0, 2, 0], &[1, 1, 0]])?;
    let b = lookup(table, "b", &[&[0, 1, 2], &[0, 1, 0], &[1, 2, 2]])?;
    let big = Subgroup::generated(table, &[s, t]);
    let small = Subgroup::generated(table, &[s, a, b]);
    check_order("H_3", big.order(), 36)?;
    check_order("H", small.order(), 18)?;
    if !small.is_normal_in(table, &big) {
        return Err(Error::Data("H is not a normal subgroup of H_3".into()));
    }
    let outside = *big.elements().iter().find(|&&g| !small.contains(g)).expect("index two");
    QuotientRep::new(
        table,
        big,
        small,
        &[table.identity(), outside],
        vec![Block::identity(1), Block::identity(1).neg()],
    )
}

fn build_rho_4(table: &FiniteGroupTable) -> Result<QuotientRep> {
    let s = lookup(table, "s", &[&[1, 0, 0, 0], &[0, 0, 0, 1], &[1, 1, 0, 1], &[1, 0, 1, 1]])?;
    let t = lookup(table, "t", &[&[0, 1, 1, 0], &[0, 1, 1, 1], &[1, 1, 1, 1], &[0, 0, 1, 1]])?;
    let gens = [
        lookup(table, "a", &[&[1, 0, 1, 1], &[0, 1, 1, 1], &[0, 0, 1, 0], &[0, 0, 0, 1]])?,
        lookup(table, "b", &[&[1, 1, 1, 0], &[1, 0, 0, 0], &[0, 0, 1, 0], &[1, 0, 1, 1]])?,
        lookup(table, "c", &[&[0, 1, 1, 1], &[1, 0, 1, 1], &[0, 0, 1, 0], &[0, 0, 0, 1]])?,
        lookup(table, "d", &[&[1, 0, 1, 0], &[0, 1, 1, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]])?,
        lookup(table, "e", &[&[0, 1, 0, 1], &[0, 1, 0, 0], &[0, 0, 1, 0], &[1, 1, 0, 0]])?,
        lookup(table, "f", &[&[1, 0, 0, 0], &[1, 0, 1, 1], &[0, 0, 1, 0], &[1, 1, 1, 0]])?,
    ];
    let x = lookup(table, "x", &[&[0, 1, 0, 0], &[0, 1, 1, 1], &[1, 1, 1, 1], &[0, 0, 0, 1]])?;
    let y = lookup(table, "y", &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[1, 1, 0, 1], &[0, 1, 1, 1]])?;
    let big = Subgroup::generated(table, &[s, t]);
    let small = Subgroup::generated(table, &gens);
    check_order("H_4", big.order(), 576)?;
    check_order("H", small.order(), 96)?;
    if !small.is_normal_in(table, &big) {
        return Err(Error::Data("H is not a normal subgroup of H_4".into()));
    }
    let x2 = table.mul(x, x);
    let yx = table.mul(y, x);
    let yx2 = table.mul(yx, x);
    for (name, g) in [("x", x), ("y", y)] {
        if !big.contains(g) {
            return Err(Error::Data(format!("{name} is not in H_4")));
        }
    }
    let inside = [("x^3", table.mul(x2, x)), ("y^2", table.mul(y, y)), ("(yx)^2", table.mul(yx, yx))];
    for (name, g) in inside {
        if !small.contains(g) {
            return Err(Error::Data(format!("{name} is not in H")));
        }
    }
    let outside = [("x", x), ("x^2", x2), ("y", y), ("yx", yx), ("yx^2", yx2)];
    for (name, g) in outside {
        if small.contains(g) {
            return Err(Error::Data(format!("{name} lies in H")));
        }
    }
    let m = |images: [usize; 3]| Block::permutation(&images);
    let blocks = vec![
        Block::identity(3),
        m([1, 2, 0]),        // (1 2 3)
        m([2, 0, 1]),        // (3 2 1)
        m([1, 0, 2]).neg(),  // (1 2)
        m([0, 2, 1]).neg(),  // (2 3)
        m([2, 1, 0]).neg(),  // (1 3)
    ];
    QuotientRep::new(table, big, small, &[table.identity(), x, x2, y, yx, yx2], blocks)
}

/// An orthogonal representation of a finite group, stored monomially:
/// `images[g][j] = (i, b)` says block column `j` of `π(g)` has the single
/// nonzero block `blocks[b]` in block row `i`.
#[derive(Clone, Debug)]
pub struct OrthogonalRep {
    block_dim: usize,
    blocks: Vec<Block>,
    images: Vec<Vec<(u32, u8)>>,
}

impl OrthogonalRep {
    pub fn dim(&self) -> usize {
        self.block_dim * self.block_count()
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn block_count(&self) -> usize {
        self.images.first().map_or(0, |v| v.len())
    }

    pub fn group_order(&self) -> usize {
        self.images.len()
    }

    /// Dense `π(g)`.
    pub fn matrix(&self, g: u32) -> RatMatrix {
        let d = self.block_dim;
        let mut out = RatMatrix::zeros(self.dim(), self.dim());
        for (j, &(i, b)) in self.images[g as usize].iter().enumerate() {
            let blk = &self.blocks[b as usize];
            for r in 0..d {
                for c in 0..d {
                    let v = blk.get(r, c);
                    if v != 0 {
                        out.set(i as usize * d + r, j * d + c, Rational::from_integer(v.into()));
                    }
                }
            }
        }
        out
    }

    /// `π(g)·π(h)` in monomial form.
    fn compose(&self, g: u32, h: u32) -> Vec<(u32, Block)> {
        self.images[h as usize]
            .iter()
            .map(|&(k, b1)| {
                let (i, b2) = self.images[g as usize][k as usize];
                (i, self.blocks[b2 as usize].mul(&self.blocks[b1 as usize]))
            })
            .collect()
    }

    fn monomial(&self, g: u32) -> Vec<(u32, Block)> {
        self.images[g as usize].iter().map(|&(i, b)| (i, self.blocks[b as usize].clone())).collect()
    }

    /// Each `π(g)` is a block permutation with orthogonal blocks, and
    /// `π(g⁻¹) = π(g)ᵗ`.
    pub fn check_orthogonal(&self, table: &FiniteGroupTable) -> Result<()> {
        if self.blocks.iter().any(|b| !b.is_orthogonal()) {
            return Err(Error::invariant("orthogonality", "a block is not orthogonal"));
        }
        for (g, img) in self.images.iter().enumerate() {
            let mut rows: Vec<u32> = img.iter().map(|&(i, _)| i).collect();
            rows.sort_unstable();
            if rows.iter().enumerate().any(|(k, &r)| r as usize != k) {
                return Err(Error::invariant("orthogonality", format!("element {g} is not a block permutation")));
            }
            let inv = self.monomial(table.inverse(g as u32));
            for (j, &(i, b)) in img.iter().enumerate() {
                let (back, blk) = &inv[i as usize];
                if *back as usize != j || *blk != self.blocks[b as usize].transpose() {
                    return Err(Error::invariant("orthogonality", format!("π(g⁻¹) ≠ π(g)ᵗ for element {g}")));
                }
            }
        }
        Ok(())
    }

    /// `π(g)π(h) = π(gh)` on at least `samples` pairs; every element occurs
    /// as the left factor at least once.
    pub fn check_homomorphism(&self, table: &FiniteGroupTable, samples: usize, seed: u64) -> Result<usize> {
        let order = table.order() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = samples.max(order as usize);
        for k in 0..total {
            let g = if k < order as usize { k as u32 } else { rng.gen_range(0..order) };
            let h = rng.gen_range(0..order);
            if self.compose(g, h) != self.monomial(table.mul(g, h)) {
                return Err(Error::invariant("homomorphism", format!("π(g)π(h) ≠ π(gh) for elements {g}, {h}")));
            }
        }
        Ok(total)
    }

    /// A copy with `π(g)` replaced by its transpose; a negative control for
    /// the homomorphism check.
    pub fn with_transposed(&self, g: u32) -> OrthogonalRep {
        let mut out = self.clone();
        let img = &self.images[g as usize];
        let mut t = vec![(0u32, 0u8); img.len()];
        for (j, &(i, b)) in img.iter().enumerate() {
            let bt = self.blocks[b as usize].transpose();
            let id = match out.blocks.iter().position(|x| *x == bt) {
                Some(k) => k,
                None => {
                    out.blocks.push(bt);
                    out.blocks.len() - 1
                }
            };
            t[i as usize] = (j as u32, id as u8);
        }
        out.images[g as usize] = t;
        out
    }

    pub fn to_record(&self, table: &FiniteGroupTable, limit: Option<usize>) -> RepRecord {
        let count = limit.unwrap_or(self.images.len()).min(self.images.len());
        let entries = (0..count as u32)
            .map(|g| {
                let n = table.rank();
                let flat = table.matrix(g);
                let m = self.matrix(g);
                RepEntry {
                    g: flat.chunks(n).map(|r| r.to_vec()).collect(),
                    m: (0..m.rows()).map(|i| m.row(i).iter().map(crate::exactmath::format_rational).collect()).collect(),
                }
            })
            .collect();
        RepRecord { p: table.modulus(), dim: self.dim(), entries }
    }
}

#[derive(Serialize)]
pub struct RepEntry {
    pub g: Vec<Vec<u8>>,
    pub m: Vec<Vec<String>>,
}

#[derive(Serialize)]
pub struct RepRecord {
    pub p: u8,
    pub dim: usize,
    pub entries: Vec<RepEntry>,
}

/// Induces `inner` from its subgroup to the whole group. With a left
/// transversal `r_0, …, r_{k−1}` (first element of each coset in table
/// order), block `(i, j)` of `π(g)` is `inner(r_i⁻¹ g r_j)` when that lies in
/// the subgroup and zero otherwise.
pub fn induce(inner: &QuotientRep, table: &FiniteGroupTable) -> Result<OrthogonalRep> {
    let order = table.order();
    let sub = inner.subgroup.elements();
    let mut coset_of = vec![u32::MAX; order];
    let mut transversal: Vec<u32> = Vec::new();
    for g in 0..order as u32 {
        if coset_of[g as usize] != u32::MAX {
            continue;
        }
        let c = transversal.len() as u32;
        transversal.push(g);
        for &h in sub {
            let x = table.mul(g, h) as usize;
            if coset_of[x] != u32::MAX {
                return Err(Error::invariant("transversal", "cosets overlap"));
            }
            coset_of[x] = c;
        }
    }
    if transversal.len() * sub.len() != order {
        return Err(Error::invariant("transversal", "cosets do not cover the group"));
    }
    let rep_inv: Vec<u32> = transversal.iter().map(|&r| table.inverse(r)).collect();
    let images = (0..order as u32)
        .map(|g| {
            transversal
                .iter()
                .map(|&rj| {
                    let x = table.mul(g, rj);
                    let i = coset_of[x as usize];
                    let h = table.mul(rep_inv[i as usize], x);
                    let b = inner.block_of(h).expect("r_i⁻¹ g r_j lies in the subgroup");
                    (i, b as u8)
                })
                .collect()
        })
        .collect();
    Ok(OrthogonalRep { block_dim: inner.dim(), blocks: inner.blocks.clone(), images })
}

/// `dim ∩ ker(π(g) − I)` over the given generators, exact.
pub fn invariant_vector_dim(rep: &OrthogonalRep, generators: &[u32]) -> usize {
    let dim = rep.dim();
    let parts: Vec<RatMatrix> = generators
        .iter()
        .map(|&g| rep.matrix(g).sub(&RatMatrix::identity(dim)).expect("square"))
        .collect();
    let stacked = RatMatrix::vstack(&parts).expect("equal widths");
    certified_rank(&stacked).corank()
}

/// Evaluates a group-ring matrix under `π ∘ (mod p)`: block `(i, j)` is
/// `Σ λ·π(ḡ)` over the terms of entry `(i, j)`. Terms with equal images
/// are combined before any block is touched.
pub fn representing_matrix(m: &GroupRingMatrix, rep: &OrthogonalRep, table: &FiniteGroupTable) -> Result<RatMatrix> {
    let d = rep.dim();
    let bd = rep.block_dim;
    let mut out = RatMatrix::zeros(m.rows() * d, m.cols() * d);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let mut grouped: FxHashMap<u32, Rational> = FxHashMap::default();
            for (g, c) in m.get(i, j).terms() {
                *grouped.entry(table.mod_reduce(g)?).or_insert_with(Rational::zero) += c;
            }
            let mut keys: Vec<u32> = grouped.keys().copied().collect();
            keys.sort_unstable();
            for g in keys {
                let c = &grouped[&g];
                if c.is_zero() {
                    continue;
                }
                for (col_block, &(row_block, b)) in rep.images[g as usize].iter().enumerate() {
                    let blk = &rep.blocks[b as usize];
                    for r in 0..bd {
                        for s in 0..bd {
                            let v = blk.get(r, s);
                            if v == 0 {
                                continue;
                            }
                            let entry = out.get_mut(i * d + row_block as usize * bd + r, j * d + col_block * bd + s);
                            if v.is_one() {
                                *entry += c;
                            } else {
                                *entry += c * Rational::from_integer(v.into());
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The coefficient representation for rank `n`: `π′` on `SL_n(Z/p)` for
/// ranks 3 and 4, and the trivial representation of `SL_2(Z/2)` for rank 2.
pub fn coefficient_rep(n: usize) -> Result<(FiniteGroupTable, OrthogonalRep)> {
    let (p, trivial) = match n {
        2 => (2, true),
        3 => (3, false),
        4 => (2, false),
        _ => return Err(Error::Contract(format!("no coefficient representation for rank {n}"))),
    };
    let table = enumerate_finite_group(n, p)?;
    let inner = if trivial { QuotientRep::trivial(&table) } else { build_rho(&table)? };
    let rep = induce(&inner, &table)?;
    Ok((table, rep))
}
