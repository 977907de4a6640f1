//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the report shows up in ordinary `cargo test` output; exits nonzero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voronoi_core::complex::{build_complex, CellComplex};
use voronoi_core::engine::{verify_complex, Engine, HOMOMORPHISM_SAMPLES};
use voronoi_core::exactmath::{certified_rank, rank_exact, rat, rat_int, RatMatrix, Rational, SqMat};
use voronoi_core::forms::{is_perfect, minimal_vectors, perfect_form_table, rank_one_flat, QuadForm};
use voronoi_core::groupring::{idempotent_diagonal, laplacian_prime};
use voronoi_core::isometry::{all_isometries, DetConstraint};
use voronoi_core::polyhedra::{facets, VPolytope};
use voronoi_core::reps::{build_rho, coefficient_rep, enumerate_finite_group, invariant_vector_dim, representing_matrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn complex(n: usize) -> Result<CellComplex, String> {
    build_complex(n, &perfect_form_table(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || format!("took {:?}, budget {limit:?}", start.elapsed()))
}

fn headline(n: usize, expected: usize) -> Outcome {
    let cert = Engine::default().certify(n).map_err(|e| e.to_string())?;
    ensure(cert.corank == expected, || format!("corank {} (expected {expected})", cert.corank))?;
    ensure(cert.cross_check_corank == expected, || format!("stacked-operator corank {}", cert.cross_check_corank))?;
    Ok(format!("{}x{} matrix, rank {}, corank {}", cert.matrix_size, cert.matrix_size, cert.matrix_rank, cert.corank))
}

/// Hand computation for the trivial representation: `π(v_σ)` is the mean
/// of the orientation character over the stabilizer, 0 for the edge (the
/// quarter turn reverses it) and 1 for the triangle, and `π(∂_2)` is
/// `π(v_edge)·(±1 ± 1 ± 1) = 0`. Hence `π(Δ′_1) = [1]` and `π(Δ′_2) = [0]`.
fn rank_two_sanity() -> Outcome {
    let start = Instant::now();
    let c = complex(2)?;
    ensure(c.orbit_counts() == BTreeMap::from([(1, 1), (2, 1)]), || format!("orbits {:?}", c.orbit_counts()))?;
    let edge = c.orbits(1)[0].min_vectors().vectors().to_vec();
    ensure(edge == vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]], || format!("edge vectors {edge:?}"))?;
    let (table, rep) = coefficient_rep(2).map_err(|e| e.to_string())?;
    let hand = [(1, rat_int(1), 0), (2, rat_int(0), 1)];
    for (degree, entry, corank) in hand {
        let m = representing_matrix(&laplacian_prime(&c, degree).map_err(|e| e.to_string())?, &rep, &table)
            .map_err(|e| e.to_string())?;
        ensure(m == RatMatrix::new(1, 1, vec![entry.clone()]).unwrap(), || format!("π(Δ′_{degree}) = {m:?}"))?;
        let got = Engine::default().certify_degree(2, degree).map_err(|e| e.to_string())?.corank;
        ensure(got == corank, || format!("degree {degree}: corank {got}, hand value {corank}"))?;
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("orbits {{1:1, 2:1}}, coranks 0 and 1, {:?}", start.elapsed()))
}

fn chain_condition() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    for n in [2, 3] {
        let c = complex(n)?;
        for d in c.degrees() {
            let defect = c.chain_defect(d).map_err(|e| e.to_string())?;
            ensure(defect.is_zero(), || format!("N={n}: v·∂_{d}∂_{}·v ≠ 0", d + 1))?;
        }
        report.push(format!("N={n} degrees {:?}", c.degrees()));
    }
    within(Duration::from_secs(60), start)?;
    Ok(report.join("; "))
}

fn idempotents() -> Outcome {
    let mut cells = 0;
    for n in [2, 3] {
        let c = complex(n)?;
        for d in c.degrees() {
            for cell in c.orbits(d) {
                let v = cell.characteristic_chain();
                ensure(v.multiply(&v) == v, || format!("N={n} degree {d}: v² ≠ v"))?;
                ensure(v.star() == v, || format!("N={n} degree {d}: v* ≠ v"))?;
                cells += 1;
            }
            let boundary = c.differential(d);
            let absorbed = idempotent_diagonal(&c, d.wrapping_sub(1))
                .mul(&boundary)
                .and_then(|m| m.mul(&idempotent_diagonal(&c, d)))
                .map_err(|e| e.to_string())?;
            ensure(absorbed == boundary, || format!("N={n}: diag(v)·∂_{d}·diag(v) ≠ ∂_{d}"))?;
        }
    }
    Ok(format!("{cells} orbit idempotents, all differentials absorbed"))
}

/// Rank of integer rows by plain fraction-free elimination.
fn naive_rank(rows: &[Vec<i128>]) -> usize {
    let mut a = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(p, r);
        for i in r + 1..a.len() {
            let (x, y) = (a[r][c], a[i][c]);
            for j in 0..cols {
                a[i][j] = a[i][j] * x - a[r][j] * y;
            }
        }
        r += 1;
    }
    r
}

fn perfectness() -> Outcome {
    let start = Instant::now();
    let mut names = Vec::new();
    for n in 2..=4 {
        let seeds = perfect_form_table(n).map_err(|e| e.to_string())?;
        for s in &seeds {
            ensure(is_perfect(&s.form).map_err(|e| e.to_string())?, || format!("{} not perfect", s.name))?;
            let rows: Vec<Vec<i128>> = minimal_vectors(&s.form)
                .map_err(|e| e.to_string())?
                .representatives()
                .iter()
                .map(|v| rank_one_flat(v).into_iter().map(i128::from).collect())
                .collect();
            let full = n * (n + 1) / 2;
            ensure(naive_rank(&rows) == full, || format!("{}: rank-one forms span {}", s.name, naive_rank(&rows)))?;
            names.push(s.name);
        }
        if n == 4 {
            ensure(seeds.len() == 2, || format!("{} classes for N=4", seeds.len()))?;
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("seeds {names:?}"))
}

fn representations() -> Outcome {
    let mut report = Vec::new();
    for (n, p, order, sub, dim) in [(3usize, 3u8, 5616usize, 36usize, 156usize), (4, 2, 20160, 576, 105)] {
        let q = p as usize;
        let formula = q.pow((n * (n - 1) / 2) as u32) * (2..=n).map(|k| q.pow(k as u32) - 1).product::<usize>();
        ensure(formula == order, || format!("order formula gives {formula}"))?;
        let table = enumerate_finite_group(n, p).map_err(|e| e.to_string())?;
        ensure(table.order() == order, || format!("|SL_{n}(Z/{p})| = {}", table.order()))?;
        let rho = build_rho(&table).map_err(|e| e.to_string())?;
        ensure(rho.subgroup.order() == sub, || format!("|H_{n}| = {}", rho.subgroup.order()))?;
        let (table, rep) = coefficient_rep(n).map_err(|e| e.to_string())?;
        ensure(rep.dim() == dim && dim == order / sub * rho.dim(), || format!("dim {}", rep.dim()))?;
        rep.check_orthogonal(&table).map_err(|e| e.to_string())?;
        let pairs = rep.check_homomorphism(&table, HOMOMORPHISM_SAMPLES, 0xacce).map_err(|e| e.to_string())?;
        ensure(pairs >= 10_000, || format!("only {pairs} pairs"))?;
        let fixed = invariant_vector_dim(&rep, &table.elementary_generators());
        ensure(fixed == 0, || format!("{fixed} invariant vectors"))?;
        report.push(format!("N={n}: |G|={order}, |H|={sub}, dim {dim}, {pairs} pairs"));
    }
    Ok(report.join("; "))
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det_i128(&minor)
        })
        .sum()
}

/// Facets of a full-dimensional point set: every hyperplane through `d`
/// affinely independent points that leaves all points on one side.
fn brute_force_facets(points: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let d = points[0].len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let base = &points[idx[0]];
        let diffs: Vec<Vec<i128>> =
            idx[1..].iter().map(|&i| points[i].iter().zip(base).map(|(a, b)| (a - b) as i128).collect()).collect();
        // normal by cofactors of the (d−1)×d difference matrix
        let normal: Vec<i128> = (0..d)
            .map(|k| {
                let minor: Vec<Vec<i128>> = diffs.iter().map(|r| [&r[..k], &r[k + 1..]].concat()).collect();
                if k % 2 == 0 {
                    det_i128(&minor)
                } else {
                    -det_i128(&minor)
                }
            })
            .collect();
        if normal.iter().any(|&x| x != 0) {
            let side: Vec<i128> = points
                .iter()
                .map(|p| p.iter().zip(base).zip(&normal).map(|((a, b), c)| (a - b) as i128 * c).sum())
                .collect();
            if side.iter().all(|&s| s >= 0) || side.iter().all(|&s| s <= 0) {
                let members: Vec<usize> = (0..points.len()).filter(|&i| side[i] == 0).collect();
                if !out.contains(&members) {
                    out.push(members);
                }
            }
        }
        let mut k = d;
        while k > 0 && idx[k - 1] == points.len() - d + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for j in k..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out.sort();
    out
}

fn facet_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut done = 0;
    while done < 100 {
        let d = rng.gen_range(2..=4);
        let count = rng.gen_range(d + 1..=8);
        let points: Vec<Vec<i64>> = (0..count).map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != points.len() {
            continue;
        }
        let poly = VPolytope::new(points.clone()).map_err(|e| e.to_string())?;
        if voronoi_core::polyhedra::affine_dim(&poly) != d {
            continue;
        }
        let mut got: Vec<Vec<usize>> = facets(&poly).map_err(|e| e.to_string())?.into_iter().map(|f| f.vertex_indices).collect();
        got.sort();
        let want = brute_force_facets(&points);
        ensure(got == want, || format!("facets of {points:?}: {got:?} vs {want:?}"))?;
        done += 1;
    }
    Ok(done)
}

fn random_form(rng: &mut ChaCha8Rng) -> QuadForm {
    loop {
        let (a, b, c) = (rng.gen_range(1..=6), rng.gen_range(-4..=4), rng.gen_range(1..=6));
        if a * c - b * b > 0 {
            return QuadForm::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
        }
    }
}

fn random_unimodular(rng: &mut ChaCha8Rng) -> SqMat {
    let mut g = SqMat::identity(2);
    for _ in 0..3 {
        let k = rng.gen_range(-2..=2);
        let e = if rng.gen_bool(0.5) { [1, k, 0, 1] } else { [1, 0, k, 1] };
        g = g.mul(&SqMat::from_flat(2, &e).unwrap());
    }
    if rng.gen_bool(0.5) {
        g = g.mul(&SqMat::from_flat(2, &[0, 1, 1, 0]).unwrap());
    }
    g
}

/// Every `g` with entries in `[-b, b]` and `gᵗ q1 g = q2`; `b` bounds the
/// coordinates of any vector of `q1`-norm at most `max(q2)`.
fn exhaustive_isometries(q1: &QuadForm, q2: &QuadForm, special: bool) -> Vec<SqMat> {
    let g1 = q1.gram();
    let det = g1.get(0, 0) * g1.get(1, 1) - g1.get(0, 1) * g1.get(1, 0);
    let top = q2.gram().get(0, 0).max(q2.gram().get(1, 1));
    let bound = (((top * g1.get(0, 0).max(g1.get(1, 1))) as f64 / det as f64).sqrt().ceil() as i64) + 1;
    let mut out = Vec::new();
    let range = -bound..=bound;
    for a in range.clone() {
        for b in range.clone() {
            for c in range.clone() {
                for d in range.clone() {
                    let g = SqMat::from_flat(2, &[a, b, c, d]).unwrap();
                    let det = a * d - b * c;
                    if (det == 1 || (!special && det == -1)) && q1.act(&g) == *q2 {
                        out.push(g);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn isometry_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut pairs = 0;
    for _ in 0..60 {
        let q1 = random_form(rng);
        let q2 = if rng.gen_bool(0.7) { q1.act(&random_unimodular(rng)) } else { random_form(rng) };
        for (constraint, special) in [(DetConstraint::Any, false), (DetConstraint::Special, true)] {
            let got = all_isometries(&q1, &q2, constraint).map_err(|e| e.to_string())?.elements().to_vec();
            let want = exhaustive_isometries(&q1, &q2, special);
            ensure(got == want, || format!("{q1:?} → {q2:?}: {} vs {}", got.len(), want.len()))?;
        }
        pairs += 1;
    }
    Ok(pairs)
}

fn naive_rational_rank(m: &RatMatrix) -> usize {
    let zero = rat_int(0);
    let mut a: Vec<Vec<Rational>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let mut r = 0;
    for c in 0..m.cols() {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != zero) else { continue };
        a.swap(p, r);
        for i in r + 1..a.len() {
            let f = &a[i][c] / &a[r][c];
            for j in 0..m.cols() {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
        }
        r += 1;
    }
    r
}

fn rank_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for _ in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let mut entries: Vec<Rational> =
            (0..rows * cols).map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=5))).collect();
        if rows > 1 && rng.gen_bool(0.4) {
            // make the last row a combination of the first two
            for j in 0..cols {
                let combo = &entries[j] * rat(2, 3) - &entries[(rows.min(2) - 1) * cols + j];
                entries[(rows - 1) * cols + j] = combo;
            }
        }
        let m = RatMatrix::new(rows, cols, entries).map_err(|e| e.to_string())?;
        let want = naive_rational_rank(&m);
        ensure(rank_exact(&m) == want, || format!("rank_exact {} vs {want} on {m:?}", rank_exact(&m)))?;
        ensure(certified_rank(&m).rank == want, || format!("certified rank differs on {m:?}"))?;
    }
    Ok(200)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bac1e);
    let polys = facet_oracle(&mut rng)?;
    let forms = isometry_oracle(&mut rng)?;
    let mats = rank_oracle(&mut rng)?;
    Ok(format!("{polys} polytopes, {forms} form pairs, {mats} matrices"))
}

/// Whether every product of `∂_d[row, col]` with a neighbouring entry
/// vanishes on its own after projecting by the idempotents. A sign change in
/// such an entry amounts to reorienting a cell, so no chain check sees it.
fn products_vanish_termwise(c: &CellComplex, d: usize, row: usize, col: usize) -> bool {
    let entry = c.differential(d).get(row, col).clone();
    let below = c.differential(d.wrapping_sub(1));
    let outer = c.orbits(d.wrapping_sub(2));
    let left_zero = (0..below.rows()).all(|i| {
        let left = outer[i].characteristic_chain().multiply(below.get(i, row));
        left.multiply(&entry).multiply(&c.orbits(d)[col].characteristic_chain()).is_zero()
    });
    let above = c.differential(d + 1);
    let right_zero = (0..above.cols()).all(|j| {
        let left = c.orbits(d - 1)[row].characteristic_chain().multiply(&entry);
        left.multiply(above.get(col, j)).multiply(&c.orbits(d + 1)[j].characteristic_chain()).is_zero()
    });
    left_zero && right_zero
}

fn negative_controls() -> Outcome {
    let c = complex(3)?;
    let (mut detected, mut invisible) = (0, Vec::new());
    for d in c.degrees() {
        let boundary = c.differential(d);
        for row in 0..boundary.rows() {
            for col in 0..boundary.cols() {
                if boundary.get(row, col).is_zero() {
                    continue;
                }
                let broken = c.with_flipped_facet(d, row, col).map_err(|e| e.to_string())?;
                let chain = verify_complex(&broken).into_iter().find(|r| r.name == "chain condition").unwrap();
                if !chain.passed {
                    detected += 1;
                } else if products_vanish_termwise(&c, d, row, col) {
                    invisible.push(format!("∂_{d}({row},{col})"));
                } else {
                    return Err(format!("flipping ∂_{d} entry ({row},{col}) went unnoticed"));
                }
            }
        }
    }
    ensure(detected > 0, || "no flip was detected".into())?;
    let run = |expect: &str| {
        Command::new(env!("CARGO_BIN_EXE_voronoi"))
            .args(["certify", "--n", "3", "--expect", expect])
            .env_remove("VORONOI_CACHE_DIR")
            .output()
            .map_err(|e| e.to_string())
            .map(|out| out.status.code())
    };
    let wrong = run("5")?;
    ensure(wrong == Some(1), || format!("--expect 5 exited with {wrong:?}"))?;
    let right = run("4")?;
    ensure(right == Some(0), || format!("--expect 4 exited with {right:?}"))?;
    Ok(format!(
        "{detected} flips detected, {} invisible by termwise vanishing {invisible:?}; --expect 5 exits 1",
        invisible.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("rank 3 corank is 4", || headline(3, 4)),
        ("rank 4 corank is 2 (extended)", || headline(4, 2)),
        ("rank 2 sanity suite", rank_two_sanity),
        ("chain condition for N in {2,3}", chain_condition),
        ("idempotents and diagonal absorption", idempotents),
        ("perfect-form seeds", perfectness),
        ("coefficient representations", representations),
        ("oracle equivalence suites", oracle_equivalence),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
