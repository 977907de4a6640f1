//! Naive reference routines shared by the integration tests. They use
//! plain `i128` arithmetic and exhaustive search, and share no code with the
//! library's exact linear algebra, polyhedra or isometry modules.

#![allow(dead_code)]

pub type Vector = Vec<i64>;

/// Fraction-free elimination; returns the determinant of a square matrix.
pub fn det(rows: &[Vec<i128>]) -> i128 {
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| a[i][k] != 0) else { return 0 };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Rank by fraction-free row reduction.
pub fn rank(rows: &[Vec<i128>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(p, r);
        for i in 0..a.len() {
            if i != r && a[i][c] != 0 {
                let (x, y) = (a[r][c], a[i][c]);
                for j in 0..cols {
                    a[i][j] = a[i][j] * x - a[r][j] * y;
                }
                let g = a[i].iter().fold(0i128, |g, &v| gcd(g, v));
                if g > 1 {
                    a[i].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        r += 1;
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Upper triangle of `v vᵗ`, row by row.
pub fn rank_one(v: &[i64]) -> Vec<i128> {
    let n = v.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            out.push(v[i] as i128 * v[j] as i128);
        }
    }
    out
}

/// Vectors whose first nonzero entry is positive.
pub fn positive_half(vectors: &[Vector]) -> Vec<Vector> {
    vectors.iter().filter(|v| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)).cloned().collect()
}

pub fn close_under_negation(half: &[Vector]) -> Vec<Vector> {
    let mut all: Vec<Vector> = half.iter().flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()]).collect();
    all.sort();
    all.dedup();
    all
}

/// `Σ v vᵗ` over the given vectors.
pub fn gram_sum(vectors: &[Vector]) -> Vec<Vec<i128>> {
    let n = vectors[0].len();
    let mut g = vec![vec![0i128; n]; n];
    for v in vectors {
        for i in 0..n {
            for j in 0..n {
                g[i][j] += v[i] as i128 * v[j] as i128;
            }
        }
    }
    g
}

/// Sylvester's criterion.
pub fn positive_definite(g: &[Vec<i128>]) -> bool {
    (1..=g.len()).all(|k| det(&g[..k].iter().map(|r| r[..k].to_vec()).collect::<Vec<_>>()) > 0)
}

/// Minimal nonzero vectors of `q` by scanning the box `[-b, b]^N`.
pub fn minimal_vectors_in_box(q: &[Vec<i64>], b: i64) -> Vec<Vector> {
    let n = q.len();
    let mut best = i64::MAX;
    let mut found = Vec::new();
    let mut v = vec![-b; n];
    loop {
        if v.iter().any(|&x| x != 0) {
            let val: i64 = (0..n).map(|i| (0..n).map(|j| v[i] * q[i][j] * v[j]).sum::<i64>()).sum();
            if val < best {
                best = val;
                found.clear();
            }
            if val == best {
                found.push(v.clone());
            }
        }
        let mut k = 0;
        while k < n && v[k] == b {
            v[k] = -b;
            k += 1;
        }
        if k == n {
            break;
        }
        v[k] += 1;
    }
    found.sort();
    found
}

/// Facets of the cone over the `v vᵗ` of `half`, as sets of indices into
/// `half`: maximal subsets of rank one less that leave all other vertices
/// strictly on one side.
pub fn facets_by_search(half: &[Vector]) -> Vec<Vec<usize>> {
    let points: Vec<Vec<i128>> = half.iter().map(|v| rank_one(v)).collect();
    let full = rank(&points);
    let coords = independent_coordinates(&points, full);
    let project = |p: &Vec<i128>| coords.iter().map(|&c| p[c]).collect::<Vec<i128>>();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for subset in index_subsets(points.len(), full - 1) {
        let rows: Vec<Vec<i128>> = subset.iter().map(|&i| points[i].clone()).collect();
        if rank(&rows) != full - 1 {
            continue;
        }
        let members: Vec<usize> = (0..points.len())
            .filter(|&i| {
                let mut with = rows.clone();
                with.push(points[i].clone());
                rank(&with) == full - 1
            })
            .collect();
        if out.contains(&members) {
            continue;
        }
        let base: Vec<Vec<i128>> = rows.iter().map(project).collect();
        let mut side = 0i128;
        let mut separates = true;
        for i in (0..points.len()).filter(|i| !members.contains(i)) {
            let mut m = base.clone();
            m.push(project(&points[i]));
            let s = det(&m).signum();
            if s == 0 || (side != 0 && s != side) {
                separates = false;
                break;
            }
            side = s;
        }
        if separates {
            out.push(members);
        }
    }
    out.sort();
    out
}

fn independent_coordinates(points: &[Vec<i128>], target: usize) -> Vec<usize> {
    let mut coords = Vec::new();
    for c in 0..points[0].len() {
        let mut trial = coords.clone();
        trial.push(c);
        let cols: Vec<Vec<i128>> = trial.iter().map(|&k| points.iter().map(|p| p[k]).collect()).collect();
        if rank(&cols) == trial.len() {
            coords = trial;
        }
        if coords.len() == target {
            break;
        }
    }
    coords
}

pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Whether some `h ∈ SL_N(Z)` maps the set `a` onto the set `b` (both
/// closed under negation). `h` is pinned down by the images of a basis
/// chosen from `a`, so all ordered choices of images in `b` are tried.
pub fn related_by_sl(a: &[Vector], b: &[Vector]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a[0].len();
    let basis = match index_subsets(a.len(), n).into_iter().find(|s| det(&columns(a, s)) != 0) {
        Some(s) => s,
        None => return false,
    };
    let bmat = columns(a, &basis);
    let d = det(&bmat);
    let adj = adjugate(&bmat);
    let b_sorted = {
        let mut v = b.to_vec();
        v.sort();
        v
    };
    let mut choice = vec![0usize; n];
    loop {
        // images as columns
        let w: Vec<Vec<i128>> = (0..n).map(|r| choice.iter().map(|&c| b[c][r] as i128).collect()).collect();
        if let Some(h) = divide(&matmul(&w, &adj), d) {
            if det(&h) == 1 {
                let mut image: Vec<Vector> = a
                    .iter()
                    .map(|v| (0..n).map(|r| (0..n).map(|c| h[r][c] * v[c] as i128).sum::<i128>() as i64).collect())
                    .collect();
                image.sort();
                if image == b_sorted {
                    return true;
                }
            }
        }
        let mut k = 0;
        while k < n && choice[k] + 1 == b.len() {
            choice[k] = 0;
            k += 1;
        }
        if k == n {
            return false;
        }
        choice[k] += 1;
    }
}

fn columns(vectors: &[Vector], idx: &[usize]) -> Vec<Vec<i128>> {
    let n = vectors[0].len();
    (0..n).map(|r| idx.iter().map(|&c| vectors[c][r] as i128).collect()).collect()
}

fn adjugate(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = m.len();
    let mut out = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i128>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            out[i][j] = s * if n == 1 { 1 } else { det(&minor) };
        }
    }
    out
}

fn matmul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn divide(m: &[Vec<i128>], d: i128) -> Option<Vec<Vec<i128>>> {
    m.iter().map(|r| r.iter().map(|&x| if x % d == 0 { Some(x / d) } else { None }).collect()).collect()
}
