//! Exact polynomial reconstruction from integer-point evaluations: Lagrange
//! interpolation (univariate and nested multivariate), exact linear solving,
//! and extraction of multilinear coefficients of symmetric polynomials from
//! partition-indexed sample points.

use super::poly::{MultiPoly, VarSet};
use super::scalar::ExactScalar;
use super::ExactAlgError;
use once_cell::sync::Lazy;
use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

/// Interpolate a polynomial in `vars[var]` through the given samples
/// `(x_j, p_j)` where the `p_j` are polynomials in the remaining variables.
/// Sample abscissae must be pairwise distinct.
pub fn lagrange_interpolate(samples: &[(i64, MultiPoly)], var: usize, vars: &VarSet) -> MultiPoly {
    let mut result = MultiPoly::zero(vars);
    for (j, (xj, pj)) in samples.iter().enumerate() {
        if pj.is_zero() {
            continue;
        }
        // basis polynomial ∏_{k≠j} (x − x_k)/(x_j − x_k)
        let mut basis = MultiPoly::one(vars);
        let mut denom = ExactScalar::one();
        for (k, (xk, _)) in samples.iter().enumerate() {
            if k == j {
                continue;
            }
            let lin = &MultiPoly::var(vars, var) - &MultiPoly::from_int(vars, *xk);
            basis = &basis * &lin;
            denom = &denom * &ExactScalar::from_int(xj - xk);
        }
        result = &result + &(&basis * pj).scale(&denom.recip());
    }
    result
}

/// Reconstruct the polynomial of per-variable degree at most `bounds[i]` in
/// `vars[i]` from evaluations at the integer grid `1..=bounds[i]+1`.
pub fn interpolate_multivariate(
    f: &mut dyn FnMut(&[i64]) -> ExactScalar,
    bounds: &[usize],
    vars: &VarSet,
) -> MultiPoly {
    assert_eq!(bounds.len(), vars.len());
    let mut point = vec![0i64; bounds.len()];
    interpolate_rec(f, bounds, vars, 0, &mut point)
}

fn interpolate_rec(
    f: &mut dyn FnMut(&[i64]) -> ExactScalar,
    bounds: &[usize],
    vars: &VarSet,
    depth: usize,
    point: &mut Vec<i64>,
) -> MultiPoly {
    if depth == bounds.len() {
        return MultiPoly::scalar(vars, f(point));
    }
    let mut samples = Vec::with_capacity(bounds[depth] + 1);
    for x in 1..=(bounds[depth] as i64 + 1) {
        point[depth] = x;
        samples.push((x, interpolate_rec(f, bounds, vars, depth + 1, point)));
    }
    point[depth] = 0;
    lagrange_interpolate(&samples, depth, vars)
}

/// Solve `A·x = b` over the exact scalars by Gaussian elimination.
/// Returns `None` when the matrix is singular (or non-square).
pub fn solve_linear_system(
    a: &[Vec<ExactScalar>],
    b: &[ExactScalar],
) -> Option<Vec<ExactScalar>> {
    let n = a.len();
    if n == 0 {
        return Some(Vec::new());
    }
    if a.iter().any(|row| row.len() != n) || b.len() != n {
        return None;
    }
    let mut m: Vec<Vec<ExactScalar>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for j in col..=n {
            m[col][j] = &m[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for j in col..=n {
                    let delta = &factor * &m[col][j];
                    m[r][j] = &m[r][j] - &delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Rank of an exact matrix (rows need not be square).
pub fn matrix_rank(rows: &[Vec<ExactScalar>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<ExactScalar>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].recip();
        for j in col..ncols {
            m[rank][j] = &m[rank][j] * &inv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for j in col..ncols {
                    let delta = &factor * &m[rank][j];
                    m[r][j] = &m[r][j] - &delta;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// All partitions of size at most `max_size` with at most `max_len` parts,
/// as weakly decreasing vectors (the empty partition included).
fn partitions_up_to(max_size: usize, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    fn rec(
        out: &mut Vec<Vec<u32>>,
        cur: &mut Vec<u32>,
        remaining: usize,
        max_len: usize,
        max_part: usize,
    ) {
        out.push(cur.clone());
        if cur.len() == max_len {
            return;
        }
        let hi = remaining.min(max_part);
        for part in (1..=hi).rev() {
            cur.push(part as u32);
            rec(out, cur, remaining - part, max_len, part);
            cur.pop();
        }
    }
    rec(&mut out, &mut cur, max_size, max_len, max_size);
    out.sort();
    out.dedup();
    out
}

/// Monomial symmetric polynomial `m_λ` evaluated at the point `x`:
/// the sum of `∏ x_i^{μ_i}` over all distinct permutations `μ` of the
/// padded exponent vector of `λ`.
fn monomial_symmetric_at(lambda: &[u32], x: &[i64]) -> ExactScalar {
    let m = x.len();
    let mut exps = vec![0u32; m];
    exps[..lambda.len()].copy_from_slice(lambda);
    // enumerate distinct permutations of `exps`
    let mut sum = ExactScalar::zero();
    let mut perm = exps.clone();
    perm.sort_unstable();
    loop {
        let mut prod = ExactScalar::one();
        for (xi, &e) in x.iter().zip(&perm) {
            for _ in 0..e {
                prod = &prod * &ExactScalar::from_int(*xi);
            }
        }
        sum = &sum + &prod;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    sum
}

/// Lexicographic next-permutation on a slice; returns false after the last.
fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Coefficient of the multilinear monomial `x_1·x_2⋯x_m` in a symmetric
/// polynomial of total degree at most `bound`, reconstructed from
/// evaluations of `f` at partition-indexed integer points.
///
/// The sample points `x(λ)_i = λ_i + (m − i) + 1` are strictly decreasing and
/// positive, one per partition of size ≤ `bound` with ≤ `m` parts; the fit is
/// checked against extra evaluations and any mismatch is reported as
/// [`ExactAlgError::InterpolationInconsistent`].
pub fn symmetric_multilinear_coeff(
    f: &mut dyn FnMut(&[i64]) -> ExactScalar,
    m: usize,
    bound: usize,
) -> Result<ExactScalar, ExactAlgError> {
    if m == 0 {
        return Ok(f(&[]));
    }
    if m > bound {
        // the multilinear monomial has degree m > bound, so its coefficient
        // in a polynomial of total degree ≤ bound vanishes
        return Ok(ExactScalar::zero());
    }
    let sym = sym_basis(m, bound)?;
    let node = |lambda: &[u32]| -> Vec<i64> {
        (0..m)
            .map(|i| {
                let part = lambda.get(i).copied().unwrap_or(0) as i64;
                part + (m - i) as i64
            })
            .collect()
    };
    let rhs: Vec<ExactScalar> = sym.basis.iter().map(|lambda| f(&node(lambda))).collect();
    let coeffs: Vec<ExactScalar> = sym
        .inverse
        .iter()
        .map(|row| {
            let mut acc = ExactScalar::zero();
            for (c, v) in row.iter().zip(&rhs) {
                if !c.is_zero() && !v.is_zero() {
                    acc = &acc + &(c * v);
                }
            }
            acc
        })
        .collect();
    // consistency check at points outside the solve grid
    for shift in [1i64, 2] {
        let lambda = sym.basis.last().cloned().unwrap_or_default();
        let x: Vec<i64> = node(&lambda).iter().map(|v| v + shift).collect();
        let mut fitted = ExactScalar::zero();
        for (mu, c) in sym.basis.iter().zip(&coeffs) {
            fitted = &fitted + &(c * &monomial_symmetric_at(mu, &x));
        }
        if fitted != f(&x) {
            return Err(ExactAlgError::InterpolationInconsistent(format!(
                "fitted symmetric polynomial disagrees with a fresh evaluation at {:?}",
                x
            )));
        }
    }
    Ok(coeffs[sym.ones_idx].clone())
}

/// Partition basis and inverted evaluation matrix for
/// [`symmetric_multilinear_coeff`], cached per `(m, bound)` — the matrix
/// depends only on the node scheme, and inverting it once turns every
/// subsequent extraction into a single matrix–vector product.
struct SymBasis {
    basis: Vec<Vec<u32>>,
    inverse: Vec<Vec<ExactScalar>>,
    ones_idx: usize,
}

fn sym_basis(m: usize, bound: usize) -> Result<Arc<SymBasis>, ExactAlgError> {
    static CACHE: Lazy<Mutex<HashMap<(usize, usize), Arc<SymBasis>>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(hit) = CACHE.lock().unwrap().get(&(m, bound)) {
        return Ok(hit.clone());
    }
    let basis = partitions_up_to(bound, m);
    let node = |lambda: &[u32]| -> Vec<i64> {
        (0..m)
            .map(|i| {
                let part = lambda.get(i).copied().unwrap_or(0) as i64;
                part + (m - i) as i64
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(basis.len());
    let mut seen = BTreeSet::new();
    for lambda in &basis {
        let x = node(lambda);
        assert!(seen.insert(x.clone()), "duplicate interpolation node");
        rows.push(basis.iter().map(|mu| monomial_symmetric_at(mu, &x)).collect::<Vec<_>>());
    }
    let inverse = invert_matrix(&rows).ok_or_else(|| {
        ExactAlgError::InterpolationInconsistent(
            "singular partition-basis interpolation matrix".into(),
        )
    })?;
    let ones = vec![1u32; m];
    let ones_idx = basis
        .iter()
        .position(|lambda| *lambda == ones)
        .expect("multilinear partition present when m <= bound");
    let entry = Arc::new(SymBasis { basis, inverse, ones_idx });
    CACHE.lock().unwrap().insert((m, bound), entry.clone());
    Ok(entry)
}

/// Gauss–Jordan inverse of a square exact matrix; `None` when singular.
fn invert_matrix(a: &[Vec<ExactScalar>]) -> Option<Vec<Vec<ExactScalar>>> {
    let n = a.len();
    let mut m: Vec<Vec<ExactScalar>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { ExactScalar::one() } else { ExactScalar::zero() });
            }
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for j in col..2 * n {
            m[col][j] = &m[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for j in col..2 * n {
                    let delta = &factor * &m[col][j];
                    m[r][j] = &m[r][j] - &delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}
