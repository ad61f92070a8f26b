//! Exact rational scalars and small dense rational linear algebra.
//!
//! Everything that feeds the exact mass identity (lattice volumes, PL
//! pieces, cell and dual-polytope volumes) goes through this module;
//! floats only appear on the way in (via dyadic conversion) or on the
//! way out (for display and estimates).

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact dyadic rational equal to the given float. NaN/inf have no
/// rational value.
pub fn from_f64_exact(x: f64) -> Option<Rat> {
    Rat::from_f64(x)
}

/// `floor(x * den) / den`, computed exactly from the dyadic expansion
/// of `x`. This is the deterministic "round down to denominator `den`"
/// rule used by the PL rationalization.
pub fn floor_to_den(x: f64, den: &BigInt) -> Option<Rat> {
    let r = from_f64_exact(x)?;
    let scaled = r * Rat::from_integer(den.clone());
    Some(Rat::new(scaled.floor().to_integer(), den.clone()))
}

/// Nearest rational with denominator `den` (ties round down).
pub fn round_to_den(x: f64, den: &BigInt) -> Option<Rat> {
    floor_to_den(x + 0.5 / den.to_f64()?, den)
}

pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rat], s: &Rat) -> Vec<Rat> {
    a.iter().map(|x| x * s).collect()
}

pub fn norm_sq(a: &[Rat]) -> Rat {
    a.iter().map(|x| x * x).sum()
}

pub fn mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn transpose(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let rows = m.len();
    let cols = m[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i][j].clone()).collect())
        .collect()
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut result = Rat::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(p) => p,
            None => return Rat::zero(),
        };
        if pivot != col {
            a.swap(pivot, col);
            result = -result;
        }
        let p = a[col][col].clone();
        result *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let t = &a[col][c] * &factor;
                a[r][c] -= t;
            }
        }
    }
    result
}

/// Solve `m x = rhs` exactly. `None` when `m` is singular.
pub fn solve(m: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for c in col..=n {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..=n {
                let t = &a[col][c] * &factor;
                a[r][c] -= t;
            }
        }
    }
    Some((0..n).map(|r| a[r][n].clone()).collect())
}

/// Exact inverse; `None` when singular.
pub fn inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Rat> = (0..n)
            .map(|i| if i == j { Rat::one() } else { Rat::zero() })
            .collect();
        cols.push(solve(m, &e)?);
    }
    // cols[j] is the j-th column of the inverse.
    Some(transpose(&cols))
}

/// Affine rank of a point set (dimension of its affine hull).
pub fn affine_rank(points: &[Vec<Rat>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let diffs: Vec<Vec<Rat>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    matrix_rank(&diffs)
}

pub fn matrix_rank(rows_in: &[Vec<Rat>]) -> usize {
    if rows_in.is_empty() {
        return 0;
    }
    let mut rows: Vec<Vec<Rat>> = rows_in.to_vec();
    let cols = rows[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let pivot = match (row..rows.len()).find(|&r| !rows[r][col].is_zero()) {
            Some(p) => p,
            None => continue,
        };
        rows.swap(pivot, row);
        let p = rows[row][col].clone();
        for r in row + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &p;
            for c in col..cols {
                let t = &rows[row][c] * &factor;
                rows[r][c] -= t;
            }
        }
        row += 1;
        rank += 1;
        if row == rows.len() {
            break;
        }
    }
    rank
}

/// All leading principal minors strictly positive (Sylvester test).
pub fn is_positive_definite(m: &[Vec<Rat>]) -> bool {
    let n = m.len();
    (1..=n).all(|k| {
        let sub: Vec<Vec<Rat>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
        det(&sub).is_positive()
    })
}

pub fn to_f64_vec(v: &[Rat]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn to_f64_mat(m: &[Vec<Rat>]) -> Vec<Vec<f64>> {
    m.iter().map(|row| to_f64_vec(row)).collect()
}

pub fn zeros(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}
