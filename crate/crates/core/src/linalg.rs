//! Small dense f64 linear algebra: LU determinants/solves and Jacobi
//! eigenvalues for the symmetric matrices that show up in Hessian work.
//! Dimensions here are the torus dimension `d`, so everything is tiny.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut result = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| math::abs(a[x][col]).total_cmp(&math::abs(a[y][col])))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            result = -result;
        }
        result *= a[col][col];
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    result
}

pub fn solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| math::abs(a[x][col]).total_cmp(&math::abs(a[y][col])))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(pivot, col);
        let p = a[col][col];
        for c in col..=n {
            a[col][c] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..=n {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    Some((0..n).map(|r| a[r][n]).collect())
}

pub fn inverse(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        cols.push(solve(m, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| math::dot(row, v)).collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let p = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for l in 0..k {
            let av = a[i][l];
            if av == 0.0 {
                continue;
            }
            for j in 0..p {
                out[i][j] += av * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = m.len();
    let cols = m[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i][j]).collect())
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn sym_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    if n == 1 {
        return vec![m[0][0]];
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if math::abs(a[p][q]) < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

pub fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    sym_eigenvalues(m)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_2x2() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let e = sym_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn det_3x3() {
        let m = vec![
            vec![1.0, 2.0, 3.0],
            vec![0.0, 1.0, 4.0],
            vec![5.0, 6.0, 0.0],
        ];
        assert!((det(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_and_inverse() {
        let m = vec![vec![3.0, 1.0], vec![1.0, 2.0]];
        let x = solve(&m, &[5.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        let inv = inverse(&m).unwrap();
        let id = mat_mul(&m, &inv);
        assert!((id[0][0] - 1.0).abs() < 1e-12 && id[0][1].abs() < 1e-12);
    }
}
