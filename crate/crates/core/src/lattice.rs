//! Complete rational lattices in `R^d`, the fixed fundamental domain
//! spanned by the chosen basis, and the metric constants derived from it.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::math;
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    ZeroDim,
    ShapeMismatch,
    DegenerateBasis,
}

impl core::fmt::Display for LatticeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LatticeError::ZeroDim => write!(f, "lattice dimension must be at least 1"),
            LatticeError::ShapeMismatch => {
                write!(f, "basis must consist of d vectors of length d")
            }
            LatticeError::DegenerateBasis => {
                write!(f, "basis vectors are linearly dependent; not a complete lattice")
            }
        }
    }
}

/// A complete lattice `Lambda` in `R^d` with a fixed rational basis.
///
/// The basis is fixed once at construction; the half-open fundamental
/// domain `F = {sum x_i lambda_i | 0 <= x_i < 1}` is defined relative
/// to it. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    /// `basis[i]` is the vector `lambda_i`.
    basis: Vec<Vec<Rat>>,
    /// Basis matrix `A` with columns `lambda_i`.
    a_mat: Vec<Vec<Rat>>,
    a_inv: Vec<Vec<Rat>>,
    gram: Vec<Vec<Rat>>,
    a_mat_f: Vec<Vec<f64>>,
    a_inv_f: Vec<Vec<f64>>,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

impl Eq for Lattice {}

/// Derived constants of the closed fundamental domain: exact volume,
/// diameter `R_F` and centered inradius `r_F`. The radii may be
/// irrational; their squares are kept exact.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    pub volume: Rat,
    pub diameter: f64,
    pub diameter_sq: Rat,
    pub inradius: f64,
    pub inradius_sq: Rat,
}

impl Lattice {
    pub fn new(basis: Vec<Vec<Rat>>) -> Result<Self, LatticeError> {
        let dim = basis.len();
        if dim == 0 {
            return Err(LatticeError::ZeroDim);
        }
        if basis.iter().any(|v| v.len() != dim) {
            return Err(LatticeError::ShapeMismatch);
        }
        let a_mat: Vec<Vec<Rat>> = (0..dim)
            .map(|r| (0..dim).map(|c| basis[c][r].clone()).collect())
            .collect();
        let a_inv = rat::inverse(&a_mat).ok_or(LatticeError::DegenerateBasis)?;
        let gram: Vec<Vec<Rat>> = (0..dim)
            .map(|i| (0..dim).map(|j| rat::dot(&basis[i], &basis[j])).collect())
            .collect();
        let a_mat_f = rat::to_f64_mat(&a_mat);
        let a_inv_f = rat::to_f64_mat(&a_inv);
        Ok(Lattice {
            dim,
            basis,
            a_mat,
            a_inv,
            gram,
            a_mat_f,
            a_inv_f,
        })
    }

    /// The integer lattice `Z^d`.
    pub fn standard(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { rat::rat_i(1) } else { rat::rat_i(0) })
                    .collect()
            })
            .collect();
        Lattice::new(basis).expect("standard basis is nondegenerate")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.basis
    }

    pub fn gram(&self) -> &[Vec<Rat>] {
        &self.gram
    }

    pub fn basis_matrix(&self) -> &[Vec<Rat>] {
        &self.a_mat
    }

    pub fn basis_matrix_inv(&self) -> &[Vec<Rat>] {
        &self.a_inv
    }

    pub fn basis_matrix_f64(&self) -> &[Vec<f64>] {
        &self.a_mat_f
    }

    pub fn basis_matrix_inv_f64(&self) -> &[Vec<f64>] {
        &self.a_inv_f
    }

    /// Lattice coordinates of a point: `y = A^{-1} x`.
    pub fn to_lattice_coords(&self, x: &[Rat]) -> Vec<Rat> {
        rat::mat_vec(&self.a_inv, x)
    }

    pub fn to_lattice_coords_f64(&self, x: &[f64]) -> Vec<f64> {
        crate::linalg::mat_vec(&self.a_inv_f, x)
    }

    pub fn from_lattice_coords(&self, y: &[Rat]) -> Vec<Rat> {
        rat::mat_vec(&self.a_mat, y)
    }

    pub fn from_lattice_coords_f64(&self, y: &[f64]) -> Vec<f64> {
        crate::linalg::mat_vec(&self.a_mat_f, y)
    }

    /// The lattice vector with integer coordinates `k`: `sum k_i lambda_i`.
    pub fn vector(&self, k: &[BigInt]) -> Vec<Rat> {
        let mut out = rat::zeros(self.dim);
        for (i, ki) in k.iter().enumerate() {
            if ki.is_zero() {
                continue;
            }
            let kr = Rat::from_integer(ki.clone());
            for (o, b) in out.iter_mut().zip(&self.basis[i]) {
                *o += b * &kr;
            }
        }
        out
    }

    pub fn vector_i64(&self, k: &[i64]) -> Vec<Rat> {
        let kb: Vec<BigInt> = k.iter().map(|&x| BigInt::from(x)).collect();
        self.vector(&kb)
    }

    /// Project `x` into the half-open fundamental domain. Returns the
    /// representative and the integer coordinates of the lattice vector
    /// `lambda` with `x = rep + lambda`.
    pub fn reduce(&self, x: &[Rat]) -> (Vec<Rat>, Vec<BigInt>) {
        let y = self.to_lattice_coords(x);
        let k: Vec<BigInt> = y.iter().map(|c| c.floor().to_integer()).collect();
        let lam = self.vector(&k);
        let rep = rat::sub(x, &lam);
        (rep, k)
    }

    pub fn reduce_f64(&self, x: &[f64]) -> (Vec<f64>, Vec<i64>) {
        let y = self.to_lattice_coords_f64(x);
        let k: Vec<i64> = y.iter().map(|c| math::floor(*c) as i64).collect();
        let lamf: Vec<f64> = {
            let kr: Vec<f64> = k.iter().map(|&v| v as f64).collect();
            self.from_lattice_coords_f64(&kr)
        };
        let rep: Vec<f64> = x.iter().zip(&lamf).map(|(a, b)| a - b).collect();
        (rep, k)
    }

    /// Whether `x` lies in the half-open fundamental domain.
    pub fn contains_in_domain(&self, x: &[Rat]) -> bool {
        self.to_lattice_coords(x)
            .iter()
            .all(|c| !c.is_negative() && c < &rat::rat_i(1))
    }

    pub fn volume(&self) -> Rat {
        rat::det(&self.a_mat).abs()
    }

    pub fn domain_constants(&self) -> FundamentalDomain {
        // Diameter: max distance between two vertices of the closed
        // parallelepiped. Vertex differences are signed subset sums of
        // the basis, i.e. sum sigma_i lambda_i with sigma in {-1,0,1}.
        let d = self.dim;
        let mut diameter_sq = Rat::zero();
        let mut sigma = alloc::vec![-1i8; d];
        loop {
            let mut v = rat::zeros(d);
            for i in 0..d {
                match sigma[i] {
                    1 => v = rat::add(&v, &self.basis[i]),
                    -1 => v = rat::sub(&v, &self.basis[i]),
                    _ => {}
                }
            }
            let n = rat::norm_sq(&v);
            if n > diameter_sq {
                diameter_sq = n;
            }
            // next sign vector
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                if sigma[i] < 1 {
                    sigma[i] += 1;
                    break;
                }
                sigma[i] = -1;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        // Centered inradius: distance from the center to facet i is
        // 1 / (2 * ||row_i(A^{-1})||).
        let mut inradius_sq: Option<Rat> = None;
        for row in &self.a_inv {
            let cand = Rat::new(BigInt::from(1), BigInt::from(4)) / rat::norm_sq(row);
            if inradius_sq.as_ref().map_or(true, |cur| &cand < cur) {
                inradius_sq = Some(cand);
            }
        }
        let inradius_sq = inradius_sq.expect("dim >= 1");
        FundamentalDomain {
            volume: self.volume(),
            diameter: math::sqrt(rat::to_f64(&diameter_sq)),
            diameter_sq,
            inradius: math::sqrt(rat::to_f64(&inradius_sq)),
            inradius_sq,
        }
    }

    /// Exact squared length of a shortest nonzero lattice vector.
    pub fn shortest_vector_norm_sq(&self) -> Rat {
        let d = self.dim;
        let min_basis: Rat = (0..d)
            .map(|i| rat::norm_sq(&self.basis[i]))
            .min()
            .expect("dim >= 1");
        let radius = math::sqrt(rat::to_f64(&min_basis)) * (1.0 + 1e-12);
        let mut best = min_basis;
        for k in self.points_in_ball(&alloc::vec![0.0; d], radius) {
            if k.iter().all(|&c| c == 0) {
                continue;
            }
            let n = rat::norm_sq(&self.vector_i64(&k));
            if n < best {
                best = n;
            }
        }
        best
    }

    /// Integer coordinates of all lattice vectors within `radius` of
    /// `center` (conservative: never misses, may include a thin shell
    /// beyond the radius).
    pub fn points_in_ball(&self, center: &[f64], radius: f64) -> Vec<Vec<i64>> {
        let d = self.dim;
        let slack = 1e-9 * (1.0 + math::abs(radius)) + 1e-9 * math::norm(center);
        let y = self.to_lattice_coords_f64(center);
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let row_norm = math::norm(&self.a_inv_f[i]);
            let r = row_norm * (radius + slack);
            lo.push(math::floor(y[i] - r) as i64);
            hi.push(math::ceil(y[i] + r) as i64);
        }
        let mut out = Vec::new();
        let mut k: Vec<i64> = lo.clone();
        'outer: loop {
            let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
            let p = self.from_lattice_coords_f64(&kf);
            if math::dist(&p, center) <= radius + slack {
                out.push(k.clone());
            }
            let mut i = 0;
            loop {
                if i == d {
                    break 'outer;
                }
                if k[i] < hi[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = lo[i];
                i += 1;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};
    use alloc::vec;

    fn lat_z() -> Lattice {
        Lattice::standard(1)
    }

    fn lat_rect() -> Lattice {
        Lattice::new(vec![
            vec![rat_i(1), rat_i(0)],
            vec![rat_i(0), rat_i(2)],
        ])
        .unwrap()
    }

    #[test]
    fn reduce_examples() {
        let l = lat_z();
        let (p, k) = l.reduce(&[rat_i(0)]);
        assert_eq!(p, vec![rat_i(0)]);
        assert_eq!(k, vec![num_bigint::BigInt::from(0)]);

        let (p, k) = l.reduce(&[rat(7, 4)]);
        assert_eq!(p, vec![rat(3, 4)]);
        assert_eq!(k, vec![num_bigint::BigInt::from(1)]);

        let l2 = lat_rect();
        let (p, k) = l2.reduce(&[rat(3, 2), rat(-1, 2)]);
        assert_eq!(p, vec![rat(1, 2), rat(3, 2)]);
        // lambda = (1, -2) = 1*lambda_1 + (-1)*lambda_2
        assert_eq!(l2.vector(&k), vec![rat_i(1), rat_i(-2)]);
    }

    #[test]
    fn domain_constants_examples() {
        let f = lat_z().domain_constants();
        assert_eq!(f.volume, rat_i(1));
        assert_eq!(f.diameter_sq, rat_i(1));
        assert_eq!(f.inradius_sq, rat(1, 4));

        let f = lat_rect().domain_constants();
        assert_eq!(f.volume, rat_i(2));
        assert_eq!(f.diameter_sq, rat_i(5));
        assert_eq!(f.inradius_sq, rat(1, 4));
    }

    #[test]
    fn domain_constants_sheared() {
        // Basis {(1,0),(1,1)}: diameter from enumerating vertex pairs is
        // sqrt(5), between 0 and lambda_1 + lambda_2 = (2,1).
        let l = Lattice::new(vec![
            vec![rat_i(1), rat_i(0)],
            vec![rat_i(1), rat_i(1)],
        ])
        .unwrap();
        let f = l.domain_constants();
        assert_eq!(f.volume, rat_i(1));
        assert_eq!(f.diameter_sq, rat_i(5));
    }

    #[test]
    fn degenerate_basis_rejected() {
        let r = Lattice::new(vec![
            vec![rat_i(1), rat_i(1)],
            vec![rat_i(2), rat_i(2)],
        ]);
        assert_eq!(r.unwrap_err(), LatticeError::DegenerateBasis);
    }

    #[test]
    fn shortest_vector() {
        assert_eq!(lat_z().shortest_vector_norm_sq(), rat_i(1));
        assert_eq!(lat_rect().shortest_vector_norm_sq(), rat_i(1));
        let sheared = Lattice::new(vec![
            vec![rat_i(5), rat_i(0)],
            vec![rat_i(4), rat_i(1)],
        ])
        .unwrap();
        // (4,1) - (5,0) = (-1,1) has squared length 2.
        assert_eq!(sheared.shortest_vector_norm_sq(), rat_i(2));
    }

    #[test]
    fn reduce_is_idempotent_and_periodic() {
        let l = lat_rect();
        let x = vec![rat(13, 7), rat(-22, 5)];
        let (p, _) = l.reduce(&x);
        let (p2, k2) = l.reduce(&p);
        assert_eq!(p2, p);
        assert!(k2.iter().all(|c| c == &num_bigint::BigInt::from(0)));
        let shifted = rat::add(&x, &l.vector_i64(&[3, -2]));
        assert_eq!(l.reduce(&shifted).0, p);
    }
}
