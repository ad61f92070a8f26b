//! Green functions on the torus ℝ^d/Λ: quadratic canonical
//! representatives `q + c̃`, quasi-periodic evaluation, mixed Hessians,
//! the degree formula and convexity bounds.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::ToPrimitive;

use crate::lattice::Lattice;
use crate::linalg;
use crate::math;
use crate::periodic::{PeriodicFn, TrigPoly};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq)]
pub enum GreenError {
    /// Shapes of `b`/`c` do not match the lattice dimension.
    ShapeMismatch,
    /// `b` is not symmetric.
    NotSymmetric,
    /// `b` is not positive definite, so the bundle is not ample.
    NotAmple,
    /// Operands built over different lattices.
    LatticeMismatch,
    /// A sampled Hessian failed strict convexity.
    NotStrictlyConvex { min_eigenvalue: f64 },
}

impl core::fmt::Display for GreenError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GreenError::ShapeMismatch => write!(f, "b/c shapes do not match the lattice dimension"),
            GreenError::NotSymmetric => write!(f, "bilinear form b must be symmetric"),
            GreenError::NotAmple => write!(f, "bilinear form b must be positive definite"),
            GreenError::LatticeMismatch => write!(f, "operands use different lattices"),
            GreenError::NotStrictlyConvex { min_eigenvalue } => write!(
                f,
                "function is not strictly convex (sampled Hessian eigenvalue {min_eigenvalue})"
            ),
        }
    }
}

/// The data of a toric metric: a symmetric bilinear form `b` on ℝ^d
/// (Euclidean coordinates) and a linear map `c : Λ → ℚ` given by its
/// values on the basis vectors (lattice coordinates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenData {
    lattice: Lattice,
    b: Vec<Vec<Rat>>,
    c: Vec<Rat>,
    // cached: gradient of the linear extension c̃ in Euclidean coordinates
    c_tilde_grad: Vec<Rat>,
}

impl GreenData {
    pub fn new(lattice: Lattice, b: Vec<Vec<Rat>>, c: Vec<Rat>) -> Result<Self, GreenError> {
        let d = lattice.dim();
        if b.len() != d || b.iter().any(|row| row.len() != d) || c.len() != d {
            return Err(GreenError::ShapeMismatch);
        }
        for i in 0..d {
            for j in i + 1..d {
                if b[i][j] != b[j][i] {
                    return Err(GreenError::NotSymmetric);
                }
            }
        }
        // c̃(x) = c · A⁻¹x, so ∇c̃ = (A⁻¹)ᵀ c.
        let c_tilde_grad = rat::mat_vec(&rat::transpose(lattice.basis_matrix_inv()), &c);
        Ok(GreenData { lattice, b, c, c_tilde_grad })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn b(&self) -> &[Vec<Rat>] {
        &self.b
    }

    pub fn c(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_ample(&self) -> bool {
        rat::is_positive_definite(&self.b)
    }

    /// `q(x) = ½ b(x, x)`.
    pub fn q(&self, x: &[Rat]) -> Rat {
        rat::dot(x, &rat::mat_vec(&self.b, x)) / rat::rat_i(2)
    }

    /// `b(x, y)` as a bilinear form.
    pub fn b_pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        rat::dot(x, &rat::mat_vec(&self.b, y))
    }

    /// Linear extension of `c` to ℝ^d: `c̃(x) = c · A⁻¹x`.
    pub fn c_tilde(&self, x: &[Rat]) -> Rat {
        rat::dot(&self.c_tilde_grad, x)
    }

    pub fn c_tilde_grad(&self) -> &[Rat] {
        &self.c_tilde_grad
    }

    /// The affine cocycle `z_λ(x) = q(λ) + c(λ) + b(x, λ)` for λ ∈ Λ
    /// given in Euclidean coordinates.
    pub fn z(&self, lambda: &[Rat], x: &[Rat]) -> Rat {
        self.q(lambda) + self.c_tilde(lambda) + self.b_pair(x, lambda)
    }

    /// `H_q = d!·det(b)`.
    pub fn h_q(&self) -> Rat {
        Rat::from_integer(rat::factorial(self.dim())) * rat::det(&self.b)
    }

    /// Degree `vol(Λ)·H_q`; requires ampleness.
    pub fn degree(&self) -> Result<Rat, GreenError> {
        if !self.is_ample() {
            return Err(GreenError::NotAmple);
        }
        Ok(self.lattice.volume() * self.h_q())
    }
}

/// The Λ-periodic part of a Green function.
#[derive(Clone)]
pub enum PeriodicPart {
    Zero,
    Trig(TrigPoly),
    Custom(Arc<dyn PeriodicFn>),
}

impl core::fmt::Debug for PeriodicPart {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PeriodicPart::Zero => write!(f, "Zero"),
            PeriodicPart::Trig(p) => write!(f, "Trig({} terms)", p.terms().len()),
            PeriodicPart::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A Green function `g = g_can + periodic_part`, with
/// `g(x+λ) = g(x) + z_λ(x)` holding identically.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    data: GreenData,
    periodic: PeriodicPart,
}

/// The canonical quadratic representative `g_can = q + c̃`.
pub fn canonical_green(data: GreenData) -> GreenFunction {
    GreenFunction { data, periodic: PeriodicPart::Zero }
}

impl GreenFunction {
    pub fn with_trig(data: GreenData, p: TrigPoly) -> Self {
        assert_eq!(p.dim(), data.dim());
        let periodic = if p.is_zero() { PeriodicPart::Zero } else { PeriodicPart::Trig(p) };
        GreenFunction { data, periodic }
    }

    /// Grid-backed construction: `samples` on the uniform `n^d` grid in
    /// lattice coordinates (row-major, first coordinate slowest) are
    /// turned into their trigonometric interpolant.
    pub fn with_grid(data: GreenData, n: usize, samples: &[f64]) -> Self {
        let p = crate::periodic::trig_interpolate(data.dim(), n, samples);
        Self::with_trig(data, p)
    }

    pub fn with_custom(data: GreenData, p: Arc<dyn PeriodicFn>) -> Self {
        assert_eq!(p.dim(), data.dim());
        GreenFunction { data, periodic: PeriodicPart::Custom(p) }
    }

    pub fn data(&self) -> &GreenData {
        &self.data
    }

    pub fn periodic_part(&self) -> &PeriodicPart {
        &self.periodic
    }

    /// True when evaluation is exact rational (periodic part ≡ 0).
    pub fn is_exact(&self) -> bool {
        matches!(self.periodic, PeriodicPart::Zero)
    }

    fn periodic_ref(&self) -> Option<&dyn PeriodicFn> {
        match &self.periodic {
            PeriodicPart::Zero => None,
            PeriodicPart::Trig(p) => Some(p),
            PeriodicPart::Custom(p) => Some(p.as_ref()),
        }
    }

    fn lattice_coords_f(&self, x: &[f64]) -> Vec<f64> {
        linalg::mat_vec(self.data.lattice.basis_matrix_inv_f64(), x)
    }

    fn canonical_value_f(&self, x: &[f64]) -> f64 {
        let b = rat::to_f64_mat(&self.data.b);
        let q = 0.5 * math::dot(x, &linalg::mat_vec(&b, x));
        let lin = math::dot(&rat::to_f64_vec(&self.data.c_tilde_grad), x);
        q + lin
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.canonical_value_f(x);
        if let Some(p) = self.periodic_ref() {
            v += p.value(&self.lattice_coords_f(x));
        }
        v
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let b = rat::to_f64_mat(&self.data.b);
        let mut g = linalg::mat_vec(&b, x);
        let w = rat::to_f64_vec(&self.data.c_tilde_grad);
        for (gi, wi) in g.iter_mut().zip(&w) {
            *gi += wi;
        }
        if let Some(p) = self.periodic_ref() {
            // ∇_x = (A⁻¹)ᵀ ∇_y
            let gy = p.grad(&self.lattice_coords_f(x));
            let ainv_t = linalg::transpose(self.data.lattice.basis_matrix_inv_f64());
            let gx = linalg::mat_vec(&ainv_t, &gy);
            for (gi, pi) in g.iter_mut().zip(&gx) {
                *gi += pi;
            }
        }
        g
    }

    pub fn hess(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut h = rat::to_f64_mat(&self.data.b);
        if let Some(p) = self.periodic_ref() {
            // D²_x = (A⁻¹)ᵀ D²_y A⁻¹
            let hy = p.hess(&self.lattice_coords_f(x));
            let ainv = self.data.lattice.basis_matrix_inv_f64();
            let ainv_t = linalg::transpose(ainv);
            let hx = linalg::mat_mul(&linalg::mat_mul(&ainv_t, &hy), ainv);
            for i in 0..h.len() {
                for j in 0..h.len() {
                    h[i][j] += hx[i][j];
                }
            }
        }
        h
    }

    /// Exact value, available only for the canonical representative.
    pub fn value_rat(&self, x: &[Rat]) -> Option<Rat> {
        if !self.is_exact() {
            return None;
        }
        Some(self.data.q(x) + self.data.c_tilde(x))
    }

    /// Exact gradient, available only for the canonical representative.
    pub fn grad_rat(&self, x: &[Rat]) -> Option<Vec<Rat>> {
        if !self.is_exact() {
            return None;
        }
        Some(rat::add(&rat::mat_vec(&self.data.b, x), &self.data.c_tilde_grad))
    }
}

/// Conservative two-sided bounds `0 < h_g ≤ ∇_u∇_u g ≤ H_g` on the
/// directional second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianBounds {
    pub h_g: f64,
    pub big_h_g: f64,
}

/// Min/max Hessian eigenvalues of `g` over a `sample_n^d` grid in
/// lattice coordinates, widened by `safety` (fraction, default 0.1).
pub fn hessian_bounds(
    g: &GreenFunction,
    sample_n: usize,
    safety: f64,
) -> Result<HessianBounds, GreenError> {
    assert!(sample_n >= 1 && safety >= 0.0);
    let d = g.data.dim();
    let a_mat = g.data.lattice.basis_matrix_f64();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let total = sample_n.pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut y = vec![0.0; d];
        for axis in (0..d).rev() {
            y[axis] = (rem % sample_n) as f64 / sample_n as f64;
            rem /= sample_n;
        }
        let x = linalg::mat_vec(a_mat, &y);
        let eig = linalg::sym_eigenvalues(&g.hess(&x));
        if eig[0] < lo {
            lo = eig[0];
        }
        if eig[d - 1] > hi {
            hi = eig[d - 1];
        }
    }
    if lo <= 0.0 {
        return Err(GreenError::NotStrictlyConvex { min_eigenvalue: lo });
    }
    let mut h_g = lo * (1.0 - safety);
    let mut big_h_g = hi * (1.0 + safety);
    if h_g <= 0.0 {
        h_g = lo * 0.5;
    }
    if big_h_g <= h_g {
        big_h_g = h_g * (1.0 + f64::EPSILON * 8.0);
    }
    Ok(HessianBounds { h_g, big_h_g })
}

fn permutations_with_sign(d: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..d).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, sign: &mut i32, out: &mut Vec<(Vec<usize>, i32)>) {
        if k == 1 {
            out.push((perm.clone(), *sign));
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, sign, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
            *sign = -*sign;
        }
    }
    let mut sign = 1;
    heap(d, &mut perm, &mut sign, &mut out);
    out
}

/// The permutation-sum polarization of `d!·det(D²g)` in `d` Green
/// functions: `Σ_{μ,ν} sgn(μ)sgn(ν) Π_i (g_i)_{μ(i)ν(i)}(x)`.
pub fn mixed_hessian(gs: &[&GreenFunction], x: &[f64]) -> Result<f64, GreenError> {
    let d = x.len();
    if gs.len() != d || gs.iter().any(|g| g.data.dim() != d) {
        return Err(GreenError::ShapeMismatch);
    }
    if gs.iter().any(|g| g.data.lattice() != gs[0].data.lattice()) {
        return Err(GreenError::LatticeMismatch);
    }
    let hessians: Vec<Vec<Vec<f64>>> = gs.iter().map(|g| g.hess(x)).collect();
    let perms = permutations_with_sign(d);
    let mut acc = 0.0;
    for (mu, smu) in &perms {
        for (nu, snu) in &perms {
            let mut prod = (smu * snu) as f64;
            for i in 0..d {
                prod *= hessians[i][mu[i]][nu[i]];
            }
            acc += prod;
        }
    }
    Ok(acc)
}

/// Periodic trapezoid quadrature of the mixed Hessian over the torus:
/// the grid mean in lattice coordinates times `vol(Λ)`. Converges to
/// the degree as `grid_n` grows.
pub fn integrate_mixed_hessian(gs: &[&GreenFunction], grid_n: usize) -> Result<f64, GreenError> {
    assert!(grid_n >= 2);
    let d = gs.first().map(|g| g.data.dim()).unwrap_or(0);
    if d == 0 {
        return Err(GreenError::ShapeMismatch);
    }
    let a_mat = gs[0].data.lattice.basis_matrix_f64();
    let total = grid_n.pow(d as u32);
    let mut acc = 0.0;
    let mut y = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for axis in (0..d).rev() {
            y[axis] = (rem % grid_n) as f64 / grid_n as f64;
            rem /= grid_n;
        }
        let x = linalg::mat_vec(a_mat, &y);
        acc += mixed_hessian(gs, &x)?;
    }
    let vol = gs[0].data.lattice.volume().to_f64().unwrap();
    Ok(acc / total as f64 * vol)
}

impl GreenData {
    /// Convenience: exact `vol(Λ)` as f64.
    pub fn volume_f(&self) -> f64 {
        self.lattice.volume().to_f64().unwrap_or(f64::NAN)
    }
}
