//! Finite-difference solver for the periodic real Monge-Ampère
//! equation `det(b + D²φ) = det(b)·e^f` on ℝ^d/Λ with mean-zero φ.
//!
//! Damped Newton on the log form, with second-order central
//! differences in lattice coordinates pulled back through the basis,
//! BiCGStab with Jacobi preconditioning on the mean-zero subspace, and
//! an Armijo line search that also guards positivity of `b + D²φ`.

use alloc::vec;
use alloc::vec::Vec;


use crate::green::{GreenData, GreenError, GreenFunction};
use crate::linalg;
use crate::math;
use crate::rat;

#[derive(Debug, Clone, PartialEq)]
pub enum MaError {
    Green(GreenError),
    /// grid_n must be at least 8.
    GridTooCoarse,
    /// Exponentials of the density would overflow (range > 700).
    RangeError,
    /// Sample count does not match grid_n^d.
    ShapeMismatch,
    /// Damping could not restore positivity / descent.
    StepFailure { iteration: usize },
    /// Residual still above tolerance after max_iters.
    NonConvergence { residual: f64 },
    /// The interpolated solution loses convexity off-grid.
    RefineGrid,
}

impl From<GreenError> for MaError {
    fn from(e: GreenError) -> Self {
        MaError::Green(e)
    }
}

impl core::fmt::Display for MaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MaError::Green(e) => write!(f, "{e}"),
            MaError::GridTooCoarse => write!(f, "grid_n must be at least 8"),
            MaError::RangeError => write!(f, "density exponent range exceeds 700"),
            MaError::ShapeMismatch => write!(f, "sample count does not match grid_n^d"),
            MaError::StepFailure { iteration } => write!(
                f,
                "Newton step failed at iteration {iteration}; refine the grid or density"
            ),
            MaError::NonConvergence { residual } => {
                write!(f, "no convergence; last residual {residual}")
            }
            MaError::RefineGrid => write!(f, "interpolated solution loses convexity; refine grid"),
        }
    }
}

/// A normalized problem: solve for mean-zero φ with
/// `det(b + D²φ) = det(b)·e^f`, where `f` is sampled on the uniform
/// `grid_n^d` lattice-coordinate grid (row-major, first coordinate
/// slowest) and `e^f` has grid mean 1.
#[derive(Debug, Clone)]
pub struct MaProblem {
    data: GreenData,
    grid_n: usize,
    f: Vec<f64>,
    normalized: bool,
}

impl MaProblem {
    pub fn data(&self) -> &GreenData {
        &self.data
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }
}

/// Shift `f_raw` by a constant so the torus integral of `e^f` equals
/// the domain volume (grid mean of `e^f` becomes 1).
pub fn normalize_density(
    data: &GreenData,
    f_raw: &[f64],
    grid_n: usize,
) -> Result<MaProblem, MaError> {
    if grid_n < 8 {
        return Err(MaError::GridTooCoarse);
    }
    let total = grid_n.pow(data.dim() as u32);
    if f_raw.len() != total {
        return Err(MaError::ShapeMismatch);
    }
    let lo = f_raw.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = f_raw.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !(lo.is_finite() && hi.is_finite()) || hi - lo > 700.0 {
        return Err(MaError::RangeError);
    }
    // subtract the max before exponentiating, for range safety
    let mean: f64 = f_raw.iter().map(|&v| math::exp(v - hi)).sum::<f64>() / total as f64;
    let shift = hi + math::ln(mean);
    let f: Vec<f64> = f_raw.iter().map(|&v| v - shift).collect();
    Ok(MaProblem { data: data.clone(), grid_n, f, normalized: true })
}

#[derive(Debug, Clone)]
pub struct MaSolution {
    pub phi: Vec<f64>,
    pub residual_inf: f64,
    pub newton_iters: usize,
    pub min_eig: f64,
}

struct Grid {
    dim: usize,
    n: usize,
    strides: Vec<usize>,
    total: usize,
}

impl Grid {
    fn new(dim: usize, n: usize) -> Self {
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * n;
        }
        Grid { dim, n, strides, total: n.pow(dim as u32) }
    }

}

#[inline]
fn shifted_index(g: &Grid, idx: usize, axis: usize, by: i64) -> usize {
    let s = g.strides[axis];
    let coord = (idx / s) % g.n;
    let new = (coord as i64 + by).rem_euclid(g.n as i64) as usize;
    idx - coord * s + new * s
}

/// Second-order periodic central differences of `phi` in lattice
/// coordinates at grid point `idx` (matrix `D²_y φ`).
fn hessian_y(g: &Grid, phi: &[f64], idx: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / g.n as f64;
    let h2 = h * h;
    let d = g.dim;
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        let p = phi[shifted_index(g, idx, i, 1)];
        let m = phi[shifted_index(g, idx, i, -1)];
        out[i][i] = (p - 2.0 * phi[idx] + m) / h2;
        for j in i + 1..d {
            let pp = phi[shifted_index(g, shifted_index(g, idx, i, 1), j, 1)];
            let pm = phi[shifted_index(g, shifted_index(g, idx, i, 1), j, -1)];
            let mp = phi[shifted_index(g, shifted_index(g, idx, i, -1), j, 1)];
            let mm = phi[shifted_index(g, shifted_index(g, idx, i, -1), j, -1)];
            let v = (pp - pm - mp + mm) / (4.0 * h2);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

fn subtract_mean(v: &mut [f64]) {
    let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

struct Discretization {
    grid: Grid,
    b: Vec<Vec<f64>>,
    det_b: f64,
    a_inv: Vec<Vec<f64>>,
    a_inv_t: Vec<Vec<f64>>,
}

impl Discretization {
    fn new(data: &GreenData, grid_n: usize) -> Self {
        let b = rat::to_f64_mat(data.b());
        let det_b = linalg::det(&b);
        let a_inv = data.lattice().basis_matrix_inv_f64().to_vec();
        let a_inv_t = linalg::transpose(&a_inv);
        Discretization { grid: Grid::new(data.dim(), grid_n), b, det_b, a_inv, a_inv_t }
    }

    /// `M = b + (A⁻¹)ᵀ D²_y φ A⁻¹` at grid point `idx`.
    fn metric(&self, phi: &[f64], idx: usize) -> Vec<Vec<f64>> {
        let hy = hessian_y(&self.grid, phi, idx);
        let hx = linalg::mat_mul(&linalg::mat_mul(&self.a_inv_t, &hy), &self.a_inv);
        let d = self.grid.dim;
        let mut m = self.b.clone();
        for i in 0..d {
            for j in 0..d {
                m[i][j] += hx[i][j];
            }
        }
        m
    }
}

/// Max over the grid of `|det(b + D²φ) − det(b)·e^f|`.
pub fn residual(p: &MaProblem, phi: &[f64]) -> Result<f64, MaError> {
    let disc = Discretization::new(&p.data, p.grid_n);
    if phi.len() != disc.grid.total {
        return Err(MaError::ShapeMismatch);
    }
    let mut worst = 0.0f64;
    for idx in 0..disc.grid.total {
        let det = linalg::det(&disc.metric(phi, idx));
        let r = math::abs(det - disc.det_b * math::exp(p.f[idx]));
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// One full evaluation pass: log-residual vector
/// `F = log det(M) − log det(b) − f`, the det residual, and the
/// smallest metric eigenvalue over the grid.
fn evaluate(disc: &Discretization, f: &[f64], phi: &[f64]) -> (Vec<f64>, f64, f64) {
    let total = disc.grid.total;
    let mut big_f = vec![0.0; total];
    let mut res = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let log_det_b = math::ln(disc.det_b);
    for idx in 0..total {
        let m = disc.metric(phi, idx);
        let eig = linalg::min_eigenvalue(&m);
        if eig < min_eig {
            min_eig = eig;
        }
        let det = linalg::det(&m);
        if det <= 0.0 {
            big_f[idx] = f64::NAN;
            res = f64::INFINITY;
            continue;
        }
        big_f[idx] = math::ln(det) - log_det_b - f[idx];
        let r = math::abs(det - disc.det_b * math::exp(f[idx]));
        if r > res {
            res = r;
        }
    }
    (big_f, res, min_eig)
}

/// Apply the Newton linearization `δ ↦ trace(W·D²_y δ)` with
/// `W = A⁻¹ M⁻¹ (A⁻¹)ᵀ` frozen at the current iterate.
fn apply_linearization(disc: &Discretization, w: &[Vec<Vec<f64>>], delta: &[f64], out: &mut [f64]) {
    let g = &disc.grid;
    let d = g.dim;
    let h = 1.0 / g.n as f64;
    let h2 = h * h;
    for idx in 0..g.total {
        let wi = &w[idx];
        let mut acc = 0.0;
        for i in 0..d {
            let p = delta[shifted_index(g, idx, i, 1)];
            let m = delta[shifted_index(g, idx, i, -1)];
            acc += wi[i][i] * (p - 2.0 * delta[idx] + m) / h2;
            for j in i + 1..d {
                let pp = delta[shifted_index(g, shifted_index(g, idx, i, 1), j, 1)];
                let pm = delta[shifted_index(g, shifted_index(g, idx, i, 1), j, -1)];
                let mp = delta[shifted_index(g, shifted_index(g, idx, i, -1), j, 1)];
                let mm = delta[shifted_index(g, shifted_index(g, idx, i, -1), j, -1)];
                acc += 2.0 * wi[i][j] * (pp - pm - mp + mm) / (4.0 * h2);
            }
        }
        out[idx] = acc;
    }
}

/// BiCGStab on the mean-zero subspace with Jacobi preconditioning.
fn solve_linear(
    disc: &Discretization,
    w: &[Vec<Vec<f64>>],
    rhs: &[f64],
    rel_tol: f64,
) -> Vec<f64> {
    let total = rhs.len();
    let h2 = 1.0 / (disc.grid.n as f64 * disc.grid.n as f64);
    // diagonal of the operator: −2 Σ_i w_ii / h²
    let diag: Vec<f64> = w
        .iter()
        .map(|wi| {
            let mut s = 0.0;
            for i in 0..disc.grid.dim {
                s += wi[i][i];
            }
            -2.0 * s / h2
        })
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().zip(&diag).map(|(x, d)| x / d).collect();
        subtract_mean(&mut out);
        out
    };
    let apply = |v: &[f64], out: &mut Vec<f64>| {
        apply_linearization(disc, w, v, out);
        subtract_mean(out);
    };

    let mut b = rhs.to_vec();
    subtract_mean(&mut b);
    let bnorm = math::sqrt(math::hypot_sq(&b)).max(1e-300);

    let mut x = vec![0.0; total];
    let mut r = b.clone();
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; total];
    let mut pvec = vec![0.0; total];
    let mut t = vec![0.0; total];
    let max_it = 40 * disc.grid.n * disc.grid.dim + 200;
    for _ in 0..max_it {
        let rnorm = math::sqrt(math::hypot_sq(&r));
        if rnorm <= rel_tol * bnorm {
            break;
        }
        let rho_new = math::dot(&r0, &r);
        if math::abs(rho_new) < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..total {
            pvec[i] = r[i] + beta * (pvec[i] - omega * v[i]);
        }
        let ph = precond(&pvec);
        apply(&ph, &mut v);
        alpha = rho / math::dot(&r0, &v);
        let s: Vec<f64> = (0..total).map(|i| r[i] - alpha * v[i]).collect();
        let sh = precond(&s);
        apply(&sh, &mut t);
        let tt = math::hypot_sq(&t);
        omega = if tt > 0.0 { math::dot(&t, &s) / tt } else { 0.0 };
        for i in 0..total {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega == 0.0 {
            break;
        }
    }
    subtract_mean(&mut x);
    x
}

/// Damped Newton solve; `tol` bounds the sup-norm determinant
/// residual, `max_iters` the Newton iterations.
pub fn solve(p: &MaProblem, tol: f64, max_iters: usize) -> Result<MaSolution, MaError> {
    if !p.normalized {
        // callers are expected to go through normalize_density
        return Err(MaError::RangeError);
    }
    if !p.data.is_ample() {
        return Err(MaError::Green(GreenError::NotAmple));
    }
    let disc = Discretization::new(&p.data, p.grid_n);
    let total = disc.grid.total;
    let mut phi = vec![0.0f64; total];
    let lin_tol = 1e-10;

    let (mut big_f, mut res, mut min_eig) = evaluate(&disc, &p.f, &phi);
    let mut iters = 0usize;
    while res > tol {
        if iters >= max_iters {
            return Err(MaError::NonConvergence { residual: res });
        }
        // freeze W = A⁻¹ M⁻¹ (A⁻¹)ᵀ at the current iterate
        let mut w = Vec::with_capacity(total);
        for idx in 0..total {
            let m = disc.metric(&phi, idx);
            let m_inv = linalg::inverse(&m).ok_or(MaError::StepFailure { iteration: iters })?;
            w.push(linalg::mat_mul(
                &linalg::mat_mul(&disc.a_inv, &m_inv),
                &disc.a_inv_t,
            ));
        }
        let rhs: Vec<f64> = big_f.iter().map(|&v| -v).collect();
        let delta = solve_linear(&disc, &w, &rhs, lin_tol);

        let f_norm = math::max_abs(&big_f);
        let mut step = 1.0f64;
        let mut accepted = false;
        for _ in 0..=30 {
            let mut cand: Vec<f64> = (0..total).map(|i| phi[i] + step * delta[i]).collect();
            subtract_mean(&mut cand);
            let (fc, rc, mc) = evaluate(&disc, &p.f, &cand);
            let fc_norm = math::max_abs(&fc);
            if mc > 0.0 && fc_norm.is_finite() && fc_norm <= f_norm * (1.0 - 0.25 * step) {
                phi = cand;
                big_f = fc;
                res = rc;
                min_eig = mc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(MaError::StepFailure { iteration: iters });
        }
        iters += 1;
    }
    subtract_mean(&mut phi);
    Ok(MaSolution { phi, residual_inf: res, newton_iters: iters, min_eig })
}

/// Turn a converged solution into the Green function
/// `g = g_can + φ` with a spectrally interpolated periodic part, and
/// verify strict convexity off-grid.
pub fn solution_to_green(p: &MaProblem, s: &MaSolution) -> Result<GreenFunction, MaError> {
    let g = GreenFunction::with_grid(p.data.clone(), p.grid_n, &s.phi);
    // probe between grid points: an off-grid convexity failure means
    // the grid is too coarse for this density
    let probe_n = (2 * p.grid_n).min(192 / p.data.dim().max(1));
    match crate::green::hessian_bounds(&g, probe_n.max(8), 0.0) {
        Ok(_) => Ok(g),
        Err(GreenError::NotStrictlyConvex { .. }) => Err(MaError::RefineGrid),
        Err(e) => Err(MaError::Green(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::rat::{rat_i, zeros};

    fn data_1d() -> GreenData {
        GreenData::new(Lattice::standard(1), vec![vec![rat_i(1)]], vec![rat_i(0)]).unwrap()
    }

    fn ident(d: usize) -> Vec<Vec<crate::rat::Rat>> {
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { rat_i(1) } else { rat_i(0) }).collect())
            .collect()
    }

    fn grid_1d(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / n as f64)).collect()
    }

    #[test]
    fn normalization() {
        let data = data_1d();
        let p = normalize_density(&data, &vec![5.0; 16], 16).unwrap();
        assert!(math::max_abs(&p.f) < 1e-14);

        let raw = grid_1d(64, |x| 0.1 * math::cos(math::TAU * x));
        let p2 = normalize_density(&data, &raw, 64).unwrap();
        let mean: f64 = p2.f.iter().map(|&v| math::exp(v)).sum::<f64>() / 64.0;
        assert!((mean - 1.0).abs() < 1e-14);
        // the constant is ≈ log I0(0.1) ≈ 0.0025
        let shift = raw[0] - p2.f[0];
        assert!((shift - 0.0025).abs() < 2e-4);

        assert!(matches!(
            normalize_density(&data, &vec![0.0; 4], 4),
            Err(MaError::GridTooCoarse)
        ));
    }

    #[test]
    fn trivial_density_solves_immediately() {
        let data = data_1d();
        let p = normalize_density(&data, &vec![0.0; 32], 32).unwrap();
        let s = solve(&p, 1e-9, 50).unwrap();
        assert!(s.newton_iters <= 1);
        assert!(math::max_abs(&s.phi) <= 1e-12);
        assert!(s.min_eig > 0.5);
        assert_eq!(residual(&p, &s.phi).unwrap(), s.residual_inf);
    }

    #[test]
    fn manufactured_1d() {
        let data = data_1d();
        let n = 64;
        let phi_star = grid_1d(n, |x| 0.01 * math::cos(math::TAU * x));
        let f_star = grid_1d(n, |x| {
            math::ln(1.0 - 0.04 * core::f64::consts::PI * core::f64::consts::PI
                * math::cos(math::TAU * x))
        });
        let p = normalize_density(&data, &f_star, n).unwrap();
        let s = solve(&p, 1e-11, 50).unwrap();
        let err = s
            .phi
            .iter()
            .zip(&phi_star)
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "error {err}");
        assert!(s.min_eig > 0.5);
        let mean: f64 = s.phi.iter().sum::<f64>();
        assert!(math::abs(mean / n as f64) < 1e-14);
    }

    #[test]
    fn manufactured_2d() {
        let data = GreenData::new(Lattice::standard(2), ident(2), zeros(2)).unwrap();
        let n = 32;
        let pi2 = math::TAU * math::TAU / 4.0 * 4.0; // (2π)² = 4π²
        let mut phi_star = Vec::with_capacity(n * n);
        let mut f_star = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                let c1 = math::cos(math::TAU * x);
                let c2 = math::cos(math::TAU * y);
                phi_star.push(0.005 * (c1 + c2));
                let h11 = 1.0 - 0.005 * pi2 * c1;
                let h22 = 1.0 - 0.005 * pi2 * c2;
                f_star.push(math::ln(h11 * h22));
            }
        }
        let p = normalize_density(&data, &f_star, n).unwrap();
        let s = solve(&p, 1e-11, 50).unwrap();
        let err = s
            .phi
            .iter()
            .zip(&phi_star)
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max);
        // the discrete solution and the interpolated f normalization
        // differ from φ* at O(h²)
        assert!(err < 5e-3, "error {err}");
        assert!(s.min_eig > 0.5);
    }

    #[test]
    fn grown_solution_feeds_green() {
        let data = data_1d();
        let n = 64;
        let raw = grid_1d(n, |x| 0.1 * math::cos(math::TAU * x));
        let p = normalize_density(&data, &raw, n).unwrap();
        let s = solve(&p, 1e-10, 50).unwrap();
        let g = solution_to_green(&p, &s).unwrap();
        // the solved metric realizes the prescribed density:
        // d!·det(D²g) ≈ det(b)·e^f
        let x = 0.37;
        let det = linalg::det(&g.hess(&[x]));
        let fx = 0.1 * math::cos(math::TAU * x) - (raw[0] - p.f[0]);
        assert!((det - math::exp(fx)).abs() < 1e-3);
    }
}
