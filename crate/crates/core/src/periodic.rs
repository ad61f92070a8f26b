//! ℤ^d-periodic functions in lattice coordinates: an evaluable trait,
//! trigonometric polynomials, and spectral interpolation of uniform
//! grid samples.
//!
//! Everything here works in lattice coordinates `y` (period 1 in each
//! coordinate); callers apply the basis chain rule when they need
//! Euclidean derivatives.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// A smooth ℤ^d-periodic function of the lattice coordinates, with
/// gradient and Hessian (required smoothness class ≥ 2).
pub trait PeriodicFn: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn grad(&self, y: &[f64]) -> Vec<f64>;
    fn hess(&self, y: &[f64]) -> Vec<Vec<f64>>;
}

/// One harmonic: `a·cos(2π k·y) + b·sin(2π k·y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub k: Vec<i64>,
    pub cos_coef: f64,
    pub sin_coef: f64,
}

/// A finite sum of harmonics in lattice coordinates.
#[derive(Debug, Clone, Default)]
pub struct TrigPoly {
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn new(dim: usize, terms: Vec<TrigTerm>) -> Self {
        for t in &terms {
            assert_eq!(t.k.len(), dim);
        }
        TrigPoly { dim, terms }
    }

    pub fn zero(dim: usize) -> Self {
        TrigPoly { dim, terms: Vec::new() }
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn phase(&self, term: &TrigTerm, y: &[f64]) -> f64 {
        let mut p = 0.0;
        for (ki, yi) in term.k.iter().zip(y) {
            p += *ki as f64 * yi;
        }
        math::TAU * p
    }
}

impl PeriodicFn for TrigPoly {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let p = self.phase(t, y);
            acc += t.cos_coef * math::cos(p) + t.sin_coef * math::sin(p);
        }
        acc
    }

    fn grad(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for t in &self.terms {
            let p = self.phase(t, y);
            let dp = math::TAU * (-t.cos_coef * math::sin(p) + t.sin_coef * math::cos(p));
            for (gi, ki) in g.iter_mut().zip(&t.k) {
                *gi += dp * *ki as f64;
            }
        }
        g
    }

    fn hess(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mut h = vec![vec![0.0; d]; d];
        for t in &self.terms {
            let p = self.phase(t, y);
            let dpp = -math::TAU * math::TAU
                * (t.cos_coef * math::cos(p) + t.sin_coef * math::sin(p));
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += dpp * t.k[i] as f64 * t.k[j] as f64;
                }
            }
        }
        h
    }
}

/// Trigonometric interpolation of real samples on the uniform `n^d`
/// grid `y = m/n`, `m ∈ {0..n-1}^d`, row-major with the first
/// coordinate slowest. The returned polynomial matches every sample
/// (up to roundoff) and is the minimal-bandwidth interpolant.
pub fn trig_interpolate(dim: usize, n: usize, samples: &[f64]) -> TrigPoly {
    assert!(n >= 1);
    let total = n.pow(dim as u32);
    assert_eq!(samples.len(), total);

    // Separable DFT, one axis at a time: c_j = (1/n^d) Σ_m f_m e^{-2πi j·m/n}.
    let mut re: Vec<f64> = samples.to_vec();
    let mut im: Vec<f64> = vec![0.0; total];
    // Precompute one period of the twiddle table.
    let wr: Vec<f64> = (0..n).map(|t| math::cos(math::TAU * t as f64 / n as f64)).collect();
    let wi: Vec<f64> = (0..n).map(|t| -math::sin(math::TAU * t as f64 / n as f64)).collect();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let mut new_re = vec![0.0; total];
        let mut new_im = vec![0.0; total];
        for base in 0..total {
            // positions whose `axis` digit is zero enumerate the lines
            if (base / stride) % n != 0 {
                continue;
            }
            for j in 0..n {
                let (mut sr, mut si) = (0.0, 0.0);
                for m in 0..n {
                    let idx = base + m * stride;
                    let t = (j * m) % n;
                    sr += re[idx] * wr[t] - im[idx] * wi[t];
                    si += re[idx] * wi[t] + im[idx] * wr[t];
                }
                new_re[base + j * stride] = sr / n as f64;
                new_im[base + j * stride] = si / n as f64;
            }
        }
        re = new_re;
        im = new_im;
    }

    // Pair j with -j (mod n) and emit one real harmonic per pair.
    let mut max_mag = 0.0f64;
    for i in 0..total {
        let m = math::abs(re[i]) + math::abs(im[i]);
        if m > max_mag {
            max_mag = m;
        }
    }
    let cutoff = max_mag * 1e-13;

    let unindex = |mut i: usize| -> Vec<usize> {
        let mut digits = vec![0usize; dim];
        for axis in (0..dim).rev() {
            digits[axis] = i % n;
            i /= n;
        }
        digits
    };
    let index = |digits: &[usize]| -> usize {
        digits.iter().fold(0usize, |acc, &d| acc * n + d)
    };
    let fold = |j: usize| -> i64 {
        if 2 * j <= n {
            j as i64
        } else {
            j as i64 - n as i64
        }
    };

    let mut terms: Vec<TrigTerm> = Vec::new();
    for i in 0..total {
        let digits = unindex(i);
        let conj: Vec<usize> = digits.iter().map(|&d| (n - d) % n).collect();
        let ci = index(&conj);
        if ci < i {
            continue; // handled by its partner
        }
        let k: Vec<i64> = digits.iter().map(|&d| fold(d)).collect();
        let (a, b) = if ci == i {
            // self-conjugate (zero or Nyquist in every coordinate):
            // imaginary part vanishes for real data
            (re[i], 0.0)
        } else {
            (2.0 * re[i], -2.0 * im[i])
        };
        if math::abs(a) <= cutoff && math::abs(b) <= cutoff {
            continue;
        }
        if k.iter().all(|&ki| ki == 0) {
            terms.push(TrigTerm { k, cos_coef: a, sin_coef: 0.0 });
        } else {
            terms.push(TrigTerm { k, cos_coef: a, sin_coef: b });
        }
    }
    TrigPoly::new(dim, terms)
}

/// Sample a periodic function on the uniform `n^d` lattice-coordinate
/// grid, row-major with the first coordinate slowest.
pub fn sample_grid<F: Fn(&[f64]) -> f64>(dim: usize, n: usize, f: F) -> Vec<f64> {
    let total = n.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut y = vec![0.0; dim];
    for i in 0..total {
        let mut rem = i;
        for axis in (0..dim).rev() {
            y[axis] = (rem % n) as f64 / n as f64;
            rem /= n;
        }
        out.push(f(&y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    #[test]
    fn interpolates_single_harmonic() {
        let f = |y: &[f64]| math::cos(math::TAU * y[0]) + 0.5 * math::sin(2.0 * math::TAU * y[0]);
        let samples = sample_grid(1, 8, f);
        let p = trig_interpolate(1, 8, &samples);
        for &y in &[0.0, 0.11, 0.37, 0.925] {
            assert!(close(p.value(&[y]), f(&[y]), 1e-12));
        }
        let g = p.grad(&[0.3]);
        let expect = -math::TAU * math::sin(math::TAU * 0.3)
            + math::TAU * math::cos(2.0 * math::TAU * 0.3);
        assert!(close(g[0], expect, 1e-10));
    }

    #[test]
    fn interpolates_2d_product() {
        let f = |y: &[f64]| {
            0.3 * math::cos(math::TAU * (y[0] + 2.0 * y[1])) - 0.1 * math::sin(math::TAU * y[1])
        };
        let samples = sample_grid(2, 8, f);
        let p = trig_interpolate(2, 8, &samples);
        for y in [[0.0, 0.0], [0.21, 0.68], [0.99, 0.5]] {
            assert!(close(p.value(&y), f(&y), 1e-12));
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = TrigPoly::new(
            2,
            vec![
                TrigTerm { k: vec![1, 0], cos_coef: 0.04, sin_coef: 0.01 },
                TrigTerm { k: vec![1, 1], cos_coef: -0.02, sin_coef: 0.03 },
            ],
        );
        let y = [0.123, 0.456];
        let h = 1e-5;
        let hess = p.hess(&y);
        for i in 0..2 {
            for j in 0..2 {
                let mut yp = y;
                let mut ym = y;
                yp[i] += h;
                ym[i] -= h;
                let gp = p.grad(&yp)[j];
                let gm = p.grad(&ym)[j];
                let fd = (gp - gm) / (2.0 * h);
                assert!(close(hess[i][j], fd, 1e-5));
            }
        }
        assert!(close(hess[0][1], hess[1][0], 1e-14));
    }

    #[test]
    fn constant_grid_gives_constant_term() {
        let samples = vec![2.5; 16];
        let p = trig_interpolate(2, 4, &samples);
        assert_eq!(p.terms().len(), 1);
        assert!(close(p.value(&[0.3, 0.7]), 2.5, 1e-13));
        assert!(math::max_abs(&p.grad(&[0.3, 0.7])) < 1e-13);
    }

    #[test]
    fn odd_grid_roundtrip() {
        let f = |y: &[f64]| math::sin(math::TAU * y[0]) * 0.7 + 1.0;
        let samples = sample_grid(1, 5, f);
        let p = trig_interpolate(1, 5, &samples);
        for &y in &[0.1, 0.6] {
            assert!(close(p.value(&[y]), f(&[y]), 1e-12));
        }
    }
}
