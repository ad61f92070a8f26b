//! Dual polytopes of a periodic decomposition, the induced discrete
//! measure on the torus, and weak-convergence diagnostics against
//! smooth density measures.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, ToPrimitive};

use crate::green::GreenFunction;
use crate::lattice::Lattice;
use crate::linalg;
use crate::math;
use crate::plapprox::{induced_decomposition, PeriodicDecomposition, PlError, PLGreenFunction};
use crate::polytope;
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    Pl(PlError),
    /// Index does not name a vertex class of the decomposition.
    NoSuchVertex,
    /// The slope hull at a vertex is lower-dimensional, so the PL
    /// function is not strongly convex there.
    DegenerateDual { vertex: usize },
    EmptyTestBattery,
}

impl From<PlError> for MeasureError {
    fn from(e: PlError) -> Self {
        MeasureError::Pl(e)
    }
}

impl core::fmt::Display for MeasureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeasureError::Pl(e) => write!(f, "{e}"),
            MeasureError::NoSuchVertex => write!(f, "no such vertex class"),
            MeasureError::DegenerateDual { vertex } => {
                write!(f, "degenerate dual polytope at vertex {vertex}")
            }
            MeasureError::EmptyTestBattery => write!(f, "empty test-function list"),
        }
    }
}

/// The convex hull of the slopes of all cells around one torus vertex.
#[derive(Debug, Clone)]
pub struct DualPolytope {
    pub vertex: Vec<Rat>,
    pub generators: Vec<Vec<Rat>>,
    pub volume: Rat,
}

/// Slopes of all cells in the star of vertex class `vi`, after
/// translating each incident cell so it literally contains the
/// representative point.
pub fn dual_polytope(
    dec: &PeriodicDecomposition,
    vi: usize,
) -> Result<DualPolytope, MeasureError> {
    let v = dec.vertices().get(vi).ok_or(MeasureError::NoSuchVertex)?;
    let d = dec.lattice().dim();
    let b = dec.data().b();
    let mut generators: Vec<Vec<Rat>> = Vec::with_capacity(v.incident.len());
    for (ci, lam_coords) in &v.incident {
        // translating a piece by λ shifts its slope by b·λ
        let lam = dec.lattice().vector(lam_coords);
        let slope = rat::add(&dec.cells()[*ci].piece.slope, &rat::mat_vec(b, &lam));
        if !generators.contains(&slope) {
            generators.push(slope);
        }
    }
    let volume = polytope::convex_hull_volume(d, &generators);
    if !volume.is_positive() {
        return Err(MeasureError::DegenerateDual { vertex: vi });
    }
    Ok(DualPolytope { vertex: v.point.clone(), generators, volume })
}

/// A finite measure on the torus given by weighted atoms (points in
/// the fundamental domain).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(Vec<Rat>, Rat)>,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> Rat {
        self.atoms.iter().map(|(_, w)| w.clone()).sum()
    }
}

/// The discrete measure of a strongly convex PL function: one atom per
/// vertex class, weighted by d! times the dual-polytope volume.
pub fn chambert_loir_measure(f: &PLGreenFunction) -> Result<DiscreteMeasure, MeasureError> {
    let dec = induced_decomposition(f)?;
    chambert_loir_measure_of(&dec)
}

/// Same, starting from an already computed decomposition.
pub fn chambert_loir_measure_of(
    dec: &PeriodicDecomposition,
) -> Result<DiscreteMeasure, MeasureError> {
    let d = dec.lattice().dim();
    let d_fact = Rat::from_integer(rat::factorial(d));
    let mut atoms = Vec::with_capacity(dec.vertices().len());
    for vi in 0..dec.vertices().len() {
        let dual = dual_polytope(dec, vi)?;
        atoms.push((dual.vertex, &d_fact * dual.volume));
    }
    Ok(DiscreteMeasure { atoms })
}

/// An absolutely continuous measure `density · dx` on the torus.
#[derive(Clone)]
pub struct DensityMeasure {
    lattice: Lattice,
    density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl DensityMeasure {
    pub fn new(lattice: Lattice, density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>) -> Self {
        DensityMeasure { lattice, density }
    }

    /// The measure `d!·det(D²g) dx` of a smooth strictly convex Green
    /// function (the weak limit of its PL discrete measures).
    pub fn hessian_of(g: GreenFunction) -> Self {
        let lattice = g.data().lattice().clone();
        let d_fact: f64 = rat::factorial(lattice.dim()).to_f64().unwrap();
        let density = Arc::new(move |x: &[f64]| d_fact * linalg::det(&g.hess(x)));
        DensityMeasure { lattice, density }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn density_at(&self, x: &[f64]) -> f64 {
        (self.density)(x)
    }
}

/// Either kind of measure, for pairing with test functions.
pub enum Measure<'a> {
    Discrete(&'a DiscreteMeasure),
    Density(&'a DensityMeasure),
}

/// A continuous periodic test function together with a bound on its
/// sup norm (used for normalizing weak distances).
#[derive(Clone)]
pub struct TestFunction {
    pub eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub sup_abs: f64,
}

impl TestFunction {
    pub fn constant_one() -> Self {
        TestFunction { eval: Arc::new(|_| 1.0), sup_abs: 1.0 }
    }

    /// `cos(2π k·y)` or `sin(2π k·y)` in lattice coordinates of the
    /// given lattice.
    pub fn harmonic(lattice: &Lattice, k: Vec<i64>, sine: bool) -> Self {
        let lat = lattice.clone();
        let eval = Arc::new(move |x: &[f64]| {
            let y = lat.to_lattice_coords_f64(x);
            let mut p = 0.0;
            for (ki, yi) in k.iter().zip(&y) {
                p += *ki as f64 * yi;
            }
            if sine {
                math::sin(math::TAU * p)
            } else {
                math::cos(math::TAU * p)
            }
        });
        TestFunction { eval, sup_abs: 1.0 }
    }
}

/// Pair a measure with a test function. `grid_n` controls the
/// quadrature resolution for density measures (ignored for discrete
/// ones).
pub fn pair(m: &Measure<'_>, t: &TestFunction, grid_n: usize) -> f64 {
    match m {
        Measure::Discrete(dm) => {
            let mut acc = 0.0;
            for (x, w) in &dm.atoms {
                acc += rat::to_f64(w) * (t.eval)(&rat::to_f64_vec(x));
            }
            acc
        }
        Measure::Density(dm) => {
            let d = dm.lattice.dim();
            let a_mat = dm.lattice.basis_matrix_f64();
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
                acc += dm.density_at(&x) * (t.eval)(&x);
            }
            acc / total as f64 * dm.lattice.volume().to_f64().unwrap()
        }
    }
}

/// Max over the battery of `|m1(t) − m2(t)| / (1 + sup|t|)`.
pub fn weak_distance(
    m1: &Measure<'_>,
    m2: &Measure<'_>,
    testfns: &[TestFunction],
    grid_n: usize,
) -> Result<f64, MeasureError> {
    if testfns.is_empty() {
        return Err(MeasureError::EmptyTestBattery);
    }
    let mut worst = 0.0f64;
    for t in testfns {
        let delta = math::abs(pair(m1, t, grid_n) - pair(m2, t, grid_n)) / (1.0 + t.sup_abs);
        if delta > worst {
            worst = delta;
        }
    }
    Ok(worst)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Default battery: the constant, first harmonics in each lattice
/// coordinate, one second harmonic, and a seeded smooth bump.
pub fn default_test_battery(lattice: &Lattice, seed: u64) -> Vec<TestFunction> {
    let d = lattice.dim();
    let mut out = vec![TestFunction::constant_one()];
    for i in 0..d {
        let mut k = vec![0i64; d];
        k[i] = 1;
        out.push(TestFunction::harmonic(lattice, k.clone(), false));
        out.push(TestFunction::harmonic(lattice, k, true));
    }
    let mut k2 = vec![0i64; d];
    k2[0] = 2;
    out.push(TestFunction::harmonic(lattice, k2, false));

    let mut state = seed ^ 0xda3e_39cb_94b9_5bdb;
    let shifts: Vec<f64> = (0..d)
        .map(|_| (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    let lat = lattice.clone();
    let dd = d as f64;
    let eval = Arc::new(move |x: &[f64]| {
        let y = lat.to_lattice_coords_f64(x);
        let mut s = 0.0;
        for (yi, si) in y.iter().zip(&shifts) {
            s += math::cos(math::TAU * (yi - si));
        }
        math::exp(0.5 * (s - dd))
    });
    out.push(TestFunction { eval, sup_abs: 1.0 });
    out
}

/// Convenience: `(weights sum, degree)` exact mass-identity pair.
pub fn mass_identity(f: &PLGreenFunction) -> Result<(Rat, Rat), MeasureError> {
    let m = chambert_loir_measure(f)?;
    let deg = f.data().degree().map_err(PlError::Green)?;
    Ok((m.total_mass(), deg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{canonical_green, hessian_bounds, GreenData};
    use crate::plapprox::build_pl_approx;
    use crate::rat::{rat, rat_i};

    fn pl_1d(n: usize, c: Rat) -> PLGreenFunction {
        let data =
            GreenData::new(Lattice::standard(1), vec![vec![rat_i(1)]], vec![c]).unwrap();
        let g = canonical_green(data);
        let b = hessian_bounds(&g, 8, 0.1).unwrap();
        build_pl_approx(&g, n, &b).unwrap()
    }

    #[test]
    fn dual_volumes_1d() {
        let f = pl_1d(2, rat_i(0));
        let dec = induced_decomposition(&f).unwrap();
        for vi in 0..dec.vertices().len() {
            let dual = dual_polytope(&dec, vi).unwrap();
            assert_eq!(dual.volume, rat(1, 2));
            assert_eq!(dual.generators.len(), 2);
        }
        let f4 = pl_1d(4, rat_i(0));
        let dec4 = induced_decomposition(&f4).unwrap();
        for vi in 0..dec4.vertices().len() {
            assert_eq!(dual_polytope(&dec4, vi).unwrap().volume, rat(1, 4));
        }
    }

    #[test]
    fn measure_1d_atoms() {
        let f = pl_1d(2, rat_i(0));
        let m = chambert_loir_measure(&f).unwrap();
        let mut atoms: Vec<(Rat, Rat)> =
            m.atoms.iter().map(|(x, w)| (x[0].clone(), w.clone())).collect();
        atoms.sort();
        assert_eq!(atoms, vec![(rat(1, 4), rat(1, 2)), (rat(3, 4), rat(1, 2))]);
        assert_eq!(m.total_mass(), rat_i(1));

        // linear term shifts atoms but keeps the mass
        let fc = pl_1d(2, rat(1, 2));
        let mc = chambert_loir_measure(&fc).unwrap();
        assert_eq!(mc.total_mass(), rat_i(1));
    }

    #[test]
    fn measure_2d_square() {
        let data = GreenData::new(
            Lattice::standard(2),
            vec![vec![rat_i(1), rat_i(0)], vec![rat_i(0), rat_i(1)]],
            rat::zeros(2),
        )
        .unwrap();
        let g = canonical_green(data);
        let b = hessian_bounds(&g, 4, 0.1).unwrap();
        let f = build_pl_approx(&g, 1, &b).unwrap();
        let dec = induced_decomposition(&f).unwrap();
        let dual = dual_polytope(&dec, 0).unwrap();
        assert_eq!(dual.volume, rat_i(1));
        assert_eq!(dual.generators.len(), 4);
        let m = chambert_loir_measure_of(&dec).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert_eq!(m.atoms[0].0, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(m.atoms[0].1, rat_i(2));
    }

    #[test]
    fn pairing_and_distance() {
        let f = pl_1d(2, rat_i(0));
        let m = chambert_loir_measure(&f).unwrap();
        let lat = Lattice::standard(1);
        let one = TestFunction::constant_one();
        let cosx = TestFunction::harmonic(&lat, vec![1], false);
        let md = Measure::Discrete(&m);
        assert!((pair(&md, &one, 8) - 1.0).abs() < 1e-15);
        // (1/2)cos(π/2) + (1/2)cos(3π/2) = 0
        assert!(pair(&md, &cosx, 8).abs() < 1e-15);

        let data =
            GreenData::new(lat.clone(), vec![vec![rat_i(1)]], vec![rat_i(0)]).unwrap();
        let dm = DensityMeasure::hessian_of(canonical_green(data));
        let mdn = Measure::Density(&dm);
        assert!(pair(&mdn, &cosx, 64).abs() < 1e-13);
        assert!((pair(&mdn, &one, 64) - 1.0).abs() < 1e-13);

        let battery = default_test_battery(&lat, 7);
        let m8 = chambert_loir_measure(&pl_1d(8, rat_i(0))).unwrap();
        let md8 = Measure::Discrete(&m8);
        // quadratic g in d=1 at N=8: uniform atoms kill the low
        // harmonics; only the bump sees the discreteness, mildly
        let dist = weak_distance(&md8, &mdn, &battery, 64).unwrap();
        assert!(dist < 0.05);
        let self_dist = weak_distance(&md, &md, &battery, 64).unwrap();
        assert!(self_dist == 0.0);
    }

    #[test]
    fn mass_identity_hexagonal() {
        let data = GreenData::new(
            Lattice::standard(2),
            vec![vec![rat_i(2), rat_i(1)], vec![rat_i(1), rat_i(2)]],
            rat::zeros(2),
        )
        .unwrap();
        let g = canonical_green(data);
        let b = hessian_bounds(&g, 4, 0.1).unwrap();
        for n in [1usize, 2] {
            let f = build_pl_approx(&g, n, &b).unwrap();
            let (mass, deg) = mass_identity(&f).unwrap();
            assert_eq!(mass, deg);
            assert_eq!(deg, rat_i(6));
        }
    }

    #[test]
    fn mass_identity_3d() {
        let data = GreenData::new(
            Lattice::standard(3),
            vec![
                vec![rat_i(1), rat_i(0), rat_i(0)],
                vec![rat_i(0), rat_i(1), rat_i(0)],
                vec![rat_i(0), rat_i(0), rat_i(1)],
            ],
            rat::zeros(3),
        )
        .unwrap();
        let g = canonical_green(data);
        let b = hessian_bounds(&g, 2, 0.1).unwrap();
        let f = build_pl_approx(&g, 1, &b).unwrap();
        let (mass, deg) = mass_identity(&f).unwrap();
        assert_eq!(deg, rat_i(6));
        assert_eq!(mass, deg);
    }
}
