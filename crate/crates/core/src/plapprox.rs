//! Rational piecewise-linear convex approximation of strictly convex
//! Green functions at subdivision level N, and the induced Λ-periodic
//! polytopal decomposition of the torus.
//!
//! The PL function is the sup of tangent pieces anchored at the points
//! of (1/N)Λ, with values and slopes rationalized toward the
//! below-graph side. Only the pieces anchored in a fundamental domain
//! are stored; all others follow from the exact translation rule.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::green::{GreenError, GreenFunction, HessianBounds};
use crate::lattice::Lattice;
use crate::math;
use crate::polytope::{ConvexCell, HalfSpace};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq)]
pub enum PlError {
    Green(GreenError),
    /// Strict convexity is required (h_g > 0).
    NotStrictlyConvex,
    /// A cell overlaps one of its own lattice translates with positive
    /// volume, so it cannot inject into the torus; increase N.
    RefineN { cell: usize, diameter: f64 },
    /// A cell reached its locality bounding box, so the sup is not
    /// strongly convex at this subdivision.
    UnboundedCell { cell: usize },
    ValueBoundViolated { observed: f64, bound: f64 },
    GradientBoundViolated { observed: f64, bound: f64 },
    DiameterBoundViolated { observed: f64, bound: f64 },
}

impl From<GreenError> for PlError {
    fn from(e: GreenError) -> Self {
        PlError::Green(e)
    }
}

impl core::fmt::Display for PlError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PlError::Green(e) => write!(f, "{e}"),
            PlError::NotStrictlyConvex => write!(f, "approximated function must be strictly convex"),
            PlError::RefineN { cell, diameter } => write!(
                f,
                "cell {cell} (diameter {diameter}) overlaps a lattice translate; increase N"
            ),
            PlError::UnboundedCell { cell } => {
                write!(f, "cell {cell} is not bounded within the locality radius")
            }
            PlError::ValueBoundViolated { observed, bound } => {
                write!(f, "value bound violated: {observed} vs {bound}")
            }
            PlError::GradientBoundViolated { observed, bound } => {
                write!(f, "gradient bound violated: {observed} vs {bound}")
            }
            PlError::DiameterBoundViolated { observed, bound } => {
                write!(f, "cell diameter bound violated: {observed} vs {bound}")
            }
        }
    }
}

/// One affine piece `x ↦ slope·x + intercept`, remembered with the
/// grid anchor it was generated from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePiece {
    pub slope: Vec<Rat>,
    pub intercept: Rat,
    pub anchor: Vec<Rat>,
}

impl AffinePiece {
    pub fn value(&self, x: &[Rat]) -> Rat {
        rat::dot(&self.slope, x) + &self.intercept
    }
}

/// The PL approximation at level N: sup over all Λ-translates of the
/// stored pieces.
#[derive(Debug, Clone)]
pub struct PLGreenFunction {
    data: crate::green::GreenData,
    n: usize,
    bounds: HessianBounds,
    pieces: Vec<AffinePiece>,
    fine: Lattice,
    /// Upper bound on the sup gap g − f (the value-bound RHS).
    value_gap_bound: f64,
    /// Active pieces at x have anchors within this radius of x.
    locality_radius: f64,
}

fn fine_lattice(lattice: &Lattice, n: usize) -> Lattice {
    let scale = Rat::new(BigInt::from(1), BigInt::from(n as i64));
    let basis = lattice
        .basis()
        .iter()
        .map(|row| rat::scale(row, &scale))
        .collect();
    Lattice::new(basis).unwrap()
}

/// Build the level-N PL approximation of `g`.
pub fn build_pl_approx(
    g: &GreenFunction,
    n: usize,
    bounds: &HessianBounds,
) -> Result<PLGreenFunction, PlError> {
    assert!(n >= 1);
    if !(bounds.h_g > 0.0) {
        return Err(PlError::NotStrictlyConvex);
    }
    let data = g.data().clone();
    let d = data.dim();
    let fine = fine_lattice(data.lattice(), n);
    let nn = n as i64;

    let n2 = BigInt::from(nn * nn);
    let n3 = BigInt::from(nn * nn * nn);
    // Below-graph margin for the rationalized float path: the slope
    // perturbation is at most 1/(2N²) per coordinate after rounding.
    let slope_err_bound = math::sqrt(d as f64) / (2.0 * (nn * nn) as f64) + 1e-9;
    let lower_k = {
        let needed = slope_err_bound * slope_err_bound / (2.0 * bounds.h_g) + 1e-12;
        math::ceil(needed * (nn * nn * nn) as f64) as i64 + 1
    };

    let mut pieces = Vec::with_capacity(n.pow(d as u32));
    let mut max_slope_err = 0.0f64;
    let total = n.pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut k = vec![0i64; d];
        for axis in (0..d).rev() {
            k[axis] = (rem % n) as i64;
            rem /= n;
        }
        let anchor = fine.vector_i64(&k);
        if let (Some(v), Some(grad)) = (g.value_rat(&anchor), g.grad_rat(&anchor)) {
            // Exact path: the tangent itself is rational; no lowering needed.
            let intercept = &v - rat::dot(&grad, &anchor);
            pieces.push(AffinePiece { slope: grad, intercept, anchor });
        } else {
            let xf = rat::to_f64_vec(&anchor);
            let vf = g.value(&xf);
            let gradf = g.grad(&xf);
            let slope: Vec<Rat> = gradf
                .iter()
                .map(|&gi| rat::round_to_den(gi, &n2).expect("finite gradient"))
                .collect();
            let err = math::dist(&rat::to_f64_vec(&slope), &gradf);
            if err > max_slope_err {
                max_slope_err = err;
            }
            let lowered = rat::floor_to_den(vf, &n3).expect("finite value")
                - Rat::new(BigInt::from(lower_k), n3.clone());
            let intercept = lowered - rat::dot(&slope, &anchor);
            pieces.push(AffinePiece { slope, intercept, anchor });
        }
    }

    // Sup-gap bound (quadratic growth vs. grid spacing): with R the
    // fundamental-domain diameter, g − f < (R²H_g + 2R + 2) / (2N²).
    let dom = data.lattice().domain_constants();
    let r_f = math::sqrt(dom.diameter_sq.to_f64().unwrap()) * (1.0 + 1e-12);
    let value_gap_bound =
        (r_f * r_f * bounds.big_h_g + 2.0 * r_f + 2.0) / (2.0 * (nn * nn) as f64);
    // Active pieces at x lie within U of x: h/2·u² − ‖𝛆‖·u ≤ gap bound.
    let ve = max_slope_err * (1.0 + 1e-9);
    let h = bounds.h_g;
    let locality_radius =
        (ve + math::sqrt(ve * ve + 2.0 * h * value_gap_bound)) / h * (1.0 + 1e-9);

    Ok(PLGreenFunction {
        data,
        n,
        bounds: *bounds,
        pieces,
        fine,
        value_gap_bound,
        locality_radius,
    })
}

impl PLGreenFunction {
    pub fn data(&self) -> &crate::green::GreenData {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> &HessianBounds {
        &self.bounds
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn value_gap_bound(&self) -> f64 {
        self.value_gap_bound
    }

    pub fn locality_radius(&self) -> f64 {
        self.locality_radius
    }

    /// The stored piece `idx` translated by the lattice vector with
    /// integer coordinates `lambda`: slope gains `b·λ`, and the
    /// intercept follows from `p'(x) = p(x−λ) + z_λ(x−λ)`.
    pub fn translated_piece(&self, idx: usize, lambda: &[BigInt]) -> AffinePiece {
        let base = &self.pieces[idx];
        if lambda.iter().all(|l| l.is_zero()) {
            return base.clone();
        }
        let lam = self.data.lattice().vector(lambda);
        let slope = rat::add(&base.slope, &rat::mat_vec(self.data.b(), &lam));
        let intercept = &base.intercept - rat::dot(&base.slope, &lam) + self.data.c_tilde(&lam)
            - self.data.q(&lam);
        let anchor = rat::add(&base.anchor, &lam);
        AffinePiece { slope, intercept, anchor }
    }

    fn piece_at_fine_point(&self, k: &[i64]) -> AffinePiece {
        let n = self.n as i64;
        let mut idx = 0usize;
        let mut lambda = Vec::with_capacity(k.len());
        for &ki in k {
            let j = ki.rem_euclid(n);
            idx = idx * self.n + j as usize;
            lambda.push(BigInt::from((ki - j) / n));
        }
        self.translated_piece(idx, &lambda)
    }

    /// Candidate pieces whose anchors lie within `radius` of `x`.
    fn candidates_near(&self, x: &[f64], radius: f64) -> Vec<AffinePiece> {
        self.fine
            .points_in_ball(x, radius)
            .into_iter()
            .map(|k| self.piece_at_fine_point(&k))
            .collect()
    }

    /// Exact sup value and the set of pieces attaining it.
    pub fn evaluate(&self, x: &[Rat]) -> (Rat, Vec<AffinePiece>) {
        let xf = rat::to_f64_vec(x);
        let cands = self.candidates_near(&xf, self.locality_radius + 1e-12);
        debug_assert!(!cands.is_empty());
        let mut best: Option<Rat> = None;
        for p in &cands {
            let v = p.value(x);
            if best.as_ref().map_or(true, |b| v > *b) {
                best = Some(v);
            }
        }
        let best = best.expect("locality radius covers at least one anchor");
        let active: Vec<AffinePiece> =
            cands.into_iter().filter(|p| p.value(x) == best).collect();
        (best, active)
    }

    pub fn value_f64(&self, x: &[f64]) -> f64 {
        let xr: Vec<Rat> = x.iter().map(|&v| rat::from_f64_exact(v).unwrap()).collect();
        rat::to_f64(&self.evaluate(&xr).0)
    }

    /// The same PL function with every piece shifted by a constant.
    /// Shifting up deliberately breaks the below-graph property; used
    /// by fault-injection checks.
    pub fn shifted(&self, delta: &Rat) -> PLGreenFunction {
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.intercept += delta;
        }
        out
    }
}

/// One maximal cell of the induced decomposition (a Λ-class
/// representative) together with its active piece and the half-spaces
/// that carved it.
#[derive(Debug, Clone)]
pub struct CellClass {
    pub piece: AffinePiece,
    pub cell: ConvexCell,
    halfspaces: Vec<HalfSpace>,
}

/// A vertex Λ-class with its incident cells: `(cell index, λ)` means
/// cell `i` translated by the lattice vector of integer coordinates λ
/// contains the representative point.
#[derive(Debug, Clone)]
pub struct VertexClass {
    pub point: Vec<Rat>,
    pub incident: Vec<(usize, Vec<BigInt>)>,
}

#[derive(Debug, Clone)]
pub struct PeriodicDecomposition {
    data: crate::green::GreenData,
    lattice: Lattice,
    cells: Vec<CellClass>,
    vertices: Vec<VertexClass>,
}

impl PeriodicDecomposition {
    pub fn data(&self) -> &crate::green::GreenData {
        &self.data
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn cells(&self) -> &[CellClass] {
        &self.cells
    }

    pub fn vertices(&self) -> &[VertexClass] {
        &self.vertices
    }

    /// Exact total volume of the cell representatives; tiling forces
    /// this to equal vol(Λ).
    pub fn total_cell_volume(&self) -> Rat {
        self.cells.iter().map(|c| c.cell.volume()).sum()
    }
}

/// Compute the maximal cells and vertex classes of the decomposition
/// induced by the PL function.
pub fn induced_decomposition(f: &PLGreenFunction) -> Result<PeriodicDecomposition, PlError> {
    let d = f.data.dim();
    let u = f.locality_radius;
    let box_hw = rat::from_f64_exact(2.0 * u * (1.0 + 1e-9) + 1e-12).unwrap();
    let cand_radius = (2.0 * math::sqrt(d as f64) + 1.0) * u * (1.0 + 1e-9) + 1e-12;

    let mut cells: Vec<CellClass> = Vec::new();
    for idx in 0..f.pieces.len() {
        let piece = f.pieces[idx].clone();
        let anchor_f = rat::to_f64_vec(&piece.anchor);
        let mut cell = ConvexCell::bounding_box(d, &piece.anchor, &box_hw);
        let mut halfspaces: Vec<HalfSpace> = Vec::new();
        // box faces first, so we can detect cells that reach them
        let n_box = 2 * d;
        for axis in 0..d {
            for sign in [1i64, -1] {
                let mut normal = rat::zeros(d);
                normal[axis] = rat::rat_i(sign);
                let offset = rat::dot(&normal, &piece.anchor) + &box_hw;
                halfspaces.push(HalfSpace::new(normal, offset));
            }
        }
        let mut alive = true;
        let mut others = f.candidates_near(&anchor_f, cand_radius);
        // nearest anchors first, so the cell shrinks quickly and the
        // remaining half-spaces are skipped by the containment pre-test
        others.sort_by(|a, b| {
            let da = math::dist(&rat::to_f64_vec(&a.anchor), &anchor_f);
            let db = math::dist(&rat::to_f64_vec(&b.anchor), &anchor_f);
            da.total_cmp(&db)
        });
        for other in others {
            if other == piece {
                continue;
            }
            // p(x) ≥ p'(x)  ⟺  (m' − m)·x ≤ c − c'
            let normal = rat::sub(&other.slope, &piece.slope);
            if normal.iter().all(|v| v.is_zero()) {
                // identical slope: a duplicate or a purely dominated copy
                if other.intercept > piece.intercept {
                    alive = false;
                    break;
                }
                continue;
            }
            let offset = &piece.intercept - &other.intercept;
            let hs = HalfSpace::new(normal, offset);
            if !cell.clip(&hs) {
                alive = false;
                break;
            }
            halfspaces.push(hs);
        }
        if !alive {
            continue; // dominated piece: never strictly active
        }
        // A vertex on the bounding box means the cell escaped the
        // locality radius — the sup is not strongly polytopal here.
        for v in cell.vertices() {
            for hs in &halfspaces[..n_box] {
                if hs.slack(v).is_zero() {
                    return Err(PlError::UnboundedCell { cell: idx });
                }
            }
        }
        // Keep only facet-defining half-spaces (tight at ≥ d vertices);
        // the cell is their exact intersection, and translate-overlap
        // tests stay cheap.
        let facet_hs: Vec<HalfSpace> = halfspaces
            .into_iter()
            .skip(n_box)
            .filter(|hs| {
                cell.vertices().iter().filter(|v| hs.slack(v).is_zero()).count() >= d
            })
            .collect();
        cells.push(CellClass { piece, cell, halfspaces: facet_hs });
    }

    // Injectivity into the torus: no cell may overlap its own
    // translate with positive volume.
    let lattice = f.data.lattice().clone();
    let shortest_sq = lattice.shortest_vector_norm_sq().to_f64().unwrap();
    for (i, c) in cells.iter().enumerate() {
        let diam_sq = c.cell.diameter_sq();
        let diam_sq_f = diam_sq.to_f64().unwrap();
        if diam_sq_f < shortest_sq * (1.0 - 1e-9) {
            continue;
        }
        let radius = math::sqrt(diam_sq_f) * (1.0 + 1e-9) + 1e-12;
        for k in lattice.points_in_ball(&vec![0.0; c.cell.vertices()[0].len()], radius) {
            if k.iter().all(|&v| v == 0) {
                continue;
            }
            let lam = lattice.vector_i64(&k);
            let mut overlap = c.cell.clone();
            let mut nonempty = true;
            for hs in &c.halfspaces {
                if !overlap.clip(&hs.translated(&lam)) {
                    nonempty = false;
                    break;
                }
            }
            if nonempty && overlap.volume().is_positive() {
                return Err(PlError::RefineN {
                    cell: i,
                    diameter: math::sqrt(diam_sq_f),
                });
            }
        }
    }

    // Vertex classes: reduce every cell vertex to the fundamental
    // domain and record which translated cells meet it.
    let mut index: BTreeMap<Vec<Rat>, usize> = BTreeMap::new();
    let mut vertices: Vec<VertexClass> = Vec::new();
    for (ci, c) in cells.iter().enumerate() {
        for w in c.cell.vertices() {
            let (rep, k) = lattice.reduce(w);
            let neg_k: Vec<BigInt> = k.iter().map(|v| -v).collect();
            let next = vertices.len();
            let vi = *index.entry(rep.clone()).or_insert_with(|| {
                vertices.push(VertexClass { point: rep, incident: Vec::new() });
                next
            });
            let entry = (ci, neg_k);
            if !vertices[vi].incident.contains(&entry) {
                vertices[vi].incident.push(entry);
            }
        }
    }

    Ok(PeriodicDecomposition { data: f.data.clone(), lattice, cells, vertices })
}

/// Observed-vs-theoretical error bounds for a PL approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundReport {
    pub samples: usize,
    pub max_value_gap: f64,
    pub value_bound: f64,
    pub max_gradient_deviation: f64,
    pub gradient_bound: f64,
    pub max_cell_diameter: f64,
    pub diameter_bound: f64,
}

/// Check the three construction bounds: the sup gap `0 ≤ g − f` below
/// the quadratic-growth bound, the per-cell slope deviation
/// `‖m_Δ − ∇g‖ ≤ 2√(εH_g)`, and the cell diameter `≤ 4/h_g·√(εH_g)`,
/// with ε the value-gap bound. The construction guarantees all three,
/// so any violation is an error, not a tolerance miss.
pub fn check_error_bounds(
    f: &PLGreenFunction,
    g: &GreenFunction,
    bounds: &HessianBounds,
    samples: usize,
) -> Result<ErrorBoundReport, PlError> {
    let d = f.data.dim();
    let eps = f.value_gap_bound;
    let value_bound = eps;
    let gradient_bound = 2.0 * math::sqrt(eps * bounds.big_h_g);
    let diameter_bound = 4.0 / bounds.h_g * math::sqrt(eps * bounds.big_h_g);

    // Deterministic sample grid in lattice coordinates, offset off the
    // anchors so the strict inequality is meaningful.
    let per_axis = {
        let mut m = 1usize;
        while m.pow(d as u32) < samples {
            m += 1;
        }
        m
    };
    let lattice = f.data.lattice();
    let mut max_value_gap = f64::NEG_INFINITY;
    let total = per_axis.pow(d as u32);
    let exact = g.is_exact();
    for idx in 0..total {
        let mut rem = idx;
        let mut y = rat::zeros(d);
        for axis in (0..d).rev() {
            y[axis] = Rat::new(
                BigInt::from(2 * ((rem % per_axis) as i64) + 1),
                BigInt::from(2 * per_axis as i64),
            );
            rem /= per_axis;
        }
        let x = lattice.from_lattice_coords(&y);
        let (fv, _) = f.evaluate(&x);
        let gap = if exact {
            let gv = g.value_rat(&x).unwrap();
            let gap_r = &gv - &fv;
            if gap_r.is_negative() {
                return Err(PlError::ValueBoundViolated {
                    observed: rat::to_f64(&gap_r),
                    bound: value_bound,
                });
            }
            rat::to_f64(&gap_r)
        } else {
            g.value(&rat::to_f64_vec(&x)) - rat::to_f64(&fv)
        };
        if gap < 0.0 {
            return Err(PlError::ValueBoundViolated { observed: gap, bound: value_bound });
        }
        if gap >= value_bound {
            return Err(PlError::ValueBoundViolated { observed: gap, bound: value_bound });
        }
        if gap > max_value_gap {
            max_value_gap = gap;
        }
    }

    let dec = induced_decomposition(f)?;
    let mut max_gradient_deviation = 0.0f64;
    let mut max_cell_diameter = 0.0f64;
    for c in dec.cells() {
        let m = rat::to_f64_vec(&c.piece.slope);
        let mut probes: Vec<Vec<f64>> =
            c.cell.vertices().iter().map(|v| rat::to_f64_vec(v)).collect();
        probes.push(rat::to_f64_vec(&c.cell.centroid()));
        for x in probes {
            let dev = math::dist(&m, &g.grad(&x));
            if dev > max_gradient_deviation {
                max_gradient_deviation = dev;
            }
            if dev > gradient_bound {
                return Err(PlError::GradientBoundViolated {
                    observed: dev,
                    bound: gradient_bound,
                });
            }
        }
        let diam = math::sqrt(c.cell.diameter_sq().to_f64().unwrap());
        if diam > max_cell_diameter {
            max_cell_diameter = diam;
        }
        if diam > diameter_bound {
            return Err(PlError::DiameterBoundViolated {
                observed: diam,
                bound: diameter_bound,
            });
        }
    }

    Ok(ErrorBoundReport {
        samples: total,
        max_value_gap,
        value_bound,
        max_gradient_deviation,
        gradient_bound,
        max_cell_diameter,
        diameter_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{canonical_green, hessian_bounds, GreenData};
    use crate::rat::{rat, rat_i};

    fn pl_1d(n: usize, c: Rat) -> (PLGreenFunction, GreenFunction, HessianBounds) {
        let data = GreenData::new(Lattice::standard(1), vec![vec![rat_i(1)]], vec![c]).unwrap();
        let g = canonical_green(data);
        let b = hessian_bounds(&g, 8, 0.1).unwrap();
        let f = build_pl_approx(&g, n, &b).unwrap();
        (f, g, b)
    }

    #[test]
    fn tangent_pieces_1d() {
        let (f, _, _) = pl_1d(2, rat_i(0));
        assert_eq!(f.pieces().len(), 2);
        assert_eq!(f.pieces()[0].slope, vec![rat_i(0)]);
        assert_eq!(f.pieces()[0].intercept, rat_i(0));
        assert_eq!(f.pieces()[1].slope, vec![rat(1, 2)]);
        assert_eq!(f.pieces()[1].intercept, rat(-1, 8));
    }

    #[test]
    fn evaluate_breakpoints_and_translation() {
        let (f, _, _) = pl_1d(2, rat_i(0));
        let (v0, a0) = f.evaluate(&[rat_i(0)]);
        assert_eq!(v0, rat_i(0));
        assert_eq!(a0.len(), 1);
        let (v, act) = f.evaluate(&[rat(1, 4)]);
        assert_eq!(v, rat_i(0));
        assert_eq!(act.len(), 2);
        let (v54, _) = f.evaluate(&[rat(5, 4)]);
        assert_eq!(v54, rat(3, 4));
    }

    #[test]
    fn translation_identity() {
        let (f, g, _) = pl_1d(2, rat(1, 2));
        // g(x) − p_j(x) = g(x+λ) − p_{j+λ}(x+λ)
        let x = rat(3, 10);
        let lam = [BigInt::from(2)];
        let p = &f.pieces()[1];
        let pt = f.translated_piece(1, &lam);
        let gx = g.value_rat(&[x.clone()]).unwrap();
        let x2 = &x + rat_i(2);
        let gx2 = g.value_rat(&[x2.clone()]).unwrap();
        assert_eq!(gx - p.value(&[x]), gx2 - pt.value(&[x2]));
    }

    #[test]
    fn decomposition_1d() {
        let (f, _, _) = pl_1d(2, rat_i(0));
        let dec = induced_decomposition(&f).unwrap();
        assert_eq!(dec.cells().len(), 2);
        assert_eq!(dec.total_cell_volume(), rat_i(1));
        let mut vs: Vec<Rat> = dec.vertices().iter().map(|v| v.point[0].clone()).collect();
        vs.sort();
        assert_eq!(vs, vec![rat(1, 4), rat(3, 4)]);

        let (f4, _, _) = pl_1d(4, rat_i(0));
        let dec4 = induced_decomposition(&f4).unwrap();
        assert_eq!(dec4.cells().len(), 4);
        assert_eq!(dec4.vertices().len(), 4);
        for c in dec4.cells() {
            assert_eq!(c.cell.volume(), rat(1, 4));
        }
    }

    #[test]
    fn decomposition_2d_squares() {
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
        assert_eq!(dec.cells().len(), 1);
        assert_eq!(dec.cells()[0].cell.volume(), rat_i(1));
        assert_eq!(dec.vertices().len(), 1);
        assert_eq!(dec.vertices()[0].point, vec![rat(1, 2), rat(1, 2)]);
        // the four translates of the single square all meet the vertex
        assert_eq!(dec.vertices()[0].incident.len(), 4);
    }

    #[test]
    fn bounds_hold_and_shift_up_fails() {
        let (f, g, b) = pl_1d(2, rat_i(0));
        let report = check_error_bounds(&f, &g, &b, 100).unwrap();
        // true sup of g − f is 1/32 at the breakpoints
        assert!(report.max_value_gap >= 0.029 && report.max_value_gap <= 0.03125 + 1e-12);
        assert!(report.max_cell_diameter == 0.5);
        assert!(report.value_bound > report.max_value_gap);

        let bad = f.shifted(&rat(1, 10));
        assert!(matches!(
            check_error_bounds(&bad, &g, &b, 100),
            Err(PlError::ValueBoundViolated { .. })
        ));
    }

    #[test]
    fn float_path_stays_below_graph() {
        use crate::periodic::{TrigPoly, TrigTerm};
        let data =
            GreenData::new(Lattice::standard(1), vec![vec![rat_i(1)]], vec![rat_i(0)]).unwrap();
        let p = TrigPoly::new(
            1,
            vec![TrigTerm { k: vec![1], cos_coef: 0.02, sin_coef: 0.01 }],
        );
        let g = GreenFunction::with_trig(data, p);
        let b = hessian_bounds(&g, 64, 0.1).unwrap();
        let f = build_pl_approx(&g, 8, &b).unwrap();
        let report = check_error_bounds(&f, &g, &b, 1000).unwrap();
        assert!(report.max_value_gap > 0.0);
        let dec = induced_decomposition(&f).unwrap();
        assert_eq!(dec.total_cell_volume(), rat_i(1));
    }
}
