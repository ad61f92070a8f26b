//! High-level operations behind the CLI subcommands: loading inputs,
//! building approximations and measures, solving densities, and the
//! end-to-end prescribed-measure pipeline.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use tropma_core::clmeasure::{
    dual_polytope, DensityMeasure, DiscreteMeasure, Measure, TestFunction,
};
use tropma_core::green::{
    canonical_green, hessian_bounds, GreenData, GreenFunction, HessianBounds,
};
use tropma_core::masolver::{self, MaProblem, MaSolution};
use tropma_core::plapprox::{
    build_pl_approx, induced_decomposition, PeriodicDecomposition, PLGreenFunction,
};
use tropma_core::rat::{self, Rat};
use tropma_core::{math, periodic, Lattice};

use crate::format::{GreenDataDto, ProblemDto};
use crate::{expr, grid, par, AppError};

pub fn load_green_data(path: &Path) -> Result<GreenData, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::input(format!("cannot read {}: {e}", path.display())))?;
    let dto: GreenDataDto = serde_json::from_str(&text)
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
    dto.to_green_data()
}

pub struct LoadedProblem {
    pub dto: ProblemDto,
    pub data: GreenData,
    pub f_raw: Vec<f64>,
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::input(format!("cannot read {}: {e}", path.display())))?;
    let dto: ProblemDto = serde_json::from_str(&text)
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
    let data = dto.green_data.to_green_data()?;
    let f_raw = resolve_density(&dto.f, data.dim(), dto.grid_n, path.parent())?;
    Ok(LoadedProblem { dto, data, f_raw })
}

/// Resolve an "expr:..." or "csv:..." density spec into grid samples.
pub fn resolve_density(
    spec: &str,
    dim: usize,
    grid_n: usize,
    base_dir: Option<&Path>,
) -> Result<Vec<f64>, AppError> {
    if let Some(e) = spec.strip_prefix("expr:") {
        let parsed = expr::parse_expr(e, dim)?;
        Ok(parsed.sample(grid_n))
    } else if let Some(p) = spec.strip_prefix("csv:") {
        let path = match base_dir {
            Some(dir) if !Path::new(p).is_absolute() => dir.join(p),
            _ => PathBuf::from(p),
        };
        let (dims, values) = grid::read_grid_csv(&path)?;
        if dims.len() != dim || dims.iter().any(|&n| n != grid_n) {
            return Err(AppError::input(format!(
                "grid file {} has sizes {dims:?}, expected {dim} axes of {grid_n}",
                path.display()
            )));
        }
        Ok(values)
    } else {
        Err(AppError::input(format!(
            "density must start with 'expr:' or 'csv:', got '{spec}'"
        )))
    }
}

/// Conservative convexity bounds with the default 10% safety margin.
pub fn default_bounds(g: &GreenFunction) -> Result<HessianBounds, AppError> {
    let d = g.data().dim();
    let sample_n = match d {
        1 => 64,
        2 => 24,
        _ => 8,
    };
    Ok(hessian_bounds(g, sample_n, 0.1)?)
}

/// Discrete measure of a decomposition with per-vertex dual volumes
/// computed in parallel (capped by TROPMA_THREADS), in vertex order.
pub fn measure_parallel(dec: &PeriodicDecomposition) -> Result<DiscreteMeasure, AppError> {
    let d_fact = Rat::from_integer(rat::factorial(dec.lattice().dim()));
    let indices: Vec<usize> = (0..dec.vertices().len()).collect();
    let duals = par::par_map(indices, |vi| dual_polytope(dec, vi));
    let mut atoms = Vec::with_capacity(duals.len());
    for dual in duals {
        let dual = dual?;
        atoms.push((dual.vertex, &d_fact * dual.volume));
    }
    Ok(DiscreteMeasure { atoms })
}

pub struct ApproxResult {
    pub pl: PLGreenFunction,
    pub bounds: HessianBounds,
    pub decomposition: PeriodicDecomposition,
}

pub fn approx_canonical(data: &GreenData, n: usize) -> Result<ApproxResult, AppError> {
    let g = canonical_green(data.clone());
    let bounds = default_bounds(&g)?;
    let pl = build_pl_approx(&g, n, &bounds)?;
    let decomposition = induced_decomposition(&pl)?;
    Ok(ApproxResult { pl, bounds, decomposition })
}

pub struct SolveResult {
    pub problem: MaProblem,
    pub solution: MaSolution,
}

pub fn solve_problem(
    data: &GreenData,
    f_raw: &[f64],
    grid_n: usize,
    tol: f64,
) -> Result<SolveResult, AppError> {
    let problem = masolver::normalize_density(data, f_raw, grid_n)?;
    let solution = masolver::solve(&problem, tol, 50)?;
    Ok(SolveResult { problem, solution })
}

/// The prescribed target measure `d!·det(b)·e^f dx` (with `f` the
/// normalized density samples, interpolated spectrally off-grid).
pub fn target_density(problem: &MaProblem) -> DensityMeasure {
    let data = problem.data().clone();
    let lattice = data.lattice().clone();
    let interp = periodic::trig_interpolate(data.dim(), problem.grid_n(), problem.f());
    let d_fact = rat::to_f64(&Rat::from_integer(rat::factorial(data.dim())));
    let det_b = tropma_core::linalg::det(&rat::to_f64_mat(data.b()));
    let lat = lattice.clone();
    let density = Arc::new(move |x: &[f64]| {
        use tropma_core::periodic::PeriodicFn;
        let y = lat.to_lattice_coords_f64(x);
        d_fact * det_b * math::exp(interp.value(&y))
    });
    DensityMeasure::new(lattice, density)
}

/// The low-harmonic battery used for convergence tables: constant,
/// first cos/sin per coordinate, and one second harmonic.
pub fn harmonic_battery(lattice: &Lattice) -> Vec<TestFunction> {
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
    out
}

pub struct CalabiYauRow {
    pub n: usize,
    pub weak_distance: f64,
    pub mass: Rat,
}

pub struct CalabiYauResult {
    pub solve: SolveResult,
    pub green: GreenFunction,
    pub rows: Vec<CalabiYauRow>,
    /// Measure at the largest N.
    pub final_measure: DiscreteMeasure,
}

/// Full pipeline: normalize → solve → Green function → PL approximation
/// at each N → discrete measure → weak distance to the prescription.
pub fn calabi_yau(
    data: &GreenData,
    f_raw: &[f64],
    grid_n: usize,
    tol: f64,
    n_list: &[usize],
    quad_n: usize,
) -> Result<CalabiYauResult, AppError> {
    if n_list.is_empty() {
        return Err(AppError::input("empty N list".into()));
    }
    let solve = solve_problem(data, f_raw, grid_n, tol)?;
    let green = masolver::solution_to_green(&solve.problem, &solve.solution)?;
    let bounds = default_bounds(&green)?;
    let target = target_density(&solve.problem);
    let battery = harmonic_battery(data.lattice());
    let mut rows = Vec::with_capacity(n_list.len());
    let mut final_measure = None;
    for &n in n_list {
        let pl = build_pl_approx(&green, n, &bounds)?;
        let dec = induced_decomposition(&pl)?;
        let m = measure_parallel(&dec)?;
        let dist = tropma_core::clmeasure::weak_distance(
            &Measure::Discrete(&m),
            &Measure::Density(&target),
            &battery,
            quad_n,
        )
        .map_err(AppError::from)?;
        rows.push(CalabiYauRow { n, weak_distance: dist, mass: m.total_mass() });
        final_measure = Some(m);
    }
    Ok(CalabiYauResult {
        solve,
        green,
        rows,
        final_measure: final_measure.unwrap(),
    })
}
