//! Deterministic self-verification battery. Every check is seeded, so
//! two runs with the same seed produce byte-identical reports; wall
//! clock timings go to stderr only.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tropma_core::clmeasure::{self, DensityMeasure, Measure};
use tropma_core::green::{
    canonical_green, hessian_bounds, integrate_mixed_hessian, GreenData, GreenFunction,
};
use tropma_core::masolver;
use tropma_core::periodic::{TrigPoly, TrigTerm};
use tropma_core::plapprox::{build_pl_approx, check_error_bounds, PlError};
use tropma_core::rat::{self, rat, rat_i, Rat};
use tropma_core::{math, Lattice};

use crate::format::format_rat;
use crate::{pipeline, AppError};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: String,
    pub observed: String,
    pub bound: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub overall: String,
    pub checks: Vec<CheckResult>,
}

fn result(name: &str, pass: bool, observed: String, bound: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        status: if pass { "pass" } else { "fail" }.into(),
        observed,
        bound,
    }
}

fn data_1d(c: Rat) -> GreenData {
    GreenData::new(Lattice::standard(1), vec![vec![rat_i(1)]], vec![c]).unwrap()
}

fn eye(d: usize) -> Vec<Vec<Rat>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { rat_i(1) } else { rat_i(0) }).collect())
        .collect()
}

fn mass_suite() -> Vec<(GreenData, usize)> {
    let mut suite = Vec::new();
    for c in [rat_i(0), rat(1, 2)] {
        for n in [2usize, 4, 8] {
            suite.push((data_1d(c.clone()), n));
        }
    }
    let z2 = Lattice::standard(2);
    let stretched =
        Lattice::new(vec![vec![rat_i(1), rat_i(0)], vec![rat_i(0), rat_i(2)]]).unwrap();
    let hex = vec![vec![rat_i(2), rat_i(1)], vec![rat_i(1), rat_i(2)]];
    let datas = [
        GreenData::new(z2.clone(), eye(2), rat::zeros(2)).unwrap(),
        GreenData::new(z2, hex, rat::zeros(2)).unwrap(),
        GreenData::new(stretched, eye(2), rat::zeros(2)).unwrap(),
    ];
    for data in datas {
        for n in [1usize, 2] {
            suite.push((data.clone(), n));
        }
    }
    suite
}

fn check_mass_identity() -> Result<CheckResult, AppError> {
    let mut worst = rat_i(0);
    for (data, n) in mass_suite() {
        let approx = pipeline::approx_canonical(&data, n)?;
        let m = pipeline::measure_parallel(&approx.decomposition)?;
        let diff = m.total_mass() - data.degree()?;
        let diff = if diff < rat_i(0) { -diff } else { diff };
        if diff > worst {
            worst = diff;
        }
    }
    Ok(result("mass-identity", worst == rat_i(0), format_rat(&worst), "0".into()))
}

fn bound_suite() -> Vec<(GreenData, usize)> {
    let hex = GreenData::new(
        Lattice::standard(2),
        vec![vec![rat_i(2), rat_i(1)], vec![rat_i(1), rat_i(2)]],
        rat::zeros(2),
    )
    .unwrap();
    vec![(data_1d(rat(1, 2)), 4), (hex, 2)]
}

fn check_error_bound_suite() -> Result<CheckResult, AppError> {
    let mut worst_ratio = 0.0f64;
    for (data, n) in bound_suite() {
        let g = canonical_green(data);
        let bounds = hessian_bounds(&g, 32, 0.1)?;
        let f = build_pl_approx(&g, n, &bounds)?;
        let report = check_error_bounds(&f, &g, &bounds, 1024)?;
        for ratio in [
            report.max_value_gap / report.value_bound,
            report.max_gradient_deviation / report.gradient_bound,
            report.max_cell_diameter / report.diameter_bound,
        ] {
            if ratio > worst_ratio {
                worst_ratio = ratio;
            }
        }
    }
    Ok(result("error-bounds", worst_ratio < 1.0, format!("{worst_ratio}"), "1".into()))
}

/// Nudge a PL approximation upward and demand that the value-gap check
/// rejects it (the function is no longer below the graph).
fn check_fault_injection() -> Result<CheckResult, AppError> {
    let g = canonical_green(data_1d(rat(1, 2)));
    let bounds = hessian_bounds(&g, 32, 0.1)?;
    let f = build_pl_approx(&g, 4, &bounds)?;
    let broken = f.shifted(&rat(1, 10));
    let rejected = matches!(
        check_error_bounds(&broken, &g, &bounds, 256),
        Err(PlError::ValueBoundViolated { .. })
    );
    Ok(result("fault-injection", rejected, if rejected { "rejected" } else { "accepted" }.into(), "rejected".into()))
}

fn check_weak_convergence() -> Result<CheckResult, AppError> {
    let data = data_1d(rat_i(0));
    let poly = TrigPoly::new(1, vec![TrigTerm { k: vec![1], cos_coef: 0.02, sin_coef: 0.0 }]);
    let g = GreenFunction::with_trig(data, poly);
    let bounds = hessian_bounds(&g, 64, 0.1)?;
    let limit = DensityMeasure::hessian_of(g.clone());
    let battery = pipeline::harmonic_battery(g.data().lattice());
    let mut dists = Vec::new();
    for n in [8usize, 16, 32] {
        let f = build_pl_approx(&g, n, &bounds)?;
        let m = clmeasure::chambert_loir_measure(&f)?;
        let dist = clmeasure::weak_distance(
            &Measure::Discrete(&m),
            &Measure::Density(&limit),
            &battery,
            512,
        )?;
        dists.push(dist);
    }
    let final_d = dists[2];
    let pass = final_d <= 0.02 && (final_d <= dists[0] / 2.0 || final_d <= 1e-12);
    Ok(result("weak-convergence", pass, format!("{final_d}"), "0.02".into()))
}

fn random_trig(rng: &mut ChaCha8Rng, dim: usize) -> TrigPoly {
    let mut terms = Vec::new();
    for _ in 0..2 {
        let mut k = vec![0i64; dim];
        while k.iter().all(|&ki| ki == 0) {
            for ki in k.iter_mut() {
                *ki = rng.gen_range(-2i64..=2);
            }
        }
        terms.push(TrigTerm {
            k,
            cos_coef: rng.gen_range(-0.05..0.05),
            sin_coef: rng.gen_range(-0.05..0.05),
        });
    }
    TrigPoly::new(dim, terms)
}

fn check_mixed_hessian(seed: u64) -> Result<CheckResult, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for dim in [1usize, 2] {
        let data =
            GreenData::new(Lattice::standard(dim), eye(dim), rat::zeros(dim)).unwrap();
        let degree = rat::to_f64(&data.degree()?);
        for _ in 0..2 {
            let gs: Vec<GreenFunction> = (0..dim)
                .map(|_| GreenFunction::with_trig(data.clone(), random_trig(&mut rng, dim)))
                .collect();
            let refs: Vec<&GreenFunction> = gs.iter().collect();
            let integral = integrate_mixed_hessian(&refs, 64)?;
            let diff = math::abs(integral - degree);
            if diff > worst {
                worst = diff;
            }
        }
    }
    Ok(result("mixed-hessian-degree", worst <= 1e-8, format!("{worst}"), "1e-8".into()))
}

fn check_ma_trivial() -> Result<CheckResult, AppError> {
    let data = data_1d(rat_i(0));
    let problem = masolver::normalize_density(&data, &vec![0.0; 64], 64)?;
    let sol = masolver::solve(&problem, 1e-10, 50)?;
    let max_phi = sol.phi.iter().fold(0.0f64, |a, &v| a.max(math::abs(v)));
    let pass = sol.newton_iters <= 1 && max_phi <= 1e-12;
    Ok(result("ma-trivial-density", pass, format!("{max_phi}"), "1e-12".into()))
}

fn check_ma_manufactured() -> Result<CheckResult, AppError> {
    // φ*(y) = a·cos(2πy) on b = 1 gives f = log(1 − a·4π²·cos(2πy)).
    let a = 0.01;
    let data = data_1d(rat_i(0));
    let mut errs = Vec::new();
    for grid_n in [32usize, 64] {
        let mut f = Vec::with_capacity(grid_n);
        for i in 0..grid_n {
            let y = i as f64 / grid_n as f64;
            f.push(math::ln(1.0 - a * math::TAU * math::TAU * math::cos(math::TAU * y)));
        }
        let problem = masolver::normalize_density(&data, &f, grid_n)?;
        let sol = masolver::solve(&problem, 1e-12, 50)?;
        let mut err = 0.0f64;
        for (i, &phi) in sol.phi.iter().enumerate() {
            let y = i as f64 / grid_n as f64;
            err = err.max(math::abs(phi - a * math::cos(math::TAU * y)));
        }
        errs.push(err);
    }
    let ratio = errs[0] / errs[1];
    let pass = (3.5..=4.5).contains(&ratio);
    Ok(result("ma-second-order", pass, format!("{ratio}"), "[3.5, 4.5]".into()))
}

fn check_end_to_end() -> Result<CheckResult, AppError> {
    let data = data_1d(rat_i(0));
    let grid_n = 64;
    let f: Vec<f64> = (0..grid_n)
        .map(|i| 0.1 * math::cos(math::TAU * i as f64 / grid_n as f64))
        .collect();
    let out = pipeline::calabi_yau(&data, &f, grid_n, 1e-10, &[32], 512)?;
    let row = &out.rows[0];
    let pass = row.weak_distance <= 0.05 && row.mass == rat_i(1);
    Ok(result("end-to-end-pipeline", pass, format!("{}", row.weak_distance), "0.05".into()))
}

fn check_degree_quadrature() -> Result<CheckResult, AppError> {
    let mut worst = 0.0f64;
    for (data, _) in bound_suite() {
        let g = canonical_green(data.clone());
        let refs: Vec<&GreenFunction> = (0..data.dim()).map(|_| &g).collect();
        let integral = integrate_mixed_hessian(&refs, 64)?;
        let diff = math::abs(integral - rat::to_f64(&data.degree()?));
        if diff > worst {
            worst = diff;
        }
    }
    Ok(result("degree-quadrature", worst <= 1e-8, format!("{worst}"), "1e-8".into()))
}

pub fn run_verify(seed: u64) -> Result<VerifyReport, AppError> {
    let checks: Vec<(&str, Box<dyn Fn() -> Result<CheckResult, AppError>>)> = vec![
        ("mass-identity", Box::new(check_mass_identity)),
        ("error-bounds", Box::new(check_error_bound_suite)),
        ("fault-injection", Box::new(check_fault_injection)),
        ("weak-convergence", Box::new(check_weak_convergence)),
        ("degree-quadrature", Box::new(check_degree_quadrature)),
        ("mixed-hessian-degree", Box::new(move || check_mixed_hessian(seed))),
        ("ma-trivial-density", Box::new(check_ma_trivial)),
        ("ma-second-order", Box::new(check_ma_manufactured)),
        ("end-to-end-pipeline", Box::new(check_end_to_end)),
    ];
    let mut results = Vec::with_capacity(checks.len());
    for (name, run) in checks {
        let start = Instant::now();
        let res = run()?;
        eprintln!("{name}: {} ({:.1} ms)", res.status, start.elapsed().as_secs_f64() * 1e3);
        results.push(res);
    }
    let overall = if results.iter().all(|r| r.status == "pass") { "pass" } else { "fail" };
    Ok(VerifyReport { seed, overall: overall.into(), checks: results })
}
