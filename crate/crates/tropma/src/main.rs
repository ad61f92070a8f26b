use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tropma::format::{
    self, DecompositionDto, MeasureDto, PlDto, SolveMetaDto,
};
use tropma::{grid, pipeline, verify, AppError};

#[derive(Parser)]
#[command(name = "tropma", version, about = "Convex Green functions, discrete measures and periodic Monge-Ampère solving on real tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the degree of a polarization (exact rational).
    Degree {
        /// Green data JSON file
        #[arg(long)]
        config: PathBuf,
    },
    /// Build the rational PL approximation of the canonical Green function.
    Approx {
        #[arg(long)]
        config: PathBuf,
        /// Anchor density: one piece per point of (1/N)Λ in the fundamental domain
        #[arg(long)]
        n: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Also write the induced periodic decomposition
        #[arg(long)]
        dump_decomposition: Option<PathBuf>,
    },
    /// Compute the discrete measure of the PL approximation.
    Measure {
        /// Green data JSON file
        #[arg(long, alias = "green")]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the periodic Monge-Ampère equation for a prescribed density.
    Solve {
        /// Problem JSON file
        #[arg(long)]
        config: PathBuf,
        /// Override the grid resolution from the problem file
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: solve, approximate at each N, measure, and report
    /// weak distances to the prescribed density.
    CalabiYau {
        /// Problem JSON file
        #[arg(long)]
        config: PathBuf,
        /// Single N (overrides the problem file's n_list)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the deterministic self-verification battery.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| AppError::input(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    std::fs::write(path, contents)
        .map_err(|e| AppError::input(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, AppError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| AppError::input(format!("serialization failed: {e}")))
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Degree { config } => {
            let data = pipeline::load_green_data(&config)?;
            println!("{}", format::format_rat(&data.degree()?));
        }
        Command::Approx { config, n, out, dump_decomposition } => {
            let data = pipeline::load_green_data(&config)?;
            let approx = pipeline::approx_canonical(&data, n)?;
            ensure_dir(&out)?;
            write_file(&out.join("pl.json"), &to_json(&PlDto::from_pl(&approx.pl))?)?;
            let dec_dto = DecompositionDto::from_decomposition(&approx.decomposition);
            let dec_path = dump_decomposition.unwrap_or_else(|| out.join("decomposition.json"));
            write_file(&dec_path, &to_json(&dec_dto)?)?;
            println!(
                "pieces: {}, cells: {}, vertices: {}",
                approx.pl.pieces().len(),
                approx.decomposition.cells().len(),
                approx.decomposition.vertices().len()
            );
        }
        Command::Measure { config, n, out } => {
            let data = pipeline::load_green_data(&config)?;
            let approx = pipeline::approx_canonical(&data, n)?;
            let m = pipeline::measure_parallel(&approx.decomposition)?;
            ensure_dir(&out)?;
            write_file(&out.join("measure.json"), &to_json(&MeasureDto::from_measure(&m))?)?;
            write_file(&out.join("measure.csv"), &grid::format_atoms_csv(&m, data.dim()))?;
            println!("atoms: {}, mass: {}", m.atoms.len(), format::format_rat(&m.total_mass()));
        }
        Command::Solve { config, grid_n, tol, out } => {
            let loaded = pipeline::load_problem(&config)?;
            let (grid_n, f_raw) = regrid(&loaded, grid_n, &config)?;
            let solve = pipeline::solve_problem(&loaded.data, &f_raw, grid_n, tol)?;
            ensure_dir(&out)?;
            let dims = vec![grid_n; loaded.data.dim()];
            grid::write_grid_csv(&out.join("solution.csv"), &dims, &solve.solution.phi)?;
            let meta = SolveMetaDto {
                residual: solve.solution.residual_inf,
                iters: solve.solution.newton_iters,
                min_eig: solve.solution.min_eig,
            };
            write_file(&out.join("solution.json"), &to_json(&meta)?)?;
            println!(
                "residual: {:e}, iters: {}",
                solve.solution.residual_inf, solve.solution.newton_iters
            );
        }
        Command::CalabiYau { config, n, grid_n, tol, out } => {
            let loaded = pipeline::load_problem(&config)?;
            let (grid_n, f_raw) = regrid(&loaded, grid_n, &config)?;
            let n_list: Vec<usize> = match n {
                Some(n) => vec![n],
                None => loaded.dto.n_list.clone().unwrap_or_else(|| vec![8, 16, 32]),
            };
            let quad_n = match loaded.data.dim() {
                1 => 512,
                2 => 128,
                _ => 32,
            };
            let result =
                pipeline::calabi_yau(&loaded.data, &f_raw, grid_n, tol, &n_list, quad_n)?;
            ensure_dir(&out)?;
            let dims = vec![grid_n; loaded.data.dim()];
            grid::write_grid_csv(&out.join("solution.csv"), &dims, &result.solve.solution.phi)?;
            let meta = SolveMetaDto {
                residual: result.solve.solution.residual_inf,
                iters: result.solve.solution.newton_iters,
                min_eig: result.solve.solution.min_eig,
            };
            write_file(&out.join("solution.json"), &to_json(&meta)?)?;
            write_file(
                &out.join("measure.json"),
                &to_json(&MeasureDto::from_measure(&result.final_measure))?,
            )?;
            let mut table = String::from("n,weak_distance,mass\n");
            for row in &result.rows {
                table.push_str(&format!(
                    "{},{},{}\n",
                    row.n,
                    row.weak_distance,
                    format::format_rat(&row.mass)
                ));
            }
            write_file(&out.join("convergence.csv"), &table)?;
            for row in &result.rows {
                println!("n = {:>4}: weak distance {:e}", row.n, row.weak_distance);
            }
        }
        Command::Verify { seed, out } => {
            let report = verify::run_verify(seed)?;
            let json = to_json(&report)?;
            if let Some(path) = &out {
                write_file(path, &json)?;
            }
            println!("{json}");
            if report.overall != "pass" {
                return Err(AppError::convergence("verification battery failed".into()));
            }
        }
    }
    Ok(())
}

/// Resample the density if the CLI overrides the problem file's grid.
fn regrid(
    loaded: &pipeline::LoadedProblem,
    grid_n: Option<usize>,
    config: &Path,
) -> Result<(usize, Vec<f64>), AppError> {
    match grid_n {
        Some(n) if n != loaded.dto.grid_n => {
            let f =
                pipeline::resolve_density(&loaded.dto.f, loaded.data.dim(), n, config.parent())?;
            Ok((n, f))
        }
        _ => Ok((loaded.dto.grid_n, loaded.f_raw.clone())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
