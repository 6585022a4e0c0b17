//! `mur`: optimal measurement-uncertainty constants, Wasserstein-1
//! distances and covariant phase-space simulations from the command line.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 numeric tolerance
//! failure, 3 I/O or parse error.

mod reference;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mur_core::basis::BasisSpec;
use mur_core::covariant::{simulate, DensityOperator, NamedState, UniformGrid};
use mur_core::io::{fmt_f64, grid_to_csv, parse_measure_csv, to_json};
use mur_core::spectral::{
    admissible_region, coherent_constant, ground_state_wavefunction, optimal_constant, KSpec, RegionSource,
};
use mur_core::transport::{kantorovich_lp, wasserstein, Measure, Metric};
use mur_core::Error;

#[derive(Debug, Parser)]
#[command(name = "mur", version, about = "Optimal constants of the position-momentum measurement uncertainty relation")]
struct RunConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground state of a|Q| + b|P| and the constant C, as JSON.
    Constant {
        #[command(flatten)]
        k: KArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recompute C and C′ for d = 1, 2, 3, 42 and compare with published values.
    Table {
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Wasserstein-1 distance between two measure files.
    Wasserstein {
        file_a: PathBuf,
        file_b: PathBuf,
        /// l2 (euclidean), l1 (manhattan) or linf (chebyshev).
        #[arg(long, default_value = "l2", value_parser = parse_metric)]
        metric: Metric,
        /// Also solve the transport LP in one dimension and compare.
        #[arg(long)]
        oracle: bool,
        /// Allowed gap between the distribution-function formula and the LP.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Ground-state wavefunction on a grid (radius grid for d ≥ 2).
    Groundstate {
        #[command(flatten)]
        k: KArgs,
        #[arg(long)]
        grid_min: Option<f64>,
        #[arg(long, default_value_t = 12.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        grid_step: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Marginals, noise densities and Husimi density of a covariant observable.
    Simulate {
        /// ground, excited-N, squeezed-L, optimal or superposition-N-M-…
        #[arg(long, default_value = "ground")]
        state: String,
        /// Coefficient file for the state (one Hermite coefficient per line).
        #[arg(long, conflicts_with = "state")]
        state_file: Option<PathBuf>,
        /// Density operator generating the observable, same names as --state.
        #[arg(long, default_value = "ground")]
        noise: String,
        #[arg(long, conflicts_with = "noise")]
        noise_file: Option<PathBuf>,
        /// Number of Hermite functions.
        #[arg(long, default_value_t = 256)]
        basis: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = -12.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 12.0)]
        x_max: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        x_step: f64,
        #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
        phase_min: f64,
        #[arg(long, default_value_t = 8.0)]
        phase_max: f64,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        phase_step: f64,
        /// Largest accepted marginal-identity residual.
        #[arg(long, default_value_t = 2e-4)]
        tolerance: f64,
        /// Directory receiving the CSV bundle and summary.json.
        #[arg(long)]
        output_dir: PathBuf,
        /// Husimi density as csv (p,q,value) or json.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Points (ΔQ, ΔP) of the admissible region, as CSV.
    Region {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of Hermite functions for the random states.
        #[arg(long, default_value_t = 256)]
        basis: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Allowed shortfall below the hyperbola ΔQ·ΔP = Cħ.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct KArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Basis size N (default 128 for d ≤ 3, 256 above).
    #[arg(long)]
    basis: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

impl KArgs {
    fn spec(&self) -> Result<KSpec, CliError> {
        let n = self.basis.unwrap_or_else(|| BasisSpec::default_size(self.dim));
        Ok(KSpec::new(self.a, self.b, BasisSpec::ground_sector(self.dim, n, self.hbar)?)?)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Tolerance(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Tolerance(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse { .. } => CliError::Io(msg),
            Error::Eigen(_) | Error::Quadrature(_) | Error::Transport(_) | Error::GridCoverage { .. } => {
                CliError::Tolerance(msg)
            }
            _ => CliError::Usage(msg),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_constant(k: &KArgs, out: &OutputArgs) -> Result<(), CliError> {
    let result = optimal_constant(&k.spec()?)?;
    emit(out, &to_json(&result)?)
}

fn cmd_table(out: &OutputArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in &reference::ROWS {
        let n = BasisSpec::default_size(r.dimension);
        let result = optimal_constant(&KSpec::symmetric(r.dimension, n, 1.0)?)?;
        let coherent = coherent_constant(r.dimension, 1.0)?;
        let ok_c = (result.c - r.optimal).abs() <= r.optimal_tolerance;
        let ok_cc = (coherent - r.coherent).abs() <= r.coherent_tolerance;
        if !ok_c {
            failures.push(format!(
                "d={}: C = {} differs from {} by more than {:e}",
                r.dimension, result.c, r.optimal, r.optimal_tolerance
            ));
        }
        if !ok_cc {
            failures.push(format!(
                "d={}: C' = {} differs from {} by more than {:e}",
                r.dimension, coherent, r.coherent, r.coherent_tolerance
            ));
        }
        rows.push((r, result, coherent, ok_c && ok_cc));
    }
    let text = match out.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(r, res, cc, ok)| {
                    json!({
                        "dimension": r.dimension,
                        "N": res.size,
                        "C": res.c,
                        "Cprime": cc,
                        "convergence": res.convergence,
                        "withinTolerance": ok,
                    })
                })
                .collect();
            to_json(&json!({ "schema": 1, "rows": v }))?
        }
        Format::Csv => {
            let mut t = String::from("d,N,C,C',E0(N/4)-E0(N/2),E0(N/2)-E0(N),status\n");
            for (r, res, cc, ok) in &rows {
                let steps = res.ladder_steps();
                let step = |i: usize| steps.get(i).map_or(String::from("nan"), |v| format!("{v:.2e}"));
                t.push_str(&format!(
                    "{},{},{:.6},{:.6},{},{},{}\n",
                    r.dimension,
                    res.size,
                    res.c,
                    cc,
                    step(0),
                    step(1),
                    if *ok { "ok" } else { "FAIL" }
                ));
            }
            t
        }
    };
    emit(out, &text)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(failures.join("\n")))
    }
}

fn cmd_wasserstein(a: &Path, b: &Path, metric: Metric, oracle: bool, tolerance: f64) -> Result<(), CliError> {
    let load = |p: &Path| -> Result<Measure, CliError> {
        parse_measure_csv(&read(p)?).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    };
    let (mu, nu) = (load(a)?, load(b)?);
    let value = wasserstein(&mu, &nu, metric)?;
    println!("{}", fmt_f64(value));
    if oracle {
        let (Measure::Discrete(x), Measure::Discrete(y)) = (&mu, &nu) else {
            return Err(CliError::Usage("--oracle needs two discrete measures".into()));
        };
        let lp = kantorovich_lp(x, y, metric)?.value;
        eprintln!("transport LP: {}  gap {:.3e}", fmt_f64(lp), (lp - value).abs());
        if (lp - value).abs() > tolerance {
            return Err(CliError::Tolerance(format!("LP value {lp} differs from {value} by more than {tolerance:e}")));
        }
    }
    Ok(())
}

fn cmd_groundstate(k: &KArgs, grid_min: Option<f64>, grid_max: f64, step: f64, out: &OutputArgs) -> Result<(), CliError> {
    let result = optimal_constant(&k.spec()?)?;
    let lo = grid_min.unwrap_or(if k.dim == 1 { -grid_max } else { 0.0 });
    let grid = UniformGrid::span(lo, grid_max, step)?;
    let table = ground_state_wavefunction(&result, &grid)?;
    if (table.mass - 1.0).abs() > 1e-6 {
        eprintln!("warning: grid holds probability {} of the ground state", table.mass);
    }
    eprintln!("overlap with the oscillator ground state: {}", fmt_f64(table.overlap));
    let text = match out.format {
        Format::Csv => table.to_csv(),
        Format::Json => to_json(&json!({
            "schema": 1,
            "result": result,
            "overlap": table.overlap,
            "mass": table.mass,
            "x": table.points,
            "psi": table.psi,
            "density": table.density.values(),
        }))?,
    };
    emit(out, &text)
}

fn load_state(name: &str, file: Option<&Path>, basis: BasisSpec) -> Result<DensityOperator, CliError> {
    match file {
        Some(path) => {
            let text = read(path)?;
            let mut coeffs = vec![0.0; basis.size()];
            let mut k = 0;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let v: f64 = line.parse().map_err(|_| {
                    CliError::Io(format!("{}: line {}: `{line}` is not a number", path.display(), i + 1))
                })?;
                if k >= coeffs.len() {
                    return Err(CliError::Usage(format!("{} has more than {} coefficients", path.display(), basis.size())));
                }
                coeffs[k] = v;
                k += 1;
            }
            Ok(DensityOperator::pure(basis, &coeffs)?)
        }
        None => Ok(name.parse::<NamedState>()?.build(basis)?),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    state: &str,
    state_file: Option<&Path>,
    noise: &str,
    noise_file: Option<&Path>,
    basis: usize,
    hbar: f64,
    x: (f64, f64, f64),
    phase: (f64, f64, f64),
    tolerance: f64,
    dir: &Path,
    format: Format,
) -> Result<(), CliError> {
    let spec = BasisSpec::full_hermite(basis, hbar)?;
    let rho = load_state(state, state_file, spec)?;
    let m = load_state(noise, noise_file, spec)?;
    let x_grid = UniformGrid::span(x.0, x.1, x.2)?;
    let phase_grid = UniformGrid::span(phase.0, phase.1, phase.2)?;
    let sim = simulate(&rho, &m, &x_grid, &phase_grid)?;

    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, g) in [
        ("ideal_q.csv", &sim.ideal_q),
        ("ideal_p.csv", &sim.ideal_p),
        ("noise_q.csv", &sim.noise.mq),
        ("noise_p.csv", &sim.noise.mp),
        ("marginal_q.csv", &sim.marginal_q),
        ("marginal_p.csv", &sim.marginal_p),
    ] {
        write(&dir.join(name), &grid_to_csv(g))?;
    }
    match format {
        Format::Csv => write(&dir.join("husimi.csv"), &sim.husimi.to_csv())?,
        Format::Json => write(&dir.join("husimi.json"), &sim.husimi.to_json()?)?,
    }
    let summary = json!({
        "schema": 1,
        "state": state_file.map_or(state.to_string(), |p| p.display().to_string()),
        "noise": noise_file.map_or(noise.to_string(), |p| p.display().to_string()),
        "basis": basis,
        "hbar": hbar,
        "deltaQ": sim.pair.delta_q,
        "deltaP": sim.pair.delta_p,
        "product": sim.pair.product(),
        "gridDeltaQ": sim.grid_pair.delta_q,
        "gridDeltaP": sim.grid_pair.delta_p,
        "husimiIntegral": sim.husimi.integral(),
        "residualQ": sim.residual_q,
        "residualP": sim.residual_p,
    });
    write(&dir.join("summary.json"), &to_json(&summary)?)?;
    println!("dQ {}  dP {}  product {}", fmt_f64(sim.pair.delta_q), fmt_f64(sim.pair.delta_p), fmt_f64(sim.pair.product()));
    let worst = sim.residual_q.max(sim.residual_p);
    if worst > tolerance {
        return Err(CliError::Tolerance(format!("marginal identity residual {worst:.3e} exceeds {tolerance:e}")));
    }
    Ok(())
}

fn cmd_region(samples: usize, seed: u64, basis: usize, hbar: f64, tolerance: f64, out: &OutputArgs) -> Result<(), CliError> {
    let region = admissible_region(&BasisSpec::full_hermite(basis, hbar)?, samples, seed)?;
    let bound = region.constant * region.hbar;
    let text = match out.format {
        Format::Json => to_json(&region)?,
        Format::Csv => {
            let mut t = String::from("deltaQ,deltaP,product,kind,lambda\n");
            for p in &region.points {
                let (kind, lambda) = match p.source {
                    RegionSource::Dilation(l) => ("dilation", fmt_f64(l)),
                    RegionSource::Random => ("random", String::new()),
                };
                t.push_str(&format!(
                    "{},{},{},{kind},{lambda}\n",
                    fmt_f64(p.pair.delta_q),
                    fmt_f64(p.pair.delta_p),
                    fmt_f64(p.pair.product())
                ));
            }
            t
        }
    };
    emit(out, &text)?;
    let below = region.points.iter().filter(|p| p.pair.product() < bound - tolerance).count();
    if below > 0 {
        return Err(CliError::Tolerance(format!("{below} points lie below ΔQ·ΔP = {bound}")));
    }
    Ok(())
}

fn run(config: RunConfig) -> Result<(), CliError> {
    match &config.command {
        Command::Constant { k, out } => cmd_constant(k, out),
        Command::Table { out } => cmd_table(out),
        Command::Wasserstein { file_a, file_b, metric, oracle, tolerance } => {
            cmd_wasserstein(file_a, file_b, *metric, *oracle, *tolerance)
        }
        Command::Groundstate { k, grid_min, grid_max, grid_step, out } => {
            cmd_groundstate(k, *grid_min, *grid_max, *grid_step, out)
        }
        Command::Simulate {
            state,
            state_file,
            noise,
            noise_file,
            basis,
            hbar,
            x_min,
            x_max,
            x_step,
            phase_min,
            phase_max,
            phase_step,
            tolerance,
            output_dir,
            format,
        } => cmd_simulate(
            state,
            state_file.as_deref(),
            noise,
            noise_file.as_deref(),
            *basis,
            *hbar,
            (*x_min, *x_max, *x_step),
            (*phase_min, *phase_max, *phase_step),
            *tolerance,
            output_dir,
            *format,
        ),
        Command::Region { samples, seed, basis, hbar, tolerance, out } => {
            cmd_region(*samples, *seed, *basis, *hbar, *tolerance, out)
        }
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
