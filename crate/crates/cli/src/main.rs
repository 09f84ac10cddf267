//! `lowrank`: run the recovery solvers, the synthetic benchmarks and the
//! image recipes from the command line.
//!
//! Exit status: 0 on success, 1 when a solver or I/O step fails, 2 on a
//! usage error.

mod matrix_io;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lowrank::bench::{
    emit_csv, emit_plot, preset, run_benchmark, BenchProblem, SolverKind, SolverSpec, TimeGrid,
};
use lowrank::imaging::{
    background_subtract, inpaint, mask_from_image, read_pgm, read_ppm, write_pgm, write_ppm,
    FrameStack, GrayImage,
};
use lowrank::mc::McProblem;
use lowrank::ppca::{ppca_fit, ppca_log_likelihood};
use lowrank::rpca::{godec, pcp_ialm, spcp_bcd, RpcaProblem};
use lowrank::{DenseMatrix, LowRankError, ObservationMask, SolverConfig, SolverTrace};

#[derive(Parser, Debug)]
#[command(
    name = "lowrank",
    version,
    about = "Low-rank matrix recovery toolkit",
    arg_required_else_help = true
)]
struct Cli {
    /// Seed for all generated data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

/// Solver parameters; unset flags keep the solver's own default.
#[derive(Args, Debug, Clone, Default)]
struct SolverArgs {
    /// Regularisation weight (nuclear norm for completion, l1 for RPCA).
    #[arg(long)]
    lambda: Option<f64>,
    /// Target rank.
    #[arg(long)]
    rank: Option<usize>,
    /// Penalty parameter (ALM, SPCP) or step size (SVP).
    #[arg(long)]
    mu: Option<f64>,
    /// Penalty growth factor.
    #[arg(long)]
    mu_growth: Option<f64>,
    /// Penalty cap.
    #[arg(long)]
    mu_max: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative-change stopping threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Outlier budget for GoDec.
    #[arg(long)]
    cardinality: Option<usize>,
    /// Known Gaussian noise level.
    #[arg(long)]
    noise_level: Option<f64>,
    /// Disable the lambda ladder of soft-impute and apg.
    #[arg(long)]
    no_continuation: bool,
}

impl SolverArgs {
    fn apply(&self, mut c: SolverConfig) -> SolverConfig {
        c.lambda = self.lambda.or(c.lambda);
        c.rank = self.rank.or(c.rank);
        c.mu = self.mu.or(c.mu);
        c.mu_growth = self.mu_growth.unwrap_or(c.mu_growth);
        c.mu_max = self.mu_max.unwrap_or(c.mu_max);
        c.max_iters = self.max_iters.unwrap_or(c.max_iters);
        c.tol = self.tol.unwrap_or(c.tol);
        c.cardinality = self.cardinality.or(c.cardinality);
        c.noise_level = self.noise_level.or(c.noise_level);
        if self.no_continuation {
            c.continuation = false;
        }
        c
    }

    fn config(&self) -> Result<SolverConfig, CliError> {
        let c = self.apply(SolverConfig::default());
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(c)
    }
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse::<SolverKind>().map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a benchmark preset and write the per-iteration trace CSV.
    Bench {
        /// One of fig1a..fig1d (completion) or fig2a..fig2d (robust PCA).
        #[arg(long)]
        preset: String,
        /// Matrix size m; preset ranks scale with m/1000.
        #[arg(long, default_value_t = 200)]
        scale: usize,
        /// Instances per solver.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Comma-separated subset of the preset's solvers.
        #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
        solvers: Vec<SolverKind>,
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG plot of the averaged curves.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Complete a partially observed matrix (PGM with a mask, or CSV with
    /// empty cells for missing entries).
    Complete {
        #[arg(long)]
        input: PathBuf,
        /// Observation mask: PGM (255 observed, 0 missing) or CSV (nonzero observed).
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, default_value = "soft-impute", value_parser = parse_solver)]
        solver: SolverKind,
        /// Output CSV, or PGM when the name ends in .pgm.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-iteration trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Split a matrix into low-rank and sparse parts.
    Rpca {
        /// CSV or PGM matrix.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "pcp", value_parser = parse_solver)]
        solver: SolverKind,
        #[arg(long)]
        out_low: PathBuf,
        #[arg(long)]
        out_sparse: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Restore missing pixels of an image by matrix completion.
    Inpaint {
        /// PGM image, or PPM with --color.
        #[arg(long)]
        input: PathBuf,
        /// PGM mask: 255 observed, 0 missing.
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value = "soft-impute", value_parser = parse_solver)]
        solver: SolverKind,
        #[arg(long)]
        out: PathBuf,
        /// Treat input and output as PPM and process each channel separately.
        #[arg(long)]
        color: bool,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Separate static background from moving foreground in a frame directory.
    Bgsub {
        /// Directory of equally sized PGM frames, processed in name order.
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        out_bg: PathBuf,
        #[arg(long)]
        out_fg: PathBuf,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Fit probabilistic PCA to the columns of a CSV matrix.
    Ppca {
        #[arg(long)]
        input: PathBuf,
        /// Latent dimension.
        #[arg(long)]
        rank: usize,
        /// Optional CSV for the fitted loading matrix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failed(LowRankError),
}

impl From<LowRankError> for CliError {
    fn from(e: LowRankError) -> Self {
        CliError::Failed(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(CliError::Failed(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bench {
            preset: name,
            scale,
            repeats,
            solvers,
            out,
            plot,
            solver,
        } => bench(
            &name,
            scale,
            repeats,
            cli.seed,
            &solvers,
            &out,
            plot.as_deref(),
            &solver,
        ),
        Command::Complete {
            input,
            mask,
            solver,
            out,
            trace,
            solver_args,
        } => complete(
            &input,
            mask.as_deref(),
            solver,
            &out,
            trace.as_deref(),
            &solver_args,
        ),
        Command::Rpca {
            input,
            solver,
            out_low,
            out_sparse,
            trace,
            solver_args,
        } => rpca(
            &input,
            solver,
            &out_low,
            out_sparse.as_deref(),
            trace.as_deref(),
            &solver_args,
        ),
        Command::Inpaint {
            input,
            mask,
            solver,
            out,
            color,
            solver_args,
        } => inpaint_cmd(&input, &mask, solver, &out, color, &solver_args),
        Command::Bgsub {
            frames,
            out_bg,
            out_fg,
            solver_args,
        } => bgsub(&frames, &out_bg, &out_fg, &solver_args),
        Command::Ppca { input, rank, out } => ppca(&input, rank, out.as_deref()),
    }
}

#[allow(clippy::too_many_arguments)]
fn bench(
    name: &str,
    scale: usize,
    repeats: usize,
    seed: u64,
    only: &[SolverKind],
    out: &Path,
    plot: Option<&Path>,
    args: &SolverArgs,
) -> Result<(), CliError> {
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let p = preset(name, scale, seed, repeats).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(k) = only
        .iter()
        .find(|k| !p.solvers.iter().any(|s| s.kind == **k))
    {
        return Err(CliError::Usage(format!(
            "solver {k} is not part of preset {name}"
        )));
    }
    let solvers: Vec<SolverSpec> = p
        .solvers
        .iter()
        .filter(|s| only.is_empty() || only.contains(&s.kind))
        .map(|s| SolverSpec::new(s.kind, args.apply(s.config.clone())))
        .collect();
    for s in &solvers {
        s.config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let report = run_benchmark(&p.spec, &solvers, &TimeGrid::default())?;
    for cell in &report.cells {
        if let Err(msg) = &cell.outcome {
            eprintln!(
                "warning: {} instance {} failed: {msg}",
                cell.solver, cell.instance
            );
        }
    }
    emit_csv(&report, BufWriter::new(fs::File::create(out)?))?;
    if report.curves.is_empty() {
        return Err(LowRankError::EmptyReport.into());
    }
    if let Some(path) = plot {
        emit_plot(&report, BufWriter::new(fs::File::create(path)?))?;
    }
    for curve in &report.curves {
        let last = curve
            .mean_relative_distance
            .last()
            .copied()
            .unwrap_or(f64::NAN);
        println!(
            "{:<12} instances {}  final mean relative distance {last:.3e}",
            curve.solver, curve.instances
        );
    }
    Ok(())
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    Ok(read_pgm(&fs::read(path)?)?)
}

/// Matrix plus the mask of present entries from a CSV or PGM file.
fn read_input(path: &Path) -> Result<(DenseMatrix, ObservationMask), CliError> {
    if is_pgm(path) {
        let m = read_image(path)?.to_matrix();
        let (r, c) = m.shape();
        Ok((m, ObservationMask::full(r, c)))
    } else {
        Ok(matrix_io::read_matrix(path)?)
    }
}

fn read_mask(path: &Path) -> Result<ObservationMask, CliError> {
    if is_pgm(path) {
        Ok(mask_from_image(&read_image(path)?)?)
    } else {
        let (m, present) = matrix_io::read_matrix(path)?;
        let bitmap = m
            .as_slice()
            .iter()
            .zip(present.bitmap())
            .map(|(&v, &p)| p && v != 0.0)
            .collect();
        Ok(ObservationMask::from_bitmap(m.rows(), m.cols(), bitmap)?)
    }
}

fn write_trace(path: Option<&Path>, trace: &SolverTrace) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let mut w = csv::Writer::from_path(path).map_err(LowRankError::from)?;
    w.write_record(["iter", "elapsed_seconds", "objective"])
        .map_err(LowRankError::from)?;
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            format!("{:.16e}", r.elapsed_seconds),
            format!("{:.16e}", r.objective),
        ])
        .map_err(LowRankError::from)?;
    }
    w.flush()?;
    Ok(())
}

fn write_output(path: &Path, m: &DenseMatrix) -> Result<(), CliError> {
    if is_pgm(path) {
        fs::write(path, write_pgm(&GrayImage::from_matrix(m)?))?;
    } else {
        matrix_io::write_matrix(path, m)?;
    }
    Ok(())
}

fn complete(
    input: &Path,
    mask: Option<&Path>,
    solver: SolverKind,
    out: &Path,
    trace: Option<&Path>,
    args: &SolverArgs,
) -> Result<(), CliError> {
    if !solver.is_completion() {
        return Err(CliError::Usage(format!(
            "{solver} is not a matrix completion solver"
        )));
    }
    let config = args.config()?;
    let (values, present) = read_input(input)?;
    let omega = match mask {
        Some(path) => read_mask(path)?,
        None if is_pgm(input) => return Err(CliError::Usage("a PGM input needs --mask".into())),
        None => present,
    };
    let problem = BenchProblem::Completion(McProblem::new(&values, omega)?);
    let (x, t) = solver.run(&problem, &config, None)?;
    write_output(out, &x)?;
    write_trace(trace, &t)?;
    println!("{solver}: {} iterations", t.len().saturating_sub(1));
    Ok(())
}

fn rpca(
    input: &Path,
    solver: SolverKind,
    out_low: &Path,
    out_sparse: Option<&Path>,
    trace: Option<&Path>,
    args: &SolverArgs,
) -> Result<(), CliError> {
    let config = args.config()?;
    let (values, present) = read_input(input)?;
    if !present.is_full() {
        return Err(
            LowRankError::InvalidArgument("robust PCA input has missing entries".into()).into(),
        );
    }
    let problem = RpcaProblem::new(values)?;
    let sol = match solver {
        SolverKind::Pcp => pcp_ialm(&problem, &config, None)?,
        SolverKind::Spcp => spcp_bcd(&problem, &config, None)?,
        SolverKind::Godec => godec(&problem, &config, None)?,
        other => {
            return Err(CliError::Usage(format!(
                "{other} is not a robust PCA solver"
            )))
        }
    };
    write_output(out_low, &sol.low_rank)?;
    if let Some(path) = out_sparse {
        matrix_io::write_matrix(path, &sol.sparse)?;
    }
    write_trace(trace, &sol.trace)?;
    println!("{solver}: {} iterations", sol.trace.len().saturating_sub(1));
    Ok(())
}

fn inpaint_cmd(
    input: &Path,
    mask: &Path,
    solver: SolverKind,
    out: &Path,
    color: bool,
    args: &SolverArgs,
) -> Result<(), CliError> {
    if !solver.is_completion() {
        return Err(CliError::Usage(format!(
            "{solver} is not a matrix completion solver"
        )));
    }
    let config = args.config()?;
    let mask = read_image(mask)?;
    let bytes = fs::read(input)?;
    if color {
        let image = read_ppm(&bytes)?;
        let restored = image.map_channels(|c| inpaint(c, &mask, solver, &config))?;
        fs::write(out, write_ppm(&restored))?;
    } else {
        let restored = inpaint(&read_pgm(&bytes)?, &mask, solver, &config)?;
        fs::write(out, write_pgm(&restored))?;
    }
    Ok(())
}

fn bgsub(frames: &Path, out_bg: &Path, out_fg: &Path, args: &SolverArgs) -> Result<(), CliError> {
    let config = args.config()?;
    let mut names: Vec<PathBuf> = fs::read_dir(frames)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| is_pgm(p))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(LowRankError::InvalidArgument(format!(
            "no .pgm frames in {}",
            frames.display()
        ))
        .into());
    }
    let stack = FrameStack::new(
        names
            .iter()
            .map(|p| read_image(p))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    let split = background_subtract(&stack, &config)?;
    fs::create_dir_all(out_bg)?;
    fs::create_dir_all(out_fg)?;
    for ((name, bg), fg) in names
        .iter()
        .zip(split.background.frames())
        .zip(split.foreground.frames())
    {
        let file = name.file_name().expect("listed files have names");
        fs::write(out_bg.join(file), write_pgm(bg))?;
        fs::write(out_fg.join(file), write_pgm(fg))?;
    }
    println!(
        "{} frames separated in {} iterations",
        stack.len(),
        split.trace.len().saturating_sub(1)
    );
    Ok(())
}

fn ppca(input: &Path, rank: usize, out: Option<&Path>) -> Result<(), CliError> {
    let (data, present) = matrix_io::read_matrix(input)?;
    if !present.is_full() {
        return Err(LowRankError::InvalidArgument("ppca input has missing entries".into()).into());
    }
    let model = ppca_fit(&data, rank)?;
    let ll = ppca_log_likelihood(&model, &data)?;
    println!("noise_variance {:.16e}", model.noise_variance);
    println!("log_likelihood {ll:.16e}");
    if model.below_noise_floor {
        println!("warning: some latent directions fall below the noise floor");
    }
    if let Some(path) = out {
        matrix_io::write_matrix(path, &model.a_hat)?;
    }
    Ok(())
}
