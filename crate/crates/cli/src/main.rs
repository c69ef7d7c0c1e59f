//! `lipext`: Lipschitz extensions of graph data and image inpainting.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipext::graph_io::{read_graph, write_function};
use lipext::imaging::{
    inpaint_partial, read_masked, write_image, Adjacency, ColorSpace, GraphKind, InpaintConfig, Method as PixelMethod,
    PatchConfig,
};
use lipext::tight::{prox_conjugate, prox_group_maxnorm_pow};
use lipext::{
    brute_force_is, brute_force_prox, energy_is, extend_componentwise, lipschitz_profile, minimize_is,
    tight_extension, verify_tight, AdmmConfig, BoundaryProblem, Error, IterationConfig, OracleConfig,
};

#[derive(Parser)]
#[command(name = "lipext", version, about = "Tight Lipschitz extensions on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extend boundary data given in a graph file.
    Extend(ExtendArgs),
    /// Fill the masked pixels of an image.
    Inpaint(InpaintArgs),
    /// Compare the closed-form prox with a brute-force search.
    ProxCheck(ProxArgs),
    /// Compare the ADMM minimizer with brute force and test tightness.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Componentwise,
    Admm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Grid4,
    Grid8,
    Knn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Color {
    Rgb,
    Yuv,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "componentwise")]
    method: Method,
    /// Exponent of the I_s energy.
    #[arg(long, default_value_t = 20.0)]
    s: f64,
    /// Step size of the infinity-Laplacian iteration.
    #[arg(long, default_value_t = 0.4)]
    tau: f64,
    /// ADMM penalty.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Stopping tolerance for either method.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write diagnostics here instead of standard error.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl SolverArgs {
    fn iteration(&self, base: IterationConfig) -> IterationConfig {
        IterationConfig {
            tau: self.tau,
            tol: self.tol.unwrap_or(base.tol),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            ..base
        }
    }

    fn admm(&self) -> AdmmConfig {
        let base = AdmmConfig::default();
        AdmmConfig {
            s: self.s,
            gamma: self.gamma,
            tol_primal: self.tol.unwrap_or(base.tol_primal),
            tol_dual: self.tol.unwrap_or(base.tol_dual),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            ..base
        }
    }
}

#[derive(Args)]
struct ExtendArgs {
    graph: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Extension output; standard output if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InpaintArgs {
    image: PathBuf,
    /// 8-bit grayscale, 255 marks missing pixels.
    mask: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "grid4")]
    graph: Graph,
    /// Patch half-width p.
    #[arg(long, default_value_t = 7)]
    patch: usize,
    /// Search radius r.
    #[arg(long, default_value_t = 15)]
    radius: usize,
    /// Neighbors per pixel k.
    #[arg(long, default_value_t = 10)]
    knn: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "rgb")]
    color: Color,
    #[arg(long, default_value_t = 1.0)]
    yuv_scale: f64,
    #[arg(long, default_value_t = 64)]
    max_outer: usize,
    /// Write the image even when some pixels stay unfilled.
    #[arg(long)]
    allow_partial: bool,
    /// Write every solved graph to `<prefix>-<n>.txt`.
    #[arg(long)]
    export_graph: Option<String>,
}

#[derive(Args)]
struct ProxArgs {
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Group size.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 4.0)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

#[derive(Args)]
struct OracleArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 4.0)]
    s: f64,
    /// Exponent used for the tightness check.
    #[arg(long, default_value_t = 40.0)]
    tight_s: f64,
}

/// `key=value` diagnostics.
#[derive(Default)]
struct Report(String);

impl Report {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}={value}");
    }

    fn emit(&self, path: Option<&Path>) -> Result<(), Error> {
        match path {
            Some(p) => std::fs::write(p, &self.0)?,
            None => eprint!("{}", self.0),
        }
        Ok(())
    }
}

fn open_graph(path: &Path) -> Result<BoundaryProblem, Error> {
    read_graph(BufReader::new(File::open(path)?))
}

fn run_extend(args: &ExtendArgs) -> Result<(), Error> {
    let prob = open_graph(&args.graph)?;
    let solver = &args.solver;
    let iteration = solver.iteration(IterationConfig::default());
    let admm = solver.admm();
    match solver.method {
        Method::Componentwise => iteration.validate()?,
        Method::Admm => admm.validate()?,
    }
    let mut report = Report::default();
    report.put("nodes", prob.node_count());
    report.put("interior", prob.interior_count());
    report.put("dim", prob.dim());
    let start = Instant::now();
    let (u, converged) = match solver.method {
        Method::Componentwise => {
            if iteration.tau_unproven() {
                eprintln!("warning: convergence is not guaranteed for tau >= 1");
            }
            let (u, r) = extend_componentwise(&prob, &iteration)?;
            report.put("method", "componentwise");
            report.put("tau", iteration.tau);
            report.put("tau_unproven", iteration.tau_unproven());
            report.put("iterations", r.iterations);
            report.put("step_norm", format!("{:e}", r.final_step_norm));
            report.put("laplacian_residual", format!("{:e}", r.residual));
            (u, r.converged)
        }
        Method::Admm => {
            let (u, r) = minimize_is(&prob, &admm)?;
            report.put("method", "admm");
            report.put("iterations", r.iterations);
            report.put("primal_residual", format!("{:e}", r.primal_residual));
            report.put("dual_residual", format!("{:e}", r.dual_residual));
            report.put("reweights", r.reweights);
            (u, r.converged)
        }
    };
    report.put("s", solver.s);
    report.put("energy", format!("{:e}", energy_is(&u, &prob, solver.s)?));
    report.put("max_local_lipschitz", lipschitz_profile(&u, &prob)?.max());
    report.put("converged", converged);
    report.put("wall_seconds", start.elapsed().as_secs_f64());
    match &args.output {
        Some(p) => write_function(&u, BufWriter::new(File::create(p)?))?,
        None => write_function(&u, std::io::stdout().lock())?,
    }
    report.emit(solver.report.as_deref())?;
    if !converged {
        return Err(Error::NotConverged {
            context: "extension".into(),
        });
    }
    Ok(())
}

fn inpaint_config(args: &InpaintArgs) -> Result<InpaintConfig, Error> {
    let solver = &args.solver;
    let base = InpaintConfig::default();
    let patch = PatchConfig {
        patch_half: args.patch,
        radius: args.radius,
        neighbors: args.knn,
        sigma: args.sigma,
    };
    let cfg = InpaintConfig {
        method: match solver.method {
            Method::Componentwise => PixelMethod::Componentwise,
            Method::Admm => PixelMethod::Admm { s: solver.s },
        },
        graph: match args.graph {
            Graph::Grid4 => GraphKind::Grid(Adjacency::Four),
            Graph::Grid8 => GraphKind::Grid(Adjacency::Eight),
            Graph::Knn => GraphKind::Knn(patch),
        },
        color: match args.color {
            Color::Rgb => ColorSpace::Rgb,
            Color::Yuv => ColorSpace::Yuv { scale: args.yuv_scale },
        },
        iteration: solver.iteration(base.iteration),
        admm: solver.admm(),
        max_outer: args.max_outer,
        export_graphs: args.export_graph.is_some(),
    };
    cfg.validate()?;
    if matches!(args.graph, Graph::Knn) && patch.radius_below_patch() {
        eprintln!("warning: search radius {} is smaller than the patch half-width {}", args.radius, args.patch);
    }
    if cfg.iteration.tau_unproven() && matches!(solver.method, Method::Componentwise) {
        eprintln!("warning: convergence is not guaranteed for tau >= 1");
    }
    Ok(cfg)
}

fn run_inpaint(args: &InpaintArgs) -> Result<(), Error> {
    let cfg = inpaint_config(args)?;
    let img = read_masked(&args.image, &args.mask)?;
    let start = Instant::now();
    let (outcome, failure) = inpaint_partial(&img, &cfg)?;
    let mut report = Report::default();
    report.put("width", img.width());
    report.put("height", img.height());
    report.put("channels", img.channels());
    report.put("missing", img.missing_count());
    let sizes: Vec<String> = outcome.frontier_sizes.iter().map(usize::to_string).collect();
    report.put("outer_iterations", outcome.frontier_sizes.len());
    report.put("frontier_sizes", sizes.join(","));
    report.put("solves", outcome.solves.len());
    report.put("max_solver_iterations", outcome.solves.iter().map(|s| s.iterations).max().unwrap_or(0));
    report.put(
        "max_solver_residual",
        format!("{:e}", outcome.solves.iter().map(|s| s.residual).fold(0.0, f64::max)),
    );
    report.put("unreachable", outcome.unreachable.len());
    report.put("wall_seconds", start.elapsed().as_secs_f64());
    if let Some(prefix) = &args.export_graph {
        for (n, text) in outcome.graphs.iter().enumerate() {
            std::fs::write(format!("{prefix}-{n}.txt"), text)?;
        }
    }
    if failure.is_none() || args.allow_partial {
        write_image(&args.output, &outcome.image)?;
        report.put("written", true);
    } else {
        report.put("written", false);
    }
    report.emit(args.solver.report.as_deref())?;
    failure.map_or(Ok(()), Err)
}

fn run_prox_check(args: &ProxArgs) -> Result<bool, Error> {
    let (x, m, s, lambda) = (&args.x, args.m, args.s, args.lambda);
    let prox = prox_group_maxnorm_pow(x, m, s, lambda)?;
    let dual = prox_conjugate(x, m, s, lambda)?;
    let brute = brute_force_prox(x, m, s, lambda, &OracleConfig::default())?;
    let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let moreau = prox.iter().zip(&dual).zip(x).map(|((p, d), v)| (p + d - v).abs()).fold(0.0, f64::max) / scale;
    let gap = prox.iter().zip(&brute).map(|(p, b)| (p - b).abs()).fold(0.0, f64::max) / scale;
    let list = |v: &[f64]| v.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(",");
    let mut report = Report::default();
    report.put("prox", list(&prox));
    report.put("conjugate_prox", list(&dual));
    report.put("brute_force", list(&brute));
    report.put("moreau_residual", format!("{moreau:e}"));
    report.put("brute_force_gap", format!("{gap:e}"));
    let ok = moreau <= 1e-9 && gap <= 1e-6;
    report.put("ok", ok);
    print!("{}", report.0);
    Ok(ok)
}

fn run_oracle_check(args: &OracleArgs) -> Result<bool, Error> {
    let prob = open_graph(&args.graph)?;
    let oracle = OracleConfig::default();
    let (u, r) = minimize_is(&prob, &AdmmConfig::with_s(args.s))?;
    let (_, brute) = brute_force_is(&prob, args.s, &oracle)?;
    let tight = tight_extension(&prob, args.tight_s, &AdmmConfig::default())?;
    let accepted = verify_tight(&tight, &prob, &oracle)?;
    let gap = (r.objective - brute).abs() / brute.abs().max(1.0);
    let mut report = Report::default();
    report.put("s", args.s);
    report.put("admm_objective", format!("{:e}", r.objective));
    report.put("admm_energy", format!("{:e}", energy_is(&u, &prob, args.s)?));
    report.put("brute_force_objective", format!("{brute:e}"));
    report.put("objective_gap", format!("{gap:e}"));
    report.put("tight_s", args.tight_s);
    report.put("verify_tight", accepted);
    let ok = gap <= 1e-4 && accepted;
    report.put("ok", ok);
    print!("{}", report.0);
    Ok(ok)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotConverged { .. }
        | Error::Stalled { .. }
        | Error::RootFinding { .. }
        | Error::LinearSolve { .. }
        | Error::NotPositiveDefinite { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Extend(a) => run_extend(a).map(|_| true),
        Command::Inpaint(a) => run_inpaint(a).map(|_| true),
        Command::ProxCheck(a) => run_prox_check(a),
        Command::OracleCheck(a) => run_oracle_check(a),
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
