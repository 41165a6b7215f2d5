use clap::{Args, Parser, Subcommand, ValueEnum};
use regimesplit::density::{Density1D, EmpiricalDist, FamilySpec, QuadratureConfig};
use regimesplit::geometry;
use regimesplit::inequality::{self, ConvexPotential};
use regimesplit::multidim;
use regimesplit::splitcore;
use regimesplit::verify;
use regimesplit::Error;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "regimesplit",
    version,
    about = "Two-regime quadratic-loss splits: 1-D solvers, convex-potential inequality checks, \
             elliptical direction optimization, exact polygon cuts, and a verification suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the optimal two-level split for a family or a sample file
    Split(SplitArgs),
    /// Tabulate f(t), the m-k gap, and the CDF over a threshold range
    Sweep(SweepArgs),
    /// Best halfspace direction for an elliptical model config file
    Elliptical(EllipticalArgs),
    /// Exact vertical-cut functionals R(t) for a convex polygon file
    Polygon(PolygonArgs),
    /// Check the convex-potential integral inequality
    Lemma(LemmaArgs),
    /// Run the built-in verification suite
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct FamilyArgs {
    /// Family name: gaussian | laplace | uniform | weibull | piecewise
    #[arg(long)]
    family: Option<String>,
    /// Location (gaussian, laplace)
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Standard deviation (gaussian)
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Scale (laplace) or upper endpoint (uniform)
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Lower endpoint (uniform)
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Shape (weibull)
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Comma-separated breakpoints (piecewise)
    #[arg(long, allow_hyphen_values = true)]
    breaks: Option<String>,
    /// Comma-separated density values (piecewise)
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Whitespace-separated sample file; solved exactly by brute force
    #[arg(long)]
    sample: Option<String>,
    /// Skip the log-concave fast path and maximize on a global grid
    #[arg(long)]
    force_global: bool,
    /// Grid size for the global solver
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Relative tie tolerance for reporting multiple maximizers
    #[arg(long, default_value_t = 1e-9)]
    tie_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Threshold range as lo:hi:n
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EllipticalArgs {
    /// Model config file: dim, mu, sigma (row-major), z0
    #[arg(long)]
    model: String,
}

#[derive(Args)]
struct PolygonArgs {
    /// Polygon file: one "x y" vertex per line, counterclockwise
    #[arg(long)]
    file: String,
    /// Vertical cut abscissa (rational such as 3/2; repeatable)
    #[arg(long, allow_hyphen_values = true)]
    cut: Vec<String>,
}

#[derive(Args)]
struct LemmaArgs {
    /// Comma-separated knots of a piecewise-linear potential (first must be 0)
    #[arg(long, allow_hyphen_values = true)]
    knots: Option<String>,
    /// Comma-separated slopes, one per knot, nondecreasing
    #[arg(long, allow_hyphen_values = true)]
    slopes: Option<String>,
    /// Potential value at 0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    v0: f64,
    /// Number of random potentials when no explicit potential is given
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Seed for the random-potential run
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only the named checks (repeatable); default runs all
    #[arg(long)]
    only: Vec<String>,
    /// Print each check's mathematical claim under its result line
    #[arg(long)]
    paper: bool,
    /// Override the random-potential count of the lemma check
    #[arg(long)]
    n: Option<usize>,
    /// Override the seed of the lemma check
    #[arg(long)]
    seed: Option<u64>,
}

enum CliError {
    Input(String),
    Solver(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Input(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Solver(msg) => {
                eprintln!("solver error: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn input_err<T>(r: Result<T, Error>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Input(e.to_string()))
}

/// Domain errors are the caller's fault (exit 2); everything else a solver
/// gave up on (exit 3).
fn solver_err<T>(r: Result<T, Error>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        Error::Domain(_) => CliError::Input(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    })
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad {what} entry: {s:?}")))
        })
        .collect()
}

fn require<T: Copy>(v: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("family {family} requires --{flag}")))
}

/// Maps flags to a family descriptor, rejecting parameters that do not
/// belong to the named family.
fn family_spec(f: &FamilyArgs) -> Result<FamilySpec, CliError> {
    let name = f
        .family
        .as_deref()
        .ok_or_else(|| CliError::Input("no input: pass --family or --sample".into()))?;
    let mut used: Vec<&str> = Vec::new();
    let spec = match name {
        "gaussian" => {
            used.extend(["mu", "sigma"]);
            FamilySpec::Gaussian {
                mu: require(f.mu, "mu", name)?,
                sigma: require(f.sigma, "sigma", name)?,
            }
        }
        "laplace" => {
            used.extend(["mu", "b"]);
            FamilySpec::Laplace {
                mu: require(f.mu, "mu", name)?,
                b: require(f.b, "b", name)?,
            }
        }
        "uniform" => {
            used.extend(["a", "b"]);
            FamilySpec::Uniform {
                a: require(f.a, "a", name)?,
                b: require(f.b, "b", name)?,
            }
        }
        "weibull" => {
            used.push("k");
            FamilySpec::Weibull {
                k: require(f.k, "k", name)?,
            }
        }
        "piecewise" | "piecewise_const" => {
            used.extend(["breaks", "values"]);
            let breaks = f
                .breaks
                .as_deref()
                .ok_or_else(|| CliError::Input(format!("family {name} requires --breaks")))?;
            let values = f
                .values
                .as_deref()
                .ok_or_else(|| CliError::Input(format!("family {name} requires --values")))?;
            FamilySpec::PiecewiseConst {
                breaks: parse_f64_list(breaks, "--breaks")?,
                values: parse_f64_list(values, "--values")?,
            }
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown family {other:?}; expected gaussian, laplace, uniform, weibull, or piecewise"
            )))
        }
    };
    let stray = [
        ("mu", f.mu.is_some()),
        ("sigma", f.sigma.is_some()),
        ("b", f.b.is_some()),
        ("a", f.a.is_some()),
        ("k", f.k.is_some()),
        ("breaks", f.breaks.is_some()),
        ("values", f.values.is_some()),
    ]
    .into_iter()
    .find(|(flag, given)| *given && !used.contains(flag));
    if let Some((flag, _)) = stray {
        return Err(CliError::Input(format!(
            "--{flag} does not apply to family {name}"
        )));
    }
    Ok(spec)
}

fn build_density(f: &FamilyArgs) -> Result<Density1D, CliError> {
    solver_err(family_spec(f)?.build(QuadratureConfig::default()))
}

fn emit(text: String) {
    if text.ends_with('\n') {
        print!("{text}");
    } else {
        println!("{text}");
    }
}

fn cmd_split(args: &SplitArgs) -> Result<(), CliError> {
    if args.sample.is_some() && args.family.family.is_some() {
        return Err(CliError::Input(
            "pass exactly one of --family and --sample".into(),
        ));
    }
    let result = if let Some(path) = &args.sample {
        if args.force_global {
            return Err(CliError::Input(
                "--force-global applies only to family input; samples are solved exactly".into(),
            ));
        }
        let text = read_file(path)?;
        let values: Result<Vec<f64>, CliError> = text
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Input(format!("bad sample entry: {s:?}")))
            })
            .collect();
        let emp = input_err(EmpiricalDist::from_values(&values?))?;
        solver_err(splitcore::solve_empirical(&emp))?
    } else {
        let d = build_density(&args.family)?;
        if args.force_global {
            solver_err(splitcore::solve_global(&d, args.grid, args.tie_tol))?
        } else {
            match splitcore::solve_logconcave(&d) {
                Ok(r) => r,
                Err(Error::NotLogConcave { worst }) => {
                    eprintln!(
                        "density is not log-concave (worst second difference {worst:.3e}); \
                         falling back to the global grid"
                    );
                    solver_err(splitcore::solve_global(&d, args.grid, args.tie_tol))?
                }
                Err(e) => return Err(CliError::Solver(e.to_string())),
            }
        }
    };
    match args.format {
        Format::Json => emit(result.to_json()),
        Format::Csv => emit(result.to_csv()),
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "range must look like lo:hi:n, got {text:?}"
        )));
    }
    let lo = parts[0]
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("bad range lower bound {:?}", parts[0])))?;
    let hi = parts[1]
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("bad range upper bound {:?}", parts[1])))?;
    let n = parts[2]
        .parse::<usize>()
        .map_err(|_| CliError::Input(format!("bad range count {:?}", parts[2])))?;
    Ok((lo, hi, n))
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let d = build_density(&args.family)?;
    let (lo, hi, n) = parse_range(&args.range)?;
    let table = solver_err(splitcore::sweep(&d, lo, hi, n))?;
    match args.format {
        Format::Json => emit(table.to_json()),
        Format::Csv => emit(table.to_csv()),
    }
    Ok(())
}

fn cmd_elliptical(args: &EllipticalArgs) -> Result<(), CliError> {
    let text = read_file(&args.model)?;
    let model = input_err(multidim::parse_model_config(&text))?;
    let best = solver_err(multidim::best_direction(&model))?;
    emit(best.to_json());
    Ok(())
}

fn cmd_polygon(args: &PolygonArgs) -> Result<(), CliError> {
    if args.cut.is_empty() {
        return Err(CliError::Input("pass at least one --cut".into()));
    }
    let text = read_file(&args.file)?;
    let polygon = input_err(geometry::parse_polygon(&text))?;
    let cuts: Result<Vec<_>, CliError> = args
        .cut
        .iter()
        .map(|s| input_err(geometry::parse_rational(s)))
        .collect();
    let rows = geometry::r_sweep(&polygon, &cuts?);
    let body: Vec<String> = rows.iter().map(|r| r.to_json()).collect();
    emit(format!("[{}]", body.join(",")));
    Ok(())
}

fn cmd_lemma(args: &LemmaArgs) -> Result<(), CliError> {
    match (&args.knots, &args.slopes) {
        (Some(knots), Some(slopes)) => {
            let v = input_err(ConvexPotential::piecewise_linear(
                parse_f64_list(knots, "--knots")?,
                parse_f64_list(slopes, "--slopes")?,
                args.v0,
            ))?;
            let check = solver_err(inequality::check_lemma(&v, 1e-9))?;
            emit(check.to_json());
        }
        (None, None) => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let mut min_slack = f64::INFINITY;
            let mut all_hold = true;
            for _ in 0..args.n {
                let v = inequality::random_piecewise_potential(&mut rng, 8);
                let check = solver_err(inequality::check_lemma(&v, 1e-9))?;
                min_slack = min_slack.min(check.slack);
                all_hold &= check.holds;
            }
            emit(format!(
                "{{\"checked\":{},\"all_hold\":{},\"min_slack\":{}}}",
                args.n,
                all_hold,
                regimesplit::report::fmt_f64(min_slack)
            ));
        }
        _ => {
            return Err(CliError::Input(
                "--knots and --slopes must be given together".into(),
            ))
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let names: Vec<&str> = if args.only.is_empty() {
        verify::CHECK_NAMES.to_vec()
    } else {
        for name in &args.only {
            if !verify::CHECK_NAMES.contains(&name.as_str()) {
                return Err(CliError::Input(format!(
                    "unknown check {name:?}; available: {}",
                    verify::CHECK_NAMES.join(", ")
                )));
            }
        }
        verify::CHECK_NAMES
            .iter()
            .copied()
            .filter(|n| args.only.iter().any(|o| o == n))
            .collect()
    };
    let mut all_passed = true;
    for name in names {
        let check = if name == "lemma" && (args.n.is_some() || args.seed.is_some()) {
            verify::check_lemma_suite_with(args.n.unwrap_or(1000), args.seed.unwrap_or(1004))
        } else {
            verify::run_check(name).expect("names validated above")
        };
        // Wall time goes to stderr so stdout stays byte-identical across runs.
        eprintln!("{} finished in {:.3} s", check.name, check.elapsed.as_secs_f64());
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", check.name, check.details);
        if args.paper {
            println!("     claim: {}", check.claim);
        }
        all_passed &= check.passed;
    }
    Ok(all_passed)
}

fn init_thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("REGIMESPLIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("REGIMESPLIT_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(CliError::Input(
            "REGIMESPLIT_THREADS must be a positive integer".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool setup failed: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        return e.report();
    }
    let outcome = match &cli.command {
        Command::Split(a) => cmd_split(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Elliptical(a) => cmd_elliptical(a),
        Command::Polygon(a) => cmd_polygon(a),
        Command::Lemma(a) => cmd_lemma(a),
        Command::Verify(a) => match cmd_verify(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
