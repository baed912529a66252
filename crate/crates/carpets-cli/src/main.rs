//! Command-line front end: dimensions, spectra, measures, subsystems,
//! estimators, and renders for grid-aligned self-affine carpets.
//!
//! Exit codes: 0 on success, 1 on domain errors (surfaced with their error
//! name), 2 on usage errors. Identical arguments and seed always produce
//! byte-identical output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use carpets::{
    box_dimension_estimate, dimension_report, legendre_transform, lq_dimension_reading,
    lq_spectrum, modified_lower_dimension, parse_spec, projection_box_estimate,
    projection_dimension, render_measure, render_set, spectrum_curve, write_csv, CarpetSpec,
    Error, SelfAffineMeasure, SpectrumKind, DEFAULT_ENUM_CAP, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "carpets",
    about = "Self-affine carpets: exact dimension formulas and numerical cross-checks",
    version
)]
struct Cli {
    /// Emit machine-readable JSON instead of tables (CSV output is unchanged)
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for the counting kernels (results do not depend on this)
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the five closed-form dimensions of a carpet
    Dims {
        spec: PathBuf,
    },
    /// Sample the Assouad or lower spectrum as CSV
    Spectrum {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Interior grid points (the phase transition is always added)
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        spec: PathBuf,
    },
    /// Entropies and exact dimension of a self-affine measure
    MeasureDim {
        /// Use the maximal (McMullen) measure instead of file weights
        #[arg(long)]
        mcmullen: bool,
        spec: PathBuf,
    },
    /// Uniform-fibres subsystem convergence table as CSV
    Subsystem {
        /// Frequency parameters, comma separated
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        k_list: Vec<u64>,
        /// Report the smallest k whose gap drops below this value
        #[arg(long)]
        epsilon: Option<f64>,
        /// Use the maximal measure even when the file carries weights
        #[arg(long)]
        mcmullen: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        spec: PathBuf,
    },
    /// Numerical estimators (box, local-dim, lq, projection)
    #[command(subcommand)]
    Estimate(EstimateCommand),
    /// Render the carpet (or a measure heatmap) as a PGM image
    Render {
        /// Shade by cylinder measure instead of plain membership
        #[arg(long)]
        measure: bool,
        /// Use the maximal measure for shading
        #[arg(long)]
        mcmullen: bool,
        #[arg(long)]
        depth: u32,
        /// Pixels per unit length
        #[arg(long)]
        ppu: u32,
        #[arg(long)]
        out: PathBuf,
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum EstimateCommand {
    /// Pixel box-counting regression against the closed-form box dimension
    Box(BoxArgs),
    /// Monte Carlo local dimension of a measure at finite depth
    LocalDim(LocalDimArgs),
    /// L^q spectrum (and optional Legendre transform) as CSV
    Lq(LqArgs),
    /// Diagnostic box-count of a projection onto a line
    Projection(ProjectionArgs),
}

#[derive(Args)]
struct BoxArgs {
    /// Cylinder approximation depth
    #[arg(long, default_value_t = 10)]
    depth: u32,
    /// Scale exponents (cells of side n^-k), comma separated
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    k_list: Vec<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    spec: PathBuf,
}

#[derive(Args)]
struct LocalDimArgs {
    /// Vertical depth k (squares of height n^-k)
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Use the maximal measure instead of file weights
    #[arg(long)]
    mcmullen: bool,
    spec: PathBuf,
}

#[derive(Args)]
struct LqArgs {
    #[arg(long, default_value_t = 1000)]
    k: u64,
    #[arg(long, default_value_t = -10.0)]
    q_min: f64,
    #[arg(long, default_value_t = 10.0)]
    q_max: f64,
    #[arg(long, default_value_t = 0.05)]
    q_step: f64,
    /// Also emit the discrete Legendre transform over this many alpha points
    #[arg(long)]
    legendre: Option<usize>,
    /// Use the maximal measure instead of file weights
    #[arg(long)]
    mcmullen: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    spec: PathBuf,
}

#[derive(Args)]
struct ProjectionArgs {
    /// Projection angle in radians (principal axes are excluded)
    #[arg(long)]
    angle: f64,
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    k_list: Vec<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    spec: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Assouad,
    Lower,
}

impl From<KindArg> for SpectrumKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Assouad => SpectrumKind::Assouad,
            KindArg::Lower => SpectrumKind::Lower,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
        .expect("thread pool");
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Dims { spec } => {
            let (spec, _) = load(spec)?;
            let profile = spec.column_profile();
            let r = dimension_report(&profile, spec.m(), spec.n());
            let ml = modified_lower_dimension(&profile, spec.m(), spec.n());
            let projection = projection_dimension(&spec);
            if cli.json {
                let proj_json = match &projection {
                    Ok(v) => json!(v),
                    Err(e) => json!({ "error": e.to_string() }),
                };
                print_json(&json!({
                    "m": spec.m(),
                    "n": spec.n(),
                    "digit_count": spec.digit_count(),
                    "nonempty_columns": profile.column_count(),
                    "uniform_fibres": spec.is_uniform_fibres(),
                    "lower": r.lower,
                    "hausdorff": r.hausdorff,
                    "box": r.box_dim,
                    "packing": r.packing,
                    "assouad": r.assouad,
                    "modified_lower": ml,
                    "projection": proj_json,
                }));
            } else {
                println!("carpet {}x{} with {} digits in {} columns (uniform fibres: {})",
                    spec.m(), spec.n(), spec.digit_count(), profile.column_count(),
                    spec.is_uniform_fibres());
                println!("lower          {}", sig12(r.lower));
                println!("hausdorff      {}", sig12(r.hausdorff));
                println!("box            {}", sig12(r.box_dim));
                println!("packing        {}", sig12(r.packing));
                println!("assouad        {}", sig12(r.assouad));
                println!("modified lower {}", sig12(ml));
                match projection {
                    Ok(v) => println!("projection     {}", sig12(v)),
                    Err(e) => println!("projection     n/a ({e})"),
                }
            }
            Ok(())
        }
        Command::Spectrum {
            kind,
            steps,
            out,
            spec,
        } => {
            let (spec, _) = load(spec)?;
            let curve = spectrum_curve(
                &spec.column_profile(),
                spec.m(),
                spec.n(),
                (*kind).into(),
                *steps,
            )?;
            if cli.json {
                print_json(&json!({
                    "kind": curve.kind.label(),
                    "phase_transition": curve.phase_transition,
                    "thetas": curve.thetas,
                    "values": curve.values,
                }));
                Ok(())
            } else {
                emit(out.as_deref(), write_csv(&curve))
            }
        }
        Command::MeasureDim { mcmullen, spec } => {
            let measure = load_measure(spec, *mcmullen)?;
            let e = measure.entropies();
            let dim = measure.ly_dimension();
            if cli.json {
                print_json(&json!({
                    "h_mu": e.h_mu,
                    "h_pi_mu": e.h_pi_mu,
                    "dimension": dim,
                    "mcmullen": *mcmullen,
                }));
            } else {
                println!("h(mu)     {}", sig12(e.h_mu));
                println!("h(pi mu)  {}", sig12(e.h_pi_mu));
                println!("dimension {}", sig12(dim));
            }
            Ok(())
        }
        Command::Subsystem {
            k_list,
            epsilon,
            mcmullen,
            out,
            spec,
        } => {
            let measure = load_measure_defaulting_mcmullen(spec, *mcmullen)?;
            let table = carpets::convergence_table(&measure, k_list, *epsilon)?;
            if cli.json {
                let rows: Vec<_> = table
                    .rows
                    .iter()
                    .map(|(k, row)| match row {
                        Ok(r) => json!({
                            "k": r.k,
                            "l_k": r.word_length,
                            "dim_e_k": r.dimension,
                            "gap": r.gap,
                        }),
                        Err(e) => json!({ "k": k, "error": e.to_string() }),
                    })
                    .collect();
                print_json(&json!({
                    "hausdorff": table.hausdorff,
                    "first_k_within": table.first_k_within,
                    "rows": rows,
                }));
                Ok(())
            } else {
                emit(out.as_deref(), write_csv(&table))
            }
        }
        Command::Estimate(est) => run_estimate(cli, est),
        Command::Render {
            measure,
            mcmullen,
            depth,
            ppu,
            out,
            spec,
        } => {
            let (parsed, file_measure) = load(spec)?;
            if !carpets::io::resolution_aligned(&parsed, *depth, *ppu) {
                eprintln!(
                    "warning: {ppu} px/unit does not align with the depth-{depth} grid; \
                     cell boundaries will be rounded (use a multiple of lcm(m,n)^depth)"
                );
            }
            let image = if *measure {
                let mu = if *mcmullen {
                    SelfAffineMeasure::mcmullen(parsed.clone())?
                } else {
                    file_measure.ok_or_else(|| {
                        Error::Weight("spec file has no weights; pass --mcmullen or add them".into())
                    })?
                };
                render_measure(&mu, *depth, *ppu, DEFAULT_ENUM_CAP)?
            } else {
                render_set(&parsed, *depth, *ppu, DEFAULT_ENUM_CAP)?
            };
            fs::write(out, image.to_pgm())
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", out.display())))?;
            if !cli.json {
                println!("wrote {}x{} PGM to {}", image.width, image.height, out.display());
            } else {
                print_json(&json!({
                    "width": image.width,
                    "height": image.height,
                    "path": out.display().to_string(),
                }));
            }
            Ok(())
        }
    }
}

fn run_estimate(cli: &Cli, est: &EstimateCommand) -> Result<(), Error> {
    match est {
        EstimateCommand::Box(args) => {
            let (spec, _) = load(&args.spec)?;
            let estimate =
                box_dimension_estimate(&spec, args.depth, &args.k_list, DEFAULT_ENUM_CAP)?;
            let closed = dimension_report(&spec.column_profile(), spec.m(), spec.n()).box_dim;
            if cli.json {
                print_json(&json!({
                    "method": estimate.method,
                    "value": estimate.value,
                    "stderr": estimate.stderr,
                    "closed_form_box": closed,
                }));
                Ok(())
            } else {
                emit(args.out.as_deref(), {
                    let mut csv = write_csv(&estimate);
                    csv.push_str(&format!("# closed-form box = {}\n", closed));
                    csv
                })
            }
        }
        EstimateCommand::LocalDim(args) => {
            let measure = load_measure_defaulting_mcmullen(&args.spec, args.mcmullen)?;
            let estimate = measure.local_dimension_estimate(args.k, args.samples, args.seed)?;
            let analytic = measure.local_dimension_expectation(args.k)?;
            if cli.json {
                print_json(&json!({
                    "method": estimate.method,
                    "value": estimate.value,
                    "stderr": estimate.stderr,
                    "samples": estimate.samples,
                    "analytic_mean": analytic,
                    "ly_dimension": measure.ly_dimension(),
                    "seed": args.seed,
                }));
            } else {
                println!("local dimension  {}", sig12(estimate.value));
                if let Some(se) = estimate.stderr {
                    println!("stderr           {}", sig12(se));
                }
                println!("analytic mean    {}", sig12(analytic));
                println!("ly dimension     {}", sig12(measure.ly_dimension()));
            }
            Ok(())
        }
        EstimateCommand::Lq(args) => {
            let measure = load_measure_defaulting_mcmullen(&args.spec, args.mcmullen)?;
            if args.q_step <= 0.0 || args.q_max < args.q_min {
                return Err(Error::Domain("q grid must be increasing".into()));
            }
            let lo = (args.q_min / args.q_step).round() as i64;
            let hi = (args.q_max / args.q_step).round() as i64;
            let qs: Vec<f64> = (lo..=hi).map(|i| i as f64 * args.q_step).collect();
            let curve = lq_spectrum(&measure, &qs, args.k)?;
            if cli.json {
                let legendre = args
                    .legendre
                    .map(|points| -> Result<_, Error> {
                        let alphas = alpha_grid(&measure, points);
                        let pts = legendre_transform(&curve, &alphas)?;
                        Ok(pts
                            .iter()
                            .map(|p| json!({"alpha": p.alpha, "f": p.value, "attained": p.attained}))
                            .collect::<Vec<_>>())
                    })
                    .transpose()?;
                print_json(&json!({
                    "k": curve.k,
                    "convention": curve.convention,
                    "q": curve.qs,
                    "tau": curve.taus,
                    "dimension_reading": lq_dimension_reading(&measure, 1e-4),
                    "legendre": legendre,
                }));
                Ok(())
            } else {
                let mut csv = write_csv(&curve);
                if let Some(points) = args.legendre {
                    let alphas = alpha_grid(&measure, points);
                    let pts = legendre_transform(&curve, &alphas)?;
                    csv.push_str(&write_csv(&pts));
                }
                emit(args.out.as_deref(), csv)
            }
        }
        EstimateCommand::Projection(args) => {
            let (spec, _) = load(&args.spec)?;
            let estimate = projection_box_estimate(
                &spec,
                args.angle,
                args.depth,
                &args.k_list,
                DEFAULT_ENUM_CAP,
            )?;
            let theorem = projection_dimension(&spec);
            if cli.json {
                let theorem_json = match &theorem {
                    Ok(v) => json!(v),
                    Err(e) => json!({ "error": e.to_string() }),
                };
                print_json(&json!({
                    "method": estimate.method,
                    "value": estimate.value,
                    "stderr": estimate.stderr,
                    "theorem_value": theorem_json,
                }));
                Ok(())
            } else {
                emit(args.out.as_deref(), {
                    let mut csv = write_csv(&estimate);
                    match theorem {
                        Ok(v) => csv.push_str(&format!("# theorem value = {v}\n")),
                        Err(e) => csv.push_str(&format!("# theorem value n/a: {e}\n")),
                    }
                    csv
                })
            }
        }
    }
}

/// Alpha grid spanning the attainable local-dimension range with margin.
fn alpha_grid(measure: &SelfAffineMeasure, points: usize) -> Vec<f64> {
    let spec = measure.spec();
    let log_n = (spec.n() as f64).ln();
    let log_m = (spec.m() as f64).ln();
    let ratio = log_n / log_m;
    let bounds: Vec<f64> = measure
        .weights()
        .iter()
        .map(|p| -p.ln() * ratio / log_n)
        .collect();
    let lo = bounds.iter().cloned().fold(f64::INFINITY, f64::min) * 0.5;
    let hi = bounds.iter().cloned().fold(0.0, f64::max) * 1.5;
    let points = points.max(2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points as f64 - 1.0))
        .collect()
}

fn load(path: &PathBuf) -> Result<(CarpetSpec, Option<SelfAffineMeasure>), Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

fn load_measure(path: &PathBuf, mcmullen: bool) -> Result<SelfAffineMeasure, Error> {
    let (spec, measure) = load(path)?;
    if mcmullen {
        return SelfAffineMeasure::mcmullen(spec);
    }
    measure.ok_or_else(|| {
        Error::Weight("spec file has no weights; pass --mcmullen or add a weights field".into())
    })
}

/// File weights when present, maximal measure otherwise.
fn load_measure_defaulting_mcmullen(
    path: &PathBuf,
    force_mcmullen: bool,
) -> Result<SelfAffineMeasure, Error> {
    let (spec, measure) = load(path)?;
    if force_mcmullen {
        return SelfAffineMeasure::mcmullen(spec);
    }
    match measure {
        Some(m) => Ok(m),
        None => SelfAffineMeasure::mcmullen(spec),
    }
}

fn emit(out: Option<&std::path::Path>, text: String) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("valid json"));
}

/// 12 significant digits in plain decimal.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
