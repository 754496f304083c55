#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod codefile;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use stiefel_core::atlas::{best_exact, best_known, circle_code, find_ssc, o2_code, o2_solution, o2_table, Claim};
use stiefel_core::bounds::{orthoplex_bound_sq, orthoplex_cap, radon_hurwitz, simplex_bound_sq, simplex_cap};
use stiefel_core::designs::load_design;
use stiefel_core::optimizer::{optimize, OptimizerConfig};
use stiefel_core::orthoplex_codes::{soc_complex_orbit, soc_real_hadamard};
use stiefel_core::simplex_codes::{
    ssc_complexify, ssc_from_bibd, ssc_from_hr_family, ssc_kronecker, ssc_pad_row, ssc_radon_hurwitz, ssc_realify,
    ssc_regular_representation, ssc_sphere, ssc_symplectic_lift,
};
use stiefel_core::verifier::DEFAULT_CERTIFY_TOL;
use stiefel_core::{certify, certify_default, CodeReport64, Error, FieldTag, Result, StiefelCode64};

use codefile::{parse_generators, CodeFile};

#[derive(Parser)]
#[command(name = "stiefel", version, about = "Chordal-distance codes on Stiefel manifolds")]
struct Cli {
    /// Emit reports as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code with a named construction and certify it.
    Construct(ConstructArgs),
    /// Certify a code file; prints the full report.
    Verify(VerifyArgs),
    /// Tabulate the simplex and orthoplex bounds.
    Bound(BoundArgs),
    /// Numerical max-min search.
    Optimize(OptimizeArgs),
    /// Closed-form small cases and best-known dispatch.
    #[command(subcommand)]
    Atlas(AtlasCommand),
}

#[derive(Args, Clone, Copy)]
struct Params {
    /// Ground field, R or C.
    #[arg(long)]
    field: FieldTag,
    /// Ambient dimension.
    #[arg(long)]
    d: usize,
    /// Frame rank, at most d.
    #[arg(long)]
    r: usize,
    /// Number of points.
    #[arg(long)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sphere,
    RadonHurwitz,
    RegularRep,
    Symplectic,
    Bibd,
    Orbit,
    Hadamard,
    Pad,
    Kronecker,
    Realify,
    Complexify,
    Auto,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    params: Params,
    #[arg(long, value_enum)]
    method: Method,
    /// Resolvable design: `builtin:NAME` or a design file.
    #[arg(long)]
    design: Option<String>,
    /// Code file used as the seed of bibd, pad, kronecker, realify or complexify.
    #[arg(long)]
    seed_code: Option<PathBuf>,
    /// Kronecker factor.
    #[arg(long)]
    k: Option<usize>,
    /// Hurwitz-Radon family file for radon-hurwitz.
    #[arg(long)]
    hr_file: Option<PathBuf>,
    /// Write the code file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Tolerance on squared distances and Stiefel membership.
    #[arg(long, default_value_t = DEFAULT_CERTIFY_TOL)]
    tol: f64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    field: FieldTag,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, conflicts_with = "n_range")]
    n: Option<usize>,
    /// Inclusive range `A..B`.
    #[arg(long)]
    n_range: Option<String>,
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long)]
    beta_start: Option<f64>,
    #[arg(long)]
    beta_end: Option<f64>,
    #[arg(long)]
    beta_growth: Option<f64>,
    #[arg(long)]
    step_size: Option<f64>,
}

impl SearchArgs {
    fn config(&self) -> OptimizerConfig {
        let base = OptimizerConfig::default();
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            beta_start: self.beta_start.unwrap_or(base.beta_start),
            beta_end: self.beta_end.unwrap_or(base.beta_end),
            beta_growth: self.beta_growth.unwrap_or(base.beta_growth),
            step_size: self.step_size.unwrap_or(base.step_size),
            ..base
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    params: Params,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the code file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AtlasCommand {
    /// Optimal code in O(2).
    O2 {
        #[arg(long)]
        n: usize,
        /// Write the code file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// k_n for n = 2..=max-n.
    O2Table {
        #[arg(long, default_value_t = 12)]
        max_n: usize,
    },
    /// Evenly spaced points on the unit circle.
    Circle {
        #[arg(long)]
        n: usize,
        /// Write the code file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best implemented construction, falling back to the optimizer.
    Best {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the code file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Stable process exit codes.
mod exit {
    pub const VERIFICATION_FAILED: u8 = 1;
    pub const BAD_INPUT: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InfeasibleParameters(_)
        | Error::UnsupportedResidue(_)
        | Error::NoKnownConstruction(_)
        | Error::UnsupportedDimension(_)
        | Error::ParameterMismatch(_)
        | Error::NotFound
        | Error::BudgetExceeded(_) => exit::INFEASIBLE,
        Error::NumericalFailure { .. } => exit::NUMERICAL,
        _ => exit::BAD_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(exit::BAD_INPUT);
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("STIEFEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("STIEFEL_THREADS={raw:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Construct(args) => construct(args, cli.json),
        Command::Verify(args) => verify(args, cli.json),
        Command::Bound(args) => bound(args, cli.json),
        Command::Optimize(args) => run_optimize(args, cli.json),
        Command::Atlas(cmd) => atlas(cmd, cli.json),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InfeasibleParameters(msg()))
    }
}

/// An SSC to feed a transform: the user's seed file, or the best chain found.
fn seed_code(path: Option<&Path>, field: FieldTag, d: usize, r: usize, n: usize) -> Result<(StiefelCode64, String)> {
    if let Some(path) = path {
        return Ok((CodeFile::parse(&read(path)?)?.code, "seed_code".to_string()));
    }
    find_ssc(field, d, r, n)
        .ok_or_else(|| Error::NoKnownConstruction(format!("no simplex code for seed St_{field}({d},{r}) with n = {n}")))
}

fn construct(args: &ConstructArgs, json: bool) -> Result<u8> {
    let Params { field, d, r, n } = args.params;
    if r < 1 || d < r || n < 2 {
        return Err(Error::InvalidParameter(format!("need d >= r >= 1 and n >= 2, got d={d}, r={r}, n={n}")));
    }
    let seed_path = args.seed_code.as_deref();
    let (code, provenance, claim): (StiefelCode64, String, Claim) = match args.method {
        Method::Sphere => {
            require(r == 1, || "sphere needs r = 1".into())?;
            (ssc_sphere(field, d, n)?, "ssc_sphere".into(), Claim::Simplex)
        }
        Method::RadonHurwitz => {
            require(r == d, || "radon-hurwitz needs r = d".into())?;
            let code = match &args.hr_file {
                Some(path) => ssc_from_hr_family(field, d, n, &parse_generators(&read(path)?)?)?,
                None => ssc_radon_hurwitz(field, d, n)?,
            };
            (code, "ssc_radon_hurwitz".into(), Claim::Simplex)
        }
        Method::RegularRep => {
            require(field == FieldTag::R && r == d && n == d + 1, || {
                "regular-rep needs field R, r = d and n = d + 1".into()
            })?;
            (ssc_regular_representation(d)?, "ssc_regular_representation".into(), Claim::Simplex)
        }
        Method::Symplectic => {
            require(r == 2, || "symplectic needs r = 2".into())?;
            (ssc_symplectic_lift(field, d, n)?, "ssc_symplectic_lift".into(), Claim::Simplex)
        }
        Method::Bibd => {
            let source = args
                .design
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("bibd needs --design".into()))?;
            let (design, res) = load_design(source)?;
            require(design.v == n && d % design.b == 0 && r % design.rep == 0, || {
                format!(
                    "design (v={}, b={}, rep={}) does not fit d={d}, r={r}, n={n}",
                    design.v, design.b, design.rep
                )
            })?;
            let (seed, prov) = seed_code(seed_path, field, d / design.b, r / design.rep, design.k)?;
            let name = source.strip_prefix("builtin:").unwrap_or(source);
            (ssc_from_bibd(&seed, &design, &res)?, format!("ssc_from_bibd({name}, {prov})"), Claim::Simplex)
        }
        Method::Orbit => {
            require(field == FieldTag::C, || "orbit needs field C".into())?;
            (soc_complex_orbit(d, r, n)?, "soc_complex_orbit".into(), Claim::Orthoplex)
        }
        Method::Hadamard => {
            require(field == FieldTag::R, || "hadamard needs field R".into())?;
            let full = soc_real_hadamard::<f64>(d, r)?;
            require(n <= full.n(), || format!("the Hadamard code has {} points, asked for {n}", full.n()))?;
            let claim = if n > d * r + 1 {
                Claim::Orthoplex
            } else {
                Claim::OrthoplexDistance
            };
            (full.prefix(n)?, "soc_real_hadamard".into(), claim)
        }
        Method::Pad => {
            require(d > r, || "pad needs d > r".into())?;
            let (seed, prov) = seed_code(seed_path, field, d - 1, r, n)?;
            (ssc_pad_row(&seed)?, format!("ssc_pad_row({prov})"), Claim::Simplex)
        }
        Method::Kronecker => {
            let k = args.k.ok_or_else(|| Error::InvalidParameter("kronecker needs --k".into()))?;
            require(k >= 1 && d % k == 0 && r % k == 0, || format!("k = {k} must divide d and r"))?;
            let (seed, prov) = seed_code(seed_path, field, d / k, r / k, n)?;
            (ssc_kronecker(&seed, k)?, format!("ssc_kronecker({k}, {prov})"), Claim::Simplex)
        }
        Method::Realify => {
            require(field == FieldTag::R && d % 2 == 0 && r % 2 == 0, || {
                "realify produces field R with even d and r".into()
            })?;
            let (seed, prov) = seed_code(seed_path, FieldTag::C, d / 2, r / 2, n)?;
            (ssc_realify(&seed)?, format!("ssc_realify({prov})"), Claim::Simplex)
        }
        Method::Complexify => {
            require(field == FieldTag::C, || "complexify produces field C".into())?;
            let (seed, prov) = seed_code(seed_path, FieldTag::R, d, r, n)?;
            (ssc_complexify(&seed)?, format!("ssc_complexify({prov})"), Claim::Simplex)
        }
        Method::Auto => {
            let c = best_exact::<f64>(field, d, r, n)?;
            (c.code, c.provenance, c.claim)
        }
    };
    if (code.field(), code.d(), code.r(), code.n()) != (field, d, r, n) {
        return Err(Error::ParameterMismatch(format!(
            "construction produced St_{}({},{}) with n = {}, asked for St_{field}({d},{r}) with n = {n}",
            code.field(),
            code.d(),
            code.r(),
            code.n()
        )));
    }
    let report = certify_default(&code);
    let file = CodeFile::new(code).with("provenance", provenance.as_str());
    finish(file, &report, claim, args.out.as_deref(), json)
}

/// Writes the code file, reports on stderr, and maps the claim to an exit code.
fn finish(file: CodeFile, report: &CodeReport64, claim: Claim, out: Option<&Path>, json: bool) -> Result<u8> {
    let file = file.with("claim", claim.label());
    write_output(&file.to_json()?, out)?;
    let provenance = file.metadata.get("provenance").and_then(|v| v.as_str()).unwrap_or("");
    if json {
        eprintln!("{}", report_json(report)?);
    } else {
        eprintln!("{}", report.summary());
        eprintln!("construction: {provenance} (claim: {})", claim.label());
    }
    Ok(if claim.holds(report) {
        0
    } else {
        eprintln!("certification does not match the claim");
        exit::VERIFICATION_FAILED
    })
}

fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidParameter(format!("write failed: {e}"));
    match out {
        Some(path) => fs::write(path, text).map_err(io),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            // a closed pipe downstream is not our failure
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other.map_err(io),
        },
    }
}

fn out_line(text: impl std::fmt::Display) -> Result<()> {
    write_output(&format!("{text}\n"), None)
}

fn report_json(report: &CodeReport64) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Malformed(e.to_string()))
}

fn verify(args: &VerifyArgs, json: bool) -> Result<u8> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::InvalidParameter("--tol must be positive".into()));
    }
    let file = CodeFile::parse(&read(&args.file)?)?;
    let report = certify(&file.code, args.tol);
    out_line(report_json(&report)?)?;
    if !json {
        eprintln!("{}", report.summary());
    }
    Ok(if report.classification.is_optimal_certificate() {
        0
    } else {
        exit::VERIFICATION_FAILED
    })
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidParameter(format!("--n-range {text:?}: expected A..B"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn bound(args: &BoundArgs, json: bool) -> Result<u8> {
    let (field, d, r) = (args.field, args.d, args.r);
    let s_cap = simplex_cap(field, d, r)?;
    let o_cap = orthoplex_cap(field, d, r)?;
    let rho = radon_hurwitz(field, d)?;
    let o_sq = orthoplex_bound_sq(r);
    let ns: Vec<usize> = match (args.n, &args.n_range) {
        (Some(n), _) => vec![n],
        (None, Some(range)) => {
            let (a, b) = parse_range(range)?;
            (a..=b).collect()
        }
        (None, None) => Vec::new(),
    };
    let mut rows = Vec::new();
    for &n in &ns {
        let s_sq = simplex_bound_sq(r, n)?;
        rows.push((n, s_sq, *s_sq.numer() as f64 / *s_sq.denom() as f64));
    }
    if json {
        let table: Vec<_> = rows
            .iter()
            .map(|(n, sq, v)| {
                json!({
                    "n": n,
                    "simplex_bound": v.sqrt(),
                    "simplex_bound_sq": sq.to_string(),
                    "orthoplex_applies": *n > s_cap,
                })
            })
            .collect();
        let out = json!({
            "field": field,
            "d": d,
            "r": r,
            "radon_hurwitz": rho,
            "simplex_cap": s_cap,
            "orthoplex_bound": (*o_sq.numer() as f64).sqrt(),
            "orthoplex_bound_sq": o_sq.to_string(),
            "orthoplex_cap": o_cap,
            "rows": table,
        });
        out_line(serde_json::to_string_pretty(&out).map_err(|e| Error::Malformed(e.to_string()))?)?;
        return Ok(0);
    }
    out_line(format!(
        "St_{field}({d},{r}): rho = {rho}, simplex cap = {s_cap}, orthoplex bound = {:.12} (sq {o_sq}), orthoplex cap = {o_cap}",
        (*o_sq.numer() as f64).sqrt()
    ))?;
    if !rows.is_empty() {
        out_line("n\tsimplex_bound\tsimplex_bound_sq\tsimplex_cap\torthoplex_bound\torthoplex_cap\trho\tregime")?;
    }
    for (n, sq, v) in rows {
        let regime = if n <= s_cap { "simplex" } else { "orthoplex" };
        out_line(format!(
            "{n}\t{:.12}\t{sq}\t{s_cap}\t{:.12}\t{o_cap}\t{rho}\t{regime}",
            v.sqrt(),
            (*o_sq.numer() as f64).sqrt()
        ))?;
    }
    Ok(0)
}

fn config_value(config: &OptimizerConfig) -> serde_json::Value {
    serde_json::to_value(config).expect("plain struct")
}

fn run_optimize(args: &OptimizeArgs, json: bool) -> Result<u8> {
    let Params { field, d, r, n } = args.params;
    let config = args.search.config();
    let (code, report) = optimize::<f64>(field, d, r, n, &config)?;
    let file = CodeFile::new(code)
        .with("provenance", "optimize")
        .with("optimizer", config_value(&config));
    finish(file, &report, Claim::Putative, args.out.as_deref(), json)
}

fn atlas(cmd: &AtlasCommand, json: bool) -> Result<u8> {
    match cmd {
        AtlasCommand::O2 { n, out } => {
            let sol = o2_solution(*n)?;
            let code = o2_code::<f64>(*n)?;
            let report = certify_default(&code);
            let file = CodeFile::new(code)
                .with("provenance", "o2_code")
                .with("k_n", sol.k_n)
                .with("split", json!([sol.split.0, sol.split.1]));
            let claim = Claim::ClosedForm {
                distance_sq: sol.min_distance * sol.min_distance,
            };
            finish(file, &report, claim, out.as_deref(), json)
        }
        AtlasCommand::O2Table { max_n } => {
            if *max_n < 2 {
                return Err(Error::InvalidParameter("--max-n must be at least 2".into()));
            }
            let table = o2_table(*max_n);
            if json {
                out_line(serde_json::to_string_pretty(&table).map_err(|e| Error::Malformed(e.to_string()))?)?;
            } else {
                out_line("n\tk_n\ta\tb\tmin_distance")?;
                for s in &table {
                    out_line(format!("{}\t{}\t{}\t{}\t{:.12}", s.n, s.k_n, s.split.0, s.split.1, s.min_distance))?;
                }
            }
            Ok(0)
        }
        AtlasCommand::Circle { n, out } => {
            let code = circle_code::<f64>(*n)?;
            let report = certify_default(&code);
            let chord = 2.0 * (std::f64::consts::PI / *n as f64).sin();
            let claim = Claim::ClosedForm {
                distance_sq: chord * chord,
            };
            finish(CodeFile::new(code).with("provenance", "circle_code"), &report, claim, out.as_deref(), json)
        }
        AtlasCommand::Best { params, search, out } => {
            let Params { field, d, r, n } = *params;
            let config = search.config();
            let cand = best_known::<f64>(field, d, r, n, &config)?;
            let mut file = CodeFile::new(cand.code).with("provenance", cand.provenance.as_str());
            if cand.claim == Claim::Putative {
                file = file.with("optimizer", config_value(&config));
            }
            finish(file, &cand.report, cand.claim, out.as_deref(), json)
        }
    }
}
