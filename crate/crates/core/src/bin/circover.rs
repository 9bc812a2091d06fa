//! Command-line front end.
//!
//! Exit codes: 0 = verified (or computation completed), 1 = not verified,
//! 2 = usage or evaluation error.

use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use circover_core::config::{CommandKind, ConfigError, ModeKind, RunConfig};
use circover_core::covering::{self, Verdict};
use circover_core::enclosure::{self, EnclosureSpec};
use circover_core::expr;
use circover_core::geometry::DomainSpec;
use circover_core::report;

/// Environment variable giving the default worker count.
const JOBS_ENV: &str = "CIRCOVER_JOBS";

#[derive(Parser)]
#[command(
    name = "circover",
    about = "Validated covering-relation verification on circle bundles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct CommonArgs {
    /// Load settings from a TOML config file (flags override file values).
    #[arg(long)]
    config: Option<String>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
    /// Worker thread cap; defaults to $CIRCOVER_JOBS, then all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the structured TOML report here.
    #[arg(long)]
    report: Option<String>,
    /// Write cell data (witnesses or survivors) as CSV here.
    #[arg(long)]
    cells: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a covering relation for a builtin or config-defined homotopy.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Builtin name (cap, toy, linear_nhim, ...) or "custom".
        #[arg(long)]
        map: Option<String>,
        /// fiber, full, or sequence.
        #[arg(long)]
        mode: Option<String>,
        /// Subdivision counts alpha,theta,x,y (e.g. 4,100,50,50).
        #[arg(long)]
        scheme: Option<String>,
        /// Unstable fiber radius r_u.
        #[arg(long)]
        ru: Option<f64>,
        /// Stable fiber radius r_s.
        #[arg(long)]
        rs: Option<f64>,
        /// Map parameter mu (rigorously parsed, e.g. "1/10").
        #[arg(long)]
        mu: Option<String>,
        /// Family parameter beta: a point ("0.8") or a range ("0:1").
        #[arg(long)]
        beta: Option<String>,
        /// Base winding number of the builtin family (default 3).
        #[arg(long)]
        winding: Option<i64>,
        /// Expansion rate for linear_nhim.
        #[arg(long)]
        rate_a: Option<String>,
        /// Contraction rate for linear_nhim.
        #[arg(long)]
        rate_b: Option<String>,
        /// Bisection depth for failing cells.
        #[arg(long)]
        refine_depth: Option<usize>,
    },
    /// Run the invariant-set enclosure algorithm and export survivors.
    Enclose {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        /// Half-width of the coordinate box in x and y.
        #[arg(long)]
        box_r: Option<f64>,
        /// Radius of the certified disc constraint x^2 + y^2 < r^2.
        #[arg(long)]
        disc_r: Option<f64>,
        /// Initial grid counts theta,x,y (e.g. 24,24,24).
        #[arg(long)]
        grid: Option<String>,
        /// Number of bisect-and-filter refinement steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Interval iterates per cell before giving up on a discard.
        #[arg(long)]
        iterates: Option<usize>,
        /// Export the survivor slice at this angle (expression, e.g. "pi/3").
        #[arg(long)]
        slice_theta: Option<String>,
        /// CSV path for the slice export.
        #[arg(long)]
        slice_out: Option<String>,
    },
    /// Rigorously compute the degree of a circle map from a lift expression.
    Degree {
        #[command(flatten)]
        common: CommonArgs,
        /// Continuous lift expression in theta, e.g. "3*theta".
        #[arg(long)]
        eta: Option<String>,
        /// Number of parts of [0, 2pi] to evaluate the lift on.
        #[arg(long)]
        parts: Option<usize>,
    },
    /// Smallest k with C * lambda^k < 1 (rate-condition helper).
    NhimK {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "C", alias = "big-c")]
        big_c: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_base(common: &CommonArgs, command: CommandKind) -> Result<RunConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
        None => RunConfig::new(command),
    };
    cfg.command = command;
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    if common.report.is_some() {
        cfg.report = common.report.clone();
    }
    if common.cells.is_some() {
        cfg.cells = common.cells.clone();
    }
    Ok(cfg)
}

fn parse_scheme(text: &str) -> Result<[usize; 4], String> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("bad scheme `{text}`: expected alpha,theta,x,y counts"))?;
    if parts.len() != 4 {
        return Err(format!("bad scheme `{text}`: expected four counts"));
    }
    Ok([parts[0], parts[1], parts[2], parts[3]])
}

fn parse_grid(text: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("bad grid `{text}`: expected theta,x,y counts"))?;
    if parts.len() != 3 {
        return Err(format!("bad grid `{text}`: expected three counts"));
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn parse_mode(text: &str) -> Result<ModeKind, String> {
    match text {
        "fiber" => Ok(ModeKind::Fiber),
        "full" => Ok(ModeKind::Full),
        "sequence" => Ok(ModeKind::Sequence),
        other => Err(format!("unknown mode `{other}` (fiber|full|sequence)")),
    }
}

fn effective_jobs(cfg: &RunConfig) -> Option<usize> {
    cfg.jobs.or_else(|| {
        std::env::var(JOBS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n > 0)
    })
}

/// Runs `body` inside a rayon pool capped at the configured worker count.
fn with_pool<T: Send>(cfg: &RunConfig, body: impl FnOnce() -> T + Send) -> Result<T, String> {
    match effective_jobs(cfg) {
        None => Ok(body()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| e.to_string())?;
            Ok(pool.install(body))
        }
    }
}

fn cfg_err(e: ConfigError) -> String {
    e.to_string()
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            common,
            map,
            mode,
            scheme,
            ru,
            rs,
            mu,
            beta,
            winding,
            rate_a,
            rate_b,
            refine_depth,
        } => {
            let mut cfg = load_base(&common, CommandKind::Verify)?;
            if let Some(m) = map {
                cfg.map = m;
            }
            if let Some(m) = mode {
                cfg.mode = parse_mode(&m)?;
            }
            if let Some(s) = scheme {
                cfg.scheme = parse_scheme(&s)?;
            }
            if let Some(v) = ru {
                cfg.r_u = v;
            }
            if let Some(v) = rs {
                cfg.r_s = v;
            }
            if mu.is_some() {
                cfg.mu = mu;
            }
            if beta.is_some() {
                cfg.beta = beta;
            }
            if winding.is_some() {
                cfg.winding = winding;
            }
            if rate_a.is_some() {
                cfg.rate_a = rate_a;
            }
            if rate_b.is_some() {
                cfg.rate_b = rate_b;
            }
            if let Some(v) = refine_depth {
                cfg.refine_depth = v;
            }
            if common.dump_config {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            run_verify(&cfg)
        }
        Command::Enclose {
            common,
            map,
            mu,
            beta,
            box_r,
            disc_r,
            grid,
            steps,
            iterates,
            slice_theta,
            slice_out,
        } => {
            let mut cfg = load_base(&common, CommandKind::Enclose)?;
            if let Some(m) = map {
                cfg.map = m;
            }
            if mu.is_some() {
                cfg.mu = mu;
            }
            if beta.is_some() {
                cfg.beta = beta;
            }
            if box_r.is_some() {
                cfg.box_r = box_r;
            }
            if disc_r.is_some() {
                cfg.disc_r = disc_r;
            }
            if let Some(g) = grid {
                cfg.grid = Some(parse_grid(&g)?);
            }
            if steps.is_some() {
                cfg.steps = steps;
            }
            if iterates.is_some() {
                cfg.iterates = iterates;
            }
            if slice_theta.is_some() {
                cfg.slice_theta = slice_theta;
            }
            if slice_out.is_some() {
                cfg.slice_out = slice_out;
            }
            if common.dump_config {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            run_enclose(&cfg)
        }
        Command::Degree { common, eta, parts } => {
            let mut cfg = load_base(&common, CommandKind::Degree)?;
            if eta.is_some() {
                cfg.eta = eta;
            }
            if parts.is_some() {
                cfg.parts = parts;
            }
            if common.dump_config {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            run_degree(&cfg)
        }
        Command::NhimK {
            common,
            big_c,
            lambda,
        } => {
            let mut cfg = load_base(&common, CommandKind::NhimK)?;
            if big_c.is_some() {
                cfg.big_c = big_c;
            }
            if lambda.is_some() {
                cfg.lambda = lambda;
            }
            if common.dump_config {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            run_nhim_k(&cfg)
        }
    }
}

fn run_verify(cfg: &RunConfig) -> Result<ExitCode, String> {
    let domain = DomainSpec::new(cfg.r_u, cfg.r_s).map_err(|e| e.to_string())?;
    let scheme = cfg.scheme().map_err(cfg_err)?;
    let depth = cfg.refine_depth;
    let report = match cfg.mode {
        ModeKind::Sequence => {
            let members = cfg.sequence_members().map_err(cfg_err)?;
            with_pool(cfg, || {
                covering::verify_sequence(&members, &domain, &scheme, depth)
            })?
            .map_err(|e| e.to_string())?
        }
        ModeKind::Fiber => {
            let h = cfg.homotopy().map_err(cfg_err)?;
            with_pool(cfg, || {
                covering::verify_fiber_covering(&h, &domain, &scheme, depth)
            })?
        }
        ModeKind::Full => {
            let h = cfg.homotopy().map_err(cfg_err)?;
            with_pool(cfg, || {
                covering::verify_full_covering(&h, &domain, &scheme, depth)
            })?
        }
    };
    if let Some(path) = &cfg.report {
        report::export_report(&report, Path::new(path)).map_err(|e| e.to_string())?;
    }
    if let Some(path) = &cfg.cells {
        report::export_cells(&report::witness_rows(&report), Path::new(path))
            .map_err(|e| e.to_string())?;
    }
    println!("{}", report::human_summary(&report));
    Ok(match report.verdict {
        Verdict::Verified => ExitCode::SUCCESS,
        Verdict::NotVerified => ExitCode::from(1),
        Verdict::Error => ExitCode::from(2),
    })
}

fn run_enclose(cfg: &RunConfig) -> Result<ExitCode, String> {
    let map = cfg.plain_map().map_err(cfg_err)?;
    let r = cfg.box_r.unwrap_or(2.0);
    let grid = cfg.grid.unwrap_or([24, 24, 24]);
    let mut spec = EnclosureSpec::centered_box(r, (grid[0], grid[1], grid[2]));
    if let Some(disc) = cfg.disc_r {
        spec = spec.with_disc(disc);
    }
    spec.refine_steps = cfg.steps.unwrap_or(2);
    spec.max_iterates = cfg.iterates.unwrap_or(3);
    let run = with_pool(cfg, || enclosure::propagate(&map, &spec))?
        .map_err(|e| e.to_string())?;
    // Seam marker for plot consumers gluing the exported cubes.
    println!("base circle: theta = 0 identified with theta = 2*pi");
    for (i, step) in run.steps.iter().enumerate() {
        println!(
            "step {i}: {} survivors, {} discarded",
            step.survivors.len(),
            step.discarded.len()
        );
    }
    if let Some(path) = &cfg.cells {
        report::export_cells(&report::enclosure_rows(&run), Path::new(path))
            .map_err(|e| e.to_string())?;
    }
    if let Some(expr_text) = &cfg.slice_theta {
        let angle = expr::parse_param(expr_text)
            .map_err(|e| e.to_string())?
            .midpoint();
        let cells = enclosure::slice(&run, angle);
        println!("slice at theta = {angle}: {} cells", cells.len());
        if let Some(path) = &cfg.slice_out {
            let step = run.steps.len() - 1;
            report::export_cells(&report::slice_rows(&cells, step), Path::new(path))
                .map_err(|e| e.to_string())?;
        }
    }
    println!("enclosure complete");
    Ok(ExitCode::SUCCESS)
}

fn run_degree(cfg: &RunConfig) -> Result<ExitCode, String> {
    let eta_src = cfg
        .eta
        .as_ref()
        .ok_or_else(|| "degree needs --eta <lift expression>".to_string())?;
    let consts = std::collections::BTreeMap::new();
    let lift = expr::parse(eta_src, &consts).map_err(|e| e.to_string())?;
    let eta = circover_core::EtaLift::new(std::sync::Arc::new(move |theta| {
        let env = expr::Env::point_free(
            theta,
            circover_core::Interval::point(0.0),
            circover_core::Interval::point(0.0),
        );
        lift.eval(&env).map_err(|e| match e {
            expr::ExprError::Eval(iv) => circover_core::dynamics::DynError::eval(iv),
            other => circover_core::dynamics::DynError::BadParam {
                name: "eta".into(),
                reason: other.to_string(),
            },
        })
    }));
    let parts = cfg.parts.unwrap_or(100);
    let degree = covering::compute_degree(&eta, circover_core::Interval::TWO_PI, parts)
        .map_err(|e| e.to_string())?;
    println!("degree = {degree}");
    println!("deg2 = {}", degree.rem_euclid(2));
    Ok(ExitCode::SUCCESS)
}

fn run_nhim_k(cfg: &RunConfig) -> Result<ExitCode, String> {
    let c = cfg.big_c.ok_or_else(|| "nhim-k needs --C".to_string())?;
    let lambda = cfg
        .lambda
        .ok_or_else(|| "nhim-k needs --lambda".to_string())?;
    let k = covering::nhim_min_k(c, lambda).map_err(|e| e.to_string())?;
    println!("k = {k}");
    Ok(ExitCode::SUCCESS)
}
