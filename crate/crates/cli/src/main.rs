//! Command line front end: distribution tables, expansion fits, the
//! simulator, and the identity verification suites.

mod output;
mod suites;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use output::{Cache, Format, ResultTable};
use serde::Deserialize;
use std::path::PathBuf;

use kpztt::coeffs::{self, LongTimePoint};
use kpztt::lppsim::{empirical_two_time, LppConfig};
use kpztt::twotime::{self, ContourConfig, ShortTimeFrame, TwoTimeParams};

#[derive(Parser)]
#[command(
    name = "kpztt",
    about = "Two-time distribution of KPZ growth: Fredholm determinants, expansion coefficients, Monte Carlo validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args, Debug, Clone)]
struct CommonFlags {
    /// Nyström nodes per half-line rule.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Trapezoid points on the u-circle.
    #[arg(long, global = true)]
    circle_points: Option<usize>,
    /// Radius of the u-circle (must exceed 1).
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Conjugation parameter δ.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Tolerance used by verification suites.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Simulator seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cache directory for recomputable tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// JSON configuration file; flags take precedence over its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Entries accepted in the JSON config file.
#[derive(Debug, Clone, Default, Deserialize)]
struct FileConfig {
    nodes: Option<usize>,
    circle_points: Option<usize>,
    radius: Option<f64>,
    delta: Option<f64>,
    tol: Option<f64>,
    format: Option<String>,
    seed: Option<u64>,
    threads: Option<usize>,
    cache_dir: Option<PathBuf>,
}

/// Fully resolved settings: flags > config file > defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub nodes: usize,
    pub circle_points: usize,
    pub radius: f64,
    pub delta: f64,
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Resolved {
    fn from(common: &CommonFlags) -> Result<Resolved> {
        let file: FileConfig = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let file_format = match file.format.as_deref() {
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => bail!("unknown format {other:?} in config file"),
            None => None,
        };
        Ok(Resolved {
            nodes: common.nodes.or(file.nodes).unwrap_or(48),
            circle_points: common.circle_points.or(file.circle_points).unwrap_or(128),
            radius: common.radius.or(file.radius).unwrap_or(2.0),
            delta: common.delta.or(file.delta).unwrap_or(0.1),
            tol: common.tol.or(file.tol).unwrap_or(1e-8),
            format: common.format.or(file_format).unwrap_or(Format::Csv),
            seed: common.seed.or(file.seed).unwrap_or(2024),
            threads: common.threads.or(file.threads),
            cache_dir: common.cache_dir.clone().or(file.cache_dir),
            out: common.out.clone(),
        })
    }

    fn contours(&self, alpha: f64) -> ContourConfig {
        ContourConfig {
            delta: self.delta,
            radius: self.radius,
            circle_points: self.circle_points,
            nodes: self.nodes,
            ..ContourConfig::default_for(alpha)
        }
    }

    /// The precision block: everything that determines numeric output.
    fn precision_string(&self) -> String {
        format!(
            "nodes={};circle_points={};radius={};delta={};tol={}",
            self.nodes, self.circle_points, self.radius, self.delta, self.tol
        )
    }

    fn stamp(&self, table: &mut ResultTable) {
        table.meta("nodes", self.nodes);
        table.meta("circle_points", self.circle_points);
        table.meta("radius", self.radius);
        table.meta("delta", self.delta);
        table.meta("tol", self.tol);
        table.meta("seed", self.seed);
        table.meta("build", env!("CARGO_PKG_VERSION"));
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tracy-Widom distribution table: ξ, F₂, F₂', F₂''.
    F2 {
        /// Grid as start:stop:step.
        #[arg(long, default_value = "-6:4:0.25", allow_hyphen_values = true)]
        grid: String,
    },
    /// Two-time distribution at one parameter point.
    Ftt {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta2: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Long-time expansion: closed-form e₁, e₂ against the fitted values.
    Longtime {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta2: f64,
        /// Comma-separated α values in (0, 0.2].
        #[arg(long, default_value = "0.02,0.04,0.06,0.08,0.1", allow_hyphen_values = true)]
        alphas: String,
    },
    /// Short-time limit: ∂F_tt/∂ξ₁ against the ψ-based limit.
    Shorttime {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta: f64,
        /// Comma-separated α values (each ≥ 5).
        #[arg(long, default_value = "5,10,20")]
        alphas: String,
    },
    /// Baik-Rains distribution table: ξ, ψ(ξ,0), F₀.
    Baikrains {
        #[arg(long, default_value = "-5:4:0.5", allow_hyphen_values = true)]
        grid: String,
    },
    /// Monte Carlo last-passage simulation and empirical two-time CDF.
    Simulate {
        #[arg(long, default_value_t = 0.25)]
        q: f64,
        #[arg(long, default_value_t = 400.0)]
        t_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 2.0)]
        t2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta2: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value = "-4:3:0.5", allow_hyphen_values = true)]
        grid: String,
    },
    /// Run a named identity suite; exits nonzero on any failure.
    Verify {
        /// One of: airy, quad, tw, lemma-a0, b-symmetries, g-from-b,
        /// q-at-1, conjugation, all.
        suite: String,
    },
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be start:stop:step, got {spec:?}");
    }
    let (start, stop, step): (f64, f64, f64) =
        (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
    if step <= 0.0 || stop < start {
        bail!("grid must have positive step and stop >= start");
    }
    let mut xs = Vec::new();
    let n = ((stop - start) / step).round() as usize;
    for k in 0..=n {
        xs.push(start + k as f64 * step);
    }
    Ok(xs)
}

fn parse_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(Into::into))
        .collect()
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    let resolved = Resolved::from(&cli.common)?;
    if let Some(threads) = resolved.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }

    let started = std::time::Instant::now();
    let (mut table, exit) = match &cli.command {
        Command::F2 { grid } => (cmd_f2(&resolved, grid)?, 0),
        Command::Ftt {
            xi1,
            eta1,
            xi2,
            eta2,
            alpha,
        } => (cmd_ftt(&resolved, *xi1, *eta1, *xi2, *eta2, *alpha)?, 0),
        Command::Longtime {
            xi1,
            eta1,
            xi2,
            eta2,
            alphas,
        } => (
            cmd_longtime(&resolved, *xi1, *eta1, *xi2, *eta2, alphas)?,
            0,
        ),
        Command::Shorttime {
            xi1,
            eta1,
            xi,
            eta,
            alphas,
        } => (cmd_shorttime(&resolved, *xi1, *eta1, *xi, *eta, alphas)?, 0),
        Command::Baikrains { grid } => (cmd_baikrains(&resolved, grid)?, 0),
        Command::Simulate {
            q,
            t_scale,
            t1,
            t2,
            eta1,
            eta2,
            samples,
            grid,
        } => (
            cmd_simulate(
                &resolved, *q, *t_scale, *t1, *t2, *eta1, *eta2, *samples, grid,
            )?,
            0,
        ),
        Command::Verify { suite } => {
            let (table, ok) = suites::run(&resolved, suite)?;
            (table, if ok { 0 } else { 1 })
        }
    };
    if !table.metadata.contains_key("wall_time_s") {
        table.meta("wall_time_s", format!("{:.3}", started.elapsed().as_secs_f64()));
    }

    let rendered = table.render(resolved.format);
    // every emitted file must round-trip to the in-memory table
    let reparsed = match resolved.format {
        Format::Csv => ResultTable::from_csv(&rendered)?,
        Format::Json => ResultTable::from_json(&rendered)?,
    };
    if reparsed != table {
        bail!("rendered output does not round-trip; refusing to write");
    }
    match &resolved.out {
        Some(path) => output::write_atomic(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(exit)
}

fn cmd_f2(resolved: &Resolved, grid: &str) -> Result<ResultTable> {
    let xs = parse_grid(grid)?;
    let cache = Cache::new(resolved.cache_dir.clone());
    let key = output::content_hash(&format!(
        "f2;{};grid={grid}",
        resolved.precision_string()
    ));
    if let Some(hit) = cache.lookup(key) {
        return Ok(hit);
    }
    let started = std::time::Instant::now();
    let mut table = ResultTable::new("f2", &["xi", "f2", "f2_prime", "f2_second"]);
    resolved.stamp(&mut table);
    table.meta("grid", grid);
    for &x in &xs {
        let f2 = coeffs::tracy_widom_f2_n(x, resolved.nodes);
        let (fp, fpp) = coeffs::f2_derivs_n(x, resolved.nodes)
            .map_err(|e| anyhow::anyhow!("derivatives at ξ = {x}: {e}"))?;
        table.push(vec![x, f2, fp, fpp]);
    }
    table.meta("wall_time_s", format!("{:.3}", started.elapsed().as_secs_f64()));
    cache.store(key, &table);
    Ok(table)
}

fn cmd_ftt(
    resolved: &Resolved,
    xi1: f64,
    eta1: f64,
    xi2: f64,
    eta2: f64,
    alpha: f64,
) -> Result<ResultTable> {
    let params = TwoTimeParams::new(xi1, eta1, xi2, eta2, alpha)?;
    let contours = resolved.contours(alpha);
    let got = twotime::ftt(&params, &contours)?;
    let mut table = ResultTable::new(
        "ftt",
        &[
            "xi1", "eta1", "xi2", "eta2", "alpha", "ftt", "im_residual", "det_at_one",
        ],
    );
    resolved.stamp(&mut table);
    table.push(vec![
        xi1,
        eta1,
        xi2,
        eta2,
        alpha,
        got.value,
        got.im_residual,
        got.det_at_one,
    ]);
    Ok(table)
}

fn cmd_longtime(
    resolved: &Resolved,
    xi1: f64,
    eta1: f64,
    xi2: f64,
    eta2: f64,
    alphas: &str,
) -> Result<ResultTable> {
    let alphas = parse_list(alphas)?;
    let point = LongTimePoint {
        xi1,
        eta1,
        xi2,
        eta2,
    };
    let closed = coeffs::long_time_coeffs(point, resolved.nodes)?;
    let fit = twotime::long_time_fit(&point, &alphas, &resolved.contours(0.05))?;
    let mut table = ResultTable::new(
        "longtime",
        &[
            "e1", "e1_hat", "e2", "e2_hat", "residual_slope", "r1", "a0", "a1", "psi1", "psi2",
            "phi1", "phi2",
        ],
    );
    resolved.stamp(&mut table);
    table.meta("point", format!("({xi1},{eta1},{xi2},{eta2})"));
    table.meta(
        "alphas",
        alphas
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    table.push(vec![
        closed.e1,
        fit.e1_hat,
        closed.e2,
        fit.e2_hat,
        fit.residual_slope,
        closed.r1,
        closed.a0,
        closed.a1,
        closed.psi1,
        closed.psi2,
        closed.phi1_plus,
        closed.phi2_plus,
    ]);
    Ok(table)
}

fn cmd_shorttime(
    resolved: &Resolved,
    xi1: f64,
    eta1: f64,
    xi: f64,
    eta: f64,
    alphas: &str,
) -> Result<ResultTable> {
    let alphas = parse_list(alphas)?;
    let mut table = ResultTable::new(
        "shorttime",
        &["alpha", "lhs", "rhs", "abs_gap", "xi2", "eta2"],
    );
    resolved.stamp(&mut table);
    table.meta("frame", format!("({xi1},{eta1},{xi},{eta})"));
    for &alpha in &alphas {
        let frame = ShortTimeFrame {
            xi1,
            eta1,
            xi,
            eta,
            alpha,
        };
        let (lhs, rhs) = twotime::short_time_check(&frame, &resolved.contours(alpha))?;
        table.push(vec![
            alpha,
            lhs,
            rhs,
            (lhs - rhs).abs(),
            frame.xi2(),
            frame.eta2(),
        ]);
    }
    Ok(table)
}

fn cmd_baikrains(resolved: &Resolved, grid: &str) -> Result<ResultTable> {
    let xs = parse_grid(grid)?;
    let mut table = ResultTable::new("baikrains", &["xi", "psi", "f0"]);
    resolved.stamp(&mut table);
    table.meta("grid", grid);
    for &x in &xs {
        let st = coeffs::short_time_psi(x, 0.0, resolved.nodes)?;
        let f0 = coeffs::baik_rains_f0(x, resolved.nodes)?;
        table.push(vec![x, st.psi, f0]);
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    resolved: &Resolved,
    q: f64,
    t_scale: f64,
    t1: f64,
    t2: f64,
    eta1: f64,
    eta2: f64,
    samples: usize,
    grid: &str,
) -> Result<ResultTable> {
    let xs = parse_grid(grid)?;
    let cfg = LppConfig {
        q,
        t_scale,
        t1,
        t2,
        eta1,
        eta2,
        samples,
        seed: resolved.seed,
    };
    let emp = empirical_two_time(&cfg, &xs, &xs)?;
    let f2_table = coeffs::F2Table::build(-10.0, 6.0, 0.1, resolved.nodes.min(40));
    let ks = emp.ks_marginal1(|x| f2_table.eval(x));
    let mut table = ResultTable::new(
        "simulate",
        &["xi1", "xi2", "joint_cdf", "marginal1", "marginal2"],
    );
    resolved.stamp(&mut table);
    table.meta("q", q);
    table.meta("t_scale", t_scale);
    table.meta("t1", t1);
    table.meta("t2", t2);
    table.meta("eta1", eta1);
    table.meta("eta2", eta2);
    table.meta("samples", samples);
    table.meta("alpha", cfg.alpha());
    table.meta("ks_marginal1_vs_f2", format!("{ks:.6}"));
    for (i, &x1) in xs.iter().enumerate() {
        for (j, &x2) in xs.iter().enumerate() {
            table.push(vec![
                x1,
                x2,
                emp.joint_cdf(i, j),
                emp.marginal1(x1),
                emp.marginal2(x2),
            ]);
        }
    }
    Ok(table)
}
