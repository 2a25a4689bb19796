//! `nonoverlap` — reproduce the constants, search the γ threshold, sample-test
//! the product inequality and check the extremal quadratic differential.
//!
//! Every command writes a JSON report to stdout (or `--out`) and a short
//! table to stderr. Exit status: 0 on success, 2 when a checked inequality
//! is violated, 1 on errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use nonoverlap::bound::{chain_bound, gamma_threshold, symmetric_value, verify_random};
use nonoverlap::critpoints::{locate_curvature_zero, locate_psi_max};
use nonoverlap::geometry::{
    check_separation_bounds, inner_radius_analytic, sample_configuration, CheckStatus,
    Configuration, ElementaryDomain, Point, RaySystem, SamplerParams,
};
use nonoverlap::quaddiff::{critical_graph, extremal_product_estimate, render_svg, SvgOptions};
use nonoverlap::wos::{
    derive_seed, estimate_inner_radius, estimate_inner_radius_at_infinity, ElementaryOracle,
    WosParams,
};

#[derive(Parser, Debug)]
#[command(
    name = "nonoverlap",
    version,
    about = "Extremal products of inner radii of non-overlapping domains"
)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximizer and curvature zero of Ψ with their values.
    Constants {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Largest γ for which the symmetric split maximizes the bound chain.
    Threshold {
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Bound chain at (γ, α₁) and the symmetric value E(γ).
    Bound {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Randomized check of J(γ) ≤ E(γ) on disjoint disk configurations.
    Verify {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Critical graph of the quadratic differential; optional SVG and Monte
    /// Carlo check of the extremal value.
    Qd {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 2e-3)]
        step: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, requires = "seed")]
        walks: Option<usize>,
        #[arg(long, requires = "walks")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
    },
    /// Walk-on-spheres inner radius of an elementary domain.
    Radius {
        /// Domain as JSON, e.g. '{"disk":{"center":[0,0],"radius":1}}'.
        #[arg(long)]
        shape: String,
        /// "RE,IM" or "inf".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 200_000)]
        walks: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        /// Cut-off radius for unbounded shapes at finite points.
        #[arg(long)]
        truncation: Option<f64>,
    },
    /// Separating-transform inequalities on the symmetric disk configuration
    /// and on random configurations.
    Separation {
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        walks: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Initial samples per transformed arc.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
}

#[derive(Serialize)]
struct Report {
    command: String,
    inputs: Value,
    outputs: Value,
    seed: Option<u64>,
    runtime_ms: u128,
    version: String,
}

struct Outcome {
    inputs: Value,
    outputs: Value,
    seed: Option<u64>,
    table: Vec<(String, String)>,
    violated: bool,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn parse_point(s: &str) -> CliResult<Point> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t == "∞" {
        return Ok(Point::Infinity);
    }
    let (re, im) = t
        .split_once(',')
        .ok_or_else(|| format!("point must be RE,IM or inf, got {s:?}"))?;
    Ok(Point::Finite(Complex64::new(
        re.trim().parse()?,
        im.trim().parse()?,
    )))
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn symmetric_configuration() -> CliResult<Configuration> {
    let c = |re: f64| Complex64::new(re, 0.0);
    Ok(Configuration::new(
        RaySystem::two_point(std::f64::consts::PI)?,
        ElementaryDomain::disk(c(0.0), 0.4),
        ElementaryDomain::exterior_disk(c(0.0), 1.6),
        vec![
            ElementaryDomain::disk(c(1.0), 0.45),
            ElementaryDomain::disk(c(-1.0), 0.45),
        ],
    )?)
}

fn run(command: &Command) -> CliResult<Outcome> {
    Ok(match *command {
        Command::Constants { tol } => {
            let x0 = locate_curvature_zero(tol)?;
            let x1 = locate_psi_max(tol)?;
            let outputs = json!({
                "x0": x0.x, "psi_x0": x0.psi, "x1": x1.x, "psi_x1": x1.psi,
                "x0_bracket": x0.bracket, "x1_bracket": x1.bracket,
            });
            Outcome {
                inputs: json!({ "tol": tol }),
                outputs,
                seed: None,
                table: vec![
                    row("x0 (curvature zero)", x0.x),
                    row("Psi(x0)", x0.psi),
                    row("x1 (maximizer)", x1.x),
                    row("Psi(x1)", x1.psi),
                ],
                violated: false,
            }
        }
        Command::Threshold { grid, tol } => {
            let rep = gamma_threshold(grid, tol)?;
            let table = vec![
                row("gamma_hat", rep.gamma_hat),
                row("status", format!("{:?}", rep.status)),
                row("witness alpha", format!("{:?}", rep.witness_alpha)),
                row("witness excess", format!("{:?}", rep.witness_excess)),
            ];
            Outcome {
                inputs: json!({ "grid": grid, "tol": tol }),
                outputs: serde_json::to_value(&rep)?,
                seed: None,
                table,
                violated: false,
            }
        }
        Command::Bound { gamma, alpha } => {
            let chain = chain_bound(gamma, alpha)?;
            let sym = symmetric_value(gamma)?;
            Outcome {
                inputs: json!({ "gamma": gamma, "alpha": alpha }),
                outputs: json!({ "chain_bound": chain, "symmetric_value": sym, "difference": chain - sym }),
                seed: None,
                table: vec![
                    row("chain_bound", chain),
                    row("symmetric_value", sym),
                    row("difference", chain - sym),
                ],
                violated: false,
            }
        }
        Command::Verify {
            gamma,
            samples,
            seed,
        } => {
            let rep = verify_random(gamma, samples, seed, &SamplerParams::default())?;
            let table = vec![
                row("E(gamma)", rep.bound),
                row("samples", rep.samples),
                row("violations", rep.violations),
                row("max J/E", rep.max_ratio),
            ];
            Outcome {
                inputs: json!({ "gamma": gamma, "samples": samples, "seed": seed }),
                violated: rep.violations > 0,
                outputs: serde_json::to_value(&rep)?,
                seed: Some(seed),
                table,
            }
        }
        Command::Qd {
            gamma,
            step,
            ref svg,
            walks,
            seed,
            eps,
        } => {
            let field = critical_graph(gamma, step)?;
            let mut table = vec![
                row("zeros", field.zeros.len()),
                row("critical trajectories", field.trajectories.len()),
                row("circular domains", field.circular_boundaries.len()),
            ];
            let mut outputs = json!({ "field": serde_json::to_value(&field)? });
            if let Some(path) = svg {
                std::fs::write(path, render_svg(&field, &SvgOptions::default()))?;
                outputs["svg"] = json!(path);
                table.push(row("svg", path.display()));
            }
            if let (Some(walks), Some(seed)) = (walks, seed) {
                let est = extremal_product_estimate(&field, &WosParams::new(walks, eps, seed))?;
                let sym = symmetric_value(gamma)?;
                let z = (est.value - sym) / est.std_error;
                outputs["extremal_product"] = serde_json::to_value(&est)?;
                outputs["symmetric_value"] = json!(sym);
                outputs["relative_difference"] = json!(est.value / sym - 1.0);
                outputs["z_score"] = json!(z);
                outputs["agrees_within_3_sigma"] = json!(z.abs() <= 3.0);
                table.push(row(
                    "extremal product",
                    format!("{} ± {}", est.value, est.std_error),
                ));
                table.push(row("symmetric_value", sym));
                table.push(row("z score", z));
            }
            Outcome {
                inputs: json!({ "gamma": gamma, "step": step, "walks": walks, "seed": seed, "eps": eps }),
                outputs,
                seed,
                table,
                violated: false,
            }
        }
        Command::Radius {
            ref shape,
            ref point,
            walks,
            eps,
            seed,
            truncation,
        } => {
            let domain: ElementaryDomain = serde_json::from_str(shape)?;
            domain.validate()?;
            let p = parse_point(point)?;
            let params = WosParams::new(walks, eps, seed);
            let est = match (p, truncation) {
                (Point::Infinity, _) => estimate_inner_radius_at_infinity(&domain, &params)?,
                (Point::Finite(z), Some(r)) => {
                    estimate_inner_radius(&ElementaryOracle::truncated(domain, r), z, &params)?
                }
                (Point::Finite(z), None) => {
                    estimate_inner_radius(&ElementaryOracle::new(domain), z, &params)?
                }
            };
            let exact = inner_radius_analytic(&domain, p).ok();
            let mut table = vec![row(
                "estimate",
                format!("{} ± {}", est.value, est.std_error),
            )];
            if let Some(e) = exact {
                table.push(row("analytic", e));
                table.push(row("relative error", est.value / e - 1.0));
            }
            Outcome {
                inputs: json!({ "shape": domain, "point": p, "walks": walks, "eps": eps, "seed": seed, "truncation": truncation }),
                outputs: json!({ "estimate": est, "analytic": exact, "relative_error": exact.map(|e| est.value / e - 1.0) }),
                seed: Some(seed),
                table,
                violated: false,
            }
        }
        Command::Separation {
            configs,
            seed,
            walks,
            eps,
            samples,
        } => {
            let params = WosParams::new(walks, eps, seed);
            let mut reports = Vec::new();
            let sym = check_separation_bounds(&symmetric_configuration()?, &params, samples)?;
            reports.push(json!({ "configuration": "symmetric", "report": sym }));
            let mut violations = sym.violations;
            let mut inconclusive = sym
                .checks
                .iter()
                .filter(|c| c.status == CheckStatus::Inconclusive)
                .count();
            for i in 0..configs {
                let cfg =
                    sample_configuration(derive_seed(seed, i as u64), &SamplerParams::default())?;
                let rep = check_separation_bounds(&cfg, &params.reseeded(1 + i as u64), samples)?;
                violations += rep.violations;
                inconclusive += rep
                    .checks
                    .iter()
                    .filter(|c| c.status == CheckStatus::Inconclusive)
                    .count();
                reports.push(json!({ "configuration": i, "report": rep }));
            }
            Outcome {
                inputs: json!({ "configs": configs, "seed": seed, "walks": walks, "eps": eps, "samples": samples }),
                outputs: json!({ "violations": violations, "inconclusive": inconclusive, "reports": reports }),
                seed: Some(seed),
                table: vec![
                    row("configurations", configs + 1),
                    row("violations", violations),
                    row("inconclusive", inconclusive),
                ],
                violated: violations > 0,
            }
        }
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Constants { .. } => "constants",
        Command::Threshold { .. } => "threshold",
        Command::Bound { .. } => "bound",
        Command::Verify { .. } => "verify",
        Command::Qd { .. } => "qd",
        Command::Radius { .. } => "radius",
        Command::Separation { .. } => "separation",
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            let _ = emit(&error_json("usage", &e.kind().to_string()), None);
            return ExitCode::from(1);
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            let _ = emit(&error_json("threads", &e.to_string()), None);
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let name = command_name(&cli.command);
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let _ = emit(&error_json(name, &e.to_string()), cli.out.as_ref());
            return ExitCode::from(1);
        }
    };
    let report = Report {
        command: name.to_string(),
        inputs: outcome.inputs,
        outputs: outcome.outputs,
        seed: outcome.seed,
        runtime_ms: start.elapsed().as_millis(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let width = outcome
        .table
        .iter()
        .map(|(k, _)| k.len())
        .max()
        .unwrap_or(0);
    eprintln!("{name}");
    for (k, v) in &outcome.table {
        eprintln!("  {k:<width$}  {v}");
    }
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t,
        Err(e) => {
            let _ = emit(&error_json("serialization", &e.to_string()), None);
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&text, cli.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if outcome.violated {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
