use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use causalfair::commands::{self, ReportMode};
use causalfair::config::PairsConfig;
use causalfair::Config;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "causalfair",
    version,
    about = "Causal fairness analysis under the standard fairness model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// CSV file, or a UCI Adult directory / adult.data file.
    #[arg(long)]
    data: PathBuf,
    /// JSON run configuration (roles, bins, analysis toggles).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Laplace pseudo-count per state.
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest joint state count the estimator accepts.
    #[arg(long)]
    cap: Option<u128>,
}

#[derive(Subcommand)]
enum Command {
    /// Effects, decompositions and refinements: report.json, ledger.txt, sankey.json.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Ordered X states, comma separated.
        #[arg(long)]
        stepwise: Option<String>,
        /// Pairwise groups as `a,b:c,d`.
        #[arg(long)]
        pairs: Option<String>,
        /// Thresholds as `lo:hi`, `lo:hi:step` or `t1,t2,...`; enables the sweep.
        #[arg(long)]
        sweep_grid: Option<String>,
    },
    /// Effects on `[Y > t]` over a threshold grid: curve.json, curve.tsv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Overrides `analysis.sweep.grid`.
        #[arg(long)]
        sweep_grid: Option<String>,
    },
    /// Samples a structural model: data.csv, spec.json, ground_truth.json.
    Simulate {
        /// Model spec as JSON.
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        spec: Option<PathBuf>,
        /// `additive[:seed]`, `interaction[:seed]` or `random:seed`.
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Prompts for a report bundle; with --llm also the narrative report.
    Report {
        #[arg(long)]
        bundle: PathBuf,
        /// Config holding the `llm` section.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Call the configured endpoint.
        #[arg(long)]
        llm: bool,
        /// Parse a recorded response file instead of calling the endpoint.
        #[arg(long, conflicts_with = "llm")]
        replay: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn parse_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let nums = |parts: &[&str]| -> Result<Vec<f64>> {
        parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number `{p}` in grid"))
            })
            .collect()
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let v = nums(&parts)?;
        let (lo, hi, step) = match v[..] {
            [lo, hi] => (lo, hi, 1.0),
            [lo, hi, step] => (lo, hi, step),
            _ => bail!("grid range must be lo:hi or lo:hi:step"),
        };
        if step.is_nan() || step <= 0.0 || hi < lo {
            bail!("grid range needs lo <= hi and a positive step");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| lo + i as f64 * step).collect())
    } else {
        nums(&s.split(',').collect::<Vec<_>>())
    }
}

fn load_config(c: &Common) -> Result<Config> {
    let mut cfg = Config::load(&c.config)?;
    if c.alpha.is_some() {
        cfg.alpha = c.alpha;
    }
    if c.cap.is_some() {
        cfg.cap = c.cap;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            common,
            stepwise,
            pairs,
            sweep_grid,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = stepwise {
                cfg.analysis.stepwise = Some(parse_list(&s));
            }
            if let Some(p) = pairs {
                let Some((a, b)) = p.split_once(':') else {
                    bail!(causalfair::Error::config("--pairs", "expected `a,b:c,d`"));
                };
                cfg.analysis.pairs = Some(PairsConfig {
                    x0_states: parse_list(a),
                    x1_states: parse_list(b),
                });
            }
            if let Some(g) = sweep_grid {
                cfg.analysis.sweep.get_or_insert_with(Default::default).grid = Some(parse_grid(&g)?);
            }
            let a = commands::analyze(&common.data, &cfg, &common.out)?;
            let r = &a.ledger.identity_residuals;
            println!(
                "wrote {}: tv={:.4} te={:.4} se={:.4}; residuals tv-te-se={:e} te-(de-ie)={:e}",
                common.out.display(),
                a.ledger.tv,
                a.ledger.te,
                a.ledger.se,
                r.tv_minus_te_minus_se,
                r.te_minus_de_plus_ie_rev
            );
        }
        Command::Sweep { common, sweep_grid } => {
            let cfg = load_config(&common)?;
            let grid = sweep_grid.as_deref().map(parse_grid).transpose()?;
            let c = commands::sweep(&common.data, &cfg, grid.as_deref(), &common.out)?;
            for (k, t) in &c.argmax {
                println!("argmax {}: {t}", k.label());
            }
        }
        Command::Simulate {
            spec,
            builtin,
            n,
            seed,
            out,
        } => {
            let spec = match (spec, builtin) {
                (Some(p), _) => commands::load_spec(&p)?,
                (None, Some(b)) => commands::builtin_spec(&b)?,
                (None, None) => unreachable!("clap requires one of --spec/--builtin"),
            };
            commands::simulate(spec, n, seed, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Report {
            bundle,
            config,
            llm,
            replay,
            out,
        } => {
            let llm_cfg = match &config {
                Some(p) => Config::load(p)?.llm,
                None => Default::default(),
            };
            let mode = match (&replay, llm || llm_cfg.enabled) {
                (Some(p), _) => ReportMode::Replay(p),
                (None, true) => ReportMode::Live(&llm_cfg),
                (None, false) => ReportMode::Offline,
            };
            if let Some(p) = commands::report(&bundle, mode, &out)? {
                if p.structure_violation {
                    eprintln!("warning: reply does not have exactly the TEXT:/LATEX: sections; raw text kept");
                }
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<causalfair::Error>().map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
