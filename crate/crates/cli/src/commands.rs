//! The four subcommands as library functions writing into an output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use causalfair_core::scm::{mediator_order_construction, random_sfm_scm, RandomScmConfig, Scm, ScmSpec};
use causalfair_core::{Contrast, EffectLedger, ThresholdCurve};
use serde::Serialize;

use crate::bundle::{Num, ReportBundle};
use crate::config::Config;
use crate::csv_io;
use crate::error::{Error, Result};
use crate::llm::{self, LlmConfig, ParsedReport};
use crate::pipeline::{curve_entry, run_analysis, run_sweep, Analysis};
use crate::prompt::assemble_prompts;
use crate::sankey::sankey_export;
use crate::table::ledger_table;

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(format!("cannot write {}", path.display()), e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("cannot create {}", dir.display()), e))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Schema {
        pointer: String::new(),
        message: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

/// Writes report.json, ledger.txt and sankey.json (plus sensitivity.json
/// when requested).
pub fn analyze(data: &Path, cfg: &Config, out: &Path) -> Result<Analysis> {
    let a = run_analysis(data, cfg)?;
    ensure_dir(out)?;
    write_file(&out.join("report.json"), &a.bundle().to_json()?)?;
    write_file(
        &out.join("ledger.txt"),
        &ledger_table(&a.ledger, a.mediators.as_ref(), a.confounders.as_ref()),
    )?;
    let sankey = sankey_export(&a.ledger, a.mediators.as_ref(), a.confounders.as_ref());
    write_file(&out.join("sankey.json"), &to_json(&sankey)?)?;
    if !a.sensitivity.is_empty() {
        write_file(&out.join("sensitivity.json"), &to_json(&a.sensitivity)?)?;
    }
    Ok(a)
}

/// Tab-separated `threshold tv te de ie se`, four decimals.
pub fn curve_tsv(c: &ThresholdCurve) -> String {
    let mut s = String::from("threshold\ttv\tte\tde\tie\tse\n");
    for i in 0..c.grid.len() {
        let f = |v: f64| format!("{:.4}", Num(v).rounded());
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.grid[i],
            f(c.tv[i]),
            f(c.te[i]),
            f(c.de[i]),
            f(c.ie_reversed[i]),
            f(c.se[i])
        );
    }
    s
}

/// Writes curve.json and curve.tsv.
pub fn sweep(data: &Path, cfg: &Config, grid: Option<&[f64]>, out: &Path) -> Result<ThresholdCurve> {
    let (y, c) = run_sweep(data, cfg, grid)?;
    ensure_dir(out)?;
    #[derive(Serialize)]
    struct CurveFile<'a> {
        #[serde(flatten)]
        curve: crate::bundle::ThresholdCurveEntry,
        binarization: causalfair_core::Binarization,
        degenerate: &'a [bool],
        argmax: std::collections::BTreeMap<causalfair_core::EffectKind, Num>,
    }
    let file = CurveFile {
        curve: curve_entry(&y, &c),
        binarization: c.binarization,
        degenerate: &c.degenerate,
        argmax: c.argmax.iter().map(|(k, v)| (*k, Num(*v))).collect(),
    };
    write_file(&out.join("curve.json"), &to_json(&file)?)?;
    write_file(&out.join("curve.tsv"), &curve_tsv(&c))?;
    Ok(c)
}

/// Built-in models for `simulate`.
pub fn builtin_spec(name: &str) -> Result<ScmSpec> {
    let bad = || Error::config("builtin", format!("unknown model `{name}`"));
    let (kind, seed) = match name.split_once(':') {
        Some((k, s)) => (k, s.parse::<u64>().map_err(|_| bad())?),
        None => (name, 0),
    };
    match kind {
        "additive" => Ok(mediator_order_construction(seed, false)),
        "interaction" => Ok(mediator_order_construction(seed, true)),
        "random" => Ok(random_sfm_scm(seed, &RandomScmConfig::random(seed))?),
        _ => Err(bad()),
    }
}

pub fn load_spec(path: &Path) -> Result<ScmSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::config(e.path().to_string(), e.into_inner().to_string()))
}

/// Writes data.csv, the model as spec.json and ground_truth.json: one
/// exact ledger per Y state (or just `y_target`) for the role contrast.
pub fn simulate(spec: ScmSpec, n: usize, seed: u64, out: &Path) -> Result<Vec<EffectLedger>> {
    let m = Scm::new(spec.clone())?;
    let d = m.sample(n, seed)?;
    ensure_dir(out)?;
    csv_io::save_csv(&d, &out.join("data.csv"))?;
    write_file(&out.join("spec.json"), &to_json(&spec)?)?;
    let r = m.roles();
    let (x0, x1) = match (&r.x0_states[..], &r.x1_states[..]) {
        ([a], [b]) => (a.clone(), b.clone()),
        _ => return Err(Error::config("roles", "simulate needs one state per group")),
    };
    let ys: Vec<String> = match &r.y_target {
        Some(t) => vec![t.clone()],
        None => spec
            .endogenous
            .iter()
            .find(|v| v.name == r.y)
            .map(|v| v.states.clone())
            .unwrap_or_default(),
    };
    let ledgers = ys
        .iter()
        .map(|y| Ok(m.ground_truth_ledger(&Contrast::new(x0.clone(), x1.clone(), y.clone()))?))
        .collect::<Result<Vec<_>>>()?;
    write_file(&out.join("ground_truth.json"), &to_json(&ledgers)?)?;
    Ok(ledgers)
}

pub enum ReportMode<'a> {
    /// Only write prompts.json.
    Offline,
    /// Call the configured endpoint.
    Live(&'a LlmConfig),
    /// Parse a recorded chat-completions response instead of calling out.
    Replay(&'a Path),
}

/// Writes prompts.json, and report.txt / report.tex when a reply is available.
pub fn report(bundle_path: &Path, mode: ReportMode, out: &Path) -> Result<Option<ParsedReport>> {
    let text = std::fs::read_to_string(bundle_path)
        .map_err(|e| Error::io(format!("cannot read {}", bundle_path.display()), e))?;
    let bundle = ReportBundle::from_json(&text)?;
    let prompts = assemble_prompts(&bundle)?;
    ensure_dir(out)?;
    write_file(&out.join("prompts.json"), &to_json(&prompts)?)?;
    let parsed = match mode {
        ReportMode::Offline => return Ok(None),
        ReportMode::Live(cfg) => llm::request_report(cfg, &prompts)?,
        ReportMode::Replay(path) => {
            let body =
                std::fs::read_to_string(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
            llm::parse_report(&llm::reply_content(&body)?)
        }
    };
    match (&parsed.text, &parsed.latex) {
        (Some(t), Some(l)) => {
            write_file(&out.join("report.txt"), &format!("{t}\n"))?;
            write_file(&out.join("report.tex"), &format!("{l}\n"))?;
        }
        _ => write_file(&out.join("report.raw.txt"), &parsed.raw)?,
    }
    Ok(Some(parsed))
}

/// Default output directory.
pub fn default_out() -> PathBuf {
    PathBuf::from("out")
}
