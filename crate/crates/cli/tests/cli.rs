use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causalfair"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn analyze_toy(out: &Path) -> Output {
    run(&[
        "analyze",
        "--data",
        fixture("toy.csv").to_str().unwrap(),
        "--config",
        fixture("toy.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn analyze_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze_toy(dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("residuals"));
    for f in ["report.json", "ledger.txt", "sankey.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let sankey: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sankey.json")).unwrap()).unwrap();
    assert_eq!(sankey["renderable_as_flow"], true);
}

#[test]
fn config_without_y_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"x": "x", "x0_states": ["a"], "x1_states": ["b"]}"#).unwrap();
    let o = run(&[
        "analyze",
        "--data",
        fixture("toy.csv").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing field `y`"), "{}", stderr(&o));
}

#[test]
fn unknown_column_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"x": "x", "y": "nope", "x0_states": ["a"], "x1_states": ["b"], "y_target": "1"}"#,
    )
    .unwrap();
    let o = run(&[
        "analyze",
        "--data",
        fixture("toy.csv").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn cardinality_cap_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "analyze",
        "--data",
        fixture("toy.csv").to_str().unwrap(),
        "--config",
        fixture("toy.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--cap",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn malformed_bundle_reports_json_pointer() {
    let dir = tempfile::tempdir().unwrap();
    assert!(analyze_toy(dir.path()).status.success());
    let path = dir.path().join("report.json");
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace(r#""te": 0.25"#, r#""te": "high""#);
    std::fs::write(&path, text).unwrap();
    let o = run(&[
        "report",
        "--bundle",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/effects/te"), "{}", stderr(&o));
}

#[test]
fn offline_report_writes_verbatim_prompts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(analyze_toy(dir.path()).status.success());
    let bundle = dir.path().join("report.json");
    let out = dir.path().join("r");
    let o = run(&[
        "report",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p: causalfair::PromptPair =
        serde_json::from_str(&std::fs::read_to_string(out.join("prompts.json")).unwrap()).unwrap();
    assert_eq!(p.system, causalfair::prompt::SYSTEM_PROMPT);
    assert_eq!(p.user, std::fs::read_to_string(&bundle).unwrap());
    assert!(!out.join("report.txt").exists());
}

#[test]
fn replayed_reply_writes_text_and_latex() {
    let dir = tempfile::tempdir().unwrap();
    assert!(analyze_toy(dir.path()).status.success());
    let out = dir.path().join("r");
    let o = run(&[
        "report",
        "--bundle",
        dir.path().join("report.json").to_str().unwrap(),
        "--replay",
        fixture("llm_reply.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.starts_with(r#"Title: "Fairness Decomposition Report""#));
    assert!(text.contains("Direct effect: 0.1119") && text.contains("Indirect effect: 0.0492"));
    let tex = std::fs::read_to_string(out.join("report.tex")).unwrap();
    assert!(tex.starts_with("\\documentclass") && tex.trim_end().ends_with("\\end{document}"));
}

#[test]
fn simulate_is_deterministic_and_rejects_empty_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("s{k}"));
        let o = run(&[
            "simulate",
            "--builtin",
            "additive:3",
            "--n",
            "500",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        csvs.push(std::fs::read(out.join("data.csv")).unwrap());
        assert!(out.join("ground_truth.json").is_file());
    }
    assert_eq!(csvs[0], csvs[1]);
    let spec = dir.path().join("s0/spec.json");
    let o = run(&[
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn sweep_config(dir: &Path) -> (PathBuf, PathBuf) {
    let data = dir.join("d.csv");
    std::fs::write(&data, "g,h\nf,10\nf,20\nf,30\nm,20\nm,30\nm,40\n").unwrap();
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, r#"{"x": "g", "y": "h", "x0_states": ["f"], "x1_states": ["m"]}"#).unwrap();
    (data, cfg)
}

fn sweep_rows(dir: &Path, grid: &str) -> Vec<String> {
    let (data, cfg) = sweep_config(dir);
    let out = dir.join(format!("out{}", grid.len()));
    let o = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--sweep-grid",
        grid,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tsv = std::fs::read_to_string(out.join("curve.tsv")).unwrap();
    assert_eq!(tsv.lines().next().unwrap(), "threshold\ttv\tte\tde\tie\tse");
    tsv.lines().skip(1).map(str::to_string).collect()
}

#[test]
fn sweep_single_point_and_out_of_range_grids() {
    let dir = tempfile::tempdir().unwrap();
    let one = sweep_rows(dir.path(), "25");
    assert_eq!(one.len(), 1);
    // [h > 25]: f 1/3, m 2/3 with alpha = 1 → (1+1)/(3+2) vs (2+1)/(3+2).
    assert_eq!(one[0], "25\t0.2000\t0.2000\t0.2000\t0.0000\t0.0000");
    let outside = sweep_rows(dir.path(), "100,200");
    assert_eq!(outside.len(), 2);
    for row in outside {
        assert!(row.split('\t').skip(1).all(|v| v == "0.0000"), "{row}");
    }
}
