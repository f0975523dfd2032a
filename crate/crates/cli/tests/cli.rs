use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn crnfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnfa")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("example.nfa"), crnfa::nfa::SECOND_TO_LAST_ONE).unwrap();
        Workspace { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    /// Plans parameters for the example and stores them as `params.json`.
    fn planned(&self) -> PathBuf {
        let out = self.s("params.json");
        let o = crnfa(&["plan", "--nfa", &self.s("example.nfa"), "--eps", "5e-4", "--eta", "0.05", "--delta", "5e-5", "--tau-max", "10", "-o", &out]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        self.path("params.json")
    }
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn compile_reports_sizes() {
    let ws = Workspace::new();
    let o = crnfa(&["compile", &ws.s("example.nfa")]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["size_report"]["species"], 16);
    assert_eq!(v["size_report"]["reactions"], 20);
    let o = crnfa(&["compile", &ws.s("example.nfa"), "--pretty"]);
    assert!(stdout(&o).contains("X_r"));
}

#[test]
fn encode_writes_channels() {
    let ws = Workspace::new();
    let o = crnfa(&["encode", &ws.s("example.nfa"), "--word", "10", "--eps", "0.01", "--tau", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,X_0,X_1,X_r,X_c");
    let last = text.lines().last().unwrap();
    assert_eq!(last.split(',').next().unwrap().parse::<f64>().unwrap(), 8.0);
    assert!(text.lines().count() > 801);
}

#[test]
fn plan_check_run_round_trip() {
    let ws = Workspace::new();
    let params = ws.planned();
    let p = params.display().to_string();
    let o = crnfa(&["check", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ih1.3"));

    let nfa = ws.s("example.nfa");
    let base = ["run", "--nfa", &nfa, "--params", &p, "--word", "10"];
    let a = crnfa(&base);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = crnfa(&base);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["verified"], true);
    assert_eq!(v["decision"]["accept"], true);
    assert_eq!(v["phi"].as_array().unwrap().len(), 3);
    assert!(v["constraints"]["entries"].as_array().unwrap().len() > 5);

    let robust = crnfa(&[
        "run", "--nfa", &nfa, "--params", &p, "--word", "01", "--delta", "5e-5", "--adversary", "sinusoid", "--initial",
        "worst-case", "--eta", "0.05", "--obs-mode", "worst-case", "--seed", "3",
    ]);
    assert_eq!(robust.status.code(), Some(0));
    let v = json(&robust);
    assert_eq!(v["decision"]["accept"], false);
    assert_eq!(v["seed"], 3);

    let o = crnfa(&["decide", "--nfa", &nfa, "--params", &p, "--word", "11"]);
    assert_eq!(json(&o)["accept"], true);
}

#[test]
fn manifest_run_writes_outputs() {
    let ws = Workspace::new();
    let params: Value = serde_json::from_str(&std::fs::read_to_string(ws.planned()).unwrap()).unwrap();
    let manifest = serde_json::json!({
        "nfa": "example.nfa",
        "word": "110",
        "params": params,
        "seed": 9,
        "outputs": { "report": "report.json", "trace": "trace.csv", "plot_data": "plot.csv" }
    });
    std::fs::write(ws.path("run.json"), manifest.to_string()).unwrap();
    let o = crnfa(&["run", "--manifest", &ws.s("run.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(ws.path("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 9);
    assert_eq!(report["verified"], true);
    let plot = std::fs::read_to_string(ws.path("plot.csv")).unwrap();
    assert_eq!(plot.lines().next().unwrap(), "t,species,value");
    assert!(std::fs::read_to_string(ws.path("trace.csv")).unwrap().starts_with("t,"));
}

#[test]
fn simulate_plot_data() {
    let ws = Workspace::new();
    let p = ws.planned().display().to_string();
    let plot = ws.s("long.csv");
    let o = crnfa(&["simulate", "--nfa", &ws.s("example.nfa"), "--params", &p, "--word", "1", "--stride", "1", "--plot-data", &plot]);
    assert!(o.status.success());
    let rows = std::fs::read_to_string(Path::new(&plot)).unwrap();
    assert!(rows.lines().any(|l| l.contains(",Y_A,")));
}

#[test]
fn infeasible_plan_exits_one() {
    let o = crnfa(&["plan", "--d", "5", "--eps", "0.49", "--eta", "0.49"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("base-case"));
}

#[test]
fn analyze_closed_forms() {
    let o = crnfa(&["analyze", "equilibria", "--a", "1", "--b", "1", "--c", "0.1", "--p", "1"]);
    let v = json(&o);
    assert!((v["points"][1]["value"].as_f64().unwrap() - (3.0 - 0.2f64.sqrt()) / 4.0).abs() < 1e-12);
    let o = crnfa(&["analyze", "travel", "--a", "1", "--b", "1", "--c", "0.1", "--p", "1", "--u1", "0.7", "--u2", "0.8"]);
    assert!((json(&o)["time"].as_f64().unwrap() - 5.747820656214134).abs() < 1e-9);
    let o = crnfa(&["analyze", "copy", "--u0", "0", "--a", "1", "--b", "1", "--p", "1", "--t", "0"]);
    assert_eq!(json(&o)["value"], 0.0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(crnfa(&["plan"]).status.code(), Some(2));
    assert_eq!(crnfa(&["compile", "/nonexistent/file.nfa"]).status.code(), Some(2));
    let o = crnfa(&["analyze", "equilibria", "--a", "1", "--b", "1", "--c", "10", "--p", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_corpus_verifies() {
    let o = crnfa(&["verify-corpus", "--count", "2", "--max-len", "2", "--robust"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&o)["verified"], true);
}
