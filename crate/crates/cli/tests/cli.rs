use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pauliflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pauliflow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("{key} missing in {out}"))
}

#[test]
fn list_gates_names_every_gate() {
    let o = pauliflow(&["list-gates"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for g in pauliflow::library::GATE_NAMES {
        assert!(text.lines().any(|l| l.starts_with(g)), "{g}");
    }
    assert!(text.contains("(reconstructed)"));
}

#[test]
fn verify_move() {
    let o = pauliflow(&["verify", "--gate", "move"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("X1 -> +X2, Z1 -> +Z2"));
}

#[test]
fn verify_cnot2_warns() {
    let o = pauliflow(&["verify", "--gate", "cnot2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("reconstruction"));
    assert!(stdout(&o).contains("X1 -> +X3X4"));
}

#[test]
fn verify_rotation_by_certificate() {
    let o = pauliflow(&["verify", "--gate", "ry", "--theta", "1.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certificate: verified"));
    assert_eq!(pauliflow(&["verify", "--gate", "ry"]).status.code(), Some(1));
    assert_eq!(pauliflow(&["verify", "--gate", "toffoli"]).status.code(), Some(1));
}

#[test]
fn verify_files() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.seq", "qubits 2\ndata_in 2\ndata_out 2\nstage +XI + +ZI\nstage +ZZ\n");
    let o = pauliflow(&["verify", "--file", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("INVALID"));

    let garbled = write(dir.path(), "garbled.seq", "qubits 2\nstage +QQ\n");
    assert_eq!(pauliflow(&["verify", "--file", &garbled]).status.code(), Some(1));

    let good = write(
        dir.path(),
        "hadamard.seq",
        "name h\nqubits 2\ndata_in 1\ndata_out 2\nstage +IX\nstage +XZ\nstage +ZI\n",
    );
    let o = pauliflow(&["verify", "--file", &good]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("X1 -> +Z2, Z1 -> +X2"));
}

#[test]
fn simulate_move_adiabatic_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "move.cfg",
        "gate.name = move\npulse.gate_time = 20\npulse.gap = 5\nnoise.mode = none\n",
    );
    let trace = dir.path().join("trace.csv");
    let noise = dir.path().join("noise.csv");
    let o = pauliflow(&[
        "simulate",
        "--config",
        &cfg,
        "--dump-trace",
        trace.to_str().unwrap(),
        "--dump-noise",
        noise.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(value(&out, "error ") < 1e-6, "{out}");
    assert!(value(&out, "unitarity_defect ") < 1e-9);
    let t = fs::read_to_string(trace).unwrap();
    assert!(t.starts_with("t,g_1,g_2,g_3"));
    assert_eq!(t.lines().count(), 4097);
    assert!(fs::read_to_string(noise).unwrap().starts_with("t,m_1"));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dc.cfg",
        "gate.name = cnot1\npulse.gate_time = 10\npulse.gap = 5\nnoise.mode = dc\nnoise.sigma = 0.15\nmc.seed = 42\n",
    );
    let a = pauliflow(&["simulate", "--config", &cfg, "--run", "3"]);
    let b = pauliflow(&["simulate", "--config", &cfg, "--run", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = pauliflow(&["simulate", "--config", &cfg, "--run", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.cfg", "noise.mode = dc\nnoise.sgma = 0.1\n");
    let o = pauliflow(&["simulate", "--config", &typo]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("noise.sgma"));

    let swept = write(dir.path(), "swept.cfg", "sweep.variable = gate_time\nsweep.values = 5, 10\n");
    assert_eq!(pauliflow(&["simulate", "--config", &swept]).status.code(), Some(1));

    let coarse = write(dir.path(), "coarse.cfg", "gate.name = move\npulse.gate_time = 400\npulse.samples = 256\n");
    assert_eq!(pauliflow(&["simulate", "--config", &coarse]).status.code(), Some(3));
}

#[test]
fn preset_sweep_writes_stable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = pauliflow(&["sweep", "--preset", "fig3a", "--seed", "7", "--runs", "2", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("sweep_variable,value,mean_error,sem_error,mean_leakage,runs,seed,config_digest"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4 * 7);
    assert!(rows.iter().all(|r| r.split(',').nth(6) == Some("7")));
}

#[test]
fn epsilon_preset_has_both_operators() {
    let o = pauliflow(&["sweep", "--preset", "epsilon"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("cnot1/p1") && out.contains("cnot1/p3"));
}

#[test]
fn config_sweep_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cfg = write(
        dir.path(),
        "s.cfg",
        &format!(
            "gate.name = dynamic\nnoise.mode = dc\nnoise.sigma = 0.1\nmc.runs = 20\nmc.seed = 5\n\
             sweep.variable = gate_time\nsweep.values = 8, 10\noutput.path = {}\noutput.format = json\n",
            out.display()
        ),
    );
    let o = pauliflow(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: pauliflow::output::JsonDocument = serde_json_from(&out);
    let parsed = pauliflow::config::ConfigDocument::parse(&fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_eq!(doc.experiments().unwrap(), vec![parsed.experiment]);
    assert_eq!(doc.rows.len(), 2);
}

fn serde_json_from(path: &Path) -> pauliflow::output::JsonDocument {
    let text = fs::read_to_string(path).unwrap();
    pauliflow::output::JsonDocument::from_json(&text).unwrap()
}

#[test]
fn empty_sweep_values_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.cfg", "sweep.variable = gate_time\nsweep.values =\n");
    let o = pauliflow(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(pauliflow(&["sweep", "--preset", "fig9"]).status.code(), Some(1));
    assert_eq!(pauliflow(&["verify"]).status.code(), Some(1));
    assert_eq!(pauliflow(&["frobnicate"]).status.code(), Some(1));
}
