use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kickrotor"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out-dir").arg(out).output().expect("spawn kickrotor")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn bands_csv_shape_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    let args = ["bands", "--preset", "fig1", "--n-k", "16", "--n-alpha", "8"];
    assert_eq!(code(&run(&args, &a)), 0);
    assert_eq!(code(&run(&args, &b)), 0);
    let x = fs::read(a.join("bands.csv")).unwrap();
    assert_eq!(x, fs::read(b.join("bands.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,alpha,eps_1,eps_2,eps_3,delta_1,delta_2,delta_3,residual_imag");
    assert_eq!(lines.count(), 16 * 8);
}

#[test]
fn phase_diagram_is_thread_count_independent() {
    let d = tempfile::tempdir().unwrap();
    let args = ["phase-diagram", "--n-p1", "6", "--n-p4", "5", "--n-k", "16"];
    let mut outs = Vec::new();
    for t in ["1", "4"] {
        let dir = d.path().join(t);
        let o = bin().args(args).args(["--threads", t, "--out-dir"]).arg(&dir).output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(fs::read(dir.join("nodal_lines.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs.remove(0)).unwrap();
    assert!(text.starts_with("P1,P4,mingap_1,mingap_2,mingap_3,line_flags\n"));
    assert_eq!(text.lines().count(), 1 + 30);
}

#[test]
fn topology_fixture_reports_unit_euler_class() {
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("--config")
        .arg(fixture("fig3_beta_3.toml"))
        .args(["topology", "--out-dir"])
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let e: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("euler.json")).unwrap()).unwrap();
    assert_eq!(e[0]["chi"].as_i64().unwrap().abs(), 1);
    assert_eq!(e[0]["gap_pair"], serde_json::json!([1, 2]));
    let nodes: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("nodes.json")).unwrap()).unwrap();
    for n in nodes.as_array().unwrap() {
        for key in ["gap", "k", "alpha", "flux"] {
            assert!(n.get(key).is_some(), "node record lacks {key}");
        }
    }
    assert!(d.path().join("strings.json").exists() && d.path().join("zak.csv").exists());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path();
    // config
    assert_eq!(code(&run(&["bands", "--N", "4"], out)), 1);
    assert_eq!(code(&run(&["topology", "--n-k", "6"], out)), 1);
    let bad = out.join("bad.toml");
    fs::write(&bad, "[lattice]\nlmax = 3\n").unwrap();
    let o = bin().arg("--config").arg(&bad).args(["bands", "--out-dir"]).arg(out).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lmax"));
    // numerical: the free rotor is degenerate everywhere
    assert_eq!(code(&run(&["topology", "--preset", "free", "--n-k", "16", "--n-alpha", "8"], out)), 2);
    // invalid patch: the gap-1 patch swallows the gap-2 nodes at β = 0.21
    let o = bin()
        .arg("--config")
        .arg(fixture("fig3_beta_21.toml"))
        .args(["euler", "--patch", "-2.5132741228718345,2.5132741228718345,-0.6283185307179586,1.2566370614359172,1", "--out-dir"])
        .arg(out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    // physics signal: no boundary mode in a trivial gap
    let o = run(
        &["evolve", "--initial", "edge", "--preset", "constant", "--pulses", "0.3,0,0,0", "--gap", "1", "--l-max", "90"],
        out,
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flags_override_config() {
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("--config")
        .arg(fixture("fig1_bands.toml"))
        .args(["bands", "--n-k", "4", "--n-alpha", "3", "--out-dir"])
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(d.path().join("bands.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
}
