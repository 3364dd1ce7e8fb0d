use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mesofrac");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("MESOFRAC_THREADS", "1").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code and the single stderr line of a failing run.
fn fails(args: &[&str]) -> (i32, String) {
    let out = run(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "multi-line error: {err}");
    (out.status.code().unwrap(), err.trim_end().to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small elastic run on an empty specimen: 16 cells, strain 4e-5 at the end.
fn elastic_sample(root: &Path) -> PathBuf {
    ok(&["generate", "--seed", "3", "--count", "1", "--target-vf", "0", "--out-dir", s(root)]);
    root.join("000001")
}

const ELASTIC: [&str; 8] = ["--grid", "16", "--lc", "6.3", "--steps", "5", "--u-max", "0.002"];

fn simulate(input: &Path, extra: &[&str]) -> String {
    let mut args = vec!["simulate", "--in", s(input)];
    args.extend(ELASTIC);
    args.extend(extra);
    ok(&args)
}

fn read_curve(path: &Path) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "step,strain,stress_MPa,converged_flag");
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

/// Tensor bytes with zero damage in frame 0 and a ramp in later frames.
fn synthetic_tensor(frames: u32, n: u32) -> Vec<u8> {
    let mut out = b"MFRC0001".to_vec();
    for d in [frames, 8, n, n] {
        out.extend(d.to_le_bytes());
    }
    for f in 0..frames {
        for c in 0..8 {
            for k in 0..n * n {
                let v = if c == 7 && f > 0 { (k * f) as f32 / (n * n * frames) as f32 } else { 1.0 };
                out.extend(v.to_le_bytes());
            }
        }
    }
    out
}

#[test]
fn generate_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["generate", "--seed", "11", "--count", "3", "--target-vf", "0.2", "--out-dir", s(&a)]);
    ok(&["generate", "--seed", "11", "--count", "3", "--target-vf", "0.2", "--out-dir", s(&b), "--jobs", "2"]);
    for i in 1..=3 {
        let name = format!("{i:06}");
        let fa = std::fs::read(a.join(&name).join("mesostructure.json")).unwrap();
        let fb = std::fs::read(b.join(&name).join("mesostructure.json")).unwrap();
        assert_eq!(fa, fb, "sample {name} differs");
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(a.join(&name).join("manifest.json")).unwrap()).unwrap();
        let outputs = &manifest["stages"]["generate"]["outputs"];
        assert_eq!(outputs[0]["path"], "mesostructure.json");
        assert_eq!(outputs[0]["sha256"].as_str().unwrap().len(), 64);
    }
    assert_eq!(std::fs::read_dir(&a).unwrap().count(), 3);
    // Distinct samples draw from distinct seeds.
    assert_ne!(std::fs::read(a.join("000001/mesostructure.json")).unwrap(), std::fs::read(a.join("000002/mesostructure.json")).unwrap());

    let again = ok(&["generate", "--seed", "11", "--count", "3", "--target-vf", "0.2", "--out-dir", s(&a)]);
    assert_eq!(again.matches("generate skipped").count(), 3, "{again}");

    let empty = dir.path().join("none");
    ok(&["generate", "--count", "0", "--out-dir", s(&empty)]);
    assert!(!empty.exists());
}

#[test]
fn elastic_simulation_resume_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sample = elastic_sample(dir.path());
    let first = simulate(&sample, &[]);
    assert!(first.contains("rasterize done") && first.contains("solve done"), "{first}");

    let curve = read_curve(&sample.join("curve.csv"));
    assert_eq!(curve.len(), 6);
    for &(eps, sig) in &curve[1..] {
        assert!((sig / eps - 28000.0).abs() / 28000.0 < 1e-6, "slope {}", sig / eps);
    }

    let tensor = std::fs::read(sample.join("dataset.mfrc")).unwrap();
    assert_eq!(&tensor[..8], b"MFRC0001");
    let dims: Vec<u32> = tensor[8..24].chunks(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(dims, [2, 8, 16, 16]);
    assert_eq!(tensor.len(), 24 + 4 * 2 * 8 * 16 * 16);
    let sidecar: serde_json::Value = serde_json::from_slice(&std::fs::read(sample.join("dataset.json")).unwrap()).unwrap();
    assert_eq!(sidecar["channels"][7], "phi");
    assert_eq!(sidecar["steps"], serde_json::json!([0, 4]));

    let second = simulate(&sample, &[]);
    assert!(second.contains("rasterize skipped") && second.contains("solve skipped"), "{second}");
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(sample.join("manifest.json")).unwrap()).unwrap();
    for stage in ["generate", "rasterize", "solve"] {
        assert!(manifest["stages"][stage].is_object(), "{stage} missing");
    }
    assert_eq!(manifest["stages"]["solve"]["status"], "skipped");

    // A changed config invalidates the solve stage only.
    let solver = dir.path().join("solver.json");
    std::fs::write(&solver, r#"{"staggered_tol": 2e-3}"#).unwrap();
    let third = simulate(&sample, &["--solver-config", s(&solver)]);
    assert!(third.contains("rasterize skipped") && third.contains("solve done"), "{third}");
}

#[test]
fn end_to_end_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("runs");
    ok(&["generate", "--seed", "5", "--count", "2", "--target-vf", "0.2", "--out-dir", s(&root)]);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    simulate(&root, &["--out-dir", s(&out_a), "--jobs", "2"]);
    simulate(&root, &["--out-dir", s(&out_b)]);
    for name in ["000001", "000002"] {
        for file in ["curve.csv", "dataset.mfrc", "dataset.json", "phase.pgm", "materials.mfrc"] {
            let a = std::fs::read(out_a.join(name).join(file)).unwrap();
            let b = std::fs::read(out_b.join(name).join(file)).unwrap();
            assert!(a == b, "{name}/{file} differs between runs");
        }
    }
}

#[test]
fn evaluate_plot_and_fe_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sample = elastic_sample(dir.path());
    simulate(&sample, &[]);
    let tensor = sample.join("dataset.mfrc");

    // Undamaged frames have no positives and score 0; see the damaged
    // tensor below for the identity case.
    let csv = ok(&["evaluate", "--truth-tensor", s(&tensor), "--pred-tensor", s(&tensor)]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "frame,threshold,precision,recall,f1");
    assert_eq!(lines.count(), 2);

    let damaged = dir.path().join("damaged.mfrc");
    std::fs::write(&damaged, synthetic_tensor(3, 20)).unwrap();
    let csv = ok(&["evaluate", "--truth-tensor", s(&damaged), "--pred-tensor", s(&damaged)]);
    let f1: Vec<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(f1, ["0", "1", "1"], "{csv}");
    let (code, err) = fails(&["evaluate", "--truth-tensor", s(&damaged), "--pred-tensor", s(&tensor)]);
    assert_eq!(code, 2);
    assert!(err.contains("shape mismatch"), "{err}");
    let summary = dir.path().join("f1.json");
    ok(&[
        "evaluate", "--truth-tensor", s(&tensor), "--pred-tensor", s(&tensor), "--frames", "final", "--summary",
        s(&summary), "--out", s(&dir.path().join("f1.csv")),
    ]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(v["final_frame"], 1);

    let pgm = dir.path().join("phi.pgm");
    ok(&["plot", "--tensor", s(&tensor), "--frame", "1", "--channel", "phi", "--range", "0,1", "--out", s(&pgm)]);
    let img = std::fs::read(&pgm).unwrap();
    let header = b"P5\n# range 0e0 1e0\n16 16\n65535\n";
    assert_eq!(&img[..header.len()], header);
    assert_eq!(img.len(), header.len() + 2 * 256);

    let (code, err) = fails(&["plot", "--tensor", s(&tensor), "--channel", "damage", "--out", s(&pgm)]);
    assert_eq!(code, 2);
    assert!(err.starts_with("E2 config: unknown channel `damage`"), "{err}");
    let (code, err) = fails(&["plot", "--tensor", s(&tensor), "--frame", "2", "--out", s(&pgm)]);
    assert_eq!(code, 2);
    assert!(err.contains("frame 2 out of range"), "{err}");

    let curve_csv = dir.path().join("curve_points.csv");
    ok(&["plot", "--curve", s(&sample.join("curve.csv")), "--out", s(&curve_csv)]);
    assert!(std::fs::read_to_string(&curve_csv).unwrap().starts_with("strain,stress_MPa\n0,0\n"));

    let summary = ok(&["postprocess", "--curve", s(&sample.join("curve.csv"))]);
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["steps"], 5);
    let eps = 0.002 / 50.0;
    assert!((v["fracture_energy_mpa"].as_f64().unwrap() - 0.5 * 28000.0 * eps * eps).abs() < 1e-12);

    // Export to FE-style files at the cell centres and ingest them back.
    let fe = dir.path().join("fe");
    ok(&["postprocess", "--tensor", s(&tensor), "--fe-out", s(&fe)]);
    let back = dir.path().join("back.mfrc");
    ok(&["ingest-fe", "--dir", s(&fe), "--grid", "16", "--expected-frames", "2", "--out", s(&back)]);
    let a = std::fs::read(&tensor).unwrap();
    let b = std::fs::read(&back).unwrap();
    assert_eq!(a.len(), b.len());
    let floats = |v: &[u8]| v[24..].chunks(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect::<Vec<_>>();
    let worst = floats(&a).iter().zip(floats(&b)).map(|(x, y)| ((x - y) / x.abs().max(1.0)).abs()).fold(0.0f32, f32::max);
    assert!(worst < 1e-6, "round trip error {worst}");
    assert!(dir.path().join("back.json").is_file());

    let (code, _) = fails(&["ingest-fe", "--dir", s(&fe), "--grid", "16", "--expected-frames", "3", "--out", s(&back)]);
    assert_eq!(code, 2);
}

#[test]
fn error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let (code, err) = fails(&["simulate", "--in", s(&missing)]);
    assert_eq!(code, 4);
    assert!(err.starts_with("E4 io: ") && err.contains("absent.json"), "{err}");

    let sample = elastic_sample(dir.path());
    let (code, err) = fails(&["simulate", "--in", s(&sample), "--grid", "16", "--lc", "1.0"]);
    assert_eq!(code, 2);
    assert!(err.contains("lc"), "{err}");

    let solver = dir.path().join("solver.json");
    std::fs::write(&solver, r#"{"linear_solver_max_iters": 1, "linear_solver_rel_tol": 1e-14}"#).unwrap();
    let mut args = vec!["simulate", "--in", s(&sample), "--solver-config", s(&solver)];
    args.extend(ELASTIC);
    let (code, err) = fails(&args);
    assert_eq!(code, 3, "{err}");
    assert!(err.starts_with("E3 numerical: 000001: solve: step 1"), "{err}");
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(sample.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["stages"]["solve"]["status"], "failed");

    std::fs::write(&solver, r#"{"n_load_step": 3}"#).unwrap();
    let (code, err) = fails(&["simulate", "--in", s(&sample), "--solver-config", s(&solver)]);
    assert_eq!(code, 2);
    assert!(err.contains("n_load_step"), "{err}");

    let (code, err) = fails(&["generate", "--bogus"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("E2 config: "), "{err}");

    let (code, err) = fails(&["generate", "--target-vf", "0.95", "--out-dir", s(dir.path())]);
    assert_eq!(code, 2, "{err}");

    let bad = Command::new(BIN).args(["generate", "--count", "0", "--out-dir", "x"]).env("MESOFRAC_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));

    let garbage = dir.path().join("garbage.mfrc");
    std::fs::write(&garbage, b"not a tensor at all, clearly").unwrap();
    let (code, err) = fails(&["evaluate", "--truth-tensor", s(&garbage), "--pred-tensor", s(&garbage)]);
    assert_eq!(code, 4);
    assert!(err.contains("garbage.mfrc"), "{err}");
}
