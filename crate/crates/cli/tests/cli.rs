use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn intertwine(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intertwine"))
        .args(args)
        .current_dir(dir)
        .env_remove("INTERTWINE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Asserts that two reports agree numerically to `tol`, skipping `ignore` keys.
fn assert_close(a: &Value, b: &Value, tol: f64, ignore: &[&str], at: &str) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= tol, "{at}: {x} vs {y}");
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{at}: lengths differ");
            for (k, (u, v)) in x.iter().zip(y).enumerate() {
                assert_close(u, v, tol, ignore, &format!("{at}[{k}]"));
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            let keys = |m: &serde_json::Map<String, Value>| {
                m.keys().filter(|k| !ignore.contains(&k.as_str())).cloned().collect::<Vec<_>>()
            };
            assert_eq!(keys(x), keys(y), "{at}: keys differ");
            for k in keys(x) {
                assert_close(&x[&k], &y[&k], tol, ignore, &format!("{at}.{k}"));
            }
        }
        _ => assert_eq!(a, b, "{at}"),
    }
}

const QUANTUM_H: &str = r#"{"hamiltonian": [[[0, 0.5], [1, 0]], [[1, 0], [0, -0.5]]]}"#;

#[test]
fn raw_hamiltonian_matches_builtin_static() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.json"), QUANTUM_H).unwrap();
    let a = intertwine(&["static", "--model", "quantum-dimer", "--gamma", "0.5", "--out", "a"], dir.path());
    let b = intertwine(&["static", "--input", "h.json", "--out", "b"], dir.path());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    let (ra, rb) = (read_json(&dir.path().join("a/static.json")), read_json(&dir.path().join("b/static.json")));
    assert_close(&ra, &rb, 1e-12, &["source", "closed_form"], "static");
    assert_eq!(ra["conserved_count"], 2);
    assert_eq!(ra["pt_phase"], "symmetric");
}

#[test]
fn raw_hamiltonian_with_period_matches_builtin_floquet() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.json"), QUANTUM_H).unwrap();
    let a = intertwine(
        &["floquet", "--model", "quantum-dimer", "--waveform", "static", "--JT", "1.3", "--out", "a"],
        dir.path(),
    );
    let b = intertwine(&["floquet", "--input", "h.json", "--JT", "1.3", "--out", "b"], dir.path());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    let (ra, rb) = (read_json(&dir.path().join("a/floquet.json")), read_json(&dir.path().join("b/floquet.json")));
    // The built-in seeds the recursive check with sx; the raw input with its first basis operator.
    assert_close(&ra, &rb, 1e-12, &["source", "recursive"], "floquet");
}

#[test]
fn schedule_input_matches_builtin_kicks() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = r#"{"schedule": {"period": 1.0, "events": [
        {"segment": {"duration": 0.5, "h": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]]}},
        {"kick": {"k": [[[-0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}},
        {"segment": {"duration": 0.5, "h": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]]}},
        {"kick": {"k": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]}}
    ]}}"#;
    fs::write(dir.path().join("s.json"), schedule).unwrap();
    let a = intertwine(&["floquet", "--model", "classical-dimer", "--gamma", "0.5", "--out", "a"], dir.path());
    let b = intertwine(&["floquet", "--input", "s.json", "--out", "b"], dir.path());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    let (ra, rb) = (read_json(&dir.path().join("a/floquet.json")), read_json(&dir.path().join("b/floquet.json")));
    assert_close(&ra["propagator"], &rb["propagator"], 1e-12, &[], "propagator");
    assert_close(&ra["kappa"], &rb["kappa"], 1e-12, &[], "kappa");
    assert!(ra["closed_form"]["relative_distance"].as_f64().unwrap() < 1e-12);
}

#[test]
fn floquet_without_period_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.json"), QUANTUM_H).unwrap();
    let out = intertwine(&["floquet", "--input", "h.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("`period`"), "{}", stderr(&out));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"hamiltonian": [[[0, 0], [1, 0]]]}"#).unwrap();
    fs::write(dir.path().join("extra.json"), r#"{"hamiltonian": [[[1, 0]]], "periodd": 1}"#).unwrap();
    for args in [
        vec!["static"],
        vec!["static", "--model", "no-such-model"],
        vec!["static", "--model", "quantum-dimer", "--input", "bad.json"],
        vec!["static", "--input", "bad.json"],
        vec!["static", "--input", "extra.json"],
        vec!["static", "--input", "missing.json"],
        vec!["floquet", "--model", "quantum-dimer", "--waveform", "kicks"],
        vec!["floquet", "--model", "quantum-dimer", "--JT", "-1"],
        vec!["static", "--model", "quantum-dimer", "--gamma", "-0.1"],
        vec!["trace", "--model", "quantum-dimer", "--psi0", "1,0"],
        vec!["trace", "--model", "quantum-dimer", "--psi0", "1;0"],
        vec!["scan", "--model", "quantum-dimer", "--grid", "0:1:1,1:2:3"],
        vec!["scan", "--input", "bad.json"],
        vec!["static", "--model", "quantum-dimer", "--format", "xml"],
        vec!["static", "--model", "quantum-dimer", "--tol-eig", "0"],
        vec!["static", "--model", "quantum-dimer", "--no-such-flag"],
        vec!["frobnicate"],
    ] {
        let out = intertwine(&args, dir.path());
        assert_eq!(code(&out), 1, "{args:?}: {}", stderr(&out));
    }
    let extra = intertwine(&["static", "--input", "extra.json"], dir.path());
    assert!(stderr(&extra).contains("periodd") && stderr(&extra).contains("line"), "{}", stderr(&extra));
}

#[test]
fn overflowing_input_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let big = r#"{"hamiltonian": [[[0, 1e200], [0, 0]], [[0, 0], [0, -1e200]]], "period": 1}"#;
    fs::write(dir.path().join("big.json"), big).unwrap();
    for cmd in ["static", "floquet"] {
        let out = intertwine(&[cmd, "--input", "big.json", "--out", "o"], dir.path());
        assert_eq!(code(&out), 2, "{cmd}: {}", stderr(&out));
    }
}

#[test]
fn verify_passes_and_fails_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = intertwine(&["verify"], dir.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("spectrum-pairing") && !stdout.contains("FAIL"));

    let strict = intertwine(&["verify", "--tol-eig", "1e-15"], dir.path());
    assert_eq!(code(&strict), 3);
    let stdout = String::from_utf8_lossy(&strict.stdout);
    let failed: Vec<&str> = stdout.lines().filter(|l| l.contains(" FAIL ")).collect();
    assert!(!failed.is_empty(), "{stdout}");
    for line in failed {
        let measured: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(measured.is_finite() && measured > 1e-15, "{line}");
        assert!(stderr(&strict).contains(line.split_whitespace().next().unwrap()));
    }
}

#[test]
fn trace_csv_has_one_row_per_sample_and_operator() {
    let dir = tempfile::tempdir().unwrap();
    let out = intertwine(
        &[
            "trace", "--model", "quantum-dimer", "--steps-per-period", "20", "--periods", "5", "--format",
            "csv,json,gnuplot", "--out", "o",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("o/trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_over_T,operator_label,re_value,im_value,is_stroboscopic,re_lambda_pow_t,im_lambda_pow_t,normalized"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * (20 * 5 + 1));
    // Conserved operators sit at 1 at every stroboscopic time.
    for r in rows.iter().filter(|r| r[1] == "eta1" && r[4] == "1") {
        let (re, im): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((re - 1.0).abs() < 1e-10 && im.abs() < 1e-10, "{r:?}");
    }
    assert_eq!(rows.iter().filter(|r| r[4] == "1").count(), 4 * 6);
    let report = read_json(&dir.path().join("o/trace.json"));
    for op in report["operators"].as_array().unwrap() {
        assert!(op["stroboscopic_deviation"].as_f64().unwrap() < 1e-10, "{op}");
    }
    assert!(dir.path().join("o/trace.gp").exists());
}

#[test]
fn outputs_are_byte_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_intertwine"))
            .args(["scan", "--model", "classical-dimer", "--grid", "0:2:21,0.2:3:8", "--format", "csv,json", "--out", out])
            .current_dir(dir.path())
            .env("INTERTWINE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    };
    run("1", "one");
    run("4", "four");
    for name in ["scan.csv", "contour.csv", "scan.json"] {
        let a = fs::read(dir.path().join("one").join(name)).unwrap();
        let b = fs::read(dir.path().join("four").join(name)).unwrap();
        assert!(a == b, "{name} differs between thread counts");
    }

    for cmd in ["static", "floquet", "trace"] {
        let model = ["--model", "quantum-dimer", "--periods", "3"];
        let a = intertwine(&[&[cmd][..], &model, &["--out", "x"]].concat(), dir.path());
        let b = intertwine(&[&[cmd][..], &model, &["--out", "y"]].concat(), dir.path());
        assert_eq!(code(&a), 0, "{}", stderr(&a));
        assert_eq!(code(&b), 0, "{}", stderr(&b));
        for entry in fs::read_dir(dir.path().join("x")).unwrap() {
            let name = entry.unwrap().file_name();
            let a = fs::read(dir.path().join("x").join(&name)).unwrap();
            let b = fs::read(dir.path().join("y").join(&name)).unwrap();
            assert!(a == b, "{cmd}: {name:?} differs between runs");
        }
    }
}

#[test]
fn bad_thread_count_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_intertwine"))
        .args(["scan", "--model", "quantum-dimer", "--grid", "0:2:3,0.5:1:2", "--out", "o"])
        .current_dir(dir.path())
        .env("INTERTWINE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("INTERTWINE_THREADS"));
}

#[test]
fn classical_scan_contour_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = intertwine(
        &["scan", "--model", "classical-dimer", "--grid", "0:3:31,0.5:3:6", "--format", "json", "--out", "o"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(&dir.path().join("o/scan.json"));
    let agreement = &report["agreement"];
    assert!(agreement["points"].as_u64().unwrap() > 0);
    assert_eq!(agreement["points"], agreement["confirmed"]);
    assert_eq!(agreement["points"], agreement["closed_form_points"]);
    assert!(agreement["max_closed_form_deviation"].as_f64().unwrap() < 1e-6);
    assert!(agreement["max_numeric_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["counts"]["error"], 0);
}

#[test]
fn square_wave_multiplier_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = intertwine(&["floquet", "--model", "quantum-dimer", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(&dir.path().join("o/floquet.json"));
    assert_eq!(report["pt_phase"], "symmetric");
    assert_eq!(report["pairing"], "conjugate");
    assert_eq!(report["conserved_count"], 2);
    let g0 = report["closed_form"]["coefficients"]["g0"].as_f64().unwrap();
    assert!((g0 - 0.5304791264699427).abs() < 1e-12);
    let anti = &report["recursive"]["antisymmetrized"];
    assert_eq!(anti["independent"], true);
    assert!(anti["span_residual"].as_f64().unwrap() < 1e-8);
    assert!(anti["defect"].as_f64().unwrap() < 1e-10);
}

#[test]
fn identity_and_hermitian_hamiltonians() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("id.json"), r#"{"hamiltonian": [[[0.7, 0], [0, 0]], [[0, 0], [0.7, 0]]]}"#).unwrap();
    fs::write(dir.path().join("herm.json"), r#"{"hamiltonian": [[[1, 0], [0.3, -0.4]], [[0.3, 0.4], [-2, 0]]]}"#).unwrap();
    let out = intertwine(&["static", "--input", "id.json", "--format", "json", "--out", "id"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read_json(&dir.path().join("id/static.json"))["conserved_count"], 4);

    let out = intertwine(&["static", "--input", "herm.json", "--format", "json", "--out", "herm"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(&dir.path().join("herm/static.json"));
    assert_eq!(report["conserved_count"], 2);
    let ops = report["eigen_operators"].as_array().unwrap();
    for op in ops {
        assert!(op["value"][0].as_f64().unwrap().abs() < 1e-12, "{op}");
    }
    // The identity lies in the conserved span.
    let overlap: f64 = ops
        .iter()
        .filter(|op| op["kind"] == "conserved")
        .map(|op| {
            let m = &op["operator"];
            let tr_re = m[0][0][0].as_f64().unwrap() + m[1][1][0].as_f64().unwrap();
            let tr_im = m[0][0][1].as_f64().unwrap() + m[1][1][1].as_f64().unwrap();
            (tr_re * tr_re + tr_im * tr_im) / 2.0
        })
        .sum();
    assert!((overlap - 1.0).abs() < 1e-10, "{overlap}");
}

#[test]
fn unitary_limit_has_unit_multipliers() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["quantum-dimer", "classical-dimer"] {
        let out = intertwine(&["floquet", "--model", model, "--gamma", "0", "--format", "json", "--out", model], dir.path());
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let report = read_json(&dir.path().join(model).join("floquet.json"));
        assert_eq!(report["conserved_count"], 2);
        for op in report["eigen_operators"].as_array().unwrap() {
            let (re, im) = (op["value"][0].as_f64().unwrap(), op["value"][1].as_f64().unwrap());
            assert!((re.hypot(im) - 1.0).abs() < 1e-12, "{model}: {op}");
        }
    }
}

#[test]
fn static_quantum_scan_transitions_at_gamma_equal_j() {
    let dir = tempfile::tempdir().unwrap();
    let out = intertwine(
        &[
            "scan", "--model", "quantum-dimer", "--waveform", "static", "--grid", "0:2:10,0.5:3:5", "--format", "json",
            "--out", "o",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(&dir.path().join("o/scan.json"));
    let contour = report["contour"].as_array().unwrap();
    assert_eq!(contour.len(), 5);
    for c in contour {
        assert!((c["gamma_over_j"].as_f64().unwrap() - 1.0).abs() < 1e-10, "{c}");
    }
    for p in report["points"].as_array().unwrap() {
        let g = p["gamma_over_j"].as_f64().unwrap();
        if g < 0.9 {
            assert_eq!(p["phase"], "symmetric", "{p}");
        } else if g > 1.1 {
            assert_eq!(p["phase"], "broken", "{p}");
        }
    }
}
