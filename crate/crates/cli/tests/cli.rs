use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stiefel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stiefel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn construct_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["construct"];
    args.extend_from_slice(extra);
    args.extend(["--out", path.to_str().unwrap()]);
    stiefel(&args)
}

const K4: [&str; 12] = [
    "--field", "R", "--d", "6", "--r", "3", "--n", "4", "--method", "bibd", "--design", "builtin:k4-edges",
];

#[test]
fn bibd_example_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("k4.json");
    let mut args = vec!["--json"];
    args.extend_from_slice(&K4);
    let built = construct_to(&file, &args);
    assert_eq!(code(&built), 0, "{}", String::from_utf8_lossy(&built.stderr));
    let built_report: Value = serde_json::from_slice(&built.stderr).unwrap();
    assert!((built_report["min_distance_sq"].as_f64().unwrap() - 8.0).abs() < 1e-9);

    let checked = stiefel(&["verify", file.to_str().unwrap()]);
    assert_eq!(code(&checked), 0);
    let report = stdout_json(&checked);
    assert_eq!(report["classification"], "SSC");
    assert_eq!(report, built_report);

    let meta: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(meta["metadata"]["provenance"], "ssc_from_bibd(k4-edges, ssc_sphere)");
}

#[test]
fn orbit_and_infeasible_auto() {
    let out = stiefel(&["construct", "--field", "C", "--d", "2", "--r", "2", "--n", "16", "--method", "orbit"]);
    assert_eq!(code(&out), 0);
    let file: Value = stdout_json(&out);
    assert_eq!(file["n"], 16);
    assert_eq!(file["matrices"][0][0][0].as_array().unwrap().len(), 2);

    let out = stiefel(&["construct", "--field", "R", "--d", "3", "--r", "3", "--n", "20", "--method", "auto"]);
    assert_eq!(code(&out), 3);
    let out = stiefel(&["construct", "--field", "R", "--d", "2", "--r", "2", "--n", "3", "--method", "orbit"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(code(&stiefel(&["construct", "--field", "R", "--d", "2"])), 2);
    assert_eq!(code(&stiefel(&["construct", "--field", "Q", "--d", "2", "--r", "1", "--n", "3", "--method", "sphere"])), 2);
    assert_eq!(code(&stiefel(&["construct", "--field", "R", "--d", "1", "--r", "2", "--n", "3", "--method", "auto"])), 2);
    assert_eq!(code(&stiefel(&["verify", "/nonexistent/file.json"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_stiefel"))
        .args(["bound", "--field", "R", "--d", "2", "--r", "1"])
        .env("STIEFEL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_flags_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("k4.json");
    assert_eq!(code(&construct_to(&file, &K4)), 0);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();

    // scale the first matrix by 1.01: off the manifold
    let mut scaled = doc.clone();
    for row in scaled["matrices"][0].as_array_mut().unwrap() {
        for entry in row.as_array_mut().unwrap() {
            let re = entry[0].as_f64().unwrap();
            entry[0] = Value::from(re * 1.01);
        }
    }
    let bad = dir.path().join("scaled.json");
    std::fs::write(&bad, scaled.to_string()).unwrap();
    let out = stiefel(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["classification"], "Invalid");

    doc["matrices"][0][0][0][1] = Value::from(0.25);
    let imag = dir.path().join("imag.json");
    std::fs::write(&imag, doc.to_string()).unwrap();
    assert_eq!(code(&stiefel(&["verify", imag.to_str().unwrap()])), 2);
}

#[test]
fn bound_tables() {
    let out = stiefel(&["--json", "bound", "--field", "C", "--d", "2", "--r", "2", "--n", "9"]);
    assert_eq!(code(&out), 0);
    let t = stdout_json(&out);
    assert_eq!(t["simplex_cap"], 9);
    assert_eq!(t["orthoplex_cap"], 16);
    assert_eq!(t["rows"][0]["simplex_bound_sq"], "9/2");
    assert!((t["rows"][0]["simplex_bound"].as_f64().unwrap() - 4.5f64.sqrt()).abs() < 1e-15);

    let t = stdout_json(&stiefel(&["--json", "bound", "--field", "R", "--d", "16", "--r", "1"]));
    assert_eq!(t["radon_hurwitz"], 9);

    let t = stdout_json(&stiefel(&["--json", "bound", "--field", "R", "--d", "2", "--r", "1", "--n", "4"]));
    assert_eq!(t["orthoplex_cap"], 4);
    assert_eq!(t["orthoplex_bound_sq"], "2");

    let out = stiefel(&["bound", "--field", "R", "--d", "3", "--r", "2", "--n-range", "2..6"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2 + 5);
    assert_eq!(code(&stiefel(&["bound", "--field", "R", "--d", "3", "--r", "2", "--n-range", "6..2"])), 2);
}

#[test]
fn optimize_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = |p: &Path| {
        vec![
            "optimize".to_string(),
            "--field=R".into(),
            "--d=2".into(),
            "--r=1".into(),
            "--n=5".into(),
            "--seed=0".into(),
            format!("--out={}", p.display()),
        ]
    };
    let run = |p: &Path| {
        let argv = args(p);
        stiefel(&argv.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(code(&run(&b)), 0);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);

    let report = stdout_json(&stiefel(&["verify", a.to_str().unwrap()]));
    let want = 2.0 * (std::f64::consts::PI / 5.0).sin();
    assert!((report["min_distance"].as_f64().unwrap() - want).abs() < 1e-3);
    let doc: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(doc["metadata"]["optimizer"]["restarts"], 16);
    assert_eq!(doc["metadata"]["optimizer"]["max_iters"], 2000);

    let out = stiefel(&["optimize", "--field", "R", "--d", "1", "--r", "1", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let m = &stdout_json(&out)["matrices"];
    let (x, y) = (m[0][0][0][0].as_f64().unwrap(), m[1][0][0][0].as_f64().unwrap());
    assert_eq!(x * y, -1.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_stiefel"))
            .args(["optimize", "--field", "C", "--d", "2", "--r", "1", "--n", "5", "--restarts", "6", "--max-iters", "300"])
            .env("STIEFEL_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("0"));
    assert_eq!(run("1"), run("3"));
}

#[test]
fn atlas_commands() {
    let out = stiefel(&["atlas", "o2-table", "--max-n", "12"]);
    assert_eq!(code(&out), 0);
    let ks: Vec<String> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(ks.join(" "), "2 3 4 4 4 4 4 5 5 6 6");

    let out = stiefel(&["atlas", "circle", "--n", "4"]);
    assert_eq!(code(&out), 0);
    let file = stdout_json(&out);
    assert_eq!((file["d"].as_u64(), file["r"].as_u64(), file["n"].as_u64()), (Some(2), Some(1), Some(4)));

    let out = stiefel(&["--json", "atlas", "best", "--field", "C", "--d", "1", "--r", "1", "--n", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["metadata"]["provenance"], "soc_complex_orbit");
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["classification"], "SOC");
    assert!((report["min_distance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);

    let out = stiefel(&["atlas", "o2", "--n", "7"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["metadata"]["k_n"], 4);
}

#[test]
fn transform_methods() {
    let dir = tempfile::tempdir().unwrap();
    let seed = dir.path().join("seed.json");
    let out = construct_to(&seed, &["--field", "C", "--d", "1", "--r", "1", "--n", "3", "--method", "sphere"]);
    assert_eq!(code(&out), 0);
    let s = seed.to_str().unwrap();
    for (args, ok) in [
        (vec!["--field", "R", "--d", "2", "--r", "2", "--n", "3", "--method", "realify", "--seed-code", s], 0),
        (vec!["--field", "C", "--d", "2", "--r", "1", "--n", "3", "--method", "pad", "--seed-code", s], 0),
        (vec!["--field", "C", "--d", "3", "--r", "3", "--n", "3", "--method", "kronecker", "--k", "3", "--seed-code", s], 0),
        (vec!["--field", "R", "--d", "4", "--r", "2", "--n", "5", "--method", "realify"], 0),
        (vec!["--field", "C", "--d", "2", "--r", "2", "--n", "3", "--method", "complexify"], 0),
        (vec!["--field", "R", "--d", "4", "--r", "4", "--n", "5", "--method", "regular-rep"], 0),
        (vec!["--field", "R", "--d", "8", "--r", "8", "--n", "9", "--method", "radon-hurwitz"], 0),
        (vec!["--field", "C", "--d", "4", "--r", "2", "--n", "9", "--method", "symplectic"], 0),
        (vec!["--field", "R", "--d", "4", "--r", "4", "--n", "32", "--method", "hadamard"], 0),
        (vec!["--field", "R", "--d", "5", "--r", "5", "--n", "30", "--method", "hadamard"], 3),
        // seed has the wrong size for the requested parameters
        (vec!["--field", "R", "--d", "4", "--r", "4", "--n", "3", "--method", "realify", "--seed-code", s], 3),
    ] {
        let mut argv = vec!["construct"];
        argv.extend(args.iter().copied());
        let out = stiefel(&argv);
        assert_eq!(code(&out), ok, "{argv:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn generator_file_for_radon_hurwitz() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.json");
    // I and the quarter turn span rotations of the plane
    std::fs::write(&gens, "[[[[1,0],[0,0]],[[0,0],[1,0]]], [[[0,0],[-1,0]],[[1,0],[0,0]]]]").unwrap();
    let g = gens.to_str().unwrap();
    let base = ["construct", "--field", "R", "--d", "2", "--r", "2", "--method", "radon-hurwitz", "--hr-file", g];
    let mut ok = base.to_vec();
    ok.extend(["--n", "3"]);
    assert_eq!(code(&stiefel(&ok)), 0);
    let mut too_many = base.to_vec();
    too_many.extend(["--n", "4"]);
    assert_eq!(code(&stiefel(&too_many)), 3);

    std::fs::write(&gens, "[[[[1,0],[0,0]],[[0,0],[1,0]]], [[[1,0],[0,0]],[[0,0],[1,0]]]]").unwrap();
    assert_eq!(code(&stiefel(&ok)), 2);
}
