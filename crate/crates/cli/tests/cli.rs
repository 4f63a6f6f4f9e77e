use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn ratmodel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratmodel")).args(args).output().expect("binary runs")
}

fn machine(task: &str, file: &Path, extra: &[&str]) -> (i32, Value, String) {
    let path = file.to_str().unwrap();
    let mut args = vec![task, path, "--format", "machine"];
    args.extend_from_slice(extra);
    let out = ratmodel(&args);
    let code = out.status.code().expect("exit code");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = if code == 2 { Value::Null } else { serde_json::from_str(&stdout).expect("machine report is JSON") };
    (code, report, String::from_utf8(out.stderr).unwrap())
}

fn write_problem(dir: &tempfile::TempDir, name: &str, problem: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(problem).unwrap()).unwrap();
    path
}

#[test]
fn torus_cohomology_and_product() {
    let (code, r, _) = machine("run", &data("torus.json"), &["--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["version"], "ratmodel-report/1");
    assert_eq!(r["task"], "cohomology");
    assert_eq!(r["results"]["dims"], json!([1, 2, 1]));
    let reps: Vec<&str> = r["results"]["classes"].as_array().unwrap().iter().map(|c| c["representative"].as_str().unwrap()).collect();
    assert_eq!(reps, ["1", "t1", "t2", "t1*t2"]);
    let products = r["results"]["products"].as_array().unwrap();
    assert!(products.iter().any(|p| p["left"] == "h1_0" && p["right"] == "h1_1" && p["value"] == "h2_0"));
    assert_eq!(r["verdicts"]["independent rank count"], true);
}

#[test]
fn minimal_model_of_truncated_polynomial() {
    let (code, r, _) = machine("minimal-model", &data("cp2.json"), &["--verify"]);
    assert_eq!(code, 0);
    let model = &r["results"]["model"];
    assert_eq!(model["generators"], json!([["v2_0", 2], ["v5_0", 5]]));
    assert_eq!(model["differentials"], json!({ "v5_0": "v2_0^3" }));
    assert_eq!(r["passed"], true);
}

#[test]
fn loop_model_of_cp1() {
    let (code, r, _) = machine("loop-model", &data("loop_cp1.json"), &["--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["model"]["generators"], json!([["x", 2], ["y", 3], ["x_bar", 1], ["y_bar", 2]]));
    assert_eq!(r["results"]["dims"], json!([1, 1, 1, 1, 1]));
}

#[test]
fn suspension_is_an_odd_sphere() {
    let (code, r, _) = machine("suspend", &data("suspend_cp1.json"), &["--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["dims"], json!([1, 0, 0, 1, 0]));
    assert_eq!(r["passed"], true);
}

#[test]
fn gluing_two_circles_at_a_point() {
    let (code, r, _) = machine("glue", &data("glue_wedge.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["dims"], json!([1, 2, 0]));
    assert_eq!(r["verdicts"]["Mayer-Vietoris sequence exact"], true);
}

#[test]
fn sections_of_forms_on_the_circle() {
    let (code, r, _) = machine("gamma", &data("gamma_circle.json"), &["--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["dims"], json!([1, 1, 0]));
}

#[test]
fn twisted_circle_spectral_sequence() {
    let (code, r, _) = machine("ss", &data("twisted_circle.json"), &["--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["e2"], json!([[1, 0, 0], [1, 0, 0], [0, 0, 0]]));
    assert_eq!(r["passed"], true);
}

#[test]
fn admissibility_suite() {
    let (code, r, _) = machine("check-admissible", &data("admissible.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn failed_check_exits_one() {
    // a constant system is locally constant but not extendable, so E2 of
    // its sections misses H^1 of the circle
    let (code, r, _) = machine("ss", &data("constant_circle.json"), &[]);
    assert_eq!(code, 1);
    assert_eq!(r["verdicts"]["E2 equals cohomology with local coefficients"], false);
}

#[test]
fn malformed_file_exits_two_with_position() {
    let out = ratmodel(&["run", data("malformed.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4 column 54"), "{err}");
}

#[test]
fn decimals_and_bare_numbers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for entry in [json!("0.5"), json!(1)] {
        let problem = json!({
            "version": "ratmodel-problem/1",
            "task": "glue",
            "algebras": {
                "a": { "generators": [["a", 1]], "cutoff": 2 },
                "pt": { "generators": [], "cutoff": 2 }
            },
            "morphisms": { "f": { "source": "a", "target": "pt", "matrices": [[[entry]], [], []] } },
            "params": { "f": "f", "g": "f" }
        });
        let path = write_problem(&dir, "bad.json", &problem);
        let (code, _, err) = machine("run", &path, &[]);
        assert_eq!(code, 2, "{err}");
        assert!(err.contains("morphism \"f\""), "{err}");
    }
}

#[test]
fn small_cutoff_reports_the_needed_one() {
    let (code, _, err) = machine("minimal-model", &data("cp2.json"), &["--upto", "9"]);
    assert_eq!(code, 2);
    assert!(err.contains("--cutoff 10"), "{err}");
    let (code, r, _) = machine("minimal-model", &data("cp2.json"), &["--upto", "9", "--cutoff", "10"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["model"]["generators"], json!([["v2_0", 2], ["v5_0", 5]]));
}

#[test]
fn mismatched_subcommand_is_an_input_error() {
    let (code, _, err) = machine("gamma", &data("torus.json"), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("does not match"), "{err}");
}

#[test]
fn machine_output_is_deterministic() {
    for (task, file) in [("run", "torus.json"), ("run", "twisted_circle.json"), ("run", "suspend_cp1.json"), ("run", "admissible.json")] {
        let path = data(file);
        let a = ratmodel(&[task, path.to_str().unwrap(), "--format", "machine", "--verify"]);
        let b = ratmodel(&[task, path.to_str().unwrap(), "--format", "machine", "--verify"]);
        assert_eq!(a.stdout, b.stdout, "{file}");
    }
}

/// Feeds an emitted model back in as a cohomology problem.
fn reingest(dir: &tempfile::TempDir, mut model: Value, cutoff: Option<usize>, upto: usize) -> Value {
    if let Some(n) = cutoff {
        model["cutoff"] = json!(n);
    }
    let problem = json!({
        "version": "ratmodel-problem/1",
        "task": "cohomology",
        "algebras": { "m": model },
        "params": { "algebra": "m", "upto": upto }
    });
    let path = write_problem(dir, "again.json", &problem);
    let (code, r, err) = machine("run", &path, &["--verify"]);
    assert_eq!(code, 0, "{err}");
    r
}

#[test]
fn emitted_models_round_trip() {
    let dir = tempfile::tempdir().unwrap();

    // free models: the minimal model has the cohomology of the target
    let (_, r, _) = machine("run", &data("cp2.json"), &[]);
    let again = reingest(&dir, r["results"]["model"].clone(), Some(7), 6);
    assert_eq!(again["results"]["dims"], json!([1, 0, 1, 0, 1, 0, 0]));

    // explicit algebras reproduce the cohomology and products exactly
    for file in ["suspend_cp1.json", "gamma_circle.json", "glue_wedge.json"] {
        let (_, r, _) = machine("run", &data(file), &[]);
        let model = r["results"]["model"].clone();
        let upto = model["basis"].as_array().unwrap().len() - 2;
        let again = reingest(&dir, model.clone(), None, upto);
        let dims = &r["results"]["dims"];
        let n = dims.as_array().unwrap().len().min(upto + 1);
        assert_eq!(again["results"]["dims"].as_array().unwrap()[..n], dims.as_array().unwrap()[..n], "{file}");
        for key in ["classes", "products"] {
            if let Some(v) = r["results"].get(key) {
                assert_eq!(&again["results"][key], v, "{file}: {key}");
            }
        }
        // emitting the re-ingested algebra again gives the same document
        let problem = json!({
            "version": "ratmodel-problem/1",
            "task": "suspend",
            "algebras": { "m": model },
            "params": { "algebra": "m" }
        });
        let path = write_problem(&dir, "twice.json", &problem);
        let (code, _, err) = machine("run", &path, &[]);
        assert_eq!(code, 0, "{file}: {err}");
    }
}
