use std::process::Command;

fn newform(args: &[&str]) -> (i32, serde_json::Value) {
    let cache = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_newform"))
        .args(args)
        .env("NEWFORM_CACHE_DIR", cache.path())
        .output()
        .unwrap();
    let code = out.status.code().unwrap_or(-1);
    let json = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (code, json)
}

#[test]
fn chartable_counts() {
    let (code, r) = newform(&["chartable", "2", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["seed"], 0);
    let cusp = r["payload"]["table"]["cuspidal"].as_array().unwrap();
    assert_eq!(cusp.len(), 8);
    assert_eq!(cusp.iter().filter(|c| c.as_bool() == Some(true)).count(), 3);
    let (_, r) = newform(&["chartable", "1", "3"]);
    assert_eq!(r["payload"]["newform_eligible"], false);
}

#[test]
fn oldforms_table() {
    let (code, r) = newform(&["oldforms", "3", "2", "5"]);
    assert_eq!(code, 0);
    let dims: Vec<(u64, u64)> = r["payload"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["row"] == r["payload"][0]["row"])
        .map(|x| (x["m"].as_u64().unwrap(), x["dimension"].as_u64().unwrap()))
        .collect();
    assert_eq!(dims, vec![(0, 0), (1, 0), (2, 0), (3, 1), (4, 3), (5, 6)]);
}

#[test]
fn coeff_formula_equals_direct() {
    let (code, r) = newform(&["coeff", "--n", "2", "--q", "3", "--samples", "50"]);
    assert_eq!(code, 0);
    let rows = r["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|x| x["equal"] == true));
}

#[test]
fn whittaker_identity() {
    let (code, r) = newform(&["whittaker", "--n", "2", "--q", "2", "--at", "identity"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["points"][0]["via_coefficient"], 1);
    assert_eq!(r["payload"]["points"][0]["via_gelfand"], 1);
}

#[test]
fn payload_is_reproducible() {
    let args = ["--seed", "3", "newform-eval", "--n", "2", "--q", "2", "--samples", "5"];
    let (_, a) = newform(&args);
    let (_, b) = newform(&args);
    assert_eq!(a["seed"], 3);
    assert_eq!(a["payload_sha256"], b["payload_sha256"]);
    assert_eq!(a["payload"], b["payload"]);
}

#[test]
fn config_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 2\np = 3\nk = 1\nseed = 9\nsamples = 3\n").unwrap();
    let (code, r) = newform(&["--config", cfg.to_str().unwrap(), "coeff"]);
    assert_eq!(code, 0);
    assert_eq!(r["config"]["p"], 3);
    assert_eq!(r["seed"], 9);
    assert_eq!(r["payload"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(newform(&["minimax-verify", "--m", "2"]).0, 2);
    assert_eq!(newform(&["chartable", "2", "6"]).0, 2);
    assert_eq!(newform(&["whittaker", "--n", "3", "--q", "2"]).0, 2);
}

#[test]
fn minimax_verify_small() {
    let (code, r) = newform(&["minimax-verify", "--n", "2", "--q", "2", "--m", "1", "--samples", "200", "--polys", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["conductor"], 4);
}
