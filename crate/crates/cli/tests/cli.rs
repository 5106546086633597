use std::fs;
use std::io::Cursor;

use cbpv_quant::corpus;
use cbpv_quant::run;
use serde_json::Value;

fn cli(args: &[&str]) -> cbpv_quant::Report {
    let mut argv = vec!["cbpv-quant"];
    argv.extend_from_slice(args);
    run(argv, &mut std::io::empty())
}

fn ex(name: &str, file: &str) -> String {
    corpus::default_root().join(name).join(file).to_string_lossy().into_owned()
}

#[test]
fn corpus_matches_expectations() {
    let examples = corpus::load(&corpus::default_root()).unwrap();
    assert!(examples.len() >= 6);
    let mut failures = Vec::new();
    for e in &examples {
        for r in &e.runs {
            if let Err(msg) = r.check(&r.execute(&e.dir)) {
                failures.push(format!("[{}] {}", e.name, msg));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn reports_are_deterministic() {
    let m = ex("cost", "costM.cbpv");
    let n = ex("cost", "costN.cbpv");
    for args in [
        vec!["compare", &m, &n, "--both", "--json"],
        vec!["laws", "--modality", "E,Cpes", "--samples", "50", "--seed", "3"],
        vec!["simulate", &m, &n],
    ] {
        assert_eq!(cli(&args), cli(&args));
    }
}

#[test]
fn json_compare_carries_the_witness() {
    let r = cli(&["compare", &ex("cost", "costM.cbpv"), &ex("cost", "costN.cbpv"), "--json", "--both"]);
    assert_eq!(r.code, 1);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["verdict"], "distinguished");
    assert_eq!(doc["formula"], "Copt<{7}>");
    assert_eq!(doc["left_value"]["lo"], 1.0);
    assert_eq!(doc["right_value"]["hi"], 0.0);
}

#[test]
fn json_sat_and_eval() {
    let r = cli(&["sat", &ex("coin", "coin.cbpv"), "Eopt<{1}>", "--json"]);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["interval"]["lo"], 0.5);
    assert_eq!(doc["interval"]["exact"], true);
    assert_eq!(doc["fragment"], "positive");

    let r = cli(&["eval", &ex("coin", "coin.cbpv"), "--json", "--fuel", "2"]);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["tree"]["op"], "por");
    assert_eq!(doc["tree"]["children"][0]["leaf"], "ret 0");
    assert_eq!(doc["tree"]["children"][1]["children"][0]["unknown"], true);

    let r = cli(&["eval", &ex("copier", "copier.cbpv"), "--json", "--fuel", "3"]);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["tree"]["children"][0]["family"], true);
}

#[test]
fn update_parameters_render_inline() {
    let r = cli(&["eval", &ex("hoare", "set-l.cbpv")]);
    assert_eq!(r.stdout, "update[l:=1]:\n  ret ()\n");
}

#[test]
fn negation_is_reported_as_general() {
    let r = cli(&["sat", &ex("coin", "coin.cbpv"), "not Eopt<{1}>"]);
    assert_eq!(r.stdout, "value = 0.5\nfragment = general\n");
}

#[test]
fn stdin_programs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cbpv-quant.toml"), "signature = \"prob\"\n").unwrap();
    let mut input = Cursor::new("por(return 1, return 2)");
    let cfg = dir.path().join("cbpv-quant.toml");
    let r = run(["cbpv-quant", "--config", cfg.to_str().unwrap(), "sat", "-", "E<{1}>"], &mut input);
    assert_eq!(r.stdout, "value = 0.5\nfragment = positive\n");

    let mut input = Cursor::new("return 0");
    let r = run(["cbpv-quant", "--signature", "prob", "compare", "-", "-"], &mut input);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("stdin"));
}

#[test]
fn flags_override_the_file() {
    let coin = ex("coin", "coin.cbpv");
    let r = cli(&["sat", &coin, "Eopt<{1}>", "--fuel", "2"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.starts_with("lo = 0, hi = 0.5"), "{}", r.stdout);
    let r = cli(&["sat", &coin, "E<{1}>", "--signature", "prob"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("nor"), "{}", r.stderr);
}

#[test]
fn exact_retries_with_more_fuel() {
    let coin = ex("coin", "coin.cbpv");
    let r = cli(&["sat", &coin, "Eopt<{1}>", "--fuel", "2", "--exact"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "value = 0.5\nfragment = positive\nfuel = 4\n");
    let geo = ex("geometric", "geometric.cbpv");
    let r = cli(&["sat", &geo, "E<const 1>", "--fuel", "4", "--exact", "--cap", "40"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("fuel = 32"), "{}", r.stdout);
}

#[test]
fn errors_exit_two_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cbpv");
    fs::write(&bad, "return\n  (0").unwrap();
    let r = cli(&["typecheck", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.cbpv:2:"), "{}", r.stderr);

    let r = cli(&["typecheck", &ex("typing", "bad.cbpv"), "--json"]);
    assert_eq!(r.code, 2);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["rule"], "app");

    let r = cli(&["sat", &ex("coin", "coin.cbpv"), "Q<{1}>"]);
    assert!(r.code == 2 && r.stderr.contains("unknown modality"), "{}", r.stderr);

    let r = cli(&["typecheck", "/nonexistent/x.cbpv"]);
    assert!(r.code == 2 && r.stderr.contains("cannot read"));

    let r = cli(&["frobnicate"]);
    assert_eq!(r.code, 2);
}

#[test]
fn inconsistent_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("p.cbpv");
    fs::write(&prog, "return 0").unwrap();
    fs::write(dir.path().join("cbpv-quant.toml"), "signature = \"store\"\n").unwrap();
    let r = cli(&["typecheck", prog.to_str().unwrap()]);
    assert!(r.code == 2 && r.stderr.contains("locations"), "{}", r.stderr);
    fs::write(dir.path().join("cbpv-quant.toml"), "signature = \"cost+prob\"\n").unwrap();
    let r = cli(&["typecheck", prog.to_str().unwrap()]);
    assert!(r.code == 2 && r.stderr.contains("cost"), "{}", r.stderr);
}

#[test]
fn mismatched_types_are_rejected() {
    let r = cli(&["compare", &ex("typing", "good.cbpv"), &ex("cbn-cbv", "cbv.cbpv"), "--signature", "prob"]);
    assert_eq!(r.code, 0);
    let r = cli(&["compare", &ex("typing", "good.cbpv"), &ex("geometric", "geometric.cbpv")]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("has type"));
}

#[test]
fn equal_programs_refine_each_other() {
    let m = ex("cost", "costM.cbpv");
    let r = cli(&["compare", &m, &m]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("left refines right up to suite size 3"));
    let r = cli(&["distinguish", &m, &m, "--max-size", "3"]);
    assert_eq!(r.code, 0);
    let r = cli(&["simulate", &m, &m]);
    assert_eq!(r.code, 0, "{}", r.stdout);
}

#[test]
fn laws_report_counts() {
    let r = cli(&["laws", "--modality", "E,Gopt", "--samples", "40", "--depth", "3", "--relator", "2"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("sequential E: 40 samples, 0 failures"), "{}", r.stdout);
    assert!(r.stdout.contains("relator-composition"));
    let r = cli(&["laws", "--modality", "Mayopt"]);
    assert_eq!(r.code, 2);
    let r = cli(&["laws", "--modality", "E", "--samples", "10", "--signature", "prob", "--congruence", "10", "--json"]);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["failures"], 0);
    assert!(doc["results"].as_array().unwrap().iter().any(|x| x["law"] == "congruence"));
}
