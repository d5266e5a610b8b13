use clap::Parser;
use zrefine::cli::{run, Cli};

fn path(rel: &str) -> String {
    format!("{}/corpus/{rel}", env!("CARGO_MANIFEST_DIR"))
}

fn zrefine(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["zrefine"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).expect("arguments parse");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn setseq_args() -> Vec<String> {
    vec![
        "check".into(),
        path("setseq/abstract.tex"),
        path("setseq/concrete.tex"),
        path("setseq/retrieve.tex"),
    ]
}

fn with(base: Vec<String>, extra: &[&str]) -> Vec<String> {
    let mut v = base;
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn call(v: &[String]) -> (i32, String, String) {
    let refs: Vec<&str> = v.iter().map(String::as_str).collect();
    zrefine(&refs)
}

#[test]
fn passing_check_exits_zero() {
    let (code, out, _) = call(&with(setseq_args(), &["--oracle", "--workers", "2"]));
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verdict: PASS"));
    assert!(out.contains("oracle: PASS"));
}

#[test]
fn failing_check_exits_one_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let (code, out, _) = call(&[
        "check".into(),
        path("boxoffice/marlowe.tex"),
        path("boxoffice/kurbel.tex"),
        path("boxoffice/retrieve.tex"),
        "--oracle".into(),
        "--json".into(),
        json.display().to_string(),
    ]);
    assert_eq!(code, 1, "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verdict"], "fail");
    assert_eq!(v["oracle"]["verdict"], "fail");
    let corr = &v["conditions"][2];
    assert_eq!(corr["condition"], "correctness");
    assert!(corr["counterexample"]["trace"].as_array().unwrap().len() >= 2);
    assert_eq!(v["bounds"]["nat_hi"], 5);
}

#[test]
fn empty_concrete_init_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.tex");
    let text = std::fs::read_to_string(path("setseq/concrete.tex")).unwrap();
    std::fs::write(&c, text.replace("l' = \\emptyseq]", "\\# l' < 0]")).unwrap();
    let mut args = setseq_args();
    args[2] = c.display().to_string();
    let (code, out, _) = call(&with(args, &["--oracle"]));
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("init           VACUOUS"), "{out}");
}

#[test]
fn errors_exit_three() {
    let (code, _, err) = call(&with(setseq_args(), &["--nat-hi=-1"]));
    assert_eq!(code, 3);
    assert!(err.contains("error:"));
    let (code, _, err) = call(&with(setseq_args(), &["--type-size", "U=2"]));
    assert_eq!(code, 3);
    assert!(err.contains("U"), "{err}");
    let (code, _, _) = call(&with(setseq_args(), &["--pairing", "AEnter=CLeave,ALeave=CEnter,X=Y"]));
    assert_eq!(code, 3);
    let mut args = setseq_args();
    args[1] = path("missing.tex");
    assert_eq!(call(&args).0, 3);
}

#[test]
fn degenerate_nat_bound_is_decided() {
    let (code, out, _) = call(&with(setseq_args(), &["--nat-hi=0", "--oracle", "-q"]));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "PASS");
}

#[test]
fn emit_combined_writes_three_contexts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    let (code, _, _) = call(&with(setseq_args(), &["--emit-combined", "--out-dir", &d, "-q"]));
    assert_eq!(code, 0);
    for n in ["r2init", "r2app", "r2corr"] {
        let text = std::fs::read_to_string(dir.path().join(format!("{n}.sal"))).unwrap();
        assert!(text.starts_with(&format!("{n} : CONTEXT")));
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let json = dir.path().join("r.json");
    std::fs::write(&cfg, "nat_hi = 2\ngiven_size = 2\noracle = true\n").unwrap();
    let j = json.display().to_string();
    let c = cfg.display().to_string();
    let (code, _, _) = call(&with(setseq_args(), &["--config", &c, "--json", &j, "-q"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["bounds"]["nat_hi"], 2);
    assert_eq!(v["bounds"]["given_sizes"]["T"], 2);
    assert_eq!(v["oracle"]["verdict"], "pass");
    // Flags win over the file.
    let (code, _, _) = call(&with(setseq_args(), &["--config", &c, "--nat-hi", "3", "--json", &j, "-q"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["bounds"]["nat_hi"], 3);
    std::fs::write(&cfg, "nat_high = 2\n").unwrap();
    assert_eq!(call(&with(setseq_args(), &["--config", &c])).0, 3);
}

#[test]
fn translate_prints_sal() {
    let (code, out, _) = zrefine(&["translate", &path("setseq/concrete.tex")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("c : CONTEXT = BEGIN"));
    assert!(out.contains("NAT : TYPE = [0..4];"));
    let (_, out, _) = zrefine(&["translate", &path("setseq/concrete.tex"), "--given-size", "2", "--context", "small"]);
    assert!(out.starts_with("small : CONTEXT"));
    assert!(out.contains("T : TYPE = {T__1, T__2, T__B};"));
}
