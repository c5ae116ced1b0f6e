use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn wbc() -> PathBuf {
    root().join("data/breast-cancer-wisconsin.csv")
}

fn ilc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilc"))
        .current_dir(root())
        .args(args)
        .output()
        .expect("run ilc")
}

fn ok(args: &[&str]) -> String {
    let out = ilc(args);
    assert!(
        out.status.success(),
        "ilc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn discover(dir: &Path, tag: &str, extra: &[&str]) -> (Vec<u8>, Vec<u8>) {
    let rules = dir.join(format!("{tag}.rules"));
    let trace = dir.join(format!("{tag}.trace"));
    let mut args = vec!["discover", "--preset", "wbc", "--pitch", "0.5", "--min-pure-support", "8"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--rules-out", s(&rules), "--trace-out", s(&trace)]);
    ok(&args);
    (std::fs::read(rules).unwrap(), std::fs::read(trace).unwrap())
}

#[test]
fn discover_is_deterministic_and_pure() {
    let dir = tempfile::tempdir().unwrap();
    let data = wbc();
    let a = discover(dir.path(), "a", &["--data", s(&data)]);
    let b = discover(dir.path(), "b", &["--data", s(&data)]);
    assert_eq!(a, b);

    let rules = dir.path().join("a.rules");
    let preds = dir.path().join("preds");
    let metrics = dir.path().join("m.json");
    ok(&[
        "classify", "--data", s(&data), "--preset", "wbc", "--rules", s(&rules),
        "-o", s(&preds), "--metrics-out", s(&metrics),
    ]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(metrics).unwrap()).unwrap();
    assert_eq!(m["total"], 683, "{m}");
    assert_eq!(m["decided"], 683, "{m}");
    assert_eq!(m["correct"], 683, "{m}");
    let lines = std::fs::read_to_string(preds).unwrap();
    assert_eq!(lines.lines().count(), 683);
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["prediction"], v["label"], "{l}");
    }
}

#[test]
fn map_then_discover_matches_direct() {
    let dir = tempfile::tempdir().unwrap();
    let data = wbc();
    let dump = dir.path().join("g.jsonl");
    ok(&["map", "--data", s(&data), "--preset", "wbc", "-o", s(&dump)]);
    let direct = discover(dir.path(), "direct", &["--data", s(&data)]);
    let mapped = discover(dir.path(), "mapped", &["--graphs", s(&dump)]);
    assert_eq!(direct, mapped);
}

#[test]
fn empty_rules_refuse_everything() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("empty.rules");
    let rs = ilc_core::rules::RuleSet::empty(vec!["benign".into(), "malignant".into()]);
    ilc_core::formats::write_ruleset(std::fs::File::create(&rules).unwrap(), &rs).unwrap();
    let metrics = dir.path().join("m.json");
    let data = wbc();
    ok(&[
        "classify", "--data", s(&data), "--preset", "wbc", "--rules", s(&rules),
        "--metrics-out", s(&metrics),
    ]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(metrics).unwrap()).unwrap();
    assert_eq!(m["total"], 683, "{m}");
    assert_eq!(m["coverage"], 0.0, "{m}");
    assert_eq!(m["decided"], 0, "{m}");
}

#[test]
fn cv_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = wbc();
    let run = |name: &str, json: bool| {
        let out = dir.path().join(name);
        let mut args = vec![
            "cv", "--data", s(&data), "--preset", "wbc", "--pitch", "0.5", "--min-pure-support", "8",
            "--k", "3", "--adversarial", "mini-box", "-o", s(&out),
        ];
        if json {
            args.push("--json");
        }
        ok(&args);
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.txt", false), run("b.txt", false));
    let j = run("a.json", true);
    assert_eq!(j, run("b.json", true));
    serde_json::from_slice::<serde_json::Value>(&j).unwrap();
}

#[test]
fn exit_codes() {
    let bad = ilc(&["discover", "--no-such-flag"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = ilc(&["cv", "--data", s(&wbc()), "--preset", "wbc", "--k", "0"]);
    assert_eq!(bad.status.code(), Some(2), "{}", String::from_utf8_lossy(&bad.stderr));
    let missing = ilc(&["classify", "--data", "/no/such.csv", "--rules", "/no/rules"]);
    assert_eq!(missing.status.code(), Some(1));
    let err = String::from_utf8_lossy(&missing.stderr);
    assert_eq!(err.matches("No such file").count(), 1, "{err}");
}

#[test]
fn command_line_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!(
            "data = {:?}\npreset = \"wbc\"\npitch = 0.5\nmin-pure-support = 8\n\n[discover]\nsimplify = true\n",
            s(&wbc())
        ),
    )
    .unwrap();
    let via_config = dir.path().join("c.rules");
    ok(&["--config", s(&cfg), "discover", "--rules-out", s(&via_config)]);
    let (flags, _) = discover(dir.path(), "f", &["--data", s(&wbc()), "--simplify"]);
    assert_eq!(std::fs::read(&via_config).unwrap(), flags);

    let over = dir.path().join("o.rules");
    ok(&["--config", s(&cfg), "discover", "--min-pure-support", "30", "--rules-out", s(&over)]);
    let (thirty, _) = discover(dir.path(), "t", &["--data", s(&wbc()), "--simplify", "--min-pure-support", "30"]);
    assert_eq!(std::fs::read(&over).unwrap(), thirty);
    assert_ne!(thirty, flags);

    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "[discover]\nmin-pure-suport = 3\n").unwrap();
    let out = ilc(&["--config", s(&typo), "discover", "--data", s(&wbc()), "--rules-out", s(&over)]);
    assert_eq!(out.status.code(), Some(2));
}
