use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperltl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).expect("one JSON record")
}

#[test]
fn fragment_sat_writes_chain() {
    let dir = tempfile::tempdir().unwrap();
    let f = data("strict_chain.hl");
    let o = run(&[
        "--json",
        "sat",
        "--mode",
        "fragment",
        "--cert-dir",
        dir.path().to_str().unwrap(),
        f.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["outcome"], "SAT");
    assert_eq!(r["chain_depth"], 3);
    let cert = std::fs::read_to_string(r["certificate"].as_str().unwrap()).unwrap();
    assert_eq!(cert.lines().filter(|l| l.starts_with("step ")).count(), 3);
}

#[test]
fn bounded_traces_unsat_within_bound() {
    let f = data("strict_chain.hl");
    let o = run(&["sat", "--mode", "traces", "--bound", "4", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("UNSAT_WITHIN_BOUND"));
}

#[test]
fn measure_noninterference() {
    let o = run(&["--json", "measure", data("noninterference.hl").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["td"], 1);
    assert_eq!(r["ad"], 0);
    assert_eq!(r["prefix"], "∀2");
}

#[test]
fn modelcheck_exit_codes() {
    let f = data("noninterference.hl");
    let leaky = run(&["mc", "--kripke", data("leaky.kst").to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!((code(&leaky), stdout(&leaky).trim()), (1, "fails"));
    let secure = run(&["mc", "--kripke", data("secure.kst").to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!((code(&secure), stdout(&secure).trim()), (0, "holds"));
}

#[test]
fn eval_and_parse() {
    let f = data("blink.hl");
    let o = run(&["eval", "--model", data("two_traces.trc").to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "true"));
    let o = run(&["parse", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "exists p. F a[p] & G (a[p] -> X !a[p])");
}

#[test]
fn errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.hl");
    std::fs::write(&bad, "forall p. a[p] &").unwrap();
    assert_eq!(code(&run(&["parse", bad.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["parse", "/nonexistent.hl"])), 3);
    let xelim = run(&["transform", "--pass", "xelim", data("blink.hl").to_str().unwrap()]);
    assert_eq!(code(&xelim), 3);
    let alt = dir.path().join("alt.hl");
    std::fs::write(&alt, "forall p. exists q. forall r. F a[p] | F a[q] | G a[r]").unwrap();
    let o = run(&["--json", "sat", alt.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["outcome"], "error");
}

#[test]
fn budget_exhaustion_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("wide.hl");
    std::fs::write(&f, "forall p. exists q. F (a[p] & b[q] & c[p] & d[q])").unwrap();
    let o = run(&["sat", "--mode", "fragment", "--fragment-members", "10", f.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).starts_with("UNKNOWN"));
}

#[test]
fn encoders_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, input) in [("pcp", "worked.pcp"), ("minsky", "zero_loop.cm"), ("starfree", "universal.sf")] {
        let out = dir.path().join(format!("{kind}.hl"));
        let model = dir.path().join(format!("{kind}.trc"));
        let o = run(&[
            "encode",
            kind,
            data(input).to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
            "--ref-model",
            model.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{kind}");
        let e = run(&["eval", "--model", model.to_str().unwrap(), out.to_str().unwrap()]);
        assert_eq!(stdout(&e).trim(), "true", "{kind}");
    }
}

#[test]
fn transform_passes() {
    let f = data("strict_chain.hl");
    for pass in ["prenex", "depth2", "forall-exists", "forall2", "xelim", "normalize"] {
        let o = run(&["--json", "transform", "--pass", pass, f.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{pass}");
        let r = json(&o);
        let back = hyperltl::syntax::parse_sentence(r["sentence"].as_str().unwrap());
        assert!(back.is_ok(), "{pass}");
    }
}

#[test]
fn ltl_backend() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("ltl.hl");
    std::fs::write(&f, "G a[t] & F !a[t]").unwrap();
    assert_eq!(code(&run(&["ltl", "sat", f.to_str().unwrap()])), 1);
    let o = run(&["ltl", "sat", data("blink.hl").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("trace p"));
}

#[test]
fn jobs_do_not_change_results() {
    let f = data("strict_chain.hl");
    let a = run(&["--jobs", "1", "sat", "--mode", "periodic", "--bound", "3", f.to_str().unwrap()]);
    let b = run(&["--jobs", "4", "sat", "--mode", "periodic", "--bound", "3", f.to_str().unwrap()]);
    assert_eq!(code(&a), code(&b));
    assert_eq!(stdout(&a).lines().next(), stdout(&b).lines().next());
}
