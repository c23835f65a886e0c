use std::path::PathBuf;
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn errbound(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_errbound")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = errbound(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

fn spec_file(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn value(cell: &str) -> f64 {
    cell.parse().unwrap_or_else(|_| panic!("not a number: `{cell}`"))
}

/// Values of `bound` in a sweep CSV, keyed by x.
fn series(csv: &str, bound: &str) -> Vec<(f64, f64)> {
    rows(csv)
        .into_iter()
        .filter(|r| r[2] == bound)
        .map(|r| (value(&r[1]), value(&r[3])))
        .collect()
}

#[test]
fn eval_ternary() {
    let out = ok(&["eval", "example:ternary", "b1", "q=2"]);
    assert_eq!(out.lines().next().unwrap(), "name,params,value,std_error,evaluations");
    let r = &rows(&out)[0];
    assert_eq!((r[0].as_str(), r[1].as_str()), ("b1", "p=2"));
    assert!((value(&r[2]) - 0.2286).abs() < 5e-4);
    assert!(r[3].is_empty());
}

#[test]
fn eval_exponential_map() {
    let out = ok(&["eval", "example:exponential", "lambda2=1", "map"]);
    assert!((value(&rows(&out)[0][2]) - 0.375).abs() < 1e-8);
}

#[test]
fn eval_spec_file() {
    let path = spec_file(
        "certain.spec",
        "[problem]\nkind = discrete\npriors = 1, 0\nh1 = 0.3, 0.7\nh2 = 0.6, 0.4\n\n[bounds]\nb2 p=2\nmap\n",
    );
    let out = ok(&["eval", path.to_str().unwrap()]);
    let r = rows(&out);
    assert_eq!(value(&r[0][2]), 0.0);
    assert_eq!(value(&r[1][2]), 0.0);
}

#[test]
fn eval_to_file() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ternary.csv");
    let r = errbound(&["eval", "--out", path.to_str().unwrap(), "example:ternary", "b2", "p=2"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("name,params"));
}

#[test]
fn parse_errors_exit_2_with_line() {
    let path = spec_file("bad.spec", "[problem]\nkind = discrete\npriors = 0.5, 0.5\nh1 = 0.5, 0.5\nh2 = 0.5, oops\n");
    let r = errbound(&["eval", path.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 5"), "{}", r.stderr);

    for args in [
        &["eval", "example:ternary", "b1"][..],
        &["eval", "example:nonexistent", "map"],
        &["eval", "example:ternary", "bogus"],
        &["eval", "example:ternary", "b1", "p=0.9"],
        &["sweep", "--axis", "sideways", "--grid", "1:2:3", "example:ternary", "b1", "p=2"],
        &["sweep", "--axis", "lambda2", "--grid", "1:2:3", "example:ternary", "map"],
        &["eval", "/definitely/not/here.spec"],
    ] {
        let r = errbound(args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
    }
}

#[test]
fn numerical_failure_exits_3() {
    let r = errbound(&["eval", "example:ternary", "upper-renyi", "p=2"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("upper-renyi"), "{}", r.stderr);
}

#[test]
fn lambda2_sweep_stays_below_map() {
    let out = ok(&[
        "sweep", "--axis", "lambda2", "--grid", "0.6:3:13", "example:exponential",
        "classic:BLB1", "classic:BLB2", "classic:Bayes1",
        "b1", "p=1.5", "b1", "p=2", "b2", "p=1.11", "b2", "p=1.5", "b2", "p=2", "map",
    ]);
    let map = series(&out, "map");
    assert_eq!(map.len(), 13);
    for bound in ["classic:BLB1", "classic:BLB2", "classic:Bayes1", "b1 p=1.5", "b1 p=2", "b2 p=1.11", "b2 p=1.5", "b2 p=2"] {
        let s = series(&out, bound);
        assert_eq!(s.len(), map.len(), "{bound}");
        for ((x, v), (_, m)) in s.iter().zip(&map) {
            assert!(v <= &(m + 1e-9), "{bound} at {x}: {v} > {m}");
        }
    }
}

#[test]
fn upper_renyi_is_scaled_b1() {
    let out = ok(&["sweep", "--axis", "p", "--grid", "1.1:4:8", "example:exponential", "b1", "p=2", "upper-renyi", "p=2"]);
    let b1 = series(&out, "b1");
    let up = series(&out, "upper-renyi");
    for ((p, b), (_, u)) in b1.iter().zip(&up) {
        // Printed at 12 significant digits.
        assert!((u - 2f64.powf(p - 1.0) * b).abs() <= 1e-11 * u.abs().max(1.0), "{p}: {u} vs {b}");
    }
}

#[test]
fn q_axis() {
    let out = ok(&["sweep", "--axis", "q", "--grid", "2:3:2", "example:exponential", "b2", "p=2"]);
    let s = series(&out, "b2");
    assert!((s[0].1 - 0.260528571228).abs() < 1e-9);
    assert!((s[1].1 - 0.320419079419).abs() < 1e-9);
}

#[test]
fn posterior_sweep_reproduces_integrands() {
    let out = ok(&["sweep", "--axis", "posterior", "--grid", "0:1:101", "example:ternary", "b1", "p=2", "b2", "p=2"]);
    let at_half = |b: &str| series(&out, b).into_iter().find(|(x, _)| (x - 0.5).abs() < 1e-12).unwrap().1;
    assert!((at_half("b1 p=2") - 0.25).abs() < 1e-12);
    assert!((at_half("b2 p=2") - (1.0 - 0.5f64.sqrt())).abs() < 1e-11);
}

#[test]
fn low_p_warns() {
    let r = errbound(&["sweep", "--axis", "p", "--grid", "1.0005:2:3", "example:exponential", "b2", "p=2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("warning"));
}

#[test]
fn alpha_sweep() {
    let out = ok(&["sweep", "--axis", "alpha", "--grid", "1:25:4", "example:exponential", "classic:ATLB"]);
    let s = series(&out, "classic:ATLB");
    assert_eq!(s.len(), 4);
    assert!(s.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9));
}

#[test]
fn zzlb_commands() {
    let map = ok(&["zzlb", "--h-step", "0.25", "--phi-step", "0.25", "example:linear-gaussian"]);
    assert_eq!(map.lines().next().unwrap(), "h,inner,filled");
    let last = |s: &str| value(s.lines().last().unwrap().rsplit(',').next().unwrap());
    let vm = last(&map);
    assert!(vm <= 0.5 && vm > 0.4, "{vm}");
    let b2 = ok(&["zzlb", "--h-step", "0.25", "--phi-step", "0.25", "example:linear-gaussian", "b2", "p=2"]);
    assert!(last(&b2) <= vm);

    let r = errbound(&["zzlb", "--grid", "0.1:1:0", "example:linear-gaussian"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    let r = errbound(&["zzlb", "example:ternary"]);
    assert_eq!(r.code, 2);
}

#[test]
fn seeded_output_is_byte_identical() {
    let args = ["eval", "--method", "monte-carlo", "--seed", "42", "example:exponential", "map", "b1", "p=2"];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a, b);
    assert!(!rows(&a)[0][3].is_empty(), "std error column: {a}");
}
