use std::fs;
use std::process::{Command, Output};

fn ph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ph")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3\n").unwrap();
    assert_eq!(ph(&["compute", bad.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(ph(&["compute", dir.path().join("missing.csv").to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(ph(&["experiment", "rate", "--data", "annulus:50:1:0.5", "--n-grid", "20,10", "--b-prop", "0.1"]).status.code(), Some(2));
    assert_eq!(ph(&["compute", "torus:10:0.8"]).status.code(), Some(2));
    assert_eq!(ph(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn compute_and_distances() {
    let dir = tempfile::tempdir().unwrap();
    let square = dir.path().join("square.csv");
    fs::write(&square, "0,0\n1,0\n1,1\n0,1\n").unwrap();
    let h1 = stdout(&ph(&["compute", square.to_str().unwrap()]));
    assert_eq!(h1.trim(), r#"{"hom_dim": 1, "points": [[1, 1.4142135623730951, 1]], "essential": []}"#);
    let csv = stdout(&ph(&["compute", square.to_str().unwrap(), "--dim", "0", "--format", "csv"]));
    assert_eq!(csv, "dim,birth,death,multiplicity\n0,0,1,3\n0,0,inf,1\n");

    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, r#"{"hom_dim": 1, "points": [[0, 2, 1]], "essential": []}"#).unwrap();
    fs::write(&b, r#"{"hom_dim": 1, "points": [[0, 2.5, 1]], "essential": []}"#).unwrap();
    for kind in ["wasserstein", "ot"] {
        let out = stdout(&ph(&["dist", kind, a.to_str().unwrap(), b.to_str().unwrap(), "--p", "1", "--format", "csv"]));
        assert_eq!(out, "distance\n0.5\n", "{kind}");
    }
    let plan = dir.path().join("plan.json");
    let out = stdout(&ph(&["dist", "bottleneck", a.to_str().unwrap(), b.to_str().unwrap(), "--q", "inf", "--plan", plan.to_str().unwrap()]));
    assert!(out.contains("\"distance\": 0.5"));
    assert!(fs::read_to_string(&plan).unwrap().starts_with("{\"cost\": 0.5"));
}

#[test]
fn mean_quantize_and_frechet() {
    let dir = tempfile::tempdir().unwrap();
    let mean = dir.path().join("mean.json");
    let diagrams = dir.path().join("diagrams.json");
    let o = ph(&[
        "subsample-mean", "annulus:200:1:0.5:1", "--n", "40", "--b", "4", "--seed", "3",
        "--diagrams", diagrams.to_str().unwrap(), "-o", mean.to_str().unwrap(),
    ]);
    stdout(&o);
    let text = fs::read_to_string(&mean).unwrap();
    assert!(text.contains("\"mass_denominator\": 4"));
    let q = stdout(&ph(&["quantize", mean.to_str().unwrap(), "--k", "2", "--diagram"]));
    assert!(q.starts_with("{\"hom_dim\": 1"));
    let trace = dir.path().join("trace.jsonl");
    let f = stdout(&ph(&["frechet", diagrams.to_str().unwrap(), "--trace", trace.to_str().unwrap()]));
    assert!(f.starts_with("{\"hom_dim\": 1"));
    assert!(fs::read_to_string(&trace).unwrap().starts_with("{\"iteration\": 0"));
}

#[test]
fn bounds_table() {
    let out = stdout(&ph(&["bounds", "--a", "1", "--b", "1", "--r0", "0", "--big-n", "1", "--n-grid", "10", "--p", "2"]));
    let (head, row) = out.split_once('\n').unwrap();
    assert_eq!(head, "n,bias_bound");
    let v: f64 = row.trim().strip_prefix("10,").unwrap().parse().unwrap();
    assert!((v - 1.6).abs() < 1e-12);
    let out = stdout(&ph(&["bounds", "--b", "1", "--big-n", "1", "--n-grid", "1", "--p", "1", "--r", "2", "--format", "json"]));
    assert!(out.contains("\"tail_bound\": 0.73575888234288"), "{out}");
}

#[test]
fn otmatrix_is_symmetric() {
    let out = stdout(&ph(&["otmatrix", "annulus:80:1:0.5:1", "annulus:80:1:0.5:1", "--n", "30", "--b", "3"]));
    let rows: Vec<Vec<f64>> = out.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
}
