use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn digeo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_digeo")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = digeo(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr is a JSON record")
}

fn write_inputs(dir: &Path, points: &str, dirs: &str) {
    std::fs::write(dir.join("p.csv"), points).unwrap();
    std::fs::write(dir.join("d.csv"), dirs).unwrap();
}

#[test]
fn gen_icosphere_subdiv_3() {
    let dir = tempfile::tempdir().unwrap();
    let obj = ok(&["gen", "--shape", "icosphere", "--subdiv", "3"], dir.path());
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 1280);
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 642);
}

#[test]
fn gen_other_shapes_load_back() {
    let dir = tempfile::tempdir().unwrap();
    for shape in ["torus", "plane", "cylinder", "cone", "disk", "annulus"] {
        ok(&["gen", "--shape", shape, "--out", "m.obj"], dir.path());
        let m = digeo::Mesh::from_obj(&mut std::io::BufReader::new(std::fs::File::open(dir.path().join("m.obj")).unwrap()));
        assert!(m.is_ok(), "{shape}");
    }
}

#[test]
fn zero_vector_trace_stays_at_start() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--shape", "icosphere", "--subdiv", "2", "--out", "s.obj"], dir.path());
    write_inputs(dir.path(), "face,b0,b1,b2\n7,0.2,0.3,0.5\n", "x,y,z\n0,0,0\n");
    let out = ok(&["trace", "--mesh", "s.obj", "--points", "p.csv", "--dirs", "d.csv"], dir.path());
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "digeo.traces");
    assert_eq!(v["version"], 1);
    let t = &v["traces"][0]["trace"];
    assert_eq!(t["final_point"]["face"], 7);
    assert_eq!(t["final_point"]["bary"], serde_json::json!([0.2, 0.3, 0.5]));
    assert_eq!(t["traced_length"], 0.0);
}

#[test]
fn trace_writes_polylines() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--shape", "icosphere", "--subdiv", "2", "--out", "s.obj"], dir.path());
    write_inputs(dir.path(), "face,b0,b1,b2\n0,0.2,0.3,0.5\n", "x,y,z\n0.3,0.1,-0.2\n");
    ok(&["trace", "--mesh", "s.obj", "--points", "p.csv", "--dirs", "d.csv", "--out", "t.json", "--obj", "t.obj"], dir.path());
    let obj = std::fs::read_to_string(dir.path().join("t.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("l ")).count(), 1);
}

#[test]
fn expmap_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--shape", "plane", "--res-a", "4", "--res-b", "4", "--size", "2", "--out", "m.obj"], dir.path());
    write_inputs(dir.path(), "face,b0,b1,b2\n0,0.2,0.3,0.5\n", "x,y,z\n0,0,0\n");
    let out = ok(&["expmap", "--mesh", "m.obj", "--points", "p.csv", "--dirs", "d.csv"], dir.path());
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("index,face,b0,b1,b2,x,y,z,dx,dy,dz,terminated_by,error"));
    assert!(lines.next().unwrap().starts_with("0,0,0.2,0.3,0.5,"));
}

#[test]
fn gradcheck_reports_median_cosine() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["gradcheck", "grad-check"] {
        let out = ok(&[cmd, "--subdiv", "3", "--samples", "10", "--scheme", "gfd"], dir.path());
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], "digeo.gradcheck");
        assert!(v["summary"]["median_cos_v"].as_f64().unwrap() > 0.9);
        assert!(v["summary"]["median_cos_p"].is_number());
        assert_eq!(v["records"].as_array().unwrap().len(), 10);
    }
    let out = ok(&["gradcheck", "--subdiv", "3", "--samples", "10", "--scheme", "ep"], dir.path());
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["max_grad_p_norm"], 0.0);
    assert!(v["summary"]["median_cos_p"].is_null());
}

#[test]
fn oracle_compare_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed-rng", "7", "oracle-compare", "--subdiv", "3", "--samples", "50", "--pi-samples", "2"];
    let a = ok(&args, dir.path());
    assert_eq!(a, ok(&args, dir.path()));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["parallel_max_deviation"], 0.0);
    assert_eq!(v["parallel_bitwise_equal"], true);
    let t: Value =
        serde_json::from_str(&ok(&["oracle-compare", "--surface", "torus", "--res-a", "32", "--res-b", "16", "--samples", "20"], dir.path()))
            .unwrap();
    assert_eq!(t["surface"], "torus");
    assert!(t["pi_mean_error"].is_null());
}

#[test]
fn gcvt_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed-rng", "3", "gcvt", "--subdiv", "2", "--n", "8", "--iters", "4", "--runs", "2", "--summary", "s.json"];
    let a = ok(&args, dir.path());
    assert_eq!(a, ok(&args, dir.path()));
    assert_eq!(a.lines().next(), Some("run,method,iteration,energy,calls"));
    assert!(a.lines().any(|l| l.starts_with("1,lbfgs,")));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(s["schema"], "digeo.gcvt");
    assert_eq!(s["runs"], 2);
    let lloyd = ok(&["gcvt", "--subdiv", "2", "--n", "8", "--iters", "3", "--method", "lloyd", "--seeds", "uniform"], dir.path());
    // header, the initial energy and one row per iteration
    assert_eq!(lloyd.lines().count(), 1 + 1 + 3);
}

#[test]
fn benchmark_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["benchmark", "--subdivs", "1", "--batches", "5", "--reps", "2", "--pi-batch", "2", "--schemes"], dir.path());
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("mesh,faces,batch,backend,median_s,p25_s,p75_s,per_trace_s"));
    let backends: Vec<&str> = lines.map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(backends, ["straightest", "projection", "ep", "gfd"]);
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = digeo(&["--precision", "f32", "gen", "--shape", "plane"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["kind"], "InvalidArgs");
    let out = digeo(&["gen", "--shape", "teapot"], dir.path());
    assert_eq!(error_record(&out)["kind"], "InvalidArgs");
    let out = digeo(&["trace", "--mesh", "missing.obj", "--points", "p.csv", "--dirs", "d.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["kind"], "IOError");
    ok(&["gen", "--shape", "icosphere", "--subdiv", "1", "--out", "s.obj"], dir.path());
    write_inputs(dir.path(), "face,b0,b1,b2\n0,0.2,0.3,0.5\n", "x,y,z\n");
    let out = digeo(&["expmap", "--mesh", "s.obj", "--points", "p.csv", "--dirs", "d.csv"], dir.path());
    assert_eq!(error_record(&out)["kind"], "InvalidArgs");
    std::fs::write(dir.path().join("bad.obj"), "v 0 0 0\nf 1 2 3\n").unwrap();
    let out = digeo(&["gradcheck", "--mesh", "bad.obj"], dir.path());
    assert_eq!(error_record(&out)["kind"], "Parse");
}
