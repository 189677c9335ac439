mod common;

use std::fs;

use common::{p, vpp, write_scene};
use vpp_core::imgio::{read_disparity, read_hints, read_image};
use vpp_core::synth;

#[test]
fn sample_writes_header_only_at_zero_density() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(64, 32), dir.path());
    let out = dir.path().join("h.csv");
    let o = vpp(["sample", "--gt", p(&files.gt), "--density", "0", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap().trim(), "x,y,d");
}

#[test]
fn sample_count_matches_density() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(64, 32), dir.path());
    let out = dir.path().join("h.csv");
    let o = vpp(["sample", "--gt", p(&files.gt), "--density", "0.1", "--seed", "3", "--out", p(&out)]);
    assert!(o.status.success());
    let hints = read_hints(&out).unwrap();
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), hints.len().to_string());
    assert!(hints.len() > 150 && hints.len() < 260, "{}", hints.len());
}

#[test]
fn missing_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = vpp([
        "sample",
        "--gt",
        p(&dir.path().join("nope.pfm")),
        "--out",
        p(&dir.path().join("h.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flag_value_exits_with_2() {
    let o = vpp(["match", "--left", "a.png", "--right", "b.png", "--paths", "6", "--out", "d.pfm"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_of_bounds_hint_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(64, 32), dir.path());
    let hints = dir.path().join("h.csv");
    fs::write(&hints, "x,y,d\n70,3,5\n").unwrap();
    let o = vpp([
        "augment",
        "--left",
        p(&files.left),
        "--right",
        p(&files.right),
        "--hints",
        p(&hints),
        "--out",
        p(&dir.path().join("aug")),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn augment_writes_pair_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(64, 32), dir.path());
    let hints = dir.path().join("h.csv");
    vpp(["sample", "--gt", p(&files.gt), "--density", "0.05", "--out", p(&hints)]);
    let aug = dir.path().join("aug");
    let dbg = dir.path().join("dbg");
    let o = vpp([
        "augment",
        "--left",
        p(&files.left),
        "--right",
        p(&files.right),
        "--hints",
        p(&hints),
        "--pattern",
        "hist",
        "--out",
        p(&aug),
        "--debug-dir",
        p(&dbg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = read_image(aug.join("left.png")).unwrap();
    let orig = read_image(&files.left).unwrap();
    assert_eq!((l.width(), l.height()), (64, 32));
    assert_ne!(l.data(), orig.data());
    let overlay = read_image(dbg.join("hints_overlay.png")).unwrap();
    assert_eq!(overlay.channels(), 3);
}

#[test]
fn match_path_count_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::two_rectangles(96, 64, 1), dir.path());
    let run = |paths: &str| {
        let out = dir.path().join(format!("d{paths}.pfm"));
        let o = vpp([
            "match",
            "--left",
            p(&files.left),
            "--right",
            p(&files.right),
            "--max-disp",
            "64",
            "--paths",
            paths,
            "--out",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    assert_ne!(run("4"), run("8"));
}

#[test]
fn eval_prints_json_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(64, 32), dir.path());
    let o = vpp(["eval", "--disp", p(&files.gt), "--gt", p(&files.gt)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metrics"]["bad2"], 0.0);
    assert_eq!(v["metrics"]["coverage"], 1.0);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(64, 32), dir.path());
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "density = 0.2\nseed = 4\n").unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    vpp(["--config", p(&cfg), "sample", "--gt", p(&files.gt), "--out", p(&a)]);
    vpp(["sample", "--gt", p(&files.gt), "--density", "0.2", "--seed", "4", "--out", p(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    vpp(["--config", p(&cfg), "sample", "--gt", p(&files.gt), "--density", "0.01", "--out", p(&c)]);
    assert!(read_hints(&c).unwrap().len() < read_hints(&a).unwrap().len());
}

#[test]
fn pipeline_writes_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_scene(&synth::textureless_two_plane(96, 48), dir.path());
    let out = dir.path().join("run");
    let o = vpp([
        "pipeline",
        "--left",
        p(&files.left),
        "--right",
        p(&files.right),
        "--gt",
        p(&files.gt),
        "--densities",
        "0,0.05",
        "--max-disp",
        "48",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 8);
    assert_eq!(report["config"]["params"]["sgm"]["max_disp"], 48);
    for mode in ["baseline", "vpp", "guided", "vpp+guided"] {
        let d = read_disparity(out.join("density_0.05").join(mode).join("disparity.pfm")).unwrap();
        assert_eq!((d.width(), d.height()), (96, 48));
    }
    assert!(out.join("density_0.05/vpp/left.png").is_file());
    assert_eq!(fs::read_to_string(out.join("density_0/hints.csv")).unwrap().trim(), "x,y,d");
}
