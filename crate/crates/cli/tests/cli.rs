mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shadowtrack::formats::mot;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowtrack")).args(args).output().expect("run binary")
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the small scene to `dir` and returns (frames, gt) paths.
fn simulate(dir: &Path) -> (PathBuf, PathBuf) {
    let scene = dir.join("scene.json");
    fs::write(&scene, serde_json::to_string(&common::small_scene(3)).unwrap()).unwrap();
    let frames = dir.join("frames.vsr");
    let gt = dir.join("gt.csv");
    ok(&["simulate", "--scene", s(&scene), "--out", s(&frames), "--gt", s(&gt)]);
    (frames, gt)
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&[]).status.code(), Some(1));
    assert_eq!(bin(&["track", "--recall", "maybe"]).status.code(), Some(1));
    assert_eq!(bin(&["eval"]).status.code(), Some(1));
    assert_eq!(bin(&["--threads", "0", "eval"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = bin(&["eval", "--gt", s(&missing), "--hyp", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));

    let dets = dir.path().join("dets.csv");
    fs::write(&dets, "1,-1,10,20,5,5,0.9,-1,-1,-1\n2,-1,10,20,5,5,0.9,-1,-1,-1\n3,-1,10,20,x,5,0.9,-1,-1,-1\n").unwrap();
    let out = bin(&["track", "--detections", s(&dets), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.lines().count() == 1, "{err}");

    let bad = dir.path().join("bad.vsr");
    fs::write(&bad, b"VSR0").unwrap();
    assert_eq!(bin(&["detect", "--frames", s(&bad), "--out", s(&dets)]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"assoc": {"tau_high": 0.05}}"#).unwrap();
    let out = bin(&["--config", s(&cfg), "track", "--detections", s(&dets), "--out", s(&dets)]);
    assert_eq!(out.status.code(), Some(1));

    fs::write(&cfg, r#"{"kalman": {"kind": "fixed-diagonal", "q": [1,1,1,1,1,1,1,1], "r": [0,0,0,0]}}"#).unwrap();
    fs::write(&dets, "1,-1,10,20,5,5,0.9,-1,-1,-1\n").unwrap();
    let out = bin(&["--config", s(&cfg), "track", "--detections", s(&dets), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(out.status.code(), Some(3));

    fs::write(&cfg, r#"{"asoc": {}}"#).unwrap();
    let out = bin(&["--config", s(&cfg), "track", "--detections", s(&dets), "--out", s(&dets)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn pipeline_happy_path_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (frames, gt) = simulate(d);
    let tracks = d.join("tracks.csv");
    let report = d.join("report.csv");
    let svg = d.join("tracks.svg");
    let stdout = ok(&[
        "pipeline", "--frames", s(&frames), "--gt", s(&gt), "--tracks-out", s(&tracks), "--report", s(&report), "--render", s(&svg),
    ]);
    assert!(stdout.contains("MOTA"));
    let text = fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("MOTA,FP,FN,IDSW,FM,GT"));
    let mota: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(mota >= 0.9, "{text}");
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert!(!mot::read_trajectories(&tracks).unwrap().is_empty());

    let out = ok(&["eval", "--gt", s(&gt), "--hyp", s(&gt)]);
    assert!(out.lines().nth(1).unwrap().starts_with("1.000000,0,0,0,0,"), "{out}");

    let svg2 = d.join("plain.svg");
    ok(&["render", "--tracks", s(&tracks), "--out", s(&svg2), "--background", s(&frames)]);
    assert!(fs::read_to_string(&svg2).unwrap().contains("data:image/png;base64,"));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (frames, gt) = simulate(d);
    let mut outputs = Vec::new();
    for threads in ["1", "1", "4"] {
        let tracks = d.join(format!("tracks_{}.csv", outputs.len()));
        let dets = d.join(format!("dets_{}.csv", outputs.len()));
        ok(&["--threads", threads, "pipeline", "--frames", s(&frames), "--gt", s(&gt), "--tracks-out", s(&tracks), "--detections-out", s(&dets)]);
        outputs.push((fs::read(&tracks).unwrap(), fs::read(&dets).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let again = d.join("again.vsr");
    let scene = d.join("scene.json");
    ok(&["--threads", "1", "simulate", "--scene", s(&scene), "--out", s(&again)]);
    assert_eq!(fs::read(&again).unwrap(), fs::read(&frames).unwrap());
}

#[test]
fn pipeline_matches_manual_stages() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (frames, _) = simulate(d);
    let n = "40";

    let auto = d.join("auto.csv");
    ok(&["pipeline", "--frames", s(&frames), "--tracks-out", s(&auto)]);
    let enhanced = d.join("enhanced.vsr");
    let dets = d.join("dets.csv");
    let coarse = d.join("coarse.csv");
    let manual = d.join("manual.csv");
    ok(&["enhance", "--frames", s(&frames), "--out", s(&enhanced)]);
    ok(&["detect", "--frames", s(&enhanced), "--out", s(&dets)]);
    ok(&["track", "--detections", s(&dets), "--out", s(&coarse), "--num-frames", n]);
    ok(&["interp", "--tracks", s(&coarse), "--out", s(&manual)]);
    assert_eq!(fs::read(&auto).unwrap(), fs::read(&manual).unwrap());

    let auto = d.join("auto_raw.csv");
    ok(&["pipeline", "--frames", s(&frames), "--tracks-out", s(&auto), "--mtsd", "off", "--gsi", "off", "--recall", "off"]);
    ok(&["detect", "--frames", s(&frames), "--invert", "--out", s(&dets)]);
    ok(&["track", "--detections", s(&dets), "--out", s(&manual), "--num-frames", n, "--recall", "off"]);
    assert_eq!(fs::read(&auto).unwrap(), fs::read(&manual).unwrap());
}

#[test]
fn pgm_directories_work_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scene = d.join("scene.json");
    fs::write(&scene, serde_json::to_string(&common::small_scene(3)).unwrap()).unwrap();
    let pgm = d.join("pgm");
    let gt = d.join("gt.csv");
    ok(&["simulate", "--scene", s(&scene), "--out", s(&pgm), "--gt", s(&gt)]);
    assert!(pgm.join("frame_000001.pgm").exists() && pgm.join("frame_000040.pgm").exists());
    let tracks = d.join("tracks.csv");
    let out = ok(&["pipeline", "--frames", s(&pgm), "--gt", s(&gt), "--tracks-out", s(&tracks)]);
    assert!(out.contains("MOTA"));
}

#[test]
fn recall_reduces_fragmentation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (dets, gt) = common::alternating(60);
    let dets_path = d.join("dets.csv");
    let gt_path = d.join("gt.csv");
    mot::write_detections(&dets_path, &dets).unwrap();
    mot::write_trajectories(&gt_path, &gt).unwrap();
    let mut fm = Vec::new();
    for recall in ["off", "on"] {
        let tracks = d.join(format!("tracks_{recall}.csv"));
        ok(&["track", "--detections", s(&dets_path), "--out", s(&tracks), "--recall", recall]);
        let out = ok(&["eval", "--gt", s(&gt_path), "--hyp", s(&tracks)]);
        let fields: Vec<String> = out.lines().nth(1).unwrap().split(',').map(String::from).collect();
        fm.push(fields[4].parse::<usize>().unwrap());
    }
    assert!(fm[0] > fm[1], "FM off {} vs on {}", fm[0], fm[1]);
}
