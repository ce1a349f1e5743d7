use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use ukf_tracker::detector::Frame;
use ukf_tracker::scene::Scene;

fn ukf_track(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ukf-track"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_frames(dir: &Path, frames: &[Frame]) {
    fs::create_dir_all(dir).unwrap();
    for (k, f) in frames.iter().enumerate() {
        f.write_pgm(&dir.join(format!("frame_{k:04}.pgm"))).unwrap();
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn square_frames(tmp: &TempDir, n: usize) -> PathBuf {
    let dir = tmp.path().join("square");
    write_frames(&dir, &Scene::moving_square().sequence(n));
    dir
}

#[test]
fn identical_frames_give_header_only_detections() {
    let tmp = TempDir::new().unwrap();
    let frames = tmp.path().join("still");
    let f = Scene::moving_square().render(0);
    write_frames(&frames, &[f.clone(), f.clone(), f]);
    let out = tmp.path().join("out");

    let o = ukf_track(&[
        "detect",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("detections.csv")).unwrap(),
        "frame,region_id,centroid_x,centroid_y,block_count,mean_p,mean_q\n"
    );
    assert!(out.join("config.toml").exists());
    assert!(!out.join("motion_field.csv").exists());
}

#[test]
fn identical_frames_cannot_initialise_tracking() {
    let tmp = TempDir::new().unwrap();
    let frames = tmp.path().join("still");
    let f = Scene::moving_square().render(0);
    write_frames(&frames, &[f.clone(), f]);
    let o = ukf_track(&[
        "track",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&tmp.path().join("out")),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn malformed_pgm_is_an_input_error_naming_the_file() {
    let tmp = TempDir::new().unwrap();
    let frames = tmp.path().join("bad");
    write_frames(&frames, &Scene::moving_square().sequence(2));
    fs::write(frames.join("frame_0002.pgm"), b"P5\n4 4\n255\nshort").unwrap();
    let o = ukf_track(&[
        "detect",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&tmp.path().join("out")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("frame_0002.pgm"), "{}", stderr(&o));
}

#[test]
fn missing_input_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let o = ukf_track(&[
        "detect",
        "--input",
        path_str(&tmp.path().join("nowhere")),
        "--out",
        path_str(&tmp.path().join("out")),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn config_problems_exit_3() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");

    let bad_key = tmp.path().join("bad_key.toml");
    fs::write(&bad_key, "[detector]\nblock_sise = 16\n").unwrap();
    let o = ukf_track(&[
        "simulate",
        "--config",
        path_str(&bad_key),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let o = ukf_track(&["simulate", "--alpha", "2", "--out", path_str(&out)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let o = ukf_track(&["compare", "--sigma-levels", "1,-3", "--out", path_str(&out)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let o = ukf_track(&["detect", "--out", path_str(&out)]);
    assert_eq!(code(&o), 3, "detect without input: {}", stderr(&o));

    let o = ukf_track(&["simulate", "--trials", "many"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn missing_config_file_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let o = ukf_track(&[
        "simulate",
        "--config",
        path_str(&tmp.path().join("absent.toml")),
        "--out",
        path_str(&tmp.path().join("out")),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn detect_finds_the_square() {
    let tmp = TempDir::new().unwrap();
    let frames = square_frames(&tmp, 12);
    let out = tmp.path().join("out");
    let o = ukf_track(&[
        "detect",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&out),
        "--dump-field",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let scene = Scene::moving_square();
    let rows = csv_rows(&out.join("detections.csv"));
    assert_eq!(rows.len(), 11);
    for (row, frame) in rows.iter().zip(1..) {
        assert_eq!(row[0], frame.to_string());
        assert_eq!(row[1], "0");
        assert!(row[2].split('.').nth(1).is_some_and(|d| d.len() == 6));
        let (x, y): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        let (tx, ty) = scene.objects[0].center(frame);
        assert!((x - tx).hypot(y - ty) <= 8.0, "frame {frame}: ({x}, {y})");
        assert_eq!(row[5], "-4.000000");
    }

    let field = fs::read_to_string(out.join("motion_field.csv")).unwrap();
    assert!(field.starts_with("frame,bx,by,p,q\n"));
    // 16 × 10 blocks for each of 11 pairs
    assert_eq!(field.lines().count(), 1 + 11 * 16 * 10);
}

#[test]
fn track_follows_a_single_square() {
    let tmp = TempDir::new().unwrap();
    let frames = square_frames(&tmp, 40);
    let out = tmp.path().join("out");
    let o = ukf_track(&[
        "track",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let scene = Scene::moving_square();
    let rows = csv_rows(&out.join("tracks.csv"));
    assert!(rows.len() >= 38);
    for row in &rows {
        assert_eq!(row[1], "0");
        let frame: usize = row[0].parse().unwrap();
        let (x, y): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        let (tx, ty) = scene.objects[0].center(frame);
        assert!((x - tx).hypot(y - ty) <= 16.0, "frame {frame}: ({x}, {y})");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("tracks 1\n"), "{summary}");
}

#[test]
fn init_file_seeds_tracks_at_frame_zero() {
    let tmp = TempDir::new().unwrap();
    let frames = square_frames(&tmp, 20);
    let init = tmp.path().join("init.csv");
    fs::write(&init, "x,y,vx,vy\n40,72,4,0\n").unwrap();
    let out = tmp.path().join("out");
    let o = ukf_track(&[
        "track",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&out),
        "--init",
        path_str(&init),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&out.join("tracks.csv"));
    assert_eq!(rows.len(), 19);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows.last().unwrap()[0], "19");
    let config = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(config.contains("init.csv"), "{config}");

    fs::write(&init, "x,y\n").unwrap();
    let o = ukf_track(&[
        "track",
        "--input",
        path_str(&frames),
        "--out",
        path_str(&out),
        "--init",
        path_str(&init),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn simulate_writes_one_path_file_per_level() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = ukf_track(&["simulate", "--out", path_str(&out), "--sigma-levels", "2,4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["path_sigma_2.csv", "path_sigma_4.csv"] {
        let rows = csv_rows(&out.join(name));
        assert_eq!(rows.len(), 120);
        assert_eq!(rows[0][1], "0.000000");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("wrote ")));
}

#[test]
fn compare_report_has_eight_rows_and_reruns_identically() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = ukf_track(&["compare", "--out", path_str(&out), "--seed", "3"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let report = fs::read_to_string(a.join("report.txt")).unwrap();
    let rows = report
        .lines()
        .filter(|l| l.starts_with("ukf ") || l.starts_with("kf "))
        .count();
    assert_eq!(rows, 8, "{report}");
    for f in ["report.txt", "summary.csv", "comparison.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(csv_rows(&a.join("comparison.csv")).len(), 2 * 4 * 100);

    // The echoed config reproduces the run.
    let c = tmp.path().join("c");
    let o = ukf_track(&[
        "compare",
        "--config",
        path_str(&a.join("config.toml")),
        "--out",
        path_str(&c),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(a.join("summary.csv")).unwrap(),
        fs::read(c.join("summary.csv")).unwrap()
    );
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[sim]\ntrials = 7\nseed = 1\n").unwrap();
    let out = tmp.path().join("out");
    let o = ukf_track(&[
        "compare",
        "--config",
        path_str(&cfg),
        "--trials",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let echoed = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echoed.contains("trials = 5"), "{echoed}");
    assert!(echoed.contains("seed = 1"), "{echoed}");
}
