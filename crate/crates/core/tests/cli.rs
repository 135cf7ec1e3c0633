use std::path::{Path, PathBuf};
use std::process::Command;

use rspose::config::{load_motion, RunConfig};
use rspose::geom::rodrigues;
use rspose::image::GrayImage;
use rspose::io::{read_pfm, read_pgm, write_pgm};
use rspose::simgen::rotation_error;
use tempfile::TempDir;

fn rspose(args: &[&dyn AsRef<std::ffi::OsStr>]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rspose")).args(args.iter().map(|a| a.as_ref())).output().unwrap();
    (out.status.code().unwrap_or(-1), format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr)))
}

fn small_config() -> RunConfig {
    RunConfig {
        fx: 240.0,
        fy: 240.0,
        cu: 60.0,
        cv: 80.0,
        width: 160,
        n_rows: 120,
        half_baseline: 0.1,
        d_max: 32,
        point_count: 60,
        seed: 4,
        ..RunConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, cfg.serialize()).unwrap();
    p
}

fn dots(width: usize, height: usize, seed: u32) -> GrayImage {
    GrayImage::from_fn(width, height, |u, v| {
        let mut x = (u as u32).wrapping_mul(73856093) ^ (v as u32).wrapping_mul(19349663) ^ seed.wrapping_mul(83492791);
        x ^= x >> 13;
        x = x.wrapping_mul(0x5bd1e995);
        x ^= x >> 15;
        if x & 1 == 0 {
            40
        } else {
            215
        }
    })
}

#[test]
fn solve_rejects_too_few_matches() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("side,u_a,v_a,u_b,v_b\n");
    for i in 0..8 {
        csv += &format!("L,{},{},{},{}\n", 100 + 10 * i, 200 + 7 * i, 101 + 10 * i, 202 + 7 * i);
        csv += &format!("R,{},{},{},{}\n", 100 + 10 * i, 200 + 7 * i, 101 + 10 * i, 202 + 7 * i);
    }
    let m = dir.path().join("m.csv");
    std::fs::write(&m, csv).unwrap();
    let (code, msg) = rspose(&[&"solve", &m]);
    assert_eq!(code, 1, "{msg}");
    assert!(msg.contains("per side") || msg.contains("need"), "{msg}");
}

#[test]
fn missing_and_malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.pfm");
    let img = dir.path().join("a.pgm");
    write_pgm(&img, &dots(20, 20, 1)).unwrap();
    let (code, msg) = rspose(&[&"rectify", &img, &missing, &missing, &"--out", &dir.path().join("o.pgm")]);
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("nope.pfm"), "{msg}");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "fx = 100\nbogus = 3\n").unwrap();
    let (code, msg) = rspose(&[&"simulate", &"--sweep", &"noise", &"--config", &bad, &"--out", &dir.path().join("s.csv")]);
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("bogus") && msg.contains(":2"), "{msg}");

    let (code, _) = rspose(&[&"simulate", &"--sweep", &"nonsense", &"--out", &dir.path().join("s.csv")]);
    assert_eq!(code, 2);
    let (code, _) = rspose(&[&"frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn depth_of_shifted_pair_is_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &RunConfig { d_max: 16, ..small_config() });
    let base = dots(160, 120, 7);
    let shift = 5;
    let left = GrayImage::from_fn(140, 120, |u, v| base.get(u, v));
    let right = GrayImage::from_fn(140, 120, |u, v| base.get(u, v + shift));
    let (l, r) = (dir.path().join("l.pgm"), dir.path().join("r.pgm"));
    write_pgm(&l, &left).unwrap();
    write_pgm(&r, &right).unwrap();
    let out = dir.path().join("z.pfm");
    let (code, msg) = rspose(&[&"depth", &l, &r, &"--config", &cfg, &"--out", &out]);
    assert_eq!(code, 0, "{msg}");
    let disp = read_pfm(&dir.path().join("z_disparity.pfm")).unwrap();
    let (mut hit, mut total) = (0, 0);
    for u in 10..110 {
        for v in 30..130 {
            let d = disp.get(u, v);
            if d.is_finite() {
                total += 1;
                if (d.abs() - shift as f32).abs() <= 0.5 {
                    hit += 1;
                }
            }
        }
    }
    assert!(total > 5000 && hit as f64 > 0.95 * total as f64, "{hit}/{total}");
    let z = read_pfm(&out).unwrap();
    let expect = (240.0 * 0.2 / shift as f64) as f32;
    assert!((z.get(60, 80) - expect).abs() < 0.05 * expect, "{}", z.get(60, 80));
}

#[test]
fn depth_rejects_mismatched_and_tiny_images() {
    let dir = TempDir::new().unwrap();
    let (a, b, tiny) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"), dir.path().join("t.pgm"));
    write_pgm(&a, &dots(40, 30, 1)).unwrap();
    write_pgm(&b, &dots(41, 30, 1)).unwrap();
    write_pgm(&tiny, &dots(4, 4, 1)).unwrap();
    let out = dir.path().join("z.pfm");
    assert_eq!(rspose(&[&"depth", &a, &b, &"--out", &out]).0, 1);
    assert_eq!(rspose(&[&"depth", &tiny, &tiny, &"--out", &out]).0, 1);
}

#[test]
fn synth_zero_motion_and_determinism() {
    let dir = TempDir::new().unwrap();
    let still = RunConfig { w: Default::default(), d: Default::default(), ..small_config() };
    let cfg = write_config(dir.path(), &still);
    let out = dir.path().join("still");
    let (code, msg) = rspose(&[&"synth", &"--config", &cfg, &"--out", &out]);
    assert_eq!(code, 0, "{msg}");
    for n in 1..=4 {
        assert_eq!(std::fs::read(out.join(format!("i{n}.pgm"))).unwrap(), std::fs::read(out.join(format!("gs_i{n}.pgm"))).unwrap());
    }

    let cfg = write_config(dir.path(), &small_config());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(rspose(&[&"synth", &"--config", &cfg, &"--out", &a]).0, 0);
    assert_eq!(rspose(&[&"synth", &"--config", &cfg, &"--out", &b]).0, 0);
    for f in ["i1.pgm", "i4.pgm", "depth_i2.pfm", "matches.csv", "motion.txt", "scene.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(std::fs::read(a.join("i1.pgm")).unwrap(), std::fs::read(a.join("gs_i1.pgm")).unwrap());
}

#[test]
fn synth_then_solve_recovers_motion() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &RunConfig { point_count: 200, ..RunConfig::rectification_preset() });
    let out = dir.path().join("s");
    assert_eq!(rspose(&[&"synth", &"--config", &cfg, &"--out", &out]).0, 0);
    let report = dir.path().join("report.txt");
    let (code, msg) = rspose(&[&"solve", &out.join("matches.csv"), &"--config", &cfg, &"--out", &report]);
    assert_eq!(code, 0, "{msg}");
    let (est, gt) = (load_motion(&report).unwrap(), load_motion(&out.join("motion.txt")).unwrap());
    let e_r = rotation_error(&rodrigues(&est.w), &rodrigues(&gt.w)).unwrap();
    assert!(e_r < 1e-3, "{e_r}");
    assert!((est.d.normalize() - gt.d.normalize()).norm() < 1e-2, "{:?} {:?}", est.d, gt.d);
}

#[test]
fn ransac_inliers_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &RunConfig { ransac_threshold: 1e-4, ransac_iters: 300, ..small_config() });
    let out = dir.path().join("s");
    assert_eq!(rspose(&[&"synth", &"--config", &cfg, &"--out", &out]).0, 0);
    let m = out.join("matches.csv");
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let report = dir.path().join(format!("{name}.txt"));
        let (code, msg) = rspose(&[&"solve", &m, &"--config", &cfg, &"--ransac", &"--seed", &"9", &"--out", &report]);
        assert_eq!(code, 0, "{msg}");
        runs.push((std::fs::read(&report).unwrap(), std::fs::read(dir.path().join(format!("{name}_inliers.csv"))).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    let inliers = String::from_utf8(runs[0].1.clone()).unwrap();
    assert!(inliers.starts_with("side,index,inlier"));
}

#[test]
fn rectify_without_motion_returns_input() {
    let dir = TempDir::new().unwrap();
    let still = RunConfig { w: Default::default(), d: Default::default(), ..small_config() };
    let cfg = write_config(dir.path(), &still);
    let out = dir.path().join("s");
    assert_eq!(rspose(&[&"synth", &"--config", &cfg, &"--out", &out]).0, 0);
    let fixed = dir.path().join("fixed.pgm");
    let (code, msg) = rspose(&[
        &"rectify",
        &out.join("i1.pgm"),
        &out.join("depth_i1.pfm"),
        &out.join("motion.txt"),
        &"--config",
        &cfg,
        &"--no-fill",
        &"--out",
        &fixed,
    ]);
    assert_eq!(code, 0, "{msg}");
    let (input, result, mask) =
        (read_pgm(&out.join("i1.pgm")).unwrap(), read_pgm(&fixed).unwrap(), read_pgm(&dir.path().join("fixed_mask.pgm")).unwrap());
    let mut covered = 0;
    for u in 0..input.height() {
        for v in 0..input.width() {
            if mask.get(u, v) != 0 {
                covered += 1;
                assert_eq!(input.get(u, v), result.get(u, v), "({u},{v})");
            }
        }
    }
    assert!(covered > input.width() * input.height() * 9 / 10);
}

#[test]
fn simulate_grids_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &RunConfig { trials: 2, ..RunConfig::default() });
    let rows = |path: &Path| std::fs::read_to_string(path).unwrap().lines().skip(1).count();
    let phi = dir.path().join("phi.csv");
    let (code, msg) = rspose(&[&"simulate", &"--sweep", &"readout_ratio", &"--config", &cfg, &"--out", &phi]);
    assert_eq!(code, 0, "{msg}");
    assert_eq!(rows(&phi), 18);
    assert!(dir.path().join("phi.svg").exists());
    let base = dir.path().join("base.csv");
    assert_eq!(rspose(&[&"simulate", &"--sweep", &"baseline", &"--config", &cfg, &"--out", &base]).0, 0);
    assert_eq!(rows(&base), 20);

    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        assert_eq!(rspose(&[&"simulate", &"--sweep", &"noise", &"--config", &cfg, &"--trials", &"1", &"--seed", &"3", &"--out", p]).0, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(std::fs::read_to_string(&a).unwrap().starts_with("sweep_var,value,solver"));
}
