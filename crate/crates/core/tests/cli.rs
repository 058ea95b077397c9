mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mpiview::io::load_mpi;
use mpiview::io::pfm::save_disparity_pfm;
use mpiview::io::png::{load_image_png, save_image_png, PngDepth};
use mpiview::{DisparityMap, DisparityUnit, ImageBuffer};
use rand::Rng;

use common::*;

fn mpiview(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpiview")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = mpiview(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// 8-bit color image and a normalized disparity map on disk.
fn inputs(dir: &Path, w: usize, h: usize) -> (ImageBuffer, String, String) {
    let mut r = rng(31);
    let fg = ImageBuffer::from_fn(w, h, 3, |_, _, _| r.random_range(0..=255u8) as f32 / 255.0).unwrap();
    let fg_path = dir.join("fg.png");
    save_image_png(&fg_path, &fg, PngDepth::Eight).unwrap();
    let d = DisparityMap::from_fn(w, h, DisparityUnit::Normalized, |x, _| 0.05 + 0.9 * x as f64 / w as f64).unwrap();
    let d_path = dir.join("disp.pfm");
    save_disparity_pfm(&d_path, &d).unwrap();
    (fg, s(&fg_path).into(), s(&d_path).into())
}

#[test]
fn build_render_export_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (fg, fg_path, d_path) = inputs(dir.path(), 24, 16);
    let mpi_dir = dir.path().join("scene");
    ok(&[
        "build",
        "--fg",
        &fg_path,
        "--disparity",
        &d_path,
        "--planes",
        "16",
        "-o",
        s(&mpi_dir),
    ]);
    let mpi = load_mpi(&mpi_dir).unwrap();
    assert_eq!((mpi.len(), mpi.width(), mpi.height()), (16, 24, 16));

    let view = dir.path().join("view.png");
    ok(&["render", "--mpi", s(&mpi_dir), "--pose", "0,0,0", "-o", s(&view)]);
    assert_eq!(
        load_image_png(&view).unwrap(),
        fg,
        "identity render must reproduce the input"
    );

    let moved = dir.path().join("moved.png");
    ok(&[
        "render",
        "--mpi",
        s(&mpi_dir),
        "--pose",
        "-0.1,0.05,0,0,0.02,0",
        "--bit-depth",
        "16",
        "-o",
        s(&moved),
    ]);
    assert_eq!(load_image_png(&moved).unwrap().dims(), (24, 16));

    let web = dir.path().join("web");
    ok(&["export-web", "--mpi", s(&mpi_dir), "-o", s(&web)]);
    assert!(web.join("meta.json").is_file());
    assert!(web.join("plane_0015.png").is_file());

    let frames = dir.path().join("frames");
    ok(&[
        "path",
        "--mpi",
        s(&mpi_dir),
        "--kind",
        "grid",
        "--n",
        "3",
        "-o",
        s(&frames),
    ]);
    assert!(frames.join("frame_0008.png").is_file());
    let poses = fs::read_to_string(frames.join("poses.txt")).unwrap();
    assert_eq!(poses.lines().filter(|l| !l.starts_with('#')).count(), 9);
    assert!(poses.contains("4 0 0 0"), "{poses}");
}

#[test]
fn build_with_background_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let (w, h, k) = (10, 8, 4);
    let (fg, fg_path, d_path) = inputs(dir.path(), w, h);
    let bg_path = dir.path().join("bg.png");
    save_image_png(&bg_path, &ImageBuffer::zeros(w, h, 3).unwrap(), PngDepth::Eight).unwrap();
    // all-ones weights stacked into one gray PFM
    let weights = mpiview::io::pfm::Pfm {
        width: w,
        height: k * h,
        channels: 1,
        scale: 1.0,
        endian: mpiview::io::pfm::Endian::Little,
        data: vec![1.0; w * h * k],
    };
    let weights_path = dir.path().join("w.pfm");
    weights.write(&weights_path).unwrap();
    let mpi_dir = dir.path().join("scene");
    ok(&[
        "build",
        "--fg",
        &fg_path,
        "--bg",
        s(&bg_path),
        "--weights",
        s(&weights_path),
        "--disparity",
        &d_path,
        "--planes",
        "4",
        "-o",
        s(&mpi_dir),
    ]);
    let view = dir.path().join("view.png");
    ok(&["render", "--mpi", s(&mpi_dir), "--pose", "0,0,0", "-o", s(&view)]);
    assert_eq!(load_image_png(&view).unwrap(), fg);

    // weights for the wrong plane count are a parse error
    let out = mpiview(&[
        "build",
        "--fg",
        &fg_path,
        "--bg",
        s(&bg_path),
        "--weights",
        s(&weights_path),
        "--disparity",
        &d_path,
        "--planes",
        "5",
        "-o",
        s(&mpi_dir),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn baseline_writes_image_and_mask() {
    let dir = tempfile::tempdir().unwrap();
    let (_, fg_path, d_path) = inputs(dir.path(), 32, 20);
    let out = dir.path().join("out.png");
    let mask = dir.path().join("mask.png");
    ok(&[
        "baseline",
        "--fg",
        &fg_path,
        "--disparity",
        &d_path,
        "--pose",
        "0.05,0,0",
        "--mask-out",
        s(&mask),
        "-o",
        s(&out),
    ]);
    assert_eq!(load_image_png(&out).unwrap().dims(), (32, 20));
    let m = load_image_png(&mask).unwrap();
    assert!(m.data().contains(&0.0) && m.data().contains(&1.0));

    let raw = dir.path().join("raw.png");
    ok(&[
        "baseline",
        "--fg",
        &fg_path,
        "--disparity",
        &d_path,
        "--pose",
        "0.05,0,0",
        "--inpaint",
        "none",
        "-o",
        s(&raw),
    ]);
    let raw = load_image_png(&raw).unwrap();
    for (i, &vis) in m.data().iter().enumerate() {
        if vis == 0.0 {
            assert_eq!(raw.pixel(i % 32, i / 32), [0.0, 0.0, 0.0]);
        }
    }
}

#[test]
fn align_reports_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let (w, h) = (16, 12);
    let rel = DisparityMap::from_fn(w, h, DisparityUnit::InverseMeters, |x, y| (x + 2 * y) as f64 / 64.0).unwrap();
    let abs = DisparityMap::from_fn(w, h, DisparityUnit::InverseMeters, |x, y| 2.0 * rel.get(x, y) + 0.25).unwrap();
    let (rel_path, abs_path) = (dir.path().join("rel.pfm"), dir.path().join("abs.pfm"));
    save_disparity_pfm(&rel_path, &rel).unwrap();
    save_disparity_pfm(&abs_path, &abs).unwrap();
    let aligned = dir.path().join("aligned.pfm");
    let stdout = ok(&[
        "align",
        "--relative",
        s(&rel_path),
        "--absolute",
        s(&abs_path),
        "-o",
        s(&aligned),
    ]);
    let parts: Vec<f64> = stdout
        .trim()
        .split(' ')
        .map(|kv| kv.split_once('=').unwrap().1.parse().unwrap())
        .collect();
    assert!(
        (parts[0] - 2.0).abs() < 1e-9 && (parts[1] - 0.25).abs() < 1e-9,
        "{stdout}"
    );
    let got = mpiview::io::pfm::load_disparity_pfm(&aligned, DisparityUnit::InverseMeters).unwrap();
    for (a, b) in got.values().iter().zip(abs.values()) {
        assert!((a - b).abs() < 1e-6);
    }

    let flat = dir.path().join("flat.pfm");
    save_disparity_pfm(
        &flat,
        &DisparityMap::constant(w, h, DisparityUnit::InverseMeters, 0.5).unwrap(),
    )
    .unwrap();
    let out = mpiview(&[
        "align",
        "--relative",
        s(&flat),
        "--absolute",
        s(&abs_path),
        "-o",
        s(&aligned),
    ]);
    assert_eq!(out.status.code(), Some(4), "constant relative disparity is degenerate");
}

fn trajectory_text(frames: usize) -> String {
    let mut text = String::from("https://www.youtube.com/watch?v=pairs\n");
    for i in 0..frames {
        text.push_str(&format!(
            "{} 0.5 0.9 0.5 0.5 0 0 1 0 0 {} 0 1 0 0 0 0 1 0\n",
            1000 + i * 33_367,
            0.01 * i as f64
        ));
    }
    text
}

#[test]
fn sample_pairs_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.txt");
    fs::write(&traj, trajectory_text(60)).unwrap();
    let run = |seed: &str, name: &str| {
        let p = dir.path().join(name);
        ok(&[
            "sample-pairs",
            "--trajectory",
            s(&traj),
            "--seed",
            seed,
            "--count",
            "25",
            "-o",
            s(&p),
        ]);
        fs::read_to_string(p).unwrap()
    };
    let a = run("7", "a.txt");
    assert_eq!(a, run("7", "b.txt"));
    assert_ne!(a, run("8", "c.txt"));
    let rows: Vec<Vec<usize>> = a
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    for r in rows {
        let (src, tgt, interval) = (r[0], r[1], r[2]);
        assert!(src != tgt && src < 60 && tgt < 60);
        assert!((1..=6).contains(&interval) && src.abs_diff(tgt) % interval == 0);
        assert!(src.abs_diff(tgt) <= 9 * interval);
        assert_eq!(r[3], 1000 + src * 33_367);
    }

    fs::write(&traj, trajectory_text(5)).unwrap();
    let out = mpiview(&[
        "sample-pairs",
        "--trajectory",
        s(&traj),
        "--seed",
        "1",
        "-o",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, fg_path, d_path) = inputs(dir.path(), 8, 8);
    let o = dir.path().join("o");
    let code = |args: &[&str]| mpiview(args).status.code();

    assert_eq!(code(&["build", "--fg", &fg_path]), Some(2), "missing required flag");
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(
        code(&[
            "build",
            "--fg",
            &fg_path,
            "--disparity",
            &d_path,
            "--planes",
            "1",
            "-o",
            s(&o)
        ]),
        Some(2),
        "one plane"
    );
    assert_eq!(
        code(&[
            "build",
            "--fg",
            &fg_path,
            "--disparity",
            &d_path,
            "--window",
            "30",
            "-o",
            s(&o)
        ]),
        Some(2),
        "even window"
    );
    assert_eq!(
        code(&["render", "--mpi", s(&o), "--pose", "0,0,0", "-o", s(&o)]),
        Some(3),
        "missing archive"
    );
    assert_eq!(
        code(&["build", "--fg", "/nonexistent.png", "--disparity", &d_path, "-o", s(&o)]),
        Some(3)
    );

    let junk = dir.path().join("junk.pfm");
    fs::write(&junk, b"P7\n1 1\n-1.0\n").unwrap();
    assert_eq!(
        code(&["build", "--fg", &fg_path, "--disparity", s(&junk), "-o", s(&o)]),
        Some(3)
    );

    ok(&[
        "build",
        "--fg",
        &fg_path,
        "--disparity",
        &d_path,
        "--planes",
        "8",
        "-o",
        s(&o),
    ]);
    let img = dir.path().join("i.png");
    assert_eq!(
        code(&["render", "--mpi", s(&o), "--pose", "1,2", "-o", s(&img)]),
        Some(2),
        "short pose"
    );
    assert_eq!(
        code(&[
            "render",
            "--mpi",
            s(&o),
            "--pose",
            "0,0,0",
            "--bit-depth",
            "12",
            "-o",
            s(&img)
        ]),
        Some(2)
    );
    // camera sitting on the nearest plane
    assert_eq!(
        code(&["render", "--mpi", s(&o), "--pose", "0,0,-1", "-o", s(&img)]),
        Some(4)
    );
}
