//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use mpiview::baseline::VisibilityMask;
use mpiview::{DisparityMap, DisparityUnit, ImageBuffer};
use nalgebra::{DMatrix, DVector};
use num::{BigRational, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rgb(w: usize, h: usize, rng: &mut impl Rng) -> ImageBuffer {
    let data = (0..w * h * 3).map(|_| rng.random::<f32>()).collect();
    ImageBuffer::from_vec(w, h, 3, data).unwrap()
}

/// Per-pixel random inverse depth, partly outside the 1 m..100 m range so
/// the clamped ends get exercised too.
pub fn random_disparity(w: usize, h: usize, rng: &mut impl Rng) -> DisparityMap {
    let values = (0..w * h).map(|_| rng.random_range(0.0..1.2)).collect();
    DisparityMap::new(w, h, DisparityUnit::InverseMeters, values).unwrap()
}

/// Smooth, aperiodic RGB texture: a sum of random Gaussian blobs.
pub fn blob_texture(w: usize, h: usize, seed: u64) -> ImageBuffer {
    let mut r = rng(seed);
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..(w * h / 40).max(8))
        .map(|_| {
            (
                r.random_range(0.0..w as f64),
                r.random_range(0.0..h as f64),
                r.random_range(1.5..4.0),
                [
                    r.random_range(-1.0..1.0),
                    r.random_range(-1.0..1.0),
                    r.random_range(-1.0..1.0),
                ],
            )
        })
        .collect();
    let mut acc = vec![[0.0f64; 3]; w * h];
    for &(bx, by, s, amp) in &blobs {
        let reach = (4.0 * s).ceil() as isize;
        let (cx, cy) = (bx as isize, by as isize);
        for y in (cy - reach).max(0)..(cy + reach + 1).min(h as isize) {
            for x in (cx - reach).max(0)..(cx + reach + 1).min(w as isize) {
                let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
                let g = (-d2 / (2.0 * s * s)).exp();
                let px = &mut acc[y as usize * w + x as usize];
                for c in 0..3 {
                    px[c] += amp[c] * g;
                }
            }
        }
    }
    ImageBuffer::from_fn(w, h, 3, |x, y, c| (0.5 + 0.3 * acc[y * w + x][c]) as f32).unwrap()
}

/// Horizontal displacement `s` with `dst(x) ≈ src(x − s)`, from the peak of
/// the zero-mean normalized cross-correlation over integer shifts, refined
/// by a parabola through the peak and its two neighbours.
///
/// Only columns `x0..x1` and rows `y0..y1` of `dst` are compared; the caller
/// keeps `x0 - max_shift` and `x1 + max_shift` inside the image.
pub fn measure_shift_x(
    src: &ImageBuffer,
    dst: &ImageBuffer,
    (x0, x1): (usize, usize),
    (y0, y1): (usize, usize),
    max_shift: isize,
) -> f64 {
    let ch = src.channels().min(3);
    let ncc = |s: isize| -> f64 {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for y in y0..y1 {
            for x in x0..x1 {
                let xs = (x as isize - s) as usize;
                for c in 0..ch {
                    a.push(dst.get(x, y, c) as f64);
                    b.push(src.get(xs, y, c) as f64);
                }
            }
        }
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (p, q) in a.iter().zip(&b) {
            sab += (p - ma) * (q - mb);
            saa += (p - ma) * (p - ma);
            sbb += (q - mb) * (q - mb);
        }
        sab / (saa * sbb).sqrt()
    };
    let scores: Vec<f64> = (-max_shift..=max_shift).map(ncc).collect();
    let best = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let s = best as f64 - max_shift as f64;
    if best == 0 || best + 1 == scores.len() {
        return s;
    }
    let (l, c, r) = (scores[best - 1], scores[best], scores[best + 1]);
    let denom = l - 2.0 * c + r;
    if denom == 0.0 {
        s
    } else {
        s + 0.5 * (l - r) / denom
    }
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Least-squares `(scale, shift)` from the normal equations, evaluated in
/// exact rational arithmetic and rounded once at the end.
pub fn rational_fit(rel: &[f64], abs: &[f64]) -> (f64, f64) {
    let n = BigRational::from_integer(rel.len().into());
    let (mut sr, mut sa, mut srr, mut sra) = (
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    );
    for (&r, &a) in rel.iter().zip(abs) {
        let (r, a) = (exact(r), exact(a));
        sr += &r;
        sa += &a;
        srr += &r * &r;
        sra += &r * &a;
    }
    let scale = (&n * &sra - &sr * &sa) / (&n * &srr - &sr * &sr);
    let shift = (&sa - &scale * &sr) / &n;
    (scale.to_f64().unwrap(), shift.to_f64().unwrap())
}

/// Harmonic fill of the invisible pixels of one channel by a direct sparse
/// solve (dense LU here, so keep images small): each unknown equals the mean
/// of its in-bounds 4-neighbours.
pub fn laplace_direct(img: &ImageBuffer, channel: usize, mask: &VisibilityMask) -> Vec<f64> {
    let (w, h) = img.dims();
    let unknowns: Vec<usize> = (0..w * h).filter(|&i| !mask.data()[i]).collect();
    let mut index = vec![usize::MAX; w * h];
    for (k, &i) in unknowns.iter().enumerate() {
        index[i] = k;
    }
    let n = unknowns.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (k, &i) in unknowns.iter().enumerate() {
        let (x, y) = (i % w, i / w);
        let mut nb = Vec::new();
        if x > 0 {
            nb.push(i - 1);
        }
        if x + 1 < w {
            nb.push(i + 1);
        }
        if y > 0 {
            nb.push(i - w);
        }
        if y + 1 < h {
            nb.push(i + w);
        }
        a[(k, k)] = nb.len() as f64;
        for j in nb {
            if index[j] == usize::MAX {
                b[k] += img.get(j % w, j / w, channel) as f64;
            } else {
                a[(k, index[j])] -= 1.0;
            }
        }
    }
    let sol = a.lu().solve(&b).expect("nonsingular Laplacian");
    let mut out: Vec<f64> = (0..w * h).map(|i| img.get(i % w, i / w, channel) as f64).collect();
    for (k, &i) in unknowns.iter().enumerate() {
        out[i] = sol[k];
    }
    out
}

/// Largest `|u_i − mean(neighbours)|` over the invisible pixels, computed
/// directly from the output image.
pub fn harmonic_residual(img: &ImageBuffer, mask: &VisibilityMask) -> f64 {
    let (w, h) = img.dims();
    let mut worst = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                continue;
            }
            let mut nb = Vec::new();
            if x > 0 {
                nb.push((x - 1, y));
            }
            if x + 1 < w {
                nb.push((x + 1, y));
            }
            if y > 0 {
                nb.push((x, y - 1));
            }
            if y + 1 < h {
                nb.push((x, y + 1));
            }
            for c in 0..img.channels() {
                let mean = nb.iter().map(|&(i, j)| img.get(i, j, c) as f64).sum::<f64>() / nb.len() as f64;
                worst = worst.max((img.get(x, y, c) as f64 - mean).abs());
            }
        }
    }
    worst
}

/// Back-to-front over-composite in its expanded form
/// `C = Σ_k c_k α_k Π_{j>k} (1 − α_j)`, in f64.
pub fn over_closed_form(colors: &[Vec<f64>], alphas: &[f64]) -> Vec<f64> {
    let k = alphas.len();
    let ch = colors[0].len();
    (0..ch)
        .map(|c| {
            (0..k)
                .map(|i| colors[i][c] * alphas[i] * alphas[i + 1..].iter().map(|a| 1.0 - a).product::<f64>())
                .sum::<f64>()
                .clamp(0.0, 1.0)
        })
        .collect()
}
