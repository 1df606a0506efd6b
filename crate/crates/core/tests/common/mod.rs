//! Fixtures and independent reference implementations shared by the
//! integration tests and the acceptance runner.

#![allow(dead_code)]

use droidlens::dataset::{synth_blobs, BlobSpec, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- DEX bytes

/// Plain Adler-32, written out from its definition.
pub fn adler32(data: &[u8]) -> u32 {
    let (mut a, mut b) = (1u32, 0u32);
    for &byte in data {
        a = (a + u32::from(byte)) % 65521;
        b = (b + a) % 65521;
    }
    (b << 16) | a
}

fn put_u32(buf: &mut [u8], at: usize, v: u32) {
    buf[at..at + 4].copy_from_slice(&v.to_le_bytes());
}

/// One class, one direct method whose body is `insns`, laid out by hand:
/// header at 0x00, class_def at 0x70, code_item at 0x90, class_data after
/// the (4-aligned) code item. Offsets and sizes are patched in explicitly so
/// the file does not depend on the library's own builder.
pub fn hand_dex(insns: &[u16]) -> Vec<u8> {
    let code_off = 0x90usize;
    let code_end = code_off + 16 + 2 * insns.len();
    let class_data_off = (code_end + 3) & !3;
    // static/instance field counts, direct/virtual method counts,
    // then method_idx_diff 0, access_flags 1, code_off 0x90 (uleb 90 01)
    let class_data = [0x00, 0x00, 0x01, 0x00, 0x00, 0x01, 0x90, 0x01];
    let file_size = class_data_off + class_data.len();
    let mut f = vec![0u8; file_size];
    f[..8].copy_from_slice(b"dex\n035\0");
    put_u32(&mut f, 0x20, file_size as u32);
    put_u32(&mut f, 0x24, 0x70);
    put_u32(&mut f, 0x28, 0x1234_5678);
    put_u32(&mut f, 0x60, 1); // class_defs_size
    put_u32(&mut f, 0x64, 0x70); // class_defs_off
    put_u32(&mut f, 0x68, (file_size - 0x90) as u32); // data_size
    put_u32(&mut f, 0x6c, 0x90); // data_off

    // class_def: class_idx, access, superclass, interfaces, source, annotations, class_data, static_values
    let cd = 0x70;
    put_u32(&mut f, cd + 4, 1);
    put_u32(&mut f, cd + 8, 0xffff_ffff);
    put_u32(&mut f, cd + 16, 0xffff_ffff);
    put_u32(&mut f, cd + 24, class_data_off as u32);

    // code_item: registers, ins, outs, tries (u16 each), debug_info_off, insns_size
    f[code_off..code_off + 2].copy_from_slice(&4u16.to_le_bytes());
    put_u32(&mut f, code_off + 12, insns.len() as u32);
    for (i, u) in insns.iter().enumerate() {
        let at = code_off + 16 + 2 * i;
        f[at..at + 2].copy_from_slice(&u.to_le_bytes());
    }
    f[class_data_off..].copy_from_slice(&class_data);
    let sum = adler32(&f[12..]);
    put_u32(&mut f, 0x08, sum);
    f
}

/// Reference ULEB128 decoder: at most 5 bytes, value must fit in u32.
pub fn uleb_oracle(bytes: &[u8]) -> Option<(u32, usize)> {
    let mut value: u64 = 0;
    for (i, &b) in bytes.iter().enumerate().take(5) {
        value += u64::from(b & 0x7f) << (7 * i);
        if b & 0x80 == 0 {
            return u32::try_from(value).ok().map(|v| (v, i + 1));
        }
    }
    None
}

// ------------------------------------------------------- validity oracles

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Calinski-Harabasz from pairwise distances: total and within scatter are
/// each half the mean pairwise squared distance times the group size, and
/// between = total - within. No centroids are formed.
pub fn ch_oracle(x: &[Vec<f64>], labels: &[i32]) -> f64 {
    let n = x.len();
    let k = labels.iter().copied().max().unwrap() as usize + 1;
    let scatter = |idx: &[usize]| -> f64 {
        let mut s = 0.0;
        for &i in idx {
            for &j in idx {
                s += sq(&x[i], &x[j]);
            }
        }
        s / (2.0 * idx.len() as f64)
    };
    let all: Vec<usize> = (0..n).collect();
    let total = scatter(&all);
    let mut within = 0.0;
    for c in 0..k {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == c as i32).collect();
        if !idx.is_empty() {
            within += scatter(&idx);
        }
    }
    let between = total - within;
    (between / (k - 1) as f64) / (within / (n - k) as f64)
}

/// Silhouette straight from its definition, singletons scoring 0.
pub fn silhouette_oracle(x: &[Vec<f64>], labels: &[i32]) -> f64 {
    let n = x.len();
    let dist = |i: usize, j: usize| sq(&x[i], &x[j]).sqrt();
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n)
            .filter(|&j| j != i && labels[j] == labels[i])
            .collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(i, j)).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        let mut others: Vec<i32> = labels.iter().copied().filter(|&l| l != labels[i]).collect();
        others.sort_unstable();
        others.dedup();
        for l in others {
            let m: Vec<usize> = (0..n).filter(|&j| labels[j] == l).collect();
            b = b.min(m.iter().map(|&j| dist(i, j)).sum::<f64>() / m.len() as f64);
        }
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Distance from `x` to the nearest segment between two rows of `pool`.
pub fn segment_residual(x: &[f64], pool: &[&Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for a in pool {
        for b in pool {
            let d: Vec<f64> = b.iter().zip(a.iter()).map(|(b, a)| b - a).collect();
            let len2: f64 = d.iter().map(|v| v * v).sum();
            let t = if len2 == 0.0 {
                0.0
            } else {
                let dot: f64 = x
                    .iter()
                    .zip(a.iter())
                    .zip(&d)
                    .map(|((x, a), d)| (x - a) * d)
                    .sum();
                (dot / len2).clamp(0.0, 1.0)
            };
            let r: f64 = x
                .iter()
                .zip(a.iter())
                .zip(&d)
                .map(|((x, a), d)| (x - a - t * d).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.min(r);
        }
    }
    best
}

// ------------------------------------------------------------- datasets

/// Two regions far apart; inside each, benign and malware sit side by side
/// but in opposite order, so one global line cannot split them.
pub fn four_blobs(seed: u64) -> Dataset {
    synth_blobs(
        &BlobSpec {
            centers: vec![
                vec![15.0, 20.0],
                vec![25.0, 20.0],
                vec![115.0, 120.0],
                vec![125.0, 120.0],
            ],
            labels: vec![0, 1, 1, 0],
            per_center_count: 40,
            noise_sigma: 1.5,
        },
        seed,
    )
    .unwrap()
}

/// Two overlapping 6-dimensional classes.
pub fn clean_blobs(seed: u64) -> Dataset {
    synth_blobs(
        &BlobSpec {
            centers: vec![
                vec![20.0, 20.0, 10.0, 30.0, 5.0, 12.0],
                vec![24.0, 23.0, 12.0, 27.0, 7.0, 12.0],
            ],
            labels: vec![0, 1],
            per_center_count: 100,
            noise_sigma: 2.5,
        },
        seed,
    )
    .unwrap()
}

/// [`clean_blobs`] with a seeded 20% of labels flipped.
pub fn noisy_blobs(seed: u64) -> Dataset {
    let ds = clean_blobs(seed);
    let mut r = rng(seed ^ 0x5eed);
    let labels = ds
        .labels()
        .iter()
        .map(|&y| if r.random::<f64>() < 0.2 { 1 - y } else { y })
        .collect();
    ds.with_labels(labels).unwrap()
}

/// Random dataset with `n` rows of width `d`, values in [0, 100).
pub fn random_rows(r: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| r.random_range(0.0..100.0)).collect())
        .collect()
}

/// Dataset with a 256-wide feature vector per row.
pub fn wide_dataset(seed: u64, per_class: usize) -> Dataset {
    let mut benign = vec![0.0; 256];
    let mut malware = vec![0.0; 256];
    for (op, v) in [(0x6e, 400.0), (0x0c, 300.0), (0x12, 120.0), (0x0e, 90.0)] {
        benign[op] = v;
    }
    for (op, v) in [(0x6e, 380.0), (0x1a, 260.0), (0x12, 160.0), (0x0e, 60.0)] {
        malware[op] = v;
    }
    synth_blobs(
        &BlobSpec {
            centers: vec![benign, malware],
            labels: vec![0, 1],
            per_center_count: per_class,
            noise_sigma: 15.0,
        },
        seed,
    )
    .unwrap()
}
