mod common;

use common::{ch_oracle, rel_close, rng, silhouette_oracle};
use droidlens::clustering::{
    agglomerative, calinski_harabasz, dbscan, silhouette, Assignment, Gmm, KMeans, Linkage, NOISE,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn rows(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_d).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec(-50.0..50.0f64, d), 3..=max_n)
    })
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Textbook agglomeration recomputing every cluster distance from the
/// member points on each step.
fn naive_agglomerative(x: &[Vec<f64>], k: usize, linkage: Linkage) -> Vec<i32> {
    let mut clusters: Vec<Vec<usize>> = (0..x.len()).map(|i| vec![i]).collect();
    let centroid = |c: &[usize]| {
        let mut m = vec![0.0; x[0].len()];
        for &i in c {
            for (a, v) in m.iter_mut().zip(&x[i]) {
                *a += v / c.len() as f64;
            }
        }
        m
    };
    let distance = |a: &[usize], b: &[usize]| match linkage {
        Linkage::Complete => a
            .iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| sq(&x[i], &x[j]).sqrt())
            .fold(0.0, f64::max),
        Linkage::Average => {
            a.iter()
                .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                .map(|(i, j)| sq(&x[i], &x[j]).sqrt())
                .sum::<f64>()
                / (a.len() * b.len()) as f64
        }
        Linkage::Ward => {
            let (na, nb) = (a.len() as f64, b.len() as f64);
            na * nb / (na + nb) * sq(&centroid(a), &centroid(b))
        }
    };
    while clusters.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let d = distance(&clusters[i], &clusters[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let merged = clusters.remove(best.2);
        clusters[best.1].extend(merged);
    }
    let mut labels = vec![0; x.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c as i32;
        }
    }
    Assignment::new(labels).unwrap().canonical()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn validity_indices_match_reference(x in rows(40, 6), seed in any::<u64>()) {
        let n = x.len();
        let k = 2 + (seed % (n as u64 - 2).min(4)) as usize;
        let mut labels: Vec<i32> = (0..n).map(|i| (i % k) as i32).collect();
        labels.shuffle(&mut rng(seed));
        let a = Assignment::new(labels.clone()).unwrap();
        let ch = calinski_harabasz(&x, &a).unwrap();
        let s = silhouette(&x, &a).unwrap().score;
        prop_assert!(rel_close(ch, ch_oracle(&x, &labels), 1e-9), "CH {} vs {}", ch, ch_oracle(&x, &labels));
        prop_assert!(rel_close(s, silhouette_oracle(&x, &labels), 1e-9));
        prop_assert!((-1.0..=1.0).contains(&s));
    }

    #[test]
    fn agglomerative_matches_naive_merging(x in rows(18, 3), k in 1usize..5) {
        let k = k.min(x.len());
        for linkage in [Linkage::Ward, Linkage::Complete, Linkage::Average] {
            let got = agglomerative(&x, k, linkage).unwrap().canonical();
            prop_assert_eq!(got, naive_agglomerative(&x, k, linkage), "{:?}", linkage);
        }
    }

    #[test]
    fn dbscan_is_permutation_invariant(x in rows(40, 2), eps in 1.0..30.0f64, min_pts in 1usize..5, seed in any::<u64>()) {
        let base = dbscan(&x, eps, min_pts).unwrap();
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.shuffle(&mut rng(seed));
        let permuted: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
        let other = dbscan(&permuted, eps, min_pts).unwrap();
        // noise set and the core-reachability partition survive reordering;
        // compare co-membership since label numbers follow visiting order
        for (pi, &i) in order.iter().enumerate() {
            prop_assert_eq!(base.labels()[i] == NOISE, other.labels()[pi] == NOISE);
        }
        prop_assert_eq!(base.k(), other.k());
    }

    #[test]
    fn kmeans_sse_never_rises(x in rows(60, 5), k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(x.len());
        let (model, a) = KMeans::new(k, seed).fit(&x).unwrap();
        for w in model.sse_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        prop_assert_eq!(a.k(), k);
        prop_assert!(model.sse <= *model.sse_history.first().unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn gmm_log_likelihood_never_falls(x in rows(50, 3), k in 1usize..4, seed in any::<u64>()) {
        let k = k.min(x.len());
        let (model, a) = Gmm::new(k, seed).fit(&x).unwrap();
        for w in model.ll_history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
        let weight_sum: f64 = model.weights.iter().sum();
        prop_assert!((weight_sum - 1.0).abs() < 1e-9);
        prop_assert_eq!(a.len(), x.len());
    }
}

#[test]
fn dbscan_border_points_follow_core_points() {
    // dense run 0..=4 with a border point at 5.9 reachable only from 5.0
    let x: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 5.9, 40.0]
        .iter()
        .map(|&v| vec![v])
        .collect();
    let a = dbscan(&x, 1.0, 3).unwrap();
    assert_eq!(a.k(), 1);
    assert!(a.labels()[..7].iter().all(|&l| l == 0));
    assert_eq!(a.labels()[7], NOISE);
}

#[test]
fn kmeans_is_reproducible() {
    let mut r = rng(11);
    let x = common::random_rows(&mut r, 80, 4);
    let (m1, a1) = KMeans::new(3, 5).fit(&x).unwrap();
    let (m2, a2) = KMeans::new(3, 5).fit(&x).unwrap();
    assert_eq!(a1, a2);
    assert_eq!(m1.centroids, m2.centroids);
}
