use serde::{Deserialize, Serialize};

use super::{agglomerative, check_data, check_k, Assignment, ClusterError, Linkage};
use crate::matrix::{nearest, squared_distance};

/// Clustering feature: count, linear sum and sum of squared norms.
#[derive(Debug, Clone)]
struct Cf {
    n: f64,
    ls: Vec<f64>,
    ss: f64,
}

impl Cf {
    fn of_point(x: &[f64]) -> Self {
        Self {
            n: 1.0,
            ls: x.to_vec(),
            ss: x.iter().map(|v| v * v).sum(),
        }
    }

    fn add(&mut self, other: &Cf) {
        self.n += other.n;
        for (a, b) in self.ls.iter_mut().zip(&other.ls) {
            *a += b;
        }
        self.ss += other.ss;
    }

    fn centroid(&self) -> Vec<f64> {
        self.ls.iter().map(|v| v / self.n).collect()
    }

    /// Root-mean-square distance of members to the centroid.
    fn radius(&self) -> f64 {
        let c2: f64 = self.ls.iter().map(|v| (v / self.n) * (v / self.n)).sum();
        (self.ss / self.n - c2).max(0.0).sqrt()
    }

    fn merged_radius(&self, x: &[f64]) -> f64 {
        let mut m = self.clone();
        m.add(&Cf::of_point(x));
        m.radius()
    }
}

enum Node {
    Leaf(Vec<Cf>),
    Internal(Vec<(Cf, Box<Node>)>),
}

impl Node {
    fn summary(&self) -> Cf {
        let mut it: Box<dyn Iterator<Item = &Cf>> = match self {
            Node::Leaf(es) => Box::new(es.iter()),
            Node::Internal(es) => Box::new(es.iter().map(|(cf, _)| cf)),
        };
        let mut total = it.next().expect("nodes are never empty").clone();
        for cf in it {
            total.add(cf);
        }
        total
    }

    fn leaf_entries<'a>(&'a self, out: &mut Vec<&'a Cf>) {
        match self {
            Node::Leaf(es) => out.extend(es.iter()),
            Node::Internal(es) => es.iter().for_each(|(_, child)| child.leaf_entries(out)),
        }
    }
}

fn closest(cfs: impl Iterator<Item = Vec<f64>>, x: &[f64]) -> usize {
    let centroids: Vec<Vec<f64>> = cfs.collect();
    nearest(x, &centroids).0
}

/// Indices of the two entries whose centroids lie farthest apart.
fn farthest_pair(centroids: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 1, -1.0);
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            let d = squared_distance(&centroids[i], &centroids[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// Splits `items` around the farthest pair of centroids; returns the second half.
fn split<T>(items: &mut Vec<T>, centroid: impl Fn(&T) -> Vec<f64>) -> Vec<T> {
    let centroids: Vec<Vec<f64>> = items.iter().map(&centroid).collect();
    let (a, b) = farthest_pair(&centroids);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (i, item) in items.drain(..).enumerate() {
        let go_right = i == b
            || (i != a
                && squared_distance(&centroids[i], &centroids[b])
                    < squared_distance(&centroids[i], &centroids[a]));
        if go_right {
            right.push(item);
        } else {
            left.push(item);
        }
    }
    *items = left;
    right
}

/// Inserts `x`; returns a new sibling when this node had to split.
fn insert(node: &mut Node, x: &[f64], threshold: f64, branching: usize) -> Option<Node> {
    match node {
        Node::Leaf(entries) => {
            let idx = closest(entries.iter().map(Cf::centroid), x);
            if entries[idx].merged_radius(x) <= threshold {
                entries[idx].add(&Cf::of_point(x));
            } else {
                entries.push(Cf::of_point(x));
            }
            (entries.len() > branching).then(|| Node::Leaf(split(entries, Cf::centroid)))
        }
        Node::Internal(entries) => {
            let idx = closest(entries.iter().map(|(cf, _)| cf.centroid()), x);
            let (cf, child) = &mut entries[idx];
            match insert(child, x, threshold, branching) {
                None => cf.add(&Cf::of_point(x)),
                Some(sibling) => {
                    *cf = child.summary();
                    entries.push((sibling.summary(), Box::new(sibling)));
                }
            }
            (entries.len() > branching)
                .then(|| Node::Internal(split(entries, |(cf, _)| cf.centroid())))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum BirchThreshold {
    /// Maximum subcluster radius in feature units.
    Absolute(f64),
    /// Fraction of the largest distance from any point to the global centroid.
    RadiusFraction(f64),
}

impl Default for BirchThreshold {
    fn default() -> Self {
        BirchThreshold::RadiusFraction(0.05)
    }
}

#[derive(Debug, Clone)]
pub struct Birch {
    pub k: usize,
    pub threshold: BirchThreshold,
    pub branching: usize,
}

impl Birch {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            threshold: BirchThreshold::default(),
            branching: 50,
        }
    }

    pub fn threshold(mut self, threshold: BirchThreshold) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn branching(mut self, branching: usize) -> Self {
        self.branching = branching;
        self
    }

    fn absolute_threshold(&self, x: &[Vec<f64>]) -> f64 {
        match self.threshold {
            BirchThreshold::Absolute(t) => t,
            BirchThreshold::RadiusFraction(f) => {
                let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
                let center = crate::matrix::column_means(&refs, x[0].len());
                let radius = x
                    .iter()
                    .map(|p| squared_distance(p, &center))
                    .fold(0.0, f64::max)
                    .sqrt();
                f * radius
            }
        }
    }

    pub fn fit(&self, x: &[Vec<f64>]) -> Result<Assignment, ClusterError> {
        check_data(x)?;
        check_k(self.k, x.len())?;
        if self.branching < 2 {
            return Err(ClusterError::InvalidParameter(
                "branching must be >= 2".into(),
            ));
        }
        let threshold = self.absolute_threshold(x);
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(ClusterError::InvalidParameter(format!(
                "threshold {threshold} must be finite and >= 0"
            )));
        }

        let mut root = Node::Leaf(vec![Cf::of_point(&x[0])]);
        for p in &x[1..] {
            if let Some(sibling) = insert(&mut root, p, threshold, self.branching) {
                let old = std::mem::replace(&mut root, Node::Leaf(Vec::new()));
                root = Node::Internal(vec![
                    (old.summary(), Box::new(old)),
                    (sibling.summary(), Box::new(sibling)),
                ]);
            }
        }

        let mut leaves = Vec::new();
        root.leaf_entries(&mut leaves);
        if self.k > leaves.len() {
            return Err(ClusterError::TooFewLeafEntries {
                k: self.k,
                entries: leaves.len(),
            });
        }
        let centers: Vec<Vec<f64>> = leaves.iter().map(|cf| cf.centroid()).collect();
        let global = agglomerative(&centers, self.k, Linkage::Ward)?;

        let mut merged: Vec<Option<Cf>> = vec![None; self.k];
        for (cf, &label) in leaves.iter().zip(global.labels()) {
            match &mut merged[label as usize] {
                Some(acc) => acc.add(cf),
                slot => *slot = Some((*cf).clone()),
            }
        }
        let finals: Vec<Vec<f64>> = merged
            .into_iter()
            .map(|cf| cf.expect("every global cluster has an entry").centroid())
            .collect();

        // points go to their nearest final centroid; compact away any that end up empty
        let raw: Vec<usize> = x.iter().map(|p| nearest(p, &finals).0).collect();
        let mut remap = vec![-1i32; self.k];
        let mut next = 0;
        let labels = raw
            .into_iter()
            .map(|l| {
                if remap[l] < 0 {
                    remap[l] = next;
                    next += 1;
                }
                remap[l]
            })
            .collect();
        Ok(Assignment::from_parts(labels, next as usize))
    }
}

pub fn birch(x: &[Vec<f64>], k: usize, threshold: f64) -> Result<Assignment, ClusterError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(ClusterError::InvalidParameter(
            "threshold must be > 0".into(),
        ));
    }
    Birch::new(k)
        .threshold(BirchThreshold::Absolute(threshold))
        .fit(x)
}
