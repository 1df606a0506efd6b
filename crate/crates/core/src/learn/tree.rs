use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: u8,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART tree; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            match &self.nodes[at] {
                TreeNode::Leaf { .. } => best = best.max(d),
                TreeNode::Split { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub min_samples_split: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    /// Features examined per split; `None` means all, in index order.
    pub max_features: Option<usize>,
}

/// Weighted child impurity as an exact fraction: for binary labels the Gini
/// sum `n_l G_l + n_r G_r` equals `2 (l0 l1 / n_l + r0 r1 / n_r)`.
#[derive(Debug, Clone, Copy)]
struct Impurity {
    num: u128,
    den: u128,
}

impl Impurity {
    fn of(l: [u64; 2], r: [u64; 2]) -> Self {
        let (nl, nr) = (u128::from(l[0] + l[1]), u128::from(r[0] + r[1]));
        let (pl, pr) = (
            u128::from(l[0]) * u128::from(l[1]),
            u128::from(r[0]) * u128::from(r[1]),
        );
        Self {
            num: pl * nr + pr * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: Impurity,
}

fn majority(counts: [u64; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

/// Best threshold on one feature, lowest threshold among exact ties.
fn best_on_feature(
    x: &[Vec<f64>],
    y: &[u8],
    idx: &[usize],
    f: usize,
    total: [u64; 2],
) -> Option<Candidate> {
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
    let mut left = [0u64; 2];
    let mut best: Option<Candidate> = None;
    for w in 0..order.len() - 1 {
        left[usize::from(y[order[w]])] += 1;
        let (lo, hi) = (x[order[w]][f], x[order[w + 1]][f]);
        if lo == hi {
            continue;
        }
        let mut threshold = lo / 2.0 + hi / 2.0;
        if threshold >= hi || threshold < lo {
            threshold = lo;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let impurity = Impurity::of(left, right);
        if best
            .as_ref()
            .is_none_or(|b| impurity.cmp(&b.impurity) == Ordering::Less)
        {
            best = Some(Candidate {
                feature: f,
                threshold,
                impurity,
            });
        }
    }
    best
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.impurity.cmp(&b.impurity) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => (a.feature, a.threshold) < (b.feature, b.threshold),
    }
}

fn find_split(
    x: &[Vec<f64>],
    y: &[u8],
    idx: &[usize],
    total: [u64; 2],
    params: &TreeParams,
    rng: &mut Option<&mut Rng>,
) -> Option<Candidate> {
    let d = x[0].len();
    let pick_best = |features: &[usize]| {
        let mut best: Option<Candidate> = None;
        for &f in features {
            if let Some(c) = best_on_feature(x, y, idx, f, total) {
                if best.as_ref().is_none_or(|b| better(&c, b)) {
                    best = Some(c);
                }
            }
        }
        best
    };
    match (params.max_features, rng.as_deref_mut()) {
        (Some(m), Some(rng)) if m < d => {
            use rand::seq::SliceRandom;
            let mut features: Vec<usize> = (0..d).collect();
            features.shuffle(rng);
            let mut sample: Vec<usize> = features[..m].to_vec();
            sample.sort_unstable();
            if let Some(c) = pick_best(&sample) {
                return Some(c);
            }
            // keep drawing until some feature admits a split
            features[m..]
                .iter()
                .find_map(|&f| best_on_feature(x, y, idx, f, total))
        }
        _ => {
            let all: Vec<usize> = (0..d).collect();
            pick_best(&all)
        }
    }
}

/// Grows a tree over rows `idx` (duplicates allowed, as in a bootstrap).
pub(crate) fn grow_tree(
    x: &[Vec<f64>],
    y: &[u8],
    idx: Vec<usize>,
    params: &TreeParams,
    mut rng: Option<&mut Rng>,
) -> Tree {
    let mut nodes = vec![TreeNode::Leaf { label: 0 }];
    let mut work = vec![(0usize, idx, 0usize)];
    while let Some((slot, idx, depth)) = work.pop() {
        let mut total = [0u64; 2];
        for &i in &idx {
            total[usize::from(y[i])] += 1;
        }
        let pure = total[0] == 0 || total[1] == 0;
        let capped = params.max_depth.is_some_and(|m| depth >= m);
        let split = if pure || capped || idx.len() < params.min_samples_split.max(2) {
            None
        } else {
            find_split(x, y, &idx, total, params, &mut rng)
        };
        let Some(split) = split else {
            nodes[slot] = TreeNode::Leaf {
                label: majority(total),
            };
            continue;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| x[i][split.feature] <= split.threshold);
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { label: 0 });
        let right = nodes.len();
        nodes.push(TreeNode::Leaf { label: 0 });
        nodes[slot] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        work.push((right, right_idx, depth + 1));
        work.push((left, left_idx, depth + 1));
    }
    Tree { nodes }
}
