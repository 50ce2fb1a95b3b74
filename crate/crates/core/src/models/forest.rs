//! Random forest of Gini-split CART trees grown on bootstrap samples.
//!
//! Each tree draws `floor(sqrt(n_features))` candidate features without
//! replacement at every node and takes the midpoint threshold that minimizes
//! the weighted child impurity. Trees are stored as flat node arenas with the
//! root at index 0.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dimension, ModelError};
use crate::preprocess::Dataset;

/// `1 - sum_c (n_c / n)^2`.
pub fn gini_impurity(class_counts: &[usize]) -> Result<f64, ModelError> {
    let n: usize = class_counts.iter().sum();
    if n == 0 {
        return Err(ModelError::EmptyNode);
    }
    let n = n as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class_counts: Vec<usize>,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

/// Majority class of a leaf; ties go to the lower index.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

impl DecisionTree {
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self, String> {
        if nodes.is_empty() {
            return Err("a tree needs at least one node".into());
        }
        for (i, node) in nodes.iter().enumerate() {
            match node {
                TreeNode::Split { left, right, .. } => {
                    // children always come after their parent
                    if *left <= i || *right <= i || *left >= nodes.len() || *right >= nodes.len() {
                        return Err(format!("node {i} has invalid child links"));
                    }
                }
                TreeNode::Leaf { class_counts } => {
                    if class_counts.iter().sum::<usize>() == 0 {
                        return Err(format!("leaf {i} has no samples"));
                    }
                }
            }
        }
        Ok(DecisionTree { nodes })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Class counts of the leaf reached by `x`.
    pub fn leaf_counts(&self, x: &[f64]) -> &[usize] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { class_counts } => return class_counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        majority(self.leaf_counts(x))
    }

    /// Edges on the longest root-to-leaf path (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

struct TreeBuilder<'a, R> {
    data: &'a Dataset,
    n_classes: usize,
    max_depth: usize,
    feature_subsample: usize,
    rng: &'a mut R,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    // n_rows times the weighted child impurity
    score: f64,
    feature: usize,
    threshold: f64,
}

impl<R: Rng> TreeBuilder<'_, R> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.data.labels()[r]] += 1;
        }
        counts
    }

    fn best_split(&mut self, rows: &[usize], parent: &[usize]) -> Option<BestSplit> {
        let n_features = self.data.n_features();
        let candidates = index::sample(self.rng, n_features, self.feature_subsample.min(n_features));
        let features = self.data.features();
        let labels = self.data.labels();
        let n = rows.len();
        let parent_sq: u64 = parent.iter().map(|&c| (c * c) as u64).sum();

        let mut best: Option<BestSplit> = None;
        let mut sorted = rows.to_vec();
        for feature in candidates.iter() {
            sorted.sort_by(|&a, &b| features[[a, feature]].total_cmp(&features[[b, feature]]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = parent.to_vec();
            let (mut left_sq, mut right_sq) = (0u64, parent_sq);
            for i in 0..n - 1 {
                let c = labels[sorted[i]];
                left_sq += (2 * left[c] + 1) as u64;
                right_sq -= (2 * right[c] - 1) as u64;
                left[c] += 1;
                right[c] -= 1;

                let lo = features[[sorted[i], feature]];
                let hi = features[[sorted[i + 1], feature]];
                if lo >= hi {
                    continue;
                }
                let (nl, nr) = ((i + 1) as f64, (n - i - 1) as f64);
                let score = (nl - left_sq as f64 / nl) + (nr - right_sq as f64 / nr);
                if best.as_ref().is_none_or(|b| score < b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        score,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class_counts: counts.clone(),
        });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.max_depth || pure || rows.len() < 2 {
            return id;
        }
        let n = rows.len() as f64;
        let parent_score = n - counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n;
        let Some(split) = self.best_split(&rows, &counts) else {
            return id;
        };
        if split.score >= parent_score - 1e-12 {
            return id;
        }

        let features = self.data.features();
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| features[[r, split.feature]] <= split.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Greedy CART growth on the given rows (duplicates allowed).
///
/// Stops at `max_depth`, at pure nodes, and where no candidate split lowers
/// the impurity.
pub fn tree_fit<R: Rng>(
    data: &Dataset,
    rows: &[usize],
    max_depth: usize,
    feature_subsample: usize,
    rng: &mut R,
) -> DecisionTree {
    assert!(!rows.is_empty(), "a tree needs at least one row");
    let mut builder = TreeBuilder {
        data,
        n_classes: data.n_classes(),
        max_depth,
        feature_subsample: feature_subsample.max(1),
        rng,
        nodes: Vec::new(),
    };
    builder.grow(rows.to_vec(), 0);
    DecisionTree { nodes: builder.nodes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    #[default]
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub criterion: SplitCriterion,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 1000,
            max_depth: 10,
            criterion: SplitCriterion::Gini,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    params: ForestParams,
    trees: Vec<DecisionTree>,
    n_features: usize,
    n_classes: usize,
}

/// Features tried at each node: `floor(sqrt(n_features))`, at least one.
pub fn default_feature_subsample(n_features: usize) -> usize {
    ((n_features as f64).sqrt().floor() as usize).max(1)
}

/// Fits `n_estimators` bootstrap trees. Tree `t` draws from an RNG seeded with
/// `seed + t`, so the result does not depend on thread scheduling.
pub fn forest_fit(train: &Dataset, params: &ForestParams) -> Result<ForestModel, ModelError> {
    if train.n_samples() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if params.n_estimators == 0 || params.max_depth == 0 {
        return Err(ModelError::InvalidHyperparameter(
            "n_estimators and max_depth must be at least 1".into(),
        ));
    }
    let n = train.n_samples();
    let subsample = default_feature_subsample(train.n_features());
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(t as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            tree_fit(train, &rows, params.max_depth, subsample, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        params: *params,
        trees,
        n_features: train.n_features(),
        n_classes: train.n_classes(),
    })
}

impl ForestModel {
    pub fn from_trees(
        params: ForestParams,
        trees: Vec<DecisionTree>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self, String> {
        if trees.is_empty() {
            return Err("a forest needs at least one tree".into());
        }
        for tree in &trees {
            for node in tree.nodes() {
                match node {
                    TreeNode::Split { feature, .. } if *feature >= n_features => {
                        return Err(format!("split on feature {feature} of {n_features}"));
                    }
                    TreeNode::Leaf { class_counts } if class_counts.len() != n_classes => {
                        return Err("leaf class count length differs from the class count".into());
                    }
                    _ => {}
                }
            }
        }
        Ok(ForestModel {
            params,
            trees,
            n_features,
            n_classes,
        })
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Modal tree vote and the full vote distribution.
    pub fn predict(&self, query: &[f64]) -> Result<(usize, Vec<usize>), ModelError> {
        check_dimension(self.n_features, query.len())?;
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(query)] += 1;
        }
        Ok((majority(&votes), votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn data(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Dataset {
        let names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        let classes = (0..n_classes).map(|c| format!("c{c}")).collect();
        Dataset::new(features, labels, classes, names).unwrap()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity(&[10, 0]).unwrap(), 0.0);
        assert_eq!(gini_impurity(&[5, 5]).unwrap(), 0.5);
        assert!((gini_impurity(&[1, 1, 1, 1, 1]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(gini_impurity(&[0, 0]), Err(ModelError::EmptyNode)));
    }

    #[test]
    fn pure_rows_make_a_leaf() {
        let d = data(array![[1.0], [2.0], [3.0]], vec![1, 1, 1], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = tree_fit(&d, &[0, 1, 2], 10, 1, &mut rng);
        assert_eq!(tree.nodes(), &[TreeNode::Leaf { class_counts: vec![0, 3] }]);
        assert_eq!(tree.depth(), 0);
    }

    #[test]
    fn one_dimensional_threshold() {
        let d = data(array![[-3.0], [-1.0], [-2.0], [2.0], [4.0]], vec![0, 0, 0, 1, 1], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = tree_fit(&d, &[0, 1, 2, 3, 4], 10, 1, &mut rng);
        assert_eq!(
            tree.nodes(),
            &[
                TreeNode::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2
                },
                TreeNode::Leaf { class_counts: vec![3, 0] },
                TreeNode::Leaf { class_counts: vec![0, 2] },
            ]
        );
    }

    #[test]
    fn unsplittable_rows_stay_a_leaf() {
        // identical feature values, mixed labels
        let d = data(array![[1.0], [1.0]], vec![0, 1], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = tree_fit(&d, &[0, 1], 10, 1, &mut rng);
        assert_eq!(tree.n_leaves(), 1);
        assert_eq!(tree.predict(&[1.0]), 0);
    }

    #[test]
    fn depth_limit_holds() {
        let n = 200;
        let features = Array2::from_shape_fn((n, 3), |(i, j)| ((i * 37 + j * 11) % 101) as f64);
        let labels = (0..n).map(|i| (i * 7) % 4).collect();
        let d = data(features, labels, 4);
        let rows: Vec<usize> = (0..n).collect();
        for max_depth in [1, 2, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let tree = tree_fit(&d, &rows, max_depth, 3, &mut rng);
            assert!(tree.depth() <= max_depth);
        }
    }

    #[test]
    fn forest_votes_and_ties() {
        let leaf = |c: Vec<usize>| DecisionTree::from_nodes(vec![TreeNode::Leaf { class_counts: c }]).unwrap();
        let forest = ForestModel::from_trees(
            ForestParams::default(),
            vec![leaf(vec![3, 1]), leaf(vec![2, 0]), leaf(vec![0, 5])],
            1,
            2,
        )
        .unwrap();
        assert_eq!(forest.predict(&[0.0]).unwrap(), (0, vec![2, 1]));

        let tied = ForestModel::from_trees(ForestParams::default(), vec![leaf(vec![0, 1]), leaf(vec![1, 0])], 1, 2).unwrap();
        assert_eq!(tied.predict(&[0.0]).unwrap().0, 0);
        // leaf tie goes to the lower class
        assert_eq!(leaf(vec![2, 2]).predict(&[0.0]), 0);
    }

    #[test]
    fn arena_validation() {
        assert!(DecisionTree::from_nodes(vec![]).is_err());
        assert!(DecisionTree::from_nodes(vec![TreeNode::Split {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 0
        }])
        .is_err());
    }
}
