//! Glyph feature recommendation: picks a small set of features and a
//! partition tree over a charset so that no leaf holds too many labels.

pub mod fixtures;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::glyphfeat::{FeatureId, FeatureKind, FeatureVector};
use crate::{Error, Result};

pub use text::TREE_HEADER;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GfrsConfig {
    pub max_group_size: usize,
    pub bins_per_range_feature: u32,
    /// Share of a label's prototypes that must agree on a bucket for the
    /// feature to be usable. 1.0 demands unanimity.
    pub stability_margin: f64,
    /// Count features are capped at this bucket.
    pub count_cap: u32,
    /// Features the recommender may consider; empty means all 32.
    pub candidate_features: Vec<FeatureId>,
}

impl Default for GfrsConfig {
    fn default() -> Self {
        Self {
            max_group_size: 6,
            bins_per_range_feature: 4,
            stability_margin: 1.0,
            count_cap: 4,
            candidate_features: Vec::new(),
        }
    }
}

impl GfrsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_group_size == 0 {
            return Err(Error::Config("max_group_size must be at least 1".into()));
        }
        if self.bins_per_range_feature == 0 {
            return Err(Error::Config("bins_per_range_feature must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.stability_margin) || self.stability_margin == 0.0 {
            return Err(Error::Config("stability_margin must lie in (0, 1]".into()));
        }
        Ok(())
    }

    fn candidates(&self) -> Vec<FeatureId> {
        if self.candidate_features.is_empty() {
            FeatureId::all().collect()
        } else {
            let set: BTreeSet<FeatureId> = self.candidate_features.iter().copied().collect();
            set.into_iter().collect()
        }
    }
}

/// Maps a feature value onto its discrete bucket.
pub fn quantize_feature(id: FeatureId, value: f64, cfg: &GfrsConfig) -> Result<u32> {
    let bad = || Error::OutOfRange {
        what: id.to_string(),
        value,
    };
    match id.kind() {
        FeatureKind::Boolean => match value {
            0.0 => Ok(0),
            1.0 => Ok(1),
            _ => Err(bad()),
        },
        FeatureKind::Count => {
            if !(value >= 0.0) {
                return Err(bad());
            }
            Ok((value as u32).min(cfg.count_cap))
        }
        FeatureKind::Range => {
            if !(0.0..=100.0).contains(&value) {
                return Err(bad());
            }
            let bins = cfg.bins_per_range_feature;
            Ok(((value / 100.0 * bins as f64) as u32).min(bins - 1))
        }
    }
}

/// The modal bucket of `id` over `prototypes`, if it is shared widely enough.
fn stable_bucket(id: FeatureId, prototypes: &[FeatureVector], cfg: &GfrsConfig) -> Result<Option<u32>> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for p in prototypes {
        *counts.entry(quantize_feature(id, p.get(id), cfg)?).or_default() += 1;
    }
    let Some((&bucket, &n)) = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) else {
        return Ok(None);
    };
    Ok((n as f64 >= cfg.stability_margin * prototypes.len() as f64).then_some(bucket))
}

/// True when the label's prototypes agree on the feature's bucket.
pub fn feature_stability(id: FeatureId, prototypes: &[FeatureVector], cfg: &GfrsConfig) -> Result<bool> {
    Ok(stable_bucket(id, prototypes, cfg)?.is_some())
}

/// A charset: each label with one or more prototype feature vectors.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CharsetPrototypes {
    pub entries: Vec<(String, Vec<FeatureVector>)>,
}

impl CharsetPrototypes {
    pub fn new(entries: Vec<(String, Vec<FeatureVector>)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (label, protos) in &entries {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::Format(format!("label {label:?} must be non-empty without whitespace")));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::Config(format!("duplicate label {label:?}")));
            }
            if protos.is_empty() {
                return Err(Error::InsufficientData(format!("label {label:?} has no prototype")));
            }
        }
        Ok(Self { entries })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Split {
        feature: FeatureId,
        /// Children keyed by bucket, ascending.
        children: Vec<(u32, TreeNode)>,
    },
    Leaf {
        labels: Vec<String>,
    },
}

/// Result of [`assign_group`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupAssignment {
    pub leaf: usize,
    /// Set when some bucket on the path was absent from the tree and the
    /// nearest one was taken instead.
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTree {
    pub root: TreeNode,
    pub recommended_features: Vec<FeatureId>,
    pub max_group_size: usize,
    pub bins_per_range_feature: u32,
    pub count_cap: u32,
}

impl FeatureTree {
    /// Leaves in depth-first order; leaf ids index this list.
    pub fn leaves(&self) -> Vec<&[String]> {
        fn walk<'a>(n: &'a TreeNode, out: &mut Vec<&'a [String]>) {
            match n {
                TreeNode::Leaf { labels } => out.push(labels),
                TreeNode::Split { children, .. } => children.iter().for_each(|(_, c)| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn leaf_of_label(&self, label: &str) -> Option<usize> {
        self.leaves().iter().position(|l| l.iter().any(|x| x == label))
    }

    pub fn max_leaf_size(&self) -> usize {
        self.leaves().iter().map(|l| l.len()).max().unwrap_or(0)
    }

    /// Leaves larger than the bound the tree was built for.
    pub fn oversized_leaves(&self) -> Vec<usize> {
        self.leaves()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.len() > self.max_group_size)
            .map(|(i, _)| i)
            .collect()
    }

    fn quantizer(&self) -> GfrsConfig {
        GfrsConfig {
            max_group_size: self.max_group_size,
            bins_per_range_feature: self.bins_per_range_feature,
            count_cap: self.count_cap,
            ..GfrsConfig::default()
        }
    }
}

/// Walks the tree with `v`. Out-of-range values are clamped before
/// quantization so that any vector lands somewhere.
pub fn assign_group(tree: &FeatureTree, v: &FeatureVector) -> GroupAssignment {
    let q = tree.quantizer();
    let mut node = &tree.root;
    let mut leaf_base = 0;
    let mut approximate = false;
    loop {
        match node {
            TreeNode::Leaf { .. } => {
                return GroupAssignment {
                    leaf: leaf_base,
                    approximate,
                }
            }
            TreeNode::Split { feature, children } => {
                let value = match feature.kind() {
                    FeatureKind::Boolean => (v.get(*feature) >= 0.5) as u8 as f64,
                    FeatureKind::Count => v.get(*feature).max(0.0).floor(),
                    FeatureKind::Range => v.get(*feature).clamp(0.0, 100.0),
                };
                let b = quantize_feature(*feature, value, &q).expect("value clamped into range");
                let pick = children
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, (cb, _))| (cb.abs_diff(b), *cb))
                    .map(|(i, _)| i)
                    .expect("split nodes have children");
                approximate |= children[pick].0 != b;
                leaf_base += children[..pick].iter().map(|(_, c)| leaf_count(c)).sum::<usize>();
                node = &children[pick].1;
            }
        }
    }
}

fn leaf_count(n: &TreeNode) -> usize {
    match n {
        TreeNode::Leaf { .. } => 1,
        TreeNode::Split { children, .. } => children.iter().map(|(_, c)| leaf_count(c)).sum(),
    }
}

/// Per-label stable bucket of every feature (None when unstable).
struct BucketTable {
    labels: Vec<String>,
    buckets: Vec<[Option<u32>; 32]>,
}

impl BucketTable {
    fn new(charset: &CharsetPrototypes, cfg: &GfrsConfig) -> Result<Self> {
        let mut buckets = Vec::with_capacity(charset.len());
        for (_, protos) in &charset.entries {
            let mut row = [None; 32];
            for id in FeatureId::all() {
                row[id.index()] = stable_bucket(id, protos, cfg)?;
            }
            buckets.push(row);
        }
        Ok(Self {
            labels: charset.labels().map(str::to_string).collect(),
            buckets,
        })
    }

    /// Children of `members` under `id`, or None if `id` is unstable for
    /// some member or fails to separate them.
    fn split(&self, members: &[usize], id: FeatureId) -> Option<BTreeMap<u32, Vec<usize>>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &m in members {
            out.entry(self.buckets[m][id.index()]?).or_default().push(m);
        }
        (out.len() > 1).then_some(out)
    }

    fn grow(&self, members: Vec<usize>, allowed: &[FeatureId], bound: usize) -> TreeNode {
        if members.len() <= bound {
            return self.leaf(members);
        }
        let best = allowed
            .iter()
            .filter_map(|&id| {
                let parts = self.split(&members, id)?;
                let largest = parts.values().map(Vec::len).max().unwrap_or(0);
                let spread: usize = parts.values().map(|p| p.len() * p.len()).sum();
                Some(((largest, spread, id), parts))
            })
            .min_by_key(|(key, _)| *key);
        match best {
            None => self.leaf(members),
            Some(((_, _, feature), parts)) => TreeNode::Split {
                feature,
                children: parts
                    .into_iter()
                    .map(|(b, m)| (b, self.grow(m, allowed, bound)))
                    .collect(),
            },
        }
    }

    fn leaf(&self, members: Vec<usize>) -> TreeNode {
        TreeNode::Leaf {
            labels: members.into_iter().map(|m| self.labels[m].clone()).collect(),
        }
    }
}

fn used_features(n: &TreeNode, out: &mut BTreeSet<FeatureId>) {
    if let TreeNode::Split { feature, children } = n {
        out.insert(*feature);
        children.iter().for_each(|(_, c)| used_features(c, out));
    }
}

fn max_leaf(n: &TreeNode) -> usize {
    match n {
        TreeNode::Leaf { labels } => labels.len(),
        TreeNode::Split { children, .. } => children.iter().map(|(_, c)| max_leaf(c)).max().unwrap_or(0),
    }
}

/// Builds the feature tree.
///
/// Splits are chosen greedily (smallest largest child, then most balanced,
/// then lowest feature id). The features used are then pruned: a feature is
/// dropped whenever the tree regrown without it still meets the same bound.
pub fn recommend(charset: &CharsetPrototypes, cfg: &GfrsConfig) -> Result<FeatureTree> {
    cfg.validate()?;
    if charset.is_empty() {
        return Err(Error::InsufficientData("empty charset".into()));
    }
    let table = BucketTable::new(charset, cfg)?;
    let all: Vec<usize> = (0..charset.len()).collect();
    let bound = cfg.max_group_size;

    let mut root = table.grow(all.clone(), &cfg.candidates(), bound);
    // The achievable bound, if the requested one cannot be met.
    let target = max_leaf(&root).max(bound);
    let mut used = BTreeSet::new();
    used_features(&root, &mut used);

    'prune: loop {
        for &drop in used.iter().rev() {
            let allowed: Vec<FeatureId> = used.iter().copied().filter(|&f| f != drop).collect();
            let trial = table.grow(all.clone(), &allowed, bound);
            if max_leaf(&trial) <= target {
                root = trial;
                used.clear();
                used_features(&root, &mut used);
                continue 'prune;
            }
        }
        break;
    }

    let tree = FeatureTree {
        root,
        recommended_features: used.into_iter().collect(),
        max_group_size: bound,
        bins_per_range_feature: cfg.bins_per_range_feature,
        count_cap: cfg.count_cap,
    };
    for leaf in tree.oversized_leaves() {
        log::warn!(
            "group {leaf} holds {} labels (bound {bound}); no stable feature separates {:?}",
            tree.leaves()[leaf].len(),
            tree.leaves()[leaf]
        );
    }
    Ok(tree)
}
