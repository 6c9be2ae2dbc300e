//! Unsupervised labelling: k-means per zone (and per feature-tree group),
//! cluster-to-label mapping, and clustering accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gfrs::{assign_group, FeatureTree};
use crate::glyphfeat::FeatureVector;
use crate::raster::BinaryImage;
use crate::segmentation::Zone;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpace {
    /// The 32 glyph features, z-scored per zone.
    FeatureVector,
    /// Symbol bitmaps on the fixed 32x32 canvas, used as-is.
    #[default]
    RawPixels,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    /// Cluster count for a direct [`kmeans`] call; 0 lets the caller derive
    /// it from the expected label count of each partition.
    pub k: usize,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub space: ClusterSpace,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            k: 0,
            max_iterations: 300,
            restarts: 8,
            seed: 0,
            space: ClusterSpace::default(),
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iterations and restarts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// k-means++ seeding.
pub fn kmeans_pp_init(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = d2.iter().rposition(|&d| d > 0.0).expect("total > 0");
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            // Fewer distinct points than clusters: fall back to unused indices.
            (0..points.len()).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Lloyd iterations from the given centroids. Returns the model and the
/// inertia after every assignment step.
pub fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iterations: usize) -> (ClusterModel, Vec<f64>) {
    let k = centroids.len();
    let dim = points.first().map_or(0, Vec::len);
    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, Vec<f64>) {
        points.iter().map(|p| nearest(p, centroids)).unzip()
    };
    let (mut assignments, mut dists) = assign(&centroids);
    let mut history = vec![dists.iter().sum::<f64>()];
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut taken = BTreeSet::new();
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Re-seed an empty cluster at the point worst served so far.
                let far = (0..points.len())
                    .filter(|i| !taken.contains(i))
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken.insert(far);
                centroids[c] = points[far].clone();
                dists[far] = 0.0;
            }
        }
        let (next, next_d) = assign(&centroids);
        history.push(next_d.iter().sum());
        let changed = next != assignments;
        assignments = next;
        dists = next_d;
        if !changed {
            break;
        }
    }

    let inertia = dists.iter().sum();
    (
        ClusterModel {
            centroids,
            assignments,
            inertia,
            iterations,
        },
        history,
    )
}

/// Best of `cfg.restarts` seeded k-means++/Lloyd runs.
pub fn kmeans(points: &[Vec<f64>], k: usize, cfg: &ClusteringConfig) -> Result<ClusterModel> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} points cannot form {k} clusters",
            points.len()
        )));
    }
    let runs: Vec<ClusterModel> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let init = kmeans_pp_init(points, k, &mut rng);
            lloyd(points, init, cfg.max_iterations).0
        })
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|best, m| if m.inertia < best.inertia { m } else { best })
        .expect("at least one restart"))
}

/// Z-scores every dimension; dimensions with (near) zero spread are dropped.
pub fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(dim) = points.first().map(Vec::len) else {
        return Vec::new();
    };
    let n = points.len() as f64;
    let mut keep = Vec::new();
    for d in 0..dim {
        let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std > 1e-9 {
            keep.push((d, mean, std));
        }
    }
    points
        .iter()
        .map(|p| keep.iter().map(|&(d, m, s)| (p[d] - m) / s).collect())
        .collect()
}

pub fn feature_points(features: &[FeatureVector]) -> Vec<Vec<f64>> {
    features.iter().map(|v| v.as_slice().to_vec()).collect()
}

/// Each bitmap centred on the recognizer's 32x32 input canvas.
pub fn pixel_points(images: &[BinaryImage]) -> Vec<Vec<f64>> {
    images
        .iter()
        .map(|img| crate::supcon::to_canvas(img).into_iter().map(f64::from).collect())
        .collect()
}

/// Points in the configured space.
pub fn clustering_points(space: ClusterSpace, images: &[BinaryImage], features: &[FeatureVector]) -> Vec<Vec<f64>> {
    match space {
        ClusterSpace::FeatureVector => feature_points(features),
        ClusterSpace::RawPixels => pixel_points(images),
    }
}

/// Which symbols were clustered together and how.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolPartition {
    pub zone: Zone,
    /// Feature-tree leaf, for middle-zone partitions built with a tree.
    pub group: Option<usize>,
    /// Indices into the input symbol list.
    pub members: Vec<usize>,
    pub model: ClusterModel,
    /// Global id of this partition's cluster 0.
    pub cluster_offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub partitions: Vec<SymbolPartition>,
    /// Global cluster id per symbol.
    pub assignments: Vec<usize>,
    pub cluster_count: usize,
}

/// Clusters symbols zone by zone. With a tree, middle-zone symbols are first
/// split by [`assign_group`] and each group gets k = its label count;
/// otherwise k = the zone's label count. Feature-space points are
/// standardized per zone; raw pixels already share one scale.
pub fn cluster_symbols(
    points: &[Vec<f64>],
    features: &[FeatureVector],
    zones: &[Zone],
    tree: Option<&FeatureTree>,
    zone_label_counts: &BTreeMap<Zone, usize>,
    cfg: &ClusteringConfig,
) -> Result<Clustering> {
    if points.len() != zones.len() || features.len() != zones.len() {
        return Err(Error::SizeMismatch(format!(
            "{} points, {} feature vectors, {} zones",
            points.len(),
            features.len(),
            zones.len()
        )));
    }
    let mut parts: Vec<(Zone, Option<usize>, Vec<usize>, usize)> = Vec::new();
    let mut scaled = vec![Vec::new(); points.len()];
    for zone in Zone::ALL {
        let members: Vec<usize> = (0..zones.len()).filter(|&i| zones[i] == zone).collect();
        if members.is_empty() {
            continue;
        }
        let zpts: Vec<Vec<f64>> = members.iter().map(|&i| points[i].clone()).collect();
        let zpts = match cfg.space {
            ClusterSpace::FeatureVector => standardize(&zpts),
            ClusterSpace::RawPixels => zpts,
        };
        for (&i, p) in members.iter().zip(zpts) {
            scaled[i] = p;
        }
        let labels = zone_label_counts.get(&zone).copied().unwrap_or(0);
        match tree {
            Some(t) if zone == Zone::Middle => {
                let leaves = t.leaves();
                let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &i in &members {
                    groups.entry(assign_group(t, &features[i]).leaf).or_default().push(i);
                }
                for (g, m) in groups {
                    parts.push((zone, Some(g), m, leaves[g].len()));
                }
            }
            _ => {
                if labels == 0 {
                    return Err(Error::Config(format!("no label count given for the {zone} zone")));
                }
                parts.push((zone, None, members, labels));
            }
        }
    }

    let fitted: Vec<Result<ClusterModel>> = parts
        .par_iter()
        .map(|(_, _, members, labels)| {
            let pts: Vec<Vec<f64>> = members.iter().map(|&i| scaled[i].clone()).collect();
            kmeans(&pts, (*labels).clamp(1, members.len()), cfg)
        })
        .collect();

    let mut assignments = vec![0; points.len()];
    let mut partitions = Vec::with_capacity(parts.len());
    let mut offset = 0;
    for ((zone, group, members, _), model) in parts.into_iter().zip(fitted) {
        let model = model?;
        for (&i, &a) in members.iter().zip(&model.assignments) {
            assignments[i] = offset + a;
        }
        let k = model.centroids.len();
        partitions.push(SymbolPartition {
            zone,
            group,
            members,
            model,
            cluster_offset: offset,
        });
        offset += k;
    }
    Ok(Clustering {
        partitions,
        assignments,
        cluster_count: offset,
    })
}

/// Cluster id to script label.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LabelMap {
    pub labels: BTreeMap<usize, String>,
}

pub const LABEL_MAP_HEADER: &str = "#voltage-labelmap v1";

impl LabelMap {
    pub fn get(&self, cluster: usize) -> Result<&str> {
        self.labels
            .get(&cluster)
            .map(String::as_str)
            .ok_or_else(|| Error::UnmappedClusters(vec![cluster]))
    }

    /// Fails with every cluster id in `0..cluster_count` that has no label.
    pub fn require_complete(&self, cluster_count: usize) -> Result<()> {
        let missing: Vec<usize> = (0..cluster_count).filter(|c| !self.labels.contains_key(c)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::UnmappedClusters(missing))
        }
    }

    /// Tab-separated `cluster<TAB>label` lines; an empty label marks a
    /// cluster still awaiting review.
    pub fn to_text(&self, cluster_count: usize) -> String {
        let mut out = format!("{LABEL_MAP_HEADER}\ncluster\tlabel\n");
        for c in 0..cluster_count {
            let _ = writeln!(out, "{c}\t{}", self.labels.get(&c).map_or("", String::as_str));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        if lines.next().map(|l| l.1) != Some(LABEL_MAP_HEADER) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {LABEL_MAP_HEADER:?}"),
            });
        }
        lines.next();
        let mut labels = BTreeMap::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (c, l) = line.split_once('\t').unwrap_or((line, ""));
            let c: usize = c.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad cluster id {c:?}"),
            })?;
            let l = l.trim();
            if !l.is_empty() {
                labels.insert(c, l.to_string());
            }
        }
        Ok(Self { labels })
    }
}

/// Majority ground-truth label of each cluster (ties: smallest label).
pub fn map_clusters<S: AsRef<str>>(assignments: &[usize], truth: &[S]) -> Result<LabelMap> {
    if assignments.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "{} assignments vs {} labels",
            assignments.len(),
            truth.len()
        )));
    }
    let mut votes: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for (&c, t) in assignments.iter().zip(truth) {
        *votes.entry(c).or_default().entry(t.as_ref()).or_default() += 1;
    }
    let labels = votes
        .into_iter()
        .map(|(c, v)| {
            let (label, _) = v
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
                .expect("cluster has members");
            (c, label.to_string())
        })
        .collect();
    Ok(LabelMap { labels })
}

/// Member of each cluster with the smallest summed distance to the others.
pub fn medoids(points: &[Vec<f64>], assignments: &[usize], cluster_count: usize) -> Vec<Option<usize>> {
    let mut members = vec![Vec::new(); cluster_count];
    for (i, &c) in assignments.iter().enumerate() {
        members[c].push(i);
    }
    members
        .par_iter()
        .map(|m| {
            m.iter()
                .map(|&i| (i, m.iter().map(|&j| dist2(&points[i], &points[j]).sqrt()).sum::<f64>()))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
        })
        .collect()
}

/// Share of symbols correctly grouped under the best one-to-one matching
/// of clusters to labels.
pub fn clustering_accuracy<S: AsRef<str>>(assignments: &[usize], truth: &[S]) -> Result<f64> {
    if assignments.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "{} assignments vs {} labels",
            assignments.len(),
            truth.len()
        )));
    }
    if assignments.is_empty() {
        return Err(Error::InsufficientData("no symbols".into()));
    }
    let clusters: BTreeSet<usize> = assignments.iter().copied().collect();
    let labels: BTreeSet<&str> = truth.iter().map(AsRef::as_ref).collect();
    let ci: BTreeMap<usize, usize> = clusters.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let li: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let n = clusters.len().max(labels.len());
    let mut table = vec![0i64; n * n];
    for (&c, t) in assignments.iter().zip(truth) {
        table[ci[&c] * n + li[t.as_ref()]] += 1;
    }
    let m = Matrix::from_vec(n, n, table).expect("square table");
    let (matched, _) = kuhn_munkres(&m);
    Ok(matched as f64 / assignments.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cfg() -> ClusteringConfig {
        ClusteringConfig {
            seed: 7,
            ..ClusteringConfig::default()
        }
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![4.0, 3.0]];
        let m = kmeans(&pts, 1, &cfg()).unwrap();
        assert_eq!(m.centroids[0], vec![2.0, 1.0]);
        let total: f64 = pts.iter().map(|p| dist2(p, &[2.0, 1.0])).sum();
        assert!((m.inertia - total).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        assert_eq!(kmeans(&pts, 6, &cfg()).unwrap().inertia, 0.0);
    }

    #[test]
    fn too_few_points() {
        assert!(kmeans(&[vec![1.0]], 2, &cfg()).is_err());
        assert!(kmeans(&[vec![1.0]], 0, &cfg()).is_err());
    }

    /// Every 2-partition of up to 12 points, by brute force.
    fn best_two_partition(pts: &[Vec<f64>]) -> f64 {
        let n = pts.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut cost = 0.0;
            for side in [true, false] {
                let grp: Vec<&Vec<f64>> =
                    (0..n).filter(|&i| ((mask >> i) & 1 == 1) == side).map(|i| &pts[i]).collect();
                let mean: Vec<f64> = (0..pts[0].len())
                    .map(|d| grp.iter().map(|p| p[d]).sum::<f64>() / grp.len() as f64)
                    .collect();
                cost += grp.iter().map(|p| dist2(p, &mean)).sum::<f64>();
            }
            best = best.min(cost);
        }
        best
    }

    #[test]
    fn separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for (cx, label) in [(0.0, "a"), (20.0, "b")] {
            for _ in 0..6 {
                pts.push(vec![cx + rng.gen::<f64>(), rng.gen::<f64>()]);
                truth.push(label);
            }
        }
        let m = kmeans(&pts, 2, &cfg()).unwrap();
        assert!((m.inertia - best_two_partition(&pts)).abs() < 1e-9);
        assert_eq!(clustering_accuracy(&m.assignments, &truth).unwrap(), 1.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 7 % 13) as f64, (i % 5) as f64]).collect();
        assert_eq!(kmeans(&pts, 4, &cfg()).unwrap(), kmeans(&pts, 4, &cfg()).unwrap());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1], &["x", "x", "y", "y"]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[5, 5, 5], &["a", "b", "c"]).unwrap(), 1.0 / 3.0);
        assert!(clustering_accuracy(&[0], &["a", "b"]).is_err());
    }

    #[test]
    fn accuracy_matches_permutation_search() {
        // Contingency rows = clusters, columns = labels.
        let table = [[3usize, 1, 4], [1, 5, 9], [2, 6, 5]];
        let mut assignments = Vec::new();
        let mut truth = Vec::new();
        for (c, row) in table.iter().enumerate() {
            for (l, &n) in row.iter().enumerate() {
                for _ in 0..n {
                    assignments.push(c);
                    truth.push(["p", "q", "r"][l]);
                }
            }
        }
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|p| (0..3).map(|c| table[c][p[c]]).sum::<usize>())
            .max()
            .unwrap();
        let total: usize = table.iter().flatten().sum();
        let acc = clustering_accuracy(&assignments, &truth).unwrap();
        assert!((acc - best as f64 / total as f64).abs() < 1e-12);
    }

    #[test]
    fn majority_mapping() {
        let assignments = [0, 0, 0, 0, 0, 1, 1];
        let truth = ["a", "a", "a", "b", "b", "c", "c"];
        let map = map_clusters(&assignments, &truth).unwrap();
        assert_eq!(map.get(0).unwrap(), "a");
        assert_eq!(map.get(1).unwrap(), "c");
        assert_eq!(map.get(2), Err(Error::UnmappedClusters(vec![2])));
        assert_eq!(map.require_complete(4), Err(Error::UnmappedClusters(vec![2, 3])));
    }

    #[test]
    fn pure_clusters_map_to_their_labels() {
        let map = map_clusters(&[1, 0, 2], &["k", "g", "t"]).unwrap();
        assert_eq!(map.get(0).unwrap(), "g");
        assert_eq!(map.get(1).unwrap(), "k");
        assert_eq!(map.get(2).unwrap(), "t");
    }

    #[test]
    fn label_map_text() {
        let mut map = map_clusters(&[0, 1], &["a", "b"]).unwrap();
        map.labels.remove(&1);
        let text = map.to_text(3);
        assert_eq!(text, "#voltage-labelmap v1\ncluster\tlabel\n0\ta\n1\t\n2\t\n");
        assert_eq!(LabelMap::from_text(&text).unwrap(), map);
        assert!(LabelMap::from_text("0\ta").is_err());
    }

    #[test]
    fn medoid_is_central() {
        let pts = vec![vec![0.0], vec![1.0], vec![10.0], vec![50.0]];
        assert_eq!(medoids(&pts, &[0, 0, 0, 1], 3), vec![Some(1), Some(3), None]);
    }

    #[test]
    fn standardize_drops_constant_columns() {
        let s = standardize(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn zones_are_clustered_apart() {
        let pts = vec![vec![0.0], vec![0.1], vec![9.0], vec![0.0], vec![5.0]];
        let feats = vec![FeatureVector([0.0; 32]); 5];
        let zones = [Zone::Middle, Zone::Middle, Zone::Middle, Zone::Upper, Zone::Upper];
        let counts = BTreeMap::from([(Zone::Middle, 2), (Zone::Upper, 2)]);
        let c = cluster_symbols(&pts, &feats, &zones, None, &counts, &cfg()).unwrap();
        assert_eq!(c.cluster_count, 4);
        assert_eq!(c.assignments[0], c.assignments[1]);
        assert_ne!(c.assignments[0], c.assignments[2]);
        assert_ne!(c.assignments[3], c.assignments[4]);
        let middle: BTreeSet<usize> = c.assignments[..3].iter().copied().collect();
        assert!(!middle.contains(&c.assignments[3]) && !middle.contains(&c.assignments[4]));
        let single = cluster_symbols(&pts[..1], &feats[..1], &zones[..1], None, &counts, &cfg()).unwrap();
        assert_eq!(single.cluster_count, 1);
    }

    proptest! {
        #[test]
        fn inertia_never_rises(seed in any::<u64>(), k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen(), rng.gen(), rng.gen()]).collect();
            let init = kmeans_pp_init(&pts, k, &mut rng);
            let (model, history) = lloyd(&pts, init, 100);
            for w in history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            prop_assert!((model.inertia - history.last().unwrap()).abs() < 1e-12);
            for (p, &a) in pts.iter().zip(&model.assignments) {
                prop_assert_eq!(nearest(p, &model.centroids).0, a);
            }
        }

        #[test]
        fn accuracy_ignores_cluster_names(perm_seed in any::<u64>()) {
            let assignments = [0usize, 0, 1, 2, 2, 2, 1, 0];
            let truth = ["a", "b", "b", "c", "c", "a", "b", "a"];
            let mut ids: Vec<usize> = (0..3).map(|i| i * 10 + 1).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
            for i in (1..ids.len()).rev() {
                ids.swap(i, rng.gen_range(0..=i));
            }
            let renamed: Vec<usize> = assignments.iter().map(|&a| ids[a]).collect();
            prop_assert_eq!(
                clustering_accuracy(&assignments, &truth).unwrap(),
                clustering_accuracy(&renamed, &truth).unwrap()
            );
        }
    }
}
