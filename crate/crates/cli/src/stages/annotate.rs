use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use voltage_core::annotate::{cluster_symbols, clustering_accuracy, clustering_points, map_clusters, medoids, LabelMap};
use voltage_core::gfrs::{recommend, CharsetPrototypes};
use voltage_core::glyphfeat::{features_of, write_feature_table};
use voltage_core::{FeatureTree, Zone};

use super::synthetic::read_charset;
use super::{load_bitmaps, load_extraction, num, ANNOTATE_DIR};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::io::{read_stage_text, reset_dir, write_bitmap, write_text, Workspace};
use crate::manifest::{read_symbols, write_table, SymbolRow};

pub const CLUSTERS_SCHEMA: &str = "#voltage-clusters v1";
pub const CLUSTER_COLUMNS: &[&str] = &["id", "zone", "group", "cluster"];
const ACCURACY_SCHEMA: &str = "#voltage-accuracy v1";
/// LabelMap entry for clusters of junk (specks, fragments); their symbols
/// are left out of training.
pub const DISCARD_LABEL: &str = "-";

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotateSummary {
    pub symbols: usize,
    pub clusters: usize,
    /// Clustering accuracy per zone and overall, with ground truth only.
    pub accuracy: Option<Vec<(String, usize, f64)>>,
    pub tree_leaves: Option<usize>,
}

impl AnnotateSummary {
    pub fn overall_accuracy(&self) -> Option<f64> {
        self.accuracy.as_ref()?.iter().find(|(z, _, _)| z == "all").map(|a| a.2)
    }

    pub fn zone_accuracy(&self, zone: Zone) -> Option<f64> {
        self.accuracy.as_ref()?.iter().find(|(z, _, _)| z == zone.as_str()).map(|a| a.2)
    }
}

impl fmt::Display for AnnotateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} symbols in {} clusters", self.symbols, self.clusters)?;
        if let Some(l) = self.tree_leaves {
            write!(f, " (middle zone split into {l} feature groups)")?;
        }
        match &self.accuracy {
            Some(acc) => {
                for (zone, n, a) in acc {
                    write!(f, "\nclustering accuracy {zone}: {:.3} over {n} symbols", a)?;
                }
                Ok(())
            }
            None => write!(
                f,
                "\nfill in {ANNOTATE_DIR}/labelmap.tsv using the cluster images in {ANNOTATE_DIR}/review/ \
                 (use {DISCARD_LABEL:?} for junk clusters), then run augment"
            ),
        }
    }
}

/// Truth label of each extracted symbol: the truth box on the same page
/// with the highest IoU, if it reaches `min_iou`.
fn match_truth(rows: &[SymbolRow], truth: &[SymbolRow], min_iou: f64) -> Vec<Option<String>> {
    let mut by_page: BTreeMap<usize, Vec<&SymbolRow>> = BTreeMap::new();
    for t in truth {
        by_page.entry(t.provenance.page).or_default().push(t);
    }
    rows.iter()
        .map(|r| {
            let cands = by_page.get(&r.provenance.page)?;
            let (iou, t) = cands
                .iter()
                .map(|t| (t.rect.iou(&r.rect), *t))
                .max_by(|a, b| a.0.total_cmp(&b.0))?;
            (iou >= min_iou).then(|| t.label.clone()).flatten()
        })
        .collect()
}

/// Features, feature tree, clusters and the cluster-to-label map.
pub fn cmd_annotate(ws: &Workspace, cfg: &PipelineConfig, ground_truth: bool) -> Result<AnnotateSummary> {
    let (rows, _) = load_extraction(ws)?;
    let images = load_bitmaps(ws, rows.iter().map(|r| r.path.as_deref().unwrap_or_default()))?;
    let features = images
        .par_iter()
        .map(|img| features_of(img, &cfg.features))
        .collect::<voltage_core::Result<Vec<_>>>()?;
    let zones: Vec<Zone> = rows.iter().map(|r| r.zone).collect();

    let charset = read_charset(&ws.resolve(&cfg.paths.charset))?;
    let mut zone_counts: BTreeMap<Zone, usize> = BTreeMap::new();
    for e in &charset {
        *zone_counts.entry(e.zone).or_default() += 1;
    }
    let tree: Option<FeatureTree> = if cfg.annotate.use_feature_tree {
        let protos = charset
            .iter()
            .filter(|e| e.zone == Zone::Middle)
            .map(|e| Ok((e.label.clone(), vec![features_of(&e.image, &cfg.features)?])))
            .collect::<voltage_core::Result<Vec<_>>>()?;
        if protos.is_empty() {
            None
        } else {
            Some(recommend(&CharsetPrototypes::new(protos)?, &cfg.gfrs)?)
        }
    } else {
        None
    };

    let points = clustering_points(cfg.clustering.space, &images, &features);
    let clustering = cluster_symbols(&points, &features, &zones, tree.as_ref(), &zone_counts, &cfg.clustering)?;

    let dir = ws.stage_dir(ANNOTATE_DIR);
    reset_dir(&dir)?;
    let ids: Vec<String> = rows.iter().map(SymbolRow::id).collect();
    write_text(&dir.join("features.tsv"), &write_feature_table(ids.iter().map(String::as_str).zip(&features)))?;
    if let Some(t) = &tree {
        write_text(&dir.join("tree.txt"), &t.to_text())?;
    }
    let mut group_of = vec![None; rows.len()];
    for p in &clustering.partitions {
        for &m in &p.members {
            group_of[m] = p.group;
        }
    }
    write_text(
        &dir.join("clusters.tsv"),
        &write_table(
            CLUSTERS_SCHEMA,
            CLUSTER_COLUMNS,
            (0..rows.len()).map(|i| {
                vec![
                    ids[i].clone(),
                    zones[i].to_string(),
                    group_of[i].map_or_else(|| "-".to_string(), |g| g.to_string()),
                    clustering.assignments[i].to_string(),
                ]
            }),
        ),
    )?;

    let mut summary = AnnotateSummary {
        symbols: rows.len(),
        clusters: clustering.cluster_count,
        accuracy: None,
        tree_leaves: tree.as_ref().map(|t| t.leaves().len()),
    };
    let label_map = if ground_truth {
        let tpath = ws.resolve(&cfg.paths.truth);
        let truth = read_symbols(&tpath, &read_stage_text("gen-synthetic", &tpath)?)?;
        let matched = match_truth(&rows, &truth, cfg.evaluation.min_iou);
        let known: Vec<usize> = (0..rows.len()).filter(|&i| matched[i].is_some()).collect();
        let assign: Vec<usize> = known.iter().map(|&i| clustering.assignments[i]).collect();
        let labels: Vec<&str> = known.iter().map(|&i| matched[i].as_deref().unwrap_or_default()).collect();
        let mut map = map_clusters(&assign, &labels)?;
        for c in 0..clustering.cluster_count {
            map.labels.entry(c).or_insert_with(|| DISCARD_LABEL.to_string());
        }

        let mut acc = Vec::new();
        for zone in Zone::ALL {
            let idx: Vec<usize> = (0..known.len()).filter(|&k| zones[known[k]] == zone).collect();
            if idx.is_empty() {
                continue;
            }
            let a: Vec<usize> = idx.iter().map(|&k| assign[k]).collect();
            let l: Vec<&str> = idx.iter().map(|&k| labels[k]).collect();
            acc.push((zone.to_string(), idx.len(), clustering_accuracy(&a, &l)?));
        }
        if !known.is_empty() {
            acc.push(("all".to_string(), known.len(), clustering_accuracy(&assign, &labels)?));
        }
        write_text(
            &dir.join("accuracy.tsv"),
            &write_table(
                ACCURACY_SCHEMA,
                &["zone", "symbols", "accuracy"],
                acc.iter().map(|(z, n, a)| vec![z.clone(), n.to_string(), num(*a)]),
            ),
        )?;
        summary.accuracy = Some(acc);
        map
    } else {
        let reps = medoids(&points, &clustering.assignments, clustering.cluster_count);
        for (c, rep) in reps.iter().enumerate() {
            if let Some(i) = rep {
                write_bitmap(&dir.join(format!("review/cluster-{c:04}.pgm")), &images[*i])?;
            }
        }
        LabelMap::default()
    };
    write_text(&dir.join("labelmap.tsv"), &label_map.to_text(clustering.cluster_count))?;
    Ok(summary)
}
