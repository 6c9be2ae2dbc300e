use std::collections::{BTreeMap, BTreeSet};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use voltage_core::annotate::LabelMap;
use voltage_core::augment::{augment_dataset, AugmentParams};
use voltage_core::supcon::{train, TrainingExample};
use voltage_core::{Error as CoreError, Zone};

use super::annotate::{CLUSTERS_SCHEMA, CLUSTER_COLUMNS, DISCARD_LABEL};
use super::{load_bitmaps, load_extraction, num, ANNOTATE_DIR, AUGMENT_DIR, MANIFEST_FILE, RECOGNIZER_FILE, TRAIN_DIR};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::io::{read_stage_text, reset_dir, write_bitmap, write_bytes, write_text, Workspace};
use crate::manifest::{parse_cell, read_table, write_table};

pub const AUGMENT_SCHEMA: &str = "#voltage-augment v1";
const AUGMENT_COLUMNS: &[&str] = &["id", "source", "label", "zone", "rotation_deg", "shear", "brightness", "path"];
pub const LOSS_SCHEMA: &str = "#voltage-loss v1";

/// Cluster id per symbol id, from the annotate stage.
fn load_clusters(ws: &Workspace) -> Result<BTreeMap<String, usize>> {
    let path = ws.stage_dir(ANNOTATE_DIR).join("clusters.tsv");
    let text = read_stage_text("annotate", &path)?;
    read_table(&path, &text, CLUSTERS_SCHEMA, CLUSTER_COLUMNS)?
        .into_iter()
        .map(|(n, c)| Ok((c[0].clone(), parse_cell(&path, n, "cluster", &c[3])?)))
        .collect()
}

fn load_label_map(ws: &Workspace) -> Result<LabelMap> {
    let path = ws.stage_dir(ANNOTATE_DIR).join("labelmap.tsv");
    let text = read_stage_text("annotate", &path)?;
    LabelMap::from_text(&text).map_err(|e| match e {
        CoreError::Parse { line, msg } => CliError::Schema { path, line, msg },
        e => e.into(),
    })
}

/// Labels the extracted symbols through the label map, then writes the
/// originals plus `copies_per_symbol` augmented variants of each.
pub fn cmd_augment(ws: &Workspace, cfg: &PipelineConfig) -> Result<String> {
    cfg.augment.validate()?;
    let (rows, _) = load_extraction(ws)?;
    let clusters = load_clusters(ws)?;
    let map = load_label_map(ws)?;

    let mut missing = BTreeSet::new();
    let mut kept = Vec::new();
    for r in &rows {
        let id = r.id();
        let c = *clusters.get(&id).ok_or_else(|| CliError::Schema {
            path: ws.stage_dir(ANNOTATE_DIR).join("clusters.tsv"),
            line: 0,
            msg: format!("no cluster for symbol {id}; rerun annotate"),
        })?;
        match map.get(c) {
            Ok(DISCARD_LABEL) => {}
            Ok(label) => kept.push((r, id, label.to_string())),
            Err(_) => {
                missing.insert(c);
            }
        }
    }
    if !missing.is_empty() {
        return Err(CoreError::UnmappedClusters(missing.into_iter().collect()).into());
    }

    let images = load_bitmaps(ws, kept.iter().map(|(r, _, _)| r.path.as_deref().unwrap_or_default()))?;
    let augmented = augment_dataset(&images, &cfg.augment)?;

    let dir = ws.stage_dir(AUGMENT_DIR);
    reset_dir(&dir)?;
    let mut out = Vec::with_capacity(augmented.len());
    let mut copy = vec![0usize; kept.len()];
    for a in &augmented {
        let (row, id, label) = &kept[a.source];
        let (vid, path, p) = match a.params {
            None => (id.clone(), row.path.clone().unwrap_or_default(), AugmentParams::IDENTITY),
            Some(p) => {
                copy[a.source] += 1;
                let vid = format!("{id}-a{:02}", copy[a.source]);
                let rel = format!("{AUGMENT_DIR}/symbols/{vid}.pgm");
                write_bitmap(&ws.resolve(rel.as_ref()), &a.image)?;
                (vid, rel, p)
            }
        };
        out.push(vec![
            vid,
            id.clone(),
            label.clone(),
            row.zone.to_string(),
            num(p.rotation_deg),
            num(p.shear),
            num(p.brightness),
            path,
        ]);
    }
    let n = out.len();
    write_text(&dir.join(MANIFEST_FILE), &write_table(AUGMENT_SCHEMA, AUGMENT_COLUMNS, out))?;
    Ok(format!(
        "{} labelled symbols, {} after augmentation ({} discarded)",
        kept.len(),
        n,
        rows.len() - kept.len()
    ))
}

/// Trains the contrastive recognizer on the augmented set.
pub fn cmd_train(ws: &Workspace, cfg: &PipelineConfig) -> Result<String> {
    let path = ws.stage_dir(AUGMENT_DIR).join(MANIFEST_FILE);
    let text = read_stage_text("augment", &path)?;
    let table = read_table(&path, &text, AUGMENT_SCHEMA, AUGMENT_COLUMNS)?;
    let zones: Vec<Zone> = table
        .iter()
        .map(|(n, c)| parse_cell(&path, *n, "zone", &c[3]))
        .collect::<Result<_>>()?;
    let images = load_bitmaps(ws, table.iter().map(|(_, c)| c[7].as_str()))?;
    let examples: Vec<TrainingExample> = table
        .iter()
        .zip(images)
        .zip(zones)
        .map(|(((_, c), image), zone)| TrainingExample {
            image,
            label: c[2].clone(),
            zone,
        })
        .collect();

    let started = Instant::now();
    let (recognizer, log) = train(&examples, &cfg.augment, &cfg.training)?;
    let elapsed = started.elapsed();

    let dir = ws.stage_dir(TRAIN_DIR);
    reset_dir(&dir)?;
    write_bytes(&dir.join(RECOGNIZER_FILE), &recognizer.to_bytes())?;
    write_text(
        &dir.join("loss.tsv"),
        &write_table(
            LOSS_SCHEMA,
            &["epoch", "loss"],
            log.epoch_loss.iter().enumerate().map(|(e, l)| vec![e.to_string(), num(*l)]),
        ),
    )?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    write_text(
        &dir.join("train.log"),
        &format!(
            "finished_unix_seconds\t{stamp}\nelapsed_seconds\t{:.3}\nexamples\t{}\nlabels\t{}\n",
            elapsed.as_secs_f64(),
            examples.len(),
            recognizer.labels.len()
        ),
    )?;
    Ok(format!(
        "trained on {} examples of {} labels; final loss {}",
        examples.len(),
        recognizer.labels.len(),
        log.epoch_loss.last().map_or_else(|| "n/a".to_string(), |l| format!("{l:.4}"))
    ))
}
