//! Contrastive symbol recognizer: a small convolutional encoder trained
//! with the supervised contrastive loss, classifying by nearest prototype.

mod encoder;
mod io;
mod loss;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_bitmap, AugmentConfig, AugmentParams};
use crate::raster::BinaryImage;
use crate::segmentation::Zone;
use crate::{Error, Result};

pub use encoder::{
    backward, encode, forward, to_canvas, EncoderParams, Forward, EMBED_DIM, INPUT_LEN, INPUT_SIDE,
    PARAM_COUNT, PROJ_DIM,
};
pub use io::{RECOGNIZER_MAGIC, RECOGNIZER_VERSION};
pub use loss::supcon_loss;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub temperature: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Source symbols per batch; each contributes two views.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            temperature: 0.1,
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 8,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::OutOfRange {
                what: "temperature".into(),
                value: self.temperature,
            });
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::OutOfRange {
                what: "learning_rate".into(),
                value: self.learning_rate,
            });
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::OutOfRange {
                what: "momentum".into(),
                value: self.momentum,
            });
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch_size must be at least 2".into()));
        }
        Ok(())
    }
}

/// One labelled training symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub image: BinaryImage,
    pub label: String,
    pub zone: Zone,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelPrototype {
    pub label: String,
    /// Zone the label was seen in (modal over its examples).
    pub zone: Zone,
    /// Unit-norm mean embedding.
    pub prototype: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedRecognizer {
    pub params: EncoderParams,
    /// Sorted by label.
    pub labels: Vec<LabelPrototype>,
    pub temperature: f64,
}

/// Per-epoch mean loss (per view).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub epoch_loss: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub label: String,
    pub score: f64,
    /// Every candidate, best first, including the winner.
    pub ranked: Vec<(String, f64)>,
}

fn normalize(v: &mut [f32]) {
    let n = v.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
    if n > 1e-12 {
        for x in v.iter_mut() {
            *x = (*x as f64 / n) as f32;
        }
    }
}

fn view(img: &BinaryImage, aug: &AugmentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f32>> {
    let p = AugmentParams::sample(aug, rng);
    Ok(to_canvas(&augment_bitmap(img, &p, aug)?))
}

/// Trains the encoder and builds one prototype per label from the
/// un-augmented examples.
pub fn train(
    examples: &[TrainingExample],
    aug: &AugmentConfig,
    cfg: &LossConfig,
) -> Result<(TrainedRecognizer, TrainingLog)> {
    cfg.validate()?;
    aug.validate()?;
    let label_ids: BTreeMap<&str, usize> = examples
        .iter()
        .map(|e| e.label.as_str())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    if label_ids.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "training needs at least 2 labels, got {}",
            label_ids.len()
        )));
    }
    let targets: Vec<usize> = examples.iter().map(|e| label_ids[e.label.as_str()]).collect();

    let mut params = EncoderParams::init(cfg.seed);
    let mut velocity = vec![0.0f32; PARAM_COUNT];
    let mut log = TrainingLog::default();
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 0..cfg.epochs {
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        shuffle_rng.set_stream(epoch as u64);
        order.shuffle(&mut shuffle_rng);

        let mut batches: Vec<&[usize]> = order.chunks(cfg.batch_size).collect();
        if batches.len() > 1 && batches.last().is_some_and(|b| b.len() < 2) {
            batches.pop();
        }
        let (mut epoch_loss, mut epoch_views) = (0.0, 0usize);
        for (b, batch) in batches.iter().enumerate() {
            // Two views per source; view streams are keyed by (epoch, batch, slot).
            let views: Vec<(usize, Vec<f32>)> = (0..batch.len() * 2)
                .into_par_iter()
                .map(|v| {
                    let src = batch[v / 2];
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0000_0000_0000 ^ (epoch as u64) << 32 ^ b as u64);
                    rng.set_stream(v as u64);
                    view(&examples[src].image, aug, &mut rng).map(|canvas| (targets[src], canvas))
                })
                .collect::<Result<_>>()?;
            let passes: Vec<Forward> = views
                .par_iter()
                .map(|(_, canvas)| forward(&params, canvas))
                .collect::<Result<_>>()?;
            let z: Vec<Vec<f64>> = passes
                .iter()
                .map(|f| f.projection.iter().map(|&v| v as f64).collect())
                .collect();
            let labels: Vec<usize> = views.iter().map(|(l, _)| *l).collect();
            let (loss, dz) = supcon_loss(&z, &labels, cfg.temperature)?;
            let scale = 1.0 / z.len() as f64;
            epoch_loss += loss;
            epoch_views += z.len();

            let grads: Vec<Vec<f32>> = passes
                .par_iter()
                .zip(&dz)
                .map(|(f, g)| {
                    let g: Vec<f32> = g.iter().map(|v| (v * scale) as f32).collect();
                    let mut out = vec![0.0f32; PARAM_COUNT];
                    backward(&params, f, &g, &mut out);
                    out
                })
                .collect();
            let mut total = vec![0.0f32; PARAM_COUNT];
            for g in &grads {
                for (t, v) in total.iter_mut().zip(g) {
                    *t += v;
                }
            }
            let (lr, mu) = (cfg.learning_rate as f32, cfg.momentum as f32);
            for ((p, v), g) in params.data.iter_mut().zip(velocity.iter_mut()).zip(&total) {
                *v = mu * *v + g;
                *p -= lr * *v;
            }
        }
        let mean = if epoch_views == 0 { 0.0 } else { epoch_loss / epoch_views as f64 };
        log::debug!("epoch {epoch}: mean loss {mean:.5}");
        log.epoch_loss.push(mean);
    }

    let recognizer = build_prototypes(params, examples, cfg.temperature)?;
    Ok((recognizer, log))
}

/// Prototypes from the given examples under fixed encoder parameters.
pub fn build_prototypes(params: EncoderParams, examples: &[TrainingExample], temperature: f64) -> Result<TrainedRecognizer> {
    let embeddings: Vec<Vec<f32>> = examples
        .par_iter()
        .map(|e| encode(&params, &to_canvas(&e.image)).map(|(emb, _)| emb))
        .collect::<Result<_>>()?;
    let mut sums: BTreeMap<&str, (Vec<f64>, BTreeMap<Zone, usize>)> = BTreeMap::new();
    for (e, emb) in examples.iter().zip(&embeddings) {
        let entry = sums
            .entry(e.label.as_str())
            .or_insert_with(|| (vec![0.0; EMBED_DIM], BTreeMap::new()));
        for (s, v) in entry.0.iter_mut().zip(emb) {
            *s += *v as f64;
        }
        *entry.1.entry(e.zone).or_default() += 1;
    }
    let labels = sums
        .into_iter()
        .map(|(label, (sum, zones))| {
            let mut prototype: Vec<f32> = sum.into_iter().map(|v| v as f32).collect();
            normalize(&mut prototype);
            let zone = zones
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(z, _)| *z)
                .unwrap_or(Zone::Middle);
            LabelPrototype {
                label: label.to_string(),
                zone,
                prototype,
            }
        })
        .collect();
    Ok(TrainedRecognizer {
        params,
        labels,
        temperature,
    })
}

impl TrainedRecognizer {
    pub fn embed(&self, img: &BinaryImage) -> Vec<f32> {
        // Canvas always has the encoder's input shape.
        encode(&self.params, &to_canvas(img)).map(|(e, _)| e).unwrap_or_default()
    }

    /// Nearest prototype by cosine similarity; with a zone, only labels seen
    /// in that zone compete (all labels if none were).
    pub fn classify(&self, img: &BinaryImage, zone: Option<Zone>) -> Classification {
        self.classify_embedding(&self.embed(img), zone)
    }

    pub fn classify_embedding(&self, embedding: &[f32], zone: Option<Zone>) -> Classification {
        let mut e = embedding.to_vec();
        normalize(&mut e);
        let mut candidates: Vec<&LabelPrototype> = self
            .labels
            .iter()
            .filter(|l| zone.is_none_or(|z| l.zone == z))
            .collect();
        if candidates.is_empty() {
            candidates = self.labels.iter().collect();
        }
        let mut ranked: Vec<(String, f64)> = candidates
            .iter()
            .map(|l| {
                let s: f64 = l.prototype.iter().zip(&e).map(|(a, b)| *a as f64 * *b as f64).sum();
                (l.label.clone(), s)
            })
            .collect();
        // Stable sort keeps label order among equal scores.
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (label, score) = ranked.first().cloned().unwrap_or_default();
        Classification { label, score, ranked }
    }

    pub fn prototype(&self, label: &str) -> Option<&LabelPrototype> {
        self.labels.iter().find(|l| l.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three easily separable shapes drawn at small random offsets and
    /// stroke widths.
    pub(crate) fn shape_corpus(per_label: usize, seed: u64) -> Vec<TrainingExample> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for i in 0..per_label {
            for (label, kind) in [("bar", 0), ("ring", 1), ("cross", 2)] {
                let t = rng.gen_range(2..4);
                let s = rng.gen_range(14..20);
                let mut img = BinaryImage::new(s, s);
                for y in 0..s {
                    for x in 0..s {
                        let ink = match kind {
                            0 => x < t,
                            1 => x < t || y < t || x >= s - t || y >= s - t,
                            _ => (x as isize - s as isize / 2).unsigned_abs() < t.max(2) / 2 + 1
                                || (y as isize - s as isize / 2).unsigned_abs() < t.max(2) / 2 + 1,
                        };
                        img.set(x, y, ink);
                    }
                }
                let img = crate::raster::tight_crop(&img).unwrap().1;
                out.push(TrainingExample {
                    image: img,
                    label: label.into(),
                    zone: Zone::Middle,
                });
            }
            let _ = i;
        }
        out
    }

    fn small_cfg(epochs: usize) -> LossConfig {
        LossConfig {
            epochs,
            batch_size: 16,
            seed: 3,
            ..LossConfig::default()
        }
    }

    fn accuracy(r: &TrainedRecognizer, set: &[TrainingExample]) -> f64 {
        let hits = set.iter().filter(|e| r.classify(&e.image, None).label == e.label).count();
        hits as f64 / set.len() as f64
    }

    #[test]
    fn degenerate_label_set_rejected() {
        let mut one = shape_corpus(3, 0);
        one.retain(|e| e.label == "bar");
        assert!(matches!(
            train(&one, &AugmentConfig::default(), &small_cfg(1)),
            Err(Error::InsufficientData(_))
        ));
        let bad = LossConfig {
            temperature: 0.0,
            ..LossConfig::default()
        };
        assert!(train(&shape_corpus(2, 0), &AugmentConfig::default(), &bad).is_err());
    }

    #[test]
    fn separable_corpus_is_learned() {
        let train_set = shape_corpus(50, 1);
        let held_out = shape_corpus(20, 2);
        let (r, log) = train(&train_set, &AugmentConfig::default(), &small_cfg(6)).unwrap();
        assert!(accuracy(&r, &held_out) >= 0.95, "accuracy {}", accuracy(&r, &held_out));
        assert!(train_set.iter().take(6).all(|e| r.classify(&e.image, None).label == e.label));
        let first = log.epoch_loss[0];
        let last = *log.epoch_loss.last().unwrap();
        assert!(last < first, "{:?}", log.epoch_loss);
    }

    #[test]
    fn same_seed_same_parameters() {
        let set = shape_corpus(6, 4);
        let a = train(&set, &AugmentConfig::default(), &small_cfg(2)).unwrap();
        let b = train(&set, &AugmentConfig::default(), &small_cfg(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn untrained_recognizer_still_classifies() {
        let set = shape_corpus(4, 5);
        let (r, log) = train(&set, &AugmentConfig::default(), &small_cfg(0)).unwrap();
        assert!(log.epoch_loss.is_empty());
        assert_eq!(r.labels.len(), 3);
        let c = r.classify(&set[0].image, None);
        assert_eq!(c.ranked.len(), 3);
    }

    #[test]
    fn prototype_fed_back_wins_with_unit_score() {
        let set = shape_corpus(4, 6);
        let (r, _) = train(&set, &AugmentConfig::default(), &small_cfg(1)).unwrap();
        for l in &r.labels {
            let c = r.classify_embedding(&l.prototype, None);
            assert_eq!(c.label, l.label);
            assert!((c.score - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zone_restricts_candidates_and_ties_follow_label_order() {
        let mk = |label: &str, zone, v: Vec<f32>| LabelPrototype {
            label: label.into(),
            zone,
            prototype: v,
        };
        let mut e = vec![0.0; EMBED_DIM];
        e[0] = 1.0;
        let r = TrainedRecognizer {
            params: EncoderParams::zeros(),
            labels: vec![
                mk("a", Zone::Middle, e.clone()),
                mk("b", Zone::Middle, e.clone()),
                mk("c", Zone::Upper, e.clone()),
            ],
            temperature: 0.1,
        };
        assert_eq!(r.classify_embedding(&e, None).label, "a");
        assert_eq!(r.classify_embedding(&e, Some(Zone::Upper)).label, "c");
        assert_eq!(r.classify_embedding(&e, Some(Zone::Upper)).ranked.len(), 1);
        assert_eq!(r.classify_embedding(&e, Some(Zone::Bottom)).ranked.len(), 3);
    }
}
