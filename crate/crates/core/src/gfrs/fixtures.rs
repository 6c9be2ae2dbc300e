//! Prototype charsets for exercising the recommender.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CharsetPrototypes;
use crate::glyphfeat::{FeatureId, FeatureKind, FeatureVector, FEATURE_COUNT};

/// Scripts with a known recommended feature set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReferenceScript {
    Takri,
    Modi,
    OlChiki,
    Gujarati,
    Wancho,
}

impl ReferenceScript {
    pub const ALL: [ReferenceScript; 5] = [
        ReferenceScript::Takri,
        ReferenceScript::Modi,
        ReferenceScript::OlChiki,
        ReferenceScript::Gujarati,
        ReferenceScript::Wancho,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceScript::Takri => "Takri",
            ReferenceScript::Modi => "Modi",
            ReferenceScript::OlChiki => "Ol Chiki",
            ReferenceScript::Gujarati => "Gujarati",
            ReferenceScript::Wancho => "Wancho",
        }
    }

    /// Reference recommended features.
    pub fn features(self) -> Vec<FeatureId> {
        let nums: &[usize] = match self {
            ReferenceScript::Takri => &[1, 2, 5, 7, 8, 12, 13, 14, 15],
            ReferenceScript::Modi => &[1, 2, 4, 5, 7, 9, 12, 15, 16, 23, 30],
            ReferenceScript::OlChiki => &[2, 4, 8, 12, 16],
            ReferenceScript::Gujarati => &[1, 2, 4, 5, 7, 12, 13, 15, 16],
            ReferenceScript::Wancho => &[2, 5, 8, 12, 13, 15, 16, 21],
        };
        nums.iter().map(|&n| FeatureId::new(n).expect("valid id")).collect()
    }

    /// Reference charset size.
    pub fn label_count(self) -> usize {
        match self {
            ReferenceScript::Takri => 59,
            ReferenceScript::Modi => 46,
            ReferenceScript::OlChiki => 30,
            ReferenceScript::Gujarati | ReferenceScript::Wancho => 42,
        }
    }
}

fn value_for(id: FeatureId, bit: bool) -> f64 {
    match (id.kind(), bit) {
        (FeatureKind::Range, false) => 10.0,
        (FeatureKind::Range, true) => 60.0,
        (_, false) => 0.0,
        (_, true) => 1.0,
    }
}

/// A charset shaped like a reference script. Labels come in small groups of
/// look-alikes that differ only in the script's recommended features, laid
/// out so that every recommended feature is needed to keep groups at six or
/// fewer. Each label has two prototypes that disagree on one other feature.
pub fn script_fixture(script: ReferenceScript) -> CharsetPrototypes {
    let feats = script.features();
    let r = feats.len();

    // Group sizes: a quartet on the zero code, a trio on each single-feature
    // code (so dropping any feature merges at least seven labels), and the
    // rest on two-feature codes.
    let mut codes: Vec<(Vec<bool>, usize)> = vec![(vec![false; r], 4)];
    for i in 0..r {
        let mut c = vec![false; r];
        c[i] = true;
        codes.push((c, 3));
    }
    let mut left = script.label_count() - 4 - 3 * r;
    'extra: for i in 0..r {
        for j in i + 1..r {
            if left == 0 {
                break 'extra;
            }
            let mut c = vec![false; r];
            c[i] = true;
            c[j] = true;
            codes.push((c, left.min(4)));
            left -= left.min(4);
        }
    }
    assert_eq!(left, 0, "fixture codes exhausted");
    let label_codes: Vec<&Vec<bool>> = codes
        .iter()
        .flat_map(|(c, n)| std::iter::repeat_n(c, *n))
        .collect();

    let noisy = [30, 31, 32]
        .into_iter()
        .map(|n| FeatureId::new(n).expect("valid id"))
        .find(|f| !feats.contains(f))
        .expect("some epicenter feature is unused");

    let mut entries = Vec::new();
    for label in 0..script.label_count() {
        let code = label_codes[label];
        let mut base = FeatureVector([0.0; FEATURE_COUNT]);
        for id in FeatureId::all() {
            base.set(id, value_for(id, false));
        }
        for (k, &id) in feats.iter().enumerate() {
            base.set(id, value_for(id, code[k]));
        }
        let mut other = base;
        base.set(noisy, 10.0);
        other.set(noisy, 90.0);
        entries.push((format!("s{label:02}"), vec![base, other]));
    }
    CharsetPrototypes::new(entries).expect("fixture labels are unique")
}

/// A small random charset whose labels differ only in `varying`.
pub fn micro_charset(seed: u64, labels: usize, varying: &[FeatureId]) -> CharsetPrototypes {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..labels)
        .map(|i| {
            let mut v = FeatureVector([0.0; FEATURE_COUNT]);
            for &id in varying {
                let x = match id.kind() {
                    FeatureKind::Boolean => rng.gen_range(0..2) as f64,
                    FeatureKind::Count => rng.gen_range(0..4) as f64,
                    FeatureKind::Range => rng.gen_range(0..=100) as f64,
                };
                v.set(id, x);
            }
            (format!("g{i:02}"), vec![v])
        })
        .collect();
    CharsetPrototypes::new(entries).expect("labels are unique")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfrs::{recommend, GfrsConfig};

    #[test]
    fn fixtures_recover_reference_sets() {
        for s in ReferenceScript::ALL {
            let tree = recommend(&script_fixture(s), &GfrsConfig::default()).unwrap();
            assert!(tree.max_leaf_size() <= 6, "{}", s.name());
            assert_eq!(tree.recommended_features, s.features(), "{}", s.name());
        }
    }
}
