use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voltage_core::postrules::{apply_corrections, check_rules, RecognizedSymbol, RecognizedWord, RuleId};
use voltage_core::synthscript::{gen_charset, random_word, CharsetCounts, SynthCharset};

fn charset() -> SynthCharset {
    gen_charset(3, CharsetCounts::default()).unwrap()
}

fn recognized(cs: &SynthCharset, glyphs: &[usize], alternatives: &[usize]) -> RecognizedWord {
    RecognizedWord::new(
        glyphs
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let glyph = &cs.glyphs[g];
                let mut s = RecognizedSymbol::new(glyph.label.clone(), glyph.zone);
                s.alternatives = alternatives
                    .iter()
                    .map(|&a| (cs.glyphs[a].label.clone(), 0.3))
                    .collect();
                s.score = 0.9 - 0.01 * i as f64;
                s
            })
            .collect(),
    )
}

#[test]
fn generated_words_break_no_rule() {
    let cs = charset();
    let script = cs.script_model();
    let rules: BTreeSet<RuleId> = RuleId::builtin().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let spec = random_word(&cs, &mut rng);
        let glyphs: Vec<usize> = spec.iter().flat_map(|c| std::iter::once(c.root).chain(c.modifier)).collect();
        let word = recognized(&cs, &glyphs, &[]);
        let violations = check_rules(&word, &script, &rules).unwrap();
        assert!(violations.is_empty(), "{:?}: {violations:?}", word.labels());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn corrections_are_idempotent(
        glyphs in prop::collection::vec(0usize..64, 1..8),
        alternatives in prop::collection::vec(0usize..64, 0..3),
    ) {
        let cs = charset();
        let script = cs.script_model();
        let rules: BTreeSet<RuleId> = RuleId::builtin().into_iter().chain([RuleId::R8]).collect();
        let word = recognized(&cs, &glyphs, &alternatives);
        let once = apply_corrections(&word, &script, &rules).unwrap();
        let twice = apply_corrections(&once, &script, &rules).unwrap();
        prop_assert_eq!(once.labels(), twice.labels());
        prop_assert_eq!(once.flags, twice.flags);
    }

    #[test]
    fn corrections_never_grow_a_word(glyphs in prop::collection::vec(0usize..64, 1..8)) {
        let cs = charset();
        let script = cs.script_model();
        let rules: BTreeSet<RuleId> = RuleId::builtin().into_iter().chain([RuleId::R8]).collect();
        let word = recognized(&cs, &glyphs, &[]);
        let out = apply_corrections(&word, &script, &rules).unwrap();
        prop_assert!(out.symbols.len() <= word.symbols.len());
    }
}
