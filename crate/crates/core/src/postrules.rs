//! Linguistic post-processing of recognized words.
//!
//! Rules R1 to R7 only need the symbol classes of a [`ScriptModel`]; R8 also
//! uses its composition table; R9 and R10 need an attached dictionary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::raster::Rect;
use crate::segmentation::Zone;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolClass {
    Consonant,
    IndependentVowel,
    VowelModifier,
    Number,
    Delimiter,
    /// Viram-like fragments that only occur as parts of a whole.
    Part,
}

impl SymbolClass {
    pub const ALL: [SymbolClass; 6] = [
        SymbolClass::Consonant,
        SymbolClass::IndependentVowel,
        SymbolClass::VowelModifier,
        SymbolClass::Number,
        SymbolClass::Delimiter,
        SymbolClass::Part,
    ];

    fn is_letter(self) -> bool {
        !matches!(self, SymbolClass::Number | SymbolClass::Delimiter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
}

impl RuleId {
    pub const ALL: [RuleId; 10] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
        RuleId::R9,
        RuleId::R10,
    ];

    /// The rules that need no dictionary and no composition data.
    pub fn builtin() -> BTreeSet<RuleId> {
        RuleId::ALL[..7].iter().copied().collect()
    }

    fn needs_dictionary(self) -> bool {
        matches!(self, RuleId::R9 | RuleId::R10)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", *self as usize + 1)
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: usize = s
            .strip_prefix('R')
            .or_else(|| s.strip_prefix('r'))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::Config(format!("unknown rule {s:?}")))?;
        RuleId::ALL
            .get(n.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown rule {s:?}")))
    }
}

impl Serialize for RuleId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleAction {
    Reject,
    Reorder,
    Merge,
    Substitute,
    Flag,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleViolation {
    pub rule: RuleId,
    /// Half-open symbol range `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub action: RuleAction,
}

/// Word-list membership, keyed by the concatenated labels of a word.
pub trait Dictionary: Send + Sync {
    fn contains(&self, word: &str) -> bool;
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordList {
    words: BTreeSet<String>,
}

impl WordList {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        Self {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// One word per line; blank lines and surrounding whitespace ignored.
    pub fn from_text(text: &str) -> Self {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }
}

impl Dictionary for WordList {
    fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Composition {
    pub parts: Vec<String>,
    pub whole: String,
}

/// A symbol read before a neighbour of class `before` that belongs after it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReorderPair {
    pub symbol: String,
    pub before: SymbolClass,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptModelFile {
    #[serde(default)]
    name: String,
    #[serde(default)]
    classes: BTreeMap<SymbolClass, Vec<String>>,
    #[serde(default)]
    panchamkshar: Vec<String>,
    #[serde(default)]
    compose: Vec<Composition>,
    #[serde(default)]
    reorder: Vec<ReorderPair>,
}

/// Symbol classes and rule data for one script.
#[derive(Clone)]
pub struct ScriptModel {
    pub name: String,
    classes: BTreeMap<String, SymbolClass>,
    panchamkshar: BTreeSet<String>,
    compositions: Vec<Composition>,
    reorder: Vec<ReorderPair>,
    dictionary: Option<Arc<dyn Dictionary>>,
}

impl fmt::Debug for ScriptModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScriptModel")
            .field("name", &self.name)
            .field("classes", &self.classes)
            .field("panchamkshar", &self.panchamkshar)
            .field("compositions", &self.compositions)
            .field("reorder", &self.reorder)
            .field("dictionary", &self.dictionary.is_some())
            .finish()
    }
}

impl ScriptModel {
    pub fn new(
        name: impl Into<String>,
        classes: BTreeMap<String, SymbolClass>,
        panchamkshar: BTreeSet<String>,
        compositions: Vec<Composition>,
        reorder: Vec<ReorderPair>,
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            classes,
            panchamkshar,
            compositions,
            reorder,
            dictionary: None,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        for p in &self.panchamkshar {
            if self.classes.get(p) != Some(&SymbolClass::Consonant) {
                return Err(Error::Config(format!("panchamkshar {p:?} is not a consonant")));
            }
        }
        for c in &self.compositions {
            if c.parts.len() < 2 {
                return Err(Error::Config(format!("composition for {:?} needs at least 2 parts", c.whole)));
            }
            for l in c.parts.iter().chain([&c.whole]) {
                self.class_of(l)?;
            }
        }
        for r in &self.reorder {
            self.class_of(&r.symbol)?;
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScriptModelFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut classes = BTreeMap::new();
        for (class, labels) in file.classes {
            for l in labels {
                if let Some(prev) = classes.insert(l.clone(), class) {
                    return Err(Error::Config(format!("label {l:?} classified twice ({prev:?}, {class:?})")));
                }
            }
        }
        Self::new(
            file.name,
            classes,
            file.panchamkshar.into_iter().collect(),
            file.compose,
            file.reorder,
        )
    }

    pub fn to_toml(&self) -> String {
        let mut classes: BTreeMap<SymbolClass, Vec<String>> = BTreeMap::new();
        for (l, c) in &self.classes {
            classes.entry(*c).or_default().push(l.clone());
        }
        let file = ScriptModelFile {
            name: self.name.clone(),
            classes,
            panchamkshar: self.panchamkshar.iter().cloned().collect(),
            compose: self.compositions.clone(),
            reorder: self.reorder.clone(),
        };
        toml::to_string(&file).expect("script model serializes")
    }

    pub fn class_of(&self, label: &str) -> Result<SymbolClass> {
        self.classes
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = (&str, SymbolClass)> {
        self.classes.iter().map(|(l, c)| (l.as_str(), *c))
    }

    pub fn has_dictionary(&self) -> bool {
        self.dictionary.is_some()
    }
}

/// Enables the dictionary-backed rules (R9, R10) and dictionary validation
/// of R8 merges.
pub fn attach_dictionary(script: &ScriptModel, dictionary: Arc<dyn Dictionary>) -> ScriptModel {
    ScriptModel {
        dictionary: Some(dictionary),
        ..script.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognizedSymbol {
    pub label: String,
    pub zone: Zone,
    pub score: f64,
    /// Ranked candidates, best first (may include `label`).
    pub alternatives: Vec<(String, f64)>,
    /// Page box; merges take the union of their parts.
    pub rect: Option<Rect>,
}

impl RecognizedSymbol {
    pub fn new(label: impl Into<String>, zone: Zone) -> Self {
        Self {
            label: label.into(),
            zone,
            score: 1.0,
            alternatives: Vec::new(),
            rect: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecognizedWord {
    pub symbols: Vec<RecognizedSymbol>,
    /// Violations that survived correction.
    pub flags: Vec<RuleViolation>,
}

impl RecognizedWord {
    pub fn new(symbols: Vec<RecognizedSymbol>) -> Self {
        Self {
            symbols,
            flags: Vec::new(),
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.symbols.iter().map(|s| s.label.as_str()).collect()
    }

    /// Labels concatenated, the key used for dictionary lookups.
    pub fn text(&self) -> String {
        self.symbols.iter().map(|s| s.label.as_str()).collect()
    }
}

fn violation(rule: RuleId, start: usize, end: usize, action: RuleAction) -> RuleViolation {
    RuleViolation {
        rule,
        start,
        end,
        action,
    }
}

/// All violations of the enabled rules, ordered by position then rule.
pub fn check_rules(word: &RecognizedWord, script: &ScriptModel, enabled: &BTreeSet<RuleId>) -> Result<Vec<RuleViolation>> {
    if let Some(r) = enabled.iter().find(|r| r.needs_dictionary()) {
        if script.dictionary.is_none() {
            return Err(Error::Config(format!("{r} needs a dictionary; none is attached")));
        }
    }
    let classes: Vec<SymbolClass> = word
        .symbols
        .iter()
        .map(|s| script.class_of(&s.label))
        .collect::<Result<_>>()?;
    let labels = word.labels();
    let n = classes.len();
    let on = |r: RuleId| enabled.contains(&r);
    let mut out = Vec::new();
    use SymbolClass::*;

    if on(RuleId::R1) {
        // Modifiers attached to one consonant run until the next non-modifier.
        let mut i = 0;
        while i < n {
            if classes[i] == Consonant {
                let mut mods = Vec::new();
                let mut j = i + 1;
                while j < n && matches!(classes[j], VowelModifier | Part) {
                    if classes[j] == VowelModifier {
                        mods.push(j);
                    }
                    j += 1;
                }
                for &m in mods.iter().skip(1) {
                    out.push(violation(RuleId::R1, m, m + 1, RuleAction::Reject));
                }
                i = j;
            } else {
                i += 1;
            }
        }
    }
    if on(RuleId::R2) {
        for i in 0..n.saturating_sub(1) {
            if classes[i] == Delimiter && classes[i + 1] != Delimiter {
                out.push(violation(RuleId::R2, i, i + 1, RuleAction::Reject));
            }
        }
    }
    if on(RuleId::R3) {
        for i in 1..n {
            if classes[i] == Delimiter && classes[i - 1] == Delimiter {
                out.push(violation(RuleId::R3, i, i + 1, RuleAction::Reject));
            }
        }
    }
    if on(RuleId::R4) {
        let numbers = classes.iter().filter(|c| **c == Number).count();
        let letters = classes.iter().filter(|c| c.is_letter()).count();
        if numbers > 0 && letters > 0 {
            // The minority kind is taken to be the misreading; numbers on ties.
            let odd_numbers = numbers <= letters;
            for (i, c) in classes.iter().enumerate() {
                if (odd_numbers && *c == Number) || (!odd_numbers && c.is_letter()) {
                    out.push(violation(RuleId::R4, i, i + 1, RuleAction::Substitute));
                }
            }
        }
    }
    if on(RuleId::R5) {
        let body: Vec<usize> = (0..n).filter(|&i| classes[i] != Delimiter).collect();
        if body.len() > 2 {
            for &i in &body[1..body.len() - 1] {
                if classes[i] == IndependentVowel {
                    out.push(violation(RuleId::R5, i, i + 1, RuleAction::Reject));
                }
            }
        }
    }
    if on(RuleId::R6) {
        if let Some(last) = (0..n).rev().find(|&i| classes[i] != Delimiter) {
            if script.panchamkshar.contains(labels[last]) {
                out.push(violation(RuleId::R6, last, last + 1, RuleAction::Reject));
            }
        }
    }
    if on(RuleId::R7) {
        // A symbol right after a consonant is read as that consonant's
        // modifier, so only unattached occurrences are out of order.
        for i in 0..n.saturating_sub(1) {
            if i > 0 && matches!(classes[i - 1], Consonant | Part) {
                continue;
            }
            if script
                .reorder
                .iter()
                .any(|r| r.symbol == labels[i] && r.before == classes[i + 1])
            {
                out.push(violation(RuleId::R7, i, i + 2, RuleAction::Reorder));
            }
        }
    }
    if on(RuleId::R8) {
        for c in &script.compositions {
            let k = c.parts.len();
            for i in 0..(n + 1).saturating_sub(k) {
                if labels[i..i + k].iter().zip(&c.parts).all(|(a, b)| *a == b) {
                    out.push(violation(RuleId::R8, i, i + k, RuleAction::Merge));
                }
            }
        }
    }
    if let Some(dict) = &script.dictionary {
        let text = word.text();
        let known = text.is_empty() || dict.contains(&text);
        if on(RuleId::R9) && !known {
            out.push(violation(RuleId::R9, 0, n, RuleAction::Substitute));
        }
        if on(RuleId::R10) && !known {
            let splits = (1..n).any(|k| {
                let (a, b): (String, String) = (labels[..k].concat(), labels[k..].concat());
                dict.contains(&a) && dict.contains(&b)
            });
            if splits {
                out.push(violation(RuleId::R10, 0, n, RuleAction::Flag));
            }
        }
    }
    out.sort_by_key(|v| (v.start, v.rule, v.end));
    out.dedup();
    Ok(out)
}

/// Rounds of correction allowed before remaining violations are flagged.
pub const MAX_CORRECTION_ROUNDS: usize = 5;

fn merge(word: &RecognizedWord, v: &RuleViolation, script: &ScriptModel) -> Option<RecognizedWord> {
    let labels = word.labels();
    let c = script
        .compositions
        .iter()
        .find(|c| c.parts.len() == v.end - v.start && labels[v.start..v.end].iter().zip(&c.parts).all(|(a, b)| *a == b))?;
    let span = &word.symbols[v.start..v.end];
    let whole = RecognizedSymbol {
        label: c.whole.clone(),
        zone: span[0].zone,
        score: span.iter().map(|s| s.score).fold(f64::INFINITY, f64::min),
        alternatives: Vec::new(),
        rect: span.iter().filter_map(|s| s.rect).reduce(|a, b| a.union(&b)),
    };
    let mut out = word.clone();
    out.symbols.splice(v.start..v.end, [whole]);
    Some(out)
}

/// Candidate rewrites for one violation, most preferred first.
fn candidates(word: &RecognizedWord, v: &RuleViolation, script: &ScriptModel) -> Vec<RecognizedWord> {
    match v.action {
        RuleAction::Reorder => {
            let mut w = word.clone();
            w.symbols.swap(v.start, v.start + 1);
            vec![w]
        }
        RuleAction::Merge => merge(word, v, script).into_iter().collect(),
        RuleAction::Reject | RuleAction::Substitute => {
            let mut out = Vec::new();
            for pos in v.start..v.end {
                let sym = &word.symbols[pos];
                for (alt, score) in &sym.alternatives {
                    if *alt == sym.label || script.class_of(alt).is_err() {
                        continue;
                    }
                    let mut w = word.clone();
                    w.symbols[pos].label = alt.clone();
                    w.symbols[pos].score = *score;
                    out.push(w);
                }
            }
            out
        }
        RuleAction::Flag => Vec::new(),
    }
}

/// Applies reorders, merges and alternative substitutions until no enabled
/// rule fires or no rewrite helps. A rewrite is kept only if it removes
/// its violation, adds none, and (when a dictionary is attached and the
/// rule is R8 or R9) yields a dictionary word.
pub fn apply_corrections(word: &RecognizedWord, script: &ScriptModel, enabled: &BTreeSet<RuleId>) -> Result<RecognizedWord> {
    let mut current = RecognizedWord::new(word.symbols.clone());
    let mut violations = check_rules(&current, script, enabled)?;
    for _ in 0..MAX_CORRECTION_ROUNDS {
        let mut changed = false;
        let mut idx = 0;
        while idx < violations.len() {
            let v = violations[idx].clone();
            let mut accepted = None;
            for cand in candidates(&current, &v, script) {
                let dictionary_ok = match (&script.dictionary, v.rule) {
                    (Some(d), RuleId::R8 | RuleId::R9) => d.contains(&cand.text()),
                    _ => true,
                };
                if !dictionary_ok {
                    continue;
                }
                let after = check_rules(&cand, script, enabled)?;
                if improves(&violations, &after, &v, current.symbols.len() != cand.symbols.len() || v.action == RuleAction::Reorder) {
                    accepted = Some((cand, after));
                    break;
                }
            }
            match accepted {
                Some((cand, after)) => {
                    current = cand;
                    violations = after;
                    changed = true;
                    idx = 0;
                }
                None => idx += 1,
            }
        }
        if !changed {
            break;
        }
    }
    current.flags = violations;
    Ok(current)
}

/// Whether `after` fixes `fixed` without introducing anything new. For
/// structural rewrites (positions shift) only the counts per rule are
/// compared.
fn improves(before: &[RuleViolation], after: &[RuleViolation], fixed: &RuleViolation, structural: bool) -> bool {
    if structural {
        let count = |vs: &[RuleViolation], r: RuleId| vs.iter().filter(|v| v.rule == r).count();
        return after.len() < before.len()
            && RuleId::ALL.iter().all(|&r| count(after, r) <= count(before, r))
            && count(after, fixed.rule) < count(before, fixed.rule);
    }
    !after.contains(fixed) && after.iter().all(|v| before.contains(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn takri_like() -> ScriptModel {
        ScriptModel::from_toml(
            r#"
name = "demo"
panchamkshar = ["nya", "nga"]

[classes]
consonant = ["ka", "ga", "ma", "ra", "fa", "nya", "nga"]
independent_vowel = ["a", "u"]
vowel_modifier = ["i", "aa", "e"]
number = ["3", "7"]
delimiter = ["|"]
part = ["viram"]

[[compose]]
parts = ["ra", "viram"]
whole = "ga"

[[reorder]]
symbol = "i"
before = "consonant"
"#,
        )
        .unwrap()
    }

    fn word(labels: &[&str]) -> RecognizedWord {
        RecognizedWord::new(labels.iter().map(|l| RecognizedSymbol::new(*l, Zone::Middle)).collect())
    }

    fn rules(ids: &[RuleId]) -> BTreeSet<RuleId> {
        ids.iter().copied().collect()
    }

    fn check(labels: &[&str], ids: &[RuleId]) -> Vec<RuleViolation> {
        check_rules(&word(labels), &takri_like(), &rules(ids)).unwrap()
    }

    #[test]
    fn rule_ids_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(r.to_string().parse::<RuleId>().unwrap(), r);
        }
        assert!("R11".parse::<RuleId>().is_err());
        assert!("R0".parse::<RuleId>().is_err());
    }

    #[test]
    fn model_toml_round_trips_and_validates() {
        let m = takri_like();
        let back = ScriptModel::from_toml(&m.to_toml()).unwrap();
        assert_eq!(format!("{back:?}"), format!("{m:?}"));
        assert!(ScriptModel::from_toml("[classes]\nconsonant = [\"ka\"]\nnumber = [\"ka\"]\n").is_err());
        assert!(ScriptModel::from_toml("panchamkshar = [\"x\"]\n[classes]\nnumber = [\"x\"]\n").is_err());
    }

    #[test]
    fn r1_two_modifiers_on_one_consonant() {
        let v = check(&["ka", "i", "aa"], &[RuleId::R1]);
        assert_eq!(v, vec![violation(RuleId::R1, 2, 3, RuleAction::Reject)]);
        assert!(check(&["ka", "i", "ga", "aa"], &[RuleId::R1]).is_empty());
    }

    #[test]
    fn r2_delimiter_inside_word() {
        assert_eq!(check(&["ka", "|", "ga"], &[RuleId::R2]).len(), 1);
        assert!(check(&["ka", "ga", "|"], &[RuleId::R2]).is_empty());
    }

    #[test]
    fn r3_repeated_delimiters() {
        assert_eq!(check(&["|", "|"], &RuleId::ALL[..7]), vec![violation(RuleId::R3, 1, 2, RuleAction::Reject)]);
        assert!(check(&["ka", "|"], &[RuleId::R3]).is_empty());
    }

    #[test]
    fn r4_number_inside_letters() {
        assert_eq!(check(&["ka", "3", "ma"], &[RuleId::R4]), vec![violation(RuleId::R4, 1, 2, RuleAction::Substitute)]);
        assert!(check(&["3", "7"], &[RuleId::R4]).is_empty());
        assert_eq!(check(&["3", "ka", "7"], &[RuleId::R4])[0].start, 1);
    }

    #[test]
    fn r5_medial_independent_vowel() {
        assert_eq!(check(&["ka", "a", "ma"], &[RuleId::R5]).len(), 1);
        assert!(check(&["a", "ka", "u"], &[RuleId::R5]).is_empty());
        assert!(check(&["ka", "u", "|"], &[RuleId::R5]).is_empty());
    }

    #[test]
    fn r6_final_panchamkshar() {
        assert_eq!(check(&["ka", "nga"], &[RuleId::R6]).len(), 1);
        assert_eq!(check(&["ka", "nga", "|"], &[RuleId::R6]).len(), 1);
        assert!(check(&["nga", "ka"], &[RuleId::R6]).is_empty());
    }

    #[test]
    fn r7_preposed_modifier() {
        assert_eq!(check(&["i", "fa", "ra"], &[RuleId::R7]), vec![violation(RuleId::R7, 0, 2, RuleAction::Reorder)]);
        assert!(check(&["fa", "i", "ra"], &[RuleId::R7]).is_empty());
        assert_eq!(check(&["ka", "aa", "i", "ra"], &[RuleId::R7]).len(), 1);
    }

    #[test]
    fn unknown_label_is_a_config_error() {
        let err = check_rules(&word(&["ka", "zz"]), &takri_like(), &RuleId::builtin()).unwrap_err();
        assert_eq!(err, Error::UnknownLabel("zz".into()));
    }

    #[test]
    fn dictionary_rules_need_a_dictionary() {
        assert!(matches!(
            check_rules(&word(&["ka"]), &takri_like(), &rules(&[RuleId::R9])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn reorder_is_applied() {
        let out = apply_corrections(&word(&["i", "fa", "ra"]), &takri_like(), &RuleId::builtin()).unwrap();
        assert_eq!(out.labels(), vec!["fa", "i", "ra"]);
        assert!(out.flags.is_empty());
    }

    #[test]
    fn parts_merge_into_whole() {
        let enabled = rules(&[RuleId::R7, RuleId::R8]);
        let out = apply_corrections(&word(&["ra", "viram", "ma"]), &takri_like(), &enabled).unwrap();
        assert_eq!(out.labels(), vec!["ga", "ma"]);
    }

    #[test]
    fn substitution_uses_alternatives_else_flags() {
        let mut w = word(&["ka", "3", "ma"]);
        w.symbols[1].alternatives = vec![("3".into(), 0.9), ("nga".into(), 0.8)];
        let out = apply_corrections(&w, &takri_like(), &RuleId::builtin()).unwrap();
        assert_eq!(out.labels(), vec!["ka", "nga", "ma"]);
        assert!(out.flags.is_empty());

        let out = apply_corrections(&word(&["ka", "3", "ma"]), &takri_like(), &RuleId::builtin()).unwrap();
        assert_eq!(out.labels(), vec!["ka", "3", "ma"]);
        assert_eq!(out.flags.len(), 1);
    }

    #[test]
    fn substitution_never_adds_violations() {
        // "a" would clear R4 but leave an independent vowel mid-word.
        let mut w = word(&["ka", "3", "ma"]);
        w.symbols[1].alternatives = vec![("a".into(), 0.7), ("ga".into(), 0.6)];
        let out = apply_corrections(&w, &takri_like(), &RuleId::builtin()).unwrap();
        assert_eq!(out.labels(), vec!["ka", "ga", "ma"]);
    }

    #[test]
    fn dictionary_validates_candidates() {
        let dict: Arc<dyn Dictionary> = Arc::new(WordList::from_text("gama\n"));
        let script = attach_dictionary(&takri_like(), dict);
        let enabled = rules(&[RuleId::R9]);
        let mut w = word(&["ga", "3"]);
        w.symbols[1].alternatives = vec![("ka".into(), 0.5), ("ma".into(), 0.4)];
        let out = apply_corrections(&w, &script, &enabled).unwrap();
        assert_eq!(out.text(), "gama");

        let empty = attach_dictionary(&takri_like(), Arc::new(WordList::default()));
        let out = apply_corrections(&w, &empty, &enabled).unwrap();
        assert_eq!(out.labels(), vec!["ga", "3"]);
        assert_eq!(out.flags[0].rule, RuleId::R9);
    }

    #[test]
    fn r10_flags_splittable_words() {
        let script = attach_dictionary(&takri_like(), Arc::new(WordList::new(["ka", "ma"])));
        let v = check_rules(&word(&["ka", "ma"]), &script, &rules(&[RuleId::R10])).unwrap();
        assert_eq!(v, vec![violation(RuleId::R10, 0, 2, RuleAction::Flag)]);
    }

    #[test]
    fn clean_word_is_untouched() {
        let w = word(&["ka", "i", "ma", "aa", "|"]);
        assert!(check_rules(&w, &takri_like(), &RuleId::builtin()).unwrap().is_empty());
        assert_eq!(apply_corrections(&w, &takri_like(), &RuleId::builtin()).unwrap(), w);
    }
}
