//! Lexical entries: `(features, template, type)` readings of a word.
//!
//! Core entries come from the lexicon file. Further candidates are generated
//! from the synset graph, borrowing a syntactic template from a core entry
//! whose type is an ancestor of the generated sense.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use crate::error::{check_unit, read_file, Error, Result};
use crate::ontology::Ontology;
use crate::sensemap::{SenseMap, Span};

/// One token as the parser sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    /// Character interval in the raw sentence.
    pub span: Span,
}

impl Token {
    pub fn new(surface: &str, lemma: &str, pos: &str, span: Span) -> Self {
        Token {
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            span,
        }
    }
}

/// Maps a part-of-speech tag onto a syntactic category.
///
/// Penn-style tags are folded (`NNS` → `N`, `VBD` → `V`, ...); anything else
/// is taken as a category name.
pub fn pos_category(pos: &str) -> String {
    let up = pos.to_ascii_uppercase();
    let folded = match up.as_str() {
        "PRP" | "PRP$" | "WP" => "PRO",
        "DT" | "PDT" | "WDT" => "D",
        "IN" | "TO" => "P",
        "MD" => "AUX",
        t if t.starts_with("NN") => "N",
        t if t.starts_with("VB") => "V",
        t if t.starts_with("JJ") => "ADJ",
        t if t.starts_with("RB") => "ADV",
        t => t,
    };
    folded.to_string()
}

pub fn pos_compatible(pos: &str, category: &str) -> bool {
    pos_category(pos) == category
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntacticTemplate {
    pub name: String,
    pub category: String,
    /// `(syntactic position, role name)` pairs in argument order.
    pub arg_slots: Vec<(String, String)>,
}

impl SyntacticTemplate {
    /// True when every slot role exists among `onto_type`'s effective roles.
    pub fn fits(&self, ontology: &Ontology, onto_type: &str) -> bool {
        self.arg_slots
            .iter()
            .all(|(_, role)| matches!(ontology.effective_role(onto_type, role), Ok(Some(_))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Core,
    Generated,
    Prehint,
}

impl Provenance {
    /// Tie-break rank when pruning: core, then prehint, then generated.
    fn rank(self) -> u8 {
        match self {
            Provenance::Core => 0,
            Provenance::Prehint => 1,
            Provenance::Generated => 2,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Core => "core",
            Provenance::Generated => "generated",
            Provenance::Prehint => "prehint",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalEntry {
    pub word: String,
    pub features: BTreeMap<String, String>,
    pub template: String,
    /// Category of the template, cached for chart seeding.
    pub category: String,
    pub onto_type: String,
    pub score: f64,
    pub provenance: Provenance,
    /// Frequency prior from the lexicon file.
    pub freq: Option<f64>,
}

impl LexicalEntry {
    fn same_reading(&self, other: &LexicalEntry) -> bool {
        self.template == other.template && self.onto_type == other.onto_type
    }
}

/// Constants of the entry scoring heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringPriors {
    pub core: f64,
    pub generated: f64,
    /// Multiplier applied when the template category disagrees with the tag.
    pub incompatible: f64,
}

impl Default for ScoringPriors {
    fn default() -> Self {
        ScoringPriors {
            core: 0.8,
            generated: 0.5,
            incompatible: 0.5,
        }
    }
}

/// Heuristic score of an entry for a token.
///
/// The provenance prior is averaged with the frequency prior when the entry
/// has one; a category/tag mismatch scales the result down. Prehint entries
/// always score 1.
pub fn score_entry(entry: &LexicalEntry, token: &Token, priors: &ScoringPriors) -> f64 {
    let prior = match entry.provenance {
        Provenance::Prehint => return 1.0,
        Provenance::Core => priors.core,
        Provenance::Generated => priors.generated,
    };
    let base = match entry.freq {
        Some(f) => (prior + f) / 2.0,
        None => prior,
    };
    let compat = if pos_compatible(&token.pos, &entry.category) {
        1.0
    } else {
        priors.incompatible
    };
    (base * compat).clamp(0.0, 1.0)
}

fn prune_order(a: &LexicalEntry, b: &LexicalEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.provenance.rank().cmp(&b.provenance.rank()))
        .then_with(|| a.onto_type.cmp(&b.onto_type))
        .then_with(|| a.template.cmp(&b.template))
}

/// Keeps the best `keep` entries plus every prehint entry.
pub fn prune_entries(mut entries: Vec<LexicalEntry>, keep: usize) -> Vec<LexicalEntry> {
    assert!(keep >= 1, "keep must be positive");
    entries.sort_by(prune_order);
    let mut kept = 0;
    entries.retain(|e| {
        if e.provenance == Provenance::Prehint {
            true
        } else if kept < keep {
            kept += 1;
            true
        } else {
            false
        }
    });
    entries
}

/// Core entries, templates and per-category default templates.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    templates: BTreeMap<String, SyntacticTemplate>,
    defaults: BTreeMap<String, String>,
    entries: Vec<LexicalEntry>,
    by_word: HashMap<String, Vec<usize>>,
    by_type: HashMap<String, Vec<usize>>,
    priors: ScoringPriors,
}

impl Lexicon {
    pub fn new(
        templates: Vec<SyntacticTemplate>,
        defaults: Vec<(String, String)>,
        entries: Vec<LexicalEntry>,
        ontology: &Ontology,
    ) -> Result<Self> {
        let mut lex = Lexicon::default();
        for t in templates {
            let name = t.name.clone();
            if lex.templates.insert(name.clone(), t).is_some() {
                return Err(Error::structure(&name, "duplicate template"));
            }
        }
        for (cat, name) in defaults {
            let t = lex
                .templates
                .get(&name)
                .ok_or_else(|| Error::structure(&name, "unknown default template"))?;
            if t.category != cat {
                return Err(Error::structure(
                    &name,
                    format!("default for `{cat}` has category `{}`", t.category),
                ));
            }
            lex.defaults.insert(cat, name);
        }
        for e in entries {
            lex.validate(&e, ontology)?;
            let duplicate = lex
                .by_word
                .get(&e.word)
                .into_iter()
                .flatten()
                .any(|&i| lex.entries[i].same_reading(&e));
            if duplicate {
                return Err(Error::structure(
                    &e.onto_type,
                    format!(
                        "duplicate entry for `{}` with template `{}`",
                        e.word, e.template
                    ),
                ));
            }
            let i = lex.entries.len();
            lex.by_word.entry(e.word.clone()).or_default().push(i);
            lex.by_type.entry(e.onto_type.clone()).or_default().push(i);
            lex.entries.push(e);
        }
        Ok(lex)
    }

    fn validate(&self, e: &LexicalEntry, ontology: &Ontology) -> Result<()> {
        let t = self.templates.get(&e.template).ok_or_else(|| {
            Error::structure(&e.template, format!("unknown template for `{}`", e.word))
        })?;
        if !ontology.contains(&e.onto_type) {
            return Err(Error::UnknownType(e.onto_type.clone()));
        }
        if t.category != e.category {
            return Err(Error::structure(
                &e.onto_type,
                format!(
                    "entry `{}` category `{}` disagrees with template `{}`",
                    e.word, e.category, t.name
                ),
            ));
        }
        if !t.fits(ontology, &e.onto_type) {
            return Err(Error::structure(
                &e.onto_type,
                format!("template `{}` names a role the type lacks", t.name),
            ));
        }
        Ok(())
    }

    pub fn from_text(text: &str, ontology: &Ontology) -> Result<Self> {
        parse_lexicon(text, "<lexicon>", ontology)
    }

    pub fn load(path: impl AsRef<Path>, ontology: &Ontology) -> Result<Self> {
        let path = path.as_ref();
        parse_lexicon(&read_file(path)?, &path.display().to_string(), ontology)
    }

    pub fn priors(&self) -> &ScoringPriors {
        &self.priors
    }

    pub fn with_priors(mut self, priors: ScoringPriors) -> Self {
        self.priors = priors;
        self
    }

    pub fn template(&self, name: &str) -> Option<&SyntacticTemplate> {
        self.templates.get(name)
    }

    pub fn default_template(&self, category: &str) -> Option<&SyntacticTemplate> {
        self.defaults
            .get(category)
            .and_then(|n| self.templates.get(n))
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn knows_word(&self, word: &str) -> bool {
        self.by_word.contains_key(word)
    }

    /// Core entries for `word` whose category agrees with `pos`.
    pub fn lookup(&self, word: &str, pos: &str) -> Vec<LexicalEntry> {
        let cat = pos_category(pos);
        self.by_word
            .get(word)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
            .filter(|e| e.category == cat)
            .map(|e| {
                let mut e = e.clone();
                e.features.insert("pos".into(), pos.to_string());
                e
            })
            .collect()
    }

    /// Template for a sense of category `category` typed `onto_type`.
    ///
    /// The nearest ancestor-or-self of the type carrying a core entry of the
    /// right category donates its template (least template name on ties);
    /// otherwise the category default is used.
    pub fn template_for(
        &self,
        ontology: &Ontology,
        onto_type: &str,
        category: &str,
    ) -> Option<&SyntacticTemplate> {
        let ancestors = ontology.ancestors(onto_type).ok()?;
        for a in ancestors {
            let donor = self
                .by_type
                .get(a)
                .into_iter()
                .flatten()
                .map(|&i| &self.entries[i])
                .filter(|e| e.category == category)
                .map(|e| &self.templates[&e.template])
                .filter(|t| t.fits(ontology, onto_type))
                .min_by(|x, y| x.name.cmp(&y.name));
            if donor.is_some() {
                return donor;
            }
        }
        self.default_template(category)
            .filter(|t| t.fits(ontology, onto_type))
    }

    /// An entry for `token` typed `onto_type` with the given provenance.
    pub fn make_entry(
        &self,
        ontology: &Ontology,
        token: &Token,
        onto_type: &str,
        provenance: Provenance,
    ) -> Option<LexicalEntry> {
        let cat = pos_category(&token.pos);
        let template = self.template_for(ontology, onto_type, &cat)?;
        let mut e = LexicalEntry {
            word: token.lemma.clone(),
            features: BTreeMap::from([("pos".to_string(), token.pos.clone())]),
            template: template.name.clone(),
            category: template.category.clone(),
            onto_type: onto_type.to_string(),
            score: 0.0,
            provenance,
            freq: None,
        };
        e.score = score_entry(&e, token, &self.priors);
        Some(e)
    }

    /// Candidate entries derived from the synsets listing the word.
    pub fn generate_entries(
        &self,
        token: &Token,
        senses: &SenseMap,
        ontology: &Ontology,
    ) -> Vec<LexicalEntry> {
        let core = self.lookup(&token.lemma, &token.pos);
        let mut out: Vec<LexicalEntry> = Vec::new();
        for synset in senses.graph().containing(&token.lemma) {
            let Ok(Some(t)) = senses.assign_type(&synset.id) else {
                continue;
            };
            let Some(e) = self.make_entry(ontology, token, t, Provenance::Generated) else {
                continue;
            };
            if core.iter().chain(out.iter()).any(|c| c.same_reading(&e)) {
                continue;
            }
            out.push(e);
        }
        out
    }

    /// Scored core and generated entries for one token, before pruning.
    pub fn candidates(
        &self,
        token: &Token,
        senses: &SenseMap,
        ontology: &Ontology,
    ) -> Vec<LexicalEntry> {
        let mut entries = self.lookup(&token.lemma, &token.pos);
        for e in &mut entries {
            e.score = score_entry(e, token, &self.priors);
        }
        entries.extend(self.generate_entries(token, senses, ontology));
        entries
    }
}

fn parse_lexicon(text: &str, origin: &str, ontology: &Ontology) -> Result<Lexicon> {
    let mut templates = Vec::new();
    let mut defaults = Vec::new();
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let bad = |msg: String| Error::parse(origin, line_no, msg);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["entry", word, "cat", cat, "template", template, "type", ty, rest @ ..] => {
                let freq = match rest {
                    [] => None,
                    ["freq", f] => {
                        let f: f64 = f.parse().map_err(|_| bad(format!("bad frequency `{f}`")))?;
                        Some(check_unit("frequency", f).map_err(|e| bad(e.to_string()))?)
                    }
                    _ => return Err(bad("trailing tokens after entry".into())),
                };
                entries.push(LexicalEntry {
                    word: word.to_string(),
                    features: BTreeMap::new(),
                    template: template.to_string(),
                    category: cat.to_string(),
                    onto_type: ty.to_string(),
                    score: 0.0,
                    provenance: Provenance::Core,
                    freq,
                });
            }
            ["template", name, "cat", cat, "slots", slots] => {
                let mut arg_slots = Vec::new();
                if *slots != "-" {
                    for slot in slots.split(',').filter(|s| !s.is_empty()) {
                        let (p, r) = slot
                            .split_once(':')
                            .ok_or_else(|| bad(format!("slot `{slot}` is not position:role")))?;
                        arg_slots.push((p.to_string(), r.to_string()));
                    }
                }
                templates.push(SyntacticTemplate {
                    name: name.to_string(),
                    category: cat.to_string(),
                    arg_slots,
                });
            }
            ["default-template", cat, name] => defaults.push((cat.to_string(), name.to_string())),
            _ => return Err(bad(format!("unrecognised lexicon line `{line}`"))),
        }
    }
    Lexicon::new(templates, defaults, entries, ontology)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensemap::{Synset, SynsetGraph};

    const ONTOLOGY: &str = "\
type root parent -
type phys-obj parent root
type freshwater-fish parent phys-obj synsets fish.n.01
type musical-instrument parent phys-obj synsets instrument.n.01
type situation parent root roles agent:phys-obj
type cook-type parent situation roles affected:phys-obj
";

    const LEXICON: &str = "\
template transitive cat V slots subj:agent,obj:affected
template count-noun cat N slots -
template mass-noun cat N slots -
default-template N count-noun
entry cook cat V template transitive type cook-type
entry bass cat N template count-noun type freshwater-fish freq 0.9
entry bass cat N template count-noun type musical-instrument freq 0.2
entry sax cat N template mass-noun type musical-instrument
";

    fn resources() -> (Ontology, Lexicon, SenseMap) {
        let o = Ontology::from_text(ONTOLOGY).unwrap();
        let lex = Lexicon::from_text(LEXICON, &o).unwrap();
        let graph = SynsetGraph::new(vec![
            Synset::new("fish.n.01", &["fish"], &[]),
            Synset::new("instrument.n.01", &["instrument"], &[]),
            Synset::new("bass.n.08", &["bass"], &["fish.n.01"]),
            Synset::new("bass.n.07", &["bass"], &["instrument.n.01"]),
            Synset::new("trout.n.01", &["trout"], &["fish.n.01"]),
            Synset::new("zzz.n.01", &["zzz"], &[]),
        ])
        .unwrap();
        let senses = SenseMap::new(graph, &o);
        (o, lex, senses)
    }

    fn tok(lemma: &str, pos: &str) -> Token {
        Token::new(lemma, lemma, pos, (0, lemma.len()))
    }

    #[test]
    fn lookup_by_word_and_category() {
        let (_, lex, _) = resources();
        let cook = lex.lookup("cook", "V");
        assert_eq!(cook.len(), 1);
        assert_eq!(cook[0].onto_type, "cook-type");
        assert!(lex.lookup("zzz", "N").is_empty());
        let bass: Vec<_> = lex
            .lookup("bass", "NN")
            .into_iter()
            .map(|e| e.onto_type)
            .collect();
        assert_eq!(bass, vec!["freshwater-fish", "musical-instrument"]);
        assert!(lex.lookup("bass", "V").is_empty());
    }

    #[test]
    fn generation_suppresses_core_duplicates() {
        let (o, lex, senses) = resources();
        assert!(lex
            .generate_entries(&tok("bass", "N"), &senses, &o)
            .is_empty());
        let trout = lex.generate_entries(&tok("trout", "N"), &senses, &o);
        assert_eq!(trout.len(), 1);
        assert_eq!(trout[0].onto_type, "freshwater-fish");
        assert_eq!(trout[0].provenance, Provenance::Generated);
        assert_eq!(trout[0].template, "count-noun");
        assert!((trout[0].score - 0.5).abs() < 1e-12);
        assert!(lex
            .generate_entries(&tok("nothing", "N"), &senses, &o)
            .is_empty());
        assert!(lex
            .generate_entries(&tok("zzz", "N"), &senses, &o)
            .is_empty());
    }

    #[test]
    fn generation_without_core_entries_yields_both_readings() {
        let (o, _, senses) = resources();
        let bare = Lexicon::from_text(
            "template count-noun cat N slots -\ndefault-template N count-noun\n",
            &o,
        )
        .unwrap();
        let types: Vec<_> = bare
            .generate_entries(&tok("bass", "N"), &senses, &o)
            .into_iter()
            .map(|e| e.onto_type)
            .collect();
        assert_eq!(types, vec!["musical-instrument", "freshwater-fish"]);
    }

    #[test]
    fn donor_template_prefers_nearest_ancestor() {
        let (o, lex, _) = resources();
        // sax donates mass-noun but count-noun sorts first at the same type.
        let t = lex.template_for(&o, "musical-instrument", "N").unwrap();
        assert_eq!(t.name, "count-noun");
        assert_eq!(
            lex.template_for(&o, "phys-obj", "N").unwrap().name,
            "count-noun"
        );
        assert!(lex.template_for(&o, "phys-obj", "V").is_none());
    }

    #[test]
    fn scoring_rule() {
        let (o, lex, _) = resources();
        let priors = ScoringPriors::default();
        let mut core = lex.lookup("cook", "V").remove(0);
        assert!((score_entry(&core, &tok("cook", "V"), &priors) - 0.8).abs() < 1e-12);
        assert!((score_entry(&core, &tok("cook", "N"), &priors) - 0.4).abs() < 1e-12);
        core.freq = Some(0.9);
        assert!((score_entry(&core, &tok("cook", "V"), &priors) - 0.85).abs() < 1e-12);
        let gen = lex
            .make_entry(&o, &tok("bass", "N"), "phys-obj", Provenance::Generated)
            .unwrap();
        assert!((gen.score - 0.5).abs() < 1e-12);
        let pre = lex
            .make_entry(&o, &tok("bass", "N"), "phys-obj", Provenance::Prehint)
            .unwrap();
        assert_eq!(pre.score, 1.0);
    }

    fn entry(ty: &str, score: f64, provenance: Provenance) -> LexicalEntry {
        LexicalEntry {
            word: "w".into(),
            features: BTreeMap::new(),
            template: "t".into(),
            category: "N".into(),
            onto_type: ty.into(),
            score,
            provenance,
            freq: None,
        }
    }

    #[test]
    fn pruning_keeps_best_and_prehints() {
        let five: Vec<_> = [0.1, 0.9, 0.5, 0.7, 0.3]
            .iter()
            .enumerate()
            .map(|(i, &s)| entry(&format!("t{i}"), s, Provenance::Core))
            .collect();
        let kept: Vec<f64> = prune_entries(five, 3).iter().map(|e| e.score).collect();
        assert_eq!(kept, vec![0.9, 0.7, 0.5]);

        let two = vec![
            entry("a", 0.2, Provenance::Core),
            entry("b", 0.4, Provenance::Core),
        ];
        assert_eq!(prune_entries(two, 3).len(), 2);

        let four = vec![
            entry("a", 0.8, Provenance::Core),
            entry("b", 0.6, Provenance::Generated),
            entry("c", 1.0, Provenance::Prehint),
            entry("d", 0.9, Provenance::Core),
        ];
        let kept: Vec<_> = prune_entries(four, 1)
            .into_iter()
            .map(|e| e.onto_type)
            .collect();
        assert_eq!(kept, vec!["c", "d"]);
    }

    #[test]
    fn pruning_tie_breaks() {
        let tied = vec![
            entry("z", 0.5, Provenance::Generated),
            entry("y", 0.5, Provenance::Core),
            entry("x", 0.5, Provenance::Generated),
        ];
        let kept: Vec<_> = prune_entries(tied, 2)
            .into_iter()
            .map(|e| e.onto_type)
            .collect();
        assert_eq!(kept, vec!["y", "x"]);
    }

    #[test]
    fn rejects_bad_lexicon() {
        let o = Ontology::from_text(ONTOLOGY).unwrap();
        let err =
            Lexicon::from_text("entry x cat N template nope type phys-obj\n", &o).unwrap_err();
        assert!(err.to_string().contains("unknown template"));
        let err = Lexicon::from_text(
            "template transitive cat V slots subj:agent,obj:affected\n\
             entry sleep cat V template transitive type situation\n",
            &o,
        )
        .unwrap_err();
        assert!(err.to_string().contains("role"), "{err}");
        let err =
            Lexicon::from_text("entry x cat N template t type phys-obj freq 2\n", &o).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn pos_folding() {
        assert_eq!(pos_category("NNS"), "N");
        assert_eq!(pos_category("VBD"), "V");
        assert_eq!(pos_category("PRP"), "PRO");
        assert_eq!(pos_category("DT"), "D");
        assert_eq!(pos_category("n"), "N");
    }
}
