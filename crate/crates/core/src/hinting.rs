//! Word-sense hints applied to the parser.
//!
//! Three strategies are supported: prehinting adds score-1 entries for the
//! advised senses, progressive hinting boosts constituents whose head matches
//! a hint as they are built, and fixing restricts advised tokens to the
//! advised senses alone.

use std::collections::{BTreeSet, HashMap};

use crate::error::{check_unit, Error, Result};
use crate::lexicon::{LexicalEntry, Lexicon, Provenance, Token};
use crate::ontology::Ontology;
use crate::parser::{recursive_mean, Constituent, ScoreHook};
use crate::sensemap::{spans_intersect, Span};

/// A `(word, span, type, score)` hint over parser token indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Hint {
    pub word: String,
    pub span: Span,
    pub onto_type: String,
    pub score: f64,
}

impl Hint {
    pub fn new(word: &str, span: Span, onto_type: &str, score: f64) -> Result<Self> {
        check_unit("hint score", score)?;
        if span.0 >= span.1 {
            return Err(Error::OutOfRange {
                what: "hint span length",
                value: span.1 as f64 - span.0 as f64,
            });
        }
        Ok(Hint {
            word: word.to_string(),
            span,
            onto_type: onto_type.to_string(),
            score,
        })
    }

    /// Same word, overlapping spans, and the hinted type is an ancestor (or
    /// the type itself) of the constituent's type.
    pub fn matches(&self, word: &str, span: Span, onto_type: &str, ontology: &Ontology) -> bool {
        self.word == word
            && spans_intersect(self.span, span)
            && ontology.is_a(onto_type, &self.onto_type).unwrap_or(false)
    }
}

/// `α·(s_c·s) + (1 − α)`.
pub fn augment(own: f64, hint: f64, alpha: f64) -> Result<f64> {
    check_unit("constituent score", own)?;
    check_unit("hint score", hint)?;
    check_unit("alpha", alpha)?;
    Ok(blend(own, hint, alpha))
}

fn blend(own: f64, hint: f64, alpha: f64) -> f64 {
    alpha * (own * hint) + (1.0 - alpha)
}

/// All hints for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct AdviceMap {
    hints: Vec<Hint>,
    by_word: HashMap<String, Vec<usize>>,
    alpha: f64,
}

impl AdviceMap {
    pub fn new(hints: Vec<Hint>, alpha: f64) -> Result<Self> {
        check_unit("alpha", alpha)?;
        let mut by_word: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, h) in hints.iter().enumerate() {
            by_word.entry(h.word.clone()).or_default().push(i);
        }
        Ok(AdviceMap {
            hints,
            by_word,
            alpha,
        })
    }

    pub fn empty(alpha: f64) -> Self {
        AdviceMap::new(Vec::new(), alpha).expect("alpha validated by caller")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hints(&self) -> &[Hint] {
        &self.hints
    }

    pub fn is_empty(&self) -> bool {
        self.hints.is_empty()
    }

    /// Highest-scoring matching hint; ties go to the lesser type name.
    pub fn best_match(
        &self,
        word: &str,
        span: Span,
        onto_type: &str,
        ontology: &Ontology,
    ) -> Option<&Hint> {
        self.by_word
            .get(word)?
            .iter()
            .map(|&i| &self.hints[i])
            .filter(|h| h.matches(word, span, onto_type, ontology))
            .min_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.onto_type.cmp(&b.onto_type))
            })
    }

    /// Effective score of `c` given its children's effective scores.
    pub fn progressive_score(
        &self,
        c: &Constituent,
        child_scores: &[f64],
        ontology: &Ontology,
    ) -> f64 {
        let root = match self.best_match(&c.word, c.span, &c.onto_type, ontology) {
            Some(h) => blend(c.own_score, h.score, self.alpha),
            None => c.own_score,
        };
        recursive_mean(root, child_scores)
    }

    /// Advised types per parser token index.
    pub fn advised_types(&self, n_tokens: usize) -> Vec<BTreeSet<&str>> {
        let mut out = vec![BTreeSet::new(); n_tokens];
        for h in &self.hints {
            for slot in out.iter_mut().take(h.span.1.min(n_tokens)).skip(h.span.0) {
                slot.insert(h.onto_type.as_str());
            }
        }
        out
    }
}

/// Progressive hinting as a parser score hook.
#[derive(Debug, Clone, Copy)]
pub struct ProgressiveScorer<'a> {
    pub advice: &'a AdviceMap,
    pub ontology: &'a Ontology,
}

impl ScoreHook for ProgressiveScorer<'_> {
    fn effective_score(&self, c: &Constituent, child_scores: &[f64]) -> f64 {
        self.advice
            .progressive_score(c, child_scores, self.ontology)
    }
}

/// Adds a score-1 entry for every advised type of every advised token.
///
/// An existing entry with the same template and type is upgraded in place.
/// Returns diagnostics for advice that could not be turned into an entry.
pub fn prehint(
    advice: &AdviceMap,
    lexicon: &Lexicon,
    ontology: &Ontology,
    tokens: &[Token],
    entries: &mut [Vec<LexicalEntry>],
) -> Vec<String> {
    let mut diagnostics = Vec::new();
    for (i, types) in advice.advised_types(tokens.len()).into_iter().enumerate() {
        for t in types {
            if !ontology.contains(t) {
                diagnostics.push(format!("prehint token={i} type={t}: unknown type"));
                continue;
            }
            let Some(e) = lexicon.make_entry(ontology, &tokens[i], t, Provenance::Prehint) else {
                diagnostics.push(format!("prehint token={i} type={t}: no template"));
                continue;
            };
            let list = &mut entries[i];
            match list
                .iter_mut()
                .find(|x| x.template == e.template && x.onto_type == e.onto_type)
            {
                Some(existing) => {
                    existing.provenance = Provenance::Prehint;
                    existing.score = 1.0;
                }
                None => list.push(e),
            }
        }
    }
    diagnostics
}

/// Restricts every advised token to entries of an advised type, creating
/// prehint entries when none survive.
pub fn fix_senses(
    advice: &AdviceMap,
    lexicon: &Lexicon,
    ontology: &Ontology,
    tokens: &[Token],
    entries: &mut [Vec<LexicalEntry>],
) -> Vec<String> {
    let mut diagnostics = Vec::new();
    for (i, types) in advice.advised_types(tokens.len()).into_iter().enumerate() {
        if types.is_empty() {
            continue;
        }
        let kept: Vec<LexicalEntry> = entries[i]
            .iter()
            .filter(|e| types.contains(e.onto_type.as_str()))
            .cloned()
            .collect();
        if !kept.is_empty() {
            entries[i] = kept;
            continue;
        }
        let made: Vec<LexicalEntry> = types
            .iter()
            .filter(|t| ontology.contains(t))
            .filter_map(|t| lexicon.make_entry(ontology, &tokens[i], t, Provenance::Prehint))
            .collect();
        if made.is_empty() {
            diagnostics.push(format!(
                "fixed token={i}: no entry for advised types, left unchanged"
            ));
        } else {
            entries[i] = made;
        }
    }
    diagnostics
}
