//! Parser variants, sense-agreement scoring and the metrics report.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::advice::{sentence_advice, AdviceFile, Corpus, Sentence};
use crate::error::{check_unit, Result};
use crate::hinting::{fix_senses, prehint, AdviceMap, Hint, ProgressiveScorer};
use crate::lexicon::{prune_entries, LexicalEntry, Lexicon, Token};
use crate::ontology::{FactorizedOntology, Ontology, FALLBACK_TYPE};
use crate::parser::{Grammar, ParseResult, Parser, ParserConfig, PlainScorer};
use crate::sensemap::SenseMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Plain,
    Pre,
    Prog,
    Comb,
    Fixed,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Plain,
        Variant::Pre,
        Variant::Prog,
        Variant::Comb,
        Variant::Fixed,
    ];

    pub fn prehints(self) -> bool {
        matches!(self, Variant::Pre | Variant::Comb)
    }

    pub fn progressive(self) -> bool {
        matches!(self, Variant::Prog | Variant::Comb)
    }

    pub fn fixes(self) -> bool {
        self == Variant::Fixed
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Pre => "pre",
            Variant::Prog => "prog",
            Variant::Comb => "comb",
            Variant::Fixed => "fixed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                format!("unknown variant `{s}` (expected plain, pre, prog, comb or fixed)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    pub variant: Variant,
    /// Progressive blending weight.
    pub alpha: f64,
    pub parser: ParserConfig,
    /// Entries kept per token after lexical pruning (prehints excluded).
    pub entry_keep: usize,
}

impl VariantConfig {
    pub fn new(variant: Variant) -> Self {
        VariantConfig {
            variant,
            alpha: 0.5,
            parser: ParserConfig::default(),
            entry_keep: 3,
        }
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        VariantConfig { variant, ..self }
    }
}

/// Everything one parse needs, loaded once and shared read-only.
#[derive(Debug, Clone)]
pub struct Resources {
    pub ontology: Ontology,
    pub senses: SenseMap,
    pub lexicon: Lexicon,
    pub grammar: Grammar,
    pub factors: FactorizedOntology,
}

impl Resources {
    pub fn new(ontology: Ontology, senses: SenseMap, lexicon: Lexicon, grammar: Grammar) -> Self {
        let factors = ontology.factorize();
        Resources {
            ontology,
            senses,
            lexicon,
            grammar,
            factors,
        }
    }

    /// Per-token entry lists for a variant.
    pub fn entries_for(
        &self,
        tokens: &[Token],
        advice: &AdviceMap,
        config: &VariantConfig,
    ) -> (Vec<Vec<LexicalEntry>>, Vec<String>) {
        let mut entries: Vec<Vec<LexicalEntry>> = tokens
            .iter()
            .map(|t| self.lexicon.candidates(t, &self.senses, &self.ontology))
            .collect();
        let mut diagnostics = Vec::new();
        if config.variant.prehints() {
            diagnostics.extend(prehint(
                advice,
                &self.lexicon,
                &self.ontology,
                tokens,
                &mut entries,
            ));
        }
        let mut entries: Vec<Vec<LexicalEntry>> = entries
            .into_iter()
            .map(|list| prune_entries(list, config.entry_keep))
            .collect();
        if config.variant.fixes() {
            diagnostics.extend(fix_senses(
                advice,
                &self.lexicon,
                &self.ontology,
                tokens,
                &mut entries,
            ));
        }
        (entries, diagnostics)
    }

    /// Parses one tokenized sentence under a variant.
    pub fn parse(
        &self,
        sentence_id: &str,
        tokens: &[Token],
        advice: &AdviceMap,
        config: &VariantConfig,
    ) -> Result<(ParseResult, Vec<String>)> {
        let (entries, diagnostics) = self.entries_for(tokens, advice, config);
        let parser = Parser::new(&self.grammar, &self.ontology, config.parser);
        let result = if config.variant.progressive() {
            let hook = ProgressiveScorer {
                advice,
                ontology: &self.ontology,
            };
            parser.parse(sentence_id, tokens, &entries, &hook)?
        } else {
            parser.parse(sentence_id, tokens, &entries, &PlainScorer)?
        };
        Ok((result, diagnostics))
    }

    /// Type a gold synset subsumes under.
    pub fn gold_type(&self, synset: &str) -> Result<Option<&str>> {
        self.senses.assign_type(synset)
    }
}

/// One scored word.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub sentence_id: String,
    pub token: usize,
    pub gold_type: String,
    pub predicted: String,
    /// Best advised types on this token.
    pub advised: Vec<String>,
}

impl Instance {
    pub fn attempted(&self) -> bool {
        self.predicted != FALLBACK_TYPE
    }
}

/// Gold instances of a parsed sentence and the number of gold tags excluded
/// because they reach no ontology type.
pub fn collect_instances(
    resources: &Resources,
    sentence: &Sentence,
    parse: &ParseResult,
    advice: &AdviceMap,
) -> Result<(Vec<Instance>, usize)> {
    let advised = advice.advised_types(sentence.tokens.len());
    let mut out = Vec::new();
    let mut excluded = 0;
    for (i, gold) in sentence.gold.iter().enumerate() {
        let Some(gold) = gold else { continue };
        let Some(gold_type) = resources.gold_type(gold)? else {
            excluded += 1;
            continue;
        };
        let predicted = parse
            .logical_form
            .node_at(i)
            .map_or(FALLBACK_TYPE, |n| n.onto_type.as_str());
        out.push(Instance {
            sentence_id: sentence.id.clone(),
            token: i,
            gold_type: gold_type.to_string(),
            predicted: predicted.to_string(),
            advised: advised[i].iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok((out, excluded))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub variant: Variant,
    pub f_score: f64,
    pub mean_wu_palmer: f64,
    pub mean_semfac: f64,
    /// Sentences without a spanning parse.
    pub frag: usize,
    pub attempted: usize,
    pub correct: usize,
    pub scored: usize,
    pub dropped_advice: usize,
}

impl ScoreRow {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.attempted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.scored)
    }

    fn tsv(&self) -> String {
        format!(
            "{}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}\t{}",
            self.variant,
            self.f_score,
            self.mean_wu_palmer,
            self.mean_semfac,
            self.frag,
            self.attempted,
            self.scored,
            self.dropped_advice
        )
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Exact-agreement F plus mean Wu-Palmer and SemFac over attempted
/// instances. Fallback-typed predictions count as abstentions.
pub fn score_run(
    variant: Variant,
    instances: &[Instance],
    parses: &[&ParseResult],
    ontology: &Ontology,
    factors: &FactorizedOntology,
) -> Result<ScoreRow> {
    let mut attempted = 0;
    let mut correct = 0;
    let mut wup = 0.0;
    let mut semfac = 0.0;
    for inst in instances.iter().filter(|i| i.attempted()) {
        attempted += 1;
        if inst.predicted == inst.gold_type {
            correct += 1;
        }
        wup += ontology.wu_palmer(&inst.predicted, &inst.gold_type)?;
        semfac += factors.semfac_similarity(&inst.predicted, &inst.gold_type)?;
    }
    let precision = ratio(correct, attempted);
    let recall = ratio(correct, instances.len());
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let mean = |total: f64| {
        if attempted == 0 {
            0.0
        } else {
            total / attempted as f64
        }
    };
    Ok(ScoreRow {
        variant,
        f_score,
        mean_wu_palmer: mean(wup),
        mean_semfac: mean(semfac),
        frag: parses.iter().filter(|p| !p.spanning).count(),
        attempted,
        correct,
        scored: instances.len(),
        dropped_advice: 0,
    })
}

pub const REPORT_HEADER: &str =
    "variant\tf_score\twu_palmer\tsemfac\tfrag\tattempted\tscored\tdropped_advice";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreReport {
    pub rows: Vec<ScoreRow>,
}

impl ScoreReport {
    pub fn row(&self, variant: Variant) -> Option<&ScoreRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.tsv());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SentenceRun {
    pub sentence_id: String,
    pub parse: ParseResult,
    pub hints: Vec<Hint>,
    pub instances: Vec<Instance>,
    pub excluded_gold: usize,
    pub dropped_advice: usize,
    pub role_violations: Vec<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct VariantRun {
    pub variant: Variant,
    pub sentences: Vec<SentenceRun>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: ScoreReport,
    pub runs: Vec<VariantRun>,
    pub diagnostics: Vec<String>,
}

impl Experiment {
    pub fn run(&self, variant: Variant) -> Option<&VariantRun> {
        self.runs.iter().find(|r| r.variant == variant)
    }
}

fn run_sentence(
    resources: &Resources,
    sentence: &Sentence,
    advice: &AdviceFile,
    config: &VariantConfig,
) -> Result<SentenceRun> {
    let built = sentence_advice(
        sentence,
        advice.for_sentence(&sentence.id),
        &resources.senses,
        config.alpha,
    )?;
    let (parse, mut diagnostics) =
        resources.parse(&sentence.id, &sentence.tokens, &built.map, config)?;
    let (instances, excluded_gold) = collect_instances(resources, sentence, &parse, &built.map)?;
    let role_violations = parse.logical_form.role_violations(&resources.ontology);
    let mut lines = built.diagnostics;
    lines.append(&mut diagnostics);
    lines.extend(parse.rejections.iter().map(|r| r.to_string()));
    lines.extend(
        role_violations
            .iter()
            .map(|v| format!("role violation {v}")),
    );
    if !parse.spanning {
        lines.push(format!("fragmented into {} pieces", parse.fragments.len()));
    }
    Ok(SentenceRun {
        sentence_id: sentence.id.clone(),
        hints: built.map.hints().to_vec(),
        parse,
        instances,
        excluded_gold,
        dropped_advice: built.dropped,
        role_violations,
        diagnostics: lines,
    })
}

/// Parses and scores the corpus under each variant.
///
/// Sentences are processed in parallel; results are gathered in corpus
/// order so the report and diagnostics are deterministic.
pub fn run_experiment(
    resources: &Resources,
    corpus: &Corpus,
    advice: &AdviceFile,
    variants: &[Variant],
    base: &VariantConfig,
) -> Result<Experiment> {
    check_unit("alpha", base.alpha)?;
    base.parser.validate()?;
    corpus.validate(resources.senses.graph())?;
    advice.validate(resources.senses.graph())?;

    let mut diagnostics: Vec<String> = resources
        .senses
        .ambiguities()
        .iter()
        .map(|a| {
            format!(
                "ambiguous-subsumption synset={} candidates={} chosen={}",
                a.synset,
                a.candidates.join(","),
                a.chosen
            )
        })
        .collect();

    let mut report = ScoreReport::default();
    let mut runs = Vec::new();
    for &variant in variants {
        let config = base.with_variant(variant);
        let sentences: Vec<SentenceRun> = corpus
            .sentences
            .par_iter()
            .map(|s| run_sentence(resources, s, advice, &config))
            .collect::<Result<_>>()?;
        let instances: Vec<Instance> = sentences.iter().flat_map(|s| s.instances.clone()).collect();
        let parses: Vec<&ParseResult> = sentences.iter().map(|s| &s.parse).collect();
        let mut row = score_run(
            variant,
            &instances,
            &parses,
            &resources.ontology,
            &resources.factors,
        )?;
        row.dropped_advice = sentences.iter().map(|s| s.dropped_advice).sum();
        report.rows.push(row);
        for s in &sentences {
            if s.excluded_gold > 0 {
                diagnostics.push(format!(
                    "variant={variant} sentence={} excluded-gold={}",
                    s.sentence_id, s.excluded_gold
                ));
            }
            for line in &s.diagnostics {
                diagnostics.push(format!(
                    "variant={variant} sentence={} {line}",
                    s.sentence_id
                ));
            }
        }
        runs.push(VariantRun { variant, sentences });
    }
    Ok(Experiment {
        report,
        runs,
        diagnostics,
    })
}
