//! Corpus and WSD advice ingestion, token unification, advice maps.
//!
//! The WSD system and the parser tokenize independently. Advice records are
//! attached to parser tokens in two passes: first by intersecting character
//! spans with identical lemmas, then by identical surface words among the
//! tokens still unmatched.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::hinting::{AdviceMap, Hint};
use crate::lexicon::Token;
use crate::sensemap::{
    best_types, spans_intersect, SenseDistribution, SenseMap, Span, SynsetGraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenSource {
    Parser,
    Wsd,
    Gold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRecord {
    pub source: TokenSource,
    pub index: usize,
    /// Character interval in the raw sentence.
    pub span: Span,
    pub surface: String,
    pub lemma: String,
}

impl TokenRecord {
    pub fn from_token(source: TokenSource, index: usize, token: &Token) -> Self {
        TokenRecord {
            source,
            index,
            span: token.span,
            surface: token.surface.clone(),
            lemma: token.lemma.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnifiedToken {
    pub parser_index: usize,
    pub wsd_index: Option<usize>,
    pub gold_index: Option<usize>,
}

/// One-to-one matching of `other` onto `parser`; entry `i` holds the
/// position in `other` matched to parser token `i`.
pub fn unify(parser: &[TokenRecord], other: &[TokenRecord]) -> Vec<Option<usize>> {
    let mut matched: Vec<Option<usize>> = vec![None; parser.len()];
    let mut used = vec![false; other.len()];
    for (i, p) in parser.iter().enumerate() {
        if let Some(j) = (0..other.len()).find(|&j| {
            !used[j] && spans_intersect(p.span, other[j].span) && p.lemma == other[j].lemma
        }) {
            matched[i] = Some(j);
            used[j] = true;
        }
    }
    for (i, p) in parser.iter().enumerate() {
        if matched[i].is_some() {
            continue;
        }
        if let Some(j) = (0..other.len()).find(|&j| !used[j] && p.surface == other[j].surface) {
            matched[i] = Some(j);
            used[j] = true;
        }
    }
    matched
}

pub fn unify_sentence(
    parser: &[TokenRecord],
    wsd: &[TokenRecord],
    gold: &[TokenRecord],
) -> Vec<UnifiedToken> {
    let w = unify(parser, wsd);
    let g = unify(parser, gold);
    (0..parser.len())
        .map(|i| UnifiedToken {
            parser_index: i,
            wsd_index: w[i],
            gold_index: g[i],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
    /// Gold synset per token, when annotated.
    pub gold: Vec<Option<String>>,
}

impl Sentence {
    pub fn records(&self, source: TokenSource) -> Vec<TokenRecord> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| TokenRecord::from_token(source, i, t))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn from_text(text: &str) -> Result<Self> {
        parse_corpus(text, "<corpus>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        parse_corpus(&read_file(path)?, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Every gold synset must exist in the graph.
    pub fn validate(&self, graph: &SynsetGraph) -> Result<()> {
        for s in &self.sentences {
            for g in s.gold.iter().flatten() {
                if !graph.contains(g) {
                    return Err(Error::UnknownSynset(g.clone()));
                }
            }
        }
        Ok(())
    }
}

fn parse_span(origin: &str, line: usize, start: &str, end: &str) -> Result<Span> {
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(origin, line, format!("bad offset `{s}`")))
    };
    let span = (num(start)?, num(end)?);
    if span.0 >= span.1 {
        return Err(Error::parse(
            origin,
            line,
            format!("empty span [{}, {})", span.0, span.1),
        ));
    }
    Ok(span)
}

fn parse_corpus(text: &str, origin: &str) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let bad = |m: String| Error::parse(origin, line_no, m);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["sentence", id] => corpus.sentences.push(Sentence {
                id: id.to_string(),
                tokens: Vec::new(),
                gold: Vec::new(),
            }),
            ["tok", index, start, end, surface, lemma, pos, rest @ ..] => {
                let sentence = corpus
                    .sentences
                    .last_mut()
                    .ok_or_else(|| bad("token before any sentence header".into()))?;
                let index: usize = index
                    .parse()
                    .map_err(|_| bad(format!("bad index `{index}`")))?;
                if index != sentence.tokens.len() {
                    return Err(bad(format!(
                        "token index {index}, expected {}",
                        sentence.tokens.len()
                    )));
                }
                let gold = match rest {
                    [] => None,
                    [g] => Some(
                        g.strip_prefix("gold=")
                            .filter(|s| !s.is_empty())
                            .ok_or_else(|| bad(format!("expected gold=<synset>, found `{g}`")))?
                            .to_string(),
                    ),
                    _ => return Err(bad("trailing tokens".into())),
                };
                let span = parse_span(origin, line_no, start, end)?;
                sentence.tokens.push(Token::new(surface, lemma, pos, span));
                sentence.gold.push(gold);
            }
            _ => return Err(bad(format!("unrecognised corpus line `{line}`"))),
        }
    }
    Ok(corpus)
}

/// One advised word: a WSD token with its sense distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AdviceRecord {
    pub line: usize,
    pub sentence_id: String,
    pub distribution: SenseDistribution,
}

impl AdviceRecord {
    pub fn token_record(&self, index: usize) -> TokenRecord {
        TokenRecord {
            source: TokenSource::Wsd,
            index,
            span: self.distribution.span,
            surface: self.distribution.word.clone(),
            lemma: self.distribution.word.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdviceFile {
    origin: String,
    by_sentence: BTreeMap<String, Vec<AdviceRecord>>,
}

impl AdviceFile {
    pub fn from_text(text: &str) -> Result<Self> {
        parse_advice(text, "<advice>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        parse_advice(&read_file(path)?, &path.display().to_string())
    }

    pub fn for_sentence(&self, id: &str) -> &[AdviceRecord] {
        self.by_sentence.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.by_sentence.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every advised synset must exist in the graph.
    pub fn validate(&self, graph: &SynsetGraph) -> Result<()> {
        for r in self.by_sentence.values().flatten() {
            for (s, _) in &r.distribution.weights {
                if !graph.contains(s) {
                    return Err(Error::parse(
                        &self.origin,
                        r.line,
                        format!("unknown synset `{s}`"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn parse_advice(text: &str, origin: &str) -> Result<AdviceFile> {
    let mut file = AdviceFile {
        origin: origin.to_string(),
        by_sentence: BTreeMap::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let bad = |m: String| Error::parse(origin, line_no, m);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let ["advice", sid, start, end, word, senses] = tokens.as_slice() else {
            return Err(bad(
                "expected `advice <sentence> <start> <end> <word> <synset>=<p>,..`".into(),
            ));
        };
        let span = parse_span(origin, line_no, start, end)?;
        let mut weights = Vec::new();
        for pair in senses.split(',').filter(|s| !s.is_empty()) {
            let (s, p) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("`{pair}` is not synset=prob")))?;
            let p: f64 = p
                .parse()
                .map_err(|_| bad(format!("bad probability `{p}`")))?;
            weights.push((s.to_string(), p));
        }
        let distribution =
            SenseDistribution::new(word, span, weights).map_err(|e| bad(e.to_string()))?;
        file.by_sentence
            .entry(sid.to_string())
            .or_default()
            .push(AdviceRecord {
                line: line_no,
                sentence_id: sid.to_string(),
                distribution,
            });
    }
    Ok(file)
}

/// Hints for one sentence plus bookkeeping about advice that was lost.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltAdvice {
    pub map: AdviceMap,
    /// Records that matched no parser token.
    pub dropped: usize,
    /// Records whose senses reach no ontology type.
    pub unmapped: usize,
    pub diagnostics: Vec<String>,
}

/// Attaches each record's best types to its unified parser token.
pub fn build_advice_map(
    records: &[AdviceRecord],
    unified: &[UnifiedToken],
    parser_tokens: &[Token],
    senses: &SenseMap,
    alpha: f64,
) -> Result<BuiltAdvice> {
    let mut hints = Vec::new();
    let mut dropped = 0;
    let mut unmapped = 0;
    let mut diagnostics = Vec::new();
    for (k, rec) in records.iter().enumerate() {
        let d = &rec.distribution;
        let Some(u) = unified.iter().find(|u| u.wsd_index == Some(k)) else {
            dropped += 1;
            diagnostics.push(format!(
                "dropped advice line={} word={} span=[{},{}): no matching parser token",
                rec.line, d.word, d.span.0, d.span.1
            ));
            continue;
        };
        let best = best_types(&senses.transform_advice(d)?);
        if best.is_empty() {
            unmapped += 1;
            diagnostics.push(format!("unmapped advice line={} word={}", rec.line, d.word));
            continue;
        }
        let p = u.parser_index;
        for (t, score) in best {
            hints.push(Hint::new(
                &parser_tokens[p].lemma,
                (p, p + 1),
                &t,
                score.min(1.0),
            )?);
        }
    }
    Ok(BuiltAdvice {
        map: AdviceMap::new(hints, alpha)?,
        dropped,
        unmapped,
        diagnostics,
    })
}

/// Unifies a sentence's advice with its tokens and builds the advice map.
pub fn sentence_advice(
    sentence: &Sentence,
    records: &[AdviceRecord],
    senses: &SenseMap,
    alpha: f64,
) -> Result<BuiltAdvice> {
    let parser = sentence.records(TokenSource::Parser);
    let wsd: Vec<TokenRecord> = records
        .iter()
        .enumerate()
        .map(|(i, r)| r.token_record(i))
        .collect();
    let gold = sentence.records(TokenSource::Gold);
    let unified = unify_sentence(&parser, &wsd, &gold);
    build_advice_map(records, &unified, &sentence.tokens, senses, alpha)
}
