//! Lexical sense graph and its subsumption mapping onto ontology types.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::ontology::Ontology;

/// One node of the multiple-inheritance sense graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: String,
    pub lemmas: BTreeSet<String>,
    pub hypernyms: BTreeSet<String>,
}

impl Synset {
    pub fn new(id: &str, lemmas: &[&str], hypernyms: &[&str]) -> Self {
        Synset {
            id: id.to_string(),
            lemmas: lemmas.iter().map(|s| s.to_string()).collect(),
            hypernyms: hypernyms.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Acyclic hypernym graph with a lemma index.
#[derive(Debug, Clone, Default)]
pub struct SynsetGraph {
    synsets: Vec<Synset>,
    index: HashMap<String, usize>,
    hypernyms: Vec<Vec<usize>>,
    by_lemma: BTreeMap<String, Vec<usize>>,
}

impl SynsetGraph {
    pub fn new(synsets: Vec<Synset>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, s) in synsets.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                return Err(Error::SynsetGraph {
                    id: s.id.clone(),
                    message: "duplicate synset id".into(),
                });
            }
        }
        let mut hypernyms = Vec::with_capacity(synsets.len());
        for s in &synsets {
            let mut ids = Vec::new();
            for h in &s.hypernyms {
                let &hid = index.get(h).ok_or_else(|| Error::SynsetGraph {
                    id: s.id.clone(),
                    message: format!("unknown hypernym `{h}`"),
                })?;
                ids.push(hid);
            }
            hypernyms.push(ids);
        }

        // Iterative three-colour DFS for cycle detection.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut mark = vec![Mark::New; synsets.len()];
        for start in 0..synsets.len() {
            if mark[start] != Mark::New {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            mark[start] = Mark::Open;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(&h) = hypernyms[node].get(*next) {
                    *next += 1;
                    match mark[h] {
                        Mark::Open => {
                            return Err(Error::SynsetGraph {
                                id: synsets[h].id.clone(),
                                message: "hypernym cycle".into(),
                            })
                        }
                        Mark::New => {
                            mark[h] = Mark::Open;
                            stack.push((h, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[node] = Mark::Done;
                    stack.pop();
                }
            }
        }

        let mut by_lemma: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, s) in synsets.iter().enumerate() {
            for l in &s.lemmas {
                by_lemma.entry(l.clone()).or_default().push(i);
            }
        }
        for list in by_lemma.values_mut() {
            list.sort_by(|&a, &b| synsets[a].id.cmp(&synsets[b].id));
        }
        Ok(SynsetGraph {
            synsets,
            index,
            hypernyms,
            by_lemma,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_synsets(text, "<synsets>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        parse_synsets(&read_file(path)?, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Result<&Synset> {
        self.index
            .get(id)
            .map(|&i| &self.synsets[i])
            .ok_or_else(|| Error::UnknownSynset(id.to_string()))
    }

    /// Synsets in id order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        let mut ids: Vec<&Synset> = self.synsets.iter().collect();
        ids.sort_by(|a, b| a.id.cmp(&b.id));
        ids.into_iter()
    }

    /// Synsets listing `lemma`, sorted by id.
    pub fn containing(&self, lemma: &str) -> Vec<&Synset> {
        self.by_lemma
            .get(lemma)
            .map(|ids| ids.iter().map(|&i| &self.synsets[i]).collect())
            .unwrap_or_default()
    }
}

fn parse_synsets(text: &str, origin: &str) -> Result<SynsetGraph> {
    let mut synsets = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::parse(origin, idx + 1, msg);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let ["synset", id, "lemmas", lemmas, "hypernyms", hypernyms] = tokens.as_slice() else {
            return Err(bad(
                "expected `synset <id> lemmas <w,..> hypernyms <h,..|->`",
            ));
        };
        let list = |s: &str| -> BTreeSet<String> {
            if s == "-" {
                BTreeSet::new()
            } else {
                s.split(',')
                    .filter(|x| !x.is_empty())
                    .map(str::to_string)
                    .collect()
            }
        };
        synsets.push(Synset {
            id: id.to_string(),
            lemmas: list(lemmas),
            hypernyms: list(hypernyms),
        });
    }
    SynsetGraph::new(synsets)
}

/// Several types reachable at the same shortest distance from one synset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ambiguity {
    pub synset: String,
    pub candidates: Vec<String>,
    pub chosen: String,
}

/// Subsumption assignment of every synset to an ontology type.
#[derive(Debug, Clone)]
pub struct SenseMap {
    graph: SynsetGraph,
    assigned: Vec<Option<String>>,
    ambiguities: Vec<Ambiguity>,
    unknown_mapped: Vec<String>,
}

impl SenseMap {
    /// Computes assignments for the whole graph up front.
    pub fn new(graph: SynsetGraph, ontology: &Ontology) -> Self {
        let mapped: Vec<Option<&str>> = graph
            .synsets
            .iter()
            .map(|s| ontology.synset_type(&s.id))
            .collect();
        let unknown_mapped = ontology
            .synset_mappings()
            .filter(|(s, _)| !graph.contains(s))
            .map(|(s, _)| s.to_string())
            .collect();

        let mut assigned = Vec::with_capacity(graph.len());
        let mut ambiguities = Vec::new();
        for start in 0..graph.len() {
            let (choice, candidates) = nearest_mapping(&graph, &mapped, start);
            if candidates.len() > 1 {
                ambiguities.push(Ambiguity {
                    synset: graph.synsets[start].id.clone(),
                    candidates: candidates.iter().map(|s| s.to_string()).collect(),
                    chosen: choice.unwrap_or_default().to_string(),
                });
            }
            assigned.push(choice.map(str::to_string));
        }
        ambiguities.sort_by(|a, b| a.synset.cmp(&b.synset));
        SenseMap {
            graph,
            assigned,
            ambiguities,
            unknown_mapped,
        }
    }

    pub fn graph(&self) -> &SynsetGraph {
        &self.graph
    }

    /// The ontology type a synset subsumes under, if any.
    pub fn assign_type(&self, synset: &str) -> Result<Option<&str>> {
        let &i = self
            .graph
            .index
            .get(synset)
            .ok_or_else(|| Error::UnknownSynset(synset.to_string()))?;
        Ok(self.assigned[i].as_deref())
    }

    pub fn ambiguities(&self) -> &[Ambiguity] {
        &self.ambiguities
    }

    /// Synsets mapped in the ontology but absent from the graph.
    pub fn unknown_mapped(&self) -> &[String] {
        &self.unknown_mapped
    }

    /// Pushes sense probabilities onto the types they subsume under.
    pub fn transform_advice(&self, d: &SenseDistribution) -> Result<TypeAdvice> {
        let mut scored_types: BTreeMap<String, f64> = BTreeMap::new();
        for (synset, p) in &d.weights {
            if let Some(t) = self.assign_type(synset)? {
                *scored_types.entry(t.to_string()).or_insert(0.0) += p;
            }
        }
        Ok(TypeAdvice {
            word: d.word.clone(),
            span: d.span,
            scored_types,
        })
    }
}

/// Breadth-first walk up the hypernyms, stopping at the first level that
/// holds a mapped synset. Mapped synsets block the walk past them.
fn nearest_mapping<'a>(
    graph: &SynsetGraph,
    mapped: &[Option<&'a str>],
    start: usize,
) -> (Option<&'a str>, BTreeSet<&'a str>) {
    let mut seen = vec![false; graph.len()];
    seen[start] = true;
    let mut level = vec![start];
    while !level.is_empty() {
        let found: BTreeSet<&str> = level.iter().filter_map(|&s| mapped[s]).collect();
        if let Some(&first) = found.iter().next() {
            return (Some(first), found);
        }
        let mut next = Vec::new();
        for &s in &level {
            for &h in &graph.hypernyms[s] {
                if !seen[h] {
                    seen[h] = true;
                    next.push(h);
                }
            }
        }
        level = next;
    }
    (None, BTreeSet::new())
}

/// Half-open interval `[start, end)`.
pub type Span = (usize, usize);

pub fn spans_intersect(a: Span, b: Span) -> bool {
    a.0 < b.1 && b.0 < a.1
}

/// A WSD system's probabilities over synsets for one word.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseDistribution {
    pub word: String,
    pub span: Span,
    pub weights: Vec<(String, f64)>,
}

impl SenseDistribution {
    pub fn new(word: &str, span: Span, weights: Vec<(String, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for (_, p) in &weights {
            if p.is_nan() || *p < 0.0 {
                return Err(Error::OutOfRange {
                    what: "sense probability",
                    value: *p,
                });
            }
            total += p;
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::OutOfRange {
                what: "sense probability total",
                value: total,
            });
        }
        Ok(SenseDistribution {
            word: word.to_string(),
            span,
            weights,
        })
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().map(|(_, p)| p).sum()
    }
}

/// Sense advice re-expressed over ontology types.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeAdvice {
    pub word: String,
    pub span: Span,
    pub scored_types: BTreeMap<String, f64>,
}

const TIE_EPSILON: f64 = 1e-12;

/// All top-scoring types, sorted by name.
pub fn best_types(advice: &TypeAdvice) -> Vec<(String, f64)> {
    let Some(max) = advice.scored_types.values().copied().reduce(f64::max) else {
        return Vec::new();
    };
    advice
        .scored_types
        .iter()
        .filter(|(_, &s)| (max - s).abs() <= TIE_EPSILON)
        .map(|(t, &s)| (t.clone(), s))
        .collect()
}
