//! Best-first bottom-up chart parser.
//!
//! Lexical readings seed a priority agenda. Each pop admits a constituent to
//! its `(span, category)` chart cell (beam-pruned), then combines it with
//! adjacent chart constituents under the grammar. Combinations whose role
//! fillers violate a selectional restriction are rejected outright.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::lexicon::{pos_category, LexicalEntry, Token};
use crate::ontology::{Ontology, FALLBACK_TYPE};
use crate::sensemap::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct GrammarRule {
    pub lhs: String,
    pub rhs: Vec<String>,
    pub head_index: usize,
    /// `(rhs index, role)` pairs attaching non-head daughters to the head.
    pub role_links: Vec<(usize, String)>,
    pub weight: f64,
}

impl GrammarRule {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.rhs.is_empty() {
            return Err("empty right-hand side".into());
        }
        if self.head_index >= self.rhs.len() {
            return Err(format!("head index {} out of range", self.head_index));
        }
        for (i, role) in &self.role_links {
            if *i >= self.rhs.len() || *i == self.head_index {
                return Err(format!("link {i}:{role} must name a non-head daughter"));
            }
        }
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(format!("weight {} outside (0, 1]", self.weight));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Grammar {
    rules: Vec<GrammarRule>,
}

impl Grammar {
    pub fn new(rules: Vec<GrammarRule>) -> Result<Self> {
        for r in &rules {
            r.validate()
                .map_err(|m| Error::structure(&r.lhs, format!("rule: {m}")))?;
        }
        Ok(Grammar { rules })
    }

    pub fn rules(&self) -> &[GrammarRule] {
        &self.rules
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_grammar(text, "<grammar>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        parse_grammar(&read_file(path)?, &path.display().to_string())
    }
}

fn parse_grammar(text: &str, origin: &str) -> Result<Grammar> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: String| Error::parse(origin, idx + 1, m);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let ["rule", lhs, "->", rest @ ..] = tokens.as_slice() else {
            return Err(bad(
                "expected `rule <lhs> -> <rhs..> head <i> weight <w>`".into()
            ));
        };
        let rhs_len = rest
            .iter()
            .position(|t| matches!(*t, "head" | "weight" | "link"))
            .unwrap_or(rest.len());
        let rhs: Vec<String> = rest[..rhs_len].iter().map(|s| s.to_string()).collect();
        let mut head = None;
        let mut weight = None;
        let mut links = Vec::new();
        for pair in rest[rhs_len..].chunks(2) {
            let [key, value] = pair else {
                return Err(bad(format!("`{}` needs a value", pair[0])));
            };
            match *key {
                "head" => {
                    head = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| bad(format!("bad head `{value}`")))?,
                    )
                }
                "weight" => {
                    weight = Some(
                        value
                            .parse::<f64>()
                            .map_err(|_| bad(format!("bad weight `{value}`")))?,
                    )
                }
                "link" if *value == "-" => {}
                "link" => {
                    for l in value.split(',').filter(|s| !s.is_empty()) {
                        let (i, role) = l
                            .split_once(':')
                            .ok_or_else(|| bad(format!("link `{l}` is not index:role")))?;
                        let i = i
                            .parse::<usize>()
                            .map_err(|_| bad(format!("bad link index `{i}`")))?;
                        links.push((i, role.to_string()));
                    }
                }
                other => return Err(bad(format!("unknown rule field `{other}`"))),
            }
        }
        let rule = GrammarRule {
            lhs: lhs.to_string(),
            rhs,
            head_index: head.ok_or_else(|| bad("missing head".into()))?,
            role_links: links,
            weight: weight.ok_or_else(|| bad("missing weight".into()))?,
        };
        rule.validate().map_err(bad)?;
        rules.push(rule);
    }
    Ok(Grammar { rules })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParserConfig {
    /// Constituents kept per `(span, category)` cell.
    pub beam_width: usize,
    /// Agenda pop budget; `None` means `10·n²`.
    pub max_pops: Option<usize>,
    /// Minimum effective score for a spanning constituent to end the search.
    pub accept_threshold: f64,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            beam_width: 3,
            max_pops: None,
            accept_threshold: 0.0,
        }
    }
}

impl ParserConfig {
    /// Beam and pop budget removed; only a perfect score stops the search
    /// before the agenda drains.
    pub fn exhaustive() -> Self {
        ParserConfig {
            beam_width: usize::MAX,
            max_pops: Some(usize::MAX),
            accept_threshold: 1.0,
        }
    }

    pub fn pop_limit(&self, n_tokens: usize) -> usize {
        self.max_pops.unwrap_or(10 * n_tokens * n_tokens)
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::check_unit("accept threshold", self.accept_threshold)?;
        if self.beam_width == 0 {
            return Err(Error::OutOfRange {
                what: "beam width",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// A scored chart item.
#[derive(Debug, Clone, PartialEq)]
pub struct Constituent {
    pub id: usize,
    pub span: Span,
    pub category: String,
    pub onto_type: String,
    /// Lemma of the lexical head.
    pub word: String,
    pub own_score: f64,
    pub effective_score: f64,
    pub role_children: Vec<(String, usize)>,
    pub children_ids: Vec<usize>,
    /// Arena id of the lexical head (self for leaves).
    pub head_leaf: usize,
}

impl Constituent {
    pub fn is_leaf(&self) -> bool {
        self.children_ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.span.1 - self.span.0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Computes a constituent's effective score from its own score and its
/// derivation children's effective scores.
pub trait ScoreHook {
    fn effective_score(&self, c: &Constituent, child_scores: &[f64]) -> f64;
}

/// Mean of the own score and the children's effective scores.
pub fn recursive_mean(root_component: f64, child_scores: &[f64]) -> f64 {
    let total = child_scores.iter().fold(root_component, |acc, s| acc + s);
    total / (1 + child_scores.len()) as f64
}

/// Unhinted scoring.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainScorer;

impl ScoreHook for PlainScorer {
    fn effective_score(&self, c: &Constituent, child_scores: &[f64]) -> f64 {
        recursive_mean(c.own_score, child_scores)
    }
}

/// Why a combination was refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleRejection {
    pub role: String,
    /// `None` when the head type has no such role at all.
    pub restriction: Option<String>,
    pub filler: String,
    pub head_type: String,
    pub span: Span,
}

impl fmt::Display for RoleRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rejected [{},{}) head={} role={} restriction={} filler={}",
            self.span.0,
            self.span.1,
            self.head_type,
            self.role,
            self.restriction.as_deref().unwrap_or("<none>"),
            self.filler
        )
    }
}

/// Builds the parent of `children` under `rule`, checking role restrictions.
///
/// `own_score` is `rule.weight` times the geometric mean of the children's
/// effective scores; the effective score is left for the caller's hook.
pub fn combine(
    rule: &GrammarRule,
    children: &[&Constituent],
    ontology: &Ontology,
) -> std::result::Result<Constituent, RoleRejection> {
    debug_assert_eq!(children.len(), rule.rhs.len());
    let head = children[rule.head_index];
    let span = (children[0].span.0, children[children.len() - 1].span.1);
    let mut role_children = Vec::with_capacity(rule.role_links.len());
    for (idx, role) in &rule.role_links {
        let filler = children[*idx];
        let reject = |restriction: Option<String>| RoleRejection {
            role: role.clone(),
            restriction,
            filler: filler.onto_type.clone(),
            head_type: head.onto_type.clone(),
            span,
        };
        let spec = match ontology.effective_role(&head.onto_type, role) {
            Ok(Some(spec)) => spec,
            _ => return Err(reject(None)),
        };
        if !ontology
            .is_a(&filler.onto_type, &spec.restriction)
            .unwrap_or(false)
        {
            return Err(reject(Some(spec.restriction.clone())));
        }
        role_children.push((role.clone(), filler.id));
    }
    let product: f64 = children.iter().map(|c| c.effective_score).product();
    let gm = product.powf(1.0 / children.len() as f64);
    Ok(Constituent {
        id: usize::MAX,
        span,
        category: rule.lhs.clone(),
        onto_type: head.onto_type.clone(),
        word: head.word.clone(),
        own_score: rule.weight * gm,
        effective_score: 0.0,
        role_children,
        children_ids: children.iter().map(|c| c.id).collect(),
        head_leaf: head.head_leaf,
    })
}

type CellKey = (usize, usize, String);

/// Constituent arena plus the admitted, beam-pruned cells.
#[derive(Debug, Clone, Default)]
pub struct Chart {
    arena: Vec<Constituent>,
    alive: Vec<bool>,
    cells: HashMap<CellKey, Vec<usize>>,
    by_start: Vec<Vec<usize>>,
    by_end: Vec<Vec<usize>>,
}

impl Chart {
    pub fn new(n_tokens: usize) -> Self {
        Chart {
            by_start: vec![Vec::new(); n_tokens + 1],
            by_end: vec![Vec::new(); n_tokens + 1],
            ..Chart::default()
        }
    }

    /// Stores `c` in the arena without admitting it; returns its id.
    pub fn allocate(&mut self, mut c: Constituent) -> usize {
        let id = self.arena.len();
        c.id = id;
        if c.is_leaf() {
            c.head_leaf = id;
        }
        self.arena.push(c);
        self.alive.push(false);
        id
    }

    pub fn get(&self, id: usize) -> &Constituent {
        &self.arena[id]
    }

    pub fn is_admitted(&self, id: usize) -> bool {
        self.alive[id]
    }

    /// Admitted constituents in id order.
    pub fn admitted(&self) -> impl Iterator<Item = &Constituent> {
        self.arena
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(c, _)| c)
    }

    fn cell_order(&self, a: usize, b: usize) -> Ordering {
        let (x, y) = (&self.arena[a], &self.arena[b]);
        y.effective_score
            .total_cmp(&x.effective_score)
            .then_with(|| x.onto_type.cmp(&y.onto_type))
            .then(a.cmp(&b))
    }

    /// Admits `id` into its cell, then prunes the cell to `beam_width`.
    /// Returns whether `id` survived.
    pub fn admit(&mut self, id: usize, beam_width: usize) -> bool {
        let c = &self.arena[id];
        let key = (c.span.0, c.span.1, c.category.clone());
        self.alive[id] = true;
        self.by_start[c.span.0].push(id);
        self.by_end[c.span.1].push(id);
        self.cells.entry(key.clone()).or_default().push(id);
        self.prune_cell(&key, beam_width);
        self.alive[id]
    }

    fn prune_cell(&mut self, key: &CellKey, beam_width: usize) {
        let mut members = self.cells.remove(key).unwrap_or_default();
        members.sort_by(|&a, &b| self.cell_order(a, b));
        let dropped = members.split_off(members.len().min(beam_width));
        for d in dropped {
            self.alive[d] = false;
            let c = &self.arena[d];
            self.by_start[c.span.0].retain(|&x| x != d);
            self.by_end[c.span.1].retain(|&x| x != d);
        }
        // Cells keep insertion order so ties resolve the same way next time.
        members.sort_unstable();
        if !members.is_empty() {
            self.cells.insert(key.clone(), members);
        }
    }

    /// Prunes every cell to `beam_width`.
    pub fn prune(&mut self, beam_width: usize) {
        let mut keys: Vec<CellKey> = self.cells.keys().cloned().collect();
        keys.sort();
        for k in keys {
            self.prune_cell(&k, beam_width);
        }
    }

    pub fn cell(&self, span: Span, category: &str) -> Vec<&Constituent> {
        self.cells
            .get(&(span.0, span.1, category.to_string()))
            .into_iter()
            .flatten()
            .map(|&i| &self.arena[i])
            .collect()
    }

    /// Every daughter sequence for `rule` that uses `id` and otherwise only
    /// admitted constituents.
    fn combinations(&self, rule: &GrammarRule, id: usize) -> Vec<Vec<usize>> {
        let c = &self.arena[id];
        let mut out = Vec::new();
        for (pos, cat) in rule.rhs.iter().enumerate() {
            if *cat != c.category {
                continue;
            }
            let mut lefts = Vec::new();
            self.extend_left(&rule.rhs[..pos], c.span.0, &mut Vec::new(), &mut lefts);
            let mut rights = Vec::new();
            self.extend_right(&rule.rhs[pos + 1..], c.span.1, &mut Vec::new(), &mut rights);
            for l in &lefts {
                for r in &rights {
                    let mut seq: Vec<usize> = l.iter().rev().copied().collect();
                    seq.push(id);
                    seq.extend(r);
                    out.push(seq);
                }
            }
        }
        out
    }

    fn extend_right(
        &self,
        cats: &[String],
        from: usize,
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some((first, rest)) = cats.split_first() else {
            out.push(acc.clone());
            return;
        };
        let Some(starts) = self.by_start.get(from) else {
            return;
        };
        for &j in starts {
            let d = &self.arena[j];
            if d.category == *first {
                acc.push(j);
                self.extend_right(rest, d.span.1, acc, out);
                acc.pop();
            }
        }
    }

    // `acc` collects daughters right to left.
    fn extend_left(
        &self,
        cats: &[String],
        to: usize,
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some((last, rest)) = cats.split_last() else {
            out.push(acc.clone());
            return;
        };
        for &j in &self.by_end[to] {
            let d = &self.arena[j];
            if d.category == *last {
                acc.push(j);
                self.extend_left(rest, d.span.0, acc, out);
                acc.pop();
            }
        }
    }
}

#[derive(Debug)]
struct AgendaItem {
    score: f64,
    onto_type: String,
    id: usize,
}

impl PartialEq for AgendaItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AgendaItem {}

impl PartialOrd for AgendaItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AgendaItem {
    // Max-heap: higher score first, then lower type name, then older id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.onto_type.cmp(&self.onto_type))
            .then(other.id.cmp(&self.id))
    }
}

/// Greedy left-to-right cover of the sentence by admitted constituents.
///
/// At each uncovered position the longest, then highest-scoring, admitted
/// constituent starting there is taken; positions no constituent starts at
/// get a single-token fallback leaf.
pub fn fragment_fallback(chart: &mut Chart, tokens: &[Token]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        let best = chart
            .admitted()
            .filter(|c| c.span.0 == pos)
            .max_by(|a, b| {
                a.len()
                    .cmp(&b.len())
                    .then(a.effective_score.total_cmp(&b.effective_score))
                    .then_with(|| b.onto_type.cmp(&a.onto_type))
                    .then(b.id.cmp(&a.id))
            })
            .map(|c| (c.id, c.span.1));
        match best {
            Some((id, end)) => {
                out.push(id);
                pos = end;
            }
            None => {
                out.push(chart.allocate(fallback_leaf(&tokens[pos], pos)));
                pos += 1;
            }
        }
    }
    out
}

fn fallback_leaf(token: &Token, index: usize) -> Constituent {
    Constituent {
        id: usize::MAX,
        span: (index, index + 1),
        category: pos_category(&token.pos),
        onto_type: FALLBACK_TYPE.to_string(),
        word: token.lemma.clone(),
        own_score: 0.0,
        effective_score: 0.0,
        role_children: Vec::new(),
        children_ids: Vec::new(),
        head_leaf: usize::MAX,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfNode {
    pub id: usize,
    pub span: Span,
    pub word: String,
    pub onto_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LfEdge {
    pub parent: usize,
    pub role: String,
    pub child: usize,
}

/// Sense nodes joined by role edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogicalForm {
    pub nodes: Vec<LfNode>,
    pub edges: Vec<LfEdge>,
}

impl LogicalForm {
    fn extract(chart: &Chart, roots: &[usize]) -> Self {
        let mut lf = LogicalForm::default();
        let mut node_of: HashMap<usize, usize> = HashMap::new();
        let mut internal = Vec::new();
        for &root in roots {
            let mut stack = vec![root];
            let mut leaves = Vec::new();
            while let Some(id) = stack.pop() {
                let c = chart.get(id);
                if c.is_leaf() {
                    leaves.push(id);
                } else {
                    internal.push(id);
                    stack.extend(c.children_ids.iter().rev());
                }
            }
            for leaf in leaves {
                let c = chart.get(leaf);
                node_of.insert(leaf, lf.nodes.len());
                lf.nodes.push(LfNode {
                    id: lf.nodes.len(),
                    span: c.span,
                    word: c.word.clone(),
                    onto_type: c.onto_type.clone(),
                });
            }
        }
        for id in internal {
            let c = chart.get(id);
            for (role, child) in &c.role_children {
                lf.edges.push(LfEdge {
                    parent: node_of[&c.head_leaf],
                    role: role.clone(),
                    child: node_of[&chart.get(*child).head_leaf],
                });
            }
        }
        lf.edges.sort();
        lf
    }

    /// The node covering token `index`.
    pub fn node_at(&self, index: usize) -> Option<&LfNode> {
        self.nodes
            .iter()
            .find(|n| n.span.0 <= index && index < n.span.1)
    }

    /// Edges whose child does not satisfy the parent's role restriction.
    pub fn role_violations(&self, ontology: &Ontology) -> Vec<String> {
        self.edges
            .iter()
            .filter_map(|e| {
                let parent = &self.nodes[e.parent].onto_type;
                let child = &self.nodes[e.child].onto_type;
                let ok = match ontology.effective_role(parent, &e.role) {
                    Ok(Some(spec)) => ontology.is_a(child, &spec.restriction).unwrap_or(false),
                    _ => false,
                };
                (!ok).then(|| format!("{parent} -{}-> {child}", e.role))
            })
            .collect()
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            writeln!(
                f,
                "node {} {} {} {} {}",
                n.id, n.span.0, n.span.1, n.word, n.onto_type
            )?;
        }
        for e in &self.edges {
            writeln!(f, "edge {} {} {}", e.parent, e.role, e.child)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ParseResult {
    pub sentence_id: String,
    pub spanning: bool,
    /// Root constituents left to right.
    pub fragments: Vec<Constituent>,
    pub logical_form: LogicalForm,
    pub agenda_pops: usize,
    pub rejections: Vec<RoleRejection>,
}

impl ParseResult {
    /// Effective score of the spanning root, if the parse spans.
    pub fn spanning_score(&self) -> Option<f64> {
        self.spanning.then(|| self.fragments[0].effective_score)
    }
}

/// A parser bound to a grammar, an ontology and a configuration.
#[derive(Debug, Clone, Copy)]
pub struct Parser<'a> {
    grammar: &'a Grammar,
    ontology: &'a Ontology,
    config: ParserConfig,
}

impl<'a> Parser<'a> {
    pub fn new(grammar: &'a Grammar, ontology: &'a Ontology, config: ParserConfig) -> Self {
        Parser {
            grammar,
            ontology,
            config,
        }
    }

    pub fn config(&self) -> &ParserConfig {
        &self.config
    }

    pub fn parse(
        &self,
        sentence_id: &str,
        tokens: &[Token],
        entries: &[Vec<LexicalEntry>],
        hook: &dyn ScoreHook,
    ) -> Result<ParseResult> {
        if tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        assert_eq!(tokens.len(), entries.len(), "one entry list per token");
        self.config.validate()?;
        self.ontology.id(FALLBACK_TYPE)?;

        let n = tokens.len();
        let pop_limit = self.config.pop_limit(n);
        let mut chart = Chart::new(n);
        let mut agenda = BinaryHeap::new();
        let mut rejections = Vec::new();

        for (i, list) in entries.iter().enumerate() {
            for e in list {
                let mut leaf = Constituent {
                    id: usize::MAX,
                    span: (i, i + 1),
                    category: e.category.clone(),
                    onto_type: e.onto_type.clone(),
                    word: e.word.clone(),
                    own_score: e.score,
                    effective_score: 0.0,
                    role_children: Vec::new(),
                    children_ids: Vec::new(),
                    head_leaf: usize::MAX,
                };
                leaf.effective_score = hook.effective_score(&leaf, &[]).clamp(0.0, 1.0);
                push(&mut agenda, &mut chart, leaf);
            }
        }

        let mut pops = 0;
        let mut accepted = None;
        while pops < pop_limit {
            let Some(item) = agenda.pop() else { break };
            pops += 1;
            if !chart.admit(item.id, self.config.beam_width) {
                continue;
            }
            let c = chart.get(item.id);
            if c.span == (0, n) && c.effective_score >= self.config.accept_threshold {
                accepted = Some(item.id);
                break;
            }
            for rule in self.grammar.rules() {
                for seq in chart.combinations(rule, item.id) {
                    let children: Vec<&Constituent> = seq.iter().map(|&j| chart.get(j)).collect();
                    match combine(rule, &children, self.ontology) {
                        Ok(mut parent) => {
                            let scores: Vec<f64> =
                                children.iter().map(|c| c.effective_score).collect();
                            parent.effective_score =
                                hook.effective_score(&parent, &scores).clamp(0.0, 1.0);
                            push(&mut agenda, &mut chart, parent);
                        }
                        Err(r) => rejections.push(r),
                    }
                }
            }
        }

        let roots = match accepted {
            Some(id) => vec![id],
            None => fragment_fallback(&mut chart, tokens),
        };
        let spanning = roots.len() == 1 && chart.get(roots[0]).span == (0, n);
        let logical_form = LogicalForm::extract(&chart, &roots);
        Ok(ParseResult {
            sentence_id: sentence_id.to_string(),
            spanning,
            fragments: roots.iter().map(|&r| chart.get(r).clone()).collect(),
            logical_form,
            agenda_pops: pops,
            rejections,
        })
    }
}

fn push(agenda: &mut BinaryHeap<AgendaItem>, chart: &mut Chart, c: Constituent) {
    let score = c.effective_score;
    let onto_type = c.onto_type.clone();
    let id = chart.allocate(c);
    agenda.push(AgendaItem {
        score,
        onto_type,
        id,
    });
}
