//! Fixture loading, random generators and brute-force oracles shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sensechart::advice::{AdviceFile, Corpus};
use sensechart::eval::Resources;
use sensechart::hinting::AdviceMap;
use sensechart::lexicon::{LexicalEntry, Lexicon, Token};
use sensechart::ontology::{Ontology, OntologyType, RoleSpec, FALLBACK_TYPE};
use sensechart::parser::{Grammar, GrammarRule, ParseResult};
use sensechart::sensemap::{SenseMap, Synset, SynsetGraph};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_str(name: &str) -> String {
    fixture(name).display().to_string()
}

pub fn resources() -> Resources {
    let ontology = Ontology::load(fixture("ontology.txt")).unwrap();
    let senses = SenseMap::new(
        SynsetGraph::load(fixture("synsets.txt")).unwrap(),
        &ontology,
    );
    let lexicon = Lexicon::load(fixture("lexicon.txt"), &ontology).unwrap();
    let grammar = Grammar::load(fixture("grammar.txt")).unwrap();
    Resources::new(ontology, senses, lexicon, grammar)
}

pub fn corpus() -> Corpus {
    Corpus::load(fixture("corpus.txt")).unwrap()
}

pub fn advice(name: &str) -> AdviceFile {
    AdviceFile::load(fixture(name)).unwrap()
}

/// Tokens for `word/lemma/TAG` triples separated by spaces.
pub fn tokens(text: &str) -> Vec<Token> {
    let mut at = 0;
    text.split_whitespace()
        .map(|piece| {
            let parts: Vec<&str> = piece.split('/').collect();
            let t = Token::new(parts[0], parts[1], parts[2], (at, at + parts[0].len()));
            at += parts[0].len() + 1;
            t
        })
        .collect()
}

// ---------------------------------------------------------------- ontologies

/// Parent chain from `t` up to the root, `t` first.
pub fn chain(o: &Ontology, t: &str) -> Vec<String> {
    let mut out = vec![t.to_string()];
    let mut cur = t.to_string();
    while let Some(p) = o.get(&cur).unwrap().parent.clone() {
        out.push(p.clone());
        cur = p;
    }
    out
}

/// Effective roles by replaying declarations from the root down.
pub fn oracle_roles(o: &Ontology, t: &str) -> BTreeSet<(String, String, bool)> {
    let mut roles: BTreeMap<String, (String, bool)> = BTreeMap::new();
    for name in chain(o, t).iter().rev() {
        for r in &o.get(name).unwrap().roles {
            roles.insert(r.role_name.clone(), (r.restriction.clone(), r.required));
        }
    }
    roles.into_iter().map(|(k, (r, q))| (k, r, q)).collect()
}

/// Wu-Palmer over an explicit parent map by enumerating common ancestors.
pub fn oracle_wup(parent: &HashMap<String, Option<String>>, a: &str, b: &str) -> f64 {
    let up = |t: &str| {
        let mut v = vec![t.to_string()];
        let mut cur = t.to_string();
        while let Some(Some(p)) = parent.get(&cur) {
            v.push(p.clone());
            cur = p.clone();
        }
        v
    };
    let depth = |t: &str| up(t).len();
    let ua = up(a);
    let ub: BTreeSet<String> = up(b).into_iter().collect();
    let best = ua
        .iter()
        .filter(|x| ub.contains(*x))
        .map(|x| depth(x))
        .max()
        .expect("trees share a root");
    2.0 * best as f64 / (depth(a) + depth(b)) as f64
}

pub fn parent_map(o: &Ontology) -> HashMap<String, Option<String>> {
    o.types()
        .map(|t| (t.name.clone(), t.parent.clone()))
        .collect()
}

/// Factor of every type: a type heads a new factor when its replayed role set
/// differs from its parent's.
pub fn oracle_factor_heads(o: &Ontology) -> HashMap<String, String> {
    let mut out = HashMap::new();
    for t in o.types() {
        let mut cur = t.name.clone();
        loop {
            match o.get(&cur).unwrap().parent.clone() {
                Some(p) if oracle_roles(o, &p) == oracle_roles(o, &cur) => cur = p,
                _ => break,
            }
        }
        out.insert(t.name.clone(), cur);
    }
    out
}

/// Parent map of the factor tree, keyed by factor head.
pub fn oracle_factor_tree(o: &Ontology) -> HashMap<String, Option<String>> {
    let heads = oracle_factor_heads(o);
    let mut out = HashMap::new();
    for h in heads.values() {
        let p = o.get(h).unwrap().parent.clone().map(|p| heads[&p].clone());
        out.insert(h.clone(), p);
    }
    out
}

/// Random single-rooted ontology of `n` types with roles added, overridden
/// and redundantly re-declared along the way.
pub fn random_ontology(rng: &mut ChaCha8Rng, n: usize) -> Ontology {
    let names: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut types = vec![OntologyType::new(&names[0], None)];
    let mut parents = vec![None];
    for i in 1..n {
        let p = rng.gen_range(0..i);
        parents.push(Some(p));
        types.push(OntologyType::new(&names[i], Some(&names[p])));
    }
    for i in 0..n {
        let inherited: Vec<RoleSpec> = {
            let mut v = Vec::new();
            let mut cur = parents[i];
            while let Some(p) = cur {
                v.extend(types[p].roles.iter().cloned());
                cur = parents[p];
            }
            v
        };
        let restriction = names[rng.gen_range(0..n)].clone();
        match rng.gen_range(0..10) {
            0..=2 => {
                let role = format!("r{}", rng.gen_range(0..4));
                if !types[i].roles.iter().any(|r| r.role_name == role) {
                    let mut spec = RoleSpec::new(&role, &restriction);
                    if rng.gen_bool(0.2) {
                        spec = spec.required();
                    }
                    types[i].roles.push(spec);
                }
            }
            3 if !inherited.is_empty() => {
                // identical re-declaration leaves the role set unchanged
                let r = inherited.choose(rng).unwrap().clone();
                types[i].roles.push(r);
            }
            4 => {
                types[i]
                    .features
                    .insert("f".into(), format!("{}", rng.gen_range(0..3)));
            }
            _ => {}
        }
    }
    Ontology::new(types).unwrap()
}

// ------------------------------------------------------------- synset graphs

/// Random acyclic hypernym graph with a random partial mapping onto a random
/// ontology. Hypernyms always point to lower-numbered synsets.
pub fn random_sense_world(rng: &mut ChaCha8Rng, n: usize) -> (Ontology, SynsetGraph) {
    let k = rng.gen_range(2..8);
    let mut types = vec![OntologyType::new("root", None)];
    for i in 1..k {
        let p = if i == 1 { 0 } else { rng.gen_range(0..i) };
        let parent = if p == 0 {
            "root".to_string()
        } else {
            format!("T{p}")
        };
        types.push(OntologyType::new(&format!("T{i}"), Some(&parent)));
    }
    let mut synsets = Vec::new();
    for i in 0..n {
        let id = format!("s{i:03}");
        let mut hyper: BTreeSet<String> = BTreeSet::new();
        if i > 0 {
            let count = match rng.gen_range(0..10) {
                0 => 0,
                1..=6 => 1,
                7..=8 => 2,
                _ => 3,
            };
            for _ in 0..count {
                hyper.insert(format!("s{:03}", rng.gen_range(0..i)));
            }
        }
        let h: Vec<&str> = hyper.iter().map(String::as_str).collect();
        synsets.push(Synset::new(&id, &["w"], &h));
        if rng.gen_bool(0.15) {
            let t = rng.gen_range(0..k);
            types[t].synset_mappings.insert(id);
        }
    }
    (
        Ontology::new(types).unwrap(),
        SynsetGraph::new(synsets).unwrap(),
    )
}

/// Enumerates every upward path from `s`, stopping each at its first mapped
/// synset, and returns the types reached at the shortest such length.
pub fn oracle_subsumption(o: &Ontology, g: &SynsetGraph, s: &str) -> Vec<String> {
    let mut reached: Vec<(usize, String)> = Vec::new();
    let mut stack = vec![vec![s.to_string()]];
    while let Some(path) = stack.pop() {
        let last = path.last().unwrap();
        if let Some(t) = o.synset_type(last) {
            if g.contains(last) {
                reached.push((path.len(), t.to_string()));
                continue;
            }
        }
        for h in &g.get(last).unwrap().hypernyms {
            let mut p = path.clone();
            p.push(h.clone());
            stack.push(p);
        }
    }
    let Some(min) = reached.iter().map(|(l, _)| *l).min() else {
        return Vec::new();
    };
    let types: BTreeSet<String> = reached
        .into_iter()
        .filter(|(l, _)| *l == min)
        .map(|(_, t)| t)
        .collect();
    types.into_iter().collect()
}

// ---------------------------------------------------------------- parsing

/// Best effective score of every spanning analysis, found by exhaustive
/// dynamic programming over (span, category, type, head word).
///
/// Scores are monotone in the children's scores, so keeping the best score
/// per state is exact. `None` when no analysis spans the sentence.
pub fn oracle_best_spanning(
    o: &Ontology,
    grammar: &Grammar,
    entries: &[Vec<LexicalEntry>],
    hints: Option<&AdviceMap>,
) -> Option<f64> {
    type State = (String, String, String);
    let n = entries.len();
    let mut cells: HashMap<(usize, usize), HashMap<State, f64>> = HashMap::new();

    let is_a = |t: &str, anc: &str| chain(o, t).iter().any(|x| x == anc);
    let root_component = |own: f64, word: &str, span: (usize, usize), ty: &str| -> f64 {
        let Some(map) = hints else { return own };
        let best = map
            .hints()
            .iter()
            .filter(|h| {
                h.word == word && h.span.0 < span.1 && span.0 < h.span.1 && is_a(ty, &h.onto_type)
            })
            .map(|h| h.score)
            .fold(None, |acc: Option<f64>, s| {
                Some(acc.map_or(s, |a| a.max(s)))
            });
        match best {
            Some(s) => map.alpha() * own * s + (1.0 - map.alpha()),
            None => own,
        }
    };
    let mean =
        |root: f64, kids: &[f64]| (root + kids.iter().sum::<f64>()) / (1 + kids.len()) as f64;
    let admissible = |rule: &GrammarRule, kids: &[&State]| -> bool {
        let head = &kids[rule.head_index].1;
        rule.role_links.iter().all(|(i, role)| {
            oracle_roles(o, head)
                .iter()
                .find(|(name, _, _)| name == role)
                .is_some_and(|(_, restr, _)| is_a(&kids[*i].1, restr))
        })
    };
    let relax = |cell: &mut HashMap<State, f64>, st: State, v: f64| -> bool {
        let slot = cell.entry(st).or_insert(f64::NEG_INFINITY);
        if v > *slot + 1e-15 {
            *slot = v;
            true
        } else {
            false
        }
    };

    for (i, list) in entries.iter().enumerate() {
        let cell = cells.entry((i, i + 1)).or_default();
        for e in list {
            let v = mean(
                root_component(e.score, &e.word, (i, i + 1), &e.onto_type),
                &[],
            );
            relax(
                cell,
                (e.category.clone(), e.onto_type.clone(), e.word.clone()),
                v.clamp(0.0, 1.0),
            );
        }
    }
    for len in 1..=n {
        for start in 0..=n - len {
            let span = (start, start + len);
            // binary combinations
            if len > 1 {
                for mid in start + 1..start + len {
                    let left = cells.get(&(start, mid)).cloned().unwrap_or_default();
                    let right = cells.get(&(mid, start + len)).cloned().unwrap_or_default();
                    for rule in grammar.rules().iter().filter(|r| r.rhs.len() == 2) {
                        for (ls, &lv) in left.iter().filter(|(s, _)| s.0 == rule.rhs[0]) {
                            for (rs, &rv) in right.iter().filter(|(s, _)| s.0 == rule.rhs[1]) {
                                let kids = [ls, rs];
                                if !admissible(rule, &kids) {
                                    continue;
                                }
                                let head = kids[rule.head_index];
                                let own = rule.weight * (lv * rv).sqrt();
                                let v =
                                    mean(root_component(own, &head.2, span, &head.1), &[lv, rv]);
                                let st = (rule.lhs.clone(), head.1.clone(), head.2.clone());
                                relax(cells.entry(span).or_default(), st, v.clamp(0.0, 1.0));
                            }
                        }
                    }
                }
            }
            // unary closure
            for _ in 0..8 {
                let cur = cells.get(&span).cloned().unwrap_or_default();
                let mut changed = false;
                for rule in grammar.rules().iter().filter(|r| r.rhs.len() == 1) {
                    for (cs, &cv) in cur.iter().filter(|(s, _)| s.0 == rule.rhs[0]) {
                        if !admissible(rule, &[cs]) {
                            continue;
                        }
                        let own = rule.weight * cv;
                        let v = mean(root_component(own, &cs.2, span, &cs.1), &[cv]);
                        let st = (rule.lhs.clone(), cs.1.clone(), cs.2.clone());
                        changed |= relax(cells.entry(span).or_default(), st, v.clamp(0.0, 1.0));
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
    cells.get(&(0, n)).and_then(|c| {
        c.values()
            .copied()
            .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |x| x.max(v))))
    })
}

/// Role edges whose filler does not descend from the restriction, checked
/// from the ontology's declarations rather than the parser's own audit.
pub fn oracle_role_violations(o: &Ontology, parse: &ParseResult) -> usize {
    let lf = &parse.logical_form;
    let ty = |id: usize| {
        lf.nodes
            .iter()
            .find(|n| n.id == id)
            .map(|n| n.onto_type.clone())
    };
    lf.edges
        .iter()
        .filter(|e| {
            let (Some(head), Some(filler)) = (ty(e.parent), ty(e.child)) else {
                return true;
            };
            match oracle_roles(o, &head)
                .into_iter()
                .find(|(name, _, _)| *name == e.role)
            {
                Some((_, restr, _)) => !chain(o, &filler).contains(&restr),
                None => true,
            }
        })
        .count()
}

pub fn is_fallback(t: &str) -> bool {
    t == FALLBACK_TYPE
}
