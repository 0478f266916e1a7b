//! Single-inheritance semantic type hierarchy.
//!
//! Every type carries features and role templates that children inherit and
//! may override. On top of the hierarchy this module provides reflexive
//! ancestry, Wu-Palmer similarity and the semantic factorization used by
//! SemFac scoring.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;

use crate::error::{read_file, Error, Result};

/// Name of the sense-neutral type assigned to uncovered tokens.
pub const FALLBACK_TYPE: &str = "referential-sem";

/// A selectional restriction on one semantic role.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleSpec {
    pub role_name: String,
    /// Ontology type the filler must equal or descend from.
    pub restriction: String,
    pub required: bool,
}

impl RoleSpec {
    pub fn new(role_name: &str, restriction: &str) -> Self {
        RoleSpec {
            role_name: role_name.to_string(),
            restriction: restriction.to_string(),
            required: false,
        }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }
}

/// A node as declared in the ontology file.
///
/// `roles` and `features` hold only the node's own declarations; the
/// inherited view is available through [`Ontology::effective_roles`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyType {
    pub name: String,
    pub parent: Option<String>,
    pub features: BTreeMap<String, String>,
    pub roles: Vec<RoleSpec>,
    pub synset_mappings: BTreeSet<String>,
}

impl OntologyType {
    pub fn new(name: &str, parent: Option<&str>) -> Self {
        OntologyType {
            name: name.to_string(),
            parent: parent.map(str::to_string),
            features: BTreeMap::new(),
            roles: Vec::new(),
            synset_mappings: BTreeSet::new(),
        }
    }

    pub fn with_role(mut self, role: RoleSpec) -> Self {
        self.roles.push(role);
        self
    }

    pub fn with_feature(mut self, key: &str, value: &str) -> Self {
        self.features.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_synset(mut self, synset: &str) -> Self {
        self.synset_mappings.insert(synset.to_string());
        self
    }
}

/// Index of a type inside an [`Ontology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub usize);

/// A validated hierarchy with inherited roles resolved.
#[derive(Debug, Clone)]
pub struct Ontology {
    types: Vec<OntologyType>,
    index: HashMap<String, TypeId>,
    parent: Vec<Option<TypeId>>,
    children: Vec<Vec<TypeId>>,
    depth: Vec<usize>,
    effective_roles: Vec<Vec<RoleSpec>>,
    effective_features: Vec<BTreeMap<String, String>>,
    root: TypeId,
    synset_owner: BTreeMap<String, TypeId>,
}

impl Ontology {
    /// Validates a set of declared types and resolves inheritance.
    pub fn new(mut types: Vec<OntologyType>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, t) in types.iter().enumerate() {
            if index.insert(t.name.clone(), TypeId(i)).is_some() {
                return Err(Error::structure(&t.name, "duplicate type name"));
            }
        }

        let roots: Vec<&str> = types
            .iter()
            .filter(|t| t.parent.is_none())
            .map(|t| t.name.as_str())
            .collect();
        let root = match roots.as_slice() {
            [] => {
                let name = types.first().map(|t| t.name.as_str()).unwrap_or("-");
                return Err(Error::structure(name, "no root type"));
            }
            [single] => index[*single],
            [_, extra, ..] => {
                return Err(Error::structure(
                    extra,
                    format!("multiple roots ({})", roots.join(", ")),
                ))
            }
        };

        let mut parent = Vec::with_capacity(types.len());
        for t in &types {
            match &t.parent {
                None => parent.push(None),
                Some(p) => match index.get(p) {
                    Some(&pid) => parent.push(Some(pid)),
                    None => return Err(Error::structure(&t.name, format!("unknown parent `{p}`"))),
                },
            }
        }

        // Every type must reach the root; anything else sits on a cycle.
        let mut depth = vec![0usize; types.len()];
        depth[root.0] = 1;
        for start in 0..types.len() {
            let mut chain = Vec::new();
            let mut cur = start;
            while depth[cur] == 0 {
                if chain.contains(&cur) {
                    return Err(Error::structure(&types[cur].name, "cycle in parent chain"));
                }
                chain.push(cur);
                cur = parent[cur].expect("non-root has parent").0;
            }
            let mut d = depth[cur];
            for &t in chain.iter().rev() {
                d += 1;
                depth[t] = d;
            }
        }

        let mut children = vec![Vec::new(); types.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[p.0].push(TypeId(i));
            }
        }
        for list in &mut children {
            list.sort_by(|a, b| types[a.0].name.cmp(&types[b.0].name));
        }

        for t in &mut types {
            let mut seen = BTreeSet::new();
            for r in &t.roles {
                if !seen.insert(r.role_name.clone()) {
                    return Err(Error::structure(
                        &t.name,
                        format!("role `{}` declared twice", r.role_name),
                    ));
                }
                if !index.contains_key(&r.restriction) {
                    return Err(Error::structure(
                        &t.name,
                        format!(
                            "role `{}` restricts to unknown type `{}`",
                            r.role_name, r.restriction
                        ),
                    ));
                }
            }
        }

        let mut synset_owner = BTreeMap::new();
        for (i, t) in types.iter().enumerate() {
            for s in &t.synset_mappings {
                if let Some(prev) = synset_owner.insert(s.clone(), TypeId(i)) {
                    return Err(Error::structure(
                        &t.name,
                        format!("synset `{s}` already mapped to `{}`", types[prev.0].name),
                    ));
                }
            }
        }

        let mut ontology = Ontology {
            types,
            index,
            parent,
            children,
            depth,
            effective_roles: Vec::new(),
            effective_features: Vec::new(),
            root,
            synset_owner,
        };
        ontology.resolve_inheritance();
        Ok(ontology)
    }

    fn resolve_inheritance(&mut self) {
        let n = self.types.len();
        let mut roles: Vec<BTreeMap<String, RoleSpec>> = vec![BTreeMap::new(); n];
        let mut features: Vec<BTreeMap<String, String>> = vec![BTreeMap::new(); n];
        for id in self.top_down() {
            let (mut r, mut f) = match self.parent[id.0] {
                Some(p) => (roles[p.0].clone(), features[p.0].clone()),
                None => Default::default(),
            };
            let t = &self.types[id.0];
            for spec in &t.roles {
                r.insert(spec.role_name.clone(), spec.clone());
            }
            f.extend(t.features.iter().map(|(k, v)| (k.clone(), v.clone())));
            roles[id.0] = r;
            features[id.0] = f;
        }
        self.effective_roles = roles
            .into_iter()
            .map(|m| m.into_values().collect())
            .collect();
        self.effective_features = features;
    }

    /// Types in breadth-first order from the root, children by name.
    pub fn top_down(&self) -> Vec<TypeId> {
        let mut order = Vec::with_capacity(self.types.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(id) = queue.pop_front() {
            order.push(id);
            queue.extend(self.children[id.0].iter().copied());
        }
        order
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_ontology(text, "<ontology>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        parse_ontology(&read_file(path)?, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<TypeId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, id: TypeId) -> &str {
        &self.types[id.0].name
    }

    pub fn get(&self, name: &str) -> Result<&OntologyType> {
        Ok(&self.types[self.id(name)?.0])
    }

    pub fn types(&self) -> impl Iterator<Item = &OntologyType> {
        self.types.iter()
    }

    pub fn root(&self) -> &str {
        self.name(self.root)
    }

    pub fn parent_of(&self, name: &str) -> Result<Option<&str>> {
        let id = self.id(name)?;
        Ok(self.parent[id.0].map(|p| self.name(p)))
    }

    pub fn children_of(&self, name: &str) -> Result<Vec<&str>> {
        let id = self.id(name)?;
        Ok(self.children[id.0].iter().map(|&c| self.name(c)).collect())
    }

    /// Depth with the root at 1.
    pub fn depth(&self, name: &str) -> Result<usize> {
        Ok(self.depth[self.id(name)?.0])
    }

    pub fn effective_roles(&self, name: &str) -> Result<&[RoleSpec]> {
        Ok(&self.effective_roles[self.id(name)?.0])
    }

    pub fn effective_role(&self, name: &str, role: &str) -> Result<Option<&RoleSpec>> {
        Ok(self
            .effective_roles(name)?
            .iter()
            .find(|r| r.role_name == role))
    }

    pub fn effective_features(&self, name: &str) -> Result<&BTreeMap<String, String>> {
        Ok(&self.effective_features[self.id(name)?.0])
    }

    /// The type a synset is directly mapped to, if any.
    pub fn synset_type(&self, synset: &str) -> Option<&str> {
        self.synset_owner.get(synset).map(|&id| self.name(id))
    }

    pub fn synset_mappings(&self) -> impl Iterator<Item = (&str, &str)> {
        self.synset_owner
            .iter()
            .map(|(s, &id)| (s.as_str(), self.name(id)))
    }

    fn ancestor_ids(&self, id: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        std::iter::successors(Some(id), move |cur| self.parent[cur.0])
    }

    /// `t` followed by its parent chain up to and including the root.
    pub fn ancestors(&self, t: &str) -> Result<Vec<&str>> {
        let id = self.id(t)?;
        Ok(self.ancestor_ids(id).map(|a| self.name(a)).collect())
    }

    /// True when `t` equals `ancestor` or descends from it.
    pub fn is_a(&self, t: &str, ancestor: &str) -> Result<bool> {
        let target = self.id(ancestor)?;
        let id = self.id(t)?;
        Ok(self.ancestor_ids(id).any(|a| a == target))
    }

    /// Deepest common ancestor of two types.
    pub fn lcs(&self, a: &str, b: &str) -> Result<&str> {
        let a_id = self.id(a)?;
        let b_id = self.id(b)?;
        let a_chain: BTreeSet<TypeId> = self.ancestor_ids(a_id).collect();
        let common = self
            .ancestor_ids(b_id)
            .find(|x| a_chain.contains(x))
            .expect("root is a common ancestor");
        Ok(self.name(common))
    }

    /// Wu-Palmer similarity: `2·depth(lcs) / (depth(a) + depth(b))`.
    pub fn wu_palmer(&self, a: &str, b: &str) -> Result<f64> {
        let lcs = self.lcs(a, b)?;
        Ok(wu_palmer_ratio(
            self.depth(lcs)?,
            self.depth(a)?,
            self.depth(b)?,
        ))
    }

    /// Partitions the hierarchy into regions of identical effective roles.
    pub fn factorize(&self) -> FactorizedOntology {
        let n = self.types.len();
        let mut factor_of = vec![FactorId(usize::MAX); n];
        let mut factor_parent = Vec::new();
        let mut factor_depth = Vec::new();
        let mut factor_head = Vec::new();
        for id in self.top_down() {
            let opened = match self.parent[id.0] {
                Some(p) if self.effective_roles[p.0] == self.effective_roles[id.0] => {
                    factor_of[id.0] = factor_of[p.0];
                    continue;
                }
                Some(p) => Some(factor_of[p.0]),
                None => None,
            };
            let fid = FactorId(factor_parent.len());
            factor_parent.push(opened);
            factor_depth.push(opened.map_or(1, |f: FactorId| factor_depth[f.0] + 1));
            factor_head.push(self.name(id).to_string());
            factor_of[id.0] = fid;
        }
        let factor_of = self
            .types
            .iter()
            .zip(factor_of)
            .map(|(t, f)| (t.name.clone(), f))
            .collect();
        FactorizedOntology {
            factor_of,
            factor_parent,
            factor_depth,
            factor_head,
        }
    }
}

pub(crate) fn wu_palmer_ratio(lcs_depth: usize, a_depth: usize, b_depth: usize) -> f64 {
    2.0 * lcs_depth as f64 / (a_depth + b_depth) as f64
}

/// Identifier of one semantic factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorId(pub usize);

/// The quotient of the type tree by effective-role equality.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedOntology {
    factor_of: BTreeMap<String, FactorId>,
    factor_parent: Vec<Option<FactorId>>,
    factor_depth: Vec<usize>,
    factor_head: Vec<String>,
}

impl FactorizedOntology {
    pub fn factor_count(&self) -> usize {
        self.factor_parent.len()
    }

    pub fn factor_of(&self, t: &str) -> Result<FactorId> {
        self.factor_of
            .get(t)
            .copied()
            .ok_or_else(|| Error::UnknownType(t.to_string()))
    }

    pub fn factor_parent(&self, f: FactorId) -> Option<FactorId> {
        self.factor_parent[f.0]
    }

    pub fn factor_depth(&self, f: FactorId) -> usize {
        self.factor_depth[f.0]
    }

    /// The type that opened the factor (its topmost member).
    pub fn factor_head(&self, f: FactorId) -> &str {
        &self.factor_head[f.0]
    }

    /// Members of each factor, types sorted by name.
    pub fn members(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.factor_count()];
        for (t, f) in &self.factor_of {
            out[f.0].push(t.as_str());
        }
        out
    }

    /// Type-to-factor assignments in type-name order.
    pub fn assignments(&self) -> impl Iterator<Item = (&str, FactorId)> {
        self.factor_of.iter().map(|(t, &f)| (t.as_str(), f))
    }

    fn chain(&self, f: FactorId) -> impl Iterator<Item = FactorId> + '_ {
        std::iter::successors(Some(f), move |cur| self.factor_parent[cur.0])
    }

    /// Wu-Palmer similarity over the factor tree.
    pub fn semfac_similarity(&self, a: &str, b: &str) -> Result<f64> {
        let fa = self.factor_of(a)?;
        let fb = self.factor_of(b)?;
        let a_chain: BTreeSet<FactorId> = self.chain(fa).collect();
        let lcs = self
            .chain(fb)
            .find(|f| a_chain.contains(f))
            .expect("root factor is shared");
        Ok(wu_palmer_ratio(
            self.factor_depth(lcs),
            self.factor_depth(fa),
            self.factor_depth(fb),
        ))
    }
}

const KEYWORDS: [&str; 5] = ["type", "parent", "features", "roles", "synsets"];

fn parse_ontology(text: &str, origin: &str) -> Result<Ontology> {
    // (line, keyword, values) triples grouped per record.
    let mut records: Vec<Vec<(usize, String, Vec<String>)>> = Vec::new();
    let mut in_block = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            in_block = false;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            if KEYWORDS.contains(&token) {
                if token == "type" || !in_block {
                    if token != "type" {
                        return Err(Error::parse(
                            origin,
                            line_no,
                            format!("record must start with `type`, found `{token}`"),
                        ));
                    }
                    records.push(Vec::new());
                    in_block = true;
                }
                records.last_mut().expect("record open").push((
                    line_no,
                    token.to_string(),
                    Vec::new(),
                ));
            } else {
                match records.last_mut().and_then(|r| r.last_mut()) {
                    Some((_, _, values)) if in_block => values.push(token.to_string()),
                    _ => {
                        return Err(Error::parse(
                            origin,
                            line_no,
                            format!("unexpected token `{token}`"),
                        ))
                    }
                }
            }
        }
    }

    let mut types = Vec::with_capacity(records.len());
    for record in records {
        types.push(parse_type_record(record, origin)?);
    }
    Ontology::new(types)
}

fn parse_type_record(
    record: Vec<(usize, String, Vec<String>)>,
    origin: &str,
) -> Result<OntologyType> {
    let mut name = None;
    let mut ty = OntologyType::new("", None);
    let mut seen = BTreeSet::new();
    for (line, key, values) in record {
        if !seen.insert(key.clone()) {
            return Err(Error::parse(
                origin,
                line,
                format!("duplicate `{key}` field"),
            ));
        }
        let joined = values.join("");
        let list: Vec<&str> = if joined == "-" || joined.is_empty() {
            Vec::new()
        } else {
            joined.split(',').filter(|s| !s.is_empty()).collect()
        };
        match key.as_str() {
            "type" | "parent" => {
                if values.len() != 1 {
                    return Err(Error::parse(
                        origin,
                        line,
                        format!("`{key}` takes exactly one name"),
                    ));
                }
                if key == "type" {
                    name = Some(values[0].clone());
                } else if values[0] != "-" {
                    ty.parent = Some(values[0].clone());
                }
            }
            "features" => {
                for kv in list {
                    let (k, v) = kv.split_once('=').ok_or_else(|| {
                        Error::parse(origin, line, format!("feature `{kv}` is not k=v"))
                    })?;
                    ty.features.insert(k.to_string(), v.to_string());
                }
            }
            "roles" => {
                for spec in list {
                    let parts: Vec<&str> = spec.split(':').collect();
                    let role = match parts.as_slice() {
                        [r, t] => RoleSpec::new(r, t),
                        [r, t, "required"] => RoleSpec::new(r, t).required(),
                        _ => {
                            return Err(Error::parse(
                                origin,
                                line,
                                format!("role `{spec}` is not name:restriction[:required]"),
                            ))
                        }
                    };
                    ty.roles.push(role);
                }
            }
            "synsets" => {
                ty.synset_mappings
                    .extend(list.into_iter().map(str::to_string));
            }
            _ => unreachable!("keyword list is closed"),
        }
    }
    ty.name = name.expect("records start with type");
    Ok(ty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_node() -> Ontology {
        Ontology::new(vec![
            OntologyType::new("root", None),
            OntologyType::new("a", Some("root")),
            OntologyType::new("a1", Some("a")),
            OntologyType::new("b", Some("root")),
        ])
        .unwrap()
    }

    fn factor_fixture() -> Ontology {
        Ontology::new(vec![
            OntologyType::new("root", None),
            OntologyType::new("A", Some("root")).with_role(RoleSpec::new("r1", "root")),
            OntologyType::new("A1", Some("A")),
            OntologyType::new("B", Some("root")).with_role(RoleSpec::new("r2", "root")),
        ])
        .unwrap()
    }

    #[test]
    fn loads_minimal_file() {
        let o = Ontology::from_text(
            "# tiny\n\
             type root parent -\n\n\
             type phys-obj parent root\n\
             type fish parent phys-obj\n\
             type instrument parent phys-obj\nsynsets bass.n.07\n",
        )
        .unwrap();
        assert_eq!(o.len(), 4);
        let max_depth = o.types().map(|t| o.depth(&t.name).unwrap()).max();
        assert_eq!(max_depth, Some(3));
        assert_eq!(o.synset_type("bass.n.07"), Some("instrument"));
    }

    #[test]
    fn rejects_cycle() {
        let err = Ontology::from_text("type root parent -\ntype x parent y\ntype y parent x\n")
            .unwrap_err();
        match err {
            Error::Structure { name, message } => {
                assert!(name == "x" || name == "y");
                assert!(message.contains("cycle"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_multiple_roots() {
        let err = Ontology::from_text("type root parent -\ntype other parent -\n").unwrap_err();
        assert!(err.to_string().contains("multiple roots"), "{err}");
    }

    #[test]
    fn rejects_dangling_restriction_and_duplicates() {
        let err = Ontology::from_text("type root parent - roles agent:nothing\n").unwrap_err();
        assert!(err.to_string().contains("unknown type `nothing`"));
        let err = Ontology::from_text("type root parent -\ntype root parent -\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err =
            Ontology::from_text("type root parent - synsets s1\ntype a parent root synsets s1\n")
                .unwrap_err();
        assert!(err.to_string().contains("already mapped"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Ontology::from_text("type root parent -\n\nparent root\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let err = Ontology::from_text("type root parent - roles agent\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn roles_inherit_and_override() {
        let o = Ontology::from_text(
            "type root parent -\n\
             type obj parent root\n\
             type food parent obj\n\
             type ev parent root roles agent:obj\n\
             type eat parent ev roles affected:obj:required\n\
             type drink parent eat roles affected:food features liquid=yes\n",
        )
        .unwrap();
        let roles = o.effective_roles("drink").unwrap();
        assert_eq!(roles.len(), 2);
        assert_eq!(roles[0], RoleSpec::new("affected", "food"));
        assert_eq!(roles[1], RoleSpec::new("agent", "obj"));
        assert!(
            o.effective_role("eat", "affected")
                .unwrap()
                .unwrap()
                .required
        );
        assert_eq!(o.effective_features("drink").unwrap()["liquid"], "yes");
    }

    #[test]
    fn ancestors_are_reflexive() {
        let o = Ontology::from_text(
            "type root parent -\ntype phys-obj parent root\ntype fish parent phys-obj\n",
        )
        .unwrap();
        assert_eq!(o.ancestors("root").unwrap(), vec!["root"]);
        assert_eq!(
            o.ancestors("fish").unwrap(),
            vec!["fish", "phys-obj", "root"]
        );
        assert!(matches!(
            o.ancestors("no-such-type"),
            Err(Error::UnknownType(_))
        ));
    }

    #[test]
    fn wu_palmer_on_four_nodes() {
        let o = four_node();
        assert_eq!(o.wu_palmer("a1", "a1").unwrap(), 1.0);
        assert!((o.wu_palmer("a1", "b").unwrap() - 0.4).abs() < 1e-12);
        assert!((o.wu_palmer("a", "a1").unwrap() - 0.8).abs() < 1e-12);
        assert!(o.wu_palmer("a", "zzz").is_err());
    }

    #[test]
    fn factorize_fixture() {
        let o = factor_fixture();
        let f = o.factorize();
        assert_eq!(f.factor_count(), 3);
        assert_eq!(f.factor_of("A").unwrap(), f.factor_of("A1").unwrap());
        assert_ne!(f.factor_of("A").unwrap(), f.factor_of("B").unwrap());
        assert_eq!(f.factor_depth(f.factor_of("A").unwrap()), 2);
        assert_eq!(f.factor_head(f.factor_of("A1").unwrap()), "A");
        assert_eq!(f.semfac_similarity("A", "A1").unwrap(), 1.0);
        assert!((f.semfac_similarity("A1", "B").unwrap() - 0.5).abs() < 1e-12);
        assert!((f.semfac_similarity("root", "A1").unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn factorize_degenerate_cases() {
        assert_eq!(four_node().factorize().factor_count(), 1);
        let distinct = Ontology::new(vec![
            OntologyType::new("root", None).with_role(RoleSpec::new("r0", "root")),
            OntologyType::new("a", Some("root")).with_role(RoleSpec::new("ra", "root")),
            OntologyType::new("a1", Some("a")).with_role(RoleSpec::new("ra1", "root")),
            OntologyType::new("b", Some("root")).with_role(RoleSpec::new("rb", "root")),
        ])
        .unwrap();
        let f = distinct.factorize();
        assert_eq!(f.factor_count(), 4);
        for t in ["a", "a1", "b"] {
            let parent = distinct.parent_of(t).unwrap().unwrap();
            let fp = f.factor_parent(f.factor_of(t).unwrap());
            assert_eq!(fp, Some(f.factor_of(parent).unwrap()));
        }
    }

    #[test]
    fn feature_changes_do_not_open_factors() {
        let o = Ontology::new(vec![
            OntologyType::new("root", None),
            OntologyType::new("a", Some("root")).with_feature("form", "solid"),
        ])
        .unwrap();
        assert_eq!(o.factorize().factor_count(), 1);
    }
}
