//! Rule-based alias detection between entity surfaces.
//!
//! Surfaces are compared case-insensitively after collapsing whitespace.
//! Three rule sets are available:
//!
//! * `biomedical-bacteria`: identical surfaces; a first word abbreviated to
//!   its initial plus `.` with all other words equal (`S. Typhimurium` /
//!   `Salmonella Typhimurium`); one surface a character prefix of the other
//!   and longer than half of it (`salmonella` / `salmonellae`).
//! * `biomedical-prefix`: one surface is a character prefix of the other.
//! * `general`: identical surfaces; word-level prefix; `Chief Executive...` /
//!   `CEO`; `Mr.`/`Ms.`/`Mrs.` plus a last word that ends the other surface;
//!   word-level suffix unless both entities are of type `POST`.
//!
//! Word-level rather than character-level prefix/suffix matching is used for
//! `general` so that e.g. `AB` never aliases `ABB Asea Brown Boveri Ltd.`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Entity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AliasRuleSet {
    BiomedicalBacteria,
    BiomedicalPrefix,
    General,
}

impl AliasRuleSet {
    pub const ALL: [AliasRuleSet; 3] = [
        AliasRuleSet::BiomedicalBacteria,
        AliasRuleSet::BiomedicalPrefix,
        AliasRuleSet::General,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AliasRuleSet::BiomedicalBacteria => "biomedical-bacteria",
            AliasRuleSet::BiomedicalPrefix => "biomedical-prefix",
            AliasRuleSet::General => "general",
        }
    }
}

impl fmt::Display for AliasRuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AliasRuleSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AliasRuleSet::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                format!("unknown alias rule set '{s}' (expected biomedical-bacteria, biomedical-prefix or general)")
            })
    }
}

const HONORIFICS: [&str; 6] = ["mr.", "ms.", "mrs.", "mr", "ms", "mrs"];

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// True when the two surfaces are aliases under `rules`. Entity types are
/// not consulted; see [`are_aliases_typed`].
pub fn are_aliases(surface_a: &str, surface_b: &str, rules: AliasRuleSet) -> bool {
    are_aliases_typed(surface_a, surface_b, None, rules)
}

/// Like [`are_aliases`], for two surfaces of the given entity type. The type
/// only matters for the `general` suffix rule, which is disabled for `POST`.
pub fn are_aliases_typed(
    surface_a: &str,
    surface_b: &str,
    entity_type: Option<&str>,
    rules: AliasRuleSet,
) -> bool {
    let a = normalize(surface_a);
    let b = normalize(surface_b);
    if a == b {
        return true;
    }
    if a.is_empty() || b.is_empty() {
        return false;
    }
    match rules {
        AliasRuleSet::BiomedicalBacteria => {
            short_form(&a, &b) || short_form(&b, &a) || long_prefix(&a, &b) || long_prefix(&b, &a)
        }
        AliasRuleSet::BiomedicalPrefix => a.starts_with(&b) || b.starts_with(&a),
        AliasRuleSet::General => {
            let aw: Vec<&str> = a.split(' ').collect();
            let bw: Vec<&str> = b.split(' ').collect();
            let both_post = entity_type.is_some_and(|t| t.eq_ignore_ascii_case("POST"));
            aw.starts_with(&bw)
                || bw.starts_with(&aw)
                || chief_executive(&aw, &bw)
                || chief_executive(&bw, &aw)
                || honorific(&aw, &bw)
                || honorific(&bw, &aw)
                || (!both_post && (aw.ends_with(&bw) || bw.ends_with(&aw)))
        }
    }
}

/// `short`'s first word is the initial of `long`'s first word followed by a
/// period, and the remaining words agree.
fn short_form(short: &str, long: &str) -> bool {
    let sw: Vec<&str> = short.split(' ').collect();
    let lw: Vec<&str> = long.split(' ').collect();
    if sw.len() < 2 || sw.len() != lw.len() || sw[1..] != lw[1..] {
        return false;
    }
    let mut initial = lw[0].chars();
    let (Some(first), Some(_)) = (initial.next(), initial.next()) else {
        return false;
    };
    let mut abbrev = sw[0].chars();
    abbrev.next() == Some(first) && abbrev.next() == Some('.') && abbrev.next().is_none()
}

fn long_prefix(prefix: &str, whole: &str) -> bool {
    whole.starts_with(prefix) && 2 * prefix.chars().count() > whole.chars().count()
}

fn chief_executive(a: &[&str], b: &[&str]) -> bool {
    a.starts_with(&["chief", "executive"]) && b == ["ceo"]
}

fn honorific(a: &[&str], b: &[&str]) -> bool {
    a.len() >= 2 && HONORIFICS.contains(&a[0]) && b.last() == a.last()
}

/// Partition of a document's entities into alias groups.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AliasGroups {
    groups: Vec<Vec<String>>,
    index: BTreeMap<String, usize>,
}

impl AliasGroups {
    /// Every entity in its own group.
    pub fn singletons(entities: &[Entity]) -> Self {
        Self::from_groups(entities.iter().map(|e| vec![e.entity_id.clone()]).collect())
    }

    /// Builds the partition from explicit groups. Members are sorted and
    /// groups are ordered by their smallest member.
    pub fn from_groups(mut groups: Vec<Vec<String>>) -> Self {
        for g in &mut groups {
            g.sort();
            g.dedup();
        }
        groups.retain(|g| !g.is_empty());
        groups.sort();
        let mut index = BTreeMap::new();
        for (gi, g) in groups.iter().enumerate() {
            for id in g {
                index.insert(id.clone(), gi);
            }
        }
        AliasGroups { groups, index }
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn group_of(&self, entity_id: &str) -> Option<usize> {
        self.index.get(entity_id).copied()
    }

    /// Members of the group containing `entity_id` (including itself).
    pub fn members(&self, entity_id: &str) -> Option<&[String]> {
        self.group_of(entity_id).map(|g| self.groups[g].as_slice())
    }

    pub fn same_group(&self, a: &str, b: &str) -> bool {
        a == b
            || matches!((self.group_of(a), self.group_of(b)), (Some(x), Some(y)) if x == y)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Transitive closure of pairwise aliasing over canonical surfaces. Entities
/// of different types are never grouped.
pub fn alias_closure(entities: &[Entity], rules: AliasRuleSet) -> AliasGroups {
    let mut sets = DisjointSet::new(entities.len());
    for i in 0..entities.len() {
        for j in i + 1..entities.len() {
            let (a, b) = (&entities[i], &entities[j]);
            if a.entity_type == b.entity_type
                && are_aliases_typed(
                    &a.canonical_surface,
                    &b.canonical_surface,
                    Some(&a.entity_type),
                    rules,
                )
            {
                sets.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, e) in entities.iter().enumerate() {
        groups.entry(sets.find(i)).or_default().push(e.entity_id.clone());
    }
    AliasGroups::from_groups(groups.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entity(id: &str, ty: &str, surface: &str) -> Entity {
        Entity {
            entity_id: id.into(),
            entity_type: ty.into(),
            canonical_surface: surface.into(),
            mention_ids: vec![format!("{id}/m0")],
        }
    }

    #[test]
    fn bacteria_short_form() {
        let r = AliasRuleSet::BiomedicalBacteria;
        assert!(are_aliases("Salmonella Typhimurium", "S. Typhimurium", r));
        assert!(are_aliases("S. Typhimurium", "salmonella  typhimurium", r));
        assert!(!are_aliases("S. Typhimurium", "Streptococcus pyogenes", r));
        assert!(!are_aliases("T. Typhimurium", "Salmonella Typhimurium", r));
    }

    #[test]
    fn bacteria_half_length_prefix() {
        let r = AliasRuleSet::BiomedicalBacteria;
        assert!(are_aliases("salmonellae", "salmonella", r));
        assert!(are_aliases("Salmonella", "salmonellae", r));
        // 10 chars is not more than half of 22.
        assert!(!are_aliases("Salmonella", "Salmonella Typhimurium", r));
    }

    #[test]
    fn prefix_rule() {
        let r = AliasRuleSet::BiomedicalPrefix;
        assert!(are_aliases("EGFR", "EGFR gene", r));
        assert!(are_aliases("egfr gene", "EGFR", r));
        assert!(!are_aliases("EGFR", "HER2", r));
    }

    #[test]
    fn general_rules() {
        let r = AliasRuleSet::General;
        assert!(are_aliases("Bert-Olof Svanholm", "Mr. Svanholm", r));
        assert!(are_aliases("Ms. Jones", "Alice Jones", r));
        assert!(are_aliases("Mrs. Jones", "Alice Jones", r));
        assert!(are_aliases("AB Volvo", "Volvo", r));
        assert!(are_aliases("Chief Executive Officer", "CEO", r));
        assert!(are_aliases("CEO", "chief executive", r));
        assert!(!are_aliases("AB", "ABB Asea Brown Boveri Ltd.", r));
        assert!(!are_aliases("Pehr G. Gyllenhammar", "Bert-Olof Svanholm", r));
    }

    #[test]
    fn general_suffix_rule_skips_posts() {
        let r = AliasRuleSet::General;
        assert!(are_aliases_typed("vice president", "president", Some("PER"), r));
        assert!(!are_aliases_typed("vice president", "president", Some("POST"), r));
        // Prefix still applies to posts.
        assert!(are_aliases_typed("president", "president and chief", Some("POST"), r));
    }

    #[test]
    fn identical_surfaces_always_alias() {
        for r in AliasRuleSet::ALL {
            assert!(are_aliases("x", "x", r));
            assert!(are_aliases("Renault SA", "renault   sa", r));
        }
    }

    #[test]
    fn ruleset_names_round_trip() {
        for r in AliasRuleSet::ALL {
            assert_eq!(r.as_str().parse::<AliasRuleSet>().unwrap(), r);
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(json, format!("\"{}\"", r.as_str()));
        }
        assert!("other".parse::<AliasRuleSet>().is_err());
    }

    #[test]
    fn closure_groups_volvo() {
        let entities = vec![
            entity("ab", "ORG", "AB Volvo"),
            entity("v", "ORG", "Volvo"),
            entity("r", "ORG", "Renault SA"),
        ];
        let groups = alias_closure(&entities, AliasRuleSet::General);
        assert_eq!(groups.groups().len(), 2);
        assert!(groups.same_group("ab", "v"));
        assert!(!groups.same_group("ab", "r"));
        assert_eq!(groups.members("v").unwrap(), ["ab", "v"]);
    }

    #[test]
    fn closure_without_aliases_is_singletons() {
        let entities = vec![
            entity("a", "ORG", "Alpha"),
            entity("b", "ORG", "Beta"),
            entity("c", "ORG", "Gamma"),
        ];
        let groups = alias_closure(&entities, AliasRuleSet::General);
        assert_eq!(groups, AliasGroups::singletons(&entities));
    }

    #[test]
    fn closure_is_transitive() {
        // a~b (prefix), b~c (prefix), a and c unrelated directly.
        let entities = vec![
            entity("a", "Gene", "EGF"),
            entity("b", "Gene", "EGFR"),
            entity("c", "Gene", "EGFR22"),
            entity("d", "Gene", "KRAS"),
        ];
        assert!(!are_aliases("EGF", "EGFR22", AliasRuleSet::BiomedicalBacteria));
        let groups = alias_closure(&entities, AliasRuleSet::BiomedicalBacteria);
        assert!(are_aliases("EGF", "EGFR", AliasRuleSet::BiomedicalBacteria));
        assert!(are_aliases("EGFR", "EGFR22", AliasRuleSet::BiomedicalBacteria));
        assert!(groups.same_group("a", "c"));
        assert_eq!(groups.groups().len(), 2);
    }

    #[test]
    fn closure_never_crosses_types() {
        let entities = vec![entity("a", "ORG", "Apple"), entity("b", "FRUIT", "Apple")];
        let groups = alias_closure(&entities, AliasRuleSet::General);
        assert!(!groups.same_group("a", "b"));
    }

    fn surface() -> impl Strategy<Value = String> {
        let word = prop::sample::select(vec![
            "s.", "salmonella", "salmonellae", "typhimurium", "mr.", "ms.", "svanholm", "ab",
            "volvo", "chief", "executive", "ceo", "Volvo", "egfr", "x",
        ]);
        prop::collection::vec(word, 1..4).prop_map(|w| w.join(" "))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn aliasing_is_symmetric(a in surface(), b in surface()) {
            for r in AliasRuleSet::ALL {
                prop_assert_eq!(are_aliases(&a, &b, r), are_aliases(&b, &a, r));
                prop_assert_eq!(
                    are_aliases_typed(&a, &b, Some("POST"), r),
                    are_aliases_typed(&b, &a, Some("POST"), r)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn closure_is_a_partition(
            surfaces in prop::collection::vec((surface(), 0..2usize), 0..10),
            rules in prop::sample::select(AliasRuleSet::ALL.to_vec()),
        ) {
            let entities: Vec<Entity> = surfaces
                .iter()
                .enumerate()
                .map(|(i, (s, t))| entity(&format!("e{i}"), ["ORG", "PER"][*t], s))
                .collect();
            let groups = alias_closure(&entities, rules);
            let mut all: Vec<String> = groups.groups().iter().flatten().cloned().collect();
            all.sort();
            let mut expected: Vec<String> = entities.iter().map(|e| e.entity_id.clone()).collect();
            expected.sort();
            prop_assert_eq!(all, expected);
            for g in groups.groups() {
                prop_assert!(!g.is_empty());
                let ty = &entities.iter().find(|e| e.entity_id == g[0]).unwrap().entity_type;
                for id in g {
                    prop_assert_eq!(&entities.iter().find(|e| &e.entity_id == id).unwrap().entity_type, ty);
                }
            }
            // Pairwise aliases always land in one group.
            for a in &entities {
                for b in &entities {
                    if a.entity_type == b.entity_type
                        && are_aliases_typed(&a.canonical_surface, &b.canonical_surface, Some(&a.entity_type), rules)
                    {
                        prop_assert!(groups.same_group(&a.entity_id, &b.entity_id));
                    }
                }
            }
        }
    }
}
