//! Finite presheaves truncated at a dimension `N`.
//!
//! A presheaf stores, for every dimension `d <= N`, an ordered list of section
//! names and, for every shape morphism `f: a -> b` with `a, b <= N`, the
//! restriction table `X_b -> X_a`. Tables for all morphisms are materialized,
//! so restriction is a lookup.

mod cells;
mod limits;
mod map;
mod pushforward;
mod sub;

pub use cells::{cell_decomposition, replay_cells, Attachment, CellDecomposition};
pub use limits::{coproduct, product, product_map, pullback, pushout, pushout_named, Pullback, Pushout};
pub use map::PresheafMap;
pub use pushforward::{pushforward_along_mono, Pushforward};
pub use sub::{anodyne_generators, boundary_subobject, boundary_via_monos, cofibration_generators, horn, open_box, Generating, Subpresheaf};

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::shape::{MorphId, ShapeCategory, ShapeKind};

/// A section `x: a -> X`, identified by the dimension of `a` and its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Section {
    pub dim: usize,
    pub idx: u32,
}

impl Section {
    pub fn new(dim: usize, idx: u32) -> Self {
        Section { dim, idx }
    }
}

#[derive(Debug, Clone)]
pub struct Presheaf {
    cat: Arc<ShapeCategory>,
    truncation: usize,
    names: Vec<Vec<String>>,
    // restrict[a][b][f.idx] is the table X_b -> X_a of f: a -> b
    restrict: Vec<Vec<Vec<Vec<u32>>>>,
    ez: OnceLock<Vec<Vec<(MorphId, u32)>>>,
    index: OnceLock<Vec<HashMap<String, u32>>>,
}

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind()
            && self.truncation == other.truncation
            && self.names == other.names
            && self.restrict == other.restrict
    }
}

impl Eq for Presheaf {}

/// Result of an exhaustive functoriality check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub equations_checked: usize,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Presheaf {
    /// Builds a presheaf from a restriction function without checking the
    /// functor laws. `restrict(f, x)` is the restriction of `x ∈ X_{f.tgt}`
    /// along `f`.
    pub fn from_fn(
        kind: ShapeKind,
        truncation: usize,
        names: Vec<Vec<String>>,
        restrict: impl Fn(MorphId, u32) -> u32,
    ) -> Presheaf {
        assert_eq!(names.len(), truncation + 1, "one name list per dimension");
        let cat = ShapeCategory::get(kind, truncation);
        let tables = (0..=truncation)
            .map(|a| {
                (0..=truncation)
                    .map(|b| {
                        cat.hom_ids(a, b)
                            .map(|f| (0..names[b].len() as u32).map(|x| restrict(f, x)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Presheaf {
            cat,
            truncation,
            names,
            restrict: tables,
            ez: OnceLock::new(),
            index: OnceLock::new(),
        }
    }

    /// Builds a presheaf from generator actions. `actions` maps a generator
    /// name and the dimension of the sections it acts on to its table. All
    /// other restrictions are derived, and the generator relations are
    /// checked; a violation names the generator and the section.
    pub fn from_generator_actions(
        kind: ShapeKind,
        truncation: usize,
        names: Vec<Vec<String>>,
        actions: &HashMap<(String, usize), Vec<u32>>,
    ) -> Result<Presheaf> {
        assert_eq!(names.len(), truncation + 1, "one name list per dimension");
        let cat = ShapeCategory::get(kind, truncation);
        let words = cat.words_within(truncation);
        let mut gen_tables: HashMap<MorphId, &Vec<u32>> = HashMap::new();
        for g in cat.generators() {
            if g.morph.src() > truncation || g.morph.tgt() > truncation {
                continue;
            }
            let key = (g.name.clone(), g.morph.tgt());
            let table = actions.get(&key).ok_or_else(|| Error::Functoriality {
                generator: g.name.clone(),
                section: format!("dimension {}", g.morph.tgt()),
                detail: "missing action table".to_string(),
            })?;
            if table.len() != names[g.morph.tgt()].len() {
                return Err(Error::Functoriality {
                    generator: g.name.clone(),
                    section: format!("dimension {}", g.morph.tgt()),
                    detail: format!("table has {} entries, expected {}", table.len(), names[g.morph.tgt()].len()),
                });
            }
            if let Some(bad) = table.iter().position(|&v| v as usize >= names[g.morph.src()].len()) {
                return Err(Error::Functoriality {
                    generator: g.name.clone(),
                    section: names[g.morph.tgt()][bad].clone(),
                    detail: "value out of range".to_string(),
                });
            }
            gen_tables.insert(g.morph, table);
        }
        for (name, dim) in actions.keys() {
            let known = cat
                .generators()
                .iter()
                .any(|g| &g.name == name && g.morph.tgt() == *dim && g.morph.src() <= truncation && *dim <= truncation);
            if !known {
                return Err(Error::Functoriality {
                    generator: name.clone(),
                    section: format!("dimension {dim}"),
                    detail: "no such generator in this truncation".to_string(),
                });
            }
        }
        // derive every table from the chosen generator words, shortest first
        let mut tables: Vec<Vec<Vec<Option<Vec<u32>>>>> = (0..=truncation)
            .map(|a| (0..=truncation).map(|b| vec![None; cat.homs(a, b).len()]).collect())
            .collect();
        fn derive(
            cat: &ShapeCategory,
            words: &crate::shape::ParentTable,
            gen_tables: &HashMap<MorphId, &Vec<u32>>,
            names: &[Vec<String>],
            tables: &mut Vec<Vec<Vec<Option<Vec<u32>>>>>,
            f: MorphId,
        ) {
            if tables[f.src()][f.tgt()][f.idx as usize].is_some() {
                return;
            }
            let table = match cat.parent(words, f) {
                None => (0..names[f.tgt()].len() as u32).collect(),
                Some((parent, g)) => {
                    derive(cat, words, gen_tables, names, tables, parent);
                    let pt = tables[parent.src()][parent.tgt()][parent.idx as usize].as_ref().unwrap();
                    let gt = gen_tables[&g.morph];
                    gt.iter().map(|&y| pt[y as usize]).collect()
                }
            };
            tables[f.src()][f.tgt()][f.idx as usize] = Some(table);
        }
        for a in 0..=truncation {
            for b in 0..=truncation {
                for f in cat.hom_ids(a, b) {
                    derive(&cat, &words, &gen_tables, &names, &mut tables, f);
                }
            }
        }
        let restrict: Vec<Vec<Vec<Vec<u32>>>> = tables
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.into_iter().map(|t| t.unwrap()).collect()).collect())
            .collect();
        let x = Presheaf {
            cat: cat.clone(),
            truncation,
            names,
            restrict,
            ez: OnceLock::new(),
            index: OnceLock::new(),
        };
        // every relation G ∘ f' must act as f'^* ∘ G^*
        for g in cat.generators() {
            let (c, b) = (g.morph.src(), g.morph.tgt());
            if c > truncation || b > truncation {
                continue;
            }
            for a in 0..=truncation {
                for fp in cat.hom_ids(a, c) {
                    let composite = cat.compose(g.morph, fp);
                    for y in 0..x.len(b) as u32 {
                        let direct = x.restrict(composite, y);
                        let stepwise = x.restrict(fp, x.restrict(g.morph, y));
                        if direct != stepwise {
                            return Err(Error::Functoriality {
                                generator: g.name.clone(),
                                section: x.names[b][y as usize].clone(),
                                detail: format!(
                                    "restriction along {} is {} but {} after {} gives {}",
                                    cat.morphism(composite),
                                    x.names[a][direct as usize],
                                    cat.morphism(fp),
                                    g.name,
                                    x.names[a][stepwise as usize]
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(x)
    }

    /// Builds from explicit per-morphism tables, unchecked.
    pub fn from_tables(
        kind: ShapeKind,
        truncation: usize,
        names: Vec<Vec<String>>,
        restrict: Vec<Vec<Vec<Vec<u32>>>>,
    ) -> Presheaf {
        Presheaf {
            cat: ShapeCategory::get(kind, truncation),
            truncation,
            names,
            restrict,
            ez: OnceLock::new(),
            index: OnceLock::new(),
        }
    }

    pub fn terminal(kind: ShapeKind, truncation: usize) -> Presheaf {
        let names = vec![vec!["*".to_string()]; truncation + 1];
        Presheaf::from_fn(kind, truncation, names, |_, _| 0)
    }

    pub fn empty(kind: ShapeKind, truncation: usize) -> Presheaf {
        Presheaf::from_fn(kind, truncation, vec![Vec::new(); truncation + 1], |_, _| 0)
    }

    /// The representable presheaf of the object of dimension `n`; sections
    /// in dimension `d` are the morphisms `d -> n` in canonical order.
    pub fn representable(kind: ShapeKind, n: usize, truncation: usize) -> Presheaf {
        assert!(n <= truncation, "representable of dimension {n} beyond truncation {truncation}");
        let cat = ShapeCategory::get(kind, truncation);
        let names = (0..=truncation)
            .map(|d| cat.homs(d, n).iter().map(|f| f.label()).collect())
            .collect();
        Presheaf::from_fn(kind, truncation, names, |f, x| {
            cat.compose(MorphId::new(f.tgt(), n, x as usize), f).idx
        })
    }

    pub fn kind(&self) -> ShapeKind {
        self.cat.kind()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn cat(&self) -> &Arc<ShapeCategory> {
        &self.cat
    }

    pub fn len(&self, d: usize) -> usize {
        self.names[d].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.names.iter().map(|n| n.len()).collect()
    }

    pub fn total_sections(&self) -> usize {
        self.names.iter().map(|n| n.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_sections() == 0
    }

    pub fn names(&self, d: usize) -> &[String] {
        &self.names[d]
    }

    pub fn all_names(&self) -> &[Vec<String>] {
        &self.names
    }

    pub fn name(&self, s: Section) -> &str {
        &self.names[s.dim][s.idx as usize]
    }

    pub fn find(&self, d: usize, name: &str) -> Option<u32> {
        let index = self.index.get_or_init(|| {
            self.names
                .iter()
                .map(|ns| ns.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect())
                .collect()
        });
        index.get(d)?.get(name).copied()
    }

    pub fn sections(&self, d: usize) -> impl Iterator<Item = Section> {
        (0..self.names[d].len() as u32).map(move |i| Section::new(d, i))
    }

    pub fn all_sections(&self) -> impl Iterator<Item = Section> + '_ {
        (0..=self.truncation).flat_map(move |d| self.sections(d))
    }

    /// Restriction of `x ∈ X_{f.tgt}` along `f`.
    pub fn restrict(&self, f: MorphId, x: u32) -> u32 {
        self.restrict[f.src()][f.tgt()][f.idx as usize][x as usize]
    }

    pub fn table(&self, f: MorphId) -> &[u32] {
        &self.restrict[f.src()][f.tgt()][f.idx as usize]
    }

    /// Exhaustive check of the identity and composition laws.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport { equations_checked: 0, failures: Vec::new() };
        let n = self.truncation;
        for d in 0..=n {
            let id = self.cat.identity(d);
            for x in 0..self.len(d) as u32 {
                report.equations_checked += 1;
                if self.restrict(id, x) != x {
                    report.failures.push(format!("id^* {} = {}", self.names[d][x as usize], self.names[d][self.restrict(id, x) as usize]));
                }
            }
        }
        for a in 0..=n {
            for b in 0..=n {
                for c in 0..=n {
                    for f in self.cat.hom_ids(a, b) {
                        for g in self.cat.hom_ids(b, c) {
                            let gf = self.cat.compose(g, f);
                            for x in 0..self.len(c) as u32 {
                                report.equations_checked += 1;
                                let lhs = self.restrict(gf, x);
                                let rhs = self.restrict(f, self.restrict(g, x));
                                if lhs != rhs && report.failures.len() < 20 {
                                    report.failures.push(format!(
                                        "({} o {})^* {} = {} but {}^* {}^* {} = {}",
                                        self.cat.morphism(g),
                                        self.cat.morphism(f),
                                        self.names[c][x as usize],
                                        self.names[a][lhs as usize],
                                        self.cat.morphism(f),
                                        self.cat.morphism(g),
                                        self.names[c][x as usize],
                                        self.names[a][rhs as usize]
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        report
    }

    fn ez_table(&self) -> &Vec<Vec<(MorphId, u32)>> {
        self.ez.get_or_init(|| {
            (0..=self.truncation)
                .map(|d| {
                    let epis = self.cat.proper_epis_from(d);
                    (0..self.len(d) as u32)
                        .map(|x| {
                            for &e in &epis {
                                let s = self.cat.chosen_section(e).expect("split epi");
                                let y = self.restrict(s, x);
                                if self.restrict(e, y) == x {
                                    return (e, y);
                                }
                            }
                            (self.cat.identity(d), x)
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// Unique `(p, y)` with `p` a split epi, `y` nondegenerate and `x = p^* y`.
    pub fn ez_decompose(&self, x: Section) -> (MorphId, Section) {
        let (e, y) = self.ez_table()[x.dim][x.idx as usize];
        (e, Section::new(e.tgt(), y))
    }

    pub fn is_degenerate(&self, x: Section) -> bool {
        self.ez_table()[x.dim][x.idx as usize].0.tgt() != x.dim
    }

    pub fn nondegenerate(&self, d: usize) -> impl Iterator<Item = Section> + '_ {
        self.sections(d).filter(move |&x| !self.is_degenerate(x))
    }

    pub fn nondegenerate_count(&self) -> Vec<usize> {
        (0..=self.truncation).map(|d| self.nondegenerate(d).count()).collect()
    }

    /// Codimension-one faces of `x` in generator order.
    pub fn faces(&self, x: Section) -> Vec<u32> {
        if x.dim == 0 {
            return Vec::new();
        }
        self.cat.faces_into(x.dim).into_iter().map(|f| self.restrict(f, x.idx)).collect()
    }

    /// The boundary of `x`: its restrictions along all non-epi morphisms,
    /// listed per source dimension.
    pub fn boundary(&self, x: Section) -> Vec<Vec<u32>> {
        (0..x.dim)
            .map(|d| {
                self.cat
                    .hom_ids(d, x.dim)
                    .filter(|&f| !self.cat.is_epi(f))
                    .map(|f| self.restrict(f, x.idx))
                    .collect()
            })
            .collect()
    }

    /// Copy with renamed sections; tables unchanged.
    pub fn renamed(&self, names: Vec<Vec<String>>) -> Presheaf {
        assert_eq!(names.iter().map(|n| n.len()).collect::<Vec<_>>(), self.sizes());
        Presheaf::from_tables(self.kind(), self.truncation, names, self.restrict.clone())
    }

    /// Copy whose sections are reordered: `order[d][i]` is the old index of
    /// the new section `i`.
    pub fn reordered(&self, order: &[Vec<u32>]) -> Presheaf {
        let mut inverse: Vec<Vec<u32>> = self.names.iter().map(|n| vec![0; n.len()]).collect();
        for (d, ord) in order.iter().enumerate() {
            for (new, &old) in ord.iter().enumerate() {
                inverse[d][old as usize] = new as u32;
            }
        }
        let names = order
            .iter()
            .enumerate()
            .map(|(d, ord)| ord.iter().map(|&o| self.names[d][o as usize].clone()).collect())
            .collect();
        Presheaf::from_fn(self.kind(), self.truncation, names, |f, x| {
            let old = order[f.tgt()][x as usize];
            inverse[f.src()][self.restrict(f, old) as usize]
        })
    }

    pub fn check_compatible(&self, other: &Presheaf) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(Error::KindMismatch(self.kind().to_string(), other.kind().to_string()));
        }
        if self.truncation != other.truncation {
            return Err(Error::TruncationMismatch(self.truncation, other.truncation));
        }
        Ok(())
    }

    /// Generator action tables keyed by generator name and the dimension of
    /// the sections acted on, in generator order.
    pub fn generator_actions(&self) -> Vec<(String, usize, MorphId)> {
        self.cat
            .generators()
            .iter()
            .filter(|g| g.morph.src() <= self.truncation && g.morph.tgt() <= self.truncation)
            .map(|g| (g.name.clone(), g.morph.tgt(), g.morph))
            .collect()
    }
}

impl fmt::Display for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} presheaf, truncation {}, sizes {:?}", self.kind(), self.truncation, self.sizes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representable_cube1_census() {
        let x = Presheaf::representable(ShapeKind::Cube, 1, 2);
        assert_eq!(x.len(0), 2);
        assert_eq!(x.len(1), 3);
        assert_eq!(x.nondegenerate_count(), vec![2, 1, 0]);
        assert!(x.validate().passed());
    }

    #[test]
    fn representable_validates() {
        for kind in ShapeKind::ALL {
            let x = Presheaf::representable(kind, 2, 3);
            assert!(x.validate().passed());
        }
    }

    #[test]
    fn ez_of_point() {
        let x = Presheaf::terminal(ShapeKind::Cube, 2);
        let (e, y) = x.ez_decompose(Section::new(2, 0));
        assert_eq!(y, Section::new(0, 0));
        assert_eq!(e.src(), 2);
        assert_eq!(e.tgt(), 0);
        let (e0, y0) = x.ez_decompose(Section::new(0, 0));
        assert_eq!(y0, Section::new(0, 0));
        assert!(x.cat().morphism(e0).is_identity());
    }

    #[test]
    fn generator_actions_round_trip() {
        let x = Presheaf::representable(ShapeKind::CubeConn, 1, 2);
        let mut actions = HashMap::new();
        for (name, dim, m) in x.generator_actions() {
            actions.insert((name, dim), x.table(m).to_vec());
        }
        let y = Presheaf::from_generator_actions(ShapeKind::CubeConn, 2, x.all_names().to_vec(), &actions).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn broken_degeneracy_is_named() {
        let x = Presheaf::representable(ShapeKind::Cube, 1, 1);
        let mut actions = HashMap::new();
        for (name, dim, m) in x.generator_actions() {
            actions.insert((name, dim), x.table(m).to_vec());
        }
        // s1 sends vertex 0 to the degenerate edge on vertex 1
        let s1 = actions.get_mut(&("s1".to_string(), 0)).unwrap();
        s1[0] = s1[1];
        let err = Presheaf::from_generator_actions(ShapeKind::Cube, 1, x.all_names().to_vec(), &actions).unwrap_err();
        match err {
            Error::Functoriality { generator, .. } => assert!(generator == "s1" || generator.starts_with('d')),
            other => panic!("unexpected {other:?}"),
        }
    }
}
