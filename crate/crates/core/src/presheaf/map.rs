use std::sync::Arc;

use crate::error::{Error, Result};

use super::{Presheaf, Section};

/// A natural transformation between truncated presheaves, stored levelwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresheafMap {
    pub source: Arc<Presheaf>,
    pub target: Arc<Presheaf>,
    pub levels: Vec<Vec<u32>>,
}

impl PresheafMap {
    /// Checked constructor: level sizes, ranges and naturality along every
    /// generator.
    pub fn new(source: Arc<Presheaf>, target: Arc<Presheaf>, levels: Vec<Vec<u32>>) -> Result<PresheafMap> {
        source.check_compatible(&target)?;
        let m = PresheafMap { source, target, levels };
        m.check()?;
        Ok(m)
    }

    pub fn new_unchecked(source: Arc<Presheaf>, target: Arc<Presheaf>, levels: Vec<Vec<u32>>) -> PresheafMap {
        PresheafMap { source, target, levels }
    }

    pub fn check(&self) -> Result<()> {
        let n = self.source.truncation();
        if self.levels.len() != n + 1 {
            return Err(Error::Naturality(format!("expected {} levels, got {}", n + 1, self.levels.len())));
        }
        for d in 0..=n {
            if self.levels[d].len() != self.source.len(d) {
                return Err(Error::Naturality(format!(
                    "level {d} has {} entries, source has {} sections",
                    self.levels[d].len(),
                    self.source.len(d)
                )));
            }
            if let Some(&v) = self.levels[d].iter().find(|&&v| v as usize >= self.target.len(d)) {
                return Err(Error::Naturality(format!("level {d} value {v} out of range")));
            }
        }
        for (name, dim, g) in self.source.generator_actions() {
            for x in 0..self.source.len(dim) as u32 {
                let lhs = self.levels[g.src()][self.source.restrict(g, x) as usize];
                let rhs = self.target.restrict(g, self.levels[dim][x as usize]);
                if lhs != rhs {
                    return Err(Error::Naturality(format!(
                        "{name} on {}: f({}) = {} but {name}(f({})) = {}",
                        self.source.name(Section::new(dim, x)),
                        self.source.name(Section::new(g.src(), self.source.restrict(g, x))),
                        self.target.name(Section::new(g.src(), lhs)),
                        self.source.name(Section::new(dim, x)),
                        self.target.name(Section::new(g.src(), rhs)),
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_natural(&self) -> bool {
        self.check().is_ok()
    }

    pub fn identity(x: Arc<Presheaf>) -> PresheafMap {
        let levels = (0..=x.truncation()).map(|d| (0..x.len(d) as u32).collect()).collect();
        PresheafMap { source: x.clone(), target: x, levels }
    }

    /// The unique map to a terminal presheaf.
    pub fn to_terminal(x: Arc<Presheaf>) -> PresheafMap {
        let t = Arc::new(Presheaf::terminal(x.kind(), x.truncation()));
        let levels = (0..=x.truncation()).map(|d| vec![0; x.len(d)]).collect();
        PresheafMap { source: x, target: t, levels }
    }

    /// The map classifying a section `x` of `X`, from the representable of
    /// its dimension.
    pub fn from_section(x: Arc<Presheaf>, s: Section) -> PresheafMap {
        let a = Arc::new(Presheaf::representable(x.kind(), s.dim, x.truncation()));
        let levels = (0..=x.truncation())
            .map(|d| x.cat().hom_ids(d, s.dim).map(|f| x.restrict(f, s.idx)).collect())
            .collect();
        PresheafMap { source: a, target: x, levels }
    }

    pub fn apply(&self, s: Section) -> Section {
        Section::new(s.dim, self.levels[s.dim][s.idx as usize])
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PresheafMap) -> PresheafMap {
        let levels = first
            .levels
            .iter()
            .enumerate()
            .map(|(d, l)| l.iter().map(|&x| self.levels[d][x as usize]).collect())
            .collect();
        PresheafMap { source: first.source.clone(), target: self.target.clone(), levels }
    }

    pub fn is_mono(&self) -> bool {
        self.levels.iter().all(|l| {
            let mut seen = std::collections::HashSet::new();
            l.iter().all(|v| seen.insert(*v))
        })
    }

    pub fn is_epi(&self) -> bool {
        self.levels.iter().enumerate().all(|(d, l)| {
            let mut hit = vec![false; self.target.len(d)];
            for &v in l {
                hit[v as usize] = true;
            }
            hit.into_iter().all(|h| h)
        })
    }

    pub fn is_iso(&self) -> bool {
        self.is_mono() && self.is_epi()
    }

    pub fn inverse(&self) -> Option<PresheafMap> {
        if !self.is_iso() {
            return None;
        }
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let mut inv = vec![0; l.len()];
                for (i, &v) in l.iter().enumerate() {
                    inv[v as usize] = i as u32;
                }
                inv
            })
            .collect();
        Some(PresheafMap { source: self.target.clone(), target: self.source.clone(), levels })
    }

    /// Same levels, viewed as maps between other (equal) presheaf values.
    pub fn with_ends(&self, source: Arc<Presheaf>, target: Arc<Presheaf>) -> PresheafMap {
        PresheafMap { source, target, levels: self.levels.clone() }
    }

    pub fn is_identity(&self) -> bool {
        *self.source == *self.target
            && self.levels.iter().all(|l| l.iter().enumerate().all(|(i, &v)| i as u32 == v))
    }

    pub fn same_levels(&self, other: &PresheafMap) -> bool {
        self.levels == other.levels
    }

    /// Preimage of a section `y` of the target in dimension `y.dim`.
    pub fn fiber_of(&self, y: Section) -> Vec<u32> {
        self.levels[y.dim]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == y.idx)
            .map(|(i, _)| i as u32)
            .collect()
    }
}
