//! Backtracking extension of natural maps along a relative cell structure.
//!
//! Given `K ⊆ L`, values on `K`, and a target `X` (optionally over `Y` via
//! `p`, with a prescribed `bottom: L -> Y`), the solver assigns values to the
//! nondegenerate sections of `L` outside `K` by increasing dimension. In an
//! Eilenberg-Zilber category it suffices to match codimension-one faces:
//! degenerate sections follow their nondegenerate root, and every mono is a
//! composite of codimension-one faces.

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::presheaf::{Presheaf, Section};
use crate::shape::MorphId;

/// Sections of a target presheaf indexed by (image in the base, faces).
#[derive(Debug, Clone)]
pub struct TargetIndex {
    by_key: Vec<HashMap<Vec<u32>, Vec<u32>>>,
}

impl TargetIndex {
    pub fn new(target: &Presheaf, p: Option<&[Vec<u32>]>) -> TargetIndex {
        let by_key = (0..=target.truncation())
            .map(|d| {
                let mut m: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
                for z in 0..target.len(d) as u32 {
                    let mut key = Vec::with_capacity(1 + 2 * d);
                    key.push(p.map_or(0, |p| p[d][z as usize]));
                    key.extend(target.faces(Section::new(d, z)));
                    m.entry(key).or_default().push(z);
                }
                m
            })
            .collect();
        TargetIndex { by_key }
    }

    fn lookup(&self, d: usize, key: &[u32]) -> &[u32] {
        self.by_key[d].get(key).map_or(&[], |v| v.as_slice())
    }
}

/// Values of `p` and `bottom` constraining an extension to lie over a base.
#[derive(Debug, Clone, Copy)]
pub struct Over<'a> {
    pub p: &'a [Vec<u32>],
    pub bottom: &'a [Vec<u32>],
}

#[derive(Debug, Clone)]
pub struct ExtensionProblem<'a> {
    pub source: &'a Presheaf,
    pub target: &'a Presheaf,
    /// Prescribed values on a subpresheaf `K` of the source.
    pub fixed: Vec<Vec<Option<u32>>>,
    pub over: Option<Over<'a>>,
    /// Require a levelwise injective result.
    pub injective: bool,
}

#[derive(Debug, Clone, Copy)]
enum FaceSource {
    Fixed(u32),
    Cell(usize, MorphId),
}

struct Prepared {
    cells: Vec<Section>,
    faces: Vec<Vec<FaceSource>>,
    bottoms: Vec<u32>,
    roots: Vec<Vec<Option<(usize, MorphId)>>>,
}

impl<'a> ExtensionProblem<'a> {
    /// Problem with nothing fixed.
    pub fn free(source: &'a Presheaf, target: &'a Presheaf) -> Self {
        ExtensionProblem {
            source,
            target,
            fixed: source.sizes().into_iter().map(|n| vec![None; n]).collect(),
            over: None,
            injective: false,
        }
    }

    pub fn with_fixed(mut self, fixed: Vec<Vec<Option<u32>>>) -> Self {
        self.fixed = fixed;
        self
    }

    pub fn over(mut self, over: Over<'a>) -> Self {
        self.over = Some(over);
        self
    }

    pub fn injective(mut self, yes: bool) -> Self {
        self.injective = yes;
        self
    }

    pub fn index(&self) -> TargetIndex {
        TargetIndex::new(self.target, self.over.map(|o| o.p))
    }

    /// The cells the solver assigns, in order.
    pub fn cells(&self) -> Vec<Section> {
        self.prepare().cells
    }

    fn prepare(&self) -> Prepared {
        let l = self.source;
        let mut cells = Vec::new();
        let mut pos: Vec<Vec<Option<usize>>> = l.sizes().into_iter().map(|n| vec![None; n]).collect();
        for d in 0..=l.truncation() {
            for x in l.nondegenerate(d) {
                if self.fixed[d][x.idx as usize].is_none() {
                    pos[d][x.idx as usize] = Some(cells.len());
                    cells.push(x);
                }
            }
        }
        let cat = l.cat();
        let faces = cells
            .iter()
            .map(|c| {
                if c.dim == 0 {
                    return Vec::new();
                }
                cat.faces_into(c.dim)
                    .into_iter()
                    .map(|phi| {
                        let s = Section::new(c.dim - 1, l.restrict(phi, c.idx));
                        match self.fixed[s.dim][s.idx as usize] {
                            Some(v) => FaceSource::Fixed(v),
                            None => {
                                let (e, root) = l.ez_decompose(s);
                                let p = pos[root.dim][root.idx as usize]
                                    .expect("root of an unfixed face is an earlier cell");
                                FaceSource::Cell(p, e)
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let bottoms = cells
            .iter()
            .map(|c| self.over.map_or(0, |o| o.bottom[c.dim][c.idx as usize]))
            .collect();
        let roots = (0..=l.truncation())
            .map(|d| {
                l.sections(d)
                    .map(|s| {
                        if self.fixed[d][s.idx as usize].is_some() {
                            None
                        } else {
                            let (e, root) = l.ez_decompose(s);
                            Some((pos[root.dim][root.idx as usize].expect("root is a cell"), e))
                        }
                    })
                    .collect()
            })
            .collect();
        Prepared { cells, faces, bottoms, roots }
    }

    /// Enumerates all extensions in canonical order. The callback receives the
    /// full levelwise map `L -> X`; returning `Break` stops the search.
    /// Returns `false` if the search was stopped.
    pub fn for_each(&self, index: &TargetIndex, mut f: impl FnMut(&[Vec<u32>]) -> ControlFlow<()>) -> bool {
        let prep = self.prepare();
        let x = self.target;
        let m = prep.cells.len();
        let assemble = |vals: &[u32]| -> Vec<Vec<u32>> {
            prep.roots
                .iter()
                .enumerate()
                .map(|(d, r)| {
                    r.iter()
                        .enumerate()
                        .map(|(i, slot)| match slot {
                            None => self.fixed[d][i].unwrap(),
                            Some((p, e)) => x.restrict(*e, vals[*p]),
                        })
                        .collect()
                })
                .collect()
        };
        let injective_ok = |full: &[Vec<u32>]| -> bool {
            full.iter().enumerate().all(|(d, l)| {
                let mut seen = vec![false; x.len(d)];
                l.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
            })
        };
        if m == 0 {
            let full = assemble(&[]);
            if self.injective && !injective_ok(&full) {
                return true;
            }
            return f(&full).is_continue();
        }
        let mut used: Vec<Vec<bool>> = if self.injective {
            x.sizes().into_iter().map(|n| vec![false; n]).collect()
        } else {
            Vec::new()
        };
        if self.injective {
            for (d, l) in self.fixed.iter().enumerate() {
                for v in l.iter().flatten() {
                    used[d][*v as usize] = true;
                }
            }
        }
        let mut vals = vec![u32::MAX; m];
        let mut cands: Vec<&[u32]> = vec![&[]; m];
        let mut next = vec![0usize; m];
        let mut key = Vec::new();
        let candidates = |level: usize, vals: &[u32], key: &mut Vec<u32>| -> &[u32] {
            key.clear();
            key.push(prep.bottoms[level]);
            for fs in &prep.faces[level] {
                key.push(match *fs {
                    FaceSource::Fixed(v) => v,
                    FaceSource::Cell(p, e) => x.restrict(e, vals[p]),
                });
            }
            index.lookup(prep.cells[level].dim, key)
        };
        cands[0] = candidates(0, &vals, &mut key);
        let mut level = 0usize;
        loop {
            let d = prep.cells[level].dim;
            if self.injective && vals[level] != u32::MAX {
                used[d][vals[level] as usize] = false;
                vals[level] = u32::MAX;
            }
            if next[level] < cands[level].len() {
                let z = cands[level][next[level]];
                next[level] += 1;
                if self.injective {
                    if used[d][z as usize] || x.is_degenerate(Section::new(d, z)) {
                        continue;
                    }
                    used[d][z as usize] = true;
                }
                vals[level] = z;
                if level + 1 == m {
                    let full = assemble(&vals);
                    if (!self.injective || injective_ok(&full)) && f(&full).is_break() {
                        return false;
                    }
                } else {
                    level += 1;
                    cands[level] = candidates(level, &vals, &mut key);
                    next[level] = 0;
                    vals[level] = u32::MAX;
                }
            } else {
                if level == 0 {
                    return true;
                }
                level -= 1;
            }
        }
    }

    pub fn first_with(&self, index: &TargetIndex) -> Option<Vec<Vec<u32>>> {
        let mut found = None;
        self.for_each(index, |m| {
            found = Some(m.to_vec());
            ControlFlow::Break(())
        });
        found
    }

    pub fn first(&self) -> Option<Vec<Vec<u32>>> {
        self.first_with(&self.index())
    }

    /// All solutions, up to `limit` of them.
    pub fn all(&self, limit: Option<usize>) -> Vec<Vec<Vec<u32>>> {
        let index = self.index();
        let mut out = Vec::new();
        self.for_each(&index, |m| {
            out.push(m.to_vec());
            if limit.is_some_and(|l| out.len() >= l) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        out
    }

    pub fn count(&self) -> usize {
        let index = self.index();
        let mut n = 0;
        self.for_each(&index, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }
}

/// All natural maps `L -> X`, by brute force over levelwise functions.
/// Only for tiny inputs; used as an independent oracle.
pub fn brute_force_maps(l: &Presheaf, x: &Presheaf, limit: usize) -> Vec<Vec<Vec<u32>>> {
    let slots: Vec<(usize, usize)> = (0..=l.truncation())
        .flat_map(|d| (0..l.len(d)).map(move |i| (d, i)))
        .collect();
    let mut out = Vec::new();
    let mut levels: Vec<Vec<u32>> = l.sizes().into_iter().map(|n| vec![0; n]).collect();
    if slots.iter().any(|&(d, _)| x.len(d) == 0) {
        return out;
    }
    loop {
        let natural = l.generator_actions().iter().all(|(_, dim, g)| {
            (0..l.len(*dim)).all(|s| {
                levels[g.src()][l.restrict(*g, s as u32) as usize] == x.restrict(*g, levels[*dim][s])
            })
        });
        if natural {
            out.push(levels.clone());
            if out.len() >= limit {
                return out;
            }
        }
        let mut k = 0;
        loop {
            if k == slots.len() {
                return out;
            }
            let (d, i) = slots[k];
            levels[d][i] += 1;
            if (levels[d][i] as usize) < x.len(d) {
                break;
            }
            levels[d][i] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::ShapeKind;

    #[test]
    fn maps_between_representables_are_morphisms() {
        // natural maps cube1 -> cube2 are the shape morphisms (Yoneda)
        let a = Presheaf::representable(ShapeKind::Cube, 1, 2);
        let b = Presheaf::representable(ShapeKind::Cube, 2, 2);
        let n = ExtensionProblem::free(&a, &b).count();
        assert_eq!(n, a.cat().homs(1, 2).len());
    }

    #[test]
    fn solver_matches_brute_force_on_tiny_inputs() {
        let a = Presheaf::representable(ShapeKind::Simplex, 1, 1);
        let b = Presheaf::representable(ShapeKind::Simplex, 1, 1);
        let mut fast = ExtensionProblem::free(&a, &b).all(None);
        let mut slow = brute_force_maps(&a, &b, usize::MAX);
        fast.sort();
        slow.sort();
        assert_eq!(fast, slow);
    }

    #[test]
    fn injective_search_finds_automorphisms_only() {
        let a = Presheaf::representable(ShapeKind::Cube, 1, 2);
        // the interval has no nontrivial automorphism
        assert_eq!(ExtensionProblem::free(&a, &a).injective(true).count(), 1);
    }
}
