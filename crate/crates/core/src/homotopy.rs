//! Cylinders, homotopies relative to boundaries, ∂-equivalence, homotopy
//! inverses and fiberwise weak equivalences.
//!
//! The interval is the representable of dimension one. Homotopies are maps
//! out of the levelwise product `I × X`, so `h_e` is the restriction along
//! `{e} × X`. Over a base `p: X -> B`, a homotopy is required to be constant
//! in the base: `p ∘ h` factors through the projection `I × X -> X`.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presheaf::{product, pullback, Presheaf, PresheafMap, Section};
use crate::search::{ExtensionProblem, Over, TargetIndex};
use crate::shape::{MorphId, ShapeKind};

pub fn interval(kind: ShapeKind, truncation: usize) -> Arc<Presheaf> {
    Arc::new(Presheaf::representable(kind, 1, truncation))
}

/// Index in `I_d` of the constant section at the endpoint `e`.
pub fn endpoint(i: &Presheaf, d: usize, e: u32) -> u32 {
    i.restrict(MorphId::new(d, 0, 0), e)
}

/// `I × X` with its end inclusions and projection.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub object: Arc<Presheaf>,
    pub interval: Arc<Presheaf>,
    pub base: Arc<Presheaf>,
    pub proj: PresheafMap,
    pub to_interval: PresheafMap,
    pub ends: [PresheafMap; 2],
}

impl Cylinder {
    /// Index of the section `(t, x)` in dimension `d`.
    pub fn pair(&self, d: usize, t: u32, x: u32) -> u32 {
        t * self.base.len(d) as u32 + x
    }

    pub fn split(&self, d: usize, s: u32) -> (u32, u32) {
        let n = self.base.len(d) as u32;
        (s / n, s % n)
    }

    /// Endpoint of the interval coordinate of `s`, if it is constant.
    pub fn end_of(&self, d: usize, s: u32) -> Option<u32> {
        let (t, _) = self.split(d, s);
        (0..2).find(|&e| endpoint(&self.interval, d, e) == t)
    }
}

pub fn cylinder(x: &Arc<Presheaf>) -> Cylinder {
    let i = interval(x.kind(), x.truncation());
    let (object, to_interval, proj) = product(&i, x).expect("same kind and truncation");
    let ends = [0u32, 1].map(|e| {
        let levels = (0..=x.truncation())
            .map(|d| {
                let t = endpoint(&i, d, e);
                (0..x.len(d) as u32).map(|s| t * x.len(d) as u32 + s).collect()
            })
            .collect();
        PresheafMap::new_unchecked(x.clone(), object.clone(), levels)
    });
    Cylinder { object, interval: i, base: x.clone(), proj, to_interval, ends }
}

/// A map `I × X -> Y`.
#[derive(Debug, Clone)]
pub struct Homotopy {
    pub cylinder: Arc<Cylinder>,
    pub map: PresheafMap,
}

impl Homotopy {
    /// `h_e = h ∘ (e × id)`.
    pub fn end(&self, e: usize) -> PresheafMap {
        self.map.after(&self.cylinder.ends[e])
    }

    /// The constant homotopy `f ∘ proj`.
    pub fn constant(cylinder: Arc<Cylinder>, f: &PresheafMap) -> Homotopy {
        let map = f.after(&cylinder.proj);
        Homotopy { cylinder, map }
    }
}

/// A homotopy `I × a -> X` from `x` to `y`, constant on `I × ∂a`.
#[derive(Debug, Clone)]
pub struct BoundaryEquivalenceWitness {
    pub x: Section,
    pub y: Section,
    pub homotopy: Homotopy,
}

/// Searches ∂-equivalences in a fixed presheaf, optionally over a base.
pub struct BoundaryEquivalence<'a> {
    x: &'a Arc<Presheaf>,
    base: Option<&'a PresheafMap>,
    index: TargetIndex,
    cylinders: HashMap<usize, Arc<Cylinder>>,
}

impl<'a> BoundaryEquivalence<'a> {
    pub fn new(x: &'a Arc<Presheaf>, base: Option<&'a PresheafMap>) -> Self {
        let index = TargetIndex::new(x, base.map(|p| p.levels.as_slice()));
        BoundaryEquivalence { x, base, index, cylinders: HashMap::new() }
    }

    fn cylinder(&mut self, a: usize) -> Arc<Cylinder> {
        let (kind, n) = (self.x.kind(), self.x.truncation());
        self.cylinders
            .entry(a)
            .or_insert_with(|| Arc::new(cylinder(&Arc::new(Presheaf::representable(kind, a, n)))))
            .clone()
    }

    pub fn same_boundary(&self, s: Section, t: Section) -> bool {
        s.dim == t.dim && self.x.boundary(s) == self.x.boundary(t)
    }

    /// A homotopy from `s` to `t` rel boundary (and over the base), or
    /// `None`. Sections of dimension `N` are boundary-limited.
    pub fn witness(&mut self, s: Section, t: Section) -> Result<Option<BoundaryEquivalenceWitness>> {
        let n = self.x.truncation();
        if s.dim != t.dim {
            return Ok(None);
        }
        if s.dim >= n {
            return Err(Error::BoundaryLimited(format!(
                "sections of dimension {} need homotopies of dimension {} > truncation {n}",
                s.dim,
                s.dim + 1
            )));
        }
        if !self.same_boundary(s, t) {
            return Ok(None);
        }
        if let Some(p) = self.base {
            if p.levels[s.dim][s.idx as usize] != p.levels[t.dim][t.idx as usize] {
                return Ok(None);
            }
        }
        let a = s.dim;
        let cyl = self.cylinder(a);
        let x = self.x;
        let cat = x.cat().clone();
        let l = &cyl.object;
        let mut fixed: Vec<Vec<Option<u32>>> = Vec::with_capacity(n + 1);
        let mut bottom: Vec<Vec<u32>> = Vec::with_capacity(n + 1);
        for d in 0..=n {
            let mut fl = Vec::with_capacity(l.len(d));
            let mut bl = Vec::with_capacity(l.len(d));
            for sec in 0..l.len(d) as u32 {
                let (_, f) = cyl.split(d, sec);
                let fm = MorphId::new(d, a, f as usize);
                let value = if !cat.is_epi(fm) {
                    Some(x.restrict(fm, s.idx))
                } else {
                    match cyl.end_of(d, sec) {
                        Some(0) => Some(x.restrict(fm, s.idx)),
                        Some(_) => Some(x.restrict(fm, t.idx)),
                        None => None,
                    }
                };
                fl.push(value);
                if let Some(p) = self.base {
                    bl.push(p.target.restrict(fm, p.levels[a][s.idx as usize]));
                }
            }
            fixed.push(fl);
            bottom.push(bl);
        }
        let mut problem = ExtensionProblem::free(l, x).with_fixed(fixed);
        if let Some(p) = self.base {
            problem = problem.over(Over { p: &p.levels, bottom: &bottom });
        }
        Ok(problem.first_with(&self.index).map(|levels| BoundaryEquivalenceWitness {
            x: s,
            y: t,
            homotopy: Homotopy {
                map: PresheafMap::new_unchecked(cyl.object.clone(), x.clone(), levels),
                cylinder: cyl.clone(),
            },
        }))
    }

    pub fn equivalent(&mut self, s: Section, t: Section) -> Result<bool> {
        Ok(self.witness(s, t)?.is_some())
    }

    /// Blocks of the ∂-equivalence relation on `X_d`, in canonical order
    /// (each block sorted, blocks ordered by least member).
    pub fn partition(&mut self, d: usize) -> Result<Vec<Vec<u32>>> {
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        for s in 0..self.x.len(d) as u32 {
            let mut placed = false;
            for b in blocks.iter_mut() {
                if self.equivalent(Section::new(d, b[0]), Section::new(d, s))? {
                    b.push(s);
                    placed = true;
                    break;
                }
            }
            if !placed {
                blocks.push(vec![s]);
            }
        }
        Ok(blocks)
    }

    /// The full relation on `X_d`, for checking its axioms.
    pub fn relation(&mut self, d: usize) -> Result<Vec<Vec<bool>>> {
        let m = self.x.len(d) as u32;
        (0..m)
            .map(|s| (0..m).map(|t| self.equivalent(Section::new(d, s), Section::new(d, t))).collect())
            .collect()
    }

    pub fn presheaf(&self) -> &Arc<Presheaf> {
        self.x
    }
}

/// Convenience wrapper for a single ∂-equivalence query.
pub fn boundary_equivalent(x: &Arc<Presheaf>, s: Section, t: Section) -> Result<Option<BoundaryEquivalenceWitness>> {
    BoundaryEquivalence::new(x, None).witness(s, t)
}

pub fn partition_by_boundary_equivalence(x: &Arc<Presheaf>, d: usize) -> Result<Vec<Vec<u32>>> {
    BoundaryEquivalence::new(x, None).partition(d)
}

/// Pastes `h: x ≃ y` and `k: y ≃ z` (both rel boundary, on the same `I × a`)
/// into a homotopy `x ≃ z`, by filling the open box in `I × I × a` whose
/// faces are: constant `x` at `s = 0`, `h` at `t = 0`, `k` at `s = 1`. The
/// composite is the face `t = 1`.
pub fn compose_homotopies(
    x: &Arc<Presheaf>,
    h: &BoundaryEquivalenceWitness,
    k: &BoundaryEquivalenceWitness,
) -> Result<Option<BoundaryEquivalenceWitness>> {
    if h.y != k.x || h.x.dim != k.y.dim {
        return Err(Error::Composition("homotopies are not composable".to_string()));
    }
    let n = x.truncation();
    let a = h.x.dim;
    if a + 2 > n {
        return Err(Error::BoundaryLimited(format!(
            "pasting homotopies of {a}-sections needs dimension {} > truncation {n}",
            a + 2
        )));
    }
    let cyl = h.homotopy.cylinder.clone();
    let i = cyl.interval.clone();
    let (square, _, _) = product(&i, &cyl.object)?;
    let cat = x.cat().clone();
    let mut fixed: Vec<Vec<Option<u32>>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let inner = cyl.object.len(d) as u32;
        let mut fl = Vec::with_capacity(square.len(d));
        for sec in 0..square.len(d) as u32 {
            let (s, c) = (sec / inner, sec % inner);
            let (t, f) = cyl.split(d, c);
            let fm = MorphId::new(d, a, f as usize);
            let s_end = (0..2).find(|&e| endpoint(&i, d, e) == s);
            let t_end = (0..2).find(|&e| endpoint(&i, d, e) == t);
            let value = if !cat.is_epi(fm) || s_end == Some(0) {
                Some(x.restrict(fm, h.x.idx))
            } else if t_end == Some(0) {
                Some(h.homotopy.map.levels[d][cyl.pair(d, s, f) as usize])
            } else if s_end == Some(1) {
                Some(k.homotopy.map.levels[d][cyl.pair(d, t, f) as usize])
            } else {
                None
            };
            fl.push(value);
        }
        fixed.push(fl);
    }
    let problem = ExtensionProblem::free(&square, x).with_fixed(fixed);
    Ok(problem.first().map(|levels| {
        let top: Vec<Vec<u32>> = (0..=n)
            .map(|d| {
                let inner = cyl.object.len(d) as u32;
                let one = endpoint(&i, d, 1);
                (0..cyl.object.len(d) as u32)
                    .map(|c| {
                        let (s, f) = cyl.split(d, c);
                        levels[d][(s * inner + cyl.pair(d, one, f)) as usize]
                    })
                    .collect()
            })
            .collect();
        BoundaryEquivalenceWitness {
            x: h.x,
            y: k.y,
            homotopy: Homotopy { map: PresheafMap::new_unchecked(cyl.object.clone(), x.clone(), top), cylinder: cyl },
        }
    }))
}

/// `g` with homotopies `h: 1_X ⇒ g f` and `k: 1_Y ⇒ f g`.
#[derive(Debug, Clone)]
pub struct HomotopyInverse {
    pub g: PresheafMap,
    pub h: Homotopy,
    pub k: Homotopy,
}

/// Structure maps to a common base, for fiberwise searches.
#[derive(Debug, Clone, Copy)]
pub struct OverBase<'a> {
    pub px: &'a PresheafMap,
    pub py: &'a PresheafMap,
}

fn homotopy_between(
    cyl: &Arc<Cylinder>,
    target: &Arc<Presheaf>,
    index: &TargetIndex,
    start: &PresheafMap,
    finish: &PresheafMap,
    base: Option<&PresheafMap>,
) -> Option<Homotopy> {
    let n = target.truncation();
    let l = &cyl.object;
    let mut fixed = Vec::with_capacity(n + 1);
    let mut bottom = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let mut fl = Vec::with_capacity(l.len(d));
        let mut bl = Vec::with_capacity(l.len(d));
        for s in 0..l.len(d) as u32 {
            let (_, x) = cyl.split(d, s);
            fl.push(match cyl.end_of(d, s) {
                Some(0) => Some(start.levels[d][x as usize]),
                Some(_) => Some(finish.levels[d][x as usize]),
                None => None,
            });
            if let Some(p) = base {
                bl.push(p.levels[d][start.levels[d][x as usize] as usize]);
            }
        }
        fixed.push(fl);
        bottom.push(bl);
    }
    let mut problem = ExtensionProblem::free(l, target).with_fixed(fixed);
    if let Some(p) = base {
        problem = problem.over(Over { p: &p.levels, bottom: &bottom });
    }
    problem.first_with(index).map(|levels| Homotopy {
        map: PresheafMap::new_unchecked(l.clone(), target.clone(), levels),
        cylinder: cyl.clone(),
    })
}

/// Exhaustive search for a homotopy inverse of `f: X -> Y`, over a base if
/// given (then `g` and both homotopies live over the base).
pub fn homotopy_inverse_search(f: &PresheafMap, base: Option<OverBase<'_>>) -> Option<HomotopyInverse> {
    let (x, y) = (&f.source, &f.target);
    let cx = Arc::new(cylinder(x));
    let cy = Arc::new(cylinder(y));
    let ix = TargetIndex::new(x, base.map(|b| b.px.levels.as_slice()));
    let iy = TargetIndex::new(y, base.map(|b| b.py.levels.as_slice()));
    let id_x = PresheafMap::identity(x.clone());
    let id_y = PresheafMap::identity(y.clone());
    let mut g_problem = ExtensionProblem::free(y, x);
    if let Some(b) = base {
        g_problem = g_problem.over(Over { p: &b.px.levels, bottom: &b.py.levels });
    }
    let mut found = None;
    g_problem.for_each(&ix, |g_levels| {
        let g = PresheafMap::new_unchecked(y.clone(), x.clone(), g_levels.to_vec());
        let gf = g.after(f);
        let Some(h) = homotopy_between(&cx, x, &ix, &id_x, &gf, base.map(|b| b.px)) else {
            return ControlFlow::Continue(());
        };
        let fg = f.after(&g);
        let Some(k) = homotopy_between(&cy, y, &iy, &id_y, &fg, base.map(|b| b.py)) else {
            return ControlFlow::Continue(());
        };
        found = Some(HomotopyInverse { g, h, k });
        ControlFlow::Break(())
    });
    found
}

/// Outcome of a fiberwise weak-equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberwiseReport {
    /// `(section of the base, fiber map is a homotopy equivalence over it)`.
    pub fibers: Vec<(Section, String, bool)>,
}

impl FiberwiseReport {
    pub fn passed(&self) -> bool {
        self.fibers.iter().all(|f| f.2)
    }

    pub fn first_failure(&self) -> Option<&(Section, String, bool)> {
        self.fibers.iter().find(|f| !f.2)
    }
}

/// The fiber map `a ×_S X -> a ×_S Y` over `a` for a section `s: a -> S`,
/// with the two structure maps to `a`.
pub fn fiber_map(f: &PresheafMap, px: &PresheafMap, py: &PresheafMap, s: Section) -> Result<(PresheafMap, PresheafMap, PresheafMap)> {
    let sec = PresheafMap::from_section(px.target.clone(), s);
    let fx = pullback(&sec, px)?;
    let fy = pullback(&sec, py)?;
    let levels = fx
        .pairs
        .iter()
        .enumerate()
        .map(|(d, ps)| {
            ps.iter()
                .map(|&(a, x)| fy.pair_index(d, a, f.levels[d][x as usize]).expect("f is over S"))
                .collect()
        })
        .collect();
    let m = PresheafMap::new_unchecked(fx.object.clone(), fy.object.clone(), levels);
    Ok((m, fx.p1, fy.p1))
}

/// Weak equivalence over `S`, tested fiber by fiber: for every section
/// `a -> S`, the map of fibers must be a homotopy equivalence over `a`.
pub fn is_weak_equivalence_fiberwise(f: &PresheafMap, px: &PresheafMap, py: &PresheafMap) -> Result<FiberwiseReport> {
    if py.after(f).levels != px.levels {
        return Err(Error::Naturality("map is not over the base".to_string()));
    }
    let s = &px.target;
    let mut fibers = Vec::new();
    for sec in s.all_sections().collect::<Vec<_>>() {
        let (m, qx, qy) = fiber_map(f, px, py, sec)?;
        let ok = homotopy_inverse_search(&m, Some(OverBase { px: &qx, py: &qy })).is_some();
        fibers.push((sec, s.name(sec).to_string(), ok));
    }
    Ok(FiberwiseReport { fibers })
}

/// Absolute version: `f` is a homotopy equivalence.
pub fn is_homotopy_equivalence(f: &PresheafMap) -> bool {
    homotopy_inverse_search(f, None).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::coproduct;

    #[test]
    fn cylinder_of_point_is_interval() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Cube, 2));
        let c = cylinder(&pt);
        assert_eq!(c.object.sizes(), interval(ShapeKind::Cube, 2).sizes());
    }

    #[test]
    fn cylinder_of_interval_has_nine_edges() {
        let i = interval(ShapeKind::Cube, 2);
        let c = cylinder(&i);
        assert_eq!(c.object.len(1), 9);
        assert!(c.ends[0].is_natural() && c.ends[1].is_natural() && c.ends[0].is_mono());
        assert!(c.proj.after(&c.ends[0]).is_identity());
    }

    #[test]
    fn reflexive_witness() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Cube, 2));
        let w = boundary_equivalent(&pt, Section::new(1, 0), Section::new(1, 0)).unwrap().unwrap();
        assert_eq!(w.homotopy.end(0).levels, w.homotopy.end(1).levels);
    }

    #[test]
    fn top_dimension_is_boundary_limited() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Cube, 2));
        let r = boundary_equivalent(&pt, Section::new(2, 0), Section::new(2, 0));
        assert!(matches!(r, Err(Error::BoundaryLimited(_))));
    }

    #[test]
    fn fold_of_two_points_is_not_an_equivalence() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Cube, 2));
        let (two, _, _) = coproduct(&pt, &pt).unwrap();
        let fold = PresheafMap::to_terminal(two.clone());
        assert!(!is_homotopy_equivalence(&fold));
        assert!(is_homotopy_equivalence(&PresheafMap::identity(two)));
    }
}
