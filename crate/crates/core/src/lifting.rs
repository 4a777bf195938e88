//! Lifting problems, right lifting properties against the generating
//! families, and a bounded small-object factorization.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presheaf::{
    anodyne_generators, cofibration_generators, pushout_named, Presheaf, PresheafMap, Section, Subpresheaf,
};
use crate::shape::MorphId;
use crate::search::{ExtensionProblem, Over, TargetIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// Boundary inclusions `∂a -> a`.
    Cofibrations,
    /// Open boxes (cubes) or horns (simplices).
    Anodynes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratingFamily {
    pub kind: FamilyKind,
    pub maxdim: usize,
}

impl GeneratingFamily {
    pub fn cofibrations(maxdim: usize) -> Self {
        GeneratingFamily { kind: FamilyKind::Cofibrations, maxdim }
    }

    pub fn anodynes(maxdim: usize) -> Self {
        GeneratingFamily { kind: FamilyKind::Anodynes, maxdim }
    }

    pub fn members(&self, x: &Presheaf) -> Vec<crate::presheaf::Generating> {
        match self.kind {
            FamilyKind::Cofibrations => cofibration_generators(x.kind(), self.maxdim, x.truncation()),
            FamilyKind::Anodynes => anodyne_generators(x.kind(), self.maxdim, x.truncation()),
        }
    }
}

/// A commutative square `top: K -> X`, `bottom: L -> Y` against `i: K -> L`
/// and `p: X -> Y`.
#[derive(Debug, Clone)]
pub struct LiftingProblem {
    pub i: PresheafMap,
    pub p: PresheafMap,
    pub top: PresheafMap,
    pub bottom: PresheafMap,
}

impl LiftingProblem {
    pub fn check(&self) -> Result<()> {
        if !self.i.is_mono() {
            return Err(Error::NotMono("left map of a lifting problem".to_string()));
        }
        let lhs = self.p.after(&self.top);
        let rhs = self.bottom.after(&self.i);
        if lhs.levels != rhs.levels {
            return Err(Error::Naturality("lifting square does not commute".to_string()));
        }
        Ok(())
    }

    pub fn is_filler(&self, h: &PresheafMap) -> bool {
        h.after(&self.i).levels == self.top.levels && self.p.after(h).levels == self.bottom.levels
    }
}

/// A diagonal `h: L -> X` with `h ∘ i = top` and `p ∘ h = bottom`, if one
/// exists. The search is exhaustive, so `None` proves non-existence within
/// the truncation.
pub fn solve_lifting(problem: &LiftingProblem) -> Result<Option<PresheafMap>> {
    problem.check()?;
    let l = &problem.i.target;
    let mut fixed: Vec<Vec<Option<u32>>> = l.sizes().into_iter().map(|n| vec![None; n]).collect();
    for (d, lv) in problem.i.levels.iter().enumerate() {
        for (k, &v) in lv.iter().enumerate() {
            fixed[d][v as usize] = Some(problem.top.levels[d][k]);
        }
    }
    let search = ExtensionProblem::free(l, &problem.p.source)
        .with_fixed(fixed)
        .over(Over { p: &problem.p.levels, bottom: &problem.bottom.levels });
    Ok(search
        .first()
        .map(|levels| PresheafMap::new_unchecked(l.clone(), problem.p.source.clone(), levels)))
}

/// An unsolvable square against a generating inclusion `K ⊂ a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftingWitness {
    pub member: String,
    pub dim: usize,
    /// The bottom map `a -> Y`, as a section of `Y`.
    pub bottom: Section,
    pub bottom_name: String,
    /// `(section of K, value in X)` on the nondegenerate sections of `K`.
    pub top: Vec<(String, String)>,
    /// Full top map on all sections of `K`, in the order of `K`.
    pub top_levels: Vec<Vec<u32>>,
}

impl fmt::Display for LiftingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no filler for {} over {} with top", self.member, self.bottom_name)?;
        if self.top.is_empty() {
            write!(f, " (empty)")?;
        }
        for (k, x) in &self.top {
            write!(f, " {k}->{x}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Box<LiftingWitness>),
    /// Every checked square has a filler, but part of the family lies above
    /// the truncation.
    BoundaryLimited(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::BoundaryLimited(_) => "boundary-limited",
        }
    }
}

fn unsolved_squares(p: &PresheafMap, family: &GeneratingFamily, dim: Option<usize>, first_only: bool) -> Vec<LiftingWitness> {
    let x = &p.source;
    let y = &p.target;
    let index = TargetIndex::new(x, Some(&p.levels));
    let mut out = Vec::new();
    for member in family.members(x) {
        if dim.is_some_and(|d| d != member.dim) {
            continue;
        }
        let n = member.dim;
        let (k, incl) = member.sub.to_presheaf();
        for b in 0..y.len(n) as u32 {
            let mut solvable: HashSet<Vec<u32>> = HashSet::new();
            for z in p.fiber_of(Section::new(n, b)) {
                let key: Vec<u32> = incl
                    .levels
                    .iter()
                    .enumerate()
                    .flat_map(|(d, l)| {
                        let x = &x;
                        l.iter().map(move |&f| x.restrict(MorphId::new(d, n, f as usize), z))
                    })
                    .collect();
                solvable.insert(key);
            }
            let bottom: Vec<Vec<u32>> = incl
                .levels
                .iter()
                .enumerate()
                .map(|(d, l)| l.iter().map(|&f| y.restrict(MorphId::new(d, n, f as usize), b)).collect())
                .collect();
            let search = ExtensionProblem::free(&k, x).over(Over { p: &p.levels, bottom: &bottom });
            search.for_each(&index, |top| {
                let key: Vec<u32> = top.iter().flatten().copied().collect();
                if !solvable.contains(&key) {
                    let named = (0..=k.truncation())
                        .flat_map(|d| k.nondegenerate(d).collect::<Vec<_>>())
                        .map(|s| (k.name(s).to_string(), x.name(Section::new(s.dim, top[s.dim][s.idx as usize])).to_string()))
                        .collect();
                    out.push(LiftingWitness {
                        member: member.label.clone(),
                        dim: n,
                        bottom: Section::new(n, b),
                        bottom_name: y.name(Section::new(n, b)).to_string(),
                        top: named,
                        top_levels: top.to_vec(),
                    });
                    if first_only {
                        return ControlFlow::Break(());
                    }
                }
                ControlFlow::Continue(())
            });
            if first_only && !out.is_empty() {
                return out;
            }
        }
    }
    out
}

/// Decides whether `p` has the right lifting property against every member
/// of `family` up to the truncation.
pub fn has_rlp(p: &PresheafMap, family: &GeneratingFamily) -> Verdict {
    if let Some(w) = unsolved_squares(p, family, None, true).into_iter().next() {
        return Verdict::Fail(Box::new(w));
    }
    if family.maxdim > p.source.truncation() {
        return Verdict::BoundaryLimited(format!(
            "generators of dimension {}..={} lie above truncation {}",
            p.source.truncation() + 1,
            family.maxdim,
            p.source.truncation()
        ));
    }
    Verdict::Pass
}

pub fn is_fibration(p: &PresheafMap) -> Verdict {
    has_rlp(p, &GeneratingFamily::anodynes(p.source.truncation()))
}

pub fn is_trivial_fibration(p: &PresheafMap) -> Verdict {
    has_rlp(p, &GeneratingFamily::cofibrations(p.source.truncation()))
}

pub fn is_fibrant(x: &Arc<Presheaf>) -> Verdict {
    is_fibration(&PresheafMap::to_terminal(x.clone()))
}

/// Tries to exhibit a mono `v: Y -> Y'` as a relative cell complex of
/// anodyne generators, attaching greedily one cell whose open box already
/// lies in the current subobject. Returns the attachments on success, which
/// proves `v` anodyne. `None` is inconclusive.
pub fn anodyne_collapse(v: &PresheafMap) -> Option<Vec<String>> {
    if !v.is_mono() {
        return None;
    }
    let y = &v.target;
    let n = y.truncation();
    let cat = y.cat().clone();
    let mut t = Subpresheaf::image(v);
    let gens = anodyne_generators(y.kind(), n, n);
    let mut steps = Vec::new();
    while !t.is_full() {
        let mut attached = None;
        'search: for g in &gens {
            let a = g.dim;
            let Some(missing) = cat
                .hom_ids(a - 1, a)
                .find(|&f| cat.is_mono(f) && !g.sub.members[a - 1][f.idx as usize])
            else {
                continue;
            };
            for z in 0..y.len(a) as u32 {
                let top = Section::new(a, z);
                if t.contains(top) || y.is_degenerate(top) {
                    continue;
                }
                let face = Section::new(a - 1, y.restrict(missing, z));
                if t.contains(face) || y.is_degenerate(face) {
                    continue;
                }
                let box_inside = (0..=n).all(|d| {
                    cat.hom_ids(d, a)
                        .all(|f| !g.sub.members[d][f.idx as usize] || t.contains(Section::new(d, y.restrict(f, z))))
                });
                if box_inside {
                    attached = Some((g.label.clone(), top));
                    break 'search;
                }
            }
        }
        let (label, top) = attached?;
        steps.push(format!("{label} at {}", y.name(top)));
        t = t.union(&Subpresheaf::generated_by(y.clone(), &[top]));
    }
    Some(steps)
}

/// Statistics of one small-object pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassReport {
    pub dim: usize,
    pub cells_attached: usize,
}

#[derive(Debug, Clone)]
pub struct Factorization {
    /// `j: X -> X'`, a relative cell complex of family members.
    pub j: PresheafMap,
    /// `q: X' -> Y` with the lifting property, `q ∘ j = f`.
    pub q: PresheafMap,
    pub passes: Vec<PassReport>,
}

#[derive(Debug, Clone)]
pub enum SoaOutcome {
    Factored(Factorization),
    Exhausted { passes: Vec<PassReport>, residual: Box<LiftingWitness> },
}

/// Factors `f` as a relative cell complex followed by a map with the right
/// lifting property, attaching one cell per unsolved square. Passes are
/// stratified by dimension; each pass counts against `budget`.
pub fn bounded_soa_factorize(f: &PresheafMap, family: &GeneratingFamily, budget: usize) -> Result<SoaOutcome> {
    let n = f.source.truncation();
    let mut j = PresheafMap::identity(f.source.clone());
    let mut q = f.clone();
    let mut passes = Vec::new();
    let mut counter = 0usize;
    let lowest = match family.kind {
        FamilyKind::Cofibrations => 0,
        FamilyKind::Anodynes => 1,
    };
    for dim in lowest..=family.maxdim.min(n) {
        loop {
            let unsolved = unsolved_squares(&q, family, Some(dim), false);
            if unsolved.is_empty() {
                break;
            }
            if passes.len() == budget {
                return Ok(SoaOutcome::Exhausted { passes, residual: Box::new(unsolved[0].clone()) });
            }
            let members = family.members(&q.source);
            for w in &unsolved {
                let member = members.iter().find(|m| m.label == w.member).expect("member exists");
                let (k, incl) = member.sub.to_presheaf();
                let stage = q.source.clone();
                let top = PresheafMap::new_unchecked(k, stage, w.top_levels.clone());
                let a = member.sub.ambient.clone();
                let tag = counter;
                counter += 1;
                let po = pushout_named(&incl, &top, |l, d, s| format!("c{tag}.{}", l.names(d)[s as usize]))?;
                let bottom = PresheafMap::from_section(q.target.clone(), w.bottom).with_ends(a, q.target.clone());
                q = po.induced(&q, &bottom);
                j = po.from_x.after(&j);
            }
            passes.push(PassReport { dim, cells_attached: unsolved.len() });
        }
    }
    Ok(SoaOutcome::Factored(Factorization { j, q, passes }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::coproduct;
    use crate::shape::ShapeKind;

    #[test]
    fn identity_has_both_lifting_properties() {
        let x = Arc::new(Presheaf::representable(ShapeKind::Cube, 1, 2));
        let id = PresheafMap::identity(x);
        assert!(is_fibration(&id).is_pass());
        assert!(is_trivial_fibration(&id).is_pass());
    }

    #[test]
    fn discrete_points_are_fibrant_but_not_over_the_interval() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Cube, 2));
        let (two, _, _) = coproduct(&pt, &pt).unwrap();
        assert!(is_fibrant(&two).is_pass());
        let bd = crate::presheaf::boundary_subobject(ShapeKind::Cube, 1, 2);
        let (_, incl) = bd.to_presheaf();
        match is_fibration(&incl) {
            Verdict::Fail(w) => assert_eq!(w.dim, 1),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn point_is_fibrant() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Simplex, 3));
        assert!(is_fibrant(&pt).is_pass());
    }

    #[test]
    fn vertex_inclusion_is_anodyne_but_boundary_is_not() {
        for kind in ShapeKind::ALL {
            let i = Arc::new(Presheaf::representable(kind, 1, 2));
            let pt = Arc::new(Presheaf::representable(kind, 0, 2));
            let v = PresheafMap::from_section(i.clone(), Section::new(0, 0)).with_ends(pt, i);
            assert_eq!(anodyne_collapse(&v).map(|s| s.len()), Some(1), "{kind}");
            let bd = crate::presheaf::boundary_subobject(kind, 1, 2);
            assert!(anodyne_collapse(&bd.to_presheaf().1).is_none());
        }
    }

    #[test]
    fn beyond_truncation_is_boundary_limited() {
        let pt = Arc::new(Presheaf::terminal(ShapeKind::Cube, 1));
        let v = has_rlp(&PresheafMap::to_terminal(pt), &GeneratingFamily::anodynes(3));
        assert!(matches!(v, Verdict::BoundaryLimited(_)));
    }
}
