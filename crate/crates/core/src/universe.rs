//! Classifying maps into the universe of small presheaves, at finite size.
//!
//! An element of `W` over `a` is a presheaf on `A/a`, stored as a map
//! `p: E -> a` whose sections over each `g: d -> a` are numbered `0..k`.
//! A classifying map assigns one such element to every section of a base,
//! strictly natural for the chosen pullbacks. Equivalently it is a map
//! `X -> Y` together with a numbering of each fiber, and that is how
//! classifying maps are built: the universe itself is never materialized.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::homotopy::{homotopy_inverse_search, is_weak_equivalence_fiberwise, OverBase};
use crate::lifting::{is_fibration, Verdict};
use crate::minimal::{glue_equivalence_extension, Certificate, GlueData};
use crate::presheaf::{pullback, Presheaf, PresheafMap, Pullback, Section, Subpresheaf};
use crate::search::{ExtensionProblem, Over};
use crate::shape::MorphId;

pub const DEFAULT_KAPPA: usize = 8;

/// A presheaf on `A/a` with numbered sections, as a map `E -> a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallPresheaf {
    pub base_dim: usize,
    pub object: Arc<Presheaf>,
    pub map: PresheafMap,
}

impl SmallPresheaf {
    /// Number of sections lying over `id_a`.
    pub fn global_count(&self) -> usize {
        let a = self.base_dim;
        let id = self.map.target.cat().identity(a).idx;
        self.map.levels[a].iter().filter(|&&g| g == id).count()
    }

    /// Largest set of sections over a single `g: d -> a`, with its `d`.
    pub fn largest_fiber(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (d, l) in self.map.levels.iter().enumerate() {
            let mut counts: HashMap<u32, usize> = HashMap::new();
            for &g in l {
                *counts.entry(g).or_default() += 1;
            }
            if let Some(&m) = counts.values().max() {
                if m > best.1 {
                    best = (d, m);
                }
            }
        }
        best
    }

    /// The chosen restriction along `f: b -> a`: the canonical pullback,
    /// renumbered.
    pub fn restrict(&self, f: MorphId) -> Result<SmallPresheaf> {
        let a_rep = self.map.target.clone();
        let b = f.src();
        let fm = PresheafMap::from_section(a_rep, Section::new(b, f.idx));
        let pb = pullback(&fm, &self.map)?;
        let rep_b = pb.p1.target.clone();
        let names = numbered_names(&rep_b, &pb.p1.levels);
        let object = Arc::new(pb.object.renamed(names));
        let map = pb.p1.with_ends(object.clone(), rep_b);
        Ok(SmallPresheaf { base_dim: b, object, map })
    }
}

// "k/g": the k-th section over g, given sections sorted by g
fn numbered_names(rep: &Presheaf, over: &[Vec<u32>]) -> Vec<Vec<String>> {
    over.iter()
        .enumerate()
        .map(|(d, l)| {
            let mut seen: HashMap<u32, u32> = HashMap::new();
            l.iter()
                .map(|&g| {
                    let k = seen.entry(g).or_default();
                    let name = format!("{}/{}", *k, rep.names(d)[g as usize]);
                    *k += 1;
                    name
                })
                .collect()
        })
        .collect()
}

/// A strictly natural assignment of small presheaves to the sections of a
/// base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyingMap {
    pub base: Arc<Presheaf>,
    pub kappa: usize,
    pub values: Vec<Vec<SmallPresheaf>>,
}

impl ClassifyingMap {
    pub fn value(&self, s: Section) -> &SmallPresheaf {
        &self.values[s.dim][s.idx as usize]
    }

    /// First pair `(s, f)` with `y(f^* s)` different from the chosen
    /// restriction of `y(s)`, checked on generators.
    pub fn naturality_violation(&self) -> Result<Option<String>> {
        for (name, _, f) in self.base.generator_actions() {
            for s in 0..self.base.len(f.tgt()) as u32 {
                let t = self.base.restrict(f, s);
                let expected = self.value(Section::new(f.tgt(), s)).restrict(f)?;
                if *self.value(Section::new(f.src(), t)) != expected {
                    return Ok(Some(format!(
                        "value at {} differs from the restriction along {name} of the value at {}",
                        self.base.names(f.src())[t as usize],
                        self.base.names(f.tgt())[s as usize]
                    )));
                }
            }
        }
        Ok(None)
    }

    /// `y ∘ v` for `v: Y0 -> Y`.
    pub fn precompose(&self, v: &PresheafMap) -> ClassifyingMap {
        let values = v
            .levels
            .iter()
            .enumerate()
            .map(|(d, l)| l.iter().map(|&t| self.values[d][t as usize].clone()).collect())
            .collect();
        ClassifyingMap { base: v.source.clone(), kappa: self.kappa, values }
    }

    /// First value outside the universe of fibrations, if any.
    pub fn first_outside_universe(&self) -> Option<(Section, Verdict)> {
        for s in self.base.all_sections() {
            let m = is_in_universe(self.value(s));
            if !m.verdict.is_pass() {
                return Some((s, m.verdict));
            }
        }
        None
    }
}

fn fibers(p: &PresheafMap) -> Vec<Vec<Vec<u32>>> {
    p.levels
        .iter()
        .enumerate()
        .map(|(d, l)| {
            let mut out = vec![Vec::new(); p.target.len(d)];
            for (x, &t) in l.iter().enumerate() {
                out[t as usize].push(x as u32);
            }
            out
        })
        .collect()
}

/// The rank of each section within its fiber.
pub fn fiber_ranks(p: &PresheafMap) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = p.levels.iter().map(|l| vec![0; l.len()]).collect();
    for (d, fs) in fibers(p).iter().enumerate() {
        for f in fs {
            for (k, &x) in f.iter().enumerate() {
                out[d][x as usize] = k as u32;
            }
        }
    }
    out
}

/// Classifies `p: X -> Y` with a given numbering of its fibers.
pub fn classify_numbered(p: &PresheafMap, numbering: &[Vec<u32>], kappa: usize) -> Result<ClassifyingMap> {
    let (x, y) = (&p.source, &p.target);
    let n = y.truncation();
    let cat = y.cat().clone();
    // numbered[d][t][k] = the section of X over t with number k
    let mut numbered: Vec<Vec<Vec<u32>>> = fibers(p);
    for (d, fs) in numbered.iter_mut().enumerate() {
        for (t, f) in fs.iter_mut().enumerate() {
            let mut sorted = vec![u32::MAX; f.len()];
            for &xs in f.iter() {
                let k = numbering[d][xs as usize] as usize;
                if k >= sorted.len() || sorted[k] != u32::MAX {
                    return Err(Error::InvariantViolation(format!(
                        "numbering of the fiber over {} is not a bijection onto 0..{}",
                        y.names(d)[t],
                        f.len()
                    )));
                }
                sorted[k] = xs;
            }
            *f = sorted;
        }
    }
    for s in y.all_sections() {
        let size = numbered[s.dim][s.idx as usize].len();
        if size >= kappa {
            return Err(Error::Kappa { section: y.name(s).to_string(), dim: s.dim, size, kappa });
        }
    }
    let mut values = Vec::with_capacity(n + 1);
    for a in 0..=n {
        let rep = Arc::new(Presheaf::representable(y.kind(), a, n));
        let mut here = Vec::with_capacity(y.len(a));
        for s in 0..y.len(a) as u32 {
            // sections (g, k) in lexicographic order, with block offsets
            let mut offsets: Vec<Vec<u32>> = Vec::with_capacity(n + 1);
            let mut over: Vec<Vec<u32>> = Vec::with_capacity(n + 1);
            for d in 0..=n {
                let mut off = Vec::new();
                let mut ov = Vec::new();
                for g in cat.hom_ids(d, a) {
                    off.push(ov.len() as u32);
                    let t = y.restrict(g, s);
                    ov.extend(std::iter::repeat(g.idx).take(numbered[d][t as usize].len()));
                }
                offsets.push(off);
                over.push(ov);
            }
            let names = numbered_names(&rep, &over);
            let object = Presheaf::from_fn(y.kind(), n, names, |h, idx| {
                let d = h.tgt();
                let g = over[d][idx as usize];
                let k = idx - offsets[d][g as usize];
                let gm = MorphId::new(d, a, g as usize);
                let xs = numbered[d][y.restrict(gm, s) as usize][k as usize];
                let gh = cat.compose(gm, h);
                offsets[h.src()][gh.idx as usize] + numbering[h.src()][x.restrict(h, xs) as usize]
            });
            let object = Arc::new(object);
            let map = PresheafMap::new_unchecked(object.clone(), rep.clone(), over);
            here.push(SmallPresheaf { base_dim: a, object, map });
        }
        values.push(here);
    }
    Ok(ClassifyingMap { base: y.clone(), kappa, values })
}

/// The Hofmann-Streicher classifying map of `p`, numbering each fiber in
/// section order.
pub fn hs_classify(p: &PresheafMap, kappa: usize) -> Result<ClassifyingMap> {
    classify_numbered(p, &fiber_ranks(p), kappa)
}

/// `X -> Y` with sections `(s, k)`, `k` a global section of `y(s)`.
#[derive(Debug, Clone)]
pub struct Realization {
    pub map: PresheafMap,
    /// The number `k` of each section `(s, k)`.
    pub numbering: Vec<Vec<u32>>,
}

pub fn realize(y: &ClassifyingMap) -> Result<Realization> {
    if let Some(v) = y.naturality_violation()? {
        return Err(Error::Naturality(v));
    }
    let base = &y.base;
    let n = base.truncation();
    let cat = base.cat().clone();
    let mut pairs: Vec<Vec<(u32, u32)>> = Vec::with_capacity(n + 1);
    let mut index: Vec<HashMap<(u32, u32), u32>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let mut ps = Vec::new();
        for s in 0..base.len(d) as u32 {
            for k in 0..y.values[d][s as usize].global_count() as u32 {
                ps.push((s, k));
            }
        }
        index.push(ps.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect());
        pairs.push(ps);
    }
    let names = pairs
        .iter()
        .enumerate()
        .map(|(d, ps)| ps.iter().map(|&(s, k)| format!("({},{k})", base.names(d)[s as usize])).collect())
        .collect();
    // within y(s), the sections over g form a contiguous block in order of g
    let block_start = |e: &SmallPresheaf, d: usize, g: u32| -> u32 {
        e.map.levels[d].iter().position(|&h| h == g).expect("block exists") as u32
    };
    let object = Presheaf::from_fn(base.kind(), n, names, |h, idx| {
        let d = h.tgt();
        let (s, k) = pairs[d][idx as usize];
        let e = &y.values[d][s as usize];
        let id = cat.identity(d).idx;
        let start = block_start(e, d, id);
        let moved = e.object.restrict(h, start + k);
        let k2 = moved - block_start(e, h.src(), h.idx);
        index[h.src()][&(base.restrict(h, s), k2)]
    });
    let object = Arc::new(object);
    let levels = pairs.iter().map(|ps| ps.iter().map(|p| p.0).collect()).collect();
    let numbering = pairs.iter().map(|ps| ps.iter().map(|p| p.1).collect()).collect();
    Ok(Realization { map: PresheafMap::new_unchecked(object, base.clone(), levels), numbering })
}

/// The canonical comparison from the realization of
/// `classify_numbered(p, numbering)` back to `X`: `(s, k)` goes to the
/// section over `s` numbered `k`.
pub fn realization_iso(realized: &Realization, p: &PresheafMap, numbering: &[Vec<u32>]) -> Result<PresheafMap> {
    let mut by_number: Vec<HashMap<(u32, u32), u32>> = vec![HashMap::new(); numbering.len()];
    for (d, l) in p.levels.iter().enumerate() {
        for (x, &t) in l.iter().enumerate() {
            by_number[d].insert((t, numbering[d][x]), x as u32);
        }
    }
    let levels = realized
        .map
        .levels
        .iter()
        .enumerate()
        .map(|(d, l)| {
            l.iter()
                .zip(&realized.numbering[d])
                .map(|(&s, &k)| {
                    by_number[d]
                        .get(&(s, k))
                        .copied()
                        .ok_or_else(|| Error::InvariantViolation(format!("no section over {s} numbered {k}")))
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let iso = PresheafMap::new(realized.map.source.clone(), p.source.clone(), levels)?;
    if !iso.is_iso() || !p.after(&iso).same_levels(&realized.map) {
        return Err(Error::InvariantViolation("realization is not isomorphic over the base".to_string()));
    }
    Ok(iso)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseMembership {
    pub verdict: Verdict,
}

impl UniverseMembership {
    pub fn in_universe(&self) -> bool {
        self.verdict.is_pass()
    }
}

pub fn is_in_universe(e: &SmallPresheaf) -> UniverseMembership {
    UniverseMembership { verdict: is_fibration(&e.map) }
}

/// An isomorphism `realize(y) -> v^* X'` over `Y`, if the square is
/// cartesian up to isomorphism.
fn classifies_pullback(y: &ClassifyingMap, v: &PresheafMap, p_prime: &PresheafMap) -> Result<(Realization, Pullback, Option<PresheafMap>)> {
    let r = realize(y)?;
    let pb = pullback(v, p_prime)?;
    if r.map.source.sizes() != pb.object.sizes() {
        return Ok((r, pb, None));
    }
    let found = ExtensionProblem::free(&r.map.source, &pb.object)
        .over(Over { p: &pb.p1.levels, bottom: &r.map.levels })
        .injective(true)
        .first()
        .map(|levels| PresheafMap::new_unchecked(r.map.source.clone(), pb.object.clone(), levels));
    Ok((r, pb, found))
}

/// Extends `y` on `Y` to `y'` on `Y'` classifying `p'`, with `y' ∘ v = y`
/// on the nose.
pub fn extend_classifier_along_mono(v: &PresheafMap, p_prime: &PresheafMap, y: &ClassifyingMap) -> Result<ClassifyingMap> {
    if !v.is_mono() {
        return Err(Error::precondition("v is a mono", "not injective"));
    }
    if *y.base != *v.source || *p_prime.target != *v.target {
        return Err(Error::precondition("maps share their bases", "base mismatch"));
    }
    if let Some(msg) = y.naturality_violation()? {
        return Err(Error::precondition("y is natural", msg));
    }
    let (r, pb, iso) = classifies_pullback(y, v, p_prime)?;
    let Some(phi) = iso else {
        return Err(Error::precondition(
            "y classifies the pullback of p' along v",
            "no isomorphism over Y between the realization of y and the pullback",
        ));
    };
    let inv = phi.inverse().expect("injective with equal sizes");
    let mut numbering = fiber_ranks(p_prime);
    for (d, l) in pb.pairs.iter().enumerate() {
        for (k, &(_, xp)) in l.iter().enumerate() {
            numbering[d][xp as usize] = r.numbering[d][inv.levels[d][k] as usize];
        }
    }
    let extended = classify_numbered(p_prime, &numbering, y.kappa)?;
    if extended.precompose(v) != *y {
        return Err(Error::InvariantViolation("extension does not restrict to y".to_string()));
    }
    Ok(extended)
}

/// The version landing in the universe of fibrations: requires `p'` to be
/// a fibration and checks every value.
pub fn extend_classifier_into_universe(v: &PresheafMap, p_prime: &PresheafMap, y: &ClassifyingMap) -> Result<ClassifyingMap> {
    if let Verdict::Fail(w) = is_fibration(p_prime) {
        return Err(Error::precondition("p' is a fibration", w.to_string()));
    }
    if let Some((s, _)) = y.first_outside_universe() {
        return Err(Error::precondition("y lands in the universe", format!("value at {}", y.base.name(s))));
    }
    let extended = extend_classifier_along_mono(v, p_prime, y)?;
    if let Some((s, _)) = extended.first_outside_universe() {
        return Err(Error::InvariantViolation(format!("extended value at {} is not a fibration", extended.base.name(s))));
    }
    Ok(extended)
}

/// Pullbacks of `p` and `q` along one section `a -> S`.
#[derive(Debug, Clone)]
pub struct FiberPair {
    pub section: Section,
    pub x: Pullback,
    pub y: Pullback,
}

/// `Hom_S(X, Y) -> S`: a section over `s: a -> S` is a map
/// `a ×_S X -> a ×_S Y` over `a`.
#[derive(Debug, Clone)]
pub struct RelHom {
    pub object: Arc<Presheaf>,
    pub map: PresheafMap,
    pub fibers: Vec<Vec<FiberPair>>,
    /// The map of each section, on the pair sections of `a ×_S X`.
    pub maps: Vec<Vec<PresheafMap>>,
}

impl RelHom {
    pub fn fiber_of(&self, h: Section) -> &FiberPair {
        let s = self.map.levels[h.dim][h.idx as usize];
        &self.fibers[h.dim][s as usize]
    }

    pub fn section_map(&self, h: Section) -> &PresheafMap {
        &self.maps[h.dim][h.idx as usize]
    }

    /// The section over `s` whose map is `m`, if present.
    pub fn find(&self, s: Section, m: &PresheafMap) -> Option<u32> {
        (0..self.object.len(s.dim) as u32).find(|&h| {
            self.map.levels[s.dim][h as usize] == s.idx && self.maps[s.dim][h as usize].levels == m.levels
        })
    }
}

pub fn rel_hom(p: &PresheafMap, q: &PresheafMap) -> Result<RelHom> {
    if *p.target != *q.target {
        return Err(Error::precondition("same base", "p and q have different codomains"));
    }
    let s_obj = &p.target;
    let n = s_obj.truncation();
    let cat = s_obj.cat().clone();
    let mut fibers: Vec<Vec<FiberPair>> = Vec::with_capacity(n + 1);
    for a in 0..=n {
        let mut here = Vec::new();
        for s in 0..s_obj.len(a) as u32 {
            let sec = PresheafMap::from_section(s_obj.clone(), Section::new(a, s));
            here.push(FiberPair { section: Section::new(a, s), x: pullback(&sec, p)?, y: pullback(&sec, q)? });
        }
        fibers.push(here);
    }
    let mut sections: Vec<Vec<(u32, Vec<Vec<u32>>)>> = Vec::with_capacity(n + 1);
    let mut lookup: Vec<HashMap<(u32, Vec<Vec<u32>>), u32>> = Vec::with_capacity(n + 1);
    for fs in &fibers {
        let mut here = Vec::new();
        for (s, fp) in fs.iter().enumerate() {
            let problem = ExtensionProblem::free(&fp.x.object, &fp.y.object)
                .over(Over { p: &fp.y.p1.levels, bottom: &fp.x.p1.levels });
            for levels in problem.all(None) {
                here.push((s as u32, levels));
            }
        }
        lookup.push(here.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect());
        sections.push(here);
    }
    let mut counters: HashMap<(usize, u32), u32> = HashMap::new();
    let names = sections
        .iter()
        .enumerate()
        .map(|(d, ss)| {
            ss.iter()
                .map(|(s, _)| {
                    let k = counters.entry((d, *s)).or_default();
                    let name = format!("{}:{}", s_obj.names(d)[*s as usize], *k);
                    *k += 1;
                    name
                })
                .collect()
        })
        .collect();
    let object = Presheaf::from_fn(s_obj.kind(), n, names, |f, h| {
        let a = f.tgt();
        let (s, phi) = &sections[a][h as usize];
        let t = s_obj.restrict(f, *s);
        let src = &fibers[a][*s as usize];
        let dst = &fibers[f.src()][t as usize];
        // φ'(g, x) = second component of φ(f g, x)
        let restricted: Vec<Vec<u32>> = dst
            .x
            .pairs
            .iter()
            .enumerate()
            .map(|(d, ps)| {
                ps.iter()
                    .map(|&(g, xs)| {
                        let fg = cat.compose(f, MorphId::new(d, f.src(), g as usize)).idx;
                        let k = src.x.pair_index(d, fg, xs).expect("pair exists");
                        let (_, ys) = src.y.pairs[d][phi[d][k as usize] as usize];
                        dst.y.pair_index(d, g, ys).expect("pair exists")
                    })
                    .collect()
            })
            .collect();
        lookup[f.src()][&(t, restricted)]
    });
    let object = Arc::new(object);
    let map_levels = sections.iter().map(|ss| ss.iter().map(|e| e.0).collect()).collect();
    let maps = sections
        .into_iter()
        .enumerate()
        .map(|(a, ss)| {
            ss.into_iter()
                .map(|(s, levels)| {
                    let fp = &fibers[a][s as usize];
                    PresheafMap::new_unchecked(fp.x.object.clone(), fp.y.object.clone(), levels)
                })
                .collect()
        })
        .collect();
    Ok(RelHom { map: PresheafMap::new_unchecked(object.clone(), s_obj.clone(), map_levels), object, fibers, maps })
}

/// `Eq_S(X, Y) ⊆ Hom_S(X, Y)`: the sections whose map is a weak
/// equivalence over its representable.
#[derive(Debug, Clone)]
pub struct EqSubobject {
    pub hom: RelHom,
    pub sub: Subpresheaf,
    pub object: Arc<Presheaf>,
    /// `Eq_S(X, Y) -> S`.
    pub map: PresheafMap,
    /// Inclusion into `Hom_S(X, Y)`.
    pub inclusion: PresheafMap,
}

impl EqSubobject {
    /// The section of `Eq_S(X, X)` over `s` given by the identity, as an
    /// index into `Eq`.
    pub fn identity_section(&self, s: Section) -> Option<u32> {
        let fp = &self.hom.fibers[s.dim][s.idx as usize];
        let id = PresheafMap::identity(fp.x.object.clone());
        if *fp.x.object != *fp.y.object {
            return None;
        }
        let h = self.hom.find(s, &id)?;
        self.inclusion.levels[s.dim].iter().position(|&k| k == h).map(|k| k as u32)
    }
}

pub fn eq_subobject(p: &PresheafMap, q: &PresheafMap) -> Result<EqSubobject> {
    let hom = rel_hom(p, q)?;
    let members: Vec<Vec<bool>> = (0..=hom.object.truncation())
        .map(|d| {
            (0..hom.object.len(d) as u32)
                .map(|h| {
                    let sec = Section::new(d, h);
                    let fp = hom.fiber_of(sec);
                    homotopy_inverse_search(hom.section_map(sec), Some(OverBase { px: &fp.x.p1, py: &fp.y.p1 }))
                        .is_some()
                })
                .collect()
        })
        .collect();
    let sub = Subpresheaf { ambient: hom.object.clone(), members };
    if let Some(v) = sub.closure_violation() {
        return Err(Error::InvariantViolation(format!("weak equivalences are not closed under restriction: {v}")));
    }
    let (object, inclusion) = sub.to_presheaf();
    let map = hom.map.after(&inclusion);
    Ok(EqSubobject { hom, sub, object, map, inclusion })
}

/// Data for extending a pair of classifiers and an equivalence between
/// them along `j: Y -> Y'`.
#[derive(Debug, Clone)]
pub struct UnivalenceData {
    pub y0: ClassifyingMap,
    pub y1: ClassifyingMap,
    /// `e: realize(y0) -> realize(y1)` over `Y`.
    pub equivalence: Option<PresheafMap>,
    pub j: PresheafMap,
    /// Extension of `y1` to `Y'`.
    pub y1_prime: ClassifyingMap,
}

impl UnivalenceData {
    /// Builds the classifiers from families: `p0: E0 -> Y`, `p1': E1' -> Y'`
    /// and `e: E0 -> E1` over `Y`, where `E1` is the chosen pullback of `p1'`
    /// along `j`.
    pub fn from_families(
        p0: &PresheafMap,
        j: &PresheafMap,
        p1_prime: &PresheafMap,
        e: Option<&PresheafMap>,
        kappa: usize,
    ) -> Result<UnivalenceData> {
        let y1_prime = hs_classify(p1_prime, kappa)?;
        let y1 = y1_prime.precompose(j);
        let y0 = hs_classify(p0, kappa)?;
        let equivalence = match e {
            None => None,
            Some(e) => {
                let pb = pullback(j, p1_prime)?;
                if *e.source != *p0.source || *e.target != *pb.object {
                    return Err(Error::precondition(
                        "e runs from the total space of p0 to the pullback of p1'",
                        "ends do not match",
                    ));
                }
                // pullback fibers keep the order of the fibers of p1'
                let into_e0 = realization_iso(&realize(&y0)?, p0, &fiber_ranks(p0))?;
                let into_e1 = realization_iso(&realize(&y1)?, &pb.p1, &fiber_ranks(&pb.p1))?;
                let out_of_e1 = into_e1.inverse().ok_or_else(|| Error::InvariantViolation("realization is not iso".into()))?;
                Some(out_of_e1.after(e).after(&into_e0))
            }
        };
        Ok(UnivalenceData { y0, y1, equivalence, j: j.clone(), y1_prime })
    }
}

#[derive(Debug, Clone)]
pub struct UnivalenceWitness {
    pub y0_prime: ClassifyingMap,
    pub y1_prime: ClassifyingMap,
    /// `e': realize(y0') -> realize(y1')` over `Y'`.
    pub equivalence: PresheafMap,
    pub certificate: Certificate,
}

impl fmt::Display for UnivalenceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.certificate)
    }
}

/// The map `realize(y ∘ j) -> realize(y)` over `j`.
fn realized_inclusion(j: &PresheafMap, small: &Realization, big: &Realization) -> Result<PresheafMap> {
    let mut index: Vec<HashMap<(u32, u32), u32>> = vec![HashMap::new(); big.numbering.len()];
    for (d, l) in big.map.levels.iter().enumerate() {
        for (x, &t) in l.iter().enumerate() {
            index[d].insert((t, big.numbering[d][x]), x as u32);
        }
    }
    let levels = small
        .map
        .levels
        .iter()
        .enumerate()
        .map(|(d, l)| {
            l.iter()
                .zip(&small.numbering[d])
                .map(|(&s, &k)| {
                    index[d]
                        .get(&(j.levels[d][s as usize], k))
                        .copied()
                        .ok_or_else(|| Error::InvariantViolation("classifier does not extend".to_string()))
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PresheafMap::new(small.map.source.clone(), big.map.source.clone(), levels)
}

fn require_universe(y: &ClassifyingMap, name: &str) -> Result<()> {
    match y.first_outside_universe() {
        Some((s, v)) => Err(Error::precondition(name, format!("value at {} is {}", y.base.name(s), v.label()))),
        None => Ok(()),
    }
}

/// Extends `(y0, y1, e)` from `Y` to `Y'` given an extension of `y1`.
pub fn univalence_witness(data: &UnivalenceData) -> Result<UnivalenceWitness> {
    let UnivalenceData { y0, y1, equivalence, j, y1_prime } = data;
    let Some(e) = equivalence else {
        return Err(Error::precondition("equivalence between the realizations", "no equivalence supplied"));
    };
    if !j.is_mono() {
        return Err(Error::precondition("j is a cofibration", "not a mono"));
    }
    if *y0.base != *j.source || *y1.base != *j.source || *y1_prime.base != *j.target {
        return Err(Error::precondition("classifiers live on the ends of j", "base mismatch"));
    }
    for (y, name) in [(y0, "y0 is natural"), (y1, "y1 is natural"), (y1_prime, "y1' is natural")] {
        if let Some(v) = y.naturality_violation()? {
            return Err(Error::precondition(name, v));
        }
    }
    require_universe(y0, "y0 lands in the universe")?;
    require_universe(y1, "y1 lands in the universe")?;
    require_universe(y1_prime, "y1' lands in the universe")?;
    if y1_prime.precompose(j) != *y1 {
        return Err(Error::precondition("y1' extends y1", "y1' ∘ j differs from y1"));
    }
    let r0 = realize(y0)?;
    let r1 = realize(y1)?;
    let r1p = realize(y1_prime)?;
    if *e.source != *r0.map.source || *e.target != *r1.map.source {
        return Err(Error::precondition("equivalence between the realizations", "wrong ends"));
    }
    if !r1.map.after(e).same_levels(&r0.map) {
        return Err(Error::precondition("e is over Y", "e does not commute with the projections"));
    }
    let report = is_weak_equivalence_fiberwise(e, &r0.map, &r1.map)?;
    if let Some((_, s, _)) = report.first_failure() {
        return Err(Error::precondition("e is a weak equivalence", format!("fiber over {s}")));
    }

    let (y0_prime, e_prime) = if j.source.is_empty() {
        (y1_prime.clone(), PresheafMap::identity(r1p.map.source.clone()))
    } else if j.is_identity() {
        (y0.clone(), e.clone())
    } else {
        let i1 = realized_inclusion(j, &r1, &r1p)?;
        let glue = glue_equivalence_extension(&GlueData {
            j: j.clone(),
            p1_prime: r1p.map.clone(),
            p1: r1.map.clone(),
            i1,
            p0: r0.map.clone(),
            w: e.clone(),
        })?;
        if !glue.certificate.passed() {
            return Err(Error::InvariantViolation(format!("gluing failed:\n{}", glue.certificate)));
        }
        let y0p = extend_classifier_along_mono(j, &glue.p0_prime, y0)?;
        // realize(y0') ≅ X0' through the numbering used to build y0'
        let rr = realize(&y0p)?;
        let (_, _, iso) = classifies_pullback(&y0p, &PresheafMap::identity(j.target.clone()), &glue.p0_prime)?;
        let iso = iso.ok_or_else(|| Error::InvariantViolation("realization of y0' is not X0'".to_string()))?;
        // the identity pullback pairs (t, x) with x; drop to X0'
        let pb = pullback(&PresheafMap::identity(j.target.clone()), &glue.p0_prime)?;
        let to_x0p = pb.p2.after(&iso);
        let e_prime = glue.w_prime.after(&to_x0p).with_ends(rr.map.source.clone(), r1p.map.source.clone());
        (y0p, e_prime)
    };

    let r0p = realize(&y0_prime)?;
    let mut certificate = Certificate::default();
    let nat = y0_prime.naturality_violation()?;
    certificate.record("y0' is natural", nat.is_none(), nat.unwrap_or_default());
    certificate.record("y0' restricts to y0 along j", y0_prime.precompose(j) == *y0, "");
    let outside = y0_prime.first_outside_universe();
    certificate.record(
        "y0' lands in the universe",
        outside.is_none(),
        outside.map(|(s, _)| y0_prime.base.name(s).to_string()).unwrap_or_default(),
    );
    let fib = is_fibration(&r0p.map);
    certificate.record("realization of y0' is a fibration", !fib.is_fail(), fib.label());
    certificate.record("e' is over Y'", r1p.map.after(&e_prime).same_levels(&r0p.map), "");
    let report = is_weak_equivalence_fiberwise(&e_prime, &r0p.map, &r1p.map)?;
    let detail = report.first_failure().map(|f| format!("fiber over {}", f.1)).unwrap_or_default();
    certificate.record("e' is a weak equivalence", report.passed(), detail);
    let restricts = if j.source.is_empty() {
        true
    } else {
        let inc0 = realized_inclusion(j, &r0, &r0p)?;
        let inc1 = realized_inclusion(j, &r1, &r1p)?;
        e_prime.after(&inc0).same_levels(&inc1.after(e))
    };
    certificate.record("e' restricts to e along j", restricts, "");
    Ok(UnivalenceWitness { y0_prime, y1_prime: y1_prime.clone(), equivalence: e_prime, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::shape::ShapeKind;

    const C: ShapeKind = ShapeKind::Cube;

    #[test]
    fn identity_classifies_terminal_values() {
        let y = fixtures::representable(C, 1, 2);
        let cm = hs_classify(&PresheafMap::identity(y.clone()), DEFAULT_KAPPA).unwrap();
        assert!(cm.values.iter().flatten().all(|v| v.global_count() == 1 && v.map.is_iso()));
        let r = realize(&cm).unwrap();
        assert!(r.map.is_iso());
    }

    #[test]
    fn round_trip_on_a_family() {
        let d2 = fixtures::discrete(C, 2, 2);
        let i = fixtures::representable(C, 1, 2);
        let p = fixtures::trivial_family(&d2, &i);
        let y = hs_classify(&p, DEFAULT_KAPPA).unwrap();
        assert!(y.naturality_violation().unwrap().is_none());
        let r = realize(&y).unwrap();
        realization_iso(&r, &p, &fiber_ranks(&p)).unwrap();
        assert_eq!(hs_classify(&r.map, DEFAULT_KAPPA).unwrap(), y);
    }

    #[test]
    fn kappa_is_enforced() {
        let c = fixtures::codiscrete(C, 2, 2);
        let err = hs_classify(&PresheafMap::to_terminal(c), DEFAULT_KAPPA).unwrap_err();
        assert!(matches!(err, Error::Kappa { size: 16, dim: 2, .. }), "{err}");
    }

    #[test]
    fn hom_of_two_points() {
        let bd = fixtures::boundary(C, 1, 2).source.clone();
        let p = PresheafMap::to_terminal(bd);
        let h = rel_hom(&p, &p).unwrap();
        assert_eq!(h.object.len(0), 4);
        let pt = fixtures::point(C, 2);
        let to_pt = PresheafMap::identity(pt);
        let e = eq_subobject(&to_pt, &p).unwrap();
        assert_eq!(e.object.len(0), 0);
        let e2 = eq_subobject(&p, &p).unwrap();
        assert_eq!(e2.object.len(0), 2);
        assert!(e2.identity_section(Section::new(0, 0)).is_some());
    }

    #[test]
    fn univalence_on_codiscrete_families() {
        let data = fixtures::univalence_scenario(64).unwrap();
        let w = univalence_witness(&data).unwrap();
        assert_eq!(w.certificate.checks.len(), 7);
        assert!(w.certificate.passed(), "{w}");
        let missing = UnivalenceData { equivalence: None, ..data };
        assert!(matches!(univalence_witness(&missing), Err(Error::Precondition { .. })));
    }
}
