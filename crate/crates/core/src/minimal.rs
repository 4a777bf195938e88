//! Minimal complexes and minimal fibrations.
//!
//! Everything here works relative to an optional base `p: X -> B`. With a
//! base, sections are only compared inside a fiber of `p` and homotopies
//! are constant in `B`; this is the slice `A/B` without building a second
//! shape category. Without a base it is the absolute case.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::homotopy::{
    cylinder, is_homotopy_equivalence, is_weak_equivalence_fiberwise, BoundaryEquivalence, Cylinder, Homotopy,
};
use crate::lifting::{
    anodyne_collapse, bounded_soa_factorize, is_fibrant, is_fibration, is_trivial_fibration, solve_lifting,
    GeneratingFamily, LiftingProblem, LiftingWitness, PassReport, SoaOutcome, Verdict,
};
use crate::presheaf::{pullback, pushforward_along_mono, Presheaf, PresheafMap, Section, Subpresheaf};
use crate::search::{ExtensionProblem, Over, TargetIndex};
use crate::shape::MorphId;

/// One verified post-condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Every post-condition checked by a construction, plus notes on what the
/// truncation leaves unchecked.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Certificate {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn record(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn absorb(&mut self, prefix: &str, other: &Certificate) {
        for c in &other.checks {
            self.checks.push(Check { name: format!("{prefix}: {}", c.name), ..c.clone() });
        }
        self.notes.extend(other.notes.iter().map(|n| format!("{prefix}: {n}")));
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "[{mark}] {}", c.name)?;
            } else {
                writeln!(f, "[{mark}] {}: {}", c.name, c.detail)?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Non-singleton ∂-equivalence blocks below the truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalityReport {
    pub truncation: usize,
    pub blocks: Vec<(usize, Vec<u32>)>,
}

impl MinimalityReport {
    pub fn passed(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Whether every ∂-equivalence block of `X` (over `base`, if given) in
/// dimensions below the truncation is a singleton.
pub fn is_minimal_complex(x: &Arc<Presheaf>, base: Option<&PresheafMap>) -> Result<MinimalityReport> {
    let n = x.truncation();
    let mut eq = BoundaryEquivalence::new(x, base);
    let mut blocks = Vec::new();
    for d in 0..n {
        for b in eq.partition(d)? {
            if b.len() > 1 {
                blocks.push((d, b));
            }
        }
    }
    Ok(MinimalityReport { truncation: n, blocks })
}

/// Which member of a ∂-equivalence block without degenerate sections is
/// selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representatives {
    #[default]
    Least,
    Greatest,
}

/// A minimal subcomplex `S ⊆ X` with a retraction and a deformation.
#[derive(Debug, Clone)]
pub struct MinimalModel {
    pub x: Arc<Presheaf>,
    pub base: Option<PresheafMap>,
    pub sub: Subpresheaf,
    pub s: Arc<Presheaf>,
    /// `i: S -> X`.
    pub i: PresheafMap,
    /// `r: X -> S` with `r ∘ i = id`.
    pub r: PresheafMap,
    /// `h: I × X -> X`, constant on `S`, `h_0 = i ∘ r`, `h_1 = id`.
    pub h: Homotopy,
    pub certificate: Certificate,
}

pub fn minimal_model(x: &Arc<Presheaf>) -> Result<MinimalModel> {
    minimal_model_with(x, None, Representatives::Least)
}

fn structure_map(x: &Arc<Presheaf>, base: Option<&PresheafMap>) -> Result<PresheafMap> {
    match base {
        Some(p) if *p.source != **x => Err(Error::Naturality("base map does not start at X".to_string())),
        Some(p) => Ok(p.clone()),
        None => Ok(PresheafMap::to_terminal(x.clone())),
    }
}

fn require_fibration(p: &PresheafMap, name: &str) -> Result<()> {
    match is_fibration(p) {
        Verdict::Fail(w) => Err(Error::precondition(name, w.to_string())),
        _ => Ok(()),
    }
}

/// Selected sections: every degenerate section, one member of each
/// nondegenerate block below the truncation, everything in the top
/// dimension.
fn select(x: &Arc<Presheaf>, base: Option<&PresheafMap>, order: Representatives) -> Result<Vec<Vec<bool>>> {
    let n = x.truncation();
    let mut eq = BoundaryEquivalence::new(x, base);
    let mut selected: Vec<Vec<bool>> = x.sizes().into_iter().map(|k| vec![false; k]).collect();
    for d in 0..n {
        for block in eq.partition(d)? {
            let degenerate: Vec<u32> = block.iter().copied().filter(|&s| x.is_degenerate(Section::new(d, s))).collect();
            if degenerate.len() > 1 {
                return Err(Error::InvariantViolation(format!(
                    "distinct degenerate {d}-sections {} are ∂-equivalent",
                    degenerate.iter().map(|&s| x.names(d)[s as usize].as_str()).collect::<Vec<_>>().join(", ")
                )));
            }
            let pick = match (degenerate.first(), order) {
                (Some(&s), _) => s,
                (None, Representatives::Least) => block[0],
                (None, Representatives::Greatest) => *block.last().expect("blocks are nonempty"),
            };
            selected[d][pick as usize] = true;
        }
    }
    selected[n].iter_mut().for_each(|b| *b = true);
    Ok(selected)
}

/// The greedy maximal subobject made of selected sections.
fn maximal_selected(x: &Presheaf, selected: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let mut members: Vec<Vec<bool>> = x.sizes().into_iter().map(|k| vec![false; k]).collect();
    for d in 0..=x.truncation() {
        for s in 0..x.len(d) as u32 {
            let sec = Section::new(d, s);
            members[d][s as usize] = if x.is_degenerate(sec) {
                let (_, root) = x.ez_decompose(sec);
                members[root.dim][root.idx as usize]
            } else {
                selected[d][s as usize] && x.faces(sec).iter().all(|&z| members[d - 1][z as usize])
            };
        }
    }
    members
}

/// Builds a minimal model by selection, greedy maximality, then cell-by-cell
/// extension of the retraction and the deformation. For each nondegenerate
/// `x ∉ S` the search looks directly for `y ∈ S` and `H: I × a -> X` with
/// `H_0 = y`, `H_1 = x` and `H` prescribed on `I × ∂a`.
pub fn minimal_model_with(x: &Arc<Presheaf>, base: Option<&PresheafMap>, order: Representatives) -> Result<MinimalModel> {
    let p = structure_map(x, base)?;
    require_fibration(&p, "X is fibrant")?;
    let n = x.truncation();
    let cat = x.cat().clone();
    let selected = select(x, base, order)?;
    let members = maximal_selected(x, &selected);
    let sub = Subpresheaf::new(x.clone(), members)?;

    let cx = Arc::new(cylinder(x));
    let mut ir: Vec<Vec<Option<u32>>> = x.sizes().into_iter().map(|k| vec![None; k]).collect();
    let mut hm: Vec<Vec<Option<u32>>> = cx.object.sizes().into_iter().map(|k| vec![None; k]).collect();
    let index = TargetIndex::new(x, Some(&p.levels));
    let mut rep_cylinders: HashMap<usize, Cylinder> = HashMap::new();
    let mut top_cells = 0usize;
    for d in 0..=n {
        for z in 0..x.len(d) as u32 {
            if sub.contains(Section::new(d, z)) {
                ir[d][z as usize] = Some(z);
                for t in 0..cx.interval.len(d) as u32 {
                    hm[d][cx.pair(d, t, z) as usize] = Some(z);
                }
            }
        }
    }
    for a in 0..=n {
        for xs in 0..x.len(a) as u32 {
            let sec = Section::new(a, xs);
            if ir[a][xs as usize].is_some() {
                continue;
            }
            if x.is_degenerate(sec) {
                return Err(Error::InvariantViolation(format!("degenerate section {} was not reached", x.name(sec))));
            }
            let cyl = rep_cylinders
                .entry(a)
                .or_insert_with(|| cylinder(&Arc::new(Presheaf::representable(x.kind(), a, n))));
            let l = cyl.object.clone();
            let pb = p.levels[a][xs as usize];
            // values on I × ∂a and at the end t = 1; the end t = 0 depends on y
            let mut fixed: Vec<Vec<Option<u32>>> = Vec::with_capacity(n + 1);
            let mut bottom: Vec<Vec<u32>> = Vec::with_capacity(n + 1);
            let mut start_slots: Vec<(usize, u32, MorphId)> = Vec::new();
            for d in 0..=n {
                let mut fl = Vec::with_capacity(l.len(d));
                let mut bl = Vec::with_capacity(l.len(d));
                for c in 0..l.len(d) as u32 {
                    let (t, f) = cyl.split(d, c);
                    let fm = MorphId::new(d, a, f as usize);
                    let value = if !cat.is_epi(fm) {
                        let z = x.restrict(fm, xs);
                        Some(hm[d][cx.pair(d, t, z) as usize].ok_or_else(|| {
                            Error::InvariantViolation(format!("deformation undefined on a face of {}", x.name(sec)))
                        })?)
                    } else {
                        match cyl.end_of(d, c) {
                            Some(0) => {
                                start_slots.push((d, c, fm));
                                None
                            }
                            Some(_) => Some(x.restrict(fm, xs)),
                            None => None,
                        }
                    };
                    fl.push(value);
                    bl.push(p.target.restrict(fm, pb));
                }
                fixed.push(fl);
                bottom.push(bl);
            }
            let boundary_image: Vec<(MorphId, u32)> = (0..=n)
                .flat_map(|d| cat.hom_ids(d, a).filter(|&f| !cat.is_epi(f)).collect::<Vec<_>>())
                .map(|f| (f, ir[f.src()][x.restrict(f, xs) as usize].expect("lower sections are retracted")))
                .collect();
            let mut found = None;
            for y in 0..x.len(a) as u32 {
                if !sub.contains(Section::new(a, y))
                    || p.levels[a][y as usize] != pb
                    || boundary_image.iter().any(|&(f, v)| x.restrict(f, y) != v)
                {
                    continue;
                }
                let mut with_start = fixed.clone();
                for &(d, c, fm) in &start_slots {
                    with_start[d][c as usize] = Some(x.restrict(fm, y));
                }
                let problem = ExtensionProblem::free(&l, x)
                    .with_fixed(with_start)
                    .over(Over { p: &p.levels, bottom: &bottom });
                if let Some(levels) = problem.first_with(&index) {
                    found = Some((y, levels));
                    break;
                }
            }
            let Some((y, filler)) = found else {
                let msg = format!("no retraction with deformation for the {a}-cell {}", x.name(sec));
                return Err(if a == n { Error::BoundaryLimited(msg) } else { Error::InvariantViolation(msg) });
            };
            if a == n {
                top_cells += 1;
            }
            for d in a..=n {
                for e in cat.hom_ids(d, a).filter(|&e| cat.is_epi(e)) {
                    let z = x.restrict(e, xs);
                    ir[d][z as usize] = Some(x.restrict(e, y));
                    for t in 0..cx.interval.len(d) as u32 {
                        hm[d][cx.pair(d, t, z) as usize] = Some(filler[d][cyl.pair(d, t, e.idx) as usize]);
                    }
                }
            }
        }
    }
    let ir: Vec<Vec<u32>> = ir
        .into_iter()
        .map(|l| l.into_iter().collect::<Option<Vec<u32>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvariantViolation("retraction left undefined sections".to_string()))?;
    let hm: Vec<Vec<u32>> = hm
        .into_iter()
        .map(|l| l.into_iter().collect::<Option<Vec<u32>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvariantViolation("deformation left undefined sections".to_string()))?;

    let (s, i) = sub.to_presheaf();
    let mut position: Vec<HashMap<u32, u32>> = vec![HashMap::new(); n + 1];
    for (d, l) in i.levels.iter().enumerate() {
        for (k, &v) in l.iter().enumerate() {
            position[d].insert(v, k as u32);
        }
    }
    let r_levels = ir.iter().enumerate().map(|(d, l)| l.iter().map(|v| position[d][v]).collect()).collect();
    let r = PresheafMap::new_unchecked(x.clone(), s.clone(), r_levels);
    let h = Homotopy { map: PresheafMap::new_unchecked(cx.object.clone(), x.clone(), hm), cylinder: cx.clone() };

    let mut certificate = Certificate::default();
    certificate.record("S is a subpresheaf", sub.closure_violation().is_none(), sub.closure_violation().unwrap_or_default());
    certificate.record("i is a mono", i.is_mono(), "");
    certificate.record("r is natural", r.is_natural(), "");
    certificate.record("h is natural", h.map.is_natural(), "");
    certificate.record("r ∘ i = id", r.after(&i).is_identity(), "");
    certificate.record("h_0 = i ∘ r", h.end(0).same_levels(&i.after(&r)), "");
    certificate.record("h_1 = id", h.end(1).is_identity(), "");
    let constant = (0..=n).all(|d| {
        (0..cx.object.len(d) as u32).all(|c| {
            let (_, z) = cx.split(d, c);
            !sub.contains(Section::new(d, z)) || h.map.levels[d][c as usize] == z
        })
    });
    certificate.record("h is constant on S", constant, "");
    if base.is_some() {
        let over = p.after(&h.map).same_levels(&p.after(&cx.proj));
        certificate.record("h is constant over the base", over, "");
        certificate.record("r is over the base", p.after(&i).after(&r).same_levels(&p), "");
    }
    let q = p.after(&i);
    let min = is_minimal_complex(&s, base.map(|_| &q))?;
    let detail = min
        .blocks
        .first()
        .map(|(d, b)| format!("{d}-sections {b:?} are ∂-equivalent"))
        .unwrap_or_default();
    certificate.record("S is minimal", min.passed(), detail);
    let fib = is_fibration(&q);
    certificate.record("S is fibrant", !fib.is_fail(), fib.label());
    let triv = is_trivial_fibration(&r);
    let detail = match &triv {
        Verdict::Fail(w) => w.to_string(),
        _ => String::new(),
    };
    certificate.record("r is a trivial fibration", !triv.is_fail(), detail);
    certificate.notes.push(format!("minimality is decided in dimensions below {n}; dimension {n} is kept whole"));
    if top_cells > 0 {
        certificate
            .notes
            .push(format!("{top_cells} top-dimensional cells retracted along deformations truncated at dimension {n}"));
    }
    if !certificate.passed() {
        let failed: Vec<String> = certificate.failures().map(|c| c.name.clone()).collect();
        return Err(Error::InvariantViolation(format!("minimal model fails: {}", failed.join(", "))));
    }
    Ok(MinimalModel { x: x.clone(), base: base.cloned(), sub, s, i, r, h, certificate })
}

/// `p = q ∘ r` with `r` a trivial fibration and `q` a minimal fibration.
#[derive(Debug, Clone)]
pub struct MinimalFibrationFactorization {
    pub p: PresheafMap,
    pub model: MinimalModel,
    pub r: PresheafMap,
    pub q: PresheafMap,
    pub certificate: Certificate,
}

pub fn minimal_fibration_factorization(p: &PresheafMap) -> Result<MinimalFibrationFactorization> {
    minimal_fibration_factorization_with(p, Representatives::Least)
}

pub fn minimal_fibration_factorization_with(p: &PresheafMap, order: Representatives) -> Result<MinimalFibrationFactorization> {
    let model = minimal_model_with(&p.source, Some(p), order)?;
    let q = p.after(&model.i);
    let r = model.r.clone();
    let mut certificate = model.certificate.clone();
    certificate.record("p = q ∘ r", q.after(&r).same_levels(p), "");
    // q is a retract of p: S -i-> X -r-> S over the identity of the base
    let retract = r.after(&model.i).is_identity() && p.after(&model.i).same_levels(&q) && q.after(&r).same_levels(p);
    certificate.record("q is a retract of p", retract, "");
    Ok(MinimalFibrationFactorization { p: p.clone(), model, r, q, certificate })
}

/// One of the five equivalent conditions, evaluated on a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub label: &'static str,
    pub holds: bool,
    pub witness: Option<String>,
    pub maps_examined: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterizationReport {
    pub conditions: Vec<Condition>,
}

impl CharacterizationReport {
    /// All five conditions agree.
    pub fn consistent(&self) -> bool {
        self.conditions.windows(2).all(|w| w[0].holds == w[1].holds)
    }
}

fn all_maps(source: &Arc<Presheaf>, target: &Arc<Presheaf>) -> Vec<PresheafMap> {
    ExtensionProblem::free(source, target)
        .all(None)
        .into_iter()
        .map(|levels| PresheafMap::new_unchecked(source.clone(), target.clone(), levels))
        .collect()
}

/// Evaluates the five characterizations of minimal complexes for `X`
/// against every map to and from the corpus objects of the same kind and
/// truncation, plus the minimal model of `X` itself.
pub fn check_minimal_characterization(x: &Arc<Presheaf>, corpus: &[(String, Arc<Presheaf>)]) -> Result<CharacterizationReport> {
    require_fibration(&PresheafMap::to_terminal(x.clone()), "X is fibrant")?;
    let model = minimal_model(x)?;
    let mut pool: Vec<(String, Arc<Presheaf>, bool, bool)> = Vec::new();
    let candidates = corpus
        .iter()
        .filter(|(_, s)| s.kind() == x.kind() && s.truncation() == x.truncation())
        .cloned()
        .chain(std::iter::once(("minimal model of X".to_string(), model.s.clone())));
    for (name, s) in candidates {
        let fibrant = is_fibrant(&s).is_pass();
        let minimal = fibrant && is_minimal_complex(&s, None)?.passed();
        pool.push((name, s, fibrant, minimal));
    }

    let first_minimal = is_minimal_complex(x, None)?;
    let mut conditions = vec![Condition {
        label: "(i) X is a minimal complex",
        holds: first_minimal.passed(),
        witness: first_minimal.blocks.first().map(|(d, b)| {
            let names: Vec<&str> = b.iter().map(|&s| x.names(*d)[s as usize].as_str()).collect();
            format!("∂-equivalent {d}-sections {}", names.join(", "))
        }),
        maps_examined: 0,
    }];

    let scan = |label: &'static str,
                    outgoing: bool,
                    admit: &dyn Fn(bool, bool) -> bool,
                    bad: &dyn Fn(&PresheafMap) -> bool| {
        let mut cond = Condition { label, holds: true, witness: None, maps_examined: 0 };
        for (name, s, fibrant, minimal) in &pool {
            if !admit(*fibrant, *minimal) {
                continue;
            }
            let maps = if outgoing { all_maps(x, s) } else { all_maps(s, x) };
            for f in maps {
                cond.maps_examined += 1;
                if bad(&f) {
                    cond.holds = false;
                    let dir = if outgoing { format!("X -> {name}") } else { format!("{name} -> X") };
                    cond.witness = Some(format!("{dir} with levels {:?} is not an isomorphism", f.levels));
                    return cond;
                }
            }
        }
        cond
    };
    conditions.push(scan(
        "(ii) every trivial fibration X -> S is an isomorphism",
        true,
        &|_, _| true,
        &|f| !f.is_iso() && is_trivial_fibration(f).is_pass(),
    ));
    conditions.push(scan(
        "(iii) every trivial cofibration S -> X with S fibrant is an isomorphism",
        false,
        &|fibrant, _| fibrant,
        &|f| f.is_mono() && !f.is_iso() && is_homotopy_equivalence(f),
    ));
    conditions.push(scan(
        "(iv) every weak equivalence X -> S with S minimal is an isomorphism",
        true,
        &|_, minimal| minimal,
        &|f| !f.is_iso() && is_homotopy_equivalence(f),
    ));
    conditions.push(scan(
        "(v) every weak equivalence S -> X with S minimal is an isomorphism",
        false,
        &|_, minimal| minimal,
        &|f| !f.is_iso() && is_homotopy_equivalence(f),
    ));
    Ok(CharacterizationReport { conditions })
}

/// Checks that a mono is a weak equivalence: either it is anodyne, or both
/// ends are fibrant and it has a homotopy inverse.
pub fn verify_trivial_cofibration(v: &PresheafMap) -> Result<String> {
    if !v.is_mono() {
        return Err(Error::precondition("map is a cofibration", "not a mono"));
    }
    if let Some(steps) = anodyne_collapse(v) {
        return Ok(format!("anodyne in {} attachments", steps.len()));
    }
    if is_fibrant(&v.source).is_pass() && is_fibrant(&v.target).is_pass() && is_homotopy_equivalence(v) {
        return Ok("homotopy equivalence between fibrant objects".to_string());
    }
    Err(Error::precondition(
        "map is a weak equivalence",
        "neither anodyne by greedy collapse nor a homotopy equivalence of fibrant objects",
    ))
}

/// The comparison map `X -> Y ×_{Y'} X'` of a commutative square.
fn comparison(top: &PresheafMap, left: &PresheafMap, right: &PresheafMap, bottom: &PresheafMap) -> Result<PresheafMap> {
    pullback(bottom, right)?.induced(left, top)
}

fn is_cartesian(top: &PresheafMap, left: &PresheafMap, right: &PresheafMap, bottom: &PresheafMap) -> Result<bool> {
    if !right.after(top).same_levels(&bottom.after(left)) {
        return Ok(false);
    }
    Ok(comparison(top, left, right, bottom)?.is_iso())
}

/// A fibration `p': X' -> Y'` with a cartesian square over `v: Y -> Y'`.
#[derive(Debug, Clone)]
pub struct ExtendedFibration {
    pub p_prime: PresheafMap,
    /// `u: X -> X'` over `v`.
    pub u: PresheafMap,
    pub passes: Vec<PassReport>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone)]
pub enum ExtensionOutcome {
    Extended(Box<ExtendedFibration>),
    BudgetExhausted { passes: Vec<PassReport>, residual: Box<LiftingWitness> },
}

/// Extends a fibration along a trivial cofibration: factor `p = q r`,
/// extend the minimal part by a small-object factorization of `v q` and a
/// second minimal factorization, then extend the trivial part by
/// pushforward.
pub fn extend_fibration(v: &PresheafMap, p: &PresheafMap, budget: usize) -> Result<ExtensionOutcome> {
    if *p.target != *v.source {
        return Err(Error::precondition("p lands in the domain of v", "codomain mismatch"));
    }
    let how = verify_trivial_cofibration(v)?;
    require_fibration(p, "p is a fibration")?;
    let mut certificate = Certificate::default();
    certificate.record("v is a trivial cofibration", true, how);
    if v.is_identity() {
        certificate.record("square is cartesian", true, "identity square");
        certificate.record("p' is a fibration", true, "p' = p");
        return Ok(ExtensionOutcome::Extended(Box::new(ExtendedFibration {
            p_prime: p.clone(),
            u: PresheafMap::identity(p.source.clone()),
            passes: Vec::new(),
            certificate,
        })));
    }
    let n = p.source.truncation();
    let first = minimal_fibration_factorization(p)?;
    certificate.absorb("p = q r", &first.certificate);
    let vq = v.after(&first.q);
    let fac = match bounded_soa_factorize(&vq, &GeneratingFamily::anodynes(n), budget)? {
        SoaOutcome::Factored(f) => f,
        SoaOutcome::Exhausted { passes, residual } => return Ok(ExtensionOutcome::BudgetExhausted { passes, residual }),
    };
    let second = minimal_fibration_factorization(&fac.q)?;
    certificate.absorb("extension of q", &second.certificate);
    let qp = second.q.clone();
    let u_min = second.r.after(&fac.j);
    let cmp = comparison(&u_min, &first.q, &qp, v)?;
    if !cmp.is_iso() {
        return Err(Error::InvariantViolation(format!(
            "comparison S -> Y ×_Y' S' is not an isomorphism; S sizes {:?}, S' sizes {:?}, comparison {:?}",
            first.model.s.sizes(),
            qp.source.sizes(),
            cmp.levels
        )));
    }
    certificate.record("minimal extension square is cartesian", true, "");
    let pf = pushforward_along_mono(&u_min, &first.r)?;
    let p_prime = qp.after(&pf.map);
    let u = pf.unit.clone();
    let triv = is_trivial_fibration(&pf.map);
    certificate.record("pushed-forward layer is a trivial fibration", !triv.is_fail(), triv.label());
    certificate.record("square commutes", p_prime.after(&u).same_levels(&v.after(p)), "");
    certificate.record("square is cartesian", is_cartesian(&u, p, &p_prime, v)?, "");
    let fib = is_fibration(&p_prime);
    certificate.record("p' is a fibration", !fib.is_fail(), fib.label());
    if !certificate.passed() {
        let failed: Vec<String> = certificate.failures().map(|c| c.name.clone()).collect();
        return Err(Error::InvariantViolation(format!("extended fibration fails: {}", failed.join(", "))));
    }
    Ok(ExtensionOutcome::Extended(Box::new(ExtendedFibration { p_prime, u, passes: fac.passes, certificate })))
}

/// Input of the gluing construction:
///
/// ```text
/// X0 --w--> X1 --i1--> X1'
///    \p0     |p1        |p1'
///     `----> Y ---j---> Y'
/// ```
#[derive(Debug, Clone)]
pub struct GlueData {
    pub j: PresheafMap,
    pub p1_prime: PresheafMap,
    pub p1: PresheafMap,
    pub i1: PresheafMap,
    pub p0: PresheafMap,
    pub w: PresheafMap,
}

/// A cartesian square `i0: X0 -> X0'` over `j` and `w': X0' -> X1'`.
#[derive(Debug, Clone)]
pub struct GlueResult {
    pub p0_prime: PresheafMap,
    pub i0: PresheafMap,
    pub w_prime: PresheafMap,
    pub certificate: Certificate,
}

fn require_pass(v: Verdict, name: &str) -> Result<()> {
    match v {
        Verdict::Fail(w) => Err(Error::precondition(name, w.to_string())),
        _ => Ok(()),
    }
}

fn require_weq(w: &PresheafMap, px: &PresheafMap, py: &PresheafMap, name: &str) -> Result<()> {
    let report = is_weak_equivalence_fiberwise(w, px, py)?;
    match report.first_failure() {
        Some((_, s, _)) => Err(Error::precondition(name, format!("fiber over {s} is not a homotopy equivalence"))),
        None => Ok(()),
    }
}

/// Extends a weak equivalence of fibrations over `Y` to one over `Y'`.
pub fn glue_equivalence_extension(data: &GlueData) -> Result<GlueResult> {
    let GlueData { j, p1_prime, p1, i1, p0, w } = data;
    if !j.is_mono() {
        return Err(Error::precondition("j is a cofibration", "not a mono"));
    }
    if !p1.after(w).same_levels(p0) {
        return Err(Error::precondition("w is over Y", "p1 ∘ w differs from p0"));
    }
    if !is_cartesian(i1, p1, p1_prime, j)? {
        return Err(Error::precondition("square is cartesian", "X1 is not the pullback of X1' along j"));
    }
    require_pass(is_fibration(p0), "p0 is a fibration")?;
    require_pass(is_fibration(p1), "p1 is a fibration")?;
    require_pass(is_fibration(p1_prime), "p1' is a fibration")?;
    require_weq(w, p0, p1, "w is a weak equivalence")?;

    let (p0_prime, i0, w_prime) = if j.is_identity() {
        (p0.clone(), PresheafMap::identity(p0.source.clone()), i1.after(w))
    } else {
        let fac = minimal_fibration_factorization(p1_prime)?;
        let (r1p, qp) = (&fac.r, &fac.q);
        let s = pullback(j, qp)?;
        let k = s.p2.clone();
        let r1 = s.induced(p1, &r1p.after(i1))?;
        let r0 = r1.after(w);
        require_pass(is_trivial_fibration(&r0), "r1 ∘ w is a trivial fibration")?;
        let pf = pushforward_along_mono(&k, &r0)?;
        let i0 = pf.unit.clone();
        let p0_prime = qp.after(&pf.map);
        let problem = LiftingProblem { i: i0.clone(), p: r1p.clone(), top: i1.after(w), bottom: pf.map.clone() };
        let w_prime = solve_lifting(&problem)?.ok_or_else(|| {
            Error::InvariantViolation("no lift against the trivial fibration r1'".to_string())
        })?;
        (p0_prime, i0, w_prime)
    };

    let mut certificate = Certificate::default();
    certificate.record("square is cartesian", is_cartesian(&i0, p0, &p0_prime, j)?, "");
    let fib = is_fibration(&p0_prime);
    certificate.record("p0' is a fibration", !fib.is_fail(), fib.label());
    let report = is_weak_equivalence_fiberwise(&w_prime, &p0_prime, p1_prime)?;
    let detail = report.first_failure().map(|f| format!("fiber over {}", f.1)).unwrap_or_default();
    certificate.record("w' is a weak equivalence", report.passed(), detail);
    let compatible =
        p1_prime.after(&w_prime).same_levels(&p0_prime) && w_prime.after(&i0).same_levels(&i1.after(w));
    certificate.record("compatibility", compatible, "p1' w' = p0' and w' i0 = i1 w");
    Ok(GlueResult { p0_prime, i0, w_prime, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::shape::ShapeKind;

    #[test]
    fn point_is_its_own_model() {
        let pt = fixtures::point(ShapeKind::Cube, 2);
        let m = minimal_model(&pt).unwrap();
        assert!(m.sub.is_full() && m.r.is_identity());
        assert!(is_minimal_complex(&pt, None).unwrap().passed());
    }

    #[test]
    fn codiscrete_collapses_to_a_vertex() {
        let c = fixtures::codiscrete(ShapeKind::Cube, 2, 2);
        assert!(!is_minimal_complex(&c, None).unwrap().passed());
        let m = minimal_model(&c).unwrap();
        assert_eq!(m.s.sizes(), vec![1, 1, 1]);
        assert!(m.certificate.passed(), "{}", m.certificate);
    }

    #[test]
    fn nerve_is_already_minimal() {
        let x = fixtures::nerve_z2(3);
        assert!(is_minimal_complex(&x, None).unwrap().passed());
        let m = minimal_model(&x).unwrap();
        assert!(m.sub.is_full() && m.r.is_identity() && m.i.is_identity());
    }

    #[test]
    fn not_fibrant_is_a_precondition_error() {
        let bd = fixtures::boundary(ShapeKind::Cube, 2, 2).source.clone();
        assert!(matches!(minimal_model(&bd), Err(Error::Precondition { .. })));
    }

    #[test]
    fn fiberwise_collapse_of_a_trivial_family() {
        let c = fixtures::codiscrete(ShapeKind::Cube, 2, 2);
        let i = fixtures::representable(ShapeKind::Cube, 1, 2);
        let p = fixtures::trivial_family(&c, &i);
        let f = minimal_fibration_factorization(&p).unwrap();
        assert!(f.certificate.passed(), "{}", f.certificate);
        assert!(f.q.is_iso());
    }

    #[test]
    fn characterization_agrees_on_codiscrete() {
        let c = fixtures::codiscrete(ShapeKind::Cube, 2, 2);
        let rep = check_minimal_characterization(&c, &fixtures::objects()).unwrap();
        assert!(rep.consistent(), "{rep:?}");
        assert!(rep.conditions.iter().all(|c| !c.holds && (c.witness.is_some())), "{rep:?}");
    }

    #[test]
    fn characterization_agrees_on_nerve() {
        let x = fixtures::nerve_z2(3);
        let rep = check_minimal_characterization(&x, &fixtures::objects()).unwrap();
        assert!(rep.consistent() && rep.conditions[0].holds, "{rep:?}");
    }

    #[test]
    fn extend_codiscrete_fiber_over_the_interval() {
        let c = fixtures::codiscrete(ShapeKind::Cube, 2, 2);
        let v = fixtures::vertex_inclusion(ShapeKind::Cube, 0, 2);
        let p = PresheafMap::to_terminal(c.clone()).with_ends(c, v.source.clone());
        match extend_fibration(&v, &p, 8).unwrap() {
            ExtensionOutcome::Extended(e) => assert!(e.certificate.passed(), "{}", e.certificate),
            ExtensionOutcome::BudgetExhausted { .. } => panic!("budget"),
        }
        assert!(matches!(extend_fibration(&v, &p, 0).unwrap(), ExtensionOutcome::BudgetExhausted { .. }));
    }

    #[test]
    fn glue_scenario_verifies() {
        let g = glue_equivalence_extension(&fixtures::glue_scenario()).unwrap();
        assert!(g.certificate.passed(), "{}", g.certificate);
        assert_eq!(g.certificate.checks.len(), 4);
    }
}
