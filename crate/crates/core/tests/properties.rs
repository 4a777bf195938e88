//! Property tests over the shape categories and the fixture corpus.

use std::sync::Arc;

use proptest::prelude::*;

use minfib::fixtures::{self, CUBE_TRUNCATION};
use minfib::format::{parse_presheaf, print_presheaf};
use minfib::homotopy::{compose_homotopies, cylinder, BoundaryEquivalence};
use minfib::lifting::{is_fibration, solve_lifting, GeneratingFamily, LiftingProblem};
use minfib::minimal::{minimal_model, GlueData};
use minfib::presheaf::{
    boundary_subobject, boundary_via_monos, cell_decomposition, pullback, pushout, replay_cells, product,
};
use minfib::search::{brute_force_maps, ExtensionProblem};
use minfib::universe::{eq_subobject, fiber_ranks, hs_classify, realization_iso, realize};
use minfib::{MorphId, Presheaf, PresheafMap, Section, ShapeCategory, ShapeKind, Subpresheaf};

const MAX_DIM: usize = 3;

/// Levelwise functions tried by the brute-force lifting oracle.
const BRUTE_FORCE_LIMIT: f64 = 1e6;

fn kind_strategy() -> impl Strategy<Value = ShapeKind> {
    prop::sample::select(ShapeKind::ALL.to_vec())
}

fn pick<T: Clone>(items: &[T], seed: usize) -> T {
    items[seed % items.len()].clone()
}

fn small_objects() -> Vec<Arc<Presheaf>> {
    fixtures::objects().into_iter().map(|(_, x)| x).filter(|x| x.total_sections() <= 120).collect()
}

/// A random subpresheaf of a fixture, generated by a few sections.
fn random_sub(x: &Arc<Presheaf>, seeds: &[usize]) -> Subpresheaf {
    let all: Vec<Section> = x.all_sections().collect();
    if all.is_empty() {
        return Subpresheaf::empty(x.clone());
    }
    let gens: Vec<Section> = seeds.iter().map(|&s| all[s % all.len()]).collect();
    Subpresheaf::generated_by(x.clone(), &gens)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn composition_is_associative_and_unital(kind in kind_strategy(), dims in prop::array::uniform4(0..=MAX_DIM), seeds in prop::array::uniform3(any::<usize>())) {
        let cat = ShapeCategory::get(kind, MAX_DIM);
        let [a, b, c, d] = dims;
        let (hab, hbc, hcd) = (cat.homs(a, b).len(), cat.homs(b, c).len(), cat.homs(c, d).len());
        prop_assume!(hab > 0 && hbc > 0 && hcd > 0);
        let f = MorphId::new(a, b, seeds[0] % hab);
        let g = MorphId::new(b, c, seeds[1] % hbc);
        let h = MorphId::new(c, d, seeds[2] % hcd);
        prop_assert_eq!(cat.compose(h, cat.compose(g, f)), cat.compose(cat.compose(h, g), f));
        prop_assert_eq!(cat.compose(cat.identity(b), f), f);
        prop_assert_eq!(cat.compose(f, cat.identity(a)), f);
        // tables compose as functions on vertices
        let (tf, tg) = (&cat.morphism(f).table, &cat.morphism(g).table);
        let tgf: Vec<u32> = tf.iter().map(|&v| tg[v as usize]).collect();
        prop_assert_eq!(&cat.morphism(cat.compose(g, f)).table, &tgf);
    }

    #[test]
    fn reedy_factorization_is_unique(kind in kind_strategy(), a in 0..=MAX_DIM, b in 0..=MAX_DIM, seed in any::<usize>()) {
        let cat = ShapeCategory::get(kind, MAX_DIM);
        let n = cat.homs(a, b).len();
        prop_assume!(n > 0);
        let f = MorphId::new(a, b, seed % n);
        let mut found = 0;
        for c in 0..=MAX_DIM {
            for minus in cat.hom_ids(a, c) {
                if !cat.is_epi(minus) || cat.chosen_section(minus).is_none() {
                    continue;
                }
                for plus in cat.hom_ids(c, b) {
                    if cat.is_mono(plus) && cat.compose(plus, minus) == f {
                        found += 1;
                    }
                }
            }
        }
        prop_assert_eq!(found, 1);
        let (minus, plus) = cat.reedy_factorize(f);
        prop_assert_eq!(cat.compose(plus, minus), f);
    }

    #[test]
    fn eilenberg_zilber_decomposition_is_unique(obj in any::<usize>(), sec in any::<usize>()) {
        let xs = small_objects();
        let x = pick(&xs, obj);
        let all: Vec<Section> = x.all_sections().collect();
        prop_assume!(!all.is_empty());
        let s = all[sec % all.len()];
        let cat = x.cat().clone();
        let mut found = Vec::new();
        for e in 0..=s.dim {
            for p in cat.hom_ids(s.dim, e) {
                if !cat.is_epi(p) {
                    continue;
                }
                for y in x.nondegenerate(e) {
                    if x.restrict(p, y.idx) == s.idx {
                        found.push((p, y));
                    }
                }
            }
        }
        prop_assert_eq!(found.len(), 1);
        prop_assert_eq!(found[0], x.ez_decompose(s));
    }

    #[test]
    fn boundary_has_two_routes(kind in kind_strategy(), n in 0..=MAX_DIM) {
        let a = boundary_subobject(kind, n, MAX_DIM);
        let b = boundary_via_monos(kind, n, MAX_DIM);
        prop_assert_eq!(a.count(), b.count());
        prop_assert!(a.is_subset_of(&b) && b.is_subset_of(&a));
    }

    #[test]
    fn cells_replay_exactly(obj in any::<usize>(), seeds in prop::collection::vec(any::<usize>(), 0..3)) {
        let x = pick(&small_objects(), obj);
        let k = random_sub(&x, &seeds);
        let dec = cell_decomposition(&x, &k);
        let rebuilt = replay_cells(&dec).unwrap();
        prop_assert_eq!(&rebuilt, &*x);
    }

    #[test]
    fn printed_subpresheaves_parse_back(obj in any::<usize>(), seeds in prop::collection::vec(any::<usize>(), 0..4)) {
        let x = pick(&small_objects(), obj);
        let (s, _) = random_sub(&x, &seeds).to_presheaf();
        let text = print_presheaf(&s).unwrap();
        let back = parse_presheaf(&text).unwrap();
        prop_assert_eq!(&back, &*s);
        prop_assert_eq!(print_presheaf(&back).unwrap(), text);
    }
}

/// Cones from a small test object into the pullback factor uniquely.
#[test]
fn pullbacks_are_universal() {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let interval = fixtures::representable(c, 1, n);
    let v0 = fixtures::vertex_inclusion(c, 0, n);
    let v1 = fixtures::vertex_inclusion(c, 1, n);
    let bd = fixtures::boundary(c, 1, n);
    let id = PresheafMap::identity(interval.clone());
    let tests = [fixtures::representable(c, 0, n), interval.clone(), fixtures::discrete(c, 2, n)];
    let mut cones = 0;
    for (f, g) in [(&v0, &v1), (&v0, &bd), (&bd, &bd), (&id, &v1)] {
        let pb = pullback(f, g).unwrap();
        for t in &tests {
            for a in ExtensionProblem::free(t, &f.source).all(None) {
                for b in ExtensionProblem::free(t, &g.source).all(None) {
                    let a = PresheafMap::new_unchecked(t.clone(), f.source.clone(), a.clone());
                    let b = PresheafMap::new_unchecked(t.clone(), g.source.clone(), b);
                    let cone = f.after(&a).same_levels(&g.after(&b));
                    let factors = ExtensionProblem::free(t, &pb.object)
                        .all(None)
                        .into_iter()
                        .filter(|u| {
                            let u = PresheafMap::new_unchecked(t.clone(), pb.object.clone(), u.clone());
                            pb.p1.after(&u).same_levels(&a) && pb.p2.after(&u).same_levels(&b)
                        })
                        .count();
                    assert_eq!(factors, usize::from(cone));
                    cones += usize::from(cone);
                }
            }
        }
    }
    assert!(cones > 5, "{cones}");
}

/// Cocones out of a pushout along a mono factor uniquely.
#[test]
fn pushouts_are_universal() {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let bd = fixtures::boundary(c, 1, n);
    let v0 = fixtures::vertex_inclusion(c, 0, n);
    let collapse = PresheafMap::to_terminal(bd.source.clone());
    let tests = [fixtures::point(c, n), fixtures::codiscrete(c, 2, n), fixtures::discrete(c, 2, n)];
    let mut cones = 0;
    for (i, u) in [(&bd, &collapse), (&v0, &PresheafMap::identity(v0.source.clone()))] {
        let po = pushout(i, u).unwrap();
        for t in &tests {
            for a in ExtensionProblem::free(&u.target, t).all(None) {
                for b in ExtensionProblem::free(&i.target, t).all(None) {
                    let a = PresheafMap::new_unchecked(u.target.clone(), t.clone(), a.clone());
                    let b = PresheafMap::new_unchecked(i.target.clone(), t.clone(), b);
                    let cocone = a.after(u).same_levels(&b.after(i));
                    let factors = ExtensionProblem::free(&po.object, t)
                        .all(None)
                        .into_iter()
                        .filter(|m| {
                            let m = PresheafMap::new_unchecked(po.object.clone(), t.clone(), m.clone());
                            m.after(&po.from_x).same_levels(&a) && m.after(&po.from_l).same_levels(&b)
                        })
                        .count();
                    assert_eq!(factors, usize::from(cocone));
                    cones += usize::from(cocone);
                }
            }
        }
    }
    assert!(cones > 5, "{cones}");
}

/// Every generating square against a fixture map: the solver's filler
/// commutes, and its verdict matches brute force over all maps.
#[test]
fn lifting_matches_brute_force() {
    let maps: Vec<PresheafMap> = fixtures::maps()
        .into_iter()
        .map(|(_, p)| p)
        .filter(|p| p.source.total_sections() <= 12 && p.target.total_sections() <= 12)
        .collect();
    assert!(maps.len() >= 3);
    let mut squares = 0;
    let mut brute_checked = 0;
    for p in &maps {
        let n = p.source.truncation();
        for family in [GeneratingFamily::anodynes(n), GeneratingFamily::cofibrations(n)] {
            for m in family.members(&p.source) {
                let (k, i) = m.sub.to_presheaf();
                let l = i.target.clone();
                let space: f64 = l.sizes().iter().enumerate().map(|(d, &c)| (p.source.len(d) as f64).powi(c as i32)).product();
                let all_maps = (space <= BRUTE_FORCE_LIMIT).then(|| brute_force_maps(&l, &p.source, usize::MAX));
                for b in ExtensionProblem::free(&l, &p.target).all(None) {
                    let bottom = PresheafMap::new_unchecked(l.clone(), p.target.clone(), b);
                    for t in ExtensionProblem::free(&k, &p.source).all(None) {
                        let top = PresheafMap::new_unchecked(k.clone(), p.source.clone(), t);
                        if !p.after(&top).same_levels(&bottom.after(&i)) {
                            continue;
                        }
                        let problem = LiftingProblem { i: i.clone(), p: p.clone(), top, bottom: bottom.clone() };
                        let solved = solve_lifting(&problem).unwrap();
                        if let Some(all_maps) = &all_maps {
                            let brute = all_maps.iter().any(|h| {
                                problem.is_filler(&PresheafMap::new_unchecked(l.clone(), p.source.clone(), h.clone()))
                            });
                            assert_eq!(solved.is_some(), brute, "{}", m.label);
                            brute_checked += 1;
                        }
                        if let Some(h) = solved {
                            assert!(problem.is_filler(&h));
                        }
                        squares += 1;
                    }
                }
            }
        }
    }
    assert!(brute_checked > 10, "{brute_checked}");
    assert!(squares > 20, "{squares}");
}

/// Fibrations compose and pull back; a retract of a fibration is one.
#[test]
fn fibrations_are_stable() {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let c2 = fixtures::codiscrete(c, 2, n);
    let interval = fixtures::representable(c, 1, n);
    let fam = fixtures::trivial_family(&c2, &interval);
    let (cc, proj, _) = product(&c2, &c2).unwrap();
    let to_pt = PresheafMap::to_terminal(c2.clone());
    assert!(is_fibration(&proj).is_pass());
    assert!(is_fibration(&to_pt.after(&proj)).is_pass());
    for g in [fixtures::vertex_inclusion(c, 0, n), fixtures::boundary(c, 1, n)] {
        let pb = pullback(&g, &fam).unwrap();
        assert!(is_fibration(&pb.p1).is_pass());
    }
    // C2 -> pt is a retract of C2 × C2 -> pt via the diagonal and a projection
    let diag = pullback(&to_pt, &to_pt).unwrap().induced(&PresheafMap::identity(c2.clone()), &PresheafMap::identity(c2.clone())).unwrap();
    let back = proj.clone().with_ends(diag.target.clone(), c2.clone());
    assert!(back.after(&diag).is_identity());
    assert_eq!(*diag.target, *cc);
    assert!(is_fibration(&to_pt).is_pass());
}

/// Pasting homotopies keeps the outer endpoints.
#[test]
fn pasted_homotopies_keep_endpoints() {
    let x = fixtures::codiscrete(ShapeKind::Cube, 3, CUBE_TRUNCATION);
    let mut eq = BoundaryEquivalence::new(&x, None);
    for (a, b, c) in [(0, 1, 2), (2, 0, 1), (1, 1, 0)] {
        let s = |i| Section::new(0, i);
        let h = eq.witness(s(a), s(b)).unwrap().unwrap();
        let k = eq.witness(s(b), s(c)).unwrap().unwrap();
        let composite = compose_homotopies(&x, &h, &k).unwrap().unwrap();
        assert_eq!((composite.x, composite.y), (s(a), s(c)));
        let top = |e: usize| composite.homotopy.end(e).levels[0][0];
        assert_eq!((top(0), top(1)), (a, c));
    }
}

/// On minimal complexes every endomap homotopic to the identity is an
/// isomorphism.
#[test]
fn homotopic_to_identity_means_iso_on_minimal_complexes() {
    let c = ShapeKind::Cube;
    let minimal = [
        fixtures::point(c, CUBE_TRUNCATION),
        fixtures::discrete(c, 2, CUBE_TRUNCATION),
        fixtures::nerve_z2(fixtures::SIMPLEX_TRUNCATION),
        minimal_model(&fixtures::codiscrete(c, 3, CUBE_TRUNCATION)).unwrap().s,
    ];
    for x in minimal {
        let cyl = cylinder(&x);
        for f in ExtensionProblem::free(&x, &x).all(None) {
            let fixed = (0..=x.truncation())
                .map(|d| {
                    (0..cyl.object.len(d) as u32)
                        .map(|s| {
                            let (_, base) = cyl.split(d, s);
                            match cyl.end_of(d, s) {
                                Some(0) => Some(f[d][base as usize]),
                                Some(_) => Some(base),
                                None => None,
                            }
                        })
                        .collect()
                })
                .collect();
            let homotopic = ExtensionProblem::free(&cyl.object, &x).with_fixed(fixed).first().is_some();
            if homotopic {
                assert!(PresheafMap::new_unchecked(x.clone(), x.clone(), f).is_iso());
            }
        }
    }
}

/// Random subfamilies of `C2 × □_1 -> □_1`: the classifier round trips,
/// the family is a fibration exactly when every value is in the universe,
/// and the equivalence subobject is closed under restriction.
#[test]
fn random_families_classify_locally() {
    use rand::{Rng, SeedableRng};
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let interval = fixtures::representable(c, 1, n);
    let fam = fixtures::trivial_family(&fixtures::discrete(c, 2, n), &interval);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut seen_fibration = [false, false];
    for _ in 0..24 {
        let seeds: Vec<usize> = (0..rng.gen_range(0..4)).map(|_| rng.gen()).collect();
        let (e, incl) = random_sub(&fam.source, &seeds).to_presheaf();
        let p = fam.after(&incl).with_ends(e, interval.clone());
        let y = hs_classify(&p, 64).unwrap();
        let real = realize(&y).unwrap();
        let iso = realization_iso(&real, &p, &fiber_ranks(&p)).unwrap();
        assert!(iso.is_iso() && p.after(&iso).same_levels(&real.map));
        assert_eq!(hs_classify(&real.map, 64).unwrap(), y);
        let fib = is_fibration(&p).is_pass();
        assert_eq!(fib, y.first_outside_universe().is_none());
        seen_fibration[usize::from(fib)] = true;
        let eq = eq_subobject(&p, &p).unwrap();
        assert!(eq.sub.closure_violation().is_none());
    }
    assert_eq!(seen_fibration, [true, true]);
}

#[test]
fn minimal_models_are_deterministic() {
    let x = fixtures::codiscrete(ShapeKind::Cube, 3, CUBE_TRUNCATION);
    let (a, b) = (minimal_model(&x).unwrap(), minimal_model(&x).unwrap());
    assert_eq!(a.s, b.s);
    assert_eq!(a.r.levels, b.r.levels);
    assert_eq!(a.h.map.levels, b.h.map.levels);
    assert_eq!(a.certificate, b.certificate);
}

#[test]
fn glue_inputs_are_consistent() {
    let GlueData { j, p1_prime, p1, i1, p0, w } = fixtures::glue_scenario();
    assert!(j.is_mono());
    assert!(p1_prime.after(&i1).same_levels(&j.after(&p1)));
    assert!(p1.after(&w).same_levels(&p0));
}
