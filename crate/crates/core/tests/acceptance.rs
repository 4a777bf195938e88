//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minfib::fixtures::{self, CUBE_TRUNCATION};
use minfib::homotopy::{boundary_equivalent, cylinder, homotopy_inverse_search, BoundaryEquivalence};
use minfib::lifting::{is_fibration, is_trivial_fibration, Verdict};
use minfib::minimal::{
    check_minimal_characterization, glue_equivalence_extension, is_minimal_complex, minimal_fibration_factorization,
    minimal_model, minimal_model_with, Representatives,
};
use minfib::presheaf::{boundary_subobject, coproduct, pullback};
use minfib::search::ExtensionProblem;
use minfib::universe::{eq_subobject, fiber_ranks, hs_classify, realization_iso, realize, univalence_witness, UnivalenceData};
use minfib::{Error, Presheaf, PresheafMap, Section, ShapeCategory, ShapeKind};

/// Largest shape dimension scanned for the EZ axioms.
const EZ_DIM: usize = 3;
/// Generated homotopy pairs per fibrant fixture.
const PAIRS_PER_FIXTURE: usize = 50;
/// Fraction of generated pairs that must produce a witness.
const REQUIRED_SUCCESS: f64 = 1.0;
/// Fiber bound for the round trip.
const KAPPA: usize = 8;
/// Fiber bound for the locality check, large enough for codiscrete families.
const LOCALITY_KAPPA: usize = 64;
/// Largest base (total sections) in the locality check.
const LOCALITY_MAX_BASE: usize = 20;
/// Wall clock budget for the whole suite.
const TIME_LIMIT: Duration = Duration::from_secs(300);
const SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: minfib::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn iso_exists(a: &Arc<Presheaf>, b: &Arc<Presheaf>) -> bool {
    a.sizes() == b.sizes() && ExtensionProblem::free(a, b).injective(true).first().is_some()
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for kind in ShapeKind::ALL {
        let r = minfib::shape::verify_ez_axioms(kind, EZ_DIM);
        ensure(r.passed(), || format!("{kind}: {:?} {:?} {:?}", r.factorization_failures, r.ez1_failures, r.ez2_failures))?;
        checked += r.morphisms_checked;
    }
    Ok(format!("{checked} morphisms up to dimension {EZ_DIM}, no failures"))
}

/// Brute-force hom counts: monotone maps for simplices; for cubes, maps of
/// vertex sets whose output coordinates are constants or input coordinates
/// taken in increasing order.
fn oracle_count(kind: ShapeKind, m: usize, n: usize) -> usize {
    match kind {
        ShapeKind::Simplex => {
            let total = (n + 1).pow(m as u32 + 1);
            (0..total)
                .filter(|&code| {
                    let f: Vec<usize> = (0..=m).map(|i| code / (n + 1).pow(i as u32) % (n + 1)).collect();
                    f.windows(2).all(|w| w[0] <= w[1])
                })
                .count()
        }
        _ => {
            let (vm, vn) = (1usize << m, 1usize << n);
            let bit = |v: usize, i: usize, dim: usize| (v >> (dim - 1 - i)) & 1;
            (0..vn.pow(vm as u32))
                .filter(|&code| {
                    let f: Vec<usize> = (0..vm).map(|v| code / vn.pow(v as u32) % vn).collect();
                    let mut last: Option<usize> = None;
                    (0..n).all(|j| {
                        let out: Vec<usize> = (0..vm).map(|v| bit(f[v], j, n)).collect();
                        if out.iter().all(|&b| b == out[0]) {
                            return true;
                        }
                        match (0..m).find(|&i| (0..vm).all(|v| out[v] == bit(v, i, m))) {
                            Some(i) if last.is_none_or(|l| l < i) => {
                                last = Some(i);
                                true
                            }
                            _ => false,
                        }
                    })
                })
                .count()
        }
    }
}

fn criterion_2() -> Outcome {
    let named = [(ShapeKind::Cube, 1, 1, 3), (ShapeKind::Cube, 0, 1, 2), (ShapeKind::Simplex, 1, 2, 6)];
    for (kind, m, n, want) in named {
        let got = ShapeCategory::get(kind, 2).homs(m, n).len();
        ensure(got == want && oracle_count(kind, m, n) == want, || format!("{kind} ({m},{n}): engine {got}, oracle {}", oracle_count(kind, m, n)))?;
    }
    for kind in [ShapeKind::Cube, ShapeKind::Simplex] {
        for m in 0..=2 {
            for n in 0..=2 {
                let got = ShapeCategory::get(kind, 2).homs(m, n).len();
                ensure(got == oracle_count(kind, m, n), || format!("{kind} ({m},{n}): engine {got}"))?;
            }
        }
    }
    Ok("3, 2, 6 and all cube/simplex hom sets of dimension <= 2 match the oracle".into())
}

fn criterion_3() -> Outcome {
    let mut pairs = 0;
    for (name, x) in fixtures::fibrant_objects() {
        let mut eq = BoundaryEquivalence::new(&x, None);
        for d in 0..x.truncation() {
            let rel = ok(eq.relation(d), &name)?;
            let k = rel.len();
            pairs += k * k;
            for a in 0..k {
                ensure(rel[a][a], || format!("{name}: not reflexive at {d}/{a}"))?;
                for b in 0..k {
                    ensure(rel[a][b] == rel[b][a], || format!("{name}: not symmetric at {d}"))?;
                    for c in 0..k {
                        ensure(!(rel[a][b] && rel[b][c]) || rel[a][c], || format!("{name}: not transitive at {d}"))?;
                    }
                    let degenerate = x.is_degenerate(Section::new(d, a as u32)) && x.is_degenerate(Section::new(d, b as u32));
                    ensure(!(degenerate && a != b && rel[a][b]), || format!("{name}: degenerate sections {a}, {b} merge in dim {d}"))?;
                }
            }
        }
    }
    Ok(format!("{} fibrant fixtures, {pairs} pairs", fixtures::fibrant_objects().len()))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut total = 0;
    let mut found = 0;
    let mut distinct = 0;
    for (name, x) in fixtures::fibrant_objects() {
        let n = x.truncation();
        for _ in 0..PAIRS_PER_FIXTURE {
            let d = rng.gen_range(0..n);
            let a = fixtures::representable(x.kind(), d, n);
            let top = a.nondegenerate(d).next().expect("top cell").idx;
            let cyl = cylinder(&a);
            let boundary = boundary_subobject(x.kind(), d, n);
            let hs = ExtensionProblem::free(&cyl.object, &x).all(None);
            let h = &hs[rng.gen_range(0..hs.len())];
            let eps = rng.gen_range(0..2u32);
            let fixed: Vec<Vec<Option<u32>>> = (0..=n)
                .map(|e| {
                    (0..cyl.object.len(e) as u32)
                        .map(|c| {
                            let (_, base) = cyl.split(e, c);
                            let keep = boundary.contains(Section::new(e, base)) || cyl.end_of(e, c) == Some(1 - eps);
                            keep.then_some(h[e][c as usize])
                        })
                        .collect()
                })
                .collect();
            let at = cyl.ends[eps as usize].levels[d][top as usize] as usize;
            let mut ks = ExtensionProblem::free(&cyl.object, &x).with_fixed(fixed).all(None);
            // half the draws insist on a different end when one exists
            if rng.gen_bool(0.5) && ks.iter().any(|k| k[d][at] != h[d][at]) {
                ks.retain(|k| k[d][at] != h[d][at]);
            }
            let k = &ks[rng.gen_range(0..ks.len())];
            let (s, t) = (Section::new(d, h[d][at]), Section::new(d, k[d][at]));
            total += 1;
            distinct += usize::from(s != t);
            if ok(boundary_equivalent(&x, s, t), &name)?.is_some() {
                found += 1;
            } else {
                return Err(format!("{name}: no witness for {} ~ {} (eps {eps})", x.name(s), x.name(t)));
            }
        }
    }
    let rate = found as f64 / total as f64;
    ensure(rate >= REQUIRED_SUCCESS, || format!("{found}/{total}"))?;
    Ok(format!("{found}/{total} generated pairs have witnesses, {distinct} with distinct ends"))
}

fn criterion_5() -> Outcome {
    let c2 = ok(minimal_model(&fixtures::codiscrete(ShapeKind::Cube, 2, CUBE_TRUNCATION)), "codiscrete2")?;
    ensure(c2.s.sizes() == vec![1, 1, 1], || format!("codiscrete2 model {:?}", c2.s.sizes()))?;
    let nerve = fixtures::nerve_z2(fixtures::SIMPLEX_TRUNCATION);
    let nm = ok(minimal_model(&nerve), "nerve")?;
    ensure(nm.i.is_iso(), || "nerve model is not the whole nerve".into())?;
    let mut lines = 0;
    for (name, x) in fixtures::fibrant_objects() {
        let m = ok(minimal_model(&x), &name)?;
        for key in ["r ∘ i = id", "r is a trivial fibration", "h is constant on S"] {
            ensure(m.certificate.get(key).is_some_and(|c| c.passed), || format!("{name}: {key}"))?;
        }
        ensure(m.certificate.passed(), || format!("{name}: {}", m.certificate))?;
        lines += m.certificate.checks.len();
        let again = ok(minimal_model(&m.s), &name)?;
        ensure(again.i.is_iso(), || format!("{name}: model of the model shrinks"))?;
        let other = ok(minimal_model_with(&x, None, Representatives::Greatest), &name)?;
        ensure(iso_exists(&m.s, &other.s), || format!("{name}: models under two orders are not isomorphic"))?;
    }
    Ok(format!("codiscrete2 -> point, nerve fixed, {lines} certificate lines pass, idempotent, order-independent"))
}

fn criterion_6() -> Outcome {
    let corpus = fixtures::objects();
    for (name, x) in fixtures::fibrant_objects() {
        let r = ok(check_minimal_characterization(&x, &corpus), &name)?;
        ensure(r.consistent(), || format!("{name}: {r:?}"))?;
        if name == "codiscrete2" {
            ensure(r.conditions.iter().all(|c| !c.holds), || "codiscrete2 should fail all".into())?;
            ensure(r.conditions[1..].iter().all(|c| c.witness.is_some()), || "codiscrete2 negative without witness".into())?;
        }
        if name == "nerve-z2" {
            ensure(r.conditions.iter().all(|c| c.holds), || "nerve should satisfy all".into())?;
        }
    }
    Ok("five conditions agree on every fibrant fixture; codiscrete2 refuted with witnesses".into())
}

fn criterion_7() -> Outcome {
    let fibrations = ["codiscrete2-over-point", "codiscrete2-family", "nerve-z2-over-point"];
    let maps = fixtures::maps();
    let mut pulled = 0;
    for name in fibrations {
        let p = maps.iter().find(|(n, _)| n == name).expect("fixture").1.clone();
        let f = ok(minimal_fibration_factorization(&p), name)?;
        ensure(f.certificate.passed(), || format!("{name}: {}", f.certificate))?;
        ensure(f.q.after(&f.r).same_levels(&p), || format!("{name}: p != q r"))?;
        ensure(ok(is_minimal_complex(&f.q.source, Some(&f.q)), name)?.passed(), || format!("{name}: q not minimal"))?;
        ensure(is_trivial_fibration(&f.r).is_pass(), || format!("{name}: r not a trivial fibration"))?;
        // every corpus map into the base, plus every corpus object over it
        let mut into_base: Vec<PresheafMap> = maps.iter().map(|(_, g)| g.clone()).filter(|g| *g.target == *p.target).collect();
        for (_, x) in fixtures::objects() {
            let base_is_point = p.target.sizes().iter().all(|&k| k == 1);
            if base_is_point && x.kind() == p.target.kind() && x.truncation() == p.target.truncation() {
                into_base.push(PresheafMap::to_terminal(x.clone()).with_ends(x, p.target.clone()));
            }
        }
        into_base.push(PresheafMap::identity(p.target.clone()));
        for g in into_base {
            let pb = ok(pullback(&g, &f.q), name)?;
            let rep = ok(is_minimal_complex(&pb.object, Some(&pb.p1)), name)?;
            ensure(rep.passed() && is_fibration(&pb.p1).is_pass(), || format!("{name}: pullback along a map from {:?} is not minimal", g.source.sizes()))?;
            pulled += 1;
        }
    }
    Ok(format!("3 fibrations factor; {pulled} pullbacks of q are minimal fibrations"))
}

fn criterion_8() -> Outcome {
    let g = ok(glue_equivalence_extension(&fixtures::glue_scenario()), "glue")?;
    ensure(g.certificate.checks.len() == 4 && g.certificate.passed(), || g.certificate.to_string())?;
    Ok(format!("{} post-conditions pass", g.certificate.checks.len()))
}

/// Fiber sizes over each section of the base, counted directly.
fn largest_fiber(p: &PresheafMap) -> usize {
    let y = &p.target;
    let cat = y.cat().clone();
    let mut best = 0;
    for s in y.all_sections() {
        for e in 0..=s.dim {
            let count: usize = cat
                .hom_ids(e, s.dim)
                .map(|f| {
                    let below = y.restrict(f, s.idx);
                    p.levels[e].iter().filter(|&&v| v == below).count()
                })
                .sum();
            best = best.max(count);
        }
    }
    best
}

fn families() -> Vec<(String, PresheafMap)> {
    let mut out = fixtures::maps();
    for (name, x) in fixtures::objects() {
        out.push((format!("{name}-over-point"), PresheafMap::to_terminal(x)));
    }
    out
}

fn round_trip(p: &PresheafMap, kappa: usize) -> Result<bool, Error> {
    let y = hs_classify(p, kappa)?;
    let real = realize(&y)?;
    let iso = realization_iso(&real, p, &fiber_ranks(p))?;
    let back = hs_classify(&real.map, kappa)?;
    Ok(iso.is_iso() && p.after(&iso).same_levels(&real.map) && back == y)
}

fn criterion_9() -> Outcome {
    let (mut done, mut exceeded) = (0, 0);
    for (name, p) in families() {
        match round_trip(&p, KAPPA) {
            Ok(true) => done += 1,
            Ok(false) => return Err(format!("{name}: round trip differs")),
            Err(Error::Kappa { .. }) => {
                ensure(largest_fiber(&p) >= KAPPA, || format!("{name}: spurious kappa error"))?;
                exceeded += 1;
            }
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    // two fibers of sizes 1 and 2 over the two points of ∂□_1
    let c = ShapeKind::Cube;
    let pt = fixtures::point(c, CUBE_TRUNCATION);
    let two = fixtures::discrete(c, 2, CUBE_TRUNCATION);
    let (e, inl, _) = ok(coproduct(&pt, &two), "coproduct")?;
    let (b, bl, br) = ok(coproduct(&pt, &pt), "coproduct")?;
    let levels = (0..=CUBE_TRUNCATION)
        .map(|d| {
            (0..e.len(d) as u32)
                .map(|z| if inl.levels[d].contains(&z) { bl.levels[d][0] } else { br.levels[d][0] })
                .collect()
        })
        .collect();
    let p = ok(PresheafMap::new(e, b, levels), "family over two points")?;
    let real = ok(hs_classify(&p, KAPPA).and_then(|y| realize(&y)), "two fibers")?;
    ensure(real.map.source.len(0) == 3, || format!("{} vertices", real.map.source.len(0)))?;
    ensure(round_trip(&p, KAPPA).unwrap_or(false), || "two fibers round trip".into())?;
    done += 1;

    let mut local = 0;
    for (name, p) in families() {
        if p.target.total_sections() > LOCALITY_MAX_BASE {
            continue;
        }
        let y = match hs_classify(&p, LOCALITY_KAPPA) {
            Ok(y) => y,
            Err(Error::Kappa { .. }) => continue,
            Err(e) => return Err(format!("{name}: {e}")),
        };
        let fib = is_fibration(&p).is_pass();
        let all_in = y.first_outside_universe().is_none();
        ensure(fib == all_in, || format!("{name}: fibration {fib}, values in universe {all_in}"))?;
        local += 1;
    }
    Ok(format!("{done} round trips at kappa {KAPPA}, {exceeded} families exceed kappa; locality holds on {local} families"))
}

fn criterion_10() -> Outcome {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let mut checked = 0;
    for x in [fixtures::point(c, n), fixtures::discrete(c, 2, n), fixtures::boundary(c, 1, n).source, fixtures::codiscrete(c, 2, n)] {
        let p = PresheafMap::to_terminal(x);
        let e = ok(eq_subobject(&p, &p), "eq")?;
        for s in p.target.all_sections() {
            ensure(e.identity_section(s).is_some(), || format!("no identity over {}", p.target.name(s)))?;
        }
        ensure(e.sub.closure_violation().is_none() && e.inclusion.is_natural(), || "Eq not action-closed".into())?;
        checked += 1;
    }
    let fam = fixtures::maps().into_iter().find(|(n, _)| n == "codiscrete2-family").expect("fixture").1;
    let e = ok(eq_subobject(&fam, &fam), "family eq")?;
    ensure(e.sub.closure_violation().is_none(), || "family Eq not action-closed".into())?;
    let v = is_fibration(&e.map);
    ensure(v.is_pass(), || format!("Eq -> base: {}", v.label()))?;
    Ok(format!("identity and closure on {checked} objects; Eq of the codiscrete family is a fibration"))
}

fn criterion_11() -> Outcome {
    let data = ok(fixtures::univalence_scenario(LOCALITY_KAPPA), "scenario")?;
    let w = ok(univalence_witness(&data), "univalence")?;
    ensure(w.certificate.checks.len() == 7 && w.certificate.passed(), || w.certificate.to_string())?;
    let missing = UnivalenceData { equivalence: None, ..data };
    match univalence_witness(&missing) {
        Err(Error::Precondition { name, .. }) if name == "equivalence between the realizations" => {}
        other => return Err(format!("missing equivalence gave {:?}", other.map(|_| ()))),
    }
    Ok("7 post-conditions pass; missing equivalence is a named precondition error".into())
}

fn criterion_12() -> Outcome {
    let maps = fixtures::maps();
    let get = |n: &str| maps.iter().find(|(m, _)| m == n).expect("fixture").1.clone();
    match is_fibration(&get("discrete2-over-interval")) {
        Verdict::Fail(w) if w.dim == 1 => {}
        other => return Err(format!("discrete over the interval: {}", other.label())),
    }
    let nerve = get("nerve-z2-over-point");
    ensure(homotopy_inverse_search(&nerve, None).is_none(), || "N(Z/2) -> point has an inverse".into())?;
    // the discrete pair over the point is Kan: every box fills degenerately
    ensure(is_fibration(&get("discrete2-over-point")).is_pass(), || "discrete over the point fails".into())?;
    Ok("discrete pair over the interval fails at a 1-box; N(Z/2) -> point has no inverse".into())
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("EZ axioms", criterion_1),
        ("hom-set oracle", criterion_2),
        ("boundary equivalence relation", criterion_3),
        ("homotopies agreeing on a box", criterion_4),
        ("minimal models", criterion_5),
        ("characterizations of minimality", criterion_6),
        ("minimal fibration factorization", criterion_7),
        ("gluing", criterion_8),
        ("classifier round trip and locality", criterion_9),
        ("equivalence subobject", criterion_10),
        ("univalence", criterion_11),
        ("negative controls", criterion_12),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {title}: {detail} ({ms} ms)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {title}: {detail} ({ms} ms)", i + 1);
            }
        }
    }
    let total = start.elapsed();
    let in_time = total <= TIME_LIMIT;
    println!("total {:.1} s (limit {} s) {}", total.as_secs_f64(), TIME_LIMIT.as_secs(), if in_time { "PASS" } else { "FAIL" });
    if failed > 0 || !in_time {
        std::process::exit(1);
    }
}
