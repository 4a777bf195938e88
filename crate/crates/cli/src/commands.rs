use std::path::{Path, PathBuf};
use std::sync::Arc;

use minfib::format::{self, Endpoint};
use minfib::homotopy::{homotopy_inverse_search, BoundaryEquivalence};
use minfib::lifting::{bounded_soa_factorize, is_fibrant, is_fibration, is_trivial_fibration, GeneratingFamily, SoaOutcome, Verdict};
use minfib::minimal::{glue_equivalence_extension, minimal_fibration_factorization, minimal_model, GlueData};
use minfib::shape::verify_ez_axioms;
use minfib::universe::{eq_subobject, fiber_ranks, hs_classify, realization_iso, realize, univalence_witness, UnivalenceData};
use minfib::{fixtures, Error, Presheaf, PresheafMap, Result, Section, ShapeKind};

use crate::report::{Artifacts, Report, Status};

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub truncation: Option<usize>,
    pub kappa: usize,
    pub budget: usize,
    pub shape: Option<ShapeKind>,
    pub out: Option<PathBuf>,
}

pub enum Input {
    Object(Arc<Presheaf>),
    Map(PresheafMap),
}

impl Input {
    fn truncation(&self) -> usize {
        match self {
            Input::Object(x) => x.truncation(),
            Input::Map(f) => f.source.truncation(),
        }
    }

    /// A presheaf stands for its map to the terminal presheaf.
    fn into_map(self) -> PresheafMap {
        match self {
            Input::Object(x) => PresheafMap::to_terminal(x),
            Input::Map(f) => f,
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn first_keyword(text: &str) -> Option<&str> {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'))?.split_whitespace().next()
}

fn load_raw(arg: &str) -> Result<Input> {
    if let Some(name) = arg.strip_prefix("fixture:") {
        if let Some((_, x)) = fixtures::objects().into_iter().find(|(n, _)| n == name) {
            return Ok(Input::Object(x));
        }
        if let Some((_, f)) = fixtures::maps().into_iter().find(|(n, _)| n == name) {
            return Ok(Input::Map(f));
        }
        return Err(usage(format!("no fixture named {name}")));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: arg.to_string(), message: e.to_string() })?;
    match first_keyword(&text) {
        Some("source") => format::load_morphism(path).map(Input::Map),
        _ => format::load_presheaf(path).map(Input::Object),
    }
}

pub fn load(arg: &str, opts: &Options) -> Result<Input> {
    let input = load_raw(arg)?;
    let kind = match &input {
        Input::Object(x) => x.kind(),
        Input::Map(f) => f.source.kind(),
    };
    if let Some(k) = opts.shape.filter(|&k| k != kind) {
        return Err(Error::KindMismatch(k.name().to_string(), kind.name().to_string()));
    }
    match (opts.truncation, input) {
        (None, input) => Ok(input),
        (Some(t), Input::Object(x)) => Ok(Input::Object(Arc::new(format::truncate(&x, t)?))),
        (Some(t), Input::Map(f)) => Ok(Input::Map(format::truncate_map(&f, t)?)),
    }
}

fn load_object(arg: &str, opts: &Options) -> Result<Arc<Presheaf>> {
    match load(arg, opts)? {
        Input::Object(x) => Ok(x),
        Input::Map(_) => Err(usage(format!("{arg} is a morphism file, expected a presheaf"))),
    }
}

fn load_map(arg: &str, opts: &Options) -> Result<PresheafMap> {
    match load(arg, opts)? {
        Input::Map(f) => Ok(f),
        Input::Object(_) => Err(usage(format!("{arg} is a presheaf file, expected a morphism"))),
    }
}

fn sizes(x: &Presheaf) -> String {
    format!("{:?}", x.sizes())
}

fn report_for(verb: &str, inputs: &[&str]) -> Report {
    Report::new(verb, &inputs.iter().map(|s| s.to_string()).collect::<Vec<_>>())
}

pub fn validate(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("validate", &[arg]);
    let input = load(arg, opts)?;
    r.truncation = Some(input.truncation());
    let mut describe = |label: &str, x: &Presheaf| {
        let v = x.validate();
        r.field(&format!("{label} shape"), x.kind());
        r.field(&format!("{label} sections"), sizes(x));
        r.field(&format!("{label} nondegenerate"), format!("{:?}", x.nondegenerate_count()));
        r.field(&format!("{label} equations checked"), v.equations_checked);
        for f in v.failures {
            r.fail(f);
        }
    };
    match &input {
        Input::Object(x) => describe("object", x),
        Input::Map(f) => {
            describe("source", &f.source);
            describe("target", &f.target);
            r.field("natural", f.is_natural());
        }
    }
    Ok(r)
}

fn lifting_verdict(verb: &str, arg: &str, trivial: bool, opts: &Options) -> Result<Report> {
    let mut r = report_for(verb, &[arg]);
    let p = load(arg, opts)?.into_map();
    let n = p.source.truncation();
    r.truncation = Some(n);
    let verdict = if trivial { is_trivial_fibration(&p) } else { is_fibration(&p) };
    let mut out = Artifacts::new(opts.out.clone())?;
    match verdict {
        Verdict::Pass => {}
        Verdict::BoundaryLimited(why) => {
            r.status = Status::BoundaryLimited;
            r.witness(why);
        }
        Verdict::Fail(w) => {
            r.fail(&w);
            r.field("generator", &w.member);
            r.field("bottom", &w.bottom_name);
            let family = if trivial { GeneratingFamily::cofibrations(n) } else { GeneratingFamily::anodynes(n) };
            if let Some(m) = family.members(&p.source).into_iter().find(|m| m.label == w.member && m.dim == w.dim) {
                let (k, _) = m.sub.to_presheaf();
                let top = PresheafMap::new(k, p.source.clone(), w.top_levels.clone())?;
                out.map_with_ends("top", &top, "box", "source")?;
            }
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn check_fib(arg: &str, opts: &Options) -> Result<Report> {
    lifting_verdict("check-fib", arg, false, opts)
}

pub fn check_trivfib(arg: &str, opts: &Options) -> Result<Report> {
    lifting_verdict("check-trivfib", arg, true, opts)
}

pub fn factor(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("factor", &[arg]);
    let f = load(arg, opts)?.into_map();
    let n = f.source.truncation();
    r.truncation = Some(n);
    r.field("budget", opts.budget);
    let mut out = Artifacts::new(opts.out.clone())?;
    match bounded_soa_factorize(&f, &GeneratingFamily::anodynes(n), opts.budget) {
        Err(e) => r.error(&e),
        Ok(SoaOutcome::Exhausted { passes, residual }) => {
            r.field("passes", passes.len());
            r.fail(format!("budget exhausted; {residual}"));
        }
        Ok(SoaOutcome::Factored(fac)) => {
            r.field("passes", fac.passes.len());
            for p in &fac.passes {
                r.field("pass", format!("dimension {} attached {} cells", p.dim, p.cells_attached));
            }
            r.field("middle sections", sizes(&fac.j.target));
            let mut c = minfib::minimal::Certificate::default();
            c.record("q ∘ j = f", fac.q.after(&fac.j).same_levels(&f), "levelwise");
            c.record("j is a mono", fac.j.is_mono(), "levelwise");
            let v = is_fibration(&fac.q);
            c.record("q is a fibration", v.is_pass(), v.label());
            r.certify(&c);
            let s = out.object("source", &f.source)?;
            let m = out.object("middle", &fac.j.target)?;
            let t = out.object("target", &f.target)?;
            out.map("j", &fac.j, s, m.clone())?;
            out.map("q", &fac.q, m, t)?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

fn find_section(x: &Presheaf, name: &str) -> Result<Section> {
    (0..=x.truncation())
        .find_map(|d| x.find(d, name).map(|i| Section::new(d, i)))
        .ok_or_else(|| usage(format!("no section named {name}")))
}

pub fn bdeq(arg: &str, pair: Option<(&str, &str)>, opts: &Options) -> Result<Report> {
    let mut inputs = vec![arg];
    if let Some((a, b)) = pair {
        inputs.extend([a, b]);
    }
    let mut r = report_for("bdeq", &inputs);
    let (x, base) = match load(arg, opts)? {
        Input::Object(x) => (x, None),
        Input::Map(p) => (p.source.clone(), Some(p)),
    };
    let n = x.truncation();
    r.truncation = Some(n);
    let mut eq = BoundaryEquivalence::new(&x, base.as_ref());
    let mut out = Artifacts::new(opts.out.clone())?;
    match pair {
        None => {
            for d in 0..n {
                match eq.partition(d) {
                    Ok(blocks) => {
                        let named: Vec<String> = blocks
                            .iter()
                            .map(|b| {
                                let names: Vec<&str> = b.iter().map(|&i| x.name(Section::new(d, i))).collect();
                                format!("{{{}}}", names.join(" "))
                            })
                            .collect();
                        r.field(&format!("classes {d}"), named.join(" "));
                    }
                    Err(e) => r.error(&e),
                }
            }
        }
        Some((a, b)) => {
            let s = find_section(&x, a)?;
            let t = find_section(&x, b)?;
            if s.dim != t.dim {
                return Err(usage(format!("{a} and {b} have different dimensions")));
            }
            match eq.witness(s, t) {
                Err(e) => r.error(&e),
                Ok(None) if !eq.same_boundary(s, t) => r.fail(format!("{a} and {b} have different boundaries")),
                Ok(None) => r.fail(format!("no homotopy from {a} to {b} relative to the boundary")),
                Ok(Some(w)) => {
                    r.field("homotopy", format!("{} sections in the cylinder", w.homotopy.map.source.total_sections()));
                    let rep = out.object("representable", &w.homotopy.cylinder.base)?;
                    let target = out.object("object", &x)?;
                    out.map("homotopy", &w.homotopy.map, Endpoint::Cylinder(Box::new(rep)), target)?;
                }
            }
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn weq(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("weq", &[arg]);
    let f = load_map(arg, opts)?;
    r.truncation = Some(f.source.truncation());
    let mut out = Artifacts::new(opts.out.clone())?;
    match homotopy_inverse_search(&f, None) {
        None => r.fail("no homotopy inverse within the truncation"),
        Some(inv) => {
            let mut c = minfib::minimal::Certificate::default();
            c.record("h_0 = id", inv.h.end(0).is_identity(), "levelwise");
            c.record("h_1 = g ∘ f", inv.h.end(1).same_levels(&inv.g.after(&f)), "levelwise");
            c.record("k_0 = id", inv.k.end(0).is_identity(), "levelwise");
            c.record("k_1 = f ∘ g", inv.k.end(1).same_levels(&f.after(&inv.g)), "levelwise");
            r.certify(&c);
            let s = out.object("source", &f.source)?;
            let t = out.object("target", &f.target)?;
            out.map("inverse", &inv.g, t.clone(), s.clone())?;
            out.map("h", &inv.h.map, Endpoint::Cylinder(Box::new(s.clone())), s)?;
            out.map("k", &inv.k.map, Endpoint::Cylinder(Box::new(t.clone())), t)?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn minimal(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("minimal-model", &[arg]);
    let x = load_object(arg, opts)?;
    r.truncation = Some(x.truncation());
    let mut out = Artifacts::new(opts.out.clone())?;
    match minimal_model(&x) {
        Err(e) => r.error(&e),
        Ok(m) => {
            r.field("model sections", sizes(&m.s));
            r.field("model nondegenerate", format!("{:?}", m.s.nondegenerate_count()));
            r.certify(&m.certificate);
            let s = out.object("model", &m.s)?;
            let xe = out.object("object", &x)?;
            out.map("i", &m.i, s.clone(), xe.clone())?;
            out.map("r", &m.r, xe.clone(), s)?;
            out.map("h", &m.h.map, Endpoint::Cylinder(Box::new(xe.clone())), xe)?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn min_factor(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("min-factor", &[arg]);
    let p = load(arg, opts)?.into_map();
    r.truncation = Some(p.source.truncation());
    let mut out = Artifacts::new(opts.out.clone())?;
    match minimal_fibration_factorization(&p) {
        Err(e) => r.error(&e),
        Ok(f) => {
            r.field("middle sections", sizes(&f.q.source));
            r.certify(&f.certificate);
            let s = out.object("source", &p.source)?;
            let m = out.object("middle", &f.q.source)?;
            let t = out.object("base", &p.target)?;
            out.map("r", &f.r, s, m.clone())?;
            out.map("q", &f.q, m, t)?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

fn dir_map(dir: &str, name: &str, opts: &Options) -> Result<PresheafMap> {
    load_map(&Path::new(dir).join(format!("{name}.map")).display().to_string(), opts)
}

pub fn glue(dir: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("glue", &[dir]);
    let data = GlueData {
        j: dir_map(dir, "j", opts)?,
        p1_prime: dir_map(dir, "p1prime", opts)?,
        p1: dir_map(dir, "p1", opts)?,
        i1: dir_map(dir, "i1", opts)?,
        p0: dir_map(dir, "p0", opts)?,
        w: dir_map(dir, "w", opts)?,
    };
    r.truncation = Some(data.j.source.truncation());
    let mut out = Artifacts::new(opts.out.clone())?;
    match glue_equivalence_extension(&data) {
        Err(e) => r.error(&e),
        Ok(g) => {
            r.field("extended sections", sizes(&g.p0_prime.source));
            r.certify(&g.certificate);
            let x0 = out.object("x0", &data.p0.source)?;
            let x0p = out.object("x0prime", &g.p0_prime.source)?;
            let base = out.object("base", &g.p0_prime.target)?;
            let x1p = out.object("x1prime", &data.p1_prime.source)?;
            out.map("p0prime", &g.p0_prime, x0p.clone(), base)?;
            out.map("i0", &g.i0, x0, x0p.clone())?;
            out.map("wprime", &g.w_prime, x0p, x1p)?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn classify(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("classify", &[arg]);
    let p = load(arg, opts)?.into_map();
    r.truncation = Some(p.source.truncation());
    r.field("kappa", opts.kappa);
    match hs_classify(&p, opts.kappa) {
        Err(e) => r.error(&e),
        Ok(y) => {
            for s in y.base.all_sections() {
                let v = y.value(s);
                r.field(&format!("value {}", y.base.name(s)), format!("{} over the identity, sections {:?}", v.global_count(), v.object.sizes()));
            }
            match y.naturality_violation() {
                Ok(None) => {}
                Ok(Some(v)) => r.fail(v),
                Err(e) => r.error(&e),
            }
            match y.first_outside_universe() {
                None => r.field("in universe", "every value"),
                Some((s, v)) => r.field("in universe", format!("not at {} ({})", y.base.name(s), v.label())),
            }
        }
    }
    Ok(r)
}

pub fn realize_cmd(arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("realize", &[arg]);
    let p = load(arg, opts)?.into_map();
    r.truncation = Some(p.source.truncation());
    r.field("kappa", opts.kappa);
    let mut out = Artifacts::new(opts.out.clone())?;
    let run = |r: &mut Report, out: &mut Artifacts| -> Result<()> {
        let y = hs_classify(&p, opts.kappa)?;
        let real = realize(&y)?;
        r.field("realized sections", sizes(&real.map.source));
        let iso = realization_iso(&real, &p, &fiber_ranks(&p))?;
        let mut c = minfib::minimal::Certificate::default();
        c.record("realization is isomorphic to the input", iso.is_iso() && p.after(&iso).same_levels(&real.map), "over the base");
        let again = hs_classify(&real.map, opts.kappa)?;
        c.record("classifying the realization gives the same map", again == y, "valuewise");
        r.certify(&c);
        out.map_with_ends("realized", &real.map, "total", "base")?;
        Ok(())
    };
    if let Err(e) = run(&mut r, &mut out) {
        r.error(&e);
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn eq(p_arg: &str, q_arg: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("eq", &[p_arg, q_arg]);
    let p = load(p_arg, opts)?.into_map();
    let q = load(q_arg, opts)?.into_map();
    r.truncation = Some(p.source.truncation());
    let mut out = Artifacts::new(opts.out.clone())?;
    match eq_subobject(&p, &q) {
        Err(e) => r.error(&e),
        Ok(e) => {
            r.field("hom sections", sizes(&e.hom.object));
            r.field("eq sections", sizes(&e.object));
            let mut c = minfib::minimal::Certificate::default();
            c.record("Eq is closed under restriction", e.inclusion.is_natural() && e.inclusion.is_mono(), "subpresheaf of Hom");
            let v = is_fibration(&e.map);
            c.record("Eq -> base is a fibration", v.is_pass(), v.label());
            if *p.source == *q.source && p.same_levels(&q) {
                let all = p.target.all_sections().all(|s| e.identity_section(s).is_some());
                c.record("Eq contains the identity", all, "at every base section");
            }
            r.certify(&c);
            out.map_with_ends("eq", &e.map, "eq", "base")?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn univalence(dir: &str, opts: &Options) -> Result<Report> {
    let mut r = report_for("univalence", &[dir]);
    let p0 = dir_map(dir, "p0", opts)?;
    let j = dir_map(dir, "j", opts)?;
    let p1_prime = dir_map(dir, "p1prime", opts)?;
    let e_path = Path::new(dir).join("e.map");
    let e = if e_path.exists() { Some(load_map(&e_path.display().to_string(), opts)?) } else { None };
    r.truncation = Some(j.source.truncation());
    r.field("kappa", opts.kappa);
    let mut out = Artifacts::new(opts.out.clone())?;
    let result = UnivalenceData::from_families(&p0, &j, &p1_prime, e.as_ref(), opts.kappa).and_then(|d| univalence_witness(&d));
    match result {
        Err(e) => r.error(&e),
        Ok(w) => {
            r.certify(&w.certificate);
            let r0 = realize(&w.y0_prime)?;
            let r1 = realize(&w.y1_prime)?;
            let base = out.object("base", &r0.map.target)?;
            let e0 = out.object("e0prime", &r0.map.source)?;
            let e1 = out.object("e1prime", &r1.map.source)?;
            out.map("p0prime", &r0.map, e0.clone(), base.clone())?;
            out.map("p1prime", &r1.map, e1.clone(), base)?;
            out.map("eprime", &w.equivalence, e0, e1)?;
        }
    }
    out.finish(&mut r)?;
    Ok(r)
}

pub fn verify_ez(kind: ShapeKind, dim: usize) -> Report {
    let mut r = Report::new("verify-ez", &[kind.name().to_string(), dim.to_string()]);
    r.truncation = Some(dim);
    let ez = verify_ez_axioms(kind, dim);
    r.field("morphisms checked", ez.morphisms_checked);
    for (label, fails) in [
        ("unique factorization", &ez.factorization_failures),
        ("EZ1", &ez.ez1_failures),
        ("EZ2", &ez.ez2_failures),
    ] {
        r.certificate.push(format!("[{}] {label}: {} failures", if fails.is_empty() { "pass" } else { "FAIL" }, fails.len()));
        for f in fails.iter().take(5) {
            r.fail(f);
        }
    }
    r
}

/// One summary line per file; a presheaf is checked for fibrancy and a
/// morphism for being a fibration.
pub fn summarize(path: &Path, opts: &Options) -> (String, Status) {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    match load(&path.display().to_string(), opts) {
        Err(e) => (format!("{name}: error: {e}"), Status::Usage),
        Ok(Input::Object(x)) => {
            let v = is_fibrant(&x);
            (format!("{name}: presheaf {} sections {} fibrant {}", x.kind(), sizes(&x), v.label()), Status::Pass)
        }
        Ok(Input::Map(f)) => {
            let v = is_fibration(&f);
            (
                format!("{name}: morphism {} -> {} fibration {}", sizes(&f.source), sizes(&f.target), v.label()),
                Status::Pass,
            )
        }
    }
}

