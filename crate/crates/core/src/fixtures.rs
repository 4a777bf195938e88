//! The shipped corpus of small presheaves and maps.

use std::sync::Arc;

use crate::error::Result;
use crate::format::{morphism_text, print_morphism_text, print_presheaf, Endpoint};
use crate::minimal::GlueData;
use crate::universe::UnivalenceData;
use crate::presheaf::{anodyne_generators, boundary_subobject, coproduct, product, pullback, Presheaf, PresheafMap, Section};
use crate::shape::{MorphId, ShapeKind};

/// Truncation used for cubical fixtures.
pub const CUBE_TRUNCATION: usize = 2;
/// Truncation used for simplicial fixtures.
pub const SIMPLEX_TRUNCATION: usize = 3;

pub fn point(kind: ShapeKind, truncation: usize) -> Arc<Presheaf> {
    Arc::new(Presheaf::terminal(kind, truncation))
}

pub fn representable(kind: ShapeKind, n: usize, truncation: usize) -> Arc<Presheaf> {
    Arc::new(Presheaf::representable(kind, n, truncation))
}

/// The codiscrete presheaf on `k` vertices: sections are all labelings of
/// the vertices of the shape, restriction is precomposition.
pub fn codiscrete(kind: ShapeKind, k: u32, truncation: usize) -> Arc<Presheaf> {
    let names: Vec<Vec<String>> = (0..=truncation)
        .map(|d| {
            let v = kind.vertex_count(d) as u32;
            (0..k.pow(v))
                .map(|code| {
                    let digits = labeling(code, k, v as usize);
                    digits.iter().map(|x| char::from_digit(*x, 36).unwrap()).collect()
                })
                .collect()
        })
        .collect();
    let cat = crate::shape::ShapeCategory::get(kind, truncation);
    Arc::new(Presheaf::from_fn(kind, truncation, names, |f, x| {
        let source_vertices = kind.vertex_count(f.tgt());
        let digits = labeling(x, k, source_vertices);
        let table = &cat.morphism(f).table;
        table.iter().fold(0u32, |acc, &t| acc * k + digits[t as usize])
    }))
}

// most significant digit first, so codes sort like their labels
fn labeling(code: u32, k: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    let mut c = code;
    for slot in out.iter_mut().rev() {
        *slot = c % k;
        c /= k;
    }
    out
}

/// The nerve of `Z/2`, truncated. A `d`-simplex is a word `g_1 … g_d` in
/// `{e, g}`; restriction along `α` multiplies the letters between
/// consecutive values of `α`.
pub fn nerve_z2(truncation: usize) -> Arc<Presheaf> {
    let kind = ShapeKind::Simplex;
    let names: Vec<Vec<String>> = (0..=truncation)
        .map(|d| {
            if d == 0 {
                return vec!["*".to_string()];
            }
            (0..1u32 << d)
                .map(|w| (0..d).map(|i| if (w >> (d - 1 - i)) & 1 == 1 { 'g' } else { 'e' }).collect())
                .collect()
        })
        .collect();
    let cat = crate::shape::ShapeCategory::get(kind, truncation);
    Arc::new(Presheaf::from_fn(kind, truncation, names, |f, x| {
        let d = f.tgt();
        let letters: Vec<u32> = (0..d).map(|i| (x >> (d - 1 - i)) & 1).collect();
        // prefix sums mod 2 at each vertex
        let mut prefix = vec![0u32; d + 1];
        for i in 0..d {
            prefix[i + 1] = prefix[i] ^ letters[i];
        }
        let table = &cat.morphism(f).table;
        let m = f.src();
        (0..m).fold(0u32, |acc, j| {
            let l = prefix[table[j + 1] as usize] ^ prefix[table[j] as usize];
            (acc << 1) | l
        })
    }))
}

/// `∂a` as a presheaf with its inclusion into `a`.
pub fn boundary(kind: ShapeKind, n: usize, truncation: usize) -> PresheafMap {
    boundary_subobject(kind, n, truncation).to_presheaf().1
}

pub fn discrete(kind: ShapeKind, k: usize, truncation: usize) -> Arc<Presheaf> {
    let pt = point(kind, truncation);
    let mut acc = Arc::new(Presheaf::empty(kind, truncation));
    for _ in 0..k {
        acc = coproduct(&acc, &pt).expect("compatible").0;
    }
    let names = acc
        .all_names()
        .iter()
        .map(|ns| (0..ns.len()).map(|i| format!("p{i}")).collect())
        .collect();
    Arc::new(acc.renamed(names))
}

/// `X × B -> B`.
pub fn trivial_family(x: &Arc<Presheaf>, base: &Arc<Presheaf>) -> PresheafMap {
    product(x, base).expect("compatible").2
}

/// The vertex inclusion `{e} -> □_1` (or `Δ[1]`).
pub fn vertex_inclusion(kind: ShapeKind, e: u32, truncation: usize) -> PresheafMap {
    let i = representable(kind, 1, truncation);
    let pt = representable(kind, 0, truncation);
    PresheafMap::from_section(i.clone(), Section::new(0, e)).with_ends(pt, i)
}

/// Relabeling map of codiscrete complexes induced by a vertex function.
pub fn codiscrete_map(kind: ShapeKind, from: u32, to: u32, vertex_map: &[u32], truncation: usize) -> PresheafMap {
    let x = codiscrete(kind, from, truncation);
    let y = codiscrete(kind, to, truncation);
    let levels = (0..=truncation)
        .map(|d| {
            let v = kind.vertex_count(d);
            (0..x.len(d) as u32)
                .map(|code| labeling(code, from, v).iter().fold(0u32, |acc, &l| acc * to + vertex_map[l as usize]))
                .collect()
        })
        .collect();
    PresheafMap::new_unchecked(x, y, levels)
}

/// `X1' = C2 × □_1` over `□_1`, `X0 = C3` over the vertex, and
/// `w: C3 -> C2` collapsing vertices `1, 2`.
pub fn glue_scenario() -> GlueData {
    let kind = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let j = vertex_inclusion(kind, 0, n);
    let c2 = codiscrete(kind, 2, n);
    let c3 = codiscrete(kind, 3, n);
    let base = j.target.clone();
    let p1_prime = trivial_family(&c2, &base);
    let pb = pullback(&j, &p1_prime).expect("compatible");
    let p1 = pb.p1.clone();
    let i1 = pb.p2.clone();
    let p0 = PresheafMap::to_terminal(c3.clone()).with_ends(c3.clone(), j.source.clone());
    // w: C3 -> X1 ≅ C2 over the vertex
    let collapse = codiscrete_map(kind, 3, 2, &[0, 1, 1], n);
    let levels = (0..=n)
        .map(|d| {
            (0..c3.len(d) as u32)
                .map(|x| {
                    let c = collapse.levels[d][x as usize];
                    // the X1' section (c, vertex-0 degeneracy) lies over j
                    let over = base.restrict(MorphId::new(d, 0, 0), 0);
                    let pair = c * base.len(d) as u32 + over;
                    // the vertex has one section per dimension
                    pb.pair_index(d, 0, pair).expect("over the vertex")
                })
                .collect()
        })
        .collect();
    let w = PresheafMap::new_unchecked(c3, pb.object.clone(), levels);
    GlueData { j, p1_prime, p1, i1, p0, w }
}

/// Codiscrete families over `j: {0} -> □_1`: `y1'` classifies `C2 × □_1`,
/// `y0` classifies `C2` over the vertex, and the equivalence swaps the two
/// vertices.
pub fn univalence_scenario(kappa: usize) -> Result<UnivalenceData> {
    let (p0, j, p1_prime, e) = univalence_families();
    UnivalenceData::from_families(&p0, &j, &p1_prime, Some(&e), kappa)
}

/// `(p0, j, p1', e)` for [`univalence_scenario`].
pub fn univalence_families() -> (PresheafMap, PresheafMap, PresheafMap, PresheafMap) {
    let kind = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let j = vertex_inclusion(kind, 0, n);
    let c2 = codiscrete(kind, 2, n);
    let p1_prime = trivial_family(&c2, &j.target);
    let p0 = PresheafMap::to_terminal(c2.clone()).with_ends(c2.clone(), j.source.clone());
    let pb = pullback(&j, &p1_prime).expect("compatible");
    let swap = codiscrete_map(kind, 2, 2, &[1, 0], n);
    let base = &j.target;
    // x -> (swap x, vertex 0) in C2 × □_1
    let levels = (0..=n)
        .map(|d| {
            let over = base.restrict(MorphId::new(d, 0, 0), 0);
            swap.levels[d].iter().map(|&c| c * base.len(d) as u32 + over).collect()
        })
        .collect();
    let into_family = PresheafMap::new_unchecked(c2, p1_prime.source.clone(), levels);
    let e = pb.induced(&p0, &into_family).expect("over the vertex");
    (p0, j, p1_prime, e)
}

/// Named objects of the corpus.
pub fn objects() -> Vec<(String, Arc<Presheaf>)> {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let mut out: Vec<(String, Arc<Presheaf>)> = vec![
        ("point".into(), point(c, n)),
        ("point-simplex".into(), point(ShapeKind::Simplex, SIMPLEX_TRUNCATION)),
        ("codiscrete2".into(), codiscrete(c, 2, n)),
        ("codiscrete3".into(), codiscrete(c, 3, n)),
        ("nerve-z2".into(), nerve_z2(SIMPLEX_TRUNCATION)),
        ("discrete2".into(), discrete(c, 2, n)),
        ("empty".into(), Arc::new(Presheaf::empty(c, n))),
    ];
    for kind in ShapeKind::ALL {
        let t = if kind == ShapeKind::Simplex { SIMPLEX_TRUNCATION } else { n };
        let tag = kind.name();
        for d in 0..=t.min(2) {
            out.push((format!("{tag}-rep{d}"), representable(kind, d, t)));
            out.push((format!("{tag}-boundary{d}"), boundary(kind, d, t).source.clone()));
        }
    }
    out
}

/// Named maps of the corpus.
pub fn maps() -> Vec<(String, PresheafMap)> {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    let interval = representable(c, 1, n);
    vec![
        ("discrete2-over-point".into(), PresheafMap::to_terminal(discrete(c, 2, n))),
        ("discrete2-over-interval".into(), boundary(c, 1, n)),
        ("codiscrete2-over-point".into(), PresheafMap::to_terminal(codiscrete(c, 2, n))),
        ("codiscrete3-over-point".into(), PresheafMap::to_terminal(codiscrete(c, 3, n))),
        ("codiscrete2-family".into(), trivial_family(&codiscrete(c, 2, n), &interval)),
        ("nerve-z2-over-point".into(), PresheafMap::to_terminal(nerve_z2(SIMPLEX_TRUNCATION))),
        ("vertex0".into(), vertex_inclusion(c, 0, n)),
    ]
}

/// Objects expected to be fibrant.
pub fn fibrant_objects() -> Vec<(String, Arc<Presheaf>)> {
    let c = ShapeKind::Cube;
    let n = CUBE_TRUNCATION;
    vec![
        ("point".into(), point(c, n)),
        ("point-simplex".into(), point(ShapeKind::Simplex, SIMPLEX_TRUNCATION)),
        ("codiscrete2".into(), codiscrete(c, 2, n)),
        ("codiscrete3".into(), codiscrete(c, 3, n)),
        ("codiscrete2-conn".into(), codiscrete(ShapeKind::CubeConn, 2, n)),
        ("discrete2".into(), discrete(c, 2, n)),
        ("nerve-z2".into(), nerve_z2(SIMPLEX_TRUNCATION)),
    ]
}

/// Text files of the shipped corpus, keyed by relative path.
///
/// Top level: [`objects`] and [`maps`]. `shapes/`: representables,
/// boundaries and open boxes or horns up to dimension 3. `glue/`,
/// `univalence/` and `univalence-noequiv/`: the scenarios over `{0} -> □_1`.
pub fn corpus_files() -> Result<Vec<(String, String)>> {
    let mut files = Corpus::default();
    for (name, x) in objects() {
        files.object("", &name, &x)?;
    }
    for (name, f) in maps() {
        files.map("", &name, &f)?;
    }
    for kind in ShapeKind::ALL {
        let tag = kind.name();
        for d in 0..=3 {
            files.object("shapes/", &format!("{tag}-rep{d}"), &representable(kind, d, 3))?;
            files.object("shapes/", &format!("{tag}-boundary{d}"), &boundary(kind, d, 3).source)?;
        }
        for g in anodyne_generators(kind, 3, 3) {
            let digits: Vec<char> = g.label.chars().filter(char::is_ascii_digit).collect();
            let name = match digits.as_slice() {
                [k, _] => format!("{tag}-horn{}-{k}", g.dim),
                [i, e, _] => format!("{tag}-box{}-{i}-{e}", g.dim),
                _ => unreachable!("generator label {}", g.label),
            };
            files.object("shapes/", &name, &g.sub.to_presheaf().0)?;
        }
    }
    let g = glue_scenario();
    for (name, f) in [("j", &g.j), ("p1prime", &g.p1_prime), ("p1", &g.p1), ("i1", &g.i1), ("p0", &g.p0), ("w", &g.w)] {
        files.map("glue/", name, f)?;
    }
    let (p0, j, p1_prime, e) = univalence_families();
    for dir in ["univalence/", "univalence-noequiv/"] {
        for (name, f) in [("p0", &p0), ("j", &j), ("p1prime", &p1_prime)] {
            files.map(dir, name, f)?;
        }
    }
    files.map("univalence/", "e", &e)?;
    Ok(files.files)
}

#[derive(Default)]
struct Corpus {
    files: Vec<(String, String)>,
    objects: Vec<(String, Arc<Presheaf>)>,
}

impl Corpus {
    fn object(&mut self, dir: &str, name: &str, x: &Arc<Presheaf>) -> Result<String> {
        let file = format!("{name}.psh");
        self.objects.push((format!("{dir}{file}"), x.clone()));
        self.files.push((format!("{dir}{file}"), print_presheaf(x)?));
        Ok(file)
    }

    /// Reuses an object already written in `dir`, if any.
    fn end(&mut self, dir: &str, name: &str, x: &Arc<Presheaf>) -> Result<String> {
        let found = self.objects.iter().find(|(path, y)| path.strip_prefix(dir).is_some_and(|f| !f.contains('/')) && **y == **x);
        match found {
            Some((path, _)) => Ok(path[dir.len()..].to_string()),
            None => self.object(dir, name, x),
        }
    }

    fn map(&mut self, dir: &str, name: &str, f: &PresheafMap) -> Result<()> {
        let s = self.end(dir, &format!("{name}-source"), &f.source)?;
        let t = self.end(dir, &format!("{name}-target"), &f.target)?;
        let text = print_morphism_text(&morphism_text(f, Endpoint::File(s), Endpoint::File(t))?);
        self.files.push((format!("{dir}{name}.map"), text));
        Ok(())
    }
}
