//! Concrete shape categories: simplices, cubes, and cubes with connections.
//!
//! Every object is a finite set of vertices (`{0,..,n}` or `{0,1}^n`) and every
//! morphism is stored as its vertex table. Equality of morphisms is equality
//! of tables, which makes the Reedy factorization and the Eilenberg-Zilber
//! axioms decidable by direct comparison.
//!
//! Cube vertices are encoded as integers with the first coordinate as the most
//! significant bit, so the numeric order of vertices is the lexicographic order
//! of bit tuples.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    Simplex,
    Cube,
    CubeConn,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Simplex, ShapeKind::Cube, ShapeKind::CubeConn];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Simplex => "simplex",
            ShapeKind::Cube => "cube",
            ShapeKind::CubeConn => "cube_conn",
        }
    }

    /// Number of vertices of the object of dimension `dim`.
    pub fn vertex_count(self, dim: usize) -> usize {
        match self {
            ShapeKind::Simplex => dim + 1,
            ShapeKind::Cube | ShapeKind::CubeConn => 1 << dim,
        }
    }

    pub fn is_cubical(self) -> bool {
        !matches!(self, ShapeKind::Simplex)
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(ShapeKind::Simplex),
            "cube" => Ok(ShapeKind::Cube),
            "cube_conn" => Ok(ShapeKind::CubeConn),
            other => Err(Error::UnknownShape(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeObject {
    pub kind: ShapeKind,
    pub dim: usize,
}

impl ShapeObject {
    pub fn new(kind: ShapeKind, dim: usize) -> Self {
        ShapeObject { kind, dim }
    }
}

impl fmt::Display for ShapeObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ShapeKind::Simplex => write!(f, "[{}]", self.dim),
            _ => write!(f, "cube{}", self.dim),
        }
    }
}

/// A morphism of a shape category, stored as a vertex table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeMorphism {
    pub kind: ShapeKind,
    pub source: usize,
    pub target: usize,
    pub table: Vec<u32>,
}

impl ShapeMorphism {
    pub fn identity(kind: ShapeKind, dim: usize) -> Self {
        ShapeMorphism {
            kind,
            source: dim,
            target: dim,
            table: (0..kind.vertex_count(dim) as u32).collect(),
        }
    }

    pub fn source_object(&self) -> ShapeObject {
        ShapeObject::new(self.kind, self.source)
    }

    pub fn target_object(&self) -> ShapeObject {
        ShapeObject::new(self.kind, self.target)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.table.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn is_mono(&self) -> bool {
        let mut seen = HashSet::new();
        self.table.iter().all(|v| seen.insert(*v))
    }

    /// Degree-lowering part of the Reedy structure: the surjective maps.
    pub fn is_epi(&self) -> bool {
        let image: HashSet<u32> = self.table.iter().copied().collect();
        image.len() == self.kind.vertex_count(self.target)
    }

    pub fn image(&self) -> Vec<u32> {
        let mut image: Vec<u32> = self.table.clone();
        image.sort_unstable();
        image.dedup();
        image
    }

    /// Readable, canonical label. Simplices print their table as digits,
    /// cubes print each target vertex as a bit string (`e` for the empty one).
    pub fn label(&self) -> String {
        match self.kind {
            ShapeKind::Simplex => self.table.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(""),
            _ => self
                .table
                .iter()
                .map(|&v| cube_vertex_bits(v, self.target))
                .collect::<Vec<_>>()
                .join("."),
        }
    }
}

impl fmt::Display for ShapeMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}->{}:{}",
            self.source_object(),
            self.target_object(),
            self.label()
        )
    }
}

fn cube_vertex_bits(v: u32, dim: usize) -> String {
    if dim == 0 {
        return "e".to_string();
    }
    (0..dim)
        .map(|i| if (v >> (dim - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Composite `g ∘ f` of two shape morphisms.
pub fn compose(g: &ShapeMorphism, f: &ShapeMorphism) -> Result<ShapeMorphism> {
    if g.kind != f.kind || f.target != g.source {
        return Err(Error::Composition(format!(
            "cannot compose {} after {}",
            g, f
        )));
    }
    Ok(ShapeMorphism {
        kind: f.kind,
        source: f.source,
        target: g.target,
        table: f.table.iter().map(|&v| g.table[v as usize]).collect(),
    })
}

/// Index of a morphism inside the cached hom-sets of a [`ShapeCategory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorphId {
    pub src: u8,
    pub tgt: u8,
    pub idx: u32,
}

impl MorphId {
    pub fn new(src: usize, tgt: usize, idx: usize) -> Self {
        MorphId {
            src: src as u8,
            tgt: tgt as u8,
            idx: idx as u32,
        }
    }

    pub fn src(self) -> usize {
        self.src as usize
    }

    pub fn tgt(self) -> usize {
        self.tgt as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorClass {
    Face,
    Degeneracy,
    Connection,
}

/// An elementary generator `d{i}_{e}`, `s{i}`, `g{i}` (cubes, 1-based) or
/// `d{i}`, `s{i}` (simplices, 0-based) at a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub class: GeneratorClass,
    pub morph: MorphId,
}

fn face_table(kind: ShapeKind, n: usize, i: usize, e: u32) -> Vec<u32> {
    match kind {
        // d_i : [n-1] -> [n] skips i
        ShapeKind::Simplex => (0..n as u32).map(|j| if (j as usize) < i { j } else { j + 1 }).collect(),
        // insert e at coordinate i (1-based) of cube_{n-1}
        _ => (0..(1u32 << (n - 1)))
            .map(|v| {
                let low_bits = n - i;
                let high = v >> low_bits;
                let low = v & ((1 << low_bits) - 1);
                (high << (low_bits + 1)) | (e << low_bits) | low
            })
            .collect(),
    }
}

fn degeneracy_table(kind: ShapeKind, n: usize, i: usize) -> Vec<u32> {
    match kind {
        // s_i : [n+1] -> [n] repeats i
        ShapeKind::Simplex => (0..=(n as u32 + 1)).map(|j| if j as usize <= i { j } else { j - 1 }).collect(),
        // drop coordinate i (1-based) of cube_{n+1}
        _ => (0..(1u32 << (n + 1)))
            .map(|v| {
                let low_bits = n + 1 - i;
                let high = v >> (low_bits + 1);
                let low = v & ((1 << low_bits) - 1);
                (high << low_bits) | low
            })
            .collect(),
    }
}

fn connection_table(n: usize, i: usize) -> Vec<u32> {
    // cube_{n+1} -> cube_n replacing coordinates i, i+1 by their max
    (0..(1u32 << (n + 1)))
        .map(|v| {
            let low_bits = n - i;
            let low = v & ((1 << low_bits) - 1);
            let pair = (v >> low_bits) & 0b11;
            let high = v >> (low_bits + 2);
            let joined = if pair != 0 { 1 } else { 0 };
            (high << (low_bits + 1)) | (joined << low_bits) | low
        })
        .collect()
}

fn monotone_maps(m: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m + 1);
    fn rec(pos: usize, m: usize, n: usize, min: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == m + 1 {
            out.push(current.clone());
            return;
        }
        for v in min..=(n as u32) {
            current.push(v);
            rec(pos + 1, m, n, v, current, out);
            current.pop();
        }
    }
    rec(0, m, n, 0, &mut current, &mut out);
    out
}

#[derive(Debug)]
pub struct ParentTable {
    parents: Vec<Vec<Vec<Option<(u32, u32)>>>>,
}

/// Hom-sets of one shape kind up to a maximal dimension, built once and shared.
#[derive(Debug)]
pub struct ShapeCategory {
    kind: ShapeKind,
    max_dim: usize,
    homs: Vec<Vec<Vec<ShapeMorphism>>>,
    lookup: Vec<Vec<HashMap<Vec<u32>, u32>>>,
    generators: Vec<Generator>,
    // per dimension bound n: f = gen ∘ parent with every object of dim <= n
    words: Mutex<HashMap<usize, Arc<ParentTable>>>,
    epi_sections: Vec<Vec<Vec<Option<MorphId>>>>,
}

static CATEGORY_CACHE: OnceLock<Mutex<HashMap<ShapeKind, Arc<ShapeCategory>>>> = OnceLock::new();

impl ShapeCategory {
    /// Shared category of `kind` containing at least all objects of dimension
    /// `<= max_dim`. Hom-set indices do not depend on the size of the cache.
    pub fn get(kind: ShapeKind, max_dim: usize) -> Arc<ShapeCategory> {
        let cache = CATEGORY_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("category cache poisoned");
        if let Some(cat) = guard.get(&kind) {
            if cat.max_dim >= max_dim {
                return cat.clone();
            }
        }
        let target = guard.get(&kind).map_or(max_dim, |c| c.max_dim.max(max_dim));
        let cat = Arc::new(ShapeCategory::build(kind, target));
        guard.insert(kind, cat.clone());
        cat
    }

    fn build(kind: ShapeKind, max_dim: usize) -> ShapeCategory {
        let dims = max_dim + 1;
        let mut generators_raw: Vec<(String, GeneratorClass, usize, usize, Vec<u32>)> = Vec::new();
        for n in 1..=max_dim {
            match kind {
                ShapeKind::Simplex => {
                    for i in 0..=n {
                        generators_raw.push((format!("d{i}"), GeneratorClass::Face, n - 1, n, face_table(kind, n, i, 0)));
                    }
                }
                _ => {
                    for i in 1..=n {
                        for e in 0..2 {
                            generators_raw.push((
                                format!("d{i}_{e}"),
                                GeneratorClass::Face,
                                n - 1,
                                n,
                                face_table(kind, n, i, e),
                            ));
                        }
                    }
                }
            }
        }
        for n in 0..max_dim {
            match kind {
                ShapeKind::Simplex => {
                    for i in 0..=n {
                        generators_raw.push((format!("s{i}"), GeneratorClass::Degeneracy, n + 1, n, degeneracy_table(kind, n, i)));
                    }
                }
                _ => {
                    for i in 1..=n + 1 {
                        generators_raw.push((format!("s{i}"), GeneratorClass::Degeneracy, n + 1, n, degeneracy_table(kind, n, i)));
                    }
                    if kind == ShapeKind::CubeConn {
                        for i in 1..=n {
                            generators_raw.push((format!("g{i}"), GeneratorClass::Connection, n + 1, n, connection_table(n, i)));
                        }
                    }
                }
            }
        }

        // generator closure: breadth-first post-composition with generators
        let mut found: Vec<Vec<HashSet<Vec<u32>>>> = vec![vec![HashSet::new(); dims]; dims];
        let mut queue = VecDeque::new();
        for d in 0..dims {
            let id = ShapeMorphism::identity(kind, d).table;
            found[d][d].insert(id.clone());
            queue.push_back((d, d, id));
        }
        while let Some((a, b, table)) = queue.pop_front() {
            for (_, _, gs, gt, gtable) in generators_raw.iter() {
                if *gs != b {
                    continue;
                }
                let composite: Vec<u32> = table.iter().map(|&v| gtable[v as usize]).collect();
                if found[a][*gt].insert(composite.clone()) {
                    queue.push_back((a, *gt, composite));
                }
            }
        }

        let mut homs = vec![vec![Vec::new(); dims]; dims];
        let mut lookup = vec![vec![HashMap::new(); dims]; dims];
        for a in 0..dims {
            for b in 0..dims {
                let mut tables: Vec<Vec<u32>> = match kind {
                    ShapeKind::Simplex => monotone_maps(a, b),
                    _ => found[a][b].iter().cloned().collect(),
                };
                tables.sort();
                if kind == ShapeKind::Simplex {
                    debug_assert_eq!(tables.len(), found[a][b].len());
                }
                for (i, t) in tables.iter().enumerate() {
                    lookup[a][b].insert(t.clone(), i as u32);
                }
                homs[a][b] = tables
                    .into_iter()
                    .map(|table| ShapeMorphism { kind, source: a, target: b, table })
                    .collect();
            }
        }
        let generators: Vec<Generator> = generators_raw
            .iter()
            .map(|(name, class, s, t, table)| Generator {
                name: name.clone(),
                class: *class,
                morph: MorphId::new(*s, *t, lookup[*s][*t][table] as usize),
            })
            .collect();
        let mut cat = ShapeCategory {
            kind,
            max_dim,
            homs,
            lookup,
            generators,
            words: Mutex::new(HashMap::new()),
            epi_sections: Vec::new(),
        };
        let mut epi_sections = vec![vec![Vec::new(); dims]; dims];
        for a in 0..dims {
            for b in 0..dims {
                epi_sections[a][b] = (0..cat.homs[a][b].len())
                    .map(|i| {
                        let f = &cat.homs[a][b][i];
                        if !f.is_epi() {
                            return None;
                        }
                        cat.homs[b][a].iter().enumerate().find_map(|(j, g)| {
                            let c = compose(f, g).ok()?;
                            c.is_identity().then(|| MorphId::new(b, a, j))
                        })
                    })
                    .collect();
            }
        }
        cat.epi_sections = epi_sections;
        cat
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn homs(&self, a: usize, b: usize) -> &[ShapeMorphism] {
        &self.homs[a][b]
    }

    pub fn hom_ids(&self, a: usize, b: usize) -> impl Iterator<Item = MorphId> + '_ {
        (0..self.homs[a][b].len()).map(move |i| MorphId::new(a, b, i))
    }

    pub fn morphism(&self, id: MorphId) -> &ShapeMorphism {
        &self.homs[id.src()][id.tgt()][id.idx as usize]
    }

    pub fn id_of(&self, f: &ShapeMorphism) -> Option<MorphId> {
        if f.kind != self.kind || f.source > self.max_dim || f.target > self.max_dim {
            return None;
        }
        self.lookup[f.source][f.target]
            .get(&f.table)
            .map(|&i| MorphId::new(f.source, f.target, i as usize))
    }

    pub fn identity(&self, d: usize) -> MorphId {
        self.id_of(&ShapeMorphism::identity(self.kind, d)).expect("identity present")
    }

    /// Composite `g ∘ f` of cached morphisms.
    pub fn compose(&self, g: MorphId, f: MorphId) -> MorphId {
        assert_eq!(f.tgt, g.src, "composition of non-composable morphisms");
        let gt = &self.morphism(g).table;
        let table: Vec<u32> = self.morphism(f).table.iter().map(|&v| gt[v as usize]).collect();
        let idx = self.lookup[f.src()][g.tgt()][&table];
        MorphId::new(f.src(), g.tgt(), idx as usize)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_by_name(&self, name: &str, morph_src: usize, morph_tgt: usize) -> Option<&Generator> {
        self.generators
            .iter()
            .find(|g| g.name == name && g.morph.src() == morph_src && g.morph.tgt() == morph_tgt)
    }

    /// Codimension-one faces into dimension `d`, in generator order.
    pub fn faces_into(&self, d: usize) -> Vec<MorphId> {
        self.generators
            .iter()
            .filter(|g| g.class == GeneratorClass::Face && g.morph.tgt() == d)
            .map(|g| g.morph)
            .collect()
    }

    /// Generator words for all morphisms between objects of dimension `<= n`,
    /// never passing through a larger object.
    pub fn words_within(&self, n: usize) -> Arc<ParentTable> {
        assert!(n <= self.max_dim, "dimension {n} beyond cached category");
        let mut guard = self.words.lock().expect("word cache poisoned");
        if let Some(t) = guard.get(&n) {
            return t.clone();
        }
        let dims = n + 1;
        let mut parents: Vec<Vec<Vec<Option<(u32, u32)>>>> = (0..dims)
            .map(|a| (0..dims).map(|b| vec![None; self.homs[a][b].len()]).collect())
            .collect();
        let mut seen: Vec<Vec<Vec<bool>>> = (0..dims)
            .map(|a| (0..dims).map(|b| vec![false; self.homs[a][b].len()]).collect())
            .collect();
        let mut queue = VecDeque::new();
        for d in 0..dims {
            let id = self.identity(d);
            seen[d][d][id.idx as usize] = true;
            queue.push_back(id);
        }
        while let Some(f) = queue.pop_front() {
            for (gi, g) in self.generators.iter().enumerate() {
                if g.morph.src() != f.tgt() || g.morph.tgt() > n {
                    continue;
                }
                let c = self.compose(g.morph, f);
                let slot = &mut seen[c.src()][c.tgt()][c.idx as usize];
                if !*slot {
                    *slot = true;
                    parents[c.src()][c.tgt()][c.idx as usize] = Some((f.idx, gi as u32));
                    queue.push_back(c);
                }
            }
        }
        for (a, row) in seen.iter().enumerate() {
            for (b, cell) in row.iter().enumerate() {
                assert!(cell.iter().all(|&x| x), "Hom({a},{b}) not generated within dimension {n}");
            }
        }
        let table = Arc::new(ParentTable { parents });
        guard.insert(n, table.clone());
        table
    }

    /// `Some((parent, generator))` with `f = generator ∘ parent`, `None` for identities.
    pub fn parent(&self, words: &ParentTable, f: MorphId) -> Option<(MorphId, &Generator)> {
        words.parents[f.src()][f.tgt()][f.idx as usize].map(|(pi, gi)| {
            let g = &self.generators[gi as usize];
            (MorphId::new(f.src(), g.morph.src(), pi as usize), g)
        })
    }

    pub fn is_epi(&self, f: MorphId) -> bool {
        self.morphism(f).is_epi()
    }

    pub fn is_mono(&self, f: MorphId) -> bool {
        self.morphism(f).is_mono()
    }

    /// A chosen section (the canonically least one) of a split epimorphism.
    pub fn chosen_section(&self, f: MorphId) -> Option<MorphId> {
        self.epi_sections[f.src()][f.tgt()][f.idx as usize]
    }

    /// Proper epimorphisms out of `d`, ordered by increasing target dimension.
    pub fn proper_epis_from(&self, d: usize) -> Vec<MorphId> {
        (0..d)
            .flat_map(|k| self.hom_ids(d, k).filter(|&f| self.is_epi(f)).collect::<Vec<_>>())
            .collect()
    }

    /// Unique factorization `f = plus ∘ minus` with `minus` epi and `plus` mono.
    pub fn reedy_factorize(&self, f: MorphId) -> (MorphId, MorphId) {
        let m = self.morphism(f);
        let image = m.image();
        let k = match self.kind {
            ShapeKind::Simplex => image.len() - 1,
            _ => image.len().trailing_zeros() as usize,
        };
        let plus = self
            .hom_ids(k, f.tgt())
            .find(|&g| {
                let gm = self.morphism(g);
                gm.is_mono() && gm.image() == image
            })
            .expect("image of a shape morphism is a face");
        let plus_table = &self.morphism(plus).table;
        let minus_table: Vec<u32> = m
            .table
            .iter()
            .map(|v| plus_table.iter().position(|w| w == v).unwrap() as u32)
            .collect();
        let idx = self.lookup[f.src()][k][&minus_table];
        (MorphId::new(f.src(), k, idx as usize), plus)
    }
}

/// All morphisms `a -> b`, lexicographically ordered by table.
pub fn enumerate_homs(a: ShapeObject, b: ShapeObject) -> Result<Vec<ShapeMorphism>> {
    if a.kind != b.kind {
        return Err(Error::Composition(format!("objects {a} and {b} have different kinds")));
    }
    let cat = ShapeCategory::get(a.kind, a.dim.max(b.dim));
    Ok(cat.homs(a.dim, b.dim).to_vec())
}

/// Reedy factorization of a concrete morphism: `(minus, plus)` with `f = plus ∘ minus`.
pub fn reedy_factorize(f: &ShapeMorphism) -> Result<(ShapeMorphism, ShapeMorphism)> {
    let cat = ShapeCategory::get(f.kind, f.source.max(f.target));
    let id = cat
        .id_of(f)
        .ok_or_else(|| Error::Domain(format!("{f} is not a morphism of the {} category", f.kind)))?;
    let (minus, plus) = cat.reedy_factorize(id);
    Ok((cat.morphism(minus).clone(), cat.morphism(plus).clone()))
}

/// All sections `g` of a split epimorphism `f` (`f ∘ g = id`).
pub fn sections_of_epi(f: &ShapeMorphism) -> Result<Vec<ShapeMorphism>> {
    if !f.is_epi() {
        return Err(Error::Domain(format!("{f} is not in the degree-lowering class")));
    }
    let cat = ShapeCategory::get(f.kind, f.source.max(f.target));
    Ok(cat
        .homs(f.target, f.source)
        .iter()
        .filter(|g| compose(f, g).map(|c| c.is_identity()).unwrap_or(false))
        .cloned()
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EzReport {
    pub kind: ShapeKind,
    pub max_dim: usize,
    pub morphisms_checked: usize,
    pub factorization_failures: Vec<String>,
    pub ez1_failures: Vec<String>,
    pub ez2_failures: Vec<String>,
}

impl EzReport {
    pub fn passed(&self) -> bool {
        self.factorization_failures.is_empty() && self.ez1_failures.is_empty() && self.ez2_failures.is_empty()
    }
}

/// Exhaustive check of unique Reedy factorization, EZ1 and EZ2 for all
/// morphisms between objects of dimension `<= max_dim`.
pub fn verify_ez_axioms(kind: ShapeKind, max_dim: usize) -> EzReport {
    let cat = ShapeCategory::get(kind, max_dim);
    let mut report = EzReport {
        kind,
        max_dim,
        morphisms_checked: 0,
        factorization_failures: Vec::new(),
        ez1_failures: Vec::new(),
        ez2_failures: Vec::new(),
    };
    for a in 0..=max_dim {
        for b in 0..=max_dim {
            for f in cat.homs(a, b) {
                report.morphisms_checked += 1;
                let mut count = 0;
                for k in 0..=a.min(b) {
                    for e in cat.homs(a, k).iter().filter(|e| e.is_epi()) {
                        for m in cat.homs(k, b).iter().filter(|m| m.is_mono()) {
                            if compose(m, e).map(|c| &c == f).unwrap_or(false) {
                                count += 1;
                            }
                        }
                    }
                }
                if count != 1 {
                    report
                        .factorization_failures
                        .push(format!("{f} has {count} epi-mono factorizations"));
                }
            }
            let epis: Vec<&ShapeMorphism> = cat.homs(a, b).iter().filter(|f| f.is_epi()).collect();
            let mut by_sections: HashMap<Vec<Vec<u32>>, &ShapeMorphism> = HashMap::new();
            for f in epis {
                let secs: Vec<Vec<u32>> = cat
                    .homs(b, a)
                    .iter()
                    .filter(|g| compose(f, g).map(|c| c.is_identity()).unwrap_or(false))
                    .map(|g| g.table.clone())
                    .collect();
                if secs.is_empty() {
                    report.ez1_failures.push(format!("{f} has no section"));
                }
                if let Some(other) = by_sections.insert(secs, f) {
                    report
                        .ez2_failures
                        .push(format!("{f} and {other} have the same sections"));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(kind: ShapeKind, s: usize, t: usize, table: &[u32]) -> ShapeMorphism {
        ShapeMorphism { kind, source: s, target: t, table: table.to_vec() }
    }

    #[test]
    fn identity_and_degeneracy_laws() {
        let c = ShapeKind::Cube;
        let d10 = m(c, 0, 1, &[0]);
        let id1 = ShapeMorphism::identity(c, 1);
        assert_eq!(compose(&id1, &d10).unwrap(), d10);
        let sigma = m(c, 1, 0, &[0, 0]);
        assert_eq!(compose(&sigma, &d10).unwrap(), ShapeMorphism::identity(c, 0));
        assert_eq!(compose(&d10, &sigma).unwrap(), m(c, 1, 1, &[0, 0]));
    }

    #[test]
    fn composition_mismatch_is_an_error() {
        let c = ShapeKind::Cube;
        let err = compose(&ShapeMorphism::identity(c, 2), &ShapeMorphism::identity(c, 1));
        assert!(matches!(err, Err(Error::Composition(_))));
    }

    #[test]
    fn small_hom_sets() {
        let c = ShapeKind::Cube;
        let h11 = enumerate_homs(ShapeObject::new(c, 1), ShapeObject::new(c, 1)).unwrap();
        assert_eq!(h11.iter().map(|f| f.table.clone()).collect::<Vec<_>>(), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(enumerate_homs(ShapeObject::new(c, 0), ShapeObject::new(c, 0)).unwrap().len(), 1);
        let s = ShapeKind::Simplex;
        assert_eq!(enumerate_homs(ShapeObject::new(s, 1), ShapeObject::new(s, 1)).unwrap().len(), 3);
    }

    #[test]
    fn factorization_examples() {
        let c = ShapeKind::Cube;
        let id = ShapeMorphism::identity(c, 1);
        assert_eq!(reedy_factorize(&id).unwrap(), (id.clone(), id.clone()));
        let const0 = m(c, 1, 1, &[0, 0]);
        let (minus, plus) = reedy_factorize(&const0).unwrap();
        assert_eq!(minus, m(c, 1, 0, &[0, 0]));
        assert_eq!(plus, m(c, 0, 1, &[0]));
        // d^{1,1}_2 : cube1 -> cube2, x |-> (1, x)
        let d11 = m(c, 1, 2, &[2, 3]);
        assert_eq!(reedy_factorize(&d11).unwrap(), (ShapeMorphism::identity(c, 1), d11.clone()));
    }

    #[test]
    fn sections_examples() {
        let c = ShapeKind::Cube;
        let secs = sections_of_epi(&m(c, 1, 0, &[0, 0])).unwrap();
        assert_eq!(secs.len(), 2);
        let s = ShapeKind::Simplex;
        assert_eq!(sections_of_epi(&m(s, 1, 0, &[0, 0])).unwrap().len(), 2);
        assert_eq!(sections_of_epi(&ShapeMorphism::identity(s, 2)).unwrap(), vec![ShapeMorphism::identity(s, 2)]);
        assert!(matches!(sections_of_epi(&m(c, 0, 1, &[1])), Err(Error::Domain(_))));
    }

    #[test]
    fn generator_tables() {
        let cat = ShapeCategory::get(ShapeKind::CubeConn, 2);
        let g = cat.generators().iter().find(|g| g.name == "g1" && g.morph.src() == 2).unwrap();
        // max(x, y) on (00, 01, 10, 11)
        assert_eq!(cat.morphism(g.morph).table, vec![0, 1, 1, 1]);
        let d2_1 = cat.generators().iter().find(|g| g.name == "d2_1" && g.morph.tgt() == 2).unwrap();
        // (x) |-> (x, 1)
        assert_eq!(cat.morphism(d2_1.morph).table, vec![1, 3]);
        let s1 = cat.generators().iter().find(|g| g.name == "s1" && g.morph.src() == 2).unwrap();
        assert_eq!(cat.morphism(s1.morph).table, vec![0, 1, 0, 1]);
    }

    #[test]
    fn connection_unit_laws() {
        let c = ShapeKind::CubeConn;
        let gamma = m(c, 2, 1, &[0, 1, 1, 1]);
        // δ^0 ⊗ id : x |-> (0, x); δ^1 ⊗ id : x |-> (1, x)
        let d0 = m(c, 1, 2, &[0, 1]);
        let d1 = m(c, 1, 2, &[2, 3]);
        assert!(compose(&gamma, &d0).unwrap().is_identity());
        assert_eq!(compose(&gamma, &d1).unwrap().table, vec![1, 1]);
    }

    #[test]
    fn ez_axioms_hold_in_low_dimension() {
        for kind in ShapeKind::ALL {
            let report = verify_ez_axioms(kind, 2);
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn unknown_shape_name() {
        assert!("dendroid".parse::<ShapeKind>().is_err());
        assert_eq!("cube_conn".parse::<ShapeKind>().unwrap(), ShapeKind::CubeConn);
    }
}
