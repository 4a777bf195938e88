//! Text formats for presheaves and morphisms.
//!
//! A presheaf file:
//!
//! ```text
//! shape cube
//! truncation 1
//! sections 0: a b
//! sections 1: f
//! action 1 d1_0: f=a
//! action 1 d1_1: f=b
//! action 0 s1: a=a' b=b'
//! ```
//!
//! `action <dim> <gen>` lists the generator acting on the sections of
//! dimension `dim`. Degeneracy actions must be listed too; nothing is
//! inferred. A morphism file names its ends and lists the map per
//! dimension:
//!
//! ```text
//! source x.psh
//! target fixture:point
//! map 0: a=* b=*
//! ```
//!
//! Ends are paths relative to the morphism file, `fixture:<name>` for a
//! corpus object, or `cylinder:<end>` for the cylinder on another end.
//! Lines starting with `#` are comments. Printing is canonical, so a
//! printed file parses and prints back byte for byte.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::homotopy::cylinder;
use crate::presheaf::{Presheaf, PresheafMap};
use crate::shape::ShapeKind;

fn parse_error(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, col, message: message.into() }
}

/// Whitespace-separated tokens of a line with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, t)| (line[..s].chars().count() + 1, t)).collect()
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || c == '=' || c == '#')
}

fn check_names(x: &Presheaf) -> Result<()> {
    for (d, ns) in x.all_names().iter().enumerate() {
        if let Some(bad) = ns.iter().find(|n| !valid_name(n)) {
            return Err(Error::Domain(format!("section name {bad:?} in dimension {d} cannot be printed")));
        }
    }
    Ok(())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, Vec<(usize, &'a str)>);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, line) in self.inner.by_ref() {
            let toks = tokens(line);
            if toks.is_empty() || toks[0].1.starts_with('#') {
                continue;
            }
            return Some((i + 1, toks));
        }
        None
    }
}

fn parse_usize(line: usize, (col, tok): (usize, &str)) -> Result<usize> {
    tok.parse().map_err(|_| parse_error(line, col, format!("expected a number, found {tok:?}")))
}

// "<dim>:" as a single token
fn parse_dim_colon(line: usize, (col, tok): (usize, &str)) -> Result<usize> {
    let Some(num) = tok.strip_suffix(':') else {
        return Err(parse_error(line, col, format!("expected `<dim>:`, found {tok:?}")));
    };
    parse_usize(line, (col, num))
}

fn parse_pair<'a>(line: usize, (col, tok): (usize, &'a str)) -> Result<(&'a str, &'a str)> {
    match tok.split_once('=') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains('=') => Ok((a, b)),
        _ => Err(parse_error(line, col, format!("expected `name=name`, found {tok:?}"))),
    }
}

pub fn parse_presheaf(text: &str) -> Result<Presheaf> {
    let mut lines = Lines::new(text);
    let mut last_line = 0;
    let mut header = |key: &str| -> Result<(usize, Vec<(usize, &str)>)> {
        let (ln, toks) = lines.next().ok_or_else(|| parse_error(last_line + 1, 1, format!("missing `{key}` line")))?;
        last_line = ln;
        if toks[0].1 != key || toks.len() != 2 {
            return Err(parse_error(ln, toks[0].0, format!("expected `{key} <value>`")));
        }
        Ok((ln, toks))
    };
    let (ln, toks) = header("shape")?;
    let kind: ShapeKind = toks[1].1.parse().map_err(|e: Error| parse_error(ln, toks[1].0, e.to_string()))?;
    let (ln, toks) = header("truncation")?;
    let n = parse_usize(ln, toks[1])?;
    let mut names: Vec<Option<Vec<String>>> = vec![None; n + 1];
    let mut actions: HashMap<(String, usize), Vec<u32>> = HashMap::new();
    let cat = crate::shape::ShapeCategory::get(kind, n);
    for (ln, toks) in lines {
        match toks[0].1 {
            "sections" => {
                let d = parse_dim_colon(ln, *toks.get(1).ok_or_else(|| parse_error(ln, toks[0].0, "missing dimension"))?)?;
                if d > n {
                    return Err(parse_error(ln, toks[1].0, format!("dimension {d} above truncation {n}")));
                }
                if names[d].is_some() {
                    return Err(parse_error(ln, toks[0].0, format!("sections of dimension {d} listed twice")));
                }
                let mut seen = HashMap::new();
                let mut here = Vec::new();
                for &(col, t) in &toks[2..] {
                    if !valid_name(t) {
                        return Err(parse_error(ln, col, format!("invalid section name {t:?}")));
                    }
                    if seen.insert(t, col).is_some() {
                        return Err(parse_error(ln, col, format!("duplicate section name {t:?}")));
                    }
                    here.push(t.to_string());
                }
                names[d] = Some(here);
            }
            "action" => {
                if toks.len() < 3 {
                    return Err(parse_error(ln, toks[0].0, "expected `action <dim> <generator>:`"));
                }
                let d = parse_usize(ln, toks[1])?;
                let (gcol, gtok) = toks[2];
                let Some(gname) = gtok.strip_suffix(':') else {
                    return Err(parse_error(ln, gcol, format!("expected `<generator>:`, found {gtok:?}")));
                };
                let Some(g) = cat.generators().iter().find(|g| g.name == gname && g.morph.tgt() == d) else {
                    return Err(parse_error(ln, gcol, format!("no generator {gname} acting on dimension {d}")));
                };
                let src = g.morph.src();
                let (Some(from), Some(to)) = (names.get(d).and_then(|x| x.as_ref()), names.get(src).and_then(|x| x.as_ref()))
                else {
                    return Err(parse_error(ln, gcol, "actions must follow the sections they mention"));
                };
                let mut table = vec![u32::MAX; from.len()];
                for &tok in &toks[3..] {
                    let (a, b) = parse_pair(ln, tok)?;
                    let i = from.iter().position(|x| x == a).ok_or_else(|| {
                        parse_error(ln, tok.0, format!("unknown {d}-section {a:?}"))
                    })?;
                    let j = to.iter().position(|x| x == b).ok_or_else(|| {
                        parse_error(ln, tok.0 + a.chars().count() + 1, format!("unknown {src}-section {b:?}"))
                    })?;
                    if table[i] != u32::MAX {
                        return Err(parse_error(ln, tok.0, format!("{a:?} assigned twice")));
                    }
                    table[i] = j as u32;
                }
                if let Some(i) = table.iter().position(|&v| v == u32::MAX) {
                    return Err(parse_error(ln, gcol, format!("no value for {:?}", from[i])));
                }
                if actions.insert((gname.to_string(), d), table).is_some() {
                    return Err(parse_error(ln, gcol, format!("action of {gname} on dimension {d} given twice")));
                }
            }
            other => return Err(parse_error(ln, toks[0].0, format!("unknown keyword {other:?}"))),
        }
    }
    let names: Vec<Vec<String>> = names.into_iter().map(|x| x.unwrap_or_default()).collect();
    // nothing to list for generators acting on an empty dimension
    for g in cat.generators() {
        let (src, d) = (g.morph.src(), g.morph.tgt());
        if src <= n && d <= n && names[d].is_empty() {
            actions.entry((g.name.clone(), d)).or_default();
        }
    }
    Presheaf::from_generator_actions(kind, n, names, &actions)
}

pub fn print_presheaf(x: &Presheaf) -> Result<String> {
    use fmt::Write;
    check_names(x)?;
    let mut out = String::new();
    writeln!(out, "shape {}", x.kind()).unwrap();
    writeln!(out, "truncation {}", x.truncation()).unwrap();
    for d in 0..=x.truncation() {
        write!(out, "sections {d}:").unwrap();
        for n in x.names(d) {
            write!(out, " {n}").unwrap();
        }
        out.push('\n');
    }
    for (name, d, f) in x.generator_actions() {
        write!(out, "action {d} {name}:").unwrap();
        for (i, n) in x.names(d).iter().enumerate() {
            write!(out, " {n}={}", x.names(f.src())[x.restrict(f, i as u32) as usize]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Where an end of a morphism comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    File(String),
    Fixture(String),
    Cylinder(Box<Endpoint>),
}

impl Endpoint {
    fn parse(tok: &str) -> Endpoint {
        if let Some(rest) = tok.strip_prefix("cylinder:") {
            Endpoint::Cylinder(Box::new(Endpoint::parse(rest)))
        } else if let Some(rest) = tok.strip_prefix("fixture:") {
            Endpoint::Fixture(rest.to_string())
        } else {
            Endpoint::File(tok.to_string())
        }
    }

    pub fn resolve(&self, dir: &Path) -> Result<Arc<Presheaf>> {
        match self {
            Endpoint::File(p) => load_presheaf(&dir.join(p)),
            Endpoint::Fixture(name) => fixtures::objects()
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, x)| x)
                .ok_or_else(|| Error::Domain(format!("no fixture named {name}"))),
            Endpoint::Cylinder(inner) => Ok(cylinder(&inner.resolve(dir)?).object),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::File(p) => write!(f, "{p}"),
            Endpoint::Fixture(n) => write!(f, "fixture:{n}"),
            Endpoint::Cylinder(e) => write!(f, "cylinder:{e}"),
        }
    }
}

/// A morphism file before its ends are loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismText {
    pub source: Endpoint,
    pub target: Endpoint,
    /// `(source name, target name)` per dimension.
    pub map: Vec<Vec<(String, String)>>,
}

pub fn parse_morphism_text(text: &str) -> Result<MorphismText> {
    let mut lines = Lines::new(text);
    let mut ends = Vec::new();
    for key in ["source", "target"] {
        let (ln, toks) = lines.next().ok_or_else(|| parse_error(1, 1, format!("missing `{key}` line")))?;
        if toks[0].1 != key || toks.len() != 2 {
            return Err(parse_error(ln, toks[0].0, format!("expected `{key} <end>`")));
        }
        ends.push(Endpoint::parse(toks[1].1));
    }
    let mut map: Vec<Vec<(String, String)>> = Vec::new();
    for (ln, toks) in lines {
        if toks[0].1 != "map" || toks.len() < 2 {
            return Err(parse_error(ln, toks[0].0, "expected `map <dim>: ...`"));
        }
        let d = parse_dim_colon(ln, toks[1])?;
        if d != map.len() {
            return Err(parse_error(ln, toks[1].0, format!("expected dimension {}, found {d}", map.len())));
        }
        let pairs = toks[2..]
            .iter()
            .map(|&t| parse_pair(ln, t).map(|(a, b)| (a.to_string(), b.to_string())))
            .collect::<Result<Vec<_>>>()?;
        map.push(pairs);
    }
    let target = ends.pop().expect("two ends");
    let source = ends.pop().expect("two ends");
    Ok(MorphismText { source, target, map })
}

pub fn print_morphism_text(m: &MorphismText) -> String {
    use fmt::Write;
    let mut out = String::new();
    writeln!(out, "source {}", m.source).unwrap();
    writeln!(out, "target {}", m.target).unwrap();
    for (d, pairs) in m.map.iter().enumerate() {
        write!(out, "map {d}:").unwrap();
        for (a, b) in pairs {
            write!(out, " {a}={b}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn morphism_text(f: &PresheafMap, source: Endpoint, target: Endpoint) -> Result<MorphismText> {
    check_names(&f.source)?;
    check_names(&f.target)?;
    let map = f
        .levels
        .iter()
        .enumerate()
        .map(|(d, l)| {
            l.iter()
                .enumerate()
                .map(|(i, &v)| (f.source.names(d)[i].clone(), f.target.names(d)[v as usize].clone()))
                .collect()
        })
        .collect();
    Ok(MorphismText { source, target, map })
}

/// Turns named pairs into a checked natural map between loaded ends.
pub fn build_morphism(m: &MorphismText, source: Arc<Presheaf>, target: Arc<Presheaf>) -> Result<PresheafMap> {
    let n = source.truncation();
    if m.map.len() != n + 1 {
        return Err(Error::Domain(format!("map lists {} dimensions, expected {}", m.map.len(), n + 1)));
    }
    let mut levels = Vec::with_capacity(n + 1);
    for (d, pairs) in m.map.iter().enumerate() {
        let mut l = vec![u32::MAX; source.len(d)];
        for (a, b) in pairs {
            let i = source.find(d, a).ok_or_else(|| Error::Domain(format!("unknown source {d}-section {a}")))?;
            let j = target.find(d, b).ok_or_else(|| Error::Domain(format!("unknown target {d}-section {b}")))?;
            l[i as usize] = j;
        }
        if let Some(i) = l.iter().position(|&v| v == u32::MAX) {
            return Err(Error::Domain(format!("no value for {d}-section {}", source.names(d)[i])));
        }
        levels.push(l);
    }
    PresheafMap::new(source, target, levels)
}

/// The restriction of `x` to dimensions `<= t`.
pub fn truncate(x: &Presheaf, t: usize) -> Result<Presheaf> {
    if t > x.truncation() {
        return Err(Error::TruncationMismatch(t, x.truncation()));
    }
    let actions: HashMap<(String, usize), Vec<u32>> = x
        .generator_actions()
        .into_iter()
        .filter(|(_, d, f)| *d <= t && f.src() <= t)
        .map(|(name, d, f)| ((name, d), x.table(f).to_vec()))
        .collect();
    Presheaf::from_generator_actions(x.kind(), t, x.all_names()[..=t].to_vec(), &actions)
}

pub fn truncate_map(f: &PresheafMap, t: usize) -> Result<PresheafMap> {
    let source = Arc::new(truncate(&f.source, t)?);
    let target = Arc::new(truncate(&f.target, t)?);
    PresheafMap::new(source, target, f.levels[..=t].to_vec())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, col, message } => {
            Error::Parse { line, col, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    }
}

pub fn load_presheaf(path: &Path) -> Result<Arc<Presheaf>> {
    let text = read(path)?;
    parse_presheaf(&text).map(Arc::new).map_err(|e| located(path, e))
}

pub fn load_morphism(path: &Path) -> Result<PresheafMap> {
    let text = read(path)?;
    let m = parse_morphism_text(&text).map_err(|e| located(path, e))?;
    let dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let source = m.source.resolve(&dir)?;
    let target = m.target.resolve(&dir)?;
    build_morphism(&m, source, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presheaf_round_trip() {
        for (name, x) in fixtures::objects() {
            let text = print_presheaf(&x).unwrap();
            let back = parse_presheaf(&text).unwrap();
            assert_eq!(back, *x, "{name}");
            assert_eq!(print_presheaf(&back).unwrap(), text, "{name}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let text = "shape cube\ntruncation 0\nsections 0: a a\n";
        match parse_presheaf(text) {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (3, 15)),
            other => panic!("{other:?}"),
        }
        match parse_presheaf("shape hexagon\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn morphism_round_trip() {
        let f = fixtures::vertex_inclusion(ShapeKind::Cube, 1, 2);
        let m = morphism_text(&f, Endpoint::Fixture("cube-rep0".into()), Endpoint::Fixture("cube-rep1".into())).unwrap();
        let text = print_morphism_text(&m);
        let back = parse_morphism_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(print_morphism_text(&back), text);
        let g = build_morphism(&back, f.source.clone(), f.target.clone()).unwrap();
        assert_eq!(g.levels, f.levels);
        assert_eq!(Endpoint::parse("cylinder:fixture:point").to_string(), "cylinder:fixture:point");
    }

    #[test]
    fn truncation_keeps_low_dimensions() {
        let x = fixtures::representable(ShapeKind::Cube, 1, 2);
        let t = truncate(&x, 1).unwrap();
        assert_eq!(t.sizes(), vec![2, 3]);
        assert_eq!(truncate(&x, 2).unwrap(), *x);
        assert!(truncate(&x, 3).is_err());
    }

    #[test]
    fn empty_and_broken_files() {
        let e = parse_presheaf("shape cube\ntruncation 1\nsections 0:\nsections 1:\n").unwrap();
        assert!(e.is_empty());
        let broken = "shape cube\ntruncation 1\nsections 0: a b\nsections 1: f a'\n\
                      action 1 d1_0: f=a a'=a\naction 1 d1_1: f=b a'=a\naction 0 s1: a=a' b=a'\n";
        match parse_presheaf(broken) {
            Err(Error::Functoriality { generator, section, .. }) => {
                assert!(generator.contains("s1") || generator.contains("d1"), "{generator}");
                assert!(!section.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }
}
