use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};

use super::{Presheaf, PresheafMap};

/// Levelwise product `X × Y` with its projections. Section `(x, y)` in
/// dimension `d` has index `x * |Y_d| + y`.
pub fn product(x: &Arc<Presheaf>, y: &Arc<Presheaf>) -> Result<(Arc<Presheaf>, PresheafMap, PresheafMap)> {
    x.check_compatible(y)?;
    let n = x.truncation();
    let names = (0..=n)
        .map(|d| {
            let mut v = Vec::with_capacity(x.len(d) * y.len(d));
            for a in x.names(d) {
                for b in y.names(d) {
                    v.push(format!("({a},{b})"));
                }
            }
            v
        })
        .collect();
    let p = Presheaf::from_fn(x.kind(), n, names, |f, s| {
        let ny = y.len(f.tgt()) as u32;
        let (a, b) = (s / ny, s % ny);
        x.restrict(f, a) * y.len(f.src()) as u32 + y.restrict(f, b)
    });
    let p = Arc::new(p);
    let p1 = (0..=n)
        .map(|d| (0..p.len(d) as u32).map(|s| s / y.len(d) as u32).collect())
        .collect();
    let p2 = (0..=n)
        .map(|d| (0..p.len(d) as u32).map(|s| s % y.len(d) as u32).collect())
        .collect();
    Ok((
        p.clone(),
        PresheafMap::new_unchecked(p.clone(), x.clone(), p1),
        PresheafMap::new_unchecked(p, y.clone(), p2),
    ))
}

/// Levelwise product of two maps, `f × g: X × Y -> X' × Y'`, between the
/// products built by [`product`].
pub fn product_map(f: &PresheafMap, g: &PresheafMap, source: &Arc<Presheaf>, target: &Arc<Presheaf>) -> PresheafMap {
    let levels = (0..f.levels.len())
        .map(|d| {
            let ny = g.source.len(d) as u32;
            let nty = g.target.len(d) as u32;
            (0..source.len(d) as u32)
                .map(|s| f.levels[d][(s / ny) as usize] * nty + g.levels[d][(s % ny) as usize])
                .collect()
        })
        .collect();
    PresheafMap::new_unchecked(source.clone(), target.clone(), levels)
}

/// Disjoint union with its injections; sections of `X` come first.
pub fn coproduct(x: &Arc<Presheaf>, y: &Arc<Presheaf>) -> Result<(Arc<Presheaf>, PresheafMap, PresheafMap)> {
    x.check_compatible(y)?;
    let n = x.truncation();
    let names = (0..=n)
        .map(|d| {
            x.names(d)
                .iter()
                .map(|a| format!("inl({a})"))
                .chain(y.names(d).iter().map(|b| format!("inr({b})")))
                .collect()
        })
        .collect();
    let c = Presheaf::from_fn(x.kind(), n, names, |f, s| {
        let nx = x.len(f.tgt()) as u32;
        if s < nx {
            x.restrict(f, s)
        } else {
            x.len(f.src()) as u32 + y.restrict(f, s - nx)
        }
    });
    let c = Arc::new(c);
    let inl = (0..=n).map(|d| (0..x.len(d) as u32).collect()).collect();
    let inr = (0..=n)
        .map(|d| (0..y.len(d) as u32).map(|s| s + x.len(d) as u32).collect())
        .collect();
    Ok((
        c.clone(),
        PresheafMap::new_unchecked(x.clone(), c.clone(), inl),
        PresheafMap::new_unchecked(y.clone(), c, inr),
    ))
}

/// A chosen pullback `X ×_Z Y` with canonical pair sections in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub object: Arc<Presheaf>,
    pub p1: PresheafMap,
    pub p2: PresheafMap,
    pub pairs: Vec<Vec<(u32, u32)>>,
    index: Vec<HashMap<(u32, u32), u32>>,
}

impl Pullback {
    pub fn pair_index(&self, d: usize, a: u32, b: u32) -> Option<u32> {
        self.index[d].get(&(a, b)).copied()
    }

    /// The unique map from a cone `(a: T -> X, b: T -> Y)`.
    pub fn induced(&self, a: &PresheafMap, b: &PresheafMap) -> Result<PresheafMap> {
        let levels = a
            .levels
            .iter()
            .enumerate()
            .map(|(d, la)| {
                la.iter()
                    .zip(&b.levels[d])
                    .map(|(&x, &y)| {
                        self.pair_index(d, x, y)
                            .ok_or_else(|| Error::Naturality(format!("cone does not commute in dimension {d}")))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PresheafMap::new_unchecked(a.source.clone(), self.object.clone(), levels))
    }
}

pub fn pullback(f: &PresheafMap, g: &PresheafMap) -> Result<Pullback> {
    f.source.check_compatible(&g.source)?;
    f.target.check_compatible(&g.target)?;
    if *f.target != *g.target {
        return Err(Error::Naturality("pullback of maps with different codomains".to_string()));
    }
    let (x, y) = (&f.source, &g.source);
    let n = x.truncation();
    let mut pairs = Vec::with_capacity(n + 1);
    let mut index = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let mut by_value: HashMap<u32, Vec<u32>> = HashMap::new();
        for (j, &v) in g.levels[d].iter().enumerate() {
            by_value.entry(v).or_default().push(j as u32);
        }
        let mut ps = Vec::new();
        for (i, &v) in f.levels[d].iter().enumerate() {
            if let Some(js) = by_value.get(&v) {
                for &j in js {
                    ps.push((i as u32, j));
                }
            }
        }
        let idx: HashMap<(u32, u32), u32> = ps.iter().enumerate().map(|(k, &p)| (p, k as u32)).collect();
        pairs.push(ps);
        index.push(idx);
    }
    let names = pairs
        .iter()
        .enumerate()
        .map(|(d, ps)| {
            ps.iter()
                .map(|&(i, j)| format!("({},{})", x.names(d)[i as usize], y.names(d)[j as usize]))
                .collect()
        })
        .collect();
    let object = Presheaf::from_fn(x.kind(), n, names, |m, s| {
        let (i, j) = pairs[m.tgt()][s as usize];
        index[m.src()][&(x.restrict(m, i), y.restrict(m, j))]
    });
    let object = Arc::new(object);
    let p1 = pairs.iter().map(|ps| ps.iter().map(|p| p.0).collect()).collect();
    let p2 = pairs.iter().map(|ps| ps.iter().map(|p| p.1).collect()).collect();
    Ok(Pullback {
        p1: PresheafMap::new_unchecked(object.clone(), x.clone(), p1),
        p2: PresheafMap::new_unchecked(object.clone(), y.clone(), p2),
        object,
        pairs,
        index,
    })
}

/// Pushout of a mono `i: W -> L` along `u: W -> X`.
#[derive(Debug, Clone)]
pub struct Pushout {
    pub object: Arc<Presheaf>,
    /// `X -> P`, a mono, the identity on indices below `|X_d|`.
    pub from_x: PresheafMap,
    /// `L -> P`.
    pub from_l: PresheafMap,
    /// Sections of `L` outside the image of `i`, in the order they were added.
    pub new_sections: Vec<Vec<u32>>,
}

impl Pushout {
    /// The unique map out of the pushout determined by a cocone.
    pub fn induced(&self, on_x: &PresheafMap, on_l: &PresheafMap) -> PresheafMap {
        let levels = (0..self.object.truncation() + 1)
            .map(|d| {
                let mut l: Vec<u32> = on_x.levels[d].clone();
                for &s in &self.new_sections[d] {
                    l.push(on_l.levels[d][s as usize]);
                }
                l
            })
            .collect();
        PresheafMap::new_unchecked(self.object.clone(), on_x.target.clone(), levels)
    }
}

/// Levelwise pushout of the mono `i` along `u`. New sections are named by
/// `new_name(dim, l)`; clashes with existing names get a `'` appended.
pub fn pushout(i: &PresheafMap, u: &PresheafMap) -> Result<Pushout> {
    pushout_named(i, u, |l, d, s| format!("new.{}", l.names(d)[s as usize]))
}

pub fn pushout_named(
    i: &PresheafMap,
    u: &PresheafMap,
    new_name: impl Fn(&Presheaf, usize, u32) -> String,
) -> Result<Pushout> {
    if !i.is_mono() {
        return Err(Error::NotMono("pushout leg".to_string()));
    }
    if *i.source != *u.source {
        return Err(Error::Naturality("pushout legs have different domains".to_string()));
    }
    let (l, x) = (&i.target, &u.target);
    l.check_compatible(x)?;
    let n = l.truncation();
    // preimage under i, per dimension
    let mut pre: Vec<Vec<Option<u32>>> = l.sizes().into_iter().map(|s| vec![None; s]).collect();
    for (d, lv) in i.levels.iter().enumerate() {
        for (w, &v) in lv.iter().enumerate() {
            pre[d][v as usize] = Some(w as u32);
        }
    }
    let mut new_sections = Vec::with_capacity(n + 1);
    let mut new_pos: Vec<Vec<u32>> = l.sizes().into_iter().map(|s| vec![u32::MAX; s]).collect();
    let mut names: Vec<Vec<String>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let mut taken: HashSet<String> = x.names(d).iter().cloned().collect();
        let mut ns = x.names(d).to_vec();
        let mut added = Vec::new();
        for s in 0..l.len(d) as u32 {
            if pre[d][s as usize].is_none() {
                let mut name = new_name(l, d, s);
                while !taken.insert(name.clone()) {
                    name.push('\'');
                }
                new_pos[d][s as usize] = ns.len() as u32;
                ns.push(name);
                added.push(s);
            }
        }
        names.push(ns);
        new_sections.push(added);
    }
    let l_to_p = |d: usize, s: u32| -> u32 {
        match pre[d][s as usize] {
            Some(w) => u.levels[d][w as usize],
            None => new_pos[d][s as usize],
        }
    };
    let object = Presheaf::from_fn(x.kind(), n, names, |f, p| {
        let nx = x.len(f.tgt()) as u32;
        if p < nx {
            x.restrict(f, p)
        } else {
            let s = new_sections[f.tgt()][(p - nx) as usize];
            l_to_p(f.src(), l.restrict(f, s))
        }
    });
    let object = Arc::new(object);
    let from_x = (0..=n).map(|d| (0..x.len(d) as u32).collect()).collect();
    let from_l = (0..=n).map(|d| (0..l.len(d) as u32).map(|s| l_to_p(d, s)).collect()).collect();
    Ok(Pushout {
        from_x: PresheafMap::new_unchecked(x.clone(), object.clone(), from_x),
        from_l: PresheafMap::new_unchecked(l.clone(), object.clone(), from_l),
        object,
        new_sections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::Section;
    use crate::shape::ShapeKind;

    #[test]
    fn product_of_intervals() {
        let i = Arc::new(Presheaf::representable(ShapeKind::Cube, 1, 2));
        let (p, a, b) = product(&i, &i).unwrap();
        assert_eq!(p.len(1), 9);
        assert!(p.validate().passed());
        assert!(a.is_natural() && b.is_natural());
    }

    #[test]
    fn wedge_of_two_edges() {
        let c = ShapeKind::Cube;
        let pt = Arc::new(Presheaf::representable(c, 0, 2));
        let e = Arc::new(Presheaf::representable(c, 1, 2));
        // vertex 1 of the first edge glued to vertex 0 of the second
        let i = PresheafMap::from_section(e.clone(), Section::new(0, 1)).with_ends(pt.clone(), e.clone());
        let u = PresheafMap::from_section(e.clone(), Section::new(0, 0)).with_ends(pt.clone(), e.clone());
        let po = pushout(&i, &u).unwrap();
        assert!(po.object.validate().passed());
        assert_eq!(po.object.nondegenerate_count(), vec![3, 2, 0]);
        assert!(po.from_x.is_natural() && po.from_l.is_natural() && po.from_x.is_mono());
    }

    #[test]
    fn pullback_of_two_points_over_point() {
        let c = ShapeKind::Cube;
        let pt = Arc::new(Presheaf::terminal(c, 1));
        let (two, _, _) = coproduct(&pt, &pt).unwrap();
        let f = PresheafMap::to_terminal(two.clone());
        let pb = pullback(&f, &f).unwrap();
        assert_eq!(pb.object.len(0), 4);
        assert!(pb.object.validate().passed());
    }
}
