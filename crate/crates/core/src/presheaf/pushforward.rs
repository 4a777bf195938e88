use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::search::{ExtensionProblem, Over};
use crate::shape::MorphId;

use super::{Presheaf, PresheafMap, Subpresheaf};

/// `v_* X` over `Y'` for a mono `v: Y -> Y'`, with the unit `u: X -> v_* X`.
#[derive(Debug, Clone)]
pub struct Pushforward {
    pub object: Arc<Presheaf>,
    /// `p': v_* X -> Y'`.
    pub map: PresheafMap,
    /// `u: X -> v_* X`, with `p' ∘ u = v ∘ p`.
    pub unit: PresheafMap,
}

/// Right adjoint to base change along a mono. A section over `c: a -> Y'`
/// is a map `c^* Y -> X` over `Y`, where `c^* Y ⊆ a` is the part of `a`
/// landing in the image of `v`.
pub fn pushforward_along_mono(v: &PresheafMap, p: &PresheafMap) -> Result<Pushforward> {
    if !v.is_mono() {
        return Err(Error::NotMono("pushforward needs a mono".to_string()));
    }
    if *v.source != *p.target {
        return Err(Error::Naturality("p does not land in the domain of v".to_string()));
    }
    let (x, yp) = (&p.source, &v.target);
    let n = x.truncation();
    let cat = x.cat().clone();
    let mut v_inv: Vec<Vec<Option<u32>>> = yp.sizes().into_iter().map(|s| vec![None; s]).collect();
    for (d, l) in v.levels.iter().enumerate() {
        for (i, &t) in l.iter().enumerate() {
            v_inv[d][t as usize] = Some(i as u32);
        }
    }
    type Phi = Vec<Vec<u32>>;
    let mut sections: Vec<Vec<(u32, Phi)>> = Vec::with_capacity(n + 1);
    let mut lookup: Vec<HashMap<(u32, Phi), u32>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let rep = Arc::new(Presheaf::representable(x.kind(), d, n));
        let mut here = Vec::new();
        for c in 0..yp.len(d) as u32 {
            let members: Vec<Vec<bool>> = (0..=n)
                .map(|e| cat.hom_ids(e, d).map(|f| v_inv[e][yp.restrict(f, c) as usize].is_some()).collect())
                .collect();
            let sub = Subpresheaf { ambient: rep.clone(), members };
            let (pc, incl) = sub.to_presheaf();
            let bottom: Vec<Vec<u32>> = incl
                .levels
                .iter()
                .enumerate()
                .map(|(e, l)| {
                    l.iter()
                        .map(|&f| v_inv[e][yp.restrict(MorphId::new(e, d, f as usize), c) as usize].unwrap())
                        .collect()
                })
                .collect();
            let problem = ExtensionProblem::free(&pc, x).over(Over { p: &p.levels, bottom: &bottom });
            for sol in problem.all(None) {
                let mut phi: Phi = (0..=n).map(|e| vec![u32::MAX; cat.homs(e, d).len()]).collect();
                for (e, l) in incl.levels.iter().enumerate() {
                    for (k, &f) in l.iter().enumerate() {
                        phi[e][f as usize] = sol[e][k];
                    }
                }
                here.push((c, phi));
            }
        }
        lookup.push(here.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect());
        sections.push(here);
    }
    let names: Vec<Vec<String>> = sections
        .iter()
        .enumerate()
        .map(|(d, ss)| {
            ss.iter()
                .map(|(c, phi)| {
                    let vals: Vec<String> = phi
                        .iter()
                        .enumerate()
                        .flat_map(|(e, l)| {
                            l.iter().filter(|&&v| v != u32::MAX).map(move |&v| x.names(e)[v as usize].clone())
                        })
                        .collect();
                    format!("{}<{}>", yp.names(d)[*c as usize], vals.join(","))
                })
                .collect()
        })
        .collect();
    let restrict_phi = |g: MorphId, phi: &Phi, c2: u32| -> Phi {
        let e = g.src();
        (0..=n)
            .map(|e2| {
                cat.hom_ids(e2, e)
                    .map(|f| {
                        if v_inv[e2][yp.restrict(f, c2) as usize].is_some() {
                            let gf = cat.compose(g, f);
                            phi[e2][gf.idx as usize]
                        } else {
                            u32::MAX
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let object = Presheaf::from_fn(x.kind(), n, names, |g, s| {
        let (c, phi) = &sections[g.tgt()][s as usize];
        let c2 = yp.restrict(g, *c);
        let phi2 = restrict_phi(g, phi, c2);
        lookup[g.src()][&(c2, phi2)]
    });
    let object = Arc::new(object);
    let map_levels = sections.iter().map(|ss| ss.iter().map(|s| s.0).collect()).collect();
    let unit_levels = (0..=n)
        .map(|d| {
            (0..x.len(d) as u32)
                .map(|s| {
                    let c = v.levels[d][p.levels[d][s as usize] as usize];
                    let phi: Phi = (0..=n)
                        .map(|e| cat.hom_ids(e, d).map(|f| x.restrict(f, s)).collect())
                        .collect();
                    lookup[d][&(c, phi)]
                })
                .collect()
        })
        .collect();
    Ok(Pushforward {
        map: PresheafMap::new_unchecked(object.clone(), yp.clone(), map_levels),
        unit: PresheafMap::new_unchecked(x.clone(), object.clone(), unit_levels),
        object,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::ShapeKind;

    #[test]
    fn along_identity_is_isomorphic() {
        let y = Arc::new(Presheaf::representable(ShapeKind::Cube, 1, 2));
        let id = PresheafMap::identity(y.clone());
        let pf = pushforward_along_mono(&id, &id).unwrap();
        assert!(pf.object.validate().passed());
        assert!(pf.unit.is_iso());
        assert!(pf.map.is_natural() && pf.unit.is_natural());
    }

    #[test]
    fn empty_over_point() {
        let c = ShapeKind::Cube;
        let empty = Arc::new(Presheaf::empty(c, 2));
        let pt = Arc::new(Presheaf::terminal(c, 2));
        let v = PresheafMap::new_unchecked(empty.clone(), pt.clone(), vec![vec![]; 3]);
        let p = PresheafMap::identity(empty);
        let pf = pushforward_along_mono(&v, &p).unwrap();
        assert_eq!(pf.object.sizes(), vec![1, 1, 1]);
    }
}
