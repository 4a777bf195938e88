use std::sync::Arc;

use crate::error::{Error, Result};
use crate::shape::{GeneratorClass, MorphId, ShapeKind};

use super::{Presheaf, PresheafMap, Section};

/// A subpresheaf, given by membership flags per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subpresheaf {
    pub ambient: Arc<Presheaf>,
    pub members: Vec<Vec<bool>>,
}

impl Subpresheaf {
    pub fn new(ambient: Arc<Presheaf>, members: Vec<Vec<bool>>) -> Result<Subpresheaf> {
        let s = Subpresheaf { ambient, members };
        if let Some(w) = s.closure_violation() {
            return Err(Error::InvariantViolation(w));
        }
        Ok(s)
    }

    pub fn empty(ambient: Arc<Presheaf>) -> Subpresheaf {
        let members = ambient.sizes().into_iter().map(|n| vec![false; n]).collect();
        Subpresheaf { ambient, members }
    }

    pub fn full(ambient: Arc<Presheaf>) -> Subpresheaf {
        let members = ambient.sizes().into_iter().map(|n| vec![true; n]).collect();
        Subpresheaf { ambient, members }
    }

    /// Smallest subpresheaf containing the given sections.
    pub fn generated_by(ambient: Arc<Presheaf>, gens: &[Section]) -> Subpresheaf {
        let mut s = Subpresheaf::empty(ambient.clone());
        for &g in gens {
            for d in 0..=ambient.truncation() {
                for f in ambient.cat().hom_ids(d, g.dim) {
                    s.members[d][ambient.restrict(f, g.idx) as usize] = true;
                }
            }
        }
        s
    }

    /// Image of a map, as a subpresheaf of its target.
    pub fn image(m: &PresheafMap) -> Subpresheaf {
        let mut s = Subpresheaf::empty(m.target.clone());
        for (d, l) in m.levels.iter().enumerate() {
            for &v in l {
                s.members[d][v as usize] = true;
            }
        }
        s
    }

    pub fn contains(&self, s: Section) -> bool {
        self.members[s.dim][s.idx as usize]
    }

    pub fn count(&self) -> Vec<usize> {
        self.members.iter().map(|l| l.iter().filter(|&&b| b).count()).collect()
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|l| l.iter().all(|&b| b))
    }

    pub fn union(&self, other: &Subpresheaf) -> Subpresheaf {
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x || *y).collect())
            .collect();
        Subpresheaf { ambient: self.ambient.clone(), members }
    }

    pub fn intersection(&self, other: &Subpresheaf) -> Subpresheaf {
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x && *y).collect())
            .collect();
        Subpresheaf { ambient: self.ambient.clone(), members }
    }

    pub fn is_subset_of(&self, other: &Subpresheaf) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| !*x || *y))
    }

    /// First restriction leaving the subobject, if any.
    pub fn closure_violation(&self) -> Option<String> {
        let x = &self.ambient;
        for (name, dim, g) in x.generator_actions() {
            for i in 0..x.len(dim) as u32 {
                if self.members[dim][i as usize] && !self.members[g.src()][x.restrict(g, i) as usize] {
                    return Some(format!(
                        "{name} sends member {} to non-member {}",
                        x.name(Section::new(dim, i)),
                        x.name(Section::new(g.src(), x.restrict(g, i)))
                    ));
                }
            }
        }
        None
    }

    /// The subobject as a presheaf (sections in ambient order, ambient names)
    /// together with its inclusion.
    pub fn to_presheaf(&self) -> (Arc<Presheaf>, PresheafMap) {
        let x = &self.ambient;
        let kept: Vec<Vec<u32>> = self
            .members
            .iter()
            .map(|l| l.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32).collect())
            .collect();
        let mut position: Vec<Vec<u32>> = x.sizes().into_iter().map(|n| vec![u32::MAX; n]).collect();
        for (d, k) in kept.iter().enumerate() {
            for (new, &old) in k.iter().enumerate() {
                position[d][old as usize] = new as u32;
            }
        }
        let names = kept
            .iter()
            .enumerate()
            .map(|(d, k)| k.iter().map(|&i| x.names(d)[i as usize].clone()).collect())
            .collect();
        let sub = Presheaf::from_fn(x.kind(), x.truncation(), names, |f, s| {
            position[f.src()][x.restrict(f, kept[f.tgt()][s as usize]) as usize]
        });
        let sub = Arc::new(sub);
        let incl = PresheafMap::new_unchecked(sub.clone(), x.clone(), kept);
        (sub, incl)
    }

    /// Preimage of a subobject of the target along a map.
    pub fn preimage(m: &PresheafMap, s: &Subpresheaf) -> Subpresheaf {
        let members = m
            .levels
            .iter()
            .enumerate()
            .map(|(d, l)| l.iter().map(|&v| s.members[d][v as usize]).collect())
            .collect();
        Subpresheaf { ambient: m.source.clone(), members }
    }
}

/// The boundary `∂a` of the representable of dimension `n`: the morphisms
/// into `n` whose mono part is proper, i.e. the non-surjective ones.
pub fn boundary_subobject(kind: ShapeKind, n: usize, truncation: usize) -> Subpresheaf {
    let a = Arc::new(Presheaf::representable(kind, n, truncation));
    let cat = a.cat().clone();
    let members = (0..=truncation)
        .map(|d| cat.hom_ids(d, n).map(|f| !cat.is_epi(f)).collect())
        .collect();
    Subpresheaf { ambient: a, members }
}

/// Second computation of the boundary: union of images of the proper monos
/// `b -> a`.
pub fn boundary_via_monos(kind: ShapeKind, n: usize, truncation: usize) -> Subpresheaf {
    let a = Arc::new(Presheaf::representable(kind, n, truncation));
    let cat = a.cat().clone();
    let mut s = Subpresheaf::empty(a.clone());
    for b in 0..n {
        for m in cat.hom_ids(b, n).filter(|&m| cat.is_mono(m)) {
            let img = Subpresheaf::generated_by(a.clone(), &[Section::new(b, m.idx)]);
            s = s.union(&img);
        }
    }
    s
}

fn union_of_faces(kind: ShapeKind, n: usize, truncation: usize, faces: &[MorphId]) -> Subpresheaf {
    let a = Arc::new(Presheaf::representable(kind, n, truncation));
    let gens: Vec<Section> = faces.iter().map(|f| Section::new(n - 1, f.idx)).collect();
    Subpresheaf::generated_by(a, &gens)
}

/// Open box `⊓^{i,e}_n ⊂ □_n`: union of the faces `d{j}_{ε}`, `(j,ε) ≠ (i,e)`.
pub fn open_box(kind: ShapeKind, n: usize, i: usize, e: u32, truncation: usize) -> Subpresheaf {
    assert!(kind.is_cubical() && n >= 1 && (1..=n).contains(&i) && e <= 1);
    let cat = crate::shape::ShapeCategory::get(kind, truncation);
    let missing = format!("d{i}_{e}");
    let faces: Vec<MorphId> = cat
        .generators()
        .iter()
        .filter(|g| g.class == GeneratorClass::Face && g.morph.tgt() == n && g.name != missing)
        .map(|g| g.morph)
        .collect();
    union_of_faces(kind, n, truncation, &faces)
}

/// Horn `Λ^k[n] ⊂ Δ[n]`: union of the faces `d{j}`, `j ≠ k`.
pub fn horn(n: usize, k: usize, truncation: usize) -> Subpresheaf {
    assert!(n >= 1 && k <= n);
    let cat = crate::shape::ShapeCategory::get(ShapeKind::Simplex, truncation);
    let missing = format!("d{k}");
    let faces: Vec<MorphId> = cat
        .generators()
        .iter()
        .filter(|g| g.class == GeneratorClass::Face && g.morph.tgt() == n && g.name != missing)
        .map(|g| g.morph)
        .collect();
    union_of_faces(ShapeKind::Simplex, n, truncation, &faces)
}

/// A generating inclusion `K ⊂ a` with a readable label.
#[derive(Debug, Clone)]
pub struct Generating {
    pub label: String,
    pub dim: usize,
    pub sub: Subpresheaf,
}

/// Open boxes (cubes) or horns (simplices) of dimension `1..=maxdim`.
pub fn anodyne_generators(kind: ShapeKind, maxdim: usize, truncation: usize) -> Vec<Generating> {
    let mut out = Vec::new();
    for n in 1..=maxdim.min(truncation) {
        match kind {
            ShapeKind::Simplex => {
                for k in 0..=n {
                    out.push(Generating { label: format!("horn {k} of [{n}]"), dim: n, sub: horn(n, k, truncation) });
                }
            }
            _ => {
                for i in 1..=n {
                    for e in 0..2 {
                        out.push(Generating {
                            label: format!("open box ({i},{e}) of cube{n}"),
                            dim: n,
                            sub: open_box(kind, n, i, e, truncation),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Boundary inclusions of dimension `0..=maxdim`.
pub fn cofibration_generators(kind: ShapeKind, maxdim: usize, truncation: usize) -> Vec<Generating> {
    (0..=maxdim.min(truncation))
        .map(|n| Generating {
            label: match kind {
                ShapeKind::Simplex => format!("boundary of [{n}]"),
                _ => format!("boundary of cube{n}"),
            },
            dim: n,
            sub: boundary_subobject(kind, n, truncation),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_counts() {
        let b0 = boundary_subobject(ShapeKind::Cube, 0, 2);
        assert_eq!(b0.count(), vec![0, 0, 0]);
        let b2 = boundary_subobject(ShapeKind::Cube, 2, 2);
        let (p, _) = b2.to_presheaf();
        assert_eq!(p.nondegenerate_count(), vec![4, 4, 0]);
        let d1 = boundary_subobject(ShapeKind::Simplex, 1, 2);
        let (p, _) = d1.to_presheaf();
        assert_eq!(p.nondegenerate_count(), vec![2, 0, 0]);
    }

    #[test]
    fn boundary_routes_agree() {
        for kind in ShapeKind::ALL {
            for n in 0..=3 {
                assert_eq!(boundary_subobject(kind, n, 3), boundary_via_monos(kind, n, 3));
            }
        }
    }

    #[test]
    fn open_boxes_in_dimension_one() {
        let gens = anodyne_generators(ShapeKind::Cube, 1, 2);
        assert_eq!(gens.len(), 2);
        let (b10, _) = gens[0].sub.to_presheaf();
        // ⊓^{1,0}_1 is the vertex 1
        assert_eq!(b10.names(0), &["1".to_string()]);
        let (b11, _) = gens[1].sub.to_presheaf();
        assert_eq!(b11.names(0), &["0".to_string()]);
    }

    #[test]
    fn boxes_and_horns_counts() {
        let boxes: Vec<_> = anodyne_generators(ShapeKind::Cube, 2, 2).into_iter().filter(|g| g.dim == 2).collect();
        assert_eq!(boxes.len(), 4);
        for b in &boxes {
            let (p, _) = b.sub.to_presheaf();
            assert_eq!(p.nondegenerate_count(), vec![4, 3, 0]);
        }
        let horns: Vec<_> = anodyne_generators(ShapeKind::Simplex, 2, 2).into_iter().filter(|g| g.dim == 2).collect();
        assert_eq!(horns.len(), 3);
        for h in &horns {
            assert!(h.sub.closure_violation().is_none());
            let (p, _) = h.sub.to_presheaf();
            assert_eq!(p.nondegenerate_count(), vec![3, 2, 0]);
        }
    }
}
