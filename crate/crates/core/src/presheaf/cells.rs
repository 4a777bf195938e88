use std::sync::Arc;

use crate::error::{Error, Result};

use super::limits::pushout_named;
use super::{boundary_subobject, Presheaf, PresheafMap, Section, Subpresheaf};

/// One cell `∂a -> a` glued along `attaching`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub dim: usize,
    /// The nondegenerate section of `L` this cell becomes.
    pub section: u32,
    /// `attaching[d][k]`: the section of `L` hit by the `k`-th member of
    /// `(∂a)_d` (in hom-set order).
    pub attaching: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
pub struct CellDecomposition {
    pub whole: Arc<Presheaf>,
    pub base: Subpresheaf,
    pub attachments: Vec<Attachment>,
}

/// Relative cell structure of `(L, K)`: the nondegenerate sections of `L`
/// outside `K`, by dimension and then section order.
pub fn cell_decomposition(l: &Arc<Presheaf>, k: &Subpresheaf) -> CellDecomposition {
    let cat = l.cat().clone();
    let mut attachments = Vec::new();
    for d in 0..=l.truncation() {
        for x in l.nondegenerate(d) {
            if k.contains(x) {
                continue;
            }
            let attaching = (0..=l.truncation())
                .map(|b| {
                    cat.hom_ids(b, d)
                        .filter(|&f| !cat.is_epi(f))
                        .map(|f| l.restrict(f, x.idx))
                        .collect()
                })
                .collect();
            attachments.push(Attachment { dim: d, section: x.idx, attaching });
        }
    }
    CellDecomposition { whole: l.clone(), base: k.clone(), attachments }
}

/// Rebuilds `L` from `K` by successive pushouts of boundary inclusions. The
/// result uses the names and section order of `L`, so a correct
/// decomposition replays to a presheaf equal to `L`.
pub fn replay_cells(dec: &CellDecomposition) -> Result<Presheaf> {
    let l = &dec.whole;
    let n = l.truncation();
    let (mut stage, incl) = dec.base.to_presheaf();
    // position in the current stage of each section of L
    let mut position: Vec<Vec<Option<u32>>> = l.sizes().into_iter().map(|s| vec![None; s]).collect();
    for (d, lv) in incl.levels.iter().enumerate() {
        for (i, &v) in lv.iter().enumerate() {
            position[d][v as usize] = Some(i as u32);
        }
    }
    for cell in &dec.attachments {
        let bd = boundary_subobject(l.kind(), cell.dim, n);
        let (w, i) = bd.to_presheaf();
        let levels = cell
            .attaching
            .iter()
            .enumerate()
            .map(|(d, vals)| {
                vals.iter()
                    .map(|&v| {
                        position[d][v as usize].ok_or_else(|| {
                            Error::InvariantViolation(format!(
                                "cell {} attached along {} before it exists",
                                l.name(Section::new(cell.dim, cell.section)),
                                l.name(Section::new(d, v))
                            ))
                        })
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let u = PresheafMap::new_unchecked(w, stage.clone(), levels);
        let po = pushout_named(&i, &u, |_, d, s| {
            let f = crate::shape::MorphId::new(d, cell.dim, s as usize);
            l.names(d)[l.restrict(f, cell.section) as usize].clone()
        })?;
        for d in 0..=n {
            for (k, &s) in po.new_sections[d].iter().enumerate() {
                let f = crate::shape::MorphId::new(d, cell.dim, s as usize);
                let target = l.restrict(f, cell.section);
                position[d][target as usize] = Some((stage.len(d) + k) as u32);
            }
        }
        stage = po.object;
    }
    let order = position
        .iter()
        .map(|p| p.iter().map(|v| v.expect("every section reached by the cells")).collect::<Vec<u32>>())
        .collect::<Vec<_>>();
    // order[d][i] is the stage index of L's section i
    Ok(stage.reordered(&order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::ShapeKind;

    #[test]
    fn interval_cells() {
        let l = Arc::new(Presheaf::representable(ShapeKind::Cube, 1, 2));
        let dec = cell_decomposition(&l, &Subpresheaf::empty(l.clone()));
        let dims: Vec<usize> = dec.attachments.iter().map(|a| a.dim).collect();
        assert_eq!(dims, vec![0, 0, 1]);
        assert_eq!(replay_cells(&dec).unwrap(), *l);
    }

    #[test]
    fn full_subobject_needs_no_cells() {
        let l = Arc::new(Presheaf::representable(ShapeKind::Simplex, 2, 3));
        let dec = cell_decomposition(&l, &Subpresheaf::full(l.clone()));
        assert!(dec.attachments.is_empty());
    }

    #[test]
    fn simplex_relative_to_boundary() {
        let b = boundary_subobject(ShapeKind::Simplex, 2, 3);
        let dec = cell_decomposition(&b.ambient, &b);
        assert_eq!(dec.attachments.len(), 1);
        assert_eq!(dec.attachments[0].dim, 2);
        assert_eq!(replay_cells(&dec).unwrap(), *b.ambient);
    }
}
