//! Bundles presented by cocycles: a homomorphism out of a localization,
//! together with a distinguished piece and basepoint decoration, determines
//! a pointed bundle by gluing trivial pieces along the overlap transitions.
//! Conversely a global section of a bundle recovers a presenting
//! homomorphism.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bundle::{Bundle, BundleError, PointedBundle, UnionFind};
use crate::cover::Localization;
use crate::graph::ObjId;
use crate::groupoid::{ArrowId, FiniteGroupoid};
use crate::hom::{GroupoidHom, HomError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CocycleError {
    #[error("star object {star} is not in piece {piece}")]
    StarNotInPiece { star: ObjId, piece: usize },
    #[error("basepoint decoration has source {found}, expected {expected}")]
    DeltaSource { expected: ObjId, found: ObjId },
    #[error("cocycle is not functorial: {0}")]
    NotFunctorial(HomError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// A pointed cocycle: a homomorphism from a localized groupoid into the
/// target, a piece containing the star, and an arrow decorating the
/// basepoint. The basepoint element of the glued bundle is the class of
/// `(base_piece, delta, star)`; the canonical choice of `delta` is the unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedCocycle {
    pub hom: GroupoidHom,
    pub base_piece: usize,
    pub star: ObjId,
    pub delta: ArrowId,
}

impl PointedCocycle {
    /// Pointed cocycle with the canonical unit decoration.
    pub fn unit_pointed(
        loc: &Localization,
        gp: &FiniteGroupoid,
        hom: GroupoidHom,
        base_piece: usize,
        star: ObjId,
    ) -> Self {
        let obj = loc
            .object_of(base_piece, star)
            .expect("star must lie in the base piece");
        let delta = gp.unit(hom.obj(obj));
        PointedCocycle { hom, base_piece, star, delta }
    }

    /// Target object of the basepoint: `tgt(delta)`.
    pub fn anchor(&self, gp: &FiniteGroupoid) -> ObjId {
        gp.tgt(self.delta)
    }

    /// Object image under the cocycle at `(piece, x)`.
    pub fn obj_at(&self, loc: &Localization, piece: usize, x: ObjId) -> Option<ObjId> {
        loc.object_of(piece, x).map(|o| self.hom.obj(o))
    }

    /// Arrow image of the localized triple `(tgt_piece, g, src_piece)`.
    pub fn arrow_at(
        &self,
        loc: &Localization,
        tgt_piece: usize,
        g: ArrowId,
        src_piece: usize,
    ) -> Option<ArrowId> {
        loc.arrow_of(tgt_piece, g, src_piece).map(|a| self.hom.arrow(a))
    }
}

/// Identification of glued-bundle elements with their presenting triples.
#[derive(Debug, Clone)]
pub struct CocycleBundleMap {
    /// Element index of every triple `(piece, arrow of target, object)`.
    pub element_of: BTreeMap<(usize, ArrowId, ObjId), usize>,
    /// Canonical (least) triple of each element.
    pub triple_of: Vec<(usize, ArrowId, ObjId)>,
}

impl CocycleBundleMap {
    /// The canonical local section of the glued bundle over `(piece, x)`:
    /// the class of the unit-decorated triple.
    pub fn section(
        &self,
        cocycle: &PointedCocycle,
        loc: &Localization,
        gp: &FiniteGroupoid,
        piece: usize,
        x: ObjId,
    ) -> Option<usize> {
        let y = cocycle.obj_at(loc, piece, x)?;
        self.element_of.get(&(piece, gp.unit(y), x)).copied()
    }
}

/// Glues the `(G', G)`-bundle presented by a pointed cocycle over a
/// localization of `g`.
pub fn bundle_from_cocycle(
    g: &FiniteGroupoid,
    loc: &Localization,
    gp: &FiniteGroupoid,
    cocycle: &PointedCocycle,
) -> Result<(PointedBundle, CocycleBundleMap), CocycleError> {
    let u = &loc.cover;
    if !u.contains(cocycle.base_piece, cocycle.star) {
        return Err(CocycleError::StarNotInPiece {
            star: cocycle.star,
            piece: cocycle.base_piece,
        });
    }
    cocycle
        .hom
        .validate(&loc.groupoid, gp)
        .map_err(CocycleError::NotFunctorial)?;
    let base_obj = cocycle.obj_at(loc, cocycle.base_piece, cocycle.star).unwrap();
    if gp.src(cocycle.delta) != base_obj {
        return Err(CocycleError::DeltaSource {
            expected: base_obj,
            found: gp.src(cocycle.delta),
        });
    }

    // triples (piece, g', x) with src(g') = obj image of (piece, x)
    let mut triples = Vec::new();
    let mut triple_index = BTreeMap::new();
    for i in 0..u.piece_count() {
        for &x in u.piece(i) {
            let y = cocycle.obj_at(loc, i, x).unwrap();
            for a in 0..gp.arrow_count() {
                if gp.src(a) == y {
                    triple_index.insert((i, a, x), triples.len());
                    triples.push((i, a, x));
                }
            }
        }
    }
    // glue over overlaps: (j, a, x) ~ (i, a . phi(j, 1_x, i), x)
    let mut uf = UnionFind::new(triples.len());
    for x in 0..g.object_count() {
        let pieces: Vec<usize> = u.pieces_containing(x).collect();
        for &i in &pieces {
            for &j in &pieces {
                if i == j {
                    continue;
                }
                let trans = cocycle.arrow_at(loc, j, g.unit(x), i).unwrap();
                for a in 0..gp.arrow_count() {
                    if gp.src(a) != cocycle.obj_at(loc, j, x).unwrap() {
                        continue;
                    }
                    let glued = gp.compose(a, trans).expect("transition endpoints line up");
                    uf.union(triple_index[&(j, a, x)], triple_index[&(i, glued, x)]);
                }
            }
        }
    }
    let mut class_of = vec![usize::MAX; triples.len()];
    let mut reps = Vec::new();
    for t in 0..triples.len() {
        let r = uf.find(t);
        if class_of[r] == usize::MAX {
            class_of[r] = reps.len();
            reps.push(r);
        }
        class_of[t] = class_of[r];
    }
    let s: Vec<ObjId> = reps.iter().map(|&r| triples[r].2).collect();
    let t: Vec<ObjId> = reps.iter().map(|&r| gp.tgt(triples[r].1)).collect();
    let labels = reps
        .iter()
        .map(|&r| {
            let (i, a, x) = triples[r];
            format!("[{i};{};{}]", gp.arrow_label(a), g.base().label(x))
        })
        .collect();
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    for (ci, &r) in reps.iter().enumerate() {
        let (i, a, x) = triples[r];
        for a1 in 0..gp.arrow_count() {
            if gp.src(a1) == gp.tgt(a) {
                let c = gp.compose(a1, a).unwrap();
                left.insert((a1, ci), class_of[triple_index[&(i, c, x)]]);
            }
        }
        for b in 0..g.arrow_count() {
            if g.tgt(b) != x {
                continue;
            }
            let y = g.src(b);
            let j = u.pieces_containing(y).next().expect("cover covers every object");
            let trans = cocycle.arrow_at(loc, i, b, j).unwrap();
            let c = gp.compose(a, trans).expect("cocycle endpoints line up");
            right.insert((ci, b), class_of[triple_index[&(j, c, y)]]);
        }
    }
    let bundle = Bundle::new(s, t, left, right, Some(labels));
    let map = CocycleBundleMap {
        element_of: triple_index
            .iter()
            .map(|(&k, &v)| (k, class_of[v]))
            .collect(),
        triple_of: reps.iter().map(|&r| triples[r]).collect(),
    };
    let basepoint = map.element_of[&(cocycle.base_piece, cocycle.delta, cocycle.star)];
    let pointed = PointedBundle::new(bundle, basepoint, cocycle.star)?;
    Ok((pointed, map))
}

/// Recovers the presenting homomorphism of a bundle from a global section:
/// `phi(g)` is the unique target arrow with `sigma(tgt g) . g = phi(g) .
/// sigma(src g)`.
pub fn hom_from_section(
    e: &Bundle,
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    sigma: &[usize],
) -> Result<GroupoidHom, BundleError> {
    if sigma.len() != g.object_count() {
        return Err(BundleError::NotASection(sigma.len().min(g.object_count())));
    }
    for (x, &el) in sigma.iter().enumerate() {
        if el >= e.len() {
            return Err(BundleError::ElementOutOfRange(el));
        }
        if e.s(el) != x {
            return Err(BundleError::NotASection(x));
        }
    }
    let obj_map: Vec<ObjId> = sigma.iter().map(|&el| e.t(el)).collect();
    let mut arrow_map = Vec::with_capacity(g.arrow_count());
    for a in 0..g.arrow_count() {
        let lhs = e
            .right_act(sigma[g.tgt(a)], a)
            .ok_or_else(|| BundleError::NoHomOnSection(format!("section does not absorb arrow {a}")))?;
        let sx = sigma[g.src(a)];
        let image = (0..gp.arrow_count())
            .find(|&v| gp.src(v) == e.t(sx) && e.left_act(v, sx) == Some(lhs))
            .ok_or_else(|| {
                BundleError::NoHomOnSection(format!("defining identity unsolvable at arrow {a}"))
            })?;
        arrow_map.push(image);
    }
    Ok(GroupoidHom { obj_map, arrow_map })
}
