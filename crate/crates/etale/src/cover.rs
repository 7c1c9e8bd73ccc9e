//! Open covers of the object graph and localization of a groupoid over a
//! cover. Localizing replaces the objects by pairs `(piece, object)` and the
//! arrows by triples `(target piece, arrow, source piece)`; the natural
//! projection back to the original groupoid is an equivalence.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{ObjId, ObjectGraph};
use crate::groupoid::{ArrowId, FiniteGroupoid, GroupoidError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("piece {0} is empty")]
    EmptyPiece(usize),
    #[error("piece {0} is not connected in the object graph")]
    DisconnectedPiece(usize),
    #[error("piece {piece} references unknown object {object}")]
    UnknownObject { piece: usize, object: ObjId },
    #[error("objects {0:?} are not covered by any piece")]
    NotCovering(Vec<ObjId>),
    #[error("cover is over a graph with {expected} objects, groupoid has {found}")]
    WrongBase { expected: usize, found: usize },
}

/// An indexed family of connected object subsets covering the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenCover {
    n_objects: usize,
    pieces: Vec<Vec<ObjId>>,
}

impl OpenCover {
    pub fn new(graph: &ObjectGraph, pieces: Vec<Vec<ObjId>>) -> Result<Self, CoverError> {
        let mut covered = vec![false; graph.len()];
        let mut normalized = Vec::with_capacity(pieces.len());
        for (i, piece) in pieces.into_iter().enumerate() {
            let mut p = piece;
            p.sort_unstable();
            p.dedup();
            if p.is_empty() {
                return Err(CoverError::EmptyPiece(i));
            }
            if let Some(&x) = p.iter().find(|&&x| x >= graph.len()) {
                return Err(CoverError::UnknownObject { piece: i, object: x });
            }
            if !graph.is_connected_subset(&p) {
                return Err(CoverError::DisconnectedPiece(i));
            }
            for &x in &p {
                covered[x] = true;
            }
            normalized.push(p);
        }
        let missing: Vec<ObjId> = (0..graph.len()).filter(|&x| !covered[x]).collect();
        if !missing.is_empty() {
            return Err(CoverError::NotCovering(missing));
        }
        Ok(OpenCover { n_objects: graph.len(), pieces: normalized })
    }

    /// The cover by closed stars, one piece per object. This is the finest
    /// canonical cover whose pieces still carry the local edges.
    pub fn stars(graph: &ObjectGraph) -> Self {
        let pieces = (0..graph.len()).map(|x| graph.closed_star(x)).collect();
        OpenCover::new(graph, pieces).expect("closed stars always form a cover")
    }

    /// One piece per connected component.
    pub fn by_components(graph: &ObjectGraph) -> Self {
        let comp = graph.components();
        let k = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut pieces = vec![Vec::new(); k];
        for (x, &c) in comp.iter().enumerate() {
            pieces[c].push(x);
        }
        OpenCover::new(graph, pieces).expect("components always form a cover")
    }

    /// The cover by singletons.
    pub fn singletons(graph: &ObjectGraph) -> Self {
        OpenCover::new(graph, (0..graph.len()).map(|x| vec![x]).collect())
            .expect("singletons always form a cover")
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece(&self, i: usize) -> &[ObjId] {
        &self.pieces[i]
    }

    pub fn pieces(&self) -> &[Vec<ObjId>] {
        &self.pieces
    }

    pub fn contains(&self, piece: usize, x: ObjId) -> bool {
        self.pieces[piece].binary_search(&x).is_ok()
    }

    pub fn pieces_containing(&self, x: ObjId) -> impl Iterator<Item = usize> + '_ {
        (0..self.pieces.len()).filter(move |&i| self.contains(i, x))
    }
}

/// A localized groupoid together with the bookkeeping identifying its
/// objects with pairs `(piece, object)` and its arrows with triples
/// `(target piece, arrow, source piece)`.
#[derive(Debug, Clone)]
pub struct Localization {
    pub groupoid: FiniteGroupoid,
    pub cover: OpenCover,
    /// `(piece, object)` for each localized object.
    pub obj_pairs: Vec<(usize, ObjId)>,
    /// `(target piece, arrow, source piece)` for each localized arrow.
    pub arrow_triples: Vec<(usize, ArrowId, usize)>,
    obj_index: BTreeMap<(usize, ObjId), ObjId>,
    arrow_index: BTreeMap<(usize, ArrowId, usize), ArrowId>,
}

impl Localization {
    pub fn object_of(&self, piece: usize, x: ObjId) -> Option<ObjId> {
        self.obj_index.get(&(piece, x)).copied()
    }

    pub fn arrow_of(&self, tgt_piece: usize, g: ArrowId, src_piece: usize) -> Option<ArrowId> {
        self.arrow_index.get(&(tgt_piece, g, src_piece)).copied()
    }

    /// Object map of the projection homomorphism back to the base groupoid.
    pub fn proj_obj(&self) -> Vec<ObjId> {
        self.obj_pairs.iter().map(|&(_, x)| x).collect()
    }

    /// Arrow map of the projection homomorphism back to the base groupoid.
    pub fn proj_arrow(&self) -> Vec<ArrowId> {
        self.arrow_triples.iter().map(|&(_, g, _)| g).collect()
    }
}

/// Localizes `g` over the cover `u`.
pub fn localize(g: &FiniteGroupoid, u: &OpenCover) -> Result<Localization, CoverError> {
    if u.n_objects != g.object_count() {
        return Err(CoverError::WrongBase { expected: u.n_objects, found: g.object_count() });
    }
    let mut obj_pairs = Vec::new();
    let mut obj_index = BTreeMap::new();
    for i in 0..u.piece_count() {
        for &x in u.piece(i) {
            obj_index.insert((i, x), obj_pairs.len());
            obj_pairs.push((i, x));
        }
    }
    let mut base = ObjectGraph::new(
        obj_pairs
            .iter()
            .map(|&(i, x)| format!("{}:{}", i, g.base().label(x)))
            .collect(),
    )
    .expect("piece-qualified labels are unique");
    // edges only inside pieces: the localized space is the disjoint union
    for i in 0..u.piece_count() {
        let piece = u.piece(i);
        for (ai, &a) in piece.iter().enumerate() {
            for &b in piece.iter().skip(ai + 1) {
                if g.base().is_adjacent(a, b) {
                    base.add_edge(obj_index[&(i, a)], obj_index[&(i, b)]).unwrap();
                }
            }
        }
    }
    let mut arrow_triples = Vec::new();
    let mut arrow_index = BTreeMap::new();
    let mut labels = Vec::new();
    let mut sheet_keys = Vec::new();
    for a in 0..g.arrow_count() {
        for i in u.pieces_containing(g.src(a)) {
            for j in u.pieces_containing(g.tgt(a)) {
                arrow_index.insert((j, a, i), arrow_triples.len());
                arrow_triples.push((j, a, i));
                labels.push(format!("({j},{},{i})", g.arrow_label(a)));
                sheet_keys.push((g.sheet(a), i, j));
            }
        }
    }
    let src: Vec<ObjId> = arrow_triples.iter().map(|&(_, a, i)| obj_index[&(i, g.src(a))]).collect();
    let tgt: Vec<ObjId> = arrow_triples.iter().map(|&(j, a, _)| obj_index[&(j, g.tgt(a))]).collect();
    let unit: Vec<ArrowId> = obj_pairs
        .iter()
        .map(|&(i, x)| arrow_index[&(i, g.unit(x), i)])
        .collect();
    let inv: Vec<ArrowId> = arrow_triples
        .iter()
        .map(|&(j, a, i)| arrow_index[&(i, g.inv(a), j)])
        .collect();
    let mut comp = Vec::new();
    for (gi, &(k, a2, j2)) in arrow_triples.iter().enumerate() {
        for (hi, &(j1, a1, i)) in arrow_triples.iter().enumerate() {
            if j2 != j1 {
                continue;
            }
            if let Some(a21) = g.compose(a2, a1) {
                comp.push((gi, hi, arrow_index[&(k, a21, i)]));
            }
        }
        let _ = k;
    }
    // compact the (sheet, src piece, tgt piece) keys into sheet ids
    let mut sheet_map: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let mut sheets = Vec::with_capacity(sheet_keys.len());
    for key in sheet_keys {
        let next = sheet_map.len();
        sheets.push(*sheet_map.entry(key).or_insert(next));
    }
    let groupoid = FiniteGroupoid::from_parts(base, src, tgt, Some(labels), unit, inv, &comp, Some(sheets))
        .map_err(|e: GroupoidError| match e {
            GroupoidError::UnknownObject(x) => CoverError::UnknownObject { piece: 0, object: x },
            other => panic!("localization produced malformed tables: {other}"),
        })?;
    Ok(Localization { groupoid, cover: u.clone(), obj_pairs, arrow_triples, obj_index, arrow_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn point_with_two_singleton_pieces_gives_pair_groupoid() {
        let pt = FiniteGroupoid::point();
        let u = OpenCover::new(pt.base(), vec![vec![0], vec![0]]).unwrap();
        let loc = localize(&pt, &u).unwrap();
        assert_eq!(loc.groupoid.object_count(), 2);
        assert_eq!(loc.groupoid.arrow_count(), 4);
        assert!(loc.groupoid.validate().is_empty());
        assert_eq!(loc.groupoid.orbits().len(), 1);
    }

    #[test]
    fn c4_edge_cover_has_identity_overlap_arrows() {
        let c4 = fixtures::c4_trivial();
        let pieces = (0..4).map(|i| vec![i, (i + 1) % 4]).collect();
        let u = OpenCover::new(c4.base(), pieces).unwrap();
        let loc = localize(&c4, &u).unwrap();
        assert_eq!(loc.groupoid.object_count(), 8);
        // each object x is in exactly two pieces, so 2*2 triples per unit
        assert_eq!(loc.groupoid.arrow_count(), 16);
        assert!(loc.groupoid.validate().is_empty());
        assert_eq!(loc.groupoid.orbits().len(), 4);
    }

    #[test]
    fn one_piece_cover_reproduces_the_groupoid() {
        let a = fixtures::z2_path();
        let u = OpenCover::new(a.base(), vec![vec![0, 1, 2]]).unwrap();
        let loc = localize(&a, &u).unwrap();
        assert!(loc.groupoid.find_isomorphism(&a).is_some());
    }

    #[test]
    fn covers_must_cover_and_connect() {
        let a = fixtures::z2_path();
        assert!(matches!(
            OpenCover::new(a.base(), vec![vec![0, 1]]),
            Err(CoverError::NotCovering(_))
        ));
        assert!(matches!(
            OpenCover::new(a.base(), vec![vec![0, 2], vec![1]]),
            Err(CoverError::DisconnectedPiece(0))
        ));
    }

    #[test]
    fn star_cover_of_path() {
        let a = fixtures::z2_path();
        let u = OpenCover::stars(a.base());
        assert_eq!(u.pieces(), &[vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        let loc = localize(&a, &u).unwrap();
        assert!(loc.groupoid.validate().is_empty());
        assert_eq!(loc.groupoid.object_count(), 7);
    }
}
