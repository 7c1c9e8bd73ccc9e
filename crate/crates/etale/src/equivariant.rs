//! The developable dictionary: for action groupoids over simply connected
//! (tree) object graphs, pointed morphisms are equivariant pairs `(f, psi)`
//! of a graph map and a group homomorphism, and the target group acts on
//! pairs by translating `f` and conjugating `psi`.

use thiserror::Error;

use crate::graph::{ObjId, ObjectGraph};
use crate::group::FiniteGroup;
use crate::groupoid::{FiniteGroupoid, GroupoidError};
use crate::hom::GroupoidHom;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivariantError {
    #[error("object graph is not a tree (simply connected model)")]
    NotATree,
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A group acting on an object graph by graph automorphisms; the data an
/// action groupoid is built from.
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub group: FiniteGroup,
    pub graph: ObjectGraph,
    /// `act[g][x]` is the image of object `x` under group element `g`.
    pub act: Vec<Vec<ObjId>>,
}

impl GroupAction {
    pub fn new(
        group: FiniteGroup,
        graph: ObjectGraph,
        act: Vec<Vec<ObjId>>,
    ) -> Result<Self, GroupoidError> {
        // action groupoid construction performs the full validation
        FiniteGroupoid::action_groupoid(&group, graph.clone(), &act)?;
        Ok(GroupAction { group, graph, act })
    }

    pub fn to_groupoid(&self) -> FiniteGroupoid {
        FiniteGroupoid::action_groupoid(&self.group, self.graph.clone(), &self.act)
            .expect("validated at construction")
    }

    /// Arrow id of `(g, x)` in the action groupoid: `g * |X| + x`.
    pub fn arrow_id(&self, g: usize, x: ObjId) -> usize {
        g * self.graph.len() + x
    }
}

/// An equivariant pair: object map `f` and group homomorphism `psi` with
/// `f(g.x) = psi(g).f(x)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EquivariantPair {
    pub f: Vec<ObjId>,
    pub psi: Vec<usize>,
}

/// First reason a candidate pair fails, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairViolation {
    PsiNotHom { a: usize, b: usize },
    NotGraphMap { edge: (ObjId, ObjId) },
    NotEquivariant { g: usize, x: ObjId },
}

/// Checks a pair against a source and target action; `Ok(())` means the
/// pair is equivariant and edge-preserving.
pub fn check_equivariant_pair(
    pair: &EquivariantPair,
    source: &GroupAction,
    target: &GroupAction,
) -> Result<(), PairViolation> {
    for a in 0..source.group.order() {
        for b in 0..source.group.order() {
            if pair.psi[source.group.mul(a, b)]
                != target.group.mul(pair.psi[a], pair.psi[b])
            {
                return Err(PairViolation::PsiNotHom { a, b });
            }
        }
    }
    for (x, y) in source.graph.edges() {
        if !target.graph.is_close(pair.f[x], pair.f[y]) {
            return Err(PairViolation::NotGraphMap { edge: (x, y) });
        }
    }
    for g in 0..source.group.order() {
        for x in 0..source.graph.len() {
            if pair.f[source.act[g][x]] != target.act[pair.psi[g]][pair.f[x]] {
                return Err(PairViolation::NotEquivariant { g, x });
            }
        }
    }
    Ok(())
}

/// All equivariant pairs from `source` to `target`, in `(psi, f)`
/// lexicographic order. Requires the source graph to be a tree.
pub fn enumerate_equivariant_pairs(
    source: &GroupAction,
    target: &GroupAction,
) -> Result<Vec<EquivariantPair>, EquivariantError> {
    if !source.graph.is_tree() {
        return Err(EquivariantError::NotATree);
    }
    let psis = source.group.homomorphisms(&target.group);
    let fs = source.graph.graph_maps(&target.graph);
    let mut out = Vec::new();
    for psi in &psis {
        for f in &fs {
            let pair = EquivariantPair { f: f.clone(), psi: psi.clone() };
            if check_equivariant_pair(&pair, source, target).is_ok() {
                out.push(pair);
            }
        }
    }
    Ok(out)
}

/// The target-group action on pairs: translate `f`, conjugate `psi`.
pub fn act_on_pair(gp: usize, pair: &EquivariantPair, target: &GroupAction) -> EquivariantPair {
    EquivariantPair {
        f: pair.f.iter().map(|&y| target.act[gp][y]).collect(),
        psi: pair.psi.iter().map(|&h| target.group.conjugate(gp, h)).collect(),
    }
}

/// Orbits of the pair action, blocks sorted by least pair.
pub fn pair_orbits(
    pairs: &[EquivariantPair],
    target: &GroupAction,
) -> Vec<Vec<usize>> {
    let index_of = |p: &EquivariantPair| pairs.iter().position(|q| q == p);
    let mut seen = vec![false; pairs.len()];
    let mut orbits = Vec::new();
    for i in 0..pairs.len() {
        if seen[i] {
            continue;
        }
        let mut block = Vec::new();
        for gp in 0..target.group.order() {
            let moved = act_on_pair(gp, &pairs[i], target);
            let j = index_of(&moved).expect("pair set is closed under the action");
            if !seen[j] {
                seen[j] = true;
                block.push(j);
            }
        }
        block.sort_unstable();
        orbits.push(block);
    }
    orbits
}

/// The homomorphism of action groupoids induced by a pair:
/// `(g, x) -> (psi(g), f(x))`.
pub fn pair_to_hom(
    pair: &EquivariantPair,
    source: &GroupAction,
    target: &GroupAction,
) -> GroupoidHom {
    let nx = source.graph.len();
    let nxp = target.graph.len();
    let mut arrow_map = Vec::with_capacity(source.group.order() * nx);
    for g in 0..source.group.order() {
        for x in 0..nx {
            arrow_map.push(pair.psi[g] * nxp + pair.f[x]);
        }
    }
    GroupoidHom { obj_map: pair.f.clone(), arrow_map }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn a_action() -> GroupAction {
        GroupAction::new(
            FiniteGroup::cyclic(2),
            ObjectGraph::path(&["-1", "0", "1"]),
            vec![vec![0, 1, 2], vec![2, 1, 0]],
        )
        .unwrap()
    }

    fn pt_action() -> GroupAction {
        GroupAction::new(FiniteGroup::trivial(), ObjectGraph::point(), vec![vec![0]]).unwrap()
    }

    #[test]
    fn identity_pair_checks() {
        let a = a_action();
        let pair = EquivariantPair { f: vec![0, 1, 2], psi: vec![0, 1] };
        assert_eq!(check_equivariant_pair(&pair, &a, &a), Ok(()));
    }

    #[test]
    fn constant_at_fixed_point_checks() {
        let a = a_action();
        // f constant at "0" (object index 1), psi trivial
        let pair = EquivariantPair { f: vec![1, 1, 1], psi: vec![0, 0] };
        assert_eq!(check_equivariant_pair(&pair, &a, &a), Ok(()));
    }

    #[test]
    fn constant_at_moving_point_fails_equivariance() {
        let a = a_action();
        // f constant at "1" (object index 2), psi = identity hom
        let pair = EquivariantPair { f: vec![2, 2, 2], psi: vec![0, 1] };
        let err = check_equivariant_pair(&pair, &a, &a).unwrap_err();
        assert!(matches!(err, PairViolation::NotEquivariant { g: 1, .. }));
    }

    #[test]
    fn pair_count_on_z2_path_is_ten() {
        let a = a_action();
        let pairs = enumerate_equivariant_pairs(&a, &a).unwrap();
        assert_eq!(pairs.len(), 10);
    }

    #[test]
    fn point_source_counts_objects() {
        let pt = pt_action();
        let a = a_action();
        let pairs = enumerate_equivariant_pairs(&pt, &a).unwrap();
        assert_eq!(pairs.len(), 3);
        let back = enumerate_equivariant_pairs(&a, &pt).unwrap();
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn action_law_holds_exhaustively() {
        let a = a_action();
        let pairs = enumerate_equivariant_pairs(&a, &a).unwrap();
        for p in &pairs {
            assert_eq!(act_on_pair(0, p, &a), p.clone());
            for g1 in 0..2 {
                for g2 in 0..2 {
                    let lhs = act_on_pair(g1, &act_on_pair(g2, p, &a), &a);
                    let rhs = act_on_pair(a.group.mul(g1, g2), p, &a);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn pair_hom_is_functorial_and_continuous() {
        let a = a_action();
        let groupoid = fixtures::z2_path();
        let pairs = enumerate_equivariant_pairs(&a, &a).unwrap();
        for p in &pairs {
            let hom = pair_to_hom(p, &a, &a);
            assert!(hom.validate(&groupoid, &groupoid).is_ok());
            assert!(hom.is_continuous(&groupoid, &groupoid));
        }
    }

    #[test]
    fn cycle_source_is_rejected() {
        let tri = GroupAction::new(
            FiniteGroup::cyclic(3),
            ObjectGraph::cycle(3),
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
        )
        .unwrap();
        assert_eq!(
            enumerate_equivariant_pairs(&tri, &tri).unwrap_err(),
            EquivariantError::NotATree
        );
    }
}
