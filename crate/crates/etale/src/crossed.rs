//! Crossed modules of self-equivalences. For a group acting on a tree, the
//! pointed self-equivalences are the pairs (graph automorphism, group
//! automorphism) that intertwine the action; translation-by-gamma and
//! conjugation give the structure homomorphism of a crossed module.

use std::fmt;

use thiserror::Error;

use crate::equivariant::GroupAction;
use crate::group::FiniteGroup;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrossedError {
    #[error("object graph is not a tree")]
    NotATree,
    #[error("self-equivalence pairs do not close under composition")]
    NotClosed,
}

/// One violated crossed-module axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossedViolation {
    MuNotHom { a: usize, b: usize },
    ActionNotAutomorphism { s: usize },
    ActionNotAnAction { s1: usize, s2: usize },
    Equivariance { s: usize, gamma: usize },
    Peiffer { gamma: usize, gamma1: usize },
}

impl fmt::Display for CrossedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossedViolation::MuNotHom { a, b } => write!(f, "mu is not a homomorphism at ({a}, {b})"),
            CrossedViolation::ActionNotAutomorphism { s } => {
                write!(f, "element {s} does not act by an automorphism")
            }
            CrossedViolation::ActionNotAnAction { s1, s2 } => {
                write!(f, "action fails compatibility at ({s1}, {s2})")
            }
            CrossedViolation::Equivariance { s, gamma } => {
                write!(f, "equivariance fails at (s = {s}, gamma = {gamma})")
            }
            CrossedViolation::Peiffer { gamma, gamma1 } => {
                write!(f, "Peiffer identity fails at ({gamma}, {gamma1})")
            }
        }
    }
}

/// A crossed module: groups `gamma` and `s`, a homomorphism `mu` between
/// them, and an action of `s` on `gamma` by automorphisms.
#[derive(Debug, Clone)]
pub struct CrossedModule {
    pub gamma: FiniteGroup,
    pub s: FiniteGroup,
    /// `mu[g]` is the image in `s` of element `g` of `gamma`.
    pub mu: Vec<usize>,
    /// `action[s][g]` is the image of `g` under the action of `s`.
    pub action: Vec<Vec<usize>>,
}

impl CrossedModule {
    /// The classical crossed module `Ad : Gamma -> Aut(Gamma)`.
    pub fn adjoint(gamma: &FiniteGroup) -> Self {
        let (aut, autos) = gamma.automorphism_group();
        let mu = (0..gamma.order())
            .map(|g| {
                let inner = gamma.inner_automorphism(g);
                autos.iter().position(|a| *a == inner).expect("inner automorphisms are automorphisms")
            })
            .collect();
        let action = autos.clone();
        CrossedModule { gamma: gamma.clone(), s: aut, mu, action }
    }

    /// Checks the crossed-module axioms exhaustively: `mu` a homomorphism,
    /// the action by automorphisms, equivariance, and the Peiffer identity.
    pub fn validate(&self) -> Vec<CrossedViolation> {
        let mut out = Vec::new();
        let ng = self.gamma.order();
        let ns = self.s.order();
        for a in 0..ng {
            for b in 0..ng {
                if self.mu[self.gamma.mul(a, b)] != self.s.mul(self.mu[a], self.mu[b]) {
                    out.push(CrossedViolation::MuNotHom { a, b });
                }
            }
        }
        for s in 0..ns {
            let row = &self.action[s];
            let mut is_auto = row.len() == ng;
            if is_auto {
                let mut seen = vec![false; ng];
                for &y in row {
                    if y >= ng || seen[y] {
                        is_auto = false;
                        break;
                    }
                    seen[y] = true;
                }
            }
            if is_auto {
                'outer: for a in 0..ng {
                    for b in 0..ng {
                        if row[self.gamma.mul(a, b)] != self.gamma.mul(row[a], row[b]) {
                            is_auto = false;
                            break 'outer;
                        }
                    }
                }
            }
            if !is_auto {
                out.push(CrossedViolation::ActionNotAutomorphism { s });
            }
        }
        for s1 in 0..ns {
            for s2 in 0..ns {
                let prod = self.s.mul(s1, s2);
                if (0..ng).any(|g| self.action[prod][g] != self.action[s1][self.action[s2][g]]) {
                    out.push(CrossedViolation::ActionNotAnAction { s1, s2 });
                }
            }
        }
        for s in 0..ns {
            for g in 0..ng {
                // mu(s.g) = s mu(g) s^{-1}
                let lhs = self.mu[self.action[s][g]];
                let rhs = self.s.mul(self.s.mul(s, self.mu[g]), self.s.inv(s));
                if lhs != rhs {
                    out.push(CrossedViolation::Equivariance { s, gamma: g });
                }
            }
        }
        for g in 0..ng {
            for g1 in 0..ng {
                // mu(g).g1 = g g1 g^{-1}
                if self.action[self.mu[g]][g1] != self.gamma.conjugate(g, g1) {
                    out.push(CrossedViolation::Peiffer { gamma: g, gamma1: g1 });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

/// A self-equivalence pair: a graph automorphism and a group automorphism
/// intertwining the action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SelfEquivalence {
    pub f: Vec<usize>,
    pub psi: Vec<usize>,
}

/// The crossed module of pointed self-equivalences of an action on a tree:
/// `mu(gamma) = (translation by gamma, conjugation by gamma)`, with the
/// pair group acting on the group through its automorphism part.
pub fn selfequivalence_crossed_module(
    action: &GroupAction,
) -> Result<(CrossedModule, Vec<SelfEquivalence>), CrossedError> {
    if !action.graph.is_tree() {
        return Err(CrossedError::NotATree);
    }
    let graph_autos = action.graph.automorphisms();
    let group_autos = action.group.automorphisms();
    let mut pairs: Vec<SelfEquivalence> = Vec::new();
    for f in &graph_autos {
        for psi in &group_autos {
            let equivariant = (0..action.group.order()).all(|g| {
                (0..action.graph.len()).all(|x| f[action.act[g][x]] == action.act[psi[g]][f[x]])
            });
            if equivariant {
                pairs.push(SelfEquivalence { f: f.clone(), psi: psi.clone() });
            }
        }
    }
    pairs.sort();
    let index_of = |p: &SelfEquivalence| pairs.iter().position(|q| q == p);
    let n = pairs.len();
    let mut mul = vec![vec![0; n]; n];
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            let composed = SelfEquivalence {
                f: (0..action.graph.len()).map(|x| p.f[q.f[x]]).collect(),
                psi: (0..action.group.order()).map(|g| p.psi[q.psi[g]]).collect(),
            };
            mul[i][j] = index_of(&composed).ok_or(CrossedError::NotClosed)?;
        }
    }
    let labels = (0..n).map(|i| format!("se{i}")).collect();
    let s = FiniteGroup::from_table(mul, Some(labels)).map_err(|_| CrossedError::NotClosed)?;
    // identity normalization may have reordered element 0; rebuild pair list
    // to match by locating the identity pair
    let id_pair = SelfEquivalence {
        f: (0..action.graph.len()).collect(),
        psi: (0..action.group.order()).collect(),
    };
    let id_idx = index_of(&id_pair).expect("identity pair is always a self-equivalence");
    let mut ordered = pairs.clone();
    ordered.swap(0, id_idx);
    let mu = (0..action.group.order())
        .map(|g| {
            let pair = SelfEquivalence {
                f: action.act[g].clone(),
                psi: action.group.inner_automorphism(g),
            };
            ordered
                .iter()
                .position(|q| *q == pair)
                .expect("translations are self-equivalences")
        })
        .collect();
    let act = ordered.iter().map(|p| p.psi.clone()).collect();
    Ok((CrossedModule { gamma: action.group.clone(), s, mu, action: act }, ordered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ObjectGraph;

    fn a_action() -> GroupAction {
        GroupAction::new(
            FiniteGroup::cyclic(2),
            ObjectGraph::path(&["-1", "0", "1"]),
            vec![vec![0, 1, 2], vec![2, 1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn adjoint_crossed_module_is_valid() {
        for g in [FiniteGroup::cyclic(4), FiniteGroup::symmetric(3), FiniteGroup::klein()] {
            let cm = CrossedModule::adjoint(&g);
            assert!(cm.validate().is_empty());
        }
    }

    #[test]
    fn selfequivalences_of_z2_path() {
        let (cm, pairs) = selfequivalence_crossed_module(&a_action()).unwrap();
        // graph autos: id, flip; group autos: id only; both intertwine
        assert_eq!(pairs.len(), 2);
        assert!(cm.validate().is_empty());
    }

    #[test]
    fn one_object_case_reduces_to_adjoint() {
        let act = GroupAction::new(
            FiniteGroup::symmetric(3),
            ObjectGraph::point(),
            vec![vec![0]; 6],
        )
        .unwrap();
        let (cm, _) = selfequivalence_crossed_module(&act).unwrap();
        assert!(cm.validate().is_empty());
        let adj = CrossedModule::adjoint(&FiniteGroup::symmetric(3));
        assert_eq!(cm.s.order(), adj.s.order());
        assert!(cm.s.is_isomorphic(&adj.s));
    }

    #[test]
    fn trivial_group_gives_graph_automorphisms() {
        let act = GroupAction::new(
            FiniteGroup::trivial(),
            ObjectGraph::path(&["a", "b", "c"]),
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let (cm, pairs) = selfequivalence_crossed_module(&act).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(cm.validate().is_empty());
        assert!(cm.mu.iter().all(|&m| m == cm.s.identity()));
    }

    #[test]
    fn mutated_action_breaks_peiffer() {
        let (mut cm, _) = selfequivalence_crossed_module(&a_action()).unwrap();
        // corrupt the action of mu(r) so the Peiffer identity fails
        let target = cm.mu[1];
        if cm.gamma.order() > 1 {
            cm.action[target].swap(0, 1);
            let report = cm.validate();
            assert!(!report.is_empty());
        }
    }
}
