//! Small named groupoids used throughout the test suites and docs.

use crate::graph::ObjectGraph;
use crate::group::FiniteGroup;
use crate::groupoid::FiniteGroupoid;

/// Z/2 acting on the path `-1 — 0 — 1` by negation. Objects are indexed
/// `0 = "-1"`, `1 = "0"`, `2 = "1"`; orbits are `{-1, 1}` and `{0}`.
pub fn z2_path() -> FiniteGroupoid {
    let base = ObjectGraph::path(&["-1", "0", "1"]);
    let c2 = FiniteGroup::cyclic(2);
    FiniteGroupoid::action_groupoid(&c2, base, &[vec![0, 1, 2], vec![2, 1, 0]]).unwrap()
}

/// Z/2 swapping the two ends of a single edge; connected with trivial
/// isotropy everywhere except nowhere (free action).
pub fn z2_edge() -> FiniteGroupoid {
    let base = ObjectGraph::path(&["0", "1"]);
    let c2 = FiniteGroup::cyclic(2);
    FiniteGroupoid::action_groupoid(&c2, base, &[vec![0, 1], vec![1, 0]]).unwrap()
}

/// Z/3 rotating a triangle; connected, free, 9 arrows.
pub fn z3_triangle() -> FiniteGroupoid {
    let base = ObjectGraph::cycle(3);
    let c3 = FiniteGroup::cyclic(3);
    FiniteGroupoid::action_groupoid(&c3, base, &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]])
        .unwrap()
}

/// The trivial groupoid on a 4-cycle.
pub fn c4_trivial() -> FiniteGroupoid {
    FiniteGroupoid::trivial(ObjectGraph::cycle(4))
}

/// Z/3 rotating the three leaves of a star (hub fixed). A tree with
/// nontrivial isotropy at the hub.
pub fn z3_star() -> FiniteGroupoid {
    let base = ObjectGraph::star(3);
    let c3 = FiniteGroup::cyclic(3);
    FiniteGroupoid::action_groupoid(
        &c3,
        base,
        &[vec![0, 1, 2, 3], vec![0, 2, 3, 1], vec![0, 3, 1, 2]],
    )
    .unwrap()
}

/// Z/4 rotating the four leaves of a star.
pub fn z4_star() -> FiniteGroupoid {
    let base = ObjectGraph::star(4);
    let c4 = FiniteGroup::cyclic(4);
    FiniteGroupoid::action_groupoid(
        &c4,
        base,
        &[
            vec![0, 1, 2, 3, 4],
            vec![0, 2, 3, 4, 1],
            vec![0, 3, 4, 1, 2],
            vec![0, 4, 1, 2, 3],
        ],
    )
    .unwrap()
}
