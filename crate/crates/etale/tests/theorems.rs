//! Cross-module identities: bundle composition is functorial in cocycles,
//! bibundles invert against themselves, the exponential evaluation reduces
//! to the developable dictionary, and the morphism groupoid of developable
//! data is the action groupoid on equivariant pairs.

use etale::bundle::{compose_bundles, Bundle, PointedBundle};
use etale::cocycle::{bundle_from_cocycle, PointedCocycle};
use etale::cover::{localize, OpenCover};
use etale::equivariant::{
    act_on_pair, enumerate_equivariant_pairs, pair_orbits, pair_to_hom, GroupAction,
};
use etale::fixtures;
use etale::graph::ObjectGraph;
use etale::group::FiniteGroup;
use etale::groupoid::FiniteGroupoid;
use etale::hom::GroupoidHom;
use etale::morphism::{pointed_isomorphism, MorphismSpace, PointedIsoOutcome};

fn edge_action() -> GroupAction {
    GroupAction::new(
        FiniteGroup::cyclic(2),
        ObjectGraph::path(&["0", "1"]),
        vec![vec![0, 1], vec![1, 0]],
    )
    .unwrap()
}

fn a_action() -> GroupAction {
    GroupAction::new(
        FiniteGroup::cyclic(2),
        ObjectGraph::path(&["-1", "0", "1"]),
        vec![vec![0, 1, 2], vec![2, 1, 0]],
    )
    .unwrap()
}

/// Bundle of a plain homomorphism over the components cover, pointed at the
/// star.
fn bundle_of_hom(
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    hom: &GroupoidHom,
    star: usize,
) -> PointedBundle {
    let loc = localize(g, &OpenCover::by_components(g.base())).unwrap();
    let lifted = GroupoidHom::from_localization(&loc).then(hom);
    let piece = loc.cover.pieces_containing(star).next().unwrap();
    let c = PointedCocycle::unit_pointed(&loc, gp, lifted, piece, star);
    bundle_from_cocycle(g, &loc, gp, &c).unwrap().0
}

/// The swap automorphism of the edge groupoid.
fn swap_hom() -> GroupoidHom {
    GroupoidHom {
        obj_map: vec![1, 0],
        arrow_map: vec![1, 0, 3, 2],
    }
}

#[test]
fn composite_of_cocycle_bundles_is_the_composite_cocycle() {
    let g = fixtures::z2_edge();
    let id = GroupoidHom::identity(&g);
    let swap = swap_hom();
    assert!(swap.validate(&g, &g).is_ok());
    let e_id = bundle_of_hom(&g, &g, &id, 0);
    let e_swap = bundle_of_hom(&g, &g, &swap, 0);
    let composite = compose_bundles(&e_swap.bundle, &e_id.bundle, &g, &g, &g).unwrap();
    assert!(composite.validate(&g, &g).is_empty());
    // E_swap o E_id is pointed isomorphic to E_{swap o id} = E_swap
    let pointed = PointedBundle::new(
        composite.clone(),
        (0..composite.len())
            .find(|&e| composite.s(e) == 0 && composite.t(e) == e_swap.anchor())
            .unwrap(),
        0,
    )
    .unwrap();
    // propagation needs equal anchors; pick the composite basepoint matching
    let expected = bundle_of_hom(&g, &g, &swap, 0);
    let outcome = pointed_isomorphism(&pointed, &expected, &g, &g, None).unwrap();
    // the chosen basepoint may differ from the canonical one by a loop;
    // since the action is free there is only one element with the anchor,
    // so the iso must exist
    assert!(matches!(outcome, PointedIsoOutcome::Iso(_)), "{outcome:?}");
}

#[test]
fn unit_bundle_is_a_two_sided_identity() {
    let g = fixtures::z2_edge();
    let id = GroupoidHom::identity(&g);
    let e = bundle_of_hom(&g, &g, &id, 0);
    let unit = Bundle::unit(&g);
    let left = compose_bundles(&e.bundle, &unit, &g, &g, &g).unwrap();
    let right = compose_bundles(&unit, &e.bundle, &g, &g, &g).unwrap();
    for c in [left, right] {
        assert!(c.validate(&g, &g).is_empty());
        assert_eq!(c.len(), e.bundle.len());
    }
}

#[test]
fn bibundle_times_inverse_is_the_unit_bundle() {
    let g = fixtures::z2_edge();
    let swap = swap_hom();
    let e = bundle_of_hom(&g, &g, &swap, 0);
    let inv = e.bundle.invert(&g, &g).expect("automorphism bundles are bibundles");
    assert!(inv.validate(&g, &g).is_empty());
    let product = compose_bundles(&e.bundle, &inv, &g, &g, &g).unwrap();
    assert!(product.validate(&g, &g).is_empty());
    let unit = Bundle::unit(&g);
    assert_eq!(product.len(), unit.len());
    // pointed comparison at star 0 with matching anchors
    let pb = |b: &Bundle| {
        let e0 = (0..b.len()).find(|&e| b.s(e) == 0 && b.t(e) == 0).unwrap();
        PointedBundle::new(b.clone(), e0, 0).unwrap()
    };
    let outcome = pointed_isomorphism(&pb(&product), &pb(&unit), &g, &g, None).unwrap();
    assert!(matches!(outcome, PointedIsoOutcome::Iso(_)));
}

#[test]
fn composition_is_associative_up_to_pointed_iso() {
    let g = fixtures::z2_edge();
    let id = GroupoidHom::identity(&g);
    let swap = swap_hom();
    let e1 = bundle_of_hom(&g, &g, &id, 0).bundle;
    let e2 = bundle_of_hom(&g, &g, &swap, 0).bundle;
    let e3 = bundle_of_hom(&g, &g, &swap, 0).bundle;
    let left = compose_bundles(
        &compose_bundles(&e3, &e2, &g, &g, &g).unwrap(),
        &e1,
        &g,
        &g,
        &g,
    )
    .unwrap();
    let right = compose_bundles(
        &e3,
        &compose_bundles(&e2, &e1, &g, &g, &g).unwrap(),
        &g,
        &g,
        &g,
    )
    .unwrap();
    assert_eq!(left.len(), right.len());
    let pb = |b: &Bundle| {
        let e0 = (0..b.len()).find(|&e| b.s(e) == 0).unwrap();
        PointedBundle::new(b.clone(), e0, 0).unwrap()
    };
    let (p, q) = (pb(&left), pb(&right));
    if p.anchor() == q.anchor() {
        let outcome = pointed_isomorphism(&p, &q, &g, &g, None).unwrap();
        assert!(matches!(outcome, PointedIsoOutcome::Iso(_)));
    } else {
        // realign the basepoint of the right composite to the same anchor
        let e0 = (0..right.len())
            .find(|&e| right.s(e) == 0 && right.t(e) == p.anchor())
            .unwrap();
        let q = PointedBundle::new(right.clone(), e0, 0).unwrap();
        let outcome = pointed_isomorphism(&p, &q, &g, &g, None).unwrap();
        assert!(matches!(outcome, PointedIsoOutcome::Iso(_)));
    }
}

/// The double cover of the 4-cycle glued from a cocycle with one nontrivial
/// transition: sixteen triples collapse to eight elements.
#[test]
fn c4_cocycle_with_one_twist_glues_to_the_double_cover() {
    let c4 = fixtures::c4_trivial();
    let a = fixtures::z2_path();
    let pieces: Vec<Vec<usize>> = (0..4).map(|i| vec![i, (i + 1) % 4]).collect();
    let cover = OpenCover::new(c4.base(), pieces).unwrap();
    let loc = localize(&c4, &cover).unwrap();
    // cocycle into A: every object maps to the fixed object "0" (index 1),
    // transitions are loops there; exactly one transition is the flip
    let iso_loop = |flip: bool| -> usize {
        // arrows of A at object 1: (e,0) has id 1, (r1,0) has id 3+1=4
        if flip {
            4
        } else {
            1
        }
    };
    let obj_map = vec![1; loc.groupoid.object_count()];
    let mut arrow_map = Vec::with_capacity(loc.groupoid.arrow_count());
    for &(j, unit_arrow, i) in &loc.arrow_triples {
        // triple (j, 1_x, i): the transition from piece i to piece j at x;
        // make the overlap of pieces 3 and 0 (at object 0) the flip
        let x = c4.src(unit_arrow);
        let flip = x == 0 && ((i == 3 && j == 0) || (i == 0 && j == 3));
        arrow_map.push(iso_loop(flip));
    }
    let hom = GroupoidHom { obj_map, arrow_map };
    assert!(hom.validate(&loc.groupoid, &a).is_ok());
    let cocycle = PointedCocycle::unit_pointed(&loc, &a, hom, 0, 0);
    let (p, _) = bundle_from_cocycle(&c4, &loc, &a, &cocycle).unwrap();
    assert_eq!(p.bundle.len(), 8, "sixteen triples glue to eight elements");
    assert!(p.bundle.validate(&c4, &a).is_empty());
}

#[test]
fn collapsing_bundle_is_not_invertible() {
    // the constant homomorphism onto the point groupoid loses the right
    // principality needed for an inverse
    let a = fixtures::z2_path();
    let pt = FiniteGroupoid::point();
    let constant = GroupoidHom { obj_map: vec![0; 3], arrow_map: vec![0; 6] };
    assert!(constant.validate(&a, &pt).is_ok());
    let e = bundle_of_hom(&a, &pt, &constant, 0);
    assert!(e.bundle.validate(&a, &pt).is_empty());
    assert_eq!(e.bundle.len(), 3);
    assert!(e.bundle.invert(&a, &pt).is_none());
}

#[test]
fn conjugation_transformation_is_found_on_a_group() {
    // one-object groupoid on S3: the identity and an inner automorphism
    // differ by the natural transformation whose component conjugates
    let s3 = FiniteGroup::symmetric(3);
    let g = FiniteGroupoid::from_group(&s3);
    let id = GroupoidHom::identity(&g);
    let conj_by = 1usize; // any non-central element
    let inner = GroupoidHom {
        obj_map: vec![0],
        arrow_map: (0..6).map(|x| s3.conjugate(conj_by, x)).collect(),
    };
    assert!(inner.validate(&g, &g).is_ok());
    let t = etale::hom::find_natural_transformation(&g, &g, &id, &inner)
        .expect("inner automorphisms are naturally trivial");
    assert!(t.validate(&g, &g, &id, &inner));
    // the component must conjugate id into inner: h x h^-1 = conj(x), so h
    // lies in the coset of the conjugator modulo the (trivial) center
    assert_eq!(t.component[0], conj_by);
}

#[test]
fn exponential_evaluation_is_the_developable_formula() {
    let src = a_action();
    let dst = a_action();
    let g = src.to_groupoid();
    let gp = dst.to_groupoid();
    let star = 2;
    let pairs = enumerate_equivariant_pairs(&src, &dst).unwrap();
    let loc = localize(&g, &OpenCover::stars(g.base())).unwrap();
    let proj = GroupoidHom::from_localization(&loc);
    let homs: Vec<GroupoidHom> = pairs
        .iter()
        .map(|p| proj.then(&pair_to_hom(p, &src, &dst)))
        .collect();
    let space = MorphismSpace::from_cocycles(&g, &gp, star, homs).unwrap();
    let nxp = dst.graph.len();
    for (zi, pair) in pairs.iter().enumerate() {
        let anchor = pair.f[star];
        for gamma_pp in 0..dst.group.order() {
            // the acting arrow (gamma'', anchor): anchor -> gamma''.anchor
            let gpp_arrow = dst.arrow_id(gamma_pp, anchor);
            for gamma in 0..src.group.order() {
                for x in 0..src.graph.len() {
                    let b = src.arrow_id(gamma, x);
                    let (z2, value) = space
                        .exp_morphism_eval(&g, &gp, gpp_arrow, zi, b)
                        .expect("evaluation defined on developable data");
                    // expected: (gamma'' psi(gamma), f(x))
                    let expected_arrow =
                        dst.group.mul(gamma_pp, pair.psi[gamma]) * nxp + pair.f[x];
                    assert_eq!(value, expected_arrow, "value at pair {zi}");
                    // the target class is the acted pair
                    let moved = act_on_pair(gamma_pp, pair, &dst);
                    let moved_idx = pairs.iter().position(|q| *q == moved).unwrap();
                    assert_eq!(z2, moved_idx, "target class at pair {zi}");
                }
            }
        }
    }
}

#[test]
fn exp_identity_arrows_fix_elements() {
    let g = fixtures::z2_edge();
    let gp = fixtures::z2_edge();
    let space = MorphismSpace::enumerate(&g, &gp, 0, 10_000_000).unwrap();
    for z in 0..space.len() {
        let anchor = space.classes[z].anchor;
        let unit_arrow = gp.unit(anchor);
        let bundle = &space.classes[z].bundle.bundle;
        for e in 0..bundle.len() {
            let x = bundle.s(e);
            let unit_b = g.unit(x);
            let (z1, e1) = space
                .exp_act(&g, &gp, None, z, e, unit_arrow, z, unit_b)
                .expect("identity action defined");
            assert_eq!((z1, e1), (z, e));
        }
    }
}

#[test]
fn exp_action_is_compatible_with_composition() {
    let g = fixtures::z2_edge();
    let gp = fixtures::z2_edge();
    let space = MorphismSpace::enumerate(&g, &gp, 0, 10_000_000).unwrap();
    let (mor, mor_arrows) = space.morphism_groupoid(&g, &gp);
    // right action along composable morphism-groupoid arrows times source
    // arrows: acting twice equals acting by the composite
    for (i1, &(a1, z1)) in mor_arrows.iter().enumerate() {
        for (i2, &(a2, z2)) in mor_arrows.iter().enumerate() {
            // arrow i1: z1 -> t1; demand t1 = resolve, chain i2: z2 -> z1
            if mor.tgt(i2) != z1 {
                continue;
            }
            let t1 = mor.tgt(i1);
            for b1 in 0..g.arrow_count() {
                for b2 in 0..g.arrow_count() {
                    let Some(b12) = g.compose(b1, b2) else { continue };
                    let bundle = &space.classes[t1].bundle.bundle;
                    for e in 0..bundle.len() {
                        // e over tgt(b1) so that e.(a1, b1) is defined
                        if bundle.s(e) != g.tgt(b1) {
                            continue;
                        }
                        let step1 = space.exp_act(&g, &gp, None, t1, e, a1, z1, b1);
                        let Some((w1, e1)) = step1 else { continue };
                        assert_eq!(w1, z1);
                        let step2 = space.exp_act(&g, &gp, None, z1, e1, a2, z2, b2);
                        let Some((w2, e2)) = step2 else { continue };
                        assert_eq!(w2, z2);
                        // composite morphism-groupoid arrow: i1 o i2
                        let Some(c) = mor.compose(i1, i2) else { continue };
                        let (ac, zc) = mor_arrows[c];
                        assert_eq!(zc, z2);
                        let direct = space
                            .exp_act(&g, &gp, None, t1, e, ac, zc, b12)
                            .expect("composite action defined");
                        assert_eq!(direct, (z2, e2), "associativity of the action");
                    }
                }
            }
        }
    }
}

/// Pointed morphisms from the cycle groupoid into a one-object group
/// groupoid are monodromies: one class per group element, and the orbits of
/// the morphism groupoid are the conjugacy classes. This is the discrete
/// shadow of the twisted-loop picture.
#[test]
fn circle_classes_are_monodromies() {
    let c4 = fixtures::c4_trivial();
    for (group, conj_classes) in [
        (FiniteGroup::cyclic(2), 2usize),
        (FiniteGroup::cyclic(3), 3),
        (FiniteGroup::symmetric(3), 3),
    ] {
        let bg = FiniteGroupoid::from_group(&group);
        let space = MorphismSpace::enumerate(&c4, &bg, 0, 50_000_000).unwrap();
        assert_eq!(
            space.len(),
            group.order(),
            "one pointed class per monodromy element of {:?}",
            group.order()
        );
        let (mor, _) = space.morphism_groupoid(&c4, &bg);
        assert!(mor.validate().is_empty());
        assert_eq!(
            mor.orbits().len(),
            conj_classes,
            "unpointed classes are conjugacy classes"
        );
    }
}

/// On a tree base the same game collapses: every cocycle into a group
/// groupoid is gauge-trivial, so there is exactly one class.
#[test]
fn tree_base_has_trivial_monodromy() {
    let path = FiniteGroupoid::trivial(ObjectGraph::path(&["a", "b", "c", "d"]));
    for group in [FiniteGroup::cyclic(2), FiniteGroup::symmetric(3)] {
        let bg = FiniteGroupoid::from_group(&group);
        let space = MorphismSpace::enumerate(&path, &bg, 0, 50_000_000).unwrap();
        assert_eq!(space.len(), 1);
    }
}

/// The load-bearing distinction: two cocycles on the sign-action path that
/// differ only at the fixed object are related by a pointed natural
/// transformation that jumps sheets mid-edge. As bare bundles they are
/// pointed isomorphic; as morphism classes they stay distinct.
#[test]
fn discontinuous_identifications_are_refused() {
    let src = a_action();
    let g = src.to_groupoid();
    let star = 2;
    // pairs with psi trivial, f(-1) = f(1) = "0", f(0) = "1" resp. "-1"
    let f1 = vec![1usize, 2, 1];
    let f2 = vec![1usize, 0, 1];
    let pair1 = etale::equivariant::EquivariantPair { f: f1, psi: vec![0, 0] };
    let pair2 = etale::equivariant::EquivariantPair { f: f2, psi: vec![0, 0] };
    let hom1 = pair_to_hom(&pair1, &src, &src);
    let hom2 = pair_to_hom(&pair2, &src, &src);
    assert!(hom1.validate(&g, &g).is_ok());
    assert!(hom2.validate(&g, &g).is_ok());

    // a pointed (unit component at the star) natural transformation exists
    // at the level of bare functors
    let mut found_pointed_transformation = false;
    let n = g.arrow_count();
    // pointedness: the component at the star is the unit at the shared
    // anchor f(star)
    let star_component = g.unit(pair1.f[star]);
    'outer: for h0 in 0..n {
        for h1 in 0..n {
            let t = etale::hom::NaturalTransformation {
                component: vec![h0, h1, star_component],
            };
            if t.validate(&g, &g, &hom1, &hom2) {
                found_pointed_transformation = true;
                // it cannot be continuous: some edge must jump sheets
                assert!(!t.is_continuous(&g, &g));
                break 'outer;
            }
        }
    }
    assert!(found_pointed_transformation, "bare bundles are pointed isomorphic");

    // the continuity-aware classes are distinct
    let space = MorphismSpace::enumerate(&g, &g, star, 50_000_000).unwrap();
    let proj = GroupoidHom::from_localization(&space.loc);
    let locate = |hom: &GroupoidHom| {
        let c = PointedCocycle::unit_pointed(&space.loc, &g, proj.then(hom), star, star);
        space.class_of(&g, &g, &c).unwrap().0
    };
    assert_ne!(locate(&hom1), locate(&hom2));
}

#[test]
fn morphism_groupoid_is_the_pair_action_groupoid() {
    let src = a_action();
    let dst = a_action();
    let g = src.to_groupoid();
    let gp = dst.to_groupoid();
    let star = 2;
    let pairs = enumerate_equivariant_pairs(&src, &dst).unwrap();
    let space = MorphismSpace::enumerate(&g, &gp, star, 50_000_000).unwrap();
    assert_eq!(pairs.len(), space.len());
    // the explicit bijection pairs -> classes
    let loc_proj = GroupoidHom::from_localization(&space.loc);
    let class_of_pair: Vec<usize> = pairs
        .iter()
        .map(|p| {
            let lifted = loc_proj.then(&pair_to_hom(p, &src, &dst));
            let c = PointedCocycle::unit_pointed(&space.loc, &gp, lifted, star, star);
            space.class_of(&g, &gp, &c).unwrap().0
        })
        .collect();
    // it intertwines the target-group action: gamma'.B(p) = B(gamma'.p)
    let nxp = dst.graph.len();
    for (pi, pair) in pairs.iter().enumerate() {
        let anchor = pair.f[star];
        for gamma in 0..dst.group.order() {
            let arrow = gamma * nxp + anchor;
            let (resolved, _) = space
                .resolve(&g, &gp, arrow, class_of_pair[pi])
                .expect("action stays inside the space");
            let moved = act_on_pair(gamma, pair, &dst);
            let mi = pairs.iter().position(|q| *q == moved).unwrap();
            assert_eq!(resolved, class_of_pair[mi]);
        }
    }
    // orbit counts agree with the pair-orbit oracle
    let (mor, _) = space.morphism_groupoid(&g, &gp);
    assert_eq!(mor.orbits().len(), pair_orbits(&pairs, &dst).len());
}
