//! The curry/uncurry correspondence: bundles for a product groupoid
//! `H x G` into `G'` correspond to homomorphisms from a localization of `H`
//! into the morphism groupoid of `(G', G)`. Currying reads off, for each
//! parameter object, the pointed class of the sliced bundle; uncurrying
//! composes the exponential evaluation with the given homomorphism.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bundle::PointedBundle;
use crate::cocycle::{bundle_from_cocycle, CocycleBundleMap, PointedCocycle};
use crate::cover::{localize, Localization, OpenCover};
use crate::graph::ObjId;
use crate::groupoid::{ArrowId, FiniteGroupoid};
use crate::hom::GroupoidHom;
use crate::morphism::{MorphismError, MorphismSpace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurryError {
    #[error("slice class not found in the morphism space at parameter object {0}")]
    ClassNotFound(ObjId),
    #[error("no principal transition solves the section identity at arrow {0}")]
    NoTransition(ArrowId),
    #[error("exponential evaluation undefined at product arrow {0}")]
    ExpUndefined(ArrowId),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// Everything the currying correspondence needs on the `(G', G)` side: the
/// enumerated morphism space, its groupoid, and the arrow dictionary.
#[derive(Debug, Clone)]
pub struct ExponentialSetting {
    pub star: ObjId,
    pub space: MorphismSpace,
    pub mor: FiniteGroupoid,
    pub mor_arrows: Vec<(ArrowId, usize)>,
    arrow_index: BTreeMap<(ArrowId, usize), ArrowId>,
}

impl ExponentialSetting {
    pub fn new(
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        star: ObjId,
        cap: usize,
    ) -> Result<Self, MorphismError> {
        let space = MorphismSpace::enumerate(g, gp, star, cap)?;
        Self::from_space(g, gp, space)
    }

    pub fn from_space(
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        space: MorphismSpace,
    ) -> Result<Self, MorphismError> {
        let (mor, mor_arrows) = space.morphism_groupoid(g, gp);
        let arrow_index = mor_arrows
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i))
            .collect();
        Ok(ExponentialSetting { star: space.star, space, mor, mor_arrows, arrow_index })
    }

    pub fn mor_arrow(&self, gprime: ArrowId, class: usize) -> Option<ArrowId> {
        self.arrow_index.get(&(gprime, class)).copied()
    }
}

/// A bundle for `(G', H x G)` presented by a cocycle over the star cover of
/// the product, together with the product bookkeeping.
#[derive(Debug, Clone)]
pub struct ProductPresentation {
    pub prod: FiniteGroupoid,
    pub prod_loc: Localization,
    pub cocycle: PointedCocycle,
    pub bundle: PointedBundle,
    pub map: CocycleBundleMap,
    n_g_objects: usize,
    n_g_arrows: usize,
}

impl ProductPresentation {
    /// Glues the bundle presented by `hom` over the star localization of
    /// `H x G`, pointed over `(star_h, star_g)`.
    pub fn new(
        h: &FiniteGroupoid,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        hom: GroupoidHom,
        star_h: ObjId,
        star_g: ObjId,
    ) -> Result<Self, CurryError> {
        let prod = FiniteGroupoid::product(h, g);
        let prod_loc = localize(&prod, &OpenCover::stars(prod.base()))
            .expect("star cover localizes the product");
        let star_obj = star_h * g.object_count() + star_g;
        let cocycle = PointedCocycle::unit_pointed(&prod_loc, gp, hom, star_obj, star_obj);
        let (bundle, map) = bundle_from_cocycle(&prod, &prod_loc, gp, &cocycle)
            .map_err(|e| CurryError::Morphism(MorphismError::Cocycle(e.to_string())))?;
        Ok(ProductPresentation {
            prod,
            prod_loc,
            cocycle,
            bundle,
            map,
            n_g_objects: g.object_count(),
            n_g_arrows: g.arrow_count(),
        })
    }

    fn prod_object(&self, v: ObjId, x: ObjId) -> ObjId {
        v * self.n_g_objects + x
    }

    fn prod_arrow(&self, hh: ArrowId, b: ArrowId) -> ArrowId {
        hh * self.n_g_arrows + b
    }

    /// Piece of the product star cover centered at `(v, x)`.
    fn prod_piece(&self, v: ObjId, x: ObjId) -> usize {
        self.prod_object(v, x)
    }
}

/// Curries a product-bundle presentation into a homomorphism from the star
/// localization of `H` into the morphism groupoid.
pub fn curry_morphism(
    setting: &ExponentialSetting,
    h: &FiniteGroupoid,
    h_loc: &Localization,
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    p: &ProductPresentation,
) -> Result<GroupoidHom, CurryError> {
    let star = setting.star;
    // slice classes: for each localized H object (a, v), the class of the
    // sliced bundle pointed by the section of the piece centered at (a, *)
    let mut obj_map = Vec::with_capacity(h_loc.groupoid.object_count());
    for &(a_piece, v) in &h_loc.obj_pairs {
        let slice = slice_cocycle(setting, g, gp, p, v, a_piece)?;
        let (class, _) = setting
            .space
            .class_of(g, gp, &slice)
            .ok_or(CurryError::ClassNotFound(v))?;
        obj_map.push(class);
    }
    let mut arrow_map = Vec::with_capacity(h_loc.groupoid.arrow_count());
    for (idx, &(b_piece, hh, a_piece)) in h_loc.arrow_triples.iter().enumerate() {
        let (v, w) = (h.src(hh), h.tgt(hh));
        // transition: sigma_b(w,*) . (hh, 1_*) = f . sigma_a(v,*)
        let sigma_a = section_at(p, gp, a_piece, v, star);
        let sigma_b = section_at(p, gp, b_piece, w, star);
        let acted = p
            .bundle
            .bundle
            .right_act(sigma_b, p.prod_arrow(hh, g.unit(star)))
            .ok_or(CurryError::NoTransition(idx))?;
        let anchor = p.bundle.bundle.t(sigma_a);
        let f = (0..gp.arrow_count())
            .find(|&vv| {
                gp.src(vv) == anchor && p.bundle.bundle.left_act(vv, sigma_a) == Some(acted)
            })
            .ok_or(CurryError::NoTransition(idx))?;
        let src_class = obj_map[h_loc.groupoid.src(idx)];
        let mor_arrow = setting
            .mor_arrow(f, src_class)
            .ok_or(CurryError::NoTransition(idx))?;
        arrow_map.push(mor_arrow);
    }
    Ok(GroupoidHom { obj_map, arrow_map })
}

/// The sliced cocycle at parameter `v`, pointed by the section of the piece
/// centered at `(center, *)`.
fn slice_cocycle(
    setting: &ExponentialSetting,
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    p: &ProductPresentation,
    v: ObjId,
    center: ObjId,
) -> Result<PointedCocycle, CurryError> {
    let star = setting.star;
    let loc = &setting.space.loc;
    let mut obj_map = Vec::with_capacity(loc.groupoid.object_count());
    for &(i, x) in &loc.obj_pairs {
        let po = p
            .prod_loc
            .object_of(p.prod_piece(v, i), p.prod_object(v, x))
            .expect("slice objects live in the sliced pieces");
        obj_map.push(p.cocycle.hom.obj(po));
    }
    let mut arrow_map = Vec::with_capacity(loc.groupoid.arrow_count());
    for &(j, b, i) in &loc.arrow_triples {
        let pa = p
            .prod_loc
            .arrow_of(
                p.prod_piece(v, j),
                p.prod_arrow(h_unit_of(p, v), b),
                p.prod_piece(v, i),
            )
            .expect("slice arrows live in the sliced pieces");
        arrow_map.push(p.cocycle.hom.arrow(pa));
    }
    // basepoint decoration: the crossunit from the (v,*)-centered piece to
    // the (center,*)-centered piece at (v,*)
    let cross = p
        .prod_loc
        .arrow_of(
            p.prod_piece(center, star),
            p.prod.unit(p.prod_object(v, star)),
            p.prod_piece(v, star),
        )
        .expect("basepoint crossunit exists");
    let delta = p.cocycle.hom.arrow(cross);
    let _ = gp;
    let _ = g;
    Ok(PointedCocycle {
        hom: GroupoidHom { obj_map, arrow_map },
        base_piece: setting.space.base_piece,
        star,
        delta,
    })
}

fn h_unit_of(p: &ProductPresentation, v: ObjId) -> ArrowId {
    // unit arrow of H at v, recovered from the product unit
    let star_obj = p.prod_object(v, 0);
    p.prod.unit(star_obj) / p.n_g_arrows
}

fn section_at(
    p: &ProductPresentation,
    gp: &FiniteGroupoid,
    center_piece_obj: ObjId,
    v: ObjId,
    star: ObjId,
) -> usize {
    let piece = center_piece_obj * p.n_g_objects + star;
    let x = p.prod_object(v, star);
    let y = p
        .cocycle
        .obj_at(&p.prod_loc, piece, x)
        .expect("section point lies in the piece");
    p.map.element_of[&(piece, gp.unit(y), x)]
}

/// Uncurries a homomorphism into the morphism groupoid back to a cocycle
/// over the star localization of the product, and glues its bundle.
pub fn uncurry_morphism(
    setting: &ExponentialSetting,
    h: &FiniteGroupoid,
    h_loc: &Localization,
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    psi: &GroupoidHom,
    star_h: ObjId,
) -> Result<ProductPresentation, CurryError> {
    let prod = FiniteGroupoid::product(h, g);
    let prod_loc = localize(&prod, &OpenCover::stars(prod.base()))
        .expect("star cover localizes the product");
    let n_g_objects = g.object_count();
    let n_g_arrows = g.arrow_count();
    let mut obj_map = Vec::with_capacity(prod_loc.groupoid.object_count());
    for &(piece, obj) in &prod_loc.obj_pairs {
        let (pa, pi) = (piece / n_g_objects, piece % n_g_objects);
        let (v, x) = (obj / n_g_objects, obj % n_g_objects);
        let h_obj = h_loc
            .object_of(pa, v)
            .expect("product piece projects to a parameter piece");
        let z = psi.obj(h_obj);
        let value = setting.space.classes[z]
            .cocycle
            .obj_at(&setting.space.loc, pi, x)
            .expect("class cocycle covers the slice");
        obj_map.push(value);
    }
    let mut arrow_map = Vec::with_capacity(prod_loc.groupoid.arrow_count());
    for (idx, &(pb, pa_arrow, pa)) in prod_loc.arrow_triples.iter().enumerate() {
        let (hh, b) = (pa_arrow / n_g_arrows, pa_arrow % n_g_arrows);
        let (piece_a_h, piece_a_g) = (pa / n_g_objects, pa % n_g_objects);
        let (piece_b_h, piece_b_g) = (pb / n_g_objects, pb % n_g_objects);
        let h_arrow = h_loc
            .arrow_of(piece_b_h, hh, piece_a_h)
            .expect("product triple projects to a parameter triple");
        let mor_idx = psi.arrow(h_arrow);
        let (gpp, z1) = setting.mor_arrows[mor_idx];
        let (_, value) = setting
            .space
            .exp_value(g, gp, gpp, z1, piece_b_g, b, piece_a_g)
            .ok_or(CurryError::ExpUndefined(idx))?;
        arrow_map.push(value);
    }
    ProductPresentation::new(
        h,
        g,
        gp,
        GroupoidHom { obj_map, arrow_map },
        star_h,
        setting.star,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hom::find_natural_transformation;

    /// H = point: currying a (G', G)-bundle picks out its class.
    #[test]
    fn point_parameter_curry_picks_the_class() {
        let h = FiniteGroupoid::point();
        let g = fixtures::z2_edge();
        let gp = fixtures::z2_edge();
        let setting = ExponentialSetting::new(&g, &gp, 0, 1_000_000).unwrap();
        let h_loc = localize(&h, &OpenCover::stars(h.base())).unwrap();
        // P = E_phi for the identity hom on G, as an (G', H x G)-bundle
        let prod = FiniteGroupoid::product(&h, &g);
        let prod_loc = localize(&prod, &OpenCover::stars(prod.base())).unwrap();
        // hom: (1_*, b) -> b
        let proj = GroupoidHom {
            obj_map: (0..prod.object_count()).map(|o| o % g.object_count()).collect(),
            arrow_map: (0..prod.arrow_count()).map(|a| a % g.arrow_count()).collect(),
        };
        let lifted = GroupoidHom::from_localization(&prod_loc).then(&proj);
        let p = ProductPresentation::new(&h, &g, &gp, lifted, 0, 0).unwrap();
        assert!(p.bundle.bundle.validate(&prod, &gp).is_empty());
        let psi = curry_morphism(&setting, &h, &h_loc, &g, &gp, &p).unwrap();
        assert!(psi.validate(&h_loc.groupoid, &setting.mor).is_ok());
        // the single class must be the class of the identity cocycle
        let id_hom = GroupoidHom::from_localization(&setting.space.loc);
        let id_cocycle = PointedCocycle::unit_pointed(&setting.space.loc, &gp, id_hom, 0, 0);
        let (expected, _) = setting.space.class_of(&g, &gp, &id_cocycle).unwrap();
        assert_eq!(psi.obj_map[0], expected);
    }

    /// Klein group acting on the edge: one factor swaps, one acts trivially.
    /// The trivially-acting factor has room to record a parameter loop.
    fn v4_edge() -> FiniteGroupoid {
        let base = crate::graph::ObjectGraph::path(&["0", "1"]);
        let v4 = crate::group::FiniteGroup::klein();
        // element i*2+j acts by swap^i
        FiniteGroupoid::action_groupoid(
            &v4,
            base,
            &[vec![0, 1], vec![0, 1], vec![1, 0], vec![1, 0]],
        )
        .unwrap()
    }

    /// Round trip: uncurry then curry returns the same hom up to natural
    /// transformation; curry then uncurry returns an equivalent bundle.
    #[test]
    fn round_trip_on_edge_fixture() {
        let h = FiniteGroupoid::from_group(&crate::group::FiniteGroup::cyclic(2));
        let g = fixtures::z2_edge();
        let gp = v4_edge();
        let setting = ExponentialSetting::new(&g, &gp, 0, 1_000_000).unwrap();
        let h_loc = localize(&h, &OpenCover::stars(h.base())).unwrap();
        // known product hom with genuine parameter dependence:
        // ((eps, *), (gamma, x)) -> (a^gamma b^eps, x) with a the swap
        let prod = FiniteGroupoid::product(&h, &g);
        let prod_loc = localize(&prod, &OpenCover::stars(prod.base())).unwrap();
        let ng = g.arrow_count();
        let chi = GroupoidHom {
            obj_map: (0..prod.object_count()).map(|o| o % g.object_count()).collect(),
            arrow_map: (0..prod.arrow_count())
                .map(|arr| {
                    let (eps, ga) = (arr / ng, arr % ng);
                    let (gamma, x) = (ga / 2, ga % 2);
                    (gamma * 2 + eps) * 2 + x
                })
                .collect(),
        };
        let lifted = GroupoidHom::from_localization(&prod_loc).then(&chi);
        let p = ProductPresentation::new(&h, &g, &gp, lifted, 0, 0).unwrap();
        assert!(p.bundle.bundle.validate(&prod, &gp).is_empty());

        let psi = curry_morphism(&setting, &h, &h_loc, &g, &gp, &p).unwrap();
        assert!(psi.validate(&h_loc.groupoid, &setting.mor).is_ok());
        // the parameter loop must land on a nontrivial morphism-groupoid arrow
        let r_arrow = h_loc
            .arrow_triples
            .iter()
            .position(|&(_, hh, _)| !h.is_unit(hh))
            .unwrap();
        let (gpp, _) = setting.mor_arrows[psi.arrow(r_arrow)];
        assert!(!gp.is_unit(gpp));

        let p2 = uncurry_morphism(&setting, &h, &h_loc, &g, &gp, &psi, 0).unwrap();
        assert!(p2.bundle.bundle.validate(&p2.prod, &gp).is_empty());

        // uncurry(curry(P)) is pointed isomorphic to P: the product groupoid
        // is connected here, so propagation applies
        let outcome = crate::morphism::pointed_isomorphism(
            &p.bundle,
            &p2.bundle,
            &p.prod,
            &gp,
            None,
        )
        .unwrap();
        assert!(matches!(outcome, crate::morphism::PointedIsoOutcome::Iso(_)));

        // curry(uncurry(psi)) equals psi up to natural transformation
        let psi2 = curry_morphism(&setting, &h, &h_loc, &g, &gp, &p2).unwrap();
        let t = find_natural_transformation(&h_loc.groupoid, &setting.mor, &psi, &psi2);
        assert!(t.is_some());
    }
}
