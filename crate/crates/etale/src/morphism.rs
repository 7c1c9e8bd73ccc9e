//! Pointed morphism spaces. A pointed morphism is an isomorphism class of
//! pointed bundles; here they are enumerated as continuous cocycles over the
//! star cover of the source, deduplicated by the extension criterion: two
//! pointed cocycles present the same morphism exactly when a continuous
//! pointed homomorphism on the doubled localization extends both.
//!
//! Basepoint rigidity makes the machinery effective: a basepoint-preserving
//! automorphism of a bundle over a connected groupoid is the identity, so
//! pointed isomorphisms can be found by propagation and are unique.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bundle::PointedBundle;
use crate::cocycle::{bundle_from_cocycle, CocycleBundleMap, PointedCocycle};
use crate::cover::{localize, Localization, OpenCover};
use crate::graph::ObjId;
use crate::groupoid::{ArrowId, FiniteGroupoid};
use crate::hom::GroupoidHom;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphismError {
    #[error("source groupoid is disconnected; pointed propagation is not unique")]
    DisconnectedSource,
    #[error("bundles are pointed over different stars")]
    StarMismatch,
    #[error("star object {0} out of range")]
    StarOutOfRange(ObjId),
    #[error("enumeration cap of {0} steps exceeded")]
    CapExceeded(usize),
    #[error("cocycle construction failed: {0}")]
    Cocycle(String),
}

/// Result of pointed-isomorphism propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointedIsoOutcome {
    /// The unique basepoint-preserving isomorphism, as an element map.
    Iso(Vec<usize>),
    /// Propagation hit a contradiction; the element and a short reason.
    Conflict { element: usize, detail: String },
}

/// Deterministic propagation of a pointed isomorphism: seed the basepoints,
/// extend along both actions. For valid bundles over a connected source the
/// result is independent of the processing order; pass a seed to randomize
/// the order and observe that.
pub fn pointed_isomorphism(
    p: &PointedBundle,
    q: &PointedBundle,
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    shuffle_seed: Option<u64>,
) -> Result<PointedIsoOutcome, MorphismError> {
    if !g.is_connected() {
        return Err(MorphismError::DisconnectedSource);
    }
    if p.star != q.star {
        return Err(MorphismError::StarMismatch);
    }
    if p.bundle.t(p.basepoint) != q.bundle.t(q.basepoint) {
        return Ok(PointedIsoOutcome::Conflict {
            element: p.basepoint,
            detail: "basepoints have different anchors".into(),
        });
    }
    let mut rng = shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    let mut map: Vec<Option<usize>> = vec![None; p.bundle.len()];
    map[p.basepoint] = Some(q.basepoint);
    let mut worklist = vec![p.basepoint];
    while !worklist.is_empty() {
        if let Some(rng) = rng.as_mut() {
            worklist.shuffle(rng);
        }
        let e = worklist.pop().unwrap();
        let fe = map[e].unwrap();
        for a in 0..gp.arrow_count() {
            if let Some(e1) = p.bundle.left_act(a, e) {
                let Some(f1) = q.bundle.left_act(a, fe) else {
                    return Ok(PointedIsoOutcome::Conflict {
                        element: e1,
                        detail: format!("left action by arrow {a} undefined on the image"),
                    });
                };
                match map[e1] {
                    None => {
                        map[e1] = Some(f1);
                        worklist.push(e1);
                    }
                    Some(prev) if prev == f1 => {}
                    Some(_) => {
                        return Ok(PointedIsoOutcome::Conflict {
                            element: e1,
                            detail: format!("left action by arrow {a} forces two images"),
                        });
                    }
                }
            }
        }
        for b in 0..g.arrow_count() {
            if let Some(e1) = p.bundle.right_act(e, b) {
                let Some(f1) = q.bundle.right_act(fe, b) else {
                    return Ok(PointedIsoOutcome::Conflict {
                        element: e1,
                        detail: format!("right action by arrow {b} undefined on the image"),
                    });
                };
                match map[e1] {
                    None => {
                        map[e1] = Some(f1);
                        worklist.push(e1);
                    }
                    Some(prev) if prev == f1 => {}
                    Some(_) => {
                        return Ok(PointedIsoOutcome::Conflict {
                            element: e1,
                            detail: format!("right action by arrow {b} forces two images"),
                        });
                    }
                }
            }
        }
    }
    if map.iter().any(|m| m.is_none()) {
        return Ok(PointedIsoOutcome::Conflict {
            element: map.iter().position(|m| m.is_none()).unwrap(),
            detail: "element not reached from the basepoint".into(),
        });
    }
    let image: Vec<usize> = map.into_iter().map(|m| m.unwrap()).collect();
    let mut seen = vec![false; q.bundle.len()];
    for &f in &image {
        if f >= seen.len() || seen[f] {
            return Ok(PointedIsoOutcome::Conflict {
                element: image.iter().position(|&x| x == f).unwrap(),
                detail: "image is not a bijection".into(),
            });
        }
        seen[f] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Ok(PointedIsoOutcome::Conflict {
            element: p.basepoint,
            detail: "image is not surjective".into(),
        });
    }
    Ok(PointedIsoOutcome::Iso(image))
}

/// Crossover data of a continuous pointed equivalence between two cocycles
/// over the same cover: for each object and pair of pieces containing it,
/// the connecting target arrow.
pub type Crossover = BTreeMap<(usize, usize, ObjId), ArrowId>;

/// A morphism class: canonical representative cocycle, its glued pointed
/// bundle, the triple bookkeeping, and the anchor `t(basepoint)`.
#[derive(Debug, Clone)]
pub struct MorphismClass {
    pub cocycle: PointedCocycle,
    pub bundle: PointedBundle,
    pub map: CocycleBundleMap,
    pub anchor: ObjId,
}

/// The space of pointed morphisms from `g` to `gp` over a star, presented
/// by continuous cocycles over the star cover of the source.
#[derive(Debug, Clone)]
pub struct MorphismSpace {
    pub star: ObjId,
    pub base_piece: usize,
    pub loc: Localization,
    union_loc: Localization,
    pub classes: Vec<MorphismClass>,
}

impl MorphismSpace {
    /// Enumerates all pointed morphism classes by exhaustive continuous
    /// cocycle search over the star cover, deduplicated by the extension
    /// criterion. Classes are sorted by (bundle size, encoding).
    pub fn enumerate(
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        star: ObjId,
        cap: usize,
    ) -> Result<Self, MorphismError> {
        if star >= g.object_count() {
            return Err(MorphismError::StarOutOfRange(star));
        }
        let (loc, union_loc) = star_localizations(g);
        let homs = enumerate_continuous_homs(&loc.groupoid, gp, cap)?;
        let mut space = MorphismSpace {
            star,
            base_piece: star,
            loc,
            union_loc,
            classes: Vec::new(),
        };
        // group cocycles into classes by the extension criterion
        let mut members: Vec<Vec<(PointedCocycle, PointedBundle, CocycleBundleMap)>> = Vec::new();
        for hom in homs {
            let cocycle = PointedCocycle::unit_pointed(&space.loc, gp, hom, star, star);
            let (bundle, map) = bundle_from_cocycle(g, &space.loc, gp, &cocycle)
                .map_err(|e| MorphismError::Cocycle(e.to_string()))?;
            let mut found = None;
            for (ci, cls) in members.iter().enumerate() {
                let (rep, rep_bundle, _) = &cls[0];
                if rep.anchor(gp) != cocycle.anchor(gp)
                    || rep_bundle.bundle.len() != bundle.bundle.len()
                {
                    continue;
                }
                if space
                    .pointed_equivalence(g, gp, rep, &cocycle)
                    .is_some()
                {
                    found = Some(ci);
                    break;
                }
            }
            match found {
                Some(ci) => members[ci].push((cocycle, bundle, map)),
                None => members.push(vec![(cocycle, bundle, map)]),
            }
        }
        let mut classes: Vec<MorphismClass> = members
            .into_iter()
            .map(|cls| {
                let best = cls
                    .into_iter()
                    .min_by_key(|(_, b, _)| (b.bundle.len(), b.bundle.encoding()))
                    .unwrap();
                let anchor = best.0.anchor(gp);
                MorphismClass { cocycle: best.0, bundle: best.1, map: best.2, anchor }
            })
            .collect();
        classes.sort_by_key(|c| (c.bundle.bundle.len(), c.bundle.bundle.encoding()));
        space.classes = classes;
        Ok(space)
    }

    /// Builds the space directly from explicit cocycle representatives
    /// (assumed pairwise inequivalent), e.g. the equivariant pairs of a
    /// developable source.
    pub fn from_cocycles(
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        star: ObjId,
        homs: Vec<GroupoidHom>,
    ) -> Result<Self, MorphismError> {
        if star >= g.object_count() {
            return Err(MorphismError::StarOutOfRange(star));
        }
        let (loc, union_loc) = star_localizations(g);
        let mut classes = Vec::new();
        for hom in homs {
            let cocycle = PointedCocycle::unit_pointed(&loc, gp, hom, star, star);
            let (bundle, map) = bundle_from_cocycle(g, &loc, gp, &cocycle)
                .map_err(|e| MorphismError::Cocycle(e.to_string()))?;
            let anchor = cocycle.anchor(gp);
            classes.push(MorphismClass { cocycle, bundle, map, anchor });
        }
        Ok(MorphismSpace { star, base_piece: star, loc, union_loc, classes })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Continuous pointed equivalence test between two pointed cocycles over
    /// the star cover: searches crossover data and verifies that it
    /// assembles into a continuous functor on the doubled localization.
    pub fn pointed_equivalence(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        c1: &PointedCocycle,
        c2: &PointedCocycle,
    ) -> Option<Crossover> {
        find_pointed_equivalence(g, &self.loc, &self.union_loc, gp, c1, c2)
    }

    /// Locates the class of a candidate pointed cocycle; returns the index
    /// and the crossover of the match.
    pub fn class_of(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        cand: &PointedCocycle,
    ) -> Option<(usize, Crossover)> {
        for (ci, cls) in self.classes.iter().enumerate() {
            if cls.anchor != cand.anchor(gp) {
                continue;
            }
            if let Some(k) = self.pointed_equivalence(g, gp, &cls.cocycle, cand) {
                return Some((ci, k));
            }
        }
        None
    }

    /// The left action of a target arrow on a class: moves the basepoint and
    /// locates the resulting class. Returns the class index and the element
    /// map from the acted class representative to the target representative.
    pub fn resolve(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        gprime: ArrowId,
        z: usize,
    ) -> Option<(usize, Vec<usize>)> {
        let cls = &self.classes[z];
        if gp.src(gprime) != cls.anchor {
            return None;
        }
        let moved = PointedCocycle {
            hom: cls.cocycle.hom.clone(),
            base_piece: cls.cocycle.base_piece,
            star: cls.cocycle.star,
            delta: gp.compose(gprime, cls.cocycle.delta)?,
        };
        let (zi, k) = self.class_of(g, gp, &moved)?;
        let m = self.element_map(g, gp, z, zi, &k);
        Some((zi, m))
    }

    /// Element map of the iso `E_z -> E_zi` determined by the crossover of a
    /// match with `c1 = classes[zi].cocycle` and `c2` presenting `E_z`.
    fn element_map(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        z_from: usize,
        z_to: usize,
        k: &Crossover,
    ) -> Vec<usize> {
        let _ = g;
        let from = &self.classes[z_from];
        let to = &self.classes[z_to];
        from.map
            .triple_of
            .iter()
            .map(|&(i2, a, x)| {
                let i1 = self
                    .loc
                    .cover
                    .pieces_containing(x)
                    .next()
                    .expect("cover covers x");
                let glued = gp.compose(a, k[&(i2, i1, x)]).expect("crossover endpoints line up");
                to.map.element_of[&(i1, glued, x)]
            })
            .collect()
    }

    /// The associated groupoid: objects are the classes, arrows are pairs
    /// `(g', class)` with `src(g') = anchor(class)` acting by moving the
    /// basepoint.
    pub fn morphism_groupoid(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
    ) -> (FiniteGroupoid, Vec<(ArrowId, usize)>) {
        let nz = self.classes.len();
        let mut base = crate::graph::ObjectGraph::new(
            (0..nz).map(|i| format!("z{i}")).collect(),
        )
        .unwrap();
        for z1 in 0..nz {
            for z2 in (z1 + 1)..nz {
                if gp.base().is_adjacent(self.classes[z1].anchor, self.classes[z2].anchor) {
                    base.add_edge(z1, z2).unwrap();
                }
            }
        }
        let mut arrows = Vec::new();
        let mut arrow_index = BTreeMap::new();
        for z in 0..nz {
            for a in 0..gp.arrow_count() {
                if gp.src(a) == self.classes[z].anchor {
                    arrow_index.insert((a, z), arrows.len());
                    arrows.push((a, z));
                }
            }
        }
        let tgt_class: Vec<usize> = arrows
            .iter()
            .map(|&(a, z)| self.resolve(g, gp, a, z).expect("action stays in the space").0)
            .collect();
        let src: Vec<ObjId> = arrows.iter().map(|&(_, z)| z).collect();
        let tgt: Vec<ObjId> = tgt_class.clone();
        let unit: Vec<ArrowId> = (0..nz)
            .map(|z| arrow_index[&(gp.unit(self.classes[z].anchor), z)])
            .collect();
        let inv: Vec<ArrowId> = arrows
            .iter()
            .enumerate()
            .map(|(i, &(a, _))| arrow_index[&(gp.inv(a), tgt_class[i])])
            .collect();
        let mut comp = Vec::new();
        for (i2, &(a2, z2)) in arrows.iter().enumerate() {
            for (i1, &(a1, z1)) in arrows.iter().enumerate() {
                if z2 != tgt_class[i1] {
                    continue;
                }
                if let Some(a21) = gp.compose(a2, a1) {
                    comp.push((i2, i1, arrow_index[&(a21, z1)]));
                }
            }
        }
        let labels = arrows
            .iter()
            .map(|&(a, z)| format!("({},z{z})", gp.arrow_label(a)))
            .collect();
        let mut sheet_map: BTreeMap<usize, usize> = BTreeMap::new();
        let sheets = arrows
            .iter()
            .map(|&(a, _)| {
                let next = sheet_map.len();
                *sheet_map.entry(gp.sheet(a)).or_insert(next)
            })
            .collect();
        let groupoid = FiniteGroupoid::from_parts(
            base,
            src,
            tgt,
            Some(labels),
            unit,
            inv,
            &comp,
            Some(sheets),
        )
        .expect("morphism groupoid tables are well formed");
        (groupoid, arrows)
    }

    /// The exponential evaluation on a localized source arrow: for a
    /// morphism-groupoid arrow `(g'', z1)` and a triple `(j, b, i)` of the
    /// star cover, the unique target arrow `v` with
    /// `v . sigma_{z1,i}(src b) = m^{-1}(sigma_{z2,j}(tgt b) . b)`.
    pub fn exp_value(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        gpp: ArrowId,
        z1: usize,
        tgt_piece: usize,
        b: ArrowId,
        src_piece: usize,
    ) -> Option<(usize, ArrowId)> {
        let (z2, m) = self.resolve(g, gp, gpp, z1)?;
        let from = &self.classes[z1];
        let to = &self.classes[z2];
        let sigma_to = to.map.section(&to.cocycle, &self.loc, gp, tgt_piece, g.tgt(b))?;
        let moved = to.bundle.bundle.right_act(sigma_to, b)?;
        let m_inv = invert_map(&m, to.bundle.bundle.len());
        let target_elt = m_inv[moved];
        let sigma_from = from.map.section(&from.cocycle, &self.loc, gp, src_piece, g.src(b))?;
        let anchor = from.bundle.bundle.t(sigma_from);
        (0..gp.arrow_count()).find_map(|v| {
            if gp.src(v) == anchor && from.bundle.bundle.left_act(v, sigma_from) == Some(target_elt)
            {
                Some((z2, v))
            } else {
                None
            }
        })
    }

    /// Exponential evaluation on a plain source arrow, using the star pieces
    /// of its endpoints.
    pub fn exp_morphism_eval(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        gpp: ArrowId,
        z1: usize,
        b: ArrowId,
    ) -> Option<(usize, ArrowId)> {
        self.exp_value(g, gp, gpp, z1, g.tgt(b), b, g.src(b))
    }

    /// The tautological bundle action on elements:
    /// `g' . (z, e) . ((g'', z1), b) = (z1, m^{-1}(g' . e . b))`.
    pub fn exp_act(
        &self,
        g: &FiniteGroupoid,
        gp: &FiniteGroupoid,
        gprime: Option<ArrowId>,
        z: usize,
        e: usize,
        gpp: ArrowId,
        z1: usize,
        b: ArrowId,
    ) -> Option<(usize, usize)> {
        let (z_check, m) = self.resolve(g, gp, gpp, z1)?;
        if z_check != z {
            return None;
        }
        let bundle = &self.classes[z].bundle.bundle;
        let mut elt = e;
        if let Some(a) = gprime {
            elt = bundle.left_act(a, elt)?;
        }
        elt = bundle.right_act(elt, b)?;
        let m_inv = invert_map(&m, bundle.len());
        Some((z1, m_inv[elt]))
    }
}

fn invert_map(m: &[usize], n: usize) -> Vec<usize> {
    let mut inv = vec![usize::MAX; n];
    for (i, &v) in m.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

fn star_localizations(g: &FiniteGroupoid) -> (Localization, Localization) {
    let stars = OpenCover::stars(g.base());
    let loc = localize(g, &stars).expect("star cover localizes");
    let mut doubled = stars.pieces().to_vec();
    doubled.extend_from_slice(stars.pieces());
    let union = OpenCover::new(g.base(), doubled).expect("doubled cover is a cover");
    let union_loc = localize(g, &union).expect("doubled cover localizes");
    (loc, union_loc)
}

/// Searches for crossover data making two pointed cocycles equivalent:
/// propagation from the basepoint with sheet-continuation forcing, branching
/// over any parts the seed cannot reach, and full verification of every
/// complete assignment on the doubled localization.
fn find_pointed_equivalence(
    g: &FiniteGroupoid,
    loc: &Localization,
    union_loc: &Localization,
    gp: &FiniteGroupoid,
    c1: &PointedCocycle,
    c2: &PointedCocycle,
) -> Option<Crossover> {
    if c1.anchor(gp) != c2.anchor(gp) || c1.star != c2.star {
        return None;
    }
    let u = &loc.cover;
    // all crossover keys (piece2, piece1, x)
    let mut keys = Vec::new();
    for x in 0..g.object_count() {
        let pieces: Vec<usize> = u.pieces_containing(x).collect();
        for &i2 in &pieces {
            for &i1 in &pieces {
                keys.push((i2, i1, x));
            }
        }
    }
    let seed_key = (c2.base_piece, c1.base_piece, c1.star);
    let seed_val = gp.compose(gp.inv(c2.delta), c1.delta)?;
    let ctx = EquivCtx { g, loc, union_loc, gp, c1, c2, keys: &keys };
    let mut assignment: Crossover = BTreeMap::new();
    assignment.insert(seed_key, seed_val);
    solve_crossover(&ctx, &mut assignment, vec![seed_key]).then_some(assignment)
}

struct EquivCtx<'a> {
    g: &'a FiniteGroupoid,
    loc: &'a Localization,
    union_loc: &'a Localization,
    gp: &'a FiniteGroupoid,
    c1: &'a PointedCocycle,
    c2: &'a PointedCocycle,
    keys: &'a [(usize, usize, ObjId)],
}

/// Propagation with backtracking over unseeded parts. A complete assignment
/// is accepted only if the assembled homomorphism verifies.
fn solve_crossover(
    ctx: &EquivCtx<'_>,
    assignment: &mut Crossover,
    mut worklist: Vec<(usize, usize, ObjId)>,
) -> bool {
    let (g, loc, gp, c1, c2) = (ctx.g, ctx.loc, ctx.gp, ctx.c1, ctx.c2);
    let u = &loc.cover;
    while let Some((i2, i1, x)) = worklist.pop() {
        let k = assignment[&(i2, i1, x)];
        // functorial propagation along arrows out of x
        for b in g.arrows_from(x) {
            let y = g.tgt(b);
            for j1 in u.pieces_containing(y) {
                for j2 in u.pieces_containing(y) {
                    let forced = (|| {
                        let phi2 = c2.arrow_at(loc, j2, b, i2)?;
                        let phi1 = c1.arrow_at(loc, j1, b, i1)?;
                        gp.compose(gp.compose(phi2, k)?, gp.inv(phi1))
                    })();
                    let Some(forced) = forced else { return false };
                    match assignment.get(&(j2, j1, y)) {
                        None => {
                            assignment.insert((j2, j1, y), forced);
                            worklist.push((j2, j1, y));
                        }
                        Some(&prev) => {
                            if prev != forced {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        // sheet continuation along edges inside the overlap
        for &y in g.base().neighbors(x) {
            if !u.contains(i1, y) || !u.contains(i2, y) {
                continue;
            }
            let Some(src_needed) = c1.obj_at(loc, i1, y) else { return false };
            let Some(forced) = gp.extend_in_sheet(k, src_needed) else {
                return false;
            };
            if c2.obj_at(loc, i2, y) != Some(gp.tgt(forced)) {
                return false;
            }
            match assignment.get(&(i2, i1, y)) {
                None => {
                    assignment.insert((i2, i1, y), forced);
                    worklist.push((i2, i1, y));
                }
                Some(&prev) => {
                    if prev != forced {
                        return false;
                    }
                }
            }
        }
    }
    // branch on a remaining key, if any (part not reached from the seed)
    let unassigned = ctx.keys.iter().find(|k| !assignment.contains_key(k));
    match unassigned {
        None => verify_crossover(ctx.g, ctx.loc, ctx.union_loc, gp, c1, c2, assignment),
        Some(&(i2, i1, x)) => {
            let (Some(src), Some(tgt)) = (c1.obj_at(loc, i1, x), c2.obj_at(loc, i2, x)) else {
                return false;
            };
            for v in 0..gp.arrow_count() {
                if gp.src(v) != src || gp.tgt(v) != tgt {
                    continue;
                }
                let mut attempt = assignment.clone();
                attempt.insert((i2, i1, x), v);
                if solve_crossover(ctx, &mut attempt, vec![(i2, i1, x)]) {
                    *assignment = attempt;
                    return true;
                }
            }
            false
        }
    }
}

/// Assembles the crossover into a homomorphism on the doubled localization
/// and checks functoriality and continuity there.
#[allow(clippy::too_many_arguments)]
fn verify_crossover(
    g: &FiniteGroupoid,
    loc: &Localization,
    union_loc: &Localization,
    gp: &FiniteGroupoid,
    c1: &PointedCocycle,
    c2: &PointedCocycle,
    k: &Crossover,
) -> bool {
    let np = loc.cover.piece_count();
    let u = &loc.cover;
    let mut obj_map = Vec::with_capacity(union_loc.groupoid.object_count());
    for &(piece, x) in &union_loc.obj_pairs {
        let val = if piece < np {
            c1.obj_at(loc, piece, x)
        } else {
            c2.obj_at(loc, piece - np, x)
        };
        let Some(val) = val else { return false };
        obj_map.push(val);
    }
    let mut arrow_map = Vec::with_capacity(union_loc.groupoid.arrow_count());
    for &(jj, b, ii) in &union_loc.arrow_triples {
        let value = if ii < np && jj < np {
            c1.arrow_at(loc, jj, b, ii)
        } else if ii >= np && jj >= np {
            c2.arrow_at(loc, jj - np, b, ii - np)
        } else if ii < np {
            // copy1 -> copy2: route through copy1 at the target
            let y = g.tgt(b);
            let j1 = u.pieces_containing(y).next().unwrap();
            let phi1 = c1.arrow_at(loc, j1, b, ii);
            let cross = k.get(&(jj - np, j1, y)).copied();
            match (cross, phi1) {
                (Some(c), Some(p)) => gp.compose(c, p),
                _ => None,
            }
        } else {
            // copy2 -> copy1: route through copy1 at the source
            let x = g.src(b);
            let i1 = u.pieces_containing(x).next().unwrap();
            let phi1 = c1.arrow_at(loc, jj, b, i1);
            let cross = k.get(&(ii - np, i1, x)).copied();
            match (cross, phi1) {
                (Some(c), Some(p)) => gp.compose(p, gp.inv(c)),
                _ => None,
            }
        };
        let Some(value) = value else { return false };
        arrow_map.push(value);
    }
    let psi = GroupoidHom { obj_map, arrow_map };
    psi.validate(&union_loc.groupoid, gp).is_ok() && psi.is_continuous(&union_loc.groupoid, gp)
}

/// Exhaustive DFS over continuous functors from a localized groupoid into a
/// target, in a basepoint-first order with functoriality and sheet pruning.
pub fn enumerate_continuous_homs(
    src: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    cap: usize,
) -> Result<Vec<GroupoidHom>, MorphismError> {
    let n = src.arrow_count();
    // static assignment order: units first in object order, then remaining
    // arrows ordered by the later of their endpoints
    let mut order: Vec<ArrowId> = Vec::with_capacity(n);
    for x in 0..src.object_count() {
        order.push(src.unit(x));
    }
    let mut rest: Vec<ArrowId> = (0..n).filter(|&a| !src.is_unit(a)).collect();
    rest.sort_by_key(|&a| (src.src(a).max(src.tgt(a)), src.src(a), a));
    order.extend(rest);
    // factorization tables for incremental checking
    let mut factorizations: Vec<Vec<(ArrowId, ArrowId)>> = vec![Vec::new(); n];
    let mut right_partner: Vec<Vec<(ArrowId, ArrowId)>> = vec![Vec::new(); n];
    let mut left_partner: Vec<Vec<(ArrowId, ArrowId)>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in 0..n {
            if let Some(c) = src.compose(a, b) {
                factorizations[c].push((a, b));
                right_partner[a].push((b, c));
                left_partner[b].push((a, c));
            }
        }
    }
    // same-sheet close-source pairs for continuity checks
    let mut sheet_mates: Vec<Vec<ArrowId>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in 0..n {
            if a != b
                && src.sheet(a) == src.sheet(b)
                && src.base().is_close(src.src(a), src.src(b))
            {
                sheet_mates[a].push(b);
            }
        }
    }
    let mut ctx = HomDfs {
        src,
        gp,
        order: &order,
        factorizations: &factorizations,
        right_partner: &right_partner,
        left_partner: &left_partner,
        sheet_mates: &sheet_mates,
        assignment: vec![usize::MAX; n],
        obj_assignment: vec![usize::MAX; src.object_count()],
        out: Vec::new(),
        steps: 0,
        cap,
    };
    ctx.dfs(0)?;
    Ok(ctx.out)
}

struct HomDfs<'a> {
    src: &'a FiniteGroupoid,
    gp: &'a FiniteGroupoid,
    order: &'a [ArrowId],
    factorizations: &'a [Vec<(ArrowId, ArrowId)>],
    right_partner: &'a [Vec<(ArrowId, ArrowId)>],
    left_partner: &'a [Vec<(ArrowId, ArrowId)>],
    sheet_mates: &'a [Vec<ArrowId>],
    assignment: Vec<usize>,
    obj_assignment: Vec<usize>,
    out: Vec<GroupoidHom>,
    steps: usize,
    cap: usize,
}

impl HomDfs<'_> {
    fn dfs(&mut self, k: usize) -> Result<(), MorphismError> {
        if k == self.order.len() {
            let hom = GroupoidHom {
                obj_map: self.obj_assignment.clone(),
                arrow_map: self.assignment.clone(),
            };
            debug_assert!(hom.validate(self.src, self.gp).is_ok());
            debug_assert!(hom.is_continuous(self.src, self.gp));
            self.out.push(hom);
            return Ok(());
        }
        let a = self.order[k];
        let is_unit = self.src.is_unit(a);
        let candidates: Vec<ArrowId> = if is_unit {
            let x = self.src.src(a);
            (0..self.gp.object_count())
                .filter(|&y| {
                    self.src
                        .base()
                        .neighbors(x)
                        .iter()
                        .all(|&z| {
                            self.obj_assignment[z] == usize::MAX
                                || self.gp.base().is_close(self.obj_assignment[z], y)
                        })
                })
                .map(|y| self.gp.unit(y))
                .collect()
        } else {
            let (sx, tx) = (self.obj_assignment[self.src.src(a)], self.obj_assignment[self.src.tgt(a)]);
            debug_assert!(sx != usize::MAX && tx != usize::MAX);
            self.gp.arrows_between(sx, tx).collect()
        };
        for v in candidates {
            self.steps += 1;
            if self.steps > self.cap {
                return Err(MorphismError::CapExceeded(self.cap));
            }
            if !self.consistent(a, v) {
                continue;
            }
            self.assignment[a] = v;
            let set_obj = if is_unit {
                let x = self.src.src(a);
                self.obj_assignment[x] = self.gp.src(v);
                Some(x)
            } else {
                None
            };
            self.dfs(k + 1)?;
            self.assignment[a] = usize::MAX;
            if let Some(x) = set_obj {
                self.obj_assignment[x] = usize::MAX;
            }
        }
        Ok(())
    }

    fn consistent(&self, a: ArrowId, v: ArrowId) -> bool {
        // sheet continuity with already-assigned mates
        for &b in &self.sheet_mates[a] {
            let vb = self.assignment[b];
            if vb != usize::MAX && self.gp.sheet(vb) != self.gp.sheet(v) {
                return false;
            }
        }
        // inverse pairing
        let ai = self.src.inv(a);
        if self.assignment[ai] != usize::MAX && self.assignment[ai] != self.gp.inv(v) {
            return false;
        }
        // composition with assigned partners whose composite is assigned
        for &(b, c) in &self.right_partner[a] {
            let (vb, vc) = (self.assignment[b], self.assignment[c]);
            if vb != usize::MAX && vc != usize::MAX && self.gp.compose(v, vb) != Some(vc) {
                return false;
            }
        }
        for &(b, c) in &self.left_partner[a] {
            let (vb, vc) = (self.assignment[b], self.assignment[c]);
            if vb != usize::MAX && vc != usize::MAX && self.gp.compose(vb, v) != Some(vc) {
                return false;
            }
        }
        // this arrow as a composite of assigned factors
        for &(b, c) in &self.factorizations[a] {
            let (vb, vc) = (self.assignment[b], self.assignment[c]);
            if vb != usize::MAX && vc != usize::MAX && self.gp.compose(vb, vc) != Some(v) {
                return false;
            }
        }
        true
    }
}
