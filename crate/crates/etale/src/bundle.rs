//! Finite bundles with commuting left and right groupoid actions, stored
//! extensionally as full action tables. Isomorphism classes of these are the
//! generalized morphisms between groupoids; composition and inversion are
//! quotient constructions on the underlying sets.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::ObjId;
use crate::groupoid::{ArrowId, FiniteGroupoid};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BundleError {
    #[error("element {0} out of range")]
    ElementOutOfRange(usize),
    #[error("bundles are over different middle groupoids")]
    MiddleMismatch,
    #[error("basepoint {0} does not sit over the star object {1}")]
    BasepointNotOverStar(usize, ObjId),
    #[error("no homomorphism presents this bundle on the given section: {0}")]
    NoHomOnSection(String),
    #[error("section is not a section of the source projection at object {0}")]
    NotASection(ObjId),
}

/// One violated bundle axiom with its witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleViolation {
    LeftDomain { gp: ArrowId, e: usize, defined: bool },
    RightDomain { e: usize, g: ArrowId, defined: bool },
    LeftEndpoints { gp: ArrowId, e: usize },
    RightEndpoints { e: usize, g: ArrowId },
    LeftUnit { e: usize },
    RightUnit { e: usize },
    LeftAction { g1: ArrowId, g2: ArrowId, e: usize },
    RightAction { e: usize, g1: ArrowId, g2: ArrowId },
    Commuting { gp: ArrowId, e: usize, g: ArrowId },
    SourceNotSurjective { object: ObjId },
    NotPrincipal { object: ObjId },
}

impl fmt::Display for BundleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleViolation::LeftDomain { gp, e, defined } => {
                if *defined {
                    write!(f, "left action ({gp}, {e}) defined off-domain")
                } else {
                    write!(f, "left action ({gp}, {e}) missing")
                }
            }
            BundleViolation::RightDomain { e, g, defined } => {
                if *defined {
                    write!(f, "right action ({e}, {g}) defined off-domain")
                } else {
                    write!(f, "right action ({e}, {g}) missing")
                }
            }
            BundleViolation::LeftEndpoints { gp, e } => {
                write!(f, "left action ({gp}, {e}) breaks the projections")
            }
            BundleViolation::RightEndpoints { e, g } => {
                write!(f, "right action ({e}, {g}) breaks the projections")
            }
            BundleViolation::LeftUnit { e } => write!(f, "left unit fails at element {e}"),
            BundleViolation::RightUnit { e } => write!(f, "right unit fails at element {e}"),
            BundleViolation::LeftAction { g1, g2, e } => {
                write!(f, "left action not associative at ({g1}, {g2}, {e})")
            }
            BundleViolation::RightAction { e, g1, g2 } => {
                write!(f, "right action not associative at ({e}, {g1}, {g2})")
            }
            BundleViolation::Commuting { gp, e, g } => {
                write!(f, "left and right actions fail to commute at ({gp}, {e}, {g})")
            }
            BundleViolation::SourceNotSurjective { object } => {
                write!(f, "no element sits over object {object}")
            }
            BundleViolation::NotPrincipal { object } => {
                write!(f, "fiber over object {object} is not a free transitive orbit")
            }
        }
    }
}

/// A finite `(G', G)`-bundle: elements with a base projection `s` into the
/// objects of `G`, an anchor projection `t` into the objects of `G'`, and
/// commuting partial actions stored as explicit tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    s: Vec<ObjId>,
    t: Vec<ObjId>,
    left: BTreeMap<(ArrowId, usize), usize>,
    right: BTreeMap<(usize, ArrowId), usize>,
    labels: Vec<String>,
}

impl Bundle {
    pub fn new(
        s: Vec<ObjId>,
        t: Vec<ObjId>,
        left: BTreeMap<(ArrowId, usize), usize>,
        right: BTreeMap<(usize, ArrowId), usize>,
        labels: Option<Vec<String>>,
    ) -> Self {
        let labels = labels.unwrap_or_else(|| (0..s.len()).map(|e| format!("e{e}")).collect());
        assert_eq!(s.len(), t.len());
        assert_eq!(s.len(), labels.len());
        Bundle { s, t, left, right, labels }
    }

    /// `G` as a bundle over itself: `s = src`, `t = tgt`, both actions by
    /// composition.
    pub fn unit(g: &FiniteGroupoid) -> Self {
        let n = g.arrow_count();
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for a in 0..n {
            for e in 0..n {
                if let Some(c) = g.compose(a, e) {
                    left.insert((a, e), c);
                }
                if let Some(c) = g.compose(e, a) {
                    right.insert((e, a), c);
                }
            }
        }
        Bundle::new(
            (0..n).map(|e| g.src(e)).collect(),
            (0..n).map(|e| g.tgt(e)).collect(),
            left,
            right,
            Some((0..n).map(|e| g.arrow_label(e).to_string()).collect()),
        )
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s(&self, e: usize) -> ObjId {
        self.s[e]
    }

    pub fn t(&self, e: usize) -> ObjId {
        self.t[e]
    }

    pub fn label(&self, e: usize) -> &str {
        &self.labels[e]
    }

    pub fn left_act(&self, gp: ArrowId, e: usize) -> Option<usize> {
        self.left.get(&(gp, e)).copied()
    }

    pub fn right_act(&self, e: usize, g: ArrowId) -> Option<usize> {
        self.right.get(&(e, g)).copied()
    }

    pub fn fiber(&self, x: ObjId) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.s[e] == x).collect()
    }

    /// Remove one left-action entry; for fault-injection tests.
    pub fn delete_left_entry(&mut self, gp: ArrowId, e: usize) {
        self.left.remove(&(gp, e));
    }

    /// Redirect one left-action entry; for fault-injection tests.
    pub fn set_left_entry(&mut self, gp: ArrowId, e: usize, value: usize) {
        self.left.insert((gp, e), value);
    }

    /// Checks every bundle axiom against the acting groupoids `g` (right)
    /// and `gp` (left). Empty report means valid.
    pub fn validate(&self, g: &FiniteGroupoid, gp: &FiniteGroupoid) -> Vec<BundleViolation> {
        let mut out = Vec::new();
        let n = self.len();
        for e in 0..n {
            for a in 0..gp.arrow_count() {
                let in_domain = gp.src(a) == self.t[e];
                match self.left_act(a, e) {
                    Some(ae) => {
                        if !in_domain {
                            out.push(BundleViolation::LeftDomain { gp: a, e, defined: true });
                        } else if self.s[ae] != self.s[e] || self.t[ae] != gp.tgt(a) {
                            out.push(BundleViolation::LeftEndpoints { gp: a, e });
                        }
                    }
                    None => {
                        if in_domain {
                            out.push(BundleViolation::LeftDomain { gp: a, e, defined: false });
                        }
                    }
                }
            }
            for a in 0..g.arrow_count() {
                let in_domain = g.tgt(a) == self.s[e];
                match self.right_act(e, a) {
                    Some(ea) => {
                        if !in_domain {
                            out.push(BundleViolation::RightDomain { e, g: a, defined: true });
                        } else if self.s[ea] != g.src(a) || self.t[ea] != self.t[e] {
                            out.push(BundleViolation::RightEndpoints { e, g: a });
                        }
                    }
                    None => {
                        if in_domain {
                            out.push(BundleViolation::RightDomain { e, g: a, defined: false });
                        }
                    }
                }
            }
        }
        if !out.is_empty() {
            // endpoint bookkeeping is broken; the remaining laws would only
            // cascade from it
            return out;
        }
        for e in 0..n {
            if self.left_act(gp.unit(self.t[e]), e) != Some(e) {
                out.push(BundleViolation::LeftUnit { e });
            }
            if self.right_act(e, g.unit(self.s[e])) != Some(e) {
                out.push(BundleViolation::RightUnit { e });
            }
        }
        for e in 0..n {
            for a2 in 0..gp.arrow_count() {
                let Some(e2) = self.left_act(a2, e) else { continue };
                for a1 in 0..gp.arrow_count() {
                    if let Some(a12) = gp.compose(a1, a2) {
                        if self.left_act(a1, e2) != self.left_act(a12, e) {
                            out.push(BundleViolation::LeftAction { g1: a1, g2: a2, e });
                        }
                    }
                }
            }
            for a1 in 0..g.arrow_count() {
                let Some(e1) = self.right_act(e, a1) else { continue };
                for a2 in 0..g.arrow_count() {
                    if let Some(a12) = g.compose(a1, a2) {
                        if self.right_act(e1, a2) != self.right_act(e, a12) {
                            out.push(BundleViolation::RightAction { e, g1: a1, g2: a2 });
                        }
                    }
                }
            }
        }
        for e in 0..n {
            for a in 0..gp.arrow_count() {
                let Some(ae) = self.left_act(a, e) else { continue };
                for b in 0..g.arrow_count() {
                    let lhs = self.right_act(ae, b);
                    let rhs = self.right_act(e, b).and_then(|eb| self.left_act(a, eb));
                    if self.right_act(e, b).is_some() && lhs != rhs {
                        out.push(BundleViolation::Commuting { gp: a, e, g: b });
                    }
                }
            }
        }
        for x in 0..g.object_count() {
            let fiber = self.fiber(x);
            if fiber.is_empty() {
                out.push(BundleViolation::SourceNotSurjective { object: x });
                continue;
            }
            let e0 = fiber[0];
            // principality: g' -> g'.e0 bijects arrows out of t(e0) with the fiber
            let mut hit = vec![0usize; self.len()];
            let mut ok = true;
            for a in 0..gp.arrow_count() {
                if gp.src(a) != self.t[e0] {
                    continue;
                }
                match self.left_act(a, e0) {
                    Some(ae) => hit[ae] += 1,
                    None => ok = false,
                }
            }
            if !ok
                || fiber.iter().any(|&e| hit[e] != 1)
                || hit.iter().enumerate().any(|(e, &h)| h > 0 && !fiber.contains(&e))
            {
                out.push(BundleViolation::NotPrincipal { object: x });
            }
        }
        out
    }

    pub fn is_valid(&self, g: &FiniteGroupoid, gp: &FiniteGroupoid) -> bool {
        self.validate(g, gp).is_empty()
    }

    /// A deterministic structural encoding; equal encodings mean equal
    /// labelled tables. Used for canonical-representative selection.
    pub fn encoding(&self) -> Vec<usize> {
        let mut enc = vec![self.len()];
        enc.extend_from_slice(&self.s);
        enc.extend_from_slice(&self.t);
        for (&(a, e), &v) in &self.left {
            enc.extend_from_slice(&[a, e, v]);
        }
        for (&(e, a), &v) in &self.right {
            enc.extend_from_slice(&[e, a, v]);
        }
        enc
    }

    /// Checks whether the right `G`-action makes this a principal bundle
    /// over the `G'` objects, and if so returns the inverse bundle (roles of
    /// the projections swapped, actions replaced by their opposites).
    pub fn invert(&self, g: &FiniteGroupoid, gp: &FiniteGroupoid) -> Option<Bundle> {
        for xp in 0..gp.object_count() {
            let fiber: Vec<usize> = (0..self.len()).filter(|&e| self.t[e] == xp).collect();
            if fiber.is_empty() {
                return None;
            }
            let e0 = fiber[0];
            let mut hit = vec![0usize; self.len()];
            for a in 0..g.arrow_count() {
                if g.tgt(a) != self.s[e0] {
                    continue;
                }
                match self.right_act(e0, a) {
                    Some(ea) => hit[ea] += 1,
                    None => return None,
                }
            }
            if fiber.iter().any(|&e| hit[e] != 1) {
                return None;
            }
            if hit.iter().enumerate().any(|(e, &h)| h > 0 && !fiber.contains(&e)) {
                return None;
            }
        }
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for e in 0..self.len() {
            for a in 0..g.arrow_count() {
                // left action of G on the inverse: a . e := e . a^{-1}
                if let Some(v) = self.right_act(e, g.inv(a)) {
                    left.insert((a, e), v);
                }
            }
            for a in 0..gp.arrow_count() {
                // right action of G' on the inverse: e . a := a^{-1} . e
                if let Some(v) = self.left_act(gp.inv(a), e) {
                    right.insert((e, a), v);
                }
            }
        }
        Some(Bundle::new(
            self.t.clone(),
            self.s.clone(),
            left,
            right,
            Some(self.labels.clone()),
        ))
    }
}

/// A bundle with a distinguished basepoint over a fixed object `star`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedBundle {
    pub bundle: Bundle,
    pub basepoint: usize,
    pub star: ObjId,
}

impl PointedBundle {
    pub fn new(bundle: Bundle, basepoint: usize, star: ObjId) -> Result<Self, BundleError> {
        if basepoint >= bundle.len() {
            return Err(BundleError::ElementOutOfRange(basepoint));
        }
        if bundle.s(basepoint) != star {
            return Err(BundleError::BasepointNotOverStar(basepoint, star));
        }
        Ok(PointedBundle { bundle, basepoint, star })
    }

    pub fn anchor(&self) -> ObjId {
        self.bundle.t(self.basepoint)
    }
}

/// Composite bundle `e2 o e1` of a `(G'', G')`-bundle with a `(G', G)`-
/// bundle: pairs over matching middle objects modulo shifting middle arrows
/// across the pair.
pub fn compose_bundles(
    e2: &Bundle,
    e1: &Bundle,
    gpp: &FiniteGroupoid,
    gp: &FiniteGroupoid,
    g: &FiniteGroupoid,
) -> Result<Bundle, BundleError> {
    let _ = gpp;
    let mut pairs = Vec::new();
    let mut pair_index = BTreeMap::new();
    for a in 0..e2.len() {
        for b in 0..e1.len() {
            if e2.s(a) == e1.t(b) {
                pair_index.insert((a, b), pairs.len());
                pairs.push((a, b));
            }
        }
    }
    let mut uf = UnionFind::new(pairs.len());
    // the middle arrow shifts across the pair: (a.m, b) ~ (a, m.b)
    for a in 0..e2.len() {
        for m in 0..gp.arrow_count() {
            let Some(am) = e2.right_act(a, m) else { continue };
            for b in 0..e1.len() {
                let Some(mb) = e1.left_act(m, b) else { continue };
                if let (Some(&i1), Some(&i2)) = (pair_index.get(&(am, b)), pair_index.get(&(a, mb)))
                {
                    uf.union(i1, i2);
                }
            }
        }
    }
    let mut class_of = vec![usize::MAX; pairs.len()];
    let mut reps = Vec::new();
    for i in 0..pairs.len() {
        let r = uf.find(i);
        if class_of[r] == usize::MAX {
            class_of[r] = reps.len();
            reps.push(r);
        }
        class_of[i] = class_of[r];
    }
    let s = reps.iter().map(|&r| e1.s(pairs[r].1)).collect();
    let t = reps.iter().map(|&r| e2.t(pairs[r].0)).collect();
    let labels = reps
        .iter()
        .map(|&r| format!("[{},{}]", e2.label(pairs[r].0), e1.label(pairs[r].1)))
        .collect();
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    for (ci, &r) in reps.iter().enumerate() {
        let (a, b) = pairs[r];
        for m in 0..gpp.arrow_count() {
            if let Some(ma) = e2.left_act(m, a) {
                left.insert((m, ci), class_of[pair_index[&(ma, b)]]);
            }
        }
        for m in 0..g.arrow_count() {
            if let Some(bm) = e1.right_act(b, m) {
                right.insert((ci, m), class_of[pair_index[&(a, bm)]]);
            }
        }
    }
    Ok(Bundle::new(s, t, left, right, Some(labels)))
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn unit_bundle_is_valid() {
        let a = fixtures::z2_path();
        let e = Bundle::unit(&a);
        assert!(e.validate(&a, &a).is_empty());
        assert_eq!(e.len(), 6);
    }

    #[test]
    fn deleting_left_entry_breaks_principality_or_domain() {
        let a = fixtures::z2_path();
        let mut e = Bundle::unit(&a);
        let (&(gp, el), _) = e.left.iter().next().unwrap();
        e.delete_left_entry(gp, el);
        let report = e.validate(&a, &a);
        assert!(report
            .iter()
            .any(|v| matches!(v, BundleViolation::LeftDomain { defined: false, .. })));
    }

    #[test]
    fn unit_bundle_inverts_to_itself() {
        let a = fixtures::z2_edge();
        let e = Bundle::unit(&a);
        let inv = e.invert(&a, &a).expect("unit bundle is a bibundle");
        assert!(inv.validate(&a, &a).is_empty());
        assert_eq!(inv.len(), e.len());
    }

    #[test]
    fn unit_composition_has_unit_size() {
        let a = fixtures::z2_edge();
        let e = Bundle::unit(&a);
        let c = compose_bundles(&e, &e, &a, &a, &a).unwrap();
        assert!(c.validate(&a, &a).is_empty());
        // G o G over itself collapses back to G
        assert_eq!(c.len(), e.len());
    }
}
