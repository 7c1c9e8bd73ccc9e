//! Finite groupoids over object graphs: explicit arrow sets with source,
//! target, unit, inverse, and a partial composition table.
//!
//! Arrows additionally carry a *sheet* label. Arrows in one sheet are the
//! finite stand-in for a local bisection (a continuous family of arrows
//! parametrized by their sources), so sheets have injective source maps.
//! Constructors that know the local structure (action groupoids,
//! localizations, restrictions, products) propagate sheets; raw table input
//! gets the conservative default of one sheet for the units and singleton
//! sheets elsewhere.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{ObjId, ObjectGraph};
use crate::group::FiniteGroup;

/// Index of an arrow in a [`FiniteGroupoid`].
pub type ArrowId = usize;
/// Sheet (local bisection) label.
pub type SheetId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("unknown object id {0}")]
    UnknownObject(ObjId),
    #[error("unknown arrow id {0}")]
    UnknownArrow(ArrowId),
    #[error("restriction to an empty object set")]
    EmptyRestriction,
    #[error("table sizes are inconsistent: {0}")]
    Shape(String),
    #[error("action is not a group action: {0}")]
    BadAction(String),
    #[error("action of element {0} does not preserve the object graph")]
    ActionNotGraphAutomorphism(usize),
    #[error("sheet {sheet} repeats source object {object}")]
    SheetSourceCollision { sheet: SheetId, object: ObjId },
}

/// One violated groupoid axiom, with the witnesses that broke it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupoidViolation {
    UnitEndpoints { object: ObjId, arrow: ArrowId },
    LeftUnitLaw { arrow: ArrowId },
    RightUnitLaw { arrow: ArrowId },
    CompDomain { g: ArrowId, h: ArrowId, defined: bool },
    CompEndpoints { g: ArrowId, h: ArrowId },
    Associativity { g: ArrowId, h: ArrowId, k: ArrowId },
    InverseEndpoints { arrow: ArrowId },
    InverseInvolution { arrow: ArrowId },
    InverseLaw { arrow: ArrowId },
}

impl fmt::Display for GroupoidViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupoidViolation::UnitEndpoints { object, arrow } => {
                write!(f, "unit arrow {arrow} of object {object} does not start and end there")
            }
            GroupoidViolation::LeftUnitLaw { arrow } => {
                write!(f, "left unit law fails at arrow {arrow}")
            }
            GroupoidViolation::RightUnitLaw { arrow } => {
                write!(f, "right unit law fails at arrow {arrow}")
            }
            GroupoidViolation::CompDomain { g, h, defined } => {
                if *defined {
                    write!(f, "composite ({g}, {h}) is defined despite mismatched endpoints")
                } else {
                    write!(f, "composite ({g}, {h}) is missing")
                }
            }
            GroupoidViolation::CompEndpoints { g, h } => {
                write!(f, "composite ({g}, {h}) has wrong endpoints")
            }
            GroupoidViolation::Associativity { g, h, k } => {
                write!(f, "associativity fails at the triple ({g}, {h}, {k})")
            }
            GroupoidViolation::InverseEndpoints { arrow } => {
                write!(f, "inverse of arrow {arrow} has wrong endpoints")
            }
            GroupoidViolation::InverseInvolution { arrow } => {
                write!(f, "inverse of inverse of arrow {arrow} differs from it")
            }
            GroupoidViolation::InverseLaw { arrow } => {
                write!(f, "arrow {arrow} composed with its inverse is not a unit")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupoid {
    base: ObjectGraph,
    src: Vec<ObjId>,
    tgt: Vec<ObjId>,
    labels: Vec<String>,
    unit: Vec<ArrowId>,
    inv: Vec<ArrowId>,
    comp: Vec<Option<ArrowId>>,
    sheet: Vec<SheetId>,
}

impl FiniteGroupoid {
    /// Assembles a groupoid from raw tables. Shapes are checked here;
    /// the axioms themselves are the business of [`Self::validate`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        base: ObjectGraph,
        src: Vec<ObjId>,
        tgt: Vec<ObjId>,
        labels: Option<Vec<String>>,
        unit: Vec<ArrowId>,
        inv: Vec<ArrowId>,
        comp_entries: &[(ArrowId, ArrowId, ArrowId)],
        sheet: Option<Vec<SheetId>>,
    ) -> Result<Self, GroupoidError> {
        let n_obj = base.len();
        let n = src.len();
        if tgt.len() != n {
            return Err(GroupoidError::Shape("src/tgt length mismatch".into()));
        }
        if unit.len() != n_obj {
            return Err(GroupoidError::Shape("one unit per object required".into()));
        }
        if inv.len() != n {
            return Err(GroupoidError::Shape("one inverse per arrow required".into()));
        }
        for &x in src.iter().chain(tgt.iter()) {
            if x >= n_obj {
                return Err(GroupoidError::UnknownObject(x));
            }
        }
        for &a in unit.iter().chain(inv.iter()) {
            if a >= n {
                return Err(GroupoidError::UnknownArrow(a));
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("a{i}")).collect());
        if labels.len() != n {
            return Err(GroupoidError::Shape("one label per arrow required".into()));
        }
        let mut comp = vec![None; n * n];
        for &(g, h, gh) in comp_entries {
            if g >= n || h >= n || gh >= n {
                return Err(GroupoidError::UnknownArrow(g.max(h).max(gh)));
            }
            comp[g * n + h] = Some(gh);
        }
        let sheet = match sheet {
            Some(s) => {
                if s.len() != n {
                    return Err(GroupoidError::Shape("one sheet per arrow required".into()));
                }
                s
            }
            None => default_sheets(&src, &tgt, &unit),
        };
        let g = FiniteGroupoid { base, src, tgt, labels, unit, inv, comp, sheet };
        g.check_sheets()?;
        Ok(g)
    }

    fn check_sheets(&self) -> Result<(), GroupoidError> {
        let mut seen: BTreeMap<(SheetId, ObjId), ArrowId> = BTreeMap::new();
        for a in 0..self.arrow_count() {
            if let Some(_) = seen.insert((self.sheet[a], self.src[a]), a) {
                return Err(GroupoidError::SheetSourceCollision {
                    sheet: self.sheet[a],
                    object: self.src[a],
                });
            }
        }
        Ok(())
    }

    /// The trivial groupoid on a single object `*`.
    pub fn point() -> Self {
        FiniteGroupoid::trivial(ObjectGraph::point())
    }

    /// A group as a one-object groupoid.
    pub fn from_group(g: &FiniteGroup) -> Self {
        let n = g.order();
        let mut comp = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                comp.push((a, b, g.mul(a, b)));
            }
        }
        FiniteGroupoid::from_parts(
            ObjectGraph::point(),
            vec![0; n],
            vec![0; n],
            Some((0..n).map(|a| g.label(a).to_string()).collect()),
            vec![g.identity()],
            (0..n).map(|a| g.inv(a)).collect(),
            &comp,
            None,
        )
        .expect("group tables form a groupoid")
    }

    /// The trivial groupoid on a graph: units only.
    pub fn trivial(base: ObjectGraph) -> Self {
        let n = base.len();
        let src: Vec<_> = (0..n).collect();
        let comp: Vec<_> = (0..n).map(|x| (x, x, x)).collect();
        let labels = (0..n).map(|x| format!("1_{}", base.label(x))).collect();
        FiniteGroupoid::from_parts(
            base,
            src.clone(),
            src.clone(),
            Some(labels),
            src.clone(),
            src,
            &comp,
            Some(vec![0; n]),
        )
        .unwrap()
    }

    /// Action groupoid of a group acting on an object graph. `act[g][x]` is
    /// the image of object `x` under group element `g`; every `act[g]` must
    /// be a graph automorphism and the table a genuine action.
    pub fn action_groupoid(
        gamma: &FiniteGroup,
        base: ObjectGraph,
        act: &[Vec<ObjId>],
    ) -> Result<Self, GroupoidError> {
        let ng = gamma.order();
        let nx = base.len();
        if act.len() != ng || act.iter().any(|row| row.len() != nx) {
            return Err(GroupoidError::BadAction("action table has wrong shape".into()));
        }
        for (g, row) in act.iter().enumerate() {
            let mut seen = vec![false; nx];
            for &y in row {
                if y >= nx {
                    return Err(GroupoidError::UnknownObject(y));
                }
                seen[y] = true;
            }
            if seen.iter().any(|&s| !s) {
                return Err(GroupoidError::ActionNotGraphAutomorphism(g));
            }
            for (a, b) in base.edges() {
                if !base.is_adjacent(row[a], row[b]) {
                    return Err(GroupoidError::ActionNotGraphAutomorphism(g));
                }
            }
        }
        for x in 0..nx {
            if act[gamma.identity()][x] != x {
                return Err(GroupoidError::BadAction("identity must act trivially".into()));
            }
        }
        for a in 0..ng {
            for b in 0..ng {
                for x in 0..nx {
                    if act[gamma.mul(a, b)][x] != act[a][act[b][x]] {
                        return Err(GroupoidError::BadAction(format!(
                            "action fails compatibility at ({a}, {b}, {x})"
                        )));
                    }
                }
            }
        }
        // arrow (g, x): x -> g.x, id = g * nx + x
        let n = ng * nx;
        let mut src = vec![0; n];
        let mut tgt = vec![0; n];
        let mut labels = vec![String::new(); n];
        let mut sheet = vec![0; n];
        for g in 0..ng {
            for x in 0..nx {
                let a = g * nx + x;
                src[a] = x;
                tgt[a] = act[g][x];
                labels[a] = format!("({},{})", gamma.label(g), base.label(x));
                sheet[a] = g;
            }
        }
        let unit: Vec<_> = (0..nx).collect();
        let inv: Vec<_> = (0..n)
            .map(|a| {
                let (g, x) = (a / nx, a % nx);
                gamma.inv(g) * nx + act[g][x]
            })
            .collect();
        let mut comp = Vec::new();
        for g2 in 0..ng {
            for g1 in 0..ng {
                for x in 0..nx {
                    // (g2, g1.x) o (g1, x) = (g2 g1, x)
                    let h = g1 * nx + x;
                    let g = g2 * nx + act[g1][x];
                    comp.push((g, h, gamma.mul(g2, g1) * nx + x));
                }
            }
        }
        FiniteGroupoid::from_parts(base, src, tgt, Some(labels), unit, inv, &comp, Some(sheet))
    }

    pub fn base(&self) -> &ObjectGraph {
        &self.base
    }

    pub fn object_count(&self) -> usize {
        self.base.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.src.len()
    }

    pub fn src(&self, a: ArrowId) -> ObjId {
        self.src[a]
    }

    pub fn tgt(&self, a: ArrowId) -> ObjId {
        self.tgt[a]
    }

    pub fn unit(&self, x: ObjId) -> ArrowId {
        self.unit[x]
    }

    pub fn is_unit(&self, a: ArrowId) -> bool {
        self.unit[self.src[a]] == a
    }

    pub fn inv(&self, a: ArrowId) -> ArrowId {
        self.inv[a]
    }

    /// `g` after `h`: defined exactly when `src(g) = tgt(h)`.
    pub fn compose(&self, g: ArrowId, h: ArrowId) -> Option<ArrowId> {
        self.comp[g * self.arrow_count() + h]
    }

    pub fn sheet(&self, a: ArrowId) -> SheetId {
        self.sheet[a]
    }

    pub fn sheet_count(&self) -> usize {
        self.sheet.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// The arrow in the sheet of `a` whose source is `x`, when the sheet
    /// extends that far. This is the unique-continuation operator for
    /// arrows along the object graph.
    pub fn extend_in_sheet(&self, a: ArrowId, x: ObjId) -> Option<ArrowId> {
        let s = self.sheet[a];
        (0..self.arrow_count()).find(|&b| self.sheet[b] == s && self.src[b] == x)
    }

    pub fn arrow_label(&self, a: ArrowId) -> &str {
        &self.labels[a]
    }

    pub fn arrows_from(&self, x: ObjId) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrow_count()).filter(move |&a| self.src[a] == x)
    }

    pub fn arrows_between(&self, x: ObjId, y: ObjId) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrow_count()).filter(move |&a| self.src[a] == x && self.tgt[a] == y)
    }

    /// Overwrite one composition entry. Intended for fault-injection tests
    /// and raw table assembly; the result may well fail [`Self::validate`].
    pub fn set_comp_entry(&mut self, g: ArrowId, h: ArrowId, value: Option<ArrowId>) {
        let n = self.arrow_count();
        self.comp[g * n + h] = value;
    }

    pub fn set_inv_entry(&mut self, a: ArrowId, value: ArrowId) {
        self.inv[a] = value;
    }

    pub fn set_unit_entry(&mut self, x: ObjId, value: ArrowId) {
        self.unit[x] = value;
    }

    /// Checks every groupoid axiom and reports all violations found;
    /// an empty report means the tables form a groupoid.
    pub fn validate(&self) -> Vec<GroupoidViolation> {
        let mut out = Vec::new();
        let n = self.arrow_count();
        for x in 0..self.object_count() {
            let u = self.unit[x];
            if self.src[u] != x || self.tgt[u] != x {
                out.push(GroupoidViolation::UnitEndpoints { object: x, arrow: u });
            }
        }
        for g in 0..n {
            for h in 0..n {
                let composable = self.src[g] == self.tgt[h];
                match self.compose(g, h) {
                    Some(gh) => {
                        if !composable {
                            out.push(GroupoidViolation::CompDomain { g, h, defined: true });
                        } else if self.src[gh] != self.src[h] || self.tgt[gh] != self.tgt[g] {
                            out.push(GroupoidViolation::CompEndpoints { g, h });
                        }
                    }
                    None => {
                        if composable {
                            out.push(GroupoidViolation::CompDomain { g, h, defined: false });
                        }
                    }
                }
            }
        }
        for g in 0..n {
            if self.compose(g, self.unit[self.src[g]]) != Some(g) {
                out.push(GroupoidViolation::RightUnitLaw { arrow: g });
            }
            if self.compose(self.unit[self.tgt[g]], g) != Some(g) {
                out.push(GroupoidViolation::LeftUnitLaw { arrow: g });
            }
        }
        for g in 0..n {
            let gi = self.inv[g];
            if self.src[gi] != self.tgt[g] || self.tgt[gi] != self.src[g] {
                out.push(GroupoidViolation::InverseEndpoints { arrow: g });
                continue;
            }
            if self.inv[gi] != g {
                out.push(GroupoidViolation::InverseInvolution { arrow: g });
            }
            if self.compose(g, gi) != Some(self.unit[self.tgt[g]])
                || self.compose(gi, g) != Some(self.unit[self.src[g]])
            {
                out.push(GroupoidViolation::InverseLaw { arrow: g });
            }
        }
        for g in 0..n {
            for h in 0..n {
                if self.src[g] != self.tgt[h] {
                    continue;
                }
                let Some(gh) = self.compose(g, h) else { continue };
                for k in 0..n {
                    if self.src[h] != self.tgt[k] {
                        continue;
                    }
                    let (Some(hk), Some(gh_k)) = (self.compose(h, k), self.compose(gh, k)) else {
                        continue;
                    };
                    if self.compose(g, hk) != Some(gh_k) {
                        out.push(GroupoidViolation::Associativity { g, h, k });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Orbit partition of the objects: `x` and `y` share a block exactly
    /// when some arrow connects them. Blocks are sorted by least member.
    pub fn orbits(&self) -> Vec<Vec<ObjId>> {
        let mut parent: Vec<usize> = (0..self.object_count()).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for a in 0..self.arrow_count() {
            let (rs, rt) = (find(&mut parent, self.src[a]), find(&mut parent, self.tgt[a]));
            if rs != rt {
                parent[rs.max(rt)] = rs.min(rt);
            }
        }
        let mut blocks: BTreeMap<usize, Vec<ObjId>> = BTreeMap::new();
        for x in 0..self.object_count() {
            let r = find(&mut parent, x);
            blocks.entry(r).or_default().push(x);
        }
        blocks.into_values().collect()
    }

    /// Orbit block index per object, blocks numbered as in [`Self::orbits`].
    pub fn orbit_index(&self) -> Vec<usize> {
        let orbits = self.orbits();
        let mut idx = vec![0; self.object_count()];
        for (i, block) in orbits.iter().enumerate() {
            for &x in block {
                idx[x] = i;
            }
        }
        idx
    }

    /// Whether the groupoid is connected: a single orbit.
    pub fn is_connected(&self) -> bool {
        self.orbits().len() <= 1
    }

    /// The isotropy group at `x`: all loops at `x` under composition.
    pub fn isotropy(&self, x: ObjId) -> Result<IsotropyGroup, GroupoidError> {
        if x >= self.object_count() {
            return Err(GroupoidError::UnknownObject(x));
        }
        let arrows: Vec<ArrowId> = (0..self.arrow_count())
            .filter(|&a| self.src[a] == x && self.tgt[a] == x)
            .collect();
        let index = |a: ArrowId| arrows.iter().position(|&b| b == a).unwrap();
        let mul = arrows
            .iter()
            .map(|&g| arrows.iter().map(|&h| index(self.compose(g, h).unwrap())).collect())
            .collect();
        let labels = arrows.iter().map(|&a| self.labels[a].clone()).collect();
        let group = FiniteGroup::from_table(mul, Some(labels))
            .map_err(|e| GroupoidError::Shape(format!("isotropy at {x} is not a group: {e}")))?;
        Ok(IsotropyGroup { arrows, group })
    }

    /// Full subgroupoid on the (deduplicated, sorted) object subset, plus
    /// the object and arrow inclusions into the original groupoid.
    pub fn restrict(&self, objects: &[ObjId]) -> Result<Restriction, GroupoidError> {
        if objects.is_empty() {
            return Err(GroupoidError::EmptyRestriction);
        }
        let mut keep: Vec<ObjId> = objects.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&x) = keep.iter().find(|&&x| x >= self.object_count()) {
            return Err(GroupoidError::UnknownObject(x));
        }
        let obj_of = |x: ObjId| keep.iter().position(|&y| y == x);
        let mut base = ObjectGraph::new(keep.iter().map(|&x| self.base.label(x).to_string()).collect())
            .expect("labels stay unique under restriction");
        for (a, b) in self.base.edges() {
            if let (Some(i), Some(j)) = (obj_of(a), obj_of(b)) {
                base.add_edge(i, j).unwrap();
            }
        }
        let arrow_incl: Vec<ArrowId> = (0..self.arrow_count())
            .filter(|&a| obj_of(self.src[a]).is_some() && obj_of(self.tgt[a]).is_some())
            .collect();
        let arrow_of: BTreeMap<ArrowId, usize> =
            arrow_incl.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let src = arrow_incl.iter().map(|&a| obj_of(self.src[a]).unwrap()).collect();
        let tgt = arrow_incl.iter().map(|&a| obj_of(self.tgt[a]).unwrap()).collect();
        let labels = arrow_incl.iter().map(|&a| self.labels[a].clone()).collect();
        let unit = keep.iter().map(|&x| arrow_of[&self.unit[x]]).collect();
        let inv = arrow_incl.iter().map(|&a| arrow_of[&self.inv[a]]).collect();
        let mut comp = Vec::new();
        for (gi, &g) in arrow_incl.iter().enumerate() {
            for (hi, &h) in arrow_incl.iter().enumerate() {
                if let Some(gh) = self.compose(g, h) {
                    comp.push((gi, hi, arrow_of[&gh]));
                }
            }
        }
        let sheet = compact_sheets(arrow_incl.iter().map(|&a| self.sheet[a]));
        let groupoid = FiniteGroupoid::from_parts(
            base,
            src,
            tgt,
            Some(labels),
            unit,
            inv,
            &comp,
            Some(sheet),
        )?;
        Ok(Restriction { groupoid, obj_incl: keep, arrow_incl })
    }

    /// Product groupoid: objects carry the strong-product graph and arrows
    /// compose coordinatewise.
    pub fn product(a: &FiniteGroupoid, b: &FiniteGroupoid) -> FiniteGroupoid {
        let (na_obj, nb_obj) = (a.object_count(), b.object_count());
        let mut base = ObjectGraph::new(
            (0..na_obj * nb_obj)
                .map(|i| format!("({},{})", a.base.label(i / nb_obj), b.base.label(i % nb_obj)))
                .collect(),
        )
        .unwrap();
        for x in 0..na_obj * nb_obj {
            for y in (x + 1)..na_obj * nb_obj {
                let (xa, xb) = (x / nb_obj, x % nb_obj);
                let (ya, yb) = (y / nb_obj, y % nb_obj);
                if a.base.is_close(xa, ya) && b.base.is_close(xb, yb) {
                    base.add_edge(x, y).unwrap();
                }
            }
        }
        let (na, nb) = (a.arrow_count(), b.arrow_count());
        let n = na * nb;
        let mut src = vec![0; n];
        let mut tgt = vec![0; n];
        let mut labels = vec![String::new(); n];
        let mut sheet = vec![0; n];
        for ga in 0..na {
            for gb in 0..nb {
                let g = ga * nb + gb;
                src[g] = a.src[ga] * nb_obj + b.src[gb];
                tgt[g] = a.tgt[ga] * nb_obj + b.tgt[gb];
                labels[g] = format!("({},{})", a.labels[ga], b.labels[gb]);
                sheet[g] = a.sheet[ga] * b.sheet_count().max(1) + b.sheet[gb];
            }
        }
        let unit = (0..na_obj * nb_obj)
            .map(|x| a.unit[x / nb_obj] * nb + b.unit[x % nb_obj])
            .collect();
        let inv = (0..n).map(|g| a.inv[g / nb] * nb + b.inv[g % nb]).collect();
        let mut comp = Vec::new();
        for g in 0..n {
            for h in 0..n {
                let (ga, gb) = (g / nb, g % nb);
                let (ha, hb) = (h / nb, h % nb);
                if let (Some(ca), Some(cb)) = (a.compose(ga, ha), b.compose(gb, hb)) {
                    comp.push((g, h, ca * nb + cb));
                }
            }
        }
        FiniteGroupoid::from_parts(base, src, tgt, Some(labels), unit, inv, &comp, Some(sheet))
            .expect("product of groupoids is well formed")
    }

    /// Exhaustive isomorphism search (objects, arrows, and base adjacency).
    /// Intended for small fixtures.
    pub fn find_isomorphism(&self, other: &FiniteGroupoid) -> Option<GroupoidIso> {
        if self.object_count() != other.object_count()
            || self.arrow_count() != other.arrow_count()
            || self.base.edge_count() != other.base.edge_count()
        {
            return None;
        }
        let mut obj_map = vec![usize::MAX; self.object_count()];
        let mut used = vec![false; self.object_count()];
        self.iso_objects(other, &mut obj_map, &mut used, 0)
    }

    fn iso_objects(
        &self,
        other: &FiniteGroupoid,
        obj_map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        k: usize,
    ) -> Option<GroupoidIso> {
        if k == self.object_count() {
            return self.iso_arrows(other, obj_map);
        }
        'cand: for y in 0..other.object_count() {
            if used[y] {
                continue;
            }
            if self.base.neighbors(k).len() != other.base.neighbors(y).len() {
                continue;
            }
            let iso_here = (0..self.arrow_count())
                .filter(|&a| self.src[a] == k && self.tgt[a] == k)
                .count();
            let iso_there = (0..other.arrow_count())
                .filter(|&a| other.src[a] == y && other.tgt[a] == y)
                .count();
            if iso_here != iso_there {
                continue;
            }
            for x in 0..k {
                if self.base.is_adjacent(k, x) != other.base.is_adjacent(y, obj_map[x]) {
                    continue 'cand;
                }
                let here = self.arrows_between(x, k).count();
                let there = other.arrows_between(obj_map[x], y).count();
                if here != there {
                    continue 'cand;
                }
            }
            obj_map[k] = y;
            used[y] = true;
            if let Some(iso) = self.iso_objects(other, obj_map, used, k + 1) {
                return Some(iso);
            }
            used[y] = false;
            obj_map[k] = usize::MAX;
        }
        None
    }

    fn iso_arrows(&self, other: &FiniteGroupoid, obj_map: &[usize]) -> Option<GroupoidIso> {
        let n = self.arrow_count();
        let mut arrow_map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for x in 0..self.object_count() {
            arrow_map[self.unit[x]] = other.unit[obj_map[x]];
            used[other.unit[obj_map[x]]] = true;
        }
        if self.iso_arrows_rec(other, obj_map, &mut arrow_map, &mut used, 0) {
            Some(GroupoidIso { obj_map: obj_map.to_vec(), arrow_map })
        } else {
            None
        }
    }

    fn iso_arrows_rec(
        &self,
        other: &FiniteGroupoid,
        obj_map: &[usize],
        arrow_map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        mut g: usize,
    ) -> bool {
        let n = self.arrow_count();
        while g < n && arrow_map[g] != usize::MAX {
            g += 1;
        }
        if g == n {
            // all assigned; final full composition check
            for a in 0..n {
                for b in 0..n {
                    match (self.compose(a, b), other.compose(arrow_map[a], arrow_map[b])) {
                        (Some(c), Some(c2)) if arrow_map[c] == c2 => {}
                        (None, None) => {}
                        _ => return false,
                    }
                }
            }
            return true;
        }
        'cand: for img in 0..n {
            if used[img]
                || other.src[img] != obj_map[self.src[g]]
                || other.tgt[img] != obj_map[self.tgt[g]]
            {
                continue;
            }
            // inverses must pair up
            let gi = self.inv[g];
            if arrow_map[gi] != usize::MAX && arrow_map[gi] != other.inv[img] {
                continue;
            }
            // partial composition consistency with already-assigned arrows
            for a in 0..n {
                if arrow_map[a] == usize::MAX {
                    continue;
                }
                for (x, y, xi, yi) in [
                    (g, a, img, arrow_map[a]),
                    (a, g, arrow_map[a], img),
                ] {
                    if let Some(c) = self.compose(x, y) {
                        match other.compose(xi, yi) {
                            Some(c2) => {
                                if arrow_map[c] != usize::MAX && arrow_map[c] != c2 {
                                    continue 'cand;
                                }
                            }
                            None => continue 'cand,
                        }
                    }
                }
            }
            arrow_map[g] = img;
            used[img] = true;
            let also_inv = if arrow_map[gi] == usize::MAX && gi != g {
                arrow_map[gi] = other.inv[img];
                used[other.inv[img]] = true;
                true
            } else {
                false
            };
            if self.iso_arrows_rec(other, obj_map, arrow_map, used, g + 1) {
                return true;
            }
            if also_inv {
                used[arrow_map[gi]] = false;
                arrow_map[gi] = usize::MAX;
            }
            used[img] = false;
            arrow_map[g] = usize::MAX;
        }
        false
    }
}

fn default_sheets(src: &[ObjId], _tgt: &[ObjId], unit: &[ArrowId]) -> Vec<SheetId> {
    let mut sheet = vec![0; src.len()];
    let mut next = 1;
    let units: Vec<bool> = {
        let mut u = vec![false; src.len()];
        for &a in unit {
            u[a] = true;
        }
        u
    };
    for a in 0..src.len() {
        if !units[a] {
            sheet[a] = next;
            next += 1;
        }
    }
    sheet
}

fn compact_sheets(iter: impl Iterator<Item = SheetId>) -> Vec<SheetId> {
    let raw: Vec<SheetId> = iter.collect();
    let mut seen: BTreeMap<SheetId, SheetId> = BTreeMap::new();
    let mut next = 0;
    raw.iter()
        .map(|&s| {
            *seen.entry(s).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Isotropy group at an object: the loop arrows plus their group structure.
#[derive(Debug, Clone)]
pub struct IsotropyGroup {
    pub arrows: Vec<ArrowId>,
    pub group: FiniteGroup,
}

/// Result of restricting a groupoid to an object subset.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub groupoid: FiniteGroupoid,
    /// Object of the original groupoid each restricted object maps to.
    pub obj_incl: Vec<ObjId>,
    /// Arrow of the original groupoid each restricted arrow maps to.
    pub arrow_incl: Vec<ArrowId>,
}

/// An isomorphism of finite groupoids, as object and arrow bijections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidIso {
    pub obj_map: Vec<ObjId>,
    pub arrow_map: Vec<ArrowId>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_a_is_valid() {
        let a = fixtures::z2_path();
        assert!(a.validate().is_empty());
        assert_eq!(a.arrow_count(), 6);
    }

    #[test]
    fn corrupted_composition_is_detected_with_triple() {
        let mut a = fixtures::z2_path();
        // find a non-unit composable pair and break it
        let (g, h, gh) = (0..a.arrow_count())
            .flat_map(|g| (0..a.arrow_count()).map(move |h| (g, h)))
            .find_map(|(g, h)| {
                a.compose(g, h).map(|gh| (g, h, gh)).filter(|&(g, h, _)| {
                    !a.is_unit(g) && !a.is_unit(h)
                })
            })
            .unwrap();
        let other = (0..a.arrow_count())
            .find(|&k| k != gh && a.src(k) == a.src(gh) && a.tgt(k) == a.tgt(gh));
        if let Some(other) = other {
            a.set_comp_entry(g, h, Some(other));
            let report = a.validate();
            assert!(!report.is_empty());
            assert!(report
                .iter()
                .any(|v| matches!(v, GroupoidViolation::Associativity { .. })));
        }
    }

    #[test]
    fn point_groupoid_trivial() {
        let pt = FiniteGroupoid::point();
        assert!(pt.validate().is_empty());
        assert_eq!(pt.orbits(), vec![vec![0]]);
        assert_eq!(pt.isotropy(0).unwrap().group.order(), 1);
    }

    #[test]
    fn fixture_a_orbits_and_isotropy() {
        let a = fixtures::z2_path();
        // objects: 0 = "-1", 1 = "0", 2 = "1"
        assert_eq!(a.orbits(), vec![vec![0, 2], vec![1]]);
        assert_eq!(a.isotropy(1).unwrap().group.order(), 2);
        assert_eq!(a.isotropy(2).unwrap().group.order(), 1);
        assert!(a.isotropy(9).is_err());
    }

    #[test]
    fn z3_triangle_counts() {
        let g = fixtures::z3_triangle();
        assert!(g.validate().is_empty());
        assert_eq!(g.arrow_count(), 9);
        assert_eq!(g.orbits().len(), 1);
        for x in 0..3 {
            assert_eq!(g.isotropy(x).unwrap().group.order(), 1);
        }
    }

    #[test]
    fn trivial_action_gives_trivial_groupoid() {
        let base = ObjectGraph::path(&["a", "b"]);
        let gp = FiniteGroup::trivial();
        let g = FiniteGroupoid::action_groupoid(&gp, base.clone(), &[vec![0, 1]]).unwrap();
        let t = FiniteGroupoid::trivial(base);
        assert!(g.find_isomorphism(&t).is_some());
    }

    #[test]
    fn action_must_preserve_edges() {
        // swap on a path of 3 that breaks adjacency
        let base = ObjectGraph::path(&["a", "b", "c"]);
        let c2 = FiniteGroup::cyclic(2);
        let res = FiniteGroupoid::action_groupoid(&c2, base, &[vec![0, 1, 2], vec![1, 0, 2]]);
        assert!(matches!(res, Err(GroupoidError::ActionNotGraphAutomorphism(1))));
    }

    #[test]
    fn restriction_keeps_structure() {
        let a = fixtures::z2_path();
        let r = a.restrict(&[1, 2]).unwrap();
        assert!(r.groupoid.validate().is_empty());
        assert_eq!(r.groupoid.object_count(), 2);
        // loops at "0" survive, negation arrows do not
        assert_eq!(r.groupoid.arrow_count(), 3);
        assert!(a.restrict(&[]).is_err());
    }

    #[test]
    fn product_with_point_is_identity_like() {
        let a = fixtures::z2_path();
        let p = FiniteGroupoid::product(&FiniteGroupoid::point(), &a);
        assert!(p.validate().is_empty());
        assert!(p.find_isomorphism(&a).is_some());
    }

    #[test]
    fn self_iso_exists() {
        let g = fixtures::z3_triangle();
        let iso = g.find_isomorphism(&g).unwrap();
        assert_eq!(iso.obj_map.len(), 3);
    }
}
