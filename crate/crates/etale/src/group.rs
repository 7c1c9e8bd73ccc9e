//! Finite groups given by explicit multiplication tables, plus the brute
//! force structure theory the extension machinery leans on: automorphism
//! groups, inner/outer quotients, and homomorphism enumeration.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not square (row {0} has wrong length)")]
    RaggedTable(usize),
    #[error("table entry {0} out of range")]
    EntryOutOfRange(usize),
    #[error("no identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("unknown named group {0:?}")]
    UnknownName(String),
}

/// A finite group as a validated multiplication table. Element 0 is always
/// the identity after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Validates the table and normalizes so the identity is element 0.
    pub fn from_table(mut mul: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let n = mul.len();
        for (i, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::RaggedTable(i));
            }
            for &e in row {
                if e >= n {
                    return Err(GroupError::EntryOutOfRange(e));
                }
            }
        }
        let id = (0..n)
            .find(|&e| (0..n).all(|g| mul[e][g] == g && mul[g][e] == g))
            .ok_or(GroupError::NoIdentity)?;
        let mut labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("g{i}")).collect());
        if id != 0 {
            // swap element id <-> 0 throughout
            let swap = |x: usize| {
                if x == id {
                    0
                } else if x == 0 {
                    id
                } else {
                    x
                }
            };
            let mut newmul = vec![vec![0; n]; n];
            for a in 0..n {
                for b in 0..n {
                    newmul[swap(a)][swap(b)] = swap(mul[a][b]);
                }
            }
            mul = newmul;
            labels.swap(0, id);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a][b] == 0 && mul[b][a] == 0)
                .ok_or(GroupError::NoInverse(a))?;
        }
        Ok(FiniteGroup { mul, inv, labels })
    }

    pub fn trivial() -> Self {
        FiniteGroup::from_table(vec![vec![0]], Some(vec!["e".to_string()])).unwrap()
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let labels = (0..n).map(|i| if i == 0 { "e".to_string() } else { format!("r{i}") }).collect();
        FiniteGroup::from_table(mul, Some(labels)).unwrap()
    }

    /// Dihedral group of order `2n`: elements `i < n` are rotations, `n + i`
    /// are reflections.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 1);
        let m = 2 * n;
        let mut mul = vec![vec![0; m]; m];
        for a in 0..m {
            for b in 0..m {
                let (ra, fa) = (a % n, a >= n);
                let (rb, fb) = (b % n, b >= n);
                // rotation part of (a*b), with a acting first on the right
                let r = if fa { (ra + n - rb) % n } else { (ra + rb) % n };
                mul[a][b] = r + if fa ^ fb { n } else { 0 };
            }
        }
        let labels = (0..m)
            .map(|i| {
                if i == 0 {
                    "e".to_string()
                } else if i < n {
                    format!("r{i}")
                } else {
                    format!("s{}", i - n)
                }
            })
            .collect();
        FiniteGroup::from_table(mul, Some(labels)).unwrap()
    }

    /// Symmetric group on `n` letters, `n <= 4`, elements in lexicographic
    /// permutation order.
    pub fn symmetric(n: usize) -> Self {
        assert!((1..=4).contains(&n));
        let perms = permutations(n);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let mul = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let c: Vec<usize> = (0..n).map(|i| a[b[i]]).collect();
                        index(&c)
                    })
                    .collect()
            })
            .collect();
        let labels = perms.iter().map(|p| format!("p{}", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))).collect();
        FiniteGroup::from_table(mul, Some(labels)).unwrap()
    }

    pub fn klein() -> Self {
        FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2))
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (n, m) = (a.order(), b.order());
        let mul = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| {
                        let (x1, x2) = (x / m, x % m);
                        let (y1, y2) = (y / m, y % m);
                        a.mul(x1, y1) * m + b.mul(x2, y2)
                    })
                    .collect()
            })
            .collect();
        let labels = (0..n * m)
            .map(|x| format!("({},{})", a.label(x / m), b.label(x % m)))
            .collect();
        FiniteGroup::from_table(mul, Some(labels)).unwrap()
    }

    /// Built-in groups by name: `trivial`, `cyclic n`, `dihedral n`,
    /// `symmetric n`, `klein`.
    pub fn named(name: &str) -> Result<Self, GroupError> {
        let parts: Vec<&str> = name.split_whitespace().collect();
        match parts.as_slice() {
            ["trivial"] => Ok(FiniteGroup::trivial()),
            ["klein"] => Ok(FiniteGroup::klein()),
            ["cyclic", n] => n
                .parse()
                .map(FiniteGroup::cyclic)
                .map_err(|_| GroupError::UnknownName(name.to_string())),
            ["dihedral", n] => n
                .parse()
                .map(FiniteGroup::dihedral)
                .map_err(|_| GroupError::UnknownName(name.to_string())),
            ["symmetric", n] => {
                let n: usize = n.parse().map_err(|_| GroupError::UnknownName(name.to_string()))?;
                if (1..=4).contains(&n) {
                    Ok(FiniteGroup::symmetric(n))
                } else {
                    Err(GroupError::UnknownName(name.to_string()))
                }
            }
            _ => Err(GroupError::UnknownName(name.to_string())),
        }
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn center(&self) -> Vec<usize> {
        (0..self.order())
            .filter(|&z| (0..self.order()).all(|g| self.mul(z, g) == self.mul(g, z)))
            .collect()
    }

    /// A small generating set, found greedily, together with a word witness
    /// `defs[x] = (y, g)` meaning `x = y * gens[g]` (identity has no witness).
    pub fn generating_set(&self) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
        let n = self.order();
        let mut gens: Vec<usize> = Vec::new();
        let mut reached = vec![false; n];
        let mut defs: Vec<Option<(usize, usize)>> = vec![None; n];
        reached[0] = true;
        let mut count = 1;
        while count < n {
            let g = (0..n).find(|&g| !reached[g]).unwrap();
            let gi = gens.len();
            gens.push(g);
            // close under right multiplication by the new generator set
            let mut changed = true;
            while changed {
                changed = false;
                for x in 0..n {
                    if !reached[x] {
                        continue;
                    }
                    for (k, &h) in gens.iter().enumerate() {
                        let y = self.mul(x, h);
                        if !reached[y] {
                            reached[y] = true;
                            defs[y] = Some((x, k));
                            count += 1;
                            changed = true;
                        }
                    }
                }
            }
            let _ = gi;
        }
        (gens, defs)
    }

    /// All homomorphisms into `target`, each as an image vector.
    pub fn homomorphisms(&self, target: &FiniteGroup) -> Vec<Vec<usize>> {
        let (gens, defs) = self.generating_set();
        let mut out = Vec::new();
        let mut images = vec![usize::MAX; gens.len()];
        self.hom_rec(target, &gens, &defs, &mut images, 0, &mut out, false);
        out
    }

    /// All isomorphisms onto `target` (empty when none exists).
    pub fn isomorphisms(&self, target: &FiniteGroup) -> Vec<Vec<usize>> {
        if self.order() != target.order() {
            return Vec::new();
        }
        let (gens, defs) = self.generating_set();
        let mut out = Vec::new();
        let mut images = vec![usize::MAX; gens.len()];
        self.hom_rec(target, &gens, &defs, &mut images, 0, &mut out, true);
        out
    }

    pub fn is_isomorphic(&self, target: &FiniteGroup) -> bool {
        if self.order() != target.order() {
            return false;
        }
        !self.isomorphisms(target).is_empty()
    }

    fn hom_rec(
        &self,
        target: &FiniteGroup,
        gens: &[usize],
        defs: &[Option<(usize, usize)>],
        images: &mut Vec<usize>,
        k: usize,
        out: &mut Vec<Vec<usize>>,
        bijective_only: bool,
    ) {
        if k == gens.len() {
            if let Some(map) = self.extend_hom(target, gens, defs, images, bijective_only) {
                out.push(map);
            }
            return;
        }
        let ord = self.element_order(gens[k]);
        for img in 0..target.order() {
            if ord % target.element_order(img) != 0 {
                continue;
            }
            images[k] = img;
            self.hom_rec(target, gens, defs, images, k + 1, out, bijective_only);
        }
        images[k] = usize::MAX;
    }

    fn extend_hom(
        &self,
        target: &FiniteGroup,
        _gens: &[usize],
        defs: &[Option<(usize, usize)>],
        images: &[usize],
        bijective_only: bool,
    ) -> Option<Vec<usize>> {
        let n = self.order();
        let mut map = vec![usize::MAX; n];
        map[0] = 0;
        // defs give each element as (earlier element) * generator, so one pass
        // in discovery order fills the map
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| discover_depth(defs, x));
        for &x in &order {
            if let Some((y, k)) = defs[x] {
                map[x] = target.mul(map[y], images[k]);
            }
        }
        for a in 0..n {
            for b in 0..n {
                if map[self.mul(a, b)] != target.mul(map[a], map[b]) {
                    return None;
                }
            }
        }
        if bijective_only {
            let distinct: BTreeSet<usize> = map.iter().copied().collect();
            if distinct.len() != n {
                return None;
            }
        }
        Some(map)
    }

    /// Automorphisms as image vectors, in lexicographic order.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        self.isomorphisms(self)
    }

    /// Conjugation by `g` as an image vector.
    pub fn inner_automorphism(&self, g: usize) -> Vec<usize> {
        (0..self.order()).map(|x| self.conjugate(g, x)).collect()
    }

    /// The automorphism group as a table group, plus the list identifying
    /// element `i` with `autos[i]`.
    pub fn automorphism_group(&self) -> (FiniteGroup, Vec<Vec<usize>>) {
        let autos = self.automorphisms();
        let index = |a: &Vec<usize>| autos.iter().position(|b| b == a).unwrap();
        let mul = autos
            .iter()
            .map(|a| {
                autos
                    .iter()
                    .map(|b| {
                        let c: Vec<usize> = (0..self.order()).map(|x| a[b[x]]).collect();
                        index(&c)
                    })
                    .collect()
            })
            .collect();
        let labels = (0..autos.len()).map(|i| format!("aut{i}")).collect();
        (FiniteGroup::from_table(mul, Some(labels)).unwrap(), autos)
    }
}

fn discover_depth(defs: &[Option<(usize, usize)>], mut x: usize) -> usize {
    let mut d = 0;
    while let Some((y, _)) = defs[x] {
        x = y;
        d += 1;
    }
    d
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_group_structure() {
        let g = FiniteGroup::cyclic(4);
        assert_eq!(g.order(), 4);
        assert_eq!(g.mul(3, 2), 1);
        assert_eq!(g.inv(1), 3);
        assert_eq!(g.element_order(1), 4);
        assert!(g.is_abelian());
    }

    #[test]
    fn dihedral_structure() {
        let d3 = FiniteGroup::dihedral(3);
        assert_eq!(d3.order(), 6);
        assert!(!d3.is_abelian());
        assert!(d3.is_isomorphic(&FiniteGroup::symmetric(3)));
        assert_eq!(d3.center(), vec![0]);
    }

    #[test]
    fn s3_automorphisms_are_inner() {
        let s3 = FiniteGroup::symmetric(3);
        let autos = s3.automorphisms();
        assert_eq!(autos.len(), 6);
        let inner: BTreeSet<Vec<usize>> =
            (0..6).map(|g| s3.inner_automorphism(g)).collect();
        assert_eq!(inner.len(), 6);
    }

    #[test]
    fn homs_c2_to_c4() {
        let c2 = FiniteGroup::cyclic(2);
        let c4 = FiniteGroup::cyclic(4);
        let homs = c2.homomorphisms(&c4);
        // image of the generator must square to 0: {0, 2}
        assert_eq!(homs.len(), 2);
    }

    #[test]
    fn klein_not_cyclic() {
        assert!(!FiniteGroup::klein().is_isomorphic(&FiniteGroup::cyclic(4)));
        let (aut, _) = FiniteGroup::klein().automorphism_group();
        assert_eq!(aut.order(), 6);
        assert!(aut.is_isomorphic(&FiniteGroup::symmetric(3)));
    }

    #[test]
    fn normalizes_identity_to_zero() {
        // Z/2 with identity at index 1
        let g = FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]], None).unwrap();
        assert_eq!(g.identity(), 0);
        assert_eq!(g.mul(1, 1), 0);
    }
}
