//! Isometries of the model geometries and word enumeration of finitely
//! generated isometry groups. Elements are matrix-plus-translation pairs
//! with generator-word provenance; groups are enumerated breadth first up
//! to a word-length bound and deduplicated on a rounded-entry grid.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::geometry::{Geometry, Point};

const ENTRY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum IsometryError {
    #[error("generator {0:?} is not orthogonal to tolerance 1e-9")]
    NotOrthogonal(String),
    #[error("generator {0:?} does not preserve the geometry")]
    WrongGeometry(String),
    #[error("unknown generator {0:?} in word")]
    UnknownGenerator(String),
    #[error("malformed word {0:?}")]
    BadWord(String),
}

/// A rigid motion: orthogonal linear part plus translation (zero on the
/// sphere), with the generator word it was built from.
#[derive(Debug, Clone)]
pub struct IsometryElement {
    pub mat: Matrix3<f64>,
    pub tr: Vector3<f64>,
    /// Generator letters with integer powers; empty means the identity.
    pub word: Vec<(String, i32)>,
}

impl IsometryElement {
    pub fn identity() -> Self {
        IsometryElement { mat: Matrix3::identity(), tr: Vector3::zeros(), word: Vec::new() }
    }

    pub fn new(mat: Matrix3<f64>, tr: Vector3<f64>, name: &str) -> Self {
        IsometryElement { mat, tr, word: vec![(name.to_string(), 1)] }
    }

    pub fn is_orthogonal(&self) -> bool {
        let d = self.mat.transpose() * self.mat - Matrix3::identity();
        d.iter().all(|x| x.abs() <= ENTRY_TOL)
    }

    pub fn apply(&self, p: &Point) -> Point {
        self.mat * p + self.tr
    }

    /// The differential: tangent vectors are moved by the linear part.
    pub fn apply_tangent(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.mat * v
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &IsometryElement) -> IsometryElement {
        let mut word = self.word.clone();
        for &(ref name, pow) in &other.word {
            push_letter(&mut word, name, pow);
        }
        IsometryElement {
            mat: self.mat * other.mat,
            tr: self.mat * other.tr + self.tr,
            word,
        }
    }

    pub fn inverse(&self) -> IsometryElement {
        let mt = self.mat.transpose();
        let mut word = Vec::with_capacity(self.word.len());
        for &(ref name, pow) in self.word.iter().rev() {
            push_letter(&mut word, name, -pow);
        }
        IsometryElement { mat: mt, tr: -(mt * self.tr), word }
    }

    pub fn approx_eq(&self, other: &IsometryElement, tol: f64) -> bool {
        (self.mat - other.mat).iter().all(|x| x.abs() <= tol)
            && (self.tr - other.tr).iter().all(|x| x.abs() <= tol)
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&IsometryElement::identity(), ENTRY_TOL)
    }

    /// Rounded-grid key for dedup hashing at the entry tolerance.
    pub fn key(&self) -> [i64; 12] {
        let mut k = [0i64; 12];
        for (i, x) in self.mat.iter().enumerate() {
            k[i] = (x / ENTRY_TOL).round() as i64;
        }
        for (i, x) in self.tr.iter().enumerate() {
            k[9 + i] = (x / ENTRY_TOL).round() as i64;
        }
        k
    }

    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            return "id".to_string();
        }
        self.word
            .iter()
            .map(|(name, pow)| {
                if *pow == 1 {
                    name.clone()
                } else {
                    format!("{name}^{pow}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    fn check_geometry(&self, geometry: Geometry) -> bool {
        match geometry {
            Geometry::Flat3 => true,
            Geometry::Flat2 => {
                // block diagonal with a fixed z axis and planar translation
                self.mat.column(2).iter().zip([0.0, 0.0, 1.0].iter()).all(|(a, b)| (a - b).abs() <= ENTRY_TOL)
                    && self.mat.row(2).iter().zip([0.0, 0.0, 1.0].iter()).all(|(a, b)| (a - b).abs() <= ENTRY_TOL)
                    && self.tr.z.abs() <= ENTRY_TOL
            }
            Geometry::Sphere => self.tr.norm() <= ENTRY_TOL,
        }
    }
}

impl fmt::Display for IsometryElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word_string())
    }
}

fn push_letter(word: &mut Vec<(String, i32)>, name: &str, pow: i32) {
    if pow == 0 {
        return;
    }
    if let Some(last) = word.last_mut() {
        if last.0 == name {
            last.1 += pow;
            if last.1 == 0 {
                word.pop();
            }
            return;
        }
    }
    word.push((name.to_string(), pow));
}

/// Planar translation by `(x, y)`.
pub fn translation2(name: &str, x: f64, y: f64) -> IsometryElement {
    IsometryElement::new(Matrix3::identity(), Vector3::new(x, y, 0.0), name)
}

/// Planar rotation about the origin.
pub fn rotation2(name: &str, angle: f64) -> IsometryElement {
    let (s, c) = angle.sin_cos();
    let mat = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    IsometryElement::new(mat, Vector3::zeros(), name)
}

/// Reflection of the plane in the vertical line `x = c`.
pub fn reflection_x(name: &str, c: f64) -> IsometryElement {
    let mat = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    IsometryElement::new(mat, Vector3::new(2.0 * c, 0.0, 0.0), name)
}

/// Reflection of the plane in the horizontal line `y = c`.
pub fn reflection_y(name: &str, c: f64) -> IsometryElement {
    let mat = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0);
    IsometryElement::new(mat, Vector3::new(0.0, 2.0 * c, 0.0), name)
}

/// Rotation of the sphere about the z axis.
pub fn rotation_z(name: &str, angle: f64) -> IsometryElement {
    let (s, c) = angle.sin_cos();
    let mat = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    IsometryElement::new(mat, Vector3::zeros(), name)
}

/// A finitely generated isometry group, enumerated as the ball of words up
/// to the bound.
#[derive(Debug, Clone)]
pub struct IsometryGroup {
    pub geometry: Geometry,
    pub generators: Vec<IsometryElement>,
    pub word_bound: usize,
    pub elements: Vec<IsometryElement>,
}

impl IsometryGroup {
    /// Breadth-first enumeration over the generators and their inverses,
    /// deduplicated on the rounded grid. The identity is element 0 and each
    /// element keeps the first (shortest, then alphabetical) word found.
    pub fn enumerate(
        geometry: Geometry,
        generators: Vec<IsometryElement>,
        word_bound: usize,
    ) -> Result<Self, IsometryError> {
        for g in &generators {
            if !g.is_orthogonal() {
                return Err(IsometryError::NotOrthogonal(g.word_string()));
            }
            if !g.check_geometry(geometry) {
                return Err(IsometryError::WrongGeometry(g.word_string()));
            }
        }
        let mut alphabet: Vec<IsometryElement> = Vec::new();
        for g in &generators {
            alphabet.push(g.clone());
            let inv = g.inverse();
            if !alphabet.iter().any(|a| a.approx_eq(&inv, ENTRY_TOL)) {
                alphabet.push(inv);
            }
        }
        let mut elements = vec![IsometryElement::identity()];
        let mut index: BTreeMap<[i64; 12], usize> = BTreeMap::new();
        index.insert(IsometryElement::identity().key(), 0);
        let mut frontier = vec![0usize];
        for _ in 0..word_bound {
            let mut next = Vec::new();
            for &e in &frontier {
                let base = elements[e].clone();
                for a in &alphabet {
                    let w = base.compose(a);
                    if let std::collections::btree_map::Entry::Vacant(slot) = index.entry(w.key())
                    {
                        slot.insert(elements.len());
                        next.push(elements.len());
                        elements.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(IsometryGroup { geometry, generators, word_bound, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn find(&self, e: &IsometryElement) -> Option<usize> {
        self.elements.iter().position(|x| x.approx_eq(e, ENTRY_TOL))
    }

    /// Conjugacy classes within the enumerated ball: orbits of conjugation
    /// by every enumerated element, clipped to the ball. Blocks are sorted
    /// by least element index.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.elements.len()];
        let mut classes = Vec::new();
        for i in 0..self.elements.len() {
            if seen[i] {
                continue;
            }
            let mut block = vec![i];
            seen[i] = true;
            let mut stack = vec![i];
            while let Some(j) = stack.pop() {
                for g in &self.elements {
                    let conj = g.compose(&self.elements[j]).compose(&g.inverse());
                    if let Some(k) = self.find(&conj) {
                        if !seen[k] {
                            seen[k] = true;
                            block.push(k);
                            stack.push(k);
                        }
                    }
                }
            }
            block.sort_unstable();
            classes.push(block);
        }
        classes
    }

    /// Evaluates a word like `a^3*b^-1` over the named generators.
    pub fn parse_word(&self, names: &[String], word: &str) -> Result<IsometryElement, IsometryError> {
        parse_word(&self.generators, names, word)
    }
}

/// Evaluates a generator word: letters separated by `*`, each `name` or
/// `name^power`; `id` denotes the identity.
pub fn parse_word(
    generators: &[IsometryElement],
    names: &[String],
    word: &str,
) -> Result<IsometryElement, IsometryError> {
    let word = word.trim();
    if word.is_empty() || word == "id" {
        return Ok(IsometryElement::identity());
    }
    let mut out = IsometryElement::identity();
    for token in word.split('*') {
        let token = token.trim();
        let (name, pow) = match token.split_once('^') {
            Some((n, p)) => {
                let pow: i32 = p.parse().map_err(|_| IsometryError::BadWord(word.into()))?;
                (n.trim(), pow)
            }
            None => (token, 1),
        };
        let idx = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| IsometryError::UnknownGenerator(name.to_string()))?;
        let g = &generators[idx];
        let step = if pow >= 0 { g.clone() } else { g.inverse() };
        for _ in 0..pow.unsigned_abs() {
            out = out.compose(&step);
        }
    }
    Ok(out)
}
