//! Input files: a single line-oriented grammar with a kind tag. Four kinds
//! are understood: explicit groupoids, action groupoids, groups, and
//! orbifold descriptions (geometry plus isometry generators). Covers and
//! homomorphism files use the same token conventions.
//!
//! Lines are `key: tokens...`, `#` starts a comment, `[section]` headers
//! organize the payload. Errors carry line numbers.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::equivariant::GroupAction;
use crate::geometry::Geometry;
use crate::graph::ObjectGraph;
use crate::group::FiniteGroup;
use crate::groupoid::FiniteGroupoid;
use crate::hom::GroupoidHom;
use crate::isometry::IsometryElement;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required entry {0:?}")]
    Missing(String),
    #[error("unknown kind {0:?}")]
    UnknownKind(String),
    #[error("unsupported schema version {0:?}")]
    Version(String),
    #[error("validation: {0}")]
    Validation(String),
}

fn err(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Parse { line: line + 1, message: message.into() }
}

/// A parsed spec file.
#[derive(Debug, Clone)]
pub enum SpecFile {
    GroupoidExplicit(FiniteGroupoid),
    GroupoidAction(GroupAction),
    Group(FiniteGroup),
    Orbifold(OrbifoldSpec),
}

impl SpecFile {
    pub fn kind(&self) -> &'static str {
        match self {
            SpecFile::GroupoidExplicit(_) => "groupoid-explicit",
            SpecFile::GroupoidAction(_) => "groupoid-action",
            SpecFile::Group(_) => "group",
            SpecFile::Orbifold(_) => "orbifold",
        }
    }

    /// The groupoid a spec denotes, when it denotes one (groups count as
    /// one-object groupoids).
    pub fn to_groupoid(&self) -> Option<FiniteGroupoid> {
        match self {
            SpecFile::GroupoidExplicit(g) => Some(g.clone()),
            SpecFile::GroupoidAction(a) => Some(a.to_groupoid()),
            SpecFile::Group(g) => Some(FiniteGroupoid::from_group(g)),
            SpecFile::Orbifold(_) => None,
        }
    }
}

/// Geometry, generators, and word bound of an orbifold description.
#[derive(Debug, Clone)]
pub struct OrbifoldSpec {
    pub geometry: Geometry,
    pub generator_names: Vec<String>,
    pub generators: Vec<IsometryElement>,
    pub word_bound: usize,
}

struct Lines<'a> {
    rows: Vec<(usize, &'a str)>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines { rows }
    }

    fn entries(&self) -> impl Iterator<Item = (usize, &'a str, Vec<&'a str>)> + '_ {
        self.rows.iter().filter_map(|&(i, l)| {
            if l.starts_with('[') {
                return None;
            }
            let (key, rest) = l.split_once(':')?;
            Some((i, key.trim(), rest.split_whitespace().collect()))
        })
    }

    fn first(&self, key: &str) -> Option<(usize, Vec<&'a str>)> {
        self.entries()
            .find(|(_, k, _)| *k == key)
            .map(|(i, _, v)| (i, v))
    }

    fn all(&self, key: &str) -> Vec<(usize, Vec<&'a str>)> {
        self.entries()
            .filter(|(_, k, _)| *k == key)
            .map(|(i, _, v)| (i, v))
            .collect()
    }
}

/// Parses a spec file from text.
pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let lines = Lines::new(text);
    let (kline, kind) = lines
        .first("kind")
        .ok_or_else(|| SpecError::Missing("kind".into()))?;
    if let Some((vline, v)) = lines.first("version") {
        if v != vec!["1"] {
            let _ = vline;
            return Err(SpecError::Version(v.join(" ")));
        }
    }
    match kind.as_slice() {
        ["groupoid-action"] => parse_action(&lines).map(SpecFile::GroupoidAction),
        ["groupoid-explicit"] => parse_explicit(&lines).map(SpecFile::GroupoidExplicit),
        ["group"] => parse_group(&lines).map(SpecFile::Group),
        ["orbifold"] => parse_orbifold(&lines).map(SpecFile::Orbifold),
        other => Err(SpecError::UnknownKind(other.join(" ")).tag_line(kline)),
    }
}

impl SpecError {
    fn tag_line(self, _line: usize) -> Self {
        self
    }
}

fn parse_graph(lines: &Lines) -> Result<ObjectGraph, SpecError> {
    let (oline, objects) = lines
        .first("objects")
        .ok_or_else(|| SpecError::Missing("objects".into()))?;
    let mut graph = ObjectGraph::new(objects.iter().map(|s| s.to_string()).collect())
        .map_err(|e| err(oline, e.to_string()))?;
    for (line, tokens) in lines.all("edge") {
        if tokens.len() != 2 {
            return Err(err(line, "edge needs exactly two object names"));
        }
        let a = graph
            .find_label(tokens[0])
            .ok_or_else(|| err(line, format!("unknown object {:?}", tokens[0])))?;
        let b = graph
            .find_label(tokens[1])
            .ok_or_else(|| err(line, format!("unknown object {:?}", tokens[1])))?;
        graph.add_edge(a, b).map_err(|e| err(line, e.to_string()))?;
    }
    Ok(graph)
}

fn parse_group(lines: &Lines) -> Result<FiniteGroup, SpecError> {
    if let Some((line, name)) = lines.first("name") {
        return FiniteGroup::named(&name.join(" ")).map_err(|e| err(line, e.to_string()));
    }
    let (eline, labels) = lines
        .first("elements")
        .ok_or_else(|| SpecError::Missing("elements or name".into()))?;
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let find = |line: usize, tok: &str| {
        labels
            .iter()
            .position(|l| l == tok)
            .ok_or_else(|| err(line, format!("unknown element {tok:?}")))
    };
    let rows = lines.all("row");
    if rows.len() != labels.len() {
        return Err(err(eline, format!("expected {} table rows, found {}", labels.len(), rows.len())));
    }
    let mut mul = Vec::with_capacity(labels.len());
    for (line, tokens) in rows {
        if tokens.len() != labels.len() {
            return Err(err(line, "table row has wrong length"));
        }
        let row = tokens
            .iter()
            .map(|t| find(line, t))
            .collect::<Result<Vec<_>, _>>()?;
        mul.push(row);
    }
    FiniteGroup::from_table(mul, Some(labels)).map_err(|e| err(eline, e.to_string()))
}

fn parse_action(lines: &Lines) -> Result<GroupAction, SpecError> {
    let group = parse_group(lines)?;
    let graph = parse_graph(lines)?;
    let acts = lines.all("act");
    if acts.len() != group.order() {
        let line = acts.first().map(|&(l, _)| l).unwrap_or(0);
        return Err(err(
            line,
            format!("expected {} action rows, found {}", group.order(), acts.len()),
        ));
    }
    let mut table = Vec::with_capacity(group.order());
    for (line, tokens) in acts {
        if tokens.len() != graph.len() {
            return Err(err(line, "action row has wrong length"));
        }
        let row = tokens
            .iter()
            .map(|t| {
                graph
                    .find_label(t)
                    .ok_or_else(|| err(line, format!("unknown object {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.push(row);
    }
    GroupAction::new(group, graph, table).map_err(|e| SpecError::Validation(e.to_string()))
}

fn parse_explicit(lines: &Lines) -> Result<FiniteGroupoid, SpecError> {
    let graph = parse_graph(lines)?;
    let arrows = lines.all("arrow");
    let mut names: Vec<String> = Vec::new();
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    for (line, tokens) in &arrows {
        if tokens.len() != 3 {
            return Err(err(*line, "arrow needs: name src tgt"));
        }
        if names.contains(&tokens[0].to_string()) {
            return Err(err(*line, format!("duplicate arrow name {:?}", tokens[0])));
        }
        names.push(tokens[0].to_string());
        src.push(
            graph
                .find_label(tokens[1])
                .ok_or_else(|| err(*line, format!("arrow references unknown object {:?}", tokens[1])))?,
        );
        tgt.push(
            graph
                .find_label(tokens[2])
                .ok_or_else(|| err(*line, format!("arrow references unknown object {:?}", tokens[2])))?,
        );
    }
    let find_arrow = |line: usize, tok: &str| {
        names
            .iter()
            .position(|n| n == tok)
            .ok_or_else(|| err(line, format!("unknown arrow {tok:?}")))
    };
    let mut unit = vec![usize::MAX; graph.len()];
    for (line, tokens) in lines.all("unit") {
        if tokens.len() != 2 {
            return Err(err(line, "unit needs: object arrow"));
        }
        let x = graph
            .find_label(tokens[0])
            .ok_or_else(|| err(line, format!("unknown object {:?}", tokens[0])))?;
        unit[x] = find_arrow(line, tokens[1])?;
    }
    if let Some(x) = unit.iter().position(|&u| u == usize::MAX) {
        return Err(SpecError::Missing(format!("unit for object {:?}", graph.label(x))));
    }
    let mut inv = vec![usize::MAX; names.len()];
    for (line, tokens) in lines.all("inverse") {
        if tokens.len() != 2 {
            return Err(err(line, "inverse needs: arrow arrow"));
        }
        let a = find_arrow(line, tokens[0])?;
        let b = find_arrow(line, tokens[1])?;
        inv[a] = b;
        inv[b] = a;
    }
    if let Some(a) = inv.iter().position(|&u| u == usize::MAX) {
        return Err(SpecError::Missing(format!("inverse for arrow {:?}", names[a])));
    }
    let mut comp = Vec::new();
    for (line, tokens) in lines.all("compose") {
        if tokens.len() != 3 {
            return Err(err(line, "compose needs: g h gh"));
        }
        comp.push((
            find_arrow(line, tokens[0])?,
            find_arrow(line, tokens[1])?,
            find_arrow(line, tokens[2])?,
        ));
    }
    FiniteGroupoid::from_parts(graph, src, tgt, Some(names), unit, inv, &comp, None)
        .map_err(|e| SpecError::Validation(e.to_string()))
}

fn parse_orbifold(lines: &Lines) -> Result<OrbifoldSpec, SpecError> {
    let (gline, geom) = lines
        .first("geometry")
        .ok_or_else(|| SpecError::Missing("geometry".into()))?;
    let geometry = match geom.as_slice() {
        ["flat", "2"] => Geometry::Flat2,
        ["flat", "3"] => Geometry::Flat3,
        ["sphere"] => Geometry::Sphere,
        other => return Err(err(gline, format!("unknown geometry {:?}", other.join(" ")))),
    };
    let (_, bound) = lines
        .first("word-bound")
        .ok_or_else(|| SpecError::Missing("word-bound".into()))?;
    let word_bound: usize = bound
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| SpecError::Missing("word-bound value".into()))?;
    let mut generator_names = Vec::new();
    let mut generators = Vec::new();
    for (line, tokens) in lines.all("generator") {
        if tokens.is_empty() {
            return Err(err(line, "generator needs a name and matrix entries"));
        }
        let name = tokens[0].to_string();
        let nums: Vec<f64> = tokens[1..]
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| err(line, format!("bad number {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let element = match geometry {
            Geometry::Flat2 => {
                if nums.len() != 6 {
                    return Err(err(line, "flat 2 generator needs 4 matrix + 2 translation entries"));
                }
                let mat = Matrix3::new(
                    nums[0], nums[1], 0.0,
                    nums[2], nums[3], 0.0,
                    0.0, 0.0, 1.0,
                );
                IsometryElement::new(mat, Vector3::new(nums[4], nums[5], 0.0), &name)
            }
            Geometry::Flat3 => {
                if nums.len() != 12 {
                    return Err(err(line, "flat 3 generator needs 9 matrix + 3 translation entries"));
                }
                let mat = Matrix3::from_row_slice(&nums[0..9]);
                IsometryElement::new(mat, Vector3::new(nums[9], nums[10], nums[11]), &name)
            }
            Geometry::Sphere => {
                if nums.len() != 9 {
                    return Err(err(line, "sphere generator needs 9 matrix entries"));
                }
                IsometryElement::new(Matrix3::from_row_slice(&nums), Vector3::zeros(), &name)
            }
        };
        if !element.is_orthogonal() {
            return Err(err(line, format!("generator {name:?} is not orthogonal (row-major matrix)")));
        }
        generator_names.push(name);
        generators.push(element);
    }
    if generators.is_empty() {
        return Err(SpecError::Missing("generator".into()));
    }
    Ok(OrbifoldSpec { geometry, generator_names, generators, word_bound })
}

/// Parses a cover file: `piece: <object names...>` lines over a graph.
pub fn parse_cover(text: &str, graph: &ObjectGraph) -> Result<Vec<Vec<usize>>, SpecError> {
    let lines = Lines::new(text);
    let mut pieces = Vec::new();
    for (line, tokens) in lines.all("piece") {
        let piece = tokens
            .iter()
            .map(|t| {
                graph
                    .find_label(t)
                    .ok_or_else(|| err(line, format!("unknown object {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        pieces.push(piece);
    }
    if pieces.is_empty() {
        return Err(SpecError::Missing("piece".into()));
    }
    Ok(pieces)
}

/// Parses a homomorphism file: `obj: <src> <dst>` and `arrow: <src> <dst>`
/// lines using labels of the two groupoids.
pub fn parse_hom(
    text: &str,
    src: &FiniteGroupoid,
    dst: &FiniteGroupoid,
) -> Result<GroupoidHom, SpecError> {
    let lines = Lines::new(text);
    let mut obj_map = vec![usize::MAX; src.object_count()];
    for (line, tokens) in lines.all("obj") {
        if tokens.len() != 2 {
            return Err(err(line, "obj needs: source-object target-object"));
        }
        let a = src
            .base()
            .find_label(tokens[0])
            .ok_or_else(|| err(line, format!("unknown source object {:?}", tokens[0])))?;
        let b = dst
            .base()
            .find_label(tokens[1])
            .ok_or_else(|| err(line, format!("unknown target object {:?}", tokens[1])))?;
        obj_map[a] = b;
    }
    let mut arrow_map = vec![usize::MAX; src.arrow_count()];
    for (line, tokens) in lines.all("arrow") {
        if tokens.len() != 2 {
            return Err(err(line, "arrow needs: source-arrow target-arrow"));
        }
        let a = (0..src.arrow_count())
            .find(|&i| src.arrow_label(i) == tokens[0])
            .ok_or_else(|| err(line, format!("unknown source arrow {:?}", tokens[0])))?;
        let b = (0..dst.arrow_count())
            .find(|&i| dst.arrow_label(i) == tokens[1])
            .ok_or_else(|| err(line, format!("unknown target arrow {:?}", tokens[1])))?;
        arrow_map[a] = b;
    }
    if let Some(x) = obj_map.iter().position(|&v| v == usize::MAX) {
        return Err(SpecError::Missing(format!("obj entry for {:?}", src.base().label(x))));
    }
    if let Some(a) = arrow_map.iter().position(|&v| v == usize::MAX) {
        return Err(SpecError::Missing(format!("arrow entry for {:?}", src.arrow_label(a))));
    }
    let hom = GroupoidHom { obj_map, arrow_map };
    hom.validate(src, dst)
        .map_err(|e| SpecError::Validation(e.to_string()))?;
    Ok(hom)
}
