//! Reader for the ASCII MSH 2.2 format (triangles and tagged line elements).

use std::collections::BTreeMap;
use std::path::Path;

use super::{BoundaryEdge, BoundaryKind, BoundaryTag, Mesh, MeshError};

/// Reads and validates a mesh file.
pub fn load_msh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_msh(&text)
}

/// Maps a physical name to a boundary kind. Names starting with `inflow` or
/// `outflow` get those kinds, `body`/`swimmer` names become swimmers numbered
/// in order of appearance, anything else is a wall.
fn kind_for(name: &str, next_swimmer: &mut usize) -> BoundaryKind {
    let lower = name.to_ascii_lowercase();
    if lower.starts_with("inflow") {
        BoundaryKind::Inflow
    } else if lower.starts_with("outflow") {
        BoundaryKind::Outflow
    } else if lower.starts_with("body") || lower.starts_with("swimmer") {
        *next_swimmer += 1;
        BoundaryKind::Swimmer(*next_swimmer - 1)
    } else {
        BoundaryKind::Wall
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, MeshError> {
        loop {
            match self.iter.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok(l);
                    }
                }
                None => return Err(self.err("unexpected end of file")),
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> MeshError {
        MeshError::Msh { line: self.line, message: message.into() }
    }

    fn count(&mut self) -> Result<usize, MeshError> {
        let l = self.next()?;
        l.parse().map_err(|_| self.err(format!("expected a count, got `{l}`")))
    }

    fn expect(&mut self, marker: &str) -> Result<(), MeshError> {
        let l = self.next()?;
        if l == marker {
            Ok(())
        } else {
            Err(self.err(format!("expected `{marker}`, got `{l}`")))
        }
    }
}

fn nums<T: std::str::FromStr>(lines: &Lines, l: &str) -> Result<Vec<T>, MeshError> {
    l.split_whitespace()
        .map(|s| s.parse::<T>().map_err(|_| lines.err(format!("bad number `{s}`"))))
        .collect()
}

/// Parses MSH 2.2 ASCII text.
pub fn parse_msh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { iter: text.lines().enumerate(), line: 0 };
    let mut names: BTreeMap<i64, String> = BTreeMap::new();
    let mut node_ids: BTreeMap<i64, usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut lines_raw: Vec<([i64; 2], i64)> = Vec::new();

    while let Ok(header) = lines.next() {
        match header {
            "$MeshFormat" => {
                let l = lines.next()?;
                if !l.starts_with("2.2") {
                    return Err(lines.err(format!("unsupported format version `{l}`")));
                }
                if l.split_whitespace().nth(1) != Some("0") {
                    return Err(lines.err("binary MSH files are not supported"));
                }
                lines.expect("$EndMeshFormat")?;
            }
            "$PhysicalNames" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next()?;
                    let mut parts = l.splitn(3, char::is_whitespace);
                    let _dim = parts.next();
                    let tag: i64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| lines.err("bad physical name entry"))?;
                    let name = parts.next().unwrap_or("").trim().trim_matches('"').to_string();
                    names.insert(tag, name);
                }
                lines.expect("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next()?;
                    let v: Vec<f64> = nums(&lines, l)?;
                    if v.len() < 3 {
                        return Err(lines.err("node line needs id and coordinates"));
                    }
                    node_ids.insert(v[0] as i64, vertices.len());
                    vertices.push([v[1], v[2]]);
                }
                lines.expect("$EndNodes")?;
            }
            "$Elements" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let l = lines.next()?;
                    let v: Vec<i64> = nums(&lines, l)?;
                    if v.len() < 3 {
                        return Err(lines.err("truncated element line"));
                    }
                    let (ty, ntags) = (v[1], v[2] as usize);
                    let physical = if ntags > 0 { v.get(3).copied().unwrap_or(0) } else { 0 };
                    let nodes = &v[(3 + ntags).min(v.len())..];
                    match ty {
                        1 if nodes.len() == 2 => lines_raw.push(([nodes[0], nodes[1]], physical)),
                        2 if nodes.len() == 3 => cells.push([nodes[0], nodes[1], nodes[2]]),
                        1 | 2 => return Err(lines.err("wrong number of element nodes")),
                        other => return Err(MeshError::UnsupportedElement(other as u32)),
                    }
                }
                lines.expect("$EndElements")?;
            }
            other if other.starts_with('$') => {
                // Unknown section: skip to its end marker.
                let end = format!("$End{}", &other[1..]);
                while lines.next()? != end {}
            }
            other => return Err(lines.err(format!("unexpected line `{other}`"))),
        }
    }

    let node = |id: i64| node_ids.get(&id).copied().ok_or_else(|| MeshError::Msh { line: 0, message: format!("unknown node {id}") });
    let mut cells_idx = Vec::with_capacity(cells.len());
    for c in cells {
        let mut t = [node(c[0])?, node(c[1])?, node(c[2])?];
        if crate::geom::orient(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
        cells_idx.push(t);
    }

    let mut tags: Vec<BoundaryTag> = Vec::new();
    let mut tag_of: BTreeMap<i64, usize> = BTreeMap::new();
    let mut next_swimmer = 0;
    let mut boundary_edges = Vec::with_capacity(lines_raw.len());
    for (nodes, physical) in lines_raw {
        let tag = match tag_of.get(&physical) {
            Some(&t) => t,
            None => {
                let name = names.get(&physical).cloned().ok_or(MeshError::MissingPhysicalName(physical))?;
                let kind = kind_for(&name, &mut next_swimmer);
                tags.push(BoundaryTag { name, kind });
                tag_of.insert(physical, tags.len() - 1);
                tags.len() - 1
            }
        };
        boundary_edges.push(BoundaryEdge { vertices: [node(nodes[0])?, node(nodes[1])?], tag });
    }
    Mesh::new(vertices, cells_idx, boundary_edges, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "inflow"
1 2 "wall"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 2 1 1 2
2 1 2 2 1 2 3
3 1 2 2 1 3 4
4 1 2 1 1 4 1
5 2 2 0 1 1 2 3
6 2 2 0 1 1 3 4
$EndElements
"#;

    #[test]
    fn unit_square_file() {
        let m = parse_msh(SQUARE).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.tags()[m.tag_index("inflow").unwrap()].kind, BoundaryKind::Inflow);
    }

    #[test]
    fn quadrangle_rejected() {
        let text = SQUARE.replace("6 2 2 0 1 1 3 4", "6 3 2 0 1 1 2 3 4");
        assert!(matches!(parse_msh(&text), Err(MeshError::UnsupportedElement(3))));
    }

    #[test]
    fn orphan_edge_rejected() {
        let text = SQUARE.replace("3 1 2 2 1 3 4", "3 1 2 2 1 1 3");
        assert!(matches!(parse_msh(&text), Err(MeshError::InteriorBoundaryEdge(..))));
        let text = SQUARE.replace("$EndNodes", "5 2 2 0\n$EndNodes").replace("4\n1 0 0 0", "5\n1 0 0 0");
        let text = text.replace("3 1 2 2 1 3 4", "3 1 2 2 1 3 5");
        assert!(matches!(parse_msh(&text), Err(MeshError::OrphanBoundaryEdge(..))));
    }

    #[test]
    fn missing_name_rejected() {
        let text = SQUARE.replace("4 1 2 1 1 4 1", "4 1 2 7 1 4 1");
        assert!(matches!(parse_msh(&text), Err(MeshError::MissingPhysicalName(7))));
    }
}
