//! Minimal ASCII PLY reader: vertex `x`, `y`, `z` only.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

/// Reads vertex positions from an ASCII PLY file.
pub fn read_ply_vertices(path: &Path) -> Result<Vec<[f64; 3]>> {
    let file = std::fs::File::open(path)?;
    parse_ply(std::io::BufReader::new(file))
}

pub fn parse_ply<R: BufRead>(reader: R) -> Result<Vec<[f64; 3]>> {
    let mut lines = reader.lines();
    let mut next_line = || -> Result<Option<String>> { lines.next().transpose().map_err(Error::from) };

    match next_line()? {
        Some(l) if l.trim() == "ply" => {}
        _ => return Err(Error::Parse("missing 'ply' magic line".into())),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut ascii = false;
    loop {
        let Some(line) = next_line()? else {
            return Err(Error::Parse("unterminated header".into()));
        };
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                let fmt = tok.next().unwrap_or("");
                if fmt != "ascii" {
                    return Err(Error::Parse(format!("unsupported PLY format '{fmt}'")));
                }
                ascii = true;
            }
            Some("element") => {
                let name = tok.next().unwrap_or("").to_string();
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad element line '{line}'")))?;
                elements.push(Element {
                    name,
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::Parse("property before any element".into()))?;
                let kind = tok.next().unwrap_or("");
                if kind == "list" {
                    el.has_list = true;
                    // list <count type> <item type> <name>
                    let name = tok.nth(2).unwrap_or("").to_string();
                    el.properties.push(name);
                } else {
                    el.properties.push(tok.next().unwrap_or("").to_string());
                }
            }
            Some("end_header") => break,
            // comment, obj_info, blank lines
            _ => {}
        }
    }
    if !ascii {
        return Err(Error::Parse("missing format line".into()));
    }

    let mut vertices = None;
    for el in &elements {
        if el.name != "vertex" {
            for _ in 0..el.count {
                if next_line()?.is_none() {
                    return Err(Error::Parse(format!("truncated '{}' element", el.name)));
                }
            }
            continue;
        }
        if el.has_list {
            return Err(Error::Parse("list properties on vertices are not supported".into()));
        }
        let index = |axis: &str| {
            el.properties
                .iter()
                .position(|p| p == axis)
                .ok_or_else(|| Error::Parse(format!("vertex element lacks '{axis}'")))
        };
        let (ix, iy, iz) = (index("x")?, index("y")?, index("z")?);
        let mut out = Vec::with_capacity(el.count);
        for row in 0..el.count {
            let line = next_line()?
                .ok_or_else(|| Error::Parse(format!("truncated vertex list at row {row}")))?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("vertex row {row}: {e}")))?;
            if values.len() < el.properties.len() {
                return Err(Error::Parse(format!("vertex row {row} has too few values")));
            }
            out.push([values[ix], values[iy], values[iz]]);
        }
        vertices = Some(out);
        break;
    }
    vertices.ok_or_else(|| Error::Parse("no vertex element".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vertices_and_skips_other_elements() {
        let text = "ply\nformat ascii 1.0\ncomment test\nelement camera 1\nproperty float a\n\
                    element vertex 2\nproperty float y\nproperty float x\nproperty float z\nproperty uchar red\n\
                    element face 1\nproperty list uchar int vertex_indices\nend_header\n\
                    9\n1 2 3 255\n4 5 6 0\n3 0 1 1\n";
        let v = parse_ply(text.as_bytes()).unwrap();
        assert_eq!(v, vec![[2.0, 1.0, 3.0], [5.0, 4.0, 6.0]]);
    }

    #[test]
    fn rejects_binary_and_garbage() {
        let bin = "ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nend_header\n";
        assert!(matches!(parse_ply(bin.as_bytes()), Err(Error::Parse(_))));
        assert!(parse_ply("hello\n".as_bytes()).is_err());
        let short = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n";
        assert!(parse_ply(short.as_bytes()).is_err());
        let bad = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 a 3\n";
        assert!(parse_ply(bad.as_bytes()).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_ply_vertices(Path::new("/nonexistent/bunny.ply")),
            Err(Error::Io(_))
        ));
    }
}
