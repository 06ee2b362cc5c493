use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::Vec3;

fn parse_index(tok: &str, n: usize, line: usize) -> Result<usize> {
    let first = tok.split('/').next().unwrap_or("");
    let i: i64 = first.parse().map_err(|_| Error::Parse(format!("line {line}: bad face index '{tok}'")))?;
    let idx = if i > 0 { i - 1 } else { n as i64 + i };
    if i == 0 || idx < 0 || idx as usize >= n {
        return Err(Error::Parse(format!("line {line}: face index {i} out of range")));
    }
    Ok(idx as usize)
}

/// Reads vertex positions and faces from an OBJ stream.
///
/// Vertices keep their file order. Polygons are split into triangle fans.
/// Normals, texture coordinates, groups and materials are ignored.
pub fn read_obj<R: BufRead>(reader: &mut R) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex", ln + 1)))?;
                if c.len() != 3 {
                    return Err(Error::Parse(format!("line {}: vertex needs 3 coordinates", ln + 1)));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> =
                    toks.map(|t| parse_index(t, vertices.len(), ln + 1)).collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(Error::Parse(format!("line {}: face needs at least 3 vertices", ln + 1)));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if faces.is_empty() {
        return Err(Error::Parse("no faces found".into()));
    }
    Ok((vertices, faces))
}

pub fn write_obj<W: Write>(w: &mut W, vertices: &[Vec3], faces: &[[usize; 3]]) -> std::io::Result<()> {
    for v in vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()
}

/// Writes each polyline as an OBJ `l` element.
pub fn write_polylines_obj<W: Write>(w: &mut W, lines: &[Vec<Vec3>]) -> std::io::Result<()> {
    let mut next = 1usize;
    for line in lines {
        for p in line {
            writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
        }
        if line.len() >= 2 {
            write!(w, "l")?;
            for i in 0..line.len() {
                write!(w, " {}", next + i)?;
            }
            writeln!(w)?;
        }
        next += line.len();
    }
    w.flush()
}
