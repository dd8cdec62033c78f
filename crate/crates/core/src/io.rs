//! Plain-text complex files and SQL export.
//!
//! ```text
//! # unit square
//! DIM 2 2
//! VERTEX a 0 1
//! CELL 1 e
//! BND e a -1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::complex::RelationalComplex;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the line format: one `DIM n d` line first, then `VERTEX`, `CELL`
/// and `BND` records in any order. `#` starts a comment.
pub fn parse_complex(text: &str) -> Result<RelationalComplex> {
    let mut header: Option<(usize, usize)> = None;
    let mut vertices: Vec<(usize, String, Vec<f64>)> = Vec::new();
    let mut cells: Vec<(usize, usize, String)> = Vec::new();
    let mut bnds: Vec<(usize, String, String, i64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let tok: Vec<&str> = line.split_whitespace().collect();
        let Some(&kw) = tok.first() else { continue };
        if header.is_none() && kw != "DIM" {
            return Err(parse_err(ln, "expected DIM before any record"));
        }
        match kw {
            "DIM" => {
                if header.is_some() {
                    return Err(parse_err(ln, "duplicate DIM"));
                }
                let [_, n, d] = tok[..] else {
                    return Err(parse_err(ln, "DIM takes two integers"));
                };
                let n = n.parse().map_err(|_| parse_err(ln, "bad dimension"))?;
                let d = d
                    .parse()
                    .map_err(|_| parse_err(ln, "bad embedding dimension"))?;
                header = Some((n, d));
            }
            "VERTEX" => {
                let d = header.expect("checked").1;
                if tok.len() != 2 && tok.len() != d + 2 {
                    return Err(parse_err(
                        ln,
                        format!("VERTEX needs a name and {d} coordinates"),
                    ));
                }
                let coords = tok[2..]
                    .iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| parse_err(ln, format!("bad coordinate {t}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                vertices.push((ln, tok[1].to_string(), coords));
            }
            "CELL" => {
                let [_, k, name] = tok[..] else {
                    return Err(parse_err(ln, "CELL takes a dimension and a name"));
                };
                let k: usize = k.parse().map_err(|_| parse_err(ln, "bad cell dimension"))?;
                if k == 0 {
                    return Err(parse_err(ln, "0-cells are declared with VERTEX"));
                }
                cells.push((ln, k, name.to_string()));
            }
            "BND" => {
                let [_, cell, bnd, sigma] = tok[..] else {
                    return Err(parse_err(
                        ln,
                        "BND takes a cell, a boundary cell and a sign",
                    ));
                };
                let sigma: i64 = sigma.parse().map_err(|_| parse_err(ln, "bad sigma"))?;
                if sigma == 0 {
                    return Err(parse_err(ln, "sigma must be nonzero"));
                }
                bnds.push((ln, cell.to_string(), bnd.to_string(), sigma));
            }
            other => return Err(parse_err(ln, format!("unknown record {other}"))),
        }
    }
    let (n, d) = header.ok_or_else(|| parse_err(0, "missing DIM"))?;
    let mut b = RelationalComplex::builder(n, d);
    let mut dims: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (ln, name, coords) in &vertices {
        let r = if coords.is_empty() {
            b.bare_vertex(name)
        } else {
            b.vertex(name, coords)
        };
        r.map_err(|e| parse_err(*ln, e.to_string()))?;
        dims.entry(name).or_default().insert(0);
    }
    for (ln, k, name) in &cells {
        b.cell(*k, name)
            .map_err(|e| parse_err(*ln, e.to_string()))?;
        dims.entry(name).or_default().insert(*k);
    }
    for (ln, cell, bnd, sigma) in &bnds {
        let empty = BTreeSet::new();
        let dc = dims.get(cell.as_str()).unwrap_or(&empty);
        let db = dims.get(bnd.as_str()).unwrap_or(&empty);
        let pairs: Vec<usize> = dc
            .iter()
            .copied()
            .filter(|&k| k >= 1 && db.contains(&(k - 1)))
            .collect();
        let k = match pairs[..] {
            [k] => k,
            [] => {
                return Err(parse_err(
                    *ln,
                    format!("no cell pair {cell}/{bnd} one dimension apart"),
                ))
            }
            _ => return Err(parse_err(*ln, format!("ambiguous cell pair {cell}/{bnd}"))),
        };
        b.boundary(k, cell, bnd, *sigma)
            .map_err(|e| parse_err(*ln, e.to_string()))?;
    }
    b.build().map_err(|e| parse_err(0, e.to_string()))
}

/// Normalized text: dimensions ascending, names in lexicographic order.
pub fn write_complex(c: &RelationalComplex) -> String {
    let mut out = String::new();
    writeln!(out, "DIM {} {}", c.dim(), c.embedding_dim()).unwrap();
    for v in c.cells(0) {
        write!(out, "VERTEX {}", v.name).unwrap();
        for x in c.coords(&v.name).unwrap_or(&[]) {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    for k in 1..=c.dim() {
        for cell in c.cells(k) {
            writeln!(out, "CELL {k} {}", cell.name).unwrap();
        }
    }
    for k in 1..=c.dim() {
        for cell in c.cells(k) {
            for (f, s) in c.boundary_of(&cell).terms() {
                writeln!(out, "BND {} {} {s}", cell.name, f.name).unwrap();
            }
        }
    }
    out
}

const M_SQUARED_VIEW: &str = "create view M_squared as
select M1.cell, M2.boundary, sum(M1.sigma * M2.sigma) as sigma
from M M1, M M2
where M1.boundary=M2.cell
group by M1.cell, M2.boundary;
";

fn sql_str(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// The boundary relation as a table `M(cell, boundary, sigma)` followed by
/// the `M_squared` view of `D_{k+1} · D_k`. Cell names are qualified as
/// `dim:name` only when some name is used in more than one dimension.
pub fn export_sql(c: &RelationalComplex) -> String {
    let mut seen = BTreeSet::new();
    let unique = (0..=c.dim())
        .flat_map(|k| c.cells(k))
        .all(|id| seen.insert(id.name));
    let name = |k: usize, n: &str| {
        if unique {
            n.to_string()
        } else {
            format!("{k}:{n}")
        }
    };
    let mut out = String::from("CREATE TABLE M(cell, boundary, sigma);\n");
    for k in 1..=c.dim() {
        for cell in c.cells(k) {
            for (f, s) in c.boundary_of(&cell).terms() {
                writeln!(
                    out,
                    "INSERT INTO M VALUES ({}, {}, {s});",
                    sql_str(&name(k, &cell.name)),
                    sql_str(&name(k - 1, &f.name))
                )
                .unwrap();
            }
        }
    }
    out.push_str(M_SQUARED_VIEW);
    out
}
