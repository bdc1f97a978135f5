//! SDF (MDL molfile, V2000) reader and writer.

use super::{BondOrder, GraphNode, MoleculeGraph};
use crate::elements::Element;
use crate::error::{Error, Result};

fn field(line: &str, start: usize, end: usize) -> &str {
    let bytes = line.as_bytes();
    let s = start.min(bytes.len());
    let e = end.min(bytes.len());
    std::str::from_utf8(&bytes[s..e]).unwrap_or("")
}

fn parse_usize(s: &str, lineno: usize, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("bad {what} field {:?}", s.trim()),
    })
}

/// Old-style atom-block charge codes (column 36-39). Superseded by any
/// `M  CHG` property line in the same record.
fn charge_from_code(code: i32) -> i32 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

/// Parse SDF text into one [`MoleculeGraph`] per `$$$$`-separated record.
pub fn parse_sdf(text: &str) -> Result<Vec<MoleculeGraph>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut mols = Vec::new();
    let mut pos = 0;

    while pos < lines.len() {
        // Skip blank tail between records.
        while pos < lines.len() && lines[pos].trim().is_empty() {
            pos += 1;
        }
        if pos >= lines.len() {
            break;
        }
        let header_start = pos;
        let counts_idx = header_start + 3;
        if counts_idx >= lines.len() {
            return Err(Error::Parse {
                line: header_start + 1,
                message: "truncated record: missing counts line".into(),
            });
        }
        let counts = lines[counts_idx];
        let version = field(counts, 33, 39).trim();
        if version.eq_ignore_ascii_case("V3000") {
            return Err(Error::UnsupportedFormat("V3000 molfile".into()));
        }
        let natoms = parse_usize(field(counts, 0, 3), counts_idx + 1, "atom count")?;
        let nbonds = parse_usize(field(counts, 3, 6), counts_idx + 1, "bond count")?;

        let mut mol = MoleculeGraph {
            coords: Some(Vec::with_capacity(natoms)),
            ..Default::default()
        };
        let atom_start = counts_idx + 1;
        for k in 0..natoms {
            let lineno = atom_start + k + 1;
            let line = lines.get(atom_start + k).ok_or(Error::Parse {
                line: lineno,
                message: "atom count exceeds available lines".into(),
            })?;
            if line.starts_with("M  ") || line.contains("$$$$") {
                return Err(Error::Parse {
                    line: lineno,
                    message: "atom block shorter than declared atom count".into(),
                });
            }
            let x: f64 = field(line, 0, 10).trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: "bad x coordinate".into(),
            })?;
            let y: f64 = field(line, 10, 20).trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: "bad y coordinate".into(),
            })?;
            let z: f64 = field(line, 20, 30).trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: "bad z coordinate".into(),
            })?;
            let symbol = field(line, 31, 34).trim();
            let element = Element::from_symbol(symbol).map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let charge_code: i32 = field(line, 36, 39).trim().parse().unwrap_or(0);
            mol.nodes.push(GraphNode {
                element,
                formal_charge: charge_from_code(charge_code),
                aromatic: false,
                implicit_h: 0,
            });
            mol.coords.as_mut().unwrap().push([x, y, z]);
        }
        let bond_start = atom_start + natoms;
        for k in 0..nbonds {
            let lineno = bond_start + k + 1;
            let line = lines.get(bond_start + k).ok_or(Error::Parse {
                line: lineno,
                message: "bond count exceeds available lines".into(),
            })?;
            if line.starts_with("M  ") || line.contains("$$$$") {
                return Err(Error::Parse {
                    line: lineno,
                    message: "bond block shorter than declared bond count".into(),
                });
            }
            let a = parse_usize(field(line, 0, 3), lineno, "bond atom")?;
            let b = parse_usize(field(line, 3, 6), lineno, "bond atom")?;
            let order_code = parse_usize(field(line, 6, 9), lineno, "bond order")?;
            if a == 0 || b == 0 || a > natoms || b > natoms || a == b {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("bond references invalid atoms {a},{b}"),
                });
            }
            let order = match order_code {
                1 => BondOrder::Single,
                2 => BondOrder::Double,
                3 => BondOrder::Triple,
                4 => BondOrder::Aromatic,
                o => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unsupported bond order {o}"),
                    })
                }
            };
            if order == BondOrder::Aromatic {
                mol.nodes[a - 1].aromatic = true;
                mol.nodes[b - 1].aromatic = true;
            }
            mol.add_edge(a - 1, b - 1, order);
        }
        // Property block: M CHG resets all old-style charges.
        let mut idx = bond_start + nbonds;
        let mut saw_chg = false;
        while idx < lines.len() && !lines[idx].starts_with("$$$$") {
            let line = lines[idx];
            if line.starts_with("M  CHG") {
                if !saw_chg {
                    for n in &mut mol.nodes {
                        n.formal_charge = 0;
                    }
                    saw_chg = true;
                }
                let parts: Vec<&str> = line[6..].split_whitespace().collect();
                if let Some(count) = parts.first().and_then(|s| s.parse::<usize>().ok()) {
                    for c in 0..count {
                        let ai: usize = parts
                            .get(1 + 2 * c)
                            .and_then(|s| s.parse().ok())
                            .ok_or(Error::Parse {
                                line: idx + 1,
                                message: "bad M  CHG entry".into(),
                            })?;
                        let ch: i32 = parts
                            .get(2 + 2 * c)
                            .and_then(|s| s.parse().ok())
                            .ok_or(Error::Parse {
                                line: idx + 1,
                                message: "bad M  CHG entry".into(),
                            })?;
                        if ai == 0 || ai > mol.nodes.len() {
                            return Err(Error::Parse {
                                line: idx + 1,
                                message: format!("M  CHG references invalid atom {ai}"),
                            });
                        }
                        mol.nodes[ai - 1].formal_charge = ch;
                    }
                }
            }
            idx += 1;
        }
        mols.push(mol);
        pos = if idx < lines.len() { idx + 1 } else { idx };
    }
    Ok(mols)
}

/// Serialize molecule graphs as a multi-record V2000 SDF.
pub fn write_sdf(mols: &[MoleculeGraph]) -> String {
    let mut out = String::new();
    for mol in mols {
        out.push_str("poseval\n  poseval\n\n");
        out.push_str(&format!(
            "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000\n",
            mol.nodes.len(),
            mol.edges.len()
        ));
        let zero = [0.0; 3];
        for (i, n) in mol.nodes.iter().enumerate() {
            let c = mol
                .coords
                .as_ref()
                .map(|c| c[i])
                .unwrap_or(zero);
            out.push_str(&format!(
                "{:>10.4}{:>10.4}{:>10.4} {:<3} 0  0  0  0  0  0  0  0  0  0  0  0\n",
                c[0],
                c[1],
                c[2],
                n.element.symbol()
            ));
        }
        for e in &mol.edges {
            let code = match e.order {
                BondOrder::Single => 1,
                BondOrder::Double => 2,
                BondOrder::Triple => 3,
                BondOrder::Aromatic => 4,
            };
            out.push_str(&format!("{:>3}{:>3}{:>3}  0\n", e.i + 1, e.j + 1, code));
        }
        let charged: Vec<(usize, i32)> = mol
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.formal_charge != 0)
            .map(|(i, n)| (i + 1, n.formal_charge))
            .collect();
        for chunk in charged.chunks(8) {
            out.push_str(&format!("M  CHG{:>3}", chunk.len()));
            for (i, c) in chunk {
                out.push_str(&format!("{:>4}{:>4}", i, c));
            }
            out.push('\n');
        }
        out.push_str("M  END\n$$$$\n");
    }
    out
}
