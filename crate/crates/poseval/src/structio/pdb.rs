//! Fixed-column PDB reader and writer.
//!
//! Reads ATOM/HETATM/TER/MODEL/ENDMDL/TITLE/END records. Only the first
//! model is returned; altloc 'A' or blank is kept, all others dropped;
//! insertion codes become part of the residue key.

use super::{Atom, Structure};
use crate::elements::Element;
use crate::error::{Error, Result};

fn col(line: &str, start: usize, end: usize) -> &str {
    // 0-based half-open slice that tolerates short lines.
    let bytes = line.as_bytes();
    let s = start.min(bytes.len());
    let e = end.min(bytes.len());
    std::str::from_utf8(&bytes[s..e]).unwrap_or("")
}

fn parse_coord(line: &str, start: usize, end: usize, lineno: usize, what: &str) -> Result<f64> {
    let field = col(line, start, end).trim();
    field.parse::<f64>().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("non-numeric {what} coordinate {field:?}"),
    })
}

fn element_from_name(name: &str, is_hetero: bool) -> Result<Element> {
    let stripped: String = name.chars().filter(|c| c.is_ascii_alphabetic()).collect();
    if stripped.is_empty() {
        return Err(Error::UnknownElement(name.to_string()));
    }
    // Hetero atom names like "CL1" or "ZN" may start with a two-letter
    // element; standard residue names never do.
    if is_hetero && stripped.len() >= 2 {
        if let Ok(e) = Element::from_symbol(&stripped[..2]) {
            return Ok(e);
        }
    }
    Element::from_symbol(&stripped[..1])
}

/// Parse PDB-format text into a [`Structure`] (first model only).
pub fn parse_pdb(text: &str) -> Result<Structure> {
    let mut st = Structure::default();
    let mut model_count = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let record = col(line, 0, 6).trim_end();
        match record {
            "MODEL" => {
                model_count += 1;
                if model_count == 1 {
                    st.model_index = col(line, 6, 80)
                        .trim()
                        .parse()
                        .unwrap_or(1);
                }
            }
            "ENDMDL" => {}
            "TITLE" => {
                let t = col(line, 10, 80).trim();
                if !st.title.is_empty() {
                    st.title.push(' ');
                }
                st.title.push_str(t);
            }
            "ATOM" | "HETATM" => {
                if model_count > 1 {
                    continue;
                }
                let altloc = col(line, 16, 17).chars().next().unwrap_or(' ');
                if altloc != ' ' && altloc != 'A' {
                    continue;
                }
                let name = col(line, 12, 16).trim().to_string();
                let residue_name = col(line, 17, 20).trim().to_string();
                let chain_id = col(line, 21, 22).trim().to_string();
                let residue_seq: i32 =
                    col(line, 22, 26).trim().parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!(
                            "bad residue sequence number {:?}",
                            col(line, 22, 26).trim()
                        ),
                    })?;
                let icode = col(line, 26, 27).chars().next().unwrap_or(' ');
                let x = parse_coord(line, 30, 38, lineno, "x")?;
                let y = parse_coord(line, 38, 46, lineno, "y")?;
                let z = parse_coord(line, 46, 54, lineno, "z")?;
                if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "non-finite coordinate".into(),
                    });
                }
                let is_hetero = record == "HETATM";
                let elem_field = col(line, 76, 78).trim();
                let element = if elem_field.is_empty() {
                    element_from_name(&name, is_hetero).map_err(|e| Error::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })?
                } else {
                    Element::from_symbol(elem_field).map_err(|e| Error::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })?
                };
                // Charge column: "2+" / "1-" style.
                let charge_field = col(line, 78, 80).trim();
                let formal_charge = match charge_field.len() {
                    2 => {
                        let mag: i32 = charge_field[..1].parse().unwrap_or(0);
                        if charge_field.ends_with('-') {
                            -mag
                        } else {
                            mag
                        }
                    }
                    _ => 0,
                };
                st.atoms.push(Atom {
                    element,
                    name,
                    coords: [x, y, z],
                    chain_id,
                    residue_seq,
                    insertion_code: if icode == ' ' { None } else { Some(icode) },
                    residue_name,
                    formal_charge,
                    is_hetero,
                });
            }
            _ => {}
        }
    }
    if st.atoms.is_empty() {
        return Err(Error::EmptyStructure);
    }
    Ok(st)
}

/// Serialize a [`Structure`] to PDB text (fixture writer; coordinates at
/// %8.3f so a round trip preserves them to 1e-3 Angstrom).
pub fn write_pdb(st: &Structure) -> String {
    let mut out = String::new();
    if !st.title.is_empty() {
        out.push_str(&format!("TITLE     {}\n", st.title));
    }
    for (i, a) in st.atoms.iter().enumerate() {
        let record = if a.is_hetero { "HETATM" } else { "ATOM  " };
        // Atom names shorter than 4 chars start at column 14.
        let name = if a.name.len() >= 4 {
            a.name.clone()
        } else {
            format!(" {:<3}", a.name)
        };
        let icode = a.insertion_code.unwrap_or(' ');
        let charge = match a.formal_charge {
            0 => "  ".to_string(),
            c if c > 0 => format!("{}+", c),
            c => format!("{}-", -c),
        };
        out.push_str(&format!(
            "{record}{serial:>5} {name:<4}{alt}{res:<3} {chain}{seq:>4}{icode}   {x:>8.3}{y:>8.3}{z:>8.3}{occ:>6.2}{b:>6.2}          {elem:>2}{charge}\n",
            serial = (i + 1).min(99999),
            alt = ' ',
            res = a.residue_name,
            chain = if a.chain_id.is_empty() { " ".to_string() } else { a.chain_id.clone() },
            seq = a.residue_seq,
            x = a.coords[0],
            y = a.coords[1],
            z = a.coords[2],
            occ = 1.0,
            b = 0.0,
            elem = a.element.symbol().to_ascii_uppercase(),
        ));
    }
    out.push_str("END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALA_CA: &str =
        "ATOM      2  CA  ALA A   1       2.000   2.500   3.000  1.00  0.00           C  \n";

    #[test]
    fn single_atom_line() {
        let st = parse_pdb(ALA_CA).unwrap();
        assert_eq!(st.atoms.len(), 1);
        let a = &st.atoms[0];
        assert_eq!(a.element, Element::C);
        assert_eq!(a.name, "CA");
        assert_eq!(a.residue_name, "ALA");
        assert_eq!(a.chain_id, "A");
        assert_eq!(a.coords, [2.0, 2.5, 3.0]);
        assert!(!a.is_hetero);
    }

    #[test]
    fn first_model_only() {
        let text = format!("MODEL        1\n{ALA_CA}ENDMDL\nMODEL        2\n{ALA_CA}{ALA_CA}ENDMDL\nEND\n");
        let st = parse_pdb(&text).unwrap();
        assert_eq!(st.atoms.len(), 1);
        assert_eq!(st.model_index, 1);
    }

    #[test]
    fn non_numeric_coordinate_names_line() {
        let bad =
            "ATOM      2  CA  ALA A   1       xx.xxx   2.500   3.000  1.00  0.00           C  \n";
        let text = format!("{ALA_CA}{bad}");
        match parse_pdb(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse_pdb("END\n"), Err(Error::EmptyStructure)));
    }

    #[test]
    fn altloc_policy() {
        let a = "ATOM      1  CA AALA A   1       1.000   0.000   0.000  1.00  0.00           C  \n";
        let b = "ATOM      2  CA BALA A   1       2.000   0.000   0.000  1.00  0.00           C  \n";
        let st = parse_pdb(&format!("{a}{b}")).unwrap();
        assert_eq!(st.atoms.len(), 1);
        assert_eq!(st.atoms[0].coords[0], 1.0);
    }

    #[test]
    fn insertion_code_in_residue_key() {
        let line =
            "ATOM      1  CA  ALA A  52B      1.000   0.000   0.000  1.00  0.00           C  \n";
        let st = parse_pdb(line).unwrap();
        assert_eq!(st.atoms[0].residue_id(), ("A".into(), "52B".into()));
    }

    #[test]
    fn hetero_two_letter_element_from_name() {
        let line = "HETATM    1 ZN    ZN A 201       0.000   0.000   0.000  1.00  0.00\n";
        let st = parse_pdb(line).unwrap();
        assert_eq!(st.atoms[0].element, Element::Zn);
        assert!(st.atoms[0].is_hetero);
    }

    #[test]
    fn round_trip_preserves_atoms() {
        let src = format!(
            "{ALA_CA}ATOM      3  CB  ALA A   1       2.123   3.456  -1.789  1.00  0.00           C  \nHETATM    4  O1  LIG B 100      10.500  -0.250   7.125  1.00  0.00           O  \n"
        );
        let st = parse_pdb(&src).unwrap();
        let st2 = parse_pdb(&write_pdb(&st)).unwrap();
        assert_eq!(st.atoms.len(), st2.atoms.len());
        for (a, b) in st.atoms.iter().zip(&st2.atoms) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.element, b.element);
            for k in 0..3 {
                assert!((a.coords[k] - b.coords[k]).abs() <= 1e-3);
            }
        }
    }
}
