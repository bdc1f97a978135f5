//! Shared synthetic fixtures for the integration tests: a small
//! glycine pocket with an ethane ligand whose every metric outcome is
//! hand-derivable, written to disk in manifest layout.

use poseval::elements::Element;
use poseval::geometry::Point;
use poseval::structio::{
    write_pdb, write_sdf, Atom, BondOrder, GraphNode, MoleculeGraph, Structure,
};
use std::path::{Path, PathBuf};

pub fn gly_residue(seq: i32, atoms: &[(&str, Element, Point)]) -> Vec<Atom> {
    atoms
        .iter()
        .map(|&(name, element, coords)| Atom {
            element,
            name: name.to_string(),
            coords,
            chain_id: "A".into(),
            residue_seq: seq,
            insertion_code: None,
            residue_name: "GLY".into(),
            formal_charge: 0,
            is_hetero: false,
        })
        .collect()
}

/// Four glycines around the origin; residue 1's carbonyl O sits exactly
/// 3.4 A from a ligand atom at the origin, giving one VdW contact.
pub fn pocket_protein() -> Structure {
    let mut atoms = Vec::new();
    atoms.extend(gly_residue(
        1,
        &[
            ("N", Element::N, [-4.63, 1.45, 0.0]),
            ("CA", Element::C, [-4.63, 2.60, 0.5]),
            ("C", Element::C, [-4.63, 0.0, 0.0]),
            ("O", Element::O, [-3.40, 0.0, 0.0]),
        ],
    ));
    atoms.extend(gly_residue(
        2,
        &[
            ("N", Element::N, [0.0, 5.0, 0.0]),
            ("CA", Element::C, [1.15, 5.0, 0.3]),
            ("C", Element::C, [2.3, 5.0, 0.0]),
            ("O", Element::O, [2.3, 6.23, 0.0]),
        ],
    ));
    atoms.extend(gly_residue(
        3,
        &[
            ("N", Element::N, [0.0, -5.0, 1.0]),
            ("CA", Element::C, [1.15, -5.0, 1.3]),
            ("C", Element::C, [2.3, -5.0, 1.0]),
            ("O", Element::O, [2.3, -6.23, 1.0]),
        ],
    ));
    atoms.extend(gly_residue(
        4,
        &[
            ("N", Element::N, [0.0, 0.0, 6.0]),
            ("CA", Element::C, [1.15, 0.0, 6.3]),
            ("C", Element::C, [2.3, 0.0, 6.0]),
            ("O", Element::O, [2.3, 1.23, 6.0]),
        ],
    ));
    Structure {
        atoms,
        title: String::new(),
        model_index: 0,
    }
}

/// Bent three-carbon ligand; non-collinear so superposition-based
/// options (like ligand pre-alignment) are well-posed.
pub fn bent_ligand(offset: Point) -> MoleculeGraph {
    let node = GraphNode {
        element: Element::C,
        formal_charge: 0,
        aromatic: false,
        implicit_h: 0,
    };
    let mut g = MoleculeGraph {
        nodes: vec![node, node, node],
        edges: vec![],
        coords: Some(vec![
            offset,
            [offset[0] + 1.52, offset[1], offset[2]],
            [offset[0] + 1.52, offset[1] + 1.52, offset[2]],
        ]),
    };
    g.add_edge(0, 1, BondOrder::Single);
    g.add_edge(1, 2, BondOrder::Single);
    g
}

pub fn ligand_hetero_atoms(g: &MoleculeGraph, residue_seq: i32) -> Vec<Atom> {
    let coords = g.coords.as_ref().unwrap();
    g.nodes
        .iter()
        .zip(coords)
        .enumerate()
        .map(|(i, (n, &p))| Atom {
            element: n.element,
            name: format!("{}{}", n.element.symbol().to_ascii_uppercase(), i + 1),
            coords: p,
            chain_id: "L".into(),
            residue_seq,
            insertion_code: None,
            residue_name: "LIG".into(),
            formal_charge: n.formal_charge,
            is_hetero: true,
        })
        .collect()
}

pub fn complex_pdb(protein: &Structure, ligands: &[&MoleculeGraph]) -> String {
    let mut st = protein.clone();
    for (i, g) in ligands.iter().enumerate() {
        st.atoms.extend(ligand_hetero_atoms(g, 101 + i as i32));
    }
    write_pdb(&st)
}

/// Two primary-mode targets, two runs each: exact predictions for run
/// 0, a 10 A shifted ligand for run 1. Returns the manifest path.
pub fn write_score_fixture(dir: &Path) -> PathBuf {
    let protein = pocket_protein();
    let ligand = bent_ligand([0.0, 0.0, 0.0]);
    std::fs::write(dir.join("ref.pdb"), write_pdb(&protein)).unwrap();
    std::fs::write(dir.join("lig.sdf"), write_sdf(std::slice::from_ref(&ligand))).unwrap();
    std::fs::write(dir.join("pred_exact.pdb"), complex_pdb(&protein, &[&ligand])).unwrap();
    let shifted = bent_ligand([0.0, 10.0, 0.0]);
    std::fs::write(
        dir.join("pred_shifted.pdb"),
        complex_pdb(&protein, &[&shifted]),
    )
    .unwrap();
    let line = |target: &str| {
        format!(
            r#"{{"target_id":"{target}","ref_protein_path":"ref.pdb","ref_ligand_paths":["lig.sdf"],"predicted_complex_paths":["pred_exact.pdb","pred_shifted.pdb"],"mode":"primary"}}"#
        )
    };
    let manifest = dir.join("manifest.jsonl");
    std::fs::write(&manifest, format!("{}\n{}\n", line("T1"), line("T2"))).unwrap();
    manifest
}
