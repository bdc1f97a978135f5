//! Structural file I/O: PDB-format complexes, SDF V2000 ligands, and a
//! SMILES subset for ligand templates. See FORMATS.md for the exact
//! grammars this module accepts.

mod pdb;
mod sdf;
mod smiles;

pub use pdb::{parse_pdb, write_pdb};
pub use sdf::{parse_sdf, write_sdf};
pub use smiles::parse_smiles;

use crate::elements::Element;
use crate::geometry::Point;
use serde::{Deserialize, Serialize};

/// Residue identity: chain id plus residue sequence key (number with any
/// insertion code appended).
pub type ResidueId = (String, String);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub name: String,
    pub coords: Point,
    pub chain_id: String,
    pub residue_seq: i32,
    pub insertion_code: Option<char>,
    pub residue_name: String,
    pub formal_charge: i32,
    pub is_hetero: bool,
}

impl Atom {
    pub fn residue_id(&self) -> ResidueId {
        let seq = match self.insertion_code {
            Some(c) => format!("{}{}", self.residue_seq, c),
            None => self.residue_seq.to_string(),
        };
        (self.chain_id.clone(), seq)
    }

    pub fn is_heavy(&self) -> bool {
        !self.element.is_hydrogen()
    }
}

/// Ordered heavy-atom model of a protein or full bioassembly.
/// Iteration order is file order and deterministic.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Structure {
    pub atoms: Vec<Atom>,
    pub title: String,
    pub model_index: i32,
}

const STANDARD_AA: [&str; 20] = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU", "LYS", "MET",
    "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
];

pub fn is_standard_aa(res_name: &str) -> bool {
    STANDARD_AA.contains(&res_name)
}

pub fn one_letter_code(res_name: &str) -> char {
    match res_name {
        "ALA" => 'A',
        "ARG" => 'R',
        "ASN" => 'N',
        "ASP" => 'D',
        "CYS" => 'C',
        "GLN" => 'Q',
        "GLU" => 'E',
        "GLY" => 'G',
        "HIS" => 'H',
        "ILE" => 'I',
        "LEU" => 'L',
        "LYS" => 'K',
        "MET" => 'M',
        "PHE" => 'F',
        "PRO" => 'P',
        "SER" => 'S',
        "THR" => 'T',
        "TRP" => 'W',
        "TYR" => 'Y',
        "VAL" => 'V',
        _ => 'X',
    }
}

impl Structure {
    pub fn heavy_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.is_heavy())
    }

    /// Chain ids of protein chains (chains containing standard residues),
    /// in file order.
    pub fn protein_chain_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        for a in &self.atoms {
            if is_standard_aa(&a.residue_name) && !out.contains(&a.chain_id) {
                out.push(a.chain_id.clone());
            }
        }
        out
    }

    /// One-letter sequence of a protein chain, residues in file order.
    pub fn chain_sequence(&self, chain_id: &str) -> String {
        let mut seq = String::new();
        let mut last: Option<ResidueId> = None;
        for a in &self.atoms {
            if a.chain_id != chain_id || !is_standard_aa(&a.residue_name) {
                continue;
            }
            let rid = a.residue_id();
            if last.as_ref() != Some(&rid) {
                seq.push(one_letter_code(&a.residue_name));
                last = Some(rid);
            }
        }
        seq
    }

    /// Hetero residues (non-water, non-standard-amino-acid), grouped by
    /// residue identity in file order. Each group is a candidate ligand
    /// fragment.
    pub fn hetero_fragments(&self) -> Vec<(ResidueId, Vec<&Atom>)> {
        let mut out: Vec<(ResidueId, Vec<&Atom>)> = Vec::new();
        for a in &self.atoms {
            if !a.is_hetero || a.residue_name == "HOH" || a.residue_name == "WAT" {
                continue;
            }
            let rid = a.residue_id();
            match out.iter_mut().find(|(id, _)| *id == rid) {
                Some((_, v)) => v.push(a),
                None => out.push((rid, vec![a])),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphNode {
    pub element: Element,
    pub formal_charge: i32,
    pub aromatic: bool,
    /// Implicit hydrogens (SMILES-derived graphs only; 0 elsewhere).
    pub implicit_h: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub order: BondOrder,
}

/// Ligand as an element/charge/bond-order labeled graph, optionally with
/// 3D coordinates. Edges are stored once with `i < j`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MoleculeGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Bond>,
    pub coords: Option<Vec<Point>>,
}

impl MoleculeGraph {
    pub fn add_edge(&mut self, i: usize, j: usize, order: BondOrder) {
        debug_assert!(i != j, "self-loop");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if !self.edges.iter().any(|e| e.i == a && e.j == b) {
            self.edges.push(Bond { i: a, j: b, order });
        }
    }

    pub fn heavy_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].element.is_hydrogen())
            .collect()
    }

    pub fn heavy_count(&self) -> usize {
        self.heavy_indices().len()
    }

    /// Subgraph over heavy atoms. Returns the subgraph and, per subgraph
    /// node, the index it came from in `self`.
    pub fn heavy_subgraph(&self) -> (MoleculeGraph, Vec<usize>) {
        let keep = self.heavy_indices();
        let mut remap = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let mut g = MoleculeGraph {
            nodes: keep.iter().map(|&i| self.nodes[i]).collect(),
            edges: Vec::new(),
            coords: self
                .coords
                .as_ref()
                .map(|c| keep.iter().map(|&i| c[i]).collect()),
        };
        for e in &self.edges {
            if remap[e.i] != usize::MAX && remap[e.j] != usize::MAX {
                g.add_edge(remap[e.i], remap[e.j], e.order);
            }
        }
        (g, keep)
    }

    pub fn neighbors(&self, i: usize) -> Vec<(usize, BondOrder)> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.i == i {
                out.push((e.j, e.order));
            } else if e.j == i {
                out.push((e.i, e.order));
            }
        }
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|e| e.i == i || e.j == i).count()
    }

    /// Sorted element multiset over heavy atoms, e.g. "C6" for benzene.
    pub fn heavy_formula(&self) -> String {
        let mut counts: std::collections::BTreeMap<&str, usize> = Default::default();
        for &i in &self.heavy_indices() {
            *counts.entry(self.nodes[i].element.symbol()).or_default() += 1;
        }
        counts
            .iter()
            .map(|(s, n)| format!("{s}{n}"))
            .collect::<Vec<_>>()
            .join("")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_id_includes_insertion_code() {
        let a = Atom {
            element: Element::C,
            name: "CA".into(),
            coords: [0.0; 3],
            chain_id: "A".into(),
            residue_seq: 52,
            insertion_code: Some('B'),
            residue_name: "ALA".into(),
            formal_charge: 0,
            is_hetero: false,
        };
        assert_eq!(a.residue_id(), ("A".into(), "52B".into()));
    }

    #[test]
    fn heavy_subgraph_drops_hydrogens() {
        let mut g = MoleculeGraph::default();
        g.nodes.push(GraphNode {
            element: Element::C,
            formal_charge: 0,
            aromatic: false,
            implicit_h: 0,
        });
        g.nodes.push(GraphNode {
            element: Element::H,
            formal_charge: 0,
            aromatic: false,
            implicit_h: 0,
        });
        g.nodes.push(GraphNode {
            element: Element::O,
            formal_charge: 0,
            aromatic: false,
            implicit_h: 0,
        });
        g.add_edge(0, 1, BondOrder::Single);
        g.add_edge(0, 2, BondOrder::Single);
        let (h, back) = g.heavy_subgraph();
        assert_eq!(h.nodes.len(), 2);
        assert_eq!(h.edges.len(), 1);
        assert_eq!(back, vec![0, 2]);
    }
}
