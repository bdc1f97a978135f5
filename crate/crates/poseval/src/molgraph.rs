//! Molecule-graph algorithms: bond perception for coordinate-only
//! ligands, template matching between graphs with different atom orders,
//! and automorphism enumeration for symmetry-corrected RMSD.

use crate::elements::Element;
use crate::error::{Error, Result};
use crate::geometry::dist;
use crate::structio::{Atom, Bond, BondOrder, GraphNode, MoleculeGraph};
use std::collections::BTreeMap;

/// Extra margin over the covalent-radius sum when perceiving bonds from
/// coordinates alone (common literature tolerance).
pub const BOND_PERCEPTION_TOLERANCE: f64 = 0.45;

/// Atom correspondence between a template graph and a coordinate graph.
/// Pairs are (template_index, target_index) over heavy atoms, bijective.
#[derive(Debug, Clone)]
pub struct AtomMapping {
    pub pairs: Vec<(usize, usize)>,
}

impl AtomMapping {
    pub fn identity(n: usize) -> Self {
        AtomMapping {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }
}

/// Label-preserving automorphisms of a molecule graph, as permutations
/// over heavy-atom indices. `truncated` is set when the cap was hit.
#[derive(Debug, Clone)]
pub struct AutomorphismSet {
    pub perms: Vec<Vec<usize>>,
    pub truncated: bool,
}

/// Build a bond graph from bare atoms: edge iff the distance is within
/// the covalent-radius sum plus [`BOND_PERCEPTION_TOLERANCE`]. All bond
/// orders are single; metal-metal edges are never created.
pub fn perceive_bonds(atoms: &[Atom]) -> Result<MoleculeGraph> {
    perceive_bonds_with_tolerance(atoms, BOND_PERCEPTION_TOLERANCE)
}

pub fn perceive_bonds_with_tolerance(atoms: &[Atom], tolerance: f64) -> Result<MoleculeGraph> {
    if atoms.is_empty() {
        return Err(Error::InvalidInput("no atoms to perceive bonds for".into()));
    }
    let mut g = MoleculeGraph {
        nodes: atoms
            .iter()
            .map(|a| GraphNode {
                element: a.element,
                formal_charge: a.formal_charge,
                aromatic: false,
                implicit_h: 0,
            })
            .collect(),
        edges: Vec::new(),
        coords: Some(atoms.iter().map(|a| a.coords).collect()),
    };
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let (a, b) = (&atoms[i], &atoms[j]);
            if a.element.is_metal() && b.element.is_metal() {
                continue;
            }
            let cutoff = a.element.covalent_radius() + b.element.covalent_radius() + tolerance;
            if dist(a.coords, b.coords) <= cutoff {
                g.add_edge(i, j, BondOrder::Single);
            }
        }
    }
    Ok(g)
}

type NodeLabel = (Element, i32, bool);

fn node_label(n: &GraphNode) -> NodeLabel {
    (n.element, n.formal_charge, n.aromatic)
}

/// Adjacency with bond orders, indexed by node.
fn adjacency(g: &MoleculeGraph) -> Vec<BTreeMap<usize, BondOrder>> {
    let mut adj = vec![BTreeMap::new(); g.nodes.len()];
    for &Bond { i, j, order } in &g.edges {
        adj[i].insert(j, order);
        adj[j].insert(i, order);
    }
    adj
}

struct IsoSearch<'a> {
    a_labels: Vec<NodeLabel>,
    b_labels: Vec<NodeLabel>,
    a_adj: &'a [BTreeMap<usize, BondOrder>],
    b_adj: &'a [BTreeMap<usize, BondOrder>],
    respect_orders: bool,
    /// Template nodes in visit order (high degree first for pruning).
    order: Vec<usize>,
    budget: u64,
}

impl<'a> IsoSearch<'a> {
    fn edge_consistent(&self, a_u: usize, a_v: usize, b_u: usize, b_v: usize) -> bool {
        match (self.a_adj[a_u].get(&a_v), self.b_adj[b_u].get(&b_v)) {
            (Some(oa), Some(ob)) => !self.respect_orders || oa == ob,
            (None, None) => true,
            _ => false,
        }
    }

    /// Extend a partial map; `emit` gets each completed mapping and
    /// returns false to stop the search.
    fn search(
        &mut self,
        depth: usize,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        emit: &mut dyn FnMut(&[Option<usize>]) -> bool,
    ) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(emit(map));
        }
        let u = self.order[depth];
        for v in 0..self.b_labels.len() {
            if used[v] || self.a_labels[u] != self.b_labels[v] {
                continue;
            }
            if self.a_adj[u].len() != self.b_adj[v].len() {
                continue;
            }
            if self.budget == 0 {
                return Err(Error::ResourceExhausted(
                    "isomorphism search node budget".into(),
                ));
            }
            self.budget -= 1;
            // Consistency with all already-mapped template nodes.
            let ok = self.order[..depth].iter().all(|&w| {
                let mw = map[w].unwrap();
                self.edge_consistent(u, w, v, mw)
            });
            if !ok {
                continue;
            }
            map[u] = Some(v);
            used[v] = true;
            let cont = self.search(depth + 1, map, used, emit)?;
            map[u] = None;
            used[v] = false;
            if !cont {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn visit_order(g: &MoleculeGraph) -> Vec<usize> {
    // BFS from the highest-degree node so each new node is adjacent to a
    // mapped one where possible; greatly prunes the search.
    let adj = adjacency(g);
    let n = g.nodes.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| std::cmp::Reverse(adj[i].len()));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for (&v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

const DEFAULT_SEARCH_BUDGET: u64 = 5_000_000;

/// Find a label-preserving isomorphism from `template` heavy atoms onto
/// `target` heavy atoms. Bond orders are NOT part of the labels here:
/// perceived graphs carry all-single orders while SDF graphs carry real
/// ones, and the two must still match.
pub fn match_template(template: &MoleculeGraph, target: &MoleculeGraph) -> Result<AtomMapping> {
    let (ta, ta_back) = template.heavy_subgraph();
    let (tb, tb_back) = target.heavy_subgraph();
    if ta.nodes.len() != tb.nodes.len() {
        return Err(Error::InvalidInput(format!(
            "heavy-atom counts differ: {} vs {}",
            ta.nodes.len(),
            tb.nodes.len()
        )));
    }
    let mut fa: Vec<Element> = ta.nodes.iter().map(|n| n.element).collect();
    let mut fb: Vec<Element> = tb.nodes.iter().map(|n| n.element).collect();
    fa.sort();
    fb.sort();
    if fa != fb {
        return Err(Error::InvalidInput(
            "element multisets differ between template and target".into(),
        ));
    }
    // Template matching ignores charge and aromatic flags too: SMILES
    // templates carry aromatic flags that perceived graphs cannot.
    let plain = |n: &GraphNode| (n.element, 0, false);
    let a_adj = adjacency(&ta);
    let b_adj = adjacency(&tb);
    let mut search = IsoSearch {
        a_labels: ta.nodes.iter().map(plain).collect(),
        b_labels: tb.nodes.iter().map(plain).collect(),
        a_adj: &a_adj,
        b_adj: &b_adj,
        respect_orders: false,
        order: visit_order(&ta),
        budget: DEFAULT_SEARCH_BUDGET,
    };
    let mut found: Option<Vec<usize>> = None;
    let mut map = vec![None; ta.nodes.len()];
    let mut used = vec![false; tb.nodes.len()];
    search.search(0, &mut map, &mut used, &mut |m| {
        found = Some(m.iter().map(|x| x.unwrap()).collect());
        false
    })?;
    match found {
        Some(m) => Ok(AtomMapping {
            pairs: m
                .iter()
                .enumerate()
                .map(|(i, &j)| (ta_back[i], tb_back[j]))
                .collect(),
        }),
        None => Err(Error::MappingFailure),
    }
}

pub const DEFAULT_AUTOMORPHISM_CAP: usize = 10_000;

/// All label-preserving automorphisms of the heavy-atom graph, up to
/// `cap`. Labels are element, charge, aromatic flag, and bond order.
/// The identity is always present; explosion becomes truncation, never
/// an error.
pub fn automorphisms(g: &MoleculeGraph, cap: usize) -> AutomorphismSet {
    let (h, _) = g.heavy_subgraph();
    let n = h.nodes.len();
    if n == 0 {
        return AutomorphismSet {
            perms: vec![vec![]],
            truncated: false,
        };
    }
    let adj = adjacency(&h);
    let labels: Vec<NodeLabel> = h.nodes.iter().map(node_label).collect();
    let mut search = IsoSearch {
        a_labels: labels.clone(),
        b_labels: labels,
        a_adj: &adj,
        b_adj: &adj,
        respect_orders: true,
        order: visit_order(&h),
        budget: u64::MAX,
    };
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut truncated = false;
    let mut map = vec![None; n];
    let mut used = vec![false; n];
    let _ = search.search(0, &mut map, &mut used, &mut |m| {
        perms.push(m.iter().map(|x| x.unwrap()).collect());
        if perms.len() >= cap {
            truncated = true;
            false
        } else {
            true
        }
    });
    // Identity first, then lexicographic; deterministic output order.
    perms.sort();
    AutomorphismSet { perms, truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::parse_smiles;

    fn atom(element: Element, coords: [f64; 3]) -> Atom {
        Atom {
            element,
            name: element.symbol().to_string(),
            coords,
            chain_id: "L".into(),
            residue_seq: 1,
            insertion_code: None,
            residue_name: "LIG".into(),
            formal_charge: 0,
            is_hetero: true,
        }
    }

    #[test]
    fn perceive_bonds_threshold() {
        // C-C covalent sum + tolerance = 0.76 + 0.76 + 0.45 = 1.97 A.
        let bonded = vec![
            atom(Element::C, [0.0, 0.0, 0.0]),
            atom(Element::C, [1.52, 0.0, 0.0]),
        ];
        assert_eq!(perceive_bonds(&bonded).unwrap().edges.len(), 1);
        let apart = vec![
            atom(Element::C, [0.0, 0.0, 0.0]),
            atom(Element::C, [2.50, 0.0, 0.0]),
        ];
        assert_eq!(perceive_bonds(&apart).unwrap().edges.len(), 0);
    }

    #[test]
    fn perceive_single_atom() {
        let g = perceive_bonds(&[atom(Element::C, [0.0; 3])]).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn no_metal_metal_edges() {
        let pair = vec![
            atom(Element::Zn, [0.0, 0.0, 0.0]),
            atom(Element::Zn, [2.0, 0.0, 0.0]),
        ];
        assert!(perceive_bonds(&pair).unwrap().edges.is_empty());
    }

    #[test]
    fn perceive_bonds_rigid_motion_invariant() {
        let atoms = vec![
            atom(Element::C, [0.0, 0.0, 0.0]),
            atom(Element::C, [1.52, 0.0, 0.0]),
            atom(Element::O, [2.2, 1.1, 0.0]),
        ];
        let g1 = perceive_bonds(&atoms).unwrap();
        let moved: Vec<Atom> = atoms
            .iter()
            .map(|a| {
                let mut b = a.clone();
                // 90 degrees about z plus a shift.
                b.coords = [-a.coords[1] + 5.0, a.coords[0] - 3.0, a.coords[2] + 1.0];
                b
            })
            .collect();
        let g2 = perceive_bonds(&moved).unwrap();
        assert_eq!(g1.edges, g2.edges);
    }

    #[test]
    fn match_identity() {
        let g = parse_smiles("CC(=O)N").unwrap();
        let m = match_template(&g, &g).unwrap();
        assert_eq!(m.pairs, AtomMapping::identity(4).pairs);
    }

    #[test]
    fn match_cco_vs_occ() {
        let a = parse_smiles("CCO").unwrap();
        let b = parse_smiles("OCC").unwrap();
        let m = match_template(&a, &b).unwrap();
        let mut pairs = m.pairs.clone();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 2), (1, 1), (2, 0)]);
    }

    #[test]
    fn match_element_multiset_mismatch() {
        let a = parse_smiles("CCC").unwrap();
        let b = parse_smiles("CCO").unwrap();
        assert!(matches!(
            match_template(&a, &b),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn match_no_isomorphism() {
        // Same formula C4, different connectivity: n-butane vs isobutane.
        let a = parse_smiles("CCCC").unwrap();
        let b = parse_smiles("CC(C)C").unwrap();
        assert!(matches!(match_template(&a, &b), Err(Error::MappingFailure)));
    }

    #[test]
    fn automorphisms_linear_chain() {
        let g = parse_smiles("CON").unwrap();
        let auts = automorphisms(&g, DEFAULT_AUTOMORPHISM_CAP);
        assert_eq!(auts.perms, vec![vec![0, 1, 2]]);
        assert!(!auts.truncated);
    }

    fn brute_force_automorphisms(g: &MoleculeGraph) -> Vec<Vec<usize>> {
        let (h, _) = g.heavy_subgraph();
        let n = h.nodes.len();
        let adj = adjacency(&h);
        let labels: Vec<NodeLabel> = h.nodes.iter().map(node_label).collect();
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let label_ok = (0..n).all(|i| labels[i] == labels[p[i]]);
            let edge_ok = (0..n).all(|i| {
                (0..n).all(|j| adj[i].get(&j) == adj[p[i]].get(&p[j]))
            });
            if label_ok && edge_ok {
                out.push(p.to_vec());
            }
        });
        out.sort();
        out
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn benzene_has_twelve_automorphisms() {
        let g = parse_smiles("c1ccccc1").unwrap();
        let auts = automorphisms(&g, DEFAULT_AUTOMORPHISM_CAP);
        assert_eq!(auts.perms.len(), 12);
        assert_eq!(auts.perms, brute_force_automorphisms(&g));
    }

    #[test]
    fn para_disubstituted_ring() {
        // Distinct substituents at 1,4: only identity and the mirror.
        let g = parse_smiles("Oc1ccc(N)cc1").unwrap();
        let auts = automorphisms(&g, DEFAULT_AUTOMORPHISM_CAP);
        assert_eq!(auts.perms.len(), 2);
        assert_eq!(auts.perms, brute_force_automorphisms(&g));
    }

    #[test]
    fn automorphism_group_closure() {
        for smiles in ["CCO", "c1ccccc1", "CC(C)C", "OCC(O)CO"] {
            let g = parse_smiles(smiles).unwrap();
            let auts = automorphisms(&g, DEFAULT_AUTOMORPHISM_CAP);
            assert!(!auts.truncated);
            let n = g.heavy_count();
            let id: Vec<usize> = (0..n).collect();
            assert!(auts.perms.contains(&id), "identity missing for {smiles}");
            for p in &auts.perms {
                // Inverse present.
                let mut inv = vec![0; n];
                for (i, &pi) in p.iter().enumerate() {
                    inv[pi] = i;
                }
                assert!(auts.perms.contains(&inv));
                // Closed under composition.
                for q in &auts.perms {
                    let comp: Vec<usize> = (0..n).map(|i| p[q[i]]).collect();
                    assert!(auts.perms.contains(&comp));
                }
            }
        }
    }

    #[test]
    fn truncation_flag() {
        let g = parse_smiles("c1ccccc1").unwrap();
        let auts = automorphisms(&g, 1);
        assert!(auts.truncated);
        assert_eq!(auts.perms.len(), 1);
    }
}
