//! Geometric interaction detection between a protein structure and a
//! ligand graph with coordinates.
//!
//! Criteria are distance/angle rules over typed atoms, with every
//! threshold in [`InteractionConfig`] (echoed into reports). Records are
//! ligand-centric. Granularity: hydrogen bonds, salt bridges, pi
//! interactions, and metal coordinations count once per qualifying
//! atom/group pair; hydrophobic and van der Waals contacts collapse to
//! one record per residue instance.

use super::{InteractionRecord, InteractionType};
use crate::error::{Error, Result};
use crate::geometry::{centroid, cross, dist, dot, norm, sub, Point};
use crate::structio::{is_standard_aa, Atom, MoleculeGraph, ResidueId, Structure};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionConfig {
    /// Donor-heavy to acceptor-heavy distance ceiling.
    pub hbond_distance: f64,
    /// Minimum D-H...A angle, applied only when hydrogens are present.
    pub hbond_angle_deg: f64,
    pub hydrophobic_distance: f64,
    /// Margin over the vdW-radius sum for contact detection.
    pub vdw_tolerance: f64,
    /// Charged-group centroid distance ceiling.
    pub salt_bridge_distance: f64,
    /// Aromatic ring centroid distance ceiling.
    pub pi_stack_distance: f64,
    /// Interplanar angle ceiling for parallel stacking.
    pub pi_stack_parallel_angle_deg: f64,
    /// Interplanar angle window for T-shaped stacking.
    pub pi_stack_tshape_min_deg: f64,
    pub pi_stack_tshape_max_deg: f64,
    pub pi_cation_distance: f64,
    pub metal_distance: f64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        InteractionConfig {
            hbond_distance: 3.5,
            hbond_angle_deg: 130.0,
            hydrophobic_distance: 4.5,
            vdw_tolerance: 0.5,
            salt_bridge_distance: 4.5,
            pi_stack_distance: 5.5,
            pi_stack_parallel_angle_deg: 30.0,
            pi_stack_tshape_min_deg: 60.0,
            pi_stack_tshape_max_deg: 90.0,
            pi_cation_distance: 4.5,
            metal_distance: 2.8,
        }
    }
}

// Side-chain donor / acceptor heavy atoms by (residue, atom name).
const PROTEIN_DONORS: &[(&str, &str)] = &[
    ("SER", "OG"),
    ("THR", "OG1"),
    ("TYR", "OH"),
    ("CYS", "SG"),
    ("ASN", "ND2"),
    ("GLN", "NE2"),
    ("LYS", "NZ"),
    ("ARG", "NE"),
    ("ARG", "NH1"),
    ("ARG", "NH2"),
    ("HIS", "ND1"),
    ("HIS", "NE2"),
    ("TRP", "NE1"),
];

const PROTEIN_ACCEPTORS: &[(&str, &str)] = &[
    ("ASP", "OD1"),
    ("ASP", "OD2"),
    ("GLU", "OE1"),
    ("GLU", "OE2"),
    ("ASN", "OD1"),
    ("GLN", "OE1"),
    ("SER", "OG"),
    ("THR", "OG1"),
    ("TYR", "OH"),
    ("HIS", "ND1"),
    ("HIS", "NE2"),
    ("MET", "SD"),
];

const PROTEIN_CATION_GROUPS: &[(&str, &[&str])] =
    &[("ARG", &["CZ", "NH1", "NH2"]), ("LYS", &["NZ"])];

const PROTEIN_ANION_GROUPS: &[(&str, &[&str])] =
    &[("ASP", &["OD1", "OD2"]), ("GLU", &["OE1", "OE2"])];

const PROTEIN_RINGS: &[(&str, &[&str])] = &[
    ("PHE", &["CG", "CD1", "CD2", "CE1", "CE2", "CZ"]),
    ("TYR", &["CG", "CD1", "CD2", "CE1", "CE2", "CZ"]),
    ("TRP", &["CG", "CD1", "NE1", "CE2", "CD2"]),
    ("TRP", &["CD2", "CE2", "CZ2", "CH2", "CZ3", "CE3"]),
    ("HIS", &["CG", "ND1", "CD2", "CE1", "NE2"]),
];

fn protein_is_donor(a: &Atom) -> bool {
    if a.name == "N" && is_standard_aa(&a.residue_name) {
        return true; // backbone amide
    }
    PROTEIN_DONORS
        .iter()
        .any(|&(r, n)| r == a.residue_name && n == a.name)
}

fn protein_is_acceptor(a: &Atom) -> bool {
    if (a.name == "O" || a.name == "OXT") && is_standard_aa(&a.residue_name) {
        return true; // backbone carbonyl
    }
    PROTEIN_ACCEPTORS
        .iter()
        .any(|&(r, n)| r == a.residue_name && n == a.name)
}

fn residue_type(a: &Atom) -> String {
    if is_standard_aa(&a.residue_name) {
        a.residue_name.clone()
    } else {
        "UNK".to_string()
    }
}

/// Ring plane normal by Newell's method (robust for near-planar rings).
fn ring_normal(points: &[Point]) -> Point {
    let mut n = [0.0; 3];
    for k in 0..points.len() {
        let a = points[k];
        let b = points[(k + 1) % points.len()];
        let c = cross(a, b);
        n[0] += c[0];
        n[1] += c[1];
        n[2] += c[2];
    }
    let l = norm(n);
    if l < 1e-12 {
        [0.0, 0.0, 1.0]
    } else {
        [n[0] / l, n[1] / l, n[2] / l]
    }
}

fn interplanar_angle_deg(n1: Point, n2: Point) -> f64 {
    let c = dot(n1, n2).abs().clamp(0.0, 1.0);
    c.acos().to_degrees()
}

fn angle_at_deg(vertex: Point, a: Point, b: Point) -> f64 {
    let u = sub(a, vertex);
    let v = sub(b, vertex);
    let nu = norm(u);
    let nv = norm(v);
    if nu < 1e-12 || nv < 1e-12 {
        return 0.0;
    }
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Aromatic rings of the ligand: fundamental cycles of size 5 or 6 in
/// the aromatic subgraph.
fn ligand_aromatic_rings(g: &MoleculeGraph) -> Vec<Vec<usize>> {
    let aromatic: BTreeSet<usize> = (0..g.nodes.len()).filter(|&i| g.nodes[i].aromatic).collect();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &g.edges {
        if aromatic.contains(&e.i) && aromatic.contains(&e.j) {
            adj.entry(e.i).or_default().push(e.j);
            adj.entry(e.j).or_default().push(e.i);
        }
    }
    // Spanning forest; each non-tree edge closes one fundamental cycle.
    let mut parent: BTreeMap<usize, Option<usize>> = BTreeMap::new();
    let mut depth: BTreeMap<usize, usize> = BTreeMap::new();
    let mut tree_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &start in &aromatic {
        if parent.contains_key(&start) {
            continue;
        }
        parent.insert(start, None);
        depth.insert(start, 0);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in adj.get(&u).map(|v| v.as_slice()).unwrap_or(&[]) {
                if !parent.contains_key(&v) {
                    parent.insert(v, Some(u));
                    depth.insert(v, depth[&u] + 1);
                    tree_edges.insert((u.min(v), u.max(v)));
                    stack.push(v);
                }
            }
        }
    }
    let mut rings = Vec::new();
    for e in &g.edges {
        let (a, b) = (e.i.min(e.j), e.i.max(e.j));
        if !aromatic.contains(&a) || !aromatic.contains(&b) || tree_edges.contains(&(a, b)) {
            continue;
        }
        // Walk both nodes up to their common ancestor.
        let mut pa = Vec::new();
        let mut x = Some(a);
        while let Some(u) = x {
            pa.push(u);
            x = parent[&u];
        }
        let mut cycle = Vec::new();
        let mut y = Some(b);
        while let Some(u) = y {
            if let Some(pos) = pa.iter().position(|&w| w == u) {
                cycle.extend(pa[..=pos].iter().copied());
                break;
            }
            cycle.push(u);
            y = parent[&u];
        }
        if (5..=6).contains(&cycle.len()) {
            rings.push(cycle);
        }
    }
    rings
}

struct ClaimedPairs(BTreeSet<(usize, usize)>);

impl ClaimedPairs {
    fn claim(&mut self, lig: usize, prot: usize) {
        self.0.insert((lig, prot));
    }
    fn contains(&self, lig: usize, prot: usize) -> bool {
        self.0.contains(&(lig, prot))
    }
}

/// Detect all configured interaction types between `protein` and a
/// positioned ligand graph.
pub fn detect_interactions(
    protein: &Structure,
    ligand: &MoleculeGraph,
    ligand_id: &str,
    config: &InteractionConfig,
) -> Result<Vec<InteractionRecord>> {
    let lig_coords = ligand
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("ligand has no coordinates".into()))?;
    let mut records: Vec<InteractionRecord> = Vec::new();
    let mut claimed = ClaimedPairs(BTreeSet::new());

    let record = |records: &mut Vec<InteractionRecord>, res: String, ty: InteractionType| {
        records.push(InteractionRecord {
            ligand_id: ligand_id.to_string(),
            residue_type: res,
            interaction_type: ty,
        });
    };

    // Ligand atom typing from the graph.
    let heavy = ligand.heavy_indices();
    let has_h = |i: usize| -> bool {
        ligand.nodes[i].implicit_h > 0
            || ligand
                .neighbors(i)
                .iter()
                .any(|&(j, _)| ligand.nodes[j].element.is_hydrogen())
    };
    let bonded_no = |i: usize| -> bool {
        ligand.neighbors(i).iter().any(|&(j, _)| {
            matches!(
                ligand.nodes[j].element,
                crate::elements::Element::N | crate::elements::Element::O
            )
        })
    };
    let is_no = |i: usize| {
        matches!(
            ligand.nodes[i].element,
            crate::elements::Element::N | crate::elements::Element::O
        )
    };
    let is_nos = |i: usize| {
        is_no(i) || ligand.nodes[i].element == crate::elements::Element::S
    };
    let lig_donors: Vec<usize> = heavy
        .iter()
        .copied()
        .filter(|&i| is_nos(i) && (has_h(i) || ligand.nodes[i].formal_charge > 0))
        .collect();
    let lig_acceptors: Vec<usize> = heavy
        .iter()
        .copied()
        .filter(|&i| is_no(i) && ligand.nodes[i].formal_charge <= 0)
        .collect();
    let lig_apolar: Vec<usize> = heavy
        .iter()
        .copied()
        .filter(|&i| {
            matches!(
                ligand.nodes[i].element,
                crate::elements::Element::C | crate::elements::Element::S
            ) && !bonded_no(i)
        })
        .collect();
    let lig_cations: Vec<usize> = heavy
        .iter()
        .copied()
        .filter(|&i| ligand.nodes[i].formal_charge > 0)
        .collect();
    // Anionic groups: a charged O pulls in sibling oxygens on the same
    // carbon (carboxylate/phosphate style); others stand alone.
    let mut lig_anion_groups: Vec<Vec<usize>> = Vec::new();
    let mut grouped: BTreeSet<usize> = BTreeSet::new();
    for &i in &heavy {
        if ligand.nodes[i].formal_charge >= 0 || grouped.contains(&i) {
            continue;
        }
        let mut group = vec![i];
        if ligand.nodes[i].element == crate::elements::Element::O {
            for (c, _) in ligand.neighbors(i) {
                if ligand.nodes[c].element == crate::elements::Element::C
                    || ligand.nodes[c].element == crate::elements::Element::P
                    || ligand.nodes[c].element == crate::elements::Element::S
                {
                    for (o, _) in ligand.neighbors(c) {
                        if o != i
                            && ligand.nodes[o].element == crate::elements::Element::O
                            && ligand.degree(o) == 1
                        {
                            group.push(o);
                        }
                    }
                }
            }
        }
        grouped.extend(group.iter().copied());
        lig_anion_groups.push(group);
    }
    let lig_metals: Vec<usize> = heavy
        .iter()
        .copied()
        .filter(|&i| ligand.nodes[i].element.is_metal())
        .collect();
    let lig_rings = ligand_aromatic_rings(ligand);
    // Ligand hydrogens attached to each heavy atom (explicit only).
    let attached_h = |i: usize| -> Vec<Point> {
        ligand
            .neighbors(i)
            .iter()
            .filter(|&&(j, _)| ligand.nodes[j].element.is_hydrogen())
            .map(|&(j, _)| lig_coords[j])
            .collect()
    };

    // Protein atoms near the ligand (coarse prefilter).
    let reach = [
        config.hbond_distance,
        config.hydrophobic_distance,
        config.salt_bridge_distance,
        config.pi_stack_distance,
        config.pi_cation_distance,
        config.metal_distance,
        8.0,
    ]
    .into_iter()
    .fold(0.0, f64::max)
        + 4.0;
    let near: Vec<(usize, &Atom)> = protein
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| {
            heavy
                .iter()
                .any(|&l| dist(a.coords, lig_coords[l]) <= reach)
        })
        .collect();
    // Protein hydrogens attached to a donor heavy atom (within 1.3 A,
    // same residue).
    let prot_h = |donor: &Atom| -> Vec<Point> {
        near.iter()
            .filter(|(_, h)| {
                h.element.is_hydrogen()
                    && h.residue_id() == donor.residue_id()
                    && dist(h.coords, donor.coords) <= 1.3
            })
            .map(|(_, h)| h.coords)
            .collect()
    };

    // Hydrogen bonds.
    for &l in &lig_donors {
        for &(pi, pa) in &near {
            if !pa.is_heavy() || pa.is_hetero || !protein_is_acceptor(pa) {
                continue;
            }
            let d = dist(lig_coords[l], pa.coords);
            if d > config.hbond_distance {
                continue;
            }
            let hs = attached_h(l);
            let angle_ok = if hs.is_empty() {
                true // distance-only when hydrogens are absent
            } else {
                hs.iter()
                    .any(|&h| angle_at_deg(h, lig_coords[l], pa.coords) >= config.hbond_angle_deg)
            };
            if angle_ok {
                claimed.claim(l, pi);
                record(&mut records, residue_type(pa), InteractionType::HBondDonor);
            }
        }
    }
    for &l in &lig_acceptors {
        for &(pi, pa) in &near {
            if !pa.is_heavy() || pa.is_hetero || !protein_is_donor(pa) {
                continue;
            }
            let d = dist(lig_coords[l], pa.coords);
            if d > config.hbond_distance {
                continue;
            }
            let hs = prot_h(pa);
            let angle_ok = if hs.is_empty() {
                true
            } else {
                hs.iter()
                    .any(|&h| angle_at_deg(h, pa.coords, lig_coords[l]) >= config.hbond_angle_deg)
            };
            if angle_ok {
                claimed.claim(l, pi);
                record(&mut records, residue_type(pa), InteractionType::HBondAcceptor);
            }
        }
    }

    // Protein charged groups and rings, per residue instance.
    let mut residues: BTreeMap<ResidueId, Vec<(usize, &Atom)>> = BTreeMap::new();
    for &(pi, pa) in &near {
        if pa.is_heavy() && !pa.is_hetero {
            residues.entry(pa.residue_id()).or_default().push((pi, pa));
        }
    }
    let group_atoms = |atoms: &[(usize, &Atom)], names: &[&str]| -> Option<Vec<(usize, Point)>> {
        let found: Vec<(usize, Point)> = names
            .iter()
            .filter_map(|n| {
                atoms
                    .iter()
                    .find(|(_, a)| a.name == *n)
                    .map(|(i, a)| (*i, a.coords))
            })
            .collect();
        (found.len() == names.len()).then_some(found)
    };

    // Salt bridges.
    for (_, atoms) in &residues {
        let res_name = atoms[0].1.residue_name.clone();
        for &(gres, names) in PROTEIN_CATION_GROUPS {
            if gres != res_name {
                continue;
            }
            let Some(g) = group_atoms(atoms, names) else { continue };
            let pc = centroid(&g.iter().map(|&(_, p)| p).collect::<Vec<_>>()).unwrap();
            for anion in &lig_anion_groups {
                let lc =
                    centroid(&anion.iter().map(|&i| lig_coords[i]).collect::<Vec<_>>()).unwrap();
                if dist(pc, lc) <= config.salt_bridge_distance {
                    for &l in anion {
                        for &(pi, _) in &g {
                            claimed.claim(l, pi);
                        }
                    }
                    record(
                        &mut records,
                        res_name.clone(),
                        InteractionType::SaltBridgeAnionic,
                    );
                }
            }
        }
        for &(gres, names) in PROTEIN_ANION_GROUPS {
            if gres != res_name {
                continue;
            }
            let Some(g) = group_atoms(atoms, names) else { continue };
            let pc = centroid(&g.iter().map(|&(_, p)| p).collect::<Vec<_>>()).unwrap();
            for &l in &lig_cations {
                if dist(pc, lig_coords[l]) <= config.salt_bridge_distance {
                    for &(pi, _) in &g {
                        claimed.claim(l, pi);
                    }
                    record(
                        &mut records,
                        res_name.clone(),
                        InteractionType::SaltBridgeCationic,
                    );
                }
            }
        }
    }

    // Pi stacking and pi-cation.
    for (_, atoms) in &residues {
        let res_name = atoms[0].1.residue_name.clone();
        for &(rres, names) in PROTEIN_RINGS {
            if rres != res_name {
                continue;
            }
            let Some(ring) = group_atoms(atoms, names) else { continue };
            let pts: Vec<Point> = ring.iter().map(|&(_, p)| p).collect();
            let pc = centroid(&pts).unwrap();
            let pn = ring_normal(&pts);
            for lring in &lig_rings {
                let lpts: Vec<Point> = lring.iter().map(|&i| lig_coords[i]).collect();
                let lc = centroid(&lpts).unwrap();
                if dist(pc, lc) > config.pi_stack_distance {
                    continue;
                }
                let angle = interplanar_angle_deg(pn, ring_normal(&lpts));
                let parallel = angle <= config.pi_stack_parallel_angle_deg;
                let t_shaped = angle >= config.pi_stack_tshape_min_deg
                    && angle <= config.pi_stack_tshape_max_deg;
                if parallel || t_shaped {
                    for &l in lring {
                        for &(pi, _) in &ring {
                            claimed.claim(l, pi);
                        }
                    }
                    record(&mut records, res_name.clone(), InteractionType::PiStacking);
                }
            }
            // Ligand cation against the protein ring.
            for &l in &lig_cations {
                if dist(pc, lig_coords[l]) <= config.pi_cation_distance {
                    for &(pi, _) in &ring {
                        claimed.claim(l, pi);
                    }
                    record(&mut records, res_name.clone(), InteractionType::PiCation);
                }
            }
        }
        // Ligand ring against a protein cationic group.
        for &(gres, names) in PROTEIN_CATION_GROUPS {
            if gres != res_name {
                continue;
            }
            let Some(g) = group_atoms(atoms, names) else { continue };
            let pc = centroid(&g.iter().map(|&(_, p)| p).collect::<Vec<_>>()).unwrap();
            for lring in &lig_rings {
                let lpts: Vec<Point> = lring.iter().map(|&i| lig_coords[i]).collect();
                let lc = centroid(&lpts).unwrap();
                if dist(pc, lc) <= config.pi_cation_distance {
                    for &l in lring {
                        for &(pi, _) in &g {
                            claimed.claim(l, pi);
                        }
                    }
                    record(&mut records, res_name.clone(), InteractionType::PiCation);
                }
            }
        }
    }

    // Metal coordination: ligand metal to protein N/O/S, and ligand
    // N/O/S to structure metals (hetero ions travel with the protein
    // file).
    for &l in &lig_metals {
        for &(pi, pa) in &near {
            if !pa.is_heavy() || pa.is_hetero {
                continue;
            }
            let coordinating = matches!(
                pa.element,
                crate::elements::Element::N | crate::elements::Element::O | crate::elements::Element::S
            );
            if coordinating && dist(lig_coords[l], pa.coords) <= config.metal_distance {
                claimed.claim(l, pi);
                record(
                    &mut records,
                    residue_type(pa),
                    InteractionType::MetalCoordination,
                );
            }
        }
    }
    for &l in &heavy {
        if !is_nos(l) {
            continue;
        }
        for &(pi, pa) in &near {
            if !pa.element.is_metal() {
                continue;
            }
            if dist(lig_coords[l], pa.coords) <= config.metal_distance {
                claimed.claim(l, pi);
                record(
                    &mut records,
                    residue_type(pa),
                    InteractionType::MetalCoordination,
                );
            }
        }
    }

    // Hydrophobic: apolar C/S pairs, one record per residue instance.
    let mut hydrophobic_res: BTreeSet<ResidueId> = BTreeSet::new();
    for &l in &lig_apolar {
        for &(pi, pa) in &near {
            if !pa.is_heavy() || pa.is_hetero {
                continue;
            }
            let apolar_c = matches!(
                pa.element,
                crate::elements::Element::C | crate::elements::Element::S
            ) && {
                // Polar if an N/O of the same residue is within bonding
                // range.
                !residues
                    .get(&pa.residue_id())
                    .map(|atoms| {
                        atoms.iter().any(|(_, b)| {
                            matches!(
                                b.element,
                                crate::elements::Element::N | crate::elements::Element::O
                            ) && dist(b.coords, pa.coords) <= 1.8
                        })
                    })
                    .unwrap_or(false)
            };
            if apolar_c && dist(lig_coords[l], pa.coords) <= config.hydrophobic_distance {
                claimed.claim(l, pi);
                if hydrophobic_res.insert(pa.residue_id()) {
                    record(&mut records, residue_type(pa), InteractionType::Hydrophobic);
                }
            }
        }
    }

    // Van der Waals contacts over whatever is left unclaimed.
    let mut vdw_res: BTreeSet<ResidueId> = BTreeSet::new();
    for &l in &heavy {
        for &(pi, pa) in &near {
            if !pa.is_heavy() || pa.is_hetero || claimed.contains(l, pi) {
                continue;
            }
            let cutoff =
                ligand.nodes[l].element.vdw_radius() + pa.element.vdw_radius() + config.vdw_tolerance;
            if dist(lig_coords[l], pa.coords) <= cutoff && vdw_res.insert(pa.residue_id()) {
                record(&mut records, residue_type(pa), InteractionType::VdWContact);
            }
        }
    }

    records.sort();
    Ok(records)
}
