//! PB-Valid geometric subset: deterministic sanity checks on a
//! predicted pose, yielding per-check flags and an overall boolean.
//!
//! This is explicitly a subset of the full PoseBusters battery: the
//! force-field energy-ratio test requires a molecular-mechanics engine
//! and is out of scope, so every report lists it as disabled to keep
//! the enabled set unambiguous.

use crate::elements::Element;
use crate::error::{Error, Result};
use crate::geometry::{centroid, dist, sub, Point};
use crate::structio::{BondOrder, MoleculeGraph, Structure};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const CHECK_BOND_LENGTHS: &str = "bond_lengths";
pub const CHECK_INTERNAL_CLASH: &str = "internal_clash";
pub const CHECK_PROTEIN_LIGAND_CLASH: &str = "protein_ligand_clash";
pub const CHECK_RING_FLATNESS: &str = "ring_flatness";
pub const CHECK_INTER_LIGAND_CLASH: &str = "inter_ligand_clash";
pub const CHECK_ENERGY_RATIO: &str = "energy_ratio";

/// Centralized thresholds for the geometric battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidityThresholds {
    /// Fractional tolerance around the covalent-radius sum for bonds.
    pub bond_length_tolerance: f64,
    /// Minimum non-bonded, non-1,3 distance as a fraction of the
    /// covalent-radius sum.
    pub internal_clash_ratio: f64,
    /// Minimum protein-ligand (and ligand-ligand) distance as a
    /// fraction of the vdW-radius sum.
    pub cross_clash_ratio: f64,
    /// Maximum out-of-plane deviation for aromatic rings, in angstroms.
    pub aromatic_flatness_max: f64,
    /// Saturated 5/6-rings planar within this bound are the "flat
    /// aliphatic ring" pathology and fail, in angstroms.
    pub aliphatic_planarity_min: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self {
            bond_length_tolerance: 0.25,
            internal_clash_ratio: 0.8,
            cross_clash_ratio: 0.75,
            aromatic_flatness_max: 0.25,
            aliphatic_planarity_min: 0.05,
        }
    }
}

/// Outcome of the battery for one pose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// Check name -> pass.
    pub per_check: BTreeMap<String, bool>,
    /// Conjunction of `per_check` over the enabled set.
    pub overall: bool,
    pub enabled: Vec<String>,
    /// Checks deliberately not run (the energy-ratio test).
    pub disabled: Vec<String>,
    /// Check name -> error message for checks that failed with an
    /// error rather than a geometric violation.
    pub errors: BTreeMap<String, String>,
}

/// Worst bond-length offender: (atom i, atom j, observed, nominal).
pub type BondOffender = (usize, usize, f64, f64);

fn coords_of(g: &MoleculeGraph) -> Result<&[Point]> {
    g.coords
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("molecule has no coordinates".into()))
}

/// Pass iff every bonded distance is within the fractional tolerance
/// of the covalent-radius sum. Returns the worst offender (largest
/// fractional deviation) regardless of pass/fail.
pub fn check_bond_lengths(
    g: &MoleculeGraph,
    thresholds: &ValidityThresholds,
) -> Result<(bool, Option<BondOffender>)> {
    let coords = coords_of(g)?;
    let mut pass = true;
    let mut worst: Option<(f64, BondOffender)> = None;
    for e in &g.edges {
        let nominal =
            g.nodes[e.i].element.covalent_radius() + g.nodes[e.j].element.covalent_radius();
        let d = dist(coords[e.i], coords[e.j]);
        let deviation = (d - nominal).abs() / nominal;
        if deviation > thresholds.bond_length_tolerance {
            pass = false;
        }
        if worst.as_ref().is_none_or(|(w, _)| deviation > *w) {
            worst = Some((deviation, (e.i, e.j, d, nominal)));
        }
    }
    Ok((pass, worst.map(|(_, o)| o)))
}

/// Atom pairs that are bonded or share a bonded neighbor (1,3 pairs).
fn excluded_pairs(g: &MoleculeGraph) -> BTreeSet<(usize, usize)> {
    let mut excluded = BTreeSet::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for e in &g.edges {
        excluded.insert((e.i.min(e.j), e.i.max(e.j)));
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    for center in &adj {
        for (a, &i) in center.iter().enumerate() {
            for &j in &center[a + 1..] {
                excluded.insert((i.min(j), i.max(j)));
            }
        }
    }
    excluded
}

/// Pass iff every non-bonded, non-1,3 pair keeps at least the clash
/// ratio times the covalent-radius sum.
pub fn check_internal_clash(g: &MoleculeGraph, thresholds: &ValidityThresholds) -> Result<bool> {
    let coords = coords_of(g)?;
    let excluded = excluded_pairs(g);
    for i in 0..g.nodes.len() {
        for j in i + 1..g.nodes.len() {
            if excluded.contains(&(i, j)) {
                continue;
            }
            let floor = thresholds.internal_clash_ratio
                * (g.nodes[i].element.covalent_radius() + g.nodes[j].element.covalent_radius());
            if dist(coords[i], coords[j]) < floor {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn min_cross_ratio(a: &[(Element, Point)], b: &[(Element, Point)]) -> f64 {
    let mut min_ratio = f64::INFINITY;
    for &(ea, pa) in a {
        for &(eb, pb) in b {
            let ratio = dist(pa, pb) / (ea.vdw_radius() + eb.vdw_radius());
            if ratio < min_ratio {
                min_ratio = ratio;
            }
        }
    }
    min_ratio
}

/// Pass iff the closest protein-ligand pair keeps at least the cross
/// clash ratio of the vdW-radius sum.
pub fn check_protein_ligand_clash(
    protein: &Structure,
    g: &MoleculeGraph,
    thresholds: &ValidityThresholds,
) -> Result<bool> {
    if protein.atoms.is_empty() || g.nodes.is_empty() {
        return Err(Error::InvalidInput(
            "protein-ligand clash check needs nonempty inputs".into(),
        ));
    }
    let coords = coords_of(g)?;
    let prot: Vec<(Element, Point)> = protein.atoms.iter().map(|a| (a.element, a.coords)).collect();
    let lig: Vec<(Element, Point)> = g
        .nodes
        .iter()
        .zip(coords)
        .map(|(n, &p)| (n.element, p))
        .collect();
    Ok(min_cross_ratio(&prot, &lig) >= thresholds.cross_clash_ratio)
}

/// Fundamental cycles of the whole molecular graph (spanning forest;
/// each non-tree edge closes one cycle).
fn fundamental_cycles(g: &MoleculeGraph) -> Vec<Vec<usize>> {
    let n = g.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut tree_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    tree_edges.insert((u.min(v), u.max(v)));
                    stack.push(v);
                }
            }
        }
    }
    let mut cycles = Vec::new();
    for e in &g.edges {
        let (a, b) = (e.i.min(e.j), e.i.max(e.j));
        if tree_edges.contains(&(a, b)) {
            continue;
        }
        let mut path_a = Vec::new();
        let mut x = Some(a);
        while let Some(u) = x {
            path_a.push(u);
            x = parent[u];
        }
        let mut cycle = Vec::new();
        let mut y = Some(b);
        while let Some(u) = y {
            if let Some(pos) = path_a.iter().position(|&w| w == u) {
                // Append ancestor-to-a so consecutive entries (and the
                // wrap-around pair) are actual graph edges.
                cycle.extend(path_a[..=pos].iter().rev().copied());
                break;
            }
            cycle.push(u);
            y = parent[u];
        }
        cycles.push(cycle);
    }
    cycles
}

/// Distance of `point` from the least-squares plane through `rest`.
fn plane_distance(point: Point, rest: &[Point]) -> f64 {
    let Ok(c) = centroid(rest) else {
        return 0.0;
    };
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for &p in rest {
        let d = sub(p, c);
        for r in 0..3 {
            for s in 0..3 {
                cov[(r, s)] += d[r] * d[s];
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    // Normal = eigenvector of the smallest eigenvalue.
    let mut idx = 0;
    for k in 1..3 {
        if eig.eigenvalues[k] < eig.eigenvalues[idx] {
            idx = k;
        }
    }
    let normal = eig.eigenvectors.column(idx);
    let d = sub(point, c);
    (d[0] * normal[0] + d[1] * normal[1] + d[2] * normal[2]).abs()
}

/// Out-of-plane deviation of a ring: the maximum leave-one-out
/// residual, i.e. for each atom its distance from the plane fit to the
/// other ring atoms. An all-atom fit would tilt toward a single
/// outlier and mask it; the leave-one-out form keeps one lifted atom
/// fully visible while still reading zero for a planar ring.
fn max_plane_deviation(points: &[Point]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    (0..points.len())
        .map(|i| {
            let rest: Vec<Point> = points
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &p)| p)
                .collect();
            plane_distance(points[i], &rest)
        })
        .fold(0.0, f64::max)
}

/// Aromatic rings must be flat (deviation <= aromatic max); saturated
/// 5/6-rings must NOT be flat (planar within the aliphatic bound is
/// the flat-aliphatic-ring pathology and fails).
pub fn check_ring_flatness(g: &MoleculeGraph, thresholds: &ValidityThresholds) -> Result<bool> {
    let coords = coords_of(g)?;
    let order_of = |i: usize, j: usize| -> Option<BondOrder> {
        g.edges
            .iter()
            .find(|e| (e.i, e.j) == (i.min(j), i.max(j)))
            .map(|e| e.order)
    };
    for ring in fundamental_cycles(g) {
        let pts: Vec<Point> = ring.iter().map(|&i| coords[i]).collect();
        let aromatic = ring.iter().all(|&i| g.nodes[i].aromatic)
            || (0..ring.len()).all(|k| {
                order_of(ring[k], ring[(k + 1) % ring.len()]) == Some(BondOrder::Aromatic)
            });
        if aromatic {
            if max_plane_deviation(&pts) > thresholds.aromatic_flatness_max {
                return Ok(false);
            }
            continue;
        }
        let saturated = (5..=6).contains(&ring.len())
            && ring.iter().all(|&i| !g.nodes[i].aromatic)
            && (0..ring.len()).all(|k| {
                order_of(ring[k], ring[(k + 1) % ring.len()]) == Some(BondOrder::Single)
            });
        if saturated && max_plane_deviation(&pts) <= thresholds.aliphatic_planarity_min {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pairwise ligand-ligand clash under the same vdW ratio rule as the
/// protein-ligand check. A single ligand passes vacuously.
pub fn check_inter_ligand_clash(
    ligands: &[&MoleculeGraph],
    thresholds: &ValidityThresholds,
) -> Result<bool> {
    let mut sets: Vec<Vec<(Element, Point)>> = Vec::with_capacity(ligands.len());
    for g in ligands {
        let coords = coords_of(g)?;
        sets.push(
            g.nodes
                .iter()
                .zip(coords)
                .map(|(n, &p)| (n.element, p))
                .collect(),
        );
    }
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if min_cross_ratio(&sets[a], &sets[b]) < thresholds.cross_clash_ratio {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Run the full enabled battery; `overall` is the conjunction. A check
/// that errors is recorded as failed-with-error.
pub fn pb_valid(
    protein: &Structure,
    ligands: &[&MoleculeGraph],
    thresholds: &ValidityThresholds,
) -> ValidityReport {
    let mut per_check = BTreeMap::new();
    let mut errors = BTreeMap::new();
    let mut record = |name: &str, outcome: Result<bool>, errors: &mut BTreeMap<String, String>| {
        let pass = match outcome {
            Ok(p) => p,
            Err(e) => {
                errors.insert(name.to_string(), e.to_string());
                false
            }
        };
        per_check.insert(name.to_string(), pass);
    };

    let all = |f: &dyn Fn(&MoleculeGraph) -> Result<bool>| -> Result<bool> {
        for g in ligands {
            if !f(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    record(
        CHECK_BOND_LENGTHS,
        all(&|g| check_bond_lengths(g, thresholds).map(|(p, _)| p)),
        &mut errors,
    );
    record(
        CHECK_INTERNAL_CLASH,
        all(&|g| check_internal_clash(g, thresholds)),
        &mut errors,
    );
    record(
        CHECK_RING_FLATNESS,
        all(&|g| check_ring_flatness(g, thresholds)),
        &mut errors,
    );
    record(
        CHECK_PROTEIN_LIGAND_CLASH,
        all(&|g| check_protein_ligand_clash(protein, g, thresholds)),
        &mut errors,
    );
    record(
        CHECK_INTER_LIGAND_CLASH,
        check_inter_ligand_clash(ligands, thresholds),
        &mut errors,
    );

    let enabled: Vec<String> = per_check.keys().cloned().collect();
    let overall = per_check.values().all(|&p| p);
    ValidityReport {
        per_check,
        overall,
        enabled,
        disabled: vec![CHECK_ENERGY_RATIO.to_string()],
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::{Atom, GraphNode};
    use proptest::prelude::*;

    fn carbon_node() -> GraphNode {
        GraphNode {
            element: Element::C,
            formal_charge: 0,
            aromatic: false,
            implicit_h: 0,
        }
    }

    fn chain(coords: Vec<Point>) -> MoleculeGraph {
        let n = coords.len();
        let mut g = MoleculeGraph {
            nodes: (0..n).map(|_| carbon_node()).collect(),
            edges: vec![],
            coords: Some(coords),
        };
        for i in 1..n {
            g.add_edge(i - 1, i, BondOrder::Single);
        }
        g
    }

    fn ring(coords: Vec<Point>, aromatic: bool) -> MoleculeGraph {
        let n = coords.len();
        let mut g = MoleculeGraph {
            nodes: (0..n)
                .map(|_| GraphNode {
                    aromatic,
                    ..carbon_node()
                })
                .collect(),
            edges: vec![],
            coords: Some(coords),
        };
        let order = if aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        };
        for i in 0..n {
            g.add_edge(i, (i + 1) % n, order);
        }
        g
    }

    fn hexagon(radius: f64, pucker: f64) -> Vec<Point> {
        (0..6)
            .map(|k| {
                let t = std::f64::consts::PI / 3.0 * k as f64;
                let z = if k % 2 == 0 { pucker } else { -pucker };
                [radius * t.cos(), radius * t.sin(), z]
            })
            .collect()
    }

    fn protein_carbon(coords: Point) -> Structure {
        Structure {
            atoms: vec![Atom {
                element: Element::C,
                name: "CA".into(),
                coords,
                chain_id: "A".into(),
                residue_seq: 1,
                insertion_code: None,
                residue_name: "ALA".into(),
                formal_charge: 0,
                is_hetero: false,
            }],
            title: String::new(),
            model_index: 0,
        }
    }

    #[test]
    fn bond_length_nominal_passes() {
        let g = chain(vec![[0.0, 0.0, 0.0], [1.52, 0.0, 0.0]]);
        let (pass, worst) = check_bond_lengths(&g, &ValidityThresholds::default()).unwrap();
        assert!(pass);
        let (_, _, d, nominal) = worst.unwrap();
        assert_eq!(d, 1.52);
        assert_eq!(nominal, 1.52);
    }

    #[test]
    fn bond_length_stretched_fails() {
        let g = chain(vec![[0.0, 0.0, 0.0], [2.50, 0.0, 0.0]]);
        let (pass, worst) = check_bond_lengths(&g, &ValidityThresholds::default()).unwrap();
        assert!(!pass);
        assert_eq!(worst.unwrap().0, 0);
    }

    #[test]
    fn single_atom_is_vacuous_pass() {
        let g = chain(vec![[0.0, 0.0, 0.0]]);
        let (pass, worst) = check_bond_lengths(&g, &ValidityThresholds::default()).unwrap();
        assert!(pass);
        assert!(worst.is_none());
    }

    #[test]
    fn internal_clash_detected() {
        // Four-atom chain folded so atoms 0 and 3 overlap.
        let g = chain(vec![
            [0.0, 0.0, 0.0],
            [1.5, 0.0, 0.0],
            [1.5, 1.5, 0.0],
            [0.0, 0.8, 0.0],
        ]);
        assert!(!check_internal_clash(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn straight_chain_has_no_internal_clash() {
        let g = chain((0..5).map(|i| [1.52 * i as f64, 0.0, 0.0]).collect());
        assert!(check_internal_clash(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn two_atom_molecule_vacuous_internal_pass() {
        // The only pair is bonded, so there is nothing to check even
        // at clashing distance.
        let g = chain(vec![[0.0, 0.0, 0.0], [0.8, 0.0, 0.0]]);
        assert!(check_internal_clash(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn one_three_pairs_are_exempt() {
        // Tight angle: atoms 0 and 2 are close but 1,3-related.
        let g = chain(vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [0.4, 1.0, 0.0]]);
        assert!(check_internal_clash(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn protein_ligand_clash_examples() {
        let thr = ValidityThresholds::default();
        let lig = chain(vec![[0.0, 0.0, 0.0]]);
        assert!(!check_protein_ligand_clash(&protein_carbon([0.5, 0.0, 0.0]), &lig, &thr).unwrap());
        // C...C at exactly the vdW sum (1.7 + 1.7): ratio 1.0.
        assert!(check_protein_ligand_clash(&protein_carbon([3.4, 0.0, 0.0]), &lig, &thr).unwrap());
        assert!(check_protein_ligand_clash(&protein_carbon([15.0, 0.0, 0.0]), &lig, &thr).unwrap());
        // Just under the 0.75 ratio: 0.74 * 3.4 = 2.516.
        assert!(
            !check_protein_ligand_clash(&protein_carbon([2.516, 0.0, 0.0]), &lig, &thr).unwrap()
        );
    }

    #[test]
    fn ideal_benzene_is_flat_pass() {
        let g = ring(hexagon(1.39, 0.0), true);
        assert!(check_ring_flatness(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn lifted_benzene_atom_fails() {
        let mut coords = hexagon(1.39, 0.0);
        coords[0][2] = 0.5;
        let g = ring(coords, true);
        assert!(!check_ring_flatness(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn planar_cyclohexane_fails() {
        let g = ring(hexagon(1.54, 0.0), false);
        assert!(!check_ring_flatness(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn puckered_cyclohexane_passes() {
        let g = ring(hexagon(1.54, 0.25), false);
        assert!(check_ring_flatness(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn acyclic_molecule_passes_flatness() {
        let g = chain(vec![[0.0, 0.0, 0.0], [1.52, 0.0, 0.0], [3.04, 0.0, 0.0]]);
        assert!(check_ring_flatness(&g, &ValidityThresholds::default()).unwrap());
    }

    #[test]
    fn inter_ligand_examples() {
        let thr = ValidityThresholds::default();
        let a = chain(vec![[0.0, 0.0, 0.0]]);
        let far = chain(vec![[5.0, 0.0, 0.0]]);
        let near = chain(vec![[0.3, 0.0, 0.0]]);
        assert!(check_inter_ligand_clash(&[&a, &far], &thr).unwrap());
        assert!(!check_inter_ligand_clash(&[&a, &near], &thr).unwrap());
        assert!(check_inter_ligand_clash(&[&a], &thr).unwrap());
    }

    #[test]
    fn pb_valid_overall_is_conjunction() {
        let thr = ValidityThresholds::default();
        let protein = protein_carbon([10.0, 0.0, 0.0]);
        let good = chain(vec![[0.0, 0.0, 0.0], [1.52, 0.0, 0.0]]);
        let report = pb_valid(&protein, &[&good], &thr);
        assert!(report.overall);
        assert!(report.per_check.values().all(|&p| p));
        assert_eq!(report.enabled.len(), 5);
        assert_eq!(report.disabled, vec![CHECK_ENERGY_RATIO.to_string()]);
        assert!(report.errors.is_empty());

        let bad = chain(vec![[0.0, 0.0, 0.0], [2.50, 0.0, 0.0]]);
        let report = pb_valid(&protein, &[&bad], &thr);
        assert!(!report.overall);
        assert!(!report.per_check[CHECK_BOND_LENGTHS]);
        assert!(report.per_check[CHECK_INTERNAL_CLASH]);
    }

    #[test]
    fn pb_valid_records_check_errors() {
        let thr = ValidityThresholds::default();
        let protein = protein_carbon([10.0, 0.0, 0.0]);
        let mut no_coords = chain(vec![[0.0, 0.0, 0.0]]);
        no_coords.coords = None;
        let report = pb_valid(&protein, &[&no_coords], &thr);
        assert!(!report.overall);
        assert!(!report.errors.is_empty());
        assert!(!report.per_check[CHECK_BOND_LENGTHS]);
    }

    #[test]
    fn pb_valid_is_deterministic() {
        let thr = ValidityThresholds::default();
        let protein = protein_carbon([2.9, 0.0, 0.0]);
        let lig = ring(hexagon(1.39, 0.1), true);
        let a = serde_json::to_vec(&pb_valid(&protein, &[&lig], &thr)).unwrap();
        let b = serde_json::to_vec(&pb_valid(&protein, &[&lig], &thr)).unwrap();
        assert_eq!(a, b);
    }

    fn rigid_motion(p: Point) -> Point {
        // 90-degree rotation about z plus a translation.
        [-p[1] + 3.0, p[0] - 7.0, p[2] + 2.0]
    }

    proptest! {
        #[test]
        fn checks_invariant_under_rigid_motion(
            coords in proptest::collection::vec(
                [0.0f64..8.0, 0.0f64..8.0, 0.0f64..8.0], 2..8
            ),
            prot in [0.0f64..8.0, 0.0f64..8.0, 0.0f64..8.0]
        ) {
            let thr = ValidityThresholds::default();
            let g = chain(coords.clone());
            let protein = protein_carbon(prot);
            let base = pb_valid(&protein, &[&g], &thr);

            let mut g2 = g.clone();
            g2.coords = Some(coords.iter().map(|&p| rigid_motion(p)).collect());
            let mut protein2 = protein.clone();
            protein2.atoms[0].coords = rigid_motion(prot);
            let moved = pb_valid(&protein2, &[&g2], &thr);
            prop_assert_eq!(base.per_check, moved.per_check);
        }

        #[test]
        fn tightening_thresholds_never_flips_fail_to_pass(
            coords in proptest::collection::vec(
                [0.0f64..6.0, 0.0f64..6.0, 0.0f64..6.0], 2..7
            ),
            prot in [0.0f64..6.0, 0.0f64..6.0, 0.0f64..6.0],
            bond_tol in 0.05f64..0.5,
            internal in 0.5f64..1.2,
            cross in 0.5f64..1.2,
        ) {
            let loose = ValidityThresholds {
                bond_length_tolerance: bond_tol,
                internal_clash_ratio: internal,
                cross_clash_ratio: cross,
                ..ValidityThresholds::default()
            };
            let tight = ValidityThresholds {
                bond_length_tolerance: bond_tol * 0.5,
                internal_clash_ratio: internal * 1.2,
                cross_clash_ratio: cross * 1.2,
                ..ValidityThresholds::default()
            };
            let g = chain(coords);
            let protein = protein_carbon(prot);
            let loose_report = pb_valid(&protein, &[&g], &loose);
            let tight_report = pb_valid(&protein, &[&g], &tight);
            for (name, &loose_pass) in &loose_report.per_check {
                // fail under loose must stay fail under tight
                if !loose_pass {
                    prop_assert!(!tight_report.per_check[name]);
                }
            }
        }
    }
}
