use super::*;
use crate::elements::Element;
use crate::geometry::Point;
use crate::structio::{Atom, BondOrder, GraphNode, MoleculeGraph, Structure};

fn key(ty: InteractionType, res: &str, lig: &str) -> InteractionKey {
    InteractionKey {
        interaction_type: ty,
        residue_type: res.into(),
        ligand_id: lig.into(),
    }
}

fn fp_of(entries: &[(InteractionKey, u64)]) -> Fingerprint {
    Fingerprint {
        counts: entries.iter().cloned().collect(),
    }
}

#[test]
fn fingerprint_counting() {
    assert!(fingerprint(&[]).is_empty());

    let r = InteractionRecord {
        ligand_id: "LIG".into(),
        residue_type: "SER".into(),
        interaction_type: InteractionType::HBondAcceptor,
    };
    let fp = fingerprint(&[r.clone(), r.clone()]);
    assert_eq!(fp.counts.len(), 1);
    assert_eq!(*fp.counts.values().next().unwrap(), 2);

    let other = InteractionRecord {
        ligand_id: "LIG".into(),
        residue_type: "ALA".into(),
        interaction_type: InteractionType::Hydrophobic,
    };
    let fp = fingerprint(&[r.clone(), other.clone(), r]);
    assert_eq!(fp.counts.len(), 2);
    assert_eq!(fp.total(), 3);
}

#[test]
fn emd_identical_is_zero() {
    let u = fp_of(&[
        (key(InteractionType::HBondDonor, "SER", "L"), 3),
        (key(InteractionType::Hydrophobic, "LEU", "L"), 2),
    ]);
    let r = plif_emd(&u, &u);
    assert_eq!(r.value, 0.0);
    assert!(!r.both_empty && !r.one_side_empty);
}

#[test]
fn emd_two_bin_endpoints() {
    let u = fp_of(&[(key(InteractionType::HBondDonor, "SER", "L"), 5)]);
    let v = fp_of(&[(key(InteractionType::Hydrophobic, "LEU", "L"), 2)]);
    let r = plif_emd(&u, &v);
    assert!((r.value - 1.0).abs() < 1e-12);
    assert_eq!(r.bin_order.len(), 2);
}

#[test]
fn emd_empty_conventions() {
    let e = Fingerprint::default();
    let r = plif_emd(&e, &e);
    assert_eq!(r.value, 0.0);
    assert!(r.both_empty);

    let v = fp_of(&[
        (key(InteractionType::HBondDonor, "SER", "L"), 1),
        (key(InteractionType::Hydrophobic, "LEU", "L"), 1),
        (key(InteractionType::VdWContact, "ALA", "L"), 1),
    ]);
    let r = plif_emd(&e, &v);
    assert!(r.one_side_empty);
    assert_eq!(r.value, 2.0); // B - 1 with three unified bins
}

#[test]
fn emd_scaling_invariance() {
    let u = fp_of(&[
        (key(InteractionType::HBondDonor, "SER", "L"), 3),
        (key(InteractionType::Hydrophobic, "LEU", "L"), 1),
    ]);
    let mut scaled = u.clone();
    for c in scaled.counts.values_mut() {
        *c *= 7;
    }
    let v = fp_of(&[
        (key(InteractionType::HBondDonor, "SER", "L"), 1),
        (key(InteractionType::VdWContact, "ALA", "L"), 2),
    ]);
    let a = plif_emd(&u, &v).value;
    let b = plif_emd(&scaled, &v).value;
    assert!((a - b).abs() < 1e-12);
}

/// Greedy left-to-right mass transport on the line. For convex (here
/// absolute-difference) costs this is exactly optimal, and it computes
/// the distance by a route independent of the cumulative-difference
/// closed form.
fn transport_oracle(u: &[f64], v: &[f64]) -> f64 {
    let mut supply: Vec<f64> = u.to_vec();
    let mut demand: Vec<f64> = v.to_vec();
    let mut cost = 0.0;
    let mut i = 0;
    let mut j = 0;
    while i < supply.len() && j < demand.len() {
        if supply[i] <= 1e-15 {
            i += 1;
            continue;
        }
        if demand[j] <= 1e-15 {
            j += 1;
            continue;
        }
        let moved = supply[i].min(demand[j]);
        cost += moved * (i as f64 - j as f64).abs();
        supply[i] -= moved;
        demand[j] -= moved;
    }
    cost
}

fn bins_for(n: usize) -> Vec<InteractionKey> {
    let residues = ["ALA", "ARG", "ASP", "LEU", "LYS", "SER", "TRP", "TYR"];
    (0..n)
        .map(|i| key(InteractionType::VdWContact, residues[i], "L"))
        .collect()
}

#[test]
fn emd_matches_transport_oracle() {
    let cases: Vec<(Vec<u64>, Vec<u64>)> = vec![
        (vec![1, 0, 0, 3], vec![0, 2, 1, 1]),
        (vec![5, 5], vec![1, 9]),
        (vec![1, 2, 3, 4, 5], vec![5, 4, 3, 2, 1]),
        (vec![10, 0, 0, 0, 0, 0, 0, 1], vec![0, 0, 0, 0, 0, 0, 0, 11]),
    ];
    for (uc, vc) in cases {
        let bins = bins_for(uc.len());
        let u = fp_of(
            &bins
                .iter()
                .cloned()
                .zip(uc.iter().copied())
                .filter(|&(_, c)| c > 0)
                .collect::<Vec<_>>(),
        );
        let v = fp_of(
            &bins
                .iter()
                .cloned()
                .zip(vc.iter().copied())
                .filter(|&(_, c)| c > 0)
                .collect::<Vec<_>>(),
        );
        let got = plif_emd(&u, &v).value;
        let ut: f64 = uc.iter().sum::<u64>() as f64;
        let vt: f64 = vc.iter().sum::<u64>() as f64;
        // Oracle operates on the same unified bin set.
        let union: Vec<&InteractionKey> = {
            let mut s: Vec<&InteractionKey> =
                u.counts.keys().chain(v.counts.keys()).collect();
            s.sort();
            s.dedup();
            s
        };
        let un: Vec<f64> = union
            .iter()
            .map(|k| u.counts.get(*k).copied().unwrap_or(0) as f64 / ut)
            .collect();
        let vn: Vec<f64> = union
            .iter()
            .map(|k| v.counts.get(*k).copied().unwrap_or(0) as f64 / vt)
            .collect();
        assert!((got - transport_oracle(&un, &vn)).abs() < 1e-9);
    }
}

#[test]
fn wm_examples() {
    let mut emds = std::collections::BTreeMap::new();
    emds.insert("A".to_string(), 2.0);
    emds.insert("B".to_string(), 5.0);
    let wm = plif_wm(&emds).unwrap();
    assert_eq!(wm["A"], 1.0);
    assert_eq!(wm["B"], 0.0);

    let mut equal = std::collections::BTreeMap::new();
    equal.insert("A".to_string(), 3.0);
    equal.insert("B".to_string(), 3.0);
    let wm = plif_wm(&equal).unwrap();
    assert!(wm.values().all(|&v| v == 1.0));

    let mut three = std::collections::BTreeMap::new();
    three.insert("A".to_string(), 1.0);
    three.insert("B".to_string(), 2.0);
    three.insert("C".to_string(), 3.0);
    let wm = plif_wm(&three).unwrap();
    assert_eq!(wm["A"], 1.0);
    assert!((wm["B"] - 0.5).abs() < 1e-12);
    assert_eq!(wm["C"], 0.0);

    assert!(plif_wm(&std::collections::BTreeMap::new()).is_err());
}

// --- detection fixtures ---

fn prot_atom(res: &str, seq: i32, name: &str, element: Element, coords: Point) -> Atom {
    Atom {
        element,
        name: name.into(),
        coords,
        chain_id: "A".into(),
        residue_seq: seq,
        insertion_code: None,
        residue_name: res.into(),
        formal_charge: 0,
        is_hetero: false,
    }
}

fn structure_of(atoms: Vec<Atom>) -> Structure {
    Structure {
        atoms,
        title: String::new(),
        model_index: 0,
    }
}

fn node(element: Element, charge: i32) -> GraphNode {
    GraphNode {
        element,
        formal_charge: charge,
        aromatic: false,
        implicit_h: 0,
    }
}

#[test]
fn hbond_acceptor_from_ser_hydroxyl() {
    // Ligand O 2.9 A from SER OG; no hydrogens anywhere.
    let protein = structure_of(vec![
        prot_atom("SER", 1, "CB", Element::C, [4.0, 1.4, 0.0]),
        prot_atom("SER", 1, "OG", Element::O, [2.9, 0.0, 0.0]),
    ]);
    let ligand = MoleculeGraph {
        nodes: vec![node(Element::O, 0)],
        edges: vec![],
        coords: Some(vec![[0.0, 0.0, 0.0]]),
    };
    let recs =
        detect_interactions(&protein, &ligand, "LIG", &InteractionConfig::default()).unwrap();
    let hb: Vec<&InteractionRecord> = recs
        .iter()
        .filter(|r| r.interaction_type == InteractionType::HBondAcceptor)
        .collect();
    assert_eq!(hb.len(), 1);
    assert_eq!(hb[0].residue_type, "SER");
}

#[test]
fn hydrophobic_beyond_cutoff_absent() {
    let protein = structure_of(vec![prot_atom("LEU", 1, "CD1", Element::C, [6.0, 0.0, 0.0])]);
    let ligand = MoleculeGraph {
        nodes: vec![node(Element::C, 0)],
        edges: vec![],
        coords: Some(vec![[0.0, 0.0, 0.0]]),
    };
    let recs =
        detect_interactions(&protein, &ligand, "LIG", &InteractionConfig::default()).unwrap();
    assert!(recs
        .iter()
        .all(|r| r.interaction_type != InteractionType::Hydrophobic));
}

#[test]
fn hydrophobic_within_cutoff_present() {
    let protein = structure_of(vec![prot_atom("LEU", 1, "CD1", Element::C, [4.0, 0.0, 0.0])]);
    let ligand = MoleculeGraph {
        nodes: vec![node(Element::C, 0)],
        edges: vec![],
        coords: Some(vec![[0.0, 0.0, 0.0]]),
    };
    let recs =
        detect_interactions(&protein, &ligand, "LIG", &InteractionConfig::default()).unwrap();
    assert!(recs
        .iter()
        .any(|r| r.interaction_type == InteractionType::Hydrophobic && r.residue_type == "LEU"));
}

fn carboxylate_ligand(center: Point) -> MoleculeGraph {
    // C bonded to two oxygens, one carrying the negative charge.
    let mut g = MoleculeGraph {
        nodes: vec![node(Element::C, 0), node(Element::O, 0), node(Element::O, -1)],
        edges: vec![],
        coords: Some(vec![
            [center[0], center[1] + 0.7, center[2]],
            [center[0] - 1.0, center[1] - 0.35, center[2]],
            [center[0] + 1.0, center[1] - 0.35, center[2]],
        ]),
    };
    g.add_edge(0, 1, BondOrder::Double);
    g.add_edge(0, 2, BondOrder::Single);
    g
}

#[test]
fn salt_bridge_anionic_with_arg() {
    // Guanidinium centroid 3.8 A from the carboxylate oxygen centroid.
    let ligand = carboxylate_ligand([0.0, 0.0, 0.0]);
    // Carboxylate O centroid is (0, -0.35, 0).
    let gy = -0.35;
    let protein = structure_of(vec![
        prot_atom("ARG", 1, "CZ", Element::C, [3.8, gy, 0.0]),
        prot_atom("ARG", 1, "NH1", Element::N, [4.5, gy + 1.1, 0.0]),
        prot_atom("ARG", 1, "NH2", Element::N, [3.1, gy - 1.1, 0.0]),
    ]);
    let recs =
        detect_interactions(&protein, &ligand, "LIG", &InteractionConfig::default()).unwrap();
    assert!(recs
        .iter()
        .any(|r| r.interaction_type == InteractionType::SaltBridgeAnionic
            && r.residue_type == "ARG"));
}

#[test]
fn detection_rigid_motion_invariance() {
    let protein = structure_of(vec![
        prot_atom("SER", 1, "OG", Element::O, [2.9, 0.0, 0.0]),
        prot_atom("LEU", 2, "CD1", Element::C, [0.0, 3.5, 0.0]),
    ]);
    let ligand = MoleculeGraph {
        nodes: vec![node(Element::O, 0), node(Element::C, 0)],
        edges: vec![bond_single(0, 1)],
        coords: Some(vec![[0.0, 0.0, 0.0], [1.4, 1.4, 0.0]]),
    };
    let cfg = InteractionConfig::default();
    let base = fingerprint(&detect_interactions(&protein, &ligand, "L", &cfg).unwrap());

    // Rotate everything 90 degrees about z and translate.
    let mv = |p: Point| -> Point { [-p[1] + 5.0, p[0] - 2.0, p[2] + 1.0] };
    let mut protein2 = protein.clone();
    for a in &mut protein2.atoms {
        a.coords = mv(a.coords);
    }
    let mut ligand2 = ligand.clone();
    ligand2.coords = Some(ligand.coords.as_ref().unwrap().iter().map(|&p| mv(p)).collect());
    let moved = fingerprint(&detect_interactions(&protein2, &ligand2, "L", &cfg).unwrap());
    assert_eq!(base, moved);
}

fn bond_single(i: usize, j: usize) -> crate::structio::Bond {
    crate::structio::Bond {
        i,
        j,
        order: BondOrder::Single,
    }
}

#[test]
fn ligand_without_coords_is_error() {
    let protein = structure_of(vec![prot_atom("SER", 1, "OG", Element::O, [2.9, 0.0, 0.0])]);
    let ligand = MoleculeGraph {
        nodes: vec![node(Element::O, 0)],
        edges: vec![],
        coords: None,
    };
    assert!(detect_interactions(&protein, &ligand, "L", &InteractionConfig::default()).is_err());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_fp(max_bins: usize) -> impl Strategy<Value = Fingerprint> {
        proptest::collection::vec(0u64..20, max_bins).prop_map(|counts| {
            let bins = bins_for(counts.len());
            Fingerprint {
                counts: bins
                    .into_iter()
                    .zip(counts)
                    .filter(|&(_, c)| c > 0)
                    .collect(),
            }
        })
    }

    proptest! {
        #[test]
        fn emd_is_symmetric(u in arb_fp(8), v in arb_fp(8)) {
            prop_assert!((plif_emd(&u, &v).value - plif_emd(&v, &u).value).abs() < 1e-12);
        }

        #[test]
        fn emd_zero_iff_equal_normalized(u in arb_fp(8), v in arb_fp(8)) {
            prop_assume!(!u.is_empty() && !v.is_empty());
            let d = plif_emd(&u, &v).value;
            let ut = u.total() as f64;
            let vt = v.total() as f64;
            let bins = bins_for(8);
            let equal_normalized = bins.iter().all(|k| {
                let a = u.counts.get(k).copied().unwrap_or(0) as f64 / ut;
                let b = v.counts.get(k).copied().unwrap_or(0) as f64 / vt;
                (a - b).abs() < 1e-12
            });
            prop_assert_eq!(d.abs() < 1e-12, equal_normalized);
        }

        #[test]
        fn emd_triangle_inequality(
            u in arb_fp(8), v in arb_fp(8), w in arb_fp(8)
        ) {
            prop_assume!(!u.is_empty() && !v.is_empty() && !w.is_empty());
            // Triangle inequality holds on a shared bin set; force one by
            // giving every histogram the full 8-bin support.
            let pad = |mut fp: Fingerprint| {
                for k in bins_for(8) {
                    fp.counts.entry(k).or_insert(0);
                }
                fp
            };
            let (u, v, w) = (pad(u), pad(v), pad(w));
            let uv = plif_emd(&u, &v).value;
            let vw = plif_emd(&v, &w).value;
            let uw = plif_emd(&u, &w).value;
            prop_assert!(uw <= uv + vw + 1e-9);
        }

        #[test]
        fn non_native_interaction_penalized_from_exact_match(
            reference in arb_fp(6), extra in 1u64..10
        ) {
            prop_assume!(!reference.is_empty());
            // Exact match scores 0; a predicted fingerprint that adds an
            // interaction absent from the reference lands in a fresh
            // union bin and must pay positive transport cost.
            prop_assert_eq!(plif_emd(&reference, &reference).value, 0.0);
            let novel = key(InteractionType::MetalCoordination, "UNK", "ZZZ");
            prop_assume!(!reference.counts.contains_key(&novel));
            let mut predicted = reference.clone();
            predicted.counts.insert(novel, extra);
            prop_assert!(plif_emd(&predicted, &reference).value > 0.0);
        }

        #[test]
        fn wm_in_unit_interval(
            emds in proptest::collection::btree_map("[a-f]{3}", 0.0f64..10.0, 1..8)
        ) {
            let wm = plif_wm(&emds).unwrap();
            for v in wm.values() {
                prop_assert!((0.0..=1.0).contains(v));
            }
            let distinct: std::collections::BTreeSet<u64> =
                emds.values().map(|v| v.to_bits()).collect();
            if distinct.len() == emds.len() && emds.len() > 1 {
                prop_assert_eq!(wm.values().filter(|&&v| v == 1.0).count(), 1);
                prop_assert_eq!(wm.values().filter(|&&v| v == 0.0).count(), 1);
            }
        }
    }
}
