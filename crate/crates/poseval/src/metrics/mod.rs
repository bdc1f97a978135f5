//! Structural metrics: docking RMSD (naive and symmetry-corrected),
//! centroid RMSD, lDDT and lDDT-PLI, the 10 A pocket selection and
//! alignment protocol, and chain mapping for bioassemblies.

pub mod assignment;

use crate::error::{Error, Result};
use crate::geometry::{self, dist, kabsch, Point, RigidTransform};
use crate::molgraph::{automorphisms, AtomMapping, AutomorphismSet, DEFAULT_AUTOMORPHISM_CAP};
use crate::structio::{MoleculeGraph, ResidueId, Structure};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub use assignment::hungarian_max;

pub const DEFAULT_POCKET_CUTOFF: f64 = 10.0;
pub const DEFAULT_IDENTITY_FLOOR: f64 = 0.3;
/// Cross-pair inclusion radius for lDDT-PLI (CASP15 assessment
/// convention; the generic 15 A radius applies to whole-structure lDDT
/// only).
pub const DEFAULT_CROSS_INCLUSION_RADIUS: f64 = 6.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LddtParams {
    pub inclusion_radius: f64,
    pub thresholds: Vec<f64>,
    pub exclude_same_residue: bool,
}

impl Default for LddtParams {
    fn default() -> Self {
        LddtParams {
            inclusion_radius: 15.0,
            thresholds: vec![0.5, 1.0, 2.0, 4.0],
            exclude_same_residue: true,
        }
    }
}

impl LddtParams {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty()
            || self.thresholds.windows(2).any(|w| w[0] >= w[1])
            || self.thresholds[0] <= 0.0
        {
            return Err(Error::InvalidInput(
                "lDDT thresholds must be strictly increasing and positive".into(),
            ));
        }
        if self.inclusion_radius <= *self.thresholds.last().unwrap() {
            return Err(Error::InvalidInput(
                "inclusion radius must exceed the largest threshold".into(),
            ));
        }
        Ok(())
    }
}

/// Reference residues with a heavy atom within `cutoff` (inclusive) of
/// any reference-ligand heavy atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PocketSelection {
    pub residues: BTreeSet<ResidueId>,
    pub cutoff: f64,
}

/// Injective chain correspondence between prediction and reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainMap {
    /// (predicted_chain_id, reference_chain_id)
    pub pairs: Vec<(String, String)>,
    /// Mean sequence identity over mapped pairs.
    pub score: f64,
    /// Reference chains left unmapped (identity floor unmet).
    pub unmapped_reference: Vec<String>,
}

impl ChainMap {
    /// Reference chain -> predicted chain.
    pub fn ref_to_pred(&self) -> BTreeMap<&str, &str> {
        self.pairs
            .iter()
            .map(|(p, r)| (r.as_str(), p.as_str()))
            .collect()
    }
}

/// All per-complex metric outputs plus per-check validity flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexScore {
    pub target_id: String,
    pub run: usize,
    pub rmsd: Option<f64>,
    pub rmsd_symmetry_corrected: Option<f64>,
    /// Set when the automorphism set was truncated: the corrected value
    /// is then only a lower bound on the symmetry search, not the
    /// guaranteed minimum.
    pub symmetry_lower_bound_uncertain: bool,
    pub centroid_rmsd: Option<f64>,
    pub lddt_pli: Option<f64>,
    pub pb_valid: Option<bool>,
    pub plif_emd: Option<f64>,
    pub plif_emd_one_side_empty: bool,
    pub per_check: BTreeMap<String, bool>,
    /// Multi-ligand protocol only: set when optimal identical-formula
    /// fragment reassignment changed the file-order pairing.
    #[serde(default)]
    pub fragment_reassigned: bool,
    pub excluded: bool,
    pub exclusion_reason: Option<String>,
}

impl ComplexScore {
    pub fn excluded(target_id: &str, run: usize, reason: impl Into<String>) -> Self {
        ComplexScore {
            target_id: target_id.to_string(),
            run,
            rmsd: None,
            rmsd_symmetry_corrected: None,
            symmetry_lower_bound_uncertain: false,
            centroid_rmsd: None,
            lddt_pli: None,
            pb_valid: None,
            plif_emd: None,
            plif_emd_one_side_empty: false,
            per_check: BTreeMap::new(),
            fragment_reassigned: false,
            excluded: true,
            exclusion_reason: Some(reason.into()),
        }
    }
}

/// Plain RMSD over corresponded positions. No superposition: docking
/// RMSD is evaluated in the pocket-aligned reference frame.
pub fn rmsd(pred: &[Point], reference: &[Point]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::InvalidInput(format!(
            "rmsd length mismatch: {} vs {}",
            pred.len(),
            reference.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("rmsd of empty point lists".into()));
    }
    let ss: f64 = pred
        .iter()
        .zip(reference)
        .map(|(&p, &q)| {
            let d = geometry::sub(p, q);
            geometry::dot(d, d)
        })
        .sum();
    Ok((ss / pred.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct SymmetryRmsd {
    pub value: f64,
    /// True when the automorphism enumeration was truncated at its cap.
    pub lower_bound_uncertain: bool,
}

/// Symmetry-corrected RMSD: minimum plain RMSD over all label-preserving
/// automorphisms of the reference graph. Heavy atoms only. `mapping`
/// aligns reference node indices to prediction node indices.
pub fn rmsd_symmetry_corrected(
    pred: &MoleculeGraph,
    reference: &MoleculeGraph,
    mapping: &AtomMapping,
) -> Result<SymmetryRmsd> {
    rmsd_symmetry_corrected_capped(pred, reference, mapping, DEFAULT_AUTOMORPHISM_CAP)
}

pub fn rmsd_symmetry_corrected_capped(
    pred: &MoleculeGraph,
    reference: &MoleculeGraph,
    mapping: &AtomMapping,
    cap: usize,
) -> Result<SymmetryRmsd> {
    let pred_coords = pred
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("prediction has no coordinates".into()))?;
    let ref_coords = reference
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("reference has no coordinates".into()))?;

    let ref_heavy = reference.heavy_indices();
    // Position of the predicted counterpart of each reference heavy atom.
    let map: BTreeMap<usize, usize> = mapping.pairs.iter().copied().collect();
    let mut pred_pos = Vec::with_capacity(ref_heavy.len());
    let mut ref_pos = Vec::with_capacity(ref_heavy.len());
    for &r in &ref_heavy {
        let p = map.get(&r).ok_or_else(|| {
            Error::InvalidInput(format!("mapping misses reference heavy atom {r}"))
        })?;
        pred_pos.push(pred_coords[*p]);
        ref_pos.push(ref_coords[r]);
    }
    let auts: AutomorphismSet = automorphisms(reference, cap);
    let mut best = f64::INFINITY;
    for perm in &auts.perms {
        // perm relabels reference heavy atoms; candidate correspondence
        // pairs prediction atom perm[i] with reference atom i.
        let permuted: Vec<Point> = perm.iter().map(|&k| pred_pos[k]).collect();
        let r = rmsd(&permuted, &ref_pos)?;
        if r < best {
            best = r;
        }
    }
    Ok(SymmetryRmsd {
        value: best,
        lower_bound_uncertain: auts.truncated,
    })
}

/// Euclidean distance between heavy-atom centroids; lengths may differ.
pub fn centroid_rmsd(pred: &[Point], reference: &[Point]) -> Result<f64> {
    let cp = geometry::centroid(pred)?;
    let cr = geometry::centroid(reference)?;
    Ok(dist(cp, cr))
}

/// lDDT over corresponded points; `residue_group[i]` identifies the
/// residue of atom i for same-residue exclusion.
pub fn lddt_points(
    pred: &[Point],
    reference: &[Point],
    residue_group: &[usize],
    params: &LddtParams,
) -> Result<f64> {
    params.validate()?;
    if pred.len() != reference.len() || pred.len() != residue_group.len() {
        return Err(Error::InvalidInput("lDDT input length mismatch".into()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("lDDT with no correspondences".into()));
    }
    let n = reference.len();
    let pairs = geometry::neighbor_pairs(reference, params.inclusion_radius);
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in &pairs {
        if params.exclude_same_residue && residue_group[p.i] == residue_group[p.j] {
            continue;
        }
        neighbors[p.i].push(p.j);
        neighbors[p.j].push(p.i);
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for i in 0..n {
        if neighbors[i].is_empty() {
            continue;
        }
        let mut frac_sum = 0.0;
        for &delta in &params.thresholds {
            let preserved = neighbors[i]
                .iter()
                .filter(|&&j| {
                    let d_ref = dist(reference[i], reference[j]);
                    let d_pred = dist(pred[i], pred[j]);
                    (d_pred - d_ref).abs() < delta
                })
                .count();
            frac_sum += preserved as f64 / neighbors[i].len() as f64;
        }
        total += frac_sum / params.thresholds.len() as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::InvalidInput(
            "no atom has neighbors within the inclusion radius".into(),
        ));
    }
    Ok(total / counted as f64)
}

/// lDDT-PLI core: cross pairs (ligand atom, pocket protein atom) only,
/// averaged over ligand atoms. Inputs must already be pocket-aligned and
/// in correspondence.
pub fn lddt_pli_points(
    pred_ligand: &[Point],
    ref_ligand: &[Point],
    pred_pocket: &[Point],
    ref_pocket: &[Point],
    cross_radius: f64,
    thresholds: &[f64],
) -> Result<f64> {
    if pred_ligand.len() != ref_ligand.len() || pred_pocket.len() != ref_pocket.len() {
        return Err(Error::InvalidInput("lDDT-PLI input length mismatch".into()));
    }
    if ref_ligand.is_empty() {
        return Err(Error::InvalidInput("lDDT-PLI with empty ligand".into()));
    }
    if ref_pocket.is_empty() {
        return Err(Error::InvalidInput("lDDT-PLI with empty pocket".into()));
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for (l, (&pl, &rl)) in pred_ligand.iter().zip(ref_ligand).enumerate() {
        let _ = l;
        let in_radius: Vec<usize> = (0..ref_pocket.len())
            .filter(|&p| dist(rl, ref_pocket[p]) <= cross_radius)
            .collect();
        if in_radius.is_empty() {
            continue;
        }
        let mut frac_sum = 0.0;
        for &delta in thresholds {
            let preserved = in_radius
                .iter()
                .filter(|&&p| {
                    let d_ref = dist(rl, ref_pocket[p]);
                    let d_pred = dist(pl, pred_pocket[p]);
                    (d_pred - d_ref).abs() < delta
                })
                .count();
            frac_sum += preserved as f64 / in_radius.len() as f64;
        }
        total += frac_sum / thresholds.len() as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::InvalidInput(
            "no ligand atom has pocket neighbors within the cross radius".into(),
        ));
    }
    Ok(total / counted as f64)
}

/// Reference residues with any heavy atom within `cutoff` (<=) of any
/// ligand heavy atom.
pub fn select_pocket(
    ref_protein: &Structure,
    ref_ligand_coords: &[Point],
    cutoff: f64,
) -> Result<PocketSelection> {
    if ref_ligand_coords.is_empty() {
        return Err(Error::InvalidInput("pocket selection with no ligand atoms".into()));
    }
    let mut residues = BTreeSet::new();
    for a in ref_protein.heavy_atoms() {
        if a.is_hetero {
            continue;
        }
        if ref_ligand_coords.iter().any(|&l| dist(a.coords, l) <= cutoff) {
            residues.insert(a.residue_id());
        }
    }
    if residues.is_empty() {
        return Err(Error::InvalidInput(
            "empty pocket: no residue within cutoff of any ligand atom".into(),
        ));
    }
    Ok(PocketSelection { residues, cutoff })
}

/// Matched pocket heavy atoms between prediction and reference:
/// (pred_position, ref_position) pairs plus the count of reference
/// pocket atoms that had no counterpart.
pub fn matched_pocket_atoms(
    pred: &Structure,
    reference: &Structure,
    pocket: &PocketSelection,
    chain_map: &ChainMap,
) -> (Vec<(Point, Point)>, usize) {
    let r2p = chain_map.ref_to_pred();
    // Prediction atom lookup by (chain, residue key, atom name).
    let mut pred_atoms: BTreeMap<(String, String, String), Point> = BTreeMap::new();
    for a in pred.heavy_atoms() {
        let (c, r) = a.residue_id();
        pred_atoms.entry((c, r, a.name.clone())).or_insert(a.coords);
    }
    let mut pairs = Vec::new();
    let mut unmatched = 0usize;
    for a in reference.heavy_atoms() {
        if a.is_hetero {
            continue;
        }
        let rid = a.residue_id();
        if !pocket.residues.contains(&rid) {
            continue;
        }
        let Some(pred_chain) = r2p.get(rid.0.as_str()) else {
            unmatched += 1;
            continue;
        };
        match pred_atoms.get(&(pred_chain.to_string(), rid.1.clone(), a.name.clone())) {
            Some(&p) => pairs.push((p, a.coords)),
            None => unmatched += 1,
        }
    }
    (pairs, unmatched)
}

/// Kabsch over all matched pocket heavy atoms; the returned transform
/// moves the full predicted complex into the reference frame.
pub fn align_pocket(
    pred: &Structure,
    reference: &Structure,
    pocket: &PocketSelection,
    chain_map: &ChainMap,
) -> Result<RigidTransform> {
    let (pairs, _) = matched_pocket_atoms(pred, reference, pocket, chain_map);
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} matched pocket atoms; need at least 3 to align",
            pairs.len()
        )));
    }
    let mobile: Vec<Point> = pairs.iter().map(|&(p, _)| p).collect();
    let target: Vec<Point> = pairs.iter().map(|&(_, r)| r).collect();
    let (t, _) = kabsch(&mobile, &target)?;
    Ok(t)
}

/// Sequence identity by global alignment with match=1, mismatch=0,
/// gap=0: the longest common subsequence over the longer length.
pub fn sequence_identity(a: &str, b: &str) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            cur[j] = if a[i - 1] == b[j - 1] {
                prev[j - 1] + 1
            } else {
                prev[j].max(cur[j - 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] as f64 / a.len().max(b.len()) as f64
}

pub fn map_chains(pred: &Structure, reference: &Structure) -> Result<ChainMap> {
    map_chains_with_floor(pred, reference, DEFAULT_IDENTITY_FLOOR)
}

/// Optimal one-to-one chain assignment maximizing total pairwise
/// sequence identity (Hungarian method). Reference chains whose best
/// assigned identity falls below `floor` stay unmapped.
pub fn map_chains_with_floor(
    pred: &Structure,
    reference: &Structure,
    floor: f64,
) -> Result<ChainMap> {
    let mut pred_chains = pred.protein_chain_ids();
    let mut ref_chains = reference.protein_chain_ids();
    if pred_chains.is_empty() || ref_chains.is_empty() {
        return Err(Error::InvalidInput("no protein chains to map".into()));
    }
    // Lexicographic order makes Hungarian tie-breaking deterministic.
    pred_chains.sort();
    ref_chains.sort();
    let pred_seqs: Vec<String> = pred_chains.iter().map(|c| pred.chain_sequence(c)).collect();
    let ref_seqs: Vec<String> = ref_chains
        .iter()
        .map(|c| reference.chain_sequence(c))
        .collect();
    let weights: Vec<Vec<f64>> = pred_seqs
        .iter()
        .map(|p| ref_seqs.iter().map(|r| sequence_identity(p, r)).collect())
        .collect();
    let assignment = hungarian_max(&weights);
    let mut pairs = Vec::new();
    let mut mapped_ref = BTreeSet::new();
    let mut identity_sum = 0.0;
    for (i, j) in assignment.iter().enumerate() {
        if let Some(j) = j {
            if weights[i][*j] >= floor {
                pairs.push((pred_chains[i].clone(), ref_chains[*j].clone()));
                mapped_ref.insert(ref_chains[*j].clone());
                identity_sum += weights[i][*j];
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput(
            "no chain pair meets the identity floor".into(),
        ));
    }
    let unmapped_reference = ref_chains
        .iter()
        .filter(|c| !mapped_ref.contains(*c))
        .cloned()
        .collect();
    let score = identity_sum / pairs.len() as f64;
    Ok(ChainMap {
        pairs,
        score,
        unmapped_reference,
    })
}

/// Corresponded heavy-atom positions between mapped chains, matched by
/// (residue key, atom name). Returns (pred, ref, residue_group) plus the
/// unmatched reference atom count.
pub fn correspond_atoms(
    pred: &Structure,
    reference: &Structure,
    chain_map: &ChainMap,
) -> (Vec<Point>, Vec<Point>, Vec<usize>, usize) {
    let r2p = chain_map.ref_to_pred();
    let mut pred_atoms: BTreeMap<(String, String, String), Point> = BTreeMap::new();
    for a in pred.heavy_atoms() {
        let (c, r) = a.residue_id();
        pred_atoms.entry((c, r, a.name.clone())).or_insert(a.coords);
    }
    let mut groups: BTreeMap<ResidueId, usize> = BTreeMap::new();
    let mut p = Vec::new();
    let mut r = Vec::new();
    let mut g = Vec::new();
    let mut unmatched = 0usize;
    for a in reference.heavy_atoms() {
        if a.is_hetero {
            continue;
        }
        let rid = a.residue_id();
        let Some(pred_chain) = r2p.get(rid.0.as_str()) else {
            unmatched += 1;
            continue;
        };
        match pred_atoms.get(&(pred_chain.to_string(), rid.1.clone(), a.name.clone())) {
            Some(&pp) => {
                let next = groups.len();
                let gid = *groups.entry(rid).or_insert(next);
                p.push(pp);
                r.push(a.coords);
                g.push(gid);
            }
            None => unmatched += 1,
        }
    }
    (p, r, g, unmatched)
}
