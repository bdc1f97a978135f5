//! Protein-ligand interaction fingerprints: geometric interaction
//! detection, histogram construction, PLIF-EMD, and PLIF-WM.

mod detect;

pub use detect::{detect_interactions, InteractionConfig};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum InteractionType {
    HBondDonor,
    HBondAcceptor,
    Hydrophobic,
    PiStacking,
    PiCation,
    SaltBridgeCationic,
    SaltBridgeAnionic,
    VdWContact,
    MetalCoordination,
}

impl InteractionType {
    pub const ALL: [InteractionType; 9] = [
        InteractionType::HBondDonor,
        InteractionType::HBondAcceptor,
        InteractionType::Hydrophobic,
        InteractionType::PiStacking,
        InteractionType::PiCation,
        InteractionType::SaltBridgeCationic,
        InteractionType::SaltBridgeAnionic,
        InteractionType::VdWContact,
        InteractionType::MetalCoordination,
    ];
}

impl fmt::Display for InteractionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for InteractionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InteractionType::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown interaction type {s:?}")))
    }
}

/// One detected interaction, ligand-centric: `HBondDonor` means the
/// ligand donates to the named residue.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub ligand_id: String,
    pub residue_type: String,
    pub interaction_type: InteractionType,
}

/// Histogram key. The ordering (interaction type, residue type, ligand
/// id) defines the deterministic 1-D bin embedding of PLIF-EMD.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InteractionKey {
    pub interaction_type: InteractionType,
    pub residue_type: String,
    pub ligand_id: String,
}

impl Ord for InteractionKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.interaction_type, &self.residue_type, &self.ligand_id).cmp(&(
            &other.interaction_type,
            &other.residue_type,
            &other.ligand_id,
        ))
    }
}

impl PartialOrd for InteractionKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl InteractionKey {
    /// Wire format: "ligandId|RES|InteractionType".
    pub fn label(&self) -> String {
        format!(
            "{}|{}|{}",
            self.ligand_id, self.residue_type, self.interaction_type
        )
    }

    /// Inverse of [`InteractionKey::label`].
    pub fn parse_label(label: &str) -> Result<Self> {
        let parts: Vec<&str> = label.split('|').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "malformed interaction label {label:?}"
            )));
        }
        Ok(InteractionKey {
            interaction_type: parts[2].parse()?,
            residue_type: parts[1].to_string(),
            ligand_id: parts[0].to_string(),
        })
    }
}

/// Histogram over interaction keys; absent key means count zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub counts: BTreeMap<InteractionKey, u64>,
}

impl Fingerprint {
    pub fn is_empty(&self) -> bool {
        self.counts.values().all(|&c| c == 0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Merge another fingerprint into this one (multi-ligand union).
    pub fn merge(&mut self, other: &Fingerprint) {
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
    }

    /// JSON-friendly map keyed by the wire label.
    pub fn labeled(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .map(|(k, v)| (k.label(), *v))
            .collect()
    }
}

/// Exact multiset count per key.
pub fn fingerprint(records: &[InteractionRecord]) -> Fingerprint {
    let mut fp = Fingerprint::default();
    for r in records {
        let key = InteractionKey {
            interaction_type: r.interaction_type,
            residue_type: r.residue_type.clone(),
            ligand_id: r.ligand_id.clone(),
        };
        *fp.counts.entry(key).or_insert(0) += 1;
    }
    fp
}

/// Unified-bin 1-D embedding of a histogram pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmdInput {
    pub bin_order: Vec<InteractionKey>,
    pub u_weights: Vec<f64>,
    pub v_weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmdResult {
    pub value: f64,
    pub both_empty: bool,
    pub one_side_empty: bool,
    pub bin_order: Vec<String>,
}

/// PLIF-EMD: 1-D Wasserstein-1 distance between the two histograms over
/// their unified, lexicographically ordered bins at unit spacing,
/// weights normalized to unit mass.
///
/// Empty-side conventions: both empty -> 0 with flag; exactly one empty
/// -> the maximum bin span (B-1) with flag, keeping aggregates defined.
pub fn plif_emd(u: &Fingerprint, v: &Fingerprint) -> EmdResult {
    plif_emd_mode(u, v, true)
}

/// `normalize = false` keeps raw counts as weights (ablation mode).
pub fn plif_emd_mode(u: &Fingerprint, v: &Fingerprint, normalize: bool) -> EmdResult {
    let bins: BTreeSet<&InteractionKey> = u.counts.keys().chain(v.counts.keys()).collect();
    let bin_order: Vec<InteractionKey> = bins.into_iter().cloned().collect();
    let labels: Vec<String> = bin_order.iter().map(|k| k.label()).collect();
    let u_empty = u.is_empty();
    let v_empty = v.is_empty();
    if u_empty && v_empty {
        return EmdResult {
            value: 0.0,
            both_empty: true,
            one_side_empty: false,
            bin_order: labels,
        };
    }
    if u_empty || v_empty {
        let span = bin_order.len().saturating_sub(1) as f64;
        return EmdResult {
            value: span,
            both_empty: false,
            one_side_empty: true,
            bin_order: labels,
        };
    }
    let weight = |fp: &Fingerprint, key: &InteractionKey| -> f64 {
        let c = fp.counts.get(key).copied().unwrap_or(0) as f64;
        if normalize {
            c / fp.total() as f64
        } else {
            c
        }
    };
    let mut cum_u = 0.0;
    let mut cum_v = 0.0;
    let mut total = 0.0;
    // Closed form on the line: integral of |U - V| between bin centers.
    for (i, key) in bin_order.iter().enumerate() {
        cum_u += weight(u, key);
        cum_v += weight(v, key);
        if i + 1 < bin_order.len() {
            total += (cum_u - cum_v).abs();
        }
    }
    EmdResult {
        value: total,
        both_empty: false,
        one_side_empty: false,
        bin_order: labels,
    }
}

/// PLIF-WM: cohort-normalized matching score, 1 at the best (minimum)
/// EMD and 0 at the worst. A degenerate cohort (max = min) scores 1.0
/// everywhere.
pub fn plif_wm(emds: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    if emds.is_empty() {
        return Err(Error::InvalidInput("empty method cohort".into()));
    }
    let min = emds.values().cloned().fold(f64::INFINITY, f64::min);
    let max = emds.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    Ok(emds
        .iter()
        .map(|(k, &x)| {
            let score = if span == 0.0 { 1.0 } else { 1.0 - (x - min) / span };
            (k.clone(), score)
        })
        .collect())
}

#[cfg(test)]
mod tests;
