//! Benchmark orchestration: dataset manifests, per-complex evaluation
//! pipelines (primary-ligand and multi-ligand protocols), multi-run
//! aggregation, correlation analysis, failure annotation, site grouping,
//! and report emission.

mod stats;

pub use stats::{
    correlate, correlate_permutation, distribution_csv, interaction_distribution, Correlation,
    DistributionSummary,
};

use crate::error::{Error, Result};
use crate::geometry::{centroid, dist, Point, RigidTransform};
use crate::metrics::{
    self, align_pocket, centroid_rmsd, lddt_pli_points, map_chains_with_floor,
    matched_pocket_atoms, rmsd, rmsd_symmetry_corrected_capped, select_pocket, ChainMap,
    ComplexScore, LddtParams,
};
use crate::metrics::assignment::hungarian_max;
use crate::molgraph::{match_template, perceive_bonds, AtomMapping, DEFAULT_AUTOMORPHISM_CAP};
use crate::plif::{
    detect_interactions, fingerprint, plif_emd_mode, plif_wm, Fingerprint, InteractionConfig,
};
use crate::structio::{parse_pdb, parse_sdf, Atom, MoleculeGraph, Structure};
use crate::validity::{pb_valid, ValidityThresholds};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

/// Success cutoffs for the headline rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuccessCriteria {
    /// Symmetry-corrected RMSD cutoff, in angstroms.
    pub rmsd_cutoff: f64,
    /// Centroid-distance cutoff, in angstroms.
    pub centroid_cutoff: f64,
    /// Whether the headline success metric also requires PB-Valid.
    pub require_pb_valid: bool,
}

impl Default for SuccessCriteria {
    fn default() -> Self {
        SuccessCriteria {
            rmsd_cutoff: 2.0,
            centroid_cutoff: 1.0,
            require_pb_valid: true,
        }
    }
}

impl SuccessCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.rmsd_cutoff <= 0.0 || self.centroid_cutoff <= 0.0 {
            return Err(Error::InvalidInput("success cutoffs must be positive".into()));
        }
        Ok(())
    }
}

/// Ligands within this heavy-atom distance share a docking site group.
pub const SITE_LINK_CUTOFF: f64 = 25.0;
/// Cubic box edge emitted per site group, in angstroms.
pub const SITE_BOX_EXTENT: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Primary,
    Multi,
}

/// One benchmark complex as declared in the JSON-lines manifest. Paths
/// are relative to the manifest file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub target_id: String,
    pub ref_protein_path: String,
    pub ref_ligand_paths: Vec<String>,
    #[serde(default)]
    pub primary_ligand_index: usize,
    /// One predicted complex file (PDB) per run.
    pub predicted_complex_paths: Vec<String>,
    pub mode: EvalMode,
    /// Optional per-fragment SMILES, carried through to reports.
    #[serde(default)]
    pub smiles: Option<Vec<String>>,
    /// Pocket-similarity score consumed from upstream tooling.
    #[serde(default)]
    pub similarity_score: Option<f64>,
    #[serde(default)]
    pub annotation: Option<String>,
}

impl ManifestEntry {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.target_id.is_empty() {
            return Err("target_id is empty".into());
        }
        if self.ref_ligand_paths.is_empty() {
            return Err("ref_ligand_paths is empty".into());
        }
        if self.predicted_complex_paths.is_empty() {
            return Err("predicted_complex_paths is empty: need at least one run".into());
        }
        let distinct: BTreeSet<&String> = self.predicted_complex_paths.iter().collect();
        if distinct.len() != self.predicted_complex_paths.len() {
            return Err("predicted_complex_paths contains duplicate run paths".into());
        }
        if self.mode == EvalMode::Primary
            && self.primary_ligand_index >= self.ref_ligand_paths.len()
        {
            return Err(format!(
                "primary_ligand_index {} out of range for {} reference ligands",
                self.primary_ligand_index,
                self.ref_ligand_paths.len()
            ));
        }
        Ok(())
    }

    pub fn n_runs(&self) -> usize {
        self.predicted_complex_paths.len()
    }
}

/// Per-mode entry counts, printed with every manifest load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSummary {
    pub n_primary: usize,
    pub n_multi: usize,
}

impl fmt::Display for ManifestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} single, n={} multi", self.n_primary, self.n_multi)
    }
}

/// Parse and validate a single JSON manifest line.
pub fn parse_manifest_line(line: &str) -> std::result::Result<ManifestEntry, String> {
    let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| e.to_string())?;
    entry.validate()?;
    Ok(entry)
}

/// Load and validate a JSON-lines manifest. Blank lines are skipped;
/// schema violations report the offending line number.
pub fn load_manifest(path: &Path) -> Result<(Vec<ManifestEntry>, ManifestSummary)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut entries = Vec::new();
    let mut summary = ManifestSummary {
        n_primary: 0,
        n_multi: 0,
    };
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let entry = parse_manifest_line(line).map_err(|message| Error::Manifest {
            line: line_no,
            message,
        })?;
        match entry.mode {
            EvalMode::Primary => summary.n_primary += 1,
            EvalMode::Multi => summary.n_multi += 1,
        }
        entries.push(entry);
    }
    Ok((entries, summary))
}

/// Every tunable of the evaluation pipeline; echoed verbatim into each
/// output directory so runs are reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub pocket_cutoff: f64,
    pub identity_floor: f64,
    pub cross_inclusion_radius: f64,
    pub lddt: LddtParams,
    pub validity: ValidityThresholds,
    pub interactions: InteractionConfig,
    pub automorphism_cap: usize,
    /// PLIF-EMD on unit-mass-normalized weights (raw counts when false).
    pub normalize_emd: bool,
    /// Superimpose the predicted ligand onto the reference before RMSD
    /// (conformer-only evaluation, ignores placement).
    pub pre_align_ligand: bool,
    pub criteria: SuccessCriteria,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            pocket_cutoff: metrics::DEFAULT_POCKET_CUTOFF,
            identity_floor: metrics::DEFAULT_IDENTITY_FLOOR,
            cross_inclusion_radius: metrics::DEFAULT_CROSS_INCLUSION_RADIUS,
            lddt: LddtParams::default(),
            validity: ValidityThresholds::default(),
            interactions: InteractionConfig::default(),
            automorphism_cap: DEFAULT_AUTOMORPHISM_CAP,
            normalize_emd: true,
            pre_align_ligand: false,
            criteria: SuccessCriteria::default(),
        }
    }
}

/// Per-complex output record: the score row plus both fingerprints (by
/// wire label) for downstream interaction analyses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexReport {
    pub score: ComplexScore,
    pub fingerprint_pred: BTreeMap<String, u64>,
    pub fingerprint_ref: BTreeMap<String, u64>,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parsed inputs shared by both protocols for one (entry, run).
struct LoadedComplex {
    ref_protein: Structure,
    templates: Vec<MoleculeGraph>,
    pred_protein: Structure,
    pred_fragments: Vec<MoleculeGraph>,
}

fn load_complex(entry: &ManifestEntry, run: usize, base: &Path) -> Result<LoadedComplex> {
    let ref_protein = parse_pdb(&read_file(&resolve(base, &entry.ref_protein_path))?)?;
    let mut templates = Vec::new();
    for lp in &entry.ref_ligand_paths {
        let mols = parse_sdf(&read_file(&resolve(base, lp))?)?;
        let first = mols
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("no molecule in {lp}")))?;
        templates.push(first);
    }
    let pred_path = entry
        .predicted_complex_paths
        .get(run)
        .ok_or_else(|| Error::InvalidInput(format!("no predicted complex for run {run}")))?;
    let predicted = parse_pdb(&read_file(&resolve(base, pred_path))?)?;
    let pred_protein = Structure {
        atoms: predicted
            .atoms
            .iter()
            .filter(|a| !a.is_hetero)
            .cloned()
            .collect(),
        title: predicted.title.clone(),
        model_index: predicted.model_index,
    };
    if pred_protein.atoms.is_empty() {
        return Err(Error::InvalidInput(
            "predicted complex has no protein atoms".into(),
        ));
    }
    let mut pred_fragments = Vec::new();
    for (_, atoms) in predicted.hetero_fragments() {
        let owned: Vec<Atom> = atoms.into_iter().cloned().collect();
        pred_fragments.push(perceive_bonds(&owned)?);
    }
    Ok(LoadedComplex {
        ref_protein,
        templates,
        pred_protein,
        pred_fragments,
    })
}

fn transform_structure(st: &mut Structure, t: &RigidTransform) {
    for a in &mut st.atoms {
        a.coords = t.apply(a.coords);
    }
}

fn transform_graph(g: &mut MoleculeGraph, t: &RigidTransform) {
    if let Some(c) = g.coords.as_mut() {
        for p in c.iter_mut() {
            *p = t.apply(*p);
        }
    }
}

/// Template chemistry carried onto predicted geometry: the reference
/// heavy subgraph (elements, charges, aromaticity, bond orders) with
/// coordinates taken from the mapped predicted fragment. Distance-based
/// perception cannot recover orders or charges, so every downstream
/// consumer (validity, interaction detection) works on this view.
fn annotated_fragment(
    template: &MoleculeGraph,
    fragment: &MoleculeGraph,
    mapping: &AtomMapping,
) -> Result<MoleculeGraph> {
    let frag_coords = fragment
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("predicted fragment has no coordinates".into()))?;
    let (mut heavy, back) = template.heavy_subgraph();
    let map: BTreeMap<usize, usize> = mapping.pairs.iter().copied().collect();
    let mut coords = Vec::with_capacity(back.len());
    for &old in &back {
        let p = map
            .get(&old)
            .ok_or_else(|| Error::InvalidInput(format!("mapping misses template atom {old}")))?;
        coords.push(frag_coords[*p]);
    }
    heavy.coords = Some(coords);
    Ok(heavy)
}

/// Corresponded heavy-atom positions (pred, ref) in reference heavy
/// order under `mapping`.
fn mapped_positions(
    template: &MoleculeGraph,
    fragment: &MoleculeGraph,
    mapping: &AtomMapping,
) -> Result<(Vec<Point>, Vec<Point>)> {
    let frag_coords = fragment
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("predicted fragment has no coordinates".into()))?;
    let tmpl_coords = template
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("reference ligand has no coordinates".into()))?;
    let map: BTreeMap<usize, usize> = mapping.pairs.iter().copied().collect();
    let mut pred = Vec::new();
    let mut reference = Vec::new();
    for r in template.heavy_indices() {
        let p = map
            .get(&r)
            .ok_or_else(|| Error::InvalidInput(format!("mapping misses template atom {r}")))?;
        pred.push(frag_coords[*p]);
        reference.push(tmpl_coords[r]);
    }
    Ok((pred, reference))
}

fn template_heavy_coords(template: &MoleculeGraph) -> Result<Vec<Point>> {
    let coords = template
        .coords
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("reference ligand has no coordinates".into()))?;
    Ok(template.heavy_indices().iter().map(|&i| coords[i]).collect())
}

/// Best-matching predicted fragment for a template: candidates must
/// share the heavy formula; ties break toward the lowest plain RMSD
/// under the found mapping. Returns (fragment index, mapping, rmsd).
fn best_fragment_match(
    template: &MoleculeGraph,
    fragments: &[MoleculeGraph],
    taken: &BTreeSet<usize>,
) -> Result<(usize, AtomMapping, f64)> {
    let formula = template.heavy_formula();
    let mut best: Option<(usize, AtomMapping, f64)> = None;
    let mut last_err: Option<Error> = None;
    for (fi, frag) in fragments.iter().enumerate() {
        if taken.contains(&fi) || frag.heavy_formula() != formula {
            continue;
        }
        match match_template(template, frag) {
            Ok(mapping) => {
                let (p, r) = mapped_positions(template, frag, &mapping)?;
                let value = rmsd(&p, &r)?;
                if best.as_ref().is_none_or(|(_, _, b)| value < *b) {
                    best = Some((fi, mapping, value));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| match last_err {
        Some(e) => Error::InvalidInput(format!("template mapping failed: {e}")),
        None => Error::InvalidInput(
            "template mapping failed: no predicted fragment matches the ligand formula".into(),
        ),
    })
}

/// Pocket selection + alignment shared by both protocols: reference
/// pocket from all reference ligand heavy atoms, Kabsch over matched
/// pocket atoms, prediction moved into the reference frame.
fn align_complex(
    loaded: &mut LoadedComplex,
    config: &EvalConfig,
) -> Result<(ChainMap, metrics::PocketSelection)> {
    let chain_map = map_chains_with_floor(
        &loaded.pred_protein,
        &loaded.ref_protein,
        config.identity_floor,
    )?;
    let mut all_ref_lig = Vec::new();
    for t in &loaded.templates {
        all_ref_lig.extend(template_heavy_coords(t)?);
    }
    let pocket = select_pocket(&loaded.ref_protein, &all_ref_lig, config.pocket_cutoff)?;
    let transform = align_pocket(
        &loaded.pred_protein,
        &loaded.ref_protein,
        &pocket,
        &chain_map,
    )?;
    transform_structure(&mut loaded.pred_protein, &transform);
    for f in &mut loaded.pred_fragments {
        transform_graph(f, &transform);
    }
    Ok((chain_map, pocket))
}

struct FragmentMetrics {
    rmsd: f64,
    rmsd_symmetry_corrected: f64,
    lower_bound_uncertain: bool,
    centroid_rmsd: f64,
    lddt_pli: f64,
    annotated: MoleculeGraph,
    records_pred: Vec<crate::plif::InteractionRecord>,
    records_ref: Vec<crate::plif::InteractionRecord>,
}

#[allow(clippy::too_many_arguments)]
fn score_fragment(
    template: &MoleculeGraph,
    fragment: &MoleculeGraph,
    mapping: &AtomMapping,
    ligand_id: &str,
    loaded: &LoadedComplex,
    chain_map: &ChainMap,
    pocket: &metrics::PocketSelection,
    config: &EvalConfig,
) -> Result<FragmentMetrics> {
    let mut fragment = fragment.clone();
    if config.pre_align_ligand {
        let (p, r) = mapped_positions(template, &fragment, mapping)?;
        let (t, _) = crate::geometry::kabsch(&p, &r)?;
        transform_graph(&mut fragment, &t);
    }
    let (pred_pos, ref_pos) = mapped_positions(template, &fragment, mapping)?;
    let plain = rmsd(&pred_pos, &ref_pos)?;
    let sym = rmsd_symmetry_corrected_capped(&fragment, template, mapping, config.automorphism_cap)?;
    let centroid = centroid_rmsd(&pred_pos, &ref_pos)?;

    let (pocket_pairs, _) =
        matched_pocket_atoms(&loaded.pred_protein, &loaded.ref_protein, pocket, chain_map);
    let pred_pocket: Vec<Point> = pocket_pairs.iter().map(|&(p, _)| p).collect();
    let ref_pocket: Vec<Point> = pocket_pairs.iter().map(|&(_, r)| r).collect();
    let lddt_pli = lddt_pli_points(
        &pred_pos,
        &ref_pos,
        &pred_pocket,
        &ref_pocket,
        config.cross_inclusion_radius,
        &config.lddt.thresholds,
    )?;

    let annotated = annotated_fragment(template, &fragment, mapping)?;
    let records_pred = detect_interactions(
        &loaded.pred_protein,
        &annotated,
        ligand_id,
        &config.interactions,
    )?;
    let records_ref =
        detect_interactions(&loaded.ref_protein, template, ligand_id, &config.interactions)?;
    Ok(FragmentMetrics {
        rmsd: plain,
        rmsd_symmetry_corrected: sym.value,
        lower_bound_uncertain: sym.lower_bound_uncertain,
        centroid_rmsd: centroid,
        lddt_pli,
        annotated,
        records_pred,
        records_ref,
    })
}

/// Primary-ligand protocol for one (entry, run). Any stage error turns
/// into an excluded score row; the batch never aborts.
pub fn evaluate_primary(
    entry: &ManifestEntry,
    run: usize,
    base: &Path,
    config: &EvalConfig,
) -> ComplexReport {
    match evaluate_primary_inner(entry, run, base, config) {
        Ok(report) => report,
        Err(e) => ComplexReport {
            score: ComplexScore::excluded(&entry.target_id, run, e.to_string()),
            fingerprint_pred: BTreeMap::new(),
            fingerprint_ref: BTreeMap::new(),
        },
    }
}

fn evaluate_primary_inner(
    entry: &ManifestEntry,
    run: usize,
    base: &Path,
    config: &EvalConfig,
) -> Result<ComplexReport> {
    let mut loaded = load_complex(entry, run, base)?;
    let (chain_map, pocket) = align_complex(&mut loaded, config)?;
    let template = &loaded.templates[entry.primary_ligand_index];
    let (fi, mapping, _) = best_fragment_match(template, &loaded.pred_fragments, &BTreeSet::new())?;
    let ligand_id = format!("L{}", entry.primary_ligand_index);
    let m = score_fragment(
        template,
        &loaded.pred_fragments[fi],
        &mapping,
        &ligand_id,
        &loaded,
        &chain_map,
        &pocket,
        config,
    )?;
    let report = pb_valid(&loaded.pred_protein, &[&m.annotated], &config.validity);
    let fp_pred = fingerprint(&m.records_pred);
    let fp_ref = fingerprint(&m.records_ref);
    let emd = plif_emd_mode(&fp_pred, &fp_ref, config.normalize_emd);
    Ok(ComplexReport {
        score: ComplexScore {
            target_id: entry.target_id.clone(),
            run,
            rmsd: Some(m.rmsd),
            rmsd_symmetry_corrected: Some(m.rmsd_symmetry_corrected),
            symmetry_lower_bound_uncertain: m.lower_bound_uncertain,
            centroid_rmsd: Some(m.centroid_rmsd),
            lddt_pli: Some(m.lddt_pli),
            pb_valid: Some(report.overall),
            plif_emd: Some(emd.value),
            plif_emd_one_side_empty: emd.one_side_empty,
            per_check: report.per_check,
            fragment_reassigned: false,
            excluded: false,
            exclusion_reason: None,
        },
        fingerprint_pred: fp_pred.labeled(),
        fingerprint_ref: fp_ref.labeled(),
    })
}

/// Multi-ligand protocol for one (entry, run): one score row per
/// reference fragment. Pocket alignment happens once per complex;
/// identical-formula fragments are optimally reassigned (Hungarian over
/// plain RMSD) and flagged when the pairing differs from file order;
/// PB-Valid (with the inter-ligand clash check) and the fingerprint
/// union are complex-level and written onto every fragment row (the
/// union EMD only onto the first, so per-complex aggregation is not
/// multiply counted).
pub fn evaluate_multi(
    entry: &ManifestEntry,
    run: usize,
    base: &Path,
    config: &EvalConfig,
) -> Vec<ComplexReport> {
    match evaluate_multi_inner(entry, run, base, config) {
        Ok(reports) => reports,
        Err(e) => (0..entry.ref_ligand_paths.len())
            .map(|t| ComplexReport {
                score: ComplexScore::excluded(
                    &format!("{}#frag{t}", entry.target_id),
                    run,
                    e.to_string(),
                ),
                fingerprint_pred: BTreeMap::new(),
                fingerprint_ref: BTreeMap::new(),
            })
            .collect(),
    }
}

fn evaluate_multi_inner(
    entry: &ManifestEntry,
    run: usize,
    base: &Path,
    config: &EvalConfig,
) -> Result<Vec<ComplexReport>> {
    let mut loaded = load_complex(entry, run, base)?;
    let (chain_map, pocket) = align_complex(&mut loaded, config)?;

    // Assign each template a predicted fragment. Within a group of
    // identical heavy formulas the file-order pairing can be wrong
    // (e.g. two ions swapped between sites), so the pairing minimizes
    // total plain RMSD via the Hungarian method.
    let n_templates = loaded.templates.len();
    let mut assignment: Vec<Option<(usize, AtomMapping)>> = vec![None; n_templates];
    let mut reassigned = false;
    let mut frag_errors: Vec<Option<String>> = vec![None; n_templates];

    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (t, template) in loaded.templates.iter().enumerate() {
        groups
            .entry(template.heavy_formula())
            .or_default()
            .push(t);
    }
    for (formula, template_idxs) in &groups {
        let frag_idxs: Vec<usize> = (0..loaded.pred_fragments.len())
            .filter(|&f| loaded.pred_fragments[f].heavy_formula() == *formula)
            .collect();
        // Pairwise mapping attempts; unmatchable pairs get -inf weight.
        let mut mappings: BTreeMap<(usize, usize), (AtomMapping, f64)> = BTreeMap::new();
        let mut weights = vec![vec![f64::NEG_INFINITY; frag_idxs.len()]; template_idxs.len()];
        for (ti, &t) in template_idxs.iter().enumerate() {
            for (fi, &f) in frag_idxs.iter().enumerate() {
                if let Ok(mapping) =
                    match_template(&loaded.templates[t], &loaded.pred_fragments[f])
                {
                    let (p, r) =
                        mapped_positions(&loaded.templates[t], &loaded.pred_fragments[f], &mapping)?;
                    let value = rmsd(&p, &r)?;
                    weights[ti][fi] = -value;
                    mappings.insert((ti, fi), (mapping, value));
                }
            }
        }
        let assigned = if frag_idxs.is_empty() {
            vec![None; template_idxs.len()]
        } else {
            hungarian_max(&weights)
        };
        for (ti, &t) in template_idxs.iter().enumerate() {
            match assigned.get(ti).copied().flatten() {
                Some(fi) if mappings.contains_key(&(ti, fi)) => {
                    let (mapping, _) = mappings.remove(&(ti, fi)).unwrap();
                    if ti != fi {
                        reassigned = true;
                    }
                    assignment[t] = Some((frag_idxs[fi], mapping));
                }
                _ => {
                    frag_errors[t] = Some(format!(
                        "template mapping failed: no predicted fragment matches formula {formula}"
                    ));
                }
            }
        }
    }

    // Per-fragment metrics, plus material for the complex-level flags.
    let mut metrics_per_frag: Vec<Option<FragmentMetrics>> = Vec::with_capacity(n_templates);
    for t in 0..n_templates {
        match &assignment[t] {
            Some((fi, mapping)) => {
                let ligand_id = format!("L{t}");
                match score_fragment(
                    &loaded.templates[t],
                    &loaded.pred_fragments[*fi],
                    mapping,
                    &ligand_id,
                    &loaded,
                    &chain_map,
                    &pocket,
                    config,
                ) {
                    Ok(m) => metrics_per_frag.push(Some(m)),
                    Err(e) => {
                        frag_errors[t] = Some(e.to_string());
                        metrics_per_frag.push(None);
                    }
                }
            }
            None => metrics_per_frag.push(None),
        }
    }

    // Complex-level validity over all scored fragments.
    let annotated: Vec<&MoleculeGraph> = metrics_per_frag
        .iter()
        .flatten()
        .map(|m| &m.annotated)
        .collect();
    let validity = if annotated.is_empty() {
        None
    } else {
        Some(pb_valid(&loaded.pred_protein, &annotated, &config.validity))
    };

    // Complex-level fingerprint union and EMD.
    let mut fp_pred = Fingerprint::default();
    let mut fp_ref = Fingerprint::default();
    for m in metrics_per_frag.iter().flatten() {
        fp_pred.merge(&fingerprint(&m.records_pred));
        fp_ref.merge(&fingerprint(&m.records_ref));
    }
    let emd = plif_emd_mode(&fp_pred, &fp_ref, config.normalize_emd);

    let mut reports = Vec::with_capacity(n_templates);
    let mut first_scored = true;
    for t in 0..n_templates {
        let row_id = format!("{}#frag{t}", entry.target_id);
        match &metrics_per_frag[t] {
            Some(m) => {
                let (emd_value, one_side_empty) = if first_scored {
                    first_scored = false;
                    (Some(emd.value), emd.one_side_empty)
                } else {
                    (None, false)
                };
                reports.push(ComplexReport {
                    score: ComplexScore {
                        target_id: row_id,
                        run,
                        rmsd: Some(m.rmsd),
                        rmsd_symmetry_corrected: Some(m.rmsd_symmetry_corrected),
                        symmetry_lower_bound_uncertain: m.lower_bound_uncertain,
                        centroid_rmsd: Some(m.centroid_rmsd),
                        lddt_pli: Some(m.lddt_pli),
                        pb_valid: validity.as_ref().map(|v| v.overall),
                        plif_emd: emd_value,
                        plif_emd_one_side_empty: one_side_empty,
                        per_check: validity
                            .as_ref()
                            .map(|v| v.per_check.clone())
                            .unwrap_or_default(),
                        fragment_reassigned: reassigned,
                        excluded: false,
                        exclusion_reason: None,
                    },
                    fingerprint_pred: fp_pred.labeled(),
                    fingerprint_ref: fp_ref.labeled(),
                });
            }
            None => {
                let reason = frag_errors[t]
                    .clone()
                    .unwrap_or_else(|| "fragment not scored".into());
                reports.push(ComplexReport {
                    score: ComplexScore::excluded(&row_id, run, reason),
                    fingerprint_pred: BTreeMap::new(),
                    fingerprint_ref: BTreeMap::new(),
                });
            }
        }
    }
    Ok(reports)
}

/// Score one manifest entry for one run under its declared protocol.
pub fn evaluate_entry(
    entry: &ManifestEntry,
    run: usize,
    base: &Path,
    config: &EvalConfig,
) -> Vec<ComplexReport> {
    match entry.mode {
        EvalMode::Primary => vec![evaluate_primary(entry, run, base, config)],
        EvalMode::Multi => evaluate_multi(entry, run, base, config),
    }
}

/// Evaluate the whole manifest: one row vector per run, rows in
/// manifest order. Complexes are scored on a rayon pool of `workers`
/// threads (0 = rayon default); results are gathered back into
/// manifest order, so the output is independent of the worker count.
pub fn run_manifest(
    entries: &[ManifestEntry],
    base: &Path,
    config: &EvalConfig,
    workers: usize,
) -> Result<Vec<Vec<ComplexReport>>> {
    let n_runs = entries.iter().map(|e| e.n_runs()).max().unwrap_or(0);
    if n_runs == 0 {
        return Err(Error::InvalidInput("manifest declares no runs".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Other(format!("worker pool: {e}")))?;
    let mut out = Vec::with_capacity(n_runs);
    for run in 0..n_runs {
        use rayon::prelude::*;
        let rows: Vec<Vec<ComplexReport>> = pool.install(|| {
            entries
                .par_iter()
                .map(|entry| {
                    if run < entry.n_runs() {
                        evaluate_entry(entry, run, base, config)
                    } else {
                        vec![ComplexReport {
                            score: ComplexScore::excluded(
                                &entry.target_id,
                                run,
                                "no predicted complex for this run",
                            ),
                            fingerprint_pred: BTreeMap::new(),
                            fingerprint_ref: BTreeMap::new(),
                        }]
                    }
                })
                .collect()
        });
        out.push(rows.into_iter().flatten().collect());
    }
    Ok(out)
}

pub const METRIC_RMSD: &str = "rmsd_le_2";
pub const METRIC_CRMSD: &str = "crmsd_le_1";
pub const METRIC_RMSD_PB: &str = "rmsd_le_2_and_pb_valid";
pub const METRIC_MEAN_EMD: &str = "mean_plif_emd";

/// Mean and sample standard deviation of one metric across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunAggregate {
    pub metric_name: String,
    pub mean: f64,
    pub std: f64,
    pub n_runs: usize,
    pub n_complexes: usize,
}

/// Per-run counts and rates backing the aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub n_scored: usize,
    pub n_excluded: usize,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateReport {
    pub aggregates: Vec<RunAggregate>,
    pub per_run: Vec<RunSummary>,
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

fn meets(score: &ComplexScore, criteria: &SuccessCriteria, metric: &str) -> bool {
    match metric {
        METRIC_RMSD => score
            .rmsd_symmetry_corrected
            .is_some_and(|v| v <= criteria.rmsd_cutoff),
        METRIC_CRMSD => score
            .centroid_rmsd
            .is_some_and(|v| v <= criteria.centroid_cutoff),
        METRIC_RMSD_PB => {
            score
                .rmsd_symmetry_corrected
                .is_some_and(|v| v <= criteria.rmsd_cutoff)
                && score.pb_valid == Some(true)
        }
        _ => unreachable!("unknown success metric {metric}"),
    }
}

/// Success rates over non-excluded complexes per run, then mean and
/// sample std (n-1 denominator; single run gives std 0) across runs.
/// Excluded complexes never enter any denominator except the exclusion
/// count.
pub fn aggregate(
    runs: &[Vec<ComplexScore>],
    criteria: &SuccessCriteria,
) -> Result<AggregateReport> {
    criteria.validate()?;
    if runs.is_empty() {
        return Err(Error::InvalidInput("aggregate with no runs".into()));
    }
    let mut per_run = Vec::with_capacity(runs.len());
    for (run, rows) in runs.iter().enumerate() {
        let scored: Vec<&ComplexScore> = rows.iter().filter(|s| !s.excluded).collect();
        let n_excluded = rows.len() - scored.len();
        if scored.is_empty() {
            return Err(Error::InvalidInput(format!(
                "run {run}: all complexes excluded, nothing to aggregate"
            )));
        }
        let mut values = BTreeMap::new();
        for metric in [METRIC_RMSD, METRIC_CRMSD, METRIC_RMSD_PB] {
            let hits = scored.iter().filter(|s| meets(s, criteria, metric)).count();
            values.insert(metric.to_string(), hits as f64 / scored.len() as f64);
        }
        let emds: Vec<f64> = scored.iter().filter_map(|s| s.plif_emd).collect();
        if !emds.is_empty() {
            values.insert(
                METRIC_MEAN_EMD.to_string(),
                emds.iter().sum::<f64>() / emds.len() as f64,
            );
        }
        per_run.push(RunSummary {
            run,
            n_scored: scored.len(),
            n_excluded,
            values,
        });
    }
    let n_complexes = per_run.iter().map(|r| r.n_scored).max().unwrap_or(0);
    let metric_names: BTreeSet<String> = per_run
        .iter()
        .flat_map(|r| r.values.keys().cloned())
        .collect();
    let mut aggregates = Vec::new();
    for name in [METRIC_RMSD, METRIC_CRMSD, METRIC_RMSD_PB, METRIC_MEAN_EMD] {
        if !metric_names.contains(name) {
            continue;
        }
        let vals: Vec<f64> = per_run
            .iter()
            .filter_map(|r| r.values.get(name).copied())
            .collect();
        aggregates.push(RunAggregate {
            metric_name: name.to_string(),
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
            std: sample_std(&vals),
            n_runs: vals.len(),
            n_complexes,
        });
    }
    Ok(AggregateReport {
        aggregates,
        per_run,
    })
}

/// Aggregate CSV in the documented column layout.
pub fn aggregate_csv(report: &AggregateReport, method: &str, dataset: &str) -> String {
    let mut out = String::from("method,dataset,metric,mean,std,n_runs,n_scored,n_excluded\n");
    let n_scored: usize = report.per_run.iter().map(|r| r.n_scored).max().unwrap_or(0);
    let n_excluded: usize = report
        .per_run
        .iter()
        .map(|r| r.n_excluded)
        .max()
        .unwrap_or(0);
    for a in &report.aggregates {
        out.push_str(&format!(
            "{method},{dataset},{},{:.12},{:.12},{},{n_scored},{n_excluded}\n",
            a.metric_name, a.mean, a.std, a.n_runs
        ));
    }
    out
}

/// PLIF-WM over a method cohort, with the membership list attached so
/// scores stay interpretable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WmReport {
    pub cohort: Vec<String>,
    pub scores: BTreeMap<String, f64>,
}

pub fn plif_wm_report(mean_emds: &BTreeMap<String, f64>) -> Result<WmReport> {
    let scores = plif_wm(mean_emds)?;
    Ok(WmReport {
        cohort: mean_emds.keys().cloned().collect(),
        scores,
    })
}

/// One docking-site group: member ligand indices, box center, and
/// cubic box extent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteGroup {
    pub members: Vec<usize>,
    pub box_center: Point,
    pub box_extent: f64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }
    fn union(&mut self, i: usize, j: usize) {
        let (a, b) = (self.find(i), self.find(j));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Group ligands whose heavy atoms come within `SITE_LINK_CUTOFF` of
/// each other (transitive closure). Each group's box center is the
/// centroid of its member pocket residues' heavy atoms (10 A rule),
/// falling back to the ligand centroid when the pocket is empty;
/// extent is the fixed cubic box edge. Groups are ordered by smallest
/// member index; the output is a partition of the ligand indices.
pub fn group_ligand_sites(
    ligands: &[Vec<Point>],
    protein: &Structure,
    pocket_cutoff: f64,
) -> Result<Vec<SiteGroup>> {
    if ligands.is_empty() {
        return Err(Error::InvalidInput("no ligands to group".into()));
    }
    let mut uf = UnionFind::new(ligands.len());
    for i in 0..ligands.len() {
        for j in i + 1..ligands.len() {
            let linked = ligands[i]
                .iter()
                .any(|&a| ligands[j].iter().any(|&b| dist(a, b) <= SITE_LINK_CUTOFF));
            if linked {
                uf.union(i, j);
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..ligands.len() {
        let root = uf.find(i);
        by_root.entry(root).or_default().push(i);
    }
    let mut groups = Vec::new();
    for members in by_root.into_values() {
        let group_coords: Vec<Point> = members
            .iter()
            .flat_map(|&i| ligands[i].iter().copied())
            .collect();
        let box_center = match select_pocket(protein, &group_coords, pocket_cutoff) {
            Ok(pocket) => {
                let pts: Vec<Point> = protein
                    .heavy_atoms()
                    .filter(|a| !a.is_hetero && pocket.residues.contains(&a.residue_id()))
                    .map(|a| a.coords)
                    .collect();
                centroid(&pts)?
            }
            Err(_) => centroid(&group_coords)?,
        };
        groups.push(SiteGroup {
            members,
            box_center,
            box_extent: SITE_BOX_EXTENT,
        });
    }
    Ok(groups)
}

/// TSV of `target_id<TAB>keyword` lines.
pub fn load_annotations(path: &Path) -> Result<BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        let target = parts.next().unwrap_or("").trim();
        let keyword = parts.next().map(str::trim).unwrap_or("");
        if target.is_empty() || keyword.is_empty() {
            return Err(Error::Manifest {
                line: idx + 1,
                message: "annotation line needs target_id<TAB>keyword".into(),
            });
        }
        out.insert(target.to_string(), keyword.to_string());
    }
    Ok(out)
}

pub const UNANNOTATED: &str = "UNANNOTATED";

/// Histogram of functional-annotation keywords over failing complexes.
///
/// A method fails a target when no run meets RMSD <= cutoff & PB-Valid
/// (excluded rows count as failures). With `require_all_methods` the
/// histogram covers targets failed by every method; otherwise targets
/// failed by any method. Targets without an annotation bucket under
/// `UNANNOTATED`.
pub fn annotate_failures(
    methods: &[Vec<ComplexScore>],
    annotations: &BTreeMap<String, String>,
    criteria: &SuccessCriteria,
    require_all_methods: bool,
) -> BTreeMap<String, u64> {
    let targets: BTreeSet<&String> = methods
        .iter()
        .flatten()
        .map(|s| &s.target_id)
        .collect();
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for target in targets {
        let mut failed_counts = 0usize;
        let mut methods_with_target = 0usize;
        for method in methods {
            let rows: Vec<&ComplexScore> =
                method.iter().filter(|s| &s.target_id == target).collect();
            if rows.is_empty() {
                continue;
            }
            methods_with_target += 1;
            let succeeded = rows
                .iter()
                .any(|s| !s.excluded && meets(s, criteria, METRIC_RMSD_PB));
            if !succeeded {
                failed_counts += 1;
            }
        }
        let qualifies = if require_all_methods {
            methods_with_target > 0 && failed_counts == methods_with_target
        } else {
            failed_counts > 0
        };
        if qualifies {
            let keyword = annotations
                .get(target)
                .cloned()
                .unwrap_or_else(|| UNANNOTATED.to_string());
            *histogram.entry(keyword).or_insert(0) += 1;
        }
    }
    histogram
}
