//! Command-line front end exposing the full pipeline for scripted and
//! CI use.
//!
//! Exit codes reflect infrastructure failures only (unreadable inputs,
//! unwritable outputs). Scientific failures — bad poses, excluded
//! complexes — live in the emitted data, so CI can tell "tool broke"
//! from "pose is bad".

use crate::error::{Error, Result};
use crate::harness::{
    self, aggregate, aggregate_csv, annotate_failures, correlate, correlate_permutation,
    distribution_csv, group_ligand_sites, interaction_distribution, load_annotations,
    load_manifest, plif_wm_report, run_manifest, ComplexReport, EvalConfig, EvalMode,
    SuccessCriteria, METRIC_MEAN_EMD,
};
use crate::metrics::ComplexScore;
use crate::plif::{Fingerprint, InteractionKey};
use crate::structio::{parse_pdb, parse_sdf};
use crate::validity::pb_valid;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "poseval",
    version,
    about = "Protein-ligand pose evaluation: RMSD, lDDT-PLI, PLIF-EMD, validity checks, and benchmark aggregation"
)]
pub struct Cli {
    /// Worker threads for complex evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// JSON file overriding the full evaluation config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "poseval_out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// JSON-lines manifest describing the benchmark complexes.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Method name stamped into the aggregate report.
    #[arg(long, default_value = "method")]
    pub method: String,

    /// Dataset name stamped into the aggregate report.
    #[arg(long, default_value = "dataset")]
    pub dataset: String,

    /// Superimpose the predicted ligand onto the reference before RMSD
    /// (conformer-only evaluation).
    #[arg(long)]
    pub pre_align_ligand: bool,

    /// PLIF-EMD on raw counts instead of unit-mass weights (ablation).
    #[arg(long)]
    pub raw_count_emd: bool,

    /// Symmetry-corrected RMSD success cutoff, in angstroms.
    #[arg(long, default_value_t = 2.0)]
    pub rmsd_cutoff: f64,

    /// Centroid-distance success cutoff, in angstroms.
    #[arg(long, default_value_t = 1.0)]
    pub centroid_cutoff: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every manifest entry under its declared protocol.
    Score(ScoreArgs),

    /// Score only the multi-ligand entries of a manifest.
    ScoreMulti(ScoreArgs),

    /// Compare score directories of several methods: success-rate
    /// table plus cohort-normalized PLIF-WM.
    Compare {
        /// One score directory per method (as written by `score`).
        #[arg(required = true)]
        score_dirs: Vec<PathBuf>,

        /// PLIF-WM per complex instead of per method mean.
        #[arg(long)]
        per_complex_wm: bool,
    },

    /// Group reference ligands into docking sites with box centers.
    Sites {
        /// Reference protein PDB.
        #[arg(long)]
        protein: PathBuf,

        /// Reference ligand SDF files (multi-molecule files allowed).
        #[arg(long, required = true, num_args = 1..)]
        ligands: Vec<PathBuf>,
    },

    /// Pearson and Spearman correlation of two CSV columns.
    Correlate {
        /// CSV with a header line and at least two numeric columns.
        #[arg(long)]
        input: PathBuf,

        /// p-values from a seeded permutation test instead of the
        /// t-approximation.
        #[arg(long)]
        permutation_p: bool,

        /// Permutation count for --permutation-p.
        #[arg(long, default_value_t = 10_000)]
        shuffles: usize,

        /// RNG seed for --permutation-p.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Histogram of functional annotations over failing complexes.
    Annotate {
        /// One score directory per method.
        #[arg(long, required = true, num_args = 1..)]
        score_dirs: Vec<PathBuf>,

        /// TSV of target_id<TAB>keyword.
        #[arg(long)]
        annotations: PathBuf,

        /// Count targets failed by any method instead of all methods.
        #[arg(long)]
        any_method: bool,
    },

    /// Per-interaction-type count distributions from a score directory.
    Interactions {
        /// Score directory (as written by `score`).
        #[arg(long)]
        score_dir: PathBuf,
    },

    /// Run the PB-Valid geometric battery on one pose.
    Validate {
        /// Protein PDB.
        #[arg(long)]
        protein: PathBuf,

        /// Ligand SDF files.
        #[arg(long, required = true, num_args = 1..)]
        ligands: Vec<PathBuf>,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn load_config(cli: &Cli) -> Result<EvalConfig> {
    match &cli.config {
        Some(path) => serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display()))),
        None => Ok(EvalConfig::default()),
    }
}

fn sanitize(target_id: &str) -> String {
    target_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn score_rows(runs: &[Vec<ComplexReport>]) -> Vec<Vec<ComplexScore>> {
    runs.iter()
        .map(|run| run.iter().map(|r| r.score.clone()).collect())
        .collect()
}

fn cmd_score(cli: &Cli, args: &ScoreArgs, multi_only: bool) -> Result<()> {
    let mut config = load_config(cli)?;
    config.pre_align_ligand = args.pre_align_ligand;
    config.normalize_emd = !args.raw_count_emd;
    config.criteria = SuccessCriteria {
        rmsd_cutoff: args.rmsd_cutoff,
        centroid_cutoff: args.centroid_cutoff,
        ..SuccessCriteria::default()
    };
    let (mut entries, summary) = load_manifest(&args.manifest)?;
    println!("manifest: {summary}");
    if multi_only {
        entries.retain(|e| e.mode == EvalMode::Multi);
        if entries.is_empty() {
            return Err(Error::InvalidInput(
                "manifest has no multi-ligand entries".into(),
            ));
        }
    }
    let base = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let runs = run_manifest(&entries, &base, &config, cli.workers)?;

    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(cli.out.display().to_string(), e))?;
    // Config echo first, so partial outputs are always attributable.
    write_file(
        &cli.out.join("config.json"),
        &serde_json::to_string_pretty(&config).map_err(|e| Error::Other(e.to_string()))?,
    )?;
    for run in &runs {
        for report in run {
            let name = format!("{}_run{}.json", sanitize(&report.score.target_id), report.score.run);
            write_file(
                &cli.out.join(name),
                &serde_json::to_string_pretty(report).map_err(|e| Error::Other(e.to_string()))?,
            )?;
        }
    }
    let report = aggregate(&score_rows(&runs), &config.criteria)?;
    write_file(
        &cli.out.join("aggregate.csv"),
        &aggregate_csv(&report, &args.method, &args.dataset),
    )?;
    write_file(
        &cli.out.join("aggregate.json"),
        &serde_json::to_string_pretty(&report).map_err(|e| Error::Other(e.to_string()))?,
    )?;
    let n_excluded: usize = report.per_run.iter().map(|r| r.n_excluded).sum();
    println!(
        "scored {} complexes over {} runs ({n_excluded} exclusions); reports in {}",
        report.per_run.first().map(|r| r.n_scored).unwrap_or(0),
        report.per_run.len(),
        cli.out.display()
    );
    Ok(())
}

/// Per-complex reports of one score directory, keyed and sorted by
/// (target, run) for deterministic comparisons.
fn load_score_dir(dir: &Path) -> Result<Vec<ComplexReport>> {
    let mut reports = Vec::new();
    let entries =
        std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n != "aggregate.json" && n != "config.json")
        })
        .collect();
    paths.sort();
    for path in paths {
        let report: ComplexReport = serde_json::from_str(&read_to_string(&path)?)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        reports.push(report);
    }
    if reports.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no per-complex reports in {}",
            dir.display()
        )));
    }
    Ok(reports)
}

fn method_name(dir: &Path) -> String {
    dir.file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("method")
        .to_string()
}

fn cmd_compare(cli: &Cli, score_dirs: &[PathBuf], per_complex_wm: bool) -> Result<()> {
    let mut per_method: BTreeMap<String, Vec<ComplexReport>> = BTreeMap::new();
    for dir in score_dirs {
        per_method.insert(method_name(dir), load_score_dir(dir)?);
    }
    // All methods must cover the same targets.
    let target_sets: BTreeMap<&String, std::collections::BTreeSet<&String>> = per_method
        .iter()
        .map(|(m, reports)| (m, reports.iter().map(|r| &r.score.target_id).collect()))
        .collect();
    let first = target_sets.values().next().cloned().unwrap_or_default();
    for (m, set) in &target_sets {
        if *set != first {
            let missing: Vec<&&String> = first.difference(set).collect();
            let extra: Vec<&&String> = set.difference(&first).collect();
            return Err(Error::InvalidInput(format!(
                "method {m} covers different targets (missing {missing:?}, extra {extra:?})"
            )));
        }
    }

    let criteria = SuccessCriteria::default();
    let mut mean_emds = BTreeMap::new();
    println!("method,rmsd_le_2,crmsd_le_1,rmsd_le_2_and_pb_valid,mean_plif_emd");
    for (m, reports) in &per_method {
        let mut by_run: BTreeMap<usize, Vec<ComplexScore>> = BTreeMap::new();
        for r in reports {
            by_run.entry(r.score.run).or_default().push(r.score.clone());
        }
        let runs: Vec<Vec<ComplexScore>> = by_run.into_values().collect();
        let agg = aggregate(&runs, &criteria)?;
        let value = |name: &str| {
            agg.aggregates
                .iter()
                .find(|a| a.metric_name == name)
                .map(|a| a.mean)
                .unwrap_or(f64::NAN)
        };
        println!(
            "{m},{:.6},{:.6},{:.6},{:.6}",
            value(harness::METRIC_RMSD),
            value(harness::METRIC_CRMSD),
            value(harness::METRIC_RMSD_PB),
            value(METRIC_MEAN_EMD)
        );
        if let Some(a) = agg.aggregates.iter().find(|a| a.metric_name == METRIC_MEAN_EMD) {
            mean_emds.insert(m.clone(), a.mean);
        }
    }
    let wm = plif_wm_report(&mean_emds)?;
    println!("\nPLIF-WM (cohort: {}):", wm.cohort.join(", "));
    for (m, score) in &wm.scores {
        println!("{m},{score:.6}");
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(cli.out.display().to_string(), e))?;
    write_file(
        &cli.out.join("compare.json"),
        &serde_json::to_string_pretty(&wm).map_err(|e| Error::Other(e.to_string()))?,
    )?;

    if per_complex_wm {
        // WM recomputed per target over the same cohort.
        let mut per_target: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (m, reports) in &per_method {
            for r in reports {
                if let Some(emd) = r.score.plif_emd {
                    per_target
                        .entry(r.score.target_id.clone())
                        .or_default()
                        .insert(m.clone(), emd);
                }
            }
        }
        let mut rows = BTreeMap::new();
        for (target, emds) in per_target {
            if emds.len() == per_method.len() {
                rows.insert(target, plif_wm_report(&emds)?);
            }
        }
        write_file(
            &cli.out.join("compare_per_complex.json"),
            &serde_json::to_string_pretty(&rows).map_err(|e| Error::Other(e.to_string()))?,
        )?;
    }
    Ok(())
}

fn load_ligand_files(paths: &[PathBuf]) -> Result<Vec<crate::structio::MoleculeGraph>> {
    let mut ligands = Vec::new();
    for path in paths {
        ligands.extend(parse_sdf(&read_to_string(path)?)?);
    }
    Ok(ligands)
}

fn cmd_sites(cli: &Cli, protein: &Path, ligand_paths: &[PathBuf]) -> Result<()> {
    let protein = parse_pdb(&read_to_string(protein)?)?;
    let ligands = load_ligand_files(ligand_paths)?;
    let coords: Vec<Vec<crate::geometry::Point>> = ligands
        .iter()
        .map(|g| {
            let c = g
                .coords
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("ligand without coordinates".into()))?;
            Ok(g.heavy_indices().iter().map(|&i| c[i]).collect())
        })
        .collect::<Result<_>>()?;
    let groups = group_ligand_sites(&coords, &protein, crate::metrics::DEFAULT_POCKET_CUTOFF)?;
    let json = serde_json::to_string_pretty(&groups).map_err(|e| Error::Other(e.to_string()))?;
    println!("{json}");
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(cli.out.display().to_string(), e))?;
    write_file(&cli.out.join("sites.json"), &json)?;
    Ok(())
}

fn cmd_correlate(
    input: &Path,
    permutation_p: bool,
    shuffles: usize,
    seed: u64,
) -> Result<()> {
    let text = read_to_string(input)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: "need at least two CSV columns".into(),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("non-numeric value {s:?}"),
            })
        };
        x.push(parse(fields[0])?);
        y.push(parse(fields[1])?);
    }
    let c = if permutation_p {
        correlate_permutation(&x, &y, shuffles, seed)?
    } else {
        correlate(&x, &y)?
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&c).map_err(|e| Error::Other(e.to_string()))?
    );
    Ok(())
}

fn cmd_annotate(score_dirs: &[PathBuf], annotations: &Path, any_method: bool) -> Result<()> {
    let ann = load_annotations(annotations)?;
    let mut methods = Vec::new();
    for dir in score_dirs {
        let reports = load_score_dir(dir)?;
        methods.push(reports.into_iter().map(|r| r.score).collect::<Vec<_>>());
    }
    let hist = annotate_failures(&methods, &ann, &SuccessCriteria::default(), !any_method);
    for (keyword, count) in &hist {
        println!("{keyword}\t{count}");
    }
    Ok(())
}

fn cmd_interactions(cli: &Cli, score_dir: &Path) -> Result<()> {
    let reports = load_score_dir(score_dir)?;
    let mut fingerprints = Vec::new();
    for r in &reports {
        let mut fp = Fingerprint::default();
        for (label, &count) in &r.fingerprint_pred {
            fp.counts.insert(InteractionKey::parse_label(label)?, count);
        }
        fingerprints.push(fp);
    }
    let dist = interaction_distribution(&fingerprints);
    let csv = distribution_csv(&dist);
    print!("{csv}");
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(cli.out.display().to_string(), e))?;
    write_file(&cli.out.join("interactions.csv"), &csv)?;
    Ok(())
}

fn cmd_validate(cli: &Cli, protein: &Path, ligand_paths: &[PathBuf]) -> Result<()> {
    let config = load_config(cli)?;
    let protein = parse_pdb(&read_to_string(protein)?)?;
    let ligands = load_ligand_files(ligand_paths)?;
    let refs: Vec<&crate::structio::MoleculeGraph> = ligands.iter().collect();
    let report = pb_valid(&protein, &refs, &config.validity);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| Error::Other(e.to_string()))?
    );
    Ok(())
}

/// Dispatch one parsed invocation. Errors returned here are
/// infrastructure failures and map to a nonzero exit code.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Score(args) => cmd_score(cli, args, false),
        Command::ScoreMulti(args) => cmd_score(cli, args, true),
        Command::Compare {
            score_dirs,
            per_complex_wm,
        } => cmd_compare(cli, score_dirs, *per_complex_wm),
        Command::Sites { protein, ligands } => cmd_sites(cli, protein, ligands),
        Command::Correlate {
            input,
            permutation_p,
            shuffles,
            seed,
        } => cmd_correlate(input, *permutation_p, *shuffles, *seed),
        Command::Annotate {
            score_dirs,
            annotations,
            any_method,
        } => cmd_annotate(score_dirs, annotations, *any_method),
        Command::Interactions { score_dir } => cmd_interactions(cli, score_dir),
        Command::Validate { protein, ligands } => cmd_validate(cli, protein, ligands),
    }
}
