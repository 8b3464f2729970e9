use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use padic_frames::approx::{report_row, ReportRow, WeightSpec};
use padic_frames::corpus::generate_corpus;
use padic_frames::doc::{FrameDoc, MaskDoc};
use padic_frames::frame::{
    build_frame, validate_frame_spec, FrameError, FrameReport, FrameSystem, Strategy,
};
use padic_frames::frame_ops::{
    active_scales, block_energy_check, parseval_check, partition_check, PartitionReport,
};
use padic_frames::group::Params;
use padic_frames::mask::{
    enumerate_zero_sets, random_zero_set, solve_mask_with_pins, synthesize_phi_hat,
    Classification, MaskError, MaskTree, Pin, ZeroSetFilter,
};
use padic_frames::step::Spectrum;
use padic_frames::TAU_EQ;

use crate::config::{PinArg, ZeroSpec};

const THREADS_VAR: &str = "PADIC_FRAMES_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Rejected(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Rejected(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Config(_) => 4,
        }
    }
}

fn config(err: impl std::fmt::Display) -> CliError {
    CliError::Config(err.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(config)?;
    text.push('\n');
    write_file(path, &text)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_frame(path: &Path) -> Result<FrameSystem, CliError> {
    let doc: FrameDoc = read_json(path)?;
    doc.to_frame()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Maps `items` in order, on `PADIC_FRAMES_THREADS` threads (0 = serial).
fn par_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Result<Vec<R>, CliError> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{THREADS_VAR} must be a count, got `{v}`")))?,
        ),
        Err(_) => None,
    };
    match threads {
        Some(0) => Ok(items.iter().map(f).collect()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(config)?;
            Ok(pool.install(|| items.par_iter().map(&f).collect()))
        }
        None => Ok(items.par_iter().map(f).collect()),
    }
}

fn params(p: u32, n: u32, m: u32) -> Result<Params, CliError> {
    Params::new(p, n, m).map_err(config)
}

fn leaf_path(leaf: usize, p: usize) -> String {
    let mut path = vec![leaf];
    let mut m = leaf;
    while m != 0 {
        m /= p;
        path.push(m);
    }
    path.iter()
        .rev()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn check_tree(tree: &MaskTree) -> Result<(), CliError> {
    let params = tree.params();
    match tree.classify() {
        Classification::NotCovering => {
            let uncovered = tree.uncovered_leaves();
            let mut msg = format!(
                "zero set does not cover the tree: {} leaves keep a nonzero path product",
                uncovered.len()
            );
            for &leaf in uncovered.iter().take(16) {
                msg.push_str(&format!("\n  {}", leaf_path(leaf, params.p() as usize)));
            }
            if uncovered.len() > 16 {
                msg.push_str("\n  ...");
            }
            Err(CliError::Rejected(msg))
        }
        Classification::Rejected => Err(CliError::Rejected(format!(
            "{} zeros reach the limit p^(N+1) = {}: at most {} zeros leave room for a mask with λ_0 = 1",
            tree.zeros().len(),
            params.coefficient_count(),
            params.coefficient_count() - 1
        ))),
        _ => Ok(()),
    }
}

fn solve(tree: &MaskTree, pins: &[Pin]) -> Result<MaskDoc, CliError> {
    check_tree(tree)?;
    let sol = solve_mask_with_pins(tree, pins).map_err(|e| match e {
        MaskError::PinOnZero(_) | MaskError::DuplicatePin(_) | MaskError::NodeOutOfRange { .. } => {
            config(e)
        }
        other => CliError::Rejected(other.to_string()),
    })?;
    let phi_hat = synthesize_phi_hat(&sol).map_err(|e| CliError::Rejected(e.to_string()))?;
    Ok(MaskDoc::new(&sol, &phi_hat))
}

fn suffixed(path: &Path, index: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mask");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{index:03}.{ext}"),
        None => format!("{stem}-{index:03}"),
    };
    path.with_file_name(name)
}

pub fn build(
    p: u32,
    n: u32,
    m: u32,
    zeros: &ZeroSpec,
    pins: &[PinArg],
    out: &Path,
) -> Result<(), CliError> {
    let params = params(p, n, m)?;
    let pins: Vec<Pin> = pins
        .iter()
        .map(|a| Pin {
            node: a.node,
            value: a.value,
        })
        .collect();
    let tree = match zeros {
        ZeroSpec::List(ids) => MaskTree::new(params, ids.iter().copied()).map_err(config)?,
        ZeroSpec::Random(seed) => random_zero_set(params, &mut ChaCha8Rng::seed_from_u64(*seed)),
        ZeroSpec::Enumerate(k) => {
            let trees = enumerate_zero_sets(params, *k, ZeroSetFilter::Any);
            if trees.is_empty() {
                return Err(CliError::Rejected("no covering zero set fits the budget".into()));
            }
            for (i, tree) in trees.iter().enumerate() {
                let doc = solve(tree, &pins)?;
                let path = suffixed(out, i + 1);
                write_json(&path, &doc)?;
                println!(
                    "{}: zeros {:?} ({:?})",
                    path.display(),
                    doc.zeros,
                    doc.classification
                );
            }
            return Ok(());
        }
    };
    let doc = solve(&tree, &pins)?;
    write_json(out, &doc)?;
    println!(
        "{}: zeros {:?} ({:?}, {:?})",
        out.display(),
        doc.zeros,
        doc.classification,
        doc.solve
    );
    Ok(())
}

/// Ring cells in rows of `p` siblings, `#` forbidden and `.` free.
fn forbidden_map(params: &Params, forbidden: &[usize]) -> String {
    let p = params.p() as usize;
    let ring = params.spectrum_len()..params.node_count();
    let mut out = String::new();
    for block in ring.step_by(p) {
        let row: String = (block..block + p)
            .map(|u| if forbidden.contains(&u) { '#' } else { '.' })
            .collect();
        out.push_str(&format!("\n  {block:>6}  {row}"));
    }
    out
}

pub fn frame(mask: &Path, strategy: Strategy, budget: u64, out: &Path) -> Result<(), CliError> {
    let doc: MaskDoc = read_json(mask)?;
    let (sol, phi_hat) = doc
        .to_solution()
        .map_err(|e| CliError::Config(format!("{}: {e}", mask.display())))?;
    let params = sol.params;
    let fs = build_frame(sol, phi_hat, strategy, budget).map_err(|e| match e {
        FrameError::NoTiling {
            stuck_cell,
            ref forbidden,
        } => CliError::Rejected(format!(
            "no tiling of the outer ring: cell {stuck_cell} cannot be covered\nforbidden cells {forbidden:?}{}",
            forbidden_map(&params, forbidden)
        )),
        other => CliError::Rejected(other.to_string()),
    })?;
    write_json(out, &FrameDoc::new(&fs))?;
    println!(
        "{}: q = {}, l = {}",
        out.display(),
        fs.wavelets.len(),
        fs.l
    );
    Ok(())
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SignalGap {
    id: String,
    max_gap: f64,
    blocks: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct BlockEnergySummary {
    pass: bool,
    tolerance: f64,
    max_gap: f64,
    blocks: usize,
    signals: Vec<SignalGap>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ParsevalRow {
    id: String,
    scales: (i32, i32),
    sum_energies: f64,
    tail: f64,
    norm_sq: f64,
    gap: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ParsevalSummary {
    pass: bool,
    tolerance: f64,
    max_gap: f64,
    signals: Vec<ParsevalRow>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyReport {
    pass: bool,
    corpus_seed: u64,
    corpus_size: usize,
    frame: FrameReport,
    partition: PartitionReport,
    block_energy: BlockEnergySummary,
    parseval: ParsevalSummary,
}

/// Smallest and largest scale meeting `spec` over all wavelets.
fn scale_span(spec: &Spectrum, fs: &FrameSystem) -> (i32, i32) {
    fs.wavelets
        .iter()
        .map(|w| active_scales(spec, fs, &w.support))
        .fold(None, |acc: Option<(i32, i32)>, r| {
            Some(match acc {
                None => (*r.start(), *r.end()),
                Some((lo, hi)) => (lo.min(*r.start()), hi.max(*r.end())),
            })
        })
        .unwrap_or((0, 0))
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

pub fn verify(frame: &Path, corpus_size: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    let fs = load_frame(frame)?;
    let frame_report = validate_frame_spec(&fs);
    let m = fs.constancy_depth() as i32;
    let partition = partition_check(&fs, 3, m + 3).map_err(|e| CliError::Failed(e.to_string()))?;
    let corpus = generate_corpus(&fs.mask.params, seed, corpus_size);

    let per_signal = par_map(&corpus, |signal| {
        let spec = &signal.spectrum;
        let mut gaps = Vec::new();
        for (j, w) in fs.wavelets.iter().enumerate() {
            for n in active_scales(spec, &fs, &w.support) {
                gaps.push(block_energy_check(spec, &fs, j, n).map(|c| c.gap));
            }
        }
        let (lo, hi) = scale_span(spec, &fs);
        let parseval = parseval_check(spec, &fs, lo..=hi + 1);
        let gaps: Result<Vec<f64>, _> = gaps.into_iter().collect();
        gaps.map(|gaps| {
            (
                SignalGap {
                    id: signal.id.clone(),
                    max_gap: max_of(gaps.iter().copied()),
                    blocks: gaps.len(),
                },
                ParsevalRow {
                    id: signal.id.clone(),
                    scales: (lo, hi + 1),
                    sum_energies: parseval.sum_energies,
                    tail: parseval.tail,
                    norm_sq: parseval.norm_sq,
                    gap: parseval.gap,
                },
            )
        })
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| CliError::Failed(e.to_string()))?;
    let (block_rows, parseval_rows): (Vec<_>, Vec<_>) = per_signal.into_iter().unzip();

    let block_max = max_of(block_rows.iter().map(|r| r.max_gap));
    let block_energy = BlockEnergySummary {
        pass: block_max <= TAU_EQ,
        tolerance: TAU_EQ,
        max_gap: block_max,
        blocks: block_rows.iter().map(|r| r.blocks).sum(),
        signals: block_rows,
    };
    let parseval_max = max_of(parseval_rows.iter().map(|r| r.gap));
    let parseval = ParsevalSummary {
        pass: parseval_max <= TAU_EQ,
        tolerance: TAU_EQ,
        max_gap: parseval_max,
        signals: parseval_rows,
    };
    let report = VerifyReport {
        pass: frame_report.pass && partition.pass && block_energy.pass && parseval.pass,
        corpus_seed: seed,
        corpus_size,
        frame: frame_report,
        partition,
        block_energy,
        parseval,
    };
    write_json(out, &report)?;
    println!(
        "{}: frame {}, partition {}, block energy {} (max gap {:e}), parseval {} (max gap {:e})",
        out.display(),
        verdict(report.frame.pass),
        verdict(report.partition.pass),
        verdict(report.block_energy.pass),
        report.block_energy.max_gap,
        verdict(report.parseval.pass),
        report.parseval.max_gap,
    );
    if !report.pass {
        let mut failed: Vec<String> = report.frame.failures().map(|c| c.name.clone()).collect();
        if !report.partition.pass {
            failed.push("partition".into());
        }
        if !report.block_energy.pass {
            failed.push("block_energy".into());
        }
        if !report.parseval.pass {
            failed.push("parseval".into());
        }
        return Err(CliError::Failed(format!("checks failed: {}", failed.join(", "))));
    }
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub struct ApproxJob {
    pub frame: PathBuf,
    pub corpus_size: usize,
    pub seed: u64,
    pub powers: Vec<u32>,
    pub epsilons: Vec<f64>,
    pub max_cutoff: Option<i32>,
    pub force: bool,
    pub csv: PathBuf,
    pub json: PathBuf,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ApproxReport {
    pass: bool,
    p: u32,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "M")]
    m: u32,
    l: u32,
    corpus_seed: u64,
    corpus_size: usize,
    cutoffs: (i32, i32),
    powers: Vec<u32>,
    epsilons: Vec<f64>,
    violations: usize,
    rows: Vec<ReportRow>,
}

fn csv_header(powers: &[u32], epsilons: &[f64]) -> Vec<String> {
    let mut header: Vec<String> = ["signal_id", "Ntilde", "R_measured", "bound_thm31"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(powers.iter().map(|m| format!("bound_power_m{m}")));
    header.extend(epsilons.iter().map(|e| format!("bound_log_eps{e}")));
    header.push("pass".into());
    header
}

fn csv_record(row: &ReportRow) -> Vec<String> {
    let mut record = vec![
        row.signal_id.clone(),
        row.n_tilde.to_string(),
        format!("{:?}", row.r_measured),
        format!("{:?}", row.bound_ring),
    ];
    record.extend(row.bound_power.iter().map(|(_, b)| format!("{b:?}")));
    record.extend(row.bound_log.iter().map(|(_, b)| format!("{b:?}")));
    record.push(row.pass.to_string());
    record
}

pub fn approx(job: &ApproxJob) -> Result<(), CliError> {
    for &m in &job.powers {
        WeightSpec::Power { m }.validate().map_err(config)?;
    }
    for &eps in &job.epsilons {
        WeightSpec::Log { eps }.validate().map_err(config)?;
    }
    let fs = load_frame(&job.frame)?;
    if !job.force {
        let report = validate_frame_spec(&fs);
        if !report.pass {
            let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
            return Err(CliError::Failed(format!(
                "frame fails validation ({}); pass --force to report anyway",
                names.join(", ")
            )));
        }
    }
    let n = fs.support_depth();
    let m = fs.constancy_depth();
    let first = n as i32 + 1;
    let last = job.max_cutoff.unwrap_or(m as i32 + fs.l as i32 + 2);
    if last < first {
        return Err(CliError::Config(format!(
            "cutoff range {first}..={last} is empty; bounds need Ñ > N"
        )));
    }
    let corpus = generate_corpus(&fs.mask.params, job.seed, job.corpus_size);
    let rows: Vec<ReportRow> = par_map(&corpus, |signal| {
        (first..=last)
            .map(|cutoff| {
                report_row(&signal.id, &signal.spectrum, &fs, cutoff, &job.powers, &job.epsilons)
            })
            .collect::<Result<Vec<_>, _>>()
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(config)?
    .into_iter()
    .flatten()
    .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io {
        path: job.csv.clone(),
        source: std::io::Error::other(e),
    };
    writer.write_record(csv_header(&job.powers, &job.epsilons)).map_err(csv_err)?;
    for row in &rows {
        writer.write_record(csv_record(row)).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io {
        path: job.csv.clone(),
        source: e.into_error(),
    })?;
    fs::write(&job.csv, bytes).map_err(|source| CliError::Io {
        path: job.csv.clone(),
        source,
    })?;

    let violations = rows.iter().filter(|r| !r.pass).count();
    let report = ApproxReport {
        pass: violations == 0,
        p: fs.p(),
        n,
        m,
        l: fs.l,
        corpus_seed: job.seed,
        corpus_size: job.corpus_size,
        cutoffs: (first, last),
        powers: job.powers.clone(),
        epsilons: job.epsilons.clone(),
        violations,
        rows,
    };
    write_json(&job.json, &report)?;
    println!(
        "{}, {}: {} rows, {} violations",
        job.csv.display(),
        job.json.display(),
        report.rows.len(),
        violations
    );
    if violations > 0 {
        return Err(CliError::Failed(format!(
            "{violations} rows exceed a bound"
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TreeEntry {
    zeros: Vec<usize>,
    classification: Classification,
}

pub fn enumerate_trees(
    p: u32,
    n: u32,
    m: u32,
    max: usize,
    filter: ZeroSetFilter,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let params = params(p, n, m)?;
    let entries: Vec<TreeEntry> = enumerate_zero_sets(params, max, filter)
        .into_iter()
        .map(|t| TreeEntry {
            zeros: t.zeros().iter().copied().collect(),
            classification: t.classify(),
        })
        .collect();
    match out {
        Some(path) => write_json(path, &entries),
        None => {
            use std::io::Write;
            let text = serde_json::to_string_pretty(&entries).map_err(config)?;
            writeln!(std::io::stdout().lock(), "{text}").map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}
