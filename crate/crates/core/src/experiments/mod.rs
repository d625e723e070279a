//! Seeded Monte-Carlo sweeps with CSV output and static SVG plots.
//!
//! Trials run in parallel in chunks; each trial derives its own random
//! streams from `(master_seed, grid point, trial)` so output is identical
//! for any thread count. Rows are merged in trial order and flushed after
//! every chunk.

mod config;
mod plot;
mod records;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{ExperimentConfig, ExperimentKind, GridPoint};
pub use plot::{emit_plots, PLOT_FILES};
pub use records::{
    median, quantile, ConcentrationRecord, RecordWriter, SummaryRecord, TrialRecord,
    WalkAuditRecord, CONCENTRATION_HEADER, SUMMARY_HEADER, TRIAL_HEADER, WALK_AUDIT_HEADER,
};

use crate::classifier::{classify_and_score, infinity_error};
use crate::convolution::{build_operator, OperatorKind, Sign};
use crate::csbm_model::{
    reduce_to_1d, sample_features, sample_graph, sample_one_dim, sample_partition, signal_vector,
    ModelParams, Partition, SignalVector, SparseGraph,
};
use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::oracle::count_valid_walk_tuples;
use crate::rng::{derive_seed, Stream};
use crate::spectral_diag::{
    degree_stats, deviation_norm_of, eigenvector_correlation, error_matrix_norm, power_iteration,
    spectral_report, NormOptions, PowerOptions, SpectralOptions,
};

/// Relative stagnation tolerance for spectral-norm estimates in sweeps.
/// Bulk spectra make the ratio iteration converge slowly; at this setting
/// estimates sit within a fraction of a percent of the true norm.
pub const SWEEP_NORM_TOL: f64 = 1e-5;

fn norm_options(seed: u64) -> NormOptions {
    NormOptions {
        rel_tol: SWEEP_NORM_TOL,
        seed,
        ..NormOptions::default()
    }
}

/// Errors that mark a single trial as failed instead of aborting the run.
fn is_trial_failure(err: &Error) -> bool {
    matches!(
        err,
        Error::IsolatedVertex(_) | Error::EmptyGraph | Error::Convergence { .. } | Error::Range(_)
    )
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn expect_experiment(cfg: &ExperimentConfig, allowed: &[ExperimentKind]) -> Result<()> {
    cfg.validate()?;
    if allowed.contains(&cfg.experiment) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "config describes a {} experiment",
            cfg.experiment.name()
        )))
    }
}

/// Runs `job` over every `(point, trial)` pair in parallel chunks and hands
/// each chunk's rows to `sink` in order.
fn run_chunked<R, F, S>(cfg: &ExperimentConfig, job: F, mut sink: S) -> Result<()>
where
    R: Send,
    F: Fn(&GridPoint, usize) -> Result<Vec<R>> + Sync,
    S: FnMut(Vec<R>) -> Result<()>,
{
    let jobs: Vec<(GridPoint, usize)> = cfg
        .grid()
        .into_iter()
        .flat_map(|pt| (0..cfg.trials).map(move |t| (pt, t)))
        .collect();
    let chunk = 2 * rayon::current_num_threads().max(1);
    for batch in jobs.chunks(chunk) {
        let results: Vec<Result<Vec<R>>> = batch.par_iter().map(|(pt, t)| job(pt, *t)).collect();
        for rows in results {
            sink(rows?)?;
        }
    }
    Ok(())
}

struct TrialData {
    params: ModelParams,
    partition: Partition,
    signal: SignalVector,
    graph: SparseGraph,
    x: Vec<f64>,
}

fn sample_trial(cfg: &ExperimentConfig, pt: &GridPoint, trial: usize) -> Result<TrialData> {
    let seed = |stream| derive_seed(cfg.master_seed, pt.index as u64, trial as u64, stream);
    let params = cfg.model_params(pt)?;
    let partition = sample_partition(pt.n, true, seed(Stream::Partition))?;
    let signal = signal_vector(&partition);
    let graph = sample_graph(&params, &partition, seed(Stream::Graph))?;
    let x = if cfg.is_one_dim() {
        sample_one_dim(&signal, pt.sigma, seed(Stream::Features))?.x
    } else {
        let features = sample_features(&params, &partition, seed(Stream::Features))?;
        reduce_to_1d(&features, &params)?.x
    };
    Ok(TrialData {
        params,
        partition,
        signal,
        graph,
        x,
    })
}

#[derive(Default)]
struct Diagnostics {
    delta: Option<f64>,
    lambda1: Option<f64>,
    s_hat_corr: Option<f64>,
}

fn diagnostics<M: LinearOperator>(
    op: &M,
    kind: OperatorKind,
    gamma: Option<f64>,
    s: &SignalVector,
    seed: u64,
) -> Diagnostics {
    if !kind.is_corrected() {
        return Diagnostics::default();
    }
    let delta = gamma.and_then(|g| {
        let op = op as &dyn LinearOperator;
        deviation_norm_of(op, g.abs(), s, &norm_options(seed)).ok()
    });
    let pair = power_iteration(
        op,
        &PowerOptions {
            seed,
            ..PowerOptions::default()
        },
    )
    .ok();
    Diagnostics {
        delta,
        lambda1: pair.as_ref().map(|p| p.value),
        s_hat_corr: pair.and_then(|p| eigenvector_correlation(s, &p.vector).ok()),
    }
}

fn classification_trial(
    cfg: &ExperimentConfig,
    pt: &GridPoint,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let start = Instant::now();
    let gamma = crate::csbm_model::gamma(pt.p, pt.q);
    let base = |kind: OperatorKind, k: usize| TrialRecord {
        experiment: cfg.experiment.name().to_string(),
        trial,
        n: pt.n,
        p: pt.p,
        q: pt.q,
        sigma: pt.sigma,
        gamma,
        kind,
        k,
        misclassified: None,
        error_rate: None,
        exact: None,
        eta: None,
        delta: None,
        lambda1: None,
        s_hat_corr: None,
        inf_error: None,
        failure: String::new(),
        wall_time_ms: 0.0,
    };
    let failed = |kind: OperatorKind, eta: Option<f64>, err: &Error, ms: f64| -> Vec<TrialRecord> {
        (0..=cfg.k_max)
            .map(|k| TrialRecord {
                eta,
                failure: err.to_string(),
                wall_time_ms: ms,
                ..base(kind, k)
            })
            .collect()
    };

    let data = sample_trial(cfg, pt, trial)?;
    let eta = match degree_stats(&data.graph, &data.params) {
        Ok(st) => st.eta,
        Err(e) if is_trial_failure(&e) => {
            let ms = elapsed_ms(start);
            return Ok(cfg
                .kinds
                .iter()
                .flat_map(|&kind| failed(kind, None, &e, ms))
                .collect());
        }
        Err(e) => return Err(e),
    };
    let sample_ms = elapsed_ms(start);
    let sign = Sign::for_params(pt.p, pt.q);
    let power_seed = derive_seed(
        cfg.master_seed,
        pt.index as u64,
        trial as u64,
        Stream::PowerIteration,
    );
    let s = &data.signal;

    let mut rows = Vec::with_capacity(cfg.kinds.len() * (cfg.k_max + 1));
    for &kind in &cfg.kinds {
        let kind_start = Instant::now();
        let op = match build_operator(&data.graph, kind, sign) {
            Ok(op) => op,
            Err(e) if is_trial_failure(&e) => {
                rows.extend(failed(
                    kind,
                    Some(eta),
                    &e,
                    sample_ms + elapsed_ms(kind_start),
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        let diag = diagnostics(&op, kind, gamma, s, power_seed);
        // Corrected operators have top eigenvalue close to |eta|, vanilla
        // ones exactly 1; dividing by it keeps iterates O(1) for large k.
        let rescale = kind.is_corrected() && eta != 0.0 && eta.is_finite();
        let inv = if rescale { 1.0 / eta.abs() } else { 1.0 };
        let mut cur = data.x.clone();
        let mut next = vec![0.0; cur.len()];
        let mut kind_rows = Vec::with_capacity(cfg.k_max + 1);
        for k in 0..=cfg.k_max {
            if k > 0 {
                op.apply_into(&cur, &mut next);
                next.iter_mut().for_each(|v| *v *= inv);
                std::mem::swap(&mut cur, &mut next);
            }
            let res = classify_and_score(&cur, &data.partition)?;
            let inf_error = if rescale {
                Some(infinity_error(&cur, s)?)
            } else {
                None
            };
            kind_rows.push(TrialRecord {
                misclassified: Some(res.misclassified),
                error_rate: Some(res.error_rate),
                exact: Some(res.exact),
                eta: Some(eta),
                delta: diag.delta,
                lambda1: diag.lambda1,
                s_hat_corr: diag.s_hat_corr,
                inf_error,
                ..base(kind, k)
            });
        }
        let ms = sample_ms + elapsed_ms(kind_start);
        kind_rows.iter_mut().for_each(|r| r.wall_time_ms = ms);
        rows.extend(kind_rows);
    }
    Ok(rows)
}

fn run_classification<W: Write>(
    cfg: &ExperimentConfig,
    allowed: ExperimentKind,
    writer: W,
) -> Result<Vec<TrialRecord>> {
    expect_experiment(cfg, &[allowed])?;
    let mut out = RecordWriter::new(writer);
    let mut all = Vec::new();
    run_chunked(
        cfg,
        |pt, t| classification_trial(cfg, pt, t),
        |rows| {
            for r in &rows {
                out.write(r)?;
            }
            out.flush()?;
            all.extend(rows);
            Ok(())
        },
    )?;
    Ok(all)
}

/// Per-k error curves: sample, reduce to one dimension, convolve
/// `k = 0..=k_max` times, classify and score.
pub fn run_partial_sweep<W: Write>(cfg: &ExperimentConfig, writer: W) -> Result<Vec<TrialRecord>> {
    run_classification(cfg, ExperimentKind::PartialSweep, writer)
}

/// Same rows as the partial sweep; corrected and vanilla kinds share every
/// graph and feature draw.
pub fn run_oversmoothing<W: Write>(cfg: &ExperimentConfig, writer: W) -> Result<Vec<TrialRecord>> {
    run_classification(cfg, ExperimentKind::Oversmoothing, writer)
}

/// Exact-recovery flags and `|x_k / eta^k - s|_inf` per trial and `k`.
pub fn run_exact_sweep<W: Write>(cfg: &ExperimentConfig, writer: W) -> Result<Vec<TrialRecord>> {
    run_classification(cfg, ExperimentKind::ExactSweep, writer)
}

fn concentration_trial(
    cfg: &ExperimentConfig,
    pt: &GridPoint,
    trial: usize,
) -> Result<Vec<ConcentrationRecord>> {
    let start = Instant::now();
    let seed = |stream| derive_seed(cfg.master_seed, pt.index as u64, trial as u64, stream);
    let params = ModelParams::graph_only(pt.n, pt.p, pt.q)?;
    let partition = sample_partition(pt.n, true, seed(Stream::Partition))?;
    let graph = sample_graph(&params, &partition, seed(Stream::Graph))?;
    let s = signal_vector(&partition);
    let opts = SpectralOptions {
        eigen: PowerOptions {
            seed: seed(Stream::PowerIteration),
            ..PowerOptions::default()
        },
        norm: norm_options(seed(Stream::PowerIteration)),
    };
    let base = |kind: OperatorKind| ConcentrationRecord {
        experiment: cfg.experiment.name().to_string(),
        trial,
        n: pt.n,
        p: pt.p,
        q: pt.q,
        kind,
        d: None,
        eta: None,
        d_prime: None,
        gamma: params.gamma(),
        r_norm: None,
        delta: None,
        lambda1: None,
        lambda2: None,
        s_hat_corr: None,
        failure: String::new(),
        wall_time_ms: 0.0,
    };
    let r_norm = error_matrix_norm(&graph, &params, &s, &opts.norm)?;
    let shared_ms = elapsed_ms(start);
    let mut rows = Vec::with_capacity(cfg.kinds.len());
    for &kind in &cfg.kinds {
        let kind_start = Instant::now();
        let row = match spectral_report(&graph, &params, &partition, kind, r_norm, &opts) {
            Ok(rep) => ConcentrationRecord {
                d: Some(rep.d),
                eta: Some(rep.eta),
                d_prime: Some(rep.d_prime),
                gamma: Some(rep.gamma),
                r_norm: Some(rep.r_norm),
                delta: Some(rep.delta),
                lambda1: Some(rep.lambda1),
                lambda2: Some(rep.lambda2),
                s_hat_corr: Some(rep.s_hat_corr),
                ..base(kind)
            },
            Err(e) if is_trial_failure(&e) => {
                let st = degree_stats(&graph, &params).ok();
                ConcentrationRecord {
                    d: st.map(|s| s.d),
                    eta: st.map(|s| s.eta),
                    d_prime: st.map(|s| s.d_prime),
                    r_norm: Some(r_norm),
                    failure: e.to_string(),
                    ..base(kind)
                }
            }
            Err(e) => return Err(e),
        };
        rows.push(ConcentrationRecord {
            wall_time_ms: shared_ms + elapsed_ms(kind_start),
            ..row
        });
    }
    Ok(rows)
}

/// Spectral diagnostics of the sampled graph for each operator kind.
pub fn run_concentration<W: Write>(
    cfg: &ExperimentConfig,
    writer: W,
) -> Result<Vec<ConcentrationRecord>> {
    expect_experiment(cfg, &[ExperimentKind::Concentration])?;
    let mut out = RecordWriter::new(writer);
    let mut all = Vec::new();
    run_chunked(
        cfg,
        |pt, t| concentration_trial(cfg, pt, t),
        |rows| {
            for r in &rows {
                out.write(r)?;
            }
            out.flush()?;
            all.extend(rows);
            Ok(())
        },
    )?;
    Ok(all)
}

/// Quantiles per `(n, p, q, kind)` of every concentration metric. The
/// scaled metrics use `sqrt(n max(p, q))`.
pub fn concentration_summary(records: &[ConcentrationRecord]) -> Vec<SummaryRecord> {
    let mut cells: Vec<(usize, f64, f64, OperatorKind)> = Vec::new();
    for r in records {
        let key = (r.n, r.p, r.q, r.kind);
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    type Metric = fn(&ConcentrationRecord, f64) -> Option<f64>;
    let metrics: [(&str, Metric); 10] = [
        ("d", |r, _| r.d),
        ("eta", |r, _| r.eta),
        ("d_prime", |r, _| r.d_prime),
        ("r_norm", |r, _| r.r_norm),
        ("r_norm_scaled", |r, sc| r.r_norm.map(|v| v / sc)),
        ("delta", |r, _| r.delta),
        ("delta_scaled", |r, sc| r.delta.map(|v| v * sc)),
        ("lambda1", |r, _| r.lambda1),
        ("lambda2", |r, _| r.lambda2),
        ("s_hat_corr", |r, _| r.s_hat_corr),
    ];
    let mut out = Vec::new();
    for (n, p, q, kind) in cells {
        let rows: Vec<&ConcentrationRecord> = records
            .iter()
            .filter(|r| r.n == n && r.p == p && r.q == q && r.kind == kind)
            .collect();
        let failed = rows.iter().filter(|r| !r.failure.is_empty()).count();
        let scale = (n as f64 * p.max(q)).sqrt();
        for (name, f) in metrics {
            let mut vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.failure.is_empty())
                .filter_map(|r| f(r, scale))
                .filter(|v| v.is_finite())
                .collect();
            vals.sort_by(f64::total_cmp);
            out.push(SummaryRecord {
                n,
                p,
                q,
                kind,
                metric: name.to_string(),
                trials: rows.len(),
                failed,
                min: quantile(&vals, 0.0),
                q25: quantile(&vals, 0.25),
                median: quantile(&vals, 0.5),
                q75: quantile(&vals, 0.75),
                max: quantile(&vals, 1.0),
            });
        }
    }
    out
}

pub fn write_summary<W: Write>(summary: &[SummaryRecord], writer: W) -> Result<()> {
    let mut out = RecordWriter::new(writer);
    for r in summary {
        out.write(r)?;
    }
    out.flush()
}

/// Largest `n^(2tk)` enumerated by the walk audit sweep.
pub const WALK_AUDIT_BUDGET: f64 = 1e7;

fn walks_feasible(n: usize, k: usize, t: usize) -> bool {
    n >= 2 && (n as f64).powi((2 * t * k) as i32) <= WALK_AUDIT_BUDGET
}

/// Exhaustive walk-tuple counts from vertex 0 for every `n` in the config,
/// `k = 1..=k_max` and every `t` whose enumeration fits [`WALK_AUDIT_BUDGET`].
pub fn run_walk_audit<W: Write>(cfg: &ExperimentConfig, writer: W) -> Result<Vec<WalkAuditRecord>> {
    expect_experiment(cfg, &[ExperimentKind::WalkAudit])?;
    let mut out = RecordWriter::new(writer);
    let mut all = Vec::new();
    for &n in &cfg.n {
        for k in 1..=cfg.k_max {
            let mut t = 1;
            while walks_feasible(n, k, t) {
                let start = Instant::now();
                let table = count_valid_walk_tuples(n, k, t, 0, true)?;
                let ms = elapsed_ms(start);
                for ell in 1..table.counts.len() {
                    let row = WalkAuditRecord {
                        experiment: cfg.experiment.name().to_string(),
                        n,
                        k,
                        t,
                        u: 0,
                        self_loops: true,
                        ell,
                        count: table.counts[ell],
                        bound: table.bounds[ell].to_string(),
                        within_bound: u128::from(table.counts[ell]) <= table.bounds[ell],
                        wall_time_ms: ms,
                    };
                    out.write(&row)?;
                    all.push(row);
                }
                out.flush()?;
                t += 1;
            }
        }
    }
    Ok(all)
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
    pub rows: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Runs the configured experiment, writing `<experiment>.csv` (and
/// `concentration_summary.csv` for concentration sweeps) into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv = out_dir.join(format!("{}.csv", cfg.experiment.name()));
    let file = create(&csv)?;
    let mut summary = None;
    let rows = match cfg.experiment {
        ExperimentKind::PartialSweep => run_partial_sweep(cfg, file)?.len(),
        ExperimentKind::Oversmoothing => run_oversmoothing(cfg, file)?.len(),
        ExperimentKind::ExactSweep => run_exact_sweep(cfg, file)?.len(),
        ExperimentKind::WalkAudit => run_walk_audit(cfg, file)?.len(),
        ExperimentKind::Concentration => {
            let records = run_concentration(cfg, file)?;
            let path = out_dir.join("concentration_summary.csv");
            write_summary(&concentration_summary(&records), create(&path)?)?;
            summary = Some(path);
            records.len()
        }
    };
    Ok(RunOutput { csv, summary, rows })
}
