//! Seeded Monte Carlo SER estimation and parameter sweeps.
//!
//! Trial `t` draws everything from a ChaCha8 stream keyed by `(seed, t)`, so an
//! estimate depends only on the seed and the trial count, never on how trials
//! are split across threads.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    derive_link_params, simulate_block_with, LinkParams, Modulation, Protocol, ReceivedBlock,
    ScenarioConfig,
};
use crate::detectors::{
    dest_detect_dpsk_approx, dest_detect_dpsk_exact_with_tol, dest_detect_fsk_approx,
    dest_detect_fsk_exact_with_tol, direct_detect, EXACT_DETECTOR_REL_TOL,
};
use crate::error::{Error, Result};
use crate::transition::{cached_table, TransitionSource, TransitionTable};

/// Smallest trial count accepted by [`estimate_ser`].
pub const MIN_TRIALS: u64 = 1_000;

/// Trials per work item; results are summed in chunk order.
const CHUNK: u64 = 2_048;

/// Which decision the destination makes in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    /// Exact destination MLD.
    Exact,
    /// Closed-form approximate destination MLD.
    Approx,
    /// Returns the transmitted message; a harness self-test.
    Genie,
    /// The first relay's own decision (first-hop SER).
    Relay,
    /// Direct link only.
    Direct,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Exact,
        DetectorKind::Approx,
        DetectorKind::Genie,
        DetectorKind::Relay,
        DetectorKind::Direct,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DetectorKind::Exact => "exact",
            DetectorKind::Approx => "approx",
            DetectorKind::Genie => "genie",
            DetectorKind::Relay => "relay",
            DetectorKind::Direct => "direct",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|d| d.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown detector `{s}`")))
    }
}

/// Execution knobs that do not change results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Quadrature tolerance for the exact detectors.
    pub exact_rel_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 0,
            exact_rel_tol: EXACT_DETECTOR_REL_TOL,
        }
    }
}

/// Error count over a number of trials.
#[derive(Debug, Clone, Copy)]
pub struct SerEstimate {
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    /// 95% normal-approximation half-width, `1.96 sqrt(ser (1 - ser) / trials)`.
    pub ci_halfwidth: f64,
    pub seed: u64,
    /// Elapsed seconds; not part of equality.
    pub wallclock: f64,
}

impl SerEstimate {
    pub fn from_counts(trials: u64, errors: u64, seed: u64, wallclock: f64) -> Self {
        let ser = if trials == 0 { 0.0 } else { errors as f64 / trials as f64 };
        let ci_halfwidth = if trials == 0 {
            0.0
        } else {
            1.96 * (ser * (1.0 - ser) / trials as f64).sqrt()
        };
        SerEstimate {
            trials,
            errors,
            ser,
            ci_halfwidth,
            seed,
            wallclock,
        }
    }

    /// Binomial standard deviation of the estimator under a true SER `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

impl PartialEq for SerEstimate {
    fn eq(&self, other: &Self) -> bool {
        self.trials == other.trials
            && self.errors == other.errors
            && self.ser == other.ser
            && self.ci_halfwidth == other.ci_halfwidth
            && self.seed == other.seed
    }
}

/// `max(1e6, ceil(100 / target_ser))`: about 100 expected errors at the target.
pub fn trials_for_target(target_ser: f64) -> u64 {
    let needed = if target_ser > 0.0 {
        (100.0 / target_ser).ceil()
    } else {
        f64::INFINITY
    };
    needed.clamp(1e6, u64::MAX as f64) as u64
}

/// Everything a trial needs, shared read-only across workers.
struct TrialContext {
    params: LinkParams,
    modulation: Modulation,
    alphabet: usize,
    detector: DetectorKind,
    tables: Vec<Arc<TransitionTable>>,
    exact_rel_tol: f64,
}

impl TrialContext {
    fn new(
        params: LinkParams,
        modulation: Modulation,
        alphabet: usize,
        detector: DetectorKind,
        exact_rel_tol: f64,
    ) -> Result<Self> {
        params.validate()?;
        if alphabet < 2 {
            return Err(Error::Config(format!("M must be at least 2, got {alphabet}")));
        }
        if detector == DetectorKind::Relay && params.relays() == 0 {
            return Err(Error::Config("relay detector needs at least one relay".into()));
        }
        let source = match (modulation, detector) {
            (Modulation::Dpsk, DetectorKind::Exact) => Some(TransitionSource::DpskExact),
            (Modulation::Dpsk, DetectorKind::Approx) => Some(TransitionSource::DpskApprox),
            (Modulation::Fsk, DetectorKind::Exact | DetectorKind::Approx) => {
                Some(TransitionSource::Fsk)
            }
            _ => None,
        };
        let tables = match source {
            Some(src) => params
                .gamma_0r
                .iter()
                .map(|&g| cached_table(src, g, alphabet))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(TrialContext {
            params,
            modulation,
            alphabet,
            detector,
            tables,
            exact_rel_tol,
        })
    }

    fn decide(&self, block: &ReceivedBlock) -> Result<usize> {
        let p = &self.params;
        let t = &self.tables;
        match (self.detector, self.modulation) {
            (DetectorKind::Genie, _) => Ok(block.message),
            (DetectorKind::Relay, _) => Ok(block.relay_messages[0]),
            (DetectorKind::Direct, _) => direct_detect(block, p),
            (DetectorKind::Exact, Modulation::Dpsk) => {
                dest_detect_dpsk_exact_with_tol(block, p, t, self.exact_rel_tol)
            }
            (DetectorKind::Exact, Modulation::Fsk) => {
                dest_detect_fsk_exact_with_tol(block, p, t, self.exact_rel_tol)
            }
            (DetectorKind::Approx, Modulation::Dpsk) => dest_detect_dpsk_approx(block, p, t),
            (DetectorKind::Approx, Modulation::Fsk) => dest_detect_fsk_approx(block, p, t),
        }
    }

    /// Whether trial `index` ends in a symbol error.
    fn trial(&self, base: &ChaCha8Rng, index: u64) -> Result<bool> {
        let mut rng = base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        let m = rng.random_range(0..self.alphabet);
        let block = simulate_block_with(&self.params, self.modulation, self.alphabet, &mut rng, m)?;
        Ok(self.decide(&block)? != m)
    }

    fn chunk(&self, base: &ChaCha8Rng, start: u64, end: u64) -> ChunkOutcome {
        let mut errors = 0;
        for t in start..end {
            match self.trial(base, t) {
                Ok(err) => errors += u64::from(err),
                Err(e) => {
                    return ChunkOutcome {
                        errors,
                        failure: Some((t, e)),
                    }
                }
            }
        }
        ChunkOutcome {
            errors,
            failure: None,
        }
    }
}

struct ChunkOutcome {
    errors: u64,
    failure: Option<(u64, Error)>,
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn run_trials(ctx: &TrialContext, n_trials: u64, seed: u64, workers: usize) -> Result<SerEstimate> {
    if n_trials < MIN_TRIALS {
        return Err(Error::Range {
            what: "n_trials",
            value: n_trials as f64,
            range: ">= 1000",
        });
    }
    let start = Instant::now();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunks = n_trials.div_ceil(CHUNK);
    let outcomes: Vec<ChunkOutcome> = in_pool(workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| ctx.chunk(&base, c * CHUNK, ((c + 1) * CHUNK).min(n_trials)))
            .collect()
    })?;
    let mut errors = 0;
    for (c, outcome) in outcomes.into_iter().enumerate() {
        if let Some((trial, source)) = outcome.failure {
            return Err(Error::Simulation {
                trial,
                completed_trials: c as u64 * CHUNK,
                errors,
                source: Box::new(source),
            });
        }
        errors += outcome.errors;
    }
    Ok(SerEstimate::from_counts(
        n_trials,
        errors,
        seed,
        start.elapsed().as_secs_f64(),
    ))
}

/// SER of `detector` in the scenario `config`, over `n_trials >= 1000` trials.
pub fn estimate_ser(
    config: &ScenarioConfig,
    detector: DetectorKind,
    n_trials: u64,
    seed: u64,
) -> Result<SerEstimate> {
    estimate_ser_opts(config, detector, n_trials, seed, &RunOptions::default())
}

/// [`estimate_ser`] with explicit worker count and exact-detector tolerance.
pub fn estimate_ser_opts(
    config: &ScenarioConfig,
    detector: DetectorKind,
    n_trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<SerEstimate> {
    let params = derive_link_params(config)?;
    estimate_ser_with_params(&params, config.modulation, config.m, detector, n_trials, seed, opts)
}

/// SER for link SNRs given directly rather than derived from a scenario.
pub fn estimate_ser_with_params(
    params: &LinkParams,
    modulation: Modulation,
    alphabet: usize,
    detector: DetectorKind,
    n_trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<SerEstimate> {
    let ctx = TrialContext::new(params.clone(), modulation, alphabet, detector, opts.exact_rel_tol)?;
    run_trials(&ctx, n_trials, seed, opts.workers)
}

/// Swept scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    SnrDb,
    Alpha,
    Rho,
    M,
}

impl Axis {
    pub fn tag(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Alpha => "alpha",
            Axis::Rho => "rho",
            Axis::M => "M",
        }
    }

    /// `config` with this axis set to `value`.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut c = config.clone();
        match self {
            Axis::SnrDb => c.set_snr_db(value),
            Axis::Alpha | Axis::Rho => {
                if !(value > 0.0 && value < 1.0) {
                    return Err(Error::Config(format!(
                        "{} must lie in (0, 1), got {value}",
                        self.tag()
                    )));
                }
                let want = if self == Axis::Alpha { Protocol::Ts } else { Protocol::Ps };
                if c.protocol != want {
                    return Err(Error::Config(format!(
                        "{} sweeps need protocol {want}, scenario is {}",
                        self.tag(),
                        c.protocol
                    )));
                }
                if self == Axis::Alpha {
                    c.alpha = Some(value);
                } else {
                    c.rho = Some(value);
                }
            }
            Axis::M => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::Config(format!("M must be an integer >= 2, got {value}")));
                }
                c.m = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "snr_db" | "snr" => Ok(Axis::SnrDb),
            "alpha" => Ok(Axis::Alpha),
            "rho" => Ok(Axis::Rho),
            "M" | "m" => Ok(Axis::M),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Axis and its strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        Ok(SweepSpec { axis, values })
    }

    /// `start, start + step, ...` up to `stop` inclusive, rounded to 1e-9.
    pub fn range(axis: Axis, start: f64, stop: f64, step: f64) -> Result<Self> {
        let well_formed = step > 0.0 && stop >= start;
        if !well_formed {
            return Err(Error::Config(format!(
                "bad sweep range {start}..{stop} step {step}"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        let values = (0..=n)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect();
        Self::new(axis, values)
    }
}

/// One `(axis value, detector)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis: Axis,
    pub axis_value: f64,
    pub detector: DetectorKind,
    pub protocol: Protocol,
    pub modulation: Modulation,
    pub m: usize,
    pub k: usize,
    pub snr_db: f64,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub estimate: SerEstimate,
}

/// A cell that could not be estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub axis_value: f64,
    pub detector: DetectorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub failures: Vec<SweepFailure>,
}

impl SweepResult {
    /// Points of `detector` in axis order.
    pub fn curve(&self, detector: DetectorKind) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.detector == detector).collect()
    }

    /// Swept axis, if there are points.
    pub fn axis(&self) -> Option<Axis> {
        self.points.first().map(|p| p.axis)
    }
}

/// SER for every `(value, detector)` pair. Each cell reuses `seed`, so all
/// detectors see the same trials. Failed cells are recorded and skipped.
pub fn sweep(
    config: &ScenarioConfig,
    spec: &SweepSpec,
    detectors: &[DetectorKind],
    n_trials: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<SweepResult> {
    let spec = SweepSpec::new(spec.axis, spec.values.clone())?;
    let mut result = SweepResult::default();
    for &value in &spec.values {
        let point_config = match spec.axis.apply(config, value) {
            Ok(c) => c,
            Err(e) => {
                for &d in detectors {
                    result.failures.push(SweepFailure {
                        axis_value: value,
                        detector: d,
                        message: e.to_string(),
                    });
                }
                continue;
            }
        };
        for &detector in detectors {
            match estimate_ser_opts(&point_config, detector, n_trials, seed, opts) {
                Ok(estimate) => result.points.push(SweepPoint {
                    axis: spec.axis,
                    axis_value: value,
                    detector,
                    protocol: point_config.protocol,
                    modulation: point_config.modulation,
                    m: point_config.m,
                    k: point_config.k,
                    snr_db: point_config.snr_db(),
                    alpha: point_config.alpha,
                    rho: point_config.rho,
                    estimate,
                }),
                Err(e) => result.failures.push(SweepFailure {
                    axis_value: value,
                    detector,
                    message: e.to_string(),
                }),
            }
        }
    }
    Ok(result)
}

pub const CSV_HEADER: [&str; 15] = [
    "axis_name",
    "axis_value",
    "detector",
    "protocol",
    "modulation",
    "M",
    "K",
    "snr_db",
    "alpha",
    "rho",
    "trials",
    "errors",
    "ser",
    "ci_halfwidth",
    "seed",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write `result` as CSV (one row per point) to `out`.
pub fn write_results<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        source: e.into(),
    };
    w.write_record(CSV_HEADER).map_err(io)?;
    for p in &result.points {
        let e = &p.estimate;
        w.write_record([
            p.axis.tag().to_string(),
            p.axis_value.to_string(),
            p.detector.tag().to_string(),
            p.protocol.to_string(),
            p.modulation.to_string(),
            p.m.to_string(),
            p.k.to_string(),
            p.snr_db.to_string(),
            opt(p.alpha),
            opt(p.rho),
            e.trials.to_string(),
            e.errors.to_string(),
            e.ser.to_string(),
            e.ci_halfwidth.to_string(),
            e.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })
}

/// CSV text of `result`.
pub fn results_to_csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_results(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Save `result` to `path`; parent directories must exist.
pub fn persist_results(result: &SweepResult, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut out = std::io::BufWriter::new(file);
    write_results(result, &mut out).map_err(|e| match e {
        Error::Io { source, .. } => io(source),
        other => other,
    })?;
    out.flush().map_err(io)
}

/// Parse CSV text produced by [`write_results`]. `origin` labels errors.
pub fn parse_results(text: &str, origin: &str) -> Result<SweepResult> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut result = SweepResult::default();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx as u64 + 1;
        let perr = |msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        if idx == 0 {
            if rec.iter().ne(CSV_HEADER.iter().copied()) {
                return Err(perr(format!("expected header `{}`", CSV_HEADER.join(","))));
            }
            continue;
        }
        if rec.len() != CSV_HEADER.len() {
            return Err(perr(format!(
                "expected {} fields, got {}",
                CSV_HEADER.len(),
                rec.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| perr(format!("{}: bad number `{}`", CSV_HEADER[i], &rec[i])))
        };
        let int = |i: usize| -> Result<u64> {
            rec[i]
                .parse::<u64>()
                .map_err(|_| perr(format!("{}: bad integer `{}`", CSV_HEADER[i], &rec[i])))
        };
        let opt_num = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let with_line = |e: Error| perr(e.to_string());
        let trials = int(10)?;
        let errors = int(11)?;
        if errors > trials {
            return Err(perr(format!("errors {errors} exceed trials {trials}")));
        }
        let estimate = SerEstimate {
            trials,
            errors,
            ser: num(12)?,
            ci_halfwidth: num(13)?,
            seed: int(14)?,
            wallclock: 0.0,
        };
        result.points.push(SweepPoint {
            axis: rec[0].parse().map_err(with_line)?,
            axis_value: num(1)?,
            detector: rec[2].parse().map_err(with_line)?,
            protocol: rec[3].parse().map_err(with_line)?,
            modulation: rec[4].parse().map_err(with_line)?,
            m: int(5)? as usize,
            k: int(6)? as usize,
            snr_db: num(7)?,
            alpha: opt_num(8)?,
            rho: opt_num(9)?,
            estimate,
        });
    }
    Ok(result)
}

/// Load a CSV written by [`persist_results`].
pub fn load_results(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_results(&text, &path.display().to_string())
}
