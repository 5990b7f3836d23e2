//! Named experiment setups and the `I` versus `I_2` accuracy grid.

use std::io::Write;

use crate::channel::{Modulation, Protocol, ScenarioConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{sweep, write_results, Axis, DetectorKind, RunOptions, SweepResult, SweepSpec};
use crate::specfun::{ln_integral_i_approx2, ln_integral_i_exact, IntegralArgs};

/// Tolerance of the reference `I` on the accuracy grid.
pub const GRID_ORACLE_TOL: f64 = 1e-12;

/// One cell of the accuracy grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub eps_db: f64,
    pub beta_db: f64,
    pub i_exact: f64,
    pub i_approx2: f64,
    pub rel_err: f64,
}

/// `I` and `I_2` over integer dB grids `eps_db x beta_db`.
pub fn specfun_grid(eps_db: (i32, i32), beta_db: (i32, i32), oracle_tol: f64) -> Result<Vec<GridRow>> {
    let mut rows = Vec::new();
    for e in eps_db.0..=eps_db.1 {
        for b in beta_db.0..=beta_db.1 {
            let eps = 10f64.powf(e as f64 / 10.0);
            let beta = 10f64.powf(b as f64 / 10.0);
            let args = IntegralArgs::new(eps, beta)?;
            let ln_exact = ln_integral_i_exact(args, oracle_tol)?;
            let ln_approx2 = ln_integral_i_approx2(args);
            rows.push(GridRow {
                eps_db: e as f64,
                beta_db: b as f64,
                i_exact: ln_exact.exp(),
                i_approx2: ln_approx2.exp(),
                rel_err: (ln_approx2 - ln_exact).exp_m1().abs(),
            });
        }
    }
    Ok(rows)
}

/// The accuracy grid used for the figure: `eps` in [-10, 20] dB, `beta` in [-50, 50] dB.
pub fn fig2_grid(oracle_tol: f64) -> Result<Vec<GridRow>> {
    specfun_grid((-10, 20), (-50, 50), oracle_tol)
}

/// Largest relative error on a grid, with its location.
pub fn max_rel_err(rows: &[GridRow]) -> Option<GridRow> {
    rows.iter()
        .copied()
        .max_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
}

pub fn write_grid_csv<W: Write>(rows: &[GridRow], mut out: W) -> Result<()> {
    let io = |source| Error::Io {
        path: "<grid>".into(),
        source,
    };
    writeln!(out, "eps_db,beta_db,i_exact,i_approx2,rel_err").map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:e},{:e},{:e}",
            r.eps_db, r.beta_db, r.i_exact, r.i_approx2, r.rel_err
        )
        .map_err(io)?;
    }
    Ok(())
}

/// One sweep of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub config: ScenarioConfig,
    pub spec: SweepSpec,
    pub detectors: Vec<DetectorKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresetKind {
    /// The `I` accuracy grid.
    SpecfunGrid,
    Sweeps(Vec<PresetRun>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub kind: PresetKind,
}

pub const PRESET_NAMES: [&str; 9] = [
    "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5-m2", "fig5-m4", "fig5-m8", "fig5-m16",
];

fn snr_axis(from: f64, to: f64) -> SweepSpec {
    SweepSpec::range(Axis::SnrDb, from, to, 2.0).expect("static grid")
}

fn split_axis(axis: Axis) -> SweepSpec {
    SweepSpec::range(axis, 0.05, 0.95, 0.05).expect("static grid")
}

fn scenario(
    protocol: Protocol,
    modulation: Modulation,
    m: usize,
    split: f64,
    d0r: &[f64],
    snr_db: f64,
    rate: f64,
) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(protocol, modulation, m, split, d0r.to_vec(), snr_db);
    c.rate_r = rate;
    c
}

#[allow(clippy::too_many_arguments)]
fn both_modulations(
    protocol: Protocol,
    m: usize,
    split: f64,
    d0r: &[f64],
    snr_db: f64,
    rate: f64,
    spec: &SweepSpec,
    detectors: &[DetectorKind],
) -> Vec<PresetRun> {
    [Modulation::Dpsk, Modulation::Fsk]
        .into_iter()
        .map(|modulation| PresetRun {
            config: scenario(protocol, modulation, m, split, d0r, snr_db, rate),
            spec: spec.clone(),
            detectors: detectors.to_vec(),
        })
        .collect()
}

fn tradeoff(m: usize, snr_db: f64, rate: f64) -> Vec<PresetRun> {
    let approx = [DetectorKind::Approx];
    let mut runs = both_modulations(Protocol::Ts, m, 0.5, &[1.5], snr_db, rate, &split_axis(Axis::Alpha), &approx);
    runs.extend(both_modulations(Protocol::Ps, m, 0.5, &[1.5], snr_db, rate, &split_axis(Axis::Rho), &approx));
    runs
}

fn order_study(m: usize) -> Vec<PresetRun> {
    let approx = [DetectorKind::Approx];
    let rate = (m as f64).log2();
    let spec = snr_axis(10.0, 50.0);
    let mut runs = both_modulations(Protocol::Ps, m, 0.8, &[1.5], 30.0, rate, &spec, &approx);
    runs.extend(both_modulations(Protocol::Ts, m, 0.4, &[1.5], 30.0, rate, &spec, &approx));
    runs
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    let exact_approx = [DetectorKind::Exact, DetectorKind::Approx];
    let (summary, kind) = match name {
        "fig2" => (
            "I_2 vs exact I over eps in [-10, 20] dB, beta in [-50, 50] dB",
            PresetKind::SpecfunGrid,
        ),
        "fig3a" => (
            "exact vs approximate MLD, TS alpha=0.5, K=1, D0r=1.5, M=2, R=1, SNR 0..40 dB",
            PresetKind::Sweeps(both_modulations(
                Protocol::Ts,
                2,
                0.5,
                &[1.5],
                30.0,
                1.0,
                &snr_axis(0.0, 40.0),
                &exact_approx,
            )),
        ),
        "fig3b" => (
            "exact vs approximate MLD, PS rho=0.5, K=2, D01=1, D02=2, M=2, R=1, SNR 0..40 dB",
            PresetKind::Sweeps(both_modulations(
                Protocol::Ps,
                2,
                0.5,
                &[1.0, 2.0],
                30.0,
                1.0,
                &snr_axis(0.0, 40.0),
                &exact_approx,
            )),
        ),
        "fig4a" => (
            "SER vs alpha (TS) and rho (PS), K=1, D0r=1.5, M=2, R=1, SNR 30 dB",
            PresetKind::Sweeps(tradeoff(2, 30.0, 1.0)),
        ),
        "fig4b" => (
            "SER vs alpha (TS) and rho (PS), K=1, D0r=1.5, M=8, R=3, SNR 40 dB",
            PresetKind::Sweeps(tradeoff(8, 40.0, 3.0)),
        ),
        "fig5-m2" | "fig5-m4" | "fig5-m8" | "fig5-m16" => {
            let m: usize = name["fig5-m".len()..].parse().expect("preset name");
            let summary = match m {
                2 => "DPSK vs FSK, PS rho=0.8 and TS alpha=0.4, K=1, D0r=1.5, M=2, R=1",
                4 => "DPSK vs FSK, PS rho=0.8 and TS alpha=0.4, K=1, D0r=1.5, M=4, R=2",
                8 => "DPSK vs FSK, PS rho=0.8 and TS alpha=0.4, K=1, D0r=1.5, M=8, R=3",
                _ => "DPSK vs FSK, PS rho=0.8 and TS alpha=0.4, K=1, D0r=1.5, M=16, R=4",
            };
            (summary, PresetKind::Sweeps(order_study(m)))
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}` (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let name = PRESET_NAMES
        .iter()
        .copied()
        .find(|n| *n == name)
        .expect("listed preset");
    Ok(Preset { name, summary, kind })
}

/// Run every sweep of `runs` and concatenate the results.
pub fn run_sweeps(runs: &[PresetRun], n_trials: u64, seed: u64, opts: &RunOptions) -> Result<SweepResult> {
    let mut all = SweepResult::default();
    for run in runs {
        let r = sweep(&run.config, &run.spec, &run.detectors, n_trials, seed, opts)?;
        all.points.extend(r.points);
        all.failures.extend(r.failures);
    }
    Ok(all)
}

/// Output of a preset: either grid rows or sweep results.
#[derive(Debug, Clone, PartialEq)]
pub enum PresetOutput {
    Grid(Vec<GridRow>),
    Sweep(SweepResult),
}

impl PresetOutput {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match self {
            PresetOutput::Grid(rows) => write_grid_csv(rows, out),
            PresetOutput::Sweep(r) => write_results(r, out),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Run the named preset. `tol` is the grid oracle tolerance for `fig2`; sweeps
/// take their exact-detector tolerance from `opts`.
pub fn run_preset(name: &str, n_trials: u64, seed: u64, opts: &RunOptions, tol: Option<f64>) -> Result<PresetOutput> {
    match preset(name)?.kind {
        PresetKind::SpecfunGrid => Ok(PresetOutput::Grid(fig2_grid(tol.unwrap_or(GRID_ORACLE_TOL))?)),
        PresetKind::Sweeps(runs) => Ok(PresetOutput::Sweep(run_sweeps(&runs, n_trials, seed, opts)?)),
    }
}
