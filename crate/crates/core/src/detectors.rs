//! Maximum-likelihood detectors at the relays and at the destination.
//!
//! Destination metrics are evaluated in the log domain. Each relay branch
//! contributes `ln sum_q Pr(q | m) e^{-beta_minus(q)} I(eps, beta_plus(q))`,
//! with `eps = 2 gamma_rd` for DPSK and `gamma_rd` for FSK.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::channel::{LinkParams, Modulation, ReceivedBlock};
use crate::error::{Error, Result};
use crate::specfun::{ln_i_approx2_at, ln_i_exact_at};
use crate::transition::{TransitionSource, TransitionTable, LOG_FLOOR};

/// Relative tolerance of the exact `I` evaluations inside the exact detectors.
pub const EXACT_DETECTOR_REL_TOL: f64 = 1e-9;

/// `e^{j 2 pi m / M}`, exact at the four quadrant points.
pub fn unit_phasor(m: usize, alphabet: usize) -> Complex64 {
    let m = m % alphabet;
    if (4 * m).is_multiple_of(alphabet) {
        match 4 * m / alphabet {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, TAU * m as f64 / alphabet as f64)
    }
}

/// Index of the largest value; ties go to the smallest index.
fn argmax(values: &[f64]) -> Result<usize> {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            return Err(Error::Domain {
                what: "decision metric",
                value: v,
            });
        }
        if v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// `ln sum_i e^{x_i}`, shifted by the maximum.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    max + terms.iter().map(|&t| (t - max).exp()).sum::<f64>().ln()
}

/// Relay DPSK decision: `argmax_m Re{y*(l) y(l-1) e^{j 2 pi m / M}}` on `[y(l-1), y(l)]`.
pub fn relay_detect_dpsk(y: [Complex64; 2], alphabet: usize) -> usize {
    let z = y[1].conj() * y[0];
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for m in 0..alphabet {
        let v = (z * unit_phasor(m, alphabet)).re;
        if v > best_val {
            best = m;
            best_val = v;
        }
    }
    best
}

/// Relay FSK decision: the subband with the most energy.
pub fn relay_detect_fsk(y: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (m, v) in y.iter().map(|v| v.norm_sqr()).enumerate() {
        if v > best_val {
            best = m;
            best_val = v;
        }
    }
    best
}

/// Per-block decision statistics.
///
/// For DPSK, `beta0[m]` is `Re{y0d(l-1) y0d*(l) e^{j2pi m/M}} / sigma_0d^2`, and
/// `beta_plus[r][q]`, `beta_minus[r][q]` are
/// `|y_rd(l) +- y_rd(l-1) e^{j2pi q/M}|^2 / (2 sigma_rd^2)`.
///
/// For FSK, `beta0[m] = |y0d(m+1)|^2 / sigma_0d^2`, `beta_plus[r][q]` is
/// `|y_rd(q+1)|^2 / sigma_rd^2` and `beta_minus[r][q]` is the energy in the other
/// subbands, `(||y_rd||^2 - |y_rd(q+1)|^2) / sigma_rd^2`.
///
/// In both cases `beta_plus + beta_minus = ||y_rd||^2 / sigma_rd^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionStatistics {
    pub modulation: Modulation,
    pub beta0: Vec<f64>,
    pub beta_plus: Vec<Vec<f64>>,
    pub beta_minus: Vec<Vec<f64>>,
}

impl DecisionStatistics {
    pub fn from_block(block: &ReceivedBlock, params: &LinkParams) -> Result<Self> {
        check_block(block, params)?;
        match block.modulation {
            Modulation::Dpsk => Ok(Self::dpsk(block, params)),
            Modulation::Fsk => Ok(Self::fsk(block, params)),
        }
    }

    fn dpsk(block: &ReceivedBlock, params: &LinkParams) -> Self {
        let alphabet = block.alphabet;
        let phasors: Vec<Complex64> = (0..alphabet).map(|m| unit_phasor(m, alphabet)).collect();
        let z0 = block.y_0d[0] * block.y_0d[1].conj();
        let beta0 = phasors
            .iter()
            .map(|&p| (z0 * p).re / params.sigma_0d_sq)
            .collect();
        let mut beta_plus = Vec::with_capacity(block.y_rd.len());
        let mut beta_minus = Vec::with_capacity(block.y_rd.len());
        for (y, &s2) in block.y_rd.iter().zip(&params.sigma_rd_sq) {
            let (plus, minus) = phasors
                .iter()
                .map(|&p| {
                    let rot = y[0] * p;
                    ((y[1] + rot).norm_sqr() / (2.0 * s2), (y[1] - rot).norm_sqr() / (2.0 * s2))
                })
                .unzip();
            beta_plus.push(plus);
            beta_minus.push(minus);
        }
        DecisionStatistics {
            modulation: Modulation::Dpsk,
            beta0,
            beta_plus,
            beta_minus,
        }
    }

    fn fsk(block: &ReceivedBlock, params: &LinkParams) -> Self {
        let beta0 = block
            .y_0d
            .iter()
            .map(|v| v.norm_sqr() / params.sigma_0d_sq)
            .collect();
        let mut beta_plus = Vec::with_capacity(block.y_rd.len());
        let mut beta_minus = Vec::with_capacity(block.y_rd.len());
        for (y, &s2) in block.y_rd.iter().zip(&params.sigma_rd_sq) {
            let energy: Vec<f64> = y.iter().map(|v| v.norm_sqr() / s2).collect();
            let total: f64 = energy.iter().sum();
            beta_minus.push(energy.iter().map(|e| (total - e).max(0.0)).collect());
            beta_plus.push(energy);
        }
        DecisionStatistics {
            modulation: Modulation::Fsk,
            beta0,
            beta_plus,
            beta_minus,
        }
    }

    /// Weight of the direct-link term.
    fn direct_weight(&self, gamma_0d: f64) -> f64 {
        match self.modulation {
            Modulation::Dpsk => 2.0 * gamma_0d / (1.0 + 2.0 * gamma_0d),
            Modulation::Fsk => gamma_0d / (1.0 + gamma_0d),
        }
    }

    /// First argument of `I` on relay branch `r`.
    fn relay_eps(&self, gamma_rd: f64) -> f64 {
        match self.modulation {
            Modulation::Dpsk => 2.0 * gamma_rd,
            Modulation::Fsk => gamma_rd,
        }
    }

    /// `-beta_minus(q) + ln I(eps, beta_plus(q))` for every `q` on branch `r`.
    fn branch_terms<F>(&self, r: usize, gamma_rd: f64, ln_i: &F) -> Result<Vec<f64>>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        let eps = self.relay_eps(gamma_rd);
        self.beta_plus[r]
            .iter()
            .zip(&self.beta_minus[r])
            .map(|(&bp, &bm)| Ok(ln_i(eps, bp)? - bm))
            .collect()
    }
}

fn check_block(block: &ReceivedBlock, params: &LinkParams) -> Result<()> {
    let alphabet = block.alphabet;
    if alphabet < 2 {
        return Err(Error::Range {
            what: "M",
            value: alphabet as f64,
            range: ">= 2",
        });
    }
    let k = params.relays();
    if block.y_rd.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: block.y_rd.len(),
        });
    }
    let len = match block.modulation {
        Modulation::Dpsk => 2,
        Modulation::Fsk => alphabet,
    };
    for y in std::iter::once(&block.y_0d).chain(&block.y_rd) {
        if y.len() != len {
            return Err(Error::Dimension {
                expected: len,
                got: y.len(),
            });
        }
    }
    Ok(())
}

fn check_tables<T: AsRef<TransitionTable>>(
    tables: &[T],
    k: usize,
    alphabet: usize,
    allowed: &[TransitionSource],
) -> Result<()> {
    if tables.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: tables.len(),
        });
    }
    for t in tables {
        let t = t.as_ref();
        if t.alphabet_size() != alphabet {
            return Err(Error::Dimension {
                expected: alphabet,
                got: t.alphabet_size(),
            });
        }
        if !allowed.contains(&t.source()) {
            return Err(Error::invalid(format!(
                "transition table source `{}` does not fit this detector",
                t.source()
            )));
        }
    }
    Ok(())
}

fn expect_modulation(block: &ReceivedBlock, want: Modulation) -> Result<()> {
    if block.modulation == want {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "detector expects a {want} block, got {}",
            block.modulation
        )))
    }
}

/// Full-table metric: `w beta0(m) + sum_r ln sum_q Pr_r(q|m) e^{-beta_minus} I(.)`.
fn table_metrics<T, F>(
    stats: &DecisionStatistics,
    params: &LinkParams,
    tables: &[T],
    ln_i: F,
) -> Result<Vec<f64>>
where
    T: AsRef<TransitionTable>,
    F: Fn(f64, f64) -> Result<f64>,
{
    let alphabet = stats.beta0.len();
    let w = stats.direct_weight(params.gamma_0d);
    let mut metrics: Vec<f64> = stats.beta0.iter().map(|b| w * b).collect();
    for (r, table) in tables.iter().enumerate() {
        let table = table.as_ref();
        let terms = stats.branch_terms(r, params.gamma_rd[r], &ln_i)?;
        for (m, metric) in metrics.iter_mut().enumerate() {
            *metric += log_sum_exp((0..alphabet).map(|q| table.ln_prob(m, q) + terms[q]));
        }
    }
    Ok(metrics)
}

/// Per-message metrics of the exact DPSK detector.
pub fn dpsk_exact_metrics<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
    rel_tol: f64,
) -> Result<Vec<f64>> {
    expect_modulation(block, Modulation::Dpsk)?;
    check_tables(tables, params.relays(), block.alphabet, &[TransitionSource::DpskExact])?;
    let stats = DecisionStatistics::from_block(block, params)?;
    table_metrics(&stats, params, tables, |e, b| ln_i_exact_at(e, b, rel_tol))
}

/// Exact destination MLD for DPSK with exact transition tables.
pub fn dest_detect_dpsk_exact<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
) -> Result<usize> {
    dest_detect_dpsk_exact_with_tol(block, params, tables, EXACT_DETECTOR_REL_TOL)
}

/// [`dest_detect_dpsk_exact`] with an explicit quadrature tolerance.
pub fn dest_detect_dpsk_exact_with_tol<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
    rel_tol: f64,
) -> Result<usize> {
    argmax(&dpsk_exact_metrics(block, params, tables, rel_tol)?)
}

/// Per-message metrics of the approximate DPSK detector.
///
/// Relay branches keep only the correct decision and its nearest neighbours,
/// weighted by the relay SER `eps_p = 1 - P_0`; neighbours wrap modulo `M`.
pub fn dpsk_approx_metrics<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
) -> Result<Vec<f64>> {
    expect_modulation(block, Modulation::Dpsk)?;
    let alphabet = block.alphabet;
    check_tables(tables, params.relays(), alphabet, &[TransitionSource::DpskApprox])?;
    let stats = DecisionStatistics::from_block(block, params)?;
    let w = stats.direct_weight(params.gamma_0d);
    let mut metrics: Vec<f64> = stats.beta0.iter().map(|b| w * b).collect();
    for (r, table) in tables.iter().enumerate() {
        let ser = 1.0 - table.as_ref().offset_prob(0);
        let ln_keep = (1.0 - ser).max(LOG_FLOOR).ln();
        let terms = stats.branch_terms(r, params.gamma_rd[r], &ln_i_approx2_at)?;
        for (m, metric) in metrics.iter_mut().enumerate() {
            let up = (m + 1) % alphabet;
            *metric += if alphabet == 2 {
                log_sum_exp([ln_keep + terms[m], ser.max(LOG_FLOOR).ln() + terms[up]])
            } else {
                let down = (m + alphabet - 1) % alphabet;
                let ln_half = (0.5 * ser).max(LOG_FLOOR).ln();
                log_sum_exp([
                    ln_keep + terms[m],
                    ln_half + terms[up],
                    ln_half + terms[down],
                ])
            };
        }
    }
    Ok(metrics)
}

/// Approximate destination MLD for DPSK: `I_2` and nearest-neighbour relay errors.
pub fn dest_detect_dpsk_approx<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
) -> Result<usize> {
    argmax(&dpsk_approx_metrics(block, params, tables)?)
}

fn fsk_metrics<T, F>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
    ln_i: F,
) -> Result<Vec<f64>>
where
    T: AsRef<TransitionTable>,
    F: Fn(f64, f64) -> Result<f64>,
{
    expect_modulation(block, Modulation::Fsk)?;
    check_tables(tables, params.relays(), block.alphabet, &[TransitionSource::Fsk])?;
    let stats = DecisionStatistics::from_block(block, params)?;
    table_metrics(&stats, params, tables, ln_i)
}

/// Per-message metrics of the exact FSK detector.
pub fn fsk_exact_metrics<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
    rel_tol: f64,
) -> Result<Vec<f64>> {
    fsk_metrics(block, params, tables, |e, b| ln_i_exact_at(e, b, rel_tol))
}

/// Per-message metrics of the approximate FSK detector.
pub fn fsk_approx_metrics<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
) -> Result<Vec<f64>> {
    fsk_metrics(block, params, tables, ln_i_approx2_at)
}

/// Exact destination MLD for FSK.
pub fn dest_detect_fsk_exact<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
) -> Result<usize> {
    dest_detect_fsk_exact_with_tol(block, params, tables, EXACT_DETECTOR_REL_TOL)
}

/// [`dest_detect_fsk_exact`] with an explicit quadrature tolerance.
pub fn dest_detect_fsk_exact_with_tol<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
    rel_tol: f64,
) -> Result<usize> {
    argmax(&fsk_exact_metrics(block, params, tables, rel_tol)?)
}

/// Approximate destination MLD for FSK (`I_2` in place of `I`).
pub fn dest_detect_fsk_approx<T: AsRef<TransitionTable>>(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[T],
) -> Result<usize> {
    argmax(&fsk_approx_metrics(block, params, tables)?)
}

/// Direct-link-only decision, the limit of every destination detector as `gamma_rd -> 0`.
pub fn direct_detect(block: &ReceivedBlock, params: &LinkParams) -> Result<usize> {
    let stats = DecisionStatistics::from_block(block, params)?;
    argmax(&stats.beta0)
}
