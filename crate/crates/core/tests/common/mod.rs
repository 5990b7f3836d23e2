//! Brute-force likelihood oracle shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use ncswipt::channel::{LinkParams, Modulation, ReceivedBlock};
use ncswipt::distributions::{ln_pdf_product_dpsk, ln_pdf_product_fsk, ProductModelParams};
use ncswipt::transition::TransitionTable;
use num_complex::Complex64;

/// `ln f(y)` for `y ~ CN(0, C)` with an explicit 2x2 Hermitian `C`.
fn ln_gauss2(y: [Complex64; 2], c11: f64, c22: f64, c12: Complex64) -> f64 {
    let det = c11 * c22 - c12.norm_sqr();
    // C^{-1} = [[c22, -c12], [-c21, c11]] / det, with c21 = conj(c12)
    let q = (c22 * y[0].norm_sqr() + c11 * y[1].norm_sqr()
        - 2.0 * (y[0].conj() * c12 * y[1]).re)
        / det;
    -q - (PI * PI * det).ln()
}

/// `ln f(y_0d | m)` from the Gaussian law of the direct link.
pub fn ln_direct(block: &ReceivedBlock, params: &LinkParams, m: usize) -> f64 {
    let s2 = params.sigma_0d_sq;
    let g = params.gamma_0d;
    match block.modulation {
        Modulation::Dpsk => {
            let theta = 2.0 * PI * m as f64 / block.alphabet as f64;
            // C = s2 (g s s^H + I), s = [1, e^{j theta}], so C12 = s2 g e^{-j theta}
            let c12 = Complex64::from_polar(s2 * g, -theta);
            ln_gauss2([block.y_0d[0], block.y_0d[1]], s2 * (1.0 + g), s2 * (1.0 + g), c12)
        }
        Modulation::Fsk => block
            .y_0d
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let v = if i == m { s2 * (1.0 + g) } else { s2 };
                -y.norm_sqr() / v - (PI * v).ln()
            })
            .sum(),
    }
}

/// `ln f(y_rd | m_r)` through the Gaussian-product densities.
pub fn ln_relay(block: &ReceivedBlock, params: &LinkParams, r: usize, m_r: usize) -> f64 {
    let s2 = params.sigma_rd_sq[r];
    let omega1 = s2 * params.gamma_rd[r];
    let y = &block.y_rd[r];
    if omega1 == 0.0 {
        return y.iter().map(|v| -v.norm_sqr() / s2 - (PI * s2).ln()).sum();
    }
    match block.modulation {
        Modulation::Dpsk => {
            let theta = 2.0 * PI * m_r as f64 / block.alphabet as f64;
            let p = ProductModelParams::dpsk(s2, omega1, 1.0, Complex64::from_polar(1.0, theta)).unwrap();
            ln_pdf_product_dpsk([y[0], y[1]], &p).unwrap()
        }
        Modulation::Fsk => {
            let p = ProductModelParams::fsk(s2, omega1, 1.0, m_r + 1, block.alphabet).unwrap();
            ln_pdf_product_fsk(y, &p).unwrap()
        }
    }
}

/// Full log-likelihood of every candidate message.
pub fn oracle_log_likelihoods(
    block: &ReceivedBlock,
    params: &LinkParams,
    tables: &[TransitionTable],
) -> Vec<f64> {
    let m = block.alphabet;
    (0..m)
        .map(|cand| {
            let mut total = ln_direct(block, params, cand);
            for (r, table) in tables.iter().enumerate() {
                let terms: Vec<f64> = (0..m)
                    .map(|m_r| table.prob(cand, m_r).ln() + ln_relay(block, params, r, m_r))
                    .collect();
                let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                total += top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
            }
            total
        })
        .collect()
}

/// Index of the maximum and the gap to the runner-up.
pub fn best_and_gap(values: &[f64]) -> (usize, f64) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    (idx[0], values[idx[0]] - values[idx[1]])
}
