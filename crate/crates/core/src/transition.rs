//! Relay decision transition probabilities `Pr(m_r | m)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::distributions::{phase_pdf, PhaseModelParams};
use crate::error::{Error, Result};
use crate::specfun::quadrature::{integrate, Tolerance};

/// Smallest probability used when a table entry enters a logarithm.
pub const LOG_FLOOR: f64 = 1e-300;

/// Quadrature tolerance used for cached exact DPSK tables.
pub const CACHED_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionSource {
    DpskExact,
    DpskApprox,
    Fsk,
}

impl TransitionSource {
    pub fn tag(self) -> &'static str {
        match self {
            TransitionSource::DpskExact => "dpsk_exact",
            TransitionSource::DpskApprox => "dpsk_approx",
            TransitionSource::Fsk => "fsk",
        }
    }
}

impl fmt::Display for TransitionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for TransitionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dpsk_exact" => Ok(TransitionSource::DpskExact),
            "dpsk_approx" => Ok(TransitionSource::DpskApprox),
            "fsk" => Ok(TransitionSource::Fsk),
            other => Err(Error::invalid(format!("unknown transition source `{other}`"))),
        }
    }
}

/// An `M x M` circulant table with `probs[m][m_r] = Pr(m_r | m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    m: usize,
    gamma: f64,
    offsets: Vec<f64>,
    source: TransitionSource,
}

impl AsRef<TransitionTable> for TransitionTable {
    fn as_ref(&self) -> &TransitionTable {
        self
    }
}

impl TransitionTable {
    /// Table whose row `m` is `offsets` rotated by `m`.
    fn circulant(gamma: f64, offsets: Vec<f64>, source: TransitionSource) -> Self {
        TransitionTable {
            m: offsets.len(),
            gamma,
            offsets,
            source,
        }
    }

    /// Alphabet size `M`.
    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    /// Relay link SNR the table was built for.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn source(&self) -> TransitionSource {
        self.source
    }

    /// `Pr(m_r | m)`.
    pub fn prob(&self, m: usize, m_r: usize) -> f64 {
        self.offsets[(m_r + self.m - m % self.m) % self.m]
    }

    /// `P_n`: probability that the relay decision is offset by `n` (mod `M`).
    pub fn offset_prob(&self, n: usize) -> f64 {
        self.offsets[n % self.m]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `ln Pr(m_r | m)` with entries floored at [`LOG_FLOOR`].
    pub fn ln_prob(&self, m: usize, m_r: usize) -> f64 {
        self.prob(m, m_r).max(LOG_FLOOR).ln()
    }

    /// Row `m` as an owned vector.
    pub fn row(&self, m: usize) -> Vec<f64> {
        (0..self.m).map(|r| self.prob(m, r)).collect()
    }

    /// All rows.
    pub fn probs(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|m| self.row(m)).collect()
    }

    /// CSV with a header line `gamma=<g>,M=<M>,source=<tag>` and `M` rows of `M` values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let header = [
            format!("gamma={}", self.gamma),
            format!("M={}", self.m),
            format!("source={}", self.source),
        ];
        w.write_record(&header).map_err(csv_err)?;
        for m in 0..self.m {
            w.write_record(self.row(m).iter().map(|p| p.to_string()))
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<writer>".into(),
            source: e,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.write_csv(file)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "gamma",
            value: gamma,
        })
    }
}

fn check_dpsk_order(m: usize) -> Result<()> {
    if m >= 2 && m.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Range {
            what: "DPSK alphabet size M",
            value: m as f64,
            range: "powers of two >= 2",
        })
    }
}

fn check_fsk_order(m: usize) -> Result<()> {
    if m >= 2 {
        Ok(())
    } else {
        Err(Error::Range {
            what: "FSK alphabet size M",
            value: m as f64,
            range: ">= 2",
        })
    }
}

/// Exact DPSK table: `P_n` is the phase-difference density integrated over the
/// decision sector centred on `2 pi n / M`.
pub fn dpsk_transition_exact(gamma: f64, m: usize, rel_tol: f64) -> Result<TransitionTable> {
    check_gamma(gamma)?;
    check_dpsk_order(m)?;
    if gamma == 0.0 {
        // the phase difference is uniform
        return Ok(TransitionTable::circulant(0.0, vec![1.0 / m as f64; m], TransitionSource::DpskExact));
    }
    let phase = PhaseModelParams::new(gamma, Complex64::new(1.0, 0.0))?;
    let width = PI / m as f64;
    let mut offsets = vec![0.0; m];
    for n in 0..=m / 2 {
        let centre = 2.0 * n as f64 * width;
        // the density peaks at 0; the n = 0 sector is integrated on one side
        let tol = Tolerance::relative(rel_tol);
        let f = |t: f64| phase_pdf(t, &phase);
        let p = if n == 0 {
            2.0 * integrate(f, 0.0, width, tol)?.value
        } else {
            integrate(f, centre - width, centre + width, tol)?.value
        };
        offsets[n] = p;
        offsets[(m - n) % m] = p;
    }
    Ok(TransitionTable::circulant(gamma, offsets, TransitionSource::DpskExact))
}

/// Relay SER of M-DPSK used by the approximate table: `1/(2(1+gamma))` for
/// `M = 2`, otherwise the scaled bound
/// `1.03 sqrt((1+cos(pi/M)) / (2 cos(pi/M))) (1 - sqrt(q gamma / (1 + q gamma)))`
/// with `q = 1 - cos(pi/M)`.
pub fn dpsk_relay_ser(gamma: f64, m: usize) -> Result<f64> {
    check_gamma(gamma)?;
    check_dpsk_order(m)?;
    if m == 2 {
        return Ok(0.5 / (1.0 + gamma));
    }
    let c = (PI / m as f64).cos();
    let q = 1.0 - c;
    let qg = q * gamma;
    Ok(1.03 * ((1.0 + c) / (2.0 * c)).sqrt() * (1.0 - (qg / (1.0 + qg)).sqrt()))
}

/// Approximate DPSK table: `1 - eps_p` on the diagonal, `eps_p / 2` on each
/// nearest neighbour (mod `M`), zero elsewhere. For `M = 2` the single
/// neighbour carries all of `eps_p`.
///
/// The `M >= 4` SER is an upper bound that exceeds one near `gamma = 0`; it is
/// capped at one there so the table stays stochastic.
pub fn dpsk_transition_approx(gamma: f64, m: usize) -> Result<TransitionTable> {
    let ser = dpsk_relay_ser(gamma, m)?.min(1.0);
    let mut offsets = vec![0.0; m];
    offsets[0] = 1.0 - ser;
    if m == 2 {
        offsets[1] = ser;
    } else {
        offsets[1] = 0.5 * ser;
        offsets[m - 1] = 0.5 * ser;
    }
    Ok(TransitionTable::circulant(gamma, offsets, TransitionSource::DpskApprox))
}

/// Relay SER of noncoherent M-FSK in Rayleigh fading,
/// `sum_{m=1}^{M-1} (-1)^{m+1} C(M-1, m) / (1 + m(1+gamma))`.
///
/// Evaluated as `1 - prod_{k=1}^{M-1} k / (k + 1/(1+gamma))`, which is the
/// same quantity without the alternating-sum cancellation.
pub fn fsk_relay_ser(gamma: f64, m: usize) -> Result<f64> {
    check_gamma(gamma)?;
    check_fsk_order(m)?;
    let x = 1.0 / (1.0 + gamma);
    let ln_keep: f64 = (1..m).map(|k| (-x / (k as f64 + x)).ln_1p()).sum();
    Ok(-ln_keep.exp_m1())
}

/// FSK table: `1 - eps_f` on the diagonal and `eps_f / (M-1)` elsewhere.
pub fn fsk_transition(gamma: f64, m: usize) -> Result<TransitionTable> {
    let ser = fsk_relay_ser(gamma, m)?;
    let mut offsets = vec![ser / (m - 1) as f64; m];
    offsets[0] = 1.0 - ser;
    Ok(TransitionTable::circulant(gamma, offsets, TransitionSource::Fsk))
}

type CacheKey = (TransitionSource, usize, u64);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<TransitionTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<TransitionTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared table for `(source, M, gamma)`, with `gamma` rounded to 1e-9.
///
/// Exact DPSK tables are computed at [`CACHED_REL_TOL`].
pub fn cached_table(source: TransitionSource, gamma: f64, m: usize) -> Result<Arc<TransitionTable>> {
    check_gamma(gamma)?;
    let key = (source, m, (gamma * 1e9).round().to_bits());
    if let Some(t) = cache().read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(match source {
        TransitionSource::DpskExact => dpsk_transition_exact(gamma, m, CACHED_REL_TOL)?,
        TransitionSource::DpskApprox => dpsk_transition_approx(gamma, m)?,
        TransitionSource::Fsk => fsk_transition(gamma, m)?,
    });
    let mut w = cache().write().expect("cache lock");
    Ok(Arc::clone(w.entry(key).or_insert(table)))
}
