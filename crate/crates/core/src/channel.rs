//! Scenario description, link budgets and per-block signal generation.
//!
//! Every link follows the unified model
//! `y_ij = sigma_ij (sqrt(gamma_ij) h_ij s + n_ij)` with `n_ij ~ CN(0, I)`,
//! where the second hop additionally carries the first-hop fading magnitude
//! `|h_0r|` through the harvested power.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::detectors::{relay_detect_dpsk, relay_detect_fsk, unit_phasor};
use crate::distributions::{sample_rayleigh_coeff, sample_scaled};
use crate::error::{Error, Result};

pub const DEFAULT_ETA: f64 = 0.6;
pub const DEFAULT_PATHLOSS_EXP: f64 = 2.7;
pub const DEFAULT_D0D: f64 = 3.0;
pub const DEFAULT_NOISE_SPLIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Power splitting: a fraction `rho` of the received power is harvested.
    Ps,
    /// Time switching: a fraction `alpha` of the frame is spent harvesting.
    Ts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Dpsk,
    Fsk,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Ps => "PS",
            Protocol::Ts => "TS",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PS" => Ok(Protocol::Ps),
            "TS" => Ok(Protocol::Ts),
            _ => Err(Error::Config(format!("unknown protocol `{s}` (expected PS or TS)"))),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Dpsk => "DPSK",
            Modulation::Fsk => "FSK",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DPSK" => Ok(Modulation::Dpsk),
            "FSK" => Ok(Modulation::Fsk),
            _ => Err(Error::Config(format!("unknown modulation `{s}` (expected DPSK or FSK)"))),
        }
    }
}

/// Complete description of one relaying experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub modulation: Modulation,
    /// Alphabet size.
    pub m: usize,
    /// Number of relays.
    pub k: usize,
    /// Power-splitting factor (PS only).
    pub rho: Option<f64>,
    /// Time-switching coefficient (TS only).
    pub alpha: Option<f64>,
    /// Energy-harvesting efficiency.
    pub eta: f64,
    /// Source power (W).
    pub p0: f64,
    /// Total noise variance per receiver (W).
    pub sigma0_sq: f64,
    /// Information rate (bit/s).
    pub rate_r: f64,
    /// Source-destination distance (m).
    pub d0d: f64,
    /// Source-relay distances (m); relay `r` sits on the line at `d0r[r]`.
    pub d0r: Vec<f64>,
    pub pathloss_exp: f64,
    /// Fraction of `sigma0_sq` attributed to the antenna; the rest is circuit noise.
    pub noise_split: f64,
}

const KEYS: [&str; 14] = [
    "protocol",
    "modulation",
    "M",
    "K",
    "rho",
    "alpha",
    "eta",
    "P0",
    "sigma0_sq",
    "rate_R",
    "D0d",
    "D0r",
    "pathloss_exp",
    "noise_split",
];

impl ScenarioConfig {
    /// Single-relay scenario with the default geometry and EH constants, unit
    /// noise and `rate_R = log2 M`. `split` is `rho` for PS and `alpha` for TS.
    pub fn new(
        protocol: Protocol,
        modulation: Modulation,
        m: usize,
        split: f64,
        d0r: Vec<f64>,
        snr_db: f64,
    ) -> Self {
        let (rho, alpha) = match protocol {
            Protocol::Ps => (Some(split), None),
            Protocol::Ts => (None, Some(split)),
        };
        ScenarioConfig {
            protocol,
            modulation,
            m,
            k: d0r.len(),
            rho,
            alpha,
            eta: DEFAULT_ETA,
            p0: 10f64.powf(snr_db / 10.0),
            sigma0_sq: 1.0,
            rate_r: (m as f64).log2(),
            d0d: DEFAULT_D0D,
            d0r,
            pathloss_exp: DEFAULT_PATHLOSS_EXP,
            noise_split: DEFAULT_NOISE_SPLIT,
        }
    }

    /// Transmitter SNR `P0 / sigma0^2` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.p0 / self.sigma0_sq).log10()
    }

    /// Set `P0` so that the transmitter SNR equals `snr_db`.
    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.p0 = self.sigma0_sq * 10f64.powf(snr_db / 10.0);
    }

    /// The EH parameter of the active protocol (`rho` or `alpha`).
    pub fn split(&self) -> Option<f64> {
        match self.protocol {
            Protocol::Ps => self.rho,
            Protocol::Ts => self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        match (self.protocol, self.rho, self.alpha) {
            (Protocol::Ps, Some(_), None) | (Protocol::Ts, None, Some(_)) => {}
            (Protocol::Ps, _, _) => return cfg("PS needs `rho` and no `alpha`".into()),
            (Protocol::Ts, _, _) => return cfg("TS needs `alpha` and no `rho`".into()),
        }
        let split = self.split().unwrap_or(f64::NAN);
        if !(split > 0.0 && split < 1.0) {
            return cfg(format!("EH parameter must lie in (0, 1), got {split}"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return cfg(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if self.m < 2 {
            return cfg(format!("M must be at least 2, got {}", self.m));
        }
        if self.modulation == Modulation::Dpsk && !self.m.is_power_of_two() {
            return cfg(format!("DPSK needs M a power of two, got {}", self.m));
        }
        if self.k == 0 || self.d0r.len() != self.k {
            return cfg(format!(
                "K = {} but {} relay distances given",
                self.k,
                self.d0r.len()
            ));
        }
        for (name, v) in [
            ("P0", self.p0),
            ("sigma0_sq", self.sigma0_sq),
            ("rate_R", self.rate_r),
            ("D0d", self.d0d),
            ("pathloss_exp", self.pathloss_exp),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return cfg(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.noise_split >= 0.0 && self.noise_split <= 1.0) {
            return cfg(format!("noise_split must lie in [0, 1], got {}", self.noise_split));
        }
        for (r, &d) in self.d0r.iter().enumerate() {
            if !(d > 0.0 && d < self.d0d) {
                return cfg(format!("D0r[{r}] = {d} must lie in (0, D0d = {})", self.d0d));
            }
        }
        Ok(())
    }

    /// Parse the `key = value` format; `#` starts a comment. `origin` labels errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut fields: std::collections::HashMap<&str, (u64, &str)> = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse {
                path: origin.to_string(),
                line: line_no,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(perr(format!("unknown key `{key}`")));
            }
            if fields.insert(key, (line_no, value.trim())).is_some() {
                return Err(perr(format!("duplicate key `{key}`")));
            }
        }

        let get = |k: &str| fields.get(k).copied();
        let required = |k: &'static str| {
            get(k).ok_or_else(|| Error::Config(format!("{origin}: missing key `{k}`")))
        };
        fn num<T: FromStr>(origin: &str, k: &str, (line, v): (u64, &str)) -> Result<T> {
            v.parse().map_err(|_| Error::Parse {
                path: origin.to_string(),
                line,
                msg: format!("invalid value `{v}` for `{k}`"),
            })
        }
        let with_line = |k: &str, (line, v): (u64, &str), e: Error| match e {
            Error::Config(msg) => Error::Parse {
                path: origin.to_string(),
                line,
                msg: format!("{k}: {msg} (value `{v}`)"),
            },
            other => other,
        };

        let protocol_field = required("protocol")?;
        let protocol: Protocol = protocol_field
            .1
            .parse()
            .map_err(|e| with_line("protocol", protocol_field, e))?;
        let modulation_field = required("modulation")?;
        let modulation: Modulation = modulation_field
            .1
            .parse()
            .map_err(|e| with_line("modulation", modulation_field, e))?;
        let m: usize = num(origin, "M", required("M")?)?;
        let d0r: Vec<f64> = {
            let (line, v) = required("D0r")?;
            v.split(',')
                .map(|s| num(origin, "D0r", (line, s.trim())))
                .collect::<Result<_>>()?
        };
        let k = match get("K") {
            Some(f) => num(origin, "K", f)?,
            None => d0r.len(),
        };
        let opt = |key: &str| -> Result<Option<f64>> {
            get(key).map(|f| num(origin, key, f)).transpose()
        };
        let config = ScenarioConfig {
            protocol,
            modulation,
            m,
            k,
            rho: opt("rho")?,
            alpha: opt("alpha")?,
            eta: opt("eta")?.unwrap_or(DEFAULT_ETA),
            p0: num(origin, "P0", required("P0")?)?,
            sigma0_sq: opt("sigma0_sq")?.unwrap_or(1.0),
            rate_r: opt("rate_R")?.unwrap_or((m as f64).log2()),
            d0d: opt("D0d")?.unwrap_or(DEFAULT_D0D),
            d0r,
            pathloss_exp: opt("pathloss_exp")?.unwrap_or(DEFAULT_PATHLOSS_EXP),
            noise_split: opt("noise_split")?.unwrap_or(DEFAULT_NOISE_SPLIT),
        };
        config.validate().map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{origin}: {msg}")),
            other => other,
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Serialize in the `key = value` format read by [`ScenarioConfig::parse`].
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("protocol", self.protocol.to_string());
        put("modulation", self.modulation.to_string());
        put("M", self.m.to_string());
        put("K", self.k.to_string());
        if let Some(rho) = self.rho {
            put("rho", rho.to_string());
        }
        if let Some(alpha) = self.alpha {
            put("alpha", alpha.to_string());
        }
        put("eta", self.eta.to_string());
        put("P0", self.p0.to_string());
        put("sigma0_sq", self.sigma0_sq.to_string());
        put("rate_R", self.rate_r.to_string());
        put("D0d", self.d0d.to_string());
        put(
            "D0r",
            self.d0r
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        put("pathloss_exp", self.pathloss_exp.to_string());
        put("noise_split", self.noise_split.to_string());
        out
    }
}

/// Bounded path loss `1 / (1 + D^exp)`.
pub fn path_loss(d: f64, exponent: f64) -> Result<f64> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Domain {
            what: "distance",
            value: d,
        });
    }
    Ok(1.0 / (1.0 + d.powf(exponent)))
}

/// Per-link SNRs and noise variances of the unified model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub gamma_0d: f64,
    pub gamma_0r: Vec<f64>,
    /// Second-hop SNR excluding the `|h_0r|^2` factor, which varies per block.
    pub gamma_rd: Vec<f64>,
    pub sigma_0d_sq: f64,
    pub sigma_0r_sq: Vec<f64>,
    pub sigma_rd_sq: Vec<f64>,
    /// Symbol time (s).
    pub ts: f64,
}

impl LinkParams {
    /// Number of relays.
    pub fn relays(&self) -> usize {
        self.gamma_0r.len()
    }

    /// Uniform-noise parameters for `k` identical relays, for experiments that
    /// pin the SNRs directly.
    pub fn uniform(gamma_0d: f64, gamma_0r: f64, gamma_rd: f64, k: usize) -> Self {
        LinkParams {
            gamma_0d,
            gamma_0r: vec![gamma_0r; k],
            gamma_rd: vec![gamma_rd; k],
            sigma_0d_sq: 1.0,
            sigma_0r_sq: vec![1.0; k],
            sigma_rd_sq: vec![1.0; k],
            ts: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.gamma_0r.len();
        for len in [self.gamma_rd.len(), self.sigma_0r_sq.len(), self.sigma_rd_sq.len()] {
            if len != k {
                return Err(Error::Dimension {
                    expected: k,
                    got: len,
                });
            }
        }
        let gammas = std::iter::once(self.gamma_0d)
            .chain(self.gamma_0r.iter().copied())
            .chain(self.gamma_rd.iter().copied());
        for g in gammas {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::Domain {
                    what: "link SNR",
                    value: g,
                });
            }
        }
        let sigmas = std::iter::once(self.sigma_0d_sq)
            .chain(self.sigma_0r_sq.iter().copied())
            .chain(self.sigma_rd_sq.iter().copied());
        for s in sigmas {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain {
                    what: "noise variance",
                    value: s,
                });
            }
        }
        Ok(())
    }
}

/// Link SNRs and noise variances for `config`.
pub fn derive_link_params(config: &ScenarioConfig) -> Result<LinkParams> {
    config.validate()?;
    let k = config.k as f64;
    let log2m = (config.m as f64).log2();
    let s1 = config.noise_split * config.sigma0_sq;
    let s2 = config.sigma0_sq - s1;
    let l0d = path_loss(config.d0d, config.pathloss_exp)?;
    let ts = match config.protocol {
        Protocol::Ps => log2m / ((k + 1.0) * config.rate_r),
        Protocol::Ts => {
            let alpha = config.alpha.unwrap_or_default();
            (1.0 - alpha) * log2m / ((k + 1.0) * config.rate_r)
        }
    };
    let energy = config.p0 * ts;
    let mut params = LinkParams {
        gamma_0d: energy * l0d / config.sigma0_sq,
        gamma_0r: Vec::with_capacity(config.k),
        gamma_rd: Vec::with_capacity(config.k),
        sigma_0d_sq: config.sigma0_sq,
        sigma_0r_sq: Vec::with_capacity(config.k),
        sigma_rd_sq: vec![config.sigma0_sq; config.k],
        ts,
    };
    for &d0r in &config.d0r {
        let l0r = path_loss(d0r, config.pathloss_exp)?;
        let lrd = path_loss(config.d0d - d0r, config.pathloss_exp)?;
        match config.protocol {
            Protocol::Ps => {
                let rho = config.rho.unwrap_or_default();
                let s0r = (1.0 - rho) * s1 + s2;
                params.sigma_0r_sq.push(s0r);
                params.gamma_0r.push((1.0 - rho) * energy * l0r / s0r);
                params
                    .gamma_rd
                    .push(config.eta * rho * energy * l0r * lrd / config.sigma0_sq);
            }
            Protocol::Ts => {
                let alpha = config.alpha.unwrap_or_default();
                params.sigma_0r_sq.push(config.sigma0_sq);
                params.gamma_0r.push(energy * l0r / config.sigma0_sq);
                params.gamma_rd.push(
                    alpha * (k + 1.0) * config.eta * energy * l0r * lrd
                        / ((1.0 - alpha) * config.sigma0_sq),
                );
            }
        }
    }
    Ok(params)
}

/// Fading coefficients of one block, all `CN(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_0d: Complex64,
    pub h_0r: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Self {
        let h_0d = sample_rayleigh_coeff(rng);
        let h_0r = (0..k).map(|_| sample_rayleigh_coeff(rng)).collect();
        let h_rd = (0..k).map(|_| sample_rayleigh_coeff(rng)).collect();
        ChannelRealization { h_0d, h_0r, h_rd }
    }
}

/// Observations of one block.
///
/// DPSK vectors are `[y(l-1), y(l)]`; FSK vectors have one entry per subband.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub modulation: Modulation,
    /// Alphabet size `M`.
    pub alphabet: usize,
    pub message: usize,
    pub relay_messages: Vec<usize>,
    pub y_0d: Vec<Complex64>,
    pub y_0r: Vec<Vec<Complex64>>,
    pub y_rd: Vec<Vec<Complex64>>,
    pub channel: ChannelRealization,
}

fn check_message(m: usize, alphabet: usize) -> Result<()> {
    if m < alphabet {
        Ok(())
    } else {
        Err(Error::Range {
            what: "message",
            value: m as f64,
            range: "0..M",
        })
    }
}

/// `sigma (sqrt(gamma) h s + n)` for a symbol vector `s`.
fn observe<R: Rng + ?Sized>(
    rng: &mut R,
    sigma_sq: f64,
    amplitude: Complex64,
    s: &[Complex64],
) -> Vec<Complex64> {
    let sigma = sigma_sq.sqrt();
    s.iter()
        .map(|&sym| sigma * (amplitude * sym + sample_scaled(rng, std::f64::consts::FRAC_1_SQRT_2)))
        .collect()
}

fn dpsk_symbols(m: usize, alphabet: usize) -> [Complex64; 2] {
    [Complex64::new(1.0, 0.0), unit_phasor(m, alphabet)]
}

fn fsk_symbols(m: usize, alphabet: usize) -> Vec<Complex64> {
    let mut s = vec![Complex64::new(0.0, 0.0); alphabet];
    s[m] = Complex64::new(1.0, 0.0);
    s
}

fn simulate_block<R: Rng + ?Sized>(
    params: &LinkParams,
    modulation: Modulation,
    alphabet: usize,
    rng: &mut R,
    m: usize,
) -> Result<ReceivedBlock> {
    check_message(m, alphabet)?;
    let k = params.relays();
    let channel = ChannelRealization::sample(rng, k);
    let symbols = |msg: usize| match modulation {
        Modulation::Dpsk => dpsk_symbols(msg, alphabet).to_vec(),
        Modulation::Fsk => fsk_symbols(msg, alphabet),
    };
    let s = symbols(m);
    let y_0d = observe(
        rng,
        params.sigma_0d_sq,
        params.gamma_0d.sqrt() * channel.h_0d,
        &s,
    );
    let mut y_0r = Vec::with_capacity(k);
    let mut y_rd = Vec::with_capacity(k);
    let mut relay_messages = Vec::with_capacity(k);
    for r in 0..k {
        let y = observe(
            rng,
            params.sigma_0r_sq[r],
            params.gamma_0r[r].sqrt() * channel.h_0r[r],
            &s,
        );
        let m_r = match modulation {
            Modulation::Dpsk => relay_detect_dpsk([y[0], y[1]], alphabet),
            Modulation::Fsk => relay_detect_fsk(&y),
        };
        let amp = params.gamma_rd[r].sqrt() * channel.h_0r[r].norm() * channel.h_rd[r];
        y_rd.push(observe(rng, params.sigma_rd_sq[r], amp, &symbols(m_r)));
        y_0r.push(y);
        relay_messages.push(m_r);
    }
    Ok(ReceivedBlock {
        modulation,
        alphabet,
        message: m,
        relay_messages,
        y_0d,
        y_0r,
        y_rd,
        channel,
    })
}

/// One DPSK block for message `m`: fresh fading and noise, relay decisions,
/// and the forwarded second-hop observations.
pub fn simulate_block_dpsk<R: Rng + ?Sized>(
    params: &LinkParams,
    config: &ScenarioConfig,
    rng: &mut R,
    m: usize,
) -> Result<ReceivedBlock> {
    simulate_block(params, Modulation::Dpsk, config.m, rng, m)
}

/// One FSK block for message `m`.
pub fn simulate_block_fsk<R: Rng + ?Sized>(
    params: &LinkParams,
    config: &ScenarioConfig,
    rng: &mut R,
    m: usize,
) -> Result<ReceivedBlock> {
    simulate_block(params, Modulation::Fsk, config.m, rng, m)
}

/// Dispatch on `modulation` with an explicit alphabet size.
pub fn simulate_block_with<R: Rng + ?Sized>(
    params: &LinkParams,
    modulation: Modulation,
    alphabet: usize,
    rng: &mut R,
    m: usize,
) -> Result<ReceivedBlock> {
    simulate_block(params, modulation, alphabet, rng, m)
}
