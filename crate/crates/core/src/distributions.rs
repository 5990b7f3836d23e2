//! Densities and samplers for products of complex Gaussians.
//!
//! With `X1 ~ CN(0, Ω1)`, `X2 ~ CN(0, Ω2)` and noise `CN(0, Ω0 I)`:
//! * DPSK form: `[Y1, Y2] = X1 |X2| [1, c] + noise`;
//! * FSK form: `Y = X1 |X2| e_p + noise` in `C^M`.
//!
//! Both densities reduce to one evaluation of `I(eps, beta)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::specfun::quadrature::{integrate_to_infinity, Tolerance};
use crate::specfun::{bessel_k0_scaled, ln_i_exact_at};

/// Relative tolerance of the `I` evaluations inside the densities.
pub const DENSITY_REL_TOL: f64 = 1e-10;

/// Parameters of the Gaussian-product model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductModelParams {
    omega0: f64,
    omega1: f64,
    omega2: f64,
    c: Complex64,
    p: usize,
    m: usize,
}

fn positive(what: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain { what, value: v })
    }
}

impl ProductModelParams {
    /// DPSK form with the constant `c` (typically `e^{j 2 pi m / M}`).
    pub fn dpsk(omega0: f64, omega1: f64, omega2: f64, c: Complex64) -> Result<Self> {
        if !(c.norm() > 0.0 && c.is_finite()) {
            return Err(Error::Domain {
                what: "|c|",
                value: c.norm(),
            });
        }
        Ok(ProductModelParams {
            omega0: positive("omega0", omega0)?,
            omega1: positive("omega1", omega1)?,
            omega2: positive("omega2", omega2)?,
            c,
            p: 1,
            m: 2,
        })
    }

    /// FSK form: signal on the 1-based subband `p` of `m`.
    pub fn fsk(omega0: f64, omega1: f64, omega2: f64, p: usize, m: usize) -> Result<Self> {
        if !(1..=m).contains(&p) {
            return Err(Error::Range {
                what: "subband index p",
                value: p as f64,
                range: "1..=M",
            });
        }
        Ok(ProductModelParams {
            omega0: positive("omega0", omega0)?,
            omega1: positive("omega1", omega1)?,
            omega2: positive("omega2", omega2)?,
            c: Complex64::new(1.0, 0.0),
            p,
            m,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }
}

/// Log-density of the DPSK-form vector at `x = [x1, x2]`.
pub fn ln_pdf_product_dpsk(x: [Complex64; 2], params: &ProductModelParams) -> Result<f64> {
    let ProductModelParams {
        omega0,
        omega1,
        omega2,
        c,
        ..
    } = *params;
    let gain = 1.0 + c.norm_sqr();
    let ortho = (x[1] - c * x[0]).norm_sqr() / (omega0 * gain);
    let eps = omega1 * omega2 * gain / omega0;
    let beta = (x[0] + c.conj() * x[1]).norm_sqr() / (omega0 * gain);
    let ln_i = ln_i_exact_at(eps, beta, DENSITY_REL_TOL)?;
    Ok(-ortho - 2.0 * (PI * omega0).ln() + ln_i)
}

/// Density of the DPSK-form vector at `x = [x1, x2]`.
pub fn pdf_product_dpsk(x: [Complex64; 2], params: &ProductModelParams) -> Result<f64> {
    ln_pdf_product_dpsk(x, params).map(f64::exp)
}

/// Log-density of the FSK-form vector at `y` (length `M`).
pub fn ln_pdf_product_fsk(y: &[Complex64], params: &ProductModelParams) -> Result<f64> {
    if y.len() != params.m {
        return Err(Error::Dimension {
            expected: params.m,
            got: y.len(),
        });
    }
    let omega0 = params.omega0;
    let energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let on = y[params.p - 1].norm_sqr();
    let eps = params.omega1 * params.omega2 / omega0;
    let ln_i = ln_i_exact_at(eps, on / omega0, DENSITY_REL_TOL)?;
    Ok(-(params.m as f64) * (PI * omega0).ln() - (energy - on) / omega0 + ln_i)
}

/// Density of the FSK-form vector at `y` (length `M`).
pub fn pdf_product_fsk(y: &[Complex64], params: &ProductModelParams) -> Result<f64> {
    ln_pdf_product_fsk(y, params).map(f64::exp)
}

/// Parameters of the phase-difference density: `gamma = Ω1/Ω0` and `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseModelParams {
    gamma: f64,
    c: Complex64,
}

impl PhaseModelParams {
    pub fn new(gamma: f64, c: Complex64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain {
                what: "gamma",
                value: gamma,
            });
        }
        Ok(PhaseModelParams { gamma, c })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }
}

/// Reduce an angle to `[-pi, pi)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let r = theta - TAU * ((theta + PI) / TAU).floor();
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Density of `Θ = ∠(Y1* Y2) - ∠c` for `[Y1, Y2] = X1 [1, c] + noise`.
pub fn phase_pdf(theta: f64, params: &PhaseModelParams) -> f64 {
    let theta = wrap_phase(theta);
    let g = params.gamma;
    let a = params.c.norm();
    let (sin, cos) = theta.sin_cos();
    let base = g * (1.0 + a * a) + 1.0;
    let gs = g * a * sin;
    let gc = g * a * cos;
    let lead = 1.0 / (1.0 + gs * gs / base);
    let arg = (-gc / (g * g * a * a + base).sqrt()).clamp(-1.0, 1.0);
    let inner = 1.0 + gc * arg.acos() / (gs * gs + base).sqrt();
    lead * inner / TAU
}

/// `n` i.i.d. `CN(0, variance)` samples.
pub fn sample_cscg<R: Rng + ?Sized>(rng: &mut R, variance: f64, n: usize) -> Vec<Complex64> {
    let sd = (0.5 * variance).sqrt();
    (0..n).map(|_| sample_scaled(rng, sd)).collect()
}

/// One `CN(0, 1)` fading coefficient.
pub fn sample_rayleigh_coeff<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    sample_scaled(rng, std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn sample_scaled<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// Closed form of `int_0^inf x e^{-ax} K0(bx) dx` for `b > 0`, `a > -b`.
///
/// With `a = b cos θ` this is `(sin θ - θ cos θ) / (b^2 sin^3 θ)`; for `a > b` the
/// same expression continues to `(φ cosh φ - sinh φ) / (b^2 sinh^3 φ)` with
/// `a = b cosh φ`. Short series are used near `a = b`, where both forms are 0/0.
pub fn bessel_moment_closed_form(a: f64, b: f64) -> f64 {
    let r = a / b;
    let b2 = b * b;
    if r <= 1.0 {
        let t = r.clamp(-1.0, 1.0).acos();
        if t < 0.05 {
            let t2 = t * t;
            let ratio = if t == 0.0 { 1.0 } else { t / t.sin() };
            ratio.powi(3) * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0) / b2
        } else {
            (t.sin() - t * t.cos()) / (b2 * t.sin().powi(3))
        }
    } else {
        let f = r.acosh();
        if f < 0.05 {
            let f2 = f * f;
            let ratio = if f == 0.0 { 1.0 } else { f / f.sinh() };
            ratio.powi(3) * (1.0 / 3.0 + f2 / 30.0 + f2 * f2 / 840.0) / b2
        } else {
            (f * f.cosh() - f.sinh()) / (b2 * f.sinh().powi(3))
        }
    }
}

/// `(numeric, closed form)` for `int_0^inf x e^{-ax} K0(bx) dx`.
///
/// Requires `b > 0` and `a + b > 0`.
pub fn bessel_identity_check(a: f64, b: f64) -> Result<(f64, f64)> {
    positive("b", b)?;
    if !(a.is_finite() && a + b > 0.0) {
        return Err(Error::Domain {
            what: "a + b",
            value: a + b,
        });
    }
    let decay = a + b;
    let f = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            // x e^{-ax} K0(bx) = x e^{-(a+b)x} e^{bx} K0(bx)
            x * (-decay * x).exp() * bessel_k0_scaled(b * x).unwrap_or(0.0)
        }
    };
    let lhs = integrate_to_infinity(f, 0.0, 1.0 / decay, Tolerance::relative(1e-12))?;
    Ok((lhs.value, bessel_moment_closed_form(a, b)))
}
