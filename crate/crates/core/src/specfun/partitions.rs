//! Integer-partition coefficients for the Taylor piece of `I_N`.
//!
//! For each `n`, partitions `{m_i : sum_i i*m_i = n}` are grouped by their part
//! count `s = sum_i m_i`, and `coefficients(n)[s]` holds `sum 1 / prod_j m_j!`
//! over the partitions with `s` parts.

use std::sync::OnceLock;

pub(crate) const CACHED_ORDER: usize = 8;
pub(crate) const MAX_ORDER: usize = 16;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Visit each partition of `n` as a multiplicity vector `m[1..=n]`.
fn for_each_partition(n: usize, mut visit: impl FnMut(&[usize])) {
    fn recurse(rem: usize, largest: usize, m: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if rem == 0 {
            visit(m);
            return;
        }
        for part in (1..=largest.min(rem)).rev() {
            m[part] += 1;
            recurse(rem - part, part, m, visit);
            m[part] -= 1;
        }
    }
    let mut m = vec![0; n + 1];
    recurse(n, n, &mut m, &mut visit);
}

fn build(n: usize) -> Vec<f64> {
    let mut coef = vec![0.0; n + 1];
    for_each_partition(n, |m| {
        let parts: usize = m.iter().sum();
        let denom: f64 = m.iter().map(|&k| factorial(k)).product();
        coef[parts] += 1.0 / denom;
    });
    coef
}

fn cache() -> &'static [Vec<f64>] {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    CACHE.get_or_init(|| (0..=CACHED_ORDER).map(build).collect())
}

/// Coefficients indexed by part count, for `n <= MAX_ORDER`.
pub(crate) fn coefficients(n: usize) -> std::borrow::Cow<'static, [f64]> {
    debug_assert!(n <= MAX_ORDER);
    if n <= CACHED_ORDER {
        std::borrow::Cow::Borrowed(&cache()[n])
    } else {
        std::borrow::Cow::Owned(build(n))
    }
}

/// `mu_n = n! sum_{i=0}^n (-1)^i / i!`, the n-th central moment of a unit exponential.
pub(crate) fn central_moment(n: usize) -> f64 {
    // mu_n = n mu_{n-1} + (-1)^n keeps the recursion in integers
    let mut mu = 1.0;
    for k in 1..=n {
        mu = k as f64 * mu + if k % 2 == 0 { 1.0 } else { -1.0 };
    }
    mu
}
