//! Special functions used by the analytic solution catalog.

mod airy;
mod dd;

pub use airy::{airy_ai, AiryEvalConfig};

use crate::{Error, Result};

/// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive real arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn needs a finite x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok(gamma_fn(x + 1.0)? / x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let value = (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation(format!("gamma_fn overflows at x = {x}")))
    }
}

/// Order of a physicists' Hermite polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HermiteOrder(pub u32);

/// Physicists' Hermite polynomial `H_n(y)` by the ascending recurrence
/// `H_{k+1} = 2y H_k - 2k H_{k-1}`.
pub fn hermite(n: HermiteOrder, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("hermite needs finite y, got {y}")));
    }
    let mut prev = 1.0;
    if n.0 == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * y;
    for k in 1..n.0 {
        let next = 2.0 * y * cur - 2.0 * k as f64 * prev;
        if !next.is_finite() {
            return Err(Error::Evaluation(format!(
                "H_{}({y}) overflows; recurrence reached order {k}",
                n.0
            )));
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}
