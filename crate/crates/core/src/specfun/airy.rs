use std::f64::consts::{FRAC_PI_4, PI};

use super::dd::Dd;
use crate::{Error, Result};

/// Ai(0) = 3^(-2/3) / Gamma(2/3), split into double-double parts.
const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
/// -Ai'(0) = 3^(-1/3) / Gamma(1/3), split into double-double parts.
const MINUS_AIP0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);

/// Stopping level for the double-double power series, relative to the
/// largest term seen.
const SERIES_EPS: f64 = 1e-33;

/// Controls how [`airy_ai`] switches between its two evaluation routes.
///
/// The power series is summed in double-double arithmetic for
/// `|x| <= series_cutoff`; beyond that the large-argument asymptotic
/// expansions are used. The default cutoff of 8.5 is where the optimally
/// truncated asymptotic series first reaches double precision, so the two
/// routes agree to roundoff there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryEvalConfig {
    pub series_cutoff: f64,
    pub max_terms: usize,
    pub tol: f64,
}

impl Default for AiryEvalConfig {
    fn default() -> Self {
        AiryEvalConfig {
            series_cutoff: 8.5,
            max_terms: 200,
            tol: 1e-14,
        }
    }
}

impl AiryEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_cutoff > 0.0 && self.series_cutoff.is_finite()) {
            return Err(Error::Usage(format!(
                "series_cutoff must be positive, got {}",
                self.series_cutoff
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Usage(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::Usage("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}

/// Airy function of the first kind, the solution of `y'' = x y` that decays
/// for `x -> +inf`.
pub fn airy_ai(x: f64, cfg: &AiryEvalConfig) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Ai is evaluated at finite x only, got {x}")));
    }
    cfg.validate()?;
    if x.abs() <= cfg.series_cutoff {
        series(x, cfg)
    } else if x > 0.0 {
        asymptotic_positive(x, cfg)
    } else {
        asymptotic_negative(x, cfg)
    }
}

/// Ai(x) = Ai(0) f(x) + Ai'(0) g(x) with
/// f = sum 3^k (1/3)_k x^(3k) / (3k)!, g = sum 3^k (2/3)_k x^(3k+1) / (3k+1)!.
fn series(x: f64, cfg: &AiryEvalConfig) -> Result<f64> {
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;
    let mut f_term = AI0;
    let mut g_term = (-MINUS_AIP0).mul_f64(x);
    let mut sum = f_term + g_term;
    let mut largest = f_term.abs().to_f64() + g_term.abs().to_f64();
    for k in 1..=cfg.max_terms {
        let k3 = 3.0 * k as f64;
        f_term = (f_term * x3).div_f64((k3 - 1.0) * k3);
        g_term = (g_term * x3).div_f64(k3 * (k3 + 1.0));
        sum = sum + f_term + g_term;
        let size = f_term.abs().to_f64() + g_term.abs().to_f64();
        largest = largest.max(size);
        // Terms only shrink monotonically once 9k^2 > |x|^3.
        if size <= SERIES_EPS * largest && 9.0 * (k * k) as f64 > x.abs().powi(3) {
            return Ok(sum.to_f64());
        }
    }
    Err(Error::Evaluation(format!(
        "Airy power series did not converge at x = {x} within {} terms",
        cfg.max_terms
    )))
}

/// Coefficients u_k of the large-argument expansions,
/// u_k = Gamma(3k + 1/2) / (54^k k! Gamma(k + 1/2)).
fn next_u(u_prev: f64, k: usize) -> f64 {
    let k = k as f64;
    u_prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0))
}

fn asymptotic_positive(x: f64, cfg: &AiryEvalConfig) -> Result<f64> {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let mut u = 1.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..=cfg.max_terms {
        u = next_u(u, k);
        let next = -term.signum() * u / zeta.powi(k as i32);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= 0.1 * cfg.tol * sum.abs() {
            return Ok((-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25)) * sum);
        }
    }
    Err(Error::Evaluation(format!(
        "asymptotic Ai expansion at x = {x} cannot reach tolerance {}; raise series_cutoff",
        cfg.tol
    )))
}

fn asymptotic_negative(x: f64, cfg: &AiryEvalConfig) -> Result<f64> {
    let ax = -x;
    let zeta = 2.0 / 3.0 * ax * ax.sqrt();
    // Even-index coefficients feed P, odd-index feed Q.
    let mut u = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    let mut converged = false;
    let mut zk = 1.0;
    for k in 1..=2 * cfg.max_terms {
        u = next_u(u, k);
        zk *= zeta;
        let mag = u / zk;
        if mag > last {
            break;
        }
        last = mag;
        // (-1)^floor(k/2) sign pattern for both sub-series.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * mag;
        } else {
            q += sign * mag;
        }
        if mag <= 0.1 * cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Evaluation(format!(
            "asymptotic Ai expansion at x = {x} cannot reach tolerance {}; raise series_cutoff",
            cfg.tol
        )));
    }
    let theta = zeta + FRAC_PI_4;
    Ok((theta.sin() * p - theta.cos() * q) / (PI.sqrt() * ax.powf(0.25)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_fn;

    // Reference values computed with 50-digit arithmetic (mpmath.airyai).
    const REFERENCE: &[(f64, f64)] = &[
        (-20.0, -0.176_406_127_077_984_69),
        (-10.0, 0.040_241_238_486_443_19),
        (-7.3, 0.335_770_370_515_147_28),
        (-5.0, 0.350_761_009_024_114_32),
        (-2.0, 0.227_407_428_201_685_58),
        (-1.0, 0.535_560_883_292_352_12),
        (-0.5, 0.475_728_091_610_539_59),
        (0.0, 0.355_028_053_887_817_24),
        (0.5, 0.231_693_606_480_833_49),
        (1.0, 0.135_292_416_312_881_42),
        (2.0, 0.034_924_130_423_274_379),
        (5.0, 1.083_444_281_360_744_2e-4),
        (8.5, 1.099_700_975_519_550_7e-8),
        (10.0, 1.104_753_255_289_868_6e-10),
        (15.0, 2.164_962_520_737_992_3e-18),
        (20.0, 1.691_672_868_670_540_3e-27),
    ];

    #[test]
    fn matches_high_precision_reference() {
        let cfg = AiryEvalConfig::default();
        for &(x, want) in REFERENCE {
            let got = airy_ai(x, &cfg).unwrap();
            // Relative to the local envelope so oscillation zeros do not
            // inflate the error on the negative axis.
            let scale = if x < 0.0 {
                (x.abs().powf(-0.25) / PI.sqrt()).max(want.abs())
            } else {
                want.abs()
            };
            let err = (got - want).abs() / scale;
            assert!(err < 1e-14, "x = {x}: got {got:e}, want {want:e}, err {err:e}");
        }
    }

    #[test]
    fn value_at_origin_agrees_with_gamma_identity() {
        let expected = 3f64.powf(-2.0 / 3.0) / gamma_fn(2.0 / 3.0).unwrap();
        let got = airy_ai(0.0, &AiryEvalConfig::default()).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.355_028_053_9).abs() < 1e-10);
        let slope = 3f64.powf(-1.0 / 3.0) / gamma_fn(1.0 / 3.0).unwrap();
        assert!((MINUS_AIP0.to_f64() - slope).abs() < 1e-14);
    }

    #[test]
    fn large_argument_obeys_exponential_bound() {
        let cfg = AiryEvalConfig::default();
        for x in [10.0, 12.0, 20.0] {
            let v = airy_ai(x, &cfg).unwrap();
            assert!(v > 0.0);
            assert!(v <= (-(2.0 / 3.0) * x * x.sqrt()).exp());
        }
        assert!(airy_ai(10.0, &cfg).unwrap() < 1e-9);
    }

    #[test]
    fn routes_agree_at_the_cutoff() {
        let cfg = AiryEvalConfig::default();
        let c = cfg.series_cutoff;
        for x in [c, -c] {
            let s = series(x, &cfg).unwrap();
            let a = if x > 0.0 {
                asymptotic_positive(x, &cfg).unwrap()
            } else {
                asymptotic_negative(x, &cfg).unwrap()
            };
            assert!((s - a).abs() < 1e-9, "x = {x}: series {s:e} vs asymptotic {a:e}");
            assert!((s - a).abs() < 1e-16);
        }
    }

    #[test]
    fn satisfies_airy_equation_with_five_point_second_derivative() {
        let cfg = AiryEvalConfig::default();
        let h = 1e-3;
        let ai = |x: f64| airy_ai(x, &cfg).unwrap();
        for i in 0..=150 {
            let x = -10.0 + 0.1 * i as f64;
            let d2 = (-ai(x + 2.0 * h) + 16.0 * ai(x + h) - 30.0 * ai(x) + 16.0 * ai(x - h) - ai(x - 2.0 * h))
                / (12.0 * h * h);
            let r = d2 - x * ai(x);
            assert!(r.abs() < 1e-8, "x = {x}: residual {r:e}");
        }
    }

    #[test]
    fn decays_for_positive_and_oscillates_for_negative_arguments() {
        let cfg = AiryEvalConfig::default();
        let mut prev = airy_ai(1.0, &cfg).unwrap();
        for i in 1..200 {
            let v = airy_ai(1.0 + 0.1 * i as f64, &cfg).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let sign_changes = (0..200)
            .map(|i| airy_ai(-0.1 * i as f64, &cfg).unwrap())
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|w| w[0] * w[1] < 0.0)
            .count();
        // Zeros of Ai below -19.9: -2.34, -4.09, ..., 15 of them in [-19.9, 0].
        assert!(sign_changes >= 10);
    }

    #[test]
    fn rejects_non_finite_input_and_bad_config() {
        let cfg = AiryEvalConfig::default();
        assert!(matches!(airy_ai(f64::NAN, &cfg), Err(Error::Domain(_))));
        assert!(matches!(airy_ai(f64::INFINITY, &cfg), Err(Error::Domain(_))));
        let bad = AiryEvalConfig { tol: 0.0, ..cfg };
        assert!(matches!(airy_ai(1.0, &bad), Err(Error::Usage(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let few = AiryEvalConfig {
            max_terms: 3,
            ..AiryEvalConfig::default()
        };
        assert!(matches!(airy_ai(-6.0, &few), Err(Error::Evaluation(_))));
        let low_cutoff = AiryEvalConfig {
            series_cutoff: 3.0,
            ..AiryEvalConfig::default()
        };
        assert!(matches!(airy_ai(4.0, &low_cutoff), Err(Error::Evaluation(_))));
    }
}
