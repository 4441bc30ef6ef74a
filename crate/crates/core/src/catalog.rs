//! Closed-form solutions: plane wave, Gaussian packet, oscillator
//! eigenstates, the accelerating Airy packet and the Morse ground state.
//!
//! Each `*_solution`-style constructor returns the polar field at time `t`
//! together with the external potential it solves.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::bohm::BohmPotentialField;
use crate::field::{AmplitudeMode, ComplexField, Grid1D, PhysicalParams, PolarField};
use crate::specfun::{airy_ai, gamma_fn, hermite, AiryEvalConfig, HermiteOrder};
use crate::{Error, Result};

/// A polar field with the external potential it solves.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSample {
    pub polar: PolarField,
    pub potential: Vec<f64>,
}

fn sample(
    grid: &Grid1D,
    t: f64,
    amplitude: impl Fn(f64) -> Result<f64>,
    phase: impl Fn(f64) -> f64,
    potential: impl Fn(f64) -> f64,
) -> Result<CatalogSample> {
    let xs = grid.points();
    let a = xs.iter().map(|x| amplitude(*x)).collect::<Result<Vec<_>>>()?;
    let s = xs.iter().map(|x| phase(*x)).collect();
    let v = xs.iter().map(|x| potential(*x)).collect();
    Ok(CatalogSample {
        polar: PolarField::new(*grid, a, s, AmplitudeMode::Signed, t)?,
        potential: v,
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Harmonic-oscillator eigenstate `n` in `V = m omega^2 x^2 / 2`.
///
/// `A_n = (2^n n!)^(-1/2) (m omega / pi hbar)^(1/4) exp(-xi^2/2) H_n(xi)`
/// with `xi = sqrt(m omega / hbar) x`, and `S = -(n + 1/2) hbar omega t`.
pub fn ho_eigenstate(n: u32, omega: f64, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<CatalogSample> {
    params.validate()?;
    positive("omega", omega)?;
    let (hbar, m) = (params.hbar, params.mass);
    let scale = (m * omega / hbar).sqrt();
    let norm = (m * omega / (PI * hbar)).powf(0.25) / (2f64.powi(n as i32) * gamma_fn(n as f64 + 1.0)?).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::Evaluation(format!(
            "normalisation of oscillator order {n} is not representable"
        )));
    }
    let energy = (n as f64 + 0.5) * hbar * omega;
    sample(
        grid,
        t,
        |x| {
            let xi = scale * x;
            Ok(norm * (-0.5 * xi * xi).exp() * hermite(HermiteOrder(n), xi)?)
        },
        |_| -energy * t,
        |x| 0.5 * m * omega * omega * x * x,
    )
}

/// Berry-Balazs accelerating Airy packet (free particle):
/// `A = Ai((beta / hbar^(2/3)) (x - beta^3 t^2 / 4m^2))`,
/// `S = (beta^3 t / 2m)(x - beta^3 t^2 / 6m^2)`, so `S(0, 0) = 0`.
pub fn airy_solution(beta: f64, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<CatalogSample> {
    params.validate()?;
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be nonzero, got {beta}")));
    }
    let m = params.mass;
    let b3 = beta.powi(3);
    let scale = beta / params.hbar.powf(2.0 / 3.0);
    let cfg = AiryEvalConfig::default();
    sample(
        grid,
        t,
        |x| airy_ai(scale * (x - b3 * t * t / (4.0 * m * m)), &cfg),
        |x| b3 * t / (2.0 * m) * (x - b3 * t * t / (6.0 * m * m)),
        |_| 0.0,
    )
}

/// Constant acceleration `beta^3 / 2m^2` of the Airy packet.
pub fn airy_acceleration(beta: f64, params: &PhysicalParams) -> f64 {
    beta.powi(3) / (2.0 * params.mass * params.mass)
}

/// Closed-form Bohm potential of the Airy packet,
/// `V_B = -(beta^3 / 2m)(x - beta^3 t^2 / 4m^2)`. Nothing is masked.
pub fn airy_bohm_closed_form(beta: f64, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<BohmPotentialField> {
    params.validate()?;
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be nonzero, got {beta}")));
    }
    let m = params.mass;
    let b3 = beta.powi(3);
    let shift = b3 * t * t / (4.0 * m * m);
    Ok(BohmPotentialField {
        grid: *grid,
        values: grid.points().iter().map(|x| -b3 / (2.0 * m) * (x - shift)).collect(),
        mask: vec![false; grid.n],
        time: t,
    })
}

/// Plane wave `exp(i(kx - omega t))` with amplitude `1/sqrt(L)`. `omega` is
/// free so that off-shell waves can be inspected.
pub fn plane_wave(k: f64, omega: f64, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<CatalogSample> {
    params.validate()?;
    if grid.periodic {
        let cycles = k * grid.length() / (2.0 * PI);
        if (cycles - cycles.round()).abs() > 1e-9 * cycles.abs().max(1.0) {
            return Err(Error::Usage(format!(
                "k = {k} is not commensurate with the periodic box of length {}",
                grid.length()
            )));
        }
    }
    let amp = grid.length().sqrt().recip();
    let hbar = params.hbar;
    sample(grid, t, |_| Ok(amp), |x| hbar * (k * x - omega * t), |_| 0.0)
}

fn gaussian_width_check(sigma: f64, grid: &Grid1D) -> Result<()> {
    positive("sigma", sigma)?;
    if sigma < 3.0 * grid.dx() {
        log::warn!(
            "Gaussian width {sigma} is under three grid spacings ({}); the packet is poorly resolved",
            grid.dx()
        );
    }
    Ok(())
}

/// Unit-normalised Gaussian packet at `t = 0` with envelope
/// `exp(-(x - x0)^2 / 4 sigma^2)` (so `sigma` is the position spread) and
/// carrier `exp(i k0 x)`.
pub fn gaussian_packet(sigma: f64, k0: f64, x0: f64, grid: &Grid1D) -> Result<ComplexField> {
    gaussian_width_check(sigma, grid)?;
    let c = (2.0 * PI * sigma * sigma).powf(-0.25);
    ComplexField::from_fn(*grid, 0.0, |x| {
        let d = x - x0;
        Complex64::from_polar(c * (-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
    })
}

/// Freely spreading Gaussian packet at time `t`, the exact continuation of
/// [`gaussian_packet`] under `V = 0`. With `tau = hbar t / 2m sigma^2`,
/// `v = hbar k0 / m` and `xi = x - x0 - v t`:
///
/// `A = (2 pi sigma^2)^(-1/4) (1 + tau^2)^(-1/4) exp(-xi^2 / 4 sigma^2 (1 + tau^2))`
///
/// `S / hbar = k0 x - hbar k0^2 t / 2m + tau xi^2 / 4 sigma^2 (1 + tau^2) - atan(tau) / 2`
pub fn free_gaussian(
    sigma: f64,
    k0: f64,
    x0: f64,
    grid: &Grid1D,
    t: f64,
    params: &PhysicalParams,
) -> Result<CatalogSample> {
    params.validate()?;
    gaussian_width_check(sigma, grid)?;
    let (hbar, m) = (params.hbar, params.mass);
    let s2 = sigma * sigma;
    let tau = hbar * t / (2.0 * m * s2);
    let spread = 1.0 + tau * tau;
    let c = (2.0 * PI * s2).powf(-0.25) * spread.powf(-0.25);
    let v = hbar * k0 / m;
    sample(
        grid,
        t,
        |x| {
            let xi = x - x0 - v * t;
            Ok(c * (-xi * xi / (4.0 * s2 * spread)).exp())
        },
        |x| {
            let xi = x - x0 - v * t;
            hbar * (k0 * x - hbar * k0 * k0 * t / (2.0 * m) + tau * xi * xi / (4.0 * s2 * spread) - 0.5 * tau.atan())
        },
        |_| 0.0,
    )
}

/// Coherent state of the oscillator `V = m omega^2 x^2 / 2` starting at
/// `(x0, p0)`: a ground-state Gaussian riding the classical orbit
/// `q(t) = x0 cos wt + (p0 / m w) sin wt`, `p(t) = p0 cos wt - m w x0 sin wt`,
///
/// `psi = (m w / pi hbar)^(1/4) exp(-(m w / 2 hbar)(x - q)^2 + i p (x - q/2) / hbar - i w t / 2)`.
pub fn ho_coherent_state(
    x0: f64,
    p0: f64,
    omega: f64,
    grid: &Grid1D,
    t: f64,
    params: &PhysicalParams,
) -> Result<ComplexField> {
    params.validate()?;
    positive("omega", omega)?;
    let (hbar, m) = (params.hbar, params.mass);
    let (sin, cos) = (omega * t).sin_cos();
    let q = x0 * cos + p0 / (m * omega) * sin;
    let p = p0 * cos - m * omega * x0 * sin;
    let c = (m * omega / (PI * hbar)).powf(0.25);
    ComplexField::from_fn(*grid, t, |x| {
        let d = x - q;
        Complex64::from_polar(
            c * (-m * omega * d * d / (2.0 * hbar)).exp(),
            p * (x - 0.5 * q) / hbar - 0.5 * omega * t,
        )
    })
}

/// Morse potential `D (1 - exp(-alpha x))^2`.
pub fn morse_potential(depth: f64, alpha: f64, x: f64) -> f64 {
    let e = 1.0 - (-alpha * x).exp();
    depth * e * e
}

fn morse_lambda(depth: f64, alpha: f64, params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    positive("D", depth)?;
    positive("alpha", alpha)?;
    let lambda = (2.0 * params.mass * depth).sqrt() / (alpha * params.hbar);
    if lambda <= 1.0 {
        return Err(Error::NoBoundState(format!(
            "lambda = sqrt(2mD)/(alpha hbar) = {lambda} <= 1, the well has no bound state"
        )));
    }
    Ok(lambda)
}

/// Ground-state energy `hbar w / 2 - (hbar w)^2 / 16 D`, `w = alpha sqrt(2D/m)`.
pub fn morse_ground_energy(depth: f64, alpha: f64, params: &PhysicalParams) -> Result<f64> {
    morse_lambda(depth, alpha, params)?;
    let hw = params.hbar * alpha * (2.0 * depth / params.mass).sqrt();
    Ok(0.5 * hw - hw * hw / (16.0 * depth))
}

/// Morse ground state. With `lambda = sqrt(2mD)/(alpha hbar)` and
/// `y = 2 lambda exp(-alpha x)` the normalised amplitude is
///
/// `A = sqrt(alpha / Gamma(2 lambda - 1)) y^(lambda - 1/2) exp(-y/2)`,
///
/// i.e. `A ∝ exp(-lambda e^(-alpha x) - (lambda - 1/2) alpha x)`, and
/// `S = -E0 t`.
pub fn morse_ground(depth: f64, alpha: f64, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<CatalogSample> {
    let lambda = morse_lambda(depth, alpha, params)?;
    let energy = morse_ground_energy(depth, alpha, params)?;
    let log_norm = 0.5 * (alpha.ln() - gamma_fn(2.0 * lambda - 1.0)?.ln());
    sample(
        grid,
        t,
        |x| {
            let y = 2.0 * lambda * (-alpha * x).exp();
            Ok((log_norm + (lambda - 0.5) * y.ln() - 0.5 * y).exp())
        },
        |_| -energy * t,
        |x| morse_potential(depth, alpha, x),
    )
}

/// A named closed-form solution, as written on the command line:
/// `airy[:beta]`, `ho:n[,omega]`, `plane:k,omega`, `gauss:sigma,k0`,
/// `morse:D,alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticSolution {
    PlaneWave { k: f64, omega: f64 },
    Gaussian { sigma: f64, k0: f64 },
    HoEigenstate { n: u32, omega: f64 },
    Airy { beta: f64 },
    MorseGround { depth: f64, alpha: f64 },
}

impl AnalyticSolution {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalyticSolution::PlaneWave { .. } => "plane-wave",
            AnalyticSolution::Gaussian { .. } => "gaussian",
            AnalyticSolution::HoEigenstate { .. } => "ho-eigenstate",
            AnalyticSolution::Airy { .. } => "airy",
            AnalyticSolution::MorseGround { .. } => "morse-ground",
        }
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        params.validate()?;
        match *self {
            AnalyticSolution::PlaneWave { k, omega } => {
                if !k.is_finite() || !omega.is_finite() {
                    return Err(Error::Domain("plane-wave k and omega must be finite".into()));
                }
            }
            AnalyticSolution::Gaussian { sigma, k0 } => {
                positive("sigma", sigma)?;
                if !k0.is_finite() {
                    return Err(Error::Domain("k0 must be finite".into()));
                }
            }
            AnalyticSolution::HoEigenstate { omega, .. } => positive("omega", omega)?,
            AnalyticSolution::Airy { beta } => {
                if beta == 0.0 || !beta.is_finite() {
                    return Err(Error::Domain("beta must be nonzero".into()));
                }
            }
            AnalyticSolution::MorseGround { depth, alpha } => {
                morse_lambda(depth, alpha, params)?;
            }
        }
        Ok(())
    }

    /// The solution and its potential at time `t`. The Gaussian is the freely
    /// spreading packet centred at the origin at `t = 0`.
    pub fn sample(&self, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<CatalogSample> {
        match *self {
            AnalyticSolution::PlaneWave { k, omega } => plane_wave(k, omega, grid, t, params),
            AnalyticSolution::Gaussian { sigma, k0 } => free_gaussian(sigma, k0, 0.0, grid, t, params),
            AnalyticSolution::HoEigenstate { n, omega } => ho_eigenstate(n, omega, grid, t, params),
            AnalyticSolution::Airy { beta } => airy_solution(beta, grid, t, params),
            AnalyticSolution::MorseGround { depth, alpha } => morse_ground(depth, alpha, grid, t, params),
        }
    }
}

impl fmt::Display for AnalyticSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticSolution::PlaneWave { k, omega } => write!(f, "plane:{k},{omega}"),
            AnalyticSolution::Gaussian { sigma, k0 } => write!(f, "gauss:{sigma},{k0}"),
            AnalyticSolution::HoEigenstate { n, omega } => write!(f, "ho:{n},{omega}"),
            AnalyticSolution::Airy { beta } => write!(f, "airy:{beta}"),
            AnalyticSolution::MorseGround { depth, alpha } => write!(f, "morse:{depth},{alpha}"),
        }
    }
}

impl FromStr for AnalyticSolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((name, args)) => (name.trim(), args.split(',').map(str::trim).collect::<Vec<_>>()),
            None => (s.trim(), Vec::new()),
        };
        let num = |i: usize| -> Result<f64> {
            args[i]
                .parse::<f64>()
                .map_err(|e| Error::Usage(format!("bad number {:?} in solution {s:?}: {e}", args[i])))
        };
        let arity = |allowed: &[usize]| -> Result<()> {
            if allowed.contains(&args.len()) {
                Ok(())
            } else {
                Err(Error::Usage(format!(
                    "solution {s:?} takes {allowed:?} arguments, got {}",
                    args.len()
                )))
            }
        };
        match name {
            "airy" => {
                arity(&[0, 1])?;
                let beta = if args.is_empty() { 1.0 } else { num(0)? };
                Ok(AnalyticSolution::Airy { beta })
            }
            "ho" => {
                arity(&[1, 2])?;
                let n = args[0]
                    .parse::<u32>()
                    .map_err(|e| Error::Usage(format!("bad oscillator level {:?}: {e}", args[0])))?;
                let omega = if args.len() == 2 { num(1)? } else { 1.0 };
                Ok(AnalyticSolution::HoEigenstate { n, omega })
            }
            "plane" => {
                arity(&[2])?;
                Ok(AnalyticSolution::PlaneWave {
                    k: num(0)?,
                    omega: num(1)?,
                })
            }
            "gauss" => {
                arity(&[2])?;
                Ok(AnalyticSolution::Gaussian {
                    sigma: num(0)?,
                    k0: num(1)?,
                })
            }
            "morse" => {
                arity(&[2])?;
                Ok(AnalyticSolution::MorseGround {
                    depth: num(0)?,
                    alpha: num(1)?,
                })
            }
            other => Err(Error::Usage(format!(
                "unknown solution {other:?}; expected airy, ho, plane, gauss or morse"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohm::{bohm_potential, continuity_residual, qhj_residual, BohmOptions};
    use crate::field::norm;

    fn unit() -> PhysicalParams {
        PhysicalParams::natural()
    }

    fn integral_sq(a: &[f64], dx: f64) -> f64 {
        a.iter().map(|v| v * v).sum::<f64>() * dx
    }

    #[test]
    fn oscillator_values_and_normalisation() {
        let g = Grid1D::with_spacing(-8.0, 8.0, 0.01).unwrap();
        let s0 = ho_eigenstate(0, 1.0, &g, 0.0, &unit()).unwrap();
        let mid = g.n / 2;
        assert!((g.x(mid)).abs() < 1e-12);
        assert!((s0.polar.amplitude[mid] - PI.powf(-0.25)).abs() < 1e-12);
        let s1 = ho_eigenstate(1, 1.0, &g, 0.0, &unit()).unwrap();
        assert!(s1.polar.amplitude[mid].abs() < 1e-12);
        for n in 0..=6 {
            let s = ho_eigenstate(n, 1.0, &g, 0.0, &unit()).unwrap();
            assert!((integral_sq(&s.polar.amplitude, g.dx()) - 1.0).abs() < 1e-8, "n = {n}");
        }
        let later = ho_eigenstate(2, 1.0, &g, 0.4, &unit()).unwrap();
        assert!(later.polar.phase.iter().all(|s| (s + 1.0).abs() < 1e-15));
        assert!((later.potential[0] - 32.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_overflow_is_an_error() {
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.1).unwrap();
        assert!(matches!(
            ho_eigenstate(400, 1.0, &g, 0.0, &unit()),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn airy_solution_values() {
        let g = Grid1D::with_spacing(-5.0, 5.0, 0.01).unwrap();
        let s = airy_solution(1.0, &g, 0.0, &unit()).unwrap();
        let mid = g.n / 2;
        assert!((s.polar.amplitude[mid] - 0.3550280538878172).abs() < 1e-15);
        assert!(s.polar.phase.iter().all(|v| *v == 0.0));
        // The zero of S moves along x = beta^3 t^2 / 6m^2.
        let t: f64 = 2.0;
        let locus = Grid1D::new(t * t / 6.0 - 1.0, t * t / 6.0 + 1.0, 201, false).unwrap();
        let s = airy_solution(1.0, &locus, t, &unit()).unwrap();
        assert!(s.polar.phase[100].abs() < 1e-14);
    }

    #[test]
    fn airy_peak_moves_by_quarter_t_squared() {
        let g = Grid1D::with_spacing(-4.0, 4.0, 0.001).unwrap();
        let peak = |t: f64| {
            let s = airy_solution(1.0, &g, t, &unit()).unwrap();
            let i = (0..g.n)
                .max_by(|&i, &j| s.polar.amplitude[i].abs().total_cmp(&s.polar.amplitude[j].abs()))
                .unwrap();
            g.x(i)
        };
        assert!((peak(2.0) - peak(0.0) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn airy_closed_form_values() {
        let g = Grid1D::new(-1.0, 1.0, 21, false).unwrap();
        let vb = airy_bohm_closed_form(1.0, &g, 0.0, &unit()).unwrap();
        assert!((vb.values[20] + 0.5).abs() < 1e-15);
        let vb = airy_bohm_closed_form(1.0, &g, 2.0, &unit()).unwrap();
        assert!(vb.values[20].abs() < 1e-15);
        assert_eq!(airy_acceleration(2.0, &unit()), 4.0);
        assert!(airy_bohm_closed_form(0.0, &g, 0.0, &unit()).is_err());
    }

    #[test]
    fn plane_wave_commensurability() {
        let g = Grid1D::periodic(0.0, 2.0 * PI, 64).unwrap();
        assert!(plane_wave(3.0, 4.5, &g, 0.0, &unit()).is_ok());
        assert!(matches!(plane_wave(1.5, 0.0, &g, 0.0, &unit()), Err(Error::Usage(_))));
        let open = Grid1D::with_spacing(0.0, 1.0, 0.01).unwrap();
        assert!(plane_wave(1.5, 0.0, &open, 0.0, &unit()).is_ok());
    }

    #[test]
    fn gaussian_packet_norm_and_centre_bohm_potential() {
        let g = Grid1D::periodic(-20.0, 20.0, 2048).unwrap();
        let psi = gaussian_packet(1.0, 0.0, 0.0, &g).unwrap();
        assert!((norm(&psi) - 1.0).abs() < 1e-10);
        let s = free_gaussian(
            1.0,
            0.0,
            0.0,
            &Grid1D::with_spacing(-6.0, 6.0, 0.01).unwrap(),
            0.0,
            &unit(),
        )
        .unwrap();
        let vb = bohm_potential(&s.polar, &unit(), &BohmOptions::default()).unwrap();
        assert!((vb.values[600] - 0.25).abs() < 1e-8);
        // The carrier does not touch the amplitude.
        let k = free_gaussian(1.0, 3.0, 0.0, &s.polar.grid, 0.0, &unit()).unwrap();
        assert_eq!(k.polar.amplitude, s.polar.amplitude);
    }

    #[test]
    fn free_gaussian_matches_packet_at_time_zero() {
        let g = Grid1D::periodic(-10.0, 10.0, 256).unwrap();
        let psi = gaussian_packet(0.8, 1.5, 0.5, &g).unwrap();
        let s = free_gaussian(0.8, 1.5, 0.5, &g, 0.0, &unit()).unwrap();
        let back = crate::field::recompose(&s.polar, &unit()).unwrap();
        for (a, b) in psi.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn coherent_state_starts_at_the_ground_state_and_solves_the_oscillator() {
        let g = Grid1D::with_spacing(-8.0, 8.0, 0.01).unwrap();
        let psi = ho_coherent_state(0.0, 0.0, 1.0, &g, 0.0, &unit()).unwrap();
        let ground = ho_eigenstate(0, 1.0, &g, 0.0, &unit()).unwrap();
        for (a, b) in psi.values.iter().zip(&ground.polar.amplitude) {
            assert!((a.re - b).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
        let params = unit();
        let slices: Vec<PolarField> = [0.6995, 0.7, 0.7005]
            .iter()
            .map(|t| {
                let psi = ho_coherent_state(1.0, 0.5, 1.0, &g, *t, &params).unwrap();
                crate::field::polar_decompose(&psi, &params, AmplitudeMode::NonNegative).unwrap()
            })
            .collect();
        let v: Vec<f64> = g.points().iter().map(|x| 0.5 * x * x).collect();
        let opts = BohmOptions::default();
        assert!(qhj_residual(&slices, &v, &params, &opts).unwrap().report.l_inf < 1e-6);
        assert!(continuity_residual(&slices, &params, &opts).unwrap().report.l_inf < 1e-6);
    }

    #[test]
    fn airy_numeric_bohm_potential_matches_closed_form_at_second_order() {
        let params = unit();
        let error = |dx: f64| {
            // one-sided boundary stencils are first order, so compare inside
            let g = Grid1D::with_spacing(-2.2, 4.2, dx).unwrap();
            let s = airy_solution(1.0, &g, 0.0, &params).unwrap();
            let vb = bohm_potential(&s.polar, &params, &BohmOptions::second_order()).unwrap();
            let exact = airy_bohm_closed_form(1.0, &g, 0.0, &params).unwrap();
            vb.unmasked()
                .filter(|(i, _)| (-2.0..=4.0).contains(&g.x(*i)))
                .fold(0.0_f64, |m, (i, v)| m.max((v - exact.values[i]).abs()))
        };
        let (coarse, fine) = (error(0.01), error(0.005));
        assert!(coarse < 1e-4, "{coarse:e}");
        assert!((3.5..4.5).contains(&(coarse / fine)), "{coarse:e} {fine:e}");
    }

    #[test]
    fn morse_ground_state() {
        let g = Grid1D::with_spacing(-6.0, 6.0, 0.01).unwrap();
        let s = morse_ground(8.0, 1.0, &g, 0.0, &unit()).unwrap();
        assert!((integral_sq(&s.polar.amplitude, g.dx()) - 1.0).abs() < 1e-8);
        assert!((morse_ground_energy(8.0, 1.0, &unit()).unwrap() - 1.875).abs() < 1e-14);
        assert!(morse_potential(8.0, 1.0, 0.0).abs() < 1e-15);
        assert!((morse_potential(8.0, 1.0, 50.0) - 8.0).abs() < 1e-12);
        let vb = bohm_potential(&s.polar, &unit(), &BohmOptions::default()).unwrap();
        assert!(vb.max_abs() > 0.1);
        assert!(matches!(
            morse_ground(0.4, 1.0, &g, 0.0, &unit()),
            Err(Error::NoBoundState(_))
        ));
    }

    fn residuals(sol: AnalyticSolution, g: &Grid1D, t: f64, dt: f64) -> (f64, f64) {
        let params = unit();
        let slices: Vec<CatalogSample> = [t - dt, t, t + dt]
            .iter()
            .map(|t| sol.sample(g, *t, &params).unwrap())
            .collect();
        let polar: Vec<PolarField> = slices.iter().map(|s| s.polar.clone()).collect();
        let opts = BohmOptions::default();
        let q = qhj_residual(&polar, &slices[1].potential, &params, &opts).unwrap();
        let c = continuity_residual(&polar, &params, &opts).unwrap();
        (q.report.l_inf, c.report.l_inf)
    }

    #[test]
    fn every_kind_solves_the_madelung_equations() {
        let cases = [
            ("plane:2,2", (-5.0, 5.0)),
            ("gauss:2,1.5", (-10.0, 10.0)),
            ("ho:3", (-6.0, 6.0)),
            ("airy", (-8.0, 6.0)),
            ("morse:8,1", (-3.0, 8.0)),
        ];
        for (name, (lo, hi)) in cases {
            let sol: AnalyticSolution = name.parse().unwrap();
            let g = Grid1D::with_spacing(lo, hi, 0.01).unwrap();
            let (q, c) = residuals(sol, &g, 0.5, 1e-3);
            assert!(q < 1e-6 && c < 1e-6, "{name}: qhj {q:e}, continuity {c:e}");
        }
    }

    #[test]
    fn names_round_trip() {
        for s in ["airy:2", "ho:4,1.5", "plane:1,0.5", "gauss:1,0", "morse:8,1"] {
            let sol: AnalyticSolution = s.parse().unwrap();
            let again: AnalyticSolution = sol.to_string().parse().unwrap();
            assert_eq!(sol, again);
        }
        assert_eq!(
            "airy".parse::<AnalyticSolution>().unwrap(),
            AnalyticSolution::Airy { beta: 1.0 }
        );
        assert_eq!(
            "ho:2".parse::<AnalyticSolution>().unwrap(),
            AnalyticSolution::HoEigenstate { n: 2, omega: 1.0 }
        );
        for bad in ["nope", "ho", "ho:x", "plane:1", "gauss:1,2,3"] {
            assert!(matches!(bad.parse::<AnalyticSolution>(), Err(Error::Usage(_))), "{bad}");
        }
        let morse: AnalyticSolution = "morse:0.1,1".parse().unwrap();
        assert!(morse.validate(&unit()).is_err());
    }
}
