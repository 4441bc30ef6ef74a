//! Wavefunction-potential family with identically vanishing Bohm potential.
//!
//! The family is `f(x, t) = a^2 x^3 / 3 + a b x^2 + b^2 x + c`, so that
//! `f' = (a x + b)^2` and `A = sqrt(f') = |a x + b|` has `A'' = 0` away from
//! its node. The phase follows from `S' = -m fdot / f'` anchored by
//! `S(0, t) = mu(t)`, and the external potential that makes the pair a
//! solution is
//!
//! `V = -(m fdot^2 / 2 f'^2 + m ∫_0^x (fdot fdot' / f'^2 - fddot / f') + mu_dot)`
//!
//! with force `F = (m fdot^2 / 2 f'^2)' + m (fdot fdot' / f'^2 - fddot / f')`.
//!
//! The coefficient functions are polynomials in `t`, so every time
//! derivative is exact. Both `x`-integrals have rational integrands
//! `R(x) / (a x + b)^p` and are done in closed form when the node is near
//! the grid, by cell-wise adaptive Gauss-Legendre otherwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bohm::{bohm_potential, continuity_residual, qhj_residual, BohmOptions};
use crate::field::{AmplitudeMode, DerivOrder, Grid1D, PhysicalParams, PolarField, Scheme};
use crate::{quad, Error, Result};

/// Polynomial in `t` with ascending coefficients, e.g. `[0.0, 2.0]` is `2t`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeFn {
    coeffs: Vec<f64>,
}

impl TimeFn {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidFamily(format!("non-finite coefficient {c}")));
        }
        Ok(TimeFn { coeffs })
    }

    pub fn constant(c: f64) -> Self {
        TimeFn { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest power with a nonzero coefficient (`None` for the zero function).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != 0.0)
    }

    /// `k`-th time derivative at `t`.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate().skip(k).rev() {
            let falling: f64 = (j + 1 - k..=j).map(|v| v as f64).product();
            acc = acc * t + c * falling;
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }
}

/// The coefficient functions `a, b, c, mu`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FFamily {
    #[serde(default)]
    pub a: TimeFn,
    #[serde(default)]
    pub b: TimeFn,
    #[serde(default)]
    pub c: TimeFn,
    #[serde(default)]
    pub mu: TimeFn,
}

/// `f` and its derivatives at one `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValues {
    pub f: f64,
    /// `f'`
    pub f_x: f64,
    /// `fdot`
    pub f_t: f64,
    /// `fdot'`
    pub f_xt: f64,
    /// `fddot`
    pub f_tt: f64,
}

/// Coefficients of `a`, `b`, `c` and their time derivatives at one `t`.
#[derive(Debug, Clone, Copy)]
struct Frozen {
    a: [f64; 3],
    b: [f64; 3],
    c: [f64; 3],
}

impl Frozen {
    /// `fdot` as ascending coefficients in `x`.
    fn f_t(&self) -> [f64; 4] {
        let ([a, da, _], [b, db, _], [_, dc, _]) = (self.a, self.b, self.c);
        [dc, 2.0 * b * db, da * b + a * db, 2.0 * a * da / 3.0]
    }

    /// `fddot` as ascending coefficients in `x`.
    fn f_tt(&self) -> [f64; 4] {
        let ([a, da, dda], [b, db, ddb], [_, _, ddc]) = (self.a, self.b, self.c);
        [
            ddc,
            2.0 * (db * db + b * ddb),
            dda * b + 2.0 * da * db + a * ddb,
            2.0 * (da * da + a * dda) / 3.0,
        ]
    }

    /// `2 fdot udot - fddot u`, with `u = a x + b`; the numerator of the
    /// potential integrand over `u^3`.
    fn potential_numerator(&self) -> Vec<f64> {
        let u = [self.b[0], self.a[0]];
        let du = [self.b[1], self.a[1]];
        let mut n = poly_mul(&self.f_t(), &du);
        n.iter_mut().for_each(|v| *v *= 2.0);
        for (k, v) in poly_mul(&self.f_tt(), &u).iter().enumerate() {
            n[k] -= v;
        }
        n
    }

    /// Numerator of the force over `u^5`:
    /// `F = m (u P P' - 2 a P^2 + u^2 N) / u^5` with `P = fdot`.
    fn force_numerator(&self) -> Vec<f64> {
        let u = [self.b[0], self.a[0]];
        let p = self.f_t();
        let dp = [p[1], 2.0 * p[2], 3.0 * p[3]];
        let mut out = poly_mul(&u, &poly_mul(&p, &dp));
        out.resize(8, 0.0);
        for (k, v) in poly_mul(&p, &p).iter().enumerate() {
            out[k] -= 2.0 * self.a[0] * v;
        }
        for (k, v) in poly_mul(&poly_mul(&u, &u), &self.potential_numerator())
            .iter()
            .enumerate()
        {
            out[k] += v;
        }
        out
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficients of `p` in powers of `(x - x0)`.
fn taylor_shift(p: &[f64], x0: f64) -> Vec<f64> {
    let mut c = p.to_vec();
    let n = c.len();
    for k in 0..n {
        for j in (k..n - 1).rev() {
            c[j] += x0 * c[j + 1];
        }
    }
    c
}

impl FFamily {
    pub fn new(a: TimeFn, b: TimeFn, c: TimeFn, mu: TimeFn) -> Result<Self> {
        let fam = FFamily { a, b, c, mu };
        fam.validate()?;
        Ok(fam)
    }

    /// Static family: constant `a`, `b`, `c` and `mu = 0`.
    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        FFamily {
            a: TimeFn::constant(a),
            b: TimeFn::constant(b),
            c: TimeFn::constant(c),
            mu: TimeFn::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("a", &self.a), ("b", &self.b), ("c", &self.c), ("mu", &self.mu)] {
            TimeFn::new(p.coeffs.clone()).map_err(|e| Error::InvalidFamily(format!("{name}: {e}")))?;
        }
        if self.a.degree().is_none() && self.b.degree().is_none() {
            return Err(Error::InvalidFamily("a and b are both identically zero".into()));
        }
        Ok(())
    }

    /// Random family with polynomial coefficients of the given degree.
    /// `b(0)` is kept in `±[2, 3]` so that the node `-b/a` stays away from
    /// the origin; `a` coefficients lie in `[-1, 1]`, higher `b` terms in
    /// `[-0.5, 0.5]`, `c` and `mu` in `[-1, 1]`.
    pub fn random(rng: &mut impl Rng, degree: usize) -> Self {
        let mut draw = |lo: f64, hi: f64| (0..=degree).map(|_| rng.gen_range(lo..=hi)).collect::<Vec<_>>();
        let a = draw(-1.0, 1.0);
        let mut b = draw(-0.5, 0.5);
        let c = draw(-1.0, 1.0);
        let mu = draw(-1.0, 1.0);
        let lead = rng.gen_range(2.0..=3.0);
        b[0] = if rng.gen_bool(0.5) { lead } else { -lead };
        FFamily {
            a: TimeFn { coeffs: a },
            b: TimeFn { coeffs: b },
            c: TimeFn { coeffs: c },
            mu: TimeFn { coeffs: mu },
        }
    }

    fn freeze(&self, t: f64) -> Result<Frozen> {
        let d = |p: &TimeFn| [p.value(t), p.derivative(1, t), p.derivative(2, t)];
        let frozen = Frozen {
            a: d(&self.a),
            b: d(&self.b),
            c: d(&self.c),
        };
        if frozen.a[0] == 0.0 && frozen.b[0] == 0.0 {
            return Err(Error::InvalidFamily(format!(
                "a and b vanish together at t = {t}; f' is identically zero"
            )));
        }
        Ok(frozen)
    }

    /// The node `x = -b/a` of the amplitude at time `t`, if `a(t) != 0`.
    pub fn node(&self, t: f64) -> Option<f64> {
        let a = self.a.value(t);
        (a != 0.0).then(|| -self.b.value(t) / a)
    }
}

/// `f` and its derivatives at `(x, t)`, all in closed form.
pub fn f_eval(fam: &FFamily, x: f64, t: f64) -> FValues {
    let d = |p: &TimeFn| [p.value(t), p.derivative(1, t), p.derivative(2, t)];
    let fr = Frozen {
        a: d(&fam.a),
        b: d(&fam.b),
        c: d(&fam.c),
    };
    let (a, b, c) = (fr.a[0], fr.b[0], fr.c[0]);
    let u = a * x + b;
    let du = fr.a[1] * x + fr.b[1];
    FValues {
        f: poly_eval(&[c, b * b, a * b, a * a / 3.0], x),
        f_x: u * u,
        f_t: poly_eval(&fr.f_t(), x),
        f_xt: 2.0 * u * du,
        f_tt: poly_eval(&fr.f_tt(), x),
    }
}

/// `R(x) / (a x + b)^p`, taking the limit at the node when `R` vanishes
/// there to order `p`.
fn rational_at(r: &[f64], a: f64, b: f64, p: usize, x: f64) -> f64 {
    let u = a * x + b;
    if u != 0.0 {
        return poly_eval(r, x) / u.powi(p as i32);
    }
    let x0 = -b / a;
    let q = taylor_shift(r, x0);
    let scale: f64 = q
        .iter()
        .enumerate()
        .map(|(k, v)| v.abs() * x0.abs().max(1.0).powi(k as i32))
        .sum();
    if q.iter().take(p).any(|v| v.abs() > 1e-12 * scale) {
        return f64::NAN;
    }
    q.get(p).copied().unwrap_or(0.0) / a.powi(p as i32)
}

/// Whether a rational integral may pass through the node.
#[derive(Clone, Copy, PartialEq)]
enum Crossing {
    /// Take the antiderivative piecewise (used for the phase, whose node
    /// neighbourhood is masked anyway).
    Piecewise,
    /// A non-integrable singularity between 0 and the target is an error.
    Strict,
}

/// `∫_0^x R(y) / (a y + b)^p dy` at every grid point.
fn rational_integral(r: &[f64], a: f64, b: f64, p: usize, grid: &Grid1D, crossing: Crossing) -> Result<Vec<f64>> {
    let xs = grid.points();
    let reach = grid.x_min.abs().max(grid.x_max.abs()).max(1.0);
    match (a != 0.0).then(|| -b / a) {
        Some(x0) if x0.abs() <= 2.0 * reach => closed_form_integral(r, a, x0, p, &xs, reach, crossing),
        _ => {
            let f = |y: f64| poly_eval(r, y) / (a * y + b).powi(p as i32);
            cumulative_integral(&f, &xs)
        }
    }
}

fn closed_form_integral(
    r: &[f64],
    a: f64,
    x0: f64,
    p: usize,
    xs: &[f64],
    reach: f64,
    crossing: Crossing,
) -> Result<Vec<f64>> {
    // R(y) = Σ q_k (y - x0)^k = Σ q_k u^k / a^k, so R / u^p = Σ n_k u^(k - p).
    let q = taylor_shift(r, x0);
    let scale: f64 = q.iter().enumerate().map(|(k, v)| v.abs() * reach.powi(k as i32)).sum();
    let mut n: Vec<f64> = q.iter().enumerate().map(|(k, v)| v / a.powi(k as i32)).collect();
    let mut singular = false;
    for k in 0..p.min(n.len()) {
        if q[k].abs() * reach.powi(k as i32) <= 1e-12 * scale {
            n[k] = 0.0;
        } else {
            singular = true;
        }
    }
    let antiderivative = |x: f64, skip_singular: bool| -> f64 {
        let u = a * (x - x0);
        let mut acc = 0.0;
        for (k, c) in n.iter().enumerate() {
            if *c == 0.0 || (skip_singular && k < p) {
                continue;
            }
            let e = k as i32 - p as i32 + 1;
            acc += if e == 0 {
                c * u.abs().ln()
            } else {
                c * u.powi(e) / e as f64
            };
        }
        acc / a
    };
    let origin = antiderivative(0.0, x0 == 0.0);
    xs.iter()
        .map(|&x| {
            let between = x0 >= x.min(0.0) && x0 <= x.max(0.0);
            if singular && between && x != 0.0 {
                match crossing {
                    Crossing::Strict => {
                        return Err(Error::SingularIntegral {
                            location: x0,
                            target: x,
                        })
                    }
                    Crossing::Piecewise if x == x0 => return Ok(f64::NAN),
                    Crossing::Piecewise => {}
                }
            }
            Ok(antiderivative(x, false) - origin)
        })
        .collect()
}

/// Cumulative integral from 0 through sorted points, one adaptive panel per
/// gap.
fn cumulative_integral(f: &impl Fn(f64) -> f64, xs: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; xs.len()];
    let split = xs.partition_point(|x| *x < 0.0);
    let (mut prev, mut acc) = (0.0, 0.0);
    for i in split..xs.len() {
        acc += quad::adaptive(f, prev, xs[i], 1e-14, 30)?;
        out[i] = acc;
        prev = xs[i];
    }
    let (mut prev, mut acc) = (0.0, 0.0);
    for i in (0..split).rev() {
        acc += quad::adaptive(f, prev, xs[i], 1e-14, 30)?;
        out[i] = acc;
        prev = xs[i];
    }
    Ok(out)
}

/// Amplitude `|a x + b|` and phase `S = mu(t) - m ∫_0^x fdot / f'` on the
/// grid, in non-negative amplitude mode. The phase at the node itself is
/// not defined and is filled by its neighbour; the bohm routines mask it.
pub fn family_to_fields(fam: &FFamily, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<PolarField> {
    params.validate()?;
    let fr = fam.freeze(t)?;
    let (a, b) = (fr.a[0], fr.b[0]);
    let amplitude: Vec<f64> = grid.points().iter().map(|x| (a * x + b).abs()).collect();
    let flux = rational_integral(&fr.f_t(), a, b, 2, grid, Crossing::Piecewise)?;
    let mu = fam.mu.value(t);
    let mut phase: Vec<f64> = flux.iter().map(|v| mu - params.mass * v).collect();
    for i in 0..phase.len() {
        if !phase[i].is_finite() {
            phase[i] = if i > 0 { phase[i - 1] } else { mu };
        }
    }
    PolarField::new(*grid, amplitude, phase, AmplitudeMode::NonNegative, t)
}

/// External potential for which the family member solves the Schrödinger
/// equation, with the integral taken from `x = 0`.
pub fn external_potential_from_f(fam: &FFamily, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<Vec<f64>> {
    params.validate()?;
    let fr = fam.freeze(t)?;
    let (a, b) = (fr.a[0], fr.b[0]);
    let m = params.mass;
    let integral = rational_integral(&fr.potential_numerator(), a, b, 3, grid, Crossing::Strict)?;
    let dmu = fam.mu.derivative(1, t);
    let f_t = fr.f_t();
    grid.points()
        .iter()
        .zip(&integral)
        .map(|(&x, i)| {
            let w = rational_at(&f_t, a, b, 2, x);
            let v = -(0.5 * m * w * w + m * i + dmu);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::SingularIntegral {
                    location: -b / a,
                    target: x,
                })
            }
        })
        .collect()
}

/// Force `-V'` in closed form.
pub fn force_from_f(fam: &FFamily, grid: &Grid1D, t: f64, params: &PhysicalParams) -> Result<Vec<f64>> {
    params.validate()?;
    let fr = fam.freeze(t)?;
    let (a, b) = (fr.a[0], fr.b[0]);
    let numerator = fr.force_numerator();
    grid.points()
        .iter()
        .map(|&x| {
            let force = params.mass * rational_at(&numerator, a, b, 5, x);
            if force.is_finite() {
                Ok(force)
            } else {
                Err(Error::Evaluation(format!("force is undefined at the node x = {x}")))
            }
        })
        .collect()
}

/// Outcome of [`vb_zero_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VbVerdict {
    pub vanishing: bool,
    pub max_abs_vb: f64,
    pub tolerance: f64,
}

/// Default tolerance of [`vb_zero_check`] in energy units.
pub const VB_ZERO_TOLERANCE: f64 = 1e-6;

/// Builds `A = sqrt(f')` from density samples and tests whether its Bohm
/// potential vanishes at every unmasked point.
pub fn vb_zero_check(density: &[f64], grid: &Grid1D, params: &PhysicalParams, tolerance: f64) -> Result<VbVerdict> {
    if density.len() != grid.n {
        return Err(Error::Usage("density length does not match the grid".into()));
    }
    if let Some(i) = density.iter().position(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidFamily(format!(
            "negative density f' = {} at x = {}",
            density[i],
            grid.x(i)
        )));
    }
    let amplitude = density.iter().map(|d| d.sqrt()).collect();
    let polar = PolarField::new(*grid, amplitude, vec![0.0; grid.n], AmplitudeMode::NonNegative, 0.0)?;
    let vb = bohm_potential(&polar, params, &BohmOptions::default())?;
    let max_abs_vb = vb.max_abs();
    Ok(VbVerdict {
        vanishing: max_abs_vb < tolerance,
        max_abs_vb,
        tolerance,
    })
}

/// [`vb_zero_check`] on the density `f' = (a x + b)^2` of a family member.
pub fn vb_zero_check_family(
    fam: &FFamily,
    grid: &Grid1D,
    t: f64,
    params: &PhysicalParams,
    tolerance: f64,
) -> Result<VbVerdict> {
    let density: Vec<f64> = grid.points().iter().map(|x| f_eval(fam, *x, t).f_x).collect();
    vb_zero_check(&density, grid, params, tolerance)
}

/// Minimum distance between the node and the grid for [`check_family`] to
/// meet its tolerances with sixth-order differences: the phase carries
/// `1/(a x + b)` terms whose high derivatives grow quickly near the node.
pub const NODE_CLEARANCE: f64 = 2.0;

/// Whether the node stays at least [`NODE_CLEARANCE`] outside the grid at
/// `t - dt`, `t` and `t + dt`.
pub fn node_clear_of(fam: &FFamily, grid: &Grid1D, t: f64, dt: f64) -> bool {
    [t - dt, t, t + dt].iter().all(|s| match fam.node(*s) {
        None => true,
        Some(x) => x < grid.x_min - NODE_CLEARANCE || x > grid.x_max + NODE_CLEARANCE,
    })
}

/// Draws random families of the given degree until `count` of them keep
/// their node clear of the grid (see [`node_clear_of`]).
pub fn random_families(
    rng: &mut impl Rng,
    count: usize,
    degree: usize,
    grid: &Grid1D,
    t: f64,
    dt: f64,
) -> Vec<FFamily> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let fam = FFamily::random(rng, degree);
        if node_clear_of(&fam, grid, t, dt) {
            out.push(fam);
        }
    }
    out
}

/// Numbers produced by [`check_family`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyCheck {
    pub max_abs_vb: f64,
    pub continuity_l_inf: f64,
    pub qhj_l_inf: f64,
    /// `‖F + V'‖∞` with `V'` by sixth-order differences.
    pub force_gap: f64,
}

/// Bohm potential, continuity and Hamilton-Jacobi residuals of the family
/// at `t` (time slices `t ± dt`), and the gap between the closed-form force
/// and the differentiated potential.
pub fn check_family(
    fam: &FFamily,
    grid: &Grid1D,
    t: f64,
    dt: f64,
    params: &PhysicalParams,
    opts: &BohmOptions,
) -> Result<FamilyCheck> {
    if !(dt > 0.0) {
        return Err(Error::Usage("dt must be positive".into()));
    }
    let slices = [t - dt, t, t + dt]
        .iter()
        .map(|s| family_to_fields(fam, grid, *s, params))
        .collect::<Result<Vec<_>>>()?;
    let vb = bohm_potential(&slices[1], params, opts)?;
    let v = external_potential_from_f(fam, grid, t, params)?;
    let q = qhj_residual(&slices, &v, params, opts)?;
    let c = continuity_residual(&slices, params, opts)?;
    let dv = crate::field::derivative(&v, grid, DerivOrder::First, Scheme::FD6)?;
    let force = force_from_f(fam, grid, t, params)?;
    let force_gap = force
        .iter()
        .zip(&dv)
        .zip(&vb.mask)
        .filter(|(_, m)| !**m)
        .fold(0.0_f64, |g, ((f, d), _)| g.max((f + d).abs()));
    Ok(FamilyCheck {
        max_abs_vb: vb.max_abs(),
        continuity_l_inf: c.report.l_inf,
        qhj_l_inf: q.report.l_inf,
        force_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tf(c: &[f64]) -> TimeFn {
        TimeFn::new(c.to_vec()).unwrap()
    }

    fn unit() -> PhysicalParams {
        PhysicalParams::natural()
    }

    #[test]
    fn time_fn_derivatives() {
        let p = tf(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.value(2.0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(p.derivative(1, 2.0), 2.0 + 12.0 + 48.0);
        assert_eq!(p.derivative(2, 2.0), 6.0 + 48.0);
        assert_eq!(p.derivative(3, 2.0), 24.0);
        assert_eq!(p.derivative(4, 2.0), 0.0);
        assert_eq!(TimeFn::default().value(3.0), 0.0);
        assert_eq!(tf(&[0.0, 1.0, 0.0]).degree(), Some(1));
        assert!(TimeFn::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn f_eval_examples() {
        let v = f_eval(&FFamily::constant(1.0, 0.0, 0.0), 2.0, 0.7);
        assert!((v.f - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(v.f_x, 4.0);
        assert_eq!((v.f_t, v.f_xt, v.f_tt), (0.0, 0.0, 0.0));
        let v = f_eval(&FFamily::constant(0.0, 1.0, 0.5), 3.0, 0.0);
        assert_eq!((v.f, v.f_x), (3.5, 1.0));
        let fam = FFamily::new(tf(&[0.0, 1.0]), TimeFn::default(), TimeFn::default(), TimeFn::default()).unwrap();
        let v = f_eval(&fam, 1.0, 1.0);
        assert!((v.f_t - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f_eval_derivatives_match_differences() {
        let fam = FFamily::new(
            tf(&[0.3, -0.2, 0.1]),
            tf(&[2.0, 0.4, -0.3]),
            tf(&[0.5, 0.2, 0.7]),
            TimeFn::default(),
        )
        .unwrap();
        let (x, t, h) = (0.4, 0.6, 1e-4);
        let v = f_eval(&fam, x, t);
        let f = |x: f64, t: f64| f_eval(&fam, x, t).f;
        assert!((v.f_x - (f(x + h, t) - f(x - h, t)) / (2.0 * h)).abs() < 1e-7);
        assert!((v.f_t - (f(x, t + h) - f(x, t - h)) / (2.0 * h)).abs() < 1e-7);
        assert!((v.f_tt - (f(x, t + h) - 2.0 * f(x, t) + f(x, t - h)) / (h * h)).abs() < 1e-5);
        let ft = |x: f64| f_eval(&fam, x, t).f_t;
        assert!((v.f_xt - (ft(x + h) - ft(x - h)) / (2.0 * h)).abs() < 1e-7);
    }

    #[test]
    fn invalid_families_are_rejected() {
        assert!(matches!(
            FFamily::new(TimeFn::default(), TimeFn::default(), tf(&[1.0]), TimeFn::default()),
            Err(Error::InvalidFamily(_))
        ));
        // a = b = 0 only at one instant.
        let fam = FFamily::new(tf(&[0.0, 1.0]), tf(&[0.0, 1.0]), TimeFn::default(), TimeFn::default()).unwrap();
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.1).unwrap();
        assert!(matches!(
            family_to_fields(&fam, &g, 0.0, &unit()),
            Err(Error::InvalidFamily(_))
        ));
    }

    #[test]
    fn static_families() {
        let g = Grid1D::with_spacing(-2.0, 2.0, 0.01).unwrap();
        let fam = FFamily::constant(1.0, 0.0, 0.0);
        let p = family_to_fields(&fam, &g, 0.3, &unit()).unwrap();
        for (x, a) in g.points().iter().zip(&p.amplitude) {
            assert_eq!(*a, x.abs());
        }
        let vb = bohm_potential(&p, &unit(), &BohmOptions::default()).unwrap();
        assert!(vb.max_abs() < 1e-9);
        assert!(vb.mask[g.n / 2]);
        assert!(external_potential_from_f(&fam, &g, 0.3, &unit())
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(force_from_f(&FFamily::constant(0.5, 2.0, 1.0), &g, 0.3, &unit())
            .unwrap()
            .iter()
            .all(|f| *f == 0.0));

        let uniform = family_to_fields(&FFamily::constant(0.0, 1.0, 0.0), &g, 1.0, &unit()).unwrap();
        assert!(uniform.amplitude.iter().all(|a| *a == 1.0));
        assert!(uniform.phase.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn moving_node_family_satisfies_continuity() {
        let fam = FFamily::new(tf(&[1.0]), tf(&[0.0, 1.0]), TimeFn::default(), TimeFn::default()).unwrap();
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.01).unwrap();
        // Node at x = -t, two units beyond the grid edge at t = 3.
        let c = check_family(&fam, &g, 3.0, 1e-5, &unit(), &BohmOptions::default()).unwrap();
        assert!(c.continuity_l_inf < 1e-8, "{c:?}");
        assert!(c.max_abs_vb < 1e-8);
        assert!(c.qhj_l_inf < 1e-6);
    }

    #[test]
    fn singular_potential_integral_is_reported() {
        // Node at x = -b/a = 0.5 inside [0, 1]; fdot does not vanish there.
        let fam = FFamily::new(tf(&[2.0]), tf(&[-1.0, 0.5]), TimeFn::default(), TimeFn::default()).unwrap();
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.01).unwrap();
        match external_potential_from_f(&fam, &g, 0.0, &unit()) {
            Err(Error::SingularIntegral { location, .. }) => assert!((location - 0.5).abs() < 1e-12),
            other => panic!("expected a singular integral, got {other:?}"),
        }
    }

    #[test]
    fn oscillator_member_reproduces_harmonic_potential() {
        // a(t) = cos(t)^(-3/2), b = 0 gives V = x^2/2 exactly; use its Taylor
        // polynomial on a short window.
        let a = tf(&[
            1.0,
            0.0,
            0.75,
            0.0,
            0.40625,
            0.0,
            379.0 / 1920.0,
            0.0,
            19627.0 / 215040.0,
        ]);
        let fam = FFamily::new(a, TimeFn::default(), TimeFn::default(), tf(&[0.0, -0.5])).unwrap();
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.01).unwrap();
        for t in [0.0, 0.05, 0.1] {
            let v = external_potential_from_f(&fam, &g, t, &unit()).unwrap();
            for (x, v) in g.points().iter().zip(&v) {
                assert!((v - (0.5 * x * x + 0.5)).abs() < 1e-4, "t = {t}, x = {x}: {v}");
            }
        }
    }

    #[test]
    fn mu_is_a_gauge() {
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.01).unwrap();
        let base = FFamily::new(tf(&[0.4, 0.2]), tf(&[2.5, -0.3]), tf(&[0.1, 0.2]), TimeFn::default()).unwrap();
        let shifted = FFamily {
            mu: tf(&[0.0, 1.5]),
            ..base.clone()
        };
        let v0 = external_potential_from_f(&base, &g, 0.5, &unit()).unwrap();
        let v1 = external_potential_from_f(&shifted, &g, 0.5, &unit()).unwrap();
        assert!(v0.iter().zip(&v1).all(|(a, b)| (a - b - 1.5).abs() < 1e-12));
        assert_eq!(
            force_from_f(&base, &g, 0.5, &unit()).unwrap(),
            force_from_f(&shifted, &g, 0.5, &unit()).unwrap()
        );
        let c0 = check_family(&base, &g, 0.5, 1e-5, &unit(), &BohmOptions::default()).unwrap();
        let c1 = check_family(&shifted, &g, 0.5, 1e-5, &unit(), &BohmOptions::default()).unwrap();
        assert!(c1.qhj_l_inf < 1e-6 && c0.qhj_l_inf < 1e-6);
        assert!(c1.continuity_l_inf < 1e-8 && c0.continuity_l_inf < 1e-8);
    }

    #[test]
    fn closed_form_and_numeric_integrals_agree() {
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.05).unwrap();
        let r = [0.3, -1.0, 0.5, 0.2];
        let (a, b) = (0.7, 1.9);
        let closed = rational_integral(&r, a, b, 3, &g, Crossing::Strict).unwrap();
        let f = |y: f64| poly_eval(&r, y) / (a * y + b).powi(3);
        let numeric = cumulative_integral(&f, &g.points()).unwrap();
        for (c, n) in closed.iter().zip(&numeric) {
            assert!((c - n).abs() < 1e-12, "{c} vs {n}");
        }
    }

    #[test]
    fn vb_zero_check_examples() {
        let g = Grid1D::with_spacing(-3.0, 3.0, 0.01).unwrap();
        let square: Vec<f64> = g.points().iter().map(|x| (2.0 * x + 3.0).powi(2)).collect();
        let v = vb_zero_check(&square, &g, &unit(), VB_ZERO_TOLERANCE).unwrap();
        assert!(v.vanishing, "{v:?}");
        let gauss: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let v = vb_zero_check(&gauss, &g, &unit(), VB_ZERO_TOLERANCE).unwrap();
        assert!(!v.vanishing && v.max_abs_vb > 0.1);
        assert!(vb_zero_check(&vec![-1.0; g.n], &g, &unit(), 1e-6).is_err());
    }

    #[test]
    fn config_lists_deserialise() {
        let fam: FFamily = serde_json::from_str(r#"{"a": [1.0], "b": [0.0, 2.0]}"#).unwrap();
        assert_eq!(fam.a.coeffs(), &[1.0]);
        assert_eq!(fam.b.coeffs(), &[0.0, 2.0]);
        assert_eq!(fam.mu, TimeFn::default());
        assert!(serde_json::from_str::<FFamily>(r#"{"d": [1.0]}"#).is_err());
    }

    #[test]
    fn seeded_random_families_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid1D::with_spacing(-1.0, 1.0, 0.01).unwrap();
        for fam in random_families(&mut rng, 5, 3, &g, 0.3, 1e-5) {
            let c = check_family(&fam, &g, 0.3, 1e-5, &unit(), &BohmOptions::default()).unwrap();
            assert!(c.max_abs_vb < 1e-8 && c.continuity_l_inf < 1e-8, "{fam:?}: {c:?}");
            assert!(c.qhj_l_inf < 1e-6 && c.force_gap < 1e-6, "{fam:?}: {c:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_families_have_vanishing_bohm_potential(seed in any::<u64>(), degree in 0usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fam = FFamily::random(&mut rng, degree);
            let g = Grid1D::with_spacing(-1.0, 1.0, 0.01).unwrap();
            prop_assume!(node_clear_of(&fam, &g, 0.3, 1e-5));
            let c = check_family(&fam, &g, 0.3, 1e-5, &unit(), &BohmOptions::default()).unwrap();
            prop_assert!(c.max_abs_vb < 1e-8, "{:?}", c);
            prop_assert!(c.continuity_l_inf < 1e-8, "{:?}", c);
            prop_assert!(c.qhj_l_inf < 1e-6, "{:?}", c);
            prop_assert!(c.force_gap < 1e-6, "{:?}", c);
        }
    }
}
