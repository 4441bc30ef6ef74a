//! Bohm potential, quantum Hamilton-Jacobi and continuity residuals, and
//! Bohmian trajectories.
//!
//! Everything here works on sampled [`PolarField`]s. Points where the
//! amplitude is (close to) a node are masked: `A''/A` and the phase are not
//! defined there and the masks travel with every result.

use serde::Serialize;

use crate::field::{AmplitudeMode, DerivOrder, Grid1D, PhysicalParams, PolarField, Scheme, Stencil};
use crate::{Error, Result};

/// How `A''/A` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeForm {
    /// Differentiate `A` and divide.
    Direct,
    /// `A''/A = R'' + R'^2` with `R = ln|A|`. Well conditioned on
    /// exponential tails, useless next to nodes.
    Logarithmic,
    /// Logarithmic where `|A| < log_below * max|A|` and no node of `A` lies
    /// within `node_radius`; direct elsewhere.
    Auto { log_below: f64, node_radius: f64 },
}

/// Discretisation and masking choices shared by the Bohm-potential and
/// residual routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohmOptions {
    pub scheme: Scheme,
    /// Relative amplitude threshold for nodes.
    pub node_threshold: f64,
    /// Points closer than this to a node are masked (length units).
    pub exclusion_radius: f64,
    pub form: AmplitudeForm,
}

impl Default for BohmOptions {
    fn default() -> Self {
        BohmOptions {
            scheme: Scheme::FD6,
            node_threshold: crate::field::NODE_THRESHOLD,
            exclusion_radius: 0.05,
            form: AmplitudeForm::Auto {
                log_below: 1e-3,
                node_radius: 0.5,
            },
        }
    }
}

impl BohmOptions {
    /// Plain second-order finite differences on `A` itself.
    pub fn second_order() -> Self {
        BohmOptions {
            scheme: Scheme::FD2,
            form: AmplitudeForm::Direct,
            ..Default::default()
        }
    }

    fn phase_stencil(&self, grid: &Grid1D, order: DerivOrder) -> Result<Stencil> {
        // The phase is not periodic even when psi is, so phase derivatives
        // always use open stencils.
        let accuracy = match self.scheme {
            Scheme::Spectral => 6,
            Scheme::FiniteDifference { accuracy } => accuracy,
        };
        let scheme = Scheme::FiniteDifference { accuracy };
        scheme.validate()?;
        if grid.n < accuracy + 2 {
            return Err(Error::Usage(format!(
                "grid of {} points too small for accuracy {accuracy}",
                grid.n
            )));
        }
        Ok(Stencil::new(grid.n, grid.dx(), order.as_usize(), accuracy, false))
    }
}

/// Sampled Bohm potential with its node mask.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmPotentialField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    /// `true` where the value is undefined (node or node neighbourhood).
    pub mask: Vec<bool>,
    pub time: f64,
}

impl BohmPotentialField {
    pub fn unmasked(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter(|(_, (_, m))| !**m)
            .map(|(i, (v, _))| (i, *v))
    }

    pub fn max_abs(&self) -> f64 {
        self.unmasked().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }
}

/// Node locations of a sampled amplitude: sign changes (linearly
/// interpolated, or at an exact zero between opposite signs) and, for
/// non-negative amplitudes, V-shaped minima that reach zero within one cell.
fn find_nodes(polar: &PolarField) -> Vec<f64> {
    let a = &polar.amplitude;
    let grid = &polar.grid;
    let dx = grid.dx();
    let mut nodes = Vec::new();
    for i in 0..a.len() {
        if i + 1 < a.len() && a[i] * a[i + 1] < 0.0 {
            nodes.push(grid.x(i) + dx * a[i] / (a[i] - a[i + 1]));
        }
        if i == 0 || i + 1 == a.len() {
            continue;
        }
        let (l, c, r) = (a[i - 1], a[i], a[i + 1]);
        if c == 0.0 && l * r < 0.0 {
            nodes.push(grid.x(i));
        }
        if polar.mode == AmplitudeMode::NonNegative && c < l && c < r && c < (l - c).min(r - c) {
            nodes.push(grid.x(i));
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes
}

fn distance_to_nearest(x: f64, sorted: &[f64]) -> f64 {
    let k = sorted.partition_point(|v| *v < x);
    let mut best = f64::INFINITY;
    if k < sorted.len() {
        best = best.min((sorted[k] - x).abs());
    }
    if k > 0 {
        best = best.min((x - sorted[k - 1]).abs());
    }
    best
}

/// Node mask: points under the amplitude threshold plus every point within
/// `exclusion_radius` of a node or of a thresholded point. Also returns the
/// node locations.
fn node_mask(polar: &PolarField, opts: &BohmOptions) -> (Vec<bool>, Vec<f64>) {
    let threshold_mask = polar.node_mask(opts.node_threshold);
    let nodes = find_nodes(polar);
    let mut avoid: Vec<f64> = (0..polar.grid.n)
        .filter(|i| threshold_mask[*i])
        .map(|i| polar.grid.x(i))
        .chain(nodes.iter().copied())
        .collect();
    avoid.sort_by(f64::total_cmp);
    let mask = (0..polar.grid.n)
        .map(|i| {
            threshold_mask[i]
                || (!avoid.is_empty() && distance_to_nearest(polar.grid.x(i), &avoid) < opts.exclusion_radius)
        })
        .collect();
    (mask, nodes)
}

/// `V_B = -(hbar^2 / 2m) A''/A`.
pub fn bohm_potential(polar: &PolarField, params: &PhysicalParams, opts: &BohmOptions) -> Result<BohmPotentialField> {
    params.validate()?;
    let grid = polar.grid;
    let a = &polar.amplitude;
    if polar.max_abs_amplitude() == 0.0 {
        return Err(Error::DegenerateField("amplitude vanishes everywhere".into()));
    }
    let (mask, nodes) = node_mask(polar, opts);
    if mask.iter().all(|m| *m) {
        return Err(Error::DegenerateField("every grid point is masked as a node".into()));
    }
    let curvature = match opts.scheme.stencil(&grid, DerivOrder::Second)? {
        None => {
            let d2 = crate::field::derivative(a, &grid, DerivOrder::Second, Scheme::Spectral)?;
            d2.iter().zip(a).map(|(d, a)| d / a).collect::<Vec<_>>()
        }
        Some(d2) => {
            let d1 = opts.scheme.stencil(&grid, DerivOrder::First)?.expect("fd stencil");
            let max = polar.max_abs_amplitude();
            let log_amp: Vec<f64> = a.iter().map(|v| v.abs().ln()).collect();
            (0..grid.n)
                .map(|i| {
                    let use_log = match opts.form {
                        AmplitudeForm::Direct => false,
                        AmplitudeForm::Logarithmic => true,
                        AmplitudeForm::Auto { log_below, node_radius } => {
                            a[i].abs() < log_below * max && distance_to_nearest(grid.x(i), &nodes) > node_radius
                        }
                    };
                    if use_log && taps_share_sign(&d2, a, i) {
                        let r1 = d1.apply_at(&log_amp, i);
                        let r2 = d2.apply_at(&log_amp, i);
                        r2 + r1 * r1
                    } else {
                        d2.apply_at(a, i) / a[i]
                    }
                })
                .collect()
        }
    };
    let factor = -params.hbar * params.hbar / (2.0 * params.mass);
    let values = curvature
        .iter()
        .zip(&mask)
        .map(|(c, m)| if *m { 0.0 } else { factor * c })
        .collect::<Vec<_>>();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!(
            "non-finite Bohm potential at x = {}",
            grid.x(i)
        )));
    }
    Ok(BohmPotentialField {
        grid,
        values,
        mask,
        time: polar.time,
    })
}

fn taps_share_sign(stencil: &Stencil, a: &[f64], i: usize) -> bool {
    let s = a[i].signum();
    let mut ok = a[i] != 0.0;
    stencil.for_each_tap(i, |j, _| ok &= a[j] != 0.0 && a[j].signum() == s);
    ok
}

/// Norms of a residual field over its unmasked points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub l_inf: f64,
    /// Root-mean-square over unmasked points (same units as the residual).
    pub l2: f64,
    pub masked_fraction: f64,
    pub grid: Grid1D,
    pub time: f64,
}

impl ResidualReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A residual field together with its mask and summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub report: ResidualReport,
}

impl Residual {
    fn new(values: Vec<f64>, mask: Vec<bool>, grid: Grid1D, time: f64) -> Result<Self> {
        let kept: Vec<f64> = values
            .iter()
            .zip(&mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| *v)
            .collect();
        if kept.is_empty() {
            return Err(Error::DegenerateField("residual is masked everywhere".into()));
        }
        let l_inf = kept.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let l2 = (kept.iter().map(|v| v * v).sum::<f64>() / kept.len() as f64).sqrt();
        let masked_fraction = 1.0 - kept.len() as f64 / values.len() as f64;
        Ok(Residual {
            values,
            mask,
            report: ResidualReport {
                l_inf,
                l2,
                masked_fraction,
                grid,
                time,
            },
        })
    }

    pub fn unmasked(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| *v)
    }
}

struct TimeStencil<'a> {
    prev: &'a PolarField,
    mid: &'a PolarField,
    next: &'a PolarField,
    dt: f64,
}

fn time_stencil(slices: &[PolarField]) -> Result<TimeStencil<'_>> {
    if slices.len() < 3 {
        return Err(Error::Usage(format!(
            "need at least 3 time slices, got {}",
            slices.len()
        )));
    }
    let first = &slices[0];
    for s in slices {
        if !s.grid.same_as(&first.grid) {
            return Err(Error::Usage("time slices live on different grids".into()));
        }
        if s.mode != first.mode {
            return Err(Error::Usage("time slices mix amplitude modes".into()));
        }
    }
    let step = slices[1].time - slices[0].time;
    if !(step > 0.0) {
        return Err(Error::Usage("slice times must increase".into()));
    }
    for w in slices.windows(2) {
        let d = w[1].time - w[0].time;
        if (d - step).abs() > 1e-9 * step.abs().max(w[1].time.abs()) {
            return Err(Error::Usage(format!("slice times are not uniform ({d} vs {step})")));
        }
    }
    let m = slices.len() / 2;
    Ok(TimeStencil {
        prev: &slices[m - 1],
        mid: &slices[m],
        next: &slices[m + 1],
        dt: (slices[m + 1].time - slices[m - 1].time) / 2.0,
    })
}

/// Grows a mask so every point whose stencil touches a node is masked.
fn dilate(mask: &[bool], stencil: &Stencil) -> Vec<bool> {
    (0..mask.len())
        .map(|i| {
            let mut hit = mask[i];
            stencil.for_each_tap(i, |j, _| hit |= mask[j]);
            hit
        })
        .collect()
}

/// Centred time derivative of the phase. Each point's increment is reduced
/// to the branch nearest zero, assuming `|dS/dt| * 2 dt` stays below half a
/// phase period.
fn phase_rate(ts: &TimeStencil, params: &PhysicalParams) -> Vec<f64> {
    let period = match ts.mid.mode {
        AmplitudeMode::NonNegative => 2.0 * std::f64::consts::PI * params.hbar,
        AmplitudeMode::Signed => std::f64::consts::PI * params.hbar,
    };
    ts.next
        .phase
        .iter()
        .zip(&ts.prev.phase)
        .map(|(p, q)| {
            let d = p - q;
            (d - period * (d / period).round()) / (2.0 * ts.dt)
        })
        .collect()
}

/// Quantum Hamilton-Jacobi residual `(S')^2/2m + V_B + V + dS/dt` at the
/// middle slice. `potential` holds the external potential sampled at the
/// middle slice's time.
pub fn qhj_residual(
    slices: &[PolarField],
    potential: &[f64],
    params: &PhysicalParams,
    opts: &BohmOptions,
) -> Result<Residual> {
    let ts = time_stencil(slices)?;
    let grid = ts.mid.grid;
    if potential.len() != grid.n {
        return Err(Error::Usage("potential length does not match the grid".into()));
    }
    let vb = bohm_potential(ts.mid, params, opts)?;
    let d1 = opts.phase_stencil(&grid, DerivOrder::First)?;
    let s_x = d1.apply(&ts.mid.phase);
    let s_t = phase_rate(&ts, params);
    let mask = dilate(&vb.mask, &d1);
    let values = (0..grid.n)
        .map(|i| {
            if mask[i] {
                0.0
            } else {
                s_x[i] * s_x[i] / (2.0 * params.mass) + vb.values[i] + potential[i] + s_t[i]
            }
        })
        .collect();
    Residual::new(values, mask, grid, ts.mid.time)
}

/// Continuity residual `(A^2 S')'/m + d(A^2)/dt` at the middle slice. The
/// divergence is expanded as `2 A A' S' + A^2 S''` so that no derivative is
/// taken of an already differenced quantity.
pub fn continuity_residual(slices: &[PolarField], params: &PhysicalParams, opts: &BohmOptions) -> Result<Residual> {
    params.validate()?;
    let ts = time_stencil(slices)?;
    let grid = ts.mid.grid;
    let (nodes, _) = node_mask(ts.mid, opts);
    let d1 = opts.phase_stencil(&grid, DerivOrder::First)?;
    let d2 = opts.phase_stencil(&grid, DerivOrder::Second)?;
    let s_x = d1.apply(&ts.mid.phase);
    let s_xx = d2.apply(&ts.mid.phase);
    let a = &ts.mid.amplitude;
    let a_x = crate::field::derivative(a, &grid, DerivOrder::First, opts.scheme)?;
    let mask = dilate(&nodes, &d2);
    let values = (0..grid.n)
        .map(|i| {
            if mask[i] {
                return 0.0;
            }
            let div = 2.0 * a[i] * a_x[i] * s_x[i] + a[i] * a[i] * s_xx[i];
            let rate = (ts.next.amplitude[i].powi(2) - ts.prev.amplitude[i].powi(2)) / (2.0 * ts.dt);
            div / params.mass + rate
        })
        .collect();
    Residual::new(values, mask, grid, ts.mid.time)
}

/// Bohm force `-V_B'` and the acceleration it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmForce {
    pub force: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub mask: Vec<bool>,
}

pub fn bohm_force_and_acceleration(
    vb: &BohmPotentialField,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<BohmForce> {
    params.validate()?;
    let free = vb.mask.iter().filter(|m| !**m).count();
    let accuracy = match scheme {
        Scheme::Spectral => 6,
        Scheme::FiniteDifference { accuracy } => accuracy,
    };
    if free < accuracy + 2 {
        return Err(Error::DegenerateField(format!(
            "only {free} unmasked Bohm-potential samples"
        )));
    }
    let (force, mask) = match scheme.stencil(&vb.grid, DerivOrder::First)? {
        Some(d1) => {
            let mask = dilate(&vb.mask, &d1);
            let force: Vec<f64> = (0..vb.grid.n)
                .map(|i| if mask[i] { 0.0 } else { -d1.apply_at(&vb.values, i) })
                .collect();
            (force, mask)
        }
        None => {
            if vb.mask.iter().any(|m| *m) {
                return Err(Error::Usage("spectral force needs an unmasked Bohm potential".into()));
            }
            let d = crate::field::derivative(&vb.values, &vb.grid, DerivOrder::First, scheme)?;
            (d.iter().map(|v| -v).collect(), vb.mask.clone())
        }
    };
    let acceleration = force.iter().map(|f| f / params.mass).collect();
    Ok(BohmForce {
        force,
        acceleration,
        mask,
    })
}

/// A Bohmian trajectory. `truncated` is set when the particle left the grid
/// before the last slice; the samples up to that point are kept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub truncated: bool,
}

struct VelocitySeries<'a> {
    grid: Grid1D,
    times: Vec<f64>,
    fields: Vec<Vec<f64>>,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl VelocitySeries<'_> {
    fn at_slice(&self, k: usize, x: f64) -> Option<f64> {
        if !self.grid.contains(x) {
            return None;
        }
        let dx = self.grid.dx();
        let s = (x - self.grid.x_min) / dx;
        let i = (s.floor() as usize).min(self.grid.n - 2);
        let w = s - i as f64;
        let v = &self.fields[k];
        Some(v[i] * (1.0 - w) + v[i + 1] * w)
    }

    /// Velocity at `x` and a fraction `frac` of the way from slice `k` to
    /// slice `k + 1`.
    fn at(&self, k: usize, frac: f64, x: f64) -> Option<f64> {
        let a = self.at_slice(k, x)?;
        if frac == 0.0 {
            return Some(a);
        }
        let b = self.at_slice(k + 1, x)?;
        Some(a * (1.0 - frac) + b * frac)
    }
}

/// Integrates `dx/dt = S'(x, t)/m` through a uniformly spaced series of
/// polar fields with classical RK4, one step per slice interval. The
/// velocity field is interpolated linearly in `x` and `t`.
pub fn integrate_trajectory(
    series: &[PolarField],
    x0: f64,
    params: &PhysicalParams,
    opts: &BohmOptions,
) -> Result<Trajectory> {
    params.validate()?;
    if series.len() < 2 {
        return Err(Error::Usage("a trajectory needs at least two slices".into()));
    }
    let grid = series[0].grid;
    if !grid.contains(x0) {
        return Err(Error::Usage(format!("start point {x0} lies outside the grid")));
    }
    let step = series[1].time - series[0].time;
    if !(step > 0.0) {
        return Err(Error::Usage("slice times must increase".into()));
    }
    for w in series.windows(2) {
        if !w[1].grid.same_as(&grid) {
            return Err(Error::Usage("slices live on different grids".into()));
        }
        if ((w[1].time - w[0].time) - step).abs() > 1e-9 * step.max(w[1].time.abs()) {
            return Err(Error::Usage("slice times are not uniform".into()));
        }
    }
    let d1 = opts.phase_stencil(&grid, DerivOrder::First)?;
    let velocity = VelocitySeries {
        grid,
        times: series.iter().map(|s| s.time).collect(),
        fields: series
            .iter()
            .map(|s| d1.apply(&s.phase).into_iter().map(|p| p / params.mass).collect())
            .collect(),
        _marker: std::marker::PhantomData,
    };

    let mut x = x0;
    let mut traj = Trajectory {
        times: vec![velocity.times[0]],
        positions: vec![x0],
        velocities: vec![velocity.at(0, 0.0, x0).expect("start point inside grid")],
        truncated: false,
    };
    for k in 0..series.len() - 1 {
        let h = velocity.times[k + 1] - velocity.times[k];
        let stage = || -> Option<(f64, f64)> {
            let k1 = velocity.at(k, 0.0, x)?;
            let k2 = velocity.at(k, 0.5, x + 0.5 * h * k1)?;
            let k3 = velocity.at(k, 0.5, x + 0.5 * h * k2)?;
            let k4 = velocity.at(k + 1, 0.0, x + h * k3)?;
            let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            Some((next, velocity.at(k + 1, 0.0, next)?))
        };
        match stage() {
            Some((next, v)) => {
                x = next;
                traj.times.push(velocity.times[k + 1]);
                traj.positions.push(x);
                traj.velocities.push(v);
            }
            None => {
                traj.truncated = true;
                break;
            }
        }
    }
    Ok(traj)
}

/// Least-squares fit `x(t) = c0 + c1 t + c2 t^2`; returns `[c0, c1, c2]`.
pub fn fit_quadratic(times: &[f64], values: &[f64]) -> Result<[f64; 3]> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::Usage("quadratic fit needs at least three (t, x) pairs".into()));
    }
    // Centre and scale t for conditioning.
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let t_scale = times
        .iter()
        .map(|t| (t - t_mean).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (t, y) in times.iter().zip(values) {
        let u = (t - t_mean) / t_scale;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            rhs[r] += basis[r] * y;
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
        }
    }
    let [b0, b1, b2] = solve3(m, rhs)?;
    // Back to powers of t.
    let c2 = b2 / (t_scale * t_scale);
    let c1 = b1 / t_scale - 2.0 * c2 * t_mean;
    let c0 = b0 - b1 * t_mean / t_scale + c2 * t_mean * t_mean;
    Ok([c0, c1, c2])
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::Evaluation("singular least-squares system".into()));
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| m[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / m[row][row];
    }
    Ok(x)
}
