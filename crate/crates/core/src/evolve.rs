//! Strang split-step Fourier propagator for
//! `i hbar psi_t = -(hbar^2 / 2m) psi'' + V psi` on periodic grids, and
//! the observables used to check it.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::field::spectral::wavenumbers;
use crate::field::{ComplexField, Grid1D, PhysicalParams};
use crate::{Error, Result};

/// External potential seen by the propagator.
pub enum PotentialSampler {
    /// Samples on the grid, fixed in time.
    Static(Vec<f64>),
    /// `V(x, t)`, evaluated at the midpoint of each step.
    TimeDependent(Box<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl PotentialSampler {
    pub fn zero(grid: &Grid1D) -> Self {
        PotentialSampler::Static(vec![0.0; grid.n])
    }

    pub fn from_fn(grid: &Grid1D, v: impl Fn(f64) -> f64) -> Self {
        PotentialSampler::Static(grid.points().into_iter().map(v).collect())
    }

    /// Samples at time `t`.
    pub fn sample(&self, grid: &Grid1D, t: f64) -> Vec<f64> {
        match self {
            PotentialSampler::Static(v) => v.clone(),
            PotentialSampler::TimeDependent(f) => grid.points().iter().map(|x| f(*x, t)).collect(),
        }
    }
}

impl fmt::Debug for PotentialSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSampler::Static(v) => write!(f, "Static({} samples)", v.len()),
            PotentialSampler::TimeDependent(_) => write!(f, "TimeDependent(..)"),
        }
    }
}

#[derive(Debug)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub steps: usize,
    pub potential: PotentialSampler,
    /// Snapshot stride in steps.
    pub record_every: usize,
}

impl PropagatorConfig {
    pub fn free(grid: &Grid1D, dt: f64, steps: usize, record_every: usize) -> Self {
        PropagatorConfig {
            dt,
            steps,
            potential: PotentialSampler::zero(grid),
            record_every,
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Usage(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::Usage("steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Usage("record_every must be at least 1".into()));
        }
        if let PotentialSampler::Static(v) = &self.potential {
            if v.len() != grid.n {
                return Err(Error::Usage(format!(
                    "potential has {} samples for {} grid points",
                    v.len(),
                    grid.n
                )));
            }
        }
        Ok(())
    }
}

/// One Strang step's worth of precomputed transforms and phase factors.
struct SplitStep {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    fn new(grid: &Grid1D, dt: f64, params: &PhysicalParams) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n);
        let inverse = planner.plan_fft_inverse(grid.n);
        let scratch =
            vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        let inv_n = 1.0 / grid.n as f64;
        let kinetic = wavenumbers(grid)
            .iter()
            .map(|k| Complex64::from_polar(inv_n, -params.hbar * k * k * dt / (2.0 * params.mass)))
            .collect();
        SplitStep {
            forward,
            inverse,
            kinetic,
            scratch,
        }
    }

    fn step(&mut self, psi: &mut [Complex64], half_kick: &[Complex64]) {
        psi.iter_mut().zip(half_kick).for_each(|(p, k)| *p *= k);
        self.forward.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.kinetic).for_each(|(p, k)| *p *= k);
        self.inverse.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(half_kick).for_each(|(p, k)| *p *= k);
    }
}

fn half_kick(v: &[f64], dt: f64, params: &PhysicalParams) -> Vec<Complex64> {
    v.iter()
        .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * params.hbar)))
        .collect()
}

fn check_grid(grid: &Grid1D) -> Result<()> {
    if !grid.periodic {
        return Err(Error::Usage("the split-step propagator needs a periodic grid".into()));
    }
    if !grid.n.is_power_of_two() {
        return Err(Error::Usage(format!("grid size {} is not a power of two", grid.n)));
    }
    Ok(())
}

/// Propagates `psi0` and returns the snapshots at steps `0, record_every,
/// 2 record_every, ...` plus the final step.
pub fn evolve(psi0: &ComplexField, cfg: &PropagatorConfig, params: &PhysicalParams) -> Result<Vec<ComplexField>> {
    params.validate()?;
    let grid = psi0.grid;
    check_grid(&grid)?;
    cfg.validate(&grid)?;
    let mut stepper = SplitStep::new(&grid, cfg.dt, params);
    let static_kick = match &cfg.potential {
        PotentialSampler::Static(v) => Some(half_kick(v, cfg.dt, params)),
        PotentialSampler::TimeDependent(_) => None,
    };
    let mut psi = psi0.values.clone();
    let mut series = vec![psi0.clone()];
    for step in 1..=cfg.steps {
        let t_start = psi0.time + (step - 1) as f64 * cfg.dt;
        match &static_kick {
            Some(kick) => stepper.step(&mut psi, kick),
            None => {
                let v = cfg.potential.sample(&grid, t_start + 0.5 * cfg.dt);
                stepper.step(&mut psi, &half_kick(&v, cfg.dt, params));
            }
        }
        if psi.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::Divergence { step });
        }
        if step % cfg.record_every == 0 || step == cfg.steps {
            series.push(ComplexField {
                grid,
                values: psi.clone(),
                time: psi0.time + step as f64 * cfg.dt,
            });
        }
    }
    Ok(series)
}

/// Multiplies `psi` by a cosine taper that falls from 1 to 0 over the outer
/// `fraction` of the box on each side.
pub fn apodize(psi: &ComplexField, fraction: f64) -> Result<ComplexField> {
    if !(0.0..0.5).contains(&fraction) {
        return Err(Error::Usage(format!(
            "taper fraction must lie in [0, 0.5), got {fraction}"
        )));
    }
    let grid = psi.grid;
    let width = fraction * grid.length();
    let values = psi
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = grid.x(i);
            let edge = (x - grid.x_min).min(grid.x_max - x);
            if edge >= width {
                *v
            } else {
                *v * 0.5 * (1.0 - (std::f64::consts::PI * edge / width).cos())
            }
        })
        .collect();
    Ok(ComplexField { values, ..psi.clone() })
}

/// Per-snapshot measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub t: f64,
    pub norm: f64,
    /// `<H> / <psi|psi>`, kinetic part from the spectrum.
    pub energy: f64,
    /// Maximum of `|psi|^2`, refined by a parabola through `log|psi|^2`.
    pub x_peak: f64,
    pub x_mean: f64,
}

pub fn observables(psi: &ComplexField, potential: &[f64], params: &PhysicalParams) -> Result<Observables> {
    params.validate()?;
    let grid = psi.grid;
    check_grid(&grid)?;
    if potential.len() != grid.n {
        return Err(Error::Usage("potential length does not match the grid".into()));
    }
    let dx = grid.dx();
    let density: Vec<f64> = psi.values.iter().map(|v| v.norm_sqr()).collect();
    let norm = density.iter().sum::<f64>() * dx;
    if norm == 0.0 {
        return Err(Error::DegenerateField("observables of a zero wavefunction".into()));
    }
    let mut spectrum = psi.values.clone();
    FftPlanner::new().plan_fft_forward(grid.n).process(&mut spectrum);
    let kinetic = spectrum
        .iter()
        .zip(wavenumbers(&grid))
        .map(|(c, k)| params.hbar * params.hbar * k * k / (2.0 * params.mass) * c.norm_sqr())
        .sum::<f64>()
        * dx
        / grid.n as f64;
    let pot = density.iter().zip(potential).map(|(d, v)| d * v).sum::<f64>() * dx;
    let x_mean = density.iter().enumerate().map(|(i, d)| grid.x(i) * d).sum::<f64>() * dx / norm;
    Ok(Observables {
        t: psi.time,
        norm,
        energy: (kinetic + pot) / norm,
        x_peak: peak_position(&density, &grid),
        x_mean,
    })
}

fn peak_position(density: &[f64], grid: &Grid1D) -> f64 {
    let n = density.len();
    let i = (0..n).max_by(|&a, &b| density[a].total_cmp(&density[b])).unwrap_or(0);
    let (l, c, r) = (density[(i + n - 1) % n], density[i], density[(i + 1) % n]);
    if l <= 0.0 || r <= 0.0 {
        return grid.x(i);
    }
    let (l, c, r) = (l.ln(), c.ln(), r.ln());
    let curvature = l - 2.0 * c + r;
    let offset = if curvature < 0.0 {
        0.5 * (l - r) / curvature
    } else {
        0.0
    };
    grid.x(i) + offset * grid.dx()
}

/// [`observables`] for every snapshot, sampling the potential at each
/// snapshot time.
pub fn observables_series(
    series: &[ComplexField],
    potential: &PotentialSampler,
    params: &PhysicalParams,
) -> Result<Vec<Observables>> {
    series
        .iter()
        .map(|psi| observables(psi, &potential.sample(&psi.grid, psi.time), params))
        .collect()
}

/// Long-format snapshot CSV with header `t,x,re,im`.
pub fn write_snapshots_csv<W: Write>(mut w: W, series: &[ComplexField]) -> Result<()> {
    writeln!(w, "t,x,re,im")?;
    for psi in series {
        for (i, v) in psi.values.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                psi.time,
                psi.grid.x(i),
                v.re,
                v.im
            )?;
        }
    }
    Ok(())
}

/// JSON array of `{t, norm, energy, x_peak, x_mean}` objects.
pub fn write_observables_json<W: Write>(mut w: W, obs: &[Observables]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, obs)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gaussian_packet, ho_eigenstate};
    use crate::field::{norm, recompose};
    use std::f64::consts::PI;

    fn unit() -> PhysicalParams {
        PhysicalParams::natural()
    }

    #[test]
    fn plane_wave_free_evolution_is_exact() {
        let g = Grid1D::periodic(0.0, 2.0 * PI, 64).unwrap();
        let k = 3.0;
        let psi0 = ComplexField::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x)).unwrap();
        let series = evolve(&psi0, &PropagatorConfig::free(&g, 1e-3, 1000, 1000), &unit()).unwrap();
        let last = series.last().unwrap();
        assert!((last.time - 1.0).abs() < 1e-12);
        for (a, b) in last.values.iter().zip(&psi0.values) {
            let want = b * Complex64::from_polar(1.0, -k * k * last.time / 2.0);
            assert!((a - want).norm() < 1e-8);
        }
    }

    #[test]
    fn snapshot_stride_and_final_step() {
        let g = Grid1D::periodic(-10.0, 10.0, 64).unwrap();
        let psi0 = gaussian_packet(1.0, 0.0, 0.0, &g).unwrap();
        let series = evolve(&psi0, &PropagatorConfig::free(&g, 0.01, 25, 10), &unit()).unwrap();
        let times: Vec<f64> = series.iter().map(|s| s.time).collect();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.25).abs() < 1e-12);
    }

    fn ground_state_density_deviation(dt: f64) -> (f64, f64) {
        let g = Grid1D::periodic(-16.0, 16.0, 256).unwrap();
        let s = ho_eigenstate(0, 1.0, &g, 0.0, &unit()).unwrap();
        let psi0 = recompose(&s.polar, &unit()).unwrap();
        let steps = (2.0 * PI / dt).round() as usize;
        let cfg = PropagatorConfig {
            dt,
            steps,
            potential: PotentialSampler::Static(s.potential.clone()),
            record_every: steps / 20,
        };
        let series = evolve(&psi0, &cfg, &unit()).unwrap();
        let obs = observables_series(&series, &cfg.potential, &unit()).unwrap();
        let e0 = obs[0].energy;
        assert!((e0 - 0.5).abs() < 1e-10);
        for o in &obs {
            assert!((o.norm - 1.0).abs() < 1e-12);
            assert!(((o.energy - e0) / e0).abs() < 1e-10);
        }
        let deviation = |psi: &ComplexField| {
            psi.values
                .iter()
                .zip(&psi0.values)
                .fold(0.0_f64, |m, (a, b)| m.max((a.norm_sqr() - b.norm_sqr()).abs()))
        };
        let half = series.len() / 2;
        let early = series[..half].iter().map(deviation).fold(0.0, f64::max);
        let late = series[half..].iter().map(deviation).fold(0.0, f64::max);
        (early, late)
    }

    #[test]
    fn ground_state_is_stationary_up_to_the_splitting_offset() {
        // The split-step eigenstate differs from the exact one by O(dt^2),
        // so |psi|^2 carries a bounded offset of that size which does not
        // grow over the period.
        let (early, late) = ground_state_density_deviation(1e-3);
        assert!(early.max(late) < 1e-7, "{early:e} {late:e}");
        assert!(late < 1.5 * early);
        let (coarse, _) = ground_state_density_deviation(2e-3);
        let ratio = coarse / early;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn free_gaussian_centre_moves_at_group_velocity() {
        let g = Grid1D::periodic(-30.0, 30.0, 1024).unwrap();
        let psi0 = gaussian_packet(1.0, 2.0, -5.0, &g).unwrap();
        let cfg = PropagatorConfig::free(&g, 1e-3, 2000, 100);
        let series = evolve(&psi0, &cfg, &unit()).unwrap();
        let obs = observables_series(&series, &cfg.potential, &unit()).unwrap();
        let ts: Vec<f64> = obs.iter().map(|o| o.t).collect();
        let xs: Vec<f64> = obs.iter().map(|o| o.x_mean).collect();
        let c = crate::bohm::fit_quadratic(&ts, &xs).unwrap();
        assert!((c[1] - 2.0).abs() < 1e-6 && c[2].abs() < 1e-6, "{c:?}");
        assert!((obs[0].x_peak + 5.0).abs() < 1e-3);
        assert!((obs[0].energy - (2.0 + 1.0 / 8.0)).abs() < 1e-10);
    }

    #[test]
    fn time_dependent_potential_and_divergence() {
        let g = Grid1D::periodic(-10.0, 10.0, 128).unwrap();
        let psi0 = gaussian_packet(1.0, 0.0, 0.0, &g).unwrap();
        let cfg = PropagatorConfig {
            dt: 0.01,
            steps: 100,
            potential: PotentialSampler::TimeDependent(Box::new(|x, t| if t > 0.5 { f64::NAN } else { x * x })),
            record_every: 10,
        };
        match evolve(&psi0, &cfg, &unit()) {
            Err(Error::Divergence { step }) => assert_eq!(step, 51),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        let psi = gaussian_packet(1.0, 0.0, 0.0, &Grid1D::periodic(-10.0, 10.0, 100).unwrap()).unwrap();
        let cfg = PropagatorConfig::free(&psi.grid, 0.01, 10, 1);
        assert!(matches!(evolve(&psi, &cfg, &unit()), Err(Error::Usage(_))));
        let g = Grid1D::periodic(-10.0, 10.0, 128).unwrap();
        let psi = gaussian_packet(1.0, 0.0, 0.0, &g).unwrap();
        for cfg in [
            PropagatorConfig::free(&g, 0.0, 10, 1),
            PropagatorConfig::free(&g, 0.01, 0, 1),
            PropagatorConfig::free(&g, 0.01, 10, 0),
        ] {
            assert!(matches!(evolve(&psi, &cfg, &unit()), Err(Error::Usage(_))));
        }
    }

    #[test]
    fn taper_shape() {
        let g = Grid1D::periodic(-10.0, 10.0, 256).unwrap();
        let flat = ComplexField::from_fn(g, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let tapered = apodize(&flat, 0.1).unwrap();
        assert_eq!(tapered.values[0].re, 0.0);
        assert_eq!(tapered.values[128].re, 1.0);
        assert!(tapered.values.iter().all(|v| (0.0..=1.0).contains(&v.re)));
        assert!(norm(&tapered) < norm(&flat));
    }

    #[test]
    fn writers_emit_expected_headers() {
        let g = Grid1D::periodic(-1.0, 1.0, 8).unwrap();
        let psi = gaussian_packet(0.5, 0.0, 0.0, &g).unwrap();
        let mut csv = Vec::new();
        write_snapshots_csv(&mut csv, &[psi.clone(), psi.clone()]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,x,re,im\n"));
        assert_eq!(text.lines().count(), 17);
        let obs = observables(&psi, &[0.0; 8], &unit()).unwrap();
        let mut json = Vec::new();
        write_observables_json(&mut json, &[obs]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        for key in ["t", "norm", "energy", "x_peak", "x_mean"] {
            assert!(v[0].get(key).is_some());
        }
    }
}
