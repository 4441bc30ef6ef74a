//! Uniform grids, sampled wavefunctions and their Madelung (polar) form.

mod io;
pub(crate) mod spectral;
pub mod stencil;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use io::{write_complex_csv, write_polar_csv};
pub use stencil::Stencil;

use crate::{Error, Result};

/// Relative amplitude below which a sample counts as a node.
pub const NODE_THRESHOLD: f64 = 1e-8;

/// A uniform one-dimensional grid.
///
/// Periodic grids hold `n` distinct points `x_min + i dx` with
/// `dx = (x_max - x_min) / n`; `x_max` is the image of `x_min`. Non-periodic
/// grids include both ends and use `dx = (x_max - x_min) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub periodic: bool,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize, periodic: bool) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Usage(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 8 {
            return Err(Error::Usage(format!("grid needs at least 8 points, got {n}")));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n,
            periodic,
        })
    }

    /// Non-periodic grid on `[x_min, x_max]` with spacing as close to `dx`
    /// as an integer point count allows.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        let cells = ((x_max - x_min) / dx).round() as usize;
        Grid1D::new(x_min, x_max, cells + 1, false)
    }

    pub fn periodic(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Grid1D::new(x_min, x_max, n, true)
    }

    pub fn dx(&self) -> f64 {
        if self.periodic {
            (self.x_max - self.x_min) / self.n as f64
        } else {
            (self.x_max - self.x_min) / (self.n - 1) as f64
        }
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Whether `x` lies inside the sampled interval.
    pub fn contains(&self, x: f64) -> bool {
        let hi = if self.periodic {
            self.x_max - self.dx()
        } else {
            self.x_max
        };
        x >= self.x_min && x <= hi
    }

    /// Quadrature weights: uniform on periodic grids, trapezoid otherwise.
    pub fn weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n];
        if !self.periodic {
            w[0] *= 0.5;
            w[self.n - 1] *= 0.5;
        }
        w
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && self.periodic == other.periodic
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.length()
            && (self.x_max - other.x_max).abs() <= 1e-12 * self.length()
    }
}

/// Planck's constant and particle mass. Natural units (`hbar = m = 1`) by
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let p = PhysicalParams { hbar, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn natural() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::Usage(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::Usage(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }
}

/// A sampled wavefunction at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Usage(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(format!("non-finite sample at index {i}")));
        }
        Ok(ComplexField { grid, values, time })
    }

    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        ComplexField::new(grid, values, time)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            time: self.time,
        }
    }

    /// Returns a copy rescaled to unit norm.
    pub fn normalized(&self) -> Result<ComplexField> {
        let n = norm(self);
        if n == 0.0 {
            return Err(Error::DegenerateField("cannot normalise a zero field".into()));
        }
        Ok(self.scaled(1.0 / n))
    }
}

/// How the Madelung amplitude handles sign changes of the wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeMode {
    /// `A` may change sign; the phase is then defined modulo `pi hbar` and
    /// stays smooth through simple zeros of real wavefunctions.
    Signed,
    /// `A = |psi| >= 0`; the phase is defined modulo `2 pi hbar`.
    NonNegative,
}

/// The polar form `psi = A exp(iS/hbar)` of a sampled wavefunction.
/// `phase` carries action units.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    pub grid: Grid1D,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub mode: AmplitudeMode,
    pub time: f64,
}

impl PolarField {
    pub fn new(grid: Grid1D, amplitude: Vec<f64>, phase: Vec<f64>, mode: AmplitudeMode, time: f64) -> Result<Self> {
        if amplitude.len() != grid.n || phase.len() != grid.n {
            return Err(Error::Usage("amplitude/phase length does not match the grid".into()));
        }
        if let Some(i) = amplitude.iter().chain(&phase).position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite polar sample at flat index {i}")));
        }
        if mode == AmplitudeMode::NonNegative {
            if let Some(i) = amplitude.iter().position(|a| *a < 0.0) {
                return Err(Error::Usage(format!(
                    "negative amplitude at index {i} in non-negative mode"
                )));
            }
        }
        Ok(PolarField {
            grid,
            amplitude,
            phase,
            mode,
            time,
        })
    }

    pub fn max_abs_amplitude(&self) -> f64 {
        self.amplitude.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Points with `|A| <= threshold * max|A|`.
    pub fn node_mask(&self, threshold: f64) -> Vec<bool> {
        let cut = threshold * self.max_abs_amplitude();
        self.amplitude.iter().map(|a| a.abs() <= cut).collect()
    }
}

/// Splits `psi` into amplitude and unwrapped phase.
///
/// The phase is unwrapped left to right, each sample taking the branch
/// nearest the last non-node sample. The first sample is anchored in
/// `(-pi hbar, pi hbar]`, or `(-pi hbar / 2, pi hbar / 2]` in signed mode,
/// where a branch shift by `pi hbar` is paid for by flipping the sign of
/// `A`.
pub fn polar_decompose(psi: &ComplexField, params: &PhysicalParams, mode: AmplitudeMode) -> Result<PolarField> {
    params.validate()?;
    let max = psi.max_abs();
    if max == 0.0 {
        return Err(Error::DegenerateField("all-zero wavefunction has no polar form".into()));
    }
    let cut = NODE_THRESHOLD * max;
    let period = match mode {
        AmplitudeMode::NonNegative => 2.0 * PI,
        AmplitudeMode::Signed => PI,
    };
    let n = psi.values.len();
    let mut amplitude = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    let mut reference: Option<f64> = None;
    for v in &psi.values {
        let theta = v.arg();
        let modulus = v.norm();
        let anchor = reference.unwrap_or(0.0);
        let shift = ((anchor - theta) / period).round();
        let unwrapped = theta + shift * period;
        let flipped = mode == AmplitudeMode::Signed && (shift as i64).rem_euclid(2) == 1;
        amplitude.push(if flipped { -modulus } else { modulus });
        phase.push(params.hbar * unwrapped);
        if modulus > cut {
            reference = Some(unwrapped);
        }
    }
    PolarField::new(psi.grid, amplitude, phase, mode, psi.time)
}

/// Inverse of [`polar_decompose`]: `psi = A exp(iS/hbar)` pointwise.
pub fn recompose(polar: &PolarField, params: &PhysicalParams) -> Result<ComplexField> {
    params.validate()?;
    let values = polar
        .amplitude
        .iter()
        .zip(&polar.phase)
        .map(|(a, s)| Complex64::from_polar(1.0, s / params.hbar) * *a)
        .collect();
    ComplexField::new(polar.grid, values, polar.time)
}

/// Derivative order accepted by [`derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

impl DerivOrder {
    pub fn as_usize(self) -> usize {
        match self {
            DerivOrder::First => 1,
            DerivOrder::Second => 2,
        }
    }
}

impl TryFrom<u32> for DerivOrder {
    type Error = Error;
    fn try_from(order: u32) -> Result<Self> {
        match order {
            1 => Ok(DerivOrder::First),
            2 => Ok(DerivOrder::Second),
            other => Err(Error::Usage(format!("derivative order must be 1 or 2, got {other}"))),
        }
    }
}

/// Spatial differentiation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Fourier differentiation; periodic grids only.
    Spectral,
    /// Finite differences of the given even accuracy order. Accuracy 2 is
    /// the classic central / one-sided second-order scheme.
    FiniteDifference { accuracy: usize },
}

impl Scheme {
    pub const FD2: Scheme = Scheme::FiniteDifference { accuracy: 2 };
    pub const FD6: Scheme = Scheme::FiniteDifference { accuracy: 6 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::Spectral => Ok(()),
            Scheme::FiniteDifference { accuracy } if accuracy >= 2 && accuracy <= 12 && accuracy % 2 == 0 => Ok(()),
            Scheme::FiniteDifference { accuracy } => Err(Error::Usage(format!(
                "finite-difference accuracy must be even in 2..=12, got {accuracy}"
            ))),
        }
    }

    /// Builds the stencil for finite-difference schemes.
    pub fn stencil(&self, grid: &Grid1D, order: DerivOrder) -> Result<Option<Stencil>> {
        self.validate()?;
        match *self {
            Scheme::Spectral => Ok(None),
            Scheme::FiniteDifference { accuracy } => {
                if grid.n < accuracy + 2 {
                    return Err(Error::Usage(format!(
                        "grid of {} points too small for accuracy {accuracy}",
                        grid.n
                    )));
                }
                Ok(Some(Stencil::new(
                    grid.n,
                    grid.dx(),
                    order.as_usize(),
                    accuracy,
                    grid.periodic,
                )))
            }
        }
    }
}

/// First or second derivative of real samples.
pub fn derivative(values: &[f64], grid: &Grid1D, order: DerivOrder, scheme: Scheme) -> Result<Vec<f64>> {
    if values.len() != grid.n {
        return Err(Error::Usage(format!(
            "{} samples for a grid of {} points",
            values.len(),
            grid.n
        )));
    }
    match scheme.stencil(grid, order)? {
        Some(stencil) => Ok(stencil.apply(values)),
        None => {
            if !grid.periodic {
                return Err(Error::Usage("spectral derivatives need a periodic grid".into()));
            }
            Ok(spectral::derivative(values, grid, order.as_usize()))
        }
    }
}

/// `sqrt(sum |psi|^2 w)` with trapezoid weights on non-periodic grids.
pub fn norm(psi: &ComplexField) -> f64 {
    psi.grid
        .weights()
        .iter()
        .zip(&psi.values)
        .map(|(w, v)| w * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}
