use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::Grid1D;

/// Angular wavenumbers in FFT order for a periodic grid.
pub(crate) fn wavenumbers(grid: &Grid1D) -> Vec<f64> {
    let n = grid.n;
    let dk = 2.0 * PI / grid.length();
    (0..n)
        .map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dk)
        .collect()
}

pub(super) fn derivative(values: &[f64], grid: &Grid1D, order: usize) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    forward.process(&mut buf);
    let ks = wavenumbers(grid);
    for (j, (c, k)) in buf.iter_mut().zip(&ks).enumerate() {
        // The Nyquist mode has no odd-derivative partner on a real grid.
        if n % 2 == 0 && j == n / 2 && order % 2 == 1 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, *k);
        *c *= ik.powu(order as u32);
    }
    inverse.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}
