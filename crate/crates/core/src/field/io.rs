use std::io::Write;

use super::{ComplexField, PolarField};
use crate::Result;

/// Writes `x,re,im` rows with 17 significant digits.
pub fn write_complex_csv<W: Write>(mut w: W, field: &ComplexField) -> Result<()> {
    writeln!(w, "x,re,im")?;
    for (i, v) in field.values.iter().enumerate() {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", field.grid.x(i), v.re, v.im)?;
    }
    Ok(())
}

/// Writes `x,A,S` rows with 17 significant digits.
pub fn write_polar_csv<W: Write>(mut w: W, field: &PolarField) -> Result<()> {
    writeln!(w, "x,A,S")?;
    for (i, (a, s)) in field.amplitude.iter().zip(&field.phase).enumerate() {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", field.grid.x(i), a, s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::field::{AmplitudeMode, Grid1D};

    #[test]
    fn csv_layout_and_precision() {
        let grid = Grid1D::new(0.0, 7.0, 8, false).unwrap();
        let third = 1.0 / 3.0;
        let psi = ComplexField::new(grid, vec![Complex64::new(third, -2.0); 8], 0.0).unwrap();
        let mut out = Vec::new();
        write_complex_csv(&mut out, &psi).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,re,im");
        assert_eq!(lines.len(), 9);
        let cols: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cols[1], "3.3333333333333331e-1");
        assert_eq!(cols[1].parse::<f64>().unwrap(), third);

        let polar = PolarField::new(grid, vec![1.0; 8], vec![0.5; 8], AmplitudeMode::Signed, 0.0).unwrap();
        let mut out = Vec::new();
        write_polar_csv(&mut out, &polar).unwrap();
        assert!(String::from_utf8(out)
            .unwrap()
            .starts_with("x,A,S\n0.0000000000000000e0,"));
    }
}
