//! Gauge transformations between the `u`, `v` and `w` representations.

use crate::error::{Error, Result};
use crate::grid::{ComplexField, C64};

/// `F(x) = int_{-L/2}^x |f|^2`, sampled at the nodes.
///
/// The antiderivative is taken in Fourier space (mean part integrated
/// exactly, oscillatory part divided by `ik`), so it is spectrally accurate
/// for smooth integrands and its full-box increment equals the trapezoid sum.
pub fn cumulative_mass_primitive(f: &ComplexField) -> ComplexField {
    let grid = f.grid();
    let n = grid.len();
    let mut spec: Vec<C64> = f.values().iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
    grid.fft(&mut spec);
    let mean = spec[0].re / n as f64;
    spec[0] = C64::new(0.0, 0.0);
    for (j, z) in spec.iter_mut().enumerate() {
        let sym = grid.first_derivative_symbol(j);
        *z = if sym.norm_sqr() > 0.0 { *z / sym } else { C64::new(0.0, 0.0) };
    }
    grid.ifft(&mut spec);
    let x0 = grid.nodes()[0];
    let offset = spec[0].re;
    let values = grid
        .nodes()
        .iter()
        .zip(&spec)
        .map(|(&x, p)| C64::new(mean * (x - x0) + p.re - offset, 0.0))
        .collect();
    ComplexField::from_vec_unchecked(grid, values)
}

fn apply_gauge(f: &ComplexField, sign: f64) -> ComplexField {
    let primitive = cumulative_mass_primitive(f);
    let values = f
        .values()
        .iter()
        .zip(primitive.values())
        .map(|(&z, p)| z * C64::from_polar(1.0, sign * 0.75 * p.re))
        .collect();
    ComplexField::from_vec_unchecked(f.grid(), values)
}

/// `v = exp(-(3/4) i int_{-L/2}^x |u|^2) u`.
pub fn gauge_u_to_v(u: &ComplexField) -> ComplexField {
    apply_gauge(u, -1.0)
}

/// Inverse of [`gauge_u_to_v`]; the primitive only depends on `|v| = |u|`.
pub fn gauge_v_to_u(v: &ComplexField) -> ComplexField {
    apply_gauge(v, 1.0)
}

/// `w(t, x) = exp(-it + ix) v(t, x - 2t)`.
///
/// The carrier is stripped before translating, `w = e^{it} h(x - 2t)` with
/// `h = e^{ix} v`, so the spectral shift acts on the slowly varying envelope.
pub fn v_to_w(v: &ComplexField, t: f64) -> Result<ComplexField> {
    let grid = v.grid();
    let mass: f64 = v.values().iter().map(|z| z.norm_sqr()).sum();
    if mass > 0.0 {
        let centroid: f64 = grid
            .nodes()
            .iter()
            .zip(v.values())
            .map(|(&x, z)| x * z.norm_sqr())
            .sum::<f64>()
            / mass;
        if (centroid + 2.0 * t).abs() > 0.25 * grid.length() {
            return Err(Error::OutOfBox(format!(
                "translated centroid {:.4} leaves the central half of the box",
                centroid + 2.0 * t
            )));
        }
    }
    let envelope = v.map_with_x(|x, z| z * C64::from_polar(1.0, x));
    let shifted = if t == 0.0 { envelope } else { envelope.shifted(2.0 * t) };
    Ok(shifted.scale(C64::from_polar(1.0, t)))
}
