//! Periodic one-dimensional grid and complex sample fields.
//!
//! The real line is truncated to the box `[-L/2, L/2)` sampled at `N` uniform
//! nodes. Derivatives are Fourier multipliers, integrals are trapezoid sums
//! (which coincide with the discrete Parseval pairing), and every nonlinear
//! product can be dealiased with the 2/3 rule.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

struct GridInner {
    length: f64,
    n: usize,
    dx: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    dealias: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid with its discrete Fourier basis.
///
/// Cloning is cheap: the node table and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 16, got {n}"
            )));
        }
        let dx = length / n as f64;
        let nodes = (0..n).map(|m| -0.5 * length + m as f64 * dx).collect();
        let dk = 2.0 * PI / length;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|j| {
                if j < n / 2 {
                    j as f64 * dk
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect();
        let cutoff = (2.0 / 3.0) * PI / dx;
        let dealias = wavenumbers.iter().map(|k| k.abs() <= cutoff).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                length,
                n,
                dx,
                nodes,
                wavenumbers,
                dealias,
                forward,
                inverse,
            }),
        })
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.inner.dx
    }

    /// Nodes `x_m = -L/2 + m dx`.
    pub fn nodes(&self) -> &[f64] {
        &self.inner.nodes
    }

    /// Wavenumbers in FFT order; index `N/2` carries the Nyquist value `-pi/dx`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Nyquist wavenumber `pi/dx`.
    pub fn k_max(&self) -> f64 {
        PI / self.inner.dx
    }

    pub fn nyquist_index(&self) -> usize {
        self.inner.n / 2
    }

    /// Modes kept by the 2/3 rule.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.dealias
    }

    /// Unnormalized forward DFT in place.
    pub fn fft(&self, buf: &mut [C64]) {
        self.inner.forward.process(buf);
    }

    /// Inverse DFT in place, normalized by `1/N`.
    pub fn ifft(&self, buf: &mut [C64]) {
        self.inner.inverse.process(buf);
        let s = 1.0 / self.inner.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// Trapezoid rule on the periodic grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.inner.dx * values.iter().sum::<f64>()
    }

    /// Zeroes the modes removed by the 2/3 rule.
    pub fn apply_dealias(&self, spectrum: &mut [C64]) {
        for (z, &keep) in spectrum.iter_mut().zip(&self.inner.dealias) {
            if !keep {
                *z = C64::new(0.0, 0.0);
            }
        }
    }

    /// Spectral multiplier of `d/dx`. The Nyquist mode is dropped so that
    /// derivatives of real fields stay real.
    pub fn first_derivative_symbol(&self, j: usize) -> C64 {
        if j == self.nyquist_index() {
            C64::new(0.0, 0.0)
        } else {
            I * self.inner.wavenumbers[j]
        }
    }

    /// True when both grids describe the same box and resolution.
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.inner.length)
            .field("n", &self.inner.n)
            .field("dx", &self.inner.dx)
            .finish()
    }
}

/// `make_grid(L, N)`.
pub fn make_grid(length: f64, n: usize) -> Result<Grid> {
    Grid::new(length, n)
}

/// Complex samples on a [`Grid`].
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<C64>,
}

impl ComplexField {
    pub fn new(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Builds a field without the finiteness scan. Callers guarantee the length.
    pub(crate) fn from_vec_unchecked(grid: &Grid, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_vec_unchecked(grid, vec![C64::new(0.0, 0.0); grid.len()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::from_vec_unchecked(grid, values)
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn from_spectrum(grid: &Grid, mut spectrum: Vec<C64>) -> Self {
        grid.ifft(&mut spectrum);
        Self::from_vec_unchecked(grid, spectrum)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Unnormalized DFT of the samples.
    pub fn spectrum(&self) -> Vec<C64> {
        let mut buf = self.values.clone();
        self.grid.fft(&mut buf);
        buf
    }

    pub fn modulus_squared(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_vec_unchecked(&self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    /// Pointwise `f(x, value)`.
    pub fn map_with_x(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &z)| f(x, z))
            .collect();
        Self::from_vec_unchecked(&self.grid, values)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: C64, other: &ComplexField) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + s * b)
            .collect();
        Ok(Self::from_vec_unchecked(&self.grid, values))
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// First spectral derivative.
    pub fn derivative(&self) -> Self {
        let mut spec = self.spectrum();
        for (j, z) in spec.iter_mut().enumerate() {
            *z *= self.grid.first_derivative_symbol(j);
        }
        Self::from_spectrum(&self.grid, spec)
    }

    /// Second spectral derivative (multiplier `-k^2`, Nyquist kept).
    pub fn second_derivative(&self) -> Self {
        let mut spec = self.spectrum();
        for (z, &k) in spec.iter_mut().zip(self.grid.wavenumbers()) {
            *z *= -k * k;
        }
        Self::from_spectrum(&self.grid, spec)
    }

    /// `L^2` inner product `int f conj(g) dx`.
    pub fn inner(&self, other: &ComplexField) -> Result<C64> {
        self.check_same_grid(other)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b.conj())
            .sum();
        Ok(s * self.grid.dx())
    }

    /// Band-limited translate `f(x - y)` via the Fourier shift theorem.
    pub fn shifted(&self, y: f64) -> Self {
        let mut spec = self.spectrum();
        let ny = self.grid.nyquist_index();
        for (j, (z, &k)) in spec.iter_mut().zip(self.grid.wavenumbers()).enumerate() {
            if j == ny {
                *z *= (k * y).cos();
            } else {
                *z *= C64::from_polar(1.0, -k * y);
            }
        }
        Self::from_spectrum(&self.grid, spec)
    }

    /// Integer rotation of the samples, `f(x - m dx)`; exact on the periodic grid.
    pub fn rotated(&self, m: isize) -> Self {
        let n = self.len() as isize;
        let shift = m.rem_euclid(n) as usize;
        let mut values = self.values.clone();
        values.rotate_right(shift);
        Self::from_vec_unchecked(&self.grid, values)
    }

    /// Evaluates the trigonometric interpolant at arbitrary points (periodic in `L`).
    pub fn interpolate(&self, points: &[f64]) -> Vec<C64> {
        let grid = &self.grid;
        let n = grid.len();
        let spec = self.spectrum();
        let x0 = grid.nodes()[0];
        let dk = 2.0 * PI / grid.length();
        let ny = grid.nyquist_index();
        let norm = 1.0 / n as f64;
        points
            .iter()
            .map(|&x| {
                let s = x - x0;
                let step = C64::from_polar(1.0, dk * s);
                let mut acc = spec[0];
                let mut rot = C64::new(1.0, 0.0);
                for j in 1..ny {
                    if j % 64 == 0 {
                        rot = C64::from_polar(1.0, dk * s * j as f64);
                    } else {
                        rot *= step;
                    }
                    acc += spec[j] * rot + spec[n - j] * rot.conj();
                }
                acc += spec[ny] * (dk * s * ny as f64).cos();
                acc * norm
            })
            .collect()
    }
}

/// Norms supported by [`lp_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L2,
    L4,
    L6,
    H1Seminorm,
}

impl Norm {
    pub fn lebesgue(p: u32) -> Result<Norm> {
        match p {
            2 => Ok(Norm::L2),
            4 => Ok(Norm::L4),
            6 => Ok(Norm::L6),
            other => Err(Error::UnsupportedNorm(other.to_string())),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2" | "l2" => Ok(Norm::L2),
            "4" | "l4" => Ok(Norm::L4),
            "6" | "l6" => Ok(Norm::L6),
            "h1-seminorm" | "hdot1" => Ok(Norm::H1Seminorm),
            other => Err(Error::UnsupportedNorm(other.to_string())),
        }
    }
}

/// Fourier-multiplier derivative of order 1 or 2.
pub fn spectral_derivative(f: &ComplexField, order: u32) -> Result<ComplexField> {
    match order {
        1 => Ok(f.derivative()),
        2 => Ok(f.second_derivative()),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Trapezoid integral of the real part of `f`.
pub fn quadrature(f: &ComplexField) -> f64 {
    f.grid().dx() * f.values().iter().map(|z| z.re).sum::<f64>()
}

/// `int |f|^p dx` for p in {2, 4, 6}.
pub fn lp_power(f: &ComplexField, p: u32) -> f64 {
    let sum: f64 = match p {
        2 => f.values().iter().map(|z| z.norm_sqr()).sum(),
        4 => f.values().iter().map(|z| z.norm_sqr().powi(2)).sum(),
        6 => f.values().iter().map(|z| z.norm_sqr().powi(3)).sum(),
        _ => f.values().iter().map(|z| z.norm().powi(p as i32)).sum(),
    };
    sum * f.grid().dx()
}

/// `||f_x||_{L^2}^2`, evaluated on the spectrum (exact discrete Parseval).
pub fn dirichlet_energy(f: &ComplexField) -> f64 {
    let grid = f.grid();
    let spec = f.spectrum();
    let s: f64 = spec
        .iter()
        .enumerate()
        .map(|(j, z)| grid.first_derivative_symbol(j).norm_sqr() * z.norm_sqr())
        .sum();
    s * grid.length() / (grid.len() as f64).powi(2)
}

/// `Im int conj(f) f_x dx`, evaluated on the spectrum.
pub fn momentum_density_integral(f: &ComplexField) -> f64 {
    let grid = f.grid();
    let spec = f.spectrum();
    let ny = grid.nyquist_index();
    let s: f64 = spec
        .iter()
        .zip(grid.wavenumbers())
        .enumerate()
        .filter(|(j, _)| *j != ny)
        .map(|(_, (z, &k))| k * z.norm_sqr())
        .sum();
    s * grid.length() / (grid.len() as f64).powi(2)
}

/// `(int |f|^p)^{1/p}`, or the `H^1` seminorm `||f_x||_{L^2}`.
pub fn lp_norm(f: &ComplexField, norm: Norm) -> f64 {
    match norm {
        Norm::L2 => lp_power(f, 2).sqrt(),
        Norm::L4 => lp_power(f, 4).powf(0.25),
        Norm::L6 => lp_power(f, 6).powf(1.0 / 6.0),
        Norm::H1Seminorm => dirichlet_energy(f).sqrt(),
    }
}

/// `(||f||_{L^2}^2 + ||f_x||_{L^2}^2)^{1/2}`.
pub fn h1_norm(f: &ComplexField) -> f64 {
    (lp_power(f, 2) + dirichlet_energy(f)).sqrt()
}

/// Wavenumber-space side of Parseval: `(L/N^2) sum |f_k|^2`.
pub fn spectral_l2_squared(f: &ComplexField) -> f64 {
    let grid = f.grid();
    let s: f64 = f.spectrum().iter().map(|z| z.norm_sqr()).sum();
    s * grid.length() / (grid.len() as f64).powi(2)
}

/// Dealiased pointwise product: both factors are band-limited by the 2/3 rule
/// and the product is filtered again.
pub fn dealiased_product(grid: &Grid, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    filter_in_place(grid, &mut fa);
    filter_in_place(grid, &mut fb);
    let mut prod: Vec<C64> = fa.iter().zip(&fb).map(|(&x, &y)| x * y).collect();
    filter_in_place(grid, &mut prod);
    prod
}

/// Physical-space samples projected onto the 2/3-rule band.
pub fn filter_in_place(grid: &Grid, values: &mut [C64]) {
    grid.fft(values);
    grid.apply_dealias(values);
    grid.ifft(values);
}
