//! Seeded random smooth fields for sampling properties.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::functionals::{constraint_k, GROUND_STATE_ACTION};
use crate::grid::{dirichlet_energy, lp_power, ComplexField, Grid, C64};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of one to four modulated Gaussians near the box center.
///
/// Widths lie in `[0.5, 4]` and carrier wavenumbers in `[-2, 2]`, so every
/// sample is well resolved on grids with `dx <= 0.1`.
pub fn random_smooth_field(rng: &mut impl Rng, grid: &Grid) -> ComplexField {
    let count = rng.random_range(1..=4);
    let spread = grid.length() / 16.0;
    let bumps: Vec<(f64, f64, C64, f64)> = (0..count)
        .map(|_| {
            let center = rng.random_range(-spread..spread);
            let width = rng.random_range(0.5..4.0);
            let amp = C64::from_polar(rng.random_range(0.2..2.0), rng.random_range(0.0..2.0 * PI));
            let k = rng.random_range(-2.0..2.0);
            (center, width, amp, k)
        })
        .collect();
    ComplexField::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, a, k)| a * (-((x - c) / w).powi(2)).exp() * C64::from_polar(1.0, k * x))
            .sum()
    })
}

/// Amplitude `s > 0` with `s^2 ||f_x||^2 + (s^4/8) ||f||_4^4 = level`.
pub fn amplitude_for_level(f: &ComplexField, level: f64) -> Option<f64> {
    let a = dirichlet_energy(f);
    let b = lp_power(f, 4) / 8.0;
    if !(level > 0.0) || (a <= 0.0 && b <= 0.0) {
        return None;
    }
    let s2 = if b > 0.0 {
        2.0 * level / (a + (a * a + 4.0 * b * level).sqrt())
    } else {
        level / a
    };
    Some(s2.sqrt())
}

/// Result of sampling `K` below the threshold `||f_x||^2 + ||f||_4^4 / 8 <= level`.
#[derive(Clone, Debug)]
pub struct ConstraintSampling {
    pub samples: usize,
    pub min_constraint: f64,
    /// `K / ||f||_6^6` at the worst sample, a scale-free view of the margin.
    pub min_relative: f64,
    pub violations: usize,
}

/// Draws `count` random fields, rescales each to `fraction * d` of the
/// threshold functional and records the smallest `K`.
pub fn sample_subthreshold_constraint(
    grid: &Grid,
    seed: u64,
    count: usize,
    fraction: f64,
    floor: f64,
) -> ConstraintSampling {
    let mut rng = seeded_rng(seed);
    let level = fraction * GROUND_STATE_ACTION;
    let mut out = ConstraintSampling {
        samples: 0,
        min_constraint: f64::INFINITY,
        min_relative: f64::INFINITY,
        violations: 0,
    };
    while out.samples < count {
        let f = random_smooth_field(&mut rng, grid);
        let Some(s) = amplitude_for_level(&f, level) else { continue };
        let g = f.scale_real(s);
        let k = constraint_k(&g);
        out.samples += 1;
        if k < out.min_constraint {
            out.min_constraint = k;
            out.min_relative = k / lp_power(&g, 6);
        }
        if k < floor {
            out.violations += 1;
        }
    }
    out
}
