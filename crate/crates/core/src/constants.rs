//! Grid checks of the closed-form norms of `W`.
//!
//! With `S = L` (so `2x` runs over `[-S, S]` on the box) the truncated integrals are
//! `int W^2 = 8 atan S`,
//! `int W^4 = 32 S/(1+S^2) + 32 atan S`,
//! `int W^6 = 512 (S/(4(1+S^2)^2) + 3S/(8(1+S^2)) + (3/8) atan S)`,
//! `int W_x^2 = 32 (S/(8(1+S^2)) - S/(4(1+S^2)^2) + atan(S)/8)`.

use crate::error::Result;
use crate::functionals::{GROUND_STATE_MASS, W_DIRICHLET, W_QUARTIC, W_SEXTIC};
use crate::grid::{dirichlet_energy, lp_power, Grid};
use crate::solitons::ground_state_w;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WConstant {
    Mass,
    Quartic,
    Sextic,
    Dirichlet,
}

impl WConstant {
    pub const ALL: [WConstant; 4] = [WConstant::Mass, WConstant::Quartic, WConstant::Sextic, WConstant::Dirichlet];

    pub fn name(self) -> &'static str {
        match self {
            WConstant::Mass => "||W||_2^2",
            WConstant::Quartic => "||W||_4^4",
            WConstant::Sextic => "||W||_6^6",
            WConstant::Dirichlet => "||W_x||_2^2",
        }
    }

    /// Value over the whole line.
    pub fn exact(self) -> f64 {
        match self {
            WConstant::Mass => GROUND_STATE_MASS,
            WConstant::Quartic => W_QUARTIC,
            WConstant::Sextic => W_SEXTIC,
            WConstant::Dirichlet => W_DIRICHLET,
        }
    }

    /// Integral over `[-L/2, L/2]`.
    pub fn truncated(self, length: f64) -> f64 {
        let s = length;
        let q = 1.0 + s * s;
        match self {
            WConstant::Mass => 8.0 * s.atan(),
            WConstant::Quartic => 32.0 * s / q + 32.0 * s.atan(),
            WConstant::Sextic => 512.0 * (s / (4.0 * q * q) + 3.0 * s / (8.0 * q) + 0.375 * s.atan()),
            WConstant::Dirichlet => 32.0 * (s / (8.0 * q) - s / (4.0 * q * q) + s.atan() / 8.0),
        }
    }

    /// Required relative accuracy of the tail-corrected grid value.
    pub fn tolerance(self) -> f64 {
        match self {
            WConstant::Mass => 1e-2,
            WConstant::Quartic => 1e-4,
            WConstant::Sextic => 1e-6,
            WConstant::Dirichlet => 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstantCheck {
    pub constant: WConstant,
    pub grid_value: f64,
    pub truncated: f64,
    pub exact: f64,
}

impl ConstantCheck {
    /// Grid value plus the analytic tail outside the box.
    pub fn tail_corrected(&self) -> f64 {
        self.grid_value + (self.exact - self.truncated)
    }

    pub fn relative_error(&self) -> f64 {
        ((self.tail_corrected() - self.exact) / self.exact).abs()
    }

    pub fn truncation_gap(&self) -> f64 {
        (self.grid_value - self.truncated).abs()
    }

    pub fn passes(&self, truncation_tol: f64) -> bool {
        self.relative_error() <= self.constant.tolerance() && self.truncation_gap() <= truncation_tol
    }
}

pub fn verify_w_constants(grid: &Grid) -> Result<Vec<ConstantCheck>> {
    let w = ground_state_w(grid, 1.0)?;
    Ok(WConstant::ALL
        .iter()
        .map(|&c| {
            let grid_value = match c {
                WConstant::Mass => lp_power(&w, 2),
                WConstant::Quartic => lp_power(&w, 4),
                WConstant::Sextic => lp_power(&w, 6),
                WConstant::Dirichlet => dirichlet_energy(&w),
            };
            ConstantCheck { constant: c, grid_value, truncated: c.truncated(grid.length()), exact: c.exact() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn truncated_integrals_tend_to_exact() {
        for c in WConstant::ALL {
            assert!((c.truncated(1e9) - c.exact()).abs() < 1e-6 * c.exact(), "{}", c.name());
            assert!(c.truncated(10.0) < c.exact());
        }
        assert!((WConstant::Mass.truncated(1.0) - 2.0 * PI).abs() < 1e-14);
    }
}
