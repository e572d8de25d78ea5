//! Symbols on `R^n` and on phase space, with two backends each.

pub mod grid;
pub mod gridsym;
pub mod io;
pub mod phase;
pub mod plane;

pub use grid::Grid;
pub use gridsym::GridSymbol;
pub use phase::{PhaseGrid, PhaseSymbol, PhaseWave, PhaseWaves};
pub use plane::{DeformationMatrix, PlaneWaveSymbol};
pub use phase::Series1;

use crate::coeff_algebra::Mat;

/// A matrix-valued function on `R^n` with derivatives.
pub trait Symbol {
    fn dim(&self) -> usize;
    fn size(&self) -> usize;
    fn eval_deriv(&self, x: &[f64], alpha: &[usize]) -> Mat;
}

impl Symbol for PlaneWaveSymbol {
    fn dim(&self) -> usize {
        self.n
    }
    fn size(&self) -> usize {
        self.k
    }
    fn eval_deriv(&self, x: &[f64], alpha: &[usize]) -> Mat {
        PlaneWaveSymbol::eval_deriv(self, x, alpha)
    }
}

impl Symbol for GridSymbol {
    fn dim(&self) -> usize {
        self.grid.n
    }
    fn size(&self) -> usize {
        self.k
    }
    fn eval_deriv(&self, x: &[f64], alpha: &[usize]) -> Mat {
        GridSymbol::eval_deriv(self, x, alpha)
    }
}

/// A symbol on `R^n` in either backend.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseSymbol {
    Grid(GridSymbol),
    Waves(PlaneWaveSymbol),
}

impl BaseSymbol {
    pub fn n(&self) -> usize {
        match self {
            Self::Grid(g) => g.grid.n,
            Self::Waves(w) => w.n,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Self::Grid(g) => g.k,
            Self::Waves(w) => w.k,
        }
    }

    /// Pointwise adjoint `f(x)*`.
    pub fn adjoint(&self) -> Self {
        match self {
            Self::Grid(g) => Self::Grid(g.adjoint()),
            Self::Waves(w) => Self::Waves(w.adjoint()),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Grid(g) => g.sup_norm(),
            Self::Waves(w) => w.sup_norm(),
        }
    }

    pub fn derivative(&self, alpha: &[usize]) -> crate::Result<Self> {
        Ok(match self {
            Self::Grid(g) => Self::Grid(g.derivative(alpha)?),
            Self::Waves(w) => Self::Waves(w.derivative(alpha)?),
        })
    }

    pub fn scale(&self, z: crate::C64) -> Self {
        match self {
            Self::Grid(g) => Self::Grid(g.scale(z)),
            Self::Waves(w) => Self::Waves(w.scale(z)),
        }
    }
}
