//! Periodic sample grids, frequency conventions and FFT plumbing.
//!
//! Positions are `x_i = −L + i·2L/N` per axis, points stored row-major
//! (first axis slowest). The trigonometric interpolant of samples uses the
//! integer frequencies `m ∈ [−N/2, N/2)`; `m` has physical frequency
//! `ν = m/(2L)` cycles per unit length and angular frequency `ξ = πm/L`.
//! These conversions live here and nowhere else.

use crate::{Error, Result, C64};
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub npts: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(n: usize, npts: usize, half_width: f64) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::UnsupportedDimension { n, what: "grids support n ∈ {1, 2}".into() });
        }
        if npts < 2 || !npts.is_power_of_two() {
            return Err(Error::Invalid(format!("points per axis must be a power of two ≥ 2, got {npts}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Invalid(format!("half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, npts, half_width })
    }

    /// `N = 256, L = 8` for `n = 1`; `N = 64, L = 6` for `n = 2`.
    pub fn default_for(n: usize) -> Result<Self> {
        match n {
            1 => Self::new(1, 256, 8.0),
            2 => Self::new(2, 64, 6.0),
            _ => Err(Error::UnsupportedDimension { n, what: "no default grid".into() }),
        }
    }

    pub fn len(&self) -> usize {
        self.npts.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.npts as f64
    }

    /// Cell volume `Δx^n`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn coord_1d(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn multi_index(&self, p: usize) -> [usize; 2] {
        if self.n == 1 {
            [p, 0]
        } else {
            [p / self.npts, p % self.npts]
        }
    }

    pub fn point(&self, p: usize) -> [f64; 2] {
        let mi = self.multi_index(p);
        let mut x = [0.0; 2];
        for a in 0..self.n {
            x[a] = self.coord_1d(mi[a]);
        }
        x
    }

    /// Signed frequency index of FFT bin `j`, in `[−N/2, N/2)`.
    pub fn freq_index(&self, j: usize) -> i64 {
        let n = self.npts as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT bin of signed frequency `m` (taken modulo `N`).
    pub fn bin(&self, m: i64) -> usize {
        m.rem_euclid(self.npts as i64) as usize
    }

    /// Physical frequency `m/(2L)` in cycles per unit length.
    pub fn cycles(&self, m: i64) -> f64 {
        m as f64 / (2.0 * self.half_width)
    }

    /// Angular frequency `πm/L`.
    pub fn angular(&self, m: i64) -> f64 {
        PI * m as f64 / self.half_width
    }

    /// The dual grid `ξ_j = (π/L)(j − N/2)`, itself a grid with half-width `πN/(2L)`.
    pub fn dual(&self) -> Grid {
        Grid { n: self.n, npts: self.npts, half_width: PI * self.npts as f64 / (2.0 * self.half_width) }
    }

    /// Whether `p` lies in the outermost layer of cells (some index is `0` or `N − 1`).
    pub fn is_boundary(&self, p: usize) -> bool {
        let mi = self.multi_index(p);
        (0..self.n).any(|a| mi[a] == 0 || mi[a] == self.npts - 1)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n || self.npts != other.npts || (self.half_width - other.half_width).abs() > 1e-12 * self.half_width {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized FFT along `axis` of point-major data with `block` values per point.
pub fn fft_axis(data: &mut [C64], grid: &Grid, block: usize, axis: usize, inverse: bool) {
    let n = grid.npts;
    let fft = plan(n, inverse);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let (stride, outer) = if grid.n == 1 {
        (1, 1)
    } else if axis == 0 {
        (n, n)
    } else {
        (1, n)
    };
    for o in 0..outer {
        let base = if grid.n == 1 {
            0
        } else if axis == 0 {
            o
        } else {
            o * n
        };
        for c in 0..block {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = data[(base + i * stride) * block + c];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (i, b) in buf.iter().enumerate() {
                data[(base + i * stride) * block + c] = *b;
            }
        }
    }
}

/// Unnormalized FFT over all axes.
pub fn fft_all(data: &mut [C64], grid: &Grid, block: usize, inverse: bool) {
    for a in 0..grid.n {
        fft_axis(data, grid, block, a, inverse);
    }
}

/// Trigonometric-interpolant coefficients `f̂_m` in FFT bin order:
/// `f(x_i) = Σ_m f̂_m e^{2πi ν_m·x_i}`.
pub fn interp_coeffs(samples: &[C64], grid: &Grid, block: usize) -> Vec<C64> {
    let mut d = samples.to_vec();
    fft_all(&mut d, grid, block, false);
    let scale = 1.0 / grid.len() as f64;
    // x_0 = −L contributes (−1)^m per axis, and (−1)^m = (−1)^j for even N.
    for p in 0..grid.len() {
        let mi = grid.multi_index(p);
        let parity: usize = (0..grid.n).map(|a| mi[a]).sum();
        let s = if parity % 2 == 0 { scale } else { -scale };
        for v in &mut d[p * block..(p + 1) * block] {
            *v *= s;
        }
    }
    d
}

/// Inverse of [`interp_coeffs`].
pub fn from_interp_coeffs(coeffs: &[C64], grid: &Grid, block: usize) -> Vec<C64> {
    let mut d = coeffs.to_vec();
    for p in 0..grid.len() {
        let mi = grid.multi_index(p);
        let parity: usize = (0..grid.n).map(|a| mi[a]).sum();
        if parity % 2 == 1 {
            for v in &mut d[p * block..(p + 1) * block] {
                *v = -*v;
            }
        }
    }
    fft_all(&mut d, grid, block, true);
    d
}

/// Row-major `r × inner` times `inner × c` block product, accumulated into `out`.
#[inline]
pub fn block_mul_acc(a: &[C64], b: &[C64], out: &mut [C64], r: usize, inner: usize, c: usize, scale: C64) {
    for i in 0..r {
        for l in 0..inner {
            let ail = a[i * inner + l] * scale;
            if ail == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..c {
                out[i * c + j] += ail * b[l * c + j];
            }
        }
    }
}

/// Conjugate transpose of a row-major `r × c` block into a `c × r` block.
pub fn block_adjoint(a: &[C64], r: usize, c: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j].conj();
        }
    }
    out
}

/// Row-major block as an `nalgebra` matrix.
pub fn block_to_mat(b: &[C64], r: usize, c: usize) -> crate::coeff_algebra::Mat {
    crate::coeff_algebra::Mat::from_row_slice(r, c, b)
}

/// `nalgebra` matrix as a row-major block.
pub fn mat_to_block(m: &crate::coeff_algebra::Mat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Largest block norm of row-major `k × k` blocks.
pub fn sup_block_norm(data: &[C64], k: usize) -> f64 {
    data.chunks(k * k).map(|b| crate::coeff_algebra::norm_of_block(b, k, false)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_and_dual() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        assert_eq!(g.coord_1d(0), -2.0);
        assert_eq!(g.spacing(), 0.5);
        let d = g.dual();
        assert!((d.spacing() - PI / 2.0).abs() < 1e-15);
        assert!((g.spacing() * d.spacing() - 2.0 * PI / 8.0).abs() < 1e-15);
        assert_eq!(g.freq_index(4), -4);
        assert_eq!(g.bin(-1), 7);
    }

    #[test]
    fn interp_coeffs_of_plane_wave() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let (m1, m2) = (2i64, -3i64);
        let s: Vec<C64> = (0..g.len())
            .map(|p| {
                let x = g.point(p);
                C64::from_polar(1.0, 2.0 * PI * (g.cycles(m1) * x[0] + g.cycles(m2) * x[1]))
            })
            .collect();
        let c = interp_coeffs(&s, &g, 1);
        for p in 0..g.len() {
            let mi = g.multi_index(p);
            let want = if g.freq_index(mi[0]) == m1 && g.freq_index(mi[1]) == m2 { 1.0 } else { 0.0 };
            assert!((c[p] - want).norm() < 1e-13);
        }
        let back = from_interp_coeffs(&c, &g, 1);
        for (a, b) in back.iter().zip(&s) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
