//! Phase-space symbols `a(x, ξ)` on `R^{2n}`.
//!
//! Two backends mirror the ones on `R^n`: exact sums of phase-space plane
//! waves `c e^{i(k·x + ω·ξ)}` (angular frequencies in both variables) and
//! samples on the product of a position grid with its dual grid.

use super::grid::{block_mul_acc, fft_axis, from_interp_coeffs, interp_coeffs, mat_to_block, Grid};
use super::plane::check_order;
use crate::coeff_algebra::{cstar_norm, norm_of_block, Mat};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseWave {
    /// Angular frequency in `x`.
    pub kx: Vec<f64>,
    /// Angular frequency in `ξ`.
    pub kxi: Vec<f64>,
    pub c: Mat,
}

impl PhaseWave {
    fn factor(&self, beta: &[usize], gamma: &[usize]) -> C64 {
        let mut z = C64::new(1.0, 0.0);
        for (b, kx) in beta.iter().zip(&self.kx) {
            z *= C64::new(0.0, *kx).powu(*b as u32);
        }
        for (g, kxi) in gamma.iter().zip(&self.kxi) {
            z *= C64::new(0.0, *kxi).powu(*g as u32);
        }
        z
    }

    fn phase(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.kx.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.kxi.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Finite sum of phase-space plane waves.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseWaves {
    pub n: usize,
    pub k: usize,
    pub terms: Vec<PhaseWave>,
}

impl PhaseWaves {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, terms: Vec::new() }
    }

    pub fn constant(n: usize, c: Mat) -> Self {
        let mut s = Self::new(n, c.nrows());
        s.push(vec![0.0; n], vec![0.0; n], c);
        s
    }

    /// Adds `c e^{i(k·x + ω·ξ)}`, merging identical frequencies and pruning zeros.
    pub fn push(&mut self, kx: Vec<f64>, kxi: Vec<f64>, c: Mat) {
        assert_eq!(kx.len(), self.n);
        assert_eq!(kxi.len(), self.n);
        if let Some(t) = self.terms.iter_mut().find(|t| t.kx == kx && t.kxi == kxi) {
            t.c += c;
        } else {
            self.terms.push(PhaseWave { kx, kxi, c });
        }
        self.terms.retain(|t| t.c.iter().any(|z| *z != C64::new(0.0, 0.0)));
    }

    pub fn eval_deriv(&self, x: &[f64], xi: &[f64], beta: &[usize], gamma: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.k, self.k);
        for t in &self.terms {
            out += &t.c * (C64::from_polar(1.0, t.phase(x, xi)) * t.factor(beta, gamma));
        }
        out
    }

    pub fn derivative(&self, beta: &[usize], gamma: &[usize]) -> Self {
        let mut out = Self::new(self.n, self.k);
        for t in &self.terms {
            out.push(t.kx.clone(), t.kxi.clone(), &t.c * t.factor(beta, gamma));
        }
        out
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.c *= z;
        }
        out.terms.retain(|t| t.c.iter().any(|z| *z != C64::new(0.0, 0.0)));
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.kx.clone(), t.kxi.clone(), t.c.clone());
        }
        out
    }

    /// `a(x + s, ξ + t)`.
    pub fn translate(&self, s: &[f64], t: &[f64]) -> Self {
        let mut out = self.clone();
        for w in &mut out.terms {
            w.c *= C64::from_polar(1.0, w.phase(s, t));
        }
        out
    }

    /// `ξ ↦ a(x, ξ)` for fixed `x` (`n = 1`).
    pub fn slice_x(&self, x: f64) -> Series1 {
        self.slice(|t| (t.kxi[0], C64::from_polar(1.0, t.kx[0] * x)))
    }

    /// `x ↦ a(x, ξ)` for fixed `ξ` (`n = 1`).
    pub fn slice_xi(&self, xi: f64) -> Series1 {
        self.slice(|t| (t.kx[0], C64::from_polar(1.0, t.kxi[0] * xi)))
    }

    fn slice(&self, f: impl Fn(&PhaseWave) -> (f64, C64)) -> Series1 {
        let mut s = Series1 { k: self.k, freqs: vec![], coeffs: vec![], odd_zero: vec![] };
        for t in &self.terms {
            let (w, z) = f(t);
            s.freqs.push(w);
            s.coeffs.extend(mat_to_block(&(&t.c * z)));
            s.odd_zero.push(false);
        }
        s
    }

    /// Samples on `grid × grid.dual()`.
    pub fn sample(&self, grid: &Grid) -> Result<PhaseGrid> {
        if grid.n != self.n {
            return Err(Error::GridMismatch(format!("symbol dimension {} vs grid dimension {}", self.n, grid.n)));
        }
        let dual = grid.dual();
        let (nx, nxi, b) = (grid.len(), dual.len(), self.k * self.k);
        let mut data = vec![C64::new(0.0, 0.0); nx * nxi * b];
        // The phase separates: e^{i(k·x + ω·ξ)} = e^{ik·x} e^{iω·ξ}.
        for t in &self.terms {
            let ex: Vec<C64> = (0..nx).map(|p| C64::from_polar(1.0, t.kx.iter().zip(grid.point(p)).map(|(a, x)| a * x).sum())).collect();
            let exi: Vec<C64> = (0..nxi).map(|p| C64::from_polar(1.0, t.kxi.iter().zip(dual.point(p)).map(|(a, x)| a * x).sum())).collect();
            let c = mat_to_block(&t.c);
            for (px, zx) in ex.iter().enumerate() {
                for (pxi, zxi) in exi.iter().enumerate() {
                    let z = zx * zxi;
                    let off = (px * nxi + pxi) * b;
                    for (d, v) in data[off..off + b].iter_mut().zip(&c) {
                        *d += v * z;
                    }
                }
            }
        }
        PhaseGrid::from_data(*grid, self.k, data)
    }
}

/// Samples `a(x_i, ξ_j)` on a position grid times its dual grid, `x` index major.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub grid: Grid,
    pub k: usize,
    data: Vec<C64>,
}

impl PhaseGrid {
    pub fn from_data(grid: Grid, k: usize, data: Vec<C64>) -> Result<Self> {
        let want = grid.len() * grid.len() * k * k;
        if data.len() != want {
            return Err(Error::Invalid(format!("expected {want} phase samples, got {}", data.len())));
        }
        Ok(Self { grid, k, data })
    }

    pub fn from_fn(grid: Grid, k: usize, f: impl Fn(&[f64], &[f64]) -> Mat) -> Self {
        let dual = grid.dual();
        let n = grid.n;
        let mut data = Vec::with_capacity(grid.len() * dual.len() * k * k);
        for px in 0..grid.len() {
            let x = grid.point(px);
            for pxi in 0..dual.len() {
                let xi = dual.point(pxi);
                data.extend(mat_to_block(&f(&x[..n], &xi[..n])));
            }
        }
        Self { grid, k, data }
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn dual(&self) -> Grid {
        self.grid.dual()
    }

    /// Samples at `(x_px, ξ_pxi)`.
    pub fn block(&self, px: usize, pxi: usize) -> &[C64] {
        let b = self.k * self.k;
        let off = (px * self.grid.len() + pxi) * b;
        &self.data[off..off + b]
    }

    /// Interpolant coefficients: FFT over both variable groups, normalized.
    pub fn coeffs(&self) -> Vec<C64> {
        let g = self.grid;
        let dual = g.dual();
        let b = self.k * self.k;
        let mut d = self.data.clone();
        fft_axes_all(&mut d, &g, &dual, b, false);
        let scale = 1.0 / (g.len() * dual.len()) as f64;
        for px in 0..g.len() {
            let sx = parity(&g, px);
            for pxi in 0..dual.len() {
                let s = if (sx + parity(&dual, pxi)) % 2 == 0 { scale } else { -scale };
                let off = (px * dual.len() + pxi) * b;
                for v in &mut d[off..off + b] {
                    *v *= s;
                }
            }
        }
        d
    }

    fn from_coeffs(grid: Grid, k: usize, mut c: Vec<C64>) -> Self {
        let dual = grid.dual();
        let b = k * k;
        for px in 0..grid.len() {
            let sx = parity(&grid, px);
            for pxi in 0..dual.len() {
                if (sx + parity(&dual, pxi)) % 2 == 1 {
                    let off = (px * dual.len() + pxi) * b;
                    for v in &mut c[off..off + b] {
                        *v = -*v;
                    }
                }
            }
        }
        fft_axes_all(&mut c, &grid, &dual, b, true);
        Self { grid, k, data: c }
    }

    /// Spectral `∂_x^β ∂_ξ^γ a`; Nyquist bins dropped along odd-order axes.
    pub fn derivative(&self, beta: &[usize], gamma: &[usize]) -> Self {
        let g = self.grid;
        let dual = g.dual();
        let b = self.k * self.k;
        let mut c = self.coeffs();
        for px in 0..g.len() {
            let fx = super::gridsym::spectral_multiplier(&g, px, beta);
            for pxi in 0..dual.len() {
                let f = fx * super::gridsym::spectral_multiplier(&dual, pxi, gamma);
                let off = (px * dual.len() + pxi) * b;
                for v in &mut c[off..off + b] {
                    *v *= f;
                }
            }
        }
        Self::from_coeffs(g, self.k, c)
    }

    /// Applies a multiplier `m(k_x, k_ξ)` (angular frequencies) to the interpolant.
    pub fn fourier_multiplier(&self, m: impl Fn(&[f64], &[f64]) -> C64) -> Self {
        let g = self.grid;
        let dual = g.dual();
        let b = self.k * self.k;
        let mut c = self.coeffs();
        for px in 0..g.len() {
            let mx = g.multi_index(px);
            let kx: Vec<f64> = (0..g.n).map(|a| 2.0 * PI * g.cycles(g.freq_index(mx[a]))).collect();
            for pxi in 0..dual.len() {
                let mxi = dual.multi_index(pxi);
                let kxi: Vec<f64> = (0..g.n).map(|a| 2.0 * PI * dual.cycles(dual.freq_index(mxi[a]))).collect();
                let f = m(&kx, &kxi);
                let off = (px * dual.len() + pxi) * b;
                for v in &mut c[off..off + b] {
                    *v *= f;
                }
            }
        }
        Self::from_coeffs(g, self.k, c)
    }

    /// Direct evaluation of the interpolant (cost `O(N^{2n})`).
    pub fn eval_deriv(&self, x: &[f64], xi: &[f64], beta: &[usize], gamma: &[usize]) -> Mat {
        let g = self.grid;
        let dual = g.dual();
        let c = self.coeffs();
        let b = self.k * self.k;
        let basis = |grid: &Grid, pt: &[f64], alpha: &[usize]| -> Vec<C64> {
            (0..grid.len())
                .map(|p| {
                    let mi = grid.multi_index(p);
                    let mut z = C64::new(1.0, 0.0);
                    for a in 0..grid.n {
                        let m = grid.freq_index(mi[a]);
                        let order = alpha.get(a).copied().unwrap_or(0);
                        if order % 2 == 1 && m == -(grid.npts as i64) / 2 {
                            return C64::new(0.0, 0.0);
                        }
                        let w = 2.0 * PI * grid.cycles(m);
                        z *= C64::from_polar(1.0, w * pt[a]) * C64::new(0.0, w).powu(order as u32);
                    }
                    z
                })
                .collect()
        };
        let ex = basis(&g, x, beta);
        let exi = basis(&dual, xi, gamma);
        let mut acc = vec![C64::new(0.0, 0.0); b];
        for px in 0..g.len() {
            for pxi in 0..dual.len() {
                let z = ex[px] * exi[pxi];
                let off = (px * dual.len() + pxi) * b;
                for (o, v) in acc.iter_mut().zip(&c[off..off + b]) {
                    *o += v * z;
                }
            }
        }
        Mat::from_row_slice(self.k, self.k, &acc)
    }

    pub fn sup_norm(&self) -> f64 {
        super::grid::sup_block_norm(&self.data, self.k)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { grid: self.grid, k: self.k, data: self.data.iter().map(|v| v * z).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self { grid: self.grid, k: self.k, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Pointwise product `a(x, ξ) b(x, ξ)`.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let k = self.k;
        let mut data = vec![C64::new(0.0, 0.0); self.data.len()];
        for (i, out) in data.chunks_mut(k * k).enumerate() {
            let r = i * k * k..(i + 1) * k * k;
            block_mul_acc(&self.data[r.clone()], &other.data[r], out, k, k, k, C64::new(1.0, 0.0));
        }
        Ok(Self { grid: self.grid, k, data })
    }
}

/// A one-variable trigonometric series `Σ_j c_j e^{iω_j t}` with `k × k`
/// coefficients; `odd_zero[j]` marks Nyquist terms that odd derivatives drop.
#[derive(Clone, Debug)]
pub struct Series1 {
    pub k: usize,
    pub freqs: Vec<f64>,
    pub coeffs: Vec<C64>,
    pub odd_zero: Vec<bool>,
}

impl Series1 {
    /// Writes `d^r/dt^r` of the series at `t` into `out` (a `k × k` block).
    pub fn eval_into(&self, t: f64, r: usize, out: &mut [C64]) {
        let b = self.k * self.k;
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (j, w) in self.freqs.iter().enumerate() {
            if r % 2 == 1 && self.odd_zero[j] {
                continue;
            }
            let z = C64::from_polar(1.0, w * t) * C64::new(0.0, *w).powu(r as u32);
            for (o, c) in out.iter_mut().zip(&self.coeffs[j * b..(j + 1) * b]) {
                *o += c * z;
            }
        }
    }
}

impl PhaseGrid {
    /// Coefficients of `e^{iω ξ}` per position sample (dual-grid interpolation
    /// along the `ξ` axes only), with `ω` ranging over multiples of `Δx`.
    pub fn xi_coeffs(&self) -> Vec<C64> {
        let dual = self.grid.dual();
        let b = self.k * self.k;
        self.data.chunks(dual.len() * b).flat_map(|c| interp_coeffs(c, &dual, b)).collect()
    }

    pub fn from_xi_coeffs(grid: Grid, k: usize, c: &[C64]) -> Self {
        let dual = grid.dual();
        let b = k * k;
        let data = c.chunks(dual.len() * b).flat_map(|c| from_interp_coeffs(c, &dual, b)).collect();
        Self { grid, k, data }
    }

    /// The interpolant as an explicit plane-wave sum (`N^{2n}` terms).
    pub fn to_waves(&self) -> PhaseWaves {
        let g = self.grid;
        let dual = g.dual();
        let b = self.k * self.k;
        let c = self.coeffs();
        let mut out = PhaseWaves::new(g.n, self.k);
        for px in 0..g.len() {
            let mx = g.multi_index(px);
            let kx: Vec<f64> = (0..g.n).map(|a| g.angular(g.freq_index(mx[a]))).collect();
            for pxi in 0..dual.len() {
                let off = (px * dual.len() + pxi) * b;
                let blk = &c[off..off + b];
                if blk.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                let mxi = dual.multi_index(pxi);
                let kxi = (0..g.n).map(|a| dual.angular(dual.freq_index(mxi[a]))).collect();
                out.terms.push(PhaseWave { kx: kx.clone(), kxi, c: Mat::from_row_slice(self.k, self.k, blk) });
            }
        }
        out
    }

    /// `ξ ↦ a(x, ξ)` for fixed `x` (`n = 1`).
    pub fn slice_x(&self, x: f64) -> Series1 {
        let g = self.grid;
        let dual = g.dual();
        let b = self.k * self.k;
        let c = self.coeffs();
        let nq = g.npts;
        let ex: Vec<C64> = (0..nq).map(|j| C64::from_polar(1.0, g.angular(g.freq_index(j)) * x)).collect();
        let mut coeffs = vec![C64::new(0.0, 0.0); nq * b];
        for jx in 0..nq {
            for jxi in 0..nq {
                let off = (jx * nq + jxi) * b;
                for t in 0..b {
                    coeffs[jxi * b + t] += c[off + t] * ex[jx];
                }
            }
        }
        series_from(&dual, self.k, coeffs)
    }

    /// `x ↦ a(x, ξ)` for fixed `ξ` (`n = 1`).
    pub fn slice_xi(&self, xi: f64) -> Series1 {
        let g = self.grid;
        let dual = g.dual();
        let b = self.k * self.k;
        let c = self.coeffs();
        let nq = g.npts;
        let exi: Vec<C64> = (0..nq).map(|j| C64::from_polar(1.0, dual.angular(dual.freq_index(j)) * xi)).collect();
        let mut coeffs = vec![C64::new(0.0, 0.0); nq * b];
        for jx in 0..nq {
            for jxi in 0..nq {
                let off = (jx * nq + jxi) * b;
                for t in 0..b {
                    coeffs[jx * b + t] += c[off + t] * exi[jxi];
                }
            }
        }
        series_from(&g, self.k, coeffs)
    }
}

fn series_from(g: &Grid, k: usize, coeffs: Vec<C64>) -> Series1 {
    let nq = g.npts as i64;
    Series1 {
        k,
        freqs: (0..g.npts).map(|j| g.angular(g.freq_index(j))).collect(),
        coeffs,
        odd_zero: (0..g.npts).map(|j| g.freq_index(j) == -nq / 2).collect(),
    }
}

fn parity(g: &Grid, p: usize) -> usize {
    let mi = g.multi_index(p);
    (0..g.n).map(|a| mi[a]).sum()
}

fn fft_axes_all(d: &mut [C64], g: &Grid, dual: &Grid, b: usize, inverse: bool) {
    for a in 0..g.n {
        fft_axis(d, g, dual.len() * b, a, inverse);
    }
    for chunk in d.chunks_mut(dual.len() * b) {
        for a in 0..dual.n {
            fft_axis(chunk, dual, b, a, inverse);
        }
    }
}

/// A symbol on phase space.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseSymbol {
    Waves(PhaseWaves),
    Grid(PhaseGrid),
}

impl PhaseSymbol {
    pub fn n(&self) -> usize {
        match self {
            Self::Waves(w) => w.n,
            Self::Grid(g) => g.grid.n,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Self::Waves(w) => w.k,
            Self::Grid(g) => g.k,
        }
    }

    pub fn eval_deriv(&self, x: &[f64], xi: &[f64], beta: &[usize], gamma: &[usize]) -> Mat {
        match self {
            Self::Waves(w) => w.eval_deriv(x, xi, beta, gamma),
            Self::Grid(g) => g.eval_deriv(x, xi, beta, gamma),
        }
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Mat {
        let z = vec![0; self.n()];
        self.eval_deriv(x, xi, &z, &z)
    }

    pub fn derivative(&self, beta: &[usize], gamma: &[usize]) -> Result<Self> {
        check_order(beta)?;
        check_order(gamma)?;
        check_order(&[beta.iter().sum::<usize>() + gamma.iter().sum::<usize>()])?;
        Ok(match self {
            Self::Waves(w) => Self::Waves(w.derivative(beta, gamma)),
            Self::Grid(g) => Self::Grid(g.derivative(beta, gamma)),
        })
    }

    pub fn slice_x(&self, x: f64) -> Series1 {
        match self {
            Self::Waves(w) => w.slice_x(x),
            Self::Grid(g) => g.slice_x(x),
        }
    }

    pub fn slice_xi(&self, xi: f64) -> Series1 {
        match self {
            Self::Waves(w) => w.slice_xi(xi),
            Self::Grid(g) => g.slice_xi(xi),
        }
    }

    /// Samples on `grid × grid.dual()` (grids are returned as they are after a check).
    pub fn to_grid(&self, grid: &Grid) -> Result<PhaseGrid> {
        match self {
            Self::Waves(w) => w.sample(grid),
            Self::Grid(g) => {
                g.grid.check_same(grid)?;
                Ok(g.clone())
            }
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        match self {
            Self::Waves(w) => Self::Waves(w.scale(z)),
            Self::Grid(g) => Self::Grid(g.scale(z)),
        }
    }

    /// `max_{(x_i, ξ_j)} ‖a(x_i, ξ_j)‖` on `grid × grid.dual()`.
    pub fn grid_sup(&self, grid: &Grid) -> Result<f64> {
        match self {
            Self::Waves(w) if w.terms.len() <= 1 => Ok(w.terms.first().map(|t| cstar_norm(&t.c)).unwrap_or(0.0)),
            _ => Ok(self.to_grid(grid)?.sup_norm()),
        }
    }
}

/// `sup` of a block field, exposed for callers holding raw samples.
pub fn block_sup(data: &[C64], k: usize) -> f64 {
    data.chunks(k * k).map(|b| norm_of_block(b, k, false)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_algebra::scalar;

    #[test]
    fn grid_derivative_matches_waves() {
        let g = Grid::new(1, 32, 4.0).unwrap();
        let d = g.dual();
        let mut w = PhaseWaves::new(1, 1);
        w.push(vec![g.angular(2)], vec![2.0 * PI * d.cycles(3)], scalar(1, C64::new(0.5, 0.2)));
        w.push(vec![g.angular(-1)], vec![0.0], scalar(1, C64::new(1.0, 0.0)));
        let pg = w.sample(&g).unwrap();
        let dg = pg.derivative(&[1], &[1]);
        let dw = w.derivative(&[1], &[1]).sample(&g).unwrap();
        assert!(dg.sub(&dw).unwrap().sup_norm() < 1e-11 * dw.sup_norm().max(1.0));
        let x = [0.37];
        let xi = [-1.1];
        let a = pg.eval_deriv(&x, &xi, &[0], &[1]);
        let b = w.eval_deriv(&x, &xi, &[0], &[1]);
        assert!(cstar_norm(&(a - b)) < 1e-11);
    }
}
