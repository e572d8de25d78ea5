//! Grid backend: `M_k`-valued samples on a periodic grid.

use super::grid::{block_adjoint, block_mul_acc, fft_all, from_interp_coeffs, interp_coeffs, sup_block_norm, Grid};
use super::plane::{check_order, multi_indices};
use crate::coeff_algebra::{cstar_norm, Mat};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Boundary decay threshold for Schwartz admissibility.
pub const ADMISSIBILITY: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSymbol {
    pub grid: Grid,
    pub k: usize,
    data: Vec<C64>,
}

impl GridSymbol {
    pub fn from_data(grid: Grid, k: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() * k * k {
            return Err(Error::Invalid(format!("expected {} samples, got {}", grid.len() * k * k, data.len())));
        }
        Ok(Self { grid, k, data })
    }

    pub fn from_fn(grid: Grid, k: usize, f: impl Fn(&[f64]) -> Mat) -> Self {
        let mut data = Vec::with_capacity(grid.len() * k * k);
        for p in 0..grid.len() {
            let m = f(&grid.point(p)[..grid.n]);
            for i in 0..k {
                for j in 0..k {
                    data.push(m[(i, j)]);
                }
            }
        }
        Self { grid, k, data }
    }

    pub fn zeros(grid: Grid, k: usize) -> Self {
        Self { grid, k, data: vec![C64::new(0.0, 0.0); grid.len() * k * k] }
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn block(&self, p: usize) -> &[C64] {
        let b = self.k * self.k;
        &self.data[p * b..(p + 1) * b]
    }

    pub fn value(&self, p: usize) -> Mat {
        Mat::from_row_slice(self.k, self.k, self.block(p))
    }

    /// Trigonometric-interpolant coefficients in FFT bin order.
    pub fn coeffs(&self) -> Vec<C64> {
        interp_coeffs(&self.data, &self.grid, self.k * self.k)
    }

    /// `∂^α f(x)` of the trigonometric interpolant, by direct summation.
    pub fn eval_deriv(&self, x: &[f64], alpha: &[usize]) -> Mat {
        let c = self.coeffs();
        eval_coeffs(&c, &self.grid, self.k, x, alpha)
    }

    pub fn eval(&self, x: &[f64]) -> Mat {
        self.eval_deriv(x, &vec![0; self.grid.n])
    }

    /// Spectral `∂^α f`; the Nyquist bin is dropped along odd-order axes.
    pub fn derivative(&self, alpha: &[usize]) -> Result<Self> {
        check_order(alpha)?;
        let g = self.grid;
        let b = self.k * self.k;
        let mut c = self.coeffs();
        for p in 0..g.len() {
            let f = spectral_multiplier(&g, p, alpha);
            for v in &mut c[p * b..(p + 1) * b] {
                *v *= f;
            }
        }
        Ok(Self { grid: g, k: self.k, data: from_interp_coeffs(&c, &g, b) })
    }

    pub fn sup_norm(&self) -> f64 {
        sup_block_norm(&self.data, self.k)
    }

    /// `max_{|α| ≤ m} max_i ‖∂^α f(x_i)‖`.
    pub fn seminorm_b(&self, m: usize) -> Result<f64> {
        let mut best: f64 = 0.0;
        for alpha in multi_indices(self.grid.n, m) {
            best = best.max(self.derivative(&alpha)?.sup_norm());
        }
        Ok(best)
    }

    /// Largest boundary-cell norm over largest interior norm.
    pub fn admissibility_ratio(&self) -> f64 {
        let (mut edge, mut inner): (f64, f64) = (0.0, 0.0);
        for p in 0..self.grid.len() {
            let v = crate::coeff_algebra::norm_of_block(self.block(p), self.k, false);
            if self.grid.is_boundary(p) {
                edge = edge.max(v);
            } else {
                inner = inner.max(v);
            }
        }
        if edge == 0.0 {
            0.0
        } else if inner == 0.0 {
            f64::INFINITY
        } else {
            edge / inner
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility_ratio() <= ADMISSIBILITY
    }

    /// `max_{|α| ≤ m} max_i (1 + |x_i|²)^{m/2} ‖∂^α f(x_i)‖`; requires admissibility.
    pub fn seminorm_s(&self, m: usize) -> Result<f64> {
        let ratio = self.admissibility_ratio();
        if ratio > ADMISSIBILITY {
            return Err(Error::DecayViolation { ratio });
        }
        let mut best: f64 = 0.0;
        for alpha in multi_indices(self.grid.n, m) {
            let d = self.derivative(&alpha)?;
            for p in 0..self.grid.len() {
                let x = self.grid.point(p);
                let r2: f64 = x[..self.grid.n].iter().map(|v| v * v).sum();
                let w = (1.0 + r2).powf(m as f64 / 2.0);
                best = best.max(w * crate::coeff_algebra::norm_of_block(d.block(p), self.k, false));
            }
        }
        Ok(best)
    }

    /// `F(g)(ξ) = (2π)^{−n/2} ∫ e^{−ix·ξ} g(x) dx`, sampled on the dual grid.
    pub fn fourier(&self) -> Self {
        let g = self.grid;
        let b = self.k * self.k;
        let mut d = self.data.clone();
        fft_all(&mut d, &g, b, false);
        let scale = (g.spacing() / (2.0 * PI).sqrt()).powi(g.n as i32);
        let mut out = vec![C64::new(0.0, 0.0); d.len()];
        for p in 0..g.len() {
            let mi = g.multi_index(p);
            let mut q = 0;
            let mut parity = 0i64;
            for a in 0..g.n {
                let m = g.freq_index(mi[a]);
                parity += m;
                q = q * g.npts + (m + g.npts as i64 / 2) as usize;
            }
            let s = if parity.rem_euclid(2) == 0 { scale } else { -scale };
            for c in 0..b {
                out[q * b + c] = d[p * b + c] * s;
            }
        }
        Self { grid: g.dual(), k: self.k, data: out }
    }

    /// `F^{-1}`, mapping dual-grid samples back to the position grid.
    pub fn inverse_fourier(&self) -> Self {
        let dual = self.grid;
        let pos = dual.dual();
        let b = self.k * self.k;
        let scale = (dual.spacing() / (2.0 * PI).sqrt()).powi(pos.n as i32);
        let mut d = vec![C64::new(0.0, 0.0); self.data.len()];
        for q in 0..dual.len() {
            let mi = dual.multi_index(q);
            let mut p = 0;
            let mut parity = 0i64;
            for a in 0..pos.n {
                let m = mi[a] as i64 - pos.npts as i64 / 2;
                parity += m;
                p = p * pos.npts + pos.bin(m);
            }
            let s = if parity.rem_euclid(2) == 0 { scale } else { -scale };
            for c in 0..b {
                d[p * b + c] = self.data[q * b + c] * s;
            }
        }
        fft_all(&mut d, &pos, b, true);
        Self { grid: pos, k: self.k, data: d }
    }

    /// Pointwise adjoint `f(x)*`.
    pub fn adjoint(&self) -> Self {
        let k = self.k;
        let data = self.data.chunks(k * k).flat_map(|blk| block_adjoint(blk, k, k)).collect();
        Self { grid: self.grid, k, data }
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

    /// Pointwise product `f(x)g(x)`.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let k = self.k;
        let mut data = vec![C64::new(0.0, 0.0); self.data.len()];
        for p in 0..self.grid.len() {
            let r = p * k * k..(p + 1) * k * k;
            block_mul_acc(&self.data[r.clone()], &other.data[r.clone()], &mut data[r], k, k, k, C64::new(1.0, 0.0));
        }
        Ok(Self { grid: self.grid, k, data })
    }

    /// `sup_i ‖f(x_i) − g(x_i)‖`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// `⟨f, g⟩ = Σ_i f(x_i)* g(x_i) Δx^n`.
    pub fn inner_product(&self, other: &Self) -> Result<Mat> {
        self.grid.check_same(&other.grid)?;
        Ok(module_inner(&self.data, &other.data, self.k, self.k, self.k, self.grid.cell()))
    }

    /// `‖⟨f, f⟩‖^{1/2}`.
    pub fn norm_2(&self) -> f64 {
        cstar_norm(&module_inner(&self.data, &self.data, self.k, self.k, self.k, self.grid.cell())).sqrt()
    }

    /// `(Σ_i ‖f(x_i)‖² Δx^n)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        let k = self.k;
        let s: f64 = self.data.chunks(k * k).map(|b| crate::coeff_algebra::norm_of_block(b, k, false).powi(2)).sum();
        (s * self.grid.cell()).sqrt()
    }
}

/// `Σ_i a(x_i)* b(x_i) w` for `r × ca` and `r × cb` blocks.
pub fn module_inner(a: &[C64], b: &[C64], r: usize, ca: usize, cb: usize, w: f64) -> Mat {
    let mut acc = vec![C64::new(0.0, 0.0); ca * cb];
    let npts = a.len() / (r * ca);
    for p in 0..npts {
        let ab = &a[p * r * ca..(p + 1) * r * ca];
        let bb = &b[p * r * cb..(p + 1) * r * cb];
        for i in 0..ca {
            for j in 0..cb {
                let mut s = C64::new(0.0, 0.0);
                for l in 0..r {
                    s += ab[l * ca + i].conj() * bb[l * cb + j];
                }
                acc[i * cb + j] += s;
            }
        }
    }
    Mat::from_row_slice(ca, cb, &acc) * C64::new(w, 0.0)
}

/// `Π_a (2πiν_a)^{α_a}` for FFT bin `p`, zero on the Nyquist bin of odd-order axes.
pub(crate) fn spectral_multiplier(g: &Grid, p: usize, alpha: &[usize]) -> C64 {
    let mi = g.multi_index(p);
    let mut f = C64::new(1.0, 0.0);
    for a in 0..g.n {
        let order = alpha.get(a).copied().unwrap_or(0);
        if order == 0 {
            continue;
        }
        let m = g.freq_index(mi[a]);
        if order % 2 == 1 && m == -(g.npts as i64) / 2 {
            return C64::new(0.0, 0.0);
        }
        f *= C64::new(0.0, 2.0 * PI * g.cycles(m)).powu(order as u32);
    }
    f
}

/// Evaluates `∂^α` of the interpolant with coefficients `c` at `x`.
pub(crate) fn eval_coeffs(c: &[C64], g: &Grid, k: usize, x: &[f64], alpha: &[usize]) -> Mat {
    let b = k * k;
    let mut acc = vec![C64::new(0.0, 0.0); b];
    let n = g.npts;
    // Separable phases per axis.
    let phases: Vec<Vec<C64>> = (0..g.n)
        .map(|a| {
            (0..n)
                .map(|j| {
                    let m = g.freq_index(j);
                    let order = alpha.get(a).copied().unwrap_or(0);
                    if order % 2 == 1 && m == -(n as i64) / 2 {
                        return C64::new(0.0, 0.0);
                    }
                    let nu = g.cycles(m);
                    C64::from_polar(1.0, 2.0 * PI * nu * x[a]) * C64::new(0.0, 2.0 * PI * nu).powu(order as u32)
                })
                .collect()
        })
        .collect();
    for p in 0..g.len() {
        let mi = g.multi_index(p);
        let mut z = phases[0][mi[0]];
        if g.n == 2 {
            z *= phases[1][mi[1]];
        }
        for (o, v) in acc.iter_mut().zip(&c[p * b..(p + 1) * b]) {
            *o += v * z;
        }
    }
    Mat::from_row_slice(k, k, &acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_algebra::{identity, scalar};

    fn gauss(grid: Grid, a: f64) -> GridSymbol {
        GridSymbol::from_fn(grid, 1, |x| scalar(1, C64::new((-a * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)))
    }

    #[test]
    fn gaussian_derivative() {
        let g = Grid::default_for(1).unwrap();
        let f = gauss(g, PI);
        let d = f.derivative(&[1]).unwrap();
        for p in 0..g.len() {
            let x = g.coord_1d(p);
            let want = -2.0 * PI * x * (-PI * x * x).exp();
            assert!((d.data()[p].re - want).abs() < 1e-8);
        }
    }

    #[test]
    fn seminorm_examples() {
        let g = Grid::default_for(1).unwrap();
        let f = gauss(g, PI);
        assert!((f.seminorm_s(0).unwrap() - 1.0).abs() < 1e-14);
        assert!(f.is_admissible());
        assert_eq!(GridSymbol::zeros(g, 2).seminorm_s(2).unwrap(), 0.0);
        let flat = GridSymbol::from_fn(g, 1, |_| identity(1));
        assert!(matches!(flat.seminorm_s(0), Err(Error::DecayViolation { .. })));
    }

    #[test]
    fn seminorm_s_against_dense_sampling() {
        // Brute force on a 16× finer grid using closed-form derivatives.
        let g = Grid::default_for(1).unwrap();
        let f = gauss(g, PI);
        let got = f.seminorm_s(2).unwrap();
        let fine = Grid::new(1, 16 * g.npts, g.half_width).unwrap();
        let mut want: f64 = 0.0;
        for i in 0..fine.npts {
            let x = fine.coord_1d(i);
            let e = (-PI * x * x).exp();
            let d0 = e;
            let d1 = 2.0 * PI * x.abs() * e;
            let d2 = ((4.0 * PI * PI * x * x - 2.0 * PI) * e).abs();
            want = want.max((1.0 + x * x) * d0.max(d1).max(d2));
        }
        assert!((got - want).abs() <= 0.01 * want, "{got} vs {want}");
    }

    #[test]
    fn self_dual_gaussian() {
        let g = Grid::default_for(1).unwrap();
        let f = gauss(g, 0.5);
        let ff = f.fourier();
        for q in 0..g.len() {
            let xi = ff.grid.coord_1d(q);
            assert!((ff.data()[q] - (-xi * xi / 2.0).exp()).norm() < 1e-8);
        }
        let back = ff.inverse_fourier();
        assert!(back.sup_distance(&f).unwrap() < 1e-12);
    }

    #[test]
    fn inner_products() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let bump = |c: f64| move |x: f64| (-(x - c).powi(2) * 4.0).exp();
        let (b1, b2) = (bump(-3.0), bump(3.0));
        let f = GridSymbol::from_fn(g, 2, |x| {
            crate::coeff_algebra::diag(&[C64::new(2.0 * b1(x[0]), 0.0), C64::new(b2(x[0]), 0.0)])
        });
        let ip = f.inner_product(&f).unwrap();
        assert!(ip[(0, 1)].norm() < 1e-14);
        let n1 = 2.0 * (PI / 8.0).sqrt().sqrt();
        let n2 = (PI / 8.0).sqrt().sqrt();
        assert!((f.norm_2() - n1.max(n2)).abs() < 1e-10);
        assert!((f.norm_l2() - (n1 * n1 + n2 * n2).sqrt()).abs() < 1e-10);
        let z = GridSymbol::zeros(g, 2);
        assert_eq!(f.inner_product(&z).unwrap(), Mat::zeros(2, 2));
    }

    #[test]
    fn eval_matches_samples() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = GridSymbol::from_fn(g, 1, |x| scalar(1, C64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp(), 0.0)));
        let x = g.point(37);
        assert!((f.eval(&x).index((0, 0)) - f.data()[37]).norm() < 1e-13);
    }
}
