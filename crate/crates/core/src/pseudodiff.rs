//! Operators on a grid model of the Hilbert module `E_n`.
//!
//! A [`ModuleVector`] holds `k × c` blocks on a position (or dual) grid with
//! inner product `⟨g, h⟩ = Σ_i g_i* h_i Δ^n`. Operators act by left
//! multiplication, so they commute with the right `M_k` action and the
//! module norm of an operator equals its norm on single columns.

use crate::coeff_algebra::{cstar_norm, Mat};
use crate::deformation::{symbol_dagger_exact, TwistedMultiplier};
use crate::heisenberg::{self, HeisenbergElement};
use crate::symbols::grid::{block_mul_acc, fft_all, Grid};
use crate::symbols::gridsym::module_inner;
use crate::symbols::phase::{PhaseGrid, PhaseSymbol};
use crate::symbols::{BaseSymbol, DeformationMatrix};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Seed of every randomized norm computation.
pub const NORM_SEED: u64 = 0x5EED;

/// An element of the grid module: `k × c` blocks per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector {
    pub grid: Grid,
    pub k: usize,
    pub c: usize,
    data: Vec<C64>,
}

impl ModuleVector {
    pub fn new(grid: Grid, k: usize, c: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() * k * c {
            return Err(Error::Invalid(format!("expected {} entries, got {}", grid.len() * k * c, data.len())));
        }
        Ok(Self { grid, k, c, data })
    }

    pub fn zeros(grid: Grid, k: usize, c: usize) -> Self {
        Self { grid, k, c, data: vec![ZERO; grid.len() * k * c] }
    }

    pub fn from_fn(grid: Grid, k: usize, c: usize, f: impl Fn(&[f64]) -> Mat) -> Self {
        let mut data = Vec::with_capacity(grid.len() * k * c);
        for p in 0..grid.len() {
            let m = f(&grid.point(p)[..grid.n]);
            for i in 0..k {
                for j in 0..c {
                    data.push(m[(i, j)]);
                }
            }
        }
        Self { grid, k, c, data }
    }

    /// Uniform random entries in the unit square, times a Gaussian envelope
    /// `e^{−|x|²/(2w²)}` when `width` is given.
    pub fn random(grid: Grid, k: usize, c: usize, rng: &mut impl Rng, width: Option<f64>) -> Self {
        let mut data = Vec::with_capacity(grid.len() * k * c);
        for p in 0..grid.len() {
            let x = grid.point(p);
            let env = width.map(|w| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)).exp()).unwrap_or(1.0);
            for _ in 0..k * c {
                data.push(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * env);
            }
        }
        Self { grid, k, c, data }
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// `⟨self, other⟩ = Σ_i self_i* other_i Δ^n`, a `c × c'` matrix.
    pub fn inner(&self, other: &Self) -> Result<Mat> {
        self.grid.check_same(&other.grid)?;
        if self.k != other.k {
            return Err(Error::GridMismatch(format!("block heights {} and {}", self.k, other.k)));
        }
        Ok(module_inner(&self.data, &other.data, self.k, self.c, other.c, self.grid.cell()))
    }

    /// Module norm `‖⟨g, g⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        cstar_norm(&module_inner(&self.data, &self.data, self.k, self.c, self.c, self.grid.cell())).sqrt()
    }

    /// Hilbert norm `(Σ_i ‖g_i‖_F² Δ^n)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell()).sqrt()
    }

    /// Right action `g·c` by a `c × c'` matrix.
    pub fn right_mul(&self, m: &Mat) -> Self {
        let (k, c, c2) = (self.k, self.c, m.ncols());
        let mb: Vec<C64> = (0..c).flat_map(|i| (0..c2).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        let mut data = vec![ZERO; self.grid.len() * k * c2];
        for p in 0..self.grid.len() {
            block_mul_acc(&self.data[p * k * c..(p + 1) * k * c], &mb, &mut data[p * k * c2..(p + 1) * k * c2], k, c, c2, C64::new(1.0, 0.0));
        }
        Self { grid: self.grid, k, c: c2, data }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { data: self.data.iter().map(|v| v * z).collect(), ..self.clone() }
    }

    pub fn axpy(&mut self, z: C64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * z;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    /// Column `j` as a `k × 1` vector field.
    pub fn column(&self, j: usize) -> Self {
        let (k, c) = (self.k, self.c);
        let data = (0..self.grid.len() * k).map(|i| self.data[i * c + j]).collect();
        Self { grid: self.grid, k, c: 1, data }
    }
}

/// The continuous-normalized transform `(Fg)(ξ_j) = (2π)^{−n/2} Σ_i e^{−ix_i·ξ_j} g(x_i) Δx^n`
/// onto the dual grid, or its inverse (from the dual grid back).
pub fn fourier(g: &ModuleVector, inverse: bool) -> ModuleVector {
    let grid = g.grid;
    let out_grid = grid.dual();
    let b = g.k * g.c;
    let half = grid.npts as i64 / 2;
    let norm = (grid.spacing() / (2.0 * PI).sqrt()).powi(grid.n as i32);
    // Dual point j has signed frequency m = j − N/2 per axis; x_0 = −L contributes (−1)^m.
    let pairing = |q: usize| -> (usize, f64) {
        let mi = grid.multi_index(q);
        let (mut bin, mut parity) = (0usize, 0i64);
        for a in 0..grid.n {
            let m = mi[a] as i64 - half;
            bin = bin * grid.npts + grid.bin(m);
            parity += m;
        }
        (bin, if parity.rem_euclid(2) == 0 { norm } else { -norm })
    };
    let mut out = vec![ZERO; g.data.len()];
    if !inverse {
        let mut d = g.data.clone();
        fft_all(&mut d, &grid, b, false);
        for q in 0..grid.len() {
            let (src, s) = pairing(q);
            for t in 0..b {
                out[q * b + t] = d[src * b + t] * s;
            }
        }
    } else {
        for q in 0..grid.len() {
            let (dst, s) = pairing(q);
            for t in 0..b {
                out[dst * b + t] = g.data[q * b + t] * s;
            }
        }
        fft_all(&mut out, &grid, b, true);
    }
    ModuleVector { grid: out_grid, k: g.k, c: g.c, data: out }
}

/// A bounded operator on the grid module.
#[derive(Clone)]
pub enum DiscretizedOperator {
    Identity { grid: Grid, k: usize },
    /// Kohn–Nirenberg quantization of phase-space samples.
    Op(Arc<PhaseGrid>),
    /// `L_f g = f ×_J g`.
    Rieffel(Arc<TwistedMultiplier>),
    /// `F` from `grid` onto its dual grid, or `F^{−1}` when `inverse`, with `grid` the domain.
    Fourier { grid: Grid, k: usize, inverse: bool },
    Heisenberg { grid: Grid, k: usize, h: HeisenbergElement },
    /// Dense matrix on columns, indexed `point·k + row`.
    Dense { grid: Grid, k: usize, m: Arc<DMatrix<C64>> },
    Adjoint(Box<DiscretizedOperator>),
    /// `A₀ A₁ ⋯ A_r`, applied right to left.
    Product(Vec<DiscretizedOperator>),
    Sum(Vec<(C64, DiscretizedOperator)>),
}

impl std::fmt::Debug for DiscretizedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Identity { .. } => write!(f, "Identity"),
            Self::Op(_) => write!(f, "Op"),
            Self::Rieffel(t) => write!(f, "Rieffel({})", t.route()),
            Self::Fourier { inverse, .. } => write!(f, "{}", if *inverse { "InverseFourier" } else { "Fourier" }),
            Self::Heisenberg { h, .. } => write!(f, "U{h:?}"),
            Self::Dense { m, .. } => write!(f, "Dense({}×{})", m.nrows(), m.ncols()),
            Self::Adjoint(a) => write!(f, "Adjoint({a:?})"),
            Self::Product(v) => f.debug_list().entries(v).finish(),
            Self::Sum(v) => f.debug_list().entries(v.iter().map(|(_, a)| a)).finish(),
        }
    }
}

fn check_input(grid: &Grid, k: usize, g: &ModuleVector) -> Result<()> {
    grid.check_same(&g.grid)?;
    if g.k != k {
        return Err(Error::GridMismatch(format!("operator acts on height-{k} blocks, vector has height {}", g.k)));
    }
    Ok(())
}

/// `Σ_j (Δξ/√2π)^n e^{ix_i·ξ_j} a(x_i, ξ_j) w_j` for `w` on the dual grid.
fn op_from_dual(a: &PhaseGrid, w: &ModuleVector) -> ModuleVector {
    let grid = a.grid;
    let dual = grid.dual();
    let (k, c) = (a.k, w.c);
    let bo = k * c;
    let e = phase_table(&grid);
    let norm = (dual.spacing() / (2.0 * PI).sqrt()).powi(grid.n as i32);
    let mut out = vec![ZERO; grid.len() * bo];
    let mut row = vec![ZERO; dual.len()];
    for px in 0..grid.len() {
        phase_row(&e, &grid, px, norm, &mut row);
        let o = &mut out[px * bo..(px + 1) * bo];
        if bo == 1 {
            let ar = &a.data()[px * dual.len()..(px + 1) * dual.len()];
            o[0] = row.iter().zip(ar).zip(&w.data).map(|((z, av), wv)| z * av * wv).sum();
            continue;
        }
        for (pxi, z) in row.iter().enumerate() {
            block_mul_acc(a.block(px, pxi), &w.data[pxi * bo..(pxi + 1) * bo], o, k, k, c, *z);
        }
    }
    ModuleVector { grid, k, c, data: out }
}

/// `w_j = (Δx/√2π)^n Σ_i e^{−ix_i·ξ_j} a(x_i, ξ_j)* h_i`, so that `Op(a)* = F^{−1} w`.
fn op_adjoint_to_dual(a: &PhaseGrid, h: &ModuleVector) -> ModuleVector {
    let grid = a.grid;
    let dual = grid.dual();
    let (k, c) = (a.k, h.c);
    let bo = k * c;
    let e = phase_table(&grid);
    let norm = (grid.spacing() / (2.0 * PI).sqrt()).powi(grid.n as i32);
    let mut out = vec![ZERO; dual.len() * bo];
    let mut row = vec![ZERO; dual.len()];
    for px in 0..grid.len() {
        phase_row(&e, &grid, px, norm, &mut row);
        let hb = &h.data[px * bo..(px + 1) * bo];
        if bo == 1 {
            let ar = &a.data()[px * dual.len()..(px + 1) * dual.len()];
            for ((o, z), av) in out.iter_mut().zip(&row).zip(ar) {
                *o += (z * av).conj() * hb[0];
            }
            continue;
        }
        for (pxi, z) in row.iter().enumerate() {
            let (ab, o, zc) = (a.block(px, pxi), &mut out[pxi * bo..(pxi + 1) * bo], z.conj());
            // o += z̄ a* h without materializing a*.
            for l in 0..k {
                for i in 0..k {
                    let ail = ab[l * k + i].conj() * zc;
                    for j in 0..c {
                        o[i * c + j] += ail * hb[l * c + j];
                    }
                }
            }
        }
    }
    ModuleVector { grid: dual, k, c, data: out }
}

/// `e^{i x_i ξ_j}` per axis.
fn phase_table(grid: &Grid) -> Vec<C64> {
    let dual = grid.dual();
    let n = grid.npts;
    let mut e = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            e.push(C64::from_polar(1.0, grid.coord_1d(i) * dual.coord_1d(j)));
        }
    }
    e
}

/// `scale · e^{i x_px·ξ_j}` for every dual point `j`, in dual-grid order.
fn phase_row(e: &[C64], grid: &Grid, px: usize, scale: f64, row: &mut [C64]) {
    let n = grid.npts;
    let a = grid.multi_index(px);
    let e0 = &e[a[0] * n..(a[0] + 1) * n];
    if grid.n == 1 {
        row.iter_mut().zip(e0).for_each(|(r, z)| *r = z * scale);
        return;
    }
    let e1 = &e[a[1] * n..(a[1] + 1) * n];
    for (b0, z0) in e0.iter().enumerate() {
        let z0 = z0 * scale;
        for (r, z1) in row[b0 * n..(b0 + 1) * n].iter_mut().zip(e1) {
            *r = z0 * z1;
        }
    }
}

impl DiscretizedOperator {
    /// Grid and block height of the domain.
    pub fn domain(&self) -> (Grid, usize) {
        match self {
            Self::Identity { grid, k } | Self::Fourier { grid, k, .. } | Self::Heisenberg { grid, k, .. } | Self::Dense { grid, k, .. } => (*grid, *k),
            Self::Op(a) => (a.grid, a.k),
            Self::Rieffel(t) => (*t.grid(), t.k()),
            Self::Adjoint(a) => a.codomain(),
            Self::Product(v) => v.last().expect("empty product").domain(),
            Self::Sum(v) => v.first().expect("empty sum").1.domain(),
        }
    }

    pub fn codomain(&self) -> (Grid, usize) {
        match self {
            Self::Fourier { grid, k, .. } => (grid.dual(), *k),
            Self::Adjoint(a) => a.domain(),
            Self::Product(v) => v.first().expect("empty product").codomain(),
            _ => self.domain(),
        }
    }

    pub fn apply(&self, g: &ModuleVector) -> Result<ModuleVector> {
        let (grid, k) = self.domain();
        check_input(&grid, k, g)?;
        Ok(match self {
            Self::Identity { .. } => g.clone(),
            Self::Op(a) => op_from_dual(a, &fourier(g, false)),
            Self::Rieffel(t) => ModuleVector { data: t.apply(&g.data, g.c), ..g.clone() },
            Self::Fourier { inverse, .. } => fourier(g, *inverse),
            Self::Heisenberg { h, .. } => heisenberg::heisenberg_act(h, g)?,
            Self::Dense { m, .. } => dense_apply(m, g, false),
            Self::Adjoint(a) => a.apply_adjoint(g)?,
            Self::Product(v) => {
                let mut cur = g.clone();
                for a in v.iter().rev() {
                    cur = a.apply(&cur)?;
                }
                cur
            }
            Self::Sum(v) => {
                let (cg, ck) = self.codomain();
                let mut acc = ModuleVector::zeros(cg, ck, g.c);
                for (z, a) in v {
                    acc.axpy(*z, &a.apply(g)?);
                }
                acc
            }
        })
    }

    /// `A* h`, exact with respect to the module inner products.
    pub fn apply_adjoint(&self, h: &ModuleVector) -> Result<ModuleVector> {
        let (grid, k) = self.codomain();
        check_input(&grid, k, h)?;
        Ok(match self {
            Self::Identity { .. } => h.clone(),
            Self::Op(a) => fourier(&op_adjoint_to_dual(a, h), true),
            Self::Rieffel(t) => ModuleVector { data: t.apply_adjoint(&h.data, h.c), ..h.clone() },
            Self::Fourier { inverse, .. } => fourier(h, !*inverse),
            Self::Heisenberg { h: el, .. } => heisenberg::heisenberg_act_adjoint(el, h)?,
            Self::Dense { m, .. } => dense_apply(m, h, true),
            Self::Adjoint(a) => a.apply(h)?,
            Self::Product(v) => {
                let mut cur = h.clone();
                for a in v {
                    cur = a.apply_adjoint(&cur)?;
                }
                cur
            }
            Self::Sum(v) => {
                let (dg, dk) = self.domain();
                let mut acc = ModuleVector::zeros(dg, dk, h.c);
                for (z, a) in v {
                    acc.axpy(z.conj(), &a.apply_adjoint(h)?);
                }
                acc
            }
        })
    }

    /// The adjoint operator; symbol-built operators stay symbol-built.
    pub fn adjoint(&self) -> Self {
        match self {
            Self::Identity { .. } => self.clone(),
            Self::Op(a) => match symbol_dagger_exact(&PhaseSymbol::Grid((**a).clone())) {
                PhaseSymbol::Grid(g) => Self::Op(Arc::new(g)),
                PhaseSymbol::Waves(_) => unreachable!("grid adjoint stays on the grid"),
            },
            Self::Fourier { grid, k, inverse } => Self::Fourier { grid: grid.dual(), k: *k, inverse: !inverse },
            Self::Dense { grid, k, m } => Self::Dense { grid: *grid, k: *k, m: Arc::new(m.adjoint()) },
            Self::Adjoint(a) => (**a).clone(),
            Self::Product(v) => Self::Product(v.iter().rev().map(Self::adjoint).collect()),
            Self::Sum(v) => Self::Sum(v.iter().map(|(z, a)| (z.conj(), a.adjoint())).collect()),
            Self::Rieffel(_) | Self::Heisenberg { .. } => Self::Adjoint(Box::new(self.clone())),
        }
    }

    /// Materializes the operator on columns (`N^n k` square); for tests and small grids.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let (grid, k) = self.domain();
        let (cg, ck) = self.codomain();
        let dim = grid.len() * k;
        let mut m = DMatrix::zeros(cg.len() * ck, dim);
        for col in 0..dim {
            let mut e = ModuleVector::zeros(grid, k, 1);
            e.data[col] = C64::new(1.0, 0.0);
            let out = self.apply(&e)?;
            for (r, v) in out.data.iter().enumerate() {
                m[(r, col)] = *v;
            }
        }
        Ok(m)
    }
}

fn dense_apply(m: &DMatrix<C64>, g: &ModuleVector, adjoint: bool) -> ModuleVector {
    let (k, c) = (g.k, g.c);
    let rows = g.grid.len() * k;
    let x = DMatrix::from_row_slice(rows, c, &g.data);
    let y = if adjoint { m.adjoint() * x } else { m * x };
    let mut data = Vec::with_capacity(rows * c);
    for r in 0..rows {
        for j in 0..c {
            data.push(y[(r, j)]);
        }
    }
    ModuleVector { grid: g.grid, k, c, data }
}

/// `Op(a)` on `grid`.
pub fn op(a: &PhaseSymbol, grid: &Grid) -> Result<DiscretizedOperator> {
    Ok(DiscretizedOperator::Op(Arc::new(a.to_grid(grid)?)))
}

/// `Op(a) g` by the Kohn–Nirenberg rule: transform, multiply by `a(x_i, ξ_j)` on the left, transform back.
pub fn op_apply(a: &PhaseSymbol, g: &ModuleVector) -> Result<ModuleVector> {
    op(a, &g.grid)?.apply(g)
}

/// `L_f` on `grid`.
pub fn rieffel_operator(f: &BaseSymbol, grid: &Grid, j: &DeformationMatrix) -> Result<DiscretizedOperator> {
    let t = match f {
        BaseSymbol::Waves(w) => TwistedMultiplier::from_plane(w, grid, j)?,
        BaseSymbol::Grid(g) => {
            g.grid.check_same(grid)?;
            TwistedMultiplier::from_grid(g, j)?
        }
    };
    Ok(DiscretizedOperator::Rieffel(Arc::new(t)))
}

/// Largest eigenvalue of a Hermitian positive map on `C^dim` by Lanczos with
/// full reorthogonalization, stopping when the Ritz residual falls below
/// `tol` relative to the Ritz value.
pub fn lanczos_top(apply: &dyn Fn(&[C64]) -> Result<Vec<C64>>, dim: usize, seed: u64, tol: f64, max_iter: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let nrm = |a: &[C64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let s = nrm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    let mut basis: Vec<Vec<C64>> = vec![v];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (vec![], vec![]);
    let limit = max_iter.min(dim);
    let mut last = 0.0;
    for j in 0..limit {
        let mut w = apply(&basis[j])?;
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= h * y;
                }
            }
        }
        let b = nrm(&w);
        let m = alpha.len();
        let check = m <= 40 || m % 5 == 0 || b == 0.0 || j + 1 == limit;
        if check {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (idx, theta) = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
            let resid = b * eig.eigenvectors[(m - 1, idx)].abs();
            last = theta;
            if theta <= 0.0 && b <= 1e-300 {
                return Ok(0.0);
            }
            if resid <= tol * theta.abs().max(f64::MIN_POSITIVE) || b <= 1e-14 * theta.abs() || j + 1 == dim {
                return Ok(theta.max(0.0));
            }
        }
        if b == 0.0 {
            return Ok(last.max(0.0));
        }
        beta.push(b);
        basis.push(w.into_iter().map(|z| z / b).collect());
    }
    Err(Error::NoConvergence { iterations: limit })
}

fn gram_apply(a: &DiscretizedOperator) -> impl Fn(&[C64]) -> Result<Vec<C64>> + '_ {
    let (grid, k) = a.domain();
    move |v: &[C64]| {
        let g = ModuleVector { grid, k, c: 1, data: v.to_vec() };
        Ok(a.apply_adjoint(&a.apply(&g)?)?.data)
    }
}

/// `‖A‖`, the largest singular value of the column action, via Lanczos on
/// `A*A` seeded with [`NORM_SEED`].
pub fn operator_norm(a: &DiscretizedOperator) -> Result<f64> {
    let (grid, k) = a.domain();
    let f = gram_apply(a);
    Ok(lanczos_top(&f, grid.len() * k, NORM_SEED, 1e-12, 10_000)?.sqrt())
}

/// `‖A‖` by plain power iteration on `A*A`: Rayleigh quotient, relative
/// change below `1e-8`, at most `10⁴` steps.
pub fn operator_norm_power(a: &DiscretizedOperator) -> Result<f64> {
    let (grid, k) = a.domain();
    let f = gram_apply(a);
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
    let dim = grid.len() * k;
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut prev = f64::NAN;
    for _ in 0..10_000 {
        let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if s == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|z| *z /= s);
        let w = f(&v)?;
        let rq: f64 = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum();
        if rq <= 0.0 {
            return Ok(0.0);
        }
        if (rq - prev).abs() <= 1e-8 * rq {
            return Ok(rq.sqrt());
        }
        prev = rq;
        v = w;
    }
    Err(Error::NoConvergence { iterations: 10_000 })
}

/// `π(a) = max_{β, γ ∈ {0,1}^n} sup ‖∂_x^β ∂_ξ^γ a‖`, the sup taken on `grid × grid.dual()`
/// (exact for a single plane wave).
pub fn cv_functional(a: &PhaseSymbol, grid: &Grid) -> Result<f64> {
    let n = a.n();
    let mut best: f64 = 0.0;
    for mask in 0..(1usize << (2 * n)) {
        let beta: Vec<usize> = (0..n).map(|i| (mask >> i) & 1).collect();
        let gamma: Vec<usize> = (0..n).map(|i| (mask >> (n + i)) & 1).collect();
        best = best.max(a.derivative(&beta, &gamma)?.grid_sup(grid)?);
    }
    Ok(best)
}

/// `‖Op(a)‖ / π(a)`.
pub fn cv_ratio(a: &PhaseSymbol, grid: &Grid) -> Result<f64> {
    let pi = cv_functional(a, grid)?;
    let norm = operator_norm(&op(a, grid)?)?;
    if pi == 0.0 {
        if norm > 0.0 {
            return Err(Error::DivideByZero(format!("π(a) = 0 but ‖Op(a)‖ = {norm:e}")));
        }
        return Ok(0.0);
    }
    Ok(norm / pi)
}
