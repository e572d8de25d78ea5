//! The deformed product `f ×_J g`, the symbol calculus `a†`, `a × b`, the
//! tilde map and the regularized oscillatory integrals behind them.
//!
//! Production routes are exact or spectral: plane waves multiply by explicit
//! phases, grid symbols go through the twisted operator
//! `L_f g = Σ_m f̂_m e^{2πiν_m·x} g(x + Jν_m)`. The regularized double
//! integrals are kept as an independent oracle and cross-checked at a few
//! sample points.

use crate::coeff_algebra::{cstar_norm, Mat};
use crate::quad::composite_points;
use crate::symbols::grid::{block_adjoint, block_mul_acc, block_to_mat, fft_all, fft_axis, Grid};
use crate::symbols::phase::{PhaseGrid, PhaseSymbol, PhaseWave, PhaseWaves};
use crate::symbols::{BaseSymbol, DeformationMatrix, GridSymbol, PlaneWaveSymbol, Symbol};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Regularization and quadrature parameters for the oscillatory integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct OscIntegralConfig {
    /// Power of `(1 + |z|²)^{−N}` traded for `(1 − Δ_η)^N`.
    pub n_reg: usize,
    /// Power of `(1 + |η|²)^{−M}` traded for `(1 − Δ_z)^M`.
    pub m_reg: usize,
    /// Truncation radius per axis.
    pub radius: f64,
    /// Quadrature points per axis (16-point Gauss–Legendre panels).
    pub points: usize,
    /// Cross-route tolerance; disagreement above ten times this is an error.
    pub tol: f64,
    /// How many sample points the oracle route is evaluated at.
    pub check_points: usize,
}

impl Default for OscIntegralConfig {
    fn default() -> Self {
        Self { n_reg: 2, m_reg: 2, radius: 25.0, points: 1024, tol: 1e-6, check_points: 1 }
    }
}

impl OscIntegralConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if 2 * self.n_reg <= n || 2 * self.m_reg <= n {
            return Err(Error::Invalid(format!(
                "regularization orders must exceed n/2 = {}: got N = {}, M = {}",
                n as f64 / 2.0,
                self.n_reg,
                self.m_reg
            )));
        }
        if !(self.radius > 0.0) || self.points < 16 || !(self.tol > 0.0) {
            return Err(Error::Invalid("need R > 0, Q ≥ 16 and tol > 0".into()));
        }
        Ok(())
    }

    /// Quadrature nodes and weights on `[−R, R]`.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        composite_points(-self.radius, self.radius, self.points)
    }
}

fn check_box(f: &PlaneWaveSymbol, g: &PlaneWaveSymbol, j: &DeformationMatrix) -> Result<()> {
    if f.n != g.n || (f.half_width - g.half_width).abs() > 1e-12 * f.half_width || f.k != g.k {
        return Err(Error::GridMismatch(format!(
            "plane-wave boxes differ: (n, L, k) = ({}, {}, {}) vs ({}, {}, {})",
            f.n, f.half_width, f.k, g.n, g.half_width, g.k
        )));
    }
    if j.dim() != f.n {
        return Err(Error::GridMismatch(format!("J is {0}×{0} but symbols live on R^{1}", j.dim(), f.n)));
    }
    Ok(())
}

/// `e_p ×_J e_q = e^{−2πi p·Jq} e_{p+q}`, extended bilinearly with `c_p c_q`.
pub fn deformed_product_exact(f: &PlaneWaveSymbol, g: &PlaneWaveSymbol, j: &DeformationMatrix) -> Result<PlaneWaveSymbol> {
    check_box(f, g, j)?;
    let mut out = PlaneWaveSymbol::new(f.n, f.half_width, f.k);
    for (mp, cp) in f.terms() {
        let p = f.freq(mp);
        for (mq, cq) in g.terms() {
            let q = g.freq(mq);
            let phase = C64::from_polar(1.0, -2.0 * PI * j.form(&p, &q));
            let m: Vec<i64> = mp.iter().zip(mq).map(|(a, b)| a + b).collect();
            out.add_term(m, cp * cq * phase);
        }
    }
    Ok(out)
}

/// Multiplies sample `p` of point-major `data` by `phase(p)`.
fn modulate(data: &mut [C64], grid: &Grid, block: usize, nu: &[f64]) {
    for p in 0..grid.len() {
        let x = grid.point(p);
        let ph: f64 = (0..grid.n).map(|a| 2.0 * PI * nu[a] * x[a]).sum();
        let z = C64::from_polar(1.0, ph);
        for v in &mut data[p * block..(p + 1) * block] {
            *v *= z;
        }
    }
}

/// Multiplies FFT bin `p` by `e^{2πi ν_p·s}`, i.e. translates by `s` in the spectral domain.
fn shift_bins(data: &mut [C64], grid: &Grid, block: usize, s: &[f64]) {
    for p in 0..grid.len() {
        let mi = grid.multi_index(p);
        let ph: f64 = (0..grid.n).map(|a| 2.0 * PI * grid.cycles(grid.freq_index(mi[a])) * s[a]).sum();
        let z = C64::from_polar(1.0, ph);
        for v in &mut data[p * block..(p + 1) * block] {
            *v *= z;
        }
    }
}

/// Same as [`shift_bins`] along one axis of a two-dimensional grid.
fn shift_axis_bins(data: &mut [C64], grid: &Grid, block: usize, axis: usize, s: f64) {
    let f: Vec<C64> = (0..grid.npts).map(|j| C64::from_polar(1.0, 2.0 * PI * grid.cycles(grid.freq_index(j)) * s)).collect();
    for p in 0..grid.len() {
        let z = f[grid.multi_index(p)[axis]];
        for v in &mut data[p * block..(p + 1) * block] {
            *v *= z;
        }
    }
}

struct TwistTerm {
    nu: Vec<f64>,
    shift: Vec<f64>,
    c: Vec<C64>,
}

enum Twist {
    Pointwise(Vec<C64>),
    Sparse(Vec<TwistTerm>),
    /// `w[(m₁, q₁, x₂)] = F_{m₁}(x₂ + θν_{q₁})` with `F_{m₁}` the axis-2 series of row `m₁` of `f̂`.
    Dense { theta: f64, w: Vec<C64> },
}

/// The operator `g ↦ f ×_J g` on grid samples with `k × c` blocks.
///
/// Three realizations share one definition: pointwise multiplication when
/// `J = 0`; a sum of modulated spectral shifts when `f` has few Fourier terms;
/// and for dense `f` on `n = 2` a row-by-row factorization costing
/// `O(N³ log N)` instead of `O(N⁴)`.
///
/// Multiplying by `e_p` wraps frequencies around the periodic window, and the
/// wrapped part then picks up the shift `e^{2πiν·Jq}` at the wrong
/// representative. So `L_f L_g = L_{f×g}` holds on all of `C^{N^n}` only when
/// every `(N/2L)·(Jq)_i` is an integer (`Nθ/(4L²) ∈ ℤ` for the symplectic `J`),
/// and otherwise on vectors band-limited away from the window edge.
pub struct TwistedMultiplier {
    grid: Grid,
    k: usize,
    twist: Twist,
}

impl TwistedMultiplier {
    pub fn from_grid(f: &GridSymbol, j: &DeformationMatrix) -> Result<Self> {
        let grid = f.grid;
        if j.dim() != grid.n {
            return Err(Error::GridMismatch(format!("J is {0}×{0} on an n = {1} grid", j.dim(), grid.n)));
        }
        let k = f.k;
        let b = k * k;
        if j.is_zero() {
            return Ok(Self { grid, k, twist: Twist::Pointwise(f.data().to_vec()) });
        }
        let c = f.coeffs();
        let norms: Vec<f64> = c.chunks(b).map(|blk| blk.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
        let top = norms.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..grid.len()).filter(|&p| norms[p] > 1e-15 * top).collect();
        if keep.len() <= grid.npts / 2 {
            let terms = keep
                .into_iter()
                .map(|p| {
                    let mi = grid.multi_index(p);
                    let nu: Vec<f64> = (0..grid.n).map(|a| grid.cycles(grid.freq_index(mi[a]))).collect();
                    TwistTerm { shift: j.apply(&nu), nu, c: c[p * b..(p + 1) * b].to_vec() }
                })
                .collect();
            return Ok(Self { grid, k, twist: Twist::Sparse(terms) });
        }
        let theta = j.theta();
        let n = grid.npts;
        let line = Grid { n: 1, npts: n, half_width: grid.half_width };
        let mut w = vec![ZERO; n * n * n * b];
        let mut buf = vec![ZERO; n * b];
        for j1 in 0..n {
            for q1 in 0..n {
                let s = theta * grid.cycles(grid.freq_index(q1));
                for j2 in 0..n {
                    let m2 = grid.freq_index(j2);
                    let sign = if j2 % 2 == 0 { 1.0 } else { -1.0 };
                    let z = C64::from_polar(sign, 2.0 * PI * grid.cycles(m2) * s);
                    for t in 0..b {
                        buf[j2 * b + t] = c[(j1 * n + j2) * b + t] * z;
                    }
                }
                fft_axis(&mut buf, &line, b, 0, true);
                let off = (j1 * n + q1) * n * b;
                w[off..off + n * b].copy_from_slice(&buf);
            }
        }
        Ok(Self { grid, k, twist: Twist::Dense { theta, w } })
    }

    /// `L_f` for a plane-wave `f`, with exact frequencies on any grid.
    pub fn from_plane(f: &PlaneWaveSymbol, grid: &Grid, j: &DeformationMatrix) -> Result<Self> {
        if f.n != grid.n || j.dim() != grid.n {
            return Err(Error::GridMismatch(format!("symbol on R^{}, grid on R^{}, J {}×{}", f.n, grid.n, j.dim(), j.dim())));
        }
        if j.is_zero() {
            return Ok(Self { grid: *grid, k: f.k, twist: Twist::Pointwise(f.sample(grid)?.into_data()) });
        }
        let terms = f
            .terms()
            .map(|(m, c)| {
                let nu = f.freq(m);
                TwistTerm { shift: j.apply(&nu), nu, c: crate::symbols::grid::mat_to_block(c) }
            })
            .collect();
        Ok(Self { grid: *grid, k: f.k, twist: Twist::Sparse(terms) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn route(&self) -> &'static str {
        match self.twist {
            Twist::Pointwise(_) => "pointwise",
            Twist::Sparse(_) => "sparse",
            Twist::Dense { .. } => "dense",
        }
    }

    /// `(L_f g)` for point-major `g` with `k × c` blocks.
    pub fn apply(&self, g: &[C64], c: usize) -> Vec<C64> {
        let (grid, k) = (&self.grid, self.k);
        let bo = k * c;
        let mut out = vec![ZERO; g.len()];
        match &self.twist {
            Twist::Pointwise(f) => {
                for p in 0..grid.len() {
                    block_mul_acc(&f[p * k * k..(p + 1) * k * k], &g[p * bo..(p + 1) * bo], &mut out[p * bo..(p + 1) * bo], k, k, c, C64::new(1.0, 0.0));
                }
            }
            Twist::Sparse(terms) => {
                let mut gh = g.to_vec();
                fft_all(&mut gh, grid, bo, false);
                let scale = C64::new(1.0 / grid.len() as f64, 0.0);
                let mut tmp = vec![ZERO; g.len()];
                for t in terms {
                    tmp.copy_from_slice(&gh);
                    shift_bins(&mut tmp, grid, bo, &t.shift);
                    fft_all(&mut tmp, grid, bo, true);
                    modulate(&mut tmp, grid, bo, &t.nu);
                    for p in 0..grid.len() {
                        block_mul_acc(&t.c, &tmp[p * bo..(p + 1) * bo], &mut out[p * bo..(p + 1) * bo], k, k, c, scale);
                    }
                }
            }
            Twist::Dense { theta, w } => {
                let n = grid.npts;
                let mut gh = g.to_vec();
                fft_all(&mut gh, grid, bo, false);
                let mut u = vec![ZERO; g.len()];
                let mut v = vec![ZERO; g.len()];
                let scale = 1.0 / (n * n) as f64;
                for j1 in 0..n {
                    let nu1 = grid.cycles(grid.freq_index(j1));
                    u.copy_from_slice(&gh);
                    shift_axis_bins(&mut u, grid, bo, 1, -theta * nu1);
                    fft_axis(&mut u, grid, bo, 1, true);
                    v.iter_mut().for_each(|z| *z = ZERO);
                    for q1 in 0..n {
                        for i2 in 0..n {
                            let p = q1 * n + i2;
                            let wo = ((j1 * n + q1) * n + i2) * k * k;
                            block_mul_acc(&w[wo..wo + k * k], &u[p * bo..(p + 1) * bo], &mut v[p * bo..(p + 1) * bo], k, k, c, C64::new(1.0, 0.0));
                        }
                    }
                    fft_axis(&mut v, grid, bo, 0, true);
                    for i1 in 0..n {
                        let z = C64::from_polar(scale, 2.0 * PI * nu1 * grid.coord_1d(i1));
                        for i2 in 0..n {
                            let p = i1 * n + i2;
                            for t in 0..bo {
                                out[p * bo + t] += v[p * bo + t] * z;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// The exact matrix adjoint of [`apply`](Self::apply) for the inner product `Σ_i h_i* g_i Δx^n`.
    pub fn apply_adjoint(&self, h: &[C64], c: usize) -> Vec<C64> {
        let (grid, k) = (&self.grid, self.k);
        let bo = k * c;
        match &self.twist {
            Twist::Pointwise(f) => {
                let mut out = vec![ZERO; h.len()];
                for p in 0..grid.len() {
                    let fa = block_adjoint(&f[p * k * k..(p + 1) * k * k], k, k);
                    block_mul_acc(&fa, &h[p * bo..(p + 1) * bo], &mut out[p * bo..(p + 1) * bo], k, k, c, C64::new(1.0, 0.0));
                }
                out
            }
            Twist::Sparse(terms) => {
                let mut acc = vec![ZERO; h.len()];
                let mut tmp = vec![ZERO; h.len()];
                let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
                for t in terms {
                    let ca = block_adjoint(&t.c, k, k);
                    tmp.iter_mut().for_each(|z| *z = ZERO);
                    for p in 0..grid.len() {
                        block_mul_acc(&ca, &h[p * bo..(p + 1) * bo], &mut tmp[p * bo..(p + 1) * bo], k, k, c, C64::new(1.0, 0.0));
                    }
                    modulate(&mut tmp, grid, bo, &neg(&t.nu));
                    fft_all(&mut tmp, grid, bo, false);
                    shift_bins(&mut tmp, grid, bo, &neg(&t.shift));
                    for (a, b) in acc.iter_mut().zip(&tmp) {
                        *a += b;
                    }
                }
                fft_all(&mut acc, grid, bo, true);
                let s = 1.0 / grid.len() as f64;
                acc.iter_mut().for_each(|z| *z *= s);
                acc
            }
            Twist::Dense { theta, w } => {
                let n = grid.npts;
                let mut acc = vec![ZERO; h.len()];
                let mut v = vec![ZERO; h.len()];
                let mut u = vec![ZERO; h.len()];
                for j1 in 0..n {
                    let nu1 = grid.cycles(grid.freq_index(j1));
                    for i1 in 0..n {
                        let z = C64::from_polar(1.0, -2.0 * PI * nu1 * grid.coord_1d(i1));
                        for i2 in 0..n {
                            let p = i1 * n + i2;
                            for t in 0..bo {
                                v[p * bo + t] = h[p * bo + t] * z;
                            }
                        }
                    }
                    fft_axis(&mut v, grid, bo, 0, false);
                    u.iter_mut().for_each(|z| *z = ZERO);
                    for q1 in 0..n {
                        for i2 in 0..n {
                            let p = q1 * n + i2;
                            let wo = ((j1 * n + q1) * n + i2) * k * k;
                            let wa = block_adjoint(&w[wo..wo + k * k], k, k);
                            block_mul_acc(&wa, &v[p * bo..(p + 1) * bo], &mut u[p * bo..(p + 1) * bo], k, k, c, C64::new(1.0, 0.0));
                        }
                    }
                    fft_axis(&mut u, grid, bo, 0, true);
                    fft_axis(&mut u, grid, bo, 1, false);
                    shift_axis_bins(&mut u, grid, bo, 1, theta * nu1);
                    for (a, b) in acc.iter_mut().zip(&u) {
                        *a += b;
                    }
                }
                fft_axis(&mut acc, grid, bo, 1, true);
                let s = 1.0 / (n * n) as f64;
                acc.iter_mut().for_each(|z| *z *= s);
                acc
            }
        }
    }
}

/// Grid indices at which the oracle route is evaluated: the centre, then
/// points stepping diagonally away from it.
fn check_indices(grid: &Grid, count: usize) -> Vec<usize> {
    let n = grid.npts;
    let step = (n / 8).max(1);
    (0..count)
        .map(|i| {
            let off = |d: usize| (n / 2 + d * step * (i % 4) + i / 4) % n;
            if grid.n == 1 {
                off(1)
            } else {
                off(1) * n + off(3)
            }
        })
        .collect()
}

/// Oracle for `(f ×_J g)(x_p)`: the iterated integral `∫ f(x + Ju) G(u) du`
/// with `G(u) = ∫ g(x + v) e^{2πiu·v} dv` summed directly over the samples of
/// `g` and the `u`-integral done by Gauss–Legendre over the grid's band.
pub fn product_oracle_at(f: &GridSymbol, g: &GridSymbol, j: &DeformationMatrix, p: usize, points: usize) -> Mat {
    let grid = f.grid;
    let (k, b) = (f.k, f.k * f.k);
    let n = grid.npts;
    let band = n as f64 / (4.0 * grid.half_width);
    let (un, uw) = composite_points(-band, band, points);
    let q = un.len();
    let x = grid.point(p);
    let dx = grid.spacing();
    let fh = f.coeffs();
    let gd = g.data();
    let e = |nu: f64, t: f64| C64::from_polar(1.0, 2.0 * PI * nu * t);
    if grid.n == 1 {
        let mut acc = vec![ZERO; b];
        for (u, wu) in un.iter().zip(&uw) {
            for i in 0..n {
                let z = e(*u, grid.coord_1d(i) - x[0]) * (wu * dx);
                for t in 0..b {
                    acc[t] += gd[i * b + t] * z;
                }
            }
        }
        return f.value(p) * block_to_mat(&acc, k, k);
    }
    let theta = j.theta();
    // G[u1][u2] via the partial sum over the first axis.
    let mut part = vec![ZERO; q * n * b];
    for (a, u1) in un.iter().enumerate() {
        for i1 in 0..n {
            let z = e(*u1, grid.coord_1d(i1) - x[0]);
            for i2 in 0..n {
                for t in 0..b {
                    part[(a * n + i2) * b + t] += gd[(i1 * n + i2) * b + t] * z;
                }
            }
        }
    }
    let mut gq = vec![ZERO; q * q * b];
    for a in 0..q {
        for (c2, u2) in un.iter().enumerate() {
            for i2 in 0..n {
                let z = e(*u2, grid.coord_1d(i2) - x[1]) * (dx * dx);
                for t in 0..b {
                    gq[(a * q + c2) * b + t] += part[(a * n + i2) * b + t] * z;
                }
            }
        }
    }
    // f(x₁ + θu₂, x₂ − θu₁) via the partial sum over the first frequency.
    let mut fb = vec![ZERO; q * n * b];
    for (c2, u2) in un.iter().enumerate() {
        for j1 in 0..n {
            let z = e(grid.cycles(grid.freq_index(j1)), x[0] + theta * u2);
            for j2 in 0..n {
                for t in 0..b {
                    fb[(c2 * n + j2) * b + t] += fh[(j1 * n + j2) * b + t] * z;
                }
            }
        }
    }
    let mut acc = vec![ZERO; b];
    let mut fv = vec![ZERO; b];
    for (a, u1) in un.iter().enumerate() {
        let ph: Vec<C64> = (0..n).map(|j2| e(grid.cycles(grid.freq_index(j2)), x[1] - theta * u1)).collect();
        for c2 in 0..q {
            fv.iter_mut().for_each(|z| *z = ZERO);
            for (j2, z) in ph.iter().enumerate() {
                for t in 0..b {
                    fv[t] += fb[(c2 * n + j2) * b + t] * z;
                }
            }
            block_mul_acc(&fv, &gq[(a * q + c2) * b..(a * q + c2 + 1) * b], &mut acc, k, k, k, C64::new(uw[a] * uw[c2], 0.0));
        }
    }
    block_to_mat(&acc, k, k)
}

/// `f ×_J g` on grids by the spectral route, with the route disagreement
/// measured at `cfg.check_points` sample points when `g` decays at the
/// boundary (periodic, non-decaying `g` has no integral oracle on the grid).
pub fn deformed_product_report(f: &GridSymbol, g: &GridSymbol, j: &DeformationMatrix, cfg: &OscIntegralConfig) -> Result<(GridSymbol, Option<f64>)> {
    f.grid.check_same(&g.grid)?;
    if f.k != g.k {
        return Err(Error::GridMismatch(format!("matrix sizes {} and {}", f.k, g.k)));
    }
    cfg.validate(f.grid.n)?;
    let op = TwistedMultiplier::from_grid(f, j)?;
    let out = GridSymbol::from_data(f.grid, f.k, op.apply(g.data(), g.k))?;
    if cfg.check_points == 0 || !g.is_admissible() {
        return Ok((out, None));
    }
    let scale = (f.sup_norm() * g.sup_norm()).max(1.0);
    let mut worst: f64 = 0.0;
    for p in check_indices(&f.grid, cfg.check_points) {
        let oracle = product_oracle_at(f, g, j, p, cfg.points.min(512));
        worst = worst.max(cstar_norm(&(oracle - out.value(p))) / scale);
    }
    if worst > 10.0 * cfg.tol {
        return Err(Error::Convergence { what: "deformed product".into(), diff: worst, allowed: 10.0 * cfg.tol });
    }
    Ok((out, Some(worst)))
}

pub fn deformed_product_numeric(f: &GridSymbol, g: &GridSymbol, j: &DeformationMatrix, cfg: &OscIntegralConfig) -> Result<GridSymbol> {
    deformed_product_report(f, g, j, cfg).map(|r| r.0)
}

/// `f̃(x, ξ) = f(x − Jξ/(2π))`; exact on plane waves (`e_p ↦ e^{2πip·x} e^{−ip·Jξ}`).
pub fn tilde_plane(f: &PlaneWaveSymbol, j: &DeformationMatrix) -> PhaseWaves {
    let mut out = PhaseWaves::new(f.n, f.k);
    for (m, c) in f.terms() {
        let p = f.freq(m);
        let kx = p.iter().map(|v| 2.0 * PI * v).collect();
        out.push(kx, j.apply(&p), c.clone());
    }
    out
}

/// `f̃` sampled on `grid × grid.dual()` by spectral translation of `f`.
pub fn tilde_grid(f: &GridSymbol, j: &DeformationMatrix) -> Result<PhaseGrid> {
    let grid = f.grid;
    if j.dim() != grid.n {
        return Err(Error::GridMismatch(format!("J is {0}×{0} on an n = {1} grid", j.dim(), grid.n)));
    }
    let dual = grid.dual();
    let b = f.k * f.k;
    let mut fh = f.data().to_vec();
    fft_all(&mut fh, &grid, b, false);
    let mut data = vec![ZERO; grid.len() * dual.len() * b];
    let mut tmp = vec![ZERO; fh.len()];
    for pxi in 0..dual.len() {
        let xi = dual.point(pxi);
        let s: Vec<f64> = j.apply(&xi[..grid.n]).iter().map(|v| -v / (2.0 * PI)).collect();
        tmp.copy_from_slice(&fh);
        shift_bins(&mut tmp, &grid, b, &s);
        fft_all(&mut tmp, &grid, b, true);
        let sc = 1.0 / grid.len() as f64;
        for px in 0..grid.len() {
            let off = (px * dual.len() + pxi) * b;
            for t in 0..b {
                data[off + t] = tmp[px * b + t] * sc;
            }
        }
    }
    PhaseGrid::from_data(grid, f.k, data)
}

pub fn tilde_map(f: &BaseSymbol, j: &DeformationMatrix) -> Result<PhaseSymbol> {
    match f {
        BaseSymbol::Waves(w) => {
            if j.dim() != w.n {
                return Err(Error::GridMismatch(format!("J is {0}×{0} for a symbol on R^{1}", j.dim(), w.n)));
            }
            Ok(PhaseSymbol::Waves(tilde_plane(w, j)))
        }
        BaseSymbol::Grid(g) => Ok(PhaseSymbol::Grid(tilde_grid(g, j)?)),
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Derivatives `h^{(r)}(η)`, `r ≤ order`, of `h = (1 + η²)^{−m}` by Taylor arithmetic.
fn weight_derivs(eta: f64, m: usize, order: usize) -> Vec<f64> {
    let len = order + 1;
    let base = [1.0 + eta * eta, 2.0 * eta, 1.0];
    // 1/base as a power series.
    let mut inv = vec![0.0; len];
    inv[0] = 1.0 / base[0];
    for r in 1..len {
        let mut s = 0.0;
        for i in 1..=r.min(2) {
            s += base[i] * inv[r - i];
        }
        inv[r] = -s / base[0];
    }
    let mut pw = vec![0.0; len];
    pw[0] = 1.0;
    for _ in 0..m {
        let mut next = vec![0.0; len];
        for i in 0..len {
            for j in 0..len - i {
                next[i + j] += pw[i] * inv[j];
            }
        }
        pw = next;
    }
    let mut fact = 1.0;
    for (r, v) in pw.iter_mut().enumerate() {
        if r > 0 {
            fact *= r as f64;
        }
        *v *= fact;
    }
    pw
}

/// `(1/2π) ∫∫ e^{−izη} F(z, η) dz dη` in the finite-part sense, over `R × R`.
///
/// The integrand is rewritten as
/// `e^{−izη} (1+z²)^{−N} (1−∂_η²)^N [(1+η²)^{−M} (1−∂_z²)^M F]`,
/// which is absolutely integrable, then truncated to `[−R, R]²`.
/// `row(η, z_nodes, out)` must write `∂_z^{2i} ∂_η^s F(z, η)` for every node,
/// `i ≤ M`, `s ≤ 2N`, as `k × k` blocks at `((iz·(M+1) + i)·(2N+1) + s)·k²`.
pub fn regularized_integral(cfg: &OscIntegralConfig, k: usize, mut row: impl FnMut(f64, &[f64], &mut [C64])) -> Mat {
    let (nodes, weights) = cfg.nodes();
    let (nr, mr) = (cfg.n_reg, cfg.m_reg);
    let ns = 2 * nr + 1;
    let b = k * k;
    let stride = (mr + 1) * ns * b;
    let mut buf = vec![ZERO; nodes.len() * stride];
    let zc: Vec<f64> = (0..=mr).map(|i| binom(mr, i) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let zdecay: Vec<f64> = nodes.iter().map(|z| (1.0 + z * z).powi(-(nr as i32))).collect();
    let mut acc = vec![ZERO; b];
    let mut kern = vec![ZERO; b];
    for (eta, we) in nodes.iter().zip(&weights) {
        row(*eta, &nodes, &mut buf);
        let h = weight_derivs(*eta, mr, 2 * nr);
        let cs: Vec<f64> = (0..ns)
            .map(|s| {
                (0..=nr)
                    .filter(|j| 2 * j >= s)
                    .map(|j| binom(nr, j) * if j % 2 == 0 { 1.0 } else { -1.0 } * binom(2 * j, s) * h[2 * j - s])
                    .sum()
            })
            .collect();
        for (iz, (z, wz)) in nodes.iter().zip(&weights).enumerate() {
            kern.iter_mut().for_each(|v| *v = ZERO);
            for (i, zci) in zc.iter().enumerate() {
                for (s, csv) in cs.iter().enumerate() {
                    let f = zci * csv;
                    if f == 0.0 {
                        continue;
                    }
                    let off = iz * stride + (i * ns + s) * b;
                    for t in 0..b {
                        kern[t] += buf[off + t] * f;
                    }
                }
            }
            let w = C64::from_polar(wz * we * zdecay[iz], -z * eta);
            for t in 0..b {
                acc[t] += kern[t] * w;
            }
        }
    }
    block_to_mat(&acc, k, k) / C64::new(2.0 * PI, 0.0)
}

fn need_phase_space_1(n: usize, what: &str) -> Result<()> {
    if n != 1 {
        return Err(Error::UnsupportedDimension { n, what: format!("{what} is implemented on R × R only") });
    }
    Ok(())
}

/// `‖f(x) − (1/2π)∫∫ e^{−izη} f(x + z) dz dη‖` (the inversion formula `f(x) = ∫∫ e^{2πiu·v} f(x+v) du dv`).
pub fn fourier_inversion_check(f: &dyn Symbol, x: &[f64], cfg: &OscIntegralConfig) -> Result<f64> {
    need_phase_space_1(f.dim(), "the regularized quadrature")?;
    cfg.validate(1)?;
    let k = f.size();
    let b = k * k;
    let (nodes, _) = cfg.nodes();
    let ns = 2 * cfg.n_reg + 1;
    let stride = (cfg.m_reg + 1) * ns * b;
    let mut table = vec![ZERO; nodes.len() * stride];
    for (iz, z) in nodes.iter().enumerate() {
        for i in 0..=cfg.m_reg {
            let v = f.eval_deriv(&[x[0] + z], &[2 * i]);
            let off = iz * stride + i * ns * b;
            table[off..off + b].copy_from_slice(&crate::symbols::grid::mat_to_block(&v));
        }
    }
    let got = regularized_integral(cfg, k, |_, _, out| out.copy_from_slice(&table));
    Ok(cstar_norm(&(f.eval_deriv(x, &[0]) - got)))
}

/// `a†(x, ξ) = (1/2π) ∫∫ e^{−izη} a(x−z, ξ−η)* dz dη` by regularized quadrature.
/// Grid symbols are expanded into their `N²` plane waves first, so this is
/// meant for small grids or few sample points.
pub fn symbol_dagger_at(a: &PhaseSymbol, x: f64, xi: f64, cfg: &OscIntegralConfig) -> Result<Mat> {
    need_phase_space_1(a.n(), "the regularized quadrature")?;
    cfg.validate(1)?;
    let waves = match a {
        PhaseSymbol::Waves(w) => w.clone(),
        PhaseSymbol::Grid(g) => g.to_waves(),
    };
    let k = waves.k;
    let b = k * k;
    let ns = 2 * cfg.n_reg + 1;
    let mr = cfg.m_reg;
    let terms: Vec<(f64, f64, Vec<C64>)> =
        waves.terms.iter().map(|t| (t.kx[0], t.kxi[0], crate::symbols::grid::mat_to_block(&t.c.adjoint()))).collect();
    Ok(regularized_integral(cfg, k, |eta, zs, out| {
        out.iter_mut().for_each(|v| *v = ZERO);
        for (kx, kxi, c) in &terms {
            let pe = C64::from_polar(1.0, -kxi * (xi - eta));
            let zf: Vec<C64> = (0..=mr).map(|i| C64::new(0.0, *kx).powu(2 * i as u32)).collect();
            let ef: Vec<C64> = (0..ns).map(|s| C64::new(0.0, *kxi).powu(s as u32)).collect();
            for (iz, z) in zs.iter().enumerate() {
                let base = pe * C64::from_polar(1.0, -kx * (x - z));
                for i in 0..=mr {
                    for s in 0..ns {
                        let f = base * zf[i] * ef[s];
                        let off = ((iz * (mr + 1) + i) * ns + s) * b;
                        for t in 0..b {
                            out[off + t] += c[t] * f;
                        }
                    }
                }
            }
        }
    }))
}

/// `(a × b)(x, ξ) = (1/2π) ∫∫ e^{−izη} a(x, ξ−η) b(x−z, ξ) dz dη` by regularized quadrature.
pub fn symbol_compose_at(a: &PhaseSymbol, b: &PhaseSymbol, x: f64, xi: f64, cfg: &OscIntegralConfig) -> Result<Mat> {
    need_phase_space_1(a.n(), "the regularized quadrature")?;
    need_phase_space_1(b.n(), "the regularized quadrature")?;
    cfg.validate(1)?;
    let k = a.k();
    let bb = k * k;
    let ns = 2 * cfg.n_reg + 1;
    let mr = cfg.m_reg;
    let sa = a.slice_x(x);
    let sb = b.slice_xi(xi);
    let (nodes, _) = cfg.nodes();
    // ∂_x^{2i} b(x − z, ξ) on the z nodes; z-derivatives carry (−1)^{2i} = 1.
    let mut bz = vec![ZERO; nodes.len() * (mr + 1) * bb];
    for (iz, z) in nodes.iter().enumerate() {
        for i in 0..=mr {
            let off = (iz * (mr + 1) + i) * bb;
            sb.eval_into(x - z, 2 * i, &mut bz[off..off + bb]);
        }
    }
    let mut av = vec![ZERO; ns * bb];
    Ok(regularized_integral(cfg, k, |eta, zs, out| {
        for s in 0..ns {
            sa.eval_into(xi - eta, s, &mut av[s * bb..(s + 1) * bb]);
            if s % 2 == 1 {
                av[s * bb..(s + 1) * bb].iter_mut().for_each(|v| *v = -*v);
            }
        }
        out.iter_mut().for_each(|v| *v = ZERO);
        for iz in 0..zs.len() {
            for i in 0..=mr {
                let bo = (iz * (mr + 1) + i) * bb;
                for s in 0..ns {
                    let off = ((iz * (mr + 1) + i) * ns + s) * bb;
                    block_mul_acc(&av[s * bb..(s + 1) * bb], &bz[bo..bo + bb], &mut out[off..off + bb], k, k, k, C64::new(1.0, 0.0));
                }
            }
        }
    }))
}

/// Exact `a†`: plane waves map as `c e^{i(k·x+ω·ξ)} ↦ c* e^{ik·ω} e^{−i(k·x+ω·ξ)}`;
/// grid symbols use the discrete identity `a† = Σ_μ A_μ(x − ω_μ)* e^{−iω_μ·ξ}`
/// for the `ξ`-expansion `a = Σ_μ A_μ(x) e^{iω_μ·ξ}`, `ω_μ = μΔx`.
pub fn symbol_dagger_exact(a: &PhaseSymbol) -> PhaseSymbol {
    match a {
        PhaseSymbol::Waves(w) => {
            let mut out = PhaseWaves::new(w.n, w.k);
            for t in &w.terms {
                let kw: f64 = t.kx.iter().zip(&t.kxi).map(|(a, b)| a * b).sum();
                out.terms.push(PhaseWave {
                    kx: t.kx.iter().map(|v| -v).collect(),
                    kxi: t.kxi.iter().map(|v| -v).collect(),
                    c: t.c.adjoint() * C64::from_polar(1.0, kw),
                });
            }
            PhaseSymbol::Waves(out)
        }
        PhaseSymbol::Grid(g) => {
            let grid = g.grid;
            let dual = grid.dual();
            let b = g.k * g.k;
            let a = g.xi_coeffs();
            let mut c = vec![ZERO; a.len()];
            for px in 0..grid.len() {
                for mu in 0..dual.len() {
                    let m = signed(&dual, mu);
                    let src = shift_point(&grid, px, &m);
                    let neg = unsigned(&dual, &m.map(|v| -v));
                    let blk = block_adjoint(&a[(src * dual.len() + neg) * b..(src * dual.len() + neg + 1) * b], g.k, g.k);
                    c[(px * dual.len() + mu) * b..(px * dual.len() + mu + 1) * b].copy_from_slice(&blk);
                }
            }
            PhaseSymbol::Grid(PhaseGrid::from_xi_coeffs(grid, g.k, &c))
        }
    }
}

fn signed(g: &Grid, p: usize) -> [i64; 2] {
    let mi = g.multi_index(p);
    let mut out = [0; 2];
    for a in 0..g.n {
        out[a] = g.freq_index(mi[a]);
    }
    out
}

fn unsigned(g: &Grid, m: &[i64; 2]) -> usize {
    if g.n == 1 {
        g.bin(m[0])
    } else {
        g.bin(m[0]) * g.npts + g.bin(m[1])
    }
}

/// Index of `x_p + ω_μ` on the periodic position grid.
fn shift_point(g: &Grid, p: usize, mu: &[i64; 2]) -> usize {
    let mi = g.multi_index(p);
    let mut s = [0i64; 2];
    for a in 0..g.n {
        s[a] = mi[a] as i64 + mu[a];
    }
    unsigned(g, &s)
}

/// Exact `a × b`: plane waves pick up `e^{iω_a·k_b}`; grid symbols use
/// `(a × b)(x, ξ) = Σ_μ A_μ(x) e^{iω_μ·ξ} b(x + ω_μ, ξ)`.
pub fn symbol_compose_exact(a: &PhaseSymbol, b: &PhaseSymbol) -> Result<PhaseSymbol> {
    if a.n() != b.n() || a.k() != b.k() {
        return Err(Error::GridMismatch("symbols live on different spaces".into()));
    }
    match (a, b) {
        (PhaseSymbol::Waves(x), PhaseSymbol::Waves(y)) => {
            let mut out = PhaseWaves::new(x.n, x.k);
            for s in &x.terms {
                for t in &y.terms {
                    let ph: f64 = s.kxi.iter().zip(&t.kx).map(|(a, b)| a * b).sum();
                    let kx = s.kx.iter().zip(&t.kx).map(|(a, b)| a + b).collect();
                    let kxi = s.kxi.iter().zip(&t.kxi).map(|(a, b)| a + b).collect();
                    out.push(kx, kxi, &s.c * &t.c * C64::from_polar(1.0, ph));
                }
            }
            Ok(PhaseSymbol::Waves(out))
        }
        (PhaseSymbol::Grid(x), PhaseSymbol::Grid(y)) => Ok(PhaseSymbol::Grid(compose_grids(x, y)?)),
        (PhaseSymbol::Grid(x), PhaseSymbol::Waves(_)) => Ok(PhaseSymbol::Grid(compose_grids(x, &b.to_grid(&x.grid)?)?)),
        (PhaseSymbol::Waves(_), PhaseSymbol::Grid(y)) => Ok(PhaseSymbol::Grid(compose_grids(&a.to_grid(&y.grid)?, y)?)),
    }
}

fn compose_grids(a: &PhaseGrid, b: &PhaseGrid) -> Result<PhaseGrid> {
    a.grid.check_same(&b.grid)?;
    let grid = a.grid;
    let dual = grid.dual();
    let k = a.k;
    let bb = k * k;
    let ac = a.xi_coeffs();
    let bc = b.xi_coeffs();
    let nd = dual.len();
    let mut c = vec![ZERO; ac.len()];
    for px in 0..grid.len() {
        for mu in 0..nd {
            let m = signed(&dual, mu);
            let ablk = &ac[(px * nd + mu) * bb..(px * nd + mu + 1) * bb];
            if ablk.iter().all(|z| *z == ZERO) {
                continue;
            }
            let src = shift_point(&grid, px, &m);
            for nu in 0..nd {
                let l = signed(&dual, nu);
                let lam = unsigned(&dual, &[m[0] + l[0], m[1] + l[1]]);
                let (o, bo) = ((px * nd + lam) * bb, (src * nd + nu) * bb);
                block_mul_acc(ablk, &bc[bo..bo + bb], &mut c[o..o + bb], k, k, k, C64::new(1.0, 0.0));
            }
        }
    }
    Ok(PhaseGrid::from_xi_coeffs(grid, k, &c))
}

/// Sample points for the quadrature oracle on phase space.
fn phase_check_points(count: usize) -> Vec<(f64, f64)> {
    const PTS: [(f64, f64); 5] = [(0.3, -0.4), (-1.1, 0.7), (0.9, 1.3), (-0.2, -1.7), (1.6, 0.1)];
    (0..count).map(|i| PTS[i % PTS.len()]).collect()
}

/// Whether every frequency of `a` sits well inside the truncation box, so
/// the quadrature oracle can resolve it.
fn oracle_applicable(a: &PhaseSymbol, cfg: &OscIntegralConfig) -> bool {
    match a {
        PhaseSymbol::Waves(w) => {
            w.n == 1 && w.terms.iter().all(|t| t.kx[0].abs().max(t.kxi[0].abs()) <= cfg.radius / 2.0) && w.terms.len() <= 64
        }
        PhaseSymbol::Grid(_) => false,
    }
}

fn mass(a: &PhaseSymbol) -> f64 {
    match a {
        PhaseSymbol::Waves(w) => w.terms.iter().map(|t| cstar_norm(&t.c)).sum::<f64>().max(1.0),
        PhaseSymbol::Grid(g) => g.sup_norm().max(1.0),
    }
}

/// `a†` by the exact route, cross-checked against the quadrature oracle.
pub fn symbol_dagger(a: &PhaseSymbol, cfg: &OscIntegralConfig) -> Result<PhaseSymbol> {
    let out = symbol_dagger_exact(a);
    if cfg.check_points > 0 && oracle_applicable(a, cfg) {
        let scale = mass(a);
        for (x, xi) in phase_check_points(cfg.check_points) {
            let q = symbol_dagger_at(a, x, xi, cfg)?;
            let diff = cstar_norm(&(q - out.eval(&[x], &[xi]))) / scale;
            if diff > 10.0 * cfg.tol {
                return Err(Error::Convergence { what: "symbol adjoint".into(), diff, allowed: 10.0 * cfg.tol });
            }
        }
    }
    Ok(out)
}

/// `a × b` by the exact route, cross-checked against the quadrature oracle.
pub fn symbol_compose(a: &PhaseSymbol, b: &PhaseSymbol, cfg: &OscIntegralConfig) -> Result<PhaseSymbol> {
    let out = symbol_compose_exact(a, b)?;
    if cfg.check_points > 0 && oracle_applicable(a, cfg) && oracle_applicable(b, cfg) {
        let scale = mass(a) * mass(b);
        for (x, xi) in phase_check_points(cfg.check_points) {
            let q = symbol_compose_at(a, b, x, xi, cfg)?;
            let diff = cstar_norm(&(q - out.eval(&[x], &[xi]))) / scale;
            if diff > 10.0 * cfg.tol {
                return Err(Error::Convergence { what: "symbol composition".into(), diff, allowed: 10.0 * cfg.tol });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_algebra::{identity, scalar};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exact_symplectic_phase() {
        let theta = 0.37;
        let j = DeformationMatrix::symplectic(theta);
        let l = 3.0;
        let (mp, mq) = (vec![1, -2], vec![3, 1]);
        let f = PlaneWaveSymbol::single(2, l, mp.clone(), scalar(1, c(1.0, 0.0)));
        let g = PlaneWaveSymbol::single(2, l, mq.clone(), scalar(1, c(1.0, 0.0)));
        let h = deformed_product_exact(&f, &g, &j).unwrap();
        let (p, q) = (f.freq(&mp), g.freq(&mq));
        let want = C64::from_polar(1.0, -2.0 * PI * theta * (p[0] * q[1] - p[1] * q[0]));
        assert!((h.coeff(&[4, -1]).unwrap()[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn weight_derivatives_match_closed_form() {
        // h = (1+η²)^{-1}: h' = −2η/(1+η²)², h'' = (6η² − 2)/(1+η²)³.
        let eta: f64 = 0.7;
        let d = weight_derivs(eta, 1, 2);
        let q = 1.0 + eta * eta;
        assert!((d[0] - 1.0 / q).abs() < 1e-15);
        assert!((d[1] + 2.0 * eta / (q * q)).abs() < 1e-15);
        assert!((d[2] - (6.0 * eta * eta - 2.0) / q.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn twisted_routes_agree_with_each_other() {
        let grid = Grid::new(2, 16, 3.0).unwrap();
        let j = DeformationMatrix::symplectic(0.8);
        let f = GridSymbol::from_fn(grid, 2, |x| {
            let mut m = Mat::zeros(2, 2);
            m[(0, 0)] = c((-x[0] * x[0] - 0.5 * x[1] * x[1]).exp(), 0.0);
            m[(0, 1)] = c(0.0, 0.3 * (-(x[0] - 0.5).powi(2) - x[1] * x[1]).exp());
            m[(1, 1)] = c(x[1].cos() * (-x[0] * x[0] - x[1] * x[1]).exp(), 0.0);
            m
        });
        let dense = TwistedMultiplier::from_grid(&f, &j).unwrap();
        assert_eq!(dense.route(), "dense");
        // Sparse reference with every Fourier term kept.
        let fh = f.coeffs();
        let terms = (0..grid.len())
            .map(|p| {
                let mi = grid.multi_index(p);
                let nu: Vec<f64> = (0..2).map(|a| grid.cycles(grid.freq_index(mi[a]))).collect();
                TwistTerm { shift: j.apply(&nu), nu, c: fh[p * 4..(p + 1) * 4].to_vec() }
            })
            .collect();
        let sparse = TwistedMultiplier { grid, k: 2, twist: Twist::Sparse(terms) };
        let g: Vec<C64> = (0..grid.len() * 2).map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let a = dense.apply(&g, 1);
        let b = sparse.apply(&g, 1);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        // Adjoints: ⟨L g, h⟩ = ⟨g, L* h⟩ for both routes.
        let h: Vec<C64> = (0..grid.len() * 2).map(|i| c((i as f64 * 0.23).cos(), (i as f64 * 0.71).sin())).collect();
        for op in [&dense, &sparse] {
            let lhs: C64 = op.apply(&g, 1).iter().zip(&h).map(|(x, y)| x.conj() * y).sum();
            let rhs: C64 = g.iter().zip(&op.apply_adjoint(&h, 1)).map(|(x, y)| x.conj() * y).sum();
            assert!((lhs - rhs).norm() < 1e-11 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn grid_product_matches_plane_waves() {
        let grid = Grid::new(2, 16, 2.0).unwrap();
        let j = DeformationMatrix::symplectic(0.6);
        let mut f = PlaneWaveSymbol::new(2, 2.0, 1);
        f.add_term(vec![1, 2], scalar(1, c(0.5, 0.5)));
        f.add_term(vec![-2, 0], scalar(1, c(1.0, 0.0)));
        let g = PlaneWaveSymbol::single(2, 2.0, vec![0, -3], scalar(1, c(0.0, 1.0)));
        let exact = deformed_product_exact(&f, &g, &j).unwrap().sample(&grid).unwrap();
        let num = deformed_product_numeric(&f.sample(&grid).unwrap(), &g.sample(&grid).unwrap(), &j, &OscIntegralConfig::default()).unwrap();
        assert!(num.sup_distance(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_product_oracle_agrees() {
        let grid = Grid::new(2, 64, 8.0).unwrap();
        let j = DeformationMatrix::symplectic(0.5);
        let f = GridSymbol::from_fn(grid, 1, |x| scalar(1, c((-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp(), 0.0)));
        let g = GridSymbol::from_fn(grid, 1, |x| scalar(1, c(1.0, 0.2) * (-0.5 * x[0] * x[0] - (x[1] + 0.2).powi(2)).exp()));
        let cfg = OscIntegralConfig { check_points: 3, ..Default::default() };
        let (_, diff) = deformed_product_report(&f, &g, &j, &cfg).unwrap();
        assert!(diff.unwrap() < 1e-8, "{diff:?}");
    }

    #[test]
    fn inversion_on_constants_gaussians_and_waves() {
        let cfg = OscIntegralConfig::default();
        let cst = PlaneWaveSymbol::constant(1, 4.0, identity(2) * c(0.5, -1.0));
        assert!(fourier_inversion_check(&cst, &[0.3], &cfg).unwrap() < 1e-8);
        let wave = PlaneWaveSymbol::single(1, 4.0, vec![3], scalar(1, c(1.0, 0.0)));
        let r = fourier_inversion_check(&wave, &[0.7], &cfg).unwrap();
        assert!(r < 1e-6, "{r}");
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let gauss = GridSymbol::from_fn(grid, 1, |x| scalar(1, c((-x[0] * x[0]).exp(), 0.0)));
        let r = fourier_inversion_check(&gauss, &[0.0], &cfg).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn dagger_and_compose_quadrature_match_exact() {
        let cfg = OscIntegralConfig { check_points: 2, ..Default::default() };
        let mut a = PhaseWaves::new(1, 1);
        a.push(vec![0.8], vec![-0.5], scalar(1, c(0.7, 0.2)));
        a.push(vec![0.0], vec![1.1], scalar(1, c(0.3, 0.0)));
        let mut b = PhaseWaves::new(1, 1);
        b.push(vec![-1.2], vec![0.4], scalar(1, c(1.0, -0.4)));
        let (a, b) = (PhaseSymbol::Waves(a), PhaseSymbol::Waves(b));
        symbol_dagger(&a, &cfg).unwrap();
        symbol_compose(&a, &b, &cfg).unwrap();
        let back = symbol_dagger_exact(&symbol_dagger_exact(&a));
        assert!(cstar_norm(&(back.eval(&[0.4], &[0.9]) - a.eval(&[0.4], &[0.9]))) < 1e-14);
    }

    #[test]
    fn grid_calculus_matches_waves() {
        let grid = Grid::new(1, 16, 2.0).unwrap();
        let d = grid.dual();
        let mut a = PhaseWaves::new(1, 1);
        a.push(vec![grid.angular(2)], vec![d.angular(3)], scalar(1, c(0.7, 0.2)));
        a.push(vec![grid.angular(-1)], vec![d.angular(-2)], scalar(1, c(0.1, -0.5)));
        let mut b = PhaseWaves::new(1, 1);
        b.push(vec![grid.angular(1)], vec![d.angular(1)], scalar(1, c(1.0, 0.0)));
        let (a, b) = (PhaseSymbol::Waves(a), PhaseSymbol::Waves(b));
        let (ag, bg) = (PhaseSymbol::Grid(a.to_grid(&grid).unwrap()), PhaseSymbol::Grid(b.to_grid(&grid).unwrap()));
        let dag = symbol_dagger_exact(&ag).to_grid(&grid).unwrap();
        let want = symbol_dagger_exact(&a).to_grid(&grid).unwrap();
        assert!(dag.sub(&want).unwrap().sup_norm() < 1e-12);
        let comp = symbol_compose_exact(&ag, &bg).unwrap().to_grid(&grid).unwrap();
        let want = symbol_compose_exact(&a, &b).unwrap().to_grid(&grid).unwrap();
        assert!(comp.sub(&want).unwrap().sup_norm() < 1e-12);
    }
}
