//! The Heisenberg group action on the grid module and what is built on it.
//!
//! `U_{a,b,c} f(x) = e^{−ic} e^{ib·x} f(x − a)`. The central phase enters with
//! a minus sign so that `U` is a homomorphism for the matrix group law
//! `(a, b, c)(a′, b′, c′) = (a + a′, b + b′, c + c′ + a·b′)`.
//!
//! Translations by multiples of the spacing are exact index shifts; other
//! translations use the band-limited (Fourier) shift. On the periodic grid
//! the group law is exact when every `b` is a multiple of `π/L`.
//!
//! With `Ad U(a, b) A = U A U^{−1}` one has `Ad U(a, b) Op(σ) = Op(σ(· − a, · − b))`,
//! hence the generators act on symbols by `δ_{a_j} Op(σ) = −Op(∂_{x_j} σ)` and
//! `δ_{b_j} Op(σ) = −Op(∂_{ξ_j} σ)`.

use crate::coeff_algebra::Mat;
use crate::pseudodiff::{fourier, op, operator_norm, rieffel_operator, DiscretizedOperator, ModuleVector};
use crate::quad::composite;
use crate::symbols::grid::{from_interp_coeffs, interp_coeffs, Grid};
use crate::symbols::phase::{PhaseGrid, PhaseSymbol, PhaseWaves};
use crate::symbols::plane::{multi_indices_exact, MAX_ORDER};
use crate::symbols::{BaseSymbol, DeformationMatrix, GridSymbol, PlaneWaveSymbol};
use crate::{Error, Result, C64};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergElement {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl HeisenbergElement {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Self {
        assert_eq!(a.len(), b.len(), "translation and modulation dimensions");
        Self { a, b, c }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n], 0.0)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Upper-triangular matrix product.
    pub fn mul(&self, o: &Self) -> Self {
        let ab: f64 = self.a.iter().zip(&o.b).map(|(x, y)| x * y).sum();
        Self {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(),
            c: self.c + o.c + ab,
        }
    }

    pub fn inverse(&self) -> Self {
        let ab: f64 = self.a.iter().zip(&self.b).map(|(x, y)| x * y).sum();
        Self { a: self.a.iter().map(|x| -x).collect(), b: self.b.iter().map(|x| -x).collect(), c: -self.c + ab }
    }
}

fn check_dim(h: &HeisenbergElement, grid: &Grid) -> Result<()> {
    if h.n() != grid.n {
        return Err(Error::GridMismatch(format!("group element of dimension {} on a {}-dimensional grid", h.n(), grid.n)));
    }
    Ok(())
}

/// `f(x − a)`.
fn translate(f: &ModuleVector, a: &[f64]) -> Result<ModuleVector> {
    let grid = f.grid;
    let block = f.k * f.c;
    let dx = grid.spacing();
    let steps: Vec<f64> = a.iter().map(|v| v / dx).collect();
    if steps.iter().all(|s| (s - s.round()).abs() < 1e-9) {
        let n = grid.npts as i64;
        let mut out = vec![ZERO; f.data().len()];
        for p in 0..grid.len() {
            let mi = grid.multi_index(p);
            let mut src = 0usize;
            for ax in 0..grid.n {
                src = src * grid.npts + (mi[ax] as i64 - steps[ax].round() as i64).rem_euclid(n) as usize;
            }
            out[p * block..(p + 1) * block].copy_from_slice(&f.data()[src * block..(src + 1) * block]);
        }
        return ModuleVector::new(grid, f.k, f.c, out);
    }
    let mut c = interp_coeffs(f.data(), &grid, block);
    for p in 0..grid.len() {
        let mi = grid.multi_index(p);
        let ph: f64 = (0..grid.n).map(|ax| -2.0 * PI * grid.cycles(grid.freq_index(mi[ax])) * a[ax]).sum();
        let z = C64::from_polar(1.0, ph);
        c[p * block..(p + 1) * block].iter_mut().for_each(|v| *v *= z);
    }
    ModuleVector::new(grid, f.k, f.c, from_interp_coeffs(&c, &grid, block))
}

/// `e^{ic} e^{ib·x} f(x)`.
fn modulate(f: &ModuleVector, b: &[f64], c: f64) -> ModuleVector {
    let grid = f.grid;
    let block = f.k * f.c;
    let mut out = f.clone();
    for p in 0..grid.len() {
        let x = grid.point(p);
        let ph: f64 = c + (0..grid.n).map(|ax| b[ax] * x[ax]).sum::<f64>();
        let z = C64::from_polar(1.0, ph);
        out.data_mut()[p * block..(p + 1) * block].iter_mut().for_each(|v| *v *= z);
    }
    out
}

/// `U_h f`.
pub fn heisenberg_act(h: &HeisenbergElement, f: &ModuleVector) -> Result<ModuleVector> {
    check_dim(h, &f.grid)?;
    Ok(modulate(&translate(f, &h.a)?, &h.b, -h.c))
}

/// `U_h^* f = e^{ic} T_{−a} (e^{−ib·x} f)`, the exact adjoint of [`heisenberg_act`].
pub fn heisenberg_act_adjoint(h: &HeisenbergElement, f: &ModuleVector) -> Result<ModuleVector> {
    check_dim(h, &f.grid)?;
    let neg: Vec<f64> = h.a.iter().map(|v| -v).collect();
    translate(&modulate(f, &h.b.iter().map(|v| -v).collect::<Vec<_>>(), h.c), &neg)
}

/// `Ad U(a, b)(A) = U A U^{−1}`.
pub fn adu_conjugate(a: &[f64], b: &[f64], op: &DiscretizedOperator) -> DiscretizedOperator {
    let (grid, k) = op.domain();
    let u = DiscretizedOperator::Heisenberg { grid, k, h: HeisenbergElement::new(a.to_vec(), b.to_vec(), 0.0) };
    DiscretizedOperator::Product(vec![u.clone(), op.clone(), DiscretizedOperator::Adjoint(Box::new(u))])
}

fn stencil(order: usize, h: f64) -> Result<Vec<(i64, f64)>> {
    // Offsets in units of h.
    Ok(match order {
        0 => vec![(0, 1.0)],
        1 => vec![(1, 0.5 / h), (-1, -0.5 / h)],
        2 => vec![(1, 1.0 / (h * h)), (0, -2.0 / (h * h)), (-1, 1.0 / (h * h))],
        _ => return Err(Error::OrderTooHigh { order, max: 2 }),
    })
}

/// `∂^α` of `(a, b) ↦ Ad U(a, b)(A)` at `(a₀, b₀)` by central differences with
/// step `h`, Richardson-extrapolated once (`(4 S_{h/2} − S_h)/3`). `α` runs
/// over the `2n` parameters, translations first; per-parameter order ≤ 2.
pub fn generator_fd(op: &DiscretizedOperator, alpha: &[usize], base: (&[f64], &[f64]), h: f64) -> Result<DiscretizedOperator> {
    let n = op.domain().0.n;
    if alpha.len() != 2 * n {
        return Err(Error::Invalid(format!("multi-index has {} entries, expected {}", alpha.len(), 2 * n)));
    }
    // Offsets in units of h/2.
    let mut weights: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (scale, step, unit) in [(4.0 / 3.0, h / 2.0, 1i64), (-1.0 / 3.0, h, 2i64)] {
        let mut pts: Vec<(Vec<i64>, f64)> = vec![(vec![], scale)];
        for &o in alpha {
            let st = stencil(o, step)?;
            pts = pts.into_iter().flat_map(|(p, w)| st.iter().map(move |&(off, sw)| ([p.clone(), vec![off * unit]].concat(), w * sw))).collect();
        }
        for (p, w) in pts {
            *weights.entry(p).or_insert(0.0) += w;
        }
    }
    let terms = weights
        .into_iter()
        .filter(|(_, w)| *w != 0.0)
        .map(|(p, w)| {
            let a: Vec<f64> = (0..n).map(|j| base.0[j] + p[j] as f64 * h / 2.0).collect();
            let b: Vec<f64> = (0..n).map(|j| base.1[j] + p[n + j] as f64 * h / 2.0).collect();
            (C64::new(w, 0.0), adu_conjugate(&a, &b, op))
        })
        .collect();
    Ok(DiscretizedOperator::Sum(terms))
}

/// An operator together with the symbol it was built from, so that generator
/// monomials can be evaluated on the symbol.
#[derive(Clone, Debug)]
pub enum SymbolicOperator {
    Op { symbol: PhaseSymbol, grid: Grid },
    Rieffel { f: BaseSymbol, grid: Grid, j: DeformationMatrix },
}

impl SymbolicOperator {
    pub fn grid(&self) -> &Grid {
        match self {
            Self::Op { grid, .. } | Self::Rieffel { grid, .. } => grid,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Self::Op { symbol, .. } => symbol.k(),
            Self::Rieffel { f, .. } => f.k(),
        }
    }

    pub fn operator(&self) -> Result<DiscretizedOperator> {
        match self {
            Self::Op { symbol, grid } => op(symbol, grid),
            Self::Rieffel { f, grid, j } => rieffel_operator(f, grid, j),
        }
    }

    /// `δ^α A` on the symbol: `(−1)^{|α|} Op(∂_x^β ∂_ξ^γ σ)` with `α = (β, γ)`, or `L_g` with
    /// `ĝ(p) = (−2πip)^β (iJᵀp)^γ f̂(p)`.
    pub fn delta(&self, alpha: &[usize]) -> Result<Self> {
        let n = self.grid().n;
        if alpha.len() != 2 * n {
            return Err(Error::Invalid(format!("multi-index has {} entries, expected {}", alpha.len(), 2 * n)));
        }
        let order: usize = alpha.iter().sum();
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh { order, max: MAX_ORDER });
        }
        Ok(match self {
            Self::Op { symbol, grid } => {
                let d = symbol.derivative(&alpha[..n], &alpha[n..])?;
                let s = if order % 2 == 0 { 1.0 } else { -1.0 };
                Self::Op { symbol: d.scale(C64::new(s, 0.0)), grid: *grid }
            }
            Self::Rieffel { f, grid, j } => Self::Rieffel { f: rieffel_delta(f, j, alpha)?, grid: *grid, j: j.clone() },
        })
    }
}

fn rieffel_multiplier(p: &[f64], j: &DeformationMatrix, alpha: &[usize]) -> C64 {
    let n = p.len();
    let mut z = C64::new(1.0, 0.0);
    for i in 0..n {
        z *= C64::new(0.0, -2.0 * PI * p[i]).powu(alpha[i] as u32);
        let jp: f64 = (0..n).map(|l| j.get(l, i) * p[l]).sum();
        z *= C64::new(0.0, jp).powu(alpha[n + i] as u32);
    }
    z
}

/// The symbol of `δ^α L_f`. Nyquist bins of grid symbols are dropped for `α ≠ 0`.
pub fn rieffel_delta(f: &BaseSymbol, j: &DeformationMatrix, alpha: &[usize]) -> Result<BaseSymbol> {
    let n = f.n();
    if j.dim() != n || alpha.len() != 2 * n {
        return Err(Error::Invalid(format!("need J of size {n} and a multi-index of length {}", 2 * n)));
    }
    Ok(match f {
        BaseSymbol::Waves(w) => {
            let mut out = PlaneWaveSymbol::new(n, w.half_width, w.k);
            for (m, c) in w.terms() {
                out.add_term(m.clone(), c * rieffel_multiplier(&w.freq(m), j, alpha));
            }
            BaseSymbol::Waves(out)
        }
        BaseSymbol::Grid(g) => {
            let grid = g.grid;
            let b = g.k * g.k;
            let mut c = g.coeffs();
            let any = alpha.iter().any(|&o| o > 0);
            for p in 0..grid.len() {
                let mi = grid.multi_index(p);
                let m: Vec<i64> = (0..n).map(|ax| grid.freq_index(mi[ax])).collect();
                let z = if any && m.iter().any(|&v| v == -(grid.npts as i64) / 2) {
                    ZERO
                } else {
                    rieffel_multiplier(&m.iter().map(|&v| grid.cycles(v)).collect::<Vec<_>>(), j, alpha)
                };
                c[p * b..(p + 1) * b].iter_mut().for_each(|v| *v *= z);
            }
            BaseSymbol::Grid(GridSymbol::from_data(grid, g.k, from_interp_coeffs(&c, &grid, b))?)
        }
    })
}

/// `ρ_m(A) = max ‖δ_{i₁} ⋯ δ_{i_m} A‖` over `0 ≤ i_j ≤ 2n` with `δ_0 = I`, i.e. the
/// max of `‖δ^α A‖` over `|α| ≤ m`.
pub fn rho_m(a: &SymbolicOperator, m: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for k in 0..=m {
        best = best.max(delta_max(a, k)?);
    }
    Ok(best)
}

/// `max_{|α| = m} ‖δ^α A‖`, the part of `ρ_m` made of genuine generator monomials.
pub fn delta_max(a: &SymbolicOperator, m: usize) -> Result<f64> {
    if m > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: m, max: MAX_ORDER });
    }
    let mut best: f64 = 0.0;
    for alpha in multi_indices_exact(2 * a.grid().n, m) {
        best = best.max(operator_norm(&a.delta(&alpha)?.operator()?)?);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialNormReport {
    /// `T_0 … T_m`.
    pub t: Vec<f64>,
    /// `s_j = Σ_{k ≤ j} T_k`.
    pub s: Vec<f64>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// `T_0 = ‖A‖`, `T_k = (1/k!) Σ_{|α| = k} ‖δ^α A‖` with `α ∈ ℕ^{2n}`, and their running sums.
pub fn differential_norms(a: &SymbolicOperator, m: usize) -> Result<DifferentialNormReport> {
    if m > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: m, max: MAX_ORDER });
    }
    let mut t = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut sum = 0.0;
        for alpha in multi_indices_exact(2 * a.grid().n, k) {
            sum += operator_norm(&a.delta(&alpha)?.operator()?)?;
        }
        t.push(sum / factorial(k));
    }
    let s = t.iter().scan(0.0, |acc, v| {
        *acc += v;
        Some(*acc)
    });
    Ok(DifferentialNormReport { s: s.collect(), t })
}

pub fn gamma1(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp()
    } else {
        0.0
    }
}

pub fn gamma2(t: f64) -> f64 {
    if t >= 0.0 {
        t * (-t).exp()
    } else {
        0.0
    }
}

/// Tail mass allowed when truncating `∫₀^∞ γ₂`.
pub const GAMMA2_TAIL: f64 = 1e-10;

/// `S` with `∫_S^∞ γ₂ = (S + 1)e^{−S} = GAMMA2_TAIL`.
pub fn gamma2_cutoff() -> f64 {
    let mut s: f64 = 25.0;
    for _ in 0..50 {
        s = ((s + 1.0) / GAMMA2_TAIL).ln();
    }
    s
}

/// `∫₀^S γ₂(s) e^{−iks} ds` by composite Gauss–Legendre, checked against `(1 + ik)^{−2}`.
pub fn gamma2_transform(k: f64) -> Result<C64> {
    let cut = gamma2_cutoff();
    let panels = ((cut * (1.0 + k.abs())) / 2.0).ceil() as usize;
    let (x, w) = composite(0.0, cut, panels.max(32), 16);
    let q: C64 = x.iter().zip(&w).map(|(s, wi)| C64::from_polar(wi * gamma2(*s), -k * s)).sum();
    let exact = C64::new(1.0, k).powi(-2);
    let diff = (q - exact).norm();
    let allowed = 2.0 * GAMMA2_TAIL;
    if diff > allowed {
        return Err(Error::Convergence { what: format!("γ₂ transform at k = {k}"), diff, allowed });
    }
    Ok(q)
}

fn d_factor(kx: &[f64], kxi: &[f64]) -> C64 {
    kx.iter().chain(kxi).map(|k| C64::new(1.0, *k).powi(2)).product()
}

/// `D a = Π_j (1 + ∂_{x_j})² (1 + ∂_{ξ_j})² a`; exact on waves, spectral on grids.
pub fn d_apply(a: &PhaseSymbol) -> PhaseSymbol {
    match a {
        PhaseSymbol::Waves(w) => {
            let mut out = PhaseWaves::new(w.n, w.k);
            for t in &w.terms {
                out.push(t.kx.clone(), t.kxi.clone(), &t.c * d_factor(&t.kx, &t.kxi));
            }
            PhaseSymbol::Waves(out)
        }
        PhaseSymbol::Grid(g) => PhaseSymbol::Grid(g.fourier_multiplier(d_factor)),
    }
}

/// `a(x, ξ) = ∫ Π γ₂(s_j) γ₂(t_j) b(x − s, ξ − t) ds dt`, evaluated mode by mode with the
/// truncated quadrature of [`gamma2_transform`].
pub fn d_inverse(b: &PhaseSymbol) -> Result<PhaseSymbol> {
    let mut cache: BTreeMap<u64, C64> = BTreeMap::new();
    let mut factor = |ks: &[f64]| -> Result<C64> {
        let mut z = C64::new(1.0, 0.0);
        for k in ks {
            let key = k.to_bits();
            if !cache.contains_key(&key) {
                cache.insert(key, gamma2_transform(*k)?);
            }
            z *= cache[&key];
        }
        Ok(z)
    };
    Ok(match b {
        PhaseSymbol::Waves(w) => {
            let mut out = PhaseWaves::new(w.n, w.k);
            for t in &w.terms {
                let f = factor(&[t.kx.clone(), t.kxi.clone()].concat())?;
                out.push(t.kx.clone(), t.kxi.clone(), &t.c * f);
            }
            PhaseSymbol::Waves(out)
        }
        PhaseSymbol::Grid(g) => {
            let grid = g.grid;
            let dual = grid.dual();
            let ang = |gr: &Grid| -> Vec<f64> { (0..gr.npts).map(|j| 2.0 * PI * gr.cycles(gr.freq_index(j))).collect() };
            for k in ang(&grid).into_iter().chain(ang(&dual)) {
                factor(&[k])?;
            }
            PhaseSymbol::Grid(g.fourier_multiplier(|kx, kxi| kx.iter().chain(kxi).map(|k| cache[&k.to_bits()]).product()))
        }
    })
}

/// `P(η) = −η(1 − iη)² e^{η(1 + is)}` for `η ≤ 0`, so that `u = γ₂(−s)(P + P′)`.
fn u_profile(s: f64, eta: f64) -> C64 {
    if eta > 0.0 {
        return ZERO;
    }
    let one_m = C64::new(1.0, -eta);
    let e = C64::new(eta, eta * s).exp();
    let p = -eta * one_m * one_m;
    let dp = -(one_m * one_m) + C64::new(0.0, 2.0 * eta) * one_m - C64::new(eta, eta * s) * one_m * one_m;
    (p + dp) * e
}

/// `u(s, η) = (1 + ∂_η)[(1 − iη)² γ₂(−s) γ₂(−η) e^{isη}]`.
pub fn u_kernel(s: f64, eta: f64) -> C64 {
    u_profile(s, eta) * gamma2(-s)
}

/// `v(t, η) = γ₁(t − η)/(1 + it)²`.
pub fn v_kernel(t: f64, eta: f64) -> C64 {
    C64::new(1.0, t).powi(-2) * gamma1(t - eta)
}

/// Depth below `min(0, t)` past which the `η`-integrand (`~e^{2η}`) is dropped.
pub const ETA_DEPTH: f64 = 40.0;

/// `∫ conj(u(s, η)) v(t, η) dη`.
pub fn kernel_integral(s: f64, t: f64) -> C64 {
    let top = t.min(0.0);
    let panels = (ETA_DEPTH * (1.0 + s.abs()) / 2.0).ceil() as usize;
    let (x, w) = composite(top - ETA_DEPTH, top, panels.max(40), 16);
    x.iter().zip(&w).map(|(eta, wi)| u_kernel(s, *eta).conj() * v_kernel(t, *eta) * *wi).sum()
}

/// `|∫ conj(u(s, η)) v(t, η) dη − γ₂(−s) γ₂(−t) e^{−ist}|`.
pub fn kernel_identity_residual(s: f64, t: f64) -> f64 {
    let closed = C64::from_polar(gamma2(-s) * gamma2(-t), -s * t);
    (kernel_integral(s, t) - closed).norm()
}

/// `‖u‖₂` on `R²`, by tensor Gauss–Legendre on `[−40, 0]²`.
pub fn u_norm() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let (x, w) = composite(-ETA_DEPTH, 0.0, 80, 16);
        let mut acc = 0.0;
        for (s, ws) in x.iter().zip(&w) {
            let g = gamma2(-s);
            if g == 0.0 {
                continue;
            }
            let inner: f64 = x.iter().zip(&w).map(|(eta, we)| u_profile(*s, *eta).norm_sqr() * we).sum();
            acc += ws * g * g * inner;
        }
        acc.sqrt()
    })
}

/// `‖v‖₂ = (∫ (1 + t²)^{−2} dt · ∫₀^∞ e^{−2r} dr)^{1/2} = √π/2`.
pub fn v_norm() -> f64 {
    PI.sqrt() / 2.0
}

/// Numerical parameters of the symbol map.
#[derive(Clone, Debug)]
pub struct SymbolMapConfig {
    /// Gauss–Legendre points per `η` panel; panels break at dual-grid points, where `v` jumps.
    pub eta_order: usize,
    /// Finite-difference step for the conjugation route.
    pub fd_step: f64,
    /// Allowed relative disagreement between the two routes.
    pub route_tol: f64,
}

impl Default for SymbolMapConfig {
    fn default() -> Self {
        Self { eta_order: 10, fd_step: 1e-2, route_tol: 1e-3 }
    }
}

fn binom2(i: usize) -> f64 {
    [1.0, 2.0, 1.0][i]
}

/// `Ã = Π_j (1 − δ_{a_j})² (1 − δ_{b_j})² A` from generator monomials supplied by `delta`.
fn d_combination(n: usize, mut delta: impl FnMut(&[usize]) -> Result<DiscretizedOperator>) -> Result<DiscretizedOperator> {
    let mut terms = Vec::new();
    for alpha in multi_indices_box(2 * n, 2) {
        let order: usize = alpha.iter().sum();
        let w: f64 = alpha.iter().map(|&o| binom2(o)).product::<f64>() * if order % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((C64::new(w, 0.0), delta(&alpha)?));
    }
    Ok(DiscretizedOperator::Sum(terms))
}

/// All multi-indices with every entry `≤ max`.
fn multi_indices_box(len: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v: Vec<usize>| (0..=max).map(move |o| [v.clone(), vec![o]].concat())).collect();
    }
    out
}

fn gaussian_probes(grid: &Grid, k: usize) -> Vec<ModuleVector> {
    let l = grid.half_width;
    [(0.0, 0.0), (-l / 8.0, 0.5), (l / 8.0, -0.5)]
        .iter()
        .map(|&(x0, w0)| {
            ModuleVector::from_fn(*grid, k, 1, |x| {
                let env = C64::from_polar((-(x[0] - x0).powi(2) / 2.0).exp(), w0 * x[0]);
                Mat::from_fn(k, 1, |i, _| env * C64::new(1.0 + i as f64, 0.5 * i as f64))
            })
        })
        .collect()
}

/// Relative disagreement of two operators on interior Gaussian probes. The
/// scale is `‖b g‖`, floored by `‖floor g‖` when a floor operator is given.
fn probe_disagreement(a: &DiscretizedOperator, b: &DiscretizedOperator, floor: Option<&DiscretizedOperator>) -> Result<f64> {
    let (grid, k) = a.domain();
    let mut worst: f64 = 0.0;
    for g in gaussian_probes(&grid, k) {
        let (ga, gb) = (a.apply(&g)?, b.apply(&g)?);
        let lower = match floor {
            Some(f) => f.apply(&g)?.norm_l2(),
            None => 0.0,
        };
        let scale = gb.norm_l2().max(lower).max(1e-12 * g.norm_l2());
        worst = worst.max(ga.sub(&gb).norm_l2() / scale);
    }
    Ok(worst)
}

/// Disagreement, on Gaussian probes, between `δ^α A` from the symbol and from
/// finite differences of `(a, b) ↦ Ad U(a, b)(A)` at the origin, relative to
/// `max(‖δ^α A g‖, ‖A g‖)`. The floor keeps the ratio meaningful when
/// `δ^α A` vanishes, e.g. `∂_x ∂_ξ` of a sum of multiplications and multipliers.
pub fn generator_route_disagreement(a: &SymbolicOperator, alpha: &[usize], h: f64) -> Result<f64> {
    let n = a.grid().n;
    let z = vec![0.0; n];
    let base = a.operator()?;
    let fd = generator_fd(&base, alpha, (&z, &z), h)?;
    probe_disagreement(&fd, &a.delta(alpha)?.operator()?, Some(&base))
}

/// `Ã` for the symbol map by the symbol route, cross-checked against central
/// differences of the conjugation family on Gaussian probes.
pub fn d_conjugation(a: &SymbolicOperator, cfg: &SymbolMapConfig) -> Result<DiscretizedOperator> {
    let n = a.grid().n;
    let base = a.operator()?;
    let symbolic = d_combination(n, |alpha| a.delta(alpha)?.operator())?;
    let fd = d_combination(n, |alpha| generator_fd(&base, alpha, (&vec![0.0; n], &vec![0.0; n]), cfg.fd_step))?;
    let diff = probe_disagreement(&fd, &symbolic, None)?;
    if diff > cfg.route_tol {
        return Err(Error::Convergence { what: "D[Ad U(−x, −ξ)(A)] by finite differences and by symbols".into(), diff, allowed: cfg.route_tol });
    }
    Ok(symbolic)
}

/// `Ã` for an operator without a symbol: finite differences at steps `h` and
/// `h/2` must agree on Gaussian probes.
pub fn d_conjugation_fd(a: &DiscretizedOperator, cfg: &SymbolMapConfig) -> Result<DiscretizedOperator> {
    let n = a.domain().0.n;
    let z = vec![0.0; n];
    let coarse = d_combination(n, |alpha| generator_fd(a, alpha, (&z, &z), cfg.fd_step))?;
    let fine = d_combination(n, |alpha| generator_fd(a, alpha, (&z, &z), cfg.fd_step / 2.0))?;
    let diff = probe_disagreement(&coarse, &fine, None)?;
    if diff > cfg.route_tol {
        return Err(Error::UnsupportedOperator(format!("no symbol available and finite differences disagree by {diff:.3e} between steps")));
    }
    Ok(fine)
}

/// `M_{l,i} = Σ_η w_η (F^{−1} v(·, η))(x_l) conj(u(x_i, η)) Δx`, row-major `N × N`.
fn kernel_matrix(grid: &Grid, cfg: &SymbolMapConfig) -> Vec<C64> {
    let n = grid.npts;
    let dual = grid.dual();
    let mut edges: Vec<f64> = (0..n).map(|j| dual.coord_1d(j)).filter(|&x| x < 0.0).collect();
    edges.push(0.0);
    let low = edges[0];
    let extra = ((ETA_DEPTH - (-low)).max(0.0) / dual.spacing()).ceil() as usize;
    let mut all: Vec<f64> = (1..=extra).rev().map(|e| low - e as f64 * dual.spacing()).collect();
    all.extend(edges);
    let mut m = vec![ZERO; n * n];
    let dx = grid.spacing();
    for win in all.windows(2) {
        let (nodes, weights) = composite(win[0], win[1], 1, cfg.eta_order);
        for (eta, w) in nodes.iter().zip(&weights) {
            let v: Vec<C64> = (0..n).map(|j| v_kernel(dual.coord_1d(j), *eta)).collect();
            let g = fourier(&ModuleVector::new(dual, 1, 1, v).expect("sizes"), true);
            let u: Vec<C64> = (0..n).map(|i| u_kernel(grid.coord_1d(i), *eta).conj() * (w * dx)).collect();
            for l in 0..n {
                let gl = g.data()[l];
                if gl == ZERO {
                    continue;
                }
                let row = &mut m[l * n..(l + 1) * n];
                for i in 0..n {
                    row[i] += gl * u[i];
                }
            }
        }
    }
    m
}

/// `S(Ã)(x_p, ξ_q) = √(2π) Tr(Ã U^{−1} M U)` with `U = U_{(−x_p, −ξ_q, 0)}` for all grid points.
fn trace_map(at: &DiscretizedOperator, m: &[C64]) -> Result<PhaseGrid> {
    let (grid, k) = at.domain();
    let n = grid.npts;
    let dense = at.to_dense()?;
    let b = k * k;
    // c[d][α] = Σ_i Ã_{i,i+d} M_{i+d−α, i−α}
    let mut c = vec![ZERO; n * n * b];
    for d in 0..n {
        for i in 0..n {
            let l = (i + d) % n;
            for r in 0..k {
                for s in 0..k {
                    let v = dense[(i * k + r, l * k + s)];
                    if v == ZERO {
                        continue;
                    }
                    for alpha in 0..n {
                        let q = m[((l + n - alpha) % n) * n + (i + n - alpha) % n];
                        c[(d * n + alpha) * b + r * k + s] += v * q;
                    }
                }
            }
        }
    }
    let root = (2.0 * PI).sqrt();
    let mut data = vec![ZERO; n * n * b];
    for p in 0..n {
        let alpha = (p + n / 2) % n;
        for q in 0..n {
            let out = &mut data[(p * n + q) * b..(p * n + q + 1) * b];
            for d in 0..n {
                let sign = if d % 2 == 0 { root } else { -root };
                let z = C64::from_polar(sign, 2.0 * PI * (q * d % n) as f64 / n as f64);
                for t in 0..b {
                    out[t] += z * c[(d * n + alpha) * b + t];
                }
            }
        }
    }
    PhaseGrid::from_data(grid, k, data)
}

fn check_s_domain(grid: &Grid) -> Result<()> {
    if grid.n != 1 {
        return Err(Error::UnsupportedDimension { n: grid.n, what: "the symbol map is implemented for n = 1".into() });
    }
    Ok(())
}

/// The symbol map `S(A)(x, ξ) = (2π)^{1/2} ⟨u, ((D[Ad U(−x, −ξ)(A)] F^{−1}) ⊗ I) v⟩` on
/// `grid × grid.dual()`, `n = 1`. The first variable of `v` lives on the dual
/// grid, that of `u` on the position grid. Cost `O(N³ k²)`.
pub fn symbol_map_s(a: &SymbolicOperator, cfg: &SymbolMapConfig) -> Result<PhaseGrid> {
    check_s_domain(a.grid())?;
    let at = d_conjugation(a, cfg)?;
    trace_map(&at, &kernel_matrix(a.grid(), cfg))
}

/// [`symbol_map_s`] for an operator known only through its action.
pub fn symbol_map_s_generic(a: &DiscretizedOperator, cfg: &SymbolMapConfig) -> Result<PhaseGrid> {
    let grid = a.domain().0;
    check_s_domain(&grid)?;
    let at = d_conjugation_fd(a, cfg)?;
    trace_map(&at, &kernel_matrix(&grid, cfg))
}

/// `(sup ‖a‖, (2π)^{n/2} ‖u‖₂^n ‖v‖₂^n ‖D[Ad U(−x, −ξ)(Op a)]|_{x = ξ = 0}‖)`; the
/// operator in the norm is `Op(D a)`.
pub fn inverse_cv_bound(a: &PhaseSymbol, grid: &Grid) -> Result<(f64, f64)> {
    let lhs = a.grid_sup(grid)?;
    let n = a.n() as i32;
    let norm = operator_norm(&op(&d_apply(a), grid)?)?;
    let constant = (2.0 * PI).powf(n as f64 / 2.0) * (u_norm() * v_norm()).powi(n);
    Ok((lhs, constant * norm))
}

/// `sup ‖a − b‖` on the phase grid.
pub fn phase_sup_distance(a: &PhaseGrid, b: &PhaseGrid) -> Result<f64> {
    Ok(a.sub(b)?.sup_norm())
}
