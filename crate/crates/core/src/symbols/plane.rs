//! Exact backends: skew deformation matrices and finite plane-wave sums.

use super::grid::{mat_to_block, Grid};
use super::gridsym::GridSymbol;
use crate::coeff_algebra::{cstar_norm, Mat};
use crate::{Error, Result, C64};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Highest derivative order accepted anywhere in the crate.
pub const MAX_ORDER: usize = 8;

pub(crate) fn check_order(alpha: &[usize]) -> Result<()> {
    let order: usize = alpha.iter().sum();
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh { order, max: MAX_ORDER });
    }
    Ok(())
}

/// A real skew-symmetric `n × n` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DeformationMatrix {
    /// Antisymmetrizes `entries`, rejecting asymmetry `|J + Jᵀ|` above `1e-14`.
    pub fn new(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Invalid(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let sym = entries[i * n + j] + entries[j * n + i];
                if sym.abs() > 1e-14 {
                    return Err(Error::Invalid(format!("J is not skew-symmetric at ({i}, {j}): J + Jᵀ = {sym:e}")));
                }
                e[i * n + j] = 0.5 * (entries[i * n + j] - entries[j * n + i]);
            }
        }
        Ok(Self { n, entries: e })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n] }
    }

    /// `θ·[[0, 1], [−1, 0]]`.
    pub fn symplectic(theta: f64) -> Self {
        Self { n: 2, entries: vec![0.0, theta, -theta, 0.0] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// `θ` with `J = θ·[[0, 1], [−1, 0]]`; every skew 2×2 matrix has this form.
    pub fn theta(&self) -> f64 {
        if self.n == 2 {
            self.entries[1]
        } else {
            0.0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    /// Bilinear form `p·Jq`.
    pub fn form(&self, p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(self.apply(q)).map(|(a, b)| a * b).sum()
    }
}

/// `Σ_m c_m e^{2πi p_m·x}` with `p_m = m/(2L)` and integer `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWaveSymbol {
    pub n: usize,
    pub half_width: f64,
    pub k: usize,
    terms: BTreeMap<Vec<i64>, Mat>,
}

impl PlaneWaveSymbol {
    pub fn new(n: usize, half_width: f64, k: usize) -> Self {
        Self { n, half_width, k, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, half_width: f64, c: Mat) -> Self {
        let mut s = Self::new(n, half_width, c.nrows());
        s.add_term(vec![0; n], c);
        s
    }

    pub fn single(n: usize, half_width: f64, m: Vec<i64>, c: Mat) -> Self {
        let mut s = Self::new(n, half_width, c.nrows());
        s.add_term(m, c);
        s
    }

    /// Adds `c e_m`, merging with an existing term and pruning zeros.
    pub fn add_term(&mut self, m: Vec<i64>, c: Mat) {
        assert_eq!(m.len(), self.n, "frequency dimension");
        assert_eq!(c.nrows(), self.k, "coefficient size");
        let entry = self.terms.entry(m.clone()).or_insert_with(|| Mat::zeros(c.nrows(), c.ncols()));
        *entry += c;
        if entry.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Mat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[i64]) -> Option<&Mat> {
        self.terms.get(m)
    }

    /// Physical frequency `m/(2L)`.
    pub fn freq(&self, m: &[i64]) -> Vec<f64> {
        m.iter().map(|&v| v as f64 / (2.0 * self.half_width)).collect()
    }

    pub fn max_freq_index(&self) -> i64 {
        self.terms.keys().flat_map(|m| m.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Mat {
        self.eval_deriv(x, &vec![0; self.n])
    }

    /// `∂^α f(x)` by direct differentiation.
    pub fn eval_deriv(&self, x: &[f64], alpha: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.k, self.k);
        for (m, c) in &self.terms {
            let p = self.freq(m);
            let phase: f64 = p.iter().zip(x).map(|(p, x)| 2.0 * PI * p * x).sum();
            let mut z = C64::from_polar(1.0, phase);
            for (a, &pa) in alpha.iter().zip(&p) {
                z *= C64::new(0.0, 2.0 * PI * pa).powu(*a as u32);
            }
            out += c * z;
        }
        out
    }

    /// `∂^α f`, exact: each coefficient is scaled by `(2πip)^α`.
    pub fn derivative(&self, alpha: &[usize]) -> Result<Self> {
        check_order(alpha)?;
        let mut out = Self::new(self.n, self.half_width, self.k);
        for (m, c) in &self.terms {
            let p = self.freq(m);
            let mut z = C64::new(1.0, 0.0);
            for (a, &pa) in alpha.iter().zip(&p) {
                z *= C64::new(0.0, 2.0 * PI * pa).powu(*a as u32);
            }
            out.add_term(m.clone(), c * z);
        }
        Ok(out)
    }

    /// Pointwise adjoint `f(x)*`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::new(self.n, self.half_width, self.k);
        for (m, c) in &self.terms {
            out.add_term(m.iter().map(|v| -v).collect(), c.adjoint());
        }
        out
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = Self::new(self.n, self.half_width, self.k);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * z);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Samples on `grid` (any half-width; only the values are taken).
    pub fn sample(&self, grid: &Grid) -> Result<GridSymbol> {
        if grid.n != self.n {
            return Err(Error::GridMismatch(format!("symbol dimension {} vs grid dimension {}", self.n, grid.n)));
        }
        let data = (0..grid.len()).flat_map(|p| mat_to_block(&self.eval(&grid.point(p)[..self.n]))).collect();
        GridSymbol::from_data(*grid, self.k, data)
    }

    /// A grid on one period with at least `per_axis` points, fine enough to
    /// oversample every frequency present four times.
    pub fn sampling_grid(&self, per_axis: usize) -> Grid {
        let need = (8 * (self.max_freq_index() as usize + 1)).max(per_axis).next_power_of_two();
        Grid { n: self.n, npts: need, half_width: self.half_width }
    }

    /// `sup_x ‖f(x)‖`: exact for a single term, otherwise the maximum over an
    /// oversampled period grid.
    pub fn sup_norm(&self) -> f64 {
        match self.terms.len() {
            0 => 0.0,
            1 => cstar_norm(self.terms.values().next().unwrap()),
            _ => {
                let g = self.sampling_grid(if self.n == 1 { 256 } else { 64 });
                self.sample(&g).map(|s| s.sup_norm()).unwrap_or(f64::NAN)
            }
        }
    }

    /// `max_{|α| ≤ m} sup ‖∂^α f‖`.
    pub fn seminorm_b(&self, m: usize) -> Result<f64> {
        let mut best: f64 = 0.0;
        for alpha in multi_indices(self.n, m) {
            best = best.max(self.derivative(&alpha)?.sup_norm());
        }
        Ok(best)
    }

    /// Equality up to `tol` coefficientwise.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let diff = self.add(&other.scale(C64::new(-1.0, 0.0)));
        diff.terms.values().all(|c| cstar_norm(c) <= tol)
    }
}

/// All multi-indices in `n` variables with `|α| ≤ m`, by increasing order.
pub fn multi_indices(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for order in 0..=m {
        out.extend(multi_indices_exact(n, order));
    }
    out
}

/// All multi-indices in `n` variables with `|α| = m`.
pub fn multi_indices_exact(n: usize, m: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if m == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=m).rev() {
        for mut rest in multi_indices_exact(n - 1, m - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
