//! The coefficient algebra `C = M_k(C)`.
//!
//! Norms, spectra, the unitization `Ã = A ⊕ C`, self-adjoint functional
//! calculus, representation seminorms and the finite-dimensional spectral
//! invariance check.

use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::Value;

/// An element of `M_k(C)`.
pub type Mat = DMatrix<C64>;

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub fn identity(k: usize) -> Mat {
    Mat::identity(k, k)
}

pub fn zeros(k: usize) -> Mat {
    Mat::zeros(k, k)
}

pub fn scalar(k: usize, z: C64) -> Mat {
    Mat::identity(k, k) * z
}

/// `diag(d)`.
pub fn diag(d: &[C64]) -> Mat {
    let mut m = Mat::zeros(d.len(), d.len());
    for (i, z) in d.iter().enumerate() {
        m[(i, i)] = *z;
    }
    m
}

/// Largest singular value.
pub fn cstar_norm(a: &Mat) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "C*-norm of a non-square matrix");
    norm_of_block(a.as_slice(), a.nrows(), true)
}

/// Largest singular value of an `r × r` block stored contiguously.
///
/// `col_major` selects the storage order; for `r ≤ 2` the result does not
/// depend on it.
pub fn norm_of_block(b: &[C64], r: usize, col_major: bool) -> f64 {
    match r {
        0 => 0.0,
        1 => b[0].norm(),
        2 => {
            let fro: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            let det = (b[0] * b[3] - b[1] * b[2]).norm_sqr();
            let disc = (fro * fro - 4.0 * det).max(0.0).sqrt();
            ((fro + disc) * 0.5).max(0.0).sqrt()
        }
        _ => {
            let m = if col_major {
                Mat::from_column_slice(r, r, b)
            } else {
                Mat::from_row_slice(r, r, b)
            };
            m.singular_values().max()
        }
    }
}

/// Largest singular value of a general `rows × cols` matrix.
pub fn rect_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        a.singular_values().max()
    }
}

fn dedup_values(mut v: Vec<C64>, tol: f64) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<C64> = Vec::with_capacity(v.len());
    for z in v {
        if !out.iter().any(|w| (w - z).norm() <= tol) {
            out.push(z);
        }
    }
    out
}

/// Eigenvalues with repeated values merged (tolerance `1e-9·max(1, ‖a‖)`).
pub fn spectrum(a: &Mat) -> Vec<C64> {
    let k = a.nrows();
    if k == 0 {
        return Vec::new();
    }
    let ev: Vec<C64> = match a.clone().schur().eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        // Complex Schur forms are triangular, so this is not expected.
        None => a.clone().schur().unpack().1.diagonal().iter().copied().collect(),
    };
    dedup_values(ev, 1e-9 * cstar_norm(a).max(1.0))
}

/// `σ_Ã(a) = σ_A(a) ∪ {0}`.
pub fn unitized_spectrum(a: &Mat) -> Vec<C64> {
    let mut s = spectrum(a);
    s.push(C64::new(0.0, 0.0));
    dedup_values(s, 1e-9 * cstar_norm(a).max(1.0))
}

/// Spectral radius.
pub fn spectral_radius(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// An element `(a, α)` of the unitization `Ã = A ⊕ C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitized {
    pub a: Mat,
    pub alpha: C64,
}

impl Unitized {
    pub fn new(a: Mat, alpha: C64) -> Self {
        Self { a, alpha }
    }

    pub fn one(k: usize) -> Self {
        Self { a: zeros(k), alpha: C64::new(1.0, 0.0) }
    }

    /// `(a, α)(b, β) = (ab + αb + βa, αβ)`.
    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.a * &other.a + &other.a * self.alpha + &self.a * other.alpha;
        Self { a, alpha: self.alpha * other.alpha }
    }

    /// The matrix `α·1 + a`, the image under the unital embedding.
    pub fn as_matrix(&self) -> Mat {
        &self.a + scalar(self.a.nrows(), self.alpha)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        cstar_norm(&(&self.a - &other.a)) + (self.alpha - other.alpha).norm()
    }
}

/// Condition number `σ_max/σ_min` (infinite when singular).
pub fn condition_number(m: &Mat) -> f64 {
    let s = m.singular_values();
    let (lo, hi) = (s.min(), s.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inverse of a square matrix, refusing ill-conditioned input.
pub fn checked_inverse(m: &Mat) -> Result<Mat> {
    let cond = condition_number(m);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular { cond });
    }
    m.clone().try_inverse().ok_or(Error::Singular { cond })
}

/// `(a, α)^{-1} = ((α1 + a)^{-1} − α^{-1}1, α^{-1})`.
pub fn unitized_inverse(x: &Unitized) -> Result<Unitized> {
    if x.alpha.norm() == 0.0 {
        return Err(Error::Singular { cond: f64::INFINITY });
    }
    let k = x.a.nrows();
    let inv = checked_inverse(&x.as_matrix())?;
    let ainv = C64::new(1.0, 0.0) / x.alpha;
    Ok(Unitized { a: inv - scalar(k, ainv), alpha: ainv })
}

/// `‖b − b*‖`.
pub fn self_adjoint_defect(b: &Mat) -> f64 {
    cstar_norm(&(b - b.adjoint()))
}

/// `f(b)` for self-adjoint `b` via its eigendecomposition.
pub fn smooth_calculus(b: &Mat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let defect = self_adjoint_defect(b);
    if defect > 1e-12 * cstar_norm(b).max(f64::MIN_POSITIVE) {
        return Err(Error::NotSelfAdjoint { defect });
    }
    let h = (b + b.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let fd: Vec<C64> = eig.eigenvalues.iter().map(|&t| C64::new(f(t), 0.0)).collect();
    let u = &eig.eigenvectors;
    Ok(u * diag(&fd) * u.adjoint())
}

fn smooth_step(s: f64) -> f64 {
    // 0 for s ≤ 0, 1 for s ≥ 1, C^∞ in between.
    let psi = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        psi(s) / (psi(s) + psi(1.0 - s))
    }
}

/// Smooth bump equal to 1 on `[−ε/3, ε/3]`, supported in `[−2ε/3, 2ε/3]`,
/// with values in `[0, 1]`.
pub fn chi(t: f64, eps: f64) -> f64 {
    smooth_step((2.0 * eps / 3.0 - t.abs()) / (eps / 3.0))
}

/// `f(y)` with `f(t) = t(1 − χ(t))`: vanishes when `‖y‖ ≤ ε/3` and moves
/// `y` by at most `2ε/3`.
pub fn lemma_uniq_smooth(y: &Mat, eps: f64) -> Result<Mat> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
    }
    smooth_calculus(y, |t| t * (1.0 - chi(t, eps)))
}

/// The matrix unit `E_ij` in `M_k`.
pub fn matrix_unit(k: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(k);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// A linear map `M_k → M_j` stored by its images of the matrix units.
#[derive(Clone, Debug)]
pub struct StarRepresentation {
    pub k: usize,
    pub images: Vec<Mat>,
}

impl StarRepresentation {
    /// Samples `rho` on the matrix units; linearity is imposed by construction.
    pub fn from_fn(k: usize, rho: impl Fn(&Mat) -> Mat) -> Self {
        let images = (0..k * k).map(|idx| rho(&matrix_unit(k, idx / k, idx % k))).collect();
        Self { k, images }
    }

    pub fn apply(&self, b: &Mat) -> Mat {
        let (r, c) = self.images[0].shape();
        let mut out = Mat::zeros(r, c);
        for i in 0..self.k {
            for j in 0..self.k {
                let z = b[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    out += &self.images[i * self.k + j] * z;
                }
            }
        }
        out
    }

    /// Largest defect of `ρ(xy) = ρ(x)ρ(y)` and `ρ(x*) = ρ(x)*` on matrix units.
    pub fn homomorphism_defect(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let eij = &self.images[i * k + j];
                let eji = &self.images[j * k + i];
                worst = worst.max(rect_norm(&(eij.adjoint() - eji)));
                for l in 0..k {
                    for m in 0..k {
                        let lhs = if j == l { self.images[i * k + m].clone() } else { eij * C64::new(0.0, 0.0) };
                        let rhs = eij * &self.images[l * k + m];
                        worst = worst.max(rect_norm(&(lhs - rhs)));
                    }
                }
            }
        }
        worst
    }
}

/// `‖ρ(b)‖` after checking that `ρ` is a *-homomorphism to `1e-12`.
pub fn seminorm_from_rep(rho: &StarRepresentation, b: &Mat) -> Result<f64> {
    let defect = rho.homomorphism_defect();
    let scale = rho.images.iter().map(rect_norm).fold(1.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(Error::NotHomomorphism { defect });
    }
    Ok(rect_norm(&rho.apply(b)))
}

fn vec_inner(a: &Mat, b: &Mat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn fro(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis (Frobenius inner product) of the unital subalgebra
/// generated by `basis`.
pub fn generated_subalgebra(k: usize, basis: &[Mat]) -> Vec<Mat> {
    let mut ortho: Vec<Mat> = Vec::new();
    let push = |ortho: &mut Vec<Mat>, m: &Mat| -> bool {
        let mut r = m.clone();
        // Two Gram–Schmidt passes keep the basis orthonormal to rounding.
        for _ in 0..2 {
            for q in ortho.iter() {
                let c = vec_inner(q, &r);
                r -= q * c;
            }
        }
        let nr = fro(&r);
        if nr > 1e-10 * fro(m).max(1e-300) && nr > 1e-14 {
            ortho.push(r / C64::new(nr, 0.0));
            true
        } else {
            false
        }
    };
    push(&mut ortho, &identity(k));
    for b in basis {
        push(&mut ortho, b);
    }
    loop {
        let mut grew = false;
        let current = ortho.clone();
        for x in &current {
            for y in &current {
                if ortho.len() >= k * k {
                    break;
                }
                grew |= push(&mut ortho, &(x * y));
            }
        }
        if !grew || ortho.len() >= k * k {
            break;
        }
    }
    ortho
}

fn span_residual(ortho: &[Mat], m: &Mat) -> f64 {
    let mut r = m.clone();
    for _ in 0..2 {
        for q in ortho {
            let c = vec_inner(q, &r);
            r -= q * c;
        }
    }
    fro(&r)
}

/// Whether `b^{-1}` lies in the unital subalgebra generated by `basis`
/// (least-squares residual relative to `‖b^{-1}‖` at most `1e-10`).
pub fn spectral_invariance_check(b: &Mat, basis: &[Mat]) -> Result<bool> {
    let k = b.nrows();
    let ortho = generated_subalgebra(k, basis);
    let res_b = span_residual(&ortho, b);
    if res_b > 1e-10 * fro(b).max(1e-300) {
        return Err(Error::NotInSubalgebra { residual: res_b });
    }
    let inv = checked_inverse(b)?;
    Ok(span_residual(&ortho, &inv) <= 1e-10 * fro(&inv))
}

/// Row-major JSON array of `[re, im]` pairs.
pub fn matrix_to_json(m: &Mat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array((0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect())
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_json(v: &Value) -> std::result::Result<Mat, String> {
    let rows = v.as_array().ok_or("matrix must be an array of rows")?;
    let k = rows.len();
    let mut m = Mat::zeros(k, k);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or("matrix row must be an array")?;
        if row.len() != k {
            return Err(format!("matrix row {i} has {} entries, expected {k}", row.len()));
        }
        for (j, e) in row.iter().enumerate() {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or("entry must be [re, im]")?;
            let re = pair[0].as_f64().ok_or("non-numeric real part")?;
            let im = pair[1].as_f64().ok_or("non-numeric imaginary part")?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norm_examples() {
        assert!((cstar_norm(&identity(3)) - 1.0).abs() < 1e-14);
        assert!((cstar_norm(&diag(&[c(3.0, 0.0), c(-4.0, 0.0)])) - 4.0).abs() < 1e-14);
        let n = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((cstar_norm(&n) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_2x2_matches_svd() {
        let m = Mat::from_row_slice(2, 2, &[c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7), c(2.0, 0.4)]);
        let svd = m.singular_values().max();
        assert!((norm_of_block(m.as_slice(), 2, true) - svd).abs() < 1e-13);
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(spectrum(&identity(2)), vec![c(1.0, 0.0)]);
        assert_eq!(unitized_spectrum(&identity(2)).len(), 2);
        assert_eq!(spectrum(&zeros(2)), vec![c(0.0, 0.0)]);
        let s = spectrum(&diag(&[c(1.0, 0.0), c(0.0, 2.0)]));
        assert_eq!(s.len(), 2);
        assert!(s.iter().any(|z| (z - c(0.0, 2.0)).norm() < 1e-12));
    }

    #[test]
    fn unitized_inverse_examples() {
        let x = Unitized::new(zeros(2), c(2.0, 0.0));
        let inv = unitized_inverse(&x).unwrap();
        assert!(cstar_norm(&inv.a) < 1e-15);
        assert!((inv.alpha - c(0.5, 0.0)).norm() < 1e-15);

        // Nilpotent: the Neumann series stops after one term.
        let n = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let inv = unitized_inverse(&Unitized::new(n.clone(), c(1.0, 0.0))).unwrap();
        assert!(cstar_norm(&(inv.a + &n)) < 1e-14);

        assert!(matches!(unitized_inverse(&Unitized::new(zeros(2), c(0.0, 0.0))), Err(Error::Singular { .. })));
        let sing = Unitized::new(diag(&[c(-1.0, 0.0), c(0.0, 0.0)]), c(1.0, 0.0));
        assert!(matches!(unitized_inverse(&sing), Err(Error::Singular { .. })));
    }

    #[test]
    fn b_minus_one_inverse() {
        let b = Mat::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(3.0, 0.0)]);
        let x = Unitized::new(&b - identity(2), c(1.0, 0.0));
        let inv = unitized_inverse(&x).unwrap();
        let want = b.clone().try_inverse().unwrap() - identity(2);
        assert!(cstar_norm(&(inv.a - want)) < 1e-13);
    }

    #[test]
    fn calculus_examples() {
        let b = diag(&[c(0.0, 0.0), c(2f64.ln(), 0.0)]);
        let e = smooth_calculus(&b, f64::exp).unwrap();
        assert!(cstar_norm(&(e - diag(&[c(1.0, 0.0), c(2.0, 0.0)]))) < 1e-14);
        let nsa = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(smooth_calculus(&nsa, |t| t), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn chi_shape() {
        for &eps in &[0.1, 1.0, 10.0] {
            assert_eq!(chi(eps / 3.0, eps), 1.0);
            assert_eq!(chi(-eps / 3.0, eps), 1.0);
            assert_eq!(chi(2.0 * eps / 3.0, eps), 0.0);
            let mid = chi(0.5 * eps, eps);
            assert!(mid > 0.0 && mid < 1.0);
        }
    }

    #[test]
    fn lemma_uniq_examples() {
        let y = diag(&[c(0.25, 0.0), c(0.0, 0.0)]);
        assert!(cstar_norm(&lemma_uniq_smooth(&y, 1.0).unwrap()) < 1e-15);
        let y = diag(&[c(10.0, 0.0), c(0.0, 0.0)]);
        let f = lemma_uniq_smooth(&y, 1.0).unwrap();
        assert!(cstar_norm(&(f - &y)) <= 2.0 / 3.0);
    }

    #[test]
    fn representation_examples() {
        let b = Mat::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(0.5, 0.0)]);
        let id = StarRepresentation::from_fn(2, |x| x.clone());
        assert!((seminorm_from_rep(&id, &b).unwrap() - cstar_norm(&b)).abs() < 1e-13);
        let embed = StarRepresentation::from_fn(2, |x| {
            let mut m = Mat::zeros(3, 3);
            m.view_mut((0, 0), (2, 2)).copy_from(x);
            m
        });
        assert!((seminorm_from_rep(&embed, &b).unwrap() - cstar_norm(&b)).abs() < 1e-13);
        let zero = StarRepresentation::from_fn(2, |_| Mat::zeros(2, 2));
        assert_eq!(seminorm_from_rep(&zero, &b).unwrap(), 0.0);
        let transpose = StarRepresentation::from_fn(2, |x| x.transpose());
        assert!(matches!(seminorm_from_rep(&transpose, &b), Err(Error::NotHomomorphism { .. })));
    }

    #[test]
    fn invariance_examples() {
        let d = vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)];
        assert!(spectral_invariance_check(&diag(&[c(1.0, 0.0), c(2.0, 0.0)]), &d).unwrap());
        let upper = vec![matrix_unit(2, 0, 1)];
        let b = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(spectral_invariance_check(&b, &upper).unwrap());
        assert_eq!(generated_subalgebra(2, &upper).len(), 2);
        let off = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(spectral_invariance_check(&off, &upper), Err(Error::NotInSubalgebra { .. })));
    }

    #[test]
    fn json_round_trip() {
        let m = Mat::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)]);
        let v = matrix_to_json(&m);
        assert_eq!(v[0][1], serde_json::json!([3.0, 4.0]));
        assert_eq!(matrix_from_json(&v).unwrap(), m);
    }
}
