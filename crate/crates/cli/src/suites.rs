//! Verification suites. Each suite is internally sequential and seeded from
//! the run configuration, so its records depend only on the configuration.
//!
//! Suites on `R^n` use the configured `n`, `N`, `L` and `J`. Phase-space
//! suites work on `R × R` with `max(N, 64)` points and half-width 8, the
//! smallest box on which the regularizing kernels have decayed.

use crate::config::RunConfig;
use crate::report::{CheckRecord, SuiteReport};
use crate::CliError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rieffel::coeff_algebra::{
    cstar_norm, diag, identity, lemma_uniq_smooth, matrix_unit, scalar, spectral_invariance_check, spectrum, unitized_inverse, unitized_spectrum, Mat, Unitized,
};
use rieffel::deformation::{deformed_product_exact, deformed_product_numeric, fourier_inversion_check, OscIntegralConfig};
use rieffel::heisenberg::{
    adu_conjugate, d_apply, d_inverse, differential_norms, generator_route_disagreement, heisenberg_act, inverse_cv_bound, kernel_identity_residual, phase_sup_distance,
    symbol_map_s, HeisenbergElement, SymbolMapConfig, SymbolicOperator,
};
use rieffel::pseudodiff::{cv_ratio, fourier, op, operator_norm, rieffel_operator, ModuleVector};
use rieffel::symbols::{BaseSymbol, DeformationMatrix, Grid, GridSymbol, PhaseSymbol, PhaseWaves, PlaneWaveSymbol};
use rieffel::{Result, C64};
use std::f64::consts::PI;
use std::time::Instant;

type SuiteFn = fn(&RunConfig) -> Result<Vec<CheckRecord>>;

pub struct Suite {
    pub name: &'static str,
    pub about: &'static str,
    run: SuiteFn,
}

pub const SUITES: &[Suite] = &[
    Suite { name: "algebra", about: "C*-identity, unitization, spectral invariance, smoothing", run: algebra },
    Suite { name: "associativity", about: "(f × g) × h = f × (g × h) on plane waves", run: associativity },
    Suite { name: "cv", about: "uniform Calderón–Vaillancourt constant over a family", run: cv },
    Suite { name: "d-inverse", about: "D(D⁻¹ b) = b", run: d_inv },
    Suite { name: "derivative", about: "δ^α Op(a) = Op(∂^α a) by two routes", run: derivative },
    Suite { name: "diffnorms", about: "differential-norm axioms for L_f", run: diffnorms },
    Suite { name: "fourier-inversion", about: "regularized Fourier inversion", run: fourier_inversion },
    Suite { name: "heisenberg", about: "unitarity and group law of U", run: heisenberg },
    Suite { name: "interplay", about: "L_f L_g = L_(f × g)", run: interplay },
    Suite { name: "inverse-cv", about: "sup ‖a‖ bounded through ‖Op(D a)‖", run: inverse_cv },
    Suite { name: "kernel", about: "the u, v kernel identity", run: kernel },
    Suite { name: "plancherel", about: "⟨Fu, v⟩ = ⟨u, F⁻¹v⟩", run: plancherel },
    Suite { name: "product", about: "deformed product against the plane-wave phase", run: product },
    Suite { name: "sup-op", about: "sup norm = operator norm at J = 0", run: sup_op },
    Suite { name: "symbol-map", about: "S ∘ Op = id", run: symbol_map },
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

/// Resolve a suite list, all suites when empty.
pub fn select(names: &[String]) -> std::result::Result<Vec<&'static Suite>, CliError> {
    if names.is_empty() {
        return Ok(SUITES.iter().collect());
    }
    let mut out: Vec<&'static Suite> = Vec::new();
    for n in names {
        let s = find(n).ok_or_else(|| {
            let known: Vec<&str> = SUITES.iter().map(|s| s.name).collect();
            CliError::Usage(format!("unknown suite `{n}` (known: {})", known.join(", ")))
        })?;
        if !out.iter().any(|o| o.name == s.name) {
            out.push(s);
        }
    }
    Ok(out)
}

impl Suite {
    pub fn run(&self, cfg: &RunConfig) -> SuiteReport {
        let start = Instant::now();
        let records = match (self.run)(cfg) {
            Ok(r) => r,
            Err(e) => vec![CheckRecord::failed(format!("{}.error", self.name), "", e.to_string())],
        };
        SuiteReport::new(self.name, records, cfg.timings.then(|| start.elapsed().as_secs_f64()))
    }
}

/// Run suites on a pool of `workers` threads.
pub fn run_all(suites: &[&'static Suite], cfg: &RunConfig, workers: usize) -> std::result::Result<Vec<SuiteReport>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Check(format!("thread pool: {e}")))?;
    Ok(pool.install(|| suites.par_iter().map(|s| s.run(cfg)).collect()))
}

mod anchor {
    pub const CSTAR: &str = "admits only one C$^*$-norm";
    pub const UNITIZATION: &str = "in the unitization $\\tilde{\\mathcal{A}}$ of $\\mathcal{A}$";
    pub const SPECTRAL_INVARIANCE: &str = "its spectrum as an element of $\\dot{\\mathcal{B}}$ coincides with its spectrum as an element of $\\dot{\\mathcal{A}}$";
    pub const SMOOTHING: &str = "the function $f$ defined by $f \\colon t \\longmapsto t(1 - \\chi(t))$";
    pub const PRODUCT: &str = "Rieffel's deformed product";
    pub const ASSOCIATIVE: &str = "is also an associative operation";
    pub const SUP_OP: &str = "the ``sup norm'' and the ``operator C$^*$-norm'' coincide";
    pub const INTERPLAY: &str = "L_{f_1} L_{f_2} = L_{f_1 \\times_J f_2}";
    pub const CV: &str = "Then $\\text{Op}(a)$ extends to a bounded operator on $E_n$";
    pub const DERIVATIVE: &str = "For every pseudodifferential operator";
    pub const D_INVERSE: &str = "such $a$ is given by the formula";
    pub const KERNEL: &str = "We can use this identity to obtain";
    pub const SYMBOL_MAP: &str = "the composition $S \\circ Op$ is the identity operator";
    pub const INVERSE_CV: &str = "an estimate in the opposite direction";
    pub const DIFF_NORM: &str = "a \\textit{differential seminorm} on $\\mathcal{B}$";
    pub const FOURIER_INVERSION: &str = "generalized Fourier Inversion Formula";
    pub const PLANCHEREL: &str = "generalized version of Plancherel's Theorem";
    pub const UNITARY: &str = "strongly continuous unitary representation $U$";
    pub const HEISENBERG: &str = "the Heisenberg group of dimension $2n + 1$";
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rng(cfg: &RunConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn rand_mat(rng: &mut ChaCha8Rng, k: usize) -> Mat {
    Mat::from_fn(k, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn rand_plane(rng: &mut ChaCha8Rng, n: usize, l: f64, k: usize, terms: usize, max_m: i64) -> PlaneWaveSymbol {
    let mut s = PlaneWaveSymbol::new(n, l, k);
    for _ in 0..terms {
        let m: Vec<i64> = (0..n).map(|_| rng.gen_range(-max_m..=max_m)).collect();
        s.add_term(m, rand_mat(rng, k));
    }
    s
}

/// Waves `e^{i(kx·x + kξ·ξ)}` on `R × R`, `kx ∈ (π/L)·[−mx, mx]`, `kξ ∈ Δ·[−mxi, mxi]`.
fn rand_phase(rng: &mut ChaCha8Rng, grid: &Grid, k: usize, terms: usize, mx: i64, mxi: i64) -> PhaseWaves {
    let mut w = PhaseWaves::new(1, k);
    for _ in 0..terms {
        let kx = rng.gen_range(-mx..=mx) as f64 * PI / grid.half_width;
        let kxi = rng.gen_range(-mxi..=mxi) as f64 * grid.spacing();
        w.push(vec![kx], vec![kxi], rand_mat(rng, k));
    }
    w
}

fn base_grid(cfg: &RunConfig) -> Result<Grid> {
    Grid::new(cfg.n, cfg.npts, cfg.half_width)
}

fn phase_grid(cfg: &RunConfig) -> Result<Grid> {
    Grid::new(1, cfg.npts.max(64), 8.0)
}

fn deformation(cfg: &RunConfig) -> Result<DeformationMatrix> {
    cfg.deformation(cfg.n).map_err(|e| rieffel::Error::Invalid(e.to_string()))
}

/// All integer vectors in `[−m, m]^n`.
fn lattice(n: usize, m: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v| (-m..=m).map(move |a| [v.clone(), vec![a]].concat())).collect();
    }
    out
}

fn algebra(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let tol = cfg.tol.algebra;
    let mut r = rng(cfg, 1);
    let (mut cstar, mut inv, mut spec_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let a = rand_mat(&mut r, cfg.k);
        let na = cstar_norm(&a);
        cstar = cstar.max((cstar_norm(&(a.adjoint() * &a)) - na * na).abs() / (na * na));
        let alpha = C64::from_polar(r.gen_range(0.5..2.0), r.gen_range(0.0..2.0 * PI));
        let x = Unitized::new(a.clone(), alpha);
        let xi = unitized_inverse(&x)?;
        let one = Unitized::one(cfg.k);
        inv = inv.max(x.mul(&xi).dist(&one)).max(xi.mul(&x).dist(&one));
        // σ(a) ∪ {0}, compared both ways.
        let su = unitized_spectrum(&a);
        let mut with_zero = spectrum(&a);
        with_zero.push(c(0.0, 0.0));
        let near = |z: &C64, set: &[C64]| set.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
        for z in &su {
            spec_gap = spec_gap.max(near(z, &with_zero) / na.max(1.0));
        }
        for z in &with_zero {
            spec_gap = spec_gap.max(near(z, &su) / na.max(1.0));
        }
    }
    // Inverses of invertible elements of the diagonal subalgebra stay diagonal.
    let basis: Vec<Mat> = (0..cfg.k).map(|i| matrix_unit(cfg.k, i, i)).collect();
    let mut escaped = 0;
    for _ in 0..20 {
        let d: Vec<C64> = (0..cfg.k).map(|_| C64::from_polar(r.gen_range(0.5..2.0), r.gen_range(0.0..2.0 * PI))).collect();
        if !spectral_invariance_check(&diag(&d), &basis)? {
            escaped += 1;
        }
    }
    let (mut moved, mut small): (f64, f64) = (0.0, 0.0);
    for eps in [0.1, 1.0, 10.0] {
        for _ in 0..20 {
            let h = rand_mat(&mut r, cfg.k);
            let h = (&h + h.adjoint()) * c(0.5, 0.0);
            let h = &h * c(1.0 / cstar_norm(&h).max(1e-300), 0.0);
            let y = &h * c(eps * r.gen_range(0.0..3.0), 0.0);
            moved = moved.max(cstar_norm(&(lemma_uniq_smooth(&y, eps)? - &y)) / eps);
            small = small.max(cstar_norm(&lemma_uniq_smooth(&(&h * c(eps * r.gen_range(0.0..0.33), 0.0)), eps)?));
        }
    }
    Ok(vec![
        CheckRecord::new("algebra.cstar_identity", anchor::CSTAR, cstar, tol, format!("50 random {0}×{0} matrices, max |‖a*a‖ − ‖a‖²|/‖a‖²", cfg.k)),
        CheckRecord::new("algebra.unitization_inverse", anchor::UNITIZATION, inv, tol, "max ‖x x⁻¹ − 1‖ and ‖x⁻¹ x − 1‖ over 50 elements (a, α)"),
        CheckRecord::new("algebra.unitization_spectrum", anchor::UNITIZATION, spec_gap, tol, "max distance between σ(a) ∪ {0} and the unitized spectrum"),
        CheckRecord::new("algebra.spectral_invariance", anchor::SPECTRAL_INVARIANCE, escaped as f64, 0.0, "invertible diagonal matrices whose inverse leaves the diagonal subalgebra"),
        CheckRecord::new("algebra.smoothing_moves_little", anchor::SMOOTHING, moved, 2.0 / 3.0 + 1e-12, "max ‖f(y) − y‖/ε, ε ∈ {0.1, 1, 10}"),
        CheckRecord::new("algebra.smoothing_kills_small", anchor::SMOOTHING, small, 0.0, "max ‖f(y)‖ over ‖y‖ ≤ ε/3"),
    ])
}

fn product(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let j = deformation(cfg)?;
    let (n, l) = (cfg.n, cfg.half_width);
    let osc = OscIntegralConfig::default();
    // p + q must stay below the Nyquist index.
    let m = ((cfg.npts as i64 / 2 - 1) / 2).min(2);
    let freqs = lattice(n, m);
    let waves: Vec<GridSymbol> = freqs.iter().map(|f| PlaneWaveSymbol::single(n, l, f.clone(), scalar(1, c(1.0, 0.0))).sample(&grid)).collect::<Result<_>>()?;
    let cyc = |v: &[i64]| v.iter().map(|&a| a as f64 / (2.0 * l)).collect::<Vec<f64>>();
    let mut oracle: f64 = 0.0;
    for (p, fp) in freqs.iter().zip(&waves) {
        for (q, fq) in freqs.iter().zip(&waves) {
            let got = deformed_product_numeric(fp, fq, &j, &osc)?;
            let (pv, qv) = (cyc(p), cyc(q));
            let phase = -2.0 * PI * j.form(&pv, &qv);
            for (pt, z) in got.data().iter().enumerate() {
                let x = grid.point(pt);
                let arg: f64 = (0..n).map(|i| 2.0 * PI * (pv[i] + qv[i]) * x[i]).sum();
                oracle = oracle.max((z - C64::from_polar(1.0, phase + arg)).norm());
            }
        }
    }
    let mut r = rng(cfg, 2);
    let mut routes: f64 = 0.0;
    for _ in 0..10 {
        let f = rand_plane(&mut r, n, l, cfg.k, 3, m);
        let g = rand_plane(&mut r, n, l, cfg.k, 3, m);
        let exact = deformed_product_exact(&f, &g, &j)?.sample(&grid)?;
        let numeric = deformed_product_numeric(&f.sample(&grid)?, &g.sample(&grid)?, &j, &osc)?;
        routes = routes.max(exact.sup_distance(&numeric)? / (f.sup_norm() * g.sup_norm()).max(1e-300));
    }
    let tol = cfg.tol.product;
    Ok(vec![
        CheckRecord::new("product.plane_wave_phase", anchor::PRODUCT, oracle, tol, format!("{} wave pairs |m| ≤ {m}, max |e_p × e_q − e^(−2πi p·Jq) e_(p+q)|", freqs.len().pow(2))),
        CheckRecord::new("product.routes_agree", anchor::PRODUCT, routes, tol, "10 random pairs, exact against numeric route, relative sup gap"),
    ])
}

fn associativity(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let j = deformation(cfg)?;
    let (n, l) = (cfg.n, cfg.half_width);
    let osc = OscIntegralConfig::default();
    let mut r = rng(cfg, 3);
    let mut exact: f64 = 0.0;
    for _ in 0..20 {
        let f = rand_plane(&mut r, n, l, cfg.k, 3, 3);
        let g = rand_plane(&mut r, n, l, cfg.k, 3, 3);
        let h = rand_plane(&mut r, n, l, cfg.k, 3, 3);
        let left = deformed_product_exact(&deformed_product_exact(&f, &g, &j)?, &h, &j)?;
        let right = deformed_product_exact(&f, &deformed_product_exact(&g, &h, &j)?, &j)?;
        let scale = (f.sup_norm() * g.sup_norm() * h.sup_norm()).max(1e-300);
        for (m, a) in left.terms() {
            let b = right.coeff(m).cloned().unwrap_or_else(|| Mat::zeros(cfg.k, cfg.k));
            exact = exact.max(cstar_norm(&(a - b)) / scale);
        }
        for (m, b) in right.terms() {
            if left.coeff(m).is_none() {
                exact = exact.max(cstar_norm(b) / scale);
            }
        }
    }
    // Sampled route: triple sums must stay below the Nyquist index.
    let m = ((cfg.npts as i64 / 2 - 1) / 3).min(2);
    let mut numeric: f64 = 0.0;
    for _ in 0..5 {
        let [f, g, h] = [0; 3].map(|_| rand_plane(&mut r, n, l, cfg.k, 3, m));
        let scale = (f.sup_norm() * g.sup_norm() * h.sup_norm()).max(1e-300);
        let (f, g, h) = (f.sample(&grid)?, g.sample(&grid)?, h.sample(&grid)?);
        let left = deformed_product_numeric(&deformed_product_numeric(&f, &g, &j, &osc)?, &h, &j, &osc)?;
        let right = deformed_product_numeric(&f, &deformed_product_numeric(&g, &h, &j, &osc)?, &j, &osc)?;
        numeric = numeric.max(left.sup_distance(&right)? / scale);
    }
    let tol = cfg.tol.associativity;
    Ok(vec![
        CheckRecord::new("associativity.exact", anchor::ASSOCIATIVE, exact, tol, "20 triples of 3-term plane-wave symbols, max coefficient gap relative to ‖f‖‖g‖‖h‖"),
        CheckRecord::new("associativity.sampled", anchor::ASSOCIATIVE, numeric, tol, format!("5 sampled triples |m| ≤ {m}, relative sup gap")),
    ])
}

fn sup_op(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let zero = DeformationMatrix::zero(cfg.n);
    // Grid maxima resolve a frequency index up to N/16 within about 2%.
    let m = (cfg.npts as i64 / 16).min(3);
    let mut r = rng(cfg, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f = rand_plane(&mut r, cfg.n, cfg.half_width, cfg.k, 4, m);
        let sup = f.sup_norm();
        let opn = operator_norm(&rieffel_operator(&BaseSymbol::Waves(f), &grid, &zero)?)?;
        worst = worst.max((sup - opn).abs() / sup.max(1e-300));
    }
    Ok(vec![CheckRecord::new("sup_op.relative_gap", anchor::SUP_OP, worst, cfg.tol.sup_op, format!("10 symbols |m| ≤ {m} at J = 0, max |sup − ‖L_f‖|/sup"))])
}

fn interplay(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let j = deformation(cfg)?;
    let (n, l, k) = (cfg.n, cfg.half_width, cfg.k);
    // Probes band-limited to |m| ≤ b so that two modulations never wrap.
    let mm = ((cfg.npts as i64 / 2 - 1) / 4).min(2);
    let b = cfg.npts as i64 / 2 - 1 - 2 * mm;
    let mut r = rng(cfg, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f = rand_plane(&mut r, n, l, k, 3, mm);
        let g = rand_plane(&mut r, n, l, k, 3, mm);
        let fg = deformed_product_exact(&f, &g, &j)?;
        let lf = rieffel_operator(&BaseSymbol::Waves(f), &grid, &j)?;
        let lg = rieffel_operator(&BaseSymbol::Waves(g), &grid, &j)?;
        let lfg = rieffel_operator(&BaseSymbol::Waves(fg), &grid, &j)?;
        let mut probe = PlaneWaveSymbol::new(n, l, 1);
        for m in lattice(n, b) {
            probe.add_term(m, scalar(1, c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))));
        }
        let col: Vec<C64> = (0..k).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let h = ModuleVector::from_fn(grid, k, 1, |x| Mat::from_column_slice(k, 1, &col) * probe.eval(x)[(0, 0)]);
        let resid = lf.apply(&lg.apply(&h)?)?.sub(&lfg.apply(&h)?).norm_l2();
        let scale = operator_norm(&lf)? * operator_norm(&lg)? * h.norm_l2();
        worst = worst.max(resid / scale.max(1e-300));
    }
    Ok(vec![CheckRecord::new(
        "interplay.operator_identity",
        anchor::INTERPLAY,
        worst,
        cfg.tol.interplay,
        format!("10 pairs |m| ≤ {mm}, probes |m| ≤ {b}, max ‖L_f L_g h − L_(f×g) h‖/(‖L_f‖‖L_g‖‖h‖)"),
    )])
}

fn cv(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let coarse = phase_grid(cfg)?;
    let fine = Grid::new(1, 2 * coarse.npts, coarse.half_width)?;
    let mut r = rng(cfg, 6);
    // Multipliers φ(ξ), multiplications ψ(x) and mixed symbols.
    let family: Vec<PhaseSymbol> = (0..30)
        .map(|i| {
            let (k, terms) = (1 + i % 2, 1 + i % 3);
            let (mx, mxi) = match i / 10 {
                0 => (0, 6),
                1 => (3, 0),
                _ => (3, 6),
            };
            PhaseSymbol::Waves(rand_phase(&mut r, &coarse, k, terms, mx, mxi))
        })
        .collect();
    let fit = |g: &Grid| -> Result<f64> { family.iter().try_fold(0.0_f64, |m, a| Ok(m.max(cv_ratio(a, g)?))) };
    let (c1, c2) = (fit(&coarse)?, fit(&fine)?);
    let drift = (c2 / c1 - 1.0).abs();
    Ok(vec![
        CheckRecord::new("cv.c_fit_bounds_refinement", anchor::CV, c2, c1 * (1.0 + cfg.tol.cv_stability), format!("C_fit = {c1:.6} at N = {}; value is the max ratio at N = {}", coarse.npts, fine.npts)),
        CheckRecord::new("cv.c_fit_stable", anchor::CV, drift, cfg.tol.cv_stability, format!("30 symbols, |C_fit(2N)/C_fit(N) − 1| with C_fit = {c1:.6}")),
    ])
}

fn derivative(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    const STEP: f64 = 1e-2;
    let grid = phase_grid(cfg)?;
    let mut r = rng(cfg, 7);
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let a = SymbolicOperator::Op { symbol: PhaseSymbol::Waves(rand_phase(&mut r, &grid, 1 + i % 2, 2, 2, 2)), grid };
        for alpha in [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
            worst = worst.max(generator_route_disagreement(&a, &alpha, STEP)?);
        }
    }
    Ok(vec![CheckRecord::new("derivative.routes_agree", anchor::DERIVATIVE, worst, cfg.tol.route, format!("5 symbols, |α| ≤ 2, finite-difference step {STEP}, max relative gap"))])
}

fn d_inv(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = phase_grid(cfg)?;
    let mut r = rng(cfg, 8);
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        let w = rand_phase(&mut r, &grid, 1 + i % 2, 3, 4, 4);
        let b = if i < 6 { PhaseSymbol::Waves(w) } else { PhaseSymbol::Grid(w.sample(&grid)?) };
        let back = d_apply(&d_inverse(&b)?);
        worst = worst.max(phase_sup_distance(&back.to_grid(&grid)?, &b.to_grid(&grid)?)?);
    }
    Ok(vec![CheckRecord::new("d_inverse.roundtrip", anchor::D_INVERSE, worst, cfg.tol.d_inverse, "8 symbols (6 exact, 2 sampled), max sup ‖D D⁻¹ b − b‖")])
}

fn kernel(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            worst = worst.max(kernel_identity_residual(-3.0 + 0.75 * i as f64, -3.0 + 0.75 * j as f64));
        }
    }
    Ok(vec![CheckRecord::new("kernel.identity", anchor::KERNEL, worst, cfg.tol.kernel, "5×5 points of [−3, 0]², max residual")])
}

/// Band-limited symbols with frequency indices `|m| ≤ 2` in both variables.
fn symbol_map_family(grid: &Grid) -> Vec<PhaseSymbol> {
    let (l, d) = (grid.half_width, grid.spacing());
    let wave = |k: usize, kx: f64, kxi: f64, coeff: Mat| {
        let mut w = PhaseWaves::new(1, k);
        w.push(vec![kx], vec![kxi], coeff);
        w
    };
    let one = PhaseWaves::constant(1, scalar(1, c(1.0, 0.0)));
    let m2 = Mat::from_fn(2, 2, |i, j| c(0.2 * (i + 1) as f64 + if i + j == 0 { 1.0 } else { 0.0 }, 0.1 * j as f64));
    vec![
        PhaseWaves::constant(1, scalar(1, c(1.5, 0.5))),
        wave(1, 2.0 * PI / l, 0.0, scalar(1, c(0.5, 0.0))).add(&one),
        wave(1, 0.0, 2.0 * d, scalar(1, c(0.0, 0.5))).add(&one),
        wave(1, PI / l, d, scalar(1, c(0.5, 0.0))).add(&one),
        wave(2, -PI / l, -2.0 * d, m2 * c(0.3, 0.0)).add(&PhaseWaves::constant(1, identity(2))),
        wave(1, 2.0 * PI / l, 2.0 * d, scalar(1, c(1.0, 0.0))),
    ]
    .into_iter()
    .map(PhaseSymbol::Waves)
    .collect()
}

fn symbol_map(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = phase_grid(cfg)?;
    let smc = SymbolMapConfig::default();
    let family = symbol_map_family(&grid);
    let mut worst: f64 = 0.0;
    for a in &family {
        let s = symbol_map_s(&SymbolicOperator::Op { symbol: a.clone(), grid }, &smc)?;
        let want = a.to_grid(&grid)?;
        worst = worst.max(phase_sup_distance(&s, &want)? / want.sup_norm());
    }
    Ok(vec![CheckRecord::new(
        "symbol_map.recovers_symbol",
        anchor::SYMBOL_MAP,
        worst,
        cfg.tol.symbol_map,
        format!("{} symbols at N = {}, max relative sup ‖S(Op a) − a‖", family.len(), grid.npts),
    )])
}

fn inverse_cv(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = phase_grid(cfg)?;
    let mut worst: f64 = 0.0;
    for a in symbol_map_family(&grid) {
        let (lhs, rhs) = inverse_cv_bound(&a, &grid)?;
        worst = worst.max(lhs / rhs);
    }
    Ok(vec![CheckRecord::new("inverse_cv.bound", anchor::INVERSE_CV, worst, 1.0, "6 symbols, max ratio of sup ‖a‖ to (2π)^(1/2) ‖u‖₂ ‖v‖₂ ‖Op(D a)‖")])
}

fn diffnorms(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let (n, l, m) = (cfg.n, cfg.half_width, cfg.order);
    // Round θ to a multiple of 4L²/N, where the grid represents ×_J exactly.
    let quantum = 4.0 * l * l / cfg.npts as f64;
    let theta = (deformation(cfg)?.theta() / quantum).round() * quantum;
    let j = if n == 2 { DeformationMatrix::symplectic(theta) } else { DeformationMatrix::zero(1) };
    let mut r = rng(cfg, 9);
    let (mut t0, mut leibniz, mut submult, mut monotone): (f64, f64, f64, f64) = (0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..6 {
        let k = 1 + i % cfg.k.min(2);
        let f = rand_plane(&mut r, n, l, k, 2, 2);
        let g = rand_plane(&mut r, n, l, k, 2, 2);
        let fg = deformed_product_exact(&f, &g, &j)?;
        let sym = |s: PlaneWaveSymbol| SymbolicOperator::Rieffel { f: BaseSymbol::Waves(s), grid, j: j.clone() };
        let (a, b, ab) = (sym(f), sym(g), sym(fg));
        let (ra, rb, rab) = (differential_norms(&a, m)?, differential_norms(&b, m)?, differential_norms(&ab, m)?);
        let norm = operator_norm(&ab.operator()?)?;
        t0 = t0.max((rab.t[0] - norm).abs() / norm.max(1.0));
        for kk in 0..=m {
            let bound: f64 = (0..=kk).map(|i| ra.t[i] * rb.t[kk - i]).sum();
            leibniz = leibniz.max((rab.t[kk] - bound) / bound.max(1.0));
            let sbound = ra.s[kk] * rb.s[kk];
            submult = submult.max((rab.s[kk] - sbound) / sbound.max(1.0));
        }
        for rep in [&ra, &rb, &rab] {
            monotone = monotone.max(rep.s.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max));
        }
    }
    let tol = cfg.tol.leibniz;
    let setup = format!("6 pairs, m = {m}, θ = {theta} (multiple of 4L²/N)");
    Ok(vec![
        CheckRecord::new("diffnorms.t0_is_norm", anchor::DIFF_NORM, t0, tol, format!("{setup}, |T_0 − ‖A‖|")),
        CheckRecord::new("diffnorms.leibniz", anchor::DIFF_NORM, leibniz, tol, format!("{setup}, max (T_k(ab) − Σ T_i(a)T_(k−i)(b)), relative")),
        CheckRecord::new("diffnorms.submultiplicative", anchor::DIFF_NORM, submult, tol, format!("{setup}, max (s_k(ab) − s_k(a)s_k(b)), relative")),
        CheckRecord::new("diffnorms.monotone", anchor::DIFF_NORM, monotone.max(0.0), 0.0, format!("{setup}, max decrease of s_k in k")),
    ])
}

fn fourier_inversion(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let osc = OscIntegralConfig::default();
    let cst = PlaneWaveSymbol::constant(1, 4.0, identity(cfg.k) * c(0.5, -1.0));
    let wave = PlaneWaveSymbol::single(1, 4.0, vec![3], scalar(1, c(1.0, 0.5)));
    let grid = Grid::new(1, 128, 8.0)?;
    let gauss = GridSymbol::from_fn(grid, 1, |x| scalar(1, c((-x[0] * x[0]).exp(), 0.0)));
    let mut worst: f64 = 0.0;
    for x in [-1.3, -0.4, 0.0, 0.55, 1.2] {
        worst = worst.max(fourier_inversion_check(&cst, &[x], &osc)?);
        worst = worst.max(fourier_inversion_check(&wave, &[x], &osc)?);
        worst = worst.max(fourier_inversion_check(&gauss, &[x], &osc)?);
    }
    Ok(vec![CheckRecord::new("fourier_inversion.residual", anchor::FOURIER_INVERSION, worst, cfg.tol.fourier_inversion, "constant, wave and Gaussian at 5 points, max residual")])
}

fn plancherel(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let mut r = rng(cfg, 10);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let cols = 1 + i % 2;
        let u = ModuleVector::random(grid, cfg.k, cols, &mut r, None);
        let v = ModuleVector::random(grid.dual(), cfg.k, cols, &mut r, None);
        let d = fourier(&u, false).inner(&v)? - u.inner(&fourier(&v, true))?;
        worst = worst.max(cstar_norm(&d) / (u.norm_l2() * v.norm_l2()));
    }
    Ok(vec![CheckRecord::new("plancherel.adjoint_pairing", anchor::PLANCHEREL, worst, cfg.tol.plancherel, "20 random pairs, max relative ‖⟨Fu, v⟩ − ⟨u, F⁻¹v⟩‖")])
}

fn heisenberg(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let grid = base_grid(cfg)?;
    let n = cfg.n;
    let (dx, db) = (grid.spacing(), PI / grid.half_width);
    let mut r = rng(cfg, 11);
    let (mut unitary, mut law, mut conj): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let f = ModuleVector::random(grid, cfg.k, 1, &mut r, None);
        let g = ModuleVector::random(grid, cfg.k, 1, &mut r, None);
        let any = |r: &mut ChaCha8Rng| HeisenbergElement::new((0..n).map(|_| r.gen_range(-2.0..2.0)).collect(), (0..n).map(|_| r.gen_range(-2.0..2.0)).collect(), r.gen_range(-3.0..3.0));
        let h = any(&mut r);
        let d = heisenberg_act(&h, &f)?.inner(&heisenberg_act(&h, &g)?)? - f.inner(&g)?;
        unitary = unitary.max(cstar_norm(&d) / (f.norm_l2() * g.norm_l2()));
        // Lattice elements: grid translations and periodic modulations act exactly.
        let lat = |r: &mut ChaCha8Rng| {
            HeisenbergElement::new(
                (0..n).map(|_| r.gen_range(-4..=4) as f64 * dx).collect(),
                (0..n).map(|_| r.gen_range(-4..=4) as f64 * db).collect(),
                r.gen_range(-3.0..3.0),
            )
        };
        let (h1, h2) = (lat(&mut r), lat(&mut r));
        let lhs = heisenberg_act(&h1, &heisenberg_act(&h2, &f)?)?;
        law = law.max(lhs.sub(&heisenberg_act(&h1.mul(&h2), &f)?).norm_l2() / f.norm_l2());
    }
    let pg = Grid::new(1, 32, 4.0)?;
    for i in 0..5 {
        let a = op(&PhaseSymbol::Waves(rand_phase(&mut r, &pg, 1 + i % 2, 3, 2, 2)), &pg)?;
        let (s, t) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let (n0, n1) = (operator_norm(&a)?, operator_norm(&adu_conjugate(&[s], &[t], &a))?);
        conj = conj.max((n0 - n1).abs() / n0.max(1.0));
    }
    let tol = cfg.tol.unitarity;
    Ok(vec![
        CheckRecord::new("heisenberg.unitary", anchor::UNITARY, unitary, tol, "10 elements, max relative ‖⟨U_h f, U_h g⟩ − ⟨f, g⟩‖"),
        CheckRecord::new("heisenberg.group_law", anchor::HEISENBERG, law, tol, "10 lattice pairs, max ‖U_h1 U_h2 f − U_(h1 h2) f‖/‖f‖"),
        CheckRecord::new("heisenberg.conjugation_isometric", anchor::UNITARY, conj, 1e-8, "5 operators, max relative change of ‖A‖ under Ad U"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique_and_sorted() {
        let names: Vec<&str> = SUITES.iter().map(|s| s.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(names, sorted);
    }

    #[test]
    fn selection_rejects_unknown_names_and_dedups() {
        assert_eq!(select(&[]).unwrap().len(), SUITES.len());
        assert_eq!(select(&["kernel".into(), "kernel".into()]).unwrap().len(), 1);
        assert!(matches!(select(&["nope".into()]), Err(CliError::Usage(_))));
    }

    #[test]
    fn lattice_enumerates_the_box() {
        assert_eq!(lattice(2, 1).len(), 9);
        assert_eq!(lattice(1, 2), vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);
    }
}
