//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p rieffel --test acceptance`. Every tolerance is a
//! constant next to the check that uses it. Oracles are computed here from
//! closed forms wherever one exists.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieffel::coeff_algebra::{cstar_norm, identity, lemma_uniq_smooth, scalar, spectrum, unitized_inverse, unitized_spectrum, Mat, Unitized};
use rieffel::deformation::{deformed_product_exact, deformed_product_numeric, fourier_inversion_check, OscIntegralConfig};
use rieffel::heisenberg::{
    d_apply, d_inverse, differential_norms, generator_route_disagreement, inverse_cv_bound, kernel_identity_residual, phase_sup_distance, symbol_map_s, SymbolMapConfig,
    SymbolicOperator,
};
use rieffel::pseudodiff::{cv_ratio, fourier, operator_norm, rieffel_operator, ModuleVector};
use rieffel::symbols::{BaseSymbol, DeformationMatrix, Grid, GridSymbol, PhaseSymbol, PhaseWaves, PlaneWaveSymbol};
use rieffel::{Result, C64};
use std::f64::consts::PI;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn rand_mat(rng: &mut ChaCha8Rng, k: usize) -> Mat {
    Mat::from_fn(k, k, |_, _| rand_c(rng))
}

fn rand_hermitian(rng: &mut ChaCha8Rng, k: usize) -> Mat {
    let a = rand_mat(rng, k);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// `terms` random plane waves with every frequency component in `[−max_m, max_m]`.
fn rand_plane(rng: &mut ChaCha8Rng, n: usize, l: f64, k: usize, terms: usize, max_m: i64) -> PlaneWaveSymbol {
    let mut s = PlaneWaveSymbol::new(n, l, k);
    for _ in 0..terms {
        let m: Vec<i64> = (0..n).map(|_| rng.gen_range(-max_m..=max_m)).collect();
        s.add_term(m, rand_mat(rng, k));
    }
    s
}

fn phase_wave(k: usize, kx: f64, kxi: f64, coeff: Mat) -> PhaseWaves {
    let mut w = PhaseWaves::new(1, k);
    w.push(vec![kx], vec![kxi], coeff);
    w
}

/// Random phase-space waves on `R × R` with `x`-frequencies `m π/L` and
/// `ξ`-frequencies `j Δ`, `|m| ≤ mx`, `|j| ≤ mxi`.
fn rand_phase(rng: &mut ChaCha8Rng, k: usize, terms: usize, l: f64, mx: i64, dxi: f64, mxi: i64) -> PhaseWaves {
    let mut w = PhaseWaves::new(1, k);
    for _ in 0..terms {
        let kx = rng.gen_range(-mx..=mx) as f64 * PI / l;
        let kxi = rng.gen_range(-mxi..=mxi) as f64 * dxi;
        w.push(vec![kx], vec![kxi], rand_mat(rng, k));
    }
    w
}

fn gaussian_symbol(rng: &mut ChaCha8Rng, grid: Grid, k: usize) -> GridSymbol {
    let n = grid.n;
    let centre: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let freq: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let width = rng.gen_range(1.0..2.0);
    let coeff = rand_mat(rng, k);
    GridSymbol::from_fn(grid, k, |x| {
        let r2: f64 = (0..n).map(|i| (x[i] - centre[i]).powi(2)).sum();
        let ph: f64 = (0..n).map(|i| freq[i] * x[i]).sum();
        &coeff * C64::from_polar((-r2 / width).exp(), ph)
    })
}

fn c01_plane_wave_oracle() -> Result<Outcome> {
    const TOL: f64 = 1e-6;
    const BUDGET_S: f64 = 60.0;
    let start = Instant::now();
    let l = 4.0;
    let grid = Grid::new(2, 16, l)?;
    let cfg = OscIntegralConfig::default();
    let freqs: Vec<[i64; 2]> = (-3..=3).flat_map(|a| (-3..=3).map(move |b| [a, b])).collect();
    let waves: Vec<GridSymbol> = freqs.iter().map(|m| PlaneWaveSymbol::single(2, l, m.to_vec(), scalar(1, c(1.0, 0.0))).sample(&grid)).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for theta in [0.0, 0.25, 1.0] {
        let j = DeformationMatrix::symplectic(theta);
        for (p, fp) in freqs.iter().zip(&waves) {
            for (q, fq) in freqs.iter().zip(&waves) {
                let got = deformed_product_numeric(fp, fq, &j, &cfg)?;
                let (pv, qv) = ([p[0] as f64 / (2.0 * l), p[1] as f64 / (2.0 * l)], [q[0] as f64 / (2.0 * l), q[1] as f64 / (2.0 * l)]);
                let phase = -2.0 * PI * theta * (pv[0] * qv[1] - pv[1] * qv[0]);
                for (pt, z) in got.data().iter().enumerate() {
                    let x = grid.point(pt);
                    let want = C64::from_polar(1.0, phase + 2.0 * PI * ((pv[0] + qv[0]) * x[0] + (pv[1] + qv[1]) * x[1]));
                    worst = worst.max((z - want).norm());
                }
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= TOL && secs < BUDGET_S, format!("{count} products, max error {worst:.2e} (tol {TOL:e}), {secs:.1} s (budget {BUDGET_S} s)"))
}

fn c02_undeformed_norms() -> Result<Outcome> {
    const TOL: f64 = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let l = 4.0;
    let grid = Grid::new(2, 64, l)?;
    let fine = Grid::new(2, 256, l)?;
    let zero = DeformationMatrix::zero(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = rand_plane(&mut rng, 2, l, 2, 5, 3);
        let op = operator_norm(&rieffel_operator(&BaseSymbol::Waves(f.clone()), &grid, &zero)?)?;
        let sup = f.sup_norm();
        // Independent sup on a 4× finer grid.
        let oracle = f.sample(&fine)?.sup_norm();
        worst = worst.max((sup - op).abs() / sup).max((oracle - op).abs() / oracle);
    }
    outcome(worst <= TOL, format!("20 symbols k = 2 on 64², max |sup − op|/sup = {worst:.2e} (tol {TOL})"))
}

fn c03_associativity() -> Result<Outcome> {
    const EXACT_TOL: f64 = 1e-12;
    const NUMERIC_TOL: f64 = 1e-5;
    let l = 3.0;
    let freqs: Vec<Vec<i64>> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| vec![a, b])).collect();
    let waves: Vec<PlaneWaveSymbol> = freqs.iter().map(|m| PlaneWaveSymbol::single(2, l, m.clone(), scalar(1, c(1.0, 0.0)))).collect();
    let mut exact_worst: f64 = 0.0;
    for theta in [0.25, 1.0] {
        let j = DeformationMatrix::symplectic(theta);
        let pairs: Vec<Vec<PlaneWaveSymbol>> = waves.iter().map(|f| waves.iter().map(|g| deformed_product_exact(f, g, &j)).collect::<Result<_>>()).collect::<Result<_>>()?;
        for (a, p) in freqs.iter().enumerate() {
            for (b, q) in freqs.iter().enumerate() {
                for (cc, r) in freqs.iter().enumerate() {
                    let left = deformed_product_exact(&pairs[a][b], &waves[cc], &j)?;
                    let right = deformed_product_exact(&waves[a], &pairs[b][cc], &j)?;
                    let key: Vec<i64> = (0..2).map(|i| p[i] + q[i] + r[i]).collect();
                    let (lc, rc) = match (left.coeff(&key), right.coeff(&key)) {
                        (Some(x), Some(y)) if left.len() == 1 && right.len() == 1 => (x[(0, 0)], y[(0, 0)]),
                        _ => return outcome(false, format!("triple {p:?} {q:?} {r:?} lost its frequency")),
                    };
                    let form = |u: &[i64], v: &[i64]| theta * (u[0] * v[1] - u[1] * v[0]) as f64 / (4.0 * l * l);
                    let want = C64::from_polar(1.0, -2.0 * PI * (form(p, q) + form(p, r) + form(q, r)));
                    exact_worst = exact_worst.max((lc - rc).norm()).max((lc - want).norm());
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = Grid::new(2, 32, 6.0)?;
    let j = DeformationMatrix::symplectic(0.25);
    let cfg = OscIntegralConfig::default();
    let mut numeric_worst: f64 = 0.0;
    for _ in 0..10 {
        let (f, g, h) = (gaussian_symbol(&mut rng, grid, 2), gaussian_symbol(&mut rng, grid, 2), gaussian_symbol(&mut rng, grid, 2));
        let left = deformed_product_numeric(&deformed_product_numeric(&f, &g, &j, &cfg)?, &h, &j, &cfg)?;
        let right = deformed_product_numeric(&f, &deformed_product_numeric(&g, &h, &j, &cfg)?, &j, &cfg)?;
        let scale = f.sup_norm() * g.sup_norm() * h.sup_norm();
        numeric_worst = numeric_worst.max(left.sup_distance(&right)? / scale);
    }
    outcome(
        exact_worst <= EXACT_TOL && numeric_worst <= NUMERIC_TOL,
        format!("2·25³ exact triples: {exact_worst:.2e} (tol {EXACT_TOL:e}); 10 Gaussian triples: {numeric_worst:.2e} (tol {NUMERIC_TOL:e})"),
    )
}

fn c04_interplay() -> Result<Outcome> {
    const TOL: f64 = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = 4.0;
    let grid = Grid::new(2, 32, l)?;
    let j = DeformationMatrix::symplectic(0.5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = rand_plane(&mut rng, 2, l, 2, 4, 3);
        let g = rand_plane(&mut rng, 2, l, 2, 4, 3);
        let fg = deformed_product_exact(&f, &g, &j)?;
        let lf = rieffel_operator(&BaseSymbol::Waves(f), &grid, &j)?;
        let lg = rieffel_operator(&BaseSymbol::Waves(g), &grid, &j)?;
        let lfg = rieffel_operator(&BaseSymbol::Waves(fg), &grid, &j)?;
        let x0: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let coeff = Mat::from_fn(2, 1, |_, _| rand_c(&mut rng));
        let h = ModuleVector::from_fn(grid, 2, 1, |x| &coeff * c((-(x[0] - x0[0]).powi(2) - (x[1] - x0[1]).powi(2)).exp(), 0.0));
        let resid = lf.apply(&lg.apply(&h)?)?.sub(&lfg.apply(&h)?).norm_l2();
        let scale = operator_norm(&lf)? * operator_norm(&lg)? * h.norm_l2();
        worst = worst.max(resid / scale);
    }
    outcome(worst <= TOL, format!("20 pairs, max ‖L_f L_g h − L_(f×g) h‖ / (‖L_f‖‖L_g‖‖h‖) = {worst:.2e} (tol {TOL:e})"))
}

fn cv_family(rng: &mut ChaCha8Rng, l: f64, dxi: f64) -> Vec<PhaseSymbol> {
    let mut out = Vec::with_capacity(50);
    for i in 0..50 {
        let k = 1 + i % 2;
        let terms = 1 + i % 3;
        let w = match i {
            // Fourier multipliers φ(ξ).
            0..=14 => rand_phase(rng, k, terms, l, 0, dxi, 6),
            // Multiplications ψ(x).
            15..=29 => rand_phase(rng, k, terms, l, 3, dxi, 0),
            _ => rand_phase(rng, k, terms, l, 3, dxi, 6),
        };
        out.push(PhaseSymbol::Waves(w));
    }
    out
}

fn c05_calderon_vaillancourt() -> Result<Outcome> {
    const STABILITY: f64 = 0.10;
    let l = 8.0;
    let coarse = Grid::new(1, 64, l)?;
    let fine = Grid::new(1, 128, l)?;
    // ξ-frequencies are multiples of the coarse spacing, hence commensurate on both grids.
    let family = cv_family(&mut ChaCha8Rng::seed_from_u64(5), l, coarse.spacing());
    let fit = |grid: &Grid| -> Result<f64> {
        let mut best: f64 = 0.0;
        for a in &family {
            best = best.max(cv_ratio(a, grid)?);
        }
        Ok(best)
    };
    let (c1, c2) = (fit(&coarse)?, fit(&fine)?);
    let drift = (c2 / c1 - 1.0).abs();
    outcome(
        c1.is_finite() && c1 > 0.0 && drift <= STABILITY,
        format!("50 symbols, C_fit = {c1:.4} at N = 64, {c2:.4} at N = 128, drift {drift:.2e} (tol {STABILITY})"),
    )
}

fn c06_derivative_identity() -> Result<Outcome> {
    const TOL: f64 = 1e-3;
    const STEP: f64 = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let l = 8.0;
    let grid = Grid::new(1, 128, l)?;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let sym = PhaseSymbol::Waves(rand_phase(&mut rng, 1 + i % 2, 2, l, 2, grid.spacing(), 2));
        let a = SymbolicOperator::Op { symbol: sym, grid };
        for alpha in [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
            worst = worst.max(generator_route_disagreement(&a, &alpha, STEP)?);
        }
    }
    outcome(worst <= TOL, format!("10 symbols, orders 1 and 2, max relative route gap {worst:.2e} (tol {TOL:e})"))
}

fn c07_d_inverse() -> Result<Outcome> {
    const TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let l = 8.0;
    let grid = Grid::new(1, 64, l)?;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let b = PhaseSymbol::Waves(rand_phase(&mut rng, 1 + i % 2, 3, l, 4, grid.spacing(), 4));
        let back = d_apply(&d_inverse(&b)?);
        worst = worst.max(phase_sup_distance(&back.to_grid(&grid)?, &b.to_grid(&grid)?)?);
    }
    // The same on sampled symbols.
    for i in 0..3 {
        let b = PhaseSymbol::Grid(rand_phase(&mut rng, 1 + i % 2, 3, l, 4, grid.spacing(), 4).sample(&grid)?);
        let back = d_apply(&d_inverse(&b)?);
        worst = worst.max(phase_sup_distance(&back.to_grid(&grid)?, &b.to_grid(&grid)?)?);
    }
    outcome(worst <= TOL, format!("13 symbols with |m| ≤ 4, max sup residual {worst:.2e} (tol {TOL:e})"))
}

fn c08_kernel_identity() -> Result<Outcome> {
    const TOL: f64 = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            worst = worst.max(kernel_identity_residual(-3.0 + 0.75 * i as f64, -3.0 + 0.75 * j as f64));
        }
    }
    outcome(worst <= TOL, format!("5×5 grid on [−3, 0]², max residual {worst:.2e} (tol {TOL:e})"))
}

/// Band-limited symbols with frequency indices `|m| ≤ 2` in both variables.
fn symbol_map_family(grid: &Grid) -> Vec<PhaseSymbol> {
    let (l, d) = (grid.half_width, grid.spacing());
    let one = |k: usize, z: C64| scalar(k, z);
    let mut m2 = Mat::from_fn(2, 2, |i, j| c(0.2 * (i + 1) as f64, 0.1 * j as f64));
    m2[(0, 0)] += c(1.0, 0.0);
    vec![
        PhaseWaves::constant(1, one(1, c(1.5, 0.5))),
        phase_wave(1, 2.0 * PI / l, 0.0, one(1, c(0.5, 0.0))).add(&PhaseWaves::constant(1, one(1, c(1.0, 0.0)))),
        phase_wave(1, 0.0, 2.0 * d, one(1, c(0.0, 0.5))).add(&PhaseWaves::constant(1, one(1, c(1.0, 0.0)))),
        phase_wave(1, PI / l, d, one(1, c(0.5, 0.0))).add(&PhaseWaves::constant(1, one(1, c(1.0, 0.0)))),
        phase_wave(2, -PI / l, -2.0 * d, m2.clone() * c(0.3, 0.0)).add(&PhaseWaves::constant(1, identity(2))),
        phase_wave(1, 2.0 * PI / l, 2.0 * d, one(1, c(1.0, 0.0))),
    ]
    .into_iter()
    .map(PhaseSymbol::Waves)
    .collect()
}

fn c09_symbol_map() -> Result<Outcome> {
    const TOL: f64 = 0.05;
    const BUDGET_S: f64 = 600.0;
    let start = Instant::now();
    let grid = Grid::new(1, 128, 8.0)?;
    let cfg = SymbolMapConfig::default();
    let mut worst: f64 = 0.0;
    let family = symbol_map_family(&grid);
    for a in &family {
        let s = symbol_map_s(&SymbolicOperator::Op { symbol: a.clone(), grid }, &cfg)?;
        let want = a.to_grid(&grid)?;
        worst = worst.max(phase_sup_distance(&s, &want)? / want.sup_norm());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= TOL && secs <= BUDGET_S,
        format!("{} symbols at N = 128, max relative sup error {worst:.2e} (tol {TOL}), {secs:.1} s (budget {BUDGET_S} s)", family.len()),
    )
}

fn c10_inverse_cv() -> Result<Outcome> {
    let grid = Grid::new(1, 128, 8.0)?;
    let mut min_slack = f64::INFINITY;
    for a in symbol_map_family(&grid) {
        let (lhs, rhs) = inverse_cv_bound(&a, &grid)?;
        min_slack = min_slack.min(rhs - lhs);
    }
    outcome(min_slack >= 0.0, format!("6 symbols at N = 128, min slack rhs − lhs = {min_slack:.3e}"))
}

fn c11_differential_norms() -> Result<Outcome> {
    const SLACK: f64 = 1e-6;
    const ORDER: usize = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Nθ/(4L²) = 2 is an integer, so L_f L_g = L_(f×g) holds exactly on the grid.
    let l = 2.0;
    let grid = Grid::new(2, 16, l)?;
    let j = DeformationMatrix::symplectic(2.0);
    let (mut t0_gap, mut leibniz, mut submult): (f64, f64, f64) = (0.0, f64::INFINITY, f64::INFINITY);
    for i in 0..20 {
        let k = 1 + i % 2;
        let f = rand_plane(&mut rng, 2, l, k, 2, 2);
        let g = rand_plane(&mut rng, 2, l, k, 2, 2);
        let fg = deformed_product_exact(&f, &g, &j)?;
        let sym = |s: PlaneWaveSymbol| SymbolicOperator::Rieffel { f: BaseSymbol::Waves(s), grid, j: j.clone() };
        let (a, b, ab) = (sym(f), sym(g), sym(fg));
        let (ra, rb, rab) = (differential_norms(&a, ORDER)?, differential_norms(&b, ORDER)?, differential_norms(&ab, ORDER)?);
        t0_gap = t0_gap.max((rab.t[0] - operator_norm(&ab.operator()?)?).abs());
        for kk in 0..=ORDER {
            let bound: f64 = (0..=kk).map(|i| ra.t[i] * rb.t[kk - i]).sum();
            leibniz = leibniz.min((bound - rab.t[kk]) / bound.max(1.0));
            let sbound = ra.s[kk] * rb.s[kk];
            submult = submult.min((sbound - rab.s[kk]) / sbound.max(1.0));
        }
    }
    outcome(
        t0_gap == 0.0 && leibniz >= -SLACK && submult >= -SLACK,
        format!("20 pairs, m = {ORDER}: |T_0 − ‖A‖| = {t0_gap:e}, min relative Leibniz margin {leibniz:.3e}, min submultiplicativity margin {submult:.3e} (allowed −{SLACK:e})"),
    )
}

fn c12_unitization() -> Result<Outcome> {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut inv_worst, mut spec_worst): (f64, f64) = (0.0, 0.0);
    let mut zero_missing = 0;
    for i in 0..100 {
        let k = 1 + i % 4;
        let a = rand_mat(&mut rng, k);
        let alpha = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
        let x = Unitized::new(a.clone(), alpha);
        let inv = unitized_inverse(&x)?;
        let one = Unitized::one(k);
        inv_worst = inv_worst.max(x.mul(&inv).dist(&one)).max(inv.mul(&x).dist(&one));
        // σ(a) ∪ {0}: 0 is present, every value is an eigenvalue of a or 0,
        // and every eigenvalue of a is present.
        let su = unitized_spectrum(&a);
        if !su.iter().any(|z| z.norm() == 0.0) {
            zero_missing += 1;
        }
        let scale = cstar_norm(&a).max(1.0);
        for z in &su {
            if z.norm() == 0.0 {
                continue;
            }
            let shifted = &a - scalar(k, *z);
            let smin = shifted.singular_values().min();
            spec_worst = spec_worst.max(smin / scale);
        }
        for z in spectrum(&a) {
            let d = su.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            spec_worst = spec_worst.max(d / scale);
        }
        // (a, 0) is not invertible in the unitization.
        if unitized_inverse(&Unitized::new(a, c(0.0, 0.0))).is_ok() {
            zero_missing += 1;
        }
    }
    outcome(
        inv_worst <= TOL && spec_worst <= TOL && zero_missing == 0,
        format!("100 matrices k ≤ 4: inverse defect {inv_worst:.2e}, spectrum defect {spec_worst:.2e} (tol {TOL:e}), missing zeros {zero_missing}"),
    )
}

fn c13_fourier_inversion() -> Result<Outcome> {
    const TOL: f64 = 1e-6;
    let cfg = OscIntegralConfig::default();
    let points = [-1.3, -0.4, 0.0, 0.55, 1.2];
    let cst = PlaneWaveSymbol::constant(1, 4.0, identity(2) * c(0.5, -1.0));
    let wave = PlaneWaveSymbol::single(1, 4.0, vec![3], scalar(1, c(1.0, 0.5)));
    let grid = Grid::new(1, 128, 8.0)?;
    let gauss = GridSymbol::from_fn(grid, 1, |x| scalar(1, c((-x[0] * x[0]).exp(), 0.0)));
    let mut worst: f64 = 0.0;
    for x in points {
        worst = worst.max(fourier_inversion_check(&cst, &[x], &cfg)?);
        worst = worst.max(fourier_inversion_check(&wave, &[x], &cfg)?);
        worst = worst.max(fourier_inversion_check(&gauss, &[x], &cfg)?);
    }
    outcome(worst <= TOL, format!("3 symbols × 5 points, max residual {worst:.2e} (tol {TOL:e})"))
}

fn c14_smoothing() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut moved, mut small_max): (f64, f64) = (0.0, 0.0);
    for eps in [0.1, 1.0, 10.0] {
        for i in 0..30 {
            let k = 1 + i % 4;
            let h = rand_hermitian(&mut rng, k);
            let h = &h * c(1.0 / cstar_norm(&h).max(1e-300), 0.0);
            let y = &h * c(eps * rng.gen_range(0.0..3.0), 0.0);
            moved = moved.max(cstar_norm(&(lemma_uniq_smooth(&y, eps)? - &y)) / eps);
            let small = &h * c(eps * rng.gen_range(0.0..0.33), 0.0);
            small_max = small_max.max(cstar_norm(&lemma_uniq_smooth(&small, eps)?));
        }
    }
    // ‖f(y) − y‖ ≤ 2ε/3 up to rounding; f(y) = 0 exactly below ε/3.
    outcome(
        moved <= 2.0 / 3.0 + 1e-12 && small_max == 0.0,
        format!("ε ∈ {{0.1, 1, 10}}: max ‖f(y) − y‖/ε = {moved:.4} (bound 2/3), max ‖f(y)‖ for ‖y‖ ≤ ε/3 = {small_max:e}"),
    )
}

fn c15_plancherel() -> Result<Outcome> {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let grid = if i % 2 == 0 { Grid::new(1, 64, 5.0)? } else { Grid::new(2, 16, 3.0)? };
        let (k, cols) = (1 + i % 3, 1 + i % 2);
        let u = ModuleVector::random(grid, k, cols, &mut rng, None);
        let v = ModuleVector::random(grid.dual(), k, cols, &mut rng, None);
        let lhs = fourier(&u, false).inner(&v)?;
        let rhs = u.inner(&fourier(&v, true))?;
        let d: DMatrix<C64> = lhs - rhs;
        worst = worst.max(cstar_norm(&d) / (u.norm_l2() * v.norm_l2()));
    }
    outcome(worst <= TOL, format!("50 pairs, max relative |⟨Fu, v⟩ − ⟨u, F⁻¹v⟩| = {worst:.2e} (tol {TOL:e})"))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 15] = [
        ("plane-wave oracle", c01_plane_wave_oracle),
        ("undeformed sup = op norm", c02_undeformed_norms),
        ("associativity", c03_associativity),
        ("interplay L_f L_g = L_(f×g)", c04_interplay),
        ("Calderón–Vaillancourt constant", c05_calderon_vaillancourt),
        ("derivative identity", c06_derivative_identity),
        ("D-inverse roundtrip", c07_d_inverse),
        ("kernel identity", c08_kernel_identity),
        ("symbol map S∘Op", c09_symbol_map),
        ("inverse Calderón–Vaillancourt", c10_inverse_cv),
        ("differential-norm axioms", c11_differential_norms),
        ("unitization identities", c12_unitization),
        ("Fourier inversion", c13_fourier_inversion),
        ("smoothing lemma", c14_smoothing),
        ("Plancherel", c15_plancherel),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("C{:02}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.eq_ignore_ascii_case(f) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{id} {} {name}: {detail} [{:.1} s]", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
