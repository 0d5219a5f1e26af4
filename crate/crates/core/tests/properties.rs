//! Invariants over random inputs.

use proptest::prelude::*;

use polyprec::diagnostics::{complementary_sigma, sympoly_dense};
use polyprec::krylov::{build_gram, krylov_step, model_value, solve_gram};
use polyprec::operators::random::{gaussian_vector, random_spd_with_spectrum, rng_from_seed};
use polyprec::operators::vector::dot;
use polyprec::operators::{apply_polynomial, elementary_symmetric, Cholesky};
use polyprec::preconditioners::{quality_on_spectrum, xi_tau, CuttingPolynomial};
use polyprec::problems::{huber, logistic, make_quadratic};
use polyprec::solvers::solve_coefficient_equation;
use polyprec::{DenseMatrix, PolynomialCoefficients, Preconditioner, SymmetricOperator, TraceMode};

fn spectrum(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..3.0, 2..=max_n).prop_map(|v| v.into_iter().map(|e| 10f64.powf(e)).collect())
}

/// First-order error bound for the trace-based coefficients evaluated at `l`.
///
/// The recursion is rerun on absolute values (power sums with `+ s^i`), which majorizes
/// every intermediate; the computed polynomial is then within `N eps` of that majorant,
/// with `N` the operation depth including the trace sums. Power sums of a wide spectrum
/// cancel heavily, so this is far larger than `eps |p(l)|`.
fn recursion_bound(s: &[f64], tau: usize, l: f64) -> f64 {
    let traces: Vec<f64> = (1..=tau).map(|i| s.iter().map(|x| x.powi(i as i32)).sum()).collect();
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 1..=tau {
        let mut acc = vec![0.0; k + 1];
        for i in 1..=k {
            for (j, c) in p[k - i].iter().enumerate() {
                acc[j] += c * traces[i - 1];
                acc[j + i] += c;
            }
        }
        p.push(acc.into_iter().map(|a| a / k as f64).collect());
    }
    let depth = ((tau + 1) * (tau + s.len() + 2)) as f64;
    let mag: f64 = p[tau].iter().rev().fold(0.0, |acc, c| acc * l + c);
    depth * f64::EPSILON * mag
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elementary_symmetric_is_order_free(s in spectrum(9)) {
        let mut rev = s.clone();
        rev.reverse();
        let k = s.len();
        let (a, b) = (elementary_symmetric(&s, k).unwrap(), elementary_symmetric(&rev, k).unwrap());
        for j in 0..=k {
            prop_assert!(rel(a.value(j), b.value(j)) <= 1e-12);
        }
        prop_assert!(rel(a.value(k), s.iter().product()) <= 1e-12);
        prop_assert!(rel(a.value(1), s.iter().sum()) <= 1e-12);
    }

    #[test]
    fn polynomial_horner_matches_powers(s in spectrum(6), c in prop::collection::vec(-2.0f64..2.0, 1..5), seed in 0u64..1000) {
        let mut rng = rng_from_seed(seed);
        let n = s.len();
        let b = random_spd_with_spectrum(&mut rng, &s);
        let op = SymmetricOperator::dense(b.clone()).unwrap();
        let v = gaussian_vector(&mut rng, n);
        let p = PolynomialCoefficients::new(c.clone());
        let got = apply_polynomial(&p, &op, &v).unwrap();
        let mut want = vec![0.0; n];
        let mut power = v.clone();
        for ck in &c {
            for i in 0..n {
                want[i] += ck * power[i];
            }
            power = b.mul_vec(&power);
        }
        let scale = want.iter().chain(&got).map(|x| x.abs()).fold(1.0, f64::max);
        for i in 0..n {
            prop_assert!((got[i] - want[i]).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn sympoly_is_symmetric_with_complementary_eigenvalues(s in spectrum(7), seed in 0u64..1000) {
        let mut rng = rng_from_seed(seed);
        let n = s.len();
        let b = random_spd_with_spectrum(&mut rng, &s);
        for tau in 0..n {
            let p = sympoly_dense(&b, tau).unwrap();
            let prec = Preconditioner::sympoly(&SymmetricOperator::dense(b.clone()).unwrap(), tau, TraceMode::Exact).unwrap();
            let lmax = s.iter().copied().fold(0.0, f64::max);
            // matrix Horner adds an n-term inner product per step
            prop_assert!(p.max_asymmetry() <= n as f64 * recursion_bound(&s, tau, lmax) + 1e-12 * p.max_abs());
            let sigma = complementary_sigma(&s, tau).unwrap();
            let top = sigma.iter().copied().fold(0.0, f64::max);
            for (l, want) in s.iter().zip(&sigma) {
                prop_assert!((prec.eval(*l) * prec.scale() - want).abs() <= recursion_bound(&s, tau, *l) + 1e-12 * top);
            }
        }
    }

    #[test]
    fn xi_is_monotone_bounded_and_scale_free(s in spectrum(9), c in 0.01f64..100.0) {
        let n = s.len();
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min) / s.iter().copied().fold(0.0, f64::max);
        let mut prev = 1.0;
        let scaled: Vec<f64> = s.iter().map(|x| c * x).collect();
        for tau in 0..n {
            let xi = xi_tau(&s, tau).unwrap();
            prop_assert!(xi <= prev * (1.0 + 1e-12));
            prop_assert!(xi >= lo * (1.0 - 1e-12) && xi <= 1.0 + 1e-12);
            prop_assert!(rel(xi, xi_tau(&scaled, tau).unwrap()) <= 1e-12);
            prev = xi;
        }
        prop_assert!(rel(xi_tau(&s, n - 1).unwrap(), lo) <= 1e-12);
    }

    #[test]
    fn sympoly_quality_matches_xi(s in spectrum(8)) {
        let n = s.len();
        let op = SymmetricOperator::diagonal(&s);
        let base = s.iter().copied().fold(0.0, f64::max) / s.iter().copied().fold(f64::INFINITY, f64::min);
        for tau in 0..n {
            let sigma = complementary_sigma(&s, tau).unwrap();
            // relative errors at the two extremes of lambda p(lambda) add up in the ratio
            let worst = s.iter().zip(&sigma).map(|(l, sg)| recursion_bound(&s, tau, *l) / sg).fold(0.0, f64::max);
            if worst > 0.1 {
                // coefficients carry no reliable digits here; definiteness is not even guaranteed
                continue;
            }
            let prec = Preconditioner::sympoly(&op, tau, TraceMode::Exact).unwrap();
            let q = quality_on_spectrum(&prec, &s).unwrap();
            prop_assert!(rel(q.cond, xi_tau(&s, tau).unwrap() * base) <= 2.0 * worst + 1e-12);
        }
    }

    #[test]
    fn cutting_polynomial_interpolates_the_top(s in spectrum(8)) {
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for tau in 0..sorted.len() {
            let p = CuttingPolynomial::for_spectrum(&sorted, tau).unwrap();
            for l in &sorted[..tau] {
                prop_assert!((l * p.eval(*l) - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_solves(s in spectrum(8), seed in 0u64..1000) {
        let mut rng = rng_from_seed(seed);
        let b = random_spd_with_spectrum(&mut rng, &s);
        let x = gaussian_vector(&mut rng, s.len());
        let rhs = b.mul_vec(&x);
        let ch = Cholesky::new(&b).unwrap();
        let got = ch.solve(&rhs);
        let cond = s.iter().copied().fold(0.0, f64::max) / s.iter().copied().fold(f64::INFINITY, f64::min);
        let err = got.iter().zip(&x).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-13 * cond * x.iter().map(|v| v.abs()).fold(1.0, f64::max));
        prop_assert!(rel(ch.det(), s.iter().product()) <= 1e-10);
        let inv = ch.inverse();
        let id = b.matmul(&inv).unwrap().sub(&DenseMatrix::identity(s.len())).unwrap();
        prop_assert!(id.max_abs() <= 1e-12 * cond);
    }

    #[test]
    fn coefficient_equation_holds(m in 0.01f64..100.0, frac in 0.0f64..0.99, a in 0.0f64..1e3) {
        let rho = frac * m;
        let x = solve_coefficient_equation(m, rho, a).unwrap();
        let a_plus = a + x;
        prop_assert!(x > 0.0);
        prop_assert!(rel(m * x * x / a_plus, 1.0 + rho * a_plus) <= 1e-12);
    }

    #[test]
    fn krylov_step_beats_gradient_step(s in spectrum(10), seed in 0u64..1000, tau in 0usize..4) {
        let mut rng = rng_from_seed(seed);
        let n = s.len();
        let tau = tau.min(n - 1);
        let b = random_spd_with_spectrum(&mut rng, &s);
        let obj = make_quadratic(SymmetricOperator::dense(b.clone()).unwrap(), gaussian_vector(&mut rng, n)).unwrap();
        let x = gaussian_vector(&mut rng, n);
        let sys = build_gram(&obj, &x, tau).unwrap();
        let info = solve_gram(&sys);
        let xk = krylov_step(&x, &info, &sys);
        let h: Vec<f64> = xk.iter().zip(&x).map(|(a, c)| a - c).collect();
        let g = sys.gradient().to_vec();
        let krylov = model_value(&obj, &g, &h).unwrap();
        let l1 = s.iter().copied().fold(0.0, f64::max);
        let gm: Vec<f64> = g.iter().map(|v| -v / l1).collect();
        let gm_model = model_value(&obj, &g, &gm).unwrap();
        prop_assert!(krylov <= gm_model + 1e-10 * gm_model.abs().max(1e-12));
        prop_assert!(obj.value(&xk) <= obj.value(&x) + 1e-12 * obj.value(&x).abs().max(1.0));
        prop_assert!(dot(&g, &h) <= 0.0);
    }

    #[test]
    fn loss_derivatives_match_differences(t in -30.0f64..30.0, mu in 0.01f64..2.0) {
        let step = 1e-6;
        let (hp, hm) = (huber(t + step, mu).0, huber(t - step, mu).0);
        prop_assert!(((hp - hm) / (2.0 * step) - huber(t, mu).1).abs() <= 1e-5);
        let (lp, lm) = (logistic(t + step).0, logistic(t - step).0);
        prop_assert!(((lp - lm) / (2.0 * step) - logistic(t).1).abs() <= 1e-5);
        let d = logistic(t).1;
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
