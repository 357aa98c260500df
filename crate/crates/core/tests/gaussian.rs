use nalgebra::DMatrix;
use shortfall_hedge::gaussian::std_pdf;
use shortfall_hedge::quadrature::{integrate, QuadConfig};
use shortfall_hedge::{Error, GaussianLaw};

fn unit(rho: f64) -> GaussianLaw {
    GaussianLaw::bivariate([0.0, 0.0], [[1.0, rho], [rho, 1.0]]).unwrap()
}

#[test]
fn identity_transform_keeps_law() {
    let law = GaussianLaw::bivariate([0.5, -1.0], [[2.0, 0.3], [0.3, 1.5]]).unwrap();
    let out = law.linear_transform(&DMatrix::identity(2, 2)).unwrap();
    assert_eq!(out.mean(), law.mean());
    assert!((out.cov() - law.cov()).abs().max() < 1e-15);
}

#[test]
fn difference_row_has_expanded_variance() {
    let (s1, s2, rho) = (0.2, 0.3, 0.4);
    let out = unit(rho)
        .linear_transform(&DMatrix::from_row_slice(1, 2, &[s1, -s2]))
        .unwrap();
    let want = s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2;
    assert!((out.cov()[(0, 0)] - want).abs() < 1e-15);
    assert_eq!(out.mean()[0], 0.0);
}

#[test]
fn sum_of_independent_normals() {
    let law = GaussianLaw::bivariate([1.0, 2.0], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let out = law
        .linear_transform(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]))
        .unwrap();
    assert_eq!(out.mean()[0], 3.0);
    assert_eq!(out.cov()[(0, 0)], 2.0);
}

#[test]
fn singular_image_is_rejected() {
    let out = unit(0.2).linear_transform(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]));
    assert!(matches!(out, Err(Error::DegenerateLaw(_))), "{out:?}");
}

#[test]
fn conditioning_examples() {
    let rho = 0.6;
    let c = unit(rho).condition(&[1], &[1.5]).unwrap();
    assert!((c.mean()[0] - rho * 1.5).abs() < 1e-15);
    assert!((c.cov()[(0, 0)] - (1.0 - rho * rho)).abs() < 1e-15);

    let c = unit(0.0).condition(&[1], &[-2.0]).unwrap();
    assert_eq!(c.mean()[0], 0.0);
    assert_eq!(c.cov()[(0, 0)], 1.0);

    let law = GaussianLaw::bivariate([0.0, 0.0], [[4.0, 1.0], [1.0, 1.0]]).unwrap();
    let c = law.condition(&[1], &[3.0]).unwrap();
    assert!((c.mean()[0] - 3.0).abs() < 1e-14);
    assert!((c.cov()[(0, 0)] - 3.0).abs() < 1e-14);
}

#[test]
fn conditioning_commutes_with_linear_maps() {
    // condition then scale equals scale then condition on the scaled value
    let law = GaussianLaw::bivariate([0.3, -0.2], [[1.3, -0.4], [-0.4, 0.8]]).unwrap();
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
    let y = 0.7;
    let direct = law.condition(&[1], &[y]).unwrap();
    let scaled = law
        .linear_transform(&a)
        .unwrap()
        .condition(&[1], &[0.5 * y])
        .unwrap();
    assert!((scaled.mean()[0] - 2.0 * direct.mean()[0]).abs() < 1e-10);
    assert!((scaled.cov()[(0, 0)] - 4.0 * direct.cov()[(0, 0)]).abs() < 1e-10);
}

#[test]
fn density_examples() {
    let one = GaussianLaw::standard(1);
    assert!((one.pdf(&[0.0]).unwrap() - 0.398_942_280_4).abs() < 1e-10);
    let two = GaussianLaw::standard(2);
    let tau = 2.0 * std::f64::consts::PI;
    assert!((two.pdf(&[0.0, 0.0]).unwrap() - 1.0 / tau).abs() < 1e-15);
    let corr = unit(0.5);
    assert!((corr.pdf(&[0.0, 0.0]).unwrap() - 1.0 / (tau * 0.75_f64.sqrt())).abs() < 1e-15);
}

#[test]
fn bivariate_density_integrates_to_one() {
    let law = GaussianLaw::bivariate([0.5, -0.3], [[1.2, 0.5], [0.5, 0.9]]).unwrap();
    let cfg = QuadConfig::default();
    let outer = integrate(
        |x| integrate(|y| law.pdf(&[x, y]).unwrap(), -12.0, 12.0, &cfg).value,
        -12.0,
        12.0,
        &cfg,
    );
    assert!((outer.value - 1.0).abs() < 1e-8, "{}", outer.value);
}

#[test]
fn rect_examples() {
    assert!((unit(0.0).rect_upper_prob([0.0, 0.0]).unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(
        unit(0.4).rect_upper_prob([f64::NEG_INFINITY; 2]).unwrap(),
        1.0
    );
}

#[test]
fn rect_orthant_matches_arcsine_formula() {
    for rho in [-0.9_f64, -0.3, 0.0, 0.5, 0.95] {
        let want = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        let got = unit(rho).rect_upper_prob([0.0, 0.0]).unwrap();
        assert!((got - want).abs() < 1e-10, "rho {rho}: {got} vs {want}");
    }
}

#[test]
fn rect_matches_monte_carlo() {
    let law = unit(0.7);
    let exact = law.rect_upper_prob([0.0, 0.0]).unwrap();
    let n = 10_000_000;
    let draws = law.sample(n, 17);
    let hits = (0..n)
        .filter(|&i| draws[(i, 0)] >= 0.0 && draws[(i, 1)] >= 0.0)
        .count();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((p - exact).abs() <= 3.0 * se, "{p} vs {exact} (se {se})");
}

#[test]
fn rect_with_one_infinite_bound_is_marginal_tail() {
    let law = GaussianLaw::bivariate([1.0, 0.0], [[4.0, 0.5], [0.5, 1.0]]).unwrap();
    let got = law.rect_upper_prob([f64::NEG_INFINITY, 1.0]).unwrap();
    let tail = integrate(std_pdf, 1.0, 40.0, &QuadConfig::default()).value;
    assert!((got - tail).abs() < 1e-12);
}

#[test]
fn sampling_is_deterministic() {
    let law = unit(0.3);
    assert_eq!(law.sample(20_000, 5), law.sample(20_000, 5));
    assert_ne!(law.sample(100, 5), law.sample(100, 6));
}

#[test]
fn sample_moments() {
    let n = 1_000_000;
    let one = GaussianLaw::standard(1).sample(n, 11);
    let mean = one.column(0).sum() / n as f64;
    assert!(mean.abs() < 0.004, "{mean}");

    let draws = unit(0.5).sample(n, 12);
    let (x, y) = (draws.column(0), draws.column(1));
    let (mx, my) = (x.sum() / n as f64, y.sum() / n as f64);
    let cov = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>();
    let vx = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    let vy = y.iter().map(|b| (b - my).powi(2)).sum::<f64>();
    let corr = cov / (vx * vy).sqrt();
    assert!((corr - 0.5).abs() < 0.003, "{corr}");
}
