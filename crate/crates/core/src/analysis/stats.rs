//! Student's t distribution and Welch's unequal-variance t-test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Two-sided tail `P(|T| ≥ |t|)` of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
}

/// CDF of Student's t distribution.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n − 1) sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Both samples had zero variance but different means.
    pub degenerate: bool,
}

/// Welch's two-sample t-test (two-sided).
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Argument(format!(
            "welch_t_test needs at least two values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Argument("welch_t_test samples must be finite".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        let df = na + nb - 2.0;
        return Ok(if ma == mb {
            WelchResult { t: 0.0, df, p: 1.0, degenerate: false }
        } else {
            WelchResult { t: (ma - mb).signum() * f64::INFINITY, df, p: 0.0, degenerate: true }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(WelchResult { t, df, p: student_t_two_sided(t, df), degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cdf_closed_forms() {
        assert_eq!(student_t_cdf(0.0, 3.7), 0.5);
        // df = 1 is Cauchy: ½ + atan(t)/π
        for t in [-20.0, -3.0, -1.0, -0.2, 0.5, 1.0, 2.5, 40.0] {
            let cauchy = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_cdf(t, 1.0) - cauchy).abs() < 1e-10, "t = {t}");
        }
        // df = 2: ½ + t / (2√(t² + 2))
        for t in [-4.0, -0.3, 0.9, 7.0] {
            let exact = 0.5 + t / (2.0 * (t * t + 2.0f64).sqrt());
            assert!((student_t_cdf(t, 2.0) - exact).abs() < 1e-12);
        }
        // table value t_{0.975, 30} = 2.042
        assert!((student_t_cdf(2.042, 30.0) - 0.975).abs() < 5e-4);
    }

    #[test]
    fn cdf_agrees_with_statrs() {
        for df in [1.0, 2.5, 4.0, 8.0, 19.3, 38.0, 120.0] {
            let reference = StudentsT::new(0.0, 1.0, df).unwrap();
            for t in [-6.0, -2.0, -0.7, 0.1, 1.3, 3.3, 9.0] {
                assert!((student_t_cdf(t, df) - reference.cdf(t)).abs() < 1e-10, "t {t} df {df}");
            }
        }
    }

    #[test]
    fn welch_worked_example() {
        let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.t, -1.0);
        assert_eq!(r.df, 8.0);
        assert!((r.p - 0.346_593_507_087_5).abs() < 1e-9);
    }

    #[test]
    fn welch_edge_cases() {
        let same = welch_t_test(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!((same.t, same.p), (0.0, 1.0));
        let flat = welch_t_test(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((flat.t, flat.p, flat.degenerate), (0.0, 1.0, false));
        let apart = welch_t_test(&[2.0, 2.0], &[3.0, 3.0]).unwrap();
        assert_eq!(apart.p, 0.0);
        assert!(apart.degenerate);
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        // equal variances, equal n: df = 2(n − 1)
        let r = welch_t_test(&[1.0, 3.0, 5.0, 7.0], &[10.0, 12.0, 14.0, 16.0]).unwrap();
        assert!((r.df - 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cdf_symmetry_and_monotonicity(t in -50.0f64..50.0, dt in 0.0f64..5.0, df in 0.5f64..200.0) {
            prop_assert!((student_t_cdf(t, df) + student_t_cdf(-t, df) - 1.0).abs() < 1e-10);
            prop_assert!(student_t_cdf(t + dt, df) >= student_t_cdf(t, df));
        }

        #[test]
        fn welch_is_antisymmetric(a in proptest::collection::vec(-10.0f64..10.0, 2..12),
                                  b in proptest::collection::vec(-10.0f64..10.0, 2..12)) {
            let ab = welch_t_test(&a, &b).unwrap();
            let ba = welch_t_test(&b, &a).unwrap();
            prop_assert_eq!(ab.t, -ba.t);
            prop_assert!((ab.p - ba.p).abs() < 1e-14);
            prop_assert!((0.0..=1.0).contains(&ab.p));
            prop_assert!(ab.df > 0.0);
        }
    }
}
