//! Linear difference equations with constant coefficients.

use crate::error::{Error, Result};

/// Forcing term `b_j`, indexed from `j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    /// `values[j - 1] = b_j`.
    Sequence(Vec<f64>),
    Constant(f64),
    /// `b_j = b * j^gamma`.
    Power { b: f64, gamma: f64 },
}

impl Forcing {
    pub fn at(&self, j: usize) -> Result<f64> {
        match self {
            Forcing::Sequence(v) => v
                .get(j - 1)
                .copied()
                .ok_or_else(|| Error::InvalidParams(format!("forcing sequence has no term {j}"))),
            Forcing::Constant(b) => Ok(*b),
            Forcing::Power { b, gamma } => Ok(b * (j as f64).powf(*gamma)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lde1Solution {
    /// `values[j - 1] = x_j` for `j = 1..=n`.
    pub values: Vec<f64>,
    /// Two-term asymptotic expansion of `x_n`, when requested.
    pub asymptote: Option<f64>,
    /// Closed form `b/(1-a) + a^(n-1) (x_1 - b/(1-a))` for constant forcing.
    pub closed_form: Option<f64>,
}

/// Iterate `x_{j+1} = a x_j + b_j` from `x_1` up to `x_n`.
///
/// The asymptote, for `|a| < 1` and `b_j = b j^gamma` with `gamma > -1`, is
/// `b_{n-1}/(1-a) - gamma a b_{n-1} / (n (1-a)^2)`.
pub fn solve_lde1(a: f64, forcing: &Forcing, x1: f64, n: usize, with_asymptote: bool) -> Result<Lde1Solution> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(n);
    values.push(x1);
    for j in 1..n {
        let next = a * values[j - 1] + forcing.at(j)?;
        values.push(next);
    }
    let asymptote = if with_asymptote {
        if a.abs() >= 1.0 {
            return Err(Error::Domain(format!("asymptote needs |a| < 1, got a = {a}")));
        }
        let (b, gamma) = match *forcing {
            Forcing::Constant(b) => (b, 0.0),
            Forcing::Power { b, gamma } => (b, gamma),
            Forcing::Sequence(_) => {
                return Err(Error::Domain("asymptote needs power-law forcing b j^gamma".into()));
            }
        };
        if gamma <= -1.0 {
            return Err(Error::Domain(format!("asymptote needs gamma > -1, got {gamma}")));
        }
        let bn = b * ((n.max(2) - 1) as f64).powf(gamma);
        Some(bn / (1.0 - a) - gamma * a * bn / (n as f64 * (1.0 - a).powi(2)))
    } else {
        None
    };
    let closed_form = match *forcing {
        Forcing::Constant(b) if a != 1.0 => {
            let fixed = b / (1.0 - a);
            Some(fixed + a.powi(n as i32 - 1) * (x1 - fixed))
        }
        _ => None,
    };
    Ok(Lde1Solution { values, asymptote, closed_form })
}

/// Roots of `lambda^2 = a lambda + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Roots {
    Real(f64, f64),
    Complex { re: f64, im: f64 },
}

impl Roots {
    pub fn max_modulus(&self) -> f64 {
        match *self {
            Roots::Real(l1, l2) => l1.abs().max(l2.abs()),
            Roots::Complex { re, im } => re.hypot(im),
        }
    }
}

/// `x_n = y + homogeneous part` for constant forcing `d` with `a + b != 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lde2Closed {
    /// `y + c1 l1^n + c2 l2^n`.
    Real { y: f64, c1: f64, c2: f64, l1: f64, l2: f64 },
    /// `y + rho^n (c cos(n theta) + s sin(n theta))`.
    Complex { y: f64, rho: f64, theta: f64, c: f64, s: f64 },
}

impl Lde2Closed {
    pub fn eval(&self, n: usize) -> f64 {
        let k = n as i32;
        match *self {
            Lde2Closed::Real { y, c1, c2, l1, l2 } => y + c1 * l1.powi(k) + c2 * l2.powi(k),
            Lde2Closed::Complex { y, rho, theta, c, s } => {
                let t = n as f64 * theta;
                y + rho.powi(k) * (c * t.cos() + s * t.sin())
            }
        }
    }

    pub fn particular(&self) -> f64 {
        match *self {
            Lde2Closed::Real { y, .. } | Lde2Closed::Complex { y, .. } => y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lde2Solution {
    pub values: Vec<f64>,
    pub roots: Option<Roots>,
    pub closed_form: Option<Lde2Closed>,
}

/// Iterate `x_{j+1} = a x_j + b x_{j-1} + d_j` for `j >= 2` from `x_1, x_2`.
///
/// With `root_form` the characteristic roots are returned (an error when
/// `a^2 + 4b = 0`), and for constant forcing with `a + b != 1` also the
/// closed form, recombined to real form when the roots are complex.
pub fn solve_lde2(
    a: f64,
    b: f64,
    forcing: &Forcing,
    x1: f64,
    x2: f64,
    n: usize,
    root_form: bool,
) -> Result<Lde2Solution> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let mut values = vec![x1];
    if n >= 2 {
        values.push(x2);
    }
    for j in 2..n {
        let next = a * values[j - 1] + b * values[j - 2] + forcing.at(j)?;
        values.push(next);
    }
    if !root_form {
        return Ok(Lde2Solution { values, roots: None, closed_form: None });
    }
    let disc = a * a + 4.0 * b;
    if disc == 0.0 {
        return Err(Error::Domain("root form needs a^2 + 4b != 0 (double root)".into()));
    }
    let roots = if disc > 0.0 {
        let r = disc.sqrt();
        Roots::Real((a + r) / 2.0, (a - r) / 2.0)
    } else {
        Roots::Complex { re: a / 2.0, im: (-disc).sqrt() / 2.0 }
    };
    let closed_form = match *forcing {
        Forcing::Constant(d) if a + b != 1.0 && b != 0.0 => {
            let y = d / (1.0 - a - b);
            let (h1, h2) = (x1 - y, x2 - y);
            Some(match roots {
                Roots::Real(l1, l2) => {
                    // c1 l1 + c2 l2 = h1, c1 l1^2 + c2 l2^2 = h2
                    let det = l1 * l2 * (l2 - l1);
                    let c1 = (h1 * l2 * l2 - h2 * l2) / det;
                    let c2 = (h2 * l1 - h1 * l1 * l1) / det;
                    Lde2Closed::Real { y, c1, c2, l1, l2 }
                }
                Roots::Complex { re, im } => {
                    let rho = re.hypot(im);
                    let theta = im.atan2(re);
                    // rho (c cos t + s sin t) = h1, rho^2 (c cos 2t + s sin 2t) = h2
                    let (u1, u2) = (h1 / rho, h2 / (rho * rho));
                    let (c1, s1, c2, s2) = (theta.cos(), theta.sin(), (2.0 * theta).cos(), (2.0 * theta).sin());
                    let det = c1 * s2 - s1 * c2;
                    let c = (u1 * s2 - s1 * u2) / det;
                    let s = (c1 * u2 - u1 * c2) / det;
                    Lde2Closed::Complex { y, rho, theta, c, s }
                }
            })
        }
        _ => None,
    };
    Ok(Lde2Solution { values, roots: Some(roots), closed_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_order_constant_forcing() {
        let s = solve_lde1(0.5, &Forcing::Constant(1.0), 0.0, 60, true).unwrap();
        assert!((s.values[59] - 2.0).abs() < 1e-12);
        assert!((s.asymptote.unwrap() - 2.0).abs() < 1e-15);
        assert!((s.closed_form.unwrap() - s.values[59]).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficient_copies_forcing() {
        let b = vec![3.0, -1.0, 4.0, 1.5];
        let s = solve_lde1(0.0, &Forcing::Sequence(b.clone()), 7.0, 5, false).unwrap();
        assert_eq!(s.values, vec![7.0, 3.0, -1.0, 4.0, 1.5]);
    }

    #[test]
    fn asymptote_guards() {
        assert!(solve_lde1(1.0, &Forcing::Constant(1.0), 0.0, 5, true).is_err());
        assert!(solve_lde1(0.5, &Forcing::Power { b: 1.0, gamma: -1.0 }, 0.0, 5, true).is_err());
        assert!(solve_lde1(0.5, &Forcing::Sequence(vec![1.0; 4]), 0.0, 5, true).is_err());
    }

    #[test]
    fn power_forcing_asymptote() {
        let f = Forcing::Power { b: 2.0, gamma: 0.5 };
        let n = 100_000;
        let s = solve_lde1(0.3, &f, 1.0, n, true).unwrap();
        let rel = (s.values[n - 1] - s.asymptote.unwrap()).abs() / s.values[n - 1];
        assert!(rel < 1e-8, "{rel}");
    }

    #[test]
    fn mean_recursion_roots() {
        let a = 0.25;
        let s = solve_lde2(a, a, &Forcing::Constant(0.0), 1.0, 0.5, 10, true).unwrap();
        match s.roots.unwrap() {
            Roots::Real(l1, l2) => {
                assert!((l1 - 0.640388).abs() < 1e-6);
                assert!((l2 + 0.390388).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        assert!(s.roots.unwrap().max_modulus() < 1.0);
    }

    #[test]
    fn constant_forcing_particular_solution() {
        let s = solve_lde2(0.2, 0.3, &Forcing::Constant(1.0), 0.0, 0.0, 200, true).unwrap();
        let y = 1.0 / (1.0 - 0.5);
        assert_eq!(s.closed_form.unwrap().particular(), y);
        assert!((s.values[199] - y).abs() < 1e-12);
    }

    #[test]
    fn zero_data_gives_zero() {
        let s = solve_lde2(0.7, -0.2, &Forcing::Constant(0.0), 0.0, 0.0, 50, false).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn double_root_is_refused_in_root_form() {
        assert!(solve_lde2(2.0, -1.0, &Forcing::Constant(0.0), 1.0, 1.0, 5, true).is_err());
        assert!(solve_lde2(2.0, -1.0, &Forcing::Constant(0.0), 1.0, 1.0, 5, false).is_ok());
    }

    proptest! {
        #[test]
        fn first_order_satisfies_recurrence(
            a in -1.5f64..1.5,
            b in proptest::collection::vec(-3.0f64..3.0, 1..40),
            x1 in -5.0f64..5.0,
        ) {
            let n = b.len() + 1;
            let s = solve_lde1(a, &Forcing::Sequence(b.clone()), x1, n, false).unwrap();
            for j in 1..n {
                let want = a * s.values[j - 1] + b[j - 1];
                prop_assert!((s.values[j] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }

        #[test]
        fn closed_form_matches_iteration(
            a in -0.9f64..0.9,
            b in -0.9f64..0.9,
            d in -2.0f64..2.0,
            x1 in -2.0f64..2.0,
            x2 in -2.0f64..2.0,
        ) {
            prop_assume!((a * a + 4.0 * b).abs() > 1e-3 && b.abs() > 1e-3 && (1.0 - a - b).abs() > 1e-3);
            let s = solve_lde2(a, b, &Forcing::Constant(d), x1, x2, 30, true).unwrap();
            let cf = s.closed_form.unwrap();
            for (j, &v) in s.values.iter().enumerate() {
                let scale = v.abs().max(1.0) * (1.0 + 1.0 / (a * a + 4.0 * b).abs());
                prop_assert!((cf.eval(j + 1) - v).abs() <= 1e-9 * scale, "j={} {} vs {}", j + 1, cf.eval(j + 1), v);
            }
        }
    }
}
