//! Named targets with exact derivatives of every order.

use std::f64::consts::PI;

use super::target::TargetFunction;
use crate::error::{invalid, Result};
use crate::primitives::MultiIndex;

pub const PRESET_NAMES: [&str; 5] = ["constant", "linear", "monomial", "sinpi", "gauss-bump"];

pub const CONSTANT_VALUE: f64 = 0.7;
pub const BUMP_CENTER: f64 = 0.5;
pub const BUMP_WIDTH: f64 = 0.25;

/// Look up a preset by name for dimension `d` and smoothness `s`.
pub fn preset(name: &str, d: usize, s: u32) -> Result<TargetFunction> {
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    match name {
        "constant" => constant(d, s),
        "linear" => linear(d, s),
        "monomial" => monomial(d, s),
        "sinpi" => sinpi(d, s),
        "gauss-bump" => gauss_bump(d, s),
        other => Err(invalid(
            "target",
            format!("unknown preset `{other}`, expected one of {}", PRESET_NAMES.join(", ")),
        )),
    }
}

/// `f ≡ 0.7`.
pub fn constant(d: usize, s: u32) -> Result<TargetFunction> {
    Ok(TargetFunction::new("constant", d, s, CONSTANT_VALUE, |_: &[f64]| CONSTANT_VALUE)?
        .with_deriv(|a: &MultiIndex, _: &[f64]| Some(if a.order() == 0 { CONSTANT_VALUE } else { 0.0 }))
        .with_modulus(|_| 0.0))
}

/// `f(x) = (x₁ + ⋯ + x_d)/d`; for `d = 1` this is `f(x) = x`.
pub fn linear(d: usize, s: u32) -> Result<TargetFunction> {
    let df = d as f64;
    Ok(TargetFunction::new("linear", d, s, 1.0, move |x: &[f64]| x.iter().sum::<f64>() / df)?
        .with_deriv(move |a: &MultiIndex, x: &[f64]| {
            Some(match a.order() {
                0 => x.iter().sum::<f64>() / df,
                1 => 1.0 / df,
                _ => 0.0,
            })
        })
        .with_modulus(move |r| (r / df.sqrt()).min(1.0)))
}

/// `f(x) = x₁ x₂ ⋯ x_d`.
pub fn monomial(d: usize, s: u32) -> Result<TargetFunction> {
    let df = d as f64;
    Ok(TargetFunction::new("monomial", d, s, 1.0, |x: &[f64]| x.iter().product())?
        .with_deriv(|a: &MultiIndex, x: &[f64]| {
            let mut p = 1.0;
            for (&k, &v) in a.entries().iter().zip(x) {
                p *= match k {
                    0 => v,
                    1 => 1.0,
                    _ => 0.0,
                };
            }
            Some(p)
        })
        .with_modulus(move |r| (df.sqrt() * r).min(1.0)))
}

/// Product of one-dimensional factors `g`, with the derivative oracle and
/// norm assembled from per-order data of `g`.
fn separable(
    name: &str,
    d: usize,
    s: u32,
    g: impl Fn(u32, f64) -> f64 + Send + Sync + Clone + 'static,
    sup: &[f64],
    modulus: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Result<TargetFunction> {
    // largest Π_j sup|g^{(α_j)}| over ‖α‖₁ ≤ s
    let csnorm = MultiIndex::all_up_to(d, s)
        .iter()
        .map(|a| a.entries().iter().map(|&k| sup[k as usize]).product::<f64>())
        .fold(0.0, f64::max);
    let ge = g.clone();
    Ok(
        TargetFunction::new(name, d, s, csnorm, move |x: &[f64]| x.iter().map(|&t| ge(0, t)).product())?
            .with_deriv(move |a: &MultiIndex, x: &[f64]| {
                Some(a.entries().iter().zip(x).map(|(&k, &t)| g(k, t)).product())
            })
            .with_modulus(modulus),
    )
}

fn sin_factor(n: u32, t: f64) -> f64 {
    // g = sin(πt)/π, g^{(n)} = π^{n−1} sin(πt + nπ/2)
    PI.powi(n as i32 - 1) * (PI * t + f64::from(n) * PI / 2.0).sin()
}

/// `f(x) = Π_j sin(πx_j)/π`.
pub fn sinpi(d: usize, s: u32) -> Result<TargetFunction> {
    let sup: Vec<f64> = (0..=s).map(|n| if n == 0 { 1.0 / PI } else { PI.powi(n as i32 - 1) }).collect();
    let df = d as f64;
    // |∂_j f| ≤ π^{−(d−1)}, so f is √d π^{1−d} Lipschitz; in 1D the modulus is exact
    let lip = df.sqrt() * PI.powi(1 - d as i32);
    let cap = 2.0 * PI.powi(-(d as i32));
    separable("sinpi", d, s, sin_factor, &sup, move |r| {
        if d == 1 {
            2.0 * (PI * r.min(1.0) / 2.0).sin() / PI
        } else {
            (lip * r).min(cap)
        }
    })
}

/// `He_n(u)` by the three-term recurrence.
fn hermite(n: u32, u: f64) -> f64 {
    let (mut a, mut b) = (1.0, u);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = u * b - f64::from(k) * a;
        a = b;
        b = c;
    }
    b
}

fn bump_factor(n: u32, t: f64) -> f64 {
    let u = (t - BUMP_CENTER) / BUMP_WIDTH;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * BUMP_WIDTH.powi(-(n as i32)) * hermite(n, u) * (-0.5 * u * u).exp()
}

/// `f(x) = Π_j exp(−(x_j − 0.5)²/(2·0.25²))`.
pub fn gauss_bump(d: usize, s: u32) -> Result<TargetFunction> {
    // sup over [0,1] by a dense scan, nudged up to stay an upper bound
    let scan = |n: u32| -> f64 {
        (0..=200_000)
            .map(|i| bump_factor(n, i as f64 / 200_000.0).abs())
            .fold(0.0, f64::max)
            * (1.0 + 1e-6)
    };
    let sup: Vec<f64> = (0..=s.max(1)).map(scan).collect();
    let lip = (d as f64).sqrt() * sup[1];
    separable("gauss-bump", d, s, bump_factor, &sup[..=s as usize], move |r| (lip * r).min(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(t: &TargetFunction, alpha: &[u32], x: &[f64]) -> f64 {
        let plain = TargetFunction::new("fd", t.dim(), t.smoothness(), 1.0, {
            let t = t.clone();
            move |x: &[f64]| t.eval(x)
        })
        .unwrap()
        .with_finite_differences();
        plain.deriv(&MultiIndex::new(alpha.to_vec()).unwrap(), x).unwrap()
    }

    #[test]
    fn derivatives_agree_with_differences() {
        let x2 = [0.31, 0.62];
        for name in PRESET_NAMES {
            let t = preset(name, 2, 2).unwrap();
            for a in MultiIndex::all_up_to(2, 2) {
                let exact = t.deriv(&a, &x2).unwrap();
                let approx = fd(&t, a.entries(), &x2);
                assert!((exact - approx).abs() <= 1e-5 * (1.0 + exact.abs()), "{name} {:?}", a.entries());
            }
        }
    }

    #[test]
    fn higher_orders_in_one_dimension() {
        for name in ["sinpi", "gauss-bump"] {
            let t = preset(name, 1, 4).unwrap();
            for n in 1..=3u32 {
                let x = [0.37];
                let exact = t.deriv(&MultiIndex::new(vec![n]).unwrap(), &x).unwrap();
                let h = 1e-5;
                let up = t.deriv(&MultiIndex::new(vec![n - 1]).unwrap(), &[x[0] + h]).unwrap();
                let dn = t.deriv(&MultiIndex::new(vec![n - 1]).unwrap(), &[x[0] - h]).unwrap();
                let approx = (up - dn) / (2.0 * h);
                assert!((exact - approx).abs() <= 1e-4 * (1.0 + exact.abs()), "{name} n={n}");
            }
        }
    }

    #[test]
    fn norms_bound_sampled_derivatives() {
        for name in PRESET_NAMES {
            for (d, s) in [(1, 1), (1, 3), (2, 2)] {
                let t = preset(name, d, s).unwrap();
                for a in MultiIndex::all_up_to(d, s) {
                    for i in 0..=50 {
                        let x = vec![i as f64 / 50.0; d];
                        assert!(t.deriv(&a, &x).unwrap().abs() <= t.csnorm() + 1e-12, "{name}");
                    }
                }
            }
        }
    }

    #[test]
    fn sinpi_norm_and_modulus() {
        let t = preset("sinpi", 1, 2).unwrap();
        assert!((t.csnorm() - PI).abs() <= 1e-15);
        assert!((t.modulus(1.0).unwrap() - 2.0 / PI).abs() <= 1e-15);
        // the modulus dominates sampled differences
        for i in 0..=20 {
            let r = i as f64 / 20.0;
            for j in 0..=20 {
                let x = j as f64 / 20.0 * (1.0 - r);
                assert!((t.eval(&[x + r]) - t.eval(&[x])).abs() <= t.modulus(r).unwrap() + 1e-15);
            }
        }
    }

    #[test]
    fn constant_and_unknown() {
        let c = preset("constant", 3, 2).unwrap();
        assert_eq!(c.eval(&[0.1, 0.2, 0.3]), 0.7);
        assert_eq!(c.csnorm(), 0.7);
        assert!(preset("nope", 1, 1).is_err());
        assert!(preset("linear", 0, 1).is_err());
    }
}
