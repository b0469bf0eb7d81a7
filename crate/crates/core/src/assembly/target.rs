use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, ForgeError, Result};
use crate::primitives::MultiIndex;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type DerivFn = Arc<dyn Fn(&MultiIndex, &[f64]) -> Option<f64> + Send + Sync>;
pub type ModulusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step for the central-difference fallback.
pub const FD_STEP: f64 = 1e-4;

/// A function on `[0,1]^d` with smoothness `s`, a bound on its `C^s` norm and
/// optionally exact partial derivatives and a modulus of continuity.
#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    d: usize,
    s: u32,
    eval: EvalFn,
    deriv: Option<DerivFn>,
    csnorm: f64,
    modulus: Option<ModulusFn>,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("s", &self.s)
            .field("csnorm", &self.csnorm)
            .field("deriv", &self.deriv.is_some())
            .field("modulus", &self.modulus.is_some())
            .finish()
    }
}

impl TargetFunction {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        s: u32,
        csnorm: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be at least 1"));
        }
        if s == 0 {
            return Err(invalid("s", "must be at least 1"));
        }
        if !(csnorm.is_finite() && csnorm >= 0.0) {
            return Err(invalid("csnorm", format!("must be finite and nonnegative, got {csnorm}")));
        }
        Ok(Self {
            name: name.into(),
            d,
            s,
            eval: Arc::new(eval),
            deriv: None,
            csnorm,
            modulus: None,
        })
    }

    /// Exact partial derivatives; `None` from the oracle means "not available".
    pub fn with_deriv(mut self, deriv: impl Fn(&MultiIndex, &[f64]) -> Option<f64> + Send + Sync + 'static) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    /// `ω_f(r) = sup{|f(x) − f(y)| : ‖x − y‖₂ ≤ r}`, or any upper bound of it.
    pub fn with_modulus(mut self, modulus: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.modulus = Some(Arc::new(modulus));
        self
    }

    /// Replace the derivative oracle by central differences with step [`FD_STEP`].
    /// The error is `O(h²)` per order; prefer exact oracles.
    pub fn with_finite_differences(mut self) -> Self {
        let eval = self.eval.clone();
        self.deriv = Some(Arc::new(move |alpha: &MultiIndex, x: &[f64]| {
            Some(central_difference(&*eval, alpha.entries(), &mut x.to_vec()))
        }));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn smoothness(&self) -> u32 {
        self.s
    }

    pub fn csnorm(&self) -> f64 {
        self.csnorm
    }

    pub fn has_modulus(&self) -> bool {
        self.modulus.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// `∂^α f(x)`. The zero index always falls back to [`Self::eval`].
    pub fn deriv(&self, alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
        if alpha.dim() != self.d {
            return Err(ForgeError::ShapeMismatch(format!(
                "multi-index of dimension {} for a {}-dimensional target",
                alpha.dim(),
                self.d
            )));
        }
        if alpha.order() == 0 {
            return Ok(self.eval(x));
        }
        self.deriv
            .as_ref()
            .and_then(|d| d(alpha, x))
            .ok_or_else(|| ForgeError::MissingDerivative {
                target: self.name.clone(),
                alpha: alpha.entries().to_vec(),
            })
    }

    pub fn modulus(&self, r: f64) -> Option<f64> {
        self.modulus.as_ref().map(|m| m(r))
    }

    /// `c · f`, with norm, derivatives and modulus scaled to match.
    pub fn scaled(&self, c: f64) -> TargetFunction {
        let eval = self.eval.clone();
        let mut out = TargetFunction {
            name: self.name.clone(),
            d: self.d,
            s: self.s,
            eval: Arc::new(move |x: &[f64]| c * eval(x)),
            deriv: None,
            csnorm: self.csnorm * c.abs(),
            modulus: None,
        };
        if let Some(d) = self.deriv.clone() {
            out.deriv = Some(Arc::new(move |a: &MultiIndex, x: &[f64]| d(a, x).map(|v| c * v)));
        }
        if let Some(m) = self.modulus.clone() {
            out.modulus = Some(Arc::new(move |r| c.abs() * m(r)));
        }
        out
    }
}

fn central_difference(f: &dyn Fn(&[f64]) -> f64, alpha: &[u32], x: &mut Vec<f64>) -> f64 {
    let Some(j) = alpha.iter().position(|&a| a > 0) else {
        return f(x);
    };
    let mut lower = alpha.to_vec();
    lower[j] -= 1;
    let keep = x[j];
    x[j] = keep + FD_STEP;
    let hi = central_difference(f, &lower, x);
    x[j] = keep - FD_STEP;
    let lo = central_difference(f, &lower, x);
    x[j] = keep;
    (hi - lo) / (2.0 * FD_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> TargetFunction {
        TargetFunction::new("cubic", 2, 3, 6.0, |x: &[f64]| x[0] * x[0] * x[1]).unwrap()
    }

    #[test]
    fn zero_index_uses_eval() {
        let t = cubic();
        assert_eq!(t.deriv(&MultiIndex::zero(2), &[0.5, 2.0]).unwrap(), 0.5);
        assert!(matches!(
            t.deriv(&MultiIndex::unit(2, 0), &[0.5, 2.0]),
            Err(ForgeError::MissingDerivative { .. })
        ));
        assert!(t.deriv(&MultiIndex::zero(3), &[0.5, 2.0]).is_err());
    }

    #[test]
    fn finite_differences_match_exact() {
        let t = cubic().with_finite_differences();
        let x = [0.3, 0.7];
        let d = |a: Vec<u32>| t.deriv(&MultiIndex::new(a).unwrap(), &x).unwrap();
        assert!((d(vec![1, 0]) - 2.0 * 0.3 * 0.7).abs() <= 1e-7);
        assert!((d(vec![2, 0]) - 1.4).abs() <= 1e-6);
        assert!((d(vec![1, 1]) - 0.6).abs() <= 1e-6);
    }

    #[test]
    fn scaling_carries_everything() {
        let t = cubic()
            .with_deriv(|a: &MultiIndex, x: &[f64]| (a.entries() == [1, 0]).then(|| 2.0 * x[0] * x[1]))
            .with_modulus(|r| 3.0 * r)
            .scaled(0.5);
        assert_eq!(t.csnorm(), 3.0);
        assert_eq!(t.eval(&[1.0, 1.0]), 0.5);
        assert_eq!(t.deriv(&MultiIndex::unit(2, 0), &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(t.modulus(1.0), Some(1.5));
    }

    #[test]
    fn validation() {
        assert!(TargetFunction::new("x", 0, 1, 1.0, |_: &[f64]| 0.0).is_err());
        assert!(TargetFunction::new("x", 1, 0, 1.0, |_: &[f64]| 0.0).is_err());
        assert!(TargetFunction::new("x", 1, 1, -1.0, |_: &[f64]| 0.0).is_err());
    }
}
