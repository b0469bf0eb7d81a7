//! Closed-form width, depth and error budgets for every construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoders::int_root;
use crate::error::{invalid, ForgeError, Result};

/// Every construction with a published budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// The full smooth approximant, error `C₃‖f‖ N^{−2s/d}L^{−2s/d}`.
    Smooth,
    /// The same network stated in `(Ñ, L̃)`, the actual width and depth.
    Corollary,
    /// Trifling-region removal applied to a width `N`, depth `L` network.
    Gap,
    /// Taylor network for a target in the unit `C^s` ball, error off `Ω`.
    TaylorCore,
    Square,
    Product,
    ProductInterval,
    ProductMulti,
    Monomial,
    Step,
    BitCumsum,
    BitSingle,
    PointMatch,
    Mid,
}

impl BoundKind {
    pub const ALL: [BoundKind; 14] = [
        BoundKind::Smooth,
        BoundKind::Corollary,
        BoundKind::Gap,
        BoundKind::TaylorCore,
        BoundKind::Square,
        BoundKind::Product,
        BoundKind::ProductInterval,
        BoundKind::ProductMulti,
        BoundKind::Monomial,
        BoundKind::Step,
        BoundKind::BitCumsum,
        BoundKind::BitSingle,
        BoundKind::PointMatch,
        BoundKind::Mid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Smooth => "smooth",
            BoundKind::Corollary => "corollary",
            BoundKind::Gap => "gap",
            BoundKind::TaylorCore => "taylor-core",
            BoundKind::Square => "square",
            BoundKind::Product => "product",
            BoundKind::ProductInterval => "product-interval",
            BoundKind::ProductMulti => "product-multi",
            BoundKind::Monomial => "monomial",
            BoundKind::Step => "step",
            BoundKind::BitCumsum => "bit-cumsum",
            BoundKind::BitSingle => "bit-single",
            BoundKind::PointMatch => "point-match",
            BoundKind::Mid => "mid",
        }
    }

    /// Constructions whose ideal output is exact; measured error only reflects rounding.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            BoundKind::Step | BoundKind::BitCumsum | BoundKind::BitSingle | BoundKind::Mid
        )
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = ForgeError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "main" => "smooth",
            "gap" | "trifling" => "gap",
            "step-fn" | "stepfn" => "step",
            "bits-cumsum" => "bit-cumsum",
            "bits-single" => "bit-single",
            other => other,
        };
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == alias)
            .ok_or_else(|| {
                let names: Vec<_> = BoundKind::ALL.iter().map(|k| k.name()).collect();
                invalid("kind", format!("unknown kind `{s}`, expected one of {}", names.join(", ")))
            })
    }
}

/// Parameters read by [`bounds`]. Fields a kind does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub s: u32,
    pub d: usize,
    pub n: usize,
    pub l: usize,
    /// Number of factors for `ProductMulti`, degree cap for `Monomial`.
    pub k: usize,
    /// Interval `[a, b]` for `ProductInterval`.
    pub a: f64,
    pub b: f64,
    /// `‖f‖_{C^s}` for `Smooth` and `Corollary`.
    pub csnorm: f64,
    /// `Gap`: accuracy `ε` of the input network off `Ω` and `ω_f(δ)`.
    pub epsilon: f64,
    pub omega: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            s: 1,
            d: 1,
            n: 1,
            l: 1,
            k: 2,
            a: 0.0,
            b: 1.0,
            csnorm: 1.0,
            epsilon: 0.0,
            omega: 0.0,
        }
    }
}

impl BoundParams {
    pub fn new(s: u32, d: usize, n: usize, l: usize) -> Self {
        Self {
            s,
            d,
            n,
            l,
            ..Self::default()
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn with_csnorm(mut self, csnorm: f64) -> Self {
        self.csnorm = csnorm;
        self
    }

    pub fn with_gap(mut self, epsilon: f64, omega: f64) -> Self {
        self.epsilon = epsilon;
        self.omega = omega;
        self
    }
}

/// Width, depth and sup-error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width: u64,
    pub depth: u64,
    pub error: f64,
}

/// Integer part of a real-valued size budget. The nudge keeps products like
/// `51·3·log₂8` from landing one below the integer they equal.
fn floor_size(v: f64) -> u64 {
    (v + 1e-9).floor() as u64
}

fn require(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}

pub fn bounds(kind: BoundKind, p: &BoundParams) -> Result<Bounds> {
    require(p.n >= 1, "N", "must be at least 1")?;
    require(p.l >= 1, "L", "must be at least 1")?;
    require(p.d >= 1, "d", "must be at least 1")?;
    let (n, l) = (p.n as f64, p.l as f64);
    let (sf, df) = (f64::from(p.s), p.d as f64);
    let (si, di) = (p.s as i32, p.d as i32);
    let needs_s = || require(p.s >= 1, "s", "must be at least 1");
    let needs_norm = || require(p.csnorm.is_finite() && p.csnorm >= 0.0, "csnorm", "must be finite and nonnegative");
    let out = |w: f64, dp: f64, e: f64| Bounds {
        width: floor_size(w),
        depth: floor_size(dp),
        error: e,
    };
    let rate = || n.powf(-2.0 * sf / df) * l.powf(-2.0 * sf / df);

    Ok(match kind {
        BoundKind::Smooth => {
            needs_s()?;
            needs_norm()?;
            let c1 = 17.0 * sf.powi(di + 1) * 3f64.powi(di) * df;
            let c2 = 18.0 * sf * sf;
            let c3 = 85.0 * (sf + 1.0).powi(di) * 8f64.powi(si);
            out(
                c1 * (n + 2.0) * (8.0 * n).log2(),
                c2 * (l + 2.0) * (4.0 * l).log2() + 2.0 * df,
                c3 * p.csnorm * rate(),
            )
        }
        BoundKind::Corollary => {
            needs_s()?;
            needs_norm()?;
            let min_n = 17.0 * sf.powi(di + 1) * 3f64.powi(di + 2) * df;
            let min_l = 108.0 * sf * sf + 2.0 * df;
            if n < min_n {
                return Err(invalid("N", format!("needs Ñ ≥ 17s^(d+1)3^(d+2)d = {min_n}")));
            }
            if l < min_l {
                return Err(invalid("L", format!("needs L̃ ≥ 108s²+2d = {min_l}")));
            }
            let c1 = 85.0 * (sf + 1.0).powi(di) * 8f64.powi(si);
            let c2 = 68.0 * sf.powi(di + 1) * 3f64.powi(di) * df;
            let c3 = 72.0 * sf * sf;
            let p_exp = -2.0 * sf / df;
            let e = c1
                * p.csnorm
                * (n / (c2 * (8.0 * n + 8.0).log2())).powf(p_exp)
                * ((l - 2.0 * df) / (c3 * (4.0 * l + 4.0).log2())).powf(p_exp);
            out(n, l, e)
        }
        BoundKind::Gap => {
            require(p.epsilon >= 0.0 && p.omega >= 0.0, "epsilon", "ε and ω must be nonnegative")?;
            out(3f64.powi(di) * (n + 4.0), l + 2.0 * df, p.epsilon + df * p.omega)
        }
        BoundKind::TaylorCore => {
            needs_s()?;
            out(
                16.0 * sf.powi(di + 1) * df * (n + 2.0) * (8.0 * n).log2(),
                18.0 * sf * sf * (l + 2.0) * (4.0 * l).log2(),
                84.0 * (sf + 1.0).powi(di) * 8f64.powi(si) * rate(),
            )
        }
        BoundKind::Square => out(3.0 * n, l, n.powf(-l)),
        BoundKind::Product => out(9.0 * n, l, 6.0 * n.powf(-l)),
        BoundKind::ProductInterval => {
            require(p.a < p.b && p.a.is_finite() && p.b.is_finite(), "interval", "need finite a < b")?;
            out(9.0 * n + 1.0, l, 6.0 * (p.b - p.a).powi(2) * n.powf(-l))
        }
        BoundKind::ProductMulti => {
            require(p.k >= 2, "k", "product of at least two inputs")?;
            let k = p.k as f64;
            out(
                9.0 * (n + 1.0) + k - 1.0,
                7.0 * k * l * (k - 1.0),
                9.0 * (k - 1.0) * (n + 1.0).powf(-7.0 * k * l),
            )
        }
        BoundKind::Monomial => {
            require(p.k >= 1, "k", "degree cap must be at least 1")?;
            let k = p.k as f64;
            out(
                9.0 * (n + 1.0) + k - 1.0,
                7.0 * k * k * l,
                9.0 * k * (n + 1.0).powf(-7.0 * k * l),
            )
        }
        BoundKind::Step => out(4.0 * int_root(p.n, p.d as u32) as f64 + 3.0, 4.0 * l + 5.0, 0.0),
        BoundKind::BitCumsum => out(4.0 * n + 3.0, 3.0 * l + 3.0, 0.0),
        BoundKind::BitSingle => out(8.0 * n + 6.0, 5.0 * l + 7.0, 0.0),
        BoundKind::PointMatch => {
            needs_s()?;
            out(
                16.0 * sf * (n + 1.0) * (8.0 * n).log2(),
                5.0 * (l + 2.0) * (4.0 * l).log2(),
                n.powi(-2 * si) * l.powi(-2 * si),
            )
        }
        BoundKind::Mid => out(14.0, 2.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_budget_at_one() {
        let b = bounds(BoundKind::Smooth, &BoundParams::new(1, 1, 1, 1)).unwrap();
        assert_eq!((b.width, b.depth), (459, 110));
        assert_eq!(b.error, 1360.0);
        let b = bounds(BoundKind::Smooth, &BoundParams::new(1, 1, 1, 1).with_csnorm(0.5)).unwrap();
        assert_eq!(b.error, 680.0);
    }

    #[test]
    fn small_builder_budgets() {
        let sq = bounds(BoundKind::Square, &BoundParams::new(1, 1, 2, 3)).unwrap();
        assert_eq!((sq.width, sq.depth, sq.error), (6, 3, 0.125));
        let gap = bounds(BoundKind::Gap, &BoundParams::new(1, 2, 10, 4)).unwrap();
        assert_eq!((gap.width, gap.depth), (126, 8));
        let mid = bounds(BoundKind::Mid, &BoundParams::default()).unwrap();
        assert_eq!((mid.width, mid.depth, mid.error), (14, 2, 0.0));
        let pi = bounds(BoundKind::ProductInterval, &BoundParams::new(1, 1, 2, 1).with_interval(-3.0, 3.0)).unwrap();
        assert_eq!((pi.width, pi.depth, pi.error), (19, 1, 108.0));
    }

    #[test]
    fn encoders() {
        let p = BoundParams::new(1, 2, 4, 2);
        assert_eq!(bounds(BoundKind::Step, &p).unwrap().width, 11);
        assert_eq!(bounds(BoundKind::Step, &p).unwrap().depth, 13);
        let b = bounds(BoundKind::BitSingle, &BoundParams::new(1, 1, 2, 2)).unwrap();
        assert_eq!((b.width, b.depth), (22, 17));
        let pm = bounds(BoundKind::PointMatch, &BoundParams::new(2, 1, 1, 1)).unwrap();
        // 16·2·2·3 and 5·3·2
        assert_eq!((pm.width, pm.depth, pm.error), (192, 30, 1.0));
    }

    #[test]
    fn corollary_ranges() {
        let p = BoundParams::new(1, 1, 100, 200);
        let err = bounds(BoundKind::Corollary, &p).unwrap_err().to_string();
        assert!(err.contains("Ñ"), "{err}");
        let p = BoundParams::new(1, 1, 459, 109);
        assert!(bounds(BoundKind::Corollary, &p).unwrap_err().to_string().contains("L̃"));
        let b = bounds(BoundKind::Corollary, &BoundParams::new(1, 1, 459, 110)).unwrap();
        assert_eq!((b.width, b.depth), (459, 110));
        assert!(b.error > 0.0 && b.error.is_finite());
    }

    #[test]
    fn validation_and_names() {
        assert!(bounds(BoundKind::Square, &BoundParams::new(1, 1, 0, 1)).is_err());
        assert!(bounds(BoundKind::ProductMulti, &BoundParams::default().with_k(1)).is_err());
        assert!(bounds(BoundKind::ProductInterval, &BoundParams::default().with_interval(1.0, 1.0)).is_err());
        for k in BoundKind::ALL {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
        }
        assert_eq!("main".parse::<BoundKind>().unwrap(), BoundKind::Smooth);
        assert_eq!("bits_single".parse::<BoundKind>().unwrap(), BoundKind::BitSingle);
        assert!("cube".parse::<BoundKind>().is_err());
    }

    #[test]
    fn sizes_grow_with_budget() {
        for kind in [BoundKind::Smooth, BoundKind::TaylorCore, BoundKind::PointMatch, BoundKind::Square] {
            let mut last = (0, 0);
            for n in 1..6 {
                let b = bounds(kind, &BoundParams::new(2, 2, n, n)).unwrap();
                assert!(b.width >= last.0 && b.depth >= last.1, "{kind}");
                last = (b.width, b.depth);
            }
        }
    }
}
