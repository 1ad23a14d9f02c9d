//! Target functions: an evaluation closure on [0,1] plus optional Lipschitz
//! metadata, and the builtin corpus used by the experiment runner.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Membership `f ∈ Lip_M(rho)`: `|f(t) - f(x)| <= M |t - x|^rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lipschitz {
    pub m: f64,
    pub rho: f64,
}

impl Lipschitz {
    pub fn new(m: f64, rho: f64) -> Result<Self> {
        if m.is_finite() && m > 0.0 && rho > 0.0 && rho <= 1.0 {
            Ok(Self { m, rho })
        } else {
            Err(Error::InvalidLipschitz { m, rho })
        }
    }
}

type EvalFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct TargetFunction {
    tag: String,
    eval: Arc<EvalFn>,
    lipschitz: Option<Lipschitz>,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("tag", &self.tag)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl TargetFunction {
    pub fn new<F>(tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            tag: tag.into(),
            eval: Arc::new(f),
            lipschitz: None,
        }
    }

    pub fn with_lipschitz(mut self, m: f64, rho: f64) -> Result<Self> {
        self.lipschitz = Some(Lipschitz::new(m, rho)?);
        Ok(self)
    }

    /// The monomial `e_j(t) = t^j`.
    pub fn monomial(j: u32) -> Self {
        Self::new(format!("e{j}"), move |t: f64| t.powi(j as i32))
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn lipschitz(&self) -> Option<Lipschitz> {
        self.lipschitz
    }

    /// Evaluates without a finiteness check.
    #[inline]
    pub fn raw(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let value = (self.eval)(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite {
                what: self.tag.clone(),
                x,
                value,
            })
        }
    }
}

/// Builtin function corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Const,
    Id,
    Square,
    Cube,
    /// `|x - 1/2|`
    AbsDev,
    /// `1 / (1 + 25 (2x - 1)^2)`, the Runge function moved onto [0,1].
    Runge,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Const,
        Builtin::Id,
        Builtin::Square,
        Builtin::Cube,
        Builtin::AbsDev,
        Builtin::Runge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Const => "const",
            Builtin::Id => "id",
            Builtin::Square => "square",
            Builtin::Cube => "cube",
            Builtin::AbsDev => "absdev",
            Builtin::Runge => "runge",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Builtin::Const => 1.0,
            Builtin::Id => x,
            Builtin::Square => x * x,
            Builtin::Cube => x * x * x,
            Builtin::AbsDev => (x - 0.5).abs(),
            Builtin::Runge => {
                let u = 2.0 * x - 1.0;
                1.0 / (1.0 + 25.0 * u * u)
            }
        }
    }

    /// Lipschitz constant with exponent 1 on [0,1]. For `runge` the sup of
    /// `|f'|` is `2 * 50u/(1+25u^2)^2` at `u^2 = 1/75`, about 6.4952.
    pub fn lipschitz_constant(self) -> f64 {
        match self {
            Builtin::Const | Builtin::Id | Builtin::AbsDev => 1.0,
            Builtin::Square => 2.0,
            Builtin::Cube => 3.0,
            Builtin::Runge => 6.5,
        }
    }

    pub fn target(self) -> TargetFunction {
        let mut f = TargetFunction::new(self.name(), move |x| self.eval(x));
        f.lipschitz = Some(Lipschitz {
            m: self.lipschitz_constant(),
            rho: 1.0,
        });
        f
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown function `{s}` (expected one of const, id, square, cube, absdev, runge)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_evaluate() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!("sin".parse::<Builtin>().is_err());
        assert_eq!(Builtin::AbsDev.eval(0.2), 0.3);
        assert_eq!(Builtin::Runge.eval(0.5), 1.0);
        assert_eq!(Builtin::Runge.eval(0.0), 1.0 / 26.0);
    }

    #[test]
    fn lipschitz_metadata_holds_on_samples() {
        let m = 400;
        for b in Builtin::ALL {
            let lip = b.target().lipschitz().unwrap();
            for i in 0..m {
                for j in (i + 1)..=m {
                    let (x, t) = (i as f64 / m as f64, j as f64 / m as f64);
                    let lhs = (b.eval(t) - b.eval(x)).abs();
                    assert!(
                        lhs <= lip.m * (t - x).powf(lip.rho) + 1e-15,
                        "{b} at ({x},{t})"
                    );
                }
            }
        }
    }

    #[test]
    fn non_finite_values_are_reported() {
        let f = TargetFunction::new("pole", |x| 1.0 / x);
        assert!(matches!(f.eval(0.0), Err(Error::NonFinite { .. })));
        assert_eq!(f.eval(0.5).unwrap(), 2.0);
        assert!(Lipschitz::new(1.0, 1.5).is_err());
        assert!(Lipschitz::new(0.0, 1.0).is_err());
    }
}
