use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type ReactionFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum ReactionKind<T> {
    /// u(1 − u).
    Logistic,
    /// u(1 − u)/(1 + u/2).
    Saturating,
    Custom { f: ReactionFn<T>, df: ReactionFn<T> },
}

/// A reaction term f with f(0) = 0.
#[derive(Clone)]
pub struct Reaction<T> {
    kind: ReactionKind<T>,
    label: String,
}

impl<T> fmt::Debug for Reaction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction").field("label", &self.label).finish()
    }
}

pub const KNOWN_REACTIONS: &[&str] = &["logistic", "saturating"];

#[derive(Debug, Clone, PartialEq)]
pub struct KppReport {
    pub zeros_ok: bool,
    pub ratio_nonincreasing: bool,
    pub pass: bool,
}

impl<T: Scalar> Reaction<T> {
    pub fn logistic() -> Self {
        Self {
            kind: ReactionKind::Logistic,
            label: "logistic".into(),
        }
    }

    pub fn saturating() -> Self {
        Self {
            kind: ReactionKind::Saturating,
            label: "saturating".into(),
        }
    }

    pub fn custom(label: impl Into<String>, f: ReactionFn<T>, df: ReactionFn<T>) -> Self {
        Self {
            kind: ReactionKind::Custom { f, df },
            label: label.into(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "logistic" => Ok(Self::logistic()),
            "saturating" => Ok(Self::saturating()),
            other => Err(Error::UnknownFamily {
                kind: "reaction",
                name: other.to_string(),
                known: KNOWN_REACTIONS.join(", "),
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn f(&self, u: T) -> T {
        match &self.kind {
            ReactionKind::Logistic => u * (T::one() - u),
            ReactionKind::Saturating => u * (T::one() - u) / (T::one() + u * T::half()),
            ReactionKind::Custom { f, .. } => f(u),
        }
    }

    #[inline]
    pub fn df(&self, u: T) -> T {
        match &self.kind {
            ReactionKind::Logistic => T::one() - T::two() * u,
            ReactionKind::Saturating => {
                let q = T::one() + u * T::half();
                ((T::one() - T::two() * u) * q - u * (T::one() - u) * T::half()) / (q * q)
            }
            ReactionKind::Custom { df, .. } => df(u),
        }
    }

    /// f'(0).
    pub fn f0(&self) -> T {
        self.df(T::zero())
    }

    /// max |f'| on [0, sup], sampled on 1001 points plus the endpoints.
    pub fn lipschitz(&self, sup: T) -> T {
        let top = sup.max(T::one());
        (0..=1000)
            .map(|i| self.df(top * T::from_usize_lossy(i) / T::lit(1000.0)).abs())
            .fold(T::zero(), T::max)
    }

    /// f(0) = f(1) = 0 and f(u)/u nonincreasing on u = 0.1, 0.2, ..., 1.5.
    pub fn kpp_check(&self) -> KppReport {
        let tol = T::lit(1e-12);
        let zeros_ok = self.f(T::zero()).abs() <= tol && self.f(T::one()).abs() <= tol;
        let ratios: Vec<T> = (1..=15)
            .map(|i| {
                let u = T::lit(0.1 * i as f64);
                self.f(u) / u
            })
            .collect();
        let ratio_nonincreasing = ratios.windows(2).all(|w| w[1] <= w[0] + tol);
        KppReport {
            zeros_ok,
            ratio_nonincreasing,
            pass: zeros_ok && ratio_nonincreasing,
        }
    }
}
