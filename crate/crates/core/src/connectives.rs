//! Fuzzy connectives: t-norms, their residual implicators and induced negators.
//!
//! The two continuous Archimedean families are parameterised by an
//! order-isomorphism `φ` of the unit interval:
//!
//! * `T_{L,φ}(x, y) = φ⁻¹(max(φ(x) + φ(y) − 1, 0))` (nilpotent),
//! * `T_{P,φ}(x, y) = φ⁻¹(φ(x)·φ(y))` (strict).
//!
//! Minimum, drastic and nilpotent-minimum t-norms are provided as fixed
//! connectives. All functions take and return plain `f64` values that are
//! assumed to lie in `[0, 1]`; use [`Degree`] to validate external input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::EPS;

/// A membership or relation value in `[0, 1]`.
///
/// Values within [`EPS`] of the unit interval are clamped onto it; anything
/// further out is rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Degree(f64);

impl Degree {
    pub const ZERO: Degree = Degree(0.0);
    pub const ONE: Degree = Degree(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(-EPS..=1.0 + EPS).contains(&value) {
            return Err(Error::InvalidDegree { value });
        }
        Ok(Degree(value.clamp(0.0, 1.0)))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Degree {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Degree::new(value)
    }
}

impl From<Degree> for f64 {
    fn from(d: Degree) -> f64 {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Validates every value of a slice as a degree, clamping values within tolerance.
pub fn validate_degrees(values: &[f64]) -> Result<Vec<f64>> {
    values.iter().map(|&v| Degree::new(v).map(Degree::get)).collect()
}

/// Strictly increasing bijection of `[0, 1]` onto itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub enum Bijection {
    #[default]
    Identity,
    /// `φ(x) = x^γ` with `γ > 0`.
    Power(f64),
    /// Linear interpolation through breakpoints `(x_i, y_i)`; both coordinates
    /// strictly increasing, starting at `(0, 0)` and ending at `(1, 1)`.
    PiecewiseLinear(Vec<(f64, f64)>),
}


impl Bijection {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidBijection(format!(
                "power exponent must be positive and finite, got {gamma}"
            )));
        }
        Ok(Bijection::Power(gamma))
    }

    pub fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidBijection(
                "piecewise-linear bijection needs at least two breakpoints".into(),
            ));
        }
        let first = breakpoints[0];
        let last = breakpoints[breakpoints.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::InvalidBijection(
                "breakpoints must start at (0, 0) and end at (1, 1)".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::InvalidBijection(format!(
                    "breakpoints must be strictly increasing: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Bijection::PiecewiseLinear(breakpoints))
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Bijection::Identity)
    }

    pub fn forward(&self, x: f64) -> f64 {
        match self {
            Bijection::Identity => x,
            Bijection::Power(g) => x.max(0.0).powf(*g).min(1.0),
            Bijection::PiecewiseLinear(bp) => interpolate(bp.iter().copied(), x),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Bijection::Identity => y,
            Bijection::Power(g) => y.max(0.0).powf(1.0 / *g).min(1.0),
            Bijection::PiecewiseLinear(bp) => interpolate(bp.iter().map(|&(a, b)| (b, a)), y),
        }
    }
}

fn interpolate(points: impl Iterator<Item = (f64, f64)>, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let mut prev = (0.0, 0.0);
    for (px, py) in points {
        if x <= px {
            if px == prev.0 {
                return py;
            }
            let t = (x - prev.0) / (px - prev.0);
            return prev.1 + t * (py - prev.1);
        }
        prev = (px, py);
    }
    1.0
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bijection::Identity => write!(f, "identity"),
            Bijection::Power(g) => write!(f, "power:{g}"),
            Bijection::PiecewiseLinear(bp) => {
                write!(f, "pwl:")?;
                for (i, (x, y)) in bp.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{x}:{y}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Bijection {
    type Err = Error;

    /// Accepts `identity`, `power:<γ>` and `pwl:<x>:<y>;<x>:<y>;...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("identity") {
            return Ok(Bijection::Identity);
        }
        if let Some(rest) = s.strip_prefix("power:") {
            let gamma: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::InvalidBijection(format!("bad power exponent {rest:?}")))?;
            return Bijection::power(gamma);
        }
        if let Some(rest) = s.strip_prefix("pwl:") {
            let mut points = Vec::new();
            for pair in rest.split(';') {
                let (x, y) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidBijection(format!("bad breakpoint {pair:?}")))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidBijection(format!("bad number {v:?}")))
                };
                points.push((parse(x)?, parse(y)?));
            }
            return Bijection::piecewise_linear(points);
        }
        Err(Error::InvalidBijection(format!("unknown bijection {s:?}")))
    }
}

/// The t-norm family of a residual triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Nilpotent family `T_{L,φ}`.
    LukasiewiczIso,
    /// Strict family `T_{P,φ}`.
    ProductIso,
    Minimum,
    Drastic,
    NilpotentMinimum,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::LukasiewiczIso,
        Family::ProductIso,
        Family::Minimum,
        Family::Drastic,
        Family::NilpotentMinimum,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::LukasiewiczIso => "lukasiewicz",
            Family::ProductIso => "product",
            Family::Minimum => "minimum",
            Family::Drastic => "drastic",
            Family::NilpotentMinimum => "nilpotent-minimum",
        };
        f.write_str(name)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lukasiewicz" | "luk" | "l" => Ok(Family::LukasiewiczIso),
            "product" | "prod" | "p" => Ok(Family::ProductIso),
            "minimum" | "min" | "m" => Ok(Family::Minimum),
            "drastic" | "d" => Ok(Family::Drastic),
            "nilpotent-minimum" | "nilpotent_minimum" | "nm" => Ok(Family::NilpotentMinimum),
            other => Err(Error::InvalidParameter(format!("unknown t-norm family {other:?}"))),
        }
    }
}

/// A t-norm together with its residual implicator and induced negator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualTriplet {
    family: Family,
    bijection: Bijection,
}

impl ResidualTriplet {
    /// Builds a triplet. The bijection is only consulted by the two `*Iso`
    /// families and is reset to the identity for the others.
    pub fn new(family: Family, bijection: Bijection) -> Self {
        let bijection = match family {
            Family::LukasiewiczIso | Family::ProductIso => bijection,
            _ => Bijection::Identity,
        };
        ResidualTriplet { family, bijection }
    }

    pub fn lukasiewicz() -> Self {
        Self::new(Family::LukasiewiczIso, Bijection::Identity)
    }

    pub fn product() -> Self {
        Self::new(Family::ProductIso, Bijection::Identity)
    }

    pub fn minimum() -> Self {
        Self::new(Family::Minimum, Bijection::Identity)
    }

    pub fn drastic() -> Self {
        Self::new(Family::Drastic, Bijection::Identity)
    }

    pub fn nilpotent_minimum() -> Self {
        Self::new(Family::NilpotentMinimum, Bijection::Identity)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn bijection(&self) -> &Bijection {
        &self.bijection
    }

    /// Every family except the drastic t-norm is left-continuous, so the
    /// residuation property holds for them.
    pub fn is_left_continuous(&self) -> bool {
        self.family != Family::Drastic
    }

    /// IMTL triplets: the induced negator is involutive.
    pub fn has_involutive_negator(&self) -> bool {
        matches!(self.family, Family::LukasiewiczIso | Family::NilpotentMinimum)
    }

    /// The same family evaluated in φ-space, i.e. with the identity bijection.
    pub fn base(&self) -> ResidualTriplet {
        ResidualTriplet::new(self.family, Bijection::Identity)
    }

    pub fn t_norm(&self, x: f64, y: f64) -> f64 {
        match self.family {
            Family::LukasiewiczIso => {
                if y >= 1.0 {
                    return x;
                }
                if x >= 1.0 {
                    return y;
                }
                let phi = &self.bijection;
                let s = phi.forward(x) + phi.forward(y) - 1.0;
                if s <= EPS {
                    0.0
                } else {
                    phi.inverse(s)
                }
            }
            Family::ProductIso => {
                let phi = &self.bijection;
                phi.inverse(phi.forward(x) * phi.forward(y))
            }
            Family::Minimum => x.min(y),
            Family::Drastic => {
                if x.max(y) >= 1.0 - EPS {
                    x.min(y)
                } else {
                    0.0
                }
            }
            Family::NilpotentMinimum => {
                if x + y > 1.0 + EPS {
                    x.min(y)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn implicator(&self, x: f64, y: f64) -> f64 {
        match self.family {
            Family::LukasiewiczIso => {
                let phi = &self.bijection;
                let t = 1.0 - phi.forward(x) + phi.forward(y);
                if t >= 1.0 - EPS {
                    1.0
                } else {
                    phi.inverse(t)
                }
            }
            Family::ProductIso => {
                if x <= y + EPS {
                    1.0
                } else {
                    let phi = &self.bijection;
                    phi.inverse(phi.forward(y) / phi.forward(x))
                }
            }
            Family::Minimum => {
                if x <= y + EPS {
                    1.0
                } else {
                    y
                }
            }
            Family::Drastic => {
                if x >= 1.0 - EPS {
                    y
                } else {
                    1.0
                }
            }
            Family::NilpotentMinimum => {
                if x <= y + EPS {
                    1.0
                } else {
                    (1.0 - x).max(y)
                }
            }
        }
    }

    /// `N(x) = I(x, 0)`.
    pub fn negator(&self, x: f64) -> f64 {
        match self.family {
            Family::LukasiewiczIso => {
                let phi = &self.bijection;
                phi.inverse(1.0 - phi.forward(x))
            }
            _ => self.implicator(x, 0.0),
        }
    }

    pub fn t_norm_degree(&self, x: Degree, y: Degree) -> Degree {
        Degree(self.t_norm(x.0, y.0).clamp(0.0, 1.0))
    }

    pub fn implicator_degree(&self, x: Degree, y: Degree) -> Degree {
        Degree(self.implicator(x.0, y.0).clamp(0.0, 1.0))
    }

    pub fn negator_degree(&self, x: Degree) -> Degree {
        Degree(self.negator(x.0).clamp(0.0, 1.0))
    }
}

impl fmt::Display for ResidualTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::LukasiewiczIso | Family::ProductIso => {
                write!(f, "{}[{}]", self.family, self.bijection)
            }
            _ => write!(f, "{}", self.family),
        }
    }
}
