//! Fuzzy sets, granules and fuzzy rough approximations.
//!
//! Granularity is read as `T(R(u,v), A(v)) ≤ A(u)`: if `u` relates to `v` and
//! `v` belongs to `A`, then `u` belongs to `A`.

use serde::{Deserialize, Serialize};

use crate::connectives::{validate_degrees, ResidualTriplet};
use crate::error::{Error, Result};
use crate::relation::FuzzyRelation;
use crate::EPS;

/// Membership degrees indexed by instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FuzzySet {
    memberships: Vec<f64>,
}

impl FuzzySet {
    pub fn new(memberships: Vec<f64>) -> Result<Self> {
        Ok(FuzzySet {
            memberships: validate_degrees(&memberships)?,
        })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        FuzzySet::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.memberships.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memberships.is_empty()
    }

    #[inline]
    pub fn get(&self, u: usize) -> f64 {
        self.memberships[u]
    }

    pub fn memberships(&self) -> &[f64] {
        &self.memberships
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.memberships
    }

    /// `coA(u) = N(A(u))`.
    pub fn complement(&self, t: &ResidualTriplet) -> FuzzySet {
        FuzzySet {
            memberships: self.memberships.iter().map(|&x| t.negator(x)).collect(),
        }
    }

    /// Largest pointwise deviation from another set of the same length.
    pub fn max_abs_diff(&self, other: &FuzzySet) -> f64 {
        self.memberships
            .iter()
            .zip(&other.memberships)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_unchecked(memberships: Vec<f64>) -> Self {
        FuzzySet {
            memberships: memberships.into_iter().map(|x| x.clamp(0.0, 1.0)).collect(),
        }
    }
}

fn check_len(r: &FuzzyRelation, a: &FuzzySet) -> Result<()> {
    if r.n() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            found: a.len(),
        });
    }
    Ok(())
}

/// Granule anchored at `u` with height `lambda`: `v ↦ T(R(v,u), λ)`.
///
/// This is the smallest granularly representable set containing `u` to degree `λ`.
pub fn granule(r: &FuzzyRelation, t: &ResidualTriplet, u: usize, lambda: f64) -> FuzzySet {
    FuzzySet::from_unchecked((0..r.n()).map(|v| t.t_norm(r.get(v, u), lambda)).collect())
}

/// `lower(u) = min_v I(R(v,u), A(v))`.
pub fn lower_approximation(
    r: &FuzzyRelation,
    t: &ResidualTriplet,
    a: &FuzzySet,
) -> Result<FuzzySet> {
    check_len(r, a)?;
    let n = r.n();
    let out = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| t.implicator(r.get(v, u), a.get(v)))
                .fold(1.0, f64::min)
        })
        .collect();
    Ok(FuzzySet::from_unchecked(out))
}

/// `upper(u) = max_v T(R(u,v), A(v))`.
pub fn upper_approximation(
    r: &FuzzyRelation,
    t: &ResidualTriplet,
    a: &FuzzySet,
) -> Result<FuzzySet> {
    check_len(r, a)?;
    let n = r.n();
    let out = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| t.t_norm(r.get(u, v), a.get(v)))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(FuzzySet::from_unchecked(out))
}

/// A pair with `T(R(u,v), A(v)) > A(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GranularityViolation {
    pub u: usize,
    pub v: usize,
    /// `T(R(u,v), A(v)) − A(u)`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityReport {
    pub representable: bool,
    /// Worst first.
    pub violations: Vec<GranularityViolation>,
}

impl GranularityReport {
    pub fn max_slack(&self) -> f64 {
        self.violations.first().map_or(0.0, |v| v.slack)
    }
}

pub fn is_granularly_representable(
    r: &FuzzyRelation,
    t: &ResidualTriplet,
    a: &FuzzySet,
) -> Result<GranularityReport> {
    granularity_report(r, t, a, EPS)
}

pub fn granularity_report(
    r: &FuzzyRelation,
    t: &ResidualTriplet,
    a: &FuzzySet,
    tolerance: f64,
) -> Result<GranularityReport> {
    check_len(r, a)?;
    let n = r.n();
    let mut violations = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let slack = t.t_norm(r.get(u, v), a.get(v)) - a.get(u);
            if slack > tolerance {
                violations.push(GranularityViolation { u, v, slack });
            }
        }
    }
    violations.sort_by(|x, y| {
        y.slack
            .total_cmp(&x.slack)
            .then(x.u.cmp(&y.u))
            .then(x.v.cmp(&y.v))
    });
    Ok(GranularityReport {
        representable: violations.is_empty(),
        violations,
    })
}

/// Pointwise maximum of the granules `granule(u, A(u))`.
pub fn granular_reconstruction(
    r: &FuzzyRelation,
    t: &ResidualTriplet,
    a: &FuzzySet,
) -> Result<FuzzySet> {
    check_len(r, a)?;
    let mut out = vec![0.0f64; r.n()];
    for u in 0..r.n() {
        for (v, g) in granule(r, t, u, a.get(u)).into_vec().into_iter().enumerate() {
            out[v] = out[v].max(g);
        }
    }
    Ok(FuzzySet::from_unchecked(out))
}

/// `A_α = {u : A(u) ≥ α}`.
pub fn alpha_cut(a: &FuzzySet, alpha: f64) -> Vec<usize> {
    (0..a.len()).filter(|&u| a.get(u) >= alpha - EPS).collect()
}
