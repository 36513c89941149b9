//! Fuzzy relations over a finite instance set.

use serde::{Deserialize, Serialize};

use crate::connectives::{validate_degrees, Bijection, ResidualTriplet};
use crate::error::{Error, Result};
use crate::EPS;

/// Square matrix of degrees, stored row-major. `get(u, v)` is the degree to
/// which `u` relates to (dominates, resembles) `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRelation {
    n: usize,
    values: Vec<f64>,
}

/// A triple `(u, v, w)` with `T(R(u,v), R(v,w)) > R(u,w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitivityViolation {
    pub u: usize,
    pub v: usize,
    pub w: usize,
    /// `T(R(u,v), R(v,w)) − R(u,w)`.
    pub excess: f64,
}

impl FuzzyRelation {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        let values = validate_degrees(&values)?;
        Ok(FuzzyRelation { n, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        FuzzyRelation::new(n, values)
    }

    /// The crisp equality relation.
    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for u in 0..n {
            values[u * n + u] = 1.0;
        }
        FuzzyRelation { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.n..(u + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|u| self.row(u).to_vec()).collect()
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|u| (self.get(u, u) - 1.0).abs() <= EPS)
    }

    pub fn check_reflexive(&self) -> Result<()> {
        match (0..self.n).find(|&u| (self.get(u, u) - 1.0).abs() > EPS) {
            Some(instance) => Err(Error::NotReflexive { instance }),
            None => Ok(()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|u| (0..u).all(|v| (self.get(u, v) - self.get(v, u)).abs() <= EPS))
    }

    /// Every entry is exactly 0 or 1 (within [`EPS`]).
    pub fn check_crisp(&self) -> Result<()> {
        for u in 0..self.n {
            for v in 0..self.n {
                let x = self.get(u, v);
                if x > EPS && x < 1.0 - EPS {
                    return Err(Error::NotCrisp { u, v, value: x });
                }
            }
        }
        Ok(())
    }

    /// Exhaustive scan for triples violating T-transitivity by more than [`EPS`].
    pub fn check_t_transitive(&self, t: &ResidualTriplet) -> Vec<TransitivityViolation> {
        self.transitivity_violations(t, EPS)
    }

    /// As [`check_t_transitive`](Self::check_t_transitive) with a caller-chosen slack.
    pub fn transitivity_violations(
        &self,
        t: &ResidualTriplet,
        tolerance: f64,
    ) -> Vec<TransitivityViolation> {
        let n = self.n;
        let mut out = Vec::new();
        for u in 0..n {
            for v in 0..n {
                let r_uv = self.get(u, v);
                if r_uv <= 0.0 {
                    continue;
                }
                for w in 0..n {
                    let lhs = t.t_norm(r_uv, self.get(v, w));
                    let excess = lhs - self.get(u, w);
                    if excess > tolerance {
                        out.push(TransitivityViolation { u, v, w, excess });
                    }
                }
            }
        }
        out
    }

    /// Checks reflexivity and T-transitivity, returning the violations as an error.
    pub fn validate_preorder(&self, t: &ResidualTriplet, tolerance: f64) -> Result<()> {
        self.check_reflexive()?;
        let violations = self.transitivity_violations(t, tolerance);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::NotTransitive { violations })
        }
    }

    pub fn inverse(&self) -> FuzzyRelation {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                values[u * n + v] = self.get(v, u);
            }
        }
        FuzzyRelation { n, values }
    }

    /// Elementwise `φ(R(u,v))`.
    pub fn phi_image(&self, phi: &Bijection) -> FuzzyRelation {
        if phi.is_identity() {
            return self.clone();
        }
        FuzzyRelation {
            n: self.n,
            values: self.values.iter().map(|&x| phi.forward(x)).collect(),
        }
    }

    /// Row-major `M(u,v) = 1 − R(u,v)`; a quasi-metric when `R` is T_L-transitive.
    pub fn m_form(&self) -> Vec<f64> {
        self.values.iter().map(|&x| 1.0 - x).collect()
    }
}

pub fn check_t_transitive(r: &FuzzyRelation, t: &ResidualTriplet) -> Vec<TransitivityViolation> {
    r.check_t_transitive(t)
}

pub fn inverse(r: &FuzzyRelation) -> FuzzyRelation {
    r.inverse()
}

pub fn phi_image(r: &FuzzyRelation, phi: &Bijection) -> FuzzyRelation {
    r.phi_image(phi)
}

/// Condition attributes and a fuzzy decision for `n` instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    attributes: Vec<Vec<f64>>,
    decision: Vec<f64>,
    attribute_ranges: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        attributes: Vec<Vec<f64>>,
        decision: Vec<f64>,
        attribute_ranges: Option<Vec<f64>>,
    ) -> Result<Self> {
        if attributes.len() != decision.len() {
            return Err(Error::DimensionMismatch {
                expected: attributes.len(),
                found: decision.len(),
            });
        }
        let m = attributes.first().map_or(0, Vec::len);
        for row in &attributes {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::Parse(format!("non-finite attribute value {bad}")));
            }
        }
        if let Some(ranges) = &attribute_ranges {
            if ranges.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: ranges.len(),
                });
            }
            for (attribute, &value) in ranges.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::InvalidRange { attribute, value });
                }
            }
        }
        let decision = validate_degrees(&decision)?;
        Ok(Dataset {
            attributes,
            decision,
            attribute_ranges,
        })
    }

    pub fn n(&self) -> usize {
        self.attributes.len()
    }

    pub fn m(&self) -> usize {
        self.attributes.first().map_or(0, Vec::len)
    }

    pub fn attributes(&self) -> &[Vec<f64>] {
        &self.attributes
    }

    pub fn decision(&self) -> &[f64] {
        &self.decision
    }

    /// Configured ranges, or max − min of each attribute column.
    pub fn ranges(&self) -> Result<Vec<f64>> {
        if let Some(r) = &self.attribute_ranges {
            return Ok(r.clone());
        }
        (0..self.m())
            .map(|q| {
                let (lo, hi) = self
                    .attributes
                    .iter()
                    .map(|row| row[q])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                        (lo.min(x), hi.max(x))
                    });
                let range = hi - lo;
                if range > 0.0 {
                    Ok(range)
                } else {
                    Err(Error::ZeroRange { attribute: q })
                }
            })
            .collect()
    }
}

/// `R(u,v) = min_q max(1 − |f(u,q) − f(v,q)| / range(q), 0)`, a T_L-equivalence.
pub fn triangular_similarity(d: &Dataset) -> Result<FuzzyRelation> {
    let ranges = d.ranges()?;
    let n = d.n();
    let attrs = d.attributes();
    let mut values = vec![1.0; n * n];
    for u in 0..n {
        for v in (u + 1)..n {
            let mut r: f64 = 1.0;
            for (q, range) in ranges.iter().enumerate() {
                let rq = (1.0 - (attrs[u][q] - attrs[v][q]).abs() / range).max(0.0);
                r = r.min(rq);
            }
            values[u * n + v] = r;
            values[v * n + u] = r;
        }
    }
    Ok(FuzzyRelation { n, values })
}
