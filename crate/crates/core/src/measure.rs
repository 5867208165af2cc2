//! Distance measures that decide cell membership and steal ownership.
//!
//! Every supported measure has the form `D(y, c) = phi(y) + <a_c, y> + g_c`
//! for a site `c`, so comparisons between two sites are linear in `y` once
//! the common `phi(y)` term cancels. That is what keeps influence cells
//! convex polytopes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{dot, log, sq_dist};

/// Lower bound imposed on every coordinate for generators defined on the
/// open positive orthant.
pub const DOMAIN_FLOOR: f64 = 1e-9;

/// Convex generator of a Bregman divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// `phi(p) = |p|^2`, giving the squared Euclidean distance.
    SquaredNorm,
    /// `phi(p) = sum p_i ln p_i - p_i`, giving the generalized KL divergence.
    GeneralizedKl,
    /// `phi(p) = -sum ln p_i`, giving the Itakura-Saito divergence.
    ItakuraSaito,
}

impl Generator {
    pub fn value(&self, p: &[f64]) -> f64 {
        match self {
            Generator::SquaredNorm => dot(p, p),
            Generator::GeneralizedKl => p.iter().map(|&v| v * log(v) - v).sum(),
            Generator::ItakuraSaito => p.iter().map(|&v| -log(v)).sum(),
        }
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Generator::SquaredNorm => p.iter().map(|v| 2.0 * v).collect(),
            Generator::GeneralizedKl => p.iter().map(|&v| log(v)).collect(),
            Generator::ItakuraSaito => p.iter().map(|&v| -1.0 / v).collect(),
        }
    }

    /// Whether the generator needs strictly positive coordinates.
    pub fn positive_orthant(&self) -> bool {
        !matches!(self, Generator::SquaredNorm)
    }
}

/// Comparison rule between a point and a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DistanceMeasure {
    #[default]
    SquaredEuclidean,
    Bregman(Generator),
}

impl DistanceMeasure {
    /// `D(p | q)`. Callers are responsible for domain checks.
    pub fn divergence(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            DistanceMeasure::SquaredEuclidean
            | DistanceMeasure::Bregman(Generator::SquaredNorm) => sq_dist(p, q),
            DistanceMeasure::Bregman(Generator::GeneralizedKl) => {
                p.iter().zip(q).map(|(&a, &b)| a * log(a / b) - a + b).sum()
            }
            DistanceMeasure::Bregman(Generator::ItakuraSaito) => p
                .iter()
                .zip(q)
                .map(|(&a, &b)| a / b - log(a / b) - 1.0)
                .sum(),
        }
    }

    pub fn generator(&self) -> Generator {
        match self {
            DistanceMeasure::SquaredEuclidean => Generator::SquaredNorm,
            DistanceMeasure::Bregman(g) => *g,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        self.generator() == Generator::SquaredNorm
    }

    /// Coordinate floor for positive-orthant generators.
    pub fn domain_floor(&self) -> Option<f64> {
        self.generator().positive_orthant().then_some(DOMAIN_FLOOR)
    }

    pub fn in_domain(&self, p: &[f64]) -> bool {
        if !p.iter().all(|v| v.is_finite()) {
            return false;
        }
        !self.generator().positive_orthant() || p.iter().all(|&v| v > 0.0)
    }

    pub(crate) fn check_domain(&self, p: &[f64]) -> Result<()> {
        if self.in_domain(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain)
        }
    }

    /// Linear part of `D(., site)`: returns `(a, g)` with
    /// `D(y, site) = phi(y) + <a, y> + g`.
    pub(crate) fn site_form(&self, site: &[f64]) -> (Vec<f64>, f64) {
        match self.generator() {
            Generator::SquaredNorm => (site.iter().map(|v| -2.0 * v).collect(), dot(site, site)),
            g => {
                let grad = g.gradient(site);
                let constant = dot(&grad, site) - g.value(site);
                (grad.into_iter().map(|v| -v).collect(), constant)
            }
        }
    }
}
