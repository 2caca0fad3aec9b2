//! Admissibility and observability of the moving-wall problem.
//!
//! Boundary observation is the Neumann trace u_x at x = 0 and/or x = ℓ(t);
//! point observation is u(a, t) at a fixed interior point. On the span of
//! the first N modes the output energy is a Hermitian form, and its extremal
//! generalized eigenvalues against the initial-data norm are the sharp
//! admissibility/observability constants there.

mod admissibility;
mod gramian;
mod lp;
mod multiplier;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Channel;
use crate::quadrature::even_at_least;

pub use admissibility::{
    admissibility_constant, admissibility_ratio_exact, admissibility_ratio_trajectory,
    MultiplierFunction, MultiplierPreset,
};
pub use gramian::{
    boundary_gramian, check_observable, observability_constant_estimate, point_gramian,
    quadrature_gramian, random_search_min, t_param, GeneralizedEigen, GramianMatrix,
    ObservabilityEstimate, NON_OBSERVABLE_THRESHOLD,
};
pub use lp::{holder_chain, lp_integral, lp_normalised_ratio, lp_observation, HolderReport};
pub use multiplier::{multiplier_residual, MultiplierReport};

/// What is observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    BoundaryLeft,
    BoundaryRight,
    BoundaryBoth,
    Point { a: f64 },
}

impl ObservationKind {
    pub fn channels(&self) -> Vec<Channel> {
        match *self {
            ObservationKind::BoundaryLeft => vec![Channel::Left],
            ObservationKind::BoundaryRight => vec![Channel::Right],
            ObservationKind::BoundaryBoth => vec![Channel::Left, Channel::Right],
            ObservationKind::Point { a } => vec![Channel::Point(a)],
        }
    }

    pub fn is_boundary(&self) -> bool {
        !matches!(self, ObservationKind::Point { .. })
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            ObservationKind::BoundaryLeft => "boundary_left",
            ObservationKind::BoundaryRight => "boundary_right",
            ObservationKind::BoundaryBoth => "boundary_both",
            ObservationKind::Point { .. } => "point",
        }
    }
}

impl fmt::Display for ObservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservationKind::Point { a } => write!(f, "point:{a}"),
            other => f.write_str(other.label()),
        }
    }
}

/// Accepts `left|right|both|boundary_left|boundary_right|boundary_both|point:a`.
impl FromStr for ObservationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "left" | "boundary_left" => ObservationKind::BoundaryLeft,
            "right" | "boundary_right" => ObservationKind::BoundaryRight,
            "both" | "boundary_both" => ObservationKind::BoundaryBoth,
            _ => {
                let a = s
                    .strip_prefix("point:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Invalid(format!("unknown observation kind '{s}'")))?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::domain("a", a, "(0, 1)"));
                }
                ObservationKind::Point { a }
            }
        };
        Ok(kind)
    }
}

/// Simpson panel count resolving the fastest mode phase π²N²t/ℓ with at
/// least 64 points per period.
pub fn oscillatory_intervals(modes: usize, tau: f64) -> usize {
    let periods = PI * (modes * modes) as f64 * tau / 2.0;
    even_at_least(((64.0 * periods).ceil() as usize).max(2048))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parsing() {
        assert_eq!("both".parse::<ObservationKind>().unwrap(), ObservationKind::BoundaryBoth);
        assert_eq!(
            "boundary_left".parse::<ObservationKind>().unwrap(),
            ObservationKind::BoundaryLeft
        );
        assert_eq!(
            "point:0.25".parse::<ObservationKind>().unwrap(),
            ObservationKind::Point { a: 0.25 }
        );
        assert!("point:1.5".parse::<ObservationKind>().is_err());
        assert!("middle".parse::<ObservationKind>().is_err());
        let k = ObservationKind::Point { a: 0.41 };
        assert_eq!(k.to_string().parse::<ObservationKind>().unwrap(), k);
    }
}
