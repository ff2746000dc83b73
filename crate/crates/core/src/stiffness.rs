//! Desired rotational stiffness as a function of the path parameter `s ∈ [0, 1]`
//! (`s = 0` at the start orientation, `s = 1` at the goal).

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, row_major};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StiffnessProfile {
    /// `k · I₃`.
    Constant { k: f64 },
    /// `k_o(s) · I₃`, smoothstep-blended between breakpoints `(s, k)`.
    Piecewise { breakpoints: Vec<(f64, f64)> },
    /// Full matrices at nodes, linearly interpolated entrywise.
    Tabulated { nodes: Vec<TabulatedNode> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedNode {
    pub s: f64,
    #[serde(with = "row_major")]
    pub k: Matrix3<f64>,
}

impl StiffnessProfile {
    pub fn constant(k: f64) -> Self {
        StiffnessProfile::Constant { k }
    }

    pub fn piecewise(breakpoints: Vec<(f64, f64)>) -> Self {
        StiffnessProfile::Piecewise { breakpoints }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StiffnessProfile::Constant { k } => {
                if !(*k > 0.0) || !k.is_finite() {
                    return Err(Error::Validation(format!(
                        "stiffness k = {k} must be positive"
                    )));
                }
            }
            StiffnessProfile::Piecewise { breakpoints } => {
                check_knots(breakpoints.iter().map(|b| b.0))?;
                if let Some((s, k)) = breakpoints
                    .iter()
                    .find(|(_, k)| !(*k > 0.0) || !k.is_finite())
                {
                    return Err(Error::Validation(format!(
                        "stiffness breakpoint at s = {s} has non-positive k = {k}"
                    )));
                }
            }
            StiffnessProfile::Tabulated { nodes } => {
                check_knots(nodes.iter().map(|n| n.s))?;
                if let Some(n) = nodes.iter().find(|n| !mat::is_spd(&n.k, 1e-12)) {
                    return Err(Error::Validation(format!(
                        "tabulated stiffness at s = {} is not symmetric positive-definite",
                        n.s
                    )));
                }
            }
        }
        Ok(())
    }

    /// `K_o(s)`; `s` is clamped into the profile's range.
    pub fn eval(&self, s: f64) -> Matrix3<f64> {
        match self {
            StiffnessProfile::Constant { k } => Matrix3::identity() * *k,
            StiffnessProfile::Piecewise { breakpoints } => {
                let (j, t) = locate(breakpoints.iter().map(|b| b.0), s);
                let k = match t {
                    None => breakpoints[j].1,
                    Some(t) => {
                        let (k0, k1) = (breakpoints[j].1, breakpoints[j + 1].1);
                        k0 + (k1 - k0) * smoothstep(t)
                    }
                };
                Matrix3::identity() * k
            }
            StiffnessProfile::Tabulated { nodes } => {
                let (j, t) = locate(nodes.iter().map(|n| n.s), s);
                match t {
                    None => nodes[j].k,
                    Some(t) => nodes[j].k * (1.0 - t) + nodes[j + 1].k * t,
                }
            }
        }
    }

    /// Same profile with every stiffness multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            StiffnessProfile::Constant { k } => StiffnessProfile::Constant { k: k * factor },
            StiffnessProfile::Piecewise { breakpoints } => StiffnessProfile::Piecewise {
                breakpoints: breakpoints.iter().map(|(s, k)| (*s, k * factor)).collect(),
            },
            StiffnessProfile::Tabulated { nodes } => StiffnessProfile::Tabulated {
                nodes: nodes
                    .iter()
                    .map(|n| TabulatedNode {
                        s: n.s,
                        k: n.k * factor,
                    })
                    .collect(),
            },
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn check_knots(s: impl Iterator<Item = f64>) -> Result<()> {
    let s: Vec<f64> = s.collect();
    if s.is_empty() {
        return Err(Error::Validation("stiffness profile has no knots".into()));
    }
    if s.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::Validation(
            "stiffness knots must lie in [0, 1]".into(),
        ));
    }
    if s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation(
            "stiffness knots must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Segment index and local parameter; `None` when `s` falls on or beyond an end knot.
fn locate(knots: impl Iterator<Item = f64>, s: f64) -> (usize, Option<f64>) {
    let knots: Vec<f64> = knots.collect();
    let last = knots.len() - 1;
    if s <= knots[0] {
        return (0, None);
    }
    if s >= knots[last] {
        return (last, None);
    }
    let j = knots.partition_point(|k| *k <= s) - 1;
    let t = (s - knots[j]) / (knots[j + 1] - knots[j]);
    (j, Some(t))
}
