//! Observables: position distributions, marginals, variances, recurrence
//! probability, the 1-norm discrepancy and the classical random-walk baseline.

use std::fmt;
use std::str::FromStr;

use crate::error::{QwalkError, Result};
use crate::statespace::{Dimensionality, Lattice, Position, WalkerState};

/// Tolerance on `Σ P = 1` for a distribution.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-10;

/// Nonnegative probabilities over the sites of a lattice, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    lattice: Lattice,
    probs: Vec<f64>,
}

impl Distribution {
    /// `probs` is indexed by [`Lattice::site_index`].
    pub fn new(lattice: Lattice, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != lattice.num_sites() {
            return Err(QwalkError::Validation(format!(
                "distribution has {} entries, lattice has {} sites",
                probs.len(),
                lattice.num_sites()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(QwalkError::Validation(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(QwalkError::Validation(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Distribution { lattice, probs })
    }

    /// Scales nonnegative weights (e.g. raw counts) to unit sum.
    pub fn normalized(lattice: Lattice, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(QwalkError::DegenerateState);
        }
        Distribution::new(lattice, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn delta(lattice: Lattice, at: Position) -> Result<Self> {
        let mut probs = vec![0.0; lattice.num_sites()];
        probs[lattice.site_index(at)?] = 1.0;
        Ok(Distribution { lattice, probs })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.lattice.dimensionality()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Probability at `pos`; zero outside the lattice.
    pub fn get(&self, pos: Position) -> f64 {
        self.lattice
            .site_index(pos)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    /// `(position, probability)` pairs in site order.
    pub fn iter(&self) -> impl Iterator<Item = (Position, f64)> + '_ {
        self.lattice.positions().zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Position distribution of a walker, coin traced out.
pub fn distribution(state: &WalkerState) -> Distribution {
    Distribution {
        lattice: state.lattice(),
        probs: state.site_probabilities(),
    }
}

fn check_same_dim(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.dimensionality() != q.dimensionality() {
        return Err(QwalkError::Validation(format!(
            "cannot compare a {:?} and a {:?} distribution",
            p.dimensionality(),
            q.dimensionality()
        )));
    }
    Ok(())
}

/// `½ Σ |P - Q|`, with the smaller lattice zero-padded to the larger one.
pub fn l1_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same_dim(p, q)?;
    let big = Lattice::new(
        p.dimensionality(),
        p.lattice.halfwidth().max(q.lattice.halfwidth()),
    );
    Ok(0.5 * big.positions().map(|pos| (p.get(pos) - q.get(pos)).abs()).sum::<f64>())
}

/// `max |P - Q|` over the union of both supports.
pub fn max_abs_difference(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same_dim(p, q)?;
    let big = Lattice::new(
        p.dimensionality(),
        p.lattice.halfwidth().max(q.lattice.halfwidth()),
    );
    Ok(big
        .positions()
        .map(|pos| (p.get(pos) - q.get(pos)).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

impl FromStr for Axis {
    type Err = QwalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            other => Err(QwalkError::Validation(format!("unknown axis {other:?}"))),
        }
    }
}

/// Sums a 2D distribution over the other axis.
pub fn marginal(p: &Distribution, axis: Axis) -> Result<Distribution> {
    if p.dimensionality() != Dimensionality::Two {
        return Err(QwalkError::Validation("marginal needs a 2D distribution".into()));
    }
    let l = p.lattice.halfwidth();
    let line = Lattice::one_d(l);
    let mut probs = vec![0.0; line.num_sites()];
    for (pos, v) in p.iter() {
        let Position::Two(x, y) = pos else { unreachable!() };
        let coord = match axis {
            Axis::X => x,
            Axis::Y => y,
        };
        probs[line.axis_offset(coord)] += v;
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= total);
    Ok(Distribution { lattice: line, probs })
}

fn axis_values(p: &Distribution, axis: Axis) -> Result<Vec<(i64, f64)>> {
    match (p.dimensionality(), axis) {
        (Dimensionality::One, Axis::X) => Ok(p.iter().map(|(pos, v)| (pos.x(), v)).collect()),
        (Dimensionality::One, Axis::Y) => Err(QwalkError::Validation(
            "a 1D distribution has no y axis".into(),
        )),
        (Dimensionality::Two, _) => Ok(marginal(p, axis)?
            .iter()
            .map(|(pos, v)| (pos.x(), v))
            .collect()),
    }
}

/// `Σ x P(x)` along `axis`.
pub fn mean(p: &Distribution, axis: Axis) -> Result<f64> {
    Ok(axis_values(p, axis)?.iter().map(|&(x, v)| x as f64 * v).sum())
}

/// Variance about the mean, `Σ x² P(x) - (Σ x P(x))²`, along `axis`.
pub fn variance(p: &Distribution, axis: Axis) -> Result<f64> {
    let values = axis_values(p, axis)?;
    let m: f64 = values.iter().map(|&(x, v)| x as f64 * v).sum();
    let second: f64 = values.iter().map(|&(x, v)| (x * x) as f64 * v).sum();
    Ok((second - m * m).max(0.0))
}

/// Probability of finding the walker at the origin.
pub fn recurrence_probability(p: &Distribution) -> f64 {
    p.get(Position::origin(p.dimensionality()))
}

/// `P(x, y) = Px(x) · Py(y)` on the 2D lattice of the larger halfwidth.
pub fn outer_product(px: &Distribution, py: &Distribution) -> Result<Distribution> {
    if px.dimensionality() != Dimensionality::One || py.dimensionality() != Dimensionality::One {
        return Err(QwalkError::Validation("outer product needs two 1D distributions".into()));
    }
    let lattice = Lattice::two_d(px.lattice.halfwidth().max(py.lattice.halfwidth()));
    let probs = lattice
        .positions()
        .map(|pos| {
            let Position::Two(x, y) = pos else { unreachable!() };
            px.get(Position::One(x)) * py.get(Position::One(y))
        })
        .collect();
    Ok(Distribution { lattice, probs })
}

/// Symmetric unit-step classical random walk after `t` steps:
/// `P(x) = C(t, (t+x)/2) / 2^t` for `x ≡ t (mod 2)`.
pub fn classical_rw_distribution(t: usize) -> Distribution {
    let lattice = Lattice::one_d(t);
    let mut probs = vec![0.0; lattice.num_sites()];
    // ln C(t, k) accumulated incrementally; stays finite for large t.
    let ln2t = t as f64 * std::f64::consts::LN_2;
    let mut ln_choose = 0.0f64;
    for k in 0..=t {
        if k > 0 {
            ln_choose += ((t - k + 1) as f64).ln() - (k as f64).ln();
        }
        let x = 2 * k as i64 - t as i64;
        probs[lattice.axis_offset(x)] = (ln_choose - ln2t).exp();
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= total);
    Distribution { lattice, probs }
}

/// Per-step observables of a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSummary {
    pub step: usize,
    pub recurrence: f64,
    pub variance_x: f64,
    /// `None` for 1D walks.
    pub variance_y: Option<f64>,
    /// 1-norm distance to a reference distribution, when one is given.
    pub discrepancy: Option<f64>,
}

impl WalkSummary {
    pub fn of(step: usize, p: &Distribution, reference: Option<&Distribution>) -> Result<Self> {
        let variance_y = match p.dimensionality() {
            Dimensionality::One => None,
            Dimensionality::Two => Some(variance(p, Axis::Y)?),
        };
        Ok(WalkSummary {
            step,
            recurrence: recurrence_probability(p),
            variance_x: variance(p, Axis::X)?,
            variance_y,
            discrepancy: reference.map(|r| l1_distance(p, r)).transpose()?,
        })
    }
}
