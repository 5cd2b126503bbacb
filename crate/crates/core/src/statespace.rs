//! Walker Hilbert-space bookkeeping.
//!
//! A lattice of halfwidth `L` covers `-L..=L` on every axis. Amplitudes are
//! stored densely, position-major and coin-minor:
//!
//! * 1D: `index = (x + L) * 2 + c`
//! * 2D: `index = ((x + L) * (2L + 1) + (y + L)) * 4 + (2c + d)`
//!
//! so the coin pair `(c, d)` follows the Kronecker order `00, 01, 10, 11`.
//! Every module that builds matrices or reads amplitudes relies on this order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QwalkError, Result};

/// Tolerance used when checking that constructed states have unit norm.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimensionality {
    #[serde(rename = "1D")]
    One,
    #[serde(rename = "2D")]
    Two,
}

impl Dimensionality {
    /// Number of lattice axes.
    pub fn axes(self) -> usize {
        match self {
            Dimensionality::One => 1,
            Dimensionality::Two => 2,
        }
    }

    /// Dimension of the coin space: 2 for 1D, 4 for 2D.
    pub fn coin_dim(self) -> usize {
        match self {
            Dimensionality::One => 2,
            Dimensionality::Two => 4,
        }
    }
}

/// A lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Position {
    One(i64),
    Two(i64, i64),
}

impl Position {
    pub fn origin(dim: Dimensionality) -> Self {
        match dim {
            Dimensionality::One => Position::One(0),
            Dimensionality::Two => Position::Two(0, 0),
        }
    }

    pub fn dimensionality(self) -> Dimensionality {
        match self {
            Position::One(_) => Dimensionality::One,
            Position::Two(..) => Dimensionality::Two,
        }
    }

    pub fn x(self) -> i64 {
        match self {
            Position::One(x) | Position::Two(x, _) => x,
        }
    }

    pub fn y(self) -> Option<i64> {
        match self {
            Position::One(_) => None,
            Position::Two(_, y) => Some(y),
        }
    }

    /// Largest absolute coordinate (Chebyshev distance from the origin).
    pub fn max_abs(self) -> u64 {
        match self {
            Position::One(x) => x.unsigned_abs(),
            Position::Two(x, y) => x.unsigned_abs().max(y.unsigned_abs()),
        }
    }
}

/// Basis label `|x, c>` of a 1D walker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel1D {
    pub x: i64,
    pub c: u8,
}

/// Basis label `|x, y, c, d>` of a 2D walker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel2D {
    pub x: i64,
    pub y: i64,
    pub c: u8,
    pub d: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    One(BasisLabel1D),
    Two(BasisLabel2D),
}

impl BasisLabel {
    pub fn position(self) -> Position {
        match self {
            BasisLabel::One(l) => Position::One(l.x),
            BasisLabel::Two(l) => Position::Two(l.x, l.y),
        }
    }

    /// Coin component index within a site: `c` in 1D, `2c + d` in 2D.
    pub fn coin_index(self) -> usize {
        match self {
            BasisLabel::One(l) => l.c as usize,
            BasisLabel::Two(l) => 2 * l.c as usize + l.d as usize,
        }
    }
}

/// Square (or line) lattice `[-L, L]^dim` together with its packing rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: Dimensionality,
    halfwidth: usize,
}

impl Lattice {
    pub fn new(dim: Dimensionality, halfwidth: usize) -> Self {
        Lattice { dim, halfwidth }
    }

    pub fn one_d(halfwidth: usize) -> Self {
        Lattice::new(Dimensionality::One, halfwidth)
    }

    pub fn two_d(halfwidth: usize) -> Self {
        Lattice::new(Dimensionality::Two, halfwidth)
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.dim
    }

    pub fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    /// Sites per axis, `2L + 1`.
    pub fn side(&self) -> usize {
        2 * self.halfwidth + 1
    }

    pub fn coin_dim(&self) -> usize {
        self.dim.coin_dim()
    }

    pub fn num_sites(&self) -> usize {
        self.side().pow(self.dim.axes() as u32)
    }

    /// Length of the amplitude table: `2(2L+1)` in 1D, `[2(2L+1)]^2` in 2D.
    pub fn size(&self) -> usize {
        self.num_sites() * self.coin_dim()
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.dimensionality() == self.dim && pos.max_abs() <= self.halfwidth as u64
    }

    /// Offset of a coordinate along one axis, `v + L`.
    #[inline]
    pub(crate) fn axis_offset(&self, v: i64) -> usize {
        (v + self.halfwidth as i64) as usize
    }

    #[inline]
    pub(crate) fn axis_coord(&self, offset: usize) -> i64 {
        offset as i64 - self.halfwidth as i64
    }

    pub fn site_index(&self, pos: Position) -> Result<usize> {
        if pos.dimensionality() != self.dim {
            return Err(QwalkError::Validation(format!(
                "position {pos:?} does not match a {:?} lattice",
                self.dim
            )));
        }
        if !self.contains(pos) {
            return Err(QwalkError::Bounds(format!(
                "position {pos:?} outside halfwidth {}",
                self.halfwidth
            )));
        }
        Ok(match pos {
            Position::One(x) => self.axis_offset(x),
            Position::Two(x, y) => self.axis_offset(x) * self.side() + self.axis_offset(y),
        })
    }

    /// Inverse of [`Lattice::site_index`]. Panics on an out-of-range index.
    pub fn site_position(&self, site: usize) -> Position {
        assert!(site < self.num_sites(), "site index {site} out of range");
        match self.dim {
            Dimensionality::One => Position::One(self.axis_coord(site)),
            Dimensionality::Two => {
                let side = self.side();
                Position::Two(self.axis_coord(site / side), self.axis_coord(site % side))
            }
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.num_sites()).map(move |s| self.site_position(s))
    }

    pub fn pack(&self, label: BasisLabel) -> Result<usize> {
        let bad_coin = match label {
            BasisLabel::One(l) => l.c > 1,
            BasisLabel::Two(l) => l.c > 1 || l.d > 1,
        };
        if bad_coin {
            return Err(QwalkError::Bounds(format!("coin bit out of range in {label:?}")));
        }
        let site = self.site_index(label.position())?;
        Ok(site * self.coin_dim() + label.coin_index())
    }

    pub fn unpack(&self, index: usize) -> Result<BasisLabel> {
        if index >= self.size() {
            return Err(QwalkError::Bounds(format!(
                "index {index} outside 0..{}",
                self.size()
            )));
        }
        let k = self.coin_dim();
        let coin = index % k;
        Ok(match self.site_position(index / k) {
            Position::One(x) => BasisLabel::One(BasisLabel1D { x, c: coin as u8 }),
            Position::Two(x, y) => BasisLabel::Two(BasisLabel2D {
                x,
                y,
                c: (coin >> 1) as u8,
                d: (coin & 1) as u8,
            }),
        })
    }

}

/// Internal coin state: a unit vector of length 2 (1D) or 4 (2D).
#[derive(Debug, Clone, PartialEq)]
pub struct CoinState(Vec<Complex64>);

impl CoinState {
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        if components.len() != 2 && components.len() != 4 {
            return Err(QwalkError::Validation(format!(
                "coin state must have 2 or 4 components, got {}",
                components.len()
            )));
        }
        let norm = components.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QwalkError::Validation(format!(
                "coin state has norm {norm}, expected 1"
            )));
        }
        Ok(CoinState(components))
    }

    /// `|0>` or `|1>` (or the four 2D basis states), indexed by coin component.
    pub fn basis(dim: Dimensionality, k: usize) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim.coin_dim()];
        let slot = v
            .get_mut(k)
            .ok_or_else(|| QwalkError::Bounds(format!("coin basis index {k}")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(CoinState(v))
    }

    /// `(|0> + i|1>)/sqrt(2)`.
    pub fn symmetric_1d() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CoinState(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)])
    }

    /// `[(|0> + i|1>)/sqrt(2)]^{⊗2}`, the exchange-symmetric 2D initial coin.
    pub fn symmetric_2d() -> Self {
        let a = CoinState::symmetric_1d();
        CoinState::tensor(&a, &a).expect("two 1D coin states")
    }

    /// Product state `a ⊗ b` of two 1D coin states.
    pub fn tensor(a: &CoinState, b: &CoinState) -> Result<Self> {
        if a.0.len() != 2 || b.0.len() != 2 {
            return Err(QwalkError::Validation(
                "tensor product needs two 2-component coin states".into(),
            ));
        }
        let v = a
            .0
            .iter()
            .flat_map(|&p| b.0.iter().map(move |&q| p * q))
            .collect();
        Ok(CoinState(v))
    }

    pub fn dimensionality(&self) -> Dimensionality {
        if self.0.len() == 2 {
            Dimensionality::One
        } else {
            Dimensionality::Two
        }
    }

    pub fn components(&self) -> &[Complex64] {
        &self.0
    }
}

/// Dense wavefunction over `(position, coin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    lattice: Lattice,
    amplitudes: Vec<Complex64>,
    // Every site with max |coordinate| > support holds zero amplitude.
    support: usize,
}

impl WalkerState {
    /// Walker wholly localized at `origin` with internal state `coin`.
    pub fn localized(lattice: Lattice, origin: Position, coin: &CoinState) -> Result<Self> {
        if lattice.halfwidth() < 1 {
            return Err(QwalkError::Validation("halfwidth must be at least 1".into()));
        }
        if coin.dimensionality() != lattice.dimensionality() {
            return Err(QwalkError::Validation(format!(
                "{}-component coin state on a {:?} lattice",
                coin.components().len(),
                lattice.dimensionality()
            )));
        }
        let site = lattice.site_index(origin)?;
        let k = lattice.coin_dim();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); lattice.size()];
        amplitudes[site * k..(site + 1) * k].copy_from_slice(coin.components());
        Ok(WalkerState {
            lattice,
            amplitudes,
            support: origin.max_abs() as usize,
        })
    }

    /// Wraps an arbitrary amplitude table. No normalization is enforced.
    pub fn from_amplitudes(lattice: Lattice, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != lattice.size() {
            return Err(QwalkError::Validation(format!(
                "amplitude table has {} entries, lattice needs {}",
                amplitudes.len(),
                lattice.size()
            )));
        }
        Ok(WalkerState {
            lattice,
            amplitudes,
            support: lattice.halfwidth(),
        })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        WalkerState {
            lattice,
            amplitudes: vec![Complex64::new(0.0, 0.0); lattice.size()],
            support: 0,
        }
    }

    pub(crate) fn from_parts(lattice: Lattice, amplitudes: Vec<Complex64>, support: usize) -> Self {
        debug_assert_eq!(amplitudes.len(), lattice.size());
        WalkerState {
            lattice,
            amplitudes,
            support: support.min(lattice.halfwidth()),
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Radius (Chebyshev) outside of which all amplitudes are known to vanish.
    pub fn support(&self) -> usize {
        self.support
    }

    pub fn amplitude(&self, label: BasisLabel) -> Result<Complex64> {
        Ok(self.amplitudes[self.lattice.pack(label)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn renormalize(&self) -> Result<WalkerState> {
        let n = self.norm();
        if n == 0.0 {
            return Err(QwalkError::DegenerateState);
        }
        Ok(WalkerState {
            lattice: self.lattice,
            amplitudes: self.amplitudes.iter().map(|a| a / n).collect(),
            support: self.support,
        })
    }

    /// Probability per site, coin traced out, in site-index order.
    pub fn site_probabilities(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(self.lattice.coin_dim())
            .map(|site| site.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }
}
