//! Single- and multi-step walk evolution with phase defects.
//!
//! One step is, in order: the coin acts on each site's coin amplitudes, the
//! amplitudes of each site are multiplied by the defect phase of that
//! (source) site, and every coin component is translated by
//! `x -> x + (-1)^c` (and `y -> y + (-1)^d` in 2D). Coin `0` moves towards
//! positive coordinates.
//!
//! The 2D step with a 4×4 coin is also the joint step of two 1D walkers that
//! share that coin: walker one reads `c` and moves along `x`, walker two reads
//! `d` and moves along `y`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coins::{Coin, Coin2, Coin4, CoinField};
use crate::error::{QwalkError, Result};
use crate::statespace::{CoinState, Dimensionality, Lattice, Position, WalkerState};

/// Largest dense matrix dimension any builder will allocate.
pub const MAX_DENSE_DIM: usize = 16384;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Position-dependent phase `e^{iφ(x,y)}` picked up at the source site.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DefectMap {
    #[default]
    None,
    /// `e^{iφ δ_{y,0}}`: the whole line `y = 0`.
    LineY(f64),
    /// `e^{iφ(δ_{x,0} + δ_{y,0})}`: both axes; the origin gets `e^{2iφ}`.
    CrossXY(f64),
    /// `e^{iφ δ_{x,0} δ_{y,0}}`: the origin only.
    Point(f64),
    /// Explicit phases in radians; unlisted sites get phase 0.
    Custom(BTreeMap<Position, f64>),
}

impl DefectMap {
    /// Phase angle in radians at `pos`.
    ///
    /// On a 1D lattice `Point` and `CrossXY` both act at `x = 0`; `LineY` is
    /// rejected by [`DefectMap::check_against`].
    #[inline]
    pub fn phase(&self, pos: Position) -> f64 {
        let dx = (pos.x() == 0) as i32 as f64;
        let dy = pos.y().map_or(0.0, |y| (y == 0) as i32 as f64);
        match self {
            DefectMap::None => 0.0,
            DefectMap::LineY(phi) => phi * dy,
            DefectMap::CrossXY(phi) => match pos {
                Position::One(_) => phi * dx,
                Position::Two(..) => phi * (dx + dy),
            },
            DefectMap::Point(phi) => match pos {
                Position::One(_) => phi * dx,
                Position::Two(..) => phi * dx * dy,
            },
            DefectMap::Custom(table) => table.get(&pos).copied().unwrap_or(0.0),
        }
    }

    /// Unit-modulus factor `e^{i·phase(pos)}`.
    #[inline]
    pub fn factor(&self, pos: Position) -> Complex64 {
        Complex64::from_polar(1.0, self.phase(pos))
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, DefectMap::None)
    }

    pub fn check_against(&self, lattice: &Lattice) -> Result<()> {
        let finite = |phi: f64, what: &str| {
            if phi.is_finite() {
                Ok(())
            } else {
                Err(QwalkError::Validation(format!("{what} phase {phi} is not finite")))
            }
        };
        match self {
            DefectMap::None => Ok(()),
            DefectMap::LineY(phi) => {
                if lattice.dimensionality() == Dimensionality::One {
                    return Err(QwalkError::Validation(
                        "line defect on y = 0 needs a 2D lattice".into(),
                    ));
                }
                finite(*phi, "line")
            }
            DefectMap::CrossXY(phi) => finite(*phi, "cross"),
            DefectMap::Point(phi) => finite(*phi, "point"),
            DefectMap::Custom(table) => {
                for (pos, phi) in table {
                    if pos.dimensionality() != lattice.dimensionality() {
                        return Err(QwalkError::Validation(format!(
                            "custom defect entry {pos:?} does not match the lattice"
                        )));
                    }
                    finite(*phi, "custom")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// The walker must never reach the edge; doing so is an error.
    #[default]
    Open,
    /// `|±(L+1)> ≡ |∓L>` on every axis.
    Periodic,
}

/// Coin assignment matching the walk's dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub enum WalkCoin {
    One(CoinField<Coin2>),
    Two(CoinField<Coin4>),
}

impl WalkCoin {
    pub fn dimensionality(&self) -> Dimensionality {
        match self {
            WalkCoin::One(_) => Dimensionality::One,
            WalkCoin::Two(_) => Dimensionality::Two,
        }
    }

    /// Hadamard coin: `H` in 1D, `H⊗H` in 2D.
    pub fn hadamard(dim: Dimensionality) -> Self {
        let h = Coin2::hadamard();
        match dim {
            Dimensionality::One => WalkCoin::One(h.into()),
            Dimensionality::Two => WalkCoin::Two(Coin4::tensor(&h, &h).into()),
        }
    }

    fn check_against(&self, lattice: &Lattice) -> Result<()> {
        match self {
            WalkCoin::One(f) => f.check_against(lattice),
            WalkCoin::Two(f) => f.check_against(lattice),
        }
    }
}

/// Full configuration of one walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    pub steps: usize,
    /// Lattice halfwidth; `None` picks the smallest one the walk cannot leave.
    pub halfwidth: Option<usize>,
    pub coin: WalkCoin,
    pub defect: DefectMap,
    pub origin: Position,
    pub initial_coin: CoinState,
    pub boundary: Boundary,
}

impl WalkSpec {
    /// Hadamard walk from the origin with the exchange-symmetric initial coin.
    pub fn hadamard(dim: Dimensionality, steps: usize, defect: DefectMap) -> Self {
        WalkSpec {
            steps,
            halfwidth: None,
            coin: WalkCoin::hadamard(dim),
            defect,
            origin: Position::origin(dim),
            initial_coin: match dim {
                Dimensionality::One => CoinState::symmetric_1d(),
                Dimensionality::Two => CoinState::symmetric_2d(),
            },
            boundary: Boundary::Open,
        }
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.coin.dimensionality()
    }

    pub fn lattice(&self) -> Lattice {
        let reach = self.steps + self.origin.max_abs() as usize;
        Lattice::new(self.dimensionality(), self.halfwidth.unwrap_or(reach.max(1)))
    }

    pub fn validate(&self) -> Result<()> {
        let lattice = self.lattice();
        if self.origin.dimensionality() != lattice.dimensionality() {
            return Err(QwalkError::Validation(format!(
                "origin {:?} does not match a {:?} walk",
                self.origin,
                lattice.dimensionality()
            )));
        }
        if self.initial_coin.dimensionality() != lattice.dimensionality() {
            return Err(QwalkError::Validation("initial coin size does not match the walk".into()));
        }
        if self.boundary == Boundary::Open {
            let needed = self.steps as u64 + self.origin.max_abs();
            if (lattice.halfwidth() as u64) < needed {
                return Err(QwalkError::Validation(format!(
                    "open boundary needs halfwidth >= {needed}, got {}",
                    lattice.halfwidth()
                )));
            }
        }
        self.coin.check_against(&lattice)?;
        self.defect.check_against(&lattice)?;
        Ok(())
    }

    pub fn initial_state(&self) -> Result<WalkerState> {
        WalkerState::localized(self.lattice(), self.origin, &self.initial_coin)
    }
}

/// State after one step of an evolution.
#[derive(Debug, Clone)]
pub struct StepReport {
    /// 1-based step index.
    pub step: usize,
    pub state: WalkerState,
    /// `|1 - Σ|a|²|`.
    pub norm_residual: f64,
}

/// Per-coin displacement `(dx, dy)`; `dy` is 0 on 1D lattices.
pub(crate) type ShiftRule = [(i64, i64)];

pub(crate) const SHIFT_1D: [(i64, i64); 2] = [(1, 0), (-1, 0)];
pub(crate) const SHIFT_2D: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn wrap(v: i64, l: i64) -> i64 {
    let n = 2 * l + 1;
    (v + l).rem_euclid(n) - l
}

/// Reusable buffers for in-place-style sweeps.
#[derive(Debug, Default)]
pub(crate) struct Stepper {
    scratch: Vec<Complex64>,
}

impl Stepper {
    /// One step of `state` into `out` (same length, zero outside the old
    /// support box). Returns the new support radius and `Σ|a|²` of the result.
    pub(crate) fn step<C: Coin>(
        &mut self,
        state: &WalkerState,
        coin: &CoinField<C>,
        defect: &DefectMap,
        boundary: Boundary,
        shifts: &ShiftRule,
        out: &mut [Complex64],
    ) -> Result<(usize, f64)> {
        let lattice = state.lattice();
        let k = C::DIM;
        debug_assert_eq!(k, shifts.len());
        debug_assert_eq!(k, lattice.coin_dim());
        let l = lattice.halfwidth() as i64;
        let two_d = lattice.dimensionality() == Dimensionality::Two;
        let side = lattice.side();
        let row_sites = if two_d { side } else { 1 };
        let row_len = row_sites * k;
        let reach = shifts.iter().map(|&(dx, dy)| dx.abs().max(dy.abs())).max().unwrap_or(0);

        let r = state.support() as i64;
        let amps = state.amplitudes();
        if self.scratch.len() != amps.len() {
            self.scratch = vec![ZERO; amps.len()];
        }

        // Coin and source-site phase, restricted to the support box.
        let box_lo = (l - r) as usize;
        let box_hi = (l + r) as usize;
        let col_range = if two_d { box_lo..box_hi + 1 } else { 0..1 };
        self.scratch
            .par_chunks_mut(row_len)
            .zip(amps.par_chunks(row_len))
            .enumerate()
            .filter(|(row, _)| *row >= box_lo && *row <= box_hi)
            .for_each(|(row, (dst, src))| {
                let x = lattice.axis_coord(row);
                for col in col_range.clone() {
                    let site = row * row_sites + col;
                    let cell = &mut dst[col * k..(col + 1) * k];
                    cell.copy_from_slice(&src[col * k..(col + 1) * k]);
                    coin.get(site).apply(cell);
                    if !defect.is_trivial() {
                        let pos = if two_d {
                            Position::Two(x, lattice.axis_coord(col))
                        } else {
                            Position::One(x)
                        };
                        let f = defect.factor(pos);
                        for a in cell.iter_mut() {
                            *a *= f;
                        }
                    }
                }
            });

        let scratch = &self.scratch;
        let in_box = |v: i64| v.abs() <= r;

        if boundary == Boundary::Open && r + reach > l {
            for row in box_lo..=box_hi {
                let x = lattice.axis_coord(row);
                for col in col_range.clone() {
                    let y = if two_d { lattice.axis_coord(col) } else { 0 };
                    let base = (row * row_sites + col) * k;
                    for (ci, &(dx, dy)) in shifts.iter().enumerate() {
                        let leaves = (x + dx).abs() > l || (two_d && (y + dy).abs() > l);
                        if leaves && scratch[base + ci] != ZERO {
                            return Err(QwalkError::Bounds(format!(
                                "walker at ({x}, {y}) would leave the open lattice of halfwidth {l}"
                            )));
                        }
                    }
                }
            }
        }

        let new_r = (r + reach).min(l);
        let periodic = boundary == Boundary::Periodic;
        let out_lo = (l - new_r) as usize;
        let out_hi = (l + new_r) as usize;
        let out_cols = if two_d { out_lo..out_hi + 1 } else { 0..1 };

        let norm_sqr: f64 = out
            .par_chunks_mut(row_len)
            .enumerate()
            .filter(|(row, _)| *row >= out_lo && *row <= out_hi)
            .map(|(row, dst)| {
                let x = lattice.axis_coord(row);
                let mut acc = 0.0;
                for col in out_cols.clone() {
                    let y = if two_d { lattice.axis_coord(col) } else { 0 };
                    for (ci, &(dx, dy)) in shifts.iter().enumerate() {
                        let (mut sx, mut sy) = (x - dx, y - dy);
                        if periodic {
                            sx = wrap(sx, l);
                            sy = if two_d { wrap(sy, l) } else { 0 };
                        }
                        let v = if in_box(sx) && (!two_d || in_box(sy)) {
                            let srow = (sx + l) as usize;
                            let scol = if two_d { (sy + l) as usize } else { 0 };
                            scratch[(srow * row_sites + scol) * k + ci]
                        } else {
                            ZERO
                        };
                        acc += v.norm_sqr();
                        dst[col * k + ci] = v;
                    }
                }
                acc
            })
            .sum();

        Ok((new_r as usize, norm_sqr))
    }
}

fn apply_step_with<C: Coin>(
    state: &WalkerState,
    coin: &CoinField<C>,
    defect: &DefectMap,
    boundary: Boundary,
    shifts: &ShiftRule,
) -> Result<WalkerState> {
    let lattice = state.lattice();
    coin.check_against(&lattice)?;
    defect.check_against(&lattice)?;
    let mut out = vec![ZERO; lattice.size()];
    let (support, _) = Stepper::default().step(state, coin, defect, boundary, shifts, &mut out)?;
    Ok(WalkerState::from_parts(lattice, out, support))
}

/// One step of a 1D walk.
pub fn apply_step_1d(
    state: &WalkerState,
    coin: &CoinField<Coin2>,
    defect: &DefectMap,
    boundary: Boundary,
) -> Result<WalkerState> {
    apply_step_with(state, coin, defect, boundary, &SHIFT_1D)
}

/// One step of a 2D walk (equivalently, of two 1D walkers sharing a coin).
pub fn apply_step_2d(
    state: &WalkerState,
    coin: &CoinField<Coin4>,
    defect: &DefectMap,
    boundary: Boundary,
) -> Result<WalkerState> {
    apply_step_with(state, coin, defect, boundary, &SHIFT_2D)
}

/// Step-by-step evolution of a [`WalkSpec`].
///
/// Iterating yields one [`StepReport`] per step, each owning a copy of the
/// state. For large lattices use [`Evolution::advance`] and
/// [`Evolution::state`], which avoid the copy.
#[derive(Debug)]
pub struct Evolution {
    coin: WalkCoin,
    defect: DefectMap,
    boundary: Boundary,
    state: WalkerState,
    spare: Vec<Complex64>,
    stepper: Stepper,
    step: usize,
    total: usize,
}

impl Evolution {
    pub fn new(spec: &WalkSpec) -> Result<Self> {
        spec.validate()?;
        let state = spec.initial_state()?;
        Ok(Evolution {
            coin: spec.coin.clone(),
            defect: spec.defect.clone(),
            boundary: spec.boundary,
            spare: vec![ZERO; state.lattice().size()],
            state,
            stepper: Stepper::default(),
            step: 0,
            total: spec.steps,
        })
    }

    pub fn state(&self) -> &WalkerState {
        &self.state
    }

    /// Number of steps applied so far.
    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn steps_total(&self) -> usize {
        self.total
    }

    /// Applies the next step and returns its norm residual, or `None` once all
    /// steps are done.
    pub fn advance(&mut self) -> Result<Option<f64>> {
        if self.step >= self.total {
            return Ok(None);
        }
        let lattice = self.state.lattice();
        let (support, norm_sqr) = match &self.coin {
            WalkCoin::One(f) => self.stepper.step(
                &self.state,
                f,
                &self.defect,
                self.boundary,
                &SHIFT_1D,
                &mut self.spare,
            )?,
            WalkCoin::Two(f) => self.stepper.step(
                &self.state,
                f,
                &self.defect,
                self.boundary,
                &SHIFT_2D,
                &mut self.spare,
            )?,
        };
        let next = std::mem::take(&mut self.spare);
        let prev = std::mem::replace(&mut self.state, WalkerState::from_parts(lattice, next, support));
        self.spare = prev.into_amplitudes();
        self.step += 1;
        Ok(Some((1.0 - norm_sqr).abs()))
    }

    /// Runs the remaining steps and returns the final state.
    pub fn finish(mut self) -> Result<WalkerState> {
        while self.advance()?.is_some() {}
        Ok(self.state)
    }
}

impl Iterator for Evolution {
    type Item = Result<StepReport>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.advance() {
            Ok(Some(norm_residual)) => Some(Ok(StepReport {
                step: self.step,
                state: self.state.clone(),
                norm_residual,
            })),
            Ok(None) => None,
            Err(e) => {
                self.total = self.step;
                Some(Err(e))
            }
        }
    }
}

/// Starts the evolution described by `spec`; see [`Evolution`].
pub fn evolve(spec: &WalkSpec) -> Result<Evolution> {
    Evolution::new(spec)
}

/// Runs `spec` to completion and collects every step.
pub fn evolve_reports(spec: &WalkSpec) -> Result<Vec<StepReport>> {
    evolve(spec)?.collect()
}

pub(crate) fn check_dense_dim(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        Err(QwalkError::Size { dim, cap: MAX_DENSE_DIM })
    } else {
        Ok(())
    }
}

fn build_matrix_with<C: Coin>(
    lattice: &Lattice,
    coin: &CoinField<C>,
    defect: &DefectMap,
    boundary: Boundary,
    shifts: &ShiftRule,
) -> Result<DMatrix<Complex64>> {
    let n = lattice.size();
    check_dense_dim(n)?;
    coin.check_against(lattice)?;
    defect.check_against(lattice)?;
    let l = lattice.halfwidth() as i64;
    let k = C::DIM;
    let mut m = DMatrix::from_element(n, n, ZERO);
    for (site, pos) in lattice.positions().enumerate() {
        let f = defect.factor(pos);
        let c = coin.get(site);
        for (out_coin, &(dx, dy)) in shifts.iter().enumerate() {
            let dest = match pos {
                Position::One(x) => Position::One(x + dx),
                Position::Two(x, y) => Position::Two(x + dx, y + dy),
            };
            let dest = match (boundary, dest) {
                (Boundary::Periodic, Position::One(x)) => Position::One(wrap(x, l)),
                (Boundary::Periodic, Position::Two(x, y)) => Position::Two(wrap(x, l), wrap(y, l)),
                (Boundary::Open, d) if !lattice.contains(d) => continue,
                (Boundary::Open, d) => d,
            };
            let row = lattice.site_index(dest)? * k + out_coin;
            for in_coin in 0..k {
                m[(row, site * k + in_coin)] = f * c.entry(out_coin, in_coin);
            }
        }
    }
    Ok(m)
}

/// Dense matrix of one step acting on packed state vectors.
///
/// Entry `((shift(x, c), c), (x, c'))` is `e^{iφ(x)} C^x[c, c']`. With
/// [`Boundary::Open`] the terms that would leave the lattice are dropped, so
/// the matrix is unitary only under [`Boundary::Periodic`].
pub fn build_step_matrix(
    lattice: &Lattice,
    coin: &WalkCoin,
    defect: &DefectMap,
    boundary: Boundary,
) -> Result<DMatrix<Complex64>> {
    match coin {
        WalkCoin::One(f) => build_matrix_with(lattice, f, defect, boundary, &SHIFT_1D),
        WalkCoin::Two(f) => build_matrix_with(lattice, f, defect, boundary, &SHIFT_2D),
    }
}
