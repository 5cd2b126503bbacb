//! Two 1D walkers sharing a four-dimensional coin versus one 2D walker.
//!
//! The joint coordinates `(x, y)` of the two walkers are carried to the 2D
//! walker's coordinates by `X = x + y`, `Y = x - y`. Under this map the joint
//! diagonal moves `(±1, ±1)` become axis-aligned moves of length 2:
//!
//! | coin `cd` | walkers `(dx, dy)` | 2D walker `(dX, dY)` |
//! |-----------|--------------------|----------------------|
//! | `00`      | `(+1, +1)`         | `(+2, 0)`            |
//! | `01`      | `(+1, -1)`         | `(0, +2)`            |
//! | `10`      | `(-1, +1)`         | `(0, -2)`            |
//! | `11`      | `(-1, -1)`         | `(-2, 0)`            |
//!
//! The 2D walker lives on the lattice of halfwidth `2L`; only the
//! equal-parity sites with `|X| + |Y| <= 2L` (the image of `[-L, L]^2`) carry
//! amplitude. Its periodic identification is the image of the two-walker
//! torus: `(X, Y) ~ (X + n, Y + n) ~ (X + n, Y - n)` with `n = 2L + 1`. The
//! remaining sites of the box are spectators that the 2D step leaves alone,
//! and the basis permutation pairs them with padding states on the two-walker
//! side, so both operators are compared as square matrices of equal size.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::Distribution;
use crate::coins::{random_unitary2, su4_compose, Coin, Coin2, Coin4, CoinField};
use crate::error::{QwalkError, Result};
use crate::evolution::{
    build_step_matrix, check_dense_dim, Boundary, DefectMap, Stepper, WalkCoin,
};
use crate::statespace::{CoinState, Dimensionality, Lattice, Position, WalkerState};

/// Tolerance for matrix-level isomorphism checks.
pub const ISOMORPHISM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Per-coin moves of the 2D walker on the image lattice.
pub const CARDINAL_SHIFT: [(i64, i64); 4] = [(2, 0), (0, 2), (0, -2), (-2, 0)];

/// Carries the walkers' joint coordinates to the 2D walker's coordinates.
#[derive(Debug, Clone, Copy)]
pub struct CoordinateMap {
    forward: fn(i64, i64) -> (i64, i64),
}

impl CoordinateMap {
    /// `x ↦ x + y`, `y ↦ x - y`.
    pub fn standard() -> Self {
        CoordinateMap { forward: |x, y| (x + y, x - y) }
    }

    /// Any other map, e.g. for negative controls.
    pub fn new(forward: fn(i64, i64) -> (i64, i64)) -> Self {
        CoordinateMap { forward }
    }

    pub fn apply(&self, x: i64, y: i64) -> (i64, i64) {
        (self.forward)(x, y)
    }

    pub fn apply_position(&self, pos: Position) -> Result<Position> {
        match pos {
            Position::Two(x, y) => {
                let (a, b) = self.apply(x, y);
                Ok(Position::Two(a, b))
            }
            Position::One(_) => Err(QwalkError::Validation(
                "coordinate map acts on 2D positions".into(),
            )),
        }
    }
}

/// Lattice of the 2D walker for two walkers of halfwidth `l`.
pub fn image_lattice(l: usize) -> Lattice {
    Lattice::two_d(2 * l)
}

/// Whether `(X, Y)` is one of the active 2D-walker sites for halfwidth `l`.
pub fn in_image(l: usize, big_x: i64, big_y: i64) -> bool {
    (big_x - big_y).rem_euclid(2) == 0 && big_x.abs() + big_y.abs() <= 2 * l as i64
}

/// Reduces an equal-parity point to the active domain modulo the 2D torus.
fn canonical(l: usize, (big_x, big_y): (i64, i64)) -> (i64, i64) {
    debug_assert_eq!((big_x - big_y).rem_euclid(2), 0);
    let l = l as i64;
    let n = 2 * l + 1;
    let u = ((big_x + big_y) / 2 + l).rem_euclid(n) - l;
    let v = ((big_x - big_y) / 2 + l).rem_euclid(n) - l;
    (u + v, u - v)
}

/// Permutation `Π` of the 2D-walker basis; column `j` is `e_{π(j)}`.
///
/// Columns `0..4(2L+1)^2` are the two-walker basis states `|x, y, c, d>`,
/// sent to `|map(x, y), c, d>`. The remaining columns are padding states,
/// sent in increasing order to the 2D states not hit by the map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisPermutation {
    walker_dim: usize,
    perm: Vec<usize>,
}

impl BasisPermutation {
    pub fn new(l: usize, map: &CoordinateMap) -> Result<Self> {
        let pair = Lattice::two_d(l);
        let image = image_lattice(l);
        check_dense_dim(image.size())?;
        let mut perm = Vec::with_capacity(image.size());
        let mut used = vec![false; image.size()];
        for pos in pair.positions() {
            let site = image.site_index(map.apply_position(pos)?)?;
            for k in 0..4 {
                let row = site * 4 + k;
                if std::mem::replace(&mut used[row], true) {
                    return Err(QwalkError::Validation(format!(
                        "coordinate map is not injective at {pos:?}"
                    )));
                }
                perm.push(row);
            }
        }
        perm.extend((0..image.size()).filter(|&i| !used[i]));
        Ok(BasisPermutation { walker_dim: pair.size(), perm })
    }

    /// Size of the full (padded) basis.
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Dimension of the unpadded two-walker basis.
    pub fn walker_dim(&self) -> usize {
        self.walker_dim
    }

    /// `π(j)`.
    pub fn target(&self, j: usize) -> usize {
        self.perm[j]
    }

    /// Exactly one 1 in every row and every column.
    pub fn is_permutation(&self) -> bool {
        let mut hits = vec![0u32; self.perm.len()];
        for &r in &self.perm {
            if r >= hits.len() {
                return false;
            }
            hits[r] += 1;
        }
        hits.iter().all(|&h| h == 1)
    }

    /// `Π` as a 0/1 integer matrix.
    pub fn to_int_matrix(&self) -> DMatrix<i64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, &i) in self.perm.iter().enumerate() {
            m[(i, j)] = 1;
        }
        m
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        self.to_int_matrix().map(|v| Complex64::new(v as f64, 0.0))
    }

    /// `Π^† U Π`, computed by index relabeling.
    pub fn conjugate(&self, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.dim();
        assert_eq!(u.shape(), (n, n));
        DMatrix::from_fn(n, n, |i, j| u[(self.perm[i], self.perm[j])])
    }
}

/// One joint step of two 1D walkers of halfwidth `l` (periodic) sharing
/// `coin`: the coin acts on `(c, d)`, then walker one moves by `(-1)^c` and
/// walker two by `(-1)^d`.
pub fn build_two_walker_matrix(
    l: usize,
    coin: &CoinField<Coin4>,
    defect: &DefectMap,
) -> Result<DMatrix<Complex64>> {
    build_step_matrix(
        &Lattice::two_d(l),
        &WalkCoin::Two(coin.clone()),
        defect,
        Boundary::Periodic,
    )
}

/// One step of the 2D walker on [`image_lattice`]`(l)`: coin, source-site
/// phase, then the axis-aligned moves of [`CARDINAL_SHIFT`], wrapped on the
/// image torus. Spectator sites are left unchanged.
///
/// `coin` and `defect` are indexed by image-lattice positions.
pub fn build_cardinal_matrix(
    l: usize,
    coin: &CoinField<Coin4>,
    defect: &DefectMap,
) -> Result<DMatrix<Complex64>> {
    let image = image_lattice(l);
    let n = image.size();
    check_dense_dim(n)?;
    coin.check_against(&image)?;
    defect.check_against(&image)?;
    let mut m = DMatrix::from_element(n, n, ZERO);
    for (site, pos) in image.positions().enumerate() {
        let Position::Two(big_x, big_y) = pos else { unreachable!() };
        if !in_image(l, big_x, big_y) {
            for k in 0..4 {
                m[(site * 4 + k, site * 4 + k)] = ONE;
            }
            continue;
        }
        let f = defect.factor(pos);
        let c = coin.get(site);
        for (out_coin, &(dx, dy)) in CARDINAL_SHIFT.iter().enumerate() {
            let (tx, ty) = canonical(l, (big_x + dx, big_y + dy));
            let row = image.site_index(Position::Two(tx, ty))? * 4 + out_coin;
            for in_coin in 0..4 {
                m[(row, site * 4 + in_coin)] = f * c.entry(out_coin, in_coin);
            }
        }
    }
    Ok(m)
}

/// Coin field of the 2D walker induced by a two-walker coin field.
pub fn transform_coin_field(
    l: usize,
    coin: &CoinField<Coin4>,
    map: &CoordinateMap,
) -> Result<CoinField<Coin4>> {
    match coin {
        CoinField::Uniform(c) => Ok(CoinField::Uniform(*c)),
        CoinField::PerSite(_) => {
            let pair = Lattice::two_d(l);
            coin.check_against(&pair)?;
            let image = image_lattice(l);
            let mut out = vec![Coin4::identity(); image.num_sites()];
            for (site, pos) in pair.positions().enumerate() {
                out[image.site_index(map.apply_position(pos)?)?] = *coin.get(site);
            }
            Ok(CoinField::PerSite(out))
        }
    }
}

/// Defect map of the 2D walker induced by a two-walker defect map, as an
/// explicit table on the image lattice. A line `y = 0` becomes the diagonal
/// `X = Y`.
pub fn transform_defect(l: usize, defect: &DefectMap, map: &CoordinateMap) -> Result<DefectMap> {
    let pair = Lattice::two_d(l);
    defect.check_against(&pair)?;
    let mut table = std::collections::BTreeMap::new();
    for pos in pair.positions() {
        let phi = defect.phase(pos);
        if phi != 0.0 {
            table.insert(map.apply_position(pos)?, phi);
        }
    }
    Ok(DefectMap::Custom(table))
}

fn pad_identity(u: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let k = u.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i < k && j < k {
            u[(i, j)]
        } else if i == j {
            ONE
        } else {
            ZERO
        }
    })
}

fn deviation_after_conjugation(
    walkers: &DMatrix<Complex64>,
    single: &DMatrix<Complex64>,
    perm: &BasisPermutation,
) -> f64 {
    let n = perm.dim();
    let padded = pad_identity(walkers, n);
    let mut worst = 0.0f64;
    for j in 0..n {
        let pj = perm.target(j);
        for i in 0..n {
            worst = worst.max((padded[(i, j)] - single[(perm.target(i), pj)]).norm());
        }
    }
    worst
}

/// `max |U^{1D1D} - Π^† U^{2D} Π|` under an arbitrary coordinate map.
pub fn verify_isomorphism_with(
    l: usize,
    coin: &CoinField<Coin4>,
    defect: &DefectMap,
    map: &CoordinateMap,
) -> Result<f64> {
    let perm = BasisPermutation::new(l, map)?;
    let walkers = build_two_walker_matrix(l, coin, defect)?;
    let single = build_cardinal_matrix(
        l,
        &transform_coin_field(l, coin, map)?,
        &transform_defect(l, defect, map)?,
    )?;
    Ok(deviation_after_conjugation(&walkers, &single, &perm))
}

/// `max |U^{1D1D} - Π^† U^{2D} Π|` for two walkers of halfwidth `l` sharing
/// `coin`, with the standard coordinate map.
pub fn verify_isomorphism(l: usize, coin: &CoinField<Coin4>, defect: &DefectMap) -> Result<f64> {
    verify_isomorphism_with(l, coin, defect, &CoordinateMap::standard())
}

/// Compares the pure translations (identity coin, no defect) under `map`.
pub fn check_translation_equivalence_with(l: usize, map: &CoordinateMap) -> Result<f64> {
    verify_isomorphism_with(l, &Coin4::identity().into(), &DefectMap::None, map)
}

/// Translation-only comparison with the standard map; 0 when the two
/// translation permutations coincide.
pub fn check_translation_equivalence(l: usize) -> Result<f64> {
    check_translation_equivalence_with(l, &CoordinateMap::standard())
}

/// Family a random isomorphism-trial coin is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    /// `A ⊗ B` with random U(2) factors.
    Tensor,
    /// `Ξ^τ` with random `τ`.
    FractionalSwap,
    /// `(A ⊗ B) Ξ^τ (C ⊗ D)`.
    Product,
    /// Independent random product coins on every site.
    SiteDependent,
}

impl TrialKind {
    pub const ALL: [TrialKind; 4] = [
        TrialKind::Tensor,
        TrialKind::FractionalSwap,
        TrialKind::Product,
        TrialKind::SiteDependent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrialKind::Tensor => "tensor",
            TrialKind::FractionalSwap => "fractional_swap",
            TrialKind::Product => "product",
            TrialKind::SiteDependent => "site_dependent",
        }
    }
}

fn random_product<R: Rng + ?Sized>(rng: &mut R) -> Coin4 {
    let tensor = |rng: &mut R| Coin4::tensor(&random_unitary2(rng), &random_unitary2(rng));
    let a = tensor(rng);
    let xi = Coin4::fractional_swap(rng.random_range(-1.0..2.0));
    let b = tensor(rng);
    a * xi * b
}

/// Draws a coin field of the given family for a lattice of halfwidth `l`.
pub fn random_trial_coin<R: Rng + ?Sized>(rng: &mut R, kind: TrialKind, l: usize) -> CoinField<Coin4> {
    match kind {
        TrialKind::Tensor => Coin4::tensor(&random_unitary2(rng), &random_unitary2(rng)).into(),
        TrialKind::FractionalSwap => Coin4::fractional_swap(rng.random_range(0.0..1.0)).into(),
        TrialKind::Product => random_product(rng).into(),
        TrialKind::SiteDependent => CoinField::from_fn(&Lattice::two_d(l), |_| random_product(rng)),
    }
}

/// Outcome of one random isomorphism trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub index: usize,
    pub kind: TrialKind,
    pub deviation: f64,
}

/// Runs `trials` random isomorphism checks at halfwidth `l`. Trial `i` uses
/// family `TrialKind::ALL[i % 4]` and its own generator seeded from
/// `(seed, i)`, so results do not depend on scheduling.
pub fn isomorphism_trials(l: usize, trials: usize, seed: u64) -> Result<Vec<TrialResult>> {
    check_dense_dim(image_lattice(l).size())?;
    (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64 + 1);
            let kind = TrialKind::ALL[index % TrialKind::ALL.len()];
            let coin = random_trial_coin(&mut rng, kind, l);
            let deviation = verify_isomorphism(l, &coin, &DefectMap::None)?;
            Ok(TrialResult { index, kind, deviation })
        })
        .collect()
}

/// Which relation the entangled-case composition satisfies with `Ξ^τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntangledFinding {
    /// Equal to `Ξ^τ`.
    Exact,
    /// Equal to `e^{iχ} Ξ^τ` for some global phase `χ`.
    GlobalPhase,
    /// Equal to `-(Z⊗Z) Ξ^τ`.
    MinusZZ,
    NoMatch,
}

impl EntangledFinding {
    pub fn name(self) -> &'static str {
        match self {
            EntangledFinding::Exact => "exact",
            EntangledFinding::GlobalPhase => "global_phase",
            EntangledFinding::MinusZZ => "minus_zz",
            EntangledFinding::NoMatch => "no_match",
        }
    }
}

/// Comparison of the composition at `α = τ, β = γ = -1` (all single-qubit
/// factors identity) against three candidate targets.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledComparison {
    pub tau: f64,
    pub deviation_exact: f64,
    /// Best global phase, `arg tr((Ξ^τ)^† M)`.
    pub global_phase: f64,
    pub deviation_global_phase: f64,
    pub deviation_minus_zz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub separable_trials: usize,
    /// `max |compose(u1,u2,v1,v2,0,0,0) - (u1 v1)⊗(u2 v2)|` over all trials.
    pub separable_max_deviation: f64,
    pub entangled: Vec<EntangledComparison>,
    pub entangled_finding: EntangledFinding,
}

impl DecompositionReport {
    pub fn separable_confirmed(&self) -> bool {
        self.separable_max_deviation < ISOMORPHISM_TOLERANCE
    }
}

fn compare_entangled(tau: f64) -> Result<EntangledComparison> {
    let id = *Coin2::identity().matrix();
    let m = *su4_compose(&id, &id, &id, &id, tau, -1.0, -1.0)?.matrix();
    let xi = *Coin4::fractional_swap(tau).matrix();
    let zz = *Coin4::tensor(&Coin2::pauli_z(), &Coin2::pauli_z()).matrix();
    let max_dev = |a: &nalgebra::Matrix4<Complex64>, b: &nalgebra::Matrix4<Complex64>| {
        crate::coins::max_deviation(a, b)
    };
    let overlap = (xi.adjoint() * m).trace();
    let chi = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let phased = xi * Complex64::from_polar(1.0, chi);
    Ok(EntangledComparison {
        tau,
        deviation_exact: max_dev(&m, &xi),
        global_phase: chi,
        deviation_global_phase: max_dev(&m, &phased),
        deviation_minus_zz: max_dev(&m, &(-(zz * xi))),
    })
}

/// Checks the separable and entangled parameter points of the SU(4) coin
/// composition with explicit trial count, seed and `τ` grid.
pub fn check_decomposition_claims_with(
    trials: usize,
    seed: u64,
    taus: &[f64],
) -> Result<DecompositionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (u1, u2, v1, v2) = (
            random_unitary2(&mut rng),
            random_unitary2(&mut rng),
            random_unitary2(&mut rng),
            random_unitary2(&mut rng),
        );
        let m = su4_compose(u1.matrix(), u2.matrix(), v1.matrix(), v2.matrix(), 0.0, 0.0, 0.0)?;
        let expected = Coin4::tensor(&(u1 * v1), &(u2 * v2));
        worst = worst.max(crate::coins::max_deviation(m.matrix(), expected.matrix()));
    }

    let entangled = taus
        .iter()
        .map(|&t| compare_entangled(t))
        .collect::<Result<Vec<_>>>()?;
    let all = |f: fn(&EntangledComparison) -> f64| {
        !entangled.is_empty() && entangled.iter().all(|c| f(c) < ISOMORPHISM_TOLERANCE)
    };
    let entangled_finding = if all(|c| c.deviation_exact) {
        EntangledFinding::Exact
    } else if all(|c| c.deviation_global_phase) {
        EntangledFinding::GlobalPhase
    } else if all(|c| c.deviation_minus_zz) {
        EntangledFinding::MinusZZ
    } else {
        EntangledFinding::NoMatch
    };

    Ok(DecompositionReport {
        separable_trials: trials,
        separable_max_deviation: worst,
        entangled,
        entangled_finding,
    })
}

/// Default decomposition check: 100 separable trials (seed 7) and the grid
/// `τ = 0, 0.1, …, 1`.
pub fn check_decomposition_claims() -> Result<DecompositionReport> {
    let taus: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    check_decomposition_claims_with(100, 7, &taus)
}

/// One step of the 2D walker on the image lattice with open boundary.
pub fn apply_cardinal_step(
    state: &WalkerState,
    coin: &CoinField<Coin4>,
    defect: &DefectMap,
) -> Result<WalkerState> {
    let lattice = state.lattice();
    coin.check_against(&lattice)?;
    defect.check_against(&lattice)?;
    let mut out = vec![ZERO; lattice.size()];
    let (support, _) =
        Stepper::default().step(state, coin, defect, Boundary::Open, &CARDINAL_SHIFT, &mut out)?;
    Ok(WalkerState::from_parts(lattice, out, support))
}

/// `t` steps of the 2D walker from the origin on the image lattice of
/// halfwidth `2t`.
pub fn evolve_cardinal(
    steps: usize,
    coin: &CoinField<Coin4>,
    defect: &DefectMap,
    initial_coin: &CoinState,
) -> Result<WalkerState> {
    let lattice = image_lattice(steps.max(1));
    let mut state = WalkerState::localized(lattice, Position::Two(0, 0), initial_coin)?;
    for _ in 0..steps {
        state = apply_cardinal_step(&state, coin, defect)?;
    }
    Ok(state)
}

/// Pushes a joint two-walker distribution through `map` onto the image lattice.
pub fn map_distribution(p: &Distribution, map: &CoordinateMap) -> Result<Distribution> {
    if p.dimensionality() != Dimensionality::Two {
        return Err(QwalkError::Validation("map_distribution needs a 2D distribution".into()));
    }
    let image = image_lattice(p.lattice().halfwidth());
    let mut probs = vec![0.0; image.num_sites()];
    for (pos, v) in p.iter() {
        probs[image.site_index(map.apply_position(pos)?)?] += v;
    }
    Distribution::new(image, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{distribution, max_abs_difference};
    use crate::coins::{max_deviation, unitarity_deviation};
    use crate::evolution::apply_step_2d;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn coordinate_map_image() {
        let map = CoordinateMap::standard();
        for l in 1..=3usize {
            let mut seen = std::collections::HashSet::new();
            for pos in Lattice::two_d(l).positions() {
                let Position::Two(x, y) = pos else { unreachable!() };
                let (a, b) = map.apply(x, y);
                assert!(in_image(l, a, b));
                assert!(a.abs() <= 2 * l as i64 && b.abs() <= 2 * l as i64);
                assert!(seen.insert((a, b)));
                assert_eq!(canonical(l, (a, b)), (a, b));
            }
            assert_eq!(seen.len(), (2 * l + 1).pow(2));
        }
    }

    #[test]
    fn permutation_is_exact() {
        for l in 1..=3 {
            let p = BasisPermutation::new(l, &CoordinateMap::standard()).unwrap();
            assert!(p.is_permutation());
            assert_eq!(p.walker_dim(), 4 * (2 * l + 1).pow(2));
            let m = p.to_int_matrix();
            let gram = m.transpose() * &m;
            assert_eq!(gram, DMatrix::<i64>::identity(p.dim(), p.dim()));
        }
    }

    #[test]
    fn non_injective_map_rejected() {
        let squash = CoordinateMap::new(|x, _| (x, 0));
        assert!(matches!(
            BasisPermutation::new(1, &squash),
            Err(QwalkError::Validation(_))
        ));
    }

    #[test]
    fn two_walker_matrix_of_product_coin_is_kronecker() {
        // Oracle: independent 1D step matrices combined by an explicit
        // Kronecker product. Two-walker index (x, y, c, d) corresponds to the
        // 1D indices (x, c) and (y, d).
        let mut r = rng(3);
        let (a, b) = (random_unitary2(&mut r), random_unitary2(&mut r));
        let l = 2;
        let ua = build_step_matrix(&Lattice::one_d(l), &WalkCoin::One(a.into()), &DefectMap::None, Boundary::Periodic)
            .unwrap();
        let ub = build_step_matrix(&Lattice::one_d(l), &WalkCoin::One(b.into()), &DefectMap::None, Boundary::Periodic)
            .unwrap();
        let joint = build_two_walker_matrix(l, &Coin4::tensor(&a, &b).into(), &DefectMap::None).unwrap();
        let pair = Lattice::two_d(l);
        let one = Lattice::one_d(l);
        let idx1 = |x: i64, c: usize| one.site_index(Position::One(x)).unwrap() * 2 + c;
        for i in 0..pair.size() {
            let crate::statespace::BasisLabel::Two(li) = pair.unpack(i).unwrap() else { unreachable!() };
            for j in 0..pair.size() {
                let crate::statespace::BasisLabel::Two(lj) = pair.unpack(j).unwrap() else { unreachable!() };
                let expected = ua[(idx1(li.x, li.c as usize), idx1(lj.x, lj.c as usize))]
                    * ub[(idx1(li.y, li.d as usize), idx1(lj.y, lj.d as usize))];
                assert!((joint[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_walker_pure_shift_is_permutation() {
        let m = build_two_walker_matrix(2, &Coin4::fractional_swap(0.0).into(), &DefectMap::None).unwrap();
        for j in 0..m.ncols() {
            let nz: Vec<_> = (0..m.nrows()).filter(|&i| m[(i, j)].norm() > 1e-15).collect();
            assert_eq!(nz.len(), 1);
            assert!((m[(nz[0], j)] - ONE).norm() < 1e-15);
        }
        let mut r = rng(5);
        let coin = random_trial_coin(&mut r, TrialKind::Product, 2);
        let u = build_two_walker_matrix(2, &coin, &DefectMap::None).unwrap();
        assert!(unitarity_deviation(&u) < 1e-12);
    }

    #[test]
    fn cardinal_matrix_is_unitary() {
        let mut r = rng(9);
        let coin = transform_coin_field(2, &random_trial_coin(&mut r, TrialKind::SiteDependent, 2), &CoordinateMap::standard())
            .unwrap();
        let u = build_cardinal_matrix(2, &coin, &DefectMap::None).unwrap();
        assert!(unitarity_deviation(&u) < 1e-12);
    }

    #[test]
    fn isomorphism_examples() {
        let h = Coin2::hadamard();
        assert!(verify_isomorphism(2, &Coin4::tensor(&h, &h).into(), &DefectMap::None).unwrap() < 1e-12);
        assert!(verify_isomorphism(2, &Coin4::fractional_swap(0.3).into(), &DefectMap::None).unwrap() < 1e-12);
        let mut r = rng(21);
        let coin = Coin4::tensor(&random_unitary2(&mut r), &random_unitary2(&mut r));
        assert!(verify_isomorphism(3, &coin.into(), &DefectMap::None).unwrap() < 1e-12);
    }

    #[test]
    fn isomorphism_with_transformed_defects() {
        let coin: CoinField<Coin4> = Coin4::fractional_swap(0.4).into();
        for defect in [DefectMap::LineY(2.1), DefectMap::CrossXY(0.7), DefectMap::Point(1.3)] {
            assert!(verify_isomorphism(2, &coin, &defect).unwrap() < 1e-12, "{defect:?}");
        }
        // Untransformed defects on the 2D side break the equality.
        let walkers = build_two_walker_matrix(2, &coin, &DefectMap::LineY(2.1)).unwrap();
        let single = build_cardinal_matrix(2, &coin, &DefectMap::LineY(2.1)).unwrap();
        let perm = BasisPermutation::new(2, &CoordinateMap::standard()).unwrap();
        assert!(deviation_after_conjugation(&walkers, &single, &perm) > 0.1);
    }

    #[test]
    fn line_defect_maps_to_diagonal() {
        let d = transform_defect(2, &DefectMap::LineY(1.0), &CoordinateMap::standard()).unwrap();
        let DefectMap::Custom(table) = d else { unreachable!() };
        assert_eq!(table.len(), 5);
        assert!(table.keys().all(|p| matches!(p, Position::Two(a, b) if a == b)));
    }

    #[test]
    fn translation_equivalence_exact() {
        assert_eq!(check_translation_equivalence(1).unwrap(), 0.0);
        assert_eq!(check_translation_equivalence(2).unwrap(), 0.0);
        let wrong = CoordinateMap::new(|x, y| (x + y, y - x));
        assert!(check_translation_equivalence_with(1, &wrong).unwrap() >= 1.0);
        assert!(check_translation_equivalence_with(2, &wrong).unwrap() >= 1.0);
    }

    #[test]
    fn size_cap_enforced() {
        assert!(matches!(
            verify_isomorphism(40, &Coin4::identity().into(), &DefectMap::None),
            Err(QwalkError::Size { .. })
        ));
        assert!(matches!(isomorphism_trials(40, 1, 0), Err(QwalkError::Size { .. })));
    }

    #[test]
    fn trials_are_deterministic() {
        let a = isomorphism_trials(1, 8, 7).unwrap();
        let b = isomorphism_trials(1, 8, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.deviation < 1e-12));
    }

    #[test]
    fn decomposition_report() {
        let report = check_decomposition_claims().unwrap();
        assert_eq!(report.separable_trials, 100);
        assert!(report.separable_confirmed());
        assert_eq!(report.entangled_finding, EntangledFinding::MinusZZ);
        let at_one = report.entangled.iter().find(|c| c.tau == 1.0).unwrap();
        assert!(at_one.deviation_minus_zz < 1e-12);
        assert!(at_one.deviation_exact > 0.5);
        // τ = 0: the bracket (Z⊗X)Ξ(Z⊗1)Ξ(1⊗X) is -(Z⊗Z), not the identity.
        let at_zero = report.entangled.iter().find(|c| c.tau == 0.0).unwrap();
        assert!(at_zero.deviation_exact > 1.0);
        assert!(at_zero.deviation_global_phase > 0.5);
    }

    #[test]
    fn distribution_corollary() {
        let h = Coin2::hadamard();
        let hh: CoinField<Coin4> = Coin4::tensor(&h, &h).into();
        let init = CoinState::symmetric_2d();
        for t in [1usize, 4, 7] {
            let mut s = WalkerState::localized(Lattice::two_d(t), Position::Two(0, 0), &init).unwrap();
            for _ in 0..t {
                s = apply_step_2d(&s, &hh, &DefectMap::None, Boundary::Open).unwrap();
            }
            let mapped = map_distribution(&distribution(&s), &CoordinateMap::standard()).unwrap();
            let direct = distribution(&evolve_cardinal(t, &hh, &DefectMap::None, &init).unwrap());
            assert!(max_abs_difference(&mapped, &direct).unwrap() < 1e-12);
        }
    }

    #[test]
    fn padded_two_walker_matrix_matches_direct_product() {
        // Π Π^† acts as the identity on matrices built by index relabeling.
        let p = BasisPermutation::new(1, &CoordinateMap::standard()).unwrap();
        let pm = p.to_matrix();
        let mut r = rng(1);
        let coin = random_trial_coin(&mut r, TrialKind::Product, 1);
        let single = build_cardinal_matrix(1, &transform_coin_field(1, &coin, &CoordinateMap::standard()).unwrap(), &DefectMap::None)
            .unwrap();
        let via_product = pm.adjoint() * &single * &pm;
        assert!(max_deviation(&via_product, &p.conjugate(&single)) < 1e-15);
    }
}
