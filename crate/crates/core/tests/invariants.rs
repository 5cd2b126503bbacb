use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use qwalk::analysis::{distribution, marginal, variance, Axis};
use qwalk::coins::{random_unitary2, Coin2, Coin4, CoinField};
use qwalk::evolution::{apply_step_1d, apply_step_2d, build_step_matrix, evolve, Boundary, DefectMap, WalkCoin, WalkSpec};
use qwalk::statespace::{Dimensionality, Lattice, Position, WalkerState};
use qwalk::Complex64;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(lattice: Lattice, rng: &mut ChaCha8Rng) -> WalkerState {
    let amps: Vec<Complex64> = (0..lattice.size())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    WalkerState::from_amplitudes(lattice, amps).unwrap().renormalize().unwrap()
}

fn defect_from(kind: u8, phi: f64) -> DefectMap {
    match kind {
        0 => DefectMap::None,
        1 => DefectMap::LineY(phi),
        2 => DefectMap::CrossXY(phi),
        _ => DefectMap::Point(phi),
    }
}

fn final_distribution(spec: &WalkSpec) -> qwalk::analysis::Distribution {
    distribution(&evolve(spec).unwrap().finish().unwrap())
}

#[test]
fn matrix_agrees_with_sweep_2d() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for l in 1..=3 {
        let lattice = Lattice::two_d(l);
        let coin = CoinField::from_fn(&lattice, |_| Coin4::tensor(&random_unitary2(&mut rng), &random_unitary2(&mut rng)));
        for defect in [DefectMap::None, DefectMap::LineY(0.4), DefectMap::CrossXY(2.0), DefectMap::Point(-1.1)] {
            let m = build_step_matrix(&lattice, &WalkCoin::Two(coin.clone()), &defect, Boundary::Periodic).unwrap();
            let s = random_state(lattice, &mut rng);
            let by_matrix = &m * DVector::from_column_slice(s.amplitudes());
            let by_sweep = apply_step_2d(&s, &coin, &defect, Boundary::Periodic).unwrap();
            for (a, b) in by_matrix.iter().zip(by_sweep.amplitudes()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn matrix_agrees_with_sweep_1d() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for l in 1..=3 {
        let lattice = Lattice::one_d(l);
        let coin = CoinField::from_fn(&lattice, |_| random_unitary2(&mut rng));
        let defect = DefectMap::Point(0.9);
        let m = build_step_matrix(&lattice, &WalkCoin::One(coin.clone()), &defect, Boundary::Periodic).unwrap();
        let s = random_state(lattice, &mut rng);
        let by_matrix = &m * DVector::from_column_slice(s.amplitudes());
        let by_sweep = apply_step_1d(&s, &coin, &defect, Boundary::Periodic).unwrap();
        for (a, b) in by_matrix.iter().zip(by_sweep.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}

#[test]
fn identity_coin_returns_after_full_cycle() {
    let l = 3;
    let lattice = Lattice::two_d(l);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = random_state(lattice, &mut rng);
    let coin: CoinField<Coin4> = Coin4::identity().into();
    let mut s = start.clone();
    for _ in 0..2 * (2 * l + 1) {
        s = apply_step_2d(&s, &coin, &DefectMap::None, Boundary::Periodic).unwrap();
    }
    for (a, b) in s.amplitudes().iter().zip(start.amplitudes()) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn empty_custom_defect_matches_none() {
    let mut spec = WalkSpec::hadamard(Dimensionality::Two, 8, DefectMap::None);
    let plain = final_distribution(&spec);
    let zeros: BTreeMap<Position, f64> = [(Position::Two(0, 0), 0.0), (Position::Two(1, -1), 0.0)].into();
    spec.defect = DefectMap::Custom(zeros);
    assert_eq!(final_distribution(&spec).probabilities(), plain.probabilities());
}

#[test]
fn line_defect_leaves_x_marginal_alone() {
    let free = final_distribution(&WalkSpec::hadamard(Dimensionality::Two, 12, DefectMap::None));
    let free_x = marginal(&free, Axis::X).unwrap();
    for phi in [0.3, PI / 2.0, PI] {
        let p = final_distribution(&WalkSpec::hadamard(Dimensionality::Two, 12, DefectMap::LineY(phi)));
        let px = marginal(&p, Axis::X).unwrap();
        for (a, b) in px.probabilities().iter().zip(free_x.probabilities()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}

#[test]
fn symmetric_coin_gives_reflection_symmetry() {
    for defect in [DefectMap::None, DefectMap::CrossXY(PI), DefectMap::Point(1.3)] {
        let p = final_distribution(&WalkSpec::hadamard(Dimensionality::Two, 9, defect));
        for (pos, v) in p.iter() {
            let Position::Two(x, y) = pos else { unreachable!() };
            assert!((v - p.get(Position::Two(y, x))).abs() < 1e-13);
        }
    }
}

#[test]
fn cross_defect_recurrence_is_square_of_1d_point_defect() {
    let two = final_distribution(&WalkSpec::hadamard(Dimensionality::Two, 10, DefectMap::CrossXY(PI)));
    let one = final_distribution(&WalkSpec::hadamard(Dimensionality::One, 10, DefectMap::Point(PI)));
    let p1 = one.get(Position::One(0));
    assert!((two.get(Position::Two(0, 0)) - p1 * p1).abs() < 1e-13);
}

#[test]
fn homogeneous_variance_grows_quadratically() {
    let v = |t| {
        let p = final_distribution(&WalkSpec::hadamard(Dimensionality::Two, t, DefectMap::None));
        variance(&p, Axis::X).unwrap()
    };
    let ratio = v(80) / v(40);
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_step_preserves_norm(seed in any::<u64>(), kind in 0u8..4, phi in -7.0f64..7.0, steps in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = WalkSpec::hadamard(Dimensionality::Two, steps, defect_from(kind, phi));
        spec.coin = WalkCoin::Two(Coin4::tensor(&random_unitary2(&mut rng), &random_unitary2(&mut rng)).into());
        for report in evolve(&spec).unwrap() {
            prop_assert!(report.unwrap().norm_residual < 1e-12);
        }
    }

    #[test]
    fn site_dependent_coins_preserve_norm_on_torus(seed in any::<u64>(), l in 1usize..5, kind in 0u8..4, phi in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lattice = Lattice::two_d(l);
        let coin = CoinField::from_fn(&lattice, |_| Coin4::tensor(&random_unitary2(&mut rng), &Coin2::hadamard()) * Coin4::fractional_swap(rng.random()));
        let mut s = random_state(lattice, &mut rng);
        for _ in 0..5 {
            s = apply_step_2d(&s, &coin, &defect_from(kind, phi), Boundary::Periodic).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_coin_factorizes(seed in any::<u64>(), steps in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_unitary2(&mut rng), random_unitary2(&mut rng));
        let mut spec = WalkSpec::hadamard(Dimensionality::Two, steps, DefectMap::None);
        spec.coin = WalkCoin::Two(Coin4::tensor(&a, &b).into());
        let p = final_distribution(&spec);
        let product = qwalk::analysis::outer_product(
            &marginal(&p, Axis::X).unwrap(),
            &marginal(&p, Axis::Y).unwrap(),
        ).unwrap();
        prop_assert!(qwalk::analysis::max_abs_difference(&p, &product).unwrap() < 1e-12);
    }
}
