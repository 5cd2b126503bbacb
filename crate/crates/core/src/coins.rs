//! Coin operators.
//!
//! Coins are general unitaries (U(2) and U(4)); the Hadamard coin has
//! determinant -1 and is accepted as is. Two-qubit coins act on the pair
//! `(c, d)` in the Kronecker order `00, 01, 10, 11`.

use nalgebra::{Dim, Matrix, Matrix2, Matrix4, RawStorage};
use num_complex::Complex64;
use rand::Rng;
use std::ops::Mul;

use crate::error::{QwalkError, Result};
use crate::statespace::{Lattice, Position};

/// Tolerance for accepting a matrix as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Max elementwise `|(M M^† - 1)_ij|`.
pub fn unitarity_deviation<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(
    m: &Matrix<Complex64, R, C, S>,
) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "unitarity check needs a square matrix");
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += m[(i, k)] * m[(j, k)].conj();
            }
            if i == j {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Max elementwise `|a_ij - b_ij|`. Shapes must agree.
pub fn max_deviation<R: Dim, C: Dim, S1, S2>(
    a: &Matrix<Complex64, R, C, S1>,
    b: &Matrix<Complex64, R, C, S2>,
) -> f64
where
    S1: RawStorage<Complex64, R, C>,
    S2: RawStorage<Complex64, R, C>,
{
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

fn check_unitary<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(
    m: &Matrix<Complex64, R, C, S>,
    what: &str,
) -> Result<()> {
    let dev = unitarity_deviation(m);
    if dev > UNITARY_TOLERANCE || !dev.is_finite() {
        return Err(QwalkError::Validation(format!(
            "{what} is not unitary (deviation {dev:e})"
        )));
    }
    Ok(())
}

/// Local coin action on one site's coin amplitudes.
pub trait Coin: Clone + Send + Sync {
    /// Coin-space dimension.
    const DIM: usize;

    /// Replaces `v` with `C v`. `v.len() == DIM`.
    fn apply(&self, v: &mut [Complex64]);

    fn entry(&self, row: usize, col: usize) -> Complex64;
}

/// Unitary 2×2 coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin2(Matrix2<Complex64>);

impl Coin2 {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        check_unitary(&m, "2x2 coin")?;
        Ok(Coin2(m))
    }

    /// `[[e^{-iφ}cosθ, e^{iψ}sinθ], [-e^{-iψ}sinθ, e^{iφ}cosθ]]`, an SU(2) element.
    ///
    /// The lower-left entry carries a minus sign; without it the matrix has
    /// determinant `cos 2θ` and is not unitary.
    pub fn su2_from_angles(theta: f64, psi: f64, phi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Coin2(Matrix2::new(
            Complex64::from_polar(c, -phi),
            Complex64::from_polar(s, psi),
            -Complex64::from_polar(s, -psi),
            Complex64::from_polar(c, phi),
        ))
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Coin2(Matrix2::new(h, h, h, -h))
    }

    pub fn identity() -> Self {
        Coin2(Matrix2::identity())
    }

    pub fn pauli_x() -> Self {
        Coin2(Matrix2::new(ZERO, ONE, ONE, ZERO))
    }

    pub fn pauli_z() -> Self {
        Coin2(Matrix2::new(ONE, ZERO, ZERO, -ONE))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn determinant(&self) -> Complex64 {
        let m = &self.0;
        m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
    }

    /// `e^{iχ} · self`.
    pub fn with_phase(&self, chi: f64) -> Coin2 {
        Coin2(self.0 * Complex64::from_polar(1.0, chi))
    }
}

impl Coin for Coin2 {
    const DIM: usize = 2;

    #[inline]
    fn apply(&self, v: &mut [Complex64]) {
        let m = &self.0;
        let (a, b) = (v[0], v[1]);
        v[0] = m[(0, 0)] * a + m[(0, 1)] * b;
        v[1] = m[(1, 0)] * a + m[(1, 1)] * b;
    }

    fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }
}

/// Unitary 4×4 coin acting on the coin pair `(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin4(Matrix4<Complex64>);

impl Coin4 {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        check_unitary(&m, "4x4 coin")?;
        Ok(Coin4(m))
    }

    pub fn identity() -> Self {
        Coin4(Matrix4::identity())
    }

    /// Kronecker product `a ⊗ b`; `a` acts on `c`, `b` on `d`.
    pub fn tensor(a: &Coin2, b: &Coin2) -> Self {
        Coin4(Matrix4::from_fn(|r, col| {
            a.0[(r >> 1, col >> 1)] * b.0[(r & 1, col & 1)]
        }))
    }

    /// `Ξ^τ`: identity on `|00>, |11>`, and on the `{|01>, |10>}` block
    /// `½[[1+e, 1-e], [1-e, 1+e]]` with `e = (-1)^τ = e^{iπτ}`.
    pub fn fractional_swap(tau: f64) -> Self {
        let e = Complex64::from_polar(1.0, std::f64::consts::PI * tau);
        let p = (ONE + e) * 0.5;
        let q = (ONE - e) * 0.5;
        let mut m = Matrix4::identity();
        m[(1, 1)] = p;
        m[(1, 2)] = q;
        m[(2, 1)] = q;
        m[(2, 2)] = p;
        Coin4(m)
    }

    pub fn swap() -> Self {
        Coin4::fractional_swap(1.0)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

}

impl Coin for Coin4 {
    const DIM: usize = 4;

    #[inline]
    fn apply(&self, v: &mut [Complex64]) {
        let m = &self.0;
        let a = [v[0], v[1], v[2], v[3]];
        for (r, out) in v.iter_mut().enumerate().take(4) {
            *out = m[(r, 0)] * a[0] + m[(r, 1)] * a[1] + m[(r, 2)] * a[2] + m[(r, 3)] * a[3];
        }
    }

    fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }
}

impl Mul for Coin2 {
    type Output = Coin2;

    fn mul(self, rhs: Coin2) -> Coin2 {
        Coin2(self.0 * rhs.0)
    }
}

impl Mul for Coin4 {
    type Output = Coin4;

    fn mul(self, rhs: Coin4) -> Coin4 {
        Coin4(self.0 * rhs.0)
    }
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

/// `(u1⊗u2) [(Z⊗X) Ξ^γ (Z⊗1) Ξ^β (1⊗X) Ξ^α] (v1⊗v2)`, multiplied out in
/// exactly this left-to-right order with no simplification.
pub fn su4_compose(
    u1: &Matrix2<Complex64>,
    u2: &Matrix2<Complex64>,
    v1: &Matrix2<Complex64>,
    v2: &Matrix2<Complex64>,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<Coin4> {
    for (m, name) in [(u1, "u1"), (u2, "u2"), (v1, "v1"), (v2, "v2")] {
        check_unitary(m, name)?;
    }
    let x = *Coin2::pauli_x().matrix();
    let z = *Coin2::pauli_z().matrix();
    let id = Matrix2::<Complex64>::identity();
    let xi = |t: f64| *Coin4::fractional_swap(t).matrix();

    let m = kron(u1, u2)
        * kron(&z, &x)
        * xi(gamma)
        * kron(&z, &id)
        * xi(beta)
        * kron(&id, &x)
        * xi(alpha)
        * kron(v1, v2);
    Ok(Coin4(m))
}

/// Random U(2) element: an SU(2) matrix from uniform angles times a random phase.
pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Coin2 {
    let tau = 2.0 * std::f64::consts::PI;
    Coin2::su2_from_angles(
        rng.random_range(0.0..tau),
        rng.random_range(0.0..tau),
        rng.random_range(0.0..tau),
    )
    .with_phase(rng.random_range(0.0..tau))
}

/// Coin assignment over a lattice: one coin everywhere, or one per site.
#[derive(Debug, Clone, PartialEq)]
pub enum CoinField<C> {
    Uniform(C),
    /// Indexed by [`Lattice::site_index`].
    PerSite(Vec<C>),
}

impl<C: Coin> CoinField<C> {
    pub fn from_fn(lattice: &Lattice, mut f: impl FnMut(Position) -> C) -> Self {
        CoinField::PerSite(lattice.positions().map(&mut f).collect())
    }

    #[inline]
    pub fn get(&self, site: usize) -> &C {
        match self {
            CoinField::Uniform(c) => c,
            CoinField::PerSite(v) => &v[site],
        }
    }

    /// Confirms that a per-site table covers the lattice and the coin size matches.
    pub fn check_against(&self, lattice: &Lattice) -> Result<()> {
        if C::DIM != lattice.coin_dim() {
            return Err(QwalkError::Validation(format!(
                "{}-dimensional coin on a lattice with {}-dimensional coin space",
                C::DIM,
                lattice.coin_dim()
            )));
        }
        if let CoinField::PerSite(v) = self {
            if v.len() != lattice.num_sites() {
                return Err(QwalkError::Validation(format!(
                    "coin field has {} sites, lattice has {}",
                    v.len(),
                    lattice.num_sites()
                )));
            }
        }
        Ok(())
    }
}

impl From<Coin2> for CoinField<Coin2> {
    fn from(c: Coin2) -> Self {
        CoinField::Uniform(c)
    }
}

impl From<Coin4> for CoinField<Coin4> {
    fn from(c: Coin4) -> Self {
        CoinField::Uniform(c)
    }
}
