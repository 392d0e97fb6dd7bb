//! Time evolution of populations and density matrices, stationary states and
//! the excitation-probability observable.
//!
//! Every snapshot is an independent dense exponential `exp(G t_k)` applied to
//! the initial state. Rate matrices use [`generator_exponential`]; the
//! superoperator uses nalgebra's Padé exponential. Integrity checks abort instead of clamping: a snapshot
//! whose normalization drifts or whose populations go negative beyond the
//! tolerance is reported as [`Error::NumericalIntegrity`].

use nalgebra::{Complex, ComplexField, DVector};

use crate::analysis::connectivity_blocks;
use crate::error::{Error, Result};
use crate::generator::{unvectorize, vectorize, LindbladSuperoperator, RateMatrix};
use crate::model::SpectralDecomposition;
use crate::scalar::{c, hermiticity_defect, CMatrix, RMatrix, RVector, Real};

/// Tolerance on normalization and positivity of evolved states.
pub const INTEGRITY_TOL: f64 = 1e-8;
/// Tolerance on normalization of user-supplied population vectors.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Default relative singular-value threshold for kernel dimension checks.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-12;

/// Normalized, nonnegative populations of the energy levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState<T: Real> {
    p: RVector<T>,
}

impl<T: Real> PopulationState<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("empty population vector".into()));
        }
        let tol = T::tol(NORMALIZATION_TOL);
        if let Some(k) = values.iter().position(|x| !x.is_finite() || *x < -tol) {
            return Err(Error::Validation(format!(
                "population p_{} = {:e} is negative or not finite",
                k + 1,
                values[k]
            )));
        }
        let sum = values.iter().fold(T::zero(), |a, &x| a + x);
        if (sum - T::one()).abs() > tol {
            return Err(Error::Validation(format!("populations sum to {sum:e}, expected 1")));
        }
        Ok(Self { p: RVector::from_vec(values) })
    }

    /// All weight on `level` (0-based).
    pub fn basis(dimension: usize, level: usize) -> Result<Self> {
        if level >= dimension {
            return Err(Error::Validation(format!("level {} out of range 1..={dimension}", level + 1)));
        }
        let mut p = RVector::zeros(dimension);
        p[level] = T::one();
        Ok(Self { p })
    }

    pub fn uniform(dimension: usize) -> Self {
        Self { p: RVector::from_element(dimension, T::one() / T::lit(dimension as f64)) }
    }

    fn unchecked(p: RVector<T>) -> Self {
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn vector(&self) -> &RVector<T> {
        &self.p
    }

    pub fn as_slice(&self) -> &[T] {
        self.p.as_slice()
    }

    pub fn get(&self, level: usize) -> T {
        self.p[level]
    }

    /// Diagonal density matrix with these populations.
    pub fn to_density(&self) -> CMatrix<T> {
        CMatrix::from_diagonal(&DVector::from_iterator(self.len(), self.p.iter().map(|&x| c(x))))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.p - &other.p).iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

/// Which generator produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Pauli,
    Lindblad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance<T> {
    pub engine: Engine,
    pub temperature: T,
    pub kappas: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub populations: Vec<PopulationState<T>>,
    /// Full density matrices (energy basis), for Lindblad runs only.
    pub densities: Option<Vec<CMatrix<T>>>,
    pub provenance: Provenance<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&PopulationState<T>> {
        self.populations.last()
    }

    /// Largest population difference over all snapshots.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.populations
            .iter()
            .zip(&other.populations)
            .fold(T::zero(), |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

fn validate_times<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Validation("time grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(Error::Validation("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_snapshot<T: Real>(p: &RVector<T>, t: T) -> Result<()> {
    let tol = T::tol(INTEGRITY_TOL);
    let sum = p.iter().fold(T::zero(), |a, &x| a + x);
    if !((sum - T::one()).abs() <= tol) {
        return Err(Error::NumericalIntegrity(format!(
            "normalization drifted to {sum:e} at t = {t:e}"
        )));
    }
    if let Some(k) = p.iter().position(|x| !(*x >= -tol)) {
        return Err(Error::NumericalIntegrity(format!(
            "population p_{} = {:e} at t = {t:e}",
            k + 1,
            p[k]
        )));
    }
    Ok(())
}

/// Relative tolerance on the column sums of a rate matrix.
pub const GENERATOR_TOL: f64 = 1e-10;

fn check_generator<T: Real>(q: &RMatrix<T>) -> Result<()> {
    let scale = q.diagonal().iter().fold(T::one(), |m, x| m.max(x.abs()));
    let d = q.nrows();
    for j in 0..d {
        let mut sum = T::zero();
        for i in 0..d {
            let x = q[(i, j)];
            if !x.is_finite() || (i != j && x < T::zero()) {
                return Err(Error::NumericalIntegrity(format!(
                    "generator entry ({}, {}) = {x:e} is not a valid rate",
                    i + 1,
                    j + 1
                )));
            }
            sum += x;
        }
        if !(sum.abs() <= T::tol(GENERATOR_TOL) * scale) {
            return Err(Error::NumericalIntegrity(format!("generator column {} sums to {sum:e}", j + 1)));
        }
    }
    Ok(())
}

/// Replaces each diagonal entry by one minus the off-diagonal column sum.
fn complement_diagonal<T: Real>(p: &mut RMatrix<T>) {
    for j in 0..p.ncols() {
        let off = (0..p.nrows()).filter(|&i| i != j).fold(T::zero(), |a, i| a + p[(i, j)]);
        p[(j, j)] = T::one() - off;
    }
}

/// `exp(Q t)` for a rate matrix `Q` (nonnegative off-diagonals, zero column
/// sums) by Taylor scaling and squaring on the nonnegative shift `Q + qI`.
///
/// Every intermediate is a nonnegative matrix, so off-diagonal entries carry
/// no cancellation error, and diagonals are formed as column complements so
/// column sums stay at one instead of drifting with the number of squarings.
pub fn generator_exponential<T: Real>(q: &RMatrix<T>, t: T) -> Result<RMatrix<T>> {
    if !q.is_square() {
        return Err(Error::Validation("generator must be square".into()));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::Validation(format!("time {t:e} must be finite and >= 0")));
    }
    check_generator(q)?;
    let d = q.nrows();
    let rate = q.diagonal().iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if rate == T::zero() || t == T::zero() {
        return Ok(RMatrix::identity(d, d));
    }
    let half = T::lit(0.5);
    let mut squarings = 0u32;
    let mut tau = t;
    while rate * tau > half {
        tau *= half;
        squarings += 1;
    }
    let mut b = q * tau;
    for i in 0..d {
        b[(i, i)] = (q[(i, i)] + rate) * tau;
    }
    let mut term = RMatrix::<T>::identity(d, d);
    let mut sum = term.clone();
    let eps = T::default_epsilon();
    for k in 1..64 {
        term = &b * &term / T::from_usize(k).expect("small integer");
        sum += &term;
        if term.amax() <= eps * eps {
            break;
        }
    }
    let mut p = sum * (-rate * tau).exp();
    complement_diagonal(&mut p);
    for _ in 0..squarings {
        p = &p * &p;
        complement_diagonal(&mut p);
    }
    Ok(p)
}

/// `p(t_k) = exp(Λ t_k) p₀`.
pub fn propagate_populations<T: Real>(
    rates: &RateMatrix<T>,
    p0: &PopulationState<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    validate_times(times)?;
    if p0.len() != rates.dimension() {
        return Err(Error::Validation(format!(
            "initial state has {} levels, generator {}",
            p0.len(),
            rates.dimension()
        )));
    }
    let mut populations = Vec::with_capacity(times.len());
    for &t in times {
        let propagator = generator_exponential(rates.matrix(), t)?;
        let p = propagator * p0.vector();
        check_snapshot(&p, t)?;
        populations.push(PopulationState::unchecked(p));
    }
    Ok(Trajectory {
        times: times.to_vec(),
        populations,
        densities: None,
        provenance: Provenance {
            engine: Engine::Pauli,
            temperature: rates.temperature(),
            kappas: rates.kappas().to_vec(),
        },
    })
}

fn min_eigenvalue<T: Real>(rho: &CMatrix<T>) -> T {
    // Exact Hermitian part; the defect is checked separately.
    let herm = (rho + rho.adjoint()) * c(T::lit(0.5));
    herm.symmetric_eigenvalues().iter().fold(T::lit(f64::INFINITY), |m, &x| m.min(x))
}

fn trace<T: Real>(rho: &CMatrix<T>) -> Complex<T> {
    rho.diagonal().iter().fold(Complex::default(), |a, &z| a + z)
}

fn check_density<T: Real>(rho: &CMatrix<T>, tol: T, what: &str, build: fn(String) -> Error) -> Result<()> {
    let herm = hermiticity_defect(rho);
    if !(herm <= tol) {
        return Err(build(format!("{what}: not Hermitian (defect {herm:e})")));
    }
    let tr = trace(rho);
    if !((tr - c(T::one())).modulus() <= tol) {
        return Err(build(format!("{what}: trace {:e}{:+e}i", tr.re, tr.im)));
    }
    let min = min_eigenvalue(rho);
    if !(min >= -T::tol(INTEGRITY_TOL)) {
        return Err(build(format!("{what}: negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// `vec ρ(t_k) = exp(𝓛 t_k) vec ρ₀`, with `ρ₀` in the energy basis.
pub fn propagate_density<T: Real>(
    sup: &LindbladSuperoperator<T>,
    rho0: &CMatrix<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    validate_times(times)?;
    let d = sup.dimension();
    if rho0.shape() != (d, d) {
        return Err(Error::Validation(format!(
            "initial density matrix is {:?}, expected {d}x{d}",
            rho0.shape()
        )));
    }
    check_density(rho0, T::tol(NORMALIZATION_TOL), "initial state", Error::Validation)?;
    let v0 = vectorize(rho0);
    let mut populations = Vec::with_capacity(times.len());
    let mut densities = Vec::with_capacity(times.len());
    for &t in times {
        let propagator = (sup.matrix() * c(t)).exp();
        let rho = unvectorize(&(propagator * &v0), d);
        check_density(&rho, T::tol(INTEGRITY_TOL), &format!("t = {t:e}"), Error::NumericalIntegrity)?;
        let p = RVector::from_iterator(d, rho.diagonal().iter().map(|z| z.re));
        check_snapshot(&p, t)?;
        populations.push(PopulationState::unchecked(p));
        densities.push(rho);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        populations,
        densities: Some(densities),
        provenance: Provenance {
            engine: Engine::Lindblad,
            temperature: sup.temperature(),
            kappas: sup.kappas().to_vec(),
        },
    })
}

/// Stationary vector of an irreducible generator block by the
/// Grassmann–Taksar–Heyman elimination (subtraction-free).
fn gth_stationary<T: Real>(q: &RMatrix<T>) -> Result<Vec<T>> {
    let m = q.nrows();
    // Row convention: a[(i, j)] is the rate i → j.
    let mut a = q.transpose();
    for k in (1..m).rev() {
        let s = (0..k).fold(T::zero(), |acc, j| acc + a[(k, j)]);
        if !(s > T::zero()) {
            return Err(Error::NumericalIntegrity(format!(
                "block is not irreducible: level {} has no path to lower levels",
                k + 1
            )));
        }
        for i in 0..k {
            a[(i, k)] /= s;
        }
        for i in 0..k {
            let aik = a[(i, k)];
            if aik == T::zero() {
                continue;
            }
            for j in 0..k {
                if i != j {
                    let akj = a[(k, j)];
                    a[(i, j)] += aik * akj;
                }
            }
        }
    }
    let mut pi = vec![T::zero(); m];
    pi[0] = T::one();
    for k in 1..m {
        pi[k] = (0..k).fold(T::zero(), |acc, i| acc + pi[i] * a[(i, k)]);
    }
    let z = pi.iter().fold(T::zero(), |acc, &x| acc + x);
    Ok(pi.into_iter().map(|x| x / z).collect())
}

fn kernel_dimension<T: Real>(q: &RMatrix<T>, tol: T) -> usize {
    let sv = q.clone().singular_values();
    let max = sv.iter().fold(T::zero(), |m, &x| m.max(x));
    if max == T::zero() {
        return q.nrows();
    }
    sv.iter().filter(|&&x| x <= tol * max).count()
}

/// One stationary population vector per connected block of the generator,
/// ordered like the blocks. `tol` is the relative singular-value threshold used
/// to confirm each block has a one-dimensional kernel.
pub fn steady_states<T: Real>(rates: &RateMatrix<T>, tol: T) -> Result<Vec<PopulationState<T>>> {
    let blocks = connectivity_blocks(rates);
    let d = rates.dimension();
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks.blocks() {
        let q = rates.restricted(block);
        let kernel = kernel_dimension(&q, tol);
        if kernel != 1 {
            return Err(Error::NumericalIntegrity(format!(
                "block {:?} has a {kernel}-dimensional kernel, expected 1",
                block.iter().map(|i| i + 1).collect::<Vec<_>>()
            )));
        }
        let pi = gth_stationary(&q)?;
        let mut p = RVector::zeros(d);
        for (&level, &x) in block.iter().zip(&pi) {
            p[level] = x;
        }
        out.push(PopulationState::unchecked(p));
    }
    Ok(out)
}

/// Boltzmann weights normalized over `energies`; at `T = 0` all weight goes to
/// the lowest (first) level.
pub(crate) fn boltzmann_weights<T: Real>(energies: &[T], temperature: T) -> Vec<T> {
    let emin = energies.iter().fold(T::lit(f64::INFINITY), |m, &e| m.min(e));
    if temperature == T::zero() {
        let k = energies.iter().position(|&e| e == emin).unwrap_or(0);
        return (0..energies.len()).map(|i| if i == k { T::one() } else { T::zero() }).collect();
    }
    let w: Vec<T> = energies.iter().map(|&e| (-(e - emin) / temperature).exp()).collect();
    let z = w.iter().fold(T::zero(), |a, &x| a + x);
    w.into_iter().map(|x| x / z).collect()
}

/// `p_i = exp(−E_i/T) / Z`.
pub fn gibbs_state<T: Real>(dec: &SpectralDecomposition<T>, temperature: T) -> Result<PopulationState<T>> {
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(Error::Domain(format!("Gibbs state needs T > 0, got {temperature:e}")));
    }
    Ok(PopulationState::unchecked(RVector::from_vec(boltzmann_weights(dec.energies(), temperature))))
}

/// `P_exc(t) = 1 − p₁(t)`.
pub fn excitation_probability<T: Real>(traj: &Trajectory<T>) -> Vec<T> {
    traj.populations.iter().map(|p| T::one() - p.get(0)).collect()
}
