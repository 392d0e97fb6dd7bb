//! Dissipative generators built from a spectral decomposition and bath
//! couplings: secular jump operators, the Pauli rate matrix acting on
//! energy-level populations, and the full Lindblad superoperator.
//!
//! Levels are 0-based and sorted by energy. In the rate matrix `Λ[(i, j)]` is
//! the rate `j → i`; entries above the diagonal are damping rates, entries
//! below are gain rates and each column sums to zero.
//!
//! Density matrices are vectorized by stacking columns, so `ρ[(i, j)]` sits at
//! index `i + d·j` and `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector};

use crate::bath::{BathConfig, CouplingElements};
use crate::error::{Error, Result};
use crate::model::{check_degeneracy, SpectralDecomposition, DEFAULT_DEGENERACY_TOL};
use crate::scalar::{c, max_abs_real, CMatrix, RMatrix, RVector, Real};

/// What to do when distinct transitions share a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    /// Reject degenerate gaps, naming the offending pair.
    #[default]
    Strict,
    /// Sum equal-frequency transitions into one jump operator. The spectrum
    /// itself must still be nondegenerate.
    Group,
}

/// `A_ω^(n) = Σ_{ω_ij = ω} |i⟩⟨i|S^(n)|j⟩⟨j|`, a lowering operator in the energy basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator<T: Real> {
    /// 0-based site index.
    pub site: usize,
    pub omega: T,
    /// `(lower, upper)` level pairs carried by this operator.
    pub transitions: Vec<(usize, usize)>,
    pub matrix: CMatrix<T>,
}

fn require_nondegenerate<T: Real>(dec: &SpectralDecomposition<T>, policy: GapPolicy) -> Result<()> {
    let report = check_degeneracy(dec, T::tol(DEFAULT_DEGENERACY_TOL));
    let bad = match policy {
        GapPolicy::Strict => !report.is_nondegenerate(),
        GapPolicy::Group => report.spectrum_degenerate,
    };
    if bad {
        return Err(Error::Degeneracy(report.describe()));
    }
    Ok(())
}

fn check_shapes<T: Real>(dec: &SpectralDecomposition<T>, elems: &CouplingElements<T>) -> Result<()> {
    if elems.dimension() != dec.dimension() {
        return Err(Error::Validation(format!(
            "coupling elements are {}-dimensional, spectrum is {}-dimensional",
            elems.dimension(),
            dec.dimension()
        )));
    }
    Ok(())
}

pub fn build_jump_operators<T: Real>(
    dec: &SpectralDecomposition<T>,
    elems: &CouplingElements<T>,
    policy: GapPolicy,
) -> Result<Vec<JumpOperator<T>>> {
    check_shapes(dec, elems)?;
    require_nondegenerate(dec, policy)?;
    let d = dec.dimension();
    let tol = T::tol(DEFAULT_DEGENERACY_TOL);
    let mut out = Vec::new();
    for site in 0..elems.sites() {
        let mut transitions: Vec<(usize, usize, T)> = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let omega = dec.gap(i, j);
                if omega > T::zero() && elems.is_nonzero(site, i, j) {
                    transitions.push((i, j, omega));
                }
            }
        }
        transitions.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal));

        let mut groups: Vec<Vec<(usize, usize, T)>> = Vec::new();
        for t in transitions {
            match (policy, groups.last_mut()) {
                (GapPolicy::Group, Some(g)) if t.2 - g[0].2 < tol => g.push(t),
                _ => groups.push(vec![t]),
            }
        }
        for g in groups {
            let mut matrix = CMatrix::<T>::zeros(d, d);
            for &(i, j, _) in &g {
                matrix[(i, j)] = elems.element(site, i, j);
            }
            out.push(JumpOperator {
                site,
                omega: g[0].2,
                transitions: g.iter().map(|&(i, j, _)| (i, j)).collect(),
                matrix,
            });
        }
    }
    Ok(out)
}

/// Dense rate matrix on energy-level populations with its structural-zero mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix<T: Real> {
    matrix: RMatrix<T>,
    mask: DMatrix<bool>,
    energies: Vec<T>,
    temperature: T,
    kappas: Vec<T>,
}

impl<T: Real> RateMatrix<T> {
    /// Assembles a rate matrix from raw parts without recomputing any rate.
    /// Intended for audits and fault-injection tests.
    pub fn from_parts(
        matrix: RMatrix<T>,
        mask: DMatrix<bool>,
        energies: Vec<T>,
        temperature: T,
        kappas: Vec<T>,
    ) -> Result<Self> {
        let d = energies.len();
        if matrix.shape() != (d, d) || mask.shape() != (d, d) {
            return Err(Error::Validation(format!(
                "rate matrix {:?} / mask {:?} do not match {d} levels",
                matrix.shape(),
                mask.shape()
            )));
        }
        Ok(Self { matrix, mask, energies, temperature, kappas })
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn matrix(&self) -> &RMatrix<T> {
        &self.matrix
    }

    /// `true` where the entry is nonzero for every `T > 0` given κ and the
    /// coupling-element pattern.
    pub fn mask(&self) -> &DMatrix<bool> {
        &self.mask
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn kappas(&self) -> &[T] {
        &self.kappas
    }

    pub fn rate(&self, to: usize, from: usize) -> T {
        self.matrix[(to, from)]
    }

    /// Largest absolute entry.
    pub fn rate_scale(&self) -> T {
        max_abs_real(self.matrix.iter())
    }

    pub fn apply(&self, p: &RVector<T>) -> RVector<T> {
        &self.matrix * p
    }

    /// Restriction to a subset of levels, in the given order.
    pub fn restricted(&self, levels: &[usize]) -> RMatrix<T> {
        RMatrix::from_fn(levels.len(), levels.len(), |a, b| self.matrix[(levels[a], levels[b])])
    }

    pub fn max_column_sum(&self) -> T {
        self.matrix
            .column_iter()
            .fold(T::zero(), |m, col| m.max(col.sum().abs()))
    }
}

/// Golden-rule rate matrix:
/// `Λ_ij = Σ_n J_n(ω_ij)(1 + n̄)|S_ij^(n)|²` for `i < j`,
/// `Λ_ji = Σ_n J_n(ω_ij) n̄ |S_ij^(n)|²`, and `Λ_jj = −Σ_{i≠j} Λ_ij`.
pub fn build_rate_matrix<T: Real>(
    dec: &SpectralDecomposition<T>,
    elems: &CouplingElements<T>,
    baths: &BathConfig<T>,
    policy: GapPolicy,
) -> Result<RateMatrix<T>> {
    check_shapes(dec, elems)?;
    if elems.sites() != baths.site_count() {
        return Err(Error::Validation(format!(
            "{} coupling operators for {} baths",
            elems.sites(),
            baths.site_count()
        )));
    }
    require_nondegenerate(dec, policy)?;

    let d = dec.dimension();
    let kappas = baths.kappas();
    let mut matrix = RMatrix::<T>::zeros(d, d);
    let mut mask = DMatrix::from_element(d, d, false);
    for i in 0..d {
        for j in i + 1..d {
            let omega = dec.gap(i, j);
            let mut down = T::zero();
            let mut up = T::zero();
            let mut structural = false;
            for (n, &kappa) in kappas.iter().enumerate() {
                if kappa == T::zero() || !elems.is_nonzero(n, i, j) {
                    continue;
                }
                structural = true;
                let s2 = elems.squared_modulus(n, i, j);
                let (emit, absorb) = baths.transition_rates(n, omega)?;
                down += emit * s2;
                up += absorb * s2;
            }
            matrix[(i, j)] = down;
            matrix[(j, i)] = up;
            mask[(i, j)] = structural;
            mask[(j, i)] = structural;
        }
    }
    for j in 0..d {
        let outflow = (0..d)
            .filter(|&i| i != j)
            .fold(T::zero(), |acc, i| acc + matrix[(i, j)]);
        matrix[(j, j)] = -outflow;
        mask[(j, j)] = (0..d).any(|i| i != j && mask[(i, j)]);
    }
    Ok(RateMatrix { matrix, mask, energies: dec.energies().to_vec(), temperature: baths.temperature(), kappas })
}

/// `d² × d²` generator of `ρ ↦ −i[H, ρ] + L[ρ]` in the energy basis,
/// column-stacked.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSuperoperator<T: Real> {
    matrix: CMatrix<T>,
    dimension: usize,
    temperature: T,
    kappas: Vec<T>,
}

impl<T: Real> LindbladSuperoperator<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Hilbert-space dimension `d`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn kappas(&self) -> &[T] {
        &self.kappas
    }

    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dimension)
    }
}

pub fn vectorize<T: Real>(rho: &CMatrix<T>) -> DVector<Complex<T>> {
    // nalgebra storage is column-major.
    DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize<T: Real>(v: &DVector<Complex<T>>, d: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Adds `coef · (Bᵀ ⊗ A)`, the superoperator of `X ↦ A X B`.
fn add_sandwich<T: Real>(sup: &mut CMatrix<T>, coef: Complex<T>, a: &CMatrix<T>, b: &CMatrix<T>) {
    let d = a.nrows();
    let zero = Complex::default();
    let a_nz: Vec<(usize, usize, Complex<T>)> = nonzeros(a, zero);
    let b_nz: Vec<(usize, usize, Complex<T>)> = nonzeros(b, zero);
    // (Bᵀ ⊗ A)[(i + d j), (k + d l)] = A[i,k] B[l,j]
    for &(l, j, bv) in &b_nz {
        for &(i, k, av) in &a_nz {
            sup[(i + d * j, k + d * l)] += coef * av * bv;
        }
    }
}

fn nonzeros<T: Real>(m: &CMatrix<T>, zero: Complex<T>) -> Vec<(usize, usize, Complex<T>)> {
    let mut v = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != zero {
                v.push((i, j, m[(i, j)]));
            }
        }
    }
    v
}

/// Adds `γ (A X A† − ½{A†A, X})`.
fn add_dissipator<T: Real>(sup: &mut CMatrix<T>, gamma: T, a: &CMatrix<T>, id: &CMatrix<T>) {
    if gamma == T::zero() {
        return;
    }
    let ad = a.adjoint();
    let ada = &ad * a;
    let half = c(gamma * T::lit(0.5));
    add_sandwich(sup, c(gamma), a, &ad);
    add_sandwich(sup, -half, &ada, id);
    add_sandwich(sup, -half, id, &ada);
}

pub fn build_lindblad_superoperator<T: Real>(
    dec: &SpectralDecomposition<T>,
    elems: &CouplingElements<T>,
    baths: &BathConfig<T>,
    policy: GapPolicy,
) -> Result<LindbladSuperoperator<T>> {
    if elems.sites() != baths.site_count() {
        return Err(Error::Validation(format!(
            "{} coupling operators for {} baths",
            elems.sites(),
            baths.site_count()
        )));
    }
    let jumps = build_jump_operators(dec, elems, policy)?;
    let d = dec.dimension();
    let id = CMatrix::<T>::identity(d, d);
    let h = CMatrix::<T>::from_diagonal(&DVector::from_iterator(
        d,
        dec.energies().iter().map(|&e| c(e)),
    ));
    let mut sup = CMatrix::<T>::zeros(d * d, d * d);
    let i_unit = Complex::new(T::zero(), T::one());
    add_sandwich(&mut sup, -i_unit, &h, &id);
    add_sandwich(&mut sup, i_unit, &id, &h);
    for jump in &jumps {
        let (emit, absorb) = baths.transition_rates(jump.site, jump.omega)?;
        add_dissipator(&mut sup, emit, &jump.matrix, &id);
        add_dissipator(&mut sup, absorb, &jump.matrix.adjoint(), &id);
    }
    Ok(LindbladSuperoperator {
        matrix: sup,
        dimension: d,
        temperature: baths.temperature(),
        kappas: baths.kappas(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{coupling_matrix_elements, PauliAxis, SiteBath};
    use crate::model::{build_hamiltonian, spectral_decomposition, ChainSpec, Coupling};
    use crate::scalar::max_abs;
    use nalgebra::ComplexField;

    fn reference(kappas: [f64; 2], t: f64) -> (SpectralDecomposition<f64>, CouplingElements<f64>, BathConfig<f64>) {
        let dec = spectral_decomposition(&build_hamiltonian(&ChainSpec::reference_pair()).unwrap()).unwrap();
        let baths = BathConfig::sigma_x(t, &kappas).unwrap();
        let elems = coupling_matrix_elements(&baths, &dec).unwrap();
        (dec, elems, baths)
    }

    #[test]
    fn site_one_jump_operators() {
        let (dec, elems, _) = reference([1.0, 1.0], 1.0);
        let jumps = build_jump_operators(&dec, &elems, GapPolicy::Strict).unwrap();
        let site0: Vec<_> = jumps.iter().filter(|j| j.site == 0).collect();
        assert_eq!(site0.len(), 2);
        // ω_42 = 4/3 sorts first, then ω_31 = 8/3.
        assert_eq!(site0[0].transitions, vec![(1, 3)]);
        assert!((site0[0].omega - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(site0[1].transitions, vec![(0, 2)]);
        assert!((site0[1].omega - 8.0 / 3.0).abs() < 1e-14);
        for j in &site0 {
            assert_eq!(j.matrix.iter().filter(|z| z.modulus() > 0.0).count(), 1);
        }
        let site1: Vec<_> = jumps.iter().filter(|j| j.site == 1).collect();
        assert_eq!(site1[0].transitions, vec![(2, 3)]);
        assert!((site1[0].omega - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(site1[1].transitions, vec![(0, 1)]);
        assert!((site1[1].omega - 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn commuting_coupling_has_no_jumps() {
        let (dec, _, _) = reference([1.0, 1.0], 1.0);
        let baths = BathConfig::new(1.0, vec![SiteBath { axis: PauliAxis::Z, kappa: 1.0 }; 2]).unwrap();
        let elems = coupling_matrix_elements(&baths, &dec).unwrap();
        assert!(build_jump_operators(&dec, &elems, GapPolicy::Strict).unwrap().is_empty());
        let rates = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        assert_eq!(rates.rate_scale(), 0.0);
    }

    #[test]
    fn golden_rule_rates_at_unit_temperature() {
        let (dec, elems, baths) = reference([1.0, 1.0], 1.0);
        let r = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        // (8/3)(1 + 1/(e^{8/3} − 1)) and (8/3)/(e^{8/3} − 1), evaluated independently.
        assert!((r.rate(0, 2) - 2.865791769282299).abs() < 1e-12);
        assert!((r.rate(2, 0) - 0.1991251026156328).abs() < 1e-12);
        assert!((r.rate(2, 0) / r.rate(0, 2) - (-8f64 / 3.0).exp()).abs() < 1e-14);
        assert!(r.max_column_sum() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(r.rate(i, j) >= 0.0);
                } else {
                    assert!(r.rate(i, i) <= 0.0);
                }
            }
        }
    }

    #[test]
    fn decoupled_site_gives_block_diagonal_matrix() {
        for t in [0.01, 1.0, 100.0] {
            let (dec, elems, baths) = reference([0.0, 1.0], t);
            let r = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
            for a in 0..2 {
                for b in 2..4 {
                    assert_eq!(r.rate(a, b), 0.0);
                    assert_eq!(r.rate(b, a), 0.0);
                    assert!(!r.mask()[(a, b)]);
                }
            }
        }
    }

    #[test]
    fn zero_temperature_keeps_only_damping() {
        let (dec, elems, baths) = reference([1.0, 1.0], 0.0);
        let r = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(r.rate(i, j), 0.0);
            }
        }
        assert!(r.rate(0, 1) > 0.0);
        assert!(r.max_column_sum() < 1e-14);
        // Structure does not depend on temperature.
        assert_eq!(r.mask().iter().filter(|&&m| m).count(), 12);
    }

    #[test]
    fn each_row_has_sites_plus_one_nonzeros() {
        let (dec, elems, baths) = reference([0.3, 0.7], 2.0);
        let r = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        for i in 0..4 {
            assert_eq!((0..4).filter(|&j| r.mask()[(i, j)]).count(), 3);
        }
    }

    #[test]
    fn degenerate_gaps_rejected_unless_grouped() {
        let spec = ChainSpec::new(
            vec![1.0, 0.6, 0.3],
            vec![Coupling::new(1, 2, 0.2), Coupling::new(2, 3, 0.1)],
        )
        .unwrap();
        let dec = spectral_decomposition(&build_hamiltonian(&spec).unwrap()).unwrap();
        let baths = BathConfig::sigma_x(1.0, &[1.0, 1.0, 1.0]).unwrap();
        let elems = coupling_matrix_elements(&baths, &dec).unwrap();
        let err = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::Degeneracy(ref m) if m.contains("gaps")), "{err}");
        assert!(build_jump_operators(&dec, &elems, GapPolicy::Strict).is_err());

        let grouped = build_jump_operators(&dec, &elems, GapPolicy::Group).unwrap();
        assert!(grouped.iter().any(|j| j.transitions.len() > 1));
        let r = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Group).unwrap();
        assert!(r.max_column_sum() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_always_rejected() {
        let spec = ChainSpec::ising_pair(1.0, 1.0, 0.0).unwrap();
        let dec = spectral_decomposition(&build_hamiltonian(&spec).unwrap()).unwrap();
        let baths = BathConfig::sigma_x(1.0, &[1.0, 1.0]).unwrap();
        let elems = coupling_matrix_elements(&baths, &dec).unwrap();
        assert!(build_rate_matrix(&dec, &elems, &baths, GapPolicy::Group).is_err());
    }

    #[test]
    fn superoperator_annihilates_gibbs_state() {
        let (dec, elems, baths) = reference([1.0, 1.0], 1.0);
        let sup = build_lindblad_superoperator(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        let w: Vec<f64> = dec.energies().iter().map(|e| (-(e - dec.energies()[0])).exp()).collect();
        let z: f64 = w.iter().sum();
        let rho = CMatrix::from_diagonal(&DVector::from_iterator(4, w.iter().map(|x| c(x / z))));
        assert!(max_abs(&sup.apply(&rho)) < 1e-10);
    }

    #[test]
    fn superoperator_is_trace_preserving_and_hermiticity_preserving() {
        let (dec, elems, baths) = reference([0.4, 1.0], 3.0);
        let sup = build_lindblad_superoperator(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        let d = 4;
        // tr(L[E_kl]) = 0 for every matrix unit.
        for col in 0..d * d {
            let trace = (0..d).fold(Complex::<f64>::default(), |acc, i| acc + sup.matrix()[(i + d * i, col)]);
            assert!(trace.modulus() < 1e-12);
        }
        let mut rho = CMatrix::<f64>::zeros(d, d);
        rho[(0, 1)] = Complex::new(0.2, 0.1);
        rho[(1, 0)] = Complex::new(0.2, -0.1);
        rho[(2, 2)] = c(1.0);
        let out = sup.apply(&rho);
        assert!(max_abs(&(&out - out.adjoint())) < 1e-12);
    }

    #[test]
    fn population_block_matches_rate_matrix() {
        let (dec, elems, baths) = reference([0.2, 1.0], 2.5);
        let sup = build_lindblad_superoperator(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        let r = build_rate_matrix(&dec, &elems, &baths, GapPolicy::Strict).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let z = sup.matrix()[(i + 4 * i, j + 4 * j)];
                assert!((z.re - r.rate(i, j)).abs() < 1e-12 && z.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let m = CMatrix::<f64>::from_fn(3, 3, |i, j| c((i + 10 * j) as f64));
        let v = vectorize(&m);
        assert_eq!(v[1], c(1.0));
        assert_eq!(v[3], c(10.0));
        assert_eq!(unvectorize(&v, 3), m);
    }
}
