//! Ising-type spin chains: Hamiltonian construction, spectral decomposition and
//! the nondegeneracy / frustration checks the rate theory relies on.
//!
//! Units are ħ = k_B = h₁ = 1. The computational basis is indexed by the
//! bitstring of the chain with site 1 as the most significant bit and
//! ↑ = 0, ↓ = 1, so for two sites the order is ↑↑, ↑↓, ↓↑, ↓↓.

use std::cmp::Ordering;
use std::collections::HashSet;

use nalgebra::{Complex, ComplexField, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{c, hermiticity_defect, CMatrix, Real};

/// Largest chain for which a dense Hamiltonian is built.
pub const MAX_DENSE_SITES: usize = 12;
/// Largest chain for which exhaustive configuration enumeration is attempted.
pub const MAX_ENUMERATION_SITES: usize = 24;
/// Largest chain a [`ChainSpec`] may describe.
pub const MAX_SITES: usize = 30;
/// Default absolute tolerance for spectrum and gap degeneracy.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// A `-Δ σ_z^(a) σ_z^(b)` term between two sites (1-based, `a < b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling<T> {
    pub a: usize,
    pub b: usize,
    pub delta: T,
}

impl<T> Coupling<T> {
    pub fn new(a: usize, b: usize, delta: T) -> Self {
        Self { a, b, delta }
    }
}

/// Parameters of `H_S = Σ_n h_n σ_z^(n) − Σ_(a,b) Δ_ab σ_z^(a) σ_z^(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec<T> {
    fields: Vec<T>,
    couplings: Vec<Coupling<T>>,
}

impl<T: Real> ChainSpec<T> {
    pub fn new(fields: Vec<T>, couplings: Vec<Coupling<T>>) -> Result<Self> {
        let spec = Self { fields, couplings };
        spec.validate()?;
        Ok(spec)
    }

    /// The two-spin chain `h₁σ_z¹ + h₂σ_z² − Δσ_z¹σ_z²`.
    pub fn ising_pair(h1: T, h2: T, delta: T) -> Result<Self> {
        Self::new(vec![h1, h2], vec![Coupling::new(1, 2, delta)])
    }

    /// The worked example: h = (1, 1/2), Δ = 1/3.
    pub fn reference_pair() -> Self {
        Self::ising_pair(T::one(), T::lit(0.5), T::lit(1.0 / 3.0)).expect("valid example chain")
    }

    fn validate(&self) -> Result<()> {
        let n = self.fields.len();
        if n == 0 {
            return Err(Error::Specification("chain needs at least one site".into()));
        }
        if n > MAX_SITES {
            return Err(Error::Capacity(format!(
                "{n} sites exceeds the supported maximum of {MAX_SITES}"
            )));
        }
        if let Some(k) = self.fields.iter().position(|h| !h.is_finite()) {
            return Err(Error::Specification(format!("field h_{} is not finite", k + 1)));
        }
        let mut seen = HashSet::new();
        for c in &self.couplings {
            if c.a < 1 || c.b > n || c.a >= c.b {
                return Err(Error::Specification(format!(
                    "coupling ({}, {}) needs 1 <= a < b <= {n}",
                    c.a, c.b
                )));
            }
            if !seen.insert((c.a, c.b)) {
                return Err(Error::Specification(format!(
                    "duplicate coupling ({}, {})",
                    c.a, c.b
                )));
            }
            if !c.delta.is_finite() {
                return Err(Error::Specification(format!(
                    "coupling ({}, {}) is not finite",
                    c.a, c.b
                )));
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.fields.len()
    }

    pub fn dimension(&self) -> usize {
        1usize << self.sites()
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    pub fn couplings(&self) -> &[Coupling<T>] {
        &self.couplings
    }

    /// Relabels sites: old site `k` (1-based) becomes `perm[k-1]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.sites();
        let mut check: Vec<usize> = perm.to_vec();
        check.sort_unstable();
        if check != (1..=n).collect::<Vec<_>>() {
            return Err(Error::Validation("not a permutation of the sites".into()));
        }
        let mut fields = vec![T::zero(); n];
        for (k, h) in self.fields.iter().enumerate() {
            fields[perm[k] - 1] = *h;
        }
        let couplings = self
            .couplings
            .iter()
            .map(|c| {
                let (a, b) = (perm[c.a - 1], perm[c.b - 1]);
                Coupling::new(a.min(b), a.max(b), c.delta)
            })
            .collect();
        Self::new(fields, couplings)
    }

    /// Energy of a computational basis configuration.
    pub fn configuration_energy(&self, index: usize) -> T {
        let n = self.sites();
        let s = |site: usize| T::lit(spin_sign(index, site, n) as f64);
        let field: T = self
            .fields
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, h)| acc + *h * s(k + 1));
        self.couplings
            .iter()
            .fold(field, |acc, c| acc - c.delta * s(c.a) * s(c.b))
    }
}

/// +1 for ↑, −1 for ↓ of `site` (1-based) in basis state `index`.
pub fn spin_sign(index: usize, site: usize, sites: usize) -> i8 {
    if (index >> (sites - site)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Bitstring label of a basis state, e.g. `"↓↑"`.
pub fn basis_label(index: usize, sites: usize) -> String {
    (1..=sites)
        .map(|s| if spin_sign(index, s, sites) > 0 { '↑' } else { '↓' })
        .collect()
}

/// Dense Hamiltonian in the computational basis. All terms are z-type, so the
/// result is diagonal.
pub fn build_hamiltonian<T: Real>(spec: &ChainSpec<T>) -> Result<CMatrix<T>> {
    spec.validate()?;
    if spec.sites() > MAX_DENSE_SITES {
        return Err(Error::Capacity(format!(
            "dense Hamiltonian limited to {MAX_DENSE_SITES} sites, got {}",
            spec.sites()
        )));
    }
    let d = spec.dimension();
    let mut h = CMatrix::<T>::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = c(spec.configuration_energy(k));
    }
    Ok(h)
}

/// Eigensystem of a Hermitian matrix with ascending energies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T: Real> {
    energies: Vec<T>,
    eigenvectors: CMatrix<T>,
    /// Basis index of each level when the eigenvectors are exact basis vectors.
    permutation: Option<Vec<usize>>,
}

/// One transition frequency `ω_ij = E_j − E_i` with `i < j` (0-based levels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap<T> {
    pub lower: usize,
    pub upper: usize,
    pub omega: T,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    /// Number of spin-1/2 sites if the dimension is a power of two.
    pub fn sites(&self) -> Option<usize> {
        let d = self.dimension();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Columns are the eigenstates `|j⟩` in the computational basis.
    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    pub fn gap(&self, i: usize, j: usize) -> T {
        self.energies[j] - self.energies[i]
    }

    /// All gaps `ω_ij` with `i < j`, row-major in `(i, j)`.
    pub fn gaps(&self) -> Vec<Gap<T>> {
        let d = self.dimension();
        let mut out = Vec::with_capacity(d * d.saturating_sub(1) / 2);
        for i in 0..d {
            for j in i + 1..d {
                out.push(Gap { lower: i, upper: j, omega: self.gap(i, j) });
            }
        }
        out
    }

    /// `U diag(E) U†`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let d = self.dimension();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..d {
            let e = c(self.energies[j]);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= e);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Index of the computational basis state with largest weight in `|j⟩`.
    pub fn dominant_basis_state(&self, j: usize) -> usize {
        self.eigenvectors
            .column(j)
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(best, w), (k, z)| {
                let m = z.norm_sqr();
                if m > w {
                    (k, m)
                } else {
                    (best, w)
                }
            })
            .0
    }

    /// Bitstring label of each eigenstate's dominant basis component.
    pub fn level_labels(&self) -> Vec<String> {
        let sites = self.sites().unwrap_or(0);
        (0..self.dimension())
            .map(|j| match sites {
                0 => format!("{}", self.dominant_basis_state(j)),
                n => basis_label(self.dominant_basis_state(j), n),
            })
            .collect()
    }

    /// Rotates a computational-basis operator into the energy basis, `U† A U`.
    pub fn to_energy_basis(&self, op: &CMatrix<T>) -> CMatrix<T> {
        match &self.permutation {
            Some(perm) => CMatrix::from_fn(op.nrows(), op.ncols(), |i, j| op[(perm[i], perm[j])]),
            None => self.eigenvectors.adjoint() * op * &self.eigenvectors,
        }
    }

    /// Rotates an energy-basis operator back to the computational basis.
    pub fn to_computational_basis(&self, op: &CMatrix<T>) -> CMatrix<T> {
        &self.eigenvectors * op * self.eigenvectors.adjoint()
    }
}

/// Diagonalizes a Hermitian matrix. Ties among equal eigenvalues are ordered by
/// computational-basis index.
pub fn spectral_decomposition<T: Real>(h: &CMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let d = h.nrows();
    if d == 0 || h.ncols() != d {
        return Err(Error::Validation(format!(
            "expected a non-empty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let defect = hermiticity_defect(h);
    if !(defect <= T::tol(1e-12)) {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max |H - H†| = {:e})",
            defect
        )));
    }

    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || h[(i, j)] == Complex::default()));
    let (values, vectors) = if diagonal {
        // Exact basis vectors; no eigensolver rounding.
        ((0..d).map(|k| h[(k, k)].re).collect::<Vec<_>>(), CMatrix::<T>::identity(d, d))
    } else {
        let eig = SymmetricEigen::new(h.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let anchor: Vec<usize> = (0..d)
        .map(|j| {
            let col = vectors.column(j);
            let max = col.iter().fold(T::zero(), |m, z| m.max(z.modulus()));
            // First component within rounding of the maximum, for determinism.
            col.iter()
                .position(|z| z.modulus() >= max * T::lit(1.0 - 1e-9))
                .unwrap_or(0)
        })
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| {
        values[x]
            .partial_cmp(&values[y])
            .unwrap_or(Ordering::Equal)
            .then(anchor[x].cmp(&anchor[y]))
    });

    let mut eigenvectors = CMatrix::<T>::zeros(d, d);
    let mut energies = Vec::with_capacity(d);
    for (new, &old) in order.iter().enumerate() {
        energies.push(values[old]);
        let mut col = vectors.column(old).into_owned();
        let pivot = col[anchor[old]];
        if pivot.modulus() > T::zero() {
            // Gauge: dominant component real and positive.
            let phase = pivot.conj() / c(pivot.modulus());
            col.iter_mut().for_each(|z| *z *= phase);
        }
        eigenvectors.set_column(new, &col);
    }
    let permutation = diagonal.then_some(order);
    Ok(SpectralDecomposition { energies, eigenvectors, permutation })
}

/// Two levels (or two gaps) closer than the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCollision<T> {
    pub first: usize,
    pub second: usize,
    pub difference: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCollision<T> {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub difference: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport<T> {
    pub spectrum_degenerate: bool,
    pub gaps_degenerate: bool,
    /// Level pairs `(i, j)` with `|E_i − E_j| < tol`.
    pub degenerate_levels: Vec<LevelCollision<T>>,
    /// Pairs of distinct transitions whose frequencies differ by less than `tol`.
    pub degenerate_gaps: Vec<GapCollision<T>>,
    pub tolerance: T,
}

impl<T: Real> DegeneracyReport<T> {
    pub fn is_nondegenerate(&self) -> bool {
        !self.spectrum_degenerate && !self.gaps_degenerate
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(l) = self.degenerate_levels.first() {
            parts.push(format!(
                "levels {} and {} differ by {:e}",
                l.first + 1,
                l.second + 1,
                l.difference
            ));
        }
        if let Some(g) = self.degenerate_gaps.first() {
            parts.push(format!(
                "gaps ω_{}{} and ω_{}{} differ by {:e}",
                g.first.0 + 1,
                g.first.1 + 1,
                g.second.0 + 1,
                g.second.1 + 1,
                g.difference
            ));
        }
        if parts.is_empty() {
            "nondegenerate".into()
        } else {
            format!("{} (tolerance {:e})", parts.join("; "), self.tolerance)
        }
    }
}

pub fn check_degeneracy<T: Real>(dec: &SpectralDecomposition<T>, tol: T) -> DegeneracyReport<T> {
    let e = dec.energies();
    let d = e.len();
    let mut degenerate_levels = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let diff = (e[j] - e[i]).abs();
            if diff < tol {
                degenerate_levels.push(LevelCollision { first: i, second: j, difference: diff });
            } else {
                // Energies are sorted.
                break;
            }
        }
    }

    let mut gaps = dec.gaps();
    gaps.sort_by(|x, y| {
        x.omega
            .partial_cmp(&y.omega)
            .unwrap_or(Ordering::Equal)
            .then((x.lower, x.upper).cmp(&(y.lower, y.upper)))
    });
    let mut degenerate_gaps = Vec::new();
    for a in 0..gaps.len() {
        if gaps[a].omega.abs() < tol {
            // Vanishing gaps are already listed as level collisions.
            continue;
        }
        for b in a + 1..gaps.len() {
            let diff = gaps[b].omega - gaps[a].omega;
            if diff >= tol {
                break;
            }
            degenerate_gaps.push(GapCollision {
                first: (gaps[a].lower, gaps[a].upper),
                second: (gaps[b].lower, gaps[b].upper),
                difference: diff,
            });
        }
    }

    let spectrum_degenerate = !degenerate_levels.is_empty();
    DegeneracyReport {
        spectrum_degenerate,
        gaps_degenerate: spectrum_degenerate || !degenerate_gaps.is_empty(),
        degenerate_levels,
        degenerate_gaps,
        tolerance: tol,
    }
}

/// `true` when the chain is unfrustrated: the per-term minima, summed, equal
/// the minimum of the total energy over all `2^N` configurations.
pub fn check_frustration<T: Real>(spec: &ChainSpec<T>) -> Result<bool> {
    spec.validate()?;
    let n = spec.sites();
    if n > MAX_ENUMERATION_SITES {
        return Err(Error::Capacity(format!(
            "frustration check enumerates 2^N configurations; N = {n} exceeds {MAX_ENUMERATION_SITES}"
        )));
    }
    // Each field term takes values ±h and each coupling term ±Δ over
    // configurations; enumerate those local configurations directly.
    let field_minima = spec
        .fields()
        .iter()
        .map(|&h| [h, -h].into_iter().fold(h, |m, x| m.min(x)));
    let coupling_minima = spec.couplings().iter().map(|cp| {
        [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .into_iter()
            .map(|(sa, sb)| -cp.delta * T::lit(sa * sb))
            .fold(T::max_value().unwrap_or(T::lit(f64::MAX)), |m, x| m.min(x))
    });
    let per_term: T = field_minima.chain(coupling_minima).fold(T::zero(), |acc, x| acc + x);

    let global = (0..spec.dimension())
        .map(|k| spec.configuration_energy(k))
        .fold(T::lit(f64::INFINITY), |m, x| m.min(x));

    let scale = T::one().max(global.abs());
    Ok((per_term - global).abs() <= T::tol(1e-12) * scale)
}
