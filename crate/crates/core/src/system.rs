//! A chain together with its baths and cached spectral data.

use crate::bath::{coupling_matrix_elements, BathConfig, CouplingElements};
use crate::error::{Error, Result};
use crate::generator::{build_lindblad_superoperator, build_rate_matrix, GapPolicy, LindbladSuperoperator, RateMatrix};
use crate::model::{build_hamiltonian, spectral_decomposition, ChainSpec, SpectralDecomposition};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct OpenChain<T: Real> {
    spec: ChainSpec<T>,
    baths: BathConfig<T>,
    decomposition: SpectralDecomposition<T>,
    elements: CouplingElements<T>,
    policy: GapPolicy,
}

impl<T: Real> OpenChain<T> {
    pub fn new(spec: ChainSpec<T>, baths: BathConfig<T>) -> Result<Self> {
        if spec.sites() != baths.site_count() {
            return Err(Error::Validation(format!(
                "{} sites but {} baths",
                spec.sites(),
                baths.site_count()
            )));
        }
        let decomposition = spectral_decomposition(&build_hamiltonian(&spec)?)?;
        let elements = coupling_matrix_elements(&baths, &decomposition)?;
        Ok(Self { spec, baths, decomposition, elements, policy: GapPolicy::Strict })
    }

    pub fn with_policy(mut self, policy: GapPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Same chain with different baths. The spectrum is reused; coupling
    /// elements are only recomputed when a coupling axis changes.
    pub fn with_baths(&self, baths: BathConfig<T>) -> Result<Self> {
        if baths.site_count() != self.spec.sites() {
            return Err(Error::Validation(format!(
                "{} sites but {} baths",
                self.spec.sites(),
                baths.site_count()
            )));
        }
        let same_axes = baths.sites().iter().zip(self.baths.sites()).all(|(a, b)| a.axis == b.axis);
        let elements = if same_axes {
            self.elements.clone()
        } else {
            coupling_matrix_elements(&baths, &self.decomposition)?
        };
        Ok(Self {
            spec: self.spec.clone(),
            baths,
            decomposition: self.decomposition.clone(),
            elements,
            policy: self.policy,
        })
    }

    pub fn spec(&self) -> &ChainSpec<T> {
        &self.spec
    }

    pub fn baths(&self) -> &BathConfig<T> {
        &self.baths
    }

    pub fn decomposition(&self) -> &SpectralDecomposition<T> {
        &self.decomposition
    }

    pub fn elements(&self) -> &CouplingElements<T> {
        &self.elements
    }

    pub fn policy(&self) -> GapPolicy {
        self.policy
    }

    pub fn rate_matrix(&self) -> Result<RateMatrix<T>> {
        build_rate_matrix(&self.decomposition, &self.elements, &self.baths, self.policy)
    }

    pub fn lindblad(&self) -> Result<LindbladSuperoperator<T>> {
        build_lindblad_superoperator(&self.decomposition, &self.elements, &self.baths, self.policy)
    }
}
