//! Independent per-site thermal baths: spectral densities, Bose-Einstein
//! occupations and coupling-operator matrix elements in the energy basis.

use std::fmt;
use std::str::FromStr;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::model::SpectralDecomposition;
use crate::scalar::{CMatrix, Real};

/// Pauli axis of the site operator `S^(n)` that couples to bath `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        })
    }
}

impl FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(PauliAxis::X),
            "y" => Ok(PauliAxis::Y),
            "z" => Ok(PauliAxis::Z),
            other => Err(Error::Specification(format!(
                "unknown Pauli axis {other:?} (expected x, y or z)"
            ))),
        }
    }
}

/// Spectral-density family `J(ω)`. Only the ohmic member `J = κω` exists; no
/// cutoff is modelled since `J` is only sampled at the system's gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectralDensity {
    #[default]
    Ohmic,
}

impl SpectralDensity {
    pub fn evaluate<T: Real>(&self, kappa: T, omega: T) -> Result<T> {
        match self {
            SpectralDensity::Ohmic => ohmic_spectral_density(kappa, omega),
        }
    }
}

/// `J(ω) = κω`.
pub fn ohmic_spectral_density<T: Real>(kappa: T, omega: T) -> Result<T> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "spectral density evaluated at ω = {omega:e}; needs ω > 0"
        )));
    }
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(Error::Domain(format!("coupling strength κ = {kappa:e} must be >= 0")));
    }
    Ok(kappa * omega)
}

/// Mean thermal occupation `1 / (exp(ω/T) − 1)`; zero at `T = 0`.
pub fn bose_einstein<T: Real>(omega: T, temperature: T) -> Result<T> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Domain(format!("occupation evaluated at ω = {omega:e}; needs ω > 0")));
    }
    if !(temperature >= T::zero()) {
        return Err(Error::Domain(format!("temperature {temperature:e} must be >= 0")));
    }
    if temperature == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::one() / (omega / temperature).exp_m1())
}

/// The bath attached to one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteBath<T> {
    pub axis: PauliAxis,
    pub kappa: T,
}

/// One bath per site, all at a common temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct BathConfig<T> {
    temperature: T,
    sites: Vec<SiteBath<T>>,
    density: SpectralDensity,
}

impl<T: Real> BathConfig<T> {
    pub fn new(temperature: T, sites: Vec<SiteBath<T>>) -> Result<Self> {
        if !(temperature >= T::zero()) || !temperature.is_finite() {
            return Err(Error::Specification(format!(
                "temperature must be finite and >= 0, got {temperature:e}"
            )));
        }
        if sites.is_empty() {
            return Err(Error::Specification("at least one site bath is required".into()));
        }
        for (n, s) in sites.iter().enumerate() {
            if !(s.kappa >= T::zero()) || !s.kappa.is_finite() {
                return Err(Error::Specification(format!(
                    "κ^({}) = {:e} must be finite and >= 0",
                    n + 1,
                    s.kappa
                )));
            }
        }
        Ok(Self { temperature, sites, density: SpectralDensity::Ohmic })
    }

    /// σ_x coupling on every site with the given strengths.
    pub fn sigma_x(temperature: T, kappas: &[T]) -> Result<Self> {
        Self::new(
            temperature,
            kappas.iter().map(|&kappa| SiteBath { axis: PauliAxis::X, kappa }).collect(),
        )
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn sites(&self) -> &[SiteBath<T>] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn kappas(&self) -> Vec<T> {
        self.sites.iter().map(|s| s.kappa).collect()
    }

    pub fn density(&self) -> SpectralDensity {
        self.density
    }

    pub fn with_temperature(&self, temperature: T) -> Result<Self> {
        Self::new(temperature, self.sites.clone())
    }

    /// Replaces `κ^(site)` (1-based).
    pub fn with_kappa(&self, site: usize, kappa: T) -> Result<Self> {
        if site == 0 || site > self.sites.len() {
            return Err(Error::Specification(format!(
                "site {site} out of range 1..={}",
                self.sites.len()
            )));
        }
        let mut sites = self.sites.clone();
        sites[site - 1].kappa = kappa;
        Self::new(self.temperature, sites)
    }

    /// Rates `(J(ω)(1 + n̄), J(ω) n̄)` for emission and absorption at `ω` on `site`.
    pub fn transition_rates(&self, site: usize, omega: T) -> Result<(T, T)> {
        let j = self.density.evaluate(self.sites[site].kappa, omega)?;
        let n = bose_einstein(omega, self.temperature)?;
        Ok((j * (T::one() + n), j * n))
    }
}

/// `σ_axis` acting on `site` (1-based) of an `sites`-spin chain, computational basis.
pub fn site_operator<T: Real>(axis: PauliAxis, site: usize, sites: usize) -> CMatrix<T> {
    let d = 1usize << sites;
    let bit = 1usize << (sites - site);
    let mut m = CMatrix::<T>::zeros(d, d);
    for k in 0..d {
        let down = k & bit != 0;
        match axis {
            PauliAxis::X => m[(k ^ bit, k)] = Complex::new(T::one(), T::zero()),
            // σ_y|↑⟩ = i|↓⟩, σ_y|↓⟩ = −i|↑⟩
            PauliAxis::Y => {
                let im = if down { -T::one() } else { T::one() };
                m[(k ^ bit, k)] = Complex::new(T::zero(), im);
            }
            PauliAxis::Z => {
                m[(k, k)] = Complex::new(if down { -T::one() } else { T::one() }, T::zero())
            }
        }
    }
    m
}

/// `S_ij^(n) = ⟨i|S^(n)|j⟩` for every site, in the energy eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingElements<T: Real> {
    matrices: Vec<CMatrix<T>>,
}

impl<T: Real> CouplingElements<T> {
    pub fn sites(&self) -> usize {
        self.matrices.len()
    }

    pub fn dimension(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    /// Matrix of site `n` (0-based).
    pub fn matrix(&self, site: usize) -> &CMatrix<T> {
        &self.matrices[site]
    }

    pub fn element(&self, site: usize, i: usize, j: usize) -> Complex<T> {
        self.matrices[site][(i, j)]
    }

    pub fn squared_modulus(&self, site: usize, i: usize, j: usize) -> T {
        self.matrices[site][(i, j)].norm_sqr()
    }

    /// Exact-zero test; entries below the rotation noise floor were already zeroed.
    pub fn is_nonzero(&self, site: usize, i: usize, j: usize) -> bool {
        self.matrices[site][(i, j)] != Complex::default()
    }
}

/// Rotates each site operator into the energy basis. Entries below a small
/// multiple of machine precision (rotation noise) are set to exact zero and the
/// result is symmetrized, so structural zeros stay exact.
pub fn coupling_matrix_elements<T: Real>(
    config: &BathConfig<T>,
    dec: &SpectralDecomposition<T>,
) -> Result<CouplingElements<T>> {
    let sites = dec.sites().ok_or_else(|| {
        Error::Validation(format!("dimension {} is not a power of two", dec.dimension()))
    })?;
    if sites != config.site_count() {
        return Err(Error::Validation(format!(
            "bath configuration has {} sites, spectrum describes {sites}",
            config.site_count()
        )));
    }
    let d = dec.dimension();
    let floor = T::default_epsilon() * T::lit(64.0 * d as f64);
    let half = Complex::new(T::lit(0.5), T::zero());
    let matrices = config
        .sites()
        .iter()
        .enumerate()
        .map(|(n, bath)| {
            let op = site_operator::<T>(bath.axis, n + 1, sites);
            let rotated = dec.to_energy_basis(&op);
            let mut s = (&rotated + rotated.adjoint()) * half;
            for z in s.iter_mut() {
                if z.re.abs() < floor {
                    z.re = T::zero();
                }
                if z.im.abs() < floor {
                    z.im = T::zero();
                }
            }
            s
        })
        .collect();
    Ok(CouplingElements { matrices })
}
