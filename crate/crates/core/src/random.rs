//! Random nondegenerate chains for statistical tests and scaling probes.
//!
//! Fields `h_n ~ U[0.5, 1.5]`, couplings `Δ_ab ~ U[0.05, 0.45]` on every pair
//! `a < b`, `κ_n ~ U[0.1, 1]`, and `T` log-uniform on `[0.1, 10]`. Every bath
//! couples through `σ_x`. Draws whose spectrum (and, under the strict policy,
//! gap set) is degenerate are rejected.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bath::BathConfig;
use crate::error::{Error, Result};
use crate::generator::GapPolicy;
use crate::model::{check_degeneracy, ChainSpec, Coupling, DEFAULT_DEGENERACY_TOL, MAX_DENSE_SITES};
use crate::scalar::Real;
use crate::system::OpenChain;

pub const FIELD_RANGE: (f64, f64) = (0.5, 1.5);
pub const COUPLING_RANGE: (f64, f64) = (0.05, 0.45);
pub const KAPPA_RANGE: (f64, f64) = (0.1, 1.0);
pub const TEMPERATURE_RANGE: (f64, f64) = (0.1, 10.0);
pub const MAX_ATTEMPTS: usize = 1000;

/// Deterministic generator for draw `index` of the `sites`-spin ensemble.
pub fn draw_rng(seed: u64, sites: usize, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((sites as u64) << 40) ^ index);
    rng
}

/// Gap policy used for random chains of this size. Beyond six sites the
/// number of gaps makes accidental near-coincidences at the default tolerance
/// almost certain, so only the spectrum is required to be nondegenerate.
pub fn policy_for(sites: usize) -> GapPolicy {
    if sites <= 6 {
        GapPolicy::Strict
    } else {
        GapPolicy::Group
    }
}

pub fn random_spec<T: Real, R: Rng + ?Sized>(rng: &mut R, sites: usize) -> Result<ChainSpec<T>> {
    let fields = (0..sites).map(|_| T::lit(rng.random_range(FIELD_RANGE.0..=FIELD_RANGE.1))).collect();
    let mut couplings = Vec::new();
    for a in 1..=sites {
        for b in a + 1..=sites {
            couplings.push(Coupling::new(a, b, T::lit(rng.random_range(COUPLING_RANGE.0..=COUPLING_RANGE.1))));
        }
    }
    ChainSpec::new(fields, couplings)
}

pub fn random_baths<T: Real, R: Rng + ?Sized>(rng: &mut R, sites: usize) -> Result<BathConfig<T>> {
    let kappas: Vec<T> = (0..sites).map(|_| T::lit(rng.random_range(KAPPA_RANGE.0..=KAPPA_RANGE.1))).collect();
    let (lo, hi) = (TEMPERATURE_RANGE.0.ln(), TEMPERATURE_RANGE.1.ln());
    BathConfig::sigma_x(T::lit(rng.random_range(lo..=hi).exp()), &kappas)
}

/// Draws until a chain passes the degeneracy check for `policy_for(sites)`.
pub fn random_open_chain<T: Real, R: Rng + ?Sized>(rng: &mut R, sites: usize) -> Result<OpenChain<T>> {
    if sites == 0 || sites > MAX_DENSE_SITES {
        return Err(Error::Capacity(format!("random chains support 1..={MAX_DENSE_SITES} sites, got {sites}")));
    }
    let policy = policy_for(sites);
    for _ in 0..MAX_ATTEMPTS {
        let spec = random_spec::<T, _>(rng, sites)?;
        let baths = random_baths::<T, _>(rng, sites)?;
        let chain = OpenChain::new(spec, baths)?.with_policy(policy);
        let report = check_degeneracy(chain.decomposition(), T::lit(DEFAULT_DEGENERACY_TOL));
        let accepted = match policy {
            GapPolicy::Strict => report.is_nondegenerate(),
            GapPolicy::Group => !report.spectrum_degenerate,
        };
        if accepted {
            return Ok(chain);
        }
    }
    Err(Error::Degeneracy(format!("no nondegenerate {sites}-site chain in {MAX_ATTEMPTS} draws")))
}
