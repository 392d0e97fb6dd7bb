//! Structural analysis of rate matrices and the parameter-sweep protocol.

use rayon::prelude::*;

use crate::bath::BathConfig;
use crate::dynamics::{boltzmann_weights, excitation_probability, propagate_populations, PopulationState};
use crate::error::{Error, Result};
use crate::generator::RateMatrix;
use crate::model::{ChainSpec, SpectralDecomposition};
use crate::scalar::{RVector, Real};
use crate::random::{draw_rng, random_open_chain};
use crate::system::OpenChain;

/// Decoupled energy subspaces: connected components of the rate graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition<T: Real> {
    blocks: Vec<Vec<usize>>,
    restricted_gibbs: Vec<RVector<T>>,
}

impl<T: Real> BlockPartition<T> {
    /// 0-based level indices, each block sorted, blocks ordered by smallest member.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Gibbs distribution restricted to each block, at the generator's temperature.
    pub fn restricted_gibbs(&self) -> &[RVector<T>] {
        &self.restricted_gibbs
    }

    /// 1-based block listing, e.g. `[[1, 2], [3, 4]]`.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }

    /// Total population carried by each block.
    pub fn block_weights(&self, p: &PopulationState<T>) -> Vec<T> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(T::zero(), |a, &i| a + p.get(i)))
            .collect()
    }
}

fn components(d: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; d];
    let mut blocks = Vec::new();
    for start in 0..d {
        if label[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut members = vec![start];
        label[start] = id;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for (j, lab) in label.iter_mut().enumerate() {
                if *lab == usize::MAX && linked(i, j) {
                    *lab = id;
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

fn partition<T: Real>(rates: &RateMatrix<T>, blocks: Vec<Vec<usize>>) -> BlockPartition<T> {
    let restricted_gibbs = blocks
        .iter()
        .map(|b| {
            let e: Vec<T> = b.iter().map(|&i| rates.energies()[i]).collect();
            let w = boltzmann_weights(&e, rates.temperature());
            let mut v = RVector::zeros(rates.dimension());
            for (&i, x) in b.iter().zip(w) {
                v[i] = x;
            }
            v
        })
        .collect();
    BlockPartition { blocks, restricted_gibbs }
}

/// Blocks from the structural mask: edge `(i, j)` iff `Λ_ij` or `Λ_ji` is
/// structurally nonzero.
pub fn connectivity_blocks<T: Real>(rates: &RateMatrix<T>) -> BlockPartition<T> {
    let mask = rates.mask();
    let blocks = components(rates.dimension(), |i, j| i != j && (mask[(i, j)] || mask[(j, i)]));
    partition(rates, blocks)
}

/// Effective blocks: edges only where `max(Λ_ij, Λ_ji) > threshold`. A zero
/// threshold falls back to the structural blocks.
pub fn effective_blocks<T: Real>(rates: &RateMatrix<T>, threshold: T) -> BlockPartition<T> {
    if threshold == T::zero() {
        return connectivity_blocks(rates);
    }
    let blocks = components(rates.dimension(), |i, j| {
        i != j && rates.rate(i, j).max(rates.rate(j, i)) > threshold
    });
    partition(rates, blocks)
}

/// Minimum number of zeros of the rate matrix of `sites` spins with one
/// energy-exchanging bath each: `2^N (2^N − (N + 1))`.
pub fn predicted_zero_count(sites: u32) -> Result<u128> {
    if sites == 0 || sites > 62 {
        return Err(Error::Validation(format!("zero-count law needs 1 <= N <= 62, got {sites}")));
    }
    let d = 1u128 << sites;
    Ok(d * (d - (sites as u128 + 1)))
}

/// Structurally zero entries of the full `d × d` matrix, diagonal included.
pub fn count_structural_zeros<T: Real>(rates: &RateMatrix<T>) -> usize {
    rates.mask().iter().filter(|&&m| !m).count()
}

/// Largest relative deviation of `Γ^(G)_ji / Γ^(D)_ij` from `exp(−ω_ij/T)`
/// over structurally nonzero pairs. Pairs whose gain rate underflows to zero
/// are skipped.
pub fn detailed_balance_audit<T: Real>(
    rates: &RateMatrix<T>,
    dec: &SpectralDecomposition<T>,
    temperature: T,
) -> Result<T> {
    if !(temperature > T::zero()) {
        return Err(Error::Domain(format!("detailed balance audit needs T > 0, got {temperature:e}")));
    }
    if dec.dimension() != rates.dimension() {
        return Err(Error::Validation("spectrum and rate matrix dimensions differ".into()));
    }
    let d = rates.dimension();
    let mut worst = T::zero();
    for i in 0..d {
        for j in i + 1..d {
            if !rates.mask()[(i, j)] {
                continue;
            }
            let damping = rates.rate(i, j);
            let gain = rates.rate(j, i);
            if damping == T::zero() || gain == T::zero() {
                continue;
            }
            // ratio · exp(ω/T) − 1, evaluated in log space to avoid overflow.
            let log_excess = (gain / damping).ln() + dec.gap(i, j) / temperature;
            worst = worst.max(log_excess.exp_m1().abs());
        }
    }
    Ok(worst)
}

/// Long-time populations predicted from block conservation: each block keeps
/// its initial weight, distributed by the Gibbs law within the block.
pub fn restricted_gibbs_prediction<T: Real>(
    blocks: &BlockPartition<T>,
    p0: &PopulationState<T>,
    dec: &SpectralDecomposition<T>,
    temperature: T,
) -> Result<PopulationState<T>> {
    if !(temperature >= T::zero()) {
        return Err(Error::Domain(format!("temperature {temperature:e} must be >= 0")));
    }
    let d = dec.dimension();
    if p0.len() != d {
        return Err(Error::Validation("initial state and spectrum dimensions differ".into()));
    }
    let mut p = vec![T::zero(); d];
    for (block, weight) in blocks.blocks().iter().zip(blocks.block_weights(p0)) {
        let e: Vec<T> = block.iter().map(|&i| dec.energies()[i]).collect();
        for (&i, w) in block.iter().zip(boltzmann_weights(&e, temperature)) {
            p[i] = weight * w;
        }
    }
    PopulationState::new(p)
}

/// What a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis<T> {
    /// Temperature varies; couplings fixed.
    Temperature { kappas: Vec<T> },
    /// `κ^(site)` varies (1-based site); temperature fixed.
    Coupling { site: usize, temperature: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure<T> {
    pub index: usize,
    pub grid_value: T,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub axis: SweepAxis<T>,
    pub grid: Vec<T>,
    /// `P_exc(t*)` per grid point; `None` where the point failed.
    pub values: Vec<Option<T>>,
    pub failures: Vec<SweepFailure<T>>,
    pub eval_time: T,
}

impl<T: Real> SweepResult<T> {
    /// `(grid value, P_exc)` for the points that succeeded.
    pub fn points(&self) -> Vec<(T, T)> {
        self.grid
            .iter()
            .zip(&self.values)
            .filter_map(|(&g, v)| v.map(|v| (g, v)))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

fn validate_sweep<T: Real>(grid: &[T], t_star: T) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Validation("sweep grid is empty".into()));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::Validation("sweep grid must be strictly monotone".into()));
    }
    if !(t_star > T::zero()) {
        return Err(Error::Validation(format!("evaluation time must be > 0, got {t_star:e}")));
    }
    Ok(())
}

fn excitation_after<T: Real>(chain: &OpenChain<T>, t_star: T) -> Result<T> {
    let rates = chain.rate_matrix()?;
    let p0 = PopulationState::basis(rates.dimension(), 0)?;
    let traj = propagate_populations(&rates, &p0, &[t_star])?;
    Ok(excitation_probability(&traj)[0])
}

fn run_sweep<T: Real>(
    axis: SweepAxis<T>,
    grid: &[T],
    t_star: T,
    point: impl Fn(T) -> Result<T> + Sync,
) -> SweepResult<T> {
    let outcomes: Vec<Result<T>> = grid.par_iter().map(|&g| point(g)).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (index, (outcome, &g)) in outcomes.into_iter().zip(grid).enumerate() {
        match outcome {
            Ok(v) => values.push(Some(v)),
            Err(e) => {
                values.push(None);
                failures.push(SweepFailure { index, grid_value: g, error: e });
            }
        }
    }
    SweepResult { axis, grid: grid.to_vec(), values, failures, eval_time: t_star }
}

/// `P_exc(t*)` from the ground state for each temperature in `grid`.
pub fn sweep_temperature<T: Real>(
    spec: &ChainSpec<T>,
    baths: &BathConfig<T>,
    grid: &[T],
    t_star: T,
) -> Result<SweepResult<T>> {
    validate_sweep(grid, t_star)?;
    let base = OpenChain::new(spec.clone(), baths.clone())?;
    let axis = SweepAxis::Temperature { kappas: baths.kappas() };
    Ok(run_sweep(axis, grid, t_star, |temperature| {
        excitation_after(&base.with_baths(baths.with_temperature(temperature)?)?, t_star)
    }))
}

/// `P_exc(t*)` from the ground state for each `κ^(site)` in `grid` (1-based site).
pub fn sweep_coupling<T: Real>(
    spec: &ChainSpec<T>,
    baths: &BathConfig<T>,
    site: usize,
    grid: &[T],
    t_star: T,
) -> Result<SweepResult<T>> {
    validate_sweep(grid, t_star)?;
    if site == 0 || site > baths.site_count() {
        return Err(Error::Validation(format!(
            "sweep site {site} out of range 1..={}",
            baths.site_count()
        )));
    }
    let base = OpenChain::new(spec.clone(), baths.clone())?;
    let axis = SweepAxis::Coupling { site, temperature: baths.temperature() };
    Ok(run_sweep(axis, grid, t_star, |kappa| {
        excitation_after(&base.with_baths(baths.with_kappa(site, kappa)?)?, t_star)
    }))
}

/// Temperature of steepest `∂_T P_exc(t*)` using central differences on the
/// sweep grid; ties go to the lower temperature.
pub fn locate_t_theta<T: Real>(sweep: &SweepResult<T>) -> Result<T> {
    if !matches!(sweep.axis, SweepAxis::Temperature { .. }) {
        return Err(Error::Validation("T_θ needs a temperature sweep".into()));
    }
    if !sweep.is_complete() {
        return Err(Error::Validation(format!("sweep has {} failed points", sweep.failures.len())));
    }
    let mut pts = sweep.points();
    if pts.len() < 3 {
        return Err(Error::Validation(format!("T_θ needs at least 3 points, got {}", pts.len())));
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let (lo, hi) = pts.iter().fold((T::lit(f64::INFINITY), T::lit(f64::NEG_INFINITY)), |(lo, hi), p| {
        (lo.min(p.1), hi.max(p.1))
    });
    if !(hi - lo > T::tol(1e-12)) {
        return Err(Error::Validation("P_exc does not vary over the sweep".into()));
    }
    let mut best: Option<(T, T)> = None;
    for k in 1..pts.len() - 1 {
        let slope = (pts[k + 1].1 - pts[k - 1].1) / (pts[k + 1].0 - pts[k - 1].0);
        match best {
            Some((_, s)) if slope <= s => {}
            _ => best = Some((pts[k].0, slope)),
        }
    }
    Ok(best.expect("at least one interior point").0)
}

/// One row of the zero-count scaling table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZerosRow {
    pub sites: usize,
    pub draws: usize,
    /// Smallest counted number of structural zeros over the draws.
    pub counted_min: usize,
    pub counted_max: usize,
    pub predicted: u128,
    /// Draws whose count differs from the prediction.
    pub mismatches: usize,
}

impl ZerosRow {
    pub fn matches(&self) -> bool {
        self.mismatches == 0
    }
}

/// Counts structural zeros of `draws` random chains for each `N` in
/// `2..=max_sites`. Draw `k` of size `N` is seeded from `(seed, N, k)`, so the
/// table does not depend on thread scheduling.
pub fn zeros_scaling(max_sites: usize, draws: usize, seed: u64) -> Result<Vec<ZerosRow>> {
    if max_sites < 2 {
        return Err(Error::Validation(format!("zeros scaling needs max N >= 2, got {max_sites}")));
    }
    if draws == 0 {
        return Err(Error::Validation("zeros scaling needs at least one draw".into()));
    }
    (2..=max_sites)
        .map(|sites| {
            let predicted = predicted_zero_count(sites as u32)?;
            let counts = (0..draws as u64)
                .into_par_iter()
                .map(|k| {
                    let chain: OpenChain<f64> = random_open_chain(&mut draw_rng(seed, sites, k), sites)?;
                    Ok(count_structural_zeros(&chain.rate_matrix()?))
                })
                .collect::<Result<Vec<usize>>>()?;
            Ok(ZerosRow {
                sites,
                draws,
                counted_min: counts.iter().copied().min().unwrap_or(0),
                counted_max: counts.iter().copied().max().unwrap_or(0),
                predicted,
                mismatches: counts.iter().filter(|&&c| c as u128 != predicted).count(),
            })
        })
        .collect()
}

/// Thermal route versus coupling route to excitation from the ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationComparison<T> {
    pub thermal: SweepResult<T>,
    pub chemical: SweepResult<T>,
    /// Largest `P_exc(t*)` reached by heating alone.
    pub thermal_max: T,
    /// `P_exc(t*)` at the last point of the coupling sweep.
    pub chemical_end: T,
}

impl<T: Real> ExcitationComparison<T> {
    /// Heating stays below one half while opening the coupling crosses it.
    pub fn crosses_half_only_chemically(&self) -> bool {
        let half = T::lit(0.5);
        self.thermal_max < half && self.chemical_end > half
    }
}

/// Runs a temperature sweep at the given couplings and a `κ^(site)` sweep at
/// the bath temperature, both from the ground state to `t*`.
pub fn compare_thermal_chemical<T: Real>(
    spec: &ChainSpec<T>,
    baths: &BathConfig<T>,
    temperatures: &[T],
    site: usize,
    kappas: &[T],
    t_star: T,
) -> Result<ExcitationComparison<T>> {
    let thermal = sweep_temperature(spec, baths, temperatures, t_star)?;
    let chemical = sweep_coupling(spec, baths, site, kappas, t_star)?;
    for s in [&thermal, &chemical] {
        if let Some(f) = s.failures.first() {
            return Err(Error::NumericalIntegrity(format!(
                "sweep point {} ({:e}) failed: {}",
                f.index, f.grid_value, f.error
            )));
        }
    }
    let thermal_max = thermal.points().iter().fold(T::zero(), |m, p| m.max(p.1));
    let chemical_end = chemical.values.last().copied().flatten().unwrap_or_else(T::zero);
    Ok(ExcitationComparison { thermal, chemical, thermal_max, chemical_end })
}
