//! One function per subcommand. Each returns its output files in memory so
//! writing stays serialized and deterministic.

use std::fmt::Write as _;
use std::str::FromStr;

use spinbath::analysis::{
    connectivity_blocks, count_structural_zeros, effective_blocks, locate_t_theta, predicted_zero_count,
    sweep_coupling, sweep_temperature, zeros_scaling,
};
use spinbath::dynamics::{excitation_probability, propagate_density, propagate_populations, steady_states, Engine};
use spinbath::model::{basis_label, check_degeneracy, check_frustration};
use spinbath::system::OpenChain;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{num, row, sweep_csv, Artifact, Header};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Rates,
    Evolve,
    Steady,
    Blocks,
    SweepT,
    SweepKappa,
    ZerosScaling,
    Fig2,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Rates => "rates",
            Command::Evolve => "evolve",
            Command::Steady => "steady",
            Command::Blocks => "blocks",
            Command::SweepT => "sweep-T",
            Command::SweepKappa => "sweep-kappa",
            Command::ZerosScaling => "zeros-scaling",
            Command::Fig2 => "fig2",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Command::Spectrum,
            Command::Rates,
            Command::Evolve,
            Command::Steady,
            Command::Blocks,
            Command::SweepT,
            Command::SweepKappa,
            Command::ZerosScaling,
            Command::Fig2,
        ];
        all.into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("[run] command: unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZerosOptions {
    pub max_n: usize,
    pub draws: usize,
    pub seed: u64,
}

/// Runs a config-driven command. `zeros-scaling` takes its options from the
/// `[run]` section and needs `seed`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Vec<Artifact>> {
    match command {
        Command::Spectrum => spectrum(cfg),
        Command::Rates => rates(cfg),
        Command::Evolve => evolve(cfg),
        Command::Steady => steady(cfg),
        Command::Blocks => blocks(cfg),
        Command::SweepT => sweep_t(cfg),
        Command::SweepKappa => sweep_kappa(cfg),
        Command::ZerosScaling => {
            let seed = cfg
                .run
                .seed
                .ok_or_else(|| CliError::Config("zeros-scaling needs a seed ([run] seed or --seed)".into()))?;
            zeros_table(ZerosOptions { max_n: cfg.run.zeros_max_n, draws: cfg.run.zeros_draws, seed }, Some(&cfg.hash))
        }
        Command::Fig2 => fig2(cfg),
    }
}

fn header(command: Command, cfg: &RunConfig) -> Header {
    Header::new(command.name(), Some(&cfg.hash)).with(cfg.echo())
}

fn open_chain(cfg: &RunConfig) -> Result<OpenChain<f64>> {
    Ok(OpenChain::new(cfg.chain.clone(), cfg.baths.clone())?.with_policy(cfg.run.gap_policy))
}

fn spectrum(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let chain = open_chain(cfg)?;
    let dec = chain.decomposition();
    let sites = cfg.chain.sites();
    let h = header(Command::Spectrum, cfg);

    let mut levels = h.render();
    levels.push_str("level,label,basis_index,energy\n");
    for (j, (label, e)) in dec.level_labels().iter().zip(dec.energies()).enumerate() {
        let _ = writeln!(levels, "{},{label},{},{}", j + 1, dec.dominant_basis_state(j), num(*e));
    }

    let mut gaps = h.render();
    gaps.push_str("lower,upper,omega\n");
    for g in dec.gaps() {
        let _ = writeln!(gaps, "{},{},{}", g.lower + 1, g.upper + 1, num(g.omega));
    }

    let report = check_degeneracy(dec, cfg.run.degeneracy_tol);
    let frustrated = match check_frustration(&cfg.chain) {
        Ok(unfrustrated) => serde_json::Value::Bool(!unfrustrated),
        Err(_) => serde_json::Value::Null,
    };
    let json = serde_json::json!({
        "provenance": h.lines(),
        "sites": sites,
        "tolerance": num(report.tolerance),
        "spectrum_degenerate": report.spectrum_degenerate,
        "gaps_degenerate": report.gaps_degenerate,
        "degenerate_levels": report.degenerate_levels.iter().map(|c| [c.first + 1, c.second + 1]).collect::<Vec<_>>(),
        "degenerate_gaps": report
            .degenerate_gaps
            .iter()
            .map(|c| [[c.first.0 + 1, c.first.1 + 1], [c.second.0 + 1, c.second.1 + 1]])
            .collect::<Vec<_>>(),
        "frustrated": frustrated,
        "basis": (0..cfg.chain.dimension()).map(|k| basis_label(k, sites)).collect::<Vec<_>>(),
    });
    Ok(vec![
        Artifact::new("spectrum.csv", levels),
        Artifact::new("gaps.csv", gaps),
        Artifact::new("degeneracy.json", pretty(&json)),
    ])
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn rates(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let chain = open_chain(cfg)?;
    let r = chain.rate_matrix()?;
    let d = r.dimension();
    let mut h = header(Command::Rates, cfg);
    h.push(format!("structural_zeros = {}", count_structural_zeros(&r)));
    if let Ok(p) = predicted_zero_count(cfg.chain.sites() as u32) {
        h.push(format!("predicted_minimum_zeros = {p}"));
    }
    h.push("entry (i, j) is the rate from level j to level i".to_string());
    let columns: Vec<String> = (1..=d).map(|j| format!("from_{j}")).collect();

    let mut matrix = h.render();
    let _ = writeln!(matrix, "to,energy,{}", columns.join(","));
    for i in 0..d {
        let _ = writeln!(matrix, "{},{},{}", i + 1, num(r.energies()[i]), row((0..d).map(|j| r.rate(i, j))));
    }

    let mut mask = h.render();
    let _ = writeln!(mask, "to,{}", columns.join(","));
    for i in 0..d {
        let bits: Vec<&str> = (0..d).map(|j| if r.mask()[(i, j)] { "1" } else { "0" }).collect();
        let _ = writeln!(mask, "{},{}", i + 1, bits.join(","));
    }
    Ok(vec![Artifact::new("rates.csv", matrix), Artifact::new("mask.csv", mask)])
}

fn trajectory_csv(h: &Header, traj: &spinbath::dynamics::Trajectory<f64>) -> String {
    let d = traj.populations.first().map_or(0, |p| p.len());
    let mut out = h.render();
    let cols: Vec<String> = (1..=d).map(|i| format!("p_{i}")).collect();
    let _ = writeln!(out, "t,{},P_exc", cols.join(","));
    for ((t, p), e) in traj.times.iter().zip(&traj.populations).zip(excitation_probability(traj)) {
        let _ = writeln!(out, "{},{},{}", num(*t), row(p.as_slice().iter().copied()), num(e));
    }
    out
}

fn evolve(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let chain = open_chain(cfg)?;
    let mut h = header(Command::Evolve, cfg);
    h.push(format!("initial = [{}]", row(cfg.run.initial.as_slice().iter().copied())));
    let traj = match cfg.run.engine {
        Engine::Pauli => {
            h.push("engine = pauli");
            propagate_populations(&chain.rate_matrix()?, &cfg.run.initial, &cfg.run.times)?
        }
        Engine::Lindblad => {
            h.push("engine = lindblad");
            propagate_density(&chain.lindblad()?, &cfg.run.initial.to_density(), &cfg.run.times)?
        }
    };
    Ok(vec![Artifact::new("trajectory.csv", trajectory_csv(&h, &traj))])
}

fn steady(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let chain = open_chain(cfg)?;
    let r = chain.rate_matrix()?;
    let blocks = connectivity_blocks(&r);
    let states = steady_states(&r, cfg.run.kernel_tol)?;
    let mut h = header(Command::Steady, cfg);
    h.push(format!("kernel_tol = {}", num(cfg.run.kernel_tol)));
    h.push("one stationary vector per decoupled block".to_string());
    let d = r.dimension();
    let mut out = h.render();
    let cols: Vec<String> = (1..=d).map(|i| format!("p_{i}")).collect();
    let _ = writeln!(out, "block,levels,{}", cols.join(","));
    for (k, (members, p)) in blocks.one_based().iter().zip(&states).enumerate() {
        let levels: Vec<String> = members.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{},{},{}", k + 1, levels.join(" "), row(p.as_slice().iter().copied()));
    }
    Ok(vec![Artifact::new("steady.csv", out)])
}

fn blocks(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let chain = open_chain(cfg)?;
    let r = chain.rate_matrix()?;
    let structural = connectivity_blocks(&r);
    let mut h = header(Command::Blocks, cfg);
    h.push(format!("block_threshold = {}", num(cfg.run.block_threshold)));
    let gibbs: Vec<Vec<String>> = structural
        .restricted_gibbs()
        .iter()
        .map(|v| v.iter().map(|x| num(*x)).collect())
        .collect();
    let mut json = serde_json::json!({
        "provenance": h.lines(),
        "blocks": structural.one_based(),
        "restricted_gibbs": gibbs,
    });
    if cfg.run.block_threshold > 0.0 {
        json["effective_blocks"] = serde_json::json!(effective_blocks(&r, cfg.run.block_threshold).one_based());
    }
    Ok(vec![Artifact::new("blocks.json", pretty(&json))])
}

fn fail_on_sweep_errors(sweep: &spinbath::analysis::SweepResult<f64>) -> Result<()> {
    match sweep.failures.first() {
        Some(f) => Err(CliError::Core(f.error.clone())),
        None => Ok(()),
    }
}

fn sweep_t(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let sweep = sweep_temperature(&cfg.chain, &cfg.baths, &cfg.temperature_grid(), cfg.run.eval_time)?;
    let mut h = header(Command::SweepT, cfg);
    h.push(format!("temperature_grid = {}", RunConfig::describe_grid(&cfg.run.temperature_grid)));
    if let Ok(t) = locate_t_theta(&sweep) {
        h.push(format!("t_theta = {}", num(t)));
    }
    let artifacts = vec![Artifact::new("sweep_T.csv", sweep_csv(&h, &sweep, "T"))];
    fail_on_sweep_errors(&sweep).map(|_| artifacts)
}

fn sweep_kappa(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let site = cfg.run.kappa_site;
    let sweep = sweep_coupling(&cfg.chain, &cfg.baths, site, &cfg.kappa_grid(), cfg.run.eval_time)?;
    let mut h = header(Command::SweepKappa, cfg);
    h.push(format!("kappa_site = {site}"));
    h.push(format!("kappa_grid = {}", RunConfig::describe_grid(&cfg.run.kappa_grid)));
    let artifacts = vec![Artifact::new("sweep_kappa.csv", sweep_csv(&h, &sweep, &format!("kappa_{site}")))];
    fail_on_sweep_errors(&sweep).map(|_| artifacts)
}

/// Structural-zero counts of random chains against `2^N (2^N − (N + 1))`.
pub fn zeros_table(opts: ZerosOptions, config_hash: Option<&str>) -> Result<Vec<Artifact>> {
    let rows = zeros_scaling(opts.max_n, opts.draws, opts.seed)?;
    let h = Header::new(Command::ZerosScaling.name(), config_hash).with([
        format!("max_n = {}", opts.max_n),
        format!("draws = {}", opts.draws),
        format!("seed = {}", opts.seed),
        "counted = smallest count over draws".to_string(),
    ]);
    let mut out = h.render();
    out.push_str("N,counted,predicted,counted_max,draws,mismatches\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.sites, r.counted_min, r.predicted, r.counted_max, r.draws, r.mismatches
        );
    }
    Ok(vec![Artifact::new("zeros_scaling.csv", out)])
}

/// `P_exc(t)` columns for each parameter value, one chain per column.
fn excitation_table(
    chains: &[(f64, OpenChain<f64>)],
    cfg: &RunConfig,
    h: &Header,
    column: &str,
) -> Result<String> {
    let mut columns = Vec::with_capacity(chains.len());
    for (_, chain) in chains {
        let traj = propagate_populations(&chain.rate_matrix()?, &cfg.run.initial, &cfg.run.times)?;
        columns.push(excitation_probability(&traj));
    }
    let mut out = h.render();
    let names: Vec<String> = chains.iter().map(|(v, _)| format!("{column}={}", num(*v))).collect();
    let _ = writeln!(out, "t,{}", names.join(","));
    for (k, t) in cfg.run.times.iter().enumerate() {
        let _ = writeln!(out, "{},{}", num(*t), row(columns.iter().map(|c| c[k])));
    }
    Ok(out)
}

/// The four datasets behind the thermal and coupling-driven excitation
/// curves: `P_exc(t)` at several temperatures, `P_exc(t)` at several
/// couplings, and `P_exc(t*)` swept over each parameter.
fn fig2(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let base = open_chain(cfg)?;
    let site = cfg.run.kappa_site;
    let h = header(Command::Fig2, cfg);

    let thermal: Vec<(f64, OpenChain<f64>)> = cfg
        .run
        .fig2_temperatures
        .iter()
        .map(|&t| Ok((t, base.with_baths(cfg.baths.with_temperature(t)?)?)))
        .collect::<Result<_>>()?;
    let chemical: Vec<(f64, OpenChain<f64>)> = cfg
        .run
        .fig2_kappas
        .iter()
        .map(|&k| Ok((k, base.with_baths(cfg.baths.with_kappa(site, k)?)?)))
        .collect::<Result<_>>()?;

    let mut hc = h.clone();
    hc.push("panel = thermal excitation in time");
    let c = excitation_table(&thermal, cfg, &hc, "T")?;
    let mut hd = h.clone();
    hd.push(format!("panel = coupling-driven excitation in time (kappa_{site} varied)"));
    let d = excitation_table(&chemical, cfg, &hd, &format!("kappa_{site}"))?;

    let sweep_e = sweep_temperature(&cfg.chain, &cfg.baths, &cfg.temperature_grid(), cfg.run.eval_time)?;
    fail_on_sweep_errors(&sweep_e)?;
    let mut he = h.clone();
    he.push("panel = P_exc(t*) against temperature");
    he.push(format!("temperature_grid = {}", RunConfig::describe_grid(&cfg.run.temperature_grid)));
    if let Ok(t) = locate_t_theta(&sweep_e) {
        he.push(format!("t_theta = {}", num(t)));
    }
    let e = sweep_csv(&he, &sweep_e, "T");

    let sweep_f = sweep_coupling(&cfg.chain, &cfg.baths, site, &cfg.kappa_grid(), cfg.run.eval_time)?;
    fail_on_sweep_errors(&sweep_f)?;
    let mut hf = h;
    hf.push(format!("panel = P_exc(t*) against kappa_{site}"));
    hf.push(format!("kappa_grid = {}", RunConfig::describe_grid(&cfg.run.kappa_grid)));
    let f = sweep_csv(&hf, &sweep_f, &format!("kappa_{site}"));

    Ok(vec![
        Artifact::new("fig2c_thermal_time.csv", c),
        Artifact::new("fig2d_coupling_time.csv", d),
        Artifact::new("fig2e_sweep_T.csv", e),
        Artifact::new("fig2f_sweep_kappa.csv", f),
    ])
}
