use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sirsnet_core::chain::{self, DominationReport, MixingBound, MixingReport};
use sirsnet_core::experiments::{load_spec, run_experiment};
use sirsnet_core::meanfield::{self, threshold_report, FixedPointOptions};
use sirsnet_core::montecarlo::{self, Init, RunOptions, SimState};
use sirsnet_core::{
    spectral_radius_default, ChainConfig, ChainDistribution, ChainState, NodeProbs, NodeState,
};

use crate::args::{
    Command, ExactCommand, ExactLimits, ExperimentArgs, GraphCommand, McCommand, MeanfieldCommand, SimArgs,
    ThresholdArgs,
};
use crate::config::CliConfig;
use crate::usage;

const DEFAULT_MEANFIELD_STEPS: usize = 200;
const DEFAULT_HORIZON: usize = 2000;
const DEFAULT_RUNS: usize = 20;
const DEFAULT_EPSILON: f64 = 0.25;

pub fn dispatch(command: Command, cfg: &CliConfig, jobs: usize) -> anyhow::Result<()> {
    log::debug!("using {jobs} worker(s)");
    match command {
        Command::Graph(cmd) => graph(cmd, cfg),
        Command::Threshold(args) => threshold(args, cfg),
        Command::Meanfield(cmd) => meanfield(cmd, cfg, jobs),
        Command::Exact(cmd) => exact(cmd, cfg, jobs),
        Command::Mc(cmd) => mc(cmd, cfg, jobs),
        Command::Experiment(args) => experiment(args, jobs),
    }
}

/// Statistics written by `graph info --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    pub max_degree: usize,
    pub components: usize,
    pub lambda_max: f64,
}

fn graph(cmd: GraphCommand, cfg: &CliConfig) -> anyhow::Result<()> {
    match cmd {
        GraphCommand::Gen { source, out } => {
            let g = cfg.resolve_graph(&source)?;
            write_file(&out, |w| g.write_edge_list(w))?;
            println!("wrote {} ({} nodes, {} edges)", out.display(), g.node_count(), g.edge_count());
        }
        GraphCommand::Info { source, json } => {
            let g = cfg.resolve_graph(&source)?;
            let info = GraphInfo {
                nodes: g.node_count(),
                edges: g.edge_count(),
                average_degree: g.average_degree(),
                max_degree: g.max_degree(),
                components: g.components().len(),
                lambda_max: spectral_radius_default(&g)?.lambda_max,
            };
            println!("nodes          {}", info.nodes);
            println!("edges          {}", info.edges);
            println!("average degree {}", num(info.average_degree));
            println!("max degree     {}", info.max_degree);
            println!("components     {}", info.components);
            println!("lambda_max     {}", num(info.lambda_max));
            if let Some(path) = json {
                write_json(&path, &info)?;
            }
        }
    }
    Ok(())
}

fn threshold(args: ThresholdArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    let g = cfg.resolve_graph(&args.source)?;
    let p = cfg.resolve_params(&args.rates)?;
    let report = threshold_report(&g, &p)?;
    println!("variant      {}", p.variant);
    println!("lambda_max   {}", num(report.lambda_max));
    println!("ratio        {}", num(report.ratio_global));
    println!("ratio_local  {}", num(report.ratio_local));
    println!("regime       {}", report.regime);
    if report.regime_local != report.regime {
        println!("regime_local {}", report.regime_local);
    }
    if let Some(path) = args.json {
        write_json(&path, &report)?;
    }
    Ok(())
}

fn meanfield(cmd: MeanfieldCommand, cfg: &CliConfig, jobs: usize) -> anyhow::Result<()> {
    match cmd {
        MeanfieldCommand::Run {
            source,
            rates,
            steps,
            init,
            out,
            state_out,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let n = g.node_count();
            let steps = steps.or(cfg.horizon).unwrap_or(DEFAULT_MEANFIELD_STEPS);
            let init = init.or(cfg.init).unwrap_or(Init::Fraction(0.1));
            init.validate()?;
            let q = match init {
                Init::AllInfected => 1.0,
                Init::OneRandomInfected => 1.0 / n as f64,
                Init::Fraction(q) => q,
            };
            let mut rows = String::from("t,mean_p_i,mean_p_r,max_p_i\n");
            let last = meanfield::iterate(&g, &p, NodeProbs::uniform(n, 0.0, q), steps, |t, s| {
                let max_i = s.p_i.iter().copied().fold(0.0, f64::max);
                let mean_r = s.p_r.iter().sum::<f64>() / n as f64;
                rows.push_str(&format!("{t},{},{mean_r},{max_i}\n", s.mean_infected()));
            });
            println!("steps            {steps}");
            println!("final mean P_I   {}", num(last.mean_infected()));
            println!("final mean P_R   {}", num(last.p_r.iter().sum::<f64>() / n as f64));
            if let Some(path) = out {
                write_file(&path, |w| w.write_all(rows.as_bytes()))?;
            }
            if let Some(path) = state_out {
                write_json(&path, &last)?;
            }
        }
        MeanfieldCommand::FixedPoint {
            source,
            rates,
            tol,
            max_iter,
            damping,
            probe,
            seed,
            out,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let opts = FixedPointOptions {
                tol,
                max_iter,
                damping,
                ..FixedPointOptions::default()
            };
            match probe {
                Some(starts) => {
                    let seed = seed.or(cfg.seed).unwrap_or(0);
                    let probe = meanfield::probe_uniqueness(&g, &p, starts, seed, &opts, jobs)?;
                    println!("starts         {starts}");
                    println!("converged      {}", probe.converged);
                    println!("max deviation  {}", num(probe.max_deviation));
                    if let Some(c) = &probe.consensus {
                        println!("mean P_I*      {}", num(mean(&c.p_i_star)));
                        println!("residual       {}", num(c.residual));
                    }
                    if let Some(path) = out {
                        write_json(&path, &probe)?;
                    }
                }
                None => {
                    let r = meanfield::endemic_fixed_point(&g, &p, &opts)?;
                    println!("outcome        {}", r.outcome.label());
                    if let meanfield::Outcome::CycleDetected { period } = r.outcome {
                        println!("period         {period}");
                    }
                    println!("iterations     {}", r.iterations);
                    println!("residual       {}", num(r.residual));
                    println!("mean P_I*      {}", num(mean(&r.p_i_star)));
                    println!("mean P_R*      {}", num(mean(&r.p_r_star)));
                    if let Some(path) = out {
                        write_json(&path, &r)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn chain_config(limits: &ExactLimits, cfg: &CliConfig, jobs: usize, max_steps: Option<usize>) -> ChainConfig {
    ChainConfig {
        max_nodes: limits.max_nodes,
        prune_tol: limits.prune_tol,
        workers: jobs,
        max_steps: max_steps.or(cfg.max_steps).unwrap_or(chain::DEFAULT_MAX_STEPS),
        ..ChainConfig::default()
    }
}

/// Parses `all`, `one`, `fraction:Q`, `code:N` or `states:SIR...`.
fn parse_start(spec: &str, n: usize, seed: u64) -> anyhow::Result<ChainState> {
    if let Some(code) = spec.strip_prefix("code:") {
        let code: u64 = code.parse().map_err(|_| usage(format!("bad start code `{code}`")))?;
        if n < 40 && code >= 3u64.pow(n as u32) {
            return Err(usage(format!("start code {code} is out of range for {n} nodes")));
        }
        return Ok(ChainState(code));
    }
    if let Some(letters) = spec.strip_prefix("states:") {
        let states: Vec<NodeState> = letters
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'S' => Ok(NodeState::S),
                'I' => Ok(NodeState::I),
                'R' => Ok(NodeState::R),
                other => Err(usage(format!("bad node state `{other}` in start"))),
            })
            .collect::<anyhow::Result<_>>()?;
        if states.len() != n {
            return Err(usage(format!("start lists {} nodes but the graph has {n}", states.len())));
        }
        return Ok(ChainState::encode(&states));
    }
    let init: Init = spec.parse().map_err(|e| usage(format!("bad start `{spec}`: {e}")))?;
    Ok(ChainState::encode(SimState::from_init(n, init, seed)?.states()))
}

fn exact(cmd: ExactCommand, cfg: &CliConfig, jobs: usize) -> anyhow::Result<()> {
    match cmd {
        ExactCommand::Evolve {
            source,
            rates,
            limits,
            steps,
            start,
            seed,
            out,
            marginals,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let config = chain_config(&limits, cfg, jobs, None);
            let n = g.node_count();
            let state = parse_start(&start, n, seed.or(cfg.seed).unwrap_or(0))?;
            let mut mu = ChainDistribution::point_mass(n, state);
            let mut rows = String::from("t,node,p_S,p_I,p_R\n");
            let mut push_marginals = |t: usize, mu: &ChainDistribution| {
                let m = mu.marginals();
                for i in 0..n {
                    let [s, inf, r] = m.node_probs(i);
                    rows.push_str(&format!("{t},{i},{s},{inf},{r}\n"));
                }
            };
            push_marginals(0, &mu);
            let mut pruned = 0.0;
            for t in 1..=steps {
                let (next, lost) = chain::step(&g, &p, &mu, &config)?;
                mu = next;
                pruned += lost;
                push_marginals(t, &mu);
            }
            let m = mu.marginals();
            println!("steps          {steps}");
            println!("support        {}", mu.support_len());
            println!("pruned mass    {}", num(pruned));
            println!("mean p_I       {}", num(mean(&m.p_i)));
            println!("P(all S)       {}", num(mu.mass(ChainState(0))));
            if let Some(path) = out {
                write_file(&path, |w| mu.write_csv(w))?;
            }
            if let Some(path) = marginals {
                write_file(&path, |w| w.write_all(rows.as_bytes()))?;
            }
        }
        ExactCommand::MixingTime {
            source,
            rates,
            limits,
            eps,
            max_steps,
            json,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let config = chain_config(&limits, cfg, jobs, max_steps);
            let eps = eps.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON);
            let lambda_max = spectral_radius_default(&g)?.lambda_max;
            let bound = chain::mixing_time_bound(g.node_count(), &p, lambda_max, eps);
            let report = chain::mixing_time(&g, &p, eps, &config)?;
            println!("mixing time    {}", report.steps);
            println!("tv             {}", num(report.tv));
            println!("bound norm     {}", num(bound.norm));
            match bound.steps {
                Some(b) => println!("bound steps    {}", num(b)),
                None => println!("bound steps    none (norm >= 1)"),
            }
            if let Some(path) = json {
                write_json(
                    &path,
                    &MixingOutput {
                        epsilon: eps,
                        lambda_max,
                        mixing: report,
                        bound,
                    },
                )?;
            }
        }
        ExactCommand::Stationary {
            source,
            rates,
            limits,
            out,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let n = g.node_count();
            if n > limits.max_nodes {
                return Err(chain::ChainError::TooLarge {
                    n,
                    cap: limits.max_nodes,
                }
                .into());
            }
            let pi = chain::stationary_distribution(&g, &p)?;
            println!("support        {}", pi.support_len());
            println!("P(all S)       {}", num(pi.mass(ChainState(0))));
            println!("mean p_I       {}", num(mean(&pi.marginals().p_i)));
            if let Some(path) = out {
                write_file(&path, |w| pi.write_csv(w))?;
            }
        }
        ExactCommand::VerifyDomination {
            source,
            rates,
            limits,
            steps,
            start,
            seed,
            tol,
            json,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let config = chain_config(&limits, cfg, jobs, None);
            let n = g.node_count();
            let state = parse_start(&start, n, seed.or(cfg.seed).unwrap_or(0))?;
            let mu0 = ChainDistribution::point_mass(n, state);
            let report: DominationReport = chain::verify_linear_domination(&g, &p, &mu0, steps, &config)?;
            println!("steps          {steps}");
            println!("min slack      {}", num(report.min_slack));
            if let Some(r) = report.min_slack_recovered {
                println!("min slack (R)  {}", num(r));
            }
            let holds = report.holds(tol);
            println!("holds          {holds}");
            if let Some(path) = json {
                write_json(&path, &report)?;
            }
            if !holds {
                anyhow::bail!("linear bound violated by more than {tol}");
            }
        }
    }
    Ok(())
}

/// Contents of `exact mixing-time --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingOutput {
    pub epsilon: f64,
    pub lambda_max: f64,
    pub mixing: MixingReport,
    pub bound: MixingBound,
}

fn run_options(sim: &SimArgs, cfg: &CliConfig) -> (RunOptions, Init, u64) {
    let mut opts = RunOptions::new(sim.horizon.or(cfg.horizon).unwrap_or(DEFAULT_HORIZON));
    opts.stop_at_extinction = !sim.no_stop;
    let init = sim.init.or(cfg.init).unwrap_or(Init::Fraction(0.1));
    (opts, init, sim.seed.or(cfg.seed).unwrap_or(0))
}

fn mc(cmd: McCommand, cfg: &CliConfig, jobs: usize) -> anyhow::Result<()> {
    match cmd {
        McCommand::Run {
            source,
            rates,
            sim,
            out,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let (opts, init, seed) = run_options(&sim, cfg);
            let tr = montecarlo::run(&g, &p, init, &opts, seed)?;
            let [s, i, r] = tr.counts[tr.last_step()];
            println!("steps          {}", tr.last_step());
            println!("final S/I/R    {s}/{i}/{r}");
            match tr.extinction_step {
                Some(t) => println!("extinct at     {t}"),
                None => println!("extinct at     never"),
            }
            if let Some(path) = out {
                write_file(&path, |w| tr.write_csv(w))?;
            }
        }
        McCommand::Ensemble {
            source,
            rates,
            sim,
            runs,
            out,
            replicas_out,
        } => {
            let g = cfg.resolve_graph(&source)?;
            let p = cfg.resolve_params(&rates)?;
            let (opts, init, seed) = run_options(&sim, cfg);
            let runs = runs.or(cfg.replicas).unwrap_or(DEFAULT_RUNS);
            let ens = montecarlo::ensemble(&g, &p, init, runs, &opts, seed, jobs)?;
            let last = ens.rows.last().expect("ensemble has at least one row");
            println!("runs                 {runs}");
            println!("horizon              {}", opts.horizon);
            println!("surviving at horizon {}", num(ens.survival_fraction(opts.horizon)));
            println!("mean infected (end)  {}", num(last.mean_infected_fraction));
            if let Some(path) = out {
                write_file(&path, |w| ens.write_summary_csv(w))?;
            }
            if let Some(path) = replicas_out {
                write_file(&path, |w| ens.write_replicas_csv(w))?;
            }
        }
    }
    Ok(())
}

fn experiment(args: ExperimentArgs, jobs: usize) -> anyhow::Result<()> {
    let mut spec = load_spec(&args.spec).with_context(|| format!("loading {}", args.spec.display()))?;
    if let Some(dir) = args.output_dir {
        spec.output_dir = dir;
    }
    let started = Instant::now();
    let report = run_experiment(&spec, jobs)?;
    let elapsed = started.elapsed();
    println!("experiment     {}", report.metadata.name);
    println!("grid points    {}", report.metadata.grid_points);
    if report.metadata.failed_points > 0 {
        println!("failed points  {}", report.metadata.failed_points);
    }
    for f in &report.files {
        println!("wrote          {}", f.display());
    }
    println!("wall time      {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    body(&mut out)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(path, |w| writeln!(w, "{text}"))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Up to ten decimals with trailing zeros removed; scientific notation for
/// tiny non-zero values.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-6 {
        return format!("{x:e}");
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn num_trims() {
        assert_eq!(num(3.6000000000000005), "3.6");
        assert_eq!(num(9.0), "9");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(2e-9), "2e-9");
    }

    #[test]
    fn start_forms() {
        assert_eq!(parse_start("all", 3, 0).unwrap(), ChainState(1 + 3 + 9));
        assert_eq!(parse_start("states:SIR", 3, 0).unwrap(), ChainState(3 + 18));
        assert_eq!(parse_start("code:5", 3, 0).unwrap(), ChainState(5));
        assert!(parse_start("code:27", 3, 0).is_err());
        assert!(parse_start("states:SI", 3, 0).is_err());
        assert!(parse_start("bogus", 3, 0).is_err());
        let one = parse_start("one", 4, 7).unwrap();
        assert_eq!(one.decode(4).iter().filter(|&&s| s == NodeState::I).count(), 1);
    }

    #[test]
    fn graph_info_round_trips() {
        let g = sirsnet_core::Graph::empty(2).unwrap();
        let info = GraphInfo {
            nodes: g.node_count(),
            edges: 0,
            average_degree: 0.0,
            max_degree: 0,
            components: 2,
            lambda_max: 0.0,
        };
        let back: GraphInfo = serde_json::from_str(&serde_json::to_string(&info).unwrap()).unwrap();
        assert_eq!(back, info);
    }

    #[test]
    fn params_from_flags() {
        let cfg = CliConfig::default();
        let rates = crate::args::Rates {
            beta: Some(0.2),
            delta: Some(0.5),
            gamma: Some(0.5),
            ..Default::default()
        };
        let p = cfg.resolve_params(&rates).unwrap();
        assert_eq!(p.beta, 0.2);
        assert_eq!(p.theta, 0.0);
    }
}
