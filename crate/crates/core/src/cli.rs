//! `shsim` command-line front end.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use log::info;

use crate::config::{parse_config, RunConfig};
use crate::error::{Result, ShsimError};
use crate::export;
use crate::integrator::{simulate, SimConfig};
use crate::manifest::Manifest;
use crate::snapshot::write_snapshot;
use crate::verification::report::summary_table;
use crate::verification::sphere::RENORMALIZED_TOL;
use crate::verification::{
    aldous, convergence, defect, energy, martingale, probes, qv, sphere, strong, EstimateReport, ReportEntry, Verdict,
};

#[derive(Debug, Clone, Parser)]
#[command(name = "shsim", version, about = "Sphere-constrained stochastic Swift-Hohenberg simulator")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `integrator.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "shsim-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// One trajectory: diagnostics CSV and state snapshots.
    Simulate,
    /// Deterministic probes.
    Verify,
    /// Energy moments across Galerkin sizes.
    Estimate,
    /// Tightness statistic.
    Aldous,
    /// Quadratic variation of the martingale part.
    Qv,
    /// Weak martingale identities.
    Martingale,
    /// Sphere drift, scheme gap, strong order and Galerkin Cauchy test.
    Converge,
    /// Commutation defect of the nonlinearity.
    Defect,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Estimate => "estimate",
            Command::Aldous => "aldous",
            Command::Qv => "qv",
            Command::Martingale => "martingale",
            Command::Converge => "converge",
            Command::Defect => "defect",
        }
    }

    fn outputs(self) -> Vec<PathBuf> {
        let mut v = vec![PathBuf::from(REPORTS_FILE)];
        match self {
            Command::Simulate => v.extend(["trajectory.csv", "initial.shcs", "final.shcs"].map(PathBuf::from)),
            Command::Estimate => v.push("energy.csv".into()),
            Command::Aldous => v.push("aldous.csv".into()),
            _ => {}
        }
        v
    }
}

pub const REPORTS_FILE: &str = "reports.jsonl";

#[derive(Debug)]
pub struct Outcome {
    pub reports: Vec<EstimateReport>,
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn failed(&self) -> bool {
        self.reports.iter().any(|r| r.verdict.is_failure())
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn summary(&self) -> String {
        summary_table(&self.reports)
    }
}

/// A Monte Carlo study that blew up becomes a failing report instead of
/// aborting the remaining studies.
fn or_failed(key: &str, seed: u64, r: Result<EstimateReport>) -> Result<EstimateReport> {
    match r {
        Err(e @ ShsimError::Integration { .. }) => Ok(EstimateReport::new(
            key,
            vec![ReportEntry::new(None, Some(format!("error: {e}")), f64::NAN, f64::NAN, 0)],
            Verdict::Fail,
            seed,
        )),
        other => other,
    }
}

fn simulate_run(sim: &SimConfig, dir: &Path) -> Result<Vec<EstimateReport>> {
    let traj = simulate(sim, 0)?;
    export::write_trajectory_csv(&dir.join("trajectory.csv"), &traj)?;
    let (first, last) = (traj.states.first(), traj.states.last());
    write_snapshot(&dir.join("initial.shcs"), first.expect("initial state is recorded"))?;
    write_snapshot(&dir.join("final.shcs"), last.expect("final state is recorded"))?;
    let worst = traj.diagnostics.iter().map(|d| d.sphere_defect.abs()).fold(0.0, f64::max);
    let end = traj.diagnostics.last().expect("final state is recorded");
    let n = Some(sim.n_galerkin);
    let entries = vec![
        ReportEntry::new(n, Some("max |sphere_defect|".into()), worst, 0.0, 1),
        ReportEntry::new(n, Some("final V_norm_sq".into()), end.v_norm_sq, 0.0, 1),
        ReportEntry::new(n, Some("final DA_norm_sq".into()), end.da_norm_sq, 0.0, 1),
    ];
    let verdict = if sim.renormalize {
        Verdict::from_pass(worst <= RENORMALIZED_TOL)
    } else {
        Verdict::ReportOnly
    };
    Ok(vec![EstimateReport::new("simulate", entries, verdict, sim.master_seed)])
}

fn reports_for(command: Command, cfg: &RunConfig, sim: &SimConfig, dir: &Path) -> Result<Vec<EstimateReport>> {
    let s = &cfg.suite;
    let seed = sim.master_seed;
    Ok(match command {
        Command::Simulate => simulate_run(sim, dir)?,
        Command::Verify => probes::deterministic_suite(&sim.basis, &sim.params, &sim.noise, s.probe_samples, seed)?,
        Command::Estimate => {
            let r = energy::energy_estimates(sim, &s.n_list, s.ensemble)?.to_vec();
            export::write_energy_csv(&dir.join("energy.csv"), &r)?;
            r
        }
        Command::Aldous => {
            let r = vec![aldous::aldous_statistic(sim, &s.n_list, &s.delta_list, s.epsilon, s.ensemble)?];
            export::write_reports_csv(&dir.join("aldous.csv"), &r)?;
            r
        }
        Command::Qv => vec![qv::qv_check(sim, s.ensemble)?, qv::qv_frozen_selftest(sim, s.ensemble)?],
        Command::Martingale => martingale::martingale_suite(sim, s.t1, s.t2, s.ensemble)?.to_vec(),
        Command::Converge => vec![
            or_failed("sphere-drift", seed, sphere::sphere_drift(sim, &s.dt_list, s.ensemble))?,
            or_failed("sphere-renormalized", seed, sphere::renormalized_invariance(sim, s.ensemble))?,
            or_failed("ito-strat-gap", seed, strong::ito_stratonovich_gap(sim, &s.dt_list, s.ensemble))?,
            or_failed("strong-order", seed, strong::strong_self_convergence(sim, &s.dt_list, s.ensemble))?,
            or_failed(
                "galerkin-cauchy",
                seed,
                convergence::galerkin_convergence(sim, &s.n_list, s.ensemble),
            )?,
        ],
        Command::Defect => vec![
            probes::ground_state_defect(seed)?,
            defect::defect_decay(sim.basis.domain(), &sim.params, &s.n_list)?,
        ],
    })
}

/// Resolve the config, write the manifest, then run `cli.command`.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut cfg = parse_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let sim = cfg.sim_config()?;
    std::fs::create_dir_all(&cli.out)?;
    let manifest = Manifest::new(cli.command.name(), &cfg, cli.command.outputs());
    let path = manifest.write(&cli.out)?;
    info!("{} seed={} hash={} -> {}", cli.command.name(), cfg.integrator.seed, manifest.config_hash, path.display());

    let hash = cfg.hash();
    let reports: Vec<EstimateReport> = reports_for(cli.command, &cfg, &sim, &cli.out)?
        .into_iter()
        .map(|r| r.with_hash(hash))
        .collect();
    export::write_reports_jsonl(&cli.out.join(REPORTS_FILE), &reports)?;
    Ok(Outcome {
        reports,
        out_dir: cli.out.clone(),
        manifest,
    })
}
