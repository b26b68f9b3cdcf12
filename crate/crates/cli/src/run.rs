//! Execute a resolved [`RunConfig`] and write its artifacts.
//!
//! Output directory layout (`_r{k}` suffix only when `replicas > 1`):
//!
//! ```text
//! metadata.txt          status, resolved config, per-replica results
//! snapshots[_rK].csv    dynamics snapshots, MCMC samples or the annealed packing
//! local_times[_rK].csv  two-type and depletion modes
//! histogram.csv         analyze mode
//! energy_trace.csv      analyze mode
//! ks.csv                analyze mode with a reference file
//! ```

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use depletion_core::analysis::{
    default_pair_edges, energy_trace, ks_critical_value, ks_statistic, pair_distance_histogram, Histogram,
};
use depletion_core::dynamics::{simulate, DynamicsSettings, LocalTimes, PotentialSpec, Potentials, RunMode};
use depletion_core::geometry::minimal_energy;
use depletion_core::model::max_contact_number;
use depletion_core::rng::{replica_seed, substream_seed};
use depletion_core::sampling::{
    anneal_packing_with_psi, grid_start, sample_hard_spheres, sample_two_type, two_type_start, MCMCParams,
    SampleRun,
};
use depletion_core::{is_admissible, Configuration, TOL_OVERLAP};

use crate::config::{Mode, RunConfig, SampleTarget};
use crate::snapshot::{self, format_hex, Metadata, Snapshot};

pub const METADATA_FILE: &str = "metadata.txt";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Runtime(String),
    #[error("invariant violated in {0} snapshot(s)")]
    Violations(usize),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// What one replica reports back for the metadata document.
#[derive(Debug, Default)]
struct ReplicaReport {
    entries: Vec<(String, String)>,
    violations: usize,
}

impl ReplicaReport {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }
}

/// Result of a finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub metadata: Metadata,
    pub metadata_path: PathBuf,
}

fn file_name(stem: &str, replica: usize, replicas: usize) -> String {
    if replicas > 1 {
        format!("{stem}_r{replica}.csv")
    } else {
        format!("{stem}.csv")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(io_at(path))
}

/// Run every replica and write the metadata document. The metadata file is
/// written on failure too, with `status = error` and the message.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let out = &cfg.output_path;
    fs::create_dir_all(out).map_err(io_at(out))?;
    let start = Instant::now();
    let replicas = if cfg.mode == Mode::Analyze { 1 } else { cfg.replicas };
    let reports: Vec<Result<ReplicaReport, RunError>> =
        (0..replicas).into_par_iter().map(|k| run_replica(cfg, k, replicas)).collect();
    let wall = start.elapsed().as_secs_f64();

    let mut meta = Metadata::default();
    let mut first_error = None;
    let mut violations = 0;
    for r in &reports {
        match r {
            Ok(rep) => violations += rep.violations,
            Err(e) if first_error.is_none() => first_error = Some(e.to_string()),
            Err(_) => {}
        }
    }
    if first_error.is_none() && violations > 0 {
        first_error = Some(RunError::Violations(violations).to_string());
    }
    meta.set("status", "status", if first_error.is_some() { "error" } else { "ok" });
    meta.set("status", "error", first_error.as_deref().unwrap_or("none"));
    meta.set("status", "version", env!("CARGO_PKG_VERSION"));
    meta.set("status", "seed", cfg.seed);
    meta.set("status", "replicas", replicas);
    meta.set("status", "wall_time_s", format!("{wall:.3}"));
    meta.set("status", "violations", violations);
    if !cfg.warnings.is_empty() {
        for (i, w) in cfg.warnings.iter().enumerate() {
            meta.set("warnings", &format!("warning_{i}"), w);
        }
    }
    let echo = Metadata::parse(&cfg.to_text()).map_err(runtime)?;
    meta.extend(echo);
    for (k, r) in reports.iter().enumerate() {
        let section = format!("replica.{k}");
        meta.set(&section, "seed", replica_seed(cfg.seed, k as u64));
        match r {
            Ok(rep) => {
                for (key, v) in &rep.entries {
                    meta.set(&section, key, v);
                }
            }
            Err(e) => meta.set(&section, "error", e),
        }
    }
    let path = out.join(METADATA_FILE);
    fs::write(&path, meta.to_text()).map_err(io_at(&path))?;

    for r in reports {
        r?;
    }
    if violations > 0 {
        return Err(RunError::Violations(violations));
    }
    Ok(RunOutcome {
        metadata: meta,
        metadata_path: path,
    })
}

fn run_replica(cfg: &RunConfig, k: usize, replicas: usize) -> Result<ReplicaReport, RunError> {
    let seed = replica_seed(cfg.seed, k as u64);
    let snap_path = cfg.output_path.join(file_name("snapshots", k, replicas));
    match cfg.mode {
        Mode::TwoType | Mode::Depletion => {
            let lt_path = cfg.output_path.join(file_name("local_times", k, replicas));
            run_dynamics(cfg, seed, &snap_path, &lt_path)
        }
        Mode::SampleEquilibrium => run_sampler(cfg, seed, &snap_path),
        Mode::AnnealPack => run_anneal(cfg, seed, &snap_path),
        Mode::Analyze => run_analyze(cfg),
    }
}

fn sphere_psi(cfg: &RunConfig) -> Result<PotentialSpec, RunError> {
    PotentialSpec::sphere_confinement(cfg.model.d, cfg.potentials.psi_hinge_radius, cfg.potentials.psi_slope)
        .map_err(runtime)
}

fn mcmc_params(cfg: &RunConfig) -> Result<MCMCParams, RunError> {
    let s = &cfg.sampler;
    Ok(MCMCParams::new(s.proposal_sigma, s.n_sweeps, s.burn_in, s.thinning)
        .map_err(runtime)?
        .with_adapt(s.adapt))
}

fn run_dynamics(cfg: &RunConfig, seed: u64, snap_path: &Path, lt_path: &Path) -> Result<ReplicaReport, RunError> {
    let p = &cfg.model;
    let d = p.d;
    let (mode, start, particle) = if cfg.mode == Mode::TwoType {
        let start = two_type_start(cfg.n_spheres, p, cfg.potentials.bath_radius, substream_seed(seed, 0))
            .map_err(runtime)?;
        let particle = PotentialSpec::particle_confinement(d, cfg.potentials.bath_radius)
            .and_then(|s| s.with_particle_slope(cfg.potentials.particle_slope))
            .map_err(runtime)?;
        (RunMode::TwoType, start, Some(particle))
    } else {
        let start = Configuration::spheres_only(d, grid_start(cfg.n_spheres, p)).map_err(runtime)?;
        (RunMode::Depletion, start, None)
    };
    let pots = Potentials {
        sphere: sphere_psi(cfg)?,
        particle,
    };
    let ic = &cfg.integrator;
    let settings = DynamicsSettings::new(ic.dt)
        .and_then(|s| s.with_max_proj_iters(ic.max_proj_iters))
        .map_err(runtime)?
        .with_drift(ic.drift)
        .with_particle_drift(ic.particle_drift);

    let mut snaps = create(snap_path)?;
    let mut lts = create(lt_path)?;
    snapshot::write_header(&mut snaps, d).map_err(io_at(snap_path))?;
    writeln!(lts, "# step,body,i,j,value").map_err(io_at(lt_path))?;
    let mut io_err: Option<RunError> = None;
    let mut violations = 0usize;
    let mut last: Option<(u64, LocalTimes)> = None;
    let mut n_snapshots = 0usize;
    let result = simulate(&start, p, &pots, &settings, mode, ic.n_steps, cfg.record_every, seed, |rec| {
        n_snapshots += 1;
        let check = if mode == RunMode::Depletion { rec.cfg.without_particles() } else { rec.cfg.clone() };
        if !is_admissible(&check, p, TOL_OVERLAP).unwrap_or(false) {
            violations += 1;
        }
        if io_err.is_some() {
            return;
        }
        if let Err(e) = snapshot::write_snapshot(&mut snaps, rec.step, rec.t, &rec.cfg) {
            io_err = Some(io_at(snap_path)(e));
            return;
        }
        if ic.local_times_every_snapshot {
            if let Err(e) = snapshot::write_local_times(&mut lts, rec.step, &rec.local_times) {
                io_err = Some(io_at(lt_path)(e));
            }
        }
        last = Some((rec.step, rec.local_times.clone()));
    });
    if let Some(e) = io_err {
        return Err(e);
    }
    let state = result.map_err(runtime)?;
    if !ic.local_times_every_snapshot {
        if let Some((step, lt)) = &last {
            snapshot::write_local_times(&mut lts, *step, lt).map_err(io_at(lt_path))?;
        }
    }
    snaps.flush().map_err(io_at(snap_path))?;
    lts.flush().map_err(io_at(lt_path))?;

    let mut rep = ReplicaReport {
        violations,
        ..Default::default()
    };
    rep.put("snapshots", n_snapshots);
    rep.put("final_step", state.step);
    rep.put("final_time", format_hex(state.t));
    rep.put("initial_particles", start.n_particles());
    rep.put("violations", violations);
    Ok(rep)
}

fn write_samples(path: &Path, run: &SampleRun, d: usize) -> Result<usize, RunError> {
    let mut w = create(path)?;
    snapshot::write_header(&mut w, d).map_err(io_at(path))?;
    for (k, c) in run.samples.iter().enumerate() {
        snapshot::write_snapshot(&mut w, k as u64, k as f64, c).map_err(io_at(path))?;
    }
    w.flush().map_err(io_at(path))?;
    Ok(run.samples.len())
}

fn run_sampler(cfg: &RunConfig, seed: u64, snap_path: &Path) -> Result<ReplicaReport, RunError> {
    let p = &cfg.model;
    let psi = sphere_psi(cfg)?;
    let mcmc = mcmc_params(cfg)?;
    let run = match cfg.sampler.target {
        SampleTarget::HardSpheres => sample_hard_spheres(cfg.n_spheres, p, &psi, &mcmc, p.z_dot, seed),
        SampleTarget::TwoType => sample_two_type(cfg.n_spheres, p, &psi, cfg.potentials.bath_radius, &mcmc, seed),
    }
    .map_err(runtime)?;
    let violations = run
        .samples
        .iter()
        .filter(|c| !is_admissible(c, p, TOL_OVERLAP).unwrap_or(false))
        .count();
    let n = write_samples(snap_path, &run, p.d)?;
    let mut rep = ReplicaReport {
        violations,
        ..Default::default()
    };
    rep.put("samples", n);
    rep.put("acceptance_rate", run.acceptance_rate);
    rep.put("final_proposal_sigma", run.final_proposal_sigma);
    rep.put("violations", violations);
    Ok(rep)
}

fn run_anneal(cfg: &RunConfig, seed: u64, snap_path: &Path) -> Result<ReplicaReport, RunError> {
    let p = &cfg.model;
    let psi = sphere_psi(cfg)?;
    let mcmc = mcmc_params(cfg)?;
    let res = anneal_packing_with_psi(cfg.n_spheres, p, &psi, &cfg.anneal, &mcmc, seed).map_err(runtime)?;
    let mut w = create(snap_path)?;
    snapshot::write_header(&mut w, p.d).map_err(io_at(snap_path))?;
    snapshot::write_snapshot(&mut w, cfg.anneal.n_levels as u64, 0.0, &res.best).map_err(io_at(snap_path))?;
    w.flush().map_err(io_at(snap_path))?;

    let violations = usize::from(!is_admissible(&res.best, p, TOL_OVERLAP).unwrap_or(false));
    let history: Vec<String> = res.contact_history.iter().map(|c| c.to_string()).collect();
    let mut rep = ReplicaReport {
        violations,
        ..Default::default()
    };
    rep.put("contact_history", history.join(" "));
    rep.put("final_contact_number", res.final_contacts());
    rep.put("best_energy", res.best_energy);
    rep.put("best_psi", res.best_psi);
    if let Ok(m) = minimal_energy(cfg.n_spheres, p) {
        rep.put("minimal_energy", m.value);
        rep.put("expected_contact_number", m.contact_number);
        rep.put("expected_is_exact", m.exact);
    } else if let Some(k) = max_contact_number(cfg.n_spheres, p.d) {
        rep.put("expected_contact_number", k.value);
    }
    rep.put("violations", violations);
    Ok(rep)
}

fn read_file(path: &Path) -> Result<Vec<Snapshot>, RunError> {
    let f = File::open(path).map_err(io_at(path))?;
    snapshot::read_snapshots(BufReader::new(f)).map_err(|e| RunError::Runtime(format!("{}: {e}", path.display())))
}

fn pair_histogram(cfg: &RunConfig, snaps: &[Snapshot]) -> Result<Histogram, RunError> {
    let edges = default_pair_edges(&cfg.model, cfg.analyze.hist_upper);
    let (i, j) = cfg.analyze.pair;
    pair_distance_histogram(snaps.iter().map(|s| &s.cfg), i, j, &edges).map_err(runtime)
}

fn run_analyze(cfg: &RunConfig) -> Result<ReplicaReport, RunError> {
    let input = cfg
        .analyze
        .input
        .as_deref()
        .ok_or_else(|| RunError::Runtime("analyze mode needs an input file".into()))?;
    let snaps = read_file(input)?;
    if snaps.is_empty() {
        return Err(RunError::Runtime(format!("{}: no snapshots", input.display())));
    }
    if let Some(s) = snaps.iter().find(|s| s.cfg.dim() != cfg.model.d) {
        return Err(RunError::Runtime(format!(
            "snapshot at step {} has dimension {}, config says {}",
            s.step,
            s.cfg.dim(),
            cfg.model.d
        )));
    }
    let out = &cfg.output_path;
    let h = pair_histogram(cfg, &snaps)?;
    let hist_path = out.join("histogram.csv");
    let mut w = create(&hist_path)?;
    writeln!(w, "lower,upper,count").map_err(io_at(&hist_path))?;
    for (b, c) in h.counts().iter().enumerate() {
        writeln!(w, "{},{},{c}", h.edges()[b], h.edges()[b + 1]).map_err(io_at(&hist_path))?;
    }
    w.flush().map_err(io_at(&hist_path))?;

    let energies = energy_trace(snaps.iter().map(|s| &s.cfg), &cfg.model);
    let trace_path = out.join("energy_trace.csv");
    let mut w = create(&trace_path)?;
    writeln!(w, "step,time,energy").map_err(io_at(&trace_path))?;
    for (s, e) in snaps.iter().zip(&energies) {
        writeln!(w, "{},{},{e}", s.step, s.t).map_err(io_at(&trace_path))?;
    }
    w.flush().map_err(io_at(&trace_path))?;

    let violations = snaps
        .iter()
        .filter(|s| !is_admissible(&s.cfg.without_particles(), &cfg.model, TOL_OVERLAP).unwrap_or(false))
        .count();
    let mut rep = ReplicaReport::default();
    rep.put("snapshots", snaps.len());
    rep.put("histogram_total", h.total());
    rep.put("histogram_outside", h.outside());
    rep.put("inadmissible_snapshots", violations);
    if let Some(reference) = &cfg.analyze.reference {
        let other = read_file(reference)?;
        let h2 = pair_histogram(cfg, &other)?;
        let ks = ks_statistic(&h, &h2).map_err(runtime)?;
        let crit = ks_critical_value(0.01, h.total() as f64, h2.total() as f64);
        let ks_path = out.join("ks.csv");
        let text = format!("statistic,critical_value_alpha_0.01,n_input,n_reference\n{ks},{crit},{},{}\n", h.total(), h2.total());
        fs::write(&ks_path, text).map_err(io_at(&ks_path))?;
        rep.put("ks_statistic", ks);
        rep.put("ks_critical_value", crit);
    }
    Ok(rep)
}
