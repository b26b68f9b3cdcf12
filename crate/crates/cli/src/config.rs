//! Run configuration: flat `key = value` text grouped by `[section]` headers.
//!
//! Keys may also appear before the first header. Unknown keys, unknown
//! sections, keys under the wrong section and repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use depletion_core::dynamics::{DriftConvention, DynamicsSettings, ParticleDrift, DEFAULT_MAX_PROJ_ITERS};
use depletion_core::geometry::rho_thresholds;
use depletion_core::sampling::{AnnealSchedule, DEFAULT_SWEEPS_PER_LEVEL};
use depletion_core::ModelParams;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Semantic { field: String, reason: String },
}

fn semantic(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Semantic {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    TwoType,
    Depletion,
    SampleEquilibrium,
    AnnealPack,
    Analyze,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::TwoType,
        Mode::Depletion,
        Mode::SampleEquilibrium,
        Mode::AnnealPack,
        Mode::Analyze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::TwoType => "two-type",
            Mode::Depletion => "depletion",
            Mode::SampleEquilibrium => "sample-equilibrium",
            Mode::AnnealPack => "anneal-pack",
            Mode::Analyze => "analyze",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected one of two-type, depletion, sample-equilibrium, anneal-pack, analyze)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleTarget {
    HardSpheres,
    TwoType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialConfig {
    /// ρ₀ of the sphere confinement.
    pub psi_hinge_radius: f64,
    /// κ of the sphere confinement.
    pub psi_slope: f64,
    /// R of the particle confinement.
    pub bath_radius: f64,
    /// Slope of the particle confinement, `R^{d+1}` unless overridden.
    pub particle_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub n_steps: u64,
    pub max_proj_iters: usize,
    pub drift: DriftConvention,
    pub particle_drift: ParticleDrift,
    pub local_times_every_snapshot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub target: SampleTarget,
    pub proposal_sigma: f64,
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub adapt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub input: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub pair: (usize, usize),
    pub hist_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub output_path: PathBuf,
    pub record_every: u64,
    pub replicas: usize,
    pub model: ModelParams,
    pub n_spheres: usize,
    pub potentials: PotentialConfig,
    pub integrator: IntegratorConfig,
    pub sampler: SamplerConfig,
    pub anneal: AnnealSchedule,
    pub analyze: AnalyzeConfig,
    /// Non-fatal remarks produced while resolving the config.
    pub warnings: Vec<String>,
}

/// Values that take precedence over the config text (command-line flags).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub replicas: Option<usize>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["mode", "seed", "output_path", "record_every", "replicas"]),
    ("model", &["d", "r_sphere", "r_particle", "z_dot", "sigma_sphere", "sigma_particle", "n_spheres"]),
    ("potentials", &["psi_hinge_radius", "psi_slope", "bath_radius", "particle_slope"]),
    (
        "integrator",
        &["dt", "n_steps", "max_proj_iters", "drift", "particle_drift", "local_times_every_snapshot"],
    ),
    ("sampler", &["target", "proposal_sigma", "n_sweeps", "burn_in", "thinning", "adapt"]),
    ("anneal", &["z_initial", "growth", "n_levels", "sweeps_per_level"]),
    ("analyze", &["input", "reference", "pair_i", "pair_j", "hist_upper"]),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS.iter().find(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s)
}

struct Raw {
    values: BTreeMap<String, String>,
}

impl Raw {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| semantic(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.values.remove(key).as_deref() {
            None => Ok(None),
            Some("true" | "yes" | "1") => Ok(Some(true)),
            Some("false" | "no" | "0") => Ok(Some(false)),
            Some(v) => Err(semantic(key, format!("expected true or false, got `{v}`"))),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?.ok_or_else(|| semantic(key, "required but missing"))
    }
}

fn tokenize(text: &str) -> Result<Raw, ConfigError> {
    let mut values = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax { line: line_no, message };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(format!("unterminated section header `{line}`")))?
                .trim();
            let known = SECTIONS
                .iter()
                .find(|(s, _)| *s == name)
                .ok_or_else(|| syntax(format!("unknown section `[{name}]`")))?;
            section = Some(known.0);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(syntax("empty key".into()));
        }
        if value.is_empty() {
            return Err(syntax(format!("empty value for `{key}`")));
        }
        let home = section_of(key).ok_or_else(|| syntax(format!("unknown key `{key}`")))?;
        if let Some(s) = section {
            if s != home {
                return Err(syntax(format!("key `{key}` belongs in [{home}], found under [{s}]")));
            }
        }
        if values.insert(key.to_string(), value.to_string()).is_some() {
            return Err(syntax(format!("duplicate key `{key}`")));
        }
    }
    Ok(Raw { values })
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(semantic(field, format!("must be a positive finite number, got {v}")))
    }
}

fn at_least_one<T: PartialOrd + From<u8> + fmt::Display>(field: &str, v: T) -> Result<T, ConfigError> {
    if v >= T::from(1) {
        Ok(v)
    } else {
        Err(semantic(field, format!("must be at least 1, got {v}")))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut raw = tokenize(text)?;
    let mut warnings = Vec::new();

    let text_mode: Option<String> = raw.take("mode")?;
    let mode = match (text_mode, overrides.mode) {
        (Some(t), Some(o)) => {
            let t: Mode = t.parse().map_err(|e: String| semantic("mode", e))?;
            if t != o {
                return Err(semantic("mode", format!("config says `{t}` but the command is `{o}`")));
            }
            o
        }
        (Some(t), None) => t.parse().map_err(|e: String| semantic("mode", e))?,
        (None, Some(o)) => o,
        (None, None) => return Err(semantic("mode", "required but missing")),
    };
    let text_seed: Option<u64> = raw.take("seed")?;
    let seed = overrides
        .seed
        .or(text_seed)
        .ok_or_else(|| semantic("seed", "required but missing"))?;
    let text_out: Option<String> = raw.take("output_path")?;
    let output_path = overrides
        .output_path
        .clone()
        .or(text_out.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let record_every = at_least_one("record_every", raw.take("record_every")?.unwrap_or(100u64))?;
    let text_replicas: Option<usize> = raw.take("replicas")?;
    let replicas = at_least_one("replicas", overrides.replicas.or(text_replicas).unwrap_or(1))?;

    let d: usize = raw.require("d")?;
    if d < 2 {
        return Err(semantic("d", format!("dimension must be at least 2, got {d}")));
    }
    let r_sphere: f64 = raw.require("r_sphere")?;
    let r_particle: f64 = raw.require("r_particle")?;
    let model = ModelParams {
        d,
        r_sphere,
        r_particle,
        z_dot: raw.take("z_dot")?.unwrap_or(0.0),
        sigma_sphere: raw.take("sigma_sphere")?.unwrap_or(1.0),
        sigma_particle: raw.take("sigma_particle")?.unwrap_or(1.0),
    };
    model.validate().map_err(|e| match e {
        depletion_core::ModelError::InvalidParameter { field, reason } => semantic(field, reason),
        other => semantic("model", other.to_string()),
    })?;
    let n_spheres = at_least_one("n_spheres", raw.take("n_spheres")?.unwrap_or(2usize))?;
    let rho2 = rho_thresholds(d).0;
    if model.rho() > rho2 && matches!(mode, Mode::Depletion | Mode::SampleEquilibrium | Mode::AnnealPack) {
        warnings.push(format!(
            "rho = {} exceeds rho_2 = {rho2:.6}: the energy keeps only pair overlaps and is approximate here",
            model.rho()
        ));
    }

    let r = r_sphere;
    let cluster = 2.0 * r * (n_spheres as f64).powf(1.0 / d as f64);
    let (default_hinge, default_slope) = if mode == Mode::AnnealPack {
        (cluster, 0.1 / r)
    } else {
        (cluster, 1.0 / r)
    };
    let psi_hinge_radius: f64 = raw.take("psi_hinge_radius")?.unwrap_or(default_hinge);
    if !(psi_hinge_radius.is_finite() && psi_hinge_radius >= 0.0) {
        return Err(semantic("psi_hinge_radius", "must be non-negative and finite"));
    }
    let psi_slope = positive("psi_slope", raw.take("psi_slope")?.unwrap_or(default_slope))?;
    let bath_radius = positive("bath_radius", raw.take("bath_radius")?.unwrap_or(psi_hinge_radius + 4.0 * r))?;
    let particle_slope = positive(
        "particle_slope",
        raw.take("particle_slope")?.unwrap_or(bath_radius.powi(d as i32 + 1)),
    )?;

    let dt = positive("dt", raw.take("dt")?.unwrap_or_else(|| DynamicsSettings::default_dt(&model)))?;
    let n_steps: u64 = raw.take("n_steps")?.unwrap_or(10_000);
    let max_proj_iters = at_least_one("max_proj_iters", raw.take("max_proj_iters")?.unwrap_or(DEFAULT_MAX_PROJ_ITERS))?;
    let drift = match raw.take::<String>("drift")?.as_deref() {
        None | Some("as-printed") => DriftConvention::AsPrinted,
        Some("sigma-squared") => DriftConvention::SigmaSquared,
        Some(v) => return Err(semantic("drift", format!("expected as-printed or sigma-squared, got `{v}`"))),
    };
    let particle_drift = match raw.take::<String>("particle_drift")?.as_deref() {
        None | Some("sigma-dot-squared") => ParticleDrift::SigmaDotSquared,
        Some("with-sphere-sigma") => ParticleDrift::WithSphereSigma,
        Some(v) => {
            return Err(semantic(
                "particle_drift",
                format!("expected sigma-dot-squared or with-sphere-sigma, got `{v}`"),
            ))
        }
    };
    let local_times_every_snapshot = raw.take_bool("local_times_every_snapshot")?.unwrap_or(false);

    let target = match raw.take::<String>("target")?.as_deref() {
        None | Some("hard-spheres") => SampleTarget::HardSpheres,
        Some("two-type") => SampleTarget::TwoType,
        Some(v) => return Err(semantic("target", format!("expected hard-spheres or two-type, got `{v}`"))),
    };
    let proposal_sigma = positive("proposal_sigma", raw.take("proposal_sigma")?.unwrap_or(0.5 * r))?;
    let n_sweeps = at_least_one("n_sweeps", raw.take("n_sweeps")?.unwrap_or(10_000usize))?;
    let burn_in: usize = raw.take("burn_in")?.unwrap_or(1_000.min(n_sweeps - 1));
    if burn_in >= n_sweeps {
        return Err(semantic("burn_in", format!("must be below n_sweeps = {n_sweeps}, got {burn_in}")));
    }
    let thinning = at_least_one("thinning", raw.take("thinning")?.unwrap_or(10usize))?;
    let adapt = raw.take_bool("adapt")?.unwrap_or(true);

    let base = AnnealSchedule::default_for(&model);
    let anneal = AnnealSchedule {
        z_initial: raw.take("z_initial")?.unwrap_or(base.z_initial),
        growth: raw.take("growth")?.unwrap_or(base.growth),
        n_levels: raw.take("n_levels")?.unwrap_or(base.n_levels),
        sweeps_per_level: raw.take("sweeps_per_level")?.unwrap_or(DEFAULT_SWEEPS_PER_LEVEL),
    };
    anneal.validate().map_err(|e| match e {
        depletion_core::SamplingError::InvalidParameter { field, reason } => semantic(field, reason),
        other => semantic("anneal", other.to_string()),
    })?;
    if mode == Mode::AnnealPack && !(2..=3).contains(&d) {
        return Err(semantic("d", "anneal-pack supports d = 2 and d = 3 only"));
    }

    let input: Option<String> = raw.take("input")?;
    let reference: Option<String> = raw.take("reference")?;
    let pair = (raw.take("pair_i")?.unwrap_or(0usize), raw.take("pair_j")?.unwrap_or(1usize));
    if pair.0 == pair.1 {
        return Err(semantic("pair_j", "must differ from pair_i"));
    }
    let hist_upper = positive("hist_upper", raw.take("hist_upper")?.unwrap_or(10.0 * r))?;
    if hist_upper <= 2.0 * r {
        return Err(semantic("hist_upper", "must exceed the contact distance 2 r_sphere"));
    }
    if mode == Mode::Analyze && input.is_none() {
        return Err(semantic("input", "required in analyze mode"));
    }

    debug_assert!(raw.values.is_empty(), "unconsumed keys {:?}", raw.values);
    Ok(RunConfig {
        mode,
        seed,
        output_path,
        record_every,
        replicas,
        model,
        n_spheres,
        potentials: PotentialConfig {
            psi_hinge_radius,
            psi_slope,
            bath_radius,
            particle_slope,
        },
        integrator: IntegratorConfig {
            dt,
            n_steps,
            max_proj_iters,
            drift,
            particle_drift,
            local_times_every_snapshot,
        },
        sampler: SamplerConfig {
            target,
            proposal_sigma,
            n_sweeps,
            burn_in,
            thinning,
            adapt,
        },
        anneal,
        analyze: AnalyzeConfig {
            input: input.map(PathBuf::from),
            reference: reference.map(PathBuf::from),
            pair,
            hist_upper,
        },
        warnings,
    })
}

impl RunConfig {
    /// Fully resolved config in the input format; parsing it back gives the
    /// same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let s = &mut s;
        let m = &self.model;
        header(s, "run");
        kv(s, "mode", &self.mode);
        kv(s, "seed", &self.seed);
        kv(s, "output_path", &self.output_path.display());
        kv(s, "record_every", &self.record_every);
        kv(s, "replicas", &self.replicas);
        header(s, "model");
        kv(s, "d", &m.d);
        kv(s, "r_sphere", &m.r_sphere);
        kv(s, "r_particle", &m.r_particle);
        kv(s, "z_dot", &m.z_dot);
        kv(s, "sigma_sphere", &m.sigma_sphere);
        kv(s, "sigma_particle", &m.sigma_particle);
        kv(s, "n_spheres", &self.n_spheres);
        let p = &self.potentials;
        header(s, "potentials");
        kv(s, "psi_hinge_radius", &p.psi_hinge_radius);
        kv(s, "psi_slope", &p.psi_slope);
        kv(s, "bath_radius", &p.bath_radius);
        kv(s, "particle_slope", &p.particle_slope);
        let i = &self.integrator;
        header(s, "integrator");
        kv(s, "dt", &i.dt);
        kv(s, "n_steps", &i.n_steps);
        kv(s, "max_proj_iters", &i.max_proj_iters);
        kv(s,
            "drift",
            &match i.drift {
                DriftConvention::AsPrinted => "as-printed",
                DriftConvention::SigmaSquared => "sigma-squared",
            },
        );
        kv(s,
            "particle_drift",
            &match i.particle_drift {
                ParticleDrift::SigmaDotSquared => "sigma-dot-squared",
                ParticleDrift::WithSphereSigma => "with-sphere-sigma",
            },
        );
        kv(s, "local_times_every_snapshot", &i.local_times_every_snapshot);
        let sm = &self.sampler;
        header(s, "sampler");
        kv(s,
            "target",
            &match sm.target {
                SampleTarget::HardSpheres => "hard-spheres",
                SampleTarget::TwoType => "two-type",
            },
        );
        kv(s, "proposal_sigma", &sm.proposal_sigma);
        kv(s, "n_sweeps", &sm.n_sweeps);
        kv(s, "burn_in", &sm.burn_in);
        kv(s, "thinning", &sm.thinning);
        kv(s, "adapt", &sm.adapt);
        let a = &self.anneal;
        header(s, "anneal");
        kv(s, "z_initial", &a.z_initial);
        kv(s, "growth", &a.growth);
        kv(s, "n_levels", &a.n_levels);
        kv(s, "sweeps_per_level", &a.sweeps_per_level);
        let an = &self.analyze;
        header(s, "analyze");
        if let Some(p) = &an.input {
            kv(s, "input", &p.display());
        }
        if let Some(p) = &an.reference {
            kv(s, "reference", &p.display());
        }
        kv(s, "pair_i", &an.pair.0);
        kv(s, "pair_j", &an.pair.1);
        kv(s, "hist_upper", &an.hist_upper);
        std::mem::take(s)
    }
}

fn header(s: &mut String, name: &str) {
    let _ = writeln!(s, "[{name}]");
}

fn kv(s: &mut String, key: &str, value: &dyn fmt::Display) {
    let _ = writeln!(s, "{key} = {value}");
}


#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mode = depletion\nd = 2\nr_sphere = 1\nr_particle = 0.1\nseed = 7\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Depletion);
        assert_eq!(c.seed, 7);
        assert_eq!(c.n_spheres, 2);
        assert_eq!(c.record_every, 100);
        assert_eq!(c.integrator.dt, 4e-4);
        assert_eq!(c.integrator.max_proj_iters, 100);
        assert_eq!(c.anneal.n_levels, 8);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config(&format!("{MINIMAL}z_dot = 0.37\n[integrator]\ndt = 1e-5\n")).unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let e = parse_config("mode = depletion\n\n# fine\nd 2\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Syntax {
                line: 4,
                message: "expected `key = value`, got `d 2`".into()
            }
        );
        assert!(matches!(parse_config("[model]\nbogus = 1"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(parse_config("[nope]"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config("[model]\ndt = 1"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(parse_config("d = 2\nd = 3"), Err(ConfigError::Syntax { line: 2, .. })));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let e = parse_config("mode = depletion\nd = 2\nr_sphere = 1\nr_particle = 1\nseed = 1").unwrap_err();
        match e {
            ConfigError::Semantic { field, reason } => {
                assert_eq!(field, "r_particle");
                assert!(reason.contains("[0, 1)"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
        let e = parse_config("mode = depletion\nd = 2\nr_sphere = 1\nr_particle = 0.1").unwrap_err();
        assert!(matches!(e, ConfigError::Semantic { ref field, .. } if field == "seed"));
        let e = parse_config(&format!("{MINIMAL}dt = -1")).unwrap_err();
        assert!(matches!(e, ConfigError::Semantic { ref field, .. } if field == "dt"));
    }

    #[test]
    fn large_rho_warns_in_depletion_mode() {
        let c = parse_config("mode = depletion\nd = 2\nr_sphere = 1\nr_particle = 0.3\nseed = 1").unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert!(c.warnings[0].contains("rho_2"));
        let c = parse_config("mode = two-type\nd = 2\nr_sphere = 1\nr_particle = 0.3\nseed = 1").unwrap();
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn overrides_win_and_mode_must_agree() {
        let o = Overrides {
            mode: Some(Mode::Depletion),
            seed: Some(99),
            output_path: Some("elsewhere".into()),
            replicas: Some(3),
        };
        let c = parse_config_with(MINIMAL, &o).unwrap();
        assert_eq!((c.seed, c.replicas), (99, 3));
        assert_eq!(c.output_path, PathBuf::from("elsewhere"));
        let o = Overrides {
            mode: Some(Mode::TwoType),
            ..Default::default()
        };
        match parse_config_with(MINIMAL, &o) {
            Err(ConfigError::Semantic { field, .. }) => assert_eq!(field, "mode"),
            other => panic!("{other:?}"),
        }
    }
}
