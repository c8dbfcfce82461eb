//! Experiment configuration.
//!
//! A config is a TOML (or JSON, by extension) document. Every physical
//! quantity carries its unit in the field name (`rate_hz`, `field_t`,
//! `delta_s`, ...). Unknown keys are rejected, and [`ExperimentConfig::validate`]
//! runs before any computation, reporting the offending field path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spin_system: SpinSystemConfig,
    pub experiment: Experiment,
    #[serde(default)]
    pub grids: GridsConfig,
    pub detection: DetectionConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystemConfig {
    pub field_t: f64,
    /// Rotating-frame reference for electrons; the free-electron Larmor
    /// frequency when absent.
    #[serde(default)]
    pub electron_frame_hz: Option<f64>,
    pub spins: Vec<SpinConfig>,
    #[serde(default)]
    pub couplings: Vec<CouplingConfig>,
    #[serde(default)]
    pub relaxation: Option<RelaxationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinConfig {
    /// `"1H"`, `"14N"`, ... or `"E"` for an electron.
    pub isotope: String,
    /// Keep the full Zeeman term instead of moving to the rotating frame.
    #[serde(default)]
    pub lab_frame: bool,
    /// Isotropic chemical shift.
    #[serde(default)]
    pub shift_ppm: Option<f64>,
    /// Principal values of the shift tensor.
    #[serde(default)]
    pub shift_principal_ppm: Option<[f64; 3]>,
    #[serde(default)]
    pub shift_euler_deg: [f64; 3],
    #[serde(default)]
    pub g_principal: Option<[f64; 3]>,
    #[serde(default)]
    pub g_euler_deg: [f64; 3],
    #[serde(default)]
    pub quadrupolar: Option<QuadrupolarConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupolarConfig {
    pub cq_hz: f64,
    pub eta: f64,
    #[serde(default)]
    pub euler_deg: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    /// Zero-based spin indices.
    pub spins: [usize; 2],
    #[serde(default)]
    pub j_hz: Option<f64>,
    #[serde(default)]
    pub dipole_distance_m: Option<f64>,
    /// Inter-spin direction in the molecular frame; any length.
    #[serde(default)]
    pub dipole_direction: Option<[f64; 3]>,
    /// Full coupling tensor.
    #[serde(default)]
    pub tensor_hz: Option<[[f64; 3]; 3]>,
}

/// Per-spin relaxation times. `inf` (TOML) or `null` (JSON) switches a
/// channel off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    pub t1_s: Vec<Option<f64>>,
    pub t2_s: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    // Braced so that stray keys next to `kind = "static"` are rejected.
    Static {},
    Mas {
        rate_hz: f64,
        #[serde(default = "magic_axis")]
        axis: [f64; 3],
    },
    Dor {
        outer_rate_hz: f64,
        inner_rate_hz: f64,
        #[serde(default = "magic_axis")]
        outer_axis: [f64; 3],
        /// Inner rotor axis angle from the outer rotor axis.
        #[serde(default = "dor_inner_angle")]
        inner_angle_deg: f64,
    },
    Pgse {
        gradient_t_per_m: Vec<f64>,
        delta_s: f64,
        big_delta_s: f64,
        #[serde(default)]
        diffusion_m2_per_s: f64,
    },
    Spatiotemporal {
        #[serde(default)]
        diffusion_m2_per_s: f64,
        #[serde(default)]
        velocity_m_per_s: f64,
        /// Spins driven by RF segments; the first spin's isotope when absent.
        #[serde(default)]
        rf_label: Option<String>,
        #[serde(default)]
        segments: Vec<Segment>,
        acquisition: Acquisition,
    },
    Deer {
        /// Observer, pump, observer.
        pulses: Vec<MwPulseConfig>,
        /// From the end of the first pulse to the start of the third.
        gap_s: f64,
        /// Pump positions, spread evenly over the gap.
        steps: usize,
        echo_points: usize,
        /// Width of the echo sampling window, centred on the echo.
        echo_window_s: f64,
    },
    OvertoneCp {
        rate_hz: f64,
        #[serde(default = "overtone_axis")]
        axis: [f64; 3],
        /// Index of the quadrupolar nucleus.
        overtone_spin: usize,
        #[serde(default)]
        cp: Option<CpConfig>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Static {} => "static",
            Experiment::Mas { .. } => "mas",
            Experiment::Dor { .. } => "dor",
            Experiment::Pgse { .. } => "pgse",
            Experiment::Spatiotemporal { .. } => "spatiotemporal",
            Experiment::Deer { .. } => "deer",
            Experiment::OvertoneCp { .. } => "overtone_cp",
        }
    }
}

fn magic_axis() -> [f64; 3] {
    fpmr_core::spin::MAGIC_AXIS
}

fn overtone_axis() -> [f64; 3] {
    fpmr_core::assembly::R_MAS
}

fn dor_inner_angle() -> f64 {
    30.5556
}

/// One piece of a spatiotemporal schedule. Carrier offsets are physical
/// (carrier minus spectrometer reference); RF acts on `rf_label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Segment {
    Delay {
        duration_s: f64,
        #[serde(default)]
        gradient_t_per_m: f64,
    },
    Pulse {
        duration_s: f64,
        amplitude_hz: f64,
        #[serde(default)]
        phase_deg: f64,
        #[serde(default)]
        offset_hz: f64,
        #[serde(default)]
        gradient_t_per_m: f64,
    },
    /// Linear frequency sweep, piecewise constant over `slices`.
    Chirp {
        duration_s: f64,
        amplitude_hz: f64,
        start_hz: f64,
        end_hz: f64,
        #[serde(default)]
        phase_deg: f64,
        #[serde(default)]
        gradient_t_per_m: f64,
        slices: usize,
    },
}

impl Segment {
    pub fn has_rf(&self) -> bool {
        !matches!(self, Segment::Delay { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Acquisition {
    #[serde(default)]
    pub gradient_t_per_m: f64,
    /// Flip the gradient sign every this many points.
    #[serde(default)]
    pub alternate_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MwPulseConfig {
    pub duration_s: f64,
    pub amplitude_hz: f64,
    /// Absolute microwave frequency.
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpConfig {
    pub contact_s: f64,
    /// Overtone channel nutation amplitude.
    pub overtone_amplitude_hz: f64,
    /// Absolute overtone carrier frequency, near twice the Larmor frequency.
    pub overtone_frequency_hz: f64,
    pub source_label: String,
    pub source_amplitude_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    #[serde(default = "default_rotor")]
    pub rotor_points: usize,
    #[serde(default = "default_inner")]
    pub inner_rotor_points: usize,
    #[serde(default = "default_rf")]
    pub rf_points: usize,
    #[serde(default = "default_mw")]
    pub mw_points: usize,
    #[serde(default)]
    pub z: Option<ZGridConfig>,
    #[serde(default)]
    pub spherical: SphericalConfig,
}

fn default_rotor() -> usize {
    32
}
fn default_inner() -> usize {
    16
}
fn default_rf() -> usize {
    5
}
fn default_mw() -> usize {
    8
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self {
            rotor_points: default_rotor(),
            inner_rotor_points: default_inner(),
            rf_points: default_rf(),
            mw_points: default_mw(),
            z: None,
            spherical: SphericalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridConfig {
    pub points: usize,
    pub start_m: f64,
    pub end_m: f64,
    pub boundary: BoundaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Period `end_m - start_m`; the end point is not a grid point.
    Periodic,
    Absorptive,
    Reflective,
}

/// Crystallite orientations. Angles are powder-grid angles: the sample is
/// rotated by the inverse of the Euler rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum SphericalConfig {
    Single {
        #[serde(default)]
        euler_deg: [f64; 3],
    },
    Spiral {
        points: usize,
    },
    List {
        euler_deg: Vec<[f64; 3]>,
        weights: Vec<f64>,
    },
}

impl Default for SphericalConfig {
    fn default() -> Self {
        SphericalConfig::Single { euler_deg: [0.0; 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Time,
    Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub domain: Domain,
    pub points: usize,
    #[serde(default)]
    pub dwell_s: Option<f64>,
    #[serde(default)]
    pub center_hz: Option<f64>,
    #[serde(default)]
    pub sweep_hz: Option<f64>,
    pub initial: Vec<OperatorTerm>,
    pub coil: Vec<OperatorTerm>,
}

/// `coefficient * sum S_op` over the spins selected by `label` or `spin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorTerm {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub spin: Option<usize>,
    pub operator: OperatorKind,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub plot: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            formats: default_formats(),
            plot: false,
        }
    }
}

/// Settings of the time-sliced reference used by `fpmr oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_step")]
    pub step_s: f64,
}

fn default_step() -> f64 {
    1e-7
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { step_s: default_step() }
    }
}

/// Reads, parses and validates a config. `.json` files are parsed as JSON,
/// everything else as TOML.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg = if json { parse_json(&text)? } else { parse_toml(&text)? };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_toml(text: &str) -> Result<ExperimentConfig, Error> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().message().trim().to_string(),
        line: e.inner().span().map(|s| text[..s.start].lines().count().max(1)),
    })
}

pub fn parse_json(text: &str) -> Result<ExperimentConfig, Error> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
        line: Some(e.inner().line()),
    })
}

struct Check {
    path: String,
}

impl Check {
    fn at(path: impl Into<String>) -> Self {
        Self { path: path.into() }
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::Invalid {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn finite(&self, x: f64) -> Result<(), Error> {
        if x.is_finite() {
            Ok(())
        } else {
            Err(self.fail(format!("must be finite, got {x}")))
        }
    }

    fn positive(&self, x: f64) -> Result<(), Error> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(self.fail(format!("must be positive and finite, got {x}")))
        }
    }

    fn non_negative(&self, x: f64) -> Result<(), Error> {
        if x >= 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(self.fail(format!("must be non-negative and finite, got {x}")))
        }
    }

    fn at_least(&self, n: usize, min: usize) -> Result<(), Error> {
        if n >= min {
            Ok(())
        } else {
            Err(self.fail(format!("must be at least {min}, got {n}")))
        }
    }
}

fn nonzero_vector(c: &Check, v: &[f64; 3]) -> Result<(), Error> {
    for x in v {
        c.finite(*x)?;
    }
    if v.iter().all(|x| *x == 0.0) {
        return Err(c.fail("vector must be nonzero"));
    }
    Ok(())
}

fn angles(c: &Check, v: &[f64; 3]) -> Result<(), Error> {
    v.iter().try_for_each(|x| c.finite(*x))
}

impl ExperimentConfig {
    /// Schema checks beyond what parsing enforces. Errors name the field.
    pub fn validate(&self) -> Result<(), Error> {
        self.validate_spins()?;
        self.validate_experiment()?;
        self.validate_grids()?;
        self.validate_detection()?;
        Check::at("oracle.step_s").positive(self.oracle.step_s)
    }

    fn is_electron(&self, n: usize) -> bool {
        matches!(self.spin_system.spins[n].isotope.as_str(), "E" | "e")
    }

    fn validate_spins(&self) -> Result<(), Error> {
        let ss = &self.spin_system;
        Check::at("spin_system.field_t").non_negative(ss.field_t)?;
        if let Some(f) = ss.electron_frame_hz {
            Check::at("spin_system.electron_frame_hz").finite(f)?;
        }
        if ss.spins.is_empty() {
            return Err(Check::at("spin_system.spins").fail("at least one spin is required"));
        }
        for (n, s) in ss.spins.iter().enumerate() {
            let p = format!("spin_system.spins[{n}]");
            let spin = fpmr_core::spin::Spin::isotope(&s.isotope)
                .map_err(|e| Check::at(format!("{p}.isotope")).fail(e.to_string()))?;
            let electron = spin.is_electron();
            if s.shift_ppm.is_some() && s.shift_principal_ppm.is_some() {
                return Err(Check::at(format!("{p}.shift_ppm")).fail("give either shift_ppm or shift_principal_ppm"));
            }
            if let Some(x) = s.shift_ppm {
                Check::at(format!("{p}.shift_ppm")).finite(x)?;
            }
            if let Some(v) = &s.shift_principal_ppm {
                angles(&Check::at(format!("{p}.shift_principal_ppm")), v)?;
            }
            angles(&Check::at(format!("{p}.shift_euler_deg")), &s.shift_euler_deg)?;
            angles(&Check::at(format!("{p}.g_euler_deg")), &s.g_euler_deg)?;
            if electron && (s.shift_ppm.is_some() || s.shift_principal_ppm.is_some()) {
                return Err(Check::at(format!("{p}.shift_ppm")).fail("electrons take g_principal, not a chemical shift"));
            }
            if let Some(g) = &s.g_principal {
                let c = Check::at(format!("{p}.g_principal"));
                if !electron {
                    return Err(c.fail("g-tensors apply to electrons only"));
                }
                for x in g {
                    c.positive(*x)?;
                }
            }
            if let Some(q) = &s.quadrupolar {
                let qp = format!("{p}.quadrupolar");
                if spin.multiplicity < 3 {
                    return Err(Check::at(qp).fail(format!("{} has spin 1/2", s.isotope)));
                }
                Check::at(format!("{qp}.cq_hz")).finite(q.cq_hz)?;
                let c = Check::at(format!("{qp}.eta"));
                if !(0.0..=1.0).contains(&q.eta) {
                    return Err(c.fail(format!("must lie in [0, 1], got {}", q.eta)));
                }
                angles(&Check::at(format!("{qp}.euler_deg")), &q.euler_deg)?;
            }
        }
        for (k, c) in ss.couplings.iter().enumerate() {
            let p = format!("spin_system.couplings[{k}]");
            let [i, j] = c.spins;
            if i >= ss.spins.len() || j >= ss.spins.len() || i == j {
                return Err(Check::at(format!("{p}.spins")).fail(format!(
                    "need two distinct indices below {}, got [{i}, {j}]",
                    ss.spins.len()
                )));
            }
            if let Some(x) = c.j_hz {
                Check::at(format!("{p}.j_hz")).finite(x)?;
            }
            match (c.dipole_distance_m, &c.dipole_direction) {
                (Some(r), Some(d)) => {
                    Check::at(format!("{p}.dipole_distance_m")).positive(r)?;
                    nonzero_vector(&Check::at(format!("{p}.dipole_direction")), d)?;
                }
                (None, None) => {}
                (Some(_), None) => {
                    return Err(Check::at(format!("{p}.dipole_direction")).fail("required with dipole_distance_m"))
                }
                (None, Some(_)) => {
                    return Err(Check::at(format!("{p}.dipole_distance_m")).fail("required with dipole_direction"))
                }
            }
            if let Some(t) = &c.tensor_hz {
                let ch = Check::at(format!("{p}.tensor_hz"));
                t.iter().flatten().try_for_each(|x| ch.finite(*x))?;
            }
        }
        if let Some(r) = &ss.relaxation {
            for (name, list) in [("t1_s", &r.t1_s), ("t2_s", &r.t2_s)] {
                if list.len() != ss.spins.len() {
                    return Err(Check::at(format!("spin_system.relaxation.{name}")).fail(format!(
                        "needs one entry per spin ({}), got {}",
                        ss.spins.len(),
                        list.len()
                    )));
                }
                for (n, t) in list.iter().enumerate() {
                    if let Some(t) = t {
                        if !(*t > 0.0) {
                            return Err(Check::at(format!("spin_system.relaxation.{name}[{n}]"))
                                .fail(format!("relaxation time must be positive, got {t}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_experiment(&self) -> Result<(), Error> {
        let p = |f: &str| Check::at(format!("experiment.{f}"));
        match &self.experiment {
            Experiment::Static {} => {}
            Experiment::Mas { rate_hz, axis } => {
                p("rate_hz").finite(*rate_hz)?;
                nonzero_vector(&p("axis"), axis)?;
            }
            Experiment::Dor {
                outer_rate_hz,
                inner_rate_hz,
                outer_axis,
                inner_angle_deg,
            } => {
                p("outer_rate_hz").finite(*outer_rate_hz)?;
                p("inner_rate_hz").finite(*inner_rate_hz)?;
                nonzero_vector(&p("outer_axis"), outer_axis)?;
                p("inner_angle_deg").finite(*inner_angle_deg)?;
            }
            Experiment::Pgse {
                gradient_t_per_m,
                delta_s,
                big_delta_s,
                diffusion_m2_per_s,
            } => {
                if gradient_t_per_m.is_empty() {
                    return Err(p("gradient_t_per_m").fail("at least one gradient strength is required"));
                }
                for (k, g) in gradient_t_per_m.iter().enumerate() {
                    p(&format!("gradient_t_per_m[{k}]")).finite(*g)?;
                }
                p("delta_s").positive(*delta_s)?;
                p("big_delta_s").positive(*big_delta_s)?;
                if big_delta_s < delta_s {
                    return Err(p("big_delta_s").fail("must not be shorter than delta_s"));
                }
                p("diffusion_m2_per_s").non_negative(*diffusion_m2_per_s)?;
                self.require_z("pgse")?;
            }
            Experiment::Spatiotemporal {
                diffusion_m2_per_s,
                velocity_m_per_s,
                rf_label,
                segments,
                acquisition,
            } => {
                p("diffusion_m2_per_s").non_negative(*diffusion_m2_per_s)?;
                if let Some(l) = rf_label {
                    if !self.spin_system.spins.iter().any(|s| &s.isotope == l) {
                        return Err(p("rf_label").fail(format!("no spin labelled `{l}`")));
                    }
                }
                p("velocity_m_per_s").finite(*velocity_m_per_s)?;
                for (k, s) in segments.iter().enumerate() {
                    let q = |f: &str| p(&format!("segments[{k}].{f}"));
                    match s {
                        Segment::Delay {
                            duration_s,
                            gradient_t_per_m,
                        } => {
                            q("duration_s").positive(*duration_s)?;
                            q("gradient_t_per_m").finite(*gradient_t_per_m)?;
                        }
                        Segment::Pulse {
                            duration_s,
                            amplitude_hz,
                            phase_deg,
                            offset_hz,
                            gradient_t_per_m,
                        } => {
                            q("duration_s").positive(*duration_s)?;
                            q("amplitude_hz").finite(*amplitude_hz)?;
                            q("phase_deg").finite(*phase_deg)?;
                            q("offset_hz").finite(*offset_hz)?;
                            q("gradient_t_per_m").finite(*gradient_t_per_m)?;
                        }
                        Segment::Chirp {
                            duration_s,
                            amplitude_hz,
                            start_hz,
                            end_hz,
                            phase_deg,
                            gradient_t_per_m,
                            slices,
                        } => {
                            q("duration_s").positive(*duration_s)?;
                            q("amplitude_hz").finite(*amplitude_hz)?;
                            q("start_hz").finite(*start_hz)?;
                            q("end_hz").finite(*end_hz)?;
                            q("phase_deg").finite(*phase_deg)?;
                            q("gradient_t_per_m").finite(*gradient_t_per_m)?;
                            q("slices").at_least(*slices, 1)?;
                        }
                    }
                }
                p("acquisition.gradient_t_per_m").finite(acquisition.gradient_t_per_m)?;
                if let Some(n) = acquisition.alternate_every {
                    p("acquisition.alternate_every").at_least(n, 1)?;
                }
                if self.detection.domain != Domain::Time {
                    return Err(Check::at("detection.domain").fail("spatiotemporal experiments are detected in time"));
                }
                self.require_z("spatiotemporal")?;
            }
            Experiment::Deer {
                pulses,
                gap_s,
                steps,
                echo_points,
                echo_window_s,
            } => {
                if pulses.len() != 3 {
                    return Err(p("pulses").fail(format!(
                        "three pulses (observer, pump, observer) are required, got {}",
                        pulses.len()
                    )));
                }
                for (k, pl) in pulses.iter().enumerate() {
                    let q = |f: &str| p(&format!("pulses[{k}].{f}"));
                    q("duration_s").positive(pl.duration_s)?;
                    q("amplitude_hz").finite(pl.amplitude_hz)?;
                    q("frequency_hz").finite(pl.frequency_hz)?;
                    q("phase_deg").finite(pl.phase_deg)?;
                }
                p("gap_s").positive(*gap_s)?;
                if *gap_s < pulses[1].duration_s {
                    return Err(p("gap_s").fail("the pump pulse must fit inside the gap"));
                }
                p("steps").at_least(*steps, 2)?;
                p("echo_points").at_least(*echo_points, 1)?;
                p("echo_window_s").positive(*echo_window_s)?;
                if *echo_window_s / 2.0 > gap_s + pulses[0].duration_s / 2.0 {
                    return Err(p("echo_window_s").fail("the echo window must start after the last pulse"));
                }
                if !(0..self.spin_system.spins.len()).any(|n| self.is_electron(n)) {
                    return Err(Check::at("spin_system.spins").fail("DEER needs electron spins"));
                }
            }
            Experiment::OvertoneCp {
                rate_hz,
                axis,
                overtone_spin,
                cp,
            } => {
                p("rate_hz").finite(*rate_hz)?;
                nonzero_vector(&p("axis"), axis)?;
                let spins = &self.spin_system.spins;
                if *overtone_spin >= spins.len() || spins[*overtone_spin].quadrupolar.is_none() {
                    return Err(p("overtone_spin").fail("must index a spin with a quadrupolar tensor"));
                }
                if let Some(cp) = cp {
                    p("cp.contact_s").positive(cp.contact_s)?;
                    p("cp.overtone_amplitude_hz").finite(cp.overtone_amplitude_hz)?;
                    p("cp.overtone_frequency_hz").finite(cp.overtone_frequency_hz)?;
                    p("cp.source_amplitude_hz").finite(cp.source_amplitude_hz)?;
                    if !spins.iter().any(|s| s.isotope == cp.source_label) {
                        return Err(p("cp.source_label").fail(format!("no spin labelled `{}`", cp.source_label)));
                    }
                }
            }
        }
        Ok(())
    }

    fn require_z(&self, kind: &str) -> Result<(), Error> {
        if self.grids.z.is_none() {
            return Err(Check::at("grids.z").fail(format!("{kind} experiments need a coordinate grid")));
        }
        Ok(())
    }

    fn validate_grids(&self) -> Result<(), Error> {
        let g = &self.grids;
        let spinning = match &self.experiment {
            Experiment::Mas { rate_hz, .. } => *rate_hz != 0.0,
            Experiment::Dor { .. } | Experiment::OvertoneCp { .. } => true,
            _ => false,
        };
        if spinning {
            Check::at("grids.rotor_points").at_least(g.rotor_points, 3)?;
        }
        if let Experiment::Dor { inner_rate_hz, .. } = &self.experiment {
            if *inner_rate_hz != 0.0 {
                Check::at("grids.inner_rotor_points").at_least(g.inner_rotor_points, 3)?;
            } else {
                Check::at("grids.inner_rotor_points").at_least(g.inner_rotor_points, 1)?;
            }
        }
        Check::at("grids.rf_points").at_least(g.rf_points, 3)?;
        Check::at("grids.mw_points").at_least(g.mw_points, 3)?;
        if let Some(z) = &g.z {
            Check::at("grids.z.points").at_least(z.points, 3)?;
            Check::at("grids.z.start_m").finite(z.start_m)?;
            Check::at("grids.z.end_m").finite(z.end_m)?;
            if !(z.end_m > z.start_m) {
                return Err(Check::at("grids.z.end_m").fail("must exceed start_m"));
            }
        }
        match &g.spherical {
            SphericalConfig::Single { euler_deg } => angles(&Check::at("grids.spherical.euler_deg"), euler_deg)?,
            SphericalConfig::Spiral { points } => Check::at("grids.spherical.points").at_least(*points, 1)?,
            SphericalConfig::List { euler_deg, weights } => {
                if euler_deg.is_empty() || euler_deg.len() != weights.len() {
                    return Err(Check::at("grids.spherical.weights")
                        .fail("orientation and weight lists must be non-empty and equally long"));
                }
                for (k, e) in euler_deg.iter().enumerate() {
                    angles(&Check::at(format!("grids.spherical.euler_deg[{k}]")), e)?;
                }
                for (k, w) in weights.iter().enumerate() {
                    Check::at(format!("grids.spherical.weights[{k}]")).positive(*w)?;
                }
            }
        }
        Ok(())
    }

    fn validate_detection(&self) -> Result<(), Error> {
        let d = &self.detection;
        Check::at("detection.points").at_least(d.points, 1)?;
        match d.domain {
            Domain::Time => {
                let c = Check::at("detection.dwell_s");
                c.positive(d.dwell_s.ok_or_else(|| c.fail("required for time-domain detection"))?)?;
            }
            Domain::Frequency => {
                let c = Check::at("detection.center_hz");
                c.finite(d.center_hz.ok_or_else(|| c.fail("required for frequency-domain detection"))?)?;
                let c = Check::at("detection.sweep_hz");
                c.positive(d.sweep_hz.ok_or_else(|| c.fail("required for frequency-domain detection"))?)?;
                if matches!(self.experiment, Experiment::Pgse { .. } | Experiment::Deer { .. }) {
                    return Err(Check::at("detection.domain")
                        .fail(format!("{} experiments are detected in time", self.experiment.kind())));
                }
            }
        }
        for (name, terms) in [("initial", &d.initial), ("coil", &d.coil)] {
            if terms.is_empty() {
                return Err(Check::at(format!("detection.{name}")).fail("at least one operator term is required"));
            }
            for (k, t) in terms.iter().enumerate() {
                let c = Check::at(format!("detection.{name}[{k}]"));
                match (&t.label, t.spin) {
                    (Some(l), None) => {
                        if !self.spin_system.spins.iter().any(|s| &s.isotope == l) {
                            return Err(c.fail(format!("no spin labelled `{l}`")));
                        }
                    }
                    (None, Some(n)) => {
                        if n >= self.spin_system.spins.len() {
                            return Err(c.fail(format!("spin index {n} out of range")));
                        }
                    }
                    _ => return Err(c.fail("give exactly one of `label` and `spin`")),
                }
                Check::at(format!("detection.{name}[{k}].coefficient")).finite(t.coefficient)?;
            }
        }
        Ok(())
    }
}
