//! TOML run configuration. Every key is optional; a file naming only the
//! scenario runs it at the defaults below.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use bohm_core::bohm::{AmplitudeForm, BohmOptions};
use bohm_core::catalog::{self, AnalyticSolution};
use bohm_core::family::FFamily;
use bohm_core::field::Scheme;
use bohm_core::PhysicalParams;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    AiryAnalytic,
    AiryDynamic,
    HoShell,
    PlaneDispersion,
    VbZeroFamily,
    MorseCheck,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::AiryAnalytic,
        ScenarioName::AiryDynamic,
        ScenarioName::HoShell,
        ScenarioName::PlaneDispersion,
        ScenarioName::VbZeroFamily,
        ScenarioName::MorseCheck,
        ScenarioName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::AiryAnalytic => "airy-analytic",
            ScenarioName::AiryDynamic => "airy-dynamic",
            ScenarioName::HoShell => "ho-shell",
            ScenarioName::PlaneDispersion => "plane-dispersion",
            ScenarioName::VbZeroFamily => "vb-zero-family",
            ScenarioName::MorseCheck => "morse-check",
            ScenarioName::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioName::AiryAnalytic => "closed-form Airy packet: uniform Bohm force, acceleration beta^3/2m^2",
            ScenarioName::AiryDynamic => "split-step evolution of apodized Airy data, peak and trajectory acceleration",
            ScenarioName::HoShell => "oscillator eigenstates: V_B + V equals the level energy",
            ScenarioName::PlaneDispersion => "plane wave: uniform QHJ residual hbar^2 k^2/2m - hbar omega",
            ScenarioName::VbZeroFamily => "random wavefunction-potential families with vanishing Bohm potential",
            ScenarioName::MorseCheck => "Morse ground state: exact eigenstate with large Bohm potential",
            ScenarioName::Custom => "any catalog solution: residuals, Bohm potential and trajectories",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown scenario {s:?}; try `bohm-lab list`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Fd2,
    Fd4,
    Fd6,
}

impl SchemeName {
    pub fn scheme(self) -> Scheme {
        let accuracy = match self {
            SchemeName::Fd2 => 2,
            SchemeName::Fd4 => 4,
            SchemeName::Fd6 => 6,
        };
        Scheme::FiniteDifference { accuracy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scenario: Option<ScenarioName>,
    pub seed: u64,
    pub physics: Physics,
    pub bohm: BohmSettings,
    pub airy: Airy,
    pub airy_dynamic: AiryDynamic,
    pub ho_shell: HoShell,
    pub plane: Plane,
    pub family: Family,
    pub morse: Morse,
    pub custom: Custom,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scenario: None,
            seed: 42,
            physics: Physics::default(),
            bohm: BohmSettings::default(),
            airy: Airy::default(),
            airy_dynamic: AiryDynamic::default(),
            ho_shell: HoShell::default(),
            plane: Plane::default(),
            family: Family::default(),
            morse: Morse::default(),
            custom: Custom::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics { hbar: 1.0, mass: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BohmSettings {
    pub scheme: SchemeName,
    pub node_threshold: f64,
    pub exclusion_radius: f64,
    /// Below this fraction of `max|A|`, and away from nodes, `A''/A` is taken
    /// from `ln|A|`. Zero turns the log form off.
    pub log_below: f64,
}

impl Default for BohmSettings {
    fn default() -> Self {
        BohmSettings {
            scheme: SchemeName::Fd6,
            node_threshold: 1e-8,
            exclusion_radius: 0.05,
            log_below: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Airy {
    pub beta: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub times: Vec<f64>,
    /// Node-free window for the numeric-vs-closed-form comparison.
    pub compare_min: f64,
    pub compare_max: f64,
    pub trajectory_start: f64,
    pub trajectory_t_max: f64,
    pub trajectory_dt: f64,
}

impl Default for Airy {
    fn default() -> Self {
        Airy {
            beta: 1.0,
            x_min: -10.0,
            x_max: 10.0,
            dx: 0.01,
            times: vec![0.0, 0.5, 1.0, 2.0],
            compare_min: -2.0,
            compare_max: 4.0,
            trajectory_start: -1.0188,
            trajectory_t_max: 2.0,
            trajectory_dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AiryDynamic {
    pub beta: f64,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub t_max: f64,
    pub apodize: f64,
    pub record_every: usize,
    /// Snapshots written to `snapshots.csv`, evenly spread over the run.
    pub snapshots: usize,
    pub trajectory_start: f64,
    pub tolerance: f64,
}

impl Default for AiryDynamic {
    fn default() -> Self {
        AiryDynamic {
            beta: 1.0,
            n: 4096,
            length: 80.0,
            dt: 1e-3,
            t_max: 2.0,
            apodize: 0.1,
            record_every: 10,
            snapshots: 11,
            trajectory_start: -1.0188,
            tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoShell {
    pub omega: f64,
    pub n_max: u32,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub tolerance: f64,
    pub min_bohm: f64,
}

impl Default for HoShell {
    fn default() -> Self {
        HoShell {
            omega: 1.0,
            n_max: 6,
            x_min: -6.0,
            x_max: 6.0,
            dx: 0.01,
            dt: 1e-3,
            tolerance: 1e-6,
            min_bohm: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Plane {
    pub k: f64,
    pub omega: f64,
    /// Periodic box `[0, length)`; `k length / 2 pi` must be an integer.
    pub n: usize,
    pub length: f64,
    pub t: f64,
    pub dt: f64,
    pub tolerance: f64,
}

impl Default for Plane {
    fn default() -> Self {
        Plane {
            k: 2.0,
            omega: 1.5,
            n: 1024,
            length: 2.0 * std::f64::consts::PI,
            t: 0.2,
            dt: 1e-3,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Family {
    /// Random families drawn from `seed`, in addition to `members`.
    pub count: usize,
    pub degree: usize,
    pub t: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub vb_tolerance: f64,
    pub continuity_tolerance: f64,
    pub qhj_tolerance: f64,
    pub force_tolerance: f64,
    pub members: Vec<FFamily>,
}

impl Default for Family {
    fn default() -> Self {
        Family {
            count: 20,
            degree: 3,
            t: 0.3,
            dt: 1e-5,
            x_min: -1.0,
            x_max: 1.0,
            dx: 0.01,
            vb_tolerance: 1e-8,
            continuity_tolerance: 1e-8,
            qhj_tolerance: 1e-6,
            force_tolerance: 1e-6,
            members: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Morse {
    pub depth: f64,
    pub alpha: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub tolerance: f64,
    pub min_bohm: f64,
}

impl Default for Morse {
    fn default() -> Self {
        Morse {
            depth: 8.0,
            alpha: 1.0,
            x_min: -6.0,
            x_max: 6.0,
            dx: 0.01,
            dt: 1e-3,
            tolerance: 1e-6,
            min_bohm: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Custom {
    /// Catalog name: `airy[:beta]`, `ho:n[,omega]`, `plane:k,omega`,
    /// `gauss:sigma,k0`, `morse:D,alpha`.
    pub solution: String,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t: f64,
    pub dt: f64,
    pub tolerance: f64,
    pub trajectory_starts: Vec<f64>,
    pub trajectory_duration: f64,
    pub trajectory_dt: f64,
}

impl Default for Custom {
    fn default() -> Self {
        Custom {
            solution: "gauss:2,1.5".into(),
            x_min: -10.0,
            x_max: 10.0,
            dx: 0.01,
            t: 0.5,
            dt: 1e-3,
            tolerance: 1e-6,
            trajectory_starts: vec![-1.0, 0.0, 1.0],
            trajectory_duration: 1.0,
            trajectory_dt: 0.01,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(field, format!("must be positive, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(field, format!("must be finite, got {v}")))
    }
}

fn window(section: &str, x_min: f64, x_max: f64, dx: f64) -> Result<()> {
    finite(&format!("{section}.x_min"), x_min)?;
    finite(&format!("{section}.x_max"), x_max)?;
    if x_max <= x_min {
        return Err(CliError::invalid(
            &format!("{section}.x_max"),
            format!("must exceed x_min ({x_min}), got {x_max}"),
        ));
    }
    positive(&format!("{section}.dx"), dx)?;
    if (x_max - x_min) / dx < 16.0 {
        return Err(CliError::invalid(
            &format!("{section}.dx"),
            format!("{dx} leaves fewer than 16 cells"),
        ));
    }
    Ok(())
}

fn core(field: &str, e: bohm_core::Error) -> CliError {
    CliError::invalid(field, e.to_string())
}

impl Config {
    /// Parses and validates TOML text. `origin` only labels errors.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(1);
            CliError::Parse {
                path: origin.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Config::from_toml(&text, path)
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            hbar: self.physics.hbar,
            mass: self.physics.mass,
        }
    }

    pub fn bohm_options(&self) -> BohmOptions {
        let b = &self.bohm;
        BohmOptions {
            scheme: b.scheme.scheme(),
            node_threshold: b.node_threshold,
            exclusion_radius: b.exclusion_radius,
            form: if b.log_below > 0.0 {
                AmplitudeForm::Auto {
                    log_below: b.log_below,
                    node_radius: 0.5,
                }
            } else {
                AmplitudeForm::Direct
            },
        }
    }

    pub fn custom_solution(&self) -> Result<AnalyticSolution> {
        let s: AnalyticSolution = self.custom.solution.parse().map_err(|e| core("custom.solution", e))?;
        s.validate(&self.params()).map_err(|e| core("custom.solution", e))?;
        Ok(s)
    }

    /// `beta^3 / 2m^2` for the configured Airy packet.
    pub fn expected_airy_acceleration(&self) -> f64 {
        catalog::airy_acceleration(self.airy.beta, &self.params())
    }

    pub fn validate(&self) -> Result<()> {
        positive("physics.hbar", self.physics.hbar)?;
        positive("physics.mass", self.physics.mass)?;

        let b = &self.bohm;
        positive("bohm.node_threshold", b.node_threshold)?;
        if !(b.exclusion_radius >= 0.0 && b.exclusion_radius.is_finite()) {
            return Err(CliError::invalid("bohm.exclusion_radius", "must be zero or positive"));
        }
        if !(0.0..1.0).contains(&b.log_below) {
            return Err(CliError::invalid(
                "bohm.log_below",
                format!("must lie in [0, 1), got {}", b.log_below),
            ));
        }

        let a = &self.airy;
        if a.beta == 0.0 || !a.beta.is_finite() {
            return Err(CliError::invalid(
                "airy.beta",
                format!("must be nonzero and finite, got {}", a.beta),
            ));
        }
        window("airy", a.x_min, a.x_max, a.dx)?;
        if a.times.is_empty() {
            return Err(CliError::invalid("airy.times", "needs at least one time"));
        }
        for t in &a.times {
            finite("airy.times", *t)?;
        }
        if !(a.compare_min < a.compare_max) {
            return Err(CliError::invalid("airy.compare_max", "must exceed compare_min"));
        }
        finite("airy.trajectory_start", a.trajectory_start)?;
        positive("airy.trajectory_t_max", a.trajectory_t_max)?;
        positive("airy.trajectory_dt", a.trajectory_dt)?;

        let d = &self.airy_dynamic;
        if d.beta == 0.0 || !d.beta.is_finite() {
            return Err(CliError::invalid("airy_dynamic.beta", "must be nonzero and finite"));
        }
        if !d.n.is_power_of_two() || d.n < 16 {
            return Err(CliError::invalid(
                "airy_dynamic.n",
                format!("must be a power of two >= 16, got {}", d.n),
            ));
        }
        positive("airy_dynamic.length", d.length)?;
        positive("airy_dynamic.dt", d.dt)?;
        positive("airy_dynamic.t_max", d.t_max)?;
        if !(0.0..0.5).contains(&d.apodize) {
            return Err(CliError::invalid(
                "airy_dynamic.apodize",
                format!("must lie in [0, 0.5), got {}", d.apodize),
            ));
        }
        if d.record_every == 0 {
            return Err(CliError::invalid("airy_dynamic.record_every", "must be at least 1"));
        }
        if d.snapshots < 2 {
            return Err(CliError::invalid("airy_dynamic.snapshots", "must be at least 2"));
        }
        finite("airy_dynamic.trajectory_start", d.trajectory_start)?;
        positive("airy_dynamic.tolerance", d.tolerance)?;

        let h = &self.ho_shell;
        positive("ho_shell.omega", h.omega)?;
        window("ho_shell", h.x_min, h.x_max, h.dx)?;
        positive("ho_shell.dt", h.dt)?;
        positive("ho_shell.tolerance", h.tolerance)?;
        finite("ho_shell.min_bohm", h.min_bohm)?;

        let p = &self.plane;
        finite("plane.k", p.k)?;
        finite("plane.omega", p.omega)?;
        if p.n < 16 {
            return Err(CliError::invalid(
                "plane.n",
                format!("must be at least 16, got {}", p.n),
            ));
        }
        positive("plane.length", p.length)?;
        let cycles = p.k * p.length / (2.0 * std::f64::consts::PI);
        if (cycles - cycles.round()).abs() > 1e-9 * cycles.abs().max(1.0) {
            return Err(CliError::invalid(
                "plane.k",
                format!(
                    "{} does not fit the periodic box of length {} ({cycles} cycles)",
                    p.k, p.length
                ),
            ));
        }
        finite("plane.t", p.t)?;
        positive("plane.dt", p.dt)?;
        positive("plane.tolerance", p.tolerance)?;

        let f = &self.family;
        if f.count == 0 && f.members.is_empty() {
            return Err(CliError::invalid(
                "family.count",
                "no families to check (count = 0 and no members)",
            ));
        }
        window("family", f.x_min, f.x_max, f.dx)?;
        if !(f.x_min <= 0.0 && f.x_max >= 0.0) {
            return Err(CliError::invalid(
                "family.x_min",
                "the window must contain x = 0, where the phase is anchored",
            ));
        }
        finite("family.t", f.t)?;
        positive("family.dt", f.dt)?;
        for (name, v) in [
            ("family.vb_tolerance", f.vb_tolerance),
            ("family.continuity_tolerance", f.continuity_tolerance),
            ("family.qhj_tolerance", f.qhj_tolerance),
            ("family.force_tolerance", f.force_tolerance),
        ] {
            positive(name, v)?;
        }
        for (i, m) in f.members.iter().enumerate() {
            m.validate().map_err(|e| core(&format!("family.members[{i}]"), e))?;
        }

        let m = &self.morse;
        catalog::morse_ground_energy(m.depth, m.alpha, &self.params()).map_err(|e| core("morse.depth", e))?;
        window("morse", m.x_min, m.x_max, m.dx)?;
        positive("morse.dt", m.dt)?;
        positive("morse.tolerance", m.tolerance)?;
        finite("morse.min_bohm", m.min_bohm)?;

        let c = &self.custom;
        self.custom_solution()?;
        window("custom", c.x_min, c.x_max, c.dx)?;
        finite("custom.t", c.t)?;
        positive("custom.dt", c.dt)?;
        positive("custom.tolerance", c.tolerance)?;
        for x in &c.trajectory_starts {
            if !(c.x_min..=c.x_max).contains(x) {
                return Err(CliError::invalid(
                    "custom.trajectory_starts",
                    format!("{x} lies outside the window"),
                ));
            }
        }
        positive("custom.trajectory_duration", c.trajectory_duration)?;
        positive("custom.trajectory_dt", c.trajectory_dt)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config> {
        Config::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse("scenario = \"ho-shell\"\n").unwrap();
        assert_eq!(cfg.scenario, Some(ScenarioName::HoShell));
        assert_eq!(cfg.params(), PhysicalParams::natural());
        assert_eq!(cfg.ho_shell, HoShell::default());
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn beta_override_sets_the_expected_acceleration() {
        let cfg = parse("[airy]\nbeta = 2.0\n").unwrap();
        assert_eq!(cfg.expected_airy_acceleration(), 4.0);
        let cfg = parse("[airy]\nbeta = 1.0\n[physics]\nmass = 2.0\n").unwrap();
        assert_eq!(cfg.expected_airy_acceleration(), 0.125);
    }

    #[test]
    fn negative_mass_names_the_field() {
        let err = parse("[physics]\nmass = -1.0\n").unwrap_err();
        assert!(
            matches!(&err, CliError::Invalid { field, .. } if field == "physics.mass"),
            "{err}"
        );
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let err = parse("seed = 1\n\n[physics]\nhbar = = 2\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 4, .. }), "{err}");
        let err = parse("[plane]\nk = 2.0\nwavelength = 3.0\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = parse("scenario = \"nope\"\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn family_members_use_coefficient_lists() {
        let cfg = parse("[[family.members]]\na = [1.0]\nb = [3.0, 0.5]\nmu = [0.0, -0.5]\n").unwrap();
        let m = &cfg.family.members[0];
        assert_eq!(m.b.coeffs(), &[3.0, 0.5]);
        assert_eq!(m.c.coeffs(), &[] as &[f64]);
    }

    #[test]
    fn semantic_checks() {
        assert!(parse("[plane]\nk = 1.5\n").is_err());
        assert!(parse("[airy_dynamic]\nn = 1000\n").is_err());
        assert!(parse("[family]\nx_min = 0.5\n").is_err());
        assert!(parse("[custom]\nsolution = \"ho:-1\"\n").is_err());
        assert!(parse("[morse]\ndepth = 0.1\n").is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for n in ScenarioName::ALL {
            assert_eq!(n.as_str().parse::<ScenarioName>().unwrap(), n);
        }
        assert!("airy".parse::<ScenarioName>().is_err());
    }
}
