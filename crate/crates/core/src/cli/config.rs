//! Run configuration. Every dimensioned key carries its unit in the name.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bloch::{BlochConfig, Window};
use crate::dynamics::{Scenario, ScenarioParams};
use crate::geometry::{Anchor, LatticeSpec};
use crate::greens::Polarization;
use crate::hamiltonian::ImpurityLevels;
use crate::spectra::{ClassifyConfig, GapWindow};
use crate::{Error, Result};

/// Textual polarization: `pi`, `x`, `y`, `theta:<radians>`, `sigma+`, `sigma-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolSpec {
    Pi,
    X,
    Y,
    Theta(f64),
    SigmaPlus,
    SigmaMinus,
}

impl PolSpec {
    pub fn polarization(&self) -> Polarization {
        match *self {
            PolSpec::Pi => Polarization::pi(),
            PolSpec::X => Polarization::x(),
            PolSpec::Y => Polarization::y(),
            PolSpec::Theta(t) => Polarization::in_plane(t),
            PolSpec::SigmaPlus => Polarization::sigma_plus(),
            PolSpec::SigmaMinus => Polarization::sigma_minus(),
        }
    }

    /// Short tag used in job keys and file names.
    pub fn tag(&self) -> String {
        match *self {
            PolSpec::Pi => "pi".into(),
            PolSpec::X => "x".into(),
            PolSpec::Y => "y".into(),
            PolSpec::Theta(t) => format!("theta{:.4}", t),
            PolSpec::SigmaPlus => "sigma_plus".into(),
            PolSpec::SigmaMinus => "sigma_minus".into(),
        }
    }
}

impl FromStr for PolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "pi" | "z" => return Ok(PolSpec::Pi),
            "x" => return Ok(PolSpec::X),
            "y" => return Ok(PolSpec::Y),
            "sigma+" | "sigma_plus" => return Ok(PolSpec::SigmaPlus),
            "sigma-" | "sigma\u{2212}" | "sigma_minus" => return Ok(PolSpec::SigmaMinus),
            _ => {}
        }
        if let Some(v) = t.strip_prefix("theta:") {
            let v = v.trim();
            let value = match v.strip_suffix("pi") {
                Some(frac) => parse_pi_fraction(frac.trim())? * PI,
                None => v
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad polarization angle `{v}`")))?,
            };
            return Ok(PolSpec::Theta(value));
        }
        Err(Error::Config(format!(
            "unknown polarization `{s}` (expected pi, x, y, theta:<radians>, sigma+, sigma-)"
        )))
    }
}

/// Parses `""`, `"0.5"`, `"4/9"` as a multiple of pi.
fn parse_pi_fraction(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("bad angle fraction `{s}pi`"));
    if s.is_empty() {
        return Ok(1.0);
    }
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = if a.trim().is_empty() { 1.0 } else { a.trim().parse().map_err(|_| bad())? };
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.trim_end_matches('*').parse().map_err(|_| bad()),
    }
}

impl fmt::Display for PolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PolSpec::Pi => f.write_str("pi"),
            PolSpec::X => f.write_str("x"),
            PolSpec::Y => f.write_str("y"),
            PolSpec::Theta(t) => write!(f, "theta:{t}"),
            PolSpec::SigmaPlus => f.write_str("sigma+"),
            PolSpec::SigmaMinus => f.write_str("sigma-"),
        }
    }
}

impl Serialize for PolSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PolSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub d_lambda0: f64,
    pub delta: f64,
    pub cells_per_side: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            d_lambda0: 0.1,
            delta: 0.0,
            cells_per_side: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub polarization: PolSpec,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            polarization: PolSpec::Pi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelsKind {
    TwoLevel,
    VType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpuritySection {
    pub anchor: Anchor,
    pub height_d: f64,
    pub detuning_gamma0: f64,
    pub linewidth_gamma0: f64,
    pub levels: LevelsKind,
    /// Two-level transition polarization.
    pub polarization: PolSpec,
    /// V-type Zeeman shift `mu B`.
    pub zeeman_gamma0: f64,
}

impl Default for ImpuritySection {
    fn default() -> Self {
        Self {
            anchor: Anchor::CentralHexagon,
            height_d: 0.4,
            detuning_gamma0: -3.06,
            linewidth_gamma0: 0.002,
            levels: LevelsKind::TwoLevel,
            polarization: PolSpec::X,
            zeeman_gamma0: 0.0,
        }
    }
}

impl ImpuritySection {
    pub fn levels(&self) -> ImpurityLevels {
        match self.levels {
            LevelsKind::TwoLevel => ImpurityLevels::TwoLevel {
                polarization: self.polarization.polarization(),
            },
            LevelsKind::VType => ImpurityLevels::VType {
                zeeman: self.zeeman_gamma0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub corner_radius_d: f64,
    pub corner_threshold: f64,
    pub edge_strip_width_d: f64,
    pub edge_threshold: f64,
    pub impurity_threshold: f64,
    pub min_gap_fraction: f64,
    /// Fixed gap window; both ends must be given to override the automatic one.
    pub gap_lower_gamma0: Option<f64>,
    pub gap_upper_gamma0: Option<f64>,
}

impl Default for ClassifySection {
    fn default() -> Self {
        let c = ClassifyConfig::default();
        Self {
            corner_radius_d: c.corner_radius,
            corner_threshold: c.corner_threshold,
            edge_strip_width_d: c.edge_strip_width,
            edge_threshold: c.edge_threshold,
            impurity_threshold: c.impurity_threshold,
            min_gap_fraction: c.min_gap_fraction,
            gap_lower_gamma0: None,
            gap_upper_gamma0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaSweepSection {
    /// Grid over `[0, pi]`, both ends included.
    pub points: usize,
}

impl Default for ThetaSweepSection {
    fn default() -> Self {
        Self { points: 181 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaSweepSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for DeltaSweepSection {
    fn default() -> Self {
        Self {
            min: -0.6,
            max: 0.6,
            points: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderSection {
    /// Displacement magnitudes as fractions of `R_a`.
    pub kappas: Vec<f64>,
    pub realizations: usize,
}

impl Default for DisorderSection {
    fn default() -> Self {
        Self {
            kappas: (0..=20).map(|i| i as f64 / 100.0).collect(),
            realizations: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlochSection {
    pub points_per_segment: usize,
    pub sum_radius_d: f64,
    pub taper_fraction: f64,
    pub window: Window,
    /// Recompute the path at twice the radius and report the change.
    pub convergence_check: bool,
}

impl Default for BlochSection {
    fn default() -> Self {
        let b = BlochConfig::default();
        Self {
            points_per_segment: 40,
            sum_radius_d: b.sum_radius,
            taper_fraction: b.taper_fraction,
            window: b.window,
            convergence_check: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PngMode {
    None,
    Last,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    /// Named preset; when absent the lattice and impurity sections are used.
    pub scenario: Option<String>,
    pub t_end_gamma0: Option<f64>,
    pub steps: Option<usize>,
    pub png: PngMode,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            scenario: None,
            t_end_gamma0: None,
            steps: None,
            png: PngMode::Last,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            threads: 0,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub lattice: LatticeSection,
    pub array: ArraySection,
    pub impurity: Option<ImpuritySection>,
    pub classify: ClassifySection,
    pub theta_sweep: ThetaSweepSection,
    pub delta_sweep: DeltaSweepSection,
    pub disorder: DisorderSection,
    pub bloch: BlochSection,
    pub dynamics: DynamicsSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.lattice.d_lambda0, self.lattice.delta, self.lattice.cells_per_side)
    }

    pub fn classify(&self) -> Result<ClassifyConfig> {
        let c = &self.classify;
        let gap = match (c.gap_lower_gamma0, c.gap_upper_gamma0) {
            (Some(lower), Some(upper)) if lower < upper => GapWindow::Fixed { lower, upper },
            (None, None) => GapWindow::Auto,
            _ => {
                return Err(Error::Config(
                    "classify.gap_lower_gamma0 and gap_upper_gamma0 must both be set, lower < upper".into(),
                ))
            }
        };
        Ok(ClassifyConfig {
            corner_radius: c.corner_radius_d,
            corner_threshold: c.corner_threshold,
            edge_strip_width: c.edge_strip_width_d,
            edge_threshold: c.edge_threshold,
            impurity_threshold: c.impurity_threshold,
            gap,
            min_gap_fraction: c.min_gap_fraction,
        })
    }

    pub fn bloch(&self) -> BlochConfig {
        BlochConfig {
            sum_radius: self.bloch.sum_radius_d,
            taper_fraction: self.bloch.taper_fraction,
            window: self.bloch.window,
        }
    }

    pub fn deltas(&self) -> Result<Vec<f64>> {
        let s = &self.delta_sweep;
        if s.points == 0 || !(s.min <= s.max) {
            return Err(Error::Config(format!(
                "delta_sweep needs points >= 1 and min <= max (got {} points, [{}, {}])",
                s.points, s.min, s.max
            )));
        }
        if s.points == 1 {
            return Ok(vec![s.min]);
        }
        Ok((0..s.points)
            .map(|i| s.min + (s.max - s.min) * i as f64 / (s.points - 1) as f64)
            .collect())
    }

    /// Emission parameters: a named preset with this config's dynamics
    /// overrides, or the lattice and impurity sections.
    pub fn emission(&self) -> Result<(Option<Scenario>, ScenarioParams)> {
        let dyn_ = &self.dynamics;
        if let Some(name) = &dyn_.scenario {
            let scenario: Scenario = name.parse()?;
            let mut p = scenario.params();
            if let Some(t) = dyn_.t_end_gamma0 {
                p.t_end = t;
            }
            if let Some(n) = dyn_.steps {
                p.steps = n;
            }
            return Ok((Some(scenario), p));
        }
        let imp = self.impurity.as_ref().ok_or_else(|| {
            Error::Config("dynamics needs either dynamics.scenario or an [impurity] section".into())
        })?;
        Ok((
            None,
            ScenarioParams {
                d: self.lattice.d_lambda0,
                delta: self.lattice.delta,
                cells_per_side: self.lattice.cells_per_side,
                array_polarization: self.array.polarization.polarization(),
                anchor: imp.anchor,
                height: imp.height_d,
                detuning: imp.detuning_gamma0,
                linewidth: imp.linewidth_gamma0,
                levels: imp.levels(),
                t_end: dyn_.t_end_gamma0.unwrap_or(0.3),
                steps: dyn_.steps.unwrap_or(30),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_parameters() {
        let c = RunConfig::default();
        assert_eq!(c.lattice.d_lambda0, 0.1);
        assert_eq!(c.lattice.delta, 0.0);
        let imp = ImpuritySection::default();
        assert_eq!(imp.height_d, 0.4);
        assert_eq!(imp.linewidth_gamma0, 0.002);
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.impurity = Some(ImpuritySection::default());
        c.array.polarization = PolSpec::Theta(0.5);
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn polarization_forms() {
        assert_eq!("sigma+".parse::<PolSpec>().unwrap(), PolSpec::SigmaPlus);
        assert_eq!("sigma\u{2212}".parse::<PolSpec>().unwrap(), PolSpec::SigmaMinus);
        assert_eq!("theta:0.25".parse::<PolSpec>().unwrap(), PolSpec::Theta(0.25));
        let PolSpec::Theta(t) = "theta:4/9pi".parse::<PolSpec>().unwrap() else {
            panic!()
        };
        assert!((t - 4.0 * PI / 9.0).abs() < 1e-15);
        assert!("circular".parse::<PolSpec>().is_err());
    }

    #[test]
    fn errors_name_line_and_field() {
        let err = RunConfig::from_toml("[lattice]\nd_lambda0 = 0.1\ncells = 4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("cells"), "{msg}");
        let err = RunConfig::from_toml("[lattice]\ndelta = \"big\"\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
