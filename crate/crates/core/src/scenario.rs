//! Scenario configuration: the structured description a run is built from,
//! plus the built-in presets.

use serde::{Deserialize, Serialize};

use crate::decoherence::{Surface, VibronicModel, H2_REDUCED_MASS};
use crate::error::{Error, Result};
use crate::geometry::{GeometrySpec, NucleusSpec, Vec3};
use crate::grid::GridLevel;
use crate::manybody::{Scheme, SpinCoupling};
use crate::pipeline::{InitialSpec, PartitionChoice, SystemOptions, TimeSpec};
use crate::subsystem::NuclearShare;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dynamics,
    Decoherence,
    Limits,
    NaiveDemo,
    IntegralsOnly,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Dynamics => "dynamics",
            Mode::Decoherence => "decoherence",
            Mode::Limits => "limits",
            Mode::NaiveDemo => "naive_demo",
            Mode::IntegralsOnly => "integrals_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub geometry: GeometryConfig,
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub manybody: ManyBodyConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoherence: Option<DecoherenceConfig>,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_basis() -> String {
    "min-s".into()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// `h2`, `h2_dimer` or `h_atom`; ignored when `nuclei` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    /// Dimer layout: `collinear` (default, bonds on the separation axis) or
    /// `parallel` (bonds perpendicular to it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nuclei: Option<Vec<NucleusSpec>>,
}

impl GeometryConfig {
    pub fn h2(r: f64) -> GeometryConfig {
        GeometryConfig {
            preset: Some("h2".into()),
            bond: Some(r),
            ..Default::default()
        }
    }

    pub fn h2_dimer(bond: f64, separation: f64) -> GeometryConfig {
        GeometryConfig {
            preset: Some("h2_dimer".into()),
            bond: Some(bond),
            separation: Some(separation),
            ..Default::default()
        }
    }

    /// Same geometry with a different fragment separation.
    pub fn with_separation(&self, separation: f64) -> GeometryConfig {
        GeometryConfig {
            separation: Some(separation),
            ..self.clone()
        }
    }

    pub fn to_spec(&self) -> Result<GeometrySpec> {
        if let Some(nuclei) = &self.nuclei {
            return Ok(GeometrySpec { nuclei: nuclei.clone() });
        }
        let preset = self
            .preset
            .as_deref()
            .ok_or_else(|| Error::Config("geometry needs either `preset` or `nuclei`".into()))?;
        let positive = |name: &str, v: Option<f64>, default: Option<f64>| -> Result<f64> {
            let v = v.or(default).ok_or_else(|| Error::Config(format!("geometry preset `{preset}` needs `{name}`")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("geometry `{name}` must be positive; got {v}")));
            }
            Ok(v)
        };
        if self.orientation.is_some() && preset != "h2_dimer" {
            return Err(Error::Config("`orientation` only applies to the h2_dimer preset".into()));
        }
        match preset {
            "h2" => Ok(GeometrySpec::h2(positive("bond", self.bond, Some(1.4))?)),
            "h2_dimer" => {
                let bond = positive("bond", self.bond, Some(1.4))?;
                let d = positive("separation", self.separation, None)?;
                match self.orientation.as_deref().unwrap_or("collinear") {
                    "collinear" => Ok(GeometrySpec::h2_dimer_collinear(bond, d)),
                    "parallel" => Ok(GeometrySpec::h2_dimer(bond, d)),
                    o => Err(Error::Config(format!("unknown dimer orientation `{o}` (expected collinear or parallel)"))),
                }
            }
            "h_atom" => Ok(GeometrySpec::hydrogens(&[[0.0; 3]], &["A"])),
            _ => Err(Error::Config(format!("unknown geometry preset `{preset}` (expected h2, h2_dimer or h_atom)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    /// `voronoi` (bisector plane for two regions) or `plane`.
    #[serde(default = "default_rule")]
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

fn default_rule() -> String {
    "voronoi".into()
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            rule: default_rule(),
            normal: None,
            offset: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Tier(String),
    Explicit { n_radial: usize, n_theta: usize, tau: f64 },
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::Tier("default".into())
    }
}

impl GridConfig {
    pub fn level(&self) -> Result<GridLevel> {
        match self {
            GridConfig::Tier(s) => GridLevel::parse(s).ok_or_else(|| Error::Config(format!("unknown grid tier `{s}` (expected coarse, default or fine)"))),
            &GridConfig::Explicit { n_radial, n_theta, tau } => {
                if n_radial < 4 || n_theta < 2 || !(tau > 0.0) {
                    return Err(Error::Config("explicit grid needs n_radial >= 4, n_theta >= 2 and tau > 0".into()));
                }
                Ok(GridLevel::Explicit { n_radial, n_theta, tau })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManyBodyConfig {
    #[serde(default = "default_scheme")]
    pub scheme: String,
    /// `lowdin` or `scf`; defaults to `lowdin` for full CI and `scf` for CIS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<String>,
    #[serde(default = "default_share")]
    pub nuclear_repulsion: String,
    #[serde(default = "yes")]
    pub close_sum_rules: bool,
}

fn default_scheme() -> String {
    "fullci_2e".into()
}

fn default_share() -> String {
    "partitioned".into()
}

fn yes() -> bool {
    true
}

impl Default for ManyBodyConfig {
    fn default() -> Self {
        ManyBodyConfig {
            scheme: default_scheme(),
            orbitals: None,
            nuclear_repulsion: default_share(),
            close_sum_rules: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// `1sA_2pzB`, `gs_plus_e1` or `gs_plus_e3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default = "default_spin")]
    pub spin: String,
    /// Explicit superposition `[index, re, im]` over singlet eigenstates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<[f64; 3]>>,
}

fn default_spin() -> String {
    "singlet".into()
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            preset: None,
            spin: default_spin(),
            weights: None,
        }
    }
}

pub const INITIAL_PRESETS: [(&str, &str); 3] = [
    ("1sA_2pzB", "two-electron product of 1s on region A and 2p_z on region B"),
    ("gs_plus_e1", "(ground + first excited singlet) / sqrt 2"),
    ("gs_plus_e3", "(ground + third excited singlet) / sqrt 2"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_periods")]
    pub periods: f64,
}

fn default_samples() -> usize {
    crate::dynamics::DEFAULT_SAMPLES
}

fn default_periods() -> f64 {
    crate::dynamics::DEFAULT_PERIODS
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            samples: default_samples(),
            t_max: None,
            periods: default_periods(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub r_eq: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_mc_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_mass")]
    pub reduced_mass: f64,
    #[serde(default = "default_ground")]
    pub ground: SurfaceConfig,
    #[serde(default = "default_excited")]
    pub excited: SurfaceConfig,
    #[serde(default = "default_decoherence_t_max")]
    pub t_max: f64,
}

fn default_sigma() -> f64 {
    1e-6
}
fn default_mc_samples() -> usize {
    10_000
}
fn default_nodes() -> usize {
    16
}
fn default_mass() -> f64 {
    H2_REDUCED_MASS
}
fn default_ground() -> SurfaceConfig {
    let m = VibronicModel::h2_default();
    SurfaceConfig {
        r_eq: m.ground.r_eq,
        nu: m.ground.nu,
    }
}
fn default_excited() -> SurfaceConfig {
    let m = VibronicModel::h2_default();
    SurfaceConfig {
        r_eq: m.excited.r_eq,
        nu: m.excited.nu,
    }
}
fn default_decoherence_t_max() -> f64 {
    8e6
}

impl Default for DecoherenceConfig {
    fn default() -> Self {
        DecoherenceConfig {
            sigma: default_sigma(),
            samples: default_mc_samples(),
            seed: 0,
            nodes: default_nodes(),
            reduced_mass: default_mass(),
            ground: default_ground(),
            excited: default_excited(),
            t_max: default_decoherence_t_max(),
        }
    }
}

impl DecoherenceConfig {
    pub fn model(&self) -> Result<VibronicModel> {
        for (name, s) in [("ground", self.ground), ("excited", self.excited)] {
            if !(s.r_eq > 0.0 && s.nu > 0.0) {
                return Err(Error::Config(format!("{name} surface needs positive r_eq and nu")));
            }
        }
        if !(self.reduced_mass > 0.0) || self.nodes < 2 || self.nodes > 64 {
            return Err(Error::Config("decoherence needs reduced_mass > 0 and 2 <= nodes <= 64".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!("sigma must be non-negative; got {}", self.sigma)));
        }
        if self.samples < 2 {
            return Err(Error::Config("decoherence needs at least 2 Monte Carlo samples".into()));
        }
        Ok(VibronicModel {
            ground: Surface {
                r_eq: self.ground.r_eq,
                nu: self.ground.nu,
            },
            excited: Surface {
                r_eq: self.excited.r_eq,
                nu: self.excited.nu,
            },
            reduced_mass: self.reduced_mass,
            nodes: self.nodes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    /// Separations for the closed-shell fragment table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub dump_integrals: bool,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            dump_integrals: false,
        }
    }
}

impl ScenarioConfig {
    /// Minimal config for a mode and geometry; everything else defaulted.
    pub fn new(mode: Mode, geometry: GeometryConfig, basis: &str) -> ScenarioConfig {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            mode,
            geometry,
            basis: basis.into(),
            partition: PartitionConfig::default(),
            grid: GridConfig::default(),
            manybody: ManyBodyConfig::default(),
            initial: InitialConfig::default(),
            time: TimeConfig::default(),
            decoherence: None,
            limits: LimitsConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn scheme(&self) -> Result<Scheme> {
        Scheme::parse(&self.manybody.scheme)
    }

    /// Checks cross-field consistency and converts to pipeline options.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.geometry.to_spec()?;
        self.system_options()?;
        if self.mode == Mode::Dynamics {
            self.initial_spec()?;
            self.time_spec()?;
        }
        if self.mode == Mode::Decoherence {
            self.decoherence.clone().unwrap_or_default().model()?;
            if self.geometry.preset.as_deref() != Some("h2") || self.geometry.nuclei.is_some() {
                return Err(Error::Config("decoherence mode needs the `h2` geometry preset".into()));
            }
        }
        if let Some(s) = &self.limits.separations {
            if s.is_empty() || s.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::Config("limits.separations must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn system_options(&self) -> Result<SystemOptions> {
        let scheme = self.scheme()?;
        let orbitals = match self.manybody.orbitals.as_deref() {
            None => None,
            Some("lowdin") => Some(crate::manybody::MoKind::Lowdin),
            Some("scf") => Some(crate::manybody::MoKind::Scf),
            Some(o) => return Err(Error::Config(format!("unknown orbitals `{o}` (expected lowdin or scf)"))),
        };
        let partition = match self.partition.rule.as_str() {
            "voronoi" => {
                if self.partition.normal.is_some() || self.partition.offset.is_some() {
                    return Err(Error::Config("partition normal/offset need rule = \"plane\"".into()));
                }
                PartitionChoice::Auto
            }
            "plane" => {
                let (Some(n), Some(c)) = (self.partition.normal, self.partition.offset) else {
                    return Err(Error::Config("plane partition needs `normal` and `offset`".into()));
                };
                let n = Vec3::from(n);
                if !(n.norm() > 0.0) {
                    return Err(Error::Config("plane normal must be non-zero".into()));
                }
                PartitionChoice::Plane { normal: n, offset: c }
            }
            r => return Err(Error::Config(format!("unknown partition rule `{r}` (expected voronoi or plane)"))),
        };
        Ok(SystemOptions {
            basis: self.basis.clone(),
            partition,
            grid: self.grid.level()?,
            scheme,
            orbitals,
            nuclear_share: NuclearShare::parse(&self.manybody.nuclear_repulsion)?,
            close_sum_rules: self.manybody.close_sum_rules,
        })
    }

    pub fn initial_spec(&self) -> Result<InitialSpec> {
        let spin = SpinCoupling::parse(&self.initial.spin)?;
        match (&self.initial.preset, &self.initial.weights) {
            (Some(_), Some(_)) => Err(Error::Config("initial state takes either `preset` or `weights`, not both".into())),
            (None, None) => Err(Error::Config("initial state needs `preset` or `weights`".into())),
            (Some(p), None) => match p.as_str() {
                "1sA_2pzB" => Ok(InitialSpec::Product { spin }),
                "gs_plus_e1" => Ok(InitialSpec::pair(0, 1)),
                "gs_plus_e3" => Ok(InitialSpec::pair(0, 3)),
                _ => Err(Error::Config(format!(
                    "unknown initial preset `{p}` (expected one of {})",
                    INITIAL_PRESETS.map(|x| x.0).join(", ")
                ))),
            },
            (None, Some(w)) => {
                if w.is_empty() {
                    return Err(Error::Config("initial weights are empty".into()));
                }
                let mut out = Vec::new();
                for x in w {
                    if x[0] < 0.0 || x[0].fract() != 0.0 {
                        return Err(Error::Config(format!("weight index {} is not a non-negative integer", x[0])));
                    }
                    out.push((x[0] as usize, num_complex::Complex64::new(x[1], x[2])));
                }
                Ok(InitialSpec::Superposition(out))
            }
        }
    }

    pub fn time_spec(&self) -> Result<TimeSpec> {
        let t = &self.time;
        if t.samples < 2 {
            return Err(Error::Config("time.samples must be at least 2".into()));
        }
        if let Some(m) = t.t_max {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Config("time.t_max must be positive".into()));
            }
        }
        if !(t.periods > 0.0) {
            return Err(Error::Config("time.periods must be positive".into()));
        }
        Ok(TimeSpec {
            samples: t.samples,
            t_max: t.t_max,
            periods: t.periods,
        })
    }
}

/// A named built-in scenario.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub config: ScenarioConfig,
}

/// Built-in scenarios: the four-panel dynamics series for both H-atom and
/// H₂–H₂ systems, the dephasing run, the limit checks and the naive demo.
pub fn builtin_presets() -> Vec<Preset> {
    let mut out = Vec::new();
    let panels = ["a", "b", "c", "d"];
    for (p, r) in panels.iter().zip([1.0, 1.4, 1.8, 10.0]) {
        let mut c = ScenarioConfig::new(Mode::Dynamics, GeometryConfig::h2(r), "sp");
        c.initial.preset = Some("1sA_2pzB".into());
        out.push(Preset {
            name: format!("h2_1sA_2pzB_{p}"),
            description: format!("H2 at R = {r} in the 1s_A 2p_zB singlet product state (sp basis, full CI)"),
            config: c,
        });
    }
    for (p, r) in panels.iter().zip([1.0, 1.4, 1.8, 10.0]) {
        let mut c = ScenarioConfig::new(Mode::Dynamics, GeometryConfig::h2(r), "min-s");
        c.initial.preset = Some("gs_plus_e1".into());
        out.push(Preset {
            name: format!("h2_gs_plus_e1_{p}"),
            description: format!("H2 at R = {r} in (ground + first excited singlet)/sqrt 2 (minimal basis, full CI)"),
            config: c,
        });
    }
    for (state, k) in [("gs_plus_e1", 1), ("gs_plus_e3", 3)] {
        for (p, d) in panels.iter().zip([2.0, 3.0, 5.0, 10.0]) {
            let mut c = ScenarioConfig::new(Mode::Dynamics, GeometryConfig::h2_dimer(1.4, d), "6-31g");
            c.manybody.scheme = "cis".into();
            c.initial.preset = Some(state.into());
            out.push(Preset {
                name: format!("h2_dimer_{state}_{p}"),
                description: format!("H2-H2 at separation {d} in (ground + CIS state {k})/sqrt 2 (6-31G, RHF + CIS)"),
                config: c,
            });
        }
    }
    let mut c = ScenarioConfig::new(Mode::Decoherence, GeometryConfig::h2(1.4), "min-s");
    c.decoherence = Some(DecoherenceConfig::default());
    out.push(Preset {
        name: "h2_decoherence".into(),
        description: "Gaussian dephasing of the H2 ground + first excited superposition (sigma = 1e-6 hartree)".into(),
        config: c,
    });
    let c = ScenarioConfig::new(Mode::Limits, GeometryConfig::h2(20.0), "sp");
    out.push(Preset {
        name: "h_pair_couplings".into(),
        description: "Coulomb/exchange couplings of two H atoms at R = 20 with the site-energy split check".into(),
        config: c,
    });
    let mut c = ScenarioConfig::new(Mode::Limits, GeometryConfig::h2_dimer(1.4, 20.0), "6-31g");
    c.manybody.scheme = "cis".into();
    c.limits.separations = Some(vec![5.0, 10.0, 20.0]);
    out.push(Preset {
        name: "h2_dimer_limits".into(),
        description: "closed-shell fragment decomposition E_A = T_A + V_AA + V_AB/2 over separations".into(),
        config: c,
    });
    let c = ScenarioConfig::new(Mode::NaiveDemo, GeometryConfig::h2(20.0), "min-s");
    out.push(Preset {
        name: "naive_demo".into(),
        description: "electron-labeled site energies versus the subsystem Hamiltonian at R = 20".into(),
        config: c,
    });
    let c = ScenarioConfig::new(Mode::IntegralsOnly, GeometryConfig::h2(1.4), "min-s");
    out.push(Preset {
        name: "h2_integrals".into(),
        description: "analytic and region-restricted integral tables for H2".into(),
        config: c,
    });
    out
}
