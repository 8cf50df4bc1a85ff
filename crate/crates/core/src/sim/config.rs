//! TOML run configuration.
//!
//! The file is deserialized into a raw schema that rejects unknown keys,
//! then resolved against presets and defaults into a [`SimulationConfig`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::assembly::MaterialProperties;
use crate::boundary::{
    experiment_boundaries, BoundaryCondition, BoundarySpec, ConvectionMode, NaturalReference,
};
use crate::error::{Error, Result};
use crate::mesh::{Face, Point3};
use crate::par::Execution;
use crate::sim::materials::{material_from_water_content, preset, Tissue};
use crate::sim::snapshot::SnapshotRegion;
use crate::solver::{SolverMethod, SolverSettings};
use crate::source::{GaussianNormalization, LaserParams, Schedule, CO2_WAVELENGTH_CM};

/// Default probe positions on the irradiated surface, cm from the beam axis.
pub const DEFAULT_PROBES: [[f64; 2]; 3] = [[0.0, 0.0], [-0.25, 0.25], [0.25, -0.25]];

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    /// Element counts along x, y, z.
    pub dims: [usize; 3],
    /// Box size, cm.
    pub extent: [f64; 3],
    /// Corner with the smallest coordinates; `origin[2]` is the irradiated surface.
    pub origin: Point3,
}

impl MeshSpec {
    /// Box whose top surface is centered on `(0, 0)` at `z = 0`.
    pub fn centered(dims: [usize; 3], extent: [f64; 3]) -> Self {
        MeshSpec {
            dims,
            extent,
            origin: [-0.5 * extent[0], -0.5 * extent[1], 0.0],
        }
    }

    pub fn top_center(&self) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * self.extent[0],
            self.origin[1] + 0.5 * self.extent[1],
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    /// Where files go; `None` keeps everything in memory.
    pub dir: Option<PathBuf>,
    /// Record probes every this many steps (the final step is always kept).
    pub probe_every: usize,
    /// Write a field snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub snapshot_region: SnapshotRegion,
    pub vtk: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            dir: None,
            probe_every: 1,
            snapshot_every: 0,
            snapshot_region: SnapshotRegion::Top,
            vtk: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Simulated time, s.
    pub duration: f64,
    /// Uniform initial temperature, °C.
    pub initial_temperature: f64,
    pub mesh: MeshSpec,
    pub material: MaterialProperties,
    pub boundary: BoundarySpec,
    pub laser: LaserParams,
    pub solver: SolverSettings,
    /// Probe positions `(x, y)` on the top surface, cm.
    pub probes: Vec<[f64; 2]>,
    pub output: OutputSettings,
}

impl SimulationConfig {
    /// Bench-top protocol: 15 s on, 15 s off, bottom heat sink at the
    /// initial temperature, natural convection elsewhere.
    pub fn bench(tissue: Tissue, mesh: MeshSpec, power: f64, waist: f64, focal_distance: f64) -> Self {
        let material = preset(tissue);
        let initial_temperature = material.t_inf;
        SimulationConfig {
            duration: 30.0,
            initial_temperature,
            boundary: experiment_boundaries(&material, initial_temperature),
            laser: LaserParams {
                power,
                wavelength: CO2_WAVELENGTH_CM,
                waist,
                focal_distance,
                center: mesh.top_center(),
                schedule: Schedule::new(vec![(0.0, 15.0)]).expect("static schedule"),
                normalization: GaussianNormalization::Linear,
            },
            mesh,
            material,
            solver: SolverSettings::default(),
            probes: DEFAULT_PROBES.to_vec(),
            output: OutputSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::validation(
                "duration",
                format!("must be > 0, got {}", self.duration),
            ));
        }
        if !self.initial_temperature.is_finite() {
            return Err(Error::validation("initial_temperature", "must be finite"));
        }
        let m = &self.mesh;
        if m.dims.contains(&0) {
            return Err(Error::validation(
                "mesh.dims",
                format!("element counts must be >= 1, got {:?}", m.dims),
            ));
        }
        if m.extent.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::validation(
                "mesh.extent",
                format!("must be > 0, got {:?}", m.extent),
            ));
        }
        if m.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::validation("mesh.origin", "must be finite"));
        }
        self.material.validate()?;
        self.boundary.validate()?;
        self.laser.validate()?;
        self.solver.validate()?;
        for (i, p) in self.probes.iter().enumerate() {
            let inside = (0..2).all(|a| {
                p[a] >= m.origin[a] - 1e-12 && p[a] <= m.origin[a] + m.extent[a] + 1e-12
            });
            if !inside {
                return Err(Error::validation(
                    format!("probes[{i}]"),
                    format!(
                        "({}, {}) lies outside the top surface [{}, {}] x [{}, {}]",
                        p[0],
                        p[1],
                        m.origin[0],
                        m.origin[0] + m.extent[0],
                        m.origin[1],
                        m.origin[1] + m.extent[1]
                    ),
                ));
            }
        }
        if self.output.probe_every == 0 {
            return Err(Error::validation("output.probe_every", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of time steps, `ceil(duration / dt)`.
    pub fn step_count(&self) -> usize {
        let n = self.duration / self.solver.dt;
        ((n - 1e-9).ceil() as usize).max(1)
    }
}

// ---------------------------------------------------------------- raw schema

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    duration: f64,
    initial_temperature: Option<f64>,
    probes: Option<Vec<[f64; 2]>>,
    mesh: RawMesh,
    material: RawMaterial,
    #[serde(default)]
    boundary: RawBoundary,
    laser: RawLaser,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    dims: [usize; 3],
    extent: [f64; 3],
    origin: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    preset: Option<String>,
    water_content: Option<f64>,
    density: Option<f64>,
    mu_a: Option<f64>,
    c_v: Option<f64>,
    kappa: Option<f64>,
    h: Option<f64>,
    t_inf: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawConvectionMode {
    Constant,
    #[default]
    Natural,
}

impl From<RawConvectionMode> for ConvectionMode {
    fn from(m: RawConvectionMode) -> Self {
        match m {
            RawConvectionMode::Constant => ConvectionMode::ConstantH,
            RawConvectionMode::Natural => ConvectionMode::Natural,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    #[serde(default)]
    convection: RawConvectionMode,
    #[serde(default)]
    scale_at_incidence_point: bool,
    sink_temperature: Option<f64>,
    #[serde(default)]
    faces: BTreeMap<String, RawFace>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawFace {
    HeatSink {
        temperature: Option<f64>,
    },
    Flux {
        q: f64,
    },
    Convection {
        h: Option<f64>,
        t_inf: Option<f64>,
        mode: Option<RawConvectionMode>,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawNormalization {
    #[default]
    Linear,
    Standard,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaser {
    power: f64,
    waist: f64,
    #[serde(default)]
    focal_distance: f64,
    wavelength: Option<f64>,
    center: Option<[f64; 2]>,
    schedule: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    normalization: RawNormalization,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawMethod {
    #[default]
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawExecution {
    Sequential,
    Parallel,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    dt: Option<f64>,
    #[serde(default)]
    method: RawMethod,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    execution: Option<RawExecution>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawRegion {
    #[default]
    Top,
    Volume,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    probe_every: Option<usize>,
    #[serde(default)]
    snapshot_every: usize,
    #[serde(default)]
    snapshot_region: RawRegion,
    #[serde(default)]
    vtk: bool,
}

// ---------------------------------------------------------------- resolution

fn resolve_material(raw: &RawMaterial) -> Result<MaterialProperties> {
    let base = raw
        .preset
        .as_deref()
        .map(|name| name.parse::<Tissue>().map(preset))
        .transpose()?;
    let water = match (raw.water_content, raw.density) {
        (Some(w), Some(rho)) => Some(material_from_water_content(w, rho)?),
        (Some(_), None) => {
            return Err(Error::validation(
                "material.density",
                "required together with material.water_content",
            ))
        }
        (None, Some(_)) => {
            return Err(Error::validation(
                "material.water_content",
                "required together with material.density",
            ))
        }
        (None, None) => None,
    };
    if water.is_some() {
        for (field, set) in [("material.c_v", raw.c_v.is_some()), ("material.kappa", raw.kappa.is_some())] {
            if set {
                return Err(Error::validation(
                    field,
                    "conflicts with material.water_content; give one or the other",
                ));
            }
        }
    }
    let pick = |field: &str, explicit: Option<f64>, derived: Option<f64>, preset: Option<f64>| {
        explicit.or(derived).or(preset).ok_or_else(|| {
            Error::validation(
                format!("material.{field}"),
                "missing; set it directly or choose a preset",
            )
        })
    };
    let material = MaterialProperties {
        mu_a: pick("mu_a", raw.mu_a, None, base.map(|m| m.mu_a))?,
        c_v: pick("c_v", raw.c_v, water.map(|w| w.0), base.map(|m| m.c_v))?,
        kappa: pick("kappa", raw.kappa, water.map(|w| w.1), base.map(|m| m.kappa))?,
        h: pick("h", raw.h, None, base.map(|m| m.h))?,
        t_inf: pick("t_inf", raw.t_inf, None, base.map(|m| m.t_inf))?,
    };
    Ok(material)
}

fn resolve_boundary(
    raw: &RawBoundary,
    material: &MaterialProperties,
    initial_temperature: f64,
    incidence: Point3,
) -> Result<BoundarySpec> {
    let mode: ConvectionMode = raw.convection.into();
    let sink = raw.sink_temperature.unwrap_or(initial_temperature);
    let mut spec = experiment_boundaries(material, sink);
    for face in Face::ALL {
        if let Some(BoundaryCondition::Convection { h, t_inf, .. }) = spec.get(face) {
            spec.set(face, BoundaryCondition::Convection { h, t_inf, mode });
        }
    }
    for (name, face_raw) in &raw.faces {
        let face = Face::from_name(name).ok_or_else(|| {
            Error::validation(
                format!("boundary.faces.{name}"),
                "unknown face (expected x_min, x_max, y_min, y_max, top or bottom)",
            )
        })?;
        let cond = match *face_raw {
            RawFace::HeatSink { temperature } => BoundaryCondition::HeatSink {
                temperature: temperature.unwrap_or(sink),
            },
            RawFace::Flux { q } => BoundaryCondition::ConstantFlux { q },
            RawFace::Convection { h, t_inf, mode: m } => BoundaryCondition::Convection {
                h: h.unwrap_or(material.h),
                t_inf: t_inf.unwrap_or(material.t_inf),
                mode: m.map_or(mode, Into::into),
            },
        };
        spec.set(face, cond);
    }
    if raw.scale_at_incidence_point {
        spec.natural_reference = NaturalReference::Point(incidence);
    }
    Ok(spec)
}

fn resolve(raw: RawConfig) -> Result<SimulationConfig> {
    let mesh = MeshSpec {
        dims: raw.mesh.dims,
        extent: raw.mesh.extent,
        origin: raw
            .mesh
            .origin
            .unwrap_or([-0.5 * raw.mesh.extent[0], -0.5 * raw.mesh.extent[1], 0.0]),
    };
    let material = resolve_material(&raw.material)?;
    let initial_temperature = raw.initial_temperature.unwrap_or(material.t_inf);

    let schedule = match raw.laser.schedule {
        Some(s) => Schedule::new(s.into_iter().map(|[a, b]| (a, b)).collect())?,
        None => Schedule::new(vec![(0.0, 15.0)])?,
    };
    let laser = LaserParams {
        power: raw.laser.power,
        wavelength: raw.laser.wavelength.unwrap_or(CO2_WAVELENGTH_CM),
        waist: raw.laser.waist,
        focal_distance: raw.laser.focal_distance,
        center: raw.laser.center.unwrap_or_else(|| mesh.top_center()),
        schedule,
        normalization: match raw.laser.normalization {
            RawNormalization::Linear => GaussianNormalization::Linear,
            RawNormalization::Standard => GaussianNormalization::Standard,
        },
    };
    let incidence = [laser.center[0], laser.center[1], mesh.origin[2]];
    let boundary = resolve_boundary(&raw.boundary, &material, initial_temperature, incidence)?;

    let defaults = SolverSettings::default();
    let solver = SolverSettings {
        dt: raw.solver.dt.unwrap_or(defaults.dt),
        method: match raw.solver.method {
            RawMethod::Auto => SolverMethod::Auto,
            RawMethod::Direct => SolverMethod::Direct,
            RawMethod::Cg => SolverMethod::ConjugateGradient,
        },
        tolerance: raw.solver.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: raw.solver.max_iterations.unwrap_or(defaults.max_iterations),
        execution: match raw.solver.execution {
            Some(RawExecution::Sequential) => Execution::Sequential,
            Some(RawExecution::Parallel) => Execution::Parallel,
            None => defaults.execution,
        },
    };
    let output = OutputSettings {
        dir: Some(raw.output.dir.unwrap_or_else(|| PathBuf::from("output"))),
        probe_every: raw.output.probe_every.unwrap_or(1),
        snapshot_every: raw.output.snapshot_every,
        snapshot_region: match raw.output.snapshot_region {
            RawRegion::Top => SnapshotRegion::Top,
            RawRegion::Volume => SnapshotRegion::Volume,
        },
        vtk: raw.output.vtk,
    };
    let config = SimulationConfig {
        duration: raw.duration,
        initial_temperature,
        mesh,
        material,
        boundary,
        laser,
        solver,
        probes: raw.probes.unwrap_or_else(|| DEFAULT_PROBES.to_vec()),
        output,
    };
    config.validate()?;
    Ok(config)
}

/// Parses a `key.path=value` override. The value is read as a TOML value
/// and falls back to a bare string.
pub fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{s}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Parse(format!("override `{s}` has an empty key segment")));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

fn apply_override(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut table = root;
    for part in parts {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            Error::Parse(format!("override `{key}`: `{part}` is not a table"))
        })?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parses configuration text, applying `key=value` overrides first.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SimulationConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    for o in overrides {
        let (key, value) = parse_override(o)?;
        apply_override(&mut table, &key, value)?;
    }
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    resolve(raw)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
duration = 30.0
initial_temperature = 24.0

[mesh]
dims = [4, 4, 5]
extent = [2.0, 2.0, 0.5]

[material]
preset = "agar"

[laser]
power = 0.5
waist = 0.02
focal_distance = 25.0
"#;

    fn field_of(err: Error) -> String {
        match err {
            Error::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn defaults_resolve() {
        let c = parse_config(BASE, &[]).unwrap();
        assert_eq!(c.mesh.origin, [-1.0, -1.0, 0.0]);
        assert_eq!(c.material, preset(Tissue::Agar));
        assert_eq!(c.laser.center, [0.0, 0.0]);
        assert_eq!(c.laser.schedule.intervals(), &[(0.0, 15.0)]);
        assert_eq!(c.laser.wavelength, CO2_WAVELENGTH_CM);
        assert_eq!(c.probes, DEFAULT_PROBES.to_vec());
        assert_eq!(c.solver.dt, 0.05);
        assert_eq!(c.step_count(), 600);
        assert_eq!(
            c.boundary.get(Face::Bottom),
            Some(BoundaryCondition::HeatSink { temperature: 24.0 })
        );
        assert_eq!(
            c.boundary.get(Face::Top),
            Some(BoundaryCondition::Convection {
                h: 0.022,
                t_inf: 24.0,
                mode: ConvectionMode::Natural
            })
        );
        assert_eq!(c.boundary.natural_reference, NaturalReference::PerNode);
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config(
            BASE,
            &[
                "material.preset=chicken".into(),
                "solver.dt=0.1".into(),
                "boundary.scale_at_incidence_point=true".into(),
                "boundary.faces.top.type=flux".into(),
                "boundary.faces.top.q=-0.5".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.material.mu_a, 26.0);
        assert_eq!(c.solver.dt, 0.1);
        assert_eq!(c.boundary.natural_reference, NaturalReference::Point([0.0, 0.0, 0.0]));
        assert_eq!(c.boundary.get(Face::Top), Some(BoundaryCondition::ConstantFlux { q: -0.5 }));
        assert!(parse_config(BASE, &["novalue".into()]).is_err());
        assert!(parse_config(BASE, &["duration.x=1".into()]).is_err());
    }

    #[test]
    fn water_content_material() {
        let text = BASE.replace("preset = \"agar\"", "preset = \"agar\"\nwater_content = 0.98\ndensity = 1.0");
        let c = parse_config(&text, &[]).unwrap();
        assert!((c.material.c_v - 4.294).abs() < 1e-12);
        assert_eq!(c.material.mu_a, 31.0);
        let err = parse_config(&text, &["material.c_v=4.0".into()]).unwrap_err();
        assert_eq!(field_of(err), "material.c_v");
        let err = parse_config(BASE, &["material.water_content=0.5".into()]).unwrap_err();
        assert_eq!(field_of(err), "material.density");
    }

    #[test]
    fn invalid_inputs_name_the_field() {
        let cases = [
            ("duration=-1.0", "duration"),
            ("probes=[[5.0, 0.0]]", "probes[0]"),
            ("material.preset=\"pork\"", "material.preset"),
            ("solver.dt=0.0", "solver.dt"),
            ("laser.waist=-0.1", "laser.waist"),
            ("laser.schedule=[[5.0, 1.0]]", "laser.schedule[0]"),
            ("output.probe_every=0", "output.probe_every"),
            ("boundary.faces.side={ type = \"flux\", q = 1.0 }", "boundary.faces.side"),
        ];
        for (o, field) in cases {
            let err = parse_config(BASE, &[o.to_string()]).unwrap_err();
            assert_eq!(field_of(err), field, "override {o}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        for o in ["mesh.dimz=[1,1,1]", "bogus=1", "laser.powr=1.0", "boundary.faces.top.qq=1"] {
            let err = parse_config(BASE, &[o.into()]).unwrap_err();
            assert!(matches!(err, Error::Parse(_)), "override {o}: {err}");
        }
        let missing = BASE.replace("preset = \"agar\"", "");
        assert_eq!(field_of(parse_config(&missing, &[]).unwrap_err()), "material.mu_a");
    }
}
