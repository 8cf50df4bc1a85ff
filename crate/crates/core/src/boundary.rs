//! Heat sink, constant flux and convection boundaries, and the lagged
//! Neumann load vector they produce.

use crate::assembly::{element_face_flux, MaterialProperties};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryFace, Face, Mesh, Point3};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvectionMode {
    /// Newton cooling with a fixed coefficient.
    ConstantH,
    /// Coefficient scaled by `(T_ref - T∞)^{1/4}`.
    Natural,
}

/// Where the natural-convection scaling temperature is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NaturalReference {
    /// Each boundary node scales its own coefficient with its own temperature.
    PerNode,
    /// One temperature, interpolated at this point, scales every node.
    Point(Point3),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    HeatSink { temperature: f64 },
    ConstantFlux { q: f64 },
    Convection { h: f64, t_inf: f64, mode: ConvectionMode },
}

/// Inward heat flux (W/cm²) from Newton's law of cooling. Negative when the
/// surface is hotter than ambient.
pub fn convection_flux(u_surf: f64, h: f64, t_inf: f64, mode: ConvectionMode, t_ref: f64) -> f64 {
    let h_eff = match mode {
        ConvectionMode::ConstantH => h,
        ConvectionMode::Natural => h * (t_ref - t_inf).max(0.0).powf(0.25),
    };
    h_eff * (t_inf - u_surf)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    conditions: [Option<BoundaryCondition>; 6],
    pub natural_reference: NaturalReference,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            conditions: [None; 6],
            natural_reference: NaturalReference::PerNode,
        }
    }
}

impl BoundarySpec {
    pub fn uniform(condition: BoundaryCondition) -> Self {
        BoundarySpec {
            conditions: [Some(condition); 6],
            ..Default::default()
        }
    }

    pub fn with(mut self, face: Face, condition: BoundaryCondition) -> Self {
        self.set(face, condition);
        self
    }

    pub fn set(&mut self, face: Face, condition: BoundaryCondition) {
        self.conditions[face.index()] = Some(condition);
    }

    pub fn get(&self, face: Face) -> Option<BoundaryCondition> {
        self.conditions[face.index()]
    }

    pub fn validate(&self) -> Result<()> {
        for face in Face::ALL {
            match self.get(face) {
                None => return Err(Error::UncoveredFace(face)),
                Some(BoundaryCondition::Convection { h, t_inf, .. }) => {
                    if !(h > 0.0 && h.is_finite()) || !t_inf.is_finite() {
                        return Err(Error::validation(
                            format!("boundary.{face}"),
                            format!("convection needs h > 0 and finite T∞, got h={h}, T∞={t_inf}"),
                        ));
                    }
                }
                Some(BoundaryCondition::HeatSink { temperature: v })
                | Some(BoundaryCondition::ConstantFlux { q: v }) => {
                    if !v.is_finite() {
                        return Err(Error::validation(format!("boundary.{face}"), "value must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Heat-sink faces as Dirichlet data for assembly.
    pub fn dirichlet(&self) -> Vec<(Face, f64)> {
        Face::ALL
            .into_iter()
            .filter_map(|f| match self.get(f) {
                Some(BoundaryCondition::HeatSink { temperature }) => Some((f, temperature)),
                _ => None,
            })
            .collect()
    }
}

/// Bench-top setup: bottom face is a heat sink, every other face loses heat
/// to the air by natural convection.
pub fn experiment_boundaries(material: &MaterialProperties, sink_temperature: f64) -> BoundarySpec {
    let air = BoundaryCondition::Convection {
        h: material.h,
        t_inf: material.t_inf,
        mode: ConvectionMode::Natural,
    };
    BoundarySpec::uniform(air).with(
        Face::Bottom,
        BoundaryCondition::HeatSink {
            temperature: sink_temperature,
        },
    )
}

pub fn boundary_load(mesh: &Mesh, spec: &BoundarySpec, d: &[f64]) -> Result<Vec<f64>> {
    boundary_load_with(mesh, spec, d, Execution::default())
}

/// Global `F^q` evaluated with the surface temperatures in `d`.
pub fn boundary_load_with(
    mesh: &Mesh,
    spec: &BoundarySpec,
    d: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if d.len() != mesh.node_count() {
        return Err(Error::InvalidArgument(format!(
            "temperature vector has {} entries, mesh has {} nodes",
            d.len(),
            mesh.node_count()
        )));
    }
    let point_ref = match spec.natural_reference {
        NaturalReference::PerNode => None,
        NaturalReference::Point(p) => Some(mesh.interpolate(d, p)?),
    };

    let faces: Vec<(BoundaryFace, BoundaryCondition)> = Face::ALL
        .into_iter()
        .filter_map(|f| spec.get(f).map(|c| (f, c)))
        .filter(|(_, c)| !matches!(c, BoundaryCondition::HeatSink { .. }))
        .flat_map(|(f, c)| mesh.face_set(f).iter().map(move |bf| (*bf, c)))
        .collect();

    let loads: Vec<Result<[f64; 8]>> = exec.map(faces.len(), |i| {
        let (bf, cond) = faces[i];
        let conn = mesh.elements()[bf.element];
        let q: [f64; 4] = bf.face.local_nodes().map(|a| {
            let u = d[conn[a]];
            match cond {
                BoundaryCondition::ConstantFlux { q } => q,
                BoundaryCondition::Convection { h, t_inf, mode } => {
                    convection_flux(u, h, t_inf, mode, point_ref.unwrap_or(u))
                }
                BoundaryCondition::HeatSink { .. } => unreachable!(),
            }
        });
        if q.iter().all(|&v| v == 0.0) {
            return Ok([0.0; 8]);
        }
        element_face_flux(mesh, bf.element, bf.face, &q)
    });

    let mut f = vec![0.0; mesh.node_count()];
    for ((bf, _), load) in faces.iter().zip(loads) {
        let load = load?;
        let conn = mesh.elements()[bf.element];
        for a in 0..8 {
            f[conn[a]] += load[a];
        }
    }
    Ok(f)
}
