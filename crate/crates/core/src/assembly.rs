//! Element integrals by Gauss-Legendre quadrature and global assembly of
//! the thermal mass and conductance matrices.

use crate::error::{Error, Result};
use crate::mesh::{jacobian, shape_gradients, shape_values, BiUnitPoint, Face, Mesh};
use crate::par::Execution;
use crate::sparse::CsrMatrix;

pub type ElementMatrix = [[f64; 8]; 8];

/// Quadrature order used unless a caller asks otherwise. Exact for the
/// mass and stiffness integrands of affine (cuboid) elements.
pub const DEFAULT_ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<BiUnitPoint>,
    pub weights: Vec<f64>,
}

fn gauss_1d(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match order {
        1 => Ok((vec![0.0], vec![2.0])),
        2 => {
            let g = 1.0 / 3f64.sqrt();
            Ok((vec![-g, g], vec![1.0, 1.0]))
        }
        3 => {
            let g = (3.0f64 / 5.0).sqrt();
            Ok((vec![-g, 0.0, g], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]))
        }
        other => Err(Error::UnsupportedQuadrature(other)),
    }
}

/// Tensor-product Gauss-Legendre rule with `order^3` points on `[-1, 1]^3`.
pub fn gauss_rule(order: usize) -> Result<QuadratureRule> {
    let (x, w) = gauss_1d(order)?;
    let mut points = Vec::with_capacity(order.pow(3));
    let mut weights = Vec::with_capacity(order.pow(3));
    for k in 0..order {
        for j in 0..order {
            for i in 0..order {
                points.push(BiUnitPoint::new_unchecked([x[i], x[j], x[k]]));
                weights.push(w[i] * w[j] * w[k]);
            }
        }
    }
    Ok(QuadratureRule { points, weights })
}

/// Homogeneous tissue properties in cm / s / W / J / °C units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProperties {
    /// Volumetric heat capacity, J/(cm³·°C).
    pub c_v: f64,
    /// Thermal conductivity, W/(cm·°C).
    pub kappa: f64,
    /// Absorption coefficient, 1/cm.
    pub mu_a: f64,
    /// Heat transfer coefficient, W/(cm²·°C).
    pub h: f64,
    /// Ambient temperature, °C.
    pub t_inf: f64,
}

impl MaterialProperties {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_v", self.c_v),
            ("kappa", self.kappa),
            ("mu_a", self.mu_a),
            ("h", self.h),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    format!("material.{name}"),
                    format!("must be strictly positive, got {v}"),
                ));
            }
        }
        if !self.t_inf.is_finite() {
            return Err(Error::validation("material.t_inf", "must be finite"));
        }
        Ok(())
    }
}

pub fn element_mass(mesh: &Mesh, element: usize, c_v: f64) -> Result<ElementMatrix> {
    element_mass_with_rule(mesh, element, c_v, &gauss_rule(DEFAULT_ORDER)?)
}

pub fn element_mass_with_rule(
    mesh: &Mesh,
    element: usize,
    c_v: f64,
    rule: &QuadratureRule,
) -> Result<ElementMatrix> {
    let mut m = [[0.0; 8]; 8];
    for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
        let det = jacobian(mesh, element, xi)?.det;
        let n = shape_values(xi);
        let s = c_v * det * w;
        for a in 0..8 {
            for b in 0..8 {
                m[a][b] += n[a] * n[b] * s;
            }
        }
    }
    Ok(m)
}

pub fn element_stiffness(mesh: &Mesh, element: usize, kappa: f64) -> Result<ElementMatrix> {
    element_stiffness_with_rule(mesh, element, kappa, &gauss_rule(DEFAULT_ORDER)?)
}

pub fn element_stiffness_with_rule(
    mesh: &Mesh,
    element: usize,
    kappa: f64,
    rule: &QuadratureRule,
) -> Result<ElementMatrix> {
    let mut k = [[0.0; 8]; 8];
    for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
        let jac = jacobian(mesh, element, xi)?;
        let jit = jac.inverse_transpose();
        let g_ref = shape_gradients(xi);
        let grad: [[f64; 3]; 8] = std::array::from_fn(|a| {
            std::array::from_fn(|r| (0..3).map(|c| jit[r][c] * g_ref[a][c]).sum())
        });
        let s = kappa * jac.det * w;
        for a in 0..8 {
            for b in 0..8 {
                let dot = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1] + grad[a][2] * grad[b][2];
                k[a][b] += dot * s;
            }
        }
    }
    Ok(k)
}

/// Interior load `∫ N N^T f |J| dξ` for a trilinearly interpolated source.
pub fn element_source(mesh: &Mesh, element: usize, f_nodal: &[f64; 8]) -> Result<[f64; 8]> {
    let m = element_mass(mesh, element, 1.0)?;
    Ok(std::array::from_fn(|a| (0..8).map(|b| m[a][b] * f_nodal[b]).sum()))
}

/// Surface load on one boundary face from a bilinearly interpolated flux.
///
/// `q_nodal` follows the order of [`Face::local_nodes`]. Integrated with a
/// 2×2 Gauss rule on the face using the area scale `|∂p/∂s × ∂p/∂t|`.
pub fn element_face_flux(
    mesh: &Mesh,
    element: usize,
    face: Face,
    q_nodal: &[f64; 4],
) -> Result<[f64; 8]> {
    let coords = mesh.element_coords(element)?;
    if !mesh.is_boundary_face(element, face) {
        return Err(Error::NotBoundaryFace { element, face });
    }
    let (axis, sign) = face.axis_and_sign();
    let tangents: Vec<usize> = (0..3).filter(|&d| d != axis).collect();
    let local = face.local_nodes();
    let (gx, gw) = gauss_1d(2)?;

    let mut out = [0.0; 8];
    for (s, ws) in gx.iter().zip(&gw) {
        for (t, wt) in gx.iter().zip(&gw) {
            let mut xi = [0.0; 3];
            xi[axis] = sign;
            xi[tangents[0]] = *s;
            xi[tangents[1]] = *t;
            let xi = BiUnitPoint::new_unchecked(xi);
            let n = shape_values(xi);
            let g = shape_gradients(xi);
            let mut ds = [0.0; 3];
            let mut dt = [0.0; 3];
            for a in 0..8 {
                for d in 0..3 {
                    ds[d] += coords[a][d] * g[a][tangents[0]];
                    dt[d] += coords[a][d] * g[a][tangents[1]];
                }
            }
            let cross = [
                ds[1] * dt[2] - ds[2] * dt[1],
                ds[2] * dt[0] - ds[0] * dt[2],
                ds[0] * dt[1] - ds[1] * dt[0],
            ];
            let area = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
            let q: f64 = local.iter().zip(q_nodal).map(|(&a, &qa)| n[a] * qa).sum();
            let scale = q * area * ws * wt;
            for &a in &local {
                out[a] += n[a] * scale;
            }
        }
    }
    Ok(out)
}

/// Prescribed temperatures, one value per selected face set.
pub type DirichletSpec = Vec<(Face, f64)>;

/// Global system `M v + K d = F` with its Dirichlet partition.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    /// Thermal mass, J/°C.
    pub m: CsrMatrix,
    /// Thermal conductance, W/°C.
    pub k: CsrMatrix,
    prescribed: Vec<Option<f64>>,
    free_nodes: Vec<usize>,
    prescribed_nodes: Vec<usize>,
}

impl SystemMatrices {
    /// Wraps externally built matrices. `prescribed[i]` holds the Dirichlet
    /// value of node `i`, if any.
    pub fn from_parts(m: CsrMatrix, k: CsrMatrix, prescribed: Vec<Option<f64>>) -> Result<Self> {
        if m.dim() != k.dim() || m.dim() != prescribed.len() {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: M {} K {} prescribed {}",
                m.dim(),
                k.dim(),
                prescribed.len()
            )));
        }
        let free_nodes = (0..prescribed.len()).filter(|&i| prescribed[i].is_none()).collect();
        let prescribed_nodes = (0..prescribed.len()).filter(|&i| prescribed[i].is_some()).collect();
        Ok(SystemMatrices {
            m,
            k,
            prescribed,
            free_nodes,
            prescribed_nodes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.prescribed.len()
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    pub fn prescribed_nodes(&self) -> &[usize] {
        &self.prescribed_nodes
    }

    pub fn prescribed_value(&self, node: usize) -> Option<f64> {
        self.prescribed[node]
    }

    pub fn prescribed_values(&self) -> Vec<f64> {
        self.prescribed_nodes
            .iter()
            .map(|&n| self.prescribed[n].unwrap())
            .collect()
    }

    /// Recomputes the matrix values on the existing pattern.
    pub fn refresh(&mut self, mesh: &Mesh, c_v: f64, kappa: f64, exec: Execution) -> Result<()> {
        let (me, ke) = element_matrices(mesh, c_v, kappa, exec)?;
        self.m.assemble_rows(mesh.elements(), &me, exec);
        self.k.assemble_rows(mesh.elements(), &ke, exec);
        Ok(())
    }
}

fn element_matrices(
    mesh: &Mesh,
    c_v: f64,
    kappa: f64,
    exec: Execution,
) -> Result<(Vec<ElementMatrix>, Vec<ElementMatrix>)> {
    let rule = gauss_rule(DEFAULT_ORDER)?;
    let pairs: Vec<Result<(ElementMatrix, ElementMatrix)>> = exec.map(mesh.element_count(), |e| {
        Ok((
            element_mass_with_rule(mesh, e, c_v, &rule)?,
            element_stiffness_with_rule(mesh, e, kappa, &rule)?,
        ))
    });
    let mut me = Vec::with_capacity(pairs.len());
    let mut ke = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (m, k) = p?;
        me.push(m);
        ke.push(k);
    }
    Ok((me, ke))
}

/// Per-node Dirichlet values; shared edge/corner nodes must agree.
pub fn dirichlet_values(mesh: &Mesh, spec: &[(Face, f64)]) -> Result<Vec<Option<f64>>> {
    let mut prescribed = vec![None; mesh.node_count()];
    for &(face, value) in spec {
        for node in mesh.face_nodes(face) {
            match prescribed[node] {
                Some(prev) if prev != value => {
                    return Err(Error::DirichletConflict {
                        node,
                        first: prev,
                        second: value,
                    })
                }
                _ => prescribed[node] = Some(value),
            }
        }
    }
    Ok(prescribed)
}

pub fn assemble(
    mesh: &Mesh,
    material: &MaterialProperties,
    dirichlet: &[(Face, f64)],
) -> Result<SystemMatrices> {
    assemble_with(mesh, material, dirichlet, Execution::default())
}

pub fn assemble_with(
    mesh: &Mesh,
    material: &MaterialProperties,
    dirichlet: &[(Face, f64)],
    exec: Execution,
) -> Result<SystemMatrices> {
    let prescribed = dirichlet_values(mesh, dirichlet)?;
    let pattern = CsrMatrix::from_connectivity(mesh.node_count(), mesh.elements());
    let mut sys = SystemMatrices::from_parts(pattern.clone(), pattern, prescribed)?;
    sys.refresh(mesh, material.c_v, material.kappa, exec)?;
    Ok(sys)
}

/// Global `∫ N N^T dV`, so that `F^int = unit_mass · f` for nodal source values.
pub fn assemble_unit_mass(mesh: &Mesh, exec: Execution) -> Result<CsrMatrix> {
    let rule = gauss_rule(DEFAULT_ORDER)?;
    let local: Vec<Result<ElementMatrix>> =
        exec.map(mesh.element_count(), |e| element_mass_with_rule(mesh, e, 1.0, &rule));
    let local = local.into_iter().collect::<Result<Vec<_>>>()?;
    let mut m = CsrMatrix::from_connectivity(mesh.node_count(), mesh.elements());
    m.assemble_rows(mesh.elements(), &local, exec);
    Ok(m)
}
