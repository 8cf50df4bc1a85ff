//! Structured hexahedral mesh and trilinear shape functions on the bi-unit cube.
//!
//! Conventions used throughout the crate:
//!
//! * Local corner `A = i + 2j + 4k` (x fastest) sits at
//!   `ξ^A = (±1, ±1, ±1)` with `-1` for index bit 0 and `+1` for bit 1.
//! * Global nodes are numbered lexicographically, x fastest, then y, then z.
//! * `z` is depth measured into the tissue: the irradiated surface is the
//!   `z = origin.z` plane (the `Top` face) and the bench contact is `Bottom`.

use std::fmt;

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Bi-unit corner coordinates, indexed by local node.
pub const CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, 1.0, 1.0],
];

/// A point of the reference cube `[-1, 1]^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiUnitPoint([f64; 3]);

impl BiUnitPoint {
    pub const CENTER: BiUnitPoint = BiUnitPoint([0.0; 3]);

    pub fn new(xi: [f64; 3]) -> Result<Self> {
        if xi.iter().all(|c| (-1.0..=1.0).contains(c)) {
            Ok(BiUnitPoint(xi))
        } else {
            Err(Error::InvalidArgument(format!(
                "bi-unit coordinates {xi:?} outside [-1, 1]"
            )))
        }
    }

    pub fn corner(a: usize) -> Self {
        BiUnitPoint(CORNERS[a])
    }

    pub(crate) fn new_unchecked(xi: [f64; 3]) -> Self {
        debug_assert!(xi.iter().all(|c| c.abs() <= 1.0 + 1e-12));
        BiUnitPoint(xi)
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }
}

/// One of the six outer surfaces of the cuboid. For a structured grid the
/// local face of a boundary element coincides with the outer face it lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    Top,
    Bottom,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::Top,
        Face::Bottom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Face::XMin => "x_min",
            Face::XMax => "x_max",
            Face::YMin => "y_min",
            Face::YMax => "y_max",
            Face::Top => "top",
            Face::Bottom => "bottom",
        }
    }

    pub fn from_name(name: &str) -> Option<Face> {
        Face::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Axis normal to the face and the fixed bi-unit coordinate on it.
    pub fn axis_and_sign(self) -> (usize, f64) {
        match self {
            Face::XMin => (0, -1.0),
            Face::XMax => (0, 1.0),
            Face::YMin => (1, -1.0),
            Face::YMax => (1, 1.0),
            Face::Top => (2, -1.0),
            Face::Bottom => (2, 1.0),
        }
    }

    /// Local nodes on this face, in increasing local index.
    pub fn local_nodes(self) -> [usize; 4] {
        let (axis, sign) = self.axis_and_sign();
        let mut out = [0; 4];
        let mut n = 0;
        for (a, c) in CORNERS.iter().enumerate() {
            if c[axis] == sign {
                out[n] = a;
                n += 1;
            }
        }
        out
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFace {
    pub element: usize,
    pub face: Face,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dims: [usize; 3],
    extent: [f64; 3],
    origin: Point3,
    nodes: Vec<Point3>,
    elements: Vec<[usize; 8]>,
    face_sets: [Vec<BoundaryFace>; 6],
}

/// Builds a regular lattice of `dims` elements spanning `extent` (cm) from `origin`.
pub fn build_grid(dims: [usize; 3], extent: [f64; 3], origin: Point3) -> Result<Mesh> {
    if dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "element counts must be >= 1, got {dims:?}"
        )));
    }
    if extent.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "extent must be positive and finite, got {extent:?}"
        )));
    }
    if origin.iter().any(|o| !o.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "origin must be finite, got {origin:?}"
        )));
    }

    let [nx, ny, nz] = dims;
    let coord = |axis: usize, i: usize| {
        origin[axis] + extent[axis] * (i as f64) / (dims[axis] as f64)
    };
    let axis_coords: [Vec<f64>; 3] =
        std::array::from_fn(|axis| (0..=dims[axis]).map(|i| coord(axis, i)).collect());
    for (axis, c) in axis_coords.iter().enumerate() {
        if c.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} spacing collapses to zero in floating point"
            )));
        }
    }

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([axis_coords[0][i], axis_coords[1][j], axis_coords[2][k]]);
            }
        }
    }

    let node_id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut elements = Vec::with_capacity(nx * ny * nz);
    let mut face_sets: [Vec<BoundaryFace>; 6] = Default::default();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let e = elements.len();
                elements.push(std::array::from_fn(|a| {
                    node_id(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1))
                }));
                let on = [
                    (Face::XMin, i == 0),
                    (Face::XMax, i == nx - 1),
                    (Face::YMin, j == 0),
                    (Face::YMax, j == ny - 1),
                    (Face::Top, k == 0),
                    (Face::Bottom, k == nz - 1),
                ];
                for (face, hit) in on {
                    if hit {
                        face_sets[face.index()].push(BoundaryFace { element: e, face });
                    }
                }
            }
        }
    }

    Ok(Mesh {
        dims,
        extent,
        origin,
        nodes,
        elements,
        face_sets,
    })
}

impl Mesh {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn node_dims(&self) -> [usize; 3] {
        self.dims.map(|d| d + 1)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 8]] {
        &self.elements
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + (self.dims[0] + 1) * (j + (self.dims[1] + 1) * k)
    }

    pub fn element_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn element_nodes(&self, element: usize) -> Result<&[usize; 8]> {
        self.elements.get(element).ok_or(Error::ElementOutOfRange {
            element,
            count: self.elements.len(),
        })
    }

    pub fn element_coords(&self, element: usize) -> Result<[Point3; 8]> {
        let conn = self.element_nodes(element)?;
        Ok(conn.map(|n| self.nodes[n]))
    }

    pub fn face_set(&self, face: Face) -> &[BoundaryFace] {
        &self.face_sets[face.index()]
    }

    pub fn is_boundary_face(&self, element: usize, face: Face) -> bool {
        self.face_set(face)
            .binary_search_by_key(&element, |bf| bf.element)
            .is_ok()
    }

    /// Global nodes lying on an outer face, sorted and deduplicated.
    pub fn face_nodes(&self, face: Face) -> Vec<usize> {
        let local = face.local_nodes();
        let mut out: Vec<usize> = self
            .face_set(face)
            .iter()
            .flat_map(|bf| local.map(|a| self.elements[bf.element][a]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn volume(&self) -> f64 {
        self.extent.iter().product()
    }

    /// Finds the element containing `p` and its bi-unit coordinates.
    /// Points on shared faces resolve to the lower-indexed cell, except on
    /// the upper domain boundary.
    pub fn locate(&self, p: Point3) -> Result<(usize, BiUnitPoint)> {
        let mut cell = [0usize; 3];
        let mut xi = [0.0; 3];
        for axis in 0..3 {
            let lo = self.origin[axis];
            let hi = lo + self.extent[axis];
            if !(p[axis] >= lo && p[axis] <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "point {p:?} outside mesh along axis {axis} [{lo}, {hi}]"
                )));
            }
            let n = self.dims[axis];
            let guess = ((p[axis] - lo) / self.extent[axis] * n as f64).floor() as usize;
            let mut c = guess.min(n - 1);
            let node_coord = |i: usize| {
                let mut idx = [0; 3];
                idx[axis] = i;
                self.nodes[self.node_index(idx[0], idx[1], idx[2])][axis]
            };
            // floor() can land one cell off when p sits on a node
            if c > 0 && p[axis] < node_coord(c) {
                c -= 1;
            }
            if c + 1 < n && p[axis] >= node_coord(c + 1) {
                c += 1;
            }
            let (a, b) = (node_coord(c), node_coord(c + 1));
            cell[axis] = c;
            xi[axis] = if p[axis] == a {
                -1.0
            } else if p[axis] == b {
                1.0
            } else {
                (2.0 * (p[axis] - a) / (b - a) - 1.0).clamp(-1.0, 1.0)
            };
        }
        Ok((
            self.element_index(cell[0], cell[1], cell[2]),
            BiUnitPoint::new_unchecked(xi),
        ))
    }

    /// Trilinear interpolation of a nodal field at a physical point.
    pub fn interpolate(&self, field: &[f64], p: Point3) -> Result<f64> {
        let (e, xi) = self.locate(p)?;
        Ok(self.interpolate_in(field, e, xi))
    }

    pub(crate) fn interpolate_in(&self, field: &[f64], element: usize, xi: BiUnitPoint) -> f64 {
        let n = shape_values(xi);
        let conn = &self.elements[element];
        let mut acc = 0.0;
        for a in 0..8 {
            if n[a] != 0.0 {
                acc += n[a] * field[conn[a]];
            }
        }
        acc
    }
}

/// Trilinear shape function values at `xi`.
pub fn shape_values(xi: BiUnitPoint) -> [f64; 8] {
    let x = xi.0;
    std::array::from_fn(|a| {
        let c = CORNERS[a];
        0.125 * (1.0 + c[0] * x[0]) * (1.0 + c[1] * x[1]) * (1.0 + c[2] * x[2])
    })
}

/// `dN^A/dξ_i`, one row per local node.
pub fn shape_gradients(xi: BiUnitPoint) -> [[f64; 3]; 8] {
    let x = xi.0;
    std::array::from_fn(|a| {
        let c = CORNERS[a];
        let f = [1.0 + c[0] * x[0], 1.0 + c[1] * x[1], 1.0 + c[2] * x[2]];
        [
            0.125 * c[0] * f[1] * f[2],
            0.125 * f[0] * c[1] * f[2],
            0.125 * f[0] * f[1] * c[2],
        ]
    })
}

pub fn map_to_physical(mesh: &Mesh, element: usize, xi: BiUnitPoint) -> Result<Point3> {
    let coords = mesh.element_coords(element)?;
    let n = shape_values(xi);
    let mut p = [0.0; 3];
    for a in 0..8 {
        if n[a] == 0.0 {
            continue;
        }
        for d in 0..3 {
            p[d] += n[a] * coords[a][d];
        }
    }
    Ok(p)
}

/// Jacobian `J[i][j] = dp_i / dξ_j` and its determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    pub matrix: [[f64; 3]; 3],
    pub det: f64,
}

impl Jacobian {
    pub fn from_coords(coords: &[Point3; 8], xi: BiUnitPoint) -> Jacobian {
        let g = shape_gradients(xi);
        let mut j = [[0.0; 3]; 3];
        for a in 0..8 {
            for r in 0..3 {
                for c in 0..3 {
                    j[r][c] += coords[a][r] * g[a][c];
                }
            }
        }
        Jacobian {
            matrix: j,
            det: det3(&j),
        }
    }

    /// `J^{-T}`, mapping reference gradients to physical gradients.
    pub fn inverse_transpose(&self) -> [[f64; 3]; 3] {
        let m = &self.matrix;
        let inv_det = 1.0 / self.det;
        // cofactor matrix divided by det is exactly J^{-T}
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                out[r][c] = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) * inv_det;
            }
        }
        out
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn jacobian(mesh: &Mesh, element: usize, xi: BiUnitPoint) -> Result<Jacobian> {
    let coords = mesh.element_coords(element)?;
    let jac = Jacobian::from_coords(&coords, xi);
    if !(jac.det > 0.0) {
        return Err(Error::DegenerateElement {
            element,
            det: jac.det,
        });
    }
    Ok(jac)
}
