//! Field snapshots: raw little-endian f64 in lexicographic node order
//! (x fastest, then y, then z) with a plain-text sidecar header, plus an
//! optional legacy-VTK structured-points file for visualization tools.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotRegion {
    /// Only the irradiated surface (`k = 0` plane).
    #[default]
    Top,
    Volume,
}

impl SnapshotRegion {
    pub fn name(self) -> &'static str {
        match self {
            SnapshotRegion::Top => "top",
            SnapshotRegion::Volume => "volume",
        }
    }
}

/// Extracts the region's nodal values and lattice dimensions.
pub fn region_values(mesh: &Mesh, d: &[f64], region: SnapshotRegion) -> (Vec<f64>, [usize; 3]) {
    let [nx, ny, nz] = mesh.node_dims();
    match region {
        SnapshotRegion::Volume => (d.to_vec(), [nx, ny, nz]),
        // the top plane is the first nx*ny nodes in lexicographic order
        SnapshotRegion::Top => (d[..nx * ny].to_vec(), [nx, ny, 1]),
    }
}

/// Writes `<stem>.bin`, `<stem>.hdr` and optionally `<stem>.vtk`; returns the binary path.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    mesh: &Mesh,
    d: &[f64],
    time: f64,
    step: usize,
    region: SnapshotRegion,
    vtk: bool,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (values, dims) = region_values(mesh, d, region);

    let bin = dir.join(format!("{stem}.bin"));
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in &values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;

    let extent = mesh.extent();
    let origin = mesh.origin();
    let mut hdr = String::new();
    writeln!(hdr, "format = f64le").unwrap();
    writeln!(hdr, "order = x-fastest, then y, then z").unwrap();
    writeln!(hdr, "region = {}", region.name()).unwrap();
    writeln!(hdr, "node_dims = {} {} {}", dims[0], dims[1], dims[2]).unwrap();
    writeln!(hdr, "element_dims = {} {} {}", mesh.dims()[0], mesh.dims()[1], mesh.dims()[2]).unwrap();
    writeln!(hdr, "extent_cm = {} {} {}", extent[0], extent[1], extent[2]).unwrap();
    writeln!(hdr, "origin_cm = {} {} {}", origin[0], origin[1], origin[2]).unwrap();
    writeln!(hdr, "time_s = {time}").unwrap();
    writeln!(hdr, "step = {step}").unwrap();
    let hdr_path = dir.join(format!("{stem}.hdr"));
    fs::write(&hdr_path, hdr).map_err(|e| Error::io(&hdr_path, e))?;

    if vtk {
        let spacing: Vec<f64> = (0..3)
            .map(|a| extent[a] / mesh.dims()[a] as f64)
            .collect();
        let mut out = String::new();
        writeln!(out, "# vtk DataFile Version 3.0").unwrap();
        writeln!(out, "temperature t={time} s").unwrap();
        writeln!(out, "ASCII\nDATASET STRUCTURED_POINTS").unwrap();
        writeln!(out, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]).unwrap();
        writeln!(out, "ORIGIN {} {} {}", origin[0], origin[1], origin[2]).unwrap();
        writeln!(out, "SPACING {} {} {}", spacing[0], spacing[1], spacing[2]).unwrap();
        writeln!(out, "POINT_DATA {}", values.len()).unwrap();
        writeln!(out, "SCALARS temperature_C double 1\nLOOKUP_TABLE default").unwrap();
        for v in &values {
            writeln!(out, "{v}").unwrap();
        }
        let vtk_path = dir.join(format!("{stem}.vtk"));
        fs::write(&vtk_path, out).map_err(|e| Error::io(&vtk_path, e))?;
    }
    Ok(bin)
}

pub fn read_snapshot(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Series(format!(
            "{}: length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;

    #[test]
    fn writes_top_and_volume() {
        let mesh = build_grid([3, 2, 2], [0.3, 0.2, 0.1], [0.0; 3]).unwrap();
        let d: Vec<f64> = (0..mesh.node_count()).map(|i| i as f64 * 0.5 + 20.0).collect();
        let dir = tempfile::tempdir().unwrap();

        let bin = write_snapshot(dir.path(), "vol", &mesh, &d, 1.5, 30, SnapshotRegion::Volume, true).unwrap();
        assert_eq!(read_snapshot(&bin).unwrap(), d);
        let hdr = fs::read_to_string(dir.path().join("vol.hdr")).unwrap();
        assert!(hdr.contains("node_dims = 4 3 3"));
        assert!(hdr.contains("time_s = 1.5"));
        let vtk = fs::read_to_string(dir.path().join("vol.vtk")).unwrap();
        assert!(vtk.contains("POINT_DATA 36"));

        let bin = write_snapshot(dir.path(), "top", &mesh, &d, 1.5, 30, SnapshotRegion::Top, false).unwrap();
        let top = read_snapshot(&bin).unwrap();
        assert_eq!(top.len(), 12);
        for (i, v) in top.iter().enumerate() {
            assert_eq!(mesh.nodes()[i][2], 0.0);
            assert_eq!(*v, d[i]);
        }
        assert!(!dir.path().join("top.vtk").exists());
    }
}
