use std::path::Path;

use anyhow::{Context, Result};
use hopfavg::pipeline::{OffsetResult, SliceResult};
use hopfavg::predict::ANNULUS_CURVE_POINTS;
use serde::Serialize;

pub fn write_rows<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Orbit and annulus curves of one offset; returns the file names written.
pub fn offset_artifacts(dir: &Path, index: usize, res: &OffsetResult) -> Result<Vec<String>> {
    let mut names = Vec::new();
    if let Some(orbit) = res.verification.as_ref().and_then(|v| v.orbit.as_ref()) {
        let n = orbit.samples.len() - 1;
        let dt = f64::from(orbit.time_direction) * orbit.period / n as f64;
        let name = format!("orbit_{index}.csv");
        let rows = orbit.samples.iter().enumerate().map(|(i, x)| (dt * i as f64, x[0], x[1]));
        write_rows(&dir.join(&name), &["t", "x1", "x2"], rows)?;
        names.push(name);
    }
    if let Some(annulus) = &res.annulus {
        let (inner, outer) = annulus.boundary_curves(ANNULUS_CURVE_POINTS);
        for (label, curve) in [("inner", inner), ("outer", outer)] {
            let n = curve.len();
            let name = format!("annulus_{index}_{label}.csv");
            // t is the angle along the boundary; the first point closes the curve
            let rows = (0..=n).map(|i| (std::f64::consts::TAU * i as f64 / n as f64, curve[i % n][0], curve[i % n][1]));
            write_rows(&dir.join(&name), &["t", "x1", "x2"], rows)?;
            names.push(name);
        }
    }
    Ok(names)
}

pub fn slice_artifact(dir: &Path, index: usize, row: &SliceResult) -> Result<Option<String>> {
    if row.orbit_3d.is_empty() {
        return Ok(None);
    }
    let name = format!("cylinder_{index}.csv");
    write_rows(&dir.join(&name), &["t", "x1", "x2", "x3"], row.orbit_3d.iter().copied())?;
    Ok(Some(name))
}
