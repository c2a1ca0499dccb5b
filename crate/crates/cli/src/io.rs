//! File formats: mesh JSON, spectrum CSV, traces / diagnostics / coefficient
//! JSON. CSV numbers carry 17 significant digits; JSON numbers use the
//! shortest representation that round-trips.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use steklov_core::trace_spaces::{MembershipVerdict, TraceCoefficients};
use steklov_core::{BoundaryParam, ElementType, Mesh2D, Point, Spectrum};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    /// `"P1"` or `"C1Rect"`.
    pub element_type: String,
}

pub fn element_name(e: ElementType) -> &'static str {
    match e {
        ElementType::P1Triangle => "P1",
        ElementType::C1Rectangle => "C1Rect",
    }
}

pub fn read_mesh(path: &Path) -> Result<Mesh2D, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let file: MeshFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let element = match file.element_type.as_str() {
        "P1" => ElementType::P1Triangle,
        "C1Rect" => ElementType::C1Rectangle,
        other => {
            return Err(CliError::Config(format!(
                "{}: unknown element_type `{other}`",
                path.display()
            )))
        }
    };
    let vertices = file
        .vertices
        .iter()
        .map(|v| Point::new(v[0], v[1]))
        .collect();
    Mesh2D::new(vertices, file.cells, element)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn mesh_file(mesh: &Mesh2D) -> MeshFile {
    MeshFile {
        vertices: mesh.vertices().iter().map(|p| [p.x, p.y]).collect(),
        cells: mesh.cells().to_vec(),
        element_type: element_name(mesh.element_type()).into(),
    }
}

/// Write to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `j,sigma,multiplicity_group` with 1-based `j` and groups.
pub fn spectrum_csv(s: &Spectrum) -> Result<Vec<u8>, CliError> {
    let group = s.group_of();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["j", "sigma", "multiplicity_group"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    for (j, sigma) in s.eigenvalues.iter().enumerate() {
        w.write_record([
            (j + 1).to_string(),
            format!("{sigma:.16e}"),
            (group[j] + 1).to_string(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Rows of a spectrum CSV as `(j, sigma, group)`.
pub fn parse_spectrum_csv(bytes: &[u8]) -> Result<Vec<(usize, f64, usize)>, CliError> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BoundaryJson {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
}

impl BoundaryJson {
    pub fn new(b: &BoundaryParam) -> Self {
        Self {
            s: b.nodes.iter().map(|n| n.s).collect(),
            x: b.nodes.iter().map(|n| n.point.x).collect(),
            y: b.nodes.iter().map(|n| n.point.y).collect(),
            weight: b.weights(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TracesJson<'a> {
    pub basis: &'a str,
    pub boundary: BoundaryJson,
    pub sigma: &'a [f64],
    /// `traces[m][j][node]`.
    pub traces: &'a [Vec<Vec<f64>>],
}

pub fn traces_json(s: &Spectrum) -> Result<Vec<u8>, CliError> {
    to_json(&TracesJson {
        basis: &s.id,
        boundary: BoundaryJson::new(s.boundary()),
        sigma: &s.eigenvalues,
        traces: &s.traces,
    })
}

#[derive(Debug, Serialize)]
pub struct DiagnosticsJson<'a> {
    pub basis: &'a str,
    pub problem: String,
    pub dofs: usize,
    pub boundary_nodes: usize,
    pub raw_eigenvalues: &'a [f64],
    pub reduced_dim: usize,
    pub interior_dim: usize,
    pub constrained_dim: usize,
    pub modes_without_eigenvalue: &'a [usize],
    pub certified: usize,
    pub gram_deviation: f64,
    pub trace_gram_deviation: f64,
    pub max_weak_residual: f64,
}

pub fn diagnostics(s: &Spectrum, n: usize) -> DiagnosticsJson<'_> {
    DiagnosticsJson {
        basis: &s.id,
        problem: s.problem.label(),
        dofs: s.discretization.dofs,
        boundary_nodes: s.boundary().len(),
        raw_eigenvalues: &s.diagnostics.raw_eigenvalues,
        reduced_dim: s.diagnostics.reduced_dim,
        interior_dim: s.diagnostics.interior_dim,
        constrained_dim: s.diagnostics.constrained_dim,
        modes_without_eigenvalue: &s.diagnostics.modes_without_eigenvalue,
        certified: s.diagnostics.certified,
        gram_deviation: s.gram_deviation(n),
        trace_gram_deviation: s.trace_gram_deviation(n),
        max_weak_residual: s.weak_residuals().into_iter().fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientsJson {
    pub basis: String,
    pub coeffs: Vec<f64>,
}

impl From<&TraceCoefficients> for CoefficientsJson {
    fn from(c: &TraceCoefficients) -> Self {
        Self {
            basis: c.basis.clone(),
            coeffs: c.coeffs.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FitJson {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl From<steklov_core::fit::LineFit> for FitJson {
    fn from(f: steklov_core::fit::LineFit) -> Self {
        Self {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            points: f.points,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MembershipJson {
    pub verdict: &'static str,
    pub reason: String,
    pub checkpoints: Vec<usize>,
    pub partial_sums: Vec<f64>,
    pub tail: f64,
    pub growth: Option<FitJson>,
    pub block_decay: Option<FitJson>,
}

impl From<&MembershipVerdict> for MembershipJson {
    fn from(v: &MembershipVerdict) -> Self {
        Self {
            verdict: v.verdict.as_str(),
            reason: v.reason.clone(),
            checkpoints: v.checkpoints.clone(),
            partial_sums: v.partial_sums.clone(),
            tail: v.tail,
            growth: v.growth.map(Into::into),
            block_decay: v.block_decay.map(Into::into),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use steklov_core::disk_spectral::laplace_steklov_disk;
    use steklov_core::geometry::build_rect_mesh;

    #[test]
    fn spectrum_csv_round_trips_bits() {
        let s = laplace_steklov_disk(1.5, 4).unwrap();
        let rows = parse_spectrum_csv(&spectrum_csv(&s).unwrap()).unwrap();
        assert_eq!(rows.len(), s.len());
        for ((j, sigma, g), v) in rows.iter().zip(&s.eigenvalues) {
            assert_eq!(sigma.to_bits(), v.to_bits(), "row {j}");
            assert!(*g >= 1);
        }
        assert_eq!(rows[1].2, rows[2].2);
    }

    #[test]
    fn mesh_json_round_trip() {
        let (mesh, _) = build_rect_mesh(2.0, 1.0, 3, 2, ElementType::C1Rectangle).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, to_json(&mesh_file(&mesh)).unwrap()).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn bad_mesh_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(
            &path,
            r#"{"vertices": [[0,0],[1,0]], "cells": [[0,1,2]], "element_type": "P1"}"#,
        )
        .unwrap();
        assert!(matches!(read_mesh(&path), Err(CliError::Config(_))));
        fs::write(&path, "not json").unwrap();
        assert!(matches!(read_mesh(&path), Err(CliError::Config(_))));
    }
}
