//! Run configuration: an optional JSON file merged with command-line flags
//! (flags win), plus parsers for domain and boundary-function descriptions.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::{Deserialize, Serialize};
use steklov_core::disk_spectral::sweep_disk;
use steklov_core::fem::{discretize, solve_problem};
use steklov_core::geometry::{build_polygon_disk_mesh, build_rect_mesh, EdgeRule};
use steklov_core::trace_spaces::MembershipRules;
use steklov_core::{
    BoundaryNode, BoundaryParam, ElementType, Mesh2D, Point, ProblemKind, Spectrum,
    SteklovProblemSpec,
};

use crate::io::read_mesh;
use crate::CliError;

/// Settings shared by the commands. Every field is optional so that a config
/// file and the flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// `disk:R`, `polygon-disk:R:REFINEMENT`, `square:L:N`, `rect:LX:LY:NX:NY`,
    /// `polygon:X0,Y0;X1,Y1;...` or `mesh:PATH`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Order of the problem (1 harmonic, 2 biharmonic).
    #[arg(long)]
    pub k: Option<usize>,
    /// Trace carrying the spectral parameter.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Trace set to zero in an auxiliary problem.
    #[arg(long)]
    pub m: Option<usize>,
    /// Weights β_j of the boundary terms, comma separated; β_ℓ is ignored.
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    /// Number of eigenpairs (or modes / terms, depending on the command).
    #[arg(long, alias = "N")]
    pub modes: Option<usize>,
    /// Boundary function: `const:C`, `cos:N`, `sin:N`, `step`, `hadamard:N`, `x`, `y`, `xy`, `x2`,
    /// `nx`, `ny` (components of the outer normal).
    #[arg(long)]
    pub function: Option<String>,
    /// Second boundary function (normal derivative data of a pair).
    #[arg(long)]
    pub function1: Option<String>,
    /// Input JSON file (samples, pair or coefficients, depending on the command).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Primary output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace samples JSON output.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    /// Diagnostics JSON output.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub min_exponent: Option<f64>,
    #[arg(long)]
    pub min_r_squared: Option<f64>,
    /// Largest tolerated deviation of the trace Gram matrix from the identity.
    #[arg(long)]
    pub gram_tol: Option<f64>,
    /// First index used by Weyl fits.
    #[arg(long)]
    pub j_min: Option<usize>,
    /// Arclength window of the vertex test.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Boundary samples per polygon side.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Smoothness index of the seminorm oracles.
    #[arg(long)]
    pub s: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => { $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )* };
}

impl Settings {
    /// Fill the unset fields from `file`.
    pub fn with_defaults_from(mut self, file: &Settings) -> Self {
        overlay!(
            self,
            file,
            domain,
            k,
            ell,
            m,
            beta,
            modes,
            function,
            function1,
            input,
            out,
            traces,
            diagnostics,
            tail_tol,
            min_exponent,
            min_r_squared,
            gram_tol,
            j_min,
            delta,
            samples,
            s
        );
        self
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        crate::io::read_json(path)
    }

    pub fn rules(&self) -> Result<MembershipRules, CliError> {
        let d = MembershipRules::default();
        let r = MembershipRules {
            tail_tol: self.tail_tol.unwrap_or(d.tail_tol),
            min_exponent: self.min_exponent.unwrap_or(d.min_exponent),
            min_r_squared: self.min_r_squared.unwrap_or(d.min_r_squared),
        };
        if !(r.tail_tol > 0.0
            && r.min_exponent > 0.0
            && r.min_r_squared > 0.0
            && r.min_r_squared <= 1.0)
        {
            return Err(CliError::Config(
                "tolerances must be positive (and R² at most 1)".into(),
            ));
        }
        Ok(r)
    }

    pub fn gram_tol(&self) -> Result<f64, CliError> {
        positive(self.gram_tol.unwrap_or(1e-6), "gram-tol")
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Domain::parse(self.domain.as_deref().unwrap_or("disk:1"))
    }

    pub fn modes(&self, default: usize) -> Result<usize, CliError> {
        match self.modes.unwrap_or(default) {
            0 => Err(CliError::Config("--modes must be at least 1".into())),
            n => Ok(n),
        }
    }

    pub fn steklov(&self) -> Result<SteklovProblemSpec, CliError> {
        let k = self.k.unwrap_or(1);
        let ell = self.ell.unwrap_or(0);
        let spec = match &self.beta {
            Some(b) => SteklovProblemSpec::with_beta(k, ell, b.clone()),
            None => SteklovProblemSpec::new(k, ell),
        };
        spec.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn auxiliary(&self) -> Result<ProblemKind, CliError> {
        ProblemKind::auxiliary(self.ell.unwrap_or(0), self.m.unwrap_or(1))
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn positive(v: f64, name: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("--{name} must be positive")))
    }
}

/// Where a problem is posed.
#[derive(Debug, Clone)]
pub enum Domain {
    /// Modal discretization of the disk.
    Disk {
        radius: f64,
    },
    /// Finite elements; rectangles and squares pick their element from the problem order.
    Rect {
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
    },
    Mesh(Mesh2D),
    /// Boundary-only polygon (vertex tests).
    Polygon(Vec<Point>),
}

fn numbers<T: std::str::FromStr>(parts: &[&str], spec: &str) -> Result<Vec<T>, CliError> {
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("bad number `{p}` in domain `{spec}`")))
        })
        .collect()
}

impl Domain {
    pub fn parse(spec: &str) -> Result<Domain, CliError> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let parts: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(':').collect()
        };
        let bad = || CliError::Config(format!("cannot parse domain `{spec}`"));
        let core = |e: steklov_core::Error| CliError::Config(format!("domain `{spec}`: {e}"));
        match kind {
            "disk" => {
                let r: Vec<f64> = numbers(&parts, spec)?;
                match r.as_slice() {
                    [] => Ok(Domain::Disk { radius: 1.0 }),
                    [r] if *r > 0.0 => Ok(Domain::Disk { radius: *r }),
                    _ => Err(bad()),
                }
            }
            "polygon-disk" => {
                let [r, level] = parts.as_slice() else {
                    return Err(bad());
                };
                let r: f64 = numbers(&[r], spec)?[0];
                let level: usize = numbers(&[level], spec)?[0];
                Ok(Domain::Mesh(
                    build_polygon_disk_mesh(r, level).map_err(core)?.0,
                ))
            }
            "square" => {
                let [l, n] = parts.as_slice() else {
                    return Err(bad());
                };
                let l: f64 = numbers(&[l], spec)?[0];
                let n: usize = numbers(&[n], spec)?[0];
                Ok(Domain::Rect {
                    lx: l,
                    ly: l,
                    nx: n,
                    ny: n,
                })
            }
            "rect" => {
                let [lx, ly, nx, ny] = parts.as_slice() else {
                    return Err(bad());
                };
                let l: Vec<f64> = numbers(&[lx, ly], spec)?;
                let n: Vec<usize> = numbers(&[nx, ny], spec)?;
                Ok(Domain::Rect {
                    lx: l[0],
                    ly: l[1],
                    nx: n[0],
                    ny: n[1],
                })
            }
            "polygon" => {
                let pts = rest
                    .split(';')
                    .map(|p| {
                        let xy: Vec<f64> = numbers(&p.split(',').collect::<Vec<_>>(), spec)?;
                        match xy.as_slice() {
                            [x, y] => Ok(Point::new(*x, *y)),
                            _ => Err(bad()),
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Domain::Polygon(pts))
            }
            "mesh" if !rest.is_empty() => Ok(Domain::Mesh(read_mesh(Path::new(rest))?)),
            _ => Err(bad()),
        }
    }

    /// Mesh for a problem of the given order.
    pub fn mesh(&self, order: usize) -> Result<Mesh2D, CliError> {
        let element = if order >= 2 {
            ElementType::C1Rectangle
        } else {
            ElementType::P1Triangle
        };
        match self {
            Domain::Rect { lx, ly, nx, ny } => Ok(build_rect_mesh(*lx, *ly, *nx, *ny, element)
                .map_err(|e| CliError::Config(e.to_string()))?
                .0),
            Domain::Mesh(m) => Ok(m.clone()),
            _ => Err(CliError::Config(
                "this command needs a meshed domain".into(),
            )),
        }
    }

    /// Boundary sampling of a polygonal domain with `samples` midpoints per side segment.
    pub fn polygon_boundary(&self, samples: usize) -> Result<BoundaryParam, CliError> {
        let segs = match self {
            Domain::Polygon(p) => (0..p.len()).map(|i| (p[i], p[(i + 1) % p.len()])).collect(),
            Domain::Rect { lx, ly, .. } => {
                let c = [
                    Point::new(0.0, 0.0),
                    Point::new(*lx, 0.0),
                    Point::new(*lx, *ly),
                    Point::new(0.0, *ly),
                ];
                (0..4).map(|i| (c[i], c[(i + 1) % 4])).collect()
            }
            Domain::Mesh(m) => m.boundary_segments(),
            Domain::Disk { .. } => {
                return Err(CliError::Config("a polygonal domain is needed".into()))
            }
        };
        BoundaryParam::from_segments(&segs, EdgeRule::Midpoints(samples))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Solve `problem` for at least `n` eigenpairs (complete multiplicity groups on the disk).
    pub fn solve(&self, problem: ProblemKind, n: usize) -> Result<Spectrum, CliError> {
        match self {
            Domain::Disk { radius } => Ok(sweep_disk(*radius, problem, n)?),
            _ => {
                let mesh = self.mesh(problem.order())?;
                let disc = Arc::new(discretize(&mesh, problem.order())?);
                Ok(solve_problem(disc, problem, n)?)
            }
        }
    }
}

/// Named boundary functions, evaluated at boundary nodes. Angles are taken
/// around the centroid of the sampled boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedFunction {
    Const(f64),
    Cos(usize),
    Sin(usize),
    Step,
    Hadamard(usize),
    X,
    Y,
    Xy,
    X2,
    NormalX,
    NormalY,
}

impl NamedFunction {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("unknown boundary function `{spec}`"));
        let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let int = || arg.parse::<usize>().map_err(|_| bad());
        Ok(match name {
            "const" => NamedFunction::Const(arg.parse().map_err(|_| bad())?),
            "cos" => NamedFunction::Cos(int()?),
            "sin" => NamedFunction::Sin(int()?),
            "step" => NamedFunction::Step,
            "hadamard" => NamedFunction::Hadamard(int()?),
            "x" => NamedFunction::X,
            "y" => NamedFunction::Y,
            "xy" => NamedFunction::Xy,
            "x2" => NamedFunction::X2,
            "nx" => NamedFunction::NormalX,
            "ny" => NamedFunction::NormalY,
            _ => return Err(bad()),
        })
    }

    pub fn eval(&self, node: &BoundaryNode, center: Point) -> f64 {
        let d = node.point.sub(center);
        let th = d.y.atan2(d.x);
        let (x, y) = (node.point.x, node.point.y);
        match self {
            NamedFunction::Const(c) => *c,
            NamedFunction::Cos(n) => (*n as f64 * th).cos(),
            NamedFunction::Sin(n) => (*n as f64 * th).sin(),
            NamedFunction::Step => {
                if d.y >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            NamedFunction::Hadamard(n) => (1..=*n)
                .map(|k| (k as f64).powf(-0.75) * (k as f64 * th).cos())
                .sum(),
            NamedFunction::X => x,
            NamedFunction::Y => y,
            NamedFunction::Xy => x * y,
            NamedFunction::X2 => x * x,
            NamedFunction::NormalX => node.normal.x,
            NamedFunction::NormalY => node.normal.y,
        }
    }

    pub fn sample(&self, param: &BoundaryParam) -> Vec<f64> {
        let c = centroid(param);
        param.nodes.iter().map(|n| self.eval(n, c)).collect()
    }
}

pub fn centroid(param: &BoundaryParam) -> Point {
    let w: f64 = param.nodes.iter().map(|n| n.weight).sum();
    let (x, y) = param.nodes.iter().fold((0.0, 0.0), |(x, y), n| {
        (x + n.weight * n.point.x, y + n.weight * n.point.y)
    });
    Point::new(x / w, y / w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = Settings {
            k: Some(2),
            ell: Some(1),
            modes: Some(30),
            ..Default::default()
        };
        let flags = Settings {
            k: Some(1),
            ..Default::default()
        };
        let merged = flags.with_defaults_from(&file);
        assert_eq!(
            (merged.k, merged.ell, merged.modes),
            (Some(1), Some(1), Some(30))
        );
    }

    #[test]
    fn domains_parse() {
        assert!(
            matches!(Domain::parse("disk:2").unwrap(), Domain::Disk { radius } if radius == 2.0)
        );
        assert!(matches!(
            Domain::parse("square:1:4").unwrap(),
            Domain::Rect { nx: 4, ny: 4, .. }
        ));
        assert!(
            matches!(Domain::parse("polygon:0,0;1,0;0,1").unwrap(), Domain::Polygon(p) if p.len() == 3)
        );
        for bad in ["disk:-1", "disk:x", "square:1", "blob", "mesh:"] {
            assert!(
                matches!(Domain::parse(bad), Err(CliError::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn functions_parse_and_sample() {
        let d = Domain::parse("square:2:2").unwrap();
        let b = d.polygon_boundary(4).unwrap();
        let c = centroid(&b);
        assert!((c.x - 1.0).abs() < 1e-14 && (c.y - 1.0).abs() < 1e-14);
        assert_eq!(
            NamedFunction::parse("cos:3").unwrap(),
            NamedFunction::Cos(3)
        );
        assert!(NamedFunction::parse("cos:x").is_err());
        let v = NamedFunction::parse("const:2.5").unwrap().sample(&b);
        assert!(v.iter().all(|x| *x == 2.5));
    }

    #[test]
    fn bad_tolerances() {
        let s = Settings {
            tail_tol: Some(-1.0),
            ..Default::default()
        };
        assert!(s.rules().is_err());
        let s = Settings {
            gram_tol: Some(0.0),
            ..Default::default()
        };
        assert!(s.gram_tol().is_err());
    }
}
