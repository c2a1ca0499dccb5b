//! One function per subcommand. Each reads [`Settings`], writes its
//! artifacts and returns; errors carry the exit code.

use serde::{Deserialize, Serialize};
use steklov_core::asymptotics::{weyl_fit, DEFAULT_J_MIN};
use steklov_core::besov::{besov_diff_seminorm, gagliardo_seminorm, Limit, SeminormEstimate};
use steklov_core::compatibility::{
    check_pair, disk_bases, geymonat_check, mesh_bases, vertex_compat_p2, CompatibilityBases,
    CompatibilityReport, TracePair,
};
use steklov_core::disk_spectral::laplace_steklov_disk;
use steklov_core::geometry::build_disk;
use steklov_core::trace_spaces::{
    boundary_expand, classify_coefficients, extend, hadamard_coefficients, weighted_norm,
    TraceCoefficients, WeightScheme,
};
use steklov_core::{BoundarySamples, ProblemKind, Spectrum};

use crate::config::{centroid, Domain, NamedFunction, Settings};
use crate::io::{self, CoefficientsJson, FitJson, MembershipJson};
use crate::{acceptance, CliError};

/// Write the spectrum artifacts and enforce the Gram invariant.
fn write_spectrum(s: &Spectrum, settings: &Settings) -> Result<(), CliError> {
    io::emit(settings.out.as_deref(), &io::spectrum_csv(s)?)?;
    if let Some(p) = &settings.traces {
        io::emit(Some(p), &io::traces_json(s)?)?;
    }
    let n = s.len().min(20);
    let diag = io::diagnostics(s, n);
    if let Some(p) = &settings.diagnostics {
        io::emit(Some(p), &io::to_json(&diag)?)?;
    }
    let tol = settings.gram_tol()?;
    if diag.trace_gram_deviation > tol {
        let report = String::from_utf8_lossy(&io::to_json(&diag)?).into_owned();
        return Err(CliError::Invariant(format!(
            "trace Gram matrix deviates from the identity by {:.3e} > {tol:.1e}\n{report}",
            diag.trace_gram_deviation
        )));
    }
    Ok(())
}

pub fn solve(settings: &Settings) -> Result<(), CliError> {
    let spec = settings.steklov()?;
    let s = settings
        .domain()?
        .solve(ProblemKind::Steklov(spec), settings.modes(10)?)?;
    log::info!("{}: {} eigenpairs", s.id, s.len());
    write_spectrum(&s, settings)
}

pub fn solve_aux(settings: &Settings) -> Result<(), CliError> {
    let s = settings
        .domain()?
        .solve(settings.auxiliary()?, settings.modes(10)?)?;
    log::info!("{}: {} eigenpairs", s.id, s.len());
    write_spectrum(&s, settings)
}

#[derive(Debug, Deserialize)]
struct SamplesFile {
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct PairFile {
    g0: Vec<f64>,
    g1: Vec<f64>,
}

/// Boundary data from `--input` (`{"values": [...]}`) or `--function`.
fn boundary_data(
    settings: &Settings,
    param: &steklov_core::BoundaryParam,
) -> Result<BoundarySamples, CliError> {
    let values = match (&settings.input, &settings.function) {
        (Some(p), _) => io::read_json::<SamplesFile>(p)?.values,
        (None, Some(f)) => NamedFunction::parse(f)?.sample(param),
        (None, None) => {
            return Err(CliError::Config(
                "give boundary data with --input or --function".into(),
            ))
        }
    };
    BoundarySamples::new(param, values).map_err(|e| CliError::Config(e.to_string()))
}

fn basis_problem(settings: &Settings) -> Result<ProblemKind, CliError> {
    match settings.m {
        Some(_) => settings.auxiliary(),
        None => Ok(ProblemKind::Steklov(settings.steklov()?)),
    }
}

#[derive(Debug, Serialize)]
struct ExpandReport {
    basis: String,
    coeffs: Vec<f64>,
    l2_norm: f64,
    trace_norm: f64,
    membership: MembershipJson,
}

pub fn expand(settings: &Settings) -> Result<(), CliError> {
    let s = settings
        .domain()?
        .solve(basis_problem(settings)?, settings.modes(32)?)?;
    let g = boundary_data(settings, s.boundary())?;
    let c = boundary_expand(&g, &s, s.len())?;
    let w = if s.problem.order() == 1 {
        WeightScheme::HsA(0.5)
    } else {
        WeightScheme::HkA
    };
    let report = ExpandReport {
        basis: c.basis.clone(),
        l2_norm: weighted_norm(&c, &s, WeightScheme::HsA(0.0))?,
        trace_norm: weighted_norm(&c, &s, w)?,
        membership: (&classify_coefficients(&c, &s, w, settings.rules()?)?).into(),
        coeffs: c.coeffs,
    };
    io::emit(settings.out.as_deref(), &io::to_json(&report)?)
}

#[derive(Debug, Serialize)]
struct ExtendReport {
    basis: String,
    /// Coefficients of the field in the discretization's unknowns.
    field: Vec<f64>,
    /// The rhs trace of the field at the boundary nodes.
    trace: Vec<f64>,
    boundary: io::BoundaryJson,
}

pub fn extend_cmd(settings: &Settings) -> Result<(), CliError> {
    let input = settings
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("extend needs --input coefficients JSON".into()))?;
    let file: CoefficientsJson = io::read_json(input)?;
    let s = settings.domain()?.solve(
        basis_problem(settings)?,
        settings.modes(file.coeffs.len())?.max(file.coeffs.len()),
    )?;
    if file.basis != s.id {
        return Err(CliError::Config(format!(
            "coefficients belong to `{}`, the configured basis is `{}`",
            file.basis, s.id
        )));
    }
    let c = TraceCoefficients::new(&s, file.coeffs).map_err(|e| CliError::Config(e.to_string()))?;
    let field = extend(&c, &s)?;
    let trace = s.discretization.trace(s.problem.rhs_trace(), &field);
    let report = ExtendReport {
        basis: s.id.clone(),
        field,
        trace,
        boundary: io::BoundaryJson::new(s.boundary()),
    };
    io::emit(settings.out.as_deref(), &io::to_json(&report)?)
}

#[derive(Debug, Serialize)]
struct RouteJson {
    route: &'static str,
    residual_l2: f64,
    residual_norm_partial_sums: Vec<f64>,
    verdict: &'static str,
    fit: Option<FitJson>,
    membership: MembershipJson,
}

#[derive(Debug, Serialize)]
struct PairReport {
    verdict: &'static str,
    consistent: bool,
    g0_membership: MembershipJson,
    g1_membership: MembershipJson,
    routes: Vec<RouteJson>,
}

fn pair_report(r: &CompatibilityReport) -> PairReport {
    PairReport {
        verdict: r.verdict.as_str(),
        consistent: r.consistent,
        g0_membership: (&r.single[0]).into(),
        g1_membership: (&r.single[1]).into(),
        routes: r
            .routes
            .iter()
            .map(|x| RouteJson {
                route: x.route.as_str(),
                residual_l2: x.residual_l2,
                residual_norm_partial_sums: x.verdict.partial_sums.clone(),
                verdict: x.verdict.verdict.as_str(),
                fit: x.verdict.growth.or(x.verdict.block_decay).map(Into::into),
                membership: (&x.verdict).into(),
            })
            .collect(),
    }
}

pub fn check_pair_cmd(settings: &Settings, zero: bool) -> Result<(), CliError> {
    let domain = settings.domain()?;
    let bases = match &domain {
        Domain::Disk { radius } => disk_bases(*radius, settings.modes(64)?)?,
        _ => mesh_bases(&domain.mesh(2)?, settings.modes(40)?)?,
    };
    let b = CompatibilityBases::from_array(&bases);
    let param = bases[0].boundary();
    let pair = if zero {
        TracePair::zeros(param)
    } else if let Some(p) = &settings.input {
        let f: PairFile = io::read_json(p)?;
        TracePair::new(param, f.g0, f.g1).map_err(|e| CliError::Config(e.to_string()))?
    } else {
        let f0 = NamedFunction::parse(settings.function.as_deref().unwrap_or("const:0"))?;
        let f1 = NamedFunction::parse(settings.function1.as_deref().unwrap_or("const:0"))?;
        TracePair::new(param, f0.sample(param), f1.sample(param))?
    };
    let report = check_pair(&pair, &b, settings.rules()?)?;
    log::info!("{}", steklov_core::compatibility::summarize(&report));
    if !report.consistent {
        log::warn!("routes disagree");
    }
    io::emit(
        settings.out.as_deref(),
        &io::to_json(&pair_report(&report))?,
    )
}

#[derive(Debug, Serialize)]
struct VertexJson {
    vertex: usize,
    arclength: f64,
    delta: f64,
    sigma_min: Vec<f64>,
    integral: Vec<f64>,
    fit: Option<FitJson>,
    limit: String,
}

fn limit_str(l: Limit) -> String {
    match l {
        Limit::Finite(v) => format!("finite({v:e})"),
        Limit::Divergent => "divergent".into(),
        Limit::Undecided => "undecided".into(),
    }
}

pub fn check_polygon(settings: &Settings) -> Result<(), CliError> {
    let param = settings
        .domain()?
        .polygon_boundary(settings.samples.unwrap_or(256))?;
    let g = boundary_data(settings, &param)?;
    let delta = settings.delta.unwrap_or(0.25);
    let reports =
        vertex_compat_p2(&g, &param, delta).map_err(|e| CliError::Config(e.to_string()))?;
    let csv_out = settings
        .out
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    if csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["vertex", "arclength", "sigma_min", "integral"])
            .map_err(|e| CliError::Io(e.to_string()))?;
        for r in &reports {
            for (s, v) in &r.levels {
                w.write_record([
                    r.vertex.to_string(),
                    format!("{:.16e}", r.arclength),
                    format!("{s:.16e}"),
                    format!("{v:.16e}"),
                ])
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        return io::emit(
            settings.out.as_deref(),
            &w.into_inner().map_err(|e| CliError::Io(e.to_string()))?,
        );
    }
    let json: Vec<VertexJson> = reports
        .iter()
        .map(|r| VertexJson {
            vertex: r.vertex,
            arclength: r.arclength,
            delta: r.delta,
            sigma_min: r.levels.iter().map(|l| l.0).collect(),
            integral: r.levels.iter().map(|l| l.1).collect(),
            fit: r.fit.map(Into::into),
            limit: limit_str(r.limit),
        })
        .collect();
    io::emit(settings.out.as_deref(), &io::to_json(&json)?)
}

#[derive(Debug, Serialize)]
struct EstimateJson {
    levels: Vec<(usize, f64)>,
    limit: String,
    growth: Option<FitJson>,
}

impl From<&SeminormEstimate> for EstimateJson {
    fn from(e: &SeminormEstimate) -> Self {
        Self {
            levels: e.levels.clone(),
            limit: limit_str(e.limit),
            growth: e.growth.map(Into::into),
        }
    }
}

pub fn check_geymonat(settings: &Settings) -> Result<(), CliError> {
    let domain = settings.domain()?;
    let base = settings.samples.unwrap_or(8);
    let params = [1, 2, 4, 8]
        .iter()
        .map(|f| domain.polygon_boundary(base * f))
        .collect::<Result<Vec<_>, _>>()?;
    let f0 = NamedFunction::parse(settings.function.as_deref().unwrap_or("const:0"))?;
    let f1 = NamedFunction::parse(settings.function1.as_deref().unwrap_or("const:0"))?;
    let c = centroid(&params[0]);
    let r = geymonat_check(&params, |n| f0.eval(n, c), |n| f1.eval(n, c))?;
    #[derive(Serialize)]
    struct Out {
        total: EstimateJson,
        components: [EstimateJson; 2],
    }
    let out = Out {
        total: (&r.total).into(),
        components: [(&r.components[0]).into(), (&r.components[1]).into()],
    };
    io::emit(settings.out.as_deref(), &io::to_json(&out)?)
}

pub fn oracle(settings: &Settings) -> Result<(), CliError> {
    let radius = match settings.domain()? {
        Domain::Disk { radius } => radius,
        _ => return Err(CliError::Config("the oracle command works on disks".into())),
    };
    let s = settings.s.unwrap_or(0.5);
    if !(s > 0.0 && s < 1.0) {
        return Err(CliError::Config("--s must lie in (0, 1)".into()));
    }
    let f = NamedFunction::parse(settings.function.as_deref().unwrap_or("cos:1"))?;
    let sizes = [64usize, 128, 256, 512];
    let params = sizes
        .iter()
        .map(|&n| build_disk(radius, n).map(|d| d.1))
        .collect::<Result<Vec<_>, _>>()?;
    let c = steklov_core::Point::default();
    let gag = gagliardo_seminorm(&params, |n| f.eval(n, c), s, 2.0)?;
    let node_at = |t: f64| {
        let th = t / radius;
        let p = steklov_core::Point::new(radius * th.cos(), radius * th.sin());
        steklov_core::BoundaryNode {
            s: t,
            point: p,
            tangent: p,
            normal: p.scale(1.0 / radius),
            weight: 0.0,
            edge: 0,
            local: 0.0,
        }
    };
    let besov = besov_diff_seminorm(
        |t| f.eval(&node_at(t), c),
        std::f64::consts::TAU * radius,
        s,
        2.0,
        1,
        &sizes,
    )?;
    let spectrum = laplace_steklov_disk(radius, settings.modes(128)?)?;
    let coeffs = boundary_expand(
        &BoundarySamples::new(spectrum.boundary(), f.sample(spectrum.boundary()))?,
        &spectrum,
        spectrum.len(),
    )?;
    let hs = classify_coefficients(&coeffs, &spectrum, WeightScheme::HsA(s), settings.rules()?)?;
    #[derive(Serialize)]
    struct Out {
        s: f64,
        gagliardo: EstimateJson,
        besov_difference: EstimateJson,
        spectral_norm: f64,
        spectral_membership: MembershipJson,
    }
    let out = Out {
        s,
        gagliardo: (&gag).into(),
        besov_difference: (&besov).into(),
        spectral_norm: weighted_norm(&coeffs, &spectrum, WeightScheme::HsA(s))?,
        spectral_membership: (&hs).into(),
    };
    io::emit(settings.out.as_deref(), &io::to_json(&out)?)
}

pub fn weyl(settings: &Settings) -> Result<(), CliError> {
    let s = settings
        .domain()?
        .solve(basis_problem(settings)?, settings.modes(200)?)?;
    let fit = weyl_fit(&s, settings.j_min.unwrap_or(DEFAULT_J_MIN))?;
    #[derive(Serialize)]
    struct Out {
        basis: String,
        exponent: f64,
        constant: f64,
        normalized_constant: f64,
        fit_range: (usize, usize),
        r_squared: f64,
    }
    let out = Out {
        basis: s.id.clone(),
        exponent: fit.exponent,
        constant: fit.constant,
        normalized_constant: fit.normalized_constant,
        fit_range: fit.fit_range,
        r_squared: fit.r_squared,
    };
    io::emit(settings.out.as_deref(), &io::to_json(&out)?)
}

pub fn hadamard(settings: &Settings) -> Result<(), CliError> {
    let n = settings.modes(100)?;
    let s = laplace_steklov_disk(1.0, n)?;
    let c = hadamard_coefficients(n, &s)?;
    let rules = settings.rules()?;
    let l2 = classify_coefficients(&c, &s, WeightScheme::HsA(0.0), rules)?;
    let h12 = classify_coefficients(&c, &s, WeightScheme::HsA(0.5), rules)?;
    #[derive(Serialize)]
    #[allow(non_snake_case)]
    struct Out {
        N: usize,
        L2: &'static str,
        H12A: &'static str,
        growth_exponent: Option<f64>,
        details: [MembershipJson; 2],
    }
    let out = Out {
        N: n,
        L2: l2.verdict.as_str(),
        H12A: h12.verdict.as_str(),
        growth_exponent: h12.growth_exponent(),
        details: [(&l2).into(), (&h12).into()],
    };
    io::emit(settings.out.as_deref(), &io::to_json(&out)?)
}

pub fn reproduce(settings: &Settings) -> Result<(), CliError> {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        println!("{}", o.line());
    }
    if let Some(p) = &settings.out {
        io::emit(Some(p), &io::to_json(&outcomes)?)?;
    }
    let failed: Vec<usize> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("failing criteria: {failed:?}")))
    }
}
