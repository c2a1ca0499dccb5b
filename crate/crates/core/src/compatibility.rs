//! Compatibility of boundary data pairs `(g0, g1)` with the total trace of
//! `H²`: the Steklov-basis criterion, the vertex condition on polygons and
//! the rotated-gradient (Geymonat) condition, all for `p = 2`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::besov::{classify_levels, estimate, gagliardo_sum, Limit, SeminormEstimate};
use crate::disk_spectral::{default_boundary_samples, disk_discretization, solve_disk};
use crate::error::invalid;
use crate::fem;
use crate::fit::LineFit;
use crate::geometry::{BoundaryNode, BoundaryParam, BoundarySamples, Mesh2D, Point};
use crate::trace_spaces::{
    boundary_expand, classify_coefficients, MembershipRules, MembershipVerdict, TraceCoefficients,
    Verdict, WeightScheme,
};
use crate::{math, Discretization, Error, ProblemKind, Result, Spectrum, SteklovProblemSpec};

/// Boundary values `g0` and normal derivatives `g1` on one sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePair {
    pub g0: BoundarySamples,
    pub g1: BoundarySamples,
}

impl TracePair {
    pub fn new(param: &BoundaryParam, g0: Vec<f64>, g1: Vec<f64>) -> Result<Self> {
        Ok(Self {
            g0: BoundarySamples::new(param, g0)?,
            g1: BoundarySamples::new(param, g1)?,
        })
    }

    pub fn zeros(param: &BoundaryParam) -> Self {
        Self {
            g0: BoundarySamples::zeros(param),
            g1: BoundarySamples::zeros(param),
        }
    }

    /// `(γ0 u, γ1 u)` of a field on an order-2 discretization.
    pub fn of_field(disc: &Discretization, u: &[f64]) -> Result<Self> {
        if disc.order != 2 || u.len() != disc.dofs {
            return Err(invalid(
                "trace pairs need a field of an order-2 discretization",
            ));
        }
        Self::new(&disc.boundary, disc.trace(0, u), disc.trace(1, u))
    }

    pub fn scaled_sum(&self, a: f64, other: &TracePair, b: f64) -> TracePair {
        let mix = |x: &BoundarySamples, y: &BoundarySamples| BoundarySamples {
            values: x
                .values
                .iter()
                .zip(&y.values)
                .map(|(p, q)| a * p + b * q)
                .collect(),
        };
        TracePair {
            g0: mix(&self.g0, &other.g0),
            g1: mix(&self.g1, &other.g1),
        }
    }
}

/// The four bases the `k = 2` criterion needs, on one boundary sampling.
#[derive(Debug, Clone, Copy)]
pub struct CompatibilityBases<'a> {
    /// `k = 2, ℓ = 0` Steklov spectrum.
    pub value: &'a Spectrum,
    /// `k = 2, ℓ = 1` Steklov spectrum.
    pub normal: &'a Spectrum,
    /// Auxiliary `(ℓ, m) = (0, 1)`.
    pub aux_01: &'a Spectrum,
    /// Auxiliary `(ℓ, m) = (1, 0)`.
    pub aux_10: &'a Spectrum,
}

impl<'a> CompatibilityBases<'a> {
    /// From `[value, normal, aux_01, aux_10]`, as returned by [`disk_bases`] and [`mesh_bases`].
    pub fn from_array(s: &'a [Spectrum; 4]) -> Self {
        Self {
            value: &s[0],
            normal: &s[1],
            aux_01: &s[2],
            aux_10: &s[3],
        }
    }

    fn validate(&self) -> Result<()> {
        let is = |s: &Spectrum, k: usize, l: usize| matches!(&s.problem, ProblemKind::Steklov(p) if p.k == k && p.ell == l);
        if !is(self.value, 2, 0) || !is(self.normal, 2, 1) {
            return Err(invalid(
                "compatibility needs the k = 2 spectra for ℓ = 0 and ℓ = 1",
            ));
        }
        if self.aux_01.problem != (ProblemKind::Auxiliary { ell: 0, m: 1 })
            || self.aux_10.problem != (ProblemKind::Auxiliary { ell: 1, m: 0 })
        {
            return Err(invalid(
                "compatibility needs the auxiliary spectra (0, 1) and (1, 0)",
            ));
        }
        let b = self.value.boundary();
        for s in [self.normal, self.aux_01, self.aux_10] {
            if s.boundary() != b {
                return Err(Error::BasisMismatch(format!(
                    "`{}` lives on a different boundary sampling",
                    s.id
                )));
            }
        }
        Ok(())
    }
}

fn compatibility_problems() -> Result<[ProblemKind; 4]> {
    Ok([
        ProblemKind::Steklov(SteklovProblemSpec::new(2, 0)?),
        ProblemKind::Steklov(SteklovProblemSpec::new(2, 1)?),
        ProblemKind::auxiliary(0, 1)?,
        ProblemKind::auxiliary(1, 0)?,
    ])
}

/// The four spectra on one modal disk discretization with angular modes `0..=n_max`.
pub fn disk_bases(radius: f64, n_max: usize) -> Result<[Spectrum; 4]> {
    let disc = Arc::new(disk_discretization(
        radius,
        2,
        n_max,
        default_boundary_samples(n_max),
    )?);
    let [a, b, c, d] = compatibility_problems()?;
    Ok([
        solve_disk(disc.clone(), a)?,
        solve_disk(disc.clone(), b)?,
        solve_disk(disc.clone(), c)?,
        solve_disk(disc, d)?,
    ])
}

/// The four spectra (`n_eigs` each) on one Hermite discretization of `mesh`.
pub fn mesh_bases(mesh: &Mesh2D, n_eigs: usize) -> Result<[Spectrum; 4]> {
    let disc = Arc::new(fem::discretize(mesh, 2)?);
    let [a, b, c, d] = compatibility_problems()?;
    Ok([
        fem::solve_problem(disc.clone(), a, n_eigs)?,
        fem::solve_problem(disc.clone(), b, n_eigs)?,
        fem::solve_problem(disc.clone(), c, n_eigs)?,
        fem::solve_problem(disc, d, n_eigs)?,
    ])
}

/// Which extension the residual is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// `γ1(E0 g0) − g1`, tested in the `(0, 1)` auxiliary basis.
    ValueExtension,
    /// `γ0(E1 g1) − g0`, tested in the `(1, 0)` auxiliary basis.
    NormalExtension,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::ValueExtension => "value-extension",
            Route::NormalExtension => "normal-extension",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RouteReport {
    pub route: Route,
    /// Residual coefficients in the auxiliary basis `ŵ_j`.
    pub residual: TraceCoefficients,
    /// Discrete `L²(∂Ω)` norm of the residual.
    pub residual_l2: f64,
    /// Summability of `Σ (1 + η_j) r_j²`.
    pub verdict: MembershipVerdict,
}

#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    /// `g0` in the `ℓ = 0` trace space and `g1` in the `ℓ = 1` trace space.
    pub single: [MembershipVerdict; 2],
    pub routes: Vec<RouteReport>,
    pub verdict: Verdict,
    /// False when one route says "in" and the other "out".
    pub consistent: bool,
}

/// Residual of one route as boundary samples.
pub fn route_residual(
    pair: &TracePair,
    bases: &CompatibilityBases<'_>,
    route: Route,
) -> Result<BoundarySamples> {
    bases.validate()?;
    let (source, target, spectrum, trace) = match route {
        Route::ValueExtension => (&pair.g0, &pair.g1, bases.value, 1),
        Route::NormalExtension => (&pair.g1, &pair.g0, bases.normal, 0),
    };
    let c = boundary_expand(source, spectrum, spectrum.len())?;
    let mut r: Vec<f64> = target.values.iter().map(|v| -v).collect();
    for (j, g) in c.coeffs.iter().enumerate() {
        let a = math::sqrt(1.0 + spectrum.eigenvalues[j]) * g;
        if a != 0.0 {
            r.iter_mut()
                .zip(&spectrum.traces[trace][j])
                .for_each(|(x, t)| *x += a * t);
        }
    }
    BoundarySamples::new(spectrum.boundary(), r)
}

/// Test `(g0, g1)` along both routes.
pub fn check_pair(
    pair: &TracePair,
    bases: &CompatibilityBases<'_>,
    rules: MembershipRules,
) -> Result<CompatibilityReport> {
    bases.validate()?;
    let single = [
        classify_coefficients(
            &boundary_expand(&pair.g0, bases.value, bases.value.len())?,
            bases.value,
            WeightScheme::HkA,
            rules,
        )?,
        classify_coefficients(
            &boundary_expand(&pair.g1, bases.normal, bases.normal.len())?,
            bases.normal,
            WeightScheme::HkA,
            rules,
        )?,
    ];
    let mut routes = Vec::with_capacity(2);
    for (route, aux) in [
        (Route::ValueExtension, bases.aux_01),
        (Route::NormalExtension, bases.aux_10),
    ] {
        let r = route_residual(pair, bases, route)?;
        let residual = boundary_expand(&r, aux, aux.len())?;
        let verdict = classify_coefficients(&residual, aux, WeightScheme::HkA, rules)?;
        let residual_l2 = r.l2_norm(aux.boundary());
        routes.push(RouteReport {
            route,
            residual,
            residual_l2,
            verdict,
        });
    }
    let all: Vec<Verdict> = single
        .iter()
        .map(|v| v.verdict)
        .chain(routes.iter().map(|r| r.verdict.verdict))
        .collect();
    let verdict = if all.contains(&Verdict::Out) {
        Verdict::Out
    } else if all.iter().all(|v| *v == Verdict::In) {
        Verdict::In
    } else {
        Verdict::Undecided
    };
    let rv: Vec<Verdict> = routes.iter().map(|r| r.verdict.verdict).collect();
    let consistent = !(rv.contains(&Verdict::In) && rv.contains(&Verdict::Out));
    Ok(CompatibilityReport {
        single,
        routes,
        verdict,
        consistent,
    })
}

/// Log-integral estimate at one polygon corner.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexReport {
    pub vertex: usize,
    pub arclength: f64,
    pub delta: f64,
    /// `(σ_min, ∫_{σ_min}^δ |g_after(σ) − g_before(−σ)|² / σ dσ)`.
    pub levels: Vec<(f64, f64)>,
    pub fit: Option<LineFit>,
    pub limit: Limit,
}

const VERTEX_POINTS_PER_LEVEL: usize = 32;
const MIN_VERTEX_LEVELS: usize = 4;

fn vertex_report(
    vertex: usize,
    arclength: f64,
    delta: f64,
    levels: usize,
    diff: impl Fn(f64) -> f64,
) -> VertexReport {
    let mut out = Vec::with_capacity(levels);
    let mut acc = 0.0;
    let h = math::LN_2 / VERTEX_POINTS_PER_LEVEL as f64;
    for l in 1..=levels {
        // ∫ |Δ(σ)|² dσ/σ over [δ2^{-l}, δ2^{1-l}] with σ = e^t
        let top = math::ln(delta) - (l - 1) as f64 * math::LN_2;
        for i in 0..VERTEX_POINTS_PER_LEVEL {
            let t = top - (i as f64 + 0.5) * h;
            let d = diff(math::exp(t));
            acc += d * d * h;
        }
        out.push((delta * math::powi(0.5, l as i32), acc));
    }
    if levels < MIN_VERTEX_LEVELS {
        return VertexReport {
            vertex,
            arclength,
            delta,
            levels: out,
            fit: None,
            limit: Limit::Undecided,
        };
    }
    let x: Vec<f64> = out.iter().map(|(s, _)| math::ln(1.0 / s)).collect();
    let v: Vec<f64> = out.iter().map(|l| l.1).collect();
    let (limit, fit, _) = classify_levels(&x, &v, 0.1);
    VertexReport {
        vertex,
        arclength,
        delta,
        levels: out,
        fit,
        limit,
    }
}

fn corner_geometry(param: &BoundaryParam, delta: f64) -> Result<Vec<(f64, f64)>> {
    let corners = &param.vertex_positions;
    if corners.is_empty() || param.segments.is_empty() {
        return Err(invalid(
            "vertex conditions need a polygonal boundary with corners",
        ));
    }
    if !(delta > 0.0) {
        return Err(invalid("window δ must be positive"));
    }
    let m = corners.len();
    Ok((0..m)
        .map(|j| {
            let after = param.side_ranges[j];
            let before = param.side_ranges[(j + m - 1) % m];
            let d = delta.min(after.1 - after.0).min(before.1 - before.0);
            (corners[j], d)
        })
        .collect())
}

/// Vertex condition for data given per side as functions of position:
/// `g(side, point)`. Side `j` starts at corner `j`.
pub fn vertex_compat_p2_fn(
    param: &BoundaryParam,
    g: impl Fn(usize, Point) -> f64,
    delta: f64,
    levels: usize,
) -> Result<Vec<VertexReport>> {
    let geometry = corner_geometry(param, delta)?;
    let m = geometry.len();
    Ok(geometry
        .iter()
        .enumerate()
        .map(|(j, &(s, d))| {
            let before = (j + m - 1) % m;
            let diff = |sigma: f64| {
                let (pa, pb) = (param.point_at(s + sigma), param.point_at(s - sigma));
                match (pa, pb) {
                    (Some(a), Some(b)) => g(j, a) - g(before, b),
                    _ => 0.0,
                }
            };
            vertex_report(j, s, d, levels, diff)
        })
        .collect())
}

/// Vertex condition for sampled data, interpolated linearly along each side.
/// Only dyadic windows above the node spacing next to the corner are used.
pub fn vertex_compat_p2(
    samples: &BoundarySamples,
    param: &BoundaryParam,
    delta: f64,
) -> Result<Vec<VertexReport>> {
    samples.check(param)?;
    let geometry = corner_geometry(param, delta)?;
    let m = geometry.len();
    // (distance from the side start, value) per side
    let mut sides: Vec<Vec<(f64, f64)>> = vec![Vec::new(); m];
    for (node, v) in param.nodes.iter().zip(&samples.values) {
        let k = param.side_of(node.s);
        let start = param.side_ranges[k].0;
        let mut off = node.s - start;
        if off < 0.0 {
            off += param.total_length;
        }
        sides[k].push((off, *v));
    }
    for side in &mut sides {
        side.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let lengths: Vec<f64> = param.side_ranges.iter().map(|r| r.1 - r.0).collect();
    let interp = |side: &[(f64, f64)], x: f64| -> f64 {
        match side.iter().position(|p| p.0 >= x) {
            Some(0) => side[0].1,
            Some(i) => {
                let (a, b) = (side[i - 1], side[i]);
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            }
            None => side.last().map_or(0.0, |p| p.1),
        }
    };
    let mut out = Vec::with_capacity(m);
    for (j, &(s, d)) in geometry.iter().enumerate() {
        let before = (j + m - 1) % m;
        let (after_side, before_side) = (&sides[j], &sides[before]);
        if after_side.is_empty() || before_side.is_empty() {
            return Err(invalid("every side needs samples"));
        }
        let near = after_side[0]
            .0
            .max(lengths[before] - before_side[before_side.len() - 1].0);
        let mut levels = 0;
        while d * math::powi(0.5, levels as i32 + 1) >= near {
            levels += 1;
        }
        let diff =
            |sigma: f64| interp(after_side, sigma) - interp(before_side, lengths[before] - sigma);
        out.push(vertex_report(j, s, d, levels, diff));
    }
    Ok(out)
}

/// Rotated-gradient field `v = (∂_t g0) t + g1 ν` of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GeymonatReport {
    /// Gagliardo `B^{1/2}_2` integral of each component of `v`.
    pub components: [SeminormEstimate; 2],
    /// Sum of the component integrals.
    pub total: SeminormEstimate,
}

/// Tangential derivative of sampled data along each side (three-point
/// divided differences, one-sided at the side ends).
pub fn tangential_derivative(param: &BoundaryParam, values: &[f64]) -> Result<Vec<f64>> {
    if values.len() != param.len() {
        return Err(Error::BasisMismatch(
            "sample count differs from the boundary nodes".into(),
        ));
    }
    let n = param.len();
    let side: Vec<usize> = param.nodes.iter().map(|nd| param.side_of(nd.s)).collect();
    let closed = param.vertex_positions.is_empty();
    let neighbour = |i: usize, step: isize| -> Option<(usize, f64)> {
        let j = (i as isize + step).rem_euclid(n as isize) as usize;
        if !closed && side[j] != side[i] {
            return None;
        }
        let mut ds = param.nodes[j].s - param.nodes[i].s;
        if step > 0 && ds <= 0.0 {
            ds += param.total_length;
        }
        if step < 0 && ds >= 0.0 {
            ds -= param.total_length;
        }
        Some((j, ds))
    };
    let mut out = vec![0.0; n];
    for i in 0..n {
        let d = match (neighbour(i, -1), neighbour(i, 1)) {
            (Some((a, ha)), Some((b, hb))) => {
                // derivative of the parabola through the three points
                let (fa, f0, fb) = (values[a], values[i], values[b]);
                fa * hb / (ha * (hb - ha))
                    + f0 * -(ha + hb) / (ha * hb)
                    + fb * ha / (hb * (ha - hb))
            }
            (Some((a, ha)), None) => (values[a] - values[i]) / ha,
            (None, Some((b, hb))) => (values[b] - values[i]) / hb,
            (None, None) => return Err(invalid("a side carries a single sample")),
        };
        out[i] = d;
    }
    Ok(out)
}

/// `B^{1/2}_2` seminorm of `(∂_t g0) t + g1 ν` on a refining family of
/// samplings. Nodes sit strictly inside edges, so corners never carry a frame.
pub fn geymonat_check(
    params: &[BoundaryParam],
    g0: impl Fn(&BoundaryNode) -> f64,
    g1: impl Fn(&BoundaryNode) -> f64,
) -> Result<GeymonatReport> {
    if params.is_empty() {
        return Err(invalid("at least one sampling is needed"));
    }
    let mut lv: [Vec<(usize, f64)>; 2] = [Vec::new(), Vec::new()];
    let mut total = Vec::new();
    for param in params {
        let v0: Vec<f64> = param.nodes.iter().map(&g0).collect();
        let dt = tangential_derivative(param, &v0)?;
        let mut comps = [
            Vec::with_capacity(param.len()),
            Vec::with_capacity(param.len()),
        ];
        for (i, nd) in param.nodes.iter().enumerate() {
            let g = g1(nd);
            comps[0].push(dt[i] * nd.tangent.x + g * nd.normal.x);
            comps[1].push(dt[i] * nd.tangent.y + g * nd.normal.y);
        }
        let mut sum = 0.0;
        for c in 0..2 {
            let e = gagliardo_sum(param, &comps[c], 0.5, 2.0)?;
            lv[c].push((param.len(), e));
            sum += e;
        }
        total.push((param.len(), sum));
    }
    if total.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid("samplings must be strictly refining"));
    }
    let [a, b] = lv;
    Ok(GeymonatReport {
        components: [estimate(a), estimate(b)],
        total: estimate(total),
    })
}

/// Short description of a verdict set, for logs.
pub fn summarize(report: &CompatibilityReport) -> String {
    let routes: Vec<String> = report
        .routes
        .iter()
        .map(|r| format!("{}={}", r.route.as_str(), r.verdict.verdict.as_str()))
        .collect();
    format!(
        "single=({}, {}) {} => {}",
        report.single[0].verdict.as_str(),
        report.single[1].verdict.as_str(),
        routes.join(" "),
        report.verdict.as_str()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EdgeRule;

    fn square(m: usize) -> BoundaryParam {
        let c = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        BoundaryParam::polygon(&c, EdgeRule::Midpoints(m)).unwrap()
    }

    #[test]
    fn vertex_condition_matched_and_jump() {
        let p = square(4);
        let smooth = vertex_compat_p2_fn(&p, |_, q| q.x * q.x + q.y, 0.5, 20).unwrap();
        assert!(smooth.iter().all(|r| matches!(r.limit, Limit::Finite(_))));
        let jump =
            vertex_compat_p2_fn(&p, |side, _| if side == 1 { 1.0 } else { 0.0 }, 0.5, 20).unwrap();
        assert_eq!(jump[1].limit, Limit::Divergent);
        assert_eq!(jump[0].limit, Limit::Finite(0.0));
        let slope = jump[1].fit.unwrap().slope;
        assert!((slope - 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn sampled_vertex_condition_resolves_levels() {
        let p = square(256);
        let s = BoundarySamples::from_fn(&p, |nd| nd.point.x + 2.0 * nd.point.y);
        let r = vertex_compat_p2(&s, &p, 0.5).unwrap();
        assert!(r
            .iter()
            .all(|v| v.levels.len() >= 4 && matches!(v.limit, Limit::Finite(_))));
        let coarse = square(2);
        let s = BoundarySamples::from_fn(&coarse, |nd| nd.point.x);
        assert!(vertex_compat_p2(&s, &coarse, 0.5)
            .unwrap()
            .iter()
            .all(|v| v.limit == Limit::Undecided));
    }

    #[test]
    fn geymonat_linear_and_corner_jump() {
        let params: Vec<BoundaryParam> = [8, 16, 32, 64].iter().map(|&m| square(m)).collect();
        let lin = geymonat_check(&params, |nd| nd.point.x, |nd| nd.normal.x).unwrap();
        assert!(matches!(lin.total.limit, Limit::Finite(v) if v.abs() < 1e-20));
        let zero = geymonat_check(&params, |_| 0.0, |_| 0.0).unwrap();
        assert_eq!(zero.total.limit, Limit::Finite(0.0));
        let jump = geymonat_check(&params, |nd| nd.point.x, |_| 0.0).unwrap();
        assert!(jump.total.is_divergent(), "{:?}", jump.total);
    }
}
