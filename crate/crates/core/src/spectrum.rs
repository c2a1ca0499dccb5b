//! Problem descriptions, the discretization container shared by the disk and
//! finite element paths, and the [`Spectrum`] they produce.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::invalid;
use crate::geometry::{BoundaryParam, ElementType};
use crate::linalg::{dot, CsrMatrix};
use crate::{math, Error, Result};

/// Relative tolerance used to group (numerically) equal eigenvalues.
pub const MULTIPLICITY_RTOL: f64 = 1e-6;
/// Eigenvalues within this fraction of the spectral scale are reported as 0.
pub const ZERO_CLAMP: f64 = 1e-9;

/// Member `(k, ℓ, β)` of the polyharmonic Steklov family: find `u` with
/// `∫ Dᵏu:Dᵏφ + Σ_{j≠ℓ} β_j ∫_∂ ∂ʲu ∂ʲφ = σ ∫_∂ ∂ˡu ∂ˡφ` for all `φ`,
/// normal derivatives of order `j` on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SteklovProblemSpec {
    pub k: usize,
    pub ell: usize,
    beta: Vec<f64>,
}

impl SteklovProblemSpec {
    /// All boundary weights equal to one.
    pub fn new(k: usize, ell: usize) -> Result<Self> {
        Self::with_beta(k, ell, vec![1.0; k])
    }

    /// `beta[j]` weights the `j`-th trace term; `beta[ell]` is ignored.
    pub fn with_beta(k: usize, ell: usize, mut beta: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("order k must be at least 1"));
        }
        if ell >= k {
            return Err(invalid(format!(
                "trace index {ell} must be below the order {k}"
            )));
        }
        if beta.len() != k {
            return Err(invalid(format!(
                "expected {k} beta weights, got {}",
                beta.len()
            )));
        }
        beta[ell] = 1.0;
        if beta.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(invalid("beta weights must be positive and finite"));
        }
        Ok(Self { k, ell, beta })
    }

    pub fn beta(&self, j: usize) -> f64 {
        self.beta[j]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }
}

/// Which eigenvalue problem a [`Spectrum`] solves.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Steklov(SteklovProblemSpec),
    /// Biharmonic problem posed on `{γ_ℓ w = 0}` with the `m`-th trace on the
    /// right-hand side and no boundary terms on the left.
    Auxiliary {
        ell: usize,
        m: usize,
    },
}

impl ProblemKind {
    pub fn auxiliary(ell: usize, m: usize) -> Result<Self> {
        if ell > 1 || m > 1 || ell == m {
            return Err(invalid("auxiliary problems need ℓ, m ∈ {0, 1} with ℓ ≠ m"));
        }
        Ok(ProblemKind::Auxiliary { ell, m })
    }

    /// Differential order `k`.
    pub fn order(&self) -> usize {
        match self {
            ProblemKind::Steklov(s) => s.k,
            ProblemKind::Auxiliary { .. } => 2,
        }
    }

    /// Trace index appearing on the right-hand side.
    pub fn rhs_trace(&self) -> usize {
        match self {
            ProblemKind::Steklov(s) => s.ell,
            ProblemKind::Auxiliary { m, .. } => *m,
        }
    }

    /// Trace pinned to zero, if any.
    pub fn constrained_trace(&self) -> Option<usize> {
        match self {
            ProblemKind::Steklov(_) => None,
            ProblemKind::Auxiliary { ell, .. } => Some(*ell),
        }
    }

    /// Weight of the `j`-th boundary term in the inner product used for
    /// normalization. With unit weights this is the `H^k_∂` product.
    pub fn inner_weight(&self, j: usize) -> f64 {
        match self {
            ProblemKind::Steklov(s) => s.beta(j),
            ProblemKind::Auxiliary { .. } => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemKind::Steklov(s) => {
                let b: Vec<String> = s.beta.iter().map(|b| format!("{b}")).collect();
                format!("k={}/l={}/beta=[{}]", s.k, s.ell, b.join(","))
            }
            ProblemKind::Auxiliary { ell, m } => format!("aux/l={ell}/m={m}"),
        }
    }
}

/// Angular factor of a modal basis function on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// Contiguous DOF range for angular mode `n` with the given trigonometric factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    pub n: usize,
    pub trig: Trig,
    pub offset: usize,
    pub len: usize,
}

impl ModeBlock {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// How degrees of freedom are organized.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Disk: block-diagonal in angular modes.
    Modal { radius: f64, blocks: Vec<ModeBlock> },
    /// Mesh-based finite elements.
    Nodal {
        element: ElementType,
        vertices: usize,
    },
}

/// A linear constraint `Σ c_i u_i = 0`. Constraints of one problem have disjoint supports.
pub type Constraint = Vec<(usize, f64)>;

/// Everything a solver needs from a discretization of order `k`: the
/// volume form `∫ Dᵏu:Dᵏv`, boundary masses `∫_∂ γ_m u γ_m v`, and the
/// sampling operators `γ_m` onto the boundary nodes.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub label: String,
    pub order: usize,
    pub dofs: usize,
    pub boundary: BoundaryParam,
    pub volume: CsrMatrix,
    pub boundary_mass: Vec<CsrMatrix>,
    pub trace_ops: Vec<CsrMatrix>,
    pub layout: Layout,
}

impl Discretization {
    pub fn check_problem(&self, problem: &ProblemKind) -> Result<()> {
        if problem.order() != self.order {
            return Err(invalid(format!(
                "problem of order {} on a discretization of order {}",
                problem.order(),
                self.order
            )));
        }
        Ok(())
    }

    /// Left-hand side matrix.
    pub fn lhs(&self, problem: &ProblemKind) -> CsrMatrix {
        match problem {
            ProblemKind::Steklov(s) => (0..s.k)
                .filter(|&j| j != s.ell)
                .fold(self.volume.clone(), |acc, j| {
                    acc.add(&self.boundary_mass[j].scaled(s.beta(j)))
                }),
            ProblemKind::Auxiliary { .. } => self.volume.clone(),
        }
    }

    /// Right-hand side matrix.
    pub fn rhs(&self, problem: &ProblemKind) -> CsrMatrix {
        self.boundary_mass[problem.rhs_trace()].clone()
    }

    /// Gram matrix of the normalization inner product.
    pub fn inner(&self, problem: &ProblemKind) -> CsrMatrix {
        (0..self.order).fold(self.volume.clone(), |acc, j| {
            acc.add(&self.boundary_mass[j].scaled(problem.inner_weight(j)))
        })
    }

    /// Samples of `γ_m u` at the boundary nodes.
    pub fn trace(&self, m: usize, u: &[f64]) -> Vec<f64> {
        self.trace_ops[m].mul_vec(u)
    }

    pub fn modal_blocks(&self) -> Option<&[ModeBlock]> {
        match &self.layout {
            Layout::Modal { blocks, .. } => Some(blocks),
            Layout::Nodal { .. } => None,
        }
    }
}

/// Numbers collected while solving, exported alongside the spectrum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveDiagnostics {
    /// Eigenvalues before the zero clamp, in the final order.
    pub raw_eigenvalues: Vec<f64>,
    pub reduced_dim: usize,
    pub interior_dim: usize,
    pub constrained_dim: usize,
    /// Angular modes whose right-hand side vanished (disk only).
    pub modes_without_eigenvalue: Vec<usize>,
    /// Number of eigenvalues certified to be the smallest ones (disk sweeps).
    pub certified: usize,
}

/// Ordered eigenpairs of one problem with normalized eigenvectors and their
/// sampled boundary traces.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub id: String,
    pub problem: ProblemKind,
    pub discretization: Arc<Discretization>,
    pub eigenvalues: Vec<f64>,
    /// Normalized in the problem's inner product (`H^k_∂` for unit weights).
    pub eigenvectors: Vec<Vec<f64>>,
    /// `traces[m][j]` samples `γ_m(u_j)` at the boundary nodes.
    pub traces: Vec<Vec<Vec<f64>>>,
    pub groups: Vec<Range<usize>>,
    pub constraints: Vec<Constraint>,
    pub diagnostics: SolveDiagnostics,
    inner: CsrMatrix,
}

impl Spectrum {
    /// Sort, clamp, normalize, sign-fix and sample a set of raw eigenpairs.
    pub(crate) fn assemble(
        disc: Arc<Discretization>,
        problem: ProblemKind,
        mut pairs: Vec<(f64, Vec<f64>)>,
        constraints: Vec<Constraint>,
        mut diagnostics: SolveDiagnostics,
    ) -> Result<Self> {
        disc.check_problem(&problem)?;
        // stable sort keeps the solver's order among exact ties
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let scale = pairs.iter().fold(0.0f64, |m, p| m.max(math::abs(p.0)));
        let inner = disc.inner(&problem);
        let rhs_trace = problem.rhs_trace();
        // eigenvectors of modal discretizations touch a single block
        let transposed: Vec<CsrMatrix> = disc.trace_ops.iter().map(CsrMatrix::transpose).collect();
        let sample = |m: usize, v: &[f64]| CsrMatrix::mul_sparse_vec(&transposed[m], v);
        let mut eigenvalues = Vec::with_capacity(pairs.len());
        let mut eigenvectors = Vec::with_capacity(pairs.len());
        diagnostics.raw_eigenvalues.clear();
        for (sigma, mut v) in pairs {
            if sigma < -1e-9 * scale.max(1.0) {
                return Err(Error::Solver(format!("negative eigenvalue {sigma:.3e}")));
            }
            diagnostics.raw_eigenvalues.push(sigma);
            let sigma = if math::abs(sigma) <= ZERO_CLAMP * scale {
                0.0
            } else {
                sigma.max(0.0)
            };
            let norm2 = inner.bilinear(&v, &v);
            if !(norm2 > 0.0) {
                return Err(Error::Solver("eigenvector with zero norm".into()));
            }
            let s = 1.0 / math::sqrt(norm2);
            v.iter_mut().for_each(|x| *x *= s);
            let trace = sample(rhs_trace, &v);
            if let Some(first) = trace.iter().find(|t| math::abs(**t) > 1e-10) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            eigenvalues.push(sigma);
            eigenvectors.push(v);
        }
        let traces = (0..disc.order)
            .map(|m| eigenvectors.iter().map(|v| sample(m, v)).collect())
            .collect();
        let groups = multiplicity_groups(&eigenvalues, MULTIPLICITY_RTOL);
        let id = format!("{}/{}", disc.label, problem.label());
        Ok(Self {
            id,
            problem,
            discretization: disc,
            eigenvalues,
            eigenvectors,
            traces,
            groups,
            constraints,
            diagnostics,
            inner,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn boundary(&self) -> &BoundaryParam {
        &self.discretization.boundary
    }

    /// Inner product used for normalization (the `H^k_∂` product for unit weights).
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.inner.bilinear(u, v)
    }

    /// `û_j = sqrt(1 + σ_j) γ_r(u_j)` with `r` the right-hand-side trace index.
    pub fn normalized_trace(&self, j: usize) -> Vec<f64> {
        let s = math::sqrt(1.0 + self.eigenvalues[j]);
        self.traces[self.problem.rhs_trace()][j]
            .iter()
            .map(|t| s * t)
            .collect()
    }

    /// Max-norm deviation from the identity of the eigenvector Gram matrix
    /// (first `n` eigenvectors) in the normalization inner product.
    pub fn gram_deviation(&self, n: usize) -> f64 {
        let n = n.min(self.len());
        let mut worst = 0.0f64;
        for i in 0..n {
            let ai = self.inner.mul_vec(&self.eigenvectors[i]);
            for j in 0..n {
                let g = dot(&ai, &self.eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(math::abs(g - target));
            }
        }
        worst
    }

    /// Max-norm deviation from the identity of the discrete `L²(∂Ω)` Gram
    /// matrix of the first `n` normalized traces.
    pub fn trace_gram_deviation(&self, n: usize) -> f64 {
        let n = n.min(self.len());
        let hats: Vec<Vec<f64>> = (0..n).map(|j| self.normalized_trace(j)).collect();
        let b = self.boundary();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let g = b.l2_inner(&hats[i], &hats[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(math::abs(g - target));
            }
        }
        worst
    }

    /// Relative residual of the discrete weak equation for every pair:
    /// `‖P(A u − σ B u)‖ / ((‖A‖ + σ‖B‖) ‖u‖)` with `P` projecting onto the
    /// admissible test functions.
    pub fn weak_residuals(&self) -> Vec<f64> {
        let a = self.discretization.lhs(&self.problem);
        let b = self.discretization.rhs(&self.problem);
        let (na, nb) = (a.max_abs(), b.max_abs());
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(sigma, u)| {
                let au = a.mul_vec(u);
                let bu = b.mul_vec(u);
                let mut r: Vec<f64> = au.iter().zip(&bu).map(|(x, y)| x - sigma * y).collect();
                for c in &self.constraints {
                    let cc: f64 = c.iter().map(|(_, v)| v * v).sum();
                    let cr: f64 = c.iter().map(|(i, v)| v * r[*i]).sum();
                    for (i, v) in c {
                        r[*i] -= cr / cc * v;
                    }
                }
                let rn = math::sqrt(dot(&r, &r));
                let un = math::sqrt(dot(u, u));
                rn / ((na + sigma * nb) * un)
            })
            .collect()
    }

    /// Rayleigh quotient `uᵀAu / uᵀBu` of the `j`-th eigenvector.
    pub fn rayleigh_quotient(&self, j: usize) -> f64 {
        let a = self.discretization.lhs(&self.problem);
        let b = self.discretization.rhs(&self.problem);
        let u = &self.eigenvectors[j];
        a.bilinear(u, u) / b.bilinear(u, u)
    }

    /// Angular mode of the `j`-th eigenfunction on a modal disk discretization.
    pub fn mode_of(&self, j: usize) -> Option<(usize, Trig)> {
        let blocks = self.discretization.modal_blocks()?;
        let v = &self.eigenvectors[j];
        blocks
            .iter()
            .map(|b| {
                (
                    b,
                    v[b.range()]
                        .iter()
                        .fold(0.0f64, |m, x| m.max(math::abs(*x))),
                )
            })
            .fold(None, |best: Option<(&ModeBlock, f64)>, (b, m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((b, m)),
            })
            .map(|(b, _)| (b.n, b.trig))
    }

    /// Group index of every eigenvalue.
    pub fn group_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (g, r) in self.groups.iter().enumerate() {
            for j in r.clone() {
                out[j] = g;
            }
        }
        out
    }

    /// Keep only the first `n` eigenpairs.
    pub fn truncate(&mut self, n: usize) {
        if n >= self.len() {
            return;
        }
        self.eigenvalues.truncate(n);
        self.eigenvectors.truncate(n);
        for t in &mut self.traces {
            t.truncate(n);
        }
        self.diagnostics.raw_eigenvalues.truncate(n);
        self.groups = multiplicity_groups(&self.eigenvalues, MULTIPLICITY_RTOL);
    }
}

/// Index ranges of consecutive eigenvalues that agree within `rtol` (relative).
pub fn multiplicity_groups(values: &[f64], rtol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            math::abs(b - a) > rtol * math::abs(a).max(math::abs(b))
        };
        if split {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_uses_relative_tolerance() {
        let g = multiplicity_groups(&[0.0, 1.0, 1.0 + 1e-9, 2.0, 2.0 + 1e-3], 1e-6);
        assert_eq!(g, vec![0..1, 1..3, 3..4, 4..5]);
        assert!(multiplicity_groups(&[], 1e-6).is_empty());
        assert_eq!(multiplicity_groups(&[0.0, 0.0], 1e-6), vec![0..2]);
    }

    #[test]
    fn problem_spec_validation() {
        assert!(SteklovProblemSpec::new(2, 2).is_err());
        assert!(SteklovProblemSpec::new(0, 0).is_err());
        assert!(SteklovProblemSpec::with_beta(2, 0, vec![1.0, 0.0]).is_err());
        assert!(SteklovProblemSpec::with_beta(2, 0, vec![1.0]).is_err());
        let s = SteklovProblemSpec::with_beta(2, 0, vec![-5.0, 3.0]).unwrap();
        assert_eq!(s.beta(0), 1.0);
        assert_eq!(s.beta(1), 3.0);
        assert!(ProblemKind::auxiliary(0, 0).is_err());
        assert!(ProblemKind::auxiliary(1, 0).is_ok());
    }
}
