//! Finite element Steklov solvers: P1 triangles for `k = 1`, bicubic Hermite
//! rectangles for `k = 2`.
//!
//! The right-hand side only sees boundary traces, so the pencil is reduced
//! onto the unknowns carrying the selected trace (a discrete
//! Dirichlet-to-Neumann map) and solved densely.

mod hermite;
mod p1;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::invalid;
use crate::geometry::{ElementType, Mesh2D};
use crate::linalg::{cholesky_pivots, solve_definite_pencil, CsrMatrix, SkylineCholesky};
use crate::spectrum::{Constraint, Layout, SolveDiagnostics};
use crate::{math, Discretization, Error, ProblemKind, Result, Spectrum, SteklovProblemSpec};

/// Gauss points per boundary edge: 4 for P1 and 6 for Hermite elements.
pub fn boundary_gauss_points(element: ElementType) -> usize {
    match element {
        ElementType::P1Triangle => 4,
        ElementType::C1Rectangle => 6,
    }
}

fn per_cell<T: Send>(mesh: &Mesh2D, f: impl Fn(&Mesh2D, usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..mesh.cells().len())
            .into_par_iter()
            .map(|c| f(mesh, c))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..mesh.cells().len()).map(|c| f(mesh, c)).collect()
    }
}

/// Volume form, boundary masses and trace operators of `mesh` for order `order`.
pub fn discretize(mesh: &Mesh2D, order: usize) -> Result<Discretization> {
    let element = mesh.element_type();
    match (order, element) {
        (1, ElementType::P1Triangle) | (2, ElementType::C1Rectangle) => {}
        _ => {
            return Err(invalid(format!(
                "order k = {order} cannot be discretized with {element:?} elements"
            )));
        }
    }
    let boundary = mesh.boundary_param(boundary_gauss_points(element))?;
    let (volume, trace_ops) = match element {
        ElementType::P1Triangle => (p1::volume(mesh), vec![p1::trace(mesh, &boundary)]),
        ElementType::C1Rectangle => {
            let [t0, t1] = hermite::traces(mesh, &boundary);
            (hermite::volume(mesh), vec![t0, t1])
        }
    };
    let weights = boundary.weights();
    let boundary_mass = trace_ops
        .iter()
        .map(|t| t.weighted_gram(&weights))
        .collect();
    let dofs = volume.rows();
    Ok(Discretization {
        label: format!(
            "{element:?}(cells={},vertices={})",
            mesh.cells().len(),
            mesh.vertices().len()
        ),
        order,
        dofs,
        boundary,
        volume,
        boundary_mass,
        trace_ops,
        layout: Layout::Nodal {
            element,
            vertices: mesh.vertices().len(),
        },
    })
}

/// Both sides of one eigenproblem on a nodal discretization.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub problem: ProblemKind,
    pub discretization: Arc<Discretization>,
    pub lhs: CsrMatrix,
    pub rhs: CsrMatrix,
    /// Unknowns on which `rhs` acts, ascending.
    pub rhs_support: Vec<usize>,
    /// Unknowns pinned to zero, ascending.
    pub constraint_set: Vec<usize>,
}

impl AssembledForms {
    pub fn new(disc: Arc<Discretization>, problem: ProblemKind) -> Result<Self> {
        disc.check_problem(&problem)?;
        let constraint_set = problem
            .constrained_trace()
            .map(|l| disc.trace_ops[l].nonzero_columns())
            .unwrap_or_default();
        let mut pinned = vec![false; disc.dofs];
        for &i in &constraint_set {
            pinned[i] = true;
        }
        let rhs_support = disc.trace_ops[problem.rhs_trace()]
            .nonzero_columns()
            .into_iter()
            .filter(|&i| !pinned[i])
            .collect();
        Ok(Self {
            lhs: disc.lhs(&problem),
            rhs: disc.rhs(&problem),
            problem,
            discretization: disc,
            rhs_support,
            constraint_set,
        })
    }
}

/// Forms of the Steklov problem `spec` on `mesh`.
pub fn assemble(spec: &SteklovProblemSpec, mesh: &Mesh2D) -> Result<AssembledForms> {
    let disc = Arc::new(discretize(mesh, spec.k)?);
    AssembledForms::new(disc, ProblemKind::Steklov(spec.clone()))
}

/// Boundary Schur complement of the pencil: `schur x = σ mass x` on the
/// right-hand-side support, interior unknowns recovered as `−recovery · x`.
#[derive(Debug, Clone)]
pub struct ReducedEigenproblem {
    pub forms: AssembledForms,
    pub schur: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub interior: Vec<usize>,
    /// `A_ii⁻¹ A_ib`, one column per support unknown.
    pub recovery: DMatrix<f64>,
    /// `max |S − Sᵀ|` before symmetrization.
    pub schur_asymmetry: f64,
    pub mass_pivots: Vec<f64>,
}

/// Eliminate the unknowns outside the right-hand-side support.
pub fn reduce(forms: AssembledForms) -> Result<ReducedEigenproblem> {
    let n = forms.discretization.dofs;
    let mut role = vec![0u8; n];
    for &i in &forms.constraint_set {
        role[i] = 2;
    }
    for &i in &forms.rhs_support {
        role[i] = 1;
    }
    let support = &forms.rhs_support;
    if support.is_empty() {
        return Err(Error::Solver("right-hand side has empty support".into()));
    }
    let interior: Vec<usize> = (0..n).filter(|&i| role[i] == 0).collect();
    let mass = forms.rhs.dense_block(support, support);
    let mass_pivots = cholesky_pivots(&mass).map_err(|j| Error::NotPositiveDefinite {
        block: String::from("boundary mass"),
        detail: format!("pivot {j} (unknown {}) is not positive", support[j]),
    })?;
    let a_bb = forms.lhs.dense_block(support, support);
    let (schur, recovery) = if interior.is_empty() {
        (a_bb, DMatrix::zeros(0, support.len()))
    } else {
        let a_ii = forms.lhs.submatrix(&interior, &interior);
        let factor = SkylineCholesky::factor(&a_ii, &interior_label(&forms.problem))?;
        let a_ib = forms.lhs.submatrix(&interior, support);
        let ni = interior.len();
        let cols = solve_columns(&factor, &a_ib, support.len(), ni);
        let mut x = DMatrix::zeros(ni, support.len());
        for (j, col) in cols.into_iter().enumerate() {
            x.set_column(j, &nalgebra::DVector::from_vec(col));
        }
        let coupling = forms.lhs.dense_block(support, &interior);
        (a_bb - coupling * &x, x)
    };
    let schur_asymmetry = (&schur - schur.transpose()).amax();
    let schur = (&schur + schur.transpose()) * 0.5;
    Ok(ReducedEigenproblem {
        forms,
        schur,
        mass,
        interior,
        recovery,
        schur_asymmetry,
        mass_pivots,
    })
}

fn interior_label(problem: &ProblemKind) -> String {
    let hint = match problem {
        ProblemKind::Steklov(s) if s.k == 2 && s.ell == 0 => {
            "; constants must stay in the trace unknowns"
        }
        _ => "",
    };
    format!("interior block of {}{hint}", problem.label())
}

fn solve_columns(
    factor: &SkylineCholesky,
    a_ib: &CsrMatrix,
    nb: usize,
    ni: usize,
) -> Vec<Vec<f64>> {
    // columns of A_ib as dense right-hand sides
    let mut cols = vec![vec![0.0; ni]; nb];
    for r in 0..ni {
        for (c, v) in a_ib.row(r) {
            cols[c][r] = v;
        }
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cols.par_iter().map(|b| factor.solve(b)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cols.iter().map(|b| factor.solve(b)).collect()
    }
}

/// Smallest `n_eigs` eigenpairs of a reduced problem.
pub fn solve_reduced(red: &ReducedEigenproblem, n_eigs: usize) -> Result<Spectrum> {
    let support = &red.forms.rhs_support;
    if n_eigs > support.len() {
        return Err(invalid(format!(
            "{n_eigs} eigenpairs requested, reduced dimension is {}",
            support.len()
        )));
    }
    let sol = solve_definite_pencil(&red.schur, &red.mass, "reduced pencil")?;
    let n = red.forms.discretization.dofs;
    let mut pairs = Vec::with_capacity(n_eigs);
    for j in 0..n_eigs {
        let y = sol.vectors.column(j);
        let mut u = vec![0.0; n];
        for (k, &i) in support.iter().enumerate() {
            u[i] = y[k];
        }
        if !red.interior.is_empty() {
            let xi = &red.recovery * y;
            for (k, &i) in red.interior.iter().enumerate() {
                u[i] = -xi[k];
            }
        }
        pairs.push((sol.values[j], u));
    }
    let constraints: Vec<Constraint> = red
        .forms
        .constraint_set
        .iter()
        .map(|&i| vec![(i, 1.0)])
        .collect();
    let diagnostics = SolveDiagnostics {
        reduced_dim: support.len(),
        interior_dim: red.interior.len(),
        constrained_dim: red.forms.constraint_set.len(),
        certified: n_eigs,
        ..SolveDiagnostics::default()
    };
    Spectrum::assemble(
        red.forms.discretization.clone(),
        red.forms.problem.clone(),
        pairs,
        constraints,
        diagnostics,
    )
}

/// Assemble, reduce and solve any problem on a shared discretization.
pub fn solve_problem(
    disc: Arc<Discretization>,
    problem: ProblemKind,
    n_eigs: usize,
) -> Result<Spectrum> {
    let forms = AssembledForms::new(disc, problem)?;
    let red = reduce(forms)?;
    solve_reduced(&red, n_eigs)
}

/// Steklov problem `spec` on `mesh`, smallest `n_eigs` pairs.
pub fn solve_steklov(spec: &SteklovProblemSpec, mesh: &Mesh2D, n_eigs: usize) -> Result<Spectrum> {
    let red = reduce(assemble(spec, mesh)?)?;
    solve_reduced(&red, n_eigs)
}

/// Auxiliary problem `(ℓ, m)` on a Hermite mesh, eigenvalues `η^{ℓ,m}`.
pub fn solve_auxiliary(mesh: &Mesh2D, ell: usize, m: usize, n_eigs: usize) -> Result<Spectrum> {
    let problem = ProblemKind::auxiliary(ell, m)?;
    let disc = Arc::new(discretize(mesh, 2)?);
    solve_problem(disc, problem, n_eigs)
}

/// Largest cell edge length.
pub fn mesh_size(mesh: &Mesh2D) -> f64 {
    let v = mesh.vertices();
    mesh.cells()
        .iter()
        .flat_map(|c| (0..c.len()).map(move |k| (c[k], c[(k + 1) % c.len()])))
        .map(|(a, b)| v[a].dist(v[b]))
        .fold(0.0, f64::max)
}

/// One row per mesh level of a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub h: f64,
    pub eigenvalues: Vec<f64>,
    /// Order estimate per eigenvalue from this level and the two before it.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub levels: Vec<ConvergenceLevel>,
    /// `(level, eigenvalue index)` where the sequence stops decreasing.
    pub non_monotone: Vec<(usize, usize)>,
}

/// Solve `spec` on nested meshes (coarse to fine) and estimate convergence
/// orders `log(|σ_{h1} − σ_{h2}| / |σ_{h2} − σ_{h3}|) / log(h1 / h2)`.
pub fn convergence_study(
    spec: &SteklovProblemSpec,
    meshes: &[Mesh2D],
    n_eigs: usize,
) -> Result<ConvergenceTable> {
    let mut levels: Vec<ConvergenceLevel> = Vec::with_capacity(meshes.len());
    let mut non_monotone = Vec::new();
    for (l, mesh) in meshes.iter().enumerate() {
        let s = solve_steklov(spec, mesh, n_eigs)?;
        let h = mesh_size(mesh);
        let mut orders = vec![None; n_eigs];
        if l >= 2 {
            let (a, b) = (&levels[l - 2], &levels[l - 1]);
            for j in 0..n_eigs {
                let d1 = a.eigenvalues[j] - b.eigenvalues[j];
                let d2 = b.eigenvalues[j] - s.eigenvalues[j];
                if math::abs(d2) > 0.0 && math::abs(d1) > 0.0 && b.h != h {
                    orders[j] = Some(math::ln(math::abs(d1) / math::abs(d2)) / math::ln(b.h / h));
                }
            }
        }
        if l >= 1 {
            let prev = &levels[l - 1];
            for j in 0..n_eigs {
                let tol = 1e-9 * prev.eigenvalues[j].max(1.0);
                if s.eigenvalues[j] > prev.eigenvalues[j] + tol {
                    non_monotone.push((l, j));
                }
            }
        }
        levels.push(ConvergenceLevel {
            h,
            eigenvalues: s.eigenvalues,
            orders,
        });
    }
    Ok(ConvergenceTable {
        levels,
        non_monotone,
    })
}
