use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Eigenpairs of `A x = λ B x`, ascending, with `xᵢᵀ B xⱼ = δᵢⱼ`.
#[derive(Debug, Clone)]
pub struct PencilSolution {
    pub values: Vec<f64>,
    /// One column per eigenvalue.
    pub vectors: DMatrix<f64>,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Diagonal of the Cholesky factor, or the failing pivot index.
pub fn cholesky_pivots(m: &DMatrix<f64>) -> core::result::Result<Vec<f64>, usize> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(j);
        }
        let d = crate::math::sqrt(d);
        l[(j, j)] = d;
        pivots.push(d);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(pivots)
}

/// Solve the symmetric-definite pencil `(a, b)` with `b` SPD: Cholesky
/// `b = L Lᵀ`, eigendecomposition of `L⁻¹ a L⁻ᵀ`, back-transform.
pub fn solve_definite_pencil(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    label: &str,
) -> Result<PencilSolution> {
    let n = a.nrows();
    if n == 0 {
        return Ok(PencilSolution {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let chol =
        nalgebra::Cholesky::new(symmetrize(b)).ok_or_else(|| Error::NotPositiveDefinite {
            block: String::from(label),
            detail: match cholesky_pivots(b) {
                Err(j) => format!("mass factorization fails at pivot {j}"),
                Ok(_) => String::from("mass factorization failed"),
            },
        })?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&symmetrize(a))
        .ok_or_else(|| Error::Solver(format!("{label}: triangular solve failed")))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Solver(format!("{label}: triangular solve failed")))?;
    let (values, z) = symmetric_eigen(&c);
    let lt = l.transpose();
    let vectors = lt
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::Solver(format!("{label}: back-substitution failed")))?;
    Ok(PencilSolution { values, vectors })
}
