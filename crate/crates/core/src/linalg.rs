//! Complex dense linear algebra helpers on top of nalgebra.
//!
//! nalgebra's complex SVD mis-converges on some small Hermitian inputs, so
//! everything here is routed through Hermitian eigendecompositions of Gram
//! (`m^H m`) or outer (`m m^H`) matrices, which are reliable. Squaring costs
//! half the floating-point range, which is irrelevant at the rank thresholds
//! used by this crate (1e-9 relative on desk-scale geometry).

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Frobenius norm of a complex matrix.
pub fn fro_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values of `m`, descending (square roots of the Gram eigenvalues).
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let mut ev: Vec<f64> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// Effective eigenvalue threshold for a requested singular-value tolerance:
/// squared tolerances below the Hermitian-eigen noise floor are clamped.
fn gram_threshold(tol: f64, lmax: f64) -> f64 {
    let rel = (tol * tol).max(64.0 * f64::EPSILON);
    rel * lmax
}

/// Numerical rank with relative tolerance `tol` on singular values.
pub fn rank(m: &DMatrix<C64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let ev = gram.symmetric_eigen().eigenvalues;
    let lmax = ev.iter().cloned().fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return 0;
    }
    let thr = gram_threshold(tol, lmax);
    ev.iter().filter(|&&l| l > thr).count()
}

/// Orthonormal basis (columns) of the column space of `m`, from the
/// eigenvectors of `m m^H` above the tolerance.
pub fn column_space(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let outer = m * m.adjoint();
    let eig = outer.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let thr = gram_threshold(tol, lmax);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > thr)
        .collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(i));
    }
    out
}

/// Orthonormal basis (columns) of the null space of `m` (right kernel), from
/// the eigenvectors of `m^H m` below the tolerance.
pub fn null_space(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let thr = if lmax <= 0.0 {
        f64::INFINITY
    } else {
        gram_threshold(tol, lmax)
    };
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] <= thr)
        .collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(i));
    }
    out
}

/// Euclidean-orthogonal projector `Q Q^H` onto the span of the orthonormal
/// columns `q`.
pub fn projector(q: &DMatrix<C64>) -> DMatrix<C64> {
    q * q.adjoint()
}

/// Distance between two subspaces given by orthonormal bases:
/// `||P_a - P_b||_F`, zero iff the spans agree.
pub fn subspace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    debug_assert_eq!(a.nrows(), b.nrows());
    fro_norm(&(projector(a) - projector(b)))
}

/// Whether two orthonormal bases span the same subspace within `tol`.
pub fn same_subspace(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
    a.ncols() == b.ncols() && subspace_distance(a, b) <= tol * (1.0 + a.ncols() as f64)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = m.clone().symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigenvalues of a general complex matrix via its Schur form.
pub fn complex_eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = m.clone().schur();
    let t = schur.unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Condition number from the Gram eigenvalue spread (inf if rank-deficient).
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&s0), Some(&sn)) if sn > 0.0 => s0 / sn,
        _ => f64::INFINITY,
    }
}

/// Solve `a x = b` for square complex `a` by LU with partial pivoting.
pub fn solve(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    a.clone().lu().solve(b)
}

/// Least-squares solution of `a c ~ v` through the normal equations.
/// Adequate for the well-conditioned expansions this crate performs.
pub fn lstsq(a: &DMatrix<C64>, v: &DVector<C64>) -> Option<DVector<C64>> {
    let gram = a.adjoint() * a;
    let rhs = a.adjoint() * v;
    gram.lu().solve(&rhs).map(|m| DVector::from_column_slice(m.as_slice()))
}

/// Gram–Schmidt orthonormalisation of the columns of `m` with respect to the
/// Hermitian inner product given by `gram` (`<u, v> = v^H G u`).
/// Columns that fall below `tol` of their original norm are dropped.
pub fn gram_orthonormalize(m: &DMatrix<C64>, gram: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let mut cols: Vec<DVector<C64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: DVector<C64> = m.column(j).into_owned();
        let orig = (v.adjoint() * gram * &v)[(0, 0)].re.max(0.0).sqrt();
        // Two passes of projection for numerical orthogonality.
        for _ in 0..2 {
            for q in &cols {
                let coeff = (q.adjoint() * gram * &v)[(0, 0)];
                v -= q * coeff;
            }
        }
        let norm = (v.adjoint() * gram * &v)[(0, 0)].re.max(0.0).sqrt();
        if norm > tol * (1.0 + orig) {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    let mut out = DMatrix::zeros(m.nrows(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rank_of_complex_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -2.0), c(2.0, 0.0)]);
        // second row = -2i * first row
        assert_eq!(rank(&m, 1e-9), 1);
        let id = DMatrix::<C64>::identity(3, 3);
        assert_eq!(rank(&id, 1e-9), 3);
    }

    #[test]
    fn null_space_is_kernel() {
        let m = DMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        let ns = null_space(&m, 1e-9);
        assert_eq!(ns.ncols(), 2);
        let prod = &m * &ns;
        assert!(fro_norm(&prod) < 1e-12);
        let gram = ns.adjoint() * &ns;
        assert!(fro_norm(&(gram - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn null_space_of_near_rank_one_row() {
        // The case that exposed nalgebra's complex SVD misconvergence.
        let m = DMatrix::from_row_slice(1, 2, &[c(0.8164965809277259, 0.0), c(0.2886751345948131, 0.0)]);
        let ns = null_space(&m, 1e-9);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).norm() < 1e-12);
    }

    #[test]
    fn column_space_spans_columns() {
        let m = DMatrix::from_row_slice(3, 2, &[
            c(1.0, 0.0), c(2.0, 0.0),
            c(0.0, 1.0), c(0.0, 2.0),
            c(1.0, 1.0), c(2.0, 2.0),
        ]);
        let cs = column_space(&m, 1e-9);
        assert_eq!(cs.ncols(), 1);
        // column 0 is in the span
        let p = projector(&cs);
        let col0: DVector<C64> = m.column(0).into_owned();
        let res = &col0 - &p * &col0;
        assert!(res.norm() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_eigenvalues_of_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let mut ev = complex_eigenvalues(&m);
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_eigenvalues_with_complex_entries() {
        // Upper triangular: eigenvalues are the diagonal.
        let m = DMatrix::from_row_slice(3, 3, &[
            c(1.0, 2.0), c(0.5, -0.25), c(3.0, 0.0),
            c(0.0, 0.0), c(-0.5, 0.5), c(1.0, 1.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.25, -1.5),
        ]);
        let mut ev = complex_eigenvalues(&m);
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut expect = vec![c(1.0, 2.0), c(-0.5, 0.5), c(0.25, -1.5)];
        expect.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[
            c(1.0, 0.0), c(0.0, 1.0),
            c(2.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(1.0, -1.0),
        ]);
        let x = DVector::from_vec(vec![c(1.0, 1.0), c(-2.0, 0.5)]);
        let v = &a * &x;
        let sol = lstsq(&a, &v).unwrap();
        assert!((sol - x).norm() < 1e-10);
    }

    #[test]
    fn gram_orthonormalize_respects_weighted_product() {
        let gram = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(3.0, 0.0)]));
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        let q = gram_orthonormalize(&m, &gram, 1e-12);
        assert_eq!(q.ncols(), 2);
        let g = q.adjoint() * &gram * &q;
        assert!(fro_norm(&(g - DMatrix::identity(2, 2))) < 1e-10);
    }
}
