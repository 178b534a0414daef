//! Small dense kernels: the symmetric generalized eigenproblem and the
//! normal-line extraction.

use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::error::{GeomError, Result};

/// Solution of `b x = λ g x` for symmetric `b` and positive definite `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenEigen {
    /// Ascending.
    pub values: [f64; 3],
    /// Columns are `g`-orthonormal eigenvectors, in the order of `values`.
    pub vectors: Matrix3<f64>,
    /// `max |S - Sᵀ|` of the Cholesky-reduced matrix before symmetrization.
    pub asymmetry: f64,
}

pub fn generalized_eigen(g: &Matrix3<f64>, b: &Matrix3<f64>) -> Result<GenEigen> {
    let chol = g.cholesky().ok_or(GeomError::RankDeficient { sigma: 0.0 })?;
    let l = chol.l();
    let l_inv = l
        .try_inverse()
        .ok_or(GeomError::RankDeficient { sigma: 0.0 })?;
    let s = l_inv * b * l_inv.transpose();
    let asymmetry = (s - s.transpose()).amax();
    let s = 0.5 * (s + s.transpose());
    let eig = s.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let back = l_inv.transpose();
    let mut vectors = Matrix3::zeros();
    let mut values = [0.0; 3];
    for (k, &i) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[i];
        let y: Vector3<f64> = eig.eigenvectors.column(i).into();
        vectors.set_column(k, &(back * y));
    }
    Ok(GenEigen {
        values,
        vectors,
        asymmetry,
    })
}

/// Unit null vector of a rank-5 system of five linear forms on `R^6`.
///
/// Returns the vector together with the second-smallest singular value; the
/// system is rejected when that value is below `min_sigma`.
pub fn null_vector(rows: &[[f64; 6]; 5], min_sigma: f64) -> Result<([f64; 6], f64)> {
    let mut m = Matrix6::<f64>::zeros();
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let sigma2 = svd.singular_values[order[1]];
    let scale = svd.singular_values[order[5]].max(1.0);
    if sigma2 < min_sigma * scale {
        return Err(GeomError::NormalNullspace { sigma: sigma2 });
    }
    let row = v_t.row(order[0]);
    Ok((std::array::from_fn(|j| row[j]), sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_problem() {
        let g = Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 9.0));
        let b = Matrix3::from_diagonal(&Vector3::new(8.0, -3.0, 9.0));
        let e = generalized_eigen(&g, &b).unwrap();
        assert_eq!(e.values, [-3.0, 1.0, 2.0]);
        let gram = e.vectors.transpose() * g * e.vectors;
        assert!((gram - Matrix3::identity()).amax() < 1e-14);
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let g = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        assert!(generalized_eigen(&g, &Matrix3::identity()).is_err());
    }

    #[test]
    fn null_vector_of_coordinate_forms() {
        let mut rows = [[0.0; 6]; 5];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = 1.0 + i as f64;
        }
        let (n, s2) = null_vector(&rows, 1e-12).unwrap();
        assert!((n[5].abs() - 1.0).abs() < 1e-15);
        assert!(s2 >= 1.0 - 1e-12);
        rows[4] = rows[3];
        assert!(matches!(
            null_vector(&rows, 1e-12),
            Err(GeomError::NormalNullspace { .. })
        ));
    }

    proptest! {
        #[test]
        fn eigenpairs_solve_the_pencil(a in prop::array::uniform9(-1.0f64..1.0),
                                       c in prop::array::uniform6(-2.0f64..2.0)) {
            let m = Matrix3::from_row_slice(&a);
            let g = m * m.transpose() + Matrix3::identity() * 0.5;
            let b = Matrix3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5]);
            let e = generalized_eigen(&g, &b).unwrap();
            prop_assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
            for k in 0..3 {
                let x = e.vectors.column(k);
                let r = b * x - e.values[k] * (g * x);
                prop_assert!(r.amax() < 1e-10);
            }
            prop_assert!(e.asymmetry < 1e-9);
        }
    }
}
