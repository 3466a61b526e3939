use crate::error::ConicError;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]` of a Hermitian
/// matrix. `H ⪰ 0` iff the embedding is, and every eigenvalue of `H` appears
/// twice in the embedding's spectrum.
pub fn hermitian_to_real(h: &DMatrix<Complex64>) -> Result<DMatrix<f64>, ConicError> {
    if h.nrows() != h.ncols() {
        return Err(ConicError::Shape(format!(
            "{}×{} is not square",
            h.nrows(),
            h.ncols()
        )));
    }
    let dev = hermitian_deviation(h);
    if dev > 1e-10 {
        return Err(ConicError::NotHermitian(dev));
    }
    Ok(embed_unchecked(h))
}

/// Max-abs entry of `H − Hᴴ`.
pub fn hermitian_deviation(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Embedding without the Hermitian check; the result is symmetrized from the
/// lower triangle.
pub fn embed_unchecked(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in j..n {
            let z = h[(i, j)];
            let (re, im) = (z.re, z.im);
            out[(i, j)] = re;
            out[(j, i)] = re;
            out[(n + i, n + j)] = re;
            out[(n + j, n + i)] = re;
            // lower-left block is Im H, upper-right is −Im H
            out[(n + i, j)] = im;
            out[(j, n + i)] = im;
            out[(i, n + j)] = -im;
            out[(n + j, i)] = -im;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_maps_to_identity() {
        let h = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(
            hermitian_to_real(&h).unwrap(),
            DMatrix::<f64>::identity(4, 4)
        );
    }

    #[test]
    fn rank_one_example_has_doubled_spectrum() {
        let j = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[one, j, -j, one]);
        let e = hermitian_to_real(&h).unwrap();
        let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [0.0, 0.0, 2.0, 2.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            hermitian_to_real(&h),
            Err(ConicError::NotHermitian(_))
        ));
    }
}
