//! Dense matrix exponential by scaling-and-squaring with Padé approximants.
//!
//! Follows Higham's 2005 selection of Padé degree 3, 5, 7, 9 or 13 from the
//! 1-norm of the input, scaling by a power of two before the degree-13
//! approximant and squaring back afterwards.

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Maximum absolute column sum.
pub fn norm_1<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes `exp(a)` for a square matrix with real or complex entries.
pub fn expm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidDimension(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if !a.iter().all(|x| x.clone().modulus().is_finite()) {
        return Err(Error::InvalidParameter(
            "matrix exponential input has non-finite entries".into(),
        ));
    }

    let norm = norm_1(a);
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let low = [
        (THETA_3, &PADE_3[..]),
        (THETA_5, &PADE_5[..]),
        (THETA_7, &PADE_7[..]),
        (THETA_9, &PADE_9[..]),
    ];
    for (theta, coeffs) in low {
        if norm <= theta {
            return pade_low(a, coeffs);
        }
    }

    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a * T::from_real(2f64.powi(-s));
    let mut result = pade_13(&scaled)?;
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

fn scalar<T: ComplexField<RealField = f64>>(c: f64) -> T {
    T::from_real(c)
}

fn pade_low<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &[f64]) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    // powers[k] = A^(2k)
    let mut powers = vec![ident.clone(), a2.clone()];
    let degree = b.len() - 1;
    while powers.len() <= degree / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = DMatrix::<T>::zeros(n, n);
    let mut v = DMatrix::<T>::zeros(n, n);
    for (k, power) in powers.iter().enumerate() {
        if 2 * k + 1 <= degree {
            u_inner += power * scalar::<T>(b[2 * k + 1]);
        }
        v += power * scalar::<T>(b[2 * k]);
    }
    let u = a * u_inner;
    solve_pade(u, v)
}

fn pade_13<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let b = &PADE_13;
    let n = a.nrows();
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let c = |k: usize| scalar::<T>(b[k]);

    let u_high = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u_inner = &a6 * u_high + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &ident * c(1);
    let u = a * u_inner;

    let v_high = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = &a6 * v_high + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &ident * c(0);
    solve_pade(u, v)
}

fn solve_pade<T: ComplexField<RealField = f64>>(u: DMatrix<T>, v: DMatrix<T>) -> Result<DMatrix<T>> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Numeric("singular Padé denominator in matrix exponential".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn max_diff<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
        (a - b).iter().map(|x| x.clone().modulus()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn diagonal_matches_scalar_exp_across_pade_degrees() {
        for scale in [1e-3, 0.1, 0.5, 1.5, 4.0, 40.0] {
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                scale,
                -scale,
                0.3 * scale,
            ]));
            let e = expm(&d).unwrap();
            for i in 0..3 {
                let want: f64 = d[(i, i)].exp();
                assert!((e[(i, i)] - want).abs() <= 1e-13 * want.max(1.0), "{scale}");
            }
        }
    }

    #[test]
    fn planar_rotation_generator() {
        for theta in [0.01, 0.7, 3.0, 25.0] {
            let g = DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
            let e = expm(&g).unwrap();
            let want = DMatrix::from_row_slice(
                2,
                2,
                &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
            );
            assert!(max_diff(&e, &want) < 1e-12, "theta={theta}");
        }
    }

    #[test]
    fn nilpotent_complex() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let a = DMatrix::from_row_slice(3, 3, &[zero, i, zero, zero, zero, one, zero, zero, zero]);
        // exp(A) = I + A + A^2/2
        let want = DMatrix::identity(3, 3) + &a + (&a * &a) * Complex64::new(0.5, 0.0);
        assert!(max_diff(&expm(&a).unwrap(), &want) < 1e-15);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            expm(&DMatrix::<f64>::zeros(2, 3)),
            Err(Error::InvalidDimension(_))
        ));
    }
}
