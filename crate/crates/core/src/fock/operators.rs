use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;

/// Largest padded basis tried before giving up on a single-mode block.
const MAX_WORK_DIM: usize = 6000;
/// Agreement required between two padded sizes for the retained block.
const BLOCK_TOL: f64 = 5e-13;

/// Real antisymmetric tridiagonal generator with `G[k+1,k] = c_k`, `G[k,k+1] = -c_k`.
fn tridiagonal_generator(dim: usize, coupling: &impl Fn(usize) -> f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(dim, dim);
    for k in 0..dim.saturating_sub(1) {
        let c = coupling(k);
        g[(k + 1, k)] = c;
        g[(k, k + 1)] = -c;
    }
    g
}

/// Top-left `keep x keep` block of `exp(G)` for the infinite tridiagonal
/// generator defined by `coupling`, obtained by growing the padded size until
/// two consecutive sizes agree.
fn converged_block(keep: usize, start: usize, coupling: impl Fn(usize) -> f64) -> Result<DMatrix<f64>> {
    if keep == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let block = |dim: usize| -> Result<DMatrix<f64>> {
        let e = expm(&tridiagonal_generator(dim, &coupling))?;
        Ok(e.view((0, 0), (keep, keep)).into_owned())
    };
    let mut dim = start.max(keep + 8);
    let mut prev = block(dim)?;
    loop {
        let next_dim = dim + (dim / 4).max(16);
        if next_dim > MAX_WORK_DIM {
            return Err(Error::Numeric(format!(
                "padded basis for a {keep}-level block did not converge below {MAX_WORK_DIM} levels"
            )));
        }
        let next = block(next_dim)?;
        let diff = (&next - &prev).amax();
        if diff <= BLOCK_TOL {
            return Ok(next);
        }
        prev = next;
        dim = next_dim;
    }
}

fn with_phase(real: &DMatrix<f64>, phase_of: impl Fn(usize, usize) -> f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(real.nrows(), real.ncols(), |m, n| {
        let v = real[(m, n)];
        if v == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(v, phase_of(m, n))
        }
    })
}

/// Matrix elements `<m|D(delta)|n>` for `m, n < cutoff`.
pub fn displacement_matrix(delta: Complex64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    let (amp, arg) = delta.to_polar();
    if amp == 0.0 {
        return Ok(DMatrix::identity(cutoff, cutoff));
    }
    let c = cutoff as f64;
    let start = (c + 16.0 + 10.0 * amp + 4.0 * amp * c.sqrt()).ceil() as usize;
    // exp(|delta| (a^+ - a)); a^+ couples n -> n+1 with sqrt(n+1)
    let real = converged_block(cutoff, start, |n| amp * ((n + 1) as f64).sqrt())?;
    // conjugation by exp(i arg n) restores the complex displacement
    Ok(with_phase(&real, |m, n| arg * (m as f64 - n as f64)))
}

/// Matrix elements `<m|S(zeta e^{i phase})|n>` for `m, n < cutoff`.
pub fn squeeze_matrix(zeta: f64, phase: f64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    if zeta == 0.0 {
        return Ok(DMatrix::identity(cutoff, cutoff));
    }
    let start_levels = ((cutoff as f64 + 24.0) * (1.5 * zeta.abs()).exp()).ceil() as usize;
    let mut real = DMatrix::zeros(cutoff, cutoff);
    // a a and a^+ a^+ only connect states of equal parity
    for parity in 0..2 {
        let keep = (cutoff + 1 - parity) / 2;
        let start = start_levels / 2 + 1;
        let block = converged_block(keep, start, |k| {
            let n = (2 * k + parity) as f64;
            -0.5 * zeta * ((n + 1.0) * (n + 2.0)).sqrt()
        })?;
        for i in 0..keep {
            for j in 0..keep {
                real[(2 * i + parity, 2 * j + parity)] = block[(i, j)];
            }
        }
    }
    // m - n is even wherever the matrix is non-zero
    Ok(with_phase(&real, |m, n| 0.5 * phase * (m as f64 - n as f64)))
}

/// The rotation restricted to total phonon number `total`, indexed by the
/// occupation `i` of the first mode (the second holds `total - i`).
///
/// Number conservation makes this block exact; no padding is involved.
pub fn rotation_block(theta: f64, phase: f64, total: usize) -> Result<DMatrix<Complex64>> {
    let dim = total + 1;
    if theta == 0.0 {
        return Ok(DMatrix::identity(dim, dim));
    }
    // a_i^+ a_j: (i, N-i) -> (i+1, N-i-1) with sqrt(i+1) sqrt(N-i)
    let g = tridiagonal_generator(dim, &|i| theta * (((i + 1) * (total - i)) as f64).sqrt());
    let real = expm(&g)?;
    Ok(with_phase(&real, |m, n| phase * (m as f64 - n as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn displacement_first_column_is_coherent_state() {
        let alpha = Complex64::new(0.6, -0.8);
        let d = displacement_matrix(alpha, 20).unwrap();
        for m in 0..20 {
            let want = (-alpha.norm_sqr() / 2.0).exp() * alpha.powu(m as u32) / factorial(m).sqrt();
            assert!((d[(m, 0)] - want).norm() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn squeezed_vacuum_amplitudes_with_phase() {
        // <2n|S(r e^{i phi})|0> = (-e^{i phi} tanh r)^n sqrt((2n)!) / (2^n n! sqrt(cosh r))
        let (r, phi) = (0.7, 0.9);
        let s = squeeze_matrix(r, phi, 30).unwrap();
        for n in 0..15 {
            let mag = r.tanh().powi(n as i32) * factorial(2 * n).sqrt()
                / (2f64.powi(n as i32) * factorial(n) * r.cosh().sqrt());
            let want = Complex64::from_polar(1.0, phi).scale(-1.0).powu(n as u32) * mag;
            assert!((s[(2 * n, 0)] - want).norm() < 1e-13, "n={n}");
            assert_eq!(s[(2 * n + 1, 0)], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn rotation_blocks_are_unitary() {
        for total in [0, 1, 5, 30] {
            let b = rotation_block(0.37, 0.4, total).unwrap();
            let prod = b.adjoint() * &b;
            let eye = DMatrix::<Complex64>::identity(total + 1, total + 1);
            assert!((prod - eye).iter().all(|z| z.norm() < 1e-12), "N={total}");
        }
    }

    #[test]
    fn single_photon_rotation() {
        let theta = 0.3;
        let b = rotation_block(theta, 0.0, 1).unwrap();
        // index 1 = |1,0>, index 0 = |0,1>
        assert!((b[(1, 1)].re - theta.cos()).abs() < 1e-15);
        assert!((b[(0, 1)].re + theta.sin()).abs() < 1e-15);
    }
}
