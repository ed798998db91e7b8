//! Small dense complex helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues above `-EIG_TIE` count as nonnegative when splitting eigenspaces.
pub const EIG_TIE: f64 = 1e-12;

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Real trace of `a * b`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t.re
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvector of the largest eigenvalue, and that eigenvalue.
pub fn top_eigenvector(m: &CMatrix) -> (DVector<Complex64>, f64) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let (i, &val) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    (eig.eigenvectors.column(i).into_owned(), val)
}

/// Projector onto the span of eigenvectors with eigenvalue `>= -EIG_TIE`.
pub fn nonnegative_projector(m: &CMatrix) -> CMatrix {
    let d = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut p = CMatrix::zeros(d, d);
    for (i, &val) in eig.eigenvalues.iter().enumerate() {
        if val >= -EIG_TIE {
            let v = eig.eigenvectors.column(i);
            p += v * v.adjoint();
        }
    }
    p
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = random_complex(rng, d, d).qr();
    let (q, r) = qr.unpack();
    let phases = CMatrix::from_diagonal(&DVector::from_fn(d, |i, _| {
        let z = r[(i, i)];
        if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    }));
    q * phases
}

/// Projector onto the first `rank` columns of a random unitary.
pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> CMatrix {
    let u = random_unitary(rng, d);
    let cols = u.columns(0, rank);
    cols * cols.adjoint()
}

/// A random effect `0 <= E <= I` with uniform eigenvalues in `[0, 1]`.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let u = random_unitary(rng, d);
    let diag = CMatrix::from_diagonal(&DVector::from_fn(d, |_, _| {
        Complex64::new(rng.random::<f64>(), 0.0)
    }));
    &u * diag * u.adjoint()
}

/// A random density matrix `G G† / Tr(G G†)` from a square Ginibre matrix.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = random_complex(rng, d, d);
    let rho = &g * g.adjoint();
    let t = rho.trace();
    rho / t
}

/// `|ψ⟩⟨ψ|`.
pub fn pure(psi: &DVector<Complex64>) -> CMatrix {
    psi * psi.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 4);
        assert!(max_abs_diff(&(&u * u.adjoint()), &identity(4)) < 1e-12);
    }

    #[test]
    fn projector_split() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let p = nonnegative_projector(&m);
        let expect = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        assert!(max_abs_diff(&p, &expect) < 1e-12);
    }

    #[test]
    fn random_state_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_state(&mut rng, 4);
        assert!(is_hermitian(&rho, 1e-12));
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&rho) > -1e-12);
    }
}
