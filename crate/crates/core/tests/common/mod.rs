#![allow(dead_code)]

use holstein_core::scalar::Complex;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type C = Complex<f64>;

pub fn cx(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `a + a†` on a Fock space truncated at `n_max`.
pub fn position_op(n_max: usize) -> DMatrix<f64> {
    let d = n_max + 1;
    let mut x = DMatrix::zeros(d, d);
    for n in 0..n_max {
        let s = ((n + 1) as f64).sqrt();
        x[(n, n + 1)] = s;
        x[(n + 1, n)] = s;
    }
    x
}

pub fn number_op(n_max: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(n_max + 1, |n, _| n as f64))
}

/// Brute-force Kronecker assembly of the joint Hamiltonian, modes ordered
/// with the last one fastest.
pub fn joint_hamiltonian(
    h_sys: &DMatrix<f64>,
    freqs: &[f64],
    cutoffs: &[usize],
    g: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = h_sys.nrows();
    let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
    let bath_dim: usize = dims.iter().product();
    let embed = |k: usize, op: &DMatrix<f64>| {
        let mut m = DMatrix::identity(1, 1);
        for (q, &d) in dims.iter().enumerate() {
            let f = if q == k { op.clone() } else { DMatrix::identity(d, d) };
            m = kron(&m, &f);
        }
        m
    };
    let mut h = kron(h_sys, &DMatrix::identity(bath_dim, bath_dim));
    for (k, &nu) in freqs.iter().enumerate() {
        let num = embed(k, &number_op(cutoffs[k]));
        h += kron(&DMatrix::identity(n, n), &num) * nu;
        let x = embed(k, &position_op(cutoffs[k]));
        for i in 0..n {
            let mut p = DMatrix::zeros(n, n);
            p[(i, i)] = 1.0;
            h += kron(&p, &x) * g[(i, k)];
        }
    }
    h
}

pub fn real_part(m: &DMatrix<C>) -> DMatrix<f64> {
    assert!(m.iter().all(|z| z.im == 0.0), "expected a real matrix");
    m.map(|z| z.re)
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

/// `ψ(t) = Σ_m e^{−iE_m t} |m⟩⟨m|ψ0⟩` for a real symmetric `h`.
pub fn spectral_evolve(h: &DMatrix<f64>, psi0: &DVector<C>, t: f64) -> DVector<C> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| cx(x, 0.0));
    let mut coeff = v.adjoint() * psi0;
    for (m, z) in coeff.iter_mut().enumerate() {
        *z *= Complex::from_polar(1.0, -eig.eigenvalues[m] * t);
    }
    v * coeff
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
