//! Short-time propagators `exp(−iH dt)`.
//!
//! The dense route exponentiates the full matrix by scaling-and-squaring Padé
//! (nalgebra's `exp`). The Krylov route never forms the matrix: it builds an
//! Arnoldi basis for the action on a vector and exponentiates the small
//! Hessenberg projection, subdividing the step until the a-posteriori error
//! estimate is met. [`krylov_expv`] is generic over the linear operator so the
//! open-system generator reuses it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::scalar::{Complex, Real};

use super::Method;

/// Dense exponentials are refused above this dimension.
pub const DENSE_MAX_DIM: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Target error per unit of integration time, relative to the vector norm.
    pub tol: f64,
    /// Largest Arnoldi basis before the step is subdivided.
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_dim: 40,
        }
    }
}

/// `exp(−iH dt)` as a dense matrix.
pub fn dense_propagator<T: Real>(h: &OperatorMatrix<T>, dt: T) -> Result<DMatrix<Complex<T>>> {
    let n = h.dim();
    if n > DENSE_MAX_DIM {
        return Err(Error::Resource(format!(
            "dense exponential unavailable at dimension {n} (limit {DENSE_MAX_DIM})"
        )));
    }
    let minus_i_dt = Complex::new(T::zero(), -dt);
    Ok((h.to_dense() * minus_i_dt).exp())
}

/// Action of `exp(t·A)` on `v` for a linear operator `A` given as a closure
/// `apply(x, y)` computing `y = A x`.
pub fn krylov_expv<T, F>(
    apply: F,
    v: &DVector<Complex<T>>,
    t: T,
    opts: KrylovOptions,
) -> Result<DVector<Complex<T>>>
where
    T: Real,
    F: Fn(&[Complex<T>], &mut [Complex<T>]),
{
    let n = v.len();
    let zero = Complex::new(T::zero(), T::zero());
    if t == T::zero() || n == 0 {
        return Ok(v.clone());
    }
    let m_max = opts.max_dim.max(2).min(n);
    let tol = T::lit(opts.tol);
    let mut w = v.clone();
    let mut done = T::zero();
    let mut tau = t;
    let min_tau = t * T::lit(1e-12);

    while done < t {
        if t - done < tau {
            tau = t - done;
        }
        let beta = w.norm();
        if beta == T::zero() {
            return Ok(w);
        }
        let mut basis: Vec<DVector<Complex<T>>> = Vec::with_capacity(m_max + 1);
        basis.push(w.unscale(beta));
        let mut hess = DMatrix::<Complex<T>>::zeros(m_max + 1, m_max);
        let mut scratch = DVector::from_element(n, zero);
        let mut accepted = None;

        for j in 0..m_max {
            apply(basis[j].as_slice(), scratch.as_mut_slice());
            let mut q = scratch.clone();
            // modified Gram-Schmidt, two passes
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let hij = b.dotc(&q);
                    hess[(i, j)] += hij;
                    q.axpy(-hij, b, Complex::new(T::one(), T::zero()));
                }
            }
            let h_next = q.norm();
            let m = j + 1;
            let small = hess.view((0, 0), (m, m)).into_owned() * Complex::new(tau, T::zero());
            let y = small.exp().column(0).into_owned();
            let breakdown = h_next <= T::lit(1e-13) * beta.max(T::one());
            let err = beta * h_next * tau * y[m - 1].norm_sqr().sqrt();
            if breakdown || err <= tol * tau {
                let mut out = DVector::from_element(n, zero);
                for (k, b) in basis.iter().enumerate().take(m) {
                    out.axpy(y[k] * beta, b, Complex::new(T::one(), T::zero()));
                }
                accepted = Some(out);
                break;
            }
            if m < m_max {
                hess[(m, j)] = Complex::new(h_next, T::zero());
                basis.push(q.unscale(h_next));
            }
        }

        match accepted {
            Some(out) => {
                w = out;
                done += tau;
            }
            None => {
                tau *= T::lit(0.5);
                if tau < min_tau {
                    return Err(Error::integrator(
                        done.to_f64_lossy(),
                        format!(
                            "Krylov step did not converge (basis {m_max}, tol {:e}); \
                             raise the basis size or reduce dt",
                            opts.tol
                        ),
                    ));
                }
            }
        }
    }
    Ok(w)
}

/// A reusable step operator for one Hamiltonian and time step.
#[derive(Debug, Clone)]
pub enum Propagator<T: Real> {
    Identity,
    Dense(DMatrix<Complex<T>>),
    Krylov {
        h: OperatorMatrix<T>,
        dt: T,
        opts: KrylovOptions,
    },
}

impl<T: Real> Propagator<T> {
    pub fn apply(&self, v: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        match self {
            Propagator::Identity => Ok(v.clone()),
            Propagator::Dense(u) => Ok(u * v),
            Propagator::Krylov { h, dt, opts } => krylov_expv(
                |x, y| {
                    h.apply(x, y);
                    for z in y.iter_mut() {
                        // −i·z
                        *z = Complex::new(z.im, -z.re);
                    }
                },
                v,
                *dt,
                *opts,
            ),
        }
    }
}

/// Propagator applying `exp(−iH dt)`. `rk4` is rejected: it is only offered
/// for the open-system generator.
pub fn step_propagator<T: Real>(
    h: &OperatorMatrix<T>,
    dt: T,
    method: Method,
    opts: KrylovOptions,
) -> Result<Propagator<T>> {
    if !h.is_hermitian() {
        return Err(Error::invalid("hamiltonian", "operator is not flagged Hermitian"));
    }
    if dt < T::zero() || !dt.is_finite_val() {
        return Err(Error::invalid("integrator.dt", "time step must be finite and ≥ 0"));
    }
    if dt == T::zero() {
        return Ok(Propagator::Identity);
    }
    match method {
        Method::DenseExpm => Ok(Propagator::Dense(dense_propagator(h, dt)?)),
        Method::KrylovExpm => Ok(Propagator::Krylov {
            h: h.clone(),
            dt,
            opts,
        }),
        Method::Rk4 => Err(Error::invalid(
            "integrator.method",
            "rk4 is only available for open-system evolution",
        )),
    }
}
