//! Classical and coined quantum random walks on the integer line, and the
//! log-log fit used to tell ballistic (σ ∝ τ) from diffusive (σ ∝ √τ)
//! spreading.
//!
//! Both walks are computed exactly: the classical walk from binomial
//! coefficients in arbitrary precision, the quantum walk by propagating the
//! full amplitude table. No sampling is involved.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{abs_c, tolerance, Complex, Real};

/// Refuse walks longer than this many steps.
pub const MAX_STEPS: usize = 1 << 20;

/// Position distribution after `steps` steps, supported on `−steps..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistribution<T> {
    steps: usize,
    probabilities: Vec<T>,
}

impl<T: Real> WalkDistribution<T> {
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Probability at `position`; zero outside the support.
    pub fn probability(&self, position: i64) -> T {
        let idx = position + self.steps as i64;
        if idx < 0 || idx as usize >= self.probabilities.len() {
            T::zero()
        } else {
            self.probabilities[idx as usize]
        }
    }

    /// `(position, probability)` over the whole support, parity zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let m = self.steps as i64;
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(k, &p)| (k as i64 - m, p))
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().fold(T::zero(), |s, &p| s + p)
    }

    pub fn mean(&self) -> T {
        self.iter()
            .fold(T::zero(), |s, (x, p)| s + p * T::lit(x as f64))
    }

    pub fn variance(&self) -> T {
        let mu = self.mean();
        self.iter().fold(T::zero(), |s, (x, p)| {
            let d = T::lit(x as f64) - mu;
            s + p * d * d
        })
    }

    pub fn std_dev(&self) -> T {
        self.variance().sqrt()
    }

    /// `max_x |P(x) − P(−x)|`.
    pub fn asymmetry(&self) -> T {
        let m = self.steps as i64;
        (0..=m).fold(T::zero(), |acc, x| {
            let d = (self.probability(x) - self.probability(-x)).abs();
            if d > acc {
                d
            } else {
                acc
            }
        })
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps > MAX_STEPS {
        return Err(Error::Resource(format!(
            "{steps} steps exceeds the limit of {MAX_STEPS}"
        )));
    }
    Ok(())
}

/// `num / 2^pow2` rounded to `f64`, for numerators far beyond `f64` range.
fn ratio_pow2(num: &BigUint, pow2: u64) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let bits = num.bits();
    let shift = bits.saturating_sub(64);
    let mant = (num >> shift).to_u64().expect("64-bit mantissa") as f64;
    let mut e = shift as i64 - pow2 as i64;
    let mut v = mant;
    // scale in chunks to stay clear of intermediate under/overflow
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    v
}

/// Exact binomial walk: `P(2k − M) = C(M, k) / 2^M`.
pub fn classical_walk<T: Real>(steps: usize) -> Result<WalkDistribution<T>> {
    check_steps(steps)?;
    let m = steps;
    let mut probabilities = vec![T::zero(); 2 * m + 1];
    let mut binom = BigUint::one();
    for k in 0..=m {
        probabilities[2 * k] = T::lit(ratio_pow2(&binom, m as u64));
        binom = binom * BigUint::from(m - k) / BigUint::from(k + 1);
    }
    Ok(WalkDistribution {
        steps,
        probabilities,
    })
}

/// Monte-Carlo estimate of the classical walk, for cross-checking only.
pub fn sample_classical_walk<T: Real>(
    steps: usize,
    trials: usize,
    seed: u64,
) -> Result<WalkDistribution<T>> {
    check_steps(steps)?;
    if trials == 0 {
        return Err(Error::invalid("walk.trials", "need at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; 2 * steps + 1];
    for _ in 0..trials {
        let right = (0..steps).filter(|_| rng.random_bool(0.5)).count();
        counts[2 * right] += 1;
    }
    let norm = T::from_usize_lossy(trials);
    Ok(WalkDistribution {
        steps,
        probabilities: counts
            .into_iter()
            .map(|c| T::from_usize_lossy(c) / norm)
            .collect(),
    })
}

/// Unitary coin and the walker's initial coin state. Coin state `|0⟩` steps
/// left, `|1⟩` steps right.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinSpec<T: Real> {
    matrix: [[Complex<T>; 2]; 2],
    initial: [Complex<T>; 2],
}

impl<T: Real> CoinSpec<T> {
    pub fn new(matrix: [[Complex<T>; 2]; 2], initial: [Complex<T>; 2]) -> Result<Self> {
        let tol = tolerance::<T>(1e-12);
        let mut defect = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                // (C†C)_ij = Σ_k conj(C_ki) C_kj
                let v = matrix[0][i].conj() * matrix[0][j] + matrix[1][i].conj() * matrix[1][j];
                let target = if i == j { T::one() } else { T::zero() };
                let d = abs_c(v - Complex::new(target, T::zero()));
                if d > defect {
                    defect = d;
                }
            }
        }
        if defect > tol {
            return Err(Error::invalid(
                "walk.coin",
                format!("coin is not unitary (defect {defect:e})"),
            ));
        }
        let norm = (initial[0].norm_sqr() + initial[1].norm_sqr()).sqrt();
        if (norm - T::one()).abs() > tolerance::<T>(1e-12) {
            return Err(Error::invalid("walk.coin_state", "initial coin state is not normalized"));
        }
        Ok(Self { matrix, initial })
    }

    pub fn hadamard(initial: [Complex<T>; 2]) -> Result<Self> {
        let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let p = Complex::new(h, T::zero());
        Self::new([[p, p], [p, -p]], initial)
    }

    /// Hadamard coin started in `(|0⟩ + i|1⟩)/√2`, giving a mirror-symmetric
    /// distribution.
    pub fn hadamard_symmetric() -> Self {
        let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        Self::hadamard([Complex::new(h, T::zero()), Complex::new(T::zero(), h)])
            .expect("Hadamard is unitary")
    }

    /// Hadamard coin started in `|0⟩`.
    pub fn hadamard_zero() -> Self {
        Self::hadamard([Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero())])
            .expect("Hadamard is unitary")
    }

    pub fn matrix(&self) -> &[[Complex<T>; 2]; 2] {
        &self.matrix
    }

    pub fn initial(&self) -> &[Complex<T>; 2] {
        &self.initial
    }
}

/// Coined walk from the origin: each step applies the coin, then shifts the
/// `|0⟩` component left and the `|1⟩` component right.
pub fn quantum_walk<T: Real>(steps: usize, coin: &CoinSpec<T>) -> Result<WalkDistribution<T>> {
    check_steps(steps)?;
    let width = 2 * steps + 1;
    let zero = Complex::new(T::zero(), T::zero());
    let mut left = vec![zero; width];
    let mut right = vec![zero; width];
    left[steps] = coin.initial[0];
    right[steps] = coin.initial[1];
    let c = coin.matrix;
    for step in 0..steps {
        let mut next_left = vec![zero; width];
        let mut next_right = vec![zero; width];
        // occupied positions after `step` steps: steps-step ..= steps+step
        for x in (steps - step)..=(steps + step) {
            let (a, b) = (left[x], right[x]);
            if a == zero && b == zero {
                continue;
            }
            next_left[x - 1] += c[0][0] * a + c[0][1] * b;
            next_right[x + 1] += c[1][0] * a + c[1][1] * b;
        }
        left = next_left;
        right = next_right;
    }
    Ok(WalkDistribution {
        steps,
        probabilities: left
            .iter()
            .zip(&right)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect(),
    })
}

/// Power-law fit `σ ≈ prefactor · τ^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadingFit<T> {
    pub exponent: T,
    pub prefactor: T,
    /// RMS of the log-space residuals.
    pub residual: T,
    /// Standard error of the exponent (zero with fewer than three points or
    /// an exact fit).
    pub exponent_stderr: T,
}

/// Least-squares line through `(ln τ, ln σ)`.
pub fn fit_spreading_exponent<T: Real>(samples: &[(T, T)]) -> Result<SpreadingFit<T>> {
    if samples.len() < 3 {
        return Err(Error::invalid(
            "fit.samples",
            format!("need at least 3 samples, got {}", samples.len()),
        ));
    }
    if let Some((k, _)) = samples
        .iter()
        .enumerate()
        .find(|(_, (t, s))| !(*t > T::zero() && *s > T::zero() && t.is_finite_val() && s.is_finite_val()))
    {
        return Err(Error::invalid(
            format!("fit.samples[{k}]"),
            "times and widths must be positive and finite",
        ));
    }
    let n = T::from_usize_lossy(samples.len());
    let xs: Vec<T> = samples.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<T> = samples.iter().map(|(_, s)| s.ln()).collect();
    let xm = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let ym = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
    }
    if sxx == T::zero() {
        return Err(Error::invalid("fit.samples", "all sample times are identical"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let sse = xs.iter().zip(&ys).fold(T::zero(), |a, (&x, &y)| {
        let r = y - (intercept + slope * x);
        a + r * r
    });
    let dof = T::from_usize_lossy(samples.len() - 2);
    Ok(SpreadingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual: (sse / n).sqrt(),
        exponent_stderr: (sse / dof / sxx).sqrt(),
    })
}
