//! Classical memory needed to hold a state vector, in exact integer bits.
//!
//! With the default model each complex amplitude costs two 32-bit reals, so
//! an `n`-qubit state takes `2^n · 2 · 32 = 2^(n+6)` bits.

use crate::error::{Error, Result};
use crate::model::ProductBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryModel {
    bits_per_component: u32,
}

impl Default for MemoryModel {
    fn default() -> Self {
        Self {
            bits_per_component: 32,
        }
    }
}

impl MemoryModel {
    /// Real and imaginary parts.
    pub const COMPONENTS_PER_AMPLITUDE: u128 = 2;

    pub fn new(bits_per_component: u32) -> Result<Self> {
        if bits_per_component == 0 {
            return Err(Error::invalid("memory.bits_per_component", "must be positive"));
        }
        Ok(Self { bits_per_component })
    }

    pub fn bits_per_component(&self) -> u32 {
        self.bits_per_component
    }

    pub fn bits_per_amplitude(&self) -> u128 {
        Self::COMPONENTS_PER_AMPLITUDE * u128::from(self.bits_per_component)
    }

    /// Bits for `amplitudes` complex numbers.
    pub fn amplitude_bits(&self, amplitudes: u128) -> Result<u128> {
        amplitudes
            .checked_mul(self.bits_per_amplitude())
            .ok_or_else(|| overflow(format!("{amplitudes} amplitudes")))
    }
}

fn overflow(what: String) -> Error {
    Error::Resource(format!("bit count for {what} exceeds the 128-bit range"))
}

/// Bits to store an arbitrary `n`-qubit state.
pub fn qubit_state_bits(n: u32, model: MemoryModel) -> Result<u128> {
    let amplitudes = 1u128
        .checked_shl(n)
        .filter(|_| n < 128)
        .ok_or_else(|| overflow(format!("{n} qubits")))?;
    model.amplitude_bits(amplitudes)
}

/// Largest `n` whose state fits in `budget_bits`.
pub fn max_qubits(budget_bits: u128, model: MemoryModel) -> Result<u32> {
    let one = model.bits_per_amplitude();
    if budget_bits < one {
        return Err(Error::invalid(
            "memory.budget",
            format!("budget of {budget_bits} bits cannot hold a single amplitude ({one} bits)"),
        ));
    }
    // largest n with 2^n ≤ budget / bits_per_amplitude
    let amplitudes = budget_bits / one;
    Ok(127 - amplitudes.leading_zeros())
}

/// Bits to store a pure state over the site ⊗ Fock product basis.
pub fn product_basis_bits(basis: &ProductBasis, model: MemoryModel) -> Result<u128> {
    model.amplitude_bits(basis.total_dim() as u128)
}

/// Human-readable binary size of a bit count, e.g. `16 GiB`.
pub fn format_bits_as_bytes(bits: u128) -> String {
    const UNITS: [&str; 7] = ["B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB"];
    let bytes = bits / 8;
    let rem_bits = bits % 8;
    let mut unit = 0;
    let mut scaled = bytes;
    while unit + 1 < UNITS.len() && scaled >= 1024 && scaled.is_multiple_of(1024) {
        scaled /= 1024;
        unit += 1;
    }
    if rem_bits == 0 && (unit > 0 || bytes < 1024) {
        format!("{scaled} {}", UNITS[unit])
    } else {
        let mut v = bits as f64 / 8.0;
        let mut u = 0;
        while v >= 1024.0 && u + 1 < UNITS.len() {
            v /= 1024.0;
            u += 1;
        }
        format!("{v:.3} {}", UNITS[u])
    }
}
