use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statevec::{StateVector, C64};

/// Largest modulus accepted for toy discrete-log instances.
pub const MAX_PRIME: u64 = 1 << 14;

/// A toy discrete-logarithm instance: prime `p`, generator `g`, and the full
/// table of logarithms built by exhaustive multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct DlpInstance {
    p: u64,
    g: u64,
    /// `log_table[x] = k` with `g^k ≡ x (mod p)`; index 0 is unused.
    log_table: Vec<u32>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl DlpInstance {
    pub fn new(p: u64, g: u64) -> Result<Self> {
        if p < 3 || p > MAX_PRIME || !is_prime(p) {
            return Err(Error::Validation(format!(
                "modulus {p} must be an odd prime ≤ {MAX_PRIME}"
            )));
        }
        if g == 0 || g >= p {
            return Err(Error::Validation(format!("generator {g} outside 1..{p}")));
        }
        let order = p - 1;
        let mut log_table = vec![u32::MAX; p as usize];
        let mut acc = 1u64;
        for k in 0..order {
            if log_table[acc as usize] != u32::MAX {
                return Err(Error::Validation(format!(
                    "{g} has order {k} < {order}, not a generator mod {p}"
                )));
            }
            log_table[acc as usize] = k as u32;
            acc = acc * g % p;
        }
        Ok(DlpInstance { p, g, log_table })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    /// Group order p − 1.
    pub fn order(&self) -> u64 {
        self.p - 1
    }

    /// Bits needed to write any residue mod p.
    pub fn n_bits(&self) -> usize {
        (64 - (self.p - 1).leading_zeros()) as usize
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= 1 && x < self.p
    }

    pub fn log(&self, x: u64) -> Result<u64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("{x} is not a unit mod {}", self.p)));
        }
        Ok(u64::from(self.log_table[x as usize]))
    }

    /// g^k mod p
    pub fn pow(&self, k: u64) -> u64 {
        mod_pow(self.g, k, self.p)
    }

    /// All group elements in exponent order: g^0, g^1, …
    pub fn elements(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.order() as usize);
        let mut acc = 1u64;
        for _ in 0..self.order() {
            out.push(acc);
            acc = acc * self.g % self.p;
        }
        out
    }

    /// The coset window {x·g^i mod p : 0 ≤ i < 2^k_window} as a multiset of
    /// residues (repeats possible when the window exceeds the group order).
    pub fn window(&self, k_window: u32, x: u64) -> Result<Vec<u64>> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("{x} is not a unit mod {}", self.p)));
        }
        let len = 1u64 << k_window;
        let mut out = Vec::with_capacity(len as usize);
        let mut acc = x;
        for _ in 0..len {
            out.push(acc);
            acc = acc * self.g % self.p;
        }
        Ok(out)
    }

    /// One-line text form `p g`.
    pub fn to_line(&self) -> String {
        format!("{} {}", self.p, self.g)
    }
}

impl fmt::Display for DlpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

impl FromStr for DlpInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Validation(format!("expected `p g`, got {s:?}")));
        }
        let parse = |t: &str| {
            t.parse::<u64>()
                .map_err(|e| Error::Validation(format!("{t:?}: {e}")))
        };
        DlpInstance::new(parse(fields[0])?, parse(fields[1])?)
    }
}

/// Square-and-multiply modular exponentiation.
pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut result = 1 % modulus;
    let mut b = base % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % modulus;
        }
        b = b * b % modulus;
        exp >>= 1;
    }
    result
}

/// Smallest k ≥ 0 with g^k ≡ x (mod p), found by repeated multiplication.
pub fn brute_force_dlog(p: u64, g: u64, x: u64) -> Result<u64> {
    if p > MAX_PRIME {
        return Err(Error::Capacity(format!("modulus {p} above {MAX_PRIME}")));
    }
    if x % p == 0 || x >= p {
        return Err(Error::Domain(format!("{x} has no logarithm mod {p}")));
    }
    let mut acc = 1 % p;
    for k in 0..p {
        if acc == x {
            return Ok(k);
        }
        acc = acc * g % p;
    }
    Err(Error::Domain(format!("{x} is not a power of {g} mod {p}")))
}

/// Uniform superposition over the coset window of `x`, embedded in
/// `inst.n_bits()` qubits. Repeated residues add amplitude.
pub fn dlp_feature_state(inst: &DlpInstance, k_window: u32, x: u64) -> Result<StateVector> {
    let n = inst.n_bits();
    if n > crate::statevec::MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} qubits for p = {}", inst.p())));
    }
    if k_window > 20 {
        return Err(Error::Capacity(format!("window 2^{k_window}")));
    }
    let mut counts = vec![0.0f64; 1 << n];
    for r in inst.window(k_window, x)? {
        counts[r as usize] += 1.0;
    }
    let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
    StateVector::from_amplitudes(counts.into_iter().map(|c| C64::new(c / norm, 0.0)).collect())
}
