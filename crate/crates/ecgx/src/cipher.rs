//! Logistic-map keystream generation and XOR stream encryption.
//!
//! The keystream is the trajectory of `x_{n+1} = r * x_n * (1 - x_n)`
//! quantized to bytes with `floor(x * 255)`. Encryption XORs plaintext
//! bytes against the keystream; the same call decrypts. The map state is
//! re-seeded from the key at the start of every call, so two endpoints
//! sharing `(x0, r)` stay in sync segment by segment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower edge of the chaotic regime; below this the map is periodic.
pub const R_MIN: f64 = 3.57;
/// Upper edge of the admissible control parameter.
pub const R_MAX: f64 = 4.0;

/// Hard cap on configurable burn-in iterations.
pub const MAX_BURN_IN: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum CipherError {
    #[error("initial condition x0 = {0} outside the open interval (0, 1)")]
    InvalidX0(f64),
    #[error("control parameter r = {0} outside the chaotic range ({R_MIN}, {R_MAX}]")]
    InvalidR(f64),
    #[error("map state x = {0} outside the open interval (0, 1)")]
    InvalidState(f64),
    #[error("burn-in {0} exceeds the maximum of {MAX_BURN_IN}")]
    BurnInTooLarge(u64),
}

/// The secret `(x0, r)` pair seeding the logistic map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaoticKey {
    x0: f64,
    r: f64,
}

impl ChaoticKey {
    /// Validates and constructs a key. `x0` must lie strictly inside
    /// (0, 1) and `r` inside (3.57, 4.0].
    pub fn new(x0: f64, r: f64) -> Result<Self, CipherError> {
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(CipherError::InvalidX0(x0));
        }
        if !(r > R_MIN && r <= R_MAX) {
            return Err(CipherError::InvalidR(r));
        }
        Ok(Self { x0, r })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Returns a key with `x0` shifted by `delta`. When the shifted value
    /// leaves (0, 1) the perturbation is applied downward instead.
    pub fn perturb_x0(&self, delta: f64) -> Result<Self, CipherError> {
        let up = self.x0 + delta;
        if up > 0.0 && up < 1.0 {
            Self::new(up, self.r)
        } else {
            Self::new(self.x0 - delta, self.r)
        }
    }
}

/// Keystream generator options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherConfig {
    /// Iterations discarded after each reset before any byte is emitted.
    pub burn_in: u64,
}

impl Default for CipherConfig {
    fn default() -> Self {
        Self { burn_in: 0 }
    }
}

impl CipherConfig {
    pub fn new(burn_in: u64) -> Result<Self, CipherError> {
        if burn_in > MAX_BURN_IN {
            return Err(CipherError::BurnInTooLarge(burn_in));
        }
        Ok(Self { burn_in })
    }
}

/// One iteration of the logistic map.
pub fn logistic_step(x: f64, r: f64) -> Result<f64, CipherError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(CipherError::InvalidState(x));
    }
    if !(r > R_MIN && r <= R_MAX) {
        return Err(CipherError::InvalidR(r));
    }
    Ok(r * x * (1.0 - x))
}

/// Mutable trajectory state of one keystream.
///
/// Single-owner: never share one state between concurrent encryptions.
#[derive(Debug, Clone)]
pub struct KeystreamState {
    x: f64,
    r: f64,
    iterations: u64,
}

impl KeystreamState {
    pub fn new(key: &ChaoticKey) -> Self {
        Self {
            x: key.x0,
            r: key.r,
            iterations: 0,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Advances the map one step and returns the new state value.
    pub fn step(&mut self) -> f64 {
        self.x = self.r * self.x * (1.0 - self.x);
        self.iterations += 1;
        self.x
    }

    /// Advances one step and quantizes the new state to a byte.
    pub fn next_byte(&mut self) -> u8 {
        (self.step() * 255.0) as u8
    }
}

/// Generates `n` keystream bytes from a fresh state.
pub fn keystream_bytes(key: &ChaoticKey, config: &CipherConfig, n: usize) -> Vec<u8> {
    let mut state = KeystreamState::new(key);
    for _ in 0..config.burn_in {
        state.step();
    }
    (0..n).map(|_| state.next_byte()).collect()
}

/// XORs `data` against the keystream. The state resets to `x0` at the
/// start of the call, so applying the operation twice recovers the input.
pub fn apply_stream(data: &[u8], key: &ChaoticKey, config: &CipherConfig) -> Vec<u8> {
    let mut state = KeystreamState::new(key);
    for _ in 0..config.burn_in {
        state.step();
    }
    data.iter().map(|&b| b ^ state.next_byte()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(x0: f64, r: f64) -> ChaoticKey {
        ChaoticKey::new(x0, r).unwrap()
    }

    #[test]
    fn key_validation() {
        assert!(ChaoticKey::new(0.0, 3.99).is_err());
        assert!(ChaoticKey::new(1.0, 3.99).is_err());
        assert!(ChaoticKey::new(-0.1, 3.99).is_err());
        assert!(ChaoticKey::new(f64::NAN, 3.99).is_err());
        assert!(ChaoticKey::new(0.5, 3.57).is_err());
        assert!(ChaoticKey::new(0.5, 4.0001).is_err());
        assert!(ChaoticKey::new(0.5, f64::NAN).is_err());
        assert!(ChaoticKey::new(0.5, 4.0).is_ok());
        assert!(ChaoticKey::new(0.5, 3.99).is_ok());
    }

    #[test]
    fn step_matches_hand_arithmetic() {
        assert_eq!(logistic_step(0.5, 3.99).unwrap(), 0.9975);
        let next = logistic_step(0.9975, 3.99).unwrap();
        assert!((next - 3.99 * 0.9975 * 0.0025).abs() < 1e-15);
        assert!((next - 0.009950062).abs() < 1e-9);
    }

    #[test]
    fn step_rejects_fixed_point_zero() {
        assert_eq!(
            logistic_step(0.0, 3.99),
            Err(CipherError::InvalidState(0.0))
        );
    }

    #[test]
    fn first_keystream_byte() {
        // x0=0.5, r=3.99: one step gives 0.9975, floor(0.9975*255) = 254
        let ks = keystream_bytes(&key(0.5, 3.99), &CipherConfig::default(), 1);
        assert_eq!(ks, vec![254]);
    }

    #[test]
    fn empty_keystream() {
        assert!(keystream_bytes(&key(0.5, 3.99), &CipherConfig::default(), 0).is_empty());
    }

    #[test]
    fn zero_plaintext_exposes_keystream() {
        let k = key(0.37, 3.97);
        let cfg = CipherConfig::default();
        let ks = keystream_bytes(&k, &cfg, 64);
        assert_eq!(apply_stream(&[0u8; 64], &k, &cfg), ks);
    }

    #[test]
    fn single_byte_example() {
        let ct = apply_stream(&[0x00], &key(0.5, 3.99), &CipherConfig::default());
        assert_eq!(ct, vec![0xFE]);
    }

    #[test]
    fn burn_in_shifts_keystream() {
        let k = key(0.5, 3.99);
        let plain = keystream_bytes(&k, &CipherConfig::default(), 11);
        let burned = keystream_bytes(&k, &CipherConfig::new(1).unwrap(), 10);
        assert_eq!(burned, plain[1..]);
        assert!(CipherConfig::new(MAX_BURN_IN + 1).is_err());
    }

    #[test]
    fn keystream_bytes_never_reach_255() {
        let mut state = KeystreamState::new(&key(0.613, 3.99));
        for _ in 0..1_000_000 {
            assert!(state.next_byte() <= 254);
        }
    }

    #[test]
    fn nearby_keys_diverge() {
        let cfg = CipherConfig::default();
        // x0=0.5 is the map's critical point where a 1e-10 shift is
        // annihilated by f64 rounding, so divergence is measured off it.
        let a = keystream_bytes(&key(0.4, 3.99), &cfg, 10_100);
        let b = keystream_bytes(&key(0.4 + 1e-10, 3.99), &cfg, 10_100);
        let diff = a[100..]
            .iter()
            .zip(&b[100..])
            .filter(|(x, y)| x != y)
            .count();
        assert!(
            diff as f64 / 10_000.0 >= 0.9,
            "divergence ratio {}",
            diff as f64 / 10_000.0
        );
    }

    #[test]
    fn perturb_reflects_at_the_boundary() {
        let k = key(0.995, 3.99);
        let p = k.perturb_x0(0.01).unwrap();
        assert!((p.x0() - 0.985).abs() < 1e-12);
        let q = key(0.4, 3.99).perturb_x0(0.01).unwrap();
        assert!((q.x0() - 0.41).abs() < 1e-12);
    }
}
