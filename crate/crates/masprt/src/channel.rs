//! Diffusion channel model: closed-form per-slot hitting probabilities and a
//! seeded Poisson sample generator for whole packets.
//!
//! A molecule released at a slot boundary first reaches the receiver during
//! the i-th subsequent sampling window with probability
//! `pi_i(tau) = 2Q(rho / sqrt(i ts + tau)) - 2Q(rho / sqrt((i-1) ts + tau))`,
//! where `tau` is the offset between the transmitter release grid and the
//! receiver sampling grid. The transmitter-truth `tau` enters packet
//! generation only through these taps; receiver-side computations always use
//! a `tau = 0` copy of the parameters.

use crate::error::{Error, Result};
use crate::math::two_q_sqrt;
use crate::rng;
use serde::{Deserialize, Serialize};

/// A binary source symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    S0,
    S1,
}

impl Symbol {
    pub fn is_one(self) -> bool {
        matches!(self, Symbol::S1)
    }

    pub fn from_bit(bit: u8) -> Symbol {
        if bit == 0 {
            Symbol::S0
        } else {
            Symbol::S1
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Symbol::S0 => 0,
            Symbol::S1 => 1,
        }
    }
}

/// Physical channel parameters.
///
/// `rho = d / sqrt(2 D)` folds the transmitter-receiver distance and the
/// diffusion constant into one value with units of sqrt(seconds).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Distance/diffusion constant (sqrt seconds).
    pub rho: f64,
    /// Sampling slot duration (seconds).
    pub ts: f64,
    /// Background noise rate (molecules per second).
    pub lambda0: f64,
    /// Synchronization error between transmitter and receiver (seconds).
    pub tau: f64,
}

impl ChannelParams {
    pub fn new(rho: f64, ts: f64, lambda0: f64, tau: f64) -> Result<Self> {
        let p = ChannelParams { rho, ts, lambda0, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.ts > 0.0) {
            return Err(Error::InvalidParameter(format!("ts must be > 0, got {}", self.ts)));
        }
        if !(self.lambda0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda0 must be >= 0, got {}",
                self.lambda0
            )));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be >= 0, got {}", self.tau)));
        }
        Ok(())
    }

    /// Per-sample noise floor `n0 = lambda0 * ts`.
    pub fn n0(&self) -> f64 {
        self.lambda0 * self.ts
    }

    /// The receiver's view of the channel: identical, but with `tau = 0`.
    pub fn receiver_view(&self) -> ChannelParams {
        ChannelParams { tau: 0.0, ..*self }
    }
}

/// The channel impulse response: per-slot hitting probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct TapVector {
    taps: Vec<f64>,
    tau: f64,
}

impl TapVector {
    /// Tap for 1-based slot index `i`; panics if out of range.
    pub fn tap(&self, i: usize) -> f64 {
        self.taps[i - 1]
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.taps
    }

    /// Sum of all stored taps (mass captured within the truncation horizon).
    pub fn captured_mass(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Hitting mass arriving after the truncation horizon:
    /// `1 - 2Q(rho / sqrt(L ts + tau))`.
    pub fn neglected_tail(&self, params: &ChannelParams) -> f64 {
        1.0 - two_q_sqrt(params.rho, self.taps.len() as f64 * params.ts + params.tau)
    }
}

/// Probability that a molecule is first detected during the i-th sampling
/// window after its release (1-based).
pub fn hitting_prob(i: usize, params: &ChannelParams) -> Result<f64> {
    if i < 1 {
        return Err(Error::InvalidParameter("slot index must be >= 1".into()));
    }
    params.validate()?;
    let hi = two_q_sqrt(params.rho, i as f64 * params.ts + params.tau);
    let lo = two_q_sqrt(params.rho, (i - 1) as f64 * params.ts + params.tau);
    Ok(hi - lo)
}

/// First `len` hitting probabilities.
pub fn tap_vector(len: usize, params: &ChannelParams) -> Result<TapVector> {
    if len < 1 {
        return Err(Error::InvalidParameter("tap vector length must be >= 1".into()));
    }
    params.validate()?;
    let taps = (1..=len)
        .map(|i| {
            let hi = two_q_sqrt(params.rho, i as f64 * params.ts + params.tau);
            let lo = two_q_sqrt(params.rho, (i - 1) as f64 * params.ts + params.tau);
            hi - lo
        })
        .collect();
    Ok(TapVector { taps, tau: params.tau })
}

/// Mean molecule count at the last slot of `rate_history`: the convolution of
/// the taps with the release-rate history, evaluated at the final index, plus
/// the noise floor `lambda0 * ts`.
///
/// `rate_history[j]` is the release rate in slot `j + 1`; the last entry is
/// the slot being sampled.
pub fn mean_rate_at(rate_history: &[f64], taps: &TapVector, params: &ChannelParams) -> Result<f64> {
    let k = rate_history.len();
    if k == 0 {
        return Err(Error::InvalidParameter("rate history must be nonempty".into()));
    }
    if taps.len() < k {
        return Err(Error::InvalidParameter(format!(
            "tap vector ({} taps) shorter than rate history ({} slots)",
            taps.len(),
            k
        )));
    }
    if let Some(r) = rate_history.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::InvalidParameter(format!("release rates must be >= 0, got {r}")));
    }
    let mut acc = 0.0;
    for i in 1..=k {
        acc += taps.tap(i) * rate_history[k - i];
    }
    Ok(acc + params.n0())
}

/// Per-symbol release-rate sequences for binary signalling: `x0` is all
/// zeros, `x1` carries the design. Rates are molecules per release slot and
/// the Euclidean norm of `x1` is bounded by the power budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    x1: Vec<f64>,
    power: f64,
}

impl Modulation {
    pub fn new(x1: Vec<f64>, power: f64) -> Result<Self> {
        if x1.is_empty() {
            return Err(Error::InvalidParameter("x1 must have at least one slot".into()));
        }
        if !(power > 0.0) {
            return Err(Error::InvalidParameter(format!("power must be > 0, got {power}")));
        }
        if let Some(v) = x1.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("x1 entries must be >= 0, got {v}")));
        }
        let norm = crate::math::l2_norm(&x1);
        if norm > power * (1.0 + 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "||x1|| = {norm} exceeds power budget {power}"
            )));
        }
        Ok(Modulation { x1, power })
    }

    /// Scalar mapping: a single release of `amplitude` molecules per symbol
    /// (one slot per symbol).
    pub fn scalar(amplitude: f64, power: f64) -> Result<Self> {
        Modulation::new(vec![amplitude], power)
    }

    /// Samples per symbol.
    pub fn n(&self) -> usize {
        self.x1.len()
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    /// Rate for slot `k` (1-based) under the given symbol.
    pub fn rate(&self, symbol: Symbol, k: usize) -> f64 {
        match symbol {
            Symbol::S0 => 0.0,
            Symbol::S1 => self.x1[k - 1],
        }
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn norm(&self) -> f64 {
        crate::math::l2_norm(&self.x1)
    }
}

/// Poisson counts for a whole packet, one row of `n` samples per symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    counts: Vec<u32>,
    n: usize,
    bits: Vec<Symbol>,
    seed: u64,
    neglected_tail: f64,
}

impl SampleMatrix {
    pub fn symbols(&self) -> usize {
        self.bits.len()
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.n
    }

    /// The `n` counts observed during symbol `m` (0-based).
    pub fn symbol_window(&self, m: usize) -> &[u32] {
        &self.counts[m * self.n..(m + 1) * self.n]
    }

    pub fn bits(&self) -> &[Symbol] {
        &self.bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Hitting mass beyond the simulation's ISI horizon, reported per run.
    pub fn neglected_tail(&self) -> f64 {
        self.neglected_tail
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Simulate the Poisson counts for a packet of symbols under the true `tau`.
///
/// `horizon` is the ISI truncation depth in slots: each sample's mean sums
/// release contributions from at most that many preceding slots. Identical
/// `(bits, modulation, params, horizon, seed)` yield bit-identical output;
/// each symbol draws from its own derived ChaCha stream so packets can be
/// generated in parallel shards.
pub fn simulate_packet(
    bits: &[Symbol],
    modulation: &Modulation,
    params: &ChannelParams,
    horizon: usize,
    seed: u64,
) -> Result<SampleMatrix> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("packet must contain at least one symbol".into()));
    }
    params.validate()?;
    let n = modulation.n();
    let total_slots = bits.len() * n;
    let horizon = horizon.max(1).min(total_slots);
    let taps = tap_vector(horizon, params)?;

    // Concatenated release rates over the packet.
    let mut rates = vec![0.0f64; total_slots];
    for (m, &b) in bits.iter().enumerate() {
        if b.is_one() {
            rates[m * n..(m + 1) * n].copy_from_slice(modulation.x1());
        }
    }

    let n0 = params.n0();
    let mut counts = vec![0u32; total_slots];
    for m in 0..bits.len() {
        let mut stream = rng::stream(rng::derive_seed(seed, m as u64));
        for k in 0..n {
            let g = m * n + k; // 0-based global slot index
            let reach = horizon.min(g + 1);
            let mut mean = n0;
            for (d, &tap) in taps.as_slice()[..reach].iter().enumerate() {
                mean += tap * rates[g - d];
            }
            counts[g] = rng::poisson(&mut stream, mean) as u32;
        }
    }

    Ok(SampleMatrix {
        counts,
        n,
        bits: bits.to_vec(),
        seed,
        neglected_tail: taps.neglected_tail(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params_ref() -> ChannelParams {
        ChannelParams::new(0.3f64.sqrt(), 0.1, 4.0, 0.0).unwrap()
    }

    #[test]
    fn hitting_prob_reference_values() {
        let p = params_ref();
        // pi_1(0) = erfc(rho / sqrt(2 ts)) with the second Q term at Q(inf) = 0.
        assert_relative_eq!(hitting_prob(1, &p).unwrap(), 0.08326451666355045, max_relative = 1e-12);
        assert_relative_eq!(hitting_prob(2, &p).unwrap(), 0.13740684525629648, max_relative = 1e-12);
        assert_relative_eq!(hitting_prob(3, &p).unwrap(), 0.09663914594306722, max_relative = 1e-12);
    }

    #[test]
    fn hitting_prob_vanishes_for_large_tau() {
        let p = ChannelParams::new(0.3f64.sqrt(), 0.1, 4.0, 1e9).unwrap();
        assert!(hitting_prob(1, &p).unwrap() < 1e-12);
    }

    #[test]
    fn hitting_prob_rejects_bad_index() {
        assert!(hitting_prob(0, &params_ref()).is_err());
    }

    #[test]
    fn tap_vector_matches_hitting_prob() {
        let p = params_ref();
        let taps = tap_vector(3, &p).unwrap();
        assert_eq!(taps.len(), 3);
        for i in 1..=3 {
            assert_eq!(taps.tap(i), hitting_prob(i, &p).unwrap());
        }
    }

    #[test]
    fn tap_vector_rejects_zero_length() {
        assert!(tap_vector(0, &params_ref()).is_err());
    }

    #[test]
    fn telescoping_identity() {
        // sum_{i<=M} pi_i(tau) == 2Q(rho/sqrt(M ts + tau)) - 2Q(rho/sqrt(tau))
        for &tau in &[0.0, 0.05, 0.25, 1.0] {
            let p = ChannelParams::new(0.3f64.sqrt(), 0.1, 4.0, tau).unwrap();
            for &m in &[1usize, 7, 40, 300] {
                let taps = tap_vector(m, &p).unwrap();
                let lhs = taps.captured_mass();
                let rhs = crate::math::two_q_sqrt(p.rho, m as f64 * p.ts + tau)
                    - crate::math::two_q_sqrt(p.rho, tau);
                assert!((lhs - rhs).abs() < 1e-12, "tau={tau} M={m}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn first_tap_mass_shift_near_zero_offset() {
        // pi_1 is continuous in tau, and the zero-offset tap dominates small
        // offsets in the rho^2 > ts regime. Checked on a grid; general
        // monotonicity is not asserted.
        let base = hitting_prob(1, &params_ref()).unwrap();
        let mut prev = base;
        for step in 1..=20 {
            let tau = 1.0 + step as f64 * 0.5; // far side of the arrival peak
            let p = ChannelParams::new(0.3f64.sqrt(), 0.1, 4.0, tau).unwrap();
            let v = hitting_prob(1, &p).unwrap();
            assert!(v <= base + 1e-12);
            assert!((v - prev).abs() < 0.2, "continuity on the grid");
            prev = v;
        }
    }

    #[test]
    fn mean_rate_examples() {
        let p = params_ref();
        let taps = tap_vector(8, &p).unwrap();
        // Noise floor only.
        assert_relative_eq!(mean_rate_at(&[0.0, 0.0, 0.0], &taps, &p).unwrap(), 0.4, epsilon = 1e-12);
        // Single release seen through tap 1.
        assert_relative_eq!(
            mean_rate_at(&[100.0], &taps, &p).unwrap(),
            8.726451666355045,
            max_relative = 1e-12
        );
        // Same release one slot later: tap 2.
        assert_relative_eq!(
            mean_rate_at(&[100.0, 0.0], &taps, &p).unwrap(),
            14.140684525629649,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mean_rate_rejects_bad_inputs() {
        let p = params_ref();
        let taps = tap_vector(2, &p).unwrap();
        assert!(mean_rate_at(&[1.0, 2.0, 3.0], &taps, &p).is_err()); // taps too short
        assert!(mean_rate_at(&[-1.0], &taps, &p).is_err()); // negative rate
    }

    #[test]
    fn mean_rate_is_linear_in_history() {
        let p = params_ref();
        let taps = tap_vector(16, &p).unwrap();
        let mut rng = crate::rng::stream(11);
        use rand::Rng;
        for _ in 0..20 {
            let a: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() * 50.0).collect();
            let b: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() * 50.0).collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let n0 = p.n0();
            let fa = mean_rate_at(&a, &taps, &p).unwrap() - n0;
            let fb = mean_rate_at(&b, &taps, &p).unwrap() - n0;
            let fs = mean_rate_at(&sum, &taps, &p).unwrap() - n0;
            assert_relative_eq!(fs, fa + fb, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn packet_zero_bits_zero_noise_all_zero() {
        let p = ChannelParams::new(0.3f64.sqrt(), 0.1, 0.0, 0.0).unwrap();
        let m = Modulation::new(vec![10.0; 4], 100.0).unwrap();
        let out = simulate_packet(&[Symbol::S0; 50], &m, &p, 40, 1).unwrap();
        assert!(out.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn packet_determinism() {
        let p = ChannelParams::new(0.3f64.sqrt(), 0.1, 4.0, 0.3).unwrap();
        let m = Modulation::new(vec![5.0, 3.0, 1.0], 100.0).unwrap();
        let bits: Vec<Symbol> = (0..40).map(|i| Symbol::from_bit((i % 3 == 0) as u8)).collect();
        let a = simulate_packet(&bits, &m, &p, 30, 77).unwrap();
        let b = simulate_packet(&bits, &m, &p, 30, 77).unwrap();
        assert_eq!(a, b);
        let c = simulate_packet(&bits, &m, &p, 30, 78).unwrap();
        assert_ne!(a.counts(), c.counts());
    }

    #[test]
    fn packet_sample_means_match_analytic_mean() {
        // All-ones packet: empirical mean of sample k over many trials should
        // sit within 3 sigma / sqrt(trials) of mean_rate_at.
        let p = params_ref();
        let n = 4;
        let m = Modulation::new(vec![25.0; n], 100.0).unwrap();
        let sym = 3usize; // look at the 4th symbol, ISI settled
        let trials = 4000usize;
        let horizon = 64;
        let taps = tap_vector(horizon, &p).unwrap();
        let bits = vec![Symbol::S1; 8];
        let mut sums = vec![0.0f64; n];
        for t in 0..trials {
            let out = simulate_packet(&bits, &m, &p, horizon, 1000 + t as u64).unwrap();
            for (k, &c) in out.symbol_window(sym).iter().enumerate() {
                sums[k] += c as f64;
            }
        }
        // Analytic mean for sample k of symbol `sym`.
        let mut history = vec![0.0f64; 0];
        for _ in 0..=sym {
            history.extend_from_slice(m.x1());
        }
        for k in 0..n {
            let upto = sym * n + k + 1;
            let start = upto.saturating_sub(horizon);
            let mean = mean_rate_at(&history[start..upto], &taps, &p).unwrap();
            let emp = sums[k] / trials as f64;
            let tol = 3.0 * (mean / trials as f64).sqrt();
            assert!(
                (emp - mean).abs() < tol,
                "sample {k}: empirical {emp} vs analytic {mean} (tol {tol})"
            );
        }
    }
}
