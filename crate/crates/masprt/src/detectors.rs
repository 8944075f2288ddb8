//! The three receivers: MASPRT (sequential probability ratio test with
//! decision feedback and truncation), MLDA (fixed-sample maximum-likelihood
//! decision aided by memory) and ADDF (max-sample threshold detector), all
//! computing likelihoods with receiver-assumed `tau = 0` taps.

use crate::channel::{Modulation, Symbol, TapVector};
use crate::error::{Error, Result};

pub use crate::channel::Modulation as ModulationAlias;

/// Wald's sequential test thresholds for target error rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaldThresholds {
    pub a: f64,
    pub b: f64,
    pub log_a: f64,
    pub log_b: f64,
}

/// `A = beta / (1 - alpha)`, `B = (1 - beta) / alpha`.
pub fn wald_thresholds(alpha: f64, beta: f64) -> Result<WaldThresholds> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0,1), got {alpha}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must be in (0,1), got {beta}")));
    }
    let a = beta / (1.0 - alpha);
    let b = (1.0 - beta) / alpha;
    Ok(WaldThresholds { a, b, log_a: a.ln(), log_b: b.ln() })
}

/// Ring buffer of the last `depth` decoded symbols, most recent first.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionMemory {
    depth: usize,
    entries: Vec<Symbol>,
}

impl DecisionMemory {
    /// Empty memory; equivalent to a history of all-`S0` since `x0 = 0`
    /// contributes no interference.
    pub fn new(depth: usize) -> Self {
        DecisionMemory { depth, entries: Vec::with_capacity(depth) }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Stored decisions, most recent first.
    pub fn entries(&self) -> &[Symbol] {
        &self.entries
    }

    /// Record a new decision, evicting the oldest when full.
    pub fn push(&mut self, decision: Symbol) {
        if self.depth == 0 {
            return;
        }
        if self.entries.len() == self.depth {
            self.entries.pop();
        }
        self.entries.insert(0, decision);
    }

    /// Replace contents with the given most-recent-first symbols (testing and
    /// oracle-memory runs).
    pub fn set_entries(&mut self, entries: &[Symbol]) {
        assert!(entries.len() <= self.depth, "more entries than memory depth");
        self.entries = entries.to_vec();
    }
}

/// One decoded symbol with its stopping statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorOutcome {
    pub decision: Symbol,
    /// Samples consumed, in `1..=N`.
    pub stop_time: usize,
    /// True when the truncation rule forced the decision at sample `N`.
    pub truncated: bool,
    pub final_llr: f64,
}

/// How the forced decision at sample `N` compares the LLR to the thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum TruncationMode {
    /// Compare `|llr - log A|` against `|llr - log B|` (default; overflow
    /// free and identical to the linear rule when `alpha = beta`).
    #[default]
    LogDomain,
    /// Compare `|L - A|` against `|L - B|` on the plain likelihood ratio.
    LinearDomain,
}

/// Per-sample Poisson log-likelihood-ratio contribution
/// `y ln(lambda1/lambda0) - (lambda1 - lambda0)`.
pub fn llr_increment(y: u32, lambda1: f64, lambda0: f64) -> Result<f64> {
    if !(lambda1 > 0.0) || !(lambda0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "llr means must be > 0 (noise floor missing?), got lambda1={lambda1} lambda0={lambda0}"
        )));
    }
    Ok(y as f64 * (lambda1 / lambda0).ln() - (lambda1 - lambda0))
}

/// Means are floored here before entering logs; `lambda0 > 0` is the
/// supported operating regime (the reference setup uses `lambda0 = 4`).
const MEAN_FLOOR: f64 = 1e-12;

/// Mean interference at sample `k` (1-based) of the current symbol caused by
/// the remembered past decisions, excluding the noise floor.
///
/// Taps must come from the receiver view (`tau = 0`) and cover at least
/// `depth * N + k` slots. Empty memory contributes nothing.
pub fn estimate_isi(
    k: usize,
    memory: &DecisionMemory,
    modulation: &Modulation,
    taps: &TapVector,
) -> f64 {
    let n = modulation.n();
    debug_assert!(k >= 1 && k <= n, "sample index out of window");
    let mut acc = 0.0;
    for (b, &entry) in memory.entries().iter().enumerate() {
        if !entry.is_one() {
            continue;
        }
        let b1 = b + 1; // symbols back
        for slot in 1..=n {
            let tap_idx = b1 * n + k - slot + 1;
            acc += taps.tap(tap_idx) * modulation.x1()[slot - 1];
        }
    }
    acc
}

/// Within-symbol convolution mean at sample `k` under `s1`:
/// `sum_{i=1..k} pi_i x_{k-i+1}`.
fn current_symbol_mean(k: usize, modulation: &Modulation, taps: &TapVector) -> f64 {
    let mut acc = 0.0;
    for i in 1..=k {
        acc += taps.tap(i) * modulation.x1()[k - i];
    }
    acc
}

/// Hypothesis means for every sample of the current window.
fn window_means(
    memory: &DecisionMemory,
    modulation: &Modulation,
    taps: &TapVector,
    n0: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = modulation.n();
    let mut l1 = Vec::with_capacity(n);
    let mut l0 = Vec::with_capacity(n);
    for k in 1..=n {
        let isi = estimate_isi(k, memory, modulation, taps);
        l1.push((current_symbol_mean(k, modulation, taps) + isi + n0).max(MEAN_FLOOR));
        l0.push((isi + n0).max(MEAN_FLOOR));
    }
    (l1, l0)
}

/// Run the truncated sequential test over one symbol window.
///
/// Accumulates per-sample LLR increments and stops at the first sample where
/// the log ratio reaches `log B` (decide `s1`) or `log A` (decide `s0`).
/// Without a crossing by sample `N` the truncation rule decides `s0` iff the
/// ratio is strictly closer to the `A` threshold, ties going to `s1`.
pub fn masprt_detect(
    samples: &[u32],
    memory: &DecisionMemory,
    modulation: &Modulation,
    taps: &TapVector,
    n0: f64,
    thresholds: &WaldThresholds,
    trunc: TruncationMode,
) -> DetectorOutcome {
    let n = modulation.n();
    assert_eq!(samples.len(), n, "window length must equal samples per symbol");
    let (l1, l0) = window_means(memory, modulation, taps, n0);
    let mut llr = 0.0;
    for k in 0..n {
        llr += llr_increment(samples[k], l1[k], l0[k]).expect("window means floored positive");
        if llr >= thresholds.log_b {
            return DetectorOutcome { decision: Symbol::S1, stop_time: k + 1, truncated: false, final_llr: llr };
        }
        if llr <= thresholds.log_a {
            return DetectorOutcome { decision: Symbol::S0, stop_time: k + 1, truncated: false, final_llr: llr };
        }
    }
    let decision = match trunc {
        TruncationMode::LogDomain => {
            if (llr - thresholds.log_a).abs() < (llr - thresholds.log_b).abs() {
                Symbol::S0
            } else {
                Symbol::S1
            }
        }
        TruncationMode::LinearDomain => {
            let ratio = llr.exp();
            if (ratio - thresholds.a).abs() < (ratio - thresholds.b).abs() {
                Symbol::S0
            } else {
                Symbol::S1
            }
        }
    };
    DetectorOutcome { decision, stop_time: n, truncated: true, final_llr: llr }
}

/// Decision threshold for the scalar ML detector:
/// `gamma = pi1 (x1 - x0) / ln((pi1 x1 + isi + n0) / (pi1 x0 + isi + n0))`.
pub fn mlda_threshold(x0: f64, x1: f64, pi1: f64, isi_hat: f64, n0: f64) -> Result<f64> {
    if !(x1 > x0) || x0 < 0.0 {
        return Err(Error::Degenerate(format!(
            "mlda threshold needs x1 > x0 >= 0, got x0={x0} x1={x1}"
        )));
    }
    let num = pi1 * (x1 - x0);
    let den = ((pi1 * x1 + isi_hat + n0) / (pi1 * x0 + isi_hat + n0)).ln();
    if !(den > 0.0) {
        return Err(Error::Degenerate("hypothesis means are indistinguishable".into()));
    }
    Ok(num / den)
}

/// Fixed-sample ML detection over the window.
///
/// With one sample per symbol this is the scalar threshold rule
/// `y1 >= gamma`; with a sequence modulation it is the joint ML decision
/// `sum_k llr_increment(y_k) >= 0`, ISI estimated from memory either way.
pub fn mlda_detect(
    samples: &[u32],
    memory: &DecisionMemory,
    modulation: &Modulation,
    taps: &TapVector,
    n0: f64,
) -> DetectorOutcome {
    let n = modulation.n();
    assert_eq!(samples.len(), n, "window length must equal samples per symbol");
    if n == 1 {
        let isi = estimate_isi(1, memory, modulation, taps);
        let gamma = mlda_threshold(0.0, modulation.x1()[0], taps.tap(1), isi, n0)
            .expect("scalar modulation with positive amplitude");
        let decision = if (samples[0] as f64) >= gamma { Symbol::S1 } else { Symbol::S0 };
        let (l1, l0) = window_means(memory, modulation, taps, n0);
        let llr = llr_increment(samples[0], l1[0], l0[0]).expect("floored means");
        return DetectorOutcome { decision, stop_time: 1, truncated: false, final_llr: llr };
    }
    let (l1, l0) = window_means(memory, modulation, taps, n0);
    let mut llr = 0.0;
    for k in 0..n {
        llr += llr_increment(samples[k], l1[k], l0[k]).expect("floored means");
    }
    let decision = if llr >= 0.0 { Symbol::S1 } else { Symbol::S0 };
    DetectorOutcome { decision, stop_time: n, truncated: false, final_llr: llr }
}

/// Max-sample threshold detection: subtract the estimated ISI per sample and
/// compare the window maximum against `eta`.
pub fn addf_detect(
    samples: &[u32],
    memory: &DecisionMemory,
    modulation: &Modulation,
    taps: &TapVector,
    eta: f64,
) -> DetectorOutcome {
    let n = modulation.n();
    assert_eq!(samples.len(), n, "window length must equal samples per symbol");
    let mut y_max = f64::NEG_INFINITY;
    for k in 1..=n {
        let corrected = samples[k - 1] as f64 - estimate_isi(k, memory, modulation, taps);
        if corrected > y_max {
            y_max = corrected;
        }
    }
    let decision = if y_max >= eta { Symbol::S1 } else { Symbol::S0 };
    DetectorOutcome { decision, stop_time: n, truncated: false, final_llr: y_max }
}
