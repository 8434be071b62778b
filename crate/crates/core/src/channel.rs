//! Clustered massive-MIMO downlink channel: tapped-delay-line Rayleigh
//! fading, zero-forcing beamforming from the SIC users' CSI, channel
//! application with AWGN, and one-tap LS/MMSE equalization.
//!
//! The ZF precoder nulls inter-cluster interference at the near (SIC) users
//! only; far users see every beam, which is what the effective-link
//! decomposition reproduces and the brute-force antenna-domain oracle in
//! the tests checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::signal::SignalBlock;
use crate::C64;

/// Base-station array size and cluster count (two users per cluster).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterTopology {
    pub tx_antennas: usize,
    pub clusters: usize,
}

impl ClusterTopology {
    pub fn new(tx_antennas: usize, clusters: usize) -> Result<Self> {
        if clusters == 0 {
            return Err(Error::Config("cluster count must be >= 1".into()));
        }
        if tx_antennas < clusters {
            return Err(Error::Config(format!(
                "tx antennas {tx_antennas} must be >= cluster count {clusters}"
            )));
        }
        Ok(Self { tx_antennas, clusters })
    }

    pub fn users(&self) -> usize {
        2 * self.clusters
    }
}

/// Small-scale taps per (user, antenna) link plus per-user large-scale gains.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `taps[user][antenna][l]`, CN(0, pdp[l] * gain[user]).
    pub taps: Vec<Vec<Vec<C64>>>,
    /// Per-user large-scale power gain (linear).
    pub gains: Vec<f64>,
}

impl ChannelRealization {
    /// Frequency-flat equivalent row for one user: per-antenna tap sums.
    pub fn flat_row(&self, user: usize) -> Vec<C64> {
        self.taps[user]
            .iter()
            .map(|taps| taps.iter().sum())
            .collect()
    }
}

/// Column-normalized ZF precoding vectors, one per cluster.
#[derive(Debug, Clone)]
pub struct Precoder {
    /// `columns[cluster][antenna]`, each column unit norm.
    pub columns: Vec<Vec<C64>>,
}

fn complex_normal(rng: &mut ChaCha8Rng, var: f64) -> C64 {
    let n = Normal::new(0.0, (var / 2.0).sqrt()).unwrap();
    C64::new(rng.sample(n), rng.sample(n))
}

/// Draw an i.i.d. Rayleigh tapped-delay-line realization. The power-delay
/// profile must sum to one; each tap of user `u` has variance
/// `pdp[l] * gains[u]`. Deterministic given `seed`.
pub fn gen_channel(
    topology: &ClusterTopology,
    pdp: &[f64],
    gains: &[f64],
    seed: u64,
) -> Result<ChannelRealization> {
    if pdp.is_empty() || pdp.iter().any(|&p| p < 0.0) {
        return Err(Error::Config("power-delay profile must be non-negative".into()));
    }
    let total: f64 = pdp.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "power-delay profile sums to {total}, expected 1"
        )));
    }
    if gains.len() != topology.users() {
        return Err(Error::Config(format!(
            "{} gains supplied for {} users",
            gains.len(),
            topology.users()
        )));
    }
    if gains.iter().any(|&g| g <= 0.0) {
        return Err(Error::Config("large-scale gains must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taps = (0..topology.users())
        .map(|u| {
            (0..topology.tx_antennas)
                .map(|_| {
                    pdp.iter()
                        .map(|&p| complex_normal(&mut rng, p * gains[u]))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(ChannelRealization { taps, gains: gains.to_vec() })
}

/// ZF precoder from the near users' channel rows (clusters x antennas):
/// pseudo-inverse of the row stack with each column renormalized to unit
/// norm. Rejects matrices with condition number above 1e12.
pub fn zf_precoder(h_near: &[Vec<C64>]) -> Result<Precoder> {
    let clusters = h_near.len();
    if clusters == 0 {
        return Err(Error::Config("need at least one cluster row".into()));
    }
    let antennas = h_near[0].len();
    if antennas < clusters || h_near.iter().any(|r| r.len() != antennas) {
        return Err(Error::Config(
            "near-user CSI must be a clusters x antennas matrix with antennas >= clusters".into(),
        ));
    }
    let m = DMatrix::from_fn(clusters, antennas, |r, c| h_near[r][c]);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > 1e12 {
        return Err(Error::Singular(format!(
            "near-user CSI condition number {:.3e} exceeds 1e12",
            if smin > 0.0 { smax / smin } else { f64::INFINITY }
        )));
    }
    let pinv = svd
        .pseudo_inverse(smax * 1e-14)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let columns = (0..clusters)
        .map(|n| {
            let col: Vec<C64> = (0..antennas).map(|a| pinv[(a, n)]).collect();
            let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            col.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    Ok(Precoder { columns })
}

/// Effective single-input link seen by `user` from cluster `cluster`:
/// the per-tap inner product of the user's channel rows with the cluster's
/// precoding column.
pub fn effective_link(
    chan: &ChannelRealization,
    precoder: &Precoder,
    cluster: usize,
    user: usize,
) -> Result<Vec<C64>> {
    if user >= chan.taps.len() {
        return Err(Error::Config(format!("user id {user} out of range")));
    }
    if cluster >= precoder.columns.len() {
        return Err(Error::Config(format!("cluster id {cluster} out of range")));
    }
    let v = &precoder.columns[cluster];
    let n_taps = chan.taps[user][0].len();
    let mut h_eff = vec![C64::new(0.0, 0.0); n_taps];
    for (a, taps) in chan.taps[user].iter().enumerate() {
        for (l, &t) in taps.iter().enumerate() {
            h_eff[l] += t * v[a];
        }
    }
    Ok(h_eff)
}

/// Linear convolution with the effective taps, truncated to the input
/// length, plus CN(0, noise_var) receiver noise. Deterministic given `seed`.
/// When a cyclic prefix at least as long as the channel memory is present,
/// the truncation reproduces circular convolution over the block body.
pub fn apply_channel(x: &SignalBlock, taps: &[C64], noise_var: f64, seed: u64) -> SignalBlock {
    assert!(noise_var >= 0.0, "noise variance must be non-negative");
    let mut out = convolve_truncated(&x.samples, taps);
    if noise_var > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut out {
            *v += complex_normal(&mut rng, noise_var);
        }
    }
    SignalBlock::with_rate(out, x.sample_rate)
}

/// Noise-free part of [`apply_channel`], used when several beams superpose
/// before a single noise draw.
pub fn convolve_truncated(x: &[C64], taps: &[C64]) -> Vec<C64> {
    let n = x.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (l, &t) in taps.iter().enumerate() {
        if t.norm_sqr() == 0.0 {
            continue;
        }
        for i in l..n {
            out[i] += t * x[i - l];
        }
    }
    out
}

/// Unnormalized DTFT of the taps at the `n` DFT bin frequencies, i.e. the
/// per-bin gains seen after a unitary DFT of a circularly convolved block.
pub fn frequency_response(taps: &[C64], n: usize) -> Vec<C64> {
    use std::f64::consts::PI;
    (0..n)
        .map(|k| {
            taps.iter()
                .enumerate()
                .map(|(l, &t)| {
                    let ang = -2.0 * PI * (k * l % n) as f64 / n as f64;
                    t * C64::new(ang.cos(), ang.sin())
                })
                .sum()
        })
        .collect()
}

/// Per-bin zero-forcing equalization `y[k] / h[k]`. Bins with |h| below
/// 1e-12 are zeroed and counted as erasures instead of dividing.
pub fn equalize_ls(y: &[C64], h: &[C64]) -> (Vec<C64>, usize) {
    debug_assert_eq!(y.len(), h.len());
    let mut erasures = 0;
    let out = y
        .iter()
        .zip(h)
        .map(|(&v, &g)| {
            if g.norm() < 1e-12 {
                erasures += 1;
                C64::new(0.0, 0.0)
            } else {
                v / g
            }
        })
        .collect();
    (out, erasures)
}

/// Per-bin MMSE equalization `conj(h) y / (|h|^2 + noise_var)`.
pub fn equalize_mmse(y: &[C64], h: &[C64], noise_var: f64) -> Vec<C64> {
    debug_assert_eq!(y.len(), h.len());
    y.iter()
        .zip(h)
        .map(|(&v, &g)| g.conj() * v / (g.norm_sqr() + noise_var))
        .collect()
}

/// Post-equalization symbol gain of the MMSE equalizer,
/// `|h|^2 / (|h|^2 + noise_var)`; the LS equivalent is exactly 1.
pub fn mmse_bias(h: &[C64], noise_var: f64) -> Vec<C64> {
    h.iter()
        .map(|&g| C64::new(g.norm_sqr() / (g.norm_sqr() + noise_var), 0.0))
        .collect()
}
