//! Monte Carlo orchestration: seed derivation, SNR sweeps, and the PAPR,
//! PSD and sum-rate experiments.
//!
//! Determinism contract: every result is a pure function of the
//! [`SimConfig`] (including its master seed). Trials derive their RNG
//! streams from (master, trial, tag) alone, workers only partition trial
//! indices of fixed-size batches, and partial results merge in trial order,
//! so the output is bit-identical for any worker count.
//!
//! SNR referencing: the grid value is the mean received symbol SNR after
//! large-scale gain. A user with gain `G` gets noise variance
//! `G * xi / snr`, where `xi` charges the gross transmit energy per data
//! symbol: `(Q + cp)/Q` for the FFT back-end (the cyclic prefix costs
//! energy as well as time) and exactly 1 for the wavelet back-end. The
//! sum-rate sweep instead uses the plain `G / snr` reference and accounts
//! for CP overhead through the spectral-efficiency index alone, so that
//! the wavelet/FFT rate ratio is the pure index ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    apply_channel, convolve_truncated, effective_link, equalize_ls, equalize_mmse,
    frequency_response, gen_channel, mmse_bias, zf_precoder, ClusterTopology,
};
use crate::error::{Error, Result};
use crate::metrics::{
    estimate_psd, papr_ccdf, spectral_efficiency_index, sum_rate, BackendKind, MetricKind,
    MetricRecord, SerCount, Window,
};
use crate::modem::{QamConstellation, SymbolStream};
use crate::noma::{
    decode_far_indices, pair_users, sic_decode_near_indices, superpose, PowerAllocation,
    SicConfig,
};
use crate::ofdm::{ofdm_demodulate, ofdm_modulate, OfdmConfig};
use crate::signal::SignalBlock;
use crate::wavelet::{dwt_analyze, wavelet_modulate, WaveletFamily, WaveletSpec};
use crate::C64;

/// Trials per scheduling batch. The early-stopping rule is evaluated only
/// on batch boundaries so that worker count cannot change which trials run.
const TRIAL_BATCH: usize = 64;

/// Default PAPR CCDF threshold grid: 0..16 dB in 0.05 dB steps.
pub fn papr_threshold_grid() -> Vec<f64> {
    (0..=320).map(|i| i as f64 * 0.05).collect()
}

/// Pulse-shaping back-end selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Fft,
    Wavelet(WaveletFamily),
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Fft => BackendKind::Fft,
            Backend::Wavelet(_) => BackendKind::Wavelet,
        }
    }

    /// Tag used in result rows, e.g. `fft` or `wavelet:haar`.
    pub fn tag(&self) -> String {
        match self {
            Backend::Fft => "fft".to_string(),
            Backend::Wavelet(f) => format!("wavelet:{}", f.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equalizer {
    Ls,
    Mmse,
}

impl Equalizer {
    pub fn name(&self) -> &'static str {
        match self {
            Equalizer::Ls => "ls",
            Equalizer::Mmse => "mmse",
        }
    }
}

/// Full description of one simulation arm.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub backend: Backend,
    pub wavelet_levels: usize,
    pub ofdm: OfdmConfig,
    pub modulation_order: usize,
    pub topology: ClusterTopology,
    pub alloc: PowerAllocation,
    pub sic: SicConfig,
    pub equalizer: Equalizer,
    /// Ascending SNR grid in dB (received reference, see module docs).
    pub snr_grid_db: Vec<f64>,
    /// Upper bound on trials per SNR point (one block per cluster each).
    pub max_trials: usize,
    /// Early-stop once both user roles have at least this many errors.
    pub target_errors: u64,
    pub master_seed: u64,
    /// Power-delay profile (must sum to 1).
    pub pdp: Vec<f64>,
    /// Large-scale gain (dB) of the user group the reference labels "near".
    pub gain_near_db: f64,
    /// Large-scale gain (dB) of the "far"-labelled group.
    pub gain_far_db: f64,
    /// Scale of the multiplicative CSI perturbation applied at the BS.
    pub csi_error: f64,
    /// Fraction of the band loaded by the PSD experiment.
    pub psd_occupancy: f64,
    pub welch_segment: usize,
    pub welch_overlap: f64,
}

impl SimConfig {
    /// Symbols carried per modulated block (shared by both back-ends).
    pub fn block_symbols(&self) -> usize {
        self.ofdm.subcarriers
    }

    /// Gross transmit energy per data symbol (the SER-path SNR charge).
    pub fn energy_overhead(&self) -> f64 {
        match self.backend {
            Backend::Fft => self.ofdm.energy_overhead(),
            Backend::Wavelet(_) => 1.0,
        }
    }

    pub fn wavelet_spec(&self) -> Result<WaveletSpec> {
        match self.backend {
            Backend::Wavelet(family) => WaveletSpec::new(family, self.wavelet_levels),
            Backend::Fft => Err(Error::Config("not a wavelet back-end".into())),
        }
    }

    /// Per-user large-scale gains: the first half of the users carries the
    /// "near"-labelled gain, the second half the "far"-labelled one. Roles
    /// are assigned afterwards by measured gain in [`pair_users`].
    pub fn user_gains(&self) -> Vec<f64> {
        let users = self.topology.users();
        let g_near = 10f64.powf(self.gain_near_db / 10.0);
        let g_far = 10f64.powf(self.gain_far_db / 10.0);
        (0..users)
            .map(|u| if u < users / 2 { g_near } else { g_far })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr grid must not be empty".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("snr grid must be strictly ascending".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::Config("trial count must be >= 1".into()));
        }
        QamConstellation::new(self.modulation_order)?;
        if let Backend::Wavelet(_) = self.backend {
            let spec = self.wavelet_spec()?;
            if self.block_symbols() % (1 << spec.levels) != 0 {
                return Err(Error::Config(format!(
                    "block size {} not divisible by 2^{}",
                    self.block_symbols(),
                    spec.levels
                )));
            }
        }
        let pdp_sum: f64 = self.pdp.iter().sum();
        if self.pdp.is_empty() || (pdp_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config("power-delay profile must sum to 1".into()));
        }
        if !(self.psd_occupancy > 0.0 && self.psd_occupancy <= 1.0) {
            return Err(Error::Config(format!(
                "psd occupancy {} must be in (0, 1]",
                self.psd_occupancy
            )));
        }
        if self.csi_error < 0.0 {
            return Err(Error::Config("csi error scale must be >= 0".into()));
        }
        if !self.welch_segment.is_power_of_two() {
            return Err(Error::Config("welch segment must be a power of two".into()));
        }
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return Err(Error::Config("welch overlap must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// RNG stream roles within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Channel,
    Noise,
    Data,
    CsiError,
}

impl StreamTag {
    fn salt(&self) -> u64 {
        match self {
            StreamTag::Channel => 0x63_68_61_6e,
            StreamTag::Noise => 0x6e_6f_69_73,
            StreamTag::Data => 0x64_61_74_61,
            StreamTag::CsiError => 0x63_73_69_65,
        }
    }
}

/// Identifies one independent RNG stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master: u64,
    pub trial: u64,
    pub tag: StreamTag,
}

/// splitmix64 finalizer; a 64-bit bijection.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based seed derivation: two chained splitmix64 rounds over
/// (master ^ tag salt) and the trial index. Both rounds are bijections, so
/// distinct trials (at a fixed master and tag) can never collide.
pub fn derive_seed(ts: &TrialSeed) -> u64 {
    let s = splitmix64(ts.master ^ ts.tag.salt().wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(s ^ ts.trial)
}

fn stream_rng(master: u64, trial: u64, tag: StreamTag) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(&TrialSeed { master, trial, tag }))
}

/// Number of worker threads: `WNOMA_THREADS` when set, otherwise rayon's
/// default.
pub fn worker_count() -> usize {
    std::env::var("WNOMA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(0)
}

fn make_pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn random_indices(rng: &mut ChaCha8Rng, order: usize, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..order)).collect()
}

fn points_of(c: &QamConstellation, idx: &[usize]) -> Vec<C64> {
    idx.iter().map(|&i| c.points[i]).collect()
}

fn complex_standard(rng: &mut ChaCha8Rng) -> C64 {
    let half = 0.5f64.sqrt();
    let re: f64 = rng.sample(rand_distr::StandardNormal);
    let im: f64 = rng.sample(rand_distr::StandardNormal);
    C64::new(re * half, im * half)
}

/// Modulate one superposed cluster stream with the configured back-end.
fn modulate_block(
    cfg: &SimConfig,
    spec: Option<&WaveletSpec>,
    x: &SymbolStream,
) -> Result<SignalBlock> {
    match cfg.backend {
        Backend::Fft => ofdm_modulate(x, &cfg.ofdm),
        Backend::Wavelet(_) => {
            wavelet_modulate(x, spec.expect("wavelet spec"), cfg.block_symbols())
        }
    }
}

/// Equalized symbol-domain stream plus the post-equalization symbol gains
/// the SIC detector should assume.
fn receive_block(
    cfg: &SimConfig,
    spec: Option<&WaveletSpec>,
    y: &SignalBlock,
    h_own: &[C64],
    noise_var: f64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = cfg.block_symbols();
    match cfg.backend {
        Backend::Fft => {
            let bins = ofdm_demodulate(y, &cfg.ofdm)?.symbols;
            let h = frequency_response(h_own, n);
            match cfg.equalizer {
                Equalizer::Ls => {
                    let (sym, _erasures) = equalize_ls(&bins, &h);
                    Ok((sym, vec![C64::new(1.0, 0.0)]))
                }
                Equalizer::Mmse => {
                    let sym = equalize_mmse(&bins, &h, noise_var);
                    Ok((sym, mmse_bias(&h, noise_var)))
                }
            }
        }
        Backend::Wavelet(_) => {
            // one-tap equalization in the frequency domain, then the
            // analysis bank reads the symbol slots
            let bins = crate::ofdm::dft(&y.samples)?;
            let h = frequency_response(h_own, n);
            let (eq_bins, gains) = match cfg.equalizer {
                Equalizer::Ls => {
                    let (e, _) = equalize_ls(&bins, &h);
                    (e, vec![C64::new(1.0, 0.0)])
                }
                Equalizer::Mmse => {
                    let e = equalize_mmse(&bins, &h, noise_var);
                    let bias = mmse_bias(&h, noise_var);
                    let mean = bias.iter().sum::<C64>() / bias.len() as f64;
                    (e, vec![mean])
                }
            };
            let time = crate::ofdm::idft(&eq_bins)?;
            let spec = spec.expect("wavelet spec");
            let pyr = dwt_analyze(&SignalBlock::new(time), spec)?;
            Ok((pyr.flatten(), gains))
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialSer {
    near: SerCount,
    far: SerCount,
}

impl TrialSer {
    fn merge(&mut self, o: &TrialSer) {
        self.near.merge(o.near);
        self.far.merge(o.far);
    }
}

/// One block-fading trial: fresh channel + precoder, one superposed block
/// per cluster, every user receives, equalizes and decodes its own stream.
fn ser_trial(
    cfg: &SimConfig,
    constellation: &QamConstellation,
    spec: Option<&WaveletSpec>,
    trial: u64,
    snr_linear: f64,
) -> Result<TrialSer> {
    let n = cfg.block_symbols();
    let clusters = cfg.topology.clusters;
    let gains = cfg.user_gains();

    let chan = gen_channel(
        &cfg.topology,
        &cfg.pdp,
        &gains,
        derive_seed(&TrialSeed { master: cfg.master_seed, trial, tag: StreamTag::Channel }),
    )?;
    let pairing = pair_users(&chan.gains)?;

    // CSI rows of the SIC-performing users, optionally perturbed at the BS
    let mut csi_rng = stream_rng(cfg.master_seed, trial, StreamTag::CsiError);
    let h_rows: Vec<Vec<C64>> = pairing
        .pairs
        .iter()
        .map(|p| {
            chan.flat_row(p.near_id)
                .into_iter()
                .map(|h| {
                    if cfg.csi_error > 0.0 {
                        h * (C64::new(1.0, 0.0) + cfg.csi_error * complex_standard(&mut csi_rng))
                    } else {
                        h
                    }
                })
                .collect()
        })
        .collect();
    let precoder = zf_precoder(&h_rows)?;

    // per-cluster data and transmit blocks
    let mut data_rng = stream_rng(cfg.master_seed, trial, StreamTag::Data);
    let mut near_idx = Vec::with_capacity(clusters);
    let mut far_idx = Vec::with_capacity(clusters);
    let mut tx_blocks = Vec::with_capacity(clusters);
    for _ in 0..clusters {
        let ni = random_indices(&mut data_rng, cfg.modulation_order, n);
        let fi = random_indices(&mut data_rng, cfg.modulation_order, n);
        let near = SymbolStream::new(points_of(constellation, &ni));
        let far = SymbolStream::new(points_of(constellation, &fi));
        let x = superpose(&near, &far, &cfg.alloc)?;
        tx_blocks.push(modulate_block(cfg, spec, &x)?);
        near_idx.push(ni);
        far_idx.push(fi);
    }

    let noise_seed = derive_seed(&TrialSeed {
        master: cfg.master_seed,
        trial,
        tag: StreamTag::Noise,
    });
    let xi = cfg.energy_overhead();

    let mut result = TrialSer::default();
    for (cluster, pair) in pairing.pairs.iter().enumerate() {
        for (user, is_near) in [(pair.near_id, true), (pair.far_id, false)] {
            // superpose every cluster's beam at this user
            let mut rx = vec![C64::new(0.0, 0.0); tx_blocks[0].len()];
            let mut h_own = Vec::new();
            for (m, tx) in tx_blocks.iter().enumerate() {
                let h_eff = effective_link(&chan, &precoder, m, user)?;
                if m == cluster {
                    h_own = h_eff.clone();
                }
                for (acc, v) in rx.iter_mut().zip(convolve_truncated(&tx.samples, &h_eff)) {
                    *acc += v;
                }
            }
            let noise_var = gains[user] * xi / snr_linear;
            let rx = apply_channel(
                &SignalBlock::new(rx),
                &[C64::new(1.0, 0.0)],
                noise_var,
                splitmix64(noise_seed ^ user as u64),
            );
            let (sym, det_gains) = receive_block(cfg, spec, &rx, &h_own, noise_var)?;
            if is_near {
                let far_truth = points_of(constellation, &far_idx[cluster]);
                let got = sic_decode_near_indices(
                    &sym,
                    &det_gains,
                    &cfg.alloc,
                    constellation,
                    &cfg.sic,
                    &far_truth,
                )?;
                let errors =
                    got.iter().zip(&near_idx[cluster]).filter(|(a, b)| a != b).count() as u64;
                result.near.merge(SerCount { errors, total: n as u64 });
            } else {
                let got = decode_far_indices(&sym, &det_gains, &cfg.alloc, constellation)?;
                let errors =
                    got.iter().zip(&far_idx[cluster]).filter(|(a, b)| a != b).count() as u64;
                result.far.merge(SerCount { errors, total: n as u64 });
            }
        }
    }
    Ok(result)
}

fn ser_record(cfg: &SimConfig, role: &str, snr_db: f64, count: SerCount) -> MetricRecord {
    MetricRecord {
        kind: MetricKind::Ser,
        backend: format!("{}/{}/{role}", cfg.backend.tag(), cfg.equalizer.name()),
        sic_mode: cfg.sic.mode.name().to_string(),
        x: snr_db,
        y: count.rate(),
        n_samples: count.total,
    }
}

/// Near/far SER over the SNR grid. Per SNR point, trials run in fixed
/// batches until both roles hit `target_errors` or `max_trials` is reached.
pub fn run_ser_sweep(cfg: &SimConfig) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    let constellation = QamConstellation::new(cfg.modulation_order)?;
    let spec = match cfg.backend {
        Backend::Wavelet(_) => Some(cfg.wavelet_spec()?),
        Backend::Fft => None,
    };
    let pool = make_pool()?;
    let mut records = Vec::new();
    for &snr_db in &cfg.snr_grid_db {
        let snr = 10f64.powf(snr_db / 10.0);
        let mut acc = TrialSer::default();
        let mut next_trial = 0usize;
        while next_trial < cfg.max_trials {
            let batch = TRIAL_BATCH.min(cfg.max_trials - next_trial);
            let results: Result<Vec<TrialSer>> = pool.install(|| {
                (next_trial..next_trial + batch)
                    .into_par_iter()
                    .map(|t| ser_trial(cfg, &constellation, spec.as_ref(), t as u64, snr))
                    .collect()
            });
            for r in results? {
                acc.merge(&r);
            }
            next_trial += batch;
            if acc.near.errors >= cfg.target_errors && acc.far.errors >= cfg.target_errors {
                break;
            }
        }
        records.push(ser_record(cfg, "near", snr_db, acc.near));
        records.push(ser_record(cfg, "far", snr_db, acc.far));
    }
    Ok(records)
}

/// PAPR CCDF of the configured back-end over random unit-energy blocks.
pub fn run_papr_experiment(cfg: &SimConfig, n_blocks: usize) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    if n_blocks < 1000 {
        return Err(Error::Config(format!(
            "PAPR curves need >= 1000 blocks, got {n_blocks}"
        )));
    }
    let constellation = QamConstellation::new(cfg.modulation_order)?;
    let spec = match cfg.backend {
        Backend::Wavelet(_) => Some(cfg.wavelet_spec()?),
        Backend::Fft => None,
    };
    let n = cfg.block_symbols();
    let pool = make_pool()?;
    let blocks: Result<Vec<SignalBlock>> = pool.install(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(cfg.master_seed, b as u64, StreamTag::Data);
                let idx = random_indices(&mut rng, cfg.modulation_order, n);
                let stream = SymbolStream::new(points_of(&constellation, &idx));
                modulate_block(cfg, spec.as_ref(), &stream)
            })
            .collect()
    });
    let mut records = papr_ccdf(&blocks?, &papr_threshold_grid())?;
    for r in &mut records {
        r.backend = cfg.backend.tag();
        r.sic_mode = "-".to_string();
    }
    Ok(records)
}

/// Which pyramid slot ranges a given band occupancy keeps (approximation
/// band always; detail level j iff its upper band edge 2^-j fits within
/// occupancy/2 of the two-sided spectrum).
fn wavelet_occupied_ranges(total: usize, levels: usize, occupancy: f64) -> Vec<(usize, usize)> {
    let mut ranges = vec![(0usize, total >> levels)];
    let mut pos = total >> levels;
    for level in (1..=levels).rev() {
        let len = total >> level;
        let upper_edge = 0.5f64.powi(level as i32);
        if upper_edge <= occupancy / 2.0 + 1e-12 {
            ranges.push((pos, pos + len));
        }
        pos += len;
    }
    ranges
}

/// Welch PSD of the modulated signal with partial band occupancy.
///
/// The FFT back-end loads the central `occupancy * Q` subcarriers of each
/// block (blocks remain individually windowed by their own length, CP
/// included). The wavelet back-end synthesizes one long streaming block so
/// that no artificial block windowing pollutes its spectrum, and keeps only
/// the subbands inside the occupied band.
pub fn run_psd_experiment(cfg: &SimConfig, n_blocks: usize) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    if n_blocks < 100 {
        return Err(Error::Config(format!(
            "PSD runs need >= 100 blocks, got {n_blocks}"
        )));
    }
    let constellation = QamConstellation::new(cfg.modulation_order)?;
    let n = cfg.block_symbols();
    let signal = match cfg.backend {
        Backend::Fft => {
            let occupied =
                (((cfg.psd_occupancy * n as f64).round() as usize) / 2 * 2).clamp(2, n);
            let half = occupied / 2;
            let mut samples = Vec::with_capacity(n_blocks * cfg.ofdm.block_len());
            for b in 0..n_blocks {
                let mut rng = stream_rng(cfg.master_seed, b as u64, StreamTag::Data);
                let idx = random_indices(&mut rng, cfg.modulation_order, occupied);
                let mut bins = vec![C64::new(0.0, 0.0); n];
                for (i, &ix) in idx.iter().enumerate() {
                    let k = if i < half { i } else { n - occupied + i };
                    bins[k] = constellation.points[ix];
                }
                let block = ofdm_modulate(&SymbolStream::new(bins), &cfg.ofdm)?;
                samples.extend_from_slice(&block.samples);
            }
            samples
        }
        Backend::Wavelet(_) => {
            let spec = cfg.wavelet_spec()?;
            let total = n_blocks * n;
            let mut rng = stream_rng(cfg.master_seed, 0, StreamTag::Data);
            let mut slots = vec![C64::new(0.0, 0.0); total];
            for (lo, hi) in wavelet_occupied_ranges(total, spec.levels, cfg.psd_occupancy) {
                for slot in &mut slots[lo..hi] {
                    *slot = constellation.points[rng.random_range(0..cfg.modulation_order)];
                }
            }
            wavelet_modulate(&SymbolStream::new(slots), &spec, total)?.samples
        }
    };
    let mut records = estimate_psd(
        &SignalBlock::new(signal),
        cfg.welch_segment,
        cfg.welch_overlap,
        Window::Hann,
    )?;
    for r in &mut records {
        r.backend = cfg.backend.tag();
        r.sic_mode = "-".to_string();
        r.n_samples = n_blocks as u64;
    }
    Ok(records)
}

/// Mean analytic sum rate per SNR point, plus the back-end's
/// spectral-efficiency index as a separate record.
pub fn run_sumrate_sweep(cfg: &SimConfig) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    let se = spectral_efficiency_index(
        cfg.backend.kind(),
        cfg.ofdm.subcarriers as f64,
        match cfg.backend {
            Backend::Fft => cfg.ofdm.cp_len as f64,
            Backend::Wavelet(_) => 0.0,
        },
    );
    let pool = make_pool()?;
    let mut records = Vec::new();
    for &snr_db in &cfg.snr_grid_db {
        let snr = 10f64.powf(snr_db / 10.0);
        let noise_var = 1.0 / snr;
        let rates: Result<Vec<f64>> = pool.install(|| {
            (0..cfg.max_trials)
                .into_par_iter()
                .map(|t| -> Result<f64> {
                    let gains = cfg.user_gains();
                    let chan = gen_channel(
                        &cfg.topology,
                        &cfg.pdp,
                        &gains,
                        derive_seed(&TrialSeed {
                            master: cfg.master_seed,
                            trial: t as u64,
                            tag: StreamTag::Channel,
                        }),
                    )?;
                    let pairing = pair_users(&chan.gains)?;
                    let rows: Vec<Vec<C64>> =
                        pairing.pairs.iter().map(|p| chan.flat_row(p.near_id)).collect();
                    let precoder = zf_precoder(&rows)?;
                    let mut total = 0.0;
                    for (m, pair) in pairing.pairs.iter().enumerate() {
                        // normalize out large-scale gain so one common noise
                        // reference serves both users (see module docs)
                        let h_n: C64 = effective_link(&chan, &precoder, m, pair.near_id)?
                            .iter()
                            .sum::<C64>()
                            / pair.near_gain.sqrt();
                        let h_f: C64 = effective_link(&chan, &precoder, m, pair.far_id)?
                            .iter()
                            .sum::<C64>()
                            / pair.far_gain.sqrt();
                        total += sum_rate(h_n, h_f, &cfg.alloc, noise_var, cfg.sic.beta, se);
                    }
                    Ok(total / cfg.topology.clusters as f64)
                })
                .collect()
        });
        let rates = rates?;
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        records.push(MetricRecord {
            kind: MetricKind::SumRate,
            backend: cfg.backend.tag(),
            sic_mode: cfg.sic.mode.name().to_string(),
            x: snr_db,
            y: mean,
            n_samples: (cfg.max_trials * cfg.topology.clusters) as u64,
        });
    }
    records.push(MetricRecord {
        kind: MetricKind::SeIndex,
        backend: cfg.backend.tag(),
        sic_mode: "-".to_string(),
        x: 0.0,
        y: se,
        n_samples: 1,
    });
    Ok(records)
}
