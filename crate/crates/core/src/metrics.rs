//! Quantitative outputs: symbol error rate, PAPR and its CCDF, Welch power
//! spectral density, the spectral-efficiency index, and the analytic NOMA
//! sum-rate.

use crate::error::{Error, Result};
use crate::modem::{QamConstellation, SymbolStream};
use crate::ofdm::dft;
use crate::signal::SignalBlock;
use crate::C64;

/// Which pulse-shaping back-end produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Fft,
    Wavelet,
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::Fft => "fft",
            BackendKind::Wavelet => "wavelet",
        }
    }
}

/// Result-row kinds, matching the CSV schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Ser,
    PaprCcdf,
    Psd,
    SumRate,
    SeIndex,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Ser => "ser",
            MetricKind::PaprCcdf => "papr_ccdf",
            MetricKind::Psd => "psd",
            MetricKind::SumRate => "sumrate",
            MetricKind::SeIndex => "se_index",
        }
    }
}

/// One tagged result row: `kind,backend,sic_mode,x,y,n_samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub kind: MetricKind,
    pub backend: String,
    pub sic_mode: String,
    pub x: f64,
    pub y: f64,
    pub n_samples: u64,
}

/// Error counts from a symbol-index comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SerCount {
    pub errors: u64,
    pub total: u64,
}

impl SerCount {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.errors as f64 / self.total as f64
        }
    }

    pub fn merge(&mut self, other: SerCount) {
        self.errors += other.errors;
        self.total += other.total;
    }
}

/// Count mismatching detected constellation indices.
pub fn compute_ser_indices(tx: &[usize], rx: &[usize]) -> Result<SerCount> {
    if tx.is_empty() || tx.len() != rx.len() {
        return Err(Error::Length(format!(
            "index streams must be equal non-zero length ({} vs {})",
            tx.len(),
            rx.len()
        )));
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count() as u64;
    Ok(SerCount { errors, total: tx.len() as u64 })
}

/// SER between two symbol streams, comparing nearest constellation indices.
pub fn compute_ser(tx: &SymbolStream, rx: &SymbolStream, order: usize) -> Result<SerCount> {
    let c = QamConstellation::new(order)?;
    compute_ser_indices(&c.detect_indices(&tx.symbols), &c.detect_indices(&rx.symbols))
}

/// Peak-to-average power ratio of a block, in dB.
pub fn compute_papr(block: &SignalBlock) -> Result<f64> {
    if block.is_empty() {
        return Err(Error::Length("PAPR of an empty block".into()));
    }
    let powers: Vec<f64> = block.samples.iter().map(|s| s.norm_sqr()).collect();
    let peak = powers.iter().cloned().fold(0.0, f64::max);
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    if mean == 0.0 {
        return Err(Error::Config("PAPR of an all-zero block".into()));
    }
    Ok(10.0 * (peak / mean).log10())
}

/// CCDF of a set of PAPR values over a dB threshold grid.
pub fn ccdf_from_values(paprs: &[f64], thresholds: &[f64]) -> Result<Vec<(f64, f64)>> {
    if paprs.is_empty() {
        return Err(Error::Length("CCDF of an empty PAPR set".into()));
    }
    Ok(thresholds
        .iter()
        .map(|&t| {
            let above = paprs.iter().filter(|&&p| p > t).count();
            (t, above as f64 / paprs.len() as f64)
        })
        .collect())
}

/// Pr(PAPR > threshold) for each threshold, as metric records.
pub fn papr_ccdf(blocks: &[SignalBlock], thresholds: &[f64]) -> Result<Vec<MetricRecord>> {
    let paprs: Result<Vec<f64>> = blocks.iter().map(compute_papr).collect();
    let paprs = paprs?;
    Ok(ccdf_from_values(&paprs, thresholds)?
        .into_iter()
        .map(|(x, y)| MetricRecord {
            kind: MetricKind::PaprCcdf,
            backend: String::new(),
            sic_mode: String::new(),
            x,
            y,
            n_samples: blocks.len() as u64,
        })
        .collect())
}

/// Pulse-shape PAPR upper bound `10 log10(Q * gamma_max^2)` in dB.
pub fn papr_bound(subcarriers: usize, gamma_max: f64) -> f64 {
    10.0 * ((subcarriers as f64) * gamma_max * gamma_max).log10()
}

/// Welch window choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    fn coefficient(&self, i: usize, n: usize) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => {
                let ang = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                0.5 * (1.0 - ang.cos())
            }
        }
    }
}

/// Welch-averaged periodogram: overlapping windowed segments, unitary DFT,
/// magnitude-squared average, scaled so that the mean over bins equals the
/// signal's mean power (window gain compensated). Returns
/// (normalized frequency in [-0.5, 0.5), linear density) sorted by frequency.
pub fn welch_psd(
    signal: &[C64],
    seg_len: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<Vec<(f64, f64)>> {
    if !seg_len.is_power_of_two() || seg_len < 2 {
        return Err(Error::Config(format!(
            "segment length {seg_len} must be a power of two >= 2"
        )));
    }
    if signal.len() < 2 * seg_len {
        return Err(Error::Length(format!(
            "signal length {} shorter than two segments of {seg_len}",
            signal.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::Config(format!(
            "overlap fraction {overlap_fraction} must be in [0, 1)"
        )));
    }
    let hop = ((seg_len as f64) * (1.0 - overlap_fraction)).round().max(1.0) as usize;
    let w: Vec<f64> = (0..seg_len).map(|i| window.coefficient(i, seg_len)).collect();
    let w_energy: f64 = w.iter().map(|v| v * v).sum();

    let mut acc = vec![0.0f64; seg_len];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + seg_len <= signal.len() {
        let windowed: Vec<C64> = signal[start..start + seg_len]
            .iter()
            .zip(&w)
            .map(|(&s, &wi)| s * wi)
            .collect();
        let spec = dft(&windowed)?;
        for (a, s) in acc.iter_mut().zip(&spec) {
            *a += s.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = seg_len as f64 / (w_energy * segments as f64);
    let mut out: Vec<(f64, f64)> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let f = if k < seg_len / 2 {
                k as f64 / seg_len as f64
            } else {
                k as f64 / seg_len as f64 - 1.0
            };
            (f, p * scale)
        })
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// Peak-normalized Welch PSD in dB as metric records (all values <= 0).
pub fn estimate_psd(
    signal: &SignalBlock,
    seg_len: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<Vec<MetricRecord>> {
    let psd = welch_psd(&signal.samples, seg_len, overlap_fraction, window)?;
    let peak = psd.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Config("PSD of an all-zero signal".into()));
    }
    Ok(psd
        .into_iter()
        .map(|(f, p)| MetricRecord {
            kind: MetricKind::Psd,
            backend: String::new(),
            sic_mode: String::new(),
            x: f,
            y: 10.0 * (p / peak).max(1e-300).log10(),
            n_samples: 1,
        })
        .collect())
}

/// Throughput share left after cyclic-prefix overhead:
/// `T/(T+Tcp)` for the FFT back-end, exactly 1 for the wavelet back-end.
pub fn spectral_efficiency_index(backend: BackendKind, t_body: f64, t_cp: f64) -> f64 {
    match backend {
        BackendKind::Fft => t_body / (t_body + t_cp),
        BackendKind::Wavelet => 1.0,
    }
}

/// Analytic two-user NOMA sum rate in bps/Hz, scaled by the
/// spectral-efficiency index. The far user treats the near share as noise;
/// the near user sees the un-cancelled `beta` fraction of the far power.
pub fn sum_rate(
    h_eff_near: C64,
    h_eff_far: C64,
    alloc: &crate::noma::PowerAllocation,
    noise_var: f64,
    beta: f64,
    se_index: f64,
) -> f64 {
    let hn = h_eff_near.norm_sqr();
    let hf = h_eff_far.norm_sqr();
    let sinr_far = alloc.alpha_far * hf / (alloc.alpha_near * hf + noise_var);
    let sinr_near = alloc.alpha_near * hn / (beta * alloc.alpha_far * hn + noise_var);
    se_index * ((1.0 + sinr_near).log2() + (1.0 + sinr_far).log2())
}
