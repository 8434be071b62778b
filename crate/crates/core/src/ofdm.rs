//! Conventional cyclic-prefix FFT-OFDM, the baseline pulse shaping.
//!
//! Both transform directions are unitary (1/sqrt(N) each way) so that
//! energy and PAPR comparisons against the wavelet bank need no extra
//! bookkeeping.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::modem::SymbolStream;
use crate::signal::SignalBlock;
use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Length(format!("length {n} is not a power of two")));
    }
    Ok(())
}

/// Unitary DFT.
pub fn dft(x: &[C64]) -> Result<Vec<C64>> {
    check_pow2(x.len())?;
    let mut buf = x.to_vec();
    plan(buf.len(), false).process(&mut buf);
    let norm = 1.0 / (buf.len() as f64).sqrt();
    for v in &mut buf {
        *v *= norm;
    }
    Ok(buf)
}

/// Unitary inverse DFT.
pub fn idft(x: &[C64]) -> Result<Vec<C64>> {
    check_pow2(x.len())?;
    let mut buf = x.to_vec();
    plan(buf.len(), true).process(&mut buf);
    let norm = 1.0 / (buf.len() as f64).sqrt();
    for v in &mut buf {
        *v *= norm;
    }
    Ok(buf)
}

/// Subcarrier count and cyclic-prefix length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    pub subcarriers: usize,
    pub cp_len: usize,
}

impl OfdmConfig {
    pub fn new(subcarriers: usize, cp_len: usize) -> Result<Self> {
        if !matches!(subcarriers, 64 | 128 | 256 | 512 | 1024) {
            return Err(Error::Config(format!(
                "subcarrier count {subcarriers} not in {{64,128,256,512,1024}}"
            )));
        }
        if cp_len >= subcarriers {
            return Err(Error::Config(format!(
                "cp_len {cp_len} must be < subcarrier count {subcarriers}"
            )));
        }
        Ok(Self { subcarriers, cp_len })
    }

    /// Build from the CP share of the *transmitted* block:
    /// `ratio = cp_len / (subcarriers + cp_len)`, so 0.2 with Q=256 gives 64.
    pub fn from_cp_ratio(subcarriers: usize, ratio: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio) {
            return Err(Error::Config(format!("cp ratio {ratio} must be in [0, 1)")));
        }
        let cp = (subcarriers as f64 * ratio / (1.0 - ratio)).round() as usize;
        Self::new(subcarriers, cp)
    }

    pub fn block_len(&self) -> usize {
        self.subcarriers + self.cp_len
    }

    /// cp_len / (subcarriers + cp_len)
    pub fn overhead_ratio(&self) -> f64 {
        self.cp_len as f64 / self.block_len() as f64
    }

    /// Transmitted samples per data symbol: (Q + cp) / Q.
    pub fn energy_overhead(&self) -> f64 {
        self.block_len() as f64 / self.subcarriers as f64
    }
}

/// Unitary IDFT of the symbol vector with the last `cp_len` samples
/// prepended as a cyclic prefix.
pub fn ofdm_modulate(stream: &SymbolStream, cfg: &OfdmConfig) -> Result<SignalBlock> {
    if stream.len() != cfg.subcarriers {
        return Err(Error::Length(format!(
            "stream length {} does not match subcarrier count {}",
            stream.len(),
            cfg.subcarriers
        )));
    }
    let body = idft(&stream.symbols)?;
    let mut out = Vec::with_capacity(cfg.block_len());
    out.extend_from_slice(&body[cfg.subcarriers - cfg.cp_len..]);
    out.extend_from_slice(&body);
    Ok(SignalBlock::new(out))
}

/// Strip the cyclic prefix and apply the unitary DFT.
pub fn ofdm_demodulate(block: &SignalBlock, cfg: &OfdmConfig) -> Result<SymbolStream> {
    if block.len() != cfg.block_len() {
        return Err(Error::Length(format!(
            "block length {} does not match Q + cp = {}",
            block.len(),
            cfg.block_len()
        )));
    }
    let symbols = dft(&block.samples[cfg.cp_len..])?;
    Ok(SymbolStream::new(symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_symbols(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let mut x = vec![C64::new(0.0, 0.0); 16];
        x[0] = C64::new(1.0, 0.0);
        let y = dft(&x).unwrap();
        for v in y {
            assert!((v - C64::new(0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_holds() {
        let x = random_symbols(256, 3);
        let y = dft(&x).unwrap();
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((ex - ey).abs() < 1e-12 * ex);
    }

    #[test]
    fn matches_naive_quadratic_dft() {
        for n in [8usize, 16] {
            let x = random_symbols(n, 7 + n as u64);
            let fast = dft(&x).unwrap();
            for k in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                    acc += v * C64::new(ang.cos(), ang.sin());
                }
                acc /= (n as f64).sqrt();
                assert!((acc - fast[k]).norm() < 1e-10, "n={n} bin {k}");
            }
        }
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(dft(&vec![C64::new(0.0, 0.0); 24]).is_err());
        assert!(idft(&[]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OfdmConfig::new(100, 10).is_err());
        assert!(OfdmConfig::new(256, 256).is_err());
        let cfg = OfdmConfig::from_cp_ratio(256, 0.2).unwrap();
        assert_eq!(cfg.cp_len, 64);
        assert!((cfg.overhead_ratio() - 0.2).abs() < 1e-12);
        // transmitted block is exactly 1.25x the CP-free block
        assert_eq!(cfg.block_len() * 4, 256 * 5);
    }

    #[test]
    fn single_subcarrier_is_complex_exponential() {
        let cfg = OfdmConfig::new(64, 16).unwrap();
        let mut syms = vec![C64::new(0.0, 0.0); 64];
        let k = 5usize;
        syms[k] = C64::new(1.0, 0.0);
        let block = ofdm_modulate(&SymbolStream::new(syms), &cfg).unwrap();
        let body = &block.samples[16..];
        for (t, &v) in body.iter().enumerate() {
            let ang = 2.0 * PI * (k * t) as f64 / 64.0;
            let expect = C64::new(ang.cos(), ang.sin()) / 8.0;
            assert!((v - expect).norm() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn prefix_is_cyclic() {
        let cfg = OfdmConfig::from_cp_ratio(256, 0.2).unwrap();
        let block =
            ofdm_modulate(&SymbolStream::new(random_symbols(256, 9)), &cfg).unwrap();
        let (cp, body) = block.samples.split_at(cfg.cp_len);
        assert_eq!(cp, &body[256 - cfg.cp_len..]);
    }

    #[test]
    fn roundtrip_is_identity() {
        let cfg = OfdmConfig::from_cp_ratio(256, 0.2).unwrap();
        for seed in 0..100 {
            let syms = random_symbols(256, 1000 + seed);
            let block = ofdm_modulate(&SymbolStream::new(syms.clone()), &cfg).unwrap();
            let back = ofdm_demodulate(&block, &cfg).unwrap();
            for (a, b) in syms.iter().zip(&back.symbols) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn size_mismatch_rejected() {
        let cfg = OfdmConfig::new(256, 64).unwrap();
        assert!(ofdm_modulate(&SymbolStream::new(random_symbols(100, 1)), &cfg).is_err());
        assert!(ofdm_demodulate(&SignalBlock::new(random_symbols(100, 1)), &cfg).is_err());
    }
}
