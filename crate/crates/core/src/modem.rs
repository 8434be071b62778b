//! Square-QAM mapping and hard-decision demapping shared by both
//! pulse-shaping back-ends.
//!
//! Constellations are Gray-labelled per axis (reflected-binary code on the
//! I levels and on the Q levels independently) and normalized to unit
//! average symbol energy, so SNR equals Es/N0 everywhere downstream.

use crate::error::{Error, Result};
use crate::C64;

/// Binary-reflected Gray code.
pub fn gray_code(n: usize) -> usize {
    n ^ (n >> 1)
}

/// Inverse of [`gray_code`].
pub fn gray_decode(g: usize) -> usize {
    let mut n = g;
    let mut mask = n >> 1;
    while mask != 0 {
        n ^= mask;
        mask >>= 1;
    }
    n
}

/// A square M-QAM constellation with unit average energy.
///
/// `points[label]` is the symbol whose bit pattern (MSB first, I bits then
/// Q bits) equals `label`. Minimum-distance neighbours differ in exactly
/// one bit of their labels.
#[derive(Debug, Clone)]
pub struct QamConstellation {
    pub order: usize,
    pub bits_per_symbol: usize,
    side: usize,
    scale: f64,
    pub points: Vec<C64>,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::Config(format!(
                "unsupported QAM order {order}; expected 4, 16 or 64"
            )));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let side = 1usize << (bits_per_symbol / 2);
        // Mean power of the +/-1, +/-3, ... grid is 2(M-1)/3, so dividing by
        // its square root gives unit average energy exactly.
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();

        let half = bits_per_symbol / 2;
        let mut points = vec![C64::new(0.0, 0.0); order];
        for label in 0..order {
            let b_i = label >> half;
            let b_q = label & (side - 1);
            let re = Self::level_amplitude(gray_decode(b_i), side, scale);
            let im = Self::level_amplitude(gray_decode(b_q), side, scale);
            points[label] = C64::new(re, im);
        }
        Ok(Self { order, bits_per_symbol, side, scale, points })
    }

    fn level_amplitude(level: usize, side: usize, scale: f64) -> f64 {
        ((side - 1) as f64 - 2.0 * level as f64) / scale
    }

    /// Map one `bits_per_symbol`-long group to its constellation point.
    pub fn map_bits(&self, bits: &[bool]) -> C64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        let mut label = 0usize;
        for &b in bits {
            label = (label << 1) | b as usize;
        }
        self.points[label]
    }

    /// Index (= bit label) of the nearest constellation point; exact ties
    /// resolve to the lowest label.
    pub fn nearest_index(&self, x: C64) -> usize {
        let half = self.bits_per_symbol / 2;
        let li = self.axis_candidates(x.re);
        let lq = self.axis_candidates(x.im);
        let mut best = (f64::INFINITY, usize::MAX);
        for &a in &li {
            for &b in &lq {
                let label = (gray_code(a) << half) | gray_code(b);
                let d = (x - self.points[label]).norm_sqr();
                if d < best.0 || (d == best.0 && label < best.1) {
                    best = (d, label);
                }
            }
        }
        best.1
    }

    /// The two grid levels bracketing an axis value (clamped to the grid).
    fn axis_candidates(&self, v: f64) -> [usize; 2] {
        let raw = ((self.side - 1) as f64 - v * self.scale) / 2.0;
        let lo = raw.floor().clamp(0.0, (self.side - 1) as f64) as usize;
        let hi = raw.ceil().clamp(0.0, (self.side - 1) as f64) as usize;
        [lo, hi]
    }

    /// Bits (MSB first) of a point label.
    pub fn label_bits(&self, label: usize) -> Vec<bool> {
        (0..self.bits_per_symbol)
            .rev()
            .map(|k| (label >> k) & 1 == 1)
            .collect()
    }

    /// Detect every symbol of a slice to its nearest point index.
    pub fn detect_indices(&self, symbols: &[C64]) -> Vec<usize> {
        symbols.iter().map(|&s| self.nearest_index(s)).collect()
    }
}

/// A sequence of modulated symbols, optionally carrying the bits it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub symbols: Vec<C64>,
    pub source_bits: Option<Vec<bool>>,
}

impl SymbolStream {
    pub fn new(symbols: Vec<C64>) -> Self {
        Self { symbols, source_bits: None }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Map a bit sequence onto Gray-coded M-QAM symbols.
pub fn qam_modulate(bits: &[bool], order: usize) -> Result<SymbolStream> {
    let constellation = QamConstellation::new(order)?;
    let bps = constellation.bits_per_symbol;
    if bits.len() % bps != 0 {
        return Err(Error::Length(format!(
            "bit count {} is not divisible by log2(M) = {bps}",
            bits.len()
        )));
    }
    let symbols = bits.chunks(bps).map(|c| constellation.map_bits(c)).collect();
    Ok(SymbolStream { symbols, source_bits: Some(bits.to_vec()) })
}

/// Hard-decision demap back to bits (nearest constellation point).
pub fn qam_demodulate(stream: &SymbolStream, order: usize) -> Result<Vec<bool>> {
    let constellation = QamConstellation::new(order)?;
    let mut bits = Vec::with_capacity(stream.len() * constellation.bits_per_symbol);
    for &s in &stream.symbols {
        bits.extend(constellation.label_bits(constellation.nearest_index(s)));
    }
    Ok(bits)
}
