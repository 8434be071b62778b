//! Time-domain sample containers.

use crate::C64;

/// A finite sequence of complex baseband samples with a sample-rate tag.
///
/// The tag is purely informational (all processing is in normalized
/// frequency); it defaults to 1.0 sample/s.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBlock {
    pub samples: Vec<C64>,
    pub sample_rate: f64,
}

impl SignalBlock {
    pub fn new(samples: Vec<C64>) -> Self {
        Self { samples, sample_rate: 1.0 }
    }

    pub fn with_rate(samples: Vec<C64>, sample_rate: f64) -> Self {
        Self { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of |s|^2 over the block.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

impl From<Vec<C64>> for SignalBlock {
    fn from(samples: Vec<C64>) -> Self {
        Self::new(samples)
    }
}
