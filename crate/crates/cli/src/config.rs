//! Flat dotted-key configuration files with flag overrides.
//!
//! Format: one `key = value` per line, `#` starts a comment, blank lines
//! ignored. Every key has a default, so the empty file is a valid config.
//! Unknown keys are rejected by name. Emitted manifests use the same
//! format, which is what makes a manifest re-runnable as a config.

use std::collections::BTreeMap;

use wnoma_core::channel::ClusterTopology;
use wnoma_core::noma::{PowerAllocation, SicConfig, SicMode};
use wnoma_core::ofdm::OfdmConfig;
use wnoma_core::sim::{Backend, Equalizer, SimConfig};
use wnoma_core::wavelet::WaveletFamily;

use crate::CliError;

/// Keys understood by [`build_sim_config`]; anything else is rejected.
pub const KNOWN_KEYS: &[&str] = &[
    "backend",
    "wavelet.family",
    "wavelet.levels",
    "ofdm.subcarriers",
    "ofdm.cp_ratio",
    "ofdm.cp_len",
    "modem.order",
    "topology.antennas",
    "topology.clusters",
    "noma.alpha_near",
    "sic.mode",
    "sic.beta",
    "equalizer",
    "snr.start_db",
    "snr.stop_db",
    "snr.step_db",
    "sim.trials",
    "sim.target_errors",
    "seed",
    "channel.pdp",
    "channel.gain_near_db",
    "channel.gain_far_db",
    "channel.csi_error",
    "psd.occupancy",
    "psd.blocks",
    "papr.blocks",
    "welch.segment",
    "welch.overlap",
    // manifest echo keys, accepted so manifests round-trip
    "command",
    "preset.name",
    "arm.label",
];

/// Raw key/value map in file order.
#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    pub values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply one `key=value` override (from flags); overrides replace file
    /// values silently.
    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

fn parse_as<T: std::str::FromStr>(map: &ConfigMap, key: &str, default: T) -> Result<T, CliError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<T>()
            .map_err(|_| CliError::Config(format!("key '{key}': invalid value '{v}'"))),
    }
}

fn bad(key: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("key '{key}': {why}"))
}

/// Resolved per-run block counts that ride along with the [`SimConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunExtras {
    pub papr_blocks: usize,
    pub psd_blocks: usize,
}

/// Build a validated [`SimConfig`] from a config map, applying the
/// documented defaults for every unset key.
pub fn build_sim_config(map: &ConfigMap) -> Result<(SimConfig, RunExtras), CliError> {
    for key in map.values.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
    }

    // back-end: "fft", "wavelet" or "wavelet:<family>"
    let backend_str = map.get("backend").unwrap_or("wavelet");
    let mut family_from_backend = None;
    let backend_base = match backend_str.split_once(':') {
        Some((base, fam)) => {
            family_from_backend = Some(fam.to_string());
            base
        }
        None => backend_str,
    };
    let family_str = match (map.get("wavelet.family"), family_from_backend) {
        (Some(k), Some(f)) if k != f => {
            return Err(bad("wavelet.family", format!("conflicts with backend '{backend_str}'")))
        }
        (Some(k), _) => k.to_string(),
        (None, Some(f)) => f,
        (None, None) => "haar".to_string(),
    };
    let family = WaveletFamily::parse(&family_str).map_err(|e| bad("wavelet.family", e))?;
    let backend = match backend_base {
        "fft" => Backend::Fft,
        "wavelet" => Backend::Wavelet(family),
        other => return Err(bad("backend", format!("unknown back-end '{other}'"))),
    };

    let wavelet_levels = parse_as::<usize>(map, "wavelet.levels", 2)?;
    let subcarriers = parse_as::<usize>(map, "ofdm.subcarriers", 256)?;
    let ofdm = match (map.get("ofdm.cp_len"), map.get("ofdm.cp_ratio")) {
        (Some(_), Some(_)) => {
            return Err(bad("ofdm.cp_len", "set either ofdm.cp_len or ofdm.cp_ratio, not both"))
        }
        (Some(_), None) => {
            let cp = parse_as::<usize>(map, "ofdm.cp_len", 64)?;
            OfdmConfig::new(subcarriers, cp).map_err(|e| bad("ofdm.cp_len", e))?
        }
        (None, ratio) => {
            let r = match ratio {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| bad("ofdm.cp_ratio", format!("invalid value '{v}'")))?,
                None => 0.2,
            };
            OfdmConfig::from_cp_ratio(subcarriers, r).map_err(|e| bad("ofdm.cp_ratio", e))?
        }
    };

    let order = parse_as::<usize>(map, "modem.order", 16)?;
    let topology = ClusterTopology::new(
        parse_as::<usize>(map, "topology.antennas", 16)?,
        parse_as::<usize>(map, "topology.clusters", 4)?,
    )
    .map_err(|e| bad("topology.antennas", e))?;

    let alpha_near = parse_as::<f64>(map, "noma.alpha_near", 0.2)?;
    let alloc = PowerAllocation::from_near(alpha_near).map_err(|e| bad("noma.alpha_near", e))?;

    let sic_mode = map.get("sic.mode").unwrap_or("perfect");
    let sic = match sic_mode {
        "perfect" => {
            if let Some(b) = map.get("sic.beta") {
                if b.parse::<f64>().ok() != Some(0.0) {
                    return Err(bad("sic.beta", "perfect SIC requires beta = 0"));
                }
            }
            SicConfig::perfect()
        }
        "imperfect" => {
            let beta = parse_as::<f64>(map, "sic.beta", 0.05)?;
            SicConfig::new(SicMode::Imperfect, beta).map_err(|e| bad("sic.beta", e))?
        }
        other => return Err(bad("sic.mode", format!("unknown mode '{other}'"))),
    };

    let equalizer = match map.get("equalizer").unwrap_or("ls") {
        "ls" => Equalizer::Ls,
        "mmse" => Equalizer::Mmse,
        other => return Err(bad("equalizer", format!("unknown equalizer '{other}'"))),
    };

    let start = parse_as::<f64>(map, "snr.start_db", 0.0)?;
    let stop = parse_as::<f64>(map, "snr.stop_db", 30.0)?;
    let step = parse_as::<f64>(map, "snr.step_db", 2.0)?;
    if step <= 0.0 || stop < start {
        return Err(bad("snr.step_db", "need snr.stop_db >= snr.start_db and a positive step"));
    }
    let mut snr_grid_db = Vec::new();
    let mut s = start;
    while s <= stop + 1e-9 {
        snr_grid_db.push(s);
        s += step;
    }

    let pdp = match map.get("channel.pdp").unwrap_or("flat") {
        "flat" => vec![1.0],
        // 3 dB-per-tap exponential profile over four taps
        "exp4" => vec![8.0 / 15.0, 4.0 / 15.0, 2.0 / 15.0, 1.0 / 15.0],
        other => return Err(bad("channel.pdp", format!("unknown profile '{other}'"))),
    };

    let cfg = SimConfig {
        backend,
        wavelet_levels,
        ofdm,
        modulation_order: order,
        topology,
        alloc,
        sic,
        equalizer,
        snr_grid_db,
        max_trials: parse_as::<usize>(map, "sim.trials", 2000)?,
        target_errors: parse_as::<u64>(map, "sim.target_errors", 200)?,
        master_seed: parse_as::<u64>(map, "seed", 1)?,
        pdp,
        gain_near_db: parse_as::<f64>(map, "channel.gain_near_db", -10.0)?,
        gain_far_db: parse_as::<f64>(map, "channel.gain_far_db", -5.0)?,
        csi_error: parse_as::<f64>(map, "channel.csi_error", 0.0)?,
        psd_occupancy: parse_as::<f64>(map, "psd.occupancy", 0.5)?,
        welch_segment: parse_as::<usize>(map, "welch.segment", 256)?,
        welch_overlap: parse_as::<f64>(map, "welch.overlap", 0.5)?,
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let extras = RunExtras {
        papr_blocks: parse_as::<usize>(map, "papr.blocks", 4000)?,
        psd_blocks: parse_as::<usize>(map, "psd.blocks", 128)?,
    };
    Ok((cfg, extras))
}

/// Canonical flat-key echo of a resolved config; the basis of manifests.
pub fn canonical_map(cfg: &SimConfig, extras: &RunExtras) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let (backend, family) = match cfg.backend {
        Backend::Fft => ("fft".to_string(), "haar".to_string()),
        Backend::Wavelet(f) => ("wavelet".to_string(), f.name().to_string()),
    };
    m.insert("backend".into(), backend);
    m.insert("wavelet.family".into(), family);
    m.insert("wavelet.levels".into(), cfg.wavelet_levels.to_string());
    m.insert("ofdm.subcarriers".into(), cfg.ofdm.subcarriers.to_string());
    m.insert("ofdm.cp_len".into(), cfg.ofdm.cp_len.to_string());
    m.insert("modem.order".into(), cfg.modulation_order.to_string());
    m.insert("topology.antennas".into(), cfg.topology.tx_antennas.to_string());
    m.insert("topology.clusters".into(), cfg.topology.clusters.to_string());
    m.insert("noma.alpha_near".into(), format!("{}", cfg.alloc.alpha_near));
    m.insert("sic.mode".into(), cfg.sic.mode.name().into());
    m.insert("sic.beta".into(), format!("{}", cfg.sic.beta));
    m.insert("equalizer".into(), cfg.equalizer.name().into());
    let grid = &cfg.snr_grid_db;
    m.insert("snr.start_db".into(), format!("{}", grid[0]));
    m.insert("snr.stop_db".into(), format!("{}", grid[grid.len() - 1]));
    let step = if grid.len() > 1 { grid[1] - grid[0] } else { 1.0 };
    m.insert("snr.step_db".into(), format!("{step}"));
    m.insert("sim.trials".into(), cfg.max_trials.to_string());
    m.insert("sim.target_errors".into(), cfg.target_errors.to_string());
    m.insert("seed".into(), cfg.master_seed.to_string());
    m.insert(
        "channel.pdp".into(),
        if cfg.pdp.len() == 1 { "flat".into() } else { "exp4".to_string() },
    );
    m.insert("channel.gain_near_db".into(), format!("{}", cfg.gain_near_db));
    m.insert("channel.gain_far_db".into(), format!("{}", cfg.gain_far_db));
    m.insert("channel.csi_error".into(), format!("{}", cfg.csi_error));
    m.insert("psd.occupancy".into(), format!("{}", cfg.psd_occupancy));
    m.insert("psd.blocks".into(), extras.psd_blocks.to_string());
    m.insert("papr.blocks".into(), extras.papr_blocks.to_string());
    m.insert("welch.segment".into(), cfg.welch_segment.to_string());
    m.insert("welch.overlap".into(), format!("{}", cfg.welch_overlap));
    m
}
