//! Deterministic CSV emission and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use wnoma_core::metrics::MetricRecord;
use wnoma_core::sim::SimConfig;

use crate::config::{canonical_map, RunExtras};
use crate::CliError;

/// Format a float with nine significant digits (scientific notation keeps
/// byte-level determinism independent of magnitude).
pub fn fmt_g9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Sort rows by (kind, backend tag, sic mode, x) so repeated runs emit
/// byte-identical files.
fn sort_records(records: &mut [MetricRecord]) {
    records.sort_by(|a, b| {
        a.kind
            .name()
            .cmp(b.kind.name())
            .then_with(|| a.backend.cmp(&b.backend))
            .then_with(|| a.sic_mode.cmp(&b.sic_mode))
            .then_with(|| a.x.partial_cmp(&b.x).expect("finite abscissa"))
    });
}

/// Write `kind,backend,sic_mode,x,y,n_samples` rows.
pub fn emit_csv(records: &[MetricRecord], path: &Path) -> Result<(), CliError> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut out = String::from("kind,backend,sic_mode,x,y,n_samples\n");
    for r in &sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.kind.name(),
            r.backend,
            r.sic_mode,
            fmt_g9(r.x),
            fmt_g9(r.y),
            r.n_samples
        ));
    }
    write_file(path, out.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))
}

/// Write a manifest next to a CSV. The manifest is itself a valid config
/// file: re-running the recorded command with it as `--config` reproduces
/// the CSV byte for byte. Metadata lives in comments.
pub fn write_manifest(
    path: &Path,
    command: &str,
    cfg: &SimConfig,
    extras: &RunExtras,
    csv_name: &str,
    preset: Option<(&str, &str)>,
) -> Result<(), CliError> {
    let mut keys: BTreeMap<String, String> = canonical_map(cfg, extras);
    keys.insert("command".into(), command.to_string());
    if let Some((preset_name, arm)) = preset {
        keys.insert("preset.name".into(), preset_name.to_string());
        keys.insert("arm.label".into(), arm.to_string());
    }
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!(
        "# wnoma v{} run manifest (unix time {stamp})\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!("# output: {csv_name}\n"));
    out.push_str("# re-run: wnoma <command> --config <this file> --out <dir>\n");
    for (k, v) in &keys {
        out.push_str(&format!("{k} = {v}\n"));
    }
    write_file(path, out.as_bytes())
}

/// Resolve the output directory, creating it if needed.
pub fn ensure_out_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("create dir {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}
