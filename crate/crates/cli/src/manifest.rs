//! Run manifests: each command records what it was asked to do and what it
//! wrote, so an output directory is self-describing and replayable.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    command: &'a str,
    options: &'a T,
    outputs: &'a [&'a str],
}

/// Write `manifest.json` under `out`. `options` is the full argument record
/// for the run (seeds included); `outputs` lists the files the command wrote,
/// relative to `out`.
pub fn write<T: Serialize>(
    out: &Path,
    command: &str,
    options: &T,
    outputs: &[&str],
) -> anyhow::Result<()> {
    let manifest = Manifest { command, options, outputs };
    let text = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    write_text(out, "manifest.json", &(text + "\n"))?;
    Ok(())
}

/// Create the output directory (and parents) if missing.
pub fn ensure_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
}

/// Write one named artifact under `out` and return its path.
pub fn write_text(out: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = out.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
