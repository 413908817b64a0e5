use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::Command;

/// Written next to every output file as `<output>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub subcommand: &'a str,
    pub config: &'a C,
    pub seed: u64,
    pub git_describe: String,
    pub version: &'static str,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut p = output.as_os_str().to_owned();
    p.push(".manifest.json");
    PathBuf::from(p)
}

pub fn write_manifest<C: Serialize>(
    output: &Path,
    subcommand: &str,
    config: &C,
    seed: u64,
    wall_time_s: f64,
    outputs: &[PathBuf],
) -> std::io::Result<PathBuf> {
    let m = RunManifest {
        subcommand,
        config,
        seed,
        git_describe: git_describe(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = manifest_path(output);
    let body = serde_json::to_string_pretty(&m).map_err(std::io::Error::other)?;
    std::fs::write(&path, body + "\n")?;
    Ok(path)
}
