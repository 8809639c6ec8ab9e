use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const OUTPUT_ENV: &str = "PACING_OUTPUT_DIR";
pub const DEFAULT_OUTPUT: &str = "out";

/// Flag, then environment, then config, then `./out`.
pub fn resolve_dir(flag: Option<&Path>, env: Option<&str>, config: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

/// Write through a sibling temp file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}
