//   Copyright 2026 robustlp developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use robustlp::RobustnessRecord;
use serde::Serialize;

use crate::CliError;

/// Sidecar written next to every report as `<report>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, F: Serialize, S: Serialize> {
    pub command: &'static str,
    pub model: Option<&'a Path>,
    pub data: Option<&'a Path>,
    pub flags: &'a F,
    pub tool_version: &'static str,
    pub outputs: Vec<&'a Path>,
    pub summary: S,
    pub wall_time_s: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest<F: Serialize, S: Serialize>(
    out: &Path,
    command: &'static str,
    model: Option<&Path>,
    data: Option<&Path>,
    flags: &F,
    summary: S,
    wall_time: Duration,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command,
        model,
        data,
        flags,
        tool_version: env!("CARGO_PKG_VERSION"),
        outputs: vec![out],
        summary,
        wall_time_s: wall_time.as_secs_f64(),
    };
    let path = manifest_path(out);
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

pub fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| CliError::Input(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Reads a JSON-lines record file; blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<RobustnessRecord>, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| CliError::Input(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
