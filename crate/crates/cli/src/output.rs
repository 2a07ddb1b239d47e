//! File helpers and the report envelope shared by every command.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::failure::Failure;
use crate::{Context, ReportArgs};

pub fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_reader(open(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    config: &'a crate::config::RunConfig,
    result: &'a T,
}

/// Writes the JSON report to `--report` or standard output. With `--text`
/// the rendered table goes to standard output instead.
pub fn emit<T: Serialize>(
    ctx: &Context,
    command: &str,
    out: &ReportArgs,
    result: &T,
    text: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let envelope = Envelope {
        command,
        generated_at: ctx
            .timestamp
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())),
        config: &ctx.config,
        result,
    };
    let mut json = serde_json::to_string_pretty(&envelope).map_err(|e| Failure::io(e.to_string()))?;
    json.push('\n');
    match &out.report {
        Some(path) => {
            let mut file = create(path)?;
            file.write_all(json.as_bytes())?;
            file.flush()?;
        }
        None if !out.text => print!("{json}"),
        None => {}
    }
    if out.text {
        print!("{}", text());
    }
    Ok(())
}
