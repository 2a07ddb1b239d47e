//! Newline-delimited JSON exchange with an out-of-process predictor.
//!
//! Request lines are `{"id", "task", "input"}` and response lines are
//! `{"id", "output"}`. Responses may arrive in any order; they are matched
//! back to requests by id.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::RawPrediction;
use crate::error::{Error, Result};
use crate::example::{Example, Task};

/// Default number of requests written ahead of their responses.
pub const DEFAULT_WINDOW: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub id: String,
    pub task: Task,
    pub input: String,
}

impl From<&Example> for PredictRequest {
    fn from(example: &Example) -> Self {
        PredictRequest {
            id: example.id.clone(),
            task: example.variant.task(),
            input: example.input.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictResponse {
    pub id: String,
    pub output: String,
}

/// A predictor spawned as a child process speaking the protocol on its
/// standard streams.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubprocessConfig {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub timeout: Option<Duration>,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

/// Requests and responses exchanged through files. When `command` is set it
/// is run between writing requests and reading responses; otherwise the
/// responses file must already exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileExchangeConfig {
    pub requests: PathBuf,
    pub responses: PathBuf,
    #[serde(default)]
    pub command: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExternalPredictorConfig {
    Subprocess(SubprocessConfig),
    Files(FileExchangeConfig),
}

/// Tracks which requests have been answered.
struct Collector<'a> {
    requests: &'a [PredictRequest],
    index: HashMap<&'a str, usize>,
    outputs: Vec<Option<String>>,
}

impl<'a> Collector<'a> {
    fn new(requests: &'a [PredictRequest]) -> Result<Self> {
        let mut index = HashMap::with_capacity(requests.len());
        for (i, req) in requests.iter().enumerate() {
            if index.insert(req.id.as_str(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate request id {:?}", req.id)));
            }
        }
        Ok(Collector {
            requests,
            index,
            outputs: vec![None; requests.len()],
        })
    }

    fn accept(&mut self, line_no: usize, line: &str) -> Result<()> {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let response: PredictResponse = serde_json::from_str(line)
            .map_err(|e| Error::Protocol(format!("response line {line_no}: {e}")))?;
        let slot = *self
            .index
            .get(response.id.as_str())
            .ok_or_else(|| Error::Protocol(format!("response for unknown id {:?}", response.id)))?;
        if self.outputs[slot].is_some() {
            return Err(Error::Protocol(format!("duplicate response for id {:?}", response.id)));
        }
        self.outputs[slot] = Some(response.output);
        Ok(())
    }

    fn finish(self) -> Result<Vec<RawPrediction>> {
        self.requests
            .iter()
            .zip(self.outputs)
            .map(|(req, output)| {
                output
                    .map(|output| RawPrediction {
                        example_id: req.id.clone(),
                        output,
                    })
                    .ok_or_else(|| Error::MissingResponse(req.id.clone()))
            })
            .collect()
    }
}

fn request_line(request: &PredictRequest) -> String {
    let mut line = serde_json::to_string(request).expect("request serializes");
    line.push('\n');
    line
}

/// Sends every request to the configured predictor and returns one raw
/// prediction per request, in request order.
pub fn run_external(
    requests: &[PredictRequest],
    config: &ExternalPredictorConfig,
) -> Result<Vec<RawPrediction>> {
    match config {
        ExternalPredictorConfig::Subprocess(sub) => run_subprocess(requests, sub),
        ExternalPredictorConfig::Files(files) => run_files(requests, files),
    }
}

enum Event {
    Line(String),
    ReadError(std::io::Error),
}

fn kill(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}

fn run_subprocess(requests: &[PredictRequest], config: &SubprocessConfig) -> Result<Vec<RawPrediction>> {
    let mut collector = Collector::new(requests)?;
    let window = config.window.max(1);
    let deadline = config.timeout.map(|t| Instant::now() + t);

    let mut child = Command::new(&config.program)
        .args(&config.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()?;
    let mut stdin = child.stdin.take().expect("stdin piped");
    let stdout = child.stdout.take().expect("stdout piped");

    // The writer holds at most `window` unanswered requests in flight; each
    // accepted response returns one credit.
    let (credit_tx, credit_rx) = mpsc::channel::<()>();
    for _ in 0..window {
        credit_tx.send(()).expect("receiver alive");
    }
    let lines: Vec<String> = requests.iter().map(request_line).collect();
    thread::spawn(move || {
        for line in lines {
            if credit_rx.recv().is_err() {
                return;
            }
            if stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()).is_err() {
                return;
            }
        }
    });

    let (event_tx, event_rx) = mpsc::channel::<Event>();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let event = match line {
                Ok(line) => Event::Line(line),
                Err(e) => Event::ReadError(e),
            };
            let stop = matches!(event, Event::ReadError(_));
            if event_tx.send(event).is_err() || stop {
                return;
            }
        }
    });

    let mut line_no = 0;
    loop {
        let next = match deadline {
            Some(deadline) => {
                let remaining = deadline.saturating_duration_since(Instant::now());
                event_rx.recv_timeout(remaining)
            }
            None => event_rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
        };
        match next {
            Ok(Event::Line(line)) => {
                line_no += 1;
                if let Err(e) = collector.accept(line_no, &line) {
                    kill(&mut child);
                    return Err(e);
                }
                let _ = credit_tx.send(());
            }
            Ok(Event::ReadError(e)) => {
                kill(&mut child);
                return Err(Error::Protocol(format!("reading predictor output: {e}")));
            }
            Err(RecvTimeoutError::Timeout) => {
                kill(&mut child);
                return Err(Error::Timeout(config.timeout.unwrap_or_default()));
            }
            Err(RecvTimeoutError::Disconnected) => break,
        }
    }
    drop(credit_tx);
    let status = child.wait()?;
    if !status.success() {
        return Err(Error::ProcessExit(status.to_string()));
    }
    collector.finish()
}

/// Writes requests as JSONL to `path`.
pub fn write_requests(path: &std::path::Path, requests: &[PredictRequest]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for request in requests {
        writer.write_all(request_line(request).as_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads and validates a responses file against `requests`.
pub fn read_responses<R: BufRead>(reader: R, requests: &[PredictRequest]) -> Result<Vec<RawPrediction>> {
    let mut collector = Collector::new(requests)?;
    for (idx, line) in reader.lines().enumerate() {
        collector.accept(idx + 1, &line?)?;
    }
    collector.finish()
}

fn run_files(requests: &[PredictRequest], config: &FileExchangeConfig) -> Result<Vec<RawPrediction>> {
    Collector::new(requests)?;
    write_requests(&config.requests, requests)?;
    if let Some(command) = &config.command {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty predictor command".into()))?;
        let status = Command::new(program).args(args).stdin(Stdio::null()).status()?;
        if !status.success() {
            return Err(Error::ProcessExit(status.to_string()));
        }
    }
    let file = File::open(&config.responses)?;
    read_responses(BufReader::new(file), requests)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn requests(n: usize) -> Vec<PredictRequest> {
        (0..n)
            .map(|i| PredictRequest {
                id: format!("c:{i}"),
                task: Task::FaceActs,
                input: format!("ER: hello number {i}"),
            })
            .collect()
    }

    fn sh(script: &str) -> ExternalPredictorConfig {
        ExternalPredictorConfig::Subprocess(SubprocessConfig {
            program: "sh".into(),
            args: vec!["-c".into(), script.into()],
            timeout: Some(Duration::from_secs(20)),
            window: 4,
        })
    }

    #[test]
    fn request_wire_format() {
        let line = request_line(&requests(1)[0]);
        assert_eq!(line, "{\"id\":\"c:0\",\"task\":\"face acts\",\"input\":\"ER: hello number 0\"}\n");
    }

    #[test]
    fn collector_rejects_unknown_duplicate_and_garbage() {
        let reqs = requests(2);
        let mut c = Collector::new(&reqs).unwrap();
        assert!(matches!(c.accept(1, "nope"), Err(Error::Protocol(_))));
        assert!(matches!(c.accept(1, r#"{"id":"zz","output":"x"}"#), Err(Error::Protocol(_))));
        c.accept(1, r#"{"id":"c:1","output":"x"}"#).unwrap();
        assert!(matches!(c.accept(2, r#"{"id":"c:1","output":"y"}"#), Err(Error::Protocol(_))));
        assert!(matches!(c.finish(), Err(Error::MissingResponse(id)) if id == "c:0"));
    }

    #[test]
    fn responses_file_in_any_order() {
        let reqs = requests(2);
        let text = "{\"id\":\"c:1\",\"output\":\"b\"}\n{\"id\":\"c:0\",\"output\":\"a\"}\n";
        let preds = read_responses(text.as_bytes(), &reqs).unwrap();
        assert_eq!(preds[0].output, "a");
        assert_eq!(preds[1].output, "b");
    }

    #[test]
    fn duplicate_request_ids_rejected() {
        let mut reqs = requests(2);
        reqs[1].id = reqs[0].id.clone();
        assert!(matches!(read_responses(&b""[..], &reqs), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn nonzero_exit_reported() {
        let err = run_external(&requests(1), &sh("cat >/dev/null; exit 3")).unwrap_err();
        assert!(matches!(err, Error::ProcessExit(_)));
    }

    #[test]
    fn timeout_kills_predictor() {
        let config = ExternalPredictorConfig::Subprocess(SubprocessConfig {
            program: "sleep".into(),
            args: vec!["30".into()],
            timeout: Some(Duration::from_millis(200)),
            window: 1,
        });
        let started = Instant::now();
        assert!(matches!(run_external(&requests(1), &config), Err(Error::Timeout(_))));
        assert!(started.elapsed() < Duration::from_secs(10));
    }
}
