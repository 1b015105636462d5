use crate::config::Kind;
use std::fmt::Write as _;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationError,
    NumericalFailure,
    Failed,
}

impl Status {
    pub fn from_exit_code(code: i32) -> Self {
        match code {
            0 => Status::Ok,
            2 => Status::ValidationError,
            3 => Status::NumericalFailure,
            _ => Status::Failed,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ValidationError => 2,
            Status::NumericalFailure => 3,
            Status::Failed => 1,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::ValidationError => "validation-error",
            Status::NumericalFailure => "numerical-failure",
            Status::Failed => "failed",
        }
    }
}

/// Record of one run, written next to its outputs whether or not it succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub code_version: &'static str,
    pub wall_clock_seconds: f64,
    pub status: Status,
    pub error: Option<String>,
    /// `(file name, sha256 hex)` of each primary output.
    pub outputs: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub streams_issued: usize,
    pub config_echo: String,
}

impl RunManifest {
    pub fn new(config_echo: String) -> Self {
        Self {
            kind: None,
            seed: None,
            workers: 1,
            code_version: env!("CARGO_PKG_VERSION"),
            wall_clock_seconds: 0.0,
            status: Status::Ok,
            error: None,
            outputs: Vec::new(),
            summary: Vec::new(),
            warnings: Vec::new(),
            streams_issued: 0,
            config_echo,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn checksum(&self, file: &str) -> Option<&str> {
        self.outputs
            .iter()
            .find(|(k, _)| k == file)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# chainlab run manifest\n");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        writeln!(s, "status = {}", self.status.label()).unwrap();
        writeln!(s, "exit_code = {}", self.exit_code()).unwrap();
        writeln!(s, "kind = {}", opt(self.kind.map(|k| k.to_string()))).unwrap();
        writeln!(s, "seed = {}", opt(self.seed.map(|k| k.to_string()))).unwrap();
        writeln!(s, "workers = {}", self.workers).unwrap();
        writeln!(s, "code_version = {}", self.code_version).unwrap();
        writeln!(s, "wall_clock_seconds = {:.3}", self.wall_clock_seconds).unwrap();
        writeln!(s, "streams_issued = {}", self.streams_issued).unwrap();
        if let Some(e) = &self.error {
            for line in e.lines() {
                writeln!(s, "error = {line}").unwrap();
            }
        }
        s.push_str("\n[outputs]\n");
        for (f, h) in &self.outputs {
            writeln!(s, "{f} = sha256:{h}").unwrap();
        }
        s.push_str("\n[summary]\n");
        for (k, v) in &self.summary {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s.push_str("\n[warnings]\n");
        for w in &self.warnings {
            writeln!(s, "warning = {w}").unwrap();
        }
        s.push_str("\n[config]\n");
        for line in self.config_echo.lines() {
            writeln!(s, "| {line}").unwrap();
        }
        s
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(MANIFEST_FILE), self.render())
    }
}
