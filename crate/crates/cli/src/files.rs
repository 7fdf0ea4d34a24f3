use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_path_to_error::{Path as DePath, Segment};
use thiserror::Error;
use uavsim::error::{ConfigError, GenError};

use crate::schema::Schema;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{file}: schema error at {pointer}: {message}")]
    Schema {
        file: PathBuf,
        pointer: String,
        message: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } | CliError::Config(_) => 2,
            CliError::Gen(e) => match e {
                GenError::NoSoi { .. } => 3,
                GenError::SamplingExhausted(_) => 4,
                GenError::PlacementFailed => 5,
                _ => 2,
            },
            CliError::Io { .. } => 1,
        }
    }

    /// Short tag printed before the message.
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "USAGE",
            CliError::Schema { .. } => "SCHEMA",
            CliError::Config(_) => "CONFIG",
            CliError::Gen(e) => match e {
                GenError::NoSoi { .. } => "NO_SOI",
                GenError::SamplingExhausted(_) => "SAMPLING_EXHAUSTED",
                GenError::PlacementFailed => "PLACEMENT_FAILED",
                _ => "INVALID_INPUT",
            },
            CliError::Io { .. } => "IO",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// JSON-pointer rendering of a deserializer path (`/obstacles/0/l`).
fn pointer(path: &DePath) -> String {
    let mut s = String::new();
    for seg in path.iter() {
        s.push('/');
        match seg {
            Segment::Seq { index } => s.push_str(&index.to_string()),
            Segment::Map { key } => s.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => s.push_str(variant),
            Segment::Unknown => s.push('?'),
        }
    }
    if s.is_empty() {
        s.push('/');
    }
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path, schema: Schema) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Schema {
        file: path.to_path_buf(),
        pointer: "/".into(),
        message: e.to_string(),
    })?;
    schema.check(path, &value)?;
    parse_json(path, &text)
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        file: path.to_path_buf(),
        pointer: pointer(e.path()),
        message: e.into_inner().to_string(),
    })
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let de = toml::Deserializer::new(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        file: path.to_path_buf(),
        pointer: pointer(e.path()),
        message: e.into_inner().message().to_string(),
    })
}

/// Output directory writer; every file ends with a newline.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn subdir(&self, name: &str) -> Result<OutDir, CliError> {
        OutDir::create(&self.root.join(name))
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(io_err(&p))?;
        Ok(p)
    }

    /// Writes `value` as pretty JSON after checking it against `schema`.
    pub fn write_json<T: Serialize>(
        &self,
        name: &str,
        value: &T,
        schema: Schema,
    ) -> Result<PathBuf, CliError> {
        let v = serde_json::to_value(value).expect("serializable");
        schema.check(&self.path(name), &v)?;
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    pub fn write_toml<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let s = toml::to_string_pretty(value)
            .map_err(|e| CliError::Usage(format!("cannot serialize {name}: {e}")))?;
        self.write_bytes(name, s.as_bytes())
    }

    pub fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        let p = self.path(name);
        f(&mut buf).map_err(io_err(&p))?;
        self.write_bytes(name, &buf)
    }
}
