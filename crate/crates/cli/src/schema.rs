//! Shipped JSON schemas; inputs are checked on read and outputs before write.

use std::path::Path;
use std::sync::OnceLock;

use jsonschema::Validator;
use serde_json::Value;

use crate::files::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    TestCase,
    Mission,
    Report,
    Campaign,
    Manifest,
    Timing,
}

impl Schema {
    pub const ALL: [Schema; 6] = [
        Schema::TestCase,
        Schema::Mission,
        Schema::Report,
        Schema::Campaign,
        Schema::Manifest,
        Schema::Timing,
    ];

    pub fn source(self) -> &'static str {
        match self {
            Schema::TestCase => include_str!("../../../schemas/testcase.schema.json"),
            Schema::Mission => include_str!("../../../schemas/mission.schema.json"),
            Schema::Report => include_str!("../../../schemas/report.schema.json"),
            Schema::Campaign => include_str!("../../../schemas/campaign.schema.json"),
            Schema::Manifest => include_str!("../../../schemas/manifest.schema.json"),
            Schema::Timing => include_str!("../../../schemas/timing.schema.json"),
        }
    }

    fn validator(self) -> &'static Validator {
        static CELLS: [OnceLock<Validator>; 6] = [const { OnceLock::new() }; 6];
        CELLS[self as usize].get_or_init(|| {
            let schema: Value = serde_json::from_str(self.source()).expect("shipped schema is JSON");
            jsonschema::validator_for(&schema).expect("shipped schema compiles")
        })
    }

    /// First violation, reported against `file` with a JSON pointer.
    pub fn check(self, file: &Path, instance: &Value) -> Result<(), CliError> {
        match self.validator().iter_errors(instance).next() {
            None => Ok(()),
            Some(e) => {
                let pointer = e.instance_path().as_str();
                Err(CliError::Schema {
                    file: file.to_path_buf(),
                    pointer: if pointer.is_empty() { "/".into() } else { pointer.into() },
                    message: e.to_string(),
                })
            }
        }
    }
}
