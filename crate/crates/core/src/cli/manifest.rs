use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_json, CliError, ExitCode};
use crate::flow::FlowParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ManifestCommand {
    Build,
    Verify,
    Evolve,
    Classify,
    CatalogueSweep,
}

/// One CLI run: command, inputs, inline payloads and output directory.
///
/// Relative paths in a manifest file are resolved against the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: ManifestCommand,
    /// Spec JSON, OFF mesh or sweep grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Flow parameters JSON for `evolve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    /// Inline configuration spec, used instead of `input`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<serde_json::Value>,
    /// Inline flow parameters, used instead of `params`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowParams>,
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_profile: Option<String>,
}

impl RunManifest {
    pub fn new(command: ManifestCommand, input: Option<PathBuf>, params: Option<PathBuf>) -> Self {
        RunManifest {
            format_version: FORMAT_VERSION,
            command,
            input,
            params,
            spec: None,
            flow: None,
            out: PathBuf::from("."),
            seed: None,
            tolerance_profile: None,
        }
    }

    /// Reads a manifest, resolves its paths and checks it.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut m: RunManifest = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        m.input.as_mut().map(resolve);
        m.params.as_mut().map(resolve);
        resolve(&mut m.out);
        m.check()?;
        Ok(m)
    }

    /// Format version and input existence.
    pub fn check(&self) -> Result<(), CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::new(
                ExitCode::InputError,
                format!("unsupported manifest format_version {}, expected {FORMAT_VERSION}", self.format_version),
            ));
        }
        for p in self.input.iter().chain(&self.params) {
            if !p.is_file() {
                return Err(CliError::new(ExitCode::InputError, format!("{}: no such file", p.display())));
            }
        }
        let needs_input = !matches!(self.command, ManifestCommand::CatalogueSweep);
        if needs_input && self.input.is_none() && self.spec.is_none() {
            return Err(CliError::new(ExitCode::InputError, "manifest has neither `input` nor `spec`"));
        }
        Ok(())
    }
}
