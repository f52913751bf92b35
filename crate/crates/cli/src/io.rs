//! Reading and writing the JSON files the commands exchange.

use std::fs;
use std::path::{Path, PathBuf};

use halp::basis::{Basis, BasisSet};
use halp::halp::HalpSolution;
use halp::model::{HybridModel, ModelDoc};
use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_model(path: &Path) -> Result<HybridModel> {
    let doc: ModelDoc = read_json(path)?;
    HybridModel::new(doc).map_err(|e| CliError::Validation {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// The parsed basis set, its fingerprint, and its compiled form.
pub struct LoadedBasis {
    pub fingerprint: String,
    pub bases: Vec<Basis>,
}

pub fn read_basis(path: &Path, model: &HybridModel) -> Result<LoadedBasis> {
    let set: BasisSet = read_json(path)?;
    let bases = set.compile(model).map_err(|e| CliError::Validation {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(LoadedBasis {
        fingerprint: set.fingerprint(),
        bases,
    })
}

pub fn read_solution(path: &Path) -> Result<HalpSolution> {
    read_json(path)
}

pub fn solution_file(eps: f64) -> String {
    format!("solution_{eps}.json")
}

pub fn out_path(dir: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
    dir.as_ref().map(|d| d.join(name))
}
