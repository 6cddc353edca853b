use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::classifier::cv::{FoldReport, GrammarClassifier};
use crate::dcc::Symbol;
use crate::error::{Error, Result};

/// Comma-separated symbol ids on a single line, no trailing newline.
pub fn format_grammar(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .map(Symbol::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn save_grammar(symbols: &[Symbol], path: &Path) -> Result<()> {
    fs::write(path, format_grammar(symbols)).map_err(|e| Error::io(path, e))
}

pub fn load_grammar(path: &Path) -> Result<Vec<Symbol>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let line = text.trim();
    if line.is_empty() {
        return Ok(Vec::new());
    }
    line.split(',')
        .map(|f| {
            f.trim().parse().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: format!("{f:?} is not a symbol id"),
            })
        })
        .collect()
}

fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

pub fn save_report(report: &FoldReport, path: &Path) -> Result<()> {
    save_json(report, path)
}

pub fn load_report(path: &Path) -> Result<FoldReport> {
    load_json(path)
}

pub fn save_model(model: &GrammarClassifier, path: &Path) -> Result<()> {
    save_json(model, path)
}

pub fn load_model(path: &Path) -> Result<GrammarClassifier> {
    load_json(path)
}
