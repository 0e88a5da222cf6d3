use std::fs;
use std::path::Path;

use permsmc_core::{parse_matrix, BinaryMatrix};
use serde::Serialize;

use crate::error::{AppError, AppResult};

pub fn read_matrix(path: &Path) -> AppResult<BinaryMatrix> {
    let text = fs::read_to_string(path).map_err(|source| AppError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_matrix(&text).map_err(|source| AppError::Matrix {
        path: path.to_owned(),
        source,
    })
}

pub fn write_matrix(path: &Path, a: &BinaryMatrix) -> AppResult<()> {
    write_text(path, &a.to_string())
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    fs::write(path, text).map_err(|source| AppError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> AppResult<()> {
    write_text(path, &to_json(value))
}
