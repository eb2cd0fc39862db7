use std::io::Read;
use std::path::Path;

use crate::args::InputFormat;
use crate::error::{CliError, CliResult};

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::Input(format!("<stdin>: {e}")))?;
    } else {
        buf = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(buf)
}

/// Little-endian IEEE doubles, back to back.
fn parse_f64le(bytes: &[u8], name: &str) -> CliResult<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(CliError::Input(format!(
            "{name}: {} bytes is not a whole number of 8-byte samples (trailing bytes at offset {})",
            bytes.len(),
            bytes.len() - bytes.len() % 8
        )));
    }
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, c)| {
            let x = f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
            if x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::Input(format!(
                    "{name}: sample {i} (byte offset {}) is not finite",
                    i * 8
                )))
            }
        })
        .collect()
}

/// Numbers separated by commas or whitespace. Lines starting with `#` are
/// skipped, and a non-numeric first data line is taken as a header.
fn parse_csv(text: &str, name: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_data = false;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if !seen_data && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            seen_data = true;
            continue;
        }
        seen_data = true;
        for (col, field) in fields.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => {
                    return Err(CliError::Input(format!(
                        "{name}: line {}, field {}: '{field}' is not a finite number",
                        line_no + 1,
                        col + 1
                    )))
                }
            }
        }
    }
    Ok(out)
}

pub fn read_samples(path: &Path, format: InputFormat) -> CliResult<Vec<f64>> {
    let name = if path.as_os_str() == "-" {
        "<stdin>".to_string()
    } else {
        path.display().to_string()
    };
    let bytes = read_bytes(path)?;
    let samples = match format {
        InputFormat::F64le => parse_f64le(&bytes, &name)?,
        InputFormat::Csv => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|e| CliError::Input(format!("{name}: not UTF-8 text (byte {})", e.valid_up_to())))?;
            parse_csv(text, &name)?
        }
    };
    if samples.is_empty() {
        return Err(CliError::Input(format!("{name}: no samples")));
    }
    Ok(samples)
}
