//! Instance and solution files.

mod json;
mod tsplib;

use std::fs;
use std::path::Path;
use std::str::FromStr;

pub use json::{instance_from_value, instance_to_value, solution_from_value, solution_to_value};
pub use tsplib::parse_tsplib;

use crate::error::{Error, Result};
use crate::instance::{Instance, Metric};
use crate::scalar::Scalar;
use crate::solution::{Solution, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Tsplib,
    Json,
}

impl Format {
    /// `.json` is the native format; anything else is read as TSPLIB.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Tsplib,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vrp" | "tsplib" | "vrp-tsplib" => Ok(Format::Tsplib),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("unknown instance format `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    /// Check the triangle inequality of explicit matrices (`O(n³)`).
    /// Euclidean metrics are always trusted.
    pub validate_metric: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { validate_metric: true }
    }
}

pub fn parse_instance<T: Scalar>(text: &str, format: Format, opts: LoadOptions) -> Result<Instance<T>> {
    let inst = match format {
        Format::Tsplib => parse_tsplib(text)?,
        Format::Json => {
            let value: serde_json::Value = serde_json::from_str(text)
                .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
            instance_from_value(&value)?
        }
    };
    if opts.validate_metric && matches!(inst.metric(), Metric::Matrix { .. }) {
        inst.validate_metric()?;
    }
    Ok(inst)
}

pub fn load_instance<T: Scalar>(path: impl AsRef<Path>, format: Format) -> Result<Instance<T>> {
    load_instance_with(path, format, LoadOptions::default())
}

pub fn load_instance_with<T: Scalar>(path: impl AsRef<Path>, format: Format, opts: LoadOptions) -> Result<Instance<T>> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text, format, opts)
}

pub fn instance_to_json<T: Scalar>(inst: &Instance<T>) -> String {
    pretty(&instance_to_value(inst))
}

pub fn save_instance<T: Scalar>(inst: &Instance<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn solution_to_json<T: Scalar>(sol: &Solution<T>, variant: Variant) -> String {
    pretty(&solution_to_value(sol, variant))
}

pub fn load_solution<T: Scalar>(inst: &Instance<T>, path: impl AsRef<Path>) -> Result<(Solution<T>, Variant)> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    let (sol, variant, _) = solution_from_value(inst, &value)?;
    Ok((sol, variant))
}

/// Pretty JSON with a trailing newline.
pub fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_violation_rejected_at_load() {
        let text = r#"{"depot": 0, "customers": [1, 2], "demands": [0.1, 0.1],
            "metric": {"type": "matrix", "data": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}}"#;
        assert!(matches!(parse_instance::<f64>(text, Format::Json, LoadOptions::default()), Err(Error::Validation(_))));
        let lax = LoadOptions { validate_metric: false };
        assert!(parse_instance::<f64>(text, Format::Json, lax).is_ok());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("a/b.JSON")), Format::Json);
        assert_eq!(Format::from_path(Path::new("E-n13-k4.vrp")), Format::Tsplib);
    }
}
