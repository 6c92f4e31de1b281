//! JSON persistence and CSV export.
//!
//! File schema:
//! `{"name": str, "dim": int, "points": [[real, ...], ...], "priors": [real, ...]?, "labels": [str, ...]?}`

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Constellation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct ConstellationFile<T> {
    name: String,
    dim: usize,
    points: Vec<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    priors: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Rescale files whose average energy is not 1 instead of rejecting them.
    pub auto_normalize: bool,
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<Constellation<T>> {
    load_with(path, LoadOptions::default())
}

pub fn load_with<T: Scalar>(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Constellation<T>> {
    let text = fs::read_to_string(path.as_ref())?;
    from_json(&text, opts)
}

pub(crate) fn from_json<T: Scalar>(text: &str, opts: LoadOptions) -> Result<Constellation<T>> {
    let file: ConstellationFile<T> = serde_json::from_str(text)?;
    if let Some(p) = file.points.iter().position(|p| p.len() != file.dim) {
        return Err(Error::Validation(format!(
            "point {p} has dimension {}, file declares dim = {}",
            file.points[p].len(),
            file.dim
        )));
    }
    let c = Constellation::new(file.name, file.points, file.priors, file.labels)?;
    if c.is_normalized() {
        Ok(c)
    } else if opts.auto_normalize {
        log::warn!(
            "{}: average energy {} is not 1; normalizing",
            c.name(),
            c.average_energy()
        );
        c.normalize()
    } else {
        Err(Error::Validation(format!(
            "average energy is {}, expected 1 (enable auto-normalize to rescale)",
            c.average_energy()
        )))
    }
}

pub(crate) fn to_json<T: Scalar>(c: &Constellation<T>) -> Result<String> {
    let file = ConstellationFile {
        name: c.name.clone(),
        dim: c.dim,
        points: c.points.clone(),
        priors: Some(c.priors.clone()),
        labels: c.labels.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn save<T: Scalar>(c: &Constellation<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(c)? + "\n")?;
    Ok(())
}

/// One point per row: coordinates, then the label column when labels exist.
pub fn to_csv<T: Scalar>(c: &Constellation<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..c.dim).map(|k| format!("x{k}")).collect();
    if c.labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, p) in c.points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        if let Some(labels) = &c.labels {
            row.push(labels[i].clone());
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
