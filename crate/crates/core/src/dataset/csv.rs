//! CSV ingestion with declared column roles.
//!
//! Dialect: comma-separated, header row required, `.` decimal separator,
//! UTF-8. Rows containing empty cells in any used column are rejected
//! (dropped); non-numeric content in a numeric column is a hard parse error
//! naming the row.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, Location, Observation, Response, ResponseKind};

/// Column roles for [`load_csv`]: which columns carry coordinates, the
/// response, features, and the optional group id.
///
/// Coordinate columns may also be listed in `features`, registering x/y as
/// ordinary predictor channels alongside their geometric role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub x: String,
    pub y: String,
    pub response: String,
    pub response_kind: ResponseKind,
    pub features: Vec<String>,
    #[serde(default)]
    pub group: Option<String>,
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize, DatasetError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
}

fn parse_number(row: usize, column: &str, value: &str) -> Result<f64, DatasetError> {
    value.trim().parse::<f64>().map_err(|_| DatasetError::Parse {
        row,
        column: column.to_string(),
        value: value.to_string(),
    })
}

/// Loads a point dataset from a CSV file according to the declared roles.
pub fn load_csv(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?
        .clone();

    let xi = header_index(&headers, &roles.x)?;
    let yi = header_index(&headers, &roles.y)?;
    let ri = header_index(&headers, &roles.response)?;
    let fi: Vec<usize> = roles
        .features
        .iter()
        .map(|f| header_index(&headers, f))
        .collect::<Result<_, _>>()?;
    let gi = roles
        .group
        .as_ref()
        .map(|g| header_index(&headers, g))
        .transpose()?;

    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, u32> = HashMap::new();
    let mut observations = Vec::new();

    for (k, record) in reader.records().enumerate() {
        let row = k + 2; // 1-based, after the header
        let record = record.map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        let mut used: Vec<usize> = vec![xi, yi, ri];
        used.extend(&fi);
        used.extend(gi);
        // Rows with missing values in any used column are rejected.
        if used.iter().any(|&c| record.get(c).is_none_or(|v| v.trim().is_empty())) {
            continue;
        }
        let x = parse_number(row, &roles.x, &record[xi])?;
        let y = parse_number(row, &roles.y, &record[yi])?;
        let response = match roles.response_kind {
            ResponseKind::Regression => {
                Response::Numeric(parse_number(row, &roles.response, &record[ri])?)
            }
            ResponseKind::Classification => {
                let label = record[ri].trim().to_string();
                let next = labels.len() as u32;
                let id = *label_index.entry(label.clone()).or_insert_with(|| {
                    labels.push(label);
                    next
                });
                Response::Class(id)
            }
        };
        let features = fi
            .iter()
            .zip(&roles.features)
            .map(|(&c, name)| parse_number(row, name, &record[c]))
            .collect::<Result<Vec<f64>, _>>()?;
        let group_id = gi
            .map(|c| {
                let v = record[c].trim();
                v.parse::<u64>()
                    .or_else(|_| parse_number(row, roles.group.as_ref().unwrap(), v).map(|f| f as u64))
            })
            .transpose()?;
        observations.push(Observation {
            location: Location::new(x, y),
            response,
            features,
            group_id,
        });
    }

    let coord_features = {
        let cx = roles.features.iter().position(|f| *f == roles.x);
        let cy = roles.features.iter().position(|f| *f == roles.y);
        match (cx, cy) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    };
    // Coordinate feature channels must mirror the geometric coordinates.
    if let Some((a, b)) = coord_features {
        for obs in &mut observations {
            obs.features[a] = obs.location.x;
            obs.features[b] = obs.location.y;
        }
    }

    Dataset::new(
        roles.features.clone(),
        observations,
        roles.response_kind,
        labels,
        coord_features,
    )
}

/// Loads a plain list of locations (a prediction grid) from a CSV file with
/// the named coordinate columns.
pub fn load_locations_csv(
    path: impl AsRef<Path>,
    x: &str,
    y: &str,
) -> Result<Vec<Location>, DatasetError> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?
        .clone();
    let xi = header_index(&headers, x)?;
    let yi = header_index(&headers, y)?;
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        if record.get(xi).is_none_or(|v| v.trim().is_empty())
            || record.get(yi).is_none_or(|v| v.trim().is_empty())
        {
            continue;
        }
        out.push(Location::new(
            parse_number(row, x, &record[xi])?,
            parse_number(row, y, &record[yi])?,
        ));
    }
    Ok(out)
}
