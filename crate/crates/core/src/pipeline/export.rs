//! Point maps as GeoJSON.

use std::io::Read;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::{inv_logit, StoreGeo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Values written as given.
    Identity,
    /// Logit values mapped back to probabilities.
    Probability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub store_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapExport {
    pub geojson: Value,
    pub skipped: Vec<SkippedRow>,
}

/// One point feature per `(store_id, value)` row, in row order. Rows whose
/// store has no location or whose value is not finite are reported instead.
pub fn export_map(values: &[(String, f64)], stores: &[StoreGeo], scale: Scale) -> MapExport {
    let mut features = Vec::with_capacity(values.len());
    let mut skipped = Vec::new();
    for (id, v) in values {
        let value = match scale {
            Scale::Identity => *v,
            Scale::Probability => inv_logit(*v),
        };
        let Some(s) = stores.iter().find(|s| &s.store_id == id) else {
            skipped.push(SkippedRow {
                store_id: id.clone(),
                reason: "no location in store metadata".into(),
            });
            continue;
        };
        if !value.is_finite() {
            skipped.push(SkippedRow {
                store_id: id.clone(),
                reason: format!("non-finite value {value}"),
            });
            continue;
        }
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [s.lon, s.lat]},
            "properties": {"store_id": id, "value": value},
        }));
    }
    MapExport {
        geojson: json!({"type": "FeatureCollection", "features": features}),
        skipped,
    }
}

/// Reads `store_id` and one named numeric column from a CSV file.
pub fn read_value_column<R: Read>(input: R, column: &str) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("CSV has no column {name:?}")))
    };
    let (id_col, value_col) = (find("store_id")?, find(column)?);
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let v: f64 = row[value_col].trim().parse().map_err(|_| Error::MalformedRecord {
            line: i + 2,
            msg: format!("{column} is not a number: {:?}", &row[value_col]),
        })?;
        out.push((row[id_col].to_string(), v));
    }
    Ok(out)
}
