//! Store locations, great-circle distances and regional covariates.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const LOGIT_EPS: f64 = 1e-9;

/// UK constituent countries and English regions. London is the reference
/// level; the others appear in design-matrix column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    London,
    NorthernIreland,
    Scotland,
    Wales,
    NorthWest,
    NorthEast,
    Yorkshire,
    WestMidlands,
    EastMidlands,
    EastAnglia,
    SouthEast,
    SouthWest,
}

impl Region {
    pub const ALL: [Region; 12] = [
        Region::London,
        Region::NorthernIreland,
        Region::Scotland,
        Region::Wales,
        Region::NorthWest,
        Region::NorthEast,
        Region::Yorkshire,
        Region::WestMidlands,
        Region::EastMidlands,
        Region::EastAnglia,
        Region::SouthEast,
        Region::SouthWest,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Region::London => "London",
            Region::NorthernIreland => "Northern Ireland",
            Region::Scotland => "Scotland",
            Region::Wales => "Wales",
            Region::NorthWest => "North West",
            Region::NorthEast => "North East",
            Region::Yorkshire => "Yorkshire and the Humber",
            Region::WestMidlands => "West Midlands",
            Region::EastMidlands => "East Midlands",
            Region::EastAnglia => "East Anglia",
            Region::SouthEast => "South East",
            Region::SouthWest => "South West",
        }
    }

    /// Design-matrix column, `None` for the reference region.
    pub fn column(self) -> Option<usize> {
        match self {
            Region::London => None,
            r => Some(r as usize),
        }
    }

    /// Rough population-weighted centre, used to label simulated stores.
    fn centre(self) -> (f64, f64) {
        match self {
            Region::London => (51.51, -0.13),
            Region::NorthernIreland => (54.60, -6.70),
            Region::Scotland => (56.40, -4.00),
            Region::Wales => (52.30, -3.70),
            Region::NorthWest => (53.70, -2.60),
            Region::NorthEast => (54.90, -1.70),
            Region::Yorkshire => (53.90, -1.20),
            Region::WestMidlands => (52.50, -2.20),
            Region::EastMidlands => (52.90, -0.90),
            Region::EastAnglia => (52.40, 0.90),
            Region::SouthEast => (51.20, -0.60),
            Region::SouthWest => (50.80, -3.50),
        }
    }

    /// Region whose centre is nearest to the given point.
    pub fn nearest(lat: f64, lon: f64) -> Region {
        let mut best = (f64::INFINITY, Region::London);
        for r in Region::ALL {
            let (clat, clon) = r.centre();
            let d = haversine_coords(lat, lon, clat, clon);
            if d < best.0 {
                best = (d, r);
            }
        }
        best.1
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let region = match key.as_str() {
            "london" => Region::London,
            "northernireland" | "northireland" => Region::NorthernIreland,
            "scotland" => Region::Scotland,
            "wales" => Region::Wales,
            "northwest" => Region::NorthWest,
            "northeast" => Region::NorthEast,
            "yorkshireandthehumber" | "yorkshire" => Region::Yorkshire,
            "westmidlands" => Region::WestMidlands,
            "eastmidlands" => Region::EastMidlands,
            "eastanglia" | "eastofengland" | "eastengland" => Region::EastAnglia,
            "southeast" => Region::SouthEast,
            "southwest" => Region::SouthWest,
            _ => return Err(Error::UnknownRegion(s.to_string())),
        };
        Ok(region)
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of the store metadata file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreGeo {
    pub store_id: String,
    #[serde(default)]
    pub postcode: String,
    pub lat: f64,
    pub lon: f64,
    pub region: Region,
}

impl StoreGeo {
    pub fn new(store_id: impl Into<String>, lat: f64, lon: f64, region: Region) -> Result<Self> {
        let s = Self {
            store_id: store_id.into(),
            postcode: String::new(),
            lat,
            lon,
            region,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::Domain(format!(
                "store {}: coordinates ({}, {}) out of range",
                self.store_id, self.lat, self.lon
            )));
        }
        Ok(())
    }
}

fn haversine_coords(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Great-circle distance in kilometres.
pub fn haversine_km(p: &StoreGeo, q: &StoreGeo) -> f64 {
    haversine_coords(p.lat, p.lon, q.lat, q.lon)
}

pub fn distance_matrix(stores: &[StoreGeo]) -> DMatrix<f64> {
    cross_distances(stores, stores)
}

/// `rows.len() x cols.len()` distances.
pub fn cross_distances(rows: &[StoreGeo], cols: &[StoreGeo]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| haversine_km(&rows[i], &cols[j]))
}

pub fn logit(p: f64) -> f64 {
    let p = p.clamp(LOGIT_EPS, 1.0 - LOGIT_EPS);
    (p / (1.0 - p)).ln()
}

pub fn inv_logit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Intercept plus one-hot columns for the eleven non-reference regions.
pub fn design_matrix(stores: &[StoreGeo]) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(stores.len(), Region::ALL.len());
    for (i, s) in stores.iter().enumerate() {
        x[(i, 0)] = 1.0;
        if let Some(c) = s.region.column() {
            x[(i, c)] = 1.0;
        }
    }
    x
}

/// Names of the design-matrix columns.
pub fn design_columns() -> Vec<&'static str> {
    std::iter::once("Intercept")
        .chain(Region::ALL[1..].iter().map(|r| r.label()))
        .collect()
}

pub fn read_stores<R: Read>(input: R) -> Result<Vec<StoreGeo>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<StoreGeo>().enumerate() {
        let store = row.map_err(|e| Error::MalformedRecord {
            line: i + 2,
            msg: e.to_string(),
        })?;
        store.validate()?;
        out.push(store);
    }
    Ok(out)
}

pub fn read_stores_path(path: &Path) -> Result<Vec<StoreGeo>> {
    read_stores(std::fs::File::open(path)?)
}

pub fn write_stores<W: Write>(stores: &[StoreGeo], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in stores {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Distance matrix as CSV with a header row of store ids.
pub fn write_distance_csv<W: Write>(stores: &[StoreGeo], out: W) -> Result<()> {
    let d = distance_matrix(stores);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["store_id".to_string()];
    header.extend(stores.iter().map(|s| s.store_id.clone()));
    w.write_record(&header)?;
    for (i, s) in stores.iter().enumerate() {
        let mut row = vec![s.store_id.clone()];
        row.extend((0..stores.len()).map(|j| format!("{:.6}", d[(i, j)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Bounding box loosely covering Great Britain and Northern Ireland.
pub const UK_LAT: (f64, f64) = (50.0, 58.5);
pub const UK_LON: (f64, f64) = (-7.5, 1.7);

/// Uniform locations in the UK box, labelled with the nearest region centre.
pub fn random_uk_stores<R: Rng + ?Sized>(rng: &mut R, n: usize, prefix: &str) -> Vec<StoreGeo> {
    (0..n)
        .map(|i| {
            let lat = rng.random_range(UK_LAT.0..UK_LAT.1);
            let lon = rng.random_range(UK_LON.0..UK_LON.1);
            StoreGeo {
                store_id: format!("{prefix}{i}"),
                postcode: String::new(),
                lat,
                lon,
                region: Region::nearest(lat, lon),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn at(lat: f64, lon: f64) -> StoreGeo {
        StoreGeo::new("x", lat, lon, Region::London).unwrap()
    }

    #[test]
    fn haversine_examples() {
        let p = at(51.5, -0.1);
        assert_eq!(haversine_km(&p, &p), 0.0);
        let d = haversine_km(&at(0.0, 0.0), &at(0.0, 180.0));
        assert_relative_eq!(d, std::f64::consts::PI * 6371.0, max_relative = 1e-12);
        assert_relative_eq!(d, 20015.1, epsilon = 0.1);
    }

    #[test]
    fn logit_examples() {
        assert_eq!(logit(0.5), 0.0);
        assert_eq!(inv_logit(0.0), 0.5);
        assert_relative_eq!(logit(0.1), -2.197_224_577_336_219_6, epsilon = 1e-12);
        assert!(logit(0.0).is_finite() && logit(1.0).is_finite());
        assert_relative_eq!(inv_logit(-800.0), 0.0);
    }

    #[test]
    fn region_labels_round_trip() {
        for r in Region::ALL {
            assert_eq!(r.label().parse::<Region>().unwrap(), r);
        }
        assert_eq!("Yorkshire".parse::<Region>().unwrap(), Region::Yorkshire);
        assert!("Atlantis".parse::<Region>().is_err());
    }

    #[test]
    fn design_matrix_rows() {
        let mut stores: Vec<StoreGeo> = Region::ALL
            .iter()
            .map(|&r| StoreGeo::new("s", 52.0, -1.0, r).unwrap())
            .collect();
        let x = design_matrix(&stores);
        assert_eq!(x.ncols(), 12);
        for i in 0..x.nrows() {
            let sum: f64 = x.row(i).sum();
            assert!(sum == 1.0 || sum == 2.0);
        }
        assert_eq!(x.row(0).sum(), 1.0);
        assert_eq!(x[(2, 2)], 1.0);
        assert_eq!(design_columns()[2], "Scotland");

        stores.truncate(1);
        let x = design_matrix(&[stores[0].clone(), stores[0].clone()]);
        assert_eq!(x.columns(1, 11).sum(), 0.0);
    }

    #[test]
    fn stores_csv_round_trip() {
        let stores = vec![
            StoreGeo::new("a", 55.95, -3.19, Region::Scotland).unwrap(),
            StoreGeo::new("b", 51.48, -3.18, Region::Wales).unwrap(),
        ];
        let mut buf = Vec::new();
        write_stores(&stores, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("store_id,postcode,lat,lon,region"));
        assert_eq!(read_stores(buf.as_slice()).unwrap(), stores);
        let bad = "store_id,postcode,lat,lon,region\na,,95,0,London\n";
        assert!(read_stores(bad.as_bytes()).is_err());
        let unknown = "store_id,postcode,lat,lon,region\na,,50,0,Mars\n";
        assert!(read_stores(unknown.as_bytes()).is_err());
    }

    #[test]
    fn random_stores_fall_in_box() {
        let mut rng = crate::rng::seeded(3);
        let s = random_uk_stores(&mut rng, 50, "s");
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|x| x.lat >= UK_LAT.0 && x.lat < UK_LAT.1));
        assert_eq!(Region::nearest(55.95, -3.19), Region::Scotland);
        assert_eq!(Region::nearest(51.5, -0.12), Region::London);
    }
}
