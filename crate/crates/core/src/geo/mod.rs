//! The geospatial demo: charger records, map projection, point clouds.

mod charger;
mod mercator;
mod ply;

pub use charger::{
    load_chargers, query_chargers, ChargerQuery, ChargerRecord, ChargerType, RowError, CHARGER_HEADER,
};
pub use mercator::{check_coordinates, mercator_project, mercator_unproject, MapPlaneSpec, MAX_LATITUDE};
pub use ply::{load_point_cloud, CloudPoint, PointCloud};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} outside the Web Mercator domain (|lat| <= 85.05113)")]
    LatitudeOutOfDomain(f64),
    #[error("longitude {0} outside [-180, 180)")]
    LongitudeOutOfDomain(f64),
    #[error("point ({x}, {y}) lies outside the map plane")]
    OutsideMap { x: f64, y: f64 },
    #[error("invalid map plane: {0}")]
    InvalidMapSpec(&'static str),
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported PLY format {0:?}; only ascii is read")]
    UnsupportedFormat(String),
    #[error("truncated file: element {element} declares {declared} rows, found {found}")]
    Truncated { element: String, declared: usize, found: usize },
    #[error("PLY line {line}: {message}")]
    Ply { line: usize, message: String },
}
