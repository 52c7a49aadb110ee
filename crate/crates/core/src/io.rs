//! Two-file array format: `<stem>.raw` holds little-endian `f64` values,
//! `<stem>.json` holds the header describing their shape.
//!
//! ```json
//! {"kind":"image","rows":64,"cols":64,"pixel_size":1.0,"provenance":{...}}
//! {"kind":"sinogram","views":90,"bins":95,"angles":[...],"detector_spacing":0.95,
//!  "view_ids":[...],"provenance":{...}}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::array::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AcquisitionGeometry, ImageGeometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrayHeader {
    Image {
        rows: usize,
        cols: usize,
        pixel_size: f64,
        #[serde(default)]
        provenance: Value,
    },
    Sinogram {
        views: usize,
        bins: usize,
        angles: Vec<f64>,
        detector_spacing: f64,
        view_ids: Vec<usize>,
        #[serde(default)]
        provenance: Value,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum StoredArray {
    Image(Image),
    Sinogram(Sinogram),
}

pub fn raw_path(stem: &Path) -> PathBuf {
    stem.with_extension("raw")
}

pub fn header_path(stem: &Path) -> PathBuf {
    stem.with_extension("json")
}

fn encode(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn decode(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::ArrayFormat(format!("blob length {} is not a multiple of 8", bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn write_pair(stem: &Path, header: &ArrayHeader, values: &[f64]) -> Result<()> {
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(raw_path(stem), encode(values))?;
    let mut text = serde_json::to_string_pretty(header)?;
    text.push('\n');
    fs::write(header_path(stem), text)?;
    Ok(())
}

pub fn write_image(stem: &Path, image: &Image, provenance: Value) -> Result<()> {
    let g = image.geometry();
    let header = ArrayHeader::Image { rows: g.rows(), cols: g.cols(), pixel_size: g.pixel_size(), provenance };
    write_pair(stem, &header, image.values())
}

pub fn write_sinogram(stem: &Path, sinogram: &Sinogram, provenance: Value) -> Result<()> {
    let g = sinogram.geometry();
    let header = ArrayHeader::Sinogram {
        views: g.num_views(),
        bins: g.num_bins(),
        angles: g.view_angles().to_vec(),
        detector_spacing: g.detector_spacing(),
        view_ids: sinogram.view_ids().to_vec(),
        provenance,
    };
    write_pair(stem, &header, sinogram.values())
}

pub fn read_header(stem: &Path) -> Result<ArrayHeader> {
    Ok(serde_json::from_str(&fs::read_to_string(header_path(stem))?)?)
}

pub fn read_array(stem: &Path) -> Result<(StoredArray, Value)> {
    let header = read_header(stem)?;
    let values = decode(&fs::read(raw_path(stem))?)?;
    match header {
        ArrayHeader::Image { rows, cols, pixel_size, provenance } => {
            let g = ImageGeometry::new(rows, cols, pixel_size)?;
            Ok((StoredArray::Image(Image::from_vec(&g, values)?), provenance))
        }
        ArrayHeader::Sinogram { views, bins, angles, detector_spacing, view_ids, provenance } => {
            if angles.len() != views {
                return Err(Error::ArrayFormat(format!("{} angles for {views} views", angles.len())));
            }
            let g = AcquisitionGeometry::new(angles, bins, detector_spacing)?;
            Ok((StoredArray::Sinogram(Sinogram::from_vec(&g, view_ids, values)?), provenance))
        }
    }
}

pub fn read_image(stem: &Path) -> Result<Image> {
    match read_array(stem)? {
        (StoredArray::Image(image), _) => Ok(image),
        _ => Err(Error::ArrayFormat(format!("{} is not an image", stem.display()))),
    }
}

pub fn read_sinogram(stem: &Path) -> Result<Sinogram> {
    match read_array(stem)? {
        (StoredArray::Sinogram(s), _) => Ok(s),
        _ => Err(Error::ArrayFormat(format!("{} is not a sinogram", stem.display()))),
    }
}
