//! Point-cloud PLY (x, y, z, sensor_id, t).

use std::fmt::Write as _;

use skinsim_core::analysis::{CloudPoint, PointCloud};
use skinsim_core::math::Point3;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlyFormat {
    Ascii,
    #[default]
    Binary,
}

fn header(format: PlyFormat, n: usize) -> String {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::Binary => "binary_little_endian",
    };
    format!(
        "ply\nformat {fmt} 1.0\nelement vertex {n}\nproperty double x\nproperty double y\nproperty double z\nproperty uint sensor_id\nproperty double t\nend_header\n"
    )
}

pub fn write_ply(cloud: &PointCloud, format: PlyFormat) -> Vec<u8> {
    let mut out = header(format, cloud.len()).into_bytes();
    match format {
        PlyFormat::Ascii => {
            let mut body = String::new();
            for p in &cloud.points {
                let _ = writeln!(body, "{} {} {} {} {}", p.position.x, p.position.y, p.position.z, p.sensor_id, p.timestamp);
            }
            out.extend_from_slice(body.as_bytes());
        }
        PlyFormat::Binary => {
            for p in &cloud.points {
                for v in [p.position.x, p.position.y, p.position.z] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                out.extend_from_slice(&p.sensor_id.to_le_bytes());
                out.extend_from_slice(&p.timestamp.to_le_bytes());
            }
        }
    }
    out
}

/// Reads files produced by [`write_ply`].
pub fn read_ply(bytes: &[u8]) -> Result<PointCloud> {
    let end = b"end_header\n";
    let split = bytes.windows(end.len()).position(|w| w == end).ok_or_else(|| Error::format("PLY: missing end_header"))?;
    let head = std::str::from_utf8(&bytes[..split]).map_err(|_| Error::format("PLY: header is not text"))?;
    let body = &bytes[split + end.len()..];
    let n: usize = head
        .lines()
        .find_map(|l| l.strip_prefix("element vertex "))
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::format("PLY: missing vertex count"))?;
    let mut points = Vec::with_capacity(n);
    if head.contains("format ascii") {
        let text = std::str::from_utf8(body).map_err(|_| Error::format("PLY: body is not text"))?;
        for line in text.lines().take(n) {
            let t: Vec<&str> = line.split_whitespace().collect();
            let f = |k: usize| t.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| Error::format("PLY: bad row"));
            let id = t.get(3).and_then(|s| s.parse::<u32>().ok()).ok_or_else(|| Error::format("PLY: bad sensor id"))?;
            points.push(CloudPoint { position: Point3::new(f(0)?, f(1)?, f(2)?), sensor_id: id, timestamp: f(4)? });
        }
    } else {
        const ROW: usize = 36;
        if body.len() < n * ROW {
            return Err(Error::format("PLY: truncated body"));
        }
        for row in body.chunks_exact(ROW).take(n) {
            let f = |o: usize| f64::from_le_bytes(row[o..o + 8].try_into().expect("8 bytes"));
            let id = u32::from_le_bytes(row[24..28].try_into().expect("4 bytes"));
            points.push(CloudPoint { position: Point3::new(f(0), f(8), f(16)), sensor_id: id, timestamp: f(28) });
        }
    }
    if points.len() != n {
        return Err(Error::format("PLY: fewer rows than declared"));
    }
    Ok(PointCloud { points })
}
