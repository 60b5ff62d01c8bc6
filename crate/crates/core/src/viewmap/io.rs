use std::io::Write;
use std::path::Path;

use super::grid::{Channel, MapMeta, SmoothingParams, ViewMapGrid};
use super::ViewMapError;

pub const MAGIC: &[u8; 5] = b"GVMAP";
pub const FORMAT_VERSION: u32 = 1;

/// Serializes a map: little-endian header, channels as f64 (row-major,
/// azimuth fastest), then a CRC32 of everything before it.
pub fn write_map<W: Write>(m: &ViewMapGrid, mut w: W) -> Result<(), ViewMapError> {
    let meta = serde_json::to_vec(&m.meta).map_err(|e| ViewMapError::CorruptFile(e.to_string()))?;
    let mut buf = Vec::with_capacity(128 + meta.len() + 5 * 8 * m.n * m.n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for v in [m.params.spacing, m.params.extent, m.params.variance, m.threshold] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(m.n as u32).to_le_bytes());
    buf.extend_from_slice(&(m.n as u32).to_le_bytes());
    buf.extend_from_slice(&(Channel::ALL.len() as u32).to_le_bytes());
    buf.extend_from_slice(&m.sample_count.to_le_bytes());
    buf.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    buf.extend_from_slice(&meta);
    for c in Channel::ALL {
        for v in m.channel(c) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    w.write_all(&buf).map_err(|e| ViewMapError::Io {
        path: "<writer>".into(),
        source: e,
    })
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ViewMapError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| ViewMapError::CorruptFile("unexpected end of data".into()))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ViewMapError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ViewMapError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ViewMapError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_map(data: &[u8]) -> Result<ViewMapGrid, ViewMapError> {
    let mut cur = Cursor { data, pos: 0 };
    if cur.take(MAGIC.len())? != MAGIC {
        return Err(ViewMapError::CorruptFile("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(ViewMapError::FormatVersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if data.len() < 4 + cur.pos {
        return Err(ViewMapError::CorruptFile("missing checksum".into()));
    }
    let (body, tail) = data.split_at(data.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
        return Err(ViewMapError::CorruptFile("checksum mismatch".into()));
    }
    let mut cur = Cursor { data: body, pos: cur.pos };
    let spacing = cur.f64()?;
    let extent = cur.f64()?;
    let variance = cur.f64()?;
    let threshold = cur.f64()?;
    let (na, ne) = (cur.u32()? as usize, cur.u32()? as usize);
    let n_channels = cur.u32()? as usize;
    let sample_count = cur.u64()?;
    let meta_len = cur.u32()? as usize;
    let meta: MapMeta = serde_json::from_slice(cur.take(meta_len)?)
        .map_err(|e| ViewMapError::CorruptFile(format!("meta: {e}")))?;
    let params = SmoothingParams {
        variance,
        spacing,
        extent,
    };
    let mut m = ViewMapGrid::zeros(params, threshold)
        .map_err(|e| ViewMapError::CorruptFile(e.to_string()))?;
    if na != m.n || ne != m.n || n_channels != Channel::ALL.len() {
        return Err(ViewMapError::CorruptFile("grid shape does not match parameters".into()));
    }
    for c in Channel::ALL {
        for v in m.channel_mut(c).iter_mut() {
            *v = cur.f64()?;
        }
    }
    if cur.pos != body.len() {
        return Err(ViewMapError::CorruptFile("trailing bytes".into()));
    }
    m.sample_count = sample_count;
    m.meta = meta;
    Ok(m)
}

pub fn save_map(m: &ViewMapGrid, path: &Path) -> Result<(), ViewMapError> {
    let mut buf = Vec::new();
    write_map(m, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| ViewMapError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_map(path: &Path) -> Result<ViewMapGrid, ViewMapError> {
    let data = std::fs::read(path).map_err(|e| ViewMapError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_map(&data)
}

impl ViewMapGrid {
    /// One row per cell: azimuth, elevation and the five channels. Undefined
    /// accuracy is written as an empty field.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("azimuth,elevation");
        for c in Channel::ALL {
            s.push(',');
            s.push_str(c.name());
        }
        s.push('\n');
        for j in 0..self.n {
            for i in 0..self.n {
                s.push_str(&format!("{:?},{:?}", self.azimuth(i), self.elevation(j)));
                for c in Channel::ALL {
                    let v = self.get(c, i, j);
                    if v.is_nan() {
                        s.push(',');
                    } else {
                        s.push_str(&format!(",{v:?}"));
                    }
                }
                s.push('\n');
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viewmap::{accumulate, smooth, ViewSample};

    fn some_map() -> ViewMapGrid {
        let samples = (0..20)
            .map(|k| ViewSample {
                azimuth: (k as f64 * 0.7).sin() * 2.0,
                elevation: (k as f64 * 0.3).cos() * 0.8,
                score: (k as f64 * 0.13) % 1.0,
                label: k % 3 == 0,
            })
            .collect();
        let p = SmoothingParams {
            variance: 0.01,
            ..Default::default()
        };
        let mut m = smooth(&accumulate(samples, 0.5), &p).unwrap();
        m.meta.shape_class = Some("box".into());
        m.meta.seeds = vec![1, 2];
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = some_map();
        assert!(m.channel(Channel::Accuracy).iter().any(|v| v.is_nan()));
        let mut buf = Vec::new();
        write_map(&m, &mut buf).unwrap();
        assert_eq!(read_map(&buf).unwrap(), m);
    }

    #[test]
    fn truncated_is_corrupt() {
        let mut buf = Vec::new();
        write_map(&some_map(), &mut buf).unwrap();
        buf.truncate(buf.len() - 100);
        assert!(matches!(read_map(&buf), Err(ViewMapError::CorruptFile(_))));
    }

    #[test]
    fn flipped_bit_is_corrupt() {
        let mut buf = Vec::new();
        write_map(&some_map(), &mut buf).unwrap();
        buf[200] ^= 1;
        assert!(matches!(read_map(&buf), Err(ViewMapError::CorruptFile(_))));
    }

    #[test]
    fn other_version_is_rejected() {
        let mut buf = Vec::new();
        write_map(&some_map(), &mut buf).unwrap();
        buf[5..9].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            read_map(&buf),
            Err(ViewMapError::FormatVersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let m = some_map();
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 1 + 43 * 43);
        assert!(csv.starts_with("azimuth,elevation,candidate_density,tp_density,fp_density,accuracy,tp_minus_fp\n"));
    }
}
