//! Point-cloud file loading and saving, and random downsampling.
//!
//! Two formats: ASCII PLY (vertex x/y/z properties; faces and extra
//! properties are ignored; binary PLY is rejected) and XYZ (one
//! whitespace-separated triple per line, `#` starts a comment). Written XYZ
//! uses 17 significant digits, so save/load round-trips are exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    PlyAscii,
    Xyz,
}

/// A cloud file reference with an optional explicit format; otherwise the
/// format comes from the extension, falling back to the `ply` magic line.
#[derive(Debug, Clone)]
pub struct CloudFile {
    pub path: PathBuf,
    pub format: Option<CloudFormat>,
}

impl CloudFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        CloudFile { path: path.into(), format: None }
    }

    fn detect(&self) -> CloudFormat {
        if let Some(f) = self.format {
            return f;
        }
        match self.path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::Xyz,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

pub fn load_cloud(file: &CloudFile) -> Result<PointCloud> {
    let reader = BufReader::new(File::open(&file.path).map_err(|e| io_err(&file.path, e))?);
    let mut lines = Vec::new();
    for l in reader.lines() {
        lines.push(l.map_err(|e| io_err(&file.path, e))?);
    }
    match file.detect() {
        CloudFormat::Xyz => parse_xyz(&file.path, &lines),
        CloudFormat::PlyAscii => parse_ply(&file.path, &lines),
    }
}

pub fn load_cloud_path(path: impl Into<PathBuf>) -> Result<PointCloud> {
    load_cloud(&CloudFile::new(path))
}

fn parse_coord(path: &Path, line_no: usize, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(path, line_no, format!("invalid number {token:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line_no, format!("non-finite coordinate {token:?}")));
    }
    Ok(v)
}

fn parse_xyz(path: &Path, lines: &[String]) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (idx, raw) in lines.iter().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 3 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 3 coordinates, found {}", tokens.len()),
            ));
        }
        points.push(Point3::new(
            parse_coord(path, line_no, tokens[0])?,
            parse_coord(path, line_no, tokens[1])?,
            parse_coord(path, line_no, tokens[2])?,
        ));
    }
    Ok(PointCloud::new(points))
}

struct PlyElement {
    name: String,
    count: usize,
    /// scalar property names in declaration order; list properties are None
    properties: Vec<Option<String>>,
}

fn parse_ply(path: &Path, lines: &[String]) -> Result<PointCloud> {
    let mut it = lines.iter().enumerate();
    match it.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(parse_err(path, 1, "missing `ply` magic line")),
    }

    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    let mut body_start = None;
    for (idx, raw) in it.by_ref() {
        let line_no = idx + 1;
        let line = raw.trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                let kind = tokens.next().unwrap_or("");
                if kind != "ascii" {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        msg: format!("only ascii PLY is supported, found {kind:?}"),
                    });
                }
                saw_format = true;
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| parse_err(path, line_no, "element without a name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(path, line_no, "element without a count"))?;
                elements.push(PlyElement { name: name.to_string(), count, properties: Vec::new() });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, line_no, "property before any element"))?;
                let ty = tokens.next().unwrap_or("");
                if ty == "list" {
                    el.properties.push(None);
                } else {
                    let name = tokens
                        .next()
                        .ok_or_else(|| parse_err(path, line_no, "property without a name"))?;
                    el.properties.push(Some(name.to_string()));
                }
            }
            Some("end_header") => {
                body_start = Some(idx + 1);
                break;
            }
            Some(other) => {
                return Err(parse_err(path, line_no, format!("unknown header keyword {other:?}")));
            }
        }
    }
    let body_start =
        body_start.ok_or_else(|| parse_err(path, lines.len(), "header never ended"))?;
    if !saw_format {
        return Err(parse_err(path, 1, "header is missing a format line"));
    }

    let mut points = Vec::new();
    let mut cursor = body_start;
    for el in &elements {
        if el.name == "vertex" {
            let col = |name: &str| -> Result<usize> {
                el.properties
                    .iter()
                    .position(|p| p.as_deref() == Some(name))
                    .ok_or_else(|| {
                        parse_err(path, body_start, format!("vertex element has no {name} property"))
                    })
            };
            let (cx, cy, cz) = (col("x")?, col("y")?, col("z")?);
            if el.properties.iter().take(cx.max(cy).max(cz) + 1).any(|p| p.is_none()) {
                return Err(Error::UnsupportedFormat {
                    path: path.to_path_buf(),
                    msg: "list property before vertex coordinates".into(),
                });
            }
            points.reserve(el.count);
            for _ in 0..el.count {
                let line_no = cursor + 1;
                let raw = lines
                    .get(cursor)
                    .ok_or_else(|| parse_err(path, line_no, "file ended inside vertex data"))?;
                cursor += 1;
                let tokens: Vec<&str> = raw.split_whitespace().collect();
                if tokens.len() < el.properties.len() {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!(
                            "vertex row has {} values, header declares {}",
                            tokens.len(),
                            el.properties.len()
                        ),
                    ));
                }
                points.push(Point3::new(
                    parse_coord(path, line_no, tokens[cx])?,
                    parse_coord(path, line_no, tokens[cy])?,
                    parse_coord(path, line_no, tokens[cz])?,
                ));
            }
        } else {
            // one instance per line, skipped wholesale
            cursor += el.count;
            if cursor > lines.len() {
                return Err(parse_err(path, lines.len(), "file ended inside element data"));
            }
        }
    }
    Ok(PointCloud::new(points))
}

/// Full-precision float formatting; parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the cloud as XYZ with 17 significant digits.
pub fn save_cloud_xyz(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "# {} points", cloud.len())?;
        for p in cloud.iter() {
            writeln!(w, "{} {} {}", format_f64(p.x), format_f64(p.y), format_f64(p.z))?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| io_err(path, e))
}

/// Uniform sample of `n` points without replacement, in original cloud
/// order; the whole cloud when `n >= len`. Deterministic per seed.
pub fn downsample(cloud: &PointCloud, n: usize, seed: u64) -> PointCloud {
    assert!(n >= 1, "sample size must be at least 1");
    if n >= cloud.len() {
        return cloud.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, cloud.len(), n).into_vec();
    indices.sort_unstable();
    PointCloud::new(indices.into_iter().map(|i| cloud.points()[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn tmp(name: &str, content: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("tivreg-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn xyz_basic() {
        let p = tmp("basic.xyz", "0 0 0\n1 2 3\n");
        let c = load_cloud_path(&p).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.points()[1], Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn xyz_comments_and_blanks() {
        let p = tmp("comments.xyz", "# header\n\n1 2 3 # trailing\n# done\n");
        let c = load_cloud_path(&p).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn xyz_rejects_nan() {
        let p = tmp("nan.xyz", "0 0 0\n1 2 nan\n");
        match load_cloud_path(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn xyz_rejects_wrong_arity() {
        let p = tmp("arity.xyz", "0 0\n");
        assert!(matches!(load_cloud_path(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn ply_with_faces() {
        let p = tmp(
            "tri.ply",
            "ply\nformat ascii 1.0\ncomment demo\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n",
        );
        let c = load_cloud_path(&p).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.points()[2], Point3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn ply_extra_vertex_properties() {
        let p = tmp(
            "extra.ply",
            "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nend_header\n0 0 0 255\n1 1 1 0\n",
        );
        let c = load_cloud_path(&p).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn ply_binary_rejected() {
        let p = tmp(
            "bin.ply",
            "ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        );
        assert!(matches!(load_cloud_path(&p), Err(Error::UnsupportedFormat { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_cloud_path("/nonexistent/tivreg-nope.xyz"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn xyz_round_trip_exact() {
        let mut rng = rand::rng();
        let cloud = PointCloud::new(
            (0..200)
                .map(|_| {
                    Point3::new(
                        rng.random_range(-1e3..1e3),
                        rng.random::<f64>() * 1e-7,
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect(),
        );
        let dir = std::env::temp_dir().join("tivreg-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round.xyz");
        save_cloud_xyz(&path, &cloud).unwrap();
        let back = load_cloud_path(&path).unwrap();
        assert_eq!(cloud.points(), back.points());
    }

    #[test]
    fn downsample_behaviour() {
        let cloud = PointCloud::new((0..1000).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect());
        assert_eq!(downsample(&cloud, 2000, 1).len(), 1000);
        let a = downsample(&cloud, 500, 7);
        let b = downsample(&cloud, 500, 7);
        assert_eq!(a.points(), b.points());
        assert_eq!(a.len(), 500);
        // distinct points
        let mut xs: Vec<i64> = a.iter().map(|p| p.x as i64).collect();
        xs.dedup();
        assert_eq!(xs.len(), 500);
        let c = downsample(&cloud, 500, 8);
        assert_ne!(a.points(), c.points());
    }
}
