use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::error::KernelError;
use super::geom::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteKind {
    #[serde(alias = "euclidean", alias = "euclid")]
    EuclideanPoint,
    #[serde(alias = "power")]
    PowerCircle,
    #[serde(alias = "apollonius")]
    ApolloniusPoint,
}

impl SiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SiteKind::EuclideanPoint => "euclidean-point",
            SiteKind::PowerCircle => "power-circle",
            SiteKind::ApolloniusPoint => "apollonius-point",
        }
    }

    pub fn parse(s: &str) -> Result<Self, KernelError> {
        match s.trim() {
            "euclidean-point" | "euclidean" | "euclid" => Ok(SiteKind::EuclideanPoint),
            "power-circle" | "power" => Ok(SiteKind::PowerCircle),
            "apollonius-point" | "apollonius" => Ok(SiteKind::ApolloniusPoint),
            other => Err(KernelError::Parse(format!("unknown site kind {other:?}"))),
        }
    }

    pub fn all() -> [SiteKind; 3] {
        [SiteKind::EuclideanPoint, SiteKind::PowerCircle, SiteKind::ApolloniusPoint]
    }
}

impl std::fmt::Display for SiteKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: u32,
    pub kind: SiteKind,
    pub position: Point,
    #[serde(default)]
    pub weight: f64,
}

impl SiteRecord {
    pub fn new(id: u32, kind: SiteKind, x: f64, y: f64, weight: f64) -> Self {
        SiteRecord { id, kind, position: Point::new(x, y), weight }
    }
}

/// Structural checks that do not depend on general position.
pub(crate) fn check_records(sites: &[SiteRecord]) -> Result<SiteKind, KernelError> {
    let first = sites.first().ok_or(KernelError::Empty)?;
    let kind = first.kind;
    let mut ids = HashSet::new();
    for s in sites {
        if s.kind != kind {
            return Err(KernelError::MixedBackends(kind.to_string(), s.kind.to_string()));
        }
        if !ids.insert(s.id) {
            return Err(KernelError::DuplicateId(s.id));
        }
        if !s.position.is_finite() || !s.weight.is_finite() {
            return Err(KernelError::Parse(format!("site {} has non-finite coordinates", s.id)));
        }
        if kind != SiteKind::EuclideanPoint && s.weight < 0.0 {
            return Err(KernelError::NegativeWeight(s.id));
        }
    }
    // Enclosure needs the centers within the largest radius, so a sweep in x
    // only compares nearby pairs.
    let radius = |s: &SiteRecord| match kind {
        SiteKind::EuclideanPoint => 0.0,
        SiteKind::PowerCircle => s.weight.sqrt(),
        SiteKind::ApolloniusPoint => s.weight,
    };
    let reach = sites.iter().map(radius).fold(0.0, f64::max);
    let mut order: Vec<&SiteRecord> = sites.iter().collect();
    order.sort_by(|a, b| a.position.x.total_cmp(&b.position.x));
    for (i, a) in order.iter().enumerate() {
        for b in order[i + 1..].iter().take_while(|b| b.position.x - a.position.x <= reach) {
            let d = a.position.dist(b.position);
            if d == 0.0 {
                return Err(KernelError::IdenticalSites(a.id, b.id));
            }
            if kind != SiteKind::EuclideanPoint && d <= (radius(a) - radius(b)).abs() {
                return Err(KernelError::EnclosingCircles(a.id, b.id));
            }
        }
    }
    Ok(kind)
}

pub fn read_sites_json<R: Read>(r: R) -> Result<Vec<SiteRecord>, KernelError> {
    serde_json::from_reader(r).map_err(|e| KernelError::Parse(e.to_string()))
}

pub fn write_sites_json<W: Write>(w: W, sites: &[SiteRecord]) -> Result<(), KernelError> {
    serde_json::to_writer_pretty(w, sites).map_err(|e| KernelError::Parse(e.to_string()))
}

#[derive(Deserialize, Serialize)]
struct CsvRow {
    id: u32,
    kind: String,
    x: f64,
    y: f64,
    #[serde(default)]
    weight: Option<f64>,
}

/// CSV with header `id,kind,x,y,weight`; the weight column may be empty.
pub fn read_sites_csv<R: Read>(r: R) -> Result<Vec<SiteRecord>, KernelError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let row = row.map_err(|e| KernelError::Parse(e.to_string()))?;
        let kind = SiteKind::parse(&row.kind)?;
        out.push(SiteRecord::new(row.id, kind, row.x, row.y, row.weight.unwrap_or(0.0)));
    }
    Ok(out)
}

pub fn write_sites_csv<W: Write>(w: W, sites: &[SiteRecord]) -> Result<(), KernelError> {
    let mut wtr = csv::Writer::from_writer(w);
    for s in sites {
        wtr.serialize(CsvRow {
            id: s.id,
            kind: s.kind.name().to_string(),
            x: s.position.x,
            y: s.position.y,
            weight: Some(s.weight),
        })
        .map_err(|e| KernelError::Parse(e.to_string()))?;
    }
    wtr.flush().map_err(|e| KernelError::Parse(e.to_string()))
}

/// Reads a site file, choosing the format by extension (`.csv` or JSON).
pub fn read_sites(path: &Path) -> Result<Vec<SiteRecord>, KernelError> {
    let f = std::fs::File::open(path).map_err(|e| KernelError::Parse(format!("{}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_sites_csv(f),
        _ => read_sites_json(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let sites = vec![
            SiteRecord::new(3, SiteKind::ApolloniusPoint, 0.5, -1.0, 0.1),
            SiteRecord::new(7, SiteKind::ApolloniusPoint, 2.0, 1.0, 0.0),
        ];
        let mut buf = Vec::new();
        write_sites_csv(&mut buf, &sites).unwrap();
        assert_eq!(read_sites_csv(&buf[..]).unwrap(), sites);
    }

    #[test]
    fn json_accepts_short_kind_names() {
        let src = r#"[{"id":1,"kind":"power","position":{"x":0,"y":0},"weight":0.5}]"#;
        let s = read_sites_json(src.as_bytes()).unwrap();
        assert_eq!(s[0].kind, SiteKind::PowerCircle);
    }

    #[test]
    fn rejects_enclosing_apollonius_sites() {
        let sites = vec![
            SiteRecord::new(1, SiteKind::ApolloniusPoint, 0.0, 0.0, 1.0),
            SiteRecord::new(2, SiteKind::ApolloniusPoint, 0.5, 0.0, 0.1),
        ];
        assert_eq!(check_records(&sites), Err(KernelError::EnclosingCircles(1, 2)));
    }

    #[test]
    fn rejects_coincident_sites() {
        let sites = vec![
            SiteRecord::new(1, SiteKind::EuclideanPoint, 1.0, 1.0, 0.0),
            SiteRecord::new(2, SiteKind::EuclideanPoint, 1.0, 1.0, 0.0),
        ];
        assert_eq!(check_records(&sites), Err(KernelError::IdenticalSites(1, 2)));
    }
}
