use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGION_HEADER: [&str; 3] = ["region", "value", "area_km2"];

/// One value per region, with an optional area for density conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSeries {
    regions: Vec<String>,
    values: Vec<f64>,
    areas: Vec<Option<f64>>,
}

impl RegionSeries {
    pub fn new(regions: Vec<String>, values: Vec<f64>, areas: Option<Vec<f64>>) -> Result<Self> {
        let areas = match areas {
            Some(a) => a.into_iter().map(Some).collect(),
            None => vec![None; regions.len()],
        };
        Self::from_parts(regions, values, areas)
    }

    fn from_parts(regions: Vec<String>, values: Vec<f64>, areas: Vec<Option<f64>>) -> Result<Self> {
        if regions.len() != values.len() {
            return Err(Error::LengthMismatch(regions.len(), values.len()));
        }
        if regions.len() != areas.len() {
            return Err(Error::LengthMismatch(regions.len(), areas.len()));
        }
        let mut seen = HashSet::new();
        for r in &regions {
            if !seen.insert(r.as_str()) {
                return Err(Error::RegionMismatch(format!("duplicate region {r}")));
            }
        }
        Ok(Self {
            regions,
            values,
            areas,
        })
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn areas(&self) -> &[Option<f64>] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Reorders this series to follow `order`, which must name exactly the
    /// same regions.
    pub fn reordered(&self, order: &[String]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .regions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        let missing: Vec<&str> = order
            .iter()
            .filter(|r| !index.contains_key(r.as_str()))
            .map(String::as_str)
            .collect();
        let order_set: HashSet<&str> = order.iter().map(String::as_str).collect();
        let extra: Vec<&str> = self
            .regions
            .iter()
            .filter(|r| !order_set.contains(r.as_str()))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() || !extra.is_empty() || order.len() != self.len() {
            return Err(Error::RegionMismatch(format!(
                "only in one series: [{}]",
                missing
                    .iter()
                    .chain(extra.iter())
                    .copied()
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        let pick = |i: &usize| (self.regions[*i].clone(), self.values[*i], self.areas[*i]);
        let (regions, rest): (Vec<_>, Vec<_>) = order
            .iter()
            .map(|r| pick(&index[r.as_str()]))
            .map(|(r, v, a)| (r, (v, a)))
            .unzip();
        let (values, areas) = rest.into_iter().unzip();
        Self::from_parts(regions, values, areas)
    }
}

/// Values divided by area; areas are cleared.
pub fn normalize_by_area(series: &RegionSeries) -> Result<RegionSeries> {
    let mut values = Vec::with_capacity(series.len());
    for ((region, value), area) in series.regions.iter().zip(&series.values).zip(&series.areas) {
        match area {
            None => return Err(Error::MissingArea(region.clone())),
            Some(a) if a.is_nan() || *a <= 0.0 => {
                return Err(Error::NonPositiveArea(region.clone()))
            }
            Some(a) => values.push(value / a),
        }
    }
    RegionSeries::from_parts(series.regions.clone(), values, vec![None; series.len()])
}

/// Aligns `b` to the region order of `a`, matching by name.
pub fn join_regions(a: &RegionSeries, b: &RegionSeries) -> Result<(RegionSeries, RegionSeries)> {
    Ok((a.clone(), b.reordered(&a.regions)?))
}

/// Sample Pearson correlation of two series over the same regions in the
/// same order.
pub fn pearson_r(a: &RegionSeries, b: &RegionSeries) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if let Some((x, y)) = a.regions.iter().zip(&b.regions).find(|(x, y)| x != y) {
        return Err(Error::RegionMismatch(format!("{x} vs {y}")));
    }
    pearson(&a.values, &b.values)
}

/// Two-pass Pearson correlation over raw slices.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::ConstantSeries);
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub pearson_r: f64,
    pub n_regions: usize,
}

/// Joins by region name, optionally converts both series to per-area
/// densities, and correlates.
pub fn correlate_regions(
    a: &RegionSeries,
    b: &RegionSeries,
    per_area: bool,
) -> Result<CorrelationSummary> {
    let (a, b) = join_regions(a, b)?;
    let (a, b) = if per_area {
        (normalize_by_area(&a)?, normalize_by_area(&b)?)
    } else {
        (a, b)
    };
    Ok(CorrelationSummary {
        pearson_r: pearson_r(&a, &b)?,
        n_regions: a.len(),
    })
}

pub fn load_region_csv(path: impl AsRef<Path>) -> Result<RegionSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_region_csv(file, &path.display().to_string())
}

/// Reads `region,value,area_km2`; the area field may be empty.
pub fn read_region_csv<R: Read>(reader: R, source: &str) -> Result<RegionSeries> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if headers.iter().ne(REGION_HEADER) {
        return Err(parse_err(
            1,
            format!("expected header `{}`", REGION_HEADER.join(",")),
        ));
    }
    let (mut regions, mut values, mut areas) = (Vec::new(), Vec::new(), Vec::new());
    for record in rdr.records() {
        let record =
            record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |field: &str, what: &str| -> Result<f64> {
            field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("{what} `{field}` is not a finite number")))
        };
        regions.push(record[0].trim().to_owned());
        values.push(number(&record[1], "value")?);
        areas.push(match record[2].trim() {
            "" => None,
            a => Some(number(a, "area_km2")?),
        });
    }
    RegionSeries::from_parts(regions, values, areas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(names: &[&str], values: &[f64]) -> RegionSeries {
        RegionSeries::new(
            names.iter().map(|s| (*s).to_owned()).collect(),
            values.to_vec(),
            None,
        )
        .unwrap()
    }

    fn abcd(values: &[f64]) -> RegionSeries {
        series(&["a", "b", "c", "d"], values)
    }

    /// Covariance over product of standard deviations, computed from
    /// closed-form sums rather than centred deviations.
    fn oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn hand_fixture() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 1.0, 4.0, 3.0];
        // centred: (-1.5,-0.5,0.5,1.5)·(-0.5,-1.5,1.5,0.5) = 3; both sums of squares 5.
        assert!((oracle(&x, &y) - 0.6).abs() <= 1e-12);
        let r = pearson_r(&abcd(&x), &abcd(&y)).unwrap();
        assert!((r - 0.6).abs() <= 1e-12, "{r}");
    }

    #[test]
    fn affine_extremes() {
        let x = [0.3, 1.7, 2.2, 9.1, 4.4];
        let names = ["a", "b", "c", "d", "e"];
        let up: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!(
            (pearson_r(&series(&names, &x), &series(&names, &up)).unwrap() - 1.0).abs() <= 1e-12
        );
        assert!(
            (pearson_r(&series(&names, &x), &series(&names, &down)).unwrap() + 1.0).abs() <= 1e-12
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            pearson_r(&abcd(&[1.0, 1.0, 1.0, 1.0]), &abcd(&[1.0, 2.0, 3.0, 4.0])),
            Err(Error::ConstantSeries)
        ));
        assert!(matches!(
            pearson_r(
                &series(&["a", "b"], &[1.0, 2.0]),
                &abcd(&[1.0, 2.0, 3.0, 4.0])
            ),
            Err(Error::LengthMismatch(2, 4))
        ));
        assert!(matches!(
            pearson_r(
                &series(&["a", "b"], &[1.0, 2.0]),
                &series(&["a", "c"], &[1.0, 2.0])
            ),
            Err(Error::RegionMismatch(_))
        ));
        assert!(matches!(
            pearson(&[1.0], &[2.0]),
            Err(Error::ConstantSeries)
        ));
        assert!(RegionSeries::new(vec!["a".into()], vec![], None).is_err());
    }

    #[test]
    fn area_normalization() {
        let s = RegionSeries::new(
            vec!["a".into(), "b".into()],
            vec![100.0, 50.0],
            Some(vec![10.0, 5.0]),
        )
        .unwrap();
        let n = normalize_by_area(&s).unwrap();
        assert_eq!(n.values(), &[10.0, 10.0]);
        assert!(n.areas().iter().all(Option::is_none));

        let unit = RegionSeries::new(
            vec!["a".into(), "b".into()],
            vec![3.5, 7.0],
            Some(vec![1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(normalize_by_area(&unit).unwrap().values(), unit.values());

        let zero = RegionSeries::new(vec!["a".into()], vec![1.0], Some(vec![0.0])).unwrap();
        assert!(matches!(
            normalize_by_area(&zero),
            Err(Error::NonPositiveArea(_))
        ));
        assert!(matches!(
            normalize_by_area(&series(&["a"], &[1.0])),
            Err(Error::MissingArea(_))
        ));
    }

    #[test]
    fn join_is_order_independent() {
        let a = abcd(&[1.0, 2.0, 3.0, 4.0]);
        let b = series(&["d", "b", "a", "c"], &[3.0, 1.0, 2.0, 4.0]);
        let summary = correlate_regions(&a, &b, false).unwrap();
        assert!((summary.pearson_r - 0.6).abs() <= 1e-12);
        assert_eq!(summary.n_regions, 4);
        let c = series(&["a", "b", "c", "x"], &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            correlate_regions(&a, &c, false),
            Err(Error::RegionMismatch(_))
        ));
    }

    #[test]
    fn reads_region_csv() {
        let csv = "region,value,area_km2\nBerlin,100,891.8\nBremen,20,\n";
        let s = read_region_csv(csv.as_bytes(), "mem").unwrap();
        assert_eq!(s.regions(), &["Berlin", "Bremen"]);
        assert_eq!(s.areas(), &[Some(891.8), None]);
        assert!(matches!(
            read_region_csv("region,value,area_km2\nX,abc,1\n".as_bytes(), "mem"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_region_csv("region,value,area_km2\nX,1,1\nX,2,1\n".as_bytes(), "mem"),
            Err(Error::RegionMismatch(_))
        ));
    }
}
