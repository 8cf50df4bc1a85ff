//! Probe temperature series, CSV I/O and RMSE comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Matching tolerance for time stamps, s.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub id: String,
    times: Vec<f64>,
    temperatures: Vec<f64>,
}

impl ProbeSeries {
    pub fn new(id: impl Into<String>, times: Vec<f64>, temperatures: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if times.len() != temperatures.len() {
            return Err(Error::Series(format!(
                "{id}: {} times but {} temperatures",
                times.len(),
                temperatures.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Series(format!(
                "{id}: times not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(ProbeSeries {
            id,
            times,
            temperatures,
        })
    }

    pub(crate) fn empty(id: impl Into<String>) -> Self {
        ProbeSeries {
            id: id.into(),
            times: Vec::new(),
            temperatures: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, temperature: f64) {
        debug_assert!(self.times.last().is_none_or(|&l| t > l));
        self.times.push(t);
        self.temperatures.push(temperature);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest temperature and its time.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.temperatures)
            .fold(None, |best, (&t, &u)| match best {
                Some((_, bu)) if bu >= u => best,
                _ => Some((t, u)),
            })
    }

    /// Linear interpolation at `t`; `None` outside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        if t < first - TIME_EPS || t > last + TIME_EPS {
            return None;
        }
        let i = self.times.partition_point(|&x| x < t);
        if i < self.times.len() && (self.times[i] - t).abs() <= TIME_EPS {
            return Some(self.temperatures[i]);
        }
        if i == 0 {
            return Some(self.temperatures[0]);
        }
        if i == self.times.len() {
            return Some(self.temperatures[i - 1]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (u0, u1) = (self.temperatures[i - 1], self.temperatures[i]);
        Some(u0 + (u1 - u0) * (t - t0) / (t1 - t0))
    }
}

/// Resamples `series` onto the subset of `times` inside its range.
pub fn resample(series: &ProbeSeries, times: &[f64]) -> Result<ProbeSeries> {
    let (t, u): (Vec<f64>, Vec<f64>) = times
        .iter()
        .filter_map(|&t| series.value_at(t).map(|u| (t, u)))
        .unzip();
    if t.is_empty() {
        return Err(Error::Series(format!(
            "{}: no overlap with the requested time range",
            series.id
        )));
    }
    ProbeSeries::new(series.id.clone(), t, u)
}

/// Root-mean-square temperature difference on a shared time grid.
pub fn rmse(a: &ProbeSeries, b: &ProbeSeries) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Series("cannot compare an empty series".into()));
    }
    if a.len() != b.len()
        || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > TIME_EPS * x.abs().max(1.0))
    {
        return Err(Error::Series(format!(
            "{} and {} have different time grids; resample first",
            a.id, b.id
        )));
    }
    let sum: f64 = a
        .temperatures
        .iter()
        .zip(&b.temperatures)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// RMSE of `reference` against `simulated` after resampling the simulated
/// series onto the reference times that both cover.
pub fn rmse_resampled(simulated: &ProbeSeries, reference: &ProbeSeries) -> Result<f64> {
    let lo = simulated.times.first().copied().unwrap_or(f64::NAN);
    let hi = simulated.times.last().copied().unwrap_or(f64::NAN);
    let times: Vec<f64> = reference
        .times
        .iter()
        .copied()
        .filter(|&t| t >= lo - TIME_EPS && t <= hi + TIME_EPS)
        .collect();
    if times.is_empty() {
        return Err(Error::Series(format!(
            "{} and {} do not overlap in time",
            simulated.id, reference.id
        )));
    }
    let a = resample(simulated, &times)?;
    let b = resample(reference, &times)?;
    rmse(&a, &b)
}

pub fn csv_string(series: &[ProbeSeries]) -> Result<String> {
    let Some(first) = series.first() else {
        return Err(Error::Series("no probe series to write".into()));
    };
    if series.iter().any(|s| s.times != first.times) {
        return Err(Error::Series("probe series must share one time grid".into()));
    }
    let mut out = String::from("time_s");
    for s in series {
        write!(out, ",{}_C", s.id).unwrap();
    }
    out.push('\n');
    for (i, t) in first.times.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for s in series {
            write!(out, ",{}", s.temperatures[i]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(path: &Path, series: &[ProbeSeries]) -> Result<()> {
    let text = csv_string(series)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a `time_s,<id>_C,...` file. Column ids drop the `_C` suffix.
pub fn parse_csv(text: &str) -> Result<Vec<ProbeSeries>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Series("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 {
        return Err(Error::Series("CSV needs a time column and at least one probe".into()));
    }
    let ids: Vec<String> = cols[1..]
        .iter()
        .map(|c| c.strip_suffix("_C").unwrap_or(c).to_string())
        .collect();
    let mut times = Vec::new();
    let mut temps = vec![Vec::new(); ids.len()];
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::Series(format!(
                "row {} has {} fields, header has {}",
                lineno + 2,
                fields.len(),
                cols.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Series(format!("row {}: `{s}` is not a number", lineno + 2)))
        };
        times.push(parse(fields[0])?);
        for (c, f) in fields[1..].iter().enumerate() {
            temps[c].push(parse(f)?);
        }
    }
    ids.into_iter()
        .zip(temps)
        .map(|(id, u)| ProbeSeries::new(id, times.clone(), u))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ProbeSeries>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Pairs probe columns by id (by position when ids differ) and reports
/// the RMSE of each pair.
pub fn compare(a: &[ProbeSeries], b: &[ProbeSeries]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, sa) in a.iter().enumerate() {
        let sb = b.iter().find(|s| s.id == sa.id).or_else(|| b.get(i));
        if let Some(sb) = sb {
            out.push((sa.id.clone(), rmse_resampled(sa, sb)?));
        }
    }
    if out.is_empty() {
        return Err(Error::Series("no probe columns in common".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(id: &str, offset: f64) -> ProbeSeries {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let u = t.iter().map(|t| 24.0 + t * t + offset).collect();
        ProbeSeries::new(id, t, u).unwrap()
    }

    #[test]
    fn rmse_basics() {
        let a = series("p", 0.0);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = series("p", 2.0);
        assert!((rmse(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        assert!(rmse(&a, &ProbeSeries::empty("e")).is_err());
    }

    #[test]
    fn grid_checks() {
        assert!(ProbeSeries::new("x", vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(ProbeSeries::new("x", vec![0.0], vec![1.0, 2.0]).is_err());
        let a = series("a", 0.0);
        let shifted = ProbeSeries::new("b", vec![10.0, 11.0], vec![1.0, 1.0]).unwrap();
        assert!(rmse(&a, &shifted).is_err());
        assert!(rmse_resampled(&a, &shifted).is_err());
    }

    #[test]
    fn resampling_linear() {
        let a = ProbeSeries::new("a", vec![0.0, 1.0, 2.0], vec![0.0, 10.0, 30.0]).unwrap();
        let r = resample(&a, &[0.5, 1.5, 3.0]).unwrap();
        assert_eq!(r.times(), &[0.5, 1.5]);
        assert_eq!(r.temperatures(), &[5.0, 20.0]);
        let fine = ProbeSeries::new("b", vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![1.0, 6.0, 11.0, 21.0, 31.0]).unwrap();
        assert!((rmse_resampled(&fine, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_and_compare() {
        let a = series("probe0", 0.0);
        let b = series("probe1", 1.0);
        let text = csv_string(&[a.clone(), b.clone()]).unwrap();
        assert!(text.starts_with("time_s,probe0_C,probe1_C\n"));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, vec![a.clone(), b.clone()]);
        let cmp = compare(&[a.clone(), b.clone()], &[b.clone(), a.clone()]).unwrap();
        assert_eq!(cmp[0], ("probe0".into(), 0.0));
        assert!(parse_csv("time_s,p_C\n0,1,2\n").is_err());
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn peak() {
        let s = ProbeSeries::new("p", vec![0.0, 1.0, 2.0], vec![1.0, 5.0, 3.0]).unwrap();
        assert_eq!(s.peak(), Some((1.0, 5.0)));
    }

    proptest! {
        #[test]
        fn csv_preserves_values(vals in prop::collection::vec(-1e6f64..1e6, 1..40)) {
            let t: Vec<f64> = (0..vals.len()).map(|i| i as f64 * 0.05).collect();
            let s = ProbeSeries::new("probe0", t, vals).unwrap();
            let back = parse_csv(&csv_string(std::slice::from_ref(&s)).unwrap()).unwrap();
            prop_assert_eq!(&back[0], &s);
        }

        #[test]
        fn constant_offset_rmse(vals in prop::collection::vec(-100f64..100.0, 1..40), off in -10f64..10.0) {
            let t: Vec<f64> = (0..vals.len()).map(|i| i as f64).collect();
            let a = ProbeSeries::new("a", t.clone(), vals.clone()).unwrap();
            let b = ProbeSeries::new("b", t, vals.iter().map(|v| v + off).collect()).unwrap();
            prop_assert!((rmse(&a, &b).unwrap() - off.abs()).abs() < 1e-9);
        }
    }
}
