//! Load series ingestion, min-max scaling, lag windowing and chronological
//! splitting.

use std::fs;
use std::path::Path;
use std::time::Duration;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sampling interval of the reference load data.
pub const DEFAULT_INTERVAL: Duration = Duration::from_secs(15 * 60);

/// A uniformly sampled load sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    sample_interval: Duration,
    origin_timestamp: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, sample_interval: Duration) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("time series must be non-empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite value at index {i}")));
        }
        if sample_interval.is_zero() {
            return Err(Error::Config("sample interval must be positive".into()));
        }
        Ok(Self {
            values,
            sample_interval,
            origin_timestamp: None,
        })
    }

    /// Series at the default 15 minute interval.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, DEFAULT_INTERVAL)
    }

    pub fn with_origin(mut self, timestamp: impl Into<String>) -> Self {
        self.origin_timestamp = Some(timestamp.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_interval(&self) -> Duration {
        self.sample_interval
    }

    pub fn origin_timestamp(&self) -> Option<&str> {
        self.origin_timestamp.as_deref()
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            sample_interval: self.sample_interval,
            origin_timestamp: self.origin_timestamp.clone(),
        }
    }
}

/// Which CSV column holds the load values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
    /// The last column of each row (the value in `timestamp,value` files).
    Last,
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) if s == "last" => Column::Last,
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::Index(i) => write!(f, "{i}"),
            Column::Name(n) => f.write_str(n),
            Column::Last => f.write_str("last"),
        }
    }
}

/// Reads one column of a comma-separated file into a [`TimeSeries`].
///
/// A header is assumed when the selected cell of the first line does not
/// parse as a number. Data rows are numbered from 1 in error messages. When
/// the file has more than one column, the first cell of the first data row
/// is kept as the origin timestamp.
pub fn load_csv(path: impl AsRef<Path>, column: &Column) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, column)
}

pub(crate) fn parse_csv(text: &str, column: &Column) -> Result<TimeSeries> {
    let mut lines = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .peekable();

    let Some(first) = lines.peek().copied() else {
        return Err(Error::EmptyColumn(format!("{column:?}")));
    };
    let first_cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let index = match column {
        Column::Index(i) => *i,
        Column::Last => first_cells.len() - 1,
        Column::Name(name) => first_cells
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("no column named {name:?}")))?,
    };
    let has_header = matches!(column, Column::Name(_))
        || first_cells
            .get(index)
            .is_none_or(|c| c.parse::<f64>().is_err());
    if has_header {
        lines.next();
    }

    let mut values = Vec::new();
    let mut origin = None;
    for (n, line) in lines.enumerate() {
        let row = n + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let cell = cells.get(index).copied().unwrap_or("");
        let value = cell
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                row,
                cell: cell.to_string(),
            })?;
        if row == 1 && cells.len() > 1 && index != 0 {
            origin = Some(cells[0].to_string());
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::EmptyColumn(format!("{column:?}")));
    }
    let series = TimeSeries::from_values(values)?;
    Ok(match origin {
        Some(ts) => series.with_origin(ts),
        None => series,
    })
}

/// Observed range used for min-max scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub min: f64,
    pub max: f64,
}

impl ScalingParams {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(max > min) {
            return Err(Error::DegenerateScale { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn fit(values: &[f64]) -> Result<Self> {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(min, max)
    }

    #[inline]
    pub fn scale(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn unscale(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}

pub fn minmax_fit(series: &TimeSeries) -> Result<ScalingParams> {
    ScalingParams::fit(series.values())
}

pub fn minmax_apply(series: &TimeSeries, params: &ScalingParams) -> TimeSeries {
    series.map(|v| params.scale(v))
}

pub fn minmax_invert(series: &TimeSeries, params: &ScalingParams) -> TimeSeries {
    series.map(|v| params.unscale(v))
}

/// Lag-window feature matrix with one-step-ahead (or `horizon`-ahead)
/// targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedDataset {
    /// N×d, row i holds series values `[origin + i, origin + i + d)`.
    pub features: DMatrix<f64>,
    pub targets: Vec<f64>,
    pub lag_count: usize,
    pub horizon: usize,
    /// Series position of the first window's first lag.
    pub origin: usize,
}

impl SupervisedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Series position of `targets[row]`.
    pub fn target_position(&self, row: usize) -> usize {
        self.origin + row + self.lag_count + self.horizon - 1
    }

    /// Sub-dataset of consecutive rows.
    pub fn rows(&self, range: std::ops::Range<usize>) -> Self {
        let n = range.len();
        Self {
            features: self.features.rows(range.start, n).into_owned(),
            targets: self.targets[range.clone()].to_vec(),
            lag_count: self.lag_count,
            horizon: self.horizon,
            origin: self.origin + range.start,
        }
    }
}

pub fn make_lag_dataset(
    series: &TimeSeries,
    lag_count: usize,
    horizon: usize,
) -> Result<SupervisedDataset> {
    lag_windows(series.values(), lag_count, horizon)
}

/// Windowing over a raw slice; see [`make_lag_dataset`].
pub fn lag_windows(values: &[f64], lag_count: usize, horizon: usize) -> Result<SupervisedDataset> {
    if lag_count == 0 || horizon == 0 {
        return Err(Error::Config("lag_count and horizon must be at least 1".into()));
    }
    let needed = lag_count + horizon - 1;
    if values.len() <= needed {
        return Err(Error::TooShort {
            needed,
            got: values.len(),
        });
    }
    let n = values.len() - needed;
    let features = DMatrix::from_fn(n, lag_count, |i, j| values[i + j]);
    let targets = (0..n).map(|i| values[i + needed]).collect();
    Ok(SupervisedDataset {
        features,
        targets,
        lag_count,
        horizon,
        origin: 0,
    })
}

/// Fraction of rows assigned to the training partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(Self { train_fraction })
    }

    /// Number of training rows out of `n`; both partitions non-empty.
    pub fn split_index(&self, n: usize) -> Result<usize> {
        let k = (self.train_fraction * n as f64).floor() as usize;
        if k == 0 || k >= n {
            return Err(Error::Config(format!(
                "train_fraction {} leaves an empty partition of {n} rows",
                self.train_fraction
            )));
        }
        Ok(k)
    }
}

pub fn chrono_split(
    dataset: &SupervisedDataset,
    spec: &SplitSpec,
) -> Result<(SupervisedDataset, SupervisedDataset)> {
    let n = dataset.len();
    let k = spec.split_index(n)?;
    Ok((dataset.rows(0..k), dataset.rows(k..n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn csv_bare_column() {
        let s = parse_csv("1.0\n2.0\n3.0", &Column::Index(0)).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_header_is_skipped() {
        let s = parse_csv("load\n5.5\n", &Column::Index(0)).unwrap();
        assert_eq!(s.values(), &[5.5]);
        let s = parse_csv("load\n5.5\n", &Column::Name("load".into())).unwrap();
        assert_eq!(s.values(), &[5.5]);
    }

    #[test]
    fn csv_bad_cell_names_row() {
        match parse_csv("load\nabc\n", &Column::Index(0)) {
            Err(Error::Parse { row, cell }) => {
                assert_eq!(row, 1);
                assert_eq!(cell, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_csv("1\n2\nx\n", &Column::Index(0)),
            Err(Error::Parse { row: 3, .. })
        ));
    }

    #[test]
    fn csv_timestamp_value() {
        let s = parse_csv(
            "time,load\n2019-10-01 00:00,10.5\n2019-10-01 00:15,11\n",
            &Column::Last,
        )
        .unwrap();
        assert_eq!(s.values(), &[10.5, 11.0]);
        assert_eq!(s.origin_timestamp(), Some("2019-10-01 00:00"));
    }

    #[test]
    fn csv_empty_column() {
        assert!(matches!(
            parse_csv("load\n", &Column::Index(0)),
            Err(Error::EmptyColumn(_))
        ));
        assert!(matches!(parse_csv("", &Column::Index(0)), Err(Error::EmptyColumn(_))));
    }

    #[test]
    fn csv_missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/load.csv", &Column::Index(0)),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn minmax_examples() {
        let p = minmax_fit(&ts(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(p, ScalingParams { min: 2.0, max: 6.0 });
        let p2 = minmax_fit(&ts(&[-1.0, 1.0])).unwrap();
        assert_eq!((p2.min, p2.max), (-1.0, 1.0));
        assert!(matches!(
            minmax_fit(&ts(&[5.0, 5.0, 5.0])),
            Err(Error::DegenerateScale { .. })
        ));
        assert_eq!(minmax_apply(&ts(&[2.0, 4.0, 6.0]), &p).values(), &[0.0, 0.5, 1.0]);
        assert_eq!(minmax_invert(&ts(&[0.5]), &p).values(), &[4.0]);
    }

    #[test]
    fn minmax_round_trip_random() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, 0);
        let v: Vec<f64> = (0..1000).map(|_| rng.random_range(-1e3..1e3)).collect();
        let s = ts(&v);
        let p = minmax_fit(&s).unwrap();
        let back = minmax_invert(&minmax_apply(&s, &p), &p);
        let err = v
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "max abs error {err}");
    }

    #[test]
    fn lag_examples() {
        let d = make_lag_dataset(&ts(&[1.0, 2.0, 3.0, 4.0]), 2, 1).unwrap();
        assert_eq!(d.features, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
        assert_eq!(d.targets, vec![3.0, 4.0]);

        let long = ts(&vec![1.0; 1096]);
        assert_eq!(make_lag_dataset(&long, 7, 1).unwrap().len(), 1089);

        assert!(matches!(
            make_lag_dataset(&ts(&[1.0, 2.0]), 2, 1),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn horizon_offsets_target() {
        let d = make_lag_dataset(&ts(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2, 2).unwrap();
        assert_eq!(d.targets, vec![4.0, 5.0]);
        assert_eq!(d.target_position(0), 3);
    }

    #[test]
    fn split_examples() {
        let d = make_lag_dataset(&ts(&[1.0, 2.0, 3.0, 4.0, 5.0]), 1, 1).unwrap();
        assert_eq!(d.len(), 4);
        let (tr, te) = chrono_split(&d, &SplitSpec::new(0.75).unwrap()).unwrap();
        assert_eq!(tr.targets, vec![2.0, 3.0, 4.0]);
        assert_eq!(te.targets, vec![5.0]);
        assert_eq!(te.origin, 3);

        let (tr, te) = chrono_split(&d, &SplitSpec::new(0.999).unwrap()).unwrap();
        assert_eq!((tr.len(), te.len()), (3, 1));

        let big = make_lag_dataset(&ts(&vec![1.0; 1096]), 7, 1).unwrap();
        let (tr, te) = chrono_split(&big, &SplitSpec::new(0.75).unwrap()).unwrap();
        assert_eq!((tr.len(), te.len()), (816, 273));

        assert!(chrono_split(&d, &SplitSpec::new(0.1).unwrap()).is_err());
        assert!(SplitSpec::new(1.0).is_err());
    }

    proptest! {
        #[test]
        fn windowing_preserves_content(v in prop::collection::vec(-1e6f64..1e6, 3..200), d in 1usize..8) {
            prop_assume!(v.len() > d);
            let ds = lag_windows(&v, d, 1).unwrap();
            prop_assert_eq!(&ds.targets[..], &v[d..]);
            for i in 0..ds.len() {
                for j in 0..d {
                    prop_assert_eq!(ds.features[(i, j)], v[i + j]);
                }
            }
        }

        #[test]
        fn split_has_no_gap_or_overlap(n in 2usize..500, f in 0.01f64..0.99) {
            let v: Vec<f64> = (0..n + 1).map(|i| i as f64).collect();
            let ds = lag_windows(&v, 1, 1).unwrap();
            if let Ok((tr, te)) = chrono_split(&ds, &SplitSpec::new(f).unwrap()) {
                prop_assert_eq!(tr.len() + te.len(), n);
                prop_assert_eq!(tr.origin + tr.len(), te.origin);
                let mut joined = tr.targets.clone();
                joined.extend(&te.targets);
                prop_assert_eq!(joined, ds.targets);
            }
        }

        #[test]
        fn scaling_round_trip(min in -1e6f64..1e6, span in 1e-3f64..1e6, x in -1e7f64..1e7) {
            let p = ScalingParams::new(min, min + span).unwrap();
            let back = p.unscale(p.scale(x));
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(min.abs() + span).max(1.0));
        }
    }
}
