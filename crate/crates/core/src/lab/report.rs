use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{LabError, Result};

/// The test a row's `measured` value is put to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Check {
    AtMost {
        tol: f64,
    },
    AtLeast {
        bound: f64,
    },
    /// Strictly above zero.
    Positive,
    Within {
        low: f64,
        high: f64,
    },
}

impl Check {
    pub fn passes(&self, x: f64) -> bool {
        match *self {
            Check::AtMost { tol } => x <= tol,
            Check::AtLeast { bound } => x >= bound,
            Check::Positive => x > 0.0,
            Check::Within { low, high } => (low..=high).contains(&x),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::AtMost { tol } => write!(f, "<= {tol:e}"),
            Check::AtLeast { bound } => write!(f, ">= {bound:e}"),
            Check::Positive => write!(f, "> 0"),
            Check::Within { low, high } => write!(f, "in [{low}, {high}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: String,
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    /// The computed quantity itself, e.g. an area. NaN when the case failed.
    #[serde(with = "nan_as_null")]
    pub value: f64,
    /// What the check is applied to, e.g. `|area − πk|`.
    #[serde(with = "nan_as_null")]
    pub measured: f64,
    pub check: Check,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
    pub pass: bool,
    /// Why a case could not be computed; such rows fail.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// JSON has no NaN; failed rows store `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl ReportRow {
    pub fn new(case: impl Into<String>, quantity: impl Into<String>, value: f64, measured: f64, check: Check) -> Self {
        ReportRow {
            case: case.into(),
            quantity: quantity.into(),
            lambda: None,
            value,
            measured,
            check,
            residual: None,
            iterations: None,
            pass: check.passes(measured),
            error: None,
        }
    }

    /// A failed row for a case that could not be computed.
    pub fn failed(case: impl Into<String>, quantity: impl Into<String>, check: Check, why: impl fmt::Display) -> Self {
        let mut r = ReportRow::new(case, quantity, f64::NAN, f64::NAN, check);
        r.pass = false;
        r.error = Some(why.to_string());
        r
    }

    pub fn at_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_solve(mut self, residual: f64, iterations: usize) -> Self {
        self.residual = Some(residual);
        self.iterations = Some(iterations);
        self
    }
}

/// A sampled curve kept for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub case: String,
    pub x_label: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub series: Vec<Series>,
    pub verdict: bool,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    case: &'a str,
    quantity: &'a str,
    lambda: Option<f64>,
    value: f64,
    measured: f64,
    check: String,
    residual: Option<f64>,
    iterations: Option<usize>,
    pass: bool,
    error: Option<&'a str>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, rows: Vec<ReportRow>, series: Vec<Series>) -> Self {
        let verdict = !rows.is_empty() && rows.iter().all(|r| r.pass);
        ExperimentReport { config, rows, series, verdict }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("report: {e}")))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                case: &r.case,
                quantity: &r.quantity,
                lambda: r.lambda,
                value: r.value,
                measured: r.measured,
                check: r.check.to_string(),
                residual: r.residual,
                iterations: r.iterations,
                pass: r.pass,
                error: r.error.as_deref(),
            })
            .map_err(|e| LabError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<[PathBuf; 2]> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join("report.json");
        let csv = dir.join("report.csv");
        std::fs::write(&json, self.to_json())?;
        std::fs::write(&csv, self.to_csv()?)?;
        Ok([json, csv])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotSeries {
    /// Area rows against λ.
    AreaVsLambda,
    /// `t`-integrated area density against `s`.
    DensityVsS,
}

impl PlotSeries {
    pub fn name(self) -> &'static str {
        match self {
            PlotSeries::AreaVsLambda => "area-vs-lambda",
            PlotSeries::DensityVsS => "density-vs-s",
        }
    }
}

impl FromStr for PlotSeries {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "area-vs-lambda" => Ok(PlotSeries::AreaVsLambda),
            "density-vs-s" => Ok(PlotSeries::DensityVsS),
            _ => Err(LabError::UnknownSeries(s.to_string())),
        }
    }
}

/// Tab-separated `case  x  value` lines with a header, for external plotting.
pub fn emit_plot_data(report: &ExperimentReport, what: PlotSeries) -> Result<String> {
    if report.rows.is_empty() {
        return Err(LabError::EmptyReport);
    }
    let mut out = String::new();
    match what {
        PlotSeries::AreaVsLambda => {
            out.push_str("case\tlambda\tarea\n");
            let rows: Vec<&ReportRow> =
                report.rows.iter().filter(|r| r.quantity == "area" && r.lambda.is_some()).collect();
            if rows.is_empty() {
                return Err(LabError::UnknownSeries(format!("{} (no λ-tagged area rows)", what.name())));
            }
            for r in rows {
                out.push_str(&format!("{}\t{:?}\t{:?}\n", r.case, r.lambda.unwrap(), r.value));
            }
        }
        PlotSeries::DensityVsS => {
            let series: Vec<&Series> = report.series.iter().filter(|s| s.name == what.name()).collect();
            if series.is_empty() {
                return Err(LabError::UnknownSeries(format!("{} (not in this report)", what.name())));
            }
            out.push_str("case\ts\tdensity\n");
            for s in series {
                for [x, y] in &s.points {
                    out.push_str(&format!("{}\t{x:?}\t{y:?}\n", s.case));
                }
            }
        }
    }
    Ok(out)
}
