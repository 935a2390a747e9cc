//! Implied-volatility curves over a strike grid, one CSV per swept value.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pbs_core::implied_vol::{mid_curve_shape, strike_grid, vol_curve, ImpliedVolConfig, VolCurvePoint};

use crate::error::CliError;
use crate::params::{parse_number, Params};

pub const COLUMNS: &str = "strike,moneyness,bs_price,mid,bid,ask,spread,iv_mid,iv_bid,iv_ask";

/// Parameter varied across curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    BiasCoeff,
    VarCoeff,
    Epsilon,
    Maturity,
    Mu,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::BiasCoeff => "bias-coeff",
            SweepVar::VarCoeff => "var-coeff",
            SweepVar::Epsilon => "epsilon",
            SweepVar::Maturity => "maturity",
            SweepVar::Mu => "mu",
        }
    }

    fn apply(self, params: &Params, value: f64) -> Params {
        let mut p = params.clone();
        match self {
            SweepVar::BiasCoeff => p.bias_coeff = value,
            SweepVar::VarCoeff => p.var_coeff = value,
            SweepVar::Epsilon => p.epsilon = value,
            SweepVar::Maturity => p.maturity = value,
            SweepVar::Mu => p.mu = value,
        }
        p
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('_', "-").as_str() {
            "bias-coeff" => Ok(SweepVar::BiasCoeff),
            "var-coeff" => Ok(SweepVar::VarCoeff),
            "epsilon" => Ok(SweepVar::Epsilon),
            "maturity" => Ok(SweepVar::Maturity),
            "mu" => Ok(SweepVar::Mu),
            other => Err(format!(
                "unknown sweep variable '{other}' (expected bias-coeff, var-coeff, epsilon, maturity or mu)"
            )),
        }
    }
}

/// `var=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec, String> {
    let (var, values) = text
        .split_once('=')
        .ok_or_else(|| format!("sweep '{text}' must be VAR=V1,V2,..."))?;
    let var = var.parse()?;
    let values = values
        .split(',')
        .map(parse_number)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    Ok(SweepSpec { var, values })
}

/// Shape statistics of one written curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub label: String,
    pub file: PathBuf,
    pub argmin_strike: Option<f64>,
    pub min_iv: Option<f64>,
    pub range: Option<f64>,
    pub depth: Option<f64>,
    pub absent_bids: usize,
    pub warnings: usize,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn render_csv(params: &Params, label: &str, curve: &[VolCurvePoint<f64>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# pbs {} {label} {}", env!("CARGO_PKG_VERSION"), params.echo());
    let _ = writeln!(out, "{COLUMNS}");
    for p in curve {
        let q = &p.quote;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.strike,
            p.moneyness,
            q.bs_premium,
            q.mid,
            q.bid,
            q.ask,
            q.spread,
            cell(p.iv_mid),
            cell(p.iv_bid),
            cell(p.iv_ask)
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn curve(params: &Params) -> Result<Vec<VolCurvePoint<f64>>, CliError> {
    let (min, max, count) = params.strikes;
    let strikes = strike_grid(min, max, count)?;
    Ok(vol_curve(
        &params.spec()?,
        &params.error_structure()?,
        &params.quote_config()?,
        &strikes,
        &ImpliedVolConfig::default(),
    )?)
}

/// Writes one CSV per swept value (a single `curve.csv` without a sweep),
/// plus `summary.csv` and, when requested, a gnuplot script.
pub fn run(params: &Params, sweep: Option<&SweepSpec>, out: &Path, plot: bool) -> Result<Vec<CurveSummary>, CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;

    let runs: Vec<(String, String, Params)> = match sweep {
        Some(s) => s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                (
                    format!("{}={v}", s.var.name()),
                    format!("{}_{i:02}.csv", s.var.name()),
                    s.var.apply(params, v),
                )
            })
            .collect(),
        None => vec![("curve".to_string(), "curve.csv".to_string(), params.clone())],
    };

    let mut summaries = Vec::with_capacity(runs.len());
    for (label, file, p) in runs {
        p.validate()
            .map_err(|e| CliError::Usage(format!("sweep value {label}: {e}")))?;
        let points = curve(&p)?;
        let path = out.join(&file);
        write_file(&path, &render_csv(&p, &label, &points))?;
        let shape = mid_curve_shape(&points);
        summaries.push(CurveSummary {
            label,
            file: path,
            argmin_strike: shape.map(|s| s.argmin_strike),
            min_iv: shape.map(|s| s.min_iv),
            range: shape.map(|s| s.range),
            depth: shape.map(|s| s.depth),
            absent_bids: points.iter().filter(|p| p.iv_bid.is_none()).count(),
            warnings: points.iter().filter(|p| p.quote.warnings.any()).count(),
        });
    }

    let mut summary = format!("# pbs {} summary {}\n", env!("CARGO_PKG_VERSION"), params.echo());
    summary.push_str("label,file,argmin_strike,min_iv,iv_range,smile_depth,absent_bids,warnings\n");
    for s in &summaries {
        let name = s.file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{}",
            s.label,
            name,
            cell(s.argmin_strike),
            cell(s.min_iv),
            cell(s.range),
            cell(s.depth),
            s.absent_bids,
            s.warnings
        );
    }
    write_file(&out.join("summary.csv"), &summary)?;

    if plot {
        write_file(&out.join("plot.gp"), &gnuplot_script(&summaries))?;
    }
    Ok(summaries)
}

/// Script for an external gnuplot: mid implied volatility against strike.
pub fn gnuplot_script(summaries: &[CurveSummary]) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset xlabel 'strike'\nset ylabel 'mid implied volatility'\nset key top center\nset terminal pngcairo size 900,600\nset output 'curves.png'\n",
    );
    let series: Vec<String> = summaries
        .iter()
        .map(|c| {
            let name = c.file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            format!("'{name}' skip 2 using 1:8 with linespoints title '{}'", c.label)
        })
        .collect();
    let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamArgs;

    #[test]
    fn parses_sweeps() {
        let s = parse_sweep("mu=0,0.05,0.1").unwrap();
        assert_eq!(s.var, SweepVar::Mu);
        assert_eq!(s.values, vec![0.0, 0.05, 0.1]);
        let s = parse_sweep("maturity=1/12,1/4,1").unwrap();
        assert_eq!(s.values[0], 1.0 / 12.0);
        assert_eq!(parse_sweep("bias_coeff=-0.2").unwrap().var, SweepVar::BiasCoeff);
        assert!(parse_sweep("rho=1").is_err());
        assert!(parse_sweep("mu").is_err());
        assert!(parse_sweep("mu=0,x").is_err());
    }

    #[test]
    fn csv_layout() {
        let params = ParamArgs { strikes: Some((95.0, 105.0, 3)), ..Default::default() }.resolve().unwrap();
        let points = curve(&params).unwrap();
        let text = render_csv(&params, "curve", &points);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# pbs "));
        assert!(lines[0].contains("epsilon=0.02"));
        assert_eq!(lines[1], COLUMNS);
        assert_eq!(lines.len(), 5);
        assert!(lines[2..].iter().all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn absent_volatilities_are_empty_fields() {
        assert_eq!(cell(None), "");
        assert_eq!(cell(Some(0.25)), "0.25");
    }
}
