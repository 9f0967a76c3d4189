//! Result files: JSON record, CSV tables and SVG plots. Every real number is
//! written with 17 significant digits.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::config::{Experiment, RunConfig};
use crate::experiment::{RunStatus, SweepRecord};
use crate::plot::{Plot, Series, Style};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// `d.dddddddddddddddde±x`; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Pretty JSON with reals in 17-digit exponent form and non-finite reals as
/// `null`.
struct RealFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for RealFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            w.write_all(fmt_real(v).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RealFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("records serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn errors_csv(record: &SweepRecord) -> String {
    let rows = record.runs.iter().flat_map(|r| r.errors.iter()).map(|e| {
        vec![fmt_real(e.eps), fmt_real(e.t), fmt_real(e.e_q), fmt_real(e.e_u), fmt_real(e.e_theta), e.s.to_string()]
    });
    csv("eps,t,e_q,e_u,e_theta,s", rows)
}

pub fn rates_csv(record: &SweepRecord) -> String {
    let rows = record
        .rates
        .iter()
        .map(|r| vec![r.quantity.clone(), fmt_real(r.slope), fmt_real(r.intercept), fmt_real(r.residual)]);
    csv("quantity,slope,intercept,residual", rows)
}

fn compact_csv(record: &SweepRecord) -> String {
    let rows = record
        .runs
        .iter()
        .flat_map(|r| r.compact.iter().map(move |c| vec![fmt_real(r.eps), fmt_real(c.t), fmt_real(c.value)]));
    csv("eps,t,l2_k", rows)
}

fn residuals_csv(record: &SweepRecord) -> String {
    let rows =
        record.residuals.iter().map(|r| vec![fmt_real(r.eps), fmt_real(r.t), fmt_real(r.r1), fmt_real(r.r2), fmt_real(r.r3)]);
    csv("eps,t,r1,r2,r3", rows)
}

fn energy_csv(record: &SweepRecord) -> String {
    let rows = record.runs.iter().flat_map(|r| {
        r.energy.iter().flat_map(move |e| {
            e.reports.iter().flat_map(move |rep| {
                rep.terms.iter().map(move |(k, v)| vec![fmt_real(r.eps), fmt_real(rep.time), k.clone(), fmt_real(*v)])
            })
        })
    });
    csv("eps,t,term,value", rows)
}

fn spectrum_csv(record: &SweepRecord) -> String {
    let mut s = String::from("j1,j2,m,xi1,xi2,k,index,closed_re,closed_im,numeric_re,numeric_im,abs_diff,admissible\n");
    if let Some(rep) = &record.spectrum {
        for e in &rep.entries {
            for (i, (c, n)) in e.closed.iter().zip(&e.numeric).enumerate() {
                let diff = (c[0] - n[0]).hypot(c[1] - n[1]);
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{i},{},{},{},{},{},{}",
                    e.j[0],
                    e.j[1],
                    e.m,
                    fmt_real(e.xi[0]),
                    fmt_real(e.xi[1]),
                    fmt_real(e.k),
                    fmt_real(c[0]),
                    fmt_real(c[1]),
                    fmt_real(n[0]),
                    fmt_real(n[1]),
                    fmt_real(diff),
                    e.admissible[i]
                );
            }
        }
    }
    s
}

fn rage_csv(record: &SweepRecord) -> String {
    let rows = record.rage.iter().flat_map(|c| {
        c.points.iter().map(|p| {
            vec![fmt_real(p.tau), fmt_real(p.norm), p.local_norm.map(fmt_real).unwrap_or_default()]
        })
    });
    csv("tau,norm,local_norm", rows)
}

fn fitted_line(points: &[(f64, f64)], slope: f64, intercept: f64) -> Vec<(f64, f64)> {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return Vec::new();
    }
    [lo, hi].iter().map(|x| (*x, (intercept + slope * x.ln()).exp())).collect()
}

fn error_plot(record: &SweepRecord) -> Plot {
    let mut series = Vec::new();
    let mut add = |label: &str, quantity: &str, points: Vec<(f64, f64)>| {
        if let Some(r) = record.rate(quantity) {
            let line = fitted_line(&points, r.slope, r.intercept);
            series.push(Series { label: format!("{label} fit, slope {:.3}", r.slope), points: line, style: Style::Dashed });
        }
        series.push(Series { label: label.into(), points, style: Style::Markers });
    };
    let sup: Vec<(f64, f64)> = record.runs.iter().filter_map(|r| r.sup_error.map(|e| (r.eps, e.total()))).collect();
    if !sup.is_empty() {
        add("sup error", "e_total", sup);
    }
    let compact: Vec<(f64, f64)> = record.runs.iter().filter_map(|r| r.compact_l2.map(|v| (r.eps, v))).collect();
    if !compact.is_empty() {
        add("L2(K) error", "compact_l2", compact);
    }
    if !record.residuals.is_empty() {
        add("R1", "r1", record.residuals.iter().map(|r| (r.eps, r.r1)).collect());
        add("R2", "r2", record.residuals.iter().map(|r| (r.eps, r.r2)).collect());
        add("R3", "r3", record.residuals.iter().map(|r| (r.eps, r.r3)).collect());
    }
    Plot {
        title: "error against eps".into(),
        x_label: "eps".into(),
        y_label: "norm".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

fn energy_plot(record: &SweepRecord) -> Plot {
    let run = record.runs.iter().rfind(|r| r.status == RunStatus::Ok && r.energy.is_some());
    let mut series = Vec::new();
    let mut title = "energy terms".to_string();
    if let Some(run) = run {
        title = format!("energy terms, eps = {}", run.eps);
        let e = run.energy.as_ref().unwrap();
        let names: Vec<&String> = e.reports.last().map(|r| r.terms.keys().collect()).unwrap_or_default();
        for name in names {
            let points = e.reports.iter().filter_map(|r| r.terms.get(name).map(|v| (r.time, *v))).collect();
            series.push(Series { label: name.clone(), points, style: Style::Line });
        }
    }
    Plot { title, x_label: "t".into(), y_label: "term".into(), log_x: false, log_y: true, series }
}

fn rage_plot(record: &SweepRecord) -> Plot {
    let mut series = Vec::new();
    if let Some(c) = &record.rage {
        let points: Vec<(f64, f64)> = c.points.iter().map(|p| (p.tau, p.norm)).collect();
        if let Some(&(t0, n0)) = points.first() {
            let reference = c.points.iter().map(|p| (p.tau, n0 * t0 / p.tau)).collect();
            series.push(Series { label: "slope -1".into(), points: reference, style: Style::Dashed });
        }
        series.push(Series { label: format!("eps = {}, M = {}", c.eps, c.cutoff), points: points.clone(), style: Style::Line });
        series.push(Series { label: "samples".into(), points, style: Style::Markers });
        let local: Vec<(f64, f64)> = c.points.iter().filter_map(|p| p.local_norm.map(|v| (p.tau, v))).collect();
        if !local.is_empty() {
            series.push(Series { label: "subdomain".into(), points: local, style: Style::Line });
        }
    }
    Plot {
        title: "time-averaged oscillating part".into(),
        x_label: "tau".into(),
        y_label: "norm".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), OutputError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| OutputError::Io { path: path.clone(), source: e })?;
    written.push(path);
    Ok(())
}

/// Writes all result files into `dir`, returning their paths.
pub fn emit_outputs(record: &SweepRecord, config: Option<&RunConfig>, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|e| OutputError::Io { path: dir.to_path_buf(), source: e })?;
    let mut written = Vec::new();
    write(dir, "results.json", &to_json(record), &mut written)?;
    write(dir, "timings.json", &to_json(&record.timings), &mut written)?;
    write(dir, "errors.csv", &errors_csv(record), &mut written)?;
    write(dir, "rates.csv", &rates_csv(record), &mut written)?;
    write(dir, "error_vs_eps.svg", &error_plot(record).to_svg(), &mut written)?;
    write(dir, "energy.svg", &energy_plot(record).to_svg(), &mut written)?;
    write(dir, "rage.svg", &rage_plot(record).to_svg(), &mut written)?;
    match record.experiment {
        Experiment::AlphaOneLimit => write(dir, "compact.csv", &compact_csv(record), &mut written)?,
        Experiment::AcousticSpectrum => write(dir, "spectrum.csv", &spectrum_csv(record), &mut written)?,
        Experiment::RageDecay => write(dir, "rage.csv", &rage_csv(record), &mut written)?,
        _ => {}
    }
    if !record.residuals.is_empty() {
        write(dir, "residuals.csv", &residuals_csv(record), &mut written)?;
    }
    if record.runs.iter().any(|r| r.energy.is_some()) {
        write(dir, "energy.csv", &energy_csv(record), &mut written)?;
    }
    if let Some(c) = config {
        write(dir, "config.toml", &c.to_toml(), &mut written)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_real(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_reals_use_fixed_digits() {
        let v = serde_json::json!({ "a": 0.1, "b": [1.0, f64::NAN], "n": 3 });
        let s = to_json(&v);
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("null"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
