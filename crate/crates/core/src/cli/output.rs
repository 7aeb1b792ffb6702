use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::pde_solver::TimeSeries;

use super::Failure;

/// Fixed, locale-free float formatting with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn optional(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Quotes a CSV field when it needs it.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(crate) fn tool_line() -> String {
    format!("# qdiff {}", env!("CARGO_PKG_VERSION"))
}

/// Writes to a file, or to stdout without a path.
pub(crate) fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::io(p, e))?;
            let mut w = BufWriter::new(file);
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| Failure::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

pub(crate) const TIME_SERIES_COLUMNS: &str = "t,mass,mean,sigma2,min_rho,beta_q_inv";

pub(crate) fn time_series_csv(header: &[String], series: &TimeSeries) -> String {
    let mut out = String::new();
    for line in header {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(TIME_SERIES_COLUMNS);
    out.push('\n');
    for r in &series.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(r.t),
            format_float(r.mass),
            format_float(r.mean),
            format_float(r.sigma2),
            format_float(r.min_rho),
            optional(r.beta_q_inv)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let v = 0.19243687849167269;
        assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn fields_are_quoted() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a, \"b\""), "\"a, \"\"b\"\"\"");
    }
}
