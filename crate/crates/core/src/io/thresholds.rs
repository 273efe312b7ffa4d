//! A custodian's quality thresholds: `max_wle` and `min_accuracy`.

use std::path::Path;

use super::{key_values, read_text};
use crate::error::{Error, Result};
use crate::orchestrator::ClearThresholds;

/// Both metrics are required. `inf` is accepted.
pub fn parse_thresholds(text: &str, origin: &str) -> Result<ClearThresholds> {
    let mut wle = None;
    let mut acc = None;
    for (line, key, v) in key_values(text, origin)? {
        let x: f64 = v
            .parse()
            .ok()
            .filter(|x: &f64| !x.is_nan())
            .ok_or_else(|| Error::Parse(format!("{origin}:{line}: `{key}` has invalid value `{v}`")))?;
        match key.as_str() {
            "max_wle" => wle = Some(x),
            "min_accuracy" => acc = Some(x),
            _ => return Err(Error::Parse(format!("{origin}:{line}: unknown metric `{key}`"))),
        }
    }
    match (wle, acc) {
        (Some(max_wle), Some(min_accuracy)) => Ok(ClearThresholds { max_wle, min_accuracy }),
        (None, _) => Err(Error::Parse(format!("{origin}: missing metric `max_wle`"))),
        (_, None) => Err(Error::Parse(format!("{origin}: missing metric `min_accuracy`"))),
    }
}

pub fn read_thresholds(path: &Path) -> Result<ClearThresholds> {
    parse_thresholds(&read_text(path)?, &path.display().to_string())
}

pub fn format_thresholds(t: &ClearThresholds) -> String {
    format!("max_wle = {}\nmin_accuracy = {}\n", t.max_wle, t.min_accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_infinity_and_reports_missing_metrics() {
        let t = parse_thresholds("max_wle = inf\nmin_accuracy = 0\n", "t").unwrap();
        assert_eq!(t, ClearThresholds::VACUOUS);
        assert_eq!(parse_thresholds(&format_thresholds(&t), "t").unwrap(), t);
        let e = parse_thresholds("max_wle = 0.2\n", "t").unwrap_err().to_string();
        assert!(e.contains("min_accuracy"));
        assert!(parse_thresholds("max_wle = 0.2\nmin_accuracy = high\n", "t").is_err());
    }
}
