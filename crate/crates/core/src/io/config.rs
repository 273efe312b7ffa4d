//! Pipeline configuration as a flat `key = value` file.

use std::path::Path;

use super::{key_values, read_text};
use crate::error::{Error, Result};
use crate::orchestrator::{PipelineConfig, SearchMode};

fn number<T: std::str::FromStr>(origin: &str, line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("{origin}:{line}: `{key}` has invalid value `{v}`")))
}

/// Parses a configuration; keys that are absent keep their defaults.
pub fn parse_config(text: &str, origin: &str) -> Result<PipelineConfig> {
    let mut c = PipelineConfig::default();
    for (line, key, v) in key_values(text, origin)? {
        let v = v.as_str();
        match key.as_str() {
            "folds" => c.folds = number(origin, line, &key, v)?,
            "max_loops" => c.max_loops = number(origin, line, &key, v)?,
            "hyperparameters" => {
                c.hyperparameters = v
                    .split(',')
                    .map(|s| number(origin, line, &key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "epsilon_s" => c.synthesis.epsilon = number(origin, line, &key, v)?,
            "delta_s" => c.synthesis.delta = number(origin, line, &key, v)?,
            "epsilon_p" => c.preprocessing.epsilon = number(origin, line, &key, v)?,
            "delta_p" => c.preprocessing.delta = number(origin, line, &key, v)?,
            "seed" => c.seed = number(origin, line, &key, v)?,
            "custodians" => c.custodians = number(origin, line, &key, v)?,
            "frac_bits" => c.frac_bits = number(origin, line, &key, v)?,
            "value_bits" => c.value_bits = number(origin, line, &key, v)?,
            "epochs" => c.lr.epochs = number(origin, line, &key, v)?,
            "learning_rate" => c.lr.learning_rate = number(origin, line, &key, v)?,
            "mode" => {
                c.mode = SearchMode::parse(v)
                    .ok_or_else(|| Error::Parse(format!("{origin}:{line}: unknown mode `{v}`")))?
            }
            "synthetic_rows" => c.synthetic_rows = Some(number(origin, line, &key, v)?),
            _ => return Err(Error::Parse(format!("{origin}:{line}: unknown key `{key}`"))),
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn read_config(path: &Path) -> Result<PipelineConfig> {
    parse_config(&read_text(path)?, &path.display().to_string())
}

/// Inverse of [`parse_config`].
pub fn format_config(c: &PipelineConfig) -> String {
    let h: Vec<String> = c.hyperparameters.iter().map(ToString::to_string).collect();
    let mut s = format!(
        "folds = {}\nmax_loops = {}\nhyperparameters = {}\nepsilon_s = {}\ndelta_s = {}\nepsilon_p = {}\ndelta_p = {}\n\
         seed = {}\ncustodians = {}\nfrac_bits = {}\nvalue_bits = {}\nepochs = {}\nlearning_rate = {}\nmode = {}\n",
        c.folds,
        c.max_loops,
        h.join(", "),
        c.synthesis.epsilon,
        c.synthesis.delta,
        c.preprocessing.epsilon,
        c.preprocessing.delta,
        c.seed,
        c.custodians,
        c.frac_bits,
        c.value_bits,
        c.lr.epochs,
        c.lr.learning_rate,
        c.mode.name()
    );
    if let Some(n) = c.synthetic_rows {
        s.push_str(&format!("synthetic_rows = {n}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let c = PipelineConfig {
            hyperparameters: vec![3, 9],
            seed: 77,
            mode: SearchMode::Exhaustive,
            synthetic_rows: Some(40),
            ..PipelineConfig::default()
        };
        assert_eq!(parse_config(&format_config(&c), "t").unwrap(), c);
        let e = parse_config("folds = 5\nfoo = 1\n", "cfg").unwrap_err().to_string();
        assert!(e.contains("cfg:2") && e.contains("foo"), "{e}");
        assert!(parse_config("folds = x", "cfg").is_err());
        assert!(parse_config("folds = 1", "cfg").is_err());
        assert_eq!(parse_config("# nothing\n\n", "cfg").unwrap(), PipelineConfig::default());
    }
}
