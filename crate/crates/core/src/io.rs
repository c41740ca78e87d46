//! Reading drawing probabilities from text.

use std::path::Path;

use crate::error::{CcpError, Result};

/// Parses a JSON array of numbers, or decimals separated by whitespace
/// and/or commas.
pub fn parse_probabilities(text: &str) -> Result<Vec<f64>> {
    let text = text.trim_start_matches('\u{feff}').trim();
    if text.starts_with('[') {
        return serde_json::from_str::<Vec<f64>>(text)
            .map_err(|e| CcpError::InvalidInput(format!("probability array: {e}")));
    }
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CcpError::InvalidInput(format!("'{s}' is not a decimal number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(CcpError::InvalidInput("no probabilities given".into()));
    }
    Ok(values)
}

/// Reads probabilities from `source` if it names an existing file, otherwise
/// parses `source` itself as an inline list.
pub fn load_probabilities(source: &str) -> Result<Vec<f64>> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CcpError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        parse_probabilities(&text)
    } else {
        parse_probabilities(source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(parse_probabilities("0.2,0.3,0.5").unwrap(), vec![0.2, 0.3, 0.5]);
        assert_eq!(parse_probabilities("[0.2, 0.3, 0.5]").unwrap(), vec![0.2, 0.3, 0.5]);
        assert_eq!(parse_probabilities("0.2 0.3\n0.5\n").unwrap(), vec![0.2, 0.3, 0.5]);
        assert!(parse_probabilities("0.2,abc").is_err());
        assert!(parse_probabilities("  ").is_err());
        assert!(parse_probabilities("[0.2, \"x\"]").is_err());
    }

    #[test]
    fn file_or_inline() {
        let dir = std::env::temp_dir().join(format!("ccp-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("p.txt");
        std::fs::write(&file, "0.25 0.75").unwrap();
        assert_eq!(load_probabilities(file.to_str().unwrap()).unwrap(), vec![0.25, 0.75]);
        assert_eq!(load_probabilities("0.5,0.5").unwrap(), vec![0.5, 0.5]);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
