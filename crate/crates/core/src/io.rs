//! Measure files.
//!
//! A measure file is a UTF-8 JSON record holding exactly one of
//!
//! ```json
//! { "atoms": [ { "x": 0.0, "w": 0.5 }, { "x": 1.0, "w": 0.5 } ] }
//! { "quantile_pieces": [ { "u_hi": 1.0, "slope": 0.5, "value_hi": 0.5 } ] }
//! ```
//!
//! Quantile pieces describe a piecewise-affine quantile function; piece `i`
//! covers `(u_hi[i-1], u_hi[i]]` and ends at `value_hi`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::{Atom, DiscreteMeasure, GeneralQuantile, QuantilePiece};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile_pieces: Option<Vec<QuantilePiece>>,
}

impl From<&DiscreteMeasure> for MeasureFile {
    fn from(m: &DiscreteMeasure) -> Self {
        Self {
            atoms: Some(m.atoms().to_vec()),
            quantile_pieces: None,
        }
    }
}

/// A parsed measure file.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureInput {
    Discrete(DiscreteMeasure),
    Quantile(GeneralQuantile),
}

impl MeasureInput {
    /// Discrete measures pass through; quantile inputs are discretized into `n`
    /// equal atoms.
    pub fn into_discrete(self, n: usize) -> DiscreteMeasure {
        match self {
            Self::Discrete(m) => m,
            Self::Quantile(q) => q.discretize(n),
        }
    }
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

/// Parses a measure record. `origin` only labels errors.
pub fn parse_measure(text: &str, origin: &Path) -> Result<MeasureInput, InputError> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|source| InputError::Syntax {
        path: origin.to_path_buf(),
        source,
    })?;
    let invalid = |message: String| InputError::Invalid {
        path: origin.to_path_buf(),
        message,
    };
    match (file.atoms, file.quantile_pieces) {
        (Some(atoms), None) => DiscreteMeasure::from_atoms(atoms.into_iter().map(|a| (a.x, a.w)))
            .map(MeasureInput::Discrete)
            .map_err(|e| invalid(e.to_string())),
        (None, Some(pieces)) => GeneralQuantile::new(pieces)
            .map(MeasureInput::Quantile)
            .map_err(|e| invalid(e.to_string())),
        (Some(_), Some(_)) => Err(invalid("both `atoms` and `quantile_pieces` given".into())),
        (None, None) => Err(invalid("expected `atoms` or `quantile_pieces`".into())),
    }
}

pub fn load_measure(path: &Path) -> Result<MeasureInput, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_measure(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MeasureInput, InputError> {
        parse_measure(text, Path::new("test.json"))
    }

    #[test]
    fn parses_atoms() {
        let m = parse(r#"{"atoms": [{"x": 1, "w": 1}, {"x": 0, "w": 1}]}"#).unwrap();
        let expected = DiscreteMeasure::from_atoms([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(m, MeasureInput::Discrete(expected));
    }

    #[test]
    fn parses_and_discretizes_quantile_pieces() {
        let m = parse(r#"{"quantile_pieces": [{"u_hi": 1.0, "slope": 0.5, "value_hi": 0.5}]}"#)
            .unwrap();
        let d = m.into_discrete(2);
        assert_eq!(
            d,
            DiscreteMeasure::from_atoms([(0.125, 0.5), (0.375, 0.5)]).unwrap()
        );
    }

    #[test]
    fn rejects_malformed_records() {
        assert!(matches!(parse("{"), Err(InputError::Syntax { .. })));
        assert!(matches!(parse("{}"), Err(InputError::Invalid { .. })));
        assert!(matches!(
            parse(r#"{"atoms": []}"#),
            Err(InputError::Invalid { .. })
        ));
        assert!(matches!(
            parse(r#"{"atoms": [{"x": 0, "w": -1}]}"#),
            Err(InputError::Invalid { .. })
        ));
        assert!(matches!(
            parse(r#"{"atoms": [{"x": 0, "w": 1}], "extra": 1}"#),
            Err(InputError::Syntax { .. })
        ));
        assert!(matches!(
            parse(r#"{"atoms": [{"x": 0, "w": 1}], "quantile_pieces": []}"#),
            Err(InputError::Invalid { .. })
        ));
    }

    #[test]
    fn measure_file_round_trip() {
        let m = DiscreteMeasure::from_atoms([(-0.25, 0.5), (1.0, 0.5)]).unwrap();
        let text = serde_json::to_string(&MeasureFile::from(&m)).unwrap();
        assert_eq!(parse(&text).unwrap(), MeasureInput::Discrete(m));
    }
}
