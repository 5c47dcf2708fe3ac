use serde::{Deserialize, Serialize};

use super::{FractionalPID, LoopModel, RationalPlant};
use crate::error::{Error, Result};

/// JSON model description:
///
/// ```json
/// {"plant": {"num": [[3, 0]], "den": [[-1, 0], [1, 0]]},
///  "pid": {"k1": 0, "k0": 1, "km1": 0, "alpha": 0.5, "beta": 0.5}}
/// ```
///
/// Coefficients are `[re, im]` pairs in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub plant: RationalPlant,
    pub pid: FractionalPID,
}

impl ModelDocument {
    /// Parses a document; syntax and constraint violations carry the
    /// line/column reported by the JSON reader.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("{} (line {}, column {})", e, e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    pub fn into_model(self) -> LoopModel {
        LoopModel::rational(self.plant, self.pid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{"plant": {"num": [[3, 0]], "den": [[-1, 0], [1, 0]]},
        "pid": {"k1": 0, "k0": 1, "km1": 0, "alpha": 0.5, "beta": 0.5}}"#;

    #[test]
    fn parses_and_round_trips() {
        let doc = ModelDocument::from_json(DOC).unwrap();
        assert_eq!(doc.plant.m(), 1);
        assert_eq!(doc.plant.n(), 0);
        let again = ModelDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn rejects_beta_out_of_range() {
        let bad = DOC.replace("\"beta\": 0.5", "\"beta\": 2.5");
        let err = ModelDocument::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("0 < beta < 2"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = ModelDocument::from_json("{\"plant\": [1,").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn rejects_zero_denominator() {
        let bad = DOC.replace("[[-1, 0], [1, 0]]", "[[0, 0]]");
        assert!(ModelDocument::from_json(&bad).is_err());
    }
}
