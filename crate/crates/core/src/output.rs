//! Shared pieces of the CSV/JSON artifact format.

use std::io::{self, Write};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Locale-independent number formatting that round-trips through `f64`
/// parsing. Plain decimal notation for moderate magnitudes, exponent
/// notation otherwise. NaN is written as an empty field.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// SHA-256 of the canonical JSON encoding of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes to JSON");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// The trailing comment line carried by every CSV artifact.
pub fn footer_line(hash: &str) -> String {
    format!("# giant-atom {VERSION} config-sha256={hash}")
}

pub fn write_footer<W: Write>(out: &mut W, hash: &str) -> io::Result<()> {
    writeln!(out, "{}", footer_line(hash))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 3.95e-7, 1e-17, 0.1 + 0.2, 6.02e23, -1e-300] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(3.95e-7), "3.95e-7");
        assert_eq!(format_number(f64::NAN), "");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&serde_json::json!({"x": 1, "y": [1.5, 2.0]}));
        let b = config_hash(&serde_json::json!({"x": 1, "y": [1.5, 2.0]}));
        let c = config_hash(&serde_json::json!({"x": 2, "y": [1.5, 2.0]}));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
        assert!(footer_line(&a).starts_with("# giant-atom "));
    }
}
