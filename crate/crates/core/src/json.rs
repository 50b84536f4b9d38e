//! Report serialization: pretty JSON with lexicographically sorted keys and
//! a trailing newline, so equal reports are byte-identical.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub fn to_sorted_string<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's default map is a BTreeMap, which sorts keys on the way in
    let tree = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

pub fn write_sorted<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_sorted_string(value)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Unsorted {
        zeta: u8,
        alpha: u8,
    }

    #[test]
    fn keys_come_out_sorted() {
        let text = to_sorted_string(&Unsorted { zeta: 1, alpha: 2 }).unwrap();
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
        assert!(text.ends_with("}\n"));
    }
}
