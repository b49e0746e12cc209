//! On-disk system format.
//!
//! JSON: `{"classes": [[n, r], ...], "name": ..., "source": ...}` (a bare
//! `[[n, r], ...]` array is accepted too). Text: one `r mod n` per line,
//! `#` starts a comment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{ResidueClass, ResidueSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub classes: ResidueSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyDocument {
    Full(SystemDocument),
    Bare(ResidueSystem),
}

impl SystemDocument {
    pub fn new(classes: ResidueSystem) -> Self {
        Self {
            classes,
            name: None,
            source: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<AnyDocument>(text) {
            Ok(AnyDocument::Full(doc)) => Ok(doc),
            Ok(AnyDocument::Bare(classes)) => Ok(Self::new(classes)),
            Err(e) => Err(Error::InvalidInput(format!("system JSON: {e}"))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents always serialize")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut classes = ResidueSystem::empty();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidInput(format!("line {}: expected `r mod n`, got {line:?}", no + 1));
            let (r, n) = line.split_once("mod").ok_or_else(bad)?;
            let r: i64 = r.trim().parse().map_err(|_| bad())?;
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            classes.push(ResidueClass::new(n, r)?);
        }
        Ok(Self::new(classes))
    }

    pub fn to_text(&self) -> String {
        self.classes.iter().map(|c| format!("{c}\n")).collect()
    }
}
