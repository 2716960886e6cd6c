//! Declarative multi-step constructions read from TOML.
//!
//! ```toml
//! [[step]]
//! op = "search"
//! m = 7
//! eps_percent = 1.0
//! seed = 1
//! out = "proto.json"
//!
//! [[step]]
//! op = "expand"
//! input = "proto.json"
//! mode = "ula2ura-h"
//! u = "1,1"
//! v = "-1,1"
//! out = "stage1.json"
//! ```
//!
//! Relative paths resolve against the output directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{ExpandMode, SearchParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
pub struct Recipe {
    #[serde(default)]
    pub description: Option<String>,
    #[serde(rename = "step")]
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Step {
    Search {
        #[serde(flatten)]
        params: SearchParams,
        out: PathBuf,
    },
    Expand {
        input: PathBuf,
        mode: ExpandMode,
        u: String,
        v: String,
        out: PathBuf,
    },
}

impl Recipe {
    pub fn parse(text: &str) -> Result<Self> {
        let r: Self = toml::from_str(text).map_err(|e| Error::invalid(format!("malformed recipe: {e}")))?;
        if r.steps.is_empty() {
            return Err(Error::invalid("recipe has no steps"));
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

pub fn resolve(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_ops() {
        let r = Recipe::parse(
            r#"
            [[step]]
            op = "search"
            m = 7
            eps_percent = 1.0
            seed = 3
            out = "p.json"

            [[step]]
            op = "expand"
            input = "p.json"
            mode = "ura-v"
            u = "1;1"
            v = "-1;1"
            out = "q.json"
            "#,
        )
        .unwrap();
        assert_eq!(r.steps.len(), 2);
        let Step::Search { params, .. } = &r.steps[0] else { panic!() };
        assert_eq!((params.m, params.n, params.seed, params.restarts), (7, 1, 3, 10));
        let Step::Expand { mode, .. } = &r.steps[1] else { panic!() };
        assert_eq!(*mode, ExpandMode::UraV);
    }

    #[test]
    fn rejects_bad_recipes() {
        assert!(Recipe::parse("").is_err());
        assert!(Recipe::parse("[[step]]\nop = \"fly\"\n").is_err());
        assert!(Recipe::parse("[[step]]\nop = \"search\"\nout = \"x\"\n").is_err());
    }
}
