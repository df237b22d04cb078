//! The shipped English stop-word list.

use std::collections::HashSet;
use std::sync::LazyLock;

use sha2::{Digest, Sha256};

pub const STOPWORDS_EN_V1: &str = include_str!("../data/stopwords_en_v1.txt");

static DEFAULT: LazyLock<StopWords> = LazyLock::new(|| StopWords::parse(STOPWORDS_EN_V1));

#[derive(Debug, Clone)]
pub struct StopWords {
    words: HashSet<String>,
    sha256: String,
}

impl StopWords {
    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWords {
            words,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }

    pub fn english() -> &'static StopWords {
        &DEFAULT
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    /// Hex SHA-256 of the list file, recorded in run manifests.
    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_list() {
        let s = StopWords::english();
        assert!(s.contains("the") && s.contains("of"));
        assert!(!s.contains("mission") && !s.contains("#"));
        assert_eq!(s.sha256().len(), 64);
    }
}
