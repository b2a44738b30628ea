use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A programming language covered by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Cpp,
    Java,
    Python,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Cpp, Language::Java, Language::Python];

    /// Identifier used in manifests, configs and task ids.
    pub fn id(self) -> &'static str {
        match self {
            Language::Cpp => "cpp",
            Language::Java => "java",
            Language::Python => "python",
        }
    }

    /// Human-facing name, as used in prompts and report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Language::Cpp => "C++",
            Language::Java => "Java",
            Language::Python => "Python",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Language::Cpp => "cpp",
            Language::Java => "java",
            Language::Python => "py",
        }
    }

    /// Tags accepted on a fenced code block for this language.
    pub fn fence_tags(self) -> &'static [&'static str] {
        match self {
            Language::Cpp => &["cpp", "c++", "cc", "cxx", "c", "hpp"],
            Language::Java => &["java"],
            Language::Python => &["python", "py", "python3", "py3"],
        }
    }

    pub fn uses_braces(self) -> bool {
        !matches!(self, Language::Python)
    }

    /// The other two languages, in canonical order.
    pub fn others(self) -> Vec<Language> {
        Language::ALL.into_iter().filter(|l| *l != self).collect()
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown language `{0}` (expected cpp, java or python)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cpp" | "c++" | "cxx" => Ok(Language::Cpp),
            "java" => Ok(Language::Java),
            "python" | "py" | "python3" => Ok(Language::Python),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_aliases() {
        assert_eq!("C++".parse::<Language>().unwrap(), Language::Cpp);
        assert_eq!("py".parse::<Language>().unwrap(), Language::Python);
        assert!("rust".parse::<Language>().is_err());
    }

    #[test]
    fn others_excludes_self() {
        assert_eq!(Language::Java.others(), vec![Language::Cpp, Language::Python]);
    }

    #[test]
    fn serde_uses_lowercase_ids() {
        assert_eq!(serde_json::to_string(&Language::Cpp).unwrap(), "\"cpp\"");
        let l: Language = serde_json::from_str("\"python\"").unwrap();
        assert_eq!(l, Language::Python);
    }
}
