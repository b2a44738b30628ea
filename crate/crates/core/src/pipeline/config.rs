use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::BackendSpec;
use crate::exec::{ComparePolicy, Limits};
use crate::lang::Language;
use crate::prompt::{PromptTemplate, RepairEncoding};
use crate::rectify::{RuleId, DEFAULT_BUDGET};
use crate::taxonomy::ClassifierConfig;

use super::PipelineError;

fn default_out_dir() -> PathBuf {
    PathBuf::from("run")
}
fn default_chain() -> Vec<String> {
    vec!["rules".into()]
}
fn default_budget() -> usize {
    DEFAULT_BUDGET
}

/// Everything one run needs. Relative paths resolve against the directory
/// holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: PathBuf,
    /// Dataset label in results; defaults to the corpus name.
    #[serde(default)]
    pub dataset: Option<String>,
    /// Source language → target languages; defaults to every other language.
    #[serde(default)]
    pub targets: Option<BTreeMap<Language, Vec<Language>>>,
    pub backends: Vec<BackendSpec>,
    /// Backends that translate; defaults to all of them.
    #[serde(default)]
    pub translators: Option<Vec<String>>,
    /// Extra templates by name; `chat` and `completion` are built in.
    #[serde(default)]
    pub templates: BTreeMap<String, PromptTemplate>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub compare: ComparePolicy,
    #[serde(default)]
    pub toolchains: Option<PathBuf>,
    /// Corrector chain: `rules`, `rules:R-IMPORT+R-INTDIV`, `backend:NAME`.
    #[serde(default = "default_chain")]
    pub chain: Vec<String>,
    #[serde(default = "default_budget")]
    pub repair_budget: usize,
    #[serde(default)]
    pub repair_encoding: RepairEncoding,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 means one per CPU.
    #[serde(default)]
    pub workers: usize,
}

/// A parsed chain entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainItem {
    Rules(Vec<RuleId>),
    Backend(String),
}

pub fn parse_chain(items: &[String]) -> Result<Vec<ChainItem>, PipelineError> {
    let mut out = Vec::new();
    for raw in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if raw == "rules" {
            out.push(ChainItem::Rules(RuleId::CATALOG.to_vec()));
        } else if let Some(list) = raw.strip_prefix("rules:") {
            let ids = list
                .split('+')
                .map(|r| r.parse::<RuleId>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(PipelineError::Config)?;
            out.push(ChainItem::Rules(ids));
        } else if let Some(name) = raw.strip_prefix("backend:") {
            out.push(ChainItem::Backend(name.to_string()));
        } else {
            return Err(PipelineError::Config(format!(
                "unknown corrector `{raw}` (expected rules, rules:ID+ID or backend:NAME)"
            )));
        }
    }
    if out.is_empty() {
        return Err(PipelineError::Config("empty corrector chain".into()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| PipelineError::Config(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        abs(&mut self.manifest);
        abs(&mut self.out_dir);
        if let Some(t) = self.toolchains.as_mut() {
            abs(t);
        }
        for b in &mut self.backends {
            if let Some(c) = b.cassette.as_mut() {
                abs(c);
            }
        }
    }

    pub fn template(&self, name: &str) -> Option<PromptTemplate> {
        self.templates.get(name).cloned().or_else(|| match name {
            "chat" => Some(PromptTemplate::chat_default()),
            "completion" => Some(PromptTemplate::completion_default()),
            _ => None,
        })
    }

    pub fn backend(&self, name: &str) -> Option<&BackendSpec> {
        self.backends.iter().find(|b| b.name == name)
    }

    pub fn translator_names(&self) -> Vec<String> {
        match &self.translators {
            Some(t) => t.clone(),
            None => self.backends.iter().map(|b| b.name.clone()).collect(),
        }
    }

    /// Every referenced backend and template must exist.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::Config(m));
        let mut names = BTreeSet::new();
        for b in &self.backends {
            b.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
            if !names.insert(b.name.as_str()) {
                return err(format!("duplicate backend name `{}`", b.name));
            }
            let Some(t) = self.template(&b.template) else {
                return err(format!("backend `{}` references unknown template `{}`", b.name, b.template));
            };
            t.validate().map_err(|e| PipelineError::Config(format!("template `{}`: {e}", b.template)))?;
        }
        for t in self.translator_names() {
            if !names.contains(t.as_str()) {
                return err(format!("unknown translator backend `{t}`"));
            }
        }
        for item in parse_chain(&self.chain)? {
            if let ChainItem::Backend(n) = item {
                if !names.contains(n.as_str()) {
                    return err(format!("chain references unknown backend `{n}`"));
                }
            }
        }
        if let Some(targets) = &self.targets {
            for (s, ts) in targets {
                if ts.contains(s) {
                    return err(format!("target map sends {s} to itself"));
                }
            }
        }
        if self.repair_budget == 0 {
            return err("repair_budget must be at least 1".into());
        }
        self.limits.validate().map_err(PipelineError::Config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("run.json");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn minimal_config_resolves_paths() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            r#"{"manifest": "corpus/manifest.json", "backends": [{"name": "m", "kind": "command", "endpoint_or_cmd": "cat"}]}"#,
        );
        let c = RunConfig::load(&p).unwrap();
        assert_eq!(c.manifest, d.path().join("corpus/manifest.json"));
        assert_eq!(c.out_dir, d.path().join("run"));
        assert_eq!(c.repair_budget, 4);
        assert_eq!(c.translator_names(), vec!["m".to_string()]);
    }

    #[test]
    fn unknown_references_rejected() {
        let d = tempfile::tempdir().unwrap();
        for (body, needle) in [
            (r#"{"manifest": "m", "backends": [], "translators": ["ghost"]}"#, "ghost"),
            (r#"{"manifest": "m", "backends": [], "chain": ["backend:ghost"]}"#, "ghost"),
            (r#"{"manifest": "m", "backends": [{"name": "m", "kind": "command", "endpoint_or_cmd": "cat", "template": "fancy"}]}"#, "fancy"),
            (r#"{"manifest": "m", "backends": [], "bogus": 1}"#, "bogus"),
        ] {
            let e = RunConfig::load(&write(d.path(), body)).unwrap_err().to_string();
            assert!(e.contains(needle), "{e}");
        }
    }

    #[test]
    fn chain_parsing() {
        let c = parse_chain(&["rules,backend:fixer".into()]).unwrap();
        assert_eq!(c, vec![ChainItem::Rules(RuleId::CATALOG.to_vec()), ChainItem::Backend("fixer".into())]);
        let c = parse_chain(&["rules:R-IMPORT+R-INTDIV".into()]).unwrap();
        assert_eq!(c, vec![ChainItem::Rules(vec![RuleId::Import, RuleId::IntDiv])]);
        assert!(parse_chain(&["magic".into()]).is_err());
        assert!(parse_chain(&[]).is_err());
    }
}
