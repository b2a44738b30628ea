//! Per-language compile/run command templates, configuration loading and
//! installation probing.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::analysis::mask::mask;
use crate::lang::Language;
use crate::process::{self, ProcessSpec};

use super::ExecError;

pub const TOOLCHAINS_ENV: &str = "TRANSJUDGE_TOOLCHAINS";

/// Argv templates may use `{src}` (source path), `{out}` (binary path),
/// `{workdir}`, `{class}` (Java public class) and `{main}` (qualified class
/// holding `main`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toolchain {
    #[serde(default)]
    pub compile: Option<Vec<String>>,
    /// Parse-only check used when there is no compile step.
    #[serde(default)]
    pub syntax_check: Option<Vec<String>>,
    pub run: Vec<String>,
    pub probe: Vec<String>,
    /// File name inside the workdir; may contain `{class}`.
    pub source_file: String,
}

fn argv(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Toolchain {
    pub fn default_for(lang: Language) -> Toolchain {
        match lang {
            Language::Cpp => Toolchain {
                compile: Some(argv(&["g++", "-std=gnu++17", "-O2", "-pipe", "-o", "{out}", "{src}"])),
                syntax_check: None,
                run: argv(&["{out}"]),
                probe: argv(&["g++", "--version"]),
                source_file: "main.cpp".into(),
            },
            Language::Java => Toolchain {
                compile: Some(argv(&["javac", "-encoding", "UTF-8", "-d", "{workdir}", "{src}"])),
                syntax_check: None,
                run: argv(&["java", "-XX:+UseSerialGC", "-XX:TieredStopAtLevel=1", "-Xss64m", "-cp", "{workdir}", "{main}"]),
                probe: argv(&["javac", "-version"]),
                source_file: "{class}.java".into(),
            },
            Language::Python => Toolchain {
                compile: None,
                syntax_check: Some(argv(&[
                    "python3",
                    "-c",
                    "import sys\nsrc = open(sys.argv[1], 'rb').read()\ncompile(src, sys.argv[1], 'exec')",
                    "{src}",
                ])),
                run: argv(&["python3", "-B", "{src}"]),
                probe: argv(&["python3", "--version"]),
                source_file: "main.py".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolchainSet {
    pub cpp: Toolchain,
    pub java: Toolchain,
    pub python: Toolchain,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ToolchainFile {
    cpp: Option<Toolchain>,
    java: Option<Toolchain>,
    python: Option<Toolchain>,
}

impl Default for ToolchainSet {
    fn default() -> Self {
        ToolchainSet {
            cpp: Toolchain::default_for(Language::Cpp),
            java: Toolchain::default_for(Language::Java),
            python: Toolchain::default_for(Language::Python),
        }
    }
}

impl ToolchainSet {
    pub fn get(&self, lang: Language) -> &Toolchain {
        match lang {
            Language::Cpp => &self.cpp,
            Language::Java => &self.java,
            Language::Python => &self.python,
        }
    }

    /// Reads a JSON file; languages it leaves out keep their defaults.
    pub fn load(path: &Path) -> Result<Self, ExecError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExecError::ToolchainConfig(format!("{}: {e}", path.display())))?;
        let file: ToolchainFile =
            serde_json::from_str(&text).map_err(|e| ExecError::ToolchainConfig(format!("{}: {e}", path.display())))?;
        let mut set = ToolchainSet::default();
        if let Some(t) = file.cpp {
            set.cpp = t;
        }
        if let Some(t) = file.java {
            set.java = t;
        }
        if let Some(t) = file.python {
            set.python = t;
        }
        for lang in Language::ALL {
            let t = set.get(lang);
            if t.run.is_empty() || t.probe.is_empty() || t.source_file.trim().is_empty() {
                return Err(ExecError::ToolchainConfig(format!("{lang}: run, probe and source_file are required")));
            }
        }
        Ok(set)
    }

    /// Defaults, or the file named by `TRANSJUDGE_TOOLCHAINS` when set.
    pub fn from_env() -> Result<Self, ExecError> {
        match std::env::var_os(TOOLCHAINS_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }
}

/// Outcome of running a toolchain's version probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeInfo {
    pub command: String,
    pub version: String,
}

fn probe_cache() -> &'static Mutex<HashMap<Vec<String>, Result<ProbeInfo, String>>> {
    static C: OnceLock<Mutex<HashMap<Vec<String>, Result<ProbeInfo, String>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Runs the probe once per distinct argv for the life of the process.
pub fn probe(tc: &Toolchain) -> Result<ProbeInfo, ExecError> {
    let cmd = tc.probe.join(" ");
    if let Some(hit) = probe_cache().lock().unwrap().get(&tc.probe) {
        return hit.clone().map_err(|_| ExecError::ToolchainMissing { probe: cmd });
    }
    let res = match process::run(&ProcessSpec::new(tc.probe.clone(), Duration::from_secs(30))) {
        Ok(out) if out.success() => {
            let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
            if text.trim().is_empty() {
                text = String::from_utf8_lossy(&out.stderr).into_owned();
            }
            Ok(ProbeInfo {
                command: cmd.clone(),
                version: text.lines().next().unwrap_or("").trim().to_string(),
            })
        }
        Ok(out) => Err(format!("exit {:?}", out.exit)),
        Err(e) => Err(e.to_string()),
    };
    probe_cache().lock().unwrap().insert(tc.probe.clone(), res.clone());
    res.map_err(|_| ExecError::ToolchainMissing { probe: cmd })
}

/// Probe results for every language, for the run's provenance record.
pub fn provenance(set: &ToolchainSet) -> BTreeMap<String, Result<ProbeInfo, String>> {
    Language::ALL
        .into_iter()
        .map(|l| (l.id().to_string(), probe(set.get(l)).map_err(|e| e.to_string())))
        .collect()
}

/// Class names that decide how a Java translation must be laid out on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JavaNames {
    /// The public top-level class (file name), or the main class, or `Main`.
    pub file_class: String,
    /// Fully qualified class to launch.
    pub main_class: String,
}

pub fn java_names(code: &str) -> JavaNames {
    static PUBLIC: OnceLock<Regex> = OnceLock::new();
    static CLASS: OnceLock<Regex> = OnceLock::new();
    static MAIN: OnceLock<Regex> = OnceLock::new();
    static PACKAGE: OnceLock<Regex> = OnceLock::new();
    let public = PUBLIC.get_or_init(|| {
        Regex::new(r"(?m)^\s*public\s+(?:(?:final|abstract|strictfp)\s+)*(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*)").unwrap()
    });
    let class = CLASS.get_or_init(|| Regex::new(r"\b(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*)").unwrap());
    let main = MAIN.get_or_init(|| Regex::new(r"\bstatic\s+(?:public\s+)?void\s+main\s*\(|\bpublic\s+static\s+void\s+main\s*\(").unwrap());
    let package = PACKAGE.get_or_init(|| Regex::new(r"(?m)^\s*package\s+([\w.]+)\s*;").unwrap());
    let masked = mask(code, Language::Java);

    // the class whose body contains `main` is the last class header before it
    let main_simple = main.find(&masked).and_then(|m| {
        class
            .captures_iter(&masked[..m.start()])
            .last()
            .map(|c| c[1].to_string())
    });
    let public_class = public.captures(&masked).map(|c| c[1].to_string());
    let file_class = public_class
        .clone()
        .or_else(|| main_simple.clone())
        .unwrap_or_else(|| "Main".to_string());
    let simple_main = main_simple.or(public_class).unwrap_or_else(|| "Main".to_string());
    let main_class = match package.captures(&masked) {
        Some(p) => format!("{}.{simple_main}", &p[1]),
        None => simple_main,
    };
    JavaNames { file_class, main_class }
}
