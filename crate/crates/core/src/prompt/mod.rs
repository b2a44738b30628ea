//! Prompt rendering for translators and correctors, and code extraction from
//! their raw completions.

mod extract;

pub use extract::{extract_code, ExtractionMethod, ExtractionResult, NO_CODE_WARNING};

use serde::{Deserialize, Serialize};

use crate::lang::Language;

pub const SOURCE_LANG: &str = "$SOURCE_LANG";
pub const TARGET_LANG: &str = "$TARGET_LANG";
pub const END_OF_CODE: &str = "|End-of-Code|";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateFamily {
    #[serde(rename = "chat")]
    ChatStyle,
    #[serde(rename = "completion")]
    CompletionStyle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub family: TemplateFamily,
    pub task_description: String,
    #[serde(default)]
    pub indicator: String,
    #[serde(default)]
    pub sentinel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub template_family: TemplateFamily,
    pub sentinel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("template task description must contain {0} exactly once")]
    PlaceholderMissing(&'static str),
    #[error("chat templates need a non-empty indicator")]
    MissingIndicator,
    #[error("source and target language are both {0}")]
    SameLanguage(Language),
    #[error("source code is empty")]
    EmptyCode,
}

impl PromptTemplate {
    pub fn chat_default() -> Self {
        PromptTemplate {
            family: TemplateFamily::ChatStyle,
            task_description: format!("Translate the above {SOURCE_LANG} code to {TARGET_LANG}."),
            indicator: format!("Print only the {TARGET_LANG} code, end with \"{END_OF_CODE}\"."),
            sentinel: Some(END_OF_CODE.to_string()),
        }
    }

    /// Completion models get the task line followed by a bare `Java:` style cue.
    pub fn completion_default() -> Self {
        PromptTemplate {
            family: TemplateFamily::CompletionStyle,
            task_description: format!("Translate the above {SOURCE_LANG} code to {TARGET_LANG}."),
            indicator: format!("{TARGET_LANG}:"),
            sentinel: None,
        }
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        for p in [SOURCE_LANG, TARGET_LANG] {
            if self.task_description.matches(p).count() != 1 {
                return Err(PromptError::PlaceholderMissing(p));
            }
        }
        if self.family == TemplateFamily::ChatStyle && self.indicator.trim().is_empty() {
            return Err(PromptError::MissingIndicator);
        }
        Ok(())
    }
}

fn substitute(text: &str, source: Language, target: Language) -> String {
    text.replace(SOURCE_LANG, source.display_name())
        .replace(TARGET_LANG, target.display_name())
}

/// Source code first, then the task description, then the indicator.
pub fn render_prompt(
    template: &PromptTemplate,
    code: &str,
    source: Language,
    target: Language,
) -> Result<RenderedPrompt, PromptError> {
    template.validate()?;
    if source == target {
        return Err(PromptError::SameLanguage(source));
    }
    if code.trim().is_empty() {
        return Err(PromptError::EmptyCode);
    }
    let task = substitute(&template.task_description, source, target);
    let indicator = substitute(&template.indicator, source, target);
    let mut text = String::with_capacity(code.len() + task.len() + indicator.len() + 8);
    text.push_str(code);
    if !code.ends_with('\n') {
        text.push('\n');
    }
    text.push('\n');
    text.push_str(&task);
    match template.family {
        TemplateFamily::ChatStyle => {
            text.push(' ');
            text.push_str(&indicator);
            text.push('\n');
        }
        TemplateFamily::CompletionStyle => {
            text.push('\n');
            if !indicator.is_empty() {
                text.push_str(&indicator);
                text.push('\n');
            }
        }
    }
    Ok(RenderedPrompt {
        text,
        template_family: template.family,
        sentinel: template.sentinel.clone(),
    })
}

/// What a corrector backend gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairEncoding {
    pub include_source: bool,
    pub include_diagnostic: bool,
}

impl Default for RepairEncoding {
    fn default() -> Self {
        RepairEncoding {
            include_source: true,
            include_diagnostic: true,
        }
    }
}

impl RepairEncoding {
    /// Only the invalid translation, nothing else.
    pub fn code_only() -> Self {
        RepairEncoding {
            include_source: false,
            include_diagnostic: false,
        }
    }
}

pub struct RepairInput<'a> {
    pub source_code: &'a str,
    pub source: Language,
    pub target: Language,
    pub invalid_code: &'a str,
    pub diagnostic: &'a str,
}

pub fn render_repair_prompt(input: &RepairInput<'_>, encoding: RepairEncoding) -> RenderedPrompt {
    let fence = |lang: Language, code: &str| {
        let mut s = format!("```{}\n{}", lang.fence_tags()[0], code);
        if !code.ends_with('\n') {
            s.push('\n');
        }
        s.push_str("```\n");
        s
    };
    let mut text = String::new();
    if encoding.include_source {
        text.push_str(&format!("Original {} program:\n", input.source.display_name()));
        text.push_str(&fence(input.source, input.source_code));
        text.push('\n');
    }
    text.push_str(&format!("Incorrect {} translation:\n", input.target.display_name()));
    text.push_str(&fence(input.target, input.invalid_code));
    if encoding.include_diagnostic && !input.diagnostic.trim().is_empty() {
        text.push_str("\nFailure:\n");
        text.push_str(input.diagnostic.trim_end());
        text.push('\n');
    }
    text.push_str(&format!(
        "\nProduce the corrected {} code only, end with \"{END_OF_CODE}\".\n",
        input.target.display_name()
    ));
    RenderedPrompt {
        text,
        template_family: TemplateFamily::ChatStyle,
        sentinel: Some(END_OF_CODE.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chat_prompt_layout() {
        let p = render_prompt(&PromptTemplate::chat_default(), "class A{}", Language::Java, Language::Python).unwrap();
        assert!(p.text.starts_with("class A{}\n\n"));
        assert!(p.text.contains("Translate the above Java code to Python."));
        assert!(p.text.contains("Print only the Python code, end with \"|End-of-Code|\"."));
        assert_eq!(p.sentinel.as_deref(), Some(END_OF_CODE));
        assert!(!p.text.contains('$'));
    }

    #[test]
    fn completion_prompt_ends_with_cue() {
        let p = render_prompt(&PromptTemplate::completion_default(), "int main(){}", Language::Cpp, Language::Java).unwrap();
        assert!(p.text.ends_with("Java:\n"));
        assert!(p.sentinel.is_none());
        assert!(!p.text.contains(END_OF_CODE));
    }

    #[test]
    fn code_is_verbatim_even_with_placeholder_text() {
        let code = "print('$TARGET_LANG')";
        let p = render_prompt(&PromptTemplate::chat_default(), code, Language::Python, Language::Cpp).unwrap();
        assert!(p.text.contains(code));
    }

    #[test]
    fn errors() {
        let t = PromptTemplate::chat_default();
        assert_eq!(render_prompt(&t, "x", Language::Java, Language::Java), Err(PromptError::SameLanguage(Language::Java)));
        assert_eq!(render_prompt(&t, "  \n", Language::Java, Language::Cpp), Err(PromptError::EmptyCode));
        let mut bad = t.clone();
        bad.task_description = "Translate to $TARGET_LANG.".into();
        assert_eq!(bad.validate(), Err(PromptError::PlaceholderMissing(SOURCE_LANG)));
        bad = t;
        bad.indicator.clear();
        assert_eq!(bad.validate(), Err(PromptError::MissingIndicator));
    }

    #[test]
    fn template_json_shape() {
        let t: PromptTemplate = serde_json::from_str(
            r#"{"family":"completion","task_description":"$SOURCE_LANG to $TARGET_LANG","indicator":"","sentinel":null}"#,
        )
        .unwrap();
        assert_eq!(t.family, TemplateFamily::CompletionStyle);
        t.validate().unwrap();
    }

    #[test]
    fn repair_prompt_encodings() {
        let input = RepairInput {
            source_code: "int x;",
            source: Language::Cpp,
            target: Language::Python,
            invalid_code: "print(7/2)",
            diagnostic: "expected 3, got 3.5",
        };
        let full = render_repair_prompt(&input, RepairEncoding::default());
        assert!(full.text.contains("int x;") && full.text.contains("expected 3"));
        let bare = render_repair_prompt(&input, RepairEncoding::code_only());
        assert!(!bare.text.contains("int x;") && !bare.text.contains("expected 3"));
        assert!(bare.text.contains("print(7/2)"));
    }
}
