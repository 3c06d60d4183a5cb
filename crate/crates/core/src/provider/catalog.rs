//! The prompt catalog. Bodies live in `assets/prompts/*.txt`, not in code;
//! the builtin set is compiled in from those files and any template can be
//! overridden from a directory at runtime.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::provider::template::PromptTemplate;

/// (name, body, declared variables) for every shipped template.
const BUILTIN: &[(&str, &str, &[&str])] = &[
    (
        "verbalise",
        include_str!("../../assets/prompts/verbalise.txt"),
        &["caption"],
    ),
    (
        "entity_extraction",
        include_str!("../../assets/prompts/entity_extraction.txt"),
        &["num_entities", "passage"],
    ),
    (
        "qgen_text",
        include_str!("../../assets/prompts/qgen_text.txt"),
        &["style_prompt", "modality_requirement"],
    ),
    (
        "qgen_image_system",
        include_str!("../../assets/prompts/qgen_image_system.txt"),
        &["style_prompt", "modality_requirement"],
    ),
    (
        "qgen_user",
        include_str!("../../assets/prompts/qgen_user.txt"),
        &["enumerated_passages"],
    ),
    (
        "verify_text",
        include_str!("../../assets/prompts/verify_text.txt"),
        &["question", "answer", "style_prompt", "enumerated_passages"],
    ),
    (
        "verify_image_system",
        include_str!("../../assets/prompts/verify_image_system.txt"),
        &[],
    ),
    (
        "verify_image_user",
        include_str!("../../assets/prompts/verify_image_user.txt"),
        &["question", "answer", "style_prompt", "enumerated_passages"],
    ),
    (
        "multihop_about_entity",
        include_str!("../../assets/prompts/multihop_about_entity.txt"),
        &["entity"],
    ),
    (
        "multihop_entity_answer",
        include_str!("../../assets/prompts/multihop_entity_answer.txt"),
        &["entity"],
    ),
    (
        "combine_text",
        include_str!("../../assets/prompts/combine_text.txt"),
        &[
            "enumerated_passages",
            "question_1",
            "question_2",
            "answer_1",
            "answer_2",
            "entity",
        ],
    ),
    (
        "combine_image_system",
        include_str!("../../assets/prompts/combine_image_system.txt"),
        &[],
    ),
    (
        "combine_image_user",
        include_str!("../../assets/prompts/combine_image_user.txt"),
        &[
            "enumerated_passages",
            "question_1",
            "question_2",
            "answer_1",
            "answer_2",
            "entity",
        ],
    ),
    (
        "judge_text",
        include_str!("../../assets/prompts/judge_text.txt"),
        &["question", "candidate_answer", "model_answer", "passages"],
    ),
    (
        "judge_image_system",
        include_str!("../../assets/prompts/judge_image_system.txt"),
        &[],
    ),
    (
        "judge_image_user",
        include_str!("../../assets/prompts/judge_image_user.txt"),
        &["question", "candidate_answer", "model_answer", "passages"],
    ),
    (
        "judge_reference_only",
        include_str!("../../assets/prompts/judge_reference_only.txt"),
        &["question", "reference", "prediction"],
    ),
];

pub struct PromptCatalog {
    templates: BTreeMap<String, PromptTemplate>,
}

impl PromptCatalog {
    /// The shipped templates. Panics only if the compiled-in assets are
    /// inconsistent with their declared variables, which the test suite
    /// guards.
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for (name, body, vars) in BUILTIN {
            let t = PromptTemplate::with_required_vars(*name, body.trim_end_matches('\n'), vars)
                .unwrap_or_else(|e| panic!("builtin template {name}: {e}"));
            templates.insert(name.to_string(), t);
        }
        PromptCatalog { templates }
    }

    /// Overlay templates from `dir/*.txt`; the file stem is the template
    /// name and its variables are derived from the body.
    pub fn override_from_dir(&mut self, dir: &Path) -> Result<()> {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Config(format!("bad template file name: {}", path.display())))?
                .to_string();
            let body = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let template = PromptTemplate::parse(name.clone(), body.trim_end_matches('\n'))?;
            self.templates.insert(name, template);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate> {
        self.templates
            .get(name)
            .ok_or_else(|| Error::UnknownTemplate(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }
}

impl Default for PromptCatalog {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_loads_consistently() {
        let catalog = PromptCatalog::builtin();
        assert_eq!(catalog.names().count(), BUILTIN.len());
    }

    #[test]
    fn entity_template_renders_paper_phrasing() {
        let catalog = PromptCatalog::builtin();
        let out = catalog
            .get("entity_extraction")
            .unwrap()
            .render(&[("num_entities", "1"), ("passage", "Some passage.")])
            .unwrap();
        assert!(out.contains("Identify up to 1 key themes or entities"), "{out}");
        assert!(out.ends_with("Entities and terms:"), "{out}");
    }

    #[test]
    fn unknown_template_is_an_error() {
        let catalog = PromptCatalog::builtin();
        assert!(matches!(catalog.get("nope"), Err(Error::UnknownTemplate(_))));
    }

    #[test]
    fn directory_override_replaces_builtin() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("verbalise.txt"), "Custom {caption}").unwrap();
        let mut catalog = PromptCatalog::builtin();
        catalog.override_from_dir(dir.path()).unwrap();
        let out = catalog
            .get("verbalise")
            .unwrap()
            .render(&[("caption", "X")])
            .unwrap();
        assert_eq!(out, "Custom X");
    }
}
