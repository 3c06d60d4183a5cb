//! Prompt templates with `{placeholder}` slots.
//!
//! Literal braces are escaped by doubling (`{{`, `}}`). The set of
//! placeholders found in the body must equal the set of declared variables,
//! checked when a template is loaded.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    name: String,
    body: String,
    required_vars: BTreeSet<String>,
}

enum Piece {
    Literal(char),
    Placeholder(String),
}

fn scan(name: &str, body: &str) -> Result<Vec<Piece>> {
    let bad = |msg: String| Error::BadTemplate {
        template: name.to_string(),
        msg,
    };
    let mut pieces = Vec::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                if chars.peek() == Some(&'{') {
                    chars.next();
                    pieces.push(Piece::Literal('{'));
                    continue;
                }
                let mut var = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(v) if v.is_alphanumeric() || v == '_' => var.push(v),
                        Some(v) => return Err(bad(format!("invalid character {v:?} in placeholder"))),
                        None => return Err(bad("unclosed placeholder".into())),
                    }
                }
                if var.is_empty() {
                    return Err(bad("empty placeholder".into()));
                }
                pieces.push(Piece::Placeholder(var));
            }
            '}' => {
                if chars.peek() == Some(&'}') {
                    chars.next();
                    pieces.push(Piece::Literal('}'));
                } else {
                    return Err(bad("unmatched closing brace".into()));
                }
            }
            other => pieces.push(Piece::Literal(other)),
        }
    }
    Ok(pieces)
}

impl PromptTemplate {
    /// Parse a body, deriving the variable set from its placeholders.
    pub fn parse(name: impl Into<String>, body: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let body = body.into();
        let mut required_vars = BTreeSet::new();
        for piece in scan(&name, &body)? {
            if let Piece::Placeholder(v) = piece {
                required_vars.insert(v);
            }
        }
        Ok(PromptTemplate { name, body, required_vars })
    }

    /// Parse a body and check its placeholders against a declared variable
    /// set; any mismatch is a load-time error.
    pub fn with_required_vars(
        name: impl Into<String>,
        body: impl Into<String>,
        vars: &[&str],
    ) -> Result<Self> {
        let t = Self::parse(name, body)?;
        let declared: BTreeSet<String> = vars.iter().map(|v| v.to_string()).collect();
        if let Some(unknown) = t.required_vars.difference(&declared).next() {
            return Err(Error::BadTemplate {
                template: t.name.clone(),
                msg: format!("unknown placeholder {{{unknown}}} in body"),
            });
        }
        if let Some(unused) = declared.difference(&t.required_vars).next() {
            return Err(Error::BadTemplate {
                template: t.name.clone(),
                msg: format!("declared variable {unused} never appears in body"),
            });
        }
        Ok(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn required_vars(&self) -> &BTreeSet<String> {
        &self.required_vars
    }

    /// Substitute every placeholder exactly once.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<String> {
        let lookup = |v: &str| vars.iter().find(|(k, _)| *k == v).map(|(_, val)| *val);
        let mut out = String::with_capacity(self.body.len());
        for piece in scan(&self.name, &self.body)? {
            match piece {
                Piece::Literal(c) => out.push(c),
                Piece::Placeholder(v) => match lookup(&v) {
                    Some(val) => out.push_str(val),
                    None => {
                        return Err(Error::MissingVariable {
                            template: self.name.clone(),
                            var: v,
                        })
                    }
                },
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_simple_substitution() {
        let t = PromptTemplate::parse("t", "Hi {x}").unwrap();
        assert_eq!(t.render(&[("x", "a")]).unwrap(), "Hi a");
    }

    #[test]
    fn missing_variable_names_it() {
        let t = PromptTemplate::parse("t", "Hi {x}").unwrap();
        let err = t.render(&[]).unwrap_err();
        assert!(err.to_string().contains("missing variable x"), "{err}");
    }

    #[test]
    fn doubled_braces_are_literal() {
        let t = PromptTemplate::parse("t", "{{\"k\": {v}}}").unwrap();
        assert_eq!(t.render(&[("v", "1")]).unwrap(), "{\"k\": 1}");
    }

    #[test]
    fn undeclared_placeholder_is_load_error() {
        let err = PromptTemplate::with_required_vars("t", "Hi {x} {y}", &["x"]).unwrap_err();
        assert!(err.to_string().contains("unknown placeholder {y}"), "{err}");
    }

    #[test]
    fn unused_declared_var_is_load_error() {
        let err = PromptTemplate::with_required_vars("t", "Hi {x}", &["x", "z"]).unwrap_err();
        assert!(err.to_string().contains("never appears"), "{err}");
    }

    #[test]
    fn render_distinguishes_distinct_assignments() {
        let t = PromptTemplate::parse("t", "A={a} B={b}").unwrap();
        let r1 = t.render(&[("a", "1"), ("b", "2")]).unwrap();
        let r2 = t.render(&[("a", "2"), ("b", "1")]).unwrap();
        assert_ne!(r1, r2);
    }
}
