//! Feature templates and per-position instance extraction.
//!
//! A template set describes the features extracted at every token position.
//! Extraction always yields exactly one value per template: positions outside
//! the sentence produce boundary sentinels, affixes longer than the token
//! produce a distinct short-word value, so no template is ever inactive.

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::vocab::FeatureVocab;

/// Appended to the whole token when an affix template asks for more
/// characters than the token has.
pub const SHORT_MARKER: &str = "#SHORT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    ContainsDigit,
    ContainsUppercase,
    ContainsHyphen,
}

impl Predicate {
    fn test(self, token: &str) -> bool {
        match self {
            Predicate::ContainsDigit => token.chars().any(|c| c.is_numeric()),
            Predicate::ContainsUppercase => token.chars().any(|c| c.is_uppercase()),
            Predicate::ContainsHyphen => token.contains('-'),
        }
    }

    fn manifest_name(self) -> &'static str {
        match self {
            Predicate::ContainsDigit => "digit",
            Predicate::ContainsUppercase => "upper",
            Predicate::ContainsHyphen => "hyphen",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// Token at a relative position; out-of-range positions yield sentinels.
    Offset(i32),
    /// First `k` characters of the current token.
    Prefix(usize),
    /// Last `k` characters of the current token.
    Suffix(usize),
    /// "true"/"false" predicate on the current token.
    Binary(Predicate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub kind: TemplateKind,
    pub embedded: bool,
}

impl Template {
    pub fn new(name: &str, kind: TemplateKind, embedded: bool) -> Self {
        Template {
            name: name.to_string(),
            kind,
            embedded,
        }
    }
}

/// An ordered, named set of feature templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<Template>,
    embedded: Vec<usize>,
}

impl TemplateSet {
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::Config("template set is empty".to_string()));
        }
        for t in &templates {
            if t.name.is_empty() || t.name.contains(['=', ' ', '\t']) {
                return Err(Error::Config(format!(
                    "template name {:?} must be non-empty and free of '=', spaces and tabs",
                    t.name
                )));
            }
            match t.kind {
                TemplateKind::Prefix(0) | TemplateKind::Suffix(0) => {
                    return Err(Error::Config(format!(
                        "template {:?}: affix length must be at least 1",
                        t.name
                    )));
                }
                _ => {}
            }
        }
        for (i, t) in templates.iter().enumerate() {
            if templates[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::Config(format!("duplicate template name {:?}", t.name)));
            }
        }
        let embedded = templates
            .iter()
            .enumerate()
            .filter(|(_, t)| t.embedded)
            .map(|(i, _)| i)
            .collect();
        Ok(TemplateSet {
            templates,
            embedded,
        })
    }

    /// The default 16-template schema: five word-offset templates, prefixes
    /// and suffixes of length 1-4 (all thirteen embedded), and three
    /// non-embedded binary templates.
    pub fn default_set() -> Self {
        use TemplateKind::*;
        let mut templates = Vec::new();
        for o in -2i32..=2 {
            let name = match o {
                0 => "w0".to_string(),
                o if o > 0 => format!("w+{o}"),
                o => format!("w{o}"),
            };
            templates.push(Template::new(&name, Offset(o), true));
        }
        for k in 1..=4 {
            templates.push(Template::new(&format!("pre{k}"), Prefix(k), true));
        }
        for k in 1..=4 {
            templates.push(Template::new(&format!("suf{k}"), Suffix(k), true));
        }
        templates.push(Template::new(
            "contains-digit",
            Binary(Predicate::ContainsDigit),
            false,
        ));
        templates.push(Template::new(
            "contains-uppercase",
            Binary(Predicate::ContainsUppercase),
            false,
        ));
        templates.push(Template::new(
            "contains-hyphen",
            Binary(Predicate::ContainsHyphen),
            false,
        ));
        TemplateSet::new(templates).expect("default schema is valid")
    }

    /// Single-template schema over bare tokens, used by the word-embedding
    /// baseline.
    pub fn word_unigram() -> Self {
        TemplateSet::new(vec![Template::new("word", TemplateKind::Offset(0), true)])
            .expect("word schema is valid")
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn get(&self, index: usize) -> &Template {
        &self.templates[index]
    }

    /// Indices of embedded templates, in schema order.
    pub fn embedded(&self) -> &[usize] {
        &self.embedded
    }

    pub fn embedded_len(&self) -> usize {
        self.embedded.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.templates.iter().position(|t| t.name == name)
    }

    /// Plain-text manifest, one template descriptor per line:
    /// `name kind arg embedded|sparse`.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for t in &self.templates {
            let (kind, arg) = match t.kind {
                TemplateKind::Offset(o) => ("offset", o.to_string()),
                TemplateKind::Prefix(k) => ("prefix", k.to_string()),
                TemplateKind::Suffix(k) => ("suffix", k.to_string()),
                TemplateKind::Binary(p) => ("binary", p.manifest_name().to_string()),
            };
            let flag = if t.embedded { "embedded" } else { "sparse" };
            out.push_str(&format!("{} {} {} {}\n", t.name, kind, arg, flag));
        }
        out
    }

    pub fn parse_manifest(text: &str) -> Result<Self> {
        let mut templates = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| {
                Error::Data(format!("schema manifest line {}: {msg}: {line:?}", no + 1))
            };
            if fields.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let kind = match fields[1] {
                "offset" => TemplateKind::Offset(
                    fields[2].parse().map_err(|_| bad("bad offset"))?,
                ),
                "prefix" => TemplateKind::Prefix(
                    fields[2].parse().map_err(|_| bad("bad prefix length"))?,
                ),
                "suffix" => TemplateKind::Suffix(
                    fields[2].parse().map_err(|_| bad("bad suffix length"))?,
                ),
                "binary" => TemplateKind::Binary(match fields[2] {
                    "digit" => Predicate::ContainsDigit,
                    "upper" => Predicate::ContainsUppercase,
                    "hyphen" => Predicate::ContainsHyphen,
                    other => return Err(bad(&format!("unknown predicate {other:?}"))),
                }),
                other => return Err(bad(&format!("unknown kind {other:?}"))),
            };
            let embedded = match fields[3] {
                "embedded" => true,
                "sparse" => false,
                other => return Err(bad(&format!("unknown flag {other:?}"))),
            };
            templates.push(Template::new(fields[0], kind, embedded));
        }
        TemplateSet::new(templates)
    }
}

fn boundary_token(distance: usize, after: bool) -> String {
    match (distance, after) {
        (1, false) => "<s>".to_string(),
        (1, true) => "</s>".to_string(),
        (d, false) => format!("<s{d}>"),
        (d, true) => format!("</s{d}>"),
    }
}

fn affix(token: &str, k: usize, suffix: bool) -> String {
    let len = token.chars().count();
    if k > len {
        return format!("{token}{SHORT_MARKER}");
    }
    if suffix {
        token.chars().skip(len - k).collect()
    } else {
        token.chars().take(k).collect()
    }
}

/// Extract one feature value per template at `position`, in template order.
pub fn extract(sentence: &Sentence, position: usize, schema: &TemplateSet) -> Result<Vec<String>> {
    let tokens = sentence.tokens();
    if position >= tokens.len() {
        return Err(Error::Data(format!(
            "position {position} out of range for sentence of length {}",
            tokens.len()
        )));
    }
    let token = tokens[position].as_str();
    let mut values = Vec::with_capacity(schema.len());
    for template in schema.templates() {
        let value = match template.kind {
            TemplateKind::Offset(o) => {
                let idx = position as i64 + o as i64;
                if idx < 0 {
                    boundary_token((-idx) as usize, false)
                } else if idx >= tokens.len() as i64 {
                    boundary_token((idx - tokens.len() as i64 + 1) as usize, true)
                } else {
                    tokens[idx as usize].clone()
                }
            }
            TemplateKind::Prefix(k) => affix(token, k, false),
            TemplateKind::Suffix(k) => affix(token, k, true),
            TemplateKind::Binary(p) => {
                if p.test(token) {
                    "true".to_string()
                } else {
                    "false".to_string()
                }
            }
        };
        values.push(value);
    }
    Ok(values)
}

/// One extracted token position, encoded into the global feature-id space:
/// exactly one active feature per template, plus an optional gold tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub active: Vec<usize>,
    pub tag: Option<usize>,
}

/// Map extracted values onto global feature ids; unknown values fall back to
/// the template's UNK id.
pub fn encode(values: &[String], vocab: &FeatureVocab) -> Result<Instance> {
    if values.len() != vocab.num_templates() {
        return Err(Error::Data(format!(
            "extraction has {} values but vocabulary has {} templates",
            values.len(),
            vocab.num_templates()
        )));
    }
    let active = values
        .iter()
        .enumerate()
        .map(|(t, v)| vocab.global_or_unk(t, v))
        .collect();
    Ok(Instance { active, tag: None })
}
