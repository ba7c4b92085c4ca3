//! Generic-tracking annotation records and the caption grammar.
//!
//! A caption takes one of two shapes:
//!
//! ```text
//! Track <include> <class>
//! Track <include> <class> while excluding <exclude> <class>
//! ```
//!
//! Parsing is anchored on the annotation's `class_name` (then its synonyms),
//! matched case-insensitively and tolerant of a plural suffix.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema error in field `{0}`")]
    Schema(String),
    #[error("caption does not match template near: {0:?}")]
    CaptionGrammar(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmotAnnotation {
    pub class_name: String,
    pub class_synonyms: Vec<String>,
    pub definition: String,
    pub include_attributes: Vec<String>,
    pub exclude_attributes: Vec<String>,
    pub caption: String,
    pub track_path: String,
}

/// The three prompts fed to the detector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionQuery {
    pub general: String,
    pub include: String,
    /// Empty when the caption has no exclusion clause.
    pub exclude: String,
}

impl CaptionQuery {
    pub fn has_exclusion(&self) -> bool {
        !self.exclude.is_empty()
    }
}

fn required_string(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String, AnnotationError> {
    match obj.get(key) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
        _ => Err(AnnotationError::Schema(key.to_string())),
    }
}

fn optional_string(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String, AnnotationError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(AnnotationError::Schema(key.to_string())),
    }
}

fn string_list(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Vec<String>, AnnotationError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|item| match item {
                Value::String(s) => Ok(s.clone()),
                _ => Err(AnnotationError::Schema(key.to_string())),
            })
            .collect(),
        // A bare string is accepted as a one-element list.
        Some(Value::String(s)) => Ok(vec![s.clone()]),
        Some(_) => Err(AnnotationError::Schema(key.to_string())),
    }
}

/// Parses one annotation object from JSON bytes.
pub fn parse_annotation(raw: &[u8]) -> Result<GmotAnnotation, AnnotationError> {
    let value: Value = serde_json::from_slice(raw)?;
    let obj = value
        .as_object()
        .ok_or_else(|| AnnotationError::Schema("<root>".to_string()))?;
    Ok(GmotAnnotation {
        class_name: required_string(obj, "class_name")?,
        class_synonyms: string_list(obj, "class_synonyms")?,
        definition: optional_string(obj, "definition")?,
        include_attributes: string_list(obj, "include_attributes")?,
        exclude_attributes: string_list(obj, "exclude_attributes")?,
        caption: required_string(obj, "caption")?,
        track_path: optional_string(obj, "track_path")?,
    })
}

impl GmotAnnotation {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotation serializes")
    }

    pub fn query(&self) -> Result<CaptionQuery, AnnotationError> {
        parse_caption(&self.caption, self)
    }
}

/// Splits `text` at whitespace and returns (start, end) byte spans of each word.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                spans.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn plural_of(word: &str, base: &str) -> bool {
    word.strip_prefix(base).is_some_and(|rest| rest == "s" || rest == "es")
}

fn word_matches(caption_word: &str, anchor_word: &str, allow_plural: bool) -> bool {
    let c = caption_word.to_lowercase();
    let a = anchor_word.to_lowercase();
    c == a || (allow_plural && (plural_of(&c, &a) || plural_of(&a, &c)))
}

/// Finds `anchor` as the trailing words of `phrase`. Returns the byte offset
/// where the anchor begins.
fn trailing_anchor(phrase: &str, anchor: &str) -> Option<usize> {
    let words = word_spans(phrase);
    let anchor_words: Vec<&str> = anchor.split_whitespace().collect();
    if anchor_words.is_empty() || anchor_words.len() > words.len() {
        return None;
    }
    let offset = words.len() - anchor_words.len();
    let last = anchor_words.len() - 1;
    let all = anchor_words.iter().enumerate().all(|(k, aw)| {
        let (s, e) = words[offset + k];
        word_matches(&phrase[s..e], aw, k == last)
    });
    all.then(|| words[offset].0)
}

/// Splits `phrase` into (attribute, class phrase) using the class name and
/// its synonyms as anchors.
fn split_on_class<'a>(phrase: &'a str, ann: &GmotAnnotation) -> Option<(&'a str, &'a str)> {
    std::iter::once(&ann.class_name)
        .chain(ann.class_synonyms.iter())
        .find_map(|anchor| trailing_anchor(phrase, anchor))
        .map(|at| (phrase[..at].trim(), phrase[at..].trim()))
}

fn find_ignore_case(haystack: &str, needle: &str) -> Option<usize> {
    // ASCII-only lowering keeps byte offsets aligned with the original.
    let hay = haystack.to_ascii_lowercase();
    hay.find(&needle.to_ascii_lowercase())
}

const KEYWORD: &str = "track";
const EXCLUSION: &str = " while excluding ";

/// Parses a caption into general/include/exclude prompts, anchored on the
/// annotation's class name.
pub fn parse_caption(caption: &str, ann: &GmotAnnotation) -> Result<CaptionQuery, AnnotationError> {
    let text = caption.trim().trim_end_matches('.').trim_end();
    let spans = word_spans(text);
    let first = spans.first().map(|&(s, e)| &text[s..e]).unwrap_or("");
    if !first.eq_ignore_ascii_case(KEYWORD) {
        return Err(AnnotationError::CaptionGrammar(text.to_string()));
    }
    let body = &text[spans[0].1..];

    let (head, tail) = match find_ignore_case(body, EXCLUSION) {
        Some(at) => (&body[..at], Some(&body[at + EXCLUSION.len()..])),
        None => (body, None),
    };

    let (include, general) =
        split_on_class(head, ann).ok_or_else(|| AnnotationError::CaptionGrammar(head.trim().to_string()))?;
    let exclude = match tail {
        Some(tail) => {
            let (exclude, _) =
                split_on_class(tail, ann).ok_or_else(|| AnnotationError::CaptionGrammar(tail.trim().to_string()))?;
            if exclude.is_empty() {
                return Err(AnnotationError::CaptionGrammar(tail.trim().to_string()));
            }
            exclude
        }
        None => "",
    };
    Ok(CaptionQuery { general: general.to_string(), include: include.to_string(), exclude: exclude.to_string() })
}
