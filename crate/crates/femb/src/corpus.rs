//! Corpus types and readers for tagged and untagged text.
//!
//! Two plain-text formats are supported:
//!
//! * tagged: one `token<TAB>tag` per line, a blank line ends a sentence
//!   (two-column CoNLL style);
//! * untagged: one whitespace-tokenized sentence per line.
//!
//! A handful of token strings are reserved for boundary sentinels and the
//! unknown-feature marker and may not appear as corpus tokens.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Marker used for features below the vocabulary count threshold.
pub const UNK_VALUE: &str = "<UNK>";

/// True for strings reserved by the library: `<UNK>` and the boundary
/// sentinels `<s>`, `</s>`, `<s2>`, `</s2>`, ... produced by extraction.
pub fn is_reserved_token(token: &str) -> bool {
    if token == UNK_VALUE {
        return true;
    }
    let Some(inner) = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')) else {
        return false;
    };
    let inner = inner.strip_prefix('/').unwrap_or(inner);
    match inner.strip_prefix('s') {
        Some(rest) => rest.is_empty() || rest.chars().all(|c| c.is_ascii_digit()),
        None => false,
    }
}

fn check_token(token: &str) -> std::result::Result<(), String> {
    if token.is_empty() {
        return Err("empty token".to_string());
    }
    if is_reserved_token(token) {
        return Err(format!("token {token:?} is a reserved sentinel"));
    }
    Ok(())
}

/// An untagged sentence: a non-empty sequence of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Data("sentence has no tokens".to_string()));
        }
        for tok in &tokens {
            check_token(tok).map_err(Error::Data)?;
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A sentence with one gold tag per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    tokens: Vec<String>,
    tags: Vec<String>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<String>, tags: Vec<String>) -> Result<Self> {
        if tokens.len() != tags.len() {
            return Err(Error::Data(format!(
                "{} tokens but {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        if tags.iter().any(|t| t.is_empty()) {
            return Err(Error::Data("empty tag".to_string()));
        }
        let sentence = Sentence::new(tokens)?;
        Ok(TaggedSentence {
            tokens: sentence.tokens,
            tags,
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The sentence without its tags.
    pub fn untagged(&self) -> Sentence {
        Sentence {
            tokens: self.tokens.clone(),
        }
    }
}

/// Streaming reader for the tagged format.
pub struct TaggedReader {
    lines: io::Lines<BufReader<File>>,
    path: PathBuf,
    line_no: usize,
}

impl TaggedReader {
    fn parse_err(&self, line: usize, msg: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg,
        }
    }
}

impl Iterator for TaggedReader {
    type Item = Result<TaggedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        loop {
            let line = match self.lines.next() {
                None => {
                    if tokens.is_empty() {
                        return None;
                    }
                    return Some(
                        TaggedSentence::new(tokens, tags)
                            .map_err(|e| self.parse_err(self.line_no, e.to_string())),
                    );
                }
                Some(Err(e)) => return Some(Err(Error::io(&self.path, e))),
                Some(Ok(line)) => line,
            };
            self.line_no += 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                return Some(
                    TaggedSentence::new(tokens, tags)
                        .map_err(|e| self.parse_err(self.line_no, e.to_string())),
                );
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or("");
            let (Some(tag), None) = (fields.next(), fields.next()) else {
                return Some(Err(self.parse_err(
                    self.line_no,
                    format!("expected \"token<TAB>tag\", got {line:?}"),
                )));
            };
            if let Err(msg) = check_token(token) {
                return Some(Err(self.parse_err(self.line_no, msg)));
            }
            if tag.is_empty() {
                return Some(Err(self.parse_err(self.line_no, "empty tag".to_string())));
            }
            tokens.push(token.to_string());
            tags.push(tag.to_string());
        }
    }
}

/// Streaming reader for the untagged format.
pub struct UntaggedReader {
    lines: io::Lines<BufReader<File>>,
    path: PathBuf,
    line_no: usize,
}

impl Iterator for UntaggedReader {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next() {
                None => return None,
                Some(Err(e)) => return Some(Err(Error::io(&self.path, e))),
                Some(Ok(line)) => line,
            };
            self.line_no += 1;
            let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                continue;
            }
            return Some(Sentence::new(tokens).map_err(|e| Error::Parse {
                path: self.path.clone(),
                line: self.line_no,
                msg: e.to_string(),
            }));
        }
    }
}

pub fn read_tagged(path: &Path) -> Result<TaggedReader> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(TaggedReader {
        lines: BufReader::new(file).lines(),
        path: path.to_path_buf(),
        line_no: 0,
    })
}

pub fn read_untagged(path: &Path) -> Result<UntaggedReader> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(UntaggedReader {
        lines: BufReader::new(file).lines(),
        path: path.to_path_buf(),
        line_no: 0,
    })
}

pub fn read_tagged_to_vec(path: &Path) -> Result<Vec<TaggedSentence>> {
    read_tagged(path)?.collect()
}

pub fn read_untagged_to_vec(path: &Path) -> Result<Vec<Sentence>> {
    read_untagged(path)?.collect()
}

pub fn write_tagged<W: Write>(w: &mut W, sentences: &[TaggedSentence]) -> io::Result<()> {
    for sent in sentences {
        for (token, tag) in sent.tokens().iter().zip(sent.tags()) {
            writeln!(w, "{token}\t{tag}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_untagged<W: Write>(w: &mut W, sentences: &[Sentence]) -> io::Result<()> {
    for sent in sentences {
        writeln!(w, "{}", sent.tokens().join(" "))?;
    }
    Ok(())
}

pub fn write_tagged_file(path: &Path, sentences: &[TaggedSentence]) -> Result<()> {
    let mut file = io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_tagged(&mut file, sentences).map_err(|e| Error::io(path, e))?;
    file.flush().map_err(|e| Error::io(path, e))
}

pub fn write_untagged_file(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let mut file = io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_untagged(&mut file, sentences).map_err(|e| Error::io(path, e))?;
    file.flush().map_err(|e| Error::io(path, e))
}

/// Ordered tag inventory, closed after construction. Tag ids are assigned in
/// first-occurrence order and are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagInventory {
    tags: Vec<String>,
    index: HashMap<String, usize>,
}

impl TagInventory {
    pub fn from_corpus(sentences: &[TaggedSentence]) -> Self {
        let mut inv = TagInventory {
            tags: Vec::new(),
            index: HashMap::new(),
        };
        for sent in sentences {
            for tag in sent.tags() {
                if !inv.index.contains_key(tag) {
                    inv.index.insert(tag.clone(), inv.tags.len());
                    inv.tags.push(tag.clone());
                }
            }
        }
        inv
    }

    pub fn from_tags(tags: Vec<String>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, tag) in tags.iter().enumerate() {
            if index.insert(tag.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate tag {tag:?} in inventory")));
            }
        }
        Ok(TagInventory { tags, index })
    }

    pub fn id(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn tag(&self, id: usize) -> &str {
        &self.tags[id]
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tmp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn reads_tagged_sentence() {
        let f = tmp_file("The\tDT\nnew\tJJ\nhouse\tNN\n\n");
        let sents = read_tagged_to_vec(f.path()).unwrap();
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].tokens(), &["The", "new", "house"]);
        assert_eq!(sents[0].tags(), &["DT", "JJ", "NN"]);
    }

    #[test]
    fn reads_untagged_sentence() {
        let f = tmp_file("the new house\n");
        let sents = read_untagged_to_vec(f.path()).unwrap();
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].tokens(), &["the", "new", "house"]);
    }

    #[test]
    fn rejects_extra_field() {
        let f = tmp_file("The\tDT\tEXTRA\n");
        let err = read_tagged_to_vec(f.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn error_names_offending_line() {
        let f = tmp_file("The\tDT\nnew\n");
        let err = read_tagged_to_vec(f.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_stream() {
        let f = tmp_file("");
        assert!(read_tagged_to_vec(f.path()).unwrap().is_empty());
        assert!(read_untagged_to_vec(f.path()).unwrap().is_empty());
    }

    #[test]
    fn missing_trailing_blank_line_ok() {
        let f = tmp_file("a\tX\n\nb\tY");
        let sents = read_tagged_to_vec(f.path()).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[1].tokens(), &["b"]);
    }

    #[test]
    fn rejects_reserved_tokens() {
        for tok in ["<s>", "</s>", "<s2>", "</s2>", "<UNK>"] {
            assert!(is_reserved_token(tok), "{tok} should be reserved");
            let f = tmp_file(&format!("{tok}\tX\n"));
            assert!(read_tagged_to_vec(f.path()).is_err());
        }
        assert!(!is_reserved_token("<sven>"));
        assert!(!is_reserved_token("house"));
        assert!(!is_reserved_token("<"));
    }

    #[test]
    fn tagged_round_trip_is_byte_identical() {
        let text = "The\tDT\nnew\tJJ\n\nhouse\tNN\n\n";
        let f = tmp_file(text);
        let sents = read_tagged_to_vec(f.path()).unwrap();
        let mut out = Vec::new();
        write_tagged(&mut out, &sents).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn crlf_lines_accepted() {
        let f = tmp_file("a\tX\r\nb\tY\r\n\r\n");
        let sents = read_tagged_to_vec(f.path()).unwrap();
        assert_eq!(sents[0].tokens(), &["a", "b"]);
    }

    #[test]
    fn tag_inventory_first_occurrence_order() {
        let s1 = TaggedSentence::new(
            vec!["a".into(), "b".into()],
            vec!["NN".into(), "VB".into()],
        )
        .unwrap();
        let s2 = TaggedSentence::new(
            vec!["c".into(), "d".into()],
            vec!["VB".into(), "DT".into()],
        )
        .unwrap();
        let inv = TagInventory::from_corpus(&[s1, s2]);
        assert_eq!(inv.tags(), &["NN", "VB", "DT"]);
        assert_eq!(inv.id("DT"), Some(2));
        assert_eq!(inv.id("JJ"), None);
    }

    #[test]
    fn sentence_rejects_empty() {
        assert!(Sentence::new(vec![]).is_err());
        assert!(Sentence::new(vec!["".into()]).is_err());
        assert!(TaggedSentence::new(vec!["a".into()], vec![]).is_err());
    }
}
