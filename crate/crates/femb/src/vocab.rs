//! Per-template feature vocabularies with occurrence counts.
//!
//! Each template owns a dense, contiguous local id space with the UNK marker
//! at local id 0; retained features follow in first-occurrence order. Global
//! ids are the local ids shifted by a per-template offset, so the mapping
//! (template, local) <-> global is bijective. The counts double as the
//! support of the per-template unigram noise distributions.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::corpus::UNK_VALUE;
use crate::error::{Error, Result};
use crate::features::TemplateSet;

#[derive(Debug, Clone)]
struct TemplateVocab {
    index: HashMap<String, usize>,
    values: Vec<String>,
    counts: Vec<u64>,
}

/// Immutable feature dictionary over all templates of one schema.
#[derive(Debug, Clone)]
pub struct FeatureVocab {
    templates: Vec<TemplateVocab>,
    offsets: Vec<usize>,
    total: usize,
}

impl FeatureVocab {
    /// Count feature values over a stream of extractions (one `Vec<String>`
    /// of per-template values per instance) and assign ids. Features seen
    /// fewer than `min_count` times are folded into the template's UNK id.
    pub fn build<I>(schema: &TemplateSet, extractions: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".to_string()));
        }
        let n = schema.len();
        let mut raw: Vec<IndexMap<String, u64>> = vec![IndexMap::new(); n];
        let mut instances = 0u64;
        for values in extractions {
            if values.len() != n {
                return Err(Error::Data(format!(
                    "extraction has {} values but schema has {n} templates",
                    values.len()
                )));
            }
            instances += 1;
            for (t, value) in values.into_iter().enumerate() {
                *raw[t].entry(value).or_insert(0) += 1;
            }
        }
        if instances == 0 {
            return Err(Error::Data("no instances".to_string()));
        }

        let mut templates = Vec::with_capacity(n);
        for counts in raw {
            let mut tv = TemplateVocab {
                index: HashMap::new(),
                values: vec![UNK_VALUE.to_string()],
                counts: vec![0],
            };
            tv.index.insert(UNK_VALUE.to_string(), 0);
            for (value, count) in counts {
                if count >= min_count && value != UNK_VALUE {
                    tv.index.insert(value.clone(), tv.values.len());
                    tv.values.push(value);
                    tv.counts.push(count);
                } else {
                    tv.counts[0] += count;
                }
            }
            templates.push(tv);
        }
        Ok(Self::assemble(templates))
    }

    /// Rebuild a vocabulary from per-template `(value, count)` lists in local
    /// id order. The first entry of every template must be the UNK marker.
    /// Used when restoring models from disk.
    pub fn from_entries(entries: Vec<Vec<(String, u64)>>) -> Result<Self> {
        let mut templates = Vec::with_capacity(entries.len());
        for (t, list) in entries.into_iter().enumerate() {
            match list.first() {
                Some((v, _)) if v == UNK_VALUE => {}
                _ => {
                    return Err(Error::Data(format!(
                        "template {t}: first vocabulary entry must be {UNK_VALUE}"
                    )));
                }
            }
            let mut tv = TemplateVocab {
                index: HashMap::new(),
                values: Vec::with_capacity(list.len()),
                counts: Vec::with_capacity(list.len()),
            };
            for (value, count) in list {
                if tv.index.insert(value.clone(), tv.values.len()).is_some() {
                    return Err(Error::Data(format!(
                        "template {t}: duplicate vocabulary entry {value:?}"
                    )));
                }
                tv.values.push(value);
                tv.counts.push(count);
            }
            templates.push(tv);
        }
        if templates.is_empty() {
            return Err(Error::Data("vocabulary has no templates".to_string()));
        }
        Ok(Self::assemble(templates))
    }

    fn assemble(templates: Vec<TemplateVocab>) -> Self {
        let mut offsets = Vec::with_capacity(templates.len());
        let mut total = 0;
        for tv in &templates {
            offsets.push(total);
            total += tv.values.len();
        }
        FeatureVocab {
            templates,
            offsets,
            total,
        }
    }

    pub fn num_templates(&self) -> usize {
        self.templates.len()
    }

    /// First global id of template `t`; this is also the template's UNK id.
    pub fn offset(&self, t: usize) -> usize {
        self.offsets[t]
    }

    pub fn unk_global(&self, t: usize) -> usize {
        self.offsets[t]
    }

    /// Number of ids in template `t`, including UNK.
    pub fn template_len(&self, t: usize) -> usize {
        self.templates[t].values.len()
    }

    /// Size of the whole global id space.
    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn global_id(&self, t: usize, value: &str) -> Option<usize> {
        self.templates[t]
            .index
            .get(value)
            .map(|local| self.offsets[t] + local)
    }

    pub fn global_or_unk(&self, t: usize, value: &str) -> usize {
        self.global_id(t, value).unwrap_or(self.offsets[t])
    }

    /// Map a global id back to (template, local id). Panics if out of range.
    pub fn resolve(&self, global: usize) -> (usize, usize) {
        assert!(global < self.total, "global id {global} out of range");
        let t = match self.offsets.binary_search(&global) {
            Ok(t) => t,
            Err(ins) => ins - 1,
        };
        (t, global - self.offsets[t])
    }

    pub fn value(&self, t: usize, local: usize) -> &str {
        &self.templates[t].values[local]
    }

    pub fn count(&self, t: usize, local: usize) -> u64 {
        self.templates[t].counts[local]
    }

    /// Per-template counts in local id order (UNK first).
    pub fn counts(&self, t: usize) -> &[u64] {
        &self.templates[t].counts
    }

    pub fn template_total_count(&self, t: usize) -> u64 {
        self.templates[t].counts.iter().sum()
    }

    /// Entries of template `t` in local id order.
    pub fn entries(&self, t: usize) -> impl Iterator<Item = (&str, u64)> {
        self.templates[t]
            .values
            .iter()
            .map(String::as_str)
            .zip(self.templates[t].counts.iter().copied())
    }
}
