//! Input/output embedding tables over the embedded-template feature space,
//! plus the word2vec-style text persistence format.
//!
//! On disk a model is a header line `COUNT DIM` followed by one line per
//! feature, `templateName=value v1 ... vd`, holding the input embeddings in
//! row order (each template's UNK row first, then its features in id order).
//! Output embeddings can be saved to a sidecar with the extra extension
//! `.out` in the same format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{TemplateKind, TemplateSet};
use crate::vocab::FeatureVocab;

/// Row bookkeeping: which global feature ids own an embedding row, and in
/// which order rows are laid out.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub rows: usize,
    pub row_of_global: Vec<usize>,
    pub labels: Vec<String>,
    pub dense_templates: Vec<usize>,
}

pub(crate) const NO_ROW: usize = usize::MAX;

impl Layout {
    /// One row per feature of every embedded template, in schema order.
    pub fn partition(schema: &TemplateSet, vocab: &FeatureVocab) -> Layout {
        let mut row_of_global = vec![NO_ROW; vocab.total_size()];
        let mut labels = Vec::new();
        let mut rows = 0;
        for &t in schema.embedded() {
            let name = &schema.get(t).name;
            for local in 0..vocab.template_len(t) {
                row_of_global[vocab.offset(t) + local] = rows;
                labels.push(format!("{name}={}", vocab.value(t, local)));
                rows += 1;
            }
        }
        Layout {
            rows,
            row_of_global,
            labels,
            dense_templates: schema.embedded().to_vec(),
        }
    }
}

/// Learned feature embeddings: an input and an output matrix indexed by the
/// global feature ids of the embedded templates.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    schema: Arc<TemplateSet>,
    vocab: Arc<FeatureVocab>,
    dim: usize,
    rows: usize,
    row_of_global: Vec<usize>,
    labels: Vec<String>,
    dense_templates: Vec<usize>,
    input: Arc<Vec<f64>>,
    output: Arc<Vec<f64>>,
}

impl EmbeddingModel {
    pub(crate) fn from_layout(
        schema: Arc<TemplateSet>,
        vocab: Arc<FeatureVocab>,
        dim: usize,
        layout: Layout,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> Result<Self> {
        if input.len() != layout.rows * dim || output.len() != layout.rows * dim {
            return Err(Error::Data(format!(
                "embedding matrix size mismatch: {} rows x {dim} dims vs {} / {} values",
                layout.rows,
                input.len(),
                output.len()
            )));
        }
        if input.iter().chain(output.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Numeric(
                "non-finite value in embedding matrices".to_string(),
            ));
        }
        Ok(EmbeddingModel {
            schema,
            vocab,
            dim,
            rows: layout.rows,
            row_of_global: layout.row_of_global,
            labels: layout.labels,
            dense_templates: layout.dense_templates,
            input: Arc::new(input),
            output: Arc::new(output),
        })
    }

    /// Build a model from explicit matrices laid out in partition order
    /// (embedded templates in schema order, local ids within each).
    pub fn from_parts(
        schema: Arc<TemplateSet>,
        vocab: Arc<FeatureVocab>,
        dim: usize,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> Result<Self> {
        let layout = Layout::partition(&schema, &vocab);
        Self::from_layout(schema, vocab, dim, layout, input, output)
    }

    /// Standard initialization: input rows uniform in [-0.5/d, +0.5/d],
    /// output rows zero.
    pub(crate) fn init_matrices(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let input = (0..rows * dim)
            .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
            .collect();
        (input, vec![0.0; rows * dim])
    }

    pub fn schema(&self) -> &Arc<TemplateSet> {
        &self.schema
    }

    pub fn vocab(&self) -> &Arc<FeatureVocab> {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Schema indices of the templates contributing a dense block, in order.
    pub fn dense_templates(&self) -> &[usize] {
        &self.dense_templates
    }

    /// Length of the concatenated dense representation.
    pub fn dense_len(&self) -> usize {
        self.dense_templates.len() * self.dim
    }

    pub fn row_of(&self, global_id: usize) -> Option<usize> {
        match self.row_of_global.get(global_id) {
            Some(&row) if row != NO_ROW => Some(row),
            _ => None,
        }
    }

    fn resolve_row(&self, global_id: usize) -> Result<usize> {
        if global_id >= self.row_of_global.len() {
            return Err(Error::Data(format!(
                "feature id {global_id} out of model range ({})",
                self.row_of_global.len()
            )));
        }
        match self.row_of_global[global_id] {
            NO_ROW => Err(Error::Data(format!(
                "feature id {global_id} has no embedding row"
            ))),
            row => Ok(row),
        }
    }

    pub fn input_row(&self, global_id: usize) -> Result<&[f64]> {
        let row = self.resolve_row(global_id)?;
        Ok(&self.input[row * self.dim..(row + 1) * self.dim])
    }

    pub fn output_row(&self, global_id: usize) -> Result<&[f64]> {
        let row = self.resolve_row(global_id)?;
        Ok(&self.output[row * self.dim..(row + 1) * self.dim])
    }

    /// Whole input matrix in row-major order (for bit-level comparisons).
    pub fn input_matrix(&self) -> &[f64] {
        &self.input
    }

    pub fn output_matrix(&self) -> &[f64] {
        &self.output
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Overwrite one input row; values must be finite and of length `dim`.
    pub fn set_input_row(&mut self, global_id: usize, values: &[f64]) -> Result<()> {
        let row = self.resolve_row(global_id)?;
        check_row(values, self.dim)?;
        let dim = self.dim;
        Arc::make_mut(&mut self.input)[row * dim..(row + 1) * dim].copy_from_slice(values);
        Ok(())
    }

    /// Overwrite one output row; values must be finite and of length `dim`.
    pub fn set_output_row(&mut self, global_id: usize, values: &[f64]) -> Result<()> {
        let row = self.resolve_row(global_id)?;
        check_row(values, self.dim)?;
        let dim = self.dim;
        Arc::make_mut(&mut self.output)[row * dim..(row + 1) * dim].copy_from_slice(values);
        Ok(())
    }

    /// Reinterpret a single-template word model over `schema`: every offset
    /// template of `schema` shares the word rows, so each word-valued slot of
    /// an instance gets the word's embedding. Used by the word-embedding
    /// baseline.
    pub fn adapt_to_schema(&self, schema: &Arc<TemplateSet>) -> Result<EmbeddingModel> {
        if self.schema.len() != 1 || self.dense_templates.len() != 1 {
            return Err(Error::Data(
                "only single-template word models can be adapted to a schema".to_string(),
            ));
        }
        let words: Vec<(String, u64)> = self
            .vocab
            .entries(0)
            .map(|(v, c)| (v.to_string(), c))
            .collect();
        let mut entries = Vec::with_capacity(schema.len());
        let mut dense_templates = Vec::new();
        for (t, template) in schema.templates().iter().enumerate() {
            if matches!(template.kind, TemplateKind::Offset(_)) {
                entries.push(words.clone());
                dense_templates.push(t);
            } else {
                entries.push(vec![(crate::corpus::UNK_VALUE.to_string(), 0)]);
            }
        }
        if dense_templates.is_empty() {
            return Err(Error::Data(
                "target schema has no offset templates to attach word embeddings to".to_string(),
            ));
        }
        let vocab = Arc::new(FeatureVocab::from_entries(entries)?);
        let mut row_of_global = vec![NO_ROW; vocab.total_size()];
        for &t in &dense_templates {
            for local in 0..vocab.template_len(t) {
                row_of_global[vocab.offset(t) + local] = local;
            }
        }
        Ok(EmbeddingModel {
            schema: schema.clone(),
            vocab,
            dim: self.dim,
            rows: self.rows,
            row_of_global,
            labels: self.labels.clone(),
            dense_templates,
            input: self.input.clone(),
            output: self.output.clone(),
        })
    }

    /// Write the input embeddings as text; with `include_output` the output
    /// embeddings go to a `.out` sidecar next to `path`.
    pub fn save_text(&self, path: &Path, include_output: bool) -> Result<()> {
        write_matrix(path, &self.labels, &self.input, self.rows, self.dim)?;
        if include_output {
            write_matrix(
                &sidecar_path(path),
                &self.labels,
                &self.output,
                self.rows,
                self.dim,
            )?;
        }
        Ok(())
    }

    /// Reload a text model. Feature ids are assigned in file order, which
    /// reproduces the ids of the saving model; counts are not stored in this
    /// format, so the restored vocabulary carries zero counts and is only
    /// usable for lookups, not for building noise distributions.
    pub fn load_text(path: &Path, schema: Arc<TemplateSet>) -> Result<EmbeddingModel> {
        let (labels, vectors, dim) = read_matrix(path)?;

        let mut entries: Vec<Vec<(String, u64)>> = vec![Vec::new(); schema.len()];
        let mut order = Vec::with_capacity(labels.len());
        for label in &labels {
            let Some((name, value)) = label.split_once('=') else {
                return Err(Error::Model {
                    path: path.to_path_buf(),
                    msg: format!("feature label {label:?} has no '='"),
                });
            };
            let Some(t) = schema.index_of(name) else {
                return Err(Error::Model {
                    path: path.to_path_buf(),
                    msg: format!("unknown template {name:?} in feature label"),
                });
            };
            order.push((t, entries[t].len()));
            entries[t].push((value.to_string(), 0));
        }
        for (t, list) in entries.iter_mut().enumerate() {
            if list.is_empty() {
                list.push((crate::corpus::UNK_VALUE.to_string(), 0));
            } else if schema.embedded().binary_search(&t).is_err() {
                return Err(Error::Model {
                    path: path.to_path_buf(),
                    msg: format!(
                        "template {:?} is not embedded but appears in the file",
                        schema.get(t).name
                    ),
                });
            }
        }
        let vocab = Arc::new(FeatureVocab::from_entries(entries).map_err(|e| Error::Model {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?);
        let layout = Layout::partition(&schema, &vocab);
        if layout.rows != labels.len() {
            return Err(Error::Model {
                path: path.to_path_buf(),
                msg: format!(
                    "file lists {} embedded features but schema layout needs {}",
                    labels.len(),
                    layout.rows
                ),
            });
        }

        let mut input = vec![0.0; layout.rows * dim];
        for ((t, local), vector) in order.iter().zip(&vectors) {
            let row = layout.row_of_global[vocab.offset(*t) + *local];
            input[row * dim..(row + 1) * dim].copy_from_slice(vector);
        }

        let out_path = sidecar_path(path);
        let output = if out_path.exists() {
            let (out_labels, out_vectors, out_dim) = read_matrix(&out_path)?;
            if out_dim != dim || out_labels != labels {
                return Err(Error::Model {
                    path: out_path,
                    msg: "output sidecar does not match input embeddings".to_string(),
                });
            }
            let mut output = vec![0.0; layout.rows * dim];
            for ((t, local), vector) in order.iter().zip(&out_vectors) {
                let row = layout.row_of_global[vocab.offset(*t) + *local];
                output[row * dim..(row + 1) * dim].copy_from_slice(vector);
            }
            output
        } else {
            vec![0.0; layout.rows * dim]
        };

        EmbeddingModel::from_layout(schema, vocab, dim, layout, input, output)
    }
}

fn check_row(values: &[f64], dim: usize) -> Result<()> {
    if values.len() != dim {
        return Err(Error::Data(format!(
            "row has {} values, expected {dim}",
            values.len()
        )));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite embedding value".to_string()));
    }
    Ok(())
}

pub(crate) fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".out");
    PathBuf::from(s)
}

fn write_matrix(path: &Path, labels: &[String], data: &[f64], rows: usize, dim: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{rows} {dim}").map_err(io_err)?;
    for (row, label) in labels.iter().enumerate() {
        write!(w, "{label}").map_err(io_err)?;
        for v in &data[row * dim..(row + 1) * dim] {
            write!(w, " {v}").map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[allow(clippy::type_complexity)]
fn read_matrix(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>, usize)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let model_err = |msg: String| Error::Model {
        path: path.to_path_buf(),
        msg,
    };

    let header = lines
        .next()
        .ok_or_else(|| model_err("empty file".to_string()))?
        .map_err(|e| Error::io(path, e))?;
    let mut parts = header.split_whitespace();
    let (count, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => {
            let count: usize = c
                .parse()
                .map_err(|_| model_err(format!("bad header {header:?}")))?;
            let dim: usize = d
                .parse()
                .map_err(|_| model_err(format!("bad header {header:?}")))?;
            (count, dim)
        }
        _ => return Err(model_err(format!("bad header {header:?}"))),
    };
    if dim == 0 {
        return Err(model_err("dimension must be positive".to_string()));
    }

    let mut labels = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for (no, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let label = fields
            .next()
            .ok_or_else(|| model_err(format!("line {}: empty", no + 2)))?;
        let mut vector = Vec::with_capacity(dim);
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| model_err(format!("line {}: bad number {field:?}", no + 2)))?;
            if !v.is_finite() {
                return Err(model_err(format!("line {}: non-finite value", no + 2)));
            }
            vector.push(v);
        }
        if vector.len() != dim {
            return Err(model_err(format!(
                "line {}: {} values, expected {dim}",
                no + 2,
                vector.len()
            )));
        }
        labels.push(label.to_string());
        vectors.push(vector);
    }
    if labels.len() != count {
        return Err(model_err(format!(
            "header promises {count} rows but file has {}",
            labels.len()
        )));
    }
    Ok((labels, vectors, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Template, TemplateKind};
    use rand::SeedableRng;

    fn toy_model(dim: usize) -> EmbeddingModel {
        let schema = Arc::new(
            TemplateSet::new(vec![
                Template::new("w0", TemplateKind::Offset(0), true),
                Template::new("w+1", TemplateKind::Offset(1), true),
                Template::new(
                    "contains-digit",
                    TemplateKind::Binary(crate::features::Predicate::ContainsDigit),
                    false,
                ),
            ])
            .unwrap(),
        );
        let rows = vec![
            vec!["a".to_string(), "x".to_string(), "false".to_string()],
            vec!["b".to_string(), "y".to_string(), "false".to_string()],
        ];
        let vocab = Arc::new(FeatureVocab::build(&schema, rows, 1).unwrap());
        let layout = Layout::partition(&schema, &vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (input, output) = EmbeddingModel::init_matrices(layout.rows, dim, &mut rng);
        EmbeddingModel::from_layout(schema, vocab, dim, layout, input, output).unwrap()
    }

    #[test]
    fn partition_skips_non_embedded_templates() {
        let model = toy_model(4);
        assert_eq!(model.rows(), 6, "2 templates x (UNK + 2 values)");
        assert_eq!(model.dense_templates(), &[0, 1]);
        let vocab = model.vocab().clone();
        let digit_id = vocab.global_or_unk(2, "false");
        assert!(model.row_of(digit_id).is_none());
        assert!(model.input_row(digit_id).is_err());
    }

    #[test]
    fn id_out_of_range_is_error() {
        let model = toy_model(4);
        assert!(model.input_row(10_000).is_err());
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let model = toy_model(7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.emb");
        model.save_text(&path, true).unwrap();

        let reloaded = EmbeddingModel::load_text(&path, model.schema().clone()).unwrap();
        assert_eq!(reloaded.dim(), model.dim());
        assert_eq!(reloaded.rows(), model.rows());
        assert_eq!(reloaded.input_matrix(), model.input_matrix());
        assert_eq!(reloaded.output_matrix(), model.output_matrix());
        assert_eq!(reloaded.labels(), model.labels());

        let a = model.vocab().global_id(0, "a").unwrap();
        let a2 = reloaded.vocab().global_id(0, "a").unwrap();
        assert_eq!(a, a2, "ids preserved across reload");
    }

    #[test]
    fn line_count_matches_header() {
        let model = toy_model(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.emb");
        model.save_text(&path, false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        let count: usize = header.split_whitespace().next().unwrap().parse().unwrap();
        assert_eq!(count, lines.filter(|l| !l.trim().is_empty()).count());
        assert_eq!(count, model.rows());
    }

    #[test]
    fn corrupt_header_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.emb");
        std::fs::write(&path, "not a header\nw0=a 1.0\n").unwrap();
        let schema = Arc::new(TemplateSet::default_set());
        assert!(EmbeddingModel::load_text(&path, schema).is_err());
    }

    #[test]
    fn truncated_file_is_error() {
        let model = toy_model(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.emb");
        model.save_text(&path, false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(3).collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        assert!(EmbeddingModel::load_text(&path, model.schema().clone()).is_err());
    }

    #[test]
    fn set_rows_rejects_non_finite() {
        let mut model = toy_model(2);
        let gid = model.vocab().global_id(0, "a").unwrap();
        assert!(model.set_input_row(gid, &[f64::NAN, 0.0]).is_err());
        assert!(model.set_input_row(gid, &[1.0]).is_err());
        model.set_input_row(gid, &[1.0, -2.0]).unwrap();
        assert_eq!(model.input_row(gid).unwrap(), &[1.0, -2.0]);
    }
}
