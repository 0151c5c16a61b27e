//! Per-template unigram noise distributions, sampled via alias tables.

use rand::Rng;

use crate::error::{Error, Result};
use crate::vocab::FeatureVocab;

/// Walker/Vose alias table for O(1) draws from a discrete distribution.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    accept: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Build from non-negative integer weights. Returns None when the total
    /// weight is zero.
    pub fn new(weights: &[u64]) -> Option<Self> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return None;
        }
        let n = weights.len();
        let prob: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
        let mut accept: Vec<f64> = prob.iter().map(|p| p * n as f64).collect();
        let mut alias: Vec<usize> = (0..n).collect();

        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &a) in accept.iter().enumerate() {
            if a < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l;
            accept[l] -= 1.0 - accept[s];
            if accept[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1.0 up to rounding.
        for &i in small.iter().chain(large.iter()) {
            accept[i] = 1.0;
        }
        Some(AliasTable {
            prob,
            accept,
            alias,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let n = self.prob.len();
        let x = rng.random::<f64>() * n as f64;
        let mut i = x as usize;
        if i >= n {
            i = n - 1;
        }
        if x - i as f64 < self.accept[i] {
            i
        } else {
            self.alias[i]
        }
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.prob[i]
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }
}

/// One unigram distribution per template, proportional to vocabulary counts.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    tables: Vec<Option<AliasTable>>,
    offsets: Vec<usize>,
}

impl NoiseTable {
    pub fn from_vocab(vocab: &FeatureVocab) -> Self {
        let mut tables = Vec::with_capacity(vocab.num_templates());
        let mut offsets = Vec::with_capacity(vocab.num_templates());
        for t in 0..vocab.num_templates() {
            tables.push(AliasTable::new(vocab.counts(t)));
            offsets.push(vocab.offset(t));
        }
        NoiseTable { tables, offsets }
    }

    pub fn num_templates(&self) -> usize {
        self.tables.len()
    }

    /// True when template `t` has positive total count.
    pub fn has_mass(&self, t: usize) -> bool {
        self.tables[t].is_some()
    }

    /// Draw a global feature id from template `t` with probability
    /// proportional to its unigram count.
    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Result<usize> {
        match &self.tables[t] {
            Some(table) => Ok(self.offsets[t] + table.sample(rng)),
            None => Err(Error::Data(format!(
                "template {t} has an empty vocabulary, cannot sample negatives"
            ))),
        }
    }

    /// Unigram probability of local id `local` within template `t`.
    pub fn probability(&self, t: usize, local: usize) -> f64 {
        match &self.tables[t] {
            Some(table) => table.probability(local),
            None => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Template, TemplateKind, TemplateSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vocab_with_counts(counts: &[(&str, usize)]) -> FeatureVocab {
        let schema = TemplateSet::new(vec![Template::new(
            "w0",
            TemplateKind::Offset(0),
            true,
        )])
        .unwrap();
        let mut rows = Vec::new();
        for (value, n) in counts {
            for _ in 0..*n {
                rows.push(vec![value.to_string()]);
            }
        }
        FeatureVocab::build(&schema, rows, 1).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let vocab = vocab_with_counts(&[("a", 3), ("b", 1), ("c", 7), ("d", 2)]);
        let noise = NoiseTable::from_vocab(&vocab);
        let sum: f64 = (0..vocab.template_len(0))
            .map(|i| noise.probability(0, i))
            .sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for i in 1..vocab.template_len(0) {
            assert!(noise.probability(0, i) > 0.0);
        }
    }

    #[test]
    fn empirical_frequencies_match_counts() {
        let vocab = vocab_with_counts(&[("a", 3), ("b", 1)]);
        let noise = NoiseTable::from_vocab(&vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000usize;
        let mut hits = vec![0usize; vocab.template_len(0)];
        for _ in 0..n {
            let gid = noise.sample(0, &mut rng).unwrap();
            hits[gid - vocab.offset(0)] += 1;
        }
        let a = vocab.global_id(0, "a").unwrap();
        let b = vocab.global_id(0, "b").unwrap();
        assert!((hits[a] as f64 / n as f64 - 0.75).abs() < 0.005);
        assert!((hits[b] as f64 / n as f64 - 0.25).abs() < 0.005);
        assert_eq!(hits[0], 0, "UNK has zero mass here");
    }

    #[test]
    fn single_feature_always_sampled() {
        let vocab = vocab_with_counts(&[("only", 5)]);
        let noise = NoiseTable::from_vocab(&vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gid = vocab.global_id(0, "only").unwrap();
        for _ in 0..100 {
            assert_eq!(noise.sample(0, &mut rng).unwrap(), gid);
        }
    }

    #[test]
    fn chi_square_goodness_of_fit() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};

        let vocab = vocab_with_counts(&[("a", 1), ("b", 1), ("c", 2)]);
        let noise = NoiseTable::from_vocab(&vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000usize;
        let mut hits = vec![0usize; vocab.template_len(0)];
        for _ in 0..n {
            let gid = noise.sample(0, &mut rng).unwrap();
            hits[gid - vocab.offset(0)] += 1;
        }
        let mut stat = 0.0;
        let mut dof = 0;
        for local in 0..vocab.template_len(0) {
            let p = noise.probability(0, local);
            if p == 0.0 {
                assert_eq!(hits[local], 0);
                continue;
            }
            let expected = p * n as f64;
            stat += (hits[local] as f64 - expected).powi(2) / expected;
            dof += 1;
        }
        let chi = ChiSquared::new((dof - 1) as f64).unwrap();
        let p_value = 1.0 - chi.cdf(stat);
        assert!(p_value > 0.001, "chi-square p-value {p_value} too small");
    }

    #[test]
    fn empty_template_errors() {
        let table = AliasTable::new(&[0, 0]);
        assert!(table.is_none());
        let schema = TemplateSet::new(vec![Template::new(
            "w0",
            TemplateKind::Offset(0),
            true,
        )])
        .unwrap();
        // min_count high enough that everything folds into UNK: mass stays
        // positive (UNK carries it), so sampling still works.
        let vocab = FeatureVocab::build(&schema, vec![vec!["x".to_string()]], 5).unwrap();
        let noise = NoiseTable::from_vocab(&vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(noise.sample(0, &mut rng).unwrap(), vocab.unk_global(0));
    }
}
