//! Datasets: the sparse boolean text format, a bag-of-words booleanizer and
//! synthetic generators.
//!
//! File format (UTF-8):
//!
//! ```text
//! 2              <- K, the feature count
//! 0 0            <- label, then strictly increasing true-feature indices
//! 1 1
//! ```
//!
//! Anything after `#` on a line is a comment. Two comment forms carry
//! optional names and are written back by [`Dataset::save`]:
//! `#label <id> <name>` and `#feature <index> <name>`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::literal::Literals;

pub type Label = u32;

/// A boolean feature vector stored as its sorted true indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolSample {
    pub features: Vec<u32>,
    pub label: Label,
}

impl BoolSample {
    /// Sorts and deduplicates the indices.
    pub fn new(mut features: Vec<u32>, label: Label) -> Self {
        features.sort_unstable();
        features.dedup();
        Self { features, label }
    }

    pub fn from_dense(bits: &[bool], label: Label) -> Self {
        let features = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i as u32))
            .collect();
        Self { features, label }
    }

    pub fn to_dense(&self, n_features: usize) -> Vec<bool> {
        let mut bits = vec![false; n_features];
        for &i in &self.features {
            bits[i as usize] = true;
        }
        bits
    }

    pub fn literals(&self, n_features: usize) -> Result<Literals> {
        Literals::from_true_indices(n_features, &self.features)
    }

    pub fn is_set(&self, feature: u32) -> bool {
        self.features.binary_search(&feature).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub n_features: usize,
    pub samples: Vec<BoolSample>,
    pub label_names: BTreeMap<Label, String>,
    /// Optional display names, either empty or one per feature.
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(n_features: usize, samples: Vec<BoolSample>) -> Result<Self> {
        let ds = Self {
            n_features,
            samples,
            ..Self::default()
        };
        ds.check()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct labels in ascending order.
    pub fn labels(&self) -> Vec<Label> {
        let mut labels: Vec<Label> = self.samples.iter().map(|s| s.label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn feature_name(&self, feature: usize) -> Option<&str> {
        self.feature_names.get(feature).map(String::as_str)
    }

    fn check(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::InvalidArgument("feature count must be at least 1".into()));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.features.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("sample {i}: indices not strictly increasing")));
            }
            if let Some(&last) = s.features.last() {
                if last as usize >= self.n_features {
                    return Err(Error::InvalidArgument(format!(
                        "sample {i}: index {last} out of range for {} features",
                        self.n_features
                    )));
                }
            }
        }
        if !self.feature_names.is_empty() && self.feature_names.len() != self.n_features {
            return Err(Error::InvalidArgument("feature name count differs from feature count".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses the text format; `origin` only labels error messages.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut n_features: Option<usize> = None;
        let mut samples = Vec::new();
        let mut label_names = BTreeMap::new();
        let mut named_features: BTreeMap<usize, String> = BTreeMap::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let (content, comment) = match raw.find('#') {
                Some(p) => (&raw[..p], Some(&raw[p + 1..])),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if let Some((kind, rest)) = c.split_once(' ') {
                    if kind == "label" || kind == "feature" {
                        let (id, name) = rest
                            .split_once(' ')
                            .ok_or_else(|| err(lineno, format!("malformed #{kind} directive")))?;
                        let id: usize = id
                            .parse()
                            .map_err(|_| err(lineno, format!("bad id {id:?} in #{kind} directive")))?;
                        if kind == "label" {
                            label_names.insert(id as Label, name.to_string());
                        } else {
                            named_features.insert(id, name.to_string());
                        }
                    }
                }
            }
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let Some(k) = n_features else {
                let k: usize = content
                    .parse()
                    .map_err(|_| err(lineno, format!("expected feature count, found {content:?}")))?;
                if k == 0 {
                    return Err(err(lineno, "feature count must be at least 1".into()));
                }
                n_features = Some(k);
                continue;
            };
            let mut fields = content.split_ascii_whitespace();
            let label_text = fields.next().unwrap_or_default();
            let label: Label = label_text
                .parse()
                .map_err(|_| err(lineno, format!("bad label {label_text:?}")))?;
            let mut features = Vec::new();
            for f in fields {
                let idx: u32 = f.parse().map_err(|_| err(lineno, format!("bad index {f:?}")))?;
                if idx as usize >= k {
                    return Err(err(lineno, format!("index {idx} out of range for {k} features")));
                }
                if features.last().is_some_and(|&prev| prev >= idx) {
                    return Err(err(lineno, format!("index {idx} is not strictly increasing")));
                }
                features.push(idx);
            }
            samples.push(BoolSample { features, label });
        }

        let n_features = n_features.ok_or_else(|| err(1, "missing feature count".into()))?;
        let mut feature_names = Vec::new();
        if !named_features.is_empty() {
            if named_features.len() != n_features || named_features.keys().copied().ne(0..n_features) {
                return Err(err(1, "#feature directives must name every feature exactly once".into()));
            }
            feature_names = named_features.into_values().collect();
        }
        Ok(Self {
            n_features,
            samples,
            label_names,
            feature_names,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n_features);
        for (id, name) in &self.label_names {
            let _ = writeln!(out, "#label {id} {name}");
        }
        for (i, name) in self.feature_names.iter().enumerate() {
            let _ = writeln!(out, "#feature {i} {name}");
        }
        for s in &self.samples {
            let _ = write!(out, "{}", s.label);
            for f in &s.features {
                let _ = write!(out, " {f}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BooleanizerConfig {
    pub vocabulary_size: usize,
}

/// Closed vocabulary fitted on a training corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Keeps the `vocabulary_size` tokens with the highest document
    /// frequency, ties broken lexicographically. Feature order is rank
    /// order.
    pub fn fit<'a>(documents: impl IntoIterator<Item = &'a str>, config: &BooleanizerConfig) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in documents {
            let mut seen: Vec<String> = tokenize(doc).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(config.vocabulary_size);
        let tokens: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self { tokens, index }
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

    /// Presence bits of the known tokens; unseen tokens contribute nothing.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut idx: Vec<u32> = tokenize(text).filter_map(|t| self.index.get(&t).copied()).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// A labelled raw document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledText {
    pub label: String,
    pub text: String,
}

impl LabeledText {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            text: text.into(),
        }
    }
}

/// Parses `<label>\t<text>` lines; blank lines are skipped.
pub fn parse_labeled_texts(content: &str, origin: impl AsRef<Path>) -> Result<Vec<LabeledText>> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let (label, text) = l.split_once('\t').ok_or_else(|| Error::Parse {
                path: origin.as_ref().to_path_buf(),
                line: i + 1,
                message: "expected <label><TAB><text>".into(),
            })?;
            Ok(LabeledText::new(label.trim(), text))
        })
        .collect()
}

/// Fits the vocabulary on `train` only and encodes both splits with it.
///
/// Label ids: when every training label is a decimal integer it is used as
/// is; otherwise labels are numbered in lexicographic order. Test labels
/// must occur in the training split.
pub fn booleanize_corpus(
    train: &[LabeledText],
    test: &[LabeledText],
    config: &BooleanizerConfig,
) -> Result<(Dataset, Dataset, Vocabulary)> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.vocabulary_size == 0 {
        return Err(Error::InvalidArgument("vocabulary size must be positive".into()));
    }
    let vocab = Vocabulary::fit(train.iter().map(|d| d.text.as_str()), config);
    if vocab.is_empty() {
        return Err(Error::InvalidArgument("training corpus contains no tokens".into()));
    }

    let mut names: Vec<&str> = train.iter().map(|d| d.label.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let numeric: Option<Vec<Label>> = names.iter().map(|n| n.parse().ok()).collect();
    let ids: HashMap<&str, Label> = match numeric {
        Some(nums) => names.iter().copied().zip(nums).collect(),
        None => names.iter().enumerate().map(|(i, &n)| (n, i as Label)).collect(),
    };
    let label_names: BTreeMap<Label, String> = ids.iter().map(|(&n, &id)| (id, n.to_string())).collect();

    let encode = |docs: &[LabeledText]| -> Result<Dataset> {
        let samples = docs
            .iter()
            .map(|d| {
                let label = *ids
                    .get(d.label.as_str())
                    .ok_or_else(|| Error::InvalidArgument(format!("label {:?} not present in training split", d.label)))?;
                Ok(BoolSample {
                    features: vocab.encode(&d.text),
                    label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            n_features: vocab.len(),
            samples,
            label_names: label_names.clone(),
            feature_names: vocab.tokens().to_vec(),
        })
    };
    Ok((encode(train)?, encode(test)?, vocab))
}

/// Uniform random `K`-bit inputs labelled by `x_0 AND NOT x_1`, each label
/// flipped independently with probability `noise_rate`.
pub fn synth_noisy_conjunction(n_samples: usize, n_features: usize, noise_rate: f64, seed: u64) -> Result<Dataset> {
    if n_features < 2 {
        return Err(Error::InvalidArgument("noisy conjunction needs at least 2 features".into()));
    }
    if !(0.0..0.5).contains(&noise_rate) {
        return Err(Error::InvalidArgument(format!("noise rate {noise_rate} outside [0, 0.5)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n_samples)
        .map(|_| {
            let bits: Vec<bool> = (0..n_features).map(|_| rng.random::<bool>()).collect();
            let clean = bits[0] && !bits[1];
            let flip = rng.random::<f64>() < noise_rate;
            BoolSample::from_dense(&bits, (clean != flip) as Label)
        })
        .collect();
    let mut ds = Dataset::new(n_features, samples)?;
    ds.label_names = BTreeMap::from([(0, "negative".into()), (1, "positive".into())]);
    Ok(ds)
}

/// The concept used by [`synth_noisy_conjunction`] before noise.
pub fn noisy_conjunction_concept(sample: &BoolSample) -> Label {
    (sample.is_set(0) && !sample.is_set(1)) as Label
}

/// Small synthetic four-topic text corpus shipped with the crate, in
/// `<label>\t<text>` form.
pub mod bundled {
    use super::{parse_labeled_texts, LabeledText};
    use crate::error::Result;

    pub const SAMPLE_TRAIN: &str = include_str!("../data/sample_train.tsv");
    pub const SAMPLE_TEST: &str = include_str!("../data/sample_test.tsv");

    pub fn sample_corpus() -> Result<(Vec<LabeledText>, Vec<LabeledText>)> {
        Ok((
            parse_labeled_texts(SAMPLE_TRAIN, "sample_train.tsv")?,
            parse_labeled_texts(SAMPLE_TEST, "sample_test.tsv")?,
        ))
    }
}
