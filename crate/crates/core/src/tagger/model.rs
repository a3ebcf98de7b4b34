use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, HardLabeling, Provenance, Sentence, SoftLabeling, TagSet};
use crate::error::{Error, IoContext, Result};
use crate::tagger::features::{FeatureConfig, FeatureDict};
use crate::tagger::inference::{sequence_score, viterbi, Lattice};
use crate::tagger::Tagger;

const FORMAT: &str = "refboot-tagger";
const VERSION: u32 = 1;

/// Linear-chain log-linear tagger: sparse emission weights per
/// (feature, tag) and a dense tag-to-tag transition matrix.
#[derive(Clone, Debug)]
pub struct TaggerModel {
    pub(crate) tags: TagSet,
    pub(crate) features: FeatureConfig,
    pub(crate) dict: FeatureDict,
    /// Row-major `n_features x n_tags`.
    pub(crate) emission: Vec<f64>,
    /// Row-major `n_tags x n_tags`, previous tag first.
    pub(crate) transitions: Vec<f64>,
    pub(crate) epoch: u64,
}

impl PartialEq for TaggerModel {
    fn eq(&self, other: &Self) -> bool {
        self.tags == other.tags
            && self.features == other.features
            && self.dict.names() == other.dict.names()
            && self.emission == other.emission
            && self.transitions == other.transitions
            && self.epoch == other.epoch
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    tags: TagSet,
    features: FeatureConfig,
    epoch: u64,
    transitions: Vec<f64>,
    feature_names: Vec<String>,
    emission: Vec<f64>,
}

impl TaggerModel {
    /// All-zero model with an empty feature dictionary.
    pub fn new(tags: TagSet, features: FeatureConfig) -> Self {
        let nt = tags.len();
        Self {
            tags,
            features,
            dict: FeatureDict::default(),
            emission: Vec::new(),
            transitions: vec![0.0; nt * nt],
            epoch: 0,
        }
    }

    pub fn tags(&self) -> &TagSet {
        &self.tags
    }

    pub fn feature_config(&self) -> FeatureConfig {
        self.features
    }

    pub fn n_features(&self) -> usize {
        self.dict.len()
    }

    pub fn n_tags(&self) -> usize {
        self.tags.len()
    }

    /// Number of completed training epochs across all rounds.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn feature_id(&self, name: &str) -> Option<u32> {
        self.dict.get(name)
    }

    pub fn emission_weight(&self, feature: &str, tag: usize) -> f64 {
        self.dict
            .get(feature)
            .map_or(0.0, |f| self.emission[f as usize * self.n_tags() + tag])
    }

    /// Sets an emission weight, adding the feature to the dictionary if new.
    pub fn set_emission_weight(&mut self, feature: &str, tag: usize, value: f64) {
        let f = self.intern(feature.to_string());
        let nt = self.n_tags();
        self.emission[f as usize * nt + tag] = value;
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions[from * self.n_tags() + to]
    }

    pub fn set_transition(&mut self, from: usize, to: usize, value: f64) {
        let nt = self.n_tags();
        self.transitions[from * nt + to] = value;
    }

    /// Flat parameter vector: emission weights followed by transitions.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.emission.clone();
        p.extend_from_slice(&self.transitions);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.emission.len() + self.transitions.len());
        let (e, t) = params.split_at(self.emission.len());
        self.emission.copy_from_slice(e);
        self.transitions.copy_from_slice(t);
    }

    pub(crate) fn intern(&mut self, name: String) -> u32 {
        let before = self.dict.len();
        let id = self.dict.get_or_insert(name);
        if self.dict.len() > before {
            self.emission.resize(self.dict.len() * self.n_tags(), 0.0);
        }
        id
    }

    /// Adds every feature fired by `data` to the dictionary.
    pub fn register_features(&mut self, data: &Dataset) {
        for s in &data.sentences {
            self.encode_growing(s);
        }
    }

    pub(crate) fn encode_growing(&mut self, sentence: &Sentence) -> Vec<Vec<u32>> {
        self.features
            .extract(sentence)
            .into_iter()
            .map(|fs| fs.into_iter().map(|f| self.intern(f)).collect())
            .collect()
    }

    /// Feature ids of every token; unknown features are dropped.
    pub(crate) fn encode(&self, sentence: &Sentence) -> Vec<Vec<u32>> {
        self.features
            .extract(sentence)
            .into_iter()
            .map(|fs| fs.iter().filter_map(|f| self.dict.get(f)).collect())
            .collect()
    }

    pub(crate) fn emission_scores(&self, encoded: &[Vec<u32>], scale: f64) -> Vec<Vec<f64>> {
        let nt = self.n_tags();
        encoded
            .iter()
            .map(|fs| {
                let mut row = vec![0.0; nt];
                for &f in fs {
                    let w = &self.emission[f as usize * nt..(f as usize + 1) * nt];
                    for (r, x) in row.iter_mut().zip(w) {
                        *r += x;
                    }
                }
                if scale != 1.0 {
                    row.iter_mut().for_each(|r| *r *= scale);
                }
                row
            })
            .collect()
    }

    fn potentials(&self, sentence: &Sentence) -> Vec<Vec<f64>> {
        self.emission_scores(&self.encode(sentence), 1.0)
    }

    /// Joint (unnormalized log) score of a tag sequence.
    pub fn sequence_score(&self, sentence: &Sentence, tags: &[usize]) -> f64 {
        sequence_score(&self.potentials(sentence), &self.transitions, tags)
    }

    pub fn log_partition(&self, sentence: &Sentence) -> f64 {
        Lattice::new(&self.potentials(sentence), &self.transitions).log_z
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            tags: self.tags.clone(),
            features: self.features,
            epoch: self.epoch,
            transitions: self.transitions.clone(),
            feature_names: self.dict.names().to_vec(),
            emission: self.emission.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(Error::InvalidConfig(format!(
                "not a tagger model: `{}`",
                file.format
            )));
        }
        if file.version != VERSION {
            return Err(Error::UnsupportedVersion(file.version));
        }
        let nt = file.tags.len();
        if file.transitions.len() != nt * nt || file.emission.len() != file.feature_names.len() * nt
        {
            return Err(Error::InvalidConfig(
                "weight dimensions do not match tag set".into(),
            ));
        }
        Ok(Self {
            tags: file.tags,
            features: file.features,
            dict: FeatureDict::from_names(file.feature_names),
            emission: file.emission,
            transitions: file.transitions,
            epoch: file.epoch,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).with_path(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).with_path(path)?)
    }
}

impl Tagger for TaggerModel {
    fn tag_set(&self) -> &TagSet {
        &self.tags
    }

    fn predict_soft(&self, sentence: &Sentence) -> SoftLabeling {
        let lattice = Lattice::new(&self.potentials(sentence), &self.transitions);
        SoftLabeling {
            dist: lattice.marginals(),
            provenance: vec![Provenance::Predicted; sentence.len()],
        }
    }

    fn predict_hard(&self, sentence: &Sentence) -> HardLabeling {
        HardLabeling::new(viterbi(&self.potentials(sentence), &self.transitions))
    }
}
