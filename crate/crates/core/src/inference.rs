//! Ensemble prediction and the on-disk model directory.
//!
//! A model directory holds:
//!
//! * `manifest.json`: format version, dims, n-gram order, member count,
//!   member seeds and the tokenizer mode used for raw input.
//! * `vocab.tsv`: the vocabulary, `ngram<TAB>count` per line in id order.
//! * `member_<i>.bin`: one file per member, the tensors `E, W1, b1, W2, b2`
//!   as little-endian `f32`, row-major, concatenated without padding.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nncore::{forward, ModelDims, ModelParams, TENSOR_NAMES};
use crate::textproc::{TokenSeq, TokenizerMode};
use crate::training::TrainedModel;
use crate::vocab::{featurize, FeatureBag, NgramVocabulary};
use crate::Sentiment;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VOCAB_FILE: &str = "vocab.tsv";

pub fn member_file_name(index: usize) -> String {
    format!("member_{index}.bin")
}

/// Members trained against one vocabulary; predictions average their output
/// distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<TrainedModel>,
    vocab: NgramVocabulary,
    dims: ModelDims,
    /// Tokenizer applied to raw text at prediction time.
    pub tokenizer: TokenizerMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Mean of `member_ps`.
    pub p: [f64; 2],
    pub label: Sentiment,
    pub member_ps: Vec<[f32; 2]>,
}

impl Ensemble {
    pub fn new(members: Vec<TrainedModel>, vocab: NgramVocabulary, tokenizer: TokenizerMode) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Format("an ensemble needs at least one member".into()))?;
        let dims = first.params.dims;
        if dims.vocab_size != vocab.len() {
            return Err(Error::Format(format!(
                "model vocab_size {} differs from vocabulary size {}",
                dims.vocab_size,
                vocab.len()
            )));
        }
        for (i, m) in members.iter().enumerate() {
            if m.params.dims != dims {
                return Err(Error::Format(format!("member {i} has dims {:?}, expected {dims:?}", m.params.dims)));
            }
            m.params.check_shapes()?;
        }
        Ok(Ensemble {
            members,
            vocab,
            dims,
            tokenizer,
        })
    }

    pub fn members(&self) -> &[TrainedModel] {
        &self.members
    }

    pub fn vocab(&self) -> &NgramVocabulary {
        &self.vocab
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.seed).collect()
    }

    pub fn predict_bag(&self, bag: &FeatureBag) -> Result<Prediction> {
        let mut member_ps = Vec::with_capacity(self.members.len());
        let mut sum = [0.0f64; 2];
        for m in &self.members {
            let p = forward(&m.params, bag)?.p;
            sum[0] += p[0] as f64;
            sum[1] += p[1] as f64;
            member_ps.push(p);
        }
        let k = self.members.len() as f64;
        let p = [sum[0] / k, sum[1] / k];
        Ok(Prediction {
            p,
            label: Sentiment::from_distribution(&p),
            member_ps,
        })
    }

    pub fn predict_tokens(&self, tokens: &TokenSeq) -> Prediction {
        self.predict_bag(&featurize(tokens, &self.vocab))
            .expect("featurized ids are within the vocabulary")
    }
}

/// Normalize, tokenize with `mode`, featurize, and average member outputs.
pub fn predict(ensemble: &Ensemble, text: &str, mode: TokenizerMode) -> Prediction {
    ensemble.predict_tokens(&TokenSeq::analyze(text, mode))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dims: ModelDims,
    pub max_n: usize,
    pub member_count: usize,
    pub seeds: Vec<u64>,
    pub tokenizer: TokenizerMode,
}

pub fn params_to_bytes(params: &ModelParams<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(params.dims.param_count() * 4);
    for t in params.tensors() {
        for x in t {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn params_from_bytes(bytes: &[u8], dims: ModelDims, member: usize) -> Result<ModelParams<f32>> {
    let mut params = ModelParams::zeros(dims);
    let mut offset = 0usize;
    for (name, tensor) in TENSOR_NAMES.iter().zip(params.tensors_mut()) {
        let need = tensor.len() * 4;
        let chunk = bytes
            .get(offset..offset + need)
            .ok_or_else(|| Error::Format(format!("truncated tensor {name} in member {member}")))?;
        for (x, b) in tensor.iter_mut().zip(chunk.chunks_exact(4)) {
            *x = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        }
        offset += need;
    }
    if offset != bytes.len() {
        return Err(Error::Format(format!(
            "member {member} has {} trailing bytes after tensor b2",
            bytes.len() - offset
        )));
    }
    Ok(params)
}

pub fn save_model(ensemble: &Ensemble, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        dims: ensemble.dims,
        max_n: ensemble.vocab.max_n(),
        member_count: ensemble.members.len(),
        seeds: ensemble.seeds(),
        tokenizer: ensemble.tokenizer,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(path, e))
    };
    write(MANIFEST_FILE, json.as_bytes())?;
    write(VOCAB_FILE, ensemble.vocab.to_tsv().as_bytes())?;
    for (i, m) in ensemble.members.iter().enumerate() {
        write(&member_file_name(i), &params_to_bytes(&m.params))?;
    }
    Ok(())
}

/// Loads a directory written by [`save_model`]. Training history is not
/// stored, so loaded members have an empty history.
pub fn load_model(dir: impl AsRef<Path>) -> Result<Ensemble> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let version: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| Error::Format(format!("{}: {e}", manifest_path.display())))?;
    match version.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::Format(format!(
                "unsupported format_version {v} (this build reads version {FORMAT_VERSION})"
            )))
        }
        None => return Err(Error::Format("manifest has no format_version".into())),
    }
    let manifest: Manifest =
        serde_json::from_value(version).map_err(|e| Error::Format(format!("{}: {e}", manifest_path.display())))?;
    if manifest.member_count != manifest.seeds.len() {
        return Err(Error::Format(format!(
            "member_count {} but {} seeds listed",
            manifest.member_count,
            manifest.seeds.len()
        )));
    }

    let vocab = NgramVocabulary::load_tsv(dir.join(VOCAB_FILE), manifest.max_n)?;
    if vocab.len() != manifest.dims.vocab_size {
        return Err(Error::Format(format!(
            "vocab.tsv has {} entries but manifest vocab_size is {}",
            vocab.len(),
            manifest.dims.vocab_size
        )));
    }

    let mut members = Vec::with_capacity(manifest.member_count);
    for (i, &seed) in manifest.seeds.iter().enumerate() {
        let path = dir.join(member_file_name(i));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        members.push(TrainedModel {
            params: params_from_bytes(&bytes, manifest.dims, i)?,
            seed,
            history: Vec::new(),
        });
    }
    Ensemble::new(members, vocab, manifest.tokenizer)
}
