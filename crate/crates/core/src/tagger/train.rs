use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Labeling};
use crate::error::{Error, Result};
use crate::tagger::features::FeatureConfig;
use crate::tagger::inference::Lattice;
use crate::tagger::TaggerModel;

/// Training objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveMode {
    /// Per-token cross-entropy between the model's posterior marginals and
    /// (possibly soft) target distributions.
    Marginal,
    /// Conditional log-likelihood of hard tag sequences.
    Sequence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Initial step size; epoch `e` (counted over the model's lifetime) uses
    /// `learning_rate / (1 + decay * e)`.
    pub learning_rate: f64,
    pub decay: f64,
    pub l2: f64,
    pub seed: u64,
    pub mode: ObjectiveMode,
    pub features: FeatureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            learning_rate: 0.1,
            decay: 0.1,
            l2: 1e-4,
            seed: 0,
            mode: ObjectiveMode::Marginal,
            features: FeatureConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return bad("decay must be >= 0");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be >= 0");
        }
        if self.learning_rate * self.l2 >= 1.0 {
            return bad("learning_rate * l2 must be < 1");
        }
        Ok(())
    }

    pub fn rate_at(&self, epoch: u64) -> f64 {
        self.learning_rate / (1.0 + self.decay * epoch as f64)
    }
}

enum Target {
    Tags(Vec<usize>),
    Dist(Vec<Vec<f64>>),
}

struct Instance {
    feats: Vec<Vec<u32>>,
    target: Target,
}

fn target_of(
    labels: &Labeling,
    index: usize,
    mode: ObjectiveMode,
    n_tags: usize,
) -> Result<Target> {
    Ok(match (labels, mode) {
        (Labeling::Unlabeled, _) => return Err(Error::UnlabeledSentence(index)),
        (Labeling::Hard(h), ObjectiveMode::Sequence) => Target::Tags(h.tags.clone()),
        (Labeling::Soft(_), ObjectiveMode::Sequence) => {
            Target::Tags(labels.to_hard().expect("labeled").tags)
        }
        (Labeling::Hard(h), ObjectiveMode::Marginal) => Target::Dist(
            h.tags
                .iter()
                .map(|&t| {
                    let mut row = vec![0.0; n_tags];
                    row[t] = 1.0;
                    row
                })
                .collect(),
        ),
        (Labeling::Soft(s), ObjectiveMode::Marginal) => Target::Dist(s.dist.clone()),
    })
}

fn check_data(model: &TaggerModel, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.tags != model.tags {
        return Err(Error::ModelTagSetMismatch {
            expected: model.tags.to_string(),
            found: data.tags.to_string(),
        });
    }
    data.validate()
}

/// Gradients of one sentence's loss with respect to its emission and
/// transition potentials.
pub(crate) struct PotentialGrad {
    pub loss: f64,
    pub emit: Vec<Vec<f64>>,
    pub trans: Vec<f64>,
}

fn sequence_grad(emit: &[Vec<f64>], trans: &[f64], gold: &[usize]) -> PotentialGrad {
    let lat = Lattice::new(emit, trans);
    let (n, nt) = (emit.len(), lat.n_tags);
    let score = crate::tagger::inference::sequence_score(emit, trans, gold);
    let mut de = lat.marginals();
    for t in 0..n {
        de[t][gold[t]] -= 1.0;
    }
    let mut dtr = vec![0.0; nt * nt];
    for t in 1..n {
        for a in 0..nt {
            for b in 0..nt {
                dtr[a * nt + b] += lat.pair_marginal(emit, trans, t, a, b);
            }
        }
        dtr[gold[t - 1] * nt + gold[t]] -= 1.0;
    }
    PotentialGrad {
        loss: lat.log_z - score,
        emit: de,
        trans: dtr,
    }
}

/// Cross-entropy `-sum_t sum_y q_t(y) log p_t(y)` and its exact gradient.
///
/// With `R(y) = sum_t q_t(y_t) / p_t(y_t)`, the gradient of the loss with
/// respect to any potential is `n E[phi] - E[phi R]`. `E[1(y_t = y) R]`
/// factors as `p_t(y) (A_t(y) + B_t(y))`, where `A` and `B` are the
/// conditional expectations of the prefix and suffix parts of `R`,
/// accumulated by one forward and one backward sweep.
fn marginal_grad(emit: &[Vec<f64>], trans: &[f64], target: &[Vec<f64>]) -> PotentialGrad {
    let lat = Lattice::new(emit, trans);
    let (n, nt) = (emit.len(), lat.n_tags);
    let mut loss = 0.0;
    let mut mass = 0.0;
    let mut p = vec![vec![0.0; nt]; n];
    let mut rho = vec![vec![0.0; nt]; n];
    for t in 0..n {
        for y in 0..nt {
            let lp = lat.log_marginal(t, y);
            p[t][y] = lp.exp();
            let q = target[t][y];
            if q > 0.0 {
                loss -= q * lp;
                mass += q;
                rho[t][y] = q * (-lp.max(-700.0)).exp();
            }
        }
    }

    let mut fwd = vec![vec![0.0; nt]; n];
    if n > 0 {
        fwd[0].copy_from_slice(&rho[0]);
    }
    for t in 1..n {
        for y in 0..nt {
            let base = lat.log_alpha[t][y] - emit[t][y];
            let mut acc = rho[t][y];
            for a in 0..nt {
                let w = (lat.log_alpha[t - 1][a] + trans[a * nt + y] - base).exp();
                acc += w * fwd[t - 1][a];
            }
            fwd[t][y] = acc;
        }
    }
    let mut bwd = vec![vec![0.0; nt]; n];
    for t in (0..n.saturating_sub(1)).rev() {
        for a in 0..nt {
            let mut acc = 0.0;
            for b in 0..nt {
                let w = (trans[a * nt + b] + emit[t + 1][b] + lat.log_beta[t + 1][b]
                    - lat.log_beta[t][a])
                    .exp();
                acc += w * (rho[t + 1][b] + bwd[t + 1][b]);
            }
            bwd[t][a] = acc;
        }
    }

    let mut de = vec![vec![0.0; nt]; n];
    for t in 0..n {
        for y in 0..nt {
            de[t][y] = p[t][y] * (mass - fwd[t][y] - bwd[t][y]);
        }
    }
    let mut dtr = vec![0.0; nt * nt];
    for t in 1..n {
        for a in 0..nt {
            for b in 0..nt {
                let pair = lat.pair_marginal(emit, trans, t, a, b);
                dtr[a * nt + b] += pair * (mass - fwd[t - 1][a] - rho[t][b] - bwd[t][b]);
            }
        }
    }
    PotentialGrad {
        loss,
        emit: de,
        trans: dtr,
    }
}

fn instance_grad(model: &TaggerModel, inst: &Instance, scale: f64, trans: &[f64]) -> PotentialGrad {
    let emit = model.emission_scores(&inst.feats, scale);
    match &inst.target {
        Target::Tags(tags) => sequence_grad(&emit, trans, tags),
        Target::Dist(dist) => marginal_grad(&emit, trans, dist),
    }
}

fn prepare(model: &TaggerModel, data: &Dataset, mode: ObjectiveMode) -> Result<Vec<Instance>> {
    check_data(model, data)?;
    data.sentences
        .iter()
        .zip(&data.labels)
        .enumerate()
        .map(|(i, (s, l))| {
            Ok(Instance {
                feats: model.encode(s),
                target: target_of(l, i, mode, model.n_tags())?,
            })
        })
        .collect()
}

/// Regularized objective `mean_i loss_i + l2 / 2 * |w|^2` over `data`.
/// Features unknown to the model are ignored.
pub fn objective(model: &TaggerModel, data: &Dataset, mode: ObjectiveMode, l2: f64) -> Result<f64> {
    let instances = prepare(model, data, mode)?;
    let data_loss: f64 = instances
        .iter()
        .map(|inst| instance_grad(model, inst, 1.0, &model.transitions).loss)
        .sum();
    let norm: f64 = model.parameters().iter().map(|w| w * w).sum();
    Ok(data_loss / instances.len() as f64 + 0.5 * l2 * norm)
}

/// Gradient of [`objective`] in [`TaggerModel::parameters`] order.
pub fn objective_gradient(
    model: &TaggerModel,
    data: &Dataset,
    mode: ObjectiveMode,
    l2: f64,
) -> Result<Vec<f64>> {
    let instances = prepare(model, data, mode)?;
    let nt = model.n_tags();
    let n_emit = model.emission.len();
    let mut grad = vec![0.0; n_emit + nt * nt];
    let inv = 1.0 / instances.len() as f64;
    for inst in &instances {
        let g = instance_grad(model, inst, 1.0, &model.transitions);
        for (t, feats) in inst.feats.iter().enumerate() {
            for &f in feats {
                for y in 0..nt {
                    grad[f as usize * nt + y] += inv * g.emit[t][y];
                }
            }
        }
        for (k, d) in g.trans.iter().enumerate() {
            grad[n_emit + k] += inv * d;
        }
    }
    for (g, w) in grad.iter_mut().zip(model.parameters()) {
        *g += l2 * w;
    }
    Ok(grad)
}

/// Trains a model by per-sentence stochastic gradient descent.
///
/// With `init`, optimization resumes from its weights, feature dictionary
/// and epoch counter; otherwise it starts from zero weights. Features first
/// seen in `data` are added to the dictionary before the first epoch.
/// Sentence order is shuffled per epoch from `(cfg.seed, epoch)`.
pub fn train(data: &Dataset, cfg: &TrainConfig, init: Option<&TaggerModel>) -> Result<TaggerModel> {
    cfg.validate()?;
    let mut model = match init {
        Some(m) => {
            if m.features != cfg.features {
                return Err(Error::InvalidConfig(
                    "initial model uses a different feature configuration".into(),
                ));
            }
            m.clone()
        }
        None => TaggerModel::new(data.tags.clone(), cfg.features),
    };
    check_data(&model, data)?;
    model.register_features(data);
    let instances = prepare(&model, data, cfg.mode)?;

    let nt = model.n_tags();
    let n_emit = model.emission.len();
    let mut order: Vec<usize> = (0..instances.len()).collect();
    // weights are `scale * stored`, so L2 shrinkage costs O(1) per step
    let mut scale = 1.0f64;
    let mut trans = vec![0.0; nt * nt];
    for _ in 0..cfg.epochs {
        let rate = cfg.rate_at(model.epoch);
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed ^ model.epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        order.sort_unstable();
        order.shuffle(&mut rng);
        for &i in &order {
            let inst = &instances[i];
            trans
                .iter_mut()
                .zip(&model.transitions)
                .for_each(|(t, w)| *t = w * scale);
            let g = instance_grad(&model, inst, scale, &trans);
            scale *= 1.0 - rate * cfg.l2;
            let step = rate / scale;
            for (t, feats) in inst.feats.iter().enumerate() {
                for &f in feats {
                    let row = &mut model.emission[f as usize * nt..(f as usize + 1) * nt];
                    for (w, d) in row.iter_mut().zip(&g.emit[t]) {
                        *w -= step * d;
                    }
                }
            }
            for (w, d) in model.transitions.iter_mut().zip(&g.trans) {
                *w -= step * d;
            }
            if scale < 1e-6 {
                fold_scale(&mut model, &mut scale);
            }
        }
        model.epoch += 1;
    }
    fold_scale(&mut model, &mut scale);
    debug_assert_eq!(model.emission.len(), n_emit);
    Ok(model)
}

fn fold_scale(model: &mut TaggerModel, scale: &mut f64) {
    if *scale != 1.0 {
        let s = *scale;
        model.emission.iter_mut().for_each(|w| *w *= s);
        model.transitions.iter_mut().for_each(|w| *w *= s);
        *scale = 1.0;
    }
}
