//! Overproduction: a bagged pool of Rosenblatt perceptrons.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{contract, Error, Result};
use crate::seed::derive_seed;

/// Redraw budget for bootstrap samples that miss a class.
pub const MAX_BOOTSTRAP_DRAWS: usize = 100;

const SHUFFLE_SALT: u64 = 0x5348_5546;

/// Linear classifier `w·x + b`, predicting label 1 when the margin is
/// nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perceptron {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Position in the pool; tie-breaking in selection follows this order.
    pub index: usize,
}

impl Perceptron {
    pub fn new(weights: Vec<f64>, bias: f64, index: usize) -> Self {
        Self {
            weights,
            bias,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(contract(format!(
                "classifier {} expects {} features, got {}",
                self.index,
                self.weights.len(),
                x.len()
            )));
        }
        Ok(())
    }

    /// `w·x + b`. Panics on a dimension mismatch; see [`Perceptron::try_margin`].
    pub fn margin(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.weights.len(), "feature dimension mismatch");
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn try_margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.margin(x))
    }

    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        if self.margin(x) >= 0.0 {
            ClassLabel::ONE
        } else {
            ClassLabel::ZERO
        }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Posterior of label 1: logistic of the margin divided by `‖w‖₂`, i.e. of
    /// the signed distance to the decision boundary. Invariant under positive
    /// rescaling of `(w, b)`.
    pub fn proba(&self, x: &[f64]) -> f64 {
        logistic(self.margin(x) / self.weight_norm().max(1e-12))
    }

    /// Posterior of an arbitrary label.
    pub fn proba_of(&self, x: &[f64], label: ClassLabel) -> f64 {
        let p1 = self.proba(x);
        if label == ClassLabel::ONE {
            p1
        } else {
            1.0 - p1
        }
    }
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptronConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for PerceptronConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            max_epochs: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPerceptron {
    pub perceptron: Perceptron,
    pub epochs: usize,
    /// True when the last epoch made no update.
    pub converged: bool,
}

/// Classic mistake-driven perceptron training from zero weights, with the
/// sample order reshuffled every epoch.
pub fn train_perceptron(sample: &Dataset, config: &PerceptronConfig) -> Result<TrainedPerceptron> {
    if !sample.has_both_classes() {
        return Err(contract("perceptron training needs both classes"));
    }
    let d = sample.n_features();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..sample.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eta = config.learning_rate;

    let mut epochs = 0;
    let mut converged = false;
    while epochs < config.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut updates = 0usize;
        for &i in &order {
            let x = sample.row(i);
            let y = if sample.label(i) == ClassLabel::ONE { 1.0 } else { -1.0 };
            let m: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let predicted_positive = m >= 0.0;
            if predicted_positive != (y > 0.0) {
                for (wi, xi) in w.iter_mut().zip(x) {
                    *wi += eta * y * xi;
                }
                b += eta * y;
                updates += 1;
            }
        }
        if updates == 0 {
            converged = true;
            break;
        }
    }

    Ok(TrainedPerceptron {
        perceptron: Perceptron::new(w, b, 0),
        epochs,
        converged,
    })
}

/// Indices of a bootstrap draw: `n` uniform draws with replacement, redrawn
/// with an incremented sub-seed while a class is missing.
pub fn bootstrap_indices(train: &Dataset, seed: u64) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(contract("cannot bootstrap an empty training set"));
    }
    if !train.has_both_classes() {
        return Err(Error::DegenerateBootstrap { attempts: 0 });
    }
    let n = train.len();
    for attempt in 0..MAX_BOOTSTRAP_DRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut seen = [false; 2];
        for &i in &idx {
            seen[train.label(i).index()] = true;
        }
        if seen[0] && seen[1] {
            return Ok(idx);
        }
    }
    Err(Error::DegenerateBootstrap {
        attempts: MAX_BOOTSTRAP_DRAWS,
    })
}

pub fn bootstrap(train: &Dataset, seed: u64) -> Result<Dataset> {
    Ok(train.subset(&bootstrap_indices(train, seed)?))
}

/// An ordered pool of trained classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPool {
    pub members: Vec<Perceptron>,
    pub generation_seed: u64,
}

impl ClassifierPool {
    /// Wraps hand-built classifiers, renumbering them `0..n`.
    pub fn from_members(members: Vec<Perceptron>, generation_seed: u64) -> Result<Self> {
        if members.is_empty() {
            return Err(contract("a pool needs at least one classifier"));
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return Err(contract("pool members disagree on feature dimension"));
        }
        let members = members
            .into_iter()
            .enumerate()
            .map(|(i, mut m)| {
                m.index = i;
                m
            })
            .collect();
        Ok(Self {
            members,
            generation_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members.first().map_or(0, Perceptron::dim)
    }

    /// Borrowed view over every member, in pool order.
    pub fn refs(&self) -> Vec<&Perceptron> {
        self.members.iter().collect()
    }

    /// Members at the given pool indices, in the order given.
    pub fn select(&self, indices: &[usize]) -> Vec<&Perceptron> {
        indices.iter().map(|&i| &self.members[i]).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pool: ClassifierPool = serde_json::from_str(text)?;
        Self::from_members(pool.members, pool.generation_seed)
    }
}

/// Bagging: member `i` is trained on `bootstrap(train, seed ^ i)`.
pub fn generate_pool(train: &Dataset, n: usize, seed: u64) -> Result<ClassifierPool> {
    if n == 0 {
        return Err(contract("pool size must be at least 1"));
    }
    let mut members = Vec::with_capacity(n);
    for i in 0..n {
        let member_seed = seed ^ i as u64;
        let bag = bootstrap(train, member_seed)?;
        let cfg = PerceptronConfig {
            seed: derive_seed(member_seed, SHUFFLE_SALT),
            ..PerceptronConfig::default()
        };
        let mut p = train_perceptron(&bag, &cfg)?.perceptron;
        p.index = i;
        members.push(p);
    }
    Ok(ClassifierPool {
        members,
        generation_seed: seed,
    })
}
