//! One-hidden-layer perceptron with logistic activations, trained by
//! mini-batch gradient descent on binary cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Weights start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 16,
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 32,
            init_scale: 0.5,
            seed: 0,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "MLP hidden, epochs, and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("MLP learning_rate must be finite and >= 0".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("MLP init_scale must be finite and >= 0".into()));
        }
        Ok(())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Gradients of the mean batch loss, laid out like the model weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Gradients {
    fn zeros(d: usize, h: usize) -> Self {
        Gradients {
            w1: vec![0.0; d * h],
            b1: vec![0.0; h],
            w2: vec![0.0; h],
            b2: 0.0,
        }
    }

    /// Flattened in the order of [`MlpModel::parameters`].
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.w1.len() + 2 * self.b1.len() + 1);
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub feature_names: Vec<String>,
    pub params: MlpParams,
    /// Input-to-hidden weights, row-major `d x h`: `w1[i * h + j]` links
    /// input `i` to hidden unit `j`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    /// Mean training loss of every epoch.
    pub loss_history: Vec<f64>,
}

impl MlpModel {
    /// Fresh network with weights drawn from the seeded RNG.
    pub fn initialized(feature_names: Vec<String>, params: MlpParams, rng: &mut impl Rng) -> Self {
        let d = feature_names.len();
        let h = params.hidden;
        let s = params.init_scale;
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-s..=s)).collect() };
        let w1 = draw(d * h);
        let b1 = draw(h);
        let w2 = draw(h);
        let b2 = draw(1)[0];
        MlpModel {
            feature_names,
            params,
            w1,
            b1,
            w2,
            b2,
            loss_history: Vec::new(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.b1.len()
    }

    /// Hidden activations and the output logit.
    fn forward(&self, row: &[f64], hidden: &mut [f64]) -> f64 {
        let h = self.n_hidden();
        hidden.copy_from_slice(&self.b1);
        for (i, &x) in row.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let w = &self.w1[i * h..(i + 1) * h];
            for (a, &wij) in hidden.iter_mut().zip(w) {
                *a += x * wij;
            }
        }
        let mut z = self.b2;
        for (a, &w) in hidden.iter_mut().zip(&self.w2) {
            *a = sigmoid(*a);
            z += w * *a;
        }
        z
    }

    /// Probability of the botnet class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.n_hidden()];
        sigmoid(self.forward(row, &mut hidden))
    }

    /// Mean binary cross-entropy over the given rows.
    pub fn loss(&self, rows: &[&[f64]], labels: &[u8]) -> f64 {
        let mut hidden = vec![0.0; self.n_hidden()];
        let total: f64 = rows
            .iter()
            .zip(labels)
            .map(|(row, &y)| {
                let z = self.forward(row, &mut hidden);
                softplus(z) - f64::from(y) * z
            })
            .sum();
        total / rows.len() as f64
    }

    /// Backpropagated gradients of [`MlpModel::loss`] and the loss itself.
    pub fn gradients(&self, rows: &[&[f64]], labels: &[u8]) -> (f64, Gradients) {
        let d = self.n_inputs();
        let h = self.n_hidden();
        let mut grad = Gradients::zeros(d, h);
        let mut hidden = vec![0.0; h];
        let mut delta = vec![0.0; h];
        let mut loss = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let y = f64::from(y);
            let z = self.forward(row, &mut hidden);
            loss += softplus(z) - y * z;
            let dz = sigmoid(z) - y;
            grad.b2 += dz;
            for j in 0..h {
                grad.w2[j] += dz * hidden[j];
                delta[j] = dz * self.w2[j] * hidden[j] * (1.0 - hidden[j]);
                grad.b1[j] += delta[j];
            }
            for (i, &x) in row.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let g = &mut grad.w1[i * h..(i + 1) * h];
                for (gij, &dj) in g.iter_mut().zip(&delta) {
                    *gij += x * dj;
                }
            }
        }
        let scale = 1.0 / rows.len() as f64;
        grad.w1.iter_mut().chain(&mut grad.b1).chain(&mut grad.w2).for_each(|g| *g *= scale);
        grad.b2 *= scale;
        (loss * scale, grad)
    }

    /// All weights flattened: `w1`, `b1`, `w2`, `b2`.
    pub fn parameters(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.w1.len() + 2 * self.b1.len() + 1);
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    /// Inverse of [`MlpModel::parameters`].
    pub fn set_parameters(&mut self, flat: &[f64]) {
        let (d, h) = (self.n_inputs(), self.n_hidden());
        assert_eq!(flat.len(), d * h + 2 * h + 1, "parameter count");
        self.w1.copy_from_slice(&flat[..d * h]);
        self.b1.copy_from_slice(&flat[d * h..d * h + h]);
        self.w2.copy_from_slice(&flat[d * h + h..d * h + 2 * h]);
        self.b2 = flat[d * h + 2 * h];
    }

    fn apply(&mut self, grad: &Gradients, lr: f64) {
        for (w, g) in self.w1.iter_mut().zip(&grad.w1) {
            *w -= lr * g;
        }
        for (w, g) in self.b1.iter_mut().zip(&grad.b1) {
            *w -= lr * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grad.w2) {
            *w -= lr * g;
        }
        self.b2 -= lr * grad.b2;
    }

    fn all_finite(&self) -> bool {
        self.parameters().iter().all(|v| v.is_finite())
    }
}

pub fn fit(train: &Dataset, params: &MlpParams) -> Result<MlpModel> {
    params.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("mlp_fit"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut model = MlpModel::initialized(train.feature_names().to_vec(), *params, &mut rng);
    let labels = train.labels();
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let mut batch_rows: Vec<&[f64]> = Vec::with_capacity(params.batch_size);
    let mut batch_labels: Vec<u8> = Vec::with_capacity(params.batch_size);

    for epoch in 1..=params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(params.batch_size) {
            batch_rows.clear();
            batch_labels.clear();
            batch_rows.extend(chunk.iter().map(|&i| train.row(i)));
            batch_labels.extend(chunk.iter().map(|&i| labels[i]));
            let (loss, grad) = model.gradients(&batch_rows, &batch_labels);
            epoch_loss += loss * chunk.len() as f64;
            model.apply(&grad, params.learning_rate);
        }
        let epoch_loss = epoch_loss / train.n_rows() as f64;
        if !epoch_loss.is_finite() || !model.all_finite() {
            return Err(Error::Divergence { epoch });
        }
        model.loss_history.push(epoch_loss);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> Dataset {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        Dataset::from_rows(rows, vec![0, 1, 1, 0], vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn zero_weights_score_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = MlpModel::initialized(vec!["a".into(), "b".into()], MlpParams::default(), &mut rng);
        let n = m.parameters().len();
        m.set_parameters(&vec![0.0; n]);
        assert_eq!(m.score(&[0.3, 0.9]), 0.5);
        assert_eq!(m.score(&[10.0, -4.0]), 0.5);
    }

    #[test]
    fn zero_learning_rate_keeps_init() {
        let params = MlpParams { learning_rate: 0.0, epochs: 3, seed: 4, ..Default::default() };
        let trained = fit(&xor(), &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let init = MlpModel::initialized(xor().feature_names().to_vec(), params, &mut rng);
        assert_eq!(trained.parameters(), init.parameters());
        assert_eq!(trained.loss_history.len(), 3);
    }

    #[test]
    fn positive_path_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = MlpParams { hidden: 4, ..Default::default() };
        let mut m = MlpModel::initialized(vec!["a".into(), "b".into()], params, &mut rng);
        let p: Vec<f64> = m.parameters().iter().map(|v| v.abs() + 0.05).collect();
        m.set_parameters(&p);
        let mut last = 0.0;
        for step in 0..20 {
            let s = m.score(&[step as f64 * 0.1, 0.5]);
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn learns_xor() {
        let params = MlpParams {
            hidden: 4,
            learning_rate: 2.0,
            epochs: 4000,
            batch_size: 4,
            seed: 3,
            ..Default::default()
        };
        let data = xor();
        let m = fit(&data, &params).unwrap();
        for (row, &y) in data.rows().zip(data.labels()) {
            assert_eq!(u8::from(m.score(row) >= 0.5), y, "row {row:?}");
        }
        assert!(m.loss_history.last().unwrap() < &m.loss_history[0]);
    }

    #[test]
    fn divergence_is_reported() {
        let params = MlpParams { learning_rate: f64::MAX, epochs: 5, ..Default::default() };
        let rows = vec![vec![1.0, 1.0], vec![0.0, 0.0]];
        let ds = Dataset::from_rows(rows, vec![1, 0], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(fit(&ds, &params), Err(Error::Divergence { .. })));
    }

    #[test]
    fn bad_params_rejected() {
        let params = MlpParams { hidden: 0, ..Default::default() };
        assert!(matches!(fit(&xor(), &params), Err(Error::Config(_))));
    }
}
