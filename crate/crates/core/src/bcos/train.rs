//! Mini-batch SGD on mean binary cross-entropy over sigmoid outputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bcos::network::BcosNetwork;
use crate::data::{split_indices, LabeledDataset};
use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Exponent used when a fresh network is built for training.
    pub exponent: f64,
    pub dropout: f64,
    pub patience: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 16,
            max_epochs: 500,
            exponent: 1.5,
            dropout: 0.5,
            patience: 10,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be finite and non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::invalid("exponent B must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::invalid("validation_fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: Vec<EpochStats>,
    /// Epoch whose parameters were kept (last epoch when there is no validation split).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> Option<f64> {
        self.history.last().map(|e| e.train_loss)
    }

    /// `epoch,train_loss,validation_loss` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,validation_loss\n");
        for e in &self.history {
            let val = e.validation_loss.map_or(String::new(), |v| v.to_string());
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, val));
        }
        out
    }
}

/// Per-layer weight gradients, encoder layers first, head last.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Matrix<T>>,
}

/// Numerically stable `BCE(sigmoid(z), t)`.
#[inline]
fn bce_with_logit<T: Scalar>(z: T, target: T) -> T {
    z.max(T::zero()) - z * target + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Mean BCE over `batch × classes` and its gradient with respect to every weight.
///
/// `masks[k]`, when given, multiplies the embedding of sample `k` before the head
/// (inverted dropout).
pub fn loss_and_gradients<T: Scalar>(
    net: &BcosNetwork<T>,
    inputs: &[&[T]],
    labels: &[usize],
    masks: Option<&[Vec<T>]>,
) -> Result<(T, Gradients<T>)> {
    check_dim("batch labels", inputs.len(), labels.len())?;
    if inputs.is_empty() {
        return Err(Error::Empty("batch has no samples"));
    }
    let classes = net.class_count();
    let layers: Vec<_> = net.layers().collect();
    let norms: Vec<Vec<T>> = layers.iter().map(|l| l.row_norms()).collect();
    let mut grads: Vec<Matrix<T>> = layers
        .iter()
        .map(|l| Matrix::zeros(l.out_dim(), l.in_dim()))
        .collect();
    let denom = T::of((inputs.len() * classes) as f64);
    let mut loss = T::zero();
    let n_enc = layers.len() - 1;

    for (k, (&x, &label)) in inputs.iter().zip(labels).enumerate() {
        if label >= classes {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        check_dim("network input", net.input_dim(), x.len())?;
        let mut traces = Vec::with_capacity(layers.len());
        let mut h = x.to_vec();
        for (i, layer) in layers[..n_enc].iter().enumerate() {
            let t = layer.trace(h, &norms[i]);
            h = t.output.clone();
            traces.push(t);
        }
        let mask = masks.map(|m| &m[k]);
        if let Some(mask) = mask {
            h.iter_mut().zip(mask).for_each(|(v, &m)| *v = *v * m);
        }
        let head_trace = layers[n_enc].trace(h, &norms[n_enc]);
        let mut g_logits = Vec::with_capacity(classes);
        for (c, &z) in head_trace.output.iter().enumerate() {
            let t = if c == label { T::one() } else { T::zero() };
            loss = loss + bce_with_logit(z, t);
            g_logits.push((sigmoid(z) - t) / denom);
        }
        let mut g = layers[n_enc]
            .backward(&head_trace, &norms[n_enc], &g_logits, &mut grads[n_enc], true)
            .expect("input gradient requested");
        if let Some(mask) = mask {
            g.iter_mut().zip(mask).for_each(|(v, &m)| *v = *v * m);
        }
        for i in (0..n_enc).rev() {
            match layers[i].backward(&traces[i], &norms[i], &g, &mut grads[i], i > 0) {
                Some(next) => g = next,
                None => break,
            }
        }
    }
    Ok((loss / denom, Gradients { layers: grads }))
}

/// Mean BCE of the network (no dropout) over pre-encoded inputs.
pub fn mean_loss<T: Scalar>(net: &BcosNetwork<T>, inputs: &[&[T]], labels: &[usize]) -> Result<T> {
    check_dim("labels", inputs.len(), labels.len())?;
    if inputs.is_empty() {
        return Err(Error::Empty("no samples to score"));
    }
    let classes = net.class_count();
    let mut loss = T::zero();
    for (&x, &label) in inputs.iter().zip(labels) {
        let logits = net.forward(x)?.logits;
        for (c, &z) in logits.iter().enumerate() {
            let t = if c == label { T::one() } else { T::zero() };
            loss = loss + bce_with_logit(z, t);
        }
    }
    Ok(loss / T::of((inputs.len() * classes) as f64))
}

fn apply_step<T: Scalar>(net: &mut BcosNetwork<T>, grads: &Gradients<T>, lr: T) {
    for (layer, g) in net.layers_mut().zip(&grads.layers) {
        for (w, &gw) in layer.weights_mut().as_mut_slice().iter_mut().zip(g.as_slice()) {
            *w = *w - lr * gw;
        }
    }
}

fn validate_data<T: Scalar>(net: &BcosNetwork<T>, data: &LabeledDataset<T>) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if data.spec() != net.input_spec() {
        return Err(Error::invalid(format!(
            "dataset shape {:?} does not match network input {:?}",
            data.spec(),
            net.input_spec()
        )));
    }
    if let Some(&label) = data.labels().iter().find(|&&l| l >= net.class_count()) {
        return Err(Error::LabelOutOfRange {
            label,
            classes: net.class_count(),
        });
    }
    Ok(())
}

/// Trains `net` on `data`, returning the trained network and its loss history.
///
/// A `validation_fraction` share of the data (stratified, seeded) is held out
/// when the dataset allows a non-degenerate split; training then stops after
/// `patience` epochs without validation improvement and the best parameters are
/// restored. Everything is driven by `cfg.seed`.
pub fn train<T: Scalar>(
    mut net: BcosNetwork<T>,
    data: &LabeledDataset<T>,
    cfg: &TrainConfig,
) -> Result<(BcosNetwork<T>, TrainReport)> {
    cfg.validate()?;
    validate_data(&net, data)?;
    let encoded = data.encoded_all();
    let labels = data.labels();

    let (train_idx, val_idx) = if cfg.validation_fraction > 0.0 && data.len() >= 2 {
        split_indices(labels, cfg.validation_fraction, cfg.seed)
            .unwrap_or_else(|_| ((0..data.len()).collect(), Vec::new()))
    } else {
        ((0..data.len()).collect(), Vec::new())
    };
    let val_inputs: Vec<&[T]> = val_idx.iter().map(|&i| encoded[i].as_slice()).collect();
    let val_labels: Vec<usize> = val_idx.iter().map(|&i| labels[i]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lr = T::of(cfg.learning_rate);
    let keep = 1.0 - cfg.dropout;
    let inv_keep = T::of(1.0 / keep);
    let width = net.embedding_dim();

    let mut order = train_idx.clone();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, BcosNetwork<T>)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let inputs: Vec<&[T]> = chunk.iter().map(|&i| encoded[i].as_slice()).collect();
            let batch_labels: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let masks: Option<Vec<Vec<T>>> = (cfg.dropout > 0.0).then(|| {
                chunk
                    .iter()
                    .map(|_| {
                        (0..width)
                            .map(|_| if rng.random_bool(keep) { inv_keep } else { T::zero() })
                            .collect()
                    })
                    .collect()
            });
            let (loss, grads) =
                loss_and_gradients(&net, &inputs, &batch_labels, masks.as_deref())?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            epoch_loss += loss.lossy_f64() * chunk.len() as f64;
            apply_step(&mut net, &grads, lr);
        }
        let train_loss = epoch_loss / order.len() as f64;

        let validation_loss = if val_inputs.is_empty() {
            None
        } else {
            let v = mean_loss(&net, &val_inputs, &val_labels)?.lossy_f64();
            if !v.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: usize::MAX });
            }
            Some(v)
        };
        history.push(EpochStats {
            epoch,
            train_loss,
            validation_loss,
        });

        if let Some(v) = validation_loss {
            if best.as_ref().map_or(true, |(b, _, _)| v < *b) {
                best = Some((v, epoch, net.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= cfg.patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let best_epoch = match best {
        Some((_, epoch, params)) => {
            net = params;
            epoch
        }
        None => history.len().saturating_sub(1),
    };
    Ok((
        net,
        TrainReport {
            history,
            best_epoch,
            stopped_early,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InputSpec;

    fn tiny_dataset(n: usize) -> LabeledDataset<f64> {
        let spec = InputSpec::new(2, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let images = (0..n * 4).map(|_| rng.random::<f64>()).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        LabeledDataset::new(spec, images, labels, vec!["a".into(), "b".into()], "tiny").unwrap()
    }

    #[test]
    fn bce_matches_direct_formula() {
        for (z, t) in [(0.3f64, 1.0), (-2.0, 0.0), (4.0, 0.0), (-0.7, 1.0)] {
            let p = 1.0 / (1.0 + (-z).exp());
            let direct = -(t * p.ln() + (1.0 - t) * (1.0 - p).ln());
            assert!((bce_with_logit(z, t) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_learning_rate_leaves_parameters() {
        let data = tiny_dataset(10);
        let net = BcosNetwork::random(data.spec(), &[5, 3], 2, 1.5, 1).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            max_epochs: 4,
            batch_size: 3,
            ..TrainConfig::default()
        };
        let (trained, report) = train(net.clone(), &data, &cfg).unwrap();
        assert_eq!(trained, net);
        assert!(!report.history.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let data = tiny_dataset(12);
        let net = BcosNetwork::random(data.spec(), &[5, 3], 2, 1.5, 1).unwrap();
        let cfg = TrainConfig {
            max_epochs: 5,
            batch_size: 4,
            seed: 3,
            ..TrainConfig::default()
        };
        let a = train(net.clone(), &data, &cfg).unwrap();
        let b = train(net, &data, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = tiny_dataset(4);
        let net = BcosNetwork::random(data.spec(), &[3], 1, 1.5, 1).unwrap();
        assert!(matches!(
            train(net, &data, &TrainConfig::default()),
            Err(Error::LabelOutOfRange { .. })
        ));
        let net = BcosNetwork::random(data.spec(), &[3], 2, 1.5, 1).unwrap();
        let cfg = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(train(net, &data, &cfg).is_err());
    }

    #[test]
    fn non_finite_loss_aborts() {
        let data = tiny_dataset(4);
        let net = BcosNetwork::random(data.spec(), &[3], 2, 1.0, 1).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            max_epochs: 50,
            dropout: 0.0,
            validation_fraction: 0.0,
            ..TrainConfig::default()
        };
        match train(net, &data, &cfg) {
            Err(Error::NonFiniteLoss { .. }) => {}
            other => panic!("expected non-finite loss, got {other:?}"),
        }
    }
}
