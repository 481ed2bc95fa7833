use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::{Split, Target, Task};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Linear,
}

impl Activation {
    pub const ALL: [Activation; 4] = [
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Linear,
    ];

    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Relu => (y > 0.0) as u8 as f64,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }

    fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
            Activation::Tanh => 2,
            Activation::Linear => 3,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightInit {
    HeUniform,
    Zeros,
    Ones,
    SmallGaussian,
}

impl WeightInit {
    pub const ALL: [WeightInit; 4] = [
        WeightInit::HeUniform,
        WeightInit::Zeros,
        WeightInit::Ones,
        WeightInit::SmallGaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightInit::HeUniform => "he_uniform",
            WeightInit::Zeros => "zeros",
            WeightInit::Ones => "ones",
            WeightInit::SmallGaussian => "small_gaussian",
        }
    }
}

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub task: Task,
    pub hidden_sizes: Vec<usize>,
    /// One per hidden layer.
    pub activations: Vec<Activation>,
    /// One per layer, output layer last.
    pub weight_init: Vec<WeightInit>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.contains(&0) {
            return Err(Error::invalid("hidden layer of width 0"));
        }
        if self.activations.len() != self.hidden_sizes.len() {
            return Err(Error::invalid(format!(
                "{} activations for {} hidden layers",
                self.activations.len(),
                self.hidden_sizes.len()
            )));
        }
        if self.weight_init.len() != self.hidden_sizes.len() + 1 {
            return Err(Error::invalid(format!(
                "{} weight initialisers for {} layers",
                self.weight_init.len(),
                self.hidden_sizes.len() + 1
            )));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.hidden_sizes.len() + 1
    }

    /// Hash of the specification without its seed.
    pub fn spec_hash(&self) -> [u8; 32] {
        let mut unseeded = self.clone();
        unseeded.rng_seed = 0;
        let json = serde_json::to_vec(&unseeded).expect("spec serializes");
        Sha256::digest(&json).into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major, `outputs × inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.biases[o];
            out.push(self.activation.apply(z));
        }
    }
}

/// A trained feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyModel {
    pub task: Task,
    pub layers: Vec<Layer>,
    pub spec_hash: [u8; 32],
    pub seed: u64,
}

const MAGIC: &[u8; 4] = b"MFTM";
const FORMAT_VERSION: u32 = 1;

impl TinyModel {
    /// Network output: class probabilities or (pitch, yaw).
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        if self.task == Task::Classification {
            softmax_in_place(&mut cur);
        }
        cur
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    /// Spec hash and seed, in hex.
    pub fn fingerprint(&self) -> String {
        format!("{}:{}", hex::encode(self.spec_hash), self.seed)
    }

    /// Hash of all parameters.
    pub fn weights_digest(&self) -> String {
        let mut h = Sha256::new();
        for l in &self.layers {
            for v in l.weights.iter().chain(&l.biases) {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_all(&self.spec_hash)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_u8(match self.task {
            Task::Classification => 0,
            Task::Regression => 1,
        })?;
        w.write_u32::<LittleEndian>(self.layers.len() as u32)?;
        for l in &self.layers {
            w.write_u32::<LittleEndian>(l.inputs as u32)?;
            w.write_u32::<LittleEndian>(l.outputs as u32)?;
            w.write_u8(l.activation.code())?;
        }
        for l in &self.layers {
            for &v in l.weights.iter().chain(&l.biases) {
                w.write_f64::<LittleEndian>(v)?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let fmt = |e: std::io::Error| Error::ModelFormat(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(fmt)?;
        if &magic != MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(fmt)?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let mut spec_hash = [0u8; 32];
        r.read_exact(&mut spec_hash).map_err(fmt)?;
        let seed = r.read_u64::<LittleEndian>().map_err(fmt)?;
        let task = match r.read_u8().map_err(fmt)? {
            0 => Task::Classification,
            1 => Task::Regression,
            t => return Err(Error::ModelFormat(format!("unknown task code {t}"))),
        };
        let n = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
        if n == 0 || n > 64 {
            return Err(Error::ModelFormat(format!("implausible layer count {n}")));
        }
        let mut shapes = Vec::with_capacity(n);
        for _ in 0..n {
            let i = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
            let o = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
            let a = Activation::from_code(r.read_u8().map_err(fmt)?)
                .ok_or_else(|| Error::ModelFormat("unknown activation".into()))?;
            shapes.push((i, o, a));
        }
        let mut layers = Vec::with_capacity(n);
        for (inputs, outputs, activation) in shapes {
            let mut weights = vec![0.0; inputs * outputs];
            r.read_f64_into::<LittleEndian>(&mut weights).map_err(fmt)?;
            let mut biases = vec![0.0; outputs];
            r.read_f64_into::<LittleEndian>(&mut biases).map_err(fmt)?;
            layers.push(Layer {
                inputs,
                outputs,
                weights,
                biases,
                activation,
            });
        }
        Ok(Self {
            task,
            layers,
            spec_hash,
            seed,
        })
    }
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

fn init_layer(
    inputs: usize,
    outputs: usize,
    activation: Activation,
    init: WeightInit,
    rng: &mut ChaCha8Rng,
) -> Layer {
    let n = inputs * outputs;
    let weights = match init {
        WeightInit::HeUniform => {
            let limit = (6.0 / inputs as f64).sqrt();
            (0..n).map(|_| rng.random_range(-limit..limit)).collect()
        }
        WeightInit::Zeros => vec![0.0; n],
        WeightInit::Ones => vec![1.0; n],
        WeightInit::SmallGaussian => {
            let normal = Normal::new(0.0, 0.01).expect("valid sigma");
            (0..n).map(|_| normal.sample(rng)).collect()
        }
    };
    Layer {
        inputs,
        outputs,
        weights,
        biases: vec![0.0; outputs],
        activation,
    }
}

/// Mini-batch SGD with a seeded shuffle; fully deterministic in
/// `(data, spec)`. Cross-entropy on softmax outputs for classification,
/// squared error on (pitch, yaw) for regression.
pub fn train(data: &Split, input_size: usize, spec: &TrainSpec) -> Result<TinyModel> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    data.validate(spec.task, input_size, "train")?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut sizes = vec![input_size];
    sizes.extend(&spec.hidden_sizes);
    sizes.push(spec.task.outputs());
    let mut layers: Vec<Layer> = (0..sizes.len() - 1)
        .map(|l| {
            let act = spec.activations.get(l).copied().unwrap_or(Activation::Linear);
            init_layer(sizes[l], sizes[l + 1], act, spec.weight_init[l], &mut rng)
        })
        .collect();

    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = layers
        .iter()
        .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
        .collect();
    let mut acts: Vec<Vec<f64>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    let mut deltas: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..spec.epochs {
        order.shuffle(&mut rng);
        for (batch_idx, batch) in order.chunks(spec.batch_size).enumerate() {
            for (gw, gb) in grads.iter_mut() {
                gw.iter_mut().for_each(|g| *g = 0.0);
                gb.iter_mut().for_each(|g| *g = 0.0);
            }
            let mut loss = 0.0;
            for &row in batch {
                let x = &data.inputs[row];
                acts[0].clear();
                acts[0].extend_from_slice(x);
                for (l, layer) in layers.iter().enumerate() {
                    let (head, tail) = acts.split_at_mut(l + 1);
                    layer.forward_into(&head[l], &mut tail[0]);
                }
                let out = acts.last_mut().unwrap();
                let last = deltas.len() - 1;
                match data.targets[row] {
                    Target::Class(c) => {
                        softmax_in_place(out);
                        loss -= out[c as usize].max(1e-300).ln();
                        for (k, d) in deltas[last].iter_mut().enumerate() {
                            *d = out[k] - if k == c as usize { 1.0 } else { 0.0 };
                        }
                    }
                    Target::Gaze(p, y) => {
                        let t = [p, y];
                        for k in 0..2 {
                            let e = out[k] - t[k];
                            loss += 0.5 * e * e;
                            deltas[last][k] = e;
                        }
                    }
                }
                // backpropagate
                for l in (0..layers.len()).rev() {
                    let layer = &layers[l];
                    let (gw, gb) = &mut grads[l];
                    let input = &acts[l];
                    for o in 0..layer.outputs {
                        let d = deltas[l + 1][o];
                        if d == 0.0 {
                            continue;
                        }
                        gb[o] += d;
                        let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                        for (g, v) in row.iter_mut().zip(input) {
                            *g += d * v;
                        }
                    }
                    if l > 0 {
                        let act = layers[l - 1].activation;
                        let (lower, upper) = deltas.split_at_mut(l + 1);
                        let prev = &mut lower[l];
                        let cur = &upper[0];
                        for (i, p) in prev.iter_mut().enumerate() {
                            let mut s = 0.0;
                            for o in 0..layer.outputs {
                                s += layer.weights[o * layer.inputs + i] * cur[o];
                            }
                            *p = s * act.derivative(acts[l][i]);
                        }
                    }
                }
            }
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            let step = spec.learning_rate / batch.len() as f64;
            for (layer, (gw, gb)) in layers.iter_mut().zip(&grads) {
                for (w, g) in layer.weights.iter_mut().zip(gw) {
                    *w -= step * g;
                }
                for (b, g) in layer.biases.iter_mut().zip(gb) {
                    *b -= step * g;
                }
            }
            let diverged = layers
                .iter()
                .any(|l| l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()));
            if diverged {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
        }
    }

    Ok(TinyModel {
        task: spec.task,
        layers,
        spec_hash: spec.spec_hash(),
        seed: spec.rng_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn xor_like() -> Split {
        // two blobs per class, not linearly separable
        let mut s = Split::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..200 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            let label = (a as u8) ^ (b as u8);
            s.push(
                vec![a + rng.random_range(-0.1..0.1), b + rng.random_range(-0.1..0.1)],
                Target::Class(label),
            );
        }
        s
    }

    fn spec(epochs: usize) -> TrainSpec {
        TrainSpec {
            task: Task::Classification,
            hidden_sizes: vec![8],
            activations: vec![Activation::Tanh],
            weight_init: vec![WeightInit::HeUniform, WeightInit::HeUniform],
            epochs,
            learning_rate: 0.5,
            batch_size: 8,
            rng_seed: 3,
        }
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let data = xor_like();
        let a = train(&data, 2, &spec(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l0 = init_layer(2, 8, Activation::Tanh, WeightInit::HeUniform, &mut rng);
        assert_eq!(a.layers[0], l0);
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let data = xor_like();
        let a = train(&data, 2, &spec(20)).unwrap();
        let b = train(&data, 2, &spec(20)).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn learns_xor() {
        let data = xor_like();
        let m = train(&data, 2, &spec(200)).unwrap();
        let acc = data
            .iter()
            .filter(|(x, t)| {
                let p = m.forward(x);
                let pred = if p[1] > p[0] { 1 } else { 0 };
                Target::Class(pred) == *t
            })
            .count() as f64
            / data.len() as f64;
        assert!(acc > 0.95, "{acc}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // one-sample regression net, compare analytic step with numeric gradient
        let mut data = Split::default();
        data.push(vec![0.3, -0.7, 0.5], Target::Gaze(0.2, -0.1));
        let s = TrainSpec {
            task: Task::Regression,
            hidden_sizes: vec![4],
            activations: vec![Activation::Sigmoid],
            weight_init: vec![WeightInit::HeUniform, WeightInit::HeUniform],
            epochs: 1,
            learning_rate: 1e-3,
            batch_size: 1,
            rng_seed: 5,
        };
        let before = train(&data, 3, &TrainSpec { epochs: 0, ..s.clone() }).unwrap();
        let after = train(&data, 3, &s).unwrap();
        let loss = |m: &TinyModel| {
            let y = m.forward(&data.inputs[0]);
            0.5 * ((y[0] - 0.2).powi(2) + (y[1] + 0.1).powi(2))
        };
        for (l, idx) in [(0usize, 2usize), (0, 7), (1, 3), (1, 0)] {
            let mut plus = before.clone();
            let mut minus = before.clone();
            let h = 1e-6;
            plus.layers[l].weights[idx] += h;
            minus.layers[l].weights[idx] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let analytic =
                (before.layers[l].weights[idx] - after.layers[l].weights[idx]) / s.learning_rate;
            assert!((numeric - analytic).abs() < 1e-6, "{numeric} vs {analytic}");
        }
    }

    #[test]
    fn softmax_sums_to_one() {
        let data = xor_like();
        let m = train(&data, 2, &spec(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let p = m.forward(&x);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!(p.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn model_file_round_trip() {
        let m = train(&xor_like(), 2, &spec(3)).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"MFTM");
        let back = TinyModel::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        assert!(TinyModel::read_from(&mut corrupt.as_slice()).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut data = Split::default();
        data.push(vec![1e200, 1e200], Target::Gaze(0.0, 0.0));
        let s = TrainSpec {
            task: Task::Regression,
            hidden_sizes: vec![2],
            activations: vec![Activation::Linear],
            weight_init: vec![WeightInit::Ones, WeightInit::Ones],
            epochs: 3,
            learning_rate: 1.0,
            batch_size: 1,
            rng_seed: 0,
        };
        assert!(matches!(
            train(&data, 2, &s),
            Err(Error::NonFiniteLoss { epoch: 0, batch: 0 })
        ));
    }
}
