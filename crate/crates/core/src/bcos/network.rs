use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bcos::layer::BcosLayer;
use crate::data::InputSpec;
use crate::digest::vector_digest;
use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Encoder of B-cos layers followed by a B-cos classifier head.
#[derive(Debug, Clone, PartialEq)]
pub struct BcosNetwork<T> {
    encoder: Vec<BcosLayer<T>>,
    head: BcosLayer<T>,
    input_spec: InputSpec,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward<T> {
    pub embedding: Vec<T>,
    pub logits: Vec<T>,
}

/// The encoder collapsed to one matrix for a particular input.
///
/// Row `i` is the attribution vector of embedding feature `i`: its dot product
/// with the input reproduces that feature exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicLinearMap<T> {
    pub matrix: Matrix<T>,
    pub source_digest: String,
}

impl<T: Scalar> DynamicLinearMap<T> {
    pub fn attribution_row(&self, feature: usize) -> &[T] {
        self.matrix.row(feature)
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.matrix.mul_vec(x)
    }
}

impl<T: Scalar> BcosNetwork<T> {
    pub fn new(
        encoder: Vec<BcosLayer<T>>,
        head: BcosLayer<T>,
        input_spec: InputSpec,
        seed: u64,
    ) -> Result<Self> {
        let first = encoder
            .first()
            .ok_or_else(|| Error::invalid("encoder needs at least one layer"))?;
        check_dim("encoder input", input_spec.input_dim(), first.in_dim())?;
        for pair in encoder.windows(2) {
            check_dim("encoder layer chain", pair[0].out_dim(), pair[1].in_dim())?;
        }
        check_dim(
            "head input",
            encoder.last().map_or(0, BcosLayer::out_dim),
            head.in_dim(),
        )?;
        Ok(Self {
            encoder,
            head,
            input_spec,
            seed,
        })
    }

    /// Randomly initialised network with the given hidden widths; the last
    /// width is the embedding size `C_L`.
    pub fn random(
        input_spec: InputSpec,
        widths: &[usize],
        classes: usize,
        exponent: T,
        seed: u64,
    ) -> Result<Self> {
        if widths.is_empty() || widths.contains(&0) || classes == 0 {
            return Err(Error::invalid("layer widths and class count must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut encoder = Vec::with_capacity(widths.len());
        let mut in_dim = input_spec.input_dim();
        for &w in widths {
            encoder.push(BcosLayer::random(w, in_dim, exponent, &mut rng)?);
            in_dim = w;
        }
        let head = BcosLayer::random(classes, in_dim, exponent, &mut rng)?;
        Self::new(encoder, head, input_spec, seed)
    }

    pub fn encoder(&self) -> &[BcosLayer<T>] {
        &self.encoder
    }

    pub fn head(&self) -> &BcosLayer<T> {
        &self.head
    }

    pub fn input_spec(&self) -> InputSpec {
        self.input_spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_count(&self) -> usize {
        self.head.out_dim()
    }

    pub fn embedding_dim(&self) -> usize {
        self.head.in_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.input_spec.input_dim()
    }

    /// All layers, encoder first and head last.
    pub fn layers(&self) -> impl Iterator<Item = &BcosLayer<T>> {
        self.encoder.iter().chain(std::iter::once(&self.head))
    }

    pub(crate) fn layers_mut(&mut self) -> impl Iterator<Item = &mut BcosLayer<T>> {
        self.encoder.iter_mut().chain(std::iter::once(&mut self.head))
    }

    pub fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("network input", self.input_dim(), x.len())?;
        let mut h = x.to_vec();
        for layer in &self.encoder {
            h = layer.forward(&h)?;
        }
        Ok(h)
    }

    pub fn forward(&self, x: &[T]) -> Result<Forward<T>> {
        let embedding = self.embed(x)?;
        let logits = self.head.forward(&embedding)?;
        Ok(Forward { embedding, logits })
    }

    /// Index of the largest logit; ties resolve to the lower class.
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        let logits = self.forward(x)?.logits;
        Ok(argmax(&logits))
    }

    /// Product of the per-layer effective matrices along the encoder,
    /// evaluated at the running activations for `x`.
    pub fn collapse(&self, x: &[T]) -> Result<DynamicLinearMap<T>> {
        check_dim("network input", self.input_dim(), x.len())?;
        let mut h = x.to_vec();
        let mut acc: Option<Matrix<T>> = None;
        for layer in &self.encoder {
            let eff = layer.effective_matrix(&h)?;
            h = eff.mul_vec(&h)?;
            acc = Some(match acc {
                None => eff,
                Some(prev) => eff.matmul(&prev)?,
            });
        }
        Ok(DynamicLinearMap {
            matrix: acc.expect("encoder is non-empty"),
            source_digest: vector_digest(x),
        })
    }

    /// Single attribution row of `collapse(x)` without materialising the rest.
    pub fn attribution_row(&self, x: &[T], feature: usize) -> Result<Vec<T>> {
        if feature >= self.embedding_dim() {
            return Err(Error::invalid(format!(
                "feature {feature} out of range for embedding of size {}",
                self.embedding_dim()
            )));
        }
        check_dim("network input", self.input_dim(), x.len())?;
        // Back-propagate a unit row vector through the effective matrices.
        let mut acts = Vec::with_capacity(self.encoder.len());
        let mut h = x.to_vec();
        for layer in &self.encoder {
            let eff = layer.effective_matrix(&h)?;
            h = eff.mul_vec(&h)?;
            acts.push(eff);
        }
        let mut row = vec![T::zero(); self.embedding_dim()];
        row[feature] = T::one();
        for eff in acts.iter().rev() {
            let mut next = vec![T::zero(); eff.cols()];
            for (i, &r) in row.iter().enumerate() {
                if r == T::zero() {
                    continue;
                }
                for (n, &e) in next.iter_mut().zip(eff.row(i)) {
                    *n = *n + r * e;
                }
            }
            row = next;
        }
        Ok(row)
    }
}

pub(crate) fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
