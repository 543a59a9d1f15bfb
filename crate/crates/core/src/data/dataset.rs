use crate::data::encoding::{encode_input, InputSpec};
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Labelled images with values in `[0, 1]`, stored as `n × H × W × C` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    spec: InputSpec,
    images: Vec<T>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    provenance: String,
}

impl<T: Scalar> LabeledDataset<T> {
    /// Builds a dataset; pixel values are clamped into `[0, 1]`.
    pub fn new(
        spec: InputSpec,
        mut images: Vec<T>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("dataset has no samples"));
        }
        check_dim("dataset pixel count", labels.len() * spec.raw_dim(), images.len())?;
        if class_names.is_empty() {
            return Err(Error::invalid("dataset needs at least one class"));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: class_names.len(),
            });
        }
        for v in &mut images {
            if !v.is_finite() {
                return Err(Error::invalid("dataset contains non-finite pixel values"));
            }
            *v = v.max(T::zero()).min(T::one());
        }
        Ok(Self {
            spec,
            images,
            labels,
            class_names,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn spec(&self) -> InputSpec {
        self.spec
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn image(&self, i: usize) -> &[T] {
        let d = self.spec.raw_dim();
        &self.images[i * d..(i + 1) * d]
    }

    pub fn pixels(&self) -> &[T] {
        &self.images
    }

    pub fn encoded(&self, i: usize) -> Vec<T> {
        encode_input(self.image(i), &self.spec).expect("dataset values are clamped to [0, 1]")
    }

    pub fn encoded_all(&self) -> Vec<Vec<T>> {
        (0..self.len()).map(|i| self.encoded(i)).collect()
    }

    /// Per-pixel mean image over all samples.
    pub fn mean_image(&self) -> Vec<T> {
        let d = self.spec.raw_dim();
        let mut acc = vec![T::zero(); d];
        for i in 0..self.len() {
            for (a, &v) in acc.iter_mut().zip(self.image(i)) {
                *a = *a + v;
            }
        }
        let n = T::of(self.len() as f64);
        acc.into_iter().map(|v| v / n).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("subset selects no samples"));
        }
        let mut images = Vec::with_capacity(indices.len() * self.spec.raw_dim());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::invalid(format!(
                    "sample index {i} out of range for {} samples",
                    self.len()
                )));
            }
            images.extend_from_slice(self.image(i));
            labels.push(self.labels[i]);
        }
        Ok(Self {
            spec: self.spec,
            images,
            labels,
            class_names: self.class_names.clone(),
            provenance: format!("{} [subset of {}]", self.provenance, indices.len()),
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}
