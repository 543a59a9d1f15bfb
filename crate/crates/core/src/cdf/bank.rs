use crate::bcos::{model_hash, BcosNetwork};
use crate::data::LabeledDataset;
use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Embeddings of a labelled reference set, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBank<T> {
    embeddings: Matrix<T>,
    labels: Vec<usize>,
    sample_refs: Vec<usize>,
    class_count: usize,
    model_hash: String,
}

impl<T: Scalar> FeatureBank<T> {
    pub fn new(
        embeddings: Matrix<T>,
        labels: Vec<usize>,
        sample_refs: Vec<usize>,
        class_count: usize,
        model_hash: String,
    ) -> Result<Self> {
        if embeddings.rows() == 0 || embeddings.cols() == 0 {
            return Err(Error::Empty("feature bank"));
        }
        check_dim("bank labels", embeddings.rows(), labels.len())?;
        check_dim("bank sample refs", embeddings.rows(), sample_refs.len())?;
        if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: class_count,
            });
        }
        if !embeddings.is_finite() {
            return Err(Error::invalid("bank embeddings must be finite"));
        }
        Ok(Self {
            embeddings,
            labels,
            sample_refs,
            class_count,
            model_hash,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn embeddings(&self) -> &Matrix<T> {
        &self.embeddings
    }

    pub fn row(&self, j: usize) -> &[T] {
        self.embeddings.row(j)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sample_refs(&self) -> &[usize] {
        &self.sample_refs
    }

    pub fn model_hash(&self) -> &str {
        &self.model_hash
    }

    pub fn column(&self, feature: usize) -> Vec<T> {
        (0..self.len()).map(|j| self.embeddings.get(j, feature)).collect()
    }

    pub fn verify_model(&self, expected: &str) -> Result<()> {
        if self.model_hash == expected {
            Ok(())
        } else {
            Err(Error::HashMismatch {
                expected: expected.to_string(),
                found: self.model_hash.clone(),
            })
        }
    }
}

/// Embeds every sample of `data` with the network's encoder.
pub fn build_feature_bank<T: Scalar>(
    net: &BcosNetwork<T>,
    data: &LabeledDataset<T>,
) -> Result<FeatureBank<T>> {
    if data.is_empty() {
        return Err(Error::Empty("reference dataset"));
    }
    if data.spec() != net.input_spec() {
        return Err(Error::invalid(format!(
            "dataset shape {:?} does not match network input {:?}",
            data.spec(),
            net.input_spec()
        )));
    }
    let dim = net.embedding_dim();
    let mut rows = Vec::with_capacity(data.len() * dim);
    for i in 0..data.len() {
        rows.extend(net.embed(&data.encoded(i))?);
    }
    FeatureBank::new(
        Matrix::from_vec(data.len(), dim, rows)?,
        data.labels().to_vec(),
        (0..data.len()).collect(),
        net.class_count(),
        model_hash(net),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InputSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (BcosNetwork<f64>, LabeledDataset<f64>) {
        let spec = InputSpec::new(3, 3, 1).unwrap();
        let net = BcosNetwork::random(spec, &[8, 5], 2, 1.5, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let px = (0..n * 9).map(|_| rng.random()).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        (net, LabeledDataset::new(spec, px, labels, vec!["a".into(), "b".into()], "").unwrap())
    }

    #[test]
    fn single_sample_bank_is_its_embedding() {
        let (net, data) = setup(1);
        let bank = build_feature_bank(&net, &data).unwrap();
        assert_eq!(bank.len(), 1);
        assert_eq!(bank.row(0), net.embed(&data.encoded(0)).unwrap().as_slice());
        assert_eq!(bank.model_hash(), model_hash(&net));
    }

    #[test]
    fn rows_match_collapse_readout() {
        let (net, data) = setup(20);
        let bank = build_feature_bank(&net, &data).unwrap();
        for j in 0..20 {
            let x = data.encoded(j);
            let via = net.collapse(&x).unwrap().apply(&x).unwrap();
            let row = bank.row(j);
            let num: f64 = via.iter().zip(row).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            assert!(num / den <= 1e-8);
        }
    }

    #[test]
    fn permuting_data_permutes_rows() {
        let (net, data) = setup(6);
        let perm = [3, 0, 5, 1, 4, 2];
        let a = build_feature_bank(&net, &data).unwrap();
        let b = build_feature_bank(&net, &data.subset(&perm).unwrap()).unwrap();
        for (k, &p) in perm.iter().enumerate() {
            assert_eq!(b.row(k), a.row(p));
            assert_eq!(b.labels()[k], a.labels()[p]);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (net, _) = setup(1);
        let other = LabeledDataset::new(
            InputSpec::new(2, 2, 1).unwrap(),
            vec![0.5; 4],
            vec![0],
            vec!["a".into()],
            "",
        )
        .unwrap();
        assert!(build_feature_bank(&net, &other).is_err());
    }
}
