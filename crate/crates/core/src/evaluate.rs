//! Dataset-level evaluation of a trained pipeline.
//!
//! Each test sample is classified and its confidence is the COMiX vote share of
//! the predicted class. Its attribution sums the contribution maps of the
//! class-defining features that decided it, each signed by the direction of
//! the feature's class association: a feature whose bank mean is lower for the
//! class than for the rest contributes its negated map. Curves and masking use
//! the per-pixel mean of the reference images as baseline.

use std::collections::BTreeSet;

use crate::attrib::{attribution_map, MapSource};
use crate::bcos::BcosNetwork;
use crate::cdf::{CdfTable, FeatureBank};
use crate::comix::{classify, ClassifyOptions, PredictionRecord};
use crate::data::{encode_input, InputSpec, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{
    accuracy, confusion_matrix, deletion_curve, drop_increase_from_scores, insertion_curve,
    keep_top, pq_index, CurveResult, MetricReport,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Accuracy,
    DropIncrease,
    Curves,
    PqIndex,
    Confusion,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Accuracy,
        Metric::DropIncrease,
        Metric::Curves,
        Metric::PqIndex,
        Metric::Confusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::DropIncrease => "drop",
            Metric::Curves => "curves",
            Metric::PqIndex => "pq",
            Metric::Confusion => "confusion",
        }
    }

    /// Parses a comma-separated list such as `accuracy,curves`; `all` selects
    /// every metric.
    pub fn parse_set(text: &str) -> Result<BTreeSet<Metric>> {
        let mut set = BTreeSet::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                set.extend(Metric::ALL);
                continue;
            }
            let m = Metric::ALL
                .into_iter()
                .find(|m| m.name() == part)
                .ok_or_else(|| Error::invalid(format!("unknown metric '{part}'")))?;
            set.insert(m);
        }
        if set.is_empty() {
            return Err(Error::invalid("metric set is empty"));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub classify: ClassifyOptions,
    pub steps: usize,
    pub fraction: f64,
    pub metrics: BTreeSet<Metric>,
}

impl EvalOptions {
    pub fn new(m: usize, k: usize) -> Self {
        Self {
            classify: ClassifyOptions::new(m, k),
            steps: 100,
            fraction: 0.5,
            metrics: Metric::ALL.into_iter().collect(),
        }
    }

    fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }

    fn config(&self) -> String {
        format!("M={} K={}", self.classify.m, self.classify.k)
    }
}

/// Everything needed to evaluate one sample; shareable across threads.
pub struct EvalContext<'a, T> {
    pub net: &'a BcosNetwork<T>,
    pub bank: &'a FeatureBank<T>,
    pub cdfs: &'a CdfTable<T>,
    pub test: &'a LabeledDataset<T>,
    pub baseline: Vec<T>,
    pub options: EvalOptions,
    /// `orientation[c][f]` is `±1`.
    pub orientation: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleEval<T> {
    pub label: usize,
    pub backbone: usize,
    pub pseudo: usize,
    pub predicted: usize,
    pub tie_broken: bool,
    /// Per-pixel attribution of the predicted class.
    pub attribution: Vec<T>,
    pub insertion: Option<CurveResult<T>>,
    pub deletion: Option<CurveResult<T>>,
    /// Confidence on the full and on the masked image.
    pub drop_pair: Option<(T, T)>,
    pub pq: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput<T> {
    pub report: MetricReport,
    /// Sample-averaged curves, present when curves were requested.
    pub insertion: Option<CurveResult<T>>,
    pub deletion: Option<CurveResult<T>>,
}

impl<'a, T: Scalar> EvalContext<'a, T> {
    /// Uses the mean image of `reference` as the masking baseline.
    pub fn new(
        net: &'a BcosNetwork<T>,
        bank: &'a FeatureBank<T>,
        cdfs: &'a CdfTable<T>,
        test: &'a LabeledDataset<T>,
        reference: &LabeledDataset<T>,
        options: EvalOptions,
    ) -> Result<Self> {
        if test.spec() != net.input_spec() || reference.spec() != net.input_spec() {
            return Err(Error::invalid("evaluation data does not match the network input shape"));
        }
        if options.wants(Metric::Curves) && options.steps < 2 {
            return Err(Error::invalid("curves need at least two steps"));
        }
        if !(options.fraction > 0.0 && options.fraction < 1.0) {
            return Err(Error::invalid("mask fraction must lie in (0, 1)"));
        }
        if options.classify.k > bank.len() {
            return Err(Error::invalid(format!(
                "K={} exceeds the bank size {}",
                options.classify.k,
                bank.len()
            )));
        }
        Ok(Self {
            net,
            bank,
            cdfs,
            test,
            baseline: reference.mean_image(),
            options,
            orientation: class_orientation(bank),
        })
    }

    pub fn spec(&self) -> InputSpec {
        self.test.spec()
    }

    pub fn classify_raw(&self, image: &[T]) -> Result<PredictionRecord<T>> {
        let x = encode_input(image, &self.spec())?;
        classify(self.net, self.bank, self.cdfs, &x, &self.options.classify)
    }

    /// Vote share of `target` for a raw image.
    pub fn confidence(&self, image: &[T], target: usize) -> T {
        self.classify_raw(image)
            .map(|r| r.vote_share(target))
            .expect("validated image classifies")
    }

    /// Oriented sum of the contribution maps of `features` for the encoded
    /// input `x` and predicted `class`.
    pub fn attribution(&self, x: &[T], features: &[usize], class: usize) -> Result<Vec<T>> {
        let collapsed = self.net.collapse(x)?;
        let spec = self.spec();
        let signs = self
            .orientation
            .get(class)
            .ok_or_else(|| Error::invalid(format!("unknown class {class}")))?;
        let mut total = vec![T::zero(); spec.pixels()];
        for &f in features {
            let map = attribution_map(collapsed.attribution_row(f), x, &spec, f, MapSource::Test)?;
            for (t, v) in total.iter_mut().zip(map.values) {
                *t = *t + signs[f] * v;
            }
        }
        Ok(total)
    }

    pub fn evaluate_sample(&self, i: usize) -> Result<SampleEval<T>> {
        let spec = self.spec();
        let image = self.test.image(i);
        let x = encode_input(image, &spec)?;
        let record = classify(self.net, self.bank, self.cdfs, &x, &self.options.classify)?;
        let target = record.aggregated_label;
        let attribution = self.attribution(&x, &record.features, target)?;
        let score = |img: &[T]| self.confidence(img, target);
        let opts = &self.options;

        let (insertion, deletion) = if opts.wants(Metric::Curves) {
            (
                Some(insertion_curve(&score, image, &attribution, &self.baseline, &spec, opts.steps)?),
                Some(deletion_curve(&score, image, &attribution, &self.baseline, &spec, opts.steps)?),
            )
        } else {
            (None, None)
        };
        let drop_pair = if opts.wants(Metric::DropIncrease) {
            let masked = keep_top(image, &attribution, &self.baseline, &spec, opts.fraction)?;
            Some((record.vote_share(target), score(&masked)))
        } else {
            None
        };
        let embedding = self.net.embed(&x)?;
        let pq = if opts.wants(Metric::PqIndex) && embedding.iter().any(|v| *v != T::zero()) {
            Some(pq_index(&embedding, 1.0, 2.0)?)
        } else {
            None
        };
        Ok(SampleEval {
            label: self.test.label(i),
            backbone: self.net.predict(&x)?,
            pseudo: record.pseudo_label,
            predicted: target,
            tie_broken: record.tie_broken,
            attribution,
            insertion,
            deletion,
            drop_pair,
            pq,
        })
    }

    /// Evaluates every test sample in order.
    pub fn evaluate(&self) -> Result<EvalOutput<T>> {
        let samples = (0..self.test.len())
            .map(|i| self.evaluate_sample(i))
            .collect::<Result<Vec<_>>>()?;
        self.summarize(&samples)
    }

    /// Aggregates per-sample results, which must be in test-set order.
    pub fn summarize(&self, samples: &[SampleEval<T>]) -> Result<EvalOutput<T>> {
        if samples.is_empty() {
            return Err(Error::Empty("no samples evaluated"));
        }
        let opts = &self.options;
        let config = opts.config();
        let mut report = MetricReport::default();
        report.push("samples", "", samples.len() as f64);
        let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
        let predicted: Vec<usize> = samples.iter().map(|s| s.predicted).collect();
        let pseudo: Vec<usize> = samples.iter().map(|s| s.pseudo).collect();

        if opts.wants(Metric::Accuracy) {
            let backbone: Vec<usize> = samples.iter().map(|s| s.backbone).collect();
            report.push("backbone_accuracy", "", accuracy(&backbone, &labels)?);
            report.push("comix_accuracy", config.clone(), accuracy(&predicted, &labels)?);
            report.push("pseudo_label_accuracy", "", accuracy(&pseudo, &labels)?);
            let ties = samples.iter().filter(|s| s.tie_broken).count();
            report.push("tie_rate", config.clone(), 100.0 * ties as f64 / samples.len() as f64);
        }
        if opts.wants(Metric::DropIncrease) {
            let pairs: Vec<(T, T)> = samples.iter().filter_map(|s| s.drop_pair).collect();
            let (drop, inc) = drop_increase_from_scores(&pairs)?;
            let cfg = format!("{config} fraction={}", opts.fraction);
            report.push("average_drop", cfg.clone(), drop.lossy_f64());
            report.push("average_increase", cfg, inc.lossy_f64());
        }
        let (mut insertion, mut deletion) = (None, None);
        if opts.wants(Metric::Curves) {
            let cfg = format!("{config} steps={}", opts.steps);
            let ins = mean_curve(samples.iter().filter_map(|s| s.insertion.as_ref()))?;
            let del = mean_curve(samples.iter().filter_map(|s| s.deletion.as_ref()))?;
            report.push("c_insertion_auc", cfg.clone(), ins.auc.lossy_f64());
            report.push("c_deletion_auc", cfg, del.auc.lossy_f64());
            insertion = Some(ins);
            deletion = Some(del);
        }
        if opts.wants(Metric::PqIndex) {
            let values: Vec<f64> = samples.iter().filter_map(|s| s.pq.map(|v| v.lossy_f64())).collect();
            let mean = if values.is_empty() {
                0.0
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            report.push("pq_index", "p=1 q=2", mean);
        }
        if opts.wants(Metric::Confusion) {
            let classes = self.net.class_count();
            let m = confusion_matrix(&pseudo, &predicted, classes)?;
            for (i, row) in m.iter().enumerate() {
                for (j, &count) in row.iter().enumerate() {
                    report.push(format!("confusion_pseudo_final[{i}][{j}]"), config.clone(), count as f64);
                }
            }
        }
        Ok(EvalOutput {
            report,
            insertion,
            deletion,
        })
    }
}

/// `+1` where a feature's bank mean for the class is at least its mean over the
/// other classes, `-1` otherwise. Classes absent from one side get `+1`.
pub fn class_orientation<T: Scalar>(bank: &FeatureBank<T>) -> Vec<Vec<T>> {
    let dim = bank.dim();
    let classes = bank.class_count();
    let mut sums = vec![vec![0.0f64; dim]; classes];
    let mut counts = vec![0usize; classes];
    let mut total = vec![0.0f64; dim];
    for j in 0..bank.len() {
        let c = bank.labels()[j];
        counts[c] += 1;
        for (f, v) in bank.row(j).iter().enumerate() {
            sums[c][f] += v.lossy_f64();
            total[f] += v.lossy_f64();
        }
    }
    (0..classes)
        .map(|c| {
            let rest = bank.len() - counts[c];
            (0..dim)
                .map(|f| {
                    if counts[c] == 0 || rest == 0 {
                        return T::one();
                    }
                    let inside = sums[c][f] / counts[c] as f64;
                    let outside = (total[f] - sums[c][f]) / rest as f64;
                    if inside >= outside {
                        T::one()
                    } else {
                        -T::one()
                    }
                })
                .collect()
        })
        .collect()
}

/// Pointwise mean of curves sharing the same fractions.
pub fn mean_curve<'c, T: Scalar + 'c>(
    curves: impl Iterator<Item = &'c CurveResult<T>>,
) -> Result<CurveResult<T>> {
    let mut sum: Option<CurveResult<T>> = None;
    let mut n = 0usize;
    for c in curves {
        n += 1;
        match sum.as_mut() {
            None => sum = Some(c.clone()),
            Some(acc) => {
                if acc.fractions != c.fractions {
                    return Err(Error::invalid("curves have different fractions"));
                }
                for (a, &b) in acc.scores.iter_mut().zip(&c.scores) {
                    *a = *a + b;
                }
                acc.auc = acc.auc + c.auc;
            }
        }
    }
    let mut acc = sum.ok_or(Error::Empty("no curves to average"))?;
    let n = T::of(n as f64);
    for s in acc.scores.iter_mut() {
        *s = *s / n;
    }
    acc.auc = acc.auc / n;
    Ok(acc)
}
