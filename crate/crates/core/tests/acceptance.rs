//! End-to-end acceptance checks. Run with `cargo test --test acceptance`; one
//! PASS/FAIL line is printed per criterion and the process fails if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use comix::attrib::{attribution_map, render_panel, MapSource};
use comix::bcos::{
    loss_and_gradients, mean_loss, model_from_bytes, model_hash, model_to_bytes, save_model,
    load_model, train, BcosLayer, BcosNetwork, TrainConfig,
};
use comix::cdf::io::{bank_to_bytes, cdf_table_to_text};
use comix::cdf::{
    build_feature_bank, discrete_mutual_information, load_bank, load_cdf_table, mutual_information,
    save_bank, save_cdf_table, select_cdfs, CdfTable, FeatureBank, RankedFeature,
};
use comix::comix::{
    classify, explain, per_feature_predict, pseudo_label, record_document, ClassifyOptions,
};
use comix::data::{encode_input, generate_synthetic, InputSpec, LabeledDataset, SyntheticConfig};
use comix::evaluate::{EvalContext, EvalOptions};
use comix::metrics::{deletion_curve, insertion_curve, pq_index};
use comix::{Error, Matrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: u64, detail: String) -> Check {
    ensure(
        elapsed.as_secs_f64() < limit_secs as f64,
        format!("{detail}; {:.1}s (limit {limit_secs}s)", elapsed.as_secs_f64()),
    )
}

fn random_images(spec: &InputSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..spec.raw_dim()).map(|_| rng.random()).collect();
            encode_input(&raw, spec).unwrap()
        })
        .collect()
}

struct Desk {
    net: BcosNetwork<f64>,
    train: LabeledDataset<f64>,
    test: LabeledDataset<f64>,
    bank: FeatureBank<f64>,
    cdfs: CdfTable<f64>,
    backbone_acc: f64,
    comix_acc: f64,
    elapsed: Duration,
}

const DESK_M: usize = 8;
const DESK_K: usize = 3;

fn desk_experiment() -> Desk {
    let start = Instant::now();
    let cfg = SyntheticConfig::default();
    let (train_set, test) = generate_synthetic::<f64>(&cfg).unwrap();
    let tc = TrainConfig::default();
    let net = BcosNetwork::random(train_set.spec(), &[256, 64], cfg.class_count, tc.exponent, tc.seed)
        .unwrap();
    let (net, _) = train(net, &train_set, &tc).unwrap();
    let bank = build_feature_bank(&net, &train_set).unwrap();
    let cdfs = select_cdfs(&bank, DESK_M, 16).unwrap();
    let opts = ClassifyOptions::new(DESK_M, DESK_K);
    let (mut backbone, mut agg) = (0usize, 0usize);
    for i in 0..test.len() {
        let x = test.encoded(i);
        backbone += (net.predict(&x).unwrap() == test.label(i)) as usize;
        let r = classify(&net, &bank, &cdfs, &x, &opts).unwrap();
        agg += (r.aggregated_label == test.label(i)) as usize;
    }
    let n = test.len() as f64;
    Desk {
        net,
        train: train_set,
        test,
        bank,
        cdfs,
        backbone_acc: 100.0 * backbone as f64 / n,
        comix_acc: 100.0 * agg as f64 / n,
        elapsed: start.elapsed(),
    }
}

fn collapse_fidelity(desk: &Desk) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for x in random_images(&desk.net.input_spec(), 100, &mut rng) {
        let emb = desk.net.embed(&x).unwrap();
        let linear = desk.net.collapse(&x).unwrap().apply(&x).unwrap();
        let diff = emb.iter().zip(&linear).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = emb.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(diff / norm.max(1e-300));
    }
    let ok = worst <= 1e-8;
    within(start.elapsed(), 10, format!("max relative error {worst:.2e} (<= 1e-8)"))
        .and_then(|d| ensure(ok, d))
}

/// Smallest `|cos|` over every unit for one input.
fn min_abs_cos(net: &BcosNetwork<f64>, x: &[f64]) -> f64 {
    let mut act = x.to_vec();
    let mut worst = f64::INFINITY;
    for layer in net.layers() {
        let xn = act.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..layer.out_dim() {
            let w = layer.weights().row(i);
            let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = w.iter().zip(&act).map(|(a, b)| a * b).sum();
            worst = worst.min((dot / (xn * wn)).abs());
        }
        act = layer.forward(&act).unwrap();
    }
    worst
}

fn with_weight(net: &BcosNetwork<f64>, layer: usize, idx: usize, delta: f64) -> BcosNetwork<f64> {
    let mut layers: Vec<BcosLayer<f64>> = net.layers().cloned().collect();
    let target = &layers[layer];
    let mut data = target.weights().as_slice().to_vec();
    data[idx] += delta;
    let weights = Matrix::from_vec(target.out_dim(), target.in_dim(), data).unwrap();
    layers[layer] = BcosLayer::new(weights, target.exponent()).unwrap();
    let head = layers.pop().unwrap();
    BcosNetwork::new(layers, head, net.input_spec(), net.seed()).unwrap()
}

fn gradient_correctness() -> Check {
    let start = Instant::now();
    let spec = InputSpec::new(2, 2, 1).unwrap();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut excluded = 0usize;
    for (bi, &b) in [1.0, 1.5, 2.0, 2.5].iter().enumerate() {
        let net = BcosNetwork::random(spec, &[5, 4], 3, b, 10 + bi as u64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20 + bi as u64);
        let candidates = random_images(&spec, 12, &mut rng);
        let inputs: Vec<&[f64]> = candidates
            .iter()
            .filter(|x| {
                let keep = min_abs_cos(&net, x) > 1e-3;
                excluded += (!keep) as usize;
                keep
            })
            .take(6)
            .map(|x| x.as_slice())
            .collect();
        if inputs.is_empty() {
            return Err(format!("B={b}: every input has a unit with |cos| <= 1e-3"));
        }
        let labels: Vec<usize> = (0..inputs.len()).map(|i| i % 3).collect();
        let (_, grads) = loss_and_gradients(&net, &inputs, &labels, None).unwrap();
        for (l, g) in grads.layers.iter().enumerate() {
            for idx in 0..g.as_slice().len() {
                let up = mean_loss(&with_weight(&net, l, idx, eps), &inputs, &labels).unwrap();
                let down = mean_loss(&with_weight(&net, l, idx, -eps), &inputs, &labels).unwrap();
                let numeric = (up - down) / (2.0 * eps);
                let analytic = g.as_slice()[idx];
                let scale = analytic.abs().max(numeric.abs());
                let err = if scale < 1e-8 {
                    (analytic - numeric).abs()
                } else {
                    (analytic - numeric).abs() / scale
                };
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    let ok = worst <= 1e-4;
    within(
        start.elapsed(),
        30,
        format!("{checked} parameters over B in {{1, 1.5, 2, 2.5}}, max relative error {worst:.2e} (<= 1e-4), {excluded} inputs excluded"),
    )
    .and_then(|d| ensure(ok, d))
}

fn linear_degeneracy() -> Check {
    let spec = InputSpec::new(4, 4, 1).unwrap();
    let net = BcosNetwork::random(spec, &[16, 8], 3, 1.0, 3).unwrap();
    let mut product = net.head().weights().clone();
    for layer in net.encoder().iter().rev() {
        product = product.matmul(layer.weights()).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst = 0.0f64;
    for x in random_images(&spec, 50, &mut rng) {
        let logits = net.forward(&x).unwrap().logits;
        let direct = product.mul_vec(&x).unwrap();
        for (a, b) in logits.iter().zip(&direct) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:.2e} (<= 1e-12) on 50 inputs"))
}

fn histogram_mi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut pa: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0 / n;
        *pa.entry(x).or_default() += 1.0 / n;
        *pb.entry(y).or_default() += 1.0 / n;
    }
    let mut mi = 0.0;
    for (&x, &px) in &pa {
        for (&y, &py) in &pb {
            if let Some(&pxy) = joint.get(&(x, y)) {
                mi += pxy * (pxy / (px * py)).ln();
            }
        }
    }
    mi.max(0.0)
}

fn oracle_cells(values: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cuts: Vec<f64> = (1..bins).map(|k| sorted[k * values.len() / bins]).collect();
    cuts.dedup();
    values.iter().map(|v| cuts.iter().filter(|c| *c <= v).count()).collect()
}

fn mi_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(5..200);
        let (ka, kb) = (rng.random_range(1..6), rng.random_range(1..4));
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let est: f64 = discrete_mutual_information(&a, &b).unwrap();
        worst = worst.max((est - histogram_mi(&a, &b)).abs());

        let bins = rng.random_range(2..12);
        let values: Vec<f64> = (0..n).map(|_| (rng.random_range(0..20) as f64) * 0.25).collect();
        let is_class: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let est: f64 = mutual_information(&values, &is_class, bins).unwrap();
        let class_cells: Vec<usize> = is_class.iter().map(|&c| c as usize).collect();
        worst = worst.max((est - histogram_mi(&oracle_cells(&values, bins), &class_cells)).abs());
    }
    let is_class: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
    let values: Vec<f64> = is_class.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
    let perfect: f64 = mutual_information(&values, &is_class, 8).unwrap();
    let ln2_err = (perfect - std::f64::consts::LN_2).abs();
    ensure(
        worst <= 1e-12 && ln2_err <= 1e-9,
        format!("max deviation {worst:.2e} (<= 1e-12) on 100 instances, perfect predictor off ln 2 by {ln2_err:.2e}"),
    )
}

fn knn_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut ties = 0usize;
    for case in 0..100 {
        let n = rng.random_range(1..30);
        let dim = rng.random_range(1..7);
        let classes = rng.random_range(1..4);
        let data: Vec<f64> = (0..n * dim).map(|_| rng.random_range(0..4) as f64).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        let bank = FeatureBank::new(
            Matrix::from_vec(n, dim, data).unwrap(),
            labels.clone(),
            (0..n).map(|j| 1000 + j).collect(),
            classes,
            "h".into(),
        )
        .unwrap();
        let m = rng.random_range(1..=dim);
        let table: Vec<Vec<RankedFeature<f64>>> = (0..classes)
            .map(|_| {
                let mut feats: Vec<usize> = (0..dim).collect();
                feats.shuffle(&mut rng);
                feats[..m]
                    .iter()
                    .enumerate()
                    .map(|(r, &feature)| RankedFeature {
                        feature,
                        mi: (m - r) as f64,
                    })
                    .collect()
            })
            .collect();
        let cdfs = CdfTable::new(table.clone(), 4, dim, "h".into()).unwrap();
        let query: Vec<f64> = (0..dim).map(|_| rng.random_range(0..4) as f64 + 0.5 * rng.random_range(0..2) as f64).collect();

        // exhaustive scan, first minimum wins
        let sq: Vec<f64> = (0..n)
            .map(|j| (0..dim).map(|f| (bank.row(j)[f] - query[f]).powi(2)).sum())
            .collect();
        let best = sq.iter().cloned().fold(f64::INFINITY, f64::min);
        let nearest = sq.iter().position(|&d| d == best).unwrap();
        ties += (sq.iter().filter(|&&d| d == best).count() > 1) as usize;
        let pseudo = pseudo_label(&bank, &query).unwrap();
        if pseudo != labels[nearest] {
            return Err(format!("case {case}: pseudo-label {pseudo}, oracle {}", labels[nearest]));
        }

        let k = rng.random_range(1..=n);
        let grid = per_feature_predict(&bank, &cdfs, &query, pseudo, m, k).unwrap();
        for (slot, rf) in table[pseudo].iter().enumerate() {
            let f = rf.feature;
            let mut taken = vec![false; n];
            for r in 0..k {
                // repeated selection of the smallest (distance, row)
                let mut pick = None;
                for j in 0..n {
                    if taken[j] {
                        continue;
                    }
                    let d = (bank.row(j)[f] - query[f]).abs();
                    if pick.is_none_or(|(_, pd)| d < pd) {
                        pick = Some((j, d));
                    }
                }
                let (j, d) = pick.unwrap();
                taken[j] = true;
                let v = &grid[slot][r];
                if (v.feature, v.rank, v.bank_row, v.sample_ref, v.label, v.distance)
                    != (f, r, j, 1000 + j, labels[j], d)
                {
                    return Err(format!("case {case}: vote ({slot}, {r}) differs from the scan"));
                }
            }
        }
    }
    Ok(format!("100 instances match exactly, {ties} with tied nearest rows"))
}

fn mode_of(labels: &[usize]) -> usize {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let best = *counts.values().max().unwrap();
    *counts.iter().find(|(_, &c)| c == best).unwrap().0
}

fn sufficiency(desk: &Desk) -> Check {
    let opts = ClassifyOptions::new(DESK_M, DESK_K);
    let extra_cfg = SyntheticConfig {
        train_per_class: 1,
        test_per_class: 200,
        seed: 1234,
        ..SyntheticConfig::default()
    };
    let (_, extra) = generate_synthetic::<f64>(&extra_cfg).unwrap();
    let (mut premise, mut agree, mut linked, mut seen) = (0usize, 0usize, 0usize, 0usize);
    for data in [&desk.test, &extra] {
        for i in 0..data.len() {
            if premise >= 400 {
                break;
            }
            seen += 1;
            let x = data.encoded(i);
            let record = classify(&desk.net, &desk.bank, &desk.cdfs, &x, &opts).unwrap();
            if !record.unanimous_with_pseudo() {
                continue;
            }
            premise += 1;
            let panel = explain(&desk.net, &desk.train, &record, &x).unwrap();
            let panel_labels: Vec<usize> = panel.sample_refs().iter().map(|&r| desk.train.label(r)).collect();
            agree += (mode_of(&panel_labels) == record.aggregated_label) as usize;
            let mut a = panel.sample_refs();
            let mut b = record.sample_refs();
            a.sort_unstable();
            b.sort_unstable();
            linked += (a == b) as usize;
        }
    }
    ensure(
        premise >= 200 && agree == premise && linked == premise,
        format!("{premise} of {seen} samples satisfy the premise; label agreement {agree}/{premise}, ref multiset equality {linked}/{premise}"),
    )
}

fn conservation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for t in 0..50 {
        let spec = InputSpec::new(rng.random_range(2..6), rng.random_range(2..6), [1, 3][t % 2]).unwrap();
        let b = [1.0, 1.25, 1.5, 2.0, 2.5][t % 5];
        let widths = [rng.random_range(3..12), rng.random_range(2..8)];
        let net = BcosNetwork::random(spec, &widths, 2, b, t as u64).unwrap();
        let x = random_images(&spec, 1, &mut rng).pop().unwrap();
        let feature = rng.random_range(0..widths[1]);
        let value = net.embed(&x).unwrap()[feature];
        let row = net.attribution_row(&x, feature).unwrap();
        let map = attribution_map(&row, &x, &spec, feature, MapSource::Test).unwrap();
        let rel = (map.values.iter().sum::<f64>() - value).abs() / value.abs().max(1e-12);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-10, format!("max relative error {worst:.2e} (<= 1e-10) over 50 triples"))
}

fn pq_cases() -> Check {
    let one_hot = pq_index(&[0.0f64, 0.0, 1.0, 0.0], 1.0, 2.0).unwrap();
    let mut uniform_worst = 0.0f64;
    for d in 1..40 {
        let v = vec![0.7f64; d];
        uniform_worst = uniform_worst.max(pq_index(&v, 1.0, 2.0).unwrap().abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut in_range = true;
    for _ in 0..1000 {
        let d = rng.random_range(1..64);
        let w: Vec<f64> = (0..d)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-3.0..3.0) })
            .collect();
        if w.iter().all(|v| *v == 0.0) {
            continue;
        }
        let v = pq_index(&w, 1.0, 2.0).unwrap();
        in_range &= (0.0..1.0).contains(&v);
    }
    ensure(
        (one_hot - 0.5).abs() <= 1e-12 && uniform_worst <= 1e-12 && in_range,
        format!("one-hot {one_hot}, uniform max {uniform_worst:.2e}, 1000 random vectors in [0,1): {in_range}"),
    )
}

fn curve_sanity(desk: &Desk) -> Check {
    let start = Instant::now();
    let spec = desk.test.spec();
    let flat = |_: &[f64]| 0.625;
    let img = desk.test.image(0);
    let ramp: Vec<f64> = (0..spec.pixels()).map(|p| p as f64).collect();
    let base = desk.train.mean_image();
    let c_ins = insertion_curve(&flat, img, &ramp, &base, &spec, 100).unwrap().auc;
    let c_del = deletion_curve(&flat, img, &ramp, &base, &spec, 100).unwrap().auc;
    let constant_ok = (c_ins - 0.625).abs() <= 1e-12 && (c_del - 0.625).abs() <= 1e-12;

    let ctx = EvalContext::new(
        &desk.net,
        &desk.bank,
        &desk.cdfs,
        &desk.test,
        &desk.train,
        EvalOptions::new(DESK_M, DESK_K),
    )
    .unwrap();
    let samples = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut ins_attr, mut ins_rand, mut del_attr, mut del_rand) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..samples {
        let image = desk.test.image(i);
        let x = desk.test.encoded(i);
        let record = classify(&desk.net, &desk.bank, &desk.cdfs, &x, &ctx.options.classify).unwrap();
        let attribution = ctx.attribution(&x, &record.features, record.aggregated_label).unwrap();
        let score = |im: &[f64]| ctx.confidence(im, record.aggregated_label);
        ins_attr += insertion_curve(&score, image, &attribution, &ctx.baseline, &spec, 100).unwrap().auc;
        del_attr += deletion_curve(&score, image, &attribution, &ctx.baseline, &spec, 100).unwrap().auc;
        for _ in 0..10 {
            let mut order: Vec<f64> = (0..spec.pixels()).map(|p| p as f64).collect();
            order.shuffle(&mut rng);
            ins_rand += insertion_curve(&score, image, &order, &ctx.baseline, &spec, 100).unwrap().auc / 10.0;
            del_rand += deletion_curve(&score, image, &order, &ctx.baseline, &spec, 100).unwrap().auc / 10.0;
        }
    }
    let n = samples as f64;
    let (ia, ir, da, dr) = (ins_attr / n, ins_rand / n, del_attr / n, del_rand / n);
    within(
        start.elapsed(),
        300,
        format!("constant AUC exact: {constant_ok}; over {samples} images C-insertion {ia:.4} vs random {ir:.4}, C-deletion {da:.4} vs random {dr:.4}"),
    )
    .and_then(|d| ensure(constant_ok && ia > ir && da < dr, d))
}

fn desk_accuracy(desk: &Desk) -> Check {
    let gap = (desk.comix_acc - desk.backbone_acc).abs();
    within(
        desk.elapsed,
        600,
        format!(
            "backbone {:.2}% (>= 90), COMiX M={DESK_M} K={DESK_K} {:.2}% (gap {gap:.2} <= 5)",
            desk.backbone_acc, desk.comix_acc
        ),
    )
    .and_then(|d| ensure(desk.backbone_acc >= 90.0 && gap <= 5.0, d))
}

struct Artifacts {
    model: Vec<u8>,
    bank: Vec<u8>,
    cdfs: String,
    records: Vec<String>,
    report: String,
    ppm: Vec<Vec<u8>>,
}

fn small_run(dir: &std::path::Path) -> (Artifacts, BcosNetwork<f64>, FeatureBank<f64>, CdfTable<f64>) {
    let cfg = SyntheticConfig {
        train_per_class: 20,
        test_per_class: 4,
        height: 10,
        width: 10,
        seed: 17,
        ..SyntheticConfig::default()
    };
    let (train_set, test) = generate_synthetic::<f64>(&cfg).unwrap();
    let tc = TrainConfig {
        max_epochs: 15,
        seed: 4,
        ..TrainConfig::default()
    };
    let net = BcosNetwork::random(train_set.spec(), &[16, 8], 3, 1.5, 4).unwrap();
    let (net, _) = train(net, &train_set, &tc).unwrap();
    let bank = build_feature_bank(&net, &train_set).unwrap();
    let cdfs = select_cdfs(&bank, 4, 8).unwrap();
    let opts = ClassifyOptions::new(4, 2);
    let mut records = Vec::new();
    let mut ppm = Vec::new();
    for i in 0..test.len() {
        let x = test.encoded(i);
        let r = classify(&net, &bank, &cdfs, &x, &opts).unwrap();
        let panel = explain(&net, &train_set, &r, &x).unwrap();
        records.push(record_document(&r, Some(&panel)));
        if i == 0 {
            for p in render_panel(&panel, test.image(i), &train_set, dir, 2).unwrap() {
                ppm.push(std::fs::read(p).unwrap());
            }
        }
    }
    let mut eo = EvalOptions::new(4, 2);
    eo.steps = 10;
    let report = EvalContext::new(&net, &bank, &cdfs, &test, &train_set, eo)
        .unwrap()
        .evaluate()
        .unwrap()
        .report
        .to_text();
    let artifacts = Artifacts {
        model: model_to_bytes(&net),
        bank: bank_to_bytes(&bank).unwrap(),
        cdfs: cdf_table_to_text(&cdfs),
        records,
        report,
        ppm,
    };
    (artifacts, net, bank, cdfs)
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let (a, net, bank, cdfs) = small_run(&tmp.path().join("a"));
    let (b, _, _, _) = small_run(&tmp.path().join("b"));
    let mut failures = Vec::new();
    let same = [
        ("model", a.model == b.model),
        ("bank", a.bank == b.bank),
        ("cdf table", a.cdfs == b.cdfs),
        ("records", a.records == b.records),
        ("report", a.report == b.report),
        ("ppm", !a.ppm.is_empty() && a.ppm == b.ppm),
    ];
    failures.extend(same.iter().filter(|(_, ok)| !ok).map(|(n, _)| format!("{n} differs")));

    let model_path = tmp.path().join("m.bin");
    save_model(&net, &model_path).unwrap();
    let loaded: BcosNetwork<f64> = load_model(&model_path).unwrap();
    if loaded != net || model_to_bytes(&loaded) != a.model {
        failures.push("model round trip".into());
    }
    let hash = model_hash(&net);
    let bank_path = tmp.path().join("bank.bin");
    save_bank(&bank, &bank_path).unwrap();
    if load_bank::<f64>(&bank_path, &hash).ok().as_ref() != Some(&bank) {
        failures.push("bank round trip".into());
    }
    let cdf_path = tmp.path().join("cdf.txt");
    save_cdf_table(&cdfs, &cdf_path).unwrap();
    if load_cdf_table::<f64>(&cdf_path, &hash).ok().as_ref() != Some(&cdfs) {
        failures.push("cdf round trip".into());
    }
    let other = model_hash(&model_from_bytes::<f64>(&a.model).map(|mut n: BcosNetwork<f64>| {
        n = with_weight(&n, 0, 0, 1e-3);
        n
    }).unwrap());
    if !matches!(load_bank::<f64>(&bank_path, &other), Err(Error::HashMismatch { .. })) {
        failures.push("bank hash mismatch accepted".into());
    }
    if !matches!(load_cdf_table::<f64>(&cdf_path, &other), Err(Error::HashMismatch { .. })) {
        failures.push("cdf hash mismatch accepted".into());
    }
    if failures.is_empty() {
        Ok(format!(
            "model, bank, cdf table, {} records, report and {} rendered files identical; round trips exact; hash mismatches rejected",
            a.records.len(),
            a.ppm.len()
        ))
    } else {
        Err(failures.join(", "))
    }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let desk = desk_experiment();
    let results: Vec<(u32, &str, Check)> = vec![
        (1, "collapse fidelity", collapse_fidelity(&desk)),
        (2, "gradient correctness", gradient_correctness()),
        (3, "B=1 degeneracy", linear_degeneracy()),
        (4, "MI oracle equivalence", mi_oracle()),
        (5, "k-NN oracle equivalence", knn_oracle()),
        (6, "sufficiency", sufficiency(&desk)),
        (7, "conservation", conservation()),
        (8, "PQ-index analytic cases", pq_cases()),
        (9, "curve sanity", curve_sanity(&desk)),
        (10, "desk experiment", desk_accuracy(&desk)),
        (11, "determinism and persistence", determinism()),
    ];
    let mut failed = 0;
    for (id, name, result) in &results {
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
