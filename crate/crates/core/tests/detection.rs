//! Receiver cross-checks: time vs frequency metric, a naive reference
//! search, and SIC reduction to single-layer ML.

use isi_dmt::channel::*;
use isi_dmt::codec::*;
use isi_dmt::detection::*;
use isi_dmt::rng::trial_rng;
use isi_dmt::C64;
use rand::Rng;

/// Plain nested enumeration with an explicit convolution per candidate.
fn naive_ml(y: &ReceivedBlock, ch: &ChannelRealization, c: &Constellation) -> Vec<usize> {
    let shape = ch.shape();
    let (n, m) = (shape.n_data(), c.size());
    let mut best = (f64::INFINITY, vec![]);
    for code in 0..m.pow(n as u32) {
        // most significant digit first = lexicographic order
        let idx: Vec<usize> = (0..n).rev().map(|d| (code / m.pow(d as u32)) % m).collect();
        let x = encode_block(&idx, c, shape).unwrap();
        let mut metric = 0.0;
        for (taps, row) in ch.rows().zip(y.rows()) {
            let hx = convolve(&x, taps);
            metric += row.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        }
        if metric < best.0 {
            best = (metric, idx);
        }
    }
    best.1
}

fn noisy_instance(seed: u64, t: u64, shape: BlockShape, c: &Constellation) -> (ChannelRealization, Vec<usize>, ReceivedBlock) {
    let mut rng = trial_rng(seed, 0, t);
    let ch = sample_channel(&mut rng, shape);
    let sym: Vec<usize> = (0..shape.n_data()).map(|_| rng.random_range(0..c.size())).collect();
    let x = encode_block(&sym, c, shape).unwrap();
    let y = apply_channel(&x, &ch, 1.0, &mut rng).unwrap();
    (ch, sym, y)
}

#[test]
fn matches_naive_reference() {
    let shape = BlockShape::siso(3, 1).unwrap();
    let qam = make_qam(4, 10.0).unwrap();
    for t in 0..300 {
        let (ch, _, y) = noisy_instance(31, t, shape, &qam);
        let fast = ml_detect(&y, &ch, &qam, DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(fast.high_indices, naive_ml(&y, &ch, &qam), "trial {t}");
    }
}

#[test]
fn difference_channel_against_reference() {
    let shape = BlockShape::siso(3, 1).unwrap();
    let ch = ChannelRealization::siso(shape, &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
    let qam = make_qam(4, 4.0).unwrap();
    for t in 0..300 {
        let mut rng = trial_rng(32, 0, t);
        let sym: Vec<usize> = (0..3).map(|_| rng.random_range(0..4)).collect();
        let y = apply_channel(&encode_block(&sym, &qam, shape).unwrap(), &ch, 1.0, &mut rng).unwrap();
        let d = ml_detect(&y, &ch, &qam, 100).unwrap();
        assert_eq!(d.high_indices, naive_ml(&y, &ch, &qam));
    }
}

#[test]
fn time_and_frequency_metrics_agree() {
    let shape = BlockShape::new(3, 2, 2).unwrap();
    let qam = make_qam(8, 20.0).unwrap();
    for t in 0..200 {
        let (ch, _, y) = noisy_instance(33, t, shape, &qam);
        let tm = time_model(&y, &ch);
        let fm = frequency_model(&y, &ch);
        let mut rng = trial_rng(34, 0, t);
        for _ in 0..20 {
            let x: Vec<C64> = (0..3).map(|_| qam.points()[rng.random_range(0..8)]).collect();
            let (a, b) = (tm.metric(&x), fm.metric(&x));
            assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
        let dt = ml_detect_time(&y, &ch, &qam, DEFAULT_SEARCH_BUDGET).unwrap();
        let df = ml_detect(&y, &ch, &qam, DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(dt.high_indices, df.high_indices);
    }
}

#[test]
fn achieved_metric_never_exceeds_truth() {
    let shape = BlockShape::siso(4, 1).unwrap();
    let qam = make_qam(4, 3.0).unwrap();
    for t in 0..200 {
        let (ch, sym, y) = noisy_instance(35, t, shape, &qam);
        let d = ml_detect(&y, &ch, &qam, DEFAULT_SEARCH_BUDGET).unwrap();
        let truth: Vec<C64> = sym.iter().map(|&i| qam.points()[i]).collect();
        assert!(d.metric <= frequency_model(&y, &ch).metric(&truth) + 1e-9);
    }
}

#[test]
fn sic_with_muted_low_layer_is_single_layer_ml() {
    let shape = BlockShape::siso(3, 1).unwrap();
    let cfg = LayerConfig {
        r_tilde_h: 0.0,
        r_tilde_l: 0.0,
        beta: 1.0,
        snr: 10.0,
        fixed_high: 4,
        fixed_low: 4,
        low_muted: true,
    };
    let code = SuperpositionCode::new(cfg).unwrap();
    for t in 0..300 {
        let (ch, _, y) = noisy_instance(36, t, shape, &code.high);
        let sic = sic_decode(&y, &ch, &code, DEFAULT_SEARCH_BUDGET).unwrap();
        let ml = ml_detect(&y, &ch, &code.high, DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(sic.high_indices, ml.high_indices);
    }
}

#[test]
fn sic_subtracts_a_wrong_stage_one_decision() {
    // h = (1, 0) makes both stages per-sample nearest-neighbour decisions, so
    // the expected outputs can be written down directly
    let shape = BlockShape::siso(2, 1).unwrap();
    let ch = ChannelRealization::siso(shape, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
    let code = SuperpositionCode::new(LayerConfig {
        r_tilde_h: 0.0,
        r_tilde_l: 0.0,
        beta: 0.5,
        snr: 100.0,
        fixed_high: 4,
        fixed_low: 4,
        low_muted: false,
    })
    .unwrap();
    let cw = code.superpose(&[0, 0], &[0, 0], shape).unwrap();
    // push the first sample past the high-layer boundary, far enough that
    // the residual after subtracting the wrong point also flips the low layer
    let mut rows = vec![cw.time_block.clone()];
    rows[0][0] += C64::new(18.0, 0.0);
    let y = ReceivedBlock::from_rows(shape, &rows).unwrap();
    let d = sic_decode(&y, &ch, &code, 100).unwrap();

    let nearest = |pts: &[C64], v: C64| {
        (0..pts.len())
            .min_by(|&a, &b| (v - pts[a]).norm_sqr().total_cmp(&(v - pts[b]).norm_sqr()))
            .unwrap()
    };
    let high: Vec<usize> = (0..2).map(|n| nearest(code.high.points(), rows[0][n])).collect();
    let low: Vec<usize> = (0..2)
        .map(|n| nearest(code.low.points(), rows[0][n] - code.high.points()[high[n]]))
        .collect();
    assert_eq!(d.high_indices, high);
    assert_eq!(d.low_indices.as_deref(), Some(&low[..]));
    assert_ne!(high, vec![0, 0]);
    assert_ne!(low, vec![0, 0], "the stage-1 error carries into stage 2");
}
