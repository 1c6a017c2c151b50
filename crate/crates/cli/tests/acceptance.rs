//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

#[path = "../../core/tests/support/reference.rs"]
mod reference;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use tempseg_core::fusion::{fuse_attention, FrameBuffer};
use tempseg_core::metrics::{area_series, iou, iou_series};
use tempseg_core::segio::pgm::{decode_pgm, encode_pgm};
use tempseg_core::segio::{decode_tensor, encode_tensor};
use tempseg_core::synth::{generate, Dropout, SynthConfig, SynthRng};
use tempseg_core::{
    argmax_labels, compare_methods, run_pipeline, softmax_pixelwise, BinaryMask, CategoryTable,
    FusionConfig, LabelMap, LogitMap, Method, MetricKind, NamedReport, ProbMap, ScoreFrame,
    ScoreTensor, SeriesReport,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

fn frames_of(seq: &tempseg_core::synth::SynthSequence) -> Vec<ScoreFrame> {
    seq.frames.iter().cloned().map(Into::into).collect()
}

fn recovery_bound() -> Outcome {
    let start = Instant::now();
    let areas = |dropped: Vec<usize>| -> Result<Vec<f64>, String> {
        let seq = generate(&SynthConfig {
            height: 64,
            width: 64,
            channels: 3,
            frames: 20,
            dropout: Dropout::Frames(dropped),
            seed: 1,
            ..SynthConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let out = run_pipeline(
            &frames_of(&seq),
            Method::ImageBuffer,
            &FusionConfig::default(),
            &seq.categories,
        )
        .map_err(|e| e.to_string())?;
        Ok(area_series(&out, 1, &seq.categories)
            .map_err(|e| e.to_string())?
            .per_frame)
    };
    let three = areas(vec![8, 9, 10])?;
    let four = areas(vec![8, 9, 10, 11])?;
    let min3 = three.iter().cloned().fold(f64::INFINITY, f64::min);
    check(min3 > 0.0, format!("dropout {{8,9,10}}: min area {min3}"))?;
    let zeros = four.iter().filter(|&&a| a == 0.0).count();
    check(zeros >= 1, "dropout {8,9,10,11}: no frame with area 0")?;
    within(start.elapsed(), 1.0)?;
    Ok(format!(
        "min area {min3} with 3 dropped; {zeros} empty frame(s) with 4"
    ))
}

fn variation_direction() -> Outcome {
    let start = Instant::now();
    let mut wins = 0;
    let mut detail = Vec::new();
    for seed in 0..10u64 {
        let seq = generate(&SynthConfig {
            height: 128,
            width: 128,
            channels: 3,
            frames: 60,
            size: 24,
            velocity: (1.0, 0.0),
            dropout: Dropout::Probability(0.2),
            noise_sigma: 0.5,
            seed,
            ..SynthConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let frames = frames_of(&seq);
        let std_of = |m: Method| -> Result<f64, String> {
            let out = run_pipeline(&frames, m, &FusionConfig::default(), &seq.categories)
                .map_err(|e| e.to_string())?;
            Ok(iou_series(&out, &seq.masks, 1)
                .map_err(|e| e.to_string())?
                .variation_std)
        };
        let (b, ib, am) = (
            std_of(Method::Baseline)?,
            std_of(Method::ImageBuffer)?,
            std_of(Method::Attention)?,
        );
        if ib < b && am < b {
            wins += 1;
        }
        detail.push(format!("{b:.3}/{ib:.3}/{am:.3}"));
    }
    check(
        wins >= 9,
        format!("only {wins}/10 seeds improved: {}", detail.join(" ")),
    )?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "{wins}/10 seeds; seed 0 baseline/ib/am = {}",
        detail[0]
    ))
}

fn random_frames(rng: &mut SynthRng) -> Vec<ScoreFrame> {
    let h = 1 + (rng.next_u64() % 8) as usize;
    let w = 1 + (rng.next_u64() % 8) as usize;
    let c = 2 + (rng.next_u64() % 5) as usize;
    let n = 1 + (rng.next_u64() % 12) as usize;
    (0..n)
        .map(|_| {
            let v = (0..h * w * c)
                .map(|_| (3.0 * rng.next_gaussian()) as f32)
                .collect();
            LogitMap::new(h, w, c, v).unwrap().into()
        })
        .collect()
}

fn neutrality() -> Outcome {
    let mut rng = SynthRng::new(2024);
    for i in 0..100 {
        let frames = random_frames(&mut rng);
        let c = match &frames[0] {
            ScoreFrame::Logits(l) => l.shape().channels,
            ScoreFrame::Probabilities(p) => p.shape().channels,
        };
        let table = CategoryTable::anonymous(c).unwrap();
        let names: Vec<String> = table.entries().iter().map(|e| e.name.clone()).collect();
        let neutral = FusionConfig::new(4, vec![1.0, 0.0, 0.0, 0.0], 0.0)
            .map_err(|e| e.to_string())?
            .with_targets(names);
        let a = run_pipeline(&frames, Method::Attention, &neutral, &table)
            .map_err(|e| e.to_string())?;
        let b =
            run_pipeline(&frames, Method::Baseline, &neutral, &table).map_err(|e| e.to_string())?;
        check(a == b, format!("sequence {i} differs"))?;
    }
    Ok("100/100 sequences identical".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    for pattern in 0..64u32 {
        let seq = generate(&SynthConfig {
            height: 4,
            width: 4,
            channels: 3,
            frames: 6,
            size: 2,
            velocity: (0.0, 0.0),
            dropout: Dropout::Frames((0..6).filter(|f| pattern & (1 << f) != 0).collect()),
            noise_sigma: 1.5,
            seed: u64::from(pattern),
            ..SynthConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let raw: Vec<Vec<f32>> = seq.frames.iter().map(|f| f.values().to_vec()).collect();
        let frames = frames_of(&seq);
        let cfg = FusionConfig::default();
        let targets = cfg
            .target_flags(&seq.categories)
            .map_err(|e| e.to_string())?;

        let ib: Vec<Vec<u8>> = run_pipeline(&frames, Method::ImageBuffer, &cfg, &seq.categories)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(LabelMap::into_labels)
            .collect();
        check(
            ib == reference::image_buffer(&raw, 3, 4, &targets),
            format!("image buffer differs on pattern {pattern:06b}"),
        )?;

        let want = reference::attention(&raw, 3, cfg.weights(), cfg.threshold(), &targets, true);
        let mut buf = FrameBuffer::new(4).unwrap();
        for (t, f) in frames.iter().enumerate() {
            buf.push(f.probabilities()).unwrap();
            let (aug, labels) =
                fuse_attention(&buf, &cfg, &seq.categories).map_err(|e| e.to_string())?;
            let same_bits = aug
                .values()
                .iter()
                .zip(&want[t].0)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            check(
                same_bits && labels.labels() == &want[t].1[..],
                format!("attention differs on pattern {pattern:06b} frame {t}"),
            )?;
        }
        compared += 1;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "{compared}/64 patterns bit-identical for both methods"
    ))
}

fn numeric_suite() -> Outcome {
    let mut rng = SynthRng::new(77);
    let (h, w, c) = (100, 100, 5);
    let v: Vec<f32> = (0..h * w * c)
        .map(|_| (8.0 * rng.next_gaussian()) as f32)
        .collect();
    let logits = LogitMap::new(h, w, c, v.clone()).unwrap();
    let probs = softmax_pixelwise(&logits);

    let worst_sum = probs
        .values()
        .chunks(c)
        .map(|px| (px.iter().map(|&x| f64::from(x)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    check(worst_sum <= 1e-6, format!("pixel sum off by {worst_sum:e}"))?;

    let table = CategoryTable::anonymous(c).unwrap();
    let a = argmax_labels(&logits, &table).unwrap();
    let b = argmax_labels(&probs, &table).unwrap();
    check(a == b, "argmax changed under softmax")?;

    // Logits and shifts on a 2^-10 grid below 2^13 keep `x + k` exact in f32,
    // so any difference comes from the softmax and not from the inputs.
    let dyadic = |x: f64| ((x * 1024.0).round() / 1024.0) as f32;
    let grid: Vec<f32> = v.iter().map(|&x| dyadic(f64::from(x))).collect();
    let base = softmax_pixelwise(&LogitMap::new(h, w, c, grid.clone()).unwrap());
    let mut worst_shift = 0.0f32;
    for _ in 0..5 {
        let shift = dyadic(500.0 * rng.next_gaussian());
        let shifted = LogitMap::new(h, w, c, grid.iter().map(|x| x + shift).collect()).unwrap();
        let err = softmax_pixelwise(&shifted)
            .values()
            .iter()
            .zip(base.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f32, f32::max);
        check(
            err <= 1e-6,
            format!("shift by {shift} moved a value by {err:e}"),
        )?;
        worst_shift = worst_shift.max(err);
    }

    let seq = generate(&SynthConfig {
        frames: 8,
        dropout: Dropout::Probability(0.4),
        noise_sigma: 3.0,
        seed: 4,
        ..SynthConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let buffered: Vec<ProbMap> = seq.frames.iter().map(softmax_pixelwise).collect();
    let mut counts = Vec::new();
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let cfg = FusionConfig::new(4, vec![4.0, 3.0, 2.0, 1.0], t).map_err(|e| e.to_string())?;
        let mut buf = FrameBuffer::new(4).unwrap();
        for p in &buffered {
            buf.push(p.clone()).unwrap();
        }
        let (_, labels) = fuse_attention(&buf, &cfg, &seq.categories).map_err(|e| e.to_string())?;
        counts.push(labels.count(1));
    }
    check(
        counts.windows(2).all(|p| p[1] <= p[0]),
        format!("target counts rise with T: {counts:?}"),
    )?;
    Ok(format!(
        "sum err {worst_sum:.1e}, shift err {worst_shift:.1e}, target px over T {counts:?}"
    ))
}

fn tempseg(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tempseg"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(
        out.status.success(),
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)),
    )
}

fn end_to_end(root: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let cfg = root.join("synth.cfg");
    fs::write(&cfg, "frames = 24\ndropout_probability = 0.25\nseed = 99\n")
        .map_err(|e| e.to_string())?;
    let seq = root.join("seq");
    tempseg(&["synth", "--config", &s(&cfg), "--out", &s(&seq)])?;
    let manifest = s(&seq.join("manifest.txt"));
    let mut eval = vec![
        "eval".to_string(),
        "--manifest".into(),
        manifest.clone(),
        "--out".into(),
        s(&root.join("eval")),
    ];
    for m in ["baseline", "image_buffer", "attention"] {
        let d = s(&root.join(m));
        tempseg(&["fuse", "--manifest", &manifest, "--method", m, "--out", &d])?;
        eval.push("--pred".into());
        eval.push(format!("{m}={d}"));
    }
    tempseg(&eval.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut csvs: Vec<(String, Vec<u8>)> = fs::read_dir(root.join("eval"))
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    csvs.sort();
    Ok(csvs)
}

fn io_round_trips() -> Outcome {
    let mut rng = SynthRng::new(500);
    for i in 0..500 {
        let h = 1 + (rng.next_u64() % 16) as usize;
        let w = 1 + (rng.next_u64() % 16) as usize;
        let c = 2 + (rng.next_u64() % 6) as usize;
        let frame: ScoreFrame = if i % 2 == 0 {
            let v = (0..h * w * c)
                .map(|_| loop {
                    let x = f32::from_bits(rng.next_u64() as u32);
                    if x.is_finite() {
                        break x;
                    }
                })
                .collect();
            LogitMap::new(h, w, c, v).unwrap().into()
        } else {
            let v = (0..h * w * c)
                .map(|_| (4.0 * rng.next_gaussian()) as f32)
                .collect();
            softmax_pixelwise(&LogitMap::new(h, w, c, v).unwrap()).into()
        };
        let bytes = encode_tensor(&frame).map_err(|e| e.to_string())?;
        let back = decode_tensor(&bytes).map_err(|e| e.to_string())?;
        check(
            encode_tensor(&back).map_err(|e| e.to_string())? == bytes,
            format!("tensor {i} changed on round trip"),
        )?;

        let labels: Vec<u8> = (0..h * w).map(|_| rng.next_u64() as u8).collect();
        let (w2, h2, px) = decode_pgm(&encode_pgm(w, h, &labels)).map_err(|e| e.to_string())?;
        check(
            (w2, h2) == (w, h) && px == labels,
            format!("label map {i} changed on round trip"),
        )?;
    }

    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (ra, rb) = (end_to_end(a.path())?, end_to_end(b.path())?);
    check(ra.len() == 4, format!("expected 4 CSVs, got {}", ra.len()))?;
    check(ra == rb, "CSV bytes differ between runs")?;
    Ok(format!(
        "500 tensor + 500 label map round trips; {} CSVs identical",
        ra.len()
    ))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

fn hand_values() -> Outcome {
    let area = SeriesReport::from_series(vec![10.0, 14.0, 14.0, 8.0]);
    check(
        area.diffs == [4.0, 0.0, -6.0],
        format!("diffs {:?}", area.diffs),
    )?;
    let m = -2.0 / 3.0;
    let want = (((4.0 - m) * (4.0 - m) + m * m + (-6.0 - m) * (-6.0 - m)) / 3.0f64).sqrt();
    check(
        close(area.variation_std, want),
        format!("area std {}", area.variation_std),
    )?;
    check(
        close(area.variation_std, 4.109_609_335_312_651),
        "area std vs high-precision value",
    )?;

    // 8 predicted, 8 true, 4 shared on a 4x4 grid
    let pred: Vec<u8> = (0..16).map(|i| u8::from(i < 8)).collect();
    let truth: Vec<bool> = (0..16).map(|i| (4..12).contains(&i)).collect();
    let pred = LabelMap::new(4, 4, pred).unwrap();
    let truth = BinaryMask::new(4, 4, truth).unwrap();
    let v = iou(&pred, &truth, 1).map_err(|e| e.to_string())?;
    check(close(v, 4.0 / 12.0), format!("partial IoU {v}"))?;

    let alt = SeriesReport::from_series(vec![1.0, 0.0, 1.0, 0.0, 1.0]);
    check(
        alt.diffs == [-1.0, 1.0, -1.0, 1.0],
        format!("alt diffs {:?}", alt.diffs),
    )?;
    check(
        close(alt.variation_std, 1.0),
        format!("alt std {}", alt.variation_std),
    )?;

    let table = compare_methods(&[
        NamedReport::new("baseline", MetricKind::Iou, fixed_std(8.65)),
        NamedReport::new("image_buffer", MetricKind::Iou, fixed_std(4.64)),
        NamedReport::new("attention", MetricKind::Iou, fixed_std(4.11)),
    ]);
    check(
        table.best(MetricKind::Iou) == Some("attention"),
        "wrong method flagged",
    )?;
    Ok("area std 4.1096093353, IoU 1/3, alternating std 1, attention flagged".into())
}

fn fixed_std(s: f64) -> SeriesReport {
    SeriesReport {
        per_frame: vec![],
        diffs: vec![],
        variation_std: s,
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("recovery bound", recovery_bound),
        ("variation STD direction", variation_direction),
        ("attention neutrality", neutrality),
        ("oracle equivalence", oracle_equivalence),
        ("numeric suite", numeric_suite),
        ("I/O round trips and determinism", io_round_trips),
        ("hand-computed metrics", hand_values),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {}. {name} ({secs:.2} s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.2} s): {msg}", i + 1);
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
