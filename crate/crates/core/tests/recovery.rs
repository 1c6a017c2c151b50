use tempseg_core::synth::{generate, Dropout, SynthConfig};
use tempseg_core::{area_series, run_pipeline, FusionConfig, Method, ScoreFrame};

fn target_areas(dropped: &[usize], method: Method) -> Vec<f64> {
    let seq = generate(&SynthConfig {
        dropout: Dropout::Frames(dropped.to_vec()),
        seed: 7,
        ..SynthConfig::default()
    })
    .unwrap();
    let frames: Vec<ScoreFrame> = seq.frames.into_iter().map(Into::into).collect();
    let out = run_pipeline(&frames, method, &FusionConfig::default(), &seq.categories).unwrap();
    area_series(&out, 1, &seq.categories).unwrap().per_frame
}

#[test]
fn baseline_loses_the_object_on_dropout_frames() {
    let a = target_areas(&[8, 9, 10], Method::Baseline);
    for (t, &v) in a.iter().enumerate() {
        assert_eq!(v == 0.0, (8..=10).contains(&t), "frame {t}: {v}");
    }
}

#[test]
fn image_buffer_bridges_three_dropped_frames() {
    let a = target_areas(&[8, 9, 10], Method::ImageBuffer);
    assert!(a.iter().all(|&v| v > 0.0), "{a:?}");
}

#[test]
fn image_buffer_cannot_bridge_four() {
    let a = target_areas(&[8, 9, 10, 11], Method::ImageBuffer);
    assert_eq!(a[11], 0.0);
    assert!(a.iter().enumerate().all(|(t, &v)| t == 11 || v > 0.0));
}

#[test]
fn attention_bridges_with_default_weights() {
    let a = target_areas(&[8, 9, 10], Method::Attention);
    assert!(a[8] > 0.0 && a[9] > 0.0, "{a:?}");
}
