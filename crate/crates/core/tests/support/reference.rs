//! Brute-force fusion reference written straight from the definitions.
//!
//! Works on raw `Vec<f32>` frames (H×W×C, channel fastest) and loops over
//! every frame, pixel and window position with no shared buffer state.
#![allow(dead_code)]

pub fn softmax(logits: &[f32], c: usize) -> Vec<f32> {
    let mut out = Vec::with_capacity(logits.len());
    for px in logits.chunks(c) {
        let mut m = px[0];
        for &v in &px[1..] {
            if v > m {
                m = v;
            }
        }
        let m = m as f64;
        let mut z = 0.0f64;
        for &v in px {
            z += (v as f64 - m).exp();
        }
        for &v in px {
            out.push(((v as f64 - m).exp() / z) as f32);
        }
    }
    out
}

pub fn argmax(px: &[f32]) -> u8 {
    let mut best = 0usize;
    for i in 1..px.len() {
        if px[i] > px[best] {
            best = i;
        }
    }
    best as u8
}

pub fn labels(scores: &[f32], c: usize) -> Vec<u8> {
    scores.chunks(c).map(argmax).collect()
}

/// Per-frame label maps after image-buffer fusion with window `n`.
pub fn image_buffer(frames: &[Vec<f32>], c: usize, n: usize, targets: &[bool]) -> Vec<Vec<u8>> {
    let base: Vec<Vec<u8>> = frames.iter().map(|f| labels(f, c)).collect();
    let mut out = Vec::new();
    for t in 0..frames.len() {
        let mut fused = base[t].clone();
        for p in 0..fused.len() {
            if targets[fused[p] as usize] {
                continue;
            }
            // newest first, stop at the window edge or sequence start
            let mut age = 1;
            while age < n && age <= t {
                let l = base[t - age][p];
                if targets[l as usize] {
                    fused[p] = l;
                    break;
                }
                age += 1;
            }
        }
        out.push(fused);
    }
    out
}

/// Per-frame `(augmented scores, labels)` after attention fusion.
pub fn attention(
    frames: &[Vec<f32>],
    c: usize,
    weights: &[f64],
    threshold: f64,
    targets: &[bool],
    inputs_are_logits: bool,
) -> Vec<(Vec<f32>, Vec<u8>)> {
    let probs: Vec<Vec<f32>> = frames
        .iter()
        .map(|f| {
            if inputs_are_logits {
                softmax(f, c)
            } else {
                f.clone()
            }
        })
        .collect();
    let n = weights.len();
    let mut out = Vec::new();
    for t in 0..probs.len() {
        let mut aug = vec![0.0f32; probs[t].len()];
        for i in 0..aug.len() {
            let ch = i % c;
            if !targets[ch] {
                aug[i] = probs[t][i];
                continue;
            }
            let mut s = 0.0f64;
            let mut age = 0;
            while age < n && age <= t {
                s += weights[age] * probs[t - age][i] as f64;
                age += 1;
            }
            aug[i] = if s < threshold { 0.0 } else { s as f32 };
        }
        let l = labels(&aug, c);
        out.push((aug, l));
    }
    out
}
