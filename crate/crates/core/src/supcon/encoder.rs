//! Small convolutional encoder with a projection head, forward and backward.
//!
//! 32x32 input -> conv 5x5 (8) -> ReLU -> 2x2 max-pool -> conv 5x5 (16) ->
//! ReLU -> 2x2 max-pool -> dense 400->64 + ReLU (embedding) -> dense 64->32
//! -> L2 normalization (projection).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::BinaryImage;
use crate::{Error, Result};

pub const INPUT_SIDE: usize = 32;
pub const INPUT_LEN: usize = INPUT_SIDE * INPUT_SIDE;
const K: usize = 5;
pub const CONV1_CHANNELS: usize = 8;
const S1: usize = INPUT_SIDE - K + 1; // 28
const P1: usize = S1 / 2; // 14
pub const CONV2_CHANNELS: usize = 16;
const S2: usize = P1 - K + 1; // 10
const P2: usize = S2 / 2; // 5
const FLAT: usize = CONV2_CHANNELS * P2 * P2; // 400
pub const EMBED_DIM: usize = 64;
pub const PROJ_DIM: usize = 32;

const W1: usize = 0;
const B1: usize = W1 + CONV1_CHANNELS * K * K;
const W2: usize = B1 + CONV1_CHANNELS;
const B2: usize = W2 + CONV2_CHANNELS * CONV1_CHANNELS * K * K;
const W3: usize = B2 + CONV2_CHANNELS;
const B3: usize = W3 + EMBED_DIM * FLAT;
const W4: usize = B3 + EMBED_DIM;
const B4: usize = W4 + PROJ_DIM * EMBED_DIM;
pub const PARAM_COUNT: usize = B4 + PROJ_DIM;

/// All trainable weights in one flat buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    pub data: Vec<f32>,
}

impl EncoderParams {
    pub fn zeros() -> Self {
        Self {
            data: vec![0.0; PARAM_COUNT],
        }
    }

    /// He-uniform weights, small positive biases.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0f32; PARAM_COUNT];
        let mut fill = |range: std::ops::Range<usize>, fan_in: usize| {
            let bound = (6.0 / fan_in as f64).sqrt();
            for w in &mut data[range] {
                *w = rng.gen_range(-bound..bound) as f32;
            }
        };
        fill(W1..B1, K * K);
        fill(W2..B2, CONV1_CHANNELS * K * K);
        fill(W3..B3, FLAT);
        fill(W4..B4, EMBED_DIM);
        for b in [B1..W2, B2..W3, B3..W4, B4..PARAM_COUNT] {
            data[b].fill(0.01);
        }
        Self { data }
    }

    pub fn from_vec(data: Vec<f32>) -> Result<Self> {
        if data.len() != PARAM_COUNT {
            return Err(Error::SizeMismatch(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                data.len()
            )));
        }
        Ok(Self { data })
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct Forward {
    input: Vec<f32>,
    c1: Vec<f32>,
    p1: Vec<f32>,
    p1_arg: Vec<u32>,
    c2: Vec<f32>,
    p2: Vec<f32>,
    p2_arg: Vec<u32>,
    pub embedding: Vec<f32>,
    u_norm: f32,
    pub projection: Vec<f32>,
}

/// Places a symbol at the centre of the input canvas, unscaled when it fits
/// and shrunk (nearest neighbour, aspect kept) when it does not.
pub fn to_canvas(img: &BinaryImage) -> Vec<f32> {
    let mut out = vec![0.0f32; INPUT_LEN];
    let (w, h) = (img.width(), img.height());
    let scale = (INPUT_SIDE as f64 / w.max(h) as f64).min(1.0);
    let (tw, th) = (
        ((w as f64 * scale).round() as usize).clamp(1, INPUT_SIDE),
        ((h as f64 * scale).round() as usize).clamp(1, INPUT_SIDE),
    );
    let (ox, oy) = ((INPUT_SIDE - tw) / 2, (INPUT_SIDE - th) / 2);
    for y in 0..th {
        for x in 0..tw {
            let sx = ((x as f64 / scale) as usize).min(w - 1);
            let sy = ((y as f64 / scale) as usize).min(h - 1);
            if img.get(sx, sy) {
                out[(oy + y) * INPUT_SIDE + ox + x] = 1.0;
            }
        }
    }
    out
}

fn conv_valid(
    input: &[f32],
    in_ch: usize,
    in_side: usize,
    weights: &[f32],
    bias: &[f32],
    out_ch: usize,
) -> Vec<f32> {
    let out_side = in_side - K + 1;
    let mut out = vec![0.0f32; out_ch * out_side * out_side];
    for o in 0..out_ch {
        let plane = &mut out[o * out_side * out_side..(o + 1) * out_side * out_side];
        plane.fill(bias[o]);
        for c in 0..in_ch {
            let src = &input[c * in_side * in_side..(c + 1) * in_side * in_side];
            let ker = &weights[(o * in_ch + c) * K * K..(o * in_ch + c + 1) * K * K];
            for ky in 0..K {
                for kx in 0..K {
                    let wv = ker[ky * K + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    for y in 0..out_side {
                        let row = &src[(y + ky) * in_side + kx..(y + ky) * in_side + kx + out_side];
                        let dst = &mut plane[y * out_side..(y + 1) * out_side];
                        for (d, s) in dst.iter_mut().zip(row) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    out
}

/// ReLU followed by 2x2 max-pooling; returns pooled values and the flat
/// index of each winner.
fn relu_pool(input: &[f32], ch: usize, side: usize) -> (Vec<f32>, Vec<u32>) {
    let half = side / 2;
    let mut out = vec![0.0f32; ch * half * half];
    let mut arg = vec![0u32; ch * half * half];
    for c in 0..ch {
        for y in 0..half {
            for x in 0..half {
                let mut best = (f32::NEG_INFINITY, 0usize);
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let idx = c * side * side + (2 * y + dy) * side + 2 * x + dx;
                    if input[idx] > best.0 {
                        best = (input[idx], idx);
                    }
                }
                let o = c * half * half + y * half + x;
                out[o] = best.0.max(0.0);
                arg[o] = best.1 as u32;
            }
        }
    }
    (out, arg)
}

fn dense(input: &[f32], weights: &[f32], bias: &[f32]) -> Vec<f32> {
    bias.iter()
        .enumerate()
        .map(|(o, b)| {
            let row = &weights[o * input.len()..(o + 1) * input.len()];
            b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f32>()
        })
        .collect()
}

/// Runs the network on a prepared 32x32 canvas.
pub fn forward(params: &EncoderParams, input: &[f32]) -> Result<Forward> {
    if input.len() != INPUT_LEN {
        return Err(Error::SizeMismatch(format!(
            "encoder input must be {INPUT_SIDE}x{INPUT_SIDE} ({INPUT_LEN} values), got {}",
            input.len()
        )));
    }
    let p = &params.data;
    let c1 = conv_valid(input, 1, INPUT_SIDE, &p[W1..B1], &p[B1..W2], CONV1_CHANNELS);
    let (p1, p1_arg) = relu_pool(&c1, CONV1_CHANNELS, S1);
    let c2 = conv_valid(&p1, CONV1_CHANNELS, P1, &p[W2..B2], &p[B2..W3], CONV2_CHANNELS);
    let (p2, p2_arg) = relu_pool(&c2, CONV2_CHANNELS, S2);
    let embedding: Vec<f32> = dense(&p2, &p[W3..B3], &p[B3..W4]).into_iter().map(|v| v.max(0.0)).collect();
    let u = dense(&embedding, &p[W4..B4], &p[B4..PARAM_COUNT]);
    let u_norm = u.iter().map(|v| v * v).sum::<f32>().sqrt().max(1e-12);
    let projection = u.iter().map(|v| v / u_norm).collect();
    Ok(Forward {
        input: input.to_vec(),
        c1,
        p1,
        p1_arg,
        c2,
        p2,
        p2_arg,
        embedding,
        u_norm,
        projection,
    })
}

/// Convenience: canvas + forward, returning (embedding, projection).
pub fn encode(params: &EncoderParams, input: &[f32]) -> Result<(Vec<f32>, Vec<f32>)> {
    let f = forward(params, input)?;
    Ok((f.embedding, f.projection))
}

/// Gradient of the projection at `f` contracted with `d_proj`, added into `grad`.
pub fn backward(params: &EncoderParams, f: &Forward, d_proj: &[f32], grad: &mut [f32]) {
    let p = &params.data;
    let z = &f.projection;
    let gz: f32 = d_proj.iter().zip(z).map(|(g, z)| g * z).sum();
    let du: Vec<f32> = d_proj.iter().zip(z).map(|(g, z)| (g - gz * z) / f.u_norm).collect();

    // Head.
    let mut de = vec![0.0f32; EMBED_DIM];
    for (o, &d) in du.iter().enumerate() {
        grad[B4 + o] += d;
        let row = W4 + o * EMBED_DIM;
        for i in 0..EMBED_DIM {
            grad[row + i] += d * f.embedding[i];
            de[i] += d * p[row + i];
        }
    }
    // Embedding layer (ReLU).
    let mut dp2 = vec![0.0f32; FLAT];
    for (o, d) in de.iter().enumerate() {
        if f.embedding[o] <= 0.0 {
            continue;
        }
        grad[B3 + o] += d;
        let row = W3 + o * FLAT;
        for i in 0..FLAT {
            grad[row + i] += d * f.p2[i];
            dp2[i] += d * p[row + i];
        }
    }
    // Pool 2 + ReLU back to conv 2 outputs.
    let mut dc2 = vec![0.0f32; f.c2.len()];
    for (i, &a) in f.p2_arg.iter().enumerate() {
        if f.c2[a as usize] > 0.0 {
            dc2[a as usize] += dp2[i];
        }
    }
    // Conv 2.
    let mut dp1 = vec![0.0f32; f.p1.len()];
    for o in 0..CONV2_CHANNELS {
        let plane = &dc2[o * S2 * S2..(o + 1) * S2 * S2];
        grad[B2 + o] += plane.iter().sum::<f32>();
        for c in 0..CONV1_CHANNELS {
            let src = &f.p1[c * P1 * P1..(c + 1) * P1 * P1];
            let kbase = W2 + (o * CONV1_CHANNELS + c) * K * K;
            for ky in 0..K {
                for kx in 0..K {
                    let wv = p[kbase + ky * K + kx];
                    let mut acc = 0.0f32;
                    for y in 0..S2 {
                        for x in 0..S2 {
                            let g = plane[y * S2 + x];
                            let si = (y + ky) * P1 + x + kx;
                            acc += g * src[si];
                            dp1[c * P1 * P1 + si] += g * wv;
                        }
                    }
                    grad[kbase + ky * K + kx] += acc;
                }
            }
        }
    }
    // Pool 1 + ReLU back to conv 1 outputs.
    let mut dc1 = vec![0.0f32; f.c1.len()];
    for (i, &a) in f.p1_arg.iter().enumerate() {
        if f.c1[a as usize] > 0.0 {
            dc1[a as usize] += dp1[i];
        }
    }
    // Conv 1 (input gradient not needed).
    for o in 0..CONV1_CHANNELS {
        let plane = &dc1[o * S1 * S1..(o + 1) * S1 * S1];
        grad[B1 + o] += plane.iter().sum::<f32>();
        for ky in 0..K {
            for kx in 0..K {
                let mut acc = 0.0f32;
                for y in 0..S1 {
                    let row = &f.input[(y + ky) * INPUT_SIDE + kx..(y + ky) * INPUT_SIDE + kx + S1];
                    let g = &plane[y * S1..(y + 1) * S1];
                    acc += g.iter().zip(row).map(|(a, b)| a * b).sum::<f32>();
                }
                grad[W1 + o * K * K + ky * K + kx] += acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_input(seed: u64) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..INPUT_LEN).map(|_| rng.gen_range(0.0..1.0)).collect()
    }

    #[test]
    fn zero_weights_give_the_bias_direction() {
        let mut params = EncoderParams::zeros();
        params.data[B4] = 3.0;
        params.data[B4 + 1] = 4.0;
        let a = encode(&params, &sample_input(1)).unwrap().1;
        let b = encode(&params, &vec![0.0; INPUT_LEN]).unwrap().1;
        assert_eq!(a, b);
        assert!((a[0] - 0.6).abs() < 1e-6 && (a[1] - 0.8).abs() < 1e-6);
    }

    #[test]
    fn projection_is_unit_and_reproducible() {
        let params = EncoderParams::init(5);
        let (e1, z1) = encode(&params, &sample_input(2)).unwrap();
        let (e2, z2) = encode(&EncoderParams::init(5), &sample_input(2)).unwrap();
        assert_eq!((e1, z1.clone()), (e2, z2));
        let n: f32 = z1.iter().map(|v| v * v).sum::<f32>().sqrt();
        assert!((n - 1.0).abs() < 1e-6);
        assert_eq!(z1.len(), PROJ_DIM);
    }

    #[test]
    fn wrong_shape_rejected() {
        assert!(encode(&EncoderParams::init(0), &[0.0; 10]).is_err());
        assert!(EncoderParams::from_vec(vec![0.0; 3]).is_err());
    }

    #[test]
    fn canvas_centres_symbols() {
        let img = BinaryImage::from_rows(&["##", "##"]).unwrap();
        let c = to_canvas(&img);
        assert_eq!(c.iter().filter(|&&v| v == 1.0).count(), 4);
        assert_eq!(c[15 * INPUT_SIDE + 15], 1.0);
        assert_eq!(c[16 * INPUT_SIDE + 16], 1.0);
        let big = BinaryImage::from_bits(64, 40, vec![true; 64 * 40]).unwrap();
        let c = to_canvas(&big);
        assert_eq!(c.iter().filter(|&&v| v == 1.0).count(), 32 * 20);
    }

    /// Directional derivative of a fixed linear functional of the
    /// projection, analytic vs central difference, in f64 on top of f32
    /// arithmetic.
    #[test]
    fn backward_matches_finite_differences() {
        let params = EncoderParams::init(9);
        let input = sample_input(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let probe: Vec<f32> = (0..PROJ_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let objective = |p: &EncoderParams| -> f64 {
            let z = encode(p, &input).unwrap().1;
            z.iter().zip(&probe).map(|(a, b)| (*a as f64) * (*b as f64)).sum()
        };
        let f = forward(&params, &input).unwrap();
        let mut grad = vec![0.0f32; PARAM_COUNT];
        backward(&params, &f, &probe, &mut grad);

        let picks = [W1 + 3, B1 + 2, W2 + 777, B2 + 5, W3 + 4321, B3 + 7, W4 + 100, B4 + 1];
        for &i in &picks {
            let h = 1e-3f32;
            let mut plus = params.clone();
            plus.data[i] += h;
            let mut minus = params.clone();
            minus.data[i] -= h;
            let fd = (objective(&plus) - objective(&minus)) / (2.0 * h as f64);
            let an = grad[i] as f64;
            assert!((fd - an).abs() <= 2e-2 * (fd.abs() + an.abs()) + 1e-4, "param {i}: fd {fd} vs analytic {an}");
        }
    }
}
