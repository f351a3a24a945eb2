//! LSTM forward pass and backpropagation through time.
//!
//! Gate pre-activations are `a = x_t·W_x + h_{t-1}·W_h + b`, split into four
//! blocks of `units` columns in the order input, forget, candidate, output:
//!
//! ```text
//! i = σ(a_i)   f = σ(a_f)   g = tanh(a_g)   o = σ(a_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```

use crate::tensor::Tensor;

pub(crate) struct LstmCache {
    steps: usize,
    features: usize,
    units: usize,
    inputs: Vec<f64>,
    /// `steps + 1` rows, row 0 is the zero initial state.
    hidden: Vec<f64>,
    cell: Vec<f64>,
    /// `steps` rows of `4 · units` post-activation gate values.
    gates: Vec<f64>,
    tanh_cell: Vec<f64>,
}

impl LstmCache {
    pub fn hidden_sequence(&self) -> Vec<f64> {
        self.hidden[self.units..].to_vec()
    }

    pub fn last_hidden(&self) -> Vec<f64> {
        self.hidden[self.steps * self.units..].to_vec()
    }
}

/// `out += Σ_k v[k] · w[k, :]` for a row-major `w` of width `out.len()`.
#[inline]
fn accumulate_rows(out: &mut [f64], v: &[f64], w: &[f64]) {
    let n = out.len();
    let mut rows = v.chunks_exact(4);
    let mut k = 0;
    for c in rows.by_ref() {
        let (w0, w1, w2, w3) = (
            &w[k * n..][..n],
            &w[(k + 1) * n..][..n],
            &w[(k + 2) * n..][..n],
            &w[(k + 3) * n..][..n],
        );
        for r in 0..n {
            out[r] += (c[0] * w0[r] + c[1] * w1[r]) + (c[2] * w2[r] + c[3] * w3[r]);
        }
        k += 4;
    }
    for &c in rows.remainder() {
        let wk = &w[k * n..][..n];
        for r in 0..n {
            out[r] += c * wk[r];
        }
        k += 1;
    }
}

/// One backward row: `g += s·da` and returns `w·da`.
#[inline]
fn row_backward(g: &mut [f64], w: &[f64], s: f64, da: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut tail = 0.0;
    let (gc, wc, dc) = (g.chunks_exact_mut(4), w.chunks_exact(4), da.chunks_exact(4));
    let rest = dc.remainder().len();
    for ((g, w), d) in gc.zip(wc).zip(dc) {
        for i in 0..4 {
            g[i] += s * d[i];
            acc[i] += w[i] * d[i];
        }
    }
    let n = da.len() - rest;
    for i in n..da.len() {
        g[i] += s * da[i];
        tail += w[i] * da[i];
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `1 − 2/(e^{2x} + 1)`: one `exp` instead of libm's `tanh`, exact at ±∞.
#[inline]
fn tanh(x: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * x).exp() + 1.0)
}

pub(crate) fn forward(params: &[Tensor], input: &Tensor, units: usize) -> LstmCache {
    let (steps, features) = (input.shape()[0], input.shape()[1]);
    let w_input = params[0].data();
    let w_recurrent = params[1].data();
    let bias = params[2].data();
    let h = units;

    let mut hidden = vec![0.0; (steps + 1) * h];
    let mut cell = vec![0.0; (steps + 1) * h];
    let mut gates = vec![0.0; steps * 4 * h];
    let mut tanh_cell = vec![0.0; steps * h];
    let x = input.data();

    for t in 0..steps {
        let xt = &x[t * features..][..features];
        let a = &mut gates[t * 4 * h..][..4 * h];
        a.copy_from_slice(bias);
        let (h_prev, h_rest) = hidden.split_at_mut((t + 1) * h);
        let h_prev = &h_prev[t * h..];
        accumulate_rows(a, xt, w_input);
        if t > 0 {
            accumulate_rows(a, h_prev, w_recurrent);
        }
        for v in &mut a[..2 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut a[2 * h..3 * h] {
            *v = tanh(*v);
        }
        for v in &mut a[3 * h..] {
            *v = sigmoid(*v);
        }
        let (c_prev, c_rest) = cell.split_at_mut((t + 1) * h);
        let c_prev = &c_prev[t * h..];
        let c_now = &mut c_rest[..h];
        let h_now = &mut h_rest[..h];
        let tc = &mut tanh_cell[t * h..][..h];
        for k in 0..h {
            let (i, f, g, o) = (a[k], a[h + k], a[2 * h + k], a[3 * h + k]);
            c_now[k] = f * c_prev[k] + i * g;
            tc[k] = tanh(c_now[k]);
            h_now[k] = o * tc[k];
        }
    }

    LstmCache {
        steps,
        features,
        units,
        inputs: x.to_vec(),
        hidden,
        cell,
        gates,
        tanh_cell,
    }
}

/// Returns the gradient with respect to the input sequence; parameter
/// gradients are accumulated into `grads` (`[W_x, W_h, b]`).
pub(crate) fn backward(
    params: &[Tensor],
    cache: &LstmCache,
    grad_out: &[f64],
    units: usize,
    return_sequences: bool,
    grads: &mut [Tensor],
) -> Vec<f64> {
    let h = units;
    let (steps, features) = (cache.steps, cache.features);
    debug_assert_eq!(cache.units, units);
    let w_input = params[0].data();
    let w_recurrent = params[1].data();

    let (gwx, rest) = grads.split_at_mut(1);
    let (gwh, gb) = rest.split_at_mut(1);
    let gwx = gwx[0].data_mut();
    let gwh = gwh[0].data_mut();
    let gb = gb[0].data_mut();

    let mut grad_in = vec![0.0; steps * features];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dh = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];

    for t in (0..steps).rev() {
        dh.copy_from_slice(&dh_next);
        if return_sequences {
            for (d, g) in dh.iter_mut().zip(&grad_out[t * h..][..h]) {
                *d += g;
            }
        } else if t == steps - 1 {
            for (d, g) in dh.iter_mut().zip(grad_out) {
                *d += g;
            }
        }

        let a = &cache.gates[t * 4 * h..][..4 * h];
        let tc = &cache.tanh_cell[t * h..][..h];
        let c_prev = &cache.cell[t * h..][..h];
        for k in 0..h {
            let (i, f, g, o) = (a[k], a[h + k], a[2 * h + k], a[3 * h + k]);
            let d_o = dh[k] * tc[k];
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc[k] * tc[k]);
            let d_i = dc * g;
            let d_g = dc * i;
            let d_f = dc * c_prev[k];
            dc_next[k] = dc * f;
            da[k] = d_i * i * (1.0 - i);
            da[h + k] = d_f * f * (1.0 - f);
            da[2 * h + k] = d_g * (1.0 - g * g);
            da[3 * h + k] = d_o * o * (1.0 - o);
        }

        let xt = &cache.inputs[t * features..][..features];
        let h_prev = &cache.hidden[t * h..][..h];
        let gx = &mut grad_in[t * features..][..features];
        for (g, d) in gb.iter_mut().zip(&da) {
            *g += d;
        }
        for j in 0..features {
            let wx = &w_input[j * 4 * h..][..4 * h];
            let gwx_row = &mut gwx[j * 4 * h..][..4 * h];
            gx[j] = row_backward(gwx_row, wx, xt[j], &da);
        }
        if t == 0 {
            break;
        }
        for k in 0..h {
            let wh = &w_recurrent[k * 4 * h..][..4 * h];
            let gwh_row = &mut gwh[k * 4 * h..][..4 * h];
            dh_next[k] = row_backward(gwh_row, wh, h_prev[k], &da);
        }
    }
    grad_in
}
