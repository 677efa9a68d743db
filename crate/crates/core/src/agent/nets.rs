//! Policy and value networks with hand-written forward and backward passes.
//!
//! Batches are row-major `B x features`; dense layers store weights as
//! `in x out` so a forward pass is `x.dot(w) + b`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::{Error, Result, MAX_HEADING_DELTA};

/// Flat access to every trainable tensor, in a fixed order.
pub trait Parameters {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn flat(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    fn fill(&mut self, value: f64) {
        for t in self.tensors_mut() {
            t.fill(value);
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        let a = self.tensors();
        let b = other.tensors();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.len() == y.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and biases.
    pub fn new<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Self {
            w: Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-bound..=bound)),
            b: Array1::from_shape_fn(fan_out, |_| rng.gen_range(-bound..=bound)),
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.w.nrows(), self.w.ncols())
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    /// Weight gradients for upstream gradient `dz` at input `x`.
    fn grads(x: ArrayView2<f64>, dz: ArrayView2<f64>) -> Self {
        Self {
            w: x.t().dot(&dz).as_standard_layout().into_owned(),
            b: dz.sum_axis(Axis(0)),
        }
    }
}

impl Parameters for Dense {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("standard layout"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let Dense { w, b } = self;
        vec![
            w.as_slice_mut().expect("standard layout"),
            b.as_slice_mut().expect("standard layout"),
        ]
    }
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| v.max(0.0))
}

fn relu_backward(dh: Array2<f64>, z: &Array2<f64>) -> Array2<f64> {
    let mut dz = dh;
    dz.zip_mut_with(z, |d, &zv| {
        if zv <= 0.0 {
            *d = 0.0;
        }
    });
    dz
}

/// `obs -> hidden (ReLU) -> 1 (tanh)`, scaled to `[-pi/4, pi/4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    pub hidden: Dense,
    pub out: Dense,
}

pub struct PolicyCache {
    x: Array2<f64>,
    z1: Array2<f64>,
    h1: Array2<f64>,
    t: Array1<f64>,
}

impl PolicyNet {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            hidden: Dense::new(obs_dim, hidden, rng),
            out: Dense::new(hidden, 1, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            hidden: self.hidden.zeros_like(),
            out: self.out.zeros_like(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.hidden.w.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden.w.ncols()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.forward_cached(x).0
    }

    /// Single-observation action without exploration.
    pub fn action(&self, obs: &[f64]) -> f64 {
        let x = ArrayView2::from_shape((1, obs.len()), obs).expect("row vector");
        self.forward(x)[0]
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> (Array1<f64>, PolicyCache) {
        let z1 = self.hidden.forward(x);
        let h1 = relu(&z1);
        let z2 = self.out.forward(h1.view());
        let t = z2.column(0).mapv(f64::tanh);
        let a = &t * MAX_HEADING_DELTA;
        (
            a,
            PolicyCache {
                x: x.to_owned(),
                z1,
                h1,
                t,
            },
        )
    }

    /// Parameter gradients given `d(loss)/d(action)` per batch row.
    pub fn backward(&self, cache: &PolicyCache, d_action: ArrayView1<f64>) -> PolicyNet {
        let dz2 = (&d_action * &cache.t.mapv(|t| MAX_HEADING_DELTA * (1.0 - t * t))).insert_axis(Axis(1));
        let out = Dense::grads(cache.h1.view(), dz2.view());
        let dh1 = dz2.dot(&self.out.w.t());
        let dz1 = relu_backward(dh1, &cache.z1);
        let hidden = Dense::grads(cache.x.view(), dz1.view());
        PolicyNet { hidden, out }
    }
}

impl Parameters for PolicyNet {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut v = self.hidden.tensors();
        v.extend(self.out.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.hidden.tensors_mut();
        v.extend(self.out.tensors_mut());
        v
    }
}

/// Two input branches (observation, action) of `hidden` ReLU units each,
/// concatenated into a `2*hidden -> hidden` ReLU layer and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet {
    pub obs: Dense,
    pub act: Dense,
    pub merge: Dense,
    pub out: Dense,
}

pub struct ValueCache {
    x: Array2<f64>,
    a: Array2<f64>,
    zo: Array2<f64>,
    za: Array2<f64>,
    c: Array2<f64>,
    zm: Array2<f64>,
    hm: Array2<f64>,
}

impl ValueNet {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            obs: Dense::new(obs_dim, hidden, rng),
            act: Dense::new(1, hidden, rng),
            merge: Dense::new(2 * hidden, hidden, rng),
            out: Dense::new(hidden, 1, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            obs: self.obs.zeros_like(),
            act: self.act.zeros_like(),
            merge: self.merge.zeros_like(),
            out: self.out.zeros_like(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs.w.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.obs.w.ncols()
    }

    pub fn forward(&self, x: ArrayView2<f64>, a: ArrayView1<f64>) -> Array1<f64> {
        self.forward_cached(x, a).0
    }

    pub fn q(&self, obs: &[f64], action: f64) -> f64 {
        let x = ArrayView2::from_shape((1, obs.len()), obs).expect("row vector");
        self.forward(x, ArrayView1::from(&[action]))[0]
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>, a: ArrayView1<f64>) -> (Array1<f64>, ValueCache) {
        let a = a.to_owned().insert_axis(Axis(1));
        let zo = self.obs.forward(x);
        let za = self.act.forward(a.view());
        let h = self.obs.w.ncols();
        let mut c = Array2::zeros((x.nrows(), 2 * h));
        c.slice_mut(ndarray::s![.., ..h]).assign(&relu(&zo));
        c.slice_mut(ndarray::s![.., h..]).assign(&relu(&za));
        let zm = self.merge.forward(c.view());
        let hm = relu(&zm);
        let q = self.out.forward(hm.view()).column(0).to_owned();
        (
            q,
            ValueCache {
                x: x.to_owned(),
                a,
                zo,
                za,
                c,
                zm,
                hm,
            },
        )
    }

    /// Gradients of a scalar loss given `d(loss)/dq` per batch row.
    ///
    /// Returns parameter gradients and the gradient with respect to the
    /// action input.
    pub fn backward(&self, cache: &ValueCache, dq: ArrayView1<f64>) -> (ValueNet, Array1<f64>) {
        let h = self.obs.w.ncols();
        let dq = dq.to_owned().insert_axis(Axis(1));
        let out = Dense::grads(cache.hm.view(), dq.view());
        let dzm = relu_backward(dq.dot(&self.out.w.t()), &cache.zm);
        let merge = Dense::grads(cache.c.view(), dzm.view());
        let dc = dzm.dot(&self.merge.w.t());
        let dzo = relu_backward(dc.slice(ndarray::s![.., ..h]).to_owned(), &cache.zo);
        let dza = relu_backward(dc.slice(ndarray::s![.., h..]).to_owned(), &cache.za);
        let obs = Dense::grads(cache.x.view(), dzo.view());
        let act = Dense::grads(cache.a.view(), dza.view());
        let da = dza.dot(&self.act.w.t()).column(0).to_owned();
        (ValueNet { obs, act, merge, out }, da)
    }

    /// Gradient with respect to the action input only.
    pub fn action_gradient(&self, cache: &ValueCache, dq: ArrayView1<f64>) -> Array1<f64> {
        let h = self.obs.w.ncols();
        let dq = dq.to_owned().insert_axis(Axis(1));
        let dzm = relu_backward(dq.dot(&self.out.w.t()), &cache.zm);
        let wa = self.merge.w.slice(ndarray::s![h.., ..]);
        let dha = dzm.dot(&wa.t());
        let dza = relu_backward(dha, &cache.za);
        dza.dot(&self.act.w.t()).column(0).to_owned()
    }
}

impl Parameters for ValueNet {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut v = self.obs.tensors();
        v.extend(self.act.tensors());
        v.extend(self.merge.tensors());
        v.extend(self.out.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let ValueNet { obs, act, merge, out } = self;
        let mut v = obs.tensors_mut();
        v.extend(act.tensors_mut());
        v.extend(merge.tensors_mut());
        v.extend(out.tensors_mut());
        v
    }
}

/// `target <- tau * online + (1 - tau) * target`, elementwise.
pub fn soft_update<P: Parameters>(target: &mut P, online: &P, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("tau {tau} not in (0, 1]")));
    }
    if !target.same_shape(online) {
        return Err(Error::ShapeMismatch(
            "soft update between different architectures".into(),
        ));
    }
    for (t, o) in target.tensors_mut().into_iter().zip(online.tensors()) {
        if tau == 1.0 {
            t.copy_from_slice(o);
        } else {
            for (tv, &ov) in t.iter_mut().zip(o) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
        }
    }
    Ok(())
}

/// Heavy-ball step: `vel <- momentum * vel + grad`, then
/// `param -= lr * vel` (descent) or `param += lr * vel` (ascent).
pub fn momentum_step<P: Parameters>(params: &mut P, velocity: &mut P, grads: &P, lr: f64, momentum: f64, ascend: bool) {
    let sign = if ascend { 1.0 } else { -1.0 };
    for ((p, v), g) in params
        .tensors_mut()
        .into_iter()
        .zip(velocity.tensors_mut())
        .zip(grads.tensors())
    {
        for ((pv, vv), &gv) in p.iter_mut().zip(v.iter_mut()).zip(g) {
            *vv = momentum * *vv + gv;
            *pv += sign * lr * *vv;
        }
    }
}

/// Scales `grads` so its global L2 norm is at most `max_norm`.
pub fn clip_grad_norm<P: Parameters>(grads: &mut P, max_norm: f64) -> f64 {
    let norm = grads
        .tensors()
        .iter()
        .flat_map(|t| t.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        for t in grads.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= s);
        }
    }
    norm
}
