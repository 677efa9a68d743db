use ndarray::{Array1, Array2};
use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: f64,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub done: bool,
}

/// Mini-batch in row-major form.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub actions: Array1<f64>,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    /// 1.0 for terminal transitions.
    pub dones: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn from_transitions(ts: &[Transition]) -> Result<Self> {
        let dim = ts.first().map_or(0, |t| t.obs.len());
        if ts.iter().any(|t| t.obs.len() != dim || t.next_obs.len() != dim) {
            return Err(Error::ShapeMismatch("ragged transitions".into()));
        }
        let n = ts.len();
        Ok(Self {
            obs: Array2::from_shape_fn((n, dim), |(i, j)| ts[i].obs[j]),
            actions: ts.iter().map(|t| t.action).collect(),
            rewards: ts.iter().map(|t| t.reward).collect(),
            next_obs: Array2::from_shape_fn((n, dim), |(i, j)| ts[i].next_obs[j]),
            dones: ts.iter().map(|t| if t.done { 1.0 } else { 0.0 }).collect(),
        })
    }
}

/// Fixed-capacity ring buffer with flat storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    len: usize,
    cursor: usize,
    obs: Vec<f64>,
    next_obs: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    dones: Vec<f64>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            obs_dim,
            len: 0,
            cursor: 0,
            obs: Vec::new(),
            next_obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            dones: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.obs.len() != self.obs_dim || t.next_obs.len() != self.obs_dim {
            return Err(Error::ShapeMismatch(format!(
                "transition observation length {} != {}",
                t.obs.len(),
                self.obs_dim
            )));
        }
        let d = self.obs_dim;
        let done = if t.done { 1.0 } else { 0.0 };
        if self.len < self.capacity {
            self.obs.extend_from_slice(&t.obs);
            self.next_obs.extend_from_slice(&t.next_obs);
            self.actions.push(t.action);
            self.rewards.push(t.reward);
            self.dones.push(done);
            self.len += 1;
        } else {
            let k = self.cursor;
            self.obs[k * d..(k + 1) * d].copy_from_slice(&t.obs);
            self.next_obs[k * d..(k + 1) * d].copy_from_slice(&t.next_obs);
            self.actions[k] = t.action;
            self.rewards[k] = t.reward;
            self.dones[k] = done;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn get(&self, k: usize) -> Option<Transition> {
        (k < self.len).then(|| {
            let d = self.obs_dim;
            Transition {
                obs: self.obs[k * d..(k + 1) * d].to_vec(),
                action: self.actions[k],
                reward: self.rewards[k],
                next_obs: self.next_obs[k * d..(k + 1) * d].to_vec(),
                done: self.dones[k] != 0.0,
            }
        })
    }

    /// Stored transitions, oldest first.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = Transition> + '_ {
        let start = if self.len < self.capacity { 0 } else { self.cursor };
        (0..self.len).map(move |i| self.get((start + i) % self.capacity).expect("in range"))
    }

    /// Uniform sample of distinct slots.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Option<Batch> {
        if batch_size == 0 || batch_size > self.len {
            return None;
        }
        let idx = rand::seq::index::sample(rng, self.len, batch_size);
        let d = self.obs_dim;
        let mut obs = Array2::zeros((batch_size, d));
        let mut next_obs = Array2::zeros((batch_size, d));
        let mut actions = Array1::zeros(batch_size);
        let mut rewards = Array1::zeros(batch_size);
        let mut dones = Array1::zeros(batch_size);
        for (row, k) in idx.iter().enumerate() {
            obs.row_mut(row)
                .assign(&ndarray::ArrayView1::from(&self.obs[k * d..(k + 1) * d]));
            next_obs
                .row_mut(row)
                .assign(&ndarray::ArrayView1::from(&self.next_obs[k * d..(k + 1) * d]));
            actions[row] = self.actions[k];
            rewards[row] = self.rewards[k];
            dones[row] = self.dones[k];
        }
        Some(Batch {
            obs,
            actions,
            rewards,
            next_obs,
            dones,
        })
    }

    pub(crate) fn raw_parts(&self) -> (usize, usize, [&[f64]; 5]) {
        (
            self.len,
            self.cursor,
            [&self.obs, &self.next_obs, &self.actions, &self.rewards, &self.dones],
        )
    }

    pub(crate) fn from_raw_parts(capacity: usize, obs_dim: usize, cursor: usize, parts: [Vec<f64>; 5]) -> Result<Self> {
        let [obs, next_obs, actions, rewards, dones] = parts;
        let len = actions.len();
        let consistent = len <= capacity
            && cursor < capacity
            && obs.len() == len * obs_dim
            && next_obs.len() == len * obs_dim
            && rewards.len() == len
            && dones.len() == len;
        if !consistent {
            return Err(Error::Checkpoint("inconsistent replay buffer".into()));
        }
        Ok(Self {
            capacity,
            obs_dim,
            len,
            cursor,
            obs,
            next_obs,
            actions,
            rewards,
            dones,
        })
    }
}
