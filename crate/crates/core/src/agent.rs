//! Independent DDPG learner, one per UAV.
//!
//! The critic minimizes the mean squared TD error against
//! `y = r + gamma * (1 - done) * Q'(o', pi'(o'))`; the actor ascends
//! `mean Q(o, pi(o))` with the critic frozen. Both use heavy-ball momentum
//! SGD, and the target networks track the online ones by soft updates.

mod checkpoint;
mod nets;
mod replay;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use nets::{
    clip_grad_norm, momentum_step, soft_update, Dense, Parameters, PolicyCache, PolicyNet, ValueCache, ValueNet,
};
pub use replay::{Batch, ReplayBuffer, Transition};

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation, ScenarioConfig, OBS_WIDTH};
use crate::{Error, Result, Vec2, MAX_HEADING_DELTA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub hidden: usize,
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub tau: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Initial standard deviation of the Gaussian exploration noise, radians.
    pub noise_std: f64,
    /// Per-episode multiplicative decay of the noise.
    pub noise_decay: f64,
    /// Global L2 cap on each gradient; `None` disables clipping.
    pub grad_clip: Option<f64>,
    /// Transitions stored before the first update.
    pub learning_starts: usize,
    /// Environment steps between updates.
    pub update_every: usize,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            gamma: 0.97,
            actor_lr: 5e-4,
            critic_lr: 3e-3,
            tau: 0.005,
            momentum: 0.9,
            batch_size: 64,
            buffer_capacity: 100_000,
            noise_std: 0.5,
            noise_decay: 0.998,
            grad_clip: None,
            learning_starts: 1000,
            update_every: 1,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.hidden == 0 || self.batch_size == 0 || self.buffer_capacity == 0 || self.update_every == 0 {
            return bad("hidden, batch_size, buffer_capacity and update_every must be positive");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.actor_lr >= 0.0 && self.critic_lr >= 0.0 && (0.0..1.0).contains(&self.momentum)) {
            return bad("learning rates must be >= 0 and momentum in [0, 1)");
        }
        if !(self.noise_std >= 0.0 && self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return bad("noise_std >= 0 and noise_decay in (0, 1] required");
        }
        if matches!(self.grad_clip, Some(c) if !(c > 0.0)) {
            return bad("grad_clip must be positive");
        }
        Ok(())
    }
}

/// Maps raw observations to network inputs.
///
/// The UAV's own position is centred on the arena and divided by
/// `position_scale`. The swarm center and obstacles become offsets from the
/// UAV divided by `relative_scale`. Velocities are divided by `speed_scale`.
/// With `egocentric` set, offsets and every velocity except the UAV's own are
/// rotated into the UAV's heading frame. Masked rows stay zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObsEncoder {
    pub arena_center: [f64; 2],
    pub position_scale: f64,
    pub relative_scale: f64,
    pub speed_scale: f64,
    pub egocentric: bool,
}

impl ObsEncoder {
    pub fn identity() -> Self {
        Self {
            arena_center: [0.0, 0.0],
            position_scale: 1.0,
            relative_scale: 1.0,
            speed_scale: 1.0,
            egocentric: false,
        }
    }

    pub fn for_scenario(config: &ScenarioConfig) -> Self {
        Self {
            arena_center: [0.5 * config.arena_width, 0.5 * config.arena_length],
            position_scale: 0.5 * config.arena_width.max(config.arena_length),
            relative_scale: config.sense_range,
            speed_scale: config.uav_speed,
            egocentric: true,
        }
    }

    pub fn encode(&self, obs: &Observation) -> Result<Vec<f64>> {
        let raw = obs.flatten();
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation".into()));
        }
        if *self == Self::identity() {
            return Ok(raw);
        }
        let me = Vec2::new(obs.rows[0][0], obs.rows[0][1]);
        let c = Vec2::new(self.arena_center[0], self.arena_center[1]);
        let (sin, cos) = if self.egocentric {
            let v = Vec2::new(obs.rows[0][2], obs.rows[0][3]);
            match v.try_normalize(0.0) {
                Some(u) => (u.y, u.x),
                None => (0.0, 1.0),
            }
        } else {
            (0.0, 1.0)
        };
        let rotate = |x: f64, y: f64| [cos * x + sin * y, -sin * x + cos * y];
        let vs = self.speed_scale;
        let mut out = Vec::with_capacity(raw.len());
        for (k, row) in obs.rows.iter().enumerate() {
            if k == 0 {
                out.extend_from_slice(&[
                    (row[0] - c.x) / self.position_scale,
                    (row[1] - c.y) / self.position_scale,
                    row[2] / vs,
                    row[3] / vs,
                ]);
                continue;
            }
            if k >= 2 && !obs.mask[k - 2] {
                out.extend_from_slice(&[0.0; OBS_WIDTH]);
                continue;
            }
            let [px, py] = rotate(row[0] - me.x, row[1] - me.y);
            let [vx, vy] = rotate(row[2], row[3]);
            let rs = self.relative_scale;
            out.extend_from_slice(&[px / rs, py / rs, vx / vs, vy / vs]);
        }
        Ok(out)
    }
}

/// Deterministic action plus Gaussian noise of standard deviation
/// `noise_scale`, clamped to the action bound.
pub fn act<R: rand::Rng + ?Sized>(policy: &PolicyNet, obs: &[f64], noise_scale: f64, rng: &mut R) -> Result<Action> {
    if obs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("observation".into()));
    }
    if obs.len() != policy.obs_dim() {
        return Err(Error::ShapeMismatch(format!(
            "observation length {} != policy input {}",
            obs.len(),
            policy.obs_dim()
        )));
    }
    let mut a = policy.action(obs);
    if noise_scale > 0.0 {
        let n = Normal::new(0.0, noise_scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        a += n.sample(rng);
    }
    Ok(Action::new(a.clamp(-MAX_HEADING_DELTA, MAX_HEADING_DELTA)))
}

/// `y_i = r_i + gamma * (1 - done_i) * Q'(o'_i, pi'(o'_i))`.
pub fn td_targets(batch: &Batch, target_policy: &PolicyNet, target_value: &ValueNet, gamma: f64) -> Array1<f64> {
    if gamma == 0.0 {
        return batch.rewards.clone();
    }
    let next_a = target_policy.forward(batch.next_obs.view());
    let next_q = target_value.forward(batch.next_obs.view(), next_a.view());
    let mut y = batch.rewards.clone();
    for i in 0..y.len() {
        if batch.dones[i] == 0.0 {
            y[i] += gamma * next_q[i];
        }
    }
    y
}

/// Mean squared TD error and its parameter gradients.
pub fn value_loss_and_grads(
    value: &ValueNet,
    obs: ArrayView2<f64>,
    actions: ArrayView1<f64>,
    targets: ArrayView1<f64>,
) -> (f64, ValueNet) {
    let (q, cache) = value.forward_cached(obs, actions);
    let err = &q - &targets;
    let b = err.len() as f64;
    let loss = err.mapv(|e| e * e).sum() / b;
    let dq = err.mapv(|e| 2.0 * e / b);
    let (grads, _) = value.backward(&cache, dq.view());
    (loss, grads)
}

/// `mean_i Q(o_i, pi(o_i))` and its gradient with respect to the policy.
pub fn policy_objective_and_grads(policy: &PolicyNet, value: &ValueNet, obs: ArrayView2<f64>) -> (f64, PolicyNet) {
    let (a, pcache) = policy.forward_cached(obs);
    let (q, vcache) = value.forward_cached(obs, a.view());
    let b = q.len() as f64;
    let objective = q.sum() / b;
    let dq = Array1::from_elem(q.len(), 1.0 / b);
    let da = value.action_gradient(&vcache, dq.view());
    (objective, policy.backward(&pcache, da.view()))
}

/// One descent step on the TD loss; returns the pre-step loss.
pub fn update_value(
    value: &mut ValueNet,
    velocity: &mut ValueNet,
    batch: &Batch,
    targets: ArrayView1<f64>,
    config: &DdpgConfig,
) -> Result<f64> {
    if targets.len() != batch.len() {
        return Err(Error::ShapeMismatch("targets and batch differ in length".into()));
    }
    let (loss, mut grads) = value_loss_and_grads(value, batch.obs.view(), batch.actions.view(), targets);
    if !loss.is_finite() {
        return Err(Error::NonFinite("value loss".into()));
    }
    if let Some(c) = config.grad_clip {
        clip_grad_norm(&mut grads, c);
    }
    momentum_step(value, velocity, &grads, config.critic_lr, config.momentum, false);
    Ok(loss)
}

/// One ascent step on `mean Q(o, pi(o))`; returns the pre-step objective.
pub fn update_policy(
    policy: &mut PolicyNet,
    velocity: &mut PolicyNet,
    value: &ValueNet,
    batch: &Batch,
    config: &DdpgConfig,
) -> Result<f64> {
    let (objective, mut grads) = policy_objective_and_grads(policy, value, batch.obs.view());
    if !objective.is_finite() {
        return Err(Error::NonFinite("policy objective".into()));
    }
    if let Some(c) = config.grad_clip {
        clip_grad_norm(&mut grads, c);
    }
    momentum_step(policy, velocity, &grads, config.actor_lr, config.momentum, true);
    Ok(objective)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub value_loss: f64,
    pub policy_objective: f64,
}

/// A UAV's learner: online and target networks, optimizer state, replay
/// buffer and its own random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DdpgAgent {
    pub config: DdpgConfig,
    pub encoder: ObsEncoder,
    pub policy: PolicyNet,
    pub value: ValueNet,
    pub target_policy: PolicyNet,
    pub target_value: ValueNet,
    pub policy_velocity: PolicyNet,
    pub value_velocity: ValueNet,
    pub buffer: ReplayBuffer,
    pub noise_scale: f64,
    pub steps: u64,
    pub updates: u64,
    pub(crate) rng: ChaCha8Rng,
}

impl DdpgAgent {
    pub fn new(obs_dim: usize, config: DdpgConfig, encoder: ObsEncoder, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = PolicyNet::new(obs_dim, config.hidden, &mut rng);
        let value = ValueNet::new(obs_dim, config.hidden, &mut rng);
        Ok(Self {
            encoder,
            target_policy: policy.clone(),
            target_value: value.clone(),
            policy_velocity: policy.zeros_like(),
            value_velocity: value.zeros_like(),
            policy,
            value,
            buffer: ReplayBuffer::new(config.buffer_capacity, obs_dim),
            noise_scale: config.noise_std,
            steps: 0,
            updates: 0,
            rng,
            config,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.policy.obs_dim()
    }

    pub fn encode(&self, obs: &Observation) -> Result<Vec<f64>> {
        let x = self.encoder.encode(obs)?;
        if x.len() != self.obs_dim() {
            return Err(Error::ShapeMismatch(format!(
                "observation length {} != agent input {}",
                x.len(),
                self.obs_dim()
            )));
        }
        Ok(x)
    }

    /// Action for an encoded observation; exploration noise only if `explore`.
    pub fn act_encoded(&mut self, obs: &[f64], explore: bool) -> Result<Action> {
        let noise = if explore { self.noise_scale } else { 0.0 };
        act(&self.policy, obs, noise, &mut self.rng)
    }

    pub fn act(&mut self, obs: &Observation, explore: bool) -> Result<Action> {
        let x = self.encode(obs)?;
        self.act_encoded(&x, explore)
    }

    pub fn q_value(&self, obs: &Observation, action: Action) -> Result<f64> {
        let x = self.encode(obs)?;
        Ok(self.value.q(&x, action.heading_delta))
    }

    /// Stores a transition and, on schedule, runs one learning update.
    pub fn observe_transition(&mut self, t: Transition) -> Result<Option<UpdateStats>> {
        self.buffer.push(t)?;
        self.steps += 1;
        let ready = self.buffer.len() >= self.config.learning_starts.max(self.config.batch_size);
        if ready && self.steps.is_multiple_of(self.config.update_every as u64) {
            self.learn().map(Some)
        } else {
            Ok(None)
        }
    }

    /// Critic step, actor step, then soft updates of both targets.
    pub fn learn(&mut self) -> Result<UpdateStats> {
        let batch = self
            .buffer
            .sample(self.config.batch_size, &mut self.rng)
            .ok_or_else(|| Error::InvalidParameter("replay buffer smaller than batch".into()))?;
        let y = td_targets(&batch, &self.target_policy, &self.target_value, self.config.gamma);
        let value_loss = update_value(
            &mut self.value,
            &mut self.value_velocity,
            &batch,
            y.view(),
            &self.config,
        )?;
        let policy_objective = update_policy(
            &mut self.policy,
            &mut self.policy_velocity,
            &self.value,
            &batch,
            &self.config,
        )?;
        soft_update(&mut self.target_value, &self.value, self.config.tau)?;
        soft_update(&mut self.target_policy, &self.policy, self.config.tau)?;
        if !(self.policy.is_finite() && self.value.is_finite()) {
            return Err(Error::NonFinite("network parameters".into()));
        }
        self.updates += 1;
        Ok(UpdateStats {
            value_loss,
            policy_objective,
        })
    }

    pub fn end_episode(&mut self) {
        self.noise_scale *= self.config.noise_decay;
    }
}
