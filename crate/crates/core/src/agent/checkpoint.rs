//! Binary checkpoint of a set of agents.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "CSWARMCK"
//! version    u32
//! meta       str      free-form text owned by the caller (the harness stores TOML)
//! n_agents   u64
//! per agent:
//!   config       str (TOML of DdpgConfig)
//!   encoder      5 x f64 (center x, center y, position, relative and
//!                speed scales), u8 egocentric flag
//!   obs_dim      u64
//!   networks     6 x f64-array: policy, value, target policy, target value,
//!                policy momentum, value momentum (tensor order of `Parameters`)
//!   noise_scale  f64
//!   steps        u64
//!   updates      u64
//!   rng          32-byte seed, u64 stream, u128 word position
//!   replay       u64 capacity, u64 cursor, 5 x f64-array
//!                (obs, next_obs, actions, rewards, dones)
//! ```
//!
//! `str` is a u64 byte length followed by UTF-8; `f64-array` is a u64 element
//! count followed by the values. Floats are stored by bit pattern, so a
//! round trip is exact.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DdpgAgent, DdpgConfig, ObsEncoder, Parameters, ReplayBuffer};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"CSWARMCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: String,
    pub agents: Vec<DdpgAgent>,
}

/// Writes to a temporary sibling file and renames it into place.
pub fn write_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    let file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    encode(&mut w, ckpt).map_err(|e| Error::io(&tmp, e))?;
    w.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(w);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    decode(&mut BufReader::new(file))
}

pub fn encode<W: Write>(w: &mut W, ckpt: &Checkpoint) -> std::io::Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    put_str(w, &ckpt.meta)?;
    put_u64(w, ckpt.agents.len() as u64)?;
    for a in &ckpt.agents {
        let cfg = toml::to_string(&a.config).expect("DdpgConfig serializes");
        put_str(w, &cfg)?;
        let e = &a.encoder;
        for v in [
            e.arena_center[0],
            e.arena_center[1],
            e.position_scale,
            e.relative_scale,
            e.speed_scale,
        ] {
            put_f64(w, v)?;
        }
        w.write_all(&[u8::from(e.egocentric)])?;
        put_u64(w, a.obs_dim() as u64)?;
        put_f64s(w, &a.policy.flat())?;
        put_f64s(w, &a.value.flat())?;
        put_f64s(w, &a.target_policy.flat())?;
        put_f64s(w, &a.target_value.flat())?;
        put_f64s(w, &a.policy_velocity.flat())?;
        put_f64s(w, &a.value_velocity.flat())?;
        put_f64(w, a.noise_scale)?;
        put_u64(w, a.steps)?;
        put_u64(w, a.updates)?;
        w.write_all(&a.rng.get_seed())?;
        put_u64(w, a.rng.get_stream())?;
        w.write_all(&a.rng.get_word_pos().to_le_bytes())?;
        let (_, cursor, parts) = a.buffer.raw_parts();
        put_u64(w, a.buffer.capacity() as u64)?;
        put_u64(w, cursor as u64)?;
        for p in parts {
            put_f64s(w, p)?;
        }
    }
    Ok(())
}

pub fn decode<R: Read>(r: &mut R) -> Result<Checkpoint> {
    let mut magic = [0u8; 8];
    read_exact(r, &mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic header".into()));
    }
    let mut ver = [0u8; 4];
    read_exact(r, &mut ver)?;
    let version = u32::from_le_bytes(ver);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let meta = get_str(r)?;
    let n = get_u64(r)? as usize;
    let mut agents = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let config: DdpgConfig = toml::from_str(&get_str(r)?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        config.validate()?;
        let encoder = ObsEncoder {
            arena_center: [get_f64(r)?, get_f64(r)?],
            position_scale: get_f64(r)?,
            relative_scale: get_f64(r)?,
            speed_scale: get_f64(r)?,
            egocentric: get_u8(r)? != 0,
        };
        let obs_dim = get_u64(r)? as usize;
        let mut agent = DdpgAgent::new(obs_dim, config, encoder, 0)?;
        load_params(&mut agent.policy, get_f64s(r)?)?;
        load_params(&mut agent.value, get_f64s(r)?)?;
        load_params(&mut agent.target_policy, get_f64s(r)?)?;
        load_params(&mut agent.target_value, get_f64s(r)?)?;
        load_params(&mut agent.policy_velocity, get_f64s(r)?)?;
        load_params(&mut agent.value_velocity, get_f64s(r)?)?;
        agent.noise_scale = get_f64(r)?;
        agent.steps = get_u64(r)?;
        agent.updates = get_u64(r)?;
        let mut seed = [0u8; 32];
        read_exact(r, &mut seed)?;
        let stream = get_u64(r)?;
        let mut pos = [0u8; 16];
        read_exact(r, &mut pos)?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from_le_bytes(pos));
        agent.rng = rng;
        let capacity = get_u64(r)? as usize;
        let cursor = get_u64(r)? as usize;
        let parts = [get_f64s(r)?, get_f64s(r)?, get_f64s(r)?, get_f64s(r)?, get_f64s(r)?];
        agent.buffer = ReplayBuffer::from_raw_parts(capacity, obs_dim, cursor, parts)?;
        agents.push(agent);
    }
    Ok(Checkpoint { meta, agents })
}

fn load_params<P: Parameters>(net: &mut P, values: Vec<f64>) -> Result<()> {
    if values.len() != net.num_params() {
        return Err(Error::Checkpoint(format!(
            "parameter count {} does not match architecture ({})",
            values.len(),
            net.num_params()
        )));
    }
    let mut off = 0;
    for t in net.tensors_mut() {
        t.copy_from_slice(&values[off..off + t.len()]);
        off += t.len();
    }
    Ok(())
}

fn put_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_bits().to_le_bytes())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    put_u64(w, s.len() as u64)?;
    w.write_all(s.as_bytes())
}

fn put_f64s<W: Write>(w: &mut W, vs: &[f64]) -> std::io::Result<()> {
    put_u64(w, vs.len() as u64)?;
    let mut buf = Vec::with_capacity(vs.len() * 8);
    for v in vs {
        buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    w.write_all(&buf)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Checkpoint(format!("truncated checkpoint: {e}")))
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(get_u64(r)?))
}

fn get_str<R: Read>(r: &mut R) -> Result<String> {
    let n = get_u64(r)? as usize;
    let mut b = vec![0u8; n];
    read_exact(r, &mut b)?;
    String::from_utf8(b).map_err(|e| Error::Checkpoint(e.to_string()))
}

fn get_f64s<R: Read>(r: &mut R) -> Result<Vec<f64>> {
    let n = get_u64(r)? as usize;
    let mut b = vec![
        0u8;
        n.checked_mul(8)
            .ok_or_else(|| Error::Checkpoint("length overflow".into()))?
    ];
    read_exact(r, &mut b)?;
    Ok(b.chunks_exact(8)
        .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::Transition;

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = DdpgConfig {
            hidden: 8,
            batch_size: 4,
            learning_starts: 4,
            buffer_capacity: 6,
            ..Default::default()
        };
        let mut agent = DdpgAgent::new(3, cfg, ObsEncoder::identity(), 11).unwrap();
        for k in 0..9 {
            agent
                .observe_transition(Transition {
                    obs: vec![k as f64, 1.0, -1.0],
                    action: 0.1,
                    reward: 1.0,
                    next_obs: vec![k as f64 + 1.0, 1.0, -1.0],
                    done: k == 8,
                })
                .unwrap();
        }
        let ckpt = Checkpoint {
            meta: "episode = 3".into(),
            agents: vec![agent],
        };
        let mut bytes = Vec::new();
        encode(&mut bytes, &ckpt).unwrap();
        let back = decode(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, ckpt);

        let mut a = ckpt.agents[0].clone();
        let mut b = back.agents[0].clone();
        assert_eq!(a.learn().unwrap(), b.learn().unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(&mut &b"NOTACKPT\x01\0\0\0"[..]).is_err());
        let mut bytes = CHECKPOINT_MAGIC.to_vec();
        bytes.extend_from_slice(&99u32.to_le_bytes());
        assert!(decode(&mut bytes.as_slice()).is_err());
        let mut truncated = Vec::new();
        encode(
            &mut truncated,
            &Checkpoint {
                meta: "x".into(),
                agents: vec![],
            },
        )
        .unwrap();
        truncated.pop();
        assert!(decode(&mut truncated.as_slice()).is_err());
    }
}
