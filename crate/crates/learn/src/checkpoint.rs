//! Versioned little-endian binary container for a trained agent.
//!
//! Layout (see `docs/FORMATS.md`): magic `SUPLECKP`, `u32` version, `u8`
//! scalar width, `u64` config hash, scalar `log_alpha`, `u32` action
//! dimension with the action bounds, then `u32` network count and for each
//! network its layer sizes and flat parameters.

use crate::error::{Error, Result};
use crate::nn::Mlp;
use crate::policy::SquashedGaussian;
use crate::sac::{Sac, SacSettings};
use std::path::Path;
use suple_core::Scalar;

pub const MAGIC: &[u8; 8] = b"SUPLECKP";
pub const VERSION: u32 = 1;

/// 64-bit FNV-1a of the resolved configuration text.
pub fn config_hash(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn width<F: Scalar>() -> u8 {
    std::mem::size_of::<F>() as u8
}

fn put_scalar<F: Scalar>(out: &mut Vec<u8>, x: F) {
    if width::<F>() == 4 {
        out.extend_from_slice(&x.to_f32().unwrap_or(f32::NAN).to_le_bytes());
    } else {
        out.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
    }
}

/// Serializes `agent`: the actor, both critics and both targets.
pub fn encode<F: Scalar>(agent: &Sac<F>, hash: u64) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(width::<F>());
    out.extend_from_slice(&hash.to_le_bytes());
    put_scalar(&mut out, agent.log_alpha);
    let (low, high) = agent.actor.bounds();
    out.extend_from_slice(&(low.len() as u32).to_le_bytes());
    for &x in low.iter().chain(high) {
        put_scalar(&mut out, x);
    }
    let nets = [
        &agent.actor.net,
        &agent.critics[0],
        &agent.critics[1],
        &agent.targets[0],
        &agent.targets[1],
    ];
    out.extend_from_slice(&(nets.len() as u32).to_le_bytes());
    for net in nets {
        out.extend_from_slice(&(net.sizes().len() as u32).to_le_bytes());
        for &s in net.sizes() {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        out.extend_from_slice(&(net.num_params() as u64).to_le_bytes());
        for &p in net.params() {
            put_scalar(&mut out, p);
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn scalar<F: Scalar>(&mut self) -> Result<F> {
        Ok(if width::<F>() == 4 {
            F::lit(f32::from_le_bytes(self.take(4)?.try_into().unwrap()) as f64)
        } else {
            F::lit(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
        })
    }
}

/// Decoded checkpoint contents.
#[derive(Clone, Debug)]
pub struct Checkpoint<F> {
    pub config_hash: u64,
    pub log_alpha: F,
    pub actor: SquashedGaussian<F>,
    pub critics: [Mlp<F>; 2],
    pub targets: [Mlp<F>; 2],
}

impl<F: Scalar> Checkpoint<F> {
    pub fn into_agent(self, settings: SacSettings<F>) -> Sac<F> {
        Sac::from_parts(self.actor, self.critics, self.targets, self.log_alpha, settings)
    }
}

pub fn decode<F: Scalar>(bytes: &[u8]) -> Result<Checkpoint<F>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let w = r.take(1)?[0];
    if w != width::<F>() {
        return Err(Error::Checkpoint(format!(
            "stored scalars are {w} bytes, expected {}",
            width::<F>()
        )));
    }
    let config_hash = r.u64()?;
    let log_alpha = r.scalar()?;
    let m = r.u32()? as usize;
    let low = (0..m).map(|_| r.scalar()).collect::<Result<Vec<F>>>()?;
    let high = (0..m).map(|_| r.scalar()).collect::<Result<Vec<F>>>()?;
    let count = r.u32()?;
    if count != 5 {
        return Err(Error::Checkpoint(format!("expected 5 networks, found {count}")));
    }
    let mut nets = Vec::with_capacity(5);
    for _ in 0..count {
        let n_sizes = r.u32()? as usize;
        let sizes = (0..n_sizes)
            .map(|_| r.u32().map(|s| s as usize))
            .collect::<Result<Vec<_>>>()?;
        let n_params = r.u64()? as usize;
        if n_params > bytes.len() {
            return Err(Error::Checkpoint("parameter count exceeds file size".into()));
        }
        let params = (0..n_params).map(|_| r.scalar()).collect::<Result<Vec<F>>>()?;
        nets.push(
            Mlp::from_params(&sizes, params)
                .ok_or_else(|| Error::Checkpoint(format!("inconsistent shapes {sizes:?}")))?,
        );
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    let mut it = nets.into_iter();
    let actor_net = it.next().unwrap();
    if actor_net.output_dim() != 2 * m {
        return Err(Error::Checkpoint(
            "actor output does not match the action dimension".into(),
        ));
    }
    let critics = [it.next().unwrap(), it.next().unwrap()];
    let targets = [it.next().unwrap(), it.next().unwrap()];
    Ok(Checkpoint {
        config_hash,
        log_alpha,
        actor: SquashedGaussian::new(actor_net, low, high),
        critics,
        targets,
    })
}

pub fn save_checkpoint<F: Scalar>(agent: &Sac<F>, hash: u64, path: &Path) -> Result<()> {
    std::fs::write(path, encode(agent, hash)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_checkpoint<F: Scalar>(path: &Path) -> Result<Checkpoint<F>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode(&bytes)
}
