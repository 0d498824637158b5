//! Per-cell random substreams.
//!
//! Every cell gets a ChaCha8 generator keyed by the run seed and a stream id
//! that depends only on the cell's indices, so results do not depend on the
//! order or thread in which cells run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optics::Block;

/// Top byte of the stream id; keeps the scenarios' streams disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamDomain {
    Sweep = 1,
    Switch = 2,
    Photons = 3,
}

const INDEX_LIMIT: usize = 1 << 24;

/// Position of a cell in the `(phi_s, block, phi_x)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellId {
    pub phi_s_index: u32,
    pub phi_x_index: u32,
    pub block: Block,
}

impl CellId {
    pub fn new(phi_s_index: usize, phi_x_index: usize, block: Block) -> Result<Self> {
        if phi_s_index >= INDEX_LIMIT || phi_x_index >= INDEX_LIMIT {
            return Err(Error::Precondition(format!(
                "grid index ({phi_s_index}, {phi_x_index}) exceeds {INDEX_LIMIT}"
            )));
        }
        Ok(Self {
            phi_s_index: phi_s_index as u32,
            phi_x_index: phi_x_index as u32,
            block,
        })
    }

    fn block_index(self) -> u64 {
        match self.block {
            Block::None => 0,
            Block::Path0 => 1,
            Block::Path1 => 2,
        }
    }

    /// `domain:8 | phi_s:24 | block:8 | phi_x:24`.
    pub fn stream(self, domain: StreamDomain) -> u64 {
        (domain as u64) << 56
            | (self.phi_s_index as u64) << 32
            | self.block_index() << 24
            | self.phi_x_index as u64
    }
}

/// Generator for stream `index` of `domain`.
pub fn stream_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain as u64) << 56 | (index & ((1 << 56) - 1)));
    rng
}

pub fn cell_rng(seed: u64, domain: StreamDomain, cell: CellId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell.stream(domain));
    rng
}
