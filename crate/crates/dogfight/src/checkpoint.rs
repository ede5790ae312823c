//! Self-describing binary checkpoint container.
//!
//! Byte layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "DFCKPT01"
//! 8       4     u32 config echo length N
//! 12      N     UTF-8 config echo (flat key = value lines)
//! ..      8     u64 training step counter
//! ..      4     u32 array count (always 8: w/b for 4 layers)
//! per array:
//!         4     u32 name length M
//!         M     UTF-8 array name ("l1.w", "l1.b", "l2.w", "l2.b",
//!               "value.w", "value.b", "advantage.w", "advantage.b")
//!         4     u32 rows (1 for bias vectors)
//!         4     u32 cols
//!         8*r*c IEEE-754 f64 little-endian values, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::net::{Linear, QNet};
use crate::sim::NUM_ACTIONS;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"DFCKPT01";

/// Everything stored in one checkpoint file.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: QNet,
    pub step: u64,
    pub config_echo: String,
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_array<W: Write>(w: &mut W, name: &str, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    debug_assert_eq!(rows * cols, data.len());
    write_u32(w, name.len() as u32)?;
    w.write_all(name.as_bytes())?;
    write_u32(w, rows as u32)?;
    write_u32(w, cols as u32)?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn save<P: AsRef<Path>>(path: P, ckpt: &Checkpoint) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, ckpt.config_echo.len() as u32)?;
    w.write_all(ckpt.config_echo.as_bytes())?;
    w.write_all(&ckpt.step.to_le_bytes())?;
    write_u32(&mut w, 8)?;
    let names = ["l1", "l2", "value", "advantage"];
    for (name, layer) in names.iter().zip(ckpt.net.layers()) {
        write_array(&mut w, &format!("{name}.w"), layer.out_dim, layer.in_dim, &layer.w)?;
        write_array(&mut w, &format!("{name}.b"), 1, layer.out_dim, &layer.b)?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<R> {
    r: R,
}

impl<R: Read> Cursor<R> {
    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.r.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        self.r.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn array(&mut self) -> Result<(String, usize, usize, Vec<f64>)> {
        let name_len = self.u32()? as usize;
        let name = String::from_utf8(self.bytes(name_len)?)
            .map_err(|e| Error::Checkpoint(format!("bad array name: {e}")))?;
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let raw = self.bytes(rows * cols * 8)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((name, rows, cols, data))
    }
}

pub fn load<P: AsRef<Path>>(path: P) -> Result<Checkpoint> {
    let mut c = Cursor { r: BufReader::new(File::open(path)?) };
    let magic = c.bytes(8)?;
    if magic != MAGIC {
        return Err(Error::Checkpoint("bad magic; not a checkpoint file".into()));
    }
    let echo_len = c.u32()? as usize;
    let config_echo = String::from_utf8(c.bytes(echo_len)?)
        .map_err(|e| Error::Checkpoint(format!("bad config echo: {e}")))?;
    let step = c.u64()?;
    let count = c.u32()?;
    if count != 8 {
        return Err(Error::Checkpoint(format!("expected 8 arrays, found {count}")));
    }
    let mut arrays = std::collections::HashMap::new();
    for _ in 0..8 {
        let (name, rows, cols, data) = c.array()?;
        arrays.insert(name, (rows, cols, data));
    }
    let take = |arrays: &mut std::collections::HashMap<String, (usize, usize, Vec<f64>)>,
                name: &str|
     -> Result<(usize, usize, Vec<f64>)> {
        arrays
            .remove(name)
            .ok_or_else(|| Error::Checkpoint(format!("missing array {name}")))
    };
    let layer = |w: (usize, usize, Vec<f64>), b: (usize, usize, Vec<f64>)| -> Result<Linear> {
        if b.0 != 1 || b.1 != w.0 {
            return Err(Error::Checkpoint("bias shape does not match weights".into()));
        }
        Ok(Linear { w: w.2, b: b.2, in_dim: w.1, out_dim: w.0 })
    };
    let l1 = layer(take(&mut arrays, "l1.w")?, take(&mut arrays, "l1.b")?)?;
    let l2 = layer(take(&mut arrays, "l2.w")?, take(&mut arrays, "l2.b")?)?;
    let value = layer(take(&mut arrays, "value.w")?, take(&mut arrays, "value.b")?)?;
    let advantage = layer(take(&mut arrays, "advantage.w")?, take(&mut arrays, "advantage.b")?)?;
    if l2.in_dim != l1.out_dim
        || value.in_dim != l2.out_dim
        || advantage.in_dim != l2.out_dim
        || value.out_dim != 1
        || advantage.out_dim != NUM_ACTIONS
    {
        return Err(Error::Checkpoint("inconsistent layer shapes".into()));
    }
    Ok(Checkpoint { net: QNet { l1, l2, value, advantage }, step, config_echo })
}
