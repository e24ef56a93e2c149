use crate::block::{self, BlockPair};
use crate::error::{Error, Result};
use crate::series::KahanSum;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

/// Entries lighter than this are folded into the missing mass.
pub const NEGLIGIBLE_MASS: f64 = 1e-30;

const CACHE_MAGIC: &[u8; 8] = b"EXLBTBL\0";
const CACHE_VERSION: u32 = 2;

/// Finite joint law of (past, future) blocks of length `n`.
///
/// The exact probability of each listed pair lies within
/// `entry · (1 ± rel_err)`; `pruned_mass` bounds the total probability of
/// everything that is not listed, and is itself loose by at most
/// `pruned_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBlockTable {
    pub n: usize,
    pub alphabet: u8,
    pub entries: HashMap<BlockPair, f64>,
    pub pruned_mass: f64,
    pub pruned_width: f64,
    pub rel_err: f64,
}

impl JointBlockTable {
    pub fn new(n: usize, alphabet: u8) -> Self {
        JointBlockTable {
            n,
            alphabet,
            entries: HashMap::new(),
            pruned_mass: 0.0,
            pruned_width: 0.0,
            rel_err: 0.0,
        }
    }

    pub fn add(&mut self, pair: BlockPair, mass: f64) {
        *self.entries.entry(pair).or_insert(0.0) += mass;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().copied().collect::<KahanSum>().value()
    }

    /// Upper bound on the probability not represented by the entries.
    pub fn missing_mass(&self) -> f64 {
        let total = self.total_mass();
        let from_sum = 1.0 - total * (1.0 - self.rel_err);
        let slack = (self.entries.len() as f64 + 4.0) * f64::EPSILON;
        (self.pruned_mass.min(from_sum).max(0.0) + slack).min(1.0)
    }

    /// Enclosure width of `Σ entries + pruned = 1`.
    pub fn conservation_width(&self) -> f64 {
        self.rel_err * self.total_mass() + self.pruned_width + (self.entries.len() as f64 + 4.0) * f64::EPSILON
    }

    pub fn conservation_error(&self) -> f64 {
        (self.total_mass() + self.pruned_mass - 1.0).abs()
    }

    /// Moves entries below [`NEGLIGIBLE_MASS`] into the pruned mass.
    pub fn fold_negligible(&mut self) {
        let mut folded = 0.0;
        self.entries.retain(|_, p| {
            if *p < NEGLIGIBLE_MASS {
                folded += *p;
                false
            } else {
                true
            }
        });
        self.pruned_mass += folded;
    }

    pub fn past_marginal(&self) -> HashMap<block::Code, f64> {
        let mut m = HashMap::new();
        for (k, p) in &self.entries {
            *m.entry(k.past).or_insert(0.0) += p;
        }
        m
    }

    pub fn future_marginal(&self) -> HashMap<block::Code, f64> {
        let mut m = HashMap::new();
        for (k, p) in &self.entries {
            *m.entry(k.future).or_insert(0.0) += p;
        }
        m
    }

    /// Entries sorted by key, for deterministic output.
    pub fn sorted_entries(&self) -> Vec<(BlockPair, f64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, p)| (*k, *p)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Writes `past,future,probability` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["past", "future", "probability"]).map_err(io)?;
        for (k, p) in self.sorted_entries() {
            w.write_record([
                block::render(k.past, self.n),
                block::render(k.future, self.n),
                format!("{p:.16e}"),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Versioned little-endian binary cache.
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        out.write_all(&(self.n as u32).to_le_bytes())?;
        out.write_all(&[self.alphabet])?;
        out.write_all(&self.pruned_mass.to_le_bytes())?;
        out.write_all(&self.pruned_width.to_le_bytes())?;
        out.write_all(&self.rel_err.to_le_bytes())?;
        out.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for (k, p) in self.sorted_entries() {
            out.write_all(&k.past.to_le_bytes())?;
            out.write_all(&k.future.to_le_bytes())?;
            out.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut input)?);
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let n = u32::from_le_bytes(read_array(&mut input)?) as usize;
        block::check_len(n)?;
        let [alphabet] = read_array::<1, _>(&mut input)?;
        let pruned_mass = f64::from_le_bytes(read_array(&mut input)?);
        let pruned_width = f64::from_le_bytes(read_array(&mut input)?);
        let rel_err = f64::from_le_bytes(read_array(&mut input)?);
        let count = u64::from_le_bytes(read_array(&mut input)?) as usize;
        let mut entries = HashMap::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let past = u128::from_le_bytes(read_array(&mut input)?);
            let future = u128::from_le_bytes(read_array(&mut input)?);
            let p = f64::from_le_bytes(read_array(&mut input)?);
            entries.insert(BlockPair::new(past, future), p);
        }
        Ok(JointBlockTable {
            n,
            alphabet,
            entries,
            pruned_mass,
            pruned_width,
            rel_err,
        })
    }

    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_cache(f)
    }

    pub fn load_cache(path: &Path) -> Result<Self> {
        Self::read_cache(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Cache(format!("truncated: {e}")))?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> JointBlockTable {
        let mut t = JointBlockTable::new(2, 2);
        t.add(BlockPair::from_symbols(&[0, 1], &[0, 1]), 0.5);
        t.add(BlockPair::from_symbols(&[1, 0], &[1, 0]), 0.25);
        t.pruned_mass = 0.25;
        t
    }

    #[test]
    fn cache_roundtrip() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        assert_eq!(JointBlockTable::read_cache(&buf[..]).unwrap(), t);
        buf[0] = b'X';
        assert!(matches!(JointBlockTable::read_cache(&buf[..]), Err(Error::Cache(_))));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "past,future,probability");
        assert_eq!(lines[1], "10,10,2.5000000000000000e-1");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn missing_mass_is_bounded_by_both_routes() {
        let t = sample();
        assert!((t.missing_mass() - 0.25).abs() < 1e-12);
        assert!(t.conservation_error() < 1e-15);
    }
}
