use std::io::{Read, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CHLM";
const VERSION: u32 = 1;

/// Simulated paths indexed by replication `r`, component `j` and time
/// `n = 1..=N`, stored row-major in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct PathMatrix {
    n: usize,
    j: usize,
    r: usize,
    master_seed: u64,
    labels: Vec<String>,
    values: Vec<f64>,
}

impl PathMatrix {
    pub fn new(
        n: usize,
        j: usize,
        r: usize,
        master_seed: u64,
        labels: Vec<String>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(values.len(), n * j * r, "path matrix shape mismatch");
        PathMatrix { n, j, r, master_seed, labels, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn components(&self) -> usize {
        self.j
    }

    pub fn replications(&self) -> usize {
        self.r
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `X_j(1..=N)` of replication `r` (zero-based `r`, `j`).
    pub fn path(&self, r: usize, j: usize) -> &[f64] {
        let start = (r * self.j + j) * self.n;
        &self.values[start..start + self.n]
    }

    /// Long format `r,j,n,value` with one-based `n`, sorted by `(r, j, n)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,j,n,value")?;
        for r in 0..self.r {
            for j in 0..self.j {
                for (t, v) in self.path(r, j).iter().enumerate() {
                    writeln!(w, "{r},{j},{},{v:e}", t + 1)?;
                }
            }
        }
        Ok(())
    }

    /// `"CHLM"`, version `u32`, `N u64`, `J u32`, `R u32`, then the values
    /// as little-endian `f64` in `[r][j][n]` order.
    pub fn write_bin<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.j as u32).to_le_bytes())?;
        w.write_all(&(self.r as u32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the binary layout; labels and seed are not stored there.
    pub fn read_bin<R: Read>(mut rd: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        rd.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config("not a CHLM path file".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        rd.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Config(format!("unsupported CHLM version {version}")));
        }
        rd.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        rd.read_exact(&mut b4)?;
        let j = u32::from_le_bytes(b4) as usize;
        rd.read_exact(&mut b4)?;
        let r = u32::from_le_bytes(b4) as usize;
        let mut values = vec![0.0; n * j * r];
        for v in values.iter_mut() {
            rd.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        let labels = (0..j).map(|i| format!("x{i}")).collect();
        Ok(PathMatrix { n, j, r, master_seed: 0, labels, values })
    }
}
