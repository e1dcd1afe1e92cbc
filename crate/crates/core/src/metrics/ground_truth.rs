//! Large-sample Monte Carlo references, cached on disk with a checksum.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::app::{monte_carlo, AppId};
use crate::error::{Error, Result};
use crate::mc::SampleSet;
use crate::rng::RngHandle;

pub const GROUND_TRUTH_SAMPLES: usize = 1_000_000;

/// Cache entries are keyed by this as well as by application and seed, so a
/// new release never reuses stale references.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Draws the reference output of `app` with a fresh generator.
pub fn generate(app: AppId, seed: u64, n: usize) -> Result<SampleSet> {
    monte_carlo(app, &mut RngHandle::seeded(seed), n)
}

#[derive(Debug, Clone)]
pub struct GroundTruthCache {
    dir: PathBuf,
}

impl GroundTruthCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, app: AppId, seed: u64, n: usize) -> PathBuf {
        self.dir.join(format!("gt-{app}-seed{seed}-n{n}-v{CODE_VERSION}.csv"))
    }

    fn sidecar(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".sha256");
        PathBuf::from(s)
    }

    /// Reads a cached entry. `Ok(None)` when absent, a checksum error when
    /// the file does not match its sidecar.
    pub fn load(&self, app: AppId, seed: u64, n: usize) -> Result<Option<SampleSet>> {
        let path = self.path(app, seed, n);
        if !path.exists() {
            return Ok(None);
        }
        let expected = fs::read_to_string(Self::sidecar(&path)).unwrap_or_default();
        if file_digest(&path)? != expected.trim() {
            return Err(Error::Checksum(path));
        }
        let set = SampleSet::read_csv(BufReader::new(fs::File::open(&path)?))?;
        if set.len() != n {
            return Err(Error::Checksum(path));
        }
        Ok(Some(set))
    }

    pub fn store(&self, app: AppId, seed: u64, set: &SampleSet) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(app, seed, set.len());
        set.write_csv(BufWriter::new(fs::File::create(&path)?))?;
        fs::write(Self::sidecar(&path), file_digest(&path)? + "\n")?;
        Ok(path)
    }

    /// Loads the entry, regenerating it when missing or corrupt.
    pub fn get(&self, app: AppId, seed: u64, n: usize) -> Result<SampleSet> {
        match self.load(app, seed, n) {
            Ok(Some(set)) => return Ok(set),
            Ok(None) => {}
            Err(e @ Error::Checksum(_)) => log::warn!("{e}; regenerating"),
            Err(e) => return Err(e),
        }
        let set = generate(app, seed, n)?;
        self.store(app, seed, &set)?;
        Ok(set)
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Ground truth for `app`: cached under `cache` when given, otherwise
/// generated in memory.
pub fn ground_truth(app: AppId, seed: u64, n: usize, cache: Option<&GroundTruthCache>) -> Result<SampleSet> {
    match cache {
        Some(c) => c.get(app, seed, n),
        None => generate(app, seed, n),
    }
}
