//! Output stamping.
//!
//! Every file the tool writes starts with a `#` line recording the binary
//! version, the seed, and a hash of the effective invocation. Output paths
//! are excluded from the hash so re-running into a different destination
//! yields byte-identical files.

use std::fmt::Display;
use std::fmt::Write as _;
use std::path::PathBuf;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

pub struct Stamp {
    seed: u64,
    canon: String,
}

impl Stamp {
    pub fn new(command: &str, seed: u64) -> Stamp {
        Stamp {
            seed,
            canon: format!("command={command};seed={seed}"),
        }
    }

    pub fn field(mut self, name: &str, value: impl Display) -> Stamp {
        write!(self.canon, ";{name}={value}").unwrap();
        self
    }

    pub fn path(self, name: &str, value: &PathBuf) -> Stamp {
        let shown = value.display().to_string();
        self.field(name, shown)
    }

    pub fn opt<T: Display>(self, name: &str, value: &Option<T>) -> Stamp {
        match value {
            Some(v) => self.field(name, v),
            None => self,
        }
    }

    pub fn opt_path(self, name: &str, value: &Option<PathBuf>) -> Stamp {
        match value {
            Some(p) => self.field(name, p.display().to_string()),
            None => self,
        }
    }

    pub fn list(self, name: &str, values: &[String]) -> Stamp {
        self.field(name, values.join(","))
    }

    /// The provenance line, without the leading `# `.
    pub fn header(&self) -> String {
        format!(
            "polisynth {} seed={} config={:016x}",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            fnv1a64(self.canon.as_bytes()),
        )
    }
}
