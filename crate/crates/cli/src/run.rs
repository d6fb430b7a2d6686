use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::commands;
use crate::config::{Command, RunConfig};
use crate::result::ResultLine;

/// Exit status for a run that failed its verification.
pub const EXIT_VERIFICATION_FAILED: i32 = 2;
/// Exit status for a run that could not be carried out.
pub const EXIT_ERROR: i32 = 1;

/// Output directory plus the files written so far.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }
}

pub struct Report {
    pub result: ResultLine,
    pub artifacts: Vec<PathBuf>,
    pub error: Option<anyhow::Error>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            EXIT_ERROR
        } else if self.result.pass {
            0
        } else {
            EXIT_VERIFICATION_FAILED
        }
    }
}

/// Runs one subcommand, writing its artifacts into `config.run.out`.
pub fn run(command: Command, config: &RunConfig) -> Report {
    let mut artifacts = None;
    let outcome = (|| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.run.threads)
            .build()
            .context("cannot start worker threads")?;
        let out = artifacts.insert(Artifacts::create(&config.run.out)?);
        pool.install(|| commands::dispatch(command, config, out))
    })();
    let artifacts = artifacts.map(|a| a.written).unwrap_or_default();
    match outcome {
        Ok(result) => Report {
            result,
            artifacts,
            error: None,
        },
        Err(e) => Report {
            result: ResultLine::fail(command, "error"),
            artifacts,
            error: Some(e),
        },
    }
}
