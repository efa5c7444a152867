//! Output-directory lock and the checksummed run manifest.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

const LOCK_NAME: &str = ".bec-lz.lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(CliError::Locked(dir.to_path_buf())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        if let Err(e) = fs::remove_file(&self.path) {
            log::warn!("could not remove lock {}: {e}", self.path.display());
        }
    }
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    let mut f = File::open(path)?;
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub files: Vec<(PathBuf, String)>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Option<&Path>, output_dir: &Path) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config: config.map(Path::to_path_buf),
            output_dir: output_dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = sha256_file(path)?;
        self.files.push((path.to_path_buf(), digest));
        Ok(())
    }

    pub fn file_name(&self) -> String {
        format!("manifest-{}.txt", self.subcommand)
    }

    /// Re-hashes every listed file, then writes the manifest into the output directory.
    pub fn write(&self) -> Result<PathBuf, CliError> {
        for (path, digest) in &self.files {
            let now = sha256_file(path).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))?;
            if &now != digest {
                return Err(CliError::Manifest(format!("{} changed during the run", path.display())));
            }
        }
        let path = self.output_dir.join(self.file_name());
        let mut out = io::BufWriter::new(File::create(&path)?);
        writeln!(out, "# bec-lz {} run manifest", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "subcommand: {}", self.subcommand)?;
        match &self.config {
            Some(c) => writeln!(out, "config: {}", c.display())?,
            None => writeln!(out, "config: none")?,
        }
        writeln!(out, "output: {}", self.output_dir.display())?;
        writeln!(out, "# sha256  file")?;
        for (file, digest) in &self.files {
            let name = file.strip_prefix(&self.output_dir).unwrap_or(file);
            writeln!(out, "{digest}  {}", name.display())?;
        }
        out.flush()?;
        Ok(path)
    }
}
