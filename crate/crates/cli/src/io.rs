//! File input/output: gzip-aware CSV readers and stamped output files.

use crate::config::RunConfig;
use crate::CliError;
use flate2::bufread::MultiGzDecoder;
use rayon::prelude::*;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use tailfit_core::market::{ExchangeDataset, IngestReport, Ingestor};

/// Opens a trade file, transparently decoding gzip (sniffed by magic bytes,
/// not extension).
pub fn open_reader(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let mut buf = BufReader::with_capacity(1 << 20, file);
    let head = buf.fill_buf()?;
    if head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b {
        Ok(Box::new(BufReader::with_capacity(
            1 << 20,
            MultiGzDecoder::new(buf),
        )))
    } else {
        Ok(Box::new(buf))
    }
}

/// Streams one CSV source through the ingester.
pub fn load_dataset(
    exchange: &str,
    path: &Path,
    gap_threshold: f64,
) -> Result<(ExchangeDataset, IngestReport), CliError> {
    let mut reader = open_reader(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut ingestor =
        Ingestor::new(exchange, gap_threshold).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf: Vec<u8> = Vec::with_capacity(256);
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        ingestor.push_line(&String::from_utf8_lossy(&buf));
    }
    ingestor
        .finish()
        .map_err(|e| CliError::Data(format!("{exchange} ({}): {e}", path.display())))
}

/// Loads every configured input, in parallel, ordered by exchange id.
pub fn load_all(cfg: &RunConfig) -> Result<Vec<(ExchangeDataset, IngestReport)>, CliError> {
    cfg.check_inputs()?;
    cfg.inputs
        .par_iter()
        .map(|(exchange, path)| load_dataset(exchange, path, cfg.gap_threshold))
        .collect()
}

/// Buffered output file stamped with the command, config hash, and seed.
pub struct OutFile {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl OutFile {
    pub fn create(
        dir: &Path,
        name: &str,
        command: &str,
        cfg: &RunConfig,
    ) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "# tailfit {command}").map_err(CliError::from_io)?;
        writeln!(
            writer,
            "# config_hash={:016x} master_seed={}",
            cfg.hash(),
            cfg.master_seed
        )
        .map_err(CliError::from_io)?;
        Ok(Self { path, writer })
    }

    pub fn line(&mut self, text: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.writer, "{}", text.as_ref()).map_err(CliError::from_io)
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(CliError::from_io)?;
        Ok(self.path)
    }
}
