use std::fs::File;
use std::io::{self, BufRead, BufReader, Seek, SeekFrom};
use std::path::Path;

/// Read access to dataset files. Plans hold one of these and only touch it
/// when executed.
pub trait SourceFs: Send + Sync {
    fn len(&self, path: &Path) -> io::Result<u64>;

    /// A reader positioned at byte `offset`.
    fn open_at(&self, path: &Path, offset: u64) -> io::Result<Box<dyn BufRead + Send>>;
}

/// The local filesystem.
#[derive(Debug, Default, Clone, Copy)]
pub struct StdFs;

impl SourceFs for StdFs {
    fn len(&self, path: &Path) -> io::Result<u64> {
        Ok(std::fs::metadata(path)?.len())
    }

    fn open_at(&self, path: &Path, offset: u64) -> io::Result<Box<dyn BufRead + Send>> {
        let mut file = File::open(path)?;
        if offset > 0 {
            file.seek(SeekFrom::Start(offset))?;
        }
        Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
    }
}
