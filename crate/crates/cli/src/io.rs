//! Input and output endpoints. Files are written atomically.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// Opens `path`, or standard input for `None` and `-`.
pub fn open_input(path: Option<&Path>) -> io::Result<Box<dyn BufRead>> {
    match path {
        Some(p) if p != Path::new("-") => Ok(Box::new(BufReader::new(File::open(p)?))),
        _ => Ok(Box::new(BufReader::new(io::stdin().lock()))),
    }
}

pub fn read_to_string(path: &Path) -> io::Result<String> {
    std::fs::read_to_string(path)
}

/// One input line without its terminator.
pub struct Line {
    pub number: usize,
    pub text: String,
    /// Whether the line ended with `\n`; only the last line may not.
    pub newline: bool,
}

/// Reads up to `max` lines. Invalid UTF-8 is reported with its line number.
pub fn read_chunk(reader: &mut dyn BufRead, first_number: usize, max: usize) -> lmvr_core::Result<Vec<Line>> {
    let mut out = Vec::new();
    let mut buf = Vec::new();
    while out.len() < max {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let number = first_number + out.len();
        let newline = buf.last() == Some(&b'\n');
        if newline {
            buf.pop();
        }
        let text = String::from_utf8(std::mem::take(&mut buf))
            .map_err(|_| lmvr_core::Error::InvalidUtf8 { line: number })?;
        out.push(Line {
            number,
            text,
            newline,
        });
    }
    Ok(out)
}

/// A destination that only becomes visible on [`Output::commit`].
pub enum Output {
    Stdout(BufWriter<io::Stdout>),
    File {
        temp: BufWriter<NamedTempFile>,
        path: PathBuf,
    },
}

impl Output {
    /// Writes to `path` (through a temporary file in the same directory), or
    /// standard output for `None` and `-`.
    pub fn create(path: Option<&Path>) -> io::Result<Self> {
        match path {
            Some(p) if p != Path::new("-") => {
                let dir = match p.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d,
                    _ => Path::new("."),
                };
                Ok(Output::File {
                    temp: BufWriter::new(NamedTempFile::new_in(dir)?),
                    path: p.to_owned(),
                })
            }
            _ => Ok(Output::Stdout(BufWriter::new(io::stdout()))),
        }
    }

    pub fn commit(self) -> io::Result<()> {
        match self {
            Output::Stdout(mut w) => w.flush(),
            Output::File { temp, path } => {
                let temp = temp.into_inner().map_err(|e| e.into_error())?;
                temp.as_file().sync_all()?;
                temp.persist(&path).map_err(|e| e.error)?;
                Ok(())
            }
        }
    }
}

impl Write for Output {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Output::Stdout(w) => w.write(buf),
            Output::File { temp, .. } => temp.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Output::Stdout(w) => w.flush(),
            Output::File { temp, .. } => temp.flush(),
        }
    }
}

/// Writes `text` to `path` atomically.
pub fn write_file(path: &Path, text: &str) -> io::Result<()> {
    let mut out = Output::create(Some(path))?;
    out.write_all(text.as_bytes())?;
    out.commit()
}
