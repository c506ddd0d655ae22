//! Append-only JSON-lines event store.
//!
//! Each entity family lives in its own file of `{"key":…,"value":…}`
//! records; the latest record per key wins. The in-memory index is rebuilt
//! by replaying the file on open.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("cannot encode record: {0}")]
    Encode(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct Record<V> {
    key: String,
    value: V,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

/// Replays `path` line by line. A final line without a newline that fails
/// to parse is a torn write: it is cut off and replay succeeds.
fn replay(path: &Path, mut apply: impl FnMut(&str) -> Result<(), serde_json::Error>) -> Result<(), StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut reader = BufReader::new(file);
    let mut offset = 0u64;
    let mut line_no = 0;
    let mut buf = String::new();
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        let text = buf.trim();
        if !text.is_empty() {
            if let Err(e) = apply(text) {
                if complete {
                    return Err(StoreError::Corrupt { path: path.to_owned(), line: line_no, message: e.to_string() });
                }
                tracing::warn!(path = %path.display(), line = line_no, "dropping torn trailing record");
                let f = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
                f.set_len(offset).map_err(io_err(path))?;
                return Ok(());
            }
        }
        offset += n as u64;
    }
}

fn open_append(path: &Path) -> Result<File, StoreError> {
    let mut f = OpenOptions::new().create(true).append(true).read(true).open(path).map_err(io_err(path))?;
    // a previous run may have died mid-line
    let len = f.seek(SeekFrom::End(0)).map_err(io_err(path))?;
    if len > 0 {
        let mut last = [0u8; 1];
        f.seek(SeekFrom::Start(len - 1)).map_err(io_err(path))?;
        std::io::Read::read_exact(&mut f, &mut last).map_err(io_err(path))?;
        if last[0] != b'\n' {
            f.write_all(b"\n").map_err(io_err(path))?;
        }
    }
    Ok(f)
}

fn append_line(file: &mut File, path: &Path, line: &str) -> Result<(), StoreError> {
    let mut bytes = Vec::with_capacity(line.len() + 1);
    bytes.extend_from_slice(line.as_bytes());
    bytes.push(b'\n');
    file.write_all(&bytes).map_err(io_err(path))?;
    file.sync_data().map_err(io_err(path))
}

/// One keyed entity family.
pub struct Family<V> {
    path: PathBuf,
    writer: Mutex<File>,
    index: RwLock<Arc<BTreeMap<String, V>>>,
}

impl<V: Clone + Serialize + DeserializeOwned> Family<V> {
    pub fn open(path: PathBuf) -> Result<Self, StoreError> {
        let mut index = BTreeMap::new();
        replay(&path, |line| {
            let r: Record<V> = serde_json::from_str(line)?;
            index.insert(r.key, r.value);
            Ok(())
        })?;
        let writer = Mutex::new(open_append(&path)?);
        Ok(Self { path, writer, index: RwLock::new(Arc::new(index)) })
    }

    pub fn get(&self, key: &str) -> Option<V> {
        self.index.read().get(key).cloned()
    }

    /// Consistent view of every entity at one point in time.
    pub fn snapshot(&self) -> Arc<BTreeMap<String, V>> {
        Arc::clone(&self.index.read())
    }

    pub fn len(&self) -> usize {
        self.index.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends and indexes `value`. Writers are serialized; the check
    /// closure runs under the writer lock against the current value.
    pub fn put_with<E: From<StoreError>>(
        &self,
        key: &str,
        value: V,
        check: impl FnOnce(Option<&V>) -> Result<bool, E>,
    ) -> Result<bool, E> {
        let mut writer = self.writer.lock();
        let current = self.get(key);
        if !check(current.as_ref())? {
            return Ok(false);
        }
        let line = serde_json::to_string(&Record { key: key.to_owned(), value: &value }).map_err(StoreError::from)?;
        append_line(&mut writer, &self.path, &line)?;
        let mut index = self.index.write();
        Arc::make_mut(&mut index).insert(key.to_owned(), value);
        Ok(true)
    }

    pub fn put(&self, key: &str, value: V) -> Result<(), StoreError> {
        self.put_with::<StoreError>(key, value, |_| Ok(true)).map(|_| ())
    }
}

/// Append-only log of keyed items that accumulate rather than replace.
pub struct Log<V> {
    path: PathBuf,
    writer: Mutex<File>,
    items: RwLock<BTreeMap<String, Vec<V>>>,
}

impl<V: Clone + Serialize + DeserializeOwned> Log<V> {
    pub fn open(path: PathBuf) -> Result<Self, StoreError> {
        let mut items: BTreeMap<String, Vec<V>> = BTreeMap::new();
        replay(&path, |line| {
            let r: Record<V> = serde_json::from_str(line)?;
            items.entry(r.key).or_default().push(r.value);
            Ok(())
        })?;
        let writer = Mutex::new(open_append(&path)?);
        Ok(Self { path, writer, items: RwLock::new(items) })
    }

    pub fn items(&self, key: &str) -> Vec<V> {
        self.items.read().get(key).cloned().unwrap_or_default()
    }

    pub fn append(&self, key: &str, values: &[V]) -> Result<(), StoreError> {
        if values.is_empty() {
            return Ok(());
        }
        let mut writer = self.writer.lock();
        let mut block = String::new();
        for value in values {
            block.push_str(&serde_json::to_string(&Record { key: key.to_owned(), value })?);
            block.push('\n');
        }
        writer.write_all(block.as_bytes()).map_err(io_err(&self.path))?;
        writer.sync_data().map_err(io_err(&self.path))?;
        self.items.write().entry(key.to_owned()).or_default().extend_from_slice(values);
        Ok(())
    }
}
