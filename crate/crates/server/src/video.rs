use std::io::SeekFrom;
use std::path::{Path, PathBuf};

use anchorscope::pipeline::SessionMeta;
use tokio::io::{AsyncReadExt, AsyncSeekExt};

/// A parsed `Range: bytes=...` request, resolved against a file length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteRange {
    Full,
    /// Inclusive bounds.
    Partial(u64, u64),
    Unsatisfiable,
}

/// Resolves a single-range header. Multi-range requests are served whole.
pub fn parse_range(header: Option<&str>, len: u64) -> ByteRange {
    let Some(spec) = header.and_then(|h| h.trim().strip_prefix("bytes=")) else {
        return ByteRange::Full;
    };
    if spec.contains(',') {
        return ByteRange::Full;
    }
    let Some((a, b)) = spec.split_once('-') else {
        return ByteRange::Unsatisfiable;
    };
    let (a, b) = (a.trim(), b.trim());
    let range = match (a.is_empty(), b.is_empty()) {
        (true, true) => return ByteRange::Unsatisfiable,
        (true, false) => match b.parse::<u64>() {
            Ok(0) | Err(_) => return ByteRange::Unsatisfiable,
            Ok(n) => (len.saturating_sub(n), len.saturating_sub(1)),
        },
        (false, _) => {
            let Ok(start) = a.parse::<u64>() else {
                return ByteRange::Unsatisfiable;
            };
            let end = if b.is_empty() {
                len.saturating_sub(1)
            } else {
                match b.parse::<u64>() {
                    Ok(e) => e.min(len.saturating_sub(1)),
                    Err(_) => return ByteRange::Unsatisfiable,
                }
            };
            (start, end)
        }
    };
    if len == 0 || range.0 >= len || range.0 > range.1 {
        ByteRange::Unsatisfiable
    } else {
        ByteRange::Partial(range.0, range.1)
    }
}

/// Media file for a session: its logged `video=` path, else
/// `videos/<id>.{mp4,webm}` under the dataset.
pub fn locate(dataset: &Path, meta: &SessionMeta) -> Option<PathBuf> {
    let mut candidates = Vec::new();
    if let Some(uri) = &meta.video_uri {
        candidates.push(dataset.join(uri));
    }
    for ext in ["mp4", "webm"] {
        candidates.push(dataset.join("videos").join(format!("{}.{ext}", meta.session_id)));
    }
    candidates.into_iter().find(|p| p.is_file())
}

pub fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("mp4") => "video/mp4",
        Some("webm") => "video/webm",
        _ => "application/octet-stream",
    }
}

pub async fn read_slice(path: &Path, start: u64, end_inclusive: u64) -> std::io::Result<Vec<u8>> {
    let mut file = tokio::fs::File::open(path).await?;
    file.seek(SeekFrom::Start(start)).await?;
    let mut buf = vec![0; (end_inclusive - start + 1) as usize];
    file.read_exact(&mut buf).await?;
    Ok(buf)
}
