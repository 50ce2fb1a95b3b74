//! WAV decoding and genre-labelled dataset enumeration.
//!
//! Only RIFF/WAVE files carrying 16-bit integer PCM (format code 1) with one
//! or two channels are accepted. Stereo input is downmixed to mono by taking
//! the per-frame mean of both channels.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors raised while decoding audio or scanning a dataset directory.
#[derive(Debug, Error)]
pub enum AudioError {
    #[error("malformed WAV container: {0}")]
    MalformedContainer(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("WAV data chunk contains no samples")]
    EmptyAudio,
    #[error("{} is not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("no .wav files found under {}", .0.display())]
    NoAudioFound(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AudioError {
    /// Short, stable name of the error kind (used in CLI diagnostics).
    pub fn kind(&self) -> &'static str {
        match self {
            AudioError::MalformedContainer(_) => "MalformedContainer",
            AudioError::UnsupportedFormat(_) => "UnsupportedFormat",
            AudioError::EmptyAudio => "EmptyAudio",
            AudioError::NotADirectory(_) => "NotADirectory",
            AudioError::NoAudioFound(_) => "NoAudioFound",
            AudioError::Io { .. } => "Io",
        }
    }
}

/// Decoded mono PCM signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    source_path: String,
}

impl AudioClip {
    /// Builds a clip from raw samples.
    ///
    /// Samples are clamped into `[-1, 1]`. Panics if `samples` is empty or
    /// the sample rate is zero.
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, source_path: impl Into<String>) -> Self {
        assert!(!samples.is_empty(), "an AudioClip needs at least one sample");
        assert!(sample_rate_hz > 0, "sample rate must be positive");
        let samples = samples.into_iter().map(|s| s.clamp(-1.0, 1.0)).collect();
        AudioClip {
            samples,
            sample_rate_hz,
            source_path: source_path.into(),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Returns a copy with every sample multiplied by `gain` (then clamped).
    pub fn scaled(&self, gain: f64) -> AudioClip {
        AudioClip::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate_hz,
            self.source_path.clone(),
        )
    }
}

struct FmtChunk {
    format_code: u16,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits_per_sample: u16,
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Decodes an in-memory RIFF/WAVE file into a mono clip.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    decode_wav_named(bytes, "<memory>")
}

/// Reads and decodes a WAV file from disk.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_wav_named(&bytes, &path.display().to_string())
}

fn decode_wav_named(bytes: &[u8], name: &str) -> Result<AudioClip, AudioError> {
    use AudioError::MalformedContainer as Malformed;

    if bytes.len() < 12 {
        return Err(Malformed("file shorter than the RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Malformed("missing RIFF magic".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Malformed("missing WAVE form type".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                Malformed(format!(
                    "chunk '{}' declares {} bytes but only {} remain",
                    String::from_utf8_lossy(id),
                    size,
                    bytes.len() - body_start
                ))
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Malformed("fmt chunk shorter than 16 bytes".into()));
                }
                fmt = Some(FmtChunk {
                    format_code: read_u16(body, 0),
                    channels: read_u16(body, 2),
                    sample_rate: read_u32(body, 4),
                    block_align: read_u16(body, 12),
                    bits_per_sample: read_u16(body, 14),
                });
            }
            b"data" => {
                data = Some(body);
                // fmt must precede data in a well-formed file; nothing after
                // the data chunk is needed.
                if fmt.is_some() {
                    break;
                }
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| Malformed("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Malformed("missing data chunk".into()))?;

    if fmt.format_code != 1 {
        return Err(AudioError::UnsupportedFormat(format!(
            "format code {} (only PCM, code 1, is supported)",
            fmt.format_code
        )));
    }
    if fmt.bits_per_sample != 16 {
        return Err(AudioError::UnsupportedFormat(format!(
            "{} bits per sample (only 16 is supported)",
            fmt.bits_per_sample
        )));
    }
    if fmt.channels != 1 && fmt.channels != 2 {
        return Err(AudioError::UnsupportedFormat(format!(
            "{} channels (only mono and stereo are supported)",
            fmt.channels
        )));
    }
    if fmt.sample_rate == 0 {
        return Err(Malformed("sample rate of zero".into()));
    }
    let channels = fmt.channels as usize;
    let frame_bytes = 2 * channels;
    if fmt.block_align as usize != frame_bytes {
        return Err(Malformed(format!(
            "block align {} does not match {} channel(s) of 16-bit samples",
            fmt.block_align, channels
        )));
    }

    let samples: Vec<f64> = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|s| i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0)
                .sum();
            sum / channels as f64
        })
        .collect();
    if samples.is_empty() {
        return Err(AudioError::EmptyAudio);
    }

    Ok(AudioClip {
        samples,
        sample_rate_hz: fmt.sample_rate,
        source_path: name.to_string(),
    })
}

/// Quantizes a sample in `[-1, 1]` to signed 16-bit PCM.
pub fn quantize_pcm16(sample: f64) -> i16 {
    (sample * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes a clip as a mono 16-bit PCM WAV file.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &clip.samples {
        out.extend_from_slice(&quantize_pcm16(s).to_le_bytes());
    }
    out
}

/// Writes a clip to disk as a mono 16-bit PCM WAV file.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), AudioError> {
    let path = path.as_ref();
    fs::write(path, encode_wav(clip)).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Keeps the first `duration_s` seconds of a clip.
///
/// Clips shorter than the requested duration are returned unchanged; there
/// is no padding.
pub fn take_segment(clip: &AudioClip, duration_s: f64) -> AudioClip {
    assert!(duration_s > 0.0, "segment duration must be positive");
    // a clip is never empty, so keep at least one sample
    let wanted = ((duration_s * clip.sample_rate_hz as f64).floor() as usize).max(1);
    if wanted >= clip.len() {
        return clip.clone();
    }
    AudioClip {
        samples: clip.samples[..wanted].to_vec(),
        sample_rate_hz: clip.sample_rate_hz,
        source_path: clip.source_path.clone(),
    }
}

/// One labelled audio file of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub genre: String,
}

/// The files of a `<root>/<genre>/<track>.wav` dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Sorted, unique genre names (including genres with no files).
    pub genres: Vec<String>,
}

impl DatasetManifest {
    pub fn genre_index(&self, genre: &str) -> Option<usize> {
        self.genres.binary_search_by(|g| g.as_str().cmp(genre)).ok()
    }
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Enumerates `<root>/<genre>/*.wav`.
///
/// Entries are sorted by path so the manifest depends only on directory
/// content, never on traversal order.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<DatasetManifest, AudioError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(AudioError::NotADirectory(root.to_path_buf()));
    }
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| AudioError::Io { path, source }
    };

    let mut genres = Vec::new();
    let mut entries = Vec::new();
    for dir in fs::read_dir(root).map_err(io_err(root))? {
        let dir = dir.map_err(io_err(root))?.path();
        if !dir.is_dir() {
            continue;
        }
        let Some(genre) = dir.file_name().and_then(|n| n.to_str()).map(str::to_owned) else {
            continue;
        };
        for file in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let file = file.map_err(io_err(&dir))?.path();
            if file.is_file() && is_wav(&file) {
                entries.push(ManifestEntry {
                    path: file,
                    genre: genre.clone(),
                });
            }
        }
        genres.push(genre);
    }

    if entries.is_empty() {
        return Err(AudioError::NoAudioFound(root.to_path_buf()));
    }
    genres.sort();
    genres.dedup();
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(DatasetManifest { entries, genres })
}
