//! Luma-only readers for YUV4MPEG2 and headerless planar YUV, plus a binary
//! PGM writer for reconstructed frames.
//!
//! Chroma planes are parsed for framing purposes and then discarded.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{Frame, Sequence};

const Y4M_MAGIC: &[u8] = b"YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";

/// Chroma layout of a planar stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChromaFormat {
    /// 4:2:0, two quarter-size chroma planes follow each luma plane.
    Yuv420,
    /// 4:0:0, luma only.
    Yuv400,
}

impl ChromaFormat {
    /// Bytes of chroma that follow a `width`×`height` luma plane.
    pub fn chroma_bytes(self, width: usize, height: usize) -> usize {
        match self {
            ChromaFormat::Yuv420 => 2 * width.div_ceil(2) * height.div_ceil(2),
            ChromaFormat::Yuv400 => 0,
        }
    }

    pub fn frame_bytes(self, width: usize, height: usize) -> usize {
        width * height + self.chroma_bytes(width, height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub chroma: ChromaFormat,
}

fn header_err(token: &str, reason: impl Into<String>) -> Error {
    Error::Header {
        token: token.to_string(),
        reason: reason.into(),
    }
}

fn parse_dim(token: &str) -> Result<usize> {
    match token[1..].parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(header_err(token, "expected a positive integer")),
    }
}

/// Parses the stream header line (without its trailing newline).
pub fn parse_y4m_header(line: &[u8]) -> Result<Y4mHeader> {
    let text = std::str::from_utf8(line).map_err(|_| header_err("<binary>", "header is not UTF-8"))?;
    let mut tokens = text.split(' ').filter(|t| !t.is_empty());
    match tokens.next() {
        Some(m) if m.as_bytes() == Y4M_MAGIC => {}
        Some(m) => return Err(header_err(m, "missing YUV4MPEG2 signature")),
        None => return Err(header_err("", "empty header")),
    }

    let mut width = None;
    let mut height = None;
    let mut chroma = ChromaFormat::Yuv420;
    for tok in tokens {
        match tok.as_bytes()[0] {
            b'W' => width = Some(parse_dim(tok)?),
            b'H' => height = Some(parse_dim(tok)?),
            b'C' => {
                chroma = match &tok[1..] {
                    "420" | "420jpeg" | "420paldv" | "420mpeg2" => ChromaFormat::Yuv420,
                    "mono" | "400" => ChromaFormat::Yuv400,
                    _ => return Err(header_err(tok, "only 8-bit 4:2:0 and 4:0:0 are supported")),
                }
            }
            // frame rate, interlacing, aspect, extensions
            b'F' | b'I' | b'A' | b'X' => {}
            _ => return Err(header_err(tok, "unknown header parameter")),
        }
    }

    let width = width.ok_or_else(|| header_err("W", "width parameter missing"))?;
    let height = height.ok_or_else(|| header_err("H", "height parameter missing"))?;
    Ok(Y4mHeader {
        width,
        height,
        chroma,
    })
}

/// Decodes an in-memory YUV4MPEG2 stream into its luma planes.
pub fn parse_y4m(data: &[u8]) -> Result<Sequence> {
    let header_end = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| header_err("<eof>", "header line is not terminated"))?;
    let header = parse_y4m_header(&data[..header_end])?;
    let luma_len = header.width * header.height;
    let chroma_len = header.chroma.chroma_bytes(header.width, header.height);

    let mut frames = Vec::new();
    let mut pos = header_end + 1;
    while pos < data.len() {
        let index = frames.len();
        let rest = &data[pos..];
        let line_end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(Error::TruncatedFrame {
                frame: index,
                expected: luma_len + chroma_len,
                got: 0,
            })?;
        if !rest[..line_end].starts_with(FRAME_TAG) {
            let tok = String::from_utf8_lossy(&rest[..line_end.min(16)]).into_owned();
            return Err(header_err(&tok, format!("expected FRAME marker for frame {index}")));
        }
        pos += line_end + 1;
        let payload = luma_len + chroma_len;
        let available = data.len() - pos;
        if available < payload {
            return Err(Error::TruncatedFrame {
                frame: index,
                expected: payload,
                got: available,
            });
        }
        let luma = data[pos..pos + luma_len].to_vec();
        frames.push(Frame::new(header.width, header.height, luma)?);
        pos += payload;
    }
    Sequence::new(frames)
}

pub fn load_y4m(path: impl AsRef<Path>) -> Result<Sequence> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_y4m(&data)
}

/// Splits headerless planar YUV into luma frames.
///
/// Reading stops after `max_frames` frames when given; otherwise the payload
/// must be an exact multiple of the frame size.
pub fn parse_raw_yuv(
    data: &[u8],
    width: usize,
    height: usize,
    chroma: ChromaFormat,
    max_frames: Option<usize>,
) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidFrame(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    let frame_size = chroma.frame_bytes(width, height);
    let full = data.len() / frame_size;
    let wanted = max_frames.map_or(full, |m| m.min(full));
    if max_frames.is_none_or(|m| m > full) && !data.len().is_multiple_of(frame_size) {
        return Err(Error::PartialFrame {
            remaining: data.len() % frame_size,
            frame_size,
        });
    }
    data.chunks_exact(frame_size)
        .take(wanted)
        .map(|chunk| Frame::new(width, height, chunk[..width * height].to_vec()))
        .collect()
}

pub fn load_raw_yuv(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    chroma: ChromaFormat,
    max_frames: Option<usize>,
) -> Result<Sequence> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let frames = parse_raw_yuv(&data, width, height, chroma, max_frames)?;
    if frames.is_empty() {
        return Err(Error::NoFrames(path.to_path_buf()));
    }
    Sequence::new(frames)
}

/// Serializes a frame as binary PGM (P5, maxval 255).
pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.luma());
    out
}

pub fn write_pgm(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file =
        fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    file.write_all(&encode_pgm(frame))
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Reads a P5 PGM with maxval 255. Comment lines in the header are skipped.
pub fn decode_pgm(data: &[u8]) -> Result<Frame> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(header_err("<eof>", "PGM header truncated"));
        }
        fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;

    if fields[0] != "P5" {
        return Err(header_err(&fields[0], "expected P5"));
    }
    let num = |tok: &str| {
        tok.parse::<usize>()
            .map_err(|_| header_err(tok, "expected an integer"))
    };
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(header_err(&fields[3], "only maxval 255 is supported"));
    }
    let end = pos + width * height;
    if data.len() < end {
        return Err(Error::TruncatedFrame {
            frame: 0,
            expected: width * height,
            got: data.len().saturating_sub(pos),
        });
    }
    Frame::new(width, height, data[pos..end].to_vec())
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_pgm(&data)
}
