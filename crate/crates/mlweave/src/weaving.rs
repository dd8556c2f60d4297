//! Bit-plane ("weaved") memory layouts over 512-bit cache lines, plus the
//! on-disk store format and the per-sample memory-traffic formula.
//!
//! Both layouts transpose quantized codes into bit planes so that a reader
//! wanting `s`-bit data touches exactly the first `s` planes and skips the
//! rest:
//!
//! * [`WeavingStore`] interleaves 8 samples per line: line `(g, c, w)` holds
//!   bit-plane `w` of features `64c..64c+63` for samples `8g..8g+7`. Bank
//!   `k` (sample `8g+k`) occupies 64-bit word `k` of the line, and bit `t`
//!   of a bank word belongs to feature `64c + t`. Lines are ordered group →
//!   chunk → plane, so index `(g, c, w) = (g * chunks + c) * S + w`.
//! * [`BWeavingStore`] keeps one sample per line: line `(i, c, w)` holds bit
//!   `w` of features `512c..512c+511` of sample `i`, at index
//!   `(i * chunks512 + c) * S + w`.
//!
//! Plane `w = 0` is the most significant bit of every code. Rows are padded
//! to a multiple of 8 and features to a multiple of 64 (512 for the
//! single-sample layout) with zeros; padding never reaches arithmetic
//! because readers report only the true dimensions.
//!
//! # Store file format (`.mlwv`)
//!
//! Little-endian throughout.
//!
//! | offset | size | field                                     |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `"MLWV"`                            |
//! | 4      | 2    | version (currently 1)                     |
//! | 6      | 2    | flags (must be 0)                         |
//! | 8      | 8    | rows N (true count, before padding)       |
//! | 16     | 8    | cols M (true count, before padding)       |
//! | 24     | 1    | max precision S                           |
//! | 25     | 1    | bank count (must be 8)                    |
//! | 26     | 6    | reserved (zero)                           |
//! | 32     | 4    | CRC32 of the payload                      |
//! | 36     | ..   | payload: N labels as `i32` (fixed-point   |
//! |        |      | raw, 24 fractional bits), then             |
//! |        |      | `ceil(N/8) * ceil(M/64) * S` lines as      |
//! |        |      | 8 x `u64` (bank 0 first)                   |

use std::io::{Read, Write};
use std::path::Path;

use crate::bitserial::BitPlaneSlice;
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::quantize::FixedPointTable;

/// Samples interleaved per cache line.
pub const BANKS: usize = 8;
/// 64-bit words per 512-bit cache line.
pub const WORDS_PER_LINE: usize = 8;

pub const STORE_MAGIC: [u8; 4] = *b"MLWV";
pub const STORE_VERSION: u16 = 1;

/// One 512-bit cache line as eight 64-bit words, bank 0 first.
pub type Line = [u64; WORDS_PER_LINE];

/// Position of one line in a weaved store's plane traversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaneCursor {
    /// Sample-group index (8 samples per group).
    pub group: usize,
    /// 64-feature chunk index.
    pub chunk: usize,
    /// Bit-plane index, 0 = most significant.
    pub plane: u8,
    /// Precision the traversal was opened at (`plane < precision`).
    pub precision: u8,
}

/// Bank-interleaved bit-plane layout: 8 samples x 64 features per line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeavingStore {
    rows: usize,
    cols: usize,
    s_max: u8,
    groups: usize,
    chunks: usize,
    lines: Vec<Line>,
    labels: Vec<Fixed>,
}

impl WeavingStore {
    /// Transposes a quantized table into the 8-sample interleaved layout.
    pub fn build(table: &FixedPointTable) -> Self {
        let rows = table.rows();
        let cols = table.cols();
        let s_max = table.max_precision();
        let groups = rows.div_ceil(BANKS);
        let chunks = cols.div_ceil(64);
        let mut lines = vec![[0u64; WORDS_PER_LINE]; groups * chunks * s_max as usize];
        for i in 0..rows {
            let g = i / BANKS;
            let k = i % BANKS;
            for (m, &code) in table.row_codes(i).iter().enumerate() {
                let c = m / 64;
                let t = m % 64;
                let base = (g * chunks + c) * s_max as usize;
                let mut rest = code;
                while rest != 0 {
                    let p = rest.trailing_zeros();
                    rest &= rest - 1;
                    // Bit p (from the LSB) of an S-bit code is plane S-1-p.
                    let w = (s_max as u32 - 1 - p) as usize;
                    lines[base + w][k] |= 1u64 << t;
                }
            }
        }
        WeavingStore {
            rows,
            cols,
            s_max,
            groups,
            chunks,
            lines,
            labels: table.labels().to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Maximum precision `S` stored (planes per group-chunk).
    pub fn max_precision(&self) -> u8 {
        self.s_max
    }

    /// `ceil(rows / 8)` sample groups.
    pub fn sample_groups(&self) -> usize {
        self.groups
    }

    /// `ceil(cols / 64)` feature chunks.
    pub fn chunks(&self) -> usize {
        self.chunks
    }

    /// Feature count padded to the chunk boundary (`chunks * 64`), the
    /// model length the trainer works with.
    pub fn padded_cols(&self) -> usize {
        self.chunks * 64
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn line(&self, index: usize) -> &Line {
        &self.lines[index]
    }

    /// Line index for a cursor position: `(g * chunks + c) * S + w`.
    pub fn line_index(&self, cursor: &PlaneCursor) -> usize {
        (cursor.group * self.chunks + cursor.chunk) * self.s_max as usize + cursor.plane as usize
    }

    pub fn label(&self, row: usize) -> Fixed {
        self.labels[row]
    }

    pub fn labels(&self) -> &[Fixed] {
        &self.labels
    }

    fn check_precision(&self, s: u8) -> Result<()> {
        if s < 1 || s > self.s_max {
            return Err(Error::PrecisionRange {
                s: s as u32,
                max: self.s_max as u32,
            });
        }
        Ok(())
    }

    /// Reads one sample back at precision `s`; exactly equal to truncating
    /// the original codes to their `s` most significant bits.
    pub fn read_sample(&self, row: usize, s: u8) -> Result<Vec<u32>> {
        self.check_precision(s)?;
        if row >= self.rows {
            return Err(Error::SampleRange {
                index: row,
                rows: self.rows,
            });
        }
        let g = row / BANKS;
        let k = row % BANKS;
        let mut codes = vec![0u32; self.cols];
        for c in 0..self.chunks {
            let base = (g * self.chunks + c) * self.s_max as usize;
            for w in 0..s as usize {
                let mut word = self.lines[base + w][k];
                while word != 0 {
                    let t = word.trailing_zeros() as usize;
                    word &= word - 1;
                    let m = c * 64 + t;
                    if m < self.cols {
                        codes[m] |= 1u32 << (s as usize - 1 - w);
                    }
                }
            }
        }
        Ok(codes)
    }

    /// Streams one sample's bit-plane slices (one per chunk, `s` planes
    /// deep) for the bit-serial dot product.
    pub fn sample_slices(&self, row: usize, s: u8) -> Result<impl Iterator<Item = BitPlaneSlice> + '_> {
        self.check_precision(s)?;
        if row >= self.rows {
            return Err(Error::SampleRange {
                index: row,
                rows: self.rows,
            });
        }
        let g = row / BANKS;
        let k = row % BANKS;
        let s_max = self.s_max as usize;
        Ok((0..self.chunks).map(move |c| {
            let base = (g * self.chunks + c) * s_max;
            let mut planes = [0u64; 32];
            for (w, plane) in planes[..s as usize].iter_mut().enumerate() {
                *plane = self.lines[base + w][k];
            }
            BitPlaneSlice::new(&planes[..s as usize]).expect("depth validated")
        }))
    }

    /// Walks every line an `s`-bit scan touches, in group → chunk → plane
    /// order: `s` planes read, `S - s` skipped per (group, chunk).
    pub fn plane_iter(&self, s: u8) -> Result<impl Iterator<Item = PlaneCursor> + '_> {
        self.check_precision(s)?;
        let chunks = self.chunks;
        Ok((0..self.groups).flat_map(move |group| {
            (0..chunks).flat_map(move |chunk| {
                (0..s).map(move |plane| PlaneCursor {
                    group,
                    chunk,
                    plane,
                    precision: s,
                })
            })
        }))
    }

    /// Serializes the store in the documented `.mlwv` layout.
    pub fn save<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut payload =
            Vec::with_capacity(self.labels.len() * 4 + self.lines.len() * WORDS_PER_LINE * 8);
        for label in &self.labels {
            debug_assert!(label.fits_i32());
            payload.extend_from_slice(&(label.raw() as i32).to_le_bytes());
        }
        for line in &self.lines {
            for word in line {
                payload.extend_from_slice(&word.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&payload);

        out.write_all(&STORE_MAGIC)?;
        out.write_all(&STORE_VERSION.to_le_bytes())?;
        out.write_all(&0u16.to_le_bytes())?; // flags
        out.write_all(&(self.rows as u64).to_le_bytes())?;
        out.write_all(&(self.cols as u64).to_le_bytes())?;
        out.write_all(&[self.s_max, BANKS as u8])?;
        out.write_all(&[0u8; 6])?; // reserved
        out.write_all(&crc.to_le_bytes())?;
        out.write_all(&payload)?;
        Ok(())
    }

    /// Deserializes a store, verifying magic, version, geometry, and the
    /// payload checksum.
    pub fn load<R: Read>(input: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(input, &mut magic, "magic")?;
        if magic != STORE_MAGIC {
            return Err(Error::BadMagic { got: magic });
        }
        let version = read_u16(input, "version")?;
        if version != STORE_VERSION {
            return Err(Error::VersionMismatch {
                got: version,
                expected: STORE_VERSION,
            });
        }
        let flags = read_u16(input, "flags")?;
        if flags != 0 {
            return Err(Error::BadGeometry(format!("unsupported flags {flags:#06x}")));
        }
        let rows = read_u64(input, "row count")?;
        let cols = read_u64(input, "column count")?;
        let mut meta = [0u8; 8];
        read_exact(input, &mut meta, "precision/banks")?;
        let s_max = meta[0];
        let banks = meta[1];
        if banks as usize != BANKS {
            return Err(Error::BadGeometry(format!("bank count {banks}, expected {BANKS}")));
        }
        if !(1..=32).contains(&s_max) {
            return Err(Error::BadGeometry(format!("precision {s_max} out of 1..=32")));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::BadGeometry(format!("empty store {rows}x{cols}")));
        }
        let mut crc_bytes = [0u8; 4];
        read_exact(input, &mut crc_bytes, "checksum")?;
        let stored_crc = u32::from_le_bytes(crc_bytes);

        let rows = usize::try_from(rows)
            .map_err(|_| Error::BadGeometry(format!("row count {rows} too large")))?;
        let cols = usize::try_from(cols)
            .map_err(|_| Error::BadGeometry(format!("column count {cols} too large")))?;
        let groups = rows.div_ceil(BANKS);
        let chunks = cols.div_ceil(64);
        let line_count = groups
            .checked_mul(chunks)
            .and_then(|n| n.checked_mul(s_max as usize))
            .ok_or_else(|| Error::BadGeometry("line count overflow".into()))?;
        let payload_len = rows
            .checked_mul(4)
            .and_then(|n| n.checked_add(line_count.checked_mul(WORDS_PER_LINE * 8)?))
            .ok_or_else(|| Error::BadGeometry("payload size overflow".into()))?;

        let mut payload = vec![0u8; payload_len];
        read_exact(input, &mut payload, "payload")?;
        let computed = crc32fast::hash(&payload);
        if computed != stored_crc {
            return Err(Error::ChecksumMismatch {
                stored: stored_crc,
                computed,
            });
        }
        if input.read(&mut [0u8; 1])? != 0 {
            return Err(Error::BadGeometry("trailing bytes after payload".into()));
        }

        let mut labels = Vec::with_capacity(rows);
        for chunk in payload[..rows * 4].chunks_exact(4) {
            let raw = i32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
            labels.push(Fixed::from_raw(raw as i64));
        }
        let mut lines = Vec::with_capacity(line_count);
        for line_bytes in payload[rows * 4..].chunks_exact(WORDS_PER_LINE * 8) {
            let mut line = [0u64; WORDS_PER_LINE];
            for (word, bytes) in line.iter_mut().zip(line_bytes.chunks_exact(8)) {
                *word = u64::from_le_bytes(bytes.try_into().expect("8-byte chunk"));
            }
            lines.push(line);
        }
        Ok(WeavingStore {
            rows,
            cols,
            s_max,
            groups,
            chunks,
            lines,
            labels,
        })
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut file)?;
        use std::io::Write as _;
        file.flush()?;
        Ok(())
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::load(&mut file)
    }
}

/// Single-sample bit-plane layout: one sample x 512 features per line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BWeavingStore {
    rows: usize,
    cols: usize,
    s_max: u8,
    chunks512: usize,
    lines: Vec<Line>,
}

impl BWeavingStore {
    /// Transposes a quantized table into the one-sample-per-line layout.
    pub fn build(table: &FixedPointTable) -> Self {
        let rows = table.rows();
        let cols = table.cols();
        let s_max = table.max_precision();
        let chunks512 = cols.div_ceil(512);
        let mut lines = vec![[0u64; WORDS_PER_LINE]; rows * chunks512 * s_max as usize];
        for i in 0..rows {
            for (m, &code) in table.row_codes(i).iter().enumerate() {
                let c = m / 512;
                let u = m % 512;
                let base = (i * chunks512 + c) * s_max as usize;
                let mut rest = code;
                while rest != 0 {
                    let p = rest.trailing_zeros();
                    rest &= rest - 1;
                    let w = (s_max as u32 - 1 - p) as usize;
                    lines[base + w][u / 64] |= 1u64 << (u % 64);
                }
            }
        }
        BWeavingStore {
            rows,
            cols,
            s_max,
            chunks512,
            lines,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn max_precision(&self) -> u8 {
        self.s_max
    }

    /// `ceil(cols / 512)` feature chunks.
    pub fn chunks512(&self) -> usize {
        self.chunks512
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn line(&self, index: usize) -> &Line {
        &self.lines[index]
    }

    /// Line index for (sample, 512-feature chunk, plane):
    /// `(i * chunks512 + c) * S + w`.
    pub fn line_index(&self, row: usize, chunk: usize, plane: u8) -> usize {
        (row * self.chunks512 + chunk) * self.s_max as usize + plane as usize
    }

    /// Reads one sample back at precision `s` (truncated codes).
    pub fn read_sample(&self, row: usize, s: u8) -> Result<Vec<u32>> {
        if s < 1 || s > self.s_max {
            return Err(Error::PrecisionRange {
                s: s as u32,
                max: self.s_max as u32,
            });
        }
        if row >= self.rows {
            return Err(Error::SampleRange {
                index: row,
                rows: self.rows,
            });
        }
        let mut codes = vec![0u32; self.cols];
        for c in 0..self.chunks512 {
            let base = (row * self.chunks512 + c) * self.s_max as usize;
            for w in 0..s as usize {
                let line = &self.lines[base + w];
                for (word_idx, &word) in line.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let t = word.trailing_zeros() as usize;
                        word &= word - 1;
                        let m = c * 512 + word_idx * 64 + t;
                        if m < self.cols {
                            codes[m] |= 1u32 << (s as usize - 1 - w);
                        }
                    }
                }
            }
        }
        Ok(codes)
    }
}

/// Bits of memory traffic one sample costs at precision `s`:
/// `s * ceil(M/64) * 64` feature bits (features padded to the 64-bit word)
/// plus a 32-bit label.
pub fn memory_traffic_bits(cols: u64, s: u8) -> Result<u64> {
    if cols == 0 {
        return Err(Error::EmptyDataset { rows: 0, cols: 0 });
    }
    if !(1..=32).contains(&s) {
        return Err(Error::PrecisionRange { s: s as u32, max: 32 });
    }
    Ok(s as u64 * cols.div_ceil(64) * 64 + 32)
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8], context: &'static str) -> Result<()> {
    input.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated { context }
        } else {
            Error::Io(e)
        }
    })
}

fn read_u16<R: Read>(input: &mut R, context: &'static str) -> Result<u16> {
    let mut buf = [0u8; 2];
    read_exact(input, &mut buf, context)?;
    Ok(u16::from_le_bytes(buf))
}

fn read_u64<R: Read>(input: &mut R, context: &'static str) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(input, &mut buf, context)?;
    Ok(u64::from_le_bytes(buf))
}
