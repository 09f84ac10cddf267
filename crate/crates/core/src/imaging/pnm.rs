use crate::error::{invalid, LowRankError, Result};
use crate::linalg::DenseMatrix;

/// 8-bit grayscale image, pixels stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            ));
        }
        if pixels.len() != width * height {
            return invalid(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel in column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// `height × width` matrix with entry `(y, x)` = pixel `(x, y)`.
    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.height, self.width, |y, x| self.get(x, y) as f64)
    }

    /// Inverse of [`GrayImage::to_matrix`]; entries are clamped to
    /// `[0, 255]` and rounded, non-finite entries become 0.
    pub fn from_matrix(m: &DenseMatrix) -> Result<Self> {
        Self::from_fn(m.cols(), m.rows(), |x, y| to_pixel(m.get(y, x)))
    }
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

/// Clamps to `[0, 255]` and rounds; NaN maps to 0.
pub fn to_pixel(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        v.clamp(0.0, 255.0).round() as u8
    }
}

/// Nonempty sequence of equally sized frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameStack {
    frames: Vec<GrayImage>,
}

impl FrameStack {
    pub fn new(frames: Vec<GrayImage>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return invalid("frame stack is empty");
        };
        let dims = (first.width, first.height);
        if let Some((i, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| (f.width, f.height) != dims)
        {
            return invalid(format!(
                "frame {i} is {}x{}, expected {}x{}",
                f.width, f.height, dims.0, dims.1
            ));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[GrayImage] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(width, height)` shared by every frame.
    pub fn dims(&self) -> (usize, usize) {
        (self.frames[0].width, self.frames[0].height)
    }

    /// `pixels × frames` matrix whose column `j` is frame `j` in row-major
    /// pixel order.
    pub fn to_matrix(&self) -> DenseMatrix {
        let frames = &self.frames;
        DenseMatrix::from_fn(frames[0].pixels.len(), frames.len(), |i, j| {
            frames[j].pixels[i] as f64
        })
    }

    /// Inverse of [`FrameStack::to_matrix`], pixels converted by [`to_pixel`].
    pub fn from_matrix(m: &DenseMatrix, width: usize, height: usize) -> Result<Self> {
        if m.rows() != width * height {
            return Err(LowRankError::DimensionMismatch {
                expected: (width * height, m.cols()),
                found: m.shape(),
            });
        }
        let frames = (0..m.cols())
            .map(|j| {
                GrayImage::new(
                    width,
                    height,
                    m.column(j).into_iter().map(to_pixel).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }
}

/// Three-channel 8-bit image kept as one [`GrayImage`] per channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorImage {
    pub red: GrayImage,
    pub green: GrayImage,
    pub blue: GrayImage,
}

impl ColorImage {
    pub fn new(red: GrayImage, green: GrayImage, blue: GrayImage) -> Result<Self> {
        FrameStack::new(vec![red.clone(), green.clone(), blue.clone()])?;
        Ok(Self { red, green, blue })
    }

    pub fn channels(&self) -> [&GrayImage; 3] {
        [&self.red, &self.green, &self.blue]
    }

    pub fn map_channels(&self, mut f: impl FnMut(&GrayImage) -> Result<GrayImage>) -> Result<Self> {
        Self::new(f(&self.red)?, f(&self.green)?, f(&self.blue)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(LowRankError::Parse {
            offset: self.pos,
            message: message.into(),
        })
    }

    /// Skips whitespace and `#` comments; comments run to the end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return if start >= self.bytes.len() {
                self.error(format!("unexpected end of data, expected {what}"))
            } else {
                self.error(format!("expected {what}"))
            };
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or_default();
        match text.parse::<usize>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.error(format!("{what} out of range"))
            }
        }
    }
}

/// Header fields shared by the PGM and PPM variants.
struct Header {
    binary: bool,
    width: usize,
    height: usize,
    maxval: usize,
}

fn parse_header(
    cur: &mut Cursor<'_>,
    ascii: &[u8; 2],
    binary: &[u8; 2],
    kind: &str,
) -> Result<Header> {
    let magic = cur.bytes.get(..2);
    let is_binary = match magic {
        Some(m) if m == binary => true,
        Some(m) if m == ascii => false,
        _ => return cur.error(format!("not a {kind} file (bad magic number)")),
    };
    cur.pos = 2;
    if !cur
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return cur.error("expected whitespace after magic number");
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    cur.skip_separators();
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        cur.pos = maxval_at;
        return cur.error("image dimensions must be positive");
    }
    if maxval == 0 || maxval > 255 {
        cur.pos = maxval_at;
        return cur.error(format!("maxval {maxval} outside 1..=255"));
    }
    Ok(Header {
        binary: is_binary,
        width,
        height,
        maxval,
    })
}

/// Samples of the payload scaled from `0..=maxval` to `0..=255`.
fn parse_samples(cur: &mut Cursor<'_>, h: &Header, count: usize) -> Result<Vec<u8>> {
    let scale = |v: usize| -> u8 {
        if h.maxval == 255 {
            v as u8
        } else {
            ((v * 255 + h.maxval / 2) / h.maxval) as u8
        }
    };
    let mut out = Vec::with_capacity(count);
    if h.binary {
        // Exactly one whitespace byte separates the header from the payload.
        if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return cur.error("expected a single whitespace byte before the payload");
        }
        cur.pos += 1;
        let available = cur.bytes.len() - cur.pos;
        if available < count {
            cur.pos = cur.bytes.len();
            return cur.error(format!(
                "truncated payload: expected {count} bytes, found {available}"
            ));
        }
        for &b in &cur.bytes[cur.pos..cur.pos + count] {
            if b as usize > h.maxval {
                return cur.error(format!("sample {b} exceeds maxval {}", h.maxval));
            }
            out.push(scale(b as usize));
            cur.pos += 1;
        }
    } else {
        for _ in 0..count {
            let at = cur.pos;
            let v = cur.number("pixel value")?;
            if v > h.maxval {
                cur.pos = at;
                cur.skip_separators();
                return cur.error(format!("sample {v} exceeds maxval {}", h.maxval));
            }
            out.push(scale(v));
        }
        cur.skip_separators();
    }
    if cur.pos != cur.bytes.len() {
        return cur.error("trailing data after the payload");
    }
    Ok(out)
}

/// Decodes a P2 (ASCII) or P5 (binary) graymap with `maxval ≤ 255`.
/// Samples are rescaled to `0..=255` when `maxval < 255`.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let h = parse_header(&mut cur, b"P2", b"P5", "PGM")?;
    let pixels = parse_samples(&mut cur, &h, h.width * h.height)?;
    GrayImage::new(h.width, h.height, pixels)
}

/// Canonical P5 encoding: `P5\n<w> <h>\n255\n` followed by the pixels.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

/// Decodes a P3 (ASCII) or P6 (binary) pixmap into per-channel images.
pub fn read_ppm(bytes: &[u8]) -> Result<ColorImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let h = parse_header(&mut cur, b"P3", b"P6", "PPM")?;
    let samples = parse_samples(&mut cur, &h, 3 * h.width * h.height)?;
    let channel = |c: usize| {
        GrayImage::new(
            h.width,
            h.height,
            samples.iter().skip(c).step_by(3).copied().collect(),
        )
    };
    ColorImage::new(channel(0)?, channel(1)?, channel(2)?)
}

/// Canonical P6 encoding with interleaved channels.
pub fn write_ppm(image: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.red.width, image.red.height).into_bytes();
    for i in 0..image.red.pixels.len() {
        out.extend([
            image.red.pixels[i],
            image.green.pixels[i],
            image.blue.pixels[i],
        ]);
    }
    out
}
