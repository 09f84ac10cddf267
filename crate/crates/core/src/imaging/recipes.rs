use super::{FrameStack, GrayImage};
use crate::bench::{BenchProblem, SolverKind};
use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, ObservationMask};
use crate::mc::McProblem;
use crate::rpca::{pcp_ialm, RpcaProblem};
use crate::solver::{SolverConfig, SolverTrace};

/// Largest per-frame |E| mapped below full scale; frames whose sparse part
/// stays under this are scaled as if it were this large.
const FOREGROUND_FLOOR: f64 = 1.0;

fn ensure_same_dims(a: &GrayImage, b: &GrayImage, what: &str) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return invalid(format!(
            "{what} is {}x{}, expected {}x{}",
            b.width(),
            b.height(),
            a.width(),
            a.height()
        ));
    }
    Ok(())
}

/// Ω from a mask image: 255 = observed, 0 = missing.
pub fn mask_from_image(mask: &GrayImage) -> Result<ObservationMask> {
    let (w, h) = (mask.width(), mask.height());
    let mut bitmap = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            bitmap[x * h + y] = match mask.get(x, y) {
                255 => true,
                0 => false,
                v => {
                    return invalid(format!(
                        "mask pixel ({x}, {y}) is {v}; masks must be 0 or 255"
                    ))
                }
            };
        }
    }
    ObservationMask::from_bitmap(h, w, bitmap)
}

/// Restores the missing pixels of `image` by matrix completion.
///
/// The image is its `height × width` pixel matrix; pixels where `mask` is
/// 255 are observed. Output entries are clamped to `[0, 255]` and rounded.
/// At least `height + width − 1` pixels must be observed, the fewest that
/// can pin down even a rank-1 matrix; sparser masks are rejected.
pub fn inpaint(
    image: &GrayImage,
    mask: &GrayImage,
    solver: SolverKind,
    config: &SolverConfig,
) -> Result<GrayImage> {
    ensure_same_dims(image, mask, "mask")?;
    if !solver.is_completion() {
        return invalid(format!("{solver} is not a matrix completion solver"));
    }
    let omega = mask_from_image(mask)?;
    let needed = image.width() + image.height() - 1;
    if omega.len() < needed {
        return invalid(format!(
            "{} observed pixels; inpainting a {}x{} image needs at least {needed}",
            omega.len(),
            image.width(),
            image.height()
        ));
    }
    let problem = BenchProblem::Completion(McProblem::new(&image.to_matrix(), omega)?);
    let (x, _) = solver.run(&problem, config, None)?;
    GrayImage::from_matrix(&x)
}

/// Peak signal-to-noise ratio in dB for 8-bit images; infinite when equal.
pub fn psnr(estimate: &GrayImage, reference: &GrayImage) -> Result<f64> {
    ensure_same_dims(reference, estimate, "psnr")?;
    let n = reference.pixels().len() as f64;
    let sse: f64 = estimate
        .pixels()
        .iter()
        .zip(reference.pixels())
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0_f64.powi(2) / (sse / n)).log10())
}

/// Low-rank background and sparse foreground of a frame sequence.
#[derive(Clone, Debug)]
pub struct BackgroundSplit {
    pub background: FrameStack,
    /// `|E|` per frame, scaled so the frame maximum maps to 255.
    pub foreground: FrameStack,
    /// Raw sparse component, one column per frame.
    pub sparse: DenseMatrix,
    pub trace: SolverTrace,
}

/// Splits a sequence with PCP: frames are the columns of `D`, the low-rank
/// part gives the background and the sparse part the foreground.
///
/// Foreground frames show `|E|` scaled by `255 / max(max|E_j|, 1)` per frame.
pub fn background_subtract(stack: &FrameStack, config: &SolverConfig) -> Result<BackgroundSplit> {
    if stack.len() < 2 {
        return invalid(format!(
            "background subtraction needs at least 2 frames, got {}",
            stack.len()
        ));
    }
    let (w, h) = stack.dims();
    let problem = RpcaProblem::new(stack.to_matrix())?;
    let sol = pcp_ialm(&problem, config, None)?;
    let background = FrameStack::from_matrix(&sol.low_rank, w, h)?;
    let frames = (0..sol.sparse.cols())
        .map(|j| {
            let column = sol.sparse.column(j);
            let peak = column.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let scale = 255.0 / peak.max(FOREGROUND_FLOOR);
            GrayImage::new(
                w,
                h,
                column
                    .iter()
                    .map(|v| super::to_pixel(v.abs() * scale))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BackgroundSplit {
        background,
        foreground: FrameStack::new(frames)?,
        sparse: sol.sparse,
        trace: sol.trace,
    })
}
