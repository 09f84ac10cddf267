//! Grayscale image I/O and the two image recipes: inpainting by matrix
//! completion and background subtraction by robust PCA.

mod pnm;
mod recipes;

pub use pnm::{
    read_pgm, read_ppm, to_pixel, write_pgm, write_ppm, ColorImage, FrameStack, GrayImage,
};
pub use recipes::{background_subtract, inpaint, mask_from_image, psnr, BackgroundSplit};
