use crate::geometry::PixelPoint;

pub const PYRAMID_LEVELS: u32 = 3;

/// Count-and-spread score of a camera's correspondences.
///
/// At level `l = 1..=3` the image is split into `2^l x 2^l` cells and every
/// occupied cell contributes `2^l`, so a well-spread point set outscores a
/// clustered one of the same size.
pub fn compute_view_score(points: impl IntoIterator<Item = PixelPoint>, width: u32, height: u32) -> u64 {
    const CELLS: usize = 1 << PYRAMID_LEVELS;
    let mut occupied = [[false; CELLS]; CELLS];
    let cell = |x: f64, extent: u32| -> usize {
        let i = libm::floor(x / extent as f64 * CELLS as f64);
        if i.is_nan() || i < 0.0 {
            0
        } else if i >= CELLS as f64 {
            CELLS - 1
        } else {
            i as usize
        }
    };
    for p in points {
        occupied[cell(p.v, height)][cell(p.u, width)] = true;
    }
    let mut score = 0;
    for level in 1..=PYRAMID_LEVELS {
        let n = 1usize << level;
        let stride = CELLS / n;
        let mut count = 0;
        for r in 0..n {
            for c in 0..n {
                let hit = (r * stride..(r + 1) * stride)
                    .any(|rr| (c * stride..(c + 1) * stride).any(|cc| occupied[rr][cc]));
                count += hit as u64;
            }
        }
        score += count << level;
    }
    score
}
