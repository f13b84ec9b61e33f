use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::math::Rng;

/// Target size for image sources.
pub const IMAGE_WIDTH: usize = 100;
pub const IMAGE_HEIGHT: usize = 67;

/// Number of images in the built-in procedural corpus.
pub const CORPUS_SIZE: usize = 100;

const CORPUS_SEED: u64 = 0x7e47_0e5e;

/// Grayscale image with intensities in [0, 1], stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn is_constant(&self) -> bool {
        self.pixels.iter().all(|&p| p == self.pixels[0])
    }

    /// Bilinear resampling with pixel-center alignment.
    pub fn resize(&self, width: usize, height: usize) -> GrayImage {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let clamp = |v: f64, hi: usize| v.max(0.0).min((hi - 1) as f64);
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            let fy = clamp((y as f64 + 0.5) * sy - 0.5, self.height);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = fy - y0 as f64;
            for x in 0..width {
                let fx = clamp((x as f64 + 0.5) * sx - 0.5, self.width);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = fx - x0 as f64;
                let top = self.get(x0, y0) * (1.0 - tx) + self.get(x1, y0) * tx;
                let bottom = self.get(x0, y1) * (1.0 - tx) + self.get(x1, y1) * tx;
                pixels.push(top * (1.0 - ty) + bottom * ty);
            }
        }
        GrayImage {
            name: self.name.clone(),
            width,
            height,
            pixels,
        }
    }

    /// 8-bit binary PGM.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
        out
    }
}

/// Parses a binary (P5) PGM with maxval ≤ 255.
pub fn parse_pgm(bytes: &[u8], name: &str) -> std::result::Result<GrayImage, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "P5" {
        return Err(format!("expected binary PGM (P5), found {magic:?}"));
    }
    let mut number = |what: &str| -> std::result::Result<usize, String> {
        let t = token()?;
        t.parse().map_err(|_| format!("bad {what} {t:?}"))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("only 8-bit PGM is supported (maxval {maxval})"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let data = &bytes[(pos + 1).min(bytes.len())..];
    let need = width * height;
    if data.len() < need {
        return Err(format!("raster has {} bytes, expected {need}", data.len()));
    }
    Ok(GrayImage {
        name: name.to_string(),
        width,
        height,
        pixels: data[..need].iter().map(|&b| b as f64 / maxval as f64).collect(),
    })
}

pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_pgm(&bytes, &name).map_err(|reason| Error::Ingest {
        path: path.to_path_buf(),
        reason,
    })
}

/// Every `.pgm` file in `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_pgm = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads and rescales every path to the 100×67 working size.
pub fn load_images(paths: &[PathBuf]) -> Result<Vec<GrayImage>> {
    paths
        .iter()
        .map(|p| load_pgm(p).map(|im| im.resize(IMAGE_WIDTH, IMAGE_HEIGHT)))
        .collect()
}

/// Smooth random field: bilinear interpolation of a coarse random grid.
fn value_noise(rng: &mut Rng, gw: usize, gh: usize, w: usize, h: usize) -> Vec<f64> {
    let grid = GrayImage {
        name: String::new(),
        width: gw,
        height: gh,
        pixels: (0..gw * gh).map(|_| rng.uniform()).collect(),
    };
    grid.resize(w, h).pixels
}

/// Procedural texture `k` of the built-in corpus: oriented gratings, rings and
/// smooth noise, optionally thresholded, quantized to 8 bits.
pub fn procedural_texture(k: usize, width: usize, height: usize) -> GrayImage {
    let mut rng = Rng::indexed_substream(CORPUS_SEED, "texture", k as u64);
    let (w, h) = (width as f64, height as f64);
    let mut field = vec![0.0; width * height];

    let gratings = 1 + rng.index(3);
    for _ in 0..gratings {
        let angle = rng.uniform() * TAU;
        let freq = rng.uniform_range(1.5, 9.0);
        let phase = rng.uniform() * TAU;
        let amp = rng.uniform_range(0.3, 1.0);
        let (c, s) = (angle.cos(), angle.sin());
        for y in 0..height {
            for x in 0..width {
                let u = (x as f64 / w) * c + (y as f64 / h) * s;
                field[y * width + x] += amp * (TAU * freq * u + phase).sin();
            }
        }
    }
    if rng.uniform() < 0.5 {
        let (cx, cy) = (rng.uniform() * w, rng.uniform() * h);
        let freq = rng.uniform_range(0.05, 0.3);
        let amp = rng.uniform_range(0.3, 1.0);
        for y in 0..height {
            for x in 0..width {
                let r = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                field[y * width + x] += amp * (freq * r).sin();
            }
        }
    }
    let gw = 3 + rng.index(8);
    let gh = 3 + rng.index(6);
    let noise_amp = rng.uniform_range(0.5, 2.0);
    for (f, v) in field.iter_mut().zip(value_noise(&mut rng, gw, gh, width, height)) {
        *f += noise_amp * (v - 0.5) * 2.0;
    }
    if rng.uniform() < 0.25 {
        for f in &mut field {
            *f = f.tanh() * 3.0;
            *f = f.signum() * f.abs().sqrt();
        }
    }
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    GrayImage {
        name: format!("texture{k:03}"),
        width,
        height,
        pixels: field
            .iter()
            .map(|f| ((f - lo) / span * 255.0).round() / 255.0)
            .collect(),
    }
}

/// The default image corpus: 100 procedural textures at 100×67.
pub fn procedural_corpus() -> Vec<GrayImage> {
    (0..CORPUS_SIZE)
        .map(|k| procedural_texture(k, IMAGE_WIDTH, IMAGE_HEIGHT))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let im = procedural_texture(3, 17, 9);
        let back = parse_pgm(&im.to_pgm(), &im.name).unwrap();
        assert_eq!(back, im);
    }

    #[test]
    fn pgm_header_with_comments() {
        let mut bytes = b"P5 # comment\n2 # w\n1\n255\n".to_vec();
        bytes.extend([0u8, 255]);
        let im = parse_pgm(&bytes, "x").unwrap();
        assert_eq!((im.width, im.height), (2, 1));
        assert_eq!(im.pixels, vec![0.0, 1.0]);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0", "x").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00", "x").is_err());
        assert!(parse_pgm(b"P5\n1 1\n65535\n\x00\x00", "x").is_err());
    }

    #[test]
    fn resize_preserves_constants_and_identity() {
        let c = GrayImage {
            name: "c".into(),
            width: 5,
            height: 4,
            pixels: vec![0.25; 20],
        };
        assert!(c.resize(100, 67).pixels.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        let t = procedural_texture(1, 30, 20);
        assert_eq!(t.resize(30, 20), t);
    }

    #[test]
    fn corpus_is_deterministic_and_varied() {
        let a = procedural_texture(7, IMAGE_WIDTH, IMAGE_HEIGHT);
        assert_eq!(a, procedural_texture(7, IMAGE_WIDTH, IMAGE_HEIGHT));
        assert_eq!(a.pixels.len(), 6700);
        assert!(!a.is_constant());
        assert_ne!(a.pixels, procedural_texture(8, IMAGE_WIDTH, IMAGE_HEIGHT).pixels);
        assert!(a.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_pgm(Path::new("/nonexistent/img.pgm")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/img.pgm"));
    }
}
