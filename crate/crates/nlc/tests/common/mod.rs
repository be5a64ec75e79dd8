#![allow(dead_code)]

use std::path::PathBuf;

use nlc::read_pgm;
use nlc_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Sample {
    pub name: String,
    pub image: Image,
    pub natural: bool,
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// Grayscale photographs shipped under `tests/data/corpus`.
pub fn natural_images() -> Vec<Sample> {
    let mut paths: Vec<_> = std::fs::read_dir(data_dir().join("corpus"))
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Sample {
            name: p.file_stem().unwrap().to_string_lossy().into_owned(),
            image: read_pgm(&std::fs::read(&p).unwrap()).unwrap(),
            natural: true,
        })
        .collect()
}

/// Deterministic synthetic images with awkward sizes and statistics.
pub fn synthetic_images() -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let noise: Vec<u8> = (0..97 * 61).map(|_| rng.gen()).collect();
    let mut rng2 = ChaCha8Rng::seed_from_u64(0xfeed);
    let samples = vec![
        ("constant", Image::filled(64, 48, 100)),
        ("ramp", Image::from_fn(128, 32, |_, c| (c * 2) as u8)),
        ("diagonal", Image::from_fn(80, 80, |r, c| ((r + c) * 255 / 158) as u8)),
        ("checker", Image::from_fn(64, 64, |r, c| if (r / 8 + c / 8) % 2 == 0 { 20 } else { 235 })),
        ("noise", Image::new(97, 61, noise).unwrap()),
        ("waves", Image::from_fn(96, 96, |r, c| {
            (127.5 + 120.0 * ((r as f64 * 0.21).sin() * (c as f64 * 0.13).cos())).round() as u8
        })),
        ("disc", Image::from_fn(75, 75, |r, c| {
            let d = ((r as f64 - 37.0).powi(2) + (c as f64 - 37.0).powi(2)).sqrt();
            if d < 25.0 { 250 } else { 5 }
        })),
        ("noisy_ramp", Image::from_fn(1, 200, |r, _| ((r as i32 + rng2.gen_range(-6..=6)).clamp(0, 255)) as u8)),
    ];
    samples.into_iter().map(|(n, image)| Sample { name: n.into(), image, natural: false }).collect()
}

/// The 20-image corpus: 12 natural + 8 synthetic.
pub fn corpus() -> Vec<Sample> {
    let mut all = natural_images();
    all.extend(synthetic_images());
    all
}
