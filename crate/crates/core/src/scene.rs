//! Synthetic frame sequences with known ground truth.
//!
//! Used by the examples, the test suites and the demo data the CLI can be
//! pointed at. Textures are sums of plane waves so that block-matching cost
//! surfaces are well behaved; everything is seeded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detector::Frame;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Wave {
    kx: f64,
    ky: f64,
    phase: f64,
    amplitude: f64,
}

/// Band-limited random texture defined over the whole plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    base: f64,
    waves: Vec<Wave>,
}

impl Texture {
    /// `waves` plane waves with wavelengths drawn from
    /// `[min_wavelength, max_wavelength]` pixels and uniformly random
    /// orientation and phase, summed around grey level `base`.
    pub fn random(
        seed: u64,
        waves: usize,
        min_wavelength: f64,
        max_wavelength: f64,
        base: f64,
        amplitude: f64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_wave = amplitude / (waves as f64).sqrt();
        let waves = (0..waves)
            .map(|_| {
                let lambda = rng.random_range(min_wavelength..=max_wavelength);
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let k = std::f64::consts::TAU / lambda;
                Wave {
                    kx: k * theta.cos(),
                    ky: k * theta.sin(),
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                    amplitude: per_wave,
                }
            })
            .collect();
        Self { base, waves }
    }

    /// Two perpendicular sine gratings of equal `wavelength` with random
    /// orientation and phases. Within a block this gives a bowl-shaped SAD
    /// surface for displacements up to about half a wavelength in any
    /// direction.
    pub fn grid(seed: u64, wavelength: f64, base: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let k = std::f64::consts::TAU / wavelength;
        let waves = [theta, theta + std::f64::consts::FRAC_PI_2]
            .into_iter()
            .map(|t| Wave {
                kx: k * t.cos(),
                ky: k * t.sin(),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
                amplitude,
            })
            .collect();
        Self { base, waves }
    }

    /// Default texture for block-matching tests: a 24 px grid, grey levels
    /// 128 ± 120.
    pub fn smooth(seed: u64) -> Self {
        Self::grid(seed, 24.0, 128.0, 60.0)
    }

    pub fn sample(&self, x: f64, y: f64) -> u8 {
        self.sample_f(x, y).round().clamp(0.0, 255.0) as u8
    }

    pub fn sample_f(&self, x: f64, y: f64) -> f64 {
        self.base
            + self
                .waves
                .iter()
                .map(|w| w.amplitude * (w.kx * x + w.ky * y + w.phase).sin())
                .sum::<f64>()
    }

    pub fn render(&self, width: usize, height: usize, offset: (i32, i32)) -> Frame {
        Frame::from_fn(width, height, |x, y| {
            self.sample((x as i32 + offset.0) as f64, (y as i32 + offset.1) as f64)
        })
    }
}

/// `(current, reference)` where `current(x, y) = reference(x + p, y + q)`,
/// so block matching should recover `(p, q)` on every interior block.
pub fn shifted_pair(
    texture: &Texture,
    width: usize,
    height: usize,
    shift: (i32, i32),
) -> (Frame, Frame) {
    (
        texture.render(width, height, shift),
        texture.render(width, height, (0, 0)),
    )
}

/// Square patch of texture drawn on top of the background.
#[derive(Debug, Clone, PartialEq)]
pub struct Sprite {
    pub size: usize,
    pixels: Vec<u8>,
}

impl Sprite {
    /// Bright textured square (grey levels 140–255) that contrasts with a
    /// dark background.
    pub fn textured(size: usize, seed: u64) -> Self {
        let tex = Texture::random(seed, 5, 10.0, 20.0, 200.0, 50.0);
        let pixels = (0..size * size)
            .map(|i| tex.sample((i % size) as f64, (i / size) as f64).max(140))
            .collect();
        Self { size, pixels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    /// Integer pixels per frame.
    Linear { vx: i32, vy: i32 },
    /// Alternates between the origin (even frames) and origin + offset (odd
    /// frames), so it never gets anywhere.
    Oscillating { dx: i32, dy: i32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub sprite: Sprite,
    /// Top-left corner at frame 0.
    pub origin: (i32, i32),
    pub motion: Motion,
}

impl SceneObject {
    pub fn top_left(&self, frame: usize) -> (i32, i32) {
        let k = frame as i32;
        match self.motion {
            Motion::Linear { vx, vy } => (self.origin.0 + k * vx, self.origin.1 + k * vy),
            Motion::Oscillating { dx, dy } => {
                let on = k % 2;
                (self.origin.0 + on * dx, self.origin.1 + on * dy)
            }
        }
    }

    /// Centre of the sprite at `frame` in continuous pixel coordinates.
    pub fn center(&self, frame: usize) -> (f64, f64) {
        let (x, y) = self.top_left(frame);
        let half = self.sprite.size as f64 / 2.0;
        (x as f64 + half, y as f64 + half)
    }
}

/// Objects painted in order (later objects occlude earlier ones) over a flat
/// background.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub background: u8,
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn render(&self, frame: usize) -> Frame {
        let mut out = Frame::filled(self.width, self.height, self.background);
        for obj in &self.objects {
            let (ox, oy) = obj.top_left(frame);
            let n = obj.sprite.size;
            for j in 0..n {
                let y = oy + j as i32;
                if y < 0 || y >= self.height as i32 {
                    continue;
                }
                for i in 0..n {
                    let x = ox + i as i32;
                    if x < 0 || x >= self.width as i32 {
                        continue;
                    }
                    out.set(x as usize, y as usize, obj.sprite.pixels[j * n + i]);
                }
            }
        }
        out
    }

    pub fn sequence(&self, frames: usize) -> Vec<Frame> {
        (0..frames).map(|k| self.render(k)).collect()
    }

    /// One 32 px square moving right at 4 px/frame.
    pub fn moving_square() -> Self {
        Self {
            width: 256,
            height: 160,
            background: 30,
            objects: vec![SceneObject {
                sprite: Sprite::textured(32, 11),
                origin: (24, 56),
                motion: Motion::Linear { vx: 4, vy: 0 },
            }],
        }
    }

    /// [`Scene::moving_square`] plus a patch that jumps 6 px right and back
    /// every frame, well below the square's path.
    pub fn square_with_leaves() -> Self {
        let mut scene = Self::moving_square();
        scene.height = 176;
        scene.objects.push(SceneObject {
            sprite: Sprite::textured(32, 12),
            origin: (120, 124),
            motion: Motion::Oscillating { dx: 6, dy: 0 },
        });
        scene
    }

    /// Two 32 px squares on converging diagonals, velocities `(3, 1)` and
    /// `(3, −1)`. Their paths cross at frame 120 and the scene is meant to be
    /// run for 240 frames; the detections merge for about 60 frames around
    /// the crossing.
    pub fn crossing_pair() -> Self {
        Self {
            width: 800,
            height: 320,
            background: 30,
            objects: vec![
                SceneObject {
                    sprite: Sprite::textured(32, 21),
                    origin: (24, 24),
                    motion: Motion::Linear { vx: 3, vy: 1 },
                },
                SceneObject {
                    sprite: Sprite::textured(32, 22),
                    origin: (24, 264),
                    motion: Motion::Linear { vx: 3, vy: -1 },
                },
            ],
        }
    }
}
