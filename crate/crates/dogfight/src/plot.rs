//! Static PNG rendering of episode trajectories: the agent's track, the
//! enemy's true track, and the enemy as perceived through the noise.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::sim::Arena;
use crate::Result;

pub const AGENT_COLOR: Rgb<u8> = Rgb([20, 20, 20]);
pub const ENEMY_COLOR: Rgb<u8> = Rgb([200, 30, 30]);
pub const PERCEIVED_COLOR: Rgb<u8> = Rgb([240, 150, 20]);
const BORDER: Rgb<u8> = Rgb([120, 120, 120]);
const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);

pub struct TrajectoryPlot {
    img: RgbImage,
    arena: Arena,
    margin: f64,
    size: u32,
}

impl TrajectoryPlot {
    pub fn new(arena: Arena, size: u32) -> Self {
        let mut img = RgbImage::new(size, size);
        for p in img.pixels_mut() {
            *p = BACKGROUND;
        }
        let mut plot = Self { img, arena, margin: 0.05, size };
        plot.draw_border();
        plot
    }

    fn to_px(&self, x: f64, y: f64) -> (i64, i64) {
        let w = self.arena.x_max - self.arena.x_min;
        let h = self.arena.y_max - self.arena.y_min;
        let span = (1.0 - 2.0 * self.margin) * self.size as f64;
        let px = self.margin * self.size as f64 + (x - self.arena.x_min) / w * span;
        // Screen y grows downward.
        let py = self.margin * self.size as f64 + (self.arena.y_max - y) / h * span;
        (px.round() as i64, py.round() as i64)
    }

    fn put(&mut self, px: i64, py: i64, color: Rgb<u8>) {
        if px >= 0 && py >= 0 && (px as u32) < self.size && (py as u32) < self.size {
            self.img.put_pixel(px as u32, py as u32, color);
        }
    }

    fn draw_border(&mut self) {
        let (x0, y1) = self.to_px(self.arena.x_min, self.arena.y_min);
        let (x1, y0) = self.to_px(self.arena.x_max, self.arena.y_max);
        for x in x0..=x1 {
            self.put(x, y0, BORDER);
            self.put(x, y1, BORDER);
        }
        for y in y0..=y1 {
            self.put(x0, y, BORDER);
            self.put(x1, y, BORDER);
        }
    }

    /// Filled square marker.
    pub fn point(&mut self, x: f64, y: f64, radius: i64, color: Rgb<u8>) {
        let (px, py) = self.to_px(x, y);
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                self.put(px + dx, py + dy, color);
            }
        }
    }

    /// Line segment between two world points.
    pub fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, color: Rgb<u8>) {
        let (ax, ay) = self.to_px(x0, y0);
        let (bx, by) = self.to_px(x1, y1);
        let steps = (bx - ax).abs().max((by - ay).abs()).max(1);
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let x = ax as f64 + t * (bx - ax) as f64;
            let y = ay as f64 + t * (by - ay) as f64;
            self.put(x.round() as i64, y.round() as i64, color);
        }
    }

    /// Polyline through a track of world points.
    pub fn track(&mut self, points: &[(f64, f64)], color: Rgb<u8>) {
        for pair in points.windows(2) {
            self.line(pair[0].0, pair[0].1, pair[1].0, pair[1].1, color);
        }
    }

    /// Scatter markers for a track (used for the dispersed perceived poses).
    pub fn scatter(&mut self, points: &[(f64, f64)], color: Rgb<u8>) {
        for &(x, y) in points {
            self.point(x, y, 1, color);
        }
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.img
            .save(path)
            .map_err(|e| crate::Error::Config(format!("failed to write plot: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_saves() {
        let dir = tempfile::tempdir().unwrap();
        let mut plot = TrajectoryPlot::new(Arena::centered(100.0, 100.0), 200);
        plot.track(&[(-40.0, -40.0), (0.0, 0.0), (40.0, 10.0)], AGENT_COLOR);
        plot.scatter(&[(10.0, 10.0), (12.0, 9.0)], PERCEIVED_COLOR);
        let path = dir.path().join("traj.png");
        plot.save(&path).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        assert_eq!(img.width(), 200);
        // Something non-white was drawn.
        assert!(img.pixels().any(|p| p.0 != [255, 255, 255]));
    }
}
