use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Scene, Vec3};
use crate::solver::config::{OuterBoundary, SolverConfig};

/// Node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Cell {
    Exterior = 0,
    /// Solid node with an exterior neighbour; carries the Dirichlet value.
    Ghost = 1,
    Interior = 2,
    /// Box face, held at zero.
    Wall = 3,
}

/// Geometry of one exterior node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorNode {
    pub index: u32,
    pub nu: [f32; 3],
    /// `s + ρ₂M`.
    pub level: f64,
}

impl ExteriorNode {
    pub fn nu(&self) -> Vec3 {
        Vec3::new(self.nu[0] as f64, self.nu[1] as f64, self.nu[2] as f64)
    }
}

/// Cell-centred lattice `x_i = −L + (i + ½)h`, `i = 0..n`, on `[−L, L]³`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n: usize,
    pub h: f64,
    pub half_width: f64,
    pub mask: Vec<Cell>,
    /// Exterior nodes sorted by `s + ρ₂M` (ties by index).
    pub exterior: Vec<ExteriorNode>,
    pub rho2m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellCounts {
    pub exterior: usize,
    pub ghost: usize,
    pub interior: usize,
    pub wall: usize,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn ijk(&self, idx: usize) -> (usize, usize, usize) {
        (idx / (self.n * self.n), (idx / self.n) % self.n, idx % self.n)
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.ijk(idx);
        Vec3::new(self.coord(i), self.coord(j), self.coord(k))
    }

    pub fn counts(&self) -> CellCounts {
        let mut c = CellCounts::default();
        for m in &self.mask {
            match m {
                Cell::Exterior => c.exterior += 1,
                Cell::Ghost => c.ghost += 1,
                Cell::Interior => c.interior += 1,
                Cell::Wall => c.wall += 1,
            }
        }
        c
    }

    /// Exterior nodes with `lo ≤ s + ρ₂M ≤ hi`.
    pub fn level_range(&self, lo: f64, hi: f64) -> &[ExteriorNode] {
        let a = self.exterior.partition_point(|e| e.level < lo);
        let b = self.exterior.partition_point(|e| e.level <= hi);
        &self.exterior[a..b.max(a)]
    }
}

/// Box half-width for a config, rounded up to a whole number of cells.
pub fn box_half_width(config: &SolverConfig) -> Result<f64> {
    let h = config.h;
    let guard = config.bump.support_radius() + config.t_final + 2.0 * h;
    let l = match (config.outer_boundary, config.box_half_width) {
        (OuterBoundary::Guard, None) => guard,
        (OuterBoundary::Guard, Some(l)) if l < guard => {
            return Err(Error::Config(format!(
                "box_half_width {l} violates the propagation guard {guard:.4} (support radius + t_final + 2h)"
            )))
        }
        (_, Some(l)) => l,
        (OuterBoundary::Reflecting, None) => {
            return Err(Error::Config("reflecting outer boundary requires box_half_width".into()))
        }
    };
    Ok((l / h - 1e-9).ceil() * h)
}

pub fn build_grid(scene: &Scene, config: &SolverConfig) -> Result<Grid> {
    config.validate()?;
    let h = config.h;
    let half_width = box_half_width(config)?;
    let n = (2.0 * half_width / h).round() as usize;
    if n < 3 {
        return Err(Error::Config("box holds fewer than 3 nodes per axis".into()));
    }
    if n as u64 * n as u64 * n as u64 > u32::MAX as u64 {
        return Err(Error::Config(format!("grid of {n}^3 nodes is too large")));
    }
    let obstacle = &scene.obstacle;
    if let Some((lo, hi)) = obstacle.bounds() {
        let limit = half_width - 2.0 * h;
        if lo.min() < -limit || hi.max() > limit {
            return Err(Error::Config(format!(
                "obstacle extends beyond the box interior [-{limit}, {limit}]^3"
            )));
        }
    }
    let bump_center = Vec3::from(config.bump.center);
    if config.bump.amplitude != 0.0 {
        if !obstacle.is_none() && obstacle.signed_distance(&bump_center) <= config.bump.radius {
            return Err(Error::Config("bump support overlaps the obstacle".into()));
        }
        if bump_center.amax() + config.bump.radius >= half_width - h {
            return Err(Error::Config("bump support reaches the box faces".into()));
        }
    }

    let mut grid = Grid {
        n,
        h,
        half_width,
        mask: Vec::new(),
        exterior: Vec::new(),
        rho2m: scene.body.rho2m(),
    };
    let plane = n * n;
    let g = &grid;
    let mut mask = vec![Cell::Exterior; n * n * n];
    mask.par_chunks_mut(plane).enumerate().for_each(|(i, slab)| {
        for j in 0..n {
            for k in 0..n {
                let cell = &mut slab[j * n + k];
                if i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1 {
                    *cell = Cell::Wall;
                } else if obstacle.contains(&Vec3::new(g.coord(i), g.coord(j), g.coord(k))) {
                    *cell = Cell::Interior;
                }
            }
        }
    });
    let strides = [plane, n, 1];
    let ghosts: Vec<usize> = (0..n * n * n)
        .into_par_iter()
        .filter(|&idx| {
            mask[idx] == Cell::Interior
                && strides
                    .iter()
                    .any(|&s| mask[idx - s] == Cell::Exterior || mask[idx + s] == Cell::Exterior)
        })
        .collect();
    for idx in ghosts {
        mask[idx] = Cell::Ghost;
    }
    grid.mask = mask;

    let body = &scene.body;
    let rho2m = body.rho2m();
    let g = &grid;
    let mut exterior: Vec<ExteriorNode> = (0..n * n * n)
        .into_par_iter()
        .filter(|&idx| g.mask[idx] == Cell::Exterior)
        .map(|idx| {
            let x = g.point(idx);
            let (c, frame) = body.locate(&x).map_err(|e| {
                Error::Domain(format!(
                    "exterior node ({:.6}, {:.6}, {:.6}) has no illuminating coordinates: {e}",
                    x.x, x.y, x.z
                ))
            })?;
            let nu = frame.normal;
            Ok(ExteriorNode {
                index: idx as u32,
                nu: [nu.x as f32, nu.y as f32, nu.z as f32],
                level: c.s + rho2m,
            })
        })
        .collect::<Result<_>>()?;
    exterior.par_sort_unstable_by(|a, b| a.level.total_cmp(&b.level).then(a.index.cmp(&b.index)));
    grid.exterior = exterior;
    Ok(grid)
}
