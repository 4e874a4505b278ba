//! Uniform grid hash over robot positions.
//!
//! Cell size is max(sensor_range, broadcast_range), so every query of either
//! kind only has to visit the 3x3 block around the query cell. Rebuilt from
//! the pose snapshot once per tick.

use super::geometry::Vec2;

#[derive(Debug, Clone)]
pub struct PoseGrid {
    cell_size: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
    positions: Vec<Vec2>,
}

impl PoseGrid {
    pub fn build(width: f64, height: f64, cell_size: f64, positions: &[Vec2]) -> Self {
        let cell_size = cell_size.max(1e-6);
        let cols = (width / cell_size).ceil().max(1.0) as usize;
        let rows = (height / cell_size).ceil().max(1.0) as usize;
        let mut cells = vec![Vec::new(); cols * rows];
        for (id, p) in positions.iter().enumerate() {
            let (cx, cy) = clamp_cell(*p, cell_size, cols, rows);
            cells[cy * cols + cx].push(id as u32);
        }
        Self { cell_size, cols, rows, cells, positions: positions.to_vec() }
    }

    pub fn position(&self, id: u32) -> Vec2 {
        self.positions[id as usize]
    }

    /// Ids (ascending) of all robots other than `skip` whose centre lies
    /// within `range` of `center`. Dead robots are included; callers filter.
    pub fn in_range(&self, center: Vec2, range: f64, skip: u32) -> Vec<u32> {
        let mut out = Vec::new();
        self.visit_block(center, |id| {
            if id != skip && self.positions[id as usize].distance(center) <= range {
                out.push(id);
            }
        });
        out.sort_unstable();
        out
    }

    /// Candidate ids in the 3x3 block around `center`, for collision and
    /// ray tests against nearby robot bodies.
    pub fn candidates(&self, center: Vec2, skip: u32) -> Vec<u32> {
        let mut out = Vec::new();
        self.visit_block(center, |id| {
            if id != skip {
                out.push(id);
            }
        });
        out
    }

    fn visit_block(&self, center: Vec2, mut f: impl FnMut(u32)) {
        let (cx, cy) = clamp_cell(center, self.cell_size, self.cols, self.rows);
        let x0 = cx.saturating_sub(1);
        let y0 = cy.saturating_sub(1);
        let x1 = (cx + 1).min(self.cols - 1);
        let y1 = (cy + 1).min(self.rows - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                for &id in &self.cells[y * self.cols + x] {
                    f(id);
                }
            }
        }
    }
}

fn clamp_cell(p: Vec2, cell: f64, cols: usize, rows: usize) -> (usize, usize) {
    let cx = ((p.x / cell).floor().max(0.0) as usize).min(cols - 1);
    let cy = ((p.y / cell).floor().max(0.0) as usize).min(rows - 1);
    (cx, cy)
}
