//! 1D grids, boundary conditions and ghost extension.
//!
//! Cells are `I_{j+1/2} = [x_j, x_{j+1}]`; cell `i` in code is the cell whose
//! left node is node `i`. A grid with `N` cells has `N + 1` nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::DofField;
use crate::systems::EquationSystem;
use crate::State;

/// Ghost layers used by the spatial operator. The MP limiter reads two cell
/// averages beyond the stencil of the outermost limited cell.
pub const GHOST_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    sizes: Vec<f64>,
    centers: Vec<f64>,
    uniform: bool,
}

impl Grid1D {
    /// `n` equal cells on `[a, b]`. Every cell size is the same float
    /// `(b - a) / n`; `nodes[0] == a` and `nodes[n] == b` exactly.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Grid(format!("need a < b, got a={a}, b={b}")));
        }
        if n < 3 {
            return Err(Error::Grid(format!(
                "need at least 3 cells for the reconstruction stencils, got {n}"
            )));
        }
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|j| a + (b - a) * (j as f64 / n as f64)).collect();
        nodes[n] = b;
        let centers = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            nodes,
            sizes: vec![h; n],
            centers,
            uniform: true,
        })
    }

    /// Arbitrary strictly increasing node coordinates.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 4 {
            return Err(Error::Grid(format!(
                "need at least 3 cells, got {}",
                nodes.len().saturating_sub(1)
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Grid("non-finite node coordinate".into()));
        }
        let sizes: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = sizes.iter().position(|&h| h <= 0.0) {
            return Err(Error::Grid(format!("nodes not strictly increasing at cell {i}")));
        }
        let centers = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            nodes,
            sizes,
            centers,
            uniform: false,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cell_sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.right() - self.left()
    }

    pub fn min_cell_size(&self) -> f64 {
        self.sizes.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Periodic,
    Outflow,
    Reflective,
}

impl BoundaryCondition {
    /// Interior cell that backs (possibly ghost) cell `i`, and whether the
    /// normal velocity must be negated.
    pub fn source_cell(self, n: usize, i: isize) -> (usize, bool) {
        let n_i = n as isize;
        match self {
            BoundaryCondition::Periodic => (i.rem_euclid(n_i) as usize, false),
            BoundaryCondition::Outflow => (i.clamp(0, n_i - 1) as usize, false),
            BoundaryCondition::Reflective => {
                if i < 0 {
                    ((-1 - i).min(n_i - 1) as usize, true)
                } else if i >= n_i {
                    ((2 * n_i - 1 - i).max(0) as usize, true)
                } else {
                    (i as usize, false)
                }
            }
        }
    }

    /// Interior node that backs (possibly ghost) node `j`. For periodic grids
    /// node `n` is identified with node 0.
    pub fn source_node(self, n: usize, j: isize) -> (usize, bool) {
        let n_i = n as isize;
        match self {
            BoundaryCondition::Periodic => (j.rem_euclid(n_i) as usize, false),
            BoundaryCondition::Outflow => (j.clamp(0, n_i) as usize, false),
            BoundaryCondition::Reflective => {
                if j < 0 {
                    ((-j).min(n_i) as usize, true)
                } else if j > n_i {
                    ((2 * n_i - j).max(0) as usize, true)
                } else {
                    (j as usize, false)
                }
            }
        }
    }
}

/// Cell averages, point values and cell sizes on indices
/// `-width ..= N - 1 + width` (cells) and `-width ..= N + width` (nodes).
#[derive(Debug, Clone)]
pub struct GhostExtended<const D: usize> {
    width: usize,
    averages: Vec<State<D>>,
    points: Vec<State<D>>,
    sizes: Vec<f64>,
}

impl<const D: usize> GhostExtended<D> {
    pub fn empty(width: usize) -> Self {
        Self {
            width,
            averages: Vec::new(),
            points: Vec::new(),
            sizes: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn average(&self, i: isize) -> &State<D> {
        &self.averages[(i + self.width as isize) as usize]
    }

    #[inline]
    pub fn point(&self, j: isize) -> &State<D> {
        &self.points[(j + self.width as isize) as usize]
    }

    #[inline]
    pub fn size(&self, i: isize) -> f64 {
        self.sizes[(i + self.width as isize) as usize]
    }

    /// Refill from `field`, reusing the allocations.
    pub fn fill<S: EquationSystem<D>>(
        &mut self,
        field: &DofField<D>,
        grid: &Grid1D,
        bc: BoundaryCondition,
        system: &S,
    ) -> Result<()> {
        let n = grid.num_cells();
        let w = self.width as isize;
        if self.width == 0 || self.width > n {
            return Err(Error::Grid(format!(
                "ghost width {} must lie in 1..={n}",
                self.width
            )));
        }
        if field.averages.len() != n || field.points.len() != n + 1 {
            return Err(Error::Grid(format!(
                "field shape ({} averages, {} points) does not match a grid with {n} cells",
                field.averages.len(),
                field.points.len()
            )));
        }
        let velocity = system.normal_velocity();
        if bc == BoundaryCondition::Reflective && velocity.is_none() {
            return Err(Error::config(format!(
                "reflective boundaries need a velocity component; {} has none",
                system.name()
            )));
        }

        self.averages.clear();
        self.sizes.clear();
        for i in -w..(n as isize + w) {
            let (src, flip) = bc.source_cell(n, i);
            let mut u = field.averages[src];
            if flip {
                if let Some(v) = velocity {
                    u[v.conserved] = -u[v.conserved];
                }
            }
            self.averages.push(u);
            self.sizes.push(grid.cell_sizes()[src]);
        }

        self.points.clear();
        for j in -w..=(n as isize + w) {
            let (src, flip) = bc.source_node(n, j);
            let mut p = field.points[src];
            if let Some(v) = velocity {
                if flip {
                    p[v.transformed] = -p[v.transformed];
                } else if bc == BoundaryCondition::Reflective && (src == 0 || src == n) {
                    // wall node: mean of the value and its mirror image
                    p[v.transformed] = 0.0;
                }
            }
            self.points.push(p);
        }
        Ok(())
    }
}

/// Ghost-extended copy of `field` with `width` layers on each side.
pub fn ghost_extend<S: EquationSystem<D>, const D: usize>(
    field: &DofField<D>,
    grid: &Grid1D,
    bc: BoundaryCondition,
    system: &S,
    width: usize,
) -> Result<GhostExtended<D>> {
    let mut ext = GhostExtended::empty(width);
    ext.fill(field, grid, bc, system)?;
    Ok(ext)
}
