//! Hexagonal eNodeB layouts, UE placement, and the cell adjacency graph.
//!
//! Sites sit on a hexagonal lattice with a fixed inter-site distance. Rows of
//! the lattice are horizontal: row r lies at y = r * isd * sqrt(3)/2, and odd
//! rows are shifted by isd/2 in x, which makes every nearest-neighbor pair
//! exactly isd apart.

use crate::prach::PrachConfigIndex;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const DEFAULT_CELL_ANTENNA_HEIGHT_M: f64 = 30.0;
pub const DEFAULT_UE_HEIGHT_M: f64 = 1.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("a grid needs at least one cell")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// An eNodeB site. Ids are dense 0..n-1 with the center cell first.
#[derive(Debug, Clone)]
pub struct CellSite {
    pub id: usize,
    pub position: Point,
    pub antenna_height_m: f64,
    pub prach_index: Option<PrachConfigIndex>,
}

#[derive(Debug, Clone)]
pub struct UeNode {
    pub id: usize,
    pub position: Point,
    pub height_m: f64,
}

/// Axis-aligned placement region for UEs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Region {
    /// Bounding box of the sites expanded by `margin` on every side.
    pub fn around_sites(sites: &[CellSite], margin: f64) -> Region {
        assert!(!sites.is_empty(), "region needs at least one site");
        let mut r = Region {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for s in sites {
            r.min_x = r.min_x.min(s.position.x);
            r.min_y = r.min_y.min(s.position.y);
            r.max_x = r.max_x.max(s.position.x);
            r.max_y = r.max_y.max(s.position.y);
        }
        r.min_x -= margin;
        r.min_y -= margin;
        r.max_x += margin;
        r.max_y += margin;
        r
    }

    pub fn centroid(&self) -> Point {
        Point {
            x: (self.min_x + self.max_x) / 2.0,
            y: (self.min_y + self.max_y) / 2.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

// ===== Grid construction =====

// Axial coordinates (q, r) map to the plane as x = isd*(q + r/2),
// y = isd*sqrt(3)/2 * r; all six lattice neighbors are then isd away.
fn axial_to_plane(q: i64, r: i64, isd_m: f64) -> Point {
    Point {
        x: isd_m * (q as f64 + r as f64 / 2.0),
        y: isd_m * (3.0f64.sqrt() / 2.0) * r as f64,
    }
}

fn hex_ring_distance(q: i64, r: i64) -> i64 {
    (q.abs() + r.abs() + (q + r).abs()) / 2
}

/// Cells of lattice ring `k`, ordered counterclockwise starting from the
/// positive x axis.
fn ring_coords(k: i64) -> Vec<(i64, i64)> {
    if k == 0 {
        return vec![(0, 0)];
    }
    let mut coords: Vec<(i64, i64)> = Vec::new();
    for q in -k..=k {
        for r in -k..=k {
            if hex_ring_distance(q, r) == k {
                coords.push((q, r));
            }
        }
    }
    coords.sort_by(|&(qa, ra), &(qb, rb)| {
        let pa = axial_to_plane(qa, ra, 1.0);
        let pb = axial_to_plane(qb, rb, 1.0);
        angle_from_x_axis(pa).total_cmp(&angle_from_x_axis(pb))
    });
    coords
}

fn angle_from_x_axis(p: Point) -> f64 {
    let a = p.y.atan2(p.x);
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Builds a hexagonal grid of `n_cells` sites: the center cell at the origin,
/// then complete rings outward, each ring ordered by angle. A partial final
/// ring is truncated in that same order.
pub fn hex_grid(
    n_cells: usize,
    isd_m: f64,
    antenna_height_m: f64,
) -> Result<Vec<CellSite>, TopologyError> {
    if n_cells == 0 {
        return Err(TopologyError::EmptyGrid);
    }
    assert!(isd_m > 0.0, "inter-site distance must be positive");
    let mut sites = Vec::with_capacity(n_cells);
    let mut ring = 0;
    while sites.len() < n_cells {
        for (q, r) in ring_coords(ring) {
            if sites.len() == n_cells {
                break;
            }
            sites.push(CellSite {
                id: sites.len(),
                position: axial_to_plane(q, r, isd_m),
                antenna_height_m,
                prach_index: None,
            });
        }
        ring += 1;
    }
    Ok(sites)
}

/// Number of cells in a grid of `rings` complete rings around the center.
pub fn cells_in_rings(rings: u32) -> usize {
    let k = rings as usize;
    1 + 3 * k * (k + 1)
}

/// Groups site ids into lattice rows ordered bottom-to-top, each row ordered
/// left-to-right. Row membership is recovered from y, which sits on exact
/// multiples of the row pitch for grids built by `hex_grid`.
pub fn grid_rows(sites: &[CellSite], isd_m: f64) -> Vec<Vec<usize>> {
    let pitch = isd_m * 3.0f64.sqrt() / 2.0;
    let mut by_row: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for s in sites {
        let row = (s.position.y / pitch).round() as i64;
        by_row.entry(row).or_default().push(s.id);
    }
    let mut rows: Vec<Vec<usize>> = by_row.into_values().collect();
    for row in &mut rows {
        row.sort_by(|&a, &b| {
            sites[a]
                .position
                .x
                .total_cmp(&sites[b].position.x)
                .then(a.cmp(&b))
        });
    }
    rows
}

// ===== UE placement =====

/// Places `n_ues` UEs uniformly over `region`, ids 0..n_ues-1 in draw order.
/// Placement is a pure function of the generator state: one x draw then one
/// y draw per UE.
pub fn place_ues_uniform<R: Rng>(
    n_ues: usize,
    region: Region,
    height_m: f64,
    rng: &mut R,
) -> Vec<UeNode> {
    assert!(
        region.width() > 0.0 && region.height() > 0.0,
        "placement region must have positive area"
    );
    (0..n_ues)
        .map(|id| {
            let x = rng.gen_range(region.min_x..region.max_x);
            let y = rng.gen_range(region.min_y..region.max_y);
            UeNode {
                id,
                position: Point { x, y },
                height_m,
            }
        })
        .collect()
}

// ===== Adjacency and cell selection =====

/// Undirected nearest-neighbor graph over sites: an edge joins two sites
/// whose planar distance is isd within relative tolerance 1e-6.
#[derive(Debug, Clone)]
pub struct NeighborGraph {
    n_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl NeighborGraph {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as (low id, high id) pairs in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

pub fn neighbor_graph(sites: &[CellSite], isd_m: f64) -> NeighborGraph {
    let tol = isd_m * 1e-6;
    let mut edges = BTreeSet::new();
    for i in 0..sites.len() {
        for j in (i + 1)..sites.len() {
            let d = sites[i].position.distance(sites[j].position);
            if (d - isd_m).abs() <= tol {
                edges.insert((i, j));
            }
        }
    }
    NeighborGraph {
        n_vertices: sites.len(),
        edges,
    }
}

/// Line-of-sight distance between a UE and a site, including the antenna
/// height difference.
pub fn link_distance_m(ue: &UeNode, site: &CellSite) -> f64 {
    let dx = ue.position.x - site.position.x;
    let dy = ue.position.y - site.position.y;
    let dz = site.antenna_height_m - ue.height_m;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Site with the lowest path loss toward `ue`; ties resolve to the lowest id.
pub fn serving_cell(ue: &UeNode, sites: &[CellSite], path_loss_db: impl Fn(f64) -> f64) -> usize {
    assert!(!sites.is_empty(), "serving cell needs at least one site");
    let mut best_id = sites[0].id;
    let mut best_loss = f64::INFINITY;
    for site in sites {
        let loss = path_loss_db(link_distance_m(ue, site));
        if loss < best_loss {
            best_loss = loss;
            best_id = site.id;
        }
    }
    best_id
}
