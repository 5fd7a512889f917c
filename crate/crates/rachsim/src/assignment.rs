//! PRACH-ConfigIndex assignment schemes over a cell grid.
//!
//! The planning question is which index each cell announces. `assign_same`
//! reproduces the common deployment where every cell uses one index;
//! `assign_alternating_rows` staggers a four-index palette so no two
//! neighboring cells share an index; `assign_greedy_coloring` does the same
//! for arbitrary adjacency via deterministic greedy graph coloring.

use crate::prach::PrachConfigIndex;
use crate::topology::{CellSite, NeighborGraph};
use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Site id to assigned index. Complete over the grid it was built for.
pub type Assignment = BTreeMap<usize, PrachConfigIndex>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("palette must hold exactly four distinct indices, got {0}")]
    InvalidPalette(String),
    #[error("no palette index is feasible for cell {vertex}")]
    Infeasible { vertex: usize },
    #[error("assignment is missing cell {vertex}")]
    MissingVertex { vertex: usize },
    #[error("assignment file line {line}: {reason}")]
    File { line: usize, reason: String },
    #[error("cannot read assignment file: {0}")]
    Io(String),
}

/// Every cell gets the same index.
pub fn assign_same(sites: &[CellSite], index: PrachConfigIndex) -> Assignment {
    sites.iter().map(|s| (s.id, index)).collect()
}

fn check_palette(palette: &[PrachConfigIndex]) -> Result<(), AssignmentError> {
    if palette.len() != 4 {
        return Err(AssignmentError::InvalidPalette(format!(
            "{} entries",
            palette.len()
        )));
    }
    for i in 0..palette.len() {
        for j in (i + 1)..palette.len() {
            if palette[i] == palette[j] {
                return Err(AssignmentError::InvalidPalette(format!(
                    "duplicate index {}",
                    palette[i]
                )));
            }
        }
    }
    Ok(())
}

/// Staggers a four-index palette (a, b, c, d) over lattice rows: even rows
/// alternate (a, b), odd rows alternate (c, d), and each reuse of a pair
/// flips its order. Row 0 reads a,b,a,b..., row 2 reads b,a,b,a..., row 1
/// reads c,d,c,d..., row 3 reads d,c,d,c..., and so on.
///
/// Vertical neighbors draw from disjoint pairs and horizontal neighbors
/// alternate within a pair, so neighboring cells never share an index.
pub fn assign_alternating_rows(
    rows: &[Vec<usize>],
    palette: &[PrachConfigIndex],
) -> Result<Assignment, AssignmentError> {
    check_palette(palette)?;
    let mut assignment = Assignment::new();
    for (row_idx, row) in rows.iter().enumerate() {
        let (mut first, mut second) = if row_idx % 2 == 0 {
            (palette[0], palette[1])
        } else {
            (palette[2], palette[3])
        };
        // Count how many times this pair has been used before this row.
        if (row_idx / 2) % 2 == 1 {
            std::mem::swap(&mut first, &mut second);
        }
        for (pos, &site) in row.iter().enumerate() {
            assignment.insert(site, if pos % 2 == 0 { first } else { second });
        }
    }
    Ok(assignment)
}

/// Deterministic greedy coloring: vertices in descending degree order (ties
/// by ascending id), each taking the first palette position unused by its
/// already-colored neighbors.
pub fn assign_greedy_coloring(
    graph: &NeighborGraph,
    palette: &[PrachConfigIndex],
) -> Result<Assignment, AssignmentError> {
    if palette.is_empty() {
        return Err(AssignmentError::InvalidPalette("0 entries".into()));
    }
    let mut order: Vec<usize> = (0..graph.n_vertices()).collect();
    order.sort_by_key(|&v| (Reverse(graph.degree(v)), v));

    let mut assignment = Assignment::new();
    for v in order {
        let neighbor_colors: Vec<PrachConfigIndex> = graph
            .neighbors(v)
            .into_iter()
            .filter_map(|n| assignment.get(&n).copied())
            .collect();
        let choice = palette
            .iter()
            .find(|c| !neighbor_colors.contains(c))
            .copied();
        match choice {
            Some(c) => {
                assignment.insert(v, c);
            }
            None => return Err(AssignmentError::Infeasible { vertex: v }),
        }
    }
    Ok(assignment)
}

/// True when no edge of `graph` joins two cells with the same index. Errors
/// if the assignment misses a vertex of the graph.
pub fn verify_neighbor_distinct(
    graph: &NeighborGraph,
    assignment: &Assignment,
) -> Result<bool, AssignmentError> {
    for v in 0..graph.n_vertices() {
        if !assignment.contains_key(&v) {
            return Err(AssignmentError::MissingVertex { vertex: v });
        }
    }
    Ok(graph.edges().all(|(a, b)| assignment[&a] != assignment[&b]))
}

/// Parses a `site_id,prach_index` file. Blank lines and `#` comments are
/// skipped. The result must cover every site exactly once and only use
/// palette indices.
pub fn load_assignment_file(
    path: &Path,
    n_sites: usize,
    palette: &[PrachConfigIndex],
) -> Result<Assignment, AssignmentError> {
    let text = std::fs::read_to_string(path).map_err(|e| AssignmentError::Io(e.to_string()))?;
    parse_assignment(&text, n_sites, palette)
}

pub fn parse_assignment(
    text: &str,
    n_sites: usize,
    palette: &[PrachConfigIndex],
) -> Result<Assignment, AssignmentError> {
    let mut assignment = Assignment::new();
    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |reason: String| AssignmentError::File {
            line: line_no,
            reason,
        };
        let (site_str, index_str) = line
            .split_once(',')
            .ok_or_else(|| fail("expected site_id,prach_index".into()))?;
        let site: usize = site_str
            .trim()
            .parse()
            .map_err(|_| fail(format!("bad site id '{}'", site_str.trim())))?;
        let raw_index: u32 = index_str
            .trim()
            .parse()
            .map_err(|_| fail(format!("bad index '{}'", index_str.trim())))?;
        let index = PrachConfigIndex::new(raw_index).map_err(|e| fail(e.to_string()))?;
        if !palette.contains(&index) {
            return Err(fail(format!("index {index} is not in the palette")));
        }
        if site >= n_sites {
            return Err(fail(format!("site {site} does not exist ({n_sites} sites)")));
        }
        if assignment.insert(site, index).is_some() {
            return Err(fail(format!("site {site} assigned twice")));
        }
    }
    for site in 0..n_sites {
        if !assignment.contains_key(&site) {
            return Err(AssignmentError::MissingVertex { vertex: site });
        }
    }
    Ok(assignment)
}

/// Palette used by the staggered schemes unless overridden: the four indices
/// whose rules are single-subframe, even-frame, format 0, so every cell keeps
/// one opportunity per 20 ms while neighbors use disjoint subframes.
pub fn default_palette() -> Vec<PrachConfigIndex> {
    [0u32, 1, 2, 15]
        .into_iter()
        .map(|raw| PrachConfigIndex::new(raw).expect("palette indices are defined"))
        .collect()
}
