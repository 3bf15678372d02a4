//! Radial matrices and their text file format.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::CollocationGrid;
use super::MorphError;

/// A shape boundary sampled on a collocation grid: `R[k][j]` is the radial
/// distance from the origin curve at polar angle `phi_k` in plane `j`.
/// Values are stored row-major by plane (`j` outer, `k` inner).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMatrix {
    grid: CollocationGrid,
    radii: Vec<f64>,
}

impl RadialMatrix {
    pub fn new(grid: CollocationGrid, radii: Vec<f64>) -> Result<Self, MorphError> {
        let expect = grid.n_s() * grid.n_phi();
        if radii.len() != expect {
            return Err(MorphError::DimensionMismatch {
                expected: expect,
                got: radii.len(),
            });
        }
        if let Some(bad) = radii.iter().position(|r| !r.is_finite()) {
            return Err(MorphError::NonFiniteRadius {
                k: bad % grid.n_phi(),
                j: bad / grid.n_phi(),
            });
        }
        Ok(Self { grid, radii })
    }

    /// Builds a matrix from a per-(k, j) rule.
    pub fn from_fn(
        grid: CollocationGrid,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, MorphError> {
        let (n_s, n_phi) = (grid.n_s(), grid.n_phi());
        let mut radii = Vec::with_capacity(n_s * n_phi);
        for j in 0..n_s {
            for k in 0..n_phi {
                radii.push(f(k, j));
            }
        }
        Self::new(grid, radii)
    }

    pub fn grid(&self) -> &CollocationGrid {
        &self.grid
    }

    pub fn radius(&self, k: usize, j: usize) -> f64 {
        self.radii[j * self.grid.n_phi() + k]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// All radii in plane `j`.
    pub fn plane(&self, j: usize) -> &[f64] {
        let n_phi = self.grid.n_phi();
        &self.radii[j * n_phi..(j + 1) * n_phi]
    }

    /// Largest radius in plane `j`.
    pub fn max_radius_in_plane(&self, j: usize) -> f64 {
        self.plane(j).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Serializes to the radial-matrix text format: one header line
    /// `format_version=1 n_s=<n> n_phi=<n> arc_length=<s>`, then one line
    /// of `n_phi` radii per plane. All numbers print with full round-trip
    /// precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "format_version=1 n_s={} n_phi={} arc_length={}",
            self.grid.n_s(),
            self.grid.n_phi(),
            self.grid.arc_length()
        );
        for j in 0..self.grid.n_s() {
            let row: Vec<String> = self.plane(j).iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MorphError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| MorphError::parse(1, "header", "empty document"))?;
        let mut n_s = None;
        let mut n_phi = None;
        let mut arc_length = None;
        let mut version = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| MorphError::parse(1, field, "expected key=value"))?;
            match key {
                "format_version" => {
                    version = Some(value.parse::<u32>().map_err(|e| {
                        MorphError::parse(1, "format_version", e.to_string())
                    })?)
                }
                "n_s" => {
                    n_s = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| MorphError::parse(1, "n_s", e.to_string()))?,
                    )
                }
                "n_phi" => {
                    n_phi = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| MorphError::parse(1, "n_phi", e.to_string()))?,
                    )
                }
                "arc_length" => {
                    arc_length = Some(
                        value
                            .parse::<f64>()
                            .map_err(|e| MorphError::parse(1, "arc_length", e.to_string()))?,
                    )
                }
                other => return Err(MorphError::parse(1, other, "unknown header field")),
            }
        }
        match version {
            Some(1) => {}
            Some(v) => {
                return Err(MorphError::parse(
                    1,
                    "format_version",
                    format!("unsupported version {v}"),
                ))
            }
            None => return Err(MorphError::parse(1, "format_version", "missing")),
        }
        let n_s = n_s.ok_or_else(|| MorphError::parse(1, "n_s", "missing"))?;
        let n_phi = n_phi.ok_or_else(|| MorphError::parse(1, "n_phi", "missing"))?;
        let arc_length =
            arc_length.ok_or_else(|| MorphError::parse(1, "arc_length", "missing"))?;
        let grid = CollocationGrid::new(n_s, n_phi, arc_length)?;

        let mut radii = Vec::with_capacity(n_s * n_phi);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            for (col, token) in line.split_whitespace().enumerate() {
                let r = token.parse::<f64>().map_err(|e| {
                    MorphError::parse(idx + 1, format!("radius column {col}"), e.to_string())
                })?;
                radii.push(r);
            }
        }
        if radii.len() != n_s * n_phi {
            return Err(MorphError::DimensionMismatch {
                expected: n_s * n_phi,
                got: radii.len(),
            });
        }
        Self::new(grid, radii)
    }
}

/// Writes a radial matrix to `path` in the text format.
pub fn save_radial(shape: &RadialMatrix, path: impl AsRef<Path>) -> Result<(), MorphError> {
    std::fs::write(path.as_ref(), shape.to_text()).map_err(|e| MorphError::Io(e.to_string()))
}

/// Reads a radial matrix from `path`.
pub fn load_radial(path: impl AsRef<Path>) -> Result<RadialMatrix, MorphError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| MorphError::Io(e.to_string()))?;
    RadialMatrix::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_s: usize, n_phi: usize) -> CollocationGrid {
        CollocationGrid::new(n_s, n_phi, 1.0).unwrap()
    }

    #[test]
    fn minimal_grid_round_trips_exactly() {
        let m = RadialMatrix::new(grid(2, 3), vec![0.1, 0.2, 0.3, 1.0 / 3.0, 0.5, 0.6]).unwrap();
        let back = RadialMatrix::from_text(&m.to_text()).unwrap();
        assert_eq!(m.radii(), back.radii());
        assert_eq!(m.grid(), back.grid());
    }

    #[test]
    fn wrong_radius_count_is_dimension_mismatch() {
        let text = "format_version=1 n_s=2 n_phi=3 arc_length=1\n1 2 3\n4 5\n";
        match RadialMatrix::from_text(text) {
            Err(MorphError::DimensionMismatch { expected: 6, got: 5 }) => {}
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn malformed_number_reports_location() {
        let text = "format_version=1 n_s=2 n_phi=3 arc_length=1\n1 2 3\n4 x 6\n";
        match RadialMatrix::from_text(text) {
            Err(MorphError::ParseError { line: 3, .. }) => {}
            other => panic!("expected ParseError on line 3, got {other:?}"),
        }
    }

    #[test]
    fn header_rejects_unknown_and_missing_fields() {
        assert!(RadialMatrix::from_text("format_version=1 n_s=2 n_phi=3\n").is_err());
        assert!(
            RadialMatrix::from_text("format_version=1 n_s=2 n_phi=3 arc_length=1 bogus=7\n")
                .is_err()
        );
        assert!(RadialMatrix::from_text("format_version=2 n_s=2 n_phi=3 arc_length=1\n").is_err());
    }

    #[test]
    fn non_finite_radii_are_rejected_with_location() {
        match RadialMatrix::new(grid(2, 3), vec![1.0, 2.0, f64::NAN, 4.0, 5.0, 6.0]) {
            Err(MorphError::NonFiniteRadius { k: 2, j: 0 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
