use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::Deserialize;

use crate::{Error, Result};

/// Airfoil polar: lift and drag coefficients over the angle of attack.
#[derive(Debug)]
pub struct PolarTable {
    id: String,
    /// Strictly increasing angles (rad).
    alpha: Vec<f64>,
    cl: Vec<f64>,
    cd: Vec<f64>,
    warned: AtomicBool,
}

impl Clone for PolarTable {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            alpha: self.alpha.clone(),
            cl: self.cl.clone(),
            cd: self.cd.clone(),
            warned: AtomicBool::new(self.warned.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for PolarTable {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.alpha == other.alpha && self.cl == other.cl && self.cd == other.cd
    }
}

#[derive(Deserialize)]
struct CsvRow {
    alpha_deg: f64,
    cl: f64,
    cd: f64,
}

impl PolarTable {
    /// Rows are `(alpha in degrees, C_L, C_D)`.
    pub fn from_degrees(id: &str, rows: &[[f64; 3]]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Config(format!("polar '{id}' needs at least 2 rows")));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("polar '{id}' contains non-finite values")));
        }
        if rows.windows(2).any(|w| !(w[1][0] > w[0][0])) {
            return Err(Error::Config(format!("polar '{id}': alpha must be strictly increasing")));
        }
        Ok(Self {
            id: id.to_string(),
            alpha: rows.iter().map(|r| r[0].to_radians()).collect(),
            cl: rows.iter().map(|r| r[1]).collect(),
            cd: rows.iter().map(|r| r[2]).collect(),
            warned: AtomicBool::new(false),
        })
    }

    /// Reads CSV with header `alpha_deg,cl,cd`.
    pub fn from_csv_reader(id: &str, reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Config(format!("polar '{id}': {e}")))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["alpha_deg", "cl", "cd"] {
            return Err(Error::Config(format!(
                "polar '{id}': header must be alpha_deg,cl,cd (found {})",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let row: CsvRow = rec.map_err(|e| Error::Config(format!("polar '{id}': {e}")))?;
            rows.push([row.alpha_deg, row.cl, row.cd]);
        }
        Self::from_degrees(id, &rows)
    }

    pub fn from_csv_path(id: &str, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(id, file)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Range of tabulated angles (rad).
    pub fn alpha_range(&self) -> (f64, f64) {
        (self.alpha[0], *self.alpha.last().unwrap())
    }

    /// Linear interpolation in alpha (rad); outside the table the end row is
    /// used and a warning is logged the first time.
    pub fn lookup(&self, alpha: f64) -> (f64, f64) {
        let (lo, hi) = self.alpha_range();
        if alpha <= lo || alpha >= hi || !alpha.is_finite() {
            if (alpha < lo || alpha > hi || !alpha.is_finite()) && !self.warned.swap(true, Ordering::Relaxed) {
                log::warn!(
                    "angle of attack {:.2} deg outside polar '{}' ({:.2}..{:.2} deg); clamping",
                    alpha.to_degrees(),
                    self.id,
                    lo.to_degrees(),
                    hi.to_degrees()
                );
            }
            let k = if alpha >= hi { self.len() - 1 } else { 0 };
            return (self.cl[k], self.cd[k]);
        }
        let k = self.alpha.partition_point(|a| *a <= alpha) - 1;
        let s = (alpha - self.alpha[k]) / (self.alpha[k + 1] - self.alpha[k]);
        (
            self.cl[k] + s * (self.cl[k + 1] - self.cl[k]),
            self.cd[k] + s * (self.cd[k + 1] - self.cd[k]),
        )
    }

    /// Whether a clamping warning has been issued.
    pub fn clamped(&self) -> bool {
        self.warned.load(Ordering::Relaxed)
    }
}

pub fn lookup_polar(table: &PolarTable, alpha: f64) -> (f64, f64) {
    table.lookup(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> PolarTable {
        PolarTable::from_degrees("t", &[[0.0, 0.0, 0.01], [10.0, 1.0, 0.02]]).unwrap()
    }

    #[test]
    fn midpoint_and_nodes() {
        let t = table();
        let (cl, cd) = t.lookup(5f64.to_radians());
        assert!((cl - 0.5).abs() < 1e-14 && (cd - 0.015).abs() < 1e-15);
        assert_eq!(t.lookup(10f64.to_radians()), (1.0, 0.02));
        assert_eq!(t.lookup(0.0), (0.0, 0.01));
        assert!(!t.clamped());
    }

    #[test]
    fn clamps_outside_range() {
        let t = table();
        assert_eq!(t.lookup(-5f64.to_radians()), (0.0, 0.01));
        assert!(t.clamped());
        assert_eq!(t.lookup(1.0), (1.0, 0.02));
    }

    #[test]
    fn invalid_tables() {
        assert!(PolarTable::from_degrees("e", &[]).is_err());
        assert!(PolarTable::from_degrees("e", &[[1.0, 0.0, 0.0], [1.0, 0.1, 0.0]]).is_err());
        assert!(PolarTable::from_degrees("e", &[[0.0, f64::NAN, 0.0], [1.0, 0.1, 0.0]]).is_err());
    }

    #[test]
    fn csv_parsing() {
        let text = "alpha_deg,cl,cd\n-2, -0.1, 0.01\n0,0.1,0.01\n8,0.9,0.012\n";
        let t = PolarTable::from_csv_reader("c", text.as_bytes()).unwrap();
        assert_eq!(t.len(), 3);
        let (cl, _) = t.lookup(4f64.to_radians());
        assert!((cl - 0.5).abs() < 1e-14);
        assert!(PolarTable::from_csv_reader("c", "a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(PolarTable::from_csv_reader("c", "alpha_deg,cl,cd\n1,x,3\n2,2,2\n".as_bytes()).is_err());
    }
}
