//! Joint coincidence-count files, optical unit conversion and
//! global-variable marginals.
//!
//! A joint-counts file is line oriented text:
//!
//! ```text
//! # variable_pair=position
//! # step_mm=0.05
//! # f1_mm=50
//! # f2_mm=200
//! # f3_mm=250
//! # lambda_mm=0.00065
//! # s_x_mm=0.05
//! # s_p_mm=0.02
//! # micrometer_step_mm=0.01
//! # i0=-1
//! # j0=-1
//! 0,1,0
//! 2,9,1
//! 0,3,0
//! ```
//!
//! Row `r` is detector-1 scan index `i0 + r`, column `c` is detector-2 scan
//! index `j0 + c`. `i0`/`j0` are optional and default to centering the scan
//! on index 0. Lines starting with `#` that are not `key=value` pairs are
//! ignored, as are blank lines.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::binning::{BinGrid, CountHistogram, Rebin};
use crate::error::{invalid, Error, Result};

/// Which pair of conjugate detector-plane variables a scan measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariablePair {
    Position,
    Momentum,
}

impl VariablePair {
    pub fn as_str(self) -> &'static str {
        match self {
            VariablePair::Position => "position",
            VariablePair::Momentum => "momentum",
        }
    }
}

impl fmt::Display for VariablePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariablePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "position" => Ok(VariablePair::Position),
            "momentum" => Ok(VariablePair::Momentum),
            other => Err(invalid(format!("unknown variable_pair {other:?}"))),
        }
    }
}

/// Sign of a global variable: `+` for `z1 + z2`, `-` for `z1 - z2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn opposite(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Lens, slit and wavelength parameters of the detection optics, in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalGeometry {
    pub f1_mm: f64,
    pub f2_mm: f64,
    pub f3_mm: f64,
    pub lambda_mm: f64,
    pub s_x_mm: f64,
    pub s_p_mm: f64,
    pub micrometer_step_mm: f64,
}

impl OpticalGeometry {
    /// The imaging telescope (50 mm / 200 mm), Fourier lens (250 mm),
    /// 650 nm light, 50 um / 20 um slits and 10 um micrometers of the
    /// reference photon-pair experiment.
    pub fn reference() -> Self {
        Self {
            f1_mm: 50.0,
            f2_mm: 200.0,
            f3_mm: 250.0,
            lambda_mm: 650e-6,
            s_x_mm: 0.050,
            s_p_mm: 0.020,
            micrometer_step_mm: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("f1_mm", self.f1_mm),
            ("f2_mm", self.f2_mm),
            ("f3_mm", self.f3_mm),
            ("lambda_mm", self.lambda_mm),
            ("s_x_mm", self.s_x_mm),
            ("s_p_mm", self.s_p_mm),
            ("micrometer_step_mm", self.micrometer_step_mm),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn base_bin_width(&self, pair: VariablePair) -> f64 {
        detector_to_source_scale(self, pair)
    }
}

impl Default for OpticalGeometry {
    fn default() -> Self {
        Self::reference()
    }
}

/// Width of the base global-variable bin in source-plane units.
///
/// Position: `2 s_x f1 / f2` (mm). Momentum: `2 s_p 2 pi / (f3 lambda)` (1/mm).
pub fn detector_to_source_scale(geometry: &OpticalGeometry, pair: VariablePair) -> f64 {
    match pair {
        VariablePair::Position => 2.0 * geometry.s_x_mm * (geometry.f1_mm / geometry.f2_mm),
        VariablePair::Momentum => {
            2.0 * geometry.s_p_mm * (2.0 * PI / (geometry.f3_mm * geometry.lambda_mm))
        }
    }
}

/// A rectangular array of coincidence counts from a two-detector scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointCounts {
    variable_pair: VariablePair,
    step_mm: f64,
    geometry: OpticalGeometry,
    i0: i64,
    j0: i64,
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl JointCounts {
    /// Builds a scan from row-major counts. `origin` is `(i0, j0)`, the scan
    /// indices of the first row and column; `None` centers the scan.
    pub fn new(
        variable_pair: VariablePair,
        step_mm: f64,
        geometry: OpticalGeometry,
        rows: usize,
        cols: usize,
        counts: Vec<u64>,
        origin: Option<(i64, i64)>,
    ) -> Result<Self> {
        geometry.validate()?;
        if !(step_mm.is_finite() && step_mm > 0.0) {
            return Err(invalid(format!("step_mm must be positive, got {step_mm}")));
        }
        if rows == 0 || cols == 0 {
            return Err(invalid(
                "joint counts must have at least one row and one column",
            ));
        }
        if counts.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} counts for a {rows}x{cols} scan, got {}",
                rows * cols,
                counts.len()
            )));
        }
        let (i0, j0) = origin.unwrap_or((-((rows as i64 - 1) / 2), -((cols as i64 - 1) / 2)));
        Ok(Self {
            variable_pair,
            step_mm,
            geometry,
            i0,
            j0,
            rows,
            cols,
            counts,
        })
    }

    pub fn variable_pair(&self) -> VariablePair {
        self.variable_pair
    }

    pub fn step_mm(&self) -> f64 {
        self.step_mm
    }

    pub fn geometry(&self) -> &OpticalGeometry {
        &self.geometry
    }

    pub fn origin(&self) -> (i64, i64) {
        (self.i0, self.j0)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Same scan with every count replaced by `f(count)`.
    pub fn map_counts<F: FnMut(u64) -> u64>(&self, f: F) -> JointCounts {
        JointCounts {
            counts: self.counts.iter().copied().map(f).collect(),
            ..self.clone()
        }
    }

    /// Serializes to the joint-counts text format.
    pub fn to_text(&self) -> String {
        let g = &self.geometry;
        let mut out = String::new();
        let header = [
            ("variable_pair", self.variable_pair.to_string()),
            ("step_mm", self.step_mm.to_string()),
            ("f1_mm", g.f1_mm.to_string()),
            ("f2_mm", g.f2_mm.to_string()),
            ("f3_mm", g.f3_mm.to_string()),
            ("lambda_mm", g.lambda_mm.to_string()),
            ("s_x_mm", g.s_x_mm.to_string()),
            ("s_p_mm", g.s_p_mm.to_string()),
            ("micrometer_step_mm", g.micrometer_step_mm.to_string()),
            ("i0", self.i0.to_string()),
            ("j0", self.j0.to_string()),
        ];
        for (k, v) in header {
            let _ = writeln!(out, "# {k}={v}");
        }
        for row in self.counts.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut meta: HashMap<String, (String, usize)> = HashMap::new();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut last_line = 0;
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), (v.trim().to_string(), lineno));
                }
                continue;
            }
            let mut row = Vec::new();
            for field in trimmed.split(',') {
                let field = field.trim();
                let value: i128 = field.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("not an integer count: {field:?}"),
                })?;
                if value < 0 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("negative count {value}"),
                    });
                }
                let value = u64::try_from(value).map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("count {value} out of range"),
                })?;
                row.push(value);
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("ragged row: {} values, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        let eof = last_line + 1;
        let get = |key: &str| -> Result<(&str, usize)> {
            meta.get(key)
                .map(|(v, l)| (v.as_str(), *l))
                .ok_or_else(|| Error::Parse {
                    line: eof,
                    msg: format!("missing metadata key {key:?}"),
                })
        };
        let real = |key: &str| -> Result<f64> {
            let (v, line) = get(key)?;
            v.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("{key}: not a number: {v:?}"),
            })
        };
        let (pair_str, pair_line) = get("variable_pair")?;
        let variable_pair: VariablePair = pair_str.parse().map_err(|e: Error| Error::Parse {
            line: pair_line,
            msg: e.to_string(),
        })?;
        let step_mm = real("step_mm")?;
        let geometry = OpticalGeometry {
            f1_mm: real("f1_mm")?,
            f2_mm: real("f2_mm")?,
            f3_mm: real("f3_mm")?,
            lambda_mm: real("lambda_mm")?,
            s_x_mm: real("s_x_mm")?,
            s_p_mm: real("s_p_mm")?,
            micrometer_step_mm: real("micrometer_step_mm")?,
        };
        let index = |key: &str| -> Result<Option<i64>> {
            match meta.get(key) {
                None => Ok(None),
                Some((v, line)) => v.parse::<i64>().map(Some).map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("{key}: not an integer: {v:?}"),
                }),
            }
        };
        let (i0, j0) = (index("i0")?, index("j0")?);
        if rows.is_empty() {
            return Err(Error::Parse {
                line: eof,
                msg: "no count rows".into(),
            });
        }
        let (nrows, ncols) = (rows.len(), rows[0].len());
        let origin = match (i0, j0) {
            (None, None) => None,
            (i, j) => Some((
                i.unwrap_or(-((nrows as i64 - 1) / 2)),
                j.unwrap_or(-((ncols as i64 - 1) / 2)),
            )),
        };
        let counts = rows.into_iter().flatten().collect();
        JointCounts::new(
            variable_pair,
            step_mm,
            geometry,
            nrows,
            ncols,
            counts,
            origin,
        )
        .map_err(|e| Error::Parse {
            line: eof,
            msg: e.to_string(),
        })
    }
}

pub fn load_joint_counts<P: AsRef<Path>>(path: P) -> Result<JointCounts> {
    JointCounts::parse(fs::File::open(path)?)
}

pub fn save_joint_counts<P: AsRef<Path>>(path: P, counts: &JointCounts) -> Result<()> {
    fs::write(path, counts.to_text())?;
    Ok(())
}

/// Histogram of `i + j` (`Sign::Plus`) or `i - j` (`Sign::Minus`) scan
/// indices, on a grid whose width is the base global-variable bin.
pub fn global_marginal(jc: &JointCounts, sign: Sign) -> CountHistogram {
    let (i0, j0) = jc.origin();
    let (rows, cols) = jc.shape();
    let combine = |i: i64, j: i64| match sign {
        Sign::Plus => i + j,
        Sign::Minus => i - j,
    };
    let (i_last, j_last) = (i0 + rows as i64 - 1, j0 + cols as i64 - 1);
    let (k_min, k_max) = match sign {
        Sign::Plus => (i0 + j0, i_last + j_last),
        Sign::Minus => (i0 - j_last, i_last - j0),
    };
    let mut counts = vec![0u64; (k_max - k_min + 1) as usize];
    for r in 0..rows {
        for c in 0..cols {
            let k = combine(i0 + r as i64, j0 + c as i64);
            counts[(k - k_min) as usize] += jc.get(r, c);
        }
    }
    let width = detector_to_source_scale(jc.geometry(), jc.variable_pair());
    let grid =
        BinGrid::new(width, k_min, k_max).expect("validated geometry gives a positive width");
    CountHistogram::new(grid, counts).expect("grid sized to the index range")
}

/// Groups `factor` base bins into one (`factor` odd).
pub fn rebin_marginal(h: &CountHistogram, factor: usize) -> Result<CountHistogram> {
    h.rebin(factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> JointCounts {
        JointCounts::new(
            VariablePair::Position,
            0.05,
            OpticalGeometry::reference(),
            2,
            2,
            vec![1, 2, 3, 4],
            Some((0, 0)),
        )
        .unwrap()
    }

    #[test]
    fn reference_scales() {
        let g = OpticalGeometry::reference();
        let dx = detector_to_source_scale(&g, VariablePair::Position);
        let dp = detector_to_source_scale(&g, VariablePair::Momentum);
        assert!((dx - 0.0250).abs() < 1e-15);
        // Four significant figures: relative error below 5e-4.
        assert!(((dp - 1.546) / 1.546).abs() < 5e-4, "{dp}");
        let doubled = OpticalGeometry { s_x_mm: 0.1, ..g };
        assert!(
            (detector_to_source_scale(&doubled, VariablePair::Position) - 2.0 * dx).abs() < 1e-15
        );
    }

    #[test]
    fn difference_and_sum_marginals() {
        let jc = small();
        let minus = global_marginal(&jc, Sign::Minus);
        assert_eq!((minus.grid().j_min(), minus.grid().j_max()), (-1, 1));
        assert_eq!(minus.counts(), &[2, 5, 3]);
        let plus = global_marginal(&jc, Sign::Plus);
        assert_eq!((plus.grid().j_min(), plus.grid().j_max()), (0, 2));
        assert_eq!(plus.counts(), &[1, 5, 4]);
        assert!((plus.grid().width() - 0.025).abs() < 1e-15);
    }

    #[test]
    fn rebin_marginal_delegates() {
        let h =
            CountHistogram::new(BinGrid::symmetric(1.0, 4).unwrap(), (1..=9).collect()).unwrap();
        assert_eq!(rebin_marginal(&h, 3).unwrap().counts(), &[6, 15, 24]);
        assert!(rebin_marginal(&h, 4).is_err());
    }

    #[test]
    fn parse_minimal_file() {
        let text =
            "# variable_pair=momentum\n# step_mm=0.02\n# f1_mm=50\n# f2_mm=200\n# f3_mm=250\n\
                    # lambda_mm=0.00065\n# s_x_mm=0.05\n# s_p_mm=0.02\n# micrometer_step_mm=0.01\n\
                    # free-form comment\n1, 2\n3,4\n";
        let jc = JointCounts::parse(text.as_bytes()).unwrap();
        assert_eq!(jc.variable_pair(), VariablePair::Momentum);
        assert_eq!(jc.shape(), (2, 2));
        assert_eq!(jc.total(), 10);
        assert_eq!(jc.origin(), (0, 0));
    }

    fn header() -> String {
        "# variable_pair=position\n# step_mm=0.05\n# f1_mm=50\n# f2_mm=200\n# f3_mm=250\n\
         # lambda_mm=0.00065\n# s_x_mm=0.05\n# s_p_mm=0.02\n# micrometer_step_mm=0.01\n"
            .to_string()
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = header() + "1,2\n3,-1\n";
        match JointCounts::parse(text.as_bytes()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 11);
                assert!(msg.contains("negative"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        let ragged = header() + "1,2\n3\n";
        assert!(matches!(
            JointCounts::parse(ragged.as_bytes()),
            Err(Error::Parse { line: 11, .. })
        ));
        let missing = header().replace("# f3_mm=250\n", "") + "1\n";
        match JointCounts::parse(missing.as_bytes()) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("f3_mm")),
            other => panic!("{other:?}"),
        }
        let bad_pair = header().replace("position", "energy") + "1\n";
        assert!(matches!(
            JointCounts::parse(bad_pair.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let junk = header() + "1,x\n";
        assert!(matches!(
            JointCounts::parse(junk.as_bytes()),
            Err(Error::Parse { line: 10, .. })
        ));
        assert!(JointCounts::parse(header().as_bytes()).is_err());
    }

    #[test]
    fn origin_keys_and_default_centering() {
        let text = header() + "# i0=-1\n# j0=-2\n0,0,0,0,0\n0,0,1,0,0\n0,0,0,0,0\n";
        let jc = JointCounts::parse(text.as_bytes()).unwrap();
        assert_eq!(jc.origin(), (-1, -2));
        let plus = global_marginal(&jc, Sign::Plus);
        assert_eq!(plus.count(0), 1);

        let centered = header() + "0,0,0\n0,7,0\n0,0,0\n";
        let jc = JointCounts::parse(centered.as_bytes()).unwrap();
        assert_eq!(jc.origin(), (-1, -1));
        assert_eq!(global_marginal(&jc, Sign::Minus).count(0), 7);
    }

    #[test]
    fn text_round_trip() {
        let jc = small();
        let back = JointCounts::parse(jc.to_text().as_bytes()).unwrap();
        assert_eq!(back, jc);
    }

    #[test]
    fn marginals_conserve_counts() {
        let counts: Vec<u64> = (0..35).map(|v| (v * 7919) % 13).collect();
        let jc = JointCounts::new(
            VariablePair::Momentum,
            0.02,
            OpticalGeometry::reference(),
            5,
            7,
            counts,
            None,
        )
        .unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let h = global_marginal(&jc, sign);
            assert_eq!(h.total(), jc.total());
            for f in [1, 3, 5] {
                assert_eq!(rebin_marginal(&h, f).unwrap().total(), jc.total());
            }
        }
    }
}
