//! Fuel-allocation curve: the share of mechanical work paid from glycogen as a
//! function of the velocity ratio `V / VVO2max`.
//!
//! The curve is a natural cubic spline through a knot table. Evaluation clamps
//! the ratio to `[0, 1]` and the resulting fraction to `[0, 1]`; beyond the
//! last knot the curve is flat at the last knot value.

use std::fmt;
use std::str::FromStr;

use crate::error::{ModelError, Result};

/// Knot tables shipped with the crate. Edit the data file, not this constant.
pub const DEFAULT_KNOTS: &str = include_str!("../data/glyc_knots.txt");

/// Lactate-production class of the runner, selecting one of the shipped curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vla {
    Good,
    Average,
    Bad,
}

impl Vla {
    pub const ALL: [Vla; 3] = [Vla::Good, Vla::Average, Vla::Bad];

    pub fn as_str(self) -> &'static str {
        match self {
            Vla::Good => "good",
            Vla::Average => "average",
            Vla::Bad => "bad",
        }
    }
}

impl fmt::Display for Vla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Vla {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "good" => Ok(Vla::Good),
            "average" | "avg" => Ok(Vla::Average),
            "bad" => Ok(Vla::Bad),
            other => Err(ModelError::InvalidParam {
                name: "vla",
                reason: format!("unknown VLa type `{other}`"),
            }),
        }
    }
}

/// One cubic piece `y = a + b·dx + c·dx² + d·dx³` with `dx = r − x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    x0: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Piece {
    fn value(&self, r: f64) -> f64 {
        let dx = r - self.x0;
        self.a + dx * (self.b + dx * (self.c + dx * self.d))
    }

    fn slope(&self, r: f64) -> f64 {
        let dx = r - self.x0;
        self.b + dx * (2.0 * self.c + 3.0 * dx * self.d)
    }

    fn curvature(&self, r: f64) -> f64 {
        let dx = r - self.x0;
        2.0 * self.c + 6.0 * dx * self.d
    }
}

/// Value and ratio-derivatives of the clamped curve at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlycPoint {
    pub value: f64,
    /// d(glyc)/dr
    pub d1: f64,
    /// d²(glyc)/dr²
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlycCurve {
    knots: Vec<(f64, f64)>,
    pieces: Vec<Piece>,
}

impl GlycCurve {
    /// Natural cubic spline through `knots`.
    ///
    /// Knot ratios must be strictly increasing, start at 0 and end at 1, and
    /// every fraction must lie in `[0, 1]`.
    pub fn from_knots(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(ModelError::InvalidCurve("need at least two knots".into()));
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(ModelError::InvalidCurve(format!("knot {i} is not finite")));
            }
            if !(0.0..=1.0).contains(&y) {
                return Err(ModelError::InvalidCurve(format!(
                    "knot {i} fraction {y} outside [0, 1]"
                )));
            }
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(ModelError::InvalidCurve(
                "first knot must sit at ratio 0 and last at ratio 1".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ModelError::InvalidCurve(
                "knot ratios must be strictly increasing".into(),
            ));
        }
        let pieces = natural_spline(knots);
        Ok(Self {
            knots: knots.to_vec(),
            pieces,
        })
    }

    /// Curve for one of the shipped VLa classes.
    pub fn for_vla(vla: Vla) -> Self {
        let tables = KnotTables::parse(DEFAULT_KNOTS).expect("shipped knot tables parse");
        Self::from_knots(tables.get(vla)).expect("shipped knot tables are valid")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Raw spline value and derivatives, no clamping. `r` must lie in `[0, 1]`.
    fn raw(&self, r: f64) -> GlycPoint {
        let idx = match self.pieces.iter().rposition(|p| p.x0 <= r) {
            Some(i) => i,
            None => 0,
        };
        let p = &self.pieces[idx];
        GlycPoint {
            value: p.value(r),
            d1: p.slope(r),
            d2: p.curvature(r),
        }
    }

    /// Clamped evaluation used inside the dynamics. Negative ratios are treated
    /// as zero (the recurrences may visit negative velocities when unstable).
    pub fn point(&self, ratio: f64) -> GlycPoint {
        let last = self.knots[self.knots.len() - 1].1;
        if ratio >= 1.0 {
            return GlycPoint {
                value: last.clamp(0.0, 1.0),
                d1: 0.0,
                d2: 0.0,
            };
        }
        if ratio.is_nan() || ratio <= 0.0 {
            return GlycPoint {
                value: self.knots[0].1.clamp(0.0, 1.0),
                d1: 0.0,
                d2: 0.0,
            };
        }
        let raw = self.raw(ratio);
        if raw.value > 1.0 {
            GlycPoint { value: 1.0, d1: 0.0, d2: 0.0 }
        } else if raw.value < 0.0 {
            GlycPoint { value: 0.0, d1: 0.0, d2: 0.0 }
        } else {
            raw
        }
    }

    pub fn fraction(&self, ratio: f64) -> f64 {
        self.point(ratio).value
    }

    /// Left and right second derivatives of the unclamped spline at interior knot `i`.
    pub fn curvature_jump(&self, i: usize) -> (f64, f64) {
        assert!(i > 0 && i + 1 < self.knots.len(), "interior knot index");
        let x = self.knots[i].0;
        (self.pieces[i - 1].curvature(x), self.pieces[i].curvature(x))
    }

    /// Left and right first derivatives at interior knot `i`.
    pub fn slope_jump(&self, i: usize) -> (f64, f64) {
        assert!(i > 0 && i + 1 < self.knots.len(), "interior knot index");
        let x = self.knots[i].0;
        (self.pieces[i - 1].slope(x), self.pieces[i].slope(x))
    }

    /// Left-limit value at interior knot `i` from the previous piece.
    pub fn left_value(&self, i: usize) -> f64 {
        let x = self.knots[i].0;
        self.pieces[i - 1].value(x)
    }
}

/// Checked evaluation: `ratio` must be non-negative.
pub fn glyc_eval(curve: &GlycCurve, ratio: f64) -> Result<f64> {
    if ratio < 0.0 || ratio.is_nan() {
        return Err(ModelError::NegativeRatio(ratio));
    }
    Ok(curve.fraction(ratio))
}

/// Build a curve for a named class or from custom knots.
pub enum CurveSpec<'a> {
    Named(Vla),
    Custom(&'a [(f64, f64)]),
}

pub fn build_glyc_curve(spec: CurveSpec<'_>) -> Result<GlycCurve> {
    match spec {
        CurveSpec::Named(vla) => Ok(GlycCurve::for_vla(vla)),
        CurveSpec::Custom(knots) => GlycCurve::from_knots(knots),
    }
}

fn natural_spline(knots: &[(f64, f64)]) -> Vec<Piece> {
    let n = knots.len();
    let x: Vec<f64> = knots.iter().map(|k| k.0).collect();
    let y: Vec<f64> = knots.iter().map(|k| k.1).collect();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

    // second derivatives m[0] = m[n-1] = 0; tridiagonal system for the interior
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            let j = i + 1;
            diag[i] = 2.0 * (h[j - 1] + h[j]);
            upper[i] = h[j];
            rhs[i] = 6.0 * ((y[j + 1] - y[j]) / h[j] - (y[j] - y[j - 1]) / h[j - 1]);
        }
        // Thomas algorithm; the system is symmetric with sub-diagonal h[j-1]
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
        }
    }

    (0..n - 1)
        .map(|i| Piece {
            x0: x[i],
            a: y[i],
            b: (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0,
            c: m[i] / 2.0,
            d: (m[i + 1] - m[i]) / (6.0 * h[i]),
        })
        .collect()
}

/// Knot tables for the three VLa classes, as stored in the versioned data file.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotTables {
    pub version: u32,
    pub good: Vec<(f64, f64)>,
    pub average: Vec<(f64, f64)>,
    pub bad: Vec<(f64, f64)>,
}

impl KnotTables {
    pub fn get(&self, vla: Vla) -> &[(f64, f64)] {
        match vla {
            Vla::Good => &self.good,
            Vla::Average => &self.average,
            Vla::Bad => &self.bad,
        }
    }

    /// Parse the plain-text table format:
    ///
    /// ```text
    /// # comment
    /// version 1
    /// [good]
    /// 0.0 0.30
    /// ...
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut current: Option<Vla> = None;
        let mut tables: [Vec<(f64, f64)>; 3] = Default::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ModelError::Parse {
                line: lineno + 1,
                msg,
            };
            if let Some(rest) = line.strip_prefix("version") {
                version = Some(
                    rest.trim()
                        .parse::<u32>()
                        .map_err(|e| err(format!("bad version: {e}")))?,
                );
            } else if line.starts_with('[') && line.ends_with(']') {
                current = Some(line[1..line.len() - 1].parse::<Vla>().map_err(|e| err(e.to_string()))?);
            } else {
                let vla = current.ok_or_else(|| err("knot before any [section]".into()))?;
                let mut parts = line.split_whitespace();
                let mut next = |what: &str| -> Result<f64> {
                    parts
                        .next()
                        .ok_or_else(|| err(format!("missing {what}")))?
                        .parse::<f64>()
                        .map_err(|e| err(format!("bad {what}: {e}")))
                };
                let r = next("ratio")?;
                let g = next("fraction")?;
                let idx = Vla::ALL.iter().position(|v| *v == vla).unwrap();
                tables[idx].push((r, g));
            }
        }
        let version = version.ok_or(ModelError::Parse {
            line: 0,
            msg: "missing version line".into(),
        })?;
        let [good, average, bad] = tables;
        for (vla, t) in Vla::ALL.iter().zip([&good, &average, &bad]) {
            GlycCurve::from_knots(t).map_err(|e| ModelError::Parse {
                line: 0,
                msg: format!("[{vla}] {e}"),
            })?;
        }
        Ok(Self {
            version,
            good,
            average,
            bad,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(
            "# glyc allocation knots: velocity ratio V/VVO2max, glycogen work fraction\n",
        );
        out.push_str(&format!("version {}\n", self.version));
        for vla in Vla::ALL {
            out.push_str(&format!("[{vla}]\n"));
            for (r, g) in self.get(vla) {
                out.push_str(&format!("{r} {g}\n"));
            }
        }
        out
    }
}
