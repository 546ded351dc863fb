use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperature-dependent thermal diffusivity `d(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diffusivity {
    Constant { value: f64 },
    /// `coeff·(scale·s + offset)^exponent`, defined where the base is positive.
    PowerLaw {
        coeff: f64,
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Monotone cubic (PCHIP) interpolation of `(s, d)` pairs; never
    /// extrapolated.
    Tabulated(Table),
}

fn one() -> f64 {
    1.0
}

impl Diffusivity {
    pub fn constant(value: f64) -> Self {
        Diffusivity::Constant { value }
    }

    pub fn power_law(coeff: f64, exponent: f64) -> Self {
        Diffusivity::PowerLaw {
            coeff,
            exponent,
            scale: 1.0,
            offset: 0.0,
        }
    }

    /// `d(s) = 1/s`.
    pub fn inverse() -> Self {
        Self::power_law(1.0, -1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("diffusivity {name} must be finite, got {v}")))
            }
        };
        match self {
            Diffusivity::Constant { value } => {
                finite("value", *value)?;
                if *value <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "constant diffusivity must be positive, got {value}"
                    )));
                }
            }
            Diffusivity::PowerLaw {
                coeff,
                exponent,
                scale,
                offset,
            } => {
                finite("coeff", *coeff)?;
                finite("exponent", *exponent)?;
                finite("scale", *scale)?;
                finite("offset", *offset)?;
                if *coeff <= 0.0 || *scale == 0.0 {
                    return Err(Error::InvalidParameter(
                        "power-law diffusivity needs coeff > 0 and scale != 0".into(),
                    ));
                }
            }
            Diffusivity::Tabulated(t) => t.validate()?,
        }
        Ok(())
    }

    /// `d(s)` and `d'(s)`.
    pub fn eval_with_derivative(&self, s: f64) -> Result<(f64, f64)> {
        let (d, dd) = match self {
            Diffusivity::Constant { value } => (*value, 0.0),
            Diffusivity::PowerLaw {
                coeff,
                exponent,
                scale,
                offset,
            } => {
                let base = scale * s + offset;
                if !(base > 0.0) {
                    return Err(Error::Domain(format!(
                        "power-law diffusivity base {base} is not positive at s = {s}"
                    )));
                }
                let d = coeff * base.powf(*exponent);
                (d, d * exponent * scale / base)
            }
            Diffusivity::Tabulated(t) => t.eval(s)?,
        };
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Domain(format!("diffusivity {d} is not positive at s = {s}")));
        }
        Ok((d, dd))
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(self.eval_with_derivative(s)?.0)
    }

    /// The diffusivity `d̃(s̃) = factor·d((s̃ − shift)/stretch)` seen after the
    /// temperature map `s̃ = stretch·s + shift`.
    pub fn transformed(&self, factor: f64, stretch: f64, shift: f64) -> Result<Self> {
        if !(factor > 0.0 && stretch != 0.0 && factor.is_finite() && stretch.is_finite() && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diffusivity transform needs factor > 0 and stretch != 0, got ({factor}, {stretch})"
            )));
        }
        Ok(match self {
            Diffusivity::Constant { value } => Diffusivity::Constant {
                value: factor * value,
            },
            Diffusivity::PowerLaw {
                coeff,
                exponent,
                scale,
                offset,
            } => Diffusivity::PowerLaw {
                coeff: factor * coeff,
                exponent: *exponent,
                scale: scale / stretch,
                offset: offset - scale * shift / stretch,
            },
            Diffusivity::Tabulated(t) => {
                let mut pts: Vec<(f64, f64)> = t
                    .s
                    .iter()
                    .zip(&t.d)
                    .map(|(&s, &d)| (stretch * s + shift, factor * d))
                    .collect();
                if stretch < 0.0 {
                    pts.reverse();
                }
                Diffusivity::Tabulated(Table::new(pts)?)
            }
        })
    }
}

/// Sorted table with PCHIP node slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TablePoints", into = "TablePoints")]
pub struct Table {
    s: Vec<f64>,
    d: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TablePoints {
    points: Vec<(f64, f64)>,
}

impl TryFrom<TablePoints> for Table {
    type Error = Error;
    fn try_from(t: TablePoints) -> Result<Self> {
        Table::new(t.points)
    }
}

impl From<Table> for TablePoints {
    fn from(t: Table) -> Self {
        TablePoints {
            points: t.points(),
        }
    }
}

impl Table {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("diffusivity table needs at least two points".into()));
        }
        let (s, d): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let table = Table {
            slopes: pchip_slopes(&s, &d),
            s,
            d,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.s.iter().copied().zip(self.d.iter().copied()).collect()
    }

    /// Interval on which the table is defined.
    pub fn range(&self) -> (f64, f64) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    fn validate(&self) -> Result<()> {
        if self.s.iter().chain(&self.d).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("diffusivity table has non-finite entries".into()));
        }
        if self.s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "diffusivity table abscissae must be strictly increasing".into(),
            ));
        }
        if self.d.iter().any(|&d| d <= 0.0) {
            return Err(Error::InvalidParameter("tabulated diffusivity must be positive".into()));
        }
        Ok(())
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain(format!(
                "s = {x} is outside the diffusivity table [{lo}, {hi}]"
            )));
        }
        let k = match self.s.partition_point(|&v| v <= x) {
            0 => 0,
            n => (n - 1).min(self.s.len() - 2),
        };
        let h = self.s[k + 1] - self.s[k];
        let t = (x - self.s[k]) / h;
        let (y0, y1) = (self.d[k], self.d[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        Ok((value, deriv))
    }
}

// Fritsch–Butland weighted harmonic means with the shape-preserving
// three-point end conditions.
fn pchip_slopes(s: &[f64], d: &[f64]) -> Vec<f64> {
    let n = s.len();
    let h: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (d[k + 1] - d[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if m * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            m
        }
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_power_law() {
        let d = Diffusivity::inverse();
        let (v, dv) = d.eval_with_derivative(4.0).unwrap();
        assert!((v - 0.25).abs() < 1e-16 && (dv + 1.0 / 16.0).abs() < 1e-16);
        assert!(matches!(d.eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn table_reproduces_constant() {
        let t = Diffusivity::Tabulated(Table::new(vec![(0.0, 1.0), (1.0, 1.0), (2.5, 1.0), (4.0, 1.0)]).unwrap());
        for &s in &[0.0, 0.3, 1.0, 2.2, 4.0] {
            let (v, dv) = t.eval_with_derivative(s).unwrap();
            assert_eq!(v, 1.0);
            assert_eq!(dv, 0.0);
        }
    }

    #[test]
    fn table_does_not_extrapolate() {
        let t = Table::new(vec![(1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert!(t.eval(0.999).is_err());
        assert!(t.eval(2.001).is_err());
        assert!(Table::new(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(Table::new(vec![(1.0, 1.0), (2.0, -2.0)]).is_err());
    }

    #[test]
    fn table_hits_nodes_and_is_monotone() {
        let pts = vec![(0.0, 1.0), (0.5, 1.1), (1.0, 3.0), (3.0, 3.2), (4.0, 8.0)];
        let t = Table::new(pts.clone()).unwrap();
        for &(s, d) in &pts {
            assert!((t.eval(s).unwrap().0 - d).abs() < 1e-15);
        }
        let mut prev = 0.0;
        for k in 0..=400 {
            let v = t.eval(4.0 * k as f64 / 400.0).unwrap().0;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn table_derivative_matches_differences() {
        let t = Table::new(vec![(0.0, 1.0), (1.0, 2.0), (2.0, 2.5), (3.5, 5.0)]).unwrap();
        let h = 1e-6;
        for &s in &[0.4, 1.3, 2.9] {
            let fd = (t.eval(s + h).unwrap().0 - t.eval(s - h).unwrap().0) / (2.0 * h);
            assert!((fd - t.eval(s).unwrap().1).abs() < 1e-8);
        }
    }

    #[test]
    fn serde_round_trip() {
        let cases = [
            Diffusivity::constant(2.0),
            Diffusivity::inverse(),
            Diffusivity::Tabulated(Table::new(vec![(0.0, 1.0), (2.0, 4.0)]).unwrap()),
        ];
        for d in cases {
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(serde_json::from_str::<Diffusivity>(&json).unwrap(), d);
        }
        let bad = r#"{"kind":"tabulated","points":[[1.0,1.0],[0.5,2.0]]}"#;
        assert!(serde_json::from_str::<Diffusivity>(bad).is_err());
    }

    proptest! {
        #[test]
        fn transform_is_pointwise(
            factor in 0.1f64..10.0,
            stretch in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
            shift in -2.0f64..2.0,
            s in 1.0f64..3.0,
        ) {
            let base = [
                Diffusivity::constant(1.7),
                Diffusivity::PowerLaw { coeff: 0.8, exponent: -1.3, scale: 1.0, offset: 0.5 },
                Diffusivity::Tabulated(Table::new(vec![(0.5, 1.0), (1.5, 1.4), (2.2, 2.0), (3.5, 2.1)]).unwrap()),
            ];
            for d in &base {
                let t = d.transformed(factor, stretch, shift).unwrap();
                let (a, da) = t.eval_with_derivative(stretch * s + shift).unwrap();
                let (b, db) = d.eval_with_derivative(s).unwrap();
                prop_assert!((a - factor * b).abs() <= 1e-12 * a);
                prop_assert!((da - factor * db / stretch).abs() <= 1e-9 * (1.0 + da.abs()));
            }
        }
    }
}
