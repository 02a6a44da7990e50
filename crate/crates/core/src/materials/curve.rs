use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::spectral1d::gauss_legendre;

/// Temperature-dependent scalar material property.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialCurve {
    Constant(f64),
    Tabulated(Pchip),
    CopperResistivity(BlochGruneisen),
}

impl MaterialCurve {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            MaterialCurve::Constant(v) => *v,
            MaterialCurve::Tabulated(p) => p.eval(theta),
            MaterialCurve::CopperResistivity(bg) => bg.eval(theta),
        }
    }

    /// Tabulated curves are clamped outside this interval.
    pub fn range(&self) -> (f64, f64) {
        match self {
            MaterialCurve::Tabulated(p) => (p.temps[0], *p.temps.last().unwrap()),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Monotone piecewise-cubic Hermite interpolation (Fritsch–Butland slopes with
/// the non-centred three-point end rule). Clamped to the end values outside
/// the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    temps: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(temps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = temps.len();
        if n < 2 || values.len() != n {
            return Err(Error::MaterialData(format!(
                "table needs ≥ 2 points of equal length, got {} temperatures and {} values",
                n,
                values.len()
            )));
        }
        if temps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::MaterialData("table temperatures must be strictly increasing".into()));
        }
        if values.iter().chain(&temps).any(|v| !v.is_finite()) {
            return Err(Error::MaterialData("non-finite table entry".into()));
        }
        let h: Vec<f64> = temps.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes.fill(delta[0]);
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
                    continue;
                }
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { temps, values, slopes })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.temps.len();
        if theta <= self.temps[0] {
            return self.values[0];
        }
        if theta >= self.temps[n - 1] {
            return self.values[n - 1];
        }
        let k = self.temps.partition_point(|&t| t <= theta) - 1;
        let h = self.temps[k + 1] - self.temps[k];
        let s = (theta - self.temps[k]) / h;
        let (h00, h10) = ((1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s), s * (1.0 - s) * (1.0 - s));
        let (h01, h11) = (s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        h00 * self.values[k] + h10 * h * self.slopes[k] + h01 * self.values[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Copper resistivity `ρ0 + C (T/Θ)^5 J5(Θ/T)` with `ρ0 = ρ273 / RRR` and `C`
/// chosen so that `ρ(273 K) = ρ273`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochGruneisen {
    pub rrr: f64,
    pub rho_273: f64,
    pub debye_temperature: f64,
    residual: f64,
    coefficient: f64,
}

/// Below this temperature the phonon term is frozen (it is ~1e-7 of ρ0 already).
const BG_MIN_TEMPERATURE: f64 = 0.5;
const J5_PANEL: f64 = 4.0;
const J5_CUTOFF: f64 = 64.0;

impl BlochGruneisen {
    pub fn new(rrr: f64, rho_273: f64, debye_temperature: f64) -> Result<Self> {
        if !(rrr > 1.0) || !(rho_273 > 0.0) || !(debye_temperature > 0.0) {
            return Err(Error::MaterialData("copper fit needs RRR > 1, ρ273 > 0, Θ > 0".into()));
        }
        let residual = rho_273 / rrr;
        let phonon_273 = phonon_term(273.0, debye_temperature);
        Ok(Self {
            rrr,
            rho_273,
            debye_temperature,
            residual,
            coefficient: (rho_273 - residual) / phonon_273,
        })
    }

    pub fn copper_default() -> Self {
        Self::new(100.0, 1.55e-8, 343.5).expect("valid default copper fit")
    }

    pub fn residual_resistivity(&self) -> f64 {
        self.residual
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let t = theta.max(BG_MIN_TEMPERATURE);
        self.residual + self.coefficient * phonon_term(t, self.debye_temperature)
    }
}

fn phonon_term(t: f64, debye: f64) -> f64 {
    (t / debye).powi(5) * bloch_gruneisen_j5(debye / t)
}

/// `J5(x) = ∫_0^x t^5 e^t / (e^t − 1)^2 dt` by composite Gauss–Legendre
/// quadrature; the integrand is below 1e-18 beyond the cutoff.
pub fn bloch_gruneisen_j5(x: f64) -> f64 {
    thread_local! {
        static RULE: crate::spectral1d::QuadratureRule = gauss_legendre(16).expect("16-point rule");
    }
    let upper = x.min(J5_CUTOFF);
    if !(upper > 0.0) {
        return 0.0;
    }
    let panels = (upper / J5_PANEL).ceil() as usize;
    let w = upper / panels as f64;
    RULE.with(|rule| {
        (0..panels)
            .map(|i| {
                rule.integrate_on(i as f64 * w, (i + 1) as f64 * w, |t| {
                    let em = t.exp_m1();
                    t.powi(5) * (em + 1.0) / (em * em)
                })
            })
            .sum()
    })
}

/// Named curves read from a material data file.
#[derive(Debug, Clone, Default)]
pub struct MaterialLibrary {
    curves: BTreeMap<String, (String, MaterialCurve)>,
}

impl MaterialLibrary {
    /// The shipped homogenized NbTi/Cu wire data.
    pub fn default_wire() -> Self {
        Self::parse(include_str!("../../data/wire_materials.txt")).expect("bundled material data parses")
    }

    /// Parses the text format:
    ///
    /// ```text
    /// # comment
    /// curve <name> <unit>
    ///   <T> <value>
    ///   ...
    /// end
    /// constant <name> <unit> <value>
    /// fit <name> Ohm*m bloch-gruneisen rrr=100 rho273=1.55e-8 theta=343.5
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut lib = Self::default();
        let mut open: Option<(String, String, Vec<f64>, Vec<f64>, usize)> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| Error::MaterialData(format!("line {lineno}: {msg}"));
            if let Some((name, unit, temps, values, start)) = open.take() {
                if tok == ["end"] {
                    let curve = Pchip::new(temps, values)
                        .map_err(|e| Error::MaterialData(format!("curve '{name}' (line {start}): {e}")))?;
                    lib.insert(&name, &unit, MaterialCurve::Tabulated(curve))?;
                    continue;
                }
                let [t, v] = tok[..] else {
                    return Err(err("expected '<temperature> <value>' or 'end'"));
                };
                let (mut temps, mut values) = (temps, values);
                temps.push(t.parse().map_err(|_| err("bad temperature"))?);
                values.push(v.parse().map_err(|_| err("bad value"))?);
                open = Some((name, unit, temps, values, start));
                continue;
            }
            match tok[..] {
                ["curve", name, unit] => open = Some((name.into(), unit.into(), vec![], vec![], lineno)),
                ["constant", name, unit, value] => {
                    let v: f64 = value.parse().map_err(|_| err("bad constant value"))?;
                    lib.insert(name, unit, MaterialCurve::Constant(v))?;
                }
                ["fit", name, unit, "bloch-gruneisen", ref params @ ..] => {
                    let (mut rrr, mut rho, mut theta) = (100.0, 1.55e-8, 343.5);
                    for p in params {
                        let (k, v) = p.split_once('=').ok_or_else(|| err("expected key=value"))?;
                        let v: f64 = v.parse().map_err(|_| err("bad fit parameter"))?;
                        match k {
                            "rrr" => rrr = v,
                            "rho273" => rho = v,
                            "theta" => theta = v,
                            _ => return Err(err(&format!("unknown fit parameter '{k}'"))),
                        }
                    }
                    let fit = BlochGruneisen::new(rrr, rho, theta)?;
                    lib.insert(name, unit, MaterialCurve::CopperResistivity(fit))?;
                }
                _ => return Err(err(&format!("unrecognised directive '{line}'"))),
            }
        }
        if let Some((name, ..)) = open {
            return Err(Error::MaterialData(format!("curve '{name}' is missing 'end'")));
        }
        Ok(lib)
    }

    fn insert(&mut self, name: &str, unit: &str, curve: MaterialCurve) -> Result<()> {
        if self.curves.insert(name.to_string(), (unit.to_string(), curve)).is_some() {
            return Err(Error::MaterialData(format!("curve '{name}' defined twice")));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&MaterialCurve> {
        self.curves
            .get(name)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::MaterialData(format!("missing curve '{name}'")))
    }

    pub fn unit(&self, name: &str) -> Option<&str> {
        self.curves.get(name).map(|(u, _)| u.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.curves.keys().map(String::as_str)
    }
}
