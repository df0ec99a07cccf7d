//! Synthetic well corpora with known inter-property laws.
//!
//! Every well carries three hidden "geology" signals on `[0, 1]`, each a
//! sequence of layers with piecewise-constant levels plus a mean-reverting
//! walk inside the layer. GR is an affine map of the first signal. NPHI,
//! RHOB and VP follow a [`Law`] in GR, in their own hidden signal and in
//! depth below the top of the log, plus Gaussian noise. Values are clamped
//! to plausible physical ranges. Wells sit on a square grid so the
//! nearest-neighbour order is known in advance.

use rand::Rng as _;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inject::{inject_gaps, GapSpec};
use crate::rng::{derive_seed, rng, Rng};
use crate::well::{CoordSystem, DepthUnit, PropertyKind, WellHeader, WellLog};

pub const NULL_VALUE: f64 = -999.25;

/// Clamping ranges in canonical property order.
pub const RANGES: [(f64, f64); 4] = [(0.0, 1.0), (0.0, 300.0), (1.0, 3.5), (40.0, 240.0)];

/// With `d = GR - gr_reference`:
/// `value = intercept + gr * GR + gr_quadratic * d^2 + gr_cubic * d^3
///          + gr_step * tanh(d / step_width) + latent * L + depth * km_below_top
///          + noise * N(0, 1)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Law {
    pub intercept: f64,
    pub gr: f64,
    pub gr_quadratic: f64,
    pub gr_cubic: f64,
    pub gr_step: f64,
    pub step_width: f64,
    pub gr_reference: f64,
    pub latent: f64,
    pub depth: f64,
    pub noise: f64,
}

impl Default for Law {
    fn default() -> Self {
        Law {
            intercept: 0.0,
            gr: 0.0,
            gr_quadratic: 0.0,
            gr_cubic: 0.0,
            gr_step: 0.0,
            step_width: 10.0,
            gr_reference: 70.0,
            latent: 0.0,
            depth: 0.0,
            noise: 0.0,
        }
    }
}

impl Law {
    pub fn is_nonlinear(&self) -> bool {
        self.gr_quadratic != 0.0 || self.gr_cubic != 0.0 || self.gr_step != 0.0
    }

    fn eval(&self, gr: f64, latent: f64, km: f64) -> f64 {
        let d = gr - self.gr_reference;
        self.intercept
            + self.gr * gr
            + self.gr_quadratic * d * d
            + self.gr_cubic * d * d * d
            + self.gr_step * (d / self.step_width).tanh()
            + self.latent * latent
            + self.depth * km
    }

    /// Scales every slope by its own factor and moves the intercept so the
    /// law still passes through its value at `gr_reference`, zero latent
    /// and zero depth.
    fn jittered(&self, factors: [f64; 4]) -> Law {
        let gr = self.gr * factors[0];
        Law {
            intercept: self.intercept + (self.gr - gr) * self.gr_reference,
            gr,
            gr_quadratic: self.gr_quadratic * factors[1],
            gr_cubic: self.gr_cubic * factors[1],
            gr_step: self.gr_step * factors[1],
            latent: self.latent * factors[2],
            depth: self.depth * factors[3],
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Laws {
    pub nphi: Law,
    pub rhob: Law,
    pub vp: Law,
}

impl Default for Laws {
    fn default() -> Self {
        Laws {
            nphi: Law { intercept: 0.1, gr: 0.0025, gr_quadratic: 8e-5, latent: 0.01, noise: 0.004, ..Law::default() },
            rhob: Law { intercept: 2.2, gr: 0.003, gr_step: 0.15, latent: 0.02, depth: 0.05, noise: 0.008, ..Law::default() },
            vp: Law { intercept: 60.0, gr: 0.5, gr_cubic: 6e-4, latent: 3.0, depth: -4.0, noise: 1.0, ..Law::default() },
        }
    }
}

impl Laws {
    pub fn get(&self, kind: PropertyKind) -> Option<&Law> {
        match kind {
            PropertyKind::Nphi => Some(&self.nphi),
            PropertyKind::Rhob => Some(&self.rhob),
            PropertyKind::Vp => Some(&self.vp),
            PropertyKind::Gr => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerSpec {
    /// Mean layer thickness in meters (exponentially distributed).
    pub mean_thickness: f64,
    /// Per-row standard deviation of the in-layer walk.
    pub walk_sd: f64,
    /// Per-row pull of the walk back towards the layer level, in `[0, 1)`.
    pub reversion: f64,
}

impl Default for LayerSpec {
    fn default() -> Self {
        LayerSpec { mean_thickness: 40.0, walk_sd: 0.01, reversion: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_wells: usize,
    /// Logged extent per well in meters (rounded down to the grid).
    pub extent: f64,
    pub step: f64,
    pub start_depth: f64,
    /// Distance between neighbouring grid nodes in meters.
    pub grid_spacing: f64,
    pub gr_range: (f64, f64),
    pub layers: LayerSpec,
    pub laws: Laws,
    /// Per-well relative jitter of every slope, factor `1 + jitter * U(-1, 1)`.
    pub jitter: f64,
    /// Real gaps blanked without ground truth.
    pub real_gaps: Option<GapSpec>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_wells: 10,
            extent: 2000.0,
            step: 0.15,
            start_depth: 1000.0,
            grid_spacing: 1000.0,
            gr_range: (20.0, 120.0),
            layers: LayerSpec::default(),
            laws: Laws::default(),
            jitter: 0.1,
            real_gaps: Some(GapSpec { mean_size: 6.0, size_stddev: 3.0, gaps_per_km: 1.0, seed: 0, aligned: false }),
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Noisy nonlinear couplings (quadratic NPHI, step-like RHOB, cubic VP)
    /// with mild per-well variation and a few real gaps.
    pub fn standard(seed: u64) -> SynthSpec {
        SynthSpec { seed, ..SynthSpec::default() }
    }

    /// Noise-free `NPHI = 0.01 * GR`; RHOB and VP follow independent hidden
    /// signals so the siblings are not collinear.
    pub fn linear_exact(seed: u64) -> SynthSpec {
        SynthSpec {
            n_wells: 4,
            gr_range: (20.0, 95.0),
            laws: Laws {
                nphi: Law { gr: 0.01, ..Law::default() },
                rhob: Law { intercept: 2.0, latent: 0.5, ..Law::default() },
                vp: Law { intercept: 60.0, latent: 100.0, ..Law::default() },
            },
            jitter: 0.0,
            real_gaps: None,
            seed,
            ..SynthSpec::default()
        }
    }

    /// Eleven wells sharing one noisy law.
    pub fn shared_law(seed: u64) -> SynthSpec {
        SynthSpec { n_wells: 11, extent: 1500.0, jitter: 0.0, real_gaps: None, seed, ..SynthSpec::default() }
    }

    /// Eleven wells whose slopes differ strongly from well to well.
    pub fn distinct_law(seed: u64) -> SynthSpec {
        SynthSpec { jitter: 0.9, ..SynthSpec::shared_law(seed) }
    }

    pub fn preset(name: &str, seed: u64) -> Result<SynthSpec> {
        match name {
            "standard" => Ok(SynthSpec::standard(seed)),
            "linear_exact" | "linear-exact" => Ok(SynthSpec::linear_exact(seed)),
            "shared_law" | "shared-law" => Ok(SynthSpec::shared_law(seed)),
            "distinct_law" | "distinct-law" => Ok(SynthSpec::distinct_law(seed)),
            _ => Err(Error::InvalidConfig(format!(
                "unknown synthetic preset {name:?} (expected standard, linear_exact, shared_law or distinct_law)"
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<SynthSpec> {
        let spec: SynthSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let laws = [self.laws.nphi, self.laws.rhob, self.laws.vp];
        let ok = self.n_wells > 0
            && self.extent > 0.0
            && self.step > 0.0
            && self.extent >= self.step
            && self.grid_spacing > 0.0
            && self.gr_range.0 < self.gr_range.1
            && self.layers.mean_thickness > 0.0
            && self.layers.walk_sd >= 0.0
            && (0.0..1.0).contains(&self.layers.reversion)
            && self.jitter >= 0.0
            && laws.iter().all(|l| l.noise >= 0.0);
        if !ok {
            return Err(Error::InvalidConfig("invalid synthetic spec".into()));
        }
        if let Some(g) = &self.real_gaps {
            g.validate()?;
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        (self.extent / self.step + 1e-9).floor() as usize + 1
    }

    pub fn grid_columns(&self) -> usize {
        (self.n_wells as f64).sqrt().ceil() as usize
    }

    pub fn well_name(index: usize) -> String {
        format!("SYN-{:03}", index + 1)
    }

    /// Grid position of well `index` in meters.
    pub fn position(&self, index: usize) -> (f64, f64) {
        let cols = self.grid_columns();
        ((index % cols) as f64 * self.grid_spacing, (index / cols) as f64 * self.grid_spacing)
    }

    /// Laws used for well `index` after jitter.
    pub fn well_laws(&self, index: usize) -> Laws {
        if self.jitter == 0.0 {
            return self.laws;
        }
        let mut r = rng(derive_seed(self.seed, &["synth-law", &index.to_string()]));
        let mut factors = || -> [f64; 4] { std::array::from_fn(|_| 1.0 + self.jitter * r.random_range(-1.0..=1.0)) };
        Laws {
            nphi: self.laws.nphi.jittered(factors()),
            rhob: self.laws.rhob.jittered(factors()),
            vp: self.laws.vp.jittered(factors()),
        }
    }
}

/// Layered walk on `[0, 1]`.
fn hidden_signal(spec: &SynthSpec, rows: usize, r: &mut Rng) -> Vec<f64> {
    let layer = spec.layers;
    let thickness = Exp::new(1.0 / layer.mean_thickness).expect("positive thickness");
    let walk = Normal::new(0.0, layer.walk_sd).expect("finite sd");
    let mut out = Vec::with_capacity(rows);
    let mut level = r.random_range(0.15..0.85);
    let mut left = 0usize;
    let mut offset = 0.0;
    for _ in 0..rows {
        if left == 0 {
            level = r.random_range(0.15..0.85);
            left = ((thickness.sample(r) / spec.step).round() as usize).max(1);
        }
        offset = (1.0 - layer.reversion) * offset + walk.sample(r);
        out.push((level + offset).clamp(0.0, 1.0));
        left -= 1;
    }
    out
}

fn clamp(kind: PropertyKind, v: f64) -> f64 {
    let (lo, hi) = RANGES[kind.index()];
    v.clamp(lo, hi)
}

pub fn generate_well(spec: &SynthSpec, index: usize) -> Result<WellLog> {
    let rows = spec.rows();
    let name = SynthSpec::well_name(index);
    let mut r = rng(derive_seed(spec.seed, &["synth-well", &index.to_string()]));
    let signals: [Vec<f64>; 4] = std::array::from_fn(|_| hidden_signal(spec, rows, &mut r));
    let laws = spec.well_laws(index);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let (gr_lo, gr_hi) = spec.gr_range;

    let mut columns: [Vec<Option<f64>>; 4] = std::array::from_fn(|_| Vec::with_capacity(rows));
    for i in 0..rows {
        let km = i as f64 * spec.step / 1000.0;
        let gr = clamp(PropertyKind::Gr, gr_lo + (gr_hi - gr_lo) * signals[0][i]);
        columns[PropertyKind::Gr.index()].push(Some(gr));
        for (kind, signal) in [(PropertyKind::Nphi, 1), (PropertyKind::Rhob, 2), (PropertyKind::Vp, 3)] {
            let law = laws.get(kind).expect("law for coupled property");
            let mut v = law.eval(gr, signals[signal][i], km);
            if law.noise > 0.0 {
                v += law.noise * unit.sample(&mut r);
            }
            columns[kind.index()].push(Some(clamp(kind, v)));
        }
    }

    let (x, y) = spec.position(index);
    let header = WellHeader {
        well_name: name.clone(),
        x: Some(x),
        y: Some(y),
        coord_system: CoordSystem::ProjectedMeters,
        start_depth: spec.start_depth,
        stop_depth: spec.start_depth + (rows - 1) as f64 * spec.step,
        step: spec.step,
        null_value: NULL_VALUE,
        depth_unit: DepthUnit::Meters,
    };
    let well = WellLog::new(header, columns, Vec::new())?;
    match &spec.real_gaps {
        Some(g) => {
            let g = GapSpec { seed: derive_seed(spec.seed, &["synth-gaps"]), ..*g };
            Ok(inject_gaps(&well, &g)?.modified_well)
        }
        None => Ok(well),
    }
}

/// All wells of the corpus, named `SYN-001`, `SYN-002`, ...
pub fn generate(spec: &SynthSpec) -> Result<Vec<WellLog>> {
    use rayon::prelude::*;
    spec.validate()?;
    (0..spec.n_wells).into_par_iter().map(|i| generate_well(spec, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaps::{filter_wells, FilterCriteria};
    use crate::models::{fit_linear, Matrix};

    fn small(spec: SynthSpec) -> SynthSpec {
        SynthSpec { extent: 300.0, ..spec }
    }

    #[test]
    fn same_seed_same_corpus() {
        let spec = small(SynthSpec::standard(5));
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(generate(&spec).unwrap(), generate(&SynthSpec { seed: 6, ..spec }).unwrap());
    }

    #[test]
    fn values_stay_in_range() {
        for spec in [SynthSpec::standard(1), SynthSpec::distinct_law(2)] {
            for w in generate(&small(spec)).unwrap() {
                for kind in PropertyKind::ALL {
                    let (lo, hi) = RANGES[kind.index()];
                    assert!(w.curve(kind).values.iter().flatten().all(|v| (lo..=hi).contains(v)));
                }
            }
        }
    }

    #[test]
    fn linear_law_is_recovered_exactly() {
        let w = generate_well(&small(SynthSpec::linear_exact(3)), 0).unwrap();
        let rows: Vec<[f64; 4]> = (0..w.rows())
            .map(|i| {
                let v = |k| w.value(k, i).unwrap();
                [v(PropertyKind::Gr), v(PropertyKind::Rhob), v(PropertyKind::Vp), w.depth(i)]
            })
            .collect();
        let y: Vec<f64> = (0..w.rows()).map(|i| w.value(PropertyKind::Nphi, i).unwrap()).collect();
        let m = fit_linear(&Matrix::from_rows(4, &rows), &y).unwrap();
        assert!((m.coefficients[0] - 0.01).abs() < 1e-9, "{:?}", m);
        let mse = rows.iter().zip(&y).map(|(r, t)| (m.intercept + m.coefficients.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() - t).powi(2)).sum::<f64>()
            / y.len() as f64;
        assert!(mse < 1e-12);
    }

    #[test]
    fn grid_positions() {
        let spec = SynthSpec { n_wells: 5, grid_spacing: 100.0, ..SynthSpec::default() };
        assert_eq!(spec.grid_columns(), 3);
        assert_eq!(spec.position(0), (0.0, 0.0));
        assert_eq!(spec.position(4), (100.0, 100.0));
    }

    #[test]
    fn standard_corpus_passes_the_default_filter() {
        let wells = generate(&SynthSpec { n_wells: 6, ..SynthSpec::standard(9) }).unwrap();
        let out = filter_wells(&wells, &FilterCriteria::default());
        assert_eq!(out.accepted.len(), 6, "{:?}", out.rejected.iter().map(|(w, r)| (w.name(), r.to_string())).collect::<Vec<_>>());
    }

    #[test]
    fn distinct_laws_differ_between_wells() {
        let spec = SynthSpec::distinct_law(1);
        assert_ne!(spec.well_laws(0), spec.well_laws(1));
        assert_eq!(SynthSpec::shared_law(1).well_laws(0), SynthSpec::shared_law(1).well_laws(5));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::standard(4);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(SynthSpec::from_json(&text).unwrap(), spec);
        assert_eq!(SynthSpec::from_json("{\"n_wells\": 3}").unwrap().n_wells, 3);
        assert!(SynthSpec::from_json("{\"step\": 0}").is_err());
        assert!(SynthSpec::preset("nope", 0).is_err());
    }
}
