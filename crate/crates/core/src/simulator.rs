//! Radially symmetric finite-difference solver for
//! `u_tt - a(t) Δu + b(t) u_t = f(t, r) |u|^p`.
//!
//! Leapfrog in time, centered differences in `r`, the damping averaged
//! between the old and new levels. Results are numerical evidence only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxcalc::{AuxOptions, AuxTable};
use crate::coeffs::ProblemSpec;
use crate::error::{Error, Result};
use crate::functional::{data_functional, sphere_area, RadialSamples};
use crate::quad::CompositeRule;

pub const DEFAULT_THRESHOLD: f64 = 1e6;
pub const DEFAULT_CFL: f64 = 0.5;
pub const EVIDENCE_LABEL: &str = "numerical evidence";

// data below this magnitude counts as outside the support
const SUPPORT_TOL: f64 = 1e-14;
// the front may not come closer to r_max than this many cells
const BOUNDARY_CELLS: usize = 5;
const FRONT_TOL: f64 = 1e-10;
const CELLS_PER_WIDTH: f64 = 16.0;

/// `amplitude * exp(-(r / width)^2)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub amplitude: f64,
    #[serde(default = "unit_width")]
    pub width: f64,
}

fn unit_width() -> f64 {
    1.0
}

impl Default for Gaussian {
    fn default() -> Self {
        Gaussian { amplitude: 0.0, width: 1.0 }
    }
}

impl Gaussian {
    pub fn new(amplitude: f64, width: f64) -> Self {
        Gaussian { amplitude, width }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.amplitude == 0.0 {
            0.0
        } else {
            let s = r / self.width;
            self.amplitude * (-s * s).exp()
        }
    }

    /// Radius beyond which `|eval| < 1e-14`.
    pub fn support_radius(&self) -> f64 {
        let a = self.amplitude.abs();
        if a <= SUPPORT_TOL {
            0.0
        } else {
            self.width * (a / SUPPORT_TOL).ln().sqrt()
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} amplitude must be finite")));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} width must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(default)]
    pub u0: Gaussian,
    #[serde(default)]
    pub u1: Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub problem: ProblemSpec,
    /// outer radius; chosen from the light cone when absent
    #[serde(default)]
    pub r_max: Option<f64>,
    /// radial cells; 16 per data width when absent
    #[serde(default)]
    pub cells: Option<usize>,
    /// time step; `cfl * dr / sup sqrt(a)` when absent
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_max: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    /// switches the `f |u|^p` term on or off
    #[serde(default = "yes")]
    pub nonlinear: bool,
    pub data: InitialData,
    /// keep every k-th step in the trace
    #[serde(default = "default_record")]
    pub record_every: usize,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn yes() -> bool {
    true
}

fn default_record() -> usize {
    10
}

impl SimSpec {
    pub fn new(problem: ProblemSpec, data: InitialData, t_max: f64) -> Self {
        SimSpec {
            problem,
            r_max: None,
            cells: None,
            dt: None,
            cfl: DEFAULT_CFL,
            t_max,
            blowup_threshold: DEFAULT_THRESHOLD,
            nonlinear: true,
            data,
            record_every: default_record(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SimSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.data.u0.validate("u0")?;
        self.data.u1.validate("u1")?;
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be positive and finite");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl factor must lie in (0, 1]");
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if matches!(self.cells, Some(c) if c <= 2 * BOUNDARY_CELLS) {
            return bad("cells must exceed 10");
        }
        if matches!(self.r_max, Some(r) if !(r > 0.0 && r.is_finite())) {
            return bad("r_max must be positive");
        }
        if matches!(self.dt, Some(d) if !(d > 0.0 && d.is_finite())) {
            return bad("dt must be positive");
        }
        if self.problem.delta < 0.0 && self.nonlinear {
            return Err(Error::Singular(format!(
                "the radial grid contains the origin, where |x|^{} is singular",
                self.problem.delta
            )));
        }
        Ok(())
    }

    fn min_width(&self) -> f64 {
        let mut w = f64::INFINITY;
        for g in [self.data.u0, self.data.u1] {
            if g.amplitude != 0.0 {
                w = w.min(g.width);
            }
        }
        if w.is_finite() {
            w
        } else {
            1.0
        }
    }
}

/// Resolved discretisation of a [`SimSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub r_max: f64,
    pub cells: usize,
    pub dr: f64,
    pub dt: f64,
    pub steps: usize,
    /// `sup sqrt(a)` over `[0, t_max]`
    pub max_speed: f64,
    /// `∫_0^{t_max} sqrt(a)`
    pub cone: f64,
    pub support: f64,
}

fn speed_profile(problem: &ProblemSpec, aux: &AuxTable, t_max: f64) -> Result<(f64, f64)> {
    // a is monotone in B(t), so the sup sits at an end point
    let max_speed = problem.a(0.0, aux)?.max(problem.a(t_max, aux)?).sqrt();
    if problem.alpha == 0.0 {
        return Ok((max_speed, max_speed * t_max));
    }
    let rule = CompositeRule::new(0.0, t_max, 64, 8);
    let mut cone = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        cone += w * problem.a(t, aux)?.sqrt();
    }
    Ok((max_speed, cone))
}

pub fn resolve_mesh(spec: &SimSpec, aux: &AuxTable) -> Result<Mesh> {
    spec.validate()?;
    let (max_speed, cone) = speed_profile(&spec.problem, aux, spec.t_max)?;
    let support = spec.data.u0.support_radius().max(spec.data.u1.support_radius());
    let reach = support + cone;
    let margin = (BOUNDARY_CELLS + 3) as f64;
    let (r_max, cells) = match (spec.r_max, spec.cells) {
        (Some(r), Some(c)) => (r, c),
        (Some(r), None) => (r, (r * CELLS_PER_WIDTH / spec.min_width()).ceil() as usize),
        (None, Some(c)) => {
            if c as f64 <= margin {
                return Err(Error::InvalidParameter(format!("cells must exceed {margin}")));
            }
            (reach / (1.0 - margin / c as f64), c)
        }
        (None, None) => {
            let dr = spec.min_width() / CELLS_PER_WIDTH;
            let c = ((reach / dr).ceil() + margin) as usize;
            (c as f64 * dr, c)
        }
    };
    let dr = r_max / cells as f64;
    let needed = reach + BOUNDARY_CELLS as f64 * dr;
    if r_max < needed {
        return Err(Error::InvalidParameter(format!(
            "r_max = {r_max} is inside the region reached by the data: the support radius {support:.4} \
             plus the light cone {cone:.4} plus {BOUNDARY_CELLS} cells needs r_max >= {needed:.4}"
        )));
    }
    let limit = spec.cfl * dr / max_speed;
    let requested = spec.dt.unwrap_or(limit);
    if requested > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt: requested, limit });
    }
    let steps = (spec.t_max / requested).ceil().max(1.0) as usize;
    Ok(Mesh {
        r_max,
        cells,
        dr,
        dt: spec.t_max / steps as f64,
        steps,
        max_speed,
        cone,
        support,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SimVerdict {
    Blowup { t_star: f64 },
    Survived { t_max: f64 },
    BoundaryContaminated { t: f64 },
}

impl SimVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            SimVerdict::Blowup { .. } => "blowup",
            SimVerdict::Survived { .. } => "survived",
            SimVerdict::BoundaryContaminated { .. } => "boundary_contaminated",
        }
    }

    pub fn t_star(&self) -> Option<f64> {
        match *self {
            SimVerdict::Blowup { t_star } => Some(t_star),
            _ => None,
        }
    }

    /// Time at which the run ended.
    pub fn time(&self) -> f64 {
        match *self {
            SimVerdict::Blowup { t_star } => t_star,
            SimVerdict::Survived { t_max } => t_max,
            SimVerdict::BoundaryContaminated { t } => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub sup_norm: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub verdict: SimVerdict,
    /// the solution stopped being finite before reaching the threshold
    pub hard_overflow: bool,
    pub label: String,
    pub peak_sup: f64,
    pub mesh: Mesh,
    pub trace: Vec<TraceRow>,
}

/// First time at which the sampled sup-norm reaches `threshold`, linearly
/// interpolated between samples.
pub fn detect_blowup(trace: &[TraceRow], threshold: f64) -> Result<Option<f64>> {
    let first = trace
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty trace".into()))?;
    if first.sup_norm >= threshold {
        return Ok(Some(first.t));
    }
    Ok(trace.windows(2).find_map(|w| {
        (w[1].sup_norm >= threshold).then(|| crossing(w[0].t, w[0].sup_norm, w[1].t, w[1].sup_norm, threshold))
    }))
}

// root of the linear interpolant between (t0, s0) and (t1, s1)
fn crossing(t0: f64, s0: f64, t1: f64, s1: f64, threshold: f64) -> f64 {
    if !s1.is_finite() || s1 <= s0 {
        return t1;
    }
    (t0 + (threshold - s0) / (s1 - s0) * (t1 - t0)).clamp(t0, t1)
}

struct Solver<'a> {
    problem: &'a ProblemSpec,
    aux: &'a AuxTable,
    mesh: Mesh,
    nonlinear: bool,
    threshold: f64,
    record_every: usize,
    // r_j^delta
    radial_weight: Vec<f64>,
    // (n-1) / (2 r_j dr)
    drift: Vec<f64>,
}

struct Evolution {
    outcome: SimOutcome,
    u: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a ProblemSpec, aux: &'a AuxTable, mesh: Mesh, nonlinear: bool) -> Self {
        let n = problem.n as f64;
        let dr = mesh.dr;
        let radial_weight = (0..=mesh.cells)
            .map(|j| {
                let r = j as f64 * dr;
                if problem.delta == 0.0 {
                    1.0
                } else if j == 0 {
                    0.0
                } else {
                    r.powf(problem.delta)
                }
            })
            .collect();
        let drift = (0..=mesh.cells)
            .map(|j| if j == 0 { 0.0 } else { (n - 1.0) / (2.0 * j as f64 * dr * dr) })
            .collect();
        Solver {
            problem,
            aux,
            mesh,
            nonlinear,
            threshold: DEFAULT_THRESHOLD,
            record_every: 1,
            radial_weight,
            drift,
        }
    }

    fn radius(&self, j: usize) -> f64 {
        j as f64 * self.mesh.dr
    }

    /// `Δu` at cell `j < cells`.
    fn laplacian(&self, u: &[f64], j: usize) -> f64 {
        let inv = 1.0 / (self.mesh.dr * self.mesh.dr);
        if j == 0 {
            2.0 * self.problem.n as f64 * (u[1] - u[0]) * inv
        } else {
            (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv + self.drift[j] * (u[j + 1] - u[j - 1])
        }
    }

    /// `a Δu + f |u|^p + source` on the interior cells.
    fn forcing(&self, t: f64, u: &[f64], source: &dyn Fn(f64, f64) -> f64, out: &mut [f64]) -> Result<()> {
        let a = self.problem.a(t, self.aux)?;
        let weight = if self.nonlinear { self.problem.f(t, 1.0, self.aux)? } else { 0.0 };
        let p = self.problem.p;
        for j in 0..self.mesh.cells {
            let mut v = a * self.laplacian(u, j) + source(t, self.radius(j));
            if weight != 0.0 {
                v += weight * self.radial_weight[j] * u[j].abs().powf(p);
            }
            out[j] = v;
        }
        out[self.mesh.cells] = 0.0;
        Ok(())
    }

    /// Discrete `½ ∫ (u_t² + a u_r²) dx` with `u_t` given on the cells.
    fn energy(&self, t: f64, u: &[f64], ut: &[f64]) -> Result<f64> {
        let a = self.problem.a(t, self.aux)?;
        let dr = self.mesh.dr;
        let n = self.problem.n as i32;
        let mut total = 0.0;
        for j in 0..self.mesh.cells {
            let rm = (j as f64 + 0.5) * dr;
            let v = 0.5 * (ut[j] + ut[j + 1]);
            let ur = (u[j + 1] - u[j]) / dr;
            total += rm.powi(n - 1) * (v * v + a * ur * ur);
        }
        Ok(0.5 * sphere_area(self.problem.n) * dr * total)
    }

    fn energy_between(&self, t: f64, prev: &[f64], cur: &[f64]) -> Result<f64> {
        let dt = self.mesh.dt;
        let ut: Vec<f64> = cur.iter().zip(prev).map(|(c, p)| (c - p) / dt).collect();
        self.energy(t, cur, &ut)
    }

    fn evolve(&self, u0: &[f64], u1: &[f64], source: &dyn Fn(f64, f64) -> f64) -> Result<Evolution> {
        let m = self.mesh;
        let cells = m.cells;
        let dt = m.dt;
        let model = self.aux.model();
        let mut prev = u0.to_vec();
        prev[cells] = 0.0;
        let mut rhs = vec![0.0; cells + 1];
        let sup = |u: &[f64]| u.iter().fold(0.0f64, |s, &x| if x.is_nan() { f64::NAN } else { s.max(x.abs()) });

        let mut trace = Vec::new();
        let mut peak = sup(&prev);
        trace.push(TraceRow { t: 0.0, sup_norm: peak, energy: self.energy(0.0, &prev, u1)? });
        let finish = |verdict, hard_overflow, peak, trace, u| {
            Ok(Evolution {
                outcome: SimOutcome {
                    verdict,
                    hard_overflow,
                    label: EVIDENCE_LABEL.into(),
                    peak_sup: peak,
                    mesh: m,
                    trace,
                },
                u,
            })
        };
        if peak >= self.threshold {
            return finish(SimVerdict::Blowup { t_star: 0.0 }, false, peak, trace, prev);
        }

        // Taylor start: u(dt) = u0 + dt u1 + dt²/2 u_tt(0)
        self.forcing(0.0, &prev, source, &mut rhs)?;
        let b0 = model.b(0.0);
        let mut cur: Vec<f64> = (0..=cells)
            .map(|j| {
                if j == cells {
                    0.0
                } else {
                    prev[j] + dt * u1[j] + 0.5 * dt * dt * (rhs[j] - b0 * u1[j])
                }
            })
            .collect();

        let boundary_zone = cells - BOUNDARY_CELLS;
        let mut last_sup = peak;
        for k in 1..=m.steps {
            let t = k as f64 * dt;
            let s = sup(&cur);
            if !s.is_finite() {
                // last finite level was k - 1
                let t_last = (k - 1) as f64 * dt;
                return finish(SimVerdict::Blowup { t_star: t_last }, true, peak, trace, prev);
            }
            peak = peak.max(s);
            let record = k % self.record_every == 0 || k == m.steps || s >= self.threshold;
            if record {
                trace.push(TraceRow { t, sup_norm: s, energy: self.energy_between(t, &prev, &cur)? });
            }
            if s >= self.threshold {
                let t_star = crossing(t - dt, last_sup, t, s, self.threshold);
                return finish(SimVerdict::Blowup { t_star }, false, peak, trace, cur);
            }
            let edge = cur[boundary_zone..cells].iter().fold(0.0f64, |e, &x| e.max(x.abs()));
            if peak > 0.0 && edge > FRONT_TOL * peak {
                if !record {
                    trace.push(TraceRow { t, sup_norm: s, energy: self.energy_between(t, &prev, &cur)? });
                }
                return finish(SimVerdict::BoundaryContaminated { t }, false, peak, trace, cur);
            }
            last_sup = s;
            if k == m.steps {
                break;
            }

            // (1 + b dt/2) u⁺ = 2u - (1 - b dt/2) u⁻ + dt² (aΔu + f|u|^p + source)
            self.forcing(t, &cur, source, &mut rhs)?;
            let half = 0.5 * model.b(t) * dt;
            let scale = 1.0 / (1.0 + half);
            for j in 0..cells {
                prev[j] = (2.0 * cur[j] - (1.0 - half) * prev[j] + dt * dt * rhs[j]) * scale;
            }
            prev[cells] = 0.0;
            std::mem::swap(&mut prev, &mut cur);
        }
        finish(SimVerdict::Survived { t_max: m.steps as f64 * dt }, false, peak, trace, cur)
    }
}

fn aux_for(problem: &ProblemSpec, t_max: f64) -> Result<AuxTable> {
    AuxTable::build(problem.damping, t_max.max(1.0), AuxOptions::default())
}

fn sample(g: &Gaussian, mesh: &Mesh) -> Vec<f64> {
    (0..=mesh.cells).map(|j| g.eval(j as f64 * mesh.dr)).collect()
}

/// Integrates the Cauchy problem with Gaussian data.
pub fn run(spec: &SimSpec) -> Result<SimOutcome> {
    let aux = aux_for(&spec.problem, spec.t_max)?;
    run_with_table(spec, &aux)
}

pub fn run_with_table(spec: &SimSpec, aux: &AuxTable) -> Result<SimOutcome> {
    let mesh = resolve_mesh(spec, aux)?;
    let mut solver = Solver::new(&spec.problem, aux, mesh, spec.nonlinear);
    solver.threshold = spec.blowup_threshold;
    solver.record_every = spec.record_every;
    let u0 = sample(&spec.data.u0, &mesh);
    let u1 = sample(&spec.data.u1, &mesh);
    Ok(solver.evolve(&u0, &u1, &|_, _| 0.0)?.outcome)
}

/// Final-time solution values at `r_j = j dr`, for pointwise checks.
pub fn final_profile(spec: &SimSpec) -> Result<(Mesh, Vec<f64>)> {
    let aux = aux_for(&spec.problem, spec.t_max)?;
    let mesh = resolve_mesh(spec, &aux)?;
    let mut solver = Solver::new(&spec.problem, &aux, mesh, spec.nonlinear);
    solver.threshold = spec.blowup_threshold;
    let u0 = sample(&spec.data.u0, &mesh);
    let u1 = sample(&spec.data.u1, &mesh);
    Ok((mesh, solver.evolve(&u0, &u1, &|_, _| 0.0)?.u))
}

/// `∫ (u1 + b̂₁ u0) dx` for the Gaussian data, on the simulation mesh.
pub fn data_mass(spec: &SimSpec, aux: &AuxTable) -> Result<f64> {
    let mesh = resolve_mesh(spec, aux)?;
    let samples = RadialSamples {
        n: spec.problem.n,
        dr: mesh.dr,
        u0: sample(&spec.data.u0, &mesh),
        u1: sample(&spec.data.u1, &mesh),
    };
    data_functional(&samples, aux.bhat1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub verdict: SimVerdict,
    pub hard_overflow: bool,
}

impl SweepRow {
    pub fn t_star(&self) -> Option<f64> {
        self.verdict.t_star()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub data_mass: f64,
    /// set when the data mass is not positive
    pub warning: Option<String>,
}

/// Runs [`run`] for every `p` in `p_list` with otherwise identical input.
pub fn sweep_p(spec: &SimSpec, p_list: &[f64]) -> Result<SweepReport> {
    if p_list.is_empty() {
        return Err(Error::InvalidParameter("p list is empty".into()));
    }
    let aux = aux_for(&spec.problem, spec.t_max)?;
    let mass = data_mass(spec, &aux)?;
    let warning = (mass <= 0.0).then(|| {
        let msg = format!(
            "data mass ∫(u1 + b̂₁ u0) dx = {mass:e} is not positive; the sign condition on the data fails"
        );
        log::warn!("{msg}");
        msg
    });
    let rows = p_list
        .par_iter()
        .map(|&p| {
            let mut s = *spec;
            s.problem.p = p;
            let out = run_with_table(&s, &aux)?;
            Ok(SweepRow { p, verdict: out.verdict, hard_overflow: out.hard_overflow })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows, data_mass: mass, warning })
}

/// Exact solutions used to verify the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimManufactured {
    /// `u ≡ 0` with no source
    Zero,
    /// `u = e^{-t} e^{-r²}` with the matching source
    DecayingGaussian,
}

impl SimManufactured {
    fn exact(&self, t: f64, r: f64) -> f64 {
        match self {
            SimManufactured::Zero => 0.0,
            SimManufactured::DecayingGaussian => (-t - r * r).exp(),
        }
    }

    fn velocity(&self, t: f64, r: f64) -> f64 {
        -self.exact(t, r)
    }

    /// `u_tt - a Δu + b u_t` of the exact solution.
    fn source(&self, problem: &ProblemSpec, aux: &AuxTable, t: f64, r: f64) -> Result<f64> {
        match self {
            SimManufactured::Zero => Ok(0.0),
            SimManufactured::DecayingGaussian => {
                let n = problem.n as f64;
                let a = problem.a(t, aux)?;
                let b = aux.model().b(t);
                Ok(self.exact(t, r) * (1.0 - a * (4.0 * r * r - 2.0 * n) - b))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub problem: ProblemSpec,
    pub r_max: f64,
    pub base_cells: usize,
    pub t_final: f64,
    pub cfl: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            problem: ProblemSpec::unit(1, 2.0),
            r_max: 8.0,
            base_cells: 64,
            t_final: 1.0,
            cfl: DEFAULT_CFL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cells: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log2` of successive error ratios
    pub orders: Vec<f64>,
    /// order between the two finest meshes
    pub observed: f64,
}

/// Final-time values of the linear scheme for `case` together with the
/// exact solution at the same nodes.
fn manufactured_run(
    case: SimManufactured,
    opts: &ConvergenceOptions,
    cells: usize,
    steps: Option<usize>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let problem = &opts.problem;
    problem.validate()?;
    let aux = aux_for(problem, opts.t_final)?;
    let dr = opts.r_max / cells as f64;
    let (max_speed, _) = speed_profile(problem, &aux, opts.t_final)?;
    let limit = opts.cfl * dr / max_speed;
    let steps = steps.unwrap_or_else(|| (opts.t_final / limit).ceil() as usize).max(1);
    let dt = opts.t_final / steps as f64;
    if dt > dr / max_speed {
        return Err(Error::Cfl { dt, limit: dr / max_speed });
    }
    let mesh = Mesh {
        r_max: opts.r_max,
        cells,
        dr,
        dt,
        steps,
        max_speed,
        cone: max_speed * opts.t_final,
        support: 0.0,
    };
    let mut solver = Solver::new(problem, &aux, mesh, false);
    solver.threshold = f64::INFINITY;
    let u0: Vec<f64> = (0..=cells).map(|j| case.exact(0.0, j as f64 * dr)).collect();
    let u1: Vec<f64> = (0..=cells).map(|j| case.velocity(0.0, j as f64 * dr)).collect();
    let failure = std::cell::RefCell::new(None);
    let source = |t: f64, r: f64| {
        case.source(problem, &aux, t, r).unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            0.0
        })
    };
    let evo = solver.evolve(&u0, &u1, &source)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let t = steps as f64 * dt;
    let exact = (0..=cells).map(|j| case.exact(t, j as f64 * dr)).collect();
    Ok((evo.u, exact))
}

/// Radial L² norm of `u - v` on a uniform mesh of spacing `dr`.
fn radial_l2(n: usize, dr: f64, u: &[f64], v: &[f64]) -> f64 {
    let last = u.len() - 1;
    let mut total = 0.0;
    for (j, (a, b)) in u.iter().zip(v).enumerate() {
        let r = j as f64 * dr;
        let w = if j == 0 || j == last { 0.5 } else { 1.0 };
        total += w * r.powi(n as i32 - 1) * (a - b) * (a - b);
    }
    (sphere_area(n) * dr * total).sqrt()
}

/// Errors at `J`, `2J`, `4J` cells with the time step tied to the mesh.
pub fn convergence_test(case: SimManufactured, opts: &ConvergenceOptions) -> Result<ConvergenceReport> {
    let cells: Vec<usize> = (0..3).map(|k| opts.base_cells << k).collect();
    let n = opts.problem.n;
    let errors = cells
        .par_iter()
        .map(|&c| {
            let (u, exact) = manufactured_run(case, opts, c, None)?;
            Ok(radial_l2(n, opts.r_max / c as f64, &u, &exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let observed = orders[1];
    Ok(ConvergenceReport { cells, errors, orders, observed })
}

/// Richardson ratio `|u_k - u_2k| / |u_2k - u_4k|` of the final-time
/// solutions for `k`, `2k`, `4k` time steps on one mesh of `cells` cells.
/// Isolates the temporal error, which the explicit stability limit keeps
/// below the spatial one at every admissible step.
pub fn time_refinement_ratio(
    case: SimManufactured,
    opts: &ConvergenceOptions,
    cells: usize,
    steps: usize,
) -> Result<f64> {
    let runs = [steps, 2 * steps, 4 * steps]
        .par_iter()
        .map(|&k| Ok(manufactured_run(case, opts, cells, Some(k))?.0))
        .collect::<Result<Vec<_>>>()?;
    let dr = opts.r_max / cells as f64;
    let n = opts.problem.n;
    Ok(radial_l2(n, dr, &runs[0], &runs[1]) / radial_l2(n, dr, &runs[1], &runs[2]))
}
