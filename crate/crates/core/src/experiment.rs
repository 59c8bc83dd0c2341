//! End-to-end experiments: convergence sweeps over `(n, μ)`, noise injection,
//! rate fitting and CSV output.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{
    assemble_data_penalty, assemble_data_rhs, assemble_dual_stabilizer, assemble_jump_penalty,
    assemble_load, assemble_mass, assemble_operator, data_elements, interpolate,
};
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, Mesh};
use crate::norms::{discrete_l2_norm, h1_semi_error, l2_error, stab_norm, triple_norm};
use crate::problem::{ExactSolution, ProblemConfig, RegionSpec};
use crate::saddle::{self, SaddleSystem, Solution, DEFAULT_CONDITION_TOL};
use crate::weights::{build_weight, Direction, WeightSpec};

/// Data-set geometries of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Centered disk `B((0.5, 0.5), 0.1)`, errors measured on both sides.
    Disk,
    /// `ω = (0, 0.2) x (0.4, 0.6)`, errors in `(0.2, 1) x (0.45, 0.55)`.
    SideDown,
    /// `ω = (0.8, 1) x (0.4, 0.6)`, errors in `(0, 0.8) x (0.45, 0.55)`.
    SideUp,
    /// Internal layer solution with four data boxes on both sides of the layer.
    Layer,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Disk => "disk",
            Case::SideDown => "side_down",
            Case::SideUp => "side_up",
            Case::Layer => "layer",
        }
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Case::Disk),
            "side_down" | "side-down" => Ok(Case::SideDown),
            "side_up" | "side-up" => Ok(Case::SideUp),
            "layer" => Ok(Case::Layer),
            other => Err(Error::InvalidArgument(format!("unknown case {other:?}"))),
        }
    }
}

/// Geometry and manufactured solution of a case for a given flow direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSetup {
    pub omega: RegionSpec,
    pub exact: ExactSolution,
    pub down_region: Option<RegionSpec>,
    pub up_region: Option<RegionSpec>,
    /// Direction of the weight used for the triple-norm diagnostic.
    pub weight_direction: Direction,
}

impl Case {
    pub fn setup(&self, beta1: f64) -> CaseSetup {
        let forward = beta1 > 0.0;
        // (region right of the data, region left of the data)
        let (omega, exact, right, left) = match self {
            Case::Disk => (
                RegionSpec::disk([0.5, 0.5], 0.1),
                ExactSolution::ProductSine,
                Some(RegionSpec::rect(0.6, 1.0, 0.45, 0.55)),
                Some(RegionSpec::rect(0.0, 0.4, 0.45, 0.55)),
            ),
            Case::SideDown => (
                RegionSpec::rect(0.0, 0.2, 0.4, 0.6),
                ExactSolution::ProductSine,
                Some(RegionSpec::rect(0.2, 1.0, 0.45, 0.55)),
                None,
            ),
            Case::SideUp => (
                RegionSpec::rect(0.8, 1.0, 0.4, 0.6),
                ExactSolution::ProductSine,
                None,
                Some(RegionSpec::rect(0.0, 0.8, 0.45, 0.55)),
            ),
            Case::Layer => (
                RegionSpec::Union(vec![
                    RegionSpec::rect(0.0, 0.2, 0.25, 0.45),
                    RegionSpec::rect(0.0, 0.2, 0.55, 0.75),
                    RegionSpec::rect(0.8, 1.0, 0.25, 0.45),
                    RegionSpec::rect(0.8, 1.0, 0.55, 0.75),
                ]),
                ExactSolution::Layer,
                Some(RegionSpec::Union(vec![
                    RegionSpec::rect(0.2, 1.0, 0.3, 0.4),
                    RegionSpec::rect(0.2, 1.0, 0.6, 0.7),
                ])),
                Some(RegionSpec::Union(vec![
                    RegionSpec::rect(0.0, 0.8, 0.3, 0.4),
                    RegionSpec::rect(0.0, 0.8, 0.6, 0.7),
                ])),
            ),
        };
        let (down_region, up_region) = if forward { (right, left) } else { (left, right) };
        let weight_direction = if down_region.is_some() {
            Direction::Downstream
        } else {
            Direction::Upstream
        };
        CaseSetup {
            omega,
            exact,
            down_region,
            up_region,
            weight_direction,
        }
    }
}

/// Nodal data noise `δ ~ U[-h^p, h^p]` with `h = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    Power(f64),
}

impl NoiseSpec {
    pub fn new(exponent: Option<f64>) -> Result<Self> {
        match exponent {
            None => Ok(NoiseSpec::None),
            Some(p) if p == 2.0 || p == 1.0 || p == 0.5 => Ok(NoiseSpec::Power(p)),
            Some(p) => Err(Error::InvalidArgument(format!(
                "noise exponent must be one of 2, 1, 0.5; got {p}"
            ))),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            NoiseSpec::None => None,
            NoiseSpec::Power(p) => Some(*p),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseSpec::None),
            "h2" => Ok(NoiseSpec::Power(2.0)),
            "h" => Ok(NoiseSpec::Power(1.0)),
            "h05" => Ok(NoiseSpec::Power(0.5)),
            other => Err(Error::InvalidArgument(format!("unknown noise level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub case: Case,
    pub mesh_sizes: Vec<usize>,
    pub mus: Vec<f64>,
    pub beta1: f64,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub gamma: f64,
    pub gamma_star: f64,
    pub zeta: f64,
    /// Crosswind decay constant of the triple-norm weight; lowered per mesh
    /// to half of the largest admissible value when too large.
    pub lambda: f64,
    pub condition: bool,
    /// Record wall-clock times; off gives byte-reproducible CSV output.
    pub timing: bool,
    /// Overrides the case's manufactured solution.
    pub exact: Option<ExactSolution>,
}

impl ExperimentPlan {
    pub fn new(case: Case, mesh_sizes: Vec<usize>, mus: Vec<f64>) -> Self {
        Self {
            case,
            mesh_sizes,
            mus,
            beta1: 1.0,
            noise: NoiseSpec::None,
            seed: 0,
            gamma: ProblemConfig::DEFAULT_GAMMA,
            gamma_star: ProblemConfig::DEFAULT_GAMMA_STAR,
            zeta: ProblemConfig::DEFAULT_ZETA,
            lambda: 1.0,
            condition: false,
            timing: true,
            exact: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh_sizes.is_empty() || self.mus.is_empty() {
            return Err(Error::InvalidArgument("plan needs at least one n and one mu".into()));
        }
        if self.mesh_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("mesh sizes must be strictly ascending".into()));
        }
        if self.mus.iter().any(|&m| m.is_nan() || m <= 0.0) {
            return Err(Error::InvalidArgument("all mu must be positive".into()));
        }
        if self.beta1 == 0.0 || !self.beta1.is_finite() {
            return Err(Error::InvalidArgument("beta1 must be finite and nonzero".into()));
        }
        Ok(())
    }

    pub fn config(&self, mu: f64) -> ProblemConfig {
        let setup = self.case.setup(self.beta1);
        ProblemConfig {
            mu,
            beta: [self.beta1, 0.0],
            gamma: self.gamma,
            gamma_star: self.gamma_star,
            zeta: self.zeta,
            omega: setup.omega,
        }
    }

    pub fn exact(&self) -> ExactSolution {
        self.exact.unwrap_or_else(|| self.case.setup(self.beta1).exact)
    }
}

/// One `(n, μ)` run. Error fields are `None` when the case has no such region.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub case: Case,
    pub n: usize,
    pub h: f64,
    pub mu: f64,
    pub peclet: f64,
    pub noise_exponent: Option<f64>,
    pub seed: u64,
    pub l2_down: Option<f64>,
    pub l2_up: Option<f64>,
    pub h1_down: Option<f64>,
    pub h1_up: Option<f64>,
    pub l2_global: f64,
    pub triple_norm: Option<f64>,
    pub stab_norm: f64,
    pub z_l2: f64,
    pub cond_estimate: Option<f64>,
    pub wall_time_ms: u64,
    /// Set when the run failed; the error fields are then meaningless.
    pub failure: Option<String>,
}

impl ExperimentRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn field(&self, field: RowField) -> Option<f64> {
        match field {
            RowField::L2Down => self.l2_down,
            RowField::L2Up => self.l2_up,
            RowField::H1Down => self.h1_down,
            RowField::H1Up => self.h1_up,
            RowField::L2Global => Some(self.l2_global),
            RowField::TripleNorm => self.triple_norm,
            RowField::StabNorm => Some(self.stab_norm),
            RowField::ZL2 => Some(self.z_l2),
            RowField::CondEstimate => self.cond_estimate,
        }
        .filter(|_| !self.failed())
    }
}

/// Numeric row fields that can be rate-fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowField {
    L2Down,
    L2Up,
    H1Down,
    H1Up,
    L2Global,
    TripleNorm,
    StabNorm,
    ZL2,
    CondEstimate,
}

impl FromStr for RowField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l2_down" => RowField::L2Down,
            "l2_up" => RowField::L2Up,
            "h1_down" => RowField::H1Down,
            "h1_up" => RowField::H1Up,
            "l2_global" => RowField::L2Global,
            "triple_norm" => RowField::TripleNorm,
            "stab_norm" => RowField::StabNorm,
            "z_l2" => RowField::ZL2,
            "cond_estimate" => RowField::CondEstimate,
            other => return Err(Error::InvalidArgument(format!("unknown field {other:?}"))),
        })
    }
}

/// Counter-based uniform draw in `[-1, 1]` keyed by `(seed, n, node)`.
fn unit_noise(seed: u64, n: usize, node: usize) -> f64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(node as u64);
    rng.random_range(-1.0..=1.0)
}

/// Nodal data on the data set: `u(node) + δ_node` at every vertex of every
/// data-set element, `None` elsewhere.
pub fn inject_noise(
    mesh: &Mesh,
    omega: &RegionSpec,
    exact: &ExactSolution,
    spec: NoiseSpec,
    seed: u64,
) -> Vec<Option<f64>> {
    let amplitude = spec.exponent().map(|p| mesh.cell_width().powf(p));
    let mut values = vec![None; mesh.num_nodes()];
    for t in crate::assembly::elements_in(mesh, omega) {
        for &node in &mesh.triangles[t].vertices {
            if values[node].is_some() {
                continue;
            }
            let u = exact.value(mesh.nodes[node].point());
            let delta = amplitude.map_or(0.0, |a| a * unit_noise(seed, mesh.n, node));
            values[node] = Some(u + delta);
        }
    }
    values
}

/// Everything produced by a single run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub row: ExperimentRow,
    pub mesh: Mesh,
    pub solution: Solution,
    pub exact: ExactSolution,
}

/// Builds the saddle system of one run.
pub fn build_system(
    mesh: &Mesh,
    config: &ProblemConfig,
    exact: &ExactSolution,
    data: &[Option<f64>],
) -> Result<SaddleSystem> {
    let a = assemble_operator(mesh, config);
    let s = assemble_jump_penalty(mesh, config).add(&assemble_data_penalty(mesh, config)?)?;
    let s_star = assemble_dual_stabilizer(mesh, config);
    let f = assemble_load(mesh, config, exact);
    let g = assemble_data_rhs(mesh, config, data)?;
    SaddleSystem::build(a, s, s_star, f, g)
}

/// Runs a single `(n, μ)` configuration of a plan.
pub fn run_single(plan: &ExperimentPlan, n: usize, mu: f64) -> Result<RunOutput> {
    let start = Instant::now();
    let config = plan.config(mu);
    config.validate()?;
    let setup = plan.case.setup(plan.beta1);
    let exact = plan.exact();
    let mesh = build_mesh(n)?.classify_boundary(config.beta)?;
    data_elements(&mesh, &config)?;

    let data = inject_noise(&mesh, &config.omega, &exact, plan.noise, plan.seed);
    let system = build_system(&mesh, &config, &exact, &data)?;
    let factors = system.factorize()?;
    let solution = saddle::solve_with(&system, &factors)?;
    let cond_estimate = if plan.condition {
        Some(saddle::condition_number(&system, DEFAULT_CONDITION_TOL)?)
    } else {
        None
    };

    let u_h = &solution.u_h;
    let region_error = |region: &Option<RegionSpec>, h1: bool| -> Result<Option<f64>> {
        region
            .as_ref()
            .map(|r| {
                if h1 {
                    h1_semi_error(&mesh, u_h, &exact, r)
                } else {
                    l2_error(&mesh, u_h, &exact, r)
                }
            })
            .transpose()
    };
    let l2_down = region_error(&setup.down_region, false)?;
    let l2_up = region_error(&setup.up_region, false)?;
    let h1_down = region_error(&setup.down_region, true)?;
    let h1_up = region_error(&setup.up_region, true)?;
    let l2_global = l2_error(&mesh, u_h, &exact, &RegionSpec::unit_square())?;

    let h = mesh.cell_width();
    let interpolant = interpolate(&mesh, |p| exact.value(p));
    let error: Vec<f64> = interpolant.iter().zip(u_h).map(|(a, b)| a - b).collect();
    let stab = stab_norm(&error, &solution.z_h, &system.s, &system.s_star)?;
    let z_l2 = discrete_l2_norm(&assemble_mass(&mesh), &solution.z_h);

    let (y_lo, y_hi) = config.omega.y_extent();
    let lambda = plan.lambda.min(0.5 * WeightSpec::max_lambda(h, (y_lo.max(0.0), y_hi.min(1.0))));
    let triple = build_weight(&config, setup.weight_direction, h, lambda)
        .ok()
        .map(|w| triple_norm(&mesh, &error, &w, &config))
        .transpose()?;

    let row = ExperimentRow {
        case: plan.case,
        n,
        h,
        mu,
        peclet: config.peclet(h),
        noise_exponent: plan.noise.exponent(),
        seed: plan.seed,
        l2_down,
        l2_up,
        h1_down,
        h1_up,
        l2_global,
        triple_norm: triple,
        stab_norm: stab,
        z_l2,
        cond_estimate,
        wall_time_ms: if plan.timing { start.elapsed().as_millis() as u64 } else { 0 },
        failure: None,
    };
    Ok(RunOutput {
        row,
        mesh,
        solution,
        exact,
    })
}

fn failed_row(plan: &ExperimentPlan, n: usize, mu: f64, err: &Error) -> ExperimentRow {
    let h = 1.0 / n as f64;
    let nan = Some(f64::NAN);
    ExperimentRow {
        case: plan.case,
        n,
        h,
        mu,
        peclet: plan.beta1.abs() * h / mu,
        noise_exponent: plan.noise.exponent(),
        seed: plan.seed,
        l2_down: nan,
        l2_up: nan,
        h1_down: nan,
        h1_up: nan,
        l2_global: f64::NAN,
        triple_norm: nan,
        stab_norm: f64::NAN,
        z_l2: f64::NAN,
        cond_estimate: nan,
        wall_time_ms: 0,
        failure: Some(err.to_string()),
    }
}

/// Runs every `(μ, n)` pair of the plan, `μ` in the outer loop. A failing run
/// yields a marker row instead of aborting the sweep.
pub fn run_case(plan: &ExperimentPlan) -> Result<Vec<ExperimentRow>> {
    plan.validate()?;
    let mut rows = Vec::with_capacity(plan.mus.len() * plan.mesh_sizes.len());
    for &mu in &plan.mus {
        for &n in &plan.mesh_sizes {
            rows.push(match run_single(plan, n, mu) {
                Ok(out) => out.row,
                Err(err) => failed_row(plan, n, mu, &err),
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log(error)` against `log(h)` over every row with a
/// positive, finite value of `field`. Positive slopes mean convergence.
pub fn fit_rate(rows: &[ExperimentRow], field: RowField) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.field(field).map(|e| (r.h, e)))
        .filter(|&(h, e)| e > 0.0 && e.is_finite() && h > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData { usable: distinct.len() });
    }
    Ok(least_squares_slope(&points))
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub const CSV_HEADER: &str = "case,n,h,mu,peclet,noise_exponent,seed,l2_down,l2_up,h1_down,h1_up,l2_global,triple_norm,stab_norm,z_l2,cond_estimate,wall_time_ms";

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV text for a set of rows, LF line endings.
pub fn csv_string(rows: &[ExperimentRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.case.name(),
            r.n,
            num(r.h),
            num(r.mu),
            num(r.peclet),
            opt(r.noise_exponent),
            r.seed,
            opt(r.l2_down),
            opt(r.l2_up),
            opt(r.h1_down),
            opt(r.h1_up),
            num(r.l2_global),
            opt(r.triple_norm),
            num(r.stab_norm),
            num(r.z_l2),
            opt(r.cond_estimate),
            r.wall_time_ms,
        );
    }
    out
}

pub fn emit_csv(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows)).map_err(|e| Error::io(path, e))
}

/// Per-node dump `idx x y u_h z_h u_exact` for contour plots.
pub fn solution_dump_string(out: &RunOutput) -> String {
    let mut text = String::from("idx x y u_h z_h u_exact\n");
    for (node, (u, z)) in out.mesh.nodes.iter().zip(out.solution.u_h.iter().zip(&out.solution.z_h)) {
        let _ = writeln!(
            text,
            "{} {} {} {} {} {}",
            node.index,
            node.x,
            node.y,
            num(*u),
            num(*z),
            num(out.exact.value(node.point()))
        );
    }
    text
}
