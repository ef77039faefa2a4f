//! Scenario files: parsing, unit normalisation and validation.
//!
//! A scenario is a TOML document. After validation every value is held in
//! simulation units (energies in units of the junction Josephson energy,
//! `ħ = 1`), whatever the file declared.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use holo_core::analysis::{ErrorBudget, UnitScale};
use holo_core::evolution::RampProfile;
use holo_core::holonomy::CLOSURE_TOL;
use holo_core::network::BlockKind;
use serde::{Deserialize, Serialize};

use crate::expr::Num;
use crate::Command;

const PS: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    units: Option<String>,
    energy_unit_ps: Option<Num>,
    block: Option<String>,
    h: Option<Num>,
    junctions: Option<RawJunctions>,
    #[serde(rename = "loop")]
    path: Option<RawLoop>,
    schedule: Option<RawSchedule>,
    budget: Option<RawBudget>,
    grid: Option<BTreeMap<String, Vec<Num>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJunctions {
    gamma2: Option<Num>,
    gamma2p: Option<Num>,
    gamma3: Option<Num>,
    phi3: Option<Num>,
    e_c: Option<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoop {
    kind: Option<String>,
    phi1_star: Option<Num>,
    phi2_star: Option<Num>,
    phi_star: Option<Num>,
    samples_per_segment: Option<usize>,
    points: Option<Vec<BTreeMap<String, Num>>>,
    samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    eta_over_gap: Option<Vec<Num>>,
    eta: Option<Vec<Num>>,
    tau_op: Option<Vec<Num>>,
    profile: Option<String>,
    samples_per_segment: Option<usize>,
    dt: Option<Num>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    preset: Option<String>,
    delta: Option<Num>,
    eta: Option<Num>,
    tau_op: Option<Num>,
    delta_e: Option<Num>,
    delta_s: Option<Num>,
    e_c: Option<Num>,
    temperature: Option<Num>,
    qp_prefactor: Option<Num>,
}

/// Unit system declared by the file. Physical files give energies as
/// angular rates in 1/ps, times in ps and temperatures in kelvin; one
/// simulation unit of energy is `ħ/(energy_unit_ps ps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub system: String,
    pub energy_unit_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junctions {
    pub gamma2: f64,
    pub gamma2p: f64,
    pub gamma3: f64,
    pub phi3: f64,
    pub e_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopSpec {
    ZRect {
        phi1_star: f64,
        phi2_star: f64,
        samples_per_segment: usize,
    },
    CzRect {
        phi1_star: f64,
        phi2_star: f64,
        samples_per_segment: usize,
    },
    XPath {
        phi_star: f64,
        samples_per_segment: usize,
    },
    Sampled {
        points: Vec<BTreeMap<String, f64>>,
        samples: usize,
    },
}

impl LoopSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LoopSpec::ZRect { .. } => "z_rect",
            LoopSpec::CzRect { .. } => "cz_rect",
            LoopSpec::XPath { .. } => "x_path",
            LoopSpec::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "values", rename_all = "snake_case")]
pub enum EtaSpec {
    /// Multiples of the measured minimal gap.
    OverGap(Vec<f64>),
    /// Absolute rates in simulation units.
    Absolute(Vec<f64>),
    /// Operation times; `η = 1/τ_op`.
    TauOp(Vec<f64>),
}

impl EtaSpec {
    pub fn len(&self) -> usize {
        match self {
            EtaSpec::OverGap(v) | EtaSpec::Absolute(v) | EtaSpec::TauOp(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Absolute `η` values for a gap `Δ`, in input order.
    pub fn resolve(&self, gap: f64) -> Vec<f64> {
        match self {
            EtaSpec::OverGap(v) => v.iter().map(|k| k * gap).collect(),
            EtaSpec::Absolute(v) => v.clone(),
            EtaSpec::TauOp(v) => v.iter().map(|t| 1.0 / t).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub etas: EtaSpec,
    pub profile: RampProfile,
    /// Samples per segment of the loop used to measure the gap and the
    /// Hamiltonian speed.
    pub samples_per_segment: usize,
    /// Integration step; `None` uses the library default.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub units: Units,
    pub block: Option<BlockKind>,
    pub h: f64,
    pub junctions: Junctions,
    #[serde(rename = "loop")]
    pub path: Option<LoopSpec>,
    pub schedule: Option<ScheduleSpec>,
    pub budget: Option<ErrorBudget>,
    /// Budget fields swept by the fidelity command, in key order.
    pub grid: BTreeMap<String, Vec<f64>>,
}

pub const BUDGET_FIELDS: [&str; 8] = [
    "delta",
    "eta",
    "tau_op",
    "delta_e",
    "delta_s",
    "e_c",
    "temperature",
    "qp_prefactor",
];

/// What a budget or grid field measures, for unit conversion.
#[derive(Clone, Copy)]
enum Dim {
    Energy,
    Time,
    Temperature,
}

fn budget_dim(field: &str) -> Dim {
    match field {
        "tau_op" => Dim::Time,
        "temperature" => Dim::Temperature,
        _ => Dim::Energy,
    }
}

struct Converter {
    scale: Option<UnitScale>,
}

impl Converter {
    fn to_units(&self, v: f64, dim: Dim) -> f64 {
        match (&self.scale, dim) {
            (None, _) => v,
            (Some(s), Dim::Energy) => s.rate_to_units(v / PS),
            (Some(s), Dim::Time) => s.seconds_to_units(v * PS),
            (Some(s), Dim::Temperature) => s.kelvin_to_units(v),
        }
    }
}

pub fn set_budget_field(b: &mut ErrorBudget, field: &str, v: f64) -> Result<(), String> {
    match field {
        "delta" => b.delta = v,
        "eta" => b.eta = v,
        "tau_op" => b.tau_op = v,
        "delta_e" => b.delta_e = v,
        "delta_s" => b.delta_s = v,
        "e_c" => b.e_c = v,
        "temperature" => b.temperature = v,
        "qp_prefactor" => b.qp_prefactor = v,
        _ => return Err(format!("grid: unknown budget field '{field}'")),
    }
    Ok(())
}

struct Collector {
    errors: Vec<String>,
}

impl Collector {
    fn num(&mut self, field: &str, v: &Option<Num>) -> Option<f64> {
        match v {
            None => None,
            Some(n) => match n.eval() {
                Ok(x) => Some(x),
                Err(e) => {
                    self.errors.push(format!("{field}: {e}"));
                    None
                }
            },
        }
    }

    fn list(&mut self, field: &str, v: &[Num]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .filter_map(|(i, n)| self.num(&format!("{field}[{i}]"), &Some(n.clone())))
            .collect()
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }
}

fn parse_block(s: &str) -> Option<BlockKind> {
    match s {
        "z" => Some(BlockKind::ZBlock),
        "x" => Some(BlockKind::XBlock),
        "cz" => Some(BlockKind::CzBlock),
        _ => None,
    }
}

fn parse_profile(s: &str) -> Option<RampProfile> {
    match s {
        "smooth" => Some(RampProfile::Smooth),
        "cosine" | "cosine-ease" => Some(RampProfile::CosineEase),
        "linear" => Some(RampProfile::Linear),
        _ => None,
    }
}

pub const DEFAULT_H: f64 = 0.3;
pub const DEFAULT_WILSON_SAMPLES: usize = 2500;
pub const DEFAULT_DYNAMIC_SAMPLES: usize = 64;

/// Parse and validate a scenario for `command`. All problems are reported
/// together.
pub fn parse(text: &str, command: Command) -> Result<Scenario, Vec<String>> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| vec![format!("parse error: {}", e.message())])?;
    let mut c = Collector { errors: Vec::new() };

    let conv = match raw.units.as_deref() {
        None => {
            c.fail("units: required (\"natural\" or \"physical\")");
            Converter { scale: None }
        }
        Some("natural") => {
            if raw.energy_unit_ps.is_some() {
                c.fail("energy_unit_ps: only meaningful with units = \"physical\"");
            }
            Converter { scale: None }
        }
        Some("physical") => match c.num("energy_unit_ps", &raw.energy_unit_ps) {
            Some(t) if t > 0.0 => Converter {
                scale: Some(UnitScale::from_time(t * PS)),
            },
            Some(t) => {
                c.fail(format!("energy_unit_ps: must be positive, got {t}"));
                Converter { scale: None }
            }
            None => {
                if raw.energy_unit_ps.is_none() {
                    c.fail("energy_unit_ps: required with units = \"physical\"");
                }
                Converter { scale: None }
            }
        },
        Some(other) => {
            c.fail(format!("units: expected \"natural\" or \"physical\", got \"{other}\""));
            Converter { scale: None }
        }
    };
    let units = Units {
        system: raw.units.clone().unwrap_or_else(|| "natural".into()),
        energy_unit_ps: raw.energy_unit_ps.as_ref().and_then(|n| n.eval().ok()),
    };

    let block = match raw.block.as_deref() {
        None => None,
        Some(s) => {
            let b = parse_block(s);
            if b.is_none() {
                c.fail(format!("block: expected \"z\", \"x\" or \"cz\", got \"{s}\""));
            }
            b
        }
    };

    let h = c
        .num("h", &raw.h)
        .map(|v| conv.to_units(v, Dim::Energy))
        .unwrap_or(DEFAULT_H);

    let rj = raw.junctions.unwrap_or_default();
    let gamma2 = c.num("junctions.gamma2", &rj.gamma2).unwrap_or(0.6);
    let junctions = Junctions {
        gamma2,
        gamma2p: c.num("junctions.gamma2p", &rj.gamma2p).unwrap_or(gamma2),
        gamma3: c.num("junctions.gamma3", &rj.gamma3).unwrap_or(0.5),
        phi3: c.num("junctions.phi3", &rj.phi3).unwrap_or(FRAC_PI_4),
        e_c: c
            .num("junctions.e_c", &rj.e_c)
            .map(|v| conv.to_units(v, Dim::Energy))
            .unwrap_or(4.0),
    };

    let path = raw.path.map(|l| {
        let samples = l.samples_per_segment.unwrap_or(DEFAULT_WILSON_SAMPLES);
        let kind = l.kind.clone().unwrap_or_default();
        let p1 = c.num("loop.phi1_star", &l.phi1_star).unwrap_or(FRAC_PI_3);
        let p2 = c.num("loop.phi2_star", &l.phi2_star).unwrap_or(FRAC_PI_3);
        let ps = c.num("loop.phi_star", &l.phi_star).unwrap_or(FRAC_PI_3);
        let points: Vec<BTreeMap<String, f64>> = l
            .points
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, p)| {
                p.iter()
                    .filter_map(|(k, v)| c.num(&format!("loop.points[{i}].{k}"), &Some(v.clone())).map(|x| (k.clone(), x)))
                    .collect()
            })
            .collect();
        match kind.as_str() {
            "z_rect" => Some(LoopSpec::ZRect {
                phi1_star: p1,
                phi2_star: p2,
                samples_per_segment: samples,
            }),
            "cz_rect" => Some(LoopSpec::CzRect {
                phi1_star: p1,
                phi2_star: p2,
                samples_per_segment: samples,
            }),
            "x_path" => Some(LoopSpec::XPath {
                phi_star: ps,
                samples_per_segment: samples,
            }),
            "sampled" => Some(LoopSpec::Sampled {
                points,
                samples: l.samples.unwrap_or(DEFAULT_WILSON_SAMPLES),
            }),
            "" => {
                c.fail("loop.kind: required (z_rect, cz_rect, x_path or sampled)");
                None
            }
            other => {
                c.fail(format!("loop.kind: unknown loop '{other}'"));
                None
            }
        }
    });
    let path = path.flatten();

    let schedule = raw.schedule.map(|s| {
        let given = [s.eta_over_gap.is_some(), s.eta.is_some(), s.tau_op.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given > 1 {
            c.fail("schedule: give exactly one of eta_over_gap, eta, tau_op");
        }
        let etas = if let Some(v) = &s.eta_over_gap {
            EtaSpec::OverGap(c.list("schedule.eta_over_gap", v))
        } else if let Some(v) = &s.eta {
            EtaSpec::Absolute(
                c.list("schedule.eta", v)
                    .into_iter()
                    .map(|x| conv.to_units(x, Dim::Energy))
                    .collect(),
            )
        } else if let Some(v) = &s.tau_op {
            EtaSpec::TauOp(
                c.list("schedule.tau_op", v)
                    .into_iter()
                    .map(|x| conv.to_units(x, Dim::Time))
                    .collect(),
            )
        } else {
            EtaSpec::OverGap(Vec::new())
        };
        let profile = match s.profile.as_deref() {
            None => RampProfile::default(),
            Some(p) => parse_profile(p).unwrap_or_else(|| {
                c.fail(format!("schedule.profile: expected smooth, cosine or linear, got \"{p}\""));
                RampProfile::default()
            }),
        };
        ScheduleSpec {
            etas,
            profile,
            samples_per_segment: s.samples_per_segment.unwrap_or(DEFAULT_DYNAMIC_SAMPLES),
            dt: c.num("schedule.dt", &s.dt).map(|x| conv.to_units(x, Dim::Time)),
        }
    });

    let budget = raw.budget.map(|b| {
        let mut out = match b.preset.as_deref() {
            None => ErrorBudget {
                delta: f64::NAN,
                eta: f64::NAN,
                tau_op: f64::NAN,
                delta_e: 0.0,
                delta_s: 0.0,
                e_c: 0.0,
                temperature: 0.0,
                qp_prefactor: 1.0,
            },
            Some("standard") => {
                let d = c.num("budget.delta", &b.delta).map(|v| conv.to_units(v, Dim::Energy));
                match d {
                    Some(d) if d > 0.0 => ErrorBudget::standard(d),
                    _ => {
                        c.fail("budget.delta: the standard preset needs a positive delta");
                        ErrorBudget::standard(1.0)
                    }
                }
            }
            Some(p) => {
                c.fail(format!("budget.preset: unknown preset \"{p}\" (only \"standard\")"));
                ErrorBudget::standard(1.0)
            }
        };
        let fields = [
            ("delta", &b.delta),
            ("eta", &b.eta),
            ("tau_op", &b.tau_op),
            ("delta_e", &b.delta_e),
            ("delta_s", &b.delta_s),
            ("e_c", &b.e_c),
            ("temperature", &b.temperature),
            ("qp_prefactor", &b.qp_prefactor),
        ];
        for (name, v) in fields {
            if let Some(x) = c.num(&format!("budget.{name}"), v) {
                let _ = set_budget_field(&mut out, name, conv.to_units(x, budget_dim(name)));
            }
        }
        if b.preset.is_none() {
            for (name, v) in [("delta", out.delta), ("eta", out.eta), ("tau_op", out.tau_op)] {
                if v.is_nan() {
                    c.fail(format!("budget.{name}: required unless preset = \"standard\""));
                }
            }
        }
        out
    });

    let mut grid = BTreeMap::new();
    for (k, v) in raw.grid.iter().flatten() {
        if !BUDGET_FIELDS.contains(&k.as_str()) {
            c.fail(format!("grid.{k}: not a budget field"));
            continue;
        }
        let vals: Vec<f64> = c
            .list(&format!("grid.{k}"), v)
            .into_iter()
            .map(|x| conv.to_units(x, budget_dim(k)))
            .collect();
        grid.insert(k.clone(), vals);
    }

    let scenario = Scenario {
        units,
        block,
        h,
        junctions,
        path,
        schedule,
        budget,
        grid,
    };
    c.errors.extend(scenario.check(command));
    if c.errors.is_empty() {
        Ok(scenario)
    } else {
        Err(c.errors)
    }
}

fn positive(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{name}: must be positive and finite, got {v}"));
    }
}

fn corner(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(0.0..=FRAC_PI_2).contains(&v) {
        errs.push(format!("{name}: must lie in [0, pi/2], got {v}"));
    }
}

impl Scenario {
    /// Preconditions of `command` on an already-normalised scenario.
    pub fn check(&self, command: Command) -> Vec<String> {
        let mut e = Vec::new();
        if !matches!(self.units.system.as_str(), "natural" | "physical") {
            e.push(format!("units: unknown system \"{}\"", self.units.system));
        }
        if !self.h.is_finite() || self.h == 0.0 {
            e.push(format!(
                "h: must be finite and non-zero (at h = 0 the computational level merges with a bright level), got {}",
                self.h
            ));
        }
        let j = &self.junctions;
        positive("junctions.gamma2", j.gamma2, &mut e);
        positive("junctions.gamma2p", j.gamma2p, &mut e);
        positive("junctions.gamma3", j.gamma3, &mut e);
        positive("junctions.e_c", j.e_c, &mut e);
        if !(j.phi3.abs() <= FRAC_PI_2) {
            e.push(format!("junctions.phi3: must satisfy |phi3| <= pi/2, got {}", j.phi3));
        }

        let needs_block = !matches!(command, Command::Fidelity);
        let expected_block = match command {
            Command::GateZ => Some(BlockKind::ZBlock),
            Command::GateX => Some(BlockKind::XBlock),
            Command::GateCz => Some(BlockKind::CzBlock),
            _ => None,
        };
        if needs_block {
            match (self.block, expected_block) {
                (None, _) => e.push("block: required (\"z\", \"x\" or \"cz\")".into()),
                (Some(b), Some(want)) if b != want => e.push(format!(
                    "block: {} needs block {:?}, scenario has {:?}",
                    command.name(),
                    want,
                    b
                )),
                _ => {}
            }
            match &self.path {
                None => e.push("loop: required".into()),
                Some(p) => self.check_loop(p, &mut e),
            }
        }
        if matches!(command, Command::GateX) && j.gamma3 == 1.0 {
            e.push("junctions.gamma3: the X gate needs an asymmetric J3 (gamma3 != 1)".into());
        }
        if matches!(command, Command::GateZ | Command::GateCz) && j.gamma2 == 1.0 {
            if let Some(LoopSpec::ZRect { phi2_star, .. } | LoopSpec::CzRect { phi2_star, .. }) = &self.path {
                if *phi2_star == FRAC_PI_2 {
                    e.push("loop.phi2_star: gamma2 = 1 with phi2_star = pi/2 makes the phase integrand singular".into());
                }
            }
        }

        match (&self.schedule, command) {
            (None, Command::LzScan) => e.push("schedule: required for lz-scan".into()),
            (Some(s), _) => {
                if matches!(command, Command::LzScan) && s.etas.is_empty() {
                    e.push("schedule: lz-scan needs at least one eta".into());
                }
                let vals = match &s.etas {
                    EtaSpec::OverGap(v) | EtaSpec::Absolute(v) | EtaSpec::TauOp(v) => v,
                };
                for (i, v) in vals.iter().enumerate() {
                    if !(*v > 0.0 && v.is_finite()) {
                        e.push(format!("schedule: entry {i} must be positive and finite, got {v}"));
                    }
                }
                if matches!(command, Command::LzScan) {
                    let (ordered, wanted) = match &s.etas {
                        EtaSpec::OverGap(v) | EtaSpec::Absolute(v) => (v.windows(2).all(|w| w[1] < w[0]), "decreasing"),
                        EtaSpec::TauOp(v) => (v.windows(2).all(|w| w[1] > w[0]), "increasing"),
                    };
                    if !ordered {
                        e.push(format!("schedule: lz-scan values must be strictly {wanted} (eta descending)"));
                    }
                    if s.dt.is_some() {
                        e.push("schedule.dt: lz-scan always uses the default step".into());
                    }
                }
                if s.samples_per_segment < 16 {
                    e.push(format!(
                        "schedule.samples_per_segment: need at least 16, got {}",
                        s.samples_per_segment
                    ));
                }
                if let Some(dt) = s.dt {
                    if !(dt > 0.0 && dt.is_finite()) {
                        e.push(format!("schedule.dt: must be positive, got {dt}"));
                    }
                }
            }
            _ => {}
        }

        if matches!(command, Command::Fidelity) {
            match &self.budget {
                None => e.push("budget: required for fidelity".into()),
                Some(b) => {
                    if let Err(err) = b.validate() {
                        e.push(format!("budget: {err}"));
                    }
                }
            }
            for (k, v) in &self.grid {
                if !BUDGET_FIELDS.contains(&k.as_str()) {
                    e.push(format!("grid.{k}: not a budget field"));
                }
                if v.is_empty() {
                    e.push(format!("grid.{k}: empty list"));
                }
                if let Some(b) = &self.budget {
                    for (i, x) in v.iter().enumerate() {
                        let mut probe = *b;
                        if set_budget_field(&mut probe, k, *x).is_ok() {
                            if let Err(err) = probe.validate() {
                                e.push(format!("grid.{k}[{i}]: {err}"));
                            }
                        }
                    }
                }
            }
        }
        e
    }

    fn check_loop(&self, p: &LoopSpec, e: &mut Vec<String>) {
        let block = self.block;
        let fits = match (p, block) {
            (LoopSpec::ZRect { .. }, Some(BlockKind::ZBlock)) => true,
            (LoopSpec::CzRect { .. }, Some(BlockKind::CzBlock)) => true,
            (LoopSpec::XPath { .. }, Some(BlockKind::XBlock)) => true,
            (LoopSpec::Sampled { .. }, _) => true,
            (_, None) => true,
            _ => false,
        };
        if !fits {
            e.push(format!("loop.kind: {} does not belong to block {:?}", p.name(), block.unwrap()));
        }
        match p {
            LoopSpec::ZRect {
                phi1_star,
                phi2_star,
                samples_per_segment,
            }
            | LoopSpec::CzRect {
                phi1_star,
                phi2_star,
                samples_per_segment,
            } => {
                corner("loop.phi1_star", *phi1_star, e);
                corner("loop.phi2_star", *phi2_star, e);
                if *samples_per_segment < 16 {
                    e.push(format!("loop.samples_per_segment: need at least 16, got {samples_per_segment}"));
                }
            }
            LoopSpec::XPath {
                phi_star,
                samples_per_segment,
            } => {
                corner("loop.phi_star", *phi_star, e);
                if *samples_per_segment < 16 {
                    e.push(format!("loop.samples_per_segment: need at least 16, got {samples_per_segment}"));
                }
            }
            LoopSpec::Sampled { points, samples } => {
                if points.len() < 3 {
                    e.push(format!("loop.points: need at least 3 points, got {}", points.len()));
                }
                if *samples < 16 {
                    e.push(format!("loop.samples: need at least 16, got {samples}"));
                }
                if let Some(kind) = block {
                    let labels: Vec<&str> = kind.junction_slots().iter().map(|s| s.0).collect();
                    for (i, pt) in points.iter().enumerate() {
                        for l in &labels {
                            if !pt.contains_key(*l) {
                                e.push(format!("loop.points[{i}]: missing junction {l}"));
                            }
                        }
                        for (k, v) in pt {
                            if !labels.contains(&k.as_str()) {
                                e.push(format!("loop.points[{i}]: junction {k} does not belong to {kind:?}"));
                            } else if !(v.abs() <= FRAC_PI_2) {
                                e.push(format!("loop.points[{i}].{k}: flux must satisfy |phi| <= pi/2, got {v}"));
                            }
                        }
                    }
                }
                if let (Some(first), Some(last)) = (points.first(), points.last()) {
                    let mismatch = first
                        .iter()
                        .map(|(k, v)| (v - last.get(k).copied().unwrap_or(f64::INFINITY)).abs())
                        .fold(0.0f64, f64::max);
                    if !(mismatch <= CLOSURE_TOL) {
                        e.push(format!("loop.points: first and last point differ by {mismatch:e}; the loop must be closed"));
                    }
                }
            }
        }
    }
}
