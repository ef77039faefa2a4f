//! Execution of each subcommand on a validated scenario.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use holo_core::analysis::{ErrorBudget, REFERENCE_FIDELITY};
use holo_core::evolution::{adiabatic_gate, landau_zener_scan, minimal_gap, Schedule};
use holo_core::gates::{
    conjugated_x_rotation, extract_from_anchor, extract_logical, ideal_gate, Encoding, EncodingScheme, GateLabel,
};
use holo_core::holonomy::{
    berry_phase_z, loop_holonomy, rotation_angle_x, standard_loop, EnergySelector, ParameterLoop, Segment,
    SegmentPath, StandardLoop,
};
use holo_core::junction::JunctionParams;
use holo_core::linalg::{phase_stripped_distance, CMatrix};
use holo_core::network::{BlockKind, BlockLayout, ControlSettings};
use serde_json::{json, Value};

use crate::scenario::{set_budget_field, LoopSpec, Scenario, ScheduleSpec};
use crate::{CliError, Command, SCHEMA};

/// Flat table for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Table {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub document: Value,
    pub table: Table,
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// JSON number, or `null` when not finite.
fn jnum(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Row-major matrix of `[re, im]` pairs.
pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn matrix_cells(m: &CMatrix) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(num(m[(i, j)].re));
            out.push(num(m[(i, j)].im));
        }
    }
    out
}

fn matrix_headers(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            out.push(format!("m{i}{j}_re"));
            out.push(format!("m{i}{j}_im"));
        }
    }
    out
}

pub fn layout(s: &Scenario) -> Result<BlockLayout, CliError> {
    let j = &s.junctions;
    let out = match s.block {
        Some(BlockKind::ZBlock) => BlockLayout::z_block(j.gamma2)?,
        Some(BlockKind::XBlock) => BlockLayout::x_block(j.gamma3, j.phi3)?,
        Some(BlockKind::CzBlock) => BlockLayout::cz_block(j.gamma2, j.gamma2p, j.e_c)?,
        _ => return Err(CliError::Validation(vec!["block: required".into()])),
    };
    Ok(out)
}

/// Loop of the scenario; `samples` overrides the sample count per segment
/// (or in total for a sampled path).
pub fn build_loop(s: &Scenario, samples: Option<usize>) -> Result<ParameterLoop, CliError> {
    let spec = s
        .path
        .as_ref()
        .ok_or_else(|| CliError::Validation(vec!["loop: required".into()]))?;
    let lp = match spec {
        LoopSpec::ZRect {
            phi1_star,
            phi2_star,
            samples_per_segment,
        } => standard_loop(
            StandardLoop::ZRect {
                phi1_star: *phi1_star,
                phi2_star: *phi2_star,
            },
            samples.unwrap_or(*samples_per_segment),
            s.h,
        )?,
        LoopSpec::CzRect {
            phi1_star,
            phi2_star,
            samples_per_segment,
        } => standard_loop(
            StandardLoop::CzRect {
                phi1_star: *phi1_star,
                phi2_star: *phi2_star,
            },
            samples.unwrap_or(*samples_per_segment),
            s.h,
        )?,
        LoopSpec::XPath {
            phi_star,
            samples_per_segment,
        } => standard_loop(
            StandardLoop::XPath {
                phi_star: *phi_star,
                phi3: s.junctions.phi3,
            },
            samples.unwrap_or(*samples_per_segment),
            s.h,
        )?,
        LoopSpec::Sampled { points, samples: n } => {
            let pts = points
                .iter()
                .map(|p| ControlSettings {
                    phis: p.clone(),
                    h: s.h,
                    n_g: None,
                    e_c: None,
                })
                .collect();
            ParameterLoop::new(vec![Segment {
                path: SegmentPath::Sampled { points: pts },
                samples: samples.unwrap_or(*n),
            }])?
        }
    };
    Ok(lp)
}

fn loop_orientation(spec: Option<&LoopSpec>) -> &'static str {
    match spec {
        Some(LoopSpec::ZRect { .. }) | Some(LoopSpec::CzRect { .. }) => {
            "(phi1, phi2): (pi/2, 0) -> (pi/2, phi2*) -> (phi1*, phi2*) -> (phi1*, 0) -> (pi/2, 0); the phase junction moves first while the switch is off"
        }
        Some(LoopSpec::XPath { .. }) => {
            "(cos phi1, cos phi2): (0, 0) -> (1, c) radially, -> (c, c), -> (c, 1), -> (0, 0) radially, with c = cos phi*; phi3 fixed"
        }
        Some(LoopSpec::Sampled { .. }) => "as listed in loop.points",
        None => "none",
    }
}

fn encoding_for(kind: BlockKind) -> Result<Encoding, CliError> {
    let scheme = match kind {
        BlockKind::XBlock => EncodingScheme::TwoBox,
        _ => EncodingScheme::SingleBox,
    };
    Ok(Encoding::new(kind, scheme)?)
}

fn metadata(command: Command, s: &Scenario, extra: Value) -> Value {
    let mut m = json!({
        "generator": format!("holo-sim {}", env!("CARGO_PKG_VERSION")),
        "command": command.name(),
        "units": "all values in simulation units: energies in units of the junction Josephson energy, hbar = 1, times in hbar per energy unit",
        "conventions": {
            "charge_basis": "product of box occupations, first listed box most significant; sigma_z = |0><0| - |1><1|",
            "complex": "[re, im]",
            "matrices": "row-major",
            "global_phase": "fixed so the largest entry of the first column is real and positive",
            "distance": "Frobenius distance minimised over a global phase",
        },
        "loop_orientation": loop_orientation(s.path.as_ref()),
        "eta_normalization": "max over the schedule of the spectral norm of dH/dt equals eta * gap; gap = smallest distance from the computational level to another level of the computational pair-number sector along the loop",
        "seeds": Value::Null,
    });
    if let (Value::Object(a), Value::Object(b)) = (&mut m, extra) {
        a.extend(b);
    }
    m
}

fn document(command: Command, s: &Scenario, result: Value, meta: Value) -> Result<Value, CliError> {
    let scenario = serde_json::to_value(s).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(json!({
        "schema": SCHEMA,
        "command": command.name(),
        "scenario": scenario,
        "result": result,
        "metadata": metadata(command, s, meta),
    }))
}

pub fn run(command: Command, s: &Scenario) -> Result<Output, CliError> {
    let errs = s.check(command);
    if !errs.is_empty() {
        return Err(CliError::Validation(errs));
    }
    match command {
        Command::GateZ | Command::GateX | Command::GateCz => run_gate(command, s),
        Command::LzScan => run_lz(s),
        Command::Fidelity => run_fidelity(s),
        Command::LoopDump => run_loop_dump(s),
    }
}

struct ClosedForm {
    json: Value,
    gate: CMatrix,
}

fn closed_form(s: &Scenario, kind: BlockKind) -> Result<Option<ClosedForm>, CliError> {
    let j = &s.junctions;
    let out = match (kind, s.path.as_ref()) {
        (BlockKind::ZBlock, Some(LoopSpec::ZRect { phi1_star, phi2_star, .. }))
        | (BlockKind::CzBlock, Some(LoopSpec::CzRect { phi1_star, phi2_star, .. })) => {
            let phase = berry_phase_z(j.gamma2, *phi1_star, *phi2_star)?;
            let label = if kind == BlockKind::ZBlock { GateLabel::UZ } else { GateLabel::UCz };
            Some(ClosedForm {
                json: json!({ "berry_phase": phase, "gate": label }),
                gate: ideal_gate(label, phase)?.matrix,
            })
        }
        (BlockKind::XBlock, Some(LoopSpec::XPath { phi_star, .. })) => {
            let jp = JunctionParams::new(1.0, j.gamma3, j.phi3)?;
            let (phi, phi_prime) = rotation_angle_x(*phi_star, &jp)?;
            let c = phi_star.cos();
            let swept = 1.0f64.atan2(c) - c.atan2(1.0);
            Some(ClosedForm {
                json: json!({
                    "phi": phi,
                    "phi_prime": phi_prime,
                    "gate": "U_Z^dagger(phi') U_X(phi) U_Z(phi')",
                    "solid_angle_rotation": swept - phi,
                }),
                gate: conjugated_x_rotation(phi, phi_prime),
            })
        }
        _ => None,
    };
    Ok(out)
}

fn dynamic_schedule(
    layout: &BlockLayout,
    lp: &ParameterLoop,
    spec: &ScheduleSpec,
    eta: f64,
    gap: f64,
) -> Result<Schedule, CliError> {
    let mut sched = Schedule::with_gap(layout, lp, eta, gap, spec.profile, None)?;
    if let Some(dt) = spec.dt {
        let steps = ((sched.total_time / dt).ceil() as usize).max(1);
        sched = Schedule::with_gap(layout, lp, eta, gap, spec.profile, Some(steps))?;
    }
    Ok(sched)
}

fn run_gate(command: Command, s: &Scenario) -> Result<Output, CliError> {
    let layout = layout(s)?;
    let kind = layout.kind();
    let enc = encoding_for(kind)?;
    let basis = layout.basis();
    let closed = closed_form(s, kind)?;

    let lp = build_loop(s, None)?;
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational)?;
    let wilson = extract_logical(&hol, basis, &enc)?;
    let d_cw = closed.as_ref().map(|c| phase_stripped_distance(&c.gate, &wilson.matrix));

    let mut dynamic = Vec::new();
    let mut table_rows = Vec::new();
    let n = enc.dim();
    let mut gap_json = Value::Null;
    let mut dyn_samples = Value::Null;
    if let Some(spec) = &s.schedule {
        if !spec.etas.is_empty() {
            let coarse = build_loop(s, Some(spec.samples_per_segment))?;
            let gap = minimal_gap(&layout, &coarse, EnergySelector::Computational)?.gap;
            gap_json = json!(gap);
            dyn_samples = json!(coarse.total_samples());
            for eta in spec.etas.resolve(gap) {
                let sched = dynamic_schedule(&layout, &coarse, spec, eta, gap)?;
                let g = adiabatic_gate(&layout, &coarse, &sched)?;
                let m = extract_from_anchor(&g.unitary, &g.anchor, basis, &enc)?.matrix;
                let d_c = closed.as_ref().map(|c| phase_stripped_distance(&c.gate, &m));
                let d_w = phase_stripped_distance(&wilson.matrix, &m);
                dynamic.push(json!({
                    "eta": eta,
                    "eta_over_gap": eta / gap,
                    "total_time": sched.total_time,
                    "time_steps": sched.time_steps,
                    "gate": matrix_json(&m),
                    "leakage": g.leakage,
                    "norm_error": g.norm_error,
                    "distance_to_closed_form": d_c,
                    "distance_to_wilson": d_w,
                }));
                let mut row = vec![
                    "dynamic".to_string(),
                    num(eta),
                    num(eta / gap),
                    num(sched.total_time),
                    num(g.leakage),
                    opt(d_c),
                    num(d_w),
                ];
                row.extend(matrix_cells(&m));
                table_rows.push(row);
            }
        }
    }

    let mut headers: Vec<String> = [
        "method",
        "eta",
        "eta_over_gap",
        "total_time",
        "leakage",
        "distance_to_closed_form",
        "distance_to_wilson",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    headers.extend(matrix_headers(n));
    let mut rows = Vec::new();
    if let Some(c) = &closed {
        let mut r = vec!["closed_form".to_string(), String::new(), String::new(), String::new(), String::new()];
        r.push("0".into());
        r.push(opt(d_cw));
        r.extend(matrix_cells(&c.gate));
        rows.push(r);
    }
    let mut r = vec!["wilson".to_string(), String::new(), String::new(), String::new(), String::new()];
    r.push(opt(d_cw));
    r.push("0".into());
    r.extend(matrix_cells(&wilson.matrix));
    rows.push(r);
    rows.extend(table_rows);

    let result = json!({
        "block": kind,
        "encoding": enc,
        "closed_form": closed.as_ref().map(|c| {
            let mut v = c.json.clone();
            v["matrix"] = matrix_json(&c.gate);
            v
        }),
        "wilson": {
            "gate": matrix_json(&wilson.matrix),
            "label": wilson.label,
            "determinant": [wilson.determinant.re, wilson.determinant.im],
            "samples": hol.samples,
            "discretization_error_estimate": hol.discretization_error_estimate,
            "raw_unitarity_error": hol.raw_unitarity_error,
        },
        "gap": gap_json,
        "dynamic": dynamic,
        "distances": {
            "closed_form_vs_wilson": d_cw,
        },
    });
    let meta = json!({
        "samples": { "wilson": hol.samples, "dynamic": dyn_samples },
        "profile": s.schedule.as_ref().map(|x| x.profile),
    });
    Ok(Output {
        document: document(command, s, result, meta)?,
        table: Table { headers, rows },
    })
}

fn run_lz(s: &Scenario) -> Result<Output, CliError> {
    let layout = layout(s)?;
    let spec = s.schedule.as_ref().expect("checked");
    let lp = build_loop(s, Some(spec.samples_per_segment))?;
    let gap = minimal_gap(&layout, &lp, EnergySelector::Computational)?.gap;
    let etas = spec.etas.resolve(gap);
    let scan = landau_zener_scan(&layout, &lp, &etas, spec.profile)?;
    let fit = scan.r_squared.is_finite().then(|| {
        json!({ "slope": scan.slope, "intercept": scan.intercept, "r_squared": scan.r_squared })
    });
    let mut table = Table::new(&[
        "eta",
        "eta_over_gap",
        "inv_eta",
        "leakage",
        "ln_leakage",
        "fitted",
        "fit_ln_leakage",
        "total_time",
    ]);
    let mut rows = Vec::new();
    for r in &scan.rows {
        let ln = (r.leakage > 0.0).then(|| r.leakage.ln());
        let fitted_line = fit.as_ref().map(|_| scan.intercept + scan.slope / r.eta);
        rows.push(json!({
            "eta": r.eta,
            "eta_over_gap": r.eta / gap,
            "inv_eta": 1.0 / r.eta,
            "leakage": r.leakage,
            "ln_leakage": ln,
            "fitted": r.fitted,
            "fit_ln_leakage": fitted_line,
            "total_time": r.total_time,
        }));
        table.rows.push(vec![
            num(r.eta),
            num(r.eta / gap),
            num(1.0 / r.eta),
            num(r.leakage),
            opt(ln),
            r.fitted.to_string(),
            opt(fitted_line),
            num(r.total_time),
        ]);
    }
    let result = json!({
        "block": layout.kind(),
        "gap": gap,
        "pi_gap": PI * gap,
        "rows": rows,
        "fit": fit,
        "slope_over_pi_gap": fit.as_ref().map(|_| scan.slope.abs() / (PI * gap)),
    });
    let meta = json!({
        "samples": { "dynamic": lp.total_samples() },
        "profile": spec.profile,
        "fit": "least squares of ln(leakage) against 1/eta over rows with leakage above the numerical floor",
    });
    Ok(Output {
        document: document(Command::LzScan, s, result, meta)?,
        table,
    })
}

/// Budgets of the Cartesian product of the grid over the base budget, in
/// key order with the last key varying fastest.
pub fn budget_grid(base: &ErrorBudget, grid: &BTreeMap<String, Vec<f64>>) -> Vec<ErrorBudget> {
    let mut out = vec![*base];
    for (k, vals) in grid {
        out = out
            .iter()
            .flat_map(|b| {
                vals.iter().map(move |v| {
                    let mut nb = *b;
                    let _ = set_budget_field(&mut nb, k, *v);
                    nb
                })
            })
            .collect();
    }
    out
}

fn run_fidelity(s: &Scenario) -> Result<Output, CliError> {
    let base = s.budget.expect("checked");
    let mut table = Table::new(&[
        "delta",
        "eta",
        "tau_op",
        "delta_e",
        "delta_s",
        "e_c",
        "temperature",
        "qp_prefactor",
        "p_lz",
        "p_qp",
        "p_sum",
        "qp_exponent",
        "phase_error",
        "fidelity_lz",
        "fidelity_lz_plus_qp",
        "fidelity_reference",
        "window_lo",
        "window_hi",
    ]);
    let mut rows = Vec::new();
    for b in budget_grid(&base, &s.grid) {
        let r = b.evaluate()?;
        let p_sum = (r.lz_probability + r.qp_probability).min(1.0);
        rows.push(json!({
            "budget": b,
            "p_lz": r.lz_probability,
            "p_qp": r.qp_probability,
            "p_sum": p_sum,
            "qp_exponent": jnum(r.qp_exponent),
            "qp_rate": r.qp_rate,
            "phase_error": r.phase_error,
            "fidelity_lz": r.fidelity_lz,
            "fidelity_lz_plus_qp": r.fidelity_combined,
            "window": r.window.map(|(lo, hi)| json!([jnum(lo), jnum(hi)])),
            "warnings": r.warnings,
        }));
        let (lo, hi) = match r.window {
            Some((lo, hi)) => (num(lo), num(hi)),
            None => (String::new(), String::new()),
        };
        table.rows.push(vec![
            num(b.delta),
            num(b.eta),
            num(b.tau_op),
            num(b.delta_e),
            num(b.delta_s),
            num(b.e_c),
            num(b.temperature),
            num(b.qp_prefactor),
            num(r.lz_probability),
            num(r.qp_probability),
            num(p_sum),
            num(r.qp_exponent),
            num(r.phase_error),
            num(r.fidelity_lz),
            num(r.fidelity_combined),
            num(REFERENCE_FIDELITY),
            lo,
            hi,
        ]);
    }
    let result = json!({
        "reference_fidelity": REFERENCE_FIDELITY,
        "reference_note": "quoted reference value; the formula is not forced to reproduce it",
        "rows": rows,
    });
    let meta = json!({
        "channels": "p_lz = exp(-pi*delta/eta); p_qp = 1 - exp(-rate*tau_op); p_sum = min(p_lz + p_qp, 1); fidelity_lz uses p_lz, fidelity_lz_plus_qp uses p_sum",
        "grid_order": "Cartesian product in key order, last key fastest",
    });
    Ok(Output {
        document: document(Command::Fidelity, s, result, meta)?,
        table,
    })
}

fn run_loop_dump(s: &Scenario) -> Result<Output, CliError> {
    let layout = layout(s)?;
    let lp = build_loop(s, None)?;
    let labels: Vec<&str> = layout.kind().junction_slots().iter().map(|j| j.0).collect();
    let mut headers = vec!["index", "segment", "s"];
    headers.extend(labels.iter().copied());
    headers.push("h");
    let mut table = Table::new(&headers);
    let mut points = Vec::new();
    let nseg = lp.segments.len();
    let mut idx = 0usize;
    for (k, seg) in lp.segments.iter().enumerate() {
        let last = if k + 1 == nseg { seg.samples } else { seg.samples - 1 };
        for i in 0..=last {
            let sv = i as f64 / seg.samples as f64;
            let p = seg.point(sv);
            let mut row = vec![idx.to_string(), k.to_string(), num(sv)];
            for l in &labels {
                row.push(opt(p.phis.get(*l).copied()));
            }
            row.push(num(p.h));
            table.rows.push(row);
            points.push(json!({ "index": idx, "segment": k, "s": sv, "phis": p.phis, "h": p.h }));
            idx += 1;
        }
    }
    let result = json!({
        "block": layout.kind(),
        "closed": lp.is_closed(),
        "endpoint_mismatch": lp.endpoint_mismatch(),
        "segments": nseg,
        "points": points,
    });
    let meta = json!({ "samples": { "loop": lp.total_samples() } });
    Ok(Output {
        document: document(Command::LoopDump, s, result, meta)?,
        table,
    })
}
