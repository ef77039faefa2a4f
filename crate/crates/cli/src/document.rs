//! Result documents: schema tag and structural validation.

use serde_json::Value;

use crate::pipeline::budget_grid;
use crate::scenario::Scenario;
use crate::Command;

pub const SCHEMA: &str = "holo-sim/1";

fn check_matrix(v: &Value, n: usize, name: &str, errs: &mut Vec<String>) {
    let Some(rows) = v.as_array() else {
        errs.push(format!("{name}: not an array"));
        return;
    };
    if rows.len() != n {
        errs.push(format!("{name}: expected {n} rows, found {}", rows.len()));
    }
    for (i, r) in rows.iter().enumerate() {
        let cells = r.as_array().map(|c| c.as_slice()).unwrap_or(&[]);
        if cells.len() != n {
            errs.push(format!("{name}[{i}]: expected {n} entries"));
        }
        for (j, z) in cells.iter().enumerate() {
            let ok = z
                .as_array()
                .is_some_and(|p| p.len() == 2 && p.iter().all(|x| x.as_f64().is_some_and(f64::is_finite)));
            if !ok {
                errs.push(format!("{name}[{i}][{j}]: expected a finite [re, im] pair"));
            }
        }
    }
}

fn require<'a>(v: &'a Value, path: &str, errs: &mut Vec<String>) -> Option<&'a Value> {
    let mut cur = v;
    for key in path.split('.') {
        match cur.get(key) {
            Some(next) => cur = next,
            None => {
                errs.push(format!("missing field {path}"));
                return None;
            }
        }
    }
    Some(cur)
}

fn finite(v: &Value, path: &str, errs: &mut Vec<String>) {
    if let Some(x) = require(v, path, errs) {
        if !x.as_f64().is_some_and(f64::is_finite) {
            errs.push(format!("{path}: expected a finite number"));
        }
    }
}

/// Check that a result document is well formed and that its embedded
/// scenario re-validates for the command that produced it.
pub fn validate_document(doc: &Value) -> Result<(), Vec<String>> {
    let mut errs = Vec::new();
    if doc.get("schema").and_then(Value::as_str) != Some(SCHEMA) {
        errs.push(format!("schema: expected \"{SCHEMA}\""));
    }
    let command = match doc.get("command").and_then(Value::as_str).and_then(Command::from_name) {
        Some(c) => c,
        None => {
            errs.push("command: missing or unknown".into());
            return Err(errs);
        }
    };
    if doc.pointer("/metadata/command").and_then(Value::as_str) != Some(command.name()) {
        errs.push("metadata.command: does not match command".into());
    }
    require(doc, "metadata.conventions", &mut errs);
    require(doc, "metadata.loop_orientation", &mut errs);
    let scenario: Option<Scenario> = match doc.get("scenario") {
        Some(s) => match serde_json::from_value(s.clone()) {
            Ok(sc) => Some(sc),
            Err(e) => {
                errs.push(format!("scenario: {e}"));
                None
            }
        },
        None => {
            errs.push("missing field scenario".into());
            None
        }
    };
    if let Some(sc) = &scenario {
        errs.extend(sc.check(command).into_iter().map(|e| format!("scenario: {e}")));
    }
    let Some(result) = require(doc, "result", &mut errs) else {
        return Err(errs);
    };
    match command {
        Command::GateZ | Command::GateX | Command::GateCz => {
            let n = if command == Command::GateCz { 4 } else { 2 };
            if let Some(m) = require(result, "wilson.gate", &mut errs) {
                check_matrix(m, n, "result.wilson.gate", &mut errs);
            }
            match result.get("closed_form") {
                Some(Value::Null) => {}
                Some(cf) => {
                    if let Some(m) = require(cf, "matrix", &mut errs) {
                        check_matrix(m, n, "result.closed_form.matrix", &mut errs);
                    }
                }
                None => errs.push("missing field closed_form".into()),
            }
            let dynamic = require(result, "dynamic", &mut errs).and_then(Value::as_array);
            let expected = scenario
                .as_ref()
                .and_then(|s| s.schedule.as_ref())
                .map_or(0, |s| s.etas.len());
            match dynamic {
                Some(rows) => {
                    if rows.len() != expected {
                        errs.push(format!("result.dynamic: expected {expected} rows, found {}", rows.len()));
                    }
                    for (i, r) in rows.iter().enumerate() {
                        if let Some(m) = r.get("gate") {
                            check_matrix(m, n, &format!("result.dynamic[{i}].gate"), &mut errs);
                        } else {
                            errs.push(format!("result.dynamic[{i}]: missing gate"));
                        }
                        for f in ["eta", "leakage", "distance_to_wilson", "total_time"] {
                            finite(r, f, &mut errs);
                        }
                    }
                }
                None => errs.push("result.dynamic: expected an array".into()),
            }
            require(result, "distances", &mut errs);
        }
        Command::LzScan => {
            finite(result, "gap", &mut errs);
            let expected = scenario
                .as_ref()
                .and_then(|s| s.schedule.as_ref())
                .map_or(0, |s| s.etas.len());
            match result.get("rows").and_then(Value::as_array) {
                Some(rows) => {
                    if rows.len() != expected {
                        errs.push(format!("result.rows: expected {expected} rows, found {}", rows.len()));
                    }
                    for r in rows {
                        finite(r, "eta", &mut errs);
                        finite(r, "leakage", &mut errs);
                    }
                }
                None => errs.push("result.rows: expected an array".into()),
            }
        }
        Command::Fidelity => {
            finite(result, "reference_fidelity", &mut errs);
            let expected = scenario
                .as_ref()
                .and_then(|s| s.budget.as_ref().map(|b| budget_grid(b, &s.grid).len()))
                .unwrap_or(0);
            match result.get("rows").and_then(Value::as_array) {
                Some(rows) => {
                    if rows.len() != expected {
                        errs.push(format!("result.rows: expected {expected} rows, found {}", rows.len()));
                    }
                    for r in rows {
                        for f in ["fidelity_lz", "fidelity_lz_plus_qp", "p_lz", "p_qp", "p_sum", "phase_error"] {
                            finite(r, f, &mut errs);
                        }
                    }
                }
                None => errs.push("result.rows: expected an array".into()),
            }
        }
        Command::LoopDump => match result.get("points").and_then(Value::as_array) {
            Some(p) if p.len() >= 2 => {}
            _ => errs.push("result.points: expected at least two points".into()),
        },
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}
