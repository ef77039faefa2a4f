//! Scalar literals in scenario files: plain numbers or short expressions
//! such as `"pi/3"`, `"2pi/3"`, `"-pi/4"`, `"1/300"` or `"0.5*pi"`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A number as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Expr(String),
}

impl Num {
    pub fn eval(&self) -> Result<f64, String> {
        match self {
            Num::Int(i) => Ok(*i as f64),
            Num::Float(f) => Ok(*f),
            Num::Expr(s) => eval(s),
        }
    }
}

fn factor(tok: &str) -> Result<f64, String> {
    let t = tok.trim();
    if t.is_empty() {
        return Err("empty operand".into());
    }
    if t == "pi" {
        return Ok(PI);
    }
    if let Some(coef) = t.strip_suffix("pi") {
        return Ok(coef.trim().parse::<f64>().map_err(|_| format!("bad coefficient '{coef}'"))? * PI);
    }
    t.parse::<f64>().map_err(|_| format!("cannot read '{t}' as a number"))
}

/// Evaluate a product/quotient of numbers and `pi` with an optional sign.
pub fn eval(s: &str) -> Result<f64, String> {
    let src = s.trim();
    let (sign, body) = match src.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, src.strip_prefix('+').unwrap_or(src)),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut start = 0;
    let bytes: Vec<char> = body.chars().collect();
    let mut parts = Vec::new();
    for (i, c) in bytes.iter().enumerate() {
        if (*c == '*' || *c == '/') && i > 0 && !matches!(bytes[i - 1], 'e' | 'E') {
            parts.push((op, bytes[start..i].iter().collect::<String>()));
            op = *c;
            start = i + 1;
        }
    }
    parts.push((op, bytes[start..].iter().collect::<String>()));
    for (op, tok) in parts {
        let v = factor(&tok).map_err(|e| format!("'{s}': {e}"))?;
        if op == '*' {
            value *= v;
        } else {
            if v == 0.0 {
                return Err(format!("'{s}': division by zero"));
            }
            value /= v;
        }
    }
    let out = sign * value;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(eval("pi/3").unwrap(), PI / 3.0);
        assert_eq!(eval("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(eval("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(eval("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(eval("1/300").unwrap(), 1.0 / 300.0);
        assert_eq!(eval("1e-3").unwrap(), 1e-3);
        assert_eq!(eval(" 0.25 ").unwrap(), 0.25);
        assert!(eval("pi/0").is_err());
        assert!(eval("tau").is_err());
        assert!(eval("").is_err());
    }
}
