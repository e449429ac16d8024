use crate::commands::Failure;
use serde_json::Value;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Decimal rendering with 12 significant digits, trailing zeros trimmed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.11e}", x.abs());
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };
    let body = if (0..12).contains(&exp) {
        let (int, frac) = digits.split_at(exp as usize + 1);
        join(int, frac)
    } else if (-4..0).contains(&exp) {
        join("0", &format!("{}{digits}", "0".repeat((-exp - 1) as usize)))
    } else {
        let (int, frac) = digits.split_at(1);
        format!("{}e{exp}", join(int, frac))
    };
    format!("{sign}{body}")
}

fn join(int: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

/// Rounds every float in `v` to 12 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64"));
            if let Some(m) = serde_json::Number::from_f64(x) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn write_json(mut value: Value, out: Option<&Path>) -> Result<(), Failure> {
    round_floats(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("serializable");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
    let label = out.unwrap_or(Path::new("<stdout>"));
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| Failure::io(path, e))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(header).map_err(|e| Failure::io(label, e))?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt12(*x))).map_err(|e| Failure::io(label, e))?;
    }
    w.flush().map_err(|e| Failure::io(label, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(5.641636123456789), "5.64163612346");
        assert_eq!(fmt12(-0.000123456789012345), "-0.000123456789012");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(2.5e-9), "2.5e-9");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt12(100.0), "100");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    }
}
