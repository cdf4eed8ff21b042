//! Line-oriented signal files: a `#dim d` header, then one
//! `position<TAB>value` line per entry in strictly increasing position
//! order.

use chainpursuit::SparseSignal;

use crate::CliError;

pub fn to_string(signal: &SparseSignal) -> String {
    let mut out = format!("#dim {}\n", signal.dimension());
    for (position, value) in signal.iter() {
        out.push_str(&format!("{position}\t{value}\n"));
    }
    out
}

pub fn parse(text: &str, path: &str) -> Result<SparseSignal, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::validation(format!("{path}: empty signal file")))?;
    let dimension: usize = header
        .strip_prefix("#dim ")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| CliError::validation(format!("{path}: expected '#dim d' header")))?;
    let mut signal = SparseSignal::new(dimension);
    let mut previous: Option<usize> = None;
    for (number, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let position: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| CliError::validation(format!("{path}:{}: bad position", number + 2)))?;
        let value: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| CliError::validation(format!("{path}:{}: bad value", number + 2)))?;
        if fields.next().is_some() {
            return Err(CliError::validation(format!(
                "{path}:{}: trailing fields",
                number + 2
            )));
        }
        if !value.is_finite() {
            return Err(CliError::validation(format!(
                "{path}:{}: value must be finite",
                number + 2
            )));
        }
        if position >= dimension {
            return Err(CliError::validation(format!(
                "{path}:{}: position {position} out of range for dimension {dimension}",
                number + 2
            )));
        }
        if previous.is_some_and(|p| position <= p) {
            return Err(CliError::validation(format!(
                "{path}:{}: positions must be strictly increasing",
                number + 2
            )));
        }
        previous = Some(position);
        signal.set(position, value);
    }
    Ok(signal)
}
