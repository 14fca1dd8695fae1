//! Line-oriented sequence description.
//!
//! ```text
//! # comment
//! name cnot1
//! qubits 3
//! data_in 1,3
//! data_out 1,3
//! stage +IXI
//! stage +ZZI
//! stage +IXX
//! stage +IZI
//! ```
//!
//! Generators on a stage line are separated by `+` surrounded by spaces. A
//! generator is either a signed string (`-IY`) or a bracketed real sum
//! (`[0.6 IX, -0.8 IY]`). Qubit lists are 1-based.

use super::{FlowError, GateSequence, StageHamiltonian};
use crate::pauli::{PauliString, PauliSum};

fn parse_err(line: usize, message: impl Into<String>) -> FlowError {
    FlowError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_qubits(line: usize, text: &str) -> Result<Vec<usize>, FlowError> {
    text.split(',')
        .map(|t| {
            let q: usize = t
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad qubit index {t:?}")))?;
            if q == 0 {
                return Err(parse_err(line, "qubit indices start at 1"));
            }
            Ok(q - 1)
        })
        .collect()
}

fn parse_generator(line: usize, text: &str, n: usize) -> Result<PauliSum, FlowError> {
    let text = text.trim();
    let check = |s: PauliString| {
        if s.n_qubits() == n {
            Ok(s)
        } else {
            Err(parse_err(line, format!("{s} does not act on {n} qubits")))
        }
    };
    if let Some(inner) = text.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| parse_err(line, "unterminated '['"))?;
        let mut terms = Vec::new();
        for part in inner.split(',') {
            let mut it = part.split_whitespace();
            let (Some(c), Some(s), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(line, format!("expected 'coefficient string', got {part:?}")));
            };
            let c: f64 = c
                .parse()
                .map_err(|_| parse_err(line, format!("bad coefficient {c:?}")))?;
            let s: PauliString = s.parse().map_err(|e: crate::pauli::PauliError| parse_err(line, e.to_string()))?;
            terms.push((c, check(s)?));
        }
        let sum = PauliSum::from_terms(n, &terms).map_err(|e| parse_err(line, e.to_string()))?;
        if sum.is_zero() {
            return Err(parse_err(line, "generator sums to zero"));
        }
        Ok(sum)
    } else {
        let s: PauliString = text.parse().map_err(|e: crate::pauli::PauliError| parse_err(line, e.to_string()))?;
        Ok(PauliSum::from_string(&check(s)?))
    }
}

fn split_generators(text: &str) -> Vec<&str> {
    // '+' also opens signed strings, so only a spaced '+' outside brackets separates.
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'[' => depth += 1,
            b']' => depth = depth.saturating_sub(1),
            b'+' if depth == 0
                && i > 0
                && bytes[i - 1] == b' '
                && bytes.get(i + 1) == Some(&b' ') =>
            {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

pub fn parse_sequence(text: &str) -> Result<GateSequence, FlowError> {
    let mut name = None;
    let mut n = None;
    let mut data_in = None;
    let mut data_out = None;
    let mut stages = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        match key {
            "name" => name = Some(rest.to_string()),
            "qubits" => {
                n = Some(
                    rest.parse::<usize>()
                        .map_err(|_| parse_err(line, format!("bad qubit count {rest:?}")))?,
                )
            }
            "data_in" => data_in = Some(parse_qubits(line, rest)?),
            "data_out" => data_out = Some(parse_qubits(line, rest)?),
            "stage" => {
                let n = n.ok_or_else(|| parse_err(line, "'qubits' must precede stages"))?;
                let gens = split_generators(rest)
                    .into_iter()
                    .map(|g| parse_generator(line, g, n))
                    .collect::<Result<Vec<_>, _>>()?;
                let stage = StageHamiltonian::canonical(gens.clone())
                    .or_else(|_| StageHamiltonian::new(gens))
                    .map_err(|e| parse_err(line, e.to_string()))?;
                stages.push(stage);
            }
            other => return Err(parse_err(line, format!("unknown directive {other:?}"))),
        }
    }

    let missing = |what: &str| parse_err(last_line, format!("missing '{what}'"));
    let n = n.ok_or_else(|| missing("qubits"))?;
    let data_in = data_in.ok_or_else(|| missing("data_in"))?;
    let data_out = data_out.ok_or_else(|| missing("data_out"))?;
    GateSequence::new(name.unwrap_or_default(), n, data_in, data_out, stages).map_err(|e| match e {
        FlowError::Parse { .. } => e,
        other => parse_err(last_line, other.to_string()),
    })
}

fn render_generator(g: &PauliSum) -> String {
    match g.as_signed_string() {
        Some(s) => s.to_string(),
        None => format!("[{g}]"),
    }
}

fn render_qubits(qs: &[usize]) -> String {
    qs.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn render_sequence(seq: &GateSequence) -> String {
    let mut out = String::new();
    if !seq.name.is_empty() {
        out.push_str(&format!("name {}\n", seq.name));
    }
    out.push_str(&format!("qubits {}\n", seq.n_qubits()));
    out.push_str(&format!("data_in {}\n", render_qubits(seq.data_in())));
    out.push_str(&format!("data_out {}\n", render_qubits(seq.data_out())));
    for stage in seq.stages() {
        let gens: Vec<String> = stage.generators().iter().map(render_generator).collect();
        out.push_str(&format!("stage {}\n", gens.join(" + ")));
    }
    out
}
