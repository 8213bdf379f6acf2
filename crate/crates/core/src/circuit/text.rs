//! QASM-2-style text form of [`Circuit`].
//!
//! One statement per line, lowercase mnemonics, angles in decimal radians.
//! Provenance and layer boundaries travel in `// qvbench ...` and `// layer`
//! comment lines so the output stays loadable by ordinary QASM readers.

use std::fmt::Write as _;

use super::{Circuit, CircuitMeta, CircuitSource, Operation};
use crate::error::{Error, Result};
use crate::gates::GateKind;

const META_TAG: &str = "// qvbench";
const LAYER_TAG: &str = "// layer";

pub fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = write!(out, "{META_TAG} source={}", c.meta.source.as_str());
    if let Some(seed) = c.meta.seed {
        let _ = write!(out, " seed={seed}");
    }
    if let Some(index) = c.meta.circuit_index {
        let _ = write!(out, " index={index}");
    }
    out.push('\n');
    let _ = writeln!(out, "qreg q[{}];", c.width);
    let _ = writeln!(out, "creg c[{}];", c.width);

    let starts = c.meta.layer_boundaries.as_deref().unwrap_or(&[]);
    let mut next_layer = 0;
    for (i, op) in c.ops.iter().enumerate() {
        while next_layer < starts.len() && starts[next_layer] == i {
            let _ = writeln!(out, "{LAYER_TAG} {next_layer}");
            next_layer += 1;
        }
        out.push_str(op.gate.mnemonic());
        if !op.params.is_empty() {
            out.push('(');
            for (k, p) in op.params.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{p:?}");
            }
            out.push(')');
        }
        out.push(' ');
        for (k, q) in op.qubits.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "q[{q}]");
        }
        out.push_str(";\n");
    }
    // Layers that start after the last op are empty.
    while next_layer < starts.len() {
        let _ = writeln!(out, "{LAYER_TAG} {next_layer}");
        next_layer += 1;
    }
    for (q, &m) in c.measured.iter().enumerate() {
        if m {
            let _ = writeln!(out, "measure q[{q}] -> c[{q}];");
        }
    }
    out
}

/// Parses circuit text, logging any ignored vendor statements.
pub fn parse(text: &str) -> Result<Circuit> {
    let (c, warnings) = parse_with_warnings(text)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(c)
}

/// Parses circuit text and returns the ignored-statement warnings alongside it.
pub fn parse_with_warnings(text: &str) -> Result<(Circuit, Vec<String>)> {
    let mut parser = Parser::default();
    for (n, raw) in text.lines().enumerate() {
        parser.line(n + 1, raw.trim())?;
    }
    let circuit = parser.circuit.ok_or_else(|| Error::Parse {
        line: text.lines().count().max(1),
        message: "missing qreg declaration".into(),
    })?;
    let mut circuit = circuit;
    if parser.meta_seen {
        circuit.meta.seed = parser.meta.seed;
        circuit.meta.circuit_index = parser.meta.circuit_index;
        circuit.meta.source = parser.meta.source;
    }
    if !parser.layers.is_empty() {
        circuit.meta.layer_boundaries = Some(parser.layers);
    }
    Ok((circuit, parser.warnings))
}

#[derive(Default)]
struct Parser {
    circuit: Option<Circuit>,
    qreg: String,
    meta: CircuitMeta,
    meta_seen: bool,
    layers: Vec<usize>,
    warnings: Vec<String>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl Parser {
    fn line(&mut self, n: usize, line: &str) -> Result<()> {
        if line.is_empty() {
            return Ok(());
        }
        if let Some(rest) = line.strip_prefix(META_TAG) {
            return self.meta_line(n, rest);
        }
        if line.starts_with(LAYER_TAG) {
            let count = self.circuit.as_ref().map(|c| c.ops.len()).unwrap_or(0);
            self.layers.push(count);
            return Ok(());
        }
        if line.starts_with("//") {
            return Ok(());
        }
        if line.starts_with('#') || line.starts_with("pragma") {
            self.warnings
                .push(format!("line {n}: ignored vendor directive `{line}`"));
            return Ok(());
        }
        let stmt = line
            .split("//")
            .next()
            .unwrap_or("")
            .trim()
            .strip_suffix(';')
            .ok_or_else(|| err(n, format!("expected `;` at end of `{line}`")))?
            .trim();
        let (head, rest) = match stmt.find(|ch: char| ch.is_whitespace() || ch == '(') {
            Some(i) => (&stmt[..i], stmt[i..].trim()),
            None => (stmt, ""),
        };
        match head {
            "OPENQASM" | "include" | "creg" => Ok(()),
            "qreg" => self.qreg(n, rest),
            "measure" => self.measure(n, rest),
            "barrier" => Ok(()),
            "reset" => {
                self.warnings
                    .push(format!("line {n}: ignored vendor statement `{stmt}`"));
                Ok(())
            }
            _ => self.gate(n, head, rest),
        }
    }

    fn meta_line(&mut self, n: usize, rest: &str) -> Result<()> {
        self.meta_seen = true;
        for field in rest.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| err(n, format!("malformed metadata field `{field}`")))?;
            let bad = || err(n, format!("malformed metadata value `{field}`"));
            match k {
                "seed" => self.meta.seed = Some(v.parse().map_err(|_| bad())?),
                "index" => self.meta.circuit_index = Some(v.parse().map_err(|_| bad())?),
                "source" => {
                    self.meta.source = match v {
                        "generated" => CircuitSource::Generated,
                        "compiled" => CircuitSource::Compiled,
                        "external" => CircuitSource::External,
                        _ => return Err(bad()),
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn qreg(&mut self, n: usize, rest: &str) -> Result<()> {
        if self.circuit.is_some() {
            return Err(err(n, "only one qreg is supported"));
        }
        let (name, size) = parse_indexed(rest).ok_or_else(|| err(n, "malformed qreg"))?;
        self.qreg = name.to_string();
        let mut c = Circuit::new(size);
        c.meta.source = CircuitSource::External;
        self.circuit = Some(c);
        Ok(())
    }

    fn circuit_mut(&mut self, n: usize) -> Result<&mut Circuit> {
        self.circuit
            .as_mut()
            .ok_or_else(|| err(n, "statement before qreg declaration"))
    }

    fn qubit(&mut self, n: usize, token: &str) -> Result<usize> {
        let (name, idx) =
            parse_indexed(token).ok_or_else(|| err(n, format!("malformed qubit `{token}`")))?;
        if name != self.qreg {
            return Err(err(n, format!("unknown register `{name}`")));
        }
        let width = self.circuit_mut(n)?.width;
        if idx >= width {
            return Err(err(
                n,
                format!("qubit index {idx} out of range for width {width}"),
            ));
        }
        Ok(idx)
    }

    fn measure(&mut self, n: usize, rest: &str) -> Result<()> {
        let (q, _) = rest
            .split_once("->")
            .ok_or_else(|| err(n, "malformed measure"))?;
        let q = self.qubit(n, q.trim())?;
        self.circuit_mut(n)?.measured[q] = true;
        Ok(())
    }

    fn gate(&mut self, n: usize, name: &str, rest: &str) -> Result<()> {
        let gate = GateKind::from_mnemonic(name)
            .ok_or_else(|| err(n, format!("unknown gate `{name}`")))?;
        let (params, args) = if let Some(inner) = rest.strip_prefix('(') {
            let close = inner
                .find(')')
                .ok_or_else(|| err(n, "unbalanced parenthesis"))?;
            let params = inner[..close]
                .split(',')
                .map(|p| eval_angle(p).ok_or_else(|| err(n, format!("bad angle `{p}`"))))
                .collect::<Result<Vec<_>>>()?;
            (params, inner[close + 1..].trim())
        } else {
            (Vec::new(), rest)
        };
        if params.len() != gate.param_count() {
            return Err(err(
                n,
                format!(
                    "{gate} expects {} parameter(s), got {}",
                    gate.param_count(),
                    params.len()
                ),
            ));
        }
        let qubits = args
            .split(',')
            .map(|t| self.qubit(n, t.trim()))
            .collect::<Result<Vec<_>>>()?;
        if qubits.len() != gate.arity() {
            return Err(err(
                n,
                format!("{gate} acts on {} qubit(s), got {}", gate.arity(), qubits.len()),
            ));
        }
        if gate.arity() == 2 && qubits[0] == qubits[1] {
            return Err(err(n, format!("{gate} repeats qubit {}", qubits[0])));
        }
        self.circuit_mut(n)?
            .ops
            .push(Operation::new(gate, params, qubits));
        Ok(())
    }
}

fn parse_indexed(s: &str) -> Option<(&str, usize)> {
    let open = s.find('[')?;
    let close = s.find(']')?;
    let name = s[..open].trim();
    if name.is_empty() || close < open || !s[close + 1..].trim().is_empty() {
        return None;
    }
    Some((name, s[open + 1..close].trim().parse().ok()?))
}

/// Evaluates an angle expression: numbers, `pi`, `+ - * /`, unary minus, parentheses.
fn eval_angle(src: &str) -> Option<f64> {
    let tokens = tokenize(src)?;
    let mut pos = 0;
    let v = expr(&tokens, &mut pos)?;
    (pos == tokens.len()).then_some(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(src: &str) -> Option<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "pi" => out.push(Tok::Num(std::f64::consts::PI)),
                _ => return None,
            }
        } else {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '-' || chars[i] == '+')
                        && i > start
                        && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            if i == start {
                return None;
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Tok::Num(word.parse().ok()?));
        }
    }
    Some(out)
}

fn expr(t: &[Tok], pos: &mut usize) -> Option<f64> {
    let mut v = term(t, pos)?;
    while let Some(Tok::Op(op @ ('+' | '-'))) = t.get(*pos).copied() {
        *pos += 1;
        let r = term(t, pos)?;
        v = if op == '+' { v + r } else { v - r };
    }
    Some(v)
}

fn term(t: &[Tok], pos: &mut usize) -> Option<f64> {
    let mut v = factor(t, pos)?;
    while let Some(Tok::Op(op @ ('*' | '/'))) = t.get(*pos).copied() {
        *pos += 1;
        let r = factor(t, pos)?;
        v = if op == '*' { v * r } else { v / r };
    }
    Some(v)
}

fn factor(t: &[Tok], pos: &mut usize) -> Option<f64> {
    match t.get(*pos).copied()? {
        Tok::Num(v) => {
            *pos += 1;
            Some(v)
        }
        Tok::Op('-') => {
            *pos += 1;
            factor(t, pos).map(|v| -v)
        }
        Tok::Op('+') => {
            *pos += 1;
            factor(t, pos)
        }
        Tok::Op('(') => {
            *pos += 1;
            let v = expr(t, pos)?;
            (t.get(*pos) == Some(&Tok::Op(')'))).then(|| {
                *pos += 1;
                v
            })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use GateKind::*;

    #[test]
    fn round_trip_small() {
        let mut c = Circuit::new(2);
        c.push(Operation::one(U3, vec![1.0, 2.0, 3.0], 0));
        c.push(Operation::two(Cx, vec![], 0, 1));
        c.measure_all();
        let text = serialize(&c);
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn unknown_gate_is_named() {
        let text = "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n";
        let e = parse(text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("foo") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn header_and_range_errors() {
        assert!(matches!(
            parse("OPENQASM 2.0;\nx q[0];\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse("OPENQASM 2.0;\n"), Err(Error::Parse { .. })));
        let e = parse("qreg q[2];\ncx q[0],q[2];\n").unwrap_err();
        assert!(e.to_string().contains("out of range"));
    }

    #[test]
    fn layer_annotations_survive() {
        // Three layers of U3/CX on three qubits, the raw form of an m=3 model circuit.
        let mut text = String::from("OPENQASM 2.0;\nqreg q[3];\ncreg c[3];\n");
        for (layer, (a, b)) in [(0, 1), (1, 2), (2, 0)].iter().enumerate() {
            text += &format!("// layer {layer}\n");
            text += &format!("u3(0.1,0.2,0.3) q[{a}];\nu3(pi/2,0,-pi) q[{b}];\ncx q[{a}],q[{b}];\n");
        }
        let c = parse(&text).unwrap();
        assert_eq!(c.meta.layer_boundaries, Some(vec![0, 3, 6]));
        assert!((c.ops[1].params[0] - PI / 2.0).abs() < 1e-15);
        assert!((c.ops[1].params[2] + PI).abs() < 1e-15);
    }

    #[test]
    fn vendor_statements_warn() {
        let text = "qreg q[1];\n#pragma ACTIVE_RESET\nreset q[0];\nbarrier q[0];\nx q[0];\n";
        let (c, w) = parse_with_warnings(text).unwrap();
        assert_eq!(c.ops.len(), 1);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn angle_expressions() {
        assert_eq!(eval_angle("-pi/4"), Some(-PI / 4.0));
        assert_eq!(eval_angle("2*(pi-1)"), Some(2.0 * (PI - 1.0)));
        assert_eq!(eval_angle("1.5e-3"), Some(1.5e-3));
        assert_eq!(eval_angle("tau"), None);
        assert_eq!(eval_angle("1+"), None);
    }

    fn arb_op(width: usize) -> impl Strategy<Value = Operation> {
        (0..GateKind::ALL.len(), any::<u64>(), prop::collection::vec(-1e3f64..1e3, 3)).prop_map(
            move |(g, pick, angles)| {
                let gate = GateKind::ALL[g];
                let a = (pick % width as u64) as usize;
                let b = (a + 1 + (pick / 7 % (width as u64 - 1)) as usize) % width;
                let qubits = if gate.arity() == 1 { vec![a] } else { vec![a, b] };
                Operation::new(gate, angles[..gate.param_count()].to_vec(), qubits)
            },
        )
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (2usize..6).prop_flat_map(|w| {
            (
                prop::collection::vec(arb_op(w), 0..40),
                prop::collection::vec(any::<bool>(), w),
                prop::option::of(any::<u64>()),
            )
                .prop_map(move |(ops, measured, seed)| {
                    let mut c = Circuit::new(w);
                    let n = ops.len();
                    c.ops = ops;
                    c.measured = measured;
                    c.meta.seed = seed;
                    c.meta.circuit_index = seed.map(|s| s % 1000);
                    c.meta.layer_boundaries = Some(vec![0, n / 2, n]);
                    c
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn serialize_parse_is_identity(c in arb_circuit()) {
            prop_assert!(validate(&c).is_empty());
            let back = parse(&serialize(&c)).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
