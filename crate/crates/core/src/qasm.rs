//! OpenQASM 3 export.
//!
//! Partial swaps and dense blocks become `gate` definitions whose bodies are
//! their native lowering; the exact matrix is written as a comment above each
//! definition. Single-qubit matrices are emitted as `U(θ, φ, λ)` plus a
//! `gphase` when the global phase is nonzero.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_complex::Complex64;

use crate::circuit::{Gate, GateProgram};
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::transpile::synth::lower_gate;

const EPS: f64 = 1e-12;

/// `(θ, φ, λ, γ)` with `m = e^{iγ} U(θ, φ, λ)`.
pub fn zyz(m: &CMatrix) -> (f64, f64, f64, f64) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let theta = 2.0 * c.norm().atan2(a.norm());
    if a.norm() > EPS {
        let gamma = a.arg();
        let (phi, lambda) = if c.norm() > EPS {
            (c.arg() - gamma, (-b).arg() - gamma)
        } else {
            (0.0, d.arg() - gamma)
        };
        (theta, phi, lambda, gamma)
    } else {
        let gamma = (-b).arg();
        (theta, c.arg() - gamma, 0.0, gamma)
    }
}

pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = |x: f64| Complex64::from_polar(1.0, x);
    CMatrix::from_rows(&[
        &[c.into(), -e(lambda) * s],
        &[e(phi) * s, e(phi + lambda) * c],
    ])
}

fn fmt_angle(x: f64) -> String {
    let r = format!("{x:.15}");
    let r = r.trim_end_matches('0').trim_end_matches('.');
    if r == "-0" { "0".into() } else { r.into() }
}

fn emit_native(out: &mut String, g: &Gate, name: &dyn Fn(usize) -> String) {
    match g {
        Gate::OneQubit { qubit, matrix, .. } => {
            let (t, p, l, gamma) = zyz(matrix);
            if t.abs() > EPS || p.abs() > EPS || l.abs() > EPS {
                let _ = writeln!(
                    out,
                    "  U({}, {}, {}) {};",
                    fmt_angle(t),
                    fmt_angle(p),
                    fmt_angle(l),
                    name(*qubit)
                );
            }
            if gamma.abs() > EPS {
                let _ = writeln!(out, "  gphase({});", fmt_angle(gamma));
            }
        }
        Gate::Cnot { control, target } => {
            let _ = writeln!(out, "  cx {}, {};", name(*control), name(*target));
        }
        _ => unreachable!("non-native gate after lowering"),
    }
}

fn matrix_comment(m: &CMatrix) -> String {
    let dim = m.dim();
    let rows: Vec<String> = (0..dim)
        .map(|r| {
            let cells: Vec<String> = (0..dim)
                .map(|c| {
                    let z = m[(r, c)];
                    format!("{}{:+}i", fmt_angle(z.re), fmt_angle(z.im).parse::<f64>().unwrap_or(0.0))
                })
                .collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("// unitary: [{}]", rows.join(", "))
}

/// OpenQASM 3 text for `p`. Bit `i` of the classical register is qubit `i`.
pub fn to_qasm(p: &GateProgram) -> Result<String> {
    let mut defs = String::new();
    let mut body = String::new();
    let mut defined: BTreeMap<String, String> = BTreeMap::new();
    let n = p.qubit_count;
    let _ = writeln!(body, "qubit[{n}] q;\nbit[{n}] c;");
    for g in &p.gates {
        match g {
            Gate::MeasureAll => {
                let _ = writeln!(body, "c = measure q;");
            }
            Gate::OneQubit { .. } | Gate::Cnot { .. } => {
                let mut s = String::new();
                emit_native(&mut s, g, &|q| format!("q[{q}]"));
                body.push_str(&s.replace("  ", ""));
            }
            Gate::Swap { a, b } => {
                let _ = writeln!(body, "swap q[{a}], q[{b}];");
            }
            Gate::PartialSwap { .. } | Gate::Unitary { .. } => {
                let qubits = g.qubits();
                let local = g.remap(|q| qubits.iter().position(|&x| x == q).expect("operand"));
                let key = serde_json::to_string(&local).expect("gate serializes");
                let count = defined.len();
                let name = defined
                    .entry(key)
                    .or_insert_with(|| {
                        let base = match g {
                            Gate::PartialSwap { .. } => "pswap".to_string(),
                            Gate::Unitary { name, .. } => name.replace(|c: char| !c.is_ascii_alphanumeric(), "_"),
                            _ => unreachable!(),
                        };
                        let name = format!("{base}_{count}");
                        let args: Vec<String> = (0..qubits.len()).map(|i| format!("a{i}")).collect();
                        let _ = writeln!(defs, "{}", matrix_comment(&g.matrix().expect("unitary")));
                        let _ = writeln!(defs, "gate {name} {} {{", args.join(", "));
                        for ng in lower_gate(&local).expect("lowerable block") {
                            emit_native(&mut defs, &ng, &|i| format!("a{i}"));
                        }
                        let _ = writeln!(defs, "}}");
                        name
                    })
                    .clone();
                let ops: Vec<String> = qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(body, "{name} {};", ops.join(", "));
            }
        }
    }
    // surface lowering failures as errors rather than panics
    for g in &p.gates {
        lower_gate(g)?;
    }
    Ok(format!(
        "OPENQASM 3.0;\ninclude \"stdgates.inc\";\n// program hash {}\n{defs}{body}",
        p.hash()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SegmentKind;
    use crate::linalg::gates;

    #[test]
    fn zyz_reconstructs() {
        let cases = [
            gates::ry(0.7),
            gates::rz(1.3),
            gates::x(),
            gates::y(),
            &gates::rz(0.4) * &gates::ry(2.1),
            gates::global_phase(0.9),
        ];
        for m in cases {
            let (t, p, l, g) = zyz(&m);
            let mut u = u_matrix(t, p, l);
            for v in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                u[v] *= Complex64::from_polar(1.0, g);
            }
            assert!(u.max_abs_diff(&m) < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn export_defines_blocks_once() {
        let p = GateProgram::from_gates(
            3,
            SegmentKind::Shift,
            vec![
                Gate::x(0),
                Gate::PartialSwap { a: 0, b: 1, alpha: 0.5 },
                Gate::PartialSwap { a: 1, b: 2, alpha: 0.5 },
                Gate::cnot(2, 0),
                Gate::MeasureAll,
            ],
        );
        let text = to_qasm(&p).unwrap();
        assert!(text.starts_with("OPENQASM 3.0;"));
        assert_eq!(text.matches("gate pswap_0").count(), 1);
        assert!(text.contains("pswap_0 q[1], q[2];"));
        assert!(text.contains("// unitary:"));
        assert!(text.contains("cx q[2], q[0];"));
        assert!(text.contains("c = measure q;"));
    }
}
