//! JSON shapes of the command outputs. Every command emits the same set of
//! fields regardless of input; absent values are `null`.

use antitone_core::iterate::{BracketReport, IterationTrace, Verdict};
use antitone_core::linalg::SquareMatrix;
use antitone_core::matclass::{MatrixClassCertificate, Method, MinorIndexSet, Witness};
use antitone_core::solve::{Certificate, Hypothesis, RootMethod, SolveReport, SweepReport};
use antitone_core::system::{GridClass, GridReduction};
use serde_json::{json, Value};

pub fn matrix(m: &SquareMatrix) -> Value {
    // `+ 0.0` turns -0.0 into 0.0
    json!(m.rows().map(|r| r.iter().map(|v| v + 0.0).collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn one_based(s: &MinorIndexSet) -> Vec<usize> {
    s.indices().iter().map(|i| i + 1).collect()
}

fn method(m: Method) -> &'static str {
    match m {
        Method::EntryScan => "entry-scan",
        Method::SpectralRadius => "spectral-radius",
        Method::MinorEnumeration => "minor-enumeration",
        Method::DiagPolynomialSampling => "diag-polynomial-sampling",
    }
}

fn witness(w: &Option<Witness>) -> Value {
    match w {
        None => Value::Null,
        Some(Witness::Entry { row, col, value }) => json!({ "kind": "entry", "row": row + 1, "col": col + 1, "value": value }),
        Some(Witness::Minor { indices, value }) => json!({ "kind": "minor", "indices": one_based(indices), "value": value }),
        Some(Witness::SpectralRadius { shift, rho }) => json!({ "kind": "spectral-radius", "shift": shift, "rho": rho }),
    }
}

pub fn class_certificate(c: &MatrixClassCertificate) -> Value {
    json!({
        "holds": c.holds,
        "method": method(c.method),
        "witness": witness(&c.witness),
        "boundary": c.boundary.iter().map(one_based).collect::<Vec<_>>(),
        "singular": c.singular,
        "note": Value::Null,
    })
}

/// Placeholder for a class that could not be decided.
pub fn undecided_class(note: &str) -> Value {
    json!({
        "holds": Value::Null,
        "method": method(Method::MinorEnumeration),
        "witness": Value::Null,
        "boundary": Vec::<Vec<usize>>::new(),
        "singular": Value::Null,
        "note": note,
    })
}

fn hypothesis(h: &Hypothesis) -> Value {
    let mut v = json!({ "hypothesis": Value::Null, "min": Value::Null, "result": Value::Null, "n": Value::Null, "limit": Value::Null });
    match h {
        Hypothesis::PositiveOffset => v["hypothesis"] = json!("positive-offset"),
        Hypothesis::PositiveDiagonal { min } => {
            v["hypothesis"] = json!("positive-diagonal");
            v["min"] = json!(min);
        }
        Hypothesis::P0(c) => {
            v["hypothesis"] = json!("p0");
            v["result"] = class_certificate(c);
        }
        Hypothesis::TooLarge { n, limit } => {
            v["hypothesis"] = json!("too-large");
            v["n"] = json!(n);
            v["limit"] = json!(limit);
        }
    }
    v
}

pub fn certificate(c: &Certificate) -> Value {
    json!({
        "kind": c.kind.label(),
        "reason": c.reason,
        "basis": c.basis.iter().map(hypothesis).collect::<Vec<_>>(),
    })
}

fn root_method(m: &RootMethod) -> Value {
    match m {
        RootMethod::Iteration => json!({ "method": "iteration", "seed": Value::Null }),
        RootMethod::Newton { seed } => json!({ "method": "newton", "seed": seed.as_slice() }),
        RootMethod::Descent { start } => json!({ "method": "descent", "seed": start.as_slice() }),
    }
}

pub fn solve(n: usize, r: &SolveReport) -> Value {
    let certificate = r.certificates.first().map(certificate).unwrap_or(Value::Null);
    let bracket = r.bracket.as_ref().map_or(Value::Null, |b| {
        json!({ "lower": b.lower.as_slice(), "upper": b.upper.as_slice(), "verdict": b.verdict.label(), "gap": b.gap })
    });
    json!({
        "command": "solve",
        "n": n,
        "certificate": certificate,
        "fixed_points": r.roots.iter().map(|x| x.point.to_vec()).collect::<Vec<_>>(),
        "residuals": r.roots.iter().map(|x| x.residual).collect::<Vec<_>>(),
        "method_log": r.roots.iter().map(|x| root_method(&x.method)).collect::<Vec<_>>(),
        "comparable_pairs": r.comparable_pairs.iter().map(|(i, j)| [i + 1, j + 1]).collect::<Vec<_>>(),
        "bracket": bracket,
        "seeds": r.seeds,
    })
}

pub fn bracket(b: &BracketReport) -> Value {
    json!({
        "lower": b.lower.as_slice(),
        "upper": b.upper.as_slice(),
        "verdict": b.verdict.label(),
        "gap": b.gap,
        "lower_iterations": b.lower_trace.iterations,
        "upper_iterations": b.upper_trace.iterations,
    })
}

pub fn iterate(source: &str, t: &IterationTrace, bracket: Value, trace_paths: Value) -> Value {
    let (limit, period, points, diverged) = match &t.verdict {
        Verdict::Converged { limit } => (json!(limit.as_slice()), Value::Null, Value::Null, Value::Null),
        Verdict::Cycle { period, points } => (
            Value::Null,
            json!(period),
            json!(points.iter().map(|p| p.to_vec()).collect::<Vec<_>>()),
            Value::Null,
        ),
        Verdict::DivergedFromDomain { step } => (Value::Null, Value::Null, Value::Null, json!(step)),
        Verdict::BudgetExhausted => (Value::Null, Value::Null, Value::Null, Value::Null),
    };
    json!({
        "command": "iterate",
        "source": source,
        "start": t.start.to_vec(),
        "verdict": t.verdict.label(),
        "iterations": t.iterations,
        "limit": limit,
        "period": period,
        "cycle_points": points,
        "diverged_at": diverged,
        "last": t.last().as_slice(),
        "bracket": bracket,
        "traces": trace_paths,
    })
}

pub fn sweep(r: &SweepReport) -> Value {
    json!({
        "command": "sweep",
        "entry": [r.entry.0 + 1, r.entry.1 + 1],
        "rows": r.rows.iter().map(|row| json!({ "value": row.value, "count": row.count })).collect::<Vec<_>>(),
        "transitions": r.transitions.iter().map(|t| json!({
            "from_count": t.from_count,
            "to_count": t.to_count,
            "lo": t.lo,
            "hi": t.hi,
            "estimate": t.estimate,
        })).collect::<Vec<_>>(),
    })
}

pub fn grid_class(c: GridClass) -> &'static str {
    match c {
        GridClass::Antitone => "antitone",
        GridClass::Isotone => "isotone",
        GridClass::Mixed => "mixed",
    }
}

/// `accepted` is true only for the antitone class, in which case `k` and `M`
/// are filled in.
pub fn ingest(v_star: &[f64], red: &GridReduction) -> Value {
    let accepted = red.class == GridClass::Antitone;
    let m = red.m_tilde.map(|_, _, v| if accepted { (-v).max(0.0) } else { -v });
    let n = m.dim();
    let offending: Vec<Value> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m.get(i, j) < -antitone_core::system::NEG_TOL)
        .map(|(i, j)| json!({ "row": i + 1, "col": j + 1, "value": m.get(i, j) }))
        .collect();
    json!({
        "command": "ingest",
        "class": grid_class(red.class),
        "accepted": accepted,
        "k": if accepted { json!(v_star) } else { Value::Null },
        "M": if accepted { matrix(&m) } else { Value::Null },
        "M_tilde": matrix(&red.m_tilde),
        "condition": red.condition,
        "offending": offending,
    })
}
