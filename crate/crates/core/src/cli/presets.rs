use serde_json::{json, Value};

use super::{scenario_from_value, Scenario};

/// Built-in scenarios as `(name, summary)`.
pub const PRESETS: [(&str, &str); 4] = [
    (
        "weak-w1",
        "weak competition, converges to the coexistence state",
    ),
    ("asym-a1", "strongly asymmetric competition, u dies out"),
    (
        "coop-fail",
        "strong nonlocal cooperation, boundedness check fails",
    ),
    (
        "blowup-guard",
        "strong cooperation with large sensitivities, trips the blow-up guard",
    ),
];

fn params(a1: f64, b2: f64, b0: f64, nonlocal: f64, chi: f64) -> Value {
    json!({
        "d1": 1.0, "d2": 1.0, "d3": 1.0,
        "chi1": chi, "chi2": chi,
        "a0": 1.0, "a1": a1, "a2": 1.0, "a3": nonlocal, "a4": nonlocal,
        "b0": b0, "b1": 1.0, "b2": b2, "b3": nonlocal, "b4": nonlocal,
        "lambda": 1.0, "k": 1.0, "l": 1.0,
        "omega_measure": 1.0
    })
}

fn sim(t_end: f64, record_every: usize, conv_tol: Option<f64>) -> Value {
    let mut v = json!({
        "dt_init": 1e-2,
        "t_end": t_end,
        "dt_min": 1e-10,
        "safety": 0.8,
        "blowup_threshold": 1e8,
        "record_every": record_every
    });
    if let Some(tol) = conv_tol {
        v["conv_tol"] = json!(tol);
    }
    v
}

/// The scenario document of a preset.
pub fn preset_document(name: &str) -> Option<Value> {
    let grid = json!({ "dim": 1, "n": 128, "L": 1.0 });
    let doc = match name {
        "weak-w1" => json!({
            "name": name,
            "params": params(1.5, 1.5, 1.0, 0.1, 0.5),
            "grid": grid,
            "sim": sim(100.0, 1, Some(1e-3)),
            "initial": { "kind": "perturbed", "amplitude": 0.1, "modes": [1], "relative": true },
            "analysis": { "regime": true, "boundedness": {}, "stability": { "case": "weak" } },
            "reference": "coexistence",
            "require_certificate": true
        }),
        "asym-a1" => json!({
            "name": name,
            "params": params(2.0, 2.0, 4.0, 0.1, 0.5),
            "grid": grid,
            "sim": sim(30.0, 10, None),
            "initial": {
                "kind": "perturbed",
                "base": { "u": 0.3, "v": 0.5, "w": 0.5 },
                "amplitude": 0.1,
                "modes": [1],
                "relative": true
            },
            "analysis": { "regime": true, "boundedness": {}, "stability": { "case": "asymmetric" } },
            "reference": "semi_trivial",
            "require_certificate": true
        }),
        "coop-fail" => json!({
            "name": name,
            "params": params(0.5, 0.5, 1.0, -1.0, 0.5),
            "grid": grid,
            "sim": sim(1.0, 1, None),
            "initial": { "kind": "constant", "u": 1.0, "v": 1.0, "w": 1.0 },
            "analysis": { "regime": true, "boundedness": {} },
            "reference": "none",
            "require_certificate": true
        }),
        "blowup-guard" => json!({
            "name": name,
            "params": params(0.1, 0.1, 1.0, -5.0, 5.0),
            "grid": grid,
            "sim": sim(10.0, 10, None),
            "initial": { "kind": "perturbed", "base": { "u": 1.0, "v": 1.0, "w": 1.0 }, "amplitude": 0.5, "modes": [1], "relative": true },
            "analysis": { "regime": true, "boundedness": {} },
            "reference": "none"
        }),
        _ => return None,
    };
    Some(doc)
}

/// Parsed preset; `None` for an unknown name.
pub fn preset(name: &str) -> Option<Scenario> {
    preset_document(name).map(|doc| scenario_from_value(doc).expect("presets are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for (name, _) in PRESETS {
            let s = preset(name).unwrap();
            assert_eq!(s.name.as_deref(), Some(name));
        }
        assert!(preset("nope").is_none());
    }
}
