use serde::{Deserialize, Serialize};

use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// `r_low < r_mid < r_high`: a positive coexistence state exists.
    Weak,
    /// `r_low < r_high <= r_mid`: the `u` species is excluded.
    StronglyAsymmetric,
    /// `r_low > r_mid > r_high`.
    FullStrong,
    Unclassified,
}

/// Competition regime together with the three ratios it is decided from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// `(b1 + b3|Ω|) / (a1 + a3|Ω|)`
    pub r_low: f64,
    /// `b0 / a0`
    pub r_mid: f64,
    /// `(b2 + b4|Ω|) / (a2 + a4|Ω|)`
    pub r_high: f64,
}

pub fn classify_regime(p: &Params) -> Regime {
    let (a_self, a_cross, b_cross, b_self) = p.effective_rows();
    let r_low = b_cross / a_self;
    let r_mid = p.b0 / p.a0;
    let r_high = b_self / a_cross;

    let kind = if a_self <= 0.0 || a_cross <= 0.0 || !(r_low.is_finite() && r_high.is_finite()) {
        RegimeKind::Unclassified
    } else if r_low < r_mid && r_mid < r_high {
        RegimeKind::Weak
    } else if r_low < r_high && r_high <= r_mid {
        RegimeKind::StronglyAsymmetric
    } else if r_low > r_mid && r_mid > r_high {
        RegimeKind::FullStrong
    } else {
        RegimeKind::Unclassified
    };

    Regime {
        kind,
        r_low,
        r_mid,
        r_high,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base() -> Params {
        Params {
            a0: 1.0,
            b0: 1.0,
            a1: 1.0,
            b2: 1.0,
            a2: 0.5,
            b1: 0.5,
            a3: 0.0,
            a4: 0.0,
            b3: 0.0,
            b4: 0.0,
            omega_measure: 1.0,
            ..Params::default()
        }
    }

    #[test]
    fn weak_example() {
        let r = classify_regime(&base());
        assert_eq!(r.kind, RegimeKind::Weak);
        assert_eq!((r.r_low, r.r_mid, r.r_high), (0.5, 1.0, 2.0));
    }

    #[test]
    fn strongly_asymmetric_example() {
        let p = Params { b0: 3.0, ..base() };
        let r = classify_regime(&p);
        assert_eq!(r.kind, RegimeKind::StronglyAsymmetric);
        assert_eq!((r.r_low, r.r_mid, r.r_high), (0.5, 3.0, 2.0));
    }

    #[test]
    fn boundary_equality_is_asymmetric() {
        // r_high == r_mid falls on the non-strict side of the asymmetric ordering.
        let p = Params { b0: 2.0, ..base() };
        assert_eq!(classify_regime(&p).kind, RegimeKind::StronglyAsymmetric);
    }

    #[test]
    fn full_strong_example() {
        let p = Params {
            a2: 2.0,
            b1: 2.0,
            ..base()
        };
        let r = classify_regime(&p);
        assert_eq!(r.kind, RegimeKind::FullStrong);
        assert_eq!((r.r_low, r.r_mid, r.r_high), (2.0, 1.0, 0.5));
    }

    #[test]
    fn degenerate_denominators_are_unclassified() {
        let p = Params { a3: -2.0, ..base() };
        assert_eq!(classify_regime(&p).kind, RegimeKind::Unclassified);
        let p = Params { a4: -0.5, ..base() };
        assert_eq!(classify_regime(&p).kind, RegimeKind::Unclassified);
    }

    #[test]
    fn ties_outside_all_orderings_are_unclassified() {
        let p = Params { b1: 1.0, ..base() };
        // r_low == r_mid
        assert_eq!(classify_regime(&p).kind, RegimeKind::Unclassified);
    }

    proptest! {
        #[test]
        fn class_is_scale_invariant(
            a in proptest::array::uniform5(0.1f64..5.0),
            b in proptest::array::uniform5(0.1f64..5.0),
            sa in 0.01f64..100.0,
            sb in 0.01f64..100.0,
        ) {
            let p = Params {
                a0: a[0], a1: a[1], a2: a[2], a3: a[3] - 1.0, a4: a[4] - 1.0,
                b0: b[0], b1: b[1], b2: b[2], b3: b[3] - 1.0, b4: b[4] - 1.0,
                ..Params::default()
            };
            let q = Params {
                a0: sa * p.a0, a1: sa * p.a1, a2: sa * p.a2, a3: sa * p.a3, a4: sa * p.a4,
                b0: sb * p.b0, b1: sb * p.b1, b2: sb * p.b2, b3: sb * p.b3, b4: sb * p.b4,
                ..p
            };
            let (r, s) = (classify_regime(&p), classify_regime(&q));
            // Ratios can differ in the last ulp; only compare away from ties.
            let gap = (r.r_low - r.r_mid).abs().min((r.r_mid - r.r_high).abs()).min((r.r_low - r.r_high).abs());
            prop_assume!(gap > 1e-9);
            prop_assert_eq!(r.kind, s.kind);
        }
    }
}
