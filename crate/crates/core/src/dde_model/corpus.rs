//! Built-in reference equations addressable by stable identifiers.

use super::{
    DelaySpec, Equation, LinearDDE, LinearTerm, ModelError, NonlinearDDE, NonlinearTerm,
    RatioShape,
};
use crate::funcmodel::TimeFunction;
use std::f64::consts::{E, FRAC_PI_2};

/// Period of the periodic counterexample: `1 + ln(3/2 - 1/(2e))`.
pub fn c3_period() -> f64 {
    1.0 + (1.5 - 0.5 / E).ln()
}

/// `x'(t) + a x(t - τ) = 0`.
pub fn c1(a: f64, tau: f64) -> LinearDDE {
    LinearDDE::new(
        0.0,
        vec![LinearTerm::plus(TimeFunction::constant(a), DelaySpec::constant(tau))],
    )
}

/// `x' + (1 - 2cos²t) x(t - 0.2) + 2cos²t x(t - 0.1) = 0`, written with
/// `1 - 2cos²t = -cos 2t` and `2cos²t = 1 + cos 2t`.
pub fn c2() -> LinearDDE {
    LinearDDE::new(
        0.0,
        vec![
            LinearTerm::plus(TimeFunction::sinusoid(0.0, -1.0, 2.0, 0.0), DelaySpec::constant(0.2)),
            LinearTerm::plus(TimeFunction::sinusoid(1.0, 1.0, 2.0, 0.0), DelaySpec::constant(0.1)),
        ],
    )
}

/// `x' = -x + b(t) x(start of current period)`, `b = 0.5` on `[0,1)`,
/// `b = 2` on `[1,T)`, repeated with period `T`.
pub fn c3() -> LinearDDE {
    let period = c3_period();
    let b = TimeFunction::piecewise_periodic(period, &[(0.0, 0.5), (1.0, 2.0)])
        .expect("valid piecewise descriptor");
    LinearDDE::new(
        0.0,
        vec![
            LinearTerm::plus(TimeFunction::constant(1.0), DelaySpec::constant(0.0)),
            LinearTerm::minus(
                b,
                DelaySpec::with_bound(TimeFunction::sawtooth(period, 0.0), period),
            ),
        ],
    )
}

/// `x' + x + (1.8 + 0.2 cos t) x(t - 0.25 - 0.07 sin t) = 0`.
pub fn c4() -> LinearDDE {
    LinearDDE::new(
        0.0,
        vec![
            LinearTerm::plus(TimeFunction::constant(1.0), DelaySpec::constant(0.0)),
            LinearTerm::plus(
                TimeFunction::sinusoid(1.8, 0.2, 1.0, 0.0),
                DelaySpec::with_bound(TimeFunction::sinusoid(0.25, 0.07, 1.0, -FRAC_PI_2), 0.32),
            ),
        ],
    )
}

/// Mackey–Glass variant
/// `x' + α x(h₁)(1 + 1/(1 + x²(h₁))) + β x(h₂)/(1 + x²(h₂)) = 0`
/// with `α ≡ 1`, `β ≡ 0.5`, both lags `0.1`.
pub fn c5() -> NonlinearDDE {
    NonlinearDDE {
        t0: 0.0,
        terms: vec![
            NonlinearTerm {
                coef: TimeFunction::constant(1.0),
                delay: DelaySpec::constant(0.1),
                ratio: RatioShape::MackeyGainLow,
            },
            NonlinearTerm {
                coef: TimeFunction::constant(0.5),
                delay: DelaySpec::constant(0.1),
                ratio: RatioShape::MackeySuppress,
            },
        ],
    }
}

/// `x' + 0.5 x(t - 0.4) + 0.5 x(t - 0.8) = 0`.
pub fn c6() -> LinearDDE {
    LinearDDE::new(
        0.0,
        vec![
            LinearTerm::plus(TimeFunction::constant(0.5), DelaySpec::constant(0.4)),
            LinearTerm::plus(TimeFunction::constant(0.5), DelaySpec::constant(0.8)),
        ],
    )
}

/// Identifiers of the corpus entries.
pub const IDS: [&str; 6] = ["C1", "C2", "C3", "C4", "C5", "C6"];

/// Resolve `C1(a=1,tau=1)`, `C1(1, 1)`, `C2` … (an optional `corpus:`
/// prefix is accepted).
pub fn lookup(id: &str) -> Result<Equation, ModelError> {
    let id = id.trim();
    let id = id.strip_prefix("corpus:").unwrap_or(id).trim();
    let (name, args) = match id.find('(') {
        Some(p) => {
            let inner = id[p + 1..]
                .strip_suffix(')')
                .ok_or_else(|| ModelError::UnknownCorpus(id.to_string()))?;
            (&id[..p], Some(inner))
        }
        None => (id, None),
    };
    let unknown = || ModelError::UnknownCorpus(id.to_string());
    match name.trim() {
        "C1" => {
            let (mut a, mut tau) = (1.0, 1.0);
            if let Some(args) = args {
                for (k, part) in args.split(',').enumerate() {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    let (key, val) = match part.split_once('=') {
                        Some((k, v)) => (Some(k.trim()), v.trim()),
                        None => (None, part),
                    };
                    let v = TimeFunction::parse(val)
                        .ok()
                        .and_then(|f| f.as_constant())
                        .ok_or_else(unknown)?;
                    match (key, k) {
                        (Some("a"), _) | (None, 0) => a = v,
                        (Some("tau"), _) | (None, 1) => tau = v,
                        _ => return Err(unknown()),
                    }
                }
            }
            Ok(Equation::Linear(c1(a, tau)))
        }
        _ if args.is_some_and(|a| !a.trim().is_empty()) => Err(unknown()),
        "C2" => Ok(Equation::Linear(c2())),
        "C3" => Ok(Equation::Linear(c3())),
        "C4" => Ok(Equation::Linear(c4())),
        "C5" => Ok(Equation::Nonlinear(c5())),
        "C6" => Ok(Equation::Linear(c6())),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_value() {
        assert!((c3_period() - 1.274642636880155).abs() < 1e-14);
    }

    #[test]
    fn lookup_variants() {
        assert_eq!(lookup("corpus:C1(a=1,tau=1)").unwrap(), Equation::Linear(c1(1.0, 1.0)));
        assert_eq!(lookup("C1(0.5, 2)").unwrap(), Equation::Linear(c1(0.5, 2.0)));
        assert_eq!(lookup("C1(tau=1/e)").unwrap(), Equation::Linear(c1(1.0, 1.0 / E)));
        assert_eq!(lookup("C5").unwrap(), Equation::Nonlinear(c5()));
        assert!(lookup("C9").is_err());
        assert!(lookup("C2(1)").is_err());
        assert!(lookup("C1(b=2)").is_err());
    }

    #[test]
    fn all_entries_validate() {
        for id in IDS {
            let eq = lookup(id).unwrap();
            let r = super::super::validate(&eq);
            assert!(r.is_valid(), "{id}: {:?}", r.issues);
        }
    }
}
