//! The uniform verdict record emitted by every test.

use crate::funcmodel::Soundness;
use serde::{Deserialize, Serialize};
use std::fmt;

/// What a passing test certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conclusion {
    #[serde(rename = "GES")]
    Ges,
    #[serde(rename = "UES")]
    Ues,
    #[serde(rename = "AS")]
    As,
    Nonoscillatory,
    BoundedSolutions,
    Inconclusive,
}

impl Conclusion {
    /// Larger is stronger.
    pub fn strength(self) -> u8 {
        match self {
            Conclusion::Ges => 6,
            Conclusion::Ues => 5,
            Conclusion::As => 4,
            Conclusion::Nonoscillatory => 3,
            Conclusion::BoundedSolutions => 2,
            Conclusion::Inconclusive => 0,
        }
    }

    /// Conclusions asserting that every solution decays.
    pub fn is_stability(self) -> bool {
        matches!(self, Conclusion::Ges | Conclusion::Ues | Conclusion::As)
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Conclusion::Ges => "GES",
            Conclusion::Ues => "UES",
            Conclusion::As => "AS",
            Conclusion::Nonoscillatory => "Nonoscillatory",
            Conclusion::BoundedSolutions => "BoundedSolutions",
            Conclusion::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    /// Slack in the normalised form `small < large`: positive when the
    /// relation holds with room to spare.
    pub fn slack(self, lhs: f64, rhs: f64) -> f64 {
        let s = match self {
            Relation::Lt | Relation::Le => rhs - lhs,
            Relation::Gt | Relation::Ge => lhs - rhs,
        };
        if s.is_nan() {
            // ∞ − ∞ style comparisons between equal infinities.
            if lhs == rhs {
                0.0
            } else {
                f64::NAN
            }
        } else {
            s
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

/// Whether the bounds behind a verdict carry a guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictSoundness {
    Sound,
    Heuristic,
}

impl From<Soundness> for VerdictSoundness {
    fn from(s: Soundness) -> Self {
        if s.is_sound() {
            VerdictSoundness::Sound
        } else {
            VerdictSoundness::Heuristic
        }
    }
}

/// One evaluated inequality of a test's hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    #[serde(with = "ext_float")]
    pub lhs: f64,
    pub relation: Relation,
    #[serde(with = "ext_float")]
    pub rhs: f64,
    pub satisfied: bool,
}

impl HypothesisCheck {
    pub fn slack(&self) -> f64 {
        self.relation.slack(self.lhs, self.rhs)
    }
}

/// One branch of a disjunctive hypothesis ("either (i) or (ii)", one index
/// set of several, one parameter choice).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub label: String,
    /// False when the branch's structural preconditions fail.
    pub applicable: bool,
    pub checks: Vec<HypothesisCheck>,
    pub satisfied: bool,
    #[serde(with = "ext_float")]
    pub margin: f64,
    /// Result of the M-matrix cross-check, for branches that build one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_matrix: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub test_id: String,
    pub applicable: bool,
    pub conclusion: Conclusion,
    /// The decisive checks: common hypotheses plus the selected branch.
    pub hypothesis_checks: Vec<HypothesisCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Alternative>,
    #[serde(with = "ext_float")]
    pub margin: f64,
    pub soundness: VerdictSoundness,
    pub notes: Vec<String>,
}

impl Verdict {
    /// A verdict recording that the test does not apply.
    pub fn not_applicable(test_id: &str, reason: String) -> Verdict {
        Verdict {
            test_id: test_id.to_string(),
            applicable: false,
            conclusion: Conclusion::Inconclusive,
            hypothesis_checks: Vec::new(),
            alternatives: Vec::new(),
            margin: f64::NEG_INFINITY,
            soundness: VerdictSoundness::Sound,
            notes: vec![reason],
        }
    }

    /// Checks the structural invariants every emitted verdict satisfies.
    pub fn invariant_violation(&self) -> Option<String> {
        if self.conclusion != Conclusion::Inconclusive {
            if let Some(c) = self.hypothesis_checks.iter().find(|c| !c.satisfied) {
                return Some(format!("{}: conclusive verdict with failed check '{}'", self.test_id, c.name));
            }
            let strict = self.hypothesis_checks.iter().any(|c| c.relation.is_strict());
            if strict && !(self.margin > 0.0) {
                return Some(format!("{}: conclusive verdict with margin {}", self.test_id, self.margin));
            }
            if !(self.margin >= 0.0) {
                return Some(format!("{}: negative margin {}", self.test_id, self.margin));
            }
            if !self.applicable {
                return Some(format!("{}: conclusive verdict marked not applicable", self.test_id));
            }
        }
        None
    }
}

/// Serialises non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod ext_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("invalid float '{other}'"))),
            },
        }
    }

    #[derive(serde::Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::ext_float")] f64);

    /// The same encoding for a pair of floats.
    pub mod pair {
        use super::Wrap;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
            (Wrap(v.0), Wrap(v.1)).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
            let (a, b) = <(Wrap, Wrap)>::deserialize(d)?;
            Ok((a.0, b.0))
        }
    }

    /// The same encoding for an optional float.
    pub mod option {
        use super::Wrap;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(Wrap).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}
