//! Critical-section effects with a deliberately sparse order.

use std::fmt;
use std::str::FromStr;

use crate::quantale::{Quantale, Rng};
use rand::Rng as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Crit {
    Eps,
    Locking,
    Unlocking,
    Critical,
    Entrant,
}

use Crit::*;

impl Crit {
    pub const ALL: [Crit; 5] = [Eps, Locking, Unlocking, Critical, Entrant];

    /// Only `ε ⊑ critical` and `ε ⊑ entrant` besides reflexivity.
    pub fn join(self, other: Crit) -> Option<Crit> {
        match (self, other) {
            _ if self == other => Some(self),
            (Eps, x @ (Critical | Entrant)) | (x @ (Critical | Entrant), Eps) => Some(x),
            _ => None,
        }
    }

    pub fn seq(self, other: Crit) -> Option<Crit> {
        match (self, other) {
            (Eps, x) | (x, Eps) => Some(x),
            (Locking, Unlocking) => Some(Entrant),
            (Locking, Critical) => Some(Locking),
            (Unlocking, Locking) => Some(Critical),
            (Unlocking, Entrant) => Some(Unlocking),
            (Critical, Unlocking) => Some(Unlocking),
            (Critical, Critical) => Some(Critical),
            (Entrant, Locking) => Some(Locking),
            (Entrant, Entrant) => Some(Entrant),
            _ => None,
        }
    }
}

impl fmt::Display for Crit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eps => "eps",
            Locking => "locking",
            Unlocking => "unlocking",
            Critical => "critical",
            Entrant => "entrant",
        })
    }
}

impl FromStr for Crit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "eps" | "ε" => Ok(Eps),
            "locking" => Ok(Locking),
            "unlocking" => Ok(Unlocking),
            "critical" => Ok(Critical),
            "entrant" => Ok(Entrant),
            _ => Err(format!("unknown crit effect `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CritQuantale;

impl Quantale for CritQuantale {
    type Elem = Crit;
    fn name(&self) -> String {
        "crit".into()
    }
    fn unit(&self) -> Crit {
        Eps
    }
    fn join(&self, a: &Crit, b: &Crit) -> Option<Crit> {
        a.join(*b)
    }
    fn seq(&self, a: &Crit, b: &Crit) -> Option<Crit> {
        a.seq(*b)
    }
    fn elements(&self) -> Option<Vec<Crit>> {
        Some(Crit::ALL.to_vec())
    }
    fn sample(&self, rng: &mut Rng) -> Option<Crit> {
        Some(Crit::ALL[rng.gen_range(0..5)])
    }
    fn interesting(&self) -> Vec<Crit> {
        Crit::ALL.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_table_rows() {
        let cols = [Locking, Unlocking, Critical, Entrant, Eps];
        let rows = [
            (Locking, [None, Some(Entrant), Some(Locking), None, Some(Locking)]),
            (Unlocking, [Some(Critical), None, None, Some(Unlocking), Some(Unlocking)]),
            (Critical, [None, Some(Unlocking), Some(Critical), None, Some(Critical)]),
            (Entrant, [Some(Locking), None, None, Some(Entrant), Some(Entrant)]),
            (Eps, [Some(Locking), Some(Unlocking), Some(Critical), Some(Entrant), Some(Eps)]),
        ];
        for (r, expected) in rows {
            for (c, e) in cols.iter().zip(expected) {
                assert_eq!(r.seq(*c), e, "{r};{c}");
            }
        }
    }

    #[test]
    fn only_two_orderings() {
        let mut strict = Vec::new();
        for a in Crit::ALL {
            for b in Crit::ALL {
                if a != b && a.join(b) == Some(b) {
                    strict.push((a, b));
                }
            }
        }
        assert_eq!(strict, vec![(Eps, Critical), (Eps, Entrant)]);
    }

    #[test]
    fn locking_twice_is_undefined() {
        assert_eq!(Locking.seq(Locking), None);
        assert_eq!(Locking.seq(Unlocking), Some(Entrant));
    }
}
