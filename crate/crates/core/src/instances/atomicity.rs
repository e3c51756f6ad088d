//! Lipton mover atomicities.

use std::fmt;
use std::str::FromStr;

use crate::quantale::{Quantale, Rng};
use rand::Rng as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atomicity {
    B,
    L,
    R,
    A,
    Top,
}

use Atomicity::*;

impl Atomicity {
    pub const ALL: [Atomicity; 5] = [B, L, R, A, Top];

    fn rank(self) -> u8 {
        match self {
            B => 0,
            L | R => 1,
            A => 2,
            Top => 3,
        }
    }

    pub fn join(self, other: Atomicity) -> Atomicity {
        match (self, other) {
            _ if self == other => self,
            (L, R) | (R, L) => A,
            _ if self.rank() >= other.rank() => self,
            _ => other,
        }
    }

    pub fn seq(self, other: Atomicity) -> Atomicity {
        match (self, other) {
            (B, x) => x,
            (R, B) | (R, R) => R,
            (R, L) | (R, A) => A,
            (L, B) | (L, L) => L,
            (A, B) | (A, L) => A,
            _ => Top,
        }
    }
}

impl fmt::Display for Atomicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            B => "B",
            L => "L",
            R => "R",
            A => "A",
            Top => "TOP",
        })
    }
}

impl FromStr for Atomicity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "B" => Ok(B),
            "L" => Ok(L),
            "R" => Ok(R),
            "A" => Ok(A),
            "TOP" | "⊤" => Ok(Top),
            _ => Err(format!("unknown atomicity `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AtomicityQuantale;

impl Quantale for AtomicityQuantale {
    type Elem = Atomicity;
    fn name(&self) -> String {
        "atomicity".into()
    }
    fn unit(&self) -> Atomicity {
        B
    }
    fn join(&self, a: &Atomicity, b: &Atomicity) -> Option<Atomicity> {
        Some(a.join(*b))
    }
    fn seq(&self, a: &Atomicity, b: &Atomicity) -> Option<Atomicity> {
        Some(a.seq(*b))
    }
    fn elements(&self) -> Option<Vec<Atomicity>> {
        Some(Atomicity::ALL.to_vec())
    }
    fn sample(&self, rng: &mut Rng) -> Option<Atomicity> {
        Some(Atomicity::ALL[rng.gen_range(0..5)])
    }
    fn interesting(&self) -> Vec<Atomicity> {
        Atomicity::ALL.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{leq, seq_power};

    #[test]
    fn seq_table_rows() {
        let cols = [B, L, R, A, Top];
        let rows = [
            (B, [B, L, R, A, Top]),
            (R, [R, A, R, A, Top]),
            (L, [L, L, Top, Top, Top]),
            (A, [A, A, Top, Top, Top]),
            (Top, [Top, Top, Top, Top, Top]),
        ];
        for (r, expected) in rows {
            for (c, e) in cols.iter().zip(expected) {
                assert_eq!(r.seq(*c), e, "{r};{c}");
            }
        }
    }

    #[test]
    fn lattice_order() {
        let q = AtomicityQuantale;
        assert!(leq(&q, &B, &A));
        assert!(leq(&q, &L, &A) && leq(&q, &R, &A) && leq(&q, &A, &Top));
        assert!(!leq(&q, &L, &R) && !leq(&q, &R, &L));
        assert_eq!(L.join(R), A);
    }

    #[test]
    fn movers_compose() {
        assert_eq!(R.seq(L), A);
        assert_eq!(L.seq(R), Top);
        assert_eq!(seq_power(&AtomicityQuantale, &R, 3), Some(R));
        assert_eq!(seq_power(&AtomicityQuantale, &A, 0), Some(B));
    }

    #[test]
    fn literals_round_trip() {
        for a in Atomicity::ALL {
            assert_eq!(a.to_string().parse::<Atomicity>(), Ok(a));
        }
    }
}
