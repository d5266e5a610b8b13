use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::types::GroundType;
use crate::error::Error;

pub const MAX_SLOTS: usize = 8;

/// Fixed-capacity slot array backing sequences and finite maps. Each slot
/// holds a carrier index; the carrier's bottom index marks an empty slot.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slots {
    data: [u8; MAX_SLOTS],
    len: u8,
}

impl Slots {
    pub fn filled(len: usize, fill: u8) -> Self {
        assert!(len <= MAX_SLOTS, "slot array of {len} exceeds {MAX_SLOTS}");
        let mut data = [0u8; MAX_SLOTS];
        data[..len].fill(fill);
        Slots {
            data,
            len: len as u8,
        }
    }

    pub fn from_slice(xs: &[u8]) -> Self {
        let mut s = Slots::filled(xs.len(), 0);
        s.data[..xs.len()].copy_from_slice(xs);
        s
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.data[..self.len()][i]
    }

    pub fn set(&mut self, i: usize, x: u8) {
        self.data[..self.len as usize][i] = x;
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.data[..self.len()].iter().copied()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data[..self.len()]
    }
}

impl fmt::Debug for Slots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

/// Ground values. Enum elements are indices into their carrier; sets are
/// characteristic bitmasks over the carrier's index space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Elem(u32),
    Set(u64),
    Slots(Slots),
    Tuple(Arc<[Value]>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => write!(f, "TRUE"),
            Value::Bool(false) => write!(f, "FALSE"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Elem(i) => write!(f, "#{i}"),
            Value::Set(m) => write!(f, "set:{m:#b}"),
            Value::Slots(s) => write!(f, "slots:{:?}", s.as_slice()),
            Value::Tuple(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

/// Default ceiling on the number of values any single type may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// All values of a type in a deterministic order: integers ascending, enum
/// declaration order, sets by ascending bitmask, sequences and maps
/// lexicographically by slot contents (first slot most significant), tuples
/// lexicographically by component.
pub fn enumerate_type(t: &GroundType, cap: u128) -> Result<Vec<Value>, Error> {
    let card = t.cardinality().unwrap_or(u128::MAX);
    if card > cap {
        return Err(Error::CapacityExceeded {
            what: format!("type {t}"),
            size: card,
            cap,
        });
    }
    Ok(match t {
        GroundType::Bool => vec![Value::Bool(false), Value::Bool(true)],
        GroundType::IntRange { lo, hi } => (*lo..=*hi).map(Value::Int).collect(),
        GroundType::Enum(e) => (0..e.card() as u32).map(Value::Elem).collect(),
        GroundType::Set(_) => (0..card as u64).map(Value::Set).collect(),
        GroundType::Seq(s) => slot_arrays(s.cap as usize, s.carrier.card())
            .map(Value::Slots)
            .collect(),
        GroundType::Func(f) => slot_arrays(f.dom.scalar_card(), f.ran.card())
            .map(Value::Slots)
            .collect(),
        GroundType::Tuple(ts) => {
            let mut acc: Vec<Vec<Value>> = vec![Vec::new()];
            for comp in ts {
                let vals = enumerate_type(comp, cap)?;
                acc = acc
                    .into_iter()
                    .flat_map(|prefix| {
                        vals.iter().map(move |v| {
                            let mut p = prefix.clone();
                            p.push(v.clone());
                            p
                        })
                    })
                    .collect();
            }
            acc.into_iter().map(|vs| Value::Tuple(vs.into())).collect()
        }
    })
}

fn slot_arrays(len: usize, radix: usize) -> impl Iterator<Item = Slots> {
    let total = (radix as u64).pow(len as u32);
    (0..total).map(move |mut n| {
        let mut s = Slots::filled(len, 0);
        for i in (0..len).rev() {
            s.set(i, (n % radix as u64) as u8);
            n /= radix as u64;
        }
        s
    })
}

/// A total assignment of values to a model's state slots, in the slot order
/// fixed by the model layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(pub Box<[Value]>);

impl Valuation {
    pub fn values(&self) -> &[Value] {
        &self.0
    }
}

/// JSON-friendly rendering of a named value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Shown {
    pub var: String,
    pub value: String,
}
