use std::fmt;
use std::sync::Arc;

use super::value::{Slots, Value, MAX_SLOTS};

/// An enumerated carrier. When a bottom element is present it is always the
/// last entry of `elems`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnumType {
    pub name: String,
    pub elems: Vec<String>,
    pub bottom: Option<u32>,
}

impl EnumType {
    pub fn new(name: impl Into<String>, elems: Vec<String>) -> Self {
        EnumType {
            name: name.into(),
            elems,
            bottom: None,
        }
    }

    /// Appends the conventional `<Name>__B` bottom element.
    pub fn with_bottom(mut self) -> Self {
        if self.bottom.is_none() {
            self.bottom = Some(self.elems.len() as u32);
            self.elems.push(format!("{}__B", self.name));
        }
        self
    }

    pub fn card(&self) -> usize {
        self.elems.len()
    }

    /// Number of elements excluding bottom.
    pub fn proper_card(&self) -> usize {
        self.elems.len() - usize::from(self.bottom.is_some())
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.elems.iter().position(|e| e == name).map(|i| i as u32)
    }

    pub fn is_bottom(&self, idx: u32) -> bool {
        self.bottom == Some(idx)
    }
}

/// Sequence sort: a total map from `1..=cap` to carrier-plus-bottom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeqSort {
    pub carrier: Arc<EnumType>,
    pub cap: u8,
}

impl SeqSort {
    pub fn bottom(&self) -> u8 {
        self.carrier
            .bottom
            .expect("sequence carrier without bottom element") as u8
    }
}

/// Partial or total function over finite carriers, stored as one slot per
/// domain element holding a range index (bottom when undefined).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncSort {
    pub dom: Arc<GroundType>,
    pub ran: Arc<EnumType>,
    pub total: bool,
}

/// One branch of a free type. Constant branches occupy one element of the
/// encoding enum; constructor branches occupy one element per proper element
/// of the argument carrier, starting at `offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeBranch {
    pub name: String,
    pub arg: Option<Arc<EnumType>>,
    pub offset: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeSort {
    pub ty: Arc<EnumType>,
    pub branches: Vec<FreeBranch>,
}

impl FreeSort {
    /// Builds the flat enum encoding `{c0} ∪ {c1__x | x ∈ X} ∪ …`.
    pub fn new(name: &str, branches: Vec<(String, Option<Arc<EnumType>>)>) -> Self {
        let mut elems = Vec::new();
        let mut out = Vec::new();
        for (bname, arg) in branches {
            let offset = elems.len() as u32;
            match &arg {
                None => elems.push(bname.clone()),
                Some(a) => {
                    for e in &a.elems[..a.proper_card()] {
                        elems.push(format!("{bname}__{e}"));
                    }
                }
            }
            out.push(FreeBranch {
                name: bname,
                arg,
                offset,
            });
        }
        FreeSort {
            ty: Arc::new(EnumType::new(name, elems)),
            branches: out,
        }
    }

    pub fn branch(&self, name: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.name == name)
    }

    pub fn branch_width(&self, b: usize) -> u32 {
        match &self.branches[b].arg {
            None => 1,
            Some(a) => a.proper_card() as u32,
        }
    }

    /// Which branch an encoded element belongs to.
    pub fn branch_of(&self, elem: u32) -> Option<usize> {
        (0..self.branches.len()).find(|&b| {
            let lo = self.branches[b].offset;
            elem >= lo && elem < lo + self.branch_width(b)
        })
    }
}

/// Types of IR variables. Scalars (`Bool`, `IntRange`, `Enum`) can serve as
/// set and function carriers; collections hold ground elements only.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundType {
    Bool,
    IntRange { lo: i64, hi: i64 },
    Enum(Arc<EnumType>),
    Tuple(Vec<GroundType>),
    Set(Arc<GroundType>),
    Seq(Arc<SeqSort>),
    Func(Arc<FuncSort>),
}

impl GroundType {
    pub fn nat(hi: i64) -> Self {
        GroundType::IntRange { lo: 0, hi }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            GroundType::Bool | GroundType::IntRange { .. } | GroundType::Enum(_)
        )
    }

    /// Cardinality, or `None` on overflow.
    pub fn cardinality(&self) -> Option<u128> {
        match self {
            GroundType::Bool => Some(2),
            GroundType::IntRange { lo, hi } => Some((hi - lo + 1).max(0) as u128),
            GroundType::Enum(e) => Some(e.card() as u128),
            GroundType::Tuple(ts) => ts
                .iter()
                .try_fold(1u128, |acc, t| acc.checked_mul(t.cardinality()?)),
            // Bottom is never a member.
            GroundType::Set(c) => {
                let n = if c.is_scalar() { c.proper_card() as u128 } else { c.cardinality()? };
                if n >= 127 {
                    None
                } else {
                    Some(1u128 << n)
                }
            }
            GroundType::Seq(s) => (s.carrier.card() as u128).checked_pow(s.cap as u32),
            GroundType::Func(f) => {
                (f.ran.card() as u128).checked_pow(f.dom.cardinality()? as u32)
            }
        }
    }

    /// Index of a scalar value within this carrier.
    pub fn index_of(&self, v: &Value) -> Option<u32> {
        match (self, v) {
            (GroundType::Bool, Value::Bool(b)) => Some(u32::from(*b)),
            (GroundType::IntRange { lo, hi }, Value::Int(i)) if i >= lo && i <= hi => {
                Some((i - lo) as u32)
            }
            (GroundType::Enum(e), Value::Elem(i)) if (*i as usize) < e.card() => Some(*i),
            _ => None,
        }
    }

    /// Scalar value at an index of this carrier.
    pub fn value_at(&self, idx: u32) -> Value {
        match self {
            GroundType::Bool => Value::Bool(idx != 0),
            GroundType::IntRange { lo, .. } => Value::Int(lo + idx as i64),
            GroundType::Enum(_) => Value::Elem(idx),
            other => panic!("value_at on non-scalar carrier {other}"),
        }
    }

    /// Carrier size for scalar types.
    pub fn scalar_card(&self) -> usize {
        match self {
            GroundType::Bool => 2,
            GroundType::IntRange { lo, hi } => (hi - lo + 1).max(0) as usize,
            GroundType::Enum(e) => e.card(),
            other => panic!("scalar_card on {other}"),
        }
    }

    /// Proper (non-bottom) elements of a scalar carrier.
    pub fn proper_card(&self) -> usize {
        match self {
            GroundType::Enum(e) => e.proper_card(),
            other => other.scalar_card(),
        }
    }

    /// Whether `v` is a well-formed inhabitant of this type.
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (GroundType::Tuple(ts), Value::Tuple(vs)) => {
                ts.len() == vs.len() && ts.iter().zip(vs.iter()).all(|(t, v)| t.contains(v))
            }
            (GroundType::Set(c), Value::Set(m)) => {
                let n = c.proper_card();
                n >= 64 || *m >> n == 0
            }
            (GroundType::Seq(s), Value::Slots(sl)) => {
                sl.len() == s.cap as usize
                    && sl.iter().all(|x| (x as usize) < s.carrier.card())
            }
            (GroundType::Func(f), Value::Slots(sl)) => {
                sl.len() == f.dom.scalar_card() && sl.iter().all(|x| (x as usize) < f.ran.card())
            }
            (t, v) if t.is_scalar() => t.index_of(v).is_some(),
            _ => false,
        }
    }

    /// Renders a value of this type with element names.
    pub fn show(&self, v: &Value) -> String {
        match (self, v) {
            (GroundType::Enum(e), Value::Elem(i)) => e
                .elems
                .get(*i as usize)
                .cloned()
                .unwrap_or_else(|| format!("#{i}")),
            (GroundType::Set(c), Value::Set(m)) => {
                let items: Vec<String> = (0..c.scalar_card() as u32)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| c.show(&c.value_at(i)))
                    .collect();
                format!("{{{}}}", items.join(", "))
            }
            (GroundType::Seq(s), Value::Slots(sl)) => {
                let bottom = s.bottom();
                let names = |xs: &mut dyn Iterator<Item = u8>| -> Vec<String> {
                    xs.map(|x| s.carrier.elems[x as usize].clone()).collect()
                };
                let len = sl.iter().take_while(|&x| x != bottom).count();
                if sl.iter().skip(len).all(|x| x == bottom) {
                    format!("<{}>", names(&mut sl.iter().take(len)).join(", "))
                } else {
                    format!("[{}]", names(&mut sl.iter()).join(", "))
                }
            }
            (GroundType::Func(f), Value::Slots(sl)) => {
                let items: Vec<String> = sl
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| !f.ran.is_bottom(*r as u32))
                    .map(|(d, r)| {
                        format!(
                            "{} |-> {}",
                            f.dom.show(&f.dom.value_at(d as u32)),
                            f.ran.elems[r as usize]
                        )
                    })
                    .collect();
                format!("{{{}}}", items.join(", "))
            }
            (GroundType::Tuple(ts), Value::Tuple(vs)) => {
                let items: Vec<String> = ts.iter().zip(vs.iter()).map(|(t, v)| t.show(v)).collect();
                format!("({})", items.join(", "))
            }
            (_, v) => v.to_string(),
        }
    }

    /// Empty-collection or minimal value, used as a placeholder.
    pub fn default_value(&self) -> Value {
        match self {
            GroundType::Bool => Value::Bool(false),
            GroundType::IntRange { lo, .. } => Value::Int(*lo),
            GroundType::Enum(_) => Value::Elem(0),
            GroundType::Tuple(ts) => Value::Tuple(ts.iter().map(|t| t.default_value()).collect()),
            GroundType::Set(_) => Value::Set(0),
            GroundType::Seq(s) => Value::Slots(Slots::filled(s.cap as usize, s.bottom())),
            GroundType::Func(f) => Value::Slots(Slots::filled(
                f.dom.scalar_card(),
                f.ran.bottom.unwrap_or(0) as u8,
            )),
        }
    }
}

impl fmt::Display for GroundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundType::Bool => write!(f, "BOOLEAN"),
            GroundType::IntRange { lo, hi } => write!(f, "[{lo}..{hi}]"),
            GroundType::Enum(e) => write!(f, "{}", e.name),
            GroundType::Tuple(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            GroundType::Set(c) => write!(f, "set {{{c};}}"),
            GroundType::Seq(s) => write!(
                f,
                "sequence {{{}; {}, {}}}",
                s.carrier.name,
                s.carrier.elems[s.bottom() as usize],
                s.cap
            ),
            GroundType::Func(fs) => write!(
                f,
                "function {{{}; {}; {}}}",
                fs.dom,
                fs.ran.name,
                fs.ran.elems[fs.ran.bottom.unwrap_or(0) as usize]
            ),
        }
    }
}

/// Largest supported sequence capacity / function domain.
pub const MAX_COLLECTION_SLOTS: usize = MAX_SLOTS;
