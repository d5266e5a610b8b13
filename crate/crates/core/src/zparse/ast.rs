/// Variable decoration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decoration {
    Plain,
    Primed,
    Input,
    Output,
}

impl Decoration {
    pub fn suffix(self) -> &'static str {
        match self {
            Decoration::Plain => "",
            Decoration::Primed => "'",
            Decoration::Input => "?",
            Decoration::Output => "!",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Nat,
    /// Given type or free type reference.
    Named(String),
    Power(Box<TypeExpr>),
    Seq(Box<TypeExpr>),
    Func {
        total: bool,
        dom: Box<TypeExpr>,
        ran: Box<TypeExpr>,
    },
    Rel(Box<TypeExpr>, Box<TypeExpr>),
    Product(Vec<TypeExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub decoration: Decoration,
    pub ty: TypeExpr,
    /// Declared with `iseq`.
    pub injective: bool,
    /// Introduced by a schema inclusion rather than written out.
    pub included: bool,
}

/// A schema reference in a declaration part: `S`, `S'` or `\Delta S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inclusion {
    pub schema: String,
    pub delta: bool,
    pub primed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaDef {
    pub name: String,
    pub includes: Vec<Inclusion>,
    pub decls: Vec<Decl>,
    pub pred: ZExpr,
}

impl SchemaDef {
    pub fn decl(&self, name: &str, decoration: Decoration) -> Option<&Decl> {
        self.decls
            .iter()
            .find(|d| d.name == name && d.decoration == decoration)
    }

    pub fn decls_with(&self, decoration: Decoration) -> impl Iterator<Item = &Decl> {
        self.decls.iter().filter(move |d| d.decoration == decoration)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeTypeDef {
    pub name: String,
    pub branches: Vec<(String, Option<TypeExpr>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxDef {
    pub name: String,
    pub ty: TypeExpr,
    pub pred: Option<ZExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZSpec {
    pub name: String,
    pub given_types: Vec<String>,
    pub free_types: Vec<FreeTypeDef>,
    pub axdefs: Vec<AxDef>,
    pub state_schema: SchemaDef,
    pub init_schema: SchemaDef,
    pub operations: Vec<SchemaDef>,
}

impl ZSpec {
    pub fn free_type(&self, name: &str) -> Option<&FreeTypeDef> {
        self.free_types.iter().find(|f| f.name == name)
    }

    pub fn axdef(&self, name: &str) -> Option<&AxDef> {
        self.axdefs.iter().find(|a| a.name == name)
    }

    /// The free type owning a constructor, with the branch index.
    pub fn constructor(&self, name: &str) -> Option<(&FreeTypeDef, usize)> {
        self.free_types.iter().find_map(|f| {
            f.branches
                .iter()
                .position(|(b, _)| b == name)
                .map(|i| (f, i))
        })
    }

    pub fn operation(&self, name: &str) -> Option<&SchemaDef> {
        self.operations.iter().find(|o| o.name == name)
    }

    /// State variable names in declaration order.
    pub fn state_vars(&self) -> Vec<&Decl> {
        self.state_schema.decls.iter().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelOp {
    Eq,
    Neq,
    Lt,
    Le,
    In,
    NotIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Union,
    SetMinus,
    Cat,
    Filter,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ZExpr {
    Bool(bool),
    Num(i64),
    Ident(String, Decoration),
    EmptySet,
    EmptySeq,
    SetDisplay(Vec<ZExpr>),
    SeqDisplay(Vec<ZExpr>),
    Bin(BinOp, Box<ZExpr>, Box<ZExpr>),
    Card(Box<ZExpr>),
    Ran(Box<ZExpr>),
    Dom(Box<ZExpr>),
    /// `f(x)`: constructor or function application.
    Apply(String, Box<ZExpr>),
    /// `f^{-1}(x)`: inverse of a free-type constructor at a point.
    Inverse(String, Box<ZExpr>),
    Rel(RelOp, Box<ZExpr>, Box<ZExpr>),
    And(Vec<ZExpr>),
    Implies(Box<ZExpr>, Box<ZExpr>),
}

impl ZExpr {
    pub fn and(parts: Vec<ZExpr>) -> ZExpr {
        let mut out = Vec::new();
        for p in parts {
            match p {
                ZExpr::And(xs) => out.extend(xs),
                ZExpr::Bool(true) => {}
                other => out.push(other),
            }
        }
        match out.len() {
            0 => ZExpr::Bool(true),
            1 => out.pop().unwrap(),
            _ => ZExpr::And(out),
        }
    }

    pub fn conjuncts(&self) -> Vec<&ZExpr> {
        match self {
            ZExpr::And(xs) => xs.iter().collect(),
            ZExpr::Bool(true) => Vec::new(),
            other => vec![other],
        }
    }

    /// Visits every identifier occurrence, including constructor and
    /// function names of applications (reported as plain).
    pub fn visit_idents(&self, f: &mut dyn FnMut(&str, Decoration)) {
        match self {
            ZExpr::Bool(_) | ZExpr::Num(_) | ZExpr::EmptySet | ZExpr::EmptySeq => {}
            ZExpr::Ident(n, d) => f(n, *d),
            ZExpr::SetDisplay(xs) | ZExpr::SeqDisplay(xs) | ZExpr::And(xs) => {
                xs.iter().for_each(|x| x.visit_idents(f))
            }
            ZExpr::Bin(_, a, b) | ZExpr::Rel(_, a, b) | ZExpr::Implies(a, b) => {
                a.visit_idents(f);
                b.visit_idents(f);
            }
            ZExpr::Card(a) | ZExpr::Ran(a) | ZExpr::Dom(a) => a.visit_idents(f),
            ZExpr::Apply(n, a) | ZExpr::Inverse(n, a) => {
                f(n, Decoration::Plain);
                a.visit_idents(f)
            }
        }
    }

    /// Rewrites identifier occurrences.
    pub fn map_idents(&self, f: &dyn Fn(&str, Decoration) -> (String, Decoration)) -> ZExpr {
        let m = |e: &ZExpr| Box::new(e.map_idents(f));
        match self {
            ZExpr::Ident(n, d) => {
                let (n, d) = f(n, *d);
                ZExpr::Ident(n, d)
            }
            ZExpr::SetDisplay(xs) => ZExpr::SetDisplay(xs.iter().map(|x| x.map_idents(f)).collect()),
            ZExpr::SeqDisplay(xs) => ZExpr::SeqDisplay(xs.iter().map(|x| x.map_idents(f)).collect()),
            ZExpr::And(xs) => ZExpr::And(xs.iter().map(|x| x.map_idents(f)).collect()),
            ZExpr::Bin(op, a, b) => ZExpr::Bin(*op, m(a), m(b)),
            ZExpr::Rel(op, a, b) => ZExpr::Rel(*op, m(a), m(b)),
            ZExpr::Implies(a, b) => ZExpr::Implies(m(a), m(b)),
            ZExpr::Card(a) => ZExpr::Card(m(a)),
            ZExpr::Ran(a) => ZExpr::Ran(m(a)),
            ZExpr::Dom(a) => ZExpr::Dom(m(a)),
            ZExpr::Apply(n, a) => ZExpr::Apply(n.clone(), m(a)),
            ZExpr::Inverse(n, a) => ZExpr::Inverse(n.clone(), m(a)),
            other => other.clone(),
        }
    }
}
