//! Seeded, type-directed generation of well-typed surface programs.
//!
//! Programs are built from a fixed set of templates: arithmetic and string
//! operations, let/application chains, up to three effect instances of a
//! two-operation `nondet` or `state` effect, and `withnew`/`newref` cells.
//! Handler clauses resume once, resume twice, drop the continuation or pass
//! the request on to an outer instance. Generation is a pure function of the
//! [`GenConfig`].

use std::fmt;
use std::str::FromStr;

use effws_core::core_eff::CoreEffProgram;
use effws_core::pipeline::{compile_surface, Compiled, PipelineError};
use effws_core::surface::ast::{
    BinOp, Clauses, Decl, EffectDecl, Expr, ExprKind, Inferred, OpClause, OpDecl, Span,
    SurfaceProgram, Type, ValClause,
};
use effws_core::surface::elaborate;
use effws_core::Name;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Nondet,
    State,
    Dynamic,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Nondet, Feature::State, Feature::Dynamic];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Nondet => "nondet",
            Feature::State => "state",
            Feature::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;
    fn from_str(s: &str) -> Result<Feature, String> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature `{s}` (expected nondet, state or dynamic)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Rough bound on the number of generated expression nodes.
    pub size: usize,
    /// At most three.
    pub max_instances: usize,
    /// At most three.
    pub max_nesting: usize,
    pub nondet: bool,
    pub state: bool,
    pub dynamic: bool,
}

impl GenConfig {
    /// All features enabled.
    pub fn new(seed: u64, size: usize) -> GenConfig {
        GenConfig {
            seed,
            size,
            max_instances: 3,
            max_nesting: 3,
            nondet: true,
            state: true,
            dynamic: true,
        }
    }

    pub fn only(feature: Feature, seed: u64, size: usize) -> GenConfig {
        GenConfig {
            nondet: feature == Feature::Nondet,
            state: feature == Feature::State,
            dynamic: feature == Feature::Dynamic,
            ..GenConfig::new(seed, size)
        }
    }

    pub fn with_features(seed: u64, size: usize, features: &[Feature]) -> GenConfig {
        GenConfig {
            nondet: features.contains(&Feature::Nondet),
            state: features.contains(&Feature::State),
            dynamic: features.contains(&Feature::Dynamic),
            ..GenConfig::new(seed, size)
        }
    }

    /// Short label naming the enabled features, such as `nondet+state`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = [
            (self.nondet, "nondet"),
            (self.state, "state"),
            (self.dynamic, "dynamic"),
        ]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect();
        if names.is_empty() {
            "pure".to_owned()
        } else {
            names.join("+")
        }
    }
}

pub const NONDET: &str = "nondet";
pub const STATE: &str = "state";

/// The generated program in surface form. It is not elaborated.
pub fn gen_surface(cfg: &GenConfig) -> SurfaceProgram {
    let mut g = Gen::new(cfg);
    let body = if cfg.size == 0 {
        int(0)
    } else {
        let t = g.pick(&[Ty::Int, Ty::Int, Ty::Str, Ty::Unit]);
        if cfg.dynamic && g.rng.random_bool(0.6) {
            g.withnew(&t, cfg.size)
        } else {
            g.expr(&t, cfg.size)
        }
    };
    let mut decls = Vec::new();
    if g.used_nondet {
        decls.push(Decl::Effect(effect(
            NONDET,
            &[
                ("fail", Type::Unit, Type::Empty),
                ("choose", pair_ty(), Type::Int),
            ],
        )));
    }
    if g.used_state {
        decls.push(Decl::Effect(effect(
            STATE,
            &[
                ("get", Type::Unit, Type::Int),
                ("put", Type::Int, Type::Unit),
            ],
        )));
    }
    SurfaceProgram { decls, body }
}

/// Elaborate and compile a generated program.
pub fn gen_compiled(cfg: &GenConfig) -> Result<Compiled, PipelineError> {
    let mut p = gen_surface(cfg);
    elaborate(&mut p)?;
    compile_surface(p)
}

/// The generated program in Core Eff.
///
/// # Panics
///
/// If the generated program fails to compile, which is a generator bug.
pub fn gen_program(cfg: &GenConfig) -> CoreEffProgram {
    match gen_compiled(cfg) {
        Ok(c) => c.core,
        Err(e) => panic!("generated program for {cfg:?} does not compile: {e}"),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Ty {
    Int,
    Str,
    Unit,
    /// `int -> t`
    Fun(Box<Ty>),
}

impl Ty {
    fn surface(&self) -> Type {
        match self {
            Ty::Int => Type::Int,
            Ty::Str => Type::Str,
            Ty::Unit => Type::Unit,
            Ty::Fun(r) => Type::arrow(Type::Int, r.surface()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Nondet,
    State,
}

struct Gen<'c> {
    cfg: &'c GenConfig,
    rng: ChaCha8Rng,
    vars: Vec<(Name, Ty)>,
    insts: Vec<(Name, Kind)>,
    refs: Vec<(Name, Ty)>,
    withnew_depth: usize,
    nesting: usize,
    instances: usize,
    next: usize,
    used_nondet: bool,
    used_state: bool,
}

impl<'c> Gen<'c> {
    fn new(cfg: &'c GenConfig) -> Gen<'c> {
        Gen {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            vars: Vec::new(),
            insts: Vec::new(),
            refs: Vec::new(),
            withnew_depth: 0,
            nesting: 0,
            instances: 0,
            next: 0,
            used_nondet: false,
            used_state: false,
        }
    }

    fn fresh(&mut self, prefix: &str) -> Name {
        self.next += 1;
        Name::from(format!("{prefix}{}", self.next))
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs[self.rng.random_range(0..xs.len())].clone()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// Split `n` into two positive parts when possible.
    fn split(&mut self, n: usize) -> (usize, usize) {
        if n < 2 {
            return (1, 1);
        }
        let a = self.rng.random_range(1..n);
        (a, n - a)
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let (v, i, r) = (self.vars.len(), self.insts.len(), self.refs.len());
        let out = f(self);
        self.vars.truncate(v);
        self.insts.truncate(i);
        self.refs.truncate(r);
        out
    }

    fn vars_of(&self, t: &Ty) -> Vec<Name> {
        self.vars
            .iter()
            .filter(|(_, u)| u == t)
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn insts_of(&self, k: Kind) -> Vec<Name> {
        self.insts
            .iter()
            .filter(|(_, j)| *j == k)
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn can_make_instance(&self) -> bool {
        self.instances < self.cfg.max_instances.min(3) && self.nesting < self.cfg.max_nesting.min(3)
    }

    fn leaf(&mut self, t: &Ty) -> Expr {
        let vars = self.vars_of(t);
        if !vars.is_empty() && self.chance(0.5) {
            return Expr::var(self.pick(&vars));
        }
        match t {
            Ty::Int => int(self.rng.random_range(-3..10)),
            Ty::Str => string(self.pick(&["a", "b", "c", "xy", ""])),
            Ty::Unit => syn(ExprKind::Unit),
            Ty::Fun(r) => {
                let x = self.fresh("x");
                let body = self.scoped(|g| {
                    g.vars.push((x.clone(), Ty::Int));
                    g.leaf(r)
                });
                lam(x, Type::Int, body)
            }
        }
    }

    fn expr(&mut self, t: &Ty, size: usize) -> Expr {
        if size <= 1 {
            return self.leaf(t);
        }
        loop {
            if let Some(e) = self.production(t, size) {
                return e;
            }
        }
    }

    /// Try one randomly chosen production; `None` when it does not apply here.
    fn production(&mut self, t: &Ty, size: usize) -> Option<Expr> {
        let n = size - 1;
        match self.rng.random_range(0..16) {
            0 | 1 => {
                let bt = self.pick(&[
                    Ty::Int,
                    Ty::Int,
                    Ty::Str,
                    Ty::Unit,
                    Ty::Fun(Box::new(Ty::Int)),
                ]);
                let (a, b) = self.split(n);
                let bound = self.expr(&bt, a);
                let x = self.fresh("x");
                let body = self.scoped(|g| {
                    g.vars.push((x.clone(), bt));
                    g.expr(t, b)
                });
                Some(let_(x, bound, body))
            }
            2 => {
                let (a, b) = self.split(n);
                let first = self.expr(&Ty::Unit, a);
                Some(seq(first, self.expr(t, b)))
            }
            3 if n >= 3 => {
                let c = self.cond(n / 3);
                let (a, b) = self.split(n - n / 3);
                let yes = self.expr(t, a);
                Some(syn(ExprKind::If(
                    c.boxed(),
                    yes.boxed(),
                    self.expr(t, b).boxed(),
                )))
            }
            4 => {
                // beta redex or a call of a bound function
                let ft = Ty::Fun(Box::new(t.clone()));
                let (a, b) = self.split(n);
                let fs = self.vars_of(&ft);
                let f = if !fs.is_empty() && self.chance(0.6) {
                    Expr::var(self.pick(&fs))
                } else {
                    self.expr(&ft, a)
                };
                Some(app(f, self.expr(&Ty::Int, b)))
            }
            5 | 6 => self.typed_production(t, n),
            7 | 8 if self.cfg.nondet => self.nondet_production(t, n),
            9 | 10 if self.cfg.state => self.state_production(t, n),
            11 | 12 if self.cfg.dynamic => self.dynamic_production(t, n),
            13 if self.cfg.nondet || self.cfg.state => self.invocation(t, n),
            14 if self.cfg.dynamic => self.cell_use(t, n),
            15 => Some(self.leaf(t)),
            _ => None,
        }
    }

    fn typed_production(&mut self, t: &Ty, n: usize) -> Option<Expr> {
        Some(match t {
            Ty::Int => {
                let op = self.pick(&[BinOp::Add, BinOp::Add, BinOp::Sub, BinOp::Mul]);
                let (a, b) = self.split(n);
                let l = self.expr(&Ty::Int, a);
                bin(op, l, self.expr(&Ty::Int, b))
            }
            Ty::Str => {
                if self.chance(0.5) {
                    let (a, b) = self.split(n);
                    let l = self.expr(&Ty::Str, a);
                    bin(BinOp::Concat, l, self.expr(&Ty::Str, b))
                } else {
                    app(Expr::var("show"), self.expr(&Ty::Int, n))
                }
            }
            Ty::Unit => syn(ExprKind::Print(self.expr(&Ty::Str, n).boxed())),
            Ty::Fun(r) => {
                let x = self.fresh("x");
                let body = self.scoped(|g| {
                    g.vars.push((x.clone(), Ty::Int));
                    g.expr(r, n)
                });
                lam(x, Type::Int, body)
            }
        })
    }

    fn cond(&mut self, n: usize) -> Expr {
        if n < 3 {
            return syn(ExprKind::Bool(self.chance(0.5)));
        }
        let op = self.pick(&[BinOp::Lt, BinOp::Eq]);
        let (a, b) = self.split(n - 1);
        let l = self.expr(&Ty::Int, a);
        bin(op, l, self.expr(&Ty::Int, b))
    }

    /// Combine two results of resuming a continuation.
    fn combine(&mut self, t: &Ty, a: Expr, b: Expr) -> Expr {
        match t {
            Ty::Int => bin(BinOp::Add, a, b),
            Ty::Str => bin(BinOp::Concat, a, b),
            Ty::Unit => seq(a, b),
            Ty::Fun(r) => {
                let x = self.fresh("x");
                let body = self.combine(
                    r,
                    app(a, Expr::var(x.clone())),
                    app(b, Expr::var(x.clone())),
                );
                lam(x, Type::Int, body)
            }
        }
    }

    /// `let r = new nondet in handle body with { ... }`
    fn nondet_production(&mut self, t: &Ty, n: usize) -> Option<Expr> {
        if !self.can_make_instance() || matches!(t, Ty::Fun(_)) || n < 2 {
            return None;
        }
        self.used_nondet = true;
        self.instances += 1;
        let r = self.fresh("r");
        let outer = self.insts_of(Kind::Nondet);
        let tb = if self.chance(0.7) {
            t.clone()
        } else {
            self.pick(&[Ty::Int, Ty::Str, Ty::Unit])
        };
        let body = self.scoped(|g| {
            g.insts.push((r.clone(), Kind::Nondet));
            g.nesting += 1;
            let e = g.expr(&tb, n);
            g.nesting -= 1;
            e
        });
        let x = self.fresh("v");
        let val_body = self.scoped(|g| {
            g.vars.push((x.clone(), tb.clone()));
            if tb == *t && g.chance(0.6) {
                Expr::var(x.clone())
            } else {
                g.expr(t, 3)
            }
        });
        let mut ops = Vec::new();
        let (p, k) = (self.fresh("p"), self.fresh("k"));
        let resume = |which: ExprKind| app(Expr::var(k.clone()), syn(which));
        let fst = ExprKind::Fst(Expr::var(p.clone()).boxed());
        let snd = ExprKind::Snd(Expr::var(p.clone()).boxed());
        let choose_body = match self.rng.random_range(0..6) {
            0 => Some(resume(fst)),
            1 => Some(resume(snd)),
            2 | 3 => {
                let (a, b) = (resume(fst), resume(snd));
                Some(self.combine(t, a, b))
            }
            4 => Some(self.leaf(t)),
            _ if !outer.is_empty() => {
                let r2 = self.pick(&outer);
                Some(app(
                    Expr::var(k.clone()),
                    invoke(r2, "choose", Expr::var(p.clone())),
                ))
            }
            _ => None,
        };
        if let Some(body) = choose_body {
            ops.push(op_clause(&r, "choose", p.clone(), k.clone(), body));
        }
        let (u, k2) = (self.fresh("u"), self.fresh("k"));
        let fail_body = match self.rng.random_range(0..3) {
            0 => Some(self.leaf(t)),
            1 if !outer.is_empty() => {
                let r2 = self.pick(&outer);
                Some(absurd(t.surface(), invoke(r2, "fail", syn(ExprKind::Unit))))
            }
            _ => None,
        };
        if let Some(body) = fail_body {
            ops.push(op_clause(&r, "fail", u, k2, body));
        }
        let val = ValClause {
            binder: x,
            ty: None,
            body: val_body,
        };
        let handle = syn(ExprKind::Handle {
            body: body.boxed(),
            clauses: Clauses {
                val: Some(Box::new(val)),
                ops,
            },
        });
        Some(let_(r, new_instance(NONDET), handle))
    }

    /// `let s = new state in (with handler { ... } handle body) s0`
    fn state_production(&mut self, t: &Ty, n: usize) -> Option<Expr> {
        if !self.can_make_instance() || matches!(t, Ty::Fun(_)) || n < 2 {
            return None;
        }
        self.used_state = true;
        self.instances += 1;
        let s = self.fresh("s");
        let outer = self.insts_of(Kind::State);
        let body = self.scoped(|g| {
            g.insts.push((s.clone(), Kind::State));
            g.nesting += 1;
            let e = g.expr(t, n);
            g.nesting -= 1;
            e
        });
        let st = self.fresh("st");
        let state_fun = |body: Expr| lam(st.clone(), Type::Int, body);
        let x = self.fresh("v");
        let val_body = if self.chance(0.7) {
            Expr::var(x.clone())
        } else {
            self.scoped(|g| {
                g.vars.push((x.clone(), t.clone()));
                g.vars.push((st.clone(), Ty::Int));
                g.expr(t, 3)
            })
        };
        let val_body = state_fun(val_body);
        let mut ops = Vec::new();
        let (u, k) = (self.fresh("u"), self.fresh("k"));
        let kk = |a: Expr, b: Expr| app(app(Expr::var(k.clone()), a), b);
        let stv = || Expr::var(st.clone());
        let get_body = match self.rng.random_range(0..5) {
            0 | 1 => Some(kk(stv(), stv())),
            2 => {
                let a = kk(stv(), stv());
                let b = kk(bin(BinOp::Add, stv(), int(1)), stv());
                Some(self.combine(t, a, b))
            }
            3 => Some(self.scoped(|g| {
                g.vars.push((st.clone(), Ty::Int));
                g.leaf(t)
            })),
            _ if !outer.is_empty() => {
                let s2 = self.pick(&outer);
                Some(kk(invoke(s2, "get", syn(ExprKind::Unit)), stv()))
            }
            _ => None,
        };
        if let Some(b) = get_body {
            let b = state_fun(b);
            ops.push(op_clause(&s, "get", u, k.clone(), b));
        }
        let (v, k2) = (self.fresh("w"), self.fresh("k"));
        let kk2 = |a: Expr, b: Expr| app(app(Expr::var(k2.clone()), a), b);
        let unit = || syn(ExprKind::Unit);
        let put_body = match self.rng.random_range(0..5) {
            0 | 1 => Some(kk2(unit(), Expr::var(v.clone()))),
            2 => {
                let a = kk2(unit(), Expr::var(v.clone()));
                let b = kk2(unit(), stv());
                Some(self.combine(t, a, b))
            }
            3 => Some(self.leaf(t)),
            _ if !outer.is_empty() => {
                let s2 = self.pick(&outer);
                Some(seq(
                    invoke(s2, "put", Expr::var(v.clone())),
                    kk2(unit(), stv()),
                ))
            }
            _ => None,
        };
        if let Some(b) = put_body {
            let b = state_fun(b);
            ops.push(op_clause(&s, "put", v, k2, b));
        }
        let val = ValClause {
            binder: x,
            ty: Some(t.surface()),
            body: val_body,
        };
        let h = syn(ExprKind::Handler(Clauses {
            val: Some(Box::new(val)),
            ops,
        }));
        let handled = syn(ExprKind::WithHandle {
            handler: h.boxed(),
            body: body.boxed(),
        });
        let s0 = int(self.rng.random_range(0..5));
        Some(let_(s, new_instance(STATE), app(handled, s0)))
    }

    fn withnew(&mut self, t: &Ty, n: usize) -> Expr {
        self.withnew_depth += 1;
        let body = self.expr(t, n);
        self.withnew_depth -= 1;
        syn(ExprKind::WithNew(None, body.boxed()))
    }

    fn dynamic_production(&mut self, t: &Ty, n: usize) -> Option<Expr> {
        if self.withnew_depth == 0 {
            if self.nesting >= self.cfg.max_nesting.min(3) {
                return None;
            }
            self.nesting += 1;
            let e = self.withnew(t, n);
            self.nesting -= 1;
            return Some(e);
        }
        if self.refs.len() >= self.cfg.max_instances.min(3) || n < 2 {
            return None;
        }
        let ct = self.pick(&[Ty::Int, Ty::Int, Ty::Str]);
        let (a, b) = self.split(n);
        let init = self.expr(&ct, a);
        let cell = self.fresh("c");
        let body = self.scoped(|g| {
            g.refs.push((cell.clone(), ct.clone()));
            g.expr(t, b)
        });
        Some(let_(cell, syn(ExprKind::NewRef(None, init.boxed())), body))
    }

    fn cell_use(&mut self, t: &Ty, n: usize) -> Option<Expr> {
        if t == &Ty::Unit {
            let cells = self.refs.clone();
            if cells.is_empty() {
                return None;
            }
            let (c, ct) = self.pick(&cells);
            let v = self.expr(&ct, n);
            return Some(syn(ExprKind::Put(None, Expr::var(c).boxed(), v.boxed())));
        }
        let cells: Vec<Name> = self
            .refs
            .iter()
            .filter(|(_, u)| u == t)
            .map(|(c, _)| c.clone())
            .collect();
        if cells.is_empty() {
            return None;
        }
        let c = self.pick(&cells);
        Some(syn(ExprKind::Get(
            None,
            Expr::var(c).boxed(),
            syn(ExprKind::Unit).boxed(),
        )))
    }

    fn invocation(&mut self, t: &Ty, n: usize) -> Option<Expr> {
        let nondet = self.insts_of(Kind::Nondet);
        let state = self.insts_of(Kind::State);
        match t {
            Ty::Int if !nondet.is_empty() && self.chance(0.6) => {
                let r = self.pick(&nondet);
                let (a, b) = self.split(n);
                let l = self.expr(&Ty::Int, a);
                let pair = syn(ExprKind::Pair(l.boxed(), self.expr(&Ty::Int, b).boxed()));
                Some(invoke(r, "choose", pair))
            }
            Ty::Int if !state.is_empty() => {
                Some(invoke(self.pick(&state), "get", syn(ExprKind::Unit)))
            }
            Ty::Unit if !state.is_empty() && self.chance(0.8) => {
                let s = self.pick(&state);
                Some(invoke(s, "put", self.expr(&Ty::Int, n)))
            }
            _ if !nondet.is_empty() && self.chance(0.3) => {
                let r = self.pick(&nondet);
                Some(absurd(t.surface(), invoke(r, "fail", syn(ExprKind::Unit))))
            }
            _ => None,
        }
    }
}

fn syn(kind: ExprKind) -> Expr {
    Expr::synth(kind)
}

fn int(n: i64) -> Expr {
    syn(ExprKind::Int(n))
}

fn string(s: &str) -> Expr {
    syn(ExprKind::Str(s.to_owned()))
}

fn app(f: Expr, a: Expr) -> Expr {
    syn(ExprKind::App(f.boxed(), a.boxed()))
}

fn lam(x: Name, ty: Type, body: Expr) -> Expr {
    syn(ExprKind::Lam {
        param: x,
        ty,
        body: body.boxed(),
    })
}

fn let_(x: Name, bound: Expr, body: Expr) -> Expr {
    syn(ExprKind::Let {
        binder: x,
        bound: bound.boxed(),
        body: body.boxed(),
    })
}

fn seq(a: Expr, b: Expr) -> Expr {
    syn(ExprKind::Seq(a.boxed(), b.boxed()))
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    syn(ExprKind::Bin(op, a.boxed(), b.boxed()))
}

fn absurd(t: Type, e: Expr) -> Expr {
    syn(ExprKind::Absurd(t, e.boxed()))
}

fn invoke(inst: Name, op: &str, arg: Expr) -> Expr {
    syn(ExprKind::Op {
        instance: Expr::var(inst).boxed(),
        op: Name::new(op),
        arg: arg.boxed(),
    })
}

fn new_instance(effect: &str) -> Expr {
    syn(ExprKind::New(Name::new(effect), vec![]))
}

fn op_clause(inst: &Name, op: &str, arg: Name, k: Name, body: Expr) -> OpClause {
    OpClause {
        instance: inst.clone(),
        op: Name::new(op),
        arg,
        k,
        body,
        instance_ty: Inferred::none(),
        span: Span::default(),
    }
}

fn pair_ty() -> Type {
    Type::pair(Type::Int, Type::Int)
}

fn effect(name: &str, ops: &[(&str, Type, Type)]) -> EffectDecl {
    EffectDecl {
        name: Name::new(name),
        params: vec![],
        ops: ops
            .iter()
            .map(|(n, a, r)| OpDecl {
                name: Name::new(n),
                arg: a.clone(),
                res: r.clone(),
            })
            .collect(),
        span: Span::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use effws_core::core_eff::{infer_comp, CoreComp, CoreValue, TypeCtx};

    #[test]
    fn size_zero_is_val_zero() {
        for f in Feature::ALL {
            let p = gen_program(&GenConfig::only(f, 5, 0));
            assert_eq!(p.body, CoreComp::Val(CoreValue::Int(0)));
        }
    }

    #[test]
    fn same_seed_same_program() {
        let cfg = GenConfig::new(1, 8);
        assert_eq!(gen_surface(&cfg), gen_surface(&cfg));
        assert_eq!(gen_program(&cfg), gen_program(&cfg));
    }

    #[test]
    fn different_seeds_differ() {
        let programs: std::collections::HashSet<String> = (0..20)
            .map(|s| gen_program(&GenConfig::new(s, 20)).body.to_string())
            .collect();
        assert!(programs.len() > 15);
    }

    #[test]
    fn generated_programs_typecheck() {
        for f in Feature::ALL {
            for seed in 0..200 {
                let p = gen_program(&GenConfig::only(f, seed, 20));
                assert!(
                    infer_comp(&mut TypeCtx::new(), &p.body).is_ok(),
                    "{f} {seed}"
                );
            }
        }
    }

    #[test]
    fn features_are_exercised() {
        let mut nondet = 0;
        let mut state = 0;
        let mut dynamic = 0;
        for seed in 0..100 {
            nondet += gen_surface(&GenConfig::only(Feature::Nondet, seed, 20))
                .effects()
                .count();
            state += gen_surface(&GenConfig::only(Feature::State, seed, 20))
                .effects()
                .count();
            dynamic += effws_core::dyneff::uses_dynamic(&gen_surface(&GenConfig::only(
                Feature::Dynamic,
                seed,
                20,
            ))) as usize;
        }
        assert!(
            nondet > 50 && state > 50 && dynamic > 50,
            "{nondet} {state} {dynamic}"
        );
    }

    #[test]
    fn feature_names_parse() {
        for f in Feature::ALL {
            assert_eq!(f.name().parse::<Feature>(), Ok(f));
        }
        assert!("io".parse::<Feature>().is_err());
    }
}
