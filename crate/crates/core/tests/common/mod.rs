//! Test-side reference implementation: its own dump reader, exact evaluator
//! and exhaustive cell enumeration. Shares no code with the library.

#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::Value;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Decimal text such as `-1.25e-3` as an exact rational.
pub fn dec(text: &str) -> BigRational {
    let text = text.trim();
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().expect("exponent")),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    let all: BigInt = format!("{int}{frac}0").parse::<BigInt>().expect("digits") / 10;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if shift >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    if neg {
        -r
    } else {
        r
    }
}

pub fn exact(x: f32) -> BigRational {
    BigRational::from_float(x as f64).expect("finite")
}

fn next_up(x: f32) -> f32 {
    if x == 0.0 {
        return f32::from_bits(1);
    }
    let b = x.to_bits();
    f32::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

fn next_down(x: f32) -> f32 {
    -next_up(-x)
}

/// Smallest binary32 value `>= r`.
pub fn f32_ceil(r: &BigRational) -> f32 {
    let approx = num_traits::ToPrimitive::to_f64(r).expect("finite") as f32;
    let mut f = approx;
    while exact(f) < *r {
        f = next_up(f);
    }
    while exact(next_down(f)) >= *r {
        f = next_down(f);
    }
    f
}

/// Largest binary32 value `<= r`.
pub fn f32_floor(r: &BigRational) -> f32 {
    -f32_ceil(&-r)
}

/// Smallest binary32 value `> r`.
pub fn f32_above(r: &BigRational) -> f32 {
    let f = f32_ceil(r);
    if exact(f) == *r {
        next_up(f)
    } else {
        f
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Leaf(BigRational),
    Split { f: usize, t: f32, left: Box<Node>, right: Box<Node> },
}

impl Node {
    fn eval(&self, x: &[f32]) -> &BigRational {
        match self {
            Node::Leaf(w) => w,
            Node::Split { f, t, left, right } => {
                if x[*f] < *t {
                    left.eval(x)
                } else {
                    right.eval(x)
                }
            }
        }
    }

    fn thresholds(&self, out: &mut Vec<Vec<f32>>) {
        if let Node::Split { f, t, left, right } = self {
            out[*f].push(*t);
            left.thresholds(out);
            right.thresholds(out);
        }
    }

    fn to_json(&self, names: &[String], next: &mut u64) -> Value {
        let id = *next;
        *next += 1;
        match self {
            Node::Leaf(w) => serde_json::json!({"nodeid": id, "leaf": decimal_json(w)}),
            Node::Split { f, t, left, right } => {
                let l = left.to_json(names, next);
                let r = right.to_json(names, next);
                let cond: serde_json::Number = format!("{t}").parse().unwrap();
                serde_json::json!({
                    "nodeid": id, "split": names[*f], "split_condition": cond,
                    "yes": l["nodeid"], "no": r["nodeid"], "children": [l, r]
                })
            }
        }
    }
}

/// Terminating decimal for a rational with denominator 2^a 5^b.
fn decimal_json(r: &BigRational) -> serde_json::Number {
    let mut scaled = r.clone();
    let mut places = 0;
    while !scaled.is_integer() {
        scaled *= BigRational::from_integer(10.into());
        places += 1;
        assert!(places < 60, "non-terminating weight");
    }
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (i, f) = digits.split_at(digits.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    let text = if places == 0 { format!("{sign}{i}") } else { format!("{sign}{i}.{f}") };
    text.parse().unwrap()
}

fn parse_node(v: &Value, names: &[String]) -> Node {
    if let Some(w) = v.get("leaf") {
        return Node::Leaf(dec(&w.to_string()));
    }
    let f = names.iter().position(|n| n == v["split"].as_str().unwrap()).expect("feature");
    let t: f32 = v["split_condition"].to_string().parse().unwrap();
    let child = |key: &str| {
        let id = &v[key];
        v["children"].as_array().unwrap().iter().find(|c| &c["nodeid"] == id).expect("child")
    };
    Node::Split {
        f,
        t,
        left: Box::new(parse_node(child("yes"), names)),
        right: Box::new(parse_node(child("no"), names)),
    }
}

/// Premise atom with its decimal constant.
#[derive(Debug, Clone)]
pub struct Atom {
    pub f: usize,
    pub op: &'static str,
    pub c: BigRational,
    pub text: String,
}

impl Atom {
    pub fn parse(text: &str, names: &[String]) -> Atom {
        let pos = text.find(['<', '>']).unwrap();
        let op = match &text[pos..pos + 2] {
            "<=" => "<=",
            ">=" => ">=",
            _ if text[pos..].starts_with('<') => "<",
            _ => ">",
        };
        let f = names.iter().position(|n| n == text[..pos].trim()).unwrap();
        let c = dec(&text[pos + op.len()..]);
        Atom { f, op, c, text: text.to_string() }
    }

    pub fn holds(&self, x: &[f32]) -> bool {
        let v = exact(x[self.f]);
        match self.op {
            "<" => v < self.c,
            "<=" => v <= self.c,
            ">" => v > self.c,
            _ => v >= self.c,
        }
    }

    /// Binary32 value at which the atom changes truth.
    pub fn boundary(&self) -> f32 {
        match self.op {
            "<" | ">=" => f32_ceil(&self.c),
            _ => f32_above(&self.c),
        }
    }
}

/// `logit <= c` (`le`) or `logit > c`.
#[derive(Debug, Clone)]
pub struct Conclusion {
    pub le: bool,
    pub c: BigRational,
}

impl Conclusion {
    pub fn holds(&self, logit: &BigRational) -> bool {
        if self.le {
            *logit <= self.c
        } else {
            *logit > self.c
        }
    }

    pub fn text(&self) -> String {
        format!("logit {} {}", if self.le { "<=" } else { ">" }, decimal_json(&self.c))
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub names: Vec<String>,
    pub lo: Vec<f32>,
    pub hi: Vec<f32>,
    pub base: BigRational,
    pub trees: Vec<Node>,
    /// Decimal domain bounds as written to the space file.
    pub bounds: Vec<(String, String)>,
}

impl Model {
    pub fn from_files(dump: &str, base: &str, space: &str) -> Model {
        let space: Value = serde_json::from_str(space).unwrap();
        let mut names = Vec::new();
        let mut bounds = Vec::new();
        for f in space["features"].as_array().unwrap() {
            names.push(f["name"].as_str().unwrap().to_string());
            bounds.push((f["lower"].to_string(), f["upper"].to_string()));
        }
        let dump: Value = serde_json::from_str(dump).unwrap();
        let trees = dump.as_array().unwrap().iter().map(|t| parse_node(t, &names)).collect();
        Model::new(names, bounds, dec(base), trees)
    }

    pub fn new(names: Vec<String>, bounds: Vec<(String, String)>, base: BigRational, trees: Vec<Node>) -> Model {
        let lo = bounds.iter().map(|(l, _)| f32_ceil(&dec(l))).collect();
        let hi = bounds.iter().map(|(_, h)| f32_floor(&dec(h))).collect();
        Model { names, lo, hi, base, trees, bounds }
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn eval(&self, x: &[f32]) -> BigRational {
        self.trees.iter().fold(self.base.clone(), |acc, t| acc + t.eval(x))
    }

    pub fn in_domain(&self, x: &[f32]) -> bool {
        x.iter().enumerate().all(|(j, v)| self.lo[j] <= *v && *v <= self.hi[j])
    }

    pub fn dump_json(&self) -> String {
        let trees: Vec<Value> = self.trees.iter().map(|t| t.to_json(&self.names, &mut 0)).collect();
        serde_json::to_string(&trees).unwrap()
    }

    pub fn space_json(&self) -> String {
        let features: Vec<Value> = self
            .names
            .iter()
            .zip(&self.bounds)
            .map(|(n, (l, h))| {
                let l: serde_json::Number = l.parse().unwrap();
                let h: serde_json::Number = h.parse().unwrap();
                serde_json::json!({"name": n, "lower": l, "upper": h})
            })
            .collect();
        serde_json::json!({ "features": features }).to_string()
    }

    pub fn base_text(&self) -> String {
        decimal_json(&self.base).to_string()
    }

    /// Per feature, the sorted lower ends of the cells on which the model
    /// and every atom are constant. Each is itself a point of its cell.
    pub fn cell_starts(&self, atoms: &[&Atom]) -> Vec<Vec<f32>> {
        let mut cuts = vec![Vec::new(); self.d()];
        for t in &self.trees {
            t.thresholds(&mut cuts);
        }
        for a in atoms {
            cuts[a.f].push(a.boundary());
        }
        cuts.iter()
            .enumerate()
            .map(|(j, c)| {
                let mut s: Vec<f32> = std::iter::once(self.lo[j])
                    .chain(c.iter().copied().filter(|t| *t > self.lo[j] && *t <= self.hi[j]))
                    .collect();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                s.dedup();
                s
            })
            .collect()
    }
}

/// Calls `visit` on every combination; stops early when it returns true.
pub fn any_combination(axes: &[Vec<f32>], mut visit: impl FnMut(&[f32]) -> bool) -> bool {
    if axes.iter().any(Vec::is_empty) {
        return false;
    }
    let mut idx = vec![0usize; axes.len()];
    let mut x: Vec<f32> = axes.iter().map(|a| a[0]).collect();
    loop {
        if visit(&x) {
            return true;
        }
        let mut j = axes.len();
        loop {
            if j == 0 {
                return false;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                x[j] = axes[j][idx[j]];
                break;
            }
            idx[j] = 0;
            x[j] = axes[j][0];
        }
    }
}

/// Some in-domain point satisfies every atom and violates the conclusion.
pub fn oracle_threshold_violated(m: &Model, premise: &[Atom], conclusion: &Conclusion) -> bool {
    let refs: Vec<&Atom> = premise.iter().collect();
    let axes = m.cell_starts(&refs);
    any_combination(&axes, |x| premise.iter().all(|a| a.holds(x)) && !conclusion.holds(&m.eval(x)))
}

/// Some pair of adjacent cells along `f` breaks the order.
pub fn oracle_monotone_violated(m: &Model, f: usize, non_decreasing: bool) -> bool {
    let axes = m.cell_starts(&[]);
    let mut others = axes.clone();
    others[f] = vec![m.lo[f]];
    any_combination(&others, |x| {
        let mut x = x.to_vec();
        let values: Vec<BigRational> = axes[f]
            .iter()
            .map(|v| {
                x[f] = *v;
                m.eval(&x)
            })
            .collect();
        values
            .windows(2)
            .any(|w| if non_decreasing { w[0] > w[1] } else { w[0] < w[1] })
    })
}

pub fn positive(logit: &BigRational) -> bool {
    *logit > BigRational::zero()
}

/// Fixing the features in `subset` at `x` keeps the class of `x` everywhere.
pub fn oracle_sufficient(m: &Model, x: &[f32], subset: &[usize]) -> bool {
    let class = positive(&m.eval(x));
    let mut axes = m.cell_starts(&[]);
    for &j in subset {
        axes[j] = vec![x[j]];
    }
    !any_combination(&axes, |y| positive(&m.eval(y)) != class)
}

// random small ensembles

pub fn tenths(k: i64) -> String {
    let sign = if k < 0 { "-" } else { "" };
    format!("{sign}{}.{}", k.abs() / 10, k.abs() % 10)
}

pub fn hundredths(k: i64) -> BigRational {
    BigRational::new(k.into(), 100.into())
}

fn random_tree<R: Rng>(rng: &mut R, depth: usize, lo: &[i64], hi: &[i64]) -> Node {
    if depth == 0 || rng.gen_bool(0.2) {
        return Node::Leaf(hundredths(rng.gen_range(-100..=100)));
    }
    let f = rng.gen_range(0..lo.len());
    // on a 0.1 grid, sometimes just outside the domain
    let k = rng.gen_range(lo[f] - 2..=hi[f] + 2);
    Node::Split {
        f,
        t: (k as f64 / 10.0) as f32,
        left: Box::new(random_tree(rng, depth - 1, lo, hi)),
        right: Box::new(random_tree(rng, depth - 1, lo, hi)),
    }
}

/// 2-4 features, 1-6 trees of depth at most 3, thresholds on a 0.1 grid,
/// weights on a 0.01 grid.
pub fn random_model<R: Rng>(rng: &mut R) -> Model {
    let (lo, hi) = random_bounds(rng);
    let trees = (0..rng.gen_range(1..=6))
        .map(|_| {
            let depth = rng.gen_range(0..=3);
            random_tree(rng, depth, &lo, &hi)
        })
        .collect();
    assemble(rng, &lo, &hi, trees)
}

/// Domain bounds in tenths.
fn random_bounds<R: Rng>(rng: &mut R) -> (Vec<i64>, Vec<i64>) {
    let d = rng.gen_range(2..=4);
    let lo: Vec<i64> = (0..d).map(|_| rng.gen_range(-20..=10)).collect();
    let hi: Vec<i64> = lo.iter().map(|l| l + rng.gen_range(5..=40)).collect();
    (lo, hi)
}

fn assemble<R: Rng>(rng: &mut R, lo: &[i64], hi: &[i64], trees: Vec<Node>) -> Model {
    let names: Vec<String> = (0..lo.len()).map(|j| format!("x{j}")).collect();
    let bounds = lo.iter().zip(hi).map(|(l, h)| (tenths(*l), tenths(*h))).collect();
    Model::new(names, bounds, hundredths(rng.gen_range(-50..=50)), trees)
}

/// Ensemble whose trees are each monotone non-decreasing in feature `f` (or
/// the last feature when there are fewer) or do not read it, mixed with
/// `dirty` unconstrained trees. Returns the feature used.
pub fn random_monotone_model<R: Rng>(rng: &mut R, f: usize, dirty: usize) -> (Model, usize) {
    let (lo, hi) = random_bounds(rng);
    let f = f.min(lo.len() - 1);
    let others: Vec<usize> = (0..lo.len()).filter(|&j| j != f).collect();
    let mut trees = Vec::new();
    for _ in 0..rng.gen_range(1..=5) {
        let depth = rng.gen_range(0..=3);
        trees.push(clean_tree(rng, depth, f, &others, &lo, &hi));
    }
    for _ in 0..dirty {
        let depth = rng.gen_range(1..=3);
        trees.push(random_tree(rng, depth, &lo, &hi));
    }
    (assemble(rng, &lo, &hi, trees), f)
}

/// Splits on `f` only directly above leaves, with the right leaf no lower.
fn clean_tree<R: Rng>(rng: &mut R, depth: usize, f: usize, others: &[usize], lo: &[i64], hi: &[i64]) -> Node {
    let leaf = |rng: &mut R| rng.gen_range(-100..=100);
    if depth <= 1 || rng.gen_bool(0.25) {
        if depth >= 1 && rng.gen_bool(0.6) {
            let w = leaf(rng);
            let k = rng.gen_range(lo[f] - 1..=hi[f] + 1);
            return Node::Split {
                f,
                t: (k as f64 / 10.0) as f32,
                left: Box::new(Node::Leaf(hundredths(w))),
                right: Box::new(Node::Leaf(hundredths(w + rng.gen_range(0..=60)))),
            };
        }
        return Node::Leaf(hundredths(leaf(rng)));
    }
    let g = others[rng.gen_range(0..others.len())];
    let k = rng.gen_range(lo[g] - 1..=hi[g] + 1);
    Node::Split {
        f: g,
        t: (k as f64 / 10.0) as f32,
        left: Box::new(clean_tree(rng, depth - 1, f, others, lo, hi)),
        right: Box::new(clean_tree(rng, depth - 1, f, others, lo, hi)),
    }
}

/// Random in-domain point: a cell start, a domain end, or uniform.
pub fn random_point<R: Rng>(rng: &mut R, m: &Model) -> Vec<f32> {
    let axes = m.cell_starts(&[]);
    (0..m.d())
        .map(|j| match rng.gen_range(0..3) {
            0 => axes[j][rng.gen_range(0..axes[j].len())],
            1 => m.hi[j],
            _ => rng.gen_range(m.lo[j]..=m.hi[j]),
        })
        .collect()
}

pub fn random_atom<R: Rng>(rng: &mut R, m: &Model) -> Atom {
    let f = rng.gen_range(0..m.d());
    let lo = (exact(m.lo[f]) * BigRational::from_integer(10.into())).floor().to_integer();
    let hi = (exact(m.hi[f]) * BigRational::from_integer(10.into())).ceil().to_integer();
    let lo: i64 = lo.try_into().unwrap();
    let hi: i64 = hi.try_into().unwrap();
    let k = rng.gen_range(lo - 1..=hi + 1);
    let op = ["<", "<=", ">", ">="][rng.gen_range(0..4)];
    let text = format!("{} {op} {}", m.names[f], tenths(k));
    Atom::parse(&text, &m.names)
}

pub fn random_conclusion<R: Rng>(rng: &mut R) -> Conclusion {
    Conclusion {
        le: rng.gen_bool(0.5),
        c: BigRational::new(rng.gen_range(-30i64..=30).into(), 20.into()),
    }
}
