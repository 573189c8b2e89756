//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver; formulas are generated as text plus a machine-integer
//! syntax tree that is evaluated by brute force.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Copy, Debug)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

#[derive(Clone, Debug)]
pub enum Node {
    /// sum(c_i * v_i) + k REL 0
    Cmp(Vec<(usize, i64)>, i64, Rel),
    /// m | sum(c_i * v_i) + k
    Dvd(i64, Vec<(usize, i64)>, i64),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
}

fn lin(coeffs: &[(usize, i64)], k: i64, env: &[i64; 3]) -> i64 {
    coeffs.iter().map(|(v, c)| c * env[*v]).sum::<i64>() + k
}

impl Node {
    pub fn is_qf(&self) -> bool {
        match self {
            Node::Cmp(..) | Node::Dvd(..) => true,
            Node::Not(a) => a.is_qf(),
            Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => a.is_qf() && b.is_qf(),
            Node::Exists(..) | Node::Forall(..) => false,
        }
    }

    /// Evaluate; quantifiers over quantifier-free bodies are decided exactly,
    /// nested ones by search over `[-window, window]`.
    pub fn eval(&self, env: &mut [i64; 3], window: i64) -> bool {
        match self {
            Node::Cmp(cs, k, r) => {
                let t = lin(cs, *k, env);
                match r {
                    Rel::Lt => t < 0,
                    Rel::Le => t <= 0,
                    Rel::Eq => t == 0,
                    Rel::Ne => t != 0,
                    Rel::Ge => t >= 0,
                    Rel::Gt => t > 0,
                }
            }
            Node::Dvd(m, cs, k) => lin(cs, *k, env).rem_euclid(*m) == 0,
            Node::Not(a) => !a.eval(env, window),
            Node::And(a, b) => a.eval(env, window) && b.eval(env, window),
            Node::Or(a, b) => a.eval(env, window) || b.eval(env, window),
            Node::Implies(a, b) => !a.eval(env, window) || b.eval(env, window),
            Node::Exists(v, body) | Node::Forall(v, body) => {
                let want = matches!(self, Node::Exists(..));
                let saved = env[*v];
                let points = if body.is_qf() {
                    body.critical_points(*v, env)
                } else {
                    (-window..=window).collect()
                };
                let mut found = !want;
                for p in points {
                    env[*v] = p;
                    if body.eval(env, window) == want {
                        found = want;
                        break;
                    }
                }
                env[*v] = saved;
                found
            }
        }
    }

    fn collect(&self, v: usize, env: &[i64; 3], thresholds: &mut Vec<i64>, period: &mut i64) {
        match self {
            Node::Cmp(cs, k, _) => {
                let c: i64 = cs.iter().filter(|(u, _)| *u == v).map(|(_, c)| c).sum();
                if c != 0 {
                    let mut e = *env;
                    e[v] = 0;
                    let s = lin(cs, *k, &e);
                    let t = -s as f64 / c as f64;
                    thresholds.push(t.floor() as i64);
                    thresholds.push(t.ceil() as i64);
                }
            }
            Node::Dvd(m, cs, _) => {
                if cs.iter().any(|(u, c)| *u == v && *c != 0) {
                    *period = lcm(*period, *m);
                }
            }
            Node::Not(a) => a.collect(v, env, thresholds, period),
            Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
                a.collect(v, env, thresholds, period);
                b.collect(v, env, thresholds, period);
            }
            Node::Exists(..) | Node::Forall(..) => unreachable!(),
        }
    }

    /// Points that decide a quantifier over `v` for a quantifier-free body:
    /// between thresholds the body's truth is periodic in `v`.
    fn critical_points(&self, v: usize, env: &[i64; 3]) -> Vec<i64> {
        let mut ts = Vec::new();
        let mut period = 1;
        self.collect(v, env, &mut ts, &mut period);
        if ts.is_empty() {
            return (0..period).collect();
        }
        let mut pts: Vec<i64> = Vec::new();
        for t in ts {
            pts.extend(t - period - 1..=t + period + 1);
        }
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    pub fn render(&self) -> String {
        fn term(cs: &[(usize, i64)], k: i64) -> String {
            let mut s = String::new();
            for (v, c) in cs {
                s.push_str(&format!("{}{}*{} ", if s.is_empty() { "" } else { "+ " }, paren(*c), VARS[*v]));
            }
            format!("{s}{}{}", if s.is_empty() { "" } else { "+ " }, paren(k))
        }
        fn paren(n: i64) -> String {
            if n < 0 {
                format!("({n})")
            } else {
                n.to_string()
            }
        }
        match self {
            Node::Cmp(cs, k, r) => {
                let op = match r {
                    Rel::Lt => "<",
                    Rel::Le => "<=",
                    Rel::Eq => "=",
                    Rel::Ne => "!=",
                    Rel::Ge => ">=",
                    Rel::Gt => ">",
                };
                format!("{} {op} 0", term(cs, *k))
            }
            Node::Dvd(m, cs, k) => format!("{m} | {}", term(cs, *k)),
            Node::Not(a) => format!("!({})", a.render()),
            Node::And(a, b) => format!("({} && {})", a.render(), b.render()),
            Node::Or(a, b) => format!("({} || {})", a.render(), b.render()),
            Node::Implies(a, b) => format!("({} -> {})", a.render(), b.render()),
            Node::Exists(v, b) => format!("(exists {}:int. {})", VARS[*v], b.render()),
            Node::Forall(v, b) => format!("(forall {}:int. {})", VARS[*v], b.render()),
        }
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn random_atom(rng: &mut ChaCha8Rng, vars: &[usize]) -> Node {
    let mut cs = Vec::new();
    for &v in vars {
        if rng.gen_bool(0.7) {
            let c = rng.gen_range(-5..=5);
            if c != 0 {
                cs.push((v, c));
            }
        }
    }
    if cs.is_empty() {
        cs.push((vars[rng.gen_range(0..vars.len())], if rng.gen_bool(0.5) { 1 } else { -1 }));
    }
    let k = rng.gen_range(-10..=10);
    if rng.gen_bool(0.12) {
        return Node::Dvd(rng.gen_range(2..=4), cs, k);
    }
    let r = [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt][rng.gen_range(0..6)];
    Node::Cmp(cs, k, r)
}

fn random_body(rng: &mut ChaCha8Rng, vars: &[usize], depth: u32) -> Node {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_atom(rng, vars);
    }
    let a = Box::new(random_body(rng, vars, depth - 1));
    let b = Box::new(random_body(rng, vars, depth - 1));
    match rng.gen_range(0..7) {
        0 => Node::Not(a),
        1 | 2 => Node::And(a, b),
        3 | 4 => Node::Or(a, b),
        _ => Node::Implies(a, b),
    }
}

/// A random formula with one or two quantifiers over at most three
/// integer variables; returns it with its free variable indices.
pub fn random_quantified(rng: &mut ChaCha8Rng) -> (Node, Vec<usize>) {
    let nvars = rng.gen_range(2..=3);
    let vars: Vec<usize> = (0..nvars).collect();
    let nq = rng.gen_range(1..=2).min(nvars - 1);
    let body = random_body(rng, &vars, 2);
    let mut f = body;
    let bound: Vec<usize> = vars[nvars - nq..].to_vec();
    for &v in bound.iter().rev() {
        f = if rng.gen_bool(0.5) {
            Node::Exists(v, Box::new(f))
        } else {
            Node::Forall(v, Box::new(f))
        };
    }
    (f, vars[..nvars - nq].to_vec())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
