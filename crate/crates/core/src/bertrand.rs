//! The Bertrand-type threshold n_{p,q}(alpha): the least m such that every
//! interval [n, n*alpha) with n >= m contains a number of the form p^a * q^b.
//!
//! Computed by a descent: start from a convergent-derived upper bound, walk
//! downward through the sequence by convergent-sized steps while each step
//! stays within a factor alpha, fall back to two trivial searches when the
//! fast steps overshoot, and finish with an exact rational ceiling.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::cf::Side;
use crate::error::{Error, Result};
use crate::sunits::SUnitContext;
use crate::types::{Alpha, ExponentPair};

const CHECKPOINT_VERSION: u32 = 1;

/// Big integers cross the serialization boundary as decimal strings.
mod biguint_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|x| x.to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Outcome of one fast descent step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStep {
    /// Moved to a strictly smaller element still >= n/alpha.
    Stepped(ExponentPair),
    /// Both candidates fall below n/alpha; `shadow` is the better (larger)
    /// of the rejected candidates, a pruning hint for the trivial search.
    Exhausted { shadow: Option<ExponentPair> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BertrandResult {
    pub p: u64,
    pub q: u64,
    pub alpha: Alpha,
    pub start: ExponentPair,
    pub end: ExponentPair,
    pub iterations: u64,
    /// Symbolic form of the answer, e.g. "ceil(2^12 * 8191^1493 * 3/5)".
    pub value_repr: String,
    /// Decimal length of the answer.
    pub digits: u64,
    /// The answer itself, materialized on request.
    #[serde(
        skip_serializing_if = "Option::is_none",
        with = "biguint_decimal",
        default
    )]
    pub value: Option<BigUint>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub checkpoint: Option<PathBuf>,
    /// Write a checkpoint every this many iterations.
    pub checkpoint_every: u64,
    pub resume: bool,
    /// Materialize the final integer in `value`.
    pub materialize: bool,
    /// Refuse materializations beyond this many decimal digits.
    pub max_digits: u64,
    /// Pause (writing a checkpoint) after this many additional iterations.
    pub max_steps: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            checkpoint: None,
            checkpoint_every: 10_000_000,
            resume: false,
            materialize: true,
            max_digits: 2_000_000,
            max_steps: None,
        }
    }
}

#[derive(Debug)]
pub enum SolveOutcome {
    Done(BertrandResult),
    /// Paused at `max_steps`; state persisted in the checkpoint file.
    Paused { at: ExponentPair, iterations: u64 },
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    p: u64,
    q: u64,
    alpha_num: u64,
    alpha_den: u64,
    /// Checkpoints are only taken between whole steps, at the top of the
    /// descent loop.
    stage: String,
    a: u64,
    b: u64,
    iterations: u64,
    table_key: String,
}

/// Starting point of the descent: with M minimal such that
/// s_{M+1} > ln q / ln alpha, the smaller of p^{s_{M+1}} q^{r_M} and
/// p^{s_M} q^{r_{M+1}}. Every interval [n, n*alpha) with n at least this
/// value contains an element.
pub fn n_start(ctx: &SUnitContext, alpha: Alpha) -> Result<ExponentPair> {
    alpha.check_range(ctx.p())?;
    let (p, q) = (ctx.p(), ctx.q());
    loop {
        let table = ctx.table();
        match table.find_m(alpha) {
            Ok(m) => {
                let e = table.entries();
                let (rm, sm) = (&e[m].r, &e[m].s);
                let (rn, sn) = (&e[m + 1].r, &e[m + 1].s);
                let to_u64 = |x: &BigUint| -> Result<u64> {
                    x.to_u64()
                        .ok_or_else(|| Error::ResourceGuard("start exponent exceeds u64".into()))
                };
                let c1 = ExponentPair::new(to_u64(sn)?, to_u64(rm)?);
                let c2 = ExponentPair::new(to_u64(sm)?, to_u64(rn)?);
                return Ok(if arith::compare(c1, c2, p, q) == Ordering::Less {
                    c1
                } else {
                    c2
                });
            }
            Err(Error::ExtendTable { .. }) => {
                // grow far enough that find_m can see past the threshold
                let last = table.entries().last().unwrap().s.clone();
                let needed = last.to_u64().ok_or_else(|| {
                    Error::ResourceGuard("convergent denominators exceed u64".into())
                })?;
                ctx.ensure_covers(needed.saturating_mul(2), 0)?;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Per-solve snapshot of the convergents as machine integers, plus the
/// memoized result of the only expensive comparison the hot loop needs:
/// whether a convergent's step stays within a factor alpha.
struct Ladders {
    p: u64,
    q: u64,
    alpha: Alpha,
    /// (denominator, numerator) of the lower-side principal convergents,
    /// ascending.
    lowers: Vec<(u64, u64)>,
    /// (numerator, denominator) of the upper-side principal convergents,
    /// ascending.
    uppers: Vec<(u64, u64)>,
    lower_ok: Vec<Option<bool>>,
    upper_ok: Vec<Option<bool>>,
}

impl Ladders {
    fn build(ctx: &SUnitContext, alpha: Alpha, start: ExponentPair) -> Result<Ladders> {
        let (p, q) = (ctx.p(), ctx.q());
        // During the descent the element only shrinks, so the exponents are
        // bounded by those of the start value.
        let a_max = exponent_bound(p, q, start, true);
        let b_max = exponent_bound(p, q, start, false);
        let table = ctx.ensure_covers(a_max, b_max)?;
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        for c in table.entries() {
            let (r, s) = (c.r.to_u64(), c.s.to_u64());
            let (Some(r), Some(s)) = (r, s) else { break };
            match c.side() {
                Side::Lower => lowers.push((s, r)),
                Side::Upper => uppers.push((r, s)),
            }
        }
        let (nl, nu) = (lowers.len(), uppers.len());
        Ok(Ladders {
            p,
            q,
            alpha,
            lowers,
            uppers,
            lower_ok: vec![None; nl],
            upper_ok: vec![None; nu],
        })
    }

    /// Index of the lower convergent with maximal denominator <= a.
    fn lower_at(&self, a: u64) -> Option<usize> {
        let i = self.lowers.partition_point(|&(s, _)| s <= a);
        i.checked_sub(1)
    }

    /// Index of the upper convergent with maximal numerator <= b.
    fn upper_at(&self, b: u64) -> Option<usize> {
        let i = self.uppers.partition_point(|&(r, _)| r <= b);
        i.checked_sub(1)
    }

    /// Whether the lower convergent's step keeps the element >= n/alpha,
    /// i.e. s ln p - r ln q <= ln alpha (equality allowed: landing exactly
    /// on n/alpha is admissible).
    fn lower_admissible(&mut self, i: usize) -> bool {
        if let Some(v) = self.lower_ok[i] {
            return v;
        }
        let (s, r) = self.lowers[i];
        let v = arith::compare_scaled(
            self.alpha.den(),
            ExponentPair::new(s, 0),
            self.alpha.num(),
            ExponentPair::new(0, r),
            self.p,
            self.q,
        ) != Ordering::Greater;
        self.lower_ok[i] = Some(v);
        v
    }

    fn upper_admissible(&mut self, i: usize) -> bool {
        if let Some(v) = self.upper_ok[i] {
            return v;
        }
        let (r, s) = self.uppers[i];
        let v = arith::compare_scaled(
            self.alpha.den(),
            ExponentPair::new(0, r),
            self.alpha.num(),
            ExponentPair::new(s, 0),
            self.p,
            self.q,
        ) != Ordering::Greater;
        self.upper_ok[i] = Some(v);
        v
    }

    fn lower_move(&self, i: usize, n: ExponentPair) -> ExponentPair {
        let (s, r) = self.lowers[i];
        ExponentPair::new(n.a - s, n.b + r)
    }

    fn upper_move(&self, i: usize, n: ExponentPair) -> ExponentPair {
        let (r, s) = self.uppers[i];
        ExponentPair::new(n.a + s, n.b - r)
    }

    /// One fast step. The two candidate magnitudes |s ln p - r ln q| are
    /// strictly decreasing in the convergent index, so "which candidate is
    /// farther" is decided by comparing indices, never by arithmetic.
    fn step(&mut self, n: ExponentPair) -> CfStep {
        let li = self.lower_at(n.a);
        let ui = self.upper_at(n.b);
        match (li, ui) {
            (Some(li), Some(ui)) => {
                let l_ok = self.lower_admissible(li);
                let u_ok = self.upper_admissible(ui);
                // global index of a lower entry is 2*li, of an upper 2*ui+1
                let lower_is_farther = 2 * li < 2 * ui + 1;
                match (l_ok, u_ok) {
                    (true, true) => {
                        // both admissible: take the farther one (x_min)
                        if lower_is_farther {
                            CfStep::Stepped(self.lower_move(li, n))
                        } else {
                            CfStep::Stepped(self.upper_move(ui, n))
                        }
                    }
                    (true, false) => CfStep::Stepped(self.lower_move(li, n)),
                    (false, true) => CfStep::Stepped(self.upper_move(ui, n)),
                    (false, false) => {
                        // shadow = the nearer candidate (x_max)
                        let shadow = if lower_is_farther {
                            self.upper_move(ui, n)
                        } else {
                            self.lower_move(li, n)
                        };
                        CfStep::Exhausted {
                            shadow: Some(shadow),
                        }
                    }
                }
            }
            (Some(li), None) => {
                if self.lower_admissible(li) {
                    CfStep::Stepped(self.lower_move(li, n))
                } else {
                    CfStep::Exhausted {
                        shadow: Some(self.lower_move(li, n)),
                    }
                }
            }
            (None, Some(ui)) => {
                if self.upper_admissible(ui) {
                    CfStep::Stepped(self.upper_move(ui, n))
                } else {
                    CfStep::Exhausted {
                        shadow: Some(self.upper_move(ui, n)),
                    }
                }
            }
            (None, None) => CfStep::Exhausted { shadow: None },
        }
    }
}

/// One continued-fraction descent step at `n`, as a standalone operation.
pub fn descend_cf(ctx: &SUnitContext, n: ExponentPair, alpha: Alpha) -> Result<CfStep> {
    let mut ladders = Ladders::build(ctx, alpha, n)?;
    Ok(ladders.step(n))
}

/// Certified floor of (ln n - b ln q)/ln p = n.a + (n.b - b) ln q / ln p,
/// the largest exponent a with p^a * q^b <= n. Irrational for b != n.b, so
/// the interval always resolves; b = n.b is the exact case n.a.
fn a_max_at(p: u64, q: u64, n: ExponentPair, b: u64) -> u64 {
    if b == n.b {
        return n.a;
    }
    let db = n.b as i64 - b as i64;
    arith::escalate(|bits| {
        let x = arith::linear_form_i64(n.a as i64, db, p, q, bits)
            .div(&arith::log_prime(p, bits))?;
        x.floor_certified()
    })
    .expect("floor of an irrational value")
    .to_u64()
    .expect("exponent fits u64")
}

/// Largest exponent of p (if `of_p`) or q fitting under the value of `n`.
fn exponent_bound(p: u64, q: u64, n: ExponentPair, of_p: bool) -> u64 {
    if n.is_one() {
        return 0;
    }
    let (x, a, b) = if of_p { (p, n.a, n.b) } else { (q, n.b, n.a) };
    if a > 0 && b == 0 {
        return a;
    }
    arith::escalate(|bits| {
        let num = arith::linear_form_i64(n.a as i64, n.b as i64, p, q, bits);
        num.div(&arith::log_prime(x, bits))?.floor_certified()
    })
    .map(|f| f.to_u64().expect("exponent fits u64"))
    .unwrap_or(a + b) // unreachable fallback; sum always dominates
}

/// Does the (unique possible) element x = p^a q^b with x < n and maximal a
/// for column b satisfy x * alpha >= n?
fn column_candidate(
    p: u64,
    q: u64,
    n: ExponentPair,
    alpha: Alpha,
    b: u64,
) -> Option<ExponentPair> {
    let mut a = a_max_at(p, q, n, b);
    if a == n.a && b == n.b {
        if a == 0 {
            return None;
        }
        a -= 1;
    }
    let cand = ExponentPair::new(a, b);
    // cand * alpha >= n, allowing equality (x = n/alpha exactly)
    (arith::compare_scaled(alpha.num(), cand, alpha.den(), n, p, q) != Ordering::Less)
        .then_some(cand)
}

/// Trivial search, open threshold: an element x with n/alpha <= x < n.
///
/// Only one exponent of p can work per column b (alpha <= p), so each column
/// is a single certified test. The shadow (the rejected fast-step candidate,
/// which is known to be < n/alpha) prunes columns: any solution must have
/// a > shadow.a or b > shadow.b.
pub fn trivial_search_open(
    ctx: &SUnitContext,
    n: ExponentPair,
    alpha: Alpha,
    shadow: Option<ExponentPair>,
) -> Option<ExponentPair> {
    let (p, q) = (ctx.p(), ctx.q());
    let b_hi = exponent_bound(p, q, n, false);
    match shadow {
        Some(sh) => {
            for b in sh.b + 1..=b_hi {
                if let Some(x) = column_candidate(p, q, n, alpha, b) {
                    return Some(x);
                }
            }
            for b in 0..=sh.b.min(b_hi) {
                if let Some(x) = column_candidate(p, q, n, alpha, b) {
                    if x.a > sh.a {
                        return Some(x);
                    }
                }
            }
            None
        }
        None => (0..=b_hi).find_map(|b| column_candidate(p, q, n, alpha, b)),
    }
}

/// Factor `v` over {p, q}; `None` if other primes divide it.
pub(crate) fn as_element(mut v: BigUint, p: u64, q: u64) -> Option<ExponentPair> {
    if v.is_zero() {
        return None;
    }
    let mut a = 0u64;
    let (pp, qq) = (BigUint::from(p), BigUint::from(q));
    while (&v % &pp).is_zero() {
        v /= &pp;
        a += 1;
    }
    let mut b = 0u64;
    while (&v % &qq).is_zero() {
        v /= &qq;
        b += 1;
    }
    v.is_one().then_some(ExponentPair::new(a, b))
}

/// Trivial search, closed threshold: an element x with floor(n/alpha) <= x < n.
///
/// Runs only after the open search failed, so the window shrinks to the
/// single integer floor(n/alpha); the search reduces to testing whether that
/// integer factors over {p, q}. (A full scan against the closed threshold
/// would find exactly the same thing; the reduction is tested against it.)
/// Requires materializing n to take the exact rational floor.
pub fn trivial_search_closed(
    ctx: &SUnitContext,
    n: ExponentPair,
    alpha: Alpha,
    max_digits: u64,
) -> Result<Option<ExponentPair>> {
    let (p, q) = (ctx.p(), ctx.q());
    let digits = digit_len(p, q, n);
    if digits > max_digits {
        return Err(Error::ResourceGuard(format!(
            "materializing a {digits}-digit integer exceeds the {max_digits}-digit limit"
        )));
    }
    let value = n.value(p, q);
    let floor = value * alpha.den() / alpha.num();
    Ok(as_element(floor, p, q))
}

/// Number of decimal digits of p^a * q^b.
pub fn digit_len(p: u64, q: u64, n: ExponentPair) -> u64 {
    if n.is_one() {
        return 1;
    }
    // p^a * q^b is a power of 10 only for {p,q} = {2,5} with a = b
    if ((p == 2 && q == 5) || (p == 5 && q == 2)) && n.a == n.b {
        return n.a + 1;
    }
    let f = arith::escalate(|bits| {
        let ln10 = arith::ln_big(&BigUint::from(10u32), bits);
        arith::log_value(n, p, q, bits).div(&ln10)?.floor_certified()
    })
    .expect("log10 of a non-power-of-10 is irrational");
    f.to_u64().expect("digit count fits u64") + 1
}

fn value_repr(p: u64, q: u64, end: ExponentPair, alpha: Alpha) -> String {
    let mut factors = Vec::new();
    match end.a {
        0 => {}
        1 => factors.push(p.to_string()),
        a => factors.push(format!("{p}^{a}")),
    }
    match end.b {
        0 => {}
        1 => factors.push(q.to_string()),
        b => factors.push(format!("{q}^{b}")),
    }
    if factors.is_empty() {
        factors.push("1".to_string());
    }
    let body = factors.join(" * ");
    if alpha.den() == 1 {
        format!("ceil({body} / {})", alpha.num())
    } else {
        format!("ceil({body} * {}/{})", alpha.den(), alpha.num())
    }
}

fn write_checkpoint(
    path: &Path,
    p: u64,
    q: u64,
    alpha: Alpha,
    n: ExponentPair,
    iterations: u64,
) -> Result<()> {
    let cp = Checkpoint {
        version: CHECKPOINT_VERSION,
        p,
        q,
        alpha_num: alpha.num(),
        alpha_den: alpha.den(),
        stage: "descent".to_string(),
        a: n.a,
        b: n.b,
        iterations,
        table_key: format!("cf-{p}-{q}"),
    };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string(&cp)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_checkpoint(path: &Path, p: u64, q: u64, alpha: Alpha) -> Result<(ExponentPair, u64)> {
    let cp: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if cp.version != CHECKPOINT_VERSION {
        return Err(Error::BadVersion(cp.version));
    }
    if cp.p != p || cp.q != q || cp.alpha_num != alpha.num() || cp.alpha_den != alpha.den() {
        return Err(Error::CheckpointMismatch(format!(
            "checkpoint is for ({}, {}, {}/{})",
            cp.p, cp.q, cp.alpha_num, cp.alpha_den
        )));
    }
    Ok((ExponentPair::new(cp.a, cp.b), cp.iterations))
}

/// Full solve with checkpoint/resume and pause support.
pub fn solve_with(
    ctx: &SUnitContext,
    alpha: Alpha,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    alpha.check_range(ctx.p())?;
    let (p, q) = (ctx.p(), ctx.q());
    let start = n_start(ctx, alpha)?;
    let (mut n, mut iterations) = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) if path.exists() => read_checkpoint(path, p, q, alpha)?,
        _ => (start, 0),
    };
    let mut ladders = Ladders::build(ctx, alpha, start)?;
    let step_budget = opts.max_steps.map(|m| iterations + m);
    let mut next_checkpoint = iterations + opts.checkpoint_every;
    loop {
        if let Some(budget) = step_budget {
            if iterations >= budget {
                if let Some(path) = &opts.checkpoint {
                    write_checkpoint(path, p, q, alpha, n, iterations)?;
                }
                return Ok(SolveOutcome::Paused { at: n, iterations });
            }
        }
        if iterations >= next_checkpoint {
            if let Some(path) = &opts.checkpoint {
                write_checkpoint(path, p, q, alpha, n, iterations)?;
            }
            next_checkpoint = iterations + opts.checkpoint_every;
        }
        match ladders.step(n) {
            CfStep::Stepped(next) => {
                n = next;
                iterations += 1;
            }
            CfStep::Exhausted { shadow } => {
                if let Some(x) = trivial_search_open(ctx, n, alpha, shadow) {
                    n = x;
                    iterations += 1;
                    continue;
                }
                if let Some(x) = trivial_search_closed(ctx, n, alpha, opts.max_digits)? {
                    n = x;
                    iterations += 1;
                    continue;
                }
                break;
            }
        }
    }
    let value = {
        let digits_est = digit_len(p, q, n);
        if digits_est > opts.max_digits {
            return Err(Error::ResourceGuard(format!(
                "final value near {digits_est} digits exceeds the materialization limit"
            )));
        }
        let v = n.value(p, q) * alpha.den();
        let num = BigUint::from(alpha.num());
        (&v + &num - BigUint::one()) / num
    };
    let digits = value.to_string().len() as u64;
    let result = BertrandResult {
        p,
        q,
        alpha,
        start,
        end: n,
        iterations,
        value_repr: value_repr(p, q, n, alpha),
        digits,
        value: opts.materialize.then_some(value),
    };
    if let Some(path) = &opts.checkpoint {
        let _ = std::fs::remove_file(path);
    }
    Ok(SolveOutcome::Done(result))
}

/// Compute n_{p,q}(alpha) with default options.
pub fn solve(ctx: &SUnitContext, alpha: Alpha) -> Result<BertrandResult> {
    match solve_with(ctx, alpha, &SolveOptions::default())? {
        SolveOutcome::Done(r) => Ok(r),
        SolveOutcome::Paused { .. } => unreachable!("no step budget was set"),
    }
}
