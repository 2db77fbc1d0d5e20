//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! `cargo test -p sessub --test acceptance -- --nocapture`

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sessub::inductive::{derive_observed, Visit};
use sessub::memo::within_visited_bound;
use sessub::random::TypeGen;
use sessub::worstgen::tk_size;
use sessub::{
    alpha_equal, bench, coinductive_equal, gen_tk, parse, print, size, sub_bottom_up, sub_pair,
    sub_top_down, substitute, Algorithm, CheckError, DeriveOptions, Ident, Measure, SessionType,
    TypeSet,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, start: Instant, mut o: Outcome) -> Outcome {
    let took = start.elapsed();
    if took >= limit {
        o.pass = false;
    }
    o.detail = format!("{}; {:.2}s of {}s", o.detail, took.as_secs_f64(), limit.as_secs());
    o
}

fn closed_corpus(seed: u64, n: usize, max_size: usize) -> Vec<SessionType> {
    let mut g = TypeGen::new(seed, max_size);
    (0..n).map(|_| g.closed()).collect()
}

fn pair_corpus(seed: u64, n: usize, max_size: usize) -> Vec<(SessionType, SessionType)> {
    let mut g = TypeGen::new(seed, max_size);
    (0..n).map(|_| g.pair()).collect()
}

/// Visited-set sizes and `|Sub(T, U)|` of every completed memo check, for the
/// bound check at the end.
type MemoLog = Vec<(u64, usize)>;

fn lemma1(corpus: &[SessionType]) -> Outcome {
    let start = Instant::now();
    let bad = corpus
        .iter()
        .filter(|t| sub_bottom_up(t).len() > size(t))
        .count();
    within(
        Duration::from_secs(10),
        start,
        outcome(bad == 0, format!("{} types, {bad} violations", corpus.len())),
    )
}

fn corollary(corpus: &[SessionType]) -> Outcome {
    let mut bad = 0;
    for t in corpus {
        match sub_top_down(t) {
            Ok(s) if s.len() <= size(t) => {}
            _ => bad += 1,
        }
    }
    outcome(bad == 0, format!("{} types, {bad} violations", corpus.len()))
}

fn containment(corpus: &[SessionType]) -> Outcome {
    let mut bad = 0;
    for t in corpus {
        match sub_top_down(t) {
            Ok(s) if s.is_subset(&sub_bottom_up(t)) => {}
            _ => bad += 1,
        }
    }
    outcome(bad == 0, format!("{} types, {bad} violations", corpus.len()))
}

fn decomposition() -> Outcome {
    let start = Instant::now();
    let mut g = TypeGen::new(4, 20);
    let xs: Vec<Ident> = ["X", "Y", "Z", "W"]
        .iter()
        .map(|s| Ident::new(*s).unwrap())
        .collect();
    let mut bad = 0;
    let mut checked = 0;
    for i in 0..500 {
        let x = &xs[i % xs.len()];
        let t = g.open(std::slice::from_ref(x));
        let q = g.closed();
        let sub_q = sub_bottom_up(&q);
        let sub_t = sub_bottom_up(&t);
        for s in sub_bottom_up(&substitute(&t, x, &q)).iter() {
            checked += 1;
            let ok = sub_q.contains(s)
                || sub_t
                    .iter()
                    .any(|s2| alpha_equal(&substitute(s2, x, &q), s));
            if !ok {
                bad += 1;
            }
        }
    }
    within(
        Duration::from_secs(30),
        start,
        outcome(bad == 0, format!("500 triples, {checked} subterms, {bad} undecomposed")),
    )
}

fn budget() -> DeriveOptions {
    DeriveOptions {
        step_limit: 10_000_000,
        ..DeriveOptions::default()
    }
}

/// Criteria 5 and 6 share one instrumented run per pair.
fn confinement_and_measure(pairs: &[(SessionType, SessionType)]) -> (Outcome, Outcome) {
    let mut outside = 0u64;
    let mut judgements = 0u64;
    let mut bad_steps = 0u64;
    let mut repeated = 0u64;
    let mut bad_sum_steps = 0u64;
    let mut skipped = 0;
    for (t, u) in pairs {
        let allowed: TypeSet = sub_pair(t, u).expect("closed pair");
        // (|sigma|, nd(lhs)) and, for diagnosis, (|sigma|, nd(lhs) + nd(rhs)).
        let mut path: Vec<((usize, usize), (usize, usize))> = Vec::new();
        let mut observe = |v: &Visit<'_>| {
            judgements += 1;
            let j = v.judgement();
            let claims = j.sigma.iter().chain(std::iter::once(&j.goal));
            for c in claims {
                outside += u64::from(!allowed.contains(c.lhs()));
                outside += u64::from(!allowed.contains(c.rhs()));
            }
            let nd_l = sessub::nesting_depth(j.goal.lhs());
            let m = (j.sigma.len(), nd_l);
            let m_sum = (j.sigma.len(), nd_l + sessub::nesting_depth(j.goal.rhs()));
            let decreases = |new: (usize, usize), old: (usize, usize)| {
                new.0 > old.0 || (new.0 == old.0 && new.1 < old.1)
            };
            path.truncate(v.depth - 1);
            if let Some(&(prev, prev_sum)) = path.last() {
                bad_steps += u64::from(!decreases(m, prev));
                bad_sum_steps += u64::from(!decreases(m_sum, prev_sum));
            }
            if path.iter().any(|(p, _)| *p == m) {
                repeated += 1;
            }
            path.push((m, m_sum));
        };
        match derive_observed(t, u, &budget(), &mut observe) {
            Ok(_) => {}
            Err(CheckError::StepLimit { .. }) => skipped += 1,
            Err(e) => panic!("derive failed on a generated pair: {e}"),
        }
    }
    let conf = outcome(
        outside == 0,
        format!(
            "{} pairs, {judgements} judgements, {outside} components outside Sub(T, U), {skipped} truncated",
            pairs.len()
        ),
    );
    let meas = outcome(
        bad_steps == 0 && repeated == 0,
        format!(
            "(|sigma|, nd(lhs)): {bad_steps} bad steps, {repeated} repeated; \
             (|sigma|, nd(lhs) + nd(rhs)): {bad_sum_steps} bad steps"
        ),
    );
    (conf, meas)
}

fn agreement(pairs: &[(SessionType, SessionType)], log: &mut MemoLog) -> Outcome {
    let mut skipped = 0;
    let mut disagree = 0;
    let mut related = 0;
    for (t, u) in pairs {
        let oracle = Algorithm::Oracle.check(t, u, 0).unwrap().verdict;
        let memo = Algorithm::Memo.check(t, u, u64::MAX).unwrap();
        log.push((memo.nodes_expanded, sub_pair(t, u).unwrap().len()));
        related += usize::from(oracle.holds());
        match Algorithm::Inductive.check(t, u, 10_000_000) {
            Ok(r) => {
                if r.verdict != oracle || memo.verdict != oracle {
                    disagree += 1;
                }
            }
            Err(CheckError::StepLimit { .. }) => {
                skipped += 1;
                if memo.verdict != oracle {
                    disagree += 1;
                }
            }
            Err(e) => panic!("inductive failed on a generated pair: {e}"),
        }
    }
    let rate = 100.0 * skipped as f64 / pairs.len() as f64;
    outcome(
        disagree == 0,
        format!(
            "{} pairs ({related} related), {disagree} disagreements, {skipped} skipped ({rate:.2}%)",
            pairs.len()
        ),
    )
}

fn worst_case_family(log: &mut MemoLog) -> Outcome {
    let start = Instant::now();
    let mu = parse("rec X. ?[X].X").unwrap();
    let mut failures = Vec::new();
    for k in 1..=5 {
        let (t, u) = (gen_tk(k), gen_tk(k + 1));
        for alg in Algorithm::ALL {
            match alg.check(&t, &u, u64::MAX) {
                Ok(r) if r.verdict.holds() => {
                    if alg == Algorithm::Memo {
                        log.push((r.nodes_expanded, sub_pair(&t, &u).unwrap().len()));
                    }
                }
                Ok(_) => failures.push(format!("{alg} refuted k={k}")),
                Err(e) => failures.push(format!("{alg} failed k={k}: {e}")),
            }
        }
    }
    for k in 1..=6 {
        if !coinductive_equal(&gen_tk(k), &mu).unwrap() {
            failures.push(format!("T_{k} not equal to rec X. ?[X].X"));
        }
    }
    within(
        Duration::from_secs(300),
        start,
        outcome(
            failures.is_empty(),
            if failures.is_empty() {
                "k=1..5 subtype for all algorithms, T_1..T_6 equal".to_string()
            } else {
                failures.join("; ")
            },
        ),
    )
}

fn strictly_growing_with_nondecreasing_ratio(counts: &[u64]) -> bool {
    counts.windows(2).all(|w| w[0] < w[1])
        && counts
            .windows(3)
            .all(|w| (w[1] as u128) * (w[1] as u128) <= (w[0] as u128) * (w[2] as u128))
}

fn blowup(log: &mut MemoLog) -> Outcome {
    let rows = match bench(5, &Algorithm::ALL, u64::MAX) {
        Ok(rows) => rows,
        Err(e) => return outcome(false, format!("bench failed: {e}")),
    };
    for r in &rows {
        if let Measure::Count(n) = r.memo_nodes {
            log.push((n, sub_pair(&gen_tk(r.k), &gen_tk(r.k + 1)).unwrap().len()));
        }
    }
    let column = |f: fn(&sessub::BenchRow) -> Measure| -> Vec<u64> {
        rows.iter()
            .filter(|r| r.k >= 2)
            .map(|r| f(r).count().unwrap())
            .collect()
    };
    let ind = column(|r| r.inductive_nodes);
    let memo = column(|r| r.memo_nodes);
    let oracle_ok = rows.iter().all(|r| {
        r.oracle_pairs.count().unwrap() <= (r.size_sum as u64) * (r.size_sum as u64)
    });
    let pass = strictly_growing_with_nondecreasing_ratio(&ind)
        && strictly_growing_with_nondecreasing_ratio(&memo)
        && oracle_ok;
    let oracle: Vec<u64> = rows.iter().map(|r| r.oracle_pairs.count().unwrap()).collect();
    outcome(
        pass,
        format!("k=2..5 inductive {ind:?}, memo {memo:?}; k=1..5 oracle {oracle:?}"),
    )
}

fn size_formula() -> Outcome {
    let formula_ok = (1..=11).all(|k| size(&gen_tk(k)) == tk_size(k));
    let rows = bench(10, &[], 0).unwrap();
    let sums_ok = rows
        .iter()
        .all(|r| r.size_sum == tk_size(r.k) + tk_size(r.k + 1));
    outcome(
        formula_ok && sums_ok,
        format!("size(T_k) = 2 + 3k + 5k(k-1)/2 for k <= 11: {formula_ok}; size_sum k <= 10: {sums_ok}"),
    )
}

fn visited_bound(log: &MemoLog) -> Outcome {
    let bad = log
        .iter()
        .filter(|&&(v, s)| !within_visited_bound(v, s))
        .count();
    outcome(bad == 0, format!("{} memo checks, {bad} over the bound", log.len()))
}

fn round_trip() -> Outcome {
    let mut g = TypeGen::new(12, 30);
    let mut bad = 0;
    for i in 0..2000 {
        let t = if i % 2 == 0 {
            g.closed()
        } else {
            g.open(&[Ident::new("X").unwrap(), Ident::new("free").unwrap()])
        };
        match parse(&print(&t)) {
            Ok(back) if alpha_equal(&back, &t) => {}
            _ => bad += 1,
        }
    }
    outcome(bad == 0, format!("2000 types, {bad} mismatches"))
}

fn main() -> ExitCode {
    let corpus = closed_corpus(1, 2000, 40);
    let pairs_small = pair_corpus(5, 500, 25);
    let pairs = pair_corpus(7, 2000, 25);
    let mut log = MemoLog::new();

    let (c5, c6) = confinement_and_measure(&pairs_small);
    let results = [
        ("1 SubBU bound", lemma1(&corpus)),
        ("2 Sub bound", corollary(&corpus)),
        ("3 Sub within SubBU", containment(&corpus)),
        ("4 substitution decomposition", decomposition()),
        ("5 subterm confinement", c5),
        ("6 termination measure", c6),
        ("7 three-way agreement", agreement(&pairs, &mut log)),
        ("8 worst-case family", worst_case_family(&mut log)),
        ("9 blowup contrast", blowup(&mut log)),
        ("10 quadratic size", size_formula()),
        ("11 memo visited bound", visited_bound(&log)),
        ("12 round trip", round_trip()),
    ];

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
