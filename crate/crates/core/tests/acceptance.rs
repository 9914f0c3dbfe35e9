//! Acceptance run: one pass/fail line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use keyorder::assets;
use keyorder::exec::{self, AgreementKind, Knowledge, Property, SearchLimits, SecretClasses, State};
use keyorder::keydep::{extract, ExtractOptions, KeyClassDag, KeyDepError};
use keyorder::model::{parse_model, Fact, Model};
use keyorder::oracle::{self, OracleConfig};
use keyorder::synth::{generate_chain_model, ChainSpec, LemmaOrdering};
use keyorder::term::Term;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {t:.2?}, limit {limit:?}"))
}

fn full_run() -> State {
    let m = assets::ensemble_static();
    let script = exec::parse_script(assets::STATIC_FULL_RUN, &m).expect("bundled script parses");
    exec::run_scenario(&m, &script, None).expect("full run executes").state
}

fn class_count_and_depth() -> Outcome {
    let start = Instant::now();
    let ex = extract(&assets::ensemble_dynamic(), &ExtractOptions::default()).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(5))?;
    let (n, d) = (ex.dag.len(), ex.dag.longest_chain());
    ensure(n == 10 && d == 6, format!("{n} classes, chain {d}"))?;
    Ok(format!("{n} classes, longest chain {d}"))
}

fn chain_recovery() -> Outcome {
    for d in [2, 4, 6, 8, 10] {
        let start = Instant::now();
        let spec = ChainSpec {
            depth: d,
            reuse: true,
            ordering: LemmaOrdering::Dependency,
        };
        let m = generate_chain_model(&spec).map_err(|e| e.to_string())?;
        let dag = extract(&m, &ExtractOptions::default()).map_err(|e| e.to_string())?.dag;
        within(start, Duration::from_secs(1))?;
        let lin = dag.linear_labels();
        let expected: Vec<String> = (0..=d).map(|i| format!("k{i}")).collect();
        ensure(lin == expected, format!("depth {d}: order {lin:?}"))?;
        ensure(dag.edges().len() == d, format!("depth {d}: {} edges", dag.edges().len()))?;
        // consecutive pairs all linked means the linear extension is unique
        for w in lin.windows(2) {
            ensure(dag.edge(&w[1], &w[0]).is_some(), format!("depth {d}: no edge {} -> {}", w[1], w[0]))?;
        }
    }
    Ok("depths 2..10 give simple chains".into())
}

const SEVEN_STEPS: [&str; 9] = [
    "CAM",
    "JoinRequest",
    "JoinResponse",
    "CAM",
    "JoinRequest",
    "JoinResponse",
    "Leave",
    "KUR",
    "KeyUpdate",
];

fn liveness() -> Outcome {
    let start = Instant::now();
    let state = full_run();
    let again = full_run();
    within(start, Duration::from_secs(2))?;
    ensure(state.trace == again.trace, "full run is not deterministic")?;
    let sent: Vec<String> = state
        .trace
        .actions_named("Sent")
        .map(|(_, a)| a.args[0].to_string().trim_matches('\'').to_string())
        .collect();
    ensure(sent == SEVEN_STEPS, format!("sent {sent:?}"))?;
    let commits = state.trace.actions_named("Commit").count();
    let running = state.trace.actions_named("Running").count();
    ensure(commits == 3 && running == 3, format!("{running} Running, {commits} Commit"))?;
    let v = exec::check_agreement(&state.trace, AgreementKind::NonInjectiveAgreement);
    ensure(v.is_empty(), format!("agreement fails on the honest run: {:?}", v))?;
    Ok(format!("{} steps, {} messages, {commits} commits matched", state.trace.len(), sent.len()))
}

fn secrets(state: &State) -> Vec<Term> {
    state
        .trace
        .actions_named("Secret_key")
        .map(|(_, a)| a.args[1].clone())
        .collect()
}

fn desk_secrecy() -> Outcome {
    let start = Instant::now();
    let state = full_run();
    let s = secrets(&state);
    ensure(s.len() == 15, format!("{} secret instances", s.len()))?;
    let leaked: Vec<String> = s.iter().filter(|k| state.knowledge.derivable(k)).map(|k| k.to_string()).collect();
    within(start, Duration::from_secs(10))?;
    ensure(leaked.is_empty(), format!("derivable: {leaked:?}"))?;
    Ok("none of 15 secret instances derivable".into())
}

fn edge_realizability() -> Outcome {
    let start = Instant::now();
    let state = full_run();
    let ex = extract(&assets::ensemble_static(), &ExtractOptions::default()).map_err(|e| e.to_string())?;
    let classes = SecretClasses::new(&state, None);
    let dag = &ex.full;
    let mut checked = 0;
    for e in dag.edges().iter().filter(|e| e.secrecy) {
        let (a, b) = (dag.label(e.from), dag.label(e.to));
        let protected = classes.instances(a);
        let realized = classes.instances(b).into_iter().any(|kb| {
            let mut k: Knowledge = state.knowledge.clone();
            k.add(kb.clone());
            protected
                .iter()
                .any(|ka| !state.knowledge.derivable(ka) && k.derivable(ka))
        });
        ensure(realized, format!("edge {a} -> {b} not realized"))?;
        checked += 1;
    }
    within(start, Duration::from_secs(30))?;
    ensure(checked > 0, "no secrecy edges")?;
    Ok(format!("{checked}/{checked} secrecy edges realized"))
}

fn misbinding() -> Outcome {
    let limits = SearchLimits {
        max_steps: 12,
        fresh: 6,
        depth: Some(6),
        reveal: false,
    };
    let props = [
        Property::Agreement(AgreementKind::WeakAgreement),
        Property::Agreement(AgreementKind::NonInjectiveAgreement),
        Property::Agreement(AgreementKind::Aliveness),
    ];
    let mut report = Vec::new();
    for (name, m, expect) in [
        ("no-receiver-check", assets::ensemble_static_nomatch(), [false, false, true]),
        ("baseline", assets::ensemble_static(), [true, true, true]),
    ] {
        let start = Instant::now();
        let out = exec::search_many(&m, &props, &limits, None).map_err(|e| e.to_string())?;
        // one exploration serves three properties
        within(start, Duration::from_secs(3 * 120))?;
        for ((p, o), holds) in props.iter().zip(&out).zip(expect) {
            ensure(o.holds() == holds, format!("{name}: {p} holds={} expected {holds}", o.holds()))?;
        }
        let marks: Vec<&str> = out.iter().map(|o| if o.holds() { "holds" } else { "violated" }).collect();
        report.push(format!("{name} {}", marks.join("/")));
    }
    Ok(report.join(", "))
}

fn kdf_fixture() -> Outcome {
    let m = parse_model(
        "theory Kdf begin
         functions: kdf/2
         rule A: [Fr(~a), Fr(~b)] --> [Out(senc('m', kdf(~a, ~b)))]
         end",
    )
    .map_err(|e| e.to_string())?;
    let ex = extract(&m, &ExtractOptions::default()).map_err(|e| e.to_string())?;
    let dag = &ex.dag;
    let derived = "kdf(~a, ~b)";
    for input in ["a", "b"] {
        let e = dag.edge(derived, input);
        ensure(
            e.is_some_and(|e| e.secrecy),
            format!("missing edge {derived} -> {input}"),
        )?;
    }
    ensure(dag.len() == 3, format!("{} classes", dag.len()))?;
    Ok("derived key depends on both inputs".into())
}

fn replay() -> Outcome {
    let mut dup = full_run().trace;
    let first = dup
        .steps
        .iter()
        .find(|s| s.actions.iter().any(|a| a.is("Message")))
        .cloned()
        .ok_or("no Message action in full run")?;
    let mut copy = first.clone();
    copy.index = dup.len() + 1;
    copy.actions.retain(|a| a.is("Message"));
    dup.steps.push(copy);
    ensure(!exec::check_replay_restriction(&dup), "duplicate accepted")?;
    ensure(exec::check_replay_restriction(&full_run().trace), "full run rejected")?;
    let mut hand = exec::Trace::default();
    let msg = Fact::new("Message", vec![Term::constant("x"), Term::constant("V1")]);
    for i in 1..=2 {
        hand.steps.push(exec::Step {
            index: i,
            rule: "R".into(),
            actions: vec![msg.clone()],
        });
    }
    ensure(!exec::check_replay_restriction(&hand), "hand-built duplicate accepted")?;
    Ok("duplicate rejected, full run accepted".into())
}

fn oracle_config() -> OracleConfig {
    OracleConfig::new(
        ["ltk_CA", "ltk", "jrek", "eJoin", "pgk"].map(String::from).to_vec(),
        vec!["ltk".into(), "ltk_CA".into()],
    )
}

/// (goal lines on stdin, expected indices on stdout)
const ORACLE_FIXTURES: &[(&str, &str)] = &[
    ("", ""),
    ("0: KU( ~pgk.1 ) @ #vk\n1: secret_pgk\n", "1\n0\n"),
    ("0: secret_pgk\n1: !KU( ~n.1 ) @ #vk\n", ""),
    ("0: KU( ~pgk.1 )\n1: KU( ~ltk.2 )\n", "1\n0\n"),
    ("0: KU( ~eJoin.1 )\n1: KU( sign(<'a'>, ~ltk.2) )\n", "1\n0\n"),
    ("0: KU( sign(x, ~ltk.1) )\n1: KU( ~jrek.2 )\n2: secret_jrek\n", "2\n0\n1\n"),
    ("0: secret_pgk\n1: secret_ltk\n2: KU( ~pgk.1 )\n3: KU( ~ltk.1 )\n", "1\n0\n3\n2\n"),
    ("0: secret_pgk\n1: KU( ~ltk.1 )\n", "1\n"),
    ("0: St_A_1( x )\n1: In( x )\n", ""),
    ("0: secret_pgkUpdate\n1: KU( ~pgk.1 )\n", "1\n"),
    ("0: KU( ~pgkUpdate.2 )\n", ""),
    ("0: !Ltk( $A, ~ltk.1 ) with sign(m, ~ltk.1)\n", "0\n"),
    ("0: KU( ~eJoin.1 )\n1: KU( ~eJoin.2 )\n", "0\n1\n"),
    ("0: KU( ~ltk.1 )\n1: KU( ~ltk_CA.1 )\n", "1\n0\n"),
    ("5: KU( ~pgk.1 )\n2: KU( ~jrek.1 )\n", "2\n5\n"),
    ("0: KU( senc(~pgk.1, k) )\n", ""),
    (
        "0: In( x )\n1: KU( ~pgk.1 )\n2: secret_jrek\n3: KU( sign(m, ~ltk.2) )\n4: KU( ~jrek.3 )\n5: secret_pgk\n",
        "2\n5\n3\n4\n1\n",
    ),
    ("garbage line\n0: KU( ~pgk.1 )\n", "0\n"),
    ("0: KU( ~pgk.1 )\n0: KU( ~ltk.1 )\n", "0\n"),
    ("\n\n3: KU( ~jrek.1 )\n\n", "3\n"),
    ("0: KU( ~pgk.1 )\n1: secret_eJoin\n2: KU( ~eJoin.1 )\n", "1\n2\n0\n"),
    ("0: KU(~pgk.1)\n1: KU(~ltk_CA.9)\n2: secret_ltk_CA\n", "2\n1\n0\n"),
    ("0: KU( pk(~jrek.1) )\n1: KU( ~jrek.1 )\n", "1\n"),
    ("0: sign(m, ~eJoin.1) in KU( ~eJoin.1 )\n", "0\n"),
];

fn serve(cfg: &OracleConfig, input: &str) -> Result<String, String> {
    let mut out = Vec::new();
    oracle::serve(cfg, "lemma", input.as_bytes(), &mut out, std::io::sink()).map_err(|e| e.to_string())?;
    String::from_utf8(out).map_err(|e| e.to_string())
}

fn oracle_suite() -> Outcome {
    let cfg = oracle_config();
    for (i, (input, expected)) in ORACLE_FIXTURES.iter().enumerate() {
        let got = serve(&cfg, input)?;
        ensure(got == *expected, format!("fixture {i}: got {got:?}, expected {expected:?}"))?;
        ensure(serve(&cfg, input)? == got, format!("fixture {i}: output varies"))?;
    }
    // a custom helper pattern changes which goals count as helpers
    let mut custom = oracle_config();
    custom.helper_pattern = "aux_<label>_ok".into();
    let got = serve(&custom, "0: aux_pgk_ok\n1: KU( ~pgk.1 )\n2: secret_pgk\n")?;
    ensure(got == "0\n1\n", format!("custom pattern: got {got:?}"))?;
    // with no ordering nothing is ranked
    let empty = OracleConfig::new(vec![], vec![]);
    ensure(serve(&empty, "0: KU( ~pgk.1 )\n")?.is_empty(), "empty ordering ranked a goal")?;
    Ok(format!("{} fixtures", ORACLE_FIXTURES.len() + 2))
}

/// A model whose class `k{i}` is sent under every `k{j}` with `deps[i]` containing `j`.
fn layered_model(n: usize, deps: &[BTreeSet<usize>], extra: &str) -> Model {
    let mut text = String::from("theory G begin\n");
    for i in 0..n {
        let mut prem = vec![format!("Fr(~k{i})")];
        let mut concl = vec![format!("!Key('k{i}', ~k{i})")];
        for j in &deps[i] {
            prem.push(format!("!Key('k{j}', k{j})"));
            concl.push(format!("Out(senc(~k{i}, k{j}))"));
        }
        text += &format!("rule R{i}: [{}] --> [{}]\n", prem.join(", "), concl.join(", "));
    }
    text += extra;
    text += "end\n";
    parse_model(&text).expect("generated model parses")
}

fn reach(n: usize, deps: &[BTreeSet<usize>]) -> Vec<BTreeSet<usize>> {
    let mut r = deps.to_vec();
    for k in 0..n {
        for i in 0..n {
            if r[i].contains(&k) {
                let via = r[k].clone();
                r[i].extend(via);
            }
        }
    }
    r
}

fn by_label(dag: &KeyClassDag, c: &[BTreeSet<usize>]) -> Vec<(String, BTreeSet<String>)> {
    let mut v: Vec<_> = c
        .iter()
        .enumerate()
        .map(|(i, s)| (dag.label(i).to_string(), s.iter().map(|&j| dag.label(j).to_string()).collect()))
        .collect();
    v.sort();
    v
}

fn axioms(n: usize, deps: &[BTreeSet<usize>]) -> Result<(), String> {
    let ex = extract(&layered_model(n, deps, ""), &ExtractOptions::default()).map_err(|e| e.to_string())?;
    let (full, dag) = (&ex.full, &ex.dag);
    // a value never used as a key, nor protected by one, is not a key class
    let used: BTreeSet<usize> = (0..n).filter(|&i| !deps[i].is_empty() || deps.iter().any(|d| d.contains(&i))).collect();
    ensure(full.len() == used.len(), format!("{} classes, expected {}", full.len(), used.len()))?;
    let c = full.closure();
    for (a, ca) in c.iter().enumerate() {
        ensure(!ca.contains(&a), format!("{} reaches itself", full.label(a)))?;
        for b in ca {
            ensure(c[*b].is_subset(ca), "closure not transitive")?;
        }
    }
    for e in full.edges().iter().chain(dag.edges()) {
        ensure(e.from != e.to, "stored self edge")?;
    }
    ensure(by_label(full, &c) == by_label(dag, &dag.closure()), "reduction changed the closure")?;
    let expected: Vec<(String, BTreeSet<String>)> = {
        let r = reach(n, deps);
        let mut v: Vec<_> = used
            .iter()
            .map(|&i| (format!("k{i}"), r[i].iter().map(|j| format!("k{j}")).collect()))
            .collect();
        v.sort();
        v
    };
    ensure(by_label(full, &c) == expected, "closure differs from independent reachability")?;
    // any generated dependency reversed closes a cycle
    if let Some((i, j)) = (0..n).find_map(|i| deps[i].first().map(|&j| (i, j))) {
        let back = format!("rule Back: [!Key('k{i}', ki), !Key('k{j}', kj)] --> [Out(senc(kj, ki))]\n");
        match extract(&layered_model(n, deps, &back), &ExtractOptions::default()) {
            Err(KeyDepError::CyclicDependency(_)) => {}
            other => return Err(format!("cycle not rejected: {:?}", other.map(|e| e.dag.labels().to_vec()))),
        }
    }
    Ok(())
}

fn order_axioms() -> Outcome {
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestCaseError, TestRunner};

    const CASES: u32 = 1000;
    let strategy = (2usize..8).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), proptest::collection::vec(any::<bool>(), pairs))
    });
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(n, bits)| {
            let mut deps = vec![BTreeSet::new(); n];
            let mut it = bits.into_iter();
            for i in 0..n {
                for j in 0..i {
                    if it.next().unwrap_or(false) {
                        deps[i].insert(j);
                    }
                }
            }
            axioms(n, &deps).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{CASES} generated models"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("class count and depth", class_count_and_depth),
        ("chain recovery", chain_recovery),
        ("oracle conformance", oracle_suite),
        ("full-run liveness", liveness),
        ("desk-scale secrecy", desk_secrecy),
        ("edge realizability", edge_realizability),
        ("misbinding reproduction", misbinding),
        ("order axioms", order_axioms),
        ("kdf dependencies", kdf_fixture),
        ("replay restriction", replay),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let t = start.elapsed();
        match res {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg} [{t:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
