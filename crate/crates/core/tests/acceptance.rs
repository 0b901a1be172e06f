//! Acceptance suite: one PASS/FAIL line per criterion, each with a pinned time
//! limit. Pass criterion numbers as arguments to run a subset, for example
//! `cargo test --release --test acceptance -- 1 4 9`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use maps_core::agents::react::{ReactPolicy, ReplayBackend, HISTORY_WINDOW};
use maps_core::agents::{build_policy, Growth, Mpc, OracleWorldModel, GreedyStochastic, Policy, TurnContext};
use maps_core::engine::{compute_rating, simulate_day_with_probe, RngStream, TickProbe};
use maps_core::game::{Game, GameError, Mode};
use maps_core::harness::{run_episode, trace_actions, trajectory_cv, HumanReferenceTable};
use maps_core::observe::{build_observation, json_part, note_of, OBSERVATION_SCHEMA};
use maps_core::protocol::{format_command, Command, SandboxAction};
use maps_core::sandbox::{SANDBOX_SOFT_CAP, STANDARD_BUDGET};
use maps_core::world::{layout::shipped_layout_names, PlacedEntity, EVALUATION_LAYOUTS, TRAINING_LAYOUTS};
use maps_core::{
    apply_action, new_park, parse, step, Action, Catalog, Difficulty, Layout, ParkState, ResearchSpeed, Subclass,
    Subtype,
};

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    check: Check,
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn catalog() -> Arc<Catalog> {
    Arc::new(Catalog::shipped())
}

fn park(c: &Catalog, layout: &str, difficulty: Difficulty, seed: u64) -> ParkState {
    new_park(c, Layout::shipped(layout).expect("shipped layout"), difficulty, seed)
}

fn place_text(x: i32, y: i32, kind: &str, subtype: &str, subclass: &str) -> String {
    format!("place(x={x}, y={y}, type=\"{kind}\", subtype=\"{subtype}\", subclass=\"{subclass}\")")
}

fn game_action(text: &str) -> Action {
    match parse(text) {
        Ok(Command::Game(a)) => a,
        other => panic!("{text} did not parse as a game action: {other:?}"),
    }
}

/// The policy's action for `state`, falling back to a wait when it is not a game action.
fn policy_action(policy: &mut dyn Policy, state: &ParkState, c: &Catalog) -> Action {
    let obs = build_observation(state, c);
    let text = String::new();
    let ctx = TurnContext { observation_text: &text, observation: &obs, state, catalog: c };
    match parse(&policy.next_action(&ctx).expect("scripted policies never fail")) {
        Ok(Command::Game(a)) => a,
        _ => Action::Wait,
    }
}

fn constant_fidelity() -> Result<String, String> {
    let c = catalog();
    let p = &c.params;

    let carousel = c.spec(Subtype::Carousel, Subclass::Yellow);
    ensure!(carousel.build_cost == 250 && carousel.refund() == 165, "carousel refund {}", carousel.refund());
    let mut s = park(&c, "ribs", Difficulty::Easy, 1);
    let pos = maps_core::agents::heuristic_position(&s, maps_core::agents::PlacementClass::Ride).expect("a ride tile");
    apply_action(&mut s, &c, &game_action(&place_text(pos.x, pos.y, "ride", "carousel", "yellow"))).map_err(|e| e.to_string())?;
    let after_build = s.money;
    apply_action(&mut s, &c, &Action::Remove { x: pos.x as i64, y: pos.y as i64 }).map_err(|e| e.to_string())?;
    ensure!(s.money - after_build == 165, "selling returned {}", s.money - after_build);
    for spec in c.specs.values() {
        ensure!(spec.refund() == spec.build_cost * 66 / 100, "refund of {:?}", spec.key);
    }

    let coaster = c.spec(Subtype::RollerCoaster, Subclass::Red);
    ensure!(coaster.base_excitement == 10.0, "red coaster excitement {}", coaster.base_excitement);
    let (mut s, wet) = shipped_layout_names()
        .find_map(|name| {
            let s = park(&c, name, Difficulty::Easy, 1);
            let wet = maps_core::agents::scripted::legal_tiles(&s, maps_core::Kind::Ride)
                .into_iter()
                .find(|&t| maps_core::world::placement::adjacent_water(&s, t) == 2)?;
            Some((s, wet))
        })
        .ok_or("no buildable tile touches two water tiles")?;
    s.entities.push(PlacedEntity {
        id: 1,
        key: coaster.key,
        pos: wet,
        price: 0,
        order_quantity: 0,
        inventory: 0,
        cleanliness: 1.0,
        broken: false,
        repair_points_remaining: 0.0,
        day: Default::default(),
    });
    let excitement = maps_core::world::effective_excitement(&s, &c, 1);
    ensure!(excitement == Some(12.0), "two water tiles gave excitement {excitement:?}");

    ensure!(p.survey_cost_per_guest == 500, "survey cost {}", p.survey_cost_per_guest);
    let mut s = park(&c, "ribs", Difficulty::Easy, 1);
    s.money = 10_000;
    let guests_seen = {
        let pos = maps_core::agents::heuristic_position(&s, maps_core::agents::PlacementClass::Ride).unwrap();
        step(&mut s, &c, &game_action(&place_text(pos.x, pos.y, "ride", "carousel", "yellow"))).map_err(|e| e.to_string())?;
        s.last_guests.len()
    };
    ensure!(guests_seen >= 3, "only {guests_seen} guests to survey");
    let before = s.money;
    apply_action(&mut s, &c, &Action::SurveyGuests { n: 3 }).map_err(|e| e.to_string())?;
    ensure!(before - s.money == 1500, "surveying 3 guests cost {}", before - s.money);

    let easy = park(&c, "ribs", Difficulty::Easy, 1);
    let medium = park(&c, "ribs", Difficulty::Medium, 1);
    ensure!(easy.horizon == 50 && medium.horizon == 100, "horizons {} / {}", easy.horizon, medium.horizon);

    ensure!(HISTORY_WINDOW == 5, "history window {HISTORY_WINDOW}");
    let reply = "Thought: t\nAction: wait\nAction Input:".to_string();
    let mut react = ReactPolicy::new(Box::new(ReplayBackend::new(vec![reply; 7])), "system".into());
    let obs = build_observation(&easy, &c);
    for i in 0..7 {
        let text = format!("obs{i}");
        let ctx = TurnContext { observation_text: &text, observation: &obs, state: &easy, catalog: &c };
        react.next_action(&ctx).map_err(|e| e.to_string())?;
    }
    let kept: Vec<String> = react.history().map(|(o, _)| o.clone()).collect();
    ensure!(kept == ["obs2", "obs3", "obs4", "obs5", "obs6"], "history kept {kept:?}");

    ensure!(STANDARD_BUDGET == 100 && SANDBOX_SOFT_CAP == 250, "sandbox budgets {STANDARD_BUDGET}/{SANDBOX_SOFT_CAP}");

    let mpc = Mpc::new(Box::new(GreedyStochastic::new(0)), Box::new(OracleWorldModel), 0);
    ensure!(mpc.rollouts == 5 && mpc.depth == 4, "mpc k={} h={}", mpc.rollouts, mpc.depth);

    let fast = c.research_speed(ResearchSpeed::Fast).ok_or("no fast research")?;
    ensure!(fast.days_to_unlock == 1, "fast research takes {} days", fast.days_to_unlock);
    let mut s = park(&c, "ribs", Difficulty::Medium, 1);
    s.money = 10_000;
    ensure!(s.research.highest_unlocked(Subtype::Carousel) == Subclass::Yellow, "medium starts beyond yellow");
    step(&mut s, &c, &Action::SetResearch { topic: Subtype::Carousel, speed: ResearchSpeed::Fast }).map_err(|e| e.to_string())?;
    ensure!(s.research.highest_unlocked(Subtype::Carousel) == Subclass::Blue, "fast research did not unlock blue in a day");

    let drink = c.spec(Subtype::Drink, Subclass::Yellow);
    ensure!(drink.item_cost == 0, "yellow drink item_cost {}", drink.item_cost);
    ensure!(
        carousel.capacity == 6 && carousel.breakdown_rate == 0.001 && carousel.cost_per_operation == 1,
        "carousel capacity {} breakdown {} cost/op {}",
        carousel.capacity,
        carousel.breakdown_rate,
        carousel.cost_per_operation
    );
    Ok("all constants match".into())
}

fn determinism() -> Result<String, String> {
    let c = catalog();
    let refs = HumanReferenceTable::shipped();
    let scripted = run_episode(&mut Growth::new(), c.clone(), "ribs", Difficulty::Easy, 7, &refs).map_err(|e| e.to_string())?;
    let actions = trace_actions(&scripted.trace).map_err(|e| e.to_string())?;
    ensure!(actions.len() == 50, "trajectory has {} days", actions.len());
    let stream = || -> Result<Vec<u8>, String> {
        let mut g = Game::new(c.clone(), "ribs", Difficulty::Easy, 7, Mode::Evaluation).map_err(|e| e.to_string())?;
        let mut out = g.observation_text().into_bytes();
        for a in &actions {
            out.extend_from_slice(g.submit(a).map_err(|e| e.to_string())?.observation.as_bytes());
        }
        Ok(out)
    };
    let first = stream()?;
    for i in 1..10 {
        ensure!(stream()? == first, "replay {i} diverged");
    }
    let (_, records) = maps_core::game::parse_trace(&scripted.trace).map_err(|e| e.to_string())?;
    let recorded = records.iter().flat_map(|r| r.observation.bytes());
    ensure!(first.ends_with(&recorded.collect::<Vec<u8>>()), "replays differ from the recorded run");
    Ok(format!("10 replays of 50 days, {} bytes each, identical", first.len()))
}

fn property_suite() -> Result<String, String> {
    const TARGET_DAYS: u32 = 10_000;
    let c = catalog();
    let layouts: Vec<&str> = shipped_layout_names().collect();
    let policies = ["greedy", "random", "heuristic-greedy"];
    let mut days = 0;
    let mut episode = 0u64;
    while days < TARGET_DAYS {
        let layout = layouts[episode as usize % layouts.len()];
        let difficulty = if episode % 3 == 2 { Difficulty::Medium } else { Difficulty::Easy };
        let name = policies[(episode / layouts.len() as u64) as usize % policies.len()];
        let mut policy = build_policy(name, episode).expect("policy");
        let mut s = park(&c, layout, difficulty, 1000 + episode);
        let mut morning_rating = s.park_rating;
        while !s.finished() && days < TARGET_DAYS {
            let at = format!("{name} on {layout} {difficulty} episode {episode} day {}", s.day);
            let a = policy_action(policy.as_mut(), &s, &c);
            let _ = apply_action(&mut s, &c, &a);
            ensure!(s.park_rating == morning_rating, "{at}: rating moved during the morning");
            let before = s.money;
            let mut tick_ok = true;
            let mut last = (0, 0);
            let stats = simulate_day_with_probe(&mut s, &c, &mut |t: &TickProbe| {
                tick_ok &= t.spawned == t.in_park + t.exited && t.fractions_in_bounds;
                last = (t.in_park, t.exited);
            });
            ensure!(tick_ok, "{at}: per-tick conservation or bounds broken");
            ensure!(s.money == before + stats.revenue - stats.expenses, "{at}: money identity broken");
            ensure!(last.0 + last.1 == stats.arrivals, "{at}: guests lost at the close");
            ensure!(
                stats.arrivals == stats.total_guests && stats.total_guests == stats.exited + stats.stayed,
                "{at}: guest accounting broken"
            );
            ensure!(
                s.entities.iter().all(|e| (0.0..=1.0).contains(&e.cleanliness) && (0.0..=1.0).contains(&e.day.uptime)),
                "{at}: attraction fraction out of bounds"
            );
            ensure!(s.path_cleanliness.iter().all(|v| (0.0..=1.0).contains(v)), "{at}: path cleanliness out of bounds");
            ensure!(s.last_guests.iter().all(|g| (0.0..=1.0).contains(&g.happiness)), "{at}: happiness out of bounds");
            ensure!(s.park_rating == compute_rating(&stats, &c.params), "{at}: rating is not a function of the day's stats");
            morning_rating = s.park_rating;
            days += 1;
        }
        episode += 1;
    }
    Ok(format!("{days} days over {episode} episodes"))
}

fn protocol() -> Result<String, String> {
    let mut rng = RngStream::new(2024);
    for i in 0..10_000 {
        let cmd = common::random_command(&mut rng);
        let text = format_command(&cmd);
        match parse(&text) {
            Ok(back) if back == cmd => {}
            other => return Err(format!("command {i}: {text} parsed back as {other:?}")),
        }
    }

    let c = catalog();
    let mut g = Game::new(c.clone(), "ribs", Difficulty::Easy, 1, Mode::Evaluation).map_err(|e| e.to_string())?;
    let turn = g
        .submit("place(x=12, y=9, type=\"shop\", subtype=\"drink\", subclass=\"yellow\", price=3, order_quantity=-1)")
        .map_err(|e| e.to_string())?;
    let expected = "NOTE: While attempting the action `place(x=12, y=9, type=\"shop\", subtype=\"drink\", subclass=\"yellow\", price=3, order_quantity=-1)` the error `{'message': 'Inventory order_quantity cannot be negative: -1', 'type': 'invalid_action'}` occurred.";
    ensure!(note_of(&turn.observation) == Some(expected), "NOTE was {:?}", note_of(&turn.observation));

    let schema: serde_json::Value = serde_json::from_str(OBSERVATION_SCHEMA).map_err(|e| e.to_string())?;
    let layouts: Vec<&str> = shipped_layout_names().collect();
    let mut validated = 0;
    let mut game_index = 0usize;
    while validated < 1000 {
        let layout = layouts[game_index % layouts.len()];
        let sandbox = TRAINING_LAYOUTS.contains(&layout) && game_index % 2 == 1;
        let mode = if sandbox { Mode::Sandbox } else { Mode::Evaluation };
        let difficulty = if game_index % 3 == 0 { Difficulty::Medium } else { Difficulty::Easy };
        let mut g = Game::new(c.clone(), layout, difficulty, game_index as u64, mode).map_err(|e| e.to_string())?;
        let mut greedy = GreedyStochastic::new(game_index as u64);
        for _ in 0..60 {
            if g.finished() || validated >= 1000 {
                break;
            }
            let text = if rng.bernoulli(0.5) {
                format_command(&common::random_command(&mut rng))
            } else {
                maps_core::protocol::format(&policy_action(&mut greedy, g.state(), &c))
            };
            let turn = g.submit(&text).map_err(|e| e.to_string())?;
            let v = json_part(&turn.observation).map_err(|e| format!("{text}: {e}"))?;
            let errors = common::validate_schema(&schema, &v);
            ensure!(errors.is_empty(), "after {text}: {errors:?}");
            validated += 1;
        }
        game_index += 1;
    }
    Ok(format!("10000 round trips, NOTE exact, {validated} observations valid"))
}

fn quarter_mean(values: &[f64], quarter: usize) -> f64 {
    let q = values.len() / 4;
    let slice = &values[quarter * q..(quarter + 1) * q];
    slice.iter().sum::<f64>() / slice.len() as f64
}

fn stochasticity() -> Result<String, String> {
    let c = catalog();
    let refs = HumanReferenceTable::shipped();
    let r = run_episode(&mut Growth::new(), c.clone(), "ribs", Difficulty::Easy, 0, &refs).map_err(|e| e.to_string())?;
    let actions = trace_actions(&r.trace).map_err(|e| e.to_string())?;
    let layout = Layout::shipped("ribs").expect("ribs");
    let report = trajectory_cv(&actions, &c, &layout, Difficulty::Easy, 10, 1);
    ensure!(!report.partial && report.kept_runs == 10, "only {} valid runs", report.kept_runs);
    let revenue: Vec<f64> = report.days.iter().map(|d| d.cv.revenue).collect();
    let value: Vec<f64> = report.days.iter().map(|d| d.cv.value).collect();
    let (rev_q1, val_q1, rev_q4) = (quarter_mean(&revenue, 0), quarter_mean(&value, 0), quarter_mean(&revenue, 3));
    ensure!(rev_q1 > val_q1, "early revenue CV {rev_q1:.4} does not exceed value CV {val_q1:.4}");
    ensure!(rev_q4 < rev_q1, "final-quarter revenue CV {rev_q4:.4} is not below first-quarter {rev_q1:.4}");
    Ok(format!("Q1 revenue CV {rev_q1:.4} > value CV {val_q1:.4}; Q4 revenue CV {rev_q4:.4}"))
}

fn mean_final_value(policy: &str, layout: &str, seeds: std::ops::Range<u64>) -> Result<f64, String> {
    let c = catalog();
    let refs = HumanReferenceTable::shipped();
    let n = seeds.end - seeds.start;
    let mut total = 0.0;
    for seed in seeds {
        let mut p = build_policy(policy, seed).expect("policy");
        let r = run_episode(p.as_mut(), c.clone(), layout, Difficulty::Easy, seed, &refs).map_err(|e| e.to_string())?;
        total += r.final_value as f64;
    }
    Ok(total / n as f64)
}

fn uplift(baseline: &str, improved: &str, seeds: u64) -> Result<String, String> {
    let mut wins = 0;
    let mut detail = Vec::new();
    for layout in EVALUATION_LAYOUTS {
        let base = mean_final_value(baseline, layout, 0..seeds)?;
        let better = mean_final_value(improved, layout, 0..seeds)?;
        if better > base {
            wins += 1;
        }
        detail.push(format!("{layout} {base:.0} vs {better:.0}"));
    }
    ensure!(wins >= 2, "{improved} beat {baseline} on {wins} of 3 layouts ({})", detail.join(", "));
    Ok(format!("{wins}/3 layouts: {}", detail.join(", ")))
}

fn heuristic_uplift() -> Result<String, String> {
    uplift("random", "heuristic-random", 10)
}

fn mpc_uplift() -> Result<String, String> {
    uplift("greedy", "mpc-greedy", 5)
}

fn sandbox() -> Result<String, String> {
    let c = catalog();
    let cmd = |a: SandboxAction| format_command(&Command::Sandbox(a));

    let mut g = Game::new(c.clone(), "starter_loop", Difficulty::Easy, 5, Mode::Sandbox).map_err(|e| e.to_string())?;
    let mut greedy = GreedyStochastic::new(5);
    for _ in 0..5 {
        let a = maps_core::protocol::format(&policy_action(&mut greedy, g.state(), &c));
        g.submit(&a).map_err(|e| e.to_string())?;
    }
    let before = g.state().to_bytes();
    let a = maps_core::protocol::format(&policy_action(&mut greedy, g.state(), &c));
    g.submit(&a).map_err(|e| e.to_string())?;
    ensure!(g.state().to_bytes() != before, "the day changed nothing");
    let turn = g.submit(&cmd(SandboxAction::UndoDay)).map_err(|e| e.to_string())?;
    ensure!(turn.error.is_none(), "undo failed: {:?}", turn.error);
    ensure!(g.state().to_bytes() == before, "undo is not byte-exact");
    let replayed = g.submit(&a).map_err(|e| e.to_string())?;
    let again = g.submit(&cmd(SandboxAction::UndoDay)).map_err(|e| e.to_string())?;
    ensure!(replayed.error.is_none() && again.error.is_none() && g.state().to_bytes() == before, "second undo differs");

    let mut g = Game::new(c.clone(), "river_bend", Difficulty::Easy, 6, Mode::Sandbox).map_err(|e| e.to_string())?;
    for _ in 0..SANDBOX_SOFT_CAP {
        g.submit(&cmd(SandboxAction::MaxMoney)).map_err(|e| e.to_string())?;
    }
    let session = g.sandbox().expect("sandbox");
    ensure!(
        session.sandbox_actions_used == 250 && session.standard_actions_used == 0,
        "after 250 sandbox actions: {}",
        session.budget_line()
    );
    g.submit(&cmd(SandboxAction::MaxResearch)).map_err(|e| e.to_string())?;
    ensure!(g.sandbox().unwrap().standard_actions_used == 1, "the 251st sandbox action was free");
    let mut submitted = 1;
    while !g.finished() {
        let turn = g.submit("wait()").map_err(|e| e.to_string())?;
        if turn.stats.is_none() {
            g.submit(&cmd(SandboxAction::Reset)).map_err(|e| e.to_string())?;
        }
        submitted += 1;
        ensure!(submitted < 1000, "the standard budget never ran out");
    }
    ensure!(g.sandbox().unwrap().standard_actions_used == 100, "budget ended at {}", g.sandbox().unwrap().budget_line());
    ensure!(matches!(g.submit("wait()"), Err(GameError::Finished)), "actions accepted after the budget");

    for layout in EVALUATION_LAYOUTS {
        ensure!(
            Game::new(c.clone(), layout, Difficulty::Easy, 1, Mode::Sandbox).is_err(),
            "a sandbox opened on {layout}"
        );
        let mut g = Game::new(c.clone(), "lakeside", Difficulty::Easy, 1, Mode::Sandbox).map_err(|e| e.to_string())?;
        let state = g.state().to_bytes();
        let turn = g.submit(&cmd(SandboxAction::SwitchLayout { name: layout.to_string() })).map_err(|e| e.to_string())?;
        ensure!(turn.error.is_some(), "switch_layout reached {layout}");
        ensure!(g.state().to_bytes() == state && g.state().layout.name == "lakeside", "refused switch changed the park");
        ensure!(g.sandbox().unwrap().sandbox_actions_used == 0, "refused switch consumed budget");
    }
    Ok("undo exact, budgets 100/250 enforced, evaluation layouts refused".into())
}

fn normalization() -> Result<String, String> {
    let refs = HumanReferenceTable::shipped();
    let entries: Vec<(String, Difficulty, i64)> = refs.entries().map(|(l, d, v)| (l.to_string(), d, v)).collect();
    ensure!(entries.len() == 6, "{} human references", entries.len());
    for (layout, d, v) in &entries {
        let score = refs.normalize(*v, layout, *d).map_err(|e| e.to_string())?;
        ensure!(format!("{score:.2}") == "100.00", "{layout} {d} reference scores {score}");
        for k in [-1i64, 0, 2, 3, 10] {
            let scaled = refs.normalize(k * v, layout, *d).map_err(|e| e.to_string())?;
            ensure!((scaled - 100.0 * k as f64).abs() < 1e-9, "{layout} {d} x{k} scores {scaled}");
        }
        let (a, b) = (v / 3, v / 7);
        let sum = refs.normalize(a + b, layout, *d).map_err(|e| e.to_string())?;
        let parts = refs.normalize(a, layout, *d).unwrap() + refs.normalize(b, layout, *d).unwrap();
        ensure!((sum - parts).abs() < 1e-9, "{layout} {d} is not additive");
    }
    Ok("six references at 100.00, linear".into())
}

fn criteria() -> Vec<Criterion> {
    let secs = Duration::from_secs;
    vec![
        Criterion { id: 1, name: "constant fidelity", limit: secs(1), check: constant_fidelity },
        Criterion { id: 2, name: "determinism", limit: secs(30), check: determinism },
        Criterion { id: 3, name: "property suite", limit: secs(300), check: property_suite },
        Criterion { id: 4, name: "protocol", limit: secs(60), check: protocol },
        Criterion { id: 5, name: "stochasticity", limit: secs(600), check: stochasticity },
        Criterion { id: 6, name: "heuristic uplift", limit: secs(900), check: heuristic_uplift },
        Criterion { id: 7, name: "mpc uplift", limit: secs(1800), check: mpc_uplift },
        Criterion { id: 8, name: "sandbox", limit: secs(10), check: sandbox },
        Criterion { id: 9, name: "normalization", limit: secs(1), check: normalization },
    ]
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for criterion in criteria() {
        if !selected.is_empty() && !selected.contains(&criterion.id) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion.check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > criterion.limit => {
                Err(format!("took {:.1}s, over the {}s limit ({detail})", elapsed.as_secs_f64(), criterion.limit.as_secs()))
            }
            other => other,
        };
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} criterion {} {} [{:.2}s / {}s] {detail}",
            criterion.id,
            criterion.name,
            elapsed.as_secs_f64(),
            criterion.limit.as_secs()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
