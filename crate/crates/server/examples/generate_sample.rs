//! Writes the bundled clickstream sample to `data/`.
//!
//! cargo run -p seqcompare-server --example generate_sample [-- <data-dir>]

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_301;
const SESSIONS: usize = 600;
const MAX_LEN: usize = 14;

type Chain = &'static [(&'static str, &'static [(&'static str, u32)])];

const NEW_START: &[(&str, u32)] = &[("home", 50), ("search", 30), ("promo", 20)];
const RETURNING_START: &[(&str, u32)] = &[("home", 30), ("login", 50), ("search", 20)];

const NEW: Chain = &[
    ("home", &[("category", 40), ("search", 25), ("promo", 10), ("exit", 25)]),
    ("promo", &[("product", 45), ("category", 25), ("exit", 30)]),
    ("login", &[("home", 60), ("category", 40)]),
    ("search", &[("product", 50), ("search", 20), ("category", 10), ("exit", 20)]),
    ("category", &[("product", 55), ("category", 20), ("search", 10), ("exit", 15)]),
    ("product", &[("review", 25), ("product", 25), ("cart", 15), ("category", 15), ("exit", 20)]),
    ("review", &[("product", 40), ("cart", 20), ("exit", 40)]),
    ("cart", &[("checkout", 35), ("product", 25), ("exit", 40)]),
    ("checkout", &[("purchase", 45), ("cart", 15), ("exit", 40)]),
    ("purchase", &[("exit", 100)]),
];

const RETURNING: Chain = &[
    ("home", &[("category", 35), ("search", 35), ("cart", 15), ("exit", 15)]),
    ("promo", &[("product", 60), ("exit", 40)]),
    ("login", &[("cart", 35), ("search", 30), ("home", 20), ("category", 15)]),
    ("search", &[("product", 65), ("search", 15), ("exit", 20)]),
    ("category", &[("product", 65), ("category", 15), ("exit", 20)]),
    ("product", &[("cart", 45), ("product", 20), ("review", 10), ("exit", 25)]),
    ("review", &[("cart", 50), ("product", 30), ("exit", 20)]),
    ("cart", &[("checkout", 65), ("product", 15), ("exit", 20)]),
    ("checkout", &[("purchase", 80), ("exit", 20)]),
    ("purchase", &[("exit", 70), ("home", 30)]),
];

fn pick(rng: &mut ChaCha8Rng, options: &[(&'static str, u32)]) -> &'static str {
    let dist = WeightedIndex::new(options.iter().map(|(_, w)| *w)).expect("positive weights");
    options[dist.sample(rng)].0
}

fn walk(rng: &mut ChaCha8Rng, start: &[(&'static str, u32)], chain: Chain) -> Vec<&'static str> {
    let mut events = vec![pick(rng, start)];
    while events.len() < MAX_LEN {
        let last = *events.last().unwrap();
        let (_, next) = chain.iter().find(|(from, _)| *from == last).expect("every state has exits");
        match pick(rng, next) {
            // leaving the site ends the session without a logged event
            "exit" => break,
            e => events.push(e),
        }
    }
    events
}

fn timestamp(secs: u64) -> String {
    let (day, rest) = (secs / 86_400, secs % 86_400);
    format!("2024-03-{:02} {:02}:{:02}:{:02}", day + 1, rest / 3600, rest % 3600 / 60, rest % 60)
}

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let mut rows: Vec<(u64, usize, String)> = Vec::new();
    let mut start = 0u64;
    for i in 0..SESSIONS {
        start += rng.random_range(60..4_000);
        let returning = rng.random_bool(0.45);
        let (user_type, events) = if returning {
            ("returning", walk(&mut rng, RETURNING_START, RETURNING))
        } else {
            ("new", walk(&mut rng, NEW_START, NEW))
        };
        let mut t = start;
        for e in events {
            rows.push((t, i, format!("u{:04},{user_type},{e},{}", i + 1, timestamp(t))));
            t += rng.random_range(5..180);
        }
    }
    // A log interleaves sessions by time.
    rows.sort_by_key(|(t, i, _)| (*t, *i));

    let mut csv = String::from("session_id,user_type,event,timestamp\n");
    for (_, _, line) in &rows {
        writeln!(csv, "{line}").unwrap();
    }
    std::fs::create_dir_all(dir.join("sample"))?;
    std::fs::write(dir.join("sample/clickstream.csv"), csv)?;
    let manifest = serde_json::json!({
        "name": "sample",
        "csvPath": "sample/clickstream.csv",
        "ingestConfig": {
            "groupByColumn": "session_id",
            "eventTypeColumn": "event",
            "timestampColumn": "timestamp"
        }
    });
    std::fs::write(dir.join("sample.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    eprintln!("{} sessions, {} events", SESSIONS, rows.len());
    Ok(())
}
