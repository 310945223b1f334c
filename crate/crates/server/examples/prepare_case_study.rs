//! Turns the raw case-study logs into `sequence,event,position` CSVs that
//! the manifests in `case-studies/` ingest.
//!
//! cargo run -p seqcompare-server --example prepare_case_study -- football <raw.csv> <out.csv>
//! cargo run -p seqcompare-server --example prepare_case_study -- deeds <dir-with-session-csvs> <out.csv>
//! cargo run -p seqcompare-server --example prepare_case_study -- ecommerce <events.csv> <category_tree.csv> <item_properties.csv>... --out <out.csv>

use std::collections::{BTreeMap, HashMap};
use std::error::Error;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

type Res<T> = Result<T, Box<dyn Error>>;
/// (timestamp, input row, event kind, item)
type Click = (u64, usize, String, String);

#[derive(Debug, Parser)]
struct Cli {
    #[command(subcommand)]
    dataset: Dataset,
}

#[derive(Debug, Subcommand)]
enum Dataset {
    /// Match events with columns `match,time,team,event`. A sequence is a
    /// run of events by one team, framed by `<team> Start` / `<team> End`.
    Football { input: PathBuf, output: PathBuf },
    /// Educational process mining logs (one CSV per session, columns
    /// `session,student_Id,exercise,activity,start_time,...`). A sequence
    /// is one student on one exercise, framed by session markers.
    Deeds {
        input: PathBuf,
        output: PathBuf,
        /// `number=Name` pairs, e.g. `2=Gates`; unnamed sessions keep their number.
        #[arg(long = "session-name", value_parser = parse_pair)]
        names: Vec<(String, String)>,
    },
    /// Retail clickstream (`timestamp,visitorid,event,itemid,transactionid`).
    /// Views are typed by the category relation to the previous view.
    Ecommerce {
        events: PathBuf,
        category_tree: PathBuf,
        item_properties: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Keep only the first N visitors (by first event) with at least two events.
        #[arg(long)]
        max_visitors: Option<usize>,
    },
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .ok_or_else(|| format!("expected number=Name, got {s:?}"))
}

fn reader(path: &Path) -> Res<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_path(path)?)
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Res<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| format!("{}: no column {name:?}", path.display()).into())
}

fn write(out: &Path, sequences: &[(String, Vec<String>)]) -> Res<()> {
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["sequence", "event", "position"])?;
    let mut events = 0;
    for (id, seq) in sequences {
        for (i, e) in seq.iter().enumerate() {
            w.write_record([id.as_str(), e.as_str(), &i.to_string()])?;
        }
        events += seq.len();
    }
    w.flush()?;
    eprintln!("{} sequences, {events} events -> {}", sequences.len(), out.display());
    Ok(())
}

fn football(input: &Path, output: &Path) -> Res<()> {
    let mut r = reader(input)?;
    let h = r.headers()?.clone();
    let (m, t, team, ev) = (column(&h, "match", input)?, column(&h, "time", input)?, column(&h, "team", input)?, column(&h, "event", input)?);
    let mut rows: Vec<(String, f64, usize, String, String)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let time: f64 = rec[t].parse().map_err(|_| format!("row {}: bad time {:?}", i + 2, &rec[t]))?;
        rows.push((rec[m].to_string(), time, i, rec[team].to_string(), rec[ev].to_string()));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut sequences: Vec<(String, Vec<String>)> = Vec::new();
    let mut current: Option<(String, String)> = None;
    for (game, _, _, team, event) in rows {
        let key = (game, team.clone());
        if current.as_ref() != Some(&key) {
            if let (Some((_, prev)), Some((_, seq))) = (&current, sequences.last_mut()) {
                seq.push(format!("{prev} End"));
            }
            sequences.push((format!("f{}", sequences.len() + 1), vec![format!("{team} Start")]));
            current = Some(key);
        }
        sequences.last_mut().unwrap().1.push(event);
    }
    if let (Some((_, team)), Some((_, seq))) = (&current, sequences.last_mut()) {
        seq.push(format!("{team} End"));
    }
    write(output, &sequences)
}

/// `Deeds_Es_1_3` -> `Deeds_Es`; activities without an exercise suffix are kept.
fn activity_kind(a: &str) -> String {
    let mut parts: Vec<&str> = a.split('_').collect();
    while parts.len() > 1 && parts.last().is_some_and(|p| p.chars().all(|c| c.is_ascii_digit())) {
        parts.pop();
    }
    parts.join("_")
}

fn deeds(input: &Path, output: &Path, names: &[(String, String)]) -> Res<()> {
    let names: HashMap<&str, &str> = names.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut files: Vec<PathBuf> = walk_csv(input)?;
    files.sort();
    // (session, student, exercise) -> [(start_time, row, activity)]
    type Key = (String, String, String);
    let mut groups: BTreeMap<Key, Vec<(String, usize, String)>> = BTreeMap::new();
    let mut row = 0;
    for f in files {
        let mut r = reader(&f)?;
        let h = r.headers()?.clone();
        let cols = ["session", "student_Id", "exercise", "activity", "start_time"]
            .map(|c| column(&h, c, &f))
            .into_iter()
            .collect::<Res<Vec<usize>>>()?;
        for rec in r.records() {
            let rec = rec?;
            let key = (rec[cols[0]].to_string(), rec[cols[1]].to_string(), rec[cols[2]].to_string());
            groups.entry(key).or_default().push((rec[cols[4]].to_string(), row, activity_kind(&rec[cols[3]])));
            row += 1;
        }
    }
    let sequences = groups
        .into_iter()
        .map(|((session, student, exercise), mut evs)| {
            evs.sort();
            let label = names.get(session.as_str()).map_or_else(|| session.clone(), |n| n.to_string());
            let mut seq = vec![format!("Session{label}_Start")];
            for (_, _, a) in evs {
                // consecutive repeats of an activity are one event
                if seq.last() != Some(&a) {
                    seq.push(a);
                }
            }
            seq.push(format!("Session{label}_End"));
            (format!("{session}-{student}-{exercise}"), seq)
        })
        .collect::<Vec<_>>();
    write(output, &sequences)
}

fn walk_csv(dir: &Path) -> Res<Vec<PathBuf>> {
    let mut out = Vec::new();
    if dir.is_file() {
        out.push(dir.to_path_buf());
        return Ok(out);
    }
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            out.extend(walk_csv(&p)?);
        } else if p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")) || p.extension().is_none() {
            out.push(p);
        }
    }
    Ok(out)
}

fn ecommerce(events: &Path, tree: &Path, props: &[PathBuf], out: &Path, max_visitors: Option<usize>) -> Res<()> {
    let mut parent: HashMap<String, String> = HashMap::new();
    let mut r = reader(tree)?;
    let h = r.headers()?.clone();
    let (c, p) = (column(&h, "categoryid", tree)?, column(&h, "parentid", tree)?);
    for rec in r.records() {
        let rec = rec?;
        if !rec[p].is_empty() {
            parent.insert(rec[c].to_string(), rec[p].to_string());
        }
    }
    // latest categoryid per item
    let mut category: HashMap<String, (u64, String)> = HashMap::new();
    for f in props {
        let mut r = reader(f)?;
        let h = r.headers()?.clone();
        let (ts, item, prop, val) = (column(&h, "timestamp", f)?, column(&h, "itemid", f)?, column(&h, "property", f)?, column(&h, "value", f)?);
        for rec in r.records() {
            let rec = rec?;
            if &rec[prop] != "categoryid" {
                continue;
            }
            let t: u64 = rec[ts].parse().unwrap_or(0);
            let slot = category.entry(rec[item].to_string()).or_insert((0, String::new()));
            if t >= slot.0 {
                *slot = (t, rec[val].to_string());
            }
        }
    }

    let mut r = reader(events)?;
    let h = r.headers()?.clone();
    let (ts, visitor, event, item) = (column(&h, "timestamp", events)?, column(&h, "visitorid", events)?, column(&h, "event", events)?, column(&h, "itemid", events)?);
    let mut visits: HashMap<String, Vec<Click>> = HashMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let t: u64 = rec[ts].parse().map_err(|_| format!("row {}: bad timestamp", i + 2))?;
        visits.entry(rec[visitor].to_string()).or_default().push((t, i, rec[event].to_string(), rec[item].to_string()));
    }
    let mut visitors: Vec<(String, Vec<Click>)> = visits.into_iter().filter(|(_, v)| v.len() >= 2).collect();
    for (_, v) in &mut visitors {
        v.sort();
    }
    visitors.sort_by(|a, b| (a.1[0].0, &a.0).cmp(&(b.1[0].0, &b.0)));
    if let Some(n) = max_visitors {
        visitors.truncate(n);
    }

    let relation = |prev: &str, cur: &str| -> &'static str {
        let pp = parent.get(prev).map(String::as_str);
        let cp = parent.get(cur).map(String::as_str);
        if prev == cur || (pp.is_some() && pp == cp) {
            "View_Brother"
        } else if pp == Some(cur) {
            "View_Parent"
        } else if cp == Some(prev) {
            "View_Child"
        } else {
            "View_Other"
        }
    };
    let sequences = visitors
        .into_iter()
        .map(|(id, evs)| {
            let mut last_cat: Option<String> = None;
            let seq = evs
                .into_iter()
                .map(|(_, _, kind, item)| match kind.as_str() {
                    "view" => {
                        let cat = category.get(&item).map(|(_, c)| c.clone());
                        let label = match (&last_cat, &cat) {
                            (Some(prev), Some(cur)) => relation(prev, cur).to_string(),
                            _ => "View".to_string(),
                        };
                        if cat.is_some() {
                            last_cat = cat;
                        }
                        label
                    }
                    "addtocart" => "AddToCart".to_string(),
                    "transaction" => "Transaction".to_string(),
                    other => other.to_string(),
                })
                .collect();
            (format!("v{id}"), seq)
        })
        .collect::<Vec<_>>();
    write(out, &sequences)
}

fn main() -> Res<()> {
    match Cli::parse().dataset {
        Dataset::Football { input, output } => football(&input, &output),
        Dataset::Deeds { input, output, names } => deeds(&input, &output, &names),
        Dataset::Ecommerce {
            events,
            category_tree,
            item_properties,
            out,
            max_visitors,
        } => ecommerce(&events, &category_tree, &item_properties, &out, max_visitors),
    }
}
