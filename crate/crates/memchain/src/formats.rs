//! Text formats for models, samples, distances, reports and partitions.
//!
//! A model file looks like
//!
//! ```text
//! memchain-model 1
//! alphabet ["a","b"]
//! separator ""
//! memory 2
//! provenance piecewise-demo 1 10000 20
//! states 3
//! initial 2
//! transitions 4
//! state aa
//! state ab
//! state ba
//! init aa 5.0000000000000000e-1
//! init ab 5.0000000000000000e-1
//! trans aa a 5.0000000000000000e-1
//! ...
//! ```
//!
//! Probabilities carry 17 significant digits so a model reads back bit for
//! bit. `provenance` is `none` for models that do not come from samples.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use memchain_core::model::{Provenance, Row};
use memchain_core::{
    Alphabet, CategoricalDistribution, DistanceReport, MemoryMarkovModel, PartitionExport,
    SampleSet, Word,
};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::refine::RefinementReport;

const MODEL_MAGIC: &str = "memchain-model 1";

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn token(label: &str) -> Result<&str> {
    if label.is_empty() || label.contains(char::is_whitespace) {
        return Err(Error::Config(format!(
            "label {label:?} cannot be written as a single token"
        )));
    }
    Ok(label)
}

pub fn model_to_string(model: &MemoryMarkovModel) -> Result<String> {
    let alphabet = model.alphabet();
    let mut out = String::new();
    let labels = serde_json::to_string(alphabet.labels()).expect("strings serialize");
    let separator = serde_json::to_string(alphabet.separator()).expect("strings serialize");
    let render = |w: &[u8]| alphabet.render(w);
    let transitions = model.transition_count();
    writeln!(out, "{MODEL_MAGIC}").unwrap();
    writeln!(out, "alphabet {labels}").unwrap();
    writeln!(out, "separator {separator}").unwrap();
    writeln!(out, "memory {}", model.memory()).unwrap();
    match model.provenance() {
        Some(p) => writeln!(
            out,
            "provenance {} {} {} {}",
            token(&p.source)?,
            p.seed,
            p.trajectories,
            p.length
        )
        .unwrap(),
        None => writeln!(out, "provenance none").unwrap(),
    }
    writeln!(out, "states {}", model.state_count()).unwrap();
    writeln!(out, "initial {}", model.initial().support_size()).unwrap();
    writeln!(out, "transitions {transitions}").unwrap();
    for state in model.states() {
        writeln!(out, "state {}", token(&render(state))?).unwrap();
    }
    for (word, p) in model.initial().iter() {
        writeln!(out, "init {} {p:.16e}", render(word)).unwrap();
    }
    for (state, row) in model.rows() {
        for &(c, p) in row {
            let letter = alphabet
                .label(c)
                .expect("model letters are in the alphabet");
            writeln!(out, "trans {} {} {p:.16e}", render(state), token(letter)?).unwrap();
        }
    }
    Ok(out)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<Vec<&'a str>, String> {
        for (i, text) in self.inner.by_ref() {
            self.line = i + 1;
            let text = text.trim();
            if !text.is_empty() && !text.starts_with('#') {
                return Ok(text.split_whitespace().collect());
            }
        }
        Err("unexpected end of file".into())
    }

    fn keyed(&mut self, key: &str, arity: usize) -> Result<Vec<&'a str>, String> {
        let fields = self.next_fields()?;
        if fields[0] != key || fields.len() != arity + 1 {
            return Err(format!(
                "expected `{key}` with {arity} value(s), found `{}`",
                fields.join(" ")
            ));
        }
        Ok(fields[1..].to_vec())
    }
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("{what}: cannot parse {s:?}"))
}

fn parse_model_text(text: &str) -> Result<MemoryMarkovModel, String> {
    let raw: Vec<&str> = text.lines().collect();
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let result = (|| {
        let magic = lines.next_fields()?;
        if magic.join(" ") != MODEL_MAGIC {
            return Err(format!("not a model file (expected `{MODEL_MAGIC}`)"));
        }
        let json_value = |lines: &mut Lines<'_>, key: &str| -> Result<String, String> {
            lines.next_fields()?;
            let line = raw[lines.line - 1].trim();
            line.strip_prefix(key)
                .filter(|rest| rest.starts_with(char::is_whitespace))
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| format!("expected `{key} <json>`"))
        };
        let labels: Vec<String> = serde_json::from_str(&json_value(&mut lines, "alphabet")?)
            .map_err(|e| format!("alphabet: {e}"))?;
        let separator: String = serde_json::from_str(&json_value(&mut lines, "separator")?)
            .map_err(|e| format!("separator: {e}"))?;
        let alphabet = Alphabet::with_separator(labels, separator).map_err(|e| e.to_string())?;
        let memory: usize = number(lines.keyed("memory", 1)?[0], "memory")?;
        let provenance = match lines.next_fields()?.as_slice() {
            ["provenance", "none"] => None,
            ["provenance", source, seed, n, len] => Some(Provenance {
                source: source.to_string(),
                seed: number(seed, "provenance seed")?,
                trajectories: number(n, "provenance trajectories")?,
                length: number(len, "provenance length")?,
            }),
            other => {
                return Err(format!(
                    "expected `provenance`, found `{}`",
                    other.join(" ")
                ))
            }
        };
        let n_states: usize = number(lines.keyed("states", 1)?[0], "states")?;
        let n_initial: usize = number(lines.keyed("initial", 1)?[0], "initial")?;
        let n_transitions: usize = number(lines.keyed("transitions", 1)?[0], "transitions")?;
        let word = |s: &str| alphabet.parse(s).map_err(|e| e.to_string());
        let mut rows: BTreeMap<Word, Row> = BTreeMap::new();
        for _ in 0..n_states {
            let state = word(lines.keyed("state", 1)?[0])?;
            if rows.insert(state.clone(), Row::new()).is_some() {
                return Err(format!("state {} listed twice", alphabet.render(&state)));
            }
        }
        let mut initial = Vec::with_capacity(n_initial);
        for _ in 0..n_initial {
            let f = lines.keyed("init", 2)?;
            initial.push((word(f[0])?, number::<f64>(f[1], "initial probability")?));
        }
        for _ in 0..n_transitions {
            let f = lines.keyed("trans", 3)?;
            let state = word(f[0])?;
            let letter = alphabet
                .letter(f[1])
                .ok_or_else(|| format!("unknown letter {:?}", f[1]))?;
            let p: f64 = number(f[2], "transition probability")?;
            let row = rows
                .get_mut(&state)
                .ok_or_else(|| format!("transition from undeclared state {}", f[0]))?;
            row.push((letter, p));
        }
        if let Ok(extra) = lines.next_fields() {
            return Err(format!("trailing content `{}`", extra.join(" ")));
        }
        lines.line = 0;
        rows.values_mut().for_each(|r| r.sort_by_key(|&(c, _)| c));
        let initial =
            CategoricalDistribution::from_probabilities(initial).map_err(|e| e.to_string())?;
        let model = MemoryMarkovModel::from_parts(alphabet, memory, rows, initial)
            .map_err(|e| e.to_string())?;
        Ok(match provenance {
            Some(p) => model.with_provenance(p),
            None => model,
        })
    })();
    result.map_err(|e| {
        if lines.line > 0 {
            format!("line {}: {e}", lines.line)
        } else {
            e
        }
    })
}

pub fn parse_model(text: &str, path: &Path) -> Result<MemoryMarkovModel> {
    parse_model_text(text).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub fn save_model(model: &MemoryMarkovModel, path: &Path) -> Result<()> {
    write_file(path, model_to_string(model)?)
}

pub fn load_model(path: &Path) -> Result<MemoryMarkovModel> {
    parse_model(&read_file(path)?, path)
}

/// One rendered word per line.
pub fn samples_to_string(samples: &SampleSet) -> String {
    let mut out = String::with_capacity(samples.len() * (samples.word_len() + 1));
    for word in samples.words() {
        out.push_str(&samples.alphabet().render(word));
        out.push('\n');
    }
    out
}

pub fn parse_samples(text: &str, alphabet: &Alphabet, path: &Path) -> Result<SampleSet> {
    let format_error = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut words = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        words.push(
            alphabet
                .parse(line)
                .map_err(|e| format_error(i + 1, e.to_string()))?,
        );
    }
    SampleSet::from_words(alphabet.clone(), words).map_err(|e| format_error(0, e.to_string()))
}

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    build(&mut writer).expect("writing to memory");
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

fn coordinate_headers(dimension: usize) -> impl Iterator<Item = String> {
    (0..dimension).map(|i| format!("x{i}"))
}

/// Visited states as `trajectory,step,x0[,x1]`, if the samples kept them.
pub fn states_csv(samples: &SampleSet) -> Option<String> {
    let table = samples.states()?;
    let dim = table.dimension;
    Some(csv_string(|w| {
        w.write_record(
            ["trajectory".to_string(), "step".to_string()]
                .into_iter()
                .chain(coordinate_headers(dim)),
        )?;
        for (i, point) in table.coords.chunks_exact(dim).enumerate() {
            let (trajectory, step) = (i / samples.word_len(), i % samples.word_len());
            w.write_record(
                [trajectory.to_string(), step.to_string()]
                    .into_iter()
                    .chain(point.iter().map(f64::to_string)),
            )?;
        }
        Ok(())
    }))
}

/// Points and their labels as `x0[,x1],label`.
pub fn partition_csv(partition: &PartitionExport, alphabet: &Alphabet) -> String {
    csv_string(|w| {
        w.write_record(coordinate_headers(partition.dimension).chain(["label".to_string()]))?;
        for (point, label) in partition.iter() {
            w.write_record(
                point
                    .iter()
                    .map(f64::to_string)
                    .chain([alphabet.render(label)]),
            )?;
        }
        Ok(())
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub const DISTANCE_HEADER: [&str; 11] = [
    "h",
    "ell1",
    "ell2",
    "d",
    "left",
    "right",
    "method",
    "support1",
    "support2",
    "absorbed1",
    "absorbed2",
];

pub fn distance_csv(reports: &[DistanceReport]) -> String {
    csv_string(|w| {
        w.write_record(DISTANCE_HEADER)?;
        for r in reports {
            w.write_record([
                r.horizon.to_string(),
                opt(r.memory1),
                opt(r.memory2),
                r.distance.to_string(),
                r.left.to_string(),
                r.right.to_string(),
                r.method.to_string(),
                r.support1.to_string(),
                r.support2.to_string(),
                r.absorbed1.to_string(),
                r.absorbed2.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn distance_json(r: &DistanceReport) -> Value {
    json!({
        "h": r.horizon,
        "ell1": r.memory1,
        "ell2": r.memory2,
        "d": r.distance,
        "left": r.left,
        "right": r.right,
        "method": r.method.to_string(),
        "support1": r.support1,
        "support2": r.support2,
        "absorbed1": r.absorbed1,
        "absorbed2": r.absorbed2,
    })
}

/// Per-memory rows. Wall time is left out so reruns compare byte for byte.
pub fn report_csv(report: &RefinementReport) -> String {
    csv_string(|w| {
        w.write_record([
            "h",
            "ell",
            "states",
            "transitions",
            "support",
            "absorbed",
            "d_next",
            "d_next_left",
            "d_next_right",
            "d_samples",
            "d_samples_left",
            "d_samples_right",
            "method",
        ])?;
        for r in &report.records {
            let next = r.to_next.as_ref();
            w.write_record([
                report.horizon.to_string(),
                r.memory.to_string(),
                r.states.to_string(),
                r.transitions.to_string(),
                opt(r.support),
                opt(r.absorbed),
                opt(next.map(|d| d.distance)),
                opt(next.map(|d| d.left)),
                opt(next.map(|d| d.right)),
                r.to_samples.distance.to_string(),
                r.to_samples.left.to_string(),
                r.to_samples.right.to_string(),
                report.method.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn report_json(report: &RefinementReport) -> Value {
    let termination = match &report.termination {
        crate::refine::Termination::Capacity { memory, message } => {
            json!({ "reason": "capacity", "memory": memory, "message": message })
        }
        other => json!({ "reason": other.tag() }),
    };
    json!({
        "system": report.system,
        "h": report.horizon,
        "threshold": report.threshold,
        "method": report.method.to_string(),
        "final_memory": report.final_memory,
        "termination": termination,
        "records": report.records.iter().map(|r| json!({
            "ell": r.memory,
            "states": r.states,
            "transitions": r.transitions,
            "support": r.support,
            "absorbed": r.absorbed,
            "to_next": r.to_next.as_ref().map(distance_json),
            "to_samples": distance_json(&r.to_samples),
            "from_earlier": r.from_earlier,
            "wall_ms": r.wall_ms,
        })).collect::<Vec<_>>(),
    })
}
