//! Line-oriented progress file.
//!
//! ```text
//! zsfree-checkpoint v1
//! config k=5 ell_max=14 shard_depth=12 symmetry=1 anticlique=1 memo=1 bound_period=1,4
//! shard 0 3-1=E,5-4=U,...
//! shard 1 3-1=E,5-4=E,...
//! shards 2
//! done 1 2 0.1.2.3.4;0.1.2.3.5
//! done 0 0
//! ```
//!
//! A shard line lists the branching decisions leading to the shard as
//! `larger-smaller=E|U` with masks in decimal. The `shards` line closes the
//! list and repeats its length. Each `done` line gives a shard id, the number
//! of relations found in it, and their canonical labels separated by `;`,
//! one label per nonempty mask in increasing mask order, joined by `.`.
//! Lines that do not parse are ignored; the shards they describe are rerun.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::engine::Step;
use super::order::PairOrder;
use super::state::Outcome;
use super::SearchConfig;

pub const CHECKPOINT_MAGIC: &str = "zsfree-checkpoint v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub k: usize,
    pub config: String,
    pub shards: Vec<Vec<Step>>,
    /// False when the shard list was cut short.
    pub shards_complete: bool,
    pub done: BTreeMap<usize, Vec<Vec<u8>>>,
}

fn config_line(cfg: &SearchConfig) -> String {
    let b = |x: bool| x as u8;
    format!(
        "config k={} ell_max={} shard_depth={} symmetry={} anticlique={} memo={} bound_period={},{}",
        cfg.k,
        cfg.ell_max,
        cfg.shard_depth,
        b(cfg.symmetry),
        b(cfg.anti_clique),
        b(cfg.memo),
        cfg.bound_period.0,
        cfg.bound_period.1
    )
}

fn encode_prefix(order: &PairOrder, steps: &[Step]) -> String {
    if steps.is_empty() {
        return "-".into();
    }
    let parts: Vec<String> = steps
        .iter()
        .map(|s| {
            let (hi, lo) = order.pair(s.pos as usize);
            let o = if s.outcome == Outcome::Equal { 'E' } else { 'U' };
            format!("{hi}-{lo}={o}")
        })
        .collect();
    parts.join(",")
}

fn decode_prefix(order: &PairOrder, text: &str) -> Option<Vec<Step>> {
    if text == "-" {
        return Some(Vec::new());
    }
    text.split(',')
        .map(|part| {
            let (pair, o) = part.split_once('=')?;
            let (hi, lo) = pair.split_once('-')?;
            let pos = order.position(hi.parse().ok()?, lo.parse().ok()?)?;
            let outcome = match o {
                "E" => Outcome::Equal,
                "U" => Outcome::Unequal,
                _ => return None,
            };
            Some(Step { pos: pos as u32, outcome })
        })
        .collect()
}

fn encode_labels(labels: &[u8]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    parts.join(".")
}

fn parse_done(line: &str, k: usize, shard_count: usize) -> Option<(usize, Vec<Vec<u8>>)> {
    let mut it = line.splitn(4, ' ');
    if it.next()? != "done" {
        return None;
    }
    let id: usize = it.next()?.parse().ok()?;
    let count: usize = it.next()?.parse().ok()?;
    let body = it.next().unwrap_or("");
    if id >= shard_count {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        for rel in body.split(';') {
            let labels: Vec<u8> = rel.split('.').map(|x| x.parse().ok()).collect::<Option<_>>()?;
            if labels.len() != (1 << k) - 1 {
                return None;
            }
            out.push(labels);
        }
    } else if !body.is_empty() {
        return None;
    }
    (out.len() == count).then_some((id, out))
}

impl Checkpoint {
    pub fn new(cfg: &SearchConfig, shards: Vec<Vec<Step>>) -> Self {
        Checkpoint { k: cfg.k, config: config_line(cfg), shards, shards_complete: true, done: BTreeMap::new() }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let bad = |what: &str| Error::Checkpoint(format!("{}: {what}", path.display()));
        match lines.next() {
            Some(Ok(l)) if l == CHECKPOINT_MAGIC => {}
            _ => return Err(bad("missing or unknown version header")),
        }
        let config = match lines.next() {
            Some(Ok(l)) if l.starts_with("config ") => l,
            _ => return Err(bad("missing config line")),
        };
        let k: usize = config
            .split(' ')
            .find_map(|f| f.strip_prefix("k="))
            .and_then(|v| v.parse().ok())
            .filter(|k| (1..=crate::model::MAX_K).contains(k))
            .ok_or_else(|| bad("config line has no valid k"))?;
        let order = PairOrder::new(k);
        let mut ck = Checkpoint { k, config, shards: Vec::new(), shards_complete: false, done: BTreeMap::new() };
        for line in lines {
            let Ok(line) = line else { break };
            if !ck.shards_complete {
                if let Some(rest) = line.strip_prefix("shard ") {
                    let parsed = rest
                        .split_once(' ')
                        .and_then(|(id, p)| Some((id.parse::<usize>().ok()?, decode_prefix(&order, p)?)));
                    match parsed {
                        Some((id, steps)) if id == ck.shards.len() => ck.shards.push(steps),
                        _ => break,
                    }
                } else if let Some(n) = line.strip_prefix("shards ") {
                    if n.parse() != Ok(ck.shards.len()) {
                        return Err(bad("shard count does not match the shard lines"));
                    }
                    ck.shards_complete = true;
                } else {
                    break;
                }
            } else if let Some((id, rels)) = parse_done(&line, k, ck.shards.len()) {
                ck.done.insert(id, rels);
            }
        }
        if !ck.shards_complete {
            ck.done.clear();
        }
        Ok(ck)
    }

    /// Checks that `self`, read from disk, belongs to the run described by
    /// `fresh`, and adopts the fresh shard list if the stored one was cut.
    pub fn validate_against(&mut self, fresh: &Checkpoint) -> Result<()> {
        if self.config != fresh.config {
            return Err(Error::Checkpoint(format!(
                "checkpoint was written by a different run: `{}` vs `{}`",
                self.config, fresh.config
            )));
        }
        if self.shards_complete && self.shards != fresh.shards {
            return Err(Error::Checkpoint("shard list differs from the one this search produces".into()));
        }
        self.shards = fresh.shards.clone();
        self.shards_complete = true;
        Ok(())
    }

    /// Writes the file from scratch through a temporary sibling and returns
    /// an appending writer for further `done` lines.
    pub fn rewrite(&self, path: &Path) -> Result<BufWriter<File>> {
        let order = PairOrder::new(self.k);
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            writeln!(w, "{CHECKPOINT_MAGIC}")?;
            writeln!(w, "{}", self.config)?;
            for (id, s) in self.shards.iter().enumerate() {
                writeln!(w, "shard {id} {}", encode_prefix(&order, s))?;
            }
            writeln!(w, "shards {}", self.shards.len())?;
            for (id, rels) in &self.done {
                write_done(&mut w, *id, rels.iter())?;
            }
            w.flush()?;
            w.get_ref().sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(BufWriter::new(OpenOptions::new().append(true).open(path)?))
    }

    pub fn append_done(w: &mut BufWriter<File>, id: usize, found: &BTreeSet<Vec<u8>>) -> Result<()> {
        write_done(w, id, found.iter())?;
        w.flush()?;
        Ok(())
    }
}

fn write_done<'a>(w: &mut impl Write, id: usize, rels: impl ExactSizeIterator<Item = &'a Vec<u8>>) -> Result<()> {
    let n = rels.len();
    let body: Vec<String> = rels.map(|l| encode_labels(l)).collect();
    if n == 0 {
        writeln!(w, "done {id} 0")?;
    } else {
        writeln!(w, "done {id} {n} {}", body.join(";"))?;
    }
    Ok(())
}
