use chrono::{DateTime, Utc};

use super::protocol::{directive_to_json, frame_to_json, parse_line, Directive, ScriptLine};
use super::world::World;
use super::RuntimeError;
use crate::geo::ChargerQuery;

/// Frames and directives in timestamp order, one JSON object per line.
/// Blank lines are ignored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplayScript {
    /// Each line with its 1-based line number in the source text.
    lines: Vec<(usize, ScriptLine)>,
}

impl ReplayScript {
    pub fn parse(text: &str) -> Result<Self, RuntimeError> {
        let mut lines: Vec<(usize, ScriptLine)> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let number = index + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let line = parse_line(raw).map_err(|message| RuntimeError::Script { line: number, message })?;
            if let Some((_, previous)) = lines.last() {
                if line.timestamp() <= previous.timestamp() {
                    return Err(RuntimeError::Script {
                        line: number,
                        message: format!(
                            "timestamp {} is not after the previous line's {}",
                            line.timestamp(),
                            previous.timestamp()
                        ),
                    });
                }
            }
            lines.push((number, line));
        }
        Ok(Self { lines })
    }

    /// Builds a script from lines already in memory, numbering them from 1.
    pub fn from_lines(lines: Vec<ScriptLine>) -> Result<Self, RuntimeError> {
        Self::parse(&lines.iter().map(encode_line).collect::<Vec<_>>().join("\n"))
    }

    pub fn lines(&self) -> impl Iterator<Item = &ScriptLine> {
        self.lines.iter().map(|(_, l)| l)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.lines().map(|l| encode_line(l) + "\n").collect()
    }
}

fn encode_line(line: &ScriptLine) -> String {
    match line {
        ScriptLine::Frame(f) => frame_to_json(f),
        ScriptLine::Directive { t, directive } => directive_to_json(*t, directive),
    }
}

/// Layout timestamps in replays are session time counted from the Unix
/// epoch, so saved documents do not depend on the wall clock.
fn session_time(t: f64) -> DateTime<Utc> {
    DateTime::from_timestamp_millis((t * 1000.0).round() as i64).unwrap_or_default()
}

/// Executes a directive against the world at session time `t`.
pub fn apply_directive(world: &mut World, t: f64, directive: &Directive) -> Result<(), RuntimeError> {
    match directive {
        Directive::SetContext { tag } => {
            world.set_context(tag);
        }
        Directive::SaveLayout { names } => {
            world.save_layout(names.as_deref(), session_time(t))?;
        }
        Directive::LoadLayout {} => world.restore_saved_layout()?,
        Directive::Query { types, available_only } => world.set_query(ChargerQuery {
            types: types.clone(),
            available_only: *available_only,
        })?,
    }
    Ok(())
}

/// Feeds the script through the world and returns the event trace, one
/// JSON record per line. Any failure is reported against its script line.
pub fn run_replay(world: &mut World, script: &ReplayScript) -> Result<String, RuntimeError> {
    let mut trace = String::new();
    for (number, line) in &script.lines {
        let at_line = |e: RuntimeError| RuntimeError::Script {
            line: *number,
            message: e.to_string(),
        };
        match line {
            ScriptLine::Frame(frame) => {
                let out = world.tick(frame).map_err(at_line)?;
                for event in &out.events {
                    trace.push_str(&event.to_json_line());
                    trace.push('\n');
                }
            }
            ScriptLine::Directive { t, directive } => apply_directive(world, *t, directive).map_err(at_line)?,
        }
    }
    Ok(trace)
}
