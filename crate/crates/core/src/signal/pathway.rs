//! Pathway specifications in brace notation.
//!
//! `{c(10)c(01)a(10)}1` reads right to left: the pump `a` lifts the ground
//! state to site 1, the probe `c` takes it down to the ground state and back
//! up to site 1, and the result is projected onto site 1. Adjacent actions of
//! the same pulse are merged into one second-order action.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{ElectronicState, Manifold, Site};
use crate::propagators::{BlockKind, PulseId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub pulse: PulseId,
    pub kind: BlockKind,
}

/// Ordered pulse actions (first applied first) and the final projection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathwaySpec {
    steps: Vec<Step>,
    projection: ElectronicState,
}

impl PathwaySpec {
    pub fn new(steps: Vec<Step>, projection: ElectronicState) -> Result<Self> {
        let spec = PathwaySpec { steps, projection };
        spec.validate()?;
        Ok(spec)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn projection(&self) -> ElectronicState {
        self.projection
    }

    /// Checks manifold continuity between actions and against the
    /// projection.
    pub fn validate(&self) -> Result<()> {
        let mut current = Manifold::Ground;
        for step in &self.steps {
            let source = step.kind.source().manifold();
            if source != current {
                return Err(Error::InvalidPathway(format!(
                    "{}: action {} starts in the {source} manifold but the state is in {current}",
                    self,
                    step_label(step)
                )));
            }
            current = step.kind.target().manifold();
        }
        if self.projection.manifold() != current {
            return Err(Error::InvalidPathway(format!(
                "{self}: projection onto {} but the state ends in the {current} manifold",
                self.projection
            )));
        }
        Ok(())
    }

    /// Same pathway with site labels exchanged.
    pub fn relabeled(&self) -> Self {
        let relabel = |s: ElectronicState| match s {
            ElectronicState::Exciton(site) => ElectronicState::Exciton(site.other()),
            other => other,
        };
        PathwaySpec {
            steps: self.steps.iter().map(|s| Step { pulse: s.pulse, kind: s.kind.relabeled() }).collect(),
            projection: relabel(self.projection),
        }
    }

    /// Whether any action is driven by `pulse`.
    pub fn uses(&self, pulse: PulseId) -> bool {
        self.steps.iter().any(|s| s.pulse == pulse)
    }
}

fn step_label(step: &Step) -> String {
    let p = step.pulse.letter();
    let t = |to: ElectronicState, from: ElectronicState| format!("{p}({to}{from})");
    use ElectronicState::{Biexciton as Two, Exciton, Ground};
    match step.kind {
        BlockKind::Up(s) => t(Exciton(s), Ground),
        BlockKind::Down(s) => t(Ground, Exciton(s)),
        BlockKind::Gsb(s) => format!("{}{}", t(Ground, Exciton(s)), t(Exciton(s), Ground)),
        BlockKind::Se { from, to } => format!("{}{}", t(Exciton(to), Ground), t(Ground, Exciton(from))),
        BlockKind::Esa { from, to } => format!("{}{}", t(Exciton(to), Two), t(Two, Exciton(from))),
    }
}

impl fmt::Display for PathwaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for step in self.steps.iter().rev() {
            f.write_str(&step_label(step))?;
        }
        write!(f, "}}{}", self.projection)
    }
}

/// One written transition `x(to from)`.
#[derive(Clone, Copy, Debug)]
struct Transition {
    pulse: PulseId,
    to: ElectronicState,
    from: ElectronicState,
}

fn parse_state(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Option<ElectronicState> {
    let state = match chars.next()? {
        '0' => ElectronicState::Ground,
        '2' => ElectronicState::Biexciton,
        '1' => {
            if matches!(chars.peek(), Some('\'') | Some('′')) {
                chars.next();
                ElectronicState::Exciton(Site::OnePrime)
            } else {
                ElectronicState::Exciton(Site::One)
            }
        }
        _ => return None,
    };
    Some(state)
}

fn merge(first: Transition, second: Transition) -> Option<BlockKind> {
    use ElectronicState::{Biexciton as Two, Exciton, Ground};
    if first.pulse != second.pulse || first.to != second.from {
        return None;
    }
    match (first.from, first.to, second.to) {
        (Ground, Exciton(s), Ground) => Some(BlockKind::Gsb(s)),
        (Exciton(from), Ground, Exciton(to)) => Some(BlockKind::Se { from, to }),
        (Exciton(from), Two, Exciton(to)) => Some(BlockKind::Esa { from, to }),
        _ => None,
    }
}

impl FromStr for PathwaySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidPathway(format!("`{text}`: {why}"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let open = compact.strip_prefix('{').ok_or_else(|| bad("expected `{`"))?;
        let close = open.rfind('}').ok_or_else(|| bad("expected `}`"))?;
        let (body, tail) = (&open[..close], &open[close + 1..]);

        let mut tail_chars = tail.chars().peekable();
        let projection = parse_state(&mut tail_chars).ok_or_else(|| bad("missing projection after `}`"))?;
        if tail_chars.next().is_some() {
            return Err(bad("trailing characters after the projection"));
        }

        let mut written = Vec::new();
        let mut chars = body.chars().peekable();
        while let Some(c) = chars.next() {
            let pulse = PulseId::from_letter(c).ok_or_else(|| bad(&format!("unknown pulse `{c}`")))?;
            if chars.next() != Some('(') {
                return Err(bad("expected `(` after pulse letter"));
            }
            let to = parse_state(&mut chars).ok_or_else(|| bad("bad target state"))?;
            let from = parse_state(&mut chars).ok_or_else(|| bad("bad source state"))?;
            if chars.next() != Some(')') {
                return Err(bad("expected `)`"));
            }
            written.push(Transition { pulse, to, from });
        }

        // written order is last-applied first
        let mut applied = written.into_iter().rev().peekable();
        let mut steps = Vec::new();
        while let Some(first) = applied.next() {
            if let Some(&second) = applied.peek() {
                if let Some(kind) = merge(first, second) {
                    applied.next();
                    steps.push(Step { pulse: first.pulse, kind });
                    continue;
                }
            }
            let kind = match (first.from, first.to) {
                (ElectronicState::Ground, ElectronicState::Exciton(s)) => BlockKind::Up(s),
                (ElectronicState::Exciton(s), ElectronicState::Ground) => BlockKind::Down(s),
                _ => return Err(bad("unsupported single transition")),
            };
            steps.push(Step { pulse: first.pulse, kind });
        }
        PathwaySpec::new(steps, projection)
    }
}
