use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::exceptional::ExceptionalSets;
use crate::error::Error;

/// Configurations of `(#E1, #E2)` with their normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Table1Row {
    /// No exceptional structure.
    Generic,
    R10,
    R01,
    /// One line, one point on it.
    R11a,
    /// One line, one point off it.
    R11b,
    R12,
    R21,
    R22,
    R23,
    R33,
    Unlisted { lines: usize, points: usize },
}

impl Table1Row {
    /// The nine rows with a normal form.
    pub const ALL: [Table1Row; 9] = [
        Table1Row::R10,
        Table1Row::R01,
        Table1Row::R11a,
        Table1Row::R11b,
        Table1Row::R12,
        Table1Row::R21,
        Table1Row::R22,
        Table1Row::R23,
        Table1Row::R33,
    ];

    pub fn id(&self) -> String {
        match self {
            Table1Row::Generic => "0-0".into(),
            Table1Row::R10 => "1-0".into(),
            Table1Row::R01 => "0-1".into(),
            Table1Row::R11a => "1-1a".into(),
            Table1Row::R11b => "1-1b".into(),
            Table1Row::R12 => "1-2".into(),
            Table1Row::R21 => "2-1".into(),
            Table1Row::R22 => "2-2".into(),
            Table1Row::R23 => "2-3".into(),
            Table1Row::R33 => "3-3".into(),
            Table1Row::Unlisted { lines, points } => format!("unlisted-{lines}-{points}"),
        }
    }

    /// Normal form up to linear conjugacy.
    pub fn label(&self) -> &'static str {
        match self {
            Table1Row::Generic => "no exceptional set",
            Table1Row::R10 => "[P:Q:t^d]",
            Table1Row::R01 => "[P(z,t):Q:R(z,t)]",
            Table1Row::R11a => "[P:w^d+tQ:t^d]",
            Table1Row::R11b => "[P(z,w):Q(z,w):t^d]",
            Table1Row::R12 => "[P(z,t):w^d+tQ:t^d]",
            Table1Row::R21 => "[P:w^d:t^d]",
            Table1Row::R22 => "[z^d+tP:w^d:t^d]",
            Table1Row::R23 => "[z^d+wtP:w^d:t^d]",
            Table1Row::R33 => "[z^d:w^d:t^d]",
            Table1Row::Unlisted { .. } => "unlisted",
        }
    }

    /// `(#E1, #E2)`.
    pub fn counts(&self) -> (usize, usize) {
        match self {
            Table1Row::Generic => (0, 0),
            Table1Row::R10 => (1, 0),
            Table1Row::R01 => (0, 1),
            Table1Row::R11a | Table1Row::R11b => (1, 1),
            Table1Row::R12 => (1, 2),
            Table1Row::R21 => (2, 1),
            Table1Row::R22 => (2, 2),
            Table1Row::R23 => (2, 3),
            Table1Row::R33 => (3, 3),
            Table1Row::Unlisted { lines, points } => (*lines, *points),
        }
    }
}

impl fmt::Display for Table1Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Table1Row {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let row = match s {
            "0-0" => Table1Row::Generic,
            "1-0" => Table1Row::R10,
            "0-1" => Table1Row::R01,
            "1-1a" => Table1Row::R11a,
            "1-1b" => Table1Row::R11b,
            "1-2" => Table1Row::R12,
            "2-1" => Table1Row::R21,
            "2-2" => Table1Row::R22,
            "2-3" => Table1Row::R23,
            "3-3" => Table1Row::R33,
            _ => return Err(Error::InvalidArgument(format!("unknown configuration row '{s}'"))),
        };
        Ok(row)
    }
}

impl Serialize for Table1Row {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub lines: usize,
    /// Confirmed points of `E2`.
    pub points: usize,
    pub undetermined: usize,
    pub row: Table1Row,
    pub label: &'static str,
    /// For each confirmed point, the indices of the lines through it.
    pub incidence: Vec<Vec<usize>>,
}

pub fn classify(sets: &ExceptionalSets) -> Classification {
    let lines = sets.e1_lines.len();
    let confirmed: Vec<_> = sets.confirmed().collect();
    let points = confirmed.len();
    let incidence: Vec<Vec<usize>> = confirmed.iter().map(|p| p.lines.clone()).collect();
    let row = match (lines, points) {
        (0, 0) => Table1Row::Generic,
        (1, 0) => Table1Row::R10,
        (0, 1) => Table1Row::R01,
        (1, 1) if incidence[0].is_empty() => Table1Row::R11b,
        (1, 1) => Table1Row::R11a,
        (1, 2) => Table1Row::R12,
        (2, 1) => Table1Row::R21,
        (2, 2) => Table1Row::R22,
        (2, 3) => Table1Row::R23,
        (3, 3) => Table1Row::R33,
        (lines, points) => Table1Row::Unlisted { lines, points },
    };
    Classification {
        lines,
        points,
        undetermined: sets.e2_points.len() - points,
        row,
        label: row.label(),
        incidence,
    }
}
