use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four cardinal motion directions.
///
/// `θ = 0` is rightward, `π/2` upward, `π` leftward and `3π/2` downward.
/// Image rows grow downward, so upward motion decreases the row index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Up,
    Left,
    Down,
}

impl Direction {
    /// In argmax tie-break priority order.
    pub const ALL: [Direction; 4] = [Direction::Right, Direction::Up, Direction::Left, Direction::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Direction> {
        Self::ALL.get(i).copied()
    }

    pub fn radians(self) -> f64 {
        self.index() as f64 * FRAC_PI_2
    }

    pub fn degrees(self) -> u32 {
        self.index() as u32 * 90
    }

    /// Nearest cardinal direction, accepting values within 1e-6 rad of one.
    pub fn from_radians(theta: f64) -> Result<Direction> {
        let wrapped = theta.rem_euclid(2.0 * PI);
        let q = (wrapped / FRAC_PI_2).round();
        if (wrapped - q * FRAC_PI_2).abs() > 1e-6 {
            return Err(Error::invalid(
                "direction",
                format!("{theta} rad is not a cardinal direction"),
            ));
        }
        Ok(Self::ALL[(q as usize) % 4])
    }

    /// Unit displacement in (column, row) image coordinates.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Right => (1, 0),
            Direction::Up => (0, -1),
            Direction::Left => (-1, 0),
            Direction::Down => (0, 1),
        }
    }

    pub fn opposite(self) -> Direction {
        Self::ALL[(self.index() + 2) % 4]
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Left => "left",
            Direction::Down => "down",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    /// Accepts `right|up|left|down` or an angle in radians.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "right" => Ok(Direction::Right),
            "up" => Ok(Direction::Up),
            "left" => Ok(Direction::Left),
            "down" => Ok(Direction::Down),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::invalid("direction", format!("unrecognised direction `{other}`")))
                .and_then(Direction::from_radians),
        }
    }
}
