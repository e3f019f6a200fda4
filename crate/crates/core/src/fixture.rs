//! Explicit finite configurations stored as plain-text edge lists.
//!
//! One edge per line, four whitespace-separated fields:
//!
//! ```text
//! # x t dir open
//! 0 0 1 1
//! 0 0 -1 0
//! ```
//!
//! `dir` is `1` or `-1`, `open` is `1` or `0`. Blank lines and text after `#`
//! are ignored. Edges not listed are closed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{Dir, EdgeSource};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureConfig {
    edges: HashMap<(i64, i64, i8), bool>,
}

fn dir_code(dir: Dir) -> i8 {
    dir.delta() as i8
}

impl FixtureConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, x: i64, t: i64, dir: Dir, open: bool) {
        assert!((x + t).rem_euclid(2) == 0, "site ({x}, {t}) has odd x + t");
        self.edges.insert((x, t, dir_code(dir)), open);
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Copies every edge leaving a site with `t` in `t_range` and `x` in
    /// `x_range` from `src`.
    pub fn capture<E: EdgeSource>(src: &E, x_range: std::ops::RangeInclusive<i64>, t_range: std::ops::Range<i64>) -> Self {
        let mut out = Self::new();
        for t in t_range {
            for x in x_range.clone() {
                if (x + t).rem_euclid(2) != 0 {
                    continue;
                }
                for dir in [Dir::Left, Dir::Right] {
                    out.set(x, t, dir, src.is_open_at(x, t, dir));
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Fixture { line: line_no, msg: msg.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err("expected four fields: x t dir open"));
            }
            let num = |s: &str| s.parse::<i64>().map_err(|_| err(&format!("not an integer: {s}")));
            let (x, t, d, o) = (num(fields[0])?, num(fields[1])?, num(fields[2])?, num(fields[3])?);
            if (x + t).rem_euclid(2) != 0 {
                return Err(err("x + t must be even"));
            }
            let dir = Dir::from_delta(d).ok_or_else(|| err("dir must be 1 or -1"))?;
            let open = match o {
                0 => false,
                1 => true,
                _ => return Err(err("open must be 0 or 1")),
            };
            if out.edges.insert((x, t, dir_code(dir)), open).is_some() {
                return Err(err("duplicate edge"));
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serializes in `(t, x, dir)` order so output is reproducible.
    pub fn to_text(&self) -> String {
        let mut keys: Vec<_> = self.edges.keys().copied().collect();
        keys.sort_by_key(|&(x, t, d)| (t, x, d));
        let mut s = String::from("# x t dir open\n");
        for k in keys {
            let _ = writeln!(s, "{} {} {} {}", k.0, k.1, k.2, u8::from(self.edges[&k]));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

impl EdgeSource for FixtureConfig {
    fn is_open_at(&self, x: i64, t: i64, dir: Dir) -> bool {
        self.edges.get(&(x, t, dir_code(dir))).copied().unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{NoiseField, PercConfig};

    #[test]
    fn round_trip() {
        let cfg = PercConfig::new(NoiseField::new(3), 0.7).unwrap();
        let fx = FixtureConfig::capture(&cfg, -6..=6, 0..5);
        let back = FixtureConfig::parse(&fx.to_text()).unwrap();
        assert_eq!(fx, back);
        for t in 0..5 {
            for x in -6..=6i64 {
                if (x + t) % 2 == 0 {
                    assert_eq!(back.is_open_at(x, t, Dir::Right), cfg.is_open_at(x, t, Dir::Right));
                }
            }
        }
    }

    #[test]
    fn unlisted_edges_closed() {
        let fx = FixtureConfig::parse("0 0 1 1\n").unwrap();
        assert!(fx.is_open_at(0, 0, Dir::Right));
        assert!(!fx.is_open_at(0, 0, Dir::Left));
        assert!(!fx.is_open_at(1, 1, Dir::Right));
    }

    #[test]
    fn comments_and_blanks() {
        let fx = FixtureConfig::parse("# header\n\n 2 0 -1 1  # trailing\n").unwrap();
        assert_eq!(fx.len(), 1);
        assert!(fx.is_open_at(2, 0, Dir::Left));
    }

    #[test]
    fn parse_errors_carry_line() {
        for (text, line) in [("0 0 1\n", 1), ("0 0 1 1\n1 0 1 1\n", 2), ("0 0 2 1", 1), ("0 0 1 5", 1), ("0 0 1 1\n0 0 1 0", 2), ("a 0 1 1", 1)] {
            match FixtureConfig::parse(text) {
                Err(Error::Fixture { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
