//! Trajectory CSV format.
//!
//! ```text
//! # n=3,d=1,seed=7,model=doeblin-circle(delta=0.3)
//! x0,regen
//! 2.5000000000000000e-1,1
//! 7.5000000000000000e-1,0
//! 1.0000000000000000e-1,
//! ```
//!
//! Finite chains use `d=0` and a single `state` column holding the label.
//! The `regen` column is blank when the trajectory carries no flags.

use std::io::{BufRead, Write};

use super::{State, Trajectory};
use crate::error::{Error, Result};
use crate::format_float;

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "# n={},d={},seed={},model={}", traj.len(), traj.dim, traj.seed, traj.model_id)?;
    if traj.dim == 0 {
        write!(w, "state")?;
    } else {
        for k in 0..traj.dim {
            write!(w, "x{k},")?;
        }
    }
    if traj.dim == 0 {
        writeln!(w, ",regen")?;
    } else {
        writeln!(w, "regen")?;
    }
    for (i, s) in traj.states.iter().enumerate() {
        match s {
            State::Finite(l) => write!(w, "{l},")?,
            State::Vector(v) => {
                for c in v {
                    write!(w, "{},", format_float(*c))?;
                }
            }
        }
        match &traj.regen_flags {
            Some(flags) => writeln!(w, "{}", u8::from(flags[i]))?,
            None => writeln!(w)?,
        }
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

pub fn read_trajectory_csv<R: BufRead>(r: R) -> Result<Trajectory> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty input"))??;
    let header = header.strip_prefix("# ").ok_or_else(|| parse_err(1, "missing header"))?;
    let (mut n, mut d, mut seed, mut model) = (None, None, None, None);
    let mut rest = header;
    while !rest.is_empty() {
        let (key, tail) = rest.split_once('=').ok_or_else(|| parse_err(1, "bad header field"))?;
        if key == "model" {
            model = Some(tail.to_string());
            break;
        }
        let (value, tail) = tail.split_once(',').ok_or_else(|| parse_err(1, "truncated header"))?;
        let v: u64 = value.parse().map_err(|e| parse_err(1, e))?;
        match key {
            "n" => n = Some(v as usize),
            "d" => d = Some(v as usize),
            "seed" => seed = Some(v),
            other => return Err(parse_err(1, format!("unknown header field {other}"))),
        }
        rest = tail;
    }
    let (n, dim, seed, model_id) = match (n, d, seed, model) {
        (Some(n), Some(d), Some(s), Some(m)) => (n, d, s, m),
        _ => return Err(parse_err(1, "incomplete header")),
    };
    lines.next().ok_or_else(|| parse_err(2, "missing column header"))??;
    let mut states = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    let mut any_flag = None;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 3;
        let fields: Vec<&str> = line.split(',').collect();
        let width = dim.max(1) + 1;
        if fields.len() != width {
            return Err(parse_err(lineno, format!("expected {width} fields")));
        }
        let state = if dim == 0 {
            State::Finite(fields[0].parse().map_err(|e| parse_err(lineno, e))?)
        } else {
            State::Vector(
                fields[..dim]
                    .iter()
                    .map(|f| f.parse::<f64>().map_err(|e| parse_err(lineno, e)))
                    .collect::<Result<_>>()?,
            )
        };
        let flag = match fields[width - 1] {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            other => return Err(parse_err(lineno, format!("bad flag {other}"))),
        };
        match (any_flag, flag.is_some()) {
            (None, has) => any_flag = Some(has),
            (Some(prev), has) if prev != has => return Err(parse_err(lineno, "flags present on some rows only")),
            _ => {}
        }
        states.push(state);
        flags.push(flag.unwrap_or(false));
    }
    if states.len() != n {
        return Err(Error::Parse(format!("header says {n} rows, found {}", states.len())));
    }
    Ok(Trajectory { model_id, seed, dim, states, regen_flags: if any_flag == Some(true) { Some(flags) } else { None } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip(xs in prop::collection::vec(-1e6f64..1e6, 1..40), flagged in any::<bool>(), seed in any::<u64>()) {
            let flags = flagged.then(|| xs.iter().map(|x| *x > 0.0).collect());
            let t = Trajectory {
                model_id: "m(a=1)".into(),
                seed,
                dim: 1,
                states: xs.iter().map(|x| State::scalar(*x)).collect(),
                regen_flags: flags,
            };
            let mut buf = Vec::new();
            write_trajectory_csv(&t, &mut buf).unwrap();
            let back = read_trajectory_csv(&buf[..]).unwrap();
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn finite_rows_and_header() {
        let t = Trajectory {
            model_id: "two-state".into(),
            seed: 3,
            dim: 0,
            states: vec![State::Finite(0), State::Finite(1)],
            regen_flags: Some(vec![true, false]),
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# n=2,d=0,seed=3,model=two-state\nstate,regen\n0,1\n1,0\n");
        assert_eq!(read_trajectory_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn malformed_rows_are_reported() {
        let text = "# n=1,d=1,seed=0,model=m\nx0,regen\nabc,\n";
        assert!(matches!(read_trajectory_csv(text.as_bytes()), Err(Error::Parse(_))));
    }
}
