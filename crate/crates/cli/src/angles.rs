//! Angle expressions and grid specifications.
//!
//! Angles are radians. Besides plain numbers, `pi`, `2pi`, `3*pi/4` and
//! `pi/2` style expressions are accepted.

use std::f64::consts::PI;

use anyhow::{bail, Context, Result};

pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let Some(pos) = s.find("pi") else {
        bail!("cannot parse angle {text:?}");
    };
    let (head, tail) = (&s[..pos], &s[pos + 2..]);
    let factor = match head.trim_end_matches('*') {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().with_context(|| format!("cannot parse angle {text:?}"))?,
    };
    let divisor = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .with_context(|| format!("cannot parse angle {text:?}"))?,
    };
    Ok(factor * PI / divisor)
}

/// `start:stop:count`, endpoints inclusive. `count = 1` yields `start`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else {
        bail!("grid must look like start:stop:count, got {text:?}");
    };
    let start = parse_angle(start)?;
    let stop = parse_angle(stop)?;
    let count: usize = count.trim().parse().with_context(|| format!("bad grid count in {text:?}"))?;
    if count == 0 {
        bail!("grid count must be >= 1");
    }
    Ok(linspace(start, stop, count))
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
        .collect()
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(parse_angle).collect()
}
