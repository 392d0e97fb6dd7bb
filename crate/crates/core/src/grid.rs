//! Parameter grids.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lin" | "linear" => Ok(Spacing::Linear),
            "log" | "logarithmic" => Ok(Spacing::Log),
            other => Err(Error::Specification(format!("unknown grid spacing '{other}'"))),
        }
    }
}

/// `points` values from `start` to `stop` inclusive. Endpoints are exact.
pub fn grid<T: Real>(start: T, stop: T, points: usize, spacing: Spacing) -> Result<Vec<T>> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::Validation("grid endpoints must be finite".into()));
    }
    if points == 0 {
        return Err(Error::Validation("grid needs at least one point".into()));
    }
    if points == 1 {
        return if start == stop {
            Ok(vec![start])
        } else {
            Err(Error::Validation("a one-point grid needs start == stop".into()))
        };
    }
    if start == stop {
        return Err(Error::Validation("grid endpoints coincide".into()));
    }
    let (a, b) = match spacing {
        Spacing::Linear => (start, stop),
        Spacing::Log => {
            if !(start > T::zero() && stop > T::zero()) {
                return Err(Error::Validation("log grid needs positive endpoints".into()));
            }
            (start.ln(), stop.ln())
        }
    };
    let n = T::from_usize(points - 1).expect("grid size fits the scalar type");
    let mut out: Vec<T> = (0..points)
        .map(|k| {
            let x = a + (b - a) * T::from_usize(k).expect("index fits") / n;
            match spacing {
                Spacing::Linear => x,
                Spacing::Log => x.exp(),
            }
        })
        .collect();
    out[0] = start;
    out[points - 1] = stop;
    Ok(out)
}
