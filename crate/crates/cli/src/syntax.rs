//! Compact `kind:args` argument syntaxes.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Serialize, Serializer};

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

fn exactly<const N: usize>(s: &str, what: &str) -> Result<[f64; N], String> {
    let v = numbers(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("{what} takes {N} numbers, got {}", v.len()))
}

/// Serializes through `Display` so the manifest records what was typed.
macro_rules! display_serialize {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    };
}

/// A bucket width or `auto`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaArg {
    Value(f64),
    Auto,
}

impl FromStr for DeltaArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(DeltaArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(d) if d >= 0.0 && d.is_finite() => Ok(DeltaArg::Value(d)),
            _ => Err(format!("expected a non-negative number or `auto`, got `{s}`")),
        }
    }
}

impl fmt::Display for DeltaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaArg::Value(d) => write!(f, "{d}"),
            DeltaArg::Auto => f.write_str("auto"),
        }
    }
}

display_serialize!(DeltaArg);

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileSpec {
    Iso(f64),
    Ellipse { a: f64, b: f64, theta: f64 },
    /// Semi-axes and a rotation angle about z.
    Ellipsoid { axes: [f64; 3], angle: f64 },
    /// CSV file of `angle,speed` rows.
    Sampled(PathBuf),
}

impl FromStr for ProfileSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or("expected kind:arguments")?;
        let spec = match kind {
            "iso" => ProfileSpec::Iso(exactly::<1>(rest, "iso")?[0]),
            "ellipse" => {
                let [a, b, theta] = exactly(rest, "ellipse")?;
                ProfileSpec::Ellipse { a, b, theta }
            }
            "ellipsoid" => {
                let [a, b, c, angle] = exactly(rest, "ellipsoid")?;
                ProfileSpec::Ellipsoid { axes: [a, b, c], angle }
            }
            "sampled" => return Ok(ProfileSpec::Sampled(rest.into())),
            _ => return Err(format!("unknown profile kind `{kind}`")),
        };
        let speeds: &[f64] = match &spec {
            ProfileSpec::Iso(f) => &[*f],
            ProfileSpec::Ellipse { a, b, .. } => &[*a, *b],
            ProfileSpec::Ellipsoid { axes, .. } => axes,
            ProfileSpec::Sampled(_) => &[],
        };
        if speeds.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err("speeds must be positive".into());
        }
        Ok(spec)
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Iso(v) => write!(f, "iso:{v}"),
            ProfileSpec::Ellipse { a, b, theta } => write!(f, "ellipse:{a},{b},{theta}"),
            ProfileSpec::Ellipsoid { axes: [a, b, c], angle } => write!(f, "ellipsoid:{a},{b},{c},{angle}"),
            ProfileSpec::Sampled(p) => write!(f, "sampled:{}", p.display()),
        }
    }
}

display_serialize!(ProfileSpec);

#[derive(Clone, Debug, PartialEq)]
pub enum TargetArg {
    Point(Vec<f64>),
    /// Exit through the boundary at cost `q`.
    Boundary(f64),
}

impl FromStr for TargetArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("boundary") {
            return match rest.strip_prefix(':') {
                None if rest.is_empty() => Ok(TargetArg::Boundary(0.0)),
                Some(q) => match q.parse::<f64>() {
                    Ok(q) if q >= 0.0 => Ok(TargetArg::Boundary(q)),
                    _ => Err(format!("bad exit cost `{q}`")),
                },
                None => Err(format!("bad target `{s}`")),
            };
        }
        let v = numbers(s)?;
        if !(2..=3).contains(&v.len()) {
            return Err("target point needs 2 or 3 coordinates".into());
        }
        Ok(TargetArg::Point(v))
    }
}

impl fmt::Display for TargetArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetArg::Point(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
            TargetArg::Boundary(q) => write!(f, "boundary:{q}"),
        }
    }
}

display_serialize!(TargetArg);

/// Lane-switch cost family; rbc's width comes from a separate flag.
#[derive(Clone, Debug, PartialEq)]
pub enum LsmSpec {
    Escalating(Vec<(f64, f64)>),
    Jones(f64),
    Quadratic(f64, Option<f64>),
    Rbc(Vec<(f64, f64)>),
}

fn pairs(s: &str) -> Result<Vec<(f64, f64)>, String> {
    let v = numbers(s)?;
    if v.is_empty() || v.len() % 2 != 0 {
        return Err("levels come in p,Y pairs".into());
    }
    Ok(v.chunks(2).map(|c| (c[0], c[1])).collect())
}

impl FromStr for LsmSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or("expected kind:arguments")?;
        match kind {
            "escalating" => Ok(LsmSpec::Escalating(pairs(rest)?)),
            "rbc" => Ok(LsmSpec::Rbc(pairs(rest)?)),
            "jones" => Ok(LsmSpec::Jones(exactly::<1>(rest, "jones")?[0])),
            "quadratic" => match numbers(rest)?[..] {
                [b] => Ok(LsmSpec::Quadratic(b, None)),
                [b, g] => Ok(LsmSpec::Quadratic(b, Some(g))),
                _ => Err("quadratic takes b or b,g".into()),
            },
            _ => Err(format!("unknown lane-switch family `{kind}`")),
        }
    }
}

impl fmt::Display for LsmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |levels: &[(f64, f64)]| {
            levels.iter().map(|(p, y)| format!("{p},{y}")).collect::<Vec<_>>().join(",")
        };
        match self {
            LsmSpec::Escalating(l) => write!(f, "escalating:{}", join(l)),
            LsmSpec::Rbc(l) => write!(f, "rbc:{}", join(l)),
            LsmSpec::Jones(g2) => write!(f, "jones:{g2}"),
            LsmSpec::Quadratic(b, None) => write!(f, "quadratic:{b}"),
            LsmSpec::Quadratic(b, Some(g)) => write!(f, "quadratic:{b},{g}"),
        }
    }
}

display_serialize!(LsmSpec);

impl LsmSpec {
    pub fn family(&self, rbc_delta: f64) -> ossp::routing::LsmFamily {
        use ossp::routing::LsmFamily;
        match self {
            LsmSpec::Escalating(levels) => LsmFamily::Escalating { levels: levels.clone() },
            LsmSpec::Jones(g2) => LsmFamily::Jones { g2: *g2 },
            LsmSpec::Quadratic(beta, gamma) => LsmFamily::Quadratic { beta: *beta, gamma: *gamma },
            LsmSpec::Rbc(levels) => LsmFamily::Rbc { levels: levels.clone(), delta: rbc_delta },
        }
    }
}
