use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What the magnitude part of the model reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeTarget {
    /// `e^{−η} ≈ c²`
    #[default]
    Squared,
    /// `e^{−η} ≈ |c|`
    Absolute,
}

impl MagnitudeTarget {
    pub fn name(self) -> &'static str {
        match self {
            MagnitudeTarget::Squared => "squared",
            MagnitudeTarget::Absolute => "absolute",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "squared" => Some(MagnitudeTarget::Squared),
            "absolute" => Some(MagnitudeTarget::Absolute),
            _ => None,
        }
    }

    /// The quantity fitted for a coefficient `c`.
    pub fn of(self, c: f64) -> f64 {
        match self {
            MagnitudeTarget::Squared => c * c,
            MagnitudeTarget::Absolute => c.abs(),
        }
    }
}

/// Fitted occupation-product ansatz.
///
/// For a determinant with feature row `x` (intercept first), the magnitude
/// part is `η = A + Σ_c ω_c x_c` and the phase score is `Σ_c v_c x_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzModel {
    pub order: usize,
    pub target: MagnitudeTarget,
    /// Spin-orbital tuple of every column, intercept (empty tuple) first.
    pub columns: Vec<Vec<usize>>,
    pub a: f64,
    /// One weight per non-intercept column.
    pub omega: Vec<f64>,
    /// One weight per column including the intercept.
    pub v_phase: Vec<f64>,
}

impl AnsatzModel {
    /// Model with every weight zero.
    pub fn zeros(order: usize, target: MagnitudeTarget, columns: Vec<Vec<usize>>) -> Self {
        let p = columns.len();
        AnsatzModel {
            order,
            target,
            columns,
            a: 0.0,
            omega: vec![0.0; p.saturating_sub(1)],
            v_phase: vec![0.0; p],
        }
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Magnitude parameters laid out per column: `[A, ω…]`.
    pub fn theta(&self) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.omega.len() + 1);
        t.push(self.a);
        t.extend_from_slice(&self.omega);
        t
    }

    pub(crate) fn set_theta(&mut self, theta: &[f64]) {
        self.a = theta[0];
        self.omega.copy_from_slice(&theta[1..]);
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.columns.len();
        if p == 0 || !self.columns[0].is_empty() {
            return Err(Error::Domain("model must start with the intercept column".into()));
        }
        if self.omega.len() + 1 != p || self.v_phase.len() != p {
            return Err(Error::Domain(format!(
                "model has {p} columns but {} omega and {} phase weights",
                self.omega.len(),
                self.v_phase.len()
            )));
        }
        if !self.a.is_finite() {
            return Err(Error::Domain("model intercept is not finite".into()));
        }
        if self.omega.iter().chain(&self.v_phase).any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("model weights must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Plain-text form.
    ///
    /// ```text
    /// order 1
    /// target squared
    /// A 1.2e0
    /// - 0e0 3.14e0
    /// 0 5e-1 0e0
    /// ```
    ///
    /// After the header, each line is a column: its tuple (comma separated,
    /// `-` for the intercept), `omega` (0 for the intercept) and `v_phase`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order {}", self.order);
        let _ = writeln!(s, "target {}", self.target.name());
        let _ = writeln!(s, "A {:e}", self.a);
        for (c, tuple) in self.columns.iter().enumerate() {
            let label = if tuple.is_empty() {
                "-".to_string()
            } else {
                tuple.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
            };
            let omega = if c == 0 { 0.0 } else { self.omega[c - 1] };
            let _ = writeln!(s, "{label} {omega:e} {:e}", self.v_phase[c]);
        }
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (i, l) = lines
                .next()
                .ok_or_else(|| err(0, format!("missing `{key}` line")))?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(err(i + 1, format!("expected `{key}`")));
            }
            let value = parts
                .next()
                .ok_or_else(|| err(i + 1, format!("`{key}` has no value")))?;
            Ok((i + 1, value.to_string()))
        };
        let (ln, order) = header("order")?;
        let order: usize = order.parse().map_err(|_| err(ln, "bad order".into()))?;
        let (ln, target) = header("target")?;
        let target =
            MagnitudeTarget::parse(&target).ok_or_else(|| err(ln, format!("unknown target `{target}`")))?;
        let (ln, a) = header("A")?;
        let a: f64 = a.parse().map_err(|_| err(ln, "bad intercept".into()))?;

        let mut columns = Vec::new();
        let mut omega = Vec::new();
        let mut v_phase = Vec::new();
        for (i, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(i + 1, format!("expected 3 fields, found {}", fields.len())));
            }
            let tuple = if fields[0] == "-" {
                Vec::new()
            } else {
                fields[0]
                    .split(',')
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| err(i + 1, format!("bad column `{}`", fields[0])))?
            };
            let w: f64 = fields[1].parse().map_err(|_| err(i + 1, "bad omega".into()))?;
            let v: f64 = fields[2].parse().map_err(|_| err(i + 1, "bad phase weight".into()))?;
            if !columns.is_empty() {
                omega.push(w);
            }
            columns.push(tuple);
            v_phase.push(v);
        }
        let model = AnsatzModel {
            order,
            target,
            columns,
            a,
            omega,
            v_phase,
        };
        model.validate().map_err(|e| err(0, e.to_string()))?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}
