//! Fixed-step classical RK4 with per-step monitors.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// A scalar function of `(t, state)` recorded at every time point.
pub struct Monitor<'a> {
    pub name: String,
    f: Box<dyn Fn(f64, &[f64]) -> Result<f64> + Send + Sync + 'a>,
}

impl<'a> Monitor<'a> {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, &[f64]) -> Result<f64> + Send + Sync + 'a) -> Self {
        Monitor { name: name.into(), f: Box::new(f) }
    }

    pub fn eval(&self, t: f64, state: &[f64]) -> Result<f64> {
        (self.f)(t, state)
    }
}

impl fmt::Debug for Monitor<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Monitor").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    /// `(name, values)`, one value per entry of `times`.
    pub monitors: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn monitor(&self, name: &str) -> Result<&[f64]> {
        self.monitors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::UnknownMonitor(name.to_string()))
    }

    /// Values of one state coordinate over time.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let idx = self.labels.iter().position(|l| l == label)?;
        Some(self.states.iter().map(|s| s[idx]).collect())
    }

    /// CSV with header `t,<labels>,<monitors>`; numbers use the shortest
    /// representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for name in self.labels.iter().chain(self.monitors.iter().map(|(n, _)| n)) {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t}");
            for v in &self.states[k] {
                let _ = write!(out, ",{v}");
            }
            for (_, series) in &self.monitors {
                let _ = write!(out, ",{}", series[k]);
            }
            out.push('\n');
        }
        out
    }
}

/// An integration that stopped early. `trajectory` holds every state up to
/// and including the last good one.
#[derive(Debug)]
pub struct Aborted {
    pub trajectory: Trajectory,
    pub error: Error,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.trajectory.times.last().copied().unwrap_or(f64::NAN);
        write!(f, "integration stopped after t = {t}: {}", self.error)
    }
}

impl std::error::Error for Aborted {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Aborted> for Error {
    fn from(a: Aborted) -> Error {
        a.error
    }
}

/// One classical RK4 step. Field failures are reported with the stage
/// (1 to 4) and the stage time.
pub fn rk4_step<F>(field: &mut F, state: &[f64], t: f64, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut stage = |k: usize, tk: f64, s: &[f64]| -> Result<Vec<f64>> {
        let v = field(tk, s).map_err(|e| Error::Stage { stage: k, t: tk, source: Box::new(e) })?;
        if v.len() != s.len() {
            return Err(Error::Shape(format!("field returned {} components for a state of {}", v.len(), s.len())));
        }
        Ok(v)
    };
    let offset = |k: &[f64], c: f64| -> Vec<f64> { state.iter().zip(k).map(|(s, d)| s + c * d).collect() };
    let k1 = stage(1, t, state)?;
    let k2 = stage(2, t + 0.5 * h, &offset(&k1, 0.5 * h))?;
    let k3 = stage(3, t + 0.5 * h, &offset(&k2, 0.5 * h))?;
    let k4 = stage(4, t + h, &offset(&k3, h))?;
    Ok((0..state.len()).map(|i| state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Number of steps covering `[t0, t1]` with step `h`; the last step is
/// shortened to land on `t1`.
pub fn step_count(t0: f64, t1: f64, h: f64) -> usize {
    // guard against (t1 - t0) / h landing just above an integer
    let q = (t1 - t0) / h;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    }
}

/// Integrates `field` from `t0` to `t1`. On failure the partial trajectory
/// is returned inside [`Aborted`].
pub fn integrate<F>(
    mut field: F,
    state0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
    labels: Vec<String>,
    monitors: &[Monitor<'_>],
) -> std::result::Result<Trajectory, Box<Aborted>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut traj = Trajectory {
        labels,
        monitors: monitors.iter().map(|m| (m.name.clone(), Vec::new())).collect(),
        ..Trajectory::default()
    };
    let fail = |traj: Trajectory, error: Error| Box::new(Aborted { trajectory: traj, error });
    if !(h > 0.0 && t1 > t0 && h.is_finite() && t1.is_finite() && t0.is_finite()) {
        return Err(fail(traj, Error::Precondition(format!("need h > 0 and t1 > t0, got h = {h}, [{t0}, {t1}]"))));
    }
    if traj.labels.len() != state0.len() {
        let msg = format!("{} labels for a state of dimension {}", traj.labels.len(), state0.len());
        return Err(fail(traj, Error::Shape(msg)));
    }
    let record = |traj: &mut Trajectory, t: f64, s: Vec<f64>| -> Result<()> {
        let values = monitors.iter().map(|m| m.eval(t, &s)).collect::<Result<Vec<_>>>()?;
        traj.times.push(t);
        traj.states.push(s);
        for ((_, series), v) in traj.monitors.iter_mut().zip(values) {
            series.push(v);
        }
        Ok(())
    };
    if let Err(e) = record(&mut traj, t0, state0.to_vec()) {
        return Err(fail(traj, e));
    }
    let steps = step_count(t0, t1, h);
    let mut state = state0.to_vec();
    let mut t = t0;
    for k in 1..=steps {
        let next_t = if k == steps { t1 } else { t0 + k as f64 * h };
        let next = match rk4_step(&mut field, &state, t, next_t - t) {
            Ok(s) => s,
            Err(e) => return Err(fail(traj, e)),
        };
        if let Some(bad) = next.iter().position(|v| !v.is_finite()) {
            let e = Error::Precondition(format!("state component {bad} became non-finite at t = {next_t}"));
            return Err(fail(traj, e));
        }
        if let Err(e) = record(&mut traj, next_t, next.clone()) {
            return Err(fail(traj, e));
        }
        state = next;
        t = next_t;
    }
    Ok(traj)
}

/// `(max |m(t) - m(t0)|, that / max(|m(t0)|, 1))`.
pub fn drift_report(traj: &Trajectory, monitor: &str) -> Result<(f64, f64)> {
    let series = traj.monitor(monitor)?;
    let Some(&first) = series.first() else {
        return Ok((0.0, 0.0));
    };
    let max = series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
    Ok((max, max / first.abs().max(1.0)))
}
