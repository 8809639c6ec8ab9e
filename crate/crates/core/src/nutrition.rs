//! Carbohydrate intake strategies and their rasterization onto a mesh.

use std::fmt::Write as _;

use crate::bioenergetics::Mesh;
use crate::error::{ModelError, Result};
use crate::params::KJ_PER_KCAL;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GelEvent {
    /// Minutes from the start.
    pub time: f64,
    /// kJ injected into the nutrition compartment.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NutritionStrategy {
    pub id: String,
    events: Vec<GelEvent>,
}

impl NutritionStrategy {
    /// Events are sorted by time; energies must be positive and times non-negative.
    pub fn new(id: impl Into<String>, mut events: Vec<GelEvent>) -> Result<Self> {
        for e in &events {
            if !(e.time.is_finite() && e.time >= 0.0) {
                return Err(ModelError::InvalidEvent(format!("time {} must be >= 0", e.time)));
            }
            if !(e.energy.is_finite() && e.energy > 0.0) {
                return Err(ModelError::InvalidEvent(format!(
                    "energy {} must be > 0",
                    e.energy
                )));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self {
            id: id.into(),
            events,
        })
    }

    pub fn none() -> Self {
        Self {
            id: "s0".into(),
            events: Vec::new(),
        }
    }

    pub fn events(&self) -> &[GelEvent] {
        &self.events
    }

    pub fn total_energy(&self) -> f64 {
        self.events.iter().fold(0.0, |acc, e| acc + e.energy)
    }

    pub fn total_kcal(&self) -> f64 {
        self.total_energy() / KJ_PER_KCAL
    }

    /// Error if any event lies beyond `horizon` minutes.
    pub fn check_horizon(&self, horizon: f64) -> Result<()> {
        match self.events.iter().find(|e| e.time > horizon) {
            Some(e) => Err(ModelError::EventOutsideHorizon {
                time: e.time,
                horizon,
            }),
            None => Ok(()),
        }
    }

    /// CSV lines `id,time_min,energy_kJ`, one per event, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,time_min,energy_kJ\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{}", self.id, e.time, e.energy);
        }
        out
    }

    /// Parse the CSV produced by [`to_csv`](Self::to_csv). Lines starting with
    /// `#` and a leading header are skipped. An empty file is the empty strategy.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut id: Option<String> = None;
        let mut events = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("id,") {
                continue;
            }
            let err = |msg: String| ModelError::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            }
            let time = fields[1]
                .parse::<f64>()
                .map_err(|e| err(format!("bad time: {e}")))?;
            let energy = fields[2]
                .parse::<f64>()
                .map_err(|e| err(format!("bad energy: {e}")))?;
            match &id {
                None => id = Some(fields[0].to_string()),
                Some(prev) if prev != fields[0] => {
                    return Err(err(format!("mixed strategy ids `{prev}` and `{}`", fields[0])))
                }
                _ => {}
            }
            events.push(GelEvent { time, energy });
        }
        Self::new(id.unwrap_or_else(|| "custom".into()), events)
    }
}

fn gels(kcal: f64, times: impl IntoIterator<Item = f64>) -> Vec<GelEvent> {
    times
        .into_iter()
        .map(|time| GelEvent {
            time,
            energy: kcal * KJ_PER_KCAL,
        })
        .collect()
}

fn evenly(n: usize, t_final: f64) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| i as f64 * t_final / (n as f64 + 1.0))
}

/// The catalogue s0..s15.
///
/// "Spread evenly, n gels" places gel i at `i·T/(n+1)`; "towards the beginning"
/// is `0.15·T`, "towards the end" `0.80·T`.
pub fn builtin_strategy(index: usize, t_final: f64) -> Result<NutritionStrategy> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(ModelError::InvalidMesh(format!("t_final must be > 0, got {t_final}")));
    }
    let t = t_final;
    let events = match index {
        0..=7 => {
            let n = [0, 1, 2, 3, 4, 5, 11, 24][index];
            gels(100.0, evenly(n, t))
        }
        8 => gels(100.0, [0.15 * t]),
        9 => gels(100.0, [0.80 * t]),
        10 => gels(100.0, [0.10 * t, 0.20 * t, 0.75 * t, 0.85 * t]),
        11 => gels(200.0, evenly(4, t)),
        12 => gels(250.0, evenly(2, t)),
        13 => gels(250.0, evenly(4, t)),
        14 => gels(50.0, evenly(10, t)),
        15 => {
            let mut ev = gels(250.0, [0.20 * t, 0.80 * t]);
            ev.extend(gels(100.0, [0.50 * t]));
            ev
        }
        _ => return Err(ModelError::StrategyIndex(index)),
    };
    NutritionStrategy::new(format!("s{index}"), events)
}

/// Four 200 kcal gels at minutes 20, 46, 71 and 97.
pub fn world_record_strategy() -> NutritionStrategy {
    NutritionStrategy::new("world_record", gels(200.0, [20.0, 46.0, 71.0, 97.0]))
        .expect("static events are valid")
}

/// Source term `s_k` (kJ/min) for each interval of `mesh`.
///
/// Each event lands on the mesh node nearest its time, ties going to the
/// earlier node, and contributes `energy / h`. Events at the final node are
/// moved to the last interval so that `h·Σ s_k` always equals the total energy.
pub fn pulse_profile(strategy: &NutritionStrategy, mesh: &Mesh) -> Result<Vec<f64>> {
    let horizon = mesh.t_final();
    strategy.check_horizon(horizon + 1e-9 * horizon.max(1.0))?;
    let intervals = mesh.n_nodes() - 1;
    let h = mesh.h();
    let mut energy = vec![0.0; intervals];
    for e in strategy.events() {
        let pos = e.time / h;
        let lower = pos.floor();
        // ties (frac == 0.5) go to the earlier node
        let node = if pos - lower > 0.5 { lower + 1.0 } else { lower } as usize;
        energy[node.min(intervals - 1)] += e.energy;
    }
    Ok(energy.into_iter().map(|e| e / h).collect())
}
