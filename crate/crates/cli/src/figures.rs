//! Figure bundles: each figure is a list of panels, each panel one CSV.
//!
//! File names follow `fig{id}_{panel}_{kind}_{what}.csv`. Phase columns are
//! θ₀/π and time columns are γt.

use std::f64::consts::{PI, TAU};

use giant_atom_core::collective::{collective_basis, transition_rates};
use giant_atom_core::lindblad::linspace;
use giant_atom_core::output::{config_hash, format_number, write_footer};
use giant_atom_core::scenarios::{
    max_concurrence_vs_detuning, phase_cut, run_sweep, CellData, Channel, MaxSearch, Settings, SweepSpec,
};
use giant_atom_core::{ConfigKind, InitialState, Result};
use serde::Serialize;

pub const FIGURE_IDS: [&str; 6] = ["3", "4", "5", "6", "7", "detuning"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureOptions {
    pub theta_points: usize,
    pub t_points: usize,
    pub delta_points: usize,
    pub delta_max: f64,
    pub horizon: f64,
    pub sample_dt: f64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            theta_points: 201,
            t_points: 1001,
            delta_points: 101,
            delta_max: 5.0,
            horizon: 100.0,
            sample_dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Content {
    Rates,
    Landscape { initial: InitialState, t_max: f64 },
    Profiles { initials: Vec<InitialState>, thetas_over_pi: Vec<f64>, t_max: f64 },
    Populations { initial: InitialState, thetas_over_pi: Vec<f64>, t_max: f64 },
    PhaseCut { initial: InitialState, times: Vec<f64> },
    Detuning { initial: InitialState, thetas_over_pi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub figure: String,
    pub panel: char,
    pub kind: ConfigKind,
    pub content: Content,
    pub options: FigureOptions,
}

impl Panel {
    pub fn file_name(&self) -> String {
        let what = match &self.content {
            Content::Rates => "rates".to_string(),
            Content::Landscape { initial, .. } => format!("landscape_{initial}"),
            Content::Profiles { initials, .. } => {
                let names: Vec<String> = initials.iter().map(|i| i.to_string()).collect();
                format!("profiles_{}", names.join("_"))
            }
            Content::Populations { initial, .. } => format!("populations_{initial}"),
            Content::PhaseCut { initial, .. } => format!("phasecut_{initial}"),
            Content::Detuning { initial, .. } => format!("maxc_vs_delta_{initial}"),
        };
        format!("fig{}_{}_{}_{}.csv", self.figure, self.panel, self.kind.name(), what)
    }
}

struct Set {
    eg_profiles: &'static [f64],
    ee_profiles: &'static [f64],
    eg_populations: &'static [f64],
    ee_populations: &'static [f64],
    eg_cuts: &'static [f64],
    ee_cuts: &'static [f64],
    ee_t_max: f64,
    eg_t_max: f64,
}

const THIRD: f64 = 1.0 / 3.0;

fn panel_set(kind: ConfigKind) -> Set {
    match kind {
        ConfigKind::Separate => Set {
            eg_profiles: &[0.0, 0.25, 0.5, 0.75, 0.95],
            ee_profiles: &[0.1, 0.4, 0.6, 0.85, 0.95],
            eg_populations: &[0.001, 0.83],
            ee_populations: &[0.1, 0.83],
            eg_cuts: &[0.5, 2.0, 10.0],
            ee_cuts: &[2.0, 10.0, 40.0],
            eg_t_max: 10.0,
            ee_t_max: 40.0,
        },
        ConfigKind::Braided => Set {
            eg_profiles: &[0.0, 0.125, THIRD, 0.45, 0.5],
            ee_profiles: &[0.1, 0.2, 0.3],
            eg_populations: &[0.001, THIRD],
            ee_populations: &[0.2, 0.3],
            eg_cuts: &[PI / 4.0, 3.0 * PI / 4.0, 7.0 * PI / 4.0],
            ee_cuts: &[2.0, 10.0, 40.0],
            eg_t_max: 10.0,
            ee_t_max: 40.0,
        },
        ConfigKind::Nested => Set {
            eg_profiles: &[0.0, THIRD, 0.85],
            ee_profiles: &[THIRD, 2.0 * THIRD, 0.8, 0.85],
            eg_populations: &[THIRD, 0.85],
            ee_populations: &[THIRD, 0.85],
            eg_cuts: &[1.0, 10.0, 40.0],
            ee_cuts: &[0.7, 20.0, 40.0],
            eg_t_max: 40.0,
            ee_t_max: 40.0,
        },
    }
}

/// Panels of one figure, or `None` for an unknown id.
pub fn figure_panels(id: &str, options: &FigureOptions) -> Option<Vec<Panel>> {
    let panel = |letter: char, kind: ConfigKind, content: Content| Panel {
        figure: id.to_string(),
        panel: letter,
        kind,
        content,
        options: *options,
    };
    let eg = InitialState::EG;
    let ee = InitialState::EE;
    let landscape_t = 10.0;
    let panels = match id {
        "3" => ConfigKind::ALL
            .iter()
            .zip(['a', 'b', 'c'])
            .map(|(&k, l)| panel(l, k, Content::Rates))
            .collect(),
        "4" | "5" | "6" => {
            let kind = match id {
                "4" => ConfigKind::Separate,
                "5" => ConfigKind::Braided,
                _ => ConfigKind::Nested,
            };
            let s = panel_set(kind);
            vec![
                panel('a', kind, Content::Landscape { initial: eg, t_max: landscape_t }),
                panel('b', kind, Content::Landscape { initial: ee, t_max: landscape_t }),
                panel(
                    'c',
                    kind,
                    Content::Profiles { initials: vec![eg], thetas_over_pi: s.eg_profiles.to_vec(), t_max: s.eg_t_max },
                ),
                panel(
                    'd',
                    kind,
                    Content::Profiles { initials: vec![ee], thetas_over_pi: s.ee_profiles.to_vec(), t_max: s.ee_t_max },
                ),
                panel(
                    'e',
                    kind,
                    Content::Populations { initial: eg, thetas_over_pi: s.eg_populations.to_vec(), t_max: s.eg_t_max },
                ),
                panel(
                    'f',
                    kind,
                    Content::Populations { initial: ee, thetas_over_pi: s.ee_populations.to_vec(), t_max: s.ee_t_max },
                ),
                panel('g', kind, Content::PhaseCut { initial: eg, times: s.eg_cuts.to_vec() }),
                panel('h', kind, Content::PhaseCut { initial: ee, times: s.ee_cuts.to_vec() }),
            ]
        }
        "7" => vec![
            panel('a', ConfigKind::Nested, Content::Landscape { initial: InitialState::GE, t_max: landscape_t }),
            panel(
                'b',
                ConfigKind::Nested,
                Content::Profiles { initials: vec![eg, InitialState::GE], thetas_over_pi: vec![0.0, 0.85], t_max: 40.0 },
            ),
        ],
        "detuning" => ConfigKind::ALL
            .iter()
            .enumerate()
            .flat_map(|(k, &kind)| {
                let s = panel_set(kind);
                let letters = [(b'a' + 2 * k as u8) as char, (b'b' + 2 * k as u8) as char];
                [
                    panel(letters[0], kind, Content::Detuning { initial: eg, thetas_over_pi: s.eg_profiles.to_vec() }),
                    panel(letters[1], kind, Content::Detuning { initial: ee, thetas_over_pi: s.ee_profiles.to_vec() }),
                ]
            })
            .collect(),
        _ => return None,
    };
    Some(panels)
}

fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * TAU / n as f64).collect()
}

/// Render one panel to CSV bytes (header, rows, footer).
pub fn render(p: &Panel) -> Result<Vec<u8>> {
    let o = &p.options;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let header: Vec<&str>;
    let f = format_number;
    match &p.content {
        Content::Rates => {
            header = vec!["theta0_over_pi", "Omega", "Gamma_2p", "Gamma_2m", "Gamma_p0", "Gamma_m0", "Gamma_pm", "Delta"];
            for theta in linspace(0.0, TAU, o.theta_points) {
                let r = giant_atom_core::derive_rates_closed_form(p.kind, theta, 1.0);
                let mut row = vec![f(theta / PI)];
                match (collective_basis(&r), transition_rates(&r)) {
                    (Ok(b), Ok(tr)) => {
                        row.push(f(b.omega));
                        row.extend(tr.as_array().map(f));
                    }
                    _ => row.extend(std::iter::repeat_n(String::new(), 7)),
                }
                rows.push(row);
            }
        }
        Content::Landscape { initial, t_max } => {
            header = vec!["theta0_over_pi", "gamma_t", "C"];
            let spec = SweepSpec::new(p.kind, *initial, periodic_grid(o.theta_points), linspace(0.0, *t_max, o.t_points));
            let result = run_sweep(&spec)?;
            for (cell, cs) in result.cells.iter().zip(result.concurrence_matrix()) {
                for (t, c) in spec.t_grid.iter().zip(cs) {
                    rows.push(vec![f(cell.theta0 / PI), f(*t), f(c)]);
                }
            }
        }
        Content::Profiles { initials, thetas_over_pi, t_max } => {
            header = vec!["initial", "theta0_over_pi", "gamma_t", "C"];
            let thetas: Vec<f64> = thetas_over_pi.iter().map(|x| x * PI).collect();
            for initial in initials {
                let spec = SweepSpec::new(p.kind, *initial, thetas.clone(), linspace(0.0, *t_max, o.t_points));
                let result = run_sweep(&spec)?;
                for (x, cs) in thetas_over_pi.iter().zip(result.concurrence_matrix()) {
                    for (t, c) in spec.t_grid.iter().zip(cs) {
                        rows.push(vec![initial.to_string(), f(*x), f(*t), f(c)]);
                    }
                }
            }
        }
        Content::Populations { initial, thetas_over_pi, t_max } => {
            header = vec!["theta0_over_pi", "gamma_t", "rho_22", "rho_pp", "rho_mm", "rho_00"];
            let thetas: Vec<f64> = thetas_over_pi.iter().map(|x| x * PI).collect();
            let spec = SweepSpec::new(p.kind, *initial, thetas, linspace(0.0, *t_max, o.t_points))
                .with_channels(&[Channel::Populations]);
            let result = run_sweep(&spec)?;
            for (x, cell) in thetas_over_pi.iter().zip(&result.cells) {
                let pops = match &cell.outcome {
                    Ok(CellData { populations: Some(Ok(p)), .. }) => Some(p),
                    _ => None,
                };
                for (k, t) in spec.t_grid.iter().enumerate() {
                    let mut row = vec![f(*x), f(*t)];
                    match pops {
                        Some(p) => {
                            let q = &p[k];
                            row.extend([q.rho_22, q.rho_pp, q.rho_mm, q.rho_00].map(f));
                        }
                        None => row.extend(std::iter::repeat_n(String::new(), 4)),
                    }
                    rows.push(row);
                }
            }
        }
        Content::PhaseCut { initial, times } => {
            header = vec!["gamma_t", "theta0_over_pi", "C"];
            let grid = linspace(0.0, TAU, o.theta_points);
            let mut sorted = times.clone();
            sorted.sort_by(f64::total_cmp);
            let cut = phase_cut(p.kind, *initial, &sorted, &grid, &Settings::default())?;
            for (t, curve) in cut.t_values.iter().zip(&cut.curves) {
                for (theta, c) in grid.iter().zip(curve) {
                    rows.push(vec![f(*t), f(theta / PI), f(*c)]);
                }
            }
        }
        Content::Detuning { initial, thetas_over_pi } => {
            header = vec!["theta0_over_pi", "delta", "C_max", "t_at_max", "at_boundary"];
            let deltas = linspace(0.0, o.delta_max, o.delta_points);
            let search = MaxSearch { horizon: o.horizon, sample_dt: o.sample_dt, ..MaxSearch::default() };
            for x in thetas_over_pi {
                let maxima = max_concurrence_vs_detuning(p.kind, *initial, x * PI, &deltas, &Settings::default(), &search);
                for (d, m) in deltas.iter().zip(maxima) {
                    let row = match m {
                        Ok(m) => vec![f(*x), f(*d), f(m.value), f(m.time), m.at_boundary.to_string()],
                        Err(_) => vec![f(*x), f(*d), String::new(), String::new(), String::new()],
                    };
                    rows.push(row);
                }
            }
        }
    }
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&header).expect("in-memory CSV");
        for r in &rows {
            w.write_record(r).expect("in-memory CSV");
        }
        w.flush().expect("in-memory CSV");
    }
    write_footer(&mut out, &config_hash(p)).expect("in-memory CSV");
    Ok(out)
}
