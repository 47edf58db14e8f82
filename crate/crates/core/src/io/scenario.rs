use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Thresholds;
use crate::error::{Error, Result};
use crate::flow::{AdaptiveSpacing, DensityMonitor, Monitors, StepParams};
use crate::geometry::Point;
use crate::network::{EdgeEnds, Network, VertexId, VertexKind};

pub const SCENARIO_FORMAT: &str = "trijunction/scenario-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Simulate,
    Analyze,
    Regularize,
    Translate,
    Multiplicity,
    Convergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: usize,
    pub coords: Vec<f64>,
    /// `fixed` or `junction`; checked against the valence on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: usize,
    /// Endpoint vertex ids; absent for closed loops.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ends: Option<[usize; 2]>,
    /// Every node including both end nodes (open edges), or the loop nodes (closed).
    pub nodes: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRecord {
    pub dim: usize,
    #[serde(default)]
    pub vertices: Vec<VertexRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveRecord {
    pub min_h: f64,
    pub nodes_per_radius: f64,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_grading() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRecord {
    pub t_end: f64,
    pub target_h: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_remesh")]
    pub remesh_interval: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveRecord>,
    #[serde(default = "default_diag")]
    pub diagnostics_every: usize,
}

fn default_cfl() -> f64 {
    0.2
}
fn default_omega() -> f64 {
    0.5
}
fn default_remesh() -> usize {
    10
}
fn default_diag() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorRecord {
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default = "default_delta")]
    pub delta_theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature_limit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junction_collision_distance: Option<f64>,
    #[serde(default = "default_embed_interval")]
    pub embed_check_interval: usize,
    #[serde(default = "default_embed_rel")]
    pub embed_rel: f64,
    /// Steps between density checks against `zeta`; absent disables the monitor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_interval: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub density_scales: Vec<f64>,
}

fn default_zeta() -> f64 {
    1.51
}
fn default_delta() -> f64 {
    0.02
}
fn default_embed_interval() -> usize {
    10
}
fn default_embed_rel() -> f64 {
    1e-9
}

impl Default for MonitorRecord {
    fn default() -> Self {
        MonitorRecord {
            zeta: default_zeta(),
            delta_theta: default_delta(),
            curvature_limit: None,
            junction_collision_distance: None,
            embed_check_interval: default_embed_interval(),
            embed_rel: default_embed_rel(),
            density_interval: None,
            density_scales: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRecord {
    /// Spacetime centres `[x, y, ..., t]`.
    #[serde(default)]
    pub centres: Vec<Vec<f64>>,
    #[serde(default)]
    pub scales: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticRecord {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    #[serde(default = "default_rows")]
    pub rows_per_eps: usize,
    #[serde(default)]
    pub times: Vec<f64>,
}

fn default_rows() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizeRecord {
    pub scales: Vec<f64>,
    pub t_end: f64,
    pub target_h: f64,
}

/// Parsed scenario file. Exactly one of `network` and `network_file` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    #[serde(default)]
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Path of a file holding the network, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowRecord>,
    #[serde(default)]
    pub monitors: MonitorRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularize: Option<RegularizeRecord>,
}

impl NetworkRecord {
    pub fn from_network(net: &Network<f64>) -> Self {
        let vertices = net
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| VertexRecord {
                id: i,
                coords: v.position.coords().to_vec(),
                kind: match v.kind() {
                    VertexKind::Fixed => Some("fixed".into()),
                    VertexKind::Junction => Some("junction".into()),
                    VertexKind::Other(_) => None,
                },
            })
            .collect();
        let edges = net
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeRecord {
                id: i,
                ends: match e.ends {
                    EdgeEnds::Open { start, end } => Some([start.0, end.0]),
                    EdgeEnds::Closed => None,
                },
                nodes: e.nodes.iter().map(|p| p.coords().to_vec()).collect(),
            })
            .collect();
        NetworkRecord {
            dim: net.dim(),
            vertices,
            edges,
        }
    }

    pub fn to_network(&self) -> Result<Network<f64>> {
        let bad = |m: String| Error::Parse {
            context: "network".into(),
            message: m,
        };
        if self.dim < 2 {
            return Err(bad(format!("dim = {} (need at least 2)", self.dim)));
        }
        let mut net = Network::new(self.dim);
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(bad(format!("vertices[{i}].id = {} (ids must be 0, 1, 2, ... in order)", v.id)));
            }
            net.add_vertex(point(&v.coords, self.dim, &format!("vertices[{i}].coords"))?);
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.id != i {
                return Err(bad(format!("edges[{i}].id = {} (ids must be 0, 1, 2, ... in order)", e.id)));
            }
            let nodes = e
                .nodes
                .iter()
                .enumerate()
                .map(|(k, c)| point(c, self.dim, &format!("edges[{i}].nodes[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            match e.ends {
                Some([a, b]) => {
                    if a >= self.vertices.len() || b >= self.vertices.len() {
                        return Err(bad(format!("edges[{i}].ends references a missing vertex")));
                    }
                    // stored end nodes must reproduce the vertex positions exactly
                    net.add_edge_with_nodes(VertexId(a), VertexId(b), nodes, 0.0)
                        .map_err(|err| bad(format!("edges[{i}]: {err}")))?;
                }
                None => {
                    if nodes.len() < 3 {
                        return Err(bad(format!("edges[{i}]: a closed loop needs at least three nodes")));
                    }
                    net.add_closed_loop(nodes);
                }
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let Some(kind) = &v.kind else { continue };
            let actual = net.vertices[i].kind();
            let ok = match kind.as_str() {
                "fixed" => actual == VertexKind::Fixed,
                "junction" => actual == VertexKind::Junction,
                other => return Err(bad(format!("vertices[{i}].kind = {other:?} (expected fixed or junction)"))),
            };
            if !ok {
                return Err(bad(format!(
                    "vertices[{i}].kind = {kind:?} but the vertex has valence {}",
                    net.vertices[i].valence()
                )));
            }
        }
        Ok(net)
    }
}

fn point(c: &[f64], dim: usize, field: &str) -> Result<Point<f64>> {
    if c.len() != dim {
        return Err(Error::Parse {
            context: "network".into(),
            message: format!("{field} has {} coordinates, expected {dim}", c.len()),
        });
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse {
            context: "network".into(),
            message: format!("{field} is not finite"),
        });
    }
    Ok(Point::new(c))
}

impl Scenario {
    /// Scenario holding only a network, for snapshots and reference solutions.
    pub fn for_network(net: &Network<f64>) -> Self {
        Scenario {
            format: SCENARIO_FORMAT.into(),
            kind: ExperimentKind::Simulate,
            seed: 0,
            network_file: None,
            network: Some(NetworkRecord::from_network(net)),
            t: None,
            flow: None,
            monitors: MonitorRecord::default(),
            snapshots: Vec::new(),
            analysis: None,
            elliptic: None,
            regularize: None,
        }
    }

    /// Parses scenario text; `network_file` is left unresolved (see [`Scenario::load`]).
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            context: context.into(),
            message: e.to_string(),
        })?;
        if sc.format != SCENARIO_FORMAT {
            return Err(Error::Parse {
                context: context.into(),
                message: format!("format = {:?} (expected {SCENARIO_FORMAT:?})", sc.format),
            });
        }
        if sc.network.is_some() == sc.network_file.is_some() {
            return Err(Error::Parse {
                context: context.into(),
                message: "exactly one of `network` and `network_file` must be given".into(),
            });
        }
        sc.check_ranges().map_err(|m| Error::Parse {
            context: context.into(),
            message: m,
        })?;
        if let Some(n) = &sc.network {
            n.to_network().map_err(|e| Error::Parse {
                context: context.into(),
                message: e.to_string(),
            })?;
        }
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut sc = Self::parse(&text, &path.display().to_string())?;
        if let Some(rel) = sc.network_file.take() {
            let file = path.parent().unwrap_or(Path::new(".")).join(&rel);
            if !file.is_file() {
                return Err(Error::Parse {
                    context: path.display().to_string(),
                    message: format!("network_file {} does not exist", file.display()),
                });
            }
            let inner = Self::parse(&std::fs::read_to_string(&file)?, &file.display().to_string())?;
            sc.network = inner.network;
            if sc.network.is_none() {
                return Err(Error::Parse {
                    context: file.display().to_string(),
                    message: "no inline network".into(),
                });
            }
        }
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Range checks, for scenarios edited after parsing (command-line overrides).
    pub fn validate(&self) -> Result<()> {
        self.check_ranges().map_err(|m| Error::Parse {
            context: "parameters".into(),
            message: m,
        })
    }

    fn check_ranges(&self) -> std::result::Result<(), String> {
        if let Some(f) = &self.flow {
            if !(f.t_end > 0.0) {
                return Err("flow.t_end must be positive".into());
            }
            if !(f.cfl > 0.0 && f.cfl <= 0.5) {
                return Err("flow.cfl must lie in (0, 0.5]".into());
            }
            if !(f.target_h > 0.0) {
                return Err("flow.target_h must be positive".into());
            }
            if !(0.0..=1.0).contains(&f.omega) {
                return Err("flow.omega must lie in [0, 1]".into());
            }
        }
        let m = &self.monitors;
        if !(m.zeta > 1.5 && m.zeta < (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt()) {
            return Err("monitors.zeta must lie strictly between 3/2 and sqrt(2 pi / e)".into());
        }
        if !(m.delta_theta > 0.0 && m.delta_theta < 0.5) {
            return Err("monitors.delta_theta must lie in (0, 0.5)".into());
        }
        if let Some(e) = &self.elliptic {
            if !(e.epsilon > 0.0) {
                return Err("elliptic.epsilon must be positive".into());
            }
        }
        if self.snapshots.iter().any(|t| !(*t >= 0.0)) {
            return Err("snapshots must be nonnegative times".into());
        }
        Ok(())
    }

    pub fn network(&self) -> Result<Network<f64>> {
        self.network
            .as_ref()
            .ok_or_else(|| Error::Parse {
                context: "scenario".into(),
                message: "no network loaded".into(),
            })?
            .to_network()
    }

    pub fn step_params(&self) -> Result<StepParams<f64>> {
        let f = self.flow.as_ref().ok_or_else(|| Error::param("flow", "missing [flow] section"))?;
        let p = StepParams {
            cfl: f.cfl,
            target_h: f.target_h,
            omega: f.omega,
            remesh_interval: f.remesh_interval,
            dt_max: f.dt_max.unwrap_or(f64::INFINITY),
            adaptive: f.adaptive.as_ref().map(|a| AdaptiveSpacing {
                min_h: a.min_h,
                nodes_per_radius: a.nodes_per_radius,
                grading: a.grading,
            }),
        };
        p.check()?;
        Ok(p)
    }

    pub fn monitors(&self) -> Monitors<f64> {
        let m = &self.monitors;
        Monitors {
            curvature_limit: m.curvature_limit.unwrap_or(f64::INFINITY),
            junction_collision_distance: m.junction_collision_distance,
            embed_check_interval: m.embed_check_interval,
            embed_rel: m.embed_rel,
            density: m.density_interval.map(|interval| DensityMonitor {
                zeta: m.zeta,
                interval,
                scales: m.density_scales.clone(),
            }),
        }
    }

    pub fn thresholds(&self) -> Thresholds<f64> {
        Thresholds {
            zeta: self.monitors.zeta,
            delta: self.monitors.delta_theta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn network_round_trip_is_lossless() {
        let nets: Vec<Network<f64>> = vec![
            shapes::lens(0.5, 1.0, 0.1),
            shapes::two_circles_and_segment(0.5, 1.5, 0.2),
            shapes::curved_triod(0.2, 7),
        ];
        for net in nets {
            let text = Scenario::for_network(&net).to_toml();
            let back = Scenario::parse(&text, "test").unwrap().network().unwrap();
            assert_eq!(back, net);
        }
    }

    #[test]
    fn errors_name_the_field() {
        let text = format!("format = \"{SCENARIO_FORMAT}\"\n[network]\ndim = 2\n[[network.vertices]]\nid = 0\ncoords = [0.0]\n");
        let err = Scenario::parse(&text, "s.toml").unwrap_err().to_string();
        assert!(err.contains("vertices[0].coords") || err.contains("coordinates"), "{err}");
        let text = format!("format = \"{SCENARIO_FORMAT}\"\nbogus = 1\n[network]\ndim = 2\n");
        let err = Scenario::parse(&text, "s.toml").unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("line"), "{err}");
        let text = format!("format = \"{SCENARIO_FORMAT}\"\n[network]\ndim = 2\n[flow]\nt_end = 1.0\ntarget_h = 0.1\ncfl = 0.9\n");
        assert!(Scenario::parse(&text, "s.toml").unwrap_err().to_string().contains("cfl"));
    }

    #[test]
    fn kind_mismatch_rejected() {
        let net: Network<f64> = shapes::triod([0.0, 120.0, 240.0], 1.0, 0.25);
        let mut rec = NetworkRecord::from_network(&net);
        rec.vertices[0].kind = Some("fixed".into());
        assert!(rec.to_network().is_err());
    }
}
