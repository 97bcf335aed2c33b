//! Simulated worlds the learner acts in. [`RpcFlat`] is a robot moving
//! through a 3x2 grid of rooms, optionally carrying a pack, with a cat that
//! can jump on things.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::Observation;

/// What the learner can do to a world.
pub trait Environment {
    fn actions(&self) -> Vec<String>;
    /// Executes an action and returns the sensor readings that follow it.
    fn act(&mut self, action: &str) -> Result<Observation>;
    /// Restores the initial configuration and reseeds the sensor stream.
    fn reset(&mut self, seed: u64);
    /// Installs an exogenous event schedule, replacing the previous one.
    fn script(&mut self, events: Vec<ScheduledEvent>);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    CatRandomMove,
    CatJumpOnRobot,
    CatJumpOnPack,
    CatDismount,
    PackDrop,
}

/// An event applied after the action dynamics of step `at_step` (the first
/// `act` call is step 1) and before the sensors are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub at_step: usize,
    pub kind: EventKind,
}

pub const ROOM_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

/// Rooms are numbered A..F = 0..5; A, B, C form the row `y = 0.5` from west
/// to east and D, E, F the row `y = 1.5`.
pub fn room_center(room: u8) -> (f64, f64) {
    (0.5 + (room % 3) as f64, 0.5 + (room / 3) as f64)
}

pub fn room_index(name: &str) -> Option<u8> {
    ROOM_NAMES.iter().position(|&n| n == name).map(|i| i as u8)
}

/// Room reached by a move, staying put at walls.
pub fn move_room(room: u8, action: &str) -> u8 {
    let (col, row) = (room % 3, room / 3);
    match action {
        "N" if row == 0 => room + 3,
        "S" if row == 1 => room - 3,
        "E" if col < 2 => room + 1,
        "W" if col > 0 => room - 1,
        _ => room,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackPos {
    Room(u8),
    Carried,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatPos {
    Room(u8),
    OnRobot,
    OnPack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcFlatState {
    pub robot: u8,
    pub pack: PackPos,
    pub cat: CatPos,
    /// Last sensed robot position.
    pub position: (f64, f64),
}

impl RpcFlatState {
    pub fn pack_room(&self) -> u8 {
        match self.pack {
            PackPos::Room(r) => r,
            PackPos::Carried => self.robot,
        }
    }

    /// Objects weighing on the robot: the pack, and the cat on the robot or
    /// on a carried pack.
    pub fn carried_objects(&self) -> u32 {
        let carried = self.pack == PackPos::Carried;
        u32::from(carried)
            + u32::from(self.cat == CatPos::OnRobot)
            + u32::from(self.cat == CatPos::OnPack && carried)
    }

    pub fn abstraction(&self) -> AbstractRpc {
        AbstractRpc {
            robot: self.robot,
            pack: self.pack_room(),
            loaded: self.pack == PackPos::Carried,
        }
    }
}

/// The six-room, one-pack abstraction of the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbstractRpc {
    pub robot: u8,
    pub pack: u8,
    pub loaded: bool,
}

/// Ground-truth abstract dynamics without exogenous events.
pub fn abstract_step(s: AbstractRpc, action: &str) -> AbstractRpc {
    match action {
        "L" if s.robot == s.pack => AbstractRpc { loaded: true, ..s },
        "U" => AbstractRpc { loaded: false, ..s },
        "L" => s,
        mv => {
            let robot = move_room(s.robot, mv);
            let pack = if s.loaded { robot } else { s.pack };
            AbstractRpc { robot, pack, loaded: s.loaded }
        }
    }
}

fn default_sigma() -> f64 {
    0.25
}
fn default_t_same() -> [f64; 2] {
    [5.0, 1.0]
}
fn default_t_diff() -> [f64; 2] {
    [1.0, 5.0]
}
fn default_w_empty() -> [f64; 2] {
    [1.0, 0.1]
}
fn default_w_shape() -> f64 {
    100.0
}
fn default_w_scale() -> f64 {
    0.01
}
fn default_robot() -> String {
    "A".into()
}
fn default_pack() -> String {
    "C".into()
}
fn default_cat() -> String {
    "F".into()
}

/// Initial layout, sensor model and event schedule of an [`RpcFlat`] world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpcFlatConfig {
    #[serde(default = "default_robot")]
    pub robot: String,
    #[serde(default = "default_pack")]
    pub pack: String,
    #[serde(default = "default_cat")]
    pub cat: String,
    #[serde(default)]
    pub seed: u64,
    /// Standard deviation of the position sensors.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Beta parameters of the tag sensor when robot and pack share a room.
    #[serde(default = "default_t_same")]
    pub t_same: [f64; 2],
    #[serde(default = "default_t_diff")]
    pub t_diff: [f64; 2],
    /// Gamma (shape, scale) of the weight sensor when nothing is carried.
    #[serde(default = "default_w_empty")]
    pub w_empty: [f64; 2],
    /// With `n >= 1` carried objects the weight is Gamma(n * w_shape, w_scale).
    #[serde(default = "default_w_shape")]
    pub w_shape: f64,
    #[serde(default = "default_w_scale")]
    pub w_scale: f64,
    /// Per-step probability that a cat sitting in a room wanders to a neighbour.
    #[serde(default)]
    pub cat_wander: f64,
    #[serde(default)]
    pub events: Vec<ScheduledEvent>,
}

impl Default for RpcFlatConfig {
    fn default() -> Self {
        Self {
            robot: default_robot(),
            pack: default_pack(),
            cat: default_cat(),
            seed: 0,
            sigma: default_sigma(),
            t_same: default_t_same(),
            t_diff: default_t_diff(),
            w_empty: default_w_empty(),
            w_shape: default_w_shape(),
            w_scale: default_w_scale(),
            cat_wander: 0.0,
            events: Vec::new(),
        }
    }
}

impl RpcFlatConfig {
    /// Every problem with the configuration, prefixed by `prefix`.
    pub fn problems(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (field, name) in [("robot", &self.robot), ("pack", &self.pack), ("cat", &self.cat)] {
            if room_index(name).is_none() {
                out.push(format!("{prefix}{field}: unknown room `{name}` (expected A..F)"));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            out.push(format!("{prefix}sigma: must be positive"));
        }
        for (field, [a, b]) in [("t_same", self.t_same), ("t_diff", self.t_diff), ("w_empty", self.w_empty)] {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                out.push(format!("{prefix}{field}: parameters must be positive"));
            }
        }
        if !(self.w_shape > 0.0 && self.w_scale > 0.0) {
            out.push(format!("{prefix}w_shape/w_scale: must be positive"));
        }
        if !(0.0..=1.0).contains(&self.cat_wander) {
            out.push(format!("{prefix}cat_wander: must lie in [0, 1]"));
        }
        if self.events.iter().any(|e| e.at_step == 0) {
            out.push(format!("{prefix}events: steps are numbered from 1"));
        }
        out
    }
}

pub struct RpcFlat {
    config: RpcFlatConfig,
    state: RpcFlatState,
    events: Vec<ScheduledEvent>,
    step: usize,
    rng: ChaCha8Rng,
}

pub const RPC_ACTIONS: [&str; 6] = ["N", "S", "E", "W", "L", "U"];

impl RpcFlat {
    pub fn new(config: RpcFlatConfig) -> Result<Self> {
        let problems = config.problems("");
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let state = Self::initial(&config);
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let events = config.events.clone();
        Ok(Self {
            config,
            state,
            events,
            step: 0,
            rng,
        })
    }

    fn initial(config: &RpcFlatConfig) -> RpcFlatState {
        let robot = room_index(&config.robot).expect("validated");
        RpcFlatState {
            robot,
            pack: PackPos::Room(room_index(&config.pack).expect("validated")),
            cat: CatPos::Room(room_index(&config.cat).expect("validated")),
            position: room_center(robot),
        }
    }

    pub fn state(&self) -> &RpcFlatState {
        &self.state
    }

    /// Test-only view of the true abstract state.
    pub fn ground_truth(&self) -> AbstractRpc {
        self.state.abstraction()
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    fn apply_event(&mut self, kind: EventKind, start_room: u8) {
        let st = &mut self.state;
        match kind {
            EventKind::CatRandomMove => {
                if let CatPos::Room(r) = st.cat {
                    let options: Vec<u8> = ["N", "S", "E", "W"]
                        .iter()
                        .map(|a| move_room(r, a))
                        .filter(|&n| n != r)
                        .collect();
                    st.cat = CatPos::Room(options[self.rng.random_range(0..options.len())]);
                }
            }
            EventKind::CatJumpOnRobot => st.cat = CatPos::OnRobot,
            EventKind::CatJumpOnPack => st.cat = CatPos::OnPack,
            EventKind::CatDismount => {
                st.cat = match st.cat {
                    CatPos::OnRobot => CatPos::Room(st.robot),
                    CatPos::OnPack => CatPos::Room(st.pack_room()),
                    c => c,
                }
            }
            EventKind::PackDrop => {
                if st.pack == PackPos::Carried {
                    st.pack = PackPos::Room(start_room);
                }
            }
        }
    }

    fn sample(&mut self) -> Result<Observation> {
        let c = &self.config;
        let st = &self.state;
        let (cx, cy) = room_center(st.robot);
        let env_err = |e: &dyn std::fmt::Display| Error::Environment(e.to_string());
        let normal_x = Normal::new(cx, c.sigma).map_err(|e| env_err(&e))?;
        let normal_y = Normal::new(cy, c.sigma).map_err(|e| env_err(&e))?;
        let [ta, tb] = if st.pack == PackPos::Carried || st.pack_room() == st.robot {
            c.t_same
        } else {
            c.t_diff
        };
        let beta = Beta::new(ta, tb).map_err(|e| env_err(&e))?;
        let n = st.carried_objects();
        let (k, theta) = if n == 0 {
            (c.w_empty[0], c.w_empty[1])
        } else {
            (c.w_shape * n as f64, c.w_scale)
        };
        let gamma = Gamma::new(k, theta).map_err(|e| env_err(&e))?;
        let x = normal_x.sample(&mut self.rng);
        let y = normal_y.sample(&mut self.rng);
        let t: f64 = beta.sample(&mut self.rng);
        let w: f64 = gamma.sample(&mut self.rng);
        self.state.position = (x, y);
        Ok(vec![x, y, t, w])
    }
}

impl Environment for RpcFlat {
    fn actions(&self) -> Vec<String> {
        RPC_ACTIONS.iter().map(|a| a.to_string()).collect()
    }

    fn act(&mut self, action: &str) -> Result<Observation> {
        if !RPC_ACTIONS.contains(&action) {
            return Err(Error::Environment(format!("unknown action `{action}`")));
        }
        self.step += 1;
        let start = self.state.robot;
        let st = &mut self.state;
        match action {
            "L" => {
                if st.pack == PackPos::Room(st.robot) {
                    st.pack = PackPos::Carried;
                }
            }
            "U" => {
                if st.pack == PackPos::Carried {
                    st.pack = PackPos::Room(st.robot);
                }
            }
            mv => st.robot = move_room(st.robot, mv),
        }
        let due: Vec<EventKind> = self
            .events
            .iter()
            .filter(|e| e.at_step == self.step)
            .map(|e| e.kind)
            .collect();
        for kind in due {
            self.apply_event(kind, start);
        }
        if self.config.cat_wander > 0.0 && self.rng.random_bool(self.config.cat_wander) {
            self.apply_event(EventKind::CatRandomMove, start);
        }
        self.sample()
    }

    fn reset(&mut self, seed: u64) {
        self.state = Self::initial(&self.config);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.step = 0;
    }

    fn script(&mut self, events: Vec<ScheduledEvent>) {
        self.events = events;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_adjacency() {
        let idx = |n| room_index(n).unwrap();
        assert_eq!(move_room(idx("A"), "E"), idx("B"));
        assert_eq!(move_room(idx("A"), "N"), idx("D"));
        assert_eq!(move_room(idx("A"), "W"), idx("A"));
        assert_eq!(move_room(idx("A"), "S"), idx("A"));
        assert_eq!(move_room(idx("C"), "E"), idx("C"));
        assert_eq!(move_room(idx("F"), "S"), idx("C"));
        assert_eq!(move_room(idx("E"), "N"), idx("E"));
    }

    #[test]
    fn walking_east_reaches_pack() {
        let mut env = RpcFlat::new(RpcFlatConfig { sigma: 0.01, ..Default::default() }).unwrap();
        let x = env.act("E").unwrap();
        assert!((x[0] - 1.5).abs() < 0.05 && (x[1] - 0.5).abs() < 0.05);
        env.act("E").unwrap();
        env.act("L").unwrap();
        assert_eq!(env.state().pack, PackPos::Carried);
        env.act("N").unwrap();
        assert_eq!(env.ground_truth(), AbstractRpc { robot: 5, pack: 5, loaded: true });
    }

    #[test]
    fn scripted_cat_and_drop() {
        let mut env = RpcFlat::new(RpcFlatConfig::default()).unwrap();
        env.script(vec![
            ScheduledEvent { at_step: 4, kind: EventKind::PackDrop },
            ScheduledEvent { at_step: 4, kind: EventKind::CatJumpOnRobot },
        ]);
        for a in ["E", "E", "L", "W"] {
            env.act(a).unwrap();
        }
        let st = env.state();
        assert_eq!(st.robot, 1);
        assert_eq!(st.pack, PackPos::Room(2));
        assert_eq!(st.carried_objects(), 1);
    }

    #[test]
    fn reset_reproduces_observations() {
        let mut env = RpcFlat::new(RpcFlatConfig::default()).unwrap();
        let a: Vec<_> = ["E", "N", "W"].iter().map(|x| env.act(x).unwrap()).collect();
        env.reset(0);
        let b: Vec<_> = ["E", "N", "W"].iter().map(|x| env.act(x).unwrap()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_config_lists_every_problem() {
        let cfg = RpcFlatConfig { robot: "Q".into(), sigma: -1.0, ..Default::default() };
        let Err(Error::Config(problems)) = RpcFlat::new(cfg) else { panic!() };
        assert_eq!(problems.len(), 2);
    }
}
