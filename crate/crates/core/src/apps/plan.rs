use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, Error, Result};
use crate::ground::builtins::{encode_state, Axis};
use crate::ground::{GroundExtras, Grid, GroundingConfig};
use crate::lang::{Program, Term};
use crate::meta::{builtin_interpreter, Interpreter};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    #[serde(default)]
    pub shape: String,
    #[serde(default)]
    pub color: String,
    pub x: u64,
    pub y: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridScene {
    pub width: u64,
    pub height: u64,
    pub objects: Vec<SceneObject>,
}

impl GridScene {
    pub fn new(width: u64, height: u64, objects: Vec<SceneObject>) -> Result<GridScene> {
        let s = GridScene { width, height, objects };
        s.check()?;
        Ok(s)
    }

    /// Objects from `[{id, shape, color, x, y}, ...]`, bare or wrapped as
    /// `{"objects": [...]}`.
    pub fn from_json(text: &str, width: u64, height: u64) -> Result<GridScene> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Form {
            Bare(Vec<SceneObject>),
            Wrapped { objects: Vec<SceneObject> },
        }
        let objects = match serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed scene: {e}")))? {
            Form::Bare(o) | Form::Wrapped { objects: o } => o,
        };
        GridScene::new(width, height, objects)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.objects).expect("scene serializes")
    }

    fn check(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for o in &self.objects {
            if !seen.insert(&o.id) {
                return Err(Error::Invalid(format!("duplicate object id {}", o.id)));
            }
            if !(1..=self.width).contains(&o.x) || !(1..=self.height).contains(&o.y) {
                return Err(Error::Invalid(format!("object {} at ({},{}) is outside the {}x{} grid", o.id, o.x, o.y, self.width, self.height)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    fn positions(&self) -> BTreeMap<&str, (u64, u64)> {
        self.objects.iter().map(|o| (o.id.as_str(), (o.x, o.y))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    MoveRight,
    MoveLeft,
    MoveUp,
    MoveDown,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::MoveRight => "move_right",
            Action::MoveLeft => "move_left",
            Action::MoveUp => "move_up",
            Action::MoveDown => "move_down",
        }
    }

    pub fn from_name(s: &str) -> Option<Action> {
        [Action::MoveRight, Action::MoveLeft, Action::MoveUp, Action::MoveDown].into_iter().find(|a| a.name() == s)
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Action::MoveRight => (1, 0),
            Action::MoveLeft => (-1, 0),
            Action::MoveUp => (0, 1),
            Action::MoveDown => (0, -1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectPlan {
    pub id: String,
    /// Horizontal moves then vertical moves, in execution order.
    pub actions: Vec<Action>,
    pub horizontal: Vec<Action>,
    pub vertical: Vec<Action>,
    /// Valuations of the two `planf` atoms used.
    pub valuation: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanResult {
    pub plans: Vec<ObjectPlan>,
    pub goal: GridScene,
    /// Scenes after each object's moves are applied in turn.
    pub states: Vec<GridScene>,
    pub valid: bool,
    /// Pairs of objects sharing a cell in the reached scene.
    pub collisions: Vec<(String, String)>,
}

/// Default per-axis move budget: the longest straight move the grid allows.
pub fn default_max_moves(width: u64, height: u64) -> usize {
    (width.max(height).saturating_sub(1)) as usize
}

/// Seeds `plan(S, S, G, [])` for each object and axis.
fn seeds(start: &GridScene, goal: &GridScene) -> Result<Vec<(Term, f64)>> {
    let mut out = Vec::new();
    for o in &start.objects {
        let g = goal.get(&o.id).ok_or_else(|| Error::Invalid(format!("object {} missing from the goal scene", o.id)))?;
        let id = Term::constant(&o.id);
        for (axis, from, to) in [(Axis::Hori, o.x, g.x), (Axis::Vert, o.y, g.y)] {
            let s = encode_state(axis, &id, from);
            out.push((Term::compound("plan", vec![s.clone(), s, encode_state(axis, &id, to), Term::nil()]), 1.0));
        }
    }
    if goal.objects.len() != start.objects.len() {
        return Err(Error::Invalid("start and goal scenes hold different objects".into()));
    }
    Ok(out)
}

/// Grounds the planner for one start/goal pair.
pub fn plan_engine(start: &GridScene, goal: &GridScene, max_moves: usize) -> Result<Engine> {
    let grid = Grid { width: start.width, height: start.height };
    let extras = GroundExtras { seeds: seeds(start, goal)?, grid: Some(grid), ..Default::default() };
    let coord_depth = start.width.max(start.height) as usize + 1;
    let cfg = GroundingConfig { meta_depth: coord_depth.max(max_moves), ..GroundingConfig::default() };
    Engine::new(builtin_interpreter(Interpreter::Planner), &Program::default(), &cfg, &extras)
}

/// Reads the best `planf(start, goal, Stack)` atom per object and axis:
/// highest valuation, then shortest stack.
pub fn plan(start: &GridScene, goal: &GridScene, max_moves: usize) -> Result<PlanResult> {
    start.check()?;
    goal.check()?;
    let engine = plan_engine(start, goal, max_moves)?;
    let v = engine.reason(&engine.identity_weights(), &engine.driver_config()).v;
    let mut plans = Vec::new();
    let mut missing = Vec::new();
    for o in &start.objects {
        let g = goal.get(&o.id).expect("checked by seeds");
        let id = Term::constant(&o.id);
        let mut per_axis = Vec::new();
        for (axis, from, to) in [(Axis::Hori, o.x, g.x), (Axis::Vert, o.y, g.y)] {
            let pat = Term::compound("planf", vec![encode_state(axis, &id, from), encode_state(axis, &id, to), Term::var("Stack")]);
            let best = engine
                .matches(&v, &pat)
                .into_iter()
                .filter_map(|(a, x)| decode_stack(&a.args()[2]).map(|s| (s, x)))
                .filter(|(s, x)| s.len() <= max_moves && *x >= 0.5)
                .min_by(|a, b| b.1.total_cmp(&a.1).then(a.0.len().cmp(&b.0.len())));
            match best {
                Some(b) => per_axis.push(b),
                None => {
                    missing.push(o.id.clone());
                    break;
                }
            }
        }
        if per_axis.len() == 2 {
            let (h, v) = (per_axis[0].clone(), per_axis[1].clone());
            let mut actions = h.0.clone();
            actions.extend(v.0.iter().copied());
            plans.push(ObjectPlan { id: o.id.clone(), actions, horizontal: h.0, vertical: v.0, valuation: (h.1, v.1) });
        }
    }
    if !missing.is_empty() {
        return Err(Error::NoPlan { objects: missing.join(","), max_moves });
    }
    let mut result = PlanResult { plans, goal: goal.clone(), states: Vec::new(), valid: false, collisions: Vec::new() };
    let (states, valid) = simulate(start, &result)?;
    result.collisions = collisions(states.last().unwrap_or(start));
    result.states = states;
    result.valid = valid;
    Ok(result)
}

/// Actions in execution order; the stack holds the latest move first.
fn decode_stack(t: &Term) -> Option<Vec<Action>> {
    let items = t.as_list()?;
    let mut out = items.iter().map(|a| a.functor().and_then(|f| Action::from_name(f.as_str()))).collect::<Option<Vec<_>>>()?;
    out.reverse();
    Some(out)
}

fn simulate(start: &GridScene, result: &PlanResult) -> Result<(Vec<GridScene>, bool)> {
    let mut cur = start.clone();
    let mut states = Vec::new();
    for p in &result.plans {
        let o = cur
            .objects
            .iter_mut()
            .find(|o| o.id == p.id)
            .ok_or_else(|| Error::Invalid(format!("plan mentions unknown object {}", p.id)))?;
        for a in &p.actions {
            let (dx, dy) = a.delta();
            let (nx, ny) = (o.x as i64 + dx, o.y as i64 + dy);
            if nx < 1 || ny < 1 || nx as u64 > start.width || ny as u64 > start.height {
                return Err(Error::Invalid(format!("{} moves {} out of bounds from ({},{})", a.name(), o.id, o.x, o.y)));
            }
            o.x = nx as u64;
            o.y = ny as u64;
        }
        states.push(cur.clone());
    }
    let reached = cur.positions() == result.goal.positions();
    Ok((states, reached))
}

/// Applies each object's actions with a direct coordinate simulation;
/// returns the reached scene and whether it equals the goal.
pub fn validate_plan(start: &GridScene, result: &PlanResult) -> Result<(GridScene, bool)> {
    let (states, ok) = simulate(start, result)?;
    Ok((states.last().cloned().unwrap_or_else(|| start.clone()), ok))
}

fn collisions(scene: &GridScene) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, a) in scene.objects.iter().enumerate() {
        for b in &scene.objects[i + 1..] {
            if (a.x, a.y) == (b.x, b.y) {
                out.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    out
}

const SHAPES: [&str; 3] = ["cube", "sphere", "cylinder"];
const COLORS: [&str; 4] = ["red", "blue", "green", "yellow"];

/// Start and goal scenes with `n` objects at distinct random cells.
pub fn random_scene_pair<R: Rng>(rng: &mut R, n: usize, width: u64, height: u64) -> (GridScene, GridScene) {
    let cells: Vec<(u64, u64)> = (1..=width).flat_map(|x| (1..=height).map(move |y| (x, y))).collect();
    let pick = |rng: &mut R| cells.choose_multiple(rng, n).copied().collect::<Vec<_>>();
    let (a, b) = (pick(rng), pick(rng));
    let mut start = Vec::new();
    let mut goal = Vec::new();
    for i in 0..n {
        let shape = SHAPES[rng.gen_range(0..SHAPES.len())].to_string();
        let color = COLORS[rng.gen_range(0..COLORS.len())].to_string();
        let id = format!("obj{i}");
        start.push(SceneObject { id: id.clone(), shape: shape.clone(), color: color.clone(), x: a[i].0, y: a[i].1 });
        goal.push(SceneObject { id, shape, color, x: b[i].0, y: b[i].1 });
    }
    (GridScene { width, height, objects: start }, GridScene { width, height, objects: goal })
}

/// Five objects moved onto the diagonal line of a 5x5 grid.
pub fn line_fixture() -> (GridScene, GridScene) {
    let obj = |i: usize, shape: &str, color: &str, x: u64, y: u64| SceneObject {
        id: format!("obj{i}"),
        shape: shape.into(),
        color: color.into(),
        x,
        y,
    };
    let start = vec![
        obj(0, "cube", "red", 1, 3),
        obj(1, "sphere", "blue", 4, 1),
        obj(2, "cylinder", "green", 5, 4),
        obj(3, "cube", "yellow", 3, 5),
        obj(4, "sphere", "red", 2, 1),
    ];
    let goal = vec![
        obj(0, "cube", "red", 1, 1),
        obj(1, "sphere", "blue", 2, 2),
        obj(2, "cylinder", "green", 3, 3),
        obj(3, "cube", "yellow", 4, 4),
        obj(4, "sphere", "red", 5, 5),
    ];
    (GridScene { width: 5, height: 5, objects: start }, GridScene { width: 5, height: 5, objects: goal })
}
