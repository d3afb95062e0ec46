//! Threshold-driven search over free protomatrix entries.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exit::{channel_threshold, ExitConfig};
use crate::protograph::{CodeError, JointCode, Orientation, TriangularLink};

/// Largest candidate count [`enumerate_search`] accepts.
pub const ENUMERATION_LIMIT: u128 = 100_000;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("invalid free cell {0}")]
    Cell(String),
    #[error("search space has {0} candidates, above the enumeration limit")]
    Explosion(u128),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Source,
    Channel,
    Link,
}

/// A searchable entry, 0-based within its block, with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeCell {
    pub block: Block,
    pub row: usize,
    pub col: usize,
    pub lo: u32,
    pub hi: u32,
}

/// How link cells relate to the triangular orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkRule {
    /// Keep the template's orientation; link cells must lie on its side.
    #[default]
    Fixed,
    /// Link cells may lie on either side; a candidate is lower or upper
    /// triangular depending on which side holds its non-zero entries, and
    /// infeasible if both do.
    Either,
}

#[derive(Debug, Clone)]
pub struct SearchSpace {
    template: JointCode,
    cells: Vec<FreeCell>,
    link_rule: LinkRule,
}

impl SearchSpace {
    /// With `punctured_only`, cells outside punctured columns are pinned to 0.
    pub fn new(
        template: JointCode,
        cells: Vec<FreeCell>,
        link_rule: LinkRule,
        punctured_only: bool,
    ) -> Result<Self, OptimizeError> {
        let l = template.layout();
        let max = template.max_entry();
        let mut out = Vec::with_capacity(cells.len());
        for mut cell in cells {
            let (rows, cols) = match cell.block {
                Block::Source => (l.m_s, l.n_s),
                Block::Channel => (l.m_c, l.n_c),
                Block::Link => (l.m_s, l.m_s),
            };
            let here = format!("{:?} ({}, {})", cell.block, cell.row + 1, cell.col + 1);
            if cell.row >= rows || cell.col >= cols {
                return Err(OptimizeError::Cell(format!("{here} outside the block")));
            }
            if cell.lo > cell.hi || cell.hi > max {
                return Err(OptimizeError::Cell(format!(
                    "{here} has bounds outside [0, {max}]"
                )));
            }
            if cell.block == Block::Link {
                if cell.row == cell.col {
                    return Err(OptimizeError::Cell(format!(
                        "{here} is on the link diagonal"
                    )));
                }
                let side_ok = template.link().orientation().allows(cell.row, cell.col);
                if link_rule == LinkRule::Fixed && !side_ok {
                    return Err(OptimizeError::Cell(format!(
                        "{here} is on the forbidden side of a {} link",
                        template.link().orientation()
                    )));
                }
            }
            if punctured_only {
                let joint_col = match cell.block {
                    Block::Source => cell.col,
                    Block::Channel => l.n_s + cell.col,
                    Block::Link => l.link_start() + cell.col,
                };
                if !template.is_punctured_joint_col(joint_col) {
                    cell.lo = 0;
                    cell.hi = 0;
                }
            }
            out.push(cell);
        }
        Ok(SearchSpace {
            template,
            cells: out,
            link_rule,
        })
    }

    pub fn template(&self) -> &JointCode {
        &self.template
    }

    pub fn cells(&self) -> &[FreeCell] {
        &self.cells
    }

    pub fn candidate_count(&self) -> u128 {
        self.cells
            .iter()
            .map(|c| (c.hi - c.lo + 1) as u128)
            .product()
    }

    /// The template's own values of the free cells, clamped to the bounds.
    pub fn template_assignment(&self) -> Vec<u32> {
        self.cells
            .iter()
            .map(|c| {
                let v = match c.block {
                    Block::Source => self.template.source().get(c.row, c.col),
                    Block::Channel => self.template.channel().get(c.row, c.col),
                    Block::Link => self.template.link().get(c.row, c.col),
                };
                v.clamp(c.lo, c.hi)
            })
            .collect()
    }

    /// True if `assignment` lies within every cell's bounds.
    pub fn within_bounds(&self, assignment: &[u32]) -> bool {
        assignment.len() == self.cells.len()
            && self
                .cells
                .iter()
                .zip(assignment)
                .all(|(c, &v)| c.lo <= v && v <= c.hi)
    }

    /// The code for `assignment`, or `None` when it is infeasible: invalid
    /// structure, an all-zero row or column, or a disconnected graph.
    pub fn build(&self, assignment: &[u32]) -> Option<JointCode> {
        if !self.within_bounds(assignment) {
            return None;
        }
        let mut source = self.template.source().clone();
        let mut channel = self.template.channel().clone();
        let mut t = self.template.link().matrix().clone();
        for (c, &v) in self.cells.iter().zip(assignment) {
            match c.block {
                Block::Source => source.set(c.row, c.col, v),
                Block::Channel => channel.set(c.row, c.col, v),
                Block::Link => t.set(c.row, c.col, v),
            }
        }
        let m = t.rows();
        let below = (0..m).any(|i| (0..i).any(|j| t.get(i, j) > 0));
        let above = (0..m).any(|i| (i + 1..m).any(|j| t.get(i, j) > 0));
        let orientation = match (self.link_rule, below, above) {
            (LinkRule::Fixed, _, _) => self.template.link().orientation(),
            (LinkRule::Either, true, true) => return None,
            (LinkRule::Either, true, false) => Orientation::Lower,
            (LinkRule::Either, false, true) => Orientation::Upper,
            (LinkRule::Either, false, false) => self.template.link().orientation(),
        };
        let link = TriangularLink::new(orientation, t, self.template.max_entry()).ok()?;
        let code = self
            .template
            .with_source(source)
            .ok()?
            .with_channel(channel)
            .ok()?
            .with_link(link)
            .ok()?;
        code.assemble_joint().is_connected().then_some(code)
    }

    fn all_assignments(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for c in &self.cells {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (c.lo..=c.hi).map(move |v| {
                        let mut a = prefix.clone();
                        a.push(v);
                        a
                    })
                })
                .collect();
        }
        out
    }
}

/// A feasible candidate and its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub assignment: Vec<u32>,
    pub threshold_db: f64,
}

fn fitness(space: &SearchSpace, assignment: &[u32], config: &ExitConfig) -> f64 {
    space
        .build(assignment)
        .and_then(|code| channel_threshold(&code, *config).ok())
        .map_or(f64::INFINITY, |r| r.threshold_db)
}

fn rank(a: &Evaluated, b: &Evaluated) -> std::cmp::Ordering {
    a.threshold_db
        .total_cmp(&b.threshold_db)
        .then_with(|| a.assignment.cmp(&b.assignment))
}

/// Thresholds of every feasible assignment, best first.
pub fn enumerate_search(
    space: &SearchSpace,
    config: &ExitConfig,
) -> Result<Vec<Evaluated>, OptimizeError> {
    let count = space.candidate_count();
    if count > ENUMERATION_LIMIT {
        return Err(OptimizeError::Explosion(count));
    }
    let mut out: Vec<Evaluated> = space
        .all_assignments()
        .into_par_iter()
        .map(|a| {
            let threshold_db = fitness(space, &a, config);
            Evaluated {
                assignment: a,
                threshold_db,
            }
        })
        .filter(|e| e.threshold_db.is_finite())
        .collect();
    out.sort_by(rank);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub population: usize,
    pub scale: f64,
    pub crossover: f64,
    pub generations: usize,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            population: 50,
            scale: 0.5,
            crossover: 0.9,
            generations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_threshold_db: f64,
    pub assignment: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub best: Evaluated,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationRecord>,
    /// Every assignment whose fitness was computed, in first-seen order.
    pub evaluated: Vec<Evaluated>,
}

/// Nearest integer with ties toward zero, clamped to `[lo, hi]`.
pub fn round_clamp(x: f64, lo: u32, hi: u32) -> u32 {
    let r = if (x - x.trunc()).abs() == 0.5 {
        x.trunc()
    } else {
        x.round()
    };
    r.clamp(lo as f64, hi as f64) as u32
}

struct Cache<'a> {
    space: &'a SearchSpace,
    config: ExitConfig,
    values: HashMap<Vec<u32>, f64>,
    order: Vec<Vec<u32>>,
}

impl Cache<'_> {
    /// Fitness of every assignment, computing missing ones in parallel.
    fn eval_all(&mut self, batch: &[Vec<u32>]) -> Vec<f64> {
        let mut missing: Vec<Vec<u32>> = Vec::new();
        for a in batch {
            if !self.values.contains_key(a) && !missing.contains(a) {
                missing.push(a.clone());
            }
        }
        let (space, config) = (self.space, self.config);
        let fresh: Vec<f64> = missing
            .par_iter()
            .map(|a| fitness(space, a, &config))
            .collect();
        for (a, f) in missing.into_iter().zip(fresh) {
            self.order.push(a.clone());
            self.values.insert(a, f);
        }
        batch.iter().map(|a| self.values[a]).collect()
    }
}

/// Classic rand/1/bin differential evolution on the continuous relaxation of
/// the free cells. The template is member 0 of the initial population, so the
/// result is never worse than the template.
pub fn de_optimize(
    space: &SearchSpace,
    params: DeParams,
    config: &ExitConfig,
    seed: u64,
) -> DeResult {
    let dim = space.cells().len();
    let np = params.population.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo: Vec<f64> = space.cells().iter().map(|c| c.lo as f64).collect();
    let hi: Vec<f64> = space.cells().iter().map(|c| c.hi as f64).collect();
    let discretize = |x: &[f64]| -> Vec<u32> {
        x.iter()
            .zip(space.cells())
            .map(|(&v, c)| round_clamp(v, c.lo, c.hi))
            .collect()
    };
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(np);
    pop.push(
        space
            .template_assignment()
            .iter()
            .map(|&v| v as f64)
            .collect(),
    );
    while pop.len() < np {
        pop.push((0..dim).map(|d| rng.gen_range(lo[d]..=hi[d])).collect());
    }
    let mut cache = Cache {
        space,
        config: *config,
        values: HashMap::new(),
        order: Vec::new(),
    };
    let mut keys: Vec<Vec<u32>> = pop.iter().map(|x| discretize(x)).collect();
    let mut fit = cache.eval_all(&keys);
    let best_of = |fit: &[f64], keys: &[Vec<u32>]| -> (f64, Vec<u32>) {
        let i = (0..fit.len())
            .min_by(|&a, &b| {
                fit[a]
                    .total_cmp(&fit[b])
                    .then_with(|| keys[a].cmp(&keys[b]))
            })
            .expect("non-empty population");
        (fit[i], keys[i].clone())
    };
    let mut history = Vec::with_capacity(params.generations + 1);
    let (f0, a0) = best_of(&fit, &keys);
    history.push(GenerationRecord {
        generation: 0,
        best_threshold_db: f0,
        assignment: a0,
    });
    for generation in 1..=params.generations {
        if dim == 0 {
            break;
        }
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let pick = |rng: &mut ChaCha8Rng, taken: &[usize]| loop {
                    let r = rng.gen_range(0..np);
                    if !taken.contains(&r) {
                        break r;
                    }
                };
                let r1 = pick(&mut rng, &[i]);
                let r2 = pick(&mut rng, &[i, r1]);
                let r3 = pick(&mut rng, &[i, r1, r2]);
                let jrand = rng.gen_range(0..dim);
                (0..dim)
                    .map(|d| {
                        if d == jrand || rng.gen::<f64>() < params.crossover {
                            let v = pop[r1][d] + params.scale * (pop[r2][d] - pop[r3][d]);
                            v.clamp(lo[d], hi[d])
                        } else {
                            pop[i][d]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_keys: Vec<Vec<u32>> = trials.iter().map(|x| discretize(x)).collect();
        let trial_fit = cache.eval_all(&trial_keys);
        for i in 0..np {
            if trial_fit[i] <= fit[i] {
                pop[i] = trials[i].clone();
                keys[i] = trial_keys[i].clone();
                fit[i] = trial_fit[i];
            }
        }
        let (f, a) = best_of(&fit, &keys);
        history.push(GenerationRecord {
            generation,
            best_threshold_db: f,
            assignment: a,
        });
    }
    let (f, a) = best_of(&fit, &keys);
    let evaluated = cache
        .order
        .iter()
        .map(|a| Evaluated {
            assignment: a.clone(),
            threshold_db: cache.values[a],
        })
        .collect();
    DeResult {
        best: Evaluated {
            assignment: a,
            threshold_db: f,
        },
        history,
        evaluated,
    }
}
