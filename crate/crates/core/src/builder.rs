//! Stepwise and greedy-lookahead construction of nested maximum-entropy
//! models over invariant, ordinary or mixed term pools.
//!
//! A path starts from `A_0 = {0}` (the uniform model) and adds one term per
//! step. Stepwise paths add the ≺-least index after the current ones that
//! is linearly independent of the span. Greedy paths examine the thinnest
//! independent shell holding at least `r` candidates, fit every candidate
//! model and keep the one closest to the target in KL divergence.
//!
//! Independence is decided exactly, over a prime field, from the rational
//! feature values.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::GroupAction;
use crate::distribution::Distribution;
use crate::features::{orbit_signature, FeatureError, FeaturePool, FeatureVector, PoolTag, Term};
use crate::generators::GeneratorSet;
use crate::maxent::{solve_maxent_warm, ConstraintSet, MaxEntModel, SolveError, SolverOptions};
use crate::order::{CandidatePolicy, MonomialOrder, MultiIndex, OrderError};
use crate::span::{vector_mod, ModularSpan};

/// KL divergence at or below which a path counts as an exact recovery.
pub const EXACT_RECOVERY_KL: f64 = 1e-9;

/// Slack for score ties and for monotonicity checks along a path.
pub const TIE_TOL: f64 = 1e-12;

/// Depth beyond which the shell search gives up.
const MAX_DEPTH: u128 = 1 << 24;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid builder configuration: {0}")]
    Config(String),
    #[error("requested {requested} independent candidates but only {available} remain")]
    InsufficientRank { requested: usize, available: usize },
    #[error("target has {got} cells, space has {expected}")]
    TargetShape { expected: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PoolChoice {
    Invariant,
    Ordinary,
    Mixed,
}

impl PoolChoice {
    pub fn tags(self) -> &'static [PoolTag] {
        match self {
            PoolChoice::Invariant => &[PoolTag::Invariant],
            PoolChoice::Ordinary => &[PoolTag::Ordinary],
            PoolChoice::Mixed => &[PoolTag::Invariant, PoolTag::Ordinary],
        }
    }

    /// The pool supplying the constant term.
    fn constant_pool(self) -> PoolTag {
        match self {
            PoolChoice::Ordinary => PoolTag::Ordinary,
            _ => PoolTag::Invariant,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuilderConfig {
    pub pool: PoolChoice,
    /// Lookahead `r`: minimum number of independent candidates per step.
    pub lookahead: usize,
    /// Candidates fitted per step, drawn without replacement from the shell.
    pub sample_size: Option<usize>,
    /// Lookahead for the ordinary half of a mixed pool (defaults to
    /// `lookahead`).
    pub ordinary_lookahead: Option<usize>,
    /// Sample size for the ordinary half of a mixed pool (defaults to
    /// `sample_size`).
    pub ordinary_sample_size: Option<usize>,
    pub rng_seed: u64,
    /// Maximum number of non-constant terms; defaults to `M - 1` for the
    /// invariant pool and `K - 1` otherwise.
    pub max_terms: Option<usize>,
    pub kl_stop: f64,
    pub candidate_policy: CandidatePolicy,
    pub solver: SolverOptions,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        Self {
            pool: PoolChoice::Invariant,
            lookahead: 1,
            sample_size: None,
            ordinary_lookahead: None,
            ordinary_sample_size: None,
            rng_seed: 0,
            max_terms: None,
            kl_stop: EXACT_RECOVERY_KL,
            candidate_policy: CandidatePolicy::LiteralShell,
            solver: SolverOptions::default(),
        }
    }
}

impl BuilderConfig {
    pub fn validate(&self) -> Result<(), BuildError> {
        let check = |r: usize, s: Option<usize>, what: &str| -> Result<(), BuildError> {
            if r == 0 {
                return Err(BuildError::Config(format!("{what} lookahead must be positive")));
            }
            match s {
                Some(0) => Err(BuildError::Config(format!("{what} sample size must be positive"))),
                Some(s) if s > r => Err(BuildError::Config(format!(
                    "{what} sample size {s} exceeds lookahead {r}"
                ))),
                _ => Ok(()),
            }
        };
        check(self.lookahead, self.sample_size, "invariant")?;
        let (r, s) = self.lookahead_for(PoolTag::Ordinary);
        check(r, s, "ordinary")?;
        if self.kl_stop.is_nan() || self.kl_stop < 0.0 {
            return Err(BuildError::Config("kl_stop must be non-negative".into()));
        }
        Ok(())
    }

    fn lookahead_for(&self, tag: PoolTag) -> (usize, Option<usize>) {
        match (self.pool, tag) {
            (PoolChoice::Mixed, PoolTag::Ordinary) => (
                self.ordinary_lookahead.unwrap_or(self.lookahead),
                self.ordinary_sample_size.or(self.sample_size),
            ),
            _ => (self.lookahead, self.sample_size),
        }
    }
}

/// The term pools over one group action: monomials in the invariant
/// generators and monomials in the coordinates.
#[derive(Debug)]
pub struct TermSpace {
    action: GroupAction,
    invariant: FeaturePool,
    ordinary: FeaturePool,
    invariant_order: MonomialOrder,
    ordinary_order: MonomialOrder,
    /// Orbit indicator vectors, reduced modulo the span prime.
    indicators: Vec<Vec<u64>>,
}

impl TermSpace {
    /// Checks that `gens` are invariant and separate the orbits, so their
    /// monomials span every invariant function.
    pub fn new(action: GroupAction, gens: GeneratorSet) -> Result<Self, BuildError> {
        orbit_signature(&gens, &action)?;
        let space = action.space();
        let invariant_order = MonomialOrder::graded_lex(gens.len());
        let ordinary_order = MonomialOrder::graded_lex(space.dimension());
        let invariant = FeaturePool::new(PoolTag::Invariant, gens, space)?;
        let ordinary = FeaturePool::ordinary(space);
        let orbits = action.orbits();
        let indicators = (0..orbits.len())
            .map(|o| {
                (0..space.len())
                    .map(|k| u64::from(orbits.orbit_of(k) == o))
                    .collect()
            })
            .collect();
        Ok(Self {
            action,
            invariant,
            ordinary,
            invariant_order,
            ordinary_order,
            indicators,
        })
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn space_len(&self) -> usize {
        self.action.space().len()
    }

    pub fn num_orbits(&self) -> usize {
        self.action.orbits().len()
    }

    pub fn pool(&self, tag: PoolTag) -> &FeaturePool {
        match tag {
            PoolTag::Invariant => &self.invariant,
            PoolTag::Ordinary => &self.ordinary,
        }
    }

    pub fn order(&self, tag: PoolTag) -> &MonomialOrder {
        match tag {
            PoolTag::Invariant => &self.invariant_order,
            PoolTag::Ordinary => &self.ordinary_order,
        }
    }

    pub fn constant(&self, tag: PoolTag) -> Term {
        Term::new(tag, MultiIndex::zero(self.pool(tag).arity()))
    }

    pub fn column(&self, term: &Term) -> Result<Arc<FeatureVector>, BuildError> {
        Ok(self.pool(term.pool).eval(&term.index)?)
    }

    fn modular(&self, term: &Term) -> Result<Vec<u64>, BuildError> {
        Ok(vector_mod(&self.column(term)?.exact))
    }

    /// Exact span of the feature vectors of `terms` (always including the
    /// constant).
    pub fn span_of(&self, terms: &[Term]) -> Result<ModularSpan, BuildError> {
        let mut span = ModularSpan::new(self.space_len());
        span.push(&vec![1; self.space_len()]);
        for t in terms {
            span.push(&self.modular(t)?);
        }
        Ok(span)
    }

    /// How many more independent directions `tag` can contribute to `span`.
    pub fn remaining_rank(&self, span: &ModularSpan, tag: PoolTag) -> usize {
        match tag {
            PoolTag::Invariant => {
                span.joint_rank(self.indicators.iter().map(Vec::as_slice)) - span.dim()
            }
            PoolTag::Ordinary => self.space_len() - span.dim(),
        }
    }

    /// Ranks of the members of `terms` in `tag`'s order, with the constant.
    fn member_ranks(&self, terms: &[Term], tag: PoolTag) -> Result<Vec<u128>, BuildError> {
        let order = self.order(tag);
        let mut ranks = vec![0];
        for t in terms.iter().filter(|t| t.pool == tag) {
            ranks.push(order.rank(&t.index)?);
        }
        Ok(ranks)
    }

    /// Ranks at exactly distance `d` from `members` that enter the shell
    /// when its depth grows from `d - 1` to `d`.
    fn ring(members: &[u128], d: u128, policy: CandidatePolicy) -> Vec<u128> {
        let mut out: Vec<u128> = match policy {
            CandidatePolicy::LiteralShell => members
                .iter()
                .flat_map(|&r| {
                    let below = r.checked_sub(d);
                    below.into_iter().chain(r.checked_add(d))
                })
                .collect(),
            CandidatePolicy::SucceedingOnly => {
                let top = *members.iter().max().expect("members include the constant");
                if d == 0 {
                    Vec::new()
                } else {
                    vec![top + d]
                }
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    fn independent_in(
        &self,
        span: &ModularSpan,
        tag: PoolTag,
        members: &[u128],
        depth: u128,
        policy: CandidatePolicy,
    ) -> Result<Vec<Term>, BuildError> {
        let order = self.order(tag);
        let ranks = order.shell_ranks(
            &members.iter().map(|&r| order.unrank(r)).collect::<Vec<_>>(),
            depth,
            policy,
        )?;
        let mut out = Vec::new();
        for r in ranks {
            let t = Term::new(tag, order.unrank(r));
            if span.is_independent(&self.modular(&t)?) {
                out.push(t);
            }
        }
        Ok(out)
    }

    /// Members of the depth-`d` shell around `a` (restricted to `tag`'s
    /// terms, plus the constant) whose feature vectors are independent of
    /// those of `a`, sorted by ≺.
    pub fn independent_shell(
        &self,
        a: &[Term],
        depth: u128,
        tag: PoolTag,
        policy: CandidatePolicy,
    ) -> Result<Vec<Term>, BuildError> {
        let span = self.span_of(a)?;
        let members = self.member_ranks(a, tag)?;
        self.independent_in(&span, tag, &members, depth, policy)
    }

    fn min_depth_in(
        &self,
        span: &ModularSpan,
        tag: PoolTag,
        members: &[u128],
        r: usize,
        policy: CandidatePolicy,
    ) -> Result<u128, BuildError> {
        let available = self.remaining_rank(span, tag);
        if r > available {
            return Err(BuildError::InsufficientRank { requested: r, available });
        }
        let order = self.order(tag);
        let mut found = 0;
        let mut d = 0;
        while found < r {
            d += 1;
            if d > MAX_DEPTH {
                return Err(BuildError::InsufficientRank { requested: r, available: found });
            }
            for rank in Self::ring(members, d, policy) {
                if members.contains(&rank) {
                    continue;
                }
                let t = Term::new(tag, order.unrank(rank));
                if span.is_independent(&self.modular(&t)?) {
                    found += 1;
                }
            }
        }
        Ok(d)
    }

    /// Smallest depth whose independent shell around `a` has at least `r`
    /// members.
    pub fn min_depth(&self, a: &[Term], r: usize, tag: PoolTag, policy: CandidatePolicy) -> Result<u128, BuildError> {
        let span = self.span_of(a)?;
        let members = self.member_ranks(a, tag)?;
        self.min_depth_in(&span, tag, &members, r, policy)
    }

    /// The ≺-least index of `tag` after every current member that is
    /// independent of the span, with its rank distance from the largest.
    fn next_independent(
        &self,
        span: &ModularSpan,
        tag: PoolTag,
        members: &[u128],
    ) -> Result<Option<(Term, u128)>, BuildError> {
        if self.remaining_rank(span, tag) == 0 {
            return Ok(None);
        }
        let order = self.order(tag);
        let top = *members.iter().max().expect("members include the constant");
        for d in 1..=MAX_DEPTH {
            let t = Term::new(tag, order.unrank(top + d));
            if span.is_independent(&self.modular(&t)?) {
                return Ok(Some((t, d)));
            }
        }
        Ok(None)
    }

    /// Constraint set for `terms` with targets taken from `target`.
    pub fn constraints(&self, terms: &[Term], target: &Distribution) -> Result<ConstraintSet, BuildError> {
        let columns = terms
            .iter()
            .map(|t| Ok(self.column(t)?.values.clone()))
            .collect::<Result<Vec<_>, BuildError>>()?;
        Ok(ConstraintSet::from_target(terms.to_vec(), columns, target)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    ExactRecovery,
    HaltedByKl,
    HaltedByBudget,
    /// The solver met a target on the boundary of the moment polytope.
    Boundary,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathStep {
    pub l: usize,
    /// `α_l*`; `None` for the initial uniform model.
    pub added: Option<Term>,
    /// `D(P̂ ‖ P_l)`.
    pub kl: f64,
    /// `D(R*(P̂) ‖ P_l)`, tracked for invariant-pool paths.
    pub kl_symmetrized: Option<f64>,
    pub entropy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Shell depth the candidates were drawn from.
    pub depth: Option<u128>,
    /// Number of candidate models fitted for this step.
    pub candidates: usize,
    pub model: MaxEntModel,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelPath {
    pub pool: PoolChoice,
    pub steps: Vec<PathStep>,
    pub terminal: Terminal,
    pub note: Option<String>,
}

impl ModelPath {
    pub fn final_step(&self) -> &PathStep {
        self.steps.last().expect("a path holds at least the initial model")
    }

    /// `A_l` of the last step.
    pub fn terms(&self) -> &[Term] {
        &self.final_step().model.terms
    }

    /// Number of non-constant terms added.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.steps.len() == 1
    }

    pub fn kl_sequence(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.kl).collect()
    }

    pub fn entropy_sequence(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.entropy).collect()
    }

    /// `D_l` and `H_l` never increase by more than [`TIE_TOL`].
    pub fn is_monotone(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].kl <= w[0].kl + TIE_TOL && w[1].entropy <= w[0].entropy + TIE_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Stepwise,
    Greedy,
}

/// Adds the ≺-least independent index after the current ones at each step.
pub fn stepwise_build(space: &TermSpace, target: &Distribution, config: &BuilderConfig) -> Result<ModelPath, BuildError> {
    if config.pool == PoolChoice::Mixed {
        return Err(BuildError::Unsupported(
            "stepwise construction has no single order over a mixed pool".into(),
        ));
    }
    build(space, target, config, Mode::Stepwise)
}

/// Greedy-lookahead construction: at each step fit every candidate in the
/// thinnest independent shell with at least `r` members (or a seeded sample
/// of it) and keep the one minimizing `D(P̂ ‖ P_{A ∪ {α}})`.
pub fn greedy_build(space: &TermSpace, target: &Distribution, config: &BuilderConfig) -> Result<ModelPath, BuildError> {
    build(space, target, config, Mode::Greedy)
}

fn make_step(
    l: usize,
    added: Option<Term>,
    model: MaxEntModel,
    target: &Distribution,
    symmetrized: Option<&Distribution>,
    depth: Option<u128>,
    candidates: usize,
) -> PathStep {
    PathStep {
        l,
        added,
        kl: model.kl_from(target),
        kl_symmetrized: symmetrized.map(|s| model.kl_from(s)),
        entropy: model.entropy(),
        residual: model.residual_inf,
        iterations: model.iterations,
        depth,
        candidates,
        model,
    }
}

fn build(space: &TermSpace, target: &Distribution, config: &BuilderConfig, mode: Mode) -> Result<ModelPath, BuildError> {
    config.validate()?;
    if target.len() != space.space_len() {
        return Err(BuildError::TargetShape {
            expected: space.space_len(),
            got: target.len(),
        });
    }
    let symmetrized = match config.pool {
        PoolChoice::Invariant => Some(
            space
                .action()
                .symmetrize_distribution(target)
                .expect("length checked"),
        ),
        _ => None,
    };
    let max_terms = config.max_terms.unwrap_or(match config.pool {
        PoolChoice::Invariant => space.num_orbits() - 1,
        _ => space.space_len() - 1,
    });

    let mut terms = vec![space.constant(config.pool.constant_pool())];
    let mut span = space.span_of(&[])?;
    let cs = space.constraints(&terms, target)?;
    let (model, _) = solve_maxent_warm(&cs, &config.solver, None)?;
    let mut steps = vec![make_step(0, None, model, target, symmetrized.as_ref(), None, 0)];
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let finish = |steps: Vec<PathStep>, terminal: Terminal, note: Option<String>| ModelPath {
        pool: config.pool,
        steps,
        terminal,
        note,
    };

    loop {
        let last = steps.last().expect("nonempty");
        // for the invariant pool the path converges to R*(P̂), not P̂
        let gap = last.kl_symmetrized.unwrap_or(last.kl);
        if gap <= config.kl_stop {
            let terminal = if gap <= EXACT_RECOVERY_KL {
                Terminal::ExactRecovery
            } else {
                Terminal::HaltedByKl
            };
            return Ok(finish(steps, terminal, None));
        }
        if steps.len() > max_terms {
            return Ok(finish(steps, Terminal::HaltedByBudget, Some(format!("term budget {max_terms} reached"))));
        }

        let mut candidates: Vec<Term> = Vec::new();
        let mut depth = None;
        for &tag in config.pool.tags() {
            let members = space.member_ranks(&terms, tag)?;
            match mode {
                Mode::Stepwise => {
                    if let Some((t, d)) = space.next_independent(&span, tag, &members)? {
                        candidates.push(t);
                        depth = Some(d);
                    }
                }
                Mode::Greedy => {
                    let available = space.remaining_rank(&span, tag);
                    if available == 0 {
                        continue;
                    }
                    let (r, sample_size) = config.lookahead_for(tag);
                    let r = r.min(available);
                    let d = space.min_depth_in(&span, tag, &members, r, config.candidate_policy)?;
                    let shell = space.independent_in(&span, tag, &members, d, config.candidate_policy)?;
                    depth = Some(depth.map_or(d, |x: u128| x.max(d)));
                    match sample_size {
                        Some(s) if s < shell.len() => {
                            let mut picked = sample(&mut rng, shell.len(), s).into_vec();
                            picked.sort_unstable();
                            candidates.extend(picked.into_iter().map(|i| shell[i].clone()));
                        }
                        _ => candidates.extend(shell),
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Ok(finish(steps, Terminal::HaltedByBudget, Some("term pool exhausted".into())));
        }

        let warm = steps.last().expect("nonempty").model.coefficients().to_vec();
        let fits: Vec<Result<MaxEntModel, BuildError>> = candidates
            .par_iter()
            .map(|t| {
                let mut a = terms.clone();
                a.push(t.clone());
                let cs = space.constraints(&a, target)?;
                Ok(solve_maxent_warm(&cs, &config.solver, Some(&warm))?.0)
            })
            .collect();

        let mut best: Option<(f64, usize, MaxEntModel)> = None;
        let mut skipped = 0;
        for (i, fit) in fits.into_iter().enumerate() {
            let model = match fit {
                Ok(m) => m,
                Err(BuildError::Solve(SolveError::RankDeficient { .. })) => {
                    // exactly independent but numerically too close to the span
                    skipped += 1;
                    continue;
                }
                Err(BuildError::Solve(e @ SolveError::NotRealizable { .. })) => {
                    return Ok(finish(steps, Terminal::Boundary, Some(e.to_string())));
                }
                Err(e) => return Err(e),
            };
            let score = model.kl_from(target);
            // candidates are in pool order, then ≺ order, so the first of
            // a tie is the ≺-least
            let better = match &best {
                None => true,
                Some((b, _, _)) => score < *b - TIE_TOL,
            };
            if better {
                best = Some((score, i, model));
            }
        }
        let Some((_, i, model)) = best else {
            return Ok(finish(
                steps,
                Terminal::HaltedByBudget,
                Some(format!("all {skipped} candidates numerically dependent")),
            ));
        };
        let chosen = candidates[i].clone();
        span.push(&space.modular(&chosen)?);
        terms.push(chosen.clone());
        let l = steps.len();
        steps.push(make_step(
            l,
            Some(chosen),
            model,
            target,
            symmetrized.as_ref(),
            depth,
            candidates.len(),
        ));
    }
}

/// Outcome of checking an invariant-pool path against the halting theorem.
#[derive(Debug, Clone, Serialize)]
pub struct HaltingReport {
    pub terminal: Terminal,
    pub steps: usize,
    pub max_steps: usize,
    /// `‖P_l* − R*(P̂)‖_∞` for terminated paths.
    pub sup_error: Option<f64>,
    pub passed: bool,
    pub note: String,
}

/// Checks that a terminated invariant-pool path ends at `R*(target)`
/// within `1e-8` in sup norm after at most `M - 1` steps.
pub fn verify_halting(path: &ModelPath, action: &GroupAction, target: &Distribution) -> Result<HaltingReport, BuildError> {
    if path.pool != PoolChoice::Invariant {
        return Err(BuildError::Unsupported("halting is verified for invariant-pool paths".into()));
    }
    if target.len() != action.space().len() {
        return Err(BuildError::TargetShape {
            expected: action.space().len(),
            got: target.len(),
        });
    }
    let max_steps = action.orbits().len() - 1;
    let steps = path.len();
    let report = |sup_error, passed, note: &str| HaltingReport {
        terminal: path.terminal,
        steps,
        max_steps,
        sup_error,
        passed,
        note: note.to_string(),
    };
    match path.terminal {
        Terminal::ExactRecovery | Terminal::HaltedByKl => {
            let sym = action.symmetrize_distribution(target).expect("length checked");
            let err = path.final_step().model.density.sup_distance(&sym);
            let passed = err <= 1e-8 && steps <= max_steps;
            let note = if passed {
                "final density equals the symmetrized target"
            } else {
                "halting violation"
            };
            Ok(report(Some(err), passed, note))
        }
        Terminal::HaltedByBudget | Terminal::Boundary => Ok(report(None, true, "path did not terminate; nothing to verify")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::lattice::LatticeSpace;
    use crate::maxent::density_from_coefficients;

    fn micro_space(levels: usize) -> TermSpace {
        let action = GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(levels, 2).unwrap()).unwrap();
        TermSpace::new(action, GeneratorSet::microimage()).unwrap()
    }

    fn f(v: [u32; 5]) -> Term {
        Term::new(PoolTag::Invariant, MultiIndex(v.to_vec()))
    }

    #[test]
    fn first_shell_is_f1() {
        let s = micro_space(4);
        let a = [s.constant(PoolTag::Invariant)];
        assert!(s
            .independent_shell(&a, 0, PoolTag::Invariant, CandidatePolicy::LiteralShell)
            .unwrap()
            .is_empty());
        assert_eq!(
            s.independent_shell(&a, 1, PoolTag::Invariant, CandidatePolicy::LiteralShell).unwrap(),
            vec![f([1, 0, 0, 0, 0])]
        );
        assert_eq!(s.min_depth(&a, 1, PoolTag::Invariant, CandidatePolicy::LiteralShell).unwrap(), 1);
        assert_eq!(s.min_depth(&a, 0, PoolTag::Invariant, CandidatePolicy::LiteralShell).unwrap(), 0);
        assert_eq!(s.remaining_rank(&s.span_of(&a).unwrap(), PoolTag::Invariant), 30);
        assert_eq!(s.remaining_rank(&s.span_of(&a).unwrap(), PoolTag::Ordinary), 255);
    }

    #[test]
    fn min_depth_is_monotone_in_r() {
        let s = micro_space(4);
        let a = [f([0, 0, 1, 0, 0]), f([0, 1, 0, 0, 0])];
        let mut prev = 0;
        for r in 1..=10 {
            let d = s.min_depth(&a, r, PoolTag::Invariant, CandidatePolicy::LiteralShell).unwrap();
            assert!(d >= prev);
            prev = d;
        }
        assert!(matches!(
            s.min_depth(&a, 40, PoolTag::Invariant, CandidatePolicy::LiteralShell),
            Err(BuildError::InsufficientRank { requested: 40, available: 28 })
        ));
    }

    #[test]
    fn uniform_target_halts_immediately() {
        let s = micro_space(4);
        let path = greedy_build(&s, &Distribution::uniform(256), &BuilderConfig::default()).unwrap();
        assert_eq!(path.len(), 0);
        assert_eq!(path.terminal, Terminal::ExactRecovery);
    }

    #[test]
    fn greedy_finds_f3_in_one_step() {
        let s = micro_space(4);
        let f3 = s.column(&f([0, 0, 1, 0, 0])).unwrap();
        let target = density_from_coefficients(&[vec![1.0; 256], f3.values.clone()], &[0.3]);
        let config = BuilderConfig {
            lookahead: 5,
            ..Default::default()
        };
        let path = greedy_build(&s, &target, &config).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.steps[1].added, Some(f([0, 0, 1, 0, 0])));
        assert!(path.final_step().kl <= 1e-9);
        assert_eq!(path.terminal, Terminal::ExactRecovery);
    }

    #[test]
    fn mixed_stepwise_is_unsupported() {
        let s = micro_space(2);
        let config = BuilderConfig {
            pool: PoolChoice::Mixed,
            ..Default::default()
        };
        assert!(matches!(
            stepwise_build(&s, &Distribution::uniform(16), &config),
            Err(BuildError::Unsupported(_))
        ));
    }

    #[test]
    fn config_validation() {
        let bad = BuilderConfig {
            lookahead: 2,
            sample_size: Some(3),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let zero = BuilderConfig {
            lookahead: 0,
            ..Default::default()
        };
        assert!(zero.validate().is_err());
    }
}
