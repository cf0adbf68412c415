//! Seeded sweeps over (m, l) configurations.
//!
//! Each suite gets its own random stream derived from the run seed and the
//! suite identity, so results do not depend on scheduling. Suites run on
//! scoped threads and are collected in input order.

use std::collections::BTreeMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_anpo, check_composition, check_dilation_invariance, check_isoperimetric, check_p2, check_poincare, check_w2,
    check_zero_l, InequalityKind, InequalityReport, Orientation, Sampling,
};
use crate::error::{arg_err, Result};
use crate::symfunc::sampling::{random_psd, ConeSampler};
use crate::symfunc::{maclaurin_margin, monotonicity_margin, quotient_gradient};

/// Run parameters shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Random inputs per suite and configuration.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { samples: 100, seed: 0 }
    }
}

/// Standard (m, l) sweep for a dimension.
pub fn default_configs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for m in 2..=n.min(3) {
        for l in 0..m {
            v.push((m, l));
        }
    }
    v
}

fn rng_for(seed: u64, kind: InequalityKind, m: usize, l: usize) -> ChaCha8Rng {
    let tag = (kind as u64) << 16 | (m as u64) << 8 | l as u64;
    ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Extremals needed by a set of configurations, solved once.
pub struct Extremals<F> {
    map: BTreeMap<(usize, usize), F>,
}

impl<F> Extremals<F> {
    pub fn get(&self, m: usize, l: usize) -> Result<&F> {
        match self.map.get(&(m, l)) {
            Some(w) => Ok(w),
            None => arg_err(format!("extremal w_{{{m},{l}}} was not prepared")),
        }
    }
}

fn needed_pairs(configs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for &(m, l) in configs {
        pairs.push((m, l));
        pairs.push((m, 0));
        for p in l + 1..m {
            pairs.push((m, p));
            pairs.push((p, l));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

impl<F: Send> Extremals<F> {
    pub fn prepare<S>(space: &S, configs: &[(usize, usize)]) -> Result<Self>
    where
        S: Sampling<Function = F> + Sync,
    {
        let pairs = needed_pairs(configs);
        let solved: Vec<Result<F>> = thread::scope(|scope| {
            let handles: Vec<_> = pairs.iter().map(|&(m, l)| scope.spawn(move || space.extremal(m, l))).collect();
            handles.into_iter().map(|h| h.join().expect("extremal solve panicked")).collect()
        });
        let mut map = BTreeMap::new();
        for (pair, w) in pairs.into_iter().zip(solved) {
            map.insert(pair, w?);
        }
        Ok(Extremals { map })
    }
}

/// Whether `kind` has an instance at (m, l) in dimension `n`.
pub fn applies(kind: InequalityKind, n: usize, m: usize, l: usize) -> bool {
    match kind {
        InequalityKind::Composition => m >= l + 2,
        InequalityKind::ZeroL => l == 0,
        InequalityKind::P2 => m == n && l == 1,
        InequalityKind::W2 => l >= 1,
        InequalityKind::Maclaurin | InequalityKind::Monotonicity | InequalityKind::Ellipticity => false,
        _ => true,
    }
}

/// One suite at one configuration: the witness `u = w` followed by
/// `opts.samples` random inputs. Composition and `w2` involve no free input
/// and yield one report per intermediate order.
pub fn run_suite<S: Sampling>(
    space: &S,
    extremals: &Extremals<S::Function>,
    kind: InequalityKind,
    m: usize,
    l: usize,
    opts: &SuiteOptions,
) -> Result<Vec<InequalityReport>> {
    let w = extremals.get(m, l)?;
    let mut rng = rng_for(opts.seed, kind, m, l);
    let mut out = Vec::new();
    match kind {
        InequalityKind::Composition => {
            for p in l + 1..m {
                out.push(check_composition(space, w, extremals.get(m, p)?, extremals.get(p, l)?, m, p, l)?);
            }
        }
        InequalityKind::W2 => out.push(check_w2(space, w, extremals.get(m, 0)?, m, l)?),
        InequalityKind::Poincare | InequalityKind::Isoperimetric => {
            let check = if kind == InequalityKind::Poincare { check_poincare::<S> } else { check_isoperimetric::<S> };
            out.push(check(space, w, w, m, l)?);
            for _ in 0..opts.samples {
                let u = space.random_admissible(&mut rng, m)?;
                out.push(check(space, &u, w, m, l)?);
            }
        }
        InequalityKind::Anpo | InequalityKind::ZeroL | InequalityKind::P2 | InequalityKind::Dilation => {
            for i in 0..=opts.samples {
                let u = if i == 0 { w.clone() } else { space.random_smooth(&mut rng) };
                out.push(match kind {
                    InequalityKind::Anpo => check_anpo(space, &u, w, m, l)?,
                    InequalityKind::ZeroL => check_zero_l(space, &u, w, m)?,
                    InequalityKind::P2 => check_p2(space, &u, w)?,
                    _ => check_dilation_invariance(space, &u, w, m, l, if i % 2 == 0 { 4.0 } else { 0.5 })?,
                });
            }
        }
        _ => return arg_err(format!("{} is not a function-space suite", kind.name())),
    }
    for r in out.iter_mut().skip(1) {
        r.inputs = format!("{}; seed {}", r.inputs, opts.seed);
    }
    Ok(out)
}

/// All applicable `kinds` over all `configs`, in (kind, config) order.
pub fn run_suites<S>(
    space: &S,
    kinds: &[InequalityKind],
    configs: &[(usize, usize)],
    opts: &SuiteOptions,
) -> Result<Vec<InequalityReport>>
where
    S: Sampling + Sync,
    S::Function: Send + Sync,
{
    let n = space.dim();
    let extremals = Extremals::prepare(space, configs)?;
    let jobs: Vec<(InequalityKind, usize, usize)> = kinds
        .iter()
        .flat_map(|&k| configs.iter().map(move |&(m, l)| (k, m, l)))
        .filter(|&(k, m, l)| applies(k, n, m, l))
        .collect();
    let extremals = &extremals;
    let results: Vec<Result<Vec<InequalityReport>>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(k, m, l)| scope.spawn(move || run_suite(space, extremals, k, m, l, opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite panicked")).collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

// smallest of a stream of margins, as a single report with rhs = 0
fn aggregate(kind: InequalityKind, n: usize, m: usize, l: usize, margins: &[f64], tolerance: f64) -> InequalityReport {
    let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let mut r = InequalityReport::new(
        kind,
        m,
        Some(l),
        min,
        0.0,
        Orientation::LhsAtLeastRhs,
        tolerance,
        format!("n={n}; {} cone samples; minimum margin", margins.len()),
    );
    let fails = margins.iter().filter(|&&x| x < -tolerance).count();
    r.aux.insert("violations".into(), fails as f64);
    r
}

/// Matrix-level suite over `n = 2..=6`: Maclaurin (`1 <= l < m`),
/// monotonicity under PSD shifts and ellipticity of the quotient (`0 <= l < m`),
/// each on `opts.samples` cone samples per configuration.
pub fn maclaurin_suite(opts: &SuiteOptions) -> Result<Vec<InequalityReport>> {
    let mut configs = Vec::new();
    for n in 2..=6 {
        for m in 1..=n {
            for l in 0..m {
                configs.push((n, m, l));
            }
        }
    }
    let results: Vec<Result<Vec<InequalityReport>>> = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|&(n, m, l)| {
                scope.spawn(move || {
                    let mut rng = rng_for(opts.seed ^ (n as u64) << 32, InequalityKind::Maclaurin, m, l);
                    let mut sampler = ConeSampler::new(n, m);
                    let (mut mac, mut mono, mut ell) = (Vec::new(), Vec::new(), Vec::new());
                    for _ in 0..opts.samples {
                        let s = sampler.sample(&mut rng);
                        if l >= 1 {
                            mac.push(maclaurin_margin(&s, l, m)?);
                        }
                        let s0 = random_psd(&mut rng, n).scaled(rng.random_range(0.01..1.0));
                        mono.push(monotonicity_margin(&s, &s0, m, l)?);
                        let g = quotient_gradient(&s, m, l)?;
                        ell.push(g.eigenvalues().into_iter().fold(f64::INFINITY, f64::min));
                    }
                    let mut out = Vec::new();
                    if l >= 1 {
                        out.push(aggregate(InequalityKind::Maclaurin, n, m, l, &mac, 1e-10));
                    }
                    out.push(aggregate(InequalityKind::Monotonicity, n, m, l, &mono, 1e-10));
                    let mut e = aggregate(InequalityKind::Ellipticity, n, m, l, &ell, 0.0);
                    e.aux.insert("acceptance_rate".into(), sampler.acceptance_rate());
                    if !(e.margin > 0.0) {
                        e.verdict = super::Verdict::Fail;
                    }
                    out.push(e);
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("maclaurin suite panicked")).collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BallSpace;

    #[test]
    fn configs_and_pairs() {
        assert_eq!(default_configs(2), vec![(2, 0), (2, 1)]);
        assert_eq!(default_configs(3).len(), 5);
        assert_eq!(needed_pairs(&[(3, 0)]), vec![(1, 0), (2, 0), (3, 0), (3, 1), (3, 2)]);
    }

    #[test]
    fn small_sweep_is_deterministic_and_passes() {
        let space = BallSpace::new(3, 1.0, 65).unwrap();
        let opts = SuiteOptions { samples: 5, seed: 11 };
        let a = run_suites(&space, &InequalityKind::SPACE_CHECKS, &default_configs(3), &opts).unwrap();
        let b = run_suites(&space, &InequalityKind::SPACE_CHECKS, &default_configs(3), &opts).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn maclaurin_small() {
        let reps = maclaurin_suite(&SuiteOptions { samples: 50, seed: 3 }).unwrap();
        assert!(reps.iter().all(|r| r.passed()));
    }
}
