//! Property sweeps over every layer, from Gauss norms on the torus up to the
//! stability bound, with one row per property and case.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::Constant;
use crate::error::Result;
use crate::exec::{sample_rng, Execution};
use crate::harness::{
    decomposition_sweep, fixed_point_sweep, reynolds_sweep, stream_seed, verify, verify_chain, CandidateOutcome,
    HarnessConfig, Setup, SweepOutcome,
};
use crate::padic::{rat, ratio, valuation_of, Prime, Rational, Valuation};
use crate::reynolds::{dot, RepSpec, RepTag};
use crate::sampling::{random_dual_ball_element, random_group_element, random_unit, random_vector};
use crate::torus::{translate_action, ApartmentPoint, Character, LaurentPolynomial, TorusElement};
use crate::tree::{act, default_window, distance, geodesic, LatticeClass};
use crate::ultranorm::DiagonalUltraNorm;

/// Group elements with entry valuations up to 5 put `y^{-1} o` up to 8 steps
/// from `o`, beyond the default congruence cap.
pub const FIXED_POINT_LEVEL: u32 = 8;

/// Sample counts for each sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelftestScale {
    pub primes: Vec<u64>,
    pub reps: Vec<RepTag>,
    pub laurent_pairs: usize,
    pub segments: usize,
    pub translations: usize,
    pub norm_vectors: usize,
    pub tree_pairs: usize,
    pub fixed_points: usize,
    pub reynolds: usize,
    pub decompositions: usize,
    pub bound_samples: usize,
    pub chain_samples: usize,
    pub seed: u64,
}

impl Default for SelftestScale {
    fn default() -> Self {
        SelftestScale {
            primes: vec![3, 5],
            reps: vec![RepTag::Standard, RepTag::Adjoint],
            laurent_pairs: 1000,
            segments: 500,
            translations: 500,
            norm_vectors: 500,
            tree_pairs: 500,
            fixed_points: 100,
            reynolds: 200,
            decompositions: 200,
            bound_samples: 1000,
            chain_samples: 200,
            seed: 2024,
        }
    }
}

impl SelftestScale {
    /// Every count divided by `k`, at least one sample each.
    pub fn reduced(&self, k: usize) -> Self {
        let d = |n: usize| (n / k).max(1);
        SelftestScale {
            laurent_pairs: d(self.laurent_pairs),
            segments: d(self.segments),
            translations: d(self.translations),
            norm_vectors: d(self.norm_vectors),
            tree_pairs: d(self.tree_pairs),
            fixed_points: d(self.fixed_points),
            reynolds: d(self.reynolds),
            decompositions: d(self.decompositions),
            bound_samples: d(self.bound_samples),
            chain_samples: d(self.chain_samples),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub property: String,
    pub case: String,
    pub checked: usize,
    pub failures: usize,
}

impl PropertyRow {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn from_sweep(property: &str, case: &str, s: &SweepOutcome) -> Self {
        PropertyRow {
            property: property.to_string(),
            case: case.to_string(),
            checked: s.samples,
            failures: s.failures,
        }
    }
}

/// Outcome of the sampled stability bound for one prime and representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub case: String,
    pub safe: Constant,
    pub violations: usize,
    pub candidates: Vec<CandidateOutcome>,
    pub empirical_optimal: Option<Constant>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub scale: SelftestScale,
    pub rows: Vec<PropertyRow>,
    pub bounds: Vec<BoundSummary>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(PropertyRow::passed)
    }

    /// Rows whose property name starts with `prefix`, merged.
    pub fn merged(&self, prefix: &str) -> Option<(usize, usize)> {
        let rows: Vec<&PropertyRow> = self.rows.iter().filter(|r| r.property.starts_with(prefix)).collect();
        (!rows.is_empty()).then(|| (rows.iter().map(|r| r.checked).sum(), rows.iter().map(|r| r.failures).sum()))
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("{:<36} {:<14} {:>8} {:>8}\n", "property", "case", "checked", "failures");
        for r in &self.rows {
            s.push_str(&format!(
                "{:<36} {:<14} {:>8} {:>8}  {}\n",
                r.property,
                r.case,
                r.checked,
                r.failures,
                if r.passed() { "ok" } else { "FAIL" }
            ));
        }
        s
    }
}

fn random_point(rng: &mut ChaCha8Rng, rank: usize) -> ApartmentPoint {
    ApartmentPoint((0..rank).map(|_| ratio(rng.gen_range(-8..=8), rng.gen_range(1..=4))).collect())
}

fn random_scalar(rng: &mut ChaCha8Rng, p: Prime) -> Rational {
    p.pow(rng.gen_range(-3..=3)) * rat(random_unit(rng, p))
}

/// A nonzero Laurent polynomial with up to four terms.
pub fn random_laurent(rng: &mut ChaCha8Rng, p: Prime, rank: usize) -> LaurentPolynomial {
    loop {
        let n = rng.gen_range(1..=4);
        let terms: Vec<(Character, Rational)> = (0..n)
            .map(|_| {
                let chi = Character((0..rank).map(|_| rng.gen_range(-3..=3)).collect());
                (chi, random_scalar(rng, p))
            })
            .collect();
        let f = LaurentPolynomial::from_terms(rank, p, terms).expect("rank matches");
        if !f.is_zero() {
            return f;
        }
    }
}

fn random_torus(rng: &mut ChaCha8Rng, p: Prime, rank: usize) -> TorusElement {
    TorusElement::from_free((0..rank).map(|_| random_scalar(rng, p)).collect(), p).expect("nonzero entries")
}

fn random_lattice(rng: &mut ChaCha8Rng, p: Prime) -> LatticeClass {
    let b = if rng.gen_bool(0.2) {
        Rational::zero()
    } else {
        p.pow(rng.gen_range(-6..=6)) * rat(random_unit(rng, p))
    };
    LatticeClass::new(rng.gen_range(-6..=6), b, p)
}

/// Distance through the disks `{x : v(x - b) >= a}` the vertices stand for.
pub fn disk_distance(l1: &LatticeClass, l2: &LatticeClass) -> u64 {
    let p = l1.prime();
    let meet = match valuation_of(&(l1.b() - l2.b()), p) {
        Valuation::Finite(v) => v.floor().to_integer().try_into().expect("small"),
        Valuation::Infinite => i64::MAX,
    };
    let m = l1.a().min(l2.a()).min(meet);
    (l1.a() - m + l2.a() - m) as u64
}

fn sweep(samples: usize, seed: u64, exec: Execution, check: impl Fn(&mut ChaCha8Rng) -> Result<bool> + Sync) -> (usize, usize) {
    let failures = exec
        .map(samples, |i| check(&mut sample_rng(seed, i)))
        .into_iter()
        .filter(|r| !matches!(r, Ok(true)))
        .count();
    (samples, failures)
}

fn gauss_axioms(rng: &mut ChaCha8Rng, p: Prime) -> Result<bool> {
    let rank = rng.gen_range(1..=2);
    let f = random_laurent(rng, p, rank);
    let g = random_laurent(rng, p, rank);
    let a = random_scalar(rng, p);
    let l = random_point(rng, rank);
    let (gf, gg) = (f.gauss_eval(&l)?, g.gauss_eval(&l)?);
    let mult = f.mul(&g)?.gauss_eval(&l)? == &gf + &gg;
    let homog = f.scale(&a).gauss_eval(&l)? == gf.plus_rational(&valuation_of(&a, p).expect_finite("unit"));
    let ultra = f.add(&g)?.gauss_eval(&l)? >= gf.clone().min(gg);
    Ok(mult && homog && ultra)
}

fn midpoint_convexity(rng: &mut ChaCha8Rng, p: Prime) -> Result<bool> {
    let rank = rng.gen_range(1..=2);
    let f = random_laurent(rng, p, rank);
    let (l0, l1) = (random_point(rng, rank), random_point(rng, rank));
    let at = |l: &ApartmentPoint| f.gauss_eval(l).map(|v| v.expect_finite("nonzero"));
    Ok(at(&l0.midpoint(&l1))? * rat(2) >= at(&l0)? + at(&l1)?)
}

fn translate_equivariance(rng: &mut ChaCha8Rng, p: Prime) -> Result<bool> {
    let rank = rng.gen_range(1..=2);
    let f = random_laurent(rng, p, rank);
    let mu = random_torus(rng, p, rank);
    let l = random_point(rng, rank);
    Ok(f.translate(&mu)?.gauss_eval(&l)? == f.gauss_eval(&translate_action(&l, &mu)?)?)
}

fn dual_ball(rng: &mut ChaCha8Rng, p: Prime) -> Result<bool> {
    let m = rng.gen_range(1..=4);
    let norm = DiagonalUltraNorm::new((0..m).map(|_| rat(rng.gen_range(-3..=3))).collect(), p)?;
    let v = random_vector(rng, p, m, 4);
    let sup = norm.dual_ball_sup_slice(&v)?;
    let attained = norm
        .dual_ball_generators()
        .iter()
        .map(|phi| valuation_of(&dot(phi, &v), p))
        .min()
        .unwrap_or(Valuation::Infinite);
    let phi = random_dual_ball_element(rng, &norm);
    let bounded = valuation_of(&dot(&phi, &v), p) >= sup;
    Ok(sup == norm.eval(&v)? && attained == sup && bounded)
}

fn tree_distance(rng: &mut ChaCha8Rng, p: Prime) -> Result<bool> {
    let (l1, l2) = (random_lattice(rng, p), random_lattice(rng, p));
    let d = distance(&l1, &l2)?;
    Ok(d == disk_distance(&l1, &l2) && geodesic(&l1, &l2)?.len() as u64 == d + 1)
}

fn tree_isometry(rng: &mut ChaCha8Rng, p: Prime) -> Result<bool> {
    let g = random_group_element(rng, p, 3);
    let (l1, l2) = (random_lattice(rng, p), random_lattice(rng, p));
    Ok(distance(&act(&g, &l1)?, &act(&g, &l2)?)? == distance(&l1, &l2)?)
}

type PointCheck = fn(&mut ChaCha8Rng, Prime) -> Result<bool>;

pub fn run_selftest(scale: &SelftestScale, exec: Execution) -> Result<SelftestReport> {
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    let mut family = 0u64;
    let mut next_seed = || {
        family += 1;
        stream_seed(scale.seed, family)
    };
    for &q in &scale.primes {
        let p = Prime::new(q)?;
        let case = format!("p={q}");
        let point_checks: [(&str, usize, PointCheck); 6] = [
            ("gauss_axioms", scale.laurent_pairs, gauss_axioms),
            ("midpoint_convexity", scale.segments, midpoint_convexity),
            ("translate_equivariance", scale.translations, translate_equivariance),
            ("dual_ball_sup", scale.norm_vectors, dual_ball),
            ("tree_distance", scale.tree_pairs, tree_distance),
            ("tree_isometry", scale.tree_pairs, tree_isometry),
        ];
        for (name, n, check) in point_checks {
            let (checked, failures) = sweep(n, next_seed(), exec, |rng| check(rng, p));
            rows.push(PropertyRow {
                property: name.to_string(),
                case: case.clone(),
                checked,
                failures,
            });
        }
        let window = default_window(p)?;
        let fixed = fixed_point_sweep(p, &window, 5, FIXED_POINT_LEVEL, scale.fixed_points, next_seed(), exec);
        rows.push(PropertyRow::from_sweep("fixed_point", &case, &fixed));
        let dec = decomposition_sweep(p, &window, 5, scale.decompositions, next_seed(), exec);
        rows.push(PropertyRow::from_sweep("decomposition", &case, &dec));
        for &rep in &scale.reps {
            let case = format!("p={q} {rep}");
            let rho = RepSpec::sl2(rep, p);
            let rey = reynolds_sweep(&rho, 5, scale.reynolds, next_seed(), exec);
            rows.push(PropertyRow::from_sweep("reynolds_identity", &case, &rey));
            let setup = Setup::new(&HarnessConfig {
                p: q,
                rep,
                samples: scale.bound_samples,
                chain_samples: scale.chain_samples,
                seed: next_seed(),
                ..HarnessConfig::default()
            })?;
            let report = verify(&setup, exec)?;
            rows.push(PropertyRow {
                property: "stability_bound".into(),
                case: case.clone(),
                checked: report.samples.len(),
                failures: report.violations,
            });
            bounds.push(BoundSummary {
                case: case.clone(),
                safe: setup.constants.candidates.c_safe.clone(),
                violations: report.violations,
                candidates: report.candidates,
                empirical_optimal: report.empirical_optimal,
            });
            for s in verify_chain(&setup, scale.chain_samples, exec)? {
                rows.push(PropertyRow::from_sweep(&format!("chain.{}", s.name), &case, &s));
            }
        }
    }
    Ok(SelftestReport {
        scale: scale.clone(),
        rows,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_distance_examples() {
        let p = Prime::new(3).unwrap();
        let o = LatticeClass::origin(p);
        assert_eq!(disk_distance(&o, &LatticeClass::apartment(4, p)), 4);
        assert_eq!(disk_distance(&o, &LatticeClass::apartment(-2, p)), 2);
        // disks around 0 and 1 of radius 3^-1 meet in Z_3
        assert_eq!(disk_distance(&LatticeClass::new(1, rat(0), p), &LatticeClass::new(1, rat(1), p)), 2);
        assert_eq!(disk_distance(&LatticeClass::new(2, rat(0), p), &LatticeClass::new(2, rat(9), p)), 0);
    }

    #[test]
    fn reduced_selftest_passes_and_is_mode_independent() {
        let scale = SelftestScale {
            primes: vec![3],
            ..SelftestScale::default().reduced(20)
        };
        let a = run_selftest(&scale, Execution::Sequential).unwrap();
        let b = run_selftest(&scale, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{}", a.to_table());
        assert_eq!(a.merged("chain.").unwrap().1, 0);
    }
}
