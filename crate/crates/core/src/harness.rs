//! Sampled verification of the stability bound and of each inequality it is
//! assembled from.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{compute_constants, Constant, StabilityConstants};
use crate::error::{Error, Result};
use crate::exec::{sample_rng, Execution};
use crate::group::MatrixGroupElement;
use crate::modular::ResidueTable;
use crate::padic::{serde_rational_vec, valuation_of, Prime, Rational, Valuation};
use crate::regular::{MatrixPoly, Ring};
use crate::reynolds::{
    check_star, check_star_star, coefficient_function, conjugated_coefficient, entry_functions, project_k,
    reynolds_identity_check, weight_decompose, CoeffModule, CoefficientMode, OmegaSet, RepSpec, RepTag, StarCheck,
    StarStarCheck, WeightDecomposition,
};
use crate::sampling::{
    random_dual_ball_element, random_group_element, random_integral_sl2, random_unit, random_vector,
    random_window_element,
};
use crate::seminorm::{theta_origin, ProjectedOrbitMap};
use crate::torus::TorusElement;
use crate::tree::{
    act, convex_hull, decompose_g, default_window, fixed_locus_window, fixed_point_in_hull, orbit, y_membership,
    CompactGroupSpec, LatticeClass, VertexSet,
};
use crate::ultranorm::DiagonalUltraNorm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaChoice {
    /// `diag(p^j, p^-j)` for `len` consecutive `j` around 0; `len` defaults to
    /// the dimension of the coefficient module.
    Centered { len: Option<usize> },
    /// `diag(p^j, p^-j)` for the listed `j`.
    Exponents(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub p: u64,
    pub rep: RepTag,
    pub omega: OmegaChoice,
    /// Radius of the window around `o`; defaults to one plus the tube radius.
    pub window_radius: Option<u64>,
    pub level_cap: u32,
    pub samples: usize,
    pub chain_samples: usize,
    pub seed: u64,
    /// Sampled group elements have entry valuations in `[-b, b]`.
    pub group_bound: i64,
    /// Sampled vectors have entry valuations in `[-b, b]`.
    pub vector_bound: i64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            p: 3,
            rep: RepTag::Standard,
            omega: OmegaChoice::Centered { len: None },
            window_radius: None,
            level_cap: 4,
            samples: 1000,
            chain_samples: 200,
            seed: 7,
            group_bound: 5,
            vector_bound: 3,
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<Prime> {
        let p = Prime::new(self.p)?;
        let positive = [
            ("samples", self.samples as i64),
            ("chain_samples", self.chain_samples as i64),
            ("level_cap", i64::from(self.level_cap)),
            ("group_bound", self.group_bound),
            ("vector_bound", self.vector_bound),
        ];
        for (name, x) in positive {
            if x <= 0 {
                return Err(Error::Parse(format!("{name} must be positive")));
            }
        }
        if let OmegaChoice::Exponents(e) = &self.omega {
            if e.is_empty() {
                return Err(Error::EmptyInput);
            }
        }
        Ok(p)
    }
}

/// Everything derived from a configuration before sampling.
#[derive(Clone, Debug)]
pub struct Setup {
    pub config: HarnessConfig,
    pub prime: Prime,
    pub rho: RepSpec,
    pub norm: DiagonalUltraNorm,
    pub module: CoeffModule,
    pub omega: OmegaSet,
    pub window: VertexSet,
    pub star: StarCheck,
    pub star_star: StarStarCheck,
    pub constants: StabilityConstants,
}

impl Setup {
    pub fn new(config: &HarnessConfig) -> Result<Self> {
        let p = config.validate()?;
        let rho = RepSpec::sl2(config.rep, p);
        let norm = DiagonalUltraNorm::sup(rho.dim(), p);
        let module = CoeffModule::torus(&rho);
        let omega = match &config.omega {
            OmegaChoice::Centered { len } => OmegaSet::centered(p, len.unwrap_or(module.dim()))?,
            OmegaChoice::Exponents(e) => OmegaSet::new(e.iter().map(|j| TorusElement::sl2_power(*j, p)).collect())?,
        };
        let star = check_star(&omega, &module)?;
        if !star.holds {
            return Err(Error::StarConditionFails {
                rank: star.rank,
                dim: star.dim,
            });
        }
        let star_star = check_star_star(&rho)?;
        let window = match config.window_radius {
            None => default_window(p)?,
            Some(r) => fixed_locus_window(&CompactGroupSpec::torus(p), r)?,
        };
        let constants = compute_constants(&rho, &omega, &norm, &window, config.level_cap)?;
        Ok(Setup {
            config: config.clone(),
            prime: p,
            rho,
            norm,
            module,
            omega,
            window,
            star,
            star_star,
            constants,
        })
    }

    fn draw_y(&self, rng: &mut ChaCha8Rng) -> Result<MatrixGroupElement> {
        random_window_element(rng, self.prime, self.config.group_bound, &self.window)
    }

    fn draw_v(&self, rng: &mut ChaCha8Rng) -> Vec<Rational> {
        random_vector(rng, self.prime, self.rho.dim(), self.config.vector_bound)
    }
}

/// `min_ω ‖ρ(g ω) v‖` in valuations: the valuation of `sup_ω ‖ρ(gω)v‖`.
pub fn orbit_sup(rho: &RepSpec, omega: &OmegaSet, norm: &DiagonalUltraNorm, g: &MatrixGroupElement, v: &[Rational]) -> Result<Valuation> {
    let mut best = Valuation::Infinite;
    for w in omega.to_group_elements() {
        let x = norm.eval(&rho.rho_matrix(&g.mul(&w)?)?.mul_vec(v)?)?;
        if x < best {
            best = x;
        }
    }
    Ok(best)
}

/// One comparison `|lhs| >= |rhs|` in valuations, with margin `rhs - lhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(with = "crate::padic::serde_option_rational")]
    pub margin: Option<Rational>,
}

impl Verdict {
    pub fn bound(lhs: &Valuation, rhs: &Valuation) -> Self {
        let margin = match (lhs, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Some(b - a),
            _ => None,
        };
        Verdict {
            holds: lhs <= rhs,
            margin,
        }
    }

    pub fn exact(holds: bool) -> Self {
        Verdict { holds, margin: None }
    }
}

/// `sup_ω ‖ρ(yω)v‖ >= ‖v‖/c` for one sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub lhs: Valuation,
    pub norm: Valuation,
    pub rhs: Valuation,
    pub holds: bool,
    #[serde(with = "crate::padic::serde_option_rational")]
    pub margin: Option<Rational>,
}

pub fn verify_inequality(
    rho: &RepSpec,
    omega: &OmegaSet,
    norm: &DiagonalUltraNorm,
    y: &MatrixGroupElement,
    v: &[Rational],
    c: &Constant,
) -> Result<InequalityRecord> {
    let lhs = orbit_sup(rho, omega, norm, y, v)?;
    let n = norm.eval(v)?;
    let rhs = n.plus_rational(c.exponent());
    let verdict = Verdict::bound(&lhs, &rhs);
    Ok(InequalityRecord {
        lhs,
        norm: n,
        rhs,
        holds: verdict.holds,
        margin: verdict.margin,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub y: MatrixGroupElement,
    #[serde(with = "serde_rational_vec")]
    pub v: Vec<Rational>,
    #[serde(flatten)]
    pub check: InequalityRecord,
}

impl SampleRecord {
    /// Exponent `e` of the smallest `c = p^e` the sample allows.
    pub fn required_exponent(&self) -> Option<Rational> {
        match (&self.check.lhs, &self.check.norm) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Some(a - b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub name: String,
    pub constant: Constant,
    pub violations: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: HarnessConfig,
    pub constants: StabilityConstants,
    pub star: StarCheck,
    pub star_star: StarStarCheck,
    pub samples: Vec<SampleRecord>,
    /// Violations with the safe constant.
    pub violations: usize,
    pub candidates: Vec<CandidateOutcome>,
    /// Largest `‖v‖ / sup_ω ‖ρ(yω)v‖` seen; `None` if every `v` was zero.
    pub empirical_optimal: Option<Constant>,
}

impl VerificationReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,lhs,norm,rhs,margin,holds\n");
        for r in &self.samples {
            let margin = r.check.margin.as_ref().map(crate::padic::format_rational).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.index, r.check.lhs, r.check.norm, r.check.rhs, margin, r.check.holds
            ));
        }
        s
    }
}

/// The largest `‖v‖ / sup_ω ‖ρ(yω)v‖` over the samples, as a constant.
pub fn empirical_optimal_c(samples: &[SampleRecord], p: Prime) -> Option<Constant> {
    samples
        .iter()
        .filter_map(SampleRecord::required_exponent)
        .max()
        .map(|e| Constant::new(e, p))
}

pub fn verify(setup: &Setup, exec: Execution) -> Result<VerificationReport> {
    let safe = &setup.constants.candidates.c_safe;
    let seed = setup.config.seed;
    let samples = exec
        .map(setup.config.samples, |i| -> Result<SampleRecord> {
            let mut rng = sample_rng(seed, i);
            let y = setup.draw_y(&mut rng)?;
            let v = setup.draw_v(&mut rng);
            let check = verify_inequality(&setup.rho, &setup.omega, &setup.norm, &y, &v, safe)?;
            Ok(SampleRecord { index: i, y, v, check })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let candidates = setup
        .constants
        .candidates
        .named()
        .into_iter()
        .map(|(name, c)| {
            let violations = samples
                .iter()
                .filter(|s| s.required_exponent().is_some_and(|e| &e > c.exponent()))
                .count();
            CandidateOutcome {
                name: name.to_string(),
                constant: c.clone(),
                violations,
                holds: violations == 0,
            }
        })
        .collect();
    Ok(VerificationReport {
        config: setup.config.clone(),
        constants: setup.constants.clone(),
        star: setup.star.clone(),
        star_star: setup.star_star.clone(),
        violations: samples.iter().filter(|s| !s.check.holds).count(),
        empirical_optimal: empirical_optimal_c(&samples, setup.prime),
        samples,
        candidates,
    })
}

/// Aggregate of one property sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub name: String,
    pub samples: usize,
    pub failures: usize,
    /// Smallest margin among bound checks.
    #[serde(with = "crate::padic::serde_option_rational")]
    pub worst_margin: Option<Rational>,
    pub first_failure: Option<usize>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn collect(name: &str, verdicts: Vec<Result<Verdict>>) -> Self {
        let mut failures = 0;
        let mut first = None;
        let mut worst: Option<Rational> = None;
        for (i, v) in verdicts.iter().enumerate() {
            let ok = match v {
                Ok(v) => {
                    if let Some(m) = &v.margin {
                        if worst.as_ref().is_none_or(|w| m < w) {
                            worst = Some(m.clone());
                        }
                    }
                    v.holds
                }
                Err(_) => false,
            };
            if !ok {
                failures += 1;
                first.get_or_insert(i);
            }
        }
        SweepOutcome {
            name: name.to_string(),
            samples: verdicts.len(),
            failures,
            worst_margin: worst,
            first_failure: first,
        }
    }
}

/// Shared data for the inequality chain sweeps.
pub struct ChainContext<'a> {
    pub setup: &'a Setup,
    map: ProjectedOrbitMap,
    weights: WeightDecomposition,
    generic: Vec<Vec<MatrixPoly>>,
    table: ResidueTable,
}

impl<'a> ChainContext<'a> {
    pub fn new(setup: &'a Setup) -> Result<Self> {
        let rho = &setup.rho;
        let table = ResidueTable::for_family(setup.prime, setup.constants.c3.level, &entry_functions(rho))?;
        Ok(ChainContext {
            setup,
            map: ProjectedOrbitMap::new(rho),
            weights: weight_decompose(rho),
            generic: rho.rho_generic(),
            table,
        })
    }

    fn exponent(&self, which: usize) -> &Rational {
        let c = &self.setup.constants;
        match which {
            1 => c.c1.constant.exponent(),
            2 => c.c2.constant.exponent(),
            3 => c.c3.constant.exponent(),
            _ => c.c4.constant.exponent(),
        }
    }

    /// `x ↦ Σ_{i,l} a_il ρ(x)_il`.
    fn combine(&self, a: impl Fn(usize, usize) -> Rational) -> MatrixPoly {
        let m = self.setup.rho.dim();
        let mut out = MatrixPoly::zero(2);
        for i in 0..m {
            for l in 0..m {
                let c = a(i, l);
                if !Zero::is_zero(&c) {
                    out = Ring::add(&out, &Ring::scale(&self.generic[i][l], &c));
                }
            }
        }
        out
    }

    /// `x ↦ φ(π_z(ρ(x y)) v)`.
    fn projected_function(&self, y: &MatrixGroupElement, v: &[Rational], phi: &[Rational]) -> Result<MatrixPoly> {
        let ry = self.setup.rho.rho_matrix(y)?;
        let m = self.setup.rho.dim();
        Ok(self.combine(|i, l| {
            let inner: Rational = (0..m)
                .filter(|&j| self.weights.in_centralizer(i, j))
                .map(|j| ry.get(l, j) * &v[j])
                .sum();
            &phi[i] * inner
        }))
    }

    fn point(&self, y: &MatrixGroupElement) -> Result<LatticeClass> {
        act(&y.inverse(), &LatticeClass::origin(self.setup.prime))
    }
}

type ChainCheck = fn(&ChainContext, &mut ChaCha8Rng) -> Result<Verdict>;

/// `sup_ω ‖ρ(gω)v‖ >= c2 sup_ω ‖ρ(ω^{-1} g ω)v‖`.
fn check_transport(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let g = random_group_element(rng, s.prime, s.config.group_bound);
    let v = s.draw_v(rng);
    let lhs = orbit_sup(&s.rho, &s.omega, &s.norm, &g, &v)?;
    let mut conj = Valuation::Infinite;
    for w in s.omega.to_group_elements() {
        let h = w.inverse().mul(&g)?.mul(&w)?;
        conj = conj.min(s.norm.eval(&s.rho.rho_matrix(&h)?.mul_vec(&v)?)?);
    }
    Ok(Verdict::bound(&lhs, &conj.plus_rational(&-cx.exponent(2).clone())))
}

/// `sup_ω |f(ω)| >= |π_k f| / c1` for `f` in the coefficient module.
fn check_invariant_projection(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let p = s.prime;
    let coords: Vec<Rational> = (0..s.module.dim())
        .map(|_| {
            if rng.gen_bool(0.2) {
                Rational::zero()
            } else {
                p.pow(rng.gen_range(-3..=3)) * Rational::from_integer(random_unit(rng, p).into())
            }
        })
        .collect();
    let f = s.module.element(&coords)?;
    let mut lhs = Valuation::Infinite;
    for w in s.omega.elements() {
        lhs = lhs.min(valuation_of(&f.eval(w)?, p));
    }
    let rhs = valuation_of(&project_k(&s.module, &f)?, p).plus_rational(cx.exponent(1));
    Ok(Verdict::bound(&lhs, &rhs))
}

fn draw_chain_sample(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<(MatrixGroupElement, Vec<Rational>, Vec<Rational>)> {
    let s = cx.setup;
    let y = s.draw_y(rng)?;
    let v = s.draw_v(rng);
    let phi = random_dual_ball_element(rng, &s.norm);
    Ok((y, v, phi))
}

/// `sup_ω |φ(ρ(ω^{-1} k y ω) v)| >= |π_k(ω ↦ φ(ρ(ω^{-1} k y ω) v))| / c1`,
/// evaluating the left side directly.
fn check_conjugated_coefficient(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let (y, v, phi) = draw_chain_sample(cx, rng)?;
    let ky = random_integral_sl2(rng, s.prime).mul(&y)?;
    let f = coefficient_function(&s.rho, &ky, &v, &phi, CoefficientMode::Conjugation)?;
    let mut lhs = Valuation::Infinite;
    for w in s.omega.elements() {
        lhs = lhs.min(valuation_of(&conjugated_coefficient(&s.rho, &ky, w, &v, &phi)?, s.prime));
    }
    let rhs = valuation_of(&project_k(&s.module, &f)?, s.prime).plus_rational(cx.exponent(1));
    Ok(Verdict::bound(&lhs, &rhs))
}

/// `π_k(ω ↦ φ(ρ(ω^{-1} k y ω) v)) = φ(π_z(ρ(k y)) v)`.
fn check_reynolds_identity(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let (y, v, phi) = draw_chain_sample(cx, rng)?;
    let ky = random_integral_sl2(rng, s.prime).mul(&y)?;
    Ok(Verdict::exact(reynolds_identity_check(&s.rho, &ky, &v, &phi)?))
}

/// `sup_{k ∈ G_o} |φ(π_z(ρ(k y)) v)| >= |φ|(π_z(θ(y^{-1} o)) v) / c3`.
fn check_compact_sup(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let (y, v, phi) = draw_chain_sample(cx, rng)?;
    let f = cx.projected_function(&y, &v, &phi)?;
    let low = cx.table.min_valuation(&f)?;
    if !low.exact {
        return Ok(Verdict::exact(false));
    }
    let rhs = cx.map.psi(&v, &phi, &cx.point(&y)?)?.plus_rational(cx.exponent(3));
    Ok(Verdict::bound(&low.valuation, &rhs))
}

/// The seminorm at `y^{-1} o` of `x ↦ φ(π_z(ρ(x^{-1})) v)` equals the Gauss
/// norm of `x ↦ φ(π_z(ρ(x y)) v)`.
fn check_seminorm_translate(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let (y, v, phi) = draw_chain_sample(cx, rng)?;
    let f = cx.projected_function(&y, &v, &phi)?;
    let direct = theta_origin(&f, cx.setup.prime)?;
    Ok(Verdict::exact(direct == cx.map.psi(&v, &phi, &cx.point(&y)?)?))
}

/// `sup_ω sup_φ sup_k |φ(ρ(ω^{-1} k y ω) v)| >= sup_φ |φ|(π_z(θ(y^{-1} o)) v) / (c1 c3)`.
fn check_combined_sup(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let (y, v, _) = draw_chain_sample(cx, rng)?;
    let m = s.rho.dim();
    let mut lhs = Valuation::Infinite;
    for w in s.omega.to_group_elements() {
        let u = s.rho.rho_matrix(&y.mul(&w)?)?.mul_vec(&v)?;
        let winv = s.rho.rho_matrix(&w.inverse())?;
        for phi in s.norm.dual_ball_generators() {
            let row = winv.vec_mul(&phi)?;
            let g = cx.combine(|i, l| &row[i] * &u[l]);
            let low = cx.table.min_valuation(&g)?;
            if !low.exact {
                return Ok(Verdict::exact(false));
            }
            lhs = lhs.min(low.valuation);
        }
    }
    debug_assert_eq!(m, v.len());
    let rhs = cx
        .map
        .psi_sup(&v, &cx.point(&y)?, &s.norm)?
        .plus_rational(&(cx.exponent(1) + cx.exponent(3)));
    Ok(Verdict::bound(&lhs, &rhs))
}

/// At a point of `Y^{-1} o`, the convex functions `p ↦ |φ|(π_z(θ(p)) v)` and
/// their sup over `B` are at least their minimum over the window.
fn check_window_convexity(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let (y, v, phi) = draw_chain_sample(cx, rng)?;
    let q = cx.point(&y)?;
    let mut top = Valuation::Finite(Rational::from_integer((-1_000_000).into()));
    let mut top_sup = top.clone();
    for g in &s.window {
        top = top.max(cx.map.psi(&v, &phi, g)?);
        top_sup = top_sup.max(cx.map.psi_sup(&v, g, &s.norm)?);
    }
    let single = Verdict::bound(&cx.map.psi(&v, &phi, &q)?, &top);
    let sup = Verdict::bound(&cx.map.psi_sup(&v, &q, &s.norm)?, &top_sup);
    Ok(Verdict {
        holds: single.holds && sup.holds,
        margin: sup.margin,
    })
}

/// `sup_φ |φ|(π_z(θ(y^{-1} o)) v) >= ‖v‖ / c4`.
fn check_window_bound(cx: &ChainContext, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let s = cx.setup;
    let (y, v, _) = draw_chain_sample(cx, rng)?;
    let lhs = cx.map.psi_sup(&v, &cx.point(&y)?, &s.norm)?;
    Ok(Verdict::bound(&lhs, &s.norm.eval(&v)?.plus_rational(cx.exponent(4))))
}

/// The chain sweeps, in the order the bound is assembled.
pub const CHAIN_CHECKS: [(&str, ChainCheck); 9] = [
    ("transport", check_transport),
    ("invariant_projection", check_invariant_projection),
    ("conjugated_coefficient", check_conjugated_coefficient),
    ("reynolds_identity", check_reynolds_identity),
    ("compact_sup", check_compact_sup),
    ("seminorm_translate", check_seminorm_translate),
    ("combined_sup", check_combined_sup),
    ("window_convexity", check_window_convexity),
    ("window_bound", check_window_bound),
];

/// Runs every chain check on its own stream of samples.
pub fn verify_chain(setup: &Setup, samples: usize, exec: Execution) -> Result<Vec<SweepOutcome>> {
    let cx = ChainContext::new(setup)?;
    Ok(CHAIN_CHECKS
        .iter()
        .enumerate()
        .map(|(k, (name, check))| {
            let seed = stream_seed(setup.config.seed, k as u64 + 1);
            let verdicts = exec.map(samples, |i| check(&cx, &mut sample_rng(seed, i)));
            SweepOutcome::collect(name, verdicts)
        })
        .collect())
}

/// A seed for an independent family of streams.
pub fn stream_seed(seed: u64, family: u64) -> u64 {
    seed ^ family.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// `g = y z` with `y ∈ Y` on random `g`.
pub fn decomposition_sweep(p: Prime, window: &VertexSet, bound: i64, samples: usize, seed: u64, exec: Execution) -> SweepOutcome {
    let h = CompactGroupSpec::torus(p);
    let verdicts = exec.map(samples, |i| {
        let g = random_group_element(&mut sample_rng(seed, i), p, bound);
        let d = decompose_g(&g, window)?;
        let member = y_membership(&d.y, window, &h)?.member;
        Ok(Verdict::exact(member && d.y.mul(&d.z)? == g))
    });
    SweepOutcome::collect("decomposition", verdicts)
}

/// A fixed point of `H_o` in the hull of the explicit orbit of `y^{-1} o`,
/// with congruence levels up to `level_cap`.
pub fn fixed_point_sweep(
    p: Prime,
    window: &VertexSet,
    bound: i64,
    level_cap: u32,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> SweepOutcome {
    let h = CompactGroupSpec::torus(p).with_level(level_cap);
    let verdicts = exec.map(samples, |i| {
        let y = random_window_element(&mut sample_rng(seed, i), p, bound, window)?;
        let q = act(&y.inverse(), &LatticeClass::origin(p))?;
        let hull = convex_hull(&orbit(&h, &q)?)?;
        fixed_point_in_hull(&h, &hull)?;
        Ok(Verdict::exact(true))
    });
    SweepOutcome::collect("fixed_point", verdicts)
}

/// The Reynolds identity on random `(y, v, φ)`.
pub fn reynolds_sweep(rho: &RepSpec, bound: i64, samples: usize, seed: u64, exec: Execution) -> SweepOutcome {
    let p = rho.prime();
    let norm = DiagonalUltraNorm::sup(rho.dim(), p);
    let verdicts = exec.map(samples, |i| {
        let mut rng = sample_rng(seed, i);
        let y = random_group_element(&mut rng, p, bound);
        let v = random_vector(&mut rng, p, rho.dim(), 3);
        let phi = random_dual_ball_element(&mut rng, &norm);
        Ok(Verdict::exact(reynolds_identity_check(rho, &y, &v, &phi)?))
    });
    SweepOutcome::collect(&format!("reynolds_{}", rho.tag()), verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rat;

    fn setup(p: u64, rep: RepTag, samples: usize) -> Setup {
        Setup::new(&HarnessConfig {
            p,
            rep,
            samples,
            ..HarnessConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_vector_holds_for_every_constant() {
        let s = setup(3, RepTag::Standard, 1);
        let y = MatrixGroupElement::identity(2, s.prime);
        let r = verify_inequality(&s.rho, &s.omega, &s.norm, &y, &[rat(0), rat(0)], &Constant::new(rat(-50), s.prime)).unwrap();
        assert!(r.holds);
        assert_eq!(r.margin, None);
    }

    #[test]
    fn identity_with_trivial_omega() {
        let s = setup(5, RepTag::Standard, 1);
        let omega = OmegaSet::new(vec![TorusElement::identity(1, s.prime)]).unwrap();
        let y = MatrixGroupElement::identity(2, s.prime);
        let r = verify_inequality(&s.rho, &omega, &s.norm, &y, &[rat(3), rat(7)], &Constant::one(s.prime)).unwrap();
        assert!(r.holds);
        assert_eq!(r.margin, Some(rat(0)));
    }

    #[test]
    fn reports_are_deterministic_across_modes() {
        let s = setup(3, RepTag::Standard, 40);
        let a = verify(&s, Execution::Sequential).unwrap();
        let b = verify(&s, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        let opt = a.empirical_optimal.clone().unwrap();
        assert!(opt.exponent() <= s.constants.candidates.c_safe.exponent());
        assert_eq!(a.to_csv().lines().count(), 41);
    }

    #[test]
    fn chain_checks_hold_on_a_small_sweep() {
        for (p, rep) in [(3, RepTag::Standard), (5, RepTag::Adjoint)] {
            let s = setup(p, rep, 1);
            for o in verify_chain(&s, 12, Execution::default()).unwrap() {
                assert!(o.passed(), "{} failed: {:?}", o.name, o);
            }
        }
    }

    #[test]
    fn optimum_is_invariant_under_rescaling() {
        let s = setup(3, RepTag::Adjoint, 30);
        let r = verify(&s, Execution::default()).unwrap();
        let scaled: Vec<SampleRecord> = r
            .samples
            .iter()
            .map(|x| {
                let v: Vec<Rational> = x.v.iter().map(|a| a * rat(9)).collect();
                let check = verify_inequality(&s.rho, &s.omega, &s.norm, &x.y, &v, &s.constants.candidates.c_safe).unwrap();
                SampleRecord { v, check, ..x.clone() }
            })
            .collect();
        assert_eq!(empirical_optimal_c(&scaled, s.prime), r.empirical_optimal);
    }

    #[test]
    fn config_round_trip() {
        let c = HarnessConfig {
            omega: OmegaChoice::Exponents(vec![-1, 0, 1]),
            ..HarnessConfig::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("exponents"));
        assert_eq!(serde_json::from_str::<HarnessConfig>(&text).unwrap(), c);
        assert!(HarnessConfig { samples: 0, ..HarnessConfig::default() }.validate().is_err());
    }
}
