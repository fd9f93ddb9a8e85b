//! Translation-invariant ferromagnetic coupling families on `Z^d`.
//!
//! Every supported kernel depends on the `l1` distance only:
//! nearest-neighbor, `exp(-mu r)` and `r^-alpha`, combined with positive
//! weights. Infinite lattice sums (`|J|`, `E(p)`, ghost couplings) are
//! evaluated in closed form or through the Laplace representation
//! `r^-alpha = Gamma(alpha)^-1 int t^(alpha-1) e^(-r t) dt`, whose lattice
//! sum factorizes over coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel<T> {
    NearestNeighbor,
    Exponential { mu: T },
    PowerLaw { alpha: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term<T> {
    pub kernel: Kernel<T>,
    pub weight: T,
}

impl<T: Real> Term<T> {
    pub fn new(kernel: Kernel<T>, weight: T) -> Self {
        Self { kernel, weight }
    }

    /// Weighted kernel value at `l1` distance `r >= 1`.
    pub fn at_distance(&self, r: u64) -> T {
        debug_assert!(r >= 1);
        let rf = T::from_u64(r).unwrap();
        self.weight
            * match self.kernel {
                Kernel::NearestNeighbor => {
                    if r == 1 {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                Kernel::Exponential { mu } => (-mu * rf).exp(),
                Kernel::PowerLaw { alpha } => rf.powf(-alpha),
            }
    }
}

/// Coupling family `J(x,y) = sum_k w_k K_k(|x-y|_1)` plus a uniform field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel<T> {
    dimension: usize,
    terms: Vec<Term<T>>,
    field: T,
    reflection_positive: bool,
}

impl<T: Real> CouplingModel<T> {
    /// Builds a model and rejects it unless conditions C1-C4 all hold.
    pub fn new(dimension: usize, terms: Vec<Term<T>>, field: T) -> Result<Self> {
        let model = Self::new_unchecked(dimension, terms, field);
        let report = validate_model(&model);
        if let Some(bad) = report.checks.iter().find(|c| !c.passed) {
            return Err(Error::InvalidModel(format!(
                "{} fails: {}",
                bad.condition, bad.witness
            )));
        }
        Ok(model)
    }

    /// Builds a model without validation, e.g. to inspect a failing family.
    pub fn new_unchecked(dimension: usize, terms: Vec<Term<T>>, field: T) -> Self {
        Self {
            dimension,
            terms,
            field,
            reflection_positive: true,
        }
    }

    pub fn nearest_neighbor(dimension: usize) -> Self {
        Self::new_unchecked(
            dimension,
            vec![Term::new(Kernel::NearestNeighbor, T::one())],
            T::zero(),
        )
    }

    pub fn power_law(dimension: usize, alpha: T) -> Result<Self> {
        Self::new(
            dimension,
            vec![Term::new(Kernel::PowerLaw { alpha }, T::one())],
            T::zero(),
        )
    }

    pub fn exponential(dimension: usize, mu: T) -> Result<Self> {
        Self::new(
            dimension,
            vec![Term::new(Kernel::Exponential { mu }, T::one())],
            T::zero(),
        )
    }

    pub fn with_field(mut self, field: T) -> Self {
        self.field = field;
        self
    }

    /// Overrides the reflection-positivity metadata. Built-in kernels with
    /// positive weights belong to the reflection-positive family.
    pub fn with_reflection_positive(mut self, flag: bool) -> Self {
        self.reflection_positive = flag;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn field(&self) -> T {
        self.field
    }

    pub fn is_reflection_positive(&self) -> bool {
        self.reflection_positive && self.terms.iter().all(|t| t.weight > T::zero())
    }

    /// `Some(1)` when every term is nearest-neighbor, `None` for infinite range.
    pub fn interaction_range(&self) -> Option<u64> {
        if self
            .terms
            .iter()
            .all(|t| matches!(t.kernel, Kernel::NearestNeighbor))
        {
            Some(1)
        } else {
            None
        }
    }

    pub fn is_finite_range(&self) -> bool {
        self.interaction_range().is_some()
    }

    /// Coupling as a function of the `l1` distance.
    pub fn at_distance(&self, r: u64) -> T {
        self.terms.iter().map(|t| t.at_distance(r)).sum()
    }

    /// `J(x,y)`; self-coupling is not defined.
    pub fn coupling(&self, x: &[i64], y: &[i64]) -> Result<T> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        if x == y {
            return Err(Error::Domain("no self-coupling: x = y".into()));
        }
        Ok(self.at_distance(l1_distance(x, y)))
    }

    /// `|J| = sum_{x != 0} J(0,x)`; infinite when the family is not summable.
    pub fn total_coupling(&self) -> T {
        self.terms
            .iter()
            .map(|t| t.weight * kernel_total(t.kernel, self.dimension))
            .sum()
    }

    /// Momentum-space energy `E(p) = 2 sum_x sin^2(p.x/2) J(0,x)`.
    pub fn energy(&self, p: &[T]) -> T {
        assert_eq!(p.len(), self.dimension, "momentum dimension mismatch");
        self.terms
            .iter()
            .map(|t| t.weight * kernel_energy(t.kernel, p))
            .sum()
    }

    /// Ghost coupling `J(x, delta) = sum_{y outside [-L,L]^d} J(x,y)` for the box of half-width `half_width`.
    pub fn ghost_coupling_box(&self, half_width: usize, x: &[i64]) -> Result<T> {
        self.check_vector(x)?;
        let l = half_width as i64;
        if x.iter().any(|&c| c.abs() > l) {
            return Err(Error::Domain(format!("{x:?} outside the box of half-width {l}")));
        }
        let mut total = T::zero();
        for term in &self.terms {
            let part = match term.kernel {
                Kernel::NearestNeighbor => {
                    let outside = x.iter().filter(|&&c| c == l).count()
                        + x.iter().filter(|&&c| c == -l).count();
                    T::from_usize_lossy(outside)
                }
                Kernel::Exponential { mu } => exponential_outside_box(mu, l, x),
                Kernel::PowerLaw { alpha } => {
                    let inside = box_points(self.dimension, l)
                        .filter(|y| y.as_slice() != x)
                        .map(|y| T::from_u64(l1_distance(x, &y)).unwrap().powf(-alpha))
                        .sum::<T>();
                    (kernel_total(term.kernel, self.dimension) - inside).max(T::zero())
                }
            };
            total = total + term.weight * part;
        }
        Ok(total)
    }

    fn check_vector(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::Domain(format!(
                "vector of length {} in a {}-dimensional model",
                x.len(),
                self.dimension
            )));
        }
        Ok(())
    }
}

pub fn l1_distance(x: &[i64], y: &[i64]) -> u64 {
    x.iter().zip(y).map(|(a, b)| a.abs_diff(*b)).sum()
}

/// Points of `[-l, l]^d` in lexicographic order.
pub fn box_points(d: usize, l: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * l + 1) as usize;
    let count = side.pow(d as u32);
    (0..count).map(move |mut idx| {
        let mut v = vec![0i64; d];
        for c in v.iter_mut().rev() {
            *c = (idx % side) as i64 - l;
            idx /= side;
        }
        v
    })
}

fn kernel_total<T: Real>(kernel: Kernel<T>, d: usize) -> T {
    match kernel {
        Kernel::NearestNeighbor => T::from_usize_lossy(2 * d),
        Kernel::Exponential { mu } => {
            if mu <= T::zero() {
                return T::infinity();
            }
            let eps = T::lit(2.0) / mu.exp_m1();
            coth_power_minus_one(eps, d)
        }
        Kernel::PowerLaw { alpha } => {
            if alpha <= T::from_usize_lossy(d) {
                return T::infinity();
            }
            laplace_lattice_sum(alpha, d, T::one(), |t| {
                coth_power_minus_one(T::lit(2.0) / t.exp_m1(), d)
            })
        }
    }
}

/// `(1 + eps)^d - 1` summed by the binomial expansion.
fn coth_power_minus_one<T: Real>(eps: T, d: usize) -> T {
    let mut acc = T::zero();
    let mut binom = T::one();
    let mut pow = T::one();
    for k in 1..=d {
        binom = binom * T::from_usize_lossy(d + 1 - k) / T::from_usize_lossy(k);
        pow = pow * eps;
        acc = acc + binom * pow;
    }
    acc
}

/// `sum_x (1 - cos p.x) e^{-t |x|_1} = prod_i a_i - prod_i b_i` with
/// `a_i = coth(t/2)` and `b_i = sinh t / (cosh t - cos p_i)`, telescoped so that
/// every summand is nonnegative.
fn factorized_energy<T: Real>(t: T, p: &[T]) -> T {
    let half = T::lit(0.5);
    let a = T::one() / (half * t).tanh();
    let sh = (half * t).sinh();
    let sh2 = sh * sh;
    let mut b = Vec::with_capacity(p.len());
    let mut diff = Vec::with_capacity(p.len());
    for &pi in p {
        let s = (half * pi).sin();
        let r = if sh2.is_finite() { s * s / sh2 } else { T::zero() };
        b.push(a / (T::one() + r));
        diff.push(a * r / (T::one() + r));
    }
    let d = p.len();
    let mut total = T::zero();
    let mut prefix = T::one();
    for i in 0..d {
        let suffix = a.powi((d - 1 - i) as i32);
        total = total + prefix * diff[i] * suffix;
        prefix = prefix * b[i];
    }
    total
}

fn kernel_energy<T: Real>(kernel: Kernel<T>, p: &[T]) -> T {
    match kernel {
        Kernel::NearestNeighbor => {
            let four = T::lit(4.0);
            p.iter()
                .map(|&q| {
                    let s = (q * T::lit(0.5)).sin();
                    four * s * s
                })
                .sum()
        }
        Kernel::Exponential { mu } => factorized_energy(mu, p),
        Kernel::PowerLaw { alpha } => {
            if p.iter().all(|&q| q == T::zero()) {
                return T::zero();
            }
            let scale = p
                .iter()
                .filter(|q| **q != T::zero())
                .map(|q| q.abs())
                .fold(T::one(), |m, q| m.min(q));
            laplace_lattice_sum(alpha, p.len(), scale, |t| factorized_energy(t, p))
        }
    }
}

/// `Gamma(alpha)^-1 int_0^inf t^(alpha-1) f(t) dt` for `f(t) ~ 2^d t^-d` at the
/// origin and exponential decay at infinity.
///
/// Trapezoid rule in `u = ln t` (the integrand is analytic in a strip of
/// half-width pi/2, so the rule converges geometrically in 1/h); the part of
/// the infinite grid below `t_lo` is summed from the leading asymptote.
fn laplace_lattice_sum<T: Real>(alpha: T, d: usize, feature_scale: T, f: impl Fn(T) -> T) -> T {
    let h = T::lit(0.2);
    let excess = alpha - T::from_usize_lossy(d);
    let t_lo = T::lit(1e-6) * feature_scale.min(T::one());
    let t_hi = T::lit(80.0) + T::lit(2.0) * alpha;
    let u_lo = t_lo.ln();
    let steps = ((t_hi.ln() - u_lo) / h).ceil().to_usize().unwrap();
    let mut sum = T::zero();
    for k in 0..=steps {
        let u = u_lo + h * T::from_usize_lossy(k);
        let t = u.exp();
        sum = sum + t.powf(alpha) * f(t);
    }
    let lead = T::lit(2.0).powi(d as i32);
    let q = (-h * excess).exp();
    let left = lead * (u_lo * excess).exp() * q / (T::one() - q);
    let gamma = T::lit(statrs::function::gamma::gamma(alpha.as_f64()));
    h * (sum + left) / gamma
}

/// Exact `sum_{y outside [-l,l]^d} exp(-mu |x-y|_1)` as a telescoped difference
/// of the full-lattice product and the in-box product.
fn exponential_outside_box<T: Real>(mu: T, l: i64, x: &[i64]) -> T {
    let q = (-mu).exp();
    let full = T::one() / (T::lit(0.5) * mu).tanh();
    let one_minus_q = -(-mu).exp_m1();
    let mut in_box = Vec::with_capacity(x.len());
    let mut outside = Vec::with_capacity(x.len());
    for &c in x {
        let right = T::from_i64(l - c + 1).unwrap();
        let left = T::from_i64(l + c + 1).unwrap();
        let tail = (q.powf(right) + q.powf(left)) / one_minus_q;
        outside.push(tail);
        in_box.push(full - tail);
    }
    let d = x.len();
    let mut total = T::zero();
    let mut prefix = T::one();
    for i in 0..d {
        total = total + prefix * outside[i] * full.powi((d - 1 - i) as i32);
        prefix = prefix * in_box[i];
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub passed: bool,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub checks: Vec<ConditionCheck>,
}

impl ModelReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

/// Runs the C1-C4 checks on an arbitrary (possibly invalid) model.
pub fn validate_model<T: Real>(model: &CouplingModel<T>) -> ModelReport {
    let d = model.dimension;
    let mut checks = Vec::with_capacity(4);
    if d == 0 {
        for c in ["C1", "C2", "C3", "C4"] {
            checks.push(ConditionCheck {
                condition: c.into(),
                passed: false,
                witness: "dimension must be positive".into(),
            });
        }
        return ModelReport { checks };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c1c2);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        (0..d).map(|_| rng.random_range(-12i64..=12)).collect()
    };

    // C1: translation invariance on random pairs
    let mut c1 = ConditionCheck {
        condition: "C1".into(),
        passed: true,
        witness: "1000 random pairs".into(),
    };
    let mut c2 = ConditionCheck {
        condition: "C2".into(),
        passed: true,
        witness: "all sampled couplings nonnegative".into(),
    };
    for _ in 0..1000 {
        let x = random_vec(&mut rng);
        let y = random_vec(&mut rng);
        if x == y {
            continue;
        }
        let diff: Vec<i64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let origin = vec![0i64; d];
        let jxy = model.coupling(&x, &y).unwrap();
        let j0 = model.coupling(&origin, &diff).unwrap();
        if c1.passed && jxy != j0 {
            c1.passed = false;
            c1.witness = format!("J({x:?},{y:?}) != J(0,{diff:?})");
        }
        if c2.passed && !(jxy >= T::zero()) {
            c2.passed = false;
            c2.witness = format!("J({x:?},{y:?}) = {jxy} < 0");
        }
    }
    if let Some(t) = model.terms.iter().find(|t| !(t.weight >= T::zero())) {
        c2.passed = false;
        c2.witness = format!("negative term weight {}", t.weight);
    }
    checks.push(c1);
    checks.push(c2);

    // C3: summability
    let mut c3 = ConditionCheck {
        condition: "C3".into(),
        passed: true,
        witness: String::new(),
    };
    for t in &model.terms {
        match t.kernel {
            Kernel::PowerLaw { alpha } if alpha <= T::from_usize_lossy(d) => {
                c3.passed = false;
                c3.witness = format!("power law alpha = {alpha} <= d = {d}: |J| diverges");
            }
            Kernel::Exponential { mu } if mu <= T::zero() => {
                c3.passed = false;
                c3.witness = format!("exponential rate mu = {mu} <= 0: |J| diverges");
            }
            _ => {}
        }
    }
    if c3.passed {
        let total = model.total_coupling();
        c3.passed = total.is_finite();
        c3.witness = format!("|J| = {total}");
    }
    checks.push(c3);

    // C4: every unit vector reachable from 0 through positive couplings
    checks.push(check_aperiodic(model));
    ModelReport { checks }
}

fn check_aperiodic<T: Real>(model: &CouplingModel<T>) -> ConditionCheck {
    use std::collections::{HashSet, VecDeque};
    let d = model.dimension;
    const RADIUS: i64 = 4;
    let steps: Vec<Vec<i64>> = box_points(d, 2)
        .filter(|s| s.iter().any(|&c| c != 0))
        .filter(|s| model.at_distance(l1_distance(s, &vec![0; d])) > T::zero())
        .collect();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue = VecDeque::new();
    let origin = vec![0i64; d];
    seen.insert(origin.clone());
    queue.push_back(origin);
    while let Some(v) = queue.pop_front() {
        for s in &steps {
            let w: Vec<i64> = v.iter().zip(s).map(|(a, b)| a + b).collect();
            if w.iter().all(|c| c.abs() <= RADIUS) && seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    for i in 0..d {
        for sign in [1i64, -1] {
            let mut e = vec![0i64; d];
            e[i] = sign;
            if !seen.contains(&e) {
                return ConditionCheck {
                    condition: "C4".into(),
                    passed: false,
                    witness: format!("unit vector {e:?} unreachable from 0 within radius {RADIUS}"),
                };
            }
        }
    }
    ConditionCheck {
        condition: "C4".into(),
        passed: true,
        witness: format!("all unit vectors reachable within radius {RADIUS}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn nearest_neighbor_unit_vector() {
        let m = CouplingModel::<f64>::nearest_neighbor(2);
        assert_eq!(m.coupling(&[0, 0], &[1, 0]).unwrap(), 1.0);
        assert_eq!(m.coupling(&[0, 0], &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn power_law_distance_three() {
        let m = CouplingModel::<f64>::power_law(1, 2.0).unwrap();
        assert_relative_eq!(m.coupling(&[0], &[3]).unwrap(), 1.0 / 9.0, max_relative = 1e-15);
    }

    #[test]
    fn self_coupling_is_an_error() {
        let m = CouplingModel::<f64>::nearest_neighbor(3);
        assert!(matches!(m.coupling(&[1, 2, 3], &[1, 2, 3]), Err(Error::Domain(_))));
    }

    #[test]
    fn constructor_rejects_divergent_power_law() {
        assert!(CouplingModel::<f64>::power_law(1, 1.0).is_err());
        assert!(CouplingModel::<f64>::power_law(2, 1.5).is_err());
        assert!(CouplingModel::<f64>::power_law(1, 1.01).is_ok());
    }

    #[test]
    fn validate_reports_each_condition() {
        assert!(validate_model(&CouplingModel::<f64>::nearest_neighbor(3)).all_passed());
        let bad = CouplingModel::new_unchecked(
            1,
            vec![Term::new(Kernel::PowerLaw { alpha: 0.5 }, 1.0)],
            0.0,
        );
        let r = validate_model(&bad);
        assert!(!r.get("C3").unwrap().passed);
        assert!(r.get("C1").unwrap().passed);
        let zero = CouplingModel::<f64>::new_unchecked(2, vec![], 0.0);
        let r = validate_model(&zero);
        assert!(!r.get("C4").unwrap().passed);
        assert!(r.get("C3").unwrap().passed);
    }

    #[test]
    fn total_coupling_closed_forms() {
        let nn = CouplingModel::<f64>::nearest_neighbor(3);
        assert_eq!(nn.total_coupling(), 6.0);
        // 2 zeta(2) and 2 zeta(3)
        let p2 = CouplingModel::<f64>::power_law(1, 2.0).unwrap();
        assert_relative_eq!(p2.total_coupling(), PI * PI / 3.0, max_relative = 1e-11);
        let p3 = CouplingModel::<f64>::power_law(1, 3.0).unwrap();
        assert_relative_eq!(p3.total_coupling(), 2.0 * 1.2020569031595942, max_relative = 1e-11);
        // exponential in d=2 against a direct lattice sum
        let e = CouplingModel::<f64>::exponential(2, 0.7).unwrap();
        let direct: f64 = box_points(2, 80)
            .filter(|x| x.iter().any(|&c| c != 0))
            .map(|x| (-0.7 * l1_distance(&x, &[0, 0]) as f64).exp())
            .sum();
        assert_relative_eq!(e.total_coupling(), direct, max_relative = 1e-12);
    }

    #[test]
    fn power_law_total_in_two_dimensions_matches_shell_sum() {
        // shells of the l1 sphere in d=2 hold 4r points
        let m = CouplingModel::<f64>::power_law(2, 4.0).unwrap();
        let mut s = 0.0;
        for r in (1..2_000_000u64).rev() {
            s += 4.0 * (r as f64).powf(-3.0);
        }
        assert_relative_eq!(m.total_coupling(), s, max_relative = 1e-11);
    }

    #[test]
    fn energy_nearest_neighbor_values() {
        let m2 = CouplingModel::<f64>::nearest_neighbor(2);
        assert_eq!(m2.energy(&[0.0, 0.0]), 0.0);
        assert_relative_eq!(m2.energy(&[PI, PI]), 8.0, max_relative = 1e-15);
        let m1 = CouplingModel::<f64>::nearest_neighbor(1);
        assert_relative_eq!(m1.energy(&[PI]), 4.0, max_relative = 1e-15);
        // direct lattice sum over the four neighbours
        let p = [0.3, -1.1];
        let direct: f64 = [[1i64, 0], [-1, 0], [0, 1], [0, -1]]
            .iter()
            .map(|x| {
                let s = ((p[0] * x[0] as f64 + p[1] * x[1] as f64) / 2.0).sin();
                2.0 * s * s
            })
            .sum();
        assert_relative_eq!(m2.energy(&p), direct, max_relative = 1e-14);
    }

    #[test]
    fn energy_power_law_two_matches_clausen_closed_form() {
        // sum_r cos(r q)/r^2 = pi^2/6 - pi q/2 + q^2/4 on [0, 2 pi]
        let m = CouplingModel::<f64>::power_law(1, 2.0).unwrap();
        for &q in &[1e-7, 1e-4, 0.01, 0.5, 1.7, PI] {
            let exact = PI * q - q * q / 2.0;
            assert_relative_eq!(m.energy(&[q]), exact, max_relative = 1e-10);
        }
    }

    #[test]
    fn energy_power_law_direct_sum_when_decay_is_fast() {
        let m = CouplingModel::<f64>::power_law(2, 6.0).unwrap();
        let p = [0.8, -0.3];
        let direct: f64 = box_points(2, 300)
            .filter(|x| x.iter().any(|&c| c != 0))
            .map(|x| {
                let r = l1_distance(&x, &[0, 0]) as f64;
                let s = ((p[0] * x[0] as f64 + p[1] * x[1] as f64) / 2.0).sin();
                2.0 * s * s * r.powf(-6.0)
            })
            .sum();
        assert_relative_eq!(m.energy(&p), direct, max_relative = 1e-9);
    }

    #[test]
    fn energy_exponential_matches_direct_sum() {
        let m = CouplingModel::<f64>::exponential(3, 1.3).unwrap();
        let p = [0.4, 2.0, -0.9];
        let direct: f64 = box_points(3, 30)
            .filter(|x| x.iter().any(|&c| c != 0))
            .map(|x| {
                let r = l1_distance(&x, &[0, 0, 0]) as f64;
                let dot: f64 = x.iter().zip(&p).map(|(a, b)| *a as f64 * b).sum();
                (1.0 - dot.cos()) * (-1.3 * r).exp()
            })
            .sum();
        assert_relative_eq!(m.energy(&p), direct, max_relative = 1e-12);
    }

    #[test]
    fn ghost_coupling_nearest_neighbor() {
        let m = CouplingModel::<f64>::nearest_neighbor(2);
        assert_eq!(m.ghost_coupling_box(3, &[0, 1]).unwrap(), 0.0);
        assert_eq!(m.ghost_coupling_box(3, &[3, -3]).unwrap(), 2.0);
        assert_eq!(m.ghost_coupling_box(3, &[3, 0]).unwrap(), 1.0);
        assert_eq!(m.ghost_coupling_box(0, &[0, 0]).unwrap(), 4.0);
    }

    #[test]
    fn ghost_coupling_power_law_against_direct_summation() {
        // oracle: direct sum of |y-2|^-3 over |y| >= 3 up to radius 10^6,
        // plus the integral tail beyond it
        let m = CouplingModel::<f64>::power_law(1, 3.0).unwrap();
        let mut direct = 0.0;
        for y in (3i64..=1_000_000).rev() {
            direct += ((y - 2) as f64).powi(-3);
            direct += ((y + 2) as f64).powi(-3);
        }
        direct += 0.5 / (1_000_000f64 - 2.0).powi(2) + 0.5 / (1_000_000f64 + 2.0).powi(2);
        let g = m.ghost_coupling_box(2, &[2]).unwrap();
        assert_relative_eq!(g, direct, max_relative = 1e-10);
    }

    #[test]
    fn ghost_coupling_exponential_against_direct_summation() {
        let m = CouplingModel::<f64>::exponential(2, 0.9).unwrap();
        let x = [1i64, -2];
        let direct: f64 = box_points(2, 60)
            .filter(|y| y.iter().any(|c| c.abs() > 2))
            .map(|y| (-0.9 * l1_distance(&x, &y) as f64).exp())
            .sum();
        assert_relative_eq!(m.ghost_coupling_box(2, &x).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn single_precision_model() {
        let m = CouplingModel::<f32>::nearest_neighbor(2);
        assert!((m.energy(&[std::f32::consts::PI, std::f32::consts::PI]) - 8.0).abs() < 1e-5);
        let p = CouplingModel::<f32>::power_law(1, 2.0).unwrap();
        assert!((p.total_coupling() - (std::f32::consts::PI.powi(2) / 3.0)).abs() < 1e-4);
    }
}
