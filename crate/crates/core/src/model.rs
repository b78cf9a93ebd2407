//! Model constants, reaction kinetics, constant equilibria and the
//! attractor classifiers for Neumann and Dirichlet boundaries.
//!
//! The three-species system is
//!
//! ```text
//! S_t - dΔS = a(S+I) - bS - c(S+I)S - kIS - ℓSP
//! I_t - dΔI = kIS - bI - c(S+I)I - γIP
//! P_t - DΔP = θSP + σIP - ρP
//! ```
//!
//! under Neumann or Dirichlet boundary conditions. All asymptotic results
//! assume `(γ, σ) = (ℓ, θ)`, in which case `u = S + I` obeys the classical
//! prey-predator system `u_t - dΔu = (a - b - cu)u - ℓuP`.

use crate::error::ModelError;
use crate::grid::{Field, Grid};

/// Relative tolerance of the `(γ, σ) = (ℓ, θ)` check.
pub const SPECIAL_CASE_RTOL: f64 = 1e-12;
/// Relative tolerance under which a threshold counts as an equality.
pub const EQUALITY_RTOL: f64 = 1e-12;

/// All model constants. Rates are per unit time, diffusivities are
/// length²/time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Parameters {
    /// prey birth rate
    pub a: f64,
    /// prey death rate
    pub b: f64,
    /// crowding coefficient, (a - b) / carrying capacity
    pub c: f64,
    /// infection coefficient
    pub k: f64,
    /// predation rate on susceptibles
    pub ell: f64,
    /// predation rate on infected
    pub gamma: f64,
    /// predator gain from susceptibles
    pub theta: f64,
    /// predator gain from infected
    pub sigma: f64,
    /// predator death rate
    pub rho: f64,
    /// prey diffusivity (both classes)
    pub d: f64,
    /// predator diffusivity
    #[cfg_attr(feature = "serde", serde(rename = "D"))]
    pub big_d: f64,
}

/// Names accepted by [`Parameters::get`] / [`Parameters::with`].
pub const PARAMETER_NAMES: [&str; 11] = [
    "a", "b", "c", "k", "ell", "gamma", "theta", "sigma", "rho", "d", "D",
];

impl Parameters {
    /// Validated constructor for the special case `(γ, σ) = (ℓ, θ)`.
    #[allow(clippy::too_many_arguments)]
    pub fn special(
        a: f64,
        b: f64,
        c: f64,
        k: f64,
        ell: f64,
        theta: f64,
        rho: f64,
        d: f64,
        big_d: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            a,
            b,
            c,
            k,
            ell,
            gamma: ell,
            theta,
            sigma: theta,
            rho,
            d,
            big_d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for name in PARAMETER_NAMES {
            let value = self.get(name)?;
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NotPositive { name, value });
            }
        }
        if !(self.a > self.b) {
            return Err(ModelError::BirthNotAboveDeath {
                a: self.a,
                b: self.b,
            });
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64, ModelError> {
        Ok(match name {
            "a" => self.a,
            "b" => self.b,
            "c" => self.c,
            "k" => self.k,
            "ell" => self.ell,
            "gamma" => self.gamma,
            "theta" => self.theta,
            "sigma" => self.sigma,
            "rho" => self.rho,
            "d" => self.d,
            "D" => self.big_d,
            _ => return Err(ModelError::UnknownParameter),
        })
    }

    /// Copy with one constant replaced. In the special case, moving `ell`
    /// or `theta` drags `gamma` / `sigma` along so the copy stays special.
    pub fn with(&self, name: &str, value: f64) -> Result<Self, ModelError> {
        let mut p = *self;
        let special = self.is_special_case();
        match name {
            "a" => p.a = value,
            "b" => p.b = value,
            "c" => p.c = value,
            "k" => p.k = value,
            "ell" => {
                p.ell = value;
                if special {
                    p.gamma = value;
                }
            }
            "gamma" => p.gamma = value,
            "theta" => {
                p.theta = value;
                if special {
                    p.sigma = value;
                }
            }
            "sigma" => p.sigma = value,
            "rho" => p.rho = value,
            "d" => p.d = value,
            "D" => p.big_d = value,
            _ => return Err(ModelError::UnknownParameter),
        }
        Ok(p)
    }

    pub fn is_special_case(&self) -> bool {
        close(self.gamma, self.ell, SPECIAL_CASE_RTOL) && close(self.sigma, self.theta, SPECIAL_CASE_RTOL)
    }

    pub fn require_special_case(&self) -> Result<(), ModelError> {
        if self.is_special_case() {
            Ok(())
        } else {
            Err(ModelError::NotSpecialCase {
                gamma: self.gamma,
                ell: self.ell,
                sigma: self.sigma,
                theta: self.theta,
            })
        }
    }

    /// Prey carrying capacity (a - b) / c.
    pub fn carrying_capacity(&self) -> f64 {
        (self.a - self.b) / self.c
    }

    /// b + cρ/θ: above it the predator can invade the disease-free prey.
    pub fn predator_threshold(&self) -> f64 {
        self.b + self.c * self.rho / self.theta
    }

    /// kρ/θ: below it the disease persists alongside the predator.
    pub fn endemic_threshold(&self) -> f64 {
        self.k * self.rho / self.theta
    }

    /// bk/(k - c), defined only for k > c.
    pub fn infection_threshold(&self) -> Option<f64> {
        (self.k > self.c).then(|| self.b * self.k / (self.k - self.c))
    }

    /// min{ℓ/θ, γ/σ}, the predator weight in W = S + I + δP.
    pub fn delta(&self) -> f64 {
        (self.ell / self.theta).min(self.gamma / self.sigma)
    }

    /// Reaction rates (f1, f2, f3) at one point.
    #[inline]
    pub fn reaction(&self, s: f64, i: f64, p: f64) -> [f64; 3] {
        let u = s + i;
        [
            self.a * u - self.b * s - self.c * u * s - self.k * i * s - self.ell * s * p,
            self.k * i * s - self.b * i - self.c * u * i - self.gamma * i * p,
            self.theta * s * p + self.sigma * i * p - self.rho * p,
        ]
    }
}

/// Free-function form of [`Parameters::reaction`].
pub fn reaction_terms(point: [f64; 3], p: &Parameters) -> [f64; 3] {
    p.reaction(point[0], point[1], point[2])
}

pub(crate) fn close(x: f64, y: f64, rtol: f64) -> bool {
    (x - y).abs() <= rtol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

/// Nodal (S, I, P) fields on a common grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct State {
    pub s: Field,
    pub i: Field,
    pub p: Field,
}

impl State {
    pub fn constant(g: &Grid, point: [f64; 3]) -> Self {
        Self {
            s: Field::constant(g, point[0]),
            i: Field::constant(g, point[1]),
            p: Field::constant(g, point[2]),
        }
    }

    pub fn zeros(g: &Grid) -> Self {
        Self::constant(g, [0.0; 3])
    }

    pub fn fields(&self) -> [&Field; 3] {
        [&self.s, &self.i, &self.p]
    }

    pub fn conforms(&self, g: &Grid) -> bool {
        self.fields().iter().all(|f| f.len() == g.nodes())
    }

    /// Largest nodal deviation over all three components.
    pub fn sup_distance(&self, other: &State) -> f64 {
        self.s
            .sup_distance(&other.s)
            .max(self.i.sup_distance(&other.i))
            .max(self.p.sup_distance(&other.p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EquilibriumKind {
    E0,
    E1,
    EI,
    EP,
    EStar,
}

impl EquilibriumKind {
    pub const ALL: [EquilibriumKind; 5] = [
        EquilibriumKind::E0,
        EquilibriumKind::E1,
        EquilibriumKind::EI,
        EquilibriumKind::EP,
        EquilibriumKind::EStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EquilibriumKind::E0 => "E0",
            EquilibriumKind::E1 => "E1",
            EquilibriumKind::EI => "EI",
            EquilibriumKind::EP => "EP",
            EquilibriumKind::EStar => "Estar",
        }
    }
}

/// One constant equilibrium: its point when it exists and the inequality
/// deciding existence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub point: Option<[f64; 3]>,
    pub condition: &'static str,
}

impl Equilibrium {
    pub fn exists(&self) -> bool {
        self.point.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquilibriumSet {
    pub e0: Equilibrium,
    pub e1: Equilibrium,
    pub ei: Equilibrium,
    pub ep: Equilibrium,
    pub estar: Equilibrium,
}

impl EquilibriumSet {
    pub fn get(&self, kind: EquilibriumKind) -> &Equilibrium {
        match kind {
            EquilibriumKind::E0 => &self.e0,
            EquilibriumKind::E1 => &self.e1,
            EquilibriumKind::EI => &self.ei,
            EquilibriumKind::EP => &self.ep,
            EquilibriumKind::EStar => &self.estar,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Equilibrium> {
        [&self.e0, &self.e1, &self.ei, &self.ep, &self.estar].into_iter()
    }

    pub fn existing(&self) -> impl Iterator<Item = (EquilibriumKind, [f64; 3])> + '_ {
        self.iter().filter_map(|e| e.point.map(|pt| (e.kind, pt)))
    }
}

/// The constant equilibria of the special-case system in closed form.
pub fn equilibria(p: &Parameters) -> EquilibriumSet {
    let (a, b, c, k) = (p.a, p.b, p.c, p.k);
    let (ell, theta, rho) = (p.ell, p.theta, p.rho);
    let pred = p.predator_threshold();
    let endemic = p.endemic_threshold();
    let p_coexist = (a - b - c * rho / theta) / ell;

    let ei = (a > pred).then_some([rho / theta, 0.0, p_coexist]);
    let ep = match p.infection_threshold() {
        Some(t) if a > t => Some([a / k, (a * (k - c) - b * k) / (k * c), 0.0]),
        _ => None,
    };
    let estar = (pred < a && a < endemic).then_some([
        a / k,
        (k * rho - a * theta) / (k * theta),
        p_coexist,
    ]);

    EquilibriumSet {
        e0: Equilibrium {
            kind: EquilibriumKind::E0,
            point: Some([0.0; 3]),
            condition: "always",
        },
        e1: Equilibrium {
            kind: EquilibriumKind::E1,
            point: Some([p.carrying_capacity(), 0.0, 0.0]),
            condition: "always",
        },
        ei: Equilibrium {
            kind: EquilibriumKind::EI,
            point: ei,
            condition: "a > b + c*rho/theta",
        },
        ep: Equilibrium {
            kind: EquilibriumKind::EP,
            point: ep,
            condition: "k > c and a > b*k/(k - c)",
        },
        estar: Equilibrium {
            kind: EquilibriumKind::EStar,
            point: estar,
            condition: "b + c*rho/theta < a < k*rho/theta",
        },
    }
}

/// Predicted long-time limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Attractor {
    E0,
    E1,
    EI,
    EP,
    EStar,
    /// (0, 0, 0) under Dirichlet conditions
    Extinction,
    /// (S*, 0, 0)
    SStar00,
    /// (S̃, Ĩ, 0)
    STildeITilde0,
    Unresolved,
}

impl Attractor {
    pub fn name(self) -> &'static str {
        match self {
            Attractor::E0 => "E0",
            Attractor::E1 => "E1",
            Attractor::EI => "EI",
            Attractor::EP => "EP",
            Attractor::EStar => "Estar",
            Attractor::Extinction => "extinction",
            Attractor::SStar00 => "Sstar00",
            Attractor::STildeITilde0 => "StildeItilde0",
            Attractor::Unresolved => "unresolved",
        }
    }

    pub fn equilibrium(self) -> Option<EquilibriumKind> {
        match self {
            Attractor::E0 => Some(EquilibriumKind::E0),
            Attractor::E1 => Some(EquilibriumKind::E1),
            Attractor::EI => Some(EquilibriumKind::EI),
            Attractor::EP => Some(EquilibriumKind::EP),
            Attractor::EStar => Some(EquilibriumKind::EStar),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegimePrediction {
    pub attractor: Attractor,
    pub justification: &'static str,
    /// A deciding inequality holds with equality (convergence may be slow).
    pub boundary_case: bool,
}

/// Global attractor of the Neumann problem with constant equilibria.
pub fn classify_neumann(p: &Parameters) -> Result<RegimePrediction, ModelError> {
    p.require_special_case()?;
    let a = p.a;
    let pred = p.predator_threshold();
    let endemic = p.endemic_threshold();
    let infection = p.infection_threshold();

    let mut boundary_case = close(a, pred, EQUALITY_RTOL) || close(a, endemic, EQUALITY_RTOL);
    if let Some(t) = infection {
        boundary_case |= close(a, t, EQUALITY_RTOL);
    }
    // k = c sits on the edge of E_P's existence region
    boundary_case |= close(p.k, p.c, EQUALITY_RTOL);

    let ei_exists = a > pred;
    let ep_exists = matches!(infection, Some(t) if a > t);
    let estar_exists = pred < a && a < endemic;

    let (attractor, justification) = if estar_exists {
        (Attractor::EStar, "endemic equilibrium exists: b + c*rho/theta < a < k*rho/theta")
    } else if ei_exists && a >= endemic {
        (Attractor::EI, "disease-free equilibrium exists and a >= k*rho/theta")
    } else if ep_exists && a <= pred {
        (Attractor::EP, "predator-free equilibrium exists and a <= b + c*rho/theta")
    } else if a <= pred && infection.map_or(true, |t| a <= t) {
        (Attractor::E1, "a <= b + c*rho/theta and (k <= c or a <= b*k/(k - c))")
    } else {
        (Attractor::Unresolved, "no clause applies")
    };
    Ok(RegimePrediction {
        attractor,
        justification,
        boundary_case,
    })
}

/// Principal-eigenvalue signs deciding Dirichlet existence and stability.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenBundle {
    /// λ₀ᵈ for the prey diffusivity
    pub lambda0_prey: f64,
    /// λ₀ᴰ for the predator diffusivity
    pub lambda0_predator: f64,
    /// λ₁ᵈ(b - a) = λ₀ᵈ + b - a
    pub logistic: f64,
    /// λ₁ᵈ(b - (k - c)S*), present when S* exists
    pub infection: Option<f64>,
    /// λ₁ᴰ(ρ - θS*), present when S* exists
    pub predation: Option<f64>,
    /// λ₁ᵈ(b - (k - c)Ŝ + ℓP̂), present when (Ŝ, P̂) exists
    pub coexistence: Option<f64>,
}

impl EigenBundle {
    fn equal_zero(&self, v: f64) -> bool {
        v.abs() <= 1e-10 * (1.0 + self.lambda0_prey.max(self.lambda0_predator))
    }
}

/// Long-time limit of the Dirichlet problem from the eigenvalue signs.
pub fn classify_dirichlet(p: &Parameters, eig: &EigenBundle) -> Result<RegimePrediction, ModelError> {
    p.require_special_case()?;
    let mut boundary_case = eig.equal_zero(eig.logistic);
    if eig.logistic >= 0.0 {
        return Ok(RegimePrediction {
            attractor: Attractor::Extinction,
            justification: "lambda_1^d(b - a) >= 0",
            boundary_case,
        });
    }
    let (Some(predation), Some(infection)) = (eig.predation, eig.infection) else {
        return Ok(RegimePrediction {
            attractor: Attractor::Unresolved,
            justification: "eigenvalue bundle incomplete although S* exists",
            boundary_case,
        });
    };
    boundary_case |= eig.equal_zero(predation) || eig.equal_zero(infection);
    let k_le_c = p.k <= p.c;

    let (attractor, justification) = if predation > 0.0 {
        if k_le_c || infection > 0.0 {
            (
                Attractor::SStar00,
                "lambda_1^D(rho - theta S*) > 0 and (k <= c or lambda_1^d(b - (k - c)S*) > 0)",
            )
        } else if infection < 0.0 {
            (
                Attractor::STildeITilde0,
                "lambda_1^d(b - (k - c)S*) < 0 and lambda_1^D(rho - theta S*) > 0",
            )
        } else {
            (Attractor::Unresolved, "lambda_1^d(b - (k - c)S*) = 0")
        }
    } else {
        (
            Attractor::Unresolved,
            "lambda_1^D(rho - theta S*) <= 0: no convergence claim",
        )
    };
    Ok(RegimePrediction {
        attractor,
        justification,
        boundary_case,
    })
}

/// A-priori bounds along solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundConstants {
    /// max{max(S₀ + I₀), (a - b)/c}
    pub prey_bound: f64,
    /// ∫W₀ + (a + ρ - b)²|Ω|/(4cρ), W = S + I + δP
    pub mass_bound: f64,
    /// max{∫W₀, (a + ρ - b)²|Ω|/(4cρ)}, the sharper bound when d = D
    pub mass_cap: f64,
    pub delta: f64,
    /// (1/δ)·max{max(S₀ + I₀ + δP₀), (a + ρ - b)²/(4cρ)}; rigorous for d = D,
    /// a heuristic scale otherwise.
    pub predator_bound: f64,
}

pub fn bound_constants(p: &Parameters, g: &Grid, initial: &State) -> BoundConstants {
    let delta = p.delta();
    let prey0 = initial
        .s
        .iter()
        .zip(initial.i.iter())
        .fold(f64::NEG_INFINITY, |m, (s, i)| m.max(s + i));
    let w0: alloc::vec::Vec<f64> = initial
        .s
        .iter()
        .zip(initial.i.iter())
        .zip(initial.p.iter())
        .map(|((s, i), q)| s + i + delta * q)
        .collect();
    let w0_max = w0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass0 = g.integrate(&w0);
    let source = (p.a + p.rho - p.b) * (p.a + p.rho - p.b) / (4.0 * p.c * p.rho);
    BoundConstants {
        prey_bound: prey0.max(p.carrying_capacity()),
        mass_bound: mass0 + source * g.length(),
        mass_cap: mass0.max(source * g.length()),
        delta,
        predator_bound: w0_max.max(source) / delta,
    }
}

/// Constants of the classical diffusive prey-predator system
/// `u_t - dΔu = b(a - u)u - cuv`, `v_t - DΔv = k(u - h)v`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PreyPredatorParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
    pub h: f64,
    pub d: f64,
    #[cfg_attr(feature = "serde", serde(rename = "D"))]
    pub big_d: f64,
}

impl PreyPredatorParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("k", self.k),
            ("h", self.h),
            ("d", self.d),
            ("D", self.big_d),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NotPositive { name, value });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn reaction(&self, u: f64, v: f64) -> [f64; 2] {
        [
            self.b * (self.a - u) * u - self.c * u * v,
            self.k * (u - self.h) * v,
        ]
    }

    /// Predator level at coexistence, b(a - h)/c (positive iff h < a).
    pub fn coexistence_predator(&self) -> f64 {
        self.b * (self.a - self.h) / self.c
    }

    /// The globally attracting constant state: (a, 0) when h ≥ a,
    /// (h, b(a - h)/c) otherwise.
    pub fn limit(&self) -> [f64; 2] {
        if self.h >= self.a {
            [self.a, 0.0]
        } else {
            [self.h, self.coexistence_predator()]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    pub(crate) fn ps_a() -> Parameters {
        Parameters::special(2.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }
    fn ps_b() -> Parameters {
        Parameters::special(1.2, 1.0, 1.0, 1.5, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }
    fn ps_c() -> Parameters {
        Parameters::special(3.0, 0.5, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }
    fn ps_d() -> Parameters {
        Parameters::special(2.0, 0.5, 1.0, 3.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap()
    }

    fn sup3(v: [f64; 3]) -> f64 {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn reaction_vanishes_at_trivial_points() {
        let p = ps_c();
        assert_eq!(reaction_terms([0.0; 3], &p), [0.0; 3]);
        let e1 = [p.carrying_capacity(), 0.0, 0.0];
        assert!(sup3(reaction_terms(e1, &p)) < 1e-15);
        assert!(sup3(reaction_terms([0.5, 0.5, 0.5], &ps_a())) < 1e-15);
    }

    #[test]
    fn reaction_general_form() {
        let p = Parameters {
            gamma: 2.0,
            sigma: 3.0,
            ..ps_a()
        };
        let (s, i, q) = (0.3, 0.7, 1.1);
        let f = p.reaction(s, i, q);
        assert!((f[0] - (2.0 * 1.0 - 0.5 * 0.3 - 1.0 * 0.3 - 4.0 * 0.7 * 0.3 - 0.3 * 1.1)).abs() < 1e-14);
        assert!((f[1] - (4.0 * 0.21 - 0.5 * 0.7 - 0.7 - 2.0 * 0.7 * 1.1)).abs() < 1e-14);
        assert!((f[2] - (0.3 * 1.1 + 3.0 * 0.7 * 1.1 - 1.1)).abs() < 1e-14);
    }

    #[test]
    fn equilibria_closed_forms() {
        let e = equilibria(&ps_a());
        assert_eq!(e.estar.point, Some([0.5, 0.5, 0.5]));
        let e = equilibria(&ps_c());
        assert_eq!(e.ei.point, Some([1.0, 0.0, 1.5]));
        assert!(!e.estar.exists());
        let e = equilibria(&ps_d());
        let ep = e.ep.point.unwrap();
        assert!((ep[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((ep[1] - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(ep[2], 0.0);
        let e = equilibria(&ps_b());
        assert_eq!(e.e1.point, Some([0.19999999999999996, 0.0, 0.0]));
        assert!(!e.ei.exists() && !e.ep.exists() && !e.estar.exists());
    }

    #[test]
    fn neumann_classification_of_named_sets() {
        assert_eq!(classify_neumann(&ps_b()).unwrap().attractor, Attractor::E1);
        assert_eq!(classify_neumann(&ps_c()).unwrap().attractor, Attractor::EI);
        assert_eq!(classify_neumann(&ps_d()).unwrap().attractor, Attractor::EP);
        let pa = classify_neumann(&ps_a()).unwrap();
        assert_eq!(pa.attractor, Attractor::EStar);
        assert!(!pa.boundary_case);
    }

    #[test]
    fn classifiers_reject_general_rates() {
        let p = Parameters {
            gamma: 1.5,
            ..ps_a()
        };
        assert!(matches!(
            classify_neumann(&p),
            Err(ModelError::NotSpecialCase { .. })
        ));
        let eig = EigenBundle {
            lambda0_prey: 1.0,
            lambda0_predator: 1.0,
            logistic: 1.0,
            infection: None,
            predation: None,
            coexistence: None,
        };
        assert!(classify_dirichlet(&p, &eig).is_err());
    }

    #[test]
    fn threshold_equality_is_flagged() {
        // a = b + cρ/θ exactly
        let p = Parameters::special(1.5, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = classify_neumann(&p).unwrap();
        assert!(r.boundary_case);
        // non-strict inequality of the E_P clause: a <= b + cρ/θ with E_P present
        assert_eq!(r.attractor, Attractor::EP);
        // a = kρ/θ exactly with E_I present
        let p = Parameters::special(4.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = classify_neumann(&p).unwrap();
        assert!(r.boundary_case);
        assert_eq!(r.attractor, Attractor::EI);
    }

    #[test]
    fn k_not_above_c_treats_infection_condition_as_vacuous() {
        let p = Parameters::special(1.2, 1.0, 1.0, 0.8, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.infection_threshold(), None);
        assert_eq!(classify_neumann(&p).unwrap().attractor, Attractor::E1);
    }

    #[test]
    fn dirichlet_clauses() {
        let p = ps_a();
        let mut eig = EigenBundle {
            lambda0_prey: 9.87,
            lambda0_predator: 9.87,
            logistic: 9.87 - 1.5,
            infection: None,
            predation: None,
            coexistence: None,
        };
        assert_eq!(classify_dirichlet(&p, &eig).unwrap().attractor, Attractor::Extinction);
        eig.logistic = -1.0;
        eig.infection = Some(2.0);
        eig.predation = Some(3.0);
        assert_eq!(classify_dirichlet(&p, &eig).unwrap().attractor, Attractor::SStar00);
        eig.infection = Some(-2.0);
        assert_eq!(classify_dirichlet(&p, &eig).unwrap().attractor, Attractor::STildeITilde0);
        eig.predation = Some(-3.0);
        eig.coexistence = Some(-0.5);
        assert_eq!(classify_dirichlet(&p, &eig).unwrap().attractor, Attractor::Unresolved);
    }

    #[test]
    fn bounds() {
        let p = ps_a();
        let g = Grid::new(2.0, 10, Boundary::Neumann).unwrap();
        let half = p.carrying_capacity() / 2.0;
        let st = State::constant(&g, [half / 2.0, half / 2.0, 0.3]);
        let b = bound_constants(&p, &g, &st);
        assert_eq!(b.prey_bound, p.carrying_capacity());
        assert_eq!(b.delta, 1.0);
        let source = (2.0f64 + 1.0 - 0.5).powi(2) / 4.0;
        let w0 = half + 0.3;
        assert!((b.mass_bound - (w0 * 2.0 + source * 2.0)).abs() < 1e-12);
        assert!((b.predator_bound - w0.max(source)).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            Parameters::special(1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            Err(ModelError::BirthNotAboveDeath { .. })
        ));
        assert!(matches!(
            Parameters::special(2.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            Err(ModelError::NotPositive { name: "c", .. })
        ));
        let p = ps_a().with("theta", 2.0).unwrap();
        assert!(p.is_special_case());
        assert!(ps_a().with("nope", 1.0).is_err());
    }

    #[test]
    fn pair_system_limits() {
        let pp = PreyPredatorParams {
            a: 2.0,
            b: 1.0,
            c: 0.5,
            k: 1.0,
            h: 1.0,
            d: 1.0,
            big_d: 1.0,
        };
        assert_eq!(pp.limit(), [1.0, 2.0]);
        let r = pp.reaction(1.0, 2.0);
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15);
        let pp = PreyPredatorParams { h: 3.0, ..pp };
        assert_eq!(pp.limit(), [2.0, 0.0]);
    }
}
