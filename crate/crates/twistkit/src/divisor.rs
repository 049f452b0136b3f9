//! Integer divisor-class arithmetic on the space of pointed lines: the
//! two-parameter Picard lattice with its tautological class, the
//! first-Chern-class formulas for the vertical tangent bundles, the
//! necessity inequality engine, the twist scheduler, and the dimension
//! and adjunction invariants of the pointed-conic spaces.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// An integer class `cx * x + ch * h` in the lattice `Z{x, h}`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct DivClass {
    pub cx: i64,
    pub ch: i64,
}

/// The same class written as `c_psi * psi + c_h * h` with `psi = x - 2h`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct PsiView {
    pub c_psi: i64,
    pub c_h: i64,
}

impl DivClass {
    pub fn new(cx: i64, ch: i64) -> Self {
        DivClass { cx, ch }
    }

    pub fn psi_view(&self) -> PsiView {
        PsiView {
            c_psi: self.cx,
            c_h: self.ch + 2 * self.cx,
        }
    }

    pub fn from_psi_view(v: PsiView) -> Self {
        DivClass {
            cx: v.c_psi,
            ch: v.c_h - 2 * v.c_psi,
        }
    }

    /// Degree against pullback degrees of `x` and `h`.
    pub fn degree(&self, deg_x: i64, deg_h: i64) -> i64 {
        self.cx * deg_x + self.ch * deg_h
    }
}

impl fmt::Display for DivClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x {} {}h", self.cx, if self.ch < 0 { "-" } else { "+" }, self.ch.abs())
    }
}

/// First Chern class of the vertical tangent bundle of the evaluation on
/// the pointed-line space of projective `n`-space: `n x - (n-1) h`, equal
/// to `(n+1) h + n psi`.
pub fn chern_tev_pn(n: i64) -> Result<DivClass> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let class = DivClass::new(n, -(n - 1));
    let psi = class.psi_view();
    debug_assert_eq!(psi, PsiView { c_psi: n, c_h: n + 1 });
    Ok(class)
}

/// Class of the pushforward of the twisted degree-`d` forms along the
/// universal pointed line: `d(d+1)/2 x - d h = d^2 h + d(d+1)/2 psi`.
pub fn pushforward_class(d: i64) -> DivClass {
    DivClass::new(d * (d + 1) / 2, -d)
}

/// First Chern class for a degree-`d` hypersurface section, the difference
/// of the two classes above: equal to
/// `(n - d(d+1)/2) x - (n-d-1) h = (n+1-d^2) h + (n - d(d+1)/2) psi`.
pub fn chern_tev_x(n: i64, d: i64) -> Result<DivClass> {
    if n < 2 || d < 1 {
        return Err(Error::Precondition(format!(
            "need n >= 2 and d >= 1, got n={n}, d={d}"
        )));
    }
    let ambient = chern_tev_pn(n)?;
    let push = pushforward_class(d);
    let class = DivClass::new(ambient.cx - push.cx, ambient.ch - push.ch);
    debug_assert_eq!(
        class.psi_view(),
        PsiView {
            c_psi: n - d * (d + 1) / 2,
            c_h: n + 1 - d * d
        }
    );
    Ok(class)
}

/// Degrees of the pulled-back generators along a candidate family;
/// `deg psi = deg x - 2 deg h` is derived.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DegreeVector {
    pub deg_x: i64,
    pub deg_h: i64,
}

impl DegreeVector {
    pub fn deg_psi(&self) -> i64 {
        self.deg_x - 2 * self.deg_h
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Feasibility {
    Feasible { degree: i64 },
    Infeasible { reason: String },
}

/// The pure inequality engine behind the necessity of `n >= d^2`.
///
/// Without a degree vector it decides existence: some admissible degree
/// vector gives the pulled-back vertical tangent class positive degree iff
/// `n >= d^2`. With a degree vector (requiring the hypothesis `2d <= n`),
/// it evaluates that vector, including the constant-projection branch
/// `deg x = 0`.
pub fn necessity_check(n: i64, d: i64, degrees: Option<DegreeVector>) -> Result<Feasibility> {
    if d < 1 || n < d {
        return Err(Error::Precondition(format!(
            "need 1 <= d <= n, got d={d}, n={n}"
        )));
    }
    let Some(deg) = degrees else {
        // witness: deg_h = 1, deg_psi = 0 (so deg_x = 2)
        return Ok(if n >= d * d {
            Feasibility::Feasible {
                degree: n + 1 - d * d,
            }
        } else {
            Feasibility::Infeasible {
                reason: format!("n+1-d^2 = {} <= 0", n + 1 - d * d),
            }
        });
    };
    if 2 * d > n {
        return Err(Error::Precondition(format!(
            "hypothesis d <= n/2 fails: d={d}, n={n}"
        )));
    }
    if deg.deg_x < 0 || deg.deg_h < 0 || deg.deg_psi() > 0 {
        return Err(Error::Precondition(format!(
            "degrees must satisfy deg_x >= 0, deg_h >= 0, deg_psi <= 0; got ({}, {}, {})",
            deg.deg_x,
            deg.deg_h,
            deg.deg_psi()
        )));
    }
    if deg.deg_x == 0 {
        let value = -(n - d - 1) * deg.deg_h;
        return Ok(Feasibility::Infeasible {
            reason: format!("constant projection branch: deg = -(n-d-1)*deg_h = {value} <= 0"),
        });
    }
    if n < d * (d + 1) / 2 {
        return Ok(Feasibility::Infeasible {
            reason: format!(
                "nonconstant projection needs n+1 > d(d+1)/2 = {}",
                d * (d + 1) / 2
            ),
        });
    }
    let class = chern_tev_x(n, d)?;
    let psi = class.psi_view();
    let degree = psi.c_h * deg.deg_h + psi.c_psi * deg.deg_psi();
    debug_assert_eq!(degree, class.degree(deg.deg_x, deg.deg_h));
    if degree > 0 {
        Ok(Feasibility::Feasible { degree })
    } else {
        Ok(Feasibility::Infeasible {
            reason: format!(
                "deg C1 = (n+1-d^2)*deg_h + (n-d(d+1)/2)*deg_psi = {degree} <= 0"
            ),
        })
    }
}

/// The integer schedule `a = m*a0 + 2r'` with `0 <= r' < a0` and
/// `m*b1 - r' > 0` realizing a prescribed tautological degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwistSchedule {
    pub a0: i64,
    pub b1: i64,
    pub a: i64,
    /// Threshold `2 a0 ceil((a0+b1)/(2 b1))` above which schedules exist.
    pub a1: i64,
    pub m: i64,
    pub r_prime: i64,
}

pub fn psi_schedule(a0: i64, b1: i64, a: i64) -> Result<TwistSchedule> {
    if a0 < 1 || b1 < 1 {
        return Err(Error::Precondition(format!(
            "need a0 >= 1 and b1 >= 1, got a0={a0}, b1={b1}"
        )));
    }
    if a0 % 2 == 0 && a % 2 != 0 {
        return Err(Error::Precondition(format!(
            "even case: a0 = {a0} is even, so only even a are schedulable; got a = {a}"
        )));
    }
    let a1 = 2 * a0 * ((a0 + b1 + 2 * b1 - 1) / (2 * b1));
    if a < a1 {
        return Err(Error::Precondition(format!(
            "a = {a} is below the threshold a1 = {a1}"
        )));
    }
    let (m, r_prime) = if a % 2 == 0 {
        let q = a / (2 * a0);
        let r = a - q * 2 * a0;
        (2 * q, r / 2)
    } else {
        let t = a + a0;
        let q = t / (2 * a0);
        let r = t - q * 2 * a0;
        (2 * q - 1, r / 2)
    };
    let schedule = TwistSchedule {
        a0,
        b1,
        a,
        a1,
        m,
        r_prime,
    };
    debug_assert_eq!(schedule.a, schedule.m * a0 + 2 * schedule.r_prime);
    debug_assert!(0 <= schedule.r_prime && schedule.r_prime < a0);
    debug_assert!(schedule.m * b1 - schedule.r_prime > 0);
    Ok(schedule)
}

/// Dimension and adjunction invariants of the two-pointed line-pair spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConicInvariants {
    /// Dimension of the total space of line pairs with two marked points.
    pub total_dim: i64,
    /// Upper bound for the dimension of its singular locus.
    pub sing_dim_bound: i64,
    /// Dimension of a general evaluation fiber.
    pub fiber_dim: i64,
    /// Twist of the dualizing sheaf of that fiber.
    pub omega_twist: i64,
    /// Whether the fiber is Fano (anticanonical twist positive).
    pub fano: bool,
}

pub fn conic_invariants(n: i64, d: i64) -> Result<ConicInvariants> {
    if d > n - 2 {
        return Err(Error::Precondition(format!(
            "need d <= n-2, got d={d}, n={n}"
        )));
    }
    let omega_twist = -n - 1 + d * d;
    Ok(ConicInvariants {
        total_dim: 3 * n - 2 * d - 1,
        sing_dim_bound: 2 * n - d - 1,
        fiber_dim: n + 1 - 2 * d,
        omega_twist,
        fano: n >= d * d,
    })
}
