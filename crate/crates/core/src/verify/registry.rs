use crate::indexcalc::StepBudget;
use crate::measures::MeasureSpec;
use crate::polyexact::{rat, Rational};

use super::checks::{self, Eq21Side};
use super::report::VerificationReport;
use super::VerifyError;

pub const DEFAULT_EPSILON: f64 = 0.5;

/// Run-wide settings shared by every check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Context {
    pub budget: StepBudget,
    /// Added to the dyadic exponent of the p6 and theorem constants. Zero in
    /// normal runs; negative values are a mutation probe.
    pub exponent_offset: i64,
}

/// Parameters of one check invocation. Unset fields are filled from the
/// check's own grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckParams {
    pub measure: Option<MeasureSpec>,
    pub t: Option<f64>,
    /// Exact `T` for the rational checks; falls back to `t`.
    pub t_rat: Option<Rational>,
    pub w: Option<f64>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub k: Option<u64>,
    pub kappa: Option<u32>,
    pub epsilon: Option<f64>,
    pub m: Option<u64>,
    pub mode: Option<String>,
    pub points: Option<usize>,
    pub h: Option<Rational>,
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    pub a_list: Option<Vec<Rational>>,
    pub j: Option<u32>,
    pub side: Option<Eq21Side>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
}

macro_rules! overlay_fields {
    ($base:expr, $over:expr, $($f:ident),*) => {
        CheckParams { $($f: $over.$f.clone().or_else(|| $base.$f.clone()),)* }
    };
}

impl CheckParams {
    /// Fields set in `over` replace those of `self`.
    pub fn overlay(&self, over: &CheckParams) -> CheckParams {
        overlay_fields!(
            self, over, measure, t, t_rat, w, s, gamma, k, kappa, epsilon, m, mode, points, h, a, b,
            a_list, j, side, seed, pairs
        )
    }

    pub fn is_empty(&self) -> bool {
        *self == CheckParams::default()
    }
}

fn req<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, VerifyError> {
    v.clone()
        .ok_or_else(|| VerifyError::Usage(format!("missing parameter --{flag}")))
}

/// A verifiable statement, selected by id.
pub trait Check: Send + Sync {
    fn id(&self) -> &str;
    fn description(&self) -> &str;
    /// The default parameter grid; its union over all checks is the suite.
    fn grid(&self) -> Vec<CheckParams>;
    fn run(&self, params: &CheckParams, ctx: &Context) -> Result<Vec<VerificationReport>, VerifyError>;
}

type RunFn = fn(&CheckParams, &Context) -> Result<Vec<VerificationReport>, VerifyError>;

/// A [`Check`] backed by plain functions.
pub struct FnCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub grid: fn() -> Vec<CheckParams>,
    pub run: RunFn,
}

impl Check for FnCheck {
    fn id(&self) -> &str {
        self.id
    }
    fn description(&self) -> &str {
        self.description
    }
    fn grid(&self) -> Vec<CheckParams> {
        (self.grid)()
    }
    fn run(&self, params: &CheckParams, ctx: &Context) -> Result<Vec<VerificationReport>, VerifyError> {
        (self.run)(params, ctx)
    }
}

pub struct Registry {
    checks: Vec<Box<dyn Check>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { checks: Vec::new() }
    }

    /// Every built-in check, in suite order.
    pub fn standard() -> Self {
        let mut r = Registry::empty();
        for c in builtin() {
            r.register(Box::new(c));
        }
        r
    }

    /// Replaces any check with the same id.
    pub fn register(&mut self, check: Box<dyn Check>) {
        if let Some(slot) = self.checks.iter_mut().find(|c| c.id() == check.id()) {
            *slot = check;
        } else {
            self.checks.push(check);
        }
    }

    pub fn get(&self, id: &str) -> Option<&dyn Check> {
        self.checks.iter().find(|c| c.id() == id).map(|c| c.as_ref())
    }

    pub fn ids(&self) -> Vec<&str> {
        self.checks.iter().map(|c| c.id()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Check> {
        self.checks.iter().map(|c| c.as_ref())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    /// Check ids to run; empty means all.
    pub ids: Vec<String>,
    pub overrides: CheckParams,
    pub context: Context,
}

/// Runs the selected checks over their grids with `overrides` applied.
/// Grid points that coincide after overriding run once.
pub fn run_suite(registry: &Registry, config: &SuiteConfig) -> Result<Vec<VerificationReport>, VerifyError> {
    let selected: Vec<&dyn Check> = if config.ids.is_empty() {
        registry.iter().collect()
    } else {
        config
            .ids
            .iter()
            .map(|id| registry.get(id).ok_or_else(|| VerifyError::UnknownCheck(id.clone())))
            .collect::<Result<_, _>>()?
    };
    let mut out = Vec::new();
    for check in selected {
        let mut points: Vec<CheckParams> = Vec::new();
        for p in check.grid() {
            let p = p.overlay(&config.overrides);
            if !points.contains(&p) {
                points.push(p);
            }
        }
        for p in &points {
            out.extend(check.run(p, &config.context)?);
        }
    }
    Ok(out)
}

fn catalog_grid<F: Fn(MeasureSpec) -> Vec<CheckParams>>(f: F) -> Vec<CheckParams> {
    MeasureSpec::catalog().into_iter().flat_map(f).collect()
}

fn eq21_grid() -> Vec<CheckParams> {
    catalog_grid(|nu| {
        [0.25, 1.0, 4.0]
            .map(|t| CheckParams {
                measure: Some(nu),
                t: Some(t),
                ..Default::default()
            })
            .to_vec()
    })
}

fn eq21nu_grid() -> Vec<CheckParams> {
    catalog_grid(|nu| {
        let mut v = Vec::new();
        for t in [0.25, 1.0, 4.0] {
            for kappa in 1..=3 {
                v.push(CheckParams {
                    measure: Some(nu),
                    t: Some(t),
                    kappa: Some(kappa),
                    ..Default::default()
                });
            }
        }
        v
    })
}

fn kt1_grid() -> Vec<CheckParams> {
    catalog_grid(|nu| {
        let mut v = Vec::new();
        for kappa in 1..=2 {
            for s in [0.0, 0.3, 0.7] {
                for gamma in [0.0, 0.3, 0.7] {
                    for t in [0.5, 1.0, 2.0] {
                        v.push(CheckParams {
                            measure: Some(nu),
                            s: Some(s),
                            gamma: Some(gamma),
                            t: Some(t),
                            kappa: Some(kappa),
                            ..Default::default()
                        });
                    }
                }
            }
        }
        v
    })
}

fn kt_grid() -> Vec<CheckParams> {
    let mut v = Vec::new();
    for h in [rat(0, 1), rat(1, 3), rat(-5, 2)] {
        for t in [rat(1, 2), rat(1, 1), rat(3, 1)] {
            v.push(CheckParams {
                h: Some(h.clone()),
                t_rat: Some(t),
                ..Default::default()
            });
        }
    }
    v
}

fn convel_grid() -> Vec<CheckParams> {
    [(1, 1, 1, 1), (1, 2, 3, 2), (5, 3, 2, 1), (1, 4, 1, 3)]
        .map(|(an, ad, bn, bd)| CheckParams {
            a: Some(rat(an, ad)),
            b: Some(rat(bn, bd)),
            ..Default::default()
        })
        .to_vec()
}

fn convelem_grid() -> Vec<CheckParams> {
    checks::random_a_lists(20, 5, 7)
        .into_iter()
        .map(|a| CheckParams {
            a_list: Some(a),
            ..Default::default()
        })
        .collect()
}

fn kappaj_grid() -> Vec<CheckParams> {
    (1..=6)
        .map(|j| CheckParams {
            j: Some(j),
            ..Default::default()
        })
        .collect()
}

fn single() -> Vec<CheckParams> {
    vec![CheckParams::default()]
}

fn p5_grid() -> Vec<CheckParams> {
    let mut v: Vec<CheckParams> = (0..=3)
        .map(|m| CheckParams {
            m: Some(m),
            mode: Some("exact".into()),
            points: Some(4096),
            ..Default::default()
        })
        .collect();
    v.push(CheckParams {
        m: Some(4),
        mode: Some("sampled".into()),
        points: Some(4096),
        ..Default::default()
    });
    v
}

fn p6_grid() -> Vec<CheckParams> {
    catalog_grid(|nu| {
        let mut v = Vec::new();
        for k in 1..=2 {
            for w in [0.5, 1.0, 4.0] {
                v.push(CheckParams {
                    measure: Some(nu),
                    k: Some(k),
                    w: Some(w),
                    ..Default::default()
                });
            }
        }
        v
    })
}

fn theorem_grid() -> Vec<CheckParams> {
    catalog_grid(|nu| {
        let mut v = Vec::new();
        for k in 1..=2 {
            for t in [0.5, 1.0] {
                v.push(CheckParams {
                    measure: Some(nu),
                    t: Some(t),
                    k: Some(k),
                    epsilon: Some(DEFAULT_EPSILON),
                    ..Default::default()
                });
            }
        }
        v
    })
}

fn growth_grid() -> Vec<CheckParams> {
    vec![CheckParams {
        epsilon: Some(DEFAULT_EPSILON),
        ..Default::default()
    }]
}

fn sine_grid() -> Vec<CheckParams> {
    vec![CheckParams {
        pairs: Some(10_000),
        seed: Some(1),
        ..Default::default()
    }]
}

fn exact_t(p: &CheckParams) -> Result<Rational, VerifyError> {
    if let Some(t) = &p.t_rat {
        return Ok(t.clone());
    }
    let t = req(&p.t, "T")?;
    Rational::from_float(t).ok_or_else(|| VerifyError::Usage(format!("T = {t} is not finite")))
}

fn growth_run(id: &'static str) -> RunFn {
    match id {
        "minrn" => |p, c| checks::check_growth("minrn", c.budget, p.epsilon.unwrap_or(DEFAULT_EPSILON)),
        "est0" => |p, c| checks::check_growth("est0", c.budget, p.epsilon.unwrap_or(DEFAULT_EPSILON)),
        "roestim" => |p, c| checks::check_growth("roestim", c.budget, p.epsilon.unwrap_or(DEFAULT_EPSILON)),
        "rz1" => |p, c| checks::check_growth("rz1", c.budget, p.epsilon.unwrap_or(DEFAULT_EPSILON)),
        _ => |p, c| checks::check_growth("rz2", c.budget, p.epsilon.unwrap_or(DEFAULT_EPSILON)),
    }
}

fn builtin() -> Vec<FnCheck> {
    vec![
        FnCheck {
            id: "eq21",
            description: "two-sided comparison of the window transform mean with the sinc^2 moment",
            grid: eq21_grid,
            run: |p, _| checks::check_eq21(&req(&p.measure, "measure")?, req(&p.t, "T")?, p.side),
        },
        FnCheck {
            id: "eq21nu",
            description: "sinc^(2 kappa) moment against the transform mean over [-kappa T, kappa T]",
            grid: eq21nu_grid,
            run: |p, _| {
                checks::check_eq21nu(&req(&p.measure, "measure")?, req(&p.t, "T")?, req(&p.kappa, "kappa")?)
            },
        },
        FnCheck {
            id: "kt1",
            description: "Fubini identity for the kappa-fold Fejer window",
            grid: kt1_grid,
            run: |p, _| {
                checks::check_kt1(
                    &req(&p.measure, "measure")?,
                    req(&p.s, "S")?,
                    req(&p.gamma, "gamma")?,
                    req(&p.t, "T")?,
                    req(&p.kappa, "kappa")?,
                )
            },
        },
        FnCheck {
            id: "kt",
            description: "indicator of [H-T, H+T] below three shifted Fejer kernels",
            grid: kt_grid,
            run: |p, _| checks::check_kt(&req(&p.h, "H")?, &exact_t(p)?),
        },
        FnCheck {
            id: "convel",
            description: "convolution of two centred indicators",
            grid: convel_grid,
            run: |p, _| checks::check_convel(&req(&p.a, "A")?, &req(&p.b, "B")?),
        },
        FnCheck {
            id: "convelem",
            description: "support and height of the elementary density",
            grid: convelem_grid,
            run: |p, _| checks::check_convelem(&req(&p.a_list, "a-list")?),
        },
        FnCheck {
            id: "kappaj",
            description: "convolution of dyadic boxes is dominated by the unit box",
            grid: kappaj_grid,
            run: |p, _| checks::check_kappaj(req(&p.j, "J")?),
        },
        FnCheck {
            id: "conv01",
            description: "convolution identities of the unit box",
            grid: single,
            run: |_, _| Ok(checks::check_conv01()),
        },
        FnCheck {
            id: "p5",
            description: "unit box below the weighted shift sum of dyadic products",
            grid: p5_grid,
            run: |p, c| {
                let mode = checks::p5_mode(p.mode.as_deref().unwrap_or("exact"), p.points.unwrap_or(4096))?;
                checks::check_p5(req(&p.m, "m")?, mode, c.budget)
            },
        },
        FnCheck {
            id: "p6",
            description: "window transform mean below the sinc-product integral",
            grid: p6_grid,
            run: |p, c| {
                checks::check_p6(
                    &req(&p.measure, "measure")?,
                    req(&p.k, "k")?,
                    req(&p.w, "W")?,
                    c.budget,
                    c.exponent_offset,
                )
            },
        },
        FnCheck {
            id: "theorem-final",
            description: "window transform mean against the r_k^2 sinc moment",
            grid: theorem_grid,
            run: |p, c| {
                checks::check_theorem_final(
                    &req(&p.measure, "measure")?,
                    req(&p.t, "T")?,
                    req(&p.k, "k")?,
                    req(&p.epsilon, "epsilon")?,
                    c.budget,
                    c.exponent_offset,
                )
            },
        },
        FnCheck {
            id: "minrn",
            description: "stack heights after block k stay above r_k^2/2",
            grid: growth_grid,
            run: growth_run("minrn"),
        },
        FnCheck {
            id: "roestim",
            description: "exponential growth of the stack heights",
            grid: growth_grid,
            run: growth_run("roestim"),
        },
        FnCheck {
            id: "est0",
            description: "maximal index sums and constant exponents per block",
            grid: growth_grid,
            run: growth_run("est0"),
        },
        FnCheck {
            id: "rz1",
            description: "lower bound on gamma_k",
            grid: growth_grid,
            run: growth_run("rz1"),
        },
        FnCheck {
            id: "rz2",
            description: "lower bound on the weighted degree d_k",
            grid: growth_grid,
            run: growth_run("rz2"),
        },
        FnCheck {
            id: "sine-subadditivity",
            description: "|sin nx| <= n |sin x|",
            grid: sine_grid,
            run: |p, _| Ok(checks::check_sine_subadditivity(req(&p.pairs, "pairs")?, req(&p.seed, "seed")?)),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let r = Registry::standard();
        let mut ids = r.ids();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn overrides_collapse_grid() {
        let r = Registry::standard();
        let cfg = SuiteConfig {
            ids: vec!["eq21".into()],
            overrides: CheckParams {
                measure: Some(MeasureSpec::Dirac),
                t: Some(1.0),
                side: Some(Eq21Side::Lower),
                ..Default::default()
            },
            context: Context::default(),
        };
        let reps = run_suite(&r, &cfg).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(reps[0].passed());
    }

    #[test]
    fn unknown_id() {
        let cfg = SuiteConfig {
            ids: vec!["nope".into()],
            ..Default::default()
        };
        assert_eq!(
            run_suite(&Registry::standard(), &cfg).unwrap_err(),
            VerifyError::UnknownCheck("nope".into())
        );
    }
}
