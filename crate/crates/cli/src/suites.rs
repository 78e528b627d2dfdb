//! Verification suites. Each suite produces a flat list of checks.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use privstate_core::error::BlockFormViolation;
use privstate_core::families::{self, REGISTER};
use privstate_core::linalg::{self, CMatrix, C64};
use privstate_core::measures::{self, closed, PPT_TOL};
use privstate_core::qudit::{self, BellIndex};
use privstate_core::states::{self, KA, KB, SA, SB};
use privstate_core::{
    family_construct, maps, opt, random, BitsValue, Error, Family, Operator, OptConfig, Povm, StateFamilyParams,
};

use crate::bounds;
use crate::config::{RunConfig, Suite};
use crate::report::{Check, Value, VerificationReport};

type CoreResult<T> = privstate_core::Result<T>;

/// What a check closure measured.
pub(crate) enum Outcome {
    /// Measured and reference numbers.
    Close(f64, f64),
    /// A boolean claim.
    Flag(bool),
    /// A divergence-like value against a finite reference.
    Bits(BitsValue, f64),
}

pub(crate) struct Runner<'a> {
    pub cfg: &'a RunConfig,
    pub checks: Vec<Check>,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg, checks: Vec::new() }
    }

    pub fn add(&mut self, id: String, anchor: &str, tol: f64, f: impl FnOnce() -> CoreResult<Outcome>) {
        let start = Instant::now();
        let tol = self.cfg.tol_or(tol);
        let check = match f() {
            Ok(Outcome::Close(m, r)) => Check::close(id, anchor, m, r, tol),
            Ok(Outcome::Flag(b)) => Check::flag(id, anchor, b),
            Ok(Outcome::Bits(v, r)) => Check::new(id, anchor, Value::bits(&v), Value::Number(r), tol),
            Err(e) => Check::error(id, anchor, e),
        };
        self.checks.push(check.timed(start));
    }
}

/// Runs the selected suites in parallel and returns the sorted report.
pub fn run_verify(cfg: &RunConfig) -> VerificationReport {
    let checks: Vec<Check> = cfg.suites.par_iter().flat_map(|&s| run_suite(s, cfg)).collect();
    VerificationReport::new(crate::metadata(cfg), checks)
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Vec<Check> {
    let mut r = Runner::new(cfg);
    match suite {
        Suite::BellBasis => bell_basis(&mut r),
        Suite::Bnot => bnot(&mut r),
        Suite::Reversible => reversible(&mut r),
        Suite::Twisting => twisting(&mut r),
        Suite::Blockform => blockform(&mut r),
        Suite::EntropicIdentities => entropic(&mut r),
        Suite::Families => family_checks(&mut r),
        Suite::Distill2m => distill(&mut r),
        Suite::Bounds => bound_checks(&mut r),
        Suite::Ppt => ppt(&mut r),
        Suite::OptSandwich => opt_sandwich(&mut r),
    }
    r.checks
}

fn build(f: Family, d: usize) -> CoreResult<Operator> {
    Ok(family_construct(&StateFamilyParams::new(f, d))?.state)
}

fn en(rho: &Operator) -> CoreResult<f64> {
    Ok(measures::log_negativity(rho, &rho.layout().labels_with_party(privstate_core::Party::B))?.value)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn all_indices(d: usize) -> Vec<BellIndex> {
    (0..d).flat_map(|i| (0..d).map(move |j| BellIndex { i, j })).collect()
}

fn bell_basis(r: &mut Runner) {
    for d in r.cfg.dims_or(&[2, 3, 4, 5]) {
        r.add(format!("bell-basis.d{d:02}.orthonormal"), "Bell vectors are orthonormal", 1e-12, || {
            let vs: Vec<CMatrix> = all_indices(d).into_iter().map(|b| qudit::bell_vector(d, b)).collect();
            let mut worst = 0.0f64;
            for (a, va) in vs.iter().enumerate() {
                for (b, vb) in vs.iter().enumerate() {
                    let ip = (va.adjoint() * vb)[(0, 0)];
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((ip - C64::new(want, 0.0)).norm());
                }
            }
            Ok(Outcome::Close(worst, 0.0))
        });
        r.add(format!("bell-basis.d{d:02}.weyl-commutation"), "clock and shift satisfy ZX = ωXZ", 1e-12, || {
            let (x, z) = (qudit::shift(d), qudit::clock(d));
            let lhs = &z * &x;
            let rhs = &x * &z * linalg::root_of_unity(1, d);
            Ok(Outcome::Close(linalg::max_abs_diff(&lhs, &rhs), 0.0))
        });
        r.add(format!("bell-basis.d{d:02}.weyl-order"), "X^d = Z^d = 1", 1e-12, || {
            let id = linalg::identity(d);
            let dx = linalg::max_abs_diff(&linalg::mat_pow(&qudit::shift(d), d as i64), &id);
            let dz = linalg::max_abs_diff(&linalg::mat_pow(&qudit::clock(d), d as i64), &id);
            Ok(Outcome::Close(dx.max(dz), 0.0))
        });
        r.add(
            format!("bell-basis.d{d:02}.correlated-projector"),
            "maximally correlated projector is the sum of φ_0k",
            1e-12,
            || {
                let sum = (0..d).fold(CMatrix::zeros(d * d, d * d), |acc, k| {
                    acc + qudit::bell_projector(d, BellIndex { i: 0, j: k })
                });
                Ok(Outcome::Close(linalg::max_abs_diff(&sum, &qudit::max_corr_matrix(d)), 0.0))
            },
        );
    }
    r.add("bell-basis.d02.phi-01".into(), "φ_01 = (|00> - |11>)/√2 for qubits", 1e-12, || {
        let s = 1.0 / 2f64.sqrt();
        let want = CMatrix::from_column_slice(4, 1, &[linalg::real(s), linalg::ZERO, linalg::ZERO, linalg::real(-s)]);
        Ok(Outcome::Close(linalg::max_abs_diff(&qudit::bell_vector(2, BellIndex { i: 0, j: 1 }), &want), 0.0))
    });
    r.add("bell-basis.d03.phi-10".into(), "φ_10 = (|10> + |21> + |02>)/√3 for qutrits", 1e-12, || {
        let s = 1.0 / 3f64.sqrt();
        let mut want = CMatrix::zeros(9, 1);
        for idx in [3, 7, 2] {
            want[(idx, 0)] = C64::new(s, 0.0);
        }
        Ok(Outcome::Close(linalg::max_abs_diff(&qudit::bell_vector(3, BellIndex { i: 1, j: 0 }), &want), 0.0))
    });
    for d in [2usize, 3] {
        r.add(
            format!("bell-basis.d{d:02}.cnot-clifford"),
            "CNOT maps X^iZ^j ⊗ X^kZ^l to X^iZ^(j-l) ⊗ X^(i+k)Z^l",
            1e-12,
            || {
                let cx = qudit::cnot_matrix(d);
                let mut worst = 0.0f64;
                let di = d as i64;
                for i in 0..di {
                    for j in 0..di {
                        for k in 0..di {
                            for l in 0..di {
                                let lhs = &cx * qudit::weyl(d, i, j).kronecker(&qudit::weyl(d, k, l));
                                let rhs = qudit::weyl(d, i, j - l).kronecker(&qudit::weyl(d, i + k, l)) * &cx;
                                worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
                            }
                        }
                    }
                }
                Ok(Outcome::Close(worst, 0.0))
            },
        );
    }
}

fn bnot(r: &mut Runner) {
    let budget = privstate_core::layout::dim_budget();
    for d in r.cfg.dims_or(&[2, 3, 4]) {
        if d.pow(4) > budget {
            r.add(format!("bnot.d{d:02}"), "BNOT Bell-index rule", 0.0, || {
                Err(Error::BudgetExceeded { dim: d.pow(4), budget })
            });
            continue;
        }
        let b = qudit::bnot_matrix(d);
        for c in all_indices(d) {
            for t in all_indices(d) {
                let id = format!("bnot.d{d:02}.c{}{}.t{}{}", c.i, c.j, t.i, t.j);
                r.add(id, "BNOT maps φ_ij ⊗ φ_kl to φ_(i,j-l) ⊗ φ_(k+i,l)", 1e-10, || {
                    let input = qudit::bell_vector(d, c).kronecker(&qudit::bell_vector(d, t));
                    let (c2, t2) = qudit::bnot_rule(d, c, t);
                    let want = qudit::bell_vector(d, c2).kronecker(&qudit::bell_vector(d, t2));
                    Ok(Outcome::Close(linalg::pure_trace_distance(&want, &(&b * input)), 0.0))
                });
            }
        }
    }
}

fn reversible(r: &mut Runner) {
    let seed = r.cfg.seed;
    for (s, dims) in [(2usize, (2usize, 2usize)), (3, (3, 3))] {
        let mut g = rng(seed, s as u64);
        for n in 0..20 {
            let rho = random::key_correlated_state(&mut g, 2, dims);
            let base = format!("reversible.s{s}x{s}.r{n:02}");
            r.add(
                format!("{base}.identity"),
                "reversible map equals the phase-flip mixture tagged by φ_0k",
                1e-9,
                || {
                    let rho = rho.clone()?;
                    let e = maps::reversible_map(&rho)?;
                    Ok(Outcome::Close(e.trace_distance(&maps::reversible_reference(&rho)?)?, 0.0))
                },
            );
            r.add(format!("{base}.round-trip"), "inverse map recovers the key-correlated input", 1e-10, || {
                let rho = rho?;
                let back = maps::reversible_inverse(&maps::reversible_map(&rho)?)?;
                Ok(Outcome::Close(back.trace_distance(&rho)?, 0.0))
            });
        }
    }
    for d in [2usize, 3] {
        r.add(
            format!("reversible.swap.d{d:02}.flipped-orthogonal"),
            "private input gives orthogonal flags γ and Z(γ)",
            1e-12,
            || {
                let g = build(Family::Swap, d)?;
                let z = maps::phase_flip(&g, 1, KA)?;
                Ok(Outcome::Close(linalg::trace(&(g.matrix() * z.matrix())).norm(), 0.0))
            },
        );
        r.add(format!("reversible.swap.d{d:02}.round-trip"), "inverse map recovers the swap pbit", 1e-10, || {
            let g = build(Family::Swap, d)?;
            let e = maps::reversible_map(&g)?;
            Ok(Outcome::Close(maps::reversible_inverse(&e)?.trace_distance(&g)?, 0.0))
        });
    }
    r.add("reversible.reject-uncorrelated".into(), "states with bit-flip errors are rejected", 0.0, || {
        let l = states::pbit_layout(2, (1, 1))?;
        let rho = Operator::maximally_mixed(l);
        Ok(Outcome::Flag(matches!(maps::reversible_map(&rho), Err(Error::NotKeyCorrelated(_)))))
    });
}

fn twisting(r: &mut Runner) {
    for d in [2usize, 3] {
        r.add(
            format!("twisting.swap.d{d:02}.unitary-is-swap"),
            "twisting unitary of the swap pbit is the swap operator",
            1e-12,
            || {
                let u = states::bell_twisting_unitary(&families::swap_spec(d)?)?;
                Ok(Outcome::Close(linalg::max_abs_diff(&u, &qudit::swap_operator(d)), 0.0))
            },
        );
    }
    let mut g = rng(r.cfg.seed, 100);
    for (m, key) in [(1u32, 2usize), (2, 4)] {
        for n in 0..5 {
            let spec = random::bell_private_spec(&mut g, key, (2, 2));
            let base = format!("twisting.m{m}.r{n:02}");
            let s2 = spec.clone();
            r.add(
                format!("{base}.round-trip"),
                "Bell private state equals its twisted form T(Φ ⊗ σ)T†",
                1e-10,
                || {
                    let gamma = states::bell_private_state(&s2)?;
                    let back = states::private_state(&states::bell_twisting(&s2)?)?;
                    Ok(Outcome::Close(back.trace_distance(&gamma)?, 0.0))
                },
            );
            let s3 = spec.clone();
            r.add(format!("{base}.untwist"), "untwisting and tracing the shield leaves Φ", 1e-10, || {
                let tw = states::bell_twisting(&s3)?;
                let gamma = states::private_state(&tw)?;
                let phi = qudit::bell_state(key, BellIndex { i: 0, j: 0 })?;
                Ok(Outcome::Close(maps::untwist_trace(&gamma, &tw)?.trace_distance(&phi)?, 0.0))
            });
            r.add(format!("{base}.key-attack"), "attacked pbit equals T(Φ̂ ⊗ σ)T†", 1e-10, || {
                let tw = states::bell_twisting(&spec)?;
                let gamma = states::private_state(&tw)?;
                let phi_hat = states::key_attack(&qudit::bell_state(key, BellIndex { i: 0, j: 0 })?)?;
                let sigma = Operator::density(qudit::shield_pair_layout(2)?, tw.sigma.clone())?;
                let want =
                    phi_hat.tensor(&sigma)?.reorder(&[KA, SA, KB, SB])?.conjugate(tw.twisting_operator()?.matrix())?;
                Ok(Outcome::Close(states::key_attack(&gamma)?.trace_distance(&want)?, 0.0))
            });
        }
    }
    r.add("twisting.trivial".into(), "identity twisting gives Φ ⊗ σ", 1e-12, || {
        let sigma = linalg::identity(4) / linalg::real(4.0);
        let spec = privstate_core::PrivateStateSpec {
            key_dim: 2,
            shield_dims: (2, 2),
            twisting: vec![linalg::identity(4); 2],
            sigma: sigma.clone(),
        };
        let gamma = states::private_state(&spec)?;
        let want = qudit::bell_state(2, BellIndex { i: 0, j: 0 })?
            .tensor(&Operator::density(qudit::shield_pair_layout(2)?, sigma)?)?
            .reorder(&[KA, SA, KB, SB])?;
        Ok(Outcome::Close(gamma.max_abs_diff(&want)?, 0.0))
    });
}

fn blockform(r: &mut Runner) {
    r.add("blockform.scalar".into(), "Y = 1 with trivial shields gives Φ", 1e-12, || {
        let y = CMatrix::from_element(1, 1, linalg::ONE);
        let g = states::block_form_state(&y, (1, 1), 1)?;
        let phi = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        Ok(Outcome::Close(linalg::max_abs_diff(g.matrix(), &phi), 0.0))
    });
    for d in [2usize, 3] {
        r.add(format!("blockform.swap.d{d:02}"), "Y = σU_σ reproduces the swap pbit", 1e-10, || {
            let spec = families::swap_spec(d)?;
            let tw = states::bell_twisting(&spec)?;
            let y = &tw.sigma * states::bell_twisting_unitary(&spec)?;
            let g = states::block_form_state(&y, (d, d), 1)?;
            Ok(Outcome::Close(g.trace_distance(&build(Family::Swap, d)?)?, 0.0))
        });
    }
    r.add(
        "blockform.diagonal".into(),
        "Y = diag(1/2, -1/2) gives φ_00 and φ_01 flagged by the shield",
        1e-12,
        || {
            let y = diag(&[0.5, -0.5]);
            let g = states::block_form_state(&y, (2, 1), 1)?;
            let spec = privstate_core::BellPrivateSpec {
                probs: vec![0.5, 0.5],
                sigmas: vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
                shield_dims: (2, 1),
            };
            Ok(Outcome::Close(g.max_abs_diff(&states::bell_private_state(&spec)?)?, 0.0))
        },
    );
    let mut g = rng(r.cfg.seed, 200);
    for n in 0..5 {
        let spec = random::bell_private_spec(&mut g, 2, (2, 2));
        r.add(format!("blockform.random.r{n:02}"), "Y = σU_σ reproduces a random Bell pbit", 1e-10, || {
            let tw = states::bell_twisting(&spec)?;
            let y = &tw.sigma * states::bell_twisting_unitary(&spec)?;
            let g = states::block_form_state(&y, (2, 2), 1)?;
            Ok(Outcome::Close(g.trace_distance(&states::bell_private_state(&spec)?)?, 0.0))
        });
    }
    let reject = |y: CMatrix, want: fn(&BlockFormViolation) -> bool| {
        move || {
            Ok(Outcome::Flag(match states::block_form_state(&y, (2, 1), 1) {
                Err(Error::BlockForm(v)) => want(&v),
                _ => false,
            }))
        }
    };
    let mut nn = CMatrix::zeros(2, 2);
    nn[(0, 1)] = linalg::ONE;
    r.add(
        "blockform.reject.not-normal".into(),
        "non-normal Y is rejected",
        0.0,
        reject(nn, |v| matches!(v, BlockFormViolation::NotNormal(_))),
    );
    r.add(
        "blockform.reject.trace-norm".into(),
        "Y with trace norm other than 1 is rejected",
        0.0,
        reject(linalg::identity(2), |v| matches!(v, BlockFormViolation::TraceNorm(_))),
    );
    let mut np = CMatrix::zeros(2, 2);
    np[(0, 0)] = linalg::real(0.5);
    np[(1, 1)] = linalg::c(0.0, 0.5);
    r.add(
        "blockform.reject.power".into(),
        "Y whose key-size power is not positive is rejected",
        0.0,
        reject(np, |v| matches!(v, BlockFormViolation::PowerNotPositive(_))),
    );
}

fn diag(v: &[f64]) -> CMatrix {
    CMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { linalg::real(v[i]) } else { linalg::ZERO })
}

fn entropic(r: &mut Runner) {
    let seed = r.cfg.seed;
    let mut g = rng(seed, 300);
    for n in 0..20 {
        let spec = random::bell_private_spec(&mut g, 2, (2, 2));
        let s2 = spec.clone();
        r.add(format!("entropic.random.r{n:02}.hat"), "D(γ‖γ̂) equals the key length", 1e-9, || {
            let gamma = states::bell_private_state(&s2)?;
            Ok(Outcome::Bits(measures::relative_entropy(&gamma, &states::key_attack(&gamma)?)?, 1.0))
        });
        r.add(format!("entropic.random.r{n:02}.marginal"), "D(γ‖γ°) equals H(p)", 1e-9, || {
            let gamma = states::bell_private_state(&spec)?;
            let prod = states::marginal_product(&gamma)?;
            Ok(Outcome::Bits(measures::relative_entropy(&gamma, &prod)?, linalg::shannon_bits(&spec.probs)))
        });
    }
    r.add("entropic.swap.d02.key-marginal-hashing".into(), "swap key marginal hashing is 1 - H(3/4)", 1e-6, || {
        let gamma = build(Family::Swap, 2)?;
        let keys = gamma.marginal(&[KA, KB])?;
        let v = measures::hashing_lower_bound(&keys, &[KB])?;
        Ok(Outcome::Bits(v, closed::key_marginal(1, &[0.75, 0.25])))
    });
    r.add("entropic.swap.d02.hat".into(), "D(γ‖γ̂) = 1 for the swap pbit", 1e-9, || {
        let gamma = build(Family::Swap, 2)?;
        Ok(Outcome::Bits(measures::relative_entropy(&gamma, &states::key_attack(&gamma)?)?, 1.0))
    });
    r.add("entropic.uniform.marginal-is-hat".into(), "uniform Bell pbit has γ° = γ̂", 1e-12, || {
        let mut g = rng(seed, 301);
        let mut spec = random::bell_private_spec(&mut g, 2, (2, 2));
        spec.probs = vec![0.5, 0.5];
        let gamma = states::bell_private_state(&spec)?;
        let d = states::marginal_product(&gamma)?.max_abs_diff(&states::key_attack(&gamma)?)?;
        Ok(Outcome::Close(d, 0.0))
    });
    for d in [2usize, 4] {
        r.add(format!("entropic.flower.d{d:02}.hat"), "D(γ‖γ̂) = 1 for the flower pbit", 1e-9, || {
            let gamma = build(Family::Flower, d)?;
            Ok(Outcome::Bits(measures::relative_entropy(&gamma, &states::key_attack(&gamma)?)?, 1.0))
        });
    }
}

fn supported(f: Family, d: usize) -> bool {
    match f {
        Family::Flower => d.is_power_of_two() && d >= 2,
        Family::TwoMExample => d == 2,
        _ => d >= 2,
    }
}

fn default_dims(f: Family) -> &'static [usize] {
    match f {
        Family::Swap => &[2, 3, 4, 5, 6, 7, 8],
        Family::Fourier => &[2, 3, 4, 9],
        Family::Flower => &[2, 4, 8],
        Family::Ppt | Family::PptInvariant | Family::Alpha | Family::AlphaTilde => &[4, 9],
        Family::TwoMExample => &[2],
    }
}

/// Family and dimension pairs selected by the config.
fn family_grid(cfg: &RunConfig, families: &[Family]) -> Vec<(Family, usize)> {
    match cfg.family {
        Some(f) => cfg.dims_or(default_dims(f)).into_iter().map(|d| (f, d)).collect(),
        None => families
            .iter()
            .flat_map(|&f| {
                let dims = cfg.dims_or(default_dims(f));
                dims.into_iter().filter(move |&d| supported(f, d)).map(move |d| (f, d))
            })
            .collect(),
    }
}

fn closed_en(f: Family, d: usize) -> Option<f64> {
    match f {
        Family::Swap => Some(closed::en_swap(d)),
        Family::Fourier => Some(closed::en_fourier(d)),
        Family::Flower => Some(closed::en_flower(d)),
        Family::Ppt | Family::PptInvariant => Some(0.0),
        _ => None,
    }
}

fn family_checks(r: &mut Runner) {
    for (f, d) in family_grid(r.cfg, &Family::ALL) {
        let base = format!("families.{f}.d{d:02}");
        r.add(format!("{base}.density"), "family member is a density operator", 1e-10, || {
            let g = build(f, d)?;
            let worst = (g.trace().re - 1.0).abs().max((-g.min_eigenvalue()).max(0.0));
            Ok(Outcome::Close(worst, 0.0))
        });
        if let Some(want) = closed_en(f, d) {
            let anchor = match f {
                Family::Swap => "swap log-negativity is log2(1 + 1/d); E_N = log 3/2 at d = 2",
                Family::Fourier => "fourier log-negativity is log2(1 + 1/√d)",
                Family::Flower => "flower log-negativity is log2(1 + √d)",
                _ => "PPT family has zero log-negativity",
            };
            r.add(format!("{base}.log-negativity"), anchor, 1e-8, || Ok(Outcome::Close(en(&build(f, d)?)?, want)));
        }
        match f {
            Family::Flower => r.add(format!("{base}.hashing"), "flower hashing bound equals one bit", 1e-9, || {
                Ok(Outcome::Bits(measures::hashing_lower_bound(&build(f, d)?, &[KB, SB])?, 1.0))
            }),
            Family::Swap => {
                r.add(format!("{base}.key-attack-product"), "attacked swap pbit is Φ̂ ⊗ τ", 1e-12, || {
                    let hat = states::key_attack(&build(f, d)?)?;
                    let phi_hat = states::key_attack(&qudit::bell_state(2, BellIndex { i: 0, j: 0 })?)?;
                    let tau = Operator::maximally_mixed(qudit::shield_pair_layout(d)?);
                    let want = phi_hat.tensor(&tau)?.reorder(&[KA, SA, KB, SB])?;
                    Ok(Outcome::Close(hat.max_abs_diff(&want)?, 0.0))
                })
            }
            Family::TwoMExample => {
                r.add(format!("{base}.key-correlated"), "both key pairs are perfectly correlated", 1e-12, || {
                    let g = build(f, d)?;
                    let corr = qudit::max_corr_matrix(2);
                    let mut worst = 0.0f64;
                    for pair in [["KA1", "KB1"], ["KA2", "KB2"]] {
                        worst = worst.max(g.conjugate_local(&corr, &pair)?.max_abs_diff(&g)?);
                    }
                    Ok(Outcome::Close(worst, 0.0))
                })
            }
            Family::Alpha | Family::AlphaTilde => {
                r.add(format!("{base}.register"), "flag register is a qubit held by Alice", 0.0, || {
                    let g = build(f, d)?;
                    let p = g.layout().part(REGISTER)?;
                    Ok(Outcome::Flag(p.dim == 2 && p.party == privstate_core::Party::A))
                })
            }
            _ => {}
        }
    }
    r.add("families.two_m_example.m2-rejected".into(), "two_m example beyond m = 1 exceeds the budget", 0.0, || {
        Ok(Outcome::Flag(match build(Family::TwoMExample, 4) {
            Err(e) => e.to_string().contains("16384"),
            Ok(_) => false,
        }))
    });
}

fn distill(r: &mut Runner) {
    r.add("distill-2m.output".into(), "local unitaries map the 2m example to Φ ⊗ Φ ⊗ τ", 1e-10, || {
        let g = build(Family::TwoMExample, 2)?;
        let out = maps::distill_2m_circuit(&g)?;
        Ok(Outcome::Close(out.trace_distance(&maps::distill_2m_target()?)?, 0.0))
    });
    r.add("distill-2m.key-attack".into(), "D(γ‖γ̂) = 2 for the 2m example", 1e-9, || {
        let g = build(Family::TwoMExample, 2)?;
        Ok(Outcome::Bits(measures::relative_entropy(&g, &states::key_attack(&g)?)?, 2.0))
    });
    r.add(
        "distill-2m.candidate.computational".into(),
        "computational measurement of the shield yields m bits",
        1e-8,
        || {
            let g = build(Family::TwoMExample, 2)?;
            let hat = states::key_attack(&g)?;
            let v = measures::measured_relative_entropy(&g, &hat, &Povm::computational(2), &[SA], true)?;
            Ok(Outcome::Bits(v, 1.0))
        },
    );
    r.add(
        "distill-2m.candidate.conjugate-after-circuit".into(),
        "conjugate-basis key measurement after the circuit yields 2m bits",
        1e-8,
        || {
            let g = build(Family::TwoMExample, 2)?;
            let og = maps::distill_2m_circuit(&g)?;
            let oh = maps::distill_2m_circuit(&states::key_attack(&g)?)?;
            let conj = Povm::conjugate(og.layout(), &["KA1", "KA2"])?;
            Ok(Outcome::Bits(measures::measured_relative_entropy(&og, &oh, &conj, &["KA1", "KA2"], true)?, 2.0))
        },
    );
    let m = r.cfg.m;
    if m != 1 {
        r.add(format!("distill-2m.m{m}"), "2m example construction", 0.0, || {
            build(Family::TwoMExample, 1usize << m).map(|_| Outcome::Flag(true))
        });
    }
}

fn bound_checks(r: &mut Runner) {
    let fams = [Family::Swap, Family::Fourier, Family::Flower, Family::Ppt, Family::PptInvariant];
    let grid: Vec<(Family, usize)> = match r.cfg.family {
        Some(f) if !fams.contains(&f) => Vec::new(),
        _ => family_grid(r.cfg, &[Family::Swap]),
    };
    let cfg = r.cfg;
    for (f, d) in grid {
        let start = Instant::now();
        match bounds::compute_row(f, d) {
            Ok(row) => r.checks.extend(bounds::row_checks(&row, cfg).into_iter().map(|c| c.timed(start))),
            Err(e) => r.checks.push(Check::error(format!("bounds.{f}.d{d:02}"), "bound table row", e)),
        }
    }
    if r.cfg.family.is_none() || r.cfg.family == Some(Family::Flower) {
        r.add("bounds.flower.d02.hash-lb".into(), "flower hashing lower bound is one bit", 1e-9, || {
            Ok(Outcome::Close(bounds::compute_row(Family::Flower, 2)?.hash_lb, 1.0))
        });
    }
    for d in [4usize, 9] {
        r.add(
            format!("bounds.alpha.d{d:02}.divergence-bound"),
            "D(α‖α̃) is at most (1 + log2 e)/(1 + √d)",
            0.0,
            || {
                let v = measures::relative_entropy(&build(Family::Alpha, d)?, &build(Family::AlphaTilde, d)?)?;
                Ok(Outcome::Flag(v.finite && v.value <= closed::alpha_divergence_bound(d) + 1e-8))
            },
        );
        r.add(format!("bounds.alpha.d{d:02}.divergence"), "D(α‖α̃) matches its closed form", 1e-8, || {
            let v = measures::relative_entropy(&build(Family::Alpha, d)?, &build(Family::AlphaTilde, d)?)?;
            Ok(Outcome::Bits(v, closed::alpha_divergence(d)))
        });
    }
    let m = r.cfg.m;
    r.add(format!("bounds.er-oneway-ebit.m{m}"), "one-way key of the ebit bound is log2(2^m + 1) - 1", 1e-9, || {
        let v = measures::closed_form("er_oneway_ebit", &measures::ClosedFormParams::m(m))?;
        Ok(Outcome::Bits(v, ((1u64 << m) as f64 + 1.0).log2() - 1.0))
    });
    r.add(
        "bounds.swap.d02.log-negativity-additive".into(),
        "log-negativity is additive on two swap copies",
        1e-8,
        || {
            let g = build(Family::Swap, 2)?;
            Ok(Outcome::Close(en(&g.tensor_power(2)?)?, 2.0 * closed::en_swap(2)))
        },
    );
}

fn ppt(r: &mut Runner) {
    for d in r.cfg.dims_or(&[4, 9]) {
        r.add(format!("ppt.ppt.d{d:02}.ppt"), "ξ_U is PPT", 0.0, || {
            let (ok, _) = measures::is_ppt(&build(Family::Ppt, d)?, &[KB, SB], PPT_TOL)?;
            Ok(Outcome::Flag(ok))
        });
        r.add(format!("ppt.ppt.d{d:02}.min-pt-eigenvalue"), "ξ_U has no PT eigenvalue below -1e-10", 0.0, || {
            let (_, min) = measures::is_ppt(&build(Family::Ppt, d)?, &[KB, SB], PPT_TOL)?;
            Ok(Outcome::Flag(min >= -1e-10))
        });
        r.add(format!("ppt.ppt_invariant.d{d:02}.self-transpose"), "ξ_Γ equals its partial transpose", 1e-12, || {
            let x = build(Family::PptInvariant, d)?;
            Ok(Outcome::Close(x.max_abs_diff(&x.partial_transpose(&[KB, SB])?)?, 0.0))
        });
        r.add(format!("ppt.ppt_invariant.d{d:02}.ppt"), "ξ_Γ is PPT", 0.0, || {
            let (ok, _) = measures::is_ppt(&build(Family::PptInvariant, d)?, &[KB, SB], PPT_TOL)?;
            Ok(Outcome::Flag(ok))
        });
    }
}

/// Optimizer settings used by the suites and the optimize subcommand.
pub fn opt_config(cfg: &RunConfig) -> OptConfig {
    OptConfig { restarts: cfg.restarts, seed: cfg.seed, ..OptConfig::default() }
}

fn opt_sandwich(r: &mut Runner) {
    let cfg = r.cfg;
    for d in cfg.dims_or(&[2, 3]) {
        let base = format!("opt-sandwich.swap.d{d:02}");
        let start = Instant::now();
        let run = || -> CoreResult<_> {
            let g = build(Family::Swap, d)?;
            let hat = states::key_attack(&g)?;
            let labels = [KA, SA];
            let oc = opt_config(cfg);
            Ok((opt::optimize_da(&g, &hat, &labels, &oc)?, opt::optimize_da(&g, &hat, &labels, &oc)?))
        };
        match run() {
            Ok((a, b)) => {
                let tol = cfg.tol_or(1e-6);
                let upper = closed::en_swap(d);
                let ms = start.elapsed();
                let mk = |c: Check| {
                    let mut c = c;
                    c.runtime_ms = ms.as_millis() as u64;
                    c
                };
                r.checks.push(mk(Check::flag(
                    format!("{base}.upper"),
                    "optimized D_A is at most log2(1 + 1/d)",
                    a.best.finite && a.best.value <= upper + tol,
                )));
                r.checks.push(mk(Check::flag(
                    format!("{base}.deterministic"),
                    "two runs with the same seed agree bit for bit",
                    a.best.value.to_bits() == b.best.value.to_bits() && a.finals() == b.finals(),
                )));
                r.checks.push(mk(Check::flag(
                    format!("{base}.above-computational"),
                    "optimum is at least the computational-basis value",
                    a.best.value >= a.restarts[0].start_value - 1e-10,
                )));
            }
            Err(e) => r.checks.push(Check::error(base, "optimizer sandwich", e)),
        }
    }
    r.add("opt-sandwich.hat-vs-hat".into(), "D_A(ρ̂‖ρ̂) = 0", 1e-8, || {
        let hat = states::key_attack(&build(Family::Swap, 2)?)?;
        let oc = OptConfig { restarts: 2, max_evals: 200, ..opt_config(cfg) };
        Ok(Outcome::Bits(opt::optimize_da(&hat, &hat, &[KA, SA], &oc)?.best, 0.0))
    });
}
