//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (run with `cargo test --test acceptance -- --nocapture` to see the
//! lines for passing criteria as well).

use num_traits::{One, Zero};
use std::time::Instant;
use twistkit::context::{d_relations, ContextLabel, QuotientContext};
use twistkit::derivative::{
    certify_surjective, derivative_pipeline, CertifyOptions,
};
use twistkit::divisor;
use twistkit::family::{check_ds_maximal, check_g_vanishes, FamilyData};
use twistkit::figures;
use twistkit::linalg::{bareiss_dense, ff_rank_det};
use twistkit::modules::ModSymbol;
use twistkit::nil::NilSymbol;
use twistkit::normal_bundle::{build_dg, check_dg_surjective, kernel_basis, kernel_splitting_type};
use twistkit::params::Assignment;
use twistkit::poly::ParamPoly;
use twistkit::scalar::Rat;
use twistkit::splitting::SplittingType;

fn pass(criterion: u32, name: &str) {
    println!("acceptance criterion {criterion} ({name}): pass");
}

#[test]
fn criterion_01_equation_vanishes_with_mutation_guard() {
    let clock = Instant::now();
    for d in 3..=8u32 {
        let family = FamilyData::new(d).unwrap();
        let report = check_g_vanishes(&family, &family.ctx_d).unwrap();
        assert!(report.passed, "d={d}: residues {:?}", report.residue);
        assert!(report.quadric_vanishes, "d={d}");
    }
    // mutation guard: dropping any single defining relation breaks it
    let family = FamilyData::new(3).unwrap();
    let rels = d_relations(3);
    for drop in 0..rels.len() {
        let subset: Vec<_> = rels
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != drop)
            .map(|(_, r)| r.clone())
            .collect();
        let ctx = QuotientContext::from_relations(3, ContextLabel::DPrime, &subset).unwrap();
        let mutated = check_g_vanishes(&family, &ctx).unwrap();
        assert!(!mutated.passed, "relation {drop} was not load-bearing");
    }
    let elapsed = clock.elapsed();
    assert!(
        elapsed.as_secs() < 30,
        "criterion 1 exceeded its 30 s budget: {elapsed:?}"
    );
    pass(1, "pulled-back equation vanishes exactly, d = 3..8, mutation-guarded");
}

#[test]
fn criterion_02_constant_part_is_a_signed_permutation() {
    for d in 3..=8u32 {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let (report, _) = check_dg_surjective(&dg).unwrap();
        assert!(report.is_signed_permutation, "d={d}");
        assert_eq!(report.size, (d * d) as usize, "d={d}");
        assert_eq!(report.e_covered, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);

        // printed-table comparison: b- and a-rows verbatim, e-rows equal
        // the relation-derived values, e0 reported as the documented erratum
        let diff = figures::compare_map_table(&family, &dg).unwrap();
        assert!(diff.ok_up_to_documented(), "d={d}: {:?}", diff.mismatches());
        for row in &diff.rows {
            if row.label == "e0" {
                assert_eq!(row.status, figures::RowStatus::MatchUpToFactor(1), "d={d}");
                // derived value has full T-degree
                let expect = format!("S1^{}*T1^{}", d - 2, d - 1);
                let expect_d3 = format!("S1*T1^{}", d - 1);
                assert!(
                    row.computed.contains(&expect) || (d == 3 && row.computed.contains(&expect_d3)),
                    "d={d}: derived e0 = {}",
                    row.computed
                );
            } else {
                assert_eq!(row.status, figures::RowStatus::Match, "d={d} row {}", row.label);
            }
        }
    }
    pass(2, "twisted constant part is a signed permutation, d = 3..8, e0 erratum documented");
}

#[test]
fn criterion_03_kernel_composition_zero_over_the_full_base() {
    for d in 3..=6u32 {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let (_, inv) = check_dg_surjective(&dg).unwrap();
        let kb = kernel_basis(&family, &dg, &inv).unwrap();
        let composite = dg.as_map().compose(kb.iota()).unwrap();
        assert!(composite.is_zero(), "d={d}: nonzero composite");
    }
    pass(3, "map composed with the kernel is identically zero over the Artin base, d = 3..6");
}

#[test]
fn criterion_04_step_tables_reproduced() {
    for d in 3..=5u32 {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let (_, inv) = check_dg_surjective(&dg).unwrap();
        let (ms, s2, s3, dq) = derivative_pipeline(&family, &dg, &inv).unwrap();

        let f3 = figures::compare_basis_table(&family, &ms);
        assert!(f3.strict(), "d={d} basis table: {:?}", f3.mismatches());

        for (fig, diff) in [
            (4u8, figures::compare_step2(&family, &s2)),
            (5, figures::compare_step3(&family, &dg, &s3)),
            (6, figures::compare_dq(&family, &dq)),
        ] {
            assert!(
                diff.ok_up_to_documented(),
                "d={d} figure {fig}: {:?}",
                diff.mismatches()
            );
            for row in &diff.rows {
                if row.label.starts_with('w') {
                    assert_eq!(
                        row.status,
                        figures::RowStatus::Match,
                        "d={d} figure {fig} row {} must match strictly",
                        row.label
                    );
                } else {
                    assert_eq!(
                        row.status,
                        figures::RowStatus::MatchUpToFactor(2),
                        "d={d} figure {fig} row {} must match up to the documented factor",
                        row.label
                    );
                }
            }
        }
    }
    pass(4, "substitution and step tables reproduced for d = 3..5, v-rows up to the documented factor 2");
}

#[test]
fn criterion_05_derivative_matrix_determinant() {
    let clock = Instant::now();
    for d in 3..=6u32 {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let (_, inv) = check_dg_surjective(&dg).unwrap();
        let (_, _, _, dq) = derivative_pipeline(&family, &dg, &inv).unwrap();
        assert_eq!(dq.size() as u32, d * d - d - 2, "d={d}");

        // symbolic fraction-free elimination
        let out = ff_rank_det(dq.matrix());
        assert_eq!(out.rank, dq.size(), "d={d}");
        let det = out.det.unwrap();
        assert!(!det.is_zero(), "d={d}: zero determinant");

        // certificate with >= 20 prime-field specializations agreeing
        let opts = CertifyOptions {
            specialization_rounds: 24,
            ..CertifyOptions::default()
        };
        let cert = certify_surjective(&dq, opts).unwrap();
        assert!(cert.evidence.rounds >= 20);
        assert_eq!(cert.evidence.determinant_agreements, cert.evidence.rounds);
        assert_eq!(cert.evidence.full_rank_rounds, cert.evidence.rounds);
        assert_eq!(cert.determinant.as_ref(), Some(&det), "d={d}");

        if d == 3 {
            // frozen value: +-4 C_1a C_1b C_za^2, re-derived by dense
            // elimination as well as the default route
            let ring = &family.ring;
            let expect = &(&(&ParamPoly::<Rat>::int(ring.clone(), 4)
                * &ParamPoly::param(ring.clone(), ring.c_1a()))
                * &ParamPoly::param(ring.clone(), ring.c_1b()))
                * &ParamPoly::param(ring.clone(), ring.c_za()).pow(2);
            assert!(det == expect || det == -&expect, "d=3 det = {det}");
            let dense = bareiss_dense(dq.matrix()).det.unwrap();
            assert_eq!(dense, det);
        }
    }
    let elapsed = clock.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 5 exceeded its 60 s budget: {elapsed:?}"
    );
    pass(5, "derivative matrix is square with nonzero determinant, d = 3..6; d = 3 value frozen");
}

#[test]
fn criterion_06_kernel_splitting_type() {
    for d in 3..=6u32 {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let split = kernel_splitting_type(&dg).unwrap();
        let zeros = (d * d - d - 2) as usize;
        let mut expect = vec![0i64; zeros];
        expect.push(1);
        assert_eq!(split, SplittingType::new(expect), "d={d}: got {split}");
        let stats = split.stats();
        assert_eq!(stats.positivity, 1, "d={d}");
        assert!(stats.globally_generated, "d={d}");
    }
    pass(6, "kernel splitting type is trivial^(d^2-d-2) + one twist, d = 3..6");
}

#[test]
fn criterion_07_divisor_identities_and_necessity_grid() {
    let clock = Instant::now();
    for d in 2..=20i64 {
        for n in d..=500 {
            let c = divisor::chern_tev_x(n, d).unwrap();
            let psi = c.psi_view();
            assert_eq!(psi.c_h, n + 1 - d * d);
            assert_eq!(psi.c_psi, n - d * (d + 1) / 2);
            assert_eq!(divisor::DivClass::from_psi_view(psi), c);
            let ambient = divisor::chern_tev_pn(n).unwrap();
            assert_eq!(ambient, divisor::DivClass::new(n, -(n - 1)));
            assert_eq!(
                ambient.psi_view(),
                divisor::PsiView {
                    c_psi: n,
                    c_h: n + 1
                }
            );
            let feasible = matches!(
                divisor::necessity_check(n, d, None).unwrap(),
                divisor::Feasibility::Feasible { .. }
            );
            assert_eq!(feasible, n >= d * d, "n={n} d={d}");
        }
    }
    let elapsed = clock.elapsed();
    assert!(
        elapsed.as_millis() < 1000,
        "criterion 7 exceeded its 1 s budget: {elapsed:?}"
    );
    pass(7, "divisor-class identities and the necessity threshold hold on the full grid");
}

#[test]
fn criterion_08_schedule_property_suite() {
    let clock = Instant::now();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let brute_force = |a0: i64, b1: i64, a: i64| -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for r_prime in 0..a0 {
            let rest = a - 2 * r_prime;
            if rest % a0 == 0 {
                let m = rest / a0;
                if m >= 0 && m * b1 - r_prime > 0 {
                    out.push((m, r_prime));
                }
            }
        }
        out
    };
    for _ in 0..50 {
        let a0 = rng.gen_range(1i64..=12);
        let b1 = rng.gen_range(1i64..=8);
        let a1 = 2 * a0 * ((a0 + b1 + 2 * b1 - 1) / (2 * b1));
        for a in a1..=(a1 + 200) {
            if a0 % 2 == 0 && a % 2 != 0 {
                assert!(divisor::psi_schedule(a0, b1, a).is_err());
                continue;
            }
            let s = divisor::psi_schedule(a0, b1, a).unwrap();
            assert_eq!(s.a, s.m * a0 + 2 * s.r_prime, "a0={a0} b1={b1} a={a}");
            assert!(0 <= s.r_prime && s.r_prime < a0);
            assert!(s.m * b1 - s.r_prime > 0);
            assert!(
                brute_force(a0, b1, a).contains(&(s.m, s.r_prime)),
                "a0={a0} b1={b1} a={a}: ({}, {}) not a brute-force solution",
                s.m,
                s.r_prime
            );
        }
    }
    let elapsed = clock.elapsed();
    assert!(
        elapsed.as_secs() < 5,
        "criterion 8 exceeded its 5 s budget: {elapsed:?}"
    );
    pass(8, "twist schedules satisfy all invariants and match brute force, 50 random families");
}

#[test]
fn criterion_09_conic_invariants_spot_values() {
    let c = divisor::conic_invariants(9, 3).unwrap();
    assert_eq!(c.total_dim, 20);
    assert_eq!(c.sing_dim_bound, 14);
    assert_eq!(c.fiber_dim, 4);
    assert_eq!(c.omega_twist, -1);
    assert!(c.fano);
    let c = divisor::conic_invariants(4, 2).unwrap();
    assert_eq!(c.fiber_dim, 1);
    pass(9, "pointed-conic dimension and adjunction invariants at the spot values");
}

// Criterion 10 exercises the command-line interface and lives in the CLI
// crate's own integration tests (crates/twistkit-cli/tests/acceptance_cli.rs).

#[test]
fn fiber_locus_maximality_alongside() {
    // exercised by the verify pipeline at the distinguished point and at
    // two more rational points
    let family = FamilyData::new(4).unwrap();
    for (s0, s1) in [
        (Rat::one(), Rat::zero()),
        (Rat::zero(), Rat::one()),
        (Rat::one(), Rat::one()),
    ] {
        let report = check_ds_maximal(&family, &s0, &s1).unwrap();
        assert!(report.passed, "s = ({s0}:{s1})");
    }
}

#[test]
fn pipeline_consistency_h_m_rows() {
    // the canonical correction, reduced at the distinguished point, has the
    // step-three rows as its components
    let d = 5u32;
    let family = FamilyData::new(d).unwrap();
    let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
    let (_, inv) = check_dg_surjective(&dg).unwrap();
    let kb = kernel_basis(&family, &dg, &inv).unwrap();
    let ctx_s = QuotientContext::d_s(d, Rat::one(), Rat::zero()).unwrap();
    let class = twistkit::normal_bundle::h_m_class(&kb, &ctx_s).unwrap();
    // spot-check one coefficient against the printed step-three table
    let ring = &family.ring;
    let b = class.get(&ModSymbol::B(2, 1)).expect("b_(2,1) coefficient");
    let w_component = b
        .coefficient(0, 0)
        .and_then(|a| a.nilpotent_coeff(&NilSymbol::w(2, 1)))
        .cloned()
        .unwrap_or_else(|| ParamPoly::zero(ring.clone()));
    let expect = &ParamPoly::c_pair_or_zero(ring, 2, 0) - &ParamPoly::c_pair_or_zero(ring, 2, 1);
    assert_eq!(w_component, expect);
}

#[test]
fn certificate_refusal_on_tampered_input() {
    let family = FamilyData::new(3).unwrap();
    let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
    let (_, inv) = check_dg_surjective(&dg).unwrap();
    let (_, _, _, dq) = derivative_pipeline(&family, &dg, &inv).unwrap();
    let cert = certify_surjective(&dq, CertifyOptions::default()).unwrap();
    assert_eq!(cert.condition_names(), vec!["C_1a", "C_1b", "C_za"]);
    let tampered = dq.substituted("C_1a", &Rat::zero()).unwrap();
    assert!(certify_surjective(&tampered, CertifyOptions::default()).is_err());
    let mut asn = Assignment::empty(family.ring.clone());
    asn.set(family.ring.c_1a(), Rat::zero());
    assert_eq!(
        cert.violated_conditions(&asn).unwrap(),
        vec!["C_1a".to_string()]
    );
}

#[test]
fn cone_extension_acceptance_spots() {
    let e = twistkit::derivative::extend_to_n(3, 12).unwrap();
    assert_eq!(e.extra_summands, 3);
    assert!(e.quotient_dims_match);
    assert!(twistkit::derivative::extend_to_n(3, 8).is_err());
    let id = twistkit::derivative::extend_to_n(3, 9).unwrap();
    assert_eq!(id.extra_summands, 0);
}
