//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use qsc_core::channels::{
    compose, identity_channel, random_channel, random_channel_with, replacement_channel, uniform_channel,
    unitary_channel, Channel,
};
use qsc_core::divergences::{contraction_trace, diamond_distance};
use qsc_core::entropies::{
    apply_on_a_side, condition_on_input, ecme, ecme_value, guess_probability_oracle, guess_probability_sdp, h_min_cond,
    h_min_ext, random_ds_superchannel, tensor_bipartite, BipartiteChannel, ClassicalInstrumentFamily,
};
use qsc_core::linalg::{kron, partial_trace, permute_systems, CMatrix, SystemShape, C64};
use qsc_core::majorization::{
    extract_witness, majorize_direct, majorize_minimax, ChannelFamily, MajorizationCertificate, Verdict, DEFAULT_TOL,
};
use qsc_core::random::{haar_unitary, random_density, random_probabilities, random_pure, rng_from_seed};
use qsc_core::sdp::{solve_feasibility, Cone, ConicProgram, Term};
use qsc_core::supermaps::{
    apply, choi_from_realization, is_completely_uniformity_preserving, is_completely_unital_preserving,
    is_doubly_stochastic, is_superchannel, random_ru_superchannel, random_superchannel, realize, superchannel_from_pair,
    DimSpec, Superchannel,
};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(t: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if t <= limit {
        Ok(())
    } else {
        Err(format!("{} took {:.1?}, limit {:?}", what, t, limit))
    }
}

fn random_bipartite(d: DimSpec, rng: &mut ChaCha12Rng) -> BipartiteChannel {
    let rank = rng.gen_range(1..=3);
    let c = random_channel_with(d.a0 * d.b0, d.a1 * d.b1, rank, rng).unwrap();
    BipartiteChannel::from_channel(&c, d).unwrap()
}

fn prep(v: &CMatrix) -> Channel {
    Channel::state(&CMatrix::projector(v)).unwrap()
}

fn ket(a: f64, b: f64) -> CMatrix {
    let n = (a * a + b * b).sqrt();
    CMatrix::from_real(&[&[a / n], &[b / n]])
}

fn family(cs: Vec<Channel>) -> ChannelFamily {
    ChannelFamily::from_channels(cs).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let u = h_min_ext(&uniform_channel(2, 2)).map_err(|e| e.to_string())?;
    let pure = CMatrix::projector(&CMatrix::basis(2, 0));
    let r = h_min_ext(&replacement_channel(2, &pure).unwrap()).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1), "normalization")?;
    check(
        (u - 1.0).abs() <= 1e-7 && r.abs() <= 1e-7,
        format!("uniform {:.9}, pure replacement {:.2e}, {:.2?}", u, r, start.elapsed()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let omega = random_bipartite(DimSpec::new(2, 2, 2, 2), &mut rng);
        let e = ecme(&omega).map_err(|e| e.to_string())?;
        worst = worst.max(e.gap());
    }
    within(start.elapsed(), Duration::from_secs(300), "duality")?;
    check(worst <= 1e-6, format!("worst |primal - dual| {:.2e} over 100, {:.1?}", worst, start.elapsed()))
}

fn ecme_of(omega: &BipartiteChannel) -> Result<f64, String> {
    ecme_value(omega).map_err(|e| e.to_string())
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(3);
    let d = DimSpec::new(2, 2, 2, 2);
    let mut exact: f64 = 0.0;
    for _ in 0..30 {
        // replacement channel: H_min(B1|A1) of the output state
        let sigma = random_density(4, rng.gen_range(1..=4), &mut rng);
        let omega = BipartiteChannel::replacement(2, 2, &sigma, 2, 2).map_err(|e| e.to_string())?;
        let hc = h_min_cond(&sigma, 2, 2).map_err(|e| e.to_string())?.value;
        exact = exact.max((ecme_of(&omega)? - hc).abs());
        // local channels: only the B part matters
        let psi = random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap();
        let phi = random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap();
        let v = ecme_of(&BipartiteChannel::product(&psi, &phi))?;
        exact = exact.max((v - h_min_ext(&phi).map_err(|e| e.to_string())?).abs());
        // bounds from the normalized Choi marginals
        let omega = random_bipartite(d, &mut rng);
        let v = ecme_of(&omega)?;
        let j = omega.choi.scale(1.0 / 4.0);
        let a1b1 = partial_trace(&j, &d.shape(), &[1, 3]).unwrap();
        let upper = h_min_cond(&a1b1, 2, 2).map_err(|e| e.to_string())?.value;
        // H_min(A B1 | B0): move B0 in front of A0 A1 B1
        let s = SystemShape::new(&[4, 2, 2]);
        let regrouped = permute_systems(&j, &s, &[1, 0, 2]).unwrap();
        let lower = h_min_cond(&regrouped, 2, 8).map_err(|e| e.to_string())?.value - 2.0;
        exact = exact.max(v - upper).max(lower - v);
    }
    if exact > 1e-6 {
        return Err(format!("parts 1, 2, 6: worst deviation {:.2e}", exact));
    }

    let mut add: f64 = 0.0;
    for _ in 0..30 {
        let omega = random_bipartite(d, &mut rng);
        let gamma = random_bipartite(DimSpec::new(1, 2, 1, 2), &mut rng);
        let joint = ecme_of(&tensor_bipartite(&omega, &gamma))?;
        add = add.max((joint - ecme_of(&omega)? - ecme_of(&gamma)?).abs());
    }

    let pool: Vec<Superchannel> =
        (0..20).map(|_| random_superchannel(d, rng.gen_range(1..=3), &mut rng).unwrap()).collect();
    let mut mono = f64::INFINITY;
    for k in 0..30 {
        let omega = random_bipartite(d, &mut rng);
        let out = apply_on_a_side(&pool[k % pool.len()], &omega).map_err(|e| e.to_string())?;
        mono = mono.min(ecme_of(&out)? - ecme_of(&omega)?);
    }

    let gammas: Vec<CMatrix> = (0..10).map(|_| random_density(2, rng.gen_range(1..=2), &mut rng)).collect();
    let mut cond = f64::INFINITY;
    for k in 0..30 {
        let omega = random_bipartite(DimSpec::new(4, 4, 1, 2), &mut rng);
        let marg = condition_on_input(&omega, 2, 2, 2, 2, &gammas[k % gammas.len()]).map_err(|e| e.to_string())?;
        cond = cond.min(ecme_of(&marg)? - ecme_of(&omega)?);
    }
    check(
        add <= 1e-5 && mono >= -1e-5 && cond >= -1e-5,
        format!("parts 1,2,6 {:.2e}; additivity {:.2e}; monotonicity margin {:.2e}; conditioning margin {:.2e}", exact, add, mono, cond),
    )
}

fn classical_instruments(rng: &mut ChaCha12Rng) -> ClassicalInstrumentFamily {
    let (a0, a1) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
    let (b0, b1) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let mut maps = vec![vec![CMatrix::zeros(a0 * a1, a0 * a1); b1]; b0];
    for row in maps.iter_mut() {
        for i in 0..a0 {
            let p = random_probabilities(a1 * b1, rng);
            for o in 0..a1 {
                for (x, m) in row.iter_mut().enumerate() {
                    m[(i * a1 + o, i * a1 + o)] = C64::new(p[o * b1 + x], 0.0);
                }
            }
        }
    }
    ClassicalInstrumentFamily::new(a0, a1, maps).unwrap()
}

fn quantum_instruments(rng: &mut ChaCha12Rng) -> ClassicalInstrumentFamily {
    let (b0, b1) = (rng.gen_range(1..=2), rng.gen_range(2..=3));
    let mut maps = Vec::new();
    for _ in 0..b0 {
        let c = random_channel_with(2, 2 * b1, rng.gen_range(1..=3), rng).unwrap();
        let row = (0..b1)
            .map(|x| {
                let k = kron(&CMatrix::identity(4), &CMatrix::basis(b1, x).adjoint());
                k.matmul(&c.choi).matmul(&k.adjoint())
            })
            .collect();
        maps.push(row);
    }
    ClassicalInstrumentFamily::new(2, 2, maps).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = rng_from_seed(4);
    let mut classical: f64 = 0.0;
    for k in 0..50 {
        let fam = classical_instruments(&mut rng);
        let oracle = guess_probability_oracle(&fam, k).map_err(|e| e.to_string())?;
        if !oracle.exact {
            return Err("classical instance did not use enumeration".into());
        }
        let sdp = guess_probability_sdp(&fam.to_bipartite()).map_err(|e| e.to_string())?;
        classical = classical.max((sdp - oracle.value).abs());
    }
    let (mut above, mut spread): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    for k in 0..20 {
        let fam = quantum_instruments(&mut rng);
        let oracle = guess_probability_oracle(&fam, 100 + k).map_err(|e| e.to_string())?;
        let sdp = guess_probability_sdp(&fam.to_bipartite()).map_err(|e| e.to_string())?;
        above = above.max(oracle.value - sdp);
        spread = spread.max((sdp - oracle.value).abs());
    }
    check(
        classical <= 1e-5 && above <= 1e-6 && spread <= 1e-3,
        format!("classical |diff| {:.2e}; quantum seesaw - sdp max {:.2e}, |diff| max {:.2e}", classical, above, spread),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = rng_from_seed(5);
    let d = DimSpec::new(2, 2, 2, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let s = random_superchannel(d, rng.gen_range(1..=4), &mut rng).unwrap();
        let r = realize(&s).map_err(|e| e.to_string())?;
        let back = choi_from_realization(&r, d).map_err(|e| e.to_string())?;
        worst = worst.max(back.choi.distance(&s.choi));
    }
    check(worst <= 1e-8, format!("worst Frobenius error {:.2e} over 50", worst))
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(6);
    let tol = 1e-9;
    for k in 0..50 {
        let s = random_ru_superchannel(2, 2, rng.gen_range(1..=4), &mut rng);
        let ok = is_doubly_stochastic(&s, tol).holds
            && is_completely_uniformity_preserving(&s, tol).holds
            && is_completely_unital_preserving(&s, tol).holds;
        if !ok {
            return Err(format!("random-unitary instance {} fails a property", k));
        }
    }
    let mut ds = 0;
    for k in 0..50 {
        let s = random_ds_superchannel(2, 2, &mut rng);
        if is_doubly_stochastic(&s, tol).holds {
            ds += 1;
            if !is_completely_uniformity_preserving(&s, tol).holds {
                return Err(format!("doubly stochastic instance {} is not uniformity preserving", k));
            }
        }
    }
    let zero = CMatrix::diag(&[1.0, 0.0]);
    let s = superchannel_from_pair(&replacement_channel(2, &zero).unwrap(), &identity_channel(2)).unwrap();
    let separated = is_superchannel(&s, tol).holds
        && is_completely_uniformity_preserving(&s, tol).holds
        && !is_doubly_stochastic(&s, tol).holds;
    check(separated, format!("50 random-unitary pass all three; {} doubly stochastic pass CUP; CUP-not-DS separated: {}", ds, separated))
}

fn criterion_7() -> Outcome {
    let mut rng = rng_from_seed(7);
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let theta = random_ds_superchannel(2, 2, &mut rng);
        let phi = random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap();
        let out = apply(&theta, &phi).map_err(|e| e.to_string())?;
        let diff = h_min_ext(&out).map_err(|e| e.to_string())? - h_min_ext(&phi).map_err(|e| e.to_string())?;
        margin = margin.min(diff);
    }
    check(margin >= -1e-6, format!("worst h(out) - h(in) {:.2e} over 100", margin))
}

fn problem_eps(src: &ChannelFamily, dst: &ChannelFamily) -> f64 {
    let norm = src.channels.iter().chain(&dst.channels).map(|c| c.choi.frobenius_norm()).fold(1.0, f64::max);
    1e-6 * norm
}

fn separation(c: &MajorizationCertificate) -> f64 {
    c.witness.as_ref().map_or(f64::NEG_INFINITY, |w| w.separation())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(8);
    let a = random_channel(2, 2, 2, 81).unwrap();
    let b = random_channel(2, 2, 3, 82).unwrap();
    let post = random_channel(2, 2, 2, 83).unwrap();
    let id = identity_channel(2);
    let examples: Vec<(&str, ChannelFamily, ChannelFamily, Verdict)> = vec![
        ("dst = src", family(vec![a.clone(), b.clone()]), family(vec![a.clone(), b.clone()]), Verdict::Feasible),
        ("single member", family(vec![a.clone()]), family(vec![random_channel(2, 2, 4, 84).unwrap()]), Verdict::Feasible),
        (
            "identity twice",
            family(vec![id.clone(), id.clone()]),
            family(vec![random_channel(2, 2, 2, 85).unwrap(), random_channel(2, 2, 2, 86).unwrap()]),
            Verdict::Infeasible,
        ),
        (
            "distinguishability",
            family(vec![prep(&ket(1.0, 0.0)), prep(&ket(1.0, 1.0))]),
            family(vec![prep(&ket(1.0, 0.0)), prep(&ket(0.0, 1.0))]),
            Verdict::Infeasible,
        ),
        (
            "post-processing",
            family(vec![a.clone(), b.clone()]),
            family(vec![compose(&post, &a).unwrap(), compose(&post, &b).unwrap()]),
            Verdict::Feasible,
        ),
    ];
    let mut min_sep = f64::INFINITY;
    for (name, src, dst, want) in &examples {
        let c = majorize_direct(src, dst, DEFAULT_TOL).map_err(|e| e.to_string())?;
        if c.verdict != *want {
            return Err(format!("example `{}`: {:?}, expected {:?}", name, c.verdict, want));
        }
        if *want == Verdict::Infeasible {
            min_sep = min_sep.min(separation(&c));
        }
    }

    let z = CMatrix::diag(&[1.0, -1.0]);
    let mut agree = 0;
    let mut worst_residual: f64 = 0.0;
    for k in 0..30 {
        let (src, dst, want) = if k % 2 == 0 {
            let theta = random_superchannel(DimSpec::new(2, 2, 2, 2), rng.gen_range(1..=3), &mut rng).unwrap();
            let src = family(vec![
                random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap(),
                random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap(),
            ]);
            let dst = family(src.channels.iter().map(|c| apply(&theta, c).unwrap()).collect());
            (src, dst, Verdict::Feasible)
        } else {
            let src = family(vec![
                random_channel_with(2, 2, 4, &mut rng).unwrap(),
                random_channel_with(2, 2, 4, &mut rng).unwrap(),
            ]);
            let u = haar_unitary(2, &mut rng);
            let dst = family(vec![unitary_channel(&u), unitary_channel(&z.matmul(&u))]);
            (src, dst, Verdict::Infeasible)
        };
        let c = majorize_direct(&src, &dst, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let m = majorize_minimax(&src, &dst).map_err(|e| e.to_string())?;
        if c.verdict != want {
            return Err(format!("random instance {}: {:?}, expected {:?}", k, c.verdict, want));
        }
        if (c.verdict == Verdict::Feasible) == m.majorizes(problem_eps(&src, &dst)) {
            agree += 1;
        }
        match c.verdict {
            Verdict::Feasible => worst_residual = worst_residual.max(c.residual.unwrap_or(f64::INFINITY)),
            _ => {
                min_sep = min_sep.min(separation(&c));
                let w = extract_witness(&src.to_cq(), &dst.to_cq(), &m).map_err(|e| e.to_string())?;
                min_sep = min_sep.min(w.separation());
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(600), "majorization")?;
    check(
        agree == 30 && min_sep > 1e-4 && worst_residual <= 1e-6,
        format!(
            "5 examples ok; direct/minimax agree {}/30; min witness gap {:.3e}; max residual {:.2e}; {:.1?}",
            agree,
            min_sep,
            worst_residual,
            start.elapsed()
        ),
    )
}

fn qubit_trace_norm(m: &CMatrix) -> f64 {
    // traceless Hermitian 2x2: eigenvalues ±sqrt(m00² + |m01|²)
    2.0 * (m[(0, 0)].re.powi(2) + m[(0, 1)].norm_sqr()).sqrt()
}

fn criterion_9() -> Outcome {
    let mut rng = rng_from_seed(9);
    let mut margin = f64::INFINITY;
    for _ in 0..20 {
        let theta = random_superchannel(DimSpec::new(2, 2, 2, 2), rng.gen_range(1..=3), &mut rng).unwrap();
        let f = random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap();
        let g = random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap();
        let before = contraction_trace(&f, &g).map_err(|e| e.to_string())?;
        let after = contraction_trace(&apply(&theta, &f).unwrap(), &apply(&theta, &g).unwrap()).map_err(|e| e.to_string())?;
        margin = margin.min(before - after);
    }
    let mut repl: f64 = 0.0;
    for _ in 0..20 {
        let r1 = random_density(2, rng.gen_range(1..=2), &mut rng);
        let r2 = random_density(2, rng.gen_range(1..=2), &mut rng);
        let d = diamond_distance(&replacement_channel(2, &r1).unwrap(), &replacement_channel(2, &r2).unwrap())
            .map_err(|e| e.to_string())?
            .value;
        repl = repl.max((d - qubit_trace_norm(&(&r1 - &r2))).abs());
    }
    check(
        margin >= -1e-6 && repl <= 1e-7,
        format!("worst contraction decrease margin {:.2e}; replacement |diamond - trace norm| {:.2e}", margin, repl),
    )
}

/// Is there a CPTP map E with E(src_x) = dst_x for every x?
fn cptp_feasible(src: &[CMatrix], dst: &[CMatrix]) -> bool {
    let (di, dout) = (src[0].rows, dst[0].rows);
    let n = di * dout;
    let mut p = ConicProgram::new();
    let v = p.add_var(n, Cone::Psd);
    let shape = SystemShape::new(&[di, dout]);
    let tp = Term::from_map(v, n, |m| partial_trace(m, &shape, &[0]).unwrap());
    p.add_constraint(Cone::Zero, vec![tp], CMatrix::identity(di));
    for (r, s) in src.iter().zip(dst) {
        let lift = kron(&r.transpose(), &CMatrix::identity(dout));
        let out = Term::from_map(v, n, |m| partial_trace(&lift.matmul(m), &shape, &[1]).unwrap());
        p.add_constraint(Cone::Zero, vec![out], s.clone());
    }
    solve_feasibility(&p, DEFAULT_TOL).feasible
}

fn criterion_10() -> Outcome {
    let mut rng = rng_from_seed(10);
    let u = CMatrix::identity(2).scale(0.5);
    let mut agree = 0;
    for k in 0..20 {
        let n = rng.gen_range(2..=3);
        let src: Vec<CMatrix> = (0..n).map(|_| &random_density(2, 2, &mut rng).scale(0.7) + &u.scale(0.3)).collect();
        let dst: Vec<CMatrix> = if k % 2 == 0 {
            let e = random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap();
            src.iter().map(|r| qsc_core::channels::apply(&e, r).unwrap()).collect()
        } else {
            let w = haar_unitary(2, &mut rng);
            (0..n)
                .map(|x| {
                    let v = if x == 0 { ket(1.0, 0.0) } else { random_pure(2, &mut rng) };
                    let v = if x == 1 { ket(1.0, 1.0) } else { v };
                    let wv = w.matmul(&v);
                    CMatrix::projector(&wv)
                })
                .collect()
        };
        let to_fam = |ms: &[CMatrix]| family(ms.iter().map(|m| Channel::state(m).unwrap()).collect());
        let cert = majorize_direct(&to_fam(&src), &to_fam(&dst), DEFAULT_TOL).map_err(|e| e.to_string())?;
        let oracle = cptp_feasible(&src, &dst);
        if (cert.verdict == Verdict::Feasible) == oracle && cert.verdict != Verdict::Boundary {
            agree += 1;
        }
    }
    check(agree == 20, format!("agreement {}/20", agree))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 normalization", criterion_1),
        ("2 strong duality", criterion_2),
        ("3 ECME property suite", criterion_3),
        ("4 guessing oracle equivalence", criterion_4),
        ("5 realization roundtrip", criterion_5),
        ("6 noise-model implications", criterion_6),
        ("7 monotonicity under DS superchannels", criterion_7),
        ("8 majorization decisions", criterion_8),
        ("9 divergence data processing", criterion_9),
        ("10 state specialization oracle", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{} criterion {}: {} [{:.1?}]", tag, name, detail, start.elapsed());
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
