//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs at full ensemble sizes by default (tens of minutes on one core).
//! `ACCEPTANCE_QUICK=1` shrinks every ensemble for a fast smoke pass; its
//! verdicts are indicative only. FAIL lines are reported without failing
//! the test run; `ACCEPTANCE_STRICT=1` turns any FAIL into a nonzero exit.

use qubit_chaos::eigensolve::{
    dense_eigen, dense_full_diag, iterative_extremal, LanczosOptions, Side,
};
use qubit_chaos::ensemble::{
    run_ensemble, Couplings, EnsembleSummary, ExperimentConfig, Kind, LevelRange, PointData,
};
use qubit_chaos::model::{
    BandBasis, BandHamiltonian, DisorderRealization, FullHamiltonian, Lattice, ModelParams,
};
use qubit_chaos::output::tables;
use qubit_chaos::spectral::eta_from_spacings;
use qubit_chaos::thermo::{fd_fit, fd_occupations, occupation_numbers};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Exp1, StandardNormal, Uniform};
use std::time::Instant;

struct Suite {
    quick: bool,
    results: Vec<(u32, bool)>,
}

impl Suite {
    /// Full ensemble size, or a tenth of it (at least `floor`) in quick mode.
    fn nd(&self, full: usize, floor: usize) -> usize {
        if self.quick {
            (full / 10).max(floor)
        } else {
            full
        }
    }

    fn report(&mut self, id: u32, pass: bool, what: &str, detail: String, started: Instant) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} {verdict}: {what} | {detail} ({:.1} s)",
            started.elapsed().as_secs_f64()
        );
        self.results.push((id, pass));
    }
}

fn config(
    kind: Kind,
    rows: usize,
    cols: usize,
    couplings: Couplings,
    realizations: usize,
) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.rows = rows;
    c.cols = cols;
    c.couplings = couplings;
    c.realizations = realizations;
    c
}

fn run(cfg: &ExperimentConfig) -> EnsembleSummary {
    let s = run_ensemble(cfg).expect("ensemble runs");
    assert!(s.is_complete(), "failed realizations: {:?}", s.failures);
    s
}

fn etas(s: &EnsembleSummary) -> Vec<f64> {
    s.points
        .iter()
        .map(|p| match &p.data {
            PointData::Eta { eta, .. } => *eta,
            d => panic!("unexpected {d:?}"),
        })
        .collect()
}

fn sigmas(s: &EnsembleSummary) -> Vec<(f64, f64)> {
    s.points
        .iter()
        .map(|p| match &p.data {
            PointData::Sigma { sigma_fd, sigma_s } => (sigma_fd.mean(), sigma_s.mean()),
            d => panic!("unexpected {d:?}"),
        })
        .collect()
}

fn fmt(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion1(s: &mut Suite) {
    let t = Instant::now();
    let nd = s.nd(2000, 200);
    let e = etas(&run(&config(
        Kind::EtaScan,
        3,
        3,
        Couplings::Absolute(vec![0.05, 0.8]),
        nd,
    )));
    let pass = e[0] >= 0.85 && e[1] <= 0.15;
    s.report(
        1,
        pass,
        "eta limits, n=9",
        format!(
            "N_D={nd}: eta(J=0.05)={:.3} (>= 0.85), eta(J=0.8)={:.3} (<= 0.15)",
            e[0], e[1]
        ),
        t,
    );
}

fn criterion2(s: &mut Suite) {
    let t = Instant::now();
    let nd = s.nd(500, 50);
    let grid = Couplings::Scaled(vec![2.0, 3.7, 6.0]);
    let e9 = etas(&run(&config(Kind::EtaScan, 3, 3, grid.clone(), nd)));
    let e12 = etas(&run(&config(Kind::EtaScan, 3, 4, grid, nd)));
    let inside = |e: &[f64]| (0.10..=0.35).contains(&e[1]);
    let drop = |e: &[f64]| (e[0] - e[2]).abs();
    let pass = inside(&e9) && inside(&e12) && drop(&e12) > drop(&e9);
    s.report(
        2,
        pass,
        "chaos border at Jn/delta=3.7",
        format!(
            "N_D={nd}: eta(3.7) n=9 {:.3}, n=12 {:.3} (in [0.10, 0.35]); |eta(2)-eta(6)| n=9 {:.3} < n=12 {:.3}",
            e9[1],
            e12[1],
            drop(&e9),
            drop(&e12)
        ),
        t,
    );
}

fn criterion3(s: &mut Suite) {
    let t = Instant::now();
    let nd = s.nd(200, 20);
    let sum = run(&config(
        Kind::PsHistogram,
        3,
        4,
        Couplings::Absolute(vec![0.05, 0.4]),
        nd,
    ));
    let mut pooled = Vec::new();
    let mut binned = Vec::new();
    for p in &sum.points {
        if let PointData::Eta {
            eta,
            histogram: Some(h),
            ..
        } = &p.data
        {
            pooled.push(*eta);
            binned.push(h.eta());
        }
    }
    let pass = pooled[0] >= 0.9
        && pooled[1] <= 0.1
        && (binned[0] - 1.0).abs() <= 0.1
        && binned[1].abs() <= 0.1;
    s.report(
        3,
        pass,
        "P(s) crossover, n=12",
        format!(
            "N_D={nd}: pooled eta J=0.05 {:.3} (>= 0.9), J=0.4 {:.3} (<= 0.1); histogram eta {:.3} vs Poisson 1, {:.3} vs Wigner 0 (+-0.1)",
            pooled[0], pooled[1], binned[0], binned[1]
        ),
        t,
    );
}

fn criterion4(s: &mut Suite) {
    let t = Instant::now();
    let sum = run(&config(
        Kind::EtaVsEnergy,
        3,
        4,
        Couplings::Absolute(vec![0.4, 0.05]),
        15,
    ));
    let curve = |i: usize| match &sum.points[i].data {
        PointData::Energy(rows) => rows.iter().map(|r| r.eta).collect::<Vec<_>>(),
        d => panic!("unexpected {d:?}"),
    };
    let (chaotic, regular) = (curve(0), curve(1));
    // window 0 is the outermost edge window
    let interior_max = chaotic[1..].iter().cloned().fold(f64::MIN, f64::max);
    let regular_min = regular.iter().cloned().fold(f64::MAX, f64::min);
    let pass = interior_max <= 0.2 && regular_min >= 0.7;
    s.report(
        4,
        pass,
        "energy-resolved eta, n=12, N_D=15",
        format!(
            "J=0.4 interior max {interior_max:.3} (<= 0.2) [{}]; J=0.05 min {regular_min:.3} (>= 0.7) [{}]",
            fmt(&chaotic),
            fmt(&regular)
        ),
        t,
    );
}

fn criterion5(s: &mut Suite) {
    let t = Instant::now();
    let grid = vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
    let (nd9, nd12) = (s.nd(2000, 200), s.nd(200, 20));
    let c9 = sigmas(&run(&config(
        Kind::SigmaScan,
        3,
        3,
        Couplings::Scaled(grid.clone()),
        nd9,
    )));
    let c12 = sigmas(&run(&config(
        Kind::SigmaScan,
        3,
        4,
        Couplings::Scaled(grid.clone()),
        nd12,
    )));
    let f9: Vec<f64> = c9.iter().map(|c| c.0).collect();
    let f12: Vec<f64> = c12.iter().map(|c| c.0).collect();
    let d: Vec<f64> = f12.iter().zip(&f9).map(|(a, b)| a - b).collect();
    let crossing = (0..d.len() - 1)
        .find(|&i| d[i] > 0.0 && d[i + 1] <= 0.0)
        .map(|i| {
            let frac = d[i] / (d[i] - d[i + 1]);
            grid[i] + frac * (grid[i + 1] - grid[i])
        });
    let last = grid.len() - 1;
    let (drop9, drop12) = (f9[0] - f9[last], f12[0] - f12[last]);
    let pass = crossing.is_some_and(|x| (2.5..=4.0).contains(&x)) && drop12 > drop9;
    s.report(
        5,
        pass,
        "thermalization border",
        format!(
            "N_D={nd9}/{nd12}: crossing at Jn/delta={} (in [2.5, 4.0]); sigma_FD drop 2->5 n=9 {drop9:.3} < n=12 {drop12:.3}; n=9 [{}] n=12 [{}]",
            crossing.map_or("none".into(), |x| format!("{x:.2}")),
            fmt(&f9),
            fmt(&f12)
        ),
        t,
    );
}

struct Profile {
    t_fd: f64,
    s_q: f64,
    excitation: f64,
}

fn profiles(rows: usize, cols: usize, js: &[f64], levels: LevelRange, nd: usize) -> Vec<Profile> {
    let mut c = config(
        Kind::OccupationProfile,
        rows,
        cols,
        Couplings::Absolute(js.to_vec()),
        nd,
    );
    c.levels = Some(levels);
    run(&c)
        .points
        .iter()
        .map(|p| match &p.data {
            PointData::Occupations(o) => Profile {
                t_fd: o.fit.t_fd,
                s_q: o.s_q.mean(),
                excitation: o.excitation.mean(),
            },
            d => panic!("unexpected {d:?}"),
        })
        .collect()
}

fn criterion6(s: &mut Suite) {
    let t = Instant::now();
    let levels = LevelRange { lo: 95, hi: 100 };
    let small = profiles(3, 4, &[0.3, 0.03], levels, s.nd(100, 20));
    let split = small[0].s_q > 3.0 * small[1].s_q && small[1].s_q <= 1.5 && small[0].t_fd > 0.0;
    let reduced = format!(
        "n=12 variant: S_q {:.2} vs {:.2}, T_FD {:.3}",
        small[0].s_q, small[1].s_q, small[0].t_fd
    );
    if s.quick {
        s.report(
            6,
            split,
            "FD fit, levels 95-100 (quick: n=12 variant only)",
            reduced,
            t,
        );
        return;
    }
    let full = profiles(4, 4, &[0.3, 0.03], levels, 100);
    let (c, r) = (&full[0], &full[1]);
    let pass = (c.t_fd - 0.25).abs() <= 0.05 && (c.s_q - 8.0).abs() <= 1.0 && r.s_q <= 1.5 && split;
    s.report(
        6,
        pass,
        "FD fit, n=16, levels 95-100, N_D=100",
        format!(
            "J=0.3: T_FD={:.3} (0.25+-0.05), S_q={:.2} (8+-1), dE={:.2}; J=0.03: S_q={:.2} (<= 1.5), T_FD={:.3}; {reduced}",
            c.t_fd, c.s_q, c.excitation, r.s_q, r.t_fd
        ),
        t,
    );
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn criterion7(s: &mut Suite) {
    let t = Instant::now();
    let nd = s.nd(100, 20);
    let (fd, ss) = sigmas(&run(&config(
        Kind::SigmaScan,
        3,
        4,
        Couplings::Absolute(vec![0.4]),
        nd,
    )))[0];
    let ratio = ss / fd;

    // single eigenstate m=5 of individual realizations, n=16
    let mut c = config(
        Kind::OccupationProfile,
        4,
        4,
        Couplings::Absolute(vec![0.03, 0.3]),
        9,
    );
    c.levels = Some(LevelRange { lo: 5, hi: 5 });
    let single: Vec<f64> = run(&c)
        .points
        .iter()
        .map(|p| match &p.data {
            PointData::Occupations(o) => {
                median(o.states.iter().map(|r| r.state.sigma_fd).collect())
            }
            d => panic!("unexpected {d:?}"),
        })
        .collect();
    let within2 = |x: f64, reference: f64| x >= reference / 2.0 && x <= reference * 2.0;
    let pass =
        (1.25..=1.55).contains(&ratio) && within2(single[0], 6.3e-2) && within2(single[1], 1.4e-2);
    s.report(
        7,
        pass,
        "sigma relations",
        format!(
            "n=12 J=0.4 N_D={nd}: sigma_s/sigma_FD={ratio:.3} (in [1.25, 1.55]); n=16 m=5 median of 9: J=0.03 {:.3e} (6.3e-2 x/2), J=0.3 {:.3e} (1.4e-2 x/2)",
            single[0], single[1]
        ),
        t,
    );
}

fn criterion8(s: &mut Suite) {
    let t = Instant::now();
    let sum = run(&config(
        Kind::TemperatureComparison,
        3,
        4,
        Couplings::Absolute(vec![0.3]),
        2,
    ));
    let PointData::Temperatures(rows) = &sum.points[0].data else {
        panic!("temperature rows")
    };
    let band = |lo: f64, hi: f64| {
        rows.iter()
            .filter(move |r| (lo..hi).contains(&r.e_over_b.abs()))
    };

    let fd_can = band(0.1, 0.35)
        .map(|r| ((r.t_fd - r.t_can) / r.t_can).abs())
        .fold(0.0, f64::max);
    let dev_th = |lo, hi| {
        let v: Vec<f64> = band(lo, hi)
            .map(|r| {
                ((r.t_th - r.t_can) / r.t_can)
                    .abs()
                    .max(((r.t_th - r.t_fd) / r.t_fd).abs())
            })
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    let (inner, outer) = (dev_th(0.1, 0.2), dev_th(0.3, 0.45));
    let mag = |lo, hi| {
        let v: Vec<f64> = band(lo, hi)
            .flat_map(|r| [r.t_fd.abs(), r.t_can.abs(), r.t_th.abs()])
            .collect();
        (
            v.iter().cloned().fold(f64::MAX, f64::min),
            v.iter().cloned().fold(0.0, f64::max),
        )
    };
    let (center_min, _) = mag(0.0, 0.05);
    let (_, flank_max) = mag(0.25, 0.35);
    let signs = rows.iter().filter(|r| r.e_over_b.abs() >= 0.1).all(|r| {
        let want = -r.e_over_b.signum();
        [r.t_fd, r.t_can, r.t_th].iter().all(|x| x.signum() == want)
    });
    let pass = fd_can <= 0.25 && outer > inner && center_min > 3.0 * flank_max && signs;
    s.report(
        8,
        pass,
        "temperature consistency, n=12 J=0.3 N_D=2",
        format!(
            "max |T_FD-T_can|/|T_can| on 0.1<=|E/B|<0.35: {fd_can:.3} (<= 0.25); T_th deviation inner {inner:.3} < outer {outer:.3}; \
             min |T| near center {center_min:.2} > 3x flank max {flank_max:.3}; sign(T) = -sign(E/B): {signs}"
        ),
        t,
    );
}

fn criterion9(s: &mut Suite) {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        notes.push(format!(
            "{name} {} {detail}",
            if pass { "ok" } else { "FAILED" }
        ));
    };

    // iterative vs dense, n=9
    let lattice = Lattice::periodic(3, 3).unwrap();
    let basis = BandBasis::central(9).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let real =
            DisorderRealization::sample(&ModelParams::new(1.0, 0.3), &lattice, seed).unwrap();
        let h = BandHamiltonian::build(&lattice, &real, &basis).unwrap();
        let dense = dense_full_diag(&h, false, 1000).unwrap().eigenvalues;
        let opts = LanczosOptions::default();
        let lo = iterative_extremal(&h, 10, Side::Lowest, &opts)
            .unwrap()
            .eigenvalues;
        let hi = iterative_extremal(&h, 10, Side::Highest, &opts)
            .unwrap()
            .eigenvalues;
        let top = &dense[dense.len() - 10..];
        for (a, b) in lo.iter().zip(&dense[..10]).chain(hi.iter().zip(top)) {
            worst = worst.max((a - b).abs());
        }
    }
    check("lanczos-vs-dense", worst <= 1e-8, format!("{worst:.1e}"));

    // Fermi-Dirac round trip
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let uniform = Uniform::new(0.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for beta in [-20.0, -5.0, -1.0, -0.2, 0.2, 1.0, 5.0, 20.0] {
        for _ in 0..5 {
            let eps: Vec<f64> = (0..12).map(|_| uniform.sample(&mut rng)).collect();
            let (_, occ) = fd_occupations(beta, &eps, 6, 1.0).unwrap();
            let fit = fd_fit(&occ, &eps, 6, 1.0).unwrap();
            worst = worst.max((fit.beta - beta).abs());
        }
    }
    check(
        "fd-round-trip",
        worst <= 1e-3,
        format!("|dbeta| {worst:.1e}"),
    );

    // occupation sum rule on every eigenvector of an n=9 band
    let real = DisorderRealization::sample(&ModelParams::new(1.0, 0.5), &lattice, 3).unwrap();
    let h = BandHamiltonian::build(&lattice, &real, &basis).unwrap();
    let spec = dense_full_diag(&h, true, 1000).unwrap();
    let worst = (0..spec.len())
        .map(|m| {
            let occ = occupation_numbers(spec.vector(m).unwrap(), &basis).unwrap();
            (occ.iter().sum::<f64>() - basis.n_up() as f64).abs()
        })
        .fold(0.0, f64::max);
    check("sum-rule", worst <= 1e-8, format!("{worst:.1e}"));

    // eta oracles: exponential spacings and 2x2 GOE spacings
    let poisson: Vec<f64> = (0..20000).map(|_| Exp1.sample(&mut rng)).collect();
    let goe: Vec<f64> = (0..20000)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let c: f64 = StandardNormal.sample(&mut rng);
            ((a - b).powi(2) + 2.0 * c * c).sqrt()
        })
        .collect();
    let unit = |v: Vec<f64>| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.into_iter().map(|x| x / mean).collect::<Vec<_>>()
    };
    let ep = eta_from_spacings(&unit(poisson)).unwrap().eta;
    let eg = eta_from_spacings(&unit(goe)).unwrap().eta;
    check(
        "eta-oracles",
        (ep - 1.0).abs() <= 0.05 && eg.abs() <= 0.05,
        format!("poisson {ep:.3} goe {eg:.3}"),
    );

    // byte-identical tables across thread counts
    let mut same = true;
    for mut cfg in [
        config(Kind::EtaScan, 3, 3, Couplings::Scaled(vec![1.0, 4.0]), 40),
        config(
            Kind::TemperatureComparison,
            3,
            3,
            Couplings::Absolute(vec![0.3]),
            4,
        ),
        config(Kind::SigmaScan, 3, 3, Couplings::Scaled(vec![3.0]), 20),
    ] {
        let mut texts = Vec::new();
        for threads in [1, 3] {
            cfg.threads = Some(threads);
            let sum = run(&cfg);
            texts.push(
                tables(&sum)
                    .into_iter()
                    .map(|(_, t)| t.to_csv())
                    .collect::<String>(),
            );
        }
        same &= texts[0] == texts[1];
    }
    check("determinism", same, String::new());

    // band projection against the full 2^9 Hamiltonian, Delta0 = 25 delta
    let delta0 = 25.0;
    let mut worst = 0.0f64;
    let mut bound = f64::MAX;
    for (seed, j) in [(1u64, 0.1), (2, 0.3), (3, 0.5)] {
        let real = DisorderRealization::sample(&ModelParams::new(1.0, j), &lattice, seed).unwrap();
        let band = dense_full_diag(
            &BandHamiltonian::build(&lattice, &real, &basis).unwrap(),
            false,
            1000,
        )
        .unwrap()
        .eigenvalues;
        let full = FullHamiltonian::build(&lattice, &real, delta0).unwrap();
        let offset = full.band_offset(basis.n_up(), delta0);
        let (all, _) = dense_eigen(full.dim(), &full.to_dense(), false).unwrap();
        let projected: Vec<f64> = all
            .iter()
            .filter(|e| (*e - offset).abs() < delta0)
            .map(|e| e - offset)
            .collect();
        assert_eq!(projected.len(), band.len());
        for (a, b) in projected.iter().zip(&band) {
            worst = worst.max((a - b).abs());
        }
        bound = bound.min(5.0 * (1.0 + j).powi(2) / delta0);
    }
    check(
        "band-projection",
        worst <= bound,
        format!("{worst:.2e} <= {bound:.2e}"),
    );

    s.report(9, ok, "oracle and property suite", notes.join("; "), t);
}

fn main() {
    let quick = std::env::var("ACCEPTANCE_QUICK").is_ok_and(|v| !v.is_empty() && v != "0");
    if std::env::args().any(|a| a == "--list") {
        for i in 1..=9 {
            println!("criterion{i}: test");
        }
        return;
    }
    let mut suite = Suite {
        quick,
        results: Vec::new(),
    };
    if quick {
        println!("acceptance: quick mode, reduced ensembles");
    }
    let criteria: [fn(&mut Suite); 9] = [
        criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7,
        criterion8, criterion9,
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    for (i, c) in criteria.iter().enumerate() {
        if only.is_none_or(|o| o == i as u32 + 1) {
            c(&mut suite);
        }
    }
    let failed: Vec<u32> = suite.results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        suite.results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({failed:?})")
        }
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| !v.is_empty() && v != "0");
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
