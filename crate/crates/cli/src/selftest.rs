use std::f64::consts::PI;

use hyperideal::bundled;
use hyperideal::coherent::{build_constraints, find_coherent};
use hyperideal::energy::{five_tetra, five_tetra_alt, tet_volume, v0, vol_p4, IdealTriple, TetAngles};
use hyperideal::layout::lay_out;
use hyperideal::lob::{lob, lob_second_deriv};
use hyperideal::pattern::{metric_from_lengths, probe, truncated_lengths};
use hyperideal::solve::solve_problem;
use hyperideal::surface::parse_problem;
use hyperideal::{SolveOptions, SolveStatus};

use crate::Failure;

type Check = (bool, String);

fn lob_values() -> Check {
    // Catalan's constant and the value at pi/3 fix the reference points.
    let catalan = 0.915_965_594_177_219_015_054_6;
    let l3 = 0.338_313_868_803_217_8;
    let cases = [(PI / 4.0, catalan / 2.0), (PI / 3.0, l3), (PI / 6.0, 1.5 * l3), (PI / 2.0, 0.0), (PI, 0.0)];
    let err = cases.iter().map(|&(x, want)| (lob(x).unwrap() - want).abs()).fold(0.0, f64::max);
    (err <= 1e-14, format!("max |err| {err:.2e} at pi/6, pi/4, pi/3, pi/2, pi"))
}

fn regular_ideal() -> Check {
    let v = v0(&IdealTriple::new(PI / 3.0, PI / 3.0, PI / 3.0)).unwrap();
    let err = (v - 1.014_941_606_409_653_6).abs();
    (err <= 1e-14, format!("regular ideal volume {v:.16}"))
}

fn grid() -> Vec<TetAngles<f64>> {
    let n = 12;
    let mut out = Vec::new();
    for i in 1..n {
        for j in 1..n - i {
            let g = [PI * i as f64 / n as f64, PI * j as f64 / n as f64, PI * (n - i - j) as f64 / n as f64];
            let room = (PI - g.iter().cloned().fold(0.0, f64::max)) / 2.0;
            for c in [0.1, 0.5, 0.95] {
                for w in [[1.0, 1.0, 1.0], [1.0, 0.6, 0.2], [0.3, 1.0, 0.7]] {
                    let t = TetAngles::new([c * room * w[0], c * room * w[1], c * room * w[2]], g);
                    if t.in_open() {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

fn identities() -> Check {
    let samples = grid();
    let (mut five, mut alt, mut pyr) = (0.0_f64, 0.0_f64, 0.0_f64);
    for t in &samples {
        let v = tet_volume(t).unwrap();
        let s5: f64 = five_tetra(t).unwrap().triples().iter().map(|tr| v0(tr).unwrap()).sum();
        let sa: f64 = five_tetra_alt(t).unwrap().iter().map(|tr| v0(tr).unwrap()).sum();
        let [a12, a23, a31] = t.alpha;
        let [g1, g2, g3] = t.gamma;
        let p = vol_p4(a12, a31, g1).unwrap() + vol_p4(a23, a12, g2).unwrap() + vol_p4(a31, a23, g3).unwrap();
        five = five.max((2.0 * v - s5).abs());
        alt = alt.max((2.0 * v - sa).abs());
        pyr = pyr.max((v - p).abs());
    }
    (
        five.max(alt).max(pyr) <= 1e-12,
        format!("{} grid points: max err {five:.2e} / {alt:.2e} / {pyr:.2e}", samples.len()),
    )
}

fn ideal_hessian() -> Check {
    let mut err = 0.0_f64;
    let n = 20;
    for i in 1..n {
        for j in 1..n - i {
            let (a, b) = (PI * i as f64 / n as f64, PI * j as f64 / n as f64);
            let c = PI - a - b;
            let d = |x: f64| lob_second_deriv(x).unwrap();
            let (faa, fbb, fab) = (d(a) + d(c), d(b) + d(c), d(c));
            err = err.max((faa * fbb - fab * fab - 1.0).abs());
        }
    }
    (err <= 1e-9, format!("max |det - 1| {err:.2e}"))
}

fn verdicts() -> Check {
    let mut wrong = Vec::new();
    for (name, text, feasible) in bundled::ALL {
        let (tri, data) = parse_problem(text).unwrap();
        if find_coherent(&build_constraints(&tri, &data)).unwrap().is_feasible() != feasible {
            wrong.push(name);
        }
    }
    (wrong.is_empty(), format!("{} problems, wrong: {wrong:?}", bundled::ALL.len()))
}

fn torus() -> Check {
    let (tri, data) = parse_problem(bundled::TORUS).unwrap();
    let (x, rep) = solve_problem(&tri, &data, &SolveOptions::default()).unwrap();
    let err = (0..tri.triangle_count())
        .flat_map(|t| {
            let a = x.tet(t);
            let alpha = a.alpha.map(|v| (v - PI / 4.0).abs());
            let gamma = a.gamma.map(|v| (v - PI / 3.0).abs());
            alpha.into_iter().chain(gamma)
        })
        .fold(0.0, f64::max);
    (
        rep.status == SolveStatus::Converged && err <= 1e-8,
        format!("{:?} in {} iterations, angle err {err:.2e}", rep.status, rep.iterations),
    )
}

fn round_trips() -> Check {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (_, text, feasible) in bundled::ALL {
        if !feasible {
            continue;
        }
        let (tri, data) = parse_problem(text).unwrap();
        let (x, _) = solve_problem(&tri, &data, &SolveOptions::default()).unwrap();
        let dm = metric_from_lengths(&truncated_lengths(&x, &tri).unwrap(), &tri);
        lay_out(&tri, &dm).unwrap();
        let (again, _) = probe(&tri, &dm).unwrap();
        let theta = again.theta.iter().zip(&data.theta).map(|(a, b)| (a - b).abs());
        let xi = again.xi.iter().zip(&data.xi).map(|(a, b)| (a - b).abs());
        worst = theta.chain(xi).fold(worst, f64::max);
        count += 1;
    }
    (worst <= 1e-7, format!("{count} problems solved, laid out and re-probed: max data err {worst:.2e}"))
}

pub fn run(verbose: bool) -> Result<(), Failure> {
    let checks: [(&str, fn() -> Check); 7] = [
        ("lobachevsky values", lob_values),
        ("regular ideal tetrahedron", regular_ideal),
        ("volume identities", identities),
        ("ideal hessian determinant", ideal_hessian),
        ("bundled verdicts", verdicts),
        ("symmetric torus", torus),
        ("bundled round trips", round_trips),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let (ok, detail) = std::panic::catch_unwind(check).unwrap_or_else(|_| (false, "panicked".into()));
        failed += usize::from(!ok);
        if verbose || !ok {
            println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        } else {
            println!("PASS {name}");
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Precondition(format!("{failed} selftest checks failed")))
    }
}
