//! Sequential against parallel execution for the two data-parallel hot spots:
//! column-wise operator assembly and parameter sweeps.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use curveflow::curve_geometry::{make_named_curve, NamedCurve, ParamGrid};
use curveflow::energies::{
    default_nodal_model, phase_sep_energy, recovery_sequence, PhaseSepParams, TransitionSet,
};
use curveflow::kinematics::geometry_operator;
use curveflow::parallel::{self, Execution};
use curveflow::surface_calculus::assemble_with;

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn operator_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_geometry_operator");
    for n in [128, 256] {
        let u = make_named_curve(&NamedCurve::trillium(), &ParamGrid::fd4(n).unwrap()).unwrap();
        for (label, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(label, n), &u, |b, u| {
                b.iter(|| assemble_with(exec, n, |e| geometry_operator(u, e)))
            });
        }
    }
    group.finish();
}

fn recovery_sweep(c: &mut Criterion) {
    let nodal = default_nodal_model();
    let u = make_named_curve(&NamedCurve::trillium(), &ParamGrid::fd4(2048).unwrap()).unwrap();
    let t = TransitionSet::new(vec![0.25, 0.75], true).unwrap();
    let epsilons: Vec<f64> = (0..16).map(|i| 0.04 * 0.85_f64.powi(i)).collect();
    let mut group = c.benchmark_group("recovery_energy_sweep");
    for (label, exec) in STRATEGIES {
        group.bench_function(label, |b| {
            b.iter(|| {
                parallel::map(exec, &epsilons, |&eps| {
                    let rec = recovery_sequence(&u, &t, eps, &nodal).unwrap();
                    let params = PhaseSepParams {
                        epsilon: eps,
                        delta: 0.2,
                        beta: 0.0,
                        sigma1_len: 1.0,
                        gamma0_length: 1.0,
                    };
                    black_box(phase_sep_energy(&u, &rec.density, &params, &nodal))
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, operator_assembly, recovery_sweep);
criterion_main!(benches);
